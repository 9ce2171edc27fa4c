use proptest::prelude::*;
use subarcs_core::arcs::{arc_chain, refine_chain, verify_arc_inclusions, ChainBuilder};
use subarcs_core::construction::{build_system, cyclic_family, lemma1_family};
use subarcs_core::dendrite::CertifiedComplex;
use subarcs_core::measures::{check_arc_decomposition, determine_n, moran_dimension, Branch};
use subarcs_core::{Address, ADDRESS_DEPTH, DEFAULT_EPS};

fn a(s: &str) -> Address {
    s.parse().unwrap()
}

fn cyclic(addr: &str) -> ChainBuilder {
    let p = cyclic_family(0.2, &a(addr)).unwrap();
    ChainBuilder::new(build_system(&p, ADDRESS_DEPTH).unwrap(), DEFAULT_EPS)
}

#[test]
fn both_families_certify_through_depth_four() {
    for p in [
        cyclic_family(0.2, &a("12(23)")).unwrap(),
        lemma1_family(0.3, &a("2(1)"), 1e-10).unwrap(),
        cyclic_family(0.25, &a("12(3)")).unwrap(),
    ] {
        let s = build_system(&p, ADDRESS_DEPTH).unwrap();
        for k in 1..=4 {
            let c = CertifiedComplex::new(&s, k, DEFAULT_EPS).unwrap();
            assert_eq!(c.nerve.edges().len(), 4usize.pow(k as u32) - 1);
        }
    }
}

#[test]
fn inclusions_on_a_second_cyclic_address() {
    let mut b = cyclic("12(3)");
    for k in 2..=3 {
        assert!(verify_arc_inclusions(&mut b, k).unwrap().holds());
    }
}

#[test]
fn decomposition_on_generic_branch_with_n_one() {
    let mut b = cyclic("12(3)");
    let n = match determine_n(&b.system().params().addresses()[0]).unwrap() {
        Branch::Generic(n) => n,
        other => panic!("{other:?}"),
    };
    assert_eq!(n, 1);
    for x in ["11(2)", "1302(31)", "121(03)"] {
        let c = check_arc_decomposition(&mut b, n, &a(x), 5).unwrap();
        assert!(c.matches(), "{x}");
    }
}

#[test]
fn dimension_order_holds_over_a_grid() {
    for p1 in [0.05, 0.1, 0.2, 0.3] {
        for p2 in [0.05, 0.15, 0.25] {
            let p3 = (1.0 - p1 - p2) * 0.5;
            let d2 = moran_dimension(&[p1, p2]).unwrap().d;
            let d3 = moran_dimension(&[p1, p2, p3]).unwrap().d;
            assert!(d2 < d3 && d3 < 1.0, "{p1} {p2}");
        }
    }
}

fn address() -> impl Strategy<Value = Address> {
    (prop::collection::vec(0u8..4, 2..5), prop::collection::vec(0u8..4, 1..3))
        .prop_map(|(pre, per)| Address::periodic(pre, per).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn refined_chains_collapse_to_their_parents(x in address(), y in address()) {
        prop_assume!(x.digit(0).unwrap() != y.digit(0).unwrap());
        let mut b = cyclic("12(23)");
        let c = arc_chain(&mut b, &x, &y, 3).unwrap();
        let r = refine_chain(&mut b, &c).unwrap();
        prop_assert!(r.len() >= c.len());
        prop_assert_eq!(r.parent_collapse(), c.cells);
    }

    #[test]
    fn chains_are_reversible(x in address(), y in address()) {
        prop_assume!(x.digit(0).unwrap() != y.digit(0).unwrap());
        let mut b = cyclic("12(23)");
        let mut forward = arc_chain(&mut b, &x, &y, 3).unwrap().cells;
        let back = arc_chain(&mut b, &y, &x, 3).unwrap().cells;
        forward.reverse();
        prop_assert_eq!(forward, back);
    }
}
