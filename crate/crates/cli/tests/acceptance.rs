//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the verdicts are always printed; exits non-zero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use subarcs_cli::commands::resolve_system;
use subarcs_cli::config::{parse_config, RunConfig};
use subarcs_cli::{run, sampling, Command};
use subarcs_core::addresses::pcf_status;
use subarcs_core::arcs::{estimate_dimension, estimate_from_covers, verify_arc_inclusions, vertex_arc, ChainBuilder};
use subarcs_core::construction::{build_system, cyclic_family, lemma1_family};
use subarcs_core::dendrite::{build_complex, verify_dendrite};
use subarcs_core::measures::{
    build_gd_system, check_arc_decomposition, determine_n, iterate_measure_sets, mauldin_williams_check,
    moran_dimension, Branch, Classification, GraphDirectedSystem,
};
use subarcs_core::zipper::{solve_p2, CantorPair};
use subarcs_core::{Address, PcfStatus, SystemParams, ADDRESS_DEPTH, DEFAULT_EPS};

fn a(s: &str) -> Address {
    s.parse().expect("address literal")
}

const CYCLIC: &str = "family = cyclic\np = 0.2\naddrB1 = 12(23)\n";
const LEMMA1: &str = "family = lemma1\np1 = 0.3\ntail = 2(1)\n";

fn families() -> Vec<(&'static str, SystemParams)> {
    vec![
        ("cyclic", cyclic_family(0.2, &a("12(23)")).unwrap()),
        ("lemma1", lemma1_family(0.3, &a("2(1)"), 1e-10).unwrap()),
    ]
}

fn builder(p: &SystemParams) -> ChainBuilder {
    ChainBuilder::new(build_system(p, ADDRESS_DEPTH).unwrap(), DEFAULT_EPS)
}

/// Outcome of one criterion: pass flag plus a short account.
type Verdict = (bool, String);
type Criterion = (&'static str, fn() -> Verdict);

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let (ok, msg) = f();
    let took = start.elapsed();
    let in_time = took <= limit;
    (
        ok && in_time,
        format!("{msg}; {:.2}s (limit {}s{})", took.as_secs_f64(), limit.as_secs(), if in_time { "" } else { ", exceeded" }),
    )
}

fn moran_exactness() -> Verdict {
    timed(Duration::from_secs(1), || {
        let cases: [(&[f64], f64); 3] = [
            (&[1.0 / 3.0, 1.0 / 3.0], 2f64.ln() / 3f64.ln()),
            (&[0.2, 0.2], 2f64.ln() / 5f64.ln()),
            (&[0.2, 0.2, 0.2], 3f64.ln() / 5f64.ln()),
        ];
        let mut worst: f64 = 0.0;
        let mut worst_res: f64 = 0.0;
        for (r, exact) in cases {
            let s = moran_dimension(r).unwrap();
            worst = worst.max((s.d - exact).abs());
            worst_res = worst_res.max(s.residual);
        }
        (worst < 1e-12 && worst_res < 1e-12, format!("max |d - closed form| = {worst:.1e}, max residual = {worst_res:.1e}"))
    })
}

fn mauldin_williams() -> Verdict {
    let d = 2f64.ln() / 5f64.ln();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [1, 3] {
        let c = mauldin_williams_check(0.2, 0.2, n, d).unwrap();
        let err = (c.mu - 1.0).abs().max((c.nu - 1.0).abs());
        let res = c.residual_mu.max(c.residual_nu);
        ok &= err < 1e-10 && res < 1e-10;
        parts.push(format!("n={n}: |(mu,nu)-(1,1)| = {err:.1e}, residual = {res:.1e}"));
    }
    (ok, parts.join("; "))
}

fn lemma1_solver() -> Verdict {
    timed(Duration::from_secs(1), || {
        let e1 = (solve_p2(0.3, &a("2(1)"), 1e-10).unwrap().p2 - 3.0 / 13.0).abs();
        let e2 = (solve_p2(0.3, &a("(2)"), 1e-10).unwrap().p2 - 0.21).abs();
        let rejected = solve_p2(0.3, &a("(1)"), 1e-10).is_err();
        (
            e1 < 1e-10 && e2 < 1e-10 && rejected,
            format!("|p2 - 3/13| = {e1:.1e}, |p2 - 0.21| = {e2:.1e}, tail (1) rejected: {rejected}"),
        )
    })
}

fn certification() -> Verdict {
    let mut ok = true;
    let mut slowest = Duration::ZERO;
    let mut notes = Vec::new();
    for (name, p) in families() {
        let system = build_system(&p, ADDRESS_DEPTH).unwrap();
        for k in 1..=6usize {
            let start = Instant::now();
            let complex = build_complex(&system, k, DEFAULT_EPS).unwrap();
            let r = verify_dendrite(&complex, DEFAULT_EPS).unwrap();
            let took = start.elapsed();
            if k == 6 {
                slowest = slowest.max(took);
            }
            let good = r.overlap_count() == 0
                && r.connected
                && r.acyclic
                && r.edge_count == 4usize.pow(k as u32) - 1
                && r.nesting
                && r.max_boundary_count <= 3;
            if !good {
                notes.push(format!("{name} k={k}: {r:?}"));
            }
            ok &= good;
        }
    }
    let in_time = slowest <= Duration::from_secs(30);
    (
        ok && in_time,
        format!(
            "both families, k=1..6: {}; slowest k=6 run {:.2}s (limit 30s)",
            if notes.is_empty() { "tree with 4^k-1 edges, no overlaps, nested, <= 3 contacts".to_string() } else { notes.join(" | ") },
            slowest.as_secs_f64()
        ),
    )
}

fn pcf_dichotomy() -> Verdict {
    timed(Duration::from_secs(1), || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, p) in families() {
            let r = pcf_status(&p, ADDRESS_DEPTH);
            let good = r.status == PcfStatus::Pcf && !r.postcritical.is_empty() && r.witness.is_none();
            ok &= good;
            parts.push(format!("{name}: {:?} with {} postcritical addresses", r.status, r.postcritical.len()));
        }
        let tm = cyclic_family(0.2, &a("12tm23")).unwrap();
        let r = pcf_status(&tm, ADDRESS_DEPTH);
        let good = r.status == PcfStatus::NotPcf && r.witness.is_some();
        ok &= good;
        parts.push(format!(
            "12tm23: {:?}, witness {}",
            r.status,
            r.witness.map_or("none".to_string(), |w| w.to_string())
        ));
        (ok, parts.join("; "))
    })
}

fn inclusions() -> Verdict {
    let mut ok = true;
    let mut unmatched = 0;
    for (_, p) in families() {
        let mut b = builder(&p);
        for k in 2..=4 {
            let r = verify_arc_inclusions(&mut b, k).unwrap();
            unmatched += r.checks.iter().map(|c| c.unmatched.len()).sum::<usize>();
            ok &= r.holds() && r.checks.len() == 3 && r.checks.iter().all(|c| c.inner_cells > 0);
        }
    }
    (ok, format!("three inclusions, k=2..4, both families: {unmatched} unmatched cells"))
}

const DIM_DEPTHS: [usize; 5] = [5, 6, 7, 8, 9];

fn dimension_coherence() -> Verdict {
    timed(Duration::from_secs(120), || {
        let mut ok = true;
        let mut parts = Vec::new();
        for (name, p) in families() {
            let mut b = builder(&p);
            let s: Vec<f64> = (1..=3)
                .map(|i| {
                    let (o, v) = vertex_arc(i);
                    estimate_dimension(&mut b, &o, &v, &DIM_DEPTHS).unwrap().value
                })
                .collect();
            let spread = s.iter().cloned().fold(f64::MIN, f64::max) - s.iter().cloned().fold(f64::MAX, f64::min);
            let mut rng = sampling::rng(42);
            let mut dev: f64 = 0.0;
            for _ in 0..10 {
                let (x, y) = sampling::random_subarc(&mut rng);
                let e = estimate_dimension(&mut b, &x, &y, &DIM_DEPTHS).unwrap();
                dev = dev.max((e.value - s[0]).abs());
            }
            let [p1, p2, _] = p.ratios();
            let pair = CantorPair::new(p1, p2).unwrap();
            let covers: Vec<_> = DIM_DEPTHS.iter().map(|&k| (k, pair.cell_widths(k))).collect();
            let base = estimate_from_covers(&covers).unwrap().value;
            let good = spread < 0.05 && s.iter().all(|&v| v >= 0.98) && dev < 0.05 && (base - 1.0).abs() < 0.02;
            ok &= good;
            parts.push(format!(
                "{name}: s = ({:.4}, {:.4}, {:.4}), spread {spread:.4}, subarc max deviation {dev:.4}, baseline {base:.4}",
                s[0], s[1], s[2]
            ));
        }
        (ok, parts.join("; "))
    })
}

fn config(text: &str, out: &Path) -> RunConfig {
    let mut c = parse_config(text).unwrap();
    c.out = out.to_path_buf();
    c
}

fn dimension_ordering() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, text) in [("cyclic", CYCLIC), ("lemma1", LEMMA1)] {
        let cfg = config(text, dir.path());
        let out = run(&cfg, Command::Measures);
        let r = &out.report["result"];
        let d = r["d"].as_f64().unwrap_or(f64::NAN);
        let kp = r["dim_k_prime"].as_f64().unwrap_or(f64::NAN);
        let [p1, p2, _] = resolve_system(&cfg).unwrap().params().ratios();
        let moran = moran_dimension(&[p1, p2]).unwrap().d;
        let good = out.code == 0 && d < kp && kp < 1.0 && (d - moran).abs() < 1e-12;
        ok &= good;
        parts.push(format!("{name}: d = {d:.10} < dim K' = {kp:.10} < 1, |d - moran| = {:.1e}", (d - moran).abs()));
    }
    (ok, parts.join("; "))
}

/// Separate interval oracle: enumerates every word of edges explicitly,
/// tagging each image by the edge it starts with.
fn oracle_gap(gds: &GraphDirectedSystem, depth: usize) -> f64 {
    let index = |n| gds.nodes.iter().position(|&m| m == n).unwrap();
    let k = gds.nodes.len();
    // Hulls: iterate the interval operator from [0, 0] long enough to converge.
    let mut hull = vec![(0.0f64, 0.0f64); k];
    for _ in 0..5000 {
        let mut next = vec![(f64::MAX, f64::MIN); k];
        for e in &gds.edges {
            let (lo, hi) = hull[index(e.source)];
            let t = index(e.target);
            next[t].0 = next[t].0.min(e.offset + e.ratio * lo);
            next[t].1 = next[t].1.max(e.offset + e.ratio * hi);
        }
        hull = next;
    }
    // Words x_target <- e1 <- e2 ... ; an interval per word, tagged by (label, target) of e1.
    fn expand(gds: &GraphDirectedSystem, hull: &[(f64, f64)], node: usize, left: usize) -> Vec<(f64, f64)> {
        if left == 0 {
            return vec![hull[node]];
        }
        let mut out = Vec::new();
        for e in gds.edges.iter().filter(|e| gds.nodes[node] == e.target) {
            let src = gds.nodes.iter().position(|&m| m == e.source).unwrap();
            for (lo, hi) in expand(gds, hull, src, left - 1) {
                out.push((e.offset + e.ratio * lo, e.offset + e.ratio * hi));
            }
        }
        out
    }
    let mut best = f64::INFINITY;
    for level in 1..=depth {
        for node in 0..k {
            let mut pieces: Vec<(f64, f64, &str)> = Vec::new();
            for e in gds.edges.iter().filter(|e| gds.nodes[node] == e.target) {
                let src = gds.nodes.iter().position(|&m| m == e.source).unwrap();
                for (lo, hi) in expand(gds, &hull, src, level - 1) {
                    pieces.push((e.offset + e.ratio * lo, e.offset + e.ratio * hi, e.label.as_str()));
                }
            }
            for (i, x) in pieces.iter().enumerate() {
                for y in &pieces[i + 1..] {
                    if x.2 != y.2 {
                        let gap = (y.0 - x.1).max(x.0 - y.1);
                        best = best.min(gap);
                    }
                }
            }
        }
    }
    best
}

fn measure_sets() -> Verdict {
    let params = SystemParams::new([0.2; 3], [a("12(3)"), a("23(1)"), a("31(2)")]);
    let depth = 6;
    let unit = build_gd_system(&params, Branch::Generic(1), &[1.0; 3]).unwrap();
    let sets = iterate_measure_sets(&unit, depth);
    let oracle = oracle_gap(&unit, depth);
    let closed = 0.2 / 0.96 - 0.05;
    let unit_ok = sets.classification == Classification::CantorDiscontinuum
        && sets.min_gap > 0.0
        && (sets.min_gap - oracle).abs() < 1e-9
        && (sets.min_gap - closed).abs() < 1e-9
        && sets.nesting;
    let zero = build_gd_system(&params, Branch::Generic(1), &[0.0; 3]).unwrap();
    let z = iterate_measure_sets(&zero, depth);
    let zero_ok = z.classification == Classification::SinglePoint && z.nesting;
    let lemma = SystemParams::new([0.3, 3.0 / 13.0, 0.3], [a("1(2)"), a("2(3)"), a("312(1)")]);
    let b = build_gd_system(&lemma, Branch::B1EqualsP1, &[1.0; 3]).unwrap();
    let nest_ok = (1..=depth).all(|k| iterate_measure_sets(&b, k).nesting);
    (
        unit_ok && zero_ok && nest_ok,
        format!(
            "unit offsets: {:?}, gap {:.12} vs oracle {:.12}; zero offsets: {:?}; nesting at every depth: {}",
            sets.classification,
            sets.min_gap,
            oracle,
            z.classification,
            sets.nesting && z.nesting && nest_ok
        ),
    )
}

fn decomposition() -> Verdict {
    let p = cyclic_family(0.2, &a("12(23)")).unwrap();
    let Branch::Generic(n) = determine_n(&p.addresses()[0]).unwrap() else {
        return (false, "cyclic family is not on the generic branch".into());
    };
    let mut b = builder(&p);
    let mut rng = sampling::rng(42);
    let mut matched = 0;
    let mut failures = Vec::new();
    for _ in 0..10 {
        let x = sampling::decomposition_address(&mut rng, n);
        match check_arc_decomposition(&mut b, n, &x, 6) {
            Ok(c) if c.matches() => matched += 1,
            Ok(c) => failures.push(format!("{x}: {} vs {} cells", c.expected.len(), c.actual.len())),
            Err(e) => failures.push(format!("{x}: {e}")),
        }
    }
    (
        matched == 10,
        format!("{matched}/10 sampled points 1 2^k w match at depth 6{}", if failures.is_empty() { String::new() } else { format!(": {}", failures.join("; ")) }),
    )
}

fn read_artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("json" | "csv")))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Verdict {
    let commands = [Command::SolveParams, Command::Build, Command::Verify, Command::Pcf, Command::ArcDim, Command::Measures];
    let mut ok = true;
    let mut compared = 0;
    for text in [CYCLIC, LEMMA1] {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config(&format!("{text}samples = 3\ndim_depths = 4,5,6\n"), dir.path());
        let mut runs = Vec::new();
        for _ in 0..2 {
            for c in commands {
                ok &= run(&cfg, c).code == 0;
            }
            runs.push(read_artifacts(dir.path()));
            for (name, _) in runs.last().unwrap() {
                fs::remove_file(dir.path().join(name)).unwrap();
            }
        }
        compared += runs[0].len();
        ok &= !runs[0].is_empty() && runs[0] == runs[1];
    }
    (ok, format!("{compared} JSON/CSV artifacts byte-identical across two runs of the same config"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        ("Moran solver exactness", moran_exactness),
        ("Mauldin-Williams consistency", mauldin_williams),
        ("p2 solver closed forms", lemma1_solver),
        ("dendrite certification", certification),
        ("PCF dichotomy", pcf_dichotomy),
        ("arc inclusions", inclusions),
        ("dimension coherence", dimension_coherence),
        ("dimension ordering", dimension_ordering),
        ("measure-set structure", measure_sets),
        ("arc decomposition", decomposition),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let (ok, msg) = f();
        if !ok {
            failed += 1;
        }
        println!("criterion {}: {} {name}: {msg}", i + 1, if ok { "PASS" } else { "FAIL" });
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
