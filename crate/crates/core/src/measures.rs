//! The graph-directed system formed by the measures of subarcs from `O`,
//! its Moran dimension, and the Cantor-or-point classification of its
//! attractor.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::addresses::{Address, AddressError};
use crate::arcs::{arc_chain, crossing_exponent, premeasure, ArcChain, ArcError, ChainBuilder};
use crate::construction::SystemParams;
use crate::geometry::Multiindex;
use crate::numeric::{bisect, linear_fit};

/// Width below which a hull counts as a point.
const POINT_WIDTH: f64 = 1e-12;
/// Smallest gap accepted as strict separation.
const GAP_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("ratios must lie in (0, 1) and be nonempty: {0:?}")]
    InvalidRatios(Vec<f64>),
    #[error("Mauldin-Williams eigenvector not positive (mu = {mu}, nu = {nu})")]
    NonPositiveEigenvector { mu: f64, nu: f64 },
    #[error("expected {expected} offsets, got {got}")]
    ArityMismatch { expected: usize, got: usize },
    #[error("no crossing found for the Moran equation")]
    NoRoot,
    #[error("{address} does not start with 1 2^k followed by 1 or 3 for some k <= {n}")]
    NotDecomposable { address: Address, n: usize },
    #[error("depth {depth} leaves no room below the prefix of length {prefix}")]
    DepthTooShallow { depth: usize, prefix: usize },
    #[error(transparent)]
    Address(#[from] AddressError),
    #[error(transparent)]
    Arc(#[from] ArcError),
}

/// Which graph-directed system describes the measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// `B1` lies in `S1 S2^n(K)` but not in `S1 S2^{n+1}(K)`.
    Generic(usize),
    /// `B1 = S1(A2)`.
    B1EqualsP1,
}

/// Reads the branch from the address of `B1`: the length of the run of 2s
/// after the leading 1.
pub fn determine_n(addr_b1: &Address) -> Result<Branch, MeasureError> {
    Ok(match addr_b1.run_length(1, 2)? {
        None => Branch::B1EqualsP1,
        Some(n) => Branch::Generic(n),
    })
}

fn zero() -> Address {
    Address::constant(0).expect("digit 0")
}

/// Endpoint pairs of the arcs whose measures are the offsets of the system:
/// `λ_0..λ_n, λ'` for `Generic(n)`, and `γ_{A2 B1}, γ_{O S2(B1)}, γ_{O O2}`
/// when `B1 = S1(A2)`.
pub fn lambda_endpoints(branch: Branch) -> Vec<(Address, Address)> {
    let p = |pre: Vec<u8>, per: u8| Address::periodic(pre, alloc::vec![per]).expect("valid digits");
    match branch {
        Branch::Generic(n) => {
            let mut out: Vec<_> = (0..=n)
                .map(|k| {
                    let mut pre = alloc::vec![1];
                    pre.extend(core::iter::repeat_n(2, k));
                    (zero(), p(pre, 0))
                })
                .collect();
            out.push((zero(), p(alloc::vec![2], 0)));
            out
        }
        Branch::B1EqualsP1 => alloc::vec![
            (p(Vec::new(), 2), p(alloc::vec![1], 2)),
            (zero(), p(alloc::vec![2, 1], 2)),
            (zero(), p(alloc::vec![2], 0)),
        ],
    }
}

pub fn lambda_arcs(builder: &mut ChainBuilder, branch: Branch, k: usize) -> Result<Vec<ArcChain>, MeasureError> {
    lambda_endpoints(branch)
        .iter()
        .map(|(a, b)| arc_chain(builder, a, b, k).map_err(MeasureError::from))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoranSolution {
    pub d: f64,
    /// `|Σ r_i^d - 1|`.
    pub residual: f64,
    /// Mauldin-Williams eigenvector, filled for two ratios.
    pub mu: Option<f64>,
    pub nu: Option<f64>,
}

/// Root of `Σ r_i^t = 1`.
pub fn moran_dimension(ratios: &[f64]) -> Result<MoranSolution, MeasureError> {
    if ratios.is_empty() || ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(MeasureError::InvalidRatios(ratios.to_vec()));
    }
    let f = |t: f64| ratios.iter().map(|&r| libm::pow(r, t)).sum::<f64>() - 1.0;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    let d = bisect(0.0, hi, f).ok_or(MeasureError::NoRoot)?;
    let (mu, nu) = match ratios {
        [p1, p2] => {
            let mw = mauldin_williams_check(*p1, *p2, 0, d)?;
            (Some(mw.mu), Some(mw.nu))
        }
        _ => (None, None),
    };
    Ok(MoranSolution {
        d,
        residual: f(d).abs(),
        mu,
        nu,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwCheck {
    pub mu: f64,
    pub nu: f64,
    /// Residual of the `μ` equation.
    pub residual_mu: f64,
    /// Residual of the `ν` equation.
    pub residual_nu: f64,
}

/// The eigenvector `μ = p1^d / (1 - p2^d)`, `ν = p2^d μ / (1 - p2^d)` and
/// the residuals of
/// `μ = p1^d (1 + p2^d + … + p2^{nd}) μ + p1^d p2^{nd} ν`,
/// `ν = p2^d μ + p2^d ν`.
pub fn mauldin_williams_check(p1: f64, p2: f64, n: usize, d: f64) -> Result<MwCheck, MeasureError> {
    let a = libm::pow(p1, d);
    let b = libm::pow(p2, d);
    let mu = a / (1.0 - b);
    let nu = b * mu / (1.0 - b);
    if !(mu > 0.0 && nu > 0.0 && mu.is_finite() && nu.is_finite()) {
        return Err(MeasureError::NonPositiveEigenvector { mu, nu });
    }
    let geometric: f64 = (0..=n).map(|k| libm::pow(b, k as f64)).sum();
    let bn = libm::pow(b, n as f64);
    Ok(MwCheck {
        mu,
        nu,
        residual_mu: (a * geometric * mu + a * bn * nu - mu).abs(),
        residual_nu: (b * mu + b * nu - nu).abs(),
    })
}

/// Extrapolated pre-measure of one arc at a fixed exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct EllEstimate {
    pub value: f64,
    /// Standard error of the extrapolation.
    pub spread: f64,
    /// `(depth, premeasure)` samples.
    pub samples: Vec<(usize, f64)>,
}

/// Estimates `H^s` of each arc, up to a common constant, by the pre-measure
/// of its chains at exponent `s_hat`, extrapolated linearly in `1/depth`.
/// Falls back to the deepest sample if the extrapolation is not positive.
pub fn estimate_ell(
    builder: &mut ChainBuilder,
    endpoints: &[(Address, Address)],
    s_hat: f64,
    depths: &[usize],
) -> Result<Vec<EllEstimate>, MeasureError> {
    let mut out = Vec::with_capacity(endpoints.len());
    for (a, b) in endpoints {
        let mut samples = Vec::with_capacity(depths.len());
        for &k in depths {
            samples.push((k, premeasure(&arc_chain(builder, a, b, k)?, s_hat)));
        }
        let xs: Vec<f64> = samples.iter().map(|(k, _)| 1.0 / *k as f64).collect();
        let ys: Vec<f64> = samples.iter().map(|(_, v)| *v).collect();
        let (value, spread) = if samples.len() >= 2 {
            let (a, _, se) = linear_fit(&xs, &ys);
            (a, se)
        } else {
            (ys.last().copied().unwrap_or(0.0), 0.0)
        };
        let value = if value > 0.0 { value } else { ys.last().copied().unwrap_or(0.0) };
        out.push(EllEstimate {
            value,
            spread,
            samples,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Node {
    M,
    N,
    MPrime,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Node::M => "M",
            Node::N => "N",
            Node::MPrime => "M'",
        })
    }
}

/// `x -> offset + ratio x`, carrying the source node's set into the target.
#[derive(Debug, Clone, PartialEq)]
pub struct GdMap {
    pub label: String,
    pub ratio: f64,
    pub offset: f64,
    pub source: Node,
    pub target: Node,
}

impl GdMap {
    fn apply(&self, x: f64) -> f64 {
        self.offset + self.ratio * x
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphDirectedSystem {
    pub branch: Branch,
    pub nodes: Vec<Node>,
    pub edges: Vec<GdMap>,
}

/// Assembles the system from the ratios and the offset estimates:
/// `ℓ_0..ℓ_n, ℓ'` for `Generic(n)`; `ℓ_{A2B1}, ℓ_{O S2(B1)}, ℓ_{O O2}` for
/// `B1EqualsP1`.
pub fn build_gd_system(params: &SystemParams, branch: Branch, ell: &[f64]) -> Result<GraphDirectedSystem, MeasureError> {
    let [p1, p2, _] = params.ratios();
    let map = |label: String, ratio: f64, offset: f64, source: Node, target: Node| GdMap {
        label,
        ratio,
        offset,
        source,
        target,
    };
    match branch {
        Branch::Generic(n) => {
            if ell.len() != n + 2 {
                return Err(MeasureError::ArityMismatch {
                    expected: n + 2,
                    got: ell.len(),
                });
            }
            let mut edges = Vec::new();
            for (k, &l) in ell[..=n].iter().enumerate() {
                let r = p1 * libm::pow(p2, k as f64);
                edges.push(map(format!("sigma_{k}"), r, l, Node::M, Node::M));
                if k == n {
                    edges.push(map(format!("sigma_{k}"), r, l, Node::N, Node::M));
                }
            }
            let lp = ell[n + 1];
            edges.push(map("sigma'".into(), p2, lp, Node::M, Node::N));
            edges.push(map("sigma'".into(), p2, lp, Node::N, Node::N));
            Ok(GraphDirectedSystem {
                branch,
                nodes: alloc::vec![Node::M, Node::N],
                edges,
            })
        }
        Branch::B1EqualsP1 => {
            if ell.len() != 3 {
                return Err(MeasureError::ArityMismatch {
                    expected: 3,
                    got: ell.len(),
                });
            }
            Ok(GraphDirectedSystem {
                branch,
                nodes: alloc::vec![Node::MPrime, Node::N],
                edges: alloc::vec![
                    map("sigma_1".into(), p2, 0.0, Node::MPrime, Node::MPrime),
                    map("sigma_2".into(), p1, ell[0], Node::MPrime, Node::MPrime),
                    map("sigma_3".into(), p1 * p2, ell[1], Node::MPrime, Node::N),
                    map("sigma_4".into(), p2, ell[2], Node::N, Node::N),
                ],
            })
        }
    }
}

/// Sorted, pairwise disjoint intervals approximating one node's set.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSetApprox {
    pub node: Node,
    pub depth: usize,
    pub intervals: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    CantorDiscontinuum,
    SinglePoint,
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSets {
    pub sets: Vec<MeasureSetApprox>,
    /// Convex hull of each node's set, in node order.
    pub hulls: Vec<(f64, f64)>,
    /// Smallest signed gap between images of different edges into the same
    /// node, per level starting at the hulls; negative means overlap.
    pub level_gaps: Vec<f64>,
    pub min_gap: f64,
    pub nesting: bool,
    pub classification: Classification,
    /// Crossing exponent of the final intervals of each node, normalised by
    /// the hull width; `None` for point-like nodes.
    pub cover_dimension: Vec<Option<f64>>,
}

fn node_index(gds: &GraphDirectedSystem, node: Node) -> usize {
    gds.nodes.iter().position(|&n| n == node).expect("edge node belongs to the system")
}

/// Hulls as the fixed point of `H_X = hull ∪ σ(H_source)`.
fn hull_fixed_point(gds: &GraphDirectedSystem) -> Vec<(f64, f64)> {
    let mut hulls = alloc::vec![(0.0f64, 0.0f64); gds.nodes.len()];
    for _ in 0..100_000 {
        let mut next = alloc::vec![(f64::INFINITY, f64::NEG_INFINITY); gds.nodes.len()];
        for e in &gds.edges {
            let (lo, hi) = hulls[node_index(gds, e.source)];
            let t = node_index(gds, e.target);
            next[t].0 = next[t].0.min(e.apply(lo));
            next[t].1 = next[t].1.max(e.apply(hi));
        }
        let done = next.iter().zip(&hulls).all(|(a, b)| a == b);
        hulls = next;
        if done {
            break;
        }
    }
    hulls
}

fn merge(mut intervals: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for (lo, hi) in intervals {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Smallest signed distance between intervals carrying different tags.
fn tagged_gap(mut tagged: Vec<(f64, f64, usize)>, tags: usize) -> f64 {
    tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut reach = alloc::vec![f64::NEG_INFINITY; tags];
    let mut gap = f64::INFINITY;
    for (lo, hi, tag) in tagged {
        for (other, &r) in reach.iter().enumerate() {
            if other != tag && r > f64::NEG_INFINITY {
                gap = gap.min(lo - r);
            }
        }
        reach[tag] = reach[tag].max(hi);
    }
    gap
}

fn nested(inner: &[(f64, f64)], outer: &[(f64, f64)]) -> bool {
    let tol = GAP_THRESHOLD * 1e-3;
    let mut j = 0;
    inner.iter().all(|&(lo, hi)| {
        while j < outer.len() && outer[j].1 < lo - tol {
            j += 1;
        }
        j < outer.len() && outer[j].0 <= lo + tol && hi <= outer[j].1 + tol
    })
}

/// Computes the node hulls, refines them `depth` times through the edge
/// maps, and checks at every level that the images of distinct maps inside
/// each node are disjoint.
pub fn iterate_measure_sets(gds: &GraphDirectedSystem, depth: usize) -> MeasureSets {
    let hulls = hull_fixed_point(gds);
    let nodes = gds.nodes.len();
    let mut current: Vec<Vec<(f64, f64)>> = hulls.iter().map(|&h| alloc::vec![h]).collect();
    // Edges sharing a map and a target form one image, `σ(M) ∪ σ(N)`;
    // separation is required between different maps only.
    let groups: Vec<usize> = gds
        .edges
        .iter()
        .map(|e| {
            gds.edges
                .iter()
                .position(|f| f.label == e.label && f.target == e.target)
                .expect("edge is in its own list")
        })
        .collect();
    let mut level_gaps = Vec::with_capacity(depth);
    let mut nesting = true;
    for _ in 0..depth {
        let mut tagged: Vec<Vec<(f64, f64, usize)>> = alloc::vec![Vec::new(); nodes];
        for (tag, e) in groups.iter().zip(&gds.edges) {
            let tag = *tag;
            let t = node_index(gds, e.target);
            for &(lo, hi) in &current[node_index(gds, e.source)] {
                tagged[t].push((e.apply(lo), e.apply(hi), tag));
            }
        }
        let gap = tagged
            .iter()
            .map(|v| tagged_gap(v.clone(), gds.edges.len()))
            .fold(f64::INFINITY, f64::min);
        level_gaps.push(gap);
        let next: Vec<Vec<(f64, f64)>> = tagged
            .into_iter()
            .map(|v| merge(v.into_iter().map(|(lo, hi, _)| (lo, hi)).collect()))
            .collect();
        nesting &= next.iter().zip(&current).all(|(n, c)| nested(n, c));
        current = next;
    }
    let min_gap = level_gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let classification = if hulls.iter().all(|(lo, hi)| hi - lo < POINT_WIDTH) {
        Classification::SinglePoint
    } else if !level_gaps.is_empty() && min_gap > GAP_THRESHOLD {
        Classification::CantorDiscontinuum
    } else {
        Classification::Indeterminate
    };
    let cover_dimension = current
        .iter()
        .zip(&hulls)
        .map(|(iv, (lo, hi))| {
            let w = hi - lo;
            if w < POINT_WIDTH {
                return None;
            }
            let widths: Vec<f64> = iv.iter().map(|(a, b)| (b - a) / w).filter(|&x| x > 0.0).collect();
            crossing_exponent(&widths).ok()
        })
        .collect();
    MeasureSets {
        sets: current
            .into_iter()
            .zip(&gds.nodes)
            .map(|(intervals, &node)| MeasureSetApprox {
                node,
                depth,
                intervals,
            })
            .collect(),
        hulls,
        level_gaps,
        min_gap,
        nesting,
        classification,
        cover_dimension,
    }
}

/// The chain of `γ_{O x}` next to the chain it should split into.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionCheck {
    pub address: Address,
    /// Length `k` of the run of 2s after the leading 1.
    pub run: usize,
    /// `chain(λ_k)` followed by the `S1 S2^k` image of `chain(γ_{O w})`.
    pub expected: Vec<Multiindex>,
    pub actual: Vec<Multiindex>,
}

impl DecompositionCheck {
    pub fn matches(&self) -> bool {
        self.expected == self.actual
    }
}

/// Splits `x = 1 2^k w` (`k <= n`, `w` starting with 1, or with 3 when
/// `k < n`) and compares, at depth `depth`, the chain of `γ_{O x}` with
/// the chain of `λ_k` extended by the mapped chain of `γ_{O w}`. A cell
/// shared at the junction is kept once.
pub fn check_arc_decomposition(
    builder: &mut ChainBuilder,
    n: usize,
    x: &Address,
    depth: usize,
) -> Result<DecompositionCheck, MeasureError> {
    let bad = || MeasureError::NotDecomposable { address: x.clone(), n };
    if x.digit(0)? != 1 {
        return Err(bad());
    }
    let run = x.run_length(1, 2)?.ok_or_else(bad)?;
    let next = x.digit(1 + run)?;
    if run > n || !(next == 1 || (next == 3 && run < n)) {
        return Err(bad());
    }
    let prefix_len = 1 + run;
    if depth <= prefix_len {
        return Err(MeasureError::DepthTooShallow {
            depth,
            prefix: prefix_len,
        });
    }
    let o = zero();
    let mut head = alloc::vec![1u8];
    head.extend(core::iter::repeat_n(2, run));
    let lambda = arc_chain(builder, &o, &Address::periodic(head.clone(), alloc::vec![0])?, depth)?;
    let w = x.shift(prefix_len)?;
    let sub = arc_chain(builder, &o, &w, depth - prefix_len)?;
    let prefix = Multiindex::new(head).expect("digits below 4");
    let mut expected = lambda.cells;
    for c in &sub.cells {
        let mapped = prefix.concat(c);
        if expected.last() != Some(&mapped) {
            expected.push(mapped);
        }
    }
    let actual = arc_chain(builder, &o, x, depth)?.cells;
    Ok(DecompositionCheck {
        address: x.clone(),
        run,
        expected,
        actual,
    })
}
