//! Subarcs of the dendrite as chains of cells, their pre-measures, and
//! dimension estimates from nested chain covers.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use thiserror::Error;

use crate::addresses::{point_from_address, Address, AddressError};
use crate::construction::SystemS;
use crate::dendrite::{CertifiedComplex, DendriteError};
use crate::geometry::{Multiindex, Point2, Similarity, Triangle};
use crate::numeric::{bisect, linear_fit};
use crate::ADDRESS_DEPTH;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ArcError {
    #[error("endpoints coincide")]
    EqualEndpoints,
    #[error("both endpoints lie in one cell at depth {depth}; deepen")]
    SameCellDegenerate { depth: usize },
    #[error("complex at depth {depth} not certified: {source}")]
    UncertifiedComplex { depth: usize, source: DendriteError },
    #[error("cover of {0} cells cannot define a crossing exponent")]
    DegenerateCover(usize),
    #[error("need at least {needed} depths, got {got}")]
    TooFewDepths { needed: usize, got: usize },
    #[error(transparent)]
    Address(#[from] AddressError),
}

/// Certified complexes of one system, built on demand and kept per depth.
#[derive(Debug, Clone)]
pub struct ChainBuilder {
    system: SystemS,
    eps: f64,
    levels: BTreeMap<usize, CertifiedComplex>,
}

impl ChainBuilder {
    pub fn new(system: SystemS, eps: f64) -> Self {
        ChainBuilder {
            system,
            eps,
            levels: BTreeMap::new(),
        }
    }

    pub fn system(&self) -> &SystemS {
        &self.system
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn certified(&mut self, k: usize) -> Result<&CertifiedComplex, ArcError> {
        if !self.levels.contains_key(&k) {
            let c = CertifiedComplex::new(&self.system, k, self.eps)
                .map_err(|source| ArcError::UncertifiedComplex { depth: k, source })?;
            self.levels.insert(k, c);
        }
        Ok(&self.levels[&k])
    }

    /// The point `π(a)` and its truncation bound.
    pub fn point(&self, a: &Address) -> Result<(Point2, f64), ArcError> {
        let depth = a.horizon().map_or(ADDRESS_DEPTH, |h| h.min(ADDRESS_DEPTH));
        Ok(point_from_address(a, &self.system, depth)?)
    }
}

/// A path of cells in the nerve tree between the cells of two points.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcChain {
    pub depth: usize,
    pub cells: Vec<Multiindex>,
    pub diameters: Vec<f64>,
    pub endpoints: (Address, Address),
    /// Contact points joining consecutive cells.
    pub contacts: Vec<Point2>,
}

impl ArcChain {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Cells collapsed to their parents, consecutive repeats removed.
    pub fn parent_collapse(&self) -> Vec<Multiindex> {
        let mut out: Vec<Multiindex> = Vec::new();
        for c in &self.cells {
            let p = c.parent().unwrap_or_else(Multiindex::empty);
            if out.last() != Some(&p) {
                out.push(p);
            }
        }
        out
    }
}

fn cell_code(a: &Address, k: usize) -> Result<usize, ArcError> {
    Ok(a.prefix(k)?.iter().fold(0, |acc, &d| 4 * acc + d as usize))
}

/// The nerve path from the cell of `π(a)` to the cell of `π(b)` at depth
/// `k`. An end cell is dropped when the endpoint is exactly the contact it
/// shares with its neighbour, since the arc then never enters it.
pub fn arc_chain(builder: &mut ChainBuilder, a: &Address, b: &Address, k: usize) -> Result<ArcChain, ArcError> {
    if a == b {
        return Err(ArcError::EqualEndpoints);
    }
    let (ca, cb) = (cell_code(a, k)?, cell_code(b, k)?);
    if ca == cb {
        return Err(ArcError::SameCellDegenerate { depth: k });
    }
    let (pa, ba) = builder.point(a)?;
    let (pb, bb) = builder.point(b)?;
    let eps = builder.eps;
    let level = builder.certified(k)?;
    let (mut codes, edges) = level.nerve.path(ca, cb);
    let mut contacts: Vec<Point2> = edges.iter().map(|&e| level.nerve.edges()[e].point).collect();
    if codes.len() > 1 && contacts[0].dist(pa) <= eps + ba {
        codes.remove(0);
        contacts.remove(0);
    }
    if codes.len() > 1 && contacts[contacts.len() - 1].dist(pb) <= eps + bb {
        codes.pop();
        contacts.pop();
    }
    let cells = level.complex.cells();
    Ok(ArcChain {
        depth: k,
        diameters: codes.iter().map(|&c| cells[c].diameter()).collect(),
        cells: codes.iter().map(|&c| Multiindex::from_code(c, k)).collect(),
        endpoints: (a.clone(), b.clone()),
        contacts,
    })
}

/// The same arc one level deeper.
pub fn refine_chain(builder: &mut ChainBuilder, chain: &ArcChain) -> Result<ArcChain, ArcError> {
    arc_chain(builder, &chain.endpoints.0, &chain.endpoints.1, chain.depth + 1)
}

/// `Σ diam^t` over the chain.
pub fn premeasure(chain: &ArcChain, t: f64) -> f64 {
    cover_sum(&chain.diameters, t)
}

fn cover_sum(diameters: &[f64], t: f64) -> f64 {
    diameters.iter().map(|&d| libm::pow(d, t)).sum()
}

/// The exponent `t` with `Σ diam^t = 1`. Needs at least two cells, all of
/// diameter in `(0, 1)`.
pub fn crossing_exponent(diameters: &[f64]) -> Result<f64, ArcError> {
    let n = diameters.len();
    if n < 2 || diameters.iter().any(|&d| !(d > 0.0 && d < 1.0)) {
        return Err(ArcError::DegenerateCover(n));
    }
    let f = |t: f64| cover_sum(diameters, t) - 1.0;
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
    }
    bisect(0.0, hi, f).ok_or(ArcError::DegenerateCover(n))
}

/// One row of a pre-measure table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PremeasureSample {
    pub depth: usize,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionEstimate {
    /// Extrapolated limit of the crossing exponents.
    pub value: f64,
    /// Standard error of the extrapolated intercept.
    pub stderr: f64,
    pub depths_used: Vec<usize>,
    /// Crossing exponent `t_k` for each depth.
    pub crossings: Vec<f64>,
    pub premeasure_table: Vec<PremeasureSample>,
}

/// Exponents at which the table is sampled, besides each crossing.
const TABLE_T: [f64; 9] = [0.8, 0.9, 1.0, 1.1, 1.2, 1.3, 1.4, 1.5, 1.6];

/// Crossing exponents of a sequence of covers, extrapolated linearly in
/// `1/depth` to `depth -> ∞`.
pub fn estimate_from_covers(covers: &[(usize, Vec<f64>)]) -> Result<DimensionEstimate, ArcError> {
    if covers.len() < 3 {
        return Err(ArcError::TooFewDepths {
            needed: 3,
            got: covers.len(),
        });
    }
    let mut crossings = Vec::with_capacity(covers.len());
    let mut table = Vec::new();
    for (depth, diameters) in covers {
        let t_k = crossing_exponent(diameters)?;
        crossings.push(t_k);
        let mut ts: Vec<f64> = TABLE_T.to_vec();
        ts.push(t_k);
        ts.sort_by(f64::total_cmp);
        table.extend(ts.into_iter().map(|t| PremeasureSample {
            depth: *depth,
            t,
            value: cover_sum(diameters, t),
        }));
    }
    let xs: Vec<f64> = covers.iter().map(|(k, _)| 1.0 / *k as f64).collect();
    let (value, _, stderr) = linear_fit(&xs, &crossings);
    Ok(DimensionEstimate {
        value: value.max(0.0),
        stderr,
        depths_used: covers.iter().map(|(k, _)| *k).collect(),
        crossings,
        premeasure_table: table,
    })
}

/// Dimension estimate of the arc between `π(a)` and `π(b)` from its chains at
/// the given depths.
pub fn estimate_dimension(
    builder: &mut ChainBuilder,
    a: &Address,
    b: &Address,
    depths: &[usize],
) -> Result<DimensionEstimate, ArcError> {
    let covers = depths
        .iter()
        .map(|&k| arc_chain(builder, a, b, k).map(|c| (k, c.diameters)))
        .collect::<Result<Vec<_>, _>>()?;
    estimate_from_covers(&covers)
}

/// `γ_i`, the arc from `O` to the vertex `A_i`.
pub fn vertex_arc(i: u8) -> (Address, Address) {
    let o = Address::constant(0).expect("digit 0");
    let v = Address::constant(i).expect("vertex digit");
    (o, v)
}

/// One inclusion `γ_i ⊃ S_i S0(γ_{i+1})`.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionCheck {
    pub outer: u8,
    pub inner: u8,
    pub inner_cells: usize,
    /// Cells of the inner chain whose image fits in no outer cell.
    pub unmatched: Vec<Multiindex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport {
    pub depth: usize,
    pub checks: Vec<InclusionCheck>,
}

impl InclusionReport {
    pub fn holds(&self) -> bool {
        self.checks.iter().all(|c| c.unmatched.is_empty())
    }
}

/// Checks the three inclusions `γ1 ⊃ S1S0(γ2)`, `γ2 ⊃ S2S0(γ3)`,
/// `γ3 ⊃ S3S0(γ1)` cell by cell: the image of each depth-`k` cell of the
/// inner chain must lie in a depth-`k+2` cell of the outer chain.
pub fn verify_arc_inclusions(builder: &mut ChainBuilder, k: usize) -> Result<InclusionReport, ArcError> {
    let s0 = *builder.system.s0();
    verify_arc_inclusions_with(builder, k, &s0)
}

/// As [`verify_arc_inclusions`], with the `S0` of the mapping replaced.
pub fn verify_arc_inclusions_with(
    builder: &mut ChainBuilder,
    k: usize,
    s0: &Similarity,
) -> Result<InclusionReport, ArcError> {
    let eps = builder.eps;
    let mut checks = Vec::with_capacity(3);
    for outer in 1..=3u8 {
        let inner = outer % 3 + 1;
        let (o, vo) = vertex_arc(outer);
        let (_, vi) = vertex_arc(inner);
        let outer_chain = arc_chain(builder, &o, &vo, k + 2)?;
        let inner_chain = arc_chain(builder, &o, &vi, k)?;
        let map = builder.system.maps()[outer as usize].compose(s0);
        let outer_cells: Vec<Triangle> = {
            let level = builder.certified(k + 2)?;
            outer_chain
                .cells
                .iter()
                .map(|c| level.complex.cells()[c.code()])
                .collect()
        };
        let level = builder.certified(k)?;
        let unmatched = inner_chain
            .cells
            .iter()
            .filter(|c| {
                let image = level.complex.cells()[c.code()].mapped(&map);
                !outer_cells.iter().any(|t| t.contains_triangle(&image, eps))
            })
            .cloned()
            .collect();
        checks.push(InclusionCheck {
            outer,
            inner,
            inner_cells: inner_chain.len(),
            unmatched,
        });
    }
    Ok(InclusionReport { depth: k, checks })
}

/// Which branch of the cut-point cover a sampled address falls in.
#[derive(Debug, Clone, PartialEq)]
pub enum CoverOutcome {
    /// The first `k` digits contain a 0; `cell` is the prefix through the
    /// last such 0 and `boundary` the contact points of `K_cell` with the
    /// rest of the complex.
    ZeroCell {
        cell: Multiindex,
        boundary: Vec<Point2>,
        at_vertices: bool,
    },
    /// No 0 at all: the point lies in `K'`.
    KPrime,
    /// No 0 among the first `k` digits, but the tail is not known to be
    /// 0-free.
    Undetermined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverEntry {
    pub address: Address,
    pub outcome: CoverOutcome,
}

impl CoverEntry {
    pub fn ok(&self) -> bool {
        match &self.outcome {
            CoverOutcome::ZeroCell {
                boundary,
                at_vertices,
                ..
            } => boundary.len() <= 3 && *at_vertices,
            CoverOutcome::KPrime => true,
            CoverOutcome::Undetermined => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverReport {
    pub depth: usize,
    pub entries: Vec<CoverEntry>,
}

impl CoverReport {
    pub fn holds(&self) -> bool {
        self.entries.iter().all(CoverEntry::ok)
    }
}

/// For each sample, either finds the cell `K_j` with `j` ending in 0 that
/// holds it and inspects that cell's boundary contacts, or confirms the
/// point lies in `K'`.
pub fn cut_point_cover_check(
    builder: &mut ChainBuilder,
    samples: &[Address],
    k: usize,
) -> Result<CoverReport, ArcError> {
    let eps = builder.eps;
    let level = builder.certified(k)?;
    let mut entries = Vec::with_capacity(samples.len());
    for address in samples {
        let digits = address.prefix(k)?;
        let outcome = match digits.iter().rposition(|&d| d == 0) {
            Some(m) => {
                let cell = Multiindex::new(digits[..=m].to_vec()).expect("digits below 4");
                let shift = 2 * (k - cell.len());
                let inside = |code: usize| code >> shift == cell.code();
                let mut boundary: Vec<Point2> = Vec::new();
                for e in level.nerve.edges() {
                    if inside(e.cells.0) != inside(e.cells.1) && boundary.iter().all(|p| p.dist(e.point) > eps) {
                        boundary.push(e.point);
                    }
                }
                let tri = level.complex.level(cell.len())[cell.code()];
                let at_vertices = boundary
                    .iter()
                    .all(|p| tri.vertices().iter().any(|v| v.dist(*p) <= eps));
                CoverOutcome::ZeroCell {
                    cell,
                    boundary,
                    at_vertices,
                }
            }
            None => {
                let (alphabet, complete) = address.tail_alphabet(0);
                if complete && !alphabet.contains(0) {
                    CoverOutcome::KPrime
                } else {
                    CoverOutcome::Undetermined
                }
            }
        };
        entries.push(CoverEntry {
            address: address.clone(),
            outcome,
        });
    }
    Ok(CoverReport { depth: k, entries })
}
