//! The complexes `T^k(Δ)`, their contact structure, and the nerve tree.

use alloc::boxed::Box;
use alloc::collections::VecDeque;
use alloc::vec::Vec;

use thiserror::Error;

use crate::construction::SystemS;
use crate::geometry::{
    base_triangle, classify_triangle_intersection, GeometryError, IntersectionClass, Multiindex,
    Point2, Similarity, Triangle, VertexOwner,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DendriteError {
    #[error("depth {depth} too deep for eps {eps}: smallest cell {min_diameter} not above 100 eps")]
    DepthBeyondTolerance {
        depth: usize,
        eps: f64,
        min_diameter: f64,
    },
    #[error("nerve is not a tree: {components} components, {cycle_edges} cycle edges, {overlaps} overlaps")]
    NotATree {
        components: usize,
        cycle_edges: usize,
        overlaps: usize,
    },
    #[error("complex at depth {} not certified", .0.depth)]
    NotCertified(Box<DendriteReport>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// All cells `S_j(Δ)` for `|j| <= depth`, stored level by level in base-4
/// order of `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleComplex {
    depth: usize,
    maps: [Similarity; 4],
    levels: Vec<Vec<Triangle>>,
}

impl TriangleComplex {
    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn maps(&self) -> &[Similarity; 4] {
        &self.maps
    }

    /// Cells of the top level, indexed by [`Multiindex::code`].
    pub fn cells(&self) -> &[Triangle] {
        &self.levels[self.depth]
    }

    /// Cells of an intermediate level `m <= depth`.
    pub fn level(&self, m: usize) -> &[Triangle] {
        &self.levels[m]
    }

    pub fn cell(&self, j: &Multiindex) -> Option<&Triangle> {
        self.levels.get(j.len())?.get(j.code())
    }

    pub fn len(&self) -> usize {
        self.cells().len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells().is_empty()
    }

    pub fn max_diameter(&self) -> f64 {
        self.cells().iter().map(Triangle::diameter).fold(0.0, f64::max)
    }

    pub fn max_ratio(&self) -> f64 {
        self.maps.iter().map(Similarity::ratio).fold(0.0, f64::max)
    }
}

/// Applies the Hutchinson operator `k` times to the base triangle.
pub fn build_complex(system: &SystemS, k: usize, eps: f64) -> Result<TriangleComplex, DendriteError> {
    let min_diameter = libm::pow(system.min_ratio(), k as f64);
    if !(min_diameter > 100.0 * eps) {
        return Err(DendriteError::DepthBeyondTolerance {
            depth: k,
            eps,
            min_diameter,
        });
    }
    let maps = *system.maps();
    let base = base_triangle();
    let mut sims = alloc::vec![Similarity::identity()];
    let mut levels = alloc::vec![alloc::vec![base]];
    for _ in 0..k {
        sims = sims
            .iter()
            .flat_map(|s| maps.iter().map(move |m| s.compose(m)))
            .collect();
        levels.push(sims.iter().map(|s| base.mapped(s)).collect());
    }
    Ok(TriangleComplex {
        depth: k,
        maps,
        levels,
    })
}

/// A one-point contact between two top-level cells, `cells.0 < cells.1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contact {
    pub cells: (usize, usize),
    pub point: Point2,
    pub owner: VertexOwner,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Scan {
    contacts: Vec<Contact>,
    overlaps: Vec<(usize, usize)>,
}

/// Candidate pairs from a uniform grid whose bins are as wide as the largest
/// cell, so that any two cells with overlapping boxes share a bin.
fn candidate_pairs(cells: &[Triangle], eps: f64) -> Vec<(u32, u32)> {
    let h = cells.iter().map(Triangle::diameter).fold(0.0, f64::max).max(eps);
    let boxes: Vec<_> = cells.iter().map(Triangle::bbox).collect();
    let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for (a, b) in &boxes {
        lo = Point2::new(lo.x.min(a.x), lo.y.min(a.y));
        hi = Point2::new(hi.x.max(b.x), hi.y.max(b.y));
    }
    let nx = (((hi.x - lo.x) / h) as usize + 2).max(1);
    let ny = (((hi.y - lo.y) / h) as usize + 2).max(1);
    let bin = |v: f64, origin: f64, n: usize| (((v - origin) / h).max(0.0) as usize).min(n - 1);
    let mut grid: Vec<Vec<u32>> = alloc::vec![Vec::new(); nx * ny];
    for (i, (a, b)) in boxes.iter().enumerate() {
        for gx in bin(a.x - eps, lo.x, nx)..=bin(b.x + eps, lo.x, nx) {
            for gy in bin(a.y - eps, lo.y, ny)..=bin(b.y + eps, lo.y, ny) {
                grid[gy * nx + gx].push(i as u32);
            }
        }
    }
    let mut pairs = Vec::new();
    for members in &grid {
        for (n, &i) in members.iter().enumerate() {
            let (a, b) = boxes[i as usize];
            for &j in &members[n + 1..] {
                let (c, d) = boxes[j as usize];
                if a.x <= d.x + eps && c.x <= b.x + eps && a.y <= d.y + eps && c.y <= b.y + eps {
                    pairs.push((i, j));
                }
            }
        }
    }
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

fn scan(complex: &TriangleComplex, eps: f64) -> Result<Scan, GeometryError> {
    let cells = complex.cells();
    let mut out = Scan::default();
    for (i, j) in candidate_pairs(cells, eps) {
        let (i, j) = (i as usize, j as usize);
        match classify_triangle_intersection(&cells[i], &cells[j], eps)? {
            IntersectionClass::Empty => {}
            IntersectionClass::SingleVertex { point, owner } => out.contacts.push(Contact {
                cells: (i, j),
                point,
                owner,
            }),
            IntersectionClass::Overlap => out.overlaps.push((i, j)),
        }
    }
    Ok(out)
}

/// Disjoint-set forest over cell codes.
struct Forest(Vec<usize>);

impl Forest {
    fn new(n: usize) -> Self {
        Forest((0..n).collect())
    }

    fn root(&mut self, mut i: usize) -> usize {
        while self.0[i] != i {
            self.0[i] = self.0[self.0[i]];
            i = self.0[i];
        }
        i
    }

    /// Returns false if `a` and `b` were already joined.
    fn join(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.root(a), self.root(b));
        if ra == rb {
            return false;
        }
        self.0[ra.max(rb)] = ra.min(rb);
        true
    }
}

/// Component count and number of cycle-closing edges of the contact graph.
fn tree_defects(n: usize, contacts: &[Contact]) -> (usize, usize) {
    let mut forest = Forest::new(n);
    let mut components = n;
    let mut cycle_edges = 0;
    for c in contacts {
        if forest.join(c.cells.0, c.cells.1) {
            components -= 1;
        } else {
            cycle_edges += 1;
        }
    }
    (components, cycle_edges)
}

/// Outcome of the finite-depth dendrite checks.
#[derive(Debug, Clone, PartialEq)]
pub struct DendriteReport {
    pub depth: usize,
    pub eps: f64,
    pub cell_count: usize,
    /// The contact graph of the cells is connected.
    pub connected: bool,
    /// The contact graph has no cycles.
    pub acyclic: bool,
    pub edge_count: usize,
    pub max_diameter: f64,
    /// `(max ratio)^depth`.
    pub diameter_bound: f64,
    pub s0_attains_max_ratio: bool,
    pub empty_pairs: usize,
    pub single_vertex_pairs: usize,
    pub overlap_pairs: Vec<(Multiindex, Multiindex)>,
    /// Every cell lies inside its parent.
    pub nesting: bool,
    pub nesting_failures: usize,
    /// Distinct contact points on each cell, in cell-code order.
    pub boundary_counts: Vec<usize>,
    pub max_boundary_count: usize,
    /// Every contact point is a vertex of one of the two cells.
    pub contacts_at_vertices: bool,
    pub certified: bool,
}

impl DendriteReport {
    pub fn overlap_count(&self) -> usize {
        self.overlap_pairs.len()
    }
}

fn boundary_counts(n: usize, contacts: &[Contact], eps: f64) -> Vec<usize> {
    let mut points: Vec<Vec<Point2>> = alloc::vec![Vec::new(); n];
    for c in contacts {
        for cell in [c.cells.0, c.cells.1] {
            let seen = &mut points[cell];
            if seen.iter().all(|p| p.dist(c.point) > eps) {
                seen.push(c.point);
            }
        }
    }
    points.iter().map(Vec::len).collect()
}

fn report_from_scan(complex: &TriangleComplex, scan: &Scan, eps: f64) -> DendriteReport {
    let depth = complex.depth;
    let cells = complex.cells();
    let n = cells.len();
    let (components, cycle_edges) = tree_defects(n, &scan.contacts);

    let mut nesting_failures = 0;
    if depth > 0 {
        let parents = complex.level(depth - 1);
        for (code, cell) in cells.iter().enumerate() {
            if !parents[code / 4].contains_triangle(cell, eps) {
                nesting_failures += 1;
            }
        }
    }

    let contacts_at_vertices = scan.contacts.iter().all(|c| {
        let (a, b) = c.cells;
        let at = |i: usize| cells[i].vertices().iter().any(|v| v.dist(c.point) <= eps);
        match c.owner {
            VertexOwner::First => at(a),
            VertexOwner::Second => at(b),
            VertexOwner::Both => at(a) && at(b),
        }
    });

    let counts = boundary_counts(n, &scan.contacts, eps);
    let max_boundary_count = counts.iter().copied().max().unwrap_or(0);
    let max_ratio = complex.max_ratio();
    let single = scan.contacts.len();
    let overlaps = scan.overlaps.len();
    let total_pairs = n * (n - 1) / 2;
    let connected = components == 1;
    let acyclic = cycle_edges == 0;
    let nesting = nesting_failures == 0;
    DendriteReport {
        depth,
        eps,
        cell_count: n,
        connected,
        acyclic,
        edge_count: single,
        max_diameter: complex.max_diameter(),
        diameter_bound: libm::pow(max_ratio, depth as f64),
        s0_attains_max_ratio: complex.maps[0].ratio() >= max_ratio,
        empty_pairs: total_pairs - single - overlaps,
        single_vertex_pairs: single,
        overlap_pairs: scan
            .overlaps
            .iter()
            .map(|&(a, b)| (Multiindex::from_code(a, depth), Multiindex::from_code(b, depth)))
            .collect(),
        nesting,
        nesting_failures,
        max_boundary_count,
        boundary_counts: counts,
        contacts_at_vertices,
        certified: overlaps == 0 && connected && acyclic && nesting && max_boundary_count <= 3,
    }
}

/// Classifies every pair of top-level cells and checks connectivity,
/// acyclicity, nesting and the boundary counts.
pub fn verify_dendrite(complex: &TriangleComplex, eps: f64) -> Result<DendriteReport, DendriteError> {
    let scan = scan(complex, eps)?;
    Ok(report_from_scan(complex, &scan, eps))
}

/// Contact graph of the top-level cells, required to be a tree.
#[derive(Debug, Clone, PartialEq)]
pub struct NerveGraph {
    depth: usize,
    edges: Vec<Contact>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl NerveGraph {
    fn from_contacts(depth: usize, n: usize, edges: Vec<Contact>) -> Self {
        let mut adjacency = alloc::vec![Vec::new(); n];
        for (e, c) in edges.iter().enumerate() {
            adjacency[c.cells.0].push((c.cells.1, e));
            adjacency[c.cells.1].push((c.cells.0, e));
        }
        NerveGraph {
            depth,
            edges,
            adjacency,
        }
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    /// Edges sorted by cell pair.
    pub fn edges(&self) -> &[Contact] {
        &self.edges
    }

    /// Neighbours of a cell with the index of the joining edge.
    pub fn neighbours(&self, cell: usize) -> &[(usize, usize)] {
        &self.adjacency[cell]
    }

    /// The unique path between two cells, as `(cells, edge indices)`.
    pub fn path(&self, from: usize, to: usize) -> (Vec<usize>, Vec<usize>) {
        let n = self.adjacency.len();
        let mut back: Vec<Option<(usize, usize)>> = alloc::vec![None; n];
        let mut queue = VecDeque::from([to]);
        let mut seen = alloc::vec![false; n];
        seen[to] = true;
        while let Some(v) = queue.pop_front() {
            if v == from {
                break;
            }
            for &(w, e) in &self.adjacency[v] {
                if !seen[w] {
                    seen[w] = true;
                    back[w] = Some((v, e));
                    queue.push_back(w);
                }
            }
        }
        let (mut cells, mut edges) = (alloc::vec![from], Vec::new());
        let mut at = from;
        while let Some((next, e)) = back[at] {
            cells.push(next);
            edges.push(e);
            at = next;
        }
        (cells, edges)
    }
}

/// Builds the nerve of the top-level cells; fails unless it is a tree and
/// no pair overlaps.
pub fn build_nerve(complex: &TriangleComplex, eps: f64) -> Result<NerveGraph, DendriteError> {
    let scan = scan(complex, eps)?;
    nerve_from_scan(complex, scan)
}

fn nerve_from_scan(complex: &TriangleComplex, scan: Scan) -> Result<NerveGraph, DendriteError> {
    let n = complex.len();
    let (components, cycle_edges) = tree_defects(n, &scan.contacts);
    if components != 1 || cycle_edges != 0 || !scan.overlaps.is_empty() {
        return Err(DendriteError::NotATree {
            components,
            cycle_edges,
            overlaps: scan.overlaps.len(),
        });
    }
    Ok(NerveGraph::from_contacts(complex.depth, n, scan.contacts))
}

/// A complex that passed [`verify_dendrite`], with its nerve tree.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedComplex {
    pub complex: TriangleComplex,
    pub nerve: NerveGraph,
    pub report: DendriteReport,
}

impl CertifiedComplex {
    pub fn new(system: &SystemS, k: usize, eps: f64) -> Result<Self, DendriteError> {
        let complex = build_complex(system, k, eps)?;
        let scan = scan(&complex, eps)?;
        let report = report_from_scan(&complex, &scan, eps);
        if !report.certified {
            return Err(DendriteError::NotCertified(Box::new(report)));
        }
        let nerve = nerve_from_scan(&complex, scan)?;
        Ok(CertifiedComplex {
            complex,
            nerve,
            report,
        })
    }

    pub fn depth(&self) -> usize {
        self.complex.depth
    }
}
