//! Planar similarity algebra and triangle contact classification.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Angular slack used when comparing the wedges of two touching triangles.
const ANGLE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("similarity ratio must be positive and finite, got {0}")]
    InvalidRatio(f64),
    #[error("non-finite similarity parameter")]
    NonFinite,
    #[error("degenerate correspondence: source or target points coincide")]
    DegenerateCorrespondence,
    #[error("degenerate or clockwise triangle")]
    DegenerateTriangle,
    #[error("tolerance {eps} is not below 0.1 x the smaller diameter {min_diameter}")]
    EpsTooLarge { eps: f64, min_diameter: f64 },
    #[error("digit {0} outside the alphabet {{0,1,2,3}}")]
    DigitOutOfRange(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn norm(self) -> f64 {
        libm::hypot(self.x, self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the planar cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn arg(self) -> f64 {
        libm::atan2(self.y, self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Lexicographic order on `(x, y)`, used for canonical tie-breaking.
    pub fn lex_cmp(&self, other: &Point2) -> core::cmp::Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Point2 {
    type Output = Point2;
    fn mul(self, k: f64) -> Point2 {
        Point2::new(self.x * k, self.y * k)
    }
}

impl Neg for Point2 {
    type Output = Point2;
    fn neg(self) -> Point2 {
        Point2::new(-self.x, -self.y)
    }
}

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// Vertex `A1 = (0, 0)` of the base triangle.
pub const A1: Point2 = Point2::new(0.0, 0.0);
/// Vertex `A2 = (1, 0)` of the base triangle.
pub const A2: Point2 = Point2::new(1.0, 0.0);
/// Vertex `A3 = (1/2, sqrt(3)/2)` of the base triangle.
pub const A3: Point2 = Point2::new(0.5, SQRT3_2);

/// The unit equilateral triangle `A1 A2 A3`.
pub fn base_triangle() -> Triangle {
    Triangle {
        vertices: [A1, A2, A3],
        diameter: 1.0,
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut w = libm::remainder(a, 2.0 * PI);
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

/// Orientation-preserving similarity `z -> ratio * e^{i angle} * z + translation`.
///
/// The ratio may be any positive value so that identities and inverses are
/// representable; every map of the dendrite system is a contraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Similarity {
    ratio: f64,
    angle: f64,
    translation: Point2,
    // ratio * (cos angle, sin angle)
    lin: Point2,
}

impl Similarity {
    pub fn new(ratio: f64, angle: f64, translation: Point2) -> Result<Self, GeometryError> {
        if !(ratio > 0.0) || !ratio.is_finite() {
            return Err(GeometryError::InvalidRatio(ratio));
        }
        if !angle.is_finite() || !translation.is_finite() {
            return Err(GeometryError::NonFinite);
        }
        let angle = wrap_angle(angle);
        let lin = if angle == 0.0 {
            Point2::new(ratio, 0.0)
        } else {
            Point2::new(ratio * libm::cos(angle), ratio * libm::sin(angle))
        };
        Ok(Similarity {
            ratio,
            angle,
            translation,
            lin,
        })
    }

    pub fn identity() -> Self {
        Similarity {
            ratio: 1.0,
            angle: 0.0,
            translation: Point2::default(),
            lin: Point2::new(1.0, 0.0),
        }
    }

    /// Homothety with the given ratio fixing `center`.
    pub fn homothety(ratio: f64, center: Point2) -> Result<Self, GeometryError> {
        Similarity::new(ratio, 0.0, center * (1.0 - ratio))
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn translation(&self) -> Point2 {
        self.translation
    }

    pub fn apply(&self, p: Point2) -> Point2 {
        let l = self.lin;
        Point2::new(
            l.x * p.x - l.y * p.y + self.translation.x,
            l.y * p.x + l.x * p.y + self.translation.y,
        )
    }

    /// `self ∘ other`, i.e. `p -> self(other(p))`.
    pub fn compose(&self, other: &Similarity) -> Similarity {
        let (a, b) = (self.lin, other.lin);
        Similarity {
            ratio: self.ratio * other.ratio,
            angle: wrap_angle(self.angle + other.angle),
            translation: self.apply(other.translation),
            lin: Point2::new(a.x * b.x - a.y * b.y, a.x * b.y + a.y * b.x),
        }
    }

    pub fn inverse(&self) -> Similarity {
        let r2 = self.ratio * self.ratio;
        let lin = Point2::new(self.lin.x / r2, -self.lin.y / r2);
        let t = self.translation;
        let translation = -Point2::new(lin.x * t.x - lin.y * t.y, lin.y * t.x + lin.x * t.y);
        Similarity {
            ratio: 1.0 / self.ratio,
            angle: wrap_angle(-self.angle),
            translation,
            lin,
        }
    }

    /// Unique fixed point, found by solving `(I - ratio R(angle)) p = translation`.
    /// `None` only for pure translations (including the identity).
    pub fn fixed_point(&self) -> Option<Point2> {
        let a = 1.0 - self.lin.x;
        let b = self.lin.y;
        // matrix [[a, b], [-b, a]]
        let det = a * a + b * b;
        if det <= f64::EPSILON * f64::EPSILON {
            return None;
        }
        let t = self.translation;
        Some(Point2::new((a * t.x - b * t.y) / det, (b * t.x + a * t.y) / det))
    }

    /// The orientation-preserving similarity sending `a1 -> b1` and `a2 -> b2`.
    pub fn from_correspondence(
        a1: Point2,
        b1: Point2,
        a2: Point2,
        b2: Point2,
    ) -> Result<Similarity, GeometryError> {
        let da = a2 - a1;
        let db = b2 - b1;
        if da.norm() == 0.0 || db.norm() == 0.0 {
            return Err(GeometryError::DegenerateCorrespondence);
        }
        let ratio = db.norm() / da.norm();
        let angle = wrap_angle(db.arg() - da.arg());
        let mut s = Similarity::new(ratio, angle, Point2::default())?;
        s.translation = b1 - s.apply(a1);
        Ok(s)
    }
}

/// Finite word over the digits `{0, 1, 2, 3}`; the empty word is the identity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Multiindex(Vec<u8>);

impl Multiindex {
    pub fn new(digits: Vec<u8>) -> Result<Self, GeometryError> {
        if let Some(&d) = digits.iter().find(|&&d| d > 3) {
            return Err(GeometryError::DigitOutOfRange(d));
        }
        Ok(Multiindex(digits))
    }

    pub fn empty() -> Self {
        Multiindex(Vec::new())
    }

    pub fn digits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn starts_with(&self, prefix: &Multiindex) -> bool {
        self.0.starts_with(&prefix.0)
    }

    pub fn parent(&self) -> Option<Multiindex> {
        if self.0.is_empty() {
            None
        } else {
            Some(Multiindex(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn concat(&self, tail: &Multiindex) -> Multiindex {
        let mut d = self.0.clone();
        d.extend_from_slice(&tail.0);
        Multiindex(d)
    }

    /// Base-4 code of the word; cells of one depth are stored in this order.
    pub fn code(&self) -> usize {
        self.0.iter().fold(0usize, |acc, &d| acc * 4 + d as usize)
    }

    pub fn from_code(mut code: usize, len: usize) -> Multiindex {
        let mut d = alloc::vec![0u8; len];
        for slot in d.iter_mut().rev() {
            *slot = (code % 4) as u8;
            code /= 4;
        }
        Multiindex(d)
    }

    /// `S_j = S_{j1} ∘ ... ∘ S_{jn}` for the given four maps.
    pub fn compose_maps(&self, maps: &[Similarity; 4]) -> Similarity {
        self.0
            .iter()
            .fold(Similarity::identity(), |acc, &d| acc.compose(&maps[d as usize]))
    }
}

impl fmt::Display for Multiindex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("∅");
        }
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

/// A non-degenerate triangle with counterclockwise vertices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    vertices: [Point2; 3],
    diameter: f64,
}

impl Triangle {
    pub fn new(a: Point2, b: Point2, c: Point2) -> Result<Self, GeometryError> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        if (b - a).cross(c - a) <= 0.0 {
            return Err(GeometryError::DegenerateTriangle);
        }
        let diameter = a.dist(b).max(b.dist(c)).max(c.dist(a));
        Ok(Triangle {
            vertices: [a, b, c],
            diameter,
        })
    }

    pub fn vertices(&self) -> &[Point2; 3] {
        &self.vertices
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn centroid(&self) -> Point2 {
        let [a, b, c] = self.vertices;
        Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0)
    }

    /// Image under a similarity; orientation is preserved so the result stays
    /// counterclockwise.
    pub fn mapped(&self, s: &Similarity) -> Triangle {
        let [a, b, c] = self.vertices;
        let v = [s.apply(a), s.apply(b), s.apply(c)];
        let diameter = v[0].dist(v[1]).max(v[1].dist(v[2])).max(v[2].dist(v[0]));
        Triangle {
            vertices: v,
            diameter,
        }
    }

    fn edge(&self, i: usize) -> (Point2, Point2) {
        (self.vertices[i], self.vertices[(i + 1) % 3])
    }

    /// Signed distances of `p` to the three edge lines, positive inside.
    fn edge_offsets(&self, p: Point2) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (i, slot) in out.iter_mut().enumerate() {
            let (u, w) = self.edge(i);
            let d = w - u;
            *slot = d.cross(p - u) / d.norm();
        }
        out
    }

    /// Euclidean distance from `p` to the closed triangle (zero inside).
    pub fn distance_to(&self, p: Point2) -> f64 {
        let off = self.edge_offsets(p);
        if off.iter().all(|&o| o >= 0.0) {
            return 0.0;
        }
        (0..3)
            .map(|i| {
                let (u, w) = self.edge(i);
                point_segment_distance(p, u, w)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Distance from `p` to the boundary when `p` is inside, otherwise
    /// negative.
    fn interior_depth(&self, p: Point2) -> f64 {
        let off = self.edge_offsets(p);
        off[0].min(off[1]).min(off[2])
    }

    pub fn contains(&self, p: Point2, eps: f64) -> bool {
        self.distance_to(p) <= eps
    }

    pub fn contains_triangle(&self, other: &Triangle, eps: f64) -> bool {
        other.vertices.iter().all(|&v| self.contains(v, eps))
    }

    pub fn bbox(&self) -> (Point2, Point2) {
        let [a, b, c] = self.vertices;
        (
            Point2::new(a.x.min(b.x).min(c.x), a.y.min(b.y).min(c.y)),
            Point2::new(a.x.max(b.x).max(c.x), a.y.max(b.y).max(c.y)),
        )
    }

    /// Interior wedge at `p`, as `(start direction, width)` measured
    /// counterclockwise. `p` is either a vertex (index given) or a point on
    /// the boundary edge closest to it.
    fn wedge_at(&self, p: Point2, vertex: Option<usize>) -> (f64, f64) {
        match vertex {
            Some(i) => {
                let v = self.vertices[i];
                let next = self.vertices[(i + 1) % 3] - v;
                let prev = self.vertices[(i + 2) % 3] - v;
                let start = next.arg();
                let mut width = prev.arg() - start;
                if width < 0.0 {
                    width += 2.0 * PI;
                }
                (start, width)
            }
            None => {
                let i = (0..3)
                    .min_by(|&i, &j| {
                        let (u, w) = self.edge(i);
                        let (s, t) = self.edge(j);
                        point_segment_distance(p, u, w).total_cmp(&point_segment_distance(p, s, t))
                    })
                    .unwrap_or(0);
                let (u, w) = self.edge(i);
                ((w - u).arg(), PI)
            }
        }
    }
}

pub(crate) fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b - a;
    let len2 = d.dot(d);
    if len2 == 0.0 {
        return p.dist(a);
    }
    let t = ((p - a).dot(d) / len2).clamp(0.0, 1.0);
    p.dist(a + d * t)
}

/// Transversal crossing point of two segments, if their interiors cross.
fn proper_crossing(a: Point2, b: Point2, c: Point2, d: Point2) -> Option<Point2> {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    if o1 * o2 < 0.0 && o3 * o4 < 0.0 {
        let t = o1 / (o1 - o2);
        Some(c + (d - c) * t)
    } else {
        None
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexOwner {
    First,
    Second,
    Both,
}

impl VertexOwner {
    pub fn swapped(self) -> VertexOwner {
        match self {
            VertexOwner::First => VertexOwner::Second,
            VertexOwner::Second => VertexOwner::First,
            VertexOwner::Both => VertexOwner::Both,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum IntersectionClass {
    Empty,
    /// One-point contact at a vertex of (at least) one of the triangles.
    SingleVertex {
        point: Point2,
        owner: VertexOwner,
    },
    /// Any other nonempty intersection, including contacts that could not be
    /// witnessed by a vertex within tolerance.
    Overlap,
}

/// Classifies the intersection of two triangles with tolerance `eps`.
///
/// Vertex coincidences are examined first, then edge crossings and
/// point-in-triangle depths, and finally the interior wedges at the contact
/// point. Anything not witnessed by a vertex within `eps` is `Overlap`.
pub fn classify_triangle_intersection(
    t1: &Triangle,
    t2: &Triangle,
    eps: f64,
) -> Result<IntersectionClass, GeometryError> {
    let min_diameter = t1.diameter.min(t2.diameter);
    if !(eps > 0.0) || eps >= 0.1 * min_diameter {
        return Err(GeometryError::EpsTooLarge { eps, min_diameter });
    }
    let (lo1, hi1) = t1.bbox();
    let (lo2, hi2) = t2.bbox();
    if lo1.x > hi2.x + eps || lo2.x > hi1.x + eps || lo1.y > hi2.y + eps || lo2.y > hi1.y + eps {
        return Ok(IntersectionClass::Empty);
    }

    // (point, owning triangle index, vertex index)
    let mut contacts: Vec<(Point2, usize, usize)> = Vec::new();
    for (own, (a, b)) in [(0usize, (t1, t2)), (1, (t2, t1))] {
        for (vi, &v) in a.vertices.iter().enumerate() {
            if b.distance_to(v) <= eps {
                if b.interior_depth(v) > eps {
                    return Ok(IntersectionClass::Overlap);
                }
                contacts.push((v, own, vi));
            }
        }
    }

    let all_vertices = t1.vertices.iter().chain(t2.vertices.iter());
    for i in 0..3 {
        let (a, b) = t1.edge(i);
        for j in 0..3 {
            let (c, d) = t2.edge(j);
            if let Some(q) = proper_crossing(a, b, c, d) {
                if all_vertices.clone().all(|v| v.dist(q) > eps) {
                    return Ok(IntersectionClass::Overlap);
                }
            }
        }
    }

    if contacts.is_empty() {
        return Ok(IntersectionClass::Empty);
    }
    for (i, &(p, _, _)) in contacts.iter().enumerate() {
        for &(q, _, _) in &contacts[i + 1..] {
            if p.dist(q) > 2.0 * eps {
                return Ok(IntersectionClass::Overlap);
            }
        }
    }

    let point = contacts
        .iter()
        .map(|c| c.0)
        .min_by(|a, b| a.lex_cmp(b))
        .unwrap_or(contacts[0].0);
    let v1 = contacts.iter().find(|c| c.1 == 0).map(|c| c.2);
    let v2 = contacts.iter().find(|c| c.1 == 1).map(|c| c.2);
    let owner = match (v1, v2) {
        (Some(_), Some(_)) => VertexOwner::Both,
        (Some(_), None) => VertexOwner::First,
        _ => VertexOwner::Second,
    };

    let w1 = t1.wedge_at(point, v1);
    let w2 = t2.wedge_at(point, v2);
    if wedges_overlap(w1, w2) {
        return Ok(IntersectionClass::Overlap);
    }
    Ok(IntersectionClass::SingleVertex { point, owner })
}

fn wedges_overlap((a1, w1): (f64, f64), (a2, w2): (f64, f64)) -> bool {
    let tau = 2.0 * PI;
    let mut delta = (a2 - a1) % tau;
    if delta < 0.0 {
        delta += tau;
    }
    delta < w1 - ANGLE_TOL || delta + w2 - tau > ANGLE_TOL
}
