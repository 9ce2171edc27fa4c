//! Parameter validation, assembly of `{S0, S1, S2, S3}` and the two
//! parameter families.

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::addresses::{point_from_address, Address, AddressError, Alphabet, DigitMaps};
use crate::geometry::{GeometryError, Point2, Similarity, A1, A2, A3};
use crate::zipper::{solve_p2, ZipperError};
use crate::DEFAULT_EPS;

/// Equilateral and third-point tolerance before truncation slack is added.
const SHAPE_TOL: f64 = 1e-9;

/// Digit cycle `1 -> 2 -> 3 -> 1`, the rotation by `2 pi / 3`.
pub const CYCLE: [u8; 4] = [0, 2, 3, 1];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConstructionError {
    #[error("invalid parameters: {0}")]
    InvalidParams(ValidationReport),
    #[error("contact points are not equilateral: sides {sides:?}")]
    NotEquilateral { sides: [f64; 3] },
    #[error("S0(A3) misses B3 by {distance}")]
    ThirdPointMismatch { distance: f64 },
    #[error("contact point B{vertex} within tolerance of a vertex of the base triangle")]
    DegenerateContact { vertex: usize },
    #[error("inadmissible ratio p = {0}: need 0 < 3p < 1")]
    InadmissibleP(f64),
    #[error("address of B1 must start with 12 and continue over {{2, 3}}: {0}")]
    BadPrefix(Address),
    #[error(transparent)]
    Address(#[from] AddressError),
    #[error(transparent)]
    Zipper(#[from] ZipperError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Ratios `p1, p2, p3` and the addresses of `B1, B2, B3` in `K'`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    ratios: [f64; 3],
    addresses: [Address; 3],
}

impl SystemParams {
    pub fn new(ratios: [f64; 3], addresses: [Address; 3]) -> Self {
        SystemParams { ratios, addresses }
    }

    pub fn ratios(&self) -> [f64; 3] {
        self.ratios
    }

    pub fn addresses(&self) -> &[Address; 3] {
        &self.addresses
    }
}

/// A single failed parameter check.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RatioOutOfRange { index: usize, value: f64 },
    SumNotBelowOne(f64),
    /// Digit `position` (1-based) of the address of `B_vertex` differs.
    PrefixMismatch {
        vertex: usize,
        position: usize,
        expected: u8,
        found: u8,
    },
    TailOutsideAlphabet { vertex: usize, digit: u8 },
    Address { vertex: usize, error: AddressError },
}

const ADDRESS_LETTER: [char; 3] = ['a', 'b', 'c'];
/// Required two-digit prefix and tail alphabet of each contact address.
const CONDITIONS: [([u8; 2], [u8; 2]); 3] = [([1, 2], [2, 3]), ([2, 3], [1, 3]), ([3, 1], [1, 2])];

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RatioOutOfRange { index, value } => {
                write!(f, "p{} = {value} outside (0,1)", index + 1)
            }
            Violation::SumNotBelowOne(s) => write!(f, "p1+p2+p3 ≥ 1 (sum {s})"),
            Violation::PrefixMismatch {
                vertex,
                position,
                expected,
                found,
            } => write!(
                f,
                "{}{position} ≠ {expected} (found {found})",
                ADDRESS_LETTER[vertex - 1]
            ),
            Violation::TailOutsideAlphabet { vertex, digit } => {
                write!(f, "address of B{vertex} continues with digit {digit}")
            }
            Violation::Address { vertex, error } => write!(f, "address of B{vertex}: {error}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks the ratio constraints and the prefix/tail conditions on the
/// three contact addresses. Every violation is reported.
pub fn validate_params(params: &SystemParams) -> ValidationReport {
    let mut violations = Vec::new();
    for (index, &value) in params.ratios.iter().enumerate() {
        if !(value > 0.0 && value < 1.0) {
            violations.push(Violation::RatioOutOfRange { index, value });
        }
    }
    let sum: f64 = params.ratios.iter().sum();
    if !(sum < 1.0) {
        violations.push(Violation::SumNotBelowOne(sum));
    }
    for (i, (addr, (prefix, tail))) in params.addresses.iter().zip(CONDITIONS).enumerate() {
        let vertex = i + 1;
        for (pos, &expected) in prefix.iter().enumerate() {
            match addr.digit(pos) {
                Ok(found) if found == expected => {}
                Ok(found) => violations.push(Violation::PrefixMismatch {
                    vertex,
                    position: pos + 1,
                    expected,
                    found,
                }),
                Err(error) => violations.push(Violation::Address { vertex, error }),
            }
        }
        let (alphabet, _) = addr.tail_alphabet(2);
        let allowed = Alphabet::of(&tail);
        for digit in alphabet.digits().filter(|&d| !allowed.contains(d)) {
            violations.push(Violation::TailOutsideAlphabet { vertex, digit });
        }
    }
    ValidationReport { violations }
}

/// The three vertex maps `S1, S2, S3` of `K'`, addressed by digits 1..=3.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexMaps([Similarity; 3]);

impl VertexMaps {
    pub fn new(ratios: [f64; 3]) -> Result<Self, GeometryError> {
        Ok(VertexMaps([
            Similarity::homothety(ratios[0], A1)?,
            Similarity::homothety(ratios[1], A2)?,
            Similarity::homothety(ratios[2], A3)?,
        ]))
    }
}

impl DigitMaps for VertexMaps {
    fn map(&self, digit: u8) -> Option<&Similarity> {
        self.0.get((digit as usize).checked_sub(1)?)
    }

    fn max_ratio(&self) -> f64 {
        self.0.iter().map(Similarity::ratio).fold(0.0, f64::max)
    }
}

/// The assembled system `{S0, S1, S2, S3}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemS {
    maps: [Similarity; 4],
    contacts: [Point2; 3],
    center: Point2,
    params: SystemParams,
    address_bound: f64,
}

impl SystemS {
    pub fn maps(&self) -> &[Similarity; 4] {
        &self.maps
    }

    pub fn s0(&self) -> &Similarity {
        &self.maps[0]
    }

    /// `B1, B2, B3`.
    pub fn contacts(&self) -> [Point2; 3] {
        self.contacts
    }

    /// `O`, the fixed point of `S0`.
    pub fn center(&self) -> Point2 {
        self.center
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    /// Truncation bound on the contact point coordinates.
    pub fn address_bound(&self) -> f64 {
        self.address_bound
    }

    pub fn min_ratio(&self) -> f64 {
        self.maps.iter().map(Similarity::ratio).fold(f64::INFINITY, f64::min)
    }

    /// The same system with `S0` replaced, contacts and center recomputed.
    /// Used to build deliberately broken fixtures.
    pub fn with_s0(&self, s0: Similarity) -> SystemS {
        let mut out = self.clone();
        out.maps[0] = s0;
        out.contacts = [s0.apply(A1), s0.apply(A2), s0.apply(A3)];
        out.center = s0.fixed_point().unwrap_or(self.center);
        out
    }
}

impl DigitMaps for SystemS {
    fn map(&self, digit: u8) -> Option<&Similarity> {
        self.maps.get(digit as usize)
    }

    fn max_ratio(&self) -> f64 {
        self.maps.iter().map(Similarity::ratio).fold(0.0, f64::max)
    }
}

/// Builds the system: evaluates `B_k` from their addresses to `depth` digits,
/// takes `S0` as the similarity `A1 -> B1, A2 -> B2`, and checks that it
/// also sends `A3 -> B3` and that the contact triangle is equilateral.
pub fn build_system(params: &SystemParams, depth: usize) -> Result<SystemS, ConstructionError> {
    let report = validate_params(params);
    if !report.is_valid() {
        return Err(ConstructionError::InvalidParams(report));
    }
    let vertex_maps = VertexMaps::new(params.ratios)?;
    let mut contacts = [Point2::default(); 3];
    let mut bound = 0.0f64;
    for (slot, addr) in contacts.iter_mut().zip(&params.addresses) {
        let (p, b) = point_from_address(addr, &vertex_maps, depth)?;
        *slot = p;
        bound = bound.max(b);
    }
    let tol = SHAPE_TOL + 2.0 * bound;

    for (k, b) in contacts.iter().enumerate() {
        if [A1, A2, A3].iter().any(|a| a.dist(*b) < DEFAULT_EPS) {
            return Err(ConstructionError::DegenerateContact { vertex: k + 1 });
        }
    }

    let [b1, b2, b3] = contacts;
    let sides = [b1.dist(b2), b2.dist(b3), b3.dist(b1)];
    let longest = sides.iter().cloned().fold(0.0, f64::max);
    let shortest = sides.iter().cloned().fold(f64::INFINITY, f64::min);
    if longest - shortest > tol {
        return Err(ConstructionError::NotEquilateral { sides });
    }

    let s0 = Similarity::from_correspondence(A1, b1, A2, b2)?;
    let distance = s0.apply(A3).dist(b3);
    if distance > tol {
        return Err(ConstructionError::ThirdPointMismatch { distance });
    }
    let [m1, m2, m3] = vertex_maps.0;
    let center = s0
        .fixed_point()
        .ok_or(ConstructionError::NotEquilateral { sides })?;
    Ok(SystemS {
        maps: [s0, m1, m2, m3],
        contacts,
        center,
        params: params.clone(),
        address_bound: bound,
    })
}

/// The family with `p3 = p1`, `B1 = S1(A2)`, `B2 = S2(A3)` and `B3` carrying
/// the address `31 tail`; `p2` comes from [`solve_p2`].
pub fn lemma1_family(p1: f64, tail: &Address, tol: f64) -> Result<SystemParams, ConstructionError> {
    let solution = solve_p2(p1, tail, tol)?;
    Ok(SystemParams::new(
        [p1, solution.p2, p1],
        [
            Address::periodic(alloc::vec![1], alloc::vec![2])?,
            Address::periodic(alloc::vec![2], alloc::vec![3])?,
            tail.prepend(&[3, 1])?,
        ],
    ))
}

/// The symmetric family `p1 = p2 = p3 = p`, with `B2, B3` obtained from `B1`
/// by cycling the digits `1 -> 2 -> 3 -> 1`.
pub fn cyclic_family(p: f64, addr_b1: &Address) -> Result<SystemParams, ConstructionError> {
    if !(p > 0.0 && 3.0 * p < 1.0) {
        return Err(ConstructionError::InadmissibleP(p));
    }
    let prefix_ok = addr_b1.digit(0).ok() == Some(1) && addr_b1.digit(1).ok() == Some(2);
    let (tail, _) = addr_b1.tail_alphabet(2);
    if !prefix_ok || !tail.is_subset(Alphabet::of(&[2, 3])) {
        return Err(ConstructionError::BadPrefix(addr_b1.clone()));
    }
    let b2 = addr_b1.map_digits(CYCLE)?;
    let b3 = b2.map_digits(CYCLE)?;
    Ok(SystemParams::new([p, p, p], [addr_b1.clone(), b2, b3]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ADDRESS_DEPTH;
    use alloc::string::ToString;
    use core::f64::consts::PI;

    fn a(s: &str) -> Address {
        s.parse().unwrap()
    }

    const SQRT3: f64 = 1.732_050_807_568_877_2;

    fn cyclic(addr: &str) -> SystemS {
        build_system(&cyclic_family(0.2, &a(addr)).unwrap(), ADDRESS_DEPTH).unwrap()
    }

    #[test]
    fn validation_accepts_cyclic_example() {
        let params = SystemParams::new([0.2; 3], [a("12(23)"), a("23(31)"), a("31(12)")]);
        assert!(validate_params(&params).is_valid());
    }

    #[test]
    fn validation_reports_each_violation() {
        let params = SystemParams::new([0.4, 0.3, 0.4], [a("13(2)"), a("23(31)"), a("31(12)")]);
        let report = validate_params(&params);
        let messages: Vec<_> = report.violations.iter().map(|v| v.to_string()).collect();
        assert_eq!(messages.len(), 2, "{messages:?}");
        assert!(messages[0].starts_with("p1+p2+p3 ≥ 1"));
        assert!(messages[1].starts_with("a2 ≠ 2"));

        let params = SystemParams::new([0.2, 1.2, 0.1], [a("12(21)"), a("23(31)"), a("31(12)")]);
        let report = validate_params(&params);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::RatioOutOfRange { index: 1, .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::TailOutsideAlphabet { vertex: 1, digit: 1 })));
    }

    #[test]
    fn cyclic_family_addresses() {
        let p = cyclic_family(0.2, &a("12(23)")).unwrap();
        assert_eq!(p.addresses()[1], a("23(31)"));
        assert_eq!(p.addresses()[2], a("31(12)"));
        let p = cyclic_family(0.2, &a("1(2)")).unwrap();
        assert_eq!(p.addresses()[1], a("2(3)"));
        assert_eq!(p.addresses()[2], a("3(1)"));
        assert_eq!(
            cyclic_family(0.34, &a("1(2)")),
            Err(ConstructionError::InadmissibleP(0.34))
        );
        assert!(matches!(
            cyclic_family(0.2, &a("13(2)")),
            Err(ConstructionError::BadPrefix(_))
        ));
    }

    #[test]
    fn cyclic_constant_tail_system() {
        let s = cyclic("1(2)");
        let [b1, b2, b3] = s.contacts();
        assert!(b1.dist(Point2::new(0.2, 0.0)) < 1e-15);
        assert!(b2.dist(Point2::new(0.9, 0.1 * SQRT3)) < 1e-15);
        assert!(b3.dist(Point2::new(0.4, 0.4 * SQRT3)) < 1e-15);
        let side = libm::sqrt(0.52);
        assert!((b1.dist(b2) - side).abs() < 1e-14);
        // S0 commutes with the rotation about the centroid
        assert!(s.center().dist(Point2::new(0.5, SQRT3 / 6.0)) < 1e-12);
        assert!(s.s0().apply(s.center()).dist(s.center()) < 1e-12);
    }

    #[test]
    fn cyclic_rotation_permutes_contacts() {
        let s = cyclic("12(23)");
        let c = Point2::new(0.5, SQRT3 / 6.0);
        let rot = Similarity::new(1.0, 2.0 * PI / 3.0, Point2::default()).unwrap();
        let about = |p: Point2| rot.apply(p - c) + c;
        let [b1, b2, b3] = s.contacts();
        assert!(about(b1).dist(b2) < 1e-9);
        assert!(about(b2).dist(b3) < 1e-9);
        assert!(s.center().dist(c) < 1e-12);
    }

    #[test]
    fn lemma1_family_system() {
        let tail = a("2(1)");
        let params = lemma1_family(0.3, &tail, 1e-10).unwrap();
        let [p1, p2, p3] = params.ratios();
        assert_eq!(p1, 0.3);
        assert_eq!(p3, 0.3);
        assert!((p2 - 3.0 / 13.0).abs() < 1e-10);
        assert_eq!(params.addresses()[2].to_string(), "312(1)");
        let s = build_system(&params, ADDRESS_DEPTH).unwrap();
        let [b1, b2, b3] = s.contacts();
        assert!(b1.dist(Point2::new(0.3, 0.0)) < 1e-15);
        assert!(b2.dist(Point2::new(23.0 / 26.0, 3.0 * SQRT3 / 26.0)) < 1e-10);
        // C(p1, p2) = e^{i pi/3} - p2 + p1 e^{-i pi/3}
        let c = Point2::new(0.5 - p2 + 0.5 * p1, SQRT3 / 2.0 * (1.0 - p1));
        assert!(b3.dist(c) < 1e-10);
        assert!(b3.dist(Point2::new(0.419_230_769_230_769_4, 0.606_217_782_649_107_1)) < 1e-9);
        assert!(s.s0().apply(A3).dist(b3) < 1e-9);
        assert!(s.s0().apply(s.center()).dist(s.center()) < 1e-12);

        let params = lemma1_family(0.3, &a("(2)"), 1e-10).unwrap();
        assert!((params.ratios()[1] - 0.21).abs() < 1e-10);
        assert_eq!(params.addresses()[2].to_string(), "31(2)");
        assert!(build_system(&params, ADDRESS_DEPTH).is_ok());

        assert!(matches!(
            lemma1_family(0.3, &a("(1)"), 1e-10),
            Err(ConstructionError::Zipper(ZipperError::ExcludedTail))
        ));
    }

    #[test]
    fn solver_residual_reconstructs_b3_address() {
        // S3^{-1}(C(p1, p2)) = 1 - p2/p1 has address 1 tail in K_{p1 p2}
        let tail = a("21(2)");
        let params = lemma1_family(0.27, &tail, 1e-10).unwrap();
        let [p1, p2, _] = params.ratios();
        let s = build_system(&params, ADDRESS_DEPTH).unwrap();
        let s3 = s.maps()[3];
        let back = s3.inverse().apply(s.contacts()[2]);
        assert!(back.y.abs() < 1e-12);
        assert!((back.x - (1.0 - p2 / p1)).abs() < 1e-9);
        let pair = crate::zipper::CantorPair::new(p1, p2).unwrap();
        let (v, _) = crate::zipper::cantor_value(&tail.prepend(&[1]).unwrap(), &pair, 80).unwrap();
        assert!((v - back.x).abs() < 1e-9);
    }

    #[test]
    fn perturbed_address_breaks_equilateral() {
        let params = cyclic_family(0.2, &a("12(23)")).unwrap();
        let [b1, b2, _] = params.addresses().clone();
        let broken = SystemParams::new(params.ratios(), [b1, b2, a("31(21)")]);
        assert!(matches!(
            build_system(&broken, ADDRESS_DEPTH),
            Err(ConstructionError::NotEquilateral { .. })
        ));
    }

    #[test]
    fn build_is_deterministic() {
        let params = cyclic_family(0.2, &a("12(23)")).unwrap();
        assert_eq!(
            build_system(&params, ADDRESS_DEPTH).unwrap(),
            build_system(&params, ADDRESS_DEPTH).unwrap()
        );
    }

    #[test]
    fn invalid_params_refused() {
        let params = SystemParams::new([0.4, 0.4, 0.4], [a("12(23)"), a("23(31)"), a("31(12)")]);
        assert!(matches!(
            build_system(&params, ADDRESS_DEPTH),
            Err(ConstructionError::InvalidParams(_))
        ));
    }

    #[test]
    fn contact_address_horizon() {
        let params = SystemParams::new([0.2; 3], [a("1223..."), a("23(31)"), a("31(12)")]);
        assert!(validate_params(&params).is_valid());
        assert!(matches!(
            build_system(&params, ADDRESS_DEPTH),
            Err(ConstructionError::Address(AddressError::HorizonExceeded { .. }))
        ));
    }
}
