//! Zippers on `[0, 1]` with nodes `{0, p1, 1 - p2, 1}` and zero signature,
//! the homeomorphism between two of them, and the solver that picks `p2`
//! so that the third contact point has a prescribed address.

use alloc::vec::Vec;

use thiserror::Error;

use crate::addresses::{Address, AddressError, Alphabet};
use crate::numeric::bisect;

/// Digits needed for evaluations to reach below `1e-28` on the
/// middle-third set.
const EVAL_DEPTH: usize = 60;
/// Tolerance of the inner zipper transfer used by the solver.
const SOLVER_TRANSFER_TOL: f64 = 1e-14;
/// Lower end of the solver bracket.
const BRACKET_LO: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ZipperError {
    #[error("invalid Cantor pair ({p1}, {p2}): need p1, p2 > 0 and p1 + p2 < 1")]
    InvalidPair { p1: f64, p2: f64 },
    #[error("argument {0} outside [0, 1]")]
    OutOfRange(f64),
    #[error("tolerance must be positive")]
    InvalidTolerance,
    #[error("tolerance {0} unreachable in floating point")]
    ToleranceUnreachable(f64),
    #[error("address digit {0} outside {{1, 2}}")]
    DigitOutsideAlphabet(u8),
    #[error("tail (1) is excluded")]
    ExcludedTail,
    #[error("p1 = {0} outside (0, 1/2)")]
    InvalidP1(f64),
    #[error("solution violates 2 p1 + p2 < 1 (p1 = {p1}, p2 = {p2})")]
    AdmissibilityViolation { p1: f64, p2: f64 },
    #[error("no sign change on the solver bracket")]
    NoSignChange,
    #[error("solver residual {0} above tolerance")]
    ResidualTooLarge(f64),
    #[error(transparent)]
    Address(#[from] AddressError),
}

/// The two-map Cantor set generated by `x -> p1 x` and `x -> p2 x + 1 - p2`,
/// equivalently the zipper with nodes `{0, p1, 1 - p2, 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CantorPair {
    p1: f64,
    p2: f64,
}

impl CantorPair {
    pub fn new(p1: f64, p2: f64) -> Result<Self, ZipperError> {
        if !(p1 > 0.0 && p2 > 0.0 && p1 + p2 < 1.0) {
            return Err(ZipperError::InvalidPair { p1, p2 });
        }
        Ok(CantorPair { p1, p2 })
    }

    /// The middle-third pair, whose zipper has nodes `{0, 1/3, 2/3, 1}`.
    pub fn thirds() -> Self {
        CantorPair {
            p1: 1.0 / 3.0,
            p2: 1.0 / 3.0,
        }
    }

    pub fn p1(&self) -> f64 {
        self.p1
    }

    pub fn p2(&self) -> f64 {
        self.p2
    }

    pub fn nodes(&self) -> [f64; 4] {
        [0.0, self.p1, 1.0 - self.p2, 1.0]
    }

    fn gap(&self) -> f64 {
        1.0 - self.p1 - self.p2
    }

    /// Widths of the `3^depth` zipper cells of the given depth, left to right.
    pub fn cell_widths(&self, depth: usize) -> Vec<f64> {
        let mut widths = alloc::vec![1.0];
        for _ in 0..depth {
            widths = widths
                .iter()
                .flat_map(|&w| [w * self.p1, w * self.gap(), w * self.p2])
                .collect();
        }
        widths
    }
}

/// Evaluates an address over `{1, 2}` in the Cantor set of `pair`, starting
/// from the seed `0`. The bound is `max(p1, p2)^depth`.
pub fn cantor_value(
    addr: &Address,
    pair: &CantorPair,
    depth: usize,
) -> Result<(f64, f64), ZipperError> {
    let digits = addr.prefix(depth)?;
    let mut x = 0.0;
    for &d in digits.iter().rev() {
        x = match d {
            1 => pair.p1 * x,
            2 => pair.p2 * x + 1.0 - pair.p2,
            other => return Err(ZipperError::DigitOutsideAlphabet(other)),
        };
    }
    Ok((x, libm::pow(pair.p1.max(pair.p2), depth as f64)))
}

/// The zipper homeomorphism carrying `from` onto `to`: follows the cell
/// itinerary of `x` in the source zipper until the target cell is narrower
/// than `tol`, then interpolates linearly inside the final cell pair.
///
/// Swapping `from` and `to` gives the inverse map.
pub fn zipper_transfer(
    x: f64,
    from: &CantorPair,
    to: &CantorPair,
    tol: f64,
) -> Result<f64, ZipperError> {
    if !(tol > 0.0) {
        return Err(ZipperError::InvalidTolerance);
    }
    let (y, bound) = zipper_transfer_bounded(x, from, to, tol)?;
    if bound >= tol {
        return Err(ZipperError::ToleranceUnreachable(tol));
    }
    Ok(y)
}

/// Like [`zipper_transfer`], but stops quietly once `x` can no longer be
/// located in a finer cell and returns the image together with the width
/// of the target cell it was resolved to.
pub fn zipper_transfer_bounded(
    x: f64,
    from: &CantorPair,
    to: &CantorPair,
    tol: f64,
) -> Result<(f64, f64), ZipperError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(ZipperError::OutOfRange(x));
    }
    if !(tol > 0.0) {
        return Err(ZipperError::InvalidTolerance);
    }
    if x == 0.0 || x == 1.0 {
        return Ok((x, 0.0));
    }
    let (mut a, mut w) = (0.0f64, 1.0f64);
    let (mut b, mut v) = (0.0f64, 1.0f64);
    let resolvable = |lo: f64, width: f64| width > lo.abs().max(f64::MIN_POSITIVE) * f64::EPSILON * 4.0;
    while (v >= tol || w >= tol) && resolvable(a, w) && resolvable(b, v) {
        let s1 = a + w * from.p1;
        let s2 = a + w * (1.0 - from.p2);
        if x < s1 {
            w *= from.p1;
            v *= to.p1;
        } else if x < s2 {
            a = s1;
            w *= from.gap();
            b += v * to.p1;
            v *= to.gap();
        } else {
            a = s2;
            w *= from.p2;
            b += v * (1.0 - to.p2);
            v *= to.p2;
        }
    }
    let frac = ((x - a) / w).clamp(0.0, 1.0);
    Ok((b + v * frac, v))
}

/// Result of [`solve_p2`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct P2Solution {
    pub p2: f64,
    /// `|phi(1 - p2/p1) - t*|` at the returned `p2`.
    pub residual: f64,
    /// The target `t*`: value of `1 tail` in the middle-third set.
    pub target: f64,
}

/// Finds `p2 in (0, p1]` such that the point `1 - p2/p1` of the base segment
/// has the address `1 tail` in the Cantor set of `(p1, p2)`.
///
/// This is the root of `g(p2) = phi_{p1 p2}(1 - p2/p1) - t*`, where `t*`
/// is the middle-third value of `1 tail`. `g` has no useful smoothness, so the
/// root is found by bisection on `[1e-12, p1]`.
pub fn solve_p2(p1: f64, tail: &Address, tol: f64) -> Result<P2Solution, ZipperError> {
    if !(p1 > 0.0 && p1 < 0.5) {
        return Err(ZipperError::InvalidP1(p1));
    }
    if !(tol > 0.0) {
        return Err(ZipperError::InvalidTolerance);
    }
    let (alphabet, complete) = tail.tail_alphabet(0);
    let allowed = Alphabet::of(&[1, 2]);
    if !alphabet.is_subset(allowed) {
        let bad = alphabet.digits().find(|&d| !allowed.contains(d)).unwrap_or(0);
        return Err(ZipperError::DigitOutsideAlphabet(bad));
    }
    if complete && tail == &Address::constant(1)? {
        return Err(ZipperError::ExcludedTail);
    }
    let full = tail.prepend(&[1])?;
    let thirds = CantorPair::thirds();
    let (target, _) = cantor_value(&full, &thirds, EVAL_DEPTH)?;
    if target <= 0.0 {
        return Err(ZipperError::ExcludedTail);
    }

    let g = |p2: f64| -> Result<f64, ZipperError> {
        let pair = CantorPair::new(p1, p2)?;
        let x = (1.0 - p2 / p1).clamp(0.0, 1.0);
        Ok(zipper_transfer_bounded(x, &pair, &thirds, SOLVER_TRANSFER_TOL)?.0 - target)
    };

    let mut failure = None;
    let root = bisect(BRACKET_LO, p1, |p2| match g(p2) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let p2 = root.ok_or(ZipperError::NoSignChange)?;
    let residual = g(p2)?.abs();
    if residual >= tol {
        return Err(ZipperError::ResidualTooLarge(residual));
    }
    if 2.0 * p1 + p2 >= 1.0 {
        return Err(ZipperError::AdmissibilityViolation { p1, p2 });
    }
    Ok(P2Solution {
        p2,
        residual,
        target,
    })
}
