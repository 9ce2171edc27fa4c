//! Construction, certification and measurement of a family of planar
//! self-similar dendrites generated by four similarities `S0..S3` acting on
//! the unit equilateral triangle.
//!
//! The crate is `no_std` (it needs `alloc`). Modules, bottom-up:
//!
//! - [`geometry`]: points, similarities, triangles and contact classification.
//! - [`addresses`]: digit streams, the index map, shifts and the
//!   postcritical-finiteness test.
//! - [`zipper`]: zipper homeomorphisms between two-map Cantor sets and the
//!   solver producing admissible contraction ratios.
//! - [`construction`]: parameter validation, system assembly and the two
//!   parameter families.
//! - [`dendrite`]: the Hutchinson triangle complex, its certification and the
//!   nerve tree.
//! - [`arcs`]: subarcs as triangle chains, pre-measures and dimension
//!   estimates.
//! - [`measures`]: the graph-directed system of subarc measures and its
//!   dimension.
#![no_std]
// Guards like `!(x > 0.0)` are meant to reject NaN too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod addresses;
pub mod arcs;
pub mod construction;
pub mod dendrite;
pub mod geometry;
pub mod measures;
mod numeric;
pub mod zipper;

pub use addresses::{Address, PcfReport, PcfStatus};
pub use construction::{SystemParams, SystemS};
pub use geometry::{Multiindex, Point2, Similarity, Triangle};

/// Geometric tolerance used when nothing else is configured.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Depth used when evaluating the contact points `B1, B2, B3` from their
/// addresses. Truncation error is at most `(max ratio)^ADDRESS_DEPTH`.
pub const ADDRESS_DEPTH: usize = 96;
