//! Exact 1/N expansion machinery for one-cut beta-eigenvalue models.
//!
//! The crate is organized in layers:
//!
//! - [`scalar`], [`poly`], [`ratfunc`], [`multirat`]: the arithmetic substrate
//!   (arbitrary-precision rationals, truncated series, big floats; univariate
//!   and multivariate rational functions with factored denominators, residues,
//!   partial fractions, Laurent expansion).
//! - [`potential`], [`curve`]: model definition and the planar one-cut
//!   spectral curve in the Zhukovsky coordinate, with the Bergman kernel,
//!   its primitive, and the recursion kernel.
//! - [`recursion`]: the correlator table `W_{k,l}(p_1,...,p_s)` computed by
//!   contour-integral recursion with memoization.
//! - [`diagram`]: the decorated-graph expansion (ten vertex types, selection
//!   rules, symmetry factors) as an independent evaluation path.
//! - [`free_energy`]: the H-operator and the free-energy terms `F_{k,l}`.
//! - [`oracle`]: independent finite-N ground truth (exact moments of the
//!   Gaussian beta-ensemble, the product formula for ln Z, its asymptotic
//!   expansion, and the exact loop-equation identity check).
//! - [`cache`]: content-addressed result cache used by the CLI.

pub mod cfloat;
pub mod curve;
pub mod diagram;
pub mod free_energy;
pub mod multirat;
pub mod oracle;
pub mod poly;
pub mod potential;
pub mod ratfunc;
pub mod recursion;
pub mod scalar;
pub mod cache;

pub use curve::OneCutCurve;
pub use potential::Potential;
pub use scalar::Scalar;

/// Version stamp embedded in cache keys so that stale results are never
/// served across code changes.
pub const CODE_VERSION: &str = concat!("onecut-", env!("CARGO_PKG_VERSION"));
