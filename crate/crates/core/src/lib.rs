//! Entanglement dynamics of three two-level atoms coupled to a single cavity
//! mode.
//!
//! The total excitation number (photons plus excited atoms) is conserved, so
//! every computation happens inside a fixed excitation sector of dimension at
//! most 8. The crate is organised bottom-up:
//!
//! * [`model`]: couplings, sector bases, Hamiltonians and initial states.
//! * [`dynamics`]: spectral propagation, oscillator partial trace, purity.
//! * [`entanglement`]: multipartite concurrence (pure states, quasi-pure
//!   lower bound, convex-roof upper bound).
//! * [`scan`]: concurrence-purity trajectories and `(J, t)` density scans.

// `!(x <= tol)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod entanglement;
mod error;
pub mod linalg;
pub mod model;
pub mod random;
pub mod scan;

pub use error::{Error, Result};
