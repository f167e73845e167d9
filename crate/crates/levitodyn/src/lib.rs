//! Steady-state Gaussian dynamics of optically levitated nano-ellipsoids
//! coupled to optical cavities by coherent scattering.
//!
//! The crate computes, from closed-form expressions, the mechanical
//! frequencies and optomechanical couplings of a nano-ellipsoid held in an
//! optical tweezer inside a cavity, the residual-gas damping rates, the
//! steady covariance matrix of the linearized Langevin dynamics, the
//! covariance matrix of temporally filtered output modes, and the
//! logarithmic negativity of any mode pair. Two such systems can be joined
//! through a dual-homodyne Bell-like detection of their filtered outputs,
//! yielding the conditional covariance matrix (and entanglement) of the two
//! remote mechanical modes.
//!
//! Conventions used throughout:
//! - every frequency, decay rate, coupling and filter width is an angular
//!   rate in rad/s;
//! - quadratures are scaled so the vacuum variance is 1/2, and covariance
//!   matrices use the interleaved mode ordering (q1, p1, q2, p2, ...);
//! - Fourier transforms follow f~(w) = Int f(t) exp(+i w t) dt.

pub mod bell_swap;
pub mod constants;
pub mod dynamics;
pub mod ellipsoid;
mod error;
pub mod gas_damping;
pub mod gaussian_tools;
pub mod numeric;
pub mod output_filter;
pub mod system;
pub mod trap_cavity;

pub use error::{Error, Result};
