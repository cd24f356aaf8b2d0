//! Minimal-norm null controls for the distributed-delay equation
//!
//! ```text
//! x'(t) = x(t - 1) + int_{-1}^0 phi(tau) x(t + tau) dtau + u(t)
//! ```
//!
//! on the state space `M = C x L2(-1, 0)`. The pieces are: the spectrum of the
//! characteristic function, the biorthogonal system of the generator, a
//! regularized summation of the (generally non-convergent) eigen-expansion,
//! explicit controls that null a single eigenvector, a direct simulator used to
//! check them, and a discretized least-norm oracle.

// `!(x < tol)` is used on purpose so that NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod contour;
pub mod control;
pub mod error;
pub mod kernel;
pub mod oracle;
pub mod quad;
pub mod sim;
pub mod spectral;
pub mod state;
pub mod summation;

pub use error::{Error, Result};
pub use kernel::DelayKernel;
pub use spectral::{find_roots, EigenRecord, SpectrumSet};
pub use state::{m_inner, m_norm, MState};
pub use summation::{partial_sum, SummationSchedule};

pub(crate) fn num(x: f64) -> String {
    format!("{:.16e}", x)
}
