//! Special functions and convolution primitives shared by every algorithm.
//!
//! Everything here is a pure function. FFT plans are cached per thread, but no
//! scratch buffer outlives a single call.

mod beta;
mod convolve;
mod pmf;
mod saddle;

pub use beta::{reg_inc_beta, reg_inc_beta_inv};
pub use convolve::{linear_convolve, DIRECT_THRESHOLD, DIRECT_WORK};
pub use pmf::{binomial_pmf_vector, binomial_transition, poisson_pmf_vector, PmfVector, PoissonKernel};
pub use saddle::{ln_poisson_pmf_at_mean, log_binomial_pmf, log_poisson_pmf};

pub(crate) use convolve::convolve_into;
