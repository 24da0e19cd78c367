//! Kernel-based quadratic distance (KBQD) methods.
//!
//! * [`gof`]: normality, two-sample and k-sample tests with resampled
//!   critical values.
//! * [`uniformity`]: Poisson kernel test of uniformity on the sphere.
//! * [`tuning`]: bandwidth selection by simulated power.
//! * [`pkbd`]: Poisson kernel-based densities and samplers.
//! * [`clustering`]: mixtures of Poisson kernel-based densities fitted by EM.
//!
//! Every randomized routine takes a [`SeededRandomSource`]; results are
//! reproducible and independent of the rayon thread count.

pub mod clustering;
pub mod data;
pub mod datasets;
pub mod error;
pub mod gof;
pub mod kernels;
pub mod linalg;
pub mod rng;
pub mod pkbd;
pub mod quadrature;
pub mod roots;
pub mod special;
pub mod stats;
pub mod tuning;
pub mod uniformity;

pub use data::{DataMatrix, GroupLabels};
pub use error::{Error, Result};
pub use rng::SeededRandomSource;

/// Size the global worker pool used by the parallel routines. Must be
/// called before any parallel work; later calls fail.
pub fn set_threads(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidArgument("thread count must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidArgument(format!("worker pool already configured: {e}")))
}
