//! Multivariate Kantorovich-type neural network operators activated by
//! sigmoidal functions.
//!
//! The crate is organised bottom-up:
//!
//! - [`kernels`]: sigmoidal activations and their normalized density kernels.
//! - [`operator`]: cell averages and evaluation of `K_n f` on points and grids.
//! - [`normspaces`]: mixed-norm Lebesgue norms, Orlicz modulars and Luxemburg norms.
//! - [`metrics`]: MSE, PSNR and the global SSIM.
//! - [`imaging`]: reconstruction, inpainting, scaling and denoising pipelines,
//!   noise models, classical filters and the test fields.
//! - [`io`]: PGM and CSV input/output.
//! - [`cli`]: the `kantorovich` command-line front end.

// negated comparisons reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod imaging;
pub mod io;
pub mod kernels;
pub mod metrics;
pub mod normspaces;
pub mod operator;

pub use error::{Error, Result};
pub use imaging::Image;
pub use kernels::{DensityKernel, SigmoidKind};
pub use operator::{BoxDomain, CellAverageTensor, Field, GridFunction};
