//! Estimation of the component means of a univariate Gaussian mixture from
//! the subspace structure of a Toeplitz matrix of characteristic-function
//! samples, together with an EM baseline and a Monte Carlo harness.
//!
//! The estimation pipeline is:
//!
//! 1. pick a sampling period `T_e = pi / (max z - min z)`,
//! 2. estimate `M` samples of the empirical characteristic function,
//! 3. build the Hermitian Toeplitz matrix `R_M`,
//! 4. eigendecompose it and keep the `M - K` weakest eigenvectors,
//! 5. root the noise polynomial built from the diagonal sums of `V V^H`,
//! 6. keep the `K` roots inside and closest to the unit circle,
//! 7. unwrap their phases into means inside the observed range.
//!
//! ```
//! use cfmusic_core::{mixture::GaussianMixture, spectral::estimate_means};
//!
//! let model = GaussianMixture::from_triples(&[(0.5, 0.0, 0.05), (0.5, 3.0, 0.05)]).unwrap();
//! let obs = model.sample(400, 11);
//! let result = estimate_means(&obs, 2, 4).unwrap();
//! assert!((result.means[0] - 0.0).abs() < 0.1);
//! assert!((result.means[1] - 3.0).abs() < 0.1);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cf;
pub mod em;
pub mod error;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod mixture;
pub mod spectral;

pub use error::{Error, Result};
pub use num_complex::Complex64;
