//! Principal component analysis in the graph frequency domain.
//!
//! A p-dimensional signal on the n vertices of a graph is analysed through
//! its graph cross-spectral densities. At each graph frequency (eigenvalue of
//! the graph Laplacian) the p×p spectral matrix is eigendecomposed; the
//! leading eigenvectors define graph filters that compress the signal into
//! q principal component graph signals with minimum mean squared
//! reconstruction error.
//!
//! ```
//! use std::sync::Arc;
//! use gfpca::graph::{build_laplacian, builtin_karate};
//! use gfpca::pca::{fit, select_q, QPolicy};
//! use gfpca::simulation::{draw, karate_model};
//! use gfpca::spectral::{assemble_spectral_matrices, Estimator, WindowEnsemble};
//!
//! let so = Arc::new(build_laplacian(&builtin_karate()).unwrap());
//! let x = draw(&karate_model(), &so, 7).unwrap();
//! let (centered, means) = x.centered();
//! let windows = WindowEnsemble::new(50, 0.2, 11, so.n()).unwrap();
//! let est = Estimator::Windowed { ensemble: &windows, correct_bias: false };
//! let field = assemble_spectral_matrices(&centered, &so, est, true).unwrap();
//! let model = fit(&field, &means, so).unwrap();
//! let q = select_q(&model, QPolicy::CumulativeThreshold(0.95)).unwrap();
//! let envelope = model.spectral_envelope();
//! assert_eq!(envelope.len(), 34);
//! assert!(q >= 1);
//! ```

pub mod baseline;
pub mod error;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod pca;
pub mod signal;
pub mod simulation;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Graph, ShiftOperator};
pub use linalg::{CMatrix, CVector, C64};
pub use pca::{fit, GFreqPcaModel, QPolicy};
pub use signal::MultivariateGraphSignal;
pub use spectral::{SpectralDensity, SpectralMatrixField};
