//! Low-rank CP tensor approximation by the generating-polynomial method,
//! an ALS baseline, and tensor canonical correlation analysis (TCCA) built
//! on top of them.
//!
//! * [`tensor`]: dense tensors, CP decompositions, unfoldings, Khatri-Rao.
//! * [`numerics`]: least squares, complex Schur, inverse square roots, PCA.
//! * [`gp`]: generating matrices and the GP decomposition.
//! * [`solvers`]: ALS, refinement from an initial point, normalization.
//! * [`tcca`]: multi-view covariances, whitening, fitting and projection.

pub mod error;
pub mod gp;
pub mod io;
pub mod numerics;
pub mod solvers;
pub mod synth;
pub mod tcca;
pub mod tensor;

pub use error::{Error, Result};
pub use gp::{gp_decompose, GeneratingMatrixSet, GpOptions, ModePermutation};
pub use solvers::{als_decompose, normalize_cp, refine_from_init, SolveOptions, SolveReport};
pub use tcca::{tcca_fit, tcca_project, MultiViewDataset, TccaModel, TccaOptions};
pub use tensor::{cp_to_tensor, relative_residual, CpDecomposition, DenseTensor};
