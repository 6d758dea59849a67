//! Tensor completion with a low-rank and sparse enhanced Tucker model.
//!
//! A partially observed third-order tensor `M` is completed by fitting a
//! Tucker model `⟦S; X1, X2, X3⟧` whose factor matrices carry a nuclear-norm
//! penalty and whose core carries an ℓ1 penalty, optionally combined with a
//! per-mode first-difference smoothness term. The model is solved with a
//! block ADMM whose every sub-step has a closed form (see [`solver`]).
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line runner and wall-clock timing live in the companion `lrsetd` crate.
//!
//! Modes are 0-based throughout the API: mode `0` is the first tensor index.
#![no_std]

extern crate alloc;

pub mod error;
pub mod hosvd;
pub mod linalg;
pub mod masks;
pub mod metrics;
pub mod solver;
pub mod synthetic;
pub mod tensor;

pub use error::{Error, Result};
pub use hosvd::{hosvd, reconstruction_snr, truncate_core, TuckerModel};
pub use linalg::{
    nuclear_norm, soft_shrink, spd_solve, spectral_norm, svd_reduced, svd_shrink, toeplitz_diff,
    Cholesky, SvdFactors,
};
pub use masks::{random_mask, structured_mask, MissingKind, MissingParams, MissingSpec};
pub use metrics::{nmae, psnr, rse, PsnrScope};
pub use solver::{
    solve, solve_with_clock, Clock, CompletionReport, FactorSet, Init, IterationRecord, NoClock,
    Preset, SolverConfig, SolverState, StopDenominator, Termination,
};
pub use synthetic::{FactorShape, SyntheticSpec};
pub use tensor::{
    fold, frobenius, inner, kron, mode_product, multilinear, project_assign, unfold, DenseMatrix,
    DenseTensor, Elementwise, ObservationMask,
};
