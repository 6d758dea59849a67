//! ADMM for the low-rank and sparse enhanced Tucker completion model.
//!
//! The model couples a Tucker fit `⟦S; X⁽¹⁾, X⁽²⁾, X⁽³⁾⟧ ≈ Z`, nuclear norms on
//! split copies `Y⁽ⁱ⁾` of the factors, an ℓ1 penalty on the core, and
//! smoothness terms `ωᵢ‖AᵢW_{i,(i)}‖²` on split copies `Wᵢ` of the completed
//! tensor `Z`, with `Z` pinned to the data on the observed set `Ω`.
//!
//! Each iteration updates the blocks in the order `X → Y → S → Z → W → U → T`,
//! where `U` and `T` are the multipliers of `Z = Wᵢ` and `X⁽ⁱ⁾ = Y⁽ⁱ⁾`.

mod config;
mod energy;
mod state;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use config::{default_ranks, Init, Preset, SolverConfig, StopDenominator};
pub use state::SolverState;

use crate::error::{shape_err, Error, Result};
use crate::tensor::{DenseMatrix, DenseTensor, ObservationMask};

/// One matrix per mode.
pub type FactorSet = [DenseMatrix; 3];

/// Elapsed-time source for the trace. The core has no clock of its own.
pub trait Clock {
    /// Seconds since some fixed origin.
    fn seconds(&self) -> f64;
}

/// Reports zero elapsed time.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn seconds(&self) -> f64 {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Tol,
    MaxIter,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub rel_change: f64,
    pub lagrangian: f64,
    pub objective: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct CompletionReport {
    pub recovered: DenseTensor,
    pub trace: Vec<IterationRecord>,
    pub iterations: usize,
    pub termination: Termination,
}

/// Runs the ADMM until the relative change of `Z` drops to `cfg.tol` or
/// `cfg.max_iter` iterations have run.
///
/// `truth` is required for [`StopDenominator::Oracle`] and ignored otherwise.
pub fn solve(
    m: &DenseTensor,
    mask: &ObservationMask,
    cfg: &SolverConfig,
    truth: Option<&DenseTensor>,
) -> Result<CompletionReport> {
    solve_with_clock(m, mask, cfg, truth, &NoClock)
}

/// As [`solve`], stamping each trace record with `clock.seconds()` relative to the start.
pub fn solve_with_clock(
    m: &DenseTensor,
    mask: &ObservationMask,
    cfg: &SolverConfig,
    truth: Option<&DenseTensor>,
    clock: &impl Clock,
) -> Result<CompletionReport> {
    let oracle = match (cfg.stop_denominator, truth) {
        (StopDenominator::Oracle, None) => {
            return Err(Error::Config("oracle stopping needs the ground-truth tensor".into()))
        }
        (StopDenominator::Oracle, Some(t)) => {
            if t.dims() != m.dims() {
                return Err(shape_err!("truth dims {:?} vs data dims {:?}", t.dims(), m.dims()));
            }
            Some(t.frobenius())
        }
        (StopDenominator::Blind, _) => None,
    };
    let start = clock.seconds();
    let mut state = SolverState::new(m, mask, cfg)?;
    let mut trace = Vec::new();
    let mut termination = Termination::MaxIter;
    for _ in 0..cfg.max_iter {
        let previous = state.z.clone();
        state.iterate()?;
        let denom = oracle.unwrap_or_else(|| previous.frobenius().max(1.0));
        let change = state.z.sub(&previous)?.frobenius();
        let rel_change = if change == 0.0 { 0.0 } else { change / denom };
        trace.push(IterationRecord {
            iteration: state.iteration,
            rel_change,
            lagrangian: state.augmented_lagrangian()?,
            objective: state.objective_value()?,
            seconds: clock.seconds() - start,
        });
        if rel_change <= cfg.tol {
            termination = Termination::Tol;
            break;
        }
    }
    Ok(CompletionReport {
        iterations: trace.len(),
        recovered: state.z,
        trace,
        termination,
    })
}
