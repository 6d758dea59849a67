use alloc::string::{String, ToString};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the solver initializes the factor matrices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Truncated HOSVD of the zero-filled observation.
    #[default]
    Hosvd,
    /// Standard-normal entries from a seeded stream, then orthonormalized columns.
    Random { seed: u64 },
}

/// Denominator of the relative-change stopping rule.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopDenominator {
    /// `‖truth‖_F`; needs the ground-truth tensor.
    Oracle,
    /// `max(‖Zᵏ‖_F, 1)`.
    #[default]
    Blind,
}

/// Named parameter sets for the experiment families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    TrafficRandom,
    TrafficWholeday,
    Image,
}

impl Preset {
    pub const ALL: [Preset; 3] = [Preset::TrafficRandom, Preset::TrafficWholeday, Preset::Image];

    pub fn name(self) -> &'static str {
        match self {
            Preset::TrafficRandom => "traffic-random",
            Preset::TrafficWholeday => "traffic-wholeday",
            Preset::Image => "image",
        }
    }

    pub fn omega(self) -> [f64; 3] {
        match self {
            Preset::TrafficRandom => [0.0, 1.0, 2e-3],
            Preset::TrafficWholeday => [0.0, 1.0, 1.0],
            Preset::Image => [1.0, 1.0, 0.0],
        }
    }
}

impl core::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(alloc::format!("unknown preset {:?}", s)))
    }
}

/// Every scalar of the model plus ranks, stopping rule and initialization.
///
/// Modes are 0-based: `ranks[0]` is the rank along the first tensor index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub ranks: [usize; 3],
    /// Nuclear-norm weights on the factors.
    pub alpha: [f64; 3],
    /// ℓ1 weight on the core.
    pub sigma: f64,
    /// Weight of the Tucker fit `‖⟦S;X⟧ − Z‖²/2`.
    pub lambda: f64,
    /// ADMM penalty.
    pub beta: f64,
    /// Smoothness weights.
    pub omega: [f64; 3],
    /// `true` selects the first-difference matrix on that mode, `false` the identity.
    pub toeplitz_modes: [bool; 3],
    pub tol: f64,
    pub max_iter: usize,
    pub stop_denominator: StopDenominator,
    pub init: Init,
    pub preset: Option<String>,
}

/// `ceil(I/4)` clamped to `[1, I]`.
pub fn default_ranks(dims: &[usize]) -> [usize; 3] {
    let mut r = [1; 3];
    for (ri, &d) in r.iter_mut().zip(dims) {
        *ri = d.div_ceil(4).clamp(1, d.max(1));
    }
    r
}

impl SolverConfig {
    /// Defaults for a tensor of the given dimensions: no smoothness term,
    /// `σ = 1`, `λ = 1e-2`, `β = 0.1`, equal nuclear weights.
    pub fn new(dims: &[usize]) -> Self {
        Self {
            ranks: default_ranks(dims),
            alpha: [1.0 / 3.0; 3],
            sigma: 1.0,
            lambda: 1e-2,
            beta: 0.1,
            omega: [0.0; 3],
            toeplitz_modes: [false; 3],
            tol: 1e-5,
            max_iter: 250,
            stop_denominator: StopDenominator::Blind,
            init: Init::Hosvd,
            preset: None,
        }
    }

    /// Preset parameters; the first-difference regularizer is enabled on every mode with `ω > 0`.
    pub fn preset(preset: Preset, dims: &[usize]) -> Self {
        let omega = preset.omega();
        Self {
            omega,
            toeplitz_modes: omega.map(|w| w > 0.0),
            preset: Some(preset.name().to_string()),
            ..Self::new(dims)
        }
    }

    pub fn validate(&self, dims: &[usize]) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if dims.len() != 3 {
            return bad(alloc::format!("the solver needs a third-order tensor, got order {}", dims.len()));
        }
        for (n, (&r, &d)) in self.ranks.iter().zip(dims).enumerate() {
            if r == 0 || r > d {
                return bad(alloc::format!("rank {} out of range 1..={} on mode {}", r, d, n));
            }
        }
        let nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !self.alpha.iter().all(|&a| nonneg(a)) {
            return bad(alloc::format!("alpha must be nonnegative, got {:?}", self.alpha));
        }
        if !self.omega.iter().all(|&w| nonneg(w)) {
            return bad(alloc::format!("omega must be nonnegative, got {:?}", self.omega));
        }
        if !nonneg(self.sigma) {
            return bad(alloc::format!("sigma must be nonnegative, got {}", self.sigma));
        }
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return bad(alloc::format!("lambda must be positive, got {}", self.lambda));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return bad(alloc::format!("beta must be positive, got {}", self.beta));
        }
        if !(self.tol > 0.0) {
            return bad(alloc::format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".to_string());
        }
        Ok(())
    }
}
