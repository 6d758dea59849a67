//! Observation-pattern generators for random and structured missingness.
//!
//! Randomness comes from a ChaCha8 stream keyed by the spec seed, so a given
//! `(dims, spec)` pair yields the same mask on every platform.

use alloc::string::ToString;
use alloc::vec::Vec;

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{arg_err, Error, Result};
use crate::tensor::ObservationMask;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MissingKind {
    /// Uniform sampling of `ratio·∏dims` observed entries.
    Random,
    /// Drops every slice `i` along `mode` with `i mod k == phase`.
    DropEveryKthSlice,
    /// Drops slices `i` along `mode` with `(i mod period) ∈ [window_start, window_start + window_len)`.
    TimeWindow,
    /// Drops the listed slices along `mode`.
    WholeSlices,
    /// A structural drop (`params.structure`) plus random retention `ratio` on the rest.
    Composite,
}

/// Kind-specific parameters. Fields not used by a kind are ignored.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissingParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window_len: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slices: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub structure: Option<MissingKind>,
}

/// A missing-data scenario. Serializes to a flat JSON object
/// `{kind, mode, params, seed}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissingSpec {
    pub kind: MissingKind,
    #[serde(default)]
    pub mode: usize,
    #[serde(default)]
    pub params: MissingParams,
    #[serde(default)]
    pub seed: u64,
}

impl MissingSpec {
    pub fn random(ratio: f64, seed: u64) -> Self {
        Self {
            kind: MissingKind::Random,
            mode: 0,
            params: MissingParams {
                ratio: Some(ratio),
                ..Default::default()
            },
            seed,
        }
    }

    pub fn whole_slices(mode: usize, slices: Vec<usize>) -> Self {
        Self {
            kind: MissingKind::WholeSlices,
            mode,
            params: MissingParams {
                slices: Some(slices),
                ..Default::default()
            },
            seed: 0,
        }
    }

    pub fn drop_every_kth_slice(mode: usize, k: usize, phase: usize) -> Self {
        Self {
            kind: MissingKind::DropEveryKthSlice,
            mode,
            params: MissingParams {
                k: Some(k),
                phase: Some(phase),
                ..Default::default()
            },
            seed: 0,
        }
    }

    pub fn time_window(mode: usize, start: usize, len: usize, period: usize) -> Self {
        Self {
            kind: MissingKind::TimeWindow,
            mode,
            params: MissingParams {
                window_start: Some(start),
                window_len: Some(len),
                period: Some(period),
                ..Default::default()
            },
            seed: 0,
        }
    }

    /// Wraps a structural spec with random retention `ratio` on the remaining entries.
    pub fn composite(structure: MissingSpec, ratio: f64, seed: u64) -> Self {
        let mut params = structure.params;
        params.structure = Some(structure.kind);
        params.ratio = Some(ratio);
        Self {
            kind: MissingKind::Composite,
            mode: structure.mode,
            params,
            seed,
        }
    }

    pub fn to_mask(&self, dims: &[usize]) -> Result<ObservationMask> {
        structured_mask(dims, self)
    }
}

fn check_ratio(ratio: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&ratio) {
        return Err(arg_err!("sample ratio {} outside [0, 1]", ratio));
    }
    Ok(())
}

fn sample_count(ratio: f64, population: usize) -> usize {
    (libm::round(ratio * population as f64) as usize).min(population)
}

/// Uniformly samples exactly `round(ratio·∏dims)` observed entries.
pub fn random_mask(dims: &[usize], ratio: f64, seed: u64) -> Result<ObservationMask> {
    check_ratio(ratio)?;
    let total: usize = ObservationMask::empty(dims)?.total();
    let candidates: Vec<usize> = (0..total).collect();
    let picked = sample_from(&candidates, ratio, seed);
    ObservationMask::from_offsets(dims, picked)
}

fn sample_from(candidates: &[usize], ratio: f64, seed: u64) -> Vec<usize> {
    let count = sample_count(ratio, candidates.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    index::sample(&mut rng, candidates.len(), count)
        .into_iter()
        .map(|i| candidates[i])
        .collect()
}

/// Slice indices along `spec.mode` removed by a structural kind.
fn dropped_slices(extent: usize, kind: MissingKind, spec: &MissingSpec) -> Result<Vec<bool>> {
    let p = &spec.params;
    let mut dropped = alloc::vec![false; extent];
    match kind {
        MissingKind::DropEveryKthSlice => {
            let k = p.k.ok_or_else(|| arg_err!("drop_every_kth_slice needs k"))?;
            let phase = p.phase.unwrap_or(0);
            if k == 0 || phase >= k {
                return Err(arg_err!("invalid k={} phase={}", k, phase));
            }
            for (i, d) in dropped.iter_mut().enumerate() {
                *d = i % k == phase;
            }
        }
        MissingKind::TimeWindow => {
            let start = p.window_start.ok_or_else(|| arg_err!("time_window needs window_start"))?;
            let len = p.window_len.ok_or_else(|| arg_err!("time_window needs window_len"))?;
            let period = p.period.unwrap_or(extent);
            if period == 0 || start + len > period || period > extent {
                return Err(arg_err!(
                    "window [{}, {}) does not fit period {} on a mode of extent {}",
                    start,
                    start + len,
                    period,
                    extent
                ));
            }
            for (i, d) in dropped.iter_mut().enumerate() {
                let phase = i % period;
                *d = phase >= start && phase < start + len;
            }
        }
        MissingKind::WholeSlices => {
            let slices = p.slices.as_deref().unwrap_or(&[]);
            for &s in slices {
                if s >= extent {
                    return Err(arg_err!("slice {} out of range for extent {}", s, extent));
                }
                dropped[s] = true;
            }
        }
        MissingKind::Random | MissingKind::Composite => {
            return Err(arg_err!("{:?} is not a structural kind", kind));
        }
    }
    Ok(dropped)
}

/// Builds the observation mask for any [`MissingSpec`].
pub fn structured_mask(dims: &[usize], spec: &MissingSpec) -> Result<ObservationMask> {
    let empty = ObservationMask::empty(dims)?;
    if spec.kind == MissingKind::Random {
        let ratio = spec.params.ratio.ok_or_else(|| arg_err!("random mask needs ratio"))?;
        return random_mask(dims, ratio, spec.seed);
    }
    if spec.mode >= dims.len() {
        return Err(Error::ModeOutOfRange {
            mode: spec.mode,
            order: dims.len(),
        });
    }
    let (structure, ratio) = match spec.kind {
        MissingKind::Composite => {
            let s = spec
                .params
                .structure
                .ok_or_else(|| arg_err!("composite spec needs a structure kind"))?;
            let r = spec.params.ratio.ok_or_else(|| arg_err!("composite spec needs ratio"))?;
            check_ratio(r)?;
            (s, Some(r))
        }
        k => (k, None),
    };
    let dropped = dropped_slices(dims[spec.mode], structure, spec)?;
    let left: usize = dims[..spec.mode].iter().product();
    let extent = dims[spec.mode];
    let kept: Vec<usize> = (0..empty.total())
        .filter(|&o| !dropped[(o / left) % extent])
        .collect();
    let observed = match ratio {
        Some(r) => sample_from(&kept, r, spec.seed),
        None => kept,
    };
    ObservationMask::from_offsets(dims, observed)
}

impl core::str::FromStr for MissingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "random" => Self::Random,
            "drop_every_kth_slice" => Self::DropEveryKthSlice,
            "time_window" => Self::TimeWindow,
            "whole_slices" => Self::WholeSlices,
            "composite" => Self::Composite,
            other => return Err(Error::InvalidArgument(other.to_string())),
        })
    }
}
