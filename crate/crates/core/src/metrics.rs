//! Recovery-quality metrics over the unobserved entries.

use serde::{Deserialize, Serialize};

use crate::error::{shape_err, Error, Result};
use crate::tensor::{DenseTensor, ObservationMask};

fn check(truth: &DenseTensor, recovered: &DenseTensor, mask: &ObservationMask) -> Result<()> {
    if truth.dims() != recovered.dims() || truth.dims() != mask.dims() {
        return Err(shape_err!(
            "truth {:?}, recovered {:?}, mask {:?}",
            truth.dims(),
            recovered.dims(),
            mask.dims()
        ));
    }
    Ok(())
}

/// Iterates `(truth, recovered)` pairs over the complement of the mask.
fn complement<'a>(
    truth: &'a DenseTensor,
    recovered: &'a DenseTensor,
    mask: &'a ObservationMask,
) -> impl Iterator<Item = (f64, f64)> + 'a {
    let observed = mask.linear_indices();
    let mut next = 0;
    truth
        .data()
        .iter()
        .zip(recovered.data())
        .enumerate()
        .filter_map(move |(o, (t, r))| {
            if next < observed.len() && observed[next] == o {
                next += 1;
                None
            } else {
                Some((*t, *r))
            }
        })
}

/// Normalized mean absolute error over the unobserved entries.
pub fn nmae(truth: &DenseTensor, recovered: &DenseTensor, mask: &ObservationMask) -> Result<f64> {
    check(truth, recovered, mask)?;
    if mask.complement_len() == 0 {
        return Err(Error::InvalidArgument("NMAE with no missing entries".into()));
    }
    let (num, den) = complement(truth, recovered, mask)
        .fold((0.0, 0.0), |(n, d), (t, r)| (n + (t - r).abs(), d + t.abs()));
    if den == 0.0 {
        return Err(Error::InvalidArgument("NMAE with all-zero truth on the missing entries".into()));
    }
    Ok(num / den)
}

/// Which entries enter the squared-error sum of [`psnr`]. The divisor is `|Ωᶜ|` in both cases.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsnrScope {
    #[default]
    Complement,
    Full,
}

/// `10·log10(peak² / (SSE / |Ωᶜ|))` in dB; `+∞` for zero error.
///
/// `peak` defaults to the maximum entry of `truth`.
pub fn psnr(
    truth: &DenseTensor,
    recovered: &DenseTensor,
    mask: &ObservationMask,
    peak: Option<f64>,
    scope: PsnrScope,
) -> Result<f64> {
    check(truth, recovered, mask)?;
    let missing = mask.complement_len();
    if missing == 0 {
        return Err(Error::InvalidArgument("PSNR with no missing entries".into()));
    }
    let peak = peak.unwrap_or_else(|| truth.data().iter().copied().fold(f64::NEG_INFINITY, f64::max));
    let sse: f64 = match scope {
        PsnrScope::Complement => complement(truth, recovered, mask).map(|(t, r)| (t - r) * (t - r)).sum(),
        PsnrScope::Full => {
            let d = recovered.sub(truth)?.frobenius();
            d * d
        }
    };
    if sse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * libm::log10(peak * peak / (sse / missing as f64)))
}

/// Relative error `‖recovered − truth‖ / ‖truth‖` over the whole tensor.
pub fn rse(truth: &DenseTensor, recovered: &DenseTensor) -> Result<f64> {
    let den = truth.frobenius();
    if den == 0.0 {
        return Err(Error::InvalidArgument("RSE against an all-zero truth".into()));
    }
    Ok(recovered.sub(truth)?.frobenius() / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn t(data: &[f64]) -> DenseTensor {
        DenseTensor::new(vec![data.len()], data.to_vec()).unwrap()
    }

    #[test]
    fn nmae_examples() {
        let mask = ObservationMask::from_offsets(&[4], vec![0, 3]).unwrap();
        let truth = t(&[9.0, 2.0, -2.0, 5.0]);
        assert_eq!(nmae(&truth, &truth, &mask).unwrap(), 0.0);
        assert_eq!(nmae(&truth, &t(&[9.0, 1.0, -1.0, 5.0]), &mask).unwrap(), 0.5);
        let ones = t(&[0.0, 1.0, 1.0, 0.0]);
        assert_eq!(nmae(&ones, &t(&[0.0; 4]), &mask).unwrap(), 1.0);
        let full = ObservationMask::full(&[4]).unwrap();
        assert!(nmae(&truth, &truth, &full).is_err());
        assert!(nmae(&t(&[1.0, 0.0, 0.0, 1.0]), &truth, &mask).is_err());
    }

    #[test]
    fn psnr_examples() {
        let mask = ObservationMask::from_offsets(&[4], vec![0]).unwrap();
        let truth = t(&[255.0, 10.0, 20.0, 30.0]);
        assert_eq!(psnr(&truth, &truth, &mask, None, PsnrScope::Complement).unwrap(), f64::INFINITY);
        let off = t(&[255.0, 265.0, 275.0, 285.0]);
        assert!(psnr(&truth, &off, &mask, None, PsnrScope::Complement).unwrap().abs() < 1e-12);
        // mean squared complement error 255²/100 → 20 dB
        let e = 25.5;
        let rec = t(&[255.0, 10.0 + e, 20.0 - e, 30.0 + e]);
        let p = psnr(&truth, &rec, &mask, Some(255.0), PsnrScope::Complement).unwrap();
        assert!((p - 20.0).abs() < 1e-10);
        let full = ObservationMask::full(&[4]).unwrap();
        assert!(psnr(&truth, &rec, &full, None, PsnrScope::Complement).is_err());
    }

    #[test]
    fn psnr_scopes_agree_when_observed_entries_match() {
        let mask = ObservationMask::from_offsets(&[4], vec![1]).unwrap();
        let truth = t(&[1.0, 2.0, 3.0, 4.0]);
        let rec = t(&[1.5, 2.0, 2.0, 4.5]);
        let a = psnr(&truth, &rec, &mask, None, PsnrScope::Complement).unwrap();
        let b = psnr(&truth, &rec, &mask, None, PsnrScope::Full).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn rse_examples() {
        let truth = t(&[3.0, -4.0]);
        assert_eq!(rse(&truth, &truth).unwrap(), 0.0);
        assert_eq!(rse(&truth, &t(&[0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(rse(&truth, &truth.scale(2.0)).unwrap(), 1.0);
        assert!(rse(&t(&[0.0, 0.0]), &truth).is_err());
    }
}
