//! Binary tensor files.
//!
//! Layout: the magic bytes `LRT1`, the order `N` as a little-endian `u32`,
//! `N` dimensions as little-endian `u64`, then `∏dims` little-endian `f64`
//! values with the first index varying fastest.

use std::path::Path;

use lrsetd_core::{DenseTensor, ObservationMask};

use crate::error::{CliError, Result};

pub const MAGIC: &[u8; 4] = b"LRT1";

pub fn encode_tensor(t: &DenseTensor) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + 8 * t.order() + 8 * t.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(t.order() as u32).to_le_bytes());
    for &d in t.dims() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

fn take<'a>(bytes: &mut &'a [u8], n: usize, what: &str) -> std::result::Result<&'a [u8], String> {
    if bytes.len() < n {
        return Err(format!("truncated {what}"));
    }
    let (head, tail) = bytes.split_at(n);
    *bytes = tail;
    Ok(head)
}

pub fn decode_tensor(mut bytes: &[u8]) -> std::result::Result<DenseTensor, String> {
    if take(&mut bytes, 4, "header")? != MAGIC {
        return Err("bad magic, expected LRT1".into());
    }
    let order = u32::from_le_bytes(take(&mut bytes, 4, "header")?.try_into().unwrap()) as usize;
    if order == 0 {
        return Err("tensor order must be at least 1".into());
    }
    let mut dims = Vec::with_capacity(order.min(64));
    let mut len: usize = 1;
    for _ in 0..order {
        let d = u64::from_le_bytes(take(&mut bytes, 8, "header")?.try_into().unwrap());
        let d = usize::try_from(d).map_err(|_| "dimension overflows usize".to_string())?;
        len = len
            .checked_mul(d)
            .filter(|l| l.checked_mul(8).is_some())
            .ok_or("dimensions overflow")?;
        dims.push(d);
    }
    if bytes.len() < 8 * len {
        return Err(format!("truncated payload: {} of {} values", bytes.len() / 8, len));
    }
    if bytes.len() > 8 * len {
        return Err(format!("{} trailing bytes after payload", bytes.len() - 8 * len));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    DenseTensor::new(dims, data).map_err(|e| e.to_string())
}

pub fn write_tensor(path: &Path, t: &DenseTensor) -> Result<()> {
    std::fs::write(path, encode_tensor(t)).map_err(|e| CliError::io(path, e))
}

pub fn read_tensor(path: &Path) -> Result<DenseTensor> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    decode_tensor(&bytes).map_err(|m| CliError::format(path, m))
}

/// Masks are stored as tensor files of 0/1 values.
pub fn write_mask(path: &Path, mask: &ObservationMask) -> Result<()> {
    let data = mask.dense().into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
    write_tensor(path, &DenseTensor::new(mask.dims().to_vec(), data)?)
}

pub fn read_mask(path: &Path) -> Result<ObservationMask> {
    let t = read_tensor(path)?;
    let mut dense = Vec::with_capacity(t.len());
    for &v in t.data() {
        dense.push(match v {
            0.0 => false,
            1.0 => true,
            other => return Err(CliError::format(path, format!("mask value {other} is not 0 or 1"))),
        });
    }
    Ok(ObservationMask::from_dense(t.dims(), &dense)?)
}
