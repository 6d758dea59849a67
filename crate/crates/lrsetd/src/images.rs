//! Binary PPM (P6) and PGM (P5) images with 8-bit samples.
//!
//! An `H×W` image becomes an `H×W×C` tensor with `C = 3` for color and
//! `C = 1` for grayscale; entry `(i, j, c)` is channel `c` of row `i`,
//! column `j`, as a real in `[0, 255]`.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use image::codecs::pnm::{PnmDecoder, PnmEncoder, PnmSubtype, SampleEncoding};
use image::{ExtendedColorType, ImageDecoder, ImageEncoder};
use lrsetd_core::DenseTensor;

use crate::error::{CliError, Result};

pub fn read_image(path: &Path) -> Result<DenseTensor> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let bad = |m: String| CliError::format(path, m);
    let decoder = PnmDecoder::new(BufReader::new(file)).map_err(|e| bad(e.to_string()))?;
    let channels = match decoder.subtype() {
        PnmSubtype::Pixmap(SampleEncoding::Binary) => 3,
        PnmSubtype::Graymap(SampleEncoding::Binary) => 1,
        other => return Err(bad(format!("unsupported image type {:?}; expected binary P5 or P6", other))),
    };
    let maxval = decoder.header().maximal_sample();
    if maxval != 255 {
        return Err(bad(format!("unsupported maxval {maxval}; expected 255")));
    }
    let (w, h) = decoder.dimensions();
    let (w, h) = (w as usize, h as usize);
    let mut buf = vec![0u8; decoder.total_bytes() as usize];
    decoder.read_image(&mut buf).map_err(|e| bad(e.to_string()))?;
    let t = DenseTensor::from_fn(&[h, w, channels], |i| {
        f64::from(buf[(i[0] * w + i[1]) * channels + i[2]])
    })?;
    Ok(t)
}

/// Rounds half away from zero and clamps to `[0, 255]`.
pub fn to_byte(v: f64) -> u8 {
    if v.is_nan() {
        return 0;
    }
    v.round().clamp(0.0, 255.0) as u8
}

pub fn encode_image(t: &DenseTensor) -> std::result::Result<Vec<u8>, String> {
    let (h, w, c) = match t.dims() {
        [h, w, c] if *c == 1 || *c == 3 => (*h, *w, *c),
        [h, w] => (*h, *w, 1),
        dims => return Err(format!("cannot write a {dims:?} tensor as an image")),
    };
    let mut buf = vec![0u8; h * w * c];
    for i in 0..h {
        for j in 0..w {
            for k in 0..c {
                buf[(i * w + j) * c + k] = to_byte(t.data()[i + h * (j + w * k)]);
            }
        }
    }
    let (subtype, color) = if c == 3 {
        (PnmSubtype::Pixmap(SampleEncoding::Binary), ExtendedColorType::Rgb8)
    } else {
        (PnmSubtype::Graymap(SampleEncoding::Binary), ExtendedColorType::L8)
    };
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(subtype)
        .write_image(&buf, w as u32, h as u32, color)
        .map_err(|e| e.to_string())?;
    Ok(out)
}

pub fn write_image(path: &Path, t: &DenseTensor) -> Result<()> {
    let bytes = encode_image(t).map_err(|m| CliError::format(path, m))?;
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    use std::io::Write;
    let mut w = BufWriter::new(file);
    w.write_all(&bytes)
        .and_then(|_| w.flush())
        .map_err(|e| CliError::io(path, e))
}

/// Grayscale images of one size, stacked along the third mode in
/// lexicographic filename order. Only `*.pgm` files are read.
pub fn read_pgm_stack(dir: &Path) -> Result<DenseTensor> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::format(dir, "no .pgm files in directory"));
    }
    let frames = files.iter().map(|p| read_image(p)).collect::<Result<Vec<_>>>()?;
    let dims = frames[0].dims().to_vec();
    for (p, f) in files.iter().zip(&frames) {
        if f.dims() != dims.as_slice() || dims[2] != 1 {
            return Err(CliError::format(p, format!("frame dims {:?} differ from {:?}", f.dims(), dims)));
        }
    }
    let plane = dims[0] * dims[1];
    let mut data = Vec::with_capacity(plane * frames.len());
    for f in &frames {
        data.extend_from_slice(f.data());
    }
    Ok(DenseTensor::new(vec![dims[0], dims[1], frames.len()], data)?)
}
