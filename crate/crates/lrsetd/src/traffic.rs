//! Traffic matrices in CSV form and their third-order tensorizations.
//!
//! A traffic matrix has one row per origin–destination pair and one column
//! per time interval, with intervals in day-major order. Row order is taken
//! as given; for the OOT layout row `r` is the pair `(r mod n, r div n)` of
//! `(source, destination)` with `n` sources.

use std::path::Path;
use std::str::FromStr;

use lrsetd_core::{DenseMatrix, DenseTensor};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// How a traffic matrix is reshaped into a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Tensorization {
    None,
    /// `(pair, interval-of-day, day)`: entry `(o, t, d) = m(o, d·T + t)`.
    Otd { pairs: usize, intervals_per_day: usize, days: usize },
    /// `(source, destination, time)`: entry `(s, d, t) = m(d·n + s, t)`.
    Oot { sources: usize, destinations: usize, intervals: usize },
}

impl FromStr for Tensorization {
    type Err = String;

    /// Accepts `none`, `otd:P,T,D` and `oot:S,D,T`.
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("none") {
            return Ok(Self::None);
        }
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("tensorization {s:?} is not none, otd:P,T,D or oot:S,D,T"))?;
        let nums = rest
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|e| format!("{p:?}: {e}")))
            .collect::<std::result::Result<Vec<_>, _>>()?;
        let [a, b, c] = nums[..] else {
            return Err(format!("tensorization {s:?} needs three sizes"));
        };
        if a == 0 || b == 0 || c == 0 {
            return Err(format!("tensorization {s:?} has a zero size"));
        }
        match kind.to_ascii_lowercase().as_str() {
            "otd" => Ok(Self::Otd { pairs: a, intervals_per_day: b, days: c }),
            "oot" => Ok(Self::Oot { sources: a, destinations: b, intervals: c }),
            other => Err(format!("unknown tensorization {other:?}")),
        }
    }
}

impl std::fmt::Display for Tensorization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::None => write!(f, "none"),
            Self::Otd { pairs, intervals_per_day, days } => write!(f, "otd:{pairs},{intervals_per_day},{days}"),
            Self::Oot { sources, destinations, intervals } => write!(f, "oot:{sources},{destinations},{intervals}"),
        }
    }
}

impl TryFrom<String> for Tensorization {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Tensorization> for String {
    fn from(t: Tensorization) -> String {
        t.to_string()
    }
}

impl Tensorization {
    /// Matrix shape `(rows, cols)` this directive expects.
    pub fn matrix_shape(&self) -> Option<(usize, usize)> {
        match *self {
            Self::None => None,
            Self::Otd { pairs, intervals_per_day, days } => Some((pairs, intervals_per_day * days)),
            Self::Oot { sources, destinations, intervals } => Some((sources * destinations, intervals)),
        }
    }

    pub fn dims(&self) -> Option<[usize; 3]> {
        match *self {
            Self::None => None,
            Self::Otd { pairs, intervals_per_day, days } => Some([pairs, intervals_per_day, days]),
            Self::Oot { sources, destinations, intervals } => Some([sources, destinations, intervals]),
        }
    }

    /// `(row, col)` of the matrix entry stored at tensor index `i`.
    fn source(&self, i: &[usize]) -> (usize, usize) {
        match *self {
            Self::None => (i[0], i[1]),
            Self::Otd { intervals_per_day, .. } => (i[0], i[2] * intervals_per_day + i[1]),
            Self::Oot { sources, .. } => (i[1] * sources + i[0], i[2]),
        }
    }
}

pub fn tensorize(m: &DenseMatrix, directive: Tensorization) -> Result<DenseTensor> {
    let Some(dims) = directive.dims() else {
        return Ok(DenseTensor::new(vec![m.rows(), m.cols()], m.data().to_vec())?);
    };
    let shape = directive.matrix_shape().unwrap();
    if (m.rows(), m.cols()) != shape {
        return Err(CliError::Config(format!(
            "{}x{} matrix does not match {directive} (needs {}x{})",
            m.rows(),
            m.cols(),
            shape.0,
            shape.1
        )));
    }
    Ok(DenseTensor::from_fn(&dims, |i| {
        let (r, c) = directive.source(i);
        m.get(r, c)
    })?)
}

/// Inverse of [`tensorize`].
pub fn flatten(t: &DenseTensor, directive: Tensorization) -> Result<DenseMatrix> {
    let Some(dims) = directive.dims() else {
        return match t.dims() {
            [r, c] => Ok(DenseMatrix::new(*r, *c, t.data().to_vec())?),
            d => Err(CliError::Config(format!("cannot flatten a {d:?} tensor without a directive"))),
        };
    };
    if t.dims() != dims {
        return Err(CliError::Config(format!("tensor dims {:?} do not match {directive}", t.dims())));
    }
    let (rows, cols) = directive.matrix_shape().unwrap();
    let mut m = DenseMatrix::zeros(rows, cols);
    for (o, &v) in t.data().iter().enumerate() {
        let i = [o % dims[0], (o / dims[0]) % dims[1], o / (dims[0] * dims[1])];
        let (r, c) = directive.source(&i);
        m.set(r, c, v);
    }
    Ok(m)
}

/// Reads a headerless rectangular CSV of reals.
pub fn read_traffic_csv(path: &Path) -> Result<DenseMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let row = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| CliError::format(path, format!("row {}: non-numeric field {f:?}", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(CliError::format(path, "empty CSV"));
    }
    let cols = rows[0].len();
    Ok(DenseMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    if e.is_io_error() {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::io(path, io),
            _ => unreachable!(),
        }
    } else {
        CliError::format(path, e.to_string())
    }
}

pub fn write_traffic_csv(path: &Path, m: &DenseMatrix) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    for i in 0..m.rows() {
        w.write_record(m.row(i).iter().map(|v| v.to_string()))
            .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
