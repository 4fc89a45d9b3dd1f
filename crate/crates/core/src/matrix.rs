//! The measurement matrix and its provenance.

use crate::error::{Error, Result};
use crate::linalg::{dot, DenseMatrix};
use serde::{Deserialize, Serialize};
use std::fmt;

/// How a measurement matrix was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Trained,
    Gaussian,
    MatchedFilter,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Provenance::Trained => "trained",
            Provenance::Gaussian => "gaussian",
            Provenance::MatchedFilter => "matched-filter",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trained" => Ok(Provenance::Trained),
            "gaussian" => Ok(Provenance::Gaussian),
            "matched-filter" => Ok(Provenance::MatchedFilter),
            other => Err(Error::Format(format!("unknown provenance `{other}`"))),
        }
    }
}

/// An M x N real measurement matrix, optionally composed with a fixed N x N
/// pre-layer (channel or sparsifying dictionary). The pre-layer acts first:
/// the effective map is `phi * pre_layer`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
    pub provenance: Provenance,
    pub fixed_pre_layer: Option<DenseMatrix>,
}

impl MeasurementMatrix {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<f64>, provenance: Provenance) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count must be rows*cols");
        MeasurementMatrix {
            rows,
            cols,
            entries,
            provenance,
            fixed_pre_layer: None,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [f64] {
        &mut self.entries
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.entries[m * self.cols..(m + 1) * self.cols]
    }

    /// y = phi x, without the pre-layer.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch {
                expected: self.cols,
                got: x.len(),
                context: "matrix apply",
            });
        }
        Ok((0..self.rows).map(|m| dot(self.row(m), x)).collect())
    }

    /// x transformed by the pre-layer when one is attached.
    pub fn pre_transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.fixed_pre_layer {
            None => Ok(x.to_vec()),
            Some(h) => {
                if x.len() != h.cols() {
                    return Err(Error::DimensionMismatch {
                        expected: h.cols(),
                        got: x.len(),
                        context: "pre-layer apply",
                    });
                }
                Ok(h.matvec(x))
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_checks_dimensions() {
        let m = MeasurementMatrix::from_entries(2, 3, vec![0.0; 6], Provenance::Gaussian);
        assert!(m.apply(&[1.0, 2.0]).is_err());
        assert_eq!(m.apply(&[1.0, 2.0, 3.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn provenance_round_trips_through_strings() {
        for p in [Provenance::Trained, Provenance::Gaussian, Provenance::MatchedFilter] {
            let s = p.to_string();
            assert_eq!(s.parse::<Provenance>().unwrap(), p);
        }
        assert!("bogus".parse::<Provenance>().is_err());
    }
}
