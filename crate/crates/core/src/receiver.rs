//! The compressive receiver and its baselines.
//!
//! A received sample vector is projected through the measurement matrix and
//! classified by minimum distance against the projected prototype
//! constellation. The matched filter (rows equal to the prototypes, argmax
//! correlation) and a random Gaussian matrix serve as reference points.
//!
//! The pre-layer convention: the physical channel already convolves the
//! transmitted symbol, so `measure` applies only the measurement matrix to
//! the received vector, while `project_alphabet` passes the prototypes
//! through the pre-layer first to form the reference constellation.

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot};
use crate::matrix::{MeasurementMatrix, Provenance};
use crate::seed;
use crate::symbols::SymbolSet;
use rand_distr::{Distribution, Normal};

/// The prototype constellation in measurement space.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedAlphabet {
    pub matrix_id: Provenance,
    /// One length-M vector per prototype: `phi * (pre_layer * s_i)`.
    pub prototypes_m: Vec<Vec<f64>>,
}

/// Random Gaussian measurement matrix with entry variance `1/m`, so that
/// `E||phi x||^2 = ||x||^2`. Deterministic per seed.
pub fn gaussian_matrix(m: usize, n: usize, seed: u64) -> MeasurementMatrix {
    let mut rng = seed::stream(seed, &[STREAM_GAUSSIAN]);
    let normal = Normal::new(0.0, (1.0 / m as f64).sqrt()).expect("m >= 1");
    let entries = (0..m * n).map(|_| normal.sample(&mut rng)).collect();
    MeasurementMatrix::from_entries(m, n, entries, Provenance::Gaussian)
}

const STREAM_GAUSSIAN: u64 = 0x6761_7573; // "gaus"

/// The matched-filter feature selector: M = P rows, row i equal to
/// prototype s_i.
pub fn matched_filter_matrix(set: &SymbolSet) -> MeasurementMatrix {
    let n = set.n_samples();
    let mut entries = Vec::with_capacity(set.len() * n);
    for s in &set.symbols {
        entries.extend_from_slice(&s.samples);
    }
    MeasurementMatrix::from_entries(set.len(), n, entries, Provenance::MatchedFilter)
}

/// y = phi r. The pre-layer is not applied here: it models the channel or
/// dictionary already present in the received vector.
pub fn measure(phi: &MeasurementMatrix, r: &[f64]) -> Result<Vec<f64>> {
    phi.apply(r)
}

/// Project every prototype through `pre_layer` (when attached) and phi.
pub fn project_alphabet(phi: &MeasurementMatrix, set: &SymbolSet) -> Result<ProjectedAlphabet> {
    let prototypes_m = set
        .symbols
        .iter()
        .map(|s| {
            let z = phi.pre_transform(&s.samples)?;
            phi.apply(&z)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjectedAlphabet {
        matrix_id: phi.provenance,
        prototypes_m,
    })
}

/// Minimum-distance decision in measurement space. Returns the 1-based
/// symbol id; ties break to the lowest id.
pub fn classify_min_distance(y: &[f64], alphabet: &ProjectedAlphabet) -> Result<usize> {
    if alphabet.prototypes_m.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let mut best = 0usize;
    let mut best_d = f64::INFINITY;
    for (idx, proto) in alphabet.prototypes_m.iter().enumerate() {
        if proto.len() != y.len() {
            return Err(Error::DimensionMismatch {
                expected: proto.len(),
                got: y.len(),
                context: "min-distance classify",
            });
        }
        let d = dist_sq(y, proto);
        if d < best_d {
            best_d = d;
            best = idx;
        }
    }
    Ok(best + 1)
}

/// Matched-filter decision: argmax of the correlations with the prototypes.
/// Returns the 1-based symbol id; ties break to the lowest id.
pub fn matched_filter_classify(r: &[f64], set: &SymbolSet) -> Result<usize> {
    if set.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let mut best = 0usize;
    let mut best_c = f64::NEG_INFINITY;
    for (idx, s) in set.symbols.iter().enumerate() {
        if s.samples.len() != r.len() {
            return Err(Error::DimensionMismatch {
                expected: s.samples.len(),
                got: r.len(),
                context: "matched-filter classify",
            });
        }
        let c = dot(&s.samples, r);
        if c > best_c {
            best_c = c;
            best = idx;
        }
    }
    Ok(best + 1)
}
