//! Prototype sparse PPM symbol synthesis and the trainer's input set.
//!
//! A PPM alphabet places one fixed pulse at each of `n_symbols` start
//! positions spaced `position_step` samples apart, inside a period of
//! `n_samples` Nyquist-rate samples. Adjacent pulses overlap in
//! `pulse_width - position_step` samples when the step is smaller than the
//! pulse. Every symbol is normalized to unit energy so that SNR bookkeeping
//! and distance thresholds are well defined.

use crate::error::{Error, Result};
use crate::linalg::norm_sq;
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Pulse waveform placed at each position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseShape {
    /// Truncated sinc (zero crossings every 8 samples) under a Hann window.
    TruncatedSincHann,
    /// Flat pulse, useful for tests with exactly representable energies.
    Rectangular,
}

/// Generation parameters for a PPM symbol set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpmParams {
    /// Samples per symbol period (N).
    pub n_samples: usize,
    /// Nonzero samples per pulse (k).
    pub pulse_width: usize,
    /// Alphabet size (P).
    pub n_symbols: usize,
    /// Samples between adjacent pulse start positions.
    pub position_step: usize,
    pub pulse_shape: PulseShape,
}

impl PpmParams {
    /// The N=876, k=100, P=32, step=25 sinc alphabet.
    pub fn sinc_876() -> Self {
        PpmParams {
            n_samples: 876,
            pulse_width: 100,
            n_symbols: 32,
            position_step: 25,
            pulse_shape: PulseShape::TruncatedSincHann,
        }
    }

    /// Overlap between adjacent pulses, in samples.
    pub fn overlap(&self) -> usize {
        self.pulse_width.saturating_sub(self.position_step)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_symbols < 1 {
            return Err(Error::ParameterInconsistency("n_symbols must be >= 1".into()));
        }
        if self.position_step < 1 {
            return Err(Error::ParameterInconsistency("position_step must be >= 1".into()));
        }
        if self.pulse_width > self.n_samples {
            return Err(Error::ParameterInconsistency(format!(
                "pulse_width {} exceeds n_samples {}",
                self.pulse_width, self.n_samples
            )));
        }
        let last_end = (self.n_symbols - 1) * self.position_step + self.pulse_width;
        if last_end > self.n_samples {
            return Err(Error::ParameterInconsistency(format!(
                "last pulse ends at {} but the symbol period is {} samples",
                last_end, self.n_samples
            )));
        }
        Ok(())
    }
}

/// One prototype symbol: a length-N sample vector, nonzero only on `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    /// 1-based symbol id.
    pub index: usize,
    pub samples: Vec<f64>,
    /// Half-open sample interval containing all nonzeros.
    pub support: Range<usize>,
}

impl Symbol {
    pub fn energy(&self) -> f64 {
        norm_sq(&self.samples)
    }
}

/// The full prototype alphabet plus its generation parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolSet {
    pub params: PpmParams,
    pub symbols: Vec<Symbol>,
}

impl SymbolSet {
    pub fn n_samples(&self) -> usize {
        self.params.n_samples
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Nominal per-symbol energy (all symbols share it by construction).
    pub fn symbol_energy(&self) -> f64 {
        self.symbols[0].energy()
    }
}

/// Trainer inputs: prototypes followed by all pairwise differences, each
/// paired with its exact squared norm as the desired output.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    pub vectors: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
}

impl TrainingSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Evaluate the pulse prototype on `0..width` samples, unit-energy normalized.
fn pulse_samples(shape: PulseShape, width: usize) -> Result<Vec<f64>> {
    let mut p: Vec<f64> = match shape {
        PulseShape::Rectangular => vec![1.0; width],
        PulseShape::TruncatedSincHann => {
            let center = (width as f64 - 1.0) / 2.0;
            (0..width)
                .map(|m| {
                    let t = (m as f64 - center) / 8.0;
                    let s = if t == 0.0 {
                        1.0
                    } else {
                        let pt = std::f64::consts::PI * t;
                        pt.sin() / pt
                    };
                    let hann = if width > 1 {
                        0.5 * (1.0
                            - (2.0 * std::f64::consts::PI * m as f64 / (width as f64 - 1.0)).cos())
                    } else {
                        1.0
                    };
                    s * hann
                })
                .collect()
        }
    };
    let norm = norm_sq(&p).sqrt();
    if norm == 0.0 {
        // a 2-sample Hann window is zero at both endpoints
        return Err(Error::ParameterInconsistency(format!(
            "pulse of width {width} has zero energy"
        )));
    }
    for v in &mut p {
        *v /= norm;
    }
    Ok(p)
}

/// Build the PPM alphabet. Symbol `i` (1-based) occupies
/// `[(i-1)*position_step, (i-1)*position_step + pulse_width)`; all symbols
/// are exact translates of the same unit-energy pulse.
pub fn generate_ppm_set(params: &PpmParams) -> Result<SymbolSet> {
    params.validate()?;
    let pulse = pulse_samples(params.pulse_shape, params.pulse_width)?;
    let symbols = (0..params.n_symbols)
        .map(|i| {
            let start = i * params.position_step;
            let mut samples = vec![0.0; params.n_samples];
            samples[start..start + params.pulse_width].copy_from_slice(&pulse);
            Symbol {
                index: i + 1,
                samples,
                support: start..start + params.pulse_width,
            }
        })
        .collect();
    Ok(SymbolSet {
        params: params.clone(),
        symbols,
    })
}

/// Prototypes first, then `s_i - s_j` for all `i < j` in lexicographic
/// order. With P prototypes this yields `L = P + P(P-1)/2` vectors.
pub fn build_training_set(set: &SymbolSet) -> TrainingSet {
    let p = set.symbols.len();
    let mut vectors = Vec::with_capacity(p + p * (p - 1) / 2);
    for s in &set.symbols {
        vectors.push(s.samples.clone());
    }
    for i in 0..p {
        for j in (i + 1)..p {
            let diff: Vec<f64> = set.symbols[i]
                .samples
                .iter()
                .zip(set.symbols[j].samples.iter())
                .map(|(a, b)| a - b)
                .collect();
            vectors.push(diff);
        }
    }
    let targets = vectors.iter().map(|v| norm_sq(v)).collect();
    TrainingSet { vectors, targets }
}
