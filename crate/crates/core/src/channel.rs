//! AWGN and banded-Toeplitz multipath channel simulation.
//!
//! SNR bookkeeping follows the convention that the noise energy over one
//! symbol period of N samples is `N * sigma^2`, so
//! `SNR = signal_energy / (N * sigma^2)`.

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::seed;
use crate::symbols::Symbol;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Per-trial channel description: noise level, optional multipath taps, and
/// the root seed of the noise streams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Per-sample noise standard deviation.
    pub sigma: f64,
    /// Multipath impulse response taps; `None` for a flat channel.
    pub impulse_response: Option<Vec<f64>>,
    pub seed: u64,
}

impl ChannelModel {
    pub fn awgn(sigma: f64, seed: u64) -> Self {
        ChannelModel {
            sigma,
            impulse_response: None,
            seed,
        }
    }
}

/// Noise standard deviation that realizes `snr_db` for the given signal
/// energy over `n` samples: `sigma = sqrt(E / (n * 10^(snr_db/10)))`.
pub fn sigma_for_snr_db(signal_energy: f64, n: usize, snr_db: f64) -> f64 {
    (signal_energy / (n as f64 * 10f64.powf(snr_db / 10.0))).sqrt()
}

/// s + n with n i.i.d. N(0, sigma^2). The noise is a deterministic function
/// of `(model.seed, trial_index)`.
pub fn apply_awgn(s: &[f64], model: &ChannelModel, trial_index: u64) -> Vec<f64> {
    if model.sigma == 0.0 {
        return s.to_vec();
    }
    let mut rng = seed::stream(model.seed, &[STREAM_NOISE, trial_index]);
    let normal = Normal::new(0.0, model.sigma).expect("sigma must be finite and non-negative");
    s.iter().map(|&v| v + normal.sample(&mut rng)).collect()
}

const STREAM_NOISE: u64 = 0x6e6f_6973; // "nois"

/// Banded lower-triangular Toeplitz matrix of the impulse response:
/// `H[i][j] = h[i-j]` for `0 <= i-j < len(h)`. Multiplying by H is linear
/// convolution truncated to the symbol length n.
pub fn toeplitz_matrix(h: &[f64], n: usize) -> Result<DenseMatrix> {
    if h.is_empty() {
        return Err(Error::EmptyImpulseResponse);
    }
    if h.len() > n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: h.len(),
            context: "impulse response longer than symbol",
        });
    }
    let mut m = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for (lag, &tap) in h.iter().enumerate() {
            if lag <= i {
                m.set(i, i - lag, tap);
            }
        }
    }
    Ok(m)
}

/// Linear convolution of `h` with `x`, truncated to `x.len()` samples.
/// Equals `toeplitz_matrix(h, n) * x` without materializing the matrix.
pub fn convolve_truncated(h: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut out = vec![0.0; n];
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (lag, &tap) in h.iter().enumerate() {
            if lag <= i {
                acc += tap * x[i - lag];
            }
        }
        *o = acc;
    }
    out
}

/// The channel front end: `H s + n` when taps are present, else `s + n`.
pub fn transmit(symbol: &Symbol, model: &ChannelModel, trial_index: u64) -> Vec<f64> {
    let clean = match &model.impulse_response {
        Some(h) => convolve_truncated(h, &symbol.samples),
        None => symbol.samples.clone(),
    };
    if model.sigma == 0.0 {
        clean
    } else {
        apply_awgn(&clean, model, trial_index)
    }
}
