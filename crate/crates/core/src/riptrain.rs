//! Sequential training of a norm-preserving measurement matrix.
//!
//! The trainer realizes a two-layer quadratic network whose first-layer
//! weights are the matrix being learned: for an input x the network output
//! is `||phi x||^2`, the desired output is `||x||^2`, and the second layer
//! is a fixed all-ones sum. Minimizing the squared output error by gradient
//! steps gives the rank-one update
//!
//! ```text
//! phi <- phi + mu * (||x||^2 - ||phi x||^2) * (phi x) x^T
//! ```
//!
//! applied once per training vector per epoch, in a fixed order. Training
//! stops when every vector's residual `| ||phi x||^2 - ||x||^2 |` is within
//! the configured threshold (absolute, or relative to `||x||^2`).
//!
//! A fixed pre-layer H (channel Toeplitz matrix or sparsifying dictionary)
//! may be composed in front of the trainable layer; x is then replaced by
//! `H x` in the update and the learned matrix preserves the norms of the
//! original, untransformed inputs.

use crate::error::{Error, Result};
use crate::linalg::{dist_sq, dot, norm_sq, DenseMatrix};
use crate::matrix::{MeasurementMatrix, Provenance};
use crate::seed;
use crate::symbols::{SymbolSet, TrainingSet};
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// How `residual_threshold` is compared against a vector's residual.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// Residual bound is an absolute constant.
    #[default]
    Absolute,
    /// Residual bound is `residual_threshold * ||x||^2`.
    Relative,
}

/// Hyperparameters of one training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Number of measurement rows (M).
    pub m_rows: usize,
    /// Step size of the rank-one update.
    pub step_size: f64,
    /// Per-vector residual bound; see `threshold_mode`.
    pub residual_threshold: f64,
    #[serde(default)]
    pub threshold_mode: ThresholdMode,
    /// Variance of the zero-mean Gaussian initial weights.
    pub init_variance: f64,
    pub max_epochs: usize,
    pub seed: u64,
    /// When true, each epoch presents the vectors in a seeded random order
    /// instead of index order.
    #[serde(default)]
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            m_rows: 32,
            step_size: 0.07,
            residual_threshold: 0.2,
            threshold_mode: ThresholdMode::Absolute,
            init_variance: 0.1,
            max_epochs: 5000,
            seed: 0,
            shuffle: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.step_size <= 0.0 || self.residual_threshold <= 0.0 || self.init_variance <= 0.0 {
            return Err(Error::ParameterInconsistency(
                "step_size, residual_threshold and init_variance must be positive".into(),
            ));
        }
        if self.max_epochs < 1 || self.m_rows < 1 {
            return Err(Error::ParameterInconsistency(
                "m_rows and max_epochs must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Convergence record of a training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs_run: usize,
    pub converged: bool,
    /// Worst residual over the training set after each epoch.
    pub max_residual_per_epoch: Vec<f64>,
    pub final_max_residual: f64,
}

/// M x N matrix with i.i.d. zero-mean Gaussian entries of the given
/// variance. Deterministic for a given seed.
pub fn init_matrix(m: usize, n: usize, variance: f64, seed: u64) -> MeasurementMatrix {
    let mut rng = seed::stream(seed, &[STREAM_INIT]);
    let normal = Normal::new(0.0, variance.sqrt()).expect("variance must be non-negative");
    let entries = (0..m * n).map(|_| normal.sample(&mut rng)).collect();
    MeasurementMatrix::from_entries(m, n, entries, Provenance::Trained)
}

const STREAM_INIT: u64 = 0x696e_6974; // "init"
const STREAM_ORDER: u64 = 0x6f72_6472; // "ordr"

/// `| ||phi' x||^2 - ||x||^2 |` with `phi' = phi * pre_layer`.
pub fn rip_residual(phi: &MeasurementMatrix, x: &[f64]) -> Result<f64> {
    let z = phi.pre_transform(x)?;
    let y = phi.apply(&z)?;
    Ok((norm_sq(&y) - norm_sq(x)).abs())
}

/// One rank-one update toward `||phi x||^2 = target`. The input matrix is
/// left untouched; the updated matrix is returned. When a pre-layer is
/// attached, x is replaced by `pre_layer * x` throughout.
pub fn sequential_update(
    phi: &MeasurementMatrix,
    x: &[f64],
    target: f64,
    mu: f64,
) -> Result<MeasurementMatrix> {
    let z = phi.pre_transform(x)?;
    let mut out = phi.clone();
    update_in_place(&mut out, &z, target, mu)?;
    if !out.is_finite() {
        return Err(Error::Diverged { epoch: 0 });
    }
    Ok(out)
}

/// The update kernel, on the pre-transformed vector z.
fn update_in_place(phi: &mut MeasurementMatrix, z: &[f64], target: f64, mu: f64) -> Result<()> {
    if z.len() != phi.cols() {
        return Err(Error::DimensionMismatch {
            expected: phi.cols(),
            got: z.len(),
            context: "sequential update",
        });
    }
    let n = phi.cols();
    let m = phi.rows();
    let mut v = vec![0.0; m];
    for (r, vr) in v.iter_mut().enumerate() {
        *vr = dot(phi.row(r), z);
    }
    let err = target - norm_sq(&v);
    if err == 0.0 {
        return Ok(());
    }
    let entries = phi.entries_mut();
    for (r, &vr) in v.iter().enumerate() {
        let c = mu * err * vr;
        if c == 0.0 {
            continue;
        }
        let row = &mut entries[r * n..(r + 1) * n];
        for (w, &zj) in row.iter_mut().zip(z.iter()) {
            *w += c * zj;
        }
    }
    Ok(())
}

/// Run sequential epochs over the training set until every residual is
/// within the threshold or `max_epochs` is reached. Each epoch applies one
/// update per vector (index order, or a seeded shuffle when configured) and
/// then evaluates all residuals. Non-finite entries abort with a diagnostic
/// identifying the epoch.
pub fn train(
    config: &TrainConfig,
    ts: &TrainingSet,
    pre_layer: Option<&DenseMatrix>,
) -> Result<(MeasurementMatrix, TrainLog)> {
    config.validate()?;
    if ts.is_empty() {
        return Err(Error::ParameterInconsistency("empty training set".into()));
    }
    let n = match pre_layer {
        Some(h) => h.rows(),
        None => ts.vectors[0].len(),
    };
    // Pre-transform the whole set once; the trainable layer only ever sees z = H x.
    let transformed: Vec<Vec<f64>> = match pre_layer {
        Some(h) => ts
            .vectors
            .iter()
            .map(|x| {
                if x.len() != h.cols() {
                    Err(Error::DimensionMismatch {
                        expected: h.cols(),
                        got: x.len(),
                        context: "pre-layer apply",
                    })
                } else {
                    Ok(h.matvec(x))
                }
            })
            .collect::<Result<_>>()?,
        None => ts.vectors.clone(),
    };
    for z in &transformed {
        if z.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: z.len(),
                context: "training vector length",
            });
        }
    }

    let mut phi = init_matrix(config.m_rows, n, config.init_variance, config.seed);
    let l = transformed.len();
    let mut order: Vec<usize> = (0..l).collect();
    let mut log = TrainLog {
        epochs_run: 0,
        converged: false,
        max_residual_per_epoch: Vec::new(),
        final_max_residual: f64::INFINITY,
    };

    for epoch in 1..=config.max_epochs {
        if config.shuffle {
            let mut rng = seed::stream(config.seed, &[STREAM_ORDER, epoch as u64]);
            order.shuffle(&mut rng);
        }
        for &t in &order {
            update_in_place(&mut phi, &transformed[t], ts.targets[t], config.step_size)?;
        }

        let mut max_residual = 0.0f64;
        let mut finite = true;
        for (z, &target) in transformed.iter().zip(ts.targets.iter()) {
            let y = phi.apply(z)?;
            let a = norm_sq(&y);
            if !a.is_finite() {
                finite = false;
                break;
            }
            let mut r = (a - target).abs();
            if config.threshold_mode == ThresholdMode::Relative {
                r /= target;
            }
            max_residual = max_residual.max(r);
        }
        if !finite || !phi.is_finite() {
            return Err(Error::Diverged { epoch });
        }

        log.epochs_run = epoch;
        log.max_residual_per_epoch.push(max_residual);
        log.final_max_residual = max_residual;
        if max_residual <= config.residual_threshold {
            log.converged = true;
            break;
        }
    }

    phi.fixed_pre_layer = pre_layer.cloned();
    Ok((phi, log))
}

/// One line of the isometry report.
#[derive(Debug, Clone, PartialEq)]
pub enum IsometryEntry {
    /// Distortion of a single prototype's norm:
    /// `(||phi' s_i||^2 - ||s_i||^2) / ||s_i||^2`.
    Symbol { i: usize, distortion: f64 },
    /// Distortion of a pairwise difference, i < j.
    Pair { i: usize, j: usize, distortion: f64 },
    /// The two prototypes coincide, so relative distortion is undefined.
    DegeneratePair { i: usize, j: usize },
}

/// Relative norm distortion of every prototype and every pairwise
/// difference under `phi' = phi * pre_layer`. Symbol entries come first,
/// then pairs in lexicographic order; indices are 1-based symbol ids.
pub fn pairwise_isometry_report(
    phi: &MeasurementMatrix,
    set: &SymbolSet,
) -> Result<Vec<IsometryEntry>> {
    let p = set.len();
    let mut report = Vec::with_capacity(p + p * (p - 1) / 2);
    let projected: Vec<Vec<f64>> = set
        .symbols
        .iter()
        .map(|s| {
            let z = phi.pre_transform(&s.samples)?;
            phi.apply(&z)
        })
        .collect::<Result<_>>()?;
    for (idx, s) in set.symbols.iter().enumerate() {
        let e = norm_sq(&s.samples);
        report.push(IsometryEntry::Symbol {
            i: s.index,
            distortion: (norm_sq(&projected[idx]) - e) / e,
        });
    }
    for i in 0..p {
        for j in (i + 1)..p {
            let d = dist_sq(&set.symbols[i].samples, &set.symbols[j].samples);
            if d == 0.0 {
                report.push(IsometryEntry::DegeneratePair {
                    i: set.symbols[i].index,
                    j: set.symbols[j].index,
                });
                continue;
            }
            let dm = dist_sq(&projected[i], &projected[j]);
            report.push(IsometryEntry::Pair {
                i: set.symbols[i].index,
                j: set.symbols[j].index,
                distortion: (dm - d) / d,
            });
        }
    }
    Ok(report)
}
