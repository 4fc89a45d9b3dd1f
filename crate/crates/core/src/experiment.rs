//! Monte Carlo error-rate estimation and the full method-comparison sweep.
//!
//! Every random quantity is drawn from a stream derived by a counter-based
//! split of the master seed over (method, run, SNR, trial), so a sweep is
//! bit-reproducible no matter how many worker threads execute it. Error
//! counts are integers and aggregation walks the grid in fixed key order.

use crate::channel::{sigma_for_snr_db, toeplitz_matrix, transmit, ChannelModel};
use crate::error::{Error, Result};
use crate::matrix::MeasurementMatrix;
use crate::receiver::{
    classify_min_distance, gaussian_matrix, matched_filter_classify, matched_filter_matrix,
    measure, project_alphabet, ProjectedAlphabet,
};
use crate::riptrain::{train, TrainConfig};
use crate::seed;
use crate::symbols::{build_training_set, generate_ppm_set, PpmParams, SymbolSet};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{BufRead, Write};

/// How decisions are made from a received vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecisionRule {
    /// Project through the matrix, then minimum distance to the projected
    /// prototypes.
    MinDistance,
    /// Argmax correlation with the raw prototypes (the matched filter).
    MaxCorrelation,
}

/// One receiver under test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum MethodSpec {
    /// Matrix learned by the sequential trainer; `train_runs` independent
    /// matrices are trained and their error rates averaged.
    Trained { m_rows: usize, train: TrainConfig },
    /// Random Gaussian matrix baseline (one matrix per sweep).
    Gaussian { m_rows: usize },
    /// Matched filter: M = P rows equal to the prototypes, argmax decision.
    MatchedFilter,
}

impl MethodSpec {
    fn name(&self) -> &'static str {
        match self {
            MethodSpec::Trained { .. } => "trained",
            MethodSpec::Gaussian { .. } => "gaussian",
            MethodSpec::MatchedFilter => "matched-filter",
        }
    }
}

fn default_snr_grid() -> Vec<f64> {
    (-16..=0).map(|v| v as f64).collect()
}

fn default_trials() -> usize {
    20_000
}

fn default_train_runs() -> usize {
    10
}

/// Full sweep description. Serializable as the `sweep` subcommand's JSON
/// config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub symbols: PpmParams,
    pub methods: Vec<MethodSpec>,
    #[serde(default = "default_snr_grid")]
    pub snr_grid_db: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials_per_point: usize,
    /// Number of independently trained matrices per trained method (R).
    #[serde(default = "default_train_runs")]
    pub train_runs: usize,
    /// Multipath taps applied to every transmission; trained methods learn
    /// through the matching Toeplitz pre-layer.
    #[serde(default)]
    pub taps: Option<Vec<f64>>,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials_per_point < 1 || self.train_runs < 1 {
            return Err(Error::ParameterInconsistency(
                "trials_per_point and train_runs must be at least 1".into(),
            ));
        }
        if self.snr_grid_db.is_empty() {
            return Err(Error::ParameterInconsistency("empty SNR grid".into()));
        }
        self.symbols.validate()
    }
}

/// Outcome of one Monte Carlo estimation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialStats {
    pub errors: u64,
    pub trials: u64,
    pub p_err: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
}

/// One grid point of the sweep output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub method: String,
    pub m_rows: usize,
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub p_err: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    /// Sample variance of per-run error probabilities (0 when a single
    /// matrix was used).
    pub run_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub rows: Vec<CurveRow>,
}

impl ErrorCurve {
    pub fn find(&self, method: &str, m_rows: usize, snr_db: f64) -> Option<&CurveRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.m_rows == m_rows && r.snr_db == snr_db)
    }
}

/// 95% Wilson score interval for `errors` successes in `trials` draws.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // widen to the boundary estimates so the interval always brackets p
    let lo = (center - half).max(0.0).min(p);
    let hi = (center + half).min(1.0).max(p);
    (lo, hi)
}

const STREAM_PICK: u64 = 0x7069_636b; // "pick"
const STREAM_TRAIN: u64 = 0x7472_6169; // "trai"
const STREAM_MATRIX: u64 = 0x6d61_7472; // "matr"
const STREAM_TRIAL: u64 = 0x7472_6c73; // "trls"

/// Monte Carlo error probability of one matrix at one noise level: per
/// trial, pick a true symbol uniformly, transmit it through the channel,
/// measure and classify. Deterministic per `(model.seed, trial index)` and
/// independent of how trials are scheduled.
pub fn estimate_error_probability(
    set: &SymbolSet,
    alphabet: &ProjectedAlphabet,
    phi: &MeasurementMatrix,
    rule: DecisionRule,
    model: &ChannelModel,
    trials: usize,
) -> Result<TrialStats> {
    let p = set.len();
    let errors: u64 = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut pick = seed::stream(model.seed, &[STREAM_PICK, t]);
            let true_idx = pick.gen_range(0..p); // 0-based
            let r = transmit(&set.symbols[true_idx], model, t);
            let decided = match rule {
                DecisionRule::MinDistance => {
                    let y = measure(phi, &r).expect("dimensions fixed by caller");
                    classify_min_distance(&y, alphabet).expect("nonempty alphabet")
                }
                DecisionRule::MaxCorrelation => {
                    matched_filter_classify(&r, set).expect("nonempty alphabet")
                }
            };
            u64::from(decided != true_idx + 1)
        })
        .sum();
    let (lo, hi) = wilson_interval(errors, trials as u64);
    Ok(TrialStats {
        errors,
        trials: trials as u64,
        p_err: errors as f64 / trials as f64,
        ci95_low: lo,
        ci95_high: hi,
    })
}

struct PreparedMethod {
    name: String,
    m_rows: usize,
    rule: DecisionRule,
    /// One entry per run: the matrix and its projected constellation.
    runs: Vec<(MeasurementMatrix, ProjectedAlphabet)>,
}

/// Run the full protocol: train per-method matrices, sweep the SNR grid,
/// and average error rates across training runs. Output rows follow the
/// config's method order, then the grid order. Bit-reproducible for a fixed
/// master seed regardless of worker parallelism.
pub fn run_sweep(config: &ExperimentConfig) -> Result<ErrorCurve> {
    config.validate()?;
    let set = generate_ppm_set(&config.symbols)?;
    let energy = set.symbol_energy();
    let n = set.n_samples();
    let pre_layer = match &config.taps {
        Some(h) => Some(toeplitz_matrix(h, n)?),
        None => None,
    };
    let needs_training = config
        .methods
        .iter()
        .any(|m| matches!(m, MethodSpec::Trained { .. }));
    let ts = if needs_training {
        Some(build_training_set(&set))
    } else {
        None
    };

    // Train every (trained method, run) pair; the independent runs go wide.
    let mut train_jobs: Vec<(usize, usize, TrainConfig)> = Vec::new();
    for (mi, method) in config.methods.iter().enumerate() {
        if let MethodSpec::Trained { m_rows, train: tc } = method {
            for run in 0..config.train_runs {
                let mut tc = tc.clone();
                tc.m_rows = *m_rows;
                tc.seed = seed::derive(config.master_seed, &[STREAM_TRAIN, mi as u64, run as u64]);
                train_jobs.push((mi, run, tc));
            }
        }
    }
    let trained: Vec<((usize, usize), MeasurementMatrix)> = train_jobs
        .par_iter()
        .map(|(mi, run, tc)| {
            let ts = ts.as_ref().expect("training set exists");
            let (phi, _log) = train(tc, ts, pre_layer.as_ref()).map_err(|e| match e {
                Error::Diverged { epoch } => Error::ParameterInconsistency(format!(
                    "training diverged at epoch {epoch} (method index {mi}, run {run})"
                )),
                other => other,
            })?;
            Ok(((*mi, *run), phi))
        })
        .collect::<Result<_>>()?;

    let mut methods = Vec::with_capacity(config.methods.len());
    for (mi, method) in config.methods.iter().enumerate() {
        let prepared = match method {
            MethodSpec::Trained { m_rows, .. } => {
                let runs = trained
                    .iter()
                    .filter(|((i, _), _)| *i == mi)
                    .map(|(_, phi)| {
                        let alphabet = project_alphabet(phi, &set)?;
                        Ok((phi.clone(), alphabet))
                    })
                    .collect::<Result<Vec<_>>>()?;
                PreparedMethod {
                    name: method.name().to_string(),
                    m_rows: *m_rows,
                    rule: DecisionRule::MinDistance,
                    runs,
                }
            }
            MethodSpec::Gaussian { m_rows } => {
                let mut phi = gaussian_matrix(
                    *m_rows,
                    n,
                    seed::derive(config.master_seed, &[STREAM_MATRIX, mi as u64]),
                );
                // the receiver references the channel-convolved prototypes
                phi.fixed_pre_layer = pre_layer.clone();
                let alphabet = project_alphabet(&phi, &set)?;
                PreparedMethod {
                    name: method.name().to_string(),
                    m_rows: *m_rows,
                    rule: DecisionRule::MinDistance,
                    runs: vec![(phi, alphabet)],
                }
            }
            // The matched filter keeps its raw correlators: no equalizer.
            MethodSpec::MatchedFilter => {
                let phi = matched_filter_matrix(&set);
                let alphabet = project_alphabet(&phi, &set)?;
                PreparedMethod {
                    name: method.name().to_string(),
                    m_rows: set.len(),
                    rule: DecisionRule::MaxCorrelation,
                    runs: vec![(phi, alphabet)],
                }
            }
        };
        methods.push(prepared);
    }

    // Every (method, run, snr) cell is an independent integer error count.
    let mut cells: Vec<(usize, usize, usize)> = Vec::new();
    for (mi, m) in methods.iter().enumerate() {
        for run in 0..m.runs.len() {
            for si in 0..config.snr_grid_db.len() {
                cells.push((mi, run, si));
            }
        }
    }
    let counts: Vec<TrialStats> = cells
        .par_iter()
        .map(|&(mi, run, si)| {
            let m = &methods[mi];
            let (phi, alphabet) = &m.runs[run];
            let model = ChannelModel {
                sigma: sigma_for_snr_db(energy, n, config.snr_grid_db[si]),
                impulse_response: config.taps.clone(),
                seed: seed::derive(
                    config.master_seed,
                    &[STREAM_TRIAL, mi as u64, run as u64, si as u64],
                ),
            };
            estimate_error_probability(&set, alphabet, phi, m.rule, &model, config.trials_per_point)
        })
        .collect::<Result<_>>()?;
    let stat = |mi: usize, run: usize, si: usize| -> &TrialStats {
        let pos = cells
            .iter()
            .position(|&c| c == (mi, run, si))
            .expect("cell exists");
        &counts[pos]
    };

    let mut rows = Vec::new();
    for (mi, m) in methods.iter().enumerate() {
        for (si, &snr_db) in config.snr_grid_db.iter().enumerate() {
            let per_run: Vec<&TrialStats> =
                (0..m.runs.len()).map(|run| stat(mi, run, si)).collect();
            let errors: u64 = per_run.iter().map(|s| s.errors).sum();
            let trials: u64 = per_run.iter().map(|s| s.trials).sum();
            let p_err = errors as f64 / trials as f64;
            let (lo, hi) = wilson_interval(errors, trials);
            let run_variance = if per_run.len() > 1 {
                let mean =
                    per_run.iter().map(|s| s.p_err).sum::<f64>() / per_run.len() as f64;
                per_run
                    .iter()
                    .map(|s| (s.p_err - mean) * (s.p_err - mean))
                    .sum::<f64>()
                    / (per_run.len() - 1) as f64
            } else {
                0.0
            };
            rows.push(CurveRow {
                method: m.name.clone(),
                m_rows: m.m_rows,
                snr_db,
                trials,
                errors,
                p_err,
                ci95_low: lo,
                ci95_high: hi,
                run_variance,
            });
        }
    }
    Ok(ErrorCurve { rows })
}

pub const CURVE_HEADER: &str = "method,M,snr_db,trials,errors,p_err,ci95_low,ci95_high,run_variance";

/// Write the curve as CSV. Floats use the shortest round-trip formatting,
/// so export -> import -> export reproduces the file byte for byte.
pub fn export_csv<W: Write>(curve: &ErrorCurve, mut out: W) -> Result<()> {
    writeln!(out, "{CURVE_HEADER}")?;
    for r in &curve.rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.method,
            r.m_rows,
            r.snr_db,
            r.trials,
            r.errors,
            r.p_err,
            r.ci95_low,
            r.ci95_high,
            r.run_variance
        )?;
    }
    Ok(())
}

pub fn export_csv_path(curve: &ErrorCurve, path: &std::path::Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    export_csv(curve, std::io::BufWriter::new(file))
}

pub fn import_csv<R: BufRead>(input: R) -> Result<ErrorCurve> {
    let mut lines = input.lines();
    match lines.next().transpose()? {
        Some(h) if h == CURVE_HEADER => {}
        _ => return Err(Error::Format("missing or wrong curve header".into())),
    }
    let mut rows = Vec::new();
    for line in lines {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(Error::Format(format!("expected 9 fields, got {}", f.len())));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| Error::Format(format!("bad float `{s}`")))
        };
        let parse_u = |s: &str| -> Result<u64> {
            s.parse()
                .map_err(|_| Error::Format(format!("bad integer `{s}`")))
        };
        rows.push(CurveRow {
            method: f[0].to_string(),
            m_rows: parse_u(f[1])? as usize,
            snr_db: parse_f(f[2])?,
            trials: parse_u(f[3])?,
            errors: parse_u(f[4])?,
            p_err: parse_f(f[5])?,
            ci95_low: parse_f(f[6])?,
            ci95_high: parse_f(f[7])?,
            run_variance: parse_f(f[8])?,
        });
    }
    Ok(ErrorCurve { rows })
}

pub fn import_csv_path(path: &std::path::Path) -> Result<ErrorCurve> {
    let file = std::fs::File::open(path)?;
    import_csv(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::PulseShape;

    fn tiny_params() -> PpmParams {
        PpmParams {
            n_samples: 32,
            pulse_width: 8,
            n_symbols: 4,
            position_step: 8,
            pulse_shape: PulseShape::Rectangular,
        }
    }

    #[test]
    fn wilson_brackets_the_estimate() {
        for (e, n) in [(0u64, 100u64), (1, 100), (50, 100), (100, 100), (3, 20000)] {
            let (lo, hi) = wilson_interval(e, n);
            let p = e as f64 / n as f64;
            assert!(lo <= p && p <= hi, "({e},{n}): [{lo},{hi}] vs {p}");
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn noiseless_trials_make_no_errors() {
        let set = generate_ppm_set(&tiny_params()).unwrap();
        let phi = gaussian_matrix(4, 32, 8);
        let alphabet = project_alphabet(&phi, &set).unwrap();
        let model = ChannelModel::awgn(0.0, 1);
        let stats = estimate_error_probability(
            &set,
            &alphabet,
            &phi,
            DecisionRule::MinDistance,
            &model,
            500,
        )
        .unwrap();
        assert_eq!(stats.errors, 0);
        assert_eq!(stats.p_err, 0.0);
    }

    #[test]
    fn pure_noise_limit_approaches_uniform_guessing() {
        let set = generate_ppm_set(&tiny_params()).unwrap();
        let phi = matched_filter_matrix(&set);
        let alphabet = project_alphabet(&phi, &set).unwrap();
        let model = ChannelModel::awgn(sigma_for_snr_db(1.0, 32, -60.0), 2);
        let stats = estimate_error_probability(
            &set,
            &alphabet,
            &phi,
            DecisionRule::MaxCorrelation,
            &model,
            4000,
        )
        .unwrap();
        let expect = 1.0 - 1.0 / 4.0;
        assert!(
            (stats.p_err - expect).abs() < 0.03,
            "p_err {} vs {expect}",
            stats.p_err
        );
    }

    #[test]
    fn single_trial_is_zero_or_one() {
        let set = generate_ppm_set(&tiny_params()).unwrap();
        let phi = gaussian_matrix(2, 32, 3);
        let alphabet = project_alphabet(&phi, &set).unwrap();
        let model = ChannelModel::awgn(1.0, 7);
        let stats = estimate_error_probability(
            &set,
            &alphabet,
            &phi,
            DecisionRule::MinDistance,
            &model,
            1,
        )
        .unwrap();
        assert!(stats.p_err == 0.0 || stats.p_err == 1.0);
    }

    #[test]
    fn empty_methods_give_empty_curve() {
        let config = ExperimentConfig {
            symbols: tiny_params(),
            methods: vec![],
            snr_grid_db: vec![0.0],
            trials_per_point: 10,
            train_runs: 1,
            taps: None,
            master_seed: 1,
        };
        assert!(run_sweep(&config).unwrap().rows.is_empty());
    }

    #[test]
    fn single_method_single_snr_aggregates_runs() {
        let config = ExperimentConfig {
            symbols: tiny_params(),
            methods: vec![MethodSpec::Trained {
                m_rows: 4,
                train: TrainConfig {
                    m_rows: 4,
                    step_size: 0.1,
                    residual_threshold: 0.2,
                    init_variance: 0.01,
                    max_epochs: 2000,
                    ..TrainConfig::default()
                },
            }],
            snr_grid_db: vec![-6.0],
            trials_per_point: 100,
            train_runs: 3,
            taps: None,
            master_seed: 11,
        };
        let curve = run_sweep(&config).unwrap();
        assert_eq!(curve.rows.len(), 1);
        assert_eq!(curve.rows[0].trials, 300);
        assert_eq!(curve.rows[0].method, "trained");
    }

    #[test]
    fn gaussian_and_matched_use_one_matrix() {
        let config = ExperimentConfig {
            symbols: tiny_params(),
            methods: vec![MethodSpec::Gaussian { m_rows: 8 }, MethodSpec::MatchedFilter],
            snr_grid_db: vec![-2.0, 0.0],
            trials_per_point: 50,
            train_runs: 5,
            taps: None,
            master_seed: 3,
        };
        let curve = run_sweep(&config).unwrap();
        assert_eq!(curve.rows.len(), 4);
        for row in &curve.rows {
            assert_eq!(row.trials, 50);
            assert_eq!(row.run_variance, 0.0);
        }
        assert_eq!(curve.rows[2].method, "matched-filter");
        assert_eq!(curve.rows[2].m_rows, 4);
    }

    #[test]
    fn sweep_is_reproducible() {
        let config = ExperimentConfig {
            symbols: tiny_params(),
            methods: vec![MethodSpec::Gaussian { m_rows: 6 }],
            snr_grid_db: vec![-4.0, -2.0],
            trials_per_point: 200,
            train_runs: 1,
            taps: None,
            master_seed: 99,
        };
        let a = run_sweep(&config).unwrap();
        let b = run_sweep(&config).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn csv_round_trip_is_byte_identical() {
        let curve = ErrorCurve {
            rows: vec![CurveRow {
                method: "gaussian".into(),
                m_rows: 320,
                snr_db: -12.5,
                trials: 60000,
                errors: 123,
                p_err: 123.0 / 60000.0,
                ci95_low: 0.0017,
                ci95_high: 0.00245,
                run_variance: 1.25e-7,
            }],
        };
        let mut first = Vec::new();
        export_csv(&curve, &mut first).unwrap();
        let parsed = import_csv(std::io::Cursor::new(&first)).unwrap();
        assert_eq!(parsed, curve);
        let mut second = Vec::new();
        export_csv(&parsed, &mut second).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn empty_curve_exports_header_only() {
        let mut buf = Vec::new();
        export_csv(&ErrorCurve::default(), &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CURVE_HEADER}\n"));
    }

    #[test]
    fn import_rejects_wrong_header() {
        let bad = "method,M\n";
        assert!(import_csv(std::io::Cursor::new(bad)).is_err());
    }
}
