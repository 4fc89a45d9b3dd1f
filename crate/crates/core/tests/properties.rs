//! Property tests: independent oracles for convolution, the classifier
//! equivalence on equal-energy alphabets, symbol-set invariants over random
//! parameters, and format round trips.

use proptest::prelude::*;
use ripmat::channel::toeplitz_matrix;
use ripmat::experiment::{export_csv, import_csv, CurveRow, ErrorCurve};
use ripmat::linalg::{dist_sq, norm_sq};
use ripmat::matrix::Provenance;
use ripmat::receiver::{matched_filter_classify, matched_filter_matrix, project_alphabet};
use ripmat::symbols::{generate_ppm_set, PpmParams, PulseShape, Symbol, SymbolSet};

/// Reference linear convolution truncated to the input length, written
/// index-by-index rather than via the matrix.
fn conv_truncated_oracle(h: &[f64], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut y = vec![0.0; n];
    for (j, &xj) in x.iter().enumerate() {
        for (lag, &tap) in h.iter().enumerate() {
            if j + lag < n {
                y[j + lag] += tap * xj;
            }
        }
    }
    y
}

proptest! {
    #[test]
    fn toeplitz_matches_convolution_oracle(
        taps in prop::collection::vec(-2.0f64..2.0, 1..5),
        x in prop::collection::vec(-3.0f64..3.0, 5..40),
    ) {
        prop_assume!(taps.len() <= x.len());
        let h = toeplitz_matrix(&taps, x.len()).unwrap();
        let via_matrix = h.matvec(&x);
        let via_conv = conv_truncated_oracle(&taps, &x);
        for (a, b) in via_matrix.iter().zip(&via_conv) {
            prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn ppm_invariants_hold_over_random_params(
        pulse_width in 3usize..24,
        n_symbols in 1usize..12,
        step in 1usize..12,
        slack in 0usize..16,
        shape_rect in any::<bool>(),
    ) {
        let n_samples = (n_symbols - 1) * step + pulse_width + slack;
        let params = PpmParams {
            n_samples,
            pulse_width,
            n_symbols,
            position_step: step,
            pulse_shape: if shape_rect { PulseShape::Rectangular } else { PulseShape::TruncatedSincHann },
        };
        let set = generate_ppm_set(&params).unwrap();
        for s in &set.symbols {
            prop_assert!((s.energy() - 1.0).abs() < 1e-12);
            prop_assert!(s.samples.iter().filter(|&&v| v != 0.0).count() <= pulse_width);
        }
        // adjacent supports overlap by pulse_width - step (when positive)
        for w in set.symbols.windows(2) {
            let overlap = w[0].support.end.saturating_sub(w[1].support.start);
            prop_assert_eq!(overlap, pulse_width.saturating_sub(step));
        }
    }

    #[test]
    fn curve_csv_round_trips(
        rows in prop::collection::vec(
            (0u64..10_000, 1u64..100_000, -20.0f64..1.0, 1usize..512),
            0..8,
        ),
    ) {
        let curve = ErrorCurve {
            rows: rows
                .into_iter()
                .map(|(errors, trials, snr_db, m_rows)| {
                    let errors = errors.min(trials);
                    let p_err = errors as f64 / trials as f64;
                    let (lo, hi) = ripmat::experiment::wilson_interval(errors, trials);
                    CurveRow {
                        method: "gaussian".into(),
                        m_rows,
                        snr_db,
                        trials,
                        errors,
                        p_err,
                        ci95_low: lo,
                        ci95_high: hi,
                        run_variance: p_err * 1e-3,
                    }
                })
                .collect(),
        };
        let mut first = Vec::new();
        export_csv(&curve, &mut first).unwrap();
        let back = import_csv(std::io::Cursor::new(&first)).unwrap();
        prop_assert_eq!(&back, &curve);
        let mut second = Vec::new();
        export_csv(&back, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }
}

/// Random unit-energy alphabet for the classifier-equivalence property.
fn random_equal_energy_set(seed: u64, p: usize, n: usize) -> SymbolSet {
    let mut rng = ripmat::seed::stream(seed, &[0xa1]);
    use rand_distr::{Distribution, Normal};
    let normal = Normal::new(0.0, 1.0).unwrap();
    let symbols = (0..p)
        .map(|i| {
            let mut samples: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
            let norm = norm_sq(&samples).sqrt();
            samples.iter_mut().for_each(|v| *v /= norm);
            Symbol {
                index: i + 1,
                samples,
                support: 0..n,
            }
        })
        .collect();
    SymbolSet {
        params: PpmParams {
            n_samples: n,
            pulse_width: n,
            n_symbols: p,
            position_step: 1,
            pulse_shape: PulseShape::Rectangular,
        },
        symbols,
    }
}

/// On an equal-energy alphabet, argmax correlation and full-space minimum
/// distance are the same decision: ||r - s||^2 = ||r||^2 - 2<r,s> + 1.
#[test]
fn matched_filter_equals_full_space_min_distance() {
    use rand_distr::{Distribution, Normal};
    let set = random_equal_energy_set(7, 8, 24);
    let mut rng = ripmat::seed::stream(99, &[0xb2]);
    let normal = Normal::new(0.0, 0.8).unwrap();
    let mut disagreements = 0u32;
    for trial in 0..10_000u64 {
        let base = &set.symbols[(trial % 8) as usize].samples;
        let r: Vec<f64> = base.iter().map(|v| v + normal.sample(&mut rng)).collect();
        let by_corr = matched_filter_classify(&r, &set).unwrap();
        let by_dist = set
            .symbols
            .iter()
            .map(|s| (s.index, dist_sq(&r, &s.samples)))
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
            .unwrap()
            .0;
        if by_corr != by_dist {
            disagreements += 1;
        }
    }
    assert_eq!(disagreements, 0);
}

/// The projected alphabet of a matched-filter matrix peaks on its own row.
#[test]
fn matched_projection_is_gram_column() {
    let set = random_equal_energy_set(3, 5, 12);
    let phi = matched_filter_matrix(&set);
    assert_eq!(phi.provenance, Provenance::MatchedFilter);
    assert_eq!(phi.rows(), 5);
    let alphabet = project_alphabet(&phi, &set).unwrap();
    for (i, proto) in alphabet.prototypes_m.iter().enumerate() {
        let peak = proto
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .unwrap()
            .0;
        assert_eq!(peak, i);
    }
}
