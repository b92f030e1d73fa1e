mod common;

use common::exhaustive_window;
use emoscreen::analytics::*;
use emoscreen::synth::{synth_cohort, CohortParams};
use proptest::prelude::*;

fn matrix(id: &str) -> impl Strategy<Value = EvolutionMatrix> + '_ {
    (4usize..30).prop_flat_map(move |n| {
        prop::collection::vec(prop::collection::vec(0.0f64..1.0, 6), n).prop_map(move |raw| {
            let cols: Vec<[f64; 6]> = raw
                .iter()
                .map(|r| {
                    let s: f64 = r.iter().sum::<f64>() + 1e-9;
                    let mut p = [0.0; 6];
                    for i in 0..6 {
                        p[i] = (r[i] + 1e-9 / 6.0) / s;
                    }
                    p
                })
                .collect();
            EvolutionMatrix::from_columns(id, &cols).unwrap()
        })
    })
}

fn cohort() -> impl Strategy<Value = (Vec<EvolutionMatrix>, Vec<EvolutionMatrix>)> {
    (prop::collection::vec(matrix("h"), 1..6), prop::collection::vec(matrix("i"), 1..6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn occurrence_partitions_each_group((h, _) in cohort()) {
        let hs: Vec<&EvolutionMatrix> = h.iter().collect();
        let series: Vec<OccurrenceSeries> = Emotion::ALL.iter().map(|&e| occurrence_series(&hs, Group::Healthy, e).unwrap()).collect();
        let n = series[0].len();
        prop_assert_eq!(n, h.iter().map(|m| m.n_frames()).min().unwrap());
        for j in 0..n {
            let total: f64 = series.iter().map(|s| s.value(j)).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for s in &series {
                let ut = s.value(j) * hs.len() as f64;
                prop_assert!((ut - ut.round()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn occurrence_ignores_participant_order((h, _) in cohort(), rot in 0usize..6) {
        let hs: Vec<&EvolutionMatrix> = h.iter().collect();
        let mut rotated = hs.clone();
        let len = rotated.len();
        rotated.rotate_left(rot % len);
        for e in Emotion::ALL {
            prop_assert_eq!(occurrence_series(&hs, Group::Healthy, e).unwrap(), occurrence_series(&rotated, Group::Healthy, e).unwrap());
        }
    }

    #[test]
    fn window_matches_exhaustive_scan((h, i) in cohort(), width in 1usize..5) {
        let hs: Vec<&EvolutionMatrix> = h.iter().collect();
        let is: Vec<&EvolutionMatrix> = i.iter().collect();
        let (spec, diff) = FeatureSpec::select(&hs, &is, width).unwrap();
        let (start, best) = exhaustive_window(&hs, &is, &Emotion::RETAINED, width);
        prop_assert_eq!(spec.window.start, start);
        prop_assert_eq!(diff.numerators[start..start + width].iter().sum::<u64>(), best);
        prop_assert_eq!(diff.denominator, (hs.len() * is.len()) as u64);
        for m in h.iter().chain(&i) {
            let f = spec.features(m).unwrap();
            prop_assert_eq!(f.len(), spec.len());
            prop_assert_eq!(f[0], m.get(spec.emotions[0], start));
        }
    }

    #[test]
    fn window_choice_survives_constant_shift(values in prop::collection::vec(0.0f64..1.0, 5..40), shift in -3.0f64..3.0, width in 1usize..5) {
        let a = select_window_values(&values, width).unwrap();
        let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
        let b = select_window_values(&shifted, width).unwrap();
        let sum = |w: FrameWindow, v: &[f64]| v[w.start..w.end()].iter().sum::<f64>();
        // Shifting every frame adds the same amount to every window; the
        // chosen window can differ only through rounding between near-ties.
        prop_assert!((sum(a, &values) - sum(b, &values)).abs() < 1e-9);
    }

    #[test]
    fn evolution_csv_round_trips(m in matrix("p")) {
        prop_assert_eq!(EvolutionMatrix::from_csv("p", &m.to_csv()).unwrap(), m);
    }
}

#[test]
fn synthetic_cohorts_keep_invariants() {
    for seed in 0..10 {
        let c = synth_cohort(&CohortParams { n_healthy: 4, n_impaired: 5, ..CohortParams::medium_noise(seed) }).unwrap();
        for s in &c {
            for j in 0..s.matrix.n_frames() {
                let sum: f64 = s.matrix.column(j).values().iter().sum();
                assert!((sum - 1.0).abs() < 1e-9);
                assert_eq!(s.matrix.argmax(j), s.script[j]);
            }
        }
    }
}

#[test]
fn window_selection_sees_the_scripted_interval() {
    let c = synth_cohort(&CohortParams::high_separation(5)).unwrap();
    let by = |g: Group| c.iter().filter(|s| s.record.group == g).map(|s| &s.matrix).collect::<Vec<_>>();
    let (spec, _) = FeatureSpec::select(&by(Group::Healthy), &by(Group::Impaired), 60).unwrap();
    assert_eq!(spec.window, FrameWindow { start: 200, width: 60 });
    assert_eq!(spec.window.frame_numbers(), (201, 260));
}
