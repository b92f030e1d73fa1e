use std::collections::HashSet;

use emoscreen::analytics::{Emotion, EvolutionMatrix, Group};
use emoscreen::classify::{ClassifierKind, TrainParams};
use emoscreen::face::{crop_and_resize, detect_faces, largest_face, Cascade, DetectParams};
use emoscreen::net::{random_weights, Network, NetworkGraph};
use emoscreen::pipeline::*;
use emoscreen::synth::{render_script, synth_cohort, synth_empty_frame, synth_face_frame, CohortParams, FrameParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const LAYER: &str = "block_11_add";

fn network(seed: u64) -> Network {
    let g = NetworkGraph::mobilenet_v2();
    let w = random_weights(&g, seed).unwrap();
    Network::bind(g, &w).unwrap()
}

fn cohort(params: &CohortParams) -> Vec<Participant> {
    synth_cohort(params).unwrap().into_iter().map(|s| Participant::new(s.record, s.matrix)).collect()
}

#[test]
fn fixed_split_is_disjoint_and_complete() {
    let c = cohort(&CohortParams::high_separation(3));
    let spec = SplitSpec::fixed_counts(18, 28, 7, 8, 11);
    let (train, test) = split_dataset(&c, &spec).unwrap();
    let ids = |ps: &[Participant]| ps.iter().map(|p| p.record.id.clone()).collect::<HashSet<_>>();
    let (a, b) = (ids(&train), ids(&test));
    assert!(a.is_disjoint(&b));
    assert_eq!(a.len() + b.len(), 61);
    let count = |ps: &[Participant], g| ps.iter().filter(|p| p.group() == g).count();
    assert_eq!((count(&train, Group::Healthy), count(&train, Group::Impaired)), (18, 28));
    assert_eq!((count(&test, Group::Healthy), count(&test, Group::Impaired)), (7, 8));
    assert_eq!(split_dataset(&c, &spec).unwrap().1, test);
}

#[test]
fn recognition_matches_manual_stages() {
    let net = network(5);
    let cascade = Cascade::center_surround();
    let detect = DetectParams::default();
    let fp = FrameParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let labeled: Vec<_> = (0..18)
        .map(|i| {
            let e = Emotion::ALL[i % 6];
            (synth_face_frame(&mut rng, &fp, e).0, e)
        })
        .collect();
    let (clf, _) =
        train_emotion_model(&labeled, &cascade, &detect, &net, LAYER, ClassifierKind::Knn, &TrainParams { knn_k: 1, ..Default::default() })
            .unwrap();

    let script = [Emotion::Happy, Emotion::Sad, Emotion::Angry, Emotion::Surprise, Emotion::Neutral];
    let mut frames = render_script(&mut rng, &fp, &script);
    frames.push(synth_empty_frame(&mut rng, &fp));

    let mut expected = Vec::new();
    for f in &frames {
        let dets = detect_faces(&f.to_gray().unwrap(), &cascade, &detect).unwrap();
        expected.push(match largest_face(&dets) {
            None => Emotion::Other,
            Some(face) => {
                let crop = crop_and_resize(f, &face.window).unwrap();
                clf.predict(&net.extract_features(&crop, LAYER).unwrap().values).unwrap()
            }
        });
    }
    assert_eq!(*expected.last().unwrap(), Emotion::Other);

    let rec = Recognizer { cascade: &cascade, detect, network: &net, layer: LAYER.into(), model: &clf, mode: LabelMode::Hard };
    let m = run_emotion_recognition("p", &frames, &rec).unwrap();
    assert_eq!(m.n_frames(), frames.len());
    for (j, e) in expected.iter().enumerate() {
        assert_eq!(m.column(j).values().iter().sum::<f64>(), 1.0);
        assert_eq!(m.argmax(j), *e, "frame {j}");
    }

    let soft = Recognizer { mode: LabelMode::Soft, ..rec };
    let s = run_emotion_recognition("p", &frames, &soft).unwrap();
    for j in 0..frames.len() {
        assert!((s.column(j).values().iter().sum::<f64>() - 1.0).abs() <= 1e-9);
    }
}

#[test]
fn stub_model_marks_every_planted_face() {
    let net = network(1);
    let cascade = Cascade::center_surround();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let frames = render_script(&mut rng, &FrameParams::default(), &[Emotion::Sad; 12]);
    let stub = StubEmotionModel(Emotion::Happy);
    let rec = Recognizer {
        cascade: &cascade,
        detect: DetectParams::default(),
        network: &net,
        layer: LAYER.into(),
        model: &stub,
        mode: LabelMode::Hard,
    };
    let m = run_emotion_recognition("p", &frames, &rec).unwrap();
    assert!((0..12).all(|j| m.argmax(j) == Emotion::Happy && m.get(Emotion::Happy, j) == 1.0));
}

#[test]
fn window_ignores_test_participants() {
    let c = cohort(&CohortParams::medium_noise(4));
    let spec = SplitSpec::fixed_counts(18, 28, 7, 8, 2);
    let (train, test) = split_dataset(&c, &spec).unwrap();
    let params = TrainParams::default();
    let (report, models) = evaluate_all(&train, &test, &ClassifierKind::ALL, 60, WindowSource::Training, &params).unwrap();

    let scrambled: Vec<Participant> = test
        .iter()
        .map(|p| {
            let labels = vec![Emotion::Surprise; p.matrix.n_frames()];
            Participant::new(p.record.clone(), EvolutionMatrix::from_labels(&p.record.id, &labels).unwrap())
        })
        .collect();
    let (report2, models2) = evaluate_all(&train, &scrambled, &ClassifierKind::ALL, 60, WindowSource::Training, &params).unwrap();
    assert_eq!(report.spec, report2.spec);
    assert_eq!(models, models2);
    assert_eq!(report.spec.window.start, 200);

    for r in &report.results {
        let trace = r.confusion[0][0] + r.confusion[1][1];
        let total: usize = r.confusion.iter().flatten().sum();
        assert_eq!((trace, total), (r.correct, r.total));
        assert_eq!(r.accuracy, 100.0 * r.correct as f64 / r.total as f64);
        assert!(r.reference_accuracy.is_finite());
    }
}

#[test]
fn mobilenet_cost_report_up_to_feature_layer() {
    let g = NetworkGraph::mobilenet_v2();
    let r = cost_report(&g, Some(LAYER)).unwrap();
    assert!(r.total_actual_macs < r.total_standard_macs);
    assert!(r.total_ratio > 0.0 && r.total_ratio < 1.0);
    let sum: u64 = r.rows.iter().map(|row| row.actual_macs).sum();
    assert_eq!(sum, r.total_actual_macs);
    for row in r.rows.iter().filter(|row| row.kind == LayerCostKind::Separable) {
        let d = &row.dims;
        let expect = 1.0 / d.out_channels as f64 + 1.0 / (d.kernel * d.kernel) as f64;
        assert!((row.ratio - expect).abs() < 1e-12, "{:?}", row.layers);
    }
    assert!(r.rows.iter().all(|row| row.layers.iter().all(|l| g.position(l).unwrap() <= g.position(LAYER).unwrap())));
}
