use std::path::{Path, PathBuf};

use emoscreen::analytics::{occurrence_series, Emotion, EvolutionMatrix, FeatureSpec, Group, OccurrenceSeries};
use emoscreen::classify::{save_model, ClassifierKind, LabeledDataset, TrainParams};
use emoscreen::face::{crop_and_resize, detect_faces, largest_face, Window};
use emoscreen::io::{
    read_labeled_frames, read_pnm, write_cohort_manifest, write_evolution_csv, write_file, write_labeled_frames, write_occurrence_csv,
    write_occurrence_svg, write_pnm, CohortEntry, LabeledFrame,
};
use emoscreen::net::NetworkGraph;
use emoscreen::pipeline::{
    cost_report, cross_validate, cross_validate_cohort, evaluate_all, extract_face_features, select_features, split_dataset,
    train_emotion_model, train_mci, CvReport, Participant, SplitSpec, WindowSource,
};
use emoscreen::synth::{render_script, synth_cohort, synth_face_frame, CohortParams, FrameParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cohort::{load_participants, FrameRecognizer, Stack};
use crate::{Cli, CliError, Command, Preset, SplitOpts, WindowOpts};

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Internal(e.to_string()))?;
    text.push('\n');
    Ok(write_file(path, text)?)
}

fn split_spec(opts: &SplitOpts, seed: u64) -> SplitSpec {
    match opts.fraction {
        Some(p) => SplitSpec::Fraction { p, seed },
        None => SplitSpec::fixed_counts(opts.train_healthy, opts.train_impaired, opts.test_healthy, opts.test_impaired, seed),
    }
}

fn window_source(opts: &WindowOpts) -> WindowSource {
    if opts.paper_mode {
        WindowSource::AllParticipants
    } else {
        WindowSource::Training
    }
}

fn ids(ps: &[Participant]) -> Vec<&str> {
    ps.iter().map(|p| p.record.id.as_str()).collect()
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let out = cli.out.as_path();
    let seed = cli.seed;
    std::fs::create_dir_all(out).map_err(|e| CliError::Data(format!("{}: {e}", out.display())))?;
    match &cli.command {
        Command::DetectFace { image, net } => detect_face(image, &Stack::load(net, seed)?, out),
        Command::ExtractFeatures { image, no_detect, net } => extract_features(image, *no_detect, &Stack::load(net, seed)?, out),
        Command::TrainEmotion { frames, classifier, net } => train_emotion(frames, *classifier, &Stack::load(net, seed)?, out),
        Command::Recognize { frames_dir, id, cohort, model } => {
            let recognizer = FrameRecognizer::load(model, seed)?;
            if let Some(manifest) = cohort {
                let records = emoscreen::io::read_cohort_manifest(manifest)?;
                let ps = recognizer.recognize_records(&records, out)?;
                println!("recognized {} participants into {}", ps.len(), out.join("evolution").display());
                return Ok(());
            }
            let dir = frames_dir.as_ref().expect("clap requires --frames-dir without --cohort");
            let id = match id {
                Some(id) => id.clone(),
                None => dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "participant".into()),
            };
            let matrix = recognizer.recognize_dir(&id, dir)?;
            let path = out.join("evolution").join(format!("{id}.csv"));
            write_evolution_csv(&matrix, &path)?;
            println!("{}: {} frames -> {}", id, matrix.n_frames(), path.display());
            Ok(())
        }
        Command::CompareGroups { cohort, window } => compare_groups(&load_participants(cohort, seed, out)?, *window, out),
        Command::TrainMci { cohort, split, window, classifier } => {
            let ps = load_participants(cohort, seed, out)?;
            let spec = split_spec(split, seed);
            let (train, test) = split_dataset(&ps, &spec)?;
            let features = match window_source(window) {
                WindowSource::Training => select_features(&train, window.window)?,
                WindowSource::AllParticipants => select_features(&ps, window.window)?,
            };
            let model = train_mci(&train, &features, *classifier, &TrainParams::default())?;
            save_model(&model.model, out.join("mci_model.emsm"))?;
            write_json(&out.join("mci_features.json"), &model.spec)?;
            write_json(&out.join("split.json"), &serde_json::json!({ "split": spec, "train": ids(&train), "test": ids(&test) }))?;
            let (first, last) = model.spec.window.frame_numbers();
            println!("trained {classifier} on {} participants; window frames {first}-{last}", train.len());
            Ok(())
        }
        Command::EvaluateMci { cohort, split, window } => {
            let ps = load_participants(cohort, seed, out)?;
            let spec = split_spec(split, seed);
            let (train, test) = split_dataset(&ps, &spec)?;
            let (mut report, _) =
                evaluate_all(&train, &test, &ClassifierKind::ALL, window.window, window_source(window), &TrainParams::default())?;
            report.split = spec.describe();
            report.seed = seed;
            let table = report.to_table();
            write_file(&out.join("report.txt"), &table)?;
            write_json(&out.join("report.json"), &report)?;
            print!("{table}");
            Ok(())
        }
        Command::CrossValidate { cohort, matrices, frames, classifier, folds, window, model } => {
            let kinds: Vec<ClassifierKind> = classifier.map_or(ClassifierKind::ALL.to_vec(), |k| vec![k]);
            let reports: Vec<CvReport> = match (cohort, frames) {
                (Some(c), _) => {
                    let opts = crate::CohortOpts { cohort: c.clone(), matrices: matrices.clone(), model: model.clone() };
                    let ps = load_participants(&opts, seed, out)?;
                    kinds
                        .iter()
                        .map(|&k| cross_validate_cohort(&ps, k, &TrainParams::default(), *window, *folds, seed))
                        .collect::<Result<_, _>>()?
                }
                (None, Some(f)) => {
                    let data = frame_dataset(f, &Stack::load(&model.net, seed)?)?;
                    kinds.iter().map(|&k| cross_validate(&data, k, &TrainParams::default(), *folds, seed)).collect::<Result<_, _>>()?
                }
                (None, None) => return Err(CliError::Usage("cross-validate needs --cohort or --frames".into())),
            };
            let mut text = format!("{:<15} {:>5} {:>16}\n", "Classifier", "Folds", "Mean error (%)");
            for r in &reports {
                text.push_str(&format!("{:<15} {:>5} {:>16.1}\n", r.classifier, r.folds, 100.0 * r.mean_error));
            }
            write_file(&out.join("cv.txt"), &text)?;
            write_json(&out.join("cv.json"), &reports)?;
            print!("{text}");
            Ok(())
        }
        Command::CostReport { topology, upto } => {
            let graph = match topology {
                Some(p) => NetworkGraph::load(p)?,
                None => NetworkGraph::mobilenet_v2(),
            };
            let report = cost_report(&graph, Some(upto))?;
            let tsv = report.to_tsv();
            write_file(&out.join("cost_report.tsv"), &tsv)?;
            write_json(&out.join("cost_report.json"), &report)?;
            print!("{tsv}");
            Ok(())
        }
        Command::SynthCohort { preset, n_healthy, n_impaired, n_frames, window_start, window_width, with_frames, labeled_frames } => {
            let mut p = match preset {
                Preset::HighSeparation => CohortParams::high_separation(seed),
                Preset::MediumNoise => CohortParams::medium_noise(seed),
            };
            p.n_healthy = n_healthy.unwrap_or(p.n_healthy);
            p.n_impaired = n_impaired.unwrap_or(p.n_impaired);
            p.window_width = window_width.unwrap_or(p.window_width);
            if let Some(n) = n_frames {
                p.n_frames = *n;
                p.window_start = p.window_start.min(n.saturating_sub(p.window_width));
            }
            p.window_start = window_start.unwrap_or(p.window_start);
            synth(&p, *with_frames, *labeled_frames, seed, out)
        }
    }
}

fn detect_face(image: &Path, stack: &Stack, out: &Path) -> Result<(), CliError> {
    let img = read_pnm(image)?;
    let dets = detect_faces(&img.to_gray()?, &stack.cascade, &stack.detect)?;
    let largest = largest_face(&dets).copied();
    write_json(&out.join("detections.json"), &serde_json::json!({ "image": image, "detections": dets, "largest": largest }))?;
    if let Some(d) = largest {
        write_pnm(&crop_and_resize(&img, &d.window)?, &out.join("face_crop.ppm"))?;
    }
    println!("{} face(s) detected in {}", dets.len(), image.display());
    for d in &dets {
        println!("x={} y={} w={} h={} score={:.6}", d.window.x, d.window.y, d.window.w, d.window.h, d.score);
    }
    Ok(())
}

fn extract_features(image: &Path, no_detect: bool, stack: &Stack, out: &Path) -> Result<(), CliError> {
    let img = read_pnm(image)?;
    let (face, values) = if no_detect {
        let full = Window::new(0, 0, img.width(), img.height());
        (None, stack.network.extract_features(&crop_and_resize(&img, &full)?, &stack.layer)?.values)
    } else {
        match extract_face_features(&img, &stack.cascade, &stack.detect, &stack.network, &stack.layer)? {
            Some((d, v)) => (Some(d.window), v),
            None => return Err(CliError::Data(format!("{}: no face detected (use --no-detect for the whole image)", image.display()))),
        }
    };
    write_json(
        &out.join("features.json"),
        &serde_json::json!({ "layer": stack.layer, "face": face, "len": values.len(), "values": values }),
    )?;
    println!("{} features from {}", values.len(), stack.layer);
    Ok(())
}

fn load_labeled(frames: &Path) -> Result<Vec<(emoscreen::tensor::Tensor, Emotion)>, CliError> {
    read_labeled_frames(frames)?.into_iter().map(|f| Ok((read_pnm(&f.path)?, f.label))).collect()
}

fn train_emotion(frames: &Path, kind: ClassifierKind, stack: &Stack, out: &Path) -> Result<(), CliError> {
    let labeled = load_labeled(frames)?;
    let (clf, no_face) =
        train_emotion_model(&labeled, &stack.cascade, &stack.detect, &stack.network, &stack.layer, kind, &TrainParams::default())?;
    if !no_face.is_empty() {
        log::warn!("{} of {} frames had no detectable face; whole frames were used", no_face.len(), labeled.len());
    }
    save_model(clf.model(), out.join("emotion_model.emsm"))?;
    let mut counts = [0usize; 6];
    for (_, e) in &labeled {
        counts[e.index()] += 1;
    }
    let per_emotion: serde_json::Map<String, serde_json::Value> =
        Emotion::ALL.iter().map(|e| (e.name().to_string(), counts[e.index()].into())).collect();
    write_json(
        &out.join("emotion_training.json"),
        &serde_json::json!({ "classifier": kind.to_string(), "layer": stack.layer, "frames": labeled.len(), "per_emotion": per_emotion, "no_face_frames": no_face }),
    )?;
    println!("trained {kind} emotion model on {} frames", labeled.len());
    Ok(())
}

/// Face features of every labeled frame, as a classifier dataset.
fn frame_dataset(frames: &Path, stack: &Stack) -> Result<LabeledDataset, CliError> {
    let labeled = load_labeled(frames)?;
    let mut features = Vec::with_capacity(labeled.len());
    for (i, (img, _)) in labeled.iter().enumerate() {
        let v = match extract_face_features(img, &stack.cascade, &stack.detect, &stack.network, &stack.layer)? {
            Some((_, v)) => v,
            None => {
                log::warn!("frame {i}: no face detected; using the whole frame");
                let full = Window::new(0, 0, img.width(), img.height());
                stack.network.extract_features(&crop_and_resize(img, &full)?, &stack.layer)?.values
            }
        };
        features.push(v.into_iter().map(f64::from).collect());
    }
    Ok(LabeledDataset::new(features, labeled.iter().map(|(_, e)| e.index()).collect(), Emotion::names())?)
}

fn group_matrices(ps: &[Participant], g: Group) -> Vec<&EvolutionMatrix> {
    ps.iter().filter(|p| p.group() == g).map(|p| &p.matrix).collect()
}

fn compare_groups(ps: &[Participant], width: usize, out: &Path) -> Result<(), CliError> {
    let healthy = group_matrices(ps, Group::Healthy);
    let impaired = group_matrices(ps, Group::Impaired);
    let mut all: Vec<OccurrenceSeries> = Vec::new();
    for e in Emotion::ALL {
        let pair = vec![occurrence_series(&healthy, Group::Healthy, e)?, occurrence_series(&impaired, Group::Impaired, e)?];
        write_occurrence_csv(&pair, &out.join(format!("occurrence_{e}.csv")))?;
        write_occurrence_svg(&pair, &format!("Occurrence of {e}"), &out.join(format!("occurrence_{e}.svg")))?;
        all.extend(pair);
    }
    write_occurrence_csv(&all, &out.join("occurrence.csv"))?;
    let (spec, diff): (FeatureSpec, _) = FeatureSpec::select(&healthy, &impaired, width)?;
    let mut text = String::from("frame,difference\n");
    for (j, v) in diff.values().iter().enumerate() {
        text.push_str(&format!("{},{}\n", j + 1, v));
    }
    write_file(&out.join("difference.csv"), text)?;
    write_json(&out.join("window.json"), &spec)?;
    let (first, last) = spec.window.frame_numbers();
    println!(
        "{} healthy / {} impaired participants; most different {}-frame window: frames {first}-{last}",
        healthy.len(),
        impaired.len(),
        width
    );
    Ok(())
}

fn synth(p: &CohortParams, with_frames: bool, labeled: usize, seed: u64, out: &Path) -> Result<(), CliError> {
    let cohort = synth_cohort(p).map_err(CliError::Usage)?;
    let fp = FrameParams::default();
    let mut entries = Vec::with_capacity(cohort.len());
    for (k, s) in cohort.iter().enumerate() {
        let frames_dir = PathBuf::from("frames").join(&s.record.id);
        write_evolution_csv(&s.matrix, &out.join("matrices").join(format!("{}.csv", s.record.id)))?;
        if with_frames {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x5eed_0000 + k as u64));
            for (j, img) in render_script(&mut rng, &fp, &s.script).iter().enumerate() {
                write_pnm(img, &out.join(&frames_dir).join(format!("f{:05}.pgm", j + 1)))?;
            }
        }
        entries.push(CohortEntry {
            id: s.record.id.clone(),
            moca: s.record.moca.map(i64::from).ok_or_else(|| CliError::Internal("synthetic record lacks MoCA".into()))?,
            group: None,
            frames_dir,
            fps: Some(25),
        });
    }
    write_cohort_manifest(&entries, &out.join("cohort.jsonl"))?;
    write_json(&out.join("cohort_params.json"), p)?;
    if labeled > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1abe1);
        let dir = out.join("train_frames");
        let mut list = Vec::with_capacity(labeled * 6);
        for i in 0..labeled {
            for e in Emotion::ALL {
                let (img, _) = synth_face_frame(&mut rng, &fp, e);
                let path = dir.join(format!("{e}_{:04}.pgm", i + 1));
                write_pnm(&img, &path)?;
                list.push(LabeledFrame { path, label: e });
            }
        }
        write_labeled_frames(&list, out, &out.join("train_frames.csv"))?;
    }
    let n_h = cohort.iter().filter(|s| s.record.group == Group::Healthy).count();
    println!("wrote {} participants ({} healthy, {} impaired) to {}", cohort.len(), n_h, cohort.len() - n_h, out.display());
    Ok(())
}
