use std::fs;

use emoscreen::analytics::{Emotion, EvolutionMatrix, Group, OccurrenceSeries};
use emoscreen::io::*;
use emoscreen::tensor::Tensor;

fn pgm(w: usize, h: usize, fill: u8) -> Vec<u8> {
    let mut b = format!("P5\n{w} {h}\n255\n").into_bytes();
    b.extend(std::iter::repeat_n(fill, w * h));
    b
}

#[test]
fn frames_load_in_name_order() {
    let dir = tempfile::tempdir().unwrap();
    for (name, v) in [("f003.pgm", 3), ("f001.pgm", 1), ("f002.pgm", 2)] {
        fs::write(dir.path().join(name), pgm(4, 3, v)).unwrap();
    }
    fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let frames = load_frames(dir.path()).unwrap();
    let names: Vec<String> = frames.iter().map(|f| f.path.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["f001.pgm", "f002.pgm", "f003.pgm"]);
    for (k, f) in frames.iter().enumerate() {
        assert_eq!(f.image.shape(), (3, 4, 1));
        assert!(f.image.values().iter().all(|&v| v == (k + 1) as f32));
    }
}

#[test]
fn mixed_dimensions_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("a.pgm"), pgm(4, 3, 0)).unwrap();
    fs::write(dir.path().join("b.pgm"), pgm(5, 3, 0)).unwrap();
    match load_frames(dir.path()) {
        Err(IoError::Inconsistent { path, .. }) => assert!(path.ends_with("b.pgm")),
        other => panic!("expected an inconsistency error, got {other:?}"),
    }
    let empty = tempfile::tempdir().unwrap();
    assert!(load_frames(empty.path()).is_err());
}

#[test]
fn unsupported_magic_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("x.pgm");
    fs::write(&p, b"P2\n1 1\n255\n0").unwrap();
    assert!(matches!(read_pnm(&p), Err(IoError::Format { .. })));
}

#[test]
fn pnm_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = Tensor::new(2, 2, 3, (0..12).map(|v| (v * 20) as f32).collect()).unwrap();
    let p = dir.path().join("sub/img.ppm");
    write_pnm(&t, &p).unwrap();
    assert_eq!(read_pnm(&p).unwrap(), t);
}

fn series() -> Vec<OccurrenceSeries> {
    vec![
        OccurrenceSeries { emotion: Emotion::Happy, group: Group::Healthy, counts: vec![1, 2, 3, 0], group_size: 3 },
        OccurrenceSeries { emotion: Emotion::Happy, group: Group::Impaired, counts: vec![0, 1, 7, 2], group_size: 7 },
    ]
}

#[test]
fn occurrence_csv_parses_back_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("occ.csv");
    write_occurrence_csv(&series(), &p).unwrap();
    let cols = parse_occurrence_csv(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(cols.len(), 2);
    for (s, (name, values)) in series().iter().zip(&cols) {
        assert_eq!(name, &format!("{}_{}", s.group, s.emotion));
        assert_eq!(values, &s.values());
    }
}

#[test]
fn svg_output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
    write_occurrence_svg(&series(), "happy", &a).unwrap();
    write_occurrence_svg(&series(), "happy", &b).unwrap();
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let text = String::from_utf8(text).unwrap();
    assert!(text.contains("stroke-dasharray"));
    assert!(!text.contains("NaN"));
}

#[test]
fn evolution_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let m = EvolutionMatrix::from_columns("p07", &[[0.1, 0.2, 0.3, 0.1, 0.2, 0.1], [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]]).unwrap();
    let p = dir.path().join("p07.csv");
    write_evolution_csv(&m, &p).unwrap();
    assert_eq!(read_evolution_csv(&p).unwrap(), m);
    fs::write(&p, "frame,happy\n1,1\n").unwrap();
    assert!(read_evolution_csv(&p).is_err());
}
