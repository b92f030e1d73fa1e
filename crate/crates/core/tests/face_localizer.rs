use emoscreen::face::{detect_faces, largest_face, scan_windows, Cascade, DetectParams, HaarStump, IntegralImage, Window};
use emoscreen::tensor::Tensor;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BACKGROUND: f32 = 40.0;
const BRIGHT: f32 = 220.0;

fn canvas(w: usize, h: usize) -> Tensor {
    Tensor::filled(h, w, 1, BACKGROUND).unwrap()
}

fn plant(img: &mut Tensor, x: usize, y: usize, side: usize) {
    for yy in y..y + side {
        for xx in x..x + side {
            img.set(yy, xx, 0, BRIGHT);
        }
    }
}

fn direct_sum(img: &Tensor, r: &Window) -> f64 {
    let mut s = 0.0;
    for y in r.y..r.y + r.h {
        for x in r.x..r.x + r.w {
            s += img.get(y, x, 0) as f64;
        }
    }
    s
}

/// Cascade decision recomputed from raw pixels, without the integral image.
fn oracle_accepts(img: &Tensor, cascade: &Cascade, win: &Window) -> bool {
    let n = win.area() as f64;
    let mean = direct_sum(img, win) / n;
    let mut var = 0.0;
    for y in win.y..win.y + win.h {
        for x in win.x..win.x + win.w {
            var += (img.get(y, x, 0) as f64 - mean).powi(2);
        }
    }
    let sigma = (var / n).sqrt().max(1.0);
    let stump_value = |st: &HaarStump| {
        let f: f64 = st
            .rectangles
            .iter()
            .map(|r| {
                let px = r.in_window(win);
                r.weight * direct_sum(img, &px) / px.area() as f64
            })
            .sum::<f64>()
            / sigma;
        if f < st.threshold {
            st.left_value
        } else {
            st.right_value
        }
    };
    cascade.stages.iter().all(|stage| stage.stumps.iter().map(stump_value).sum::<f64>() >= stage.stage_threshold)
}

fn oracle_scan(img: &Tensor, cascade: &Cascade, p: &DetectParams) -> Vec<Window> {
    let mut out = Vec::new();
    let mut scale = 1.0f64;
    let mut last = (0, 0);
    loop {
        let w = (cascade.base_window.0 as f64 * scale).round() as usize;
        let h = (cascade.base_window.1 as f64 * scale).round() as usize;
        if w > img.width() || h > img.height() {
            break;
        }
        if w.min(h) >= p.min_size && (w, h) != last {
            last = (w, h);
            let mut y = 0;
            while y + h <= img.height() {
                let mut x = 0;
                while x + w <= img.width() {
                    let win = Window::new(x, y, w, h);
                    if oracle_accepts(img, cascade, &win) {
                        out.push(win);
                    }
                    x += p.step;
                }
                y += p.step;
            }
        }
        scale *= p.scale_factor;
    }
    out
}

#[test]
fn rect_sums_match_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (w, h) = (37, 29);
    let img = Tensor::new(h, w, 1, (0..w * h).map(|_| rng.random_range(0..=255u8) as f32).collect()).unwrap();
    let ii = IntegralImage::new(&img).unwrap();
    assert_eq!(ii.rect_sum(&Window::new(0, 0, w, h)).unwrap(), direct_sum(&img, &Window::new(0, 0, w, h)));
    for _ in 0..1000 {
        let x = rng.random_range(0..w);
        let y = rng.random_range(0..h);
        let r = Window::new(x, y, rng.random_range(1..=w - x), rng.random_range(1..=h - y));
        assert_eq!(ii.rect_sum(&r).unwrap(), direct_sum(&img, &r));
    }
}

#[test]
fn planted_square_yields_one_detection_at_its_centre() {
    let cascade = Cascade::center_surround();
    let params = DetectParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let side = rng.random_range(14..24);
        let (x, y) = (rng.random_range(20..60), rng.random_range(20..40));
        let mut img = canvas(120, 96);
        plant(&mut img, x, y, side);
        let ii = IntegralImage::new(&img).unwrap();
        let raw: Vec<Window> = scan_windows(&ii, &cascade, &params).unwrap().iter().map(|d| d.window).collect();
        assert_eq!(raw, oracle_scan(&img, &cascade, &params));
        let dets = detect_faces(&img, &cascade, &params).unwrap();
        assert_eq!(dets.len(), 1, "{dets:?}");
        let c = (x as f64 + side as f64 / 2.0, y as f64 + side as f64 / 2.0);
        assert!(dets[0].window.contains_point(c.0, c.1));
    }
}

#[test]
fn flat_image_oracle_agrees() {
    let img = canvas(60, 50);
    let cascade = Cascade::center_surround();
    let params = DetectParams::default();
    assert!(oracle_scan(&img, &cascade, &params).is_empty());
    assert!(detect_faces(&img, &cascade, &params).unwrap().is_empty());
}

#[test]
fn two_separated_squares_give_two_detections() {
    let mut img = canvas(200, 100);
    plant(&mut img, 20, 30, 20);
    plant(&mut img, 140, 40, 18);
    let dets = detect_faces(&img, &Cascade::center_surround(), &DetectParams::default()).unwrap();
    assert_eq!(dets.len(), 2, "{dets:?}");
    let mut centres: Vec<bool> = vec![false, false];
    for d in &dets {
        centres[0] |= d.window.contains_point(30.0, 40.0);
        centres[1] |= d.window.contains_point(149.0, 49.0);
    }
    assert_eq!(centres, vec![true, true]);
    let big = largest_face(&dets).unwrap();
    assert!(big.window.contains_point(30.0, 40.0));
}

#[test]
fn shifting_pattern_by_step_shifts_detection() {
    let params = DetectParams::default();
    let cascade = Cascade::center_surround();
    let mut a = canvas(120, 100);
    plant(&mut a, 40, 30, 20);
    let mut b = canvas(120, 100);
    plant(&mut b, 40 + params.step, 30 + params.step, 20);
    let da = detect_faces(&a, &cascade, &params).unwrap();
    let db = detect_faces(&b, &cascade, &params).unwrap();
    assert_eq!(da.len(), 1);
    assert_eq!(db.len(), 1);
    assert_eq!(db[0].window.x, da[0].window.x + params.step);
    assert_eq!(db[0].window.y, da[0].window.y + params.step);
    assert_eq!((db[0].window.w, db[0].window.h), (da[0].window.w, da[0].window.h));
}

#[test]
fn removing_a_stage_never_shrinks_accepts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut img = Tensor::new(64, 64, 1, (0..64 * 64).map(|_| rng.random_range(0..80u8) as f32).collect()).unwrap();
    plant(&mut img, 20, 22, 16);
    let full = Cascade::center_surround();
    let mut first_only = full.clone();
    first_only.stages.truncate(1);
    let params = DetectParams { step: 1, ..Default::default() };
    let ii = IntegralImage::new(&img).unwrap();
    let strict: Vec<Window> = scan_windows(&ii, &full, &params).unwrap().iter().map(|d| d.window).collect();
    let loose: Vec<Window> = scan_windows(&ii, &first_only, &params).unwrap().iter().map(|d| d.window).collect();
    assert!(!strict.is_empty());
    assert!(strict.iter().all(|w| loose.contains(w)));
}
