//! C ABI over the `emoscreen` library.
//!
//! Every fallible function returns an [`EsStatus`]. On failure a message is
//! stored per thread and can be copied out with [`es_last_error`]. Objects
//! crossing the boundary are opaque handles created by `*_new`/`*_load`
//! functions and released with the matching `*_free`. No function unwinds
//! into C; a panic becomes [`EsStatus::Panic`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use emoscreen::analytics::{Emotion, EvolutionMatrix, Group};
use emoscreen::classify::{load_model, ClassifierKind, TrainParams, TrainedModel};
use emoscreen::face::{detect_faces, Cascade, DetectParams};
use emoscreen::pipeline::{evaluate_all, split_dataset, Participant, SplitSpec, WindowSource};
use emoscreen::synth::{synth_cohort, CohortParams};
use emoscreen::tensor::{cost_ratio, cost_separable, LayerDims, Tensor};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Format = 4,
    BufferTooSmall = 5,
    Internal = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(EsStatus, String);

impl Failure {
    fn invalid(msg: impl Into<String>) -> Self {
        Failure(EsStatus::InvalidArgument, msg.into())
    }
}

macro_rules! failure_from {
    ($($ty:ty => $status:expr),* $(,)?) => {
        $(impl From<$ty> for Failure {
            fn from(e: $ty) -> Self {
                Failure($status, e.to_string())
            }
        })*
    };
}

failure_from! {
    emoscreen::tensor::TensorError => EsStatus::InvalidArgument,
    emoscreen::face::FaceError => EsStatus::InvalidArgument,
    emoscreen::analytics::AnalyticsError => EsStatus::InvalidArgument,
    emoscreen::pipeline::PipelineError => EsStatus::Internal,
}

impl From<emoscreen::classify::ClassifyError> for Failure {
    fn from(e: emoscreen::classify::ClassifyError) -> Self {
        use emoscreen::classify::ClassifyError as C;
        let status = match e {
            C::Io(_) => EsStatus::Io,
            C::Format(_) | C::Version(_) => EsStatus::Format,
            _ => EsStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

/// Runs `f`, recording the message of any failure or panic.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EsStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(p) => {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            set_error(format!("panic: {}", msg.unwrap_or_default()));
            EsStatus::Panic
        }
    }
}

fn out_ref<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: the caller passes either null or a valid, aligned, writable pointer.
    unsafe { p.as_mut() }.ok_or_else(|| Failure(EsStatus::NullPointer, format!("{name} is null")))
}

fn in_ref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    // SAFETY: the caller passes either null or a handle returned by this library.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(EsStatus::NullPointer, format!("{name} is null")))
}

fn in_slice<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(Failure(EsStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: the caller guarantees `len` readable elements at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn in_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(EsStatus::NullPointer, format!("{name} is null")));
    }
    // SAFETY: the caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|_| Failure::invalid(format!("{name} is not UTF-8")))
}

/// Copies `text` plus a NUL terminator into `buf`. `needed` receives the
/// full size including the terminator.
fn copy_out(text: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> Result<(), Failure> {
    let size = text.len() + 1;
    if !needed.is_null() {
        // SAFETY: checked non-null; caller provides a writable usize.
        unsafe { *needed = size };
    }
    if buf.is_null() || cap < size {
        return Err(Failure(EsStatus::BufferTooSmall, format!("need {size} bytes, buffer holds {cap}")));
    }
    // SAFETY: `buf` holds at least `size` bytes.
    unsafe {
        std::ptr::copy_nonoverlapping(text.as_ptr(), buf.cast::<u8>(), text.len());
        *buf.add(text.len()) = 0;
    }
    Ok(())
}

/// NUL-terminated library version. The pointer is static.
#[no_mangle]
pub extern "C" fn es_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the calling thread's last error message into `buf`. `needed`
/// (may be null) receives the size required including the terminator.
/// An empty string means the last call succeeded.
///
/// # Safety
/// `buf` must be null or hold `cap` writable bytes; `needed` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn es_last_error(buf: *mut c_char, cap: usize, needed: *mut usize) -> EsStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match copy_out(&msg, buf, cap, needed) {
        Ok(()) => EsStatus::Ok,
        Err(Failure(s, _)) => s,
    }
}

/// MAC counts of one convolution layer.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EsLayerCost {
    pub standard_macs: u64,
    pub depthwise_macs: u64,
    pub pointwise_macs: u64,
    pub separable_macs: u64,
    pub ratio: f64,
}

/// Standard against depthwise-separable cost for a `k x k` layer mapping
/// `c_in` to `c_out` channels at `h_out x w_out` output positions.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn es_layer_cost(k: u64, c_in: u64, c_out: u64, h_out: u64, w_out: u64, out: *mut EsLayerCost) -> EsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = cost_separable(&LayerDims::new(k, c_in, c_out, h_out, w_out))?;
        *out = EsLayerCost {
            standard_macs: r.standard_macs,
            depthwise_macs: r.depthwise_macs,
            pointwise_macs: r.pointwise_macs,
            separable_macs: r.separable_macs,
            ratio: r.ratio,
        };
        Ok(())
    })
}

/// Closed-form ratio `1/c_out + 1/k^2`.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn es_cost_ratio(k: u64, c_out: u64, out: *mut f64) -> EsStatus {
    guard(|| {
        *out_ref(out, "out")? = cost_ratio(k, c_out)?;
        Ok(())
    })
}

/// A detected face box in pixels.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EsBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
    pub score: f64,
}

/// Runs the built-in cascade over an 8-bit grayscale image (row-major,
/// `stride` bytes per row). Writes up to `cap` boxes, largest first, and
/// the total found to `count`.
///
/// # Safety
/// `pixels` must hold `stride * height` bytes; `boxes` must be null (with
/// `cap` 0) or hold `cap` writable entries; `count` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_detect_faces(
    pixels: *const u8,
    width: u32,
    height: u32,
    stride: u32,
    boxes: *mut EsBox,
    cap: usize,
    count: *mut usize,
) -> EsStatus {
    guard(|| {
        let count = out_ref(count, "count")?;
        let (w, h, stride) = (width as usize, height as usize, stride as usize);
        if w == 0 || h == 0 || stride < w {
            return Err(Failure::invalid(format!("bad geometry {w}x{h}, stride {stride}")));
        }
        let bytes = in_slice(pixels, stride * h, "pixels")?;
        let packed: Vec<u8> = bytes.chunks(stride).flat_map(|row| row[..w].iter().copied()).collect();
        let image = Tensor::from_u8(h, w, 1, &packed)?;
        let mut dets = detect_faces(&image, &Cascade::center_surround(), &DetectParams::default())?;
        dets.sort_by(|a, b| b.window.area().cmp(&a.window.area()).then(a.window.y.cmp(&b.window.y)).then(a.window.x.cmp(&b.window.x)));
        *count = dets.len();
        if cap > 0 {
            if boxes.is_null() {
                return Err(Failure(EsStatus::NullPointer, "boxes is null".into()));
            }
            // SAFETY: `boxes` holds `cap` writable entries.
            let slots = std::slice::from_raw_parts_mut(boxes, cap);
            for (slot, d) in slots.iter_mut().zip(&dets) {
                let win = d.window;
                *slot = EsBox { x: win.x as u32, y: win.y as u32, w: win.w as u32, h: win.h as u32, score: d.score };
            }
        }
        Ok(())
    })
}

/// Opaque trained classifier.
pub struct EsModel(TrainedModel);

/// Loads a model file written by `train-emotion` or `train-mci`.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_model_load(path: *const c_char, out: *mut *mut EsModel) -> EsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let model = load_model(PathBuf::from(in_str(path, "path")?))?;
        *out = Box::into_raw(Box::new(EsModel(model)));
        Ok(())
    })
}

/// Releases a model. Null is ignored.
///
/// # Safety
/// `model` must be null or a handle from [`es_model_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn es_model_free(model: *mut EsModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of classes and expected feature length.
///
/// # Safety
/// `model` must be a live handle; outputs must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn es_model_info(model: *const EsModel, n_classes: *mut usize, dim: *mut usize) -> EsStatus {
    guard(|| {
        let m = &in_ref(model, "model")?.0;
        *out_ref(n_classes, "n_classes")? = m.n_classes();
        *out_ref(dim, "dim")? = m.dim;
        Ok(())
    })
}

/// Copies the name of class `index` into `buf`.
///
/// # Safety
/// `model` must be a live handle; `buf` must be null or hold `cap` bytes;
/// `needed` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn es_model_class_name(
    model: *const EsModel,
    index: usize,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
) -> EsStatus {
    guard(|| {
        let m = &in_ref(model, "model")?.0;
        let name = m.class_names.get(index).ok_or_else(|| Failure::invalid(format!("class index {index} out of range")))?;
        copy_out(name, buf, cap, needed)
    })
}

/// Predicts the class index of one feature vector.
///
/// # Safety
/// `model` must be a live handle; `features` must hold `len` values;
/// `class_index` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_model_predict(model: *const EsModel, features: *const f64, len: usize, class_index: *mut usize) -> EsStatus {
    guard(|| {
        let m = &in_ref(model, "model")?.0;
        let out = out_ref(class_index, "class_index")?;
        *out = m.predict(in_slice(features, len, "features")?)?;
        Ok(())
    })
}

/// Per-class scores summing to one, written to `scores[0..n_classes]`.
///
/// # Safety
/// `model` must be a live handle; `features` must hold `len` values;
/// `scores` must hold `cap` writable values.
#[no_mangle]
pub unsafe extern "C" fn es_model_scores(
    model: *const EsModel,
    features: *const f64,
    len: usize,
    scores: *mut f64,
    cap: usize,
) -> EsStatus {
    guard(|| {
        let m = &in_ref(model, "model")?.0;
        let s = m.scores(in_slice(features, len, "features")?)?;
        if cap < s.len() {
            return Err(Failure(EsStatus::BufferTooSmall, format!("need {} scores, buffer holds {cap}", s.len())));
        }
        if scores.is_null() {
            return Err(Failure(EsStatus::NullPointer, "scores is null".into()));
        }
        std::ptr::copy_nonoverlapping(s.as_ptr(), scores, s.len());
        Ok(())
    })
}

/// Opaque cohort of participants with evolution matrices.
pub struct EsCohort(Vec<Participant>);

/// Built-in synthetic cohort presets.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EsPreset {
    HighSeparation = 0,
    MediumNoise = 1,
}

/// Generates a 61-participant synthetic cohort.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_cohort_synth(preset: EsPreset, seed: u64, out: *mut *mut EsCohort) -> EsStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let params = match preset {
            EsPreset::HighSeparation => CohortParams::high_separation(seed),
            EsPreset::MediumNoise => CohortParams::medium_noise(seed),
        };
        let cohort = synth_cohort(&params).map_err(Failure::invalid)?;
        *out = Box::into_raw(Box::new(EsCohort(cohort.into_iter().map(|s| Participant::new(s.record, s.matrix)).collect())));
        Ok(())
    })
}

/// Creates an empty cohort to fill with [`es_cohort_add`].
#[no_mangle]
pub extern "C" fn es_cohort_new() -> *mut EsCohort {
    Box::into_raw(Box::new(EsCohort(Vec::new())))
}

/// Adds a participant. `columns` holds `n_frames` distributions of six
/// values each, ordered happy, neutral, sad, angry, surprise, other.
/// `moca` assigns the group (25..=30 healthy, 20..=24 impaired).
///
/// # Safety
/// `cohort` must be a live handle; `id` NUL-terminated; `columns` must hold
/// `6 * n_frames` values.
#[no_mangle]
pub unsafe extern "C" fn es_cohort_add(
    cohort: *mut EsCohort,
    id: *const c_char,
    moca: i32,
    columns: *const f64,
    n_frames: usize,
) -> EsStatus {
    guard(|| {
        let c = out_ref(cohort, "cohort")?;
        let id = in_str(id, "id")?;
        let values = in_slice(columns, 6 * n_frames, "columns")?;
        let cols: Vec<[f64; 6]> = values.chunks_exact(6).map(|c| c.try_into().expect("chunk of six")).collect();
        let matrix = EvolutionMatrix::from_columns(id, &cols)?;
        let record = emoscreen::analytics::ParticipantRecord::new(id, Some(i64::from(moca)), None)?;
        c.0.push(Participant::new(record, matrix));
        Ok(())
    })
}

/// Participant counts of both groups.
///
/// # Safety
/// `cohort` must be a live handle; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn es_cohort_counts(cohort: *const EsCohort, healthy: *mut usize, impaired: *mut usize) -> EsStatus {
    guard(|| {
        let c = &in_ref(cohort, "cohort")?.0;
        *out_ref(healthy, "healthy")? = c.iter().filter(|p| p.group() == Group::Healthy).count();
        *out_ref(impaired, "impaired")? = c.iter().filter(|p| p.group() == Group::Impaired).count();
        Ok(())
    })
}

/// Releases a cohort. Null is ignored.
///
/// # Safety
/// `cohort` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn es_cohort_free(cohort: *mut EsCohort) {
    if !cohort.is_null() {
        drop(Box::from_raw(cohort));
    }
}

/// Per-group split sizes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EsSplit {
    pub train_healthy: usize,
    pub train_impaired: usize,
    pub test_healthy: usize,
    pub test_impaired: usize,
    pub seed: u64,
}

/// Test accuracy (%) and confusion counts of one classifier.
/// `confusion[t * 2 + p]` counts participants of true group `t` predicted
/// as `p` (0 healthy, 1 impaired).
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EsClassifierResult {
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub confusion: [usize; 4],
}

/// Trains LDA, SVM, KNN and decision tree on the training split with a
/// `window`-frame feature window chosen from training data only, and
/// scores them on the test split. `results[0..4]` follow that order.
///
/// # Safety
/// `cohort` must be a live handle; `split` readable; `results` must hold
/// four writable entries.
#[no_mangle]
pub unsafe extern "C" fn es_cohort_evaluate(
    cohort: *const EsCohort,
    split: *const EsSplit,
    window: usize,
    results: *mut EsClassifierResult,
) -> EsStatus {
    guard(|| {
        let c = &in_ref(cohort, "cohort")?.0;
        let s = in_ref(split, "split")?;
        if results.is_null() {
            return Err(Failure(EsStatus::NullPointer, "results is null".into()));
        }
        let spec = SplitSpec::fixed_counts(s.train_healthy, s.train_impaired, s.test_healthy, s.test_impaired, s.seed);
        let (train, test) = split_dataset(c, &spec)?;
        let (report, _) = evaluate_all(&train, &test, &ClassifierKind::ALL, window, WindowSource::Training, &TrainParams::default())?;
        // SAFETY: `results` holds four entries.
        let slots = std::slice::from_raw_parts_mut(results, ClassifierKind::ALL.len());
        for (slot, r) in slots.iter_mut().zip(&report.results) {
            *slot = EsClassifierResult {
                accuracy: r.accuracy,
                correct: r.correct,
                total: r.total,
                confusion: [r.confusion[0][0], r.confusion[0][1], r.confusion[1][0], r.confusion[1][1]],
            };
        }
        Ok(())
    })
}

/// Index of `name` in the emotion order used by [`es_cohort_add`], or -1.
///
/// # Safety
/// `name` must be null or NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn es_emotion_index(name: *const c_char) -> i32 {
    in_str(name, "name").ok().and_then(|n| n.parse::<Emotion>().ok()).map_or(-1, |e| e.index() as i32)
}
