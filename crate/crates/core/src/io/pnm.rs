use std::path::{Path, PathBuf};

use super::{io_err, write_file, IoError, Result};
use crate::tensor::Tensor;

/// A decoded frame and the file it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub path: PathBuf,
    pub image: Tensor,
}

/// Decodes binary `P5` (gray) or `P6` (RGB) with maxval ≤ 255.
pub fn decode_pnm(bytes: &[u8]) -> std::result::Result<Tensor, String> {
    let channels = match bytes.get(..2) {
        Some(b"P5") => 1,
        Some(b"P6") => 3,
        _ => return Err("unsupported magic (expected binary P5 or P6)".into()),
    };
    let mut pos = 2;
    let mut fields = [0usize; 3];
    for field in fields.iter_mut() {
        loop {
            match bytes.get(pos) {
                Some(b'#') => {
                    while bytes.get(pos).is_some_and(|&b| b != b'\n') {
                        pos += 1;
                    }
                }
                Some(b) if b.is_ascii_whitespace() => pos += 1,
                Some(_) => break,
                None => return Err("truncated header".into()),
            }
        }
        let start = pos;
        while bytes.get(pos).is_some_and(u8::is_ascii_digit) {
            pos += 1;
        }
        let text = std::str::from_utf8(&bytes[start..pos]).unwrap_or("");
        *field = text.parse().map_err(|_| format!("bad header field at byte {start}"))?;
    }
    if !bytes.get(pos).is_some_and(u8::is_ascii_whitespace) {
        return Err("header must end with a single whitespace byte".into());
    }
    pos += 1;
    let [width, height, maxval] = fields;
    if maxval == 0 || maxval > 255 {
        return Err(format!("maxval {maxval} unsupported (need 1..=255)"));
    }
    let n = width.checked_mul(height).and_then(|v| v.checked_mul(channels)).ok_or("image too large")?;
    let data = bytes.get(pos..pos + n).ok_or_else(|| format!("expected {n} pixel bytes, found {}", bytes.len().saturating_sub(pos)))?;
    Tensor::from_u8(height, width, channels, data).map_err(|e| e.to_string())
}

/// Encodes a 1- or 3-channel tensor, rounding and clamping values to 0..=255.
pub fn encode_pnm(image: &Tensor) -> std::result::Result<Vec<u8>, String> {
    let magic = match image.channels() {
        1 => "P5",
        3 => "P6",
        c => return Err(format!("cannot encode {c} channels as PGM/PPM")),
    };
    let mut out = format!("{magic}\n{} {}\n255\n", image.width(), image.height()).into_bytes();
    out.extend(image.values().iter().map(|v| v.round().clamp(0.0, 255.0) as u8));
    Ok(out)
}

pub fn read_pnm(path: &Path) -> Result<Tensor> {
    let bytes = std::fs::read(path).map_err(|e| io_err(path, e))?;
    decode_pnm(&bytes).map_err(|detail| IoError::Format { path: path.to_path_buf(), detail })
}

pub fn write_pnm(image: &Tensor, path: &Path) -> Result<()> {
    let bytes = encode_pnm(image).map_err(|detail| IoError::Format { path: path.to_path_buf(), detail })?;
    write_file(path, bytes)
}

fn is_pnm(path: &Path) -> bool {
    path.extension().and_then(|e| e.to_str()).is_some_and(|e| matches!(e.to_ascii_lowercase().as_str(), "pgm" | "ppm" | "pnm"))
}

/// Every `.pgm`/`.ppm`/`.pnm` file in `dir`, in lexicographic file-name
/// order. All frames must share one shape.
pub fn load_frames(dir: &Path) -> Result<Vec<Frame>> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| io_err(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && is_pnm(p))
        .collect();
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if paths.is_empty() {
        return Err(IoError::Format { path: dir.to_path_buf(), detail: "no PGM/PPM frames found".into() });
    }
    let mut frames: Vec<Frame> = Vec::with_capacity(paths.len());
    for path in paths {
        let image = read_pnm(&path)?;
        if let Some(first) = frames.first() {
            if first.image.shape() != image.shape() {
                return Err(IoError::Inconsistent {
                    path,
                    detail: format!("shape {:?} differs from {:?} of {}", image.shape(), first.image.shape(), first.path.display()),
                });
            }
        }
        frames.push(Frame { path, image });
    }
    Ok(frames)
}
