//! `NWF1` weight container.
//!
//! Layout (all integers u32 little-endian):
//!
//! ```text
//! "NWF1" | count | { name_len | name (UTF-8) | rank | dims[rank] | f32 LE * prod(dims) } * count
//! ```

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{NetError, Result};

pub const NWF1_MAGIC: &[u8; 4] = b"NWF1";

/// A named n-dimensional array of `f32`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightTensor {
    pub dims: Vec<usize>,
    pub values: Vec<f32>,
}

impl WeightTensor {
    pub fn new(dims: Vec<usize>, values: Vec<f32>) -> Result<Self> {
        let expected: usize = dims.iter().product();
        if expected != values.len() {
            return Err(NetError::Format(format!("tensor dims {dims:?} need {expected} values, got {}", values.len())));
        }
        Ok(Self { dims, values })
    }
}

/// Name-to-tensor map. Iteration (and therefore serialization) order is by name.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WeightContainer {
    tensors: BTreeMap<String, WeightTensor>,
}

impl WeightContainer {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a tensor; a repeated name is an error.
    pub fn insert(&mut self, name: impl Into<String>, tensor: WeightTensor) -> Result<()> {
        let name = name.into();
        if self.tensors.contains_key(&name) {
            return Err(NetError::DuplicateTensor(name));
        }
        self.tensors.insert(name, tensor);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&WeightTensor> {
        self.tensors.get(name)
    }

    pub fn len(&self) -> usize {
        self.tensors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tensors.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &WeightTensor)> {
        self.tensors.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out).expect("writing to a Vec cannot fail");
        out
    }

    pub fn write_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        w.write_all(NWF1_MAGIC)?;
        w.write_all(&(self.tensors.len() as u32).to_le_bytes())?;
        for (name, t) in &self.tensors {
            w.write_all(&(name.len() as u32).to_le_bytes())?;
            w.write_all(name.as_bytes())?;
            w.write_all(&(t.dims.len() as u32).to_le_bytes())?;
            for &d in &t.dims {
                w.write_all(&(d as u32).to_le_bytes())?;
            }
            for v in &t.values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        Ok(())
    }

    /// Parses a container from the front of `bytes`, returning it together
    /// with the number of bytes consumed.
    pub fn parse_prefix(bytes: &[u8]) -> Result<(Self, usize)> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(4)? != NWF1_MAGIC {
            return Err(NetError::Format("bad magic, expected NWF1".into()));
        }
        let count = cur.u32()? as usize;
        let mut container = WeightContainer::new();
        for _ in 0..count {
            let name_len = cur.u32()? as usize;
            let name =
                std::str::from_utf8(cur.take(name_len)?).map_err(|_| NetError::Format("tensor name is not UTF-8".into()))?.to_string();
            let rank = cur.u32()? as usize;
            let dims = (0..rank).map(|_| cur.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let n = dims
                .iter()
                .try_fold(1usize, |acc, &d| acc.checked_mul(d))
                .ok_or_else(|| NetError::Format(format!("tensor {name} dims overflow")))?;
            let raw = cur.take(n.checked_mul(4).ok_or_else(|| NetError::Format("payload overflow".into()))?)?;
            let values = raw.chunks_exact(4).map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]])).collect();
            container.insert(name, WeightTensor { dims, values })?;
        }
        Ok((container, cur.pos))
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (c, used) = Self::parse_prefix(bytes)?;
        if used != bytes.len() {
            return Err(NetError::Format(format!("{} trailing bytes after NWF1 payload", bytes.len() - used)));
        }
        Ok(c)
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len()).ok_or(NetError::Truncated(self.pos))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

pub fn load_weights(path: impl AsRef<Path>) -> Result<WeightContainer> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path).and_then(|mut f| f.read_to_end(&mut bytes)).map_err(|e| NetError::Io(format!("{}: {e}", path.display())))?;
    WeightContainer::from_bytes(&bytes)
}

pub fn save_weights(weights: &WeightContainer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, weights.to_bytes()).map_err(|e| NetError::Io(format!("{}: {e}", path.display())))
}
