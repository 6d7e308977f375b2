//! Binary tensor file format.
//!
//! Layout, all integers and floats little-endian:
//!
//! | bytes      | content                         |
//! |------------|---------------------------------|
//! | 4          | magic `TNSR`                    |
//! | 1          | version, currently `1`          |
//! | 4          | order `m` as `u32`              |
//! | 4·m        | shape entries as `u32`          |
//! | 8·Π n_j    | data as `f64`, row-major        |

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::tensor::DenseTensor;

pub const MAGIC: &[u8; 4] = b"TNSR";
pub const VERSION: u8 = 1;

pub fn write_tensor<W: Write>(mut w: W, t: &DenseTensor) -> Result<()> {
    w.write_all(&encode_tensor(t)?)?;
    Ok(())
}

pub fn encode_tensor(t: &DenseTensor) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(9 + 4 * t.order() + 8 * t.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.extend_from_slice(&to_u32(t.order(), "order")?.to_le_bytes());
    for &n in t.shape() {
        out.extend_from_slice(&to_u32(n, "shape")?.to_le_bytes());
    }
    for x in t.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    Ok(out)
}

fn to_u32(n: usize, field: &str) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::Format(format!("{field} value {n} exceeds u32")))
}

pub fn read_tensor<R: Read>(mut r: R) -> Result<DenseTensor> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    decode_tensor(&bytes)
}

pub fn decode_tensor(bytes: &[u8]) -> Result<DenseTensor> {
    let mut cur = Cursor { bytes, pos: 0 };
    if cur.take(4, "magic")? != MAGIC {
        return Err(Error::Format("magic: expected \"TNSR\"".into()));
    }
    let version = cur.take(1, "version")?[0];
    if version != VERSION {
        return Err(Error::Format(format!(
            "version: unsupported value {version}"
        )));
    }
    let order = cur.u32("order")? as usize;
    if order == 0 {
        return Err(Error::Format("order: must be at least 1".into()));
    }
    let mut shape = Vec::with_capacity(order.min(64));
    for _ in 0..order {
        let n = cur.u32("shape")? as usize;
        if n == 0 {
            return Err(Error::Format("shape: zero dimension".into()));
        }
        shape.push(n);
    }
    let len = shape
        .iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .ok_or_else(|| Error::Format("shape: total size overflows".into()))?;
    let remaining = bytes.len() - cur.pos;
    if len.checked_mul(8) != Some(remaining) {
        return Err(Error::Format(format!(
            "data: shape {shape:?} needs {len} values but {remaining} bytes follow the header"
        )));
    }
    let data = bytes[cur.pos..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    DenseTensor::new(shape, data)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize, field: &str) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(Error::Format(format!("{field}: unexpected end of file")));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, field: &str) -> Result<u32> {
        let b = self.take(4, field)?;
        Ok(u32::from_le_bytes(b.try_into().expect("4 bytes")))
    }
}
