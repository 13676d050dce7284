//! Named-tensor container.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! b"LBNT"  u32 version  u32 count
//! count x { u32 name_len  name (UTF-8)  u32 ndim  ndim x u64 dim  f64 values (row-major) }
//! ```

use std::io::{self, Read, Write};

use crate::autodiff::Tensor;

const MAGIC: &[u8; 4] = b"LBNT";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn write_named_tensors<W: Write>(w: &mut W, entries: &[(&str, &Tensor)]) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(entries.len() as u32).to_le_bytes())?;
    for (name, t) in entries {
        w.write_all(&(name.len() as u32).to_le_bytes())?;
        w.write_all(name.as_bytes())?;
        w.write_all(&(t.shape().len() as u32).to_le_bytes())?;
        for &d in t.shape() {
            w.write_all(&(d as u64).to_le_bytes())?;
        }
        for v in t.values() {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut b = [0; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

pub fn read_named_tensors<R: Read>(r: &mut R) -> io::Result<Vec<(String, Tensor)>> {
    let mut magic = [0; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(invalid("not a named-tensor file"));
    }
    let version = read_u32(r)?;
    if version != CHECKPOINT_VERSION {
        return Err(invalid(format!("unsupported format version {version}")));
    }
    let count = read_u32(r)?;
    let mut out = Vec::new();
    for _ in 0..count {
        let len = read_u32(r)? as usize;
        let mut name = vec![0; len];
        r.read_exact(&mut name)?;
        let name = String::from_utf8(name).map_err(|_| invalid("tensor name is not UTF-8"))?;
        let ndim = read_u32(r)? as usize;
        if ndim > 2 {
            return Err(invalid(format!("'{name}' has {ndim} dimensions")));
        }
        let mut shape = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            let mut b = [0; 8];
            r.read_exact(&mut b)?;
            shape.push(u64::from_le_bytes(b) as usize);
        }
        let n: usize = shape.iter().product();
        let mut raw = vec![0; n * 8];
        r.read_exact(&mut raw)?;
        let data = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8"))).collect();
        let t = Tensor::new(&shape, data).map_err(|e| invalid(e.to_string()))?;
        out.push((name, t));
    }
    Ok(out)
}
