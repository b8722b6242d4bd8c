//! `WTS1` weight interchange file: 16-byte header (`"WTS1"`, rows u32,
//! cols u32, dtype u32) and little-endian binary32 values, row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const TENSOR_MAGIC: [u8; 4] = *b"WTS1";
pub const DTYPE_F32: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Tensor<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if rows.checked_mul(cols) != Some(data.len()) {
            return Err(Error::contract(format!("{} values for a {rows}x{cols} tensor", data.len())));
        }
        Ok(Tensor { rows, cols, data })
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let dim = |v: usize| u32::try_from(v).map_err(|_| Error::contract(format!("dimension {v} exceeds u32")));
        w.write_all(&TENSOR_MAGIC)?;
        w.write_all(&dim(self.rows)?.to_le_bytes())?;
        w.write_all(&dim(self.cols)?.to_le_bytes())?;
        w.write_all(&DTYPE_F32.to_le_bytes())?;
        for v in &self.data {
            let f = v.to_f32().ok_or_else(|| Error::contract("value does not convert to f32"))?;
            w.write_all(&f.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut head = [0u8; 16];
        r.read_exact(&mut head)?;
        if head[..4] != TENSOR_MAGIC {
            return Err(Error::format(format!("tensor magic {:02x?} is not \"WTS1\"", &head[..4])));
        }
        let field = |i: usize| u32::from_le_bytes(head[i..i + 4].try_into().unwrap());
        let (rows, cols, dtype) = (field(4) as usize, field(8) as usize, field(12));
        if dtype != DTYPE_F32 {
            return Err(Error::format(format!("tensor dtype tag {dtype} is not binary32 ({DTYPE_F32})")));
        }
        let n = rows.checked_mul(cols).ok_or_else(|| Error::format("tensor dimensions overflow"))?;
        let mut body = Vec::new();
        r.read_to_end(&mut body)?;
        if body.len() != n * 4 {
            return Err(Error::format(format!("tensor body has {} bytes, expected {}", body.len(), n * 4)));
        }
        let data = body
            .chunks_exact(4)
            .map(|c| T::of(f32::from_le_bytes(c.try_into().unwrap()) as f64))
            .collect();
        Ok(Tensor { rows, cols, data })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_and_round_trip() {
        let t = Tensor::new(2, 3, vec![1.0f32, -2.5, 0.0, 3.25, 1e-3, -7.0]).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..16], b"WTS1\x02\x00\x00\x00\x03\x00\x00\x00\x01\x00\x00\x00");
        assert_eq!(&buf[16..20], &1.0f32.to_le_bytes());
        assert_eq!(buf.len(), 16 + 24);
        assert_eq!(Tensor::<f32>::read_from(buf.as_slice()).unwrap(), t);
        let wide = Tensor::<f64>::read_from(buf.as_slice()).unwrap();
        assert_eq!(wide.data[3], 3.25);
    }

    #[test]
    fn rejects_bad_headers_and_lengths() {
        let t = Tensor::new(1, 2, vec![1.0f32, 2.0]).unwrap();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(Tensor::<f32>::read_from(bad.as_slice()), Err(Error::Format(_))));
        let mut bad = buf.clone();
        bad[12] = 2;
        assert!(matches!(Tensor::<f32>::read_from(bad.as_slice()), Err(Error::Format(_))));
        assert!(matches!(Tensor::<f32>::read_from(&buf[..buf.len() - 1]), Err(Error::Format(_))));
        assert!(matches!(Tensor::<f32>::read_from(&buf[..8]), Err(Error::Io(_))));
        assert!(Tensor::new(2, 2, vec![1.0f32]).is_err());
    }
}
