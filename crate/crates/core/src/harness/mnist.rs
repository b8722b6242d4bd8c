use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Images and labels, row-major `n × pixels`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub pixels: usize,
    pub images: Vec<u8>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn new(pixels: usize, images: Vec<u8>, labels: Vec<u8>) -> Result<Self> {
        if pixels == 0 || images.len() != pixels * labels.len() {
            return Err(Error::contract(format!(
                "{} image bytes do not hold {} images of {pixels} pixels",
                images.len(),
                labels.len()
            )));
        }
        Ok(Dataset { pixels, images, labels })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn image(&self, i: usize) -> &[u8] {
        &self.images[i * self.pixels..(i + 1) * self.pixels]
    }

    pub fn label(&self, i: usize) -> u32 {
        self.labels[i] as u32
    }

    /// The first `n` samples (all of them if `n` exceeds the length).
    pub fn head(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        Dataset {
            pixels: self.pixels,
            images: self.images[..n * self.pixels].to_vec(),
            labels: self.labels[..n].to_vec(),
        }
    }
}

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::format(format!("{what}: header truncated")))
}

/// Parses an IDX3 image file into `(count, rows * cols, pixels)`.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>)> {
    let magic = be_u32(bytes, 0, "images")?;
    if magic != IMAGES_MAGIC {
        return Err(Error::format(format!("images: magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}")));
    }
    let n = be_u32(bytes, 4, "images")? as usize;
    let rows = be_u32(bytes, 8, "images")? as usize;
    let cols = be_u32(bytes, 12, "images")? as usize;
    let size = n
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| Error::format("images: dimensions overflow"))?;
    let payload = &bytes[16..];
    if payload.len() != size {
        return Err(Error::format(format!(
            "images: {} payload bytes for {n} images of {rows}x{cols}",
            payload.len()
        )));
    }
    Ok((n, rows * cols, payload.to_vec()))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>> {
    let magic = be_u32(bytes, 0, "labels")?;
    if magic != LABELS_MAGIC {
        return Err(Error::format(format!("labels: magic {magic:#010x}, expected {LABELS_MAGIC:#010x}")));
    }
    let n = be_u32(bytes, 4, "labels")? as usize;
    let payload = &bytes[8..];
    if payload.len() != n {
        return Err(Error::format(format!("labels: {} payload bytes for {n} labels", payload.len())));
    }
    if let Some(i) = payload.iter().position(|&l| l > 9) {
        return Err(Error::format(format!("labels: label {} at index {i} is not a digit", payload[i])));
    }
    Ok(payload.to_vec())
}

pub fn load_mnist_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<Dataset> {
    let (n, pixels, images) = parse_idx_images(&fs::read(images_path)?)?;
    let labels = parse_idx_labels(&fs::read(labels_path)?)?;
    if labels.len() != n {
        return Err(Error::format(format!("{n} images but {} labels", labels.len())));
    }
    if n == 0 {
        return Err(Error::format("dataset is empty"));
    }
    Dataset::new(pixels, images, labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture() -> (Vec<u8>, Vec<u8>) {
        let mut img = vec![0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2];
        img.extend([0, 255, 17, 128, 1, 2, 3, 4]);
        let mut lab = vec![0, 0, 8, 1, 0, 0, 0, 2];
        lab.extend([7, 0]);
        (img, lab)
    }

    #[test]
    fn hand_built_fixture() {
        let (img, lab) = fixture();
        let (n, pixels, data) = parse_idx_images(&img).unwrap();
        assert_eq!((n, pixels), (2, 4));
        assert_eq!(data, vec![0, 255, 17, 128, 1, 2, 3, 4]);
        assert_eq!(parse_idx_labels(&lab).unwrap(), vec![7, 0]);

        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("i"), &img).unwrap();
        std::fs::write(dir.path().join("l"), &lab).unwrap();
        let ds = load_mnist_idx(dir.path().join("i"), dir.path().join("l")).unwrap();
        assert_eq!(ds.image(1), &[1, 2, 3, 4]);
        assert_eq!(ds.label(0), 7);
        assert_eq!(ds.head(1).len(), 1);
    }

    #[test]
    fn wrong_magic() {
        let (img, lab) = fixture();
        let mut swapped = img.clone();
        swapped[3] = 1;
        assert!(matches!(parse_idx_images(&swapped), Err(Error::Format(_))));
        assert!(matches!(parse_idx_labels(&img), Err(Error::Format(_))));
        assert!(parse_idx_labels(&lab).is_ok());
    }

    #[test]
    fn truncated_payload_and_count_mismatch() {
        let (img, lab) = fixture();
        assert!(matches!(parse_idx_images(&img[..img.len() - 1]), Err(Error::Format(_))));
        assert!(matches!(parse_idx_images(&img[..10]), Err(Error::Format(_))));
        let mut short = lab.clone();
        short[7] = 3;
        assert!(matches!(parse_idx_labels(&short), Err(Error::Format(_))));
    }
}
