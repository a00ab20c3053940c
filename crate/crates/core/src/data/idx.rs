//! IDX container parsing (the MNIST file format): big-endian magic and
//! dimensions, u8 payload. Plain or gzip-wrapped files are accepted.

use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use flate2::bufread::GzDecoder;

use super::{DataError, Dataset};

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

fn open_maybe_gz(path: &Path) -> Result<Box<dyn Read>, DataError> {
    let file = File::open(path)?;
    let mut reader = BufReader::new(file);
    let mut head = [0u8; 2];
    let n = reader.read(&mut head)?;
    // Re-open rather than seeking: the gzip reader needs the stream from 0.
    let fresh = BufReader::new(File::open(path)?);
    if n == 2 && head == [0x1f, 0x8b] {
        Ok(Box::new(GzDecoder::new(fresh)))
    } else {
        Ok(Box::new(fresh))
    }
}

fn read_u32_be(r: &mut dyn Read) -> Result<u32, DataError> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf).map_err(|_| DataError::Truncated { need: 4, have: 0 })?;
    Ok(u32::from_be_bytes(buf))
}

fn read_payload(r: &mut dyn Read, need: usize) -> Result<Vec<u8>, DataError> {
    let mut buf = Vec::with_capacity(need);
    r.take(need as u64).read_to_end(&mut buf)?;
    if buf.len() != need {
        return Err(DataError::Truncated { need, have: buf.len() });
    }
    Ok(buf)
}

/// Loads an image/label IDX pair into a dataset with pixels scaled by 1/255.
pub fn load_idx(images: &Path, labels: &Path) -> Result<Dataset, DataError> {
    let mut ir = open_maybe_gz(images)?;
    let magic = read_u32_be(ir.as_mut())?;
    if magic != IMAGES_MAGIC {
        return Err(DataError::BadMagic { got: magic, expected: IMAGES_MAGIC });
    }
    let n = read_u32_be(ir.as_mut())? as usize;
    let rows = read_u32_be(ir.as_mut())? as usize;
    let cols = read_u32_be(ir.as_mut())? as usize;
    let pixels = read_payload(ir.as_mut(), n * rows * cols)?;

    let mut lr = open_maybe_gz(labels)?;
    let magic = read_u32_be(lr.as_mut())?;
    if magic != LABELS_MAGIC {
        return Err(DataError::BadMagic { got: magic, expected: LABELS_MAGIC });
    }
    let ln = read_u32_be(lr.as_mut())? as usize;
    if ln != n {
        return Err(DataError::DimMismatch { images: n, labels: ln });
    }
    let label_bytes = read_payload(lr.as_mut(), ln)?;

    let features: Vec<f32> = pixels.iter().map(|&p| p as f32 / 255.0).collect();
    Dataset::new(features, rows * cols, label_bytes)
}
