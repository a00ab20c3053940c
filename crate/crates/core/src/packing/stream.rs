//! Raw DEFLATE (RFC 1951) compression at maximum level.

use flate2::{Compress, Compression, Decompress, FlushCompress, FlushDecompress, Status};

use super::PackError;

/// Compresses to a raw DEFLATE stream at the highest compression level.
pub fn deflate(bytes: &[u8]) -> Vec<u8> {
    let mut c = Compress::new(Compression::best(), false);
    let mut out = Vec::with_capacity(bytes.len() / 2 + 64);
    let mut buf = vec![0u8; 32 * 1024];
    loop {
        let before_out = c.total_out() as usize;
        let consumed = c.total_in() as usize;
        let status = c
            .compress(&bytes[consumed..], &mut buf, FlushCompress::Finish)
            .expect("deflate cannot fail on in-memory buffers");
        out.extend_from_slice(&buf[..c.total_out() as usize - before_out]);
        if status == Status::StreamEnd {
            break;
        }
    }
    out
}

/// Decompresses a raw DEFLATE stream that must span the whole input.
pub fn inflate(bytes: &[u8]) -> Result<Vec<u8>, PackError> {
    let (out, used) = inflate_prefix(bytes)?;
    if used != bytes.len() {
        return Err(PackError::CorruptStream(format!(
            "trailing garbage: {} of {} bytes consumed",
            used,
            bytes.len()
        )));
    }
    Ok(out)
}

/// Decompresses a raw DEFLATE stream sitting at the start of `bytes`,
/// returning the payload and how many input bytes the stream occupied.
/// Lets packets be decoded out of a concatenated buffer.
pub fn inflate_prefix(bytes: &[u8]) -> Result<(Vec<u8>, usize), PackError> {
    let mut d = Decompress::new(false);
    let mut out = Vec::new();
    let mut buf = vec![0u8; 32 * 1024];
    loop {
        let before_out = d.total_out() as usize;
        let before_in = d.total_in() as usize;
        // Finish requires room for all remaining output; with a bounded
        // buffer the stream's own final-block marker ends the loop instead.
        let status = d
            .decompress(&bytes[before_in..], &mut buf, FlushDecompress::None)
            .map_err(|e| PackError::CorruptStream(e.to_string()))?;
        out.extend_from_slice(&buf[..d.total_out() as usize - before_out]);
        match status {
            Status::StreamEnd => return Ok((out, d.total_in() as usize)),
            Status::Ok | Status::BufError => {
                let no_progress =
                    d.total_in() as usize == before_in && d.total_out() as usize == before_out;
                if no_progress {
                    return Err(PackError::CorruptStream("unexpected end of stream".into()));
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn zeros_compress_hard() {
        let data = vec![0u8; 10_000];
        let z = deflate(&data);
        assert!(z.len() < 100, "compressed {} bytes", z.len());
        assert_eq!(inflate(&z).unwrap(), data);
    }

    #[test]
    fn random_bytes_roundtrip() {
        let mut rng = crate::rng::rng_from(&[61]);
        let data: Vec<u8> = (0..4096).map(|_| rng.gen()).collect();
        assert_eq!(inflate(&deflate(&data)).unwrap(), data);
    }

    #[test]
    fn payload_larger_than_working_buffer() {
        let mut rng = crate::rng::rng_from(&[62]);
        let data: Vec<u8> = (0..200_000).map(|_| rng.gen_range(0..4u8)).collect();
        assert_eq!(inflate(&deflate(&data)).unwrap(), data);
    }

    #[test]
    fn empty_roundtrip() {
        let z = deflate(&[]);
        assert_eq!(inflate(&z).unwrap(), Vec::<u8>::new());
    }

    #[test]
    fn invalid_stream_rejected() {
        assert!(matches!(inflate(&[0x07, 0xff, 0x12]), Err(PackError::CorruptStream(_))));
    }

    #[test]
    fn prefix_decode_from_concatenation() {
        let a = vec![1u8; 1000];
        let b: Vec<u8> = (0..255).collect();
        let mut stream = deflate(&a);
        let a_len = stream.len();
        stream.extend_from_slice(&deflate(&b));
        let (out_a, used_a) = inflate_prefix(&stream).unwrap();
        assert_eq!(out_a, a);
        assert_eq!(used_a, a_len);
        let (out_b, _) = inflate_prefix(&stream[used_a..]).unwrap();
        assert_eq!(out_b, b);
    }
}
