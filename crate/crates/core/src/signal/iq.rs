//! Raw IQ files: interleaved little-endian `f32` pairs (I then Q), no header.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex32;

use crate::error::{Error, Result};

pub fn decode_iq(bytes: &[u8]) -> Result<Vec<Complex32>> {
    if !bytes.len().is_multiple_of(4) {
        return Err(Error::MalformedFile(format!(
            "{} bytes is not a whole number of f32 values",
            bytes.len()
        )));
    }
    if !bytes.len().is_multiple_of(8) {
        return Err(Error::MalformedFile(format!(
            "odd number of f32 values ({})",
            bytes.len() / 4
        )));
    }
    Ok(bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex32::new(re, im)
        })
        .collect())
}

pub fn encode_iq(samples: &[Complex32]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        out.extend_from_slice(&s.re.to_le_bytes());
        out.extend_from_slice(&s.im.to_le_bytes());
    }
    out
}

pub fn load_iq(path: impl AsRef<Path>) -> Result<Vec<Complex32>> {
    decode_iq(&fs::read(path)?)
}

pub fn save_iq(path: impl AsRef<Path>, samples: &[Complex32]) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_iq(samples))?;
    Ok(())
}
