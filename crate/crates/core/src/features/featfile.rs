//! Binary feature container: the 4 bytes `FEAT`, frame count `T` and
//! dimension `D` as little-endian u32, then `T * D` little-endian f32
//! values in row-major order. No padding or trailer.

use std::io::{Read, Write};

use super::{FeatureError, FeatureMatrix};

pub const FEATURE_MAGIC: &[u8; 4] = b"FEAT";

pub fn write_features<W: Write>(mut w: W, m: &FeatureMatrix) -> Result<(), FeatureError> {
    let dims = |v: usize| {
        u32::try_from(v).map_err(|_| FeatureError::BadFeatureFile(format!("{v} exceeds u32")))
    };
    let mut buf = Vec::with_capacity(12 + 4 * m.values().len());
    buf.extend_from_slice(FEATURE_MAGIC);
    buf.extend_from_slice(&dims(m.n_frames())?.to_le_bytes());
    buf.extend_from_slice(&dims(m.dim())?.to_le_bytes());
    for &v in m.values() {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_features<R: Read>(mut r: R) -> Result<FeatureMatrix, FeatureError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 12 || &bytes[..4] != FEATURE_MAGIC {
        return Err(FeatureError::BadFeatureFile("missing FEAT header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (t, d) = (word(4), word(8));
    let expected = t
        .checked_mul(d)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(12));
    if expected != Some(bytes.len()) {
        return Err(FeatureError::BadFeatureFile(format!(
            "header declares {t} x {d} but payload is {} bytes",
            bytes.len() - 12
        )));
    }
    let values = bytes[12..]
        .chunks_exact(4)
        .map(|b| f64::from(f32::from_le_bytes([b[0], b[1], b[2], b[3]])))
        .collect();
    FeatureMatrix::new(t, d, values)
}
