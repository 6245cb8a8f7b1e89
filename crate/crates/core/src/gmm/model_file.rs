//! Binary model container: the 4 bytes `GMMD`, `K` and `D` as
//! little-endian u32, then little-endian f64 weights (K), means (K x D,
//! row-major) and variances (K x D, row-major).

use std::io::{Read, Write};

use super::{GmmError, GmmModel};

pub const MODEL_MAGIC: &[u8; 4] = b"GMMD";

pub fn write_model<W: Write>(mut w: W, model: &GmmModel) -> Result<(), GmmError> {
    let k = model.n_components();
    let d = model.dim();
    let header =
        |v: usize| u32::try_from(v).map_err(|_| GmmError::BadModel(format!("{v} exceeds u32")));
    let mut buf = Vec::with_capacity(12 + 8 * (k + 2 * k * d));
    buf.extend_from_slice(MODEL_MAGIC);
    buf.extend_from_slice(&header(k)?.to_le_bytes());
    buf.extend_from_slice(&header(d)?.to_le_bytes());
    for v in model
        .weights()
        .iter()
        .chain(model.means())
        .chain(model.variances())
    {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_model<R: Read>(mut r: R) -> Result<GmmModel, GmmError> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 12 || &bytes[..4] != MODEL_MAGIC {
        return Err(GmmError::BadModel("missing GMMD header".into()));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().expect("4 bytes")) as usize;
    let (k, d) = (word(4), word(8));
    let n = k
        .checked_mul(d)
        .and_then(|kd| kd.checked_mul(2))
        .and_then(|v| v.checked_add(k));
    if n.and_then(|n| n.checked_mul(8))
        .and_then(|b| b.checked_add(12))
        != Some(bytes.len())
    {
        return Err(GmmError::BadModel(format!(
            "header declares K={k}, D={d} but payload is {} bytes",
            bytes.len() - 12
        )));
    }
    let values: Vec<f64> = bytes[12..]
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().expect("8 bytes")))
        .collect();
    let (weights, rest) = values.split_at(k);
    let (means, variances) = rest.split_at(k * d);
    GmmModel::new(weights.to_vec(), means.to_vec(), variances.to_vec(), d)
}
