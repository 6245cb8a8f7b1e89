//! G.711 μ-law and a-law channel simulation.
//!
//! The 8-bit codecs follow the classic segment/quantizer reference
//! implementation operating on 16-bit linear PCM. Float samples map to
//! 16-bit by `round(x * 32768)` with saturation, and back by `/ 32768`.

use super::{AudioSignal, FeatureError};

/// Cut-off of the anti-aliasing filter used for narrowband simulation.
pub const NARROWBAND_CUTOFF_HZ: f64 = 3400.0;
/// Length of the linear-phase narrowband filter (odd, so the delay is integral).
pub const NARROWBAND_TAPS: usize = 63;

const SEG_UEND: [i32; 8] = [0x3F, 0x7F, 0xFF, 0x1FF, 0x3FF, 0x7FF, 0xFFF, 0x1FFF];
const SEG_AEND: [i32; 8] = [0x1F, 0x3F, 0x7F, 0xFF, 0x1FF, 0x3FF, 0x7FF, 0xFFF];
const ULAW_BIAS: i32 = 0x84;
const ULAW_CLIP: i32 = 8159;

fn segment(value: i32, table: &[i32; 8]) -> usize {
    table.iter().position(|&end| value <= end).unwrap_or(8)
}

pub(crate) fn linear_to_ulaw(pcm: i16) -> u8 {
    let mut v = i32::from(pcm) >> 2;
    let mask = if v < 0 {
        v = -v;
        0x7F
    } else {
        0xFF
    };
    v = v.min(ULAW_CLIP) + (ULAW_BIAS >> 2);
    let seg = segment(v, &SEG_UEND);
    let code = if seg >= 8 {
        0x7F
    } else {
        ((seg as i32) << 4) | ((v >> (seg + 1)) & 0xF)
    };
    (code ^ mask) as u8
}

pub(crate) fn ulaw_to_linear(code: u8) -> i16 {
    let u = i32::from(!code);
    let t = (((u & 0x0F) << 3) + ULAW_BIAS) << ((u & 0x70) >> 4);
    (if u & 0x80 != 0 {
        ULAW_BIAS - t
    } else {
        t - ULAW_BIAS
    }) as i16
}

pub(crate) fn linear_to_alaw(pcm: i16) -> u8 {
    let mut v = i32::from(pcm) >> 3;
    let mask = if v >= 0 {
        0xD5
    } else {
        v = -v - 1;
        0x55
    };
    let seg = segment(v, &SEG_AEND);
    let code = if seg >= 8 {
        0x7F
    } else {
        let shift = if seg < 2 { 1 } else { seg };
        ((seg as i32) << 4) | ((v >> shift) & 0xF)
    };
    (code ^ mask) as u8
}

pub(crate) fn alaw_to_linear(code: u8) -> i16 {
    let a = i32::from(code ^ 0x55);
    let mut t = (a & 0x0F) << 4;
    let seg = (a & 0x70) >> 4;
    match seg {
        0 => t += 8,
        1 => t += 0x108,
        _ => t = (t + 0x108) << (seg - 1),
    }
    (if a & 0x80 != 0 { t } else { -t }) as i16
}

fn to_pcm(x: f64) -> i16 {
    (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16
}

fn from_pcm(v: i16) -> f64 {
    f64::from(v) / 32768.0
}

fn check_range(samples: &[f64]) -> Result<(), FeatureError> {
    match samples.iter().position(|s| s.abs() > 1.0) {
        Some(index) => Err(FeatureError::ClippedInput {
            index,
            value: samples[index],
        }),
        None => Ok(()),
    }
}

pub fn mulaw_encode(samples: &[f64]) -> Result<Vec<u8>, FeatureError> {
    check_range(samples)?;
    Ok(samples.iter().map(|&x| linear_to_ulaw(to_pcm(x))).collect())
}

pub fn mulaw_decode(codes: &[u8]) -> Vec<f64> {
    codes.iter().map(|&c| from_pcm(ulaw_to_linear(c))).collect()
}

pub fn alaw_encode(samples: &[f64]) -> Result<Vec<u8>, FeatureError> {
    check_range(samples)?;
    Ok(samples.iter().map(|&x| linear_to_alaw(to_pcm(x))).collect())
}

pub fn alaw_decode(codes: &[u8]) -> Vec<f64> {
    codes.iter().map(|&c| from_pcm(alaw_to_linear(c))).collect()
}

/// Hamming-windowed sinc low-pass at `NARROWBAND_CUTOFF_HZ` for 16 kHz
/// input, normalised to unit DC gain.
pub fn narrowband_lowpass() -> Vec<f64> {
    let fc = NARROWBAND_CUTOFF_HZ / 16000.0;
    let mid = (NARROWBAND_TAPS / 2) as f64;
    let w = super::framing::window(super::WindowKind::Hamming, NARROWBAND_TAPS);
    let h: Vec<f64> = (0..NARROWBAND_TAPS)
        .map(|n| {
            let t = n as f64 - mid;
            let sinc = if t == 0.0 {
                2.0 * fc
            } else {
                (2.0 * std::f64::consts::PI * fc * t).sin() / (std::f64::consts::PI * t)
            };
            sinc * w[n]
        })
        .collect();
    let sum: f64 = h.iter().sum();
    h.into_iter().map(|v| v / sum).collect()
}

/// Zero-phase application of an odd-length FIR, zero-padded at both ends.
fn filter_centred(x: &[f64], h: &[f64]) -> Vec<f64> {
    let delay = h.len() / 2;
    (0..x.len())
        .map(|n| {
            h.iter()
                .enumerate()
                .filter_map(|(j, hj)| {
                    (n + delay)
                        .checked_sub(j)
                        .and_then(|i| x.get(i))
                        .map(|v| hj * v)
                })
                .sum()
        })
        .collect()
}

fn roundtrip(
    signal: &AudioSignal,
    narrowband: bool,
    codec: impl Fn(i16) -> i16,
) -> Result<AudioSignal, FeatureError> {
    check_range(signal.samples())?;
    let apply = |x: &[f64]| -> Vec<f64> { x.iter().map(|&v| from_pcm(codec(to_pcm(v)))).collect() };
    if !narrowband {
        return AudioSignal::new(apply(signal.samples()), signal.sample_rate());
    }
    if signal.sample_rate() != 16000 {
        return Err(FeatureError::BadConfig(format!(
            "narrowband simulation expects 16000 Hz input, got {}",
            signal.sample_rate()
        )));
    }
    let h = narrowband_lowpass();
    let n = signal.len();
    let band_limited = filter_centred(signal.samples(), &h);
    let decimated: Vec<f64> = band_limited.iter().step_by(2).copied().collect();
    let coded = apply(&decimated);
    let mut stuffed = vec![0.0; n];
    for (i, v) in coded.iter().enumerate() {
        stuffed[2 * i] = 2.0 * v;
    }
    let out = filter_centred(&stuffed, &h)
        .into_iter()
        .map(|v| v.clamp(-1.0, 1.0))
        .collect();
    AudioSignal::new(out, 16000)
}

/// μ-law encode then decode. With `narrowband`, a 16 kHz signal is first
/// band-limited and decimated to 8 kHz, coded, and interpolated back to
/// 16 kHz; output length always equals input length.
pub fn mulaw_roundtrip(
    signal: &AudioSignal,
    narrowband: bool,
) -> Result<AudioSignal, FeatureError> {
    roundtrip(signal, narrowband, |v| ulaw_to_linear(linear_to_ulaw(v)))
}

/// a-law counterpart of [`mulaw_roundtrip`].
pub fn alaw_roundtrip(signal: &AudioSignal, narrowband: bool) -> Result<AudioSignal, FeatureError> {
    roundtrip(signal, narrowband, |v| alaw_to_linear(linear_to_alaw(v)))
}
