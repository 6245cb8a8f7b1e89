use std::io::{Read, Seek, Write};

use super::{AudioSignal, FeatureError};

fn bad(e: hound::Error) -> FeatureError {
    match e {
        hound::Error::IoError(io) => FeatureError::Io(io),
        other => FeatureError::BadAudio(other.to_string()),
    }
}

/// Reads 16-bit PCM mono WAV; samples are scaled by 1/32768.
pub fn read_wav<R: Read>(reader: R) -> Result<AudioSignal, FeatureError> {
    let mut wav = hound::WavReader::new(reader).map_err(bad)?;
    let spec = wav.spec();
    if spec.channels != 1 {
        return Err(FeatureError::BadAudio(format!(
            "expected mono audio, got {} channels",
            spec.channels
        )));
    }
    if spec.sample_format != hound::SampleFormat::Int || spec.bits_per_sample != 16 {
        return Err(FeatureError::BadAudio(format!(
            "expected 16-bit integer PCM, got {}-bit {:?}",
            spec.bits_per_sample, spec.sample_format
        )));
    }
    let samples = wav
        .samples::<i16>()
        .map(|s| s.map(|v| f64::from(v) / 32768.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(bad)?;
    AudioSignal::new(samples, spec.sample_rate)
}

/// Headerless little-endian 16-bit PCM at a declared rate.
pub fn read_raw_pcm16(bytes: &[u8], sample_rate: u32) -> Result<AudioSignal, FeatureError> {
    if bytes.len() % 2 != 0 {
        return Err(FeatureError::BadAudio(
            "raw PCM length is not a whole number of 16-bit samples".into(),
        ));
    }
    let samples = bytes
        .chunks_exact(2)
        .map(|b| f64::from(i16::from_le_bytes([b[0], b[1]])) / 32768.0)
        .collect();
    AudioSignal::new(samples, sample_rate)
}

/// Writes 16-bit PCM mono WAV, rounding and saturating each sample.
pub fn write_wav<W: Write + Seek>(writer: W, signal: &AudioSignal) -> Result<(), FeatureError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: signal.sample_rate(),
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut wav = hound::WavWriter::new(writer, spec).map_err(bad)?;
    for &x in signal.samples() {
        let v = (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        wav.write_sample(v).map_err(bad)?;
    }
    wav.finalize().map_err(bad)
}
