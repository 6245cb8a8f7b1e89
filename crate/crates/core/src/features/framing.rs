use std::f64::consts::PI;

use super::FeatureError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    #[default]
    Hamming,
    Hann,
    Rectangular,
}

/// Symmetric window of length `n`.
pub fn window(kind: WindowKind, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    let denom = (n - 1) as f64;
    (0..n)
        .map(|i| {
            let c = (2.0 * PI * i as f64 / denom).cos();
            match kind {
                WindowKind::Hamming => 0.54 - 0.46 * c,
                WindowKind::Hann => 0.5 - 0.5 * c,
                WindowKind::Rectangular => 1.0,
            }
        })
        .collect()
}

/// `1 + floor((n - win) / shift)`, or `TooShort` when `n < win`.
pub fn frame_count(n: usize, win: usize, shift: usize) -> Result<usize, FeatureError> {
    if win == 0 || shift == 0 {
        return Err(FeatureError::BadConfig(
            "window and shift must be at least one sample".into(),
        ));
    }
    if n < win {
        return Err(FeatureError::TooShort {
            needed: win,
            got: n,
        });
    }
    Ok(1 + (n - win) / shift)
}

/// Splits `samples` into unpadded frames of `win` samples every `shift`.
pub fn frame(samples: &[f64], win: usize, shift: usize) -> Result<Vec<&[f64]>, FeatureError> {
    let t = frame_count(samples.len(), win, shift)?;
    Ok((0..t)
        .map(|i| &samples[i * shift..i * shift + win])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_second_at_30_15() {
        let x = vec![0.0; 16000];
        let frames = frame(&x, 480, 240).unwrap();
        assert_eq!(frames.len(), 65);
        assert!(frames.iter().all(|f| f.len() == 480));
    }

    #[test]
    fn exact_and_short() {
        assert_eq!(frame_count(480, 480, 240).unwrap(), 1);
        assert!(matches!(
            frame_count(479, 480, 240),
            Err(FeatureError::TooShort {
                needed: 480,
                got: 479
            })
        ));
    }

    #[test]
    fn windows_are_symmetric() {
        for kind in [WindowKind::Hamming, WindowKind::Hann] {
            let w = window(kind, 31);
            for i in 0..31 {
                assert!((w[i] - w[30 - i]).abs() < 1e-15);
            }
            assert!((w[15] - 1.0).abs() < 1e-15);
        }
        assert!((window(WindowKind::Hamming, 5)[0] - 0.08).abs() < 1e-15);
    }
}
