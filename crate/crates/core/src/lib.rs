//! Evaluation toolkit for spoofing and deepfake speech countermeasures.
//!
//! * [`trialdata`]: key and score file formats, score-to-key alignment.
//! * [`metrics`]: DET curves, EER, minimum t-DCF, per-condition reports.
//! * [`stats`]: pairwise HTER significance tests with Holm-Bonferroni
//!   correction.
//! * [`features`]: LFCC and CQCC front-ends, dynamic coefficients, G.711
//!   companding channels and audio I/O.
//! * [`gmm`]: diagonal-covariance GMMs and the CQCC-GMM / LFCC-GMM
//!   baselines.

pub mod coeffs_config;
pub mod features;
pub mod gmm;
pub mod metrics;
pub mod stats;
pub mod trialdata;
