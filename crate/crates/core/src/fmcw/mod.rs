//! Sawtooth FMCW radar front-end: beat-signal synthesis and range/Doppler
//! estimation with windowed 2D FFTs.
//!
//! After dechirping, a target at range `R` closing at `v` becomes a complex
//! tone at `f_b = 2·B·R / (c·T)` in fast time whose phase advances by
//! `2π·f_d·T` per chirp, `f_d = 2·v·f_c / c`.

mod estimate;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

pub use estimate::{
    estimate_range_doppler, estimate_range_doppler_with, peak_sidelobe_level_db, Detection, EstimatorOptions,
    RangeDopplerMap,
};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FmcwError {
    #[error("invalid chirp configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid target: {0}")]
    InvalidTarget(String),
    #[error("target at {range_m} m beats at {beat_hz} Hz, above the {nyquist_hz} Hz Nyquist limit")]
    AliasedTarget { range_m: f64, beat_hz: f64, nyquist_hz: f64 },
    #[error("sample matrix is {got_fast}×{got_chirps}, configuration expects {fast}×{chirps}")]
    ShapeMismatch {
        fast: usize,
        chirps: usize,
        got_fast: usize,
        got_chirps: usize,
    },
}

/// One frame of up-chirps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChirpConfig {
    pub bandwidth_hz: f64,
    pub chirp_duration_s: f64,
    pub carrier_hz: f64,
    pub sample_rate_hz: f64,
    pub num_chirps: usize,
}

impl ChirpConfig {
    pub fn validate(&self) -> Result<(), FmcwError> {
        let bad = |m: &str| Err(FmcwError::InvalidConfig(m.to_string()));
        for (name, v) in [
            ("bandwidth_hz", self.bandwidth_hz),
            ("chirp_duration_s", self.chirp_duration_s),
            ("carrier_hz", self.carrier_hz),
            ("sample_rate_hz", self.sample_rate_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be finite and > 0"));
            }
        }
        if self.samples_per_chirp() < 4 {
            return bad("a chirp must hold at least 4 samples");
        }
        if self.num_chirps < 2 {
            return bad("at least 2 chirps are needed for Doppler");
        }
        Ok(())
    }

    pub fn samples_per_chirp(&self) -> usize {
        (self.sample_rate_hz * self.chirp_duration_s).round() as usize
    }

    /// Chirp slope `B / T`, Hz/s.
    pub fn slope(&self) -> f64 {
        self.bandwidth_hz / self.chirp_duration_s
    }

    pub fn beat_frequency(&self, range_m: f64) -> f64 {
        2.0 * self.slope() * range_m / SPEED_OF_LIGHT_M_S
    }

    pub fn doppler_frequency(&self, radial_speed_mps: f64) -> f64 {
        2.0 * radial_speed_mps * self.carrier_hz / SPEED_OF_LIGHT_M_S
    }

    pub fn nyquist_hz(&self) -> f64 {
        self.sample_rate_hz / 2.0
    }

    /// Range resolution `c / 2B`.
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / (2.0 * self.bandwidth_hz)
    }

    /// Range spanned by one FFT bin of the fast-time transform.
    pub fn range_bin_m(&self) -> f64 {
        let df = self.sample_rate_hz / self.samples_per_chirp() as f64;
        df * SPEED_OF_LIGHT_M_S / (2.0 * self.slope())
    }

    /// Speed spanned by one Doppler bin.
    pub fn speed_bin_mps(&self) -> f64 {
        let df = 1.0 / (self.num_chirps as f64 * self.chirp_duration_s);
        df * SPEED_OF_LIGHT_M_S / (2.0 * self.carrier_hz)
    }

    /// Largest range whose beat tone stays below Nyquist.
    pub fn max_range_m(&self) -> f64 {
        self.nyquist_hz() * SPEED_OF_LIGHT_M_S / (2.0 * self.slope())
    }

    /// Largest closing speed measured without Doppler wrap-around.
    pub fn max_speed_mps(&self) -> f64 {
        SPEED_OF_LIGHT_M_S / (4.0 * self.carrier_hz * self.chirp_duration_s)
    }
}

/// A point reflector seen by the radar.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetEcho {
    pub range_m: f64,
    /// Positive when closing.
    pub radial_speed_mps: f64,
    pub amplitude: f64,
    /// Transmitter-to-receiver leakage riding along with this echo.
    #[serde(default)]
    pub leakage_amplitude: f64,
}

impl TargetEcho {
    pub fn new(range_m: f64, radial_speed_mps: f64, amplitude: f64) -> Self {
        Self {
            range_m,
            radial_speed_mps,
            amplitude,
            leakage_amplitude: 0.0,
        }
    }
}

/// A second radar sweeping with a different slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interferer {
    pub amplitude: f64,
    /// Difference between its chirp slope and ours, Hz/s.
    pub slope_offset_hz_per_s: f64,
}

/// Dechirped samples, chirp-major: `samples[chirp * fast_len + n]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BeatMatrix {
    pub samples: Vec<Complex64>,
    pub fast_len: usize,
    pub num_chirps: usize,
}

impl BeatMatrix {
    pub fn get(&self, fast: usize, chirp: usize) -> Complex64 {
        self.samples[chirp * self.fast_len + fast]
    }

    pub fn chirp(&self, chirp: usize) -> &[Complex64] {
        &self.samples[chirp * self.fast_len..(chirp + 1) * self.fast_len]
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|s| s * k).collect(),
            ..self.clone()
        }
    }
}

/// Tapering applied before each FFT.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Rectangular,
    #[default]
    Hann,
}

impl Window {
    /// Periodic window coefficients of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Self::Rectangular => vec![1.0; n],
            Self::Hann => (0..n)
                .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
                .collect(),
        }
    }
}

pub fn synthesize_beat(
    config: &ChirpConfig,
    targets: &[TargetEcho],
    noise_sigma: f64,
    seed: u64,
) -> Result<BeatMatrix, FmcwError> {
    synthesize_beat_with(config, targets, noise_sigma, seed, None)
}

/// Dechirped frame for `targets` plus complex Gaussian noise of total
/// variance `noise_sigma²` per sample, optionally with an interfering radar.
pub fn synthesize_beat_with(
    config: &ChirpConfig,
    targets: &[TargetEcho],
    noise_sigma: f64,
    seed: u64,
    interferer: Option<&Interferer>,
) -> Result<BeatMatrix, FmcwError> {
    config.validate()?;
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(FmcwError::InvalidConfig("noise_sigma must be >= 0".into()));
    }
    for t in targets {
        if !(t.range_m >= 0.0 && t.range_m.is_finite()) {
            return Err(FmcwError::InvalidTarget(format!("range {} m", t.range_m)));
        }
        if !(t.amplitude > 0.0 && t.amplitude.is_finite()) || !(t.leakage_amplitude >= 0.0) {
            return Err(FmcwError::InvalidTarget(format!("amplitude {}", t.amplitude)));
        }
        if !t.radial_speed_mps.is_finite() {
            return Err(FmcwError::InvalidTarget("speed must be finite".into()));
        }
        let beat = config.beat_frequency(t.range_m);
        if beat >= config.nyquist_hz() {
            return Err(FmcwError::AliasedTarget {
                range_m: t.range_m,
                beat_hz: beat,
                nyquist_hz: config.nyquist_hz(),
            });
        }
    }

    let n = config.samples_per_chirp();
    let m = config.num_chirps;
    let ts = 1.0 / config.sample_rate_hz;
    let mut samples = vec![Complex64::new(0.0, 0.0); n * m];
    for t in targets {
        let fb = config.beat_frequency(t.range_m);
        let fd = config.doppler_frequency(t.radial_speed_mps);
        let phase0 = 4.0 * PI * config.carrier_hz * t.range_m / SPEED_OF_LIGHT_M_S;
        for chirp in 0..m {
            let slow = 2.0 * PI * fd * chirp as f64 * config.chirp_duration_s + phase0;
            for k in 0..n {
                let fast = 2.0 * PI * fb * k as f64 * ts;
                samples[chirp * n + k] += Complex64::from_polar(t.amplitude, fast + slow);
            }
        }
        if t.leakage_amplitude > 0.0 {
            for s in samples.iter_mut() {
                *s += t.leakage_amplitude;
            }
        }
    }
    if let Some(i) = interferer {
        for chirp in 0..m {
            for k in 0..n {
                let t = k as f64 * ts;
                samples[chirp * n + k] += Complex64::from_polar(i.amplitude, PI * i.slope_offset_hz_per_s * t * t);
            }
        }
    }
    if noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s = noise_sigma / 2f64.sqrt();
        for x in samples.iter_mut() {
            let re: f64 = StandardNormal.sample(&mut rng);
            let im: f64 = StandardNormal.sample(&mut rng);
            *x += Complex64::new(s * re, s * im);
        }
    }
    Ok(BeatMatrix {
        samples,
        fast_len: n,
        num_chirps: m,
    })
}

#[cfg(test)]
pub(crate) fn test_config() -> ChirpConfig {
    ChirpConfig {
        bandwidth_hz: 150e6,
        chirp_duration_s: 1e-3,
        carrier_hz: 2.4e9,
        sample_rate_hz: 1e6,
        num_chirps: 64,
    }
}
