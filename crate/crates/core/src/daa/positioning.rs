use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// GNSS receiver class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PositioningMode {
    #[serde(rename = "GPS")]
    Gps,
    #[serde(rename = "DGPS")]
    Dgps,
    #[serde(rename = "RTK")]
    Rtk,
    #[serde(rename = "RTK_DUAL")]
    RtkDual,
}

impl PositioningMode {
    pub const ALL: [PositioningMode; 4] = [Self::Gps, Self::Dgps, Self::Rtk, Self::RtkDual];

    /// Per-axis horizontal standard deviation in meters: single-mode GPS
    /// 2 m, differential GPS 1 m, cellular-assisted RTK 16 cm, dual-antenna
    /// RTK 2 cm.
    pub fn sigma_m(self) -> f64 {
        match self {
            Self::Gps => 2.0,
            Self::Dgps => 1.0,
            Self::Rtk => 0.16,
            Self::RtkDual => 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PositioningModel {
    pub mode: PositioningMode,
    pub seed: u64,
}

impl PositioningModel {
    pub fn new(mode: PositioningMode, seed: u64) -> Self {
        Self { mode, seed }
    }

    pub fn sigma_m(&self) -> f64 {
        self.mode.sigma_m()
    }

    /// `√(σ₁² + σ₂²)` for two receivers of this class.
    pub fn combined_sigma(&self) -> f64 {
        (2.0f64).sqrt() * self.sigma_m()
    }

    pub fn sampler(&self) -> PositionSampler {
        PositionSampler::new(self.mode, self.seed)
    }
}

/// Seeded stream of zero-mean Gaussian horizontal position errors.
#[derive(Debug, Clone)]
pub struct PositionSampler {
    rng: ChaCha8Rng,
    noise: Normal<f64>,
}

impl PositionSampler {
    pub fn new(mode: PositioningMode, seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            noise: Normal::new(0.0, mode.sigma_m()).expect("sigma is positive and finite"),
        }
    }

    /// Horizontal error `(ex, ey)`.
    pub fn error(&mut self) -> [f64; 2] {
        [self.noise.sample(&mut self.rng), self.noise.sample(&mut self.rng)]
    }

    /// Measured position: independent noise on x and y, altitude untouched.
    pub fn measure(&mut self, true_pos: [f64; 3]) -> [f64; 3] {
        let [ex, ey] = self.error();
        [true_pos[0] + ex, true_pos[1] + ey, true_pos[2]]
    }
}

pub fn sample_position_error(sampler: &mut PositionSampler, true_pos: [f64; 3]) -> [f64; 3] {
    sampler.measure(true_pos)
}
