use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use super::LinkError;

fn default_fade_margin() -> f64 {
    30.0
}
fn default_mean_blockage() -> f64 {
    5.0
}

/// Small-scale fading and shadowing parameters of a link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    /// Ricean K: direct-path power over scattered power. 0 is Rayleigh.
    pub k_factor: f64,
    /// Extra attenuation while the link is blocked.
    #[serde(alias = "shadowing_db")]
    pub shadowing_loss_db: f64,
    /// Power the link can lose to fading before it drops.
    #[serde(default = "default_fade_margin")]
    pub fade_margin_db: f64,
    #[serde(default = "default_mean_blockage")]
    pub mean_blockage_s: f64,
    /// Per-step probability of entering blockage. When set, the blockage
    /// chain uses it as is instead of calibrating to a target availability.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blockage_probability: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl ChannelModel {
    pub fn new(k_factor: f64, shadowing_loss_db: f64, seed: u64) -> Result<Self, LinkError> {
        let c = Self {
            k_factor,
            shadowing_loss_db,
            fade_margin_db: default_fade_margin(),
            mean_blockage_s: default_mean_blockage(),
            blockage_probability: None,
            seed,
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), LinkError> {
        let bad = |m: &str| Err(LinkError::InvalidChannel(m.to_string()));
        if !(self.k_factor >= 0.0 && self.k_factor.is_finite()) {
            return bad("k_factor must be finite and >= 0");
        }
        if !(self.shadowing_loss_db >= 0.0) {
            return bad("shadowing_loss_db must be >= 0");
        }
        // An infinite margin is allowed: the link then never fades out.
        if !(self.fade_margin_db >= 0.0) {
            return bad("fade_margin_db must be >= 0");
        }
        if !(self.mean_blockage_s > 0.0 && self.mean_blockage_s.is_finite()) {
            return bad("mean_blockage_s must be > 0");
        }
        if let Some(p) = self.blockage_probability {
            if !(0.0..=1.0).contains(&p) {
                return bad("blockage_probability must be in [0, 1]");
            }
        }
        Ok(())
    }

    pub fn sampler(&self) -> FadingSampler {
        FadingSampler::new(self.k_factor, self.seed)
    }

    /// Probability that the fading loss stays within `margin_db`.
    pub(crate) fn fade_survival(&self, margin_db: f64) -> f64 {
        if margin_db == f64::INFINITY {
            return 1.0;
        }
        1.0 - ricean_power_cdf(self.k_factor, 10f64.powf(-margin_db / 10.0))
    }
}

/// Seeded stream of Ricean envelope gains with `E[r²] = 1`.
#[derive(Debug, Clone)]
pub struct FadingSampler {
    los: f64,
    scatter: f64,
    rng: ChaCha8Rng,
}

impl FadingSampler {
    pub fn new(k_factor: f64, seed: u64) -> Self {
        Self::from_rng(k_factor, ChaCha8Rng::seed_from_u64(seed))
    }

    pub(crate) fn from_rng(k_factor: f64, rng: ChaCha8Rng) -> Self {
        Self {
            los: (k_factor / (k_factor + 1.0)).sqrt(),
            // Per quadrature component, so the two together carry 1/(K+1).
            scatter: (0.5 / (k_factor + 1.0)).sqrt(),
            rng,
        }
    }

    pub fn envelope(&mut self) -> f64 {
        let i: f64 = StandardNormal.sample(&mut self.rng);
        let q: f64 = StandardNormal.sample(&mut self.rng);
        (self.los + self.scatter * i).hypot(self.scatter * q)
    }
}

/// `n` envelope draws for `channel`, reproducible from its seed.
pub fn sample_fading(channel: &ChannelModel, n: usize) -> Vec<f64> {
    let mut s = channel.sampler();
    (0..n).map(|_| s.envelope()).collect()
}

/// `P(r² ≤ x)` for a unit-mean-power Ricean envelope `r`.
///
/// `2(K+1)r²` is noncentral chi-square with two degrees of freedom and
/// noncentrality `2K`. Writing it as a Poisson(K) mixture of central
/// chi-squares gives `Σ_j Pois(j; K) · P(j + 1, (K+1)x)` with `P` the
/// regularized lower incomplete gamma function.
pub fn ricean_power_cdf(k_factor: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x == f64::INFINITY {
        return 1.0;
    }
    let u = (k_factor + 1.0) * x;
    if k_factor == 0.0 {
        return -(-u).exp_m1();
    }
    let spread = 12.0 * k_factor.sqrt() + 30.0;
    let lo = (k_factor - spread).max(0.0).floor() as u64;
    let hi = (k_factor + spread).ceil() as u64;
    let mut total = 0.0;
    for j in lo..=hi {
        let jf = j as f64;
        let log_pmf = -k_factor + jf * k_factor.ln() - ln_gamma(jf + 1.0);
        let w = log_pmf.exp();
        if w > 0.0 {
            total += w * gamma_lr(jf + 1.0, u);
        }
    }
    total.clamp(0.0, 1.0)
}
