use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ChannelModel, FadingSampler, LinkError, LinkTechnology, Platform};

/// Reachability class of a link at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum LinkClass {
    /// Direct line of sight to a ground station.
    Los,
    /// Out of reach of a ground station and served through a relay.
    Blos,
    /// Ground station in range but the direct path is obstructed.
    Nlos,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinkState {
    pub t: f64,
    pub classification: LinkClass,
    pub available: bool,
    pub blocked: bool,
    /// Fading power relative to the mean, dB (negative is a fade).
    pub fading_db: f64,
    pub one_way_delay_ms: f64,
}

/// Two-state blockage chain plus an instantaneous fade margin test.
///
/// Each step the chain moves clear → blocked with `p_block` and
/// blocked → clear with `p_unblock`. The link is up when the fading power
/// minus any blockage loss stays above `−fade_margin_db`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutageModel {
    pub k_factor: f64,
    pub fade_margin_db: f64,
    pub shadowing_loss_db: f64,
    pub p_block: f64,
    pub p_unblock: f64,
}

impl OutageModel {
    /// Chain with the channel's explicit blockage probability (0 when unset).
    pub fn uncalibrated(channel: &ChannelModel, step_s: f64) -> Result<Self, LinkError> {
        channel.validate()?;
        check_step(step_s)?;
        Ok(Self {
            k_factor: channel.k_factor,
            fade_margin_db: channel.fade_margin_db,
            shadowing_loss_db: channel.shadowing_loss_db,
            p_block: channel.blockage_probability.unwrap_or(0.0),
            p_unblock: unblock_probability(channel, step_s),
        })
    }

    /// Chain whose stationary availability equals `tech.per_link_availability`.
    ///
    /// The mean blockage duration fixes `p_unblock`; `p_block` is then the
    /// unique value whose stationary clear probability
    /// `π = (A − F_b) / (F_c − F_b)` reproduces the target, with `F_c` and
    /// `F_b` the fade survival probabilities while clear and while blocked.
    pub fn calibrated(tech: &LinkTechnology, channel: &ChannelModel, step_s: f64) -> Result<Self, LinkError> {
        tech.validate()?;
        let mut model = Self::uncalibrated(channel, step_s)?;
        let target = tech.per_link_availability;
        let clear = channel.fade_survival(model.fade_margin_db);
        let blocked = channel.fade_survival(model.fade_margin_db - model.shadowing_loss_db);
        let infeasible = || LinkError::CalibrationInfeasible {
            target,
            low: blocked,
            high: clear,
        };
        if target > clear {
            return Err(infeasible());
        }
        if clear - blocked <= f64::EPSILON {
            // Blockage costs nothing; availability is the fade survival alone.
            model.p_block = 0.0;
            return if (target - clear).abs() <= 1e-12 { Ok(model) } else { Err(infeasible()) };
        }
        let pi_clear = ((target - blocked) / (clear - blocked)).clamp(0.0, 1.0);
        if pi_clear == 0.0 {
            return Err(infeasible());
        }
        let p_block = model.p_unblock * (1.0 - pi_clear) / pi_clear;
        if p_block > 1.0 {
            return Err(infeasible());
        }
        model.p_block = p_block;
        Ok(model)
    }

    /// Long-run fraction of time the chain is clear.
    pub fn clear_probability(&self) -> f64 {
        if self.p_block == 0.0 {
            1.0
        } else {
            self.p_unblock / (self.p_block + self.p_unblock)
        }
    }

    pub fn stationary_availability(&self) -> f64 {
        let channel = ChannelModel {
            k_factor: self.k_factor,
            shadowing_loss_db: self.shadowing_loss_db,
            fade_margin_db: self.fade_margin_db,
            mean_blockage_s: 1.0,
            blockage_probability: None,
            seed: 0,
        };
        let pi = self.clear_probability();
        pi * channel.fade_survival(self.fade_margin_db)
            + (1.0 - pi) * channel.fade_survival(self.fade_margin_db - self.shadowing_loss_db)
    }
}

fn check_step(step_s: f64) -> Result<(), LinkError> {
    if step_s > 0.0 && step_s.is_finite() {
        Ok(())
    } else {
        Err(LinkError::InvalidChannel(format!("step {step_s} s must be > 0")))
    }
}

fn unblock_probability(channel: &ChannelModel, step_s: f64) -> f64 {
    (step_s / channel.mean_blockage_s).min(1.0)
}

/// Step-by-step generator of [`LinkState`]s for one link.
#[derive(Debug, Clone)]
pub struct LinkProcess {
    model: OutageModel,
    platform: Platform,
    delay_ms: f64,
    step_s: f64,
    k: u64,
    blocked: bool,
    rng: ChaCha8Rng,
    fading: FadingSampler,
}

impl LinkProcess {
    /// Calibrated process, or the channel's explicit blockage probability
    /// when it sets one.
    pub fn new(tech: &LinkTechnology, channel: &ChannelModel, step_s: f64, seed: u64) -> Result<Self, LinkError> {
        let model = match channel.blockage_probability {
            Some(_) => OutageModel::uncalibrated(channel, step_s)?,
            None => OutageModel::calibrated(tech, channel, step_s)?,
        };
        Self::with_model(tech, model, step_s, seed)
    }

    pub fn with_model(tech: &LinkTechnology, model: OutageModel, step_s: f64, seed: u64) -> Result<Self, LinkError> {
        tech.validate()?;
        check_step(step_s)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fading = FadingSampler::from_rng(model.k_factor, ChaCha8Rng::seed_from_u64(rng.random()));
        // Start from the stationary distribution so short runs are unbiased.
        let blocked = rng.random::<f64>() >= model.clear_probability();
        Ok(Self {
            platform: tech.platform,
            delay_ms: tech.one_way_delay_ms(),
            model,
            step_s,
            k: 0,
            blocked,
            rng,
            fading,
        })
    }

    pub fn model(&self) -> &OutageModel {
        &self.model
    }

    pub fn step(&mut self) -> LinkState {
        if self.k > 0 {
            let u: f64 = self.rng.random();
            self.blocked = if self.blocked { u >= self.model.p_unblock } else { u < self.model.p_block };
        }
        let t = self.k as f64 * self.step_s;
        self.k += 1;
        let r = self.fading.envelope();
        let fading_db = 20.0 * r.log10();
        let loss = if self.blocked { self.model.shadowing_loss_db } else { 0.0 };
        let available = fading_db - loss >= -self.model.fade_margin_db;
        let classification = match (self.platform, self.blocked) {
            (Platform::Terrestrial, false) => LinkClass::Los,
            (Platform::Terrestrial, true) => LinkClass::Nlos,
            _ => LinkClass::Blos,
        };
        LinkState {
            t,
            classification,
            available,
            blocked: self.blocked,
            fading_db,
            one_way_delay_ms: self.delay_ms,
        }
    }
}

/// Link states over `[0, horizon_s)` sampled every `step_s`.
pub fn link_outage_process(
    tech: &LinkTechnology,
    channel: &ChannelModel,
    horizon_s: f64,
    step_s: f64,
    seed: u64,
) -> Result<Vec<LinkState>, LinkError> {
    let mut p = LinkProcess::new(tech, channel, step_s, seed)?;
    let steps = (horizon_s / step_s).round().max(0.0) as usize;
    Ok((0..steps).map(|_| p.step()).collect())
}
