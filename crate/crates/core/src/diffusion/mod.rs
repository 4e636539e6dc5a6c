//! Deterministic inversion and sampling on a toy latent diffusion model.
//!
//! Inversion step `t` (noising, `t = 1..=T`):
//!
//! ```text
//! z_t = √(ᾱ_t/ᾱ_{t-1}) · (z_{t-1} − √(1−ᾱ_{t-1}) · ε_t) + √(1−ᾱ_t) · ε_t,   ε_t = ε(z_{t-1}, t)
//! ```
//!
//! Sampling step `t` (denoising, `t = T..=1`):
//!
//! ```text
//! z'_{t-1} = √ᾱ_{t-1} · (z'_t − √(1−ᾱ_t) · ε_t) / √ᾱ_t + √(1−ᾱ_{t-1}−σ²) · ε_t + σ² · ε,   ε_t = ε(z'_t, t)
//! ```
//!
//! During inversion the keys and values of every attention site, evaluated
//! on `z_t` at step `t`, are stored in an [`AttentionKVCache`]. Sampling can
//! substitute them for the sampler's own keys and values at the matching
//! step, which anchors the output to the inverted image.

pub mod attention;
pub mod autoencoder;
pub mod predictor;
pub mod schedule;
pub mod weights;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::grid::LatentGrid;
pub use autoencoder::ToyAutoencoder;
pub use predictor::{KvPair, NoisePredictor, PredictorError, ToyNoisePredictor, ZeroPredictor};
pub use schedule::DiffusionSchedule;

/// Relative L2 error of a σ = 0, T = 10 inversion and sampling round trip
/// with the golden toy predictor. Worst case measured over 250 random
/// latents (8x8 to 64x64, values in [-1, 1) and [0, 1)) was 7.43e-4.
pub const TOY_ROUND_TRIP_BOUND: f64 = 8e-4;

#[derive(Debug, Error, PartialEq)]
pub enum DiffusionError {
    #[error(transparent)]
    Predictor(#[from] PredictorError),
    #[error("latent contains null cells")]
    NullCells,
    #[error("step range {from}..={to} invalid for a {steps}-step schedule")]
    StepRange { from: usize, to: usize, steps: usize },
    #[error("sigma² = {sigma2} exceeds 1 - ᾱ = {limit} at step {step}")]
    SigmaTooLarge { sigma2: f64, limit: f64, step: usize },
    #[error("no cached keys/values for step {step} site {site}")]
    MissingCache { step: usize, site: usize },
    #[error("cache entry for step {step} site {site} written twice")]
    CacheOverwrite { step: usize, site: usize },
    #[error("predicted noise has a different shape than the latent")]
    Shape,
}

/// Keys and values recorded during inversion, keyed by `(step, site)`.
/// Entries are written once and only read afterwards.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttentionKVCache {
    entries: BTreeMap<(usize, usize), KvPair>,
}

impl AttentionKVCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, step: usize, site: usize, kv: KvPair) -> Result<(), DiffusionError> {
        if self.entries.contains_key(&(step, site)) {
            return Err(DiffusionError::CacheOverwrite { step, site });
        }
        self.entries.insert((step, site), kv);
        Ok(())
    }

    pub fn get(&self, step: usize, site: usize) -> Option<&KvPair> {
        self.entries.get(&(step, site))
    }

    /// All sites for one step, in site order.
    pub fn step(&self, step: usize, sites: usize) -> Result<Vec<KvPair>, DiffusionError> {
        (0..sites)
            .map(|site| {
                self.get(step, site)
                    .cloned()
                    .ok_or(DiffusionError::MissingCache { step, site })
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Latents `z_0 ..= z_T` of an inversion run.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub latents: Vec<LatentGrid>,
}

impl Trajectory {
    pub fn at(&self, t: usize) -> &LatentGrid {
        &self.latents[t]
    }

    pub fn last(&self) -> &LatentGrid {
        self.latents.last().expect("trajectory holds z_0")
    }
}

fn axpby(a: f64, x: &LatentGrid, b: f64, y: &LatentGrid) -> Result<LatentGrid, DiffusionError> {
    if !x.same_shape(y) {
        return Err(DiffusionError::Shape);
    }
    let data = x
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(xv, yv)| a * xv + b * yv)
        .collect();
    Ok(LatentGrid::from_vec(x.width(), x.height(), x.channels(), data).expect("same shape"))
}

/// One inversion step from `z_{t-1}` to `z_t`.
pub fn inversion_step(
    z_prev: &LatentGrid,
    t: usize,
    schedule: &DiffusionSchedule,
    predictor: &dyn NoisePredictor,
) -> Result<LatentGrid, DiffusionError> {
    let eps = predictor.predict(z_prev, schedule.timestep(t), None)?;
    let (a_t, a_prev) = (schedule.alpha(t), schedule.alpha(t - 1));
    let ratio = (a_t / a_prev).sqrt();
    // ratio · (z − √(1−ᾱ_{t−1}) ε) + √(1−ᾱ_t) ε
    axpby(ratio, z_prev, (1.0 - a_t).sqrt() - ratio * (1.0 - a_prev).sqrt(), &eps)
}

/// Runs inversion steps `from + 1 ..= to` starting at `z_from`, returning
/// `z_from ..= z_to`. When `cache` is given, every site's keys and values on
/// each new `z_t` are recorded under step `t`.
pub fn invert_range(
    z_from: &LatentGrid,
    from: usize,
    to: usize,
    schedule: &DiffusionSchedule,
    predictor: &dyn NoisePredictor,
    mut cache: Option<&mut AttentionKVCache>,
) -> Result<Vec<LatentGrid>, DiffusionError> {
    if z_from.has_nulls() {
        return Err(DiffusionError::NullCells);
    }
    if from > to || to > schedule.steps() {
        return Err(DiffusionError::StepRange {
            from,
            to,
            steps: schedule.steps(),
        });
    }
    let mut latents = Vec::with_capacity(to - from + 1);
    latents.push(z_from.clone());
    for t in from + 1..=to {
        let z_t = inversion_step(latents.last().expect("non-empty"), t, schedule, predictor)?;
        if let Some(cache) = cache.as_deref_mut() {
            for (site, kv) in predictor
                .keys_values(&z_t, schedule.timestep(t))?
                .into_iter()
                .enumerate()
            {
                cache.insert(t, site, kv)?;
            }
        }
        latents.push(z_t);
    }
    Ok(latents)
}

/// Full inversion `z_0 → z_T`, filling `cache`.
pub fn invert(
    z0: &LatentGrid,
    schedule: &DiffusionSchedule,
    predictor: &dyn NoisePredictor,
    cache: &mut AttentionKVCache,
) -> Result<Trajectory, DiffusionError> {
    let latents = invert_range(z0, 0, schedule.steps(), schedule, predictor, Some(cache))?;
    Ok(Trajectory { latents })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleOptions {
    pub cp_enabled: bool,
    /// First sampling iteration (0-based) that uses cached keys and values.
    pub cp_start_step: usize,
    pub sigma: f64,
    pub seed: u64,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self {
            cp_enabled: false,
            cp_start_step: 0,
            sigma: 0.0,
            seed: 0,
        }
    }
}

/// Denoises `z_start` (at noise level `start_step`) down to `z'_0`.
pub fn sample(
    z_start: &LatentGrid,
    start_step: usize,
    schedule: &DiffusionSchedule,
    predictor: &dyn NoisePredictor,
    cache: Option<&AttentionKVCache>,
    options: SampleOptions,
) -> Result<LatentGrid, DiffusionError> {
    if z_start.has_nulls() {
        return Err(DiffusionError::NullCells);
    }
    if start_step > schedule.steps() {
        return Err(DiffusionError::StepRange {
            from: start_step,
            to: 0,
            steps: schedule.steps(),
        });
    }
    let sigma2 = options.sigma * options.sigma;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut z = z_start.clone();
    for (iteration, t) in (1..=start_step).rev().enumerate() {
        let (a_t, a_prev) = (schedule.alpha(t), schedule.alpha(t - 1));
        let radicand = 1.0 - a_prev - sigma2;
        if radicand < 0.0 {
            return Err(DiffusionError::SigmaTooLarge {
                sigma2,
                limit: 1.0 - a_prev,
                step: t,
            });
        }
        let injected = if options.cp_enabled && iteration >= options.cp_start_step {
            let cache = cache.ok_or(DiffusionError::MissingCache { step: t, site: 0 })?;
            Some(cache.step(t, predictor.attention_sites())?)
        } else {
            None
        };
        let eps = predictor.predict(&z, schedule.timestep(t), injected.as_deref())?;
        let scale = (a_prev / a_t).sqrt();
        // scale · (z − √(1−ᾱ_t) ε) + √(1−ᾱ_{t−1}−σ²) ε
        let mut next = axpby(scale, &z, radicand.sqrt() - scale * (1.0 - a_t).sqrt(), &eps)?;
        if sigma2 > 0.0 {
            next = next.map_values(|v| {
                let n: f64 = StandardNormal.sample(&mut rng);
                v + sigma2 * n
            });
        }
        z = next;
    }
    Ok(z)
}
