//! Noise-retention schedule `ᾱ_t`.

use thiserror::Error;

/// Virtual training horizon the schedule is subsampled from.
pub const TRAIN_STEPS: usize = 1000;
pub const BETA_START: f64 = 0.00085;
pub const BETA_END: f64 = 0.012;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("step count must be in 1..={TRAIN_STEPS}, got {0}")]
    StepCount(usize),
}

/// `alphas[t]` for `t = 0..=T`, strictly decreasing in `(0, 1)`. `alphas[0]`
/// is the retention at training step 0 (`1 - β_0`), the level the clean
/// latent is taken to sit at; keeping it below 1 leaves room for `σ > 0` in
/// the final sampling step.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffusionSchedule {
    alphas: Vec<f64>,
    timesteps: Vec<usize>,
}

impl DiffusionSchedule {
    /// Scaled-linear betas over [`TRAIN_STEPS`] steps, cumulative product,
    /// sampled every `TRAIN_STEPS / steps` steps starting at training step 1.
    pub fn scaled_linear(steps: usize) -> Result<Self, ScheduleError> {
        if steps == 0 || steps > TRAIN_STEPS {
            return Err(ScheduleError::StepCount(steps));
        }
        let (lo, hi) = (BETA_START.sqrt(), BETA_END.sqrt());
        let mut cumulative = Vec::with_capacity(TRAIN_STEPS);
        let mut prod = 1.0;
        for i in 0..TRAIN_STEPS {
            let root = lo + (hi - lo) * i as f64 / (TRAIN_STEPS - 1) as f64;
            prod *= 1.0 - root * root;
            cumulative.push(prod);
        }
        let ratio = TRAIN_STEPS / steps;
        let timesteps: Vec<usize> = (0..steps).map(|k| k * ratio + 1).collect();
        let mut alphas = Vec::with_capacity(steps + 1);
        alphas.push(cumulative[0]);
        alphas.extend(timesteps.iter().map(|&t| cumulative[t]));
        Ok(Self { alphas, timesteps })
    }

    /// Schedule from explicit `ᾱ_0..ᾱ_T`.
    pub fn from_alphas(alphas: &[f64]) -> Self {
        assert!(alphas.len() >= 2, "need at least ᾱ_0 and ᾱ_1");
        let steps = alphas.len() - 1;
        let ratio = TRAIN_STEPS / steps;
        Self {
            alphas: alphas.to_vec(),
            timesteps: (0..steps).map(|k| k * ratio + 1).collect(),
        }
    }

    /// Number of diffusion steps `T`.
    pub fn steps(&self) -> usize {
        self.alphas.len() - 1
    }

    /// `ᾱ_t` for `t` in `0..=T`.
    pub fn alpha(&self, t: usize) -> f64 {
        self.alphas[t]
    }

    /// Training-scale timestep for step `t` in `1..=T`, used for conditioning.
    pub fn timestep(&self, t: usize) -> usize {
        self.timesteps[t - 1]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monotone_in_unit_interval() {
        for steps in [1, 4, 10, 50] {
            let s = DiffusionSchedule::scaled_linear(steps).unwrap();
            assert!((s.alpha(0) - (1.0 - BETA_START)).abs() < 1e-15);
            for t in 1..=steps {
                assert!(s.alpha(t) > 0.0 && s.alpha(t) < s.alpha(t - 1) && s.alpha(t - 1) < 1.0);
            }
        }
    }

    #[test]
    fn ten_steps() {
        let s = DiffusionSchedule::scaled_linear(10).unwrap();
        assert_eq!(s.steps(), 10);
        assert_eq!(s.timestep(1), 1);
        assert_eq!(s.timestep(10), 901);
        // Training step 1: (1 - β_0)(1 - β_1).
        let b1 = {
            let (lo, hi) = (BETA_START.sqrt(), BETA_END.sqrt());
            let r = lo + (hi - lo) / 999.0;
            r * r
        };
        assert!((s.alpha(1) - (1.0 - BETA_START) * (1.0 - b1)).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_counts() {
        assert_eq!(DiffusionSchedule::scaled_linear(0), Err(ScheduleError::StepCount(0)));
        assert!(DiffusionSchedule::scaled_linear(1001).is_err());
    }
}
