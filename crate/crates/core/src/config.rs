//! Edit configuration and its defaults.

use serde::{Deserialize, Serialize};

/// How null cells left behind by relocation are filled in stretch mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NullFill {
    /// Bilateral nearest-neighbour interpolation from the four axis directions.
    #[default]
    Bnni,
    /// Restore the pre-relocation value at the cell.
    OriginalValue,
    Zero,
    /// Unit Gaussian noise from the configured seed.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    /// Warp the image channels directly.
    #[default]
    Pixel,
    /// Warp a noisy toy latent between encoding and decoding.
    ToyLatent,
}

/// Where sampling starts after the latent at `optimize_step` is warped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResampleFrom {
    /// Denoise the warped latent from its own noise level.
    #[default]
    #[serde(alias = "optimizeStep")]
    OptimizeStep,
    /// Re-noise the warped latent up to the last step, then denoise.
    #[serde(alias = "T")]
    Last,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "camelCase")]
pub struct EditConfig {
    pub inversion_steps: usize,
    /// 1-based inversion step whose latent is warped.
    pub optimize_step: usize,
    pub cp_enabled: bool,
    /// First sampling iteration (0-based) that uses cached keys and values.
    pub cp_start_step: usize,
    pub sigma: f64,
    pub null_fill: NullFill,
    /// Half-size of the background block used by object moves, in cells.
    pub object_move_radius: usize,
    pub seed: u64,
    pub backend: Backend,
    pub resample_from: ResampleFrom,
    /// Autoencoder downsampling factor for the toy-latent backend.
    pub latent_factor: usize,
}

impl Default for EditConfig {
    fn default() -> Self {
        Self {
            inversion_steps: 10,
            optimize_step: 7,
            cp_enabled: true,
            cp_start_step: 0,
            sigma: 0.0,
            null_fill: NullFill::Bnni,
            object_move_radius: 2,
            seed: 0,
            backend: Backend::Pixel,
            resample_from: ResampleFrom::OptimizeStep,
            latent_factor: 4,
        }
    }
}
