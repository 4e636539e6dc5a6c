//! End-to-end edits on either backend.
//!
//! The pixel backend warps image channels directly. The toy-latent backend
//! encodes, inverts, warps the latent at `optimize_step`, fills holes, samples
//! back down with cached attention and decodes.

pub mod metrics;
pub mod object_fill;

use serde::Serialize;
use thiserror::Error;

use crate::bnni::interpolate_grid;
use crate::config::{Backend, EditConfig, ResampleFrom};
use crate::diffusion::autoencoder::ToyAutoencoder;
use crate::diffusion::predictor::{NoisePredictor, ToyNoisePredictor};
use crate::diffusion::schedule::{DiffusionSchedule, ScheduleError};
use crate::diffusion::{invert, invert_range, sample, AttentionKVCache, DiffusionError, SampleOptions};
use crate::drag::{DragMode, DragSet};
use crate::grid::LatentGrid;
use crate::mask::{build_mask_point_set, MaskBitmap, MaskError};
use crate::relocation::{relocate, RelocationCounters, RelocationResult};
use crate::validate::{validate_edit_request, ValidationErrors};
use crate::warpage::{compute_warpage_field, WarpError};

pub use metrics::{drag_fidelity, match_template, MetricError, Probe};
pub use object_fill::apply_object_move_fill;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid request: {0}")]
    Validation(ValidationErrors),
    #[error(transparent)]
    Mask(#[from] MaskError),
    #[error(transparent)]
    Warp(#[from] WarpError),
    #[error(transparent)]
    Diffusion(#[from] DiffusionError),
    #[error(transparent)]
    Schedule(#[from] ScheduleError),
    #[error("{0}")]
    ObjectFill(&'static str),
    #[error("backend {0:?} cannot run this operation")]
    WrongBackend(Backend),
}

impl From<ValidationErrors> for PipelineError {
    fn from(e: ValidationErrors) -> Self {
        Self::Validation(e)
    }
}

/// Per-stage wall times in milliseconds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Timings {
    pub warpage_ms: f64,
    pub relocation_ms: f64,
    pub fill_ms: f64,
    pub encode_ms: f64,
    pub inversion_ms: f64,
    pub sampling_ms: f64,
    pub decode_ms: f64,
    pub total_ms: f64,
}

impl Timings {
    /// Time spent in the warp stages.
    pub fn warp_ms(&self) -> f64 {
        self.warpage_ms + self.relocation_ms + self.fill_ms
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Diagnostics {
    pub backend: Backend,
    pub mode: DragMode,
    pub mask_points: usize,
    pub relocation: RelocationCounters,
    /// Null cells left by relocation, before filling.
    pub null_count: usize,
    /// Always 1: the warp is applied once, never iterated.
    pub optimization_passes: u32,
    pub timings: Timings,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EditOutcome {
    pub output: LatentGrid,
    pub diagnostics: Diagnostics,
    pub config: EditConfig,
}

#[cfg(not(target_arch = "wasm32"))]
mod clock {
    use std::time::Instant;

    pub struct Stopwatch(Instant);

    impl Stopwatch {
        pub fn start() -> Self {
            Self(Instant::now())
        }

        /// Milliseconds since the last lap (or start).
        pub fn lap(&mut self) -> f64 {
            let now = Instant::now();
            let ms = now.duration_since(self.0).as_secs_f64() * 1e3;
            self.0 = now;
            ms
        }
    }
}

// `Instant::now` panics on wasm32-unknown-unknown.
#[cfg(target_arch = "wasm32")]
mod clock {
    pub struct Stopwatch;

    impl Stopwatch {
        pub fn start() -> Self {
            Self
        }

        pub fn lap(&mut self) -> f64 {
            0.0
        }
    }
}

use clock::Stopwatch;

/// Result of warping one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedGrid {
    pub grid: LatentGrid,
    pub relocation: RelocationResult,
    pub mask_points: usize,
}

/// The warp stages on `grid`, untimed. `mask` and
/// `drags` must already be at the grid's resolution.
pub fn warp_grid(
    grid: &LatentGrid,
    mask: &MaskBitmap,
    drags: &DragSet,
    config: &EditConfig,
) -> Result<WarpedGrid, PipelineError> {
    let mut timings = Timings::default();
    warp_grid_timed(grid, mask, drags, config, &mut timings)
}

fn warp_grid_timed(
    grid: &LatentGrid,
    mask: &MaskBitmap,
    drags: &DragSet,
    config: &EditConfig,
    timings: &mut Timings,
) -> Result<WarpedGrid, PipelineError> {
    let mut clock = Stopwatch::start();
    let points = build_mask_point_set(mask)?;
    let field = compute_warpage_field(&points, drags, &points.circle())?;
    timings.warpage_ms = clock.lap();

    let relocation = relocate(grid, &field);
    timings.relocation_ms = clock.lap();

    let filled = if drags.mode.is_object_mode() {
        apply_object_move_fill(&relocation, grid, drags, config)?
    } else {
        interpolate_grid(&relocation.grid, grid, config.null_fill, config.seed)
    };
    timings.fill_ms = clock.lap();

    Ok(WarpedGrid {
        grid: filled,
        relocation,
        mask_points: points.len(),
    })
}

fn diagnostics(config: &EditConfig, drags: &DragSet, warped: &WarpedGrid, timings: Timings) -> Diagnostics {
    Diagnostics {
        backend: config.backend,
        mode: drags.mode,
        mask_points: warped.mask_points,
        relocation: warped.relocation.counters,
        null_count: warped.relocation.null_region.len(),
        optimization_passes: 1,
        timings,
    }
}

/// Drag edit straight on image channels.
pub fn edit_pixel(
    image: &LatentGrid,
    mask: &MaskBitmap,
    drags: &DragSet,
    config: &EditConfig,
) -> Result<EditOutcome, PipelineError> {
    let config = EditConfig {
        backend: Backend::Pixel,
        ..config.clone()
    };
    validate_edit_request(image, drags, mask, &config)?;
    let mut timings = Timings::default();
    let mut total = Stopwatch::start();
    let warped = warp_grid_timed(image, mask, drags, &config, &mut timings)?;
    timings.total_ms = total.lap();
    Ok(EditOutcome {
        output: warped.grid.clone(),
        diagnostics: diagnostics(&config, drags, &warped, timings),
        config,
    })
}

/// Drag edit on the toy diffusion latent with the committed predictor.
pub fn edit_latent(
    image: &LatentGrid,
    mask: &MaskBitmap,
    drags: &DragSet,
    config: &EditConfig,
) -> Result<EditOutcome, PipelineError> {
    edit_latent_with(image, mask, drags, config, &ToyNoisePredictor::golden())
}

fn sample_options(config: &EditConfig) -> SampleOptions {
    SampleOptions {
        cp_enabled: config.cp_enabled,
        cp_start_step: config.cp_start_step,
        sigma: config.sigma,
        seed: config.seed,
    }
}

struct Inverted {
    autoencoder: ToyAutoencoder,
    schedule: DiffusionSchedule,
    trajectory: crate::diffusion::Trajectory,
    cache: AttentionKVCache,
}

fn encode_and_invert(
    image: &LatentGrid,
    config: &EditConfig,
    predictor: &dyn NoisePredictor,
    timings: &mut Timings,
    clock: &mut Stopwatch,
) -> Result<Inverted, PipelineError> {
    let autoencoder = ToyAutoencoder::new(config.latent_factor);
    let z0 = autoencoder.encode(image);
    timings.encode_ms = clock.lap();
    let schedule = DiffusionSchedule::scaled_linear(config.inversion_steps)?;
    let mut cache = AttentionKVCache::new();
    let trajectory = invert(&z0, &schedule, predictor, &mut cache)?;
    timings.inversion_ms = clock.lap();
    Ok(Inverted {
        autoencoder,
        schedule,
        trajectory,
        cache,
    })
}

/// Samples from `z_n` (the latent at `optimize_step`) down to `z'_0`.
fn resample(
    z_n: &LatentGrid,
    inv: &Inverted,
    config: &EditConfig,
    predictor: &dyn NoisePredictor,
) -> Result<LatentGrid, PipelineError> {
    let n = config.optimize_step;
    let options = sample_options(config);
    let z0 = match config.resample_from {
        ResampleFrom::OptimizeStep => sample(z_n, n, &inv.schedule, predictor, Some(&inv.cache), options)?,
        ResampleFrom::Last => {
            let steps = inv.schedule.steps();
            let upper = invert_range(z_n, n, steps, &inv.schedule, predictor, None)?;
            let z_t = upper.last().expect("non-empty range");
            sample(z_t, steps, &inv.schedule, predictor, Some(&inv.cache), options)?
        }
    };
    Ok(z0)
}

/// [`edit_latent`] with an explicit noise predictor.
pub fn edit_latent_with(
    image: &LatentGrid,
    mask: &MaskBitmap,
    drags: &DragSet,
    config: &EditConfig,
    predictor: &dyn NoisePredictor,
) -> Result<EditOutcome, PipelineError> {
    let config = EditConfig {
        backend: Backend::ToyLatent,
        ..config.clone()
    };
    validate_edit_request(image, drags, mask, &config)?;
    let mut timings = Timings::default();
    let mut total = Stopwatch::start();
    let mut clock = Stopwatch::start();

    let inv = encode_and_invert(image, &config, predictor, &mut timings, &mut clock)?;
    let z_n = inv.trajectory.at(config.optimize_step);
    let latent_mask = mask.downscale(config.latent_factor);
    let latent_drags = drags.to_latent(config.latent_factor);
    let warped = warp_grid_timed(z_n, &latent_mask, &latent_drags, &config, &mut timings)?;
    clock.lap();

    let z0 = resample(&warped.grid, &inv, &config, predictor)?;
    timings.sampling_ms = clock.lap();
    let output = inv.autoencoder.decode(&z0, image.width(), image.height());
    timings.decode_ms = clock.lap();
    timings.total_ms = total.lap();

    Ok(EditOutcome {
        output,
        diagnostics: diagnostics(&config, &latent_drags, &warped, timings),
        config,
    })
}

/// Latent round trip with no warp in between.
pub fn reconstruct(image: &LatentGrid, config: &EditConfig) -> Result<LatentGrid, PipelineError> {
    reconstruct_with(image, config, &ToyNoisePredictor::golden())
}

pub fn reconstruct_with(
    image: &LatentGrid,
    config: &EditConfig,
    predictor: &dyn NoisePredictor,
) -> Result<LatentGrid, PipelineError> {
    let mut timings = Timings::default();
    let mut clock = Stopwatch::start();
    let inv = encode_and_invert(image, config, predictor, &mut timings, &mut clock)?;
    let z0 = resample(inv.trajectory.at(config.optimize_step), &inv, config, predictor)?;
    Ok(inv.autoencoder.decode(&z0, image.width(), image.height()))
}

/// Dispatches on `config.backend`.
pub fn edit(
    image: &LatentGrid,
    mask: &MaskBitmap,
    drags: &DragSet,
    config: &EditConfig,
) -> Result<EditOutcome, PipelineError> {
    match config.backend {
        Backend::Pixel => edit_pixel(image, mask, drags, config),
        Backend::ToyLatent => edit_latent(image, mask, drags, config),
    }
}
