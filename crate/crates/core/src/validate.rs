//! Cross-type checks run before any edit. Every violation is collected; the
//! caller gets the full list rather than the first failure.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::config::{Backend, EditConfig};
use crate::drag::{DragMode, DragSet};
use crate::grid::LatentGrid;
use crate::mask::{build_mask_point_set, MaskBitmap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("edit needs at least one instruction")]
    NoInstructions,
    #[error("object mode requires one instruction, got {0}")]
    ObjectModeRequiresOne(usize),
    #[error("handle out of bounds")]
    HandleOutOfBounds,
    #[error("target out of bounds")]
    TargetOutOfBounds,
    #[error("handle outside reference circle")]
    HandleOutsideCircle,
    #[error("mask is {mask_w}x{mask_h} but image is {grid_w}x{grid_h}")]
    MaskShapeMismatch {
        mask_w: usize,
        mask_h: usize,
        grid_w: usize,
        grid_h: usize,
    },
    #[error("mask is empty")]
    EmptyMask,
    #[error("mask vanishes at latent resolution")]
    MaskVanishesAtLatent,
    #[error("handle outside reference circle at latent resolution")]
    LatentHandleOutsideCircle,
    #[error("must be at least 1")]
    MustBePositive,
    #[error("must lie in [{min}, {max}], got {value}")]
    OutOfRange { min: usize, max: usize, value: usize },
    #[error("must be finite and non-negative")]
    NegativeOrNonFinite,
    #[error("{0}")]
    Malformed(String),
}

/// One violation and the path of the offending field (`instructions[1].handle`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationError {
    pub field: String,
    pub message: String,
    #[serde(skip)]
    pub violation: Violation,
}

impl ValidationError {
    pub fn new(field: impl Into<String>, violation: Violation) -> Self {
        Self {
            field: field.into(),
            message: violation.to_string(),
            violation,
        }
    }
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Error, Serialize)]
#[serde(transparent)]
pub struct ValidationErrors(pub Vec<ValidationError>);

impl fmt::Display for ValidationErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

impl ValidationErrors {
    pub fn iter(&self) -> impl Iterator<Item = &ValidationError> {
        self.0.iter()
    }

    pub fn has(&self, pred: impl Fn(&Violation) -> bool) -> bool {
        self.0.iter().any(|e| pred(&e.violation))
    }
}

/// Checks the configuration ranges alone.
pub fn validate_config(config: &EditConfig) -> Vec<ValidationError> {
    let mut errors = Vec::new();
    if config.inversion_steps == 0 {
        errors.push(ValidationError::new(
            "config.inversionSteps",
            Violation::MustBePositive,
        ));
    }
    if config.optimize_step == 0 || config.optimize_step > config.inversion_steps {
        errors.push(ValidationError::new(
            "config.optimizeStep",
            Violation::OutOfRange {
                min: 1,
                max: config.inversion_steps,
                value: config.optimize_step,
            },
        ));
    }
    if config.cp_start_step > config.inversion_steps {
        errors.push(ValidationError::new(
            "config.cpStartStep",
            Violation::OutOfRange {
                min: 0,
                max: config.inversion_steps,
                value: config.cp_start_step,
            },
        ));
    }
    if !(config.sigma.is_finite() && config.sigma >= 0.0) {
        errors.push(ValidationError::new(
            "config.sigma",
            Violation::NegativeOrNonFinite,
        ));
    }
    if config.object_move_radius == 0 {
        errors.push(ValidationError::new(
            "config.objectMoveRadius",
            Violation::MustBePositive,
        ));
    }
    if config.latent_factor == 0 {
        errors.push(ValidationError::new(
            "config.latentFactor",
            Violation::MustBePositive,
        ));
    }
    errors
}

/// Validates a full edit request against the image it applies to.
pub fn validate_edit_request(
    grid: &LatentGrid,
    drags: &DragSet,
    mask: &MaskBitmap,
    config: &EditConfig,
) -> Result<(), ValidationErrors> {
    let mut errors = Vec::new();

    if drags.is_empty() {
        errors.push(ValidationError::new(
            "instructions",
            Violation::NoInstructions,
        ));
    }
    if drags.mode.is_object_mode() && drags.len() > 1 {
        errors.push(ValidationError::new(
            "instructions",
            Violation::ObjectModeRequiresOne(drags.len()),
        ));
    }
    for (i, d) in drags.instructions.iter().enumerate() {
        if !grid.contains_point(d.handle) {
            errors.push(ValidationError::new(
                format!("instructions[{i}].handle"),
                Violation::HandleOutOfBounds,
            ));
        }
        if !grid.contains_point(d.target) {
            errors.push(ValidationError::new(
                format!("instructions[{i}].target"),
                Violation::TargetOutOfBounds,
            ));
        }
    }

    let mut mask_points = None;
    if mask.width() != grid.width() || mask.height() != grid.height() {
        errors.push(ValidationError::new(
            "mask",
            Violation::MaskShapeMismatch {
                mask_w: mask.width(),
                mask_h: mask.height(),
                grid_w: grid.width(),
                grid_h: grid.height(),
            },
        ));
    } else {
        match build_mask_point_set(mask) {
            Ok(set) => mask_points = Some(set),
            Err(_) => errors.push(ValidationError::new("mask", Violation::EmptyMask)),
        }
    }

    // Stretch geometry needs every force point strictly inside the circle.
    if let (Some(set), DragMode::Stretch) = (&mask_points, drags.mode) {
        let circle = set.circle();
        for (i, d) in drags.instructions.iter().enumerate() {
            if d.handle.is_finite() && !circle.strictly_contains(d.handle) {
                errors.push(ValidationError::new(
                    format!("instructions[{i}].handle"),
                    Violation::HandleOutsideCircle,
                ));
            }
        }
    }

    let config_errors = validate_config(config);
    let factor_ok = config.latent_factor > 0;
    errors.extend(config_errors);

    if config.backend == Backend::ToyLatent && factor_ok && mask_points.is_some() {
        let latent_mask = mask.downscale(config.latent_factor);
        match build_mask_point_set(&latent_mask) {
            Err(_) => errors.push(ValidationError::new(
                "mask",
                Violation::MaskVanishesAtLatent,
            )),
            Ok(set) if drags.mode == DragMode::Stretch => {
                let circle = set.circle();
                let latent = drags.to_latent(config.latent_factor);
                for (i, d) in latent.instructions.iter().enumerate() {
                    if d.handle.is_finite() && !circle.strictly_contains(d.handle) {
                        errors.push(ValidationError::new(
                            format!("instructions[{i}].handle"),
                            Violation::LatentHandleOutsideCircle,
                        ));
                    }
                }
            }
            Ok(_) => {}
        }
    }

    if errors.is_empty() {
        Ok(())
    } else {
        Err(ValidationErrors(errors))
    }
}
