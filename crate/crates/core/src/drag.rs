//! Drag instructions: handle → target pairs and the edit mode they run under.

use serde::{Deserialize, Serialize};

use crate::grid::Point;

/// One drag: move the content at `handle` toward `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DragInstruction {
    pub handle: Point,
    pub target: Point,
}

impl DragInstruction {
    pub fn new(handle: Point, target: Point) -> Self {
        Self { handle, target }
    }

    /// Drag vector `target - handle`.
    pub fn vector(&self) -> Point {
        self.target - self.handle
    }

    /// Same handle with the drag vector multiplied by `alpha`.
    pub fn stretched(&self, alpha: f64) -> Self {
        Self {
            handle: self.handle,
            target: self.handle + alpha * self.vector(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DragMode {
    /// Content inside the mask stretches toward the targets.
    #[default]
    Stretch,
    /// The mask region shifts rigidly; the vacated area gets background.
    #[serde(rename = "object-move", alias = "move")]
    Move,
    /// The mask region shifts rigidly; the vacated area keeps the source.
    #[serde(rename = "object-replicate", alias = "replicate")]
    Replicate,
}

impl DragMode {
    pub fn is_object_mode(self) -> bool {
        matches!(self, DragMode::Move | DragMode::Replicate)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DragSet {
    pub instructions: Vec<DragInstruction>,
    pub mode: DragMode,
}

impl DragSet {
    pub fn new(instructions: Vec<DragInstruction>, mode: DragMode) -> Self {
        Self { instructions, mode }
    }

    pub fn stretch(instructions: Vec<DragInstruction>) -> Self {
        Self::new(instructions, DragMode::Stretch)
    }

    pub fn single(handle: Point, target: Point, mode: DragMode) -> Self {
        Self::new(vec![DragInstruction::new(handle, target)], mode)
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.instructions.iter().all(|d| d.vector() == Point::ZERO)
    }

    /// Every drag vector multiplied by `alpha`, handles unchanged.
    pub fn stretched(&self, alpha: f64) -> Self {
        Self {
            instructions: self.instructions.iter().map(|d| d.stretched(alpha)).collect(),
            mode: self.mode,
        }
    }

    /// Maps every endpoint from pixel coordinates to latent cell coordinates.
    pub fn to_latent(&self, factor: usize) -> Self {
        let map = |d: &DragInstruction| {
            DragInstruction::new(
                pixel_to_latent(d.handle, factor),
                pixel_to_latent(d.target, factor),
            )
        };
        Self {
            instructions: self.instructions.iter().map(map).collect(),
            mode: self.mode,
        }
    }
}

/// Position of a pixel-space point in latent cell units, where latent cell `k`
/// is the mean of pixels `k*f .. k*f + f - 1` and sits at their center.
/// Drag vectors scale by exactly `1/f`.
pub fn pixel_to_latent(p: Point, factor: usize) -> Point {
    let f = factor.max(1) as f64;
    Point::new((p.x + 0.5) / f - 0.5, (p.y + 0.5) / f - 0.5)
}
