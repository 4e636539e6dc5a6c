//! Null handling for the object modes, where a whole region shifts rigidly
//! and leaves a large hole behind.

use crate::config::EditConfig;
use crate::drag::{DragMode, DragSet};
use crate::grid::{Cell, LatentGrid};
use crate::relocation::RelocationResult;

use super::PipelineError;

/// Inclusive block `[x0, x1] x [y0, y1]` of side `2r` around `center`,
/// cropped to the grid.
pub fn background_block(grid: &LatentGrid, center: Cell, radius: usize) -> (usize, usize, usize, usize) {
    let x0 = center.x.saturating_sub(radius);
    let y0 = center.y.saturating_sub(radius);
    let x1 = (center.x + radius - 1).min(grid.width() - 1);
    let y1 = (center.y + radius - 1).min(grid.height() - 1);
    (x0, y0, x1, y1)
}

/// Fills the null cells of `relocated`.
///
/// * `Move`: the `2r x 2r` block of `pre` centered on the target is tiled
///   over the hole (tiles anchored at the block's top-left corner), so the
///   vacated area takes on the background found where the object lands.
/// * `Replicate`: the hole keeps the pre-move content, duplicating the object.
pub fn apply_object_move_fill(
    relocated: &RelocationResult,
    pre: &LatentGrid,
    drags: &DragSet,
    config: &EditConfig,
) -> Result<LatentGrid, PipelineError> {
    if !drags.mode.is_object_mode() || drags.len() != 1 {
        return Err(PipelineError::ObjectFill(
            "object fill needs move or replicate mode with one instruction",
        ));
    }
    if config.object_move_radius == 0 {
        return Err(PipelineError::ObjectFill("object move radius must be at least 1"));
    }
    let mut out = relocated.grid.clone();
    match drags.mode {
        DragMode::Replicate => {
            for &cell in &relocated.null_region {
                out.set(cell, pre.raw(cell));
            }
        }
        DragMode::Move => {
            let target = drags.instructions[0].target;
            let cx = (target.x.round().max(0.0) as usize).min(pre.width() - 1);
            let cy = (target.y.round().max(0.0) as usize).min(pre.height() - 1);
            let (x0, y0, x1, y1) = background_block(pre, Cell::new(cx, cy), config.object_move_radius);
            let (bw, bh) = (x1 - x0 + 1, y1 - y0 + 1);
            for &cell in &relocated.null_region {
                let bx = x0 + (cell.x as i64 - x0 as i64).rem_euclid(bw as i64) as usize;
                let by = y0 + (cell.y as i64 - y0 as i64).rem_euclid(bh as i64) as usize;
                out.set(cell, pre.raw(Cell::new(bx, by)));
            }
        }
        DragMode::Stretch => unreachable!("checked above"),
    }
    Ok(out)
}
