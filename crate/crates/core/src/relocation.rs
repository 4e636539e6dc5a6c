//! Latent relocation: copy each mask cell to its displaced position.
//!
//! Mask points are visited in row-major order. A point's target is
//! `round(p + v)` per axis (half away from zero). The first point to claim a
//! target writes there; later claims on the same target are dropped, as are
//! targets outside the grid. Mask cells that received no value become null.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::grid::{Cell, LatentGrid};
use crate::warpage::WarpageField;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct RelocationCounters {
    pub written: usize,
    pub dropped_out_of_bounds: usize,
    pub dropped_occupied: usize,
}

impl RelocationCounters {
    pub fn total(&self) -> usize {
        self.written + self.dropped_out_of_bounds + self.dropped_occupied
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelocationResult {
    /// Relocated grid; null exactly at `null_region`.
    pub grid: LatentGrid,
    /// Null cells in row-major order.
    pub null_region: Vec<Cell>,
    /// Target cell → source cell for every write.
    pub written_targets: BTreeMap<Cell, Cell>,
    pub counters: RelocationCounters,
}

/// Target cell for `p + v`, or `None` when it falls off the grid.
pub fn target_cell(grid: &LatentGrid, cell: Cell, v: crate::grid::Point) -> Option<Cell> {
    let tx = (cell.x as f64 + v.x).round();
    let ty = (cell.y as f64 + v.y).round();
    if !(tx.is_finite() && ty.is_finite()) {
        return None;
    }
    let (tx, ty) = (tx as i64, ty as i64);
    grid.contains(tx, ty)
        .then(|| Cell::new(tx as usize, ty as usize))
}

/// Applies `field` to `grid`. The input must be free of nulls and the field
/// must cover mask points inside the grid.
pub fn relocate(grid: &LatentGrid, field: &WarpageField) -> RelocationResult {
    let (w, _) = grid.dims();
    let mut out = grid.clone();
    let mut claimed = vec![false; grid.width() * grid.height()];
    let mut written_targets = BTreeMap::new();
    let mut counters = RelocationCounters::default();

    let mut order: Vec<(Cell, crate::grid::Point)> = field.iter().collect();
    order.sort_by_key(|(c, _)| c.row_major_key());

    for &(source, v) in &order {
        let Some(target) = target_cell(grid, source, v) else {
            counters.dropped_out_of_bounds += 1;
            continue;
        };
        let slot = target.y * w + target.x;
        if claimed[slot] {
            counters.dropped_occupied += 1;
            continue;
        }
        claimed[slot] = true;
        let value = grid.get(source).expect("relocation input must not contain nulls");
        out.set(target, value);
        written_targets.insert(target, source);
        counters.written += 1;
    }

    let mut null_region = Vec::new();
    for &(source, _) in &order {
        if !claimed[source.y * w + source.x] {
            out.set_null(source);
            null_region.push(source);
        }
    }
    null_region.sort_by_key(|c| c.row_major_key());

    RelocationResult {
        grid: out,
        null_region,
        written_targets,
        counters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Point;

    fn ramp(w: usize, h: usize) -> LatentGrid {
        LatentGrid::from_fn(w, h, 2, |x, y, c| (y * w + x) as f64 + 0.5 * c as f64).unwrap()
    }

    #[test]
    fn single_cell_shift() {
        let g = ramp(4, 4);
        let field = WarpageField::from_parts(vec![Cell::new(1, 1)], vec![Point::new(2.0, 0.0)]);
        let r = relocate(&g, &field);
        assert_eq!(r.grid.get(Cell::new(3, 1)), g.get(Cell::new(1, 1)));
        assert!(r.grid.is_null(Cell::new(1, 1)));
        assert_eq!(r.null_region, vec![Cell::new(1, 1)]);
        assert_eq!(r.written_targets.get(&Cell::new(3, 1)), Some(&Cell::new(1, 1)));
    }

    #[test]
    fn zero_field_is_identity() {
        let g = ramp(5, 3);
        let cells: Vec<Cell> = g.cells().collect();
        let field = WarpageField::uniform(&cells, Point::ZERO);
        let r = relocate(&g, &field);
        assert_eq!(r.grid, g);
        assert!(r.null_region.is_empty());
        assert_eq!(r.counters.written, 15);
    }

    #[test]
    fn collision_first_row_major_wins() {
        let g = ramp(4, 4);
        // (2,1) and (1,2) both land on (2,2); (2,1) comes first in row-major order.
        let field = WarpageField::from_parts(
            vec![Cell::new(1, 2), Cell::new(2, 1)],
            vec![Point::new(1.0, 0.0), Point::new(0.0, 1.0)],
        );
        let r = relocate(&g, &field);
        assert_eq!(r.grid.get(Cell::new(2, 2)), g.get(Cell::new(2, 1)));
        assert_eq!(r.counters.dropped_occupied, 1);
        assert_eq!(r.null_region, vec![Cell::new(2, 1), Cell::new(1, 2)]);
    }

    #[test]
    fn collision_onto_source_cell() {
        let g = ramp(4, 4);
        // (1,1) moves onto (2,1), (2,1) moves away: target (2,1) written by (1,1).
        // (2,2) tries to claim (2,1) after that and is dropped.
        let field = WarpageField::from_parts(
            vec![Cell::new(1, 1), Cell::new(2, 1), Cell::new(2, 2)],
            vec![Point::new(1.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, -1.0)],
        );
        let r = relocate(&g, &field);
        assert_eq!(r.grid.get(Cell::new(2, 1)), g.get(Cell::new(1, 1)));
        assert_eq!(r.grid.get(Cell::new(3, 1)), g.get(Cell::new(2, 1)));
        assert_eq!(r.null_region, vec![Cell::new(1, 1), Cell::new(2, 2)]);
        assert_eq!(r.counters.total(), 3);
    }

    #[test]
    fn out_of_bounds_dropped() {
        let g = ramp(4, 4);
        let field = WarpageField::from_parts(vec![Cell::new(3, 0)], vec![Point::new(0.6, 0.0)]);
        let r = relocate(&g, &field);
        assert_eq!(r.counters.dropped_out_of_bounds, 1);
        assert_eq!(r.null_region, vec![Cell::new(3, 0)]);
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        let g = ramp(6, 6);
        let field = WarpageField::from_parts(
            vec![Cell::new(2, 2), Cell::new(3, 3)],
            vec![Point::new(0.5, -0.5), Point::new(-0.49, 1.5)],
        );
        let r = relocate(&g, &field);
        assert_eq!(r.written_targets.get(&Cell::new(3, 2)), Some(&Cell::new(2, 2)));
        assert_eq!(r.written_targets.get(&Cell::new(3, 5)), Some(&Cell::new(3, 3)));
    }
}
