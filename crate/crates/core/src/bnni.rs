//! Null-region filling.
//!
//! Bilateral nearest-neighbour interpolation (BNNI) fills a null cell from
//! the nearest valued cell in each of the four axis directions, weighted by
//! inverse distance:
//!
//! ```text
//! value = Σ_loc w_loc · ref_loc,   w_loc = (1/len_loc) / Σ (1/len_loc)
//! ```
//!
//! References are always read from the grid as it was before the pass, so
//! filled cells never feed other fills and the visiting order is irrelevant.
//! The ablation strategies (original value, zero, random) are provided for
//! comparison.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::config::NullFill;
use crate::grid::{Cell, LatentGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Up,
    Right,
    Down,
    Left,
}

impl Direction {
    pub const ALL: [Direction; 4] = [Direction::Up, Direction::Right, Direction::Down, Direction::Left];

    fn step(self) -> (i64, i64) {
        match self {
            Direction::Up => (0, -1),
            Direction::Right => (1, 0),
            Direction::Down => (0, 1),
            Direction::Left => (-1, 0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub value: Vec<f64>,
    /// Cell count to the reference, at least 1.
    pub distance: usize,
}

/// Nearest valued cell per direction, indexed up, right, down, left.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReferenceSet {
    pub refs: [Option<Reference>; 4],
}

impl ReferenceSet {
    pub fn get(&self, dir: Direction) -> Option<&Reference> {
        self.refs[dir as usize].as_ref()
    }

    pub fn present(&self) -> impl Iterator<Item = &Reference> {
        self.refs.iter().flatten()
    }

    pub fn is_empty(&self) -> bool {
        self.refs.iter().all(Option::is_none)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("no valued cell in any direction")]
pub struct NoReferences;

/// Scans outward from `cell` along each axis over the whole grid.
pub fn find_references(grid: &LatentGrid, cell: Cell) -> ReferenceSet {
    let mut set = ReferenceSet::default();
    for dir in Direction::ALL {
        let (dx, dy) = dir.step();
        let (mut x, mut y) = (cell.x as i64, cell.y as i64);
        let mut distance = 0;
        loop {
            x += dx;
            y += dy;
            distance += 1;
            if !grid.contains(x, y) {
                break;
            }
            if let Some(v) = grid.get(Cell::new(x as usize, y as usize)) {
                set.refs[dir as usize] = Some(Reference {
                    value: v.to_vec(),
                    distance,
                });
                break;
            }
        }
    }
    set
}

/// Normalised inverse-distance weights over the present directions, in
/// up/right/down/left order (absent directions get 0).
pub fn reference_weights(refs: &ReferenceSet) -> [f64; 4] {
    let mut w = [0.0; 4];
    let mut total = 0.0;
    for (slot, r) in w.iter_mut().zip(&refs.refs) {
        if let Some(r) = r {
            *slot = 1.0 / r.distance as f64;
            total += *slot;
        }
    }
    if total > 0.0 {
        w.iter_mut().for_each(|x| *x /= total);
    }
    w
}

/// Interpolated channel vector from the present references.
pub fn interpolate_point(refs: &ReferenceSet) -> Result<Vec<f64>, NoReferences> {
    let first = refs.present().next().ok_or(NoReferences)?;
    let weights = reference_weights(refs);
    let mut out = vec![0.0; first.value.len()];
    for (w, r) in weights.iter().zip(&refs.refs) {
        if let Some(r) = r {
            out.iter_mut().zip(&r.value).for_each(|(o, v)| *o += w * v);
        }
    }
    Ok(out)
}

/// BNNI over `cells`, visited in the given order, reading references from
/// `snapshot`. Cells with no reference anywhere take their value from
/// `original`.
pub fn bnni_fill_cells(snapshot: &LatentGrid, original: &LatentGrid, cells: &[Cell]) -> LatentGrid {
    let mut out = snapshot.clone();
    for &cell in cells {
        let refs = find_references(snapshot, cell);
        match interpolate_point(&refs) {
            Ok(v) => out.set(cell, &v),
            Err(NoReferences) => out.set(cell, original.raw(cell)),
        }
    }
    out
}

/// Fills every null cell of `relocated` with `strategy`. `original` is the
/// grid before relocation; `seed` drives the random strategy.
pub fn interpolate_grid(
    relocated: &LatentGrid,
    original: &LatentGrid,
    strategy: NullFill,
    seed: u64,
) -> LatentGrid {
    assert!(relocated.same_shape(original), "shape mismatch");
    let nulls = relocated.null_cells();
    if nulls.is_empty() {
        return relocated.clone();
    }
    match strategy {
        NullFill::Bnni => bnni_fill_cells(relocated, original, &nulls),
        NullFill::OriginalValue => {
            let mut out = relocated.clone();
            for cell in nulls {
                out.set(cell, original.raw(cell));
            }
            out
        }
        NullFill::Zero => {
            let mut out = relocated.clone();
            let zero = vec![0.0; relocated.channels()];
            for cell in nulls {
                out.set(cell, &zero);
            }
            out
        }
        NullFill::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut out = relocated.clone();
            let mut v = vec![0.0; relocated.channels()];
            for cell in nulls {
                v.iter_mut().for_each(|x| *x = StandardNormal.sample(&mut rng));
                out.set(cell, &v);
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_grid(w: usize, h: usize, vals: &[f64]) -> LatentGrid {
        LatentGrid::from_vec(w, h, 1, vals.to_vec()).unwrap()
    }

    /// 5x5 grid, null at the center, references placed at the given offsets.
    fn cross_fixture() -> LatentGrid {
        let mut g = LatentGrid::filled(5, 5, &[100.0]).unwrap();
        for c in g.clone().cells() {
            if c.x == 2 || c.y == 2 {
                g.set_null(c);
            }
        }
        g.set(Cell::new(2, 1), &[0.0]); // up, distance 1
        g.set(Cell::new(4, 2), &[6.0]); // right, distance 2
        g.set(Cell::new(2, 3), &[3.0]); // down, distance 1
        g.set(Cell::new(0, 2), &[12.0]); // left, distance 2
        g
    }

    #[test]
    fn reference_distances() {
        let refs = find_references(&cross_fixture(), Cell::new(2, 2));
        let d: Vec<usize> = Direction::ALL.iter().map(|&dir| refs.get(dir).unwrap().distance).collect();
        assert_eq!(d, vec![1, 2, 1, 2]);
    }

    #[test]
    fn hand_computed_fill() {
        let refs = find_references(&cross_fixture(), Cell::new(2, 2));
        let w = reference_weights(&refs);
        let expect = [1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0];
        for (a, b) in w.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        let v = interpolate_point(&refs).unwrap();
        assert!((v[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn all_neighbours_adjacent() {
        let mut g = LatentGrid::filled(3, 3, &[2.0]).unwrap();
        g.set_null(Cell::new(1, 1));
        let refs = find_references(&g, Cell::new(1, 1));
        assert!(refs.present().all(|r| r.distance == 1));
        assert_eq!(interpolate_point(&refs).unwrap(), vec![2.0]);
    }

    #[test]
    fn border_cell_single_reference() {
        // Row 0 null except x=3, column 0 fully null.
        let mut g = LatentGrid::filled(5, 4, &[1.0]).unwrap();
        for x in 0..5 {
            g.set_null(Cell::new(x, 0));
        }
        for y in 0..4 {
            g.set_null(Cell::new(0, y));
        }
        g.set(Cell::new(3, 0), &[7.0]);
        let refs = find_references(&g, Cell::new(0, 0));
        assert_eq!(refs.present().count(), 1);
        let right = refs.get(Direction::Right).unwrap();
        assert_eq!(right.distance, 3);
        assert_eq!(interpolate_point(&refs).unwrap(), vec![7.0]);
    }

    #[test]
    fn no_reference_is_error() {
        assert_eq!(interpolate_point(&ReferenceSet::default()), Err(NoReferences));
    }

    #[test]
    fn isolated_null_falls_back_to_original() {
        let original = scalar_grid(2, 1, &[5.0, 6.0]);
        let mut g = original.clone();
        g.set_null(Cell::new(0, 0));
        g.set_null(Cell::new(1, 0));
        let out = interpolate_grid(&g, &original, NullFill::Bnni, 0);
        assert_eq!(out, original);
    }

    #[test]
    fn row_of_three_nulls() {
        // 5x5 ramp, cells (1..=3, 2) null. Each is filled from its own column
        // (up/down at distance 1) and from the row ends.
        let original = LatentGrid::from_fn(5, 5, 1, |x, y, _| (x * x + 3 * y) as f64).unwrap();
        let mut g = original.clone();
        for x in 1..=3 {
            g.set_null(Cell::new(x, 2));
        }
        let out = interpolate_grid(&g, &original, NullFill::Bnni, 0);
        let val = |x: usize, y: usize| (x * x + 3 * y) as f64;
        for x in 1..=3usize {
            let (l, r) = (x as f64, (4 - x) as f64);
            let ws = [1.0, 1.0 / r, 1.0, 1.0 / l];
            let vs = [val(x, 1), val(4, 2), val(x, 3), val(0, 2)];
            let total: f64 = ws.iter().sum();
            let expect: f64 = ws.iter().zip(vs).map(|(w, v)| w * v).sum::<f64>() / total;
            assert!((out.get(Cell::new(x, 2)).unwrap()[0] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn ablation_strategies() {
        let original = LatentGrid::from_fn(4, 4, 2, |x, y, c| (x + y + c) as f64).unwrap();
        let mut g = original.clone();
        let holes = [Cell::new(1, 1), Cell::new(2, 1), Cell::new(3, 3)];
        for c in holes {
            g.set_null(c);
        }
        let zero = interpolate_grid(&g, &original, NullFill::Zero, 0);
        let restored = interpolate_grid(&g, &original, NullFill::OriginalValue, 0);
        let noise_a = interpolate_grid(&g, &original, NullFill::Random, 7);
        let noise_b = interpolate_grid(&g, &original, NullFill::Random, 7);
        assert_eq!(restored, original);
        assert_eq!(noise_a, noise_b);
        for c in holes {
            assert_eq!(zero.get(c).unwrap(), &[0.0, 0.0]);
        }
        for out in [&zero, &restored, &noise_a] {
            assert!(!out.has_nulls());
        }
    }

    #[test]
    fn nothing_to_fill() {
        let g = scalar_grid(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(interpolate_grid(&g, &g, NullFill::Bnni, 0), g);
    }
}
