use dragwarp_core::bnni::{bnni_fill_cells, find_references, interpolate_grid, interpolate_point, reference_weights, Direction};
use dragwarp_core::{Cell, LatentGrid, NullFill};
use proptest::prelude::*;

/// Brute-force reference scan: walk each axis cell by cell.
fn scan(grid: &LatentGrid, cell: Cell) -> Vec<(Vec<f64>, f64)> {
    let mut out = Vec::new();
    for (dx, dy) in [(0i64, -1i64), (1, 0), (0, 1), (-1, 0)] {
        let (mut x, mut y, mut n) = (cell.x as i64, cell.y as i64, 0);
        loop {
            x += dx;
            y += dy;
            n += 1;
            if !grid.contains(x, y) {
                break;
            }
            if let Some(v) = grid.get(Cell::new(x as usize, y as usize)) {
                out.push((v.to_vec(), n as f64));
                break;
            }
        }
    }
    out
}

fn oracle_fill(grid: &LatentGrid, original: &LatentGrid, cell: Cell) -> Vec<f64> {
    let refs = scan(grid, cell);
    if refs.is_empty() {
        return original.raw(cell).to_vec();
    }
    let total: f64 = refs.iter().map(|(_, d)| 1.0 / d).sum();
    let mut v = vec![0.0; grid.channels()];
    for (r, d) in &refs {
        for (acc, x) in v.iter_mut().zip(r) {
            *acc += (1.0 / d) / total * x;
        }
    }
    v
}

fn grid_with_nulls() -> impl Strategy<Value = (LatentGrid, LatentGrid)> {
    (2usize..20, 2usize..20, 1usize..4).prop_flat_map(|(w, h, c)| {
        (
            prop::collection::vec(-5.0..5.0f64, w * h * c),
            prop::collection::vec(prop::bool::weighted(0.4), w * h),
        )
            .prop_map(move |(vals, nulls)| {
                let original = LatentGrid::from_vec(w, h, c, vals).unwrap();
                let mut g = original.clone();
                for (i, n) in nulls.iter().enumerate() {
                    if *n {
                        g.set_null(Cell::new(i % w, i / w));
                    }
                }
                (g, original)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bnni_invariants((g, original) in grid_with_nulls()) {
        let out = interpolate_grid(&g, &original, NullFill::Bnni, 0);
        prop_assert_eq!(out.null_count(), 0);
        for cell in g.cells() {
            if let Some(v) = g.get(cell) {
                prop_assert_eq!(out.get(cell).unwrap(), v);
                continue;
            }
            let refs = find_references(&g, cell);
            let expect = oracle_fill(&g, &original, cell);
            for (a, b) in out.raw(cell).iter().zip(&expect) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
            if !refs.is_empty() {
                let w = reference_weights(&refs);
                prop_assert!((w.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
                for ch in 0..g.channels() {
                    let vals: Vec<f64> = refs.present().map(|r| r.value[ch]).collect();
                    let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                    let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    let x = out.raw(cell)[ch];
                    prop_assert!(x >= lo - 1e-12 && x <= hi + 1e-12);
                }
            }
        }
    }

    #[test]
    fn visiting_order_is_irrelevant((g, original) in grid_with_nulls()) {
        let mut cells = g.null_cells();
        let forward = bnni_fill_cells(&g, &original, &cells);
        cells.reverse();
        let backward = bnni_fill_cells(&g, &original, &cells);
        prop_assert_eq!(forward, backward);
    }

    #[test]
    fn ablations_fill_everything((g, original) in grid_with_nulls(), seed in any::<u64>()) {
        for s in [NullFill::OriginalValue, NullFill::Zero, NullFill::Random] {
            let out = interpolate_grid(&g, &original, s, seed);
            prop_assert_eq!(out.null_count(), 0);
            for cell in g.cells() {
                match (g.get(cell), s) {
                    (Some(v), _) => prop_assert_eq!(out.get(cell).unwrap(), v),
                    (None, NullFill::OriginalValue) => prop_assert_eq!(out.get(cell), original.get(cell)),
                    (None, NullFill::Zero) => prop_assert!(out.raw(cell).iter().all(|x| *x == 0.0)),
                    _ => {}
                }
            }
        }
        prop_assert_eq!(
            interpolate_grid(&g, &original, NullFill::Random, seed),
            interpolate_grid(&g, &original, NullFill::Random, seed)
        );
    }
}

#[test]
fn hand_computed_fixture() {
    // Null centre of a 5x5 grid; up at distance 1 (0), right at 2 (6),
    // down at 1 (3), left at 2 (12).
    let mut g = LatentGrid::filled(5, 5, &[100.0]).unwrap();
    let c = Cell::new(2, 2);
    for cell in [c, Cell::new(3, 2), Cell::new(1, 2)] {
        g.set_null(cell);
    }
    g.set(Cell::new(2, 1), &[0.0]);
    g.set(Cell::new(4, 2), &[6.0]);
    g.set(Cell::new(2, 3), &[3.0]);
    g.set(Cell::new(0, 2), &[12.0]);
    let refs = find_references(&g, c);
    let dist: Vec<usize> = Direction::ALL.iter().map(|d| refs.get(*d).unwrap().distance).collect();
    assert_eq!(dist, vec![1, 2, 1, 2]);
    let w = reference_weights(&refs);
    for (a, b) in w.iter().zip([1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0]) {
        assert!((a - b).abs() <= 1e-12);
    }
    assert!((interpolate_point(&refs).unwrap()[0] - 4.0).abs() <= 1e-12);
}

#[test]
fn null_run_matches_oracle() {
    let original = LatentGrid::from_fn(5, 5, 1, |x, y, _| (x * x + 3 * y) as f64).unwrap();
    let mut g = original.clone();
    for x in 1..4 {
        g.set_null(Cell::new(x, 2));
    }
    let out = interpolate_grid(&g, &original, NullFill::Bnni, 0);
    for x in 1..4 {
        let cell = Cell::new(x, 2);
        assert!((out.raw(cell)[0] - oracle_fill(&g, &original, cell)[0]).abs() <= 1e-12);
    }
    // Middle cell: up 1 (value 4+3=7), down 1 (4+9=13), left 2 (0+6=6), right 2 (16+6=22).
    let expect = (7.0 + 13.0) / 3.0 + (6.0 + 22.0) / 6.0;
    assert!((out.raw(Cell::new(2, 2))[0] - expect).abs() <= 1e-12);
}
