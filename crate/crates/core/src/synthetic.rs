//! Seeded synthetic scenes with a planted Gaussian blob, for fidelity checks
//! and demos.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::drag::{DragMode, DragSet};
use crate::grid::{Cell, LatentGrid, Point};
use crate::mask::MaskBitmap;
use crate::pipeline::Probe;

pub const BLOB_SIGMA: f64 = 3.0;
pub const BLOB_COLOR: [f64; 3] = [0.75, 0.55, 0.35];
pub const BACKGROUND: f64 = 0.2;
pub const TEXTURE_AMPLITUDE: f64 = 0.03;
pub const PROBE_HALF: usize = 8;
pub const MASK_MARGIN: usize = 64;

/// Smooth low-frequency background: a few sinusoids with seeded phases.
pub fn textured_background(width: usize, height: usize, seed: u64) -> LatentGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let waves: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| {
            let fx = rng.random_range(0.01..0.05);
            let fy = rng.random_range(0.01..0.05);
            let phase = rng.random_range(0.0..std::f64::consts::TAU);
            (fx, fy, phase)
        })
        .collect();
    LatentGrid::from_fn(width, height, 3, |x, y, c| {
        let t: f64 = waves
            .iter()
            .map(|(fx, fy, ph)| (fx * x as f64 + fy * y as f64 + ph + c as f64).sin())
            .sum::<f64>()
            / waves.len() as f64;
        BACKGROUND + TEXTURE_AMPLITUDE * t
    })
    .expect("non-empty scene")
}

/// Adds a Gaussian blob centered on `center`.
pub fn plant_blob(grid: &mut LatentGrid, center: Point) {
    let two_s2 = 2.0 * BLOB_SIGMA * BLOB_SIGMA;
    let reach = (4.0 * BLOB_SIGMA).ceil() as i64;
    let (cx, cy) = (center.x.round() as i64, center.y.round() as i64);
    let mut v = vec![0.0; grid.channels()];
    for y in cy - reach..=cy + reach {
        for x in cx - reach..=cx + reach {
            if !grid.contains(x, y) {
                continue;
            }
            let cell = Cell::new(x as usize, y as usize);
            let g = (-(cell.center() - center).norm().powi(2) / two_s2).exp();
            v.copy_from_slice(grid.raw(cell));
            for (ch, val) in v.iter_mut().enumerate() {
                *val += g * BLOB_COLOR[ch % BLOB_COLOR.len()];
            }
            grid.set(cell, &v);
        }
    }
}

/// One synthetic drag problem.
#[derive(Debug, Clone)]
pub struct BlobCase {
    pub image: LatentGrid,
    pub mask: MaskBitmap,
    pub drags: DragSet,
    pub probe: Probe,
}

/// Box mask covering `s` and `e` plus `margin` on every side, clipped.
pub fn drag_box_mask(width: usize, height: usize, s: Point, e: Point, margin: usize) -> MaskBitmap {
    let m = margin as f64;
    let clip = |v: f64, n: usize| v.round().clamp(0.0, (n - 1) as f64) as usize;
    MaskBitmap::rect(
        width,
        height,
        clip(s.x.min(e.x) - m, width),
        clip(s.y.min(e.y) - m, height),
        clip(s.x.max(e.x) + m, width),
        clip(s.y.max(e.y) + m, height),
    )
}

/// Blob scene with the blob at `s` and a single stretch drag `s → e`.
pub fn blob_case(width: usize, height: usize, s: Point, e: Point, seed: u64) -> BlobCase {
    let mut image = textured_background(width, height, seed);
    plant_blob(&mut image, s);
    let probe = Probe::around(
        &image,
        Cell::new(s.x.round() as usize, s.y.round() as usize),
        PROBE_HALF,
    );
    BlobCase {
        mask: drag_box_mask(width, height, s, e, MASK_MARGIN),
        drags: DragSet::single(s, e, DragMode::Stretch),
        image,
        probe,
    }
}

/// Random integer-aligned blob drag of length up to `max_drag` on a
/// `size x size` scene. Handle and target keep the probe window inside.
pub fn random_blob_case(size: usize, max_drag: f64, seed: u64) -> BlobCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_b10b);
    let lo = (4 * PROBE_HALF) as f64;
    let hi = size as f64 - 1.0 - lo;
    loop {
        let s = Point::new(rng.random_range(lo..=hi).round(), rng.random_range(lo..=hi).round());
        let len = rng.random_range(max_drag.min(5.0)..=max_drag);
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let e = Point::new((s.x + len * angle.cos()).round(), (s.y + len * angle.sin()).round());
        if (lo..=hi).contains(&e.x) && (lo..=hi).contains(&e.y) && e != s {
            return blob_case(size, size, s, e, seed);
        }
    }
}
