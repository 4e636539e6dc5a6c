//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! `cargo test -p dragwarp-service --test acceptance -- --nocapture`

use std::collections::HashSet;
use std::path::Path;
use std::time::{Duration, Instant};

use dragwarp_core::bnni::{bnni_fill_cells, find_references, interpolate_grid, interpolate_point, reference_weights};
use dragwarp_core::diffusion::{invert, sample, AttentionKVCache, DiffusionSchedule, SampleOptions, ToyNoisePredictor, ZeroPredictor, TOY_ROUND_TRIP_BOUND};
use dragwarp_core::pipeline::metrics::drag_fidelity;
use dragwarp_core::pipeline::{edit_latent, edit_pixel, reconstruct, warp_grid};
use dragwarp_core::relocation::relocate;
use dragwarp_core::synthetic::random_blob_case;
use dragwarp_core::warpage::{compute_warpage_field, instruction_weights, stretch_factor, warpage_vector, WarpageField};
use dragwarp_core::{
    build_mask_point_set, Backend, Cell, DragInstruction, DragMode, DragSet, EditConfig, LatentGrid, MaskBitmap,
    NullFill, Point, ReferenceCircle,
};
use dragwarp_service::cli::{run_cli_with, EXIT_OK, EXIT_USAGE, EXIT_VALIDATION};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn inside(c: &ReferenceCircle, frac: f64, angle: f64) -> Point {
    c.center + (frac * c.radius) * Point::new(angle.cos(), angle.sin())
}

fn ray_march(p: Point, s: Point, c: &ReferenceCircle, step: f64) -> f64 {
    let len = p.distance(s);
    if len == 0.0 {
        return 1.0;
    }
    let dir = (1.0 / len) * (p - s);
    let mut t = len;
    while (s + (t + step) * dir).distance(c.center) <= c.radius {
        t += step;
    }
    ((t - len) / t).clamp(0.0, 1.0)
}

fn stretch_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let start = Instant::now();
    let (mut worst, mut worst_boundary) = (0.0f64, 0.0f64);
    let n = 1000;
    for _ in 0..n {
        let c = ReferenceCircle::new(
            Point::new(rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)),
            rng.random_range(1.0..30.0),
        );
        let s = inside(&c, rng.random_range(0.0..0.95), rng.random_range(0.0..std::f64::consts::TAU));
        let p = inside(&c, rng.random_range(0.0..1.0), rng.random_range(0.0..std::f64::consts::TAU));
        let closed = stretch_factor(p, s, &c).map_err(|e| e.to_string())?;
        worst = worst.max((closed - ray_march(p, s, &c, 1e-3)).abs());
        let at_handle = stretch_factor(s, s, &c).map_err(|e| e.to_string())?;
        let on = inside(&c, 1.0, rng.random_range(0.0..std::f64::consts::TAU));
        let at_circle = stretch_factor(on, s, &c).map_err(|e| e.to_string())?;
        worst_boundary = worst_boundary.max((at_handle - 1.0).abs()).max(at_circle.abs());
    }
    let elapsed = start.elapsed();
    check(
        worst <= 1e-2 && worst_boundary <= 1e-6 && elapsed < Duration::from_secs(5),
        format!("{n} configs, max |closed - marched| = {worst:.2e}, boundary error {worst_boundary:.1e}, {elapsed:.2?}"),
    )
}

fn random_stretch(rng: &mut ChaCha8Rng, c: &ReferenceCircle, k: usize) -> DragSet {
    DragSet::stretch(
        (0..k)
            .map(|_| {
                let s = inside(c, rng.random_range(0.0..0.9), rng.random_range(0.0..std::f64::consts::TAU));
                DragInstruction::new(s, s + Point::new(rng.random_range(-15.0..15.0), rng.random_range(-15.0..15.0)))
            })
            .collect(),
    )
}

fn random_rect(rng: &mut ChaCha8Rng, w: usize, h: usize) -> MaskBitmap {
    let x0 = rng.random_range(0..w / 2);
    let y0 = rng.random_range(0..h / 2);
    MaskBitmap::rect(w, h, x0, y0, rng.random_range(w / 2..w), rng.random_range(h / 2..h))
}

fn warpage_properties() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let (mut angle, mut handle, mut linear, mut weights) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let cases = 200;
    for _ in 0..cases {
        let mask = random_rect(&mut rng, 40, 40);
        let set = build_mask_point_set(&mask).map_err(|e| e.to_string())?;
        let c = set.circle();

        let single = random_stretch(&mut rng, &c, 1);
        let d = single.instructions[0].vector();
        let field = compute_warpage_field(&set, &single, &c).map_err(|e| e.to_string())?;
        for &v in field.vectors() {
            if v.norm() > 0.0 && d.norm() > 0.0 {
                angle = angle.max((v.dot(d) / (v.norm() * d.norm())).clamp(-1.0, 1.0).acos());
            }
        }
        let at = warpage_vector(single.instructions[0].handle, &single, &c).map_err(|e| e.to_string())?;
        handle = handle.max((at - d).norm());

        let k = rng.random_range(1..=5);
        let multi = random_stretch(&mut rng, &c, k);
        let alpha = rng.random_range(0.1..5.0);
        let base = compute_warpage_field(&set, &multi, &c).map_err(|e| e.to_string())?;
        let scaled = compute_warpage_field(&set, &multi.stretched(alpha), &c).map_err(|e| e.to_string())?;
        for (v, vs) in base.vectors().iter().zip(scaled.vectors()) {
            let expect = alpha * *v;
            if expect.norm() > 0.0 {
                linear = linear.max((*vs - expect).norm() / expect.norm());
            }
        }
        for cell in set.points() {
            let w = instruction_weights(cell.center(), &multi);
            weights = weights.max((w.iter().sum::<f64>() - 1.0).abs());
        }
    }
    check(
        angle < 1e-6 && handle <= 1e-12 && linear <= 1e-9 && weights <= 1e-9,
        format!(
            "{cases} masks: max angle {angle:.1e} rad, |v(s)-d| {handle:.1e}, linearity {linear:.1e}, weight sum {weights:.1e}"
        ),
    )
}

fn relocation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cases = 200;
    for i in 0..cases {
        let grid = LatentGrid::from_fn(64, 64, 2, |_, _, _| rng.random_range(-1.0..1.0)).unwrap();
        let (x0, y0) = (rng.random_range(0..40), rng.random_range(0..40));
        let mask = MaskBitmap::rect(64, 64, x0, y0, (x0 + rng.random_range(4..24)).min(63), (y0 + rng.random_range(4..24)).min(63));
        let set = build_mask_point_set(&mask).map_err(|e| e.to_string())?;
        let k = rng.random_range(1..4);
        let drags = random_stretch(&mut rng, &set.circle(), k);
        let field = compute_warpage_field(&set, &drags, &set.circle()).map_err(|e| e.to_string())?;
        let r = relocate(&grid, &field);
        let distinct: HashSet<Cell> = r.written_targets.keys().copied().collect();
        let injective = distinct.len() == r.written_targets.len() && r.counters.written == distinct.len();
        let provenance = r.written_targets.iter().all(|(t, s)| r.grid.get(*t) == grid.get(*s));
        let conserved = r.counters.total() == set.len();
        let deterministic = relocate(&grid, &field) == r;
        if !(injective && provenance && conserved && deterministic) {
            return Err(format!(
                "case {i}: injective {injective} provenance {provenance} conserved {conserved} deterministic {deterministic}"
            ));
        }
    }

    // First writer in row-major order keeps a contested target.
    let grid = LatentGrid::from_fn(5, 5, 1, |x, y, _| (10 * y + x) as f64).unwrap();
    let field = WarpageField::from_parts(vec![Cell::new(1, 2), Cell::new(2, 1)], vec![Point::new(1.0, 0.0), Point::new(0.0, 1.0)]);
    let r = relocate(&grid, &field);
    let collision = r.grid.get(Cell::new(2, 2)) == Some(&[12.0][..])
        && r.counters.dropped_occupied == 1
        && r.null_region == vec![Cell::new(2, 1), Cell::new(1, 2)];

    let line = LatentGrid::from_fn(8, 1, 1, |x, _, _| x as f64).unwrap();
    let field = WarpageField::from_parts(vec![Cell::new(3, 0), Cell::new(4, 0)], vec![Point::new(1.5, 0.0), Point::new(-1.5, 0.0)]);
    let r = relocate(&line, &field);
    let rounding = r.written_targets.get(&Cell::new(5, 0)) == Some(&Cell::new(3, 0))
        && r.written_targets.get(&Cell::new(3, 0)) == Some(&Cell::new(4, 0));

    check(collision && rounding, format!("{cases} random 64x64 cases clean, collision fixture {collision}, rounding fixture {rounding}"))
}

fn bnni() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cases = 300;
    let mut worst_convexity = 0.0f64;
    for i in 0..cases {
        let (w, h, ch) = (rng.random_range(2..20), rng.random_range(2..20), rng.random_range(1..4));
        let original = LatentGrid::from_fn(w, h, ch, |_, _, _| rng.random_range(-5.0..5.0)).unwrap();
        let mut g = original.clone();
        for cell in original.cells() {
            if rng.random_bool(0.4) {
                g.set_null(cell);
            }
        }
        let out = interpolate_grid(&g, &original, NullFill::Bnni, 0);
        if out.null_count() != 0 {
            return Err(format!("case {i}: {} nulls left", out.null_count()));
        }
        for cell in g.null_cells() {
            let refs = find_references(&g, cell);
            for c in 0..ch {
                let vals: Vec<f64> = refs.present().map(|r| r.value[c]).collect();
                if vals.is_empty() {
                    continue;
                }
                let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let x = out.raw(cell)[c];
                worst_convexity = worst_convexity.max(lo - x).max(x - hi);
            }
        }
        let mut order = g.null_cells();
        let forward = bnni_fill_cells(&g, &original, &order);
        order.reverse();
        if bnni_fill_cells(&g, &original, &order) != forward {
            return Err(format!("case {i}: forward and reverse fills differ"));
        }
    }

    let mut g = LatentGrid::filled(5, 5, &[100.0]).unwrap();
    for cell in [Cell::new(2, 2), Cell::new(3, 2), Cell::new(1, 2)] {
        g.set_null(cell);
    }
    g.set(Cell::new(2, 1), &[0.0]);
    g.set(Cell::new(4, 2), &[6.0]);
    g.set(Cell::new(2, 3), &[3.0]);
    g.set(Cell::new(0, 2), &[12.0]);
    let refs = find_references(&g, Cell::new(2, 2));
    let w = reference_weights(&refs);
    let weight_err = w
        .iter()
        .zip([1.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0, 1.0 / 6.0])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let value_err = (interpolate_point(&refs).map(|v| v[0]).unwrap_or(f64::NAN) - 4.0).abs();
    check(
        worst_convexity <= 1e-12 && weight_err <= 1e-12 && value_err <= 1e-12,
        format!("{cases} grids, convexity overshoot {worst_convexity:.1e}, fixture weight error {weight_err:.1e}, value error {value_err:.1e}"),
    )
}

fn drag_fidelity_blobs() -> Outcome {
    let config = EditConfig::default();
    let mut hits = 0;
    let mut identical = 0;
    let mut distances = Vec::new();
    for seed in 0..20 {
        let case = random_blob_case(256, 40.0, seed);
        let out = edit_pixel(&case.image, &case.mask, &case.drags, &config).map_err(|e| e.to_string())?;
        let d = drag_fidelity(&out.output, &case.drags, &case.probe).map_err(|e| e.to_string())?;
        if d <= 2.0 {
            hits += 1;
        }
        distances.push(d);

        let s = case.drags.instructions[0].handle;
        let still = DragSet::single(s, s, DragMode::Stretch);
        if edit_pixel(&case.image, &case.mask, &still, &config).map_err(|e| e.to_string())?.output == case.image {
            identical += 1;
        }
    }
    let worst = distances.iter().cloned().fold(0.0, f64::max);
    check(
        hits >= 18 && identical == 20,
        format!("{hits}/20 within 2 cells (worst {worst:.2}), zero drag identical {identical}/20"),
    )
}

fn random_latent(rng: &mut ChaCha8Rng, w: usize, h: usize) -> LatentGrid {
    LatentGrid::from_fn(w, h, 3, |_, _, _| rng.random_range(-1.0..1.0)).unwrap()
}

fn round_trip() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sched = DiffusionSchedule::scaled_linear(10).map_err(|e| e.to_string())?;
    let toy = ToyNoisePredictor::golden();
    let (mut zero_err, mut toy_err) = (0.0f64, 0.0f64);
    for _ in 0..10 {
        let (w, h) = (rng.random_range(8..33), rng.random_range(8..33));
        let z0 = random_latent(&mut rng, w, h);
        let traj = invert(&z0, &sched, &ZeroPredictor, &mut AttentionKVCache::new()).map_err(|e| e.to_string())?;
        let back = sample(traj.last(), 10, &sched, &ZeroPredictor, None, SampleOptions::default()).map_err(|e| e.to_string())?;
        zero_err = zero_err.max(back.relative_l2(&z0));

        let mut cache = AttentionKVCache::new();
        let traj = invert(&z0, &sched, &toy, &mut cache).map_err(|e| e.to_string())?;
        let back = sample(traj.last(), 10, &sched, &toy, Some(&cache), SampleOptions::default()).map_err(|e| e.to_string())?;
        toy_err = toy_err.max(back.relative_l2(&z0));
    }
    check(
        zero_err <= 1e-12 && toy_err <= TOY_ROUND_TRIP_BOUND,
        format!("T=10, zero predictor {zero_err:.1e} (<= 1e-12), toy predictor {toy_err:.2e} (<= {TOY_ROUND_TRIP_BOUND:.0e})"),
    )
}

fn cp_no_op() -> Outcome {
    let mut worst_cp = 0.0f64;
    let mut worst_recon = 0.0f64;
    for seed in 0..3 {
        let case = random_blob_case(96, 20.0, seed);
        let s = case.drags.instructions[0].handle;
        let still = DragSet::single(s, s, DragMode::Stretch);
        let on = EditConfig { backend: Backend::ToyLatent, cp_enabled: true, ..EditConfig::default() };
        let off = EditConfig { cp_enabled: false, ..on.clone() };
        let a = edit_latent(&case.image, &case.mask, &still, &on).map_err(|e| e.to_string())?.output;
        let b = edit_latent(&case.image, &case.mask, &still, &off).map_err(|e| e.to_string())?.output;
        let r = reconstruct(&case.image, &on).map_err(|e| e.to_string())?;
        worst_cp = worst_cp.max(a.max_abs_diff(&b));
        worst_recon = worst_recon.max(a.max_abs_diff(&r));
    }
    check(
        worst_cp <= 1e-6 && worst_recon <= 1e-6,
        format!("zero drag: |CP on - CP off| {worst_cp:.1e}, |edit - reconstruction| {worst_recon:.1e}"),
    )
}

fn performance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = LatentGrid::from_fn(64, 64, 4, |_, _, _| rng.random_range(-1.0..1.0)).unwrap();
    let mask = MaskBitmap::rect(64, 64, 16, 16, 47, 47);
    let area = mask.count() as f64 / (64.0 * 64.0);
    let drags = DragSet::stretch(vec![
        DragInstruction::new(Point::new(28.0, 30.0), Point::new(36.0, 26.0)),
        DragInstruction::new(Point::new(38.0, 38.0), Point::new(34.0, 42.0)),
    ]);
    let config = EditConfig::default();
    let mut slowest = Duration::ZERO;
    for _ in 0..5 {
        let start = Instant::now();
        let warped = warp_grid(&grid, &mask, &drags, &config).map_err(|e| e.to_string())?;
        slowest = slowest.max(start.elapsed());
        if warped.grid.null_count() != 0 {
            return Err("nulls left after fill".into());
        }
    }
    let outcome = edit_pixel(&grid, &mask, &drags, &config).map_err(|e| e.to_string())?;
    let passes = outcome.diagnostics.optimization_passes;
    check(
        slowest < Duration::from_millis(50) && passes == 1 && (area - 0.25).abs() < 1e-9,
        format!("64x64x4, mask {:.0}%: slowest of 5 warps {slowest:.2?}, optimization passes {passes}", area * 100.0),
    )
}

fn cli(args: &[&str]) -> i32 {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    run_cli_with(std::iter::once("dragwarp").chain(args.iter().copied()), &mut out, &mut err)
}

fn cli_contract() -> Outcome {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let spec = |name: &str| fixtures.join(name).to_str().unwrap().to_string();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).to_str().unwrap().to_string();

    let valid = cli(&["--spec", &spec("valid.json"), "--out", &path("valid.png")]);
    let usage = cli(&["--out", &path("usage.png")]);
    let invalid = cli(&["--spec", &spec("empty-mask.json"), "--out", &path("invalid.png")]);

    let mut identical = true;
    for name in ["valid.json", "latent.json"] {
        let a = path(&format!("{name}.a.png"));
        let b = path(&format!("{name}.b.png"));
        let codes = [cli(&["--spec", &spec(name), "--out", &a]), cli(&["--spec", &spec(name), "--out", &b])];
        identical &= codes == [EXIT_OK, EXIT_OK] && std::fs::read(&a).ok() == std::fs::read(&b).ok();
    }
    check(
        valid == EXIT_OK && usage == EXIT_USAGE && invalid == EXIT_VALIDATION && identical,
        format!("exit codes valid {valid}, usage {usage}, empty mask {invalid}; repeated runs byte-identical {identical}"),
    )
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("stretch-factor oracle", stretch_oracle),
        ("warpage properties", warpage_properties),
        ("relocation", relocation),
        ("bnni", bnni),
        ("drag fidelity (pixel backend)", drag_fidelity_blobs),
        ("toy diffusion round trip", round_trip),
        ("consistency-preserving no-op", cp_no_op),
        ("one-step performance envelope", performance),
        ("cli contract", cli_contract),
    ];
    let mut failed = Vec::new();
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                println!("FAIL {name}: {detail}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
