//! Warpage vectors for mask points.
//!
//! Each drag instruction pulls every mask point `p` along its own drag vector
//! `d = e - s`, scaled by a stretch factor `λ` that is 1 at the handle `s` and
//! falls to 0 on the reference circle. Contributions from several
//! instructions are blended with inverse-distance weights on `|p s|`:
//!
//! ```text
//! v(p) = Σ_i w_i(p) · λ_i(p) · d_i
//! w_i(p) = (1/|p s_i|) / Σ_k (1/|p s_k|)
//! λ_i(p) = |p q| / |s_i q|
//! ```
//!
//! where `q` is the point where the ray from `s_i` through `p` leaves the
//! circle. In the object modes the whole mask shifts rigidly by the single
//! drag vector.

use std::fmt::Write as _;

use thiserror::Error;

use crate::drag::{DragMode, DragSet};
use crate::grid::{Cell, Point};
use crate::mask::{MaskPointSet, ReferenceCircle};

/// Relative slack for points that sit on the circle up to rounding.
const ON_CIRCLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum WarpError {
    #[error("handle outside reference circle: {handle} vs center {center} radius {radius}")]
    HandleOutsideCircle {
        handle: Point,
        center: Point,
        radius: f64,
    },
    #[error("point {point} lies outside the reference circle")]
    PointOutsideCircle { point: Point },
    #[error("object modes take exactly one instruction, got {0}")]
    ObjectModeArity(usize),
    #[error("no drag instructions")]
    NoInstructions,
}

/// Stretch factor `λ = |p q| / |s q|` for point `p` under a force at `s`.
///
/// `s` must be strictly inside the circle and `p` inside or on it. `λ` is 1
/// at `p = s` and 0 on the circle.
pub fn stretch_factor(p: Point, s: Point, circle: &ReferenceCircle) -> Result<f64, WarpError> {
    let rel_s = s - circle.center;
    let r2 = circle.radius * circle.radius;
    let c = rel_s.dot(rel_s) - r2;
    if c >= 0.0 {
        return Err(WarpError::HandleOutsideCircle {
            handle: s,
            center: circle.center,
            radius: circle.radius,
        });
    }
    let sp = p - s;
    let sp_len = sp.norm();
    if sp_len == 0.0 {
        return Ok(1.0);
    }
    let dir = (1.0 / sp_len) * sp;
    // |s + t·dir - c|² = R²  →  t² + 2bt + c = 0 with c < 0, so exactly one
    // positive root. Pick the cancellation-free form for it.
    let b = dir.dot(rel_s);
    let disc = (b * b - c).sqrt();
    let t_exit = if b > 0.0 { -c / (b + disc) } else { disc - b };
    let pq = t_exit - sp_len;
    if pq < -ON_CIRCLE_TOLERANCE * t_exit.max(1.0) {
        return Err(WarpError::PointOutsideCircle { point: p });
    }
    Ok((pq / t_exit).clamp(0.0, 1.0))
}

/// Inverse-distance weights of each instruction's handle as seen from `p`.
///
/// When `p` coincides with one or more handles, the first coincident
/// instruction gets weight 1.
pub fn instruction_weights(p: Point, drags: &DragSet) -> Vec<f64> {
    let k = drags.len();
    let distances: Vec<f64> = drags
        .instructions
        .iter()
        .map(|d| p.distance(d.handle))
        .collect();
    if let Some(hit) = distances.iter().position(|&dist| dist == 0.0) {
        let mut w = vec![0.0; k];
        w[hit] = 1.0;
        return w;
    }
    let inv: Vec<f64> = distances.iter().map(|d| 1.0 / d).collect();
    let total: f64 = inv.iter().sum();
    inv.into_iter().map(|x| x / total).collect()
}

/// Per-instruction terms for one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Component {
    pub weight: f64,
    pub stretch: f64,
}

fn blend(p: Point, drags: &DragSet, circle: &ReferenceCircle) -> Result<(Point, Vec<Component>), WarpError> {
    if drags.is_empty() {
        return Err(WarpError::NoInstructions);
    }
    let weights = instruction_weights(p, drags);
    let mut v = Point::ZERO;
    let mut components = Vec::with_capacity(drags.len());
    for (d, &w) in drags.instructions.iter().zip(&weights) {
        let lambda = stretch_factor(p, d.handle, circle)?;
        v = v + (w * lambda) * d.vector();
        components.push(Component {
            weight: w,
            stretch: lambda,
        });
    }
    Ok((v, components))
}

/// Warpage vector `Σ w_i λ_i d_i` for a single point in stretch mode.
pub fn warpage_vector(p: Point, drags: &DragSet, circle: &ReferenceCircle) -> Result<Point, WarpError> {
    blend(p, drags, circle).map(|(v, _)| v)
}

/// Displacement for every mask point, in the mask's row-major order.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpageField {
    points: Vec<Cell>,
    vectors: Vec<Point>,
    /// `components[j][i]` for stretch mode; empty for object modes.
    components: Vec<Vec<Component>>,
}

impl WarpageField {
    pub fn points(&self) -> &[Cell] {
        &self.points
    }

    pub fn vectors(&self) -> &[Point] {
        &self.vectors
    }

    pub fn components(&self) -> &[Vec<Component>] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cell, Point)> + '_ {
        self.points.iter().copied().zip(self.vectors.iter().copied())
    }

    /// Uniform displacement for every point, used by the object modes.
    pub fn uniform(points: &[Cell], v: Point) -> Self {
        Self {
            points: points.to_vec(),
            vectors: vec![v; points.len()],
            components: Vec::new(),
        }
    }

    /// Builds a field from explicit vectors. Lengths must match.
    pub fn from_parts(points: Vec<Cell>, vectors: Vec<Point>) -> Self {
        assert_eq!(points.len(), vectors.len());
        Self {
            points,
            vectors,
            components: Vec::new(),
        }
    }

    /// Line-delimited text dump: a `#` header, then one row per mask point
    /// `x y vx vy w_1 λ_1 … w_k λ_k`, whitespace separated, values in `{:e}`.
    pub fn to_table(&self) -> String {
        let k = self.components.first().map_or(0, Vec::len);
        let mut out = String::from("# x y vx vy");
        for i in 1..=k {
            let _ = write!(out, " w{i} lambda{i}");
        }
        out.push('\n');
        for (j, (cell, v)) in self.iter().enumerate() {
            let _ = write!(out, "{} {} {:e} {:e}", cell.x, cell.y, v.x, v.y);
            if let Some(row) = self.components.get(j) {
                for c in row {
                    let _ = write!(out, " {:e} {:e}", c.weight, c.stretch);
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Evaluates the warpage function on every mask point.
pub fn compute_warpage_field(
    mask: &MaskPointSet,
    drags: &DragSet,
    circle: &ReferenceCircle,
) -> Result<WarpageField, WarpError> {
    match drags.mode {
        DragMode::Move | DragMode::Replicate => {
            if drags.len() != 1 {
                return Err(WarpError::ObjectModeArity(drags.len()));
            }
            Ok(WarpageField::uniform(
                mask.points(),
                drags.instructions[0].vector(),
            ))
        }
        DragMode::Stretch => {
            let mut vectors = Vec::with_capacity(mask.len());
            let mut components = Vec::with_capacity(mask.len());
            for cell in mask.points() {
                let (v, comps) = blend(cell.center(), drags, circle)?;
                vectors.push(v);
                components.push(comps);
            }
            Ok(WarpageField {
                points: mask.points().to_vec(),
                vectors,
                components,
            })
        }
    }
}
