//! Drag fidelity on synthetic scenes: locate a planted feature with
//! normalized cross-correlation and measure how far it landed from the target.

use thiserror::Error;

use crate::drag::DragSet;
use crate::grid::{Cell, LatentGrid, Point};

#[derive(Debug, Error, PartialEq)]
pub enum MetricError {
    #[error("image has zero variance")]
    FlatImage,
    #[error("template has zero variance")]
    FlatTemplate,
    #[error("template {tw}x{th} does not fit in image {w}x{h}")]
    TemplateTooLarge { tw: usize, th: usize, w: usize, h: usize },
    #[error("channel mismatch")]
    Channels,
    #[error("no drag instruction to measure against")]
    NoInstruction,
}

/// The planted feature to look for.
#[derive(Debug, Clone, PartialEq)]
pub struct Probe {
    pub template: LatentGrid,
}

impl Probe {
    /// `(2·half + 1)²` patch of `image` centered on `center` (must fit).
    pub fn around(image: &LatentGrid, center: Cell, half: usize) -> Self {
        let size = 2 * half + 1;
        let template = LatentGrid::from_fn(size, size, image.channels(), |x, y, c| {
            image.raw(Cell::new(center.x + x - half, center.y + y - half))[c]
        })
        .expect("non-empty template");
        Self { template }
    }
}

/// Best template match.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Match {
    /// Center of the best window.
    pub center: Point,
    pub score: f64,
}

/// Zero-mean normalized cross-correlation of `template` at every window
/// position; channels are pooled into one score. Returns the best window.
pub fn match_template(image: &LatentGrid, template: &LatentGrid) -> Result<Match, MetricError> {
    if image.channels() != template.channels() {
        return Err(MetricError::Channels);
    }
    let (w, h) = image.dims();
    let (tw, th) = template.dims();
    if tw > w || th > h {
        return Err(MetricError::TemplateTooLarge { tw, th, w, h });
    }
    let c = image.channels();
    let n = (tw * th * c) as f64;

    let t_mean = template.as_slice().iter().sum::<f64>() / n;
    let t_centered: Vec<f64> = template.as_slice().iter().map(|v| v - t_mean).collect();
    let t_norm = t_centered.iter().map(|v| v * v).sum::<f64>().sqrt();
    if t_norm <= 1e-12 * n.sqrt() * (1.0 + t_mean.abs()) {
        return Err(MetricError::FlatTemplate);
    }

    // Integral images of per-cell channel sums and squared sums.
    let stride = w + 1;
    let mut sum = vec![0.0; stride * (h + 1)];
    let mut sq = vec![0.0; stride * (h + 1)];
    for y in 0..h {
        for x in 0..w {
            let v = image.raw(Cell::new(x, y));
            let s: f64 = v.iter().sum();
            let q: f64 = v.iter().map(|a| a * a).sum();
            let i = (y + 1) * stride + x + 1;
            sum[i] = s + sum[i - 1] + sum[i - stride] - sum[i - stride - 1];
            sq[i] = q + sq[i - 1] + sq[i - stride] - sq[i - stride - 1];
        }
    }
    let window = |table: &[f64], x: usize, y: usize| {
        table[(y + th) * stride + x + tw] - table[y * stride + x + tw] - table[(y + th) * stride + x]
            + table[y * stride + x]
    };

    let data = image.as_slice();
    let mut best: Option<Match> = None;
    let mut any_variance = false;
    for y in 0..=h - th {
        for x in 0..=w - tw {
            let s = window(&sum, x, y);
            let var = window(&sq, x, y) - s * s / n;
            if var <= 1e-12 * n {
                continue;
            }
            any_variance = true;
            // Σ t'·I equals Σ t'·(I − mean) because Σ t' = 0.
            let mut cross = 0.0;
            for ty in 0..th {
                let row = ((y + ty) * w + x) * c;
                let trow = ty * tw * c;
                cross += data[row..row + tw * c]
                    .iter()
                    .zip(&t_centered[trow..trow + tw * c])
                    .map(|(a, b)| a * b)
                    .sum::<f64>();
            }
            let score = cross / (t_norm * var.sqrt());
            if best.is_none_or(|b| score > b.score) {
                best = Some(Match {
                    center: Point::new((x + (tw - 1) / 2) as f64, (y + (th - 1) / 2) as f64),
                    score,
                });
            }
        }
    }
    if !any_variance {
        return Err(MetricError::FlatImage);
    }
    Ok(best.expect("at least one window with variance"))
}

/// Distance in cells between where `probe` is found in `output` and the
/// first instruction's target.
pub fn drag_fidelity(output: &LatentGrid, drags: &DragSet, probe: &Probe) -> Result<f64, MetricError> {
    let target = drags
        .instructions
        .first()
        .ok_or(MetricError::NoInstruction)?
        .target;
    let found = match_template(output, &probe.template)?;
    Ok(found.center.distance(target))
}
