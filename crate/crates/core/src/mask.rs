//! Editable regions and the reference circle that bounds the warp.

use thiserror::Error;

use crate::grid::{Cell, Point};

/// Smallest radius the reference circle may have, in cells. Single-cell and
/// collinear masks have a zero-length bounding diagonal.
pub const MIN_CIRCLE_RADIUS: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum MaskError {
    #[error("mask is empty")]
    Empty,
    #[error("mask bitmap length {actual} does not match {width}x{height}")]
    LengthMismatch {
        width: usize,
        height: usize,
        actual: usize,
    },
}

/// Row-major boolean bitmap marking editable cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskBitmap {
    width: usize,
    height: usize,
    bits: Vec<bool>,
}

impl MaskBitmap {
    pub fn new(width: usize, height: usize, bits: Vec<bool>) -> Result<Self, MaskError> {
        if bits.len() != width * height {
            return Err(MaskError::LengthMismatch {
                width,
                height,
                actual: bits.len(),
            });
        }
        Ok(Self {
            width,
            height,
            bits,
        })
    }

    pub fn empty(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            bits: vec![false; width * height],
        }
    }

    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let bits = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self {
            width,
            height,
            bits,
        }
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]` (inclusive), clipped to the bitmap.
    pub fn rect(width: usize, height: usize, x0: usize, y0: usize, x1: usize, y1: usize) -> Self {
        Self::from_fn(width, height, |x, y| x >= x0 && x <= x1 && y >= y0 && y <= y1)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn get(&self, x: usize, y: usize) -> bool {
        self.bits[y * self.width + x]
    }

    pub fn set(&mut self, x: usize, y: usize, on: bool) {
        self.bits[y * self.width + x] = on;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|b| *b)
    }

    /// Maps the mask to a grid `factor` times smaller: a coarse cell is set
    /// when any fine cell with `floor(coord / factor)` equal to it is set.
    pub fn downscale(&self, factor: usize) -> MaskBitmap {
        let factor = factor.max(1);
        let w = self.width.div_ceil(factor);
        let h = self.height.div_ceil(factor);
        let mut out = MaskBitmap::empty(w, h);
        for y in 0..self.height {
            for x in 0..self.width {
                if self.get(x, y) {
                    out.set(x / factor, y / factor, true);
                }
            }
        }
        out
    }
}

/// Inclusive integer bounding rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundingRect {
    pub min_x: usize,
    pub min_y: usize,
    pub max_x: usize,
    pub max_y: usize,
}

impl BoundingRect {
    pub fn center(&self) -> Point {
        Point::new(
            (self.min_x + self.max_x) as f64 / 2.0,
            (self.min_y + self.max_y) as f64 / 2.0,
        )
    }

    pub fn half_diagonal(&self) -> f64 {
        let dx = (self.max_x - self.min_x) as f64;
        let dy = (self.max_y - self.min_y) as f64;
        0.5 * dx.hypot(dy)
    }
}

/// Circle on which the warp vanishes: circumscribes the mask's bounding rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceCircle {
    pub center: Point,
    pub radius: f64,
}

impl ReferenceCircle {
    pub fn new(center: Point, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn circumscribing(rect: &BoundingRect) -> Self {
        Self {
            center: rect.center(),
            radius: rect.half_diagonal().max(MIN_CIRCLE_RADIUS),
        }
    }

    /// Strictly inside (boundary excluded).
    pub fn strictly_contains(&self, p: Point) -> bool {
        p.distance(self.center) < self.radius
    }
}

/// Mask cells in row-major order plus the derived geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskPointSet {
    points: Vec<Cell>,
    bounds: BoundingRect,
    circle: ReferenceCircle,
}

impl MaskPointSet {
    /// Builds the set from explicit cells. Order and duplicates in the input
    /// do not matter.
    pub fn from_cells(cells: impl IntoIterator<Item = Cell>) -> Result<Self, MaskError> {
        let mut points: Vec<Cell> = cells.into_iter().collect();
        points.sort_by_key(|c| c.row_major_key());
        points.dedup();
        let first = points.first().ok_or(MaskError::Empty)?;
        let mut bounds = BoundingRect {
            min_x: first.x,
            min_y: first.y,
            max_x: first.x,
            max_y: first.y,
        };
        for p in &points {
            bounds.min_x = bounds.min_x.min(p.x);
            bounds.min_y = bounds.min_y.min(p.y);
            bounds.max_x = bounds.max_x.max(p.x);
            bounds.max_y = bounds.max_y.max(p.y);
        }
        let circle = ReferenceCircle::circumscribing(&bounds);
        Ok(Self {
            points,
            bounds,
            circle,
        })
    }

    /// Mask points in row-major order (y, then x ascending).
    pub fn points(&self) -> &[Cell] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn bounds(&self) -> BoundingRect {
        self.bounds
    }

    pub fn circle(&self) -> ReferenceCircle {
        self.circle
    }

    pub fn to_bitmap(&self, width: usize, height: usize) -> MaskBitmap {
        let mut bitmap = MaskBitmap::empty(width, height);
        for p in &self.points {
            if p.x < width && p.y < height {
                bitmap.set(p.x, p.y, true);
            }
        }
        bitmap
    }
}

/// Collects the set cells of `bitmap` and their reference circle.
pub fn build_mask_point_set(bitmap: &MaskBitmap) -> Result<MaskPointSet, MaskError> {
    MaskPointSet::from_cells(
        (0..bitmap.height())
            .flat_map(|y| (0..bitmap.width()).map(move |x| Cell::new(x, y)))
            .filter(|c| bitmap.get(c.x, c.y)),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-4
    }

    #[test]
    fn empty_mask_is_rejected() {
        assert_eq!(
            build_mask_point_set(&MaskBitmap::empty(4, 4)),
            Err(MaskError::Empty)
        );
    }

    #[test]
    fn single_cell_gets_radius_floor() {
        let mut m = MaskBitmap::empty(6, 6);
        m.set(3, 3, true);
        let set = build_mask_point_set(&m).unwrap();
        assert_eq!(set.circle().center, Point::new(3.0, 3.0));
        assert_eq!(set.circle().radius, MIN_CIRCLE_RADIUS);
    }

    #[test]
    fn full_square_circle() {
        let set = build_mask_point_set(&MaskBitmap::from_fn(4, 4, |_, _| true)).unwrap();
        assert_eq!(set.circle().center, Point::new(1.5, 1.5));
        assert!(close(set.circle().radius, 2.1213));
        assert_eq!(set.len(), 16);
    }

    #[test]
    fn offset_rect_circle() {
        let set = build_mask_point_set(&MaskBitmap::rect(10, 10, 2, 1, 6, 5)).unwrap();
        assert_eq!(set.circle().center, Point::new(4.0, 3.0));
        assert!(close(set.circle().radius, 2.8284));
    }

    #[test]
    fn collinear_mask_keeps_positive_radius() {
        let set = build_mask_point_set(&MaskBitmap::rect(10, 10, 2, 4, 7, 4)).unwrap();
        assert_eq!(set.circle().radius, 2.5);
        let set = build_mask_point_set(&MaskBitmap::rect(10, 10, 2, 4, 2, 4)).unwrap();
        assert_eq!(set.circle().radius, MIN_CIRCLE_RADIUS);
    }

    #[test]
    fn scan_order_independent() {
        let cells = [Cell::new(5, 1), Cell::new(0, 3), Cell::new(2, 2), Cell::new(5, 1)];
        let a = MaskPointSet::from_cells(cells).unwrap();
        let b = MaskPointSet::from_cells(cells.iter().rev().copied()).unwrap();
        assert_eq!(a, b);
        assert_eq!(
            a.points(),
            &[Cell::new(5, 1), Cell::new(2, 2), Cell::new(0, 3)]
        );
    }

    #[test]
    fn downscale_uses_floor() {
        let mut m = MaskBitmap::empty(9, 9);
        m.set(7, 3, true);
        m.set(8, 8, true);
        let d = m.downscale(4);
        assert_eq!((d.width(), d.height()), (3, 3));
        assert!(d.get(1, 0));
        assert!(d.get(2, 2));
        assert_eq!(d.count(), 2);
    }
}
