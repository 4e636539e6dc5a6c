//! Dense feature grids with per-cell null markers.
//!
//! A [`LatentGrid`] stores `width * height` cells of `channels` values each in
//! row-major order (origin top-left, `x` rightward, `y` downward). A cell is
//! either fully valued or fully null; there is no per-channel null state.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid dimensions must be positive, got {width}x{height}x{channels}")]
    EmptyShape {
        width: usize,
        height: usize,
        channels: usize,
    },
    #[error("data length {actual} does not match {width}x{height}x{channels}")]
    LengthMismatch {
        width: usize,
        height: usize,
        channels: usize,
        actual: usize,
    },
}

/// Integer cell position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    pub fn center(self) -> Point {
        Point::new(self.x as f64, self.y as f64)
    }

    /// Ordering key that sorts cells row-major (y first, then x).
    pub fn row_major_key(self) -> (usize, usize) {
        (self.y, self.x)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Real-valued 2D point or vector in cell units.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ZERO: Point = Point { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<Point> for f64 {
    type Output = Point;
    fn mul(self, rhs: Point) -> Point {
        Point::new(self * rhs.x, self * rhs.y)
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// `width x height x channels` grid of `f64` features, row-major, with a
/// validity bit per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct LatentGrid {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
    valid: Vec<bool>,
}

impl LatentGrid {
    /// All-zero grid without nulls.
    pub fn zeros(width: usize, height: usize, channels: usize) -> Result<Self, GridError> {
        Self::from_vec(width, height, channels, vec![0.0; width * height * channels])
    }

    /// Grid filled with a constant channel vector.
    pub fn filled(width: usize, height: usize, value: &[f64]) -> Result<Self, GridError> {
        let channels = value.len();
        let data = value
            .iter()
            .copied()
            .cycle()
            .take(width * height * channels)
            .collect();
        Self::from_vec(width, height, channels, data)
    }

    /// Wraps interleaved row-major data (`data[(y * width + x) * channels + c]`).
    pub fn from_vec(
        width: usize,
        height: usize,
        channels: usize,
        data: Vec<f64>,
    ) -> Result<Self, GridError> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(GridError::EmptyShape {
                width,
                height,
                channels,
            });
        }
        if data.len() != width * height * channels {
            return Err(GridError::LengthMismatch {
                width,
                height,
                channels,
                actual: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
            valid: vec![true; width * height],
        })
    }

    /// Builds a grid by evaluating `f(x, y, channel)` for every entry.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self, GridError> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        Self::from_vec(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn same_shape(&self, other: &LatentGrid) -> bool {
        self.width == other.width && self.height == other.height && self.channels == other.channels
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.is_finite()
            && p.x >= 0.0
            && p.y >= 0.0
            && p.x <= (self.width - 1) as f64
            && p.y <= (self.height - 1) as f64
    }

    #[inline]
    fn index(&self, cell: Cell) -> usize {
        debug_assert!(cell.x < self.width && cell.y < self.height);
        cell.y * self.width + cell.x
    }

    /// Channel vector at `cell`, or `None` when the cell is null.
    pub fn get(&self, cell: Cell) -> Option<&[f64]> {
        let i = self.index(cell);
        self.valid[i].then(|| &self.data[i * self.channels..(i + 1) * self.channels])
    }

    /// Raw channel storage at `cell`, regardless of the null marker.
    pub fn raw(&self, cell: Cell) -> &[f64] {
        let i = self.index(cell);
        &self.data[i * self.channels..(i + 1) * self.channels]
    }

    /// Writes a full channel vector and marks the cell valued.
    pub fn set(&mut self, cell: Cell, value: &[f64]) {
        assert_eq!(value.len(), self.channels, "channel count mismatch");
        let i = self.index(cell);
        self.data[i * self.channels..(i + 1) * self.channels].copy_from_slice(value);
        self.valid[i] = true;
    }

    /// Marks a cell null. Its channel storage is zeroed so stale values never leak.
    pub fn set_null(&mut self, cell: Cell) {
        let i = self.index(cell);
        self.valid[i] = false;
        self.data[i * self.channels..(i + 1) * self.channels].fill(0.0);
    }

    pub fn is_null(&self, cell: Cell) -> bool {
        !self.valid[self.index(cell)]
    }

    pub fn null_count(&self) -> usize {
        self.valid.iter().filter(|v| !**v).count()
    }

    pub fn has_nulls(&self) -> bool {
        self.valid.iter().any(|v| !v)
    }

    /// Null cells in row-major order.
    pub fn null_cells(&self) -> Vec<Cell> {
        self.valid
            .iter()
            .enumerate()
            .filter(|(_, v)| !**v)
            .map(|(i, _)| Cell::new(i % self.width, i / self.width))
            .collect()
    }

    /// All cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height).flat_map(move |y| (0..self.width).map(move |x| Cell::new(x, y)))
    }

    /// Interleaved channel data. Null cells read as zeros.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Applies `f` to every value of every valued cell.
    pub fn map_values(&self, mut f: impl FnMut(f64) -> f64) -> LatentGrid {
        let mut out = self.clone();
        for (i, chunk) in out.data.chunks_mut(self.channels).enumerate() {
            if out.valid[i] {
                chunk.iter_mut().for_each(|v| *v = f(*v));
            }
        }
        out
    }

    /// Euclidean norm over all values.
    pub fn l2_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `|self - other|_2 / |other|_2`; absolute difference when `other` is all-zero.
    pub fn relative_l2(&self, other: &LatentGrid) -> f64 {
        assert!(self.same_shape(other), "shape mismatch");
        let diff: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let base = other.l2_norm();
        if base == 0.0 {
            diff
        } else {
            diff / base
        }
    }

    /// Largest per-entry absolute difference.
    pub fn max_abs_diff(&self, other: &LatentGrid) -> f64 {
        assert!(self.same_shape(other), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Per-channel mean over valued cells.
    pub fn channel_means(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.channels];
        let mut n = 0usize;
        for (i, chunk) in self.data.chunks(self.channels).enumerate() {
            if self.valid[i] {
                n += 1;
                sums.iter_mut().zip(chunk).for_each(|(s, v)| *s += v);
            }
        }
        if n > 0 {
            sums.iter_mut().for_each(|s| *s /= n as f64);
        }
        sums
    }
}
