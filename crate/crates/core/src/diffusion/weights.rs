//! Frozen weights of the toy noise predictor and their on-disk format.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! offset 0   8 bytes   magic  b"DWEPSW01"
//! offset 8   u32       tensor count n
//! offset 12  n × (u32 rows, u32 cols)    dimension table
//! ...        Σ rows·cols × f32            tensor data, table order, row-major
//! ```
//!
//! Tensors, in order, for `c` latent channels and embedding width `d`:
//! `w_in (d×c)`, `b_in (d×1)`, `t_embed (d×1)`, `w_q`, `w_k`, `w_v`, `w_o`
//! (each `d×d`), `w_out (c×d)`, `b_out (c×1)`.
//!
//! Values are drawn from `ChaCha8Rng::seed_from_u64(seed)` as uniform `f32`
//! in `[-scale, scale)`, one tensor after another, so regenerating from the
//! same seed reproduces the file byte for byte.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::attention::Matrix;

pub const MAGIC: &[u8; 8] = b"DWEPSW01";

/// Generation parameters of the committed golden file.
pub const GOLDEN_SEED: u64 = 0x0d1a_6000;
pub const GOLDEN_CHANNELS: usize = 3;
pub const GOLDEN_EMBED: usize = 8;

/// Committed golden weights.
pub const GOLDEN_BYTES: &[u8] = include_bytes!("../../assets/toy_predictor.bin");

/// Per-tensor magnitudes. Input projections are kept small so the predicted
/// noise depends only mildly on the latent, which keeps deterministic
/// inversion close to invertible.
const SCALES: [f32; 9] = [0.003, 0.5, 1.0, 0.6, 0.6, 0.6, 0.2, 0.4, 0.3];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WeightsError {
    #[error("bad magic header")]
    BadMagic,
    #[error("file truncated")]
    Truncated,
    #[error("expected 9 tensors, found {0}")]
    TensorCount(usize),
    #[error("tensor {index} has shape {rows}x{cols}, expected {want_rows}x{want_cols}")]
    Shape {
        index: usize,
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("{0} trailing bytes")]
    Trailing(usize),
}

/// Weight tensors of the toy predictor, widened to `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictorWeights {
    pub channels: usize,
    pub embed: usize,
    pub w_in: Matrix,
    pub b_in: Vec<f64>,
    pub t_embed: Vec<f64>,
    pub w_q: Matrix,
    pub w_k: Matrix,
    pub w_v: Matrix,
    pub w_o: Matrix,
    pub w_out: Matrix,
    pub b_out: Vec<f64>,
}

fn shapes(c: usize, d: usize) -> [(usize, usize); 9] {
    [(d, c), (d, 1), (d, 1), (d, d), (d, d), (d, d), (d, d), (c, d), (c, 1)]
}

/// Serialized weights for `(seed, channels, embed)`.
pub fn generate_bytes(seed: u64, channels: usize, embed: usize) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let table = shapes(channels, embed);
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(table.len() as u32).to_le_bytes());
    for (r, c) in table {
        out.extend_from_slice(&(r as u32).to_le_bytes());
        out.extend_from_slice(&(c as u32).to_le_bytes());
    }
    for ((r, c), scale) in table.into_iter().zip(SCALES) {
        for _ in 0..r * c {
            let u: f32 = rng.random();
            let v = (2.0 * u - 1.0) * scale;
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Hex SHA-256 of a weights file.
pub fn checksum(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Checksum of the committed golden weights.
pub fn golden_checksum() -> String {
    checksum(GOLDEN_BYTES)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8], WeightsError> {
        let end = self.pos.checked_add(n).ok_or(WeightsError::Truncated)?;
        let s = self.bytes.get(self.pos..end).ok_or(WeightsError::Truncated)?;
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize, WeightsError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn f32(&mut self) -> Result<f64, WeightsError> {
        let b = self.take(4)?;
        Ok(f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
    }
}

impl PredictorWeights {
    pub fn parse(bytes: &[u8]) -> Result<Self, WeightsError> {
        let mut rd = Reader { bytes, pos: 0 };
        if rd.take(8)? != MAGIC {
            return Err(WeightsError::BadMagic);
        }
        let n = rd.u32()?;
        if n != 9 {
            return Err(WeightsError::TensorCount(n));
        }
        let mut table = Vec::with_capacity(n);
        for _ in 0..n {
            table.push((rd.u32()?, rd.u32()?));
        }
        let (d, c) = table[0];
        for (index, (&(rows, cols), (want_rows, want_cols))) in
            table.iter().zip(shapes(c, d)).enumerate()
        {
            if (rows, cols) != (want_rows, want_cols) {
                return Err(WeightsError::Shape {
                    index,
                    rows,
                    cols,
                    want_rows,
                    want_cols,
                });
            }
        }
        let mut tensors = Vec::with_capacity(n);
        for &(r, cols) in &table {
            let data = (0..r * cols).map(|_| rd.f32()).collect::<Result<Vec<_>, _>>()?;
            tensors.push(Matrix::new(r, cols, data));
        }
        if rd.pos != bytes.len() {
            return Err(WeightsError::Trailing(bytes.len() - rd.pos));
        }
        let mut it = tensors.into_iter();
        let mut next = || it.next().expect("nine tensors");
        Ok(Self {
            channels: c,
            embed: d,
            w_in: next(),
            b_in: next().as_slice().to_vec(),
            t_embed: next().as_slice().to_vec(),
            w_q: next(),
            w_k: next(),
            w_v: next(),
            w_o: next(),
            w_out: next(),
            b_out: next().as_slice().to_vec(),
        })
    }

    pub fn golden() -> Self {
        Self::parse(GOLDEN_BYTES).expect("committed weights parse")
    }
}
