//! Noise predictors.
//!
//! [`ToyNoisePredictor`] is a small fixed network:
//! 2× mean-pool → token embedding (+ timestep embedding) → one single-head
//! self-attention layer with residual → linear channel mix → 2× nearest
//! upsampling. Its one attention site is where cached keys and values can be
//! substituted during sampling.

use thiserror::Error;

use super::attention::{attention, dot, Matrix};
use super::schedule::TRAIN_STEPS;
use super::weights::PredictorWeights;
use crate::grid::{Cell, LatentGrid};

#[derive(Debug, Error, PartialEq)]
pub enum PredictorError {
    #[error("predictor expects {expected} channels, latent has {actual}")]
    Channels { expected: usize, actual: usize },
    #[error("injected keys/values for {got} sites, predictor has {want}")]
    SiteCount { got: usize, want: usize },
    #[error("injected keys/values have shape {rows}x{cols}, expected {want_rows}x{want_cols}")]
    KvShape {
        rows: usize,
        cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
}

/// Keys and values produced at one attention site.
#[derive(Debug, Clone, PartialEq)]
pub struct KvPair {
    pub keys: Matrix,
    pub values: Matrix,
}

pub trait NoisePredictor {
    /// Number of attention sites exposed for key/value substitution.
    fn attention_sites(&self) -> usize;

    /// Keys and values every site computes for latent `z` at training timestep `timestep`.
    fn keys_values(&self, z: &LatentGrid, timestep: usize) -> Result<Vec<KvPair>, PredictorError>;

    /// Predicted noise for `z`. With `injected`, each site attends with its
    /// own queries over the supplied keys and values instead of its own.
    fn predict(
        &self,
        z: &LatentGrid,
        timestep: usize,
        injected: Option<&[KvPair]>,
    ) -> Result<LatentGrid, PredictorError>;
}

/// Predicts zero noise everywhere. Has no attention sites.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPredictor;

impl NoisePredictor for ZeroPredictor {
    fn attention_sites(&self) -> usize {
        0
    }

    fn keys_values(&self, _z: &LatentGrid, _timestep: usize) -> Result<Vec<KvPair>, PredictorError> {
        Ok(Vec::new())
    }

    fn predict(
        &self,
        z: &LatentGrid,
        _timestep: usize,
        _injected: Option<&[KvPair]>,
    ) -> Result<LatentGrid, PredictorError> {
        Ok(LatentGrid::zeros(z.width(), z.height(), z.channels()).expect("non-empty latent"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyNoisePredictor {
    weights: PredictorWeights,
}

impl Default for ToyNoisePredictor {
    fn default() -> Self {
        Self::golden()
    }
}

/// Token grid width/height for a latent (2× pooling, partial blocks kept).
fn token_dims(z: &LatentGrid) -> (usize, usize) {
    (z.width().div_ceil(2), z.height().div_ceil(2))
}

impl ToyNoisePredictor {
    pub fn new(weights: PredictorWeights) -> Self {
        Self { weights }
    }

    /// Predictor with the committed golden weights.
    pub fn golden() -> Self {
        Self::new(PredictorWeights::golden())
    }

    pub fn weights(&self) -> &PredictorWeights {
        &self.weights
    }

    pub fn channels(&self) -> usize {
        self.weights.channels
    }

    fn check(&self, z: &LatentGrid) -> Result<(), PredictorError> {
        if z.channels() != self.weights.channels {
            return Err(PredictorError::Channels {
                expected: self.weights.channels,
                actual: z.channels(),
            });
        }
        Ok(())
    }

    /// Embedded tokens, `N x d`.
    fn tokens(&self, z: &LatentGrid, timestep: usize) -> Matrix {
        let w = &self.weights;
        let (tw, th) = token_dims(z);
        let c = z.channels();
        let tau = timestep as f64 / TRAIN_STEPS as f64;
        let mut tokens = Matrix::zeros(tw * th, w.embed);
        let mut pooled = vec![0.0; c];
        for ty in 0..th {
            for tx in 0..tw {
                pooled.fill(0.0);
                let mut n = 0.0;
                for y in 2 * ty..(2 * ty + 2).min(z.height()) {
                    for x in 2 * tx..(2 * tx + 2).min(z.width()) {
                        pooled
                            .iter_mut()
                            .zip(z.raw(Cell::new(x, y)))
                            .for_each(|(p, v)| *p += v);
                        n += 1.0;
                    }
                }
                pooled.iter_mut().for_each(|p| *p /= n);
                let row = tokens.row_mut(ty * tw + tx);
                for (e, out) in row.iter_mut().enumerate() {
                    *out = dot(w.w_in.row(e), &pooled) + w.b_in[e] + tau * w.t_embed[e];
                }
            }
        }
        tokens
    }

    fn kv_for_tokens(&self, tokens: &Matrix) -> KvPair {
        KvPair {
            keys: tokens.matmul_transposed(&self.weights.w_k),
            values: tokens.matmul_transposed(&self.weights.w_v),
        }
    }
}

impl NoisePredictor for ToyNoisePredictor {
    fn attention_sites(&self) -> usize {
        1
    }

    fn keys_values(&self, z: &LatentGrid, timestep: usize) -> Result<Vec<KvPair>, PredictorError> {
        self.check(z)?;
        Ok(vec![self.kv_for_tokens(&self.tokens(z, timestep))])
    }

    fn predict(
        &self,
        z: &LatentGrid,
        timestep: usize,
        injected: Option<&[KvPair]>,
    ) -> Result<LatentGrid, PredictorError> {
        self.check(z)?;
        let w = &self.weights;
        let tokens = self.tokens(z, timestep);
        let queries = tokens.matmul_transposed(&w.w_q);
        let own;
        let kv = match injected {
            Some(sites) => {
                if sites.len() != 1 {
                    return Err(PredictorError::SiteCount {
                        got: sites.len(),
                        want: 1,
                    });
                }
                let kv = &sites[0];
                for m in [&kv.keys, &kv.values] {
                    if m.cols() != w.embed || m.rows() != tokens.rows() {
                        return Err(PredictorError::KvShape {
                            rows: m.rows(),
                            cols: m.cols(),
                            want_rows: tokens.rows(),
                            want_cols: w.embed,
                        });
                    }
                }
                kv
            }
            None => {
                own = self.kv_for_tokens(&tokens);
                &own
            }
        };
        let attended = attention(&queries, &kv.keys, &kv.values);
        let projected = attended.matmul_transposed(&w.w_o);

        let (tw, _) = token_dims(z);
        let c = z.channels();
        let mut hidden = vec![0.0; w.embed];
        let mut token_noise = Vec::with_capacity(tokens.rows() * c);
        for n in 0..tokens.rows() {
            hidden
                .iter_mut()
                .zip(tokens.row(n).iter().zip(projected.row(n)))
                .for_each(|(h, (t, a))| *h = t + a);
            for ch in 0..c {
                token_noise.push(dot(w.w_out.row(ch), &hidden) + w.b_out[ch]);
            }
        }
        let out = LatentGrid::from_fn(z.width(), z.height(), c, |x, y, ch| {
            token_noise[((y / 2) * tw + x / 2) * c + ch]
        })
        .expect("same shape as input");
        Ok(out)
    }
}
