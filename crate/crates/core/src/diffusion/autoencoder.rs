//! Block-mean encoder and mean-preserving bilinear decoder.
//!
//! `encode` averages each `f x f` block (partial blocks at the right and
//! bottom edges average the cells they have). `decode` upsamples bilinearly
//! at pixel centers, then shifts each block so its mean equals the latent
//! cell exactly. Consequently `encode(decode(z)) == z` up to rounding and
//! `encode ∘ decode ∘ encode == encode`.

use crate::grid::{Cell, LatentGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ToyAutoencoder {
    factor: usize,
}

impl Default for ToyAutoencoder {
    fn default() -> Self {
        Self { factor: 4 }
    }
}

impl ToyAutoencoder {
    pub fn new(factor: usize) -> Self {
        assert!(factor >= 1, "downsample factor must be positive");
        Self { factor }
    }

    pub fn factor(&self) -> usize {
        self.factor
    }

    pub fn latent_dims(&self, width: usize, height: usize) -> (usize, usize) {
        (width.div_ceil(self.factor), height.div_ceil(self.factor))
    }

    fn block(&self, lx: usize, ly: usize, width: usize, height: usize) -> (std::ops::Range<usize>, std::ops::Range<usize>) {
        let f = self.factor;
        (lx * f..((lx + 1) * f).min(width), ly * f..((ly + 1) * f).min(height))
    }

    /// Per-block channel means of `image`.
    pub fn encode(&self, image: &LatentGrid) -> LatentGrid {
        let (w, h) = image.dims();
        let (lw, lh) = self.latent_dims(w, h);
        let c = image.channels();
        let mut data = Vec::with_capacity(lw * lh * c);
        let mut acc = vec![0.0; c];
        for ly in 0..lh {
            for lx in 0..lw {
                acc.fill(0.0);
                let (xs, ys) = self.block(lx, ly, w, h);
                let n = (xs.len() * ys.len()) as f64;
                for y in ys {
                    for x in xs.clone() {
                        acc.iter_mut()
                            .zip(image.raw(Cell::new(x, y)))
                            .for_each(|(a, v)| *a += v);
                    }
                }
                data.extend(acc.iter().map(|a| a / n));
            }
        }
        LatentGrid::from_vec(lw, lh, c, data).expect("non-empty latent")
    }

    /// Upsamples `latent` to `width x height`.
    pub fn decode(&self, latent: &LatentGrid, width: usize, height: usize) -> LatentGrid {
        let f = self.factor as f64;
        let (lw, lh) = latent.dims();
        assert_eq!((lw, lh), self.latent_dims(width, height), "latent/image size mismatch");
        let c = latent.channels();
        // Bilinear sample at pixel centers, clamped at the latent border.
        let axis = |p: usize, n: usize| -> (usize, usize, f64) {
            let u = ((p as f64 + 0.5) / f - 0.5).clamp(0.0, (n - 1) as f64);
            let i0 = u.floor() as usize;
            let i1 = (i0 + 1).min(n - 1);
            (i0, i1, u - i0 as f64)
        };
        let mut out = LatentGrid::from_fn(width, height, c, |x, y, ch| {
            let (x0, x1, tx) = axis(x, lw);
            let (y0, y1, ty) = axis(y, lh);
            let v = |xx: usize, yy: usize| latent.raw(Cell::new(xx, yy))[ch];
            let top = v(x0, y0) * (1.0 - tx) + v(x1, y0) * tx;
            let bottom = v(x0, y1) * (1.0 - tx) + v(x1, y1) * tx;
            top * (1.0 - ty) + bottom * ty
        })
        .expect("non-empty image");

        // Mean correction per block.
        let means = self.encode(&out);
        let mut shifted = vec![0.0; c];
        for ly in 0..lh {
            for lx in 0..lw {
                let target = latent.raw(Cell::new(lx, ly));
                let got = means.raw(Cell::new(lx, ly));
                let delta: Vec<f64> = target.iter().zip(got).map(|(t, g)| t - g).collect();
                let (xs, ys) = self.block(lx, ly, width, height);
                for y in ys {
                    for x in xs.clone() {
                        let cell = Cell::new(x, y);
                        shifted
                            .iter_mut()
                            .zip(out.raw(cell).iter().zip(&delta))
                            .for_each(|(s, (v, d))| *s = v + d);
                        out.set(cell, &shifted);
                    }
                }
            }
        }
        out
    }
}
