//! Haar maximal-overlap discrete wavelet transform (MODWT) with periodic
//! boundary, its inverse, and the additive multiresolution analysis.
//!
//! Rescaled filters `g = (1/2, 1/2)`, `h = (1/2, -1/2)`; at level `j` the
//! filter taps are `2^(j-1)` samples apart. With `V_0 = x`:
//!
//! ```text
//! W_j[t] = (V_{j-1}[t] - V_{j-1}[t - 2^(j-1)]) / 2
//! V_j[t] = (V_{j-1}[t] + V_{j-1}[t - 2^(j-1)]) / 2
//! ```
//!
//! indices taken modulo `n`. The detail `D_j` is the inverse transform of
//! `W_j` alone, the smooth `S_J` that of `V_J` alone, and
//! `x = D_1 + ... + D_J + S_J`.

use crate::error::{Error, Result};

/// Wavelet coefficients `W_1..W_J` and scaling coefficients `V_J`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModwtCoefficients {
    pub wavelet: Vec<Vec<f64>>,
    pub scaling: Vec<f64>,
}

impl ModwtCoefficients {
    pub fn levels(&self) -> usize {
        self.wavelet.len()
    }

    /// `sum_j ||W_j||^2 + ||V_J||^2`, equal to `||x||^2`.
    pub fn energy(&self) -> f64 {
        let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
        self.wavelet.iter().map(|w| sq(w)).sum::<f64>() + sq(&self.scaling)
    }
}

/// Additive multiresolution decomposition of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletMra {
    pub details: Vec<Vec<f64>>,
    pub smooth: Vec<f64>,
    pub coefficients: ModwtCoefficients,
}

impl WaveletMra {
    pub fn levels(&self) -> usize {
        self.details.len()
    }

    pub fn len(&self) -> usize {
        self.smooth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.smooth.is_empty()
    }

    /// Details `D_1..D_J` followed by the smooth `S_J`.
    pub fn components(&self) -> impl Iterator<Item = &[f64]> {
        self.details
            .iter()
            .map(Vec::as_slice)
            .chain(std::iter::once(self.smooth.as_slice()))
    }
}

/// Largest depth allowed for a series of length `n`: `floor(log2 n)`.
pub fn max_levels(n: usize) -> usize {
    if n == 0 {
        0
    } else {
        n.ilog2() as usize
    }
}

/// `floor(ln n)` clamped to `[1, floor(log2 n)]`.
pub fn choose_levels(n: usize) -> Result<usize> {
    if n < 8 {
        return Err(Error::InsufficientData { needed: 8, got: n });
    }
    let natural = (n as f64).ln().floor() as usize;
    Ok(natural.clamp(1, max_levels(n)))
}

fn check_depth(n: usize, levels: usize) -> Result<()> {
    let max = max_levels(n);
    if levels == 0 || levels > max {
        return Err(Error::LevelTooDeep {
            requested: levels,
            max,
            len: n,
        });
    }
    Ok(())
}

/// Forward pyramid.
pub fn modwt_coefficients(x: &[f64], levels: usize) -> Result<ModwtCoefficients> {
    let n = x.len();
    check_depth(n, levels)?;
    let mut v = x.to_vec();
    let mut wavelet = Vec::with_capacity(levels);
    for j in 1..=levels {
        let lag = (1usize << (j - 1)) % n;
        let mut w = vec![0.0; n];
        let mut next = vec![0.0; n];
        for t in 0..n {
            let prev = v[(t + n - lag) % n];
            w[t] = 0.5 * (v[t] - prev);
            next[t] = 0.5 * (v[t] + prev);
        }
        wavelet.push(w);
        v = next;
    }
    Ok(ModwtCoefficients {
        wavelet,
        scaling: v,
    })
}

/// One inverse pyramid stage: `V_{j-1}` from `W_j` and `V_j`.
fn inverse_stage(w: &[f64], v: &[f64], j: usize) -> Vec<f64> {
    let n = v.len();
    let lag = (1usize << (j - 1)) % n;
    (0..n)
        .map(|t| {
            let ahead = (t + lag) % n;
            0.5 * (w[t] - w[ahead]) + 0.5 * (v[t] + v[ahead])
        })
        .collect()
}

/// Inverse pyramid from coefficients back to the series.
pub fn imodwt_coefficients(c: &ModwtCoefficients) -> Result<Vec<f64>> {
    let n = c.scaling.len();
    if c.wavelet.iter().any(|w| w.len() != n) {
        return Err(Error::Structure(format!(
            "wavelet coefficient vectors do not all have length {n}"
        )));
    }
    let mut v = c.scaling.clone();
    for j in (1..=c.levels()).rev() {
        v = inverse_stage(&c.wavelet[j - 1], &v, j);
    }
    Ok(v)
}

/// Decomposes `x` into `levels` details plus a smooth.
pub fn modwt_haar(x: &[f64], levels: usize) -> Result<WaveletMra> {
    let coefficients = modwt_coefficients(x, levels)?;
    let n = x.len();
    let zeros = vec![0.0; n];

    let mut details = Vec::with_capacity(levels);
    for j in 1..=levels {
        // invert W_j with every other band zeroed
        let mut v = inverse_stage(&coefficients.wavelet[j - 1], &zeros, j);
        for k in (1..j).rev() {
            v = inverse_stage(&zeros, &v, k);
        }
        details.push(v);
    }
    let mut smooth = coefficients.scaling.clone();
    for k in (1..=levels).rev() {
        smooth = inverse_stage(&zeros, &smooth, k);
    }
    Ok(WaveletMra {
        details,
        smooth,
        coefficients,
    })
}

/// Recombines an MRA: `sum_j D_j + S_J`.
pub fn imodwt_haar(mra: &WaveletMra) -> Result<Vec<f64>> {
    let n = mra.smooth.len();
    if let Some(bad) = mra.details.iter().position(|d| d.len() != n) {
        return Err(Error::Structure(format!(
            "detail D_{} has length {}, smooth has {n}",
            bad + 1,
            mra.details[bad].len()
        )));
    }
    let mut out = mra.smooth.clone();
    for d in &mra.details {
        for (o, v) in out.iter_mut().zip(d) {
            *o += v;
        }
    }
    Ok(out)
}
