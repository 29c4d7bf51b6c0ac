//! Time-delay neural networks and the wavelet-based ensemble (WBANN).
//!
//! A TDNN here is a single-hidden-layer feedforward net over the last `p`
//! values of a series: logistic hidden units, linear output, min-max scaled
//! data, full-batch gradient descent, and `R` seeded restarts whose
//! predictions are averaged. WBANN splits a series with the Haar MODWT,
//! trains one TDNN per MRA component and sums the component forecasts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forecasters::Aligned;
use crate::wavelet::{choose_levels, modwt_haar};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdnnConfig {
    pub lags: usize,
    pub hidden: usize,
    pub repeats: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TdnnConfig {
    fn default() -> Self {
        let lags = 4;
        Self {
            lags,
            hidden: (lags + 1).div_ceil(2),
            repeats: 20,
            epochs: 500,
            learning_rate: 0.05,
            seed: 42,
        }
    }
}

impl TdnnConfig {
    pub fn validate(&self) -> Result<()> {
        if self.lags == 0 || self.hidden == 0 || self.repeats == 0 {
            return Err(Error::Domain(format!(
                "TDNN needs lags, hidden and repeats >= 1 (got {}, {}, {})",
                self.lags, self.hidden, self.repeats
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Domain(format!(
                "learning rate must be positive, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

/// Min-max map onto `[0, 1]`. A degenerate range maps everything to 0 and
/// inverts to the constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn fit(values: &[f64]) -> Self {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { min, max }
    }

    fn range(&self) -> f64 {
        self.max - self.min
    }

    pub fn scale(&self, v: f64) -> f64 {
        if self.range() > 0.0 {
            (v - self.min) / self.range()
        } else {
            0.0
        }
    }

    pub fn unscale(&self, s: f64) -> f64 {
        if self.range() > 0.0 {
            self.min + s * self.range()
        } else {
            self.min
        }
    }
}

/// Lagged design matrix: row `i` is `x[i..i+p]`, target `x[i+p]`.
pub fn make_lag_matrix(series: &[f64], p: usize) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    if p == 0 || series.len() <= p {
        return Err(Error::InsufficientData {
            needed: p + 1,
            got: series.len(),
        });
    }
    let rows = series.windows(p + 1).map(|w| w[..p].to_vec()).collect();
    let targets = series[p..].to_vec();
    Ok((rows, targets))
}

fn logistic(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Row-major `n x lags` to lag-major `lags x n`.
fn lag_major(rows: &[f64], lags: usize) -> Vec<f64> {
    let n = rows.len() / lags;
    let mut cols = vec![0.0; rows.len()];
    for (t, row) in rows.chunks_exact(lags).enumerate() {
        for (i, v) in row.iter().enumerate() {
            cols[i * n + t] = *v;
        }
    }
    cols
}

fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Dot product with four fixed accumulators.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for j in 0..4 {
            acc[j] += x[j] * y[j];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// One `p -> hidden -> 1` network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    lags: usize,
    hidden: usize,
    /// `hidden x lags`, row-major.
    w_in: Vec<f64>,
    b_in: Vec<f64>,
    w_out: Vec<f64>,
    b_out: f64,
}

impl Network {
    /// Weights uniform in `[-0.5, 0.5]`.
    pub fn random<R: Rng>(lags: usize, hidden: usize, rng: &mut R) -> Self {
        let mut u = || rng.random_range(-0.5..=0.5);
        let w_in = (0..hidden * lags).map(|_| u()).collect();
        let b_in = (0..hidden).map(|_| u()).collect();
        let w_out = (0..hidden).map(|_| u()).collect();
        let b_out = u();
        Self {
            lags,
            hidden,
            w_in,
            b_in,
            w_out,
            b_out,
        }
    }

    pub fn n_params(lags: usize, hidden: usize) -> usize {
        hidden * lags + 2 * hidden + 1
    }

    /// Flat parameters: `w_in`, `b_in`, `w_out`, `b_out`.
    pub fn params(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::n_params(self.lags, self.hidden));
        v.extend(&self.w_in);
        v.extend(&self.b_in);
        v.extend(&self.w_out);
        v.push(self.b_out);
        v
    }

    pub fn from_params(lags: usize, hidden: usize, params: &[f64]) -> Result<Self> {
        if params.len() != Self::n_params(lags, hidden) {
            return Err(Error::Structure(format!(
                "expected {} parameters for a {lags}-{hidden}-1 network, got {}",
                Self::n_params(lags, hidden),
                params.len()
            )));
        }
        let (w_in, rest) = params.split_at(hidden * lags);
        let (b_in, rest) = rest.split_at(hidden);
        let (w_out, rest) = rest.split_at(hidden);
        Ok(Self {
            lags,
            hidden,
            w_in: w_in.to_vec(),
            b_in: b_in.to_vec(),
            w_out: w_out.to_vec(),
            b_out: rest[0],
        })
    }

    pub fn lags(&self) -> usize {
        self.lags
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.lags);
        let mut out = self.b_out;
        for k in 0..self.hidden {
            let row = &self.w_in[k * self.lags..(k + 1) * self.lags];
            let z = self.b_in[k] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            out += self.w_out[k] * logistic(z);
        }
        out
    }

    /// Mean squared error over `targets` and its gradient in [`Network::params`]
    /// order. `inputs` is row-major, `targets.len() x lags`.
    pub fn loss_gradient(&self, inputs: &[f64], targets: &[f64]) -> (f64, Vec<f64>) {
        let mut grad = vec![0.0; Self::n_params(self.lags, self.hidden)];
        let cols = lag_major(inputs, self.lags);
        let loss = self.accumulate(&cols, targets, &mut grad, &mut Vec::new());
        (loss, grad)
    }

    /// Batch pass over lag-major `cols` (`lags x n`). `scratch` is reused
    /// between calls.
    fn accumulate(&self, cols: &[f64], targets: &[f64], grad: &mut [f64], scratch: &mut Vec<f64>) -> f64 {
        let (p, hdim, n) = (self.lags, self.hidden, targets.len());
        scratch.clear();
        scratch.resize((hdim + 1) * n, 0.0);
        let (act, delta) = scratch.split_at_mut(hdim * n);

        delta.fill(self.b_out);
        for k in 0..hdim {
            let a = &mut act[k * n..(k + 1) * n];
            a.fill(self.b_in[k]);
            for (w, col) in self.w_in[k * p..(k + 1) * p].iter().zip(cols.chunks_exact(n)) {
                axpy(*w, col, a);
            }
            let wo = self.w_out[k];
            for (z, o) in a.iter_mut().zip(delta.iter_mut()) {
                *z = logistic(*z);
                *o += wo * *z;
            }
        }
        let mut loss = 0.0;
        let scale = 2.0 / n as f64;
        for (o, y) in delta.iter_mut().zip(targets) {
            let err = *o - y;
            loss += err * err;
            *o = scale * err;
        }

        let (g_w_in, rest) = grad.split_at_mut(hdim * p);
        let (g_b_in, rest) = rest.split_at_mut(hdim);
        let (g_w_out, g_b_out) = rest.split_at_mut(hdim);
        g_b_out[0] = delta.iter().sum();
        for k in 0..hdim {
            let a = &mut act[k * n..(k + 1) * n];
            g_w_out[k] = dot(delta, a);
            let wo = self.w_out[k];
            // reuse the activations for dL/dz
            for (z, d) in a.iter_mut().zip(delta.iter()) {
                *z = d * wo * *z * (1.0 - *z);
            }
            g_b_in[k] = a.iter().sum();
            for (g, col) in g_w_in[k * p..(k + 1) * p].iter_mut().zip(cols.chunks_exact(n)) {
                *g = dot(a, col);
            }
        }
        loss / n as f64
    }

    fn step(&mut self, grad: &[f64], lr: f64) {
        let (g_w_in, rest) = grad.split_at(self.w_in.len());
        let (g_b_in, rest) = rest.split_at(self.hidden);
        let (g_w_out, g_b_out) = rest.split_at(self.hidden);
        for (w, g) in self.w_in.iter_mut().zip(g_w_in) {
            *w -= lr * g;
        }
        for (w, g) in self.b_in.iter_mut().zip(g_b_in) {
            *w -= lr * g;
        }
        for (w, g) in self.w_out.iter_mut().zip(g_w_out) {
            *w -= lr * g;
        }
        self.b_out -= lr * g_b_out[0];
    }
}

/// A trained TDNN: `repeats` networks averaged on the scaled axis.
#[derive(Debug, Clone, PartialEq)]
pub struct TdnnModel {
    pub config: TdnnConfig,
    pub scale: MinMax,
    pub networks: Vec<Network>,
    /// In-sample one-step predictions, defined from position `lags`.
    pub fitted: Aligned,
}

impl TdnnModel {
    pub fn from_parts(config: TdnnConfig, scale: MinMax, networks: Vec<Network>) -> Result<Self> {
        if networks.is_empty()
            || networks
                .iter()
                .any(|n| n.lags != config.lags || n.hidden != config.hidden)
        {
            return Err(Error::Structure(
                "networks do not match the configured lags/hidden sizes".into(),
            ));
        }
        Ok(Self {
            config,
            scale,
            networks,
            fitted: Aligned::new(config.lags, Vec::new()),
        })
    }

    /// One-step prediction in original units from a window of `lags` values.
    pub fn predict(&self, window: &[f64]) -> f64 {
        let scaled: Vec<f64> = window.iter().map(|&v| self.scale.scale(v)).collect();
        let mean = self.networks.iter().map(|n| n.predict(&scaled)).sum::<f64>()
            / self.networks.len() as f64;
        self.scale.unscale(mean)
    }
}

pub fn tdnn_train(series: &[f64], config: &TdnnConfig) -> Result<TdnnModel> {
    config.validate()?;
    let p = config.lags;
    if series.len() <= p + 2 {
        return Err(Error::InsufficientData {
            needed: p + 3,
            got: series.len(),
        });
    }
    let targets_raw = &series[p..];
    let scale = MinMax::fit(targets_raw);
    let scaled: Vec<f64> = series.iter().map(|&v| scale.scale(v)).collect();
    let targets = &scaled[p..];
    let n = targets.len();
    // lag i of sample t is scaled[t + i]
    let cols: Vec<f64> = (0..p).flat_map(|i| scaled[i..i + n].iter().copied()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut networks = Vec::with_capacity(config.repeats);
    let mut grad = vec![0.0; Network::n_params(p, config.hidden)];
    let mut scratch = Vec::new();
    for restart in 0..config.repeats {
        let mut net = Network::random(p, config.hidden, &mut rng);
        for epoch in 0..config.epochs {
            let loss = net.accumulate(&cols, targets, &mut grad, &mut scratch);
            if !loss.is_finite() {
                return Err(Error::Training { epoch, restart });
            }
            net.step(&grad, config.learning_rate);
        }
        if net.params().iter().any(|w| !w.is_finite()) {
            return Err(Error::Training {
                epoch: config.epochs,
                restart,
            });
        }
        networks.push(net);
    }
    let mut model = TdnnModel::from_parts(*config, scale, networks)?;
    model.fitted = Aligned::new(
        p,
        series.windows(p + 1).map(|w| model.predict(&w[..p])).collect(),
    );
    Ok(model)
}

/// Recursive multi-step forecast: each prediction joins the lag window.
pub fn tdnn_forecast(model: &TdnnModel, history: &[f64], h: usize) -> Result<Vec<f64>> {
    let p = model.config.lags;
    if history.len() != p {
        return Err(Error::LengthMismatch {
            left: history.len(),
            right: p,
        });
    }
    let mut window = history.to_vec();
    let mut out = Vec::with_capacity(h);
    for _ in 0..h {
        let next = model.predict(&window);
        out.push(next);
        window.remove(0);
        window.push(next);
    }
    Ok(out)
}

/// One TDNN per MRA component of a (residual) series.
#[derive(Debug, Clone, PartialEq)]
pub struct WbannModel {
    pub levels: usize,
    /// Models for `D_1..D_J` then `S_J`.
    pub components: Vec<TdnnModel>,
    /// Last `lags` values of each component.
    pub tails: Vec<Vec<f64>>,
    /// Sum of the component in-sample fits, defined from position `lags`.
    pub fitted: Aligned,
}

impl WbannModel {
    pub fn from_parts(components: Vec<TdnnModel>, tails: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() < 2 || components.len() != tails.len() {
            return Err(Error::Structure(format!(
                "{} component models for {} tails",
                components.len(),
                tails.len()
            )));
        }
        let fitted = sum_aligned(components.iter().map(|c| &c.fitted))?;
        Ok(Self {
            levels: components.len() - 1,
            components,
            tails,
            fitted,
        })
    }

    /// Per-component `h`-step forecasts.
    pub fn component_forecasts(&self, h: usize) -> Vec<Vec<f64>> {
        self.components
            .iter()
            .zip(&self.tails)
            .map(|(m, tail)| tdnn_forecast(m, tail, h).expect("tail length matches lags"))
            .collect()
    }
}

fn sum_aligned<'a>(parts: impl Iterator<Item = &'a Aligned>) -> Result<Aligned> {
    let mut acc: Option<Aligned> = None;
    for a in parts {
        match acc.as_mut() {
            None => acc = Some(a.clone()),
            Some(s) => {
                if s.start != a.start || s.values.len() != a.values.len() {
                    return Err(Error::Structure("component fits are not aligned".into()));
                }
                for (x, y) in s.values.iter_mut().zip(&a.values) {
                    *x += y;
                }
            }
        }
    }
    acc.ok_or_else(|| Error::Structure("no components".into()))
}

/// Decomposes at `choose_levels(n)` and trains one TDNN per component.
/// Component `i` uses seed `config.seed + i`.
pub fn wbann_fit(residuals: &[f64], config: &TdnnConfig) -> Result<WbannModel> {
    if residuals.len() < 16 {
        return Err(Error::InsufficientData {
            needed: 16,
            got: residuals.len(),
        });
    }
    config.validate()?;
    let levels = choose_levels(residuals.len())?;
    let mra = modwt_haar(residuals, levels)?;
    let comps: Vec<&[f64]> = mra.components().collect();
    let components = comps
        .par_iter()
        .enumerate()
        .map(|(i, c)| tdnn_train(c, &config.with_seed(config.seed.wrapping_add(i as u64))))
        .collect::<Result<Vec<_>>>()?;
    let p = config.lags;
    let tails = comps.iter().map(|c| c[c.len() - p..].to_vec()).collect();
    WbannModel::from_parts(components, tails)
}

/// Sum of the component forecasts.
pub fn wbann_forecast(model: &WbannModel, h: usize) -> Vec<f64> {
    let mut out = vec![0.0; h];
    for f in model.component_forecasts(h) {
        for (o, v) in out.iter_mut().zip(f) {
            *o += v;
        }
    }
    out
}
