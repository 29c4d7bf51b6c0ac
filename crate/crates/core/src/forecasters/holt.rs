//! Holt's additive (level + trend) exponential smoothing.
//!
//! ```text
//! L_1 = y_1,  T_1 = y_2 - y_1
//! L_t = a y_t + (1 - a)(L_{t-1} + T_{t-1})
//! T_t = b (L_t - L_{t-1}) + (1 - b) T_{t-1}
//! y_{t+h|t} = L_t + h T_t
//! ```
//!
//! Parameters are chosen by exhaustive search over a 0.01 grid.

use super::{Aligned, Forecaster};
use crate::error::{Error, Result};

/// Grid resolution of [`holt_fit`].
pub const GRID_STEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoltParams {
    alpha: f64,
    beta: f64,
}

impl HoltParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let ok = |x: f64| x > 0.0 && x <= 1.0;
        if !ok(alpha) || !ok(beta) {
            return Err(Error::Domain(format!(
                "Holt smoothing factors must lie in (0, 1], got alpha={alpha}, beta={beta}"
            )));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Point `(i, j)` of the search grid, `alpha = i/100`, `beta = j/100`.
    pub fn grid(i: usize, j: usize) -> Self {
        debug_assert!((1..=GRID_STEPS).contains(&i) && (1..=GRID_STEPS).contains(&j));
        Self {
            alpha: i as f64 / GRID_STEPS as f64,
            beta: j as f64 / GRID_STEPS as f64,
        }
    }
}

/// Level, trend and one-step fitted values of a filtered series.
#[derive(Debug, Clone, PartialEq)]
pub struct HoltState {
    pub level: Vec<f64>,
    pub trend: Vec<f64>,
    /// `y_{t|t-1}`, defined from position 1.
    pub fitted: Aligned,
    pub residuals: Aligned,
}

impl HoltState {
    pub fn last_level(&self) -> f64 {
        *self.level.last().expect("non-empty state")
    }

    pub fn last_trend(&self) -> f64 {
        *self.trend.last().expect("non-empty state")
    }

    /// Sum of squared one-step residuals.
    pub fn sse(&self) -> f64 {
        self.residuals.values.iter().map(|e| e * e).sum()
    }
}

pub fn holt_filter(values: &[f64], params: HoltParams) -> Result<HoltState> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InsufficientData { needed: 2, got: n });
    }
    let (a, b) = (params.alpha, params.beta);
    let mut level = Vec::with_capacity(n);
    let mut trend = Vec::with_capacity(n);
    let mut fitted = Vec::with_capacity(n - 1);
    let mut residuals = Vec::with_capacity(n - 1);
    let (mut l, mut t) = (values[0], values[1] - values[0]);
    level.push(l);
    trend.push(t);
    for &y in &values[1..] {
        let f = l + t;
        let e = y - f;
        // error-correction form of the level/trend recursions
        let new_l = f + a * e;
        t += b * (new_l - l - t);
        l = new_l;
        fitted.push(f);
        residuals.push(e);
        level.push(l);
        trend.push(t);
    }
    Ok(HoltState {
        level,
        trend,
        fitted: Aligned::new(1, fitted),
        residuals: Aligned::new(1, residuals),
    })
}

/// One-step SSE without allocating the state.
pub(crate) fn holt_sse(values: &[f64], params: HoltParams) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    let (mut l, mut t) = (values[0], values[1] - values[0]);
    let mut sse = 0.0;
    for &y in &values[1..] {
        let f = l + t;
        let e = y - f;
        sse += e * e;
        let new_l = f + a * e;
        t += b * (new_l - l - t);
        l = new_l;
    }
    sse
}

/// `L_t + i T_t` for `i = 1..=h`.
pub fn holt_forecast(state: &HoltState, h: usize) -> Vec<f64> {
    let (l, t) = (state.last_level(), state.last_trend());
    (1..=h).map(|i| l + i as f64 * t).collect()
}

/// A Holt model with grid-searched parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct HoltFit {
    pub params: HoltParams,
    pub state: HoltState,
}

impl Forecaster for HoltFit {
    fn fitted(&self) -> &Aligned {
        &self.state.fitted
    }

    fn residuals(&self) -> &Aligned {
        &self.state.residuals
    }

    fn forecast(&self, h: usize) -> Vec<f64> {
        holt_forecast(&self.state, h)
    }
}

/// Minimises the one-step SSE over `{0.01, ..., 1.00}^2`. Ties go to the
/// smaller alpha, then the smaller beta.
pub fn holt_fit(values: &[f64]) -> Result<HoltFit> {
    if values.len() < 4 {
        return Err(Error::InsufficientData {
            needed: 4,
            got: values.len(),
        });
    }
    let mut best = (f64::INFINITY, HoltParams::grid(1, 1));
    for i in 1..=GRID_STEPS {
        for j in 1..=GRID_STEPS {
            let p = HoltParams::grid(i, j);
            let sse = holt_sse(values, p);
            if sse < best.0 {
                best = (sse, p);
            }
        }
    }
    let params = best.1;
    Ok(HoltFit {
        params,
        state: holt_filter(values, params)?,
    })
}
