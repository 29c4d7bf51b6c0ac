//! Minimal ARIMA(p, d, q) baseline fitted by conditional sum of squares.
//!
//! On the differenced series `w = diff^d(y)`:
//!
//! ```text
//! w_t = c + sum_i phi_i w_{t-i} + sum_j theta_j e_{t-j} + e_t
//! ```
//!
//! conditioned on the first `p` observations with pre-sample innovations at
//! zero. The constant `c` is estimated only for `d = 0`.

use super::{Aligned, Forecaster};
use crate::error::{Error, Result};
use crate::optim::NelderMead;

pub const MAX_P: usize = 5;
pub const MAX_Q: usize = 5;
pub const MAX_D: usize = 2;
pub const MIN_LEN: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArimaOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
}

impl ArimaOrder {
    pub fn new(p: usize, d: usize, q: usize) -> Result<Self> {
        if p > MAX_P || q > MAX_Q || d > MAX_D {
            return Err(Error::Domain(format!(
                "ARIMA order ({p},{d},{q}) outside p,q <= 5, d <= 2"
            )));
        }
        Ok(Self { p, d, q })
    }

    fn tuple(self) -> (usize, usize, usize) {
        (self.p, self.d, self.q)
    }

    fn has_intercept(self) -> bool {
        self.d == 0
    }

    fn n_coef(self) -> usize {
        self.p + self.q + usize::from(self.has_intercept())
    }
}

impl std::fmt::Display for ArimaOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArimaModel {
    pub order: ArimaOrder,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub intercept: f64,
    pub sigma2: f64,
    /// Conditional sum of squares at the optimum.
    pub css: f64,
    pub aic: f64,
    pub fitted: Aligned,
    pub residuals: Aligned,
    /// `diff^k(y)` tails for k = 0..=d, each holding at most `max(p, 1)` values.
    tails: Vec<Vec<f64>>,
    /// Last `q` innovations.
    innovations: Vec<f64>,
}

impl ArimaModel {
    /// Builds a model from explicit coefficients, filtering `values` to obtain
    /// the innovations needed for forecasting.
    pub fn from_coefficients(
        values: &[f64],
        order: ArimaOrder,
        intercept: f64,
        ar: Vec<f64>,
        ma: Vec<f64>,
    ) -> Result<Self> {
        if ar.len() != order.p || ma.len() != order.q {
            return Err(Error::Domain(format!(
                "coefficient counts ({}, {}) do not match order {order}",
                ar.len(),
                ma.len()
            )));
        }
        let needed = order.d + order.p + 1;
        if values.len() < needed {
            return Err(Error::InsufficientData {
                needed,
                got: values.len(),
            });
        }
        let diffs = difference_chain(values, order.d);
        let w = &diffs[order.d];
        let e = css_residuals(w, intercept, &ar, &ma);
        let css: f64 = e.iter().map(|x| x * x).sum();
        let n_res = e.len();
        let sigma2 = (css / n_res as f64).max(1e-300);
        let k = order.n_coef() + 1;
        let aic = n_res as f64 * sigma2.ln() + 2.0 * k as f64;
        let start = order.d + order.p;
        let residuals = Aligned::new(start, e.clone());
        let fitted = Aligned::new(
            start,
            e.iter()
                .zip(&values[start..])
                .map(|(e, y)| y - e)
                .collect(),
        );
        let keep = order.p.max(1);
        let tails = diffs
            .iter()
            .map(|s| s[s.len().saturating_sub(keep)..].to_vec())
            .collect();
        let innovations = e[e.len().saturating_sub(order.q)..].to_vec();
        Ok(Self {
            order,
            ar,
            ma,
            intercept,
            sigma2,
            css,
            aic,
            fitted,
            residuals,
            tails,
            innovations,
        })
    }
}

impl Forecaster for ArimaModel {
    fn fitted(&self) -> &Aligned {
        &self.fitted
    }

    fn residuals(&self) -> &Aligned {
        &self.residuals
    }

    fn forecast(&self, h: usize) -> Vec<f64> {
        arima_forecast(self, h)
    }
}

/// `[y, diff(y), ..., diff^d(y)]`.
fn difference_chain(values: &[f64], d: usize) -> Vec<Vec<f64>> {
    let mut chain = vec![values.to_vec()];
    for _ in 0..d {
        let last = chain.last().unwrap();
        let next = last.windows(2).map(|w| w[1] - w[0]).collect();
        chain.push(next);
    }
    chain
}

/// Innovations `e_p .. e_{n-1}` of the ARMA recursion on `w`.
fn css_residuals(w: &[f64], c: f64, ar: &[f64], ma: &[f64]) -> Vec<f64> {
    let p = ar.len();
    let mut e = vec![0.0; w.len()];
    for t in p..w.len() {
        let mut pred = c;
        for (i, phi) in ar.iter().enumerate() {
            pred += phi * w[t - 1 - i];
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                pred += theta * e[t - 1 - j];
            }
        }
        e[t] = w[t] - pred;
    }
    e.split_off(p)
}

/// True when `1 - a_1 z - ... - a_k z^k` has every root outside the unit
/// circle, by the Durbin-Levinson step-down recursion.
fn is_stable(a: &[f64]) -> bool {
    let mut a = a.to_vec();
    while let Some(&r) = a.last() {
        if !(r.abs() < 1.0) {
            return false;
        }
        let k = a.len() - 1;
        let denom = 1.0 - r * r;
        a = (0..k).map(|j| (a[j] + r * a[k - 1 - j]) / denom).collect();
    }
    true
}

/// Conditional sum of squares; infinite outside the stationary and invertible
/// region so the optimiser cannot exploit start-up transients.
fn css(w: &[f64], c: f64, ar: &[f64], ma: &[f64]) -> f64 {
    let neg_ma: Vec<f64> = ma.iter().map(|t| -t).collect();
    if !is_stable(ar) || !is_stable(&neg_ma) {
        return f64::INFINITY;
    }
    let p = ar.len();
    let mut e = vec![0.0; w.len()];
    let mut total = 0.0;
    for t in p..w.len() {
        let mut pred = c;
        for (i, phi) in ar.iter().enumerate() {
            pred += phi * w[t - 1 - i];
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                pred += theta * e[t - 1 - j];
            }
        }
        let r = w[t] - pred;
        if !r.is_finite() || r.abs() > 1e150 {
            return f64::INFINITY;
        }
        e[t] = r;
        total += r * r;
    }
    total
}

fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
}

/// Smallest `d` at which one more difference no longer lowers the sample variance.
pub fn select_d(values: &[f64]) -> usize {
    let chain = difference_chain(values, MAX_D);
    let vars: Vec<f64> = chain.iter().map(|s| sample_variance(s)).collect();
    (0..MAX_D).find(|&d| vars[d + 1] >= vars[d]).unwrap_or(MAX_D)
}

/// Parameter layout: `[mu?, phi_1..phi_p, theta_1..theta_q]`, where `mu` is the
/// mean of `w` (only for d = 0) and `c = mu (1 - sum phi)`.
fn unpack(order: ArimaOrder, x: &[f64]) -> (f64, &[f64], &[f64]) {
    let off = usize::from(order.has_intercept());
    let mu = if off == 1 { x[0] } else { 0.0 };
    let ar = &x[off..off + order.p];
    let ma = &x[off + order.p..off + order.p + order.q];
    (mu * (1.0 - ar.iter().sum::<f64>()), ar, ma)
}

fn optimizer(dim: usize) -> NelderMead {
    NelderMead {
        max_iter: 1000 * dim.max(1),
        ftol: 1e-9,
        xtol: 1e-5,
        step: 0.1,
        bounds: None,
    }
}

fn fit_from_start(values: &[f64], w: &[f64], order: ArimaOrder, x0: &[f64]) -> Result<(ArimaModel, Vec<f64>)> {
    let off = usize::from(order.has_intercept());
    let x = if order.p + order.q == 0 {
        // closed form: the mean
        x0.to_vec()
    } else {
        let nm = optimizer(x0.len());
        let m = nm.minimize(
            |x| {
                let (c, ar, ma) = unpack(order, x);
                css(w, c, ar, ma)
            },
            x0,
        );
        if !m.converged || !m.fx.is_finite() {
            return Err(Error::NoConvergence {
                order: order.tuple(),
                iterations: m.iterations,
            });
        }
        m.x
    };
    let (c, ar, ma) = unpack(order, &x);
    let model = ArimaModel::from_coefficients(values, order, c, ar.to_vec(), ma.to_vec())?;
    debug_assert!(off <= x.len());
    Ok((model, x))
}

fn default_start(w: &[f64], order: ArimaOrder) -> Vec<f64> {
    let mut x = Vec::with_capacity(order.n_coef());
    if order.has_intercept() {
        x.push(w.iter().sum::<f64>() / w.len() as f64);
    }
    x.extend(std::iter::repeat_n(0.0, order.p + order.q));
    x
}

/// Embeds the parameters of a nested smaller order, padding new coefficients with zero.
fn pad(from: ArimaOrder, x: &[f64], to: ArimaOrder) -> Vec<f64> {
    let off = usize::from(to.has_intercept());
    let mut out = vec![0.0; to.n_coef()];
    if off == 1 {
        out[0] = x[0];
    }
    out[off..off + from.p].copy_from_slice(&x[off..off + from.p]);
    out[off + to.p..off + to.p + from.q].copy_from_slice(&x[off + from.p..off + from.p + from.q]);
    out
}

/// Fits one explicit order.
pub fn arima_fit_order(values: &[f64], order: ArimaOrder) -> Result<ArimaModel> {
    let needed = (order.d + order.p + order.q + 2).max(3);
    if values.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: values.len(),
        });
    }
    let chain = difference_chain(values, order.d);
    let w = &chain[order.d];
    fit_from_start(values, w, order, &default_start(w, order)).map(|(m, _)| m)
}

/// Chooses `d` by the variance rule and `(p, q)` by AIC over `{0..5}^2`.
pub fn arima_fit(values: &[f64]) -> Result<ArimaModel> {
    if values.len() < MIN_LEN {
        return Err(Error::InsufficientData {
            needed: MIN_LEN,
            got: values.len(),
        });
    }
    let d = select_d(values);
    let grid = arima_grid(values, d);
    let mut best: Option<&ArimaModel> = None;
    for m in grid.iter().flatten().flatten() {
        if best.is_none_or(|b| m.aic < b.aic) {
            best = Some(m);
        }
    }
    best.cloned().ok_or(Error::NoConvergence {
        order: (MAX_P, d, MAX_Q),
        iterations: 0,
    })
}

/// Every `(p, q)` fit for a fixed `d`, indexed `[p][q]`; `None` where the
/// optimiser did not converge. Each order is warm-started from the better of
/// its nested `(p-1, q)` / `(p, q-1)` solutions, so the objective never
/// increases when an MA term is added.
pub fn arima_grid(values: &[f64], d: usize) -> Vec<Vec<Option<ArimaModel>>> {
    let chain = difference_chain(values, d);
    let w = &chain[d];
    let mut params: Vec<Vec<Option<Vec<f64>>>> = vec![vec![None; MAX_Q + 1]; MAX_P + 1];
    let mut models: Vec<Vec<Option<ArimaModel>>> = vec![vec![None; MAX_Q + 1]; MAX_P + 1];
    for p in 0..=MAX_P {
        for q in 0..=MAX_Q {
            let order = ArimaOrder { p, d, q };
            if w.len() < p + q + 2 {
                continue;
            }
            let mut starts = vec![default_start(w, order)];
            if p > 0 {
                if let Some(x) = &params[p - 1][q] {
                    starts.push(pad(ArimaOrder { p: p - 1, d, q }, x, order));
                }
            }
            if q > 0 {
                if let Some(x) = &params[p][q - 1] {
                    starts.push(pad(ArimaOrder { p, d, q: q - 1 }, x, order));
                }
            }
            let objective = |x: &[f64]| {
                let (c, ar, ma) = unpack(order, x);
                css(w, c, ar, ma)
            };
            let x0 = starts
                .into_iter()
                .min_by(|a, b| objective(a).total_cmp(&objective(b)))
                .unwrap();
            match fit_from_start(values, w, order, &x0) {
                Ok((m, x)) => {
                    params[p][q] = Some(x);
                    models[p][q] = Some(m);
                }
                Err(e) => log::debug!("skipping ARIMA{order}: {e}"),
            }
        }
    }
    models
}

/// Recursive point forecasts with future innovations at zero, integrated back
/// through `d` differences.
pub fn arima_forecast(model: &ArimaModel, h: usize) -> Vec<f64> {
    let ArimaOrder { p, d, q } = model.order;
    let mut w_hist: Vec<f64> = model.tails[d].clone();
    let mut e_hist: Vec<f64> = model.innovations.clone();
    let mut w_fc = Vec::with_capacity(h);
    for _ in 0..h {
        let mut pred = model.intercept;
        for i in 0..p {
            pred += model.ar[i] * w_hist[w_hist.len() - 1 - i];
        }
        for j in 0..q {
            if e_hist.len() > j {
                pred += model.ma[j] * e_hist[e_hist.len() - 1 - j];
            }
        }
        w_fc.push(pred);
        w_hist.push(pred);
        e_hist.push(0.0);
    }
    let mut fc = w_fc;
    for k in (0..d).rev() {
        let mut last = *model.tails[k].last().expect("non-empty tail");
        for v in fc.iter_mut() {
            last += *v;
            *v = last;
        }
    }
    fc
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn noise(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, 1.0).unwrap();
        (0..n).map(|_| normal.sample(&mut rng)).collect()
    }

    fn ar1(phi: f64, n: usize, seed: u64) -> Vec<f64> {
        let e = noise(n + 100, seed);
        let mut y = vec![0.0; n + 100];
        for t in 1..y.len() {
            y[t] = phi * y[t - 1] + e[t];
        }
        y.split_off(100)
    }

    fn yule_walker_lag1(y: &[f64]) -> f64 {
        let n = y.len() as f64;
        let m = y.iter().sum::<f64>() / n;
        let c0: f64 = y.iter().map(|v| (v - m).powi(2)).sum();
        let c1: f64 = y.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        c1 / c0
    }

    #[test]
    fn stability_region() {
        assert!(is_stable(&[]));
        assert!(is_stable(&[0.9]) && !is_stable(&[1.0]) && !is_stable(&[-1.2]));
        // AR(2) triangle: a2 + a1 < 1, a2 - a1 < 1, |a2| < 1
        assert!(is_stable(&[0.5, 0.3]));
        assert!(!is_stable(&[0.8, 0.3]));
        assert!(!is_stable(&[-0.8, 0.3]));
        assert!(!is_stable(&[0.1, -1.0]));
        // (1 - 0.5z)(1 - 2z) has a root at z = 0.5
        assert!(!is_stable(&[2.5, -1.0]));
    }

    #[test]
    fn ar1_coefficient_recovered() {
        let y = ar1(0.8, 500, 7);
        let m = arima_fit_order(&y, ArimaOrder::new(1, 0, 0).unwrap()).unwrap();
        let yw = yule_walker_lag1(&y);
        assert!((m.ar[0] - 0.8).abs() < 0.1, "phi = {}", m.ar[0]);
        assert!((m.ar[0] - yw).abs() < 0.02, "phi = {} vs yw {yw}", m.ar[0]);
        assert_eq!(m.residuals.values.len(), 500 - 1);
    }

    #[test]
    fn white_noise_selection_matches_brute_force_aic() {
        let y: Vec<f64> = noise(500, 11).into_iter().map(|v| v + 3.0).collect();
        let d = select_d(&y);
        assert_eq!(d, 0);
        let m = arima_fit(&y).unwrap();
        let grid = arima_grid(&y, d);
        let min_aic = grid
            .iter()
            .flatten()
            .flatten()
            .map(|m| m.aic)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(m.aic, min_aic);
        assert_eq!((m.order.p, m.order.q), (0, 0));
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        for f in arima_forecast(&m, 5) {
            assert!((f - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_series_forecasts_constant() {
        let y = vec![42.0; 30];
        let m = arima_fit(&y).unwrap();
        for f in arima_forecast(&m, 4) {
            assert!((f - 42.0).abs() < 1e-9);
        }
        // first difference of a constant is identically zero
        let m = arima_fit_order(&y, ArimaOrder::new(0, 1, 0).unwrap()).unwrap();
        assert!(m.residuals.values.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn hand_forecasts() {
        let y = [1.0, 3.0, 5.0, 8.0];
        let mean = ArimaModel::from_coefficients(&y, ArimaOrder::new(0, 0, 0).unwrap(), 6.5, vec![], vec![])
            .unwrap();
        assert_eq!(arima_forecast(&mean, 3), vec![6.5; 3]);

        let rw = ArimaModel::from_coefficients(&y, ArimaOrder::new(0, 1, 0).unwrap(), 0.0, vec![], vec![])
            .unwrap();
        assert_eq!(arima_forecast(&rw, 3), vec![8.0; 3]);

        let ar = ArimaModel::from_coefficients(&y, ArimaOrder::new(1, 0, 0).unwrap(), 0.0, vec![0.5], vec![])
            .unwrap();
        assert_eq!(arima_forecast(&ar, 3), vec![4.0, 2.0, 1.0]);
    }

    #[test]
    fn second_difference_integrates_back() {
        // quadratic: second differences are constant 2
        let y: Vec<f64> = (0..25).map(|t| (t * t) as f64).collect();
        let m = ArimaModel::from_coefficients(&y, ArimaOrder::new(0, 2, 0).unwrap(), 0.0, vec![], vec![])
            .unwrap();
        // with c = 0 the second difference forecast is 0: linear continuation
        let f = arima_forecast(&m, 2);
        assert_eq!(f, vec![576.0 + 47.0, 576.0 + 94.0]);
        assert_eq!(m.fitted.start, 2);
    }

    #[test]
    fn fitted_residual_identity() {
        let y = ar1(0.5, 120, 3);
        let m = arima_fit_order(&y, ArimaOrder::new(2, 1, 1).unwrap()).unwrap();
        assert_eq!(m.fitted.start, 3);
        assert_eq!(m.residuals.values.len(), y.len() - 1 - 2);
        for t in m.fitted.start..y.len() {
            assert!((y[t] - m.fitted.get(t).unwrap() - m.residuals.get(t).unwrap()).abs() < 1e-9);
        }
    }

    #[test]
    fn adding_parameters_never_increases_css() {
        for seed in [1, 2] {
            let y = ar1(0.6, 200, seed);
            let grid = arima_grid(&y, 0);
            for p in 0..=MAX_P {
                for q in 1..=MAX_Q {
                    if let (Some(a), Some(b)) = (&grid[p][q - 1], &grid[p][q]) {
                        assert!(b.css <= a.css, "({p},{q}) {} > {}", b.css, a.css);
                    }
                }
                if p > 0 {
                    if let (Some(a), Some(b)) = (&grid[p - 1][0], &grid[p][0]) {
                        assert!(b.css <= a.css, "({p},0) {} > {}", b.css, a.css);
                    }
                }
            }
        }
    }

    #[test]
    fn order_bounds_and_length() {
        assert!(ArimaOrder::new(6, 0, 0).is_err());
        assert!(ArimaOrder::new(0, 3, 0).is_err());
        assert!(matches!(
            arima_fit(&[1.0; 10]),
            Err(Error::InsufficientData { needed: 20, .. })
        ));
    }

    #[test]
    fn variance_rule() {
        let lin: Vec<f64> = (0..40).map(|t| 2.0 + 3.0 * t as f64).collect();
        assert_eq!(select_d(&lin), 1);
        let quad: Vec<f64> = (0..40).map(|t| (t * t) as f64 + (t % 3) as f64).collect();
        assert!(select_d(&quad) >= 1);
    }
}
