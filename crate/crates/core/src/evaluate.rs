//! Accuracy metrics, rolling-origin model monitoring and model shelf life.

use chrono::NaiveDate;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forecasters::Forecaster;
use crate::models::{fit_all, ModelSpec};
use crate::neural::TdnnConfig;
use crate::series::UnivariateSeries;

/// Default moving-window width.
pub const DEFAULT_WINDOW: usize = 4;
/// Default decay for the recency-weighted winner.
pub const DEFAULT_RECENCY_DECAY: f64 = 0.9;

fn check_lengths(actual: &[f64], predicted: &[f64]) -> Result<()> {
    if actual.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: actual.len(),
            right: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(Error::InsufficientData { needed: 1, got: 0 });
    }
    Ok(())
}

pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    let mse = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum::<f64>()
        / actual.len() as f64;
    Ok(mse.sqrt())
}

pub fn mae(actual: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(actual, predicted)?;
    Ok(actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs())
        .sum::<f64>()
        / actual.len() as f64)
}

/// Absolute percent error `|y - yhat| / y * 100`.
pub fn ape(actual: f64, predicted: f64) -> f64 {
    (actual - predicted).abs() * 100.0 / actual
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowMetricRecord {
    /// 1-based position of the first scored observation.
    pub origin: usize,
    pub model: ModelSpec,
    pub rmse: f64,
    pub mae: f64,
    /// `(rmse + mae) / 2`.
    pub m: f64,
}

impl WindowMetricRecord {
    pub fn new(origin: usize, model: ModelSpec, rmse: f64, mae: f64) -> Self {
        Self {
            origin,
            model,
            rmse,
            mae,
            m: (rmse + mae) / 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub models: Vec<ModelSpec>,
    pub window: usize,
    /// Origins `[t/2]+1 ..= t-k+1`, 1-based.
    pub origins: Vec<usize>,
    /// Dates of the origins.
    pub origin_dates: Vec<NaiveDate>,
    /// Row-major `origins x models`.
    pub records: Vec<WindowMetricRecord>,
    /// Index into `models` of the winner at each origin.
    pub psi: Vec<usize>,
    /// Percentage of origins won, per model.
    pub dominance: Vec<f64>,
    /// Share of recency weight `decay^(T_max - T)` won, per model.
    pub recency_weighted: Vec<f64>,
    pub recency_decay: f64,
}

impl MonitorReport {
    pub fn record(&self, origin_idx: usize, model_idx: usize) -> &WindowMetricRecord {
        &self.records[origin_idx * self.models.len() + model_idx]
    }

    /// Mode of `psi`, ties to the earlier model.
    pub fn mode_winner(&self) -> ModelSpec {
        self.models[argmax_first(&self.dominance)]
    }

    pub fn recency_winner(&self) -> ModelSpec {
        self.models[argmax_first(&self.recency_weighted)]
    }
}

fn argmax_first(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Index of the smallest value, ties to the earlier index.
fn argmin_first(v: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, x) in v.enumerate() {
        if x < best.1 {
            best = (i, x);
        }
    }
    best.0
}

/// Number of monitoring origins for length `t` and window `k`.
pub fn origin_count(t: usize, k: usize) -> usize {
    (t + 1).saturating_sub(k).saturating_sub(t / 2)
}

/// Rolling-origin evaluation. At every origin `T` each model is trained on
/// observations `1..T-1`, forecasts `k` steps, and is scored on `T..T+k-1`.
/// Neural components at origin `T` use seed `config.seed + T`.
pub fn monitor(
    series: &UnivariateSeries,
    models: &[ModelSpec],
    k: usize,
    config: &TdnnConfig,
) -> Result<MonitorReport> {
    monitor_with_decay(series, models, k, config, DEFAULT_RECENCY_DECAY)
}

pub fn monitor_with_decay(
    series: &UnivariateSeries,
    models: &[ModelSpec],
    k: usize,
    config: &TdnnConfig,
    recency_decay: f64,
) -> Result<MonitorReport> {
    if models.is_empty() {
        return Err(Error::Domain("monitor needs at least one model".into()));
    }
    if k == 0 {
        return Err(Error::Domain("window width must be at least 1".into()));
    }
    let t = series.len();
    if t < 2 * k + 4 {
        return Err(Error::InsufficientData {
            needed: 2 * k + 4,
            got: t,
        });
    }
    let y = series.values();
    let origins: Vec<usize> = (t / 2 + 1..=t + 1 - k).collect();

    let per_origin = origins
        .par_iter()
        .map(|&origin| {
            let train = &y[..origin - 1];
            let actual = &y[origin - 1..origin - 1 + k];
            let cfg = config.with_seed(config.seed.wrapping_add(origin as u64));
            let fitted = fit_all(models, train, &cfg).map_err(|e| {
                log::error!("monitor origin {origin}: {e}");
                e
            })?;
            models
                .iter()
                .zip(&fitted)
                .map(|(spec, m)| {
                    let pred = m.forecast(k);
                    Ok(WindowMetricRecord::new(
                        origin,
                        *spec,
                        rmse(actual, &pred)?,
                        mae(actual, &pred)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let psi: Vec<usize> = per_origin
        .iter()
        .map(|recs| argmin_first(recs.iter().map(|r| r.m)))
        .collect();
    let n_origins = origins.len() as f64;
    let mut dominance = vec![0.0; models.len()];
    let mut recency = vec![0.0; models.len()];
    let last = *origins.last().unwrap();
    let mut total_weight = 0.0;
    for (&winner, &origin) in psi.iter().zip(&origins) {
        dominance[winner] += 1.0;
        let w = recency_decay.powi((last - origin) as i32);
        recency[winner] += w;
        total_weight += w;
    }
    dominance.iter_mut().for_each(|d| *d = 100.0 * *d / n_origins);
    recency.iter_mut().for_each(|d| *d = 100.0 * *d / total_weight);

    Ok(MonitorReport {
        models: models.to_vec(),
        window: k,
        origin_dates: origins.iter().map(|&o| series.date(o - 1)).collect(),
        origins,
        records: per_origin.into_iter().flatten().collect(),
        psi,
        dominance,
        recency_weighted: recency,
        recency_decay,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShelfLifeResult {
    pub slope: f64,
    pub intercept: f64,
    /// Time at which the fitted APE line reaches the threshold; infinite when
    /// the line never rises to it.
    pub crossing_t: f64,
    /// `crossing_t - m`.
    pub shelf_days: f64,
    pub unbounded: bool,
    pub threshold_pct: f64,
    pub train_len: usize,
    /// `(t, APE(t))`, `t` 1-based.
    pub ape_series: Vec<(f64, f64)>,
}

impl ShelfLifeResult {
    pub fn fitted_line(&self, t: f64) -> f64 {
        self.intercept + self.slope * t
    }
}

/// Regresses APE on `t` by least squares and solves for the threshold crossing.
pub fn shelf_life_from_ape(
    ape_series: Vec<(f64, f64)>,
    train_len: usize,
    threshold_pct: f64,
) -> Result<ShelfLifeResult> {
    if ape_series.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: ape_series.len(),
        });
    }
    let n = ape_series.len() as f64;
    let mean_t = ape_series.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_a = ape_series.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = ape_series.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = ape_series
        .iter()
        .map(|p| (p.0 - mean_t) * (p.1 - mean_a))
        .sum();
    if sxx == 0.0 {
        return Err(Error::Domain("APE regression has no spread in t".into()));
    }
    let slope = sxy / sxx;
    let intercept = mean_a - slope * mean_t;
    let unbounded = slope <= 0.0;
    let crossing_t = if unbounded {
        f64::INFINITY
    } else {
        (threshold_pct - intercept) / slope
    };
    Ok(ShelfLifeResult {
        slope,
        intercept,
        crossing_t,
        shelf_days: crossing_t - train_len as f64,
        unbounded,
        threshold_pct,
        train_len,
        ape_series,
    })
}

/// Trains `model` on the first `m` points, forecasts the rest, and finds when
/// the APE trend reaches `threshold_pct`.
pub fn shelf_life(
    series: &UnivariateSeries,
    m: usize,
    model: ModelSpec,
    threshold_pct: f64,
    config: &TdnnConfig,
) -> Result<ShelfLifeResult> {
    let y = series.values();
    if m == 0 || m >= y.len() {
        return Err(Error::SplitBounds {
            train: m,
            test: y.len().saturating_sub(m),
            len: y.len(),
        });
    }
    if let Some(i) = (m..y.len()).find(|&i| y[i] == 0.0) {
        return Err(Error::ZeroActual(series.date(i)));
    }
    let fitted = model.fit(&y[..m], config)?;
    let pred = fitted.forecast(y.len() - m);
    let ape_series = (m..y.len())
        .zip(&pred)
        .map(|(i, p)| ((i + 1) as f64, ape(y[i], *p)))
        .collect();
    shelf_life_from_ape(ape_series, m, threshold_pct)
}
