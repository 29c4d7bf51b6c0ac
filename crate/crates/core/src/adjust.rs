//! Constant-sum adjustment of state forecasts against a national forecast.
//!
//! With `d = Y_{t+1} - sum_i y_{t+1}^(i)` the gap between the national
//! forecast and the sum of state forecasts:
//!
//! * if the national model's last error `|Y_t - Yhat_t|` is no larger than the
//!   states' aggregate error `|sum_i (y_t^(i) - yhat_t^(i))|`, the gap is
//!   distributed to the states with weights `w_i` proportional to their
//!   squared last residuals;
//! * otherwise the national forecast is replaced by the sum of the states.
//!
//! Either way the corrected national equals the sum of corrected states.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustmentInput {
    pub state_forecasts: Vec<f64>,
    pub national_forecast: f64,
    pub last_observed_states: Vec<f64>,
    pub last_fitted_states: Vec<f64>,
    pub last_observed_national: f64,
    pub last_fitted_national: f64,
}

impl AdjustmentInput {
    pub fn n(&self) -> usize {
        self.state_forecasts.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::Domain("adjustment needs at least one state".into()));
        }
        for len in [
            self.last_observed_states.len(),
            self.last_fitted_states.len(),
        ] {
            if len != n {
                return Err(Error::LengthMismatch { left: n, right: len });
            }
        }
        let all_finite = self
            .state_forecasts
            .iter()
            .chain(&self.last_observed_states)
            .chain(&self.last_fitted_states)
            .chain([
                &self.national_forecast,
                &self.last_observed_national,
                &self.last_fitted_national,
            ])
            .all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Domain("adjustment inputs must be finite".into()));
        }
        Ok(())
    }

    /// `|Y_t - Yhat_t|`.
    pub fn national_error(&self) -> f64 {
        (self.last_observed_national - self.last_fitted_national).abs()
    }

    /// `|sum_i (y_t^(i) - yhat_t^(i))|`.
    pub fn states_error(&self) -> f64 {
        self.last_observed_states
            .iter()
            .zip(&self.last_fitted_states)
            .map(|(y, f)| y - f)
            .sum::<f64>()
            .abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    DistributeToStates,
    NationalFollowsStates,
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::DistributeToStates => "distribute-to-states",
            Branch::NationalFollowsStates => "national-follows-states",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdjustmentResult {
    pub corrected_state_forecasts: Vec<f64>,
    pub corrected_national_forecast: f64,
    pub weights: Vec<f64>,
    pub discrepancy: f64,
    pub branch: Branch,
}

/// How each state's share of the correction is measured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightMode {
    /// Squared residual at the last time point.
    Last,
    /// Mean squared residual over the last `k` points.
    Window(usize),
    /// Exponentially weighted mean of squared residuals, decay `lambda` per day back.
    Ewma(f64),
}

impl Default for WeightMode {
    fn default() -> Self {
        WeightMode::Last
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightMode::Last => f.write_str("last"),
            WeightMode::Window(k) => write!(f, "window({k})"),
            WeightMode::Ewma(l) => write!(f, "ewma({l})"),
        }
    }
}

impl FromStr for WeightMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let arg = |prefix: &str| {
            s.strip_prefix(prefix)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
        };
        let bad = || Error::Domain(format!("invalid weight mode {s:?}; use last, window(k) or ewma(lambda)"));
        if s == "last" {
            return Ok(WeightMode::Last);
        }
        if let Some(k) = arg("window") {
            let k: usize = k.trim().parse().map_err(|_| bad())?;
            if k == 0 {
                return Err(bad());
            }
            return Ok(WeightMode::Window(k));
        }
        if let Some(l) = arg("ewma") {
            let l: f64 = l.trim().parse().map_err(|_| bad())?;
            if !(l > 0.0 && l <= 1.0) {
                return Err(bad());
            }
            return Ok(WeightMode::Ewma(l));
        }
        Err(bad())
    }
}

fn normalise(metric: Vec<f64>) -> Vec<f64> {
    let n = metric.len();
    let total: f64 = metric.iter().sum();
    if total > 0.0 && total.is_finite() {
        metric.into_iter().map(|m| m / total).collect()
    } else {
        vec![1.0 / n as f64; n]
    }
}

/// `w_i = (y_t^(i) - yhat_t^(i))^2 / sum_j (y_t^(j) - yhat_t^(j))^2`, uniform
/// when every residual is zero.
pub fn compute_weights(last_observed_states: &[f64], last_fitted_states: &[f64]) -> Vec<f64> {
    normalise(
        last_observed_states
            .iter()
            .zip(last_fitted_states)
            .map(|(y, f)| (y - f).powi(2))
            .collect(),
    )
}

/// Weights from each state's residual history (oldest first).
pub fn weights_from_residuals(histories: &[Vec<f64>], mode: WeightMode) -> Vec<f64> {
    let metric = histories
        .iter()
        .map(|e| match mode {
            WeightMode::Last => e.last().map_or(0.0, |v| v * v),
            WeightMode::Window(k) => {
                let tail = &e[e.len().saturating_sub(k)..];
                if tail.is_empty() {
                    0.0
                } else {
                    tail.iter().map(|v| v * v).sum::<f64>() / tail.len() as f64
                }
            }
            WeightMode::Ewma(lambda) => {
                let (mut num, mut den, mut w) = (0.0, 0.0, 1.0);
                for v in e.iter().rev() {
                    num += w * v * v;
                    den += w;
                    w *= lambda;
                }
                if den > 0.0 {
                    num / den
                } else {
                    0.0
                }
            }
        })
        .collect();
    normalise(metric)
}

/// `d = Yhat_{t+1} - sum_i yhat_{t+1}^(i)`.
pub fn compute_discrepancy(input: &AdjustmentInput) -> f64 {
    input.national_forecast - input.state_forecasts.iter().sum::<f64>()
}

/// Adjustment with last-point squared-residual weights.
pub fn adjust_forecasts(input: &AdjustmentInput) -> Result<AdjustmentResult> {
    input.validate()?;
    let weights = compute_weights(&input.last_observed_states, &input.last_fitted_states);
    adjust_with_weights(input, weights)
}

/// Adjustment with caller-supplied weights (must sum to 1).
pub fn adjust_with_weights(input: &AdjustmentInput, weights: Vec<f64>) -> Result<AdjustmentResult> {
    input.validate()?;
    if weights.len() != input.n() {
        return Err(Error::LengthMismatch {
            left: input.n(),
            right: weights.len(),
        });
    }
    let d = compute_discrepancy(input);
    let (branch, corrected_state_forecasts, corrected_national_forecast) =
        if input.national_error() <= input.states_error() {
            let states = input
                .state_forecasts
                .iter()
                .zip(&weights)
                .map(|(f, w)| f + w * d)
                .collect();
            (Branch::DistributeToStates, states, input.national_forecast)
        } else {
            let states = input.state_forecasts.clone();
            let total = states.iter().sum();
            (Branch::NationalFollowsStates, states, total)
        };
    Ok(AdjustmentResult {
        corrected_state_forecasts,
        corrected_national_forecast,
        weights,
        discrepancy: d,
        branch,
    })
}
