//! Base forecasters: Holt's linear-trend smoothing and a CSS ARIMA baseline.

pub mod arima;
pub mod holt;

pub use arima::{arima_fit, arima_fit_order, arima_forecast, ArimaModel, ArimaOrder};
pub use holt::{holt_filter, holt_fit, holt_forecast, HoltFit, HoltParams, HoltState};

/// In-sample values defined on the contiguous positions `start..start + values.len()`
/// of the series they were computed from. Positions before `start` have no value.
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    pub start: usize,
    pub values: Vec<f64>,
}

impl Aligned {
    pub fn new(start: usize, values: Vec<f64>) -> Self {
        Self { start, values }
    }

    /// One past the last covered position.
    pub fn end(&self) -> usize {
        self.start + self.values.len()
    }

    pub fn get(&self, t: usize) -> Option<f64> {
        t.checked_sub(self.start)
            .and_then(|i| self.values.get(i).copied())
    }

    /// `observed[t] - self[t]` over the covered positions.
    pub fn residuals_from(&self, observed: &[f64]) -> Aligned {
        let values = self
            .values
            .iter()
            .zip(&observed[self.start..self.end()])
            .map(|(f, y)| y - f)
            .collect();
        Aligned::new(self.start, values)
    }

    /// Restricts to positions `>= start`.
    pub fn from_position(&self, start: usize) -> Aligned {
        if start <= self.start {
            return self.clone();
        }
        let skip = (start - self.start).min(self.values.len());
        Aligned::new(start, self.values[skip..].to_vec())
    }
}

/// Uniform surface over fitted base models, so hybrids and the rolling
/// monitor can treat every model alike.
pub trait Forecaster {
    /// One-step in-sample predictions.
    fn fitted(&self) -> &Aligned;
    /// `observed - fitted` where fitted is defined.
    fn residuals(&self) -> &Aligned;
    fn forecast(&self, h: usize) -> Vec<f64>;
}
