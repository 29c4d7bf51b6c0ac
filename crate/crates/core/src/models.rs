//! Model registry: the tags `holt`, `holt-wbann`, `arima`, `arima-wbf` and
//! fixed-order `arima(p,d,q)`, fitted behind one [`Forecaster`] surface.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::forecasters::{Aligned, ArimaOrder, Forecaster};
use crate::hybrid::{hybrid_from_base, BaseKind, BaseModel, HybridModel};
use crate::neural::TdnnConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelSpec {
    Holt,
    HoltWbann,
    Arima,
    ArimaWbf,
    ArimaFixed(ArimaOrder),
}

impl ModelSpec {
    pub const REGISTERED: [ModelSpec; 4] = [
        ModelSpec::Arima,
        ModelSpec::ArimaWbf,
        ModelSpec::Holt,
        ModelSpec::HoltWbann,
    ];

    pub fn base(self) -> BaseKind {
        match self {
            ModelSpec::Holt | ModelSpec::HoltWbann => BaseKind::Holt,
            ModelSpec::Arima | ModelSpec::ArimaWbf => BaseKind::Arima,
            ModelSpec::ArimaFixed(o) => BaseKind::ArimaOrder(o),
        }
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, ModelSpec::HoltWbann | ModelSpec::ArimaWbf)
    }

    pub fn fit(self, values: &[f64], config: &TdnnConfig) -> Result<FittedModel> {
        let base = self.base().fit(values)?;
        self.fit_with_base(values, base, config)
    }

    /// Finishes the fit from an already fitted base of kind [`ModelSpec::base`].
    pub fn fit_with_base(
        self,
        values: &[f64],
        base: BaseModel,
        config: &TdnnConfig,
    ) -> Result<FittedModel> {
        if self.is_hybrid() {
            Ok(FittedModel::Hybrid(Box::new(hybrid_from_base(
                values,
                self.base(),
                base,
                config,
            )?)))
        } else {
            Ok(FittedModel::Base(base))
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSpec::Holt => f.write_str("holt"),
            ModelSpec::HoltWbann => f.write_str("holt-wbann"),
            ModelSpec::Arima => f.write_str("arima"),
            ModelSpec::ArimaWbf => f.write_str("arima-wbf"),
            ModelSpec::ArimaFixed(o) => write!(f, "arima{o}"),
        }
    }
}

impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let tag = s.trim().to_ascii_lowercase();
        match tag.as_str() {
            "holt" => return Ok(ModelSpec::Holt),
            "holt-wbann" => return Ok(ModelSpec::HoltWbann),
            "arima" => return Ok(ModelSpec::Arima),
            "arima-wbf" => return Ok(ModelSpec::ArimaWbf),
            _ => {}
        }
        let inner = tag
            .strip_prefix("arima(")
            .and_then(|r| r.strip_suffix(')'))
            .ok_or_else(|| Error::UnknownModel(s.to_string()))?;
        let parts = inner
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| Error::UnknownModel(s.to_string()))?;
        match parts.as_slice() {
            [p, d, q] => Ok(ModelSpec::ArimaFixed(ArimaOrder::new(*p, *d, *q)?)),
            _ => Err(Error::UnknownModel(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Base(BaseModel),
    Hybrid(Box<HybridModel>),
}

impl Forecaster for FittedModel {
    fn fitted(&self) -> &Aligned {
        match self {
            FittedModel::Base(m) => m.fitted(),
            FittedModel::Hybrid(m) => m.fitted(),
        }
    }

    fn residuals(&self) -> &Aligned {
        match self {
            FittedModel::Base(m) => m.residuals(),
            FittedModel::Hybrid(m) => m.residuals(),
        }
    }

    fn forecast(&self, h: usize) -> Vec<f64> {
        match self {
            FittedModel::Base(m) => m.forecast(h),
            FittedModel::Hybrid(m) => m.forecast(h),
        }
    }
}

/// Fits several models on the same data, fitting each distinct base once.
pub fn fit_all(specs: &[ModelSpec], values: &[f64], config: &TdnnConfig) -> Result<Vec<FittedModel>> {
    let mut bases: Vec<(BaseKind, BaseModel)> = Vec::new();
    let mut out = Vec::with_capacity(specs.len());
    for spec in specs {
        let kind = spec.base();
        let base = match bases.iter().find(|(k, _)| *k == kind) {
            Some((_, b)) => b.clone(),
            None => {
                let b = kind.fit(values)?;
                bases.push((kind, b.clone()));
                b
            }
        };
        out.push(spec.fit_with_base(values, base, config)?);
    }
    Ok(out)
}
