//! Two-phase residual remodelling: a base forecaster plus a WBANN trained on
//! the base residuals. Fitted and forecast values are the elementwise sums.

use crate::error::{Error, Result};
use crate::forecasters::{
    arima_fit, arima_fit_order, holt_fit, Aligned, ArimaModel, ArimaOrder, Forecaster, HoltFit,
};
use crate::neural::{wbann_fit, wbann_forecast, TdnnConfig, WbannModel};

pub const MIN_LEN: usize = 20;

/// Which base model a hybrid wraps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaseKind {
    Holt,
    /// Automatic order selection.
    Arima,
    ArimaOrder(ArimaOrder),
}

impl BaseKind {
    pub fn fit(self, values: &[f64]) -> Result<BaseModel> {
        Ok(match self {
            BaseKind::Holt => BaseModel::Holt(holt_fit(values)?),
            BaseKind::Arima => BaseModel::Arima(arima_fit(values)?),
            BaseKind::ArimaOrder(o) => BaseModel::Arima(arima_fit_order(values, o)?),
        })
    }
}

/// A fitted base model.
#[derive(Debug, Clone, PartialEq)]
pub enum BaseModel {
    Holt(HoltFit),
    Arima(ArimaModel),
}

impl Forecaster for BaseModel {
    fn fitted(&self) -> &Aligned {
        match self {
            BaseModel::Holt(m) => m.fitted(),
            BaseModel::Arima(m) => m.fitted(),
        }
    }

    fn residuals(&self) -> &Aligned {
        match self {
            BaseModel::Holt(m) => m.residuals(),
            BaseModel::Arima(m) => m.residuals(),
        }
    }

    fn forecast(&self, h: usize) -> Vec<f64> {
        match self {
            BaseModel::Holt(m) => m.forecast(h),
            BaseModel::Arima(m) => m.forecast(h),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridModel {
    pub base_kind: BaseKind,
    pub base: BaseModel,
    pub residual_model: WbannModel,
    /// WBANN in-sample fit, re-indexed onto the original series positions.
    pub residual_fitted: Aligned,
    pub fitted: Aligned,
    pub residuals: Aligned,
}

impl Forecaster for HybridModel {
    fn fitted(&self) -> &Aligned {
        &self.fitted
    }

    fn residuals(&self) -> &Aligned {
        &self.residuals
    }

    fn forecast(&self, h: usize) -> Vec<f64> {
        hybrid_forecast(self, h)
    }
}

pub fn hybrid_fit(values: &[f64], base_kind: BaseKind, config: &TdnnConfig) -> Result<HybridModel> {
    if values.len() < MIN_LEN {
        return Err(Error::InsufficientData {
            needed: MIN_LEN,
            got: values.len(),
        });
    }
    let base = base_kind.fit(values).map_err(|e| e.in_phase("base"))?;
    hybrid_from_base(values, base_kind, base, config)
}

/// Second phase only: remodels the residuals of an already fitted base.
pub fn hybrid_from_base(
    values: &[f64],
    base_kind: BaseKind,
    base: BaseModel,
    config: &TdnnConfig,
) -> Result<HybridModel> {
    let e = base.residuals().clone();
    let residual_model = wbann_fit(&e.values, config).map_err(|err| err.in_phase("residual"))?;
    let residual_fitted = Aligned::new(
        e.start + residual_model.fitted.start,
        residual_model.fitted.values.clone(),
    );
    let fitted = combine_fitted(base.fitted(), &residual_fitted);
    let residuals = fitted.residuals_from(values);
    Ok(HybridModel {
        base_kind,
        base,
        residual_model,
        residual_fitted,
        fitted,
        residuals,
    })
}

/// Elementwise sum over the positions where both inputs are defined.
pub fn combine_fitted(base: &Aligned, residual: &Aligned) -> Aligned {
    let start = base.start.max(residual.start);
    let end = base.end().min(residual.end()).max(start);
    Aligned::new(
        start,
        (start..end)
            .map(|t| base.get(t).unwrap() + residual.get(t).unwrap())
            .collect(),
    )
}

/// Base fitted plus WBANN fitted on the positions where both exist.
pub fn hybrid_fitted(model: &HybridModel) -> &Aligned {
    &model.fitted
}

pub fn hybrid_forecast(model: &HybridModel, h: usize) -> Vec<f64> {
    let base = model.base.forecast(h);
    let resid = wbann_forecast(&model.residual_model, h);
    base.iter().zip(&resid).map(|(b, r)| b + r).collect()
}
