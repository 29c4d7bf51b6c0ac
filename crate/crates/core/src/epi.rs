//! Basic reproduction number: exponential growth with a gamma generation
//! interval, and a least-squares SIR fit as an independent estimate.

use std::ops::Range;

use crate::error::{Error, Result};
use crate::optim::NelderMead;
use crate::series::UnivariateSeries;

/// Days used by [`default_growth_window`].
pub const DEFAULT_GROWTH_DAYS: usize = 30;
const Z95: f64 = 1.96;

/// Gamma-distributed generation interval with mean `mu` (days) and shape `kappa`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationInterval {
    mu: f64,
    kappa: f64,
}

impl GenerationInterval {
    pub fn new(mu: f64, kappa: f64) -> Result<Self> {
        if !(mu > 0.0 && kappa > 0.0 && mu.is_finite() && kappa.is_finite()) {
            return Err(Error::Domain(format!(
                "generation interval needs mu > 0 and kappa > 0, got mu={mu}, kappa={kappa}"
            )));
        }
        Ok(Self { mu, kappa })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `(1 + r mu / kappa)^kappa`, `None` when the base is not positive.
    fn r0(&self, r: f64) -> Option<f64> {
        let base = 1.0 + r * self.mu / self.kappa;
        (base > 0.0).then(|| base.powf(self.kappa))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthFit {
    /// Per-day exponential growth rate.
    pub r: f64,
    pub stderr: f64,
    pub intercept: f64,
    /// Mean squared residual of the log-linear regression.
    pub mse: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct R0Estimate {
    pub growth_rate: f64,
    pub r_stderr: f64,
    pub r0: f64,
    pub ci_lower: f64,
    pub ci_upper: f64,
    pub fit_mse: f64,
}

/// First [`DEFAULT_GROWTH_DAYS`] days from the first nonzero observation.
pub fn default_growth_window(series: &UnivariateSeries) -> Result<Range<usize>> {
    let start = series
        .values()
        .iter()
        .position(|&v| v > 0.0)
        .ok_or_else(|| Error::Domain("series has no positive incidence".into()))?;
    Ok(start..(start + DEFAULT_GROWTH_DAYS).min(series.len()))
}

/// OLS of `ln(y_t)` on `t` over `window`.
pub fn fit_growth_rate(series: &UnivariateSeries, window: Range<usize>) -> Result<GrowthFit> {
    if window.end > series.len() || window.len() < 5 {
        return Err(Error::InsufficientData {
            needed: 5,
            got: window.end.min(series.len()).saturating_sub(window.start),
        });
    }
    let y = series.values();
    let mut pts = Vec::with_capacity(window.len());
    for i in window {
        if y[i] <= 0.0 {
            return Err(Error::NonPositive {
                date: series.date(i),
                value: y[i],
            });
        }
        pts.push((i as f64, y[i].ln()));
    }
    let n = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_l = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_l)).sum();
    let r = sxy / sxx;
    let intercept = mean_l - r * mean_t;
    let sse: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - r * p.0).powi(2))
        .sum();
    Ok(GrowthFit {
        r,
        stderr: (sse / (n - 2.0) / sxx).sqrt(),
        intercept,
        mse: sse / n,
    })
}

/// `R0 = (1 + r mu / kappa)^kappa`, with a 95% interval from `r +- 1.96 se`.
pub fn r0_from_growth(fit: &GrowthFit, gi: GenerationInterval) -> Result<R0Estimate> {
    let r0 = gi.r0(fit.r).ok_or_else(|| {
        Error::Domain(format!(
            "growth rate {} decays too fast for a generation interval with mean {} and shape {}",
            fit.r, gi.mu, gi.kappa
        ))
    })?;
    let lower = gi.r0(fit.r - Z95 * fit.stderr).unwrap_or(0.0);
    let upper = gi.r0(fit.r + Z95 * fit.stderr).unwrap_or(f64::INFINITY);
    Ok(R0Estimate {
        growth_rate: fit.r,
        r_stderr: fit.stderr,
        r0,
        ci_lower: lower,
        ci_upper: upper,
        fit_mse: fit.mse,
    })
}

/// Daily samples of an SIR trajectory, as population fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct SirTrajectory {
    pub s: Vec<f64>,
    pub i: Vec<f64>,
    pub r: Vec<f64>,
}

/// RK4 integration of `S' = -bSI, I' = bSI - gI, R' = gI` from
/// `(s0, i0, 0)`, sampled at days `0..=days`. The step is shrunk so that a
/// whole number of steps fits in one day.
pub fn sir_simulate(
    beta: f64,
    gamma: f64,
    s0: f64,
    i0: f64,
    days: usize,
    step: f64,
) -> Result<SirTrajectory> {
    if !(beta >= 0.0 && gamma > 0.0 && s0 >= 0.0 && i0 >= 0.0) {
        return Err(Error::Domain(format!(
            "SIR parameters must be nonnegative (gamma > 0): beta={beta}, gamma={gamma}, s0={s0}, i0={i0}"
        )));
    }
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::Domain(format!("step must lie in (0, 0.5], got {step}")));
    }
    let per_day = (1.0 / step).ceil() as usize;
    let h = 1.0 / per_day as f64;
    let deriv = |s: f64, i: f64| {
        let inf = beta * s * i;
        let rec = gamma * i;
        (-inf, inf - rec, rec)
    };
    let (mut s, mut i, mut r) = (s0, i0, 0.0);
    let mut out = SirTrajectory {
        s: Vec::with_capacity(days + 1),
        i: Vec::with_capacity(days + 1),
        r: Vec::with_capacity(days + 1),
    };
    out.s.push(s);
    out.i.push(i);
    out.r.push(r);
    for _ in 0..days {
        for _ in 0..per_day {
            let k1 = deriv(s, i);
            let k2 = deriv(s + 0.5 * h * k1.0, i + 0.5 * h * k1.1);
            let k3 = deriv(s + 0.5 * h * k2.0, i + 0.5 * h * k2.1);
            let k4 = deriv(s + h * k3.0, i + h * k3.1);
            s += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
            i += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
            r += h / 6.0 * (k1.2 + 2.0 * k2.2 + 2.0 * k3.2 + k4.2);
        }
        out.s.push(s);
        out.i.push(i);
        out.r.push(r);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirFit {
    pub beta: f64,
    pub gamma: f64,
    pub s0: f64,
    pub i0: f64,
    /// Mean squared error of the cumulative incidence fraction.
    pub trajectory_mse: f64,
    pub r0_sir: f64,
}

const SIR_STEP: f64 = 0.25;

/// Fits `(beta, gamma, i0)` so that `1 - S(t)` tracks the observed cumulative
/// incidence fraction `cumsum(y) / population`.
pub fn sir_fit(series: &UnivariateSeries, population: f64) -> Result<SirFit> {
    let mut cum = Vec::with_capacity(series.len());
    let mut total = 0.0;
    for &v in series.values() {
        total += v;
        cum.push(total / population);
    }
    let last = *cum.last().ok_or(Error::InsufficientData { needed: 2, got: 0 })?;
    if series.len() < 5 {
        return Err(Error::InsufficientData {
            needed: 5,
            got: series.len(),
        });
    }
    if last <= 0.0 {
        return Err(Error::Domain("no epidemic signal: cumulative incidence is zero".into()));
    }
    if !(population.is_finite() && population > total) {
        return Err(Error::Domain(format!(
            "population {population} must exceed the cumulative case count {}",
            total
        )));
    }
    let days = cum.len() - 1;
    let scale = last;
    // log-space parameters: ln beta, ln gamma, ln i0
    let objective = |x: &[f64]| -> f64 {
        let (beta, gamma, i0) = (x[0].exp(), x[1].exp(), x[2].exp());
        match sir_simulate(beta, gamma, 1.0 - i0, i0, days, SIR_STEP) {
            Ok(tr) => tr
                .s
                .iter()
                .zip(&cum)
                .map(|(s, c)| ((1.0 - s - c) / scale).powi(2))
                .sum(),
            Err(_) => f64::INFINITY,
        }
    };
    let nm = NelderMead {
        max_iter: 4000,
        ftol: 1e-12,
        xtol: 1e-7,
        step: 0.3,
        bounds: Some((
            vec![(1e-3f64).ln(), (1e-3f64).ln(), (1e-12f64).ln()],
            vec![(5.0f64).ln(), (2.0f64).ln(), (0.5f64).ln()],
        )),
    };
    let first = cum.iter().copied().find(|&c| c > 0.0).unwrap();
    let mut best: Option<crate::optim::Minimum> = None;
    for gamma in [0.05f64, 0.1, 0.2, 0.4] {
        for ratio in [1.1, 1.5, 2.5] {
            for i0 in [first, first * 0.01] {
                let x0 = [(gamma * ratio).ln(), gamma.ln(), i0.ln()];
                let m = nm.minimize(objective, &x0);
                if best.as_ref().is_none_or(|b| m.fx < b.fx) {
                    best = Some(m);
                }
            }
        }
    }
    let best = best.expect("at least one start");
    let (beta, gamma, i0) = (best.x[0].exp(), best.x[1].exp(), best.x[2].exp());
    if !best.converged || !best.fx.is_finite() {
        return Err(Error::SirFit {
            message: format!("optimiser stopped after {} iterations", best.iterations),
            beta,
            gamma,
            i0,
        });
    }
    Ok(SirFit {
        beta,
        gamma,
        s0: 1.0 - i0,
        i0,
        trajectory_mse: best.fx * scale * scale / cum.len() as f64,
        r0_sir: beta / gamma,
    })
}
