//! Holt vs the Holt + WBANN hybrid on the India fixture.
//!
//! ```bash
//! cargo run -p epicast --example hybrid_forecast
//! ```

use epicast::evaluate::rmse;
use epicast::forecasters::Forecaster;
use epicast::neural::TdnnConfig;
use epicast::series::fixtures;
use epicast::ModelSpec;

fn main() -> epicast::Result<()> {
    let india = fixtures::india()?;
    let y = india.values();
    let cfg = TdnnConfig::default();

    let holt = ModelSpec::Holt.fit(y, &cfg)?;
    let hybrid = ModelSpec::HoltWbann.fit(y, &cfg)?;

    // compare on the positions where both have a one-step fit
    let start = hybrid.fitted().start;
    let common = start..y.len();
    let holt_fit: Vec<f64> = common.clone().map(|t| holt.fitted().get(t).unwrap()).collect();
    let hybrid_fit: Vec<f64> = common.clone().map(|t| hybrid.fitted().get(t).unwrap()).collect();
    println!("{} days, scored from {}", y.len(), india.date(start));
    println!("in-sample RMSE {:<11} {:10.2}", "holt", rmse(&y[common.clone()], &holt_fit)?);
    println!("in-sample RMSE {:<11} {:10.2}", "holt-wbann", rmse(&y[common], &hybrid_fit)?);

    println!("\n{:<12} {:>12} {:>12}", "date", "holt", "holt-wbann");
    let h = 7;
    for (i, (a, b)) in holt.forecast(h).iter().zip(hybrid.forecast(h)).enumerate() {
        println!("{:<12} {:>12.1} {:>12.1}", india.date(y.len() + i), a, b.max(0.0));
    }
    Ok(())
}
