//! Next-day state forecasts made consistent with the national forecast.
//!
//! ```bash
//! cargo run -p epicast --example adjust_panel
//! ```

use epicast::adjust::{adjust_with_weights, weights_from_residuals, AdjustmentInput, WeightMode};
use epicast::forecasters::Forecaster;
use epicast::neural::TdnnConfig;
use epicast::series::fixtures;
use epicast::ModelSpec;

fn main() -> epicast::Result<()> {
    let panel = fixtures::india_panel()?;
    let cfg = TdnnConfig::default();
    let model = ModelSpec::Holt;
    let last = panel.national().len() - 1;

    let nat = model.fit(panel.national().values(), &cfg)?;
    let states = panel
        .states()
        .iter()
        .map(|s| model.fit(s.values(), &cfg))
        .collect::<epicast::Result<Vec<_>>>()?;

    let input = AdjustmentInput {
        state_forecasts: states.iter().map(|m| m.forecast(1)[0]).collect(),
        national_forecast: nat.forecast(1)[0],
        last_observed_states: panel.states().iter().map(|s| s.values()[last]).collect(),
        last_fitted_states: states.iter().map(|m| m.fitted().get(last).unwrap()).collect(),
        last_observed_national: panel.national().values()[last],
        last_fitted_national: nat.fitted().get(last).unwrap(),
    };

    for mode in [WeightMode::Last, WeightMode::Window(7), WeightMode::Ewma(0.8)] {
        let histories: Vec<Vec<f64>> = states.iter().map(|m| m.residuals().values.clone()).collect();
        let res = adjust_with_weights(&input, weights_from_residuals(&histories, mode))?;
        println!("\nweights: {mode}  branch: {}  d = {:.1}", res.branch, res.discrepancy);
        println!("{:<16} {:>10} {:>8} {:>10}", "location", "raw", "w", "adjusted");
        for (i, s) in panel.states().iter().enumerate() {
            println!(
                "{:<16} {:>10.1} {:>8.4} {:>10.1}",
                s.name(),
                input.state_forecasts[i],
                res.weights[i],
                res.corrected_state_forecasts[i]
            );
        }
        let sum: f64 = res.corrected_state_forecasts.iter().sum();
        println!(
            "{:<16} {:>10.1} {:>8} {:>10.1}  (states sum {:.1})",
            panel.national().name(),
            input.national_forecast,
            "",
            res.corrected_national_forecast,
            sum
        );
    }
    Ok(())
}
