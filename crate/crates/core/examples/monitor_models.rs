//! Rolling-origin monitoring: which model wins each moving window.
//!
//! Uses a light network configuration so it runs in seconds; the CLI
//! defaults are heavier.
//!
//! ```bash
//! cargo run -p epicast --example monitor_models
//! ```

use epicast::evaluate::{monitor, DEFAULT_WINDOW};
use epicast::neural::TdnnConfig;
use epicast::series::fixtures;
use epicast::ModelSpec;

fn main() -> epicast::Result<()> {
    let india = fixtures::india()?;
    let recent = india.slice(india.len() - 90..india.len());
    let cfg = TdnnConfig {
        repeats: 4,
        epochs: 200,
        ..Default::default()
    };
    let models = [ModelSpec::Holt, ModelSpec::HoltWbann, "arima(1,1,1)".parse()?];
    let report = monitor(&recent, &models, DEFAULT_WINDOW, &cfg)?;

    println!("{} origins, k = {}", report.origins.len(), report.window);
    for (i, m) in report.models.iter().enumerate() {
        println!(
            "{:<14} dominance {:5.1}%  recency-weighted {:5.1}%",
            m.to_string(),
            report.dominance[i],
            report.recency_weighted[i]
        );
    }
    println!("mode winner: {}", report.mode_winner());
    println!("recent winner: {}", report.recency_winner());

    println!("\nlast five windows:");
    for o in report.origins.len() - 5..report.origins.len() {
        let ms: Vec<String> = (0..models.len())
            .map(|j| format!("{:9.1}", report.record(o, j).m))
            .collect();
        println!("{}  {}  -> {}", report.origin_dates[o], ms.join(" "), models[report.psi[o]]);
    }
    Ok(())
}
