//! How long does a model trained once stay under 5% APE?
//!
//! ```bash
//! cargo run -p epicast --example shelf_life
//! ```

use epicast::evaluate::shelf_life;
use epicast::neural::TdnnConfig;
use epicast::series::fixtures;
use epicast::ModelSpec;

fn main() -> epicast::Result<()> {
    let india = fixtures::india()?;
    // a rising stretch: train on the first 122 days, score the next 60
    let window = india.slice(0..182);
    let cfg = TdnnConfig::default();

    for model in [ModelSpec::Holt, ModelSpec::HoltWbann] {
        let res = shelf_life(&window, 122, model, 5.0, &cfg)?;
        print!("{:<11} APE ~ {:.3} + {:.4} t", model.to_string(), res.intercept, res.slope);
        if res.unbounded {
            println!("  -> never reaches {}%", res.threshold_pct);
        } else {
            println!(
                "  -> crosses {}% at t = {:.1}, shelf life {:.1} days",
                res.threshold_pct, res.crossing_t, res.shelf_days
            );
        }
    }
    Ok(())
}
