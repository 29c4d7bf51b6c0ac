//! R0 from the early growth rate and from an SIR fit.
//!
//! ```bash
//! cargo run -p epicast --example r0_estimate
//! ```

use epicast::epi::{
    default_growth_window, fit_growth_rate, r0_from_growth, sir_fit, GenerationInterval,
};
use epicast::series::fixtures;

fn main() -> epicast::Result<()> {
    let india = fixtures::india()?;
    let window = default_growth_window(&india)?;
    let growth = fit_growth_rate(&india, window.clone())?;
    println!(
        "growth {} .. {}: r = {:.4}/day (se {:.4})",
        india.date(window.start),
        india.date(window.end - 1),
        growth.r,
        growth.stderr
    );
    // generation intervals in days: short, serial-interval-like, long
    for (mu, kappa) in [(0.1, 10.0), (4.0, 2.0), (6.5, 4.0)] {
        let est = r0_from_growth(&growth, GenerationInterval::new(mu, kappa)?)?;
        println!(
            "  mean {mu:>4}, shape {kappa:>4}: R0 = {:.3} [{:.3}, {:.3}]",
            est.r0, est.ci_lower, est.ci_upper
        );
    }

    let total: f64 = india.values().iter().sum();
    let sir = sir_fit(&india, 2.0 * total)?;
    println!(
        "SIR: beta = {:.4}, gamma = {:.4}, R0 = {:.3}, mse = {:.2e}",
        sir.beta, sir.gamma, sir.r0_sir, sir.trajectory_mse
    );
    Ok(())
}
