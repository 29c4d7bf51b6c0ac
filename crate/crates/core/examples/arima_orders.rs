//! Automatic ARIMA order selection on each fixture series.
//!
//! ```bash
//! cargo run -p epicast --example arima_orders
//! ```

use epicast::forecasters::{arima_fit, arima_forecast, holt_fit};
use epicast::series::fixtures;

fn main() -> epicast::Result<()> {
    println!("{:<16} {:>9} {:>10} {:>8} {:>8} {:>12}", "series", "order", "aic", "alpha", "beta", "arima h=1");
    for s in fixtures::all_series()? {
        let m = arima_fit(s.values())?;
        let holt = holt_fit(s.values())?;
        println!(
            "{:<16} {:>9} {:>10.1} {:>8.2} {:>8.2} {:>12.1}",
            s.name(),
            m.order.to_string(),
            m.aic,
            holt.params.alpha(),
            holt.params.beta(),
            arima_forecast(&m, 1)[0]
        );
    }
    Ok(())
}
