//! Haar MODWT multiresolution analysis of a daily series.
//!
//! ```bash
//! cargo run -p epicast --example wavelet_mra
//! ```

use epicast::series::fixtures;
use epicast::wavelet::{choose_levels, imodwt_haar, modwt_haar};

fn main() -> epicast::Result<()> {
    let india = fixtures::india()?;
    let x = india.values();
    let levels = choose_levels(x.len())?;
    let mra = modwt_haar(x, levels)?;

    println!("n = {}, levels = {levels}", x.len());
    let total: f64 = x.iter().map(|v| v * v).sum();
    for (j, w) in mra.coefficients.wavelet.iter().enumerate() {
        let e: f64 = w.iter().map(|v| v * v).sum();
        println!("W{}  energy share {:6.3}%", j + 1, 100.0 * e / total);
    }
    let e: f64 = mra.coefficients.scaling.iter().map(|v| v * v).sum();
    println!("V{levels}  energy share {:6.3}%", 100.0 * e / total);

    let back = imodwt_haar(&mra)?;
    let err = x
        .iter()
        .zip(&back)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!("max reconstruction error {err:.3e}");

    let last = x.len() - 1;
    print!("{} = ", x[last]);
    let parts: Vec<String> = mra.components().map(|c| format!("{:.1}", c[last])).collect();
    println!("{}", parts.join(" + "));
    Ok(())
}
