//! Conditional multinomial bootstrap intervals for the classical
//! estimators, plus a custom estimator through `bootstrap_with`.
//!
//! ```bash
//! cargo run --release --example bootstrap -- [replicates]
//! ```

use popsize::classical::{bootstrap_ci, bootstrap_with, Method};

fn main() -> popsize::Result<()> {
    let b: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(2000);
    let (counts, _) = popsize::builtin_dataset("ld_all")?;

    for m in [Method::Independent, Method::Sc, Method::Llm] {
        let point = m.estimate(&counts)?.n_hat;
        let ci = bootstrap_ci(m, &counts, b, 0.95, 11)?;
        println!(
            "{:<12} {:>8.1}  95% [{:>7.1}, {:>7.1}]  MAE {:>6.1}  ({} failed)",
            m.to_string(),
            point,
            ci.ci_low,
            ci.ci_high,
            ci.mae,
            ci.failures
        );
    }

    // Lincoln-Petersen from the first two lists only
    let lp = |c: &popsize::TrsCounts| {
        let m = c.margins();
        Ok::<f64, popsize::Error>(m.n1 as f64 * m.n2 as f64 / m.x11_ as f64)
    };
    let ci = bootstrap_with(lp, &counts, b, 0.95, 11)?;
    println!("two-list     {:>8.1}  95% [{:>7.1}, {:>7.1}]", lp(&counts)?, ci.ci_low, ci.ci_high);
    Ok(())
}
