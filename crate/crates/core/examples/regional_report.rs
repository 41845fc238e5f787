//! Surveillance report over the four regional strata: per-stratum
//! population sizes, under-reporting and incidence per 100,000, then the
//! sum of strata next to the national fit.
//!
//! ```bash
//! cargo run --release --example regional_report
//! ```

use popsize::cli::{fit_dataset, surveillance_report};
use popsize::thbm::{GibbsConfig, Prior};
use rayon::prelude::*;

fn main() -> popsize::Result<()> {
    let cfg = GibbsConfig::new(200_000, 20_000, 10, 5);
    let fit = |name: &str| {
        let (counts, meta) = popsize::builtin_dataset(name)?;
        Ok::<_, popsize::Error>(fit_dataset(&counts, meta, &Prior::Jeffreys, &cfg, 0.95)?.0)
    };
    let strata = ["ld_north", "ld_south", "ld_east", "ld_west"]
        .par_iter()
        .map(|n| fit(n))
        .collect::<popsize::Result<Vec<_>>>()?;
    let national = fit("ld_all")?;
    let report = surveillance_report(&strata, Some(&national), true)?;

    println!("{:<10} {:>5} {:>7} {:>7} {:>15} {:>7} {:>7}", "stratum", "x0", "N", "MAE", "95% HPD", "UR %", "IR");
    for s in report.strata.iter().chain(report.pooled.iter()) {
        println!(
            "{:<10} {:>5} {:>7.0} {:>7.1} {:>7.0}-{:<7.0} {:>7.1} {:>7}",
            s.name,
            s.x0,
            s.median,
            s.mae,
            s.hpd_low,
            s.hpd_high,
            s.under_reporting,
            s.incidence.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into())
        );
    }
    if let Some(sum) = report.strata_sum {
        println!("sum of strata {sum:.0}");
    }
    Ok(())
}
