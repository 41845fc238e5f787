//! Convergence checks on a chain: Geweke scores, HPD against central
//! intervals, and a histogram written as CSV and SVG.
//!
//! ```bash
//! cargo run --release --example diagnostics -- [output-dir]
//! ```

use std::path::PathBuf;

use popsize::posterior::{geweke_z, histogram_svg, hpd_interval, quantile, Histogram};
use popsize::thbm::{run_gibbs, GibbsConfig, Prior};

fn main() -> popsize::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "target/diagnostics".into()));
    let (counts, _) = popsize::builtin_dataset("hav")?;
    let chain = run_gibbs(&counts, &Prior::Jeffreys, &GibbsConfig::new(100_000, 10_000, 10, 3))?;

    for name in ["N", "alpha1", "alpha4", "delta1", "P1"] {
        let draws = chain.series(name)?;
        let z = geweke_z(&draws, 0.1, 0.5)?;
        let (lo, hi) = hpd_interval(&draws, 0.95)?;
        let mut sorted = draws.clone();
        sorted.sort_by(f64::total_cmp);
        println!(
            "{name:<7} z {z:>6.2}  HPD [{lo:>9.3}, {hi:>9.3}]  central [{:>9.3}, {:>9.3}]",
            quantile(&sorted, 0.025),
            quantile(&sorted, 0.975)
        );
    }

    let h = Histogram::freedman_diaconis(&chain.population())?;
    std::fs::create_dir_all(&out)?;
    std::fs::write(out.join("hav_N.csv"), h.to_csv())?;
    std::fs::write(out.join("hav_N.svg"), histogram_svg(&h, "hav: posterior of N"))?;
    println!("{} bins written to {}", h.counts.len(), out.display());
    Ok(())
}
