//! Fit the dependence-mixture model to the national surveillance counts and
//! print the posterior of the population size and the mixture weights.
//!
//! ```bash
//! cargo run --release --example fit_ld -- [iterations] [seed]
//! ```

use popsize::posterior::{summarize_chain, ur_rate};
use popsize::thbm::{run_gibbs, GibbsConfig, Prior};

fn main() -> popsize::Result<()> {
    let mut args = std::env::args().skip(1);
    let iters: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(200_000);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);

    let (counts, meta) = popsize::builtin_dataset("ld_all")?;
    let cfg = GibbsConfig::new(iters, iters / 10, 10, seed);
    let chain = run_gibbs(&counts, &Prior::Jeffreys, &cfg)?;
    let s = summarize_chain(&chain, 0.95)?;

    let n = &s.population;
    println!("{}: {} observed, {} retained draws", meta.name, counts.x0(), chain.len());
    println!("N   median {:.0}  MAE {:.1}  95% HPD [{:.0}, {:.0}]", n.median, n.mae, n.hpd_low, n.hpd_high);
    println!("under-reporting {:.1}%", ur_rate(n.median, counts.x0())?);
    for name in ["alpha1", "alpha2", "alpha3", "alpha4", "P1", "P2", "P3"] {
        let p = &s.parameters[name];
        println!("{name:<7} median {:.3}  HPD [{:.3}, {:.3}]", p.median, p.hpd_low, p.hpd_high);
    }
    for w in &s.warnings {
        println!("warning: {w}");
    }
    Ok(())
}
