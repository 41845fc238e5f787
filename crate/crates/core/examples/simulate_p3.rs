//! A seeded replication study: scenario P3 with shape 1.6 on every list and
//! 500 individuals, comparing the mixture model with the classical
//! estimators.
//!
//! ```bash
//! cargo run --release --example simulate_p3 -- [replications]
//! ```

use popsize::simulation::{run_replications, scenario_by_name};

fn main() -> popsize::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let mut scenario = scenario_by_name("P3:delta5:N500")?;
    scenario.replications = reps;

    let t = std::time::Instant::now();
    let report = run_replications(&scenario, 2024)?;
    println!("{} x{} in {:.1?}", report.scenario, report.replications, t.elapsed());
    for s in &report.summaries {
        println!(
            "{:<12} RMAE {:>7}  CP {:>6}  ({} used, {} failed, {} infeasible)",
            s.estimator.to_string(),
            s.rmae.map_or("-".into(), |v| format!("{v:.4}")),
            s.coverage.map_or("-".into(), |v| format!("{v:.1}%")),
            s.used,
            s.failures,
            s.infeasible
        );
    }
    Ok(())
}
