//! Robustness when the data do not come from the fitted model: normal and
//! gamma list effects, and trap-happy autoregressive capture.
//!
//! ```bash
//! cargo run --release --example misspecification -- [replications]
//! ```

use popsize::simulation::{run_replications, scenario_by_name, Estimator};
use popsize::thbm::GibbsConfig;

fn main() -> popsize::Result<()> {
    let reps: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10);
    for name in ["P1:R4:N200", "P5:R6:N200", "AR:uniform:N200", "AR:beta42:N200"] {
        let mut s = scenario_by_name(name)?;
        s.replications = reps;
        s.estimators = vec![Estimator::Thbm, Estimator::Llm, Estimator::Sc];
        // shorter chains keep the example quick
        s.gibbs = GibbsConfig::new(20_000, 10_000, 10, 0);
        let r = run_replications(&s, 7)?;
        let cells: Vec<String> = r
            .summaries
            .iter()
            .map(|x| format!("{} {}", x.estimator, x.rmae.map_or("-".into(), |v| format!("{v:.3}"))))
            .collect();
        println!("{name:<16} {}", cells.join("  "));
    }
    Ok(())
}
