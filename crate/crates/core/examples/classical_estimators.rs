//! Point estimates from every classical estimator on both built-in
//! national datasets.
//!
//! ```bash
//! cargo run --release --example classical_estimators
//! ```

use popsize::classical::Method;

fn main() -> popsize::Result<()> {
    for name in ["ld_all", "hav"] {
        let (counts, _) = popsize::builtin_dataset(name)?;
        println!("{name} (x0 = {})", counts.x0());
        for m in Method::ALL {
            match m.estimate(&counts) {
                Ok(r) => {
                    let flag = if r.feasible { "" } else { "  (below x0)" };
                    println!("  {:<12} {:>10.2}{flag}", m.to_string(), r.n_hat);
                }
                Err(e) => println!("  {:<12} failed: {e}", m.to_string()),
            }
        }
    }
    // the sample-coverage estimator also reports its coverage estimate
    let (ld, _) = popsize::builtin_dataset("ld_all")?;
    let sc = Method::Sc.estimate(&ld)?;
    println!("sample coverage on ld_all: {:.4}", sc.extras["coverage"]);
    Ok(())
}
