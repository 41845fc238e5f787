//! Built-in datasets, their margins, and reading counts from text.
//!
//! ```bash
//! cargo run --example datasets
//! ```

use popsize::{builtin_datasets, parse_counts};

fn main() -> popsize::Result<()> {
    println!("{:<10} {:>5} {:>5} {:>5} {:>5} {:>11}", "name", "x0", "n1", "n2", "n3", "inhabitants");
    for (counts, meta) in builtin_datasets() {
        let m = counts.margins();
        println!(
            "{:<10} {:>5} {:>5} {:>5} {:>5} {:>11}",
            meta.name,
            counts.x0(),
            m.n1,
            m.n2,
            m.n3,
            meta.inhabitants.map(|h| h.to_string()).unwrap_or_else(|| "-".into())
        );
    }

    // any of the accepted layouts parses into the same table
    let text = "x111,x110,x101,x011,x100,x010,x001\n28,21,17,18,69,55,63\n";
    let hav = parse_counts(text)?;
    println!("\nparsed: {:?} (x0 = {}, x1+1 = {})", hav.cells(), hav.x0(), hav.dot("1+1")?);
    Ok(())
}
