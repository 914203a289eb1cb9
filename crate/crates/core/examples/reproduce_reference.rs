//! Compares the built-in catalogs against the published reference totals
//! under every catalog/group accounting and prints the discrepancy table.

use psumbw::reference::{accountings, deviations, discrepancy_report};
use psumbw::catalog::STANDARD_NETWORKS;

fn main() -> psumbw::Result<()> {
    print!("{}", discrepancy_report(0.25)?);

    println!("\nbest accounting per network:");
    for (idx, name) in STANDARD_NETWORKS.iter().enumerate() {
        let mut best = None;
        for acc in accountings(idx) {
            let worst = deviations(idx, acc)?
                .iter()
                .map(|c| c.relative().abs())
                .fold(0.0, f64::max);
            if best.is_none_or(|(_, w)| worst < w) {
                best = Some((acc, worst));
            }
        }
        let (acc, worst) = best.expect("every network has an accounting");
        println!("  {name:<12} {:<22} worst cell {:>6.1}%", acc.to_string(), worst * 100.0);
    }
    Ok(())
}
