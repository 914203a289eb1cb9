//! Passive vs active controller totals over a MAC sweep, and how much the
//! active controller saves once the optimizer knows about it.

use psumbw::catalog::{builtin_catalog, STANDARD_NETWORKS};
use psumbw::report::{cmd_sweep, render_savings_markdown, EvalOptions, DEFAULT_MACS};
use psumbw::{network_bandwidth, AcceleratorConfig, ControllerMode, Strategy};

fn main() -> psumbw::Result<()> {
    let nets = STANDARD_NETWORKS
        .iter()
        .map(|n| builtin_catalog(n))
        .collect::<psumbw::Result<Vec<_>>>()?;
    let report = cmd_sweep(&nets, &DEFAULT_MACS, Strategy::Optimal, EvalOptions::default())?;
    print!("{}", render_savings_markdown(&report.savings));

    // same partitions vs partitions re-chosen for the active objective
    let net = builtin_catalog("resnet18")?;
    println!("\nresnet18 active totals (M act): fixed partitions vs re-optimized");
    for macs in DEFAULT_MACS {
        let cfg = AcceleratorConfig::new(macs).with_mode(ControllerMode::Active);
        let fixed = network_bandwidth(&net, &cfg)?.total;
        let tuned = network_bandwidth(&net, &cfg.with_reoptimize_active(true))?.total;
        println!("  {macs:>6}  {:>8.2}  {:>8.2}", fixed as f64 / 1e6, tuned as f64 / 1e6);
    }
    Ok(())
}
