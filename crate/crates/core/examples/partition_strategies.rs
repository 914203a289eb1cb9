//! The partitioning strategies side by side, first on a single layer and then
//! on a whole network across MAC budgets.

use psumbw::catalog::builtin_catalog;
use psumbw::{
    continuous_objective, layer_bandwidth, network_bandwidth, optimal_real_m, partition, AcceleratorConfig,
    ControllerMode, ConvLayerShape, Strategy,
};

fn main() -> psumbw::Result<()> {
    let layer = ConvLayerShape::new("conv", 28, 28, 3, 1, 1, 96, 128)?;
    let macs = 2304;
    println!("{} with {macs} MACs", layer.to_record());
    println!(
        "  continuous optimum m* = {:.2}, objective there {:.0}",
        optimal_real_m(&layer, macs),
        continuous_objective(&layer, macs as f64, optimal_real_m(&layer, macs))?
    );
    for s in [Strategy::MaxInput, Strategy::MaxOutput, Strategy::EqualMacs, Strategy::Optimal, Strategy::BruteForce] {
        let p = partition(&layer, &AcceleratorConfig::new(macs).with_strategy(s))?;
        let bw = layer_bandwidth(&layer, p, ControllerMode::Passive)?;
        println!(
            "  {:<12} {:>8}  inputs {:>8}  psum reads {:>8}  psum writes {:>8}  total {:>8}",
            s.name(),
            p.to_string(),
            bw.input_reads,
            bw.psum_reads,
            bw.psum_writes,
            bw.total()
        );
    }

    let net = builtin_catalog("googlenet")?;
    println!("\ngooglenet, million activations:");
    print!("{:>8}", "MACs");
    for s in Strategy::COMPARED {
        print!("{:>12}", s.name());
    }
    println!();
    for macs in [512, 2048, 16384] {
        print!("{macs:>8}");
        for s in Strategy::COMPARED {
            let total = network_bandwidth(&net, &AcceleratorConfig::new(macs).with_strategy(s))?.total;
            print!("{:>12.2}", total as f64 / 1e6);
        }
        println!();
    }
    Ok(())
}
