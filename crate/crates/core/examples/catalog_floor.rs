//! Minimum bandwidth of every built-in catalog, with per-layer detail for one.
//!
//! `cargo run --example catalog_floor -- resnet18`

use psumbw::catalog::{builtin_catalog, builtin_names};
use psumbw::{layer_min_bandwidth, min_bandwidth};

fn main() -> psumbw::Result<()> {
    println!("{:<14} {:>7} {:>14}", "network", "layers", "floor (M act)");
    for name in builtin_names() {
        let net = builtin_catalog(name)?;
        println!("{:<14} {:>7} {:>14.3}", name, net.layers().len(), min_bandwidth(&net) as f64 / 1e6);
    }

    let focus = std::env::args().nth(1).unwrap_or_else(|| "alexnet224".into());
    let net = builtin_catalog(&focus)?;
    println!("\n{focus}:");
    for layer in net.layers() {
        let (wo, ho) = layer.output_dims()?;
        println!(
            "  {:<18} {:>3}x{:<3} -> {:>3}x{:<3} {:>4} -> {:<4} floor {}",
            layer.name,
            layer.wi,
            layer.hi,
            wo,
            ho,
            layer.cin,
            layer.cout,
            layer_min_bandwidth(layer)
        );
    }
    Ok(())
}
