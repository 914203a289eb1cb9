//! Runs the tiled loop nest on random tensors and checks it against both the
//! closed-form traffic model and an untiled convolution.

use psumbw::tilesim::{direct_conv, tiled_conv, LayerTensors};
use psumbw::{layer_bandwidth, simulate_layer, verify_numeric, ControllerMode, ConvLayerShape, Partition};

fn main() -> psumbw::Result<()> {
    let layer = ConvLayerShape::new("demo", 10, 10, 3, 2, 1, 6, 4)?;
    let tensors = LayerTensors::random(&layer, 7, 8);
    let reference = direct_conv(&layer, &tensors)?;

    for (m, n) in [(1, 1), (2, 3), (4, 4), (6, 4)] {
        let p = Partition::new(m, n);
        for mode in [ControllerMode::Passive, ControllerMode::Active] {
            let (out, counts) = tiled_conv(&layer, p, mode, &tensors)?;
            let model = layer_bandwidth(&layer, p, mode)?;
            assert_eq!(counts, simulate_layer(&layer, p, mode)?);
            println!(
                "{p} {:<7}  simulated in/rd/wr {:>4}/{:>4}/{:>4}  model {:>4}/{:>4}/{:>4}  output {}",
                mode.to_string(),
                counts.input_reads,
                counts.psum_reads,
                counts.psum_writes,
                model.input_reads,
                model.psum_reads,
                model.psum_writes,
                if out == reference { "matches" } else { "DIFFERS" }
            );
        }
    }

    let grouped = ConvLayerShape::new("grouped", 8, 8, 3, 1, 1, 6, 6)?.with_groups(3)?;
    println!("\ngrouped layer, numeric check at (1,2): {}", verify_numeric(&grouped, Partition::new(1, 2), 11)?);
    Ok(())
}
