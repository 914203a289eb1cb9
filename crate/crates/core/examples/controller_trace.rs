//! Drives the memory controller with engine-generated traces, writes them in
//! the text trace format and replays the file.
//!
//! `cargo run --example controller_trace -- trace.txt` keeps the active trace.

use psumbw::memctrl::{format_trace, parse_trace, psum_memory_size, random_engine_trace};
use psumbw::{run_trace, Activation, ControllerMode, ControllerState, ConvLayerShape, Partition};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let layer = ConvLayerShape::new("tiny", 3, 3, 1, 1, 0, 4, 2)?;
    let p = Partition::new(2, 2);
    let size = psum_memory_size(&layer);

    let mut finals = Vec::new();
    for mode in [ControllerMode::Passive, ControllerMode::Active] {
        let trace = random_engine_trace(&layer, p, mode, Activation::Relu, 3, 50)?;
        let mut ctrl = ControllerState::new(size).with_activation(Activation::Relu);
        run_trace(&mut ctrl, &trace)?;
        let c = ctrl.counters();
        println!(
            "{:<7} {:>3} transactions  bus reads {:>2}  bus writes {:>2}  local updates {:>2}",
            mode.to_string(),
            trace.len(),
            c.interconnect_reads,
            c.interconnect_writes,
            c.internal_reads
        );

        if mode == ControllerMode::Active {
            let text = format_trace(&trace, Some(&c));
            print!("\nfirst lines of the active trace:\n{}", text.lines().take(6).map(|l| format!("  {l}\n")).collect::<String>());
            println!("  ...\n  {}", text.lines().last().unwrap_or_default());

            if let Some(path) = std::env::args().nth(1) {
                std::fs::write(&path, &text)?;
                println!("wrote {path}");
            }

            let parsed = parse_trace(&text)?;
            let mut replay = ControllerState::new(size).with_activation(Activation::Relu);
            run_trace(&mut replay, &parsed.transactions)?;
            assert_eq!(replay.memory(), ctrl.memory());
            println!("replayed file: counters {:?}, memory identical", parsed.counters);
        }
        finals.push(ctrl.memory().to_vec());
    }
    println!("passive and active final memories equal: {}", finals[0] == finals[1]);
    Ok(())
}
