//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use psumbw::analytic::{layer_bandwidth, min_bandwidth, ControllerMode, Partition};
use psumbw::catalog::{builtin_catalog, ConvLayerShape, NetworkModel, STANDARD_NETWORKS};
use psumbw::memctrl::{psum_memory_size, random_engine_trace, run_trace, Activation, ControllerState};
use psumbw::partition::{network_bandwidth, partition, AcceleratorConfig, Strategy};
use psumbw::reference::{accountings, deviations, discrepancy_report, STRATEGY_MACS};
use psumbw::report::{cmd_sweep, EvalOptions, DEFAULT_MACS};
use psumbw::tilesim::{simulate_layer, verify_numeric};

const MODES: [ControllerMode; 2] = [ControllerMode::Passive, ControllerMode::Active];
const TOLERANCE: f64 = 0.25;

type Criterion = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    ok: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome { ok: true, detail: detail.into() }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome { ok: false, detail: detail.into() }
}

fn random_layer(rng: &mut ChaCha8Rng, max_dim: usize, max_ch: usize, kernels: &[usize]) -> ConvLayerShape {
    let k = kernels[rng.gen_range(0..kernels.len())];
    let stride = rng.gen_range(1..=2);
    let pad = rng.gen_range(0..=k / 2);
    // keep at least one output pixel
    let wi = rng.gen_range(1..=max_dim).max(k);
    let hi = rng.gen_range(1..=max_dim).max(k);
    let cin = rng.gen_range(1..=max_ch);
    let cout = rng.gen_range(1..=max_ch);
    ConvLayerShape::new("r", wi, hi, k, stride, pad, cin, cout).expect("valid random layer")
}

fn random_grouped_layer(rng: &mut ChaCha8Rng, max_dim: usize, max_per_group: usize) -> ConvLayerShape {
    let groups = [1, 1, 2, 3][rng.gen_range(0..4)];
    let base = random_layer(rng, max_dim, max_per_group, &[1, 3]);
    let (cin, cout) = (base.cin * groups, base.cout * groups);
    ConvLayerShape::new("r", base.wi, base.hi, base.k, base.stride, base.pad, cin, cout)
        .and_then(|l| l.with_groups(groups))
        .expect("valid grouped layer")
}

fn random_partition(rng: &mut ChaCha8Rng, layer: &ConvLayerShape) -> Partition {
    Partition::new(rng.gen_range(1..=layer.group_cin()), rng.gen_range(1..=layer.group_cout()))
}

fn standard() -> Vec<NetworkModel> {
    STANDARD_NETWORKS.iter().map(|n| builtin_catalog(n).unwrap()).collect()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut checked = 0u64;
    for _ in 0..1000 {
        let layer = random_layer(&mut rng, 16, 16, &[1, 3, 5]);
        for m in 1..=layer.cin {
            for n in 1..=layer.cout {
                let p = Partition::new(m, n);
                for mode in MODES {
                    let a = layer_bandwidth(&layer, p, mode).unwrap();
                    let s = simulate_layer(&layer, p, mode).unwrap();
                    if (a.input_reads, a.psum_reads, a.psum_writes) != (s.input_reads, s.psum_reads, s.psum_writes) {
                        return fail(format!("{} at {p} {mode}: analytic {a:?} vs simulated {s:?}", layer.to_record()));
                    }
                    checked += 1;
                }
            }
        }
    }
    pass(format!("1000 layers, {checked} (layer, partition, mode) cases"))
}

fn semantic_preservation() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let layer = random_grouped_layer(&mut rng, 12, 8);
        let p = random_partition(&mut rng, &layer);
        let seed = rng.gen();
        if !verify_numeric(&layer, p, seed).unwrap() {
            return fail(format!("{} at {p}, seed {seed}", layer.to_record()));
        }
    }
    pass("200 triples")
}

fn strategy_dominance() -> Outcome {
    let mut violations = Vec::new();
    for net in standard() {
        for macs in STRATEGY_MACS {
            let total = |s| network_bandwidth(&net, &AcceleratorConfig::new(macs).with_strategy(s)).unwrap().total;
            let opt = total(Strategy::Optimal);
            for s in [Strategy::MaxInput, Strategy::MaxOutput, Strategy::EqualMacs] {
                let t = total(s);
                if t < opt {
                    violations.push(format!("{}@{macs}: {s} {t} < {opt}", net.name));
                }
            }
        }
    }
    if violations.is_empty() {
        pass("8 networks x 3 budgets, 0 violations")
    } else {
        fail(violations.join("; "))
    }
}

fn floor_convergence() -> Outcome {
    for net in standard() {
        let mut total = 0;
        for layer in net.layers() {
            let macs = (layer.k * layer.k * layer.group_cin() * layer.group_cout()) as u64;
            let p = partition(layer, &AcceleratorConfig::new(macs)).unwrap();
            total += layer_bandwidth(layer, p, ControllerMode::Passive).unwrap().total();
        }
        let floor = min_bandwidth(&net);
        if total != floor {
            return fail(format!("{}: {total} != floor {floor}", net.name));
        }
    }
    pass("8 networks at their per-layer floor")
}

fn active_saving_identity() -> Outcome {
    let nets = standard();
    let report = cmd_sweep(&nets, &DEFAULT_MACS, Strategy::Optimal, EvalOptions::default()).unwrap();
    for net in &nets {
        for macs in DEFAULT_MACS {
            let cfg = AcceleratorConfig::new(macs);
            let passive = network_bandwidth(net, &cfg).unwrap();
            let active = network_bandwidth(net, &cfg.with_mode(ControllerMode::Active)).unwrap();
            let expected: u64 = passive
                .layers
                .iter()
                .map(|r| {
                    let l = &r.layer;
                    l.output_pixels() * l.cout as u64 * (l.group_cin().div_ceil(r.partition.m) as u64 - 1)
                })
                .sum();
            if passive.total - active.total != expected {
                return fail(format!("{}@{macs}: {} != {expected}", net.name, passive.total - active.total));
            }
            let cell = report.savings.iter().find(|c| c.network == net.name && c.macs == macs).unwrap();
            if (cell.passive, cell.active) != (passive.total, active.total) || cell.percent() < 0.0 {
                return fail(format!("{}@{macs}: sweep cell {cell:?}", net.name));
            }
        }
    }
    pass(format!("{} cells", nets.len() * DEFAULT_MACS.len()))
}

fn controller_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for i in 0..10_000 {
        let layer = random_grouped_layer(&mut rng, 8, 6);
        let p = random_partition(&mut rng, &layer);
        let seed = rng.gen();
        let sim = simulate_layer(&layer, p, ControllerMode::Passive).unwrap();
        let run = |mode| {
            let trace = random_engine_trace(&layer, p, mode, Activation::Identity, seed, 1 << 16).unwrap();
            let mut st = ControllerState::new(psum_memory_size(&layer));
            run_trace(&mut st, &trace).unwrap();
            st
        };
        let (passive, active) = (run(ControllerMode::Passive), run(ControllerMode::Active));
        let (pc, ac) = (passive.counters(), active.counters());
        if passive.memory() != active.memory() {
            return fail(format!("trace {i}: final memories differ for {} at {p}", layer.to_record()));
        }
        if ac.interconnect_reads != 0 {
            return fail(format!("trace {i}: active reads {}", ac.interconnect_reads));
        }
        if (pc.interconnect_reads, pc.interconnect_writes) != (sim.psum_reads, sim.psum_writes) {
            return fail(format!("trace {i}: passive {pc:?} vs simulator {sim:?}"));
        }
    }
    pass("10000 traces")
}

fn reproduction() -> Outcome {
    let report = discrepancy_report(TOLERANCE).unwrap();
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("discrepancy_report.md");
    std::fs::write(&path, &report).unwrap();

    let mut reproduced = Vec::new();
    let mut missed = Vec::new();
    let mut ordering = Vec::new();
    for (idx, name) in STANDARD_NETWORKS.iter().enumerate() {
        let mut best: Option<(String, f64)> = None;
        for acc in accountings(idx) {
            let worst = deviations(idx, acc)
                .unwrap()
                .iter()
                .map(|c| c.relative().abs())
                .fold(0.0, f64::max);
            if best.as_ref().is_none_or(|(_, w)| worst < *w) {
                best = Some((acc.to_string(), worst));
            }

            let net = builtin_catalog(acc.catalog).unwrap();
            for s in Strategy::COMPARED {
                let totals: Vec<u64> = STRATEGY_MACS
                    .iter()
                    .map(|&macs| {
                        let cfg = AcceleratorConfig::new(macs).with_strategy(s).with_groups(acc.groups);
                        network_bandwidth(&net, &cfg).unwrap().total
                    })
                    .collect();
                if totals.windows(2).any(|w| w[1] > w[0]) {
                    ordering.push(format!("{acc} {s} increases with P: {totals:?}"));
                }
            }
            for macs in STRATEGY_MACS {
                let total = |s| {
                    let cfg = AcceleratorConfig::new(macs).with_strategy(s).with_groups(acc.groups);
                    network_bandwidth(&net, &cfg).unwrap().total
                };
                let opt = total(Strategy::Optimal);
                if Strategy::COMPARED.iter().any(|&s| total(s) < opt) {
                    ordering.push(format!("{acc}@{macs}: optimal not smallest"));
                }
            }
        }
        let (acc, worst) = best.unwrap();
        let entry = format!("{name} via {acc} ({:.1}%)", worst * 100.0);
        if worst <= TOLERANCE {
            reproduced.push(entry);
        } else {
            missed.push(entry);
        }
    }
    let detail = format!(
        "{}/8 networks within {:.0}% [{}]; missed [{}]; {} ordering violations; report at {}",
        reproduced.len(),
        TOLERANCE * 100.0,
        reproduced.join(", "),
        missed.join(", "),
        ordering.len(),
        path.display()
    );
    if reproduced.len() >= 6 && ordering.is_empty() {
        pass(detail)
    } else if !ordering.is_empty() {
        fail(format!("{detail}: {}", ordering.join("; ")))
    } else {
        fail(detail)
    }
}

fn savings_range() -> Outcome {
    let report = cmd_sweep(&standard(), &[512, 16384], Strategy::Optimal, EvalOptions::default()).unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for (macs, lo, hi) in [(512, 9.0, 52.0), (16384, 0.0, 48.0)] {
        let pct: Vec<f64> = report.savings.iter().filter(|c| c.macs == macs).map(|c| c.percent()).collect();
        let (min, max) = pct.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        ok &= min >= lo && max <= hi;
        lines.push(format!("P={macs}: {min:.1}..{max:.1}% in [{lo}, {hi}]"));
    }
    let detail = lines.join(", ");
    if ok {
        pass(detail)
    } else {
        fail(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("1 oracle equivalence", oracle_equivalence, Duration::from_secs(60)),
        ("2 semantic preservation", semantic_preservation, Duration::from_secs(30)),
        ("3 strategy dominance", strategy_dominance, Duration::from_secs(5)),
        ("4 floor convergence", floor_convergence, Duration::from_secs(1)),
        ("5 active saving identity", active_saving_identity, Duration::from_secs(5)),
        ("6 controller equivalence", controller_equivalence, Duration::from_secs(60)),
        ("7 reference reproduction", reproduction, Duration::MAX),
        ("8 savings range", savings_range, Duration::MAX),
    ];
    let mut failures = 0;
    for (name, check, budget) in criteria {
        let start = Instant::now();
        let mut outcome = check();
        let elapsed = start.elapsed();
        if elapsed > budget {
            outcome = fail(format!("{} (took {elapsed:.2?}, budget {budget:?})", outcome.detail));
        }
        let verdict = if outcome.ok { "PASS" } else { "FAIL" };
        println!("{verdict} {name}: {} [{elapsed:.2?}]", outcome.detail);
        failures += usize::from(!outcome.ok);
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
