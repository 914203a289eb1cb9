//! Report generation behind the `psumbw` command line.
//!
//! Totals stay integer activation counts; conversion to millions happens only
//! when rendering. CSV output uses the header
//! `network,macs,strategy,mode,total_activations,total_millions`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analytic::{layer_bandwidth, min_bandwidth, BandwidthBreakdown, ControllerMode, Partition};
use crate::catalog::{ConvLayerShape, GroupMode, NetworkModel};
use crate::error::{Error, Result};
use crate::memctrl::{psum_memory_size, random_engine_trace, run_trace, Activation, ControllerState, TrafficCounters};
use crate::partition::{network_bandwidth, AcceleratorConfig, Strategy};
use crate::tilesim::{check_size, simulate_layer, verify_numeric, AccessCounts};

/// MAC budgets swept by default.
pub const DEFAULT_MACS: [u64; 6] = [512, 1024, 2048, 4096, 8192, 16384];

/// Strategy label of minimum-bandwidth rows.
pub const FLOOR_STRATEGY: &str = "min-bw";
/// Mode label of minimum-bandwidth rows.
pub const FLOOR_MODE: &str = "none";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportRow {
    pub network: String,
    /// `None` for minimum-bandwidth rows, which have no MAC budget.
    pub macs: Option<u64>,
    pub strategy: String,
    pub mode: String,
    pub total: u64,
}

impl ReportRow {
    pub fn total_millions(&self) -> f64 {
        round2(self.total as f64 / 1e6)
    }
}

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRecord {
    network: String,
    macs: Option<u64>,
    strategy: String,
    mode: String,
    total_activations: u64,
    total_millions: String,
}

/// Options shared by `compare` and `sweep`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EvalOptions {
    pub groups: GroupMode,
    pub reoptimize_active: bool,
}

pub fn cmd_min_bw(networks: &[NetworkModel]) -> Result<Vec<ReportRow>> {
    if networks.is_empty() {
        return Err(Error::NoNetworks);
    }
    Ok(networks
        .iter()
        .map(|net| ReportRow {
            network: net.name.clone(),
            macs: None,
            strategy: FLOOR_STRATEGY.into(),
            mode: FLOOR_MODE.into(),
            total: min_bandwidth(net),
        })
        .collect())
}

fn evaluate(network: &NetworkModel, config: &AcceleratorConfig) -> Result<u64> {
    network_bandwidth(network, config)
        .map(|r| r.total)
        .map_err(|e| match e {
            Error::Infeasible { layer, macs, required } => Error::Infeasible {
                layer: format!("{}/{}", network.name, layer),
                macs,
                required,
            },
            other => other,
        })
}

fn check_inputs(networks: &[NetworkModel], macs_list: &[u64]) -> Result<()> {
    if networks.is_empty() {
        return Err(Error::NoNetworks);
    }
    if macs_list.is_empty() {
        return Err(Error::MacList(String::new()));
    }
    Ok(())
}

/// All four compared strategies for every network and MAC budget.
///
/// Fails if `optimal` is beaten by a baseline in any (network, macs) group.
pub fn cmd_compare(
    networks: &[NetworkModel],
    macs_list: &[u64],
    mode: ControllerMode,
    options: EvalOptions,
) -> Result<Vec<ReportRow>> {
    check_inputs(networks, macs_list)?;
    let mut rows = Vec::new();
    for net in networks {
        for &macs in macs_list {
            let base = AcceleratorConfig::new(macs)
                .with_mode(mode)
                .with_groups(options.groups)
                .with_reoptimize_active(options.reoptimize_active);
            let group: Vec<ReportRow> = Strategy::COMPARED
                .iter()
                .map(|&strategy| {
                    Ok(ReportRow {
                        network: net.name.clone(),
                        macs: Some(macs),
                        strategy: strategy.name().into(),
                        mode: mode.to_string(),
                        total: evaluate(net, &base.with_strategy(strategy))?,
                    })
                })
                .collect::<Result<_>>()?;
            let optimal = group[3].total;
            if let Some(better) = group[..3].iter().find(|r| r.total < optimal) {
                return Err(Error::NotMinimal {
                    network: net.name.clone(),
                    macs,
                    strategy: better.strategy.clone(),
                    better: better.total,
                    optimal,
                });
            }
            rows.extend(group);
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SavingsCell {
    pub network: String,
    pub macs: u64,
    pub passive: u64,
    pub active: u64,
}

impl SavingsCell {
    /// `100 * (passive - active) / passive`.
    pub fn percent(&self) -> f64 {
        if self.passive == 0 {
            return 0.0;
        }
        100.0 * (self.passive - self.active) as f64 / self.passive as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub rows: Vec<ReportRow>,
    pub savings: Vec<SavingsCell>,
}

/// Passive and active totals per (network, macs) with the active saving.
pub fn cmd_sweep(
    networks: &[NetworkModel],
    macs_list: &[u64],
    strategy: Strategy,
    options: EvalOptions,
) -> Result<SweepReport> {
    check_inputs(networks, macs_list)?;
    let mut rows = Vec::new();
    let mut savings = Vec::new();
    for net in networks {
        for &macs in macs_list {
            let base = AcceleratorConfig::new(macs)
                .with_strategy(strategy)
                .with_groups(options.groups)
                .with_reoptimize_active(options.reoptimize_active);
            let passive = evaluate(net, &base.with_mode(ControllerMode::Passive))?;
            let active = evaluate(net, &base.with_mode(ControllerMode::Active))?;
            for (mode, total) in [(ControllerMode::Passive, passive), (ControllerMode::Active, active)] {
                rows.push(ReportRow {
                    network: net.name.clone(),
                    macs: Some(macs),
                    strategy: strategy.name().into(),
                    mode: mode.to_string(),
                    total,
                });
            }
            savings.push(SavingsCell {
                network: net.name.clone(),
                macs,
                passive,
                active,
            });
        }
    }
    Ok(SweepReport { rows, savings })
}

/// Cross-check of one layer and partition against both simulators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub layer: ConvLayerShape,
    pub partition: Partition,
    pub mode: ControllerMode,
    pub analytic: BandwidthBreakdown,
    pub simulated: AccessCounts,
    pub controller: TrafficCounters,
    pub numeric_ok: bool,
}

impl CheckReport {
    pub fn counts_agree(&self) -> bool {
        let a = &self.analytic;
        let s = &self.simulated;
        a.input_reads == s.input_reads
            && a.psum_reads == s.psum_reads
            && a.psum_writes == s.psum_writes
            && self.controller.interconnect_reads == s.psum_reads
            && self.controller.interconnect_writes == s.psum_writes
    }

    pub fn passed(&self) -> bool {
        self.counts_agree() && self.numeric_ok
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = &self.analytic;
        let s = &self.simulated;
        let c = &self.controller;
        writeln!(f, "layer      {}", self.layer.to_record())?;
        writeln!(f, "partition  {}  mode {}", self.partition, self.mode)?;
        writeln!(
            f,
            "analytic   input_reads={} psum_reads={} psum_writes={} total={}",
            a.input_reads,
            a.psum_reads,
            a.psum_writes,
            a.total()
        )?;
        writeln!(
            f,
            "simulated  input_reads={} psum_reads={} psum_writes={} total={} mac_ops={}",
            s.input_reads,
            s.psum_reads,
            s.psum_writes,
            s.traffic(),
            s.mac_ops
        )?;
        writeln!(
            f,
            "controller psum_reads={} psum_writes={} internal_rmw={}",
            c.interconnect_reads, c.interconnect_writes, c.internal_reads
        )?;
        writeln!(f, "numeric    {}", if self.numeric_ok { "tiled == direct" } else { "MISMATCH" })?;
        write!(f, "{}", if self.passed() { "PASS" } else { "FAIL" })
    }
}

pub fn cmd_check(layer: &ConvLayerShape, partition: Partition, mode: ControllerMode) -> Result<CheckReport> {
    layer.validate()?;
    check_size(layer)?;
    let analytic = layer_bandwidth(layer, partition, mode)?;
    let simulated = simulate_layer(layer, partition, mode)?;
    let trace = random_engine_trace(layer, partition, mode, Activation::Identity, 0x5eed, 1000)?;
    let mut state = ControllerState::new(psum_memory_size(layer));
    run_trace(&mut state, &trace)?;
    let numeric_ok = verify_numeric(layer, partition, 0x5eed)?;
    Ok(CheckReport {
        layer: layer.clone(),
        partition,
        mode,
        analytic,
        simulated,
        controller: state.counters(),
        numeric_ok,
    })
}

/// Parses `512,2048,16384` or a doubling range `512..16384`.
pub fn parse_macs(spec: &str) -> Result<Vec<u64>> {
    let bad = || Error::MacList(spec.to_string());
    let spec = spec.trim();
    if let Some((lo, hi)) = spec.split_once("..") {
        let lo: u64 = lo.trim().parse().map_err(|_| bad())?;
        let hi: u64 = hi.trim().parse().map_err(|_| bad())?;
        if lo == 0 || hi < lo {
            return Err(bad());
        }
        let mut out = Vec::new();
        let mut p = lo;
        while p <= hi {
            out.push(p);
            p = p.checked_mul(2).ok_or_else(bad)?;
        }
        if out.last() != Some(&hi) {
            return Err(bad());
        }
        return Ok(out);
    }
    let list = spec
        .split(',')
        .map(|s| s.trim().parse::<u64>().ok().filter(|&v| v > 0))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(bad)?;
    if list.is_empty() {
        return Err(bad());
    }
    Ok(list)
}

pub fn render_csv(rows: &[ReportRow]) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    for row in rows {
        writer
            .serialize(CsvRecord {
                network: row.network.clone(),
                macs: row.macs,
                strategy: row.strategy.clone(),
                mode: row.mode.clone(),
                total_activations: row.total,
                total_millions: format!("{:.2}", row.total_millions()),
            })
            .map_err(|e| Error::Report(e.to_string()))?;
    }
    if rows.is_empty() {
        return Ok("network,macs,strategy,mode,total_activations,total_millions\n".into());
    }
    let bytes = writer.into_inner().map_err(|e| Error::Report(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Report(e.to_string()))
}

/// Reads rows back from [`render_csv`] output. The millions column is
/// ignored; totals come from `total_activations`.
pub fn parse_csv(text: &str) -> Result<Vec<ReportRow>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    reader
        .deserialize::<CsvRecord>()
        .map(|rec| {
            let rec = rec.map_err(|e| Error::Report(e.to_string()))?;
            Ok(ReportRow {
                network: rec.network,
                macs: rec.macs,
                strategy: rec.strategy,
                mode: rec.mode,
                total: rec.total_activations,
            })
        })
        .collect()
}

pub fn render_markdown(rows: &[ReportRow]) -> String {
    let mut out = String::from("| network | macs | strategy | mode | total (M activations) |\n");
    out.push_str("|---|---:|---|---|---:|\n");
    for r in rows {
        let macs = r.macs.map(|m| m.to_string()).unwrap_or_else(|| "-".into());
        out.push_str(&format!(
            "| {} | {} | {} | {} | {:.2} |\n",
            r.network,
            macs,
            r.strategy,
            r.mode,
            r.total_millions()
        ));
    }
    out
}

pub fn render_savings_csv(cells: &[SavingsCell]) -> String {
    let mut out = String::from("network,macs,passive_activations,active_activations,saving_percent\n");
    for c in cells {
        out.push_str(&format!(
            "{},{},{},{},{:.2}\n",
            c.network,
            c.macs,
            c.passive,
            c.active,
            c.percent()
        ));
    }
    out
}

/// One line per network, one column per MAC budget, `passive / active (saving%)`.
pub fn render_savings_markdown(cells: &[SavingsCell]) -> String {
    let mut macs: Vec<u64> = cells.iter().map(|c| c.macs).collect();
    macs.sort_unstable();
    macs.dedup();
    let mut out = String::from("| network |");
    for m in &macs {
        out.push_str(&format!(" {m} MACs |"));
    }
    out.push_str("\n|---|");
    out.push_str(&"---:|".repeat(macs.len()));
    out.push('\n');
    let mut names: Vec<&str> = Vec::new();
    for c in cells {
        if !names.contains(&c.network.as_str()) {
            names.push(&c.network);
        }
    }
    for name in names {
        out.push_str(&format!("| {name} |"));
        for m in &macs {
            match cells.iter().find(|c| c.network == name && c.macs == *m) {
                Some(c) => out.push_str(&format!(
                    " {:.2} / {:.2} ({:.1}%) |",
                    c.passive as f64 / 1e6,
                    c.active as f64 / 1e6,
                    c.percent()
                )),
                None => out.push_str(" - |"),
            }
        }
        out.push('\n');
    }
    out
}
