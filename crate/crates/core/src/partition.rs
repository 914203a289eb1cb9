//! Channel partitioning under a MAC budget.
//!
//! A partition `(m, n)` is feasible when `k^2 * m * n <= macs`. The
//! strategies differ only in how they split the budget:
//!
//! * `MaxInput` gives as many MACs as possible to input channels,
//! * `MaxOutput` to output channels,
//! * `EqualMacs` uses `m = n = floor(sqrt(macs / k^2))`, each clamped to its
//!   channel count,
//! * `Optimal` evaluates every divisor `d` of the input channel count with the
//!   largest feasible `n` and keeps the cheapest,
//! * `BruteForce` scans every feasible pair and serves as the reference
//!   minimizer.
//!
//! Ties go to the smaller `m`, then the smaller `n`. Grouped layers are tiled
//! within a group.

use std::fmt;
use std::str::FromStr;

use crate::analytic::{layer_bandwidth, BandwidthBreakdown, ControllerMode, Partition};
use crate::catalog::{ConvLayerShape, GroupMode, NetworkModel};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    MaxInput,
    MaxOutput,
    EqualMacs,
    Optimal,
    BruteForce,
}

impl Strategy {
    /// The three baselines followed by `Optimal`, in report order.
    pub const COMPARED: [Strategy; 4] = [
        Strategy::MaxInput,
        Strategy::MaxOutput,
        Strategy::EqualMacs,
        Strategy::Optimal,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Strategy::MaxInput => "max-input",
            Strategy::MaxOutput => "max-output",
            Strategy::EqualMacs => "equal-macs",
            Strategy::Optimal => "optimal",
            Strategy::BruteForce => "brute-force",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Strategy::MaxInput,
            Strategy::MaxOutput,
            Strategy::EqualMacs,
            Strategy::Optimal,
            Strategy::BruteForce,
        ]
        .into_iter()
        .find(|st| st.name() == s)
        .ok_or_else(|| Error::Report(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AcceleratorConfig {
    /// Number of MAC units available per iteration.
    pub macs: u64,
    pub mode: ControllerMode,
    pub strategy: Strategy,
    /// Let `Optimal` minimize active-mode bandwidth when `mode` is active.
    /// Off by default: the passive-optimal partition is reused.
    pub reoptimize_active: bool,
    pub groups: GroupMode,
}

impl AcceleratorConfig {
    pub fn new(macs: u64) -> Self {
        Self {
            macs,
            mode: ControllerMode::Passive,
            strategy: Strategy::Optimal,
            reoptimize_active: false,
            groups: GroupMode::Grouped,
        }
    }

    pub fn with_mode(self, mode: ControllerMode) -> Self {
        Self { mode, ..self }
    }

    pub fn with_strategy(self, strategy: Strategy) -> Self {
        Self { strategy, ..self }
    }

    pub fn with_groups(self, groups: GroupMode) -> Self {
        Self { groups, ..self }
    }

    pub fn with_reoptimize_active(self, reoptimize_active: bool) -> Self {
        Self {
            reoptimize_active,
            ..self
        }
    }

    fn objective_mode(&self) -> ControllerMode {
        if self.mode == ControllerMode::Active && self.reoptimize_active {
            ControllerMode::Active
        } else {
            ControllerMode::Passive
        }
    }
}

fn kernel_area(layer: &ConvLayerShape) -> u64 {
    (layer.k * layer.k) as u64
}

/// `k^2 * m * n <= macs` with both tiles inside the (per-group) channel range.
pub fn feasible(layer: &ConvLayerShape, macs: u64, m: usize, n: usize) -> bool {
    (1..=layer.group_cin()).contains(&m)
        && (1..=layer.group_cout()).contains(&n)
        && kernel_area(layer)
            .checked_mul(m as u64)
            .and_then(|x| x.checked_mul(n as u64))
            .is_some_and(|x| x <= macs)
}

/// Stationary point of the continuous objective:
/// `sqrt(2 * wo * ho * macs / (wi * hi * k^2))`.
pub fn optimal_real_m(layer: &ConvLayerShape, macs: u64) -> f64 {
    let num = 2.0 * layer.output_pixels() as f64 * macs as f64;
    let den = layer.input_pixels() as f64 * kernel_area(layer) as f64;
    (num / den).sqrt()
}

fn cap(x: u64, hi: usize) -> usize {
    x.clamp(1, hi.max(1) as u64) as usize
}

fn divisors(x: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= x {
        if x.is_multiple_of(d) {
            small.push(d);
            if d * d != x {
                large.push(x / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

/// Picks `(m, n)` for one layer under `config`.
///
/// `config.groups` is not applied here; pass a densified layer to charge
/// grouped layers as dense ones.
pub fn partition(layer: &ConvLayerShape, config: &AcceleratorConfig) -> Result<Partition> {
    layer.validate()?;
    let area = kernel_area(layer);
    if config.macs < area {
        return Err(Error::Infeasible {
            layer: layer.name.clone(),
            macs: config.macs,
            required: area,
        });
    }
    let budget = config.macs / area;
    let (in_max, out_max) = (layer.group_cin(), layer.group_cout());

    let picked = match config.strategy {
        Strategy::MaxInput => {
            let m = cap(budget, in_max);
            Partition::new(m, cap(budget / m as u64, out_max))
        }
        Strategy::MaxOutput => {
            let n = cap(budget, out_max);
            Partition::new(cap(budget / n as u64, in_max), n)
        }
        Strategy::EqualMacs => {
            let e = budget.isqrt();
            Partition::new(cap(e, in_max), cap(e, out_max))
        }
        Strategy::Optimal => {
            let objective = config.objective_mode();
            let candidates = divisors(in_max)
                .into_iter()
                .map(|d| Partition::new(d, cap(budget / d as u64, out_max)))
                .filter(|p| feasible(layer, config.macs, p.m, p.n));
            argmin(layer, candidates, objective)?
        }
        Strategy::BruteForce => {
            let objective = config.objective_mode();
            let candidates = (1..=in_max)
                .flat_map(|m| (1..=out_max).map(move |n| Partition::new(m, n)))
                .filter(|p| feasible(layer, config.macs, p.m, p.n));
            argmin(layer, candidates, objective)?
        }
    };
    debug_assert!(feasible(layer, config.macs, picked.m, picked.n));
    Ok(picked)
}

fn argmin(
    layer: &ConvLayerShape,
    candidates: impl Iterator<Item = Partition>,
    mode: ControllerMode,
) -> Result<Partition> {
    let mut best: Option<(u64, Partition)> = None;
    for p in candidates {
        let total = layer_bandwidth(layer, p, mode)?.total();
        // candidates arrive in ascending (m, n), so strict < keeps the tie-break
        if best.is_none_or(|(t, _)| total < t) {
            best = Some((total, p));
        }
    }
    // (1, 1) is always feasible once macs >= k^2 and 1 divides every M
    best.map(|(_, p)| p).ok_or_else(|| Error::Infeasible {
        layer: layer.name.clone(),
        macs: 0,
        required: kernel_area(layer),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerResult {
    pub layer: ConvLayerShape,
    pub partition: Partition,
    pub breakdown: BandwidthBreakdown,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkBandwidth {
    pub layers: Vec<LayerResult>,
    pub total: u64,
}

impl NetworkBandwidth {
    pub fn breakdown(&self) -> BandwidthBreakdown {
        self.layers.iter().map(|l| l.breakdown).sum()
    }
}

/// Partitions each layer independently and sums the bandwidth.
pub fn network_bandwidth(network: &NetworkModel, config: &AcceleratorConfig) -> Result<NetworkBandwidth> {
    let network = network.with_group_mode(config.groups);
    let layers = network
        .layers()
        .iter()
        .map(|layer| {
            let partition = partition(layer, config)?;
            let breakdown = layer_bandwidth(layer, partition, config.mode)?;
            Ok(LayerResult {
                layer: layer.clone(),
                partition,
                breakdown,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let total = layers.iter().map(|l| l.breakdown.total()).sum();
    Ok(NetworkBandwidth { layers, total })
}
