//! Closed-form bandwidth of a channel-tiled convolution.
//!
//! A partition `(m, n)` processes `m` input channels and `n` output channels
//! per iteration. Input maps are fetched once per output tile and every
//! output element is written once per input tile. Before each write except
//! the first, a passive memory controller forces the partial sum to be read
//! back over the interconnect; an active controller accumulates in place and
//! removes that read.
//!
//! All quantities are activation counts. Tiles that do not divide the channel
//! count use `ceil` iteration counts, matching what the tiled loop nest does
//! with a short remainder tile. Grouped layers are charged per group with the
//! group's channel counts and summed.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use crate::catalog::{ConvLayerShape, NetworkModel};
use crate::error::{Error, Result};

/// Channel tiling: `m` input channels and `n` output channels per iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Partition {
    pub m: usize,
    pub n: usize,
}

impl Partition {
    pub fn new(m: usize, n: usize) -> Self {
        Self { m, n }
    }

    /// Checks `1 <= m <= cin/groups` and `1 <= n <= cout/groups`.
    pub fn check(&self, layer: &ConvLayerShape) -> Result<()> {
        check_tile(layer, "m", self.m, layer.group_cin())?;
        check_tile(layer, "n", self.n, layer.group_cout())
    }

    /// The whole (per-group) layer in a single iteration.
    pub fn whole(layer: &ConvLayerShape) -> Self {
        Self::new(layer.group_cin(), layer.group_cout())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(m={}, n={})", self.m, self.n)
    }
}

fn check_tile(layer: &ConvLayerShape, tile: &'static str, value: usize, max: usize) -> Result<()> {
    if value == 0 || value > max {
        return Err(Error::TileOutOfRange {
            layer: layer.name.clone(),
            tile,
            value,
            max,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ControllerMode {
    #[default]
    Passive,
    Active,
}

impl fmt::Display for ControllerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ControllerMode::Passive => "passive",
            ControllerMode::Active => "active",
        })
    }
}

impl FromStr for ControllerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "passive" => Ok(ControllerMode::Passive),
            "active" => Ok(ControllerMode::Active),
            other => Err(Error::Report(format!("unknown controller mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct BandwidthBreakdown {
    pub input_reads: u64,
    pub psum_reads: u64,
    pub psum_writes: u64,
}

impl BandwidthBreakdown {
    pub fn total(&self) -> u64 {
        self.input_reads + self.psum_reads + self.psum_writes
    }
}

impl Add for BandwidthBreakdown {
    type Output = Self;

    fn add(self, rhs: Self) -> Self {
        Self {
            input_reads: self.input_reads + rhs.input_reads,
            psum_reads: self.psum_reads + rhs.psum_reads,
            psum_writes: self.psum_writes + rhs.psum_writes,
        }
    }
}

impl std::iter::Sum for BandwidthBreakdown {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), Add::add)
    }
}

fn ceil_div(a: usize, b: usize) -> u64 {
    a.div_ceil(b) as u64
}

/// Input map reads for output tile size `n`: `wi*hi*M*ceil(N/n)` (per group).
pub fn input_bandwidth(layer: &ConvLayerShape, n: usize) -> Result<u64> {
    check_tile(layer, "n", n, layer.group_cout())?;
    Ok(layer.input_pixels() * layer.cin as u64 * ceil_div(layer.group_cout(), n))
}

/// Partial-sum `(reads, writes)` for input tile size `m`.
///
/// With `T = ceil(M/m)` iterations every output element is written `T` times.
/// Passive mode reads it back `T - 1` times; active mode never does.
pub fn output_bandwidth(layer: &ConvLayerShape, m: usize, mode: ControllerMode) -> Result<(u64, u64)> {
    check_tile(layer, "m", m, layer.group_cin())?;
    let iterations = ceil_div(layer.group_cin(), m);
    let outputs = layer.output_pixels() * layer.cout as u64;
    let writes = outputs * iterations;
    let reads = match mode {
        ControllerMode::Passive => outputs * (iterations - 1),
        ControllerMode::Active => 0,
    };
    Ok((reads, writes))
}

pub fn layer_bandwidth(
    layer: &ConvLayerShape,
    partition: Partition,
    mode: ControllerMode,
) -> Result<BandwidthBreakdown> {
    partition.check(layer)?;
    let input_reads = input_bandwidth(layer, partition.n)?;
    let (psum_reads, psum_writes) = output_bandwidth(layer, partition.m, mode)?;
    Ok(BandwidthBreakdown {
        input_reads,
        psum_reads,
        psum_writes,
    })
}

/// Partial-sum reads an active controller removes: `wo*ho*N*(ceil(M/m) - 1)`.
pub fn active_saving(layer: &ConvLayerShape, m: usize) -> Result<u64> {
    let (passive_reads, _) = output_bandwidth(layer, m, ControllerMode::Passive)?;
    Ok(passive_reads)
}

/// Every input read once and every output written once.
pub fn layer_min_bandwidth(layer: &ConvLayerShape) -> u64 {
    layer.input_pixels() * layer.cin as u64 + layer.output_pixels() * layer.cout as u64
}

pub fn min_bandwidth(network: &NetworkModel) -> u64 {
    network.layers().iter().map(layer_min_bandwidth).sum()
}

/// Bandwidth as a function of a real-valued input tile `m`, with `n`
/// eliminated through `k^2 * m * n = macs`.
///
/// `wi*hi*M*(N/macs)*k^2*m + wo*ho*N*(2*M/m - 1)`, with M and N taken per
/// group and the result scaled by the group count.
pub fn continuous_objective(layer: &ConvLayerShape, macs: f64, m: f64) -> Result<f64> {
    if m <= 0.0 || m.is_nan() {
        return Err(Error::NonPositiveTile(m));
    }
    let g = layer.groups as f64;
    let mg = layer.group_cin() as f64;
    let ng = layer.group_cout() as f64;
    let k2 = (layer.k * layer.k) as f64;
    let input = layer.input_pixels() as f64 * mg * (ng / macs) * k2 * m;
    let output = layer.output_pixels() as f64 * ng * (2.0 * mg / m - 1.0);
    Ok(g * (input + output))
}
