//! Transaction-level model of a memory controller that can accumulate
//! partial sums locally.
//!
//! Each write carries a command tag (the sideband user field on the bus).
//! `Accumulate` and `ActivateAccumulate` turn a write into a local
//! read-update-write, so the old partial sum never crosses the interconnect.
//! The activation is a static configuration register of the controller.
//!
//! Trace files hold one transaction per line, `<CMD> <address> [<value>]`
//! with `CMD` one of `R`, `W`, `ACC`, `ACT`, and may end with a counters
//! comment `# reads=.. writes=.. internal=..` where `internal` is the number
//! of local read-update-write operations.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{ControllerMode, Partition};
use crate::catalog::ConvLayerShape;
use crate::error::{Error, Result};
use crate::tilesim::check_size;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MemCommand {
    NormalRead,
    NormalWrite,
    Accumulate,
    ActivateAccumulate,
}

impl MemCommand {
    pub fn mnemonic(&self) -> &'static str {
        match self {
            MemCommand::NormalRead => "R",
            MemCommand::NormalWrite => "W",
            MemCommand::Accumulate => "ACC",
            MemCommand::ActivateAccumulate => "ACT",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        match s {
            "R" => Some(MemCommand::NormalRead),
            "W" => Some(MemCommand::NormalWrite),
            "ACC" => Some(MemCommand::Accumulate),
            "ACT" => Some(MemCommand::ActivateAccumulate),
            _ => None,
        }
    }

    pub fn is_write(&self) -> bool {
        !matches!(self, MemCommand::NormalRead)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct MemTransaction {
    pub command: MemCommand,
    pub address: usize,
    pub value: Option<i64>,
}

impl MemTransaction {
    pub fn read(address: usize) -> Self {
        Self {
            command: MemCommand::NormalRead,
            address,
            value: None,
        }
    }

    pub fn write(address: usize, value: i64) -> Self {
        Self::tagged(MemCommand::NormalWrite, address, value)
    }

    pub fn accumulate(address: usize, value: i64) -> Self {
        Self::tagged(MemCommand::Accumulate, address, value)
    }

    pub fn activate_accumulate(address: usize, value: i64) -> Self {
        Self::tagged(MemCommand::ActivateAccumulate, address, value)
    }

    fn tagged(command: MemCommand, address: usize, value: i64) -> Self {
        Self {
            command,
            address,
            value: Some(value),
        }
    }
}

impl fmt::Display for MemTransaction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.command.mnemonic(), self.address)?;
        if let Some(v) = self.value {
            write!(f, " {v}")?;
        }
        Ok(())
    }
}

/// Activation applied by `ActivateAccumulate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Activation {
    #[default]
    Identity,
    Relu,
    /// Arithmetic right shift by `shift` bits, then ReLU.
    Scale { shift: u32 },
}

impl Activation {
    pub fn apply(&self, x: i64) -> i64 {
        match *self {
            Activation::Identity => x,
            Activation::Relu => x.max(0),
            Activation::Scale { shift } => (x >> shift.min(63)).max(0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TrafficCounters {
    pub interconnect_reads: u64,
    pub interconnect_writes: u64,
    pub internal_reads: u64,
    pub internal_writes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControllerState {
    memory: Vec<i64>,
    activation: Activation,
    counters: TrafficCounters,
}

impl ControllerState {
    /// Zero-initialized memory of `size` words.
    pub fn new(size: usize) -> Self {
        Self {
            memory: vec![0; size],
            activation: Activation::Identity,
            counters: TrafficCounters::default(),
        }
    }

    pub fn with_activation(mut self, activation: Activation) -> Self {
        self.activation = activation;
        self
    }

    pub fn memory(&self) -> &[i64] {
        &self.memory
    }

    pub fn memory_mut(&mut self) -> &mut [i64] {
        &mut self.memory
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    pub fn counters(&self) -> TrafficCounters {
        self.counters
    }

    /// Executes one transaction. Returns the value for `NormalRead`.
    /// A rejected transaction leaves the state untouched.
    pub fn apply(&mut self, txn: &MemTransaction) -> Result<Option<i64>> {
        let size = self.memory.len();
        if txn.address >= size {
            return Err(Error::AddressOutOfRange {
                address: txn.address,
                size,
            });
        }
        let value = match (txn.command, txn.value) {
            (MemCommand::NormalRead, None) => {
                self.counters.interconnect_reads += 1;
                return Ok(Some(self.memory[txn.address]));
            }
            (MemCommand::NormalRead, Some(_)) => return Err(Error::UnexpectedValue),
            (cmd, None) => return Err(Error::MissingValue(cmd.mnemonic())),
            (_, Some(v)) => v,
        };
        let slot = &mut self.memory[txn.address];
        match txn.command {
            MemCommand::NormalWrite => *slot = value,
            MemCommand::Accumulate => *slot += value,
            MemCommand::ActivateAccumulate => *slot = self.activation.apply(*slot + value),
            MemCommand::NormalRead => unreachable!(),
        }
        self.counters.interconnect_writes += 1;
        if txn.command != MemCommand::NormalWrite {
            self.counters.internal_reads += 1;
            self.counters.internal_writes += 1;
        }
        Ok(None)
    }
}

/// Folds `stream` into `state`. The first rejected transaction aborts the
/// run and is reported with its index.
pub fn run_trace(state: &mut ControllerState, stream: &[MemTransaction]) -> Result<()> {
    for (index, txn) in stream.iter().enumerate() {
        state.apply(txn).map_err(|e| Error::Trace {
            index,
            source: Box::new(e),
        })?;
    }
    Ok(())
}

/// Words of partial-sum memory the layer needs: one per output activation.
pub fn psum_memory_size(layer: &ConvLayerShape) -> usize {
    layer.cout * layer.output_pixels() as usize
}

/// Partial-sum transactions issued by the compute engine for a tiled run.
///
/// Iterates the same schedule as the tile simulator; `psum(address,
/// input_tile)` supplies the partial sum produced for an output element in a
/// given input-tile iteration. Passive mode writes the first partial sum,
/// then reads the stored value and writes back the sum. Active mode writes
/// the first partial sum and tags every later one `Accumulate`.
///
/// With a non-identity `activation` the last update of every element is
/// activated: an active engine tags it `ActivateAccumulate` (configure the
/// controller with the same activation), a passive engine applies it before
/// its final write.
pub fn engine_trace(
    layer: &ConvLayerShape,
    partition: Partition,
    mode: ControllerMode,
    activation: Activation,
    mut psum: impl FnMut(usize, usize) -> i64,
) -> Result<Vec<MemTransaction>> {
    layer.validate()?;
    partition.check(layer)?;
    check_size(layer)?;

    let pixels = layer.output_pixels() as usize;
    let (mg, ng) = (layer.group_cin(), layer.group_cout());
    let tiles = mg.div_ceil(partition.m);
    let activate = activation != Activation::Identity;
    // engine-side copy of what it has stored, so passive write-backs carry old + new
    let mut shadow = vec![0i64; psum_memory_size(layer)];
    let mut stream = Vec::new();

    for g in 0..layer.groups {
        for co_base in (0..ng).step_by(partition.n) {
            let co_end = (co_base + partition.n).min(ng);
            for tile in 0..tiles {
                let first = tile == 0;
                let last = tile + 1 == tiles;
                for co in co_base..co_end {
                    let base = (g * ng + co) * pixels;
                    for (addr, stored) in shadow.iter_mut().enumerate().skip(base).take(pixels) {
                        let v = psum(addr, tile);
                        match mode {
                            ControllerMode::Active if activate && last => {
                                *stored = activation.apply(*stored + v);
                                stream.push(MemTransaction::activate_accumulate(addr, v));
                            }
                            ControllerMode::Active if first => {
                                *stored = v;
                                stream.push(MemTransaction::write(addr, v));
                            }
                            ControllerMode::Active => {
                                *stored += v;
                                stream.push(MemTransaction::accumulate(addr, v));
                            }
                            ControllerMode::Passive => {
                                let mut next = if first {
                                    v
                                } else {
                                    stream.push(MemTransaction::read(addr));
                                    *stored + v
                                };
                                if activate && last {
                                    next = activation.apply(next);
                                }
                                *stored = next;
                                stream.push(MemTransaction::write(addr, next));
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(stream)
}

/// `engine_trace` with partial sums drawn uniformly from `-bound..=bound`.
/// Both modes draw the same sequence for the same seed.
pub fn random_engine_trace(
    layer: &ConvLayerShape,
    partition: Partition,
    mode: ControllerMode,
    activation: Activation,
    seed: u64,
    bound: i64,
) -> Result<Vec<MemTransaction>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    engine_trace(layer, partition, mode, activation, |_, _| rng.gen_range(-bound..=bound))
}

/// Renders a trace, followed by the counters line when given.
pub fn format_trace(stream: &[MemTransaction], counters: Option<&TrafficCounters>) -> String {
    let mut out = String::new();
    for txn in stream {
        out.push_str(&txn.to_string());
        out.push('\n');
    }
    if let Some(c) = counters {
        out.push_str(&format!(
            "# reads={} writes={} internal={}\n",
            c.interconnect_reads, c.interconnect_writes, c.internal_reads
        ));
    }
    out
}

/// A parsed trace file: the transactions and, if present, the counters
/// comment as `(reads, writes, internal)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceFile {
    pub transactions: Vec<MemTransaction>,
    pub counters: Option<(u64, u64, u64)>,
}

pub fn parse_trace(text: &str) -> Result<TraceFile> {
    let mut transactions = Vec::new();
    let mut counters = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(c) = parse_counters(comment) {
                counters = Some(c);
            }
            continue;
        }
        let parse_err = |field: &'static str, reason: String| Error::Parse {
            line: line_no,
            field,
            reason,
        };
        let mut parts = line.split_whitespace();
        let cmd_text = parts.next().unwrap_or_default();
        let command = MemCommand::from_mnemonic(cmd_text)
            .ok_or_else(|| parse_err("command", format!("unknown command `{cmd_text}`")))?;
        let address = parts
            .next()
            .ok_or_else(|| parse_err("address", "missing".into()))?
            .parse()
            .map_err(|_| parse_err("address", "not a non-negative integer".into()))?;
        let value = parts
            .next()
            .map(|v| v.parse::<i64>())
            .transpose()
            .map_err(|_| parse_err("value", "not an integer".into()))?;
        if parts.next().is_some() {
            return Err(parse_err("value", "trailing fields".into()));
        }
        if command.is_write() != value.is_some() {
            return Err(parse_err(
                "value",
                if command.is_write() {
                    "write command needs a value".into()
                } else {
                    "read command takes no value".into()
                },
            ));
        }
        transactions.push(MemTransaction {
            command,
            address,
            value,
        });
    }
    Ok(TraceFile {
        transactions,
        counters,
    })
}

fn parse_counters(comment: &str) -> Option<(u64, u64, u64)> {
    let mut reads = None;
    let mut writes = None;
    let mut internal = None;
    for kv in comment.split_whitespace() {
        let (k, v) = kv.split_once('=')?;
        let v = v.parse().ok()?;
        match k {
            "reads" => reads = Some(v),
            "writes" => writes = Some(v),
            "internal" => internal = Some(v),
            _ => return None,
        }
    }
    Some((reads?, writes?, internal?))
}
