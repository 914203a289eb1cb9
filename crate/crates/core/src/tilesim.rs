//! Executable channel-tiled convolution that counts memory traffic.
//!
//! The loop order is output tile outer, input tile inner:
//!
//! ```text
//! for co_base in (0..N).step_by(n)
//!   for ci_base in (0..M).step_by(m)
//!     fetch input channels ci_base..ci_base+m          (wi*hi reads each)
//!     for co in co_base..co_base+n, for (x, y) in output
//!       psum = sum over the fetched channels and the kernel window
//!       update f_out[co][x][y] with psum
//! ```
//!
//! A fetched input tile is reused for the whole kernel window and for all
//! output channels of the tile, so each input activation costs one read per
//! output-tile iteration. Padded positions are synthesized and cost nothing.
//! The output update is decided by the state of the partial-sum memory: the
//! first update of an element is a plain write, later ones either read the
//! old value back (passive) or accumulate in place (active).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic::{ControllerMode, Partition};
use crate::catalog::ConvLayerShape;
use crate::error::{Error, Result};

/// Largest `wo*ho*M*N` the simulator accepts.
pub const MAX_SIM_WORK: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct AccessCounts {
    pub input_reads: u64,
    pub psum_reads: u64,
    pub psum_writes: u64,
    pub mac_ops: u64,
}

impl AccessCounts {
    /// Interconnect traffic, MACs excluded.
    pub fn traffic(&self) -> u64 {
        self.input_reads + self.psum_reads + self.psum_writes
    }
}

/// Input activations and weights for one layer, in `[c][y][x]` and
/// `[co][ci_in_group][ky][kx]` order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerTensors {
    pub input: Vec<i64>,
    pub weights: Vec<i64>,
}

impl LayerTensors {
    pub fn zeros(layer: &ConvLayerShape) -> Self {
        Self {
            input: vec![0; layer.cin * layer.wi * layer.hi],
            weights: vec![0; weight_len(layer)],
        }
    }

    /// Uniform integers in `-bound..=bound`.
    pub fn random(layer: &ConvLayerShape, seed: u64, bound: i64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut draw = |len| (0..len).map(|_| rng.gen_range(-bound..=bound)).collect();
        let input = draw(layer.cin * layer.wi * layer.hi);
        let weights = draw(weight_len(layer));
        Self { input, weights }
    }
}

fn weight_len(layer: &ConvLayerShape) -> usize {
    layer.cout * layer.group_cin() * layer.k * layer.k
}

pub fn check_size(layer: &ConvLayerShape) -> Result<()> {
    let work = layer.output_pixels() * layer.cin as u64 * layer.cout as u64;
    if work > MAX_SIM_WORK {
        return Err(Error::LayerTooLarge {
            layer: layer.name.clone(),
            work,
            limit: MAX_SIM_WORK,
        });
    }
    Ok(())
}

struct PsumMemory {
    values: Vec<i64>,
    written: Vec<bool>,
    mode: ControllerMode,
    reads: u64,
    writes: u64,
}

impl PsumMemory {
    fn new(len: usize, mode: ControllerMode) -> Self {
        Self {
            values: vec![0; len],
            written: vec![false; len],
            mode,
            reads: 0,
            writes: 0,
        }
    }

    fn update(&mut self, addr: usize, psum: i64) {
        if !self.written[addr] {
            self.values[addr] = psum;
            self.written[addr] = true;
        } else {
            match self.mode {
                ControllerMode::Passive => {
                    let old = self.values[addr];
                    self.reads += 1;
                    self.values[addr] = old + psum;
                }
                // read-update-write stays inside the controller
                ControllerMode::Active => self.values[addr] += psum,
            }
        }
        self.writes += 1;
    }
}

/// Runs the tiled loop nest, returning the output tensor (`[co][y][x]`) and
/// the access counts. Without tensors only the traffic is counted.
fn execute(
    layer: &ConvLayerShape,
    partition: Partition,
    mode: ControllerMode,
    tensors: Option<&LayerTensors>,
) -> Result<(Vec<i64>, AccessCounts)> {
    layer.validate()?;
    partition.check(layer)?;
    check_size(layer)?;

    let (wo, ho) = layer.output_dims()?;
    let (mg, ng) = (layer.group_cin(), layer.group_cout());
    let k = layer.k;
    let plane = layer.wi * layer.hi;
    let mut memory = PsumMemory::new(layer.cout * wo * ho, mode);
    let mut input_reads = 0u64;
    let mut mac_ops = 0u64;
    let mut tile = vec![0i64; partition.m * plane];

    for g in 0..layer.groups {
        for co_base in (0..ng).step_by(partition.n) {
            let co_end = (co_base + partition.n).min(ng);
            for ci_base in (0..mg).step_by(partition.m) {
                let ci_end = (ci_base + partition.m).min(mg);
                let width = ci_end - ci_base;

                for (slot, ci) in (ci_base..ci_end).enumerate() {
                    let channel = g * mg + ci;
                    for px in 0..plane {
                        input_reads += 1;
                        if let Some(t) = tensors {
                            tile[slot * plane + px] = t.input[channel * plane + px];
                        }
                    }
                }

                for co in co_base..co_end {
                    let out_channel = g * ng + co;
                    for oy in 0..ho {
                        for ox in 0..wo {
                            mac_ops += (width * k * k) as u64;
                            let psum = match tensors {
                                Some(t) => window_sum(layer, t, &tile, out_channel, ci_base, width, ox, oy),
                                None => 0,
                            };
                            memory.update((out_channel * ho + oy) * wo + ox, psum);
                        }
                    }
                }
            }
        }
    }

    let counts = AccessCounts {
        input_reads,
        psum_reads: memory.reads,
        psum_writes: memory.writes,
        mac_ops,
    };
    Ok((memory.values, counts))
}

#[allow(clippy::too_many_arguments)]
fn window_sum(
    layer: &ConvLayerShape,
    tensors: &LayerTensors,
    tile: &[i64],
    out_channel: usize,
    ci_base: usize,
    width: usize,
    ox: usize,
    oy: usize,
) -> i64 {
    let k = layer.k;
    let plane = layer.wi * layer.hi;
    let mut acc = 0;
    for slot in 0..width {
        let ci = ci_base + slot;
        let wbase = (out_channel * layer.group_cin() + ci) * k * k;
        for ky in 0..k {
            let iy = (oy * layer.stride + ky) as isize - layer.pad as isize;
            if iy < 0 || iy >= layer.hi as isize {
                continue;
            }
            for kx in 0..k {
                let ix = (ox * layer.stride + kx) as isize - layer.pad as isize;
                if ix < 0 || ix >= layer.wi as isize {
                    continue;
                }
                let x = tile[slot * plane + iy as usize * layer.wi + ix as usize];
                acc += x * tensors.weights[wbase + ky * k + kx];
            }
        }
    }
    acc
}

/// Counts the traffic of one tiled execution.
pub fn simulate_layer(layer: &ConvLayerShape, partition: Partition, mode: ControllerMode) -> Result<AccessCounts> {
    execute(layer, partition, mode, None).map(|(_, counts)| counts)
}

/// Tiled execution on concrete tensors.
pub fn tiled_conv(
    layer: &ConvLayerShape,
    partition: Partition,
    mode: ControllerMode,
    tensors: &LayerTensors,
) -> Result<(Vec<i64>, AccessCounts)> {
    execute(layer, partition, mode, Some(tensors))
}

/// Untiled reference convolution, output in `[co][y][x]` order.
pub fn direct_conv(layer: &ConvLayerShape, tensors: &LayerTensors) -> Result<Vec<i64>> {
    layer.validate()?;
    let (wo, ho) = layer.output_dims()?;
    let (mg, ng, k) = (layer.group_cin(), layer.group_cout(), layer.k);
    let mut out = vec![0i64; layer.cout * wo * ho];
    for co in 0..layer.cout {
        let g = co / ng;
        for oy in 0..ho {
            for ox in 0..wo {
                let mut acc = 0i64;
                for ci in 0..mg {
                    let channel = g * mg + ci;
                    for ky in 0..k {
                        for kx in 0..k {
                            let iy = (oy * layer.stride + ky) as isize - layer.pad as isize;
                            let ix = (ox * layer.stride + kx) as isize - layer.pad as isize;
                            if iy < 0 || ix < 0 || iy >= layer.hi as isize || ix >= layer.wi as isize {
                                continue;
                            }
                            let x = tensors.input[(channel * layer.hi + iy as usize) * layer.wi + ix as usize];
                            let w = tensors.weights[((co * mg + ci) * k + ky) * k + kx];
                            acc += x * w;
                        }
                    }
                }
                out[(co * ho + oy) * wo + ox] = acc;
            }
        }
    }
    Ok(out)
}

/// Compares tiled and direct convolution on seeded integer tensors, in both
/// controller modes.
pub fn verify_numeric(layer: &ConvLayerShape, partition: Partition, seed: u64) -> Result<bool> {
    verify_with(layer, partition, &LayerTensors::random(layer, seed, 8))
}

pub fn verify_with(layer: &ConvLayerShape, partition: Partition, tensors: &LayerTensors) -> Result<bool> {
    let expected = direct_conv(layer, tensors)?;
    for mode in [ControllerMode::Passive, ControllerMode::Active] {
        let (tiled, _) = tiled_conv(layer, partition, mode, tensors)?;
        if tiled != expected {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::layer_bandwidth;

    fn tiny() -> ConvLayerShape {
        ConvLayerShape::new("tiny", 2, 2, 1, 1, 0, 2, 2).unwrap()
    }

    fn counts(input_reads: u64, psum_reads: u64, psum_writes: u64, mac_ops: u64) -> AccessCounts {
        AccessCounts {
            input_reads,
            psum_reads,
            psum_writes,
            mac_ops,
        }
    }

    #[test]
    fn hand_enumerated_counts() {
        let p11 = Partition::new(1, 1);
        assert_eq!(
            simulate_layer(&tiny(), p11, ControllerMode::Passive).unwrap(),
            counts(16, 8, 16, 16)
        );
        assert_eq!(
            simulate_layer(&tiny(), Partition::new(2, 2), ControllerMode::Passive).unwrap(),
            counts(8, 0, 8, 16)
        );
        assert_eq!(
            simulate_layer(&tiny(), p11, ControllerMode::Active).unwrap(),
            counts(16, 0, 16, 16)
        );
    }

    #[test]
    fn matches_analytic_on_l1() {
        let l1 = ConvLayerShape::new("L1", 8, 8, 3, 1, 1, 8, 8).unwrap();
        let sim = simulate_layer(&l1, Partition::new(4, 2), ControllerMode::Passive).unwrap();
        assert_eq!(sim.traffic(), 3584);
        assert_eq!(sim.mac_ops, 8 * 8 * 9 * 8 * 8);
        let ana = layer_bandwidth(&l1, Partition::new(3, 3), ControllerMode::Active).unwrap();
        let sim = simulate_layer(&l1, Partition::new(3, 3), ControllerMode::Active).unwrap();
        assert_eq!(
            (sim.input_reads, sim.psum_reads, sim.psum_writes),
            (ana.input_reads, ana.psum_reads, ana.psum_writes)
        );
    }

    #[test]
    fn grouped_mac_count() {
        let layer = ConvLayerShape::new("g", 5, 5, 3, 2, 1, 6, 9).unwrap().with_groups(3).unwrap();
        let sim = simulate_layer(&layer, Partition::new(1, 2), ControllerMode::Passive).unwrap();
        let (wo, ho) = layer.output_dims().unwrap();
        assert_eq!(sim.mac_ops, (wo * ho * 9 * 6 * 9 / 3) as u64);
    }

    #[test]
    fn numeric_equivalence_examples() {
        assert!(verify_numeric(&tiny(), Partition::new(1, 1), 42).unwrap());
        for seed in 0..5 {
            assert!(verify_numeric(&tiny(), Partition::new(2, 1), seed).unwrap());
        }
        let layer = ConvLayerShape::new("s", 7, 5, 3, 2, 1, 6, 4).unwrap().with_groups(2).unwrap();
        assert!(verify_numeric(&layer, Partition::new(2, 1), 7).unwrap());
    }

    #[test]
    fn zero_tensors_give_zero_output() {
        let layer = ConvLayerShape::new("z", 6, 6, 3, 1, 1, 4, 3).unwrap();
        let zeros = LayerTensors::zeros(&layer);
        assert!(verify_with(&layer, Partition::new(3, 2), &zeros).unwrap());
        let (out, _) = tiled_conv(&layer, Partition::new(3, 2), ControllerMode::Passive, &zeros).unwrap();
        assert!(out.iter().all(|&v| v == 0));
    }

    #[test]
    fn direct_conv_small_case() {
        // 3x3 input, 2x2 kernel, stride 1, no padding, one channel.
        let layer = ConvLayerShape::new("d", 3, 3, 2, 1, 0, 1, 1).unwrap();
        let tensors = LayerTensors {
            input: vec![1, 2, 3, 4, 5, 6, 7, 8, 9],
            weights: vec![1, 0, 0, -1],
        };
        assert_eq!(direct_conv(&layer, &tensors).unwrap(), vec![-4, -4, -4, -4]);
    }

    #[test]
    fn partition_out_of_range() {
        assert!(matches!(
            simulate_layer(&tiny(), Partition::new(3, 1), ControllerMode::Passive),
            Err(Error::TileOutOfRange { tile: "m", .. })
        ));
    }

    #[test]
    fn oversize_layer_rejected() {
        let big = ConvLayerShape::new("big", 64, 64, 3, 1, 1, 64, 64).unwrap();
        assert!(matches!(
            simulate_layer(&big, Partition::new(1, 1), ControllerMode::Passive),
            Err(Error::LayerTooLarge { .. })
        ));
    }
}
