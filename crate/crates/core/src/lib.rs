//! Bandwidth modeling for channel-tiled convolution on accelerators with a
//! fixed MAC budget.
//!
//! * [`catalog`]: layer shapes, network catalogs and the built-in networks.
//! * [`analytic`]: closed-form input and partial-sum traffic of a partition.
//! * [`partition`]: picking `(m, n)` per layer under a MAC budget.
//! * [`tilesim`]: the tiled loop nest executed and counted, used as an oracle.
//! * [`memctrl`]: a memory controller that accumulates partial sums locally.
//! * [`report`]: the tables produced by the `psumbw` binary.

pub mod analytic;
pub mod catalog;
pub mod error;
pub mod memctrl;
pub mod partition;
pub mod reference;
pub mod report;
pub mod tilesim;

pub use analytic::{
    active_saving, continuous_objective, input_bandwidth, layer_bandwidth, layer_min_bandwidth,
    min_bandwidth, output_bandwidth, BandwidthBreakdown, ControllerMode, Partition,
};
pub use catalog::{builtin_catalog, output_dims, parse_network, ConvLayerShape, GroupMode, NetworkModel};
pub use error::{Error, Result};
pub use memctrl::{
    engine_trace, run_trace, Activation, ControllerState, MemCommand, MemTransaction, TrafficCounters,
};
pub use partition::{feasible, network_bandwidth, optimal_real_m, partition, AcceleratorConfig, Strategy};
pub use tilesim::{simulate_layer, verify_numeric, AccessCounts};
