use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("layer `{layer}`: {reason}")]
    InvalidShape { layer: String, reason: String },

    #[error("line {line}: field `{field}`: {reason}")]
    Parse {
        line: usize,
        field: &'static str,
        reason: String,
    },

    #[error("no layers")]
    NoLayers,

    #[error("duplicate layer name `{0}`")]
    DuplicateLayer(String),

    #[error("unknown network `{0}`")]
    UnknownNetwork(String),

    #[error("no networks")]
    NoNetworks,

    #[error("layer `{layer}`: tile {tile}={value} outside 1..={max}")]
    TileOutOfRange {
        layer: String,
        tile: &'static str,
        value: usize,
        max: usize,
    },

    #[error("tile size must be positive, got {0}")]
    NonPositiveTile(f64),

    #[error("layer `{layer}` infeasible: needs at least {required} MACs, budget is {macs}")]
    Infeasible {
        layer: String,
        macs: u64,
        required: u64,
    },

    #[error("layer `{layer}` too large to simulate: wo*ho*M*N = {work} exceeds {limit}")]
    LayerTooLarge { layer: String, work: u64, limit: u64 },

    #[error("address {address} outside memory of {size} words")]
    AddressOutOfRange { address: usize, size: usize },

    #[error("{0} transaction carries no value")]
    MissingValue(&'static str),

    #[error("read transaction must not carry a value")]
    UnexpectedValue,

    #[error("transaction {index}: {source}")]
    Trace {
        index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{network} at {macs} MACs: `{strategy}` beats optimal ({better} < {optimal})")]
    NotMinimal {
        network: String,
        macs: u64,
        strategy: String,
        better: u64,
        optimal: u64,
    },

    #[error("invalid MAC list `{0}`")]
    MacList(String),

    #[error("{0}")]
    Report(String),
}
