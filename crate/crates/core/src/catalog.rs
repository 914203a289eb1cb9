//! Convolution layer shapes and network catalogs.
//!
//! A catalog is plain text, one layer per line:
//!
//! ```text
//! # name,wi,hi,k,stride,pad,cin,cout,groups
//! conv1,224,224,3,1,1,3,64,1
//! ```
//!
//! `#` starts a comment line, blank lines are skipped and `groups` may be
//! omitted (it defaults to 1). Built-in catalogs ship as files under `data/`
//! in the same format.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Geometry of one convolution layer.
///
/// `cin` and `cout` are the input and output channel counts. Kernels are
/// square (`k` x `k`) and padding is symmetric.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConvLayerShape {
    pub name: String,
    pub wi: usize,
    pub hi: usize,
    pub k: usize,
    pub stride: usize,
    pub pad: usize,
    pub cin: usize,
    pub cout: usize,
    pub groups: usize,
}

impl ConvLayerShape {
    /// Builds a validated layer with `groups = 1`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        wi: usize,
        hi: usize,
        k: usize,
        stride: usize,
        pad: usize,
        cin: usize,
        cout: usize,
    ) -> Result<Self> {
        let layer = Self {
            name: name.into(),
            wi,
            hi,
            k,
            stride,
            pad,
            cin,
            cout,
            groups: 1,
        };
        layer.validate()?;
        Ok(layer)
    }

    pub fn with_groups(mut self, groups: usize) -> Result<Self> {
        self.groups = groups;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |reason: String| {
            Err(Error::InvalidShape {
                layer: self.name.clone(),
                reason,
            })
        };
        for (field, v) in [
            ("wi", self.wi),
            ("hi", self.hi),
            ("k", self.k),
            ("stride", self.stride),
            ("cin", self.cin),
            ("cout", self.cout),
            ("groups", self.groups),
        ] {
            if v == 0 {
                return fail(format!("{field} must be at least 1"));
            }
        }
        if !self.cin.is_multiple_of(self.groups) {
            return fail("cin not divisible by groups".into());
        }
        if !self.cout.is_multiple_of(self.groups) {
            return fail("cout not divisible by groups".into());
        }
        if output_extent(self.wi, self.k, self.stride, self.pad).is_none() {
            return fail("kernel larger than padded input width".into());
        }
        if output_extent(self.hi, self.k, self.stride, self.pad).is_none() {
            return fail("kernel larger than padded input height".into());
        }
        Ok(())
    }

    /// Output spatial size `(wo, ho)`.
    pub fn output_dims(&self) -> Result<(usize, usize)> {
        let wo = output_extent(self.wi, self.k, self.stride, self.pad);
        let ho = output_extent(self.hi, self.k, self.stride, self.pad);
        match (wo, ho) {
            (Some(wo), Some(ho)) if self.stride > 0 => Ok((wo, ho)),
            _ => Err(Error::InvalidShape {
                layer: self.name.clone(),
                reason: "output dimensions below 1".into(),
            }),
        }
    }

    /// `wo * ho`; the layer must already be valid.
    pub fn output_pixels(&self) -> u64 {
        let (wo, ho) = self
            .output_dims()
            .expect("output_pixels called on an invalid layer");
        (wo * ho) as u64
    }

    pub fn input_pixels(&self) -> u64 {
        (self.wi * self.hi) as u64
    }

    /// Input channels seen by one group.
    pub fn group_cin(&self) -> usize {
        self.cin / self.groups
    }

    /// Output channels produced by one group.
    pub fn group_cout(&self) -> usize {
        self.cout / self.groups
    }

    /// The same layer treated as an ungrouped convolution.
    pub fn densified(&self) -> Self {
        Self {
            groups: 1,
            ..self.clone()
        }
    }

    pub fn to_record(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.name,
            self.wi,
            self.hi,
            self.k,
            self.stride,
            self.pad,
            self.cin,
            self.cout,
            self.groups
        )
    }
}

fn output_extent(input: usize, k: usize, stride: usize, pad: usize) -> Option<usize> {
    if stride == 0 {
        return None;
    }
    (input + 2 * pad)
        .checked_sub(k)
        .map(|span| span / stride + 1)
}

/// Standalone form of [`ConvLayerShape::output_dims`].
pub fn output_dims(layer: &ConvLayerShape) -> Result<(usize, usize)> {
    layer.output_dims()
}

/// How grouped convolutions are charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GroupMode {
    /// Each group is an independent convolution of `cin/g -> cout/g` channels.
    #[default]
    Grouped,
    /// Groups are ignored and the layer is charged as a dense convolution.
    Dense,
}

impl fmt::Display for GroupMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GroupMode::Grouped => "grouped",
            GroupMode::Dense => "dense",
        })
    }
}

impl FromStr for GroupMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grouped" => Ok(GroupMode::Grouped),
            "dense" => Ok(GroupMode::Dense),
            other => Err(Error::Report(format!("unknown groups mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkModel {
    pub name: String,
    layers: Vec<ConvLayerShape>,
}

impl NetworkModel {
    /// Validates every layer and rejects empty or duplicate-named layer lists.
    pub fn new(name: impl Into<String>, layers: Vec<ConvLayerShape>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::NoLayers);
        }
        let mut seen = HashSet::new();
        for layer in &layers {
            layer.validate()?;
            if !seen.insert(layer.name.as_str()) {
                return Err(Error::DuplicateLayer(layer.name.clone()));
            }
        }
        Ok(Self {
            name: name.into(),
            layers,
        })
    }

    pub fn layers(&self) -> &[ConvLayerShape] {
        &self.layers
    }

    pub fn with_group_mode(&self, mode: GroupMode) -> Self {
        match mode {
            GroupMode::Grouped => self.clone(),
            GroupMode::Dense => Self {
                name: self.name.clone(),
                layers: self.layers.iter().map(ConvLayerShape::densified).collect(),
            },
        }
    }

    /// Serializes to the catalog text format. Re-parsing yields an equal model.
    pub fn to_catalog_text(&self) -> String {
        let mut out = String::from("# name,wi,hi,k,stride,pad,cin,cout,groups\n");
        for layer in &self.layers {
            out.push_str(&layer.to_record());
            out.push('\n');
        }
        out
    }
}

const FIELDS: [&str; 9] = [
    "name", "wi", "hi", "k", "stride", "pad", "cin", "cout", "groups",
];

/// Parses a catalog document. Errors carry the 1-based line number and the
/// offending field.
pub fn parse_network(name: impl Into<String>, text: &str) -> Result<NetworkModel> {
    let mut layers = Vec::new();
    let mut seen = HashSet::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let layer = parse_record(line_no, line)?;
        if !seen.insert(layer.name.clone()) {
            return Err(Error::Parse {
                line: line_no,
                field: "name",
                reason: format!("duplicate layer name `{}`", layer.name),
            });
        }
        layers.push(layer);
    }
    NetworkModel::new(name, layers)
}

fn parse_record(line_no: usize, line: &str) -> Result<ConvLayerShape> {
    let parts: Vec<&str> = line.split(',').map(str::trim).collect();
    if parts.len() < 8 {
        return Err(Error::Parse {
            line: line_no,
            field: FIELDS[parts.len()],
            reason: "missing field".into(),
        });
    }
    if parts.len() > 9 {
        return Err(Error::Parse {
            line: line_no,
            field: "groups",
            reason: format!("expected at most 9 fields, found {}", parts.len()),
        });
    }
    if parts[0].is_empty() {
        return Err(Error::Parse {
            line: line_no,
            field: "name",
            reason: "empty layer name".into(),
        });
    }
    let mut nums = [0usize; 8];
    nums[7] = 1;
    for (i, text) in parts.iter().enumerate().skip(1) {
        nums[i - 1] = text.parse().map_err(|_| Error::Parse {
            line: line_no,
            field: FIELDS[i],
            reason: format!("`{text}` is not a non-negative integer"),
        })?;
    }
    let [wi, hi, k, stride, pad, cin, cout, groups] = nums;
    let layer = ConvLayerShape {
        name: parts[0].to_string(),
        wi,
        hi,
        k,
        stride,
        pad,
        cin,
        cout,
        groups,
    };
    layer.validate().map_err(|e| match e {
        Error::InvalidShape { reason, .. } => Error::Parse {
            line: line_no,
            field: field_for_reason(&reason),
            reason,
        },
        other => other,
    })?;
    Ok(layer)
}

fn field_for_reason(reason: &str) -> &'static str {
    let first = reason.split_whitespace().next().unwrap_or_default();
    FIELDS.iter().copied().find(|f| *f == first).unwrap_or("k")
}

/// The eight networks evaluated by default.
pub const STANDARD_NETWORKS: [&str; 8] = [
    "alexnet",
    "vgg16",
    "squeezenet",
    "googlenet",
    "resnet18",
    "resnet50",
    "mobilenetv2",
    "mnasnet",
];

/// Alternative transcriptions shipped alongside the standard set.
pub const VARIANT_NETWORKS: [&str; 3] = ["alexnet224", "squeezenet11", "mobilenetv1"];

const BUILTIN: [(&str, &str); 11] = [
    ("alexnet", include_str!("../data/alexnet.csv")),
    ("alexnet224", include_str!("../data/alexnet224.csv")),
    ("vgg16", include_str!("../data/vgg16.csv")),
    ("squeezenet", include_str!("../data/squeezenet.csv")),
    ("squeezenet11", include_str!("../data/squeezenet11.csv")),
    ("googlenet", include_str!("../data/googlenet.csv")),
    ("resnet18", include_str!("../data/resnet18.csv")),
    ("resnet50", include_str!("../data/resnet50.csv")),
    ("mobilenetv2", include_str!("../data/mobilenetv2.csv")),
    ("mobilenetv1", include_str!("../data/mobilenetv1.csv")),
    ("mnasnet", include_str!("../data/mnasnet.csv")),
];

pub fn builtin_names() -> impl Iterator<Item = &'static str> {
    BUILTIN.iter().map(|(name, _)| *name)
}

/// Raw catalog text of a built-in network.
pub fn builtin_text(name: &str) -> Result<&'static str> {
    BUILTIN
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
        .ok_or_else(|| Error::UnknownNetwork(name.to_string()))
}

pub fn builtin_catalog(name: &str) -> Result<NetworkModel> {
    parse_network(name, builtin_text(name)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(wi: usize, k: usize, stride: usize, pad: usize) -> (usize, usize) {
        ConvLayerShape::new("t", wi, wi, k, stride, pad, 1, 1)
            .unwrap()
            .output_dims()
            .unwrap()
    }

    #[test]
    fn output_dims_examples() {
        assert_eq!(dims(224, 3, 1, 1), (224, 224));
        // (227 - 11) / 4 + 1
        assert_eq!(dims(227, 11, 4, 0), (55, 55));
        // (8 + 2 - 3) / 2 + 1
        assert_eq!(dims(8, 3, 2, 1), (4, 4));
    }

    #[test]
    fn kernel_larger_than_input_is_rejected() {
        let err = ConvLayerShape::new("big", 2, 2, 5, 1, 0, 1, 1).unwrap_err();
        assert!(matches!(err, Error::InvalidShape { .. }));
        assert!(ConvLayerShape::new("ok", 2, 2, 5, 1, 2, 1, 1).is_ok());
    }

    #[test]
    fn zero_fields_rejected() {
        assert!(ConvLayerShape::new("z", 8, 8, 3, 0, 1, 4, 4).is_err());
        assert!(ConvLayerShape::new("z", 8, 8, 3, 1, 1, 0, 4).is_err());
    }

    #[test]
    fn parse_single_line() {
        let net = parse_network("one", "c1,8,8,3,1,1,4,8,1").unwrap();
        assert_eq!(net.layers().len(), 1);
        assert_eq!(net.layers()[0].output_dims().unwrap(), (8, 8));
    }

    #[test]
    fn parse_defaults_groups_and_skips_comments() {
        let text = "# header\n\nc1,8,8,3,1,1,4,8\n  # indented comment\nc2,8,8,1,1,0,8,8,2\n";
        let net = parse_network("n", text).unwrap();
        assert_eq!(net.layers()[0].groups, 1);
        assert_eq!(net.layers()[1].groups, 2);
    }

    #[test]
    fn parse_empty_document() {
        assert_eq!(parse_network("e", "").unwrap_err(), Error::NoLayers);
        assert_eq!(parse_network("e", "# only\n\n").unwrap_err(), Error::NoLayers);
    }

    #[test]
    fn parse_group_divisibility() {
        let err = parse_network("g", "c1,8,8,3,1,1,5,8,2").unwrap_err();
        assert!(err.to_string().contains("cin not divisible by groups"), "{err}");
        assert!(matches!(err, Error::Parse { line: 1, field: "cin", .. }));
    }

    #[test]
    fn parse_diagnostics_name_line_and_field() {
        let err = parse_network("x", "# c\nc1,8,8,3,1,1,4,8\nc2,8,eight,3,1,1,4,8").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, field: "hi", .. }), "{err:?}");

        let err = parse_network("x", "c1,8,8,3,1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, field: "pad", .. }), "{err:?}");

        let err = parse_network("x", "c1,8,8,3,1,1,4,8,1\nc1,8,8,3,1,1,4,8,1").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, field: "name", .. }), "{err:?}");

        let err = parse_network("x", "c1,8,8,3,1,1,4,-8").unwrap_err();
        assert!(matches!(err, Error::Parse { field: "cout", .. }), "{err:?}");

        let err = parse_network("x", "c1,8,8,3,0,1,4,8").unwrap_err();
        assert!(matches!(err, Error::Parse { field: "stride", .. }), "{err:?}");
    }

    #[test]
    fn builtin_shapes() {
        let vgg = builtin_catalog("vgg16").unwrap();
        assert_eq!(vgg.layers().len(), 13);
        let first = &vgg.layers()[0];
        assert_eq!((first.cin, first.cout, first.wi, first.hi), (3, 64, 224, 224));

        let alex = builtin_catalog("alexnet").unwrap();
        assert_eq!(alex.layers().len(), 5);
        assert_eq!((alex.layers()[0].k, alex.layers()[0].stride), (11, 4));
        assert_eq!(alex.layers()[0].wi, 227);
        let alex224 = builtin_catalog("alexnet224").unwrap();
        assert_eq!(alex224.layers()[0].wi, 224);
        assert_eq!(alex224.layers()[0].output_dims().unwrap(), (55, 55));

        let r50 = builtin_catalog("resnet50").unwrap();
        assert!(r50.layers().iter().any(|l| l.k == 1));
        assert_eq!(r50.layers().len(), 53);
    }

    #[test]
    fn every_builtin_is_valid() {
        for name in builtin_names() {
            let net = builtin_catalog(name).unwrap();
            for layer in net.layers() {
                layer.validate().unwrap();
                layer.output_dims().unwrap();
            }
        }
        for name in STANDARD_NETWORKS.iter().chain(VARIANT_NETWORKS.iter()) {
            assert!(builtin_text(name).is_ok(), "{name}");
        }
    }

    #[test]
    fn unknown_builtin() {
        assert_eq!(
            builtin_catalog("lenet").unwrap_err(),
            Error::UnknownNetwork("lenet".into())
        );
    }

    #[test]
    fn densified_drops_groups() {
        let net = builtin_catalog("mobilenetv2").unwrap();
        assert!(net.layers().iter().any(|l| l.groups > 1));
        let dense = net.with_group_mode(GroupMode::Dense);
        assert!(dense.layers().iter().all(|l| l.groups == 1));
    }
}
