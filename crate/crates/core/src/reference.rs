//! Published reference bandwidths, in million activations per inference,
//! for the eight standard networks (same order as
//! [`STANDARD_NETWORKS`](crate::catalog::STANDARD_NETWORKS)).

/// Minimum bandwidth (every activation read and written once).
pub const MIN_BANDWIDTH: [f64; 8] = [0.823, 20.095, 7.304, 7.889, 4.666, 28.349, 10.273, 11.001];

/// MAC budgets of [`STRATEGY_TOTALS`].
pub const STRATEGY_MACS: [u64; 3] = [512, 2048, 16384];

/// Passive totals per network and budget, in the order
/// max-input, max-output, equal-macs, optimal.
pub const STRATEGY_TOTALS: [[[f64; 4]; 3]; 8] = [
    [[61.9, 94.2, 26.2, 25.1], [52.2, 64.6, 13.0, 12.6], [9.2, 10.9, 7.3, 4.3]],
    [[1170.3, 1938.6, 494.2, 442.5], [909.5, 1309.3, 269.3, 237.2], [207.1, 241.1, 151.0, 83.5]],
    [[199.6, 244.8, 65.9, 52.0], [53.6, 105.2, 47.4, 26.2], [12.6, 17.3, 34.8, 11.1]],
    [[431.7, 313.6, 102.5, 93.5], [174.6, 151.6, 61.2, 47.7], [23.8, 24.1, 41.6, 17.5]],
    [[281.2, 315.8, 96.1, 88.9], [205.0, 191.6, 50.9, 46.8], [35.1, 31.7, 26.9, 16.0]],
    [[5245.2, 5770.4, 1059.2, 952.6], [2909.0, 2830.4, 608.6, 479.5], [929.8, 682.5, 330.1, 168.5]],
    [[215.0, 209.2, 78.5, 68.3], [136.8, 116.2, 48.8, 35.0], [21.9, 21.0, 34.9, 16.1]],
    [[884.4, 1294.1, 405.3, 373.4], [722.0, 1030.3, 213.4, 183.0], [500.2, 516.3, 101.8, 66.0]],
];

/// MAC budgets of [`CONTROLLER_TOTALS`].
pub const CONTROLLER_MACS: [u64; 6] = [512, 1024, 2048, 4096, 8192, 16384];

/// Optimal-partition totals per network: `[passive, active]`, one entry per budget.
pub const CONTROLLER_TOTALS: [[[f64; 6]; 2]; 8] = [
    [[25.07, 17.54, 12.56, 8.89, 6.52, 4.32], [17.89, 12.62, 8.77, 6.38, 4.55, 3.51]],
    [[442.49, 321.79, 237.25, 169.43, 112.14, 83.54], [315.33, 225.44, 161.67, 123.36, 89.97, 63.67]],
    [[51.98, 37.47, 26.22, 20.04, 14.12, 11.10], [40.06, 27.35, 20.76, 14.87, 12.61, 9.78]],
    [[93.46, 67.17, 47.65, 35.20, 23.23, 17.51], [69.90, 48.37, 35.77, 25.95, 20.63, 14.62]],
    [[88.87, 63.56, 46.79, 32.86, 22.01, 16.02], [63.52, 45.53, 32.34, 24.74, 17.81, 12.90]],
    [[952.60, 691.13, 479.50, 349.75, 232.82, 168.46], [691.98, 480.49, 346.77, 242.90, 183.09, 121.93]],
    [[68.53, 46.74, 35.14, 25.22, 21.00, 16.02], [50.90, 39.03, 27.69, 22.66, 17.82, 15.58]],
    [[373.41, 264.36, 183.01, 128.27, 92.35, 65.96], [258.91, 188.75, 131.06, 94.92, 67.80, 50.40]],
];

/// Catalog transcriptions worth comparing for each standard network.
pub const CATALOG_CANDIDATES: [&[&str]; 8] = [
    &["alexnet", "alexnet224"],
    &["vgg16"],
    &["squeezenet", "squeezenet11"],
    &["googlenet"],
    &["resnet18"],
    &["resnet50"],
    &["mobilenetv2", "mobilenetv1"],
    &["mnasnet"],
];

use crate::analytic::{min_bandwidth, ControllerMode};
use crate::catalog::{builtin_catalog, GroupMode, STANDARD_NETWORKS};
use crate::error::Result;
use crate::partition::{network_bandwidth, AcceleratorConfig, Strategy};

/// One way of charging a standard network: which catalog, which group mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Accounting {
    pub catalog: &'static str,
    pub groups: GroupMode,
}

impl std::fmt::Display for Accounting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.catalog, self.groups)
    }
}

/// Every catalog candidate in both group modes.
pub fn accountings(network_index: usize) -> Vec<Accounting> {
    CATALOG_CANDIDATES[network_index]
        .iter()
        .flat_map(|&catalog| {
            [GroupMode::Grouped, GroupMode::Dense]
                .into_iter()
                .map(move |groups| Accounting { catalog, groups })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellDeviation {
    pub label: String,
    pub reference: f64,
    /// Computed value in million activations.
    pub computed: f64,
}

impl CellDeviation {
    /// Signed relative deviation, `computed / reference - 1`.
    pub fn relative(&self) -> f64 {
        self.computed / self.reference - 1.0
    }
}

/// Computed vs reference for the floor, the optimal passive totals and the
/// passive/active sweep of one standard network.
pub fn deviations(network_index: usize, accounting: Accounting) -> Result<Vec<CellDeviation>> {
    let net = builtin_catalog(accounting.catalog)?;
    let mut cells = vec![CellDeviation {
        label: "min-bw".into(),
        reference: MIN_BANDWIDTH[network_index],
        computed: min_bandwidth(&net) as f64 / 1e6,
    }];
    let total = |macs, mode| -> Result<f64> {
        let cfg = AcceleratorConfig::new(macs)
            .with_strategy(Strategy::Optimal)
            .with_mode(mode)
            .with_groups(accounting.groups);
        Ok(network_bandwidth(&net, &cfg)?.total as f64 / 1e6)
    };
    for (i, &macs) in STRATEGY_MACS.iter().enumerate() {
        cells.push(CellDeviation {
            label: format!("optimal@{macs}"),
            reference: STRATEGY_TOTALS[network_index][i][3],
            computed: total(macs, ControllerMode::Passive)?,
        });
    }
    for (m, mode) in [ControllerMode::Passive, ControllerMode::Active].into_iter().enumerate() {
        for (i, &macs) in CONTROLLER_MACS.iter().enumerate() {
            cells.push(CellDeviation {
                label: format!("{mode}@{macs}"),
                reference: CONTROLLER_TOTALS[network_index][m][i],
                computed: total(macs, mode)?,
            });
        }
    }
    Ok(cells)
}

/// Per-network discrepancy summary as Markdown, one row per accounting.
///
/// `tolerance` is the relative band (e.g. 0.25) a cell must fall in to count
/// as reproduced.
pub fn discrepancy_report(tolerance: f64) -> Result<String> {
    let mut out = String::new();
    out.push_str(&format!(
        "| network | accounting | min-bw (ref / ours) | worst cell | worst deviation | cells within {:.0}% |\n",
        tolerance * 100.0
    ));
    out.push_str("|---|---|---|---|---:|---:|\n");
    for (idx, name) in STANDARD_NETWORKS.iter().enumerate() {
        for acc in accountings(idx) {
            let cells = deviations(idx, acc)?;
            let worst = cells
                .iter()
                .max_by(|a, b| a.relative().abs().total_cmp(&b.relative().abs()))
                .expect("cells are never empty");
            let within = cells.iter().filter(|c| c.relative().abs() <= tolerance).count();
            out.push_str(&format!(
                "| {name} | {acc} | {:.3} / {:.3} | {} ({:.2} vs {:.2}) | {:+.1}% | {}/{} |\n",
                cells[0].reference,
                cells[0].computed,
                worst.label,
                worst.computed,
                worst.reference,
                worst.relative() * 100.0,
                within,
                cells.len()
            ));
        }
    }
    Ok(out)
}
