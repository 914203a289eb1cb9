use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use psumbw::catalog::{builtin_catalog, parse_network, STANDARD_NETWORKS};
use psumbw::report::{
    cmd_check, cmd_compare, cmd_min_bw, cmd_sweep, parse_macs, render_csv, render_markdown,
    render_savings_csv, render_savings_markdown, EvalOptions, ReportRow, DEFAULT_MACS,
};
use psumbw::{ControllerMode, Error, GroupMode, NetworkModel, Partition, Strategy};

/// Partial-sum bandwidth of channel-tiled convolution under a MAC budget
#[derive(Parser, Debug)]
#[command(name = "psumbw", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bandwidth floor: every activation read and written once
    MinBw(NetworkArgs),
    /// All four partitioning strategies per network and MAC budget
    Compare(EvalArgs),
    /// Passive vs active controller totals and savings per MAC budget
    Sweep(SweepArgs),
    /// Cross-check analytic model, tile simulator and controller on one layer
    Check(CheckArgs),
}

#[derive(Args, Debug)]
struct NetworkArgs {
    /// Built-in network (repeatable); `all` selects the eight standard networks
    #[arg(long = "network")]
    networks: Vec<String>,
    /// Layer catalog file (repeatable)
    #[arg(long = "file")]
    files: Vec<PathBuf>,
    /// Charge grouped convolutions per group or as dense layers
    #[arg(long, value_enum, default_value_t = Groups::Grouped)]
    groups: Groups,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[command(flatten)]
    networks: NetworkArgs,
    /// MAC budgets: a list `512,2048` or a doubling range `512..16384`
    #[arg(long)]
    macs: Option<String>,
    #[arg(long, value_enum, default_value_t = Controller::Passive)]
    controller: Controller,
    /// Let the optimal strategy minimize active-controller bandwidth
    #[arg(long)]
    reoptimize_active: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    eval: EvalArgs,
    #[arg(long, default_value = "optimal")]
    strategy: String,
    /// Print per-cell savings instead of the passive/active rows
    #[arg(long)]
    savings: bool,
}

#[derive(Args, Debug)]
struct CheckArgs {
    /// Layer record `name,wi,hi,k,stride,pad,cin,cout[,groups]`
    #[arg(long)]
    layer: String,
    /// Input channels per iteration
    #[arg(long)]
    m: usize,
    /// Output channels per iteration
    #[arg(long)]
    n: usize,
    #[arg(long, value_enum, default_value_t = Controller::Passive)]
    controller: Controller,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Groups {
    Grouped,
    Dense,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Controller {
    Passive,
    Active,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum Format {
    Csv,
    Md,
}

impl From<Groups> for GroupMode {
    fn from(g: Groups) -> Self {
        match g {
            Groups::Grouped => GroupMode::Grouped,
            Groups::Dense => GroupMode::Dense,
        }
    }
}

impl From<Controller> for ControllerMode {
    fn from(c: Controller) -> Self {
        match c {
            Controller::Passive => ControllerMode::Passive,
            Controller::Active => ControllerMode::Active,
        }
    }
}

fn load_networks(args: &NetworkArgs) -> Result<Vec<NetworkModel>, Error> {
    let mut out = Vec::new();
    for name in &args.networks {
        if name == "all" {
            for std_name in STANDARD_NETWORKS {
                out.push(builtin_catalog(std_name)?);
            }
        } else {
            out.push(builtin_catalog(name)?);
        }
    }
    for path in &args.files {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Report(format!("{}: {e}", path.display())))?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "custom".into());
        out.push(parse_network(name, &text)?);
    }
    Ok(out)
}

fn render(rows: &[ReportRow], format: Format) -> Result<String, Error> {
    match format {
        Format::Csv => render_csv(rows),
        Format::Md => Ok(render_markdown(rows)),
    }
}

fn run(cli: Cli) -> Result<String, Error> {
    match cli.command {
        Command::MinBw(args) => render(&cmd_min_bw(&load_networks(&args)?)?, args.format),
        Command::Compare(args) => {
            let networks = load_networks(&args.networks)?;
            let macs = match &args.macs {
                Some(spec) => parse_macs(spec)?,
                None => vec![512, 2048, 16384],
            };
            let options = EvalOptions {
                groups: args.networks.groups.into(),
                reoptimize_active: args.reoptimize_active,
            };
            let rows = cmd_compare(&networks, &macs, args.controller.into(), options)?;
            render(&rows, args.networks.format)
        }
        Command::Sweep(args) => {
            let eval = &args.eval;
            let networks = load_networks(&eval.networks)?;
            let macs = match &eval.macs {
                Some(spec) => parse_macs(spec)?,
                None => DEFAULT_MACS.to_vec(),
            };
            let strategy: Strategy = args.strategy.parse()?;
            let options = EvalOptions {
                groups: eval.networks.groups.into(),
                reoptimize_active: eval.reoptimize_active,
            };
            let report = cmd_sweep(&networks, &macs, strategy, options)?;
            match (args.savings, eval.networks.format) {
                (true, Format::Csv) => Ok(render_savings_csv(&report.savings)),
                (false, Format::Csv) => render_csv(&report.rows),
                (true, Format::Md) => Ok(render_savings_markdown(&report.savings)),
                (false, Format::Md) => Ok(render_markdown(&report.rows)),
            }
        }
        Command::Check(args) => {
            let net = parse_network("check", &args.layer)?;
            let layer = &net.layers()[0];
            let report = cmd_check(layer, Partition::new(args.m, args.n), args.controller.into())?;
            if !report.passed() {
                return Err(Error::Report(format!("{report}\ncross-check failed")));
            }
            Ok(format!("{report}\n"))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
