use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "phoscil",
    version,
    about = "Fast-slow analysis of the urea-urease pH oscillator"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// Physical parameter file (`name = value` lines or a JSON object).
    /// The laboratory values are used when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    pub params: Option<PathBuf>,

    /// Override one physical parameter, e.g. `--set k_H=0.01`. Repeatable.
    #[arg(long = "set", global = true, value_name = "NAME=VALUE", value_parser = parse_assignment)]
    pub overrides: Vec<(String, f64)>,

    /// Use the two-digit rounded dimensionless groups instead of deriving
    /// them from physical values.
    #[arg(long, global = true, conflicts_with_all = ["params", "overrides"])]
    pub rounded_table2: bool,

    /// Single small parameter of the eps-split system.
    #[arg(long, global = true, value_parser = positive)]
    pub eps: Option<f64>,

    #[arg(long, global = true, default_value_t = 1e-10, value_parser = positive)]
    pub rtol: f64,

    #[arg(long, global = true, default_value_t = 1e-12, value_parser = positive)]
    pub atol: f64,

    /// Directory for output files. Without it results go to standard output only.
    #[arg(long, global = true, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    #[arg(long, global = true, value_enum, ignore_case = true, default_value_t = Format::Csv)]
    pub format: Format,

    /// Worker threads for the parallel subcommands; capped by PHOSCIL_THREADS.
    #[arg(long, global = true, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChartArg {
    A,
    B,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate the eps-split system and write the trajectory in (s, h),
    /// (sigma, h) and (pS, pH) coordinates with an events sidecar.
    Simulate(SimulateArgs),
    /// Trace and determinant of the equilibrium over a (K_h/K_s, 1/alpha) grid.
    Scan(ScanArgs),
    /// Genericity check of the acidic (A) and neutral (B) folds.
    FoldCheck(FoldCheckArgs),
    /// Limit cycle, period and phase durations.
    Cycle(CycleArgs),
    /// Analytic versus measured timescales over a list of eps values.
    Timescales(TimescalesArgs),
    /// Offset of fold passages against eps with its log-log slope.
    FoldScaling(FoldScalingArgs),
    /// Equilibrium, its classification and the transport condition.
    FixedPoint,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Simulate(_) => "simulate",
            Self::Scan(_) => "scan",
            Self::FoldCheck(_) => "fold-check",
            Self::Cycle(_) => "cycle",
            Self::Timescales(_) => "timescales",
            Self::FoldScaling(_) => "fold-scaling",
            Self::FixedPoint => "fixed-point",
        }
    }
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 0.0)]
    pub t_start: f64,
    #[arg(long, default_value_t = 300.0)]
    pub t_end: f64,
    /// Initial state `s,h`; defaults to (s_*, 2 h_*).
    #[arg(long, value_name = "S,H", value_parser = parse_pair)]
    pub x0: Option<(f64, f64)>,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    #[arg(long, value_name = "LO:HI", default_value = "1:20", value_parser = parse_range)]
    pub kh_over_ks: (f64, f64),
    #[arg(long, value_name = "LO:HI", default_value = "1:12", value_parser = parse_range)]
    pub inv_alpha: (f64, f64),
    /// Samples along K_h/K_s and 1/alpha.
    #[arg(long, value_name = "NxM", default_value = "200x200", value_parser = parse_grid)]
    pub grid: (usize, usize),
}

#[derive(Debug, Args)]
pub struct FoldCheckArgs {
    /// Check only this chart.
    #[arg(long, value_enum, ignore_case = true)]
    pub chart: Option<ChartArg>,
}

#[derive(Debug, Args)]
pub struct CycleArgs {
    #[arg(long, value_name = "S,H", value_parser = parse_pair)]
    pub x0: Option<(f64, f64)>,
    /// Also measure the cycle of the reference model in physical time.
    #[arg(long)]
    pub reference: bool,
    /// Also follow a perturbation of this size through the first-return map.
    #[arg(long, value_name = "DELTA", value_parser = positive)]
    pub return_map: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TimescalesArgs {
    #[arg(long, value_name = "LIST", value_delimiter = ',', default_value = "1e-5,1e-4,1e-3", value_parser = positive)]
    pub eps_list: Vec<f64>,
}

#[derive(Debug, Args)]
pub struct FoldScalingArgs {
    #[arg(long, value_enum, ignore_case = true)]
    pub chart: Option<ChartArg>,
    /// Defaults to five log-spaced values on [1e-7, 1e-5].
    #[arg(long, value_name = "LIST", value_delimiter = ',', value_parser = positive)]
    pub eps_list: Option<Vec<f64>>,
}

fn positive(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` must be finite and positive"))
    }
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("`{s}` is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("`{s}` must be finite"))
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `S,H`, got `{s}`"))?;
    Ok((finite(a)?, finite(b)?))
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `LO:HI`, got `{s}`"))?;
    let (lo, hi) = (positive(a)?, positive(b)?);
    if hi < lo {
        return Err(format!("range `{s}` is reversed"));
    }
    Ok((lo, hi))
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected `NxM`, got `{s}`"))?;
    let n = |t: &str| match t.trim().parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("grid size `{t}` must be a positive integer")),
    };
    Ok((n(a)?, n(b)?))
}

fn parse_assignment(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected `NAME=VALUE`, got `{s}`"))?;
    Ok((k.trim().to_string(), positive(v)?))
}
