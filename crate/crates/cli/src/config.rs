use std::path::PathBuf;

use phoscil::integrator::IntegratorConfig;
use phoscil::{
    AnalysisError, DimlessParams, EpsSplit, IntegrationError, ModelError, ParamError,
    PhysicalParams,
};
use serde::Serialize;
use thiserror::Error;

use crate::args::{Format, GlobalArgs};
use crate::output::num;

pub const EXIT_NUMERIC: u8 = 1;
pub const EXIT_IO: u8 = 2;
pub const EXIT_ARGS: u8 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Args(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Numeric(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Numeric(_) => EXIT_NUMERIC,
            Self::Io(_) => EXIT_IO,
            Self::Args(_) => EXIT_ARGS,
        }
    }
}

impl From<ParamError> for CliError {
    fn from(e: ParamError) -> Self {
        match e {
            ParamError::Io { .. } => Self::Io(e.to_string()),
            _ => Self::Args(e.to_string()),
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        Self::Numeric(e.to_string())
    }
}

impl From<IntegrationError> for CliError {
    fn from(e: IntegrationError) -> Self {
        match e {
            IntegrationError::InvalidInput(_) => Self::Args(e.to_string()),
            _ => Self::Numeric(e.to_string()),
        }
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Param(p) => p.into(),
            AnalysisError::Integration(i) => i.into(),
            AnalysisError::Precondition(_) => Self::Args(e.to_string()),
            _ => Self::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Io(e.to_string())
    }
}

/// Everything a subcommand needs, resolved from the global flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub phys: PhysicalParams,
    pub dp: DimlessParams,
    /// Split at the requested eps; C and A come from the parameter set.
    pub es: EpsSplit,
    pub integrator: IntegratorConfig,
    pub out_dir: Option<PathBuf>,
    pub format: Format,
    pub provenance: Provenance,
}

/// Echo of the inputs, written at the top of every output.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub params_source: String,
    pub overrides: Vec<String>,
    pub eps: f64,
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "A")]
    pub a: f64,
    pub rtol: f64,
    pub atol: f64,
    pub dimensionless: DimlessParams,
}

impl Provenance {
    pub fn csv_header(&self) -> String {
        let mut out = format!("# {} {} {}\n", self.tool, self.version, self.command);
        out.push_str(&format!("# params: {}\n", self.params_source));
        if !self.overrides.is_empty() {
            out.push_str(&format!("# overrides: {}\n", self.overrides.join(" ")));
        }
        out.push_str(&format!(
            "# eps = {}, C = {}, A = {}, rtol = {}, atol = {}\n",
            num(self.eps),
            num(self.c),
            num(self.a),
            num(self.rtol),
            num(self.atol)
        ));
        out.push_str(&format!("# {}\n", self.dimensionless));
        out
    }
}

impl RunConfig {
    pub fn resolve(args: &GlobalArgs, command: String) -> Result<Self, CliError> {
        let mut overrides = Vec::new();
        let (phys, dp, params_source) = if args.rounded_table2 {
            (
                PhysicalParams::table1(),
                DimlessParams::table2_rounded(),
                "rounded dimensionless table".to_string(),
            )
        } else {
            let (mut phys, source) = match &args.params {
                Some(path) => (PhysicalParams::load(path)?, path.display().to_string()),
                None => (PhysicalParams::table1(), "laboratory values".to_string()),
            };
            for (name, value) in &args.overrides {
                phys.set(name, *value)?;
                overrides.push(format!("{name}={value}"));
            }
            (phys, phys.derive_dimensionless()?, source)
        };
        // C and A are fixed by the parameter set at the reference eps
        let es = dp.derive_eps_split(phoscil::DEFAULT_EPS_REF)?;
        let es = match args.eps {
            Some(eps) => {
                overrides.push(format!("eps={eps}"));
                es.at(eps)
            }
            None => es,
        };
        let integrator = IntegratorConfig::with_tolerances(args.rtol, args.atol);
        integrator.validate()?;
        Ok(Self {
            phys,
            dp,
            es,
            integrator,
            out_dir: args.out_dir.clone(),
            format: args.format,
            provenance: Provenance {
                tool: "phoscil",
                version: env!("CARGO_PKG_VERSION"),
                command,
                params_source,
                overrides,
                eps: es.eps,
                c: es.c,
                a: es.a,
                rtol: args.rtol,
                atol: args.atol,
                dimensionless: dp,
            },
        })
    }

    /// The parameter set of the eps-split system at the configured eps.
    pub fn dp_eps(&self) -> DimlessParams {
        self.dp.with_split(&self.es)
    }
}

/// Worker count: `--threads` capped by PHOSCIL_THREADS, either alone, or the
/// runtime default when neither is set.
pub fn worker_count(threads: Option<u16>, env: Option<&str>) -> Result<Option<usize>, CliError> {
    let cap = match env.map(str::trim).filter(|s| !s.is_empty()) {
        Some(s) => match s.parse::<usize>() {
            Ok(n) if n > 0 => Some(n),
            _ => {
                return Err(CliError::Args(format!(
                    "PHOSCIL_THREADS must be a positive integer, got `{s}`"
                )))
            }
        },
        None => None,
    };
    Ok(match (threads.map(usize::from), cap) {
        (Some(t), Some(c)) => Some(t.min(c)),
        (t, c) => t.or(c),
    })
}
