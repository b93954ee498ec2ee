use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::integrator::IntegratorConfig;
use crate::params::{DimlessParams, EpsSplit};

use super::limit_cycle::find_limit_cycle;
use super::timescales::analytic_timescales;

/// One row of the analytic-versus-measured timescale table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub eps: f64,
    pub t_acid: Option<f64>,
    pub tau_b_to_a: Option<f64>,
    pub t_basic: Option<f64>,
    pub tau_a_to_b: Option<f64>,
    pub t_total: Option<f64>,
    pub tau: Option<f64>,
    /// t_basic / t_acid.
    pub ratio_analytic: Option<f64>,
    /// tau_a_to_b / tau_b_to_a.
    pub ratio_measured: Option<f64>,
    /// Why the row is incomplete, if it is.
    pub error: Option<String>,
}

pub const COMPARE_HEADER: &str =
    "eps,T_acid,tau_B_to_A,T_basic,tau_A_to_B,T,tau,ratio_analytic,ratio_measured";

/// Builds the timescale table for each eps in parallel. A failing row keeps
/// its analytic columns and records the error; other rows are unaffected.
pub fn compare(
    dp: &DimlessParams,
    es: &EpsSplit,
    eps_list: &[f64],
    cfg: &IntegratorConfig,
) -> Vec<CompareRow> {
    eps_list
        .par_iter()
        .map(|&eps| {
            let es = es.at(eps);
            let mut row = CompareRow {
                eps,
                t_acid: None,
                tau_b_to_a: None,
                t_basic: None,
                tau_a_to_b: None,
                t_total: None,
                tau: None,
                ratio_analytic: None,
                ratio_measured: None,
                error: None,
            };
            let mut errors = Vec::new();
            match analytic_timescales(dp, &es) {
                Ok(a) => {
                    row.t_acid = Some(a.t_acid);
                    row.t_basic = Some(a.t_basic);
                    row.t_total = Some(a.t_total);
                    row.ratio_analytic = Some(a.ratio);
                }
                Err(e) => errors.push(e.to_string()),
            }
            match find_limit_cycle(dp, &es, None, cfg).and_then(|c| c.require_converged()) {
                Ok(c) => {
                    row.tau_b_to_a = Some(c.tau_b_to_a);
                    row.tau_a_to_b = Some(c.tau_a_to_b);
                    row.tau = Some(c.period);
                    row.ratio_measured = Some(c.measured_ratio());
                }
                Err(e) => errors.push(e.to_string()),
            }
            if !errors.is_empty() {
                row.error = Some(errors.join("; "));
            }
            row
        })
        .collect()
}

/// Writes the table as CSV; missing values are written as `nan`.
pub fn write_compare_csv<W: Write>(rows: &[CompareRow], out: &mut W) -> io::Result<()> {
    writeln!(out, "{COMPARE_HEADER}")?;
    let num = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |v| format!("{v:.10e}"));
    for r in rows {
        writeln!(
            out,
            "{:.3e},{},{},{},{},{},{},{},{}",
            r.eps,
            num(r.t_acid),
            num(r.tau_b_to_a),
            num(r.t_basic),
            num(r.tau_a_to_b),
            num(r.t_total),
            num(r.tau),
            num(r.ratio_analytic),
            num(r.ratio_measured)
        )?;
    }
    Ok(())
}
