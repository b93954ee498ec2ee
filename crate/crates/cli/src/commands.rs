use phoscil::cycle::{
    compare, find_limit_cycle, oscillation_condition, reference_cycle, return_map_contraction,
    write_compare_csv, CycleReport,
};
use phoscil::gspt::{
    default_eps_list, fixed_point, fold_passage_offset, passage_config, stability_scan,
    verify_generic_fold, Chart, FoldReport, ScanGrid,
};
use phoscil::integrator::{integrate, Direction, EventSpec, Trajectory, Vec2};
use phoscil::model::{rate_r, to_log, OriginalModel, State};
use phoscil::params::{DimlessParams, PhysicalParams};
use serde::Serialize;

use crate::args::{
    ChartArg, CycleArgs, FoldCheckArgs, FoldScalingArgs, Format, ScanArgs, SimulateArgs,
    TimescalesArgs,
};
use crate::config::{CliError, RunConfig};
use crate::output::{csv, csv_from, flag, json, num, opt, Artifact};

/// Artifacts to write and, when part of the result is unusable, the error
/// that sets the exit code after writing.
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub failure: Option<CliError>,
}

impl From<Vec<Artifact>> for Outcome {
    fn from(artifacts: Vec<Artifact>) -> Self {
        Self {
            artifacts,
            failure: None,
        }
    }
}

const EVENT_NAMES: [&str; 2] = ["s_max", "s_min"];

fn turning_point_events(dp: DimlessParams) -> [EventSpec<'static>; 2] {
    let ds = move |_: f64, x: Vec2| {
        dp.k_s - x[0] * rate_r(x[1].max(f64::MIN_POSITIVE), &dp).unwrap_or(0.0)
    };
    [
        EventSpec::new(EVENT_NAMES[0], Direction::Falling, ds).with_scale(dp.k_s),
        EventSpec::new(EVENT_NAMES[1], Direction::Rising, ds).with_scale(dp.k_s),
    ]
}

#[derive(Serialize)]
struct TrajectoryColumns {
    t: Vec<f64>,
    s: Vec<f64>,
    h: Vec<f64>,
    sigma: Vec<f64>,
    #[serde(rename = "pS")]
    ps: Vec<Option<f64>>,
    #[serde(rename = "pH")]
    ph: Vec<Option<f64>>,
    events: Vec<EventRow>,
}

#[derive(Serialize)]
struct EventRow {
    event: &'static str,
    t: f64,
    s: f64,
    h: f64,
}

fn log_coords(x: Vec2, phys: &PhysicalParams) -> (f64, f64) {
    to_log(State::from_vec(x), phys).map_or((f64::INFINITY, f64::INFINITY), |l| (l.ps, l.ph))
}

/// The trajectory in (s, h), (sigma, h) and (pS, pH), plus its events, named
/// `<stem>_sh`, `<stem>_sigma_h`, `<stem>_ps_ph` and `<stem>_events`.
fn trajectory_artifacts(
    cfg: &RunConfig,
    stem: &str,
    traj: &Trajectory,
) -> Result<Vec<Artifact>, CliError> {
    let prov = &cfg.provenance;
    let eps = cfg.es.eps;
    let events: Vec<EventRow> = traj
        .events
        .iter()
        .map(|e| EventRow {
            event: EVENT_NAMES.get(e.index).copied().unwrap_or("event"),
            t: e.t,
            s: e.x[0],
            h: e.x[1],
        })
        .collect();
    let samples = || traj.t.iter().zip(&traj.x);
    match cfg.format {
        Format::Csv => {
            let sh = samples().map(|(t, x)| vec![num(*t), num(x[0]), num(x[1])]);
            let sigma = samples().map(|(t, x)| vec![num(*t), num(eps * x[0]), num(x[1])]);
            let logs = samples().map(|(t, x)| {
                let (ps, ph) = log_coords(*x, &cfg.phys);
                vec![num(*t), num(ps), num(ph)]
            });
            let ev = events
                .iter()
                .map(|e| vec![e.event.to_string(), num(e.t), num(e.s), num(e.h)]);
            Ok(vec![
                csv(prov, &format!("{stem}_sh"), "t,s,h", sh),
                csv(prov, &format!("{stem}_sigma_h"), "t,sigma,h", sigma),
                csv(prov, &format!("{stem}_ps_ph"), "t,pS,pH", logs),
                csv(prov, &format!("{stem}_events"), "event,t,s,h", ev),
            ])
        }
        Format::Json => {
            let finite = |v: f64| v.is_finite().then_some(v);
            let logs: Vec<(f64, f64)> = traj.x.iter().map(|x| log_coords(*x, &cfg.phys)).collect();
            let cols = TrajectoryColumns {
                t: traj.t.clone(),
                s: traj.x.iter().map(|x| x[0]).collect(),
                h: traj.x.iter().map(|x| x[1]).collect(),
                sigma: traj.x.iter().map(|x| eps * x[0]).collect(),
                ps: logs.iter().map(|l| finite(l.0)).collect(),
                ph: logs.iter().map(|l| finite(l.1)).collect(),
                events,
            };
            Ok(vec![json(prov, stem, &cols)?])
        }
    }
}

pub fn simulate(cfg: &RunConfig, args: &SimulateArgs) -> Result<Outcome, CliError> {
    if !(args.t_start.is_finite() && args.t_end.is_finite() && args.t_end >= args.t_start) {
        return Err(CliError::Args(format!(
            "invalid time span [{}, {}]",
            args.t_start, args.t_end
        )));
    }
    let dpe = cfg.dp_eps();
    let x0 = match args.x0 {
        Some((s, h)) => [s, h],
        None => {
            let fp = fixed_point(&dpe)?;
            [fp.s_star, 2.0 * fp.h_star]
        }
    };
    if !(x0[0] >= 0.0 && x0[1] > 0.0) {
        return Err(CliError::Args(format!(
            "initial state ({}, {}) must have s >= 0 and h > 0",
            x0[0], x0[1]
        )));
    }
    let traj = if args.t_end == args.t_start {
        Trajectory {
            t: vec![args.t_start],
            x: vec![x0],
            ..Trajectory::default()
        }
    } else {
        let events = turning_point_events(dpe);
        integrate(
            &OriginalModel::new(dpe),
            x0,
            (args.t_start, args.t_end),
            &cfg.integrator,
            &events,
        )?
    };
    Ok(trajectory_artifacts(cfg, "trajectory", &traj)?.into())
}

pub fn scan(cfg: &RunConfig, args: &ScanArgs) -> Result<Outcome, CliError> {
    let grid = ScanGrid {
        kh_over_ks: args.kh_over_ks,
        inv_alpha: args.inv_alpha,
        shape: args.grid,
    };
    let map = stability_scan(&cfg.dp, &grid)?;
    let prov = &cfg.provenance;
    Ok(match cfg.format {
        Format::Csv => {
            let mut table = Vec::new();
            map.write_csv(&mut table)?;
            let hopf = map.hopf.iter().map(|p| vec![num(p[0]), num(p[1])]);
            vec![
                csv_from(prov, "scan", &table),
                csv(prov, "hopf", "kh_over_ks,inv_alpha", hopf),
            ]
        }
        Format::Json => vec![json(prov, "scan", &map)?],
    }
    .into())
}

fn charts(choice: Option<ChartArg>) -> Vec<Chart> {
    match choice {
        Some(ChartArg::A) => vec![Chart::A],
        Some(ChartArg::B) => vec![Chart::B],
        None => vec![Chart::A, Chart::B],
    }
}

const FOLD_HEADER: &str = "chart,slow,fast,g0_value,dg0_fast,d2g0_fast,dg0_slow,f0_value,\
fd_g0_value,fd_dg0_fast,fd_d2g0_fast,fd_dg0_slow,fd_f0_value,cf_d2g0_fast,cf_dg0_slow,cf_f0_value,\
is_fold,nondegenerate,regular,transversal,matches_closed_form,is_generic";

fn fold_row(r: &FoldReport) -> Vec<String> {
    // (sigma, h) for chart A, (s, eta) for chart B
    let [slow, fast] = r.fold_location;
    let fd = r.finite_difference;
    let cf = r.closed_form;
    vec![
        format!("{:?}", r.chart),
        num(slow),
        num(fast),
        num(r.g0_value),
        num(r.dg0_fast),
        num(r.d2g0_fast),
        num(r.dg0_slow),
        num(r.f0_value),
        num(fd.g0_value),
        num(fd.dg0_fast),
        num(fd.d2g0_fast),
        num(fd.dg0_slow),
        num(fd.f0_value),
        num(cf.d2g0_fast),
        num(cf.dg0_slow),
        num(cf.f0_value),
        flag(r.is_fold),
        flag(r.nondegenerate),
        flag(r.regular),
        flag(r.transversal),
        flag(r.matches_closed_form),
        flag(r.is_generic),
    ]
}

pub fn fold_check(cfg: &RunConfig, args: &FoldCheckArgs) -> Result<Outcome, CliError> {
    let reports = charts(args.chart)
        .into_iter()
        .map(|c| verify_generic_fold(c, &cfg.es, &cfg.dp))
        .collect::<Result<Vec<_>, _>>()?;
    let prov = &cfg.provenance;
    let artifacts = match cfg.format {
        Format::Csv => vec![csv(
            prov,
            "fold_check",
            FOLD_HEADER,
            reports.iter().map(fold_row),
        )],
        Format::Json => vec![json(prov, "fold_check", &reports)?],
    };
    let failure = reports
        .iter()
        .find(|r| !r.is_generic)
        .map(|r| CliError::Numeric(format!("fold of chart {:?} is not generic", r.chart)));
    Ok(Outcome { artifacts, failure })
}

const CYCLE_HEADER: &str = "eps,period,tau_B_to_A,tau_A_to_B,T_acid,T_basic,ratio_analytic,ratio_measured,\
period_min_anchor,winding_number,converged,n_transient_periods,last_return_diff,s_max_s,s_max_h,s_min_s,s_min_h";

fn cycle_row(c: &CycleReport) -> Vec<String> {
    vec![
        num(c.eps),
        num(c.period),
        num(c.tau_b_to_a),
        num(c.tau_a_to_b),
        opt(c.analytic.map(|a| a.t_acid)),
        opt(c.analytic.map(|a| a.t_basic)),
        opt(c.analytic.map(|a| a.ratio)),
        num(c.measured_ratio()),
        num(c.period_min_anchor),
        num(c.winding_number),
        flag(c.converged),
        c.n_transient_periods.to_string(),
        num(c.last_return_diff),
        num(c.turning_points.0.s),
        num(c.turning_points.0.h),
        num(c.turning_points.1.s),
        num(c.turning_points.1.h),
    ]
}

#[derive(Serialize)]
struct CycleOutput<'a> {
    cycle: &'a CycleReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    reference: Option<phoscil::cycle::ReferenceCycle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    return_map: Option<phoscil::cycle::ReturnMapReport>,
}

pub fn cycle(cfg: &RunConfig, args: &CycleArgs) -> Result<Outcome, CliError> {
    let x0 = args.x0.map(|(s, h)| [s, h]);
    let report = find_limit_cycle(&cfg.dp, &cfg.es, x0, &cfg.integrator)?;
    let reference = args
        .reference
        .then(|| reference_cycle(&cfg.phys, &cfg.integrator))
        .transpose()?;
    let return_map = args
        .return_map
        .map(|d| return_map_contraction(&cfg.dp, &cfg.es, &cfg.integrator, d, 2))
        .transpose()?;
    let prov = &cfg.provenance;
    let mut artifacts = match cfg.format {
        Format::Csv => {
            let mut out = vec![csv(prov, "cycle", CYCLE_HEADER, [cycle_row(&report)])];
            if let Some(r) = &reference {
                out.push(csv(
                    prov,
                    "reference_cycle",
                    "period_s,period,tau_B_to_A_s,tau_A_to_B_s,converged,n_transient_periods",
                    [vec![
                        num(r.period_s),
                        num(r.period),
                        num(r.tau_b_to_a_s),
                        num(r.tau_a_to_b_s),
                        flag(r.converged),
                        r.n_transient_periods.to_string(),
                    ]],
                ));
            }
            if let Some(m) = &return_map {
                let rows = m.displacements.iter().enumerate().map(|(k, d)| {
                    let ratio = if k == 0 { f64::NAN } else { m.ratios[k - 1] };
                    vec![k.to_string(), num(*d), num(ratio)]
                });
                out.push(csv(prov, "return_map", "return,displacement,ratio", rows));
            }
            out
        }
        Format::Json => vec![json(
            prov,
            "cycle",
            &CycleOutput {
                cycle: &report,
                reference,
                return_map,
            },
        )?],
    };
    artifacts.extend(trajectory_artifacts(
        cfg,
        "cycle_trajectory",
        &report.trajectory,
    )?);
    let failure = (!report.converged).then(|| {
        CliError::Numeric(format!(
            "cycle not converged after {} transient periods (last return difference {:e})",
            report.n_transient_periods, report.last_return_diff
        ))
    });
    Ok(Outcome { artifacts, failure })
}

pub fn timescales(cfg: &RunConfig, args: &TimescalesArgs) -> Result<Outcome, CliError> {
    let rows = compare(&cfg.dp, &cfg.es, &args.eps_list, &cfg.integrator);
    let prov = &cfg.provenance;
    let artifacts = match cfg.format {
        Format::Csv => {
            let mut table = Vec::new();
            write_compare_csv(&rows, &mut table)?;
            vec![csv_from(prov, "timescales", &table)]
        }
        Format::Json => vec![json(prov, "timescales", &rows)?],
    };
    let errors: Vec<String> = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("eps {}: {e}", r.eps)))
        .collect();
    let failure = (!errors.is_empty()).then(|| CliError::Numeric(errors.join("; ")));
    Ok(Outcome { artifacts, failure })
}

pub fn fold_scaling(cfg: &RunConfig, args: &FoldScalingArgs) -> Result<Outcome, CliError> {
    let eps_list = args.eps_list.clone().unwrap_or_else(default_eps_list);
    let pc = passage_config();
    let reports = charts(args.chart)
        .into_iter()
        .map(|c| fold_passage_offset(c, &eps_list, &cfg.dp, &cfg.es, &pc))
        .collect::<Result<Vec<_>, _>>()?;
    let prov = &cfg.provenance;
    Ok(match cfg.format {
        Format::Csv => {
            let rows = reports.iter().flat_map(|r| {
                r.points.iter().map(move |p| {
                    vec![
                        format!("{:?}", r.chart),
                        num(p.eps),
                        num(p.offset),
                        num(p.slow_at_section),
                        num(p.time),
                        p.n_steps.to_string(),
                        num(r.slope),
                        num(r.intercept),
                    ]
                })
            });
            vec![csv(
                prov,
                "fold_scaling",
                "chart,eps,offset,slow_at_section,time,n_steps,slope,intercept",
                rows,
            )]
        }
        Format::Json => vec![json(prov, "fold_scaling", &reports)?],
    }
    .into())
}

#[derive(Serialize)]
struct FixedPointOutput {
    fixed_point: phoscil::gspt::FixedPoint,
    classification: &'static str,
    oscillates: bool,
    transport_condition: bool,
    transport_margin: Option<f64>,
}

pub fn fixed_point_cmd(cfg: &RunConfig, rounded: bool) -> Result<Outcome, CliError> {
    let fp = fixed_point(&cfg.dp)?;
    // the transport condition is stated in physical rates; the rounded groups carry none
    let (holds, margin) = if rounded {
        (cfg.dp.admissible(), None)
    } else {
        let c = oscillation_condition(&cfg.phys);
        (c.holds, Some(c.margin))
    };
    let out = FixedPointOutput {
        fixed_point: fp,
        classification: fp.classification.label(),
        oscillates: fp.oscillates(),
        transport_condition: holds,
        transport_margin: margin,
    };
    let prov = &cfg.provenance;
    Ok(match cfg.format {
        Format::Csv => vec![csv(
            prov,
            "fixed_point",
            "s_star,h_star,trace,det,classification,oscillates,transport_condition,transport_margin",
            [vec![
                num(fp.s_star),
                num(fp.h_star),
                num(fp.trace),
                num(fp.det),
                out.classification.to_string(),
                flag(out.oscillates),
                flag(holds),
                opt(margin),
            ]],
        )],
        Format::Json => vec![json(prov, "fixed_point", &out)?],
    }
    .into())
}
