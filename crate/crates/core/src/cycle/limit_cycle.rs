use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, ParamError};
use crate::gspt::fixed_point;
use crate::integrator::{
    integrate, integrate_until_event, Direction, EventSpec, IntegratorConfig, Trajectory, Vec2,
    VectorField,
};
use crate::model::{rate_r, OriginalModel, ReferenceModel, State};
use crate::params::{DimlessParams, EpsSplit, PhysicalParams};

use super::timescales::{analytic_timescales, AnalyticTimescales};

/// Two successive s-maxima closer than this in (sigma, h) end the transient.
pub const CONVERGENCE_TOL: f64 = 1e-8;
/// Transient periods integrated before giving up.
pub const TRANSIENT_BUDGET: usize = 20;

/// Event index of the s-maximum (ds/dt falls through zero).
pub const EVENT_S_MAX: usize = 0;
/// Event index of the s-minimum (ds/dt rises through zero).
pub const EVENT_S_MIN: usize = 1;

/// One period of the limit cycle of the single-eps system, delimited by
/// consecutive s-maxima, with its split into the two phases.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CycleReport {
    pub eps: f64,
    /// tau_b_to_a + tau_a_to_b.
    pub period: f64,
    /// From the s-minimum to the next s-maximum: the acidic phase.
    pub tau_b_to_a: f64,
    /// From the s-maximum to the next s-minimum: the basic phase.
    pub tau_a_to_b: f64,
    /// States at the s-maximum and the s-minimum.
    pub turning_points: (State, State),
    pub analytic: Option<AnalyticTimescales>,
    pub converged: bool,
    pub n_transient_periods: usize,
    /// (sigma, h) distance between the last two transient s-maxima.
    pub last_return_diff: f64,
    /// Period measured between consecutive s-minima instead.
    pub period_min_anchor: f64,
    /// Winding number of the recorded period around the equilibrium.
    pub winding_number: f64,
    /// The recorded period, starting at the s-maximum at t = 0.
    #[serde(skip)]
    pub trajectory: Trajectory,
}

impl CycleReport {
    /// tau_a_to_b / tau_b_to_a, comparable with the analytic t_basic/t_acid.
    pub fn measured_ratio(&self) -> f64 {
        self.tau_a_to_b / self.tau_b_to_a
    }

    /// Turns a report whose transient did not settle into an error.
    pub fn require_converged(self) -> Result<Self, AnalysisError> {
        if self.converged {
            Ok(self)
        } else {
            Err(AnalysisError::NotConverged {
                periods: self.n_transient_periods,
                last_diff: self.last_return_diff,
            })
        }
    }
}

/// Problem-independent part of a cycle measurement.
pub(crate) struct RawCycle {
    pub period: f64,
    pub tau_b_to_a: f64,
    pub tau_a_to_b: f64,
    pub x_max: Vec2,
    pub x_min: Vec2,
    pub converged: bool,
    pub n_transient: usize,
    pub last_diff: f64,
    pub period_min_anchor: f64,
    pub trajectory: Trajectory,
}

/// Settles onto the cycle by returns to the s-maximum, then records one
/// period. `ds` is ds/dt, `metric` measures the distance of two returns and
/// `chunk` bounds the time allowed for one period.
#[allow(clippy::too_many_arguments)]
pub(crate) fn measure<F: VectorField>(
    field: &F,
    ds: &(dyn Fn(Vec2) -> f64 + Sync),
    ds_scale: f64,
    metric: &dyn Fn(Vec2, Vec2) -> f64,
    center: Vec2,
    x0: Vec2,
    cfg: &IntegratorConfig,
    chunk: f64,
) -> Result<RawCycle, AnalysisError> {
    let s_max =
        || EventSpec::new("s-maximum", Direction::Falling, |_, x| ds(x)).with_scale(ds_scale);
    let s_min =
        || EventSpec::new("s-minimum", Direction::Rising, |_, x| ds(x)).with_scale(ds_scale);
    let quiet = IntegratorConfig {
        record_steps: false,
        ..*cfg
    };

    let mut x = x0;
    let mut prev: Option<Vec2> = None;
    let mut last_diff = f64::INFINITY;
    let mut converged = false;
    let mut n_transient = 0;
    for _ in 0..=TRANSIENT_BUDGET {
        let out = integrate_until_event(field, x, s_max(), &quiet, chunk)?;
        let Some((_, hit)) = out.hit() else {
            return Err(AnalysisError::ConvergesToEquilibrium(format!(
                "no s-maximum within t = {chunk}"
            )));
        };
        if metric(hit, center) < 1e-6 {
            return Err(AnalysisError::ConvergesToEquilibrium(
                "s-maxima approach the equilibrium".into(),
            ));
        }
        if let Some(p) = prev {
            n_transient += 1;
            last_diff = metric(p, hit);
            if last_diff < CONVERGENCE_TOL {
                converged = true;
                x = hit;
                break;
            }
        }
        prev = Some(hit);
        x = hit;
    }

    let events = [s_max().terminal(true), s_min()];
    let traj = integrate(field, x, (0.0, 3.0 * chunk), cfg, &events)?;
    let (tau_a_to_b, tau_b_to_a, x_min) = segment_times_with_state(&traj)?;
    let min_out = integrate_until_event(field, x_min, s_min(), &quiet, chunk)?;
    let period_min_anchor = min_out
        .hit()
        .map(|(t, _)| t)
        .ok_or_else(|| AnalysisError::MalformedCycle("no second s-minimum".into()))?;
    Ok(RawCycle {
        period: tau_b_to_a + tau_a_to_b,
        tau_b_to_a,
        tau_a_to_b,
        x_max: x,
        x_min,
        converged,
        n_transient,
        last_diff,
        period_min_anchor,
        trajectory: traj,
    })
}

fn segment_times_with_state(traj: &Trajectory) -> Result<(f64, f64, Vec2), AnalysisError> {
    let t0 = traj.t_start();
    let min_hit = traj.hits(EVENT_S_MIN).next().ok_or_else(|| {
        AnalysisError::MalformedCycle("no s-minimum in the recorded period".into())
    })?;
    let max_hit = traj
        .hits(EVENT_S_MAX)
        .find(|h| h.t > min_hit.t)
        .ok_or_else(|| AnalysisError::MalformedCycle("no s-maximum after the s-minimum".into()))?;
    if traj.hits(EVENT_S_MIN).filter(|h| h.t < max_hit.t).count() != 1 {
        return Err(AnalysisError::MalformedCycle(
            "more than one s-minimum within one period".into(),
        ));
    }
    Ok((min_hit.t - t0, max_hit.t - min_hit.t, min_hit.x))
}

/// Phase durations (tau_b_to_a, tau_a_to_b) of a trajectory that starts at an
/// s-maximum and records the s-maximum (index 0) and s-minimum (index 1)
/// events over one period.
pub fn segment_times(traj: &Trajectory) -> Result<(f64, f64), AnalysisError> {
    let (a_to_b, b_to_a, _) = segment_times_with_state(traj)?;
    Ok((b_to_a, a_to_b))
}

/// Number of turns of a recorded trajectory around `center`, from the dense
/// output, with each coordinate scaled by its range along the trajectory.
pub fn winding_number(traj: &Trajectory, center: Vec2) -> f64 {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for x in &traj.x {
        for i in 0..2 {
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
        }
    }
    let scale = [
        (hi[0] - lo[0]).max(f64::MIN_POSITIVE),
        (hi[1] - lo[1]).max(f64::MIN_POSITIVE),
    ];
    let angle = |x: Vec2| ((x[1] - center[1]) / scale[1]).atan2((x[0] - center[0]) / scale[0]);
    let mut total = 0.0;
    let mut last = angle(traj.x[0]);
    let mut add = |x: Vec2| {
        let a = angle(x);
        let mut d = a - last;
        while d > PI {
            d -= 2.0 * PI;
        }
        while d < -PI {
            d += 2.0 * PI;
        }
        total += d;
        last = a;
    };
    if traj.segments.is_empty() {
        traj.x.iter().skip(1).for_each(|&x| add(x));
    } else {
        // a terminal event truncates the last step, so each segment ends at the next sample
        for (seg, &t_end) in traj.segments.iter().zip(&traj.t[1..]) {
            for k in 1..=16 {
                add(seg.eval(seg.t0 + (t_end - seg.t0) * k as f64 / 16.0));
            }
        }
    }
    total / (2.0 * PI)
}

/// Default initial state (s_*, 2 h_*) of the single-eps system.
pub fn default_initial_state(dp: &DimlessParams, es: &EpsSplit) -> Result<Vec2, AnalysisError> {
    let fp = fixed_point(&dp.with_split(es))?;
    Ok([fp.s_star, 2.0 * fp.h_star])
}

/// Finds the attracting limit cycle of the single-eps system and measures one
/// period between consecutive s-maxima.
pub fn find_limit_cycle(
    dp: &DimlessParams,
    es: &EpsSplit,
    x0: Option<Vec2>,
    cfg: &IntegratorConfig,
) -> Result<CycleReport, AnalysisError> {
    cfg.validate()?;
    if !(es.eps > 0.0 && es.eps.is_finite()) {
        return Err(ParamError::NonPositive {
            name: "eps".into(),
            value: es.eps,
        }
        .into());
    }
    let dpe = dp.with_split(es);
    dpe.validate()?;
    let fp = fixed_point(&dpe)?;
    if !fp.oscillates() {
        return Err(AnalysisError::ConvergesToEquilibrium(format!(
            "equilibrium classified as {} (trace {:.3e}, det {:.3e})",
            fp.classification.label(),
            fp.trace,
            fp.det
        )));
    }
    let x0 = x0.unwrap_or([fp.s_star, 2.0 * fp.h_star]);
    let analytic = analytic_timescales(dp, es).ok();
    let chunk = analytic.map_or(1e3 / es.eps, |a| 5.0 * a.t_total);
    let field = OriginalModel::new(dpe);
    let ds =
        move |x: Vec2| dpe.k_s - x[0] * rate_r(x[1].max(f64::MIN_POSITIVE), &dpe).unwrap_or(0.0);
    let eps = es.eps;
    let metric = move |a: Vec2, b: Vec2| (eps * (a[0] - b[0])).abs().max((a[1] - b[1]).abs());
    let raw = measure(
        &field,
        &ds,
        dpe.k_s,
        &metric,
        [fp.s_star, fp.h_star],
        x0,
        cfg,
        chunk,
    )?;
    let winding_number = winding_number(&raw.trajectory, [fp.s_star, fp.h_star]);
    Ok(CycleReport {
        eps,
        period: raw.period,
        tau_b_to_a: raw.tau_b_to_a,
        tau_a_to_b: raw.tau_a_to_b,
        turning_points: (State::from_vec(raw.x_max), State::from_vec(raw.x_min)),
        analytic,
        converged: raw.converged,
        n_transient_periods: raw.n_transient,
        last_return_diff: raw.last_diff,
        period_min_anchor: raw.period_min_anchor,
        winding_number,
        trajectory: raw.trajectory,
    })
}

/// Limit cycle of the reference model in physical time.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReferenceCycle {
    /// Period in seconds.
    pub period_s: f64,
    /// Period in the dimensionless time k_max t of the simplified model.
    pub period: f64,
    pub tau_b_to_a_s: f64,
    pub tau_a_to_b_s: f64,
    pub converged: bool,
    pub n_transient_periods: usize,
}

/// Finds the limit cycle of the reference model, started from the default
/// initial state of the simplified model.
pub fn reference_cycle(
    phys: &PhysicalParams,
    cfg: &IntegratorConfig,
) -> Result<ReferenceCycle, AnalysisError> {
    cfg.validate()?;
    let dp = phys.derive_dimensionless()?;
    let es = dp.derive_eps_split(crate::params::DEFAULT_EPS_REF)?;
    let fp = fixed_point(&dp)?;
    let x0 = [fp.s_star, (2.0 * fp.h_star).min(1.0)];
    let k_max = phys.k_max();
    let chunk = analytic_timescales(&dp, &es).map_or(1e4, |a| 5.0 * a.t_total) / k_max;
    let model = ReferenceModel::new(*phys);
    let ds = move |x: Vec2| {
        let h = x[1].clamp(f64::MIN_POSITIVE, 1.0);
        let s = x[0].clamp(0.0, 1.0);
        -model.k_cat(s, h) * s + model.phys.k_s * (1.0 - s)
    };
    let metric = |a: Vec2, b: Vec2| (a[0] - b[0]).abs().max((a[1] - b[1]).abs());
    let raw = measure(
        &model,
        &ds,
        phys.k_s,
        &metric,
        [fp.s_star, fp.h_star],
        x0,
        cfg,
        chunk,
    )?;
    Ok(ReferenceCycle {
        period_s: raw.period,
        period: raw.period * k_max,
        tau_b_to_a_s: raw.tau_b_to_a,
        tau_a_to_b_s: raw.tau_a_to_b,
        converged: raw.converged,
        n_transient_periods: raw.n_transient,
    })
}
