use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::integrator::{
    integrate_until_event, Direction, EventOutcome, EventSpec, IntegratorConfig,
};
use crate::model::{ChartA, ChartB};
use crate::params::{DimlessParams, EpsSplit};

use super::fold::Chart;
use super::manifolds::{Manifolds, H_A};

/// Upstream start on the attracting acidic branch, as a fraction of sigma_A.
pub const START_FRACTION_A: f64 = 0.6;
/// Upstream start on the attracting neutral branch, as a multiple of s_B.
pub const START_FACTOR_B: f64 = 1.4;

/// Default eps values: five log-spaced values over two decades, deep enough
/// in the asymptotic regime for the eps^(2/3) law to dominate.
pub fn default_eps_list() -> Vec<f64> {
    log_spaced(1e-7, 1e-5, 5)
}

/// `n` log-spaced values from `lo` to `hi`, endpoints included.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|k| 10f64.powf(a + (b - a) * k as f64 / (n - 1) as f64))
        .collect()
}

/// Integrator settings for fold passages: the slow coordinate of chart A is
/// of order 1e-4, so the absolute tolerance is tightened accordingly.
pub fn passage_config() -> IntegratorConfig {
    IntegratorConfig {
        rtol: 1e-10,
        atol: 1e-14,
        record_steps: false,
        ..IntegratorConfig::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PassagePoint {
    pub eps: f64,
    /// |slow coordinate at the downstream section - slow coordinate of the fold|.
    pub offset: f64,
    /// Slow coordinate at the section.
    pub slow_at_section: f64,
    /// Chart time at the section (t for chart A, t/eps for chart B).
    pub time: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageReport {
    pub chart: Chart,
    pub fold_slow: f64,
    pub points: Vec<PassagePoint>,
    /// Least-squares slope of log10(offset) against log10(eps).
    pub slope: f64,
    pub intercept: f64,
}

impl PassageReport {
    /// Whether the offsets shrink strictly as eps decreases.
    pub fn monotone(&self) -> bool {
        let mut pts = self.points.clone();
        pts.sort_by(|a, b| a.eps.total_cmp(&b.eps));
        pts.windows(2).all(|w| w[0].offset < w[1].offset)
    }
}

/// Least-squares line y = slope x + intercept.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Measures how far past the fold a trajectory started on the attracting
/// branch crosses the downstream section, for each eps.
///
/// Chart A starts at sigma = 0.6 sigma_A on the upper branch and stops on
/// h = h_A/2; chart B starts at s = 1.4 s_B on the lower branch and stops on
/// eta = 2 eta_B. The offset is the distance of the slow coordinate at the
/// section from the fold's slow coordinate.
pub fn fold_passage_offset(
    chart: Chart,
    eps_list: &[f64],
    dp: &DimlessParams,
    es: &EpsSplit,
    cfg: &IntegratorConfig,
) -> Result<PassageReport, AnalysisError> {
    if eps_list.len() < 2 {
        return Err(AnalysisError::Precondition(
            "at least two eps values are needed for a slope".into(),
        ));
    }
    if eps_list.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(AnalysisError::Precondition(
            "eps values must be positive".into(),
        ));
    }
    let lo = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eps_list.iter().cloned().fold(0.0, f64::max);
    if (hi / lo).log10() < 1.5 - 1e-12 {
        return Err(AnalysisError::Precondition(format!(
            "eps values must span at least 1.5 decades, got [{lo:e}, {hi:e}]"
        )));
    }
    cfg.validate()?;
    dp.validate()?;
    let m = Manifolds::new(*dp, *es);
    let fold_slow = match chart {
        Chart::A => m.fold_a()[0],
        Chart::B => m.fold_b()[0],
    };
    let points = eps_list
        .par_iter()
        .map(|&eps| passage_point(chart, eps, &m, cfg))
        .collect::<Result<Vec<_>, _>>()?;
    let x: Vec<f64> = points.iter().map(|p| p.eps.log10()).collect();
    let y: Vec<f64> = points.iter().map(|p| p.offset.log10()).collect();
    let (slope, intercept) = fit_line(&x, &y);
    Ok(PassageReport {
        chart,
        fold_slow,
        points,
        slope,
        intercept,
    })
}

fn passage_point(
    chart: Chart,
    eps: f64,
    m: &Manifolds,
    cfg: &IntegratorConfig,
) -> Result<PassagePoint, AnalysisError> {
    let es = m.es.at(eps);
    match chart {
        Chart::A => {
            let field = ChartA::new(m.dp, es)?;
            let sigma_a = m.fold_a()[0];
            let x0 = m.attracting_point_a(START_FRACTION_A * sigma_a)?;
            let section = EventSpec::new("h = h_A/2", Direction::Falling, |_, x| x[1] - 0.5 * H_A);
            let t_max = 10.0 / eps;
            finish(
                integrate_until_event(&field, x0, section, cfg, t_max)?,
                0,
                sigma_a,
                eps,
                t_max,
            )
        }
        Chart::B => {
            let field = ChartB::new(m.dp, es)?;
            let [s_b, eta_b] = m.fold_b();
            let x0 = m.attracting_point_b(START_FACTOR_B * s_b)?;
            let section = EventSpec::new("eta = 2 eta_B", Direction::Rising, move |_, x| {
                x[1] - 2.0 * eta_b
            });
            let t_max = 100.0 / eps;
            finish(
                integrate_until_event(&field, x0, section, cfg, t_max)?,
                0,
                s_b,
                eps,
                t_max,
            )
        }
    }
}

fn finish(
    out: EventOutcome,
    slow: usize,
    fold_slow: f64,
    eps: f64,
    t_max: f64,
) -> Result<PassagePoint, AnalysisError> {
    let n_steps = out.trajectory().n_steps;
    match out.hit() {
        Some((t, x)) => Ok(PassagePoint {
            eps,
            offset: (x[slow] - fold_slow).abs(),
            slow_at_section: x[slow],
            time: t,
            n_steps,
        }),
        None => Err(AnalysisError::NoHit { eps, t_max }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_fit_is_exact_on_lines() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 / 3.0 * v - 1.5).collect();
        let (s, c) = fit_line(&x, &y);
        assert!((s - 2.0 / 3.0).abs() < 1e-14 && (c + 1.5).abs() < 1e-14);
    }

    #[test]
    fn log_spacing() {
        let v = log_spaced(1e-7, 1e-5, 5);
        assert_eq!(v.len(), 5);
        assert!((v[0] - 1e-7).abs() < 1e-20 && (v[4] - 1e-5).abs() < 1e-18);
        assert!((v[2] - 1e-6).abs() < 1e-19);
    }
}
