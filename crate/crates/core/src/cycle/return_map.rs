use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::gspt::{Manifolds, START_FRACTION_A};
use crate::integrator::{integrate_until_event, Direction, EventSpec, IntegratorConfig, Vec2};
use crate::model::OriginalModel;
use crate::params::{DimlessParams, EpsSplit};

use super::limit_cycle::find_limit_cycle;

/// Successive returns of a perturbed point to the section upstream of the
/// acidic fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnMapReport {
    pub eps: f64,
    /// Section {sigma = sigma_1} with sigma_1 = 0.6 sigma_A, crossed with s increasing.
    pub section_sigma: f64,
    /// h where the limit cycle crosses the section.
    pub cycle_h: f64,
    /// |h - cycle_h| for the initial point and each return.
    pub displacements: Vec<f64>,
    /// Smallest displacement the integrator resolves: 100 (rtol |h| + atol).
    pub resolution: f64,
    /// displacements[k + 1] / max(displacements[k], resolution).
    pub ratios: Vec<f64>,
}

impl ReturnMapReport {
    pub fn max_ratio(&self) -> f64 {
        self.ratios.iter().cloned().fold(0.0, f64::max)
    }
}

/// Perturbs the cycle's crossing of the section by `delta` in h and follows
/// `returns` successive returns of the first-return map.
pub fn return_map_contraction(
    dp: &DimlessParams,
    es: &EpsSplit,
    cfg: &IntegratorConfig,
    delta: f64,
    returns: usize,
) -> Result<ReturnMapReport, AnalysisError> {
    let cycle = find_limit_cycle(dp, es, None, cfg)?.require_converged()?;
    let m = Manifolds::new(*dp, *es);
    let section_sigma = START_FRACTION_A * m.fold_a()[0];
    let s1 = section_sigma / es.eps;
    let field = OriginalModel::new(dp.with_split(es));
    let t_max = 3.0 * cycle.period;
    let quiet = IntegratorConfig {
        record_steps: false,
        ..*cfg
    };
    let cross = |x: Vec2| -> Result<Vec2, AnalysisError> {
        let ev = EventSpec::new("sigma = sigma_1", Direction::Rising, move |_, x: Vec2| {
            x[0] - s1
        })
        .with_scale(s1);
        integrate_until_event(&field, x, ev, &quiet, t_max)?
            .hit()
            .map(|(_, x)| x)
            .ok_or(AnalysisError::NoHit { eps: es.eps, t_max })
    };
    let on_cycle = cross(cycle.turning_points.0.to_vec())?;
    let cycle_h = on_cycle[1];
    let mut x = [s1, cycle_h + delta];
    let mut displacements = vec![delta.abs()];
    for _ in 0..returns {
        x = cross(x)?;
        displacements.push((x[1] - cycle_h).abs());
    }
    // the contraction is so strong that one return already reaches the
    // integration error; a displacement is never taken below what is resolved
    let resolution = 100.0 * (cfg.rtol * cycle_h.abs() + cfg.atol);
    let ratios = displacements
        .windows(2)
        .map(|w| w[1] / w[0].max(resolution))
        .collect();
    Ok(ReturnMapReport {
        eps: es.eps,
        section_sigma,
        cycle_h,
        displacements,
        resolution,
        ratios,
    })
}
