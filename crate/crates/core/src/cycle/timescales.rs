use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::params::{DimlessParams, EpsSplit, PhysicalParams};

/// Leading-order durations of the two slow phases of the relaxation cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticTimescales {
    /// Slow drift along the acidic branch: (beta/(eps C)) w(h_*).
    pub t_acid: f64,
    /// Slow drift along the basic branch: beta/(4 eps C h_*).
    pub t_basic: f64,
    /// t_acid + t_basic.
    pub t_total: f64,
    /// t_basic / t_acid = 1/(4 h_* w(h_*)), independent of eps.
    pub ratio: f64,
    /// w(h_*).
    pub w: f64,
}

/// w(h) = 1 - (1 - 2h) ln((2 - 2h)/(1 - 2h)), defined for 0 <= h < 1/2.
pub fn w_func(h: f64) -> Result<f64, ModelError> {
    if !(0.0..0.5).contains(&h) {
        return Err(ModelError::domain("w(h)", "0 <= h < 1/2", h));
    }
    let a = 1.0 - 2.0 * h;
    Ok(1.0 - a * ((2.0 - 2.0 * h) / a).ln())
}

/// Closed-form phase durations at the split's eps.
pub fn analytic_timescales(
    dp: &DimlessParams,
    es: &EpsSplit,
) -> Result<AnalyticTimescales, ModelError> {
    if !(es.eps > 0.0 && es.eps.is_finite()) {
        return Err(ModelError::domain("analytic timescales", "eps > 0", es.eps));
    }
    let h = dp.h_star();
    if !(h > 0.0 && h < 0.5) {
        return Err(ModelError::domain(
            "analytic timescales",
            "0 < h_* < 1/2",
            h,
        ));
    }
    let w = w_func(h)?;
    let unit = dp.beta / (es.eps * es.c);
    let t_acid = unit * w;
    let t_basic = unit / (4.0 * h);
    Ok(AnalyticTimescales {
        t_acid,
        t_basic,
        t_total: t_acid + t_basic,
        ratio: 1.0 / (4.0 * h * w),
        w,
    })
}

/// The analytic phase durations in seconds: the dimensionless values divided
/// by k_max = v_max/k_M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalTimescales {
    pub t_acid_s: f64,
    pub t_basic_s: f64,
}

pub fn physical_timescales(
    dp: &DimlessParams,
    es: &EpsSplit,
    phys: &PhysicalParams,
) -> Result<PhysicalTimescales, ModelError> {
    let t = analytic_timescales(dp, es)?;
    let k_max = phys.k_max();
    Ok(PhysicalTimescales {
        t_acid_s: t.t_acid / k_max,
        t_basic_s: t.t_basic / k_max,
    })
}

/// Differential-transport condition k_H/k_S > 2 S_ext/H_ext for oscillations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationCondition {
    pub holds: bool,
    /// k_H H_ext - 2 k_S S_ext, in M/s.
    pub margin: f64,
}

/// Evaluates the differential-transport condition, equivalent to alpha K_h > K_s.
/// A margin within rounding of zero counts as the boundary (condition false).
pub fn oscillation_condition(phys: &PhysicalParams) -> OscillationCondition {
    let (a, b) = (phys.k_h * phys.h_ext, 2.0 * phys.k_s * phys.s_ext);
    let margin = a - b;
    OscillationCondition {
        holds: margin > 8.0 * f64::EPSILON * a.max(b),
        margin,
    }
}
