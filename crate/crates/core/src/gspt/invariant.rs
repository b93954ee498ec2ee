use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::model::{rate_r, rhs, State};
use crate::params::DimlessParams;

use super::fixed_point::fixed_point;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySegment {
    /// {s = 0}: requires ds/dt > 0.
    Left,
    /// {s = s_nul, h in [h_nul, h_top]}: requires ds/dt < 0.
    Right,
    /// {h = h_top}: requires dh/dt <= K_h (1 - h_top) < 0.
    Top,
}

/// A boundary sample where the field does not point inwards.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub segment: BoundarySegment,
    pub s: f64,
    pub h: f64,
    /// The offending component of the field.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    pub h_top: f64,
    pub s_nul: f64,
    /// Lower intersection of {s = s_nul} with the s-nullcline.
    pub h_nul: f64,
    pub samples_checked: usize,
    pub violations: Vec<Violation>,
    pub all_inward: bool,
}

/// Samples the field on the straight parts of the boundary of the trapping
/// region bounded by {s = 0}, {s = s_nul}, {h = h_top} and the trajectory
/// through (s_nul, h_nul), and checks that it points inwards.
///
/// The right side is sampled on (h_nul, h_top], excluding the corner on the
/// nullcline where ds/dt vanishes.
pub fn invariant_region_check(
    dp: &DimlessParams,
    h_top: f64,
    s_nul: f64,
    samples: usize,
) -> Result<InvariantReport, AnalysisError> {
    if !(h_top > 1.0 && h_top.is_finite()) {
        return Err(AnalysisError::Precondition(format!(
            "h_top must exceed 1, got {h_top}"
        )));
    }
    if samples < 2 {
        return Err(AnalysisError::Precondition(
            "at least two samples per segment are needed".into(),
        ));
    }
    let fp = fixed_point(dp)?;
    let s_min = (dp.k_s / rate_r(h_top, dp)?).max(fp.s_star);
    if !(s_nul > s_min && s_nul.is_finite()) {
        return Err(AnalysisError::Precondition(format!(
            "s_nul must exceed {s_min}, got {s_nul}"
        )));
    }
    // K_s/r(h) = s_nul  <=>  (beta/eps1) h^2 + (1 - s_nul/K_s) h + beta eps1 = 0, smaller root
    let m = s_nul / dp.k_s - 1.0;
    let disc = m * m - 4.0 * dp.beta * dp.beta;
    if disc < 0.0 {
        return Err(AnalysisError::Precondition(format!(
            "s_nul = {s_nul} does not meet the s-nullcline"
        )));
    }
    let h_nul = 2.0 * dp.beta * dp.eps1 / (m + disc.sqrt());

    let mut violations = Vec::new();
    let n = samples;
    let frac = |k: usize| k as f64 / (n - 1) as f64;
    for k in 0..n {
        // left side, log-spaced towards h = 0 where the field varies fastest
        let h = h_top * (1e-8f64).powf(1.0 - frac(k));
        let f = rhs(State::new(0.0, h), dp)?;
        if !(f[0] > 0.0) {
            violations.push(Violation {
                segment: BoundarySegment::Left,
                s: 0.0,
                h,
                value: f[0],
            });
        }
    }
    for k in 1..=n {
        let h = h_nul * (h_top / h_nul).powf(k as f64 / n as f64);
        let f = rhs(State::new(s_nul, h), dp)?;
        if !(f[0] < 0.0) {
            violations.push(Violation {
                segment: BoundarySegment::Right,
                s: s_nul,
                h,
                value: f[0],
            });
        }
    }
    let bound = dp.k_h * (1.0 - h_top);
    for k in 0..n {
        let s = s_nul * frac(k);
        let f = rhs(State::new(s, h_top), dp)?;
        if !(f[1] <= bound && bound < 0.0) {
            violations.push(Violation {
                segment: BoundarySegment::Top,
                s,
                h: h_top,
                value: f[1],
            });
        }
    }
    Ok(InvariantReport {
        h_top,
        s_nul,
        h_nul,
        samples_checked: 3 * n,
        all_inward: violations.is_empty(),
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;

    fn dp() -> DimlessParams {
        PhysicalParams::table1().derive_dimensionless().unwrap()
    }

    #[test]
    fn laboratory_region_is_trapping() {
        let dp = dp();
        let rep = invariant_region_check(&dp, 1.2, 10.0, 500).unwrap();
        assert!(rep.all_inward, "{:?}", rep.violations.first());
        let r = rate_r(rep.h_nul, &dp).unwrap();
        assert!((dp.k_s / r - 10.0).abs() < 1e-9);
        assert!(rep.h_nul < dp.eps1);
    }

    #[test]
    fn preconditions() {
        let dp = dp();
        assert!(matches!(
            invariant_region_check(&dp, 0.5, 10.0, 10),
            Err(AnalysisError::Precondition(_))
        ));
        assert!(matches!(
            invariant_region_check(&dp, 1.2, 0.01, 10),
            Err(AnalysisError::Precondition(_))
        ));
    }

    #[test]
    fn tight_right_side_still_traps() {
        // with s_nul barely above K_s/r(h_top) the top of the right side
        // points inwards only just
        let dp = dp();
        let s_min = dp.k_s / rate_r(1.2, &dp).unwrap();
        let rep = invariant_region_check(&dp, 1.2, s_min * 1.000001, 50).unwrap();
        assert!(rep.all_inward);
    }
}
