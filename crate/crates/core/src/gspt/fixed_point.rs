use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, ModelError};
use crate::integrator::{Mat2, Vec2, VectorField};
use crate::model::{jacobian, rate_r, OriginalModel, State};
use crate::params::DimlessParams;

/// Linear type of an equilibrium of a planar system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    RepellingNode,
    RepellingFocus,
    AttractingNode,
    AttractingFocus,
    Saddle,
    /// Zero trace or zero determinant.
    Marginal,
}

impl Classification {
    /// Classifies from the trace and determinant of the Jacobian.
    pub fn from_trace_det(trace: f64, det: f64) -> Self {
        if det < 0.0 {
            return Self::Saddle;
        }
        if det == 0.0 || trace == 0.0 {
            return Self::Marginal;
        }
        let node = trace * trace - 4.0 * det >= 0.0;
        match (trace > 0.0, node) {
            (true, true) => Self::RepellingNode,
            (true, false) => Self::RepellingFocus,
            (false, true) => Self::AttractingNode,
            (false, false) => Self::AttractingFocus,
        }
    }

    pub fn is_repelling(self) -> bool {
        matches!(self, Self::RepellingNode | Self::RepellingFocus)
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::RepellingNode => "repelling node",
            Self::RepellingFocus => "repelling focus",
            Self::AttractingNode => "attracting node",
            Self::AttractingFocus => "attracting focus",
            Self::Saddle => "saddle",
            Self::Marginal => "marginal",
        }
    }
}

/// The unique positive equilibrium F_* with its linearization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub s_star: f64,
    pub h_star: f64,
    pub jacobian: Mat2,
    pub trace: f64,
    pub det: f64,
    pub classification: Classification,
}

impl FixedPoint {
    pub fn state(&self) -> State {
        State::new(self.s_star, self.h_star)
    }

    /// Whether trajectories leave the equilibrium and wind onto a limit cycle:
    /// positive trace and determinant.
    pub fn oscillates(&self) -> bool {
        self.trace > 0.0 && self.det > 0.0
    }
}

/// Equilibrium h_* = 1 - K_s/(alpha K_h), s_* = K_s/r(h_*), classified via
/// the closed-form Jacobian.
pub fn fixed_point(dp: &DimlessParams) -> Result<FixedPoint, AnalysisError> {
    if !dp.admissible() {
        return Err(AnalysisError::NoPositiveEquilibrium {
            alpha_kh: dp.alpha * dp.k_h,
            k_s: dp.k_s,
        });
    }
    let h_star = dp.h_star();
    let s_star = dp.k_s / rate_r(h_star, dp)?;
    let jac = jacobian(State::new(s_star, h_star), dp)?;
    let trace = jac[0][0] + jac[1][1];
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    Ok(FixedPoint {
        s_star,
        h_star,
        jacobian: jac,
        trace,
        det,
        classification: Classification::from_trace_det(trace, det),
    })
}

/// Compares the closed-form Jacobian at F_* with central differences of step
/// 1e-6 times the coordinate, entrywise to `rel_tol` relative.
pub fn check_jacobian(dp: &DimlessParams, rel_tol: f64) -> Result<(), AnalysisError> {
    let fp = fixed_point(dp)?;
    let field = OriginalModel::new(*dp);
    let x = [fp.s_star, fp.h_star];
    let numeric = central_jacobian(&field, x, 1e-6)?;
    compare_matrices(&fp.jacobian, &numeric, rel_tol)
}

/// Central-difference Jacobian with step `rel_step` times each coordinate.
pub fn central_jacobian<F: VectorField + ?Sized>(
    field: &F,
    x: Vec2,
    rel_step: f64,
) -> Result<Mat2, ModelError> {
    let mut jac = [[0.0; 2]; 2];
    for j in 0..2 {
        let delta = rel_step * x[j].abs().max(1e-12);
        let (mut xp, mut xm) = (x, x);
        xp[j] += delta;
        xm[j] -= delta;
        let (fp, fm) = (field.eval(xp)?, field.eval(xm)?);
        for i in 0..2 {
            jac[i][j] = (fp[i] - fm[i]) / (2.0 * delta);
        }
    }
    Ok(jac)
}

/// Entrywise relative comparison of two matrices.
pub fn compare_matrices(
    analytic: &Mat2,
    numeric: &Mat2,
    rel_tol: f64,
) -> Result<(), AnalysisError> {
    for i in 0..2 {
        for j in 0..2 {
            let (a, n) = (analytic[i][j], numeric[i][j]);
            let scale = a.abs().max(n.abs());
            if (a - n).abs() > rel_tol * scale {
                return Err(AnalysisError::Consistency {
                    quantity: format!("Jacobian entry ({i}, {j})"),
                    analytic: a,
                    numeric: n,
                });
            }
        }
    }
    Ok(())
}

/// One sample of the two nullclines, both expressed as s-values over h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullclineSample {
    pub h: f64,
    /// n_s(h) = K_s/r(h): ds/dt = 0.
    pub n_s: f64,
    /// n_h(h) = alpha K_h (1 - h)/r(h): dh/dt = 0.
    pub n_h: f64,
}

/// Samples the nullclines on a grid of positive h values.
pub fn nullclines(
    dp: &DimlessParams,
    h_grid: &[f64],
) -> Result<Vec<NullclineSample>, AnalysisError> {
    h_grid
        .iter()
        .map(|&h| {
            let r = rate_r(h, dp)?;
            Ok(NullclineSample {
                h,
                n_s: dp.k_s / r,
                n_h: dp.alpha * dp.k_h * (1.0 - h) / r,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;

    fn dp() -> DimlessParams {
        PhysicalParams::table1().derive_dimensionless().unwrap()
    }

    #[test]
    fn laboratory_equilibrium() {
        let fp = fixed_point(&dp()).unwrap();
        assert!((fp.s_star - 0.07618403535611075).abs() < 1e-14);
        assert!((fp.h_star - 0.0905982905982905).abs() < 1e-14);
        assert_eq!(fp.classification, Classification::RepellingNode);
        assert!(fp.oscillates());
        assert!((fp.trace - 0.58162705).abs() < 1e-6, "{}", fp.trace);
    }

    #[test]
    fn classification_table() {
        use Classification::*;
        assert_eq!(Classification::from_trace_det(1.0, -1.0), Saddle);
        assert_eq!(Classification::from_trace_det(1.0, 0.1), RepellingNode);
        assert_eq!(Classification::from_trace_det(1.0, 1.0), RepellingFocus);
        assert_eq!(Classification::from_trace_det(-1.0, 0.1), AttractingNode);
        assert_eq!(Classification::from_trace_det(-1.0, 1.0), AttractingFocus);
        assert_eq!(Classification::from_trace_det(0.0, 1.0), Marginal);
    }

    #[test]
    fn half_acid_when_alpha_kh_is_twice_ks() {
        let mut dp = dp();
        dp.k_h = 2.0 * dp.k_s / dp.alpha;
        assert_eq!(fixed_point(&dp).unwrap().h_star, 0.5);
        dp.k_h = dp.k_s / dp.alpha;
        assert!(matches!(
            fixed_point(&dp),
            Err(AnalysisError::NoPositiveEquilibrium { .. })
        ));
    }

    #[test]
    fn jacobian_matches_differences() {
        check_jacobian(&dp(), 1e-5).unwrap();
    }

    #[test]
    fn nullclines_meet_at_equilibrium() {
        let dp = dp();
        let fp = fixed_point(&dp).unwrap();
        let n = nullclines(&dp, &[fp.h_star, 1.0]).unwrap();
        assert!((n[0].n_s - fp.s_star).abs() < 1e-12 && (n[0].n_h - fp.s_star).abs() < 1e-12);
        assert_eq!(n[1].n_h, 0.0);
        assert!(nullclines(&dp, &[0.0]).is_err());
    }
}
