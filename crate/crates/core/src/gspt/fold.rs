use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, ModelError};
use crate::model::{ChartA, ChartB};
use crate::params::{DimlessParams, EpsSplit};

use super::manifolds::Manifolds;

/// Absolute tolerance for the two vanishing conditions at a fold.
pub const FOLD_TOL: f64 = 1e-9;
/// Magnitude below which a nondegeneracy quantity counts as zero.
pub const NONZERO_TOL: f64 = 1e-9;
/// Allowed relative disagreement between analytic and difference derivatives.
pub const FD_REL_TOL: f64 = 1e-5;
/// Allowed relative disagreement between evaluated and closed-form values.
pub const CLOSED_FORM_REL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Chart {
    A,
    B,
}

impl std::str::FromStr for Chart {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Self::A),
            "B" | "b" => Ok(Self::B),
            other => Err(format!("unknown chart `{other}` (expected A or B)")),
        }
    }
}

/// The five fold quantities: fast-equation value and derivatives, and the
/// slow-equation value, all at eps = 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldQuantities {
    pub g0_value: f64,
    pub dg0_fast: f64,
    pub d2g0_fast: f64,
    pub dg0_slow: f64,
    pub f0_value: f64,
}

/// Closed-form predictions of the three nonvanishing fold quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldClosedForms {
    pub d2g0_fast: f64,
    pub dg0_slow: f64,
    pub f0_value: f64,
}

/// Genericity check of a fold point: vanishing fast derivative, nonzero
/// curvature (nondegeneracy), nonzero slow derivative (regularity) and
/// nonzero slow flow (transversality).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub chart: Chart,
    /// Chart coordinates: (sigma, h) for chart A, (s, eta) for chart B.
    pub fold_location: [f64; 2],
    pub g0_value: f64,
    pub dg0_fast: f64,
    pub d2g0_fast: f64,
    pub dg0_slow: f64,
    pub f0_value: f64,
    /// The same quantities from central differences.
    pub finite_difference: FoldQuantities,
    pub closed_form: FoldClosedForms,
    pub tol: f64,
    pub is_fold: bool,
    pub nondegenerate: bool,
    pub regular: bool,
    pub transversal: bool,
    pub matches_closed_form: bool,
    pub is_generic: bool,
}

impl FoldReport {
    pub fn quantities(&self) -> FoldQuantities {
        FoldQuantities {
            g0_value: self.g0_value,
            dg0_fast: self.dg0_fast,
            d2g0_fast: self.d2g0_fast,
            dg0_slow: self.dg0_slow,
            f0_value: self.f0_value,
        }
    }

    fn assemble(
        chart: Chart,
        fold_location: [f64; 2],
        q: FoldQuantities,
        fd: FoldQuantities,
        closed_form: FoldClosedForms,
    ) -> Self {
        let is_fold = q.g0_value.abs() <= FOLD_TOL && q.dg0_fast.abs() <= FOLD_TOL;
        let nondegenerate = q.d2g0_fast.abs() > NONZERO_TOL;
        let regular = q.dg0_slow.abs() > NONZERO_TOL;
        let transversal = q.f0_value.abs() > NONZERO_TOL;
        let close = |a: f64, b: f64| {
            (a - b).abs() <= CLOSED_FORM_REL_TOL * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
        };
        let matches_closed_form = close(q.d2g0_fast, closed_form.d2g0_fast)
            && close(q.dg0_slow, closed_form.dg0_slow)
            && (close(q.f0_value, closed_form.f0_value)
                || (q.f0_value - closed_form.f0_value).abs() <= FOLD_TOL);
        Self {
            chart,
            fold_location,
            g0_value: q.g0_value,
            dg0_fast: q.dg0_fast,
            d2g0_fast: q.d2g0_fast,
            dg0_slow: q.dg0_slow,
            f0_value: q.f0_value,
            finite_difference: fd,
            closed_form,
            tol: FOLD_TOL,
            is_fold,
            nondegenerate,
            regular,
            transversal,
            matches_closed_form,
            is_generic: is_fold && nondegenerate && regular && transversal,
        }
    }
}

/// First derivative by central differences.
fn d1(f: &dyn Fn(f64) -> Result<f64, ModelError>, x: f64, delta: f64) -> Result<f64, ModelError> {
    Ok((f(x + delta)? - f(x - delta)?) / (2.0 * delta))
}

/// Second derivative by central differences.
fn d2(f: &dyn Fn(f64) -> Result<f64, ModelError>, x: f64, delta: f64) -> Result<f64, ModelError> {
    Ok((f(x + delta)? - 2.0 * f(x)? + f(x - delta)?) / (delta * delta))
}

/// Checks analytic against difference derivatives. A vanishing first
/// derivative is compared on the scale of curvature times the coordinate.
fn check_consistency(
    q: &FoldQuantities,
    fd: &FoldQuantities,
    fast_scale: f64,
) -> Result<(), AnalysisError> {
    let natural = q.d2g0_fast.abs() * fast_scale;
    let checks = [
        (
            "fast derivative of the fast equation",
            q.dg0_fast,
            fd.dg0_fast,
            natural,
        ),
        (
            "second fast derivative of the fast equation",
            q.d2g0_fast,
            fd.d2g0_fast,
            0.0,
        ),
        (
            "slow derivative of the fast equation",
            q.dg0_slow,
            fd.dg0_slow,
            0.0,
        ),
    ];
    for (quantity, analytic, numeric, floor) in checks {
        let scale = analytic.abs().max(numeric.abs()).max(floor);
        if (analytic - numeric).abs() > FD_REL_TOL * scale {
            return Err(AnalysisError::Consistency {
                quantity: quantity.into(),
                analytic,
                numeric,
            });
        }
    }
    Ok(())
}

/// Evaluates the fold conditions at F_A (chart A) or F_B (chart B) from
/// closed-form derivatives, cross-checks them against central differences,
/// and compares with the closed-form predictions.
pub fn verify_generic_fold(
    chart: Chart,
    es: &EpsSplit,
    dp: &DimlessParams,
) -> Result<FoldReport, AnalysisError> {
    dp.validate()?;
    match chart {
        Chart::A => fold_a(es, dp),
        Chart::B => fold_b(es, dp),
    }
}

fn fold_a(es: &EpsSplit, dp: &DimlessParams) -> Result<FoldReport, AnalysisError> {
    let m = Manifolds::new(*dp, *es);
    let [sigma, h] = m.fold_a();
    let (c, ab) = (es.c, dp.alpha * dp.beta);
    let q = FoldQuantities {
        g0_value: ChartA::g0(dp, c, sigma, h)?,
        dg0_fast: c * sigma / (ab * h * h) - dp.k_h,
        d2g0_fast: -2.0 * c * sigma / (ab * h * h * h),
        dg0_slow: -c / (ab * h),
        f0_value: ChartA::f0(dp, c, sigma, h)?,
    };
    let g_h = |x: f64| ChartA::g0(dp, c, sigma, x);
    let g_s = |x: f64| ChartA::g0(dp, c, x, h);
    let fd = FoldQuantities {
        g0_value: q.g0_value,
        dg0_fast: d1(&g_h, h, 1e-6 * h)?,
        d2g0_fast: d2(&g_h, h, 1e-3 * h)?,
        dg0_slow: d1(&g_s, sigma, 1e-6 * sigma)?,
        f0_value: q.f0_value,
    };
    check_consistency(&q, &fd, h)?;
    let closed = FoldClosedForms {
        d2g0_fast: -4.0 * dp.k_h,
        dg0_slow: -2.0 * c / ab,
        f0_value: dp.alpha * dp.k_h * (0.5 - dp.h_star()),
    };
    Ok(FoldReport::assemble(Chart::A, [sigma, h], q, fd, closed))
}

fn fold_b(es: &EpsSplit, dp: &DimlessParams) -> Result<FoldReport, AnalysisError> {
    let m = Manifolds::new(*dp, *es);
    let [s, eta] = m.fold_b();
    let field = ChartB::new(*dp, es.at(0.0))?;
    let (c, b, ak) = (es.c, dp.beta, es.a * dp.k);

    // implicit derivatives of Q(s, eta), the root of Q^2 + v Q - w = 0
    let qv = field.q_hat(s, eta)?;
    let [q_s, q_e] = field.q_hat_partials(s, eta)?;
    let v = field.v_hat(eta);
    let (v_e, v_ee) = (2.0 * dp.alpha * ak * eta, 2.0 * dp.alpha * ak);
    let r = field.r_hat(eta)?;
    let r_e = field.r_hat_prime(eta)?;
    let d_e = -b * c / (eta * eta) + b / c;
    let d_ee = 2.0 * b * c / (eta * eta * eta);
    let r_ee = -d_ee * r * r + 2.0 * d_e * d_e * r * r * r;
    let w_ee = ak * s * (r_ee * eta * eta + 4.0 * r_e * eta + 2.0 * r);
    let q_ee = (w_ee - v_ee * qv - 2.0 * v_e * q_e - 2.0 * q_e * q_e) / (2.0 * qv + v);

    let q = FoldQuantities {
        g0_value: field.g_hat(s, eta)?,
        dg0_fast: -q_e,
        d2g0_fast: -q_ee,
        dg0_slow: -q_s,
        f0_value: field.f_hat(s, eta)?,
    };
    let g_e = |x: f64| field.g_hat(s, x);
    let g_s = |x: f64| field.g_hat(x, eta);
    let fd = FoldQuantities {
        g0_value: q.g0_value,
        dg0_fast: d1(&g_e, eta, 1e-6 * eta)?,
        d2g0_fast: d2(&g_e, eta, 1e-3 * eta)?,
        dg0_slow: d1(&g_s, s, 1e-6 * s)?,
        f0_value: q.f0_value,
    };
    check_consistency(&q, &fd, eta)?;
    let eta_b = c;
    let closed = FoldClosedForms {
        d2g0_fast: 2.0 * eta_b * (b / c) * dp.k_h * r / (eta_b * eta_b + dp.k_h / (dp.alpha * ak)),
        dg0_slow: -r / (dp.alpha + dp.k_h / (ak * eta_b * eta_b)),
        f0_value: -dp.alpha * dp.k_h * dp.h_star(),
    };
    Ok(FoldReport::assemble(Chart::B, [s, eta], q, fd, closed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;

    fn setup() -> (DimlessParams, EpsSplit) {
        let dp = PhysicalParams::table1().derive_dimensionless().unwrap();
        let es = dp.derive_eps_split(1e-3).unwrap();
        (dp, es)
    }

    #[test]
    fn acidic_fold_is_generic() {
        let (dp, es) = setup();
        let rep = verify_generic_fold(Chart::A, &es, &dp).unwrap();
        assert!(rep.is_generic && rep.matches_closed_form, "{rep:?}");
        assert!((rep.d2g0_fast + 4.0 * dp.k_h).abs() <= 1e-9 * 4.0 * dp.k_h);
        assert!((rep.d2g0_fast + 0.5838).abs() < 5e-4);
        assert!(rep.f0_value > 0.0);
    }

    #[test]
    fn neutral_fold_is_generic() {
        let (dp, es) = setup();
        let rep = verify_generic_fold(Chart::B, &es, &dp).unwrap();
        assert!(rep.is_generic && rep.matches_closed_form, "{rep:?}");
        assert!(rep.d2g0_fast > 0.0 && rep.dg0_slow < 0.0 && rep.f0_value < 0.0);
        let expected = -dp.alpha * dp.k_h * dp.h_star();
        assert!((rep.f0_value - expected).abs() <= 1e-9 * expected.abs());
    }

    #[test]
    fn zero_equilibrium_acid_breaks_transversality() {
        let (mut dp, es) = setup();
        dp.k_h = dp.k_s / dp.alpha;
        let rep = verify_generic_fold(Chart::B, &es, &dp).unwrap();
        assert!(
            rep.is_fold && !rep.transversal && !rep.is_generic,
            "{rep:?}"
        );
    }

    #[test]
    fn chart_names_parse() {
        assert_eq!("A".parse::<Chart>().unwrap(), Chart::A);
        assert_eq!("b".parse::<Chart>().unwrap(), Chart::B);
        assert!("C".parse::<Chart>().is_err());
    }
}
