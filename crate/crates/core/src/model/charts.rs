//! The two rescaled charts of the single-ε system.
//!
//! Chart A uses (sigma, h) with sigma = eps s and resolves the acidic fold;
//! chart B uses (s, eta) with eta = h/eps and resolves the fold near neutral
//! pH. Both fields are written in the time in which the fast variable moves
//! with unit speed: chart A in the original time t, chart B in t' = t/eps.

use crate::error::ModelError;
use crate::integrator::{Mat2, Vec2, VectorField};
use crate::params::{DimlessParams, EpsSplit};

use super::stable_root;

/// Which closed form of the chart-A production rate is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QBranch {
    /// 0 < h < h+: v is negative.
    Below,
    /// h = h+: v vanishes.
    Seam,
    /// h > h+: v is positive.
    Above,
}

/// Chart A: (d sigma/dt, dh/dt) = (eps f~, g~).
#[derive(Debug, Clone, Copy)]
pub struct ChartA {
    pub dp: DimlessParams,
    pub es: EpsSplit,
    h_plus: f64,
}

impl ChartA {
    /// Requires eps > 0; the singular limit is available through [`ChartA::g0`] and [`ChartA::f0`].
    pub fn new(dp: DimlessParams, es: EpsSplit) -> Result<Self, ModelError> {
        if !(es.eps > 0.0 && es.eps.is_finite()) {
            return Err(ModelError::domain("chart A", "eps > 0", es.eps));
        }
        Ok(Self {
            dp,
            es,
            h_plus: es.h_plus(&dp),
        })
    }

    /// Positive root of v~(h), where the case split switches.
    pub fn h_plus(&self) -> f64 {
        self.h_plus
    }

    /// r~(h) = 1/(eps^2 beta C/h + eps + (beta/C) h).
    pub fn r_tilde(&self, h: f64) -> Result<f64, ModelError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(ModelError::domain("chart A rate", "h > 0", h));
        }
        let (eps, b, c) = (self.es.eps, self.dp.beta, self.es.c);
        Ok(1.0 / (eps * eps * b * c / h + eps + b / c * h))
    }

    /// v~(h) = alpha A K h^2 - eps^2 K_h (1 - h).
    pub fn v_tilde(&self, h: f64) -> f64 {
        let eps = self.es.eps;
        self.dp.alpha * self.es.a * self.dp.k * h * h - eps * eps * self.dp.k_h * (1.0 - h)
    }

    fn w_tilde(&self, sigma: f64, h: f64) -> Result<f64, ModelError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(ModelError::domain("chart A", "sigma >= 0", sigma));
        }
        Ok(self.es.a * self.dp.k * self.r_tilde(h)? * h * h * sigma)
    }

    /// Production rate q~ evaluated with an explicitly chosen closed form.
    ///
    /// Each form uses |v~| with the sign its branch implies, so that rounding
    /// of v~ near the seam cannot flip the sign of the result; the factor
    /// |v~| sqrt(1 + 4 eps^2 w/v~^2) is taken as sqrt(v~^2 + 4 eps^2 w),
    /// which cannot overflow as v~ -> 0.
    pub fn q_tilde_branch(&self, branch: QBranch, sigma: f64, h: f64) -> Result<f64, ModelError> {
        let eps = self.es.eps;
        let e2 = eps * eps;
        let w = self.w_tilde(sigma, h)?;
        let v = self.v_tilde(h).abs();
        let root = (v * v + 4.0 * e2 * w).sqrt();
        Ok(match branch {
            QBranch::Below => (v + root) / (2.0 * e2),
            QBranch::Seam => w.sqrt() / eps,
            QBranch::Above => {
                if w == 0.0 {
                    0.0
                } else {
                    2.0 * w / (v + root)
                }
            }
        })
    }

    /// Production rate q~ with the case split keyed on h against h+.
    pub fn q_tilde(&self, sigma: f64, h: f64) -> Result<f64, ModelError> {
        let branch = if h < self.h_plus {
            QBranch::Below
        } else if h == self.h_plus {
            QBranch::Seam
        } else {
            QBranch::Above
        };
        self.q_tilde_branch(branch, sigma, h)
    }

    /// The textbook root formula without the case split, for comparison.
    pub fn q_tilde_naive(&self, sigma: f64, h: f64) -> Result<f64, ModelError> {
        let e2 = self.es.eps * self.es.eps;
        let w = self.w_tilde(sigma, h)?;
        let v = self.v_tilde(h);
        Ok(((v * v + 4.0 * e2 * w).sqrt() - v) / (2.0 * e2))
    }

    /// f~(sigma, h) = -r~(h) sigma + K_s.
    pub fn f_tilde(&self, sigma: f64, h: f64) -> Result<f64, ModelError> {
        Ok(-self.r_tilde(h)? * sigma + self.dp.k_s)
    }

    /// g~(sigma, h) = -q~(sigma, h) + K_h (1 - h).
    pub fn g_tilde(&self, sigma: f64, h: f64) -> Result<f64, ModelError> {
        Ok(-self.q_tilde(sigma, h)? + self.dp.k_h * (1.0 - h))
    }

    /// (d sigma/dt, dh/dt) = (eps f~, g~).
    pub fn rhs(&self, sigma: f64, h: f64) -> Result<Vec2, ModelError> {
        Ok([
            self.es.eps * self.f_tilde(sigma, h)?,
            self.g_tilde(sigma, h)?,
        ])
    }

    /// Jacobian of [`ChartA::rhs`] with respect to (sigma, h).
    pub fn jacobian(&self, sigma: f64, h: f64) -> Result<Mat2, ModelError> {
        let (eps, b, c) = (self.es.eps, self.dp.beta, self.es.c);
        let ak = self.es.a * self.dp.k;
        let r = self.r_tilde(h)?;
        let d_prime = -eps * eps * b * c / (h * h) + b / c;
        let r_h = -d_prime * r * r;
        let v = self.v_tilde(h);
        let v_h = 2.0 * self.dp.alpha * ak * h + eps * eps * self.dp.k_h;
        let w = self.w_tilde(sigma, h)?;
        let w_s = ak * r * h * h;
        let w_h = ak * sigma * (r_h * h * h + 2.0 * r * h);
        let q = self.q_tilde(sigma, h)?;
        let denom = (v * v + 4.0 * eps * eps * w).sqrt();
        if denom == 0.0 {
            return Err(ModelError::Singular("chart A production rate derivative"));
        }
        let q_s = w_s / denom;
        let q_h = (w_h - v_h * q) / denom;
        Ok([[-eps * r, -eps * r_h * sigma], [-q_s, -q_h - self.dp.k_h]])
    }

    /// Singular limit of the fast equation: g~0 = -C sigma/(alpha beta h) + K_h (1 - h).
    pub fn g0(dp: &DimlessParams, c: f64, sigma: f64, h: f64) -> Result<f64, ModelError> {
        if !(h > 0.0) {
            return Err(ModelError::domain("reduced chart A", "h > 0", h));
        }
        Ok(-c * sigma / (dp.alpha * dp.beta * h) + dp.k_h * (1.0 - h))
    }

    /// Singular limit of the slow equation: f~0 = -C sigma/(beta h) + K_s.
    pub fn f0(dp: &DimlessParams, c: f64, sigma: f64, h: f64) -> Result<f64, ModelError> {
        if !(h > 0.0) {
            return Err(ModelError::domain("reduced chart A", "h > 0", h));
        }
        Ok(-c * sigma / (dp.beta * h) + dp.k_s)
    }
}

impl VectorField for ChartA {
    fn eval(&self, x: Vec2) -> Result<Vec2, ModelError> {
        self.rhs(x[0], x[1])
    }

    fn jacobian(&self, x: Vec2) -> Option<Result<Mat2, ModelError>> {
        Some(ChartA::jacobian(self, x[0], x[1]))
    }

    fn in_domain(&self, x: Vec2) -> bool {
        x[0].is_finite() && x[1].is_finite() && x[0] >= 0.0 && x[1] > 0.0
    }
}

/// Chart B: (ds/dt', d eta/dt') = (eps f^, g^). Also defined at eps = 0.
#[derive(Debug, Clone, Copy)]
pub struct ChartB {
    pub dp: DimlessParams,
    pub es: EpsSplit,
}

impl ChartB {
    pub fn new(dp: DimlessParams, es: EpsSplit) -> Result<Self, ModelError> {
        if !(es.eps >= 0.0 && es.eps.is_finite()) {
            return Err(ModelError::domain("chart B", "eps >= 0", es.eps));
        }
        Ok(Self { dp, es })
    }

    /// r^(eta) = 1/(beta C/eta + 1 + (beta/C) eta), independent of eps,
    /// continuously extended by r^(0) = 0.
    pub fn r_hat(&self, eta: f64) -> Result<f64, ModelError> {
        if !(eta >= 0.0 && eta.is_finite()) {
            return Err(ModelError::domain("chart B rate", "eta >= 0", eta));
        }
        if eta == 0.0 {
            return Ok(0.0);
        }
        let (b, c) = (self.dp.beta, self.es.c);
        Ok(1.0 / (b * c / eta + 1.0 + b / c * eta))
    }

    /// First derivative of r^.
    pub fn r_hat_prime(&self, eta: f64) -> Result<f64, ModelError> {
        let (b, c) = (self.dp.beta, self.es.c);
        if eta == 0.0 {
            return Ok(1.0 / (b * c));
        }
        let r = self.r_hat(eta)?;
        Ok(-(-b * c / (eta * eta) + b / c) * r * r)
    }

    /// v^(eta) = alpha A K eta^2 - K_h (1 - eps eta).
    pub fn v_hat(&self, eta: f64) -> f64 {
        self.dp.alpha * self.es.a * self.dp.k * eta * eta - self.dp.k_h * (1.0 - self.es.eps * eta)
    }

    fn w_hat(&self, s: f64, eta: f64) -> Result<f64, ModelError> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(ModelError::domain("chart B", "s >= 0", s));
        }
        Ok(self.es.a * self.dp.k * self.r_hat(eta)? * eta * eta * s)
    }

    pub fn q_hat(&self, s: f64, eta: f64) -> Result<f64, ModelError> {
        Ok(stable_root(self.v_hat(eta), self.w_hat(s, eta)?))
    }

    /// f^(s, eta) = -r^(eta) s + K_s.
    pub fn f_hat(&self, s: f64, eta: f64) -> Result<f64, ModelError> {
        Ok(-self.r_hat(eta)? * s + self.dp.k_s)
    }

    /// g^(s, eta) = -q^(s, eta) + K_h (1 - eps eta).
    pub fn g_hat(&self, s: f64, eta: f64) -> Result<f64, ModelError> {
        Ok(-self.q_hat(s, eta)? + self.dp.k_h * (1.0 - self.es.eps * eta))
    }

    /// (ds/dt', d eta/dt') = (eps f^, g^).
    pub fn rhs(&self, s: f64, eta: f64) -> Result<Vec2, ModelError> {
        Ok([self.es.eps * self.f_hat(s, eta)?, self.g_hat(s, eta)?])
    }

    /// Partial derivatives (q_s, q_eta) of the production rate.
    pub fn q_hat_partials(&self, s: f64, eta: f64) -> Result<[f64; 2], ModelError> {
        let ak = self.es.a * self.dp.k;
        let r = self.r_hat(eta)?;
        let r_e = self.r_hat_prime(eta)?;
        let v = self.v_hat(eta);
        let v_e = 2.0 * self.dp.alpha * ak * eta + self.es.eps * self.dp.k_h;
        let w = self.w_hat(s, eta)?;
        let w_s = ak * r * eta * eta;
        let w_e = ak * s * (r_e * eta * eta + 2.0 * r * eta);
        let q = stable_root(v, w);
        let denom = (v * v + 4.0 * w).sqrt();
        if denom == 0.0 {
            return Err(ModelError::Singular("chart B production rate derivative"));
        }
        Ok([w_s / denom, (w_e - v_e * q) / denom])
    }

    /// Jacobian of [`ChartB::rhs`] with respect to (s, eta).
    pub fn jacobian(&self, s: f64, eta: f64) -> Result<Mat2, ModelError> {
        let eps = self.es.eps;
        let r = self.r_hat(eta)?;
        let r_e = self.r_hat_prime(eta)?;
        let [q_s, q_e] = self.q_hat_partials(s, eta)?;
        Ok([[-eps * r, -eps * r_e * s], [-q_s, -q_e - eps * self.dp.k_h]])
    }
}

impl VectorField for ChartB {
    fn eval(&self, x: Vec2) -> Result<Vec2, ModelError> {
        self.rhs(x[0], x[1])
    }

    fn jacobian(&self, x: Vec2) -> Option<Result<Mat2, ModelError>> {
        Some(ChartB::jacobian(self, x[0], x[1]))
    }

    fn in_domain(&self, x: Vec2) -> bool {
        x[0].is_finite() && x[1].is_finite() && x[0] >= 0.0 && x[1] >= 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::PhysicalParams;

    fn setup(eps: f64) -> (DimlessParams, EpsSplit) {
        let dp = PhysicalParams::table1().derive_dimensionless().unwrap();
        let es = dp.derive_eps_split(1e-3).unwrap().at(eps);
        (dp, es)
    }

    #[test]
    fn chart_a_needs_positive_eps() {
        let (dp, es) = setup(0.0);
        assert!(ChartA::new(dp, es).is_err());
        let (dp, es) = setup(1e-3);
        let a = ChartA::new(dp, es).unwrap();
        assert!(a.rhs(0.1, 0.0).is_err());
        assert!(a.rhs(-0.1, 0.5).is_err());
    }

    #[test]
    fn seam_branches_agree() {
        let (dp, es) = setup(1e-3);
        let a = ChartA::new(dp, es).unwrap();
        let h = a.h_plus();
        for sigma in [1e-6, 1e-4, 1e-2, 0.3] {
            let qs = [QBranch::Below, QBranch::Seam, QBranch::Above]
                .map(|b| a.q_tilde_branch(b, sigma, h).unwrap());
            for q in qs {
                assert!((q - qs[1]).abs() <= 1e-8 * qs[1], "{qs:?}");
            }
        }
    }

    #[test]
    fn chart_a_approaches_reduced_problem() {
        let (dp, es) = setup(1e-3);
        let (sigma, h) = (1e-4, 0.4);
        let exact = ChartA::g0(&dp, es.c, sigma, h).unwrap();
        let mut last = f64::INFINITY;
        for eps in [1e-3, 1e-4, 1e-5, 1e-6] {
            let a = ChartA::new(dp, es.at(eps)).unwrap();
            let err = (a.g_tilde(sigma, h).unwrap() - exact).abs();
            assert!(err < last);
            last = err;
        }
        assert!(last < 1e-5, "{last}");
    }

    #[test]
    fn chart_b_fold_rate_and_axis() {
        let (dp, es) = setup(0.0);
        let b = ChartB::new(dp, es).unwrap();
        let r = b.r_hat(es.c).unwrap();
        assert!((r - 1.0 / (2.0 * dp.beta + 1.0)).abs() < 1e-15);
        for s in [0.0, 0.01, 1.0, 100.0] {
            assert_eq!(b.g_hat(s, 0.0).unwrap(), 0.0);
        }
        assert!(b.rhs(1.0, -1e-3).is_err());
    }
}
