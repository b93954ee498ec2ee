//! The reference model in physical time (seconds), from which the
//! dimensionless model is obtained by a chain of simplifications.

use crate::error::ModelError;
use crate::integrator::{Vec2, VectorField};
use crate::params::PhysicalParams;

use super::stable_root;

/// pH activity factor f_H([H+]) = 1/(1 + [H+]/k_E1 + k_E2/[H+]), maximal at sqrt(k_E1 k_E2).
pub fn f_h(h_conc: f64, phys: &PhysicalParams) -> f64 {
    1.0 / (1.0 + h_conc / phys.k_e1 + phys.k_e2 / h_conc)
}

/// The reference two-variable model with Michaelis-Menten saturation,
/// substrate exchange k_S (1 - s) and the full ammonium balance.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceModel {
    pub phys: PhysicalParams,
    k_prime: f64,
}

impl ReferenceModel {
    pub fn new(phys: PhysicalParams) -> Self {
        Self {
            phys,
            k_prime: phys.k_prime(),
        }
    }

    /// Effective catalytic rate k_cat(s, h) in 1/s.
    pub fn k_cat(&self, s: f64, h: f64) -> f64 {
        let p = &self.phys;
        p.v_max / (p.k_m + s * p.s_ext) * f_h(h * p.h_ext, p)
    }

    /// Ammonium level p(s, h) >= 0, the non-negative root of p^2 + b p - c = 0.
    pub fn p_func(&self, s: f64, h: f64) -> f64 {
        let p = &self.phys;
        let b = 1.0 + self.k_prime * p.h_ext * h + (1.0 - 1.0 / h) * p.k_h / p.k;
        let c = 2.0 * self.k_cat(s, h) * self.k_prime * p.s_ext * s / p.k;
        stable_root(b, c)
    }

    /// (ds/dt, dh/dt) in 1/s.
    pub fn rhs(&self, s: f64, h: f64) -> Result<Vec2, ModelError> {
        if !(0.0..=1.0).contains(&s) {
            return Err(ModelError::domain("reference model", "0 <= s <= 1", s));
        }
        if !(h > 0.0 && h <= 1.0) {
            return Err(ModelError::domain("reference model", "0 < h <= 1", h));
        }
        let p = &self.phys;
        let kcat = self.k_cat(s, h);
        Ok([
            -kcat * s + p.k_s * (1.0 - s),
            -p.k * self.p_func(s, h) * h + p.k_h * (1.0 - h),
        ])
    }
}

/// Convenience wrapper mirroring [`super::rhs`] for the reference model.
pub fn rhs_reference(state: super::State, phys: &PhysicalParams) -> Result<Vec2, ModelError> {
    ReferenceModel::new(*phys).rhs(state.s, state.h)
}

impl VectorField for ReferenceModel {
    fn eval(&self, x: Vec2) -> Result<Vec2, ModelError> {
        self.rhs(x[0], x[1])
    }

    fn in_domain(&self, x: Vec2) -> bool {
        (0.0..=1.0).contains(&x[0]) && x[1] > 0.0 && x[1] <= 1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn activity_peaks_at_neutral() {
        let p = PhysicalParams::table1();
        let peak = (p.k_e1 * p.k_e2).sqrt();
        assert!((peak - 1e-7).abs() < 1e-20);
        let fp = f_h(peak, &p);
        for factor in [0.5, 0.9, 0.99, 1.01, 1.1, 2.0] {
            assert!(f_h(peak * factor, &p) < fp);
        }
    }

    #[test]
    fn saturated_substrate_decays() {
        let m = ReferenceModel::new(PhysicalParams::table1());
        for h in [0.01, 0.1, 0.5, 1.0] {
            let f = m.rhs(1.0, h).unwrap();
            assert_eq!(f[0], -m.k_cat(1.0, h));
            assert!(f[0] < 0.0);
        }
        assert!(m.rhs(1.5, 0.5).is_err());
        assert!(m.rhs(0.5, 0.0).is_err());
    }
}
