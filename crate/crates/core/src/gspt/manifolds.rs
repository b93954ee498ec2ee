use serde::{Deserialize, Serialize};

use crate::error::{AnalysisError, ModelError};
use crate::params::{DimlessParams, EpsSplit};

/// Normal stability of a point of a critical manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Attracting,
    Repelling,
    Fold,
}

impl Branch {
    fn from_derivative(d: f64) -> Self {
        if d < 0.0 {
            Self::Attracting
        } else if d > 0.0 {
            Self::Repelling
        } else {
            Self::Fold
        }
    }
}

/// Fold location h_A of the acidic critical manifold.
pub const H_A: f64 = 0.5;

/// Closed forms of the two critical manifolds at eps = 0, their fold points,
/// normal stability and reduced (slow) flows.
///
/// Chart A: sigma = phi(h) = (alpha beta K_h/C) h (1 - h), fold F_A at h = 1/2.
/// Chart B: s = psi(eta) = alpha K_h/r^(eta), fold F_B at eta = C.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manifolds {
    pub dp: DimlessParams,
    pub es: EpsSplit,
}

impl Manifolds {
    pub fn new(dp: DimlessParams, es: EpsSplit) -> Self {
        Self { dp, es }
    }

    fn check_h(h: f64) -> Result<(), ModelError> {
        if !(0.0..=1.0).contains(&h) {
            return Err(ModelError::domain(
                "acidic critical manifold",
                "0 <= h <= 1",
                h,
            ));
        }
        Ok(())
    }

    fn check_eta(eta: f64) -> Result<(), ModelError> {
        if !(eta > 0.0 && eta.is_finite()) {
            return Err(ModelError::domain(
                "neutral critical manifold",
                "eta > 0",
                eta,
            ));
        }
        Ok(())
    }

    /// phi(h) = (alpha beta K_h / C) h (1 - h).
    pub fn manifold_a(&self, h: f64) -> Result<f64, ModelError> {
        Self::check_h(h)?;
        Ok(self.dp.alpha * self.dp.beta * self.dp.k_h / self.es.c * h * (1.0 - h))
    }

    /// phi'(h) = (alpha beta K_h / C)(1 - h/h_A).
    pub fn manifold_a_prime(&self, h: f64) -> Result<f64, ModelError> {
        Self::check_h(h)?;
        Ok(self.dp.alpha * self.dp.beta * self.dp.k_h / self.es.c * (1.0 - h / H_A))
    }

    /// r^(eta) = 1/(beta C/eta + 1 + (beta/C) eta).
    pub fn r_hat(&self, eta: f64) -> f64 {
        let (b, c) = (self.dp.beta, self.es.c);
        1.0 / (b * c / eta + 1.0 + b / c * eta)
    }

    /// psi(eta) = alpha K_h / r^(eta).
    pub fn manifold_b(&self, eta: f64) -> Result<f64, ModelError> {
        Self::check_eta(eta)?;
        Ok(self.dp.alpha * self.dp.k_h / self.r_hat(eta))
    }

    /// psi'(eta) = alpha K_h (beta/C)(1 - C^2/eta^2).
    pub fn manifold_b_prime(&self, eta: f64) -> Result<f64, ModelError> {
        Self::check_eta(eta)?;
        let c = self.es.c;
        Ok(self.dp.alpha * self.dp.k_h * self.dp.beta / c * (1.0 - c * c / (eta * eta)))
    }

    /// F_A = (sigma_A, h_A) = (alpha beta K_h/(4C), 1/2).
    pub fn fold_a(&self) -> [f64; 2] {
        [
            self.dp.alpha * self.dp.beta * self.dp.k_h / (4.0 * self.es.c),
            H_A,
        ]
    }

    /// F_B = (s_B, eta_B) = (alpha (2 beta + 1) K_h, C).
    pub fn fold_b(&self) -> [f64; 2] {
        [
            self.dp.alpha * self.dp.k_h / self.r_hat(self.es.c),
            self.es.c,
        ]
    }

    /// Normal derivative d g~0/dh on the acidic manifold: -2 K_h (h - h_A)/h.
    pub fn stability_a(&self, h: f64) -> Result<f64, ModelError> {
        Self::check_h(h)?;
        if h == 0.0 {
            return Err(ModelError::domain("acidic manifold stability", "h > 0", h));
        }
        Ok(-2.0 * self.dp.k_h * (h - H_A) / h)
    }

    /// Normal derivative d g^0/d eta on the neutral manifold:
    /// (beta/C) K_h r^(eta) (eta^2 - eta_B^2)/(eta^2 + K_h/(alpha A K)).
    pub fn stability_b(&self, eta: f64) -> Result<f64, ModelError> {
        Self::check_eta(eta)?;
        let (dp, c, a) = (&self.dp, self.es.c, self.es.a);
        Ok(dp.beta / c * dp.k_h * self.r_hat(eta) * (eta * eta - c * c)
            / (eta * eta + dp.k_h / (dp.alpha * a * dp.k)))
    }

    pub fn branch_a(&self, h: f64) -> Result<Branch, ModelError> {
        if h == H_A {
            return Ok(Branch::Fold);
        }
        Ok(Branch::from_derivative(self.stability_a(h)?))
    }

    pub fn branch_b(&self, eta: f64) -> Result<Branch, ModelError> {
        if eta == self.es.c {
            return Ok(Branch::Fold);
        }
        Ok(Branch::from_derivative(self.stability_b(eta)?))
    }

    /// Reduced flow on the acidic manifold in slow time tau = eps t:
    /// dh/dtau = -C h_A (h - h_*)/(beta (h - h_A)).
    pub fn slow_flow_a(&self, h: f64) -> Result<f64, AnalysisError> {
        Self::check_h(h)?;
        if h == H_A {
            return Err(ModelError::Singular("slow flow at the acidic fold").into());
        }
        Ok(-self.es.c * H_A * (h - self.dp.h_star()) / (self.dp.beta * (h - H_A)))
    }

    /// Reduced flow on the neutral manifold in time t:
    /// d eta/dt = (C h_*/beta) eta^2/(eta_B^2 - eta^2).
    pub fn slow_flow_b(&self, eta: f64) -> Result<f64, AnalysisError> {
        Self::check_eta(eta)?;
        let c = self.es.c;
        if eta == c {
            return Err(ModelError::Singular("slow flow at the neutral fold").into());
        }
        Ok(c * self.dp.h_star() / self.dp.beta * eta * eta / (c * c - eta * eta))
    }

    /// d sigma/dtau on the acidic manifold: alpha K_h (h - h_*).
    pub fn slow_drift_a(&self, h: f64) -> f64 {
        self.dp.alpha * self.dp.k_h * (h - self.dp.h_star())
    }

    /// ds/dt on the neutral manifold: -alpha K_h h_*, independent of eta.
    pub fn slow_drift_b(&self) -> f64 {
        -self.dp.alpha * self.dp.k_h * self.dp.h_star()
    }

    /// Point of the attracting acidic branch (h > h_A) with slow coordinate sigma.
    pub fn attracting_point_a(&self, sigma: f64) -> Result<[f64; 2], ModelError> {
        let sigma_a = self.fold_a()[0];
        if !(sigma >= 0.0 && sigma <= sigma_a) {
            return Err(ModelError::domain(
                "attracting acidic branch",
                "0 <= sigma <= sigma_A",
                sigma,
            ));
        }
        Ok([sigma, H_A + (0.25 * (1.0 - sigma / sigma_a)).sqrt()])
    }

    /// Point of the attracting neutral branch (eta < eta_B) with slow coordinate s.
    pub fn attracting_point_b(&self, s: f64) -> Result<[f64; 2], ModelError> {
        let s_b = self.fold_b()[0];
        if !(s >= s_b && s.is_finite()) {
            return Err(ModelError::domain(
                "attracting neutral branch",
                "s >= s_B",
                s,
            ));
        }
        // psi(eta) = s  <=>  (beta/C) eta^2 + (1 - s/(alpha K_h)) eta + beta C = 0
        let (b, c) = (self.dp.beta, self.es.c);
        let p = b / c;
        let m = 1.0 - s / (self.dp.alpha * self.dp.k_h);
        let disc = (m * m - 4.0 * p * b * c).max(0.0).sqrt();
        // smaller root, written without cancellation (m < 0 on the branch)
        Ok([s, 2.0 * b * c / (-m + disc)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ChartA, ChartB};
    use crate::params::PhysicalParams;

    fn setup() -> Manifolds {
        let dp = PhysicalParams::table1().derive_dimensionless().unwrap();
        let es = dp.derive_eps_split(1e-3).unwrap();
        Manifolds::new(dp, es)
    }

    #[test]
    fn fold_values() {
        let m = setup();
        let [sigma_a, h_a] = m.fold_a();
        assert_eq!(h_a, 0.5);
        assert!((sigma_a - m.manifold_a(0.5).unwrap()).abs() < 1e-18);
        assert!((sigma_a - 1.62e-4).abs() < 5e-7, "{sigma_a}");
        let [s_b, eta_b] = m.fold_b();
        assert!((eta_b - 0.7692307692307693).abs() < 1e-15);
        let expected = m.dp.alpha * (2.0 * m.dp.beta + 1.0) * m.dp.k_h;
        assert!(
            (s_b - expected).abs() < 1e-15 && (s_b - 2.60e-2).abs() < 5e-5,
            "{s_b}"
        );
        assert_eq!(m.manifold_a(0.0).unwrap(), 0.0);
        assert_eq!(m.manifold_a(1.0).unwrap(), 0.0);
        assert!(m.manifold_a(1.5).is_err() && m.manifold_b(0.0).is_err());
    }

    #[test]
    fn manifolds_are_zero_sets_of_the_fast_equations() {
        let m = setup();
        for k in 1..200 {
            let h = k as f64 / 200.0;
            let g = ChartA::g0(&m.dp, m.es.c, m.manifold_a(h).unwrap(), h).unwrap();
            assert!(g.abs() < 1e-12, "h = {h}: {g}");
        }
        let b = ChartB::new(m.dp, m.es.at(0.0)).unwrap();
        for k in 1..=200 {
            let eta = 10.0 * m.es.c * k as f64 / 200.0;
            let g = b.g_hat(m.manifold_b(eta).unwrap(), eta).unwrap();
            assert!(g.abs() < 1e-12, "eta = {eta}: {g}");
        }
    }

    #[test]
    fn branches_and_flows() {
        let m = setup();
        assert_eq!(m.branch_a(0.8).unwrap(), Branch::Attracting);
        assert_eq!(m.branch_a(0.2).unwrap(), Branch::Repelling);
        assert_eq!(m.branch_a(0.5).unwrap(), Branch::Fold);
        assert_eq!(m.branch_b(0.3).unwrap(), Branch::Attracting);
        assert_eq!(m.branch_b(2.0).unwrap(), Branch::Repelling);
        assert_eq!(m.branch_b(m.es.c).unwrap(), Branch::Fold);
        assert!(m.slow_flow_a(0.7).unwrap() < 0.0);
        assert_eq!(m.slow_flow_a(m.dp.h_star()).unwrap(), 0.0);
        assert!(m.slow_flow_b(0.3).unwrap() > 0.0);
        assert!(m.slow_flow_b(2.0).unwrap() < 0.0);
        assert!(matches!(
            m.slow_flow_a(0.5),
            Err(AnalysisError::Model(ModelError::Singular(_)))
        ));
        assert!(m.slow_flow_b(m.es.c).is_err());
    }

    #[test]
    fn slow_flows_follow_from_the_chain_rule() {
        let m = setup();
        for h in [0.6, 0.75, 0.9] {
            let chain = m.slow_drift_a(h) / m.manifold_a_prime(h).unwrap();
            assert!((chain - m.slow_flow_a(h).unwrap()).abs() < 1e-12 * chain.abs());
        }
        for eta in [0.1, 0.5, 1.5] {
            let chain = m.slow_drift_b() / m.manifold_b_prime(eta).unwrap();
            assert!((chain - m.slow_flow_b(eta).unwrap()).abs() < 1e-12 * chain.abs());
        }
    }

    #[test]
    fn attracting_points_lie_on_the_manifolds() {
        let m = setup();
        let [sa, _] = m.fold_a();
        let [sigma, h] = m.attracting_point_a(0.6 * sa).unwrap();
        assert!(h > 0.5 && (m.manifold_a(h).unwrap() - sigma).abs() < 1e-18);
        let [sb, _] = m.fold_b();
        let [s, eta] = m.attracting_point_b(1.4 * sb).unwrap();
        assert!(eta < m.es.c && (m.manifold_b(eta).unwrap() - s).abs() < 1e-14);
    }
}
