//! Vector fields of the pH oscillator: the original two-variable model, its
//! single-ε form, the two rescaled charts, and the reference model in
//! physical units.

mod charts;
mod coords;
mod reference;

pub use charts::{ChartA, ChartB, QBranch};
pub use coords::{from_log, to_log};
pub use reference::{f_h, rhs_reference, ReferenceModel};

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::integrator::{Mat2, Vec2, VectorField};
use crate::params::DimlessParams;

/// A point of the original model, dimensionless substrate and acid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct State {
    pub s: f64,
    pub h: f64,
}

/// Chart-A coordinates: sigma = eps s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartAState {
    pub sigma: f64,
    pub h: f64,
}

/// Chart-B coordinates: eta = h / eps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartBState {
    pub s: f64,
    pub eta: f64,
}

/// Negative decimal logarithms of the molar concentrations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogState {
    #[serde(rename = "pS")]
    pub ps: f64,
    #[serde(rename = "pH")]
    pub ph: f64,
}

impl State {
    pub fn new(s: f64, h: f64) -> Self {
        Self { s, h }
    }

    pub fn to_vec(self) -> Vec2 {
        [self.s, self.h]
    }

    pub fn from_vec(x: Vec2) -> Self {
        Self { s: x[0], h: x[1] }
    }

    pub fn is_valid(&self) -> bool {
        self.s.is_finite() && self.h.is_finite() && self.s >= 0.0 && self.h >= 0.0
    }
}

/// Non-negative root of q^2 + v q - w = 0 for w >= 0, evaluated without
/// subtracting nearly equal numbers.
#[inline]
pub fn stable_root(v: f64, w: f64) -> f64 {
    let disc = (v * v + 4.0 * w).sqrt();
    if v <= 0.0 {
        0.5 * (disc - v)
    } else {
        2.0 * w / (v + disc)
    }
}

/// Bell-shaped rate r(h) = 1/(beta eps1/h + 1 + beta h/eps1), maximal at h = eps1.
pub fn rate_r(h: f64, dp: &DimlessParams) -> Result<f64, ModelError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(ModelError::domain("rate r(h)", "h > 0", h));
    }
    Ok(1.0 / (dp.beta * dp.eps1 / h + 1.0 + dp.beta * h / dp.eps1))
}

/// v(h) = alpha K h^2 / eps2 - K_h (1 - h).
pub fn v_func(h: f64, dp: &DimlessParams) -> f64 {
    dp.alpha * dp.k / dp.eps2 * h * h - dp.k_h * (1.0 - h)
}

/// Ammonium production rate q(s, h), the non-negative root of
/// q^2 + v(h) q - K r(h) h^2 s / eps2 = 0.
pub fn q_func(s: f64, h: f64, dp: &DimlessParams) -> Result<f64, ModelError> {
    if !(s >= 0.0 && s.is_finite()) {
        return Err(ModelError::domain("q(s, h)", "s >= 0", s));
    }
    let r = rate_r(h, dp)?;
    let w = dp.k / dp.eps2 * r * h * h * s;
    Ok(stable_root(v_func(h, dp), w))
}

/// Right-hand side (ds/dt, dh/dt) of the original model.
pub fn rhs(state: State, dp: &DimlessParams) -> Result<Vec2, ModelError> {
    let r = rate_r(state.h, dp)?;
    let q = q_func(state.s, state.h, dp)?;
    Ok([-r * state.s + dp.k_s, -q + dp.k_h * (1.0 - state.h)])
}

/// Jacobian of [`rhs`] with respect to (s, h), from closed-form partials.
pub fn jacobian(state: State, dp: &DimlessParams) -> Result<Mat2, ModelError> {
    let State { s, h } = state;
    let r = rate_r(h, dp)?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(ModelError::domain("q(s, h)", "s >= 0", s));
    }
    let d_prime = -dp.beta * dp.eps1 / (h * h) + dp.beta / dp.eps1;
    let r_h = -d_prime * r * r;
    let kk = dp.k / dp.eps2;
    let v = v_func(h, dp);
    let v_h = 2.0 * dp.alpha * kk * h + dp.k_h;
    let w = kk * r * h * h * s;
    let w_s = kk * r * h * h;
    let w_h = kk * s * (r_h * h * h + 2.0 * r * h);
    let q = stable_root(v, w);
    let denom = (v * v + 4.0 * w).sqrt();
    if denom == 0.0 {
        return Err(ModelError::Singular("q(s, h) derivative"));
    }
    let q_s = w_s / denom;
    let q_h = (w_h - q * v_h) / denom;
    Ok([[-r, -r_h * s], [-q_s, -q_h - dp.k_h]])
}

/// The original model as an autonomous vector field in (s, h).
///
/// The single-ε system is this field with `dp.with_split(&es)`.
#[derive(Debug, Clone, Copy)]
pub struct OriginalModel {
    pub dp: DimlessParams,
}

impl OriginalModel {
    pub fn new(dp: DimlessParams) -> Self {
        Self { dp }
    }
}

impl VectorField for OriginalModel {
    fn eval(&self, x: Vec2) -> Result<Vec2, ModelError> {
        rhs(State::from_vec(x), &self.dp)
    }

    fn jacobian(&self, x: Vec2) -> Option<Result<Mat2, ModelError>> {
        Some(jacobian(State::from_vec(x), &self.dp))
    }

    fn in_domain(&self, x: Vec2) -> bool {
        x[0].is_finite() && x[1].is_finite() && x[0] >= 0.0 && x[1] > 0.0
    }
}
