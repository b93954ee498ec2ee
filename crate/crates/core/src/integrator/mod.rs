//! Adaptive Rosenbrock integration of stiff planar vector fields, with dense
//! output and event localization.
//!
//! The scheme is the L-stable four-stage-order-four Rosenbrock method with an
//! embedded order-three error estimate and a continuous extension of order
//! three. Events are located on the continuous extension, so their timing is
//! not limited by the (often large) step size on slow manifolds.

mod events;
mod rodas;
mod trajectory;

pub use events::{Direction, EventHit, EventSpec};
pub use trajectory::{DenseSegment, Trajectory};

use crate::error::{IntegrationError, ModelError};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

/// An autonomous planar vector field.
pub trait VectorField: Sync {
    fn eval(&self, x: Vec2) -> Result<Vec2, ModelError>;

    /// Closed-form Jacobian, if the field has one. The default asks the
    /// integrator to use central differences.
    fn jacobian(&self, _x: Vec2) -> Option<Result<Mat2, ModelError>> {
        None
    }

    /// Whether a state is admissible; steps that leave the domain are rejected.
    fn in_domain(&self, x: Vec2) -> bool {
        x[0].is_finite() && x[1].is_finite()
    }
}

impl<F: VectorField + ?Sized> VectorField for &F {
    fn eval(&self, x: Vec2) -> Result<Vec2, ModelError> {
        (**self).eval(x)
    }

    fn jacobian(&self, x: Vec2) -> Option<Result<Mat2, ModelError>> {
        (**self).jacobian(x)
    }

    fn in_domain(&self, x: Vec2) -> bool {
        (**self).in_domain(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated from the field when `None`.
    pub h_init: Option<f64>,
    /// Largest allowed step; the span length when `None`.
    pub h_max: Option<f64>,
    pub max_steps: usize,
    /// Keep every accepted step (and its dense output). When false only the
    /// end points and event hits are retained.
    pub record_steps: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_init: None,
            h_max: None,
            max_steps: 10_000_000,
            record_steps: true,
        }
    }
}

impl IntegratorConfig {
    pub fn with_tolerances(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), IntegrationError> {
        if !(self.rtol > 0.0 && self.rtol <= 1e-3) {
            return Err(IntegrationError::InvalidInput(format!(
                "rtol must lie in (0, 1e-3], got {}",
                self.rtol
            )));
        }
        if !(self.atol > 0.0 && self.atol.is_finite()) {
            return Err(IntegrationError::InvalidInput(format!(
                "atol must be positive, got {}",
                self.atol
            )));
        }
        if self.max_steps == 0 {
            return Err(IntegrationError::InvalidInput(
                "max_steps must be positive".into(),
            ));
        }
        for (name, v) in [("h_init", self.h_init), ("h_max", self.h_max)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(IntegrationError::InvalidInput(format!(
                        "{name} must be positive, got {v}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Result of [`integrate_until_event`].
#[derive(Debug, Clone)]
pub enum EventOutcome {
    Hit {
        t: f64,
        x: Vec2,
        trajectory: Trajectory,
    },
    NoHit {
        trajectory: Trajectory,
    },
}

impl EventOutcome {
    pub fn trajectory(&self) -> &Trajectory {
        match self {
            Self::Hit { trajectory, .. } | Self::NoHit { trajectory } => trajectory,
        }
    }

    pub fn hit(&self) -> Option<(f64, Vec2)> {
        match self {
            Self::Hit { t, x, .. } => Some((*t, *x)),
            Self::NoHit { .. } => None,
        }
    }
}

/// Integrates `field` from `x0` over `t_span`, recording the given events.
/// Integration stops early at the first hit of a terminal event.
pub fn integrate<F: VectorField + ?Sized>(
    field: &F,
    x0: Vec2,
    t_span: (f64, f64),
    cfg: &IntegratorConfig,
    events: &[EventSpec<'_>],
) -> Result<Trajectory, IntegrationError> {
    rodas::Solver::new(field, cfg, events).run(x0, t_span)
}

/// Integrates until the first hit of `event` in its direction, or until `t_max`.
/// The event is treated as terminal regardless of its flag.
pub fn integrate_until_event<F: VectorField + ?Sized>(
    field: &F,
    x0: Vec2,
    event: EventSpec<'_>,
    cfg: &IntegratorConfig,
    t_max: f64,
) -> Result<EventOutcome, IntegrationError> {
    let event = event.terminal(true);
    let traj = integrate(field, x0, (0.0, t_max), cfg, std::slice::from_ref(&event))?;
    Ok(match traj.events.first() {
        Some(hit) => EventOutcome::Hit {
            t: hit.t,
            x: hit.x,
            trajectory: traj,
        },
        None => EventOutcome::NoHit { trajectory: traj },
    })
}

/// Central-difference Jacobian with step sqrt(machine epsilon) times the
/// coordinate scale, falling back to one-sided differences at the domain edge.
pub fn numeric_jacobian<F: VectorField + ?Sized>(field: &F, x: Vec2) -> Result<Mat2, ModelError> {
    let mut jac = [[0.0; 2]; 2];
    let f0 = field.eval(x)?;
    for j in 0..2 {
        let delta = f64::EPSILON.sqrt() * x[j].abs().max(1e-8);
        let mut xp = x;
        let mut xm = x;
        xp[j] += delta;
        xm[j] -= delta;
        let fp = field.eval(xp)?;
        let (fm, span) = match field.in_domain(xm).then(|| field.eval(xm)) {
            Some(Ok(fm)) => (fm, 2.0 * delta),
            _ => (f0, delta),
        };
        for i in 0..2 {
            jac[i][j] = (fp[i] - fm[i]) / span;
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Decay;
    impl VectorField for Decay {
        fn eval(&self, x: Vec2) -> Result<Vec2, ModelError> {
            Ok([-x[0], -2.0 * x[1]])
        }
    }

    #[test]
    fn numeric_jacobian_of_linear_field() {
        let j = numeric_jacobian(&Decay, [0.3, 2.0]).unwrap();
        assert!((j[0][0] + 1.0).abs() < 1e-8 && (j[1][1] + 2.0).abs() < 1e-8);
        assert!(j[0][1].abs() < 1e-12 && j[1][0].abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        assert!(IntegratorConfig::default().validate().is_ok());
        assert!(IntegratorConfig::with_tolerances(0.1, 1e-12)
            .validate()
            .is_err());
        assert!(IntegratorConfig::with_tolerances(1e-8, 0.0)
            .validate()
            .is_err());
        let cfg = IntegratorConfig {
            max_steps: 0,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}
