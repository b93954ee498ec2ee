//! Four-stage-order-four Rosenbrock method (RODAS4 coefficient set) in the
//! transformed form W k_i = f(y + sum a_ij k_j) + sum (c_ij/h) k_j with
//! W = I/(h gamma) - J.

use crate::error::IntegrationError;

use super::events::Polish;
use super::{
    numeric_jacobian, DenseSegment, EventHit, EventSpec, IntegratorConfig, Mat2, Trajectory, Vec2,
    VectorField,
};

const GAMMA: f64 = 0.25;

const A21: f64 = 1.544;
const A31: f64 = 0.9466785280815826;
const A32: f64 = 0.2557011698983284;
const A41: f64 = 3.314825187068521;
const A42: f64 = 2.896124015972201;
const A43: f64 = 0.9986419139977817;
const A51: f64 = 1.221224509226641;
const A52: f64 = 6.019134481288629;
const A53: f64 = 12.53708332932087;
const A54: f64 = -0.687886036105895;

const C21: f64 = -5.6688;
const C31: f64 = -2.430093356833875;
const C32: f64 = -0.2063599157091915;
const C41: f64 = -0.1073529058151375;
const C42: f64 = -9.594562251023355;
const C43: f64 = -20.47028614809616;
const C51: f64 = 7.496443313967647;
const C52: f64 = -10.24680431464352;
const C53: f64 = -33.99990352819905;
const C54: f64 = 11.7089089320616;
const C61: f64 = 8.083246795921522;
const C62: f64 = -7.981132988064893;
const C63: f64 = -31.52159432874371;
const C64: f64 = 16.31930543123136;
const C65: f64 = -6.058818238834054;

const D2: [f64; 5] = [
    10.12623508344586,
    -7.487995877610167,
    -34.80091861555747,
    -7.992771707568823,
    1.025137723295662,
];
const D3: [f64; 5] = [
    -0.6762803392801253,
    6.087714651680015,
    16.43084320892478,
    24.76722511418386,
    -6.594389125716872,
];

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 6.0;

/// One attempted step.
pub(crate) struct StepResult {
    pub y1: Vec2,
    pub err: Vec2,
    pub d2: Vec2,
    pub d3: Vec2,
}

#[inline]
fn axpy(x: Vec2, terms: &[(f64, Vec2)]) -> Vec2 {
    let mut out = x;
    for (a, k) in terms {
        out[0] += a * k[0];
        out[1] += a * k[1];
    }
    out
}

struct Lin {
    w: Mat2,
    det: f64,
}

impl Lin {
    fn new(jac: &Mat2, h: f64) -> Option<Self> {
        let fac = 1.0 / (h * GAMMA);
        let w = [[fac - jac[0][0], -jac[0][1]], [-jac[1][0], fac - jac[1][1]]];
        let det = w[0][0] * w[1][1] - w[0][1] * w[1][0];
        (det.is_finite() && det != 0.0).then_some(Self { w, det })
    }

    #[inline]
    fn solve(&self, b: Vec2) -> Vec2 {
        let w = &self.w;
        [
            (w[1][1] * b[0] - w[0][1] * b[1]) / self.det,
            (w[0][0] * b[1] - w[1][0] * b[0]) / self.det,
        ]
    }
}

/// Takes a single Rosenbrock step of size `h` from `x` with `fx = f(x)`.
/// Returns `None` if a stage leaves the field's domain or is non-finite.
pub(crate) fn step<F: VectorField + ?Sized>(
    field: &F,
    x: Vec2,
    fx: Vec2,
    jac: &Mat2,
    h: f64,
) -> Option<StepResult> {
    let lin = Lin::new(jac, h)?;
    let eval = |y: Vec2| -> Option<Vec2> {
        if !field.in_domain(y) {
            return None;
        }
        field
            .eval(y)
            .ok()
            .filter(|f| f[0].is_finite() && f[1].is_finite())
    };
    let hi = 1.0 / h;
    let k1 = lin.solve(fx);
    let f = eval(axpy(x, &[(A21, k1)]))?;
    let k2 = lin.solve(axpy(f, &[(C21 * hi, k1)]));
    let f = eval(axpy(x, &[(A31, k1), (A32, k2)]))?;
    let k3 = lin.solve(axpy(f, &[(C31 * hi, k1), (C32 * hi, k2)]));
    let f = eval(axpy(x, &[(A41, k1), (A42, k2), (A43, k3)]))?;
    let k4 = lin.solve(axpy(f, &[(C41 * hi, k1), (C42 * hi, k2), (C43 * hi, k3)]));
    let y5 = axpy(x, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
    let f = eval(y5)?;
    let k5 = lin.solve(axpy(
        f,
        &[
            (C51 * hi, k1),
            (C52 * hi, k2),
            (C53 * hi, k3),
            (C54 * hi, k4),
        ],
    ));
    let y6 = axpy(y5, &[(1.0, k5)]);
    let f = eval(y6)?;
    let k6 = lin.solve(axpy(
        f,
        &[
            (C61 * hi, k1),
            (C62 * hi, k2),
            (C63 * hi, k3),
            (C64 * hi, k4),
            (C65 * hi, k5),
        ],
    ));
    let y1 = axpy(y6, &[(1.0, k6)]);
    if !(y1[0].is_finite() && y1[1].is_finite()) || !field.in_domain(y1) {
        return None;
    }
    let ks = [k1, k2, k3, k4, k5];
    let comb = |d: &[f64; 5]| -> Vec2 {
        let mut out = [0.0; 2];
        for (c, k) in d.iter().zip(ks.iter()) {
            out[0] += c * k[0];
            out[1] += c * k[1];
        }
        out
    };
    Some(StepResult {
        y1,
        err: k6,
        d2: comb(&D2),
        d3: comb(&D3),
    })
}

fn error_norm(cfg: &IntegratorConfig, y0: Vec2, res: &StepResult) -> f64 {
    let sum: f64 = (0..2)
        .map(|i| (res.err[i] / (cfg.atol + cfg.rtol * y0[i].abs().max(res.y1[i].abs()))).powi(2))
        .sum();
    (sum / 2.0).sqrt()
}

fn initial_step(cfg: &IntegratorConfig, x: Vec2, fx: Vec2, span: f64) -> f64 {
    let norm = |v: Vec2| {
        let s: f64 = (0..2)
            .map(|i| (v[i] / (cfg.atol + cfg.rtol * x[i].abs())).powi(2))
            .sum();
        (s / 2.0).sqrt()
    };
    let d0 = norm(x);
    let d1 = norm(fx);
    let h = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6 * span
    } else {
        0.01 * d0 / d1
    };
    h.max(span * 1e-12).min(span)
}

pub(crate) struct Solver<'s, 'e, 'a, F: ?Sized> {
    field: &'s F,
    cfg: &'s IntegratorConfig,
    events: &'e [EventSpec<'a>],
}

struct EventState {
    prev: f64,
    armed: bool,
}

impl<'s, 'e, 'a, F: VectorField + ?Sized> Solver<'s, 'e, 'a, F> {
    pub fn new(field: &'s F, cfg: &'s IntegratorConfig, events: &'e [EventSpec<'a>]) -> Self {
        Self { field, cfg, events }
    }

    fn jacobian(&self, x: Vec2) -> Option<Mat2> {
        let jac = match self.field.jacobian(x) {
            Some(j) => j.ok(),
            None => numeric_jacobian(self.field, x).ok(),
        }?;
        jac.iter().flatten().all(|v| v.is_finite()).then_some(jac)
    }

    pub fn run(&self, x0: Vec2, (t0, t_end): (f64, f64)) -> Result<Trajectory, IntegrationError> {
        let cfg = self.cfg;
        cfg.validate()?;
        if !(t0.is_finite() && t_end.is_finite() && t_end >= t0) {
            return Err(IntegrationError::InvalidInput(format!(
                "invalid time span [{t0}, {t_end}]"
            )));
        }
        if !self.field.in_domain(x0) {
            return Err(IntegrationError::InvalidInput(format!(
                "initial state {x0:?} outside the field's domain"
            )));
        }
        let mut fx = self.field.eval(x0)?;
        let mut traj = Trajectory::start(t0, x0);
        let mut states: Vec<EventState> = self
            .events
            .iter()
            .map(|e| {
                let g = e.value(t0, x0);
                EventState {
                    prev: g,
                    armed: g.abs() > 1e-10 * e.scale,
                }
            })
            .collect();
        if t_end == t0 {
            return Ok(traj);
        }
        let span = t_end - t0;
        let h_max = cfg.h_max.unwrap_or(span).min(span);
        let mut h = cfg
            .h_init
            .unwrap_or_else(|| initial_step(cfg, x0, fx, span))
            .min(h_max);
        let (mut t, mut x) = (t0, x0);
        let mut jac: Option<Mat2> = None;
        let mut last_rejected = false;
        let mut h_acc = h;
        let mut err_acc = 1e-2f64;
        let mut n_steps = 0usize;

        loop {
            if n_steps >= cfg.max_steps {
                return Err(IntegrationError::BudgetExceeded {
                    max_steps: cfg.max_steps,
                    t,
                });
            }
            let remaining = t_end - t;
            let last = h >= remaining * (1.0 - 1e-12);
            if last {
                h = remaining;
            }
            if h <= 10.0 * f64::EPSILON * t.abs().max(1e-300) || h < 1e-300 {
                return Err(IntegrationError::StepSizeUnderflow { t, h });
            }
            if jac.is_none() {
                jac = self.jacobian(x);
                if jac.is_none() {
                    return Err(IntegrationError::StepSizeUnderflow { t, h: 0.0 });
                }
            }
            n_steps += 1;
            let attempt = step(
                self.field,
                x,
                fx,
                jac.as_ref().expect("jacobian present"),
                h,
            );
            let Some(res) = attempt else {
                traj.n_rejected += 1;
                last_rejected = true;
                h *= 0.25;
                continue;
            };
            let err = error_norm(cfg, x, &res);
            let mut fac = (err.powf(0.25) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            if err > 1.0 || !err.is_finite() {
                traj.n_rejected += 1;
                last_rejected = true;
                h = if err.is_finite() { h / fac } else { h * 0.25 };
                continue;
            }
            // accepted
            if n_steps > 1 {
                let gus = ((h_acc / h) * (err * err / err_acc).powf(0.25) / SAFETY)
                    .clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                fac = fac.max(gus);
            }
            h_acc = h;
            err_acc = err.max(1e-2);
            let t1 = if last { t_end } else { t + h };
            let seg = DenseSegment {
                t0: t,
                h,
                y0: x,
                y1: res.y1,
                d2: res.d2,
                d3: res.d3,
            };
            traj.n_steps += 1;
            if let Some(stop) = self.scan_events(&seg, &mut states, &mut traj)? {
                traj.push_final(stop.t, stop.x, seg, cfg.record_steps);
                return Ok(traj);
            }
            traj.push(t1, res.y1, seg, cfg.record_steps);
            if last {
                if !cfg.record_steps {
                    traj.close(t1, res.y1);
                }
                return Ok(traj);
            }
            t = t1;
            x = res.y1;
            fx = self.field.eval(x)?;
            jac = None;
            let mut h_new = h / fac;
            if last_rejected {
                h_new = h_new.min(h);
            }
            last_rejected = false;
            h = h_new.min(h_max);
        }
    }

    /// Scans the accepted step for event crossings. Non-terminal hits are
    /// appended in time order; the earliest terminal hit, if any, is returned.
    fn scan_events(
        &self,
        seg: &DenseSegment,
        states: &mut [EventState],
        traj: &mut Trajectory,
    ) -> Result<Option<EventHit>, IntegrationError> {
        if self.events.is_empty() {
            return Ok(None);
        }
        const THETAS: [f64; 4] = [0.25, 0.5, 0.75, 1.0];
        let mut hits: Vec<EventHit> = Vec::new();
        for (index, (ev, st)) in self.events.iter().zip(states.iter_mut()).enumerate() {
            let thr = 1e-10 * ev.scale;
            let mut ta = seg.t0;
            let mut ga = st.prev;
            for theta in THETAS {
                let tb = if theta == 1.0 {
                    seg.t0 + seg.h
                } else {
                    seg.t0 + theta * seg.h
                };
                let xb = seg.eval(tb);
                let gb = ev.value(tb, xb);
                if !st.armed {
                    if gb.abs() > thr {
                        st.armed = true;
                    }
                } else if ev.direction.crosses(ga, gb) {
                    hits.push(self.locate(index, ev, seg, ta, (tb, gb))?);
                    if ev.terminal {
                        break;
                    }
                }
                ta = tb;
                ga = gb;
            }
            st.prev = ga;
        }
        hits.sort_by(|a, b| a.t.total_cmp(&b.t));
        let stop_at = hits.iter().position(|h| self.events[h.index].terminal);
        let keep = stop_at.map_or(hits.len(), |i| i + 1);
        let stop = stop_at.map(|i| hits[i]);
        for hit in &hits[..keep] {
            traj.events.push(*hit);
        }
        Ok(stop)
    }

    fn locate(
        &self,
        index: usize,
        ev: &EventSpec<'_>,
        seg: &DenseSegment,
        ta: f64,
        (tb, gb): (f64, f64),
    ) -> Result<EventHit, IntegrationError> {
        if gb == 0.0 {
            return Ok(EventHit {
                index,
                t: tb,
                x: seg.eval(tb),
                value: 0.0,
            });
        }
        let g = |t: f64| ev.value(t, seg.eval(t));
        let t_scale = tb.abs().max(seg.h);
        let mut conv = Polish {
            xtol: 1e-12 * t_scale,
            ytol: 1e-10 * ev.scale * 1e-3,
        };
        let t = roots::find_root_brent(ta, tb, g, &mut conv).map_err(|_| {
            IntegrationError::EventBracket {
                index,
                t_lo: ta,
                t_hi: tb,
            }
        })?;
        let x = seg.eval(t);
        Ok(EventHit {
            index,
            t,
            x,
            value: ev.value(t, x),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ModelError;

    /// Pendulum, nonlinear enough to exercise all order conditions.
    struct Pendulum;
    impl VectorField for Pendulum {
        fn eval(&self, x: Vec2) -> Result<Vec2, ModelError> {
            Ok([x[1], -x[0].sin()])
        }
        fn jacobian(&self, x: Vec2) -> Option<Result<Mat2, ModelError>> {
            Some(Ok([[0.0, 1.0], [-x[0].cos(), 0.0]]))
        }
    }

    fn fixed(n: usize, t_end: f64) -> (Vec2, f64) {
        let h = t_end / n as f64;
        let mut x = [1.0, 0.0];
        let mut dense_err = 0.0f64;
        for _ in 0..n {
            let fx = Pendulum.eval(x).unwrap();
            let jac = Pendulum.jacobian(x).unwrap().unwrap();
            let res = step(&Pendulum, x, fx, &jac, h).unwrap();
            let seg = DenseSegment {
                t0: 0.0,
                h,
                y0: x,
                y1: res.y1,
                d2: res.d2,
                d3: res.d3,
            };
            // dense midpoint against a fine sub-integration from x
            let mut z = x;
            for _ in 0..64 {
                let fz = Pendulum.eval(z).unwrap();
                let jz = Pendulum.jacobian(z).unwrap().unwrap();
                z = step(&Pendulum, z, fz, &jz, h / 128.0).unwrap().y1;
            }
            let mid = seg.eval(0.5 * h);
            dense_err = dense_err.max((mid[0] - z[0]).abs().max((mid[1] - z[1]).abs()));
            x = res.y1;
        }
        (x, dense_err)
    }

    #[test]
    fn global_order_four() {
        let t_end = 2.0;
        let (reference, _) = fixed(4096, t_end);
        let errs: Vec<f64> = [16, 32, 64]
            .iter()
            .map(|&n| {
                let (x, _) = fixed(n, t_end);
                (x[0] - reference[0]).abs().max((x[1] - reference[1]).abs())
            })
            .collect();
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!(
                (order - 4.0).abs() < 0.35,
                "observed order {order}, errors {errs:?}"
            );
        }
    }

    #[test]
    fn local_error_estimate_order_four() {
        // the embedded estimate is a local error of an order-3 method: O(h^4)
        let x = [1.0, 0.0];
        let fx = Pendulum.eval(x).unwrap();
        let jac = Pendulum.jacobian(x).unwrap().unwrap();
        let e = |h: f64| {
            let r = step(&Pendulum, x, fx, &jac, h).unwrap();
            r.err[0].abs().max(r.err[1].abs())
        };
        let order = (e(0.1) / e(0.05)).log2();
        assert!((order - 4.0).abs() < 0.4, "estimate order {order}");
    }

    #[test]
    fn dense_output_order_three() {
        let (_, e1) = fixed(16, 2.0);
        let (_, e2) = fixed(32, 2.0);
        // local interpolation error O(h^4)
        let order = (e1 / e2).log2();
        assert!(order > 3.6, "dense order {order} ({e1:e}, {e2:e})");
    }

    #[test]
    fn stiff_linear_decay_is_damped() {
        // L-stability: a huge step on y' = -1e8 (y - 1) lands on the equilibrium
        struct Stiff;
        impl VectorField for Stiff {
            fn eval(&self, x: Vec2) -> Result<Vec2, ModelError> {
                Ok([-1e8 * (x[0] - 1.0), -x[1]])
            }
        }
        let x = [0.0, 1.0];
        let fx = Stiff.eval(x).unwrap();
        let jac = numeric_jacobian(&Stiff, x).unwrap();
        let r = step(&Stiff, x, fx, &jac, 1.0).unwrap();
        assert!((r.y1[0] - 1.0).abs() < 1e-6, "{:?}", r.y1);
    }
}
