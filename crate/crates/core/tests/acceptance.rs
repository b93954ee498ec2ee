//! Exit criteria. Every criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use phoscil::cycle::{analytic_timescales, find_limit_cycle, reference_cycle};
use phoscil::gspt::{
    default_eps_list, fixed_point, fold_passage_offset, passage_config, stability_scan,
    verify_generic_fold, Chart, FoldReport, Manifolds, ScanGrid,
};
use phoscil::integrator::{integrate, IntegratorConfig};
use phoscil::model::{q_func, rate_r, v_func, ChartA, ChartB, OriginalModel, QBranch};
use phoscil::params::{DimlessParams, EpsSplit, PhysicalParams, DEFAULT_EPS_REF};

// Pinned tolerances.
const FIXED_POINT_ABS: f64 = 1e-3;
const PERIOD_REL: f64 = 0.02;
const SEGMENT_REL: f64 = 0.05;
const CYCLE_RTOL: f64 = 1e-10;
const CLOSED_FORM_REL: f64 = 1e-9;
const FD_REL: f64 = 1e-5;
const SLOPE_BAND: (f64, f64) = (0.57, 0.77);
const MIN_DECADES: f64 = 1.5;
const SCAN_SHAPE: (usize, usize) = (200, 200);
const Q_RESIDUAL: f64 = 1e-10;
const MANIFOLD_ZERO: f64 = 1e-12;
const SEAM_REL: f64 = 1e-8;
const WINDING_TOL: f64 = 1e-3;
const CROSS_MODEL_REL: f64 = 0.10;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn setup() -> (PhysicalParams, DimlessParams, EpsSplit) {
    let phys = PhysicalParams::table1();
    let dp = phys.derive_dimensionless().expect("laboratory parameters");
    let es = dp.derive_eps_split(DEFAULT_EPS_REF).expect("eps split");
    (phys, dp, es)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Whether `x` equals `reference` to `n` significant figures of the reference.
fn same_figures(x: f64, reference: f64, n: i32) -> bool {
    let unit = 10f64.powi(reference.abs().log10().floor() as i32 - (n - 1));
    (x - reference).abs() <= 0.5 * unit
}

fn fixed_point_criterion() -> Outcome {
    let (_, dp, _) = setup();
    match fixed_point(&dp) {
        Ok(fp) => {
            let pass = (fp.s_star - 0.0762).abs() <= FIXED_POINT_ABS
                && (fp.h_star - 0.0906).abs() <= FIXED_POINT_ABS
                && fp.classification.is_repelling();
            outcome(
                pass,
                format!(
                    "(s*, h*) = ({:.6}, {:.6}), {}",
                    fp.s_star,
                    fp.h_star,
                    fp.classification.label()
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

fn period_table_criterion() -> Outcome {
    let (_, dp, es) = setup();
    let cfg = IntegratorConfig::with_tolerances(CYCLE_RTOL, 1e-12);
    let table = [
        (1e-3, 90.2, 23.0, 67.2),
        (1e-4, 945.0, 120.0, 825.0),
        (1e-5, 8.46e3, 975.0, 7.48e3),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (eps, period, ba, ab) in table {
        match find_limit_cycle(&dp, &es.at(eps), None, &cfg).and_then(|c| c.require_converged()) {
            Ok(c) => {
                pass &= rel(c.period, period) <= PERIOD_REL
                    && rel(c.tau_b_to_a, ba) <= SEGMENT_REL
                    && rel(c.tau_a_to_b, ab) <= SEGMENT_REL;
                parts.push(format!(
                    "eps {eps:.0e}: {:.4} = {:.4} + {:.4}",
                    c.period, c.tau_b_to_a, c.tau_a_to_b
                ));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("eps {eps:.0e}: {e}"));
            }
        }
    }
    outcome(pass, parts.join("; "))
}

fn analytic_timescales_criterion() -> Outcome {
    let (_, dp, es) = setup();
    match analytic_timescales(&dp, &es) {
        Ok(t) => {
            let pass = same_figures(t.t_acid, 9.0095, 4)
                && same_figures(t.t_basic, 71.745, 4)
                && same_figures(t.ratio, 7.9632, 4)
                && same_figures(t.w, 0.347, 3);
            outcome(
                pass,
                format!(
                    "T_acid {:.5}, T_basic {:.5}, ratio {:.5}, w {:.5}",
                    t.t_acid, t.t_basic, t.ratio, t.w
                ),
            )
        }
        Err(e) => outcome(false, e.to_string()),
    }
}

/// The nonvanishing quantities agree with their differences to FD_REL; the
/// vanishing first derivative is judged against curvature times coordinate.
fn fd_agrees(rep: &FoldReport, fast_coordinate: f64) -> bool {
    let fd = rep.finite_difference;
    rel(fd.d2g0_fast, rep.d2g0_fast) <= FD_REL
        && rel(fd.dg0_slow, rep.dg0_slow) <= FD_REL
        && rel(fd.f0_value, rep.f0_value) <= FD_REL
        && (fd.dg0_fast - rep.dg0_fast).abs() <= FD_REL * rep.d2g0_fast.abs() * fast_coordinate
}

fn fold_criterion() -> Outcome {
    let (_, dp, es) = setup();
    let (a, b) = match (
        verify_generic_fold(Chart::A, &es, &dp),
        verify_generic_fold(Chart::B, &es, &dp),
    ) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return outcome(false, e.to_string()),
    };
    let closed = rel(a.d2g0_fast, -4.0 * dp.k_h) <= CLOSED_FORM_REL
        && rel(a.dg0_slow, -2.0 * es.c / (dp.alpha * dp.beta)) <= CLOSED_FORM_REL
        && rel(b.f0_value, -dp.alpha * dp.k_h * dp.h_star()) <= CLOSED_FORM_REL;
    let fd = fd_agrees(&a, a.fold_location[1]) && fd_agrees(&b, b.fold_location[1]);
    outcome(
        closed && fd && a.is_generic && b.is_generic,
        format!(
            "A: d2g0 {:.10} dg0_sigma {:.6}; B: f0 {:.10}; generic A {} B {}; differences agree {fd}",
            a.d2g0_fast, a.dg0_slow, b.f0_value, a.is_generic, b.is_generic
        ),
    )
}

fn passage_criterion() -> Outcome {
    let (_, dp, es) = setup();
    let eps = default_eps_list();
    let decades = (eps.iter().cloned().fold(0.0, f64::max)
        / eps.iter().cloned().fold(f64::INFINITY, f64::min))
    .log10();
    let mut pass = decades >= MIN_DECADES;
    let mut parts = vec![format!("{decades:.1} decades")];
    for chart in [Chart::A, Chart::B] {
        match fold_passage_offset(chart, &eps, &dp, &es, &passage_config()) {
            Ok(rep) => {
                pass &= (SLOPE_BAND.0..=SLOPE_BAND.1).contains(&rep.slope);
                parts.push(format!("chart {chart:?} slope {:.4}", rep.slope));
            }
            Err(e) => {
                pass = false;
                parts.push(format!("chart {chart:?}: {e}"));
            }
        }
    }
    outcome(pass, parts.join(", "))
}

fn scan_criterion() -> Outcome {
    let (_, dp, _) = setup();
    let grid = ScanGrid {
        kh_over_ks: (1.0, 20.0),
        inv_alpha: (1.0, 12.0),
        shape: SCAN_SHAPE,
    };
    let map = match stability_scan(&dp, &grid) {
        Ok(m) => m,
        Err(e) => return outcome(false, e.to_string()),
    };
    let cell = map.nearest(dp.k_h / dp.k_s, 1.0 / dp.alpha);
    let below = map.cells.iter().filter(|c| c.kh_over_ks < c.inv_alpha);
    let below_count = below.clone().count();
    let below_ok = below.clone().all(|c| !c.admissible && !c.oscillates);
    outcome(
        cell.oscillates && below_ok,
        format!(
            "cell ({:.3}, {:.3}) oscillates {}, {below_count} cells below the line all inadmissible {below_ok}",
            cell.kh_over_ks, cell.inv_alpha, cell.oscillates
        ),
    )
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> + Clone {
    (0..n).map(move |k| lo * (hi / lo).powf(k as f64 / (n - 1) as f64))
}

fn property_criterion() -> Outcome {
    let (_, dp, es) = setup();
    let mut failures = Vec::new();

    let mut worst = 0.0f64;
    for s in log_grid(1e-4, 10.0, 60) {
        for h in log_grid(1e-6, 2.0, 60) {
            let q = q_func(s, h, &dp).unwrap();
            let v = v_func(h, &dp);
            let w = dp.k / dp.eps2 * rate_r(h, &dp).unwrap() * h * h * s;
            let scale = (q * q).max((v * q).abs()).max(w);
            worst = worst.max((q * q + v * q - w).abs() / scale);
        }
    }
    if worst > Q_RESIDUAL {
        failures.push(format!("q residual {worst:e}"));
    }

    let m = Manifolds::new(dp, es);
    let chart_b0 = ChartB::new(dp, es.at(0.0)).unwrap();
    let mut zero = 0.0f64;
    for h in log_grid(1e-4, 0.999, 200) {
        zero = zero.max(
            ChartA::g0(&dp, es.c, m.manifold_a(h).unwrap(), h)
                .unwrap()
                .abs(),
        );
    }
    for eta in log_grid(1e-3, 50.0, 200) {
        zero = zero.max(
            chart_b0
                .g_hat(m.manifold_b(eta).unwrap(), eta)
                .unwrap()
                .abs(),
        );
    }
    if zero > MANIFOLD_ZERO * dp.k_h {
        failures.push(format!("manifold residual {zero:e}"));
    }

    let mut seam = 0.0f64;
    for eps in [1e-5, 1e-4, 1e-3] {
        let a = ChartA::new(dp, es.at(eps)).unwrap();
        let hp = a.h_plus();
        for sigma in log_grid(1e-6, 1e-2, 20) {
            let at = a.q_tilde_branch(QBranch::Seam, sigma, hp).unwrap();
            let below = a
                .q_tilde_branch(QBranch::Below, sigma, hp * (1.0 - 1e-12))
                .unwrap();
            let above = a
                .q_tilde_branch(QBranch::Above, sigma, hp * (1.0 + 1e-12))
                .unwrap();
            seam = seam.max(rel(below, at)).max(rel(above, at));
        }
    }
    if seam > SEAM_REL {
        failures.push(format!("seam mismatch {seam:e}"));
    }

    let cfg = IntegratorConfig::with_tolerances(1e-8, 1e-12);
    let field = OriginalModel::new(dp);
    let mut positive = true;
    for s0 in [0.0, 0.05, 0.5, 2.0] {
        for h0 in [1e-6, 0.01, 0.5, 1.2] {
            match integrate(&field, [s0, h0], (0.0, 300.0), &cfg, &[]) {
                Ok(traj) => positive &= traj.x.iter().all(|x| x[0] >= 0.0 && x[1] > 0.0),
                Err(_) => positive = false,
            }
        }
    }
    let mut winding = Vec::new();
    for eps in [1e-3, 1e-4, 1e-5] {
        match find_limit_cycle(&dp, &es.at(eps), None, &IntegratorConfig::default()) {
            Ok(c) => {
                positive &= c.trajectory.x.iter().all(|x| x[0] > 0.0 && x[1] > 0.0);
                winding.push(c.winding_number);
            }
            Err(e) => failures.push(format!("cycle at {eps:e}: {e}")),
        }
    }
    if !positive {
        failures.push("trajectory left the positive quadrant".into());
    }
    // the cycle runs clockwise in (s, h): one full turn, negative orientation
    if winding.iter().any(|w| (w.abs() - 1.0).abs() > WINDING_TOL) {
        failures.push(format!("winding numbers {winding:?}"));
    }

    let summary = format!(
        "q residual {worst:.1e}, manifold residual {zero:.1e}, seam {seam:.1e}, positive {positive}, winding {:?}",
        winding.iter().map(|w| format!("{w:.6}")).collect::<Vec<_>>()
    );
    if failures.is_empty() {
        outcome(true, summary)
    } else {
        outcome(false, format!("{summary}; {}", failures.join("; ")))
    }
}

fn cross_model_criterion() -> Outcome {
    let (phys, dp, es) = setup();
    let cfg = IntegratorConfig::default();
    let simplified =
        match find_limit_cycle(&dp, &es, None, &cfg).and_then(|c| c.require_converged()) {
            Ok(c) => c,
            Err(e) => return outcome(false, e.to_string()),
        };
    let reference = match reference_cycle(&phys, &cfg) {
        Ok(r) if r.converged => r,
        Ok(_) => return outcome(false, "reference cycle did not converge"),
        Err(e) => return outcome(false, e.to_string()),
    };
    let gap = rel(reference.period, simplified.period);
    outcome(
        gap <= CROSS_MODEL_REL,
        format!(
            "reference {:.4} ({:.1} s) vs simplified {:.4}: relative gap {:.3} (band {CROSS_MODEL_REL})",
            reference.period, reference.period_s, simplified.period, gap
        ),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("fixed point", fixed_point_criterion),
        ("period table", period_table_criterion),
        ("analytic timescales", analytic_timescales_criterion),
        ("fold genericity", fold_criterion),
        ("fold-passage scaling", passage_criterion),
        ("stability scan", scan_criterion),
        ("property suites", property_criterion),
        ("cross-model validation", cross_model_criterion),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = run();
        let verdict = if out.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {} [{name}]: {verdict} ({:.2?}) {}",
            k + 1,
            start.elapsed(),
            out.detail
        );
        if !out.pass {
            failed += 1;
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
