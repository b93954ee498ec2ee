use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::params::DimlessParams;

use super::fixed_point::fixed_point;

/// Rectangle in the (K_h/K_s, 1/alpha) plane and its sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanGrid {
    pub kh_over_ks: (f64, f64),
    pub inv_alpha: (f64, f64),
    /// Number of samples along K_h/K_s and along 1/alpha, endpoints included.
    pub shape: (usize, usize),
}

impl ScanGrid {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo > 0.0 && hi >= lo;
        if !ok(self.kh_over_ks) || !ok(self.inv_alpha) {
            return Err(AnalysisError::Precondition(format!(
                "scan ranges must be positive and ordered, got {:?} x {:?}",
                self.kh_over_ks, self.inv_alpha
            )));
        }
        if self.shape.0 == 0 || self.shape.1 == 0 {
            return Err(AnalysisError::Precondition(
                "scan grid must have at least one cell per axis".into(),
            ));
        }
        Ok(())
    }

    fn axis(range: (f64, f64), n: usize, k: usize) -> f64 {
        if n == 1 {
            range.0
        } else {
            range.0 + (range.1 - range.0) * k as f64 / (n - 1) as f64
        }
    }

    pub fn kh_over_ks_at(&self, i: usize) -> f64 {
        Self::axis(self.kh_over_ks, self.shape.0, i)
    }

    pub fn inv_alpha_at(&self, j: usize) -> f64 {
        Self::axis(self.inv_alpha, self.shape.1, j)
    }
}

/// Trace and determinant of the Jacobian at the equilibrium of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanCell {
    pub kh_over_ks: f64,
    pub inv_alpha: f64,
    /// False below the line K_h/K_s = 1/alpha, where no positive equilibrium exists.
    pub admissible: bool,
    pub trace: Option<f64>,
    pub det: Option<f64>,
    /// trace > 0, det > 0 and alpha K_h > K_s.
    pub oscillates: bool,
    /// Trace changes sign between this cell and an admissible neighbour.
    pub boundary: bool,
}

/// Result of a parameter scan: cells in row-major order (1/alpha outer,
/// K_h/K_s inner) and the points of the Hopf curve trace = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityMap {
    pub grid: ScanGrid,
    pub cells: Vec<ScanCell>,
    /// (K_h/K_s, 1/alpha) points with zero trace, refined to 1e-6 in 1/alpha.
    pub hopf: Vec<[f64; 2]>,
}

impl StabilityMap {
    pub fn cell(&self, i: usize, j: usize) -> &ScanCell {
        &self.cells[j * self.grid.shape.0 + i]
    }

    /// The cell nearest to a point of the plane.
    pub fn nearest(&self, kh_over_ks: f64, inv_alpha: f64) -> &ScanCell {
        let index = |range: (f64, f64), n: usize, x: f64| {
            if n == 1 {
                0
            } else {
                let k = ((x - range.0) / (range.1 - range.0) * (n - 1) as f64).round();
                k.clamp(0.0, (n - 1) as f64) as usize
            }
        };
        let i = index(self.grid.kh_over_ks, self.grid.shape.0, kh_over_ks);
        let j = index(self.grid.inv_alpha, self.grid.shape.1, inv_alpha);
        self.cell(i, j)
    }

    /// CSV with columns `kh_over_ks,inv_alpha,trace,det,oscillates`;
    /// inadmissible cells carry `nan` for trace and determinant.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> io::Result<()> {
        writeln!(out, "kh_over_ks,inv_alpha,trace,det,oscillates")?;
        let num = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), |v| format!("{v:.16e}"));
        for c in &self.cells {
            writeln!(
                out,
                "{:.16e},{:.16e},{},{},{}",
                c.kh_over_ks,
                c.inv_alpha,
                num(c.trace),
                num(c.det),
                u8::from(c.oscillates)
            )?;
        }
        Ok(())
    }
}

/// Parameters of a scan cell: K_h = (K_h/K_s) K_s and alpha = 1/(1/alpha),
/// all other groups taken from `base`.
pub fn cell_params(base: &DimlessParams, kh_over_ks: f64, inv_alpha: f64) -> DimlessParams {
    DimlessParams {
        k_h: kh_over_ks * base.k_s,
        alpha: 1.0 / inv_alpha,
        ..*base
    }
}

/// (trace, det) at the cell's equilibrium, or `None` if it is inadmissible.
pub fn trace_det(
    base: &DimlessParams,
    kh_over_ks: f64,
    inv_alpha: f64,
) -> Result<Option<(f64, f64)>, AnalysisError> {
    let dp = cell_params(base, kh_over_ks, inv_alpha);
    if !dp.admissible() {
        return Ok(None);
    }
    let fp = fixed_point(&dp)?;
    Ok(Some((fp.trace, fp.det)))
}

/// Evaluates trace and determinant on every grid cell in parallel and
/// extracts the Hopf curve.
pub fn stability_scan(
    base: &DimlessParams,
    grid: &ScanGrid,
) -> Result<StabilityMap, AnalysisError> {
    grid.validate()?;
    base.validate()?;
    let (nx, ny) = grid.shape;
    let mut cells = (0..nx * ny)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let (x, y) = (grid.kh_over_ks_at(i), grid.inv_alpha_at(j));
            let td = trace_det(base, x, y)?;
            Ok(ScanCell {
                kh_over_ks: x,
                inv_alpha: y,
                admissible: td.is_some(),
                trace: td.map(|t| t.0),
                det: td.map(|t| t.1),
                oscillates: td.is_some_and(|(t, d)| t > 0.0 && d > 0.0),
                boundary: false,
            })
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?;

    let sign_change = |a: &ScanCell, b: &ScanCell| match (a.trace, b.trace) {
        (Some(ta), Some(tb)) => (ta > 0.0) != (tb > 0.0),
        _ => false,
    };
    let flags: Vec<bool> = (0..nx * ny)
        .map(|k| {
            let (i, j) = (k % nx, k / nx);
            let c = &cells[k];
            let mut neighbours = Vec::with_capacity(4);
            if i > 0 {
                neighbours.push(k - 1);
            }
            if i + 1 < nx {
                neighbours.push(k + 1);
            }
            if j > 0 {
                neighbours.push(k - nx);
            }
            if j + 1 < ny {
                neighbours.push(k + nx);
            }
            neighbours.into_iter().any(|n| sign_change(c, &cells[n]))
        })
        .collect();
    for (c, f) in cells.iter_mut().zip(flags) {
        c.boundary = f;
    }

    let hopf = (0..nx)
        .into_par_iter()
        .map(|i| {
            let mut pts = Vec::new();
            for j in 0..ny.saturating_sub(1) {
                let (a, b) = (&cells[j * nx + i], &cells[(j + 1) * nx + i]);
                if sign_change(a, b) {
                    let y = bisect_trace(base, a.kh_over_ks, (a.inv_alpha, b.inv_alpha), 1e-6)?;
                    pts.push([a.kh_over_ks, y]);
                }
            }
            Ok(pts)
        })
        .collect::<Result<Vec<_>, AnalysisError>>()?
        .into_iter()
        .flatten()
        .collect();

    Ok(StabilityMap {
        grid: *grid,
        cells,
        hopf,
    })
}

/// Bisects the trace along 1/alpha at fixed K_h/K_s on a bracket with a sign
/// change, to an interval width of `tol`.
pub fn bisect_trace(
    base: &DimlessParams,
    kh_over_ks: f64,
    bracket: (f64, f64),
    tol: f64,
) -> Result<f64, AnalysisError> {
    let trace = |y: f64| -> Result<f64, AnalysisError> {
        trace_det(base, kh_over_ks, y)?.map(|t| t.0).ok_or_else(|| {
            AnalysisError::Precondition(format!("bracket end 1/alpha = {y} is inadmissible"))
        })
    };
    let (mut lo, mut hi) = bracket;
    let mut t_lo = trace(lo)?;
    if (t_lo > 0.0) == (trace(hi)? > 0.0) {
        return Err(AnalysisError::Precondition(format!(
            "trace has no sign change on [{lo}, {hi}]"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let t_mid = trace(mid)?;
        if (t_mid > 0.0) == (t_lo > 0.0) {
            lo = mid;
            t_lo = t_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// All zeros of the trace along 1/alpha at fixed K_h/K_s, located on an
/// `n`-point sampling of `range` and refined by bisection to `tol`.
pub fn trace_zeros_on_transect(
    base: &DimlessParams,
    kh_over_ks: f64,
    range: (f64, f64),
    n: usize,
    tol: f64,
) -> Result<Vec<f64>, AnalysisError> {
    let ys: Vec<f64> = (0..n).map(|k| ScanGrid::axis(range, n, k)).collect();
    let traces = ys
        .iter()
        .map(|&y| Ok(trace_det(base, kh_over_ks, y)?.map(|t| t.0)))
        .collect::<Result<Vec<_>, AnalysisError>>()?;
    let mut zeros = Vec::new();
    for k in 0..n.saturating_sub(1) {
        if let (Some(a), Some(b)) = (traces[k], traces[k + 1]) {
            if (a > 0.0) != (b > 0.0) {
                zeros.push(bisect_trace(base, kh_over_ks, (ys[k], ys[k + 1]), tol)?);
            }
        }
    }
    Ok(zeros)
}
