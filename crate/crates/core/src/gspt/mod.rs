//! Equilibrium and stability analysis, the critical manifolds of the two
//! charts with their fold points, fold genericity checks, and measurements
//! of the fold passage.

mod fixed_point;
mod fold;
mod invariant;
mod manifolds;
mod passage;
mod scan;

pub use fixed_point::{
    central_jacobian, check_jacobian, compare_matrices, fixed_point, nullclines, Classification,
    FixedPoint, NullclineSample,
};
pub use fold::{
    verify_generic_fold, Chart, FoldClosedForms, FoldQuantities, FoldReport, CLOSED_FORM_REL_TOL,
    FD_REL_TOL, FOLD_TOL, NONZERO_TOL,
};
pub use invariant::{invariant_region_check, BoundarySegment, InvariantReport, Violation};
pub use manifolds::{Branch, Manifolds, H_A};
pub use passage::{
    default_eps_list, fit_line, fold_passage_offset, log_spaced, passage_config, PassagePoint,
    PassageReport, START_FACTOR_B, START_FRACTION_A,
};
pub use scan::{
    bisect_trace, cell_params, stability_scan, trace_det, trace_zeros_on_transect, ScanCell,
    ScanGrid, StabilityMap,
};
