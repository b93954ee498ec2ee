//! Limit-cycle detection, period and phase-duration measurement, and the
//! closed-form timescales they are compared with.

mod compare;
mod limit_cycle;
mod return_map;
mod timescales;

pub use compare::{compare, write_compare_csv, CompareRow, COMPARE_HEADER};
pub use limit_cycle::{
    default_initial_state, find_limit_cycle, reference_cycle, segment_times, winding_number,
    CycleReport, ReferenceCycle, CONVERGENCE_TOL, EVENT_S_MAX, EVENT_S_MIN, TRANSIENT_BUDGET,
};
pub use return_map::{return_map_contraction, ReturnMapReport};
pub use timescales::{
    analytic_timescales, oscillation_condition, physical_timescales, w_func, AnalyticTimescales,
    OscillationCondition, PhysicalTimescales,
};
