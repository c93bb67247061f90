//! Local-hidden-variable feasibility by linear programming over the
//! deterministic strategies, with Farkas certificates read as Bell inequalities.

pub mod canonical;
pub mod certifier;
pub mod polytope;
pub mod simplex;
pub mod sweep;

pub use canonical::{certificate_to_inequality, relabelings, NormalizedInequality, Relabeling};
pub use certifier::{
    gauge_lp, lhv_feasible, lhv_feasible_exact, on_off_verdict, symbolic_on_off_point, Certificate, ExactVerdict,
    LhvVerdict, SolverStats, DEFAULT_TOLERANCE,
};
pub use polytope::{cells_to_cg, cg_keys, cg_to_cells, cg_vector, enumerate_strategies, CgKey, DeterministicStrategy};
pub use sweep::{
    grid_points, on_off_csv, on_off_lp_sweep, phases_only_csv, phases_only_lp_sweep, OnOffPoint, PhasesOnlyCache,
    PhasesOnlyReport,
};
