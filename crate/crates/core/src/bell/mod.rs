//! Dichotomic behaviors of the ring and the inequalities evaluated on them.

pub mod behavior;
pub mod correlation;
pub mod inequalities;
pub mod models;
pub mod sweep;
pub mod visibility;

pub use behavior::{
    behavior_from_network, on_off_behavior, on_off_pumps, subset_table, Behavior, BehaviorCell, BehaviorFile,
    SettingsProfile,
};
pub use correlation::{correlation_tensor, wwwzb_condition};
pub use inequalities::{
    conditional_ch_value, doubly_lifted_ch_value, genuine_tripartite_expression, genuine_tripartite_value,
    lifted_ch, lifted_ch_expression, lifted_ch_value, n_lifted_ch_expression, n_lifted_ch_value,
    symmetrized_ch_expression, symmetrized_ch_value, two_party_ch_value, BellExpression, ChProbabilities, Event,
    EventProbabilities,
};
pub use models::{leading_order_probability, EvaluatedSymbolicModel, LeadingOrderModel, SymbolicEventModel};
pub use sweep::{inequality_sweep, sweep_csv, SweepRow};
pub use visibility::{
    corrected_thresholds, exact_threshold, full_order_thresholds, visibility_thresholds, DephasedOnOff,
    VisibilityReport,
};
