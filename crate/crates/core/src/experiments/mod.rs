//! Desk-scale reproductions of the ring and sphere experiments.

pub mod audit;
pub mod datasets;
pub mod plot;
pub mod sweep;

pub use audit::{theorem_width_audit, AuditCase, AuditOptions, AuditReport};
pub use datasets::{gen_rings, gen_spheres};
pub use plot::{emit_plots, PlotKind};
pub use sweep::{separation_probability_sweep, DatasetKind, Depth, ExperimentConfig, SweepResult, SweepRow};
