//! Streaming Cesàro, modulated and prime-indexed averages of operator orbits,
//! their predicted limits, and convergence classification.

mod convergence;
mod engine;
mod gap;
mod predict;
mod scheme;

pub use convergence::{detect_convergence, ConvergenceParams, ConvergenceReport, ConvergenceStatus};
pub use engine::{engine_new, Checkpoint, EngineState, Trace, MAX_ORBIT_APPLIES};
pub use gap::{
    run_three_averages, three_average_gap, three_average_gap_from, GapRow, ThreeAverageGap, ThreeAverages,
    CERT_SLACK,
};
pub use predict::{limit_coefficient, predict_for, predict_limit, ROOT_ORDER_BOUND, ROOT_TOL};
pub use scheme::{AverageScheme, SchemeSpec};
