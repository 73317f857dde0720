//! Every claim as a quantified, runnable check producing a [`CheckReport`].

mod dirichlet;
mod flight;
mod primes;
mod report;
mod rigidity;
mod shift;
mod suite;

pub use dirichlet::{additive_quadruples, check_dirichlet_norm_growth, DIRICHLET_GRID, MAX_TERMS, QUAD_TOL};
pub use flight::{check_flight_modulation, check_product_split, estimate_flight_index, FlightIndex};
pub use primes::{
    check_limit_identification, check_maximal_transfer, check_polynomial_primes, check_w1_separation,
    maximal_constants, seeded_transfer_sequence, TransferSeq, CONVERGENT_SPREAD, DIVERGENT_SPREAD, GRID_TOL, LIMIT_TOL,
    NON_ROOT_LEVEL,
};
pub use report::{trend_down, CheckReport, TestSeq, Verdict};
pub use rigidity::{check_rigidity_example, MIN_TERMS, SLOW_RATIO, SWING, VISITS};
pub use shift::{
    abs_mean_bounded, check_shift_modulation, check_vanishing_products, check_spike_control, seeded_bounded_sequence,
    vanishing_catalog, BOUNDED_GROWTH, ZERO_LEVEL,
};
pub use suite::{all_pass, failing_ids, run_all, run_all_with_table, summary_table, SuiteConfig, MIN_PRIME_HORIZON};
