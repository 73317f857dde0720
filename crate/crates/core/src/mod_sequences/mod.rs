//! Modulating sequences: the weights, the counterexamples, and the
//! summability statistics used to test them.

mod phi;
mod rigidity;
mod seq;
mod stats;

pub use phi::Phi;
pub use rigidity::{
    adversarial_slow_decay, make_rigidity_counterexample, KSequence, RigiditySchedule, RigidityScheme,
};
pub use seq::{
    make_dyadic_spike, make_exponential, make_exponential_from_unit, make_von_mangoldt, Claims, ModSeq,
    SeqSpec, VonMangoldtKind,
};
pub use stats::{fourier_bohr_estimate, stats_scan, w1_distance, wphi_supremum, SeqStats, StatsRow, W1Distance};
