//! Benchmark harness: dimension sweeps of the stochastic methods on the synthetic
//! quadratic program, subproblem timing races against ADMM, and plot-ready tables.

pub mod config;
pub mod error;
pub mod methods;
pub mod output;
pub mod plot;
pub mod race;
pub mod sweep;

pub use config::{ExperimentConfig, MethodSpec, RaceConfig, SweepConfig, UpdateRule};
pub use error::BenchError;
pub use race::{run_timing_race, Family, RaceReport};
pub use sweep::{run_dimension_sweep, SweepReport};

/// A seed for `(a, b, purpose)` drawn from the substream keyed by the base seed.
pub fn derive_seed(base: u64, a: u64, b: u64, purpose: u64) -> u64 {
    use rand::RngCore;
    disfom::sampling::Substreams::new(base).stream(a, b, purpose | 1 << 32).next_u64()
}
