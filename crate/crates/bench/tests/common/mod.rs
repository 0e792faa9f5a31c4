#![allow(dead_code)]

use disfom::sampling::{EstimatorConfig, SpiderConfig};
use disfom_bench::{ExperimentConfig, MethodSpec, RaceConfig, SweepConfig, UpdateRule};

pub const MB: EstimatorConfig = EstimatorConfig::Minibatch { m: 20 };
pub const VR: EstimatorConfig = EstimatorConfig::Spider(SpiderConfig { q0: 3, m1: 30, m: 5 });

pub fn method(name: &str, update: UpdateRule, estimator: EstimatorConfig) -> MethodSpec {
    MethodSpec { name: name.into(), iterations: 7, update, estimator }
}

/// All six update/estimator pairings with short schedules.
pub fn small_methods() -> Vec<MethodSpec> {
    vec![
        method("DISFOM_minibatch", UpdateRule::L1Squared { rho_hat: 2.0, eta_scale: 1.0 }, MB),
        method("DISFOM_vr", UpdateRule::L1Squared { rho_hat: 128.0, eta_scale: 1.0 }, VR),
        method("SGD", UpdateRule::Euclidean { eta_scale: 1.0 }, MB),
        method("SPIDER", UpdateRule::Euclidean { eta_scale: 0.1 }, VR),
        method("SMD_minibatch", UpdateRule::Mirror { c: None }, MB),
        method("SMD_vr", UpdateRule::Mirror { c: None }, VR),
    ]
}

pub fn small_config(dims: Vec<usize>, replications: usize) -> ExperimentConfig {
    ExperimentConfig {
        seed: 11,
        sweep: SweepConfig { dims, replications, methods: small_methods(), ..SweepConfig::default() },
        race: RaceConfig { dims: vec![8, 32], trials: 2, min_timing_secs: 0.0, ..RaceConfig::default() },
    }
}

pub fn read(path: &std::path::Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// Rows of a CSV file as header-keyed maps.
pub fn csv_rows(path: &std::path::Path) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| headers.iter().zip(rec.unwrap().iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect())
        .collect()
}
