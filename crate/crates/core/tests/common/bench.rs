//! Benchmark scenarios shared by the integration and acceptance tests.

use std::path::PathBuf;

use platoon::io::RunConfig;
use platoon::trajectory::TrajectorySet;

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

pub fn load_config(name: &str) -> RunConfig {
    RunConfig::load(&config_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// Speeds of the trajectories selected by `keep`, over `[t0, t1]`.
pub fn speeds(set: &TrajectorySet, t0: f64, t1: f64, keep: impl Fn(&str) -> bool) -> Vec<f64> {
    set.trajectories
        .iter()
        .filter(|tr| keep(&tr.id))
        .flat_map(|tr| tr.samples.iter())
        .filter(|s| s.t >= t0 && s.t <= t1)
        .map(|s| s.v)
        .collect()
}

/// Open-road follower number (`vehNN` counts from the leader, 1-based).
pub fn follower_number(id: &str) -> Option<usize> {
    id.strip_prefix("veh")?.parse().ok()
}
