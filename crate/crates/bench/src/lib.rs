//! Shared fixtures for the benchmarks in `benches/`.

use gwrboost::simulation::{generate_dataset, SimulationConfig};
use gwrboost::Dataset;

/// One replication of the default simulation on a `side × side` grid.
pub fn grid_dataset(side: usize, seed: u64) -> Dataset {
    let cfg = SimulationConfig {
        width: side,
        height: side,
        ..Default::default()
    };
    generate_dataset(&cfg, seed, 0).expect("valid simulation config").dataset
}
