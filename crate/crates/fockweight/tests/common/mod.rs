//! Shared fixtures: the bundled scenario configs are the single source of
//! truth for the example graphs and weight programs.
#![allow(dead_code)] // each test target uses a different subset

use fockweight::config::{load_scenario, ScenarioConfig};
use fockweight::fock::FockBasis;
use fockweight::graph::PathTable;
use fockweight::weight::PathWeight;
use std::path::PathBuf;
use std::sync::Arc;

pub const TWO_LOOP_GEOMETRIC: &str = "two_loop_geometric.cfg";
pub const TWO_CYCLE_ZIGZAG: &str = "two_cycle_zigzag.cfg";
pub const TWO_LOOP_REPEAT: &str = "two_loop_repeat.cfg";

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(name)
}

pub fn load(name: &str) -> ScenarioConfig {
    load_scenario(&config_path(name)).expect("bundled config loads")
}

pub fn alpha_for(cfg: &ScenarioConfig, horizon: usize) -> PathWeight {
    let table = Arc::new(PathTable::enumerate(cfg.graph.clone(), horizon));
    PathWeight::from_program(table, &cfg.weight).expect("weight evaluates on the horizon")
}

pub fn basis_for(cfg: &ScenarioConfig, horizon: usize) -> Arc<FockBasis> {
    FockBasis::new(Arc::new(PathTable::enumerate(cfg.graph.clone(), horizon)))
}

/// Unweighted program on the same graph as a config.
pub fn unweighted_alpha(cfg: &ScenarioConfig, horizon: usize) -> PathWeight {
    let table = Arc::new(PathTable::enumerate(cfg.graph.clone(), horizon));
    PathWeight::from_program(table, &fockweight::weight::WeightProgram::unweighted())
        .expect("unweighted program evaluates")
}
