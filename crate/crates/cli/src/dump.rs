use num_complex::Complex64;
use pdc_core::network::build_ring_network;
use pdc_core::symbolic::evolve_network_symbolic;

use crate::config::RunConfig;
use crate::output::{json, Sink};
use crate::CliError;

pub fn run(config: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    // The symbolic state does not depend on the numeric coupling.
    let network = build_ring_network(config.parties, Complex64::new(0.1, 0.0))?;
    let state = evolve_network_symbolic(&network, &config.pumps, config.order)?;
    sink.primary("state.json", &(json(&state.dump())? + "\n"))?;
    sink.note(&format!("{} occupations at order {}", state.len(), config.order));
    Ok(())
}
