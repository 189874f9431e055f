use anyhow::Result;
use gnl_core::oracle::{oracle_band, simulate_mapping_with_feedback, ResidualRange};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub num_classes: usize,
    pub e_map: f64,
    pub trials: usize,
    pub seed: u64,
    pub mc_mean: f64,
    pub mc_stderr: f64,
    pub boundary: ResidualRange,
    pub noise: ResidualRange,
    pub band: [usize; 2],
    pub policy: String,
}

pub fn oracle_report(
    num_classes: usize,
    boundary: (usize, usize),
    noise: (usize, usize),
    trials: usize,
    seed: u64,
) -> Result<OracleReport> {
    let boundary = ResidualRange::new(boundary.0, boundary.1)?;
    let noise = ResidualRange::new(noise.0, noise.1)?;
    let band = oracle_band(num_classes, boundary, noise)?;
    let sim = simulate_mapping_with_feedback(num_classes, trials, seed)?;
    Ok(OracleReport {
        num_classes,
        e_map: band.e_map,
        trials,
        seed,
        mc_mean: sim.mean,
        mc_stderr: sim.stderr,
        boundary,
        noise,
        band: [band.band.0, band.band.1],
        policy: band.policy,
    })
}
