//! Trajectory sampling to CSV.

use mpscmi::trajectories::sample_trajectories;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::model::Model;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRow {
    pub trajectory: usize,
    pub step: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub outcome: usize,
}

/// `trajectories` runs of `steps` measurements; trajectory `i` uses stream
/// `i` of the seed, so output does not depend on thread count.
pub fn sample_rows(
    model: &Model,
    steps: usize,
    trajectories: usize,
    seed: u64,
) -> CliResult<Vec<SampleRow>> {
    let traces = sample_trajectories(&model.kraus, steps, trajectories, seed)?;
    let mut rows = Vec::with_capacity(steps * trajectories);
    for (t, trace) in traces.iter().enumerate() {
        for (i, ev) in trace.spectra().iter().enumerate() {
            rows.push(SampleRow {
                trajectory: t,
                step: i + 1,
                lambda1: ev[0],
                lambda2: ev.get(1).copied().unwrap_or(0.0),
                outcome: trace.outcomes.symbols()[i],
            });
        }
    }
    Ok(rows)
}

pub fn sample_csv(
    model: &Model,
    steps: usize,
    trajectories: usize,
    seed: u64,
) -> CliResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in sample_rows(model, steps, trajectories, seed)? {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Write(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Write(e.to_string()))
}
