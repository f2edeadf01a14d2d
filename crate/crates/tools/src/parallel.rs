//! Rayon drivers. Both produce exactly the results of their sequential
//! counterparts in `ifm-core`.

use ifm_core::counting::{CountingRecord, ExperimentConfig, GateSimulator};
use ifm_core::optics::CircuitSpec;
use ifm_core::spectrum::{self, DispersionModel, SpectrumResult, SweepRange};
use rayon::prelude::*;

use crate::ToolResult;

/// Runs the counting shards on the rayon pool and merges them.
pub fn run_counting(config: &ExperimentConfig) -> ToolResult<CountingRecord> {
    let sim = GateSimulator::new(config)?;
    let mut rec = (0..sim.shard_count())
        .into_par_iter()
        .map(|shard| sim.simulate_shard(shard))
        .reduce(CountingRecord::default, |mut a, b| {
            a += b;
            a
        });
    rec.seed = config.rng_seed;
    Ok(rec)
}

/// Evaluates the sweep points concurrently; rows come back in wavelength order.
pub fn sweep_spectrum(
    template: &CircuitSpec,
    model: &DispersionModel,
    range: &SweepRange,
) -> ToolResult<SpectrumResult> {
    spectrum::check_template(template)?;
    let rows = (0..range.len())
        .into_par_iter()
        .map(|i| spectrum::spectrum_row(template, model, range.wavelength(i)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SpectrumResult {
        rows,
        range: *range,
        description: spectrum::describe(template),
    })
}
