//! Raw path dumps for inspection.

use std::io::{self, Write};

use vsv_core::PathSimulator;

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

/// Writes `path,asset,k,t,noise,volatility,log_price` for paths `0..count`
/// with full float precision.
pub fn dump_paths<W: Write>(config: &ExperimentConfig, count: usize, sink: W) -> Result<(), HarnessError> {
    config.validate()?;
    let sim = PathSimulator::new(config.model()?, config.run.steps, config.backend())?;
    let bundles = sim.bundles(config.run.seed, 0..count)?;
    write_rows(&sim, &bundles, sink).map_err(|source| HarnessError::Io { path: "<paths>".into(), source })
}

fn write_rows<W: Write>(sim: &PathSimulator, bundles: &[vsv_core::PathBundle], sink: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(sink);
    w.write_record(["path", "asset", "k", "t", "noise", "volatility", "log_price"])?;
    for b in bundles {
        for a in 0..b.volatility.len() {
            for k in 0..=sim.grid().steps() {
                w.write_record([
                    b.index.to_string(),
                    a.to_string(),
                    k.to_string(),
                    sim.grid().node(k).to_string(),
                    b.noise[a][k].to_string(),
                    b.volatility[a][k].to_string(),
                    b.log_price[a][k].to_string(),
                ])?;
            }
        }
    }
    w.flush()
}
