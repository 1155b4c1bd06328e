//! Multi-threaded Monte-Carlo on top of the single-threaded core.

use anyhow::{bail, Result};
use ir_ntc_core::simulator::{run_range, SimConfig, SimResult, SimTally};
use rayon::prelude::*;

/// Trials per work item. Chunk boundaries are fixed, and tallies are merged
/// in chunk order, so results do not depend on the thread count.
pub const CHUNK: u64 = 256;

/// Parallel equivalent of `simulator::run`.
pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    cfg.validate()?;
    let chunks: Vec<u64> = (0..cfg.trials.div_ceil(CHUNK)).collect();
    let tallies = chunks
        .par_iter()
        .map(|&c| run_range(cfg, c * CHUNK..((c + 1) * CHUNK).min(cfg.trials)))
        .collect::<Result<Vec<SimTally>, _>>()?;
    let mut total = SimTally::default();
    for t in &tallies {
        total.merge(t);
    }
    if total.completed == 0 {
        bail!("every trial aborted after {} rounds", cfg.max_rounds);
    }
    Ok(total.finish(&cfg.schedule))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ir_ntc_core::rcsp::IncrementSchedule;
    use ir_ntc_core::simulator::{run, SimDecoder};
    use ir_ntc_core::ChannelSpec;

    #[test]
    fn matches_serial_run_exactly() {
        let cfg = SimConfig {
            channel: ChannelSpec::awgn_db(2.0).unwrap(),
            decoder: SimDecoder::IdealBd,
            schedule: IncrementSchedule::new(16, vec![19, 4, 4, 4, 8]).unwrap(),
            trials: 1000,
            seed: 5,
            interleaver_seed: 0,
            max_rounds: 100,
        };
        let serial = run(&cfg).unwrap();
        let par = simulate(&cfg).unwrap();
        assert_eq!(serial.tally.completed, par.tally.completed);
        assert_eq!(serial.tally.channel_uses, par.tally.channel_uses);
        assert_eq!(serial.tally.failures, par.tally.failures);
        assert_eq!(serial.ell, par.ell);
    }
}
