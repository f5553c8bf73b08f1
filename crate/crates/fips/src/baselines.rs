//! Scalar-budget baseline schedulers.
//!
//! These schedulers treat the 5G link's random delay as a single fixed
//! number — its median or its maximum — and then run the slot-per-frame
//! pipeline as if the network were fully deterministic. They exist to
//! demonstrate *why* that assumption breaks: the emitted configuration
//! passes its own feasibility check under the assumed scalar delays, but
//! once real (random) delays are drawn in simulation, frames miss or
//! overshoot their gate windows, queue behind each other, and contaminate
//! other streams' windows. Policing is disabled (late frames are queued,
//! not dropped), so a single late frame can push an entire queue into
//! subsequent cycles.
//!
//! The actual scalar machinery lives in [`crate::pdb::scalar_delay`]
//! (histogram reduction) and in the shared admission pipeline under
//! [`ScheduleMode::Med`] / [`ScheduleMode::Max`]; this module is the
//! baseline-facing entry point.

use crate::model::{NetworkGraph, Stream};
use crate::scheduler::{schedule, ScheduleMode, ScheduleOutcome};
use crate::Result;

/// Which scalar statistic replaces the 5G delay distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarMode {
    /// Assume every radio transfer takes exactly the median delay.
    Med,
    /// Assume every radio transfer takes exactly the maximum delay.
    Max,
}

impl ScalarMode {
    /// The equivalent shared-pipeline mode.
    pub fn schedule_mode(self) -> ScheduleMode {
        match self {
            ScalarMode::Med => ScheduleMode::Med,
            ScalarMode::Max => ScheduleMode::Max,
        }
    }
}

/// Schedules `streams` under a scalar 5G delay assumption.
///
/// Equivalent to [`schedule`] with the corresponding mode: every wireless
/// delay budget degenerates to the single point chosen by `mode`, batches
/// are capped at one frame, and the emitted configuration has arrival
/// policing disabled.
pub fn schedule_scalar(
    network: &NetworkGraph,
    streams: &[Stream],
    mode: ScalarMode,
) -> Result<ScheduleOutcome> {
    schedule(network, streams, mode.schedule_mode())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testnet::{chain_net, ms, ns, path, stream};

    /// On a wired-only network the scalar substitution is vacuous: both
    /// baselines must produce exactly the slot-per-frame configuration,
    /// except for the mode tag and the disabled policing.
    #[test]
    fn wired_only_baselines_match_slot_per_frame_scheduling() {
        let net = chain_net(1_000_000_000);
        let route = path(&net, &["t", "sw", "l"]);
        let streams = vec![
            stream("a", route.clone(), ms(1), ns(0), (1, 2), ms(1), ms(1)),
            stream("b", route, ms(2), ns(50_000), (9, 10), ms(2), ms(2)),
        ];
        let sti = schedule(&net, &streams, ScheduleMode::Sti).unwrap();
        for mode in [ScalarMode::Med, ScalarMode::Max] {
            let scalar = schedule_scalar(&net, &streams, mode).unwrap();
            assert_eq!(scalar.accepted, sti.accepted);
            assert_eq!(scalar.config.mode, mode.schedule_mode());
            assert!(!scalar.config.psfp_enabled);
            assert_eq!(scalar.config.gcl, sti.config.gcl);
            // Same gate windows and same per-hop schedule times.
            for (ix, cfg) in &scalar.config.streams {
                let sti_cfg = &sti.config.streams[ix];
                for (f, g) in cfg.frames.iter().zip(&sti_cfg.frames) {
                    for (h, k) in f.hops.iter().zip(&g.hops) {
                        assert_eq!(h.smin, k.smin);
                        assert_eq!(h.window, k.window);
                    }
                }
            }
        }
    }

    /// The two baselines assume different radio delays, so on a bridged
    /// network their translator-side schedules differ by the gap between
    /// the median and the maximum of the measured delay distribution.
    #[test]
    fn scalar_modes_differ_by_the_assumed_radio_delay() {
        use crate::pdb::{scalar_delay, ScalarStat};
        use crate::testnet::bridged_net;

        let net = bridged_net();
        let hist = net
            .histograms()
            .values()
            .next()
            .expect("bridged net has a radio link");
        let med = scalar_delay(hist, ScalarStat::Median);
        let max = scalar_delay(hist, ScalarStat::Maximum);
        assert!(med < max);

        let streams = vec![stream(
            "radio",
            path(&net, &["ds", "nw", "b1", "l1"]),
            ms(20),
            ns(0),
            (1, 2),
            ms(20),
            ms(20),
        )];
        let m = schedule_scalar(&net, &streams, ScalarMode::Med).unwrap();
        let x = schedule_scalar(&net, &streams, ScalarMode::Max).unwrap();
        assert_eq!(m.accepted, vec![0]);
        assert_eq!(x.accepted, vec![0]);
        // The hop after the radio link opens its gate exactly the assumed
        // scalar delay after the radio hop's schedule time.
        let hop = |o: &ScheduleOutcome, k: usize| o.config.streams[&0].frames[0].hops[k].clone();
        assert_eq!(hop(&m, 1).smin - hop(&m, 0).smin, med);
        assert_eq!(hop(&x, 1).smin - hop(&x, 0).smin, max);
    }
}
