//! QoS accounting over simulated executions.
//!
//! Delivery is judged against the stream's latency bound: a frame counts
//! as delivered only if it reaches the listener within `latency_bound`
//! of its release. Frames that arrive later count as `late`; frames that
//! never arrive are attributed to the drop cause recorded in the trace.
//! Latency extrema cover *all* listener arrivals (so a late spike is
//! visible), while observed jitter is the arrival spread among delivered
//! frames only.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::time::TimeNs;

/// Per-stream delivery statistics.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamQos {
    /// Frame instances released over the simulated horizon.
    pub released: u64,
    /// Arrived at the listener within the stream's latency bound.
    pub delivered: u64,
    /// Arrived at the listener, but beyond the latency bound.
    pub late: u64,
    /// Discarded mid-hop.
    pub dropped_transit: u64,
    /// Discarded by an arrival filter at a translator or bridge.
    pub dropped_psfp: u64,
    /// Never transmitted (dropped upstream or no gate window fits).
    pub dropped_never_sent: u64,
    /// Smallest release-to-listener latency over all arrivals.
    pub latency_min: Option<TimeNs>,
    /// Largest release-to-listener latency over all arrivals.
    pub latency_max: Option<TimeNs>,
    /// Latency extrema over delivered frames only; their spread is the
    /// observed jitter.
    pub delivered_latency_min: Option<TimeNs>,
    pub delivered_latency_max: Option<TimeNs>,
}

impl StreamQos {
    pub fn record_release(&mut self) {
        self.released += 1;
    }

    pub fn record_arrival(&mut self, latency: TimeNs, within_bound: bool) {
        min_opt(&mut self.latency_min, latency);
        max_opt(&mut self.latency_max, latency);
        if within_bound {
            self.delivered += 1;
            min_opt(&mut self.delivered_latency_min, latency);
            max_opt(&mut self.delivered_latency_max, latency);
        } else {
            self.late += 1;
        }
    }

    pub fn record_drop(&mut self, cause: super::trace::DropCause) {
        use super::trace::DropCause::*;
        match cause {
            Transit => self.dropped_transit += 1,
            Psfp { .. } => self.dropped_psfp += 1,
            NeverSent => self.dropped_never_sent += 1,
        }
    }

    pub fn dropped(&self) -> u64 {
        self.dropped_transit + self.dropped_psfp + self.dropped_never_sent
    }

    /// Fraction of released frames delivered within the latency bound.
    pub fn delivered_fraction(&self) -> f64 {
        if self.released == 0 {
            return 1.0;
        }
        self.delivered as f64 / self.released as f64
    }

    /// Arrival spread among delivered frames; `None` until two are
    /// comparable (zero for a single delivery).
    pub fn jitter(&self) -> Option<TimeNs> {
        match (self.delivered_latency_min, self.delivered_latency_max) {
            (Some(lo), Some(hi)) => Some(hi - lo),
            _ => None,
        }
    }

    /// Every released frame is accounted for exactly once.
    pub fn is_conserved(&self) -> bool {
        self.released == self.delivered + self.late + self.dropped()
    }

    pub fn merge(&mut self, other: &StreamQos) {
        self.released += other.released;
        self.delivered += other.delivered;
        self.late += other.late;
        self.dropped_transit += other.dropped_transit;
        self.dropped_psfp += other.dropped_psfp;
        self.dropped_never_sent += other.dropped_never_sent;
        merge_min(&mut self.latency_min, other.latency_min);
        merge_max(&mut self.latency_max, other.latency_max);
        merge_min(&mut self.delivered_latency_min, other.delivered_latency_min);
        merge_max(&mut self.delivered_latency_max, other.delivered_latency_max);
    }
}

/// Aggregated outcome of one or more simulation runs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QosReport {
    /// Total hypercycles simulated across the merged runs.
    pub hypercycles: u64,
    /// Seeds of the merged runs, sorted and deduplicated.
    pub seeds: Vec<u64>,
    /// Statistics per configured stream index.
    pub streams: BTreeMap<usize, StreamQos>,
}

impl QosReport {
    pub fn new(hypercycles: u64, seed: u64) -> QosReport {
        QosReport {
            hypercycles,
            seeds: vec![seed],
            streams: BTreeMap::new(),
        }
    }

    pub fn stream(&self, index: usize) -> Option<&StreamQos> {
        self.streams.get(&index)
    }

    /// Folds `other` into `self`. Merging is associative and commutative,
    /// so replicated runs can be combined in any grouping.
    pub fn merge(mut self, other: &QosReport) -> QosReport {
        self.hypercycles += other.hypercycles;
        for s in &other.seeds {
            if let Err(pos) = self.seeds.binary_search(s) {
                self.seeds.insert(pos, *s);
            }
        }
        for (index, qos) in &other.streams {
            self.streams.entry(*index).or_default().merge(qos);
        }
        self
    }

    pub fn is_conserved(&self) -> bool {
        self.streams.values().all(StreamQos::is_conserved)
    }
}

fn min_opt(slot: &mut Option<TimeNs>, v: TimeNs) {
    *slot = Some(slot.map_or(v, |cur| cur.min(v)));
}

fn max_opt(slot: &mut Option<TimeNs>, v: TimeNs) {
    *slot = Some(slot.map_or(v, |cur| cur.max(v)));
}

fn merge_min(slot: &mut Option<TimeNs>, other: Option<TimeNs>) {
    if let Some(v) = other {
        min_opt(slot, v);
    }
}

fn merge_max(slot: &mut Option<TimeNs>, other: Option<TimeNs>) {
    if let Some(v) = other {
        max_opt(slot, v);
    }
}
