//! Batched 802.1Qbv schedule synthesis.
//!
//! The scheduler admits streams one at a time. For each stream it inserts
//! the stream's frames into the per-port transmission orderings (an
//! earliest-transmission lower bound plus a FIFO-consistency override),
//! optionally merges them into a neighboring batch at the translator hop
//! that follows the 5G link, derives the resulting gate-control schedule
//! as the least fixed point of three lower-bound constraint families,
//! audits that the windows stay mutually isolated once the gate lists
//! repeat modulo the hypercycle (robust modes only), and accepts the
//! stream only if every quality-of-service contract — its own and those
//! of all previously accepted streams — still holds.
//!
//! Batching is the core idea: frames whose worst-case 5G arrival windows
//! overlap share one gate window sized for the whole batch and interleave
//! freely inside it, instead of each reserving a worst-case slot. The
//! price is bounded, explicit jitter (the window width); the reward is
//! that a slow radio link no longer serializes the schedule.

mod derive;
mod insert;

use std::collections::BTreeMap;

use crate::model::{
    expand_frames, hypercycle, validate_streams, FrameInstance, LinkKind, NetworkGraph, PortId,
    Stream,
};
use crate::pdb::{pdb_for_link, scalar_delay, Pdb, ScalarStat};
use crate::time::{Interval, TimeNs};
use crate::{Error, Result};

pub(crate) use derive::derive_schedule;
pub(crate) use insert::{insert_frames, merge_candidates, MergeKind};

/// Scheduling algorithm variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ScheduleMode {
    /// Full interleaving packet scheduling: probabilistic delay budgets
    /// and frame batching with per-stream merge candidates.
    Fips,
    /// Slot-per-frame mode: probabilistic delay budgets but batches capped
    /// at one frame (no merging).
    Sti,
    /// Non-robust baseline: the 5G delay is assumed to equal the
    /// histogram's median; no batching, no policing.
    Med,
    /// Non-robust baseline: the 5G delay is assumed to equal the
    /// histogram's maximum; no batching, no policing.
    Max,
}

impl ScheduleMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScheduleMode::Fips => "fips",
            ScheduleMode::Sti => "sti",
            ScheduleMode::Med => "med",
            ScheduleMode::Max => "max",
        }
    }

    pub fn parse(s: &str) -> Option<ScheduleMode> {
        match s {
            "fips" => Some(ScheduleMode::Fips),
            "sti" => Some(ScheduleMode::Sti),
            "med" => Some(ScheduleMode::Med),
            "max" => Some(ScheduleMode::Max),
            _ => None,
        }
    }

    pub(crate) fn policy(self) -> Policy {
        match self {
            ScheduleMode::Fips => Policy {
                wireless_budget: WirelessBudget::Probabilistic,
                merging: true,
                clearance_on_wireless: true,
                psfp_enabled: true,
                cyclic_isolation: true,
            },
            ScheduleMode::Sti => Policy {
                wireless_budget: WirelessBudget::Probabilistic,
                merging: false,
                clearance_on_wireless: true,
                psfp_enabled: true,
                cyclic_isolation: true,
            },
            ScheduleMode::Med => Policy {
                wireless_budget: WirelessBudget::Scalar(ScalarStat::Median),
                merging: false,
                clearance_on_wireless: false,
                psfp_enabled: false,
                cyclic_isolation: false,
            },
            ScheduleMode::Max => Policy {
                wireless_budget: WirelessBudget::Scalar(ScalarStat::Maximum),
                merging: false,
                clearance_on_wireless: false,
                psfp_enabled: false,
                cyclic_isolation: false,
            },
        }
    }
}

/// How the 5G link's delay uncertainty enters the schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum WirelessBudget {
    /// Reliability-dependent delay intervals from the histogram.
    Probabilistic,
    /// A single scalar per link; the schedule pretends the delay is exact.
    Scalar(ScalarStat),
}

/// Mode-derived knobs threaded through insertion and derivation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Policy {
    pub wireless_budget: WirelessBudget,
    /// Whether merge candidates beyond "no merge" are generated.
    pub merging: bool,
    /// Whether a batch on a wireless port occupies the link until its
    /// budget elapses. The scalar baselines treat the radio as
    /// contention-free and let windows overlap.
    pub clearance_on_wireless: bool,
    /// Whether the exported configuration arms per-stream filtering.
    pub psfp_enabled: bool,
    /// Whether derived schedules must pass the cyclic isolation audit
    /// (windows repeated modulo the hypercycle may neither overlap nor
    /// open while another batch's frames wait). The robust modes require
    /// it; the scalar baselines knowingly ship interfering windows.
    pub cyclic_isolation: bool,
}

/// Identifies one frame instance: `(stream index, instance index)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FrameRef {
    pub stream: usize,
    pub index: usize,
}

/// A non-empty group of frames that shares one gate window on one port.
/// The frame order within a batch is the serialization order on Ethernet
/// ports (immaterial on the contention-free wireless port).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    /// Stable identity across ordering edits within one scheduling run.
    pub id: u64,
    pub frames: Vec<FrameRef>,
}

/// Per-port sequences of batches: who transmits, where, in which order.
/// The admission loop edits this structure; schedule times are derived
/// from it, never stored in it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Ordering {
    ports: BTreeMap<PortId, Vec<Batch>>,
    next_id: u64,
}

impl Ordering {
    pub fn new() -> Ordering {
        Ordering::default()
    }

    /// Test/bench constructor from explicit per-port batch contents.
    /// Batch ids are assigned in iteration order.
    pub fn from_batches(ports: Vec<(PortId, Vec<Vec<FrameRef>>)>) -> Ordering {
        let mut o = Ordering::new();
        for (port, batches) in ports {
            let list = o.ports.entry(port).or_default();
            for frames in batches {
                assert!(!frames.is_empty(), "batches must be non-empty");
                let id = o.next_id;
                o.next_id += 1;
                list.push(Batch { id, frames });
            }
        }
        o
    }

    /// Batches on one port, in transmission order.
    pub fn batches_on(&self, port: PortId) -> &[Batch] {
        self.ports.get(&port).map(Vec::as_slice).unwrap_or(&[])
    }

    /// All ports that carry at least one batch.
    pub fn ports(&self) -> impl Iterator<Item = (PortId, &[Batch])> {
        self.ports.iter().map(|(p, b)| (*p, b.as_slice()))
    }

    pub(crate) fn fresh_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    pub(crate) fn port_mut(&mut self, port: PortId) -> &mut Vec<Batch> {
        self.ports.entry(port).or_default()
    }
}

/// Everything derived once per scheduling run: expanded frames, per-hop
/// ports, per-hop delay budgets, serialization times.
pub(crate) struct Problem<'a> {
    pub network: &'a NetworkGraph,
    pub streams: &'a [Stream],
    pub hypercycle: TimeNs,
    pub mode: ScheduleMode,
    pub policy: Policy,
    /// `frames[s][i]` is instance `i` of stream `s`.
    pub frames: Vec<Vec<FrameInstance>>,
    /// `hops[s][k]` is the egress port of stream `s` at hop `k`.
    pub hops: Vec<Vec<PortId>>,
    /// Reverse map: for stream `s`, which hop index uses a port.
    pub hop_of: Vec<BTreeMap<PortId, usize>>,
    /// `pdbs[s][k]` is the delay budget of stream `s` on hop `k`.
    pub pdbs: Vec<Vec<Pdb>>,
    /// `ser[s][k]` is the serialization time (zero on the wireless hop).
    pub ser: Vec<Vec<TimeNs>>,
    /// Prefix sums of worst-case budgets: `phi_off[s][k]` = sum of
    /// `pdbs[s][i].d_max()` for `i < k`.
    pub phi_off: Vec<Vec<TimeNs>>,
    /// Index of the wireless hop on each stream's path, if any.
    pub wireless_hop: Vec<Option<usize>>,
}

impl<'a> Problem<'a> {
    pub fn new(
        network: &'a NetworkGraph,
        streams: &'a [Stream],
        mode: ScheduleMode,
    ) -> Result<Problem<'a>> {
        validate_streams(network, streams)?;
        let policy = mode.policy();
        let hyper = match hypercycle(streams) {
            Ok(h) => h,
            // An empty stream set has an empty schedule; 1 ns is the
            // neutral hypercycle (every period divides it zero times).
            Err(Error::EmptyStreamSet) => TimeNs::from_ns(1),
            Err(e) => return Err(e),
        };
        let mut frames = Vec::with_capacity(streams.len());
        let mut hops = Vec::with_capacity(streams.len());
        let mut hop_of = Vec::with_capacity(streams.len());
        let mut pdbs = Vec::with_capacity(streams.len());
        let mut ser = Vec::with_capacity(streams.len());
        let mut phi_off = Vec::with_capacity(streams.len());
        let mut wireless_hop = Vec::with_capacity(streams.len());
        for (s, stream) in streams.iter().enumerate() {
            frames.push(expand_frames(s, stream, hyper));
            let mut ports = Vec::with_capacity(stream.hop_count());
            let mut rev = BTreeMap::new();
            let mut budgets = Vec::with_capacity(stream.hop_count());
            let mut sers = Vec::with_capacity(stream.hop_count());
            let mut offs = Vec::with_capacity(stream.hop_count());
            let mut wl = None;
            let mut acc = TimeNs::ZERO;
            for (k, w) in stream.path.windows(2).enumerate() {
                let port = network
                    .port_between(w[0], w[1])
                    .expect("validated path links exist");
                ports.push(port);
                rev.insert(port, k);
                let link = network.link(port);
                let (budget, s_time) = match &link.kind {
                    LinkKind::Ethernet { rate_bits_per_s, .. } => (
                        pdb_for_link(network, port, stream.size_bytes, stream.reliability)?,
                        crate::model::serialization_ns(*rate_bits_per_s, stream.size_bytes),
                    ),
                    LinkKind::Wireless { .. } => {
                        wl = Some(k);
                        let hist = network
                            .histogram_for(port)
                            .expect("validated wireless links resolve");
                        let budget = match policy.wireless_budget {
                            WirelessBudget::Probabilistic => {
                                pdb_for_link(network, port, stream.size_bytes, stream.reliability)?
                            }
                            WirelessBudget::Scalar(stat) => {
                                let d = scalar_delay(hist, stat);
                                // Record the mass the scalar actually
                                // covers; the baseline still *schedules*
                                // as if the delay were exact.
                                let mass = hist.cumulative_mass(
                                    hist.bins()
                                        .iter()
                                        .position(|b| b.up >= d)
                                        .unwrap_or(hist.bins().len() - 1),
                                );
                                Pdb {
                                    interval: Interval::degenerate(d),
                                    achieved_mass: mass,
                                }
                            }
                        };
                        (budget, TimeNs::ZERO)
                    }
                };
                offs.push(acc);
                acc += budget.d_max();
                budgets.push(budget);
                sers.push(s_time);
            }
            hops.push(ports);
            hop_of.push(rev);
            pdbs.push(budgets);
            ser.push(sers);
            phi_off.push(offs);
            wireless_hop.push(wl);
        }
        Ok(Problem {
            network,
            streams,
            hypercycle: hyper,
            mode,
            policy,
            frames,
            hops,
            hop_of,
            pdbs,
            ser,
            phi_off,
            wireless_hop,
        })
    }

    /// Earliest possible transmission of `frame` at hop `k`: its release
    /// plus the worst-case budgets of all earlier hops.
    pub fn phi(&self, f: FrameRef, k: usize) -> TimeNs {
        self.frames[f.stream][f.index].release + self.phi_off[f.stream][k]
    }

    pub fn release(&self, f: FrameRef) -> TimeNs {
        self.frames[f.stream][f.index].release
    }
}

/// One gate window, tagged with the batch that owns it. Windows on a port
/// are kept per batch in the in-memory model and merged only on export.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GclWindow {
    pub batch: u64,
    pub window: Interval,
}

/// Per-hop schedule entry of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HopConfig {
    pub port: PortId,
    /// Id of the batch the frame belongs to on this port.
    pub batch: u64,
    /// Earliest transmission start (the batch window's open time).
    pub smin: TimeNs,
    /// Latest transmission start: `smin` plus the serialization of every
    /// other batch member.
    pub smax: TimeNs,
    /// The frame's own delay budget on this hop.
    pub pdb: Pdb,
    /// The batch gate window on this hop.
    pub window: Interval,
    /// Arrival window policed at the receiving node:
    /// `[smin + own d_min, window close]`.
    pub psfp: Interval,
}

/// Schedule of one frame instance across its path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameConfig {
    pub release: TimeNs,
    pub hops: Vec<HopConfig>,
}

/// Schedule of all instances of one stream.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StreamConfig {
    pub frames: Vec<FrameConfig>,
}

/// A complete synthesized TSN configuration: gate control lists plus
/// per-stream schedule and policing windows, cyclic modulo the
/// hypercycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TsnConfiguration {
    pub mode: ScheduleMode,
    pub hypercycle: TimeNs,
    /// Whether receiving nodes police arrival windows at runtime.
    pub psfp_enabled: bool,
    /// Per-batch gate windows per port, in transmission order.
    pub gcl: BTreeMap<PortId, Vec<GclWindow>>,
    /// Per-stream frame schedules, keyed by stream index.
    pub streams: BTreeMap<usize, StreamConfig>,
}

impl TsnConfiguration {
    pub fn empty(mode: ScheduleMode, hypercycle: TimeNs) -> TsnConfiguration {
        TsnConfiguration {
            mode,
            hypercycle,
            psfp_enabled: mode.policy().psfp_enabled,
            gcl: BTreeMap::new(),
            streams: BTreeMap::new(),
        }
    }

    /// The frame's arrival window at the listener, i.e. the last hop's
    /// policing window.
    pub fn listener_window(&self, stream: usize, frame: usize) -> Option<Interval> {
        let cfg = self.streams.get(&stream)?;
        let f = cfg.frames.get(frame)?;
        Some(f.hops.last()?.psfp)
    }
}

/// Outcome of a per-stream QoS check against a configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    ViolatesLatency,
    ViolatesJitter,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Verdict::Accepted => "accepted",
            Verdict::ViolatesLatency => "violates latency bound",
            Verdict::ViolatesJitter => "violates jitter bound",
        };
        write!(f, "{s}")
    }
}

/// Why a stream was not admitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RejectReason {
    /// The stream's own worst-case latency exceeds its bound.
    ViolatesLatency,
    /// The stream's own worst-case jitter exceeds its bound.
    ViolatesJitter,
    /// Admitting the stream would break a previously accepted stream.
    DisruptsAccepted { stream: String, verdict: Verdict },
    /// The transmission ordering admits no schedule (circular waits).
    CyclicDependency,
    /// The derived schedule drifts beyond two hypercycles after release.
    HorizonExceeded,
    /// The derived windows interfere once the gate lists repeat modulo
    /// the hypercycle: an image of one window would admit another batch's
    /// waiting frames early.
    WindowIntrusion,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::ViolatesLatency => write!(f, "violates latency bound"),
            RejectReason::ViolatesJitter => write!(f, "violates jitter bound"),
            RejectReason::DisruptsAccepted { stream, verdict } => {
                write!(f, "would disrupt accepted stream {stream:?} ({verdict})")
            }
            RejectReason::CyclicDependency => write!(f, "cyclic scheduling dependency"),
            RejectReason::HorizonExceeded => write!(f, "schedule exceeds planning horizon"),
            RejectReason::WindowIntrusion => {
                write!(f, "gate windows interfere across the hypercycle wrap")
            }
        }
    }
}

/// Result of a scheduling run.
#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub config: TsnConfiguration,
    /// Accepted stream indices, in admission order.
    pub accepted: Vec<usize>,
    /// Rejected stream indices with the reason from the unmerged
    /// candidate, in admission order.
    pub rejected: Vec<(usize, RejectReason)>,
}

/// Checks one stream's QoS contract against a configuration: for every
/// frame instance, the listener arrival window must close within the
/// latency bound after release (checked first) and be no wider than the
/// jitter bound.
pub fn check_feasibility(
    config: &TsnConfiguration,
    stream_index: usize,
    stream: &Stream,
) -> Verdict {
    let Some(cfg) = config.streams.get(&stream_index) else {
        // A stream with no schedule cannot violate anything; callers
        // treat "unscheduled" separately.
        return Verdict::Accepted;
    };
    // Earliest and latest possible delivery instants, each taken relative to
    // the owning frame's release. Their gap bounds the delivery-time spread a
    // listener can observe across the whole stream, not just within a single
    // frame: a merged batch can hand two frames the same listener window even
    // though their releases differ by most of a period, and that difference
    // is jitter just as much as in-window slack is.
    let mut spread: Option<(TimeNs, TimeNs)> = None;
    for frame in &cfg.frames {
        let Some(last) = frame.hops.last() else {
            continue;
        };
        let w = last.psfp;
        if w.hi - frame.release > stream.latency_bound {
            return Verdict::ViolatesLatency;
        }
        let (lo, hi) = (w.lo - frame.release, w.hi - frame.release);
        spread = Some(match spread {
            None => (lo, hi),
            Some((e, l)) => (e.min(lo), l.max(hi)),
        });
    }
    if let Some((earliest, latest)) = spread {
        if latest - earliest > stream.jitter_bound {
            return Verdict::ViolatesJitter;
        }
    }
    Verdict::Accepted
}

/// Admission metric: the stream's worst listener-window close relative to
/// release, i.e. its guaranteed worst-case end-to-end latency.
fn candidate_metric(config: &TsnConfiguration, stream_index: usize) -> TimeNs {
    let Some(cfg) = config.streams.get(&stream_index) else {
        return TimeNs::ZERO;
    };
    let mut worst = TimeNs::ZERO;
    for frame in &cfg.frames {
        if let Some(last) = frame.hops.last() {
            worst = worst.max(last.psfp.hi - frame.release);
        }
    }
    worst
}

/// Admission order: strictest reliability first, then tightest latency
/// bound, then stable by id. Deterministic for reproducible schedules.
pub(crate) fn admission_order(streams: &[Stream]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..streams.len()).collect();
    idx.sort_by(|&a, &b| {
        let sa = &streams[a];
        let sb = &streams[b];
        sb.reliability
            .cmp(&sa.reliability)
            .then(sa.latency_bound.cmp(&sb.latency_bound))
            .then(sa.id.cmp(&sb.id))
    });
    idx
}

/// Synthesizes a configuration for a stream set in the given mode.
///
/// Streams are admitted incrementally in a deterministic order; each is
/// either accepted (its frames become part of the configuration and stay
/// there — later admissions never evict) or rejected with a reason. All
/// four modes share this loop; they differ in delay budgets, merge
/// candidates, and wireless clearance (see [`ScheduleMode`]).
pub fn schedule(
    network: &NetworkGraph,
    streams: &[Stream],
    mode: ScheduleMode,
) -> Result<ScheduleOutcome> {
    let problem = Problem::new(network, streams, mode)?;
    let mut ordering = Ordering::new();
    // Schedule times of every batch from the last accepted derivation,
    // used to position new frames relative to the existing timetable.
    let mut s_prev: BTreeMap<(PortId, u64), TimeNs> = BTreeMap::new();
    let mut config = TsnConfiguration::empty(mode, problem.hypercycle);
    let mut accepted: Vec<usize> = Vec::new();
    let mut rejected: Vec<(usize, RejectReason)> = Vec::new();

    for s in admission_order(streams) {
        let mut base = ordering.clone();
        insert_frames(&mut base, &problem, s, &s_prev);
        let candidates = merge_candidates(&problem, base, s);

        let mut best: Option<(TimeNs, Ordering, TsnConfiguration, BTreeMap<(PortId, u64), TimeNs>)> =
            None;
        // The reported rejection reason comes from the unmerged candidate,
        // which is always generated and always evaluated first.
        let mut unmerged_failure: Option<RejectReason> = None;

        for (kind, cand) in candidates {
            let outcome = evaluate_candidate(&problem, &cand, s, &accepted);
            match outcome {
                Ok((cfg, stable)) => {
                    let metric = candidate_metric(&cfg, s);
                    let better = match &best {
                        None => true,
                        // Strict improvement required: ties keep the
                        // earlier candidate, and "no merge" comes first.
                        Some((m, ..)) => metric < *m,
                    };
                    if better {
                        best = Some((metric, cand, cfg, stable));
                    }
                }
                Err(reason) => {
                    if kind == MergeKind::NoMerge {
                        unmerged_failure = Some(reason);
                    }
                }
            }
        }

        match best {
            Some((_, cand, cfg, stable)) => {
                ordering = cand;
                s_prev = stable;
                config = cfg;
                accepted.push(s);
            }
            None => {
                let reason = unmerged_failure.unwrap_or(RejectReason::CyclicDependency);
                rejected.push((s, reason));
            }
        }
    }

    // Restrict the final configuration to accepted streams (it already
    // is, since rejected candidates were discarded wholesale).
    Ok(ScheduleOutcome {
        config,
        accepted,
        rejected,
    })
}

/// Derives a full configuration for a candidate ordering and checks that
/// the new stream and every accepted stream meet their contracts.
fn evaluate_candidate(
    problem: &Problem,
    cand: &Ordering,
    stream: usize,
    accepted: &[usize],
) -> std::result::Result<(TsnConfiguration, BTreeMap<(PortId, u64), TimeNs>), RejectReason> {
    let derived = match derive_schedule(problem, cand) {
        Ok(d) => d,
        Err(Error::CyclicDependency { .. }) => return Err(RejectReason::CyclicDependency),
        Err(Error::HorizonExceeded { .. }) => return Err(RejectReason::HorizonExceeded),
        Err(e) => unreachable!("derive_schedule only fails on cycles or horizon: {e}"),
    };
    let cfg = derived.config;
    if problem.policy.cyclic_isolation && !derive::audit_cyclic_isolation(problem, &cfg) {
        return Err(RejectReason::WindowIntrusion);
    }
    match check_feasibility(&cfg, stream, &problem.streams[stream]) {
        Verdict::Accepted => {}
        Verdict::ViolatesLatency => return Err(RejectReason::ViolatesLatency),
        Verdict::ViolatesJitter => return Err(RejectReason::ViolatesJitter),
    }
    for &a in accepted {
        let v = check_feasibility(&cfg, a, &problem.streams[a]);
        if v != Verdict::Accepted {
            return Err(RejectReason::DisruptsAccepted {
                stream: problem.streams[a].id.clone(),
                verdict: v,
            });
        }
    }
    Ok((cfg, derived.s_by_id))
}

/// Derives a configuration for an explicitly given transmission ordering
/// without running admission — the window into the constraint solver used
/// by tests and diagnostics.
pub fn derive_for_ordering(
    network: &NetworkGraph,
    streams: &[Stream],
    mode: ScheduleMode,
    ordering: &Ordering,
) -> Result<TsnConfiguration> {
    let problem = Problem::new(network, streams, mode)?;
    Ok(derive_schedule(&problem, ordering)?.config)
}
