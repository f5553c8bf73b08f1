//! Discrete-event execution of a synthesized TSN configuration under
//! randomly drawn radio delays.
//!
//! The engine models exactly the mechanisms the configuration programs
//! into the hardware:
//!
//! * **Gates.** Each egress port applies the *union* of its configured
//!   windows, repeating every hypercycle ([`gates::GateSet`]). A frame
//!   may transmit in any window that can hold it, not just the window
//!   synthesized for its batch — which is how cascading reordering arises
//!   when policing is disabled.
//! * **Ethernet ports** serve one FIFO queue in arrival order. The head
//!   starts at the earliest gated instant after the port falls idle; the
//!   port then stays busy for the frame's serialization time. Delays are
//!   deterministic: serialization + propagation + processing.
//! * **The radio link** has no queue: transmissions are frequency-
//!   multiplexed and start at the earliest open gate instant, while the
//!   port-to-port delay is drawn from the link's measured histogram.
//!   With `clip_to_pdb` the draw is clamped into the frame's delay
//!   budget, which realizes the probability space the scheduler's
//!   guarantees quantify over.
//! * **Arrival filters (PSFP).** When the configuration enables
//!   policing, every intermediate receiving node discards frames that
//!   arrive outside their per-frame arrival window. Listeners never
//!   discard: a miss at the listener is a QoS violation, not a drop.
//! * **Talkers are isochronous**: every frame instance enters its first
//!   hop exactly at its scheduled earliest start, cycle-shifted.
//!
//! A run drains fully — events continue past the last hypercycle until
//! every released frame has either reached its listener or been dropped —
//! so the QoS denominators cover every released frame. Event ties break
//! on a deterministic push sequence; runs with equal seeds are therefore
//! byte-identical.

pub mod gates;
pub mod qos;
pub mod trace;
pub mod validate;


use std::collections::{BTreeMap, BinaryHeap};
use std::cmp::Reverse;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{ethernet_delay, serialization_ns, NetworkGraph, NodeId, PortId, Stream};
use crate::scheduler::{HopConfig, TsnConfiguration};
use crate::time::TimeNs;
use crate::{Error, Result};

use gates::GateSet;
pub use qos::{QosReport, StreamQos};
pub use trace::{DropCause, JsonlSink, MemorySink, NullSink, TraceRow, TraceSink};
pub use validate::{validate_trace, Constraint, Violation};

/// Options of a single simulation run.
#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    /// Hypercycles of releases to simulate.
    pub cycles: u64,
    /// Seed of the run's random stream.
    pub seed: u64,
    /// Clamp radio delays into each frame's delay budget, realizing the
    /// conditional world in which every budget holds.
    pub clip_to_pdb: bool,
}

/// Per-hop facts that do not depend on the frame index.
#[derive(Debug, Clone, Copy)]
struct HopInfo {
    port: PortId,
    wireless: bool,
    /// Transmission (serialization) time on this hop; zero on the radio
    /// link, whose channel is not exclusively occupied.
    ser: TimeNs,
    /// Deterministic port-to-port delay; only meaningful on Ethernet.
    eth_delay: TimeNs,
    /// Node that receives this hop.
    receiver: NodeId,
}

/// A configuration cross-indexed against its network and stream set.
///
/// Construction performs the consistency checks shared by the simulator
/// and the validator; any disagreement between the three inputs is a
/// [`Error::ConfigMismatch`].
pub(crate) struct ConfigIndex<'a> {
    pub network: &'a NetworkGraph,
    pub streams: &'a [Stream],
    pub config: &'a TsnConfiguration,
    pub hyper: TimeNs,
    hops: BTreeMap<usize, Vec<HopInfo>>,
    pub gates: BTreeMap<PortId, GateSet>,
}

impl<'a> ConfigIndex<'a> {
    pub fn new(
        network: &'a NetworkGraph,
        streams: &'a [Stream],
        config: &'a TsnConfiguration,
    ) -> Result<ConfigIndex<'a>> {
        let mismatch = |reason: String| Error::ConfigMismatch { reason };
        let hyper = config.hypercycle;
        if !hyper.is_finite() || hyper <= TimeNs::ZERO {
            return Err(mismatch("hypercycle must be positive".into()));
        }
        let mut hops = BTreeMap::new();
        for (&s, cfg) in &config.streams {
            let stream = streams
                .get(s)
                .ok_or_else(|| mismatch(format!("configured stream {s} is not in the stream set")))?;
            if hyper.ns() % stream.period.ns() != 0 {
                return Err(mismatch(format!(
                    "hypercycle {hyper} is not a multiple of stream {:?}'s period",
                    stream.id
                )));
            }
            let expected_frames = (hyper.ns() / stream.period.ns()) as usize;
            if cfg.frames.len() != expected_frames {
                return Err(mismatch(format!(
                    "stream {:?} should have {expected_frames} frames per hypercycle, \
                     configuration has {}",
                    stream.id,
                    cfg.frames.len()
                )));
            }
            let mut infos = Vec::with_capacity(stream.hop_count());
            for (k, pair) in stream.path.windows(2).enumerate() {
                let port = network.port_between(pair[0], pair[1]).ok_or_else(|| {
                    mismatch(format!(
                        "stream {:?} hop {k} has no link in the network",
                        stream.id
                    ))
                })?;
                let link = network.link(port);
                let (ser, eth_delay) = if link.is_wireless() {
                    (TimeNs::ZERO, TimeNs::ZERO)
                } else {
                    let rate = match link.kind {
                        crate::model::LinkKind::Ethernet { rate_bits_per_s, .. } => rate_bits_per_s,
                        crate::model::LinkKind::Wireless { .. } => unreachable!(),
                    };
                    (
                        serialization_ns(rate, stream.size_bytes),
                        ethernet_delay(link, stream.size_bytes)?.lo,
                    )
                };
                infos.push(HopInfo {
                    port,
                    wireless: link.is_wireless(),
                    ser,
                    eth_delay,
                    receiver: pair[1],
                });
            }
            for (i, frame) in cfg.frames.iter().enumerate() {
                let release = stream.phase + stream.period.mul(i as i64);
                if frame.release != release {
                    return Err(mismatch(format!(
                        "stream {:?} frame {i} should release at {release}, \
                         configuration says {}",
                        stream.id, frame.release
                    )));
                }
                if frame.hops.len() != infos.len() {
                    return Err(mismatch(format!(
                        "stream {:?} frame {i} should cross {} hops, configuration has {}",
                        stream.id,
                        infos.len(),
                        frame.hops.len()
                    )));
                }
                for (k, hop) in frame.hops.iter().enumerate() {
                    if hop.port != infos[k].port {
                        return Err(mismatch(format!(
                            "stream {:?} frame {i} hop {k} is configured for port {} \
                             but the path uses port {}",
                            stream.id, hop.port, infos[k].port
                        )));
                    }
                }
            }
            hops.insert(s, infos);
        }
        let mut gates = BTreeMap::new();
        for infos in hops.values() {
            for info in infos {
                if gates.contains_key(&info.port) {
                    continue;
                }
                let windows = config.gcl.get(&info.port).ok_or_else(|| {
                    mismatch(format!("no gate windows configured for port {}", info.port))
                })?;
                gates.insert(
                    info.port,
                    GateSet::new(hyper, windows.iter().map(|w| w.window)),
                );
            }
        }
        Ok(ConfigIndex {
            network,
            streams,
            config,
            hyper,
            hops,
            gates,
        })
    }

    pub fn configured(&self) -> impl Iterator<Item = usize> + '_ {
        self.hops.keys().copied()
    }

    pub fn hop_count(&self, s: usize) -> usize {
        self.hops[&s].len()
    }

    pub fn port_of(&self, s: usize, hop: usize) -> PortId {
        self.hops[&s][hop].port
    }

    pub fn is_wireless(&self, s: usize, hop: usize) -> bool {
        self.hops[&s][hop].wireless
    }

    /// Transmission (serialization) duration of the hop; zero on radio.
    pub fn trans(&self, s: usize, hop: usize) -> TimeNs {
        self.hops[&s][hop].ser
    }

    pub fn receiver(&self, s: usize, hop: usize) -> NodeId {
        self.hops[&s][hop].receiver
    }

    pub fn hop_cfg(&self, s: usize, i: usize, hop: usize) -> &HopConfig {
        &self.config.streams[&s].frames[i].hops[hop]
    }

    pub fn release(&self, s: usize, i: usize) -> TimeNs {
        self.config.streams[&s].frames[i].release
    }

    pub fn gate(&self, port: PortId) -> &GateSet {
        &self.gates[&port]
    }
}

/// Draws one port-to-port delay for a frame of `size_bytes` crossing
/// `port`: the deterministic Ethernet delay, or a draw from the radio
/// link's measured histogram.
pub fn sample_delay<R: Rng + ?Sized>(
    network: &NetworkGraph,
    port: PortId,
    size_bytes: u32,
    rng: &mut R,
) -> Result<TimeNs> {
    let link = network.link(port);
    if let Some(hist) = network.histogram_for(port) {
        Ok(hist.sample(rng))
    } else {
        Ok(ethernet_delay(link, size_bytes)?.lo)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum EvKind {
    /// A frame instance becomes available at its talker, at its scheduled
    /// earliest start.
    Start { s: usize, i: usize, c: u64 },
    /// A frame instance has fully arrived at the node before `hop`
    /// (`hop == hop_count` means the listener).
    Arrive { s: usize, i: usize, c: u64, hop: usize },
    /// An Ethernet port finished a transmission.
    Free { port: PortId },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Ev {
    time: TimeNs,
    seq: u64,
    kind: EvKind,
}

/// State of one Ethernet egress port: a FIFO queue ordered by arrival and
/// at most one committed (possibly future) transmission.
#[derive(Debug)]
struct PortState {
    queue: BinaryHeap<Reverse<(TimeNs, u64, usize, usize, u64, usize)>>,
    committed: bool,
    busy_until: TimeNs,
}

impl Default for PortState {
    fn default() -> PortState {
        PortState {
            queue: BinaryHeap::new(),
            committed: false,
            busy_until: TimeNs::ZERO,
        }
    }
}

struct Engine<'a, 'b> {
    idx: &'a ConfigIndex<'a>,
    opts: SimOptions,
    rng: ChaCha8Rng,
    heap: BinaryHeap<Reverse<Ev>>,
    seq: u64,
    ports: BTreeMap<PortId, PortState>,
    report: QosReport,
    sink: &'b mut dyn TraceSink,
}

impl<'a, 'b> Engine<'a, 'b> {
    fn push(&mut self, time: TimeNs, kind: EvKind) {
        self.seq += 1;
        self.heap.push(Reverse(Ev {
            time,
            seq: self.seq,
            kind,
        }));
    }

    fn qos(&mut self, s: usize) -> &mut StreamQos {
        self.report.streams.entry(s).or_default()
    }

    fn run(&mut self) -> Result<()> {
        // Seed the first cycle; later cycles are pushed lazily so the
        // heap stays small over long horizons.
        let starts: Vec<(usize, usize, TimeNs)> = self
            .idx
            .configured()
            .flat_map(|s| {
                (0..self.idx.config.streams[&s].frames.len())
                    .map(move |i| (s, i))
            })
            .map(|(s, i)| (s, i, self.idx.hop_cfg(s, i, 0).smin))
            .collect();
        for (s, i, smin) in starts {
            self.report.streams.entry(s).or_default();
            if self.opts.cycles > 0 {
                self.push(smin, EvKind::Start { s, i, c: 0 });
            }
        }
        while let Some(Reverse(ev)) = self.heap.pop() {
            match ev.kind {
                EvKind::Start { s, i, c } => {
                    self.qos(s).record_release();
                    if c + 1 < self.opts.cycles {
                        let smin = self.idx.hop_cfg(s, i, 0).smin;
                        let next = smin + self.idx.hyper.mul((c + 1) as i64);
                        self.push(next, EvKind::Start { s, i, c: c + 1 });
                    }
                    self.start_hop(s, i, c, 0, ev.time)?;
                }
                EvKind::Arrive { s, i, c, hop } => {
                    self.arrive(s, i, c, hop, ev.time)?;
                }
                EvKind::Free { port } => {
                    self.ports.get_mut(&port).expect("port seen before").committed = false;
                    self.dispatch(port)?;
                }
            }
        }
        assert!(
            self.report.is_conserved(),
            "every released frame must be delivered, late, or dropped"
        );
        Ok(())
    }

    /// Handles full receipt of (s, i, c) by the node before `hop`.
    fn arrive(&mut self, s: usize, i: usize, c: u64, hop: usize, at: TimeNs) -> Result<()> {
        if hop == self.idx.hop_count(s) {
            // Listener. Misses are QoS violations, never drops.
            let release = self.idx.release(s, i) + self.idx.hyper.mul(c as i64);
            let latency = at - release;
            let within = latency <= self.idx.streams[s].latency_bound;
            self.qos(s).record_arrival(latency, within);
            return Ok(());
        }
        if self.idx.config.psfp_enabled {
            let window = self
                .idx
                .hop_cfg(s, i, hop - 1)
                .psfp
                .shift(self.idx.hyper.mul(c as i64));
            if !window.contains(at) {
                let node = self.idx.receiver(s, hop - 1);
                return self.drop_from(s, i, c, hop, DropCause::Psfp { node });
            }
        }
        self.start_hop(s, i, c, hop, at)
    }

    /// Makes (s, i, c) available for transmission at `hop` from `elig` on.
    fn start_hop(&mut self, s: usize, i: usize, c: u64, hop: usize, elig: TimeNs) -> Result<()> {
        let port = self.idx.port_of(s, hop);
        if self.idx.is_wireless(s, hop) {
            let Some(t) = self.idx.gate(port).next_fit(elig, TimeNs::ZERO) else {
                return self.drop_from(s, i, c, hop, DropCause::NeverSent);
            };
            let hist = self
                .idx
                .network
                .histogram_for(port)
                .expect("wireless links carry a histogram");
            let mut d = hist.sample(&mut self.rng);
            if self.opts.clip_to_pdb {
                let pdb = self.idx.hop_cfg(s, i, hop).pdb;
                d = d.max(pdb.d_min()).min(pdb.d_max());
            }
            self.emit(TraceRow {
                stream: s,
                index: i,
                cycle: c,
                hop,
                port,
                t,
                d,
                ed: d,
                drop: None,
            })?;
            self.push(t + d, EvKind::Arrive { s, i, c, hop: hop + 1 });
            return Ok(());
        }
        self.seq += 1;
        let fifo_seq = self.seq;
        self.ports
            .entry(port)
            .or_default()
            .queue
            .push(Reverse((elig, fifo_seq, s, i, c, hop)));
        self.dispatch(port)
    }

    /// Commits the head of an idle Ethernet port to its earliest gated
    /// start. Committing may lie in the future; the port counts as busy
    /// until the committed transmission ends, which keeps later-arriving
    /// frames behind it (FIFO).
    fn dispatch(&mut self, port: PortId) -> Result<()> {
        loop {
            let state = self.ports.get_mut(&port).expect("dispatch on known port");
            if state.committed {
                return Ok(());
            }
            let Some(Reverse((elig, _, s, i, c, hop))) = state.queue.pop() else {
                return Ok(());
            };
            let ser = self.idx.trans(s, hop);
            let from = elig.max(state.busy_until);
            let Some(t) = self.idx.gate(port).next_fit(from, ser) else {
                self.drop_from(s, i, c, hop, DropCause::NeverSent)?;
                continue;
            };
            let d = self.idx.hops[&s][hop].eth_delay;
            let state = self.ports.get_mut(&port).expect("dispatch on known port");
            state.committed = true;
            state.busy_until = t + ser;
            self.push(t + ser, EvKind::Free { port });
            self.push(t + d, EvKind::Arrive { s, i, c, hop: hop + 1 });
            self.emit(TraceRow {
                stream: s,
                index: i,
                cycle: c,
                hop,
                port,
                t,
                d,
                ed: d,
                drop: None,
            })?;
            return Ok(());
        }
    }

    /// Records that (s, i, c) stops at `hop`: the given cause there,
    /// never-sent rows for every later hop.
    fn drop_from(&mut self, s: usize, i: usize, c: u64, hop: usize, cause: DropCause) -> Result<()> {
        self.qos(s).record_drop(cause);
        for k in hop..self.idx.hop_count(s) {
            self.emit(TraceRow {
                stream: s,
                index: i,
                cycle: c,
                hop: k,
                port: self.idx.port_of(s, k),
                t: TimeNs::INFINITY,
                d: TimeNs::INFINITY,
                ed: TimeNs::INFINITY,
                drop: Some(if k == hop { cause } else { DropCause::NeverSent }),
            })?;
        }
        Ok(())
    }

    fn emit(&mut self, row: TraceRow) -> Result<()> {
        self.sink.push(row).map_err(Error::from)
    }
}

/// Executes `opts.cycles` hypercycles of releases of every configured
/// stream and drains all in-flight frames, writing the execution trace to
/// `sink` and returning the aggregated QoS outcome.
pub fn run_hypercycles(
    network: &NetworkGraph,
    streams: &[Stream],
    config: &TsnConfiguration,
    opts: SimOptions,
    sink: &mut dyn TraceSink,
) -> Result<QosReport> {
    let idx = ConfigIndex::new(network, streams, config)?;
    let mut engine = Engine {
        idx: &idx,
        opts,
        rng: ChaCha8Rng::seed_from_u64(opts.seed),
        heap: BinaryHeap::new(),
        seq: 0,
        ports: BTreeMap::new(),
        report: QosReport::new(opts.cycles, opts.seed),
        sink,
    };
    engine.run()?;
    Ok(engine.report)
}

/// Runs one replication per seed in parallel (traces discarded) and
/// merges the QoS reports. The merge is associative and commutative, so
/// the result does not depend on the parallel grouping.
pub fn run_replications(
    network: &NetworkGraph,
    streams: &[Stream],
    config: &TsnConfiguration,
    cycles: u64,
    clip_to_pdb: bool,
    seeds: &[u64],
) -> Result<QosReport> {
    use rayon::prelude::*;
    let reports: Vec<QosReport> = seeds
        .par_iter()
        .map(|&seed| {
            run_hypercycles(
                network,
                streams,
                config,
                SimOptions {
                    cycles,
                    seed,
                    clip_to_pdb,
                },
                &mut NullSink,
            )
        })
        .collect::<Result<_>>()?;
    Ok(reports
        .into_iter()
        .fold(QosReport::default(), |acc, r| acc.merge(&r)))
}

/// Recomputes a QoS report from a retained trace.
///
/// The result's `streams` statistics match the report produced online by
/// [`run_hypercycles`] for the same trace; `hypercycles` is inferred from
/// the largest cycle observed and the seed list is empty, since a trace
/// does not record the seed.
pub fn measure_qos(
    rows: &[TraceRow],
    network: &NetworkGraph,
    streams: &[Stream],
    config: &TsnConfiguration,
) -> Result<QosReport> {
    let idx = ConfigIndex::new(network, streams, config)?;
    let mut report = QosReport {
        hypercycles: rows.iter().map(|r| r.cycle + 1).max().unwrap_or(0),
        seeds: Vec::new(),
        streams: idx.configured().map(|s| (s, StreamQos::default())).collect(),
    };
    let mut frames: BTreeMap<(usize, usize, u64), Vec<&TraceRow>> = BTreeMap::new();
    for row in rows {
        if !idx.config.streams.contains_key(&row.stream) {
            return Err(Error::ConfigMismatch {
                reason: format!("trace references unconfigured stream {}", row.stream),
            });
        }
        frames.entry((row.stream, row.index, row.cycle)).or_default().push(row);
    }
    for ((s, i, c), mut hop_rows) in frames {
        hop_rows.sort_by_key(|r| r.hop);
        let qos = report.streams.get_mut(&s).expect("configured stream");
        qos.record_release();
        let n = idx.hop_count(s);
        let last = hop_rows.iter().find(|r| r.hop == n - 1);
        let arrival = last.and_then(|r| {
            (r.t.is_finite() && r.d.is_finite()).then(|| r.t + r.d)
        });
        if let Some(at) = arrival {
            let release = idx.release(s, i) + idx.hyper.mul(c as i64);
            let latency = at - release;
            qos.record_arrival(latency, latency <= idx.streams[s].latency_bound);
        } else {
            let cause = hop_rows
                .iter()
                .find_map(|r| r.drop)
                .unwrap_or(DropCause::NeverSent);
            qos.record_drop(cause);
        }
    }
    Ok(report)
}
