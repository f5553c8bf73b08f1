//! Deriving schedule times from a transmission ordering.
//!
//! Every batch's transmission start is the least value satisfying three
//! lower-bound families:
//!
//! * **arrival bound** — a batch window opens no earlier than the worst-
//!   case arrival of each member from its previous hop (talker frames:
//!   their release time; talkers transmit jitter-free);
//! * **port clearance** — a window opens no earlier than the previous
//!   window on the same port closes, so windows never overlap (on the
//!   contention-free wireless link the scalar baselines deliberately drop
//!   this, letting their windows overlap);
//! * **prior-slot protection** — a frame may not *arrive* at its next
//!   port before the batch scheduled right before it there has cleared,
//!   pushing back the frame's transmission at the current hop by at least
//!   the required arrival slack. This is what stops an early frame from
//!   slipping into a predecessor's gate window at the next switch.
//!
//! Since every bound is a max of affine terms in other start times, the
//! least fixed point is computed by memoized depth-first evaluation in
//! dependency order; a dependency cycle means the ordering admits no
//! schedule at all, and a start drifting past two hypercycles after its
//! frame's release aborts derivation as hopeless.
//!
//! The three families bound starts on an *absolute* timeline. Gate lists,
//! however, repeat every hypercycle, so each derived window also opens at
//! all of its images modulo the hypercycle — and a work-conserving egress
//! queue will happily transmit a waiting frame through somebody else's
//! image. [`audit_cyclic_isolation`] catches exactly that: robust modes
//! accept a derived schedule only if it stays inside its claimed windows
//! when the list wraps.

use std::collections::BTreeMap;

use crate::model::{LinkKind, PortId};
use crate::time::{Interval, TimeNs};
use crate::{Error, Result};

use super::{
    Batch, FrameConfig, FrameRef, GclWindow, HopConfig, Ordering, Problem, StreamConfig,
    TsnConfiguration,
};

/// A fully derived schedule: the exported configuration plus the raw
/// start times keyed by batch id (used to position later insertions).
#[derive(Debug)]
pub(crate) struct DerivedSchedule {
    pub config: TsnConfiguration,
    pub s_by_id: BTreeMap<(PortId, u64), TimeNs>,
}

/// Dependency-ordered evaluation state of one batch's start time.
#[derive(Clone, Copy, PartialEq)]
enum Cell {
    Unvisited,
    InProgress,
    Done(TimeNs),
}

struct Solver<'p, 'a> {
    problem: &'p Problem<'a>,
    /// Ports in deterministic order with their batch lists.
    ports: Vec<(PortId, Vec<Batch>)>,
    /// For each frame: `(port position, batch index)` per hop.
    loc: BTreeMap<FrameRef, Vec<(usize, usize)>>,
    /// Worst-case traversal time of each batch (serialization of all
    /// members plus propagation and processing on Ethernet; the widest
    /// member budget on the wireless link).
    dmax: Vec<Vec<TimeNs>>,
    /// Summed serialization of each batch's members.
    ser_sum: Vec<Vec<TimeNs>>,
    /// How long a batch blocks its port: `dmax`, except zero on wireless
    /// ports when the mode treats the radio as contention-free.
    occupancy: Vec<Vec<TimeNs>>,
    state: Vec<Vec<Cell>>,
}

impl<'p, 'a> Solver<'p, 'a> {
    fn new(problem: &'p Problem<'a>, ordering: &Ordering) -> Solver<'p, 'a> {
        let ports: Vec<(PortId, Vec<Batch>)> = ordering
            .ports()
            .map(|(p, b)| (p, b.to_vec()))
            .collect();

        let mut loc: BTreeMap<FrameRef, Vec<(usize, usize)>> = BTreeMap::new();
        for (pp, (port, batches)) in ports.iter().enumerate() {
            for (bi, batch) in batches.iter().enumerate() {
                for &f in &batch.frames {
                    let hops = problem.hops[f.stream].len();
                    let k = *problem.hop_of[f.stream]
                        .get(port)
                        .expect("frame placed on a port outside its path");
                    let entry = loc
                        .entry(f)
                        .or_insert_with(|| vec![(usize::MAX, usize::MAX); hops]);
                    assert_eq!(
                        entry[k],
                        (usize::MAX, usize::MAX),
                        "frame appears in two batches on one port"
                    );
                    entry[k] = (pp, bi);
                }
            }
        }
        for (f, hops) in &loc {
            assert!(
                hops.iter().all(|&(pp, _)| pp != usize::MAX),
                "ordering must place stream {} frame {} on every hop of its path",
                f.stream,
                f.index
            );
        }

        let mut dmax = Vec::with_capacity(ports.len());
        let mut ser_sum = Vec::with_capacity(ports.len());
        let mut occupancy = Vec::with_capacity(ports.len());
        for (port, batches) in &ports {
            let link = problem.network.link(*port);
            let mut d_row = Vec::with_capacity(batches.len());
            let mut s_row = Vec::with_capacity(batches.len());
            let mut o_row = Vec::with_capacity(batches.len());
            for batch in batches {
                let (d, s) = match &link.kind {
                    LinkKind::Ethernet {
                        prop_delay,
                        proc_delay,
                        ..
                    } => {
                        let mut sum = TimeNs::ZERO;
                        for &f in &batch.frames {
                            let k = problem.hop_of[f.stream][port];
                            sum += problem.ser[f.stream][k];
                        }
                        (sum + *prop_delay + *proc_delay, sum)
                    }
                    LinkKind::Wireless { .. } => {
                        let mut worst = TimeNs::ZERO;
                        for &f in &batch.frames {
                            let k = problem.hop_of[f.stream][port];
                            worst = worst.max(problem.pdbs[f.stream][k].d_max());
                        }
                        (worst, TimeNs::ZERO)
                    }
                };
                let occ = if link.is_wireless() && !problem.policy.clearance_on_wireless {
                    TimeNs::ZERO
                } else {
                    d
                };
                d_row.push(d);
                s_row.push(s);
                o_row.push(occ);
            }
            dmax.push(d_row);
            ser_sum.push(s_row);
            occupancy.push(o_row);
        }

        let state = ports
            .iter()
            .map(|(_, b)| vec![Cell::Unvisited; b.len()])
            .collect();

        Solver {
            problem,
            ports,
            loc,
            dmax,
            ser_sum,
            occupancy,
            state,
        }
    }

    /// Batch start-time lower-bound dependencies, mirroring `value`.
    fn dependencies(&self, p: usize, i: usize, out: &mut Vec<(usize, usize)>) {
        out.clear();
        if i > 0 {
            out.push((p, i - 1));
        }
        for &f in &self.ports[p].1[i].frames {
            let hops = &self.loc[&f];
            let k = hops.iter().position(|&(pp, bi)| (pp, bi) == (p, i));
            let k = k.expect("frame location is indexed");
            if k > 0 {
                out.push(hops[k - 1]);
            }
            if k + 1 < hops.len() {
                let (np, nj) = hops[k + 1];
                if nj > 0 {
                    out.push((np, nj - 1));
                }
            }
        }
    }

    /// The batch's start time given that all dependencies are `Done`.
    fn value(&self, p: usize, i: usize) -> TimeNs {
        let done = |(pp, bi): (usize, usize)| -> TimeNs {
            match self.state[pp][bi] {
                Cell::Done(v) => v,
                _ => unreachable!("dependency evaluated before dependent"),
            }
        };
        let mut s = TimeNs::ZERO;
        // Port clearance.
        if i > 0 {
            s = s.max(done((p, i - 1)) + self.occupancy[p][i - 1]);
        }
        for &f in &self.ports[p].1[i].frames {
            let hops = &self.loc[&f];
            let k = hops
                .iter()
                .position(|&(pp, bi)| (pp, bi) == (p, i))
                .expect("frame location is indexed");
            // Arrival bound: release at the talker, worst-case arrival
            // from the previous hop elsewhere.
            if k == 0 {
                s = s.max(self.problem.release(f));
            } else {
                let (pp, bi) = hops[k - 1];
                s = s.max(done((pp, bi)) + self.dmax[pp][bi]);
            }
            // Prior-slot protection at the next hop: the frame must not
            // arrive there before the batch preceding it has cleared.
            if k + 1 < hops.len() {
                let (np, nj) = hops[k + 1];
                if nj > 0 {
                    let clear = done((np, nj - 1)) + self.occupancy[np][nj - 1];
                    let d_min = self.problem.pdbs[f.stream][k].d_min();
                    s = s.max(clear - d_min);
                }
            }
        }
        s
    }

    /// Evaluates every batch start time in dependency order.
    fn solve(&mut self) -> Result<()> {
        let mut stack: Vec<(usize, usize)> = Vec::new();
        let mut deps: Vec<(usize, usize)> = Vec::new();
        for p in 0..self.ports.len() {
            for i in 0..self.ports[p].1.len() {
                if self.state[p][i] != Cell::Unvisited {
                    continue;
                }
                stack.push((p, i));
                while let Some(&(cp, ci)) = stack.last() {
                    match self.state[cp][ci] {
                        Cell::Done(_) => {
                            stack.pop();
                        }
                        Cell::InProgress => {
                            let v = self.value(cp, ci);
                            self.state[cp][ci] = Cell::Done(v);
                            stack.pop();
                        }
                        Cell::Unvisited => {
                            self.state[cp][ci] = Cell::InProgress;
                            self.dependencies(cp, ci, &mut deps);
                            for &(dp, di) in &deps {
                                match self.state[dp][di] {
                                    Cell::Unvisited => stack.push((dp, di)),
                                    Cell::InProgress => {
                                        return Err(Error::CyclicDependency {
                                            port: self.ports[dp].0 .0,
                                            batch: self.ports[dp].1[di].id,
                                        });
                                    }
                                    Cell::Done(_) => {}
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn start(&self, p: usize, i: usize) -> TimeNs {
        match self.state[p][i] {
            Cell::Done(v) => v,
            _ => unreachable!("solve() evaluated every batch"),
        }
    }
}

/// Computes schedule times for every batch of `ordering` and assembles
/// the full configuration.
pub(crate) fn derive_schedule(
    problem: &Problem,
    ordering: &Ordering,
) -> Result<DerivedSchedule> {
    let mut solver = Solver::new(problem, ordering);
    solver.solve()?;

    // Planning horizon: a frame whose window closes later than two full
    // hypercycles after its release can never satisfy a per-period
    // contract; later cycle instances would pile up behind it.
    let horizon = problem.hypercycle.mul(2);
    for p in 0..solver.ports.len() {
        for i in 0..solver.ports[p].1.len() {
            let close = solver.start(p, i) + solver.dmax[p][i];
            for &f in &solver.ports[p].1[i].frames {
                if close > problem.release(f) + horizon {
                    return Err(Error::HorizonExceeded {
                        stream: problem.streams[f.stream].id.clone(),
                    });
                }
            }
        }
    }

    // Gate control lists: one window per batch, in transmission order.
    let mut gcl: BTreeMap<PortId, Vec<GclWindow>> = BTreeMap::new();
    let mut s_by_id: BTreeMap<(PortId, u64), TimeNs> = BTreeMap::new();
    for (p, (port, batches)) in solver.ports.iter().enumerate() {
        let mut windows = Vec::with_capacity(batches.len());
        for (i, batch) in batches.iter().enumerate() {
            let s = solver.start(p, i);
            windows.push(GclWindow {
                batch: batch.id,
                window: Interval::new(s, s + solver.dmax[p][i]),
            });
            s_by_id.insert((*port, batch.id), s);
        }
        gcl.insert(*port, windows);
    }

    // Per-frame schedules.
    let mut streams: BTreeMap<usize, StreamConfig> = BTreeMap::new();
    let mut by_stream: BTreeMap<usize, Vec<FrameRef>> = BTreeMap::new();
    for f in solver.loc.keys() {
        by_stream.entry(f.stream).or_default().push(*f);
    }
    for (stream, frames) in by_stream {
        let mut cfg = StreamConfig::default();
        for (pos, f) in frames.iter().enumerate() {
            assert_eq!(
                f.index, pos,
                "ordering must cover a contiguous prefix of a stream's frames"
            );
            let mut hops_cfg = Vec::with_capacity(problem.hops[stream].len());
            for (k, &(pp, bi)) in solver.loc[f].iter().enumerate() {
                let (port, batches) = &solver.ports[pp];
                let s = solver.start(pp, bi);
                let pdb = problem.pdbs[stream][k];
                let own_ser = problem.ser[stream][k];
                hops_cfg.push(HopConfig {
                    port: *port,
                    batch: batches[bi].id,
                    smin: s,
                    smax: s + solver.ser_sum[pp][bi] - own_ser,
                    pdb,
                    window: Interval::new(s, s + solver.dmax[pp][bi]),
                    psfp: Interval::new(s + pdb.d_min(), s + solver.dmax[pp][bi]),
                });
            }
            cfg.frames.push(FrameConfig {
                release: problem.release(*f),
                hops: hops_cfg,
            });
        }
        streams.insert(stream, cfg);
    }

    let config = TsnConfiguration {
        mode: problem.mode,
        hypercycle: problem.hypercycle,
        psfp_enabled: problem.policy.psfp_enabled,
        gcl,
        streams,
    };

    Ok(DerivedSchedule { config, s_by_id })
}

/// Checks that a derived schedule stays inside its claimed windows once
/// the gate lists repeat modulo the hypercycle.
///
/// Egress queues are work-conserving: a frame that has arrived departs
/// through the first gate opening that fits it, whether or not that
/// opening was meant for it. On an absolute timeline the derivation's
/// clearance and protection bounds rule such poaching out, but windows
/// also recur at every image modulo the hypercycle, and an image of a
/// *later* window can land inside the interval where an earlier batch's
/// frames already wait. A schedule that leaves its claimed windows voids
/// every downstream arrival window, so robust modes must reject it.
///
/// The audit therefore requires, for every pair of batch windows on a
/// port taken modulo the hypercycle:
///
/// * **cyclic clearance** (Ethernet only) — window interiors never
///   overlap (abutting windows are fine),
/// * **closed-gate waiting** — no window image intersects the open
///   interval from another batch's earliest possible member arrival to
///   that batch's own window open. A batch's own window trivially starts
///   where its waiting interval ends; its images at other cycles are
///   checked like everybody else's, and
/// * **talker solitude** (Ethernet only) — a batch containing a talker's
///   first hop holds no other frame. A talker transmits at exactly its
///   scheduled instant; a batch-mate that reaches the queue first would
///   push that start one serialization late. With the two window rules
///   above, a lone talker's port is provably idle at its open, so exact
///   starts need nothing more.
///
/// The wireless link transmits without serialization or contention, so
/// overlapping window interiors are harmless there — every frame departs
/// at its own window open regardless of who else is sending. What still
/// goes wrong is waiting: a frame delivered to the translator before its
/// radio window opens departs through any earlier image that is still
/// open, and its early departure can undercut its own downstream arrival
/// window. Hence wireless ports keep exactly the waiting rule.
///
/// Returns true when the schedule is isolation-clean.
pub(crate) fn audit_cyclic_isolation(problem: &Problem, config: &TsnConfiguration) -> bool {
    struct Agg {
        window: Interval,
        /// Earliest instant any member can be waiting in the egress queue.
        a_min: TimeNs,
        /// Number of frames sharing the batch.
        members: usize,
        /// Whether any member is its stream's first hop.
        has_talker: bool,
    }

    let mut per_port: BTreeMap<PortId, BTreeMap<u64, Agg>> = BTreeMap::new();
    for cfg in config.streams.values() {
        for frame in &cfg.frames {
            for (k, hop) in frame.hops.iter().enumerate() {
                // Talker frames enter the queue at their own window open;
                // forwarded frames from the moment the previous hop can
                // first deliver them.
                let a = if k == 0 {
                    hop.smin
                } else {
                    let prev = &frame.hops[k - 1];
                    prev.smin + prev.pdb.d_min()
                };
                per_port
                    .entry(hop.port)
                    .or_default()
                    .entry(hop.batch)
                    .and_modify(|g| {
                        debug_assert_eq!(g.window, hop.window, "batch window is per-port unique");
                        g.a_min = g.a_min.min(a);
                        g.members += 1;
                        g.has_talker |= k == 0;
                    })
                    .or_insert(Agg {
                        window: hop.window,
                        a_min: a,
                        members: 1,
                        has_talker: k == 0,
                    });
            }
        }
    }

    let h = config.hypercycle.ns();
    debug_assert!(h > 0);
    for (&port, batches) in &per_port {
        let wireless = problem.network.link(port).is_wireless();
        let items: Vec<&Agg> = batches.values().collect();
        if !wireless {
            // Talker solitude: exact starts are impossible behind a
            // batch-mate.
            if items.iter().any(|x| x.has_talker && x.members > 1) {
                return false;
            }
            // Cyclic clearance: window interiors must not overlap mod H.
            // Two arcs of lengths li and lj whose starts sit `rel` apart
            // (cyclic) overlap iff one start lies strictly inside the
            // other arc: `rel < lj || rel + li > h`.
            for (i, x) in items.iter().enumerate() {
                let li = x.window.width().ns();
                if li >= h && items.len() > 1 {
                    return false;
                }
                for y in &items[i + 1..] {
                    let lj = y.window.width().ns();
                    let rel = (x.window.lo.ns() - y.window.lo.ns()).rem_euclid(h);
                    if lj >= h || rel < lj || rel + li > h {
                        return false;
                    }
                }
            }
        }
        // Closed-gate waiting: the open arc (a_min, window open) of each
        // batch must meet no window image. The batch's own window at
        // offset exactly `wait` is the boundary case the strict
        // comparisons admit.
        for x in &items {
            let wait = (x.window.lo - x.a_min).ns();
            if wait == 0 {
                continue;
            }
            if wait >= h {
                return false;
            }
            for y in &items {
                let lw = y.window.width().ns();
                let rel = (y.window.lo.ns() - x.a_min.ns()).rem_euclid(h);
                if lw >= h || rel < wait || rel + lw > h {
                    return false;
                }
            }
        }
    }
    true
}
