//! Transmission-ordering maintenance: positioning a new stream's frames
//! on every port of their path, and generating batch-merge candidates at
//! the translator hop after the 5G link.

use std::collections::BTreeMap;

use crate::model::PortId;
use crate::time::TimeNs;

use super::{Batch, FrameRef, Ordering, Problem};

/// Which merge option produced a candidate ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum MergeKind {
    NoMerge,
    WithPredecessor,
    WithSuccessor,
}

/// Batch index of every frame on one port, for quick precedence lookups.
fn index_frames(batches: &[Batch]) -> BTreeMap<FrameRef, usize> {
    let mut map = BTreeMap::new();
    for (i, b) in batches.iter().enumerate() {
        for &f in &b.frames {
            map.insert(f, i);
        }
    }
    map
}

/// Inserts all frames of `stream` into `ordering`, each as a fresh
/// singleton batch on every hop of its path.
///
/// Position on each port: after the rightmost batch whose (previously
/// derived) start time is at most the frame's earliest-transmission lower
/// bound, then past any directly following batches of the stream itself
/// (frames of one stream never overtake each other). On Ethernet hops the
/// position is then clamped so the relative order against any frame that
/// shares both this hop and the previous one matches the previous hop —
/// a switch queue cannot reorder, so orderings that disagree across
/// consecutive shared hops would be unrealizable.
pub(crate) fn insert_frames(
    ordering: &mut Ordering,
    problem: &Problem,
    stream: usize,
    s_prev: &BTreeMap<(PortId, u64), TimeNs>,
) {
    let hops = &problem.hops[stream];
    for fi in 0..problem.frames[stream].len() {
        let f = FrameRef { stream, index: fi };
        // The frame's batch position at the previous hop, maintained as
        // we walk the path.
        let mut prev_pos: usize = 0;
        for (k, &port) in hops.iter().enumerate() {
            let phi = problem.phi(f, k);
            let known = |b: &Batch| s_prev.get(&(port, b.id)).copied();

            let batches = ordering.port_mut(port);
            // Rightmost batch already scheduled to start no later than
            // the frame's earliest possible transmission.
            let mut pos = 0;
            for b in (0..batches.len()).rev() {
                if let Some(s) = known(&batches[b]) {
                    if s <= phi {
                        pos = b + 1;
                        break;
                    }
                }
            }
            // Never overtake own earlier frames (these are the only
            // batches without a derived start time).
            while pos < batches.len() && known(&batches[pos]).is_none() {
                pos += 1;
            }

            // FIFO clamp against the previous hop. Skipped when this hop
            // is the wireless link: it has no egress queue (frequency
            // division lets transfers overlap), so there is no queue
            // order to keep consistent.
            if k > 0 && !problem.network.link(port).is_wireless() {
                let prev_port = hops[k - 1];
                let here = index_frames(batches);
                let mut lo = 0usize;
                let mut hi = batches.len();
                for (j, b) in ordering.batches_on(prev_port).iter().enumerate() {
                    for &g in &b.frames {
                        if g == f {
                            continue;
                        }
                        // Only frames that traverse the same two ports
                        // consecutively are bound by queue order here.
                        let Some(&gk_prev) = problem.hop_of[g.stream].get(&prev_port) else {
                            continue;
                        };
                        match problem.hop_of[g.stream].get(&port) {
                            Some(&gk) if gk == gk_prev + 1 => {}
                            _ => continue,
                        }
                        let Some(&g_here) = here.get(&g) else {
                            continue;
                        };
                        if j < prev_pos {
                            lo = lo.max(g_here + 1);
                        } else if j > prev_pos {
                            hi = hi.min(g_here);
                        }
                    }
                }
                debug_assert!(
                    lo <= hi,
                    "FIFO clamp window collapsed on {port} (lo {lo} > hi {hi})"
                );
                // If the window collapsed (unreachable for orderings this
                // module maintains), respect the lower bounds; the
                // resulting candidate fails derivation instead of
                // corrupting the ordering.
                let hi = hi.max(lo);
                pos = pos.clamp(lo, hi);
            }

            let id = ordering.fresh_id();
            ordering
                .port_mut(port)
                .insert(pos, Batch { id, frames: vec![f] });
            prev_pos = pos;
        }
    }
}

/// Generates the candidate orderings for one inserted stream.
///
/// Wired streams (and modes without merging) get exactly the unmerged
/// ordering. A wireless stream can additionally merge each of its frames
/// with the batch directly before or directly after it at the translator
/// hop following the 5G link; the unmerged candidate always comes first.
pub(crate) fn merge_candidates(
    problem: &Problem,
    base: Ordering,
    stream: usize,
) -> Vec<(MergeKind, Ordering)> {
    let mut out = Vec::with_capacity(3);
    let translator_hop = problem.wireless_hop[stream].map(|w| w + 1);
    let mergeable = problem.policy.merging
        && matches!(translator_hop, Some(t) if t < problem.hops[stream].len());
    if !mergeable {
        out.push((MergeKind::NoMerge, base));
        return out;
    }
    let t = translator_hop.expect("checked above");

    for kind in [
        MergeKind::NoMerge,
        MergeKind::WithPredecessor,
        MergeKind::WithSuccessor,
    ] {
        if kind == MergeKind::NoMerge {
            out.push((kind, base.clone()));
            continue;
        }
        let mut cand = base.clone();
        let mut any = false;
        // Predecessor merges scan frames forward so an earlier own frame
        // that just merged becomes the later frame's neighbor; successor
        // merges scan backward for the symmetric reason.
        let n = problem.frames[stream].len();
        let order: Vec<usize> = match kind {
            MergeKind::WithPredecessor => (0..n).collect(),
            _ => (0..n).rev().collect(),
        };
        for fi in order {
            let f = FrameRef { stream, index: fi };
            any |= merge_one(&mut cand, problem, f, t, kind);
        }
        if any {
            out.push((kind, cand));
        }
    }
    out
}

/// Merges frame `f` with its neighbor batch at hop `t`, then keeps the
/// ordering coherent: the members it joined are also joined on the
/// wireless hop before `t` (their shared arrival window is what makes the
/// merge sound), and the merge is propagated forward along `f`'s path as
/// long as batch members keep traveling to the same next port (a shared
/// window on one port implies shared arrival there, so a switch queue
/// cannot separate them again).
///
/// Returns false (and changes nothing) if the frame has no neighbor on
/// the requested side.
fn merge_one(
    ordering: &mut Ordering,
    problem: &Problem,
    f: FrameRef,
    t: usize,
    kind: MergeKind,
) -> bool {
    let hops = &problem.hops[f.stream];
    let port_t = hops[t];

    // Locate f's singleton at the translator hop.
    let batches = ordering.port_mut(port_t);
    let Some(i) = batches.iter().position(|b| b.frames.contains(&f)) else {
        return false;
    };
    debug_assert_eq!(batches[i].frames.len(), 1, "pre-merge batches are singletons");
    let target = match kind {
        MergeKind::WithPredecessor if i > 0 => i - 1,
        MergeKind::WithSuccessor if i + 1 < batches.len() => i + 1,
        _ => return false,
    };
    let prepend = kind == MergeKind::WithSuccessor;
    let members: Vec<FrameRef> = batches[target].frames.clone();
    batches.remove(i);
    let target = if target > i { target - 1 } else { target };
    push_member(&mut ordering.port_mut(port_t)[target], f, prepend);

    // Join the same members' batch on the wireless hop: a merged window
    // at the translator only works because all members arrive through one
    // shared radio window.
    let wireless_port = hops[t - 1];
    let through_wireless: Vec<FrameRef> = members
        .iter()
        .copied()
        .filter(|m| problem.hop_of[m.stream].contains_key(&wireless_port))
        .collect();
    if let Some(&lead) = through_wireless.first() {
        join_batch_of(ordering, problem, wireless_port, f, lead, &through_wireless, prepend);
    }

    // Forward cascade: wherever f now shares a batch with frames bound
    // for the same next port, it must share their batch there too.
    let mut members = members;
    for k in t..hops.len() - 1 {
        let here = hops[k];
        let next = hops[k + 1];
        let travel_on: Vec<FrameRef> = members
            .iter()
            .copied()
            .filter(|m| {
                let Some(&mk) = problem.hop_of[m.stream].get(&here) else {
                    return false;
                };
                let path = &problem.hops[m.stream];
                mk + 1 < path.len() && path[mk + 1] == next
            })
            .collect();
        let Some(&lead) = travel_on.first() else {
            break;
        };
        members = join_batch_of(ordering, problem, next, f, lead, &travel_on, prepend);
    }
    true
}

/// Removes `f`'s singleton on `port` and adds `f` to the batch holding
/// `lead` there. Returns that batch's other members (before `f` joined).
/// `expected` members are asserted to share the batch — orderings built
/// by this module always satisfy that; it is the coherence invariant.
fn join_batch_of(
    ordering: &mut Ordering,
    _problem: &Problem,
    port: PortId,
    f: FrameRef,
    lead: FrameRef,
    expected: &[FrameRef],
    prepend: bool,
) -> Vec<FrameRef> {
    let batches = ordering.port_mut(port);
    let own = batches
        .iter()
        .position(|b| b.frames.contains(&f))
        .expect("frame was inserted on every hop of its path");
    batches.remove(own);
    let host = batches
        .iter()
        .position(|b| b.frames.contains(&lead))
        .expect("merge target members traverse this port");
    debug_assert!(
        expected
            .iter()
            .all(|m| batches[host].frames.contains(m)),
        "merged members must share one batch per port"
    );
    let prior = batches[host].frames.clone();
    push_member(&mut batches[host], f, prepend);
    prior
}

fn push_member(batch: &mut Batch, f: FrameRef, prepend: bool) {
    if prepend {
        batch.frames.insert(0, f);
    } else {
        batch.frames.push(f);
    }
}
