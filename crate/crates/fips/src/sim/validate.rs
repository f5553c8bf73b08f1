//! Trace validation against the formal execution-sequence constraints.
//!
//! [`validate_trace`] replays a recorded trace against the configuration
//! and network it claims to come from and reports every breach of the
//! nine constraints that define a valid execution:
//!
//! 1. **TransmissionConsistency** — an Ethernet port transmits one frame
//!    at a time: transmissions, each occupying the port for its
//!    serialization time, must not overlap. The radio link is
//!    frequency-multiplexed, so it is exempt.
//! 2. **SequentialTransmission** — a hop cannot start before the frame
//!    has fully arrived over the previous hop.
//! 3. **IsochronousTalker** — every frame instance starts its first hop
//!    exactly at its scheduled earliest start, cycle-shifted.
//! 4. **Fifo** — on an Ethernet port, forwarded frames transmit in
//!    arrival order. Simultaneous arrivals are unordered; the radio link
//!    has no queue and is exempt.
//! 5. **GclEncapsulation** — every transmission lies inside an open gate
//!    span: it starts at an open instant and the gate stays open for the
//!    frame's serialization time. Instantaneous radio hand-offs must
//!    start strictly before a close edge.
//! 6. **GclProgress** — gated ports are work-conserving: each
//!    transmission starts at the earliest gated instant after both its
//!    own eligibility and the end of the preceding transmission on the
//!    port. (The intuitive reading — the gate never idles while a frame
//!    waits — is unsatisfiable when the remaining open span is too short
//!    for the waiting frame, so the check is phrased as earliest-fit,
//!    which implies it whenever it is satisfiable.)
//! 7. **TransmissionPolicing** — a frame whose hop delay exceeds its
//!    budget is discarded during transmission, and only then. Ethernet
//!    delays are deterministic and within budget by construction, so any
//!    mid-hop discard there is a breach; radio overruns are policed on
//!    receipt by the next node instead of mid-air, so a finite late radio
//!    delay is legitimate.
//! 8. **Psfp** — with policing enabled, an intermediate node discards a
//!    frame if and only if it arrives outside its per-frame arrival
//!    window; with policing disabled nothing is ever discarded on
//!    receipt. Listeners never discard.
//! 9. **PolicingConsistency** — a frame that never transmitted a hop has
//!    no delay there, and a frame dropped on a hop never transmits later
//!    hops.
//!
//! The validator re-derives every reference quantity (gate spans,
//! serialization times, arrival windows, budgets) from the network,
//! stream set, and configuration; the trace contributes only `t`, `d`,
//! and the drop markers.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::model::{NetworkGraph, PortId, Stream};
use crate::scheduler::TsnConfiguration;
use crate::time::TimeNs;
use crate::{Error, Result};

use super::trace::{DropCause, TraceRow};
use super::ConfigIndex;

/// The nine execution-sequence constraints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Constraint {
    TransmissionConsistency,
    SequentialTransmission,
    IsochronousTalker,
    Fifo,
    GclEncapsulation,
    GclProgress,
    TransmissionPolicing,
    Psfp,
    PolicingConsistency,
}

impl std::fmt::Display for Constraint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// One constraint breach, anchored at a (frame instance, hop) record.
#[derive(Debug, Clone, Serialize)]
pub struct Violation {
    pub constraint: Constraint,
    pub stream: usize,
    pub index: usize,
    pub cycle: u64,
    pub hop: usize,
    pub port: Option<PortId>,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} at stream {} frame {} cycle {} hop {}",
            self.constraint, self.stream, self.index, self.cycle, self.hop
        )?;
        if let Some(p) = self.port {
            write!(f, " (port {p})")?;
        }
        write!(f, ": {}", self.detail)
    }
}

/// The (t, d, marker) triple of one hop; hops without a trace row count
/// as never reached.
#[derive(Debug, Clone, Copy)]
struct Cell {
    t: TimeNs,
    d: TimeNs,
    drop: Option<DropCause>,
}

const ABSENT: Cell = Cell {
    t: TimeNs::INFINITY,
    d: TimeNs::INFINITY,
    drop: None,
};

/// A transmission projected onto its port, for the per-port checks.
#[derive(Debug, Clone, Copy)]
struct OnPort {
    t: TimeNs,
    trans: TimeNs,
    /// When the frame became available to the port: the scheduled start
    /// for talker hops, the previous hop's arrival otherwise. `None` when
    /// the previous arrival is unknown (itself a breach, flagged by the
    /// per-frame checks).
    elig: Option<TimeNs>,
    /// Forwarded frames (hop >= 1) take part in the FIFO check.
    forwarded: bool,
    key: (usize, usize, u64, usize),
}

/// Checks a trace against the nine execution-sequence constraints.
///
/// Returns the (possibly empty) list of violations. Structural
/// disagreement — rows for unconfigured streams, out-of-range hop or
/// frame indexes, ports that do not match the stream's path, duplicate
/// rows — is an error, not a violation: such a trace is not an execution
/// of this configuration at all.
pub fn validate_trace(
    rows: &[TraceRow],
    network: &NetworkGraph,
    streams: &[Stream],
    config: &TsnConfiguration,
) -> Result<Vec<Violation>> {
    let idx = ConfigIndex::new(network, streams, config)?;
    let mut frames: BTreeMap<(usize, usize, u64), Vec<Cell>> = BTreeMap::new();
    let mut seen = std::collections::BTreeSet::new();
    for row in rows {
        let cfg = config.streams.get(&row.stream).ok_or_else(|| Error::ConfigMismatch {
            reason: format!("trace references unconfigured stream {}", row.stream),
        })?;
        if row.index >= cfg.frames.len() {
            return Err(Error::ConfigMismatch {
                reason: format!(
                    "trace references frame {} of stream {}, which has {} per hypercycle",
                    row.index,
                    row.stream,
                    cfg.frames.len()
                ),
            });
        }
        let n = idx.hop_count(row.stream);
        if row.hop >= n {
            return Err(Error::ConfigMismatch {
                reason: format!(
                    "trace references hop {} of stream {}, which has {n}",
                    row.hop, row.stream
                ),
            });
        }
        if row.port != idx.port_of(row.stream, row.hop) {
            return Err(Error::ConfigMismatch {
                reason: format!(
                    "stream {} hop {} crosses port {}, trace says port {}",
                    row.stream,
                    row.hop,
                    idx.port_of(row.stream, row.hop),
                    row.port
                ),
            });
        }
        if !seen.insert((row.stream, row.index, row.cycle, row.hop)) {
            return Err(Error::InvalidFormat {
                reason: format!(
                    "duplicate trace row for stream {} frame {} cycle {} hop {}",
                    row.stream, row.index, row.cycle, row.hop
                ),
            });
        }
        let cells = frames
            .entry((row.stream, row.index, row.cycle))
            .or_insert_with(|| vec![ABSENT; n]);
        cells[row.hop] = Cell {
            t: row.t,
            d: row.d,
            drop: row.drop,
        };
    }

    let mut out = Vec::new();
    let mut ports: BTreeMap<PortId, Vec<OnPort>> = BTreeMap::new();

    for (&(s, i, c), cells) in &frames {
        let n = cells.len();
        let shift = idx.hyper.mul(c as i64);
        let mut violate = |constraint, hop, port, detail: String| {
            out.push(Violation {
                constraint,
                stream: s,
                index: i,
                cycle: c,
                hop,
                port,
                detail,
            });
        };

        // IsochronousTalker: the first hop starts exactly on schedule.
        let scheduled = idx.hop_cfg(s, i, 0).smin + shift;
        if cells[0].t != scheduled {
            let got = cells[0].t;
            violate(
                Constraint::IsochronousTalker,
                0,
                Some(idx.port_of(s, 0)),
                if got.is_finite() {
                    format!("talker transmitted at {got}, scheduled start is {scheduled}")
                } else {
                    format!("talker never transmitted; scheduled start is {scheduled}")
                },
            );
        }

        for hop in 0..n {
            let cell = cells[hop];
            let port = idx.port_of(s, hop);
            let wireless = idx.is_wireless(s, hop);

            // PolicingConsistency: no transmission, no delay …
            if !cell.t.is_finite() && cell.d.is_finite() {
                violate(
                    Constraint::PolicingConsistency,
                    hop,
                    Some(port),
                    format!("hop has delay {} but never transmitted", cell.d),
                );
            }
            // … and a mid-hop discard stops the frame.
            if hop + 1 < n && !cell.d.is_finite() && cells[hop + 1].t.is_finite() {
                violate(
                    Constraint::PolicingConsistency,
                    hop,
                    Some(port),
                    format!(
                        "hop never completed but hop {} transmitted at {}",
                        hop + 1,
                        cells[hop + 1].t
                    ),
                );
            }

            // TransmissionPolicing.
            if let Some(DropCause::Transit) = cell.drop {
                if !cell.t.is_finite() || cell.d.is_finite() {
                    violate(
                        Constraint::TransmissionPolicing,
                        hop,
                        Some(port),
                        "mid-hop discard marker on a hop that did not abort mid-transmission"
                            .into(),
                    );
                }
            }
            if cell.t.is_finite() {
                let budget = idx.hop_cfg(s, i, hop).pdb.d_max();
                if !wireless && !cell.d.is_finite() {
                    violate(
                        Constraint::TransmissionPolicing,
                        hop,
                        Some(port),
                        "mid-hop discard on a deterministic hop that cannot exceed its budget"
                            .into(),
                    );
                }
                if !wireless && cell.d.is_finite() && cell.d > budget {
                    violate(
                        Constraint::TransmissionPolicing,
                        hop,
                        Some(port),
                        format!(
                            "hop delay {} exceeds the budget {budget} without a discard",
                            cell.d
                        ),
                    );
                }
            }

            if cell.t.is_finite() {
                // GclEncapsulation: inside an open gate span.
                let trans = idx.trans(s, hop);
                if !idx.gate(port).fits(cell.t, trans) {
                    violate(
                        Constraint::GclEncapsulation,
                        hop,
                        Some(port),
                        format!(
                            "transmission at {} (duration {trans}) lies outside every gate span",
                            cell.t
                        ),
                    );
                }

                let elig = if hop == 0 {
                    Some(scheduled)
                } else if cells[hop - 1].t.is_finite() && cells[hop - 1].d.is_finite() {
                    let arr = cells[hop - 1].t + cells[hop - 1].d;
                    // SequentialTransmission: fully received first.
                    if cell.t < arr {
                        violate(
                            Constraint::SequentialTransmission,
                            hop,
                            Some(port),
                            format!("transmitted at {} before arriving at {arr}", cell.t),
                        );
                    }
                    Some(arr)
                } else {
                    None
                };

                // GclProgress on the radio link: no queue, so every frame
                // independently starts at its earliest gated instant.
                if wireless {
                    if let Some(e) = elig {
                        let expected = idx.gate(port).next_fit(e, TimeNs::ZERO);
                        if expected != Some(cell.t) {
                            violate(
                                Constraint::GclProgress,
                                hop,
                                Some(port),
                                match expected {
                                    Some(x) => format!(
                                        "radio hand-off at {} but the gate admits it at {x}",
                                        cell.t
                                    ),
                                    None => "no gate span admits this hand-off".into(),
                                },
                            );
                        }
                    }
                } else {
                    ports.entry(port).or_default().push(OnPort {
                        t: cell.t,
                        trans,
                        elig,
                        forwarded: hop >= 1,
                        key: (s, i, c, hop),
                    });
                }
            }

            // Psfp: receipt filtering between hops.
            if hop + 1 <= n - 1 {
                let arr = if cell.t.is_finite() && cell.d.is_finite() {
                    Some(cell.t + cell.d)
                } else {
                    None
                };
                let started = cells[hop + 1].t.is_finite();
                let next_port = idx.port_of(s, hop + 1);
                if config.psfp_enabled {
                    if let Some(arr) = arr {
                        let window = idx.hop_cfg(s, i, hop).psfp.shift(shift);
                        let inside = window.contains(arr);
                        if inside && !started {
                            violate(
                                Constraint::Psfp,
                                hop + 1,
                                Some(next_port),
                                format!(
                                    "discarded on receipt although it arrived at {arr}, inside \
                                     its arrival window [{}, {}]",
                                    window.lo, window.hi
                                ),
                            );
                        }
                        if !inside && started {
                            violate(
                                Constraint::Psfp,
                                hop + 1,
                                Some(next_port),
                                format!(
                                    "forwarded although it arrived at {arr}, outside its \
                                     arrival window [{}, {}]",
                                    window.lo, window.hi
                                ),
                            );
                        }
                    }
                } else {
                    if matches!(cells[hop + 1].drop, Some(DropCause::Psfp { .. })) {
                        violate(
                            Constraint::Psfp,
                            hop + 1,
                            Some(next_port),
                            "receipt-filter discard although policing is disabled".into(),
                        );
                    }
                    if arr.is_some() && !started {
                        violate(
                            Constraint::Psfp,
                            hop + 1,
                            Some(next_port),
                            "discarded on receipt although policing is disabled".into(),
                        );
                    }
                }
            }
        }
    }

    // Per-port checks on Ethernet transmissions, in start order.
    for (&port, list) in &mut ports {
        list.sort_by_key(|e| (e.t, e.key));
        let gate = idx.gate(port);

        // TransmissionConsistency: one frame at a time.
        for pair in list.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            if a.t + a.trans > b.t {
                out.push(Violation {
                    constraint: Constraint::TransmissionConsistency,
                    stream: b.key.0,
                    index: b.key.1,
                    cycle: b.key.2,
                    hop: b.key.3,
                    port: Some(port),
                    detail: format!(
                        "transmission at {} overlaps stream {} frame {} cycle {} hop {} \
                         occupying the port until {}",
                        b.t,
                        a.key.0,
                        a.key.1,
                        a.key.2,
                        a.key.3,
                        a.t + a.trans
                    ),
                });
            }
        }

        // GclProgress: earliest-fit dispatch.
        let mut prev_end = TimeNs::from_ns(i64::MIN);
        for e in list.iter() {
            if let Some(elig) = e.elig {
                let from = elig.max(prev_end);
                let expected = gate.next_fit(from, e.trans);
                if expected != Some(e.t) {
                    out.push(Violation {
                        constraint: Constraint::GclProgress,
                        stream: e.key.0,
                        index: e.key.1,
                        cycle: e.key.2,
                        hop: e.key.3,
                        port: Some(port),
                        detail: match expected {
                            Some(x) => format!(
                                "transmitted at {} although eligible from {from} with the \
                                 gate admitting it at {x}",
                                e.t
                            ),
                            None => "no gate span can hold the transmission".into(),
                        },
                    });
                }
            }
            prev_end = prev_end.max(e.t + e.trans);
        }

        // Fifo: forwarded frames leave in arrival order.
        let mut fifo: Vec<&OnPort> = list
            .iter()
            .filter(|e| e.forwarded && e.elig.is_some())
            .collect();
        fifo.sort_by_key(|e| (e.elig, e.t, e.key));
        let mut latest: Option<&OnPort> = None;
        let mut group_start = 0;
        for i in 0..fifo.len() {
            if fifo[i].elig != fifo[group_start].elig {
                for e in &fifo[group_start..i] {
                    if latest.map_or(true, |l| e.t > l.t) {
                        latest = Some(e);
                    }
                }
                group_start = i;
            }
            if let Some(l) = latest {
                if fifo[i].t < l.t {
                    out.push(Violation {
                        constraint: Constraint::Fifo,
                        stream: fifo[i].key.0,
                        index: fifo[i].key.1,
                        cycle: fifo[i].key.2,
                        hop: fifo[i].key.3,
                        port: Some(port),
                        detail: format!(
                            "arrived at {} after stream {} frame {} cycle {} hop {} \
                             (arrived {}) yet transmitted earlier ({} < {})",
                            fifo[i].elig.expect("filtered"),
                            l.key.0,
                            l.key.1,
                            l.key.2,
                            l.key.3,
                            l.elig.expect("filtered"),
                            fifo[i].t,
                            l.t
                        ),
                    });
                }
            }
        }
    }

    out.sort_by_key(|v| (v.stream, v.index, v.cycle, v.hop, v.constraint));
    Ok(out)
}
