//! Execution-sequence traces.
//!
//! A trace records, for every frame instance and every hop of its path,
//! when the transmission started (`t`), how long the hop took (`d`), and
//! the effective delay (`ed`) used for occupancy accounting. Infinite
//! times mark frames that never started a hop or never completed one;
//! the `drop` marker says why.
//!
//! Rows are emitted in event order, which is deterministic for a given
//! seed, so serialized traces are byte-identical across runs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::model::{NodeId, PortId};
use crate::time::TimeNs;

/// Why a frame instance stopped progressing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DropCause {
    /// Discarded mid-hop: the transmission did not complete.
    Transit,
    /// Discarded on receipt by the per-stream arrival filter at `node`.
    Psfp { node: NodeId },
    /// Never transmitted at this hop (dropped earlier, or no gate window
    /// can hold the frame).
    NeverSent,
}

/// One (frame instance, hop) record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRow {
    /// Index of the stream in the problem's stream list.
    pub stream: usize,
    /// Frame index within the stream's hypercycle template.
    pub index: usize,
    /// Hypercycle number of this instance.
    pub cycle: u64,
    /// Hop position along the stream's path, 0 = talker egress.
    pub hop: usize,
    /// Egress port the hop uses.
    pub port: PortId,
    /// Transmission start; infinite if the frame never reached this hop.
    pub t: TimeNs,
    /// Port-to-port delay of the hop; infinite if dropped mid-hop.
    pub d: TimeNs,
    /// Effective delay: `d` when finite, the hop's worst-case budget when
    /// the frame was discarded mid-hop, infinite when never sent.
    pub ed: TimeNs,
    pub drop: Option<DropCause>,
}

/// Receives rows as the simulator seals them.
pub trait TraceSink {
    fn push(&mut self, row: TraceRow) -> std::io::Result<()>;
}

/// Discards every row; QoS accounting still runs.
#[derive(Debug, Default)]
pub struct NullSink;

impl TraceSink for NullSink {
    fn push(&mut self, _row: TraceRow) -> std::io::Result<()> {
        Ok(())
    }
}

/// Retains rows in memory, e.g. for validation.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub rows: Vec<TraceRow>,
}

impl MemorySink {
    pub fn new() -> MemorySink {
        MemorySink::default()
    }

    pub fn into_rows(self) -> Vec<TraceRow> {
        self.rows
    }
}

impl TraceSink for MemorySink {
    fn push(&mut self, row: TraceRow) -> std::io::Result<()> {
        self.rows.push(row);
        Ok(())
    }
}

/// Streams rows as JSON Lines to a writer.
#[derive(Debug)]
pub struct JsonlSink<W: Write> {
    out: W,
}

impl<W: Write> JsonlSink<W> {
    pub fn new(out: W) -> JsonlSink<W> {
        JsonlSink { out }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> TraceSink for JsonlSink<W> {
    fn push(&mut self, row: TraceRow) -> std::io::Result<()> {
        serde_json::to_writer(&mut self.out, &row)?;
        self.out.write_all(b"\n")
    }
}

/// Parses a JSON Lines trace produced by [`JsonlSink`].
pub fn read_jsonl(input: impl std::io::BufRead) -> std::io::Result<Vec<TraceRow>> {
    let mut rows = Vec::new();
    for line in input.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        rows.push(serde_json::from_str(&line)?);
    }
    Ok(rows)
}
