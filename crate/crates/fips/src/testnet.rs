//! Small networks and stream builders shared by the scheduler and
//! simulator test suites.

use std::collections::BTreeMap;

use crate::model::{
    DelayHistogram, HistBin, LinkSpec, NetworkGraph, Node, NodeId, NodeRole, Stream,
};
use crate::rel::Rel;
use crate::time::TimeNs;

pub fn ns(v: i64) -> TimeNs {
    TimeNs::from_ns(v)
}

pub fn ms(v: i64) -> TimeNs {
    TimeNs::from_ms(v)
}

pub fn eth(rate_bits_per_s: u64) -> crate::model::LinkKind {
    crate::model::LinkKind::Ethernet {
        rate_bits_per_s,
        prop_delay: ns(50),
        proc_delay: TimeNs::ZERO,
    }
}

pub fn node(name: &str, role: NodeRole) -> Node {
    Node {
        name: name.to_string(),
        role,
    }
}

/// `t -> l`: one 100 Mbit/s hop. 100 B serialize in 8 µs; with 50 ns
/// propagation a frame takes 8050 ns port-to-port.
pub fn one_hop_net() -> NetworkGraph {
    NetworkGraph::build(
        vec![node("t", NodeRole::EndStation), node("l", NodeRole::EndStation)],
        vec![LinkSpec {
            src: "t".into(),
            dst: "l".into(),
            kind: eth(100_000_000),
        }],
        BTreeMap::new(),
        8,
    )
    .unwrap()
}

/// `t -> sw -> l`: two wired hops at the given rate.
pub fn chain_net(rate_bits_per_s: u64) -> NetworkGraph {
    NetworkGraph::build(
        vec![
            node("t", NodeRole::EndStation),
            node("sw", NodeRole::Bridge),
            node("l", NodeRole::EndStation),
        ],
        vec![
            LinkSpec {
                src: "t".into(),
                dst: "sw".into(),
                kind: eth(rate_bits_per_s),
            },
            LinkSpec {
                src: "sw".into(),
                dst: "l".into(),
                kind: eth(rate_bits_per_s),
            },
        ],
        BTreeMap::new(),
        8,
    )
    .unwrap()
}

/// `ds =5G=> nw -> b1 -> l1`: the radio hop feeds a two-hop wired tail.
///
/// The uplink histogram has two bins, `[4 ms, 10 ms)` holding 9 of 10
/// counts and `[10 ms, 14 ms)` the last one, so a 0.9-reliability budget
/// is exactly [4, 10] ms and a 0.99 budget is [4, 14] ms.
pub fn bridged_net() -> NetworkGraph {
    let hist = DelayHistogram::new(
        vec![
            HistBin {
                low: ms(4),
                up: ms(10),
                count: 9,
            },
            HistBin {
                low: ms(10),
                up: ms(14),
                count: 1,
            },
        ],
        None,
    )
    .unwrap();
    let mut hists = BTreeMap::new();
    hists.insert("up".to_string(), hist);
    NetworkGraph::build(
        vec![
            node("ds", NodeRole::DsTt),
            node("nw", NodeRole::NwTt),
            node("b1", NodeRole::Bridge),
            node("l1", NodeRole::EndStation),
        ],
        vec![
            LinkSpec {
                src: "ds".into(),
                dst: "nw".into(),
                kind: crate::model::LinkKind::Wireless {
                    histogram: "up".into(),
                },
            },
            LinkSpec {
                src: "nw".into(),
                dst: "b1".into(),
                kind: eth(100_000_000),
            },
            LinkSpec {
                src: "b1".into(),
                dst: "l1".into(),
                kind: eth(100_000_000),
            },
        ],
        hists,
        8,
    )
    .unwrap()
}

/// `es -> ds =5G=> nw -> b1 -> l1`: like [`bridged_net`], but the radio
/// hop sits mid-path — frames reach the device-side translator over a
/// wired hop and queue there for their radio window.
pub fn factory_net() -> NetworkGraph {
    let hist = DelayHistogram::new(
        vec![
            HistBin {
                low: ms(4),
                up: ms(10),
                count: 9,
            },
            HistBin {
                low: ms(10),
                up: ms(14),
                count: 1,
            },
        ],
        None,
    )
    .unwrap();
    let mut hists = BTreeMap::new();
    hists.insert("up".to_string(), hist);
    NetworkGraph::build(
        vec![
            node("es", NodeRole::EndStation),
            node("ds", NodeRole::DsTt),
            node("nw", NodeRole::NwTt),
            node("b1", NodeRole::Bridge),
            node("l1", NodeRole::EndStation),
        ],
        vec![
            LinkSpec {
                src: "es".into(),
                dst: "ds".into(),
                kind: eth(100_000_000),
            },
            LinkSpec {
                src: "ds".into(),
                dst: "nw".into(),
                kind: crate::model::LinkKind::Wireless {
                    histogram: "up".into(),
                },
            },
            LinkSpec {
                src: "nw".into(),
                dst: "b1".into(),
                kind: eth(100_000_000),
            },
            LinkSpec {
                src: "b1".into(),
                dst: "l1".into(),
                kind: eth(100_000_000),
            },
        ],
        hists,
        8,
    )
    .unwrap()
}

pub fn path(net: &NetworkGraph, names: &[&str]) -> Vec<NodeId> {
    names
        .iter()
        .map(|n| net.node_by_name(n).expect("test node exists"))
        .collect()
}

#[allow(clippy::too_many_arguments)]
pub fn stream(
    id: &str,
    path: Vec<NodeId>,
    period: TimeNs,
    phase: TimeNs,
    rel: (u64, u64),
    latency_bound: TimeNs,
    jitter_bound: TimeNs,
) -> Stream {
    Stream {
        id: id.to_string(),
        path,
        period,
        phase,
        size_bytes: 100,
        latency_bound,
        jitter_bound,
        reliability: Rel::new(rel.0, rel.1).unwrap(),
        priority: 5,
    }
}
