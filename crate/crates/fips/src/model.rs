//! Domain types shared by every other module: network graphs, links,
//! delay histograms, streams, frame instances, and the basic time
//! arithmetic that connects them.
//!
//! A network is a directed graph. Every directed link is an egress *port*
//! of its source node; gate control lists and transmission orderings are
//! always attached to ports. A 5G segment appears as a pair of translator
//! nodes (device-side and network-side) joined by two `Wireless` links,
//! one per direction, each carrying a reference to a delay histogram.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rel::{Mass, Rel};
use crate::time::{Interval, TimeNs};
use crate::Error;

/// Index of a node inside its [`NetworkGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

/// Index of a directed link inside its [`NetworkGraph`]. A directed link
/// is the egress port of its source node, so this doubles as a port id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PortId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for PortId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// Role of a node in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeRole {
    /// Talker or listener host.
    EndStation,
    /// TSN switch.
    Bridge,
    /// Device-side TSN translator of a 5G bridge.
    DsTt,
    /// Network-side TSN translator of a 5G bridge.
    NwTt,
}

impl NodeRole {
    /// Stable textual name used by the file formats.
    pub fn as_str(self) -> &'static str {
        match self {
            NodeRole::EndStation => "end-station",
            NodeRole::Bridge => "bridge",
            NodeRole::DsTt => "ds-tt",
            NodeRole::NwTt => "nw-tt",
        }
    }

    /// Inverse of [`NodeRole::as_str`].
    pub fn parse(s: &str) -> Option<NodeRole> {
        match s {
            "end-station" => Some(NodeRole::EndStation),
            "bridge" => Some(NodeRole::Bridge),
            "ds-tt" => Some(NodeRole::DsTt),
            "nw-tt" => Some(NodeRole::NwTt),
            _ => None,
        }
    }
}

/// A named node with a role.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub role: NodeRole,
}

/// Physical properties of a directed link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinkKind {
    /// Deterministic wired link. The per-frame delay is
    /// `ceil(size·8 / rate) + prop_delay + proc_delay`.
    Ethernet {
        rate_bits_per_s: u64,
        prop_delay: TimeNs,
        proc_delay: TimeNs,
    },
    /// Stochastic 5G hop between two translators. All delay comes from the
    /// referenced histogram; the link itself adds no serialization term and
    /// carries no port contention (frequency-division multiplexing lets
    /// frames overlap in time).
    Wireless {
        /// Name of the delay histogram for this direction.
        histogram: String,
    },
}

/// A directed link between two existing nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Link {
    pub src: NodeId,
    pub dst: NodeId,
    pub kind: LinkKind,
}

impl Link {
    pub fn is_wireless(&self) -> bool {
        matches!(self.kind, LinkKind::Wireless { .. })
    }
}

/// Link description used while building a graph, with endpoints given by
/// node name rather than index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkSpec {
    pub src: String,
    pub dst: String,
    pub kind: LinkKind,
}

/// One histogram bin `[low, up)` with an exact integer count.
///
/// The closed/open convention only matters for sampling; quantile lookups
/// treat a cumulative mass reached exactly at a bin as belonging to that
/// bin's upper edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HistBin {
    pub low: TimeNs,
    pub up: TimeNs,
    pub count: u64,
}

/// A binned delay distribution with exact integer counts.
///
/// Bins must be sorted and contiguous (`bins[i].up == bins[i+1].low`).
/// `total` is the normalization denominator; it defaults to the sum of the
/// counts but may be declared larger, in which case the histogram only
/// covers `sum/total` of the probability mass (reliability targets beyond
/// that are unreachable).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DelayHistogram {
    bins: Vec<HistBin>,
    /// Cumulative counts; `cum[i]` is the count mass in bins `0..=i`.
    cum: Vec<u64>,
    /// Sum of all bin counts.
    sum: u64,
    /// Normalization denominator (>= sum).
    total: u64,
}

impl DelayHistogram {
    /// Validates and builds a histogram. `total` defaults to the sum of
    /// counts when `None`.
    pub fn new(bins: Vec<HistBin>, total: Option<u64>) -> Result<Self, Error> {
        if bins.is_empty() {
            return Err(Error::InvalidHistogram {
                reason: "histogram has no bins".into(),
            });
        }
        let mut cum = Vec::with_capacity(bins.len());
        let mut sum: u64 = 0;
        for (i, b) in bins.iter().enumerate() {
            if !(b.low < b.up) {
                return Err(Error::InvalidHistogram {
                    reason: format!("bin {i} has low {} >= up {}", b.low, b.up),
                });
            }
            if b.low < TimeNs::ZERO {
                return Err(Error::InvalidHistogram {
                    reason: format!("bin {i} has negative lower edge {}", b.low),
                });
            }
            if i > 0 && bins[i - 1].up != b.low {
                return Err(Error::InvalidHistogram {
                    reason: format!(
                        "bins are not contiguous: bin {} ends at {} but bin {i} starts at {}",
                        i - 1,
                        bins[i - 1].up,
                        b.low
                    ),
                });
            }
            sum = sum.checked_add(b.count).ok_or(Error::Overflow)?;
            cum.push(sum);
        }
        if sum == 0 {
            return Err(Error::InvalidHistogram {
                reason: "all bin counts are zero".into(),
            });
        }
        let total = total.unwrap_or(sum);
        if total < sum {
            return Err(Error::InvalidHistogram {
                reason: format!("declared total {total} is smaller than the count sum {sum}"),
            });
        }
        Ok(DelayHistogram {
            bins,
            cum,
            sum,
            total,
        })
    }

    pub fn bins(&self) -> &[HistBin] {
        &self.bins
    }

    /// Sum of all bin counts.
    pub fn count_sum(&self) -> u64 {
        self.sum
    }

    /// Normalization denominator.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Cumulative count mass of bins `0..=i`.
    pub fn cumulative(&self, i: usize) -> u64 {
        self.cum[i]
    }

    /// Probability mass of bins `0..=i` as an exact rational.
    pub fn cumulative_mass(&self, i: usize) -> Mass {
        Mass::new(self.cum[i], self.total)
    }

    /// Support of the distribution: `[first low edge, last up edge]`.
    pub fn support(&self) -> Interval {
        Interval::new(self.bins[0].low, self.bins[self.bins.len() - 1].up)
    }

    /// Draws one delay: a bin is chosen with probability proportional to
    /// its count, then the delay is uniform inside `[low, up)`.
    ///
    /// Consumes exactly two RNG draws, so sequences are reproducible.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> TimeNs {
        let u = rng.gen_range(0..self.sum);
        // First bin whose cumulative count exceeds the draw.
        let idx = self.cum.partition_point(|&c| c <= u);
        let b = &self.bins[idx];
        TimeNs::from_ns(rng.gen_range(b.low.ns()..b.up.ns()))
    }
}

/// A validated directed network.
#[derive(Debug, Clone)]
pub struct NetworkGraph {
    nodes: Vec<Node>,
    links: Vec<Link>,
    histograms: BTreeMap<String, DelayHistogram>,
    /// Scheduled egress queues per port. The scheduler currently assigns
    /// all streams to one queue; the field is validated and carried so
    /// configurations stay self-describing.
    queues_per_port: u8,
    by_name: BTreeMap<String, NodeId>,
    by_endpoints: BTreeMap<(NodeId, NodeId), PortId>,
}

impl NetworkGraph {
    /// Resolves link endpoints by name, validates everything, and builds
    /// the graph.
    pub fn build(
        nodes: Vec<Node>,
        link_specs: Vec<LinkSpec>,
        histograms: BTreeMap<String, DelayHistogram>,
        queues_per_port: u8,
    ) -> Result<Self, Error> {
        if !(1..=8).contains(&queues_per_port) {
            return Err(Error::InvalidNetwork {
                reason: format!("queues_per_port must be in 1..=8, got {queues_per_port}"),
            });
        }
        let mut by_name = BTreeMap::new();
        for (i, n) in nodes.iter().enumerate() {
            if by_name.insert(n.name.clone(), NodeId(i)).is_some() {
                return Err(Error::DuplicateNodeId {
                    name: n.name.clone(),
                });
            }
        }
        let mut links = Vec::with_capacity(link_specs.len());
        let mut by_endpoints = BTreeMap::new();
        for (i, spec) in link_specs.into_iter().enumerate() {
            let lookup = |name: &str| {
                by_name.get(name).copied().ok_or_else(|| Error::DanglingLink {
                    link: i,
                    node: name.to_string(),
                })
            };
            let src = lookup(&spec.src)?;
            let dst = lookup(&spec.dst)?;
            if src == dst {
                return Err(Error::InvalidNetwork {
                    reason: format!("link {i} is a self-loop at {}", spec.src),
                });
            }
            match &spec.kind {
                LinkKind::Ethernet {
                    rate_bits_per_s, ..
                } => {
                    if *rate_bits_per_s == 0 {
                        return Err(Error::InvalidNetwork {
                            reason: format!("link {i} has zero rate"),
                        });
                    }
                }
                LinkKind::Wireless { histogram } => {
                    if !histograms.contains_key(histogram) {
                        return Err(Error::MissingHistogram {
                            link: i,
                            name: histogram.clone(),
                        });
                    }
                }
            }
            if by_endpoints.insert((src, dst), PortId(i)).is_some() {
                return Err(Error::InvalidNetwork {
                    reason: format!(
                        "duplicate directed link {} -> {}",
                        spec.src, spec.dst
                    ),
                });
            }
            links.push(Link {
                src,
                dst,
                kind: spec.kind,
            });
        }
        Ok(NetworkGraph {
            nodes,
            links,
            histograms,
            queues_per_port,
            by_name,
            by_endpoints,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn queues_per_port(&self) -> u8 {
        self.queues_per_port
    }

    pub fn histograms(&self) -> &BTreeMap<String, DelayHistogram> {
        &self.histograms
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn link(&self, id: PortId) -> &Link {
        &self.links[id.0]
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    /// Port (directed link) from `src` to `dst`, if one exists.
    pub fn port_between(&self, src: NodeId, dst: NodeId) -> Option<PortId> {
        self.by_endpoints.get(&(src, dst)).copied()
    }

    /// Histogram referenced by a wireless link.
    pub fn histogram_for(&self, port: PortId) -> Option<&DelayHistogram> {
        match &self.link(port).kind {
            LinkKind::Wireless { histogram } => self.histograms.get(histogram),
            LinkKind::Ethernet { .. } => None,
        }
    }

    /// Breadth-first shortest path (fewest hops) between two nodes.
    pub fn shortest_path(&self, from: NodeId, to: NodeId) -> Result<Vec<NodeId>, Error> {
        if from == to {
            return Ok(vec![from]);
        }
        let mut prev: Vec<Option<NodeId>> = vec![None; self.nodes.len()];
        let mut visited = vec![false; self.nodes.len()];
        visited[from.0] = true;
        let mut frontier = std::collections::VecDeque::new();
        frontier.push_back(from);
        // Adjacency in link order keeps the search deterministic.
        while let Some(u) = frontier.pop_front() {
            for (i, l) in self.links.iter().enumerate() {
                let _ = i;
                if l.src != u || visited[l.dst.0] {
                    continue;
                }
                visited[l.dst.0] = true;
                prev[l.dst.0] = Some(u);
                if l.dst == to {
                    let mut path = vec![to];
                    let mut cur = to;
                    while let Some(p) = prev[cur.0] {
                        path.push(p);
                        cur = p;
                    }
                    path.reverse();
                    return Ok(path);
                }
                frontier.push_back(l.dst);
            }
        }
        Err(Error::NoPath {
            from: self.node(from).name.clone(),
            to: self.node(to).name.clone(),
        })
    }
}

/// A periodic unicast stream.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    /// External identifier; unique within a stream set.
    pub id: String,
    /// Node sequence from talker to listener.
    pub path: Vec<NodeId>,
    pub period: TimeNs,
    pub phase: TimeNs,
    pub size_bytes: u32,
    /// Maximum allowed listener arrival time relative to release.
    pub latency_bound: TimeNs,
    /// Maximum allowed spread of listener arrival times.
    pub jitter_bound: TimeNs,
    /// Required probability that a frame meets its deadline.
    pub reliability: Rel,
    /// 802.1Q priority code point (0..=7). Carried for completeness; the
    /// scheduler maps every stream to a single scheduled queue.
    pub priority: u8,
}

impl Stream {
    /// Number of hops (ports) on the path.
    pub fn hop_count(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    /// Talker node.
    pub fn talker(&self) -> NodeId {
        self.path[0]
    }

    /// Listener node.
    pub fn listener(&self) -> NodeId {
        *self.path.last().expect("validated path is non-empty")
    }
}

/// Smallest and largest legal Ethernet frame sizes in bytes.
pub const MIN_FRAME_BYTES: u32 = 64;
pub const MAX_FRAME_BYTES: u32 = 1522;

/// Validates a stream set against a network.
///
/// Checks per stream: the path is a simple directed path whose links all
/// exist, it crosses at most one wireless link, `0 <= phase < period`,
/// the frame size is a legal Ethernet size, and the priority is `0..=7`.
/// Stream ids must be unique across the set.
pub fn validate_streams(network: &NetworkGraph, streams: &[Stream]) -> Result<(), Error> {
    let mut seen = std::collections::BTreeSet::new();
    for s in streams {
        let fail = |reason: String| Error::InvalidStream {
            id: s.id.clone(),
            reason,
        };
        if !seen.insert(s.id.clone()) {
            return Err(fail("duplicate stream id".into()));
        }
        if s.path.len() < 2 {
            return Err(fail("path must contain at least two nodes".into()));
        }
        let mut visited = std::collections::BTreeSet::new();
        let mut wireless = 0usize;
        for node in &s.path {
            if node.0 >= network.nodes().len() {
                return Err(fail(format!("path references unknown node index {}", node.0)));
            }
            if !visited.insert(*node) {
                return Err(fail("path revisits a node".into()));
            }
        }
        for w in s.path.windows(2) {
            let port = network.port_between(w[0], w[1]).ok_or_else(|| {
                fail(format!(
                    "no link from {} to {}",
                    network.node(w[0]).name,
                    network.node(w[1]).name
                ))
            })?;
            if network.link(port).is_wireless() {
                wireless += 1;
            }
        }
        if wireless > 1 {
            return Err(fail(format!(
                "path crosses {wireless} wireless links; at most one is supported"
            )));
        }
        if s.period <= TimeNs::ZERO {
            return Err(fail("period must be positive".into()));
        }
        if s.phase < TimeNs::ZERO || s.phase >= s.period {
            return Err(fail(format!(
                "phase {} outside [0, period {})",
                s.phase, s.period
            )));
        }
        if !(MIN_FRAME_BYTES..=MAX_FRAME_BYTES).contains(&s.size_bytes) {
            return Err(fail(format!(
                "size {} outside [{MIN_FRAME_BYTES}, {MAX_FRAME_BYTES}] bytes",
                s.size_bytes
            )));
        }
        if s.latency_bound < TimeNs::ZERO || s.jitter_bound < TimeNs::ZERO {
            return Err(fail("latency and jitter bounds must be non-negative".into()));
        }
        if s.priority > 7 {
            return Err(fail(format!("priority {} outside 0..=7", s.priority)));
        }
    }
    Ok(())
}

/// One periodic instance of a stream within a hypercycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameInstance {
    /// Index of the stream in the stream set.
    pub stream: usize,
    /// Instance index `i` in `[0, H/period)`.
    pub index: usize,
    /// Release time `phase + i·period`.
    pub release: TimeNs,
}

/// Least common multiple of all stream periods.
///
/// Fails with [`Error::Overflow`] if the result would exceed `2^62` ns and
/// with [`Error::EmptyStreamSet`] on an empty input.
pub fn hypercycle(streams: &[Stream]) -> Result<TimeNs, Error> {
    const LIMIT: i128 = 1 << 62;
    let mut acc: i128 = 1;
    if streams.is_empty() {
        return Err(Error::EmptyStreamSet);
    }
    for s in streams {
        let p = s.period.ns() as i128;
        let g = num_integer::gcd(acc, p);
        acc = (acc / g).checked_mul(p).ok_or(Error::Overflow)?;
        if acc > LIMIT {
            return Err(Error::Overflow);
        }
    }
    Ok(TimeNs::from_ns(acc as i64))
}

/// Expands a stream into its `H / period` frame instances.
///
/// `hypercycle` must be a multiple of the stream period.
pub fn expand_frames(stream_index: usize, stream: &Stream, hypercycle: TimeNs) -> Vec<FrameInstance> {
    assert_eq!(
        hypercycle.ns() % stream.period.ns(),
        0,
        "hypercycle {} is not a multiple of period {}",
        hypercycle,
        stream.period
    );
    let count = (hypercycle.ns() / stream.period.ns()) as usize;
    (0..count)
        .map(|i| FrameInstance {
            stream: stream_index,
            index: i,
            release: stream.phase + stream.period.mul(i as i64),
        })
        .collect()
}

/// Serialization time of `size_bytes` on a link of `rate_bits_per_s`,
/// rounded up to whole nanoseconds.
pub fn serialization_ns(rate_bits_per_s: u64, size_bytes: u32) -> TimeNs {
    let bits = size_bytes as u128 * 8;
    let ns = (bits * 1_000_000_000).div_ceil(rate_bits_per_s as u128);
    TimeNs::from_ns(i64::try_from(ns).expect("serialization time fits in i64"))
}

/// Deterministic traversal delay of an Ethernet link: serialization plus
/// propagation plus processing, as a degenerate interval.
pub fn ethernet_delay(link: &Link, size_bytes: u32) -> Result<Interval, Error> {
    match &link.kind {
        LinkKind::Ethernet {
            rate_bits_per_s,
            prop_delay,
            proc_delay,
        } => {
            let d = serialization_ns(*rate_bits_per_s, size_bytes) + *prop_delay + *proc_delay;
            Ok(Interval::degenerate(d))
        }
        LinkKind::Wireless { .. } => Err(Error::NotEthernet),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::TimeNs;
    use proptest::prelude::*;
    use rand::SeedableRng;

    fn ms(v: i64) -> TimeNs {
        TimeNs::from_ms(v)
    }

    fn tiny_network() -> NetworkGraph {
        let nodes = vec![
            Node {
                name: "a".into(),
                role: NodeRole::EndStation,
            },
            Node {
                name: "b".into(),
                role: NodeRole::Bridge,
            },
            Node {
                name: "c".into(),
                role: NodeRole::EndStation,
            },
        ];
        let eth = |src: &str, dst: &str| LinkSpec {
            src: src.into(),
            dst: dst.into(),
            kind: LinkKind::Ethernet {
                rate_bits_per_s: 100_000_000,
                prop_delay: TimeNs::from_ns(50),
                proc_delay: TimeNs::ZERO,
            },
        };
        NetworkGraph::build(
            nodes,
            vec![eth("a", "b"), eth("b", "c"), eth("c", "b"), eth("b", "a")],
            BTreeMap::new(),
            1,
        )
        .unwrap()
    }

    #[test]
    fn build_rejects_duplicate_node_names() {
        let nodes = vec![
            Node {
                name: "x".into(),
                role: NodeRole::Bridge,
            },
            Node {
                name: "x".into(),
                role: NodeRole::Bridge,
            },
        ];
        let err = NetworkGraph::build(nodes, vec![], BTreeMap::new(), 1).unwrap_err();
        assert!(matches!(err, Error::DuplicateNodeId { .. }));
    }

    #[test]
    fn build_rejects_unknown_link_endpoint() {
        let nodes = vec![Node {
            name: "a".into(),
            role: NodeRole::EndStation,
        }];
        let spec = LinkSpec {
            src: "a".into(),
            dst: "ghost".into(),
            kind: LinkKind::Ethernet {
                rate_bits_per_s: 1,
                prop_delay: TimeNs::ZERO,
                proc_delay: TimeNs::ZERO,
            },
        };
        let err = NetworkGraph::build(nodes, vec![spec], BTreeMap::new(), 1).unwrap_err();
        assert!(matches!(err, Error::DanglingLink { node, .. } if node == "ghost"));
    }

    #[test]
    fn build_rejects_unresolved_histogram_reference() {
        let nodes = vec![
            Node {
                name: "ds".into(),
                role: NodeRole::DsTt,
            },
            Node {
                name: "nw".into(),
                role: NodeRole::NwTt,
            },
        ];
        let spec = LinkSpec {
            src: "ds".into(),
            dst: "nw".into(),
            kind: LinkKind::Wireless {
                histogram: "missing".into(),
            },
        };
        let err = NetworkGraph::build(nodes, vec![spec], BTreeMap::new(), 1).unwrap_err();
        assert!(matches!(err, Error::MissingHistogram { name, .. } if name == "missing"));
    }

    #[test]
    fn empty_graph_builds() {
        let g = NetworkGraph::build(vec![], vec![], BTreeMap::new(), 1).unwrap();
        assert!(g.nodes().is_empty() && g.links().is_empty());
    }

    #[test]
    fn histogram_requires_contiguous_sorted_bins() {
        let bin = |low, up, count| HistBin {
            low: ms(low),
            up: ms(up),
            count,
        };
        assert!(DelayHistogram::new(vec![bin(0, 1, 1), bin(1, 2, 1)], None).is_ok());
        let gap = DelayHistogram::new(vec![bin(0, 1, 1), bin(2, 3, 1)], None);
        assert!(matches!(gap, Err(Error::InvalidHistogram { .. })));
        let inverted = DelayHistogram::new(vec![bin(2, 1, 1)], None);
        assert!(matches!(inverted, Err(Error::InvalidHistogram { .. })));
        let empty = DelayHistogram::new(vec![], None);
        assert!(matches!(empty, Err(Error::InvalidHistogram { .. })));
        let zero = DelayHistogram::new(vec![bin(0, 1, 0)], None);
        assert!(matches!(zero, Err(Error::InvalidHistogram { .. })));
    }

    #[test]
    fn histogram_sampling_stays_inside_the_drawn_bin_support() {
        let hist = DelayHistogram::new(
            vec![HistBin {
                low: ms(5),
                up: TimeNs::from_us(5100),
                count: 7,
            }],
            None,
        )
        .unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let d = hist.sample(&mut rng);
            assert!(d >= ms(5) && d < TimeNs::from_us(5100));
        }
    }

    #[test]
    fn hypercycle_examples() {
        let mk = |period_ms: i64| Stream {
            id: format!("s{period_ms}"),
            path: vec![NodeId(0), NodeId(1)],
            period: ms(period_ms),
            phase: TimeNs::ZERO,
            size_bytes: 100,
            latency_bound: ms(1),
            jitter_bound: ms(1),
            reliability: Rel::one(),
            priority: 0,
        };
        assert_eq!(hypercycle(&[mk(5), mk(20)]).unwrap(), ms(20));
        assert_eq!(hypercycle(&[mk(7)]).unwrap(), ms(7));
        assert_eq!(hypercycle(&[mk(6), mk(10), mk(15)]).unwrap(), ms(30));
        assert!(matches!(hypercycle(&[]), Err(Error::EmptyStreamSet)));
    }

    #[test]
    fn hypercycle_overflow_is_reported() {
        let mk = |period_ns: i64, id: &str| Stream {
            id: id.into(),
            path: vec![NodeId(0), NodeId(1)],
            period: TimeNs::from_ns(period_ns),
            phase: TimeNs::ZERO,
            size_bytes: 100,
            latency_bound: ms(1),
            jitter_bound: ms(1),
            reliability: Rel::one(),
            priority: 0,
        };
        // Two large coprime periods overflow the 2^62 ns budget.
        let a = mk((1 << 61) - 1, "a");
        let b = mk((1 << 61) - 3, "b");
        assert!(matches!(hypercycle(&[a, b]), Err(Error::Overflow)));
    }

    #[test]
    fn expand_frames_examples() {
        let s = Stream {
            id: "s".into(),
            path: vec![NodeId(0), NodeId(1)],
            period: ms(5),
            phase: TimeNs::ZERO,
            size_bytes: 100,
            latency_bound: ms(1),
            jitter_bound: ms(1),
            reliability: Rel::one(),
            priority: 0,
        };
        let frames = expand_frames(0, &s, ms(20));
        let releases: Vec<TimeNs> = frames.iter().map(|f| f.release).collect();
        assert_eq!(releases, vec![ms(0), ms(5), ms(10), ms(15)]);

        let one = Stream {
            period: ms(20),
            phase: ms(3),
            ..s.clone()
        };
        let frames = expand_frames(0, &one, ms(20));
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].release, ms(3));

        let late = Stream {
            period: ms(20),
            phase: ms(1),
            ..s
        };
        let frames = expand_frames(0, &late, ms(20));
        assert_eq!(frames.len(), 1);
        assert_eq!(frames[0].release, ms(1));
    }

    #[test]
    fn ethernet_delay_examples() {
        let link = Link {
            src: NodeId(0),
            dst: NodeId(1),
            kind: LinkKind::Ethernet {
                rate_bits_per_s: 100_000_000,
                prop_delay: TimeNs::from_ns(50),
                proc_delay: TimeNs::ZERO,
            },
        };
        let d = ethernet_delay(&link, 100).unwrap();
        assert_eq!(d, Interval::degenerate(TimeNs::from_ns(8050)));

        let gig = Link {
            src: NodeId(0),
            dst: NodeId(1),
            kind: LinkKind::Ethernet {
                rate_bits_per_s: 1_000_000_000,
                prop_delay: TimeNs::from_ns(50),
                proc_delay: TimeNs::from_us(1),
            },
        };
        let d = ethernet_delay(&gig, 1522).unwrap();
        assert_eq!(d, Interval::degenerate(TimeNs::from_ns(13_226)));

        // Degenerate zero-payload case: only propagation and processing.
        let d = ethernet_delay(&gig, 0).unwrap();
        assert_eq!(d, Interval::degenerate(TimeNs::from_ns(1050)));

        let wl = Link {
            src: NodeId(0),
            dst: NodeId(1),
            kind: LinkKind::Wireless {
                histogram: "h".into(),
            },
        };
        assert!(matches!(ethernet_delay(&wl, 100), Err(Error::NotEthernet)));
    }

    #[test]
    fn stream_validation_catches_bad_inputs() {
        let g = tiny_network();
        let a = g.node_by_name("a").unwrap();
        let b = g.node_by_name("b").unwrap();
        let c = g.node_by_name("c").unwrap();
        let base = Stream {
            id: "s0".into(),
            path: vec![a, b, c],
            period: ms(5),
            phase: TimeNs::ZERO,
            size_bytes: 100,
            latency_bound: TimeNs::from_us(500),
            jitter_bound: TimeNs::from_us(1),
            reliability: Rel::one(),
            priority: 0,
        };
        assert!(validate_streams(&g, &[base.clone()]).is_ok());

        let dup = vec![base.clone(), base.clone()];
        assert!(validate_streams(&g, &dup).is_err());

        let mut bad_phase = base.clone();
        bad_phase.phase = ms(5);
        assert!(validate_streams(&g, &[bad_phase]).is_err());

        let mut bad_size = base.clone();
        bad_size.size_bytes = 63;
        assert!(validate_streams(&g, &[bad_size]).is_err());

        let mut no_link = base.clone();
        no_link.path = vec![a, c];
        assert!(validate_streams(&g, &[no_link]).is_err());

        let mut revisit = base;
        revisit.path = vec![a, b, a];
        assert!(validate_streams(&g, &[revisit]).is_err());
    }

    #[test]
    fn shortest_path_is_deterministic_and_minimal() {
        let g = tiny_network();
        let a = g.node_by_name("a").unwrap();
        let c = g.node_by_name("c").unwrap();
        let path = g.shortest_path(a, c).unwrap();
        assert_eq!(path.len(), 3);
        assert_eq!(path[0], a);
        assert_eq!(path[2], c);
    }

    proptest! {
        #[test]
        fn hypercycle_divides_every_period(periods in proptest::collection::vec(1i64..=64, 1..6)) {
            let streams: Vec<Stream> = periods
                .iter()
                .enumerate()
                .map(|(i, p)| Stream {
                    id: format!("s{i}"),
                    path: vec![NodeId(0), NodeId(1)],
                    period: TimeNs::from_us(*p),
                    phase: TimeNs::ZERO,
                    size_bytes: 100,
                    latency_bound: TimeNs::from_us(1),
                    jitter_bound: TimeNs::from_us(1),
                    reliability: Rel::one(),
                    priority: 0,
                })
                .collect();
            let h = hypercycle(&streams).unwrap();
            for s in &streams {
                prop_assert_eq!(h.ns() % s.period.ns(), 0);
            }
        }

        #[test]
        fn expanded_releases_step_by_exactly_one_period(
            period_us in 1i64..=20,
            phase_us in 0i64..20,
            mult in 1i64..=8,
        ) {
            let phase_us = phase_us % period_us;
            let s = Stream {
                id: "s".into(),
                path: vec![NodeId(0), NodeId(1)],
                period: TimeNs::from_us(period_us),
                phase: TimeNs::from_us(phase_us),
                size_bytes: 100,
                latency_bound: TimeNs::from_us(1),
                jitter_bound: TimeNs::from_us(1),
                reliability: Rel::one(),
                priority: 0,
            };
            let h = TimeNs::from_us(period_us * mult);
            let frames = expand_frames(3, &s, h);
            prop_assert_eq!(frames.len() as i64, mult);
            for (i, f) in frames.iter().enumerate() {
                prop_assert_eq!(f.stream, 3);
                prop_assert_eq!(f.index, i);
                prop_assert_eq!(f.release, s.phase + s.period.mul(i as i64));
            }
        }

        #[test]
        fn serialization_is_monotone_in_size(a in 0u32..=1522, b in 0u32..=1522, rate in 1u64..=10_000_000_000) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(serialization_ns(rate, lo) <= serialization_ns(rate, hi));
        }
    }
}
