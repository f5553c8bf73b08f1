//! Versioned JSON file formats for networks, streams, histograms,
//! configurations, and reports.
//!
//! Every file carries a top-level `format_version` and is parsed
//! strictly: unknown fields are rejected so schema drift surfaces as a
//! parse error instead of silently ignored data. Times are integer
//! nanoseconds (`null` encodes an unbounded time, e.g. a stream with no
//! jitter requirement); histogram counts and reliability targets are
//! exact integers and fractions, so every file round-trips losslessly.
//!
//! Network and stream files refer to nodes by *name*; configuration
//! files refer to ports by `[source, destination]` name pairs and to
//! streams by id. Loading a configuration therefore needs the network
//! and stream files it was produced from; any disagreement is reported
//! as [`Error::ConfigMismatch`].

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::model::{
    DelayHistogram, HistBin, LinkKind, LinkSpec, NetworkGraph, Node, NodeRole, PortId, Stream,
};
use crate::pdb::Pdb;
use crate::rel::{Mass, Rel};
use crate::scheduler::{
    FrameConfig, GclWindow, HopConfig, ScheduleMode, ScheduleOutcome, StreamConfig,
    TsnConfiguration,
};
use crate::sim::{QosReport, StreamQos};
use crate::time::{Interval, TimeNs};
use crate::{Error, Result};

/// Current version of every file format in this module.
pub const FORMAT_VERSION: u32 = 1;

pub(crate) fn check_version(found: u32, what: &str) -> Result<()> {
    if found != FORMAT_VERSION {
        return Err(Error::InvalidFormat {
            reason: format!(
                "{what}: unsupported format_version {found}, expected {FORMAT_VERSION}"
            ),
        });
    }
    Ok(())
}

/// Reads and strictly parses a JSON file.
pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes a value as pretty-printed JSON with a trailing newline.
///
/// All map types involved are ordered, so the byte output is a pure
/// function of the value: identical inputs produce identical files.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------
// Histograms
// ---------------------------------------------------------------------

/// Bin data shared by standalone histogram files and network files:
/// `[low_ns, up_ns, count]` triples plus a normalization total.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramData {
    pub bins: Vec<(TimeNs, TimeNs, u64)>,
    pub total: u64,
}

impl HistogramData {
    pub fn to_histogram(&self) -> Result<DelayHistogram> {
        let bins = self
            .bins
            .iter()
            .map(|&(low, up, count)| HistBin { low, up, count })
            .collect();
        DelayHistogram::new(bins, Some(self.total))
    }

    pub fn from_histogram(h: &DelayHistogram) -> HistogramData {
        HistogramData {
            bins: h.bins().iter().map(|b| (b.low, b.up, b.count)).collect(),
            total: h.total(),
        }
    }
}

/// Standalone delay histogram file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramFile {
    pub format_version: u32,
    pub bins: Vec<(TimeNs, TimeNs, u64)>,
    pub total: u64,
}

impl HistogramFile {
    pub fn to_histogram(&self) -> Result<DelayHistogram> {
        check_version(self.format_version, "histogram file")?;
        HistogramData {
            bins: self.bins.clone(),
            total: self.total,
        }
        .to_histogram()
    }

    pub fn from_histogram(h: &DelayHistogram) -> HistogramFile {
        let data = HistogramData::from_histogram(h);
        HistogramFile {
            format_version: FORMAT_VERSION,
            bins: data.bins,
            total: data.total,
        }
    }
}

/// Parses a histogram from JSON text.
pub fn histogram_from_json(json: &str) -> Result<DelayHistogram> {
    let file: HistogramFile = serde_json::from_str(json)?;
    file.to_histogram()
}

// ---------------------------------------------------------------------
// Networks
// ---------------------------------------------------------------------

/// One node: a unique name plus a role
/// (`end-station`, `bridge`, `ds-tt`, `nw-tt`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeFile {
    pub name: String,
    pub role: String,
}

/// Physical properties of one directed link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum LinkKindFile {
    Ethernet {
        rate_bits_per_s: u64,
        prop_delay: TimeNs,
        proc_delay: TimeNs,
    },
    Wireless {
        histogram: String,
    },
}

/// One directed link between two named nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkFile {
    pub src: String,
    pub dst: String,
    pub kind: LinkKindFile,
}

/// Network description: nodes, directed links, the delay histograms the
/// wireless links reference, and the number of egress queues per port.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkFile {
    pub format_version: u32,
    pub nodes: Vec<NodeFile>,
    pub links: Vec<LinkFile>,
    pub histograms: BTreeMap<String, HistogramData>,
    pub queues_per_port: u8,
}

impl NetworkFile {
    pub fn from_network(net: &NetworkGraph) -> NetworkFile {
        let name = |id| net.node(id).name.clone();
        NetworkFile {
            format_version: FORMAT_VERSION,
            nodes: net
                .nodes()
                .iter()
                .map(|n| NodeFile {
                    name: n.name.clone(),
                    role: n.role.as_str().to_string(),
                })
                .collect(),
            links: net
                .links()
                .iter()
                .map(|l| LinkFile {
                    src: name(l.src),
                    dst: name(l.dst),
                    kind: match &l.kind {
                        LinkKind::Ethernet {
                            rate_bits_per_s,
                            prop_delay,
                            proc_delay,
                        } => LinkKindFile::Ethernet {
                            rate_bits_per_s: *rate_bits_per_s,
                            prop_delay: *prop_delay,
                            proc_delay: *proc_delay,
                        },
                        LinkKind::Wireless { histogram } => LinkKindFile::Wireless {
                            histogram: histogram.clone(),
                        },
                    },
                })
                .collect(),
            histograms: net
                .histograms()
                .iter()
                .map(|(k, h)| (k.clone(), HistogramData::from_histogram(h)))
                .collect(),
            queues_per_port: net.queues_per_port(),
        }
    }

    pub fn to_network(&self) -> Result<NetworkGraph> {
        check_version(self.format_version, "network file")?;
        let nodes = self
            .nodes
            .iter()
            .map(|n| {
                let role = NodeRole::parse(&n.role).ok_or_else(|| Error::InvalidFormat {
                    reason: format!("node {:?}: unknown role {:?}", n.name, n.role),
                })?;
                Ok(Node {
                    name: n.name.clone(),
                    role,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let links = self
            .links
            .iter()
            .map(|l| LinkSpec {
                src: l.src.clone(),
                dst: l.dst.clone(),
                kind: match &l.kind {
                    LinkKindFile::Ethernet {
                        rate_bits_per_s,
                        prop_delay,
                        proc_delay,
                    } => LinkKind::Ethernet {
                        rate_bits_per_s: *rate_bits_per_s,
                        prop_delay: *prop_delay,
                        proc_delay: *proc_delay,
                    },
                    LinkKindFile::Wireless { histogram } => LinkKind::Wireless {
                        histogram: histogram.clone(),
                    },
                },
            })
            .collect();
        let histograms = self
            .histograms
            .iter()
            .map(|(k, d)| Ok((k.clone(), d.to_histogram()?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        NetworkGraph::build(nodes, links, histograms, self.queues_per_port)
    }
}

// ---------------------------------------------------------------------
// Streams
// ---------------------------------------------------------------------

/// One periodic unicast stream; the path lists node names from talker to
/// listener. `jitter_bound: null` means no jitter requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamFile {
    pub id: String,
    pub path: Vec<String>,
    pub period: TimeNs,
    pub phase: TimeNs,
    pub size_bytes: u32,
    pub latency_bound: TimeNs,
    pub jitter_bound: TimeNs,
    pub reliability: Rel,
    pub priority: u8,
}

/// A stream set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamsFile {
    pub format_version: u32,
    pub streams: Vec<StreamFile>,
}

impl StreamsFile {
    pub fn from_streams(net: &NetworkGraph, streams: &[Stream]) -> StreamsFile {
        StreamsFile {
            format_version: FORMAT_VERSION,
            streams: streams
                .iter()
                .map(|s| StreamFile {
                    id: s.id.clone(),
                    path: s.path.iter().map(|&n| net.node(n).name.clone()).collect(),
                    period: s.period,
                    phase: s.phase,
                    size_bytes: s.size_bytes,
                    latency_bound: s.latency_bound,
                    jitter_bound: s.jitter_bound,
                    reliability: s.reliability,
                    priority: s.priority,
                })
                .collect(),
        }
    }

    pub fn to_streams(&self, net: &NetworkGraph) -> Result<Vec<Stream>> {
        check_version(self.format_version, "streams file")?;
        self.streams
            .iter()
            .map(|s| {
                let path = s
                    .path
                    .iter()
                    .map(|name| {
                        net.node_by_name(name).ok_or_else(|| Error::InvalidFormat {
                            reason: format!("stream {:?}: unknown node {:?}", s.id, name),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(Stream {
                    id: s.id.clone(),
                    path,
                    period: s.period,
                    phase: s.phase,
                    size_bytes: s.size_bytes,
                    latency_bound: s.latency_bound,
                    jitter_bound: s.jitter_bound,
                    reliability: s.reliability,
                    priority: s.priority,
                })
            })
            .collect()
    }
}

// ---------------------------------------------------------------------
// Configurations
// ---------------------------------------------------------------------

/// A port named by its directed link's `[source, destination]` nodes.
pub type PortRef = (String, String);

fn port_name(net: &NetworkGraph, port: PortId) -> PortRef {
    let l = net.link(port);
    (net.node(l.src).name.clone(), net.node(l.dst).name.clone())
}

fn port_lookup(net: &NetworkGraph) -> BTreeMap<PortRef, PortId> {
    net.links()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            (
                (net.node(l.src).name.clone(), net.node(l.dst).name.clone()),
                PortId(i),
            )
        })
        .collect()
}

/// One gate window, tagged with the owning batch.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GclWindowFile {
    pub batch: u64,
    pub open: TimeNs,
    pub close: TimeNs,
}

/// The gate windows of one port, in transmission order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GclPortFile {
    pub port: PortRef,
    pub windows: Vec<GclWindowFile>,
}

/// Per-hop schedule entry of one frame: transmission start bounds, the
/// delay budget reserved on the hop, the gate window, and the arrival
/// window policed at the receiving node.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HopConfigFile {
    pub port: PortRef,
    pub batch: u64,
    pub smin: TimeNs,
    pub smax: TimeNs,
    pub d_min: TimeNs,
    pub d_max: TimeNs,
    /// Probability mass the delay budget covers, as an exact fraction.
    pub mass: (u64, u64),
    pub window: Interval,
    pub psfp: Interval,
}

/// Schedule of one frame instance across its path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfigFile {
    pub release: TimeNs,
    pub hops: Vec<HopConfigFile>,
}

/// Per-stream schedule, keyed by stream id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamConfigFile {
    pub id: String,
    pub frames: Vec<FrameConfigFile>,
}

/// A complete synthesized TSN configuration. Self-describing: it embeds
/// the mode, the hypercycle, and the per-hop delay budgets, so a
/// simulator needs no scheduler state beyond the network and stream
/// files it was produced from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub format_version: u32,
    pub mode: String,
    pub hypercycle: TimeNs,
    pub psfp_enabled: bool,
    pub gcl: Vec<GclPortFile>,
    pub streams: Vec<StreamConfigFile>,
}

impl ConfigFile {
    pub fn from_config(
        net: &NetworkGraph,
        streams: &[Stream],
        config: &TsnConfiguration,
    ) -> Result<ConfigFile> {
        let stream_id = |ix: usize| -> Result<String> {
            streams
                .get(ix)
                .map(|s| s.id.clone())
                .ok_or_else(|| Error::ConfigMismatch {
                    reason: format!("configuration references stream index {ix} out of range"),
                })
        };
        Ok(ConfigFile {
            format_version: FORMAT_VERSION,
            mode: config.mode.as_str().to_string(),
            hypercycle: config.hypercycle,
            psfp_enabled: config.psfp_enabled,
            gcl: config
                .gcl
                .iter()
                .map(|(&port, windows)| GclPortFile {
                    port: port_name(net, port),
                    windows: windows
                        .iter()
                        .map(|w| GclWindowFile {
                            batch: w.batch,
                            open: w.window.lo,
                            close: w.window.hi,
                        })
                        .collect(),
                })
                .collect(),
            streams: config
                .streams
                .iter()
                .map(|(&ix, cfg)| {
                    Ok(StreamConfigFile {
                        id: stream_id(ix)?,
                        frames: cfg
                            .frames
                            .iter()
                            .map(|f| FrameConfigFile {
                                release: f.release,
                                hops: f
                                    .hops
                                    .iter()
                                    .map(|h| HopConfigFile {
                                        port: port_name(net, h.port),
                                        batch: h.batch,
                                        smin: h.smin,
                                        smax: h.smax,
                                        d_min: h.pdb.d_min(),
                                        d_max: h.pdb.d_max(),
                                        mass: (
                                            *h.pdb.achieved_mass.numer(),
                                            *h.pdb.achieved_mass.denom(),
                                        ),
                                        window: h.window,
                                        psfp: h.psfp,
                                    })
                                    .collect(),
                            })
                            .collect(),
                    })
                })
                .collect::<Result<_>>()?,
        })
    }

    pub fn to_config(&self, net: &NetworkGraph, streams: &[Stream]) -> Result<TsnConfiguration> {
        check_version(self.format_version, "configuration file")?;
        let mode = ScheduleMode::parse(&self.mode).ok_or_else(|| Error::InvalidFormat {
            reason: format!("unknown scheduling mode {:?}", self.mode),
        })?;
        let ports = port_lookup(net);
        let port = |r: &PortRef| -> Result<PortId> {
            ports.get(r).copied().ok_or_else(|| Error::ConfigMismatch {
                reason: format!("configuration references unknown port {:?} -> {:?}", r.0, r.1),
            })
        };
        let by_id: BTreeMap<&str, usize> = streams
            .iter()
            .enumerate()
            .map(|(i, s)| (s.id.as_str(), i))
            .collect();

        let mut gcl = BTreeMap::new();
        for p in &self.gcl {
            let id = port(&p.port)?;
            let windows = p
                .windows
                .iter()
                .map(|w| {
                    if w.open > w.close || !w.open.is_finite() || !w.close.is_finite() {
                        return Err(Error::InvalidFormat {
                            reason: format!(
                                "gate window [{}, {}] is not a valid interval",
                                w.open, w.close
                            ),
                        });
                    }
                    Ok(GclWindow {
                        batch: w.batch,
                        window: Interval::new(w.open, w.close),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if gcl.insert(id, windows).is_some() {
                return Err(Error::InvalidFormat {
                    reason: format!("duplicate gate list for port {:?} -> {:?}", p.port.0, p.port.1),
                });
            }
        }

        let mut stream_cfgs = BTreeMap::new();
        for s in &self.streams {
            let ix = *by_id.get(s.id.as_str()).ok_or_else(|| Error::ConfigMismatch {
                reason: format!("configuration references unknown stream {:?}", s.id),
            })?;
            let frames = s
                .frames
                .iter()
                .map(|f| {
                    let hops = f
                        .hops
                        .iter()
                        .map(|h| {
                            if h.mass.1 == 0 || h.mass.0 > h.mass.1 {
                                return Err(Error::InvalidFormat {
                                    reason: format!(
                                        "stream {:?}: invalid probability mass {}/{}",
                                        s.id, h.mass.0, h.mass.1
                                    ),
                                });
                            }
                            if h.d_min > h.d_max {
                                return Err(Error::InvalidFormat {
                                    reason: format!(
                                        "stream {:?}: delay budget [{}, {}] out of order",
                                        s.id, h.d_min, h.d_max
                                    ),
                                });
                            }
                            Ok(HopConfig {
                                port: port(&h.port)?,
                                batch: h.batch,
                                smin: h.smin,
                                smax: h.smax,
                                pdb: Pdb {
                                    interval: Interval::new(h.d_min, h.d_max),
                                    achieved_mass: Mass::new(h.mass.0, h.mass.1),
                                },
                                window: h.window,
                                psfp: h.psfp,
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    Ok(FrameConfig {
                        release: f.release,
                        hops,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            if stream_cfgs.insert(ix, StreamConfig { frames }).is_some() {
                return Err(Error::InvalidFormat {
                    reason: format!("duplicate configuration for stream {:?}", s.id),
                });
            }
        }

        Ok(TsnConfiguration {
            mode,
            hypercycle: self.hypercycle,
            psfp_enabled: self.psfp_enabled,
            gcl,
            streams: stream_cfgs,
        })
    }
}

/// The admission outcome that accompanies a configuration: which streams
/// were accepted and why the rest were rejected, in admission order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdmissionFile {
    pub accepted: Vec<String>,
    pub rejected: Vec<RejectedStreamFile>,
}

/// One rejected stream with the human-readable reason.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RejectedStreamFile {
    pub id: String,
    pub reason: String,
}

impl AdmissionFile {
    pub fn from_outcome(streams: &[Stream], outcome: &ScheduleOutcome) -> AdmissionFile {
        AdmissionFile {
            accepted: outcome
                .accepted
                .iter()
                .map(|&ix| streams[ix].id.clone())
                .collect(),
            rejected: outcome
                .rejected
                .iter()
                .map(|(ix, reason)| RejectedStreamFile {
                    id: streams[*ix].id.clone(),
                    reason: reason.to_string(),
                })
                .collect(),
        }
    }
}

// ---------------------------------------------------------------------
// QoS reports
// ---------------------------------------------------------------------

/// Delivery statistics of one simulation run (or a merge of runs), keyed
/// by stream id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QosReportFile {
    pub format_version: u32,
    /// Mode recorded from the configuration the run executed.
    pub mode: String,
    /// Whether radio delays were clamped into each frame's budget.
    pub clip_to_pdb: bool,
    pub hypercycles: u64,
    pub seeds: Vec<u64>,
    pub streams: BTreeMap<String, StreamQos>,
}

impl QosReportFile {
    pub fn from_report(
        streams: &[Stream],
        config: &TsnConfiguration,
        clip_to_pdb: bool,
        report: &QosReport,
    ) -> Result<QosReportFile> {
        Ok(QosReportFile {
            format_version: FORMAT_VERSION,
            mode: config.mode.as_str().to_string(),
            clip_to_pdb,
            hypercycles: report.hypercycles,
            seeds: report.seeds.clone(),
            streams: report
                .streams
                .iter()
                .map(|(&ix, qos)| {
                    let id = streams
                        .get(ix)
                        .map(|s| s.id.clone())
                        .ok_or_else(|| Error::ConfigMismatch {
                            reason: format!("report references stream index {ix} out of range"),
                        })?;
                    Ok((id, qos.clone()))
                })
                .collect::<Result<_>>()?,
        })
    }
}

// ---------------------------------------------------------------------
// Experiment specs and reports
// ---------------------------------------------------------------------

/// Scenario description consumed by the benchmark experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpecFile {
    pub format_version: u32,
    pub spec: crate::harness::ScenarioSpec,
}

impl ScenarioSpecFile {
    pub fn new(spec: crate::harness::ScenarioSpec) -> ScenarioSpecFile {
        ScenarioSpecFile {
            format_version: FORMAT_VERSION,
            spec,
        }
    }

    pub fn to_spec(&self) -> Result<crate::harness::ScenarioSpec> {
        check_version(self.format_version, "scenario spec file")?;
        self.spec.validate()?;
        Ok(self.spec.clone())
    }
}

/// Report of the reliability experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilityReportFile {
    pub format_version: u32,
    pub report: crate::harness::ReliabilityReport,
}

/// Report of the scalability experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalabilityReportFile {
    pub format_version: u32,
    pub report: crate::harness::ScalabilityReport,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scheduler::schedule;
    use crate::testnet::{bridged_net, ms, ns, path, stream};

    #[test]
    fn histogram_file_round_trips() {
        let h = crate::harness::measured_5g_histogram();
        let file = HistogramFile::from_histogram(&h);
        let json = serde_json::to_string(&file).unwrap();
        let back = histogram_from_json(&json).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn histogram_file_rejects_unknown_fields_and_bad_versions() {
        let bad = r#"{"format_version":1,"bins":[[0,1,1]],"total":1,"extra":0}"#;
        assert!(histogram_from_json(bad).is_err());
        let bad = r#"{"format_version":99,"bins":[[0,1,1]],"total":1}"#;
        assert!(matches!(
            histogram_from_json(bad),
            Err(Error::InvalidFormat { .. })
        ));
    }

    #[test]
    fn network_file_round_trips() {
        let net = crate::harness::agv_topology();
        let file = NetworkFile::from_network(&net);
        let json = serde_json::to_string_pretty(&file).unwrap();
        let parsed: NetworkFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, file);
        let back = parsed.to_network().unwrap();
        assert_eq!(back.nodes(), net.nodes());
        assert_eq!(back.links(), net.links());
        assert_eq!(back.histograms(), net.histograms());
        assert_eq!(back.queues_per_port(), net.queues_per_port());
    }

    #[test]
    fn network_file_refuses_unknown_roles() {
        let net = crate::testnet::chain_net(100_000_000);
        let mut file = NetworkFile::from_network(&net);
        file.nodes[0].role = "router".into();
        assert!(matches!(
            file.to_network(),
            Err(Error::InvalidFormat { .. })
        ));
    }

    #[test]
    fn streams_file_round_trips_including_unbounded_jitter() {
        let net = crate::harness::agv_topology();
        let spec = crate::harness::ScenarioSpec::reliability_preset(7);
        let streams =
            crate::harness::gen_stream_set(&net, &spec, 42).unwrap();
        assert!(streams.iter().any(|s| !s.jitter_bound.is_finite()));
        let file = StreamsFile::from_streams(&net, &streams);
        let json = serde_json::to_string_pretty(&file).unwrap();
        let parsed: StreamsFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, file);
        assert_eq!(parsed.to_streams(&net).unwrap(), streams);
    }

    #[test]
    fn streams_file_refuses_unknown_nodes() {
        let net = crate::testnet::chain_net(100_000_000);
        let streams = vec![stream(
            "a",
            path(&net, &["t", "sw", "l"]),
            ms(1),
            ns(0),
            (1, 2),
            ms(1),
            ms(1),
        )];
        let mut file = StreamsFile::from_streams(&net, &streams);
        file.streams[0].path[1] = "ghost".into();
        assert!(matches!(
            file.to_streams(&net),
            Err(Error::InvalidFormat { .. })
        ));
    }

    fn scheduled_bridged() -> (NetworkGraph, Vec<Stream>, ScheduleOutcome) {
        let net = bridged_net();
        let streams = vec![
            stream(
                "radio",
                path(&net, &["ds", "nw", "b1", "l1"]),
                ms(20),
                ns(0),
                (9, 10),
                ms(20),
                ms(20),
            ),
            stream(
                "wired",
                path(&net, &["nw", "b1", "l1"]),
                ms(10),
                ns(500_000),
                (1, 2),
                ms(5),
                ms(5),
            ),
        ];
        let outcome = schedule(&net, &streams, ScheduleMode::Fips).unwrap();
        assert_eq!(outcome.accepted.len(), 2);
        (net, streams, outcome)
    }

    #[test]
    fn config_file_round_trips_exactly() {
        let (net, streams, outcome) = scheduled_bridged();
        let file = ConfigFile::from_config(&net, &streams, &outcome.config).unwrap();
        let json = serde_json::to_string_pretty(&file).unwrap();
        let parsed: ConfigFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, file);
        let back = parsed.to_config(&net, &streams).unwrap();
        assert_eq!(back, outcome.config);
    }

    #[test]
    fn config_file_binds_to_the_stream_set_by_id() {
        let (net, streams, outcome) = scheduled_bridged();
        let file = ConfigFile::from_config(&net, &streams, &outcome.config).unwrap();
        // Renaming a stream breaks the binding.
        let mut renamed = streams.clone();
        renamed[0].id = "other".into();
        assert!(matches!(
            file.to_config(&net, &renamed),
            Err(Error::ConfigMismatch { .. })
        ));
        // An unknown port name breaks it, too.
        let mut bad = file.clone();
        bad.gcl[0].port = ("nw".into(), "ghost".into());
        assert!(matches!(
            bad.to_config(&net, &streams),
            Err(Error::ConfigMismatch { .. })
        ));
    }

    #[test]
    fn qos_report_file_uses_stream_ids() {
        use crate::sim::{run_hypercycles, NullSink, SimOptions};
        let (net, streams, outcome) = scheduled_bridged();
        let report = run_hypercycles(
            &net,
            &streams,
            &outcome.config,
            SimOptions {
                cycles: 3,
                seed: 9,
                clip_to_pdb: true,
            },
            &mut NullSink,
        )
        .unwrap();
        let file = QosReportFile::from_report(&streams, &outcome.config, true, &report).unwrap();
        assert_eq!(file.mode, "fips");
        assert!(file.streams.contains_key("radio"));
        assert!(file.streams.contains_key("wired"));
        let json = serde_json::to_string_pretty(&file).unwrap();
        let parsed: QosReportFile = serde_json::from_str(&json).unwrap();
        assert_eq!(parsed, file);
    }

    #[test]
    fn admission_file_lists_outcomes_in_admission_order() {
        let (_, streams, outcome) = scheduled_bridged();
        let adm = AdmissionFile::from_outcome(&streams, &outcome);
        // Admission sorts by descending reliability: the radio stream
        // (9/10) precedes the wired one (1/2).
        assert_eq!(adm.accepted, vec!["radio".to_string(), "wired".to_string()]);
        assert!(adm.rejected.is_empty());
    }
}
