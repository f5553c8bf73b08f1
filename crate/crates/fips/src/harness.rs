//! Evaluation scenario: an automated-guided-vehicle (AGV) cell bridged to
//! a factory backbone over a 5G link, plus the reliability and
//! scalability experiments that exercise it.
//!
//! The topology models a small industrial deployment: a device-side
//! partition (AGV end stations behind a pair of switches and a root
//! switch) and a network-side partition (a backbone tree of switches and
//! end stations), joined by a logical 5G bridge whose two translators are
//! the only route between the partitions. All Ethernet links run at
//! 100 Mbit/s with 50 ns propagation delay; the radio segment's delay is
//! drawn from a measured histogram.
//!
//! Two experiments are provided:
//!
//! * [`exp_reliability`] schedules one traffic mix with the robust
//!   full-interleaving scheduler and the two scalar-budget baselines,
//!   executes each configuration under real (unclipped) radio delays, and
//!   reports the per-stream delivery statistics — showing how scalar
//!   budgets collapse while the robust schedule holds its guarantees.
//! * [`exp_scalability`] sweeps a grid of (reliability, jitter) QoS
//!   points and measures how many wireless streams each robust mode can
//!   admit, replicated over several randomly generated stream sets.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    DelayHistogram, LinkKind, LinkSpec, NetworkGraph, Node, NodeId, NodeRole, Stream,
};
use crate::rel::Rel;
use crate::scheduler::{schedule, ScheduleMode, ScheduleOutcome};
use crate::sim::{run_replications, StreamQos};
use crate::time::TimeNs;
use crate::{Error, Result};

/// Measured one-way 5G delay histogram (uplink direction of a live
/// industrial 5G deployment), embedded so examples and experiments run
/// without external files. 99 contiguous 103 µs bins spanning
/// 3.803 ms to 14.0 ms, normalized over 99 999 samples.
pub fn measured_5g_histogram() -> DelayHistogram {
    static JSON: &str = include_str!("../assets/hist_5g.json");
    crate::formats::histogram_from_json(JSON)
        .expect("embedded histogram asset is valid")
}

const ETHERNET_RATE: u64 = 100_000_000;

fn ethernet() -> LinkKind {
    LinkKind::Ethernet {
        rate_bits_per_s: ETHERNET_RATE,
        prop_delay: TimeNs::from_ns(50),
        proc_delay: TimeNs::ZERO,
    }
}

/// The default evaluation network: 3 AGV end stations, 8 backbone end
/// stations, 23 nodes in total.
pub fn agv_topology() -> NetworkGraph {
    agv_topology_sized(3, 8).expect("default topology parameters are valid")
}

/// The evaluation network with configurable end-station counts.
///
/// Device side: `agv_end_stations` hosts split over two switches
/// (`agv-sw-1`, `agv-sw-2`, earlier hosts on the first), both uplinked to
/// `agv-root` and cross-linked to each other; `agv-root` connects to the
/// device-side translator `ds-tt`. Network side: the translator `nw-tt`
/// connects to `bb-root`, which fans out to two distribution switches
/// (`bb-sw-l`, `bb-sw-r`, cross-linked), each serving two leaf switches
/// (`bb-sw-l1`, `bb-sw-l2`, `bb-sw-r1`, `bb-sw-r2`); the
/// `backbone_end_stations` hosts are spread evenly over the leaves. The
/// translators are joined by one wireless link per direction, both using
/// the measured delay histogram.
///
/// With the default counts (3, 8) this yields 23 nodes and 23 cables.
pub fn agv_topology_sized(
    agv_end_stations: usize,
    backbone_end_stations: usize,
) -> Result<NetworkGraph> {
    let mut nodes = Vec::new();
    let mut links = Vec::new();
    let mut cable = |links: &mut Vec<LinkSpec>, a: &str, b: &str| {
        links.push(LinkSpec {
            src: a.to_string(),
            dst: b.to_string(),
            kind: ethernet(),
        });
        links.push(LinkSpec {
            src: b.to_string(),
            dst: a.to_string(),
            kind: ethernet(),
        });
    };

    // Device-side partition.
    let agv_switches = ["agv-sw-1", "agv-sw-2"];
    for sw in agv_switches {
        nodes.push(Node {
            name: sw.to_string(),
            role: NodeRole::Bridge,
        });
    }
    nodes.push(Node {
        name: "agv-root".to_string(),
        role: NodeRole::Bridge,
    });
    for i in 0..agv_end_stations {
        let name = format!("agv-es-{}", i + 1);
        nodes.push(Node {
            name: name.clone(),
            role: NodeRole::EndStation,
        });
        let sw = agv_switches[i * agv_switches.len() / agv_end_stations];
        cable(&mut links, &name, sw);
    }
    cable(&mut links, "agv-sw-1", "agv-root");
    cable(&mut links, "agv-sw-2", "agv-root");
    cable(&mut links, "agv-sw-1", "agv-sw-2");

    // Logical 5G bridge.
    nodes.push(Node {
        name: "ds-tt".to_string(),
        role: NodeRole::DsTt,
    });
    nodes.push(Node {
        name: "nw-tt".to_string(),
        role: NodeRole::NwTt,
    });
    cable(&mut links, "agv-root", "ds-tt");
    links.push(LinkSpec {
        src: "ds-tt".to_string(),
        dst: "nw-tt".to_string(),
        kind: LinkKind::Wireless {
            histogram: "uplink".to_string(),
        },
    });
    links.push(LinkSpec {
        src: "nw-tt".to_string(),
        dst: "ds-tt".to_string(),
        kind: LinkKind::Wireless {
            histogram: "downlink".to_string(),
        },
    });

    // Network-side partition.
    for sw in ["bb-root", "bb-sw-l", "bb-sw-r", "bb-sw-l1", "bb-sw-l2", "bb-sw-r1", "bb-sw-r2"] {
        nodes.push(Node {
            name: sw.to_string(),
            role: NodeRole::Bridge,
        });
    }
    cable(&mut links, "nw-tt", "bb-root");
    cable(&mut links, "bb-root", "bb-sw-l");
    cable(&mut links, "bb-root", "bb-sw-r");
    cable(&mut links, "bb-sw-l", "bb-sw-r");
    cable(&mut links, "bb-sw-l", "bb-sw-l1");
    cable(&mut links, "bb-sw-l", "bb-sw-l2");
    cable(&mut links, "bb-sw-r", "bb-sw-r1");
    cable(&mut links, "bb-sw-r", "bb-sw-r2");
    let leaves = ["bb-sw-l1", "bb-sw-l2", "bb-sw-r1", "bb-sw-r2"];
    for i in 0..backbone_end_stations {
        let name = format!("bb-es-{}", i + 1);
        nodes.push(Node {
            name: name.clone(),
            role: NodeRole::EndStation,
        });
        let sw = leaves[i * leaves.len() / backbone_end_stations];
        cable(&mut links, &name, sw);
    }

    let hist = measured_5g_histogram();
    let mut histograms = BTreeMap::new();
    histograms.insert("uplink".to_string(), hist.clone());
    histograms.insert("downlink".to_string(), hist);
    NetworkGraph::build(nodes, links, histograms, 8)
}

/// End stations reachable from each translator without crossing the radio
/// link: `(device side, network side)`, each sorted by node id.
pub fn end_station_partitions(net: &NetworkGraph) -> (Vec<NodeId>, Vec<NodeId>) {
    let side_of = |role: NodeRole| -> Vec<NodeId> {
        let Some(start) = net
            .nodes()
            .iter()
            .position(|n| n.role == role)
            .map(NodeId)
        else {
            return Vec::new();
        };
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(at) = queue.pop_front() {
            for link in net.links() {
                if link.src == at && !link.is_wireless() && seen.insert(link.dst) {
                    queue.push_back(link.dst);
                }
            }
        }
        seen.into_iter()
            .filter(|&id| net.node(id).role == NodeRole::EndStation)
            .collect()
    };
    (side_of(NodeRole::DsTt), side_of(NodeRole::NwTt))
}

/// One class of wireless traffic: `per_direction` streams are generated
/// uplink (device → network) and another `per_direction` downlink.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WirelessClass {
    pub per_direction: usize,
    pub latency_bound: TimeNs,
    pub jitter_bound: TimeNs,
    pub reliability: Rel,
    /// Stream ids are `"{id_prefix}-ul-{i}"` / `"{id_prefix}-dl-{i}"`.
    pub id_prefix: String,
}

/// Everything needed to regenerate an experiment: topology size, traffic
/// mix, QoS grids, seed, and run lengths. Reports embed their spec so any
/// result can be replayed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub agv_end_stations: usize,
    pub backbone_end_stations: usize,
    /// Wired streams generated inside each partition (100 B, 5 ms period,
    /// 500 µs latency, 1 µs jitter, reliability 1).
    pub wired_per_partition: usize,
    /// Wireless traffic, 100 B at a 20 ms period; QoS per class.
    pub wireless: Vec<WirelessClass>,
    /// Reliability requirements swept by the scalability experiment.
    pub reliability_grid: Vec<Rel>,
    /// Jitter allowances swept by the scalability experiment.
    pub jitter_grid: Vec<TimeNs>,
    /// Master seed; all stream sets and simulation runs derive from it.
    pub seed: u64,
    /// Independent stream-set replications (scalability experiment).
    pub replications: usize,
    /// Hypercycles to simulate (reliability experiment).
    pub cycles: u64,
}

const WIRED_PERIOD: TimeNs = TimeNs::from_ms(5);
const WIRELESS_PERIOD: TimeNs = TimeNs::from_ms(20);

impl ScenarioSpec {
    /// The reliability-collapse mix: 5 wired streams per partition, ten
    /// high-criticality wireless streams (20 ms deadline, 100 µs jitter,
    /// 99.99 %) and eighty background wireless streams that only need
    /// every other frame (reliability 0.5), split evenly per direction.
    pub fn reliability_preset(seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            agv_end_stations: 3,
            backbone_end_stations: 8,
            wired_per_partition: 5,
            wireless: vec![
                WirelessClass {
                    per_direction: 5,
                    latency_bound: TimeNs::from_ms(20),
                    jitter_bound: TimeNs::from_us(100),
                    reliability: Rel::new(9_999, 10_000).expect("valid"),
                    id_prefix: "critical".to_string(),
                },
                WirelessClass {
                    per_direction: 40,
                    latency_bound: TimeNs::from_ms(20),
                    jitter_bound: TimeNs::INFINITY,
                    reliability: Rel::new(1, 2).expect("valid"),
                    id_prefix: "background".to_string(),
                },
            ],
            reliability_grid: vec![Rel::new(9_999, 10_000).expect("valid")],
            jitter_grid: vec![TimeNs::from_us(100)],
            seed,
            replications: 1,
            cycles: 10_000,
        }
    }

    /// The schedulability-scaling mix: 15 wired streams per partition and
    /// 200 wireless candidates per direction whose reliability and jitter
    /// are rewritten at every grid point.
    pub fn scalability_preset(seed: u64) -> ScenarioSpec {
        ScenarioSpec {
            agv_end_stations: 3,
            backbone_end_stations: 8,
            wired_per_partition: 15,
            wireless: vec![WirelessClass {
                per_direction: 200,
                latency_bound: TimeNs::from_ms(20),
                jitter_bound: TimeNs::from_us(100),
                reliability: Rel::new(9, 10).expect("valid"),
                id_prefix: "wl".to_string(),
            }],
            reliability_grid: vec![
                Rel::new(9, 10).expect("valid"),
                Rel::new(99, 100).expect("valid"),
                Rel::new(999, 1_000).expect("valid"),
                Rel::new(9_999, 10_000).expect("valid"),
            ],
            jitter_grid: [1, 20, 40, 60, 80, 100]
                .into_iter()
                .map(TimeNs::from_us)
                .collect(),
            seed,
            replications: 10,
            cycles: 0,
        }
    }

    /// Checks the structural invariants every experiment relies on.
    pub fn validate(&self) -> Result<()> {
        let fail = |reason: &str| {
            Err(Error::InvalidFormat {
                reason: format!("scenario: {reason}"),
            })
        };
        if self.reliability_grid.is_empty() {
            return fail("reliability grid is empty");
        }
        if self.jitter_grid.is_empty() {
            return fail("jitter grid is empty");
        }
        if self.replications == 0 {
            return fail("replications must be at least 1");
        }
        let mut prefixes = BTreeSet::new();
        for class in &self.wireless {
            if class.id_prefix.is_empty() || !prefixes.insert(&class.id_prefix) {
                return fail("wireless class prefixes must be unique and non-empty");
            }
        }
        Ok(())
    }
}

/// Derives an independent sub-seed from a master seed and a role path
/// (experiment number, replication index, …) via 64-bit FNV-1a, so every
/// run of an experiment is deterministic in the master seed alone.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |v: u64| {
        for b in v.to_le_bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(master);
    for &p in parts {
        eat(p);
    }
    h
}

/// Generates the scenario's stream set on `net`, deterministically in
/// `seed`: first the wired streams of each partition, then every wireless
/// class, uplink before downlink. Talker/listener pairs are drawn
/// uniformly (wired pairs within one partition, wireless pairs across the
/// bridge), and paths are shortest paths.
///
/// Release offsets are design parameters, not random inputs. Wireless
/// streams all release in phase (phase 0): a radio arrival window spans
/// most of the period at high reliability, so only streams released
/// together can share one — and sharing is what the whole approach is
/// about. Wired streams are staggered deterministically across
/// `[1 ms, 3 ms)` of their 5 ms period, which keeps their tightly
/// jittered frames clear of the wireless release burst at phase 0 and of
/// each other.
pub fn gen_stream_set(
    net: &NetworkGraph,
    spec: &ScenarioSpec,
    seed: u64,
) -> Result<Vec<Stream>> {
    spec.validate()?;
    let (device, network) = end_station_partitions(net);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut streams = Vec::new();

    let mut wired = |rng: &mut ChaCha8Rng,
                     streams: &mut Vec<Stream>,
                     side: &[NodeId],
                     tag: &str|
     -> Result<()> {
        if spec.wired_per_partition > 0 && side.len() < 2 {
            return Err(Error::InvalidNetwork {
                reason: format!(
                    "{tag} partition has {} end stations; wired traffic needs 2",
                    side.len()
                ),
            });
        }
        let stagger = TimeNs::from_ms(2).ns() / spec.wired_per_partition.max(1) as i64;
        for i in 0..spec.wired_per_partition {
            let t = rng.gen_range(0..side.len());
            let mut l = rng.gen_range(0..side.len() - 1);
            if l >= t {
                l += 1;
            }
            streams.push(Stream {
                id: format!("wired-{tag}-{i}"),
                path: net.shortest_path(side[t], side[l])?,
                period: WIRED_PERIOD,
                phase: TimeNs::from_ns(TimeNs::from_ms(1).ns() + i as i64 * stagger),
                size_bytes: 100,
                latency_bound: TimeNs::from_us(500),
                jitter_bound: TimeNs::from_us(1),
                reliability: Rel::new(1, 1).expect("valid"),
                priority: 5,
            });
        }
        Ok(())
    };
    wired(&mut rng, &mut streams, &device, "agv")?;
    wired(&mut rng, &mut streams, &network, "bb")?;

    for class in &spec.wireless {
        if class.per_direction > 0 && (device.is_empty() || network.is_empty()) {
            return Err(Error::InvalidNetwork {
                reason: "wireless traffic needs end stations on both sides".to_string(),
            });
        }
        let mut cross = |rng: &mut ChaCha8Rng,
                         streams: &mut Vec<Stream>,
                         from: &[NodeId],
                         to: &[NodeId],
                         dir: &str|
         -> Result<()> {
            for i in 0..class.per_direction {
                let t = from[rng.gen_range(0..from.len())];
                let l = to[rng.gen_range(0..to.len())];
                streams.push(Stream {
                    id: format!("{}-{dir}-{i}", class.id_prefix),
                    path: net.shortest_path(t, l)?,
                    period: WIRELESS_PERIOD,
                    phase: TimeNs::ZERO,
                    size_bytes: 100,
                    latency_bound: class.latency_bound,
                    jitter_bound: class.jitter_bound,
                    reliability: class.reliability,
                    priority: 5,
                });
            }
            Ok(())
        };
        cross(&mut rng, &mut streams, &device, &network, "ul")?;
        cross(&mut rng, &mut streams, &network, &device, "dl")?;
    }
    Ok(streams)
}

/// Number of wired streams at the front of a generated set.
fn wired_count(spec: &ScenarioSpec) -> usize {
    2 * spec.wired_per_partition
}

/// Delivery statistics of one stream under one scheduling mode.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamOutcome {
    pub id: String,
    /// `"wired"` or the wireless class prefix.
    pub class: String,
    pub required_reliability: Rel,
    pub accepted: bool,
    /// `None` for rejected streams (they are never released).
    pub qos: Option<StreamQos>,
    /// Delivered fraction; 0 for rejected streams.
    pub achieved_reliability: f64,
}

/// One scheduling mode's results in the reliability experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeReliability {
    pub mode: String,
    pub accepted: usize,
    pub rejected: Vec<(String, String)>,
    pub outcomes: Vec<StreamOutcome>,
}

impl ModeReliability {
    /// Outcomes of one class, by prefix (`"wired"` for wired traffic).
    pub fn class<'a>(&'a self, prefix: &'a str) -> impl Iterator<Item = &'a StreamOutcome> + 'a {
        self.outcomes.iter().filter(move |o| o.class == prefix)
    }
}

/// Full result of the reliability experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReliabilityReport {
    pub spec: ScenarioSpec,
    /// Hypercycles simulated per mode.
    pub cycles: u64,
    pub modes: Vec<ModeReliability>,
}

fn class_of(spec: &ScenarioSpec, index: usize) -> String {
    let mut at = wired_count(spec);
    if index < at {
        return "wired".to_string();
    }
    for class in &spec.wireless {
        at += 2 * class.per_direction;
        if index < at {
            return class.id_prefix.clone();
        }
    }
    unreachable!("stream index {index} beyond the generated set")
}

/// Schedules the scenario's traffic mix with the robust scheduler and
/// both scalar baselines, executes each accepted configuration for
/// `spec.cycles` hypercycles under real (unclipped) radio delays, and
/// reports per-stream delivery statistics.
///
/// Simulation is split into up to eight independent runs whose reports
/// merge exactly, so the result is deterministic in `spec.seed` while
/// still using the machine's cores.
pub fn exp_reliability(spec: &ScenarioSpec) -> Result<ReliabilityReport> {
    spec.validate()?;
    let net = agv_topology_sized(spec.agv_end_stations, spec.backbone_end_stations)?;
    let streams = gen_stream_set(&net, spec, derive_seed(spec.seed, &[1]))?;

    let mut modes = Vec::new();
    for (mode_ix, mode) in [ScheduleMode::Fips, ScheduleMode::Med, ScheduleMode::Max]
        .into_iter()
        .enumerate()
    {
        let out = schedule(&net, &streams, mode)?;
        let report = if spec.cycles > 0 {
            let chunks = spec.cycles.min(8);
            let base = spec.cycles / chunks;
            let rem = spec.cycles % chunks;
            let mut seeds: Vec<u64> = (0..chunks)
                .map(|c| derive_seed(spec.seed, &[2, mode_ix as u64, c]))
                .collect();
            let mut cycle_counts = vec![base; chunks as usize];
            if rem > 0 {
                seeds.push(derive_seed(spec.seed, &[2, mode_ix as u64, chunks]));
                cycle_counts.push(rem);
            }
            // `run_replications` shares one cycle count; run the uneven
            // remainder chunk separately and merge.
            let even = run_replications(&net, &streams, &out.config, base, false, &seeds[..chunks as usize])?;
            if rem > 0 {
                let extra =
                    run_replications(&net, &streams, &out.config, rem, false, &seeds[chunks as usize..])?;
                even.merge(&extra)
            } else {
                even
            }
        } else {
            Default::default()
        };

        let outcomes = streams
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let accepted = out.accepted.contains(&i);
                let qos = report.stream(i).cloned();
                let achieved = qos.as_ref().map_or(0.0, StreamQos::delivered_fraction);
                StreamOutcome {
                    id: s.id.clone(),
                    class: class_of(spec, i),
                    required_reliability: s.reliability,
                    accepted,
                    achieved_reliability: if accepted { achieved } else { 0.0 },
                    qos,
                }
            })
            .collect();
        modes.push(ModeReliability {
            mode: mode.as_str().to_string(),
            accepted: out.accepted.len(),
            rejected: out
                .rejected
                .iter()
                .map(|(i, why)| (streams[*i].id.clone(), format!("{why:?}")))
                .collect(),
            outcomes,
        });
    }
    Ok(ReliabilityReport {
        spec: spec.clone(),
        cycles: spec.cycles,
        modes,
    })
}

/// Admission counts at one (reliability, jitter) grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCell {
    pub reliability: Rel,
    pub jitter: TimeNs,
    /// Accepted wireless streams per replication, slot-per-frame mode.
    pub sti: Vec<usize>,
    /// Accepted wireless streams per replication, full interleaving.
    pub fips: Vec<usize>,
}

impl GridCell {
    pub fn sti_mean(&self) -> f64 {
        mean(&self.sti)
    }
    pub fn fips_mean(&self) -> f64 {
        mean(&self.fips)
    }
}

fn mean(xs: &[usize]) -> f64 {
    if xs.is_empty() {
        return 0.0;
    }
    xs.iter().sum::<usize>() as f64 / xs.len() as f64
}

/// Full result of the scalability experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalabilityReport {
    pub spec: ScenarioSpec,
    /// Cells in row-major order: reliability grid outer, jitter grid
    /// inner, matching `spec.reliability_grid` × `spec.jitter_grid`.
    pub cells: Vec<GridCell>,
}

impl ScalabilityReport {
    pub fn cell(&self, reliability: Rel, jitter: TimeNs) -> Option<&GridCell> {
        self.cells
            .iter()
            .find(|c| c.reliability == reliability && c.jitter == jitter)
    }

    /// Flat table for external plotting:
    /// `reliability,jitter_us,replication,sti,fips` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("reliability,jitter_us,replication,sti,fips\n");
        for cell in &self.cells {
            for (r, (s, f)) in cell.sti.iter().zip(&cell.fips).enumerate() {
                out.push_str(&format!(
                    "{},{},{},{},{}\n",
                    cell.reliability.to_f64(),
                    cell.jitter.ns() as f64 / 1_000.0,
                    r,
                    s,
                    f
                ));
            }
        }
        out
    }
}

/// Sweeps the QoS grid: for every replication one stream set is
/// generated, and at every (reliability, jitter) point the wireless
/// streams' QoS is rewritten to the grid point before admission runs in
/// both robust modes. Within a replication the candidate set — paths,
/// phases, admission order — is identical across grid points, so
/// admission counts are comparable along both axes. All grid points and
/// replications run in parallel; each is deterministic in `spec.seed`.
pub fn exp_scalability(spec: &ScenarioSpec) -> Result<ScalabilityReport> {
    use rayon::prelude::*;
    spec.validate()?;
    let net = agv_topology_sized(spec.agv_end_stations, spec.backbone_end_stations)?;
    let base_sets: Vec<Vec<Stream>> = (0..spec.replications)
        .map(|r| gen_stream_set(&net, spec, derive_seed(spec.seed, &[3, r as u64])))
        .collect::<Result<_>>()?;
    let wired = wired_count(spec);

    let mut jobs = Vec::new();
    for (ri, &rel) in spec.reliability_grid.iter().enumerate() {
        for (ji, &jit) in spec.jitter_grid.iter().enumerate() {
            for r in 0..spec.replications {
                for mode in [ScheduleMode::Sti, ScheduleMode::Fips] {
                    jobs.push((ri, ji, r, mode, rel, jit));
                }
            }
        }
    }
    let counts: Vec<((usize, usize, usize, ScheduleMode), usize)> = jobs
        .into_par_iter()
        .map(|(ri, ji, r, mode, rel, jit)| {
            let mut streams = base_sets[r].clone();
            for s in &mut streams[wired..] {
                s.reliability = rel;
                s.jitter_bound = jit;
            }
            let out = schedule(&net, &streams, mode)?;
            let accepted_wireless = out.accepted.iter().filter(|&&i| i >= wired).count();
            Ok(((ri, ji, r, mode), accepted_wireless))
        })
        .collect::<Result<_>>()?;
    let by_key: BTreeMap<_, _> = counts
        .into_iter()
        .map(|((ri, ji, r, mode), n)| ((ri, ji, r, mode as u8), n))
        .collect();

    let mut cells = Vec::new();
    for (ri, &rel) in spec.reliability_grid.iter().enumerate() {
        for (ji, &jit) in spec.jitter_grid.iter().enumerate() {
            let take = |mode: ScheduleMode| -> Vec<usize> {
                (0..spec.replications)
                    .map(|r| by_key[&(ri, ji, r, mode as u8)])
                    .collect()
            };
            cells.push(GridCell {
                reliability: rel,
                jitter: jit,
                sti: take(ScheduleMode::Sti),
                fips: take(ScheduleMode::Fips),
            });
        }
    }
    Ok(ScalabilityReport {
        spec: spec.clone(),
        cells,
    })
}

/// Convenience wrapper: builds the spec's topology and schedules its
/// traffic mix once in the given mode.
pub fn schedule_scenario(spec: &ScenarioSpec, mode: ScheduleMode) -> Result<(NetworkGraph, Vec<Stream>, ScheduleOutcome)> {
    spec.validate()?;
    let net = agv_topology_sized(spec.agv_end_stations, spec.backbone_end_stations)?;
    let streams = gen_stream_set(&net, spec, derive_seed(spec.seed, &[1]))?;
    let out = schedule(&net, &streams, mode)?;
    Ok((net, streams, out))
}

#[cfg(test)]
mod tests;
