//! Probabilistic delay budgets (PDBs).
//!
//! A PDB is the contract between the stochastic 5G link and the otherwise
//! deterministic schedule: a delay interval `[d_min, d_max]` together with
//! the exact probability mass the histogram places inside it. The
//! scheduler treats any in-budget delay as legal, so tighter budgets buy
//! shorter gate windows at the price of reliability.
//!
//! `d_min` is the histogram's lowest support edge — delays below it have
//! zero probability, and PSFP uses it to police too-early arrivals.
//! `d_max` is the smallest upper bin edge whose cumulative probability
//! mass reaches the stream's required reliability; this is the unique
//! minimal choice, so budgets are as tight as the histogram's resolution
//! allows.

use crate::model::{DelayHistogram, LinkKind, NetworkGraph, PortId};
use crate::rel::{cum_reaches, Mass, Rel};
use crate::time::{Interval, TimeNs};
use crate::Error;

/// A probabilistic delay budget: the delay interval a schedule reserves
/// for one stream on one link, plus the exact mass it covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pdb {
    /// Reserved delay interval `[d_min, d_max]`.
    pub interval: Interval,
    /// Exact probability mass the histogram places in the interval.
    /// `1` for deterministic (Ethernet) links.
    pub achieved_mass: Mass,
}

impl Pdb {
    /// Budget of a deterministic delay: a degenerate interval with mass 1.
    pub fn deterministic(d: TimeNs) -> Pdb {
        Pdb {
            interval: Interval::degenerate(d),
            achieved_mass: Mass::new(1, 1),
        }
    }

    pub fn d_min(&self) -> TimeNs {
        self.interval.lo
    }

    pub fn d_max(&self) -> TimeNs {
        self.interval.hi
    }
}

/// Computes the tightest delay budget covering `reliability` of the
/// histogram's mass.
///
/// The lower bound is the histogram's first support edge. The upper bound
/// is the smallest bin upper edge at which the cumulative count mass
/// reaches `reliability·total` — compared in exact integer arithmetic, so
/// targets like `0.9999` are never missed by a rounding error. Fails with
/// [`Error::UnreachableReliability`] when even the full histogram mass
/// (`count_sum / total`) is below the target.
pub fn allocate_pdb(hist: &DelayHistogram, reliability: Rel) -> Result<Pdb, Error> {
    let total = hist.total();
    for (i, bin) in hist.bins().iter().enumerate() {
        if cum_reaches(hist.cumulative(i), total, reliability) {
            return Ok(Pdb {
                interval: Interval::new(hist.support().lo, bin.up),
                achieved_mass: hist.cumulative_mass(i),
            });
        }
    }
    Err(Error::UnreachableReliability {
        requested: format!("{reliability}"),
        available: format!(
            "{}/{}",
            hist.count_sum(),
            total
        ),
    })
}

/// Scalar delay summaries used by the baseline schedulers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarStat {
    /// Median: the smallest upper bin edge covering half the mass.
    Median,
    /// Maximum: the histogram's upper support edge.
    Maximum,
}

/// Reduces a histogram to a single scalar delay.
///
/// The median is the 0.5-quantile under the same exact-arithmetic rule as
/// [`allocate_pdb`]; the maximum is the upper support edge.
pub fn scalar_delay(hist: &DelayHistogram, stat: ScalarStat) -> TimeNs {
    match stat {
        ScalarStat::Median => {
            let half = Rel::new(1, 2).expect("1/2 is a valid reliability");
            allocate_pdb(hist, half)
                .expect("a histogram with nonzero counts always covers half its count mass or errs on total; medians use total = sum")
                .interval
                .hi
        }
        ScalarStat::Maximum => hist.support().hi,
    }
}

/// Delay budget for one stream on one directed link: exact and degenerate
/// on Ethernet, reliability-dependent on the 5G link.
pub fn pdb_for_link(
    network: &NetworkGraph,
    port: PortId,
    size_bytes: u32,
    reliability: Rel,
) -> Result<Pdb, Error> {
    let link = network.link(port);
    match &link.kind {
        LinkKind::Ethernet { .. } => {
            let d = crate::model::ethernet_delay(link, size_bytes)?;
            Ok(Pdb {
                interval: d,
                achieved_mass: Mass::new(1, 1),
            })
        }
        LinkKind::Wireless { .. } => {
            let hist = network
                .histogram_for(port)
                .expect("wireless links resolve their histogram at build time");
            allocate_pdb(hist, reliability)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::HistBin;
    use proptest::prelude::*;

    /// A small contiguous histogram with hand-checkable quantiles:
    /// bins [0,1) ms ×10, [1,2) ms ×80, [2,3) ms ×10.
    fn simple_hist() -> DelayHistogram {
        let ms = TimeNs::from_ms;
        DelayHistogram::new(
            vec![
                HistBin { low: ms(0), up: ms(1), count: 10 },
                HistBin { low: ms(1), up: ms(2), count: 80 },
                HistBin { low: ms(2), up: ms(3), count: 10 },
            ],
            None,
        )
        .unwrap()
    }

    #[test]
    fn quantiles_of_a_simple_histogram() {
        let h = simple_hist();
        let ms = TimeNs::from_ms;
        let at = |num, den| allocate_pdb(&h, Rel::new(num, den).unwrap()).unwrap();

        // 10% of the mass sits exactly at the first bin edge.
        let p = at(1, 10);
        assert_eq!(p.interval, Interval::new(ms(0), ms(1)));
        assert_eq!(p.achieved_mass, Mass::new(10, 100));

        // Anything above 10% and up to 90% needs the second bin.
        let p = at(11, 100);
        assert_eq!(p.interval.hi, ms(2));
        assert_eq!(p.achieved_mass, Mass::new(90, 100));
        let p = at(9, 10);
        assert_eq!(p.interval.hi, ms(2));

        // Beyond 90% needs the full support.
        let p = at(901, 1000);
        assert_eq!(p.interval.hi, ms(3));
        assert_eq!(p.achieved_mass, Mass::new(1, 1));
        let p = allocate_pdb(&h, Rel::one()).unwrap();
        assert_eq!(p.interval, Interval::new(ms(0), ms(3)));
    }

    #[test]
    fn median_and_maximum_scalars() {
        let h = simple_hist();
        assert_eq!(scalar_delay(&h, ScalarStat::Median), TimeNs::from_ms(2));
        assert_eq!(scalar_delay(&h, ScalarStat::Maximum), TimeNs::from_ms(3));
    }

    #[test]
    fn declared_total_larger_than_counts_limits_reachable_reliability() {
        let ms = TimeNs::from_ms;
        // 90 counted frames out of a declared 100: 10% of the mass is
        // "missing" (lost frames beyond the histogram's support).
        let h = DelayHistogram::new(
            vec![HistBin { low: ms(1), up: ms(2), count: 90 }],
            Some(100),
        )
        .unwrap();
        let p = allocate_pdb(&h, Rel::new(9, 10).unwrap()).unwrap();
        assert_eq!(p.achieved_mass, Mass::new(90, 100));
        let err = allocate_pdb(&h, Rel::new(91, 100).unwrap()).unwrap_err();
        assert!(matches!(err, Error::UnreachableReliability { .. }));
    }

    /// The measured 5G uplink histogram shipped with the crate, loaded
    /// through the same embedded asset the evaluation harness uses.
    fn measured_hist() -> DelayHistogram {
        crate::harness::measured_5g_histogram()
    }

    #[test]
    fn measured_histogram_shape() {
        let h = measured_hist();
        assert_eq!(h.bins().len(), 99);
        assert_eq!(h.count_sum(), 99_999);
        assert_eq!(h.total(), 99_999);
        assert_eq!(h.support().lo, TimeNs::from_ns(3_803_000));
        assert_eq!(h.support().hi, TimeNs::from_ns(14_000_000));
        // Uniform 103 µs bin width.
        for b in h.bins() {
            assert_eq!(b.up - b.low, TimeNs::from_ns(103_000));
        }
    }

    /// Frozen quantiles of the measured histogram, computed independently
    /// with exact rational arithmetic from the published bin densities.
    #[test]
    fn measured_histogram_quantiles() {
        let h = measured_hist();
        let ns = TimeNs::from_ns;
        let cases: &[(u64, u64, i64, u64)] = &[
            // (rel num, rel den, expected d_max ns, achieved mass numerator /99999)
            (9, 10, 7_717_000, 93_034),
            (99, 100, 9_983_000, 99_054),
            (999, 1000, 11_734_000, 99_926),
            (9999, 10_000, 13_176_000, 99_990),
            (1, 2, 6_481_000, 51_573),
            (1, 1, 14_000_000, 99_999),
        ];
        for &(num, den, dmax, mass_num) in cases {
            let p = allocate_pdb(&h, Rel::new(num, den).unwrap()).unwrap();
            assert_eq!(p.interval.lo, ns(3_803_000), "d_min at rel {num}/{den}");
            assert_eq!(p.interval.hi, ns(dmax), "d_max at rel {num}/{den}");
            assert_eq!(
                p.achieved_mass,
                Mass::new(mass_num, 99_999),
                "achieved mass at rel {num}/{den}"
            );
        }
    }

    #[test]
    fn budgets_complete_in_microseconds() {
        // Per-budget cost must be trivial: allocate thousands in well under
        // a second even in debug builds.
        let h = measured_hist();
        let rels: Vec<Rel> = (1..=9999).map(|i| Rel::new(i, 10_000).unwrap()).collect();
        let t0 = std::time::Instant::now();
        let mut acc = 0i64;
        for r in &rels {
            acc = acc.wrapping_add(allocate_pdb(&h, *r).unwrap().interval.hi.ns());
        }
        let elapsed = t0.elapsed();
        assert!(acc != 0);
        assert!(
            elapsed < std::time::Duration::from_secs(1),
            "9999 budgets took {elapsed:?}"
        );
    }

    fn arb_hist() -> impl Strategy<Value = DelayHistogram> {
        (
            proptest::collection::vec(0u64..50, 1..20),
            1i64..=1000,
            0i64..=1000,
        )
            .prop_filter_map("need nonzero mass", |(counts, width_us, start_us)| {
                if counts.iter().all(|&c| c == 0) {
                    return None;
                }
                let mut bins = Vec::new();
                let mut low = TimeNs::from_us(start_us);
                for c in counts {
                    let up = low + TimeNs::from_us(width_us);
                    bins.push(HistBin { low, up, count: c });
                    low = up;
                }
                Some(DelayHistogram::new(bins, None).unwrap())
            })
    }

    proptest! {
        /// d_max is monotone in the reliability target.
        #[test]
        fn budget_is_monotone_in_reliability(
            h in arb_hist(),
            a in 1u64..=1000,
            b in 1u64..=1000,
        ) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let pa = allocate_pdb(&h, Rel::new(lo, 1000).unwrap()).unwrap();
            let pb = allocate_pdb(&h, Rel::new(hi, 1000).unwrap()).unwrap();
            prop_assert!(pa.interval.hi <= pb.interval.hi);
            prop_assert!(pa.achieved_mass <= pb.achieved_mass);
            prop_assert_eq!(pa.interval.lo, pb.interval.lo);
        }

        /// The achieved mass really is at least the target, and the budget
        /// is minimal: one bin tighter would miss the target.
        #[test]
        fn budget_mass_reaches_target_minimally(
            h in arb_hist(),
            num in 1u64..=1000,
        ) {
            let rel = Rel::new(num, 1000).unwrap();
            let p = allocate_pdb(&h, rel).unwrap();
            prop_assert!(p.achieved_mass >= rel.as_ratio());
            prop_assert!(p.interval.lo == h.support().lo);
            prop_assert!(p.interval.hi <= h.support().hi);
            // Minimality: find the bin ending at d_max; the previous bin's
            // cumulative mass must be below the target.
            let idx = h
                .bins()
                .iter()
                .position(|b| b.up == p.interval.hi)
                .expect("d_max is a bin edge");
            if idx > 0 {
                prop_assert!(
                    Mass::new(h.cumulative(idx - 1), h.total()) < rel.as_ratio(),
                    "budget is not minimal"
                );
            }
        }

        /// Samples always fall inside the full-reliability budget.
        #[test]
        fn samples_fall_inside_the_full_budget(h in arb_hist(), seed in 0u64..1000) {
            use rand::SeedableRng;
            let p = allocate_pdb(&h, Rel::one()).unwrap();
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..64 {
                let d = h.sample(&mut rng);
                prop_assert!(p.interval.contains(d));
            }
        }
    }
}
