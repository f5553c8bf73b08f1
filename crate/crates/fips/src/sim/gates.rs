//! Gate state of one egress port.
//!
//! The scheduled queue's 802.1Qbv gate is open during any configured
//! window and the whole pattern repeats every hypercycle. Transmissions
//! are not tied to "their" window at runtime — the hardware only sees
//! the union of open intervals — so feasibility questions reduce to:
//! does a transmission of a given duration fit into the union, starting
//! no earlier than some instant?
//!
//! A transmission fits at `t` if the gate is open from `t` until the
//! transmission completes. Instantaneous hand-offs (the radio hop, which
//! serializes off-port) additionally must start strictly before a close
//! edge: a frame arriving exactly as a window closes must not slip
//! through on the edge.

use crate::time::TimeNs;

/// Union of a port's gate windows over one hypercycle, queryable at any
/// absolute time.
#[derive(Debug, Clone)]
pub(crate) struct GateSet {
    hyper: i64,
    /// Open spans over `[0, 2·hyper)`: the merged one-cycle spans plus
    /// their images one hypercycle later, re-merged so a window that
    /// wraps the cycle boundary appears contiguous.
    spans: Vec<(i64, i64)>,
    /// The union covers the entire cycle; the gate never closes.
    always_open: bool,
}

impl GateSet {
    pub fn new(hyper: TimeNs, windows: impl IntoIterator<Item = crate::time::Interval>) -> GateSet {
        let h = hyper.ns();
        assert!(h > 0, "hypercycle must be positive");
        let mut base: Vec<(i64, i64)> = Vec::new();
        let mut always_open = false;
        for w in windows {
            let width = (w.hi - w.lo).ns();
            if width <= 0 {
                // A zero-width window admits nothing.
                continue;
            }
            if width >= h {
                always_open = true;
                break;
            }
            let lo = w.lo.ns().rem_euclid(h);
            if lo + width <= h {
                base.push((lo, lo + width));
            } else {
                base.push((lo, h));
                base.push((0, lo + width - h));
            }
        }
        if !always_open {
            base = merge(base);
            always_open = base.as_slice() == [(0, h)];
        }
        let spans = if always_open {
            vec![(0, 2 * h)]
        } else {
            let mut two: Vec<(i64, i64)> = base.clone();
            two.extend(base.iter().map(|&(a, b)| (a + h, b + h)));
            merge(two)
        };
        GateSet {
            hyper: h,
            spans,
            always_open,
        }
    }

    /// A gate with no windows at all: nothing ever fits.
    #[cfg(test)]
    pub fn closed(hyper: TimeNs) -> GateSet {
        GateSet::new(hyper, std::iter::empty())
    }

    #[cfg(test)]
    pub fn is_always_open(&self) -> bool {
        self.always_open
    }

    /// Whether a transmission starting at `t` with duration `dur` lies
    /// inside one open span of the (cyclic) union.
    pub fn fits(&self, t: TimeNs, dur: TimeNs) -> bool {
        if self.always_open {
            return true;
        }
        let d = dur.ns();
        let x = t.ns().rem_euclid(self.hyper);
        self.spans
            .iter()
            .any(|&(a, b)| a <= x && x + d <= b && (d > 0 || x < b))
    }

    /// Earliest `t' >= from` at which a transmission of duration `dur`
    /// fits, or `None` if no window of the union can ever hold it.
    pub fn next_fit(&self, from: TimeNs, dur: TimeNs) -> Option<TimeNs> {
        let d = dur.ns();
        if self.always_open {
            return if d <= self.hyper * 2 { Some(from) } else { None };
        }
        let x = from.ns().rem_euclid(self.hyper);
        let cycle_base = from.ns() - x;
        // The doubled span list covers every candidate start in
        // `[x, x + hyper]`; if a window fits `dur` at all, its image in
        // the second cycle starts after `x`, so a miss here is a miss
        // forever.
        for &(a, b) in &self.spans {
            let start = x.max(a);
            if start + d <= b && (d > 0 || start < b) {
                return Some(TimeNs::from_ns(cycle_base + start));
            }
        }
        None
    }
}

/// Sorts spans and coalesces overlapping or abutting ones.
fn merge(mut spans: Vec<(i64, i64)>) -> Vec<(i64, i64)> {
    spans.sort_unstable();
    let mut out: Vec<(i64, i64)> = Vec::with_capacity(spans.len());
    for (a, b) in spans {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::time::Interval;

    fn ms(v: i64) -> TimeNs {
        TimeNs::from_ms(v)
    }

    fn ns(v: i64) -> TimeNs {
        TimeNs::from_ns(v)
    }

    #[test]
    fn windows_merge_and_repeat_each_cycle() {
        let g = GateSet::new(
            ms(20),
            [Interval::new(ms(2), ms(4)), Interval::new(ms(4), ms(5))],
        );
        assert!(g.fits(ms(2), ms(3)), "abutting windows form one span");
        assert!(!g.fits(ms(2), ns(3_000_001)));
        assert_eq!(g.next_fit(ms(0), ms(1)), Some(ms(2)));
        // Same pattern one hypercycle later.
        assert_eq!(g.next_fit(ms(20), ms(1)), Some(ms(22)));
        assert_eq!(g.next_fit(ms(26), ms(1)), Some(ms(42)));
    }

    #[test]
    fn windows_crossing_the_cycle_boundary_stay_contiguous() {
        // [19, 21] ms under a 20 ms cycle opens [19, 20) and [0, 1).
        let g = GateSet::new(ms(20), [Interval::new(ms(19), ms(21))]);
        assert!(g.fits(ns(19_500_000), ms(1)), "fit may span the wrap point");
        assert!(g.fits(ms(40), ms(1)));
        assert_eq!(g.next_fit(ms(2), ms(1)), Some(ms(19)));
        assert_eq!(g.next_fit(ns(19_700_000), ms(1)), Some(ns(19_700_000)));
        assert!(!g.fits(ms(1), ns(1)), "the wrapped tail still closes at 1 ms");
    }

    #[test]
    fn instantaneous_fits_need_strictly_open_gates() {
        let g = GateSet::new(ms(20), [Interval::new(ms(5), ms(10))]);
        assert!(g.fits(ms(5), TimeNs::ZERO));
        assert!(g.fits(ns(9_999_999), TimeNs::ZERO));
        // Exactly at the close edge the gate no longer passes anything.
        assert!(!g.fits(ms(10), TimeNs::ZERO));
        assert_eq!(g.next_fit(ms(10), TimeNs::ZERO), Some(ms(25)));
    }

    #[test]
    fn full_cycle_coverage_never_closes() {
        let g = GateSet::new(ms(10), [Interval::new(ms(0), ms(10))]);
        assert!(g.is_always_open());
        assert!(g.fits(ms(12), ms(7)));
        assert_eq!(g.next_fit(ns(123), ms(3)), Some(ns(123)));
        // Two half-cycle windows meeting at the boundary do the same.
        let g = GateSet::new(ms(10), [Interval::new(ms(5), ms(10)), Interval::new(ms(10), ms(15))]);
        assert!(g.is_always_open());
    }

    #[test]
    fn oversized_transmissions_never_fit() {
        let g = GateSet::new(ms(20), [Interval::new(ms(2), ms(4))]);
        assert_eq!(g.next_fit(ms(0), ms(3)), None);
        let empty = GateSet::closed(ms(20));
        assert_eq!(empty.next_fit(ms(0), TimeNs::ZERO), None);
        assert!(!empty.fits(ms(0), TimeNs::ZERO));
    }

    #[test]
    fn negative_times_reduce_into_the_cycle() {
        let g = GateSet::new(ms(20), [Interval::new(ms(2), ms(4))]);
        // -18 ms is 2 ms into the previous cycle.
        assert!(g.fits(ms(-18), ms(1)));
        assert_eq!(g.next_fit(ms(-20), ms(1)), Some(ms(-18)));
    }
}
