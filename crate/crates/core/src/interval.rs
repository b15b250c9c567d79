//! Intervals of the state axis and finite unions of them.

use serde::Serialize;

use crate::threshold::Threshold;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: Threshold,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    /// `[lo, hi)`.
    pub fn closed_open(lo: f64, hi: Threshold) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: false,
        }
    }

    /// `[lo, hi]`.
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi: Threshold::Finite(hi),
            lo_closed: true,
            hi_closed: true,
        }
    }

    /// `(lo, hi)`.
    pub fn open(lo: f64, hi: Threshold) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: false,
            hi_closed: false,
        }
    }

    /// `[lo, inf)`.
    pub fn from(lo: f64) -> Self {
        Self::closed_open(lo, Threshold::Infinite)
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = match self.hi {
            Threshold::Infinite => true,
            Threshold::Finite(h) if self.hi_closed => x <= h,
            Threshold::Finite(h) => x < h,
        };
        above && below
    }

    pub fn is_empty(&self) -> bool {
        match self.hi {
            Threshold::Infinite => false,
            Threshold::Finite(h) => h < self.lo || (h == self.lo && !(self.lo_closed && self.hi_closed)),
        }
    }

    /// Finite endpoints, where a rule can switch between acting and waiting.
    pub fn endpoints(&self) -> impl Iterator<Item = f64> {
        [Some(self.lo), self.hi.finite()]
            .into_iter()
            .flatten()
            .filter(|v| *v > 0.0)
    }
}

/// Sorted union of disjoint intervals. Empty pieces are dropped and
/// touching pieces merged.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
#[serde(transparent)]
pub struct IntervalSet(Vec<Interval>);

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet(Vec::new())
    }

    pub fn new(pieces: impl IntoIterator<Item = Interval>) -> Self {
        let mut v: Vec<Interval> = pieces.into_iter().filter(|i| !i.is_empty()).collect();
        v.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        let mut out: Vec<Interval> = Vec::with_capacity(v.len());
        for i in v {
            if let Some(last) = out.last_mut() {
                let touches = match last.hi {
                    Threshold::Infinite => true,
                    Threshold::Finite(h) => i.lo < h || (i.lo == h && (last.hi_closed || i.lo_closed)),
                };
                if touches {
                    if i.hi > last.hi || (i.hi == last.hi && i.hi_closed) {
                        last.hi = i.hi;
                        last.hi_closed = i.hi_closed;
                    }
                    continue;
                }
            }
            out.push(i);
        }
        IntervalSet(out)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.0.iter().any(|i| i.contains(x))
    }

    pub fn pieces(&self) -> &[Interval] {
        &self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn endpoints(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.0.iter().flat_map(Interval::endpoints).collect();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    }
}
