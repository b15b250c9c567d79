//! Brute-force checks of the closed forms: binomial-lattice optimal
//! stopping, a one-shot deviation check of candidate equilibria on the
//! lattice, and Monte Carlo estimation of strategy payoffs.

pub mod deviation;
pub mod lattice;
pub mod monte_carlo;

use crate::equilibrium::{CandidateStrategyPair, TieRule};
use crate::error::Result;
use crate::interval::IntervalSet;
use crate::model::Firm;
use crate::payoff::{Duopoly, PreemptionRegion};
use crate::stopping::exit_discounts;
use crate::threshold::Threshold;

pub use deviation::{
    default_eps, delayed_entry, one_shot_deviation_check, Deviation, DeviationReport, Violation,
};
pub use lattice::{lattice_stopping, Feasible, LatticeSpec, LatticeStop};
pub use monte_carlo::{monte_carlo_payoff, monte_carlo_switch, McEstimate, McSpec};

/// Closed-form values to both firms of playing `cand` from state `x`.
pub fn candidate_values(duo: &Duopoly, cand: &CandidateStrategyPair, x: f64) -> Result<[f64; 2]> {
    Outcomes::new(duo, cand)?.value(x)
}

/// Outcome payoffs of a candidate strategy pair at each state.
pub(crate) struct Outcomes<'a> {
    pub duo: &'a Duopoly,
    pub cand: &'a CandidateStrategyPair,
    pub region: PreemptionRegion,
    edges: Vec<f64>,
}

fn same(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

impl<'a> Outcomes<'a> {
    pub fn new(duo: &'a Duopoly, cand: &'a CandidateStrategyPair) -> Result<Self> {
        let region = duo.preemption_region()?;
        let stop_set = IntervalSet::new(
            cand.firm1
                .pieces()
                .iter()
                .chain(cand.firm2.pieces())
                .copied(),
        );
        let edges = stop_set.endpoints();
        Ok(Outcomes {
            duo,
            cand,
            region,
            edges,
        })
    }

    /// Values when both firms invest at `x`.
    pub fn tie(&self, x: f64) -> [f64; 2] {
        let d = self.duo;
        match self.cand.tie {
            TieRule::PreemptionFollowerPayoffs if self.region.contains(x) => {
                [d.follower_value(Firm::One, x), d.follower_value(Firm::Two, x)]
            }
            _ => [
                d.simultaneous_value(Firm::One, x),
                d.simultaneous_value(Firm::Two, x),
            ],
        }
    }

    fn at_region_edge(&self, x: f64) -> bool {
        match self.region.bounds() {
            Some((lo, up)) => {
                (same(x, lo) || up.finite().is_some_and(|u| same(x, u)))
                    && Threshold::Finite(x) < self.duo.thresholds().x_f2
            }
            None => false,
        }
    }

    /// Payoffs at state `x` where the rules are read at `probe`; `None` if
    /// neither firm invests. Reading the rules elsewhere lets a boundary
    /// point of an open stopping set be valued from the inside.
    pub fn payoff_probed(&self, x: f64, probe: f64) -> Option<[f64; 2]> {
        let d = self.duo;
        let a1 = self.cand.firm1.contains(probe);
        let a2 = self.cand.firm2.contains(probe);
        let lead = |f: Firm| -> [f64; 2] {
            let mut v = [0.0; 2];
            v[f.idx()] = d.leader_value(f, x);
            v[f.other().idx()] = d.follower_value(f.other(), x);
            v
        };
        match (a1, a2) {
            (true, true) => {
                if self.cand.tie == TieRule::PreemptionFollowerPayoffs && self.at_region_edge(x) {
                    // Firm 2 is indifferent here, so firm 1 leads.
                    Some(lead(Firm::One))
                } else {
                    Some(self.tie(x))
                }
            }
            (true, false) => Some(lead(Firm::One)),
            (false, true) => Some(lead(Firm::Two)),
            (false, false) => None,
        }
    }

    pub fn payoff(&self, x: f64) -> Option<[f64; 2]> {
        self.payoff_probed(x, x)
    }

    /// Payoff on first reaching the stopping-set edge `edge` from `from`.
    pub fn payoff_entering(&self, edge: f64, from: f64) -> [f64; 2] {
        let probe = if from < edge {
            edge * (1.0 + 1e-12)
        } else {
            edge * (1.0 - 1e-12)
        };
        self.payoff(edge)
            .or_else(|| self.payoff_probed(edge, probe))
            .expect("edge of the stopping set")
    }

    /// The gap of the stopping set around a continuation state `x`, as
    /// `(lower edge, upper edge)`, each absent if unbounded.
    pub fn gap(&self, x: f64) -> (Option<f64>, Option<f64>) {
        let lo = self.edges.iter().rev().find(|&&e| e < x).copied();
        let hi = self.edges.iter().find(|&&e| e > x).copied();
        (lo, hi)
    }

    /// Value of the candidate from continuation state `x`: the waiting
    /// streams until the stopping set is entered, then the outcome payoffs.
    pub fn continuation_value(&self, x: f64) -> Result<[f64; 2]> {
        let d = self.duo;
        let (lo, hi) = self.gap(x);
        let (wl, wh) = exit_discounts(d.gbm(), x, lo, hi)?;
        let mut v = [0.0; 2];
        for f in Firm::BOTH {
            let i = f.idx();
            let mut val = d.waiting_stream_value(f, x);
            if let Some(l) = lo {
                val += wl * (self.payoff_entering(l, x)[i] - d.waiting_stream_value(f, l));
            }
            if let Some(h) = hi {
                val += wh * (self.payoff_entering(h, x)[i] - d.waiting_stream_value(f, h));
            }
            v[i] = val;
        }
        Ok(v)
    }

    /// Candidate value at any state.
    pub fn value(&self, x: f64) -> Result<[f64; 2]> {
        match self.payoff(x) {
            Some(p) => Ok(p),
            None => self.continuation_value(x),
        }
    }
}
