//! One-shot deviation check of a candidate Markov equilibrium on the
//! lattice.
//!
//! Each firm's candidate value is computed at every node by backward
//! induction; then at every node each firm's single-period deviation
//! (invest now instead of waiting, or wait one period instead of investing)
//! is priced against it.

use serde::Serialize;

use crate::equilibrium::{CandidateStrategyPair, EquilibriumReport};
use crate::interval::IntervalSet;
use crate::error::Result;
use crate::model::Firm;
use crate::oracle::lattice::{Lattice, LatticeSpec};
use crate::oracle::Outcomes;
use crate::payoff::Duopoly;
use crate::threshold::Threshold;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Deviation {
    InvestNow,
    WaitOneStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub step: usize,
    pub x: f64,
    pub firm: Firm,
    pub deviation: Deviation,
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviationReport {
    pub eps: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub checked_nodes: usize,
    /// Largest deviation gain seen for each firm (may be negative).
    pub worst_gain: [f64; 2],
    /// Candidate values at the root node.
    pub value_x0: [f64; 2],
    pub violations: Vec<Violation>,
}

impl DeviationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Default tolerance `10 dt r S`, with `S` the largest capitalized stream
/// intercept `|b|/r` of the model.
pub fn default_eps(duo: &Duopoly, dt: f64) -> f64 {
    10.0 * dt * duo.gbm().r * duo.model().cost_scale()
}

/// The candidate with every investment interval that starts at the lower
/// end of the preemption region moved up by `factor`.
pub fn delayed_entry(rep: &EquilibriumReport, factor: f64) -> CandidateStrategyPair {
    let mut cand = rep.candidate();
    let Some((lo, _)) = rep.preemption.bounds() else {
        return cand;
    };
    let shift = |set: &IntervalSet| {
        IntervalSet::new(set.pieces().iter().filter_map(|p| {
            let mut p = *p;
            if (p.lo - lo).abs() <= 1e-12 * lo {
                p.lo = lo * factor;
                p.lo_closed = true;
            }
            (!p.is_empty()).then_some(p)
        }))
    };
    cand.firm1 = shift(&cand.firm1);
    cand.firm2 = shift(&cand.firm2);
    cand
}

// Per-node data, indexed by exponent m + n.
struct Node {
    x: f64,
    act: [bool; 2],
    pay: Option<[f64; 2]>,
    leader: [f64; 2],
    follower: [f64; 2],
    tie: [f64; 2],
    flow: [f64; 2],
    lead_flow: [f64; 2],
}

pub fn one_shot_deviation_check(
    spec: &LatticeSpec,
    duo: &Duopoly,
    cand: &CandidateStrategyPair,
    eps: Option<f64>,
) -> Result<DeviationReport> {
    let lat = Lattice::new(*spec, *duo.gbm())?;
    let out = Outcomes::new(duo, cand)?;
    let eps = eps.unwrap_or_else(|| default_eps(duo, lat.dt));
    let n = lat.n();
    let m = duo.model();

    let nodes: Vec<Node> = lat
        .nodes()
        .into_iter()
        .map(|x| {
            let both = |f: &dyn Fn(Firm) -> f64| [f(Firm::One), f(Firm::Two)];
            Node {
                x,
                act: [cand.firm1.contains(x), cand.firm2.contains(x)],
                pay: out.payoff(x),
                leader: both(&|f| duo.leader_value(f, x)),
                follower: both(&|f| duo.follower_value(f, x)),
                tie: out.tie(x),
                flow: both(&|f| lat.flow(&m.s0(f), x)),
                lead_flow: both(&|f| {
                    let s = if Threshold::Finite(x) < duo.thresholds().x_f(f.other()) {
                        m.s_l(f)
                    } else {
                        m.s_b(f)
                    };
                    lat.flow(&s, x)
                }),
            }
        })
        .collect();

    // A move from a waiting node into the stopping set crosses an edge of
    // that set first. Returns the crossed edge and the payoffs there.
    let crossed = |x: f64, y: f64| -> Option<(f64, [f64; 2])> {
        let (lo, hi) = out.gap(x);
        match (lo, hi) {
            (_, Some(h)) if y >= h => Some((h, out.payoff_entering(h, x))),
            (Some(l), _) if y <= l => Some((l, out.payoff_entering(l, x))),
            _ => None,
        }
    };

    let mut v: Vec<[f64; 2]> = (0..=n)
        .map(|j| out.value(nodes[2 * j].x))
        .collect::<Result<_>>()?;

    let (p, q) = (lat.p_up, 1.0 - lat.p_up);
    let mut worst = [f64::NEG_INFINITY; 2];
    let mut violations = Vec::new();
    let mut checked = 0;
    let mut cont = vec![[0.0; 2]; n + 1];
    let mut edge = vec![None; n + 1];
    // Where each node's children were valued: `None` for the node itself,
    // otherwise the edge it was snapped to.
    let mut kids: Vec<(Option<f64>, Option<f64>)> = vec![(None, None); n + 1];
    for k in (0..n).rev() {
        for j in 0..=k {
            let idx = 2 * j + n - k;
            let nd = &nodes[idx];
            let (mut up_v, mut dn_v) = (v[j + 1], v[j]);
            edge[j] = None;
            kids[j] = (None, None);
            if nd.pay.is_none() {
                let up = crossed(nd.x, nodes[idx + 1].x);
                let dn = crossed(nd.x, nodes[idx - 1].x);
                if let Some((e, val)) = up {
                    up_v = val;
                    edge[j] = Some((e, val));
                    kids[j].0 = Some(e);
                }
                if let Some((e, val)) = dn {
                    dn_v = val;
                    kids[j].1 = Some(e);
                    // Crossing on both sides leaves nothing to interpolate.
                    edge[j] = if up.is_some() { None } else { Some((e, val)) };
                }
            }
            cont[j] = [0, 1].map(|i| nd.flow[i] + lat.disc * (p * up_v[i] + q * dn_v[i]));
        }
        // Snapping a crossed child onto the edge is first-order in the node
        // spacing. Next to an edge, interpolate in log-state between the
        // edge payoff and the next waiting node inward instead.
        let snapped = cont.clone();
        for j in 0..=k {
            let Some((e, val)) = edge[j] else { continue };
            let x = nodes[2 * j + n - k].x;
            let inner = if e > x { j.checked_sub(1) } else { Some(j + 1).filter(|&i| i <= k) };
            let Some(i) = inner else { continue };
            let xi = nodes[2 * i + n - k].x;
            if nodes[2 * i + n - k].pay.is_some() || edge[i].is_some() || out.gap(xi) != out.gap(x) {
                continue;
            }
            let w = (e / x).ln() / (e / xi).ln();
            cont[j] = [0, 1].map(|f| val[f] + (snapped[i][f] - val[f]) * w);
        }
        let cont_v = &cont;
        for j in 0..=k {
            let idx = 2 * j + n - k;
            let nd = &nodes[idx];
            // Both sides of each comparison are priced one step ahead from
            // the same child states. Kinks of the leader and candidate
            // values then cancel instead of showing up as O(sqrt(dt)) gains.
            let cont = snapped[j];
            let lead_at = |y: Option<f64>, node: usize| match y {
                Some(e) => Firm::BOTH.map(|f| duo.leader_value(f, e)),
                None => nodes[node].leader,
            };
            let (lu, ld) = (lead_at(kids[j].0, idx + 1), lead_at(kids[j].1, idx - 1));
            let lead = [0, 1].map(|i| nd.lead_flow[i] + lat.disc * (p * lu[i] + q * ld[i]));
            let mut gains = [(0.0, Deviation::InvestNow); 2];
            for i in 0..2 {
                let o = 1 - i;
                gains[i] = match (nd.act[i], nd.act[o]) {
                    (false, false) => (lead[i] - cont[i], Deviation::InvestNow),
                    (true, false) => (cont[i] - lead[i], Deviation::WaitOneStep),
                    (false, true) => (nd.tie[i] - nd.follower[i], Deviation::InvestNow),
                    (true, true) => {
                        let pay = nd.pay.expect("both invest");
                        (nd.follower[i] - pay[i], Deviation::WaitOneStep)
                    }
                };
            }
            for (i, f) in Firm::BOTH.into_iter().enumerate() {
                let (g, dev) = gains[i];
                worst[i] = worst[i].max(g);
                if g > eps {
                    violations.push(Violation {
                        step: k,
                        x: nd.x,
                        firm: f,
                        deviation: dev,
                        gain: g,
                    });
                }
            }
            checked += 1;
            v[j] = nd.pay.unwrap_or(cont_v[j]);
        }
    }
    violations.sort_by(|a, b| b.gain.total_cmp(&a.gain));
    Ok(DeviationReport {
        eps,
        dt: lat.dt,
        n_steps: n,
        checked_nodes: checked,
        worst_gain: worst,
        value_x0: v[0],
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::{classify, TieRule};
    use crate::interval::Interval;
    use crate::model::PawlinaKortParams;

    fn growth_case() -> PawlinaKortParams {
        PawlinaKortParams {
            r: 0.1,
            mu: 0.08,
            sigma: 0.2,
            d00: 0.0,
            d01: 0.0,
            d10: 2.5,
            d11: 1.0,
            i1: 1.0,
            i2: 1.0,
        }
    }

    #[test]
    fn equilibrium_candidate_passes() {
        let duo = Duopoly::from_pawlina_kort(&growth_case()).unwrap();
        let rep = classify(&duo).unwrap();
        let spec = LatticeSpec::new(1000, 62.5, 0.02);
        let res = one_shot_deviation_check(&spec, &duo, &rep.candidate(), None).unwrap();
        assert!(res.passed(), "{:?}", &res.violations[..3.min(res.violations.len())]);
        assert_eq!(res.checked_nodes, 1000 * 1001 / 2);
    }

    #[test]
    fn never_investing_is_refuted() {
        let duo = Duopoly::from_pawlina_kort(&growth_case()).unwrap();
        let cand = CandidateStrategyPair {
            firm1: IntervalSet::empty(),
            firm2: IntervalSet::empty(),
            tie: TieRule::PreemptionFollowerPayoffs,
        };
        let spec = LatticeSpec::new(500, 62.5, 0.04);
        let res = one_shot_deviation_check(&spec, &duo, &cand, None).unwrap();
        assert!(!res.passed());
        let xl1 = duo.thresholds().x_l1.value();
        assert!(res.violations.iter().any(|v| v.x > xl1 && v.deviation == Deviation::InvestNow));
    }

    #[test]
    fn delayed_entry_is_refuted() {
        let duo = Duopoly::from_pawlina_kort(&growth_case()).unwrap();
        let lo = duo.preemption_region().unwrap().lower.unwrap();
        let rule = IntervalSet::new([Interval::from(lo * 1.1)]);
        let cand = CandidateStrategyPair {
            firm1: rule.clone(),
            firm2: rule,
            tie: TieRule::PreemptionFollowerPayoffs,
        };
        let spec = LatticeSpec::new(2000, 62.5, 0.02);
        let res = one_shot_deviation_check(&spec, &duo, &cand, None).unwrap();
        assert!(!res.passed());
        // The profitable deviation is pre-empting inside the skipped band.
        let v = res.violations[0];
        assert_eq!(v.deviation, Deviation::InvestNow);
        assert!(v.x > lo && v.x < lo * 1.1, "{v:?}");
    }
}
