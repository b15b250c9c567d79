//! Equilibrium classification and existence tests for joint and sequential
//! investment equilibria, plus the analysis of the delayed-construction
//! real-estate model.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interval::{Interval, IntervalSet};
use crate::model::{
    beta_roots, from_grenadier, Firm, GrenadierParams, PawlinaKortParams,
};
use crate::payoff::{Duopoly, PreemptionRegion, ThresholdSet};
use crate::stopping::{two_sided_leader_region, TwoSidedKind, TwoSidedRegion};
use crate::threshold::{serde_inf, Threshold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SegmentLabel {
    NoInvestment,
    PreemptionStop,
    Leader1Invests,
    SimultaneousInvestment,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    #[serde(flatten)]
    pub interval: Interval,
    pub label: SegmentLabel,
}

/// Where firm 1's leader problem sits relative to the preemption region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionCase {
    /// No preemption region.
    EmptyP,
    /// Nonempty region reaching up to firm 1's monopoly threshold.
    ConnectedP,
    /// Monopoly threshold above the region; firm 1 is squeezed between the
    /// region and firm 2's follower threshold.
    DetachedP,
}

/// Outcome when both firms' rules say invest at the same state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TieRule {
    /// Inside the preemption region both firms get follower values; at its
    /// boundary, where firm 2 is indifferent, firm 1 leads; elsewhere both
    /// invest simultaneously.
    PreemptionFollowerPayoffs,
    SimultaneousPayoffs,
}

/// Markov strategies as "invest whenever the state lies in this set".
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateStrategyPair {
    pub firm1: IntervalSet,
    pub firm2: IntervalSet,
    pub tie: TieRule,
}

impl CandidateStrategyPair {
    pub fn rule(&self, f: Firm) -> &IntervalSet {
        match f {
            Firm::One => &self.firm1,
            Firm::Two => &self.firm2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub case: RegionCase,
    pub segments: Vec<Segment>,
    /// Firm 1's investment region.
    pub leader_rule: IntervalSet,
    /// Firm 2's investment region.
    pub firm2_rule: IntervalSet,
    pub preemption: PreemptionRegion,
    pub thresholds: ThresholdSet,
    pub beta1: f64,
    /// Firm 1's squeezed leader problem above the region, if it arises.
    pub two_sided: Option<TwoSidedRegion>,
    /// True when the rival's entry leaves a non-investor's revenue unchanged,
    /// which rules out delayed joint investment and makes this equilibrium
    /// the only one. False means uniqueness is not asserted.
    pub unique: bool,
}

impl EquilibriumReport {
    pub fn candidate(&self) -> CandidateStrategyPair {
        CandidateStrategyPair {
            firm1: self.leader_rule.clone(),
            firm2: self.firm2_rule.clone(),
            tie: TieRule::PreemptionFollowerPayoffs,
        }
    }

    pub fn label_at(&self, x: f64) -> Option<SegmentLabel> {
        self.segments
            .iter()
            .find(|s| s.interval.contains(x))
            .map(|s| s.label)
    }
}

fn push(segs: &mut Vec<Segment>, interval: Interval, label: SegmentLabel) {
    if !interval.is_empty() {
        segs.push(Segment { interval, label });
    }
}

pub fn classify(duo: &Duopoly) -> Result<EquilibriumReport> {
    use SegmentLabel::*;
    let th = *duo.thresholds();
    let region = duo.preemption_region()?;
    let xf2 = th.x_f2;
    let xl1 = th.x_l1;
    let mut segs = Vec::new();
    let mut two_sided = None;
    let simultaneous = xf2.finite().map(Interval::from);

    let (case, firm1, firm2) = match region.bounds() {
        None => {
            let start = xl1.min(xf2);
            match start {
                Threshold::Finite(s) => {
                    push(&mut segs, Interval::open(0.0, start), NoInvestment);
                    push(&mut segs, Interval::closed_open(s, xf2), Leader1Invests);
                }
                Threshold::Infinite => push(&mut segs, Interval::open(0.0, start), NoInvestment),
            }
            let f1 = start.finite().map(Interval::from);
            (
                RegionCase::EmptyP,
                IntervalSet::new(f1),
                IntervalSet::new(simultaneous),
            )
        }
        Some((lo, up)) => {
            let preempt = match up {
                Threshold::Finite(u) if up < xf2 => Interval::closed(lo, u),
                _ => Interval::closed_open(lo, up),
            };
            let above = Interval::open(up.value(), xf2);
            let f2 = IntervalSet::new([Some(preempt), simultaneous].into_iter().flatten());
            if xl1 <= up {
                let w = xl1.value().min(lo);
                push(&mut segs, Interval::open(0.0, Threshold::Finite(w)), NoInvestment);
                push(&mut segs, Interval::closed_open(w, Threshold::Finite(lo)), Leader1Invests);
                push(&mut segs, preempt, PreemptionStop);
                if up.is_finite() {
                    push(&mut segs, above, Leader1Invests);
                }
                (RegionCase::ConnectedP, IntervalSet::new([Interval::from(w)]), f2)
            } else {
                push(&mut segs, Interval::open(0.0, Threshold::Finite(lo)), NoInvestment);
                push(&mut segs, preempt, PreemptionStop);
                let u = up.value();
                let mut f1 = vec![preempt];
                if up < xf2 {
                    let m = duo.model();
                    let (s0, sl) = (m.s0(Firm::One), m.s_l(Firm::One));
                    let d = sl.a - s0.a;
                    let cost = (s0.b - sl.b) / duo.gbm().r;
                    let ts = two_sided_leader_region(duo.gbm(), d, cost, u, xf2)?;
                    match ts.kind {
                        TwoSidedKind::InvestEverywhere => {
                            push(&mut segs, above, Leader1Invests);
                            f1.push(Interval::open(u, Threshold::Infinite));
                        }
                        TwoSidedKind::InteriorThreshold => {
                            let xh = ts.x_hat.expect("interior threshold");
                            push(&mut segs, Interval::open(u, Threshold::Finite(xh)), NoInvestment);
                            push(&mut segs, Interval::closed_open(xh, xf2), Leader1Invests);
                            f1.push(Interval::from(xh));
                        }
                        TwoSidedKind::WaitUntilExit => {
                            push(&mut segs, above, NoInvestment);
                            f1.extend(simultaneous);
                        }
                    }
                    two_sided = Some(ts);
                } else {
                    f1.extend(simultaneous);
                }
                (RegionCase::DetachedP, IntervalSet::new(f1), f2)
            }
        }
    };
    if let Some(s) = simultaneous {
        push(&mut segs, s, SimultaneousInvestment);
    }
    Ok(EquilibriumReport {
        case,
        segments: segs,
        leader_rule: firm1,
        firm2_rule: firm2,
        preemption: region,
        thresholds: th,
        beta1: duo.beta1(),
        two_sided,
        unique: duo.model().is_market_entry(),
    })
}

pub fn classify_spe(p: &PawlinaKortParams) -> Result<EquilibriumReport> {
    classify(&Duopoly::from_pawlina_kort(p)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExistenceVerdict {
    pub exists: bool,
    pub binding_condition: String,
    /// Signed slack of the deciding inequality; nonnegative iff it holds.
    #[serde(with = "serde_inf")]
    pub margin: f64,
}

fn verdict(binding: &str, margin: f64) -> ExistenceVerdict {
    ExistenceVerdict {
        exists: margin >= 0.0,
        binding_condition: binding.to_owned(),
        margin,
    }
}

fn pos(v: f64) -> f64 {
    v.max(0.0)
}

/// Left side of the joint-investment condition: with `rho = I2/I1`,
/// `lam = xJ/xL1` and `q = (D11-D00)/(D10-D00)`,
/// `rho^(b-1) [1 + lam^-b (b - 1 - lam b q)]`.
pub fn joint_condition_lhs(p: &PawlinaKortParams, beta1: f64, x_j: Threshold, x_l1: f64) -> f64 {
    let b = beta1;
    let rho = p.i2 / p.i1;
    let q = (p.d11 - p.d00) / (p.d10 - p.d00);
    let bracket = match x_j {
        Threshold::Infinite => 1.0,
        Threshold::Finite(xj) => {
            let lam = xj / x_l1;
            1.0 + lam.powf(-b) * (b - 1.0 - lam * b * q)
        }
    };
    rho.powf(b - 1.0) * bracket
}

/// `b (D10-D11)/(D10-D00) * ((D11-D01)^+/(D10-D00))^(b-1)`.
pub fn joint_condition_rhs(p: &PawlinaKortParams, beta1: f64) -> f64 {
    let den = p.d10 - p.d00;
    beta1 * (p.d10 - p.d11) / den * (pos(p.d11 - p.d01) / den).powf(beta1 - 1.0)
}

/// Joint investment triggered when the state first reaches `x_j`.
pub fn joint_equilibrium(p: &PawlinaKortParams, x_j: Threshold) -> Result<ExistenceVerdict> {
    let duo = Duopoly::from_pawlina_kort(p)?;
    let th = duo.thresholds();
    if th.x_m1 < th.x_f2 {
        return Err(Error::PremiseViolated(format!(
            "joint investment needs xM1 >= xF2, got xM1={} xF2={}",
            th.x_m1, th.x_f2
        )));
    }
    if x_j < th.x_f2 || x_j > th.x_m1 {
        return Err(Error::InvalidThreshold(format!(
            "xJ={x_j} outside [xF2, xM1] = [{}, {}]",
            th.x_f2, th.x_m1
        )));
    }
    if th.x_l1 >= th.x_f2 {
        return Ok(verdict("xL1>=xF2", th.x_l1.value() - th.x_f2.value()));
    }
    let b = duo.beta1();
    let xl1 = th.x_l1.value();
    let lhs = joint_condition_lhs(p, b, x_j, xl1);
    let rhs = joint_condition_rhs(p, b);
    Ok(verdict("joint_cost_ratio_bound", rhs - lhs))
}

/// `(b-1) rho + rho^(1-b) s^b` with `s = (D11-D01)^+/(D10-D00)`.
pub fn sequential_condition_lhs(p: &PawlinaKortParams, beta1: f64) -> f64 {
    let b = beta1;
    let rho = p.i2 / p.i1;
    let s = pos(p.d11 - p.d01) / (p.d10 - p.d00);
    (b - 1.0) * rho + rho.powf(1.0 - b) * s.powf(b)
}

/// `b [(D10-D01)/(D10-D00) - (D10-D11)/(D10-D00) s^(b-1)]`.
pub fn sequential_condition_rhs(p: &PawlinaKortParams, beta1: f64) -> f64 {
    let den = p.d10 - p.d00;
    let s = pos(p.d11 - p.d01) / den;
    beta1 * ((p.d10 - p.d01) / den - (p.d10 - p.d11) / den * s.powf(beta1 - 1.0))
}

/// Firm 1 invests at its monopoly threshold and firm 2 follows at its
/// follower threshold.
pub fn sequential_equilibrium(p: &PawlinaKortParams) -> Result<ExistenceVerdict> {
    let duo = Duopoly::from_pawlina_kort(p)?;
    let th = duo.thresholds();
    if th.x_l1 >= th.x_f2 {
        return Err(Error::NotApplicable(format!(
            "sequential investment needs xL1 < xF2, got xL1={} xF2={}",
            th.x_l1, th.x_f2
        )));
    }
    if th.x_l1 >= th.x_f1 {
        return Ok(verdict("xL1>=xF1", th.x_l1.value() - th.x_f1.value()));
    }
    let b = duo.beta1();
    Ok(verdict(
        "sequential_cost_ratio_bound",
        sequential_condition_lhs(p, b) - sequential_condition_rhs(p, b),
    ))
}

/// States above `xF2` where joint investment is an equilibrium but waiting
/// would pay more, so joint investment and waiting can alternate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointInterval {
    pub lo: f64,
    pub hi: Threshold,
}

pub fn inefficient_joint_intervals(p: &PawlinaKortParams) -> Result<Option<JointInterval>> {
    let th = Duopoly::from_pawlina_kort(p)?.thresholds().to_owned();
    let Threshold::Finite(xf2) = th.x_f2 else {
        return Ok(None);
    };
    let gain = p.d11 - p.d00;
    if gain <= 0.0 {
        return Ok(Some(JointInterval {
            lo: xf2,
            hi: Threshold::Infinite,
        }));
    }
    let hi = p.r * p.i1 / gain;
    Ok((gain * xf2 < p.r * p.i1).then_some(JointInterval {
        lo: xf2,
        hi: Threshold::Finite(hi),
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrenadierReport {
    pub beta1: f64,
    pub x_f: Threshold,
    pub x_l: Threshold,
    pub x_delta: Threshold,
    pub x_m: Threshold,
    pub preemption: PreemptionRegion,
    /// Investment cannot be delayed anywhere above `x_f`.
    pub no_delay: bool,
    /// `D2 e^{-(r-mu) delta} x_f - (r I + R)`.
    #[serde(with = "serde_inf")]
    pub no_delay_margin: f64,
    /// `(rI/R + 1)(1 - (b-1)/(b(r-mu)))`, the bound as usually quoted.
    #[serde(with = "serde_inf")]
    pub gamma_bound_printed: f64,
    /// `(rI/R + 1)(1 - (b-1) r/(b(r-mu)))`, derived from the no-delay test.
    #[serde(with = "serde_inf")]
    pub gamma_bound_derived: f64,
    pub printed_form_agrees: bool,
    /// Leader problem between `x_f` and `x_m` when delay is possible.
    pub delay_problem: Option<TwoSidedRegion>,
    /// `(x_f, x_hat)`: states from which preemption happens only once demand
    /// falls back to `x_f`.
    pub falling_demand_zone: Option<(f64, f64)>,
    /// Joint investment at `x_m` instead of preemption.
    pub joint_avoidance: ExistenceVerdict,
    #[serde(with = "serde_inf")]
    pub joint_bound_monopoly: f64,
    #[serde(with = "serde_inf")]
    pub joint_bound_deviation: f64,
}

/// `(rI/R + 1) f`, taking the limit `R -> 0` explicitly.
fn rent_scaled(p: &GrenadierParams, f: f64) -> f64 {
    if f == 0.0 {
        0.0
    } else if p.rent == 0.0 {
        f.signum() * f64::INFINITY
    } else {
        (p.r * p.cost / p.rent + 1.0) * f
    }
}

pub fn grenadier_analysis(p: &GrenadierParams) -> Result<GrenadierReport> {
    let duo = Duopoly::new(from_grenadier(p)?)?;
    let th = *duo.thresholds();
    let b = beta_roots(&p.gbm())?.beta1;
    let k = p.r - p.mu;
    let e = p.delay_factor();
    let x_f = th.x_f1;
    let big_r = p.r * p.cost + p.rent;

    let no_delay_margin = p.d2 * e * x_f.value() - big_r;
    let no_delay = no_delay_margin >= 0.0;
    let gamma_bound_printed = rent_scaled(p, 1.0 - (b - 1.0) / (b * k));
    let gamma_bound_derived = rent_scaled(p, 1.0 - (b - 1.0) * p.r / (b * k));
    let printed_form_agrees = (p.gamma <= gamma_bound_printed) == no_delay;

    let (delay_problem, falling_demand_zone) = if no_delay {
        (None, None)
    } else {
        let ts = two_sided_leader_region(
            &p.gbm(),
            p.d2 * e,
            p.cost + p.rent / p.r,
            x_f.value(),
            th.x_m1,
        )?;
        let zone = match ts.kind {
            TwoSidedKind::InteriorThreshold => ts.x_hat.map(|xh| (x_f.value(), xh)),
            TwoSidedKind::WaitUntilExit => Some((x_f.value(), th.x_m1.value())),
            TwoSidedKind::InvestEverywhere => None,
        };
        (Some(ts), zone)
    };

    let joint_bound_monopoly = rent_scaled(p, 1.0 - p.d2 / p.d1);
    let f2 = if p.d1 == p.d2 {
        // The deviation bound tends to 1 - 1 = 0 as D2 -> D1.
        0.0
    } else {
        let ratio = b * (p.d1 - p.d2) / (p.d1.powf(b) - p.d2.powf(b));
        1.0 - p.d2 * ratio.powf(1.0 / (b - 1.0))
    };
    let joint_bound_deviation = rent_scaled(p, f2);
    let (binding, bound) = if joint_bound_monopoly <= joint_bound_deviation {
        ("xL>=xF", joint_bound_monopoly)
    } else {
        ("joint_erosion_bound", joint_bound_deviation)
    };

    Ok(GrenadierReport {
        beta1: b,
        x_f,
        x_l: th.x_l1,
        x_delta: th.x_delta2,
        x_m: th.x_m1,
        preemption: duo.preemption_region()?,
        no_delay,
        no_delay_margin,
        gamma_bound_printed,
        gamma_bound_derived,
        printed_form_agrees,
        delay_problem,
        falling_demand_zone,
        joint_avoidance: verdict(binding, p.gamma - bound),
        joint_bound_monopoly,
        joint_bound_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::from_pawlina_kort;
    use crate::stopping::perpetuity_value;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

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

    fn box_case(c: f64, d: f64, rho: f64) -> PawlinaKortParams {
        PawlinaKortParams {
            r: 0.08,
            mu: 0.02,
            sigma: 0.2,
            d00: 1.0 - d,
            d01: 0.0,
            d10: 1.0 + c,
            d11: 1.0,
            i1: 1000.0,
            i2: 1000.0 * rho,
        }
    }

    fn gren() -> GrenadierParams {
        GrenadierParams {
            r: 0.08,
            mu: 0.02,
            sigma: 0.2,
            delta: 0.0,
            rent: 0.08,
            gamma: 0.5,
            cost: 1.0,
            d1: 2.0,
            d2: 1.0,
        }
    }

    fn assert_partition(rep: &EquilibriumReport) {
        let s = &rep.segments;
        assert_eq!(s[0].interval.lo, 0.0);
        assert!(!s[0].interval.lo_closed);
        for w in s.windows(2) {
            let (a, b) = (w[0].interval, w[1].interval);
            assert_eq!(a.hi, Threshold::Finite(b.lo), "{s:?}");
            assert!(a.hi_closed != b.lo_closed, "{s:?}");
        }
        assert_eq!(s.last().unwrap().interval.hi, Threshold::Infinite);
    }

    #[test]
    fn growth_case_is_connected_and_unique() {
        let rep = classify_spe(&growth_case()).unwrap();
        assert_eq!(rep.case, RegionCase::ConnectedP);
        assert!(rep.unique);
        assert_partition(&rep);
        let lo = rep.preemption.lower.unwrap();
        assert_eq!(rep.label_at(lo * 0.99), Some(SegmentLabel::NoInvestment));
        assert_eq!(rep.label_at(lo * 1.01), Some(SegmentLabel::PreemptionStop));
        assert_eq!(rep.label_at(0.2), Some(SegmentLabel::SimultaneousInvestment));
        assert!(rep.leader_rule.contains(0.03) && rep.firm2_rule.contains(0.03));
        assert!(!rep.leader_rule.contains(0.02));
        let sim = rep.segments.last().unwrap();
        assert_eq!(sim.label, SegmentLabel::SimultaneousInvestment);
        assert_eq!(Threshold::Finite(sim.interval.lo), rep.thresholds.x_f2);
    }

    #[test]
    fn no_leader_gain_is_empty_case() {
        let mut p = growth_case();
        p.d10 = 1.0;
        let rep = classify_spe(&p).unwrap();
        assert_eq!(rep.case, RegionCase::EmptyP);
        assert_partition(&rep);
        let start = rep.thresholds.x_l1.min(rep.thresholds.x_f2).value();
        assert_eq!(rep.leader_rule.pieces()[0].lo, start);
    }

    #[test]
    fn box_case_instance_is_detached() {
        let rep = classify_spe(&box_case(0.5, 0.1, 1.2)).unwrap();
        assert_eq!(rep.case, RegionCase::DetachedP);
        assert_partition(&rep);
        let ts = rep.two_sided.as_ref().unwrap();
        // x_hat = 144.44 lies above xF2 = 144.
        assert_eq!(ts.kind, TwoSidedKind::WaitUntilExit);
        assert_eq!(rep.label_at(130.0), Some(SegmentLabel::NoInvestment));
        assert!(!rep.unique);
    }

    #[test]
    fn detached_with_interior_threshold() {
        let rep = classify_spe(&box_case(0.5, 0.2, 1.2)).unwrap();
        assert_eq!(rep.case, RegionCase::DetachedP);
        assert_partition(&rep);
        let ts = rep.two_sided.as_ref().unwrap();
        assert_eq!(ts.kind, TwoSidedKind::InteriorThreshold);
        let xh = ts.x_hat.unwrap();
        assert_relative_eq!(xh, 115.02491451374433, epsilon = 1e-7);
        assert!(xh < rep.thresholds.x_l1.value());
        assert_eq!(rep.label_at(xh), Some(SegmentLabel::Leader1Invests));
        assert!(rep.leader_rule.contains(xh) && !rep.firm2_rule.contains(xh));
    }

    #[test]
    fn joint_verdicts() {
        // D10 <= D00.
        let mut p = box_case(0.5, 0.1, 1.2);
        p.d00 = 1.5;
        p.d01 = 0.0;
        let th = Duopoly::from_pawlina_kort(&p).unwrap().thresholds().to_owned();
        let v = joint_equilibrium(&p, th.x_f2).unwrap();
        assert!(v.exists);
        assert_eq!(v.binding_condition, "xL1>=xF2");

        let p = box_case(0.45, 0.6, crate::payoff::boundary_cost_ratio(2.0, 0.45));
        let th = Duopoly::from_pawlina_kort(&p).unwrap().thresholds().to_owned();
        let v = joint_equilibrium(&p, th.x_m1).unwrap();
        assert!(!v.exists, "{v:?}");

        assert!(matches!(
            joint_equilibrium(&p, Threshold::Finite(th.x_f2.value() * 0.5)),
            Err(Error::InvalidThreshold(_))
        ));
        // d = 0.05 and rho = 1.2 put xM1 = 2400 above xF2 = 144; with
        // D11 <= D00 instead xM1 is infinite. Lower xM1 below xF2:
        let mut q = box_case(0.5, 0.9, 1.9);
        q.d00 = 0.1;
        let tq = Duopoly::from_pawlina_kort(&q).unwrap().thresholds().to_owned();
        assert!(tq.x_m1 < tq.x_f2);
        assert!(matches!(joint_equilibrium(&q, tq.x_f2), Err(Error::PremiseViolated(_))));
    }

    // Joint test through values: firm 1 prefers waiting for xJ to leading
    // at xL1 exactly when the closed-form condition holds.
    fn joint_by_values(p: &PawlinaKortParams, xj: f64) -> f64 {
        let m = from_pawlina_kort(p).unwrap();
        let duo = Duopoly::new(m).unwrap();
        let g = *duo.gbm();
        let x = duo.thresholds().x_l1.value();
        let s0 = m.s0(Firm::One);
        let sb = m.s_b(Firm::One);
        let joint = perpetuity_value(&s0, &g, x)
            + (x / xj).powf(duo.beta1()) * (perpetuity_value(&sb, &g, xj) - perpetuity_value(&s0, &g, xj));
        duo.leader_value(Firm::One, x) - joint
    }

    #[test]
    fn joint_condition_matches_value_comparison() {
        for (c, d, rho) in [(0.45, 0.6, 1.2), (0.3, 0.6, 1.1), (1.0, 0.3, 1.5), (0.2, 0.2, 1.02)] {
            let p = box_case(c, d, rho);
            let th = Duopoly::from_pawlina_kort(&p).unwrap().thresholds().to_owned();
            if th.x_m1 < th.x_f2 || th.x_l1 >= th.x_f2 {
                continue;
            }
            for t in [0.0, 0.5, 1.0] {
                let xj = th.x_f2.value() + t * (th.x_m1.value() - th.x_f2.value());
                let v = joint_equilibrium(&p, Threshold::Finite(xj)).unwrap();
                assert_eq!(v.exists, joint_by_values(&p, xj) <= 0.0, "c={c} d={d} rho={rho} xj={xj}");
            }
        }
    }

    #[test]
    fn growth_case_has_no_sequential_equilibrium() {
        let p = growth_case();
        let v = sequential_equilibrium(&p).unwrap();
        assert!(!v.exists);
        let duo = Duopoly::from_pawlina_kort(&p).unwrap();
        assert!(duo.preemption_region().unwrap().contains(duo.thresholds().x_l1.value()));
    }

    #[test]
    fn sequential_first_branch_and_premise() {
        // D10 - D00 = 0.9 <= D11 - D01 = 1 with xL1 = 133 < xF2 = 144.
        let p = box_case(0.5, 0.4, 1.2);
        let v = sequential_equilibrium(&p).unwrap();
        assert!(v.exists);
        assert_eq!(v.binding_condition, "xL1>=xF1");

        let mut q = growth_case();
        q.d00 = 2.0;
        assert!(matches!(sequential_equilibrium(&q), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn inefficient_intervals() {
        let p = box_case(0.5, 0.1, 1.2);
        let iv = inefficient_joint_intervals(&p).unwrap().unwrap();
        assert_relative_eq!(iv.lo, 144.0, epsilon = 1e-9);
        assert_relative_eq!(iv.hi.value(), 800.0, epsilon = 1e-9);
        let mut q = p;
        q.d00 = 1.0;
        assert_eq!(inefficient_joint_intervals(&q).unwrap().unwrap().hi, Threshold::Infinite);
        assert!(inefficient_joint_intervals(&growth_case()).unwrap().is_none());
    }

    #[test]
    fn grenadier_worked_example() {
        let rep = grenadier_analysis(&gren()).unwrap();
        assert_relative_eq!(rep.beta1, 2.0, epsilon = 1e-12);
        assert_relative_eq!(rep.x_f.value(), 0.18, epsilon = 1e-12);
        assert_relative_eq!(rep.x_l.value(), 0.12, epsilon = 1e-12);
        assert_relative_eq!(rep.x_delta.value(), 0.09, epsilon = 1e-12);
        assert_relative_eq!(rep.x_m.value(), 0.24, epsilon = 1e-12);
        assert!(rep.no_delay);
        assert_relative_eq!(rep.no_delay_margin, 0.02, epsilon = 1e-12);
        assert!(!rep.joint_avoidance.exists);
        assert_relative_eq!(rep.joint_bound_monopoly, 1.0, epsilon = 1e-12);
        assert_relative_eq!(rep.joint_bound_deviation, 2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(rep.gamma_bound_derived, 2.0 / 3.0, epsilon = 1e-12);
        assert!(rep.gamma_bound_printed < 0.0);
        assert!(!rep.printed_form_agrees);
        assert!(!rep.preemption.empty);
    }

    #[test]
    fn grenadier_delay_possible_with_high_erosion() {
        let rep = grenadier_analysis(&GrenadierParams { gamma: 0.9, ..gren() }).unwrap();
        assert!(!rep.no_delay);
        let (lo, hi) = rep.falling_demand_zone.unwrap();
        assert_eq!(lo, rep.x_f.value());
        assert!(hi > lo && hi < rep.x_m.value());
        assert!(rep.joint_avoidance.exists);
    }

    #[test]
    fn grenadier_equal_rents_have_no_region() {
        let rep = grenadier_analysis(&GrenadierParams { d2: 2.0, ..gren() }).unwrap();
        assert!(rep.preemption.empty);
    }

    proptest! {
        #[test]
        fn grenadier_identities_and_no_erosion(
            delta in 0.0f64..3.0, rent in 0.01f64..0.5, cost in 0.2f64..3.0,
            d2 in 0.2f64..2.0, dd in 0.0f64..2.0, sigma in 0.05f64..0.5,
        ) {
            let p = GrenadierParams { r: 0.08, mu: 0.02, sigma, delta, rent, gamma: 0.0, cost, d1: d2 + dd, d2 };
            let rep = grenadier_analysis(&p).unwrap();
            let rel = |a: f64, b: f64| ((a - b) / b).abs();
            prop_assert!(rel(rep.x_delta.value() * p.d1, rep.x_f.value() * p.d2) < 1e-12);
            prop_assert!(rel(rep.x_m.value() * p.d2, rep.x_l.value() * p.d1) < 1e-12);
            prop_assert_eq!(rep.preemption.empty, dd == 0.0);
            prop_assert!(rep.no_delay);
            prop_assert!(rep.gamma_bound_derived > 0.0);
        }

        #[test]
        fn sequential_condition_agrees_with_region(
            c in 0.05f64..1.5, d in 0.02f64..0.9, t in 0.0f64..1.0, sigma in 0.1f64..0.4,
        ) {
            let base = box_case(c, d, 1.0);
            let b = beta_roots(&base.gbm()).unwrap().beta1;
            let rho = 1.0 + t * (crate::payoff::boundary_cost_ratio(b, c) * 1.2 - 1.0);
            let p = PawlinaKortParams { sigma, i2: 1000.0 * rho, ..base };
            let duo = Duopoly::from_pawlina_kort(&p).unwrap();
            if let Ok(v) = sequential_equilibrium(&p) {
                let xl1 = duo.thresholds().x_l1.value();
                let inside = duo.preemption_region().unwrap().contains(xl1);
                if v.margin.abs() > 1e-9 {
                    prop_assert_eq!(v.exists, !inside);
                }
            }
        }
    }
}
