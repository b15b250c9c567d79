//! Leader, follower and simultaneous-investment values as functions of the
//! current state, the closed-form thresholds, and the preemption region.
//!
//! Values are "from now on" values given that nobody has invested yet; the
//! revenue accrued before the current state is common to all outcomes and
//! dropped.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    beta_roots, from_pawlina_kort, AffineStream, AffineStreamModel, Firm, GbmParams,
    PawlinaKortParams,
};
use crate::root::{bisect, X_TOL};
use crate::stopping::{perpetuity_value, switch_threshold, SwitchProblem};
use crate::threshold::Threshold;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdSet {
    #[serde(rename = "xF1")]
    pub x_f1: Threshold,
    #[serde(rename = "xF2")]
    pub x_f2: Threshold,
    #[serde(rename = "xL1")]
    pub x_l1: Threshold,
    #[serde(rename = "xL2")]
    pub x_l2: Threshold,
    #[serde(rename = "xM1")]
    pub x_m1: Threshold,
    #[serde(rename = "xDelta2")]
    pub x_delta2: Threshold,
}

impl ThresholdSet {
    pub fn x_f(&self, f: Firm) -> Threshold {
        match f {
            Firm::One => self.x_f1,
            Firm::Two => self.x_f2,
        }
    }

    pub fn x_l(&self, f: Firm) -> Threshold {
        match f {
            Firm::One => self.x_l1,
            Firm::Two => self.x_l2,
        }
    }
}

/// Switch problems behind each threshold.
pub struct SwitchSet {
    pub follower: [SwitchProblem; 2],
    pub monopoly: [SwitchProblem; 2],
    pub joint1: SwitchProblem,
    pub delta2: SwitchProblem,
}

pub fn switch_problems(m: &AffineStreamModel) -> Result<SwitchSet> {
    let g = *m.gbm();
    let sp = |from, to| SwitchProblem::new(from, to, g);
    let (one, two) = (Firm::One, Firm::Two);
    Ok(SwitchSet {
        follower: [sp(m.s_f(one), m.s_b(one))?, sp(m.s_f(two), m.s_b(two))?],
        monopoly: [sp(m.s0(one), m.s_l(one))?, sp(m.s0(two), m.s_l(two))?],
        joint1: sp(m.s0(one), m.s_b(one))?,
        delta2: sp(m.s_f(two), m.s_l(two))?,
    })
}

pub fn thresholds(m: &AffineStreamModel) -> Result<ThresholdSet> {
    let s = switch_problems(m)?;
    Ok(ThresholdSet {
        x_f1: switch_threshold(&s.follower[0]),
        x_f2: switch_threshold(&s.follower[1]),
        x_l1: switch_threshold(&s.monopoly[0]),
        x_l2: switch_threshold(&s.monopoly[1]),
        x_m1: switch_threshold(&s.joint1),
        x_delta2: switch_threshold(&s.delta2),
    })
}

pub fn thresholds_pk(p: &PawlinaKortParams) -> Result<ThresholdSet> {
    thresholds(&from_pawlina_kort(p)?)
}

/// `(L2 > F2)` holds exactly on the open interval `(lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PreemptionRegion {
    pub empty: bool,
    pub lower: Option<f64>,
    pub upper: Option<Threshold>,
}

impl PreemptionRegion {
    pub const EMPTY: PreemptionRegion = PreemptionRegion {
        empty: true,
        lower: None,
        upper: None,
    };

    /// Open-interval membership; endpoints are outside.
    pub fn contains(&self, x: f64) -> bool {
        match (self.lower, self.upper) {
            (Some(lo), Some(up)) => x > lo && Threshold::Finite(x) < up,
            _ => false,
        }
    }

    pub fn bounds(&self) -> Option<(f64, Threshold)> {
        Some((self.lower?, self.upper?))
    }
}

/// A duopoly model with its roots and thresholds precomputed.
#[derive(Debug, Clone)]
pub struct Duopoly {
    model: AffineStreamModel,
    beta1: f64,
    beta2: Option<f64>,
    th: ThresholdSet,
}

impl Duopoly {
    pub fn new(model: AffineStreamModel) -> Result<Self> {
        let b = beta_roots(model.gbm())?;
        let th = thresholds(&model)?;
        Ok(Duopoly {
            model,
            beta1: b.beta1,
            beta2: b.beta2,
            th,
        })
    }

    pub fn from_pawlina_kort(p: &PawlinaKortParams) -> Result<Self> {
        Self::new(from_pawlina_kort(p)?)
    }

    pub fn model(&self) -> &AffineStreamModel {
        &self.model
    }

    pub fn gbm(&self) -> &GbmParams {
        self.model.gbm()
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> Option<f64> {
        self.beta2
    }

    pub fn thresholds(&self) -> &ThresholdSet {
        &self.th
    }

    fn perp(&self, s: AffineStream, x: f64) -> f64 {
        perpetuity_value(&s, self.model.gbm(), x)
    }

    /// Value of receiving `s0` until the first investment.
    pub fn waiting_stream_value(&self, f: Firm, x: f64) -> f64 {
        self.perp(self.model.s0(f), x)
    }

    /// Firm `f` invests right after the rival, optimally.
    pub fn follower_value(&self, f: Firm, x: f64) -> f64 {
        let (sf, sb) = (self.model.s_f(f), self.model.s_b(f));
        match self.th.x_f(f) {
            Threshold::Finite(t) if x < t => {
                self.perp(sf, x) + (x / t).powf(self.beta1) * (self.perp(sb, t) - self.perp(sf, t))
            }
            Threshold::Finite(_) => self.perp(sb, x),
            Threshold::Infinite => self.perp(sf, x),
        }
    }

    /// Firm `f` invests now and the rival follows at its follower threshold.
    pub fn leader_value(&self, f: Firm, x: f64) -> f64 {
        let (sl, sb) = (self.model.s_l(f), self.model.s_b(f));
        match self.th.x_f(f.other()) {
            Threshold::Finite(t) if x < t => {
                self.perp(sl, x) + (x / t).powf(self.beta1) * (self.perp(sb, t) - self.perp(sl, t))
            }
            Threshold::Finite(_) => self.perp(sb, x),
            Threshold::Infinite => self.perp(sl, x),
        }
    }

    /// Both firms invest now.
    pub fn simultaneous_value(&self, f: Firm, x: f64) -> f64 {
        self.perp(self.model.s_b(f), x)
    }

    /// Firm 2's first-mover advantage `L2 - F2`.
    pub fn h(&self, x: f64) -> f64 {
        self.leader_value(Firm::Two, x) - self.follower_value(Firm::Two, x)
    }

    /// Zero of `P_{sL2} - P_{sF2}`, where the leader stream starts to beat
    /// the laggard stream for firm 2. The advantage `h` is non-positive there.
    fn h_floor(&self) -> Option<f64> {
        let m = &self.model;
        let da = m.s_l(Firm::Two).a - m.s_f(Firm::Two).a;
        let db = m.s_l(Firm::Two).b - m.s_f(Firm::Two).b;
        (da > 0.0).then(|| -db / self.gbm().r * self.gbm().yield_gap() / da)
    }

    pub fn preemption_region(&self) -> Result<PreemptionRegion> {
        let th = &self.th;
        let xd = match th.x_delta2 {
            Threshold::Finite(v) if th.x_delta2 < th.x_f1 => v,
            _ => return Ok(PreemptionRegion::EMPTY),
        };
        if !(self.h(xd) > 0.0) {
            return Ok(PreemptionRegion::EMPTY);
        }
        let floor = self.h_floor().ok_or_else(|| {
            Error::NumericalFailure("finite x_Delta2 without a leader-stream gain".into())
        })?;
        // h(floor) <= 0 in exact arithmetic; a nonnegative value is a
        // rounding-level zero.
        let lower = if self.h(floor) >= 0.0 {
            floor
        } else {
            bisect(|x| self.h(x), floor, xd, X_TOL)?
        };
        let upper = match (th.x_f1, th.x_f2) {
            (Threshold::Infinite, _) => Threshold::Infinite,
            (a, b) if a == b => b,
            (Threshold::Finite(xf1), _) => Threshold::Finite(bisect(|x| self.h(x), xd, xf1, X_TOL)?),
        };
        Ok(PreemptionRegion {
            empty: false,
            lower: Some(lower),
            upper: Some(upper),
        })
    }
}

pub fn preemption_region(p: &PawlinaKortParams) -> Result<PreemptionRegion> {
    Duopoly::from_pawlina_kort(p)?.preemption_region()
}

/// Closed-form emptiness test for the Pawlina-Kort preemption region in
/// terms of the cost ratio and `c = (D10 - D11) / (D11 - D01)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostRatioTest {
    pub nonempty: bool,
    /// `(I2/I1)^(b1-1)` and `((1+c)^b1 - 1)/(b1 c)` when `c` is finite and
    /// positive.
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
}

pub fn cost_ratio_test(p: &PawlinaKortParams) -> Result<CostRatioTest> {
    p.validate()?;
    let b = beta_roots(&p.gbm())?.beta1;
    let decided = |nonempty| CostRatioTest {
        nonempty,
        lhs: None,
        rhs: None,
    };
    if p.d10 <= p.d11.max(p.d01) {
        return Ok(decided(false));
    }
    if p.d01 >= p.d11 {
        return Ok(decided(true));
    }
    let c = (p.d10 - p.d11) / (p.d11 - p.d01);
    let lhs = (p.i2 / p.i1).powf(b - 1.0);
    let rhs = cost_ratio_bound(b, c);
    Ok(CostRatioTest {
        nonempty: lhs < rhs,
        lhs: Some(lhs),
        rhs: Some(rhs),
    })
}

/// `((1+c)^b - 1) / (b c)`.
pub fn cost_ratio_bound(beta1: f64, c: f64) -> f64 {
    ((1.0 + c).powf(beta1) - 1.0) / (beta1 * c)
}

/// Largest cost ratio `I2/I1` with a nonempty region, as a limit.
pub fn boundary_cost_ratio(beta1: f64, c: f64) -> f64 {
    cost_ratio_bound(beta1, c).powf(1.0 / (beta1 - 1.0))
}
