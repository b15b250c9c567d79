//! Single-agent stopping problems with affine payoffs: perpetuities,
//! threshold rules with an optional upper barrier, and the leader problem
//! squeezed between a lower and an upper barrier.

use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::model::{beta_roots, AffineStream, BetaRoots, GbmParams};
use crate::root::{bisect, X_TOL};
use crate::threshold::Threshold;

/// Expected discounted value of receiving `s` forever from state `x`.
pub fn perpetuity_value(s: &AffineStream, g: &GbmParams, x: f64) -> f64 {
    s.a * x / g.yield_gap() + s.b / g.r
}

/// Switching irreversibly from one stream to another at a cost.
///
/// The net gain is `D x - r I` per unit time with `D = to.a - from.a` and
/// `I = (from.b - to.b) / r > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchProblem {
    from: AffineStream,
    to: AffineStream,
    gbm: GbmParams,
    beta1: f64,
}

impl SwitchProblem {
    pub fn new(from: AffineStream, to: AffineStream, gbm: GbmParams) -> Result<Self> {
        if !(to.b < from.b) {
            return Err(invalid(
                "switch cost",
                format!(
                    "need to.b < from.b for a positive switching cost, got {} >= {}",
                    to.b, from.b
                ),
            ));
        }
        let beta1 = beta_roots(&gbm)?.beta1;
        Ok(SwitchProblem {
            from,
            to,
            gbm,
            beta1,
        })
    }

    /// Builds the problem directly from the net gain coefficient and cost.
    pub fn from_gain(d: f64, cost: f64, gbm: GbmParams) -> Result<Self> {
        Self::new(
            AffineStream::new(0.0, 0.0),
            AffineStream::new(d, -gbm.r * cost),
            gbm,
        )
    }

    pub fn from_stream(&self) -> AffineStream {
        self.from
    }

    pub fn to_stream(&self) -> AffineStream {
        self.to
    }

    pub fn gbm(&self) -> &GbmParams {
        &self.gbm
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn gain(&self) -> f64 {
        self.to.a - self.from.a
    }

    pub fn cost(&self) -> f64 {
        (self.from.b - self.to.b) / self.gbm.r
    }

    /// Value of switching now relative to never switching.
    pub fn stop_payoff(&self, x: f64) -> f64 {
        self.gain() * x / self.gbm.yield_gap() - self.cost()
    }

    /// Value from state `x` of switching the first time the state reaches
    /// `theta` from below, including the `from` stream while waiting.
    pub fn threshold_rule_value(&self, theta: Threshold, x: f64) -> f64 {
        let wait = perpetuity_value(&self.from, &self.gbm, x);
        match theta {
            Threshold::Finite(t) if x < t => {
                wait + (x / t).powf(self.beta1) * self.stop_payoff(t)
            }
            Threshold::Finite(_) => perpetuity_value(&self.to, &self.gbm, x),
            Threshold::Infinite => wait,
        }
    }
}

/// Optimal unconstrained switching level, `+inf` when the switch never pays.
pub fn switch_threshold(p: &SwitchProblem) -> Threshold {
    let d = p.gain();
    if d <= 0.0 {
        return Threshold::Infinite;
    }
    let b = p.beta1;
    Threshold::Finite(b / (b - 1.0) * p.cost() * p.gbm.yield_gap() / d)
}

/// Optimal level when the switch must happen no later than the first time
/// the state reaches `x_tilde`.
pub fn constrained_threshold(p: &SwitchProblem, x_tilde: Threshold) -> Result<Threshold> {
    if !(x_tilde.value() > 0.0) {
        return Err(Error::InvalidThreshold(format!(
            "upper barrier must be positive, got {x_tilde}"
        )));
    }
    Ok(switch_threshold(p).min(x_tilde))
}

/// Expected discount factors `E[e^{-r tau}; exit at lo]` and
/// `E[e^{-r tau}; exit at hi]` for the first exit of the state from
/// `(lo, hi)`, started at `x`. A missing barrier is never hit.
pub fn exit_discounts(g: &GbmParams, x: f64, lo: Option<f64>, hi: Option<f64>) -> Result<(f64, f64)> {
    let roots = beta_roots(g)?;
    let b1 = roots.beta1;
    let need_b2 = || {
        roots.beta2.ok_or_else(|| {
            Error::DegenerateDynamics("a lower barrier needs sigma > 0".into())
        })
    };
    Ok(match (lo, hi) {
        (None, None) => (0.0, 0.0),
        (None, Some(h)) => (0.0, (x / h).min(1.0).powf(b1)),
        (Some(l), None) => ((x / l).max(1.0).powf(need_b2()?), 0.0),
        (Some(l), Some(h)) => {
            let b2 = need_b2()?;
            if x <= l {
                return Ok((1.0, 0.0));
            }
            if x >= h {
                return Ok((0.0, 1.0));
            }
            // Scaled by (h/l)^-b1 to stay finite for wide intervals.
            let z = x / l;
            let big = h / l;
            let q = big.powf(b2 - b1);
            let den = 1.0 - q;
            let w_hi = (z.powf(b1) - z.powf(b2)) * big.powf(-b1) / den;
            let w_lo = (z.powf(b2) - z.powf(b1) * q) / den;
            (w_lo, w_hi)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TwoSidedKind {
    InvestEverywhere,
    WaitUntilExit,
    InteriorThreshold,
}

/// Solution of the leader problem on `(lower, upper)` where leaving the
/// interval forces the switch: invest on `[x_hat, upper)`, wait on
/// `(lower, x_hat)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoSidedRegion {
    pub kind: TwoSidedKind,
    pub x_hat: Option<f64>,
    pub lower: f64,
    pub upper: Threshold,
    /// Coefficients of the waiting value `A x^b1 + B x^b2`, matched at
    /// `lower` and at the right end of the waiting interval.
    #[serde(rename = "A")]
    pub a: Option<f64>,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub note: Option<String>,
    #[serde(skip)]
    shape: Option<Shape>,
}

/// Data needed to re-evaluate the waiting value without the raw
/// coefficients, which under- or overflow for extreme `lower`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Shape {
    beta1: f64,
    beta2: f64,
    gain: f64,
    cost: f64,
    yield_gap: f64,
    // Coefficients of (x/lower)^b1 and (x/lower)^b2.
    a_s: f64,
    b_s: f64,
}

impl Shape {
    fn value(&self, lower: f64, x: f64) -> f64 {
        let z = x / lower;
        self.a_s * z.powf(self.beta1) + self.b_s * z.powf(self.beta2)
    }

    fn derivative(&self, lower: f64, x: f64) -> f64 {
        let z = x / lower;
        (self.beta1 * self.a_s * z.powf(self.beta1) + self.beta2 * self.b_s * z.powf(self.beta2))
            / x
    }
}

impl TwoSidedRegion {
    /// Waiting value `A x^b1 + B x^b2` at `x`, when defined.
    pub fn waiting_value(&self, x: f64) -> Option<f64> {
        self.shape.map(|s| s.value(self.lower, x))
    }

    /// Residual of the first-order condition defining `x_hat`.
    pub fn hatx_residual(&self) -> Option<f64> {
        let (s, xh) = (self.shape?, self.x_hat?);
        let z = xh / self.lower;
        Some(
            (s.beta1 - 1.0) * s.a_s * z.powf(s.beta1) + (s.beta2 - 1.0) * s.b_s * z.powf(s.beta2)
                - s.cost,
        )
    }

    /// Derivative mismatch with the stopping payoff at `x_hat`.
    pub fn smooth_pasting_residual(&self) -> Option<f64> {
        let (s, xh) = (self.shape?, self.x_hat?);
        Some(s.derivative(self.lower, xh) - s.gain / s.yield_gap)
    }

    /// Largest value-matching residual at the two ends of the waiting
    /// interval.
    pub fn value_matching_residual(&self) -> Option<f64> {
        let s = self.shape?;
        let right = self.x_hat.or(self.upper.finite())?;
        let pay = |x: f64| s.gain * x / s.yield_gap - s.cost;
        let r1 = (s.value(self.lower, self.lower) - pay(self.lower)).abs();
        let r2 = (s.value(self.lower, right) - pay(right)).abs();
        Some(r1.max(r2))
    }

    /// Whether the solution invests at `x` in `(lower, upper)`.
    pub fn invests_at(&self, x: f64) -> bool {
        match self.kind {
            TwoSidedKind::InvestEverywhere => true,
            TwoSidedKind::WaitUntilExit => false,
            TwoSidedKind::InteriorThreshold => x >= self.x_hat.unwrap_or(f64::INFINITY),
        }
    }
}

fn solve_shape(
    betas: (f64, f64),
    gain: f64,
    cost: f64,
    yield_gap: f64,
    lower: f64,
    x: f64,
) -> Shape {
    let (b1, b2) = betas;
    let z = x / lower;
    let (z1, z2) = (z.powf(b1), z.powf(b2));
    let vl = gain * lower / yield_gap - cost;
    let vx = gain * x / yield_gap - cost;
    let a_s = (vx - vl * z2) / (z1 - z2);
    Shape {
        beta1: b1,
        beta2: b2,
        gain,
        cost,
        yield_gap,
        a_s,
        b_s: vl - a_s,
    }
}

/// Leader problem for the payoff stream `D x - r I` on `(lower, upper)`,
/// with the switch forced once the state leaves the interval.
pub fn two_sided_leader_region(
    g: &GbmParams,
    d: f64,
    cost: f64,
    lower: f64,
    upper: Threshold,
) -> Result<TwoSidedRegion> {
    let roots: BetaRoots = beta_roots(g)?;
    let beta2 = roots.beta2.ok_or_else(|| {
        Error::DegenerateDynamics("the two-sided problem needs sigma > 0".into())
    })?;
    if !(d.is_finite() && cost.is_finite() && cost > 0.0) {
        return Err(invalid("I", format!("need finite D and I > 0, got D={d} I={cost}")));
    }
    if !(lower > 0.0 && lower.is_finite() && Threshold::Finite(lower) <= upper) {
        return Err(Error::InvalidThreshold(format!(
            "need 0 < lower <= upper, got lower={lower} upper={upper}"
        )));
    }
    let betas = (roots.beta1, beta2);
    let k = g.yield_gap();
    let build = |kind, x_hat: Option<f64>, right: Option<f64>, note: Option<&str>| {
        let shape = right
            .filter(|&x| x > lower)
            .map(|x| solve_shape(betas, d, cost, k, lower, x));
        TwoSidedRegion {
            kind,
            x_hat,
            lower,
            upper,
            a: shape.map(|s| s.a_s / lower.powf(s.beta1)),
            b: shape.map(|s| s.b_s / lower.powf(s.beta2)),
            note: note.map(str::to_owned),
            shape,
        }
    };
    use TwoSidedKind::*;
    if Threshold::Finite(lower) == upper {
        return Ok(build(InvestEverywhere, None, None, Some("collapsed interval")));
    }
    if lower * d >= g.r * cost {
        return Ok(build(InvestEverywhere, None, None, None));
    }
    if d <= 0.0 {
        return Ok(build(WaitUntilExit, None, upper.finite(), Some("no gain from investing")));
    }
    let x_start = g.r * cost / d;
    if Threshold::Finite(x_start) >= upper {
        return Ok(build(
            WaitUntilExit,
            None,
            upper.finite(),
            Some("smooth pasting fails: running loss up to upper"),
        ));
    }
    let b1 = roots.beta1;
    let x_l = b1 / (b1 - 1.0) * cost * k / d;
    let resid = |x: f64| {
        let s = solve_shape(betas, d, cost, k, lower, x);
        let z = x / lower;
        (b1 - 1.0) * s.a_s * z.powf(b1) + (beta2 - 1.0) * s.b_s * z.powf(beta2) - cost
    };
    let x_hat = bisect(resid, x_start, x_l, X_TOL)?;
    if Threshold::Finite(x_hat) >= upper {
        return Ok(build(
            WaitUntilExit,
            None,
            upper.finite(),
            Some("smooth pasting fails: x_hat at or above upper"),
        ));
    }
    Ok(build(InteriorThreshold, Some(x_hat), Some(x_hat), None))
}
