//! Parameter sweeps of the constrained leader problem and of the joint and
//! sequential existence conditions.
//!
//! Sweeping `c` or `d` uses the normalization `D01 = 0`, `D11 = 1`,
//! `D10 = 1 + c`, `D00 = 1 - d`, with `xF1` held fixed and `I2` set to the
//! largest cost ratio that keeps the preemption region nonempty. There the
//! region shrinks to the single point `bar_x = xDelta2 = xF2/(1+c)`, and firm
//! 1 solves the leader problem on `(bar_x, xF2)`. Other parameter names
//! vary that field of the model and read `bar_x` off the region's upper end.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::equilibrium::{classify, joint_equilibrium, sequential_equilibrium, ExistenceVerdict};
use crate::error::{invalid, Error, Result};
use crate::model::{beta_roots, PawlinaKortParams};
use crate::par::Execution;
use crate::payoff::{boundary_cost_ratio, Duopoly};
use crate::stopping::{two_sided_leader_region, TwoSidedKind, TwoSidedRegion};
use crate::threshold::{serde_inf, Threshold};

/// Evenly spaced points `lo..=hi`, `n >= 2`, strictly increasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("grid", format!("need finite lo < hi, got {lo}:{hi}")));
        }
        if n < 2 {
            return Err(invalid("grid", format!("need at least 2 points, got {n}")));
        }
        Ok(Grid { lo, hi, n })
    }

    pub fn points(&self) -> Vec<f64> {
        let step = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n)
            .map(|i| if i + 1 == self.n { self.hi } else { self.lo + step * i as f64 })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = Error;

    /// Parses `a:b:n`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts[..] else {
            return Err(invalid("grid", format!("expected a:b:n, got {s:?}")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid("grid", format!("bad number {t:?} in {s:?}")))
        };
        let n = n
            .trim()
            .parse::<usize>()
            .map_err(|_| invalid("grid", format!("bad count {n:?} in {s:?}")))?;
        Grid::new(num(a)?, num(b)?, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSpec {
    pub name: String,
    pub grid: Grid,
}

impl FromStr for SweepSpec {
    type Err = Error;

    /// Parses `name=a:b:n`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, g) = s
            .split_once('=')
            .ok_or_else(|| invalid("sweep", format!("expected name=a:b:n, got {s:?}")))?;
        let name = name.trim();
        if !SWEEPABLE.contains(&name) {
            return Err(invalid(
                "sweep",
                format!("unknown parameter {name:?}; expected one of {}", SWEEPABLE.join(", ")),
            ));
        }
        Ok(SweepSpec {
            name: name.to_owned(),
            grid: g.parse()?,
        })
    }
}

pub const SWEEPABLE: [&str; 11] = [
    "c", "d", "r", "mu", "sigma", "D00", "D01", "D10", "D11", "I1", "I2",
];

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}={}:{}:{}", self.name, self.grid.lo, self.grid.hi, self.grid.n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: f64,
    pub bar_x: Option<f64>,
    /// Firm 1's entry point: the interior threshold, `min(bar_x, xL1)` when
    /// investing at once pays, or `xF2` when waiting for firm 2 does.
    pub x_hat: Option<f64>,
    pub kind: Option<TwoSidedKind>,
    #[serde(rename = "xL1")]
    pub x_l1: Threshold,
    #[serde(rename = "xF2")]
    pub x_f2: Threshold,
    #[serde(rename = "xM1")]
    pub x_m1: Threshold,
    pub joint_exists: Option<bool>,
    #[serde(with = "serde_inf")]
    pub joint_margin: f64,
    pub seq_exists: Option<bool>,
    #[serde(with = "serde_inf")]
    pub seq_margin: f64,
}

/// Model used at sweep point `v`.
pub fn sweep_point(base: &PawlinaKortParams, name: &str, v: f64) -> Result<PawlinaKortParams> {
    let mut p = *base;
    match name {
        "c" | "d" => {
            if base.d01 != 0.0 || !(base.d11 > 0.0) {
                return Err(invalid(
                    "sweep",
                    "sweeping c or d needs D01 = 0 and D11 > 0 in the base model",
                ));
            }
            let (mut c, mut d) = (base.d10 / base.d11 - 1.0, 1.0 - base.d00 / base.d11);
            if name == "c" {
                c = v;
            } else {
                d = v;
            }
            if !(c > 0.0) {
                return Err(invalid("c", format!("need c > 0, got {c}")));
            }
            let b = beta_roots(&base.gbm())?.beta1;
            // Rescale so D11 = 1 with xF1 unchanged.
            p.i1 = base.i1 / base.d11;
            p.d11 = 1.0;
            p.d10 = 1.0 + c;
            p.d00 = 1.0 - d;
            p.i2 = boundary_cost_ratio(b, c) * p.i1;
        }
        "r" => p.r = v,
        "mu" => p.mu = v,
        "sigma" => p.sigma = v,
        "D00" => p.d00 = v,
        "D01" => p.d01 = v,
        "D10" => p.d10 = v,
        "D11" => p.d11 = v,
        "I1" => p.i1 = v,
        "I2" => p.i2 = v,
        _ => return Err(invalid("sweep", format!("unknown parameter {name:?}"))),
    }
    p.validate()?;
    Ok(p)
}

fn entry_point(ts: &TwoSidedRegion, x_l1: Threshold) -> Option<f64> {
    match ts.kind {
        TwoSidedKind::InteriorThreshold => ts.x_hat,
        // An unconstrained leader below bar_x would already have entered.
        TwoSidedKind::InvestEverywhere => Some(x_l1.min(Threshold::Finite(ts.lower)).value()),
        TwoSidedKind::WaitUntilExit => ts.upper.finite(),
    }
}

// Premise failures become "not applicable"; anything else is an error.
fn verdict(v: Result<ExistenceVerdict>) -> Result<(Option<bool>, f64)> {
    match v {
        Ok(v) => Ok((Some(v.exists), v.margin)),
        Err(Error::PremiseViolated(_) | Error::NotApplicable(_)) => Ok((None, f64::NAN)),
        Err(e) => Err(e),
    }
}

pub fn sweep_row(base: &PawlinaKortParams, name: &str, v: f64) -> Result<SweepRow> {
    let p = sweep_point(base, name, v)?;
    let duo = Duopoly::from_pawlina_kort(&p)?;
    let th = *duo.thresholds();
    let (bar_x, ts) = if name == "c" || name == "d" {
        let bar = th.x_delta2.value();
        let ts = match th.x_f2 {
            Threshold::Finite(_) if th.x_delta2 < th.x_f2 => Some(two_sided_leader_region(
                duo.gbm(),
                p.d10 - p.d00,
                p.i1,
                bar,
                th.x_f2,
            )?),
            _ => None,
        };
        (Some(bar), ts)
    } else {
        let rep = classify(&duo)?;
        let bar = rep.preemption.bounds().and_then(|(_, up)| up.finite());
        (bar, rep.two_sided)
    };
    let (joint_exists, joint_margin) = verdict(joint_equilibrium(&p, th.x_m1))?;
    let (seq_exists, seq_margin) = verdict(sequential_equilibrium(&p))?;
    Ok(SweepRow {
        value: v,
        bar_x,
        x_hat: ts.as_ref().and_then(|t| entry_point(t, th.x_l1)),
        kind: ts.map(|t| t.kind),
        x_l1: th.x_l1,
        x_f2: th.x_f2,
        x_m1: th.x_m1,
        joint_exists,
        joint_margin,
        seq_exists,
        seq_margin,
    })
}

/// One row per grid point, in grid order.
pub fn sweep(base: &PawlinaKortParams, spec: &SweepSpec, exec: Execution) -> Result<Vec<SweepRow>> {
    let pts = spec.grid.points();
    exec.map(&pts, |&v| sweep_row(base, &spec.name, v))
        .into_iter()
        .collect()
}
