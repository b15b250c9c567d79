//! Recombining binomial lattice for GBM and backward induction for
//! single-agent switching problems.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AffineStream, GbmParams};
use crate::stopping::{exit_discounts, perpetuity_value};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSpec {
    pub n_steps: usize,
    pub horizon: f64,
    pub x0: f64,
}

impl LatticeSpec {
    pub fn new(n_steps: usize, horizon: f64, x0: f64) -> Self {
        LatticeSpec {
            n_steps,
            horizon,
            x0,
        }
    }

    /// Adjusts the horizon (by at most about one node spacing in log-state)
    /// so that `barrier` falls exactly on a node.
    pub fn aligned(n_steps: usize, horizon: f64, x0: f64, barrier: f64, sigma: f64) -> Result<Self> {
        let spec = LatticeSpec::new(n_steps, horizon, x0);
        spec.check()?;
        if !(barrier > 0.0 && sigma > 0.0) {
            return Err(Error::InvalidLattice("alignment needs barrier > 0 and sigma > 0".into()));
        }
        let dist = (barrier / x0).ln();
        if dist == 0.0 {
            return Ok(spec);
        }
        let step = sigma * (horizon / n_steps as f64).sqrt();
        let m = (dist.abs() / step).round().max(1.0);
        let dt = (dist / (m * sigma)).powi(2);
        Ok(LatticeSpec::new(n_steps, dt * n_steps as f64, x0))
    }

    fn check(&self) -> Result<()> {
        if self.n_steps == 0 {
            return Err(Error::InvalidLattice("n_steps must be positive".into()));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return Err(Error::InvalidLattice(format!("bad horizon {}", self.horizon)));
        }
        if !(self.x0 > 0.0 && self.x0.is_finite()) {
            return Err(Error::InvalidLattice(format!("bad x0 {}", self.x0)));
        }
        Ok(())
    }
}

/// A lattice built for given dynamics.
#[derive(Debug, Clone)]
pub struct Lattice {
    pub spec: LatticeSpec,
    pub gbm: GbmParams,
    pub dt: f64,
    pub up: f64,
    pub down: f64,
    pub p_up: f64,
    pub disc: f64,
    log_step: f64,
}

impl Lattice {
    pub fn new(spec: LatticeSpec, gbm: GbmParams) -> Result<Self> {
        spec.check()?;
        gbm.validate()?;
        if gbm.sigma <= 0.0 {
            return Err(Error::InvalidLattice("the lattice needs sigma > 0".into()));
        }
        let dt = spec.horizon / spec.n_steps as f64;
        let log_step = gbm.sigma * dt.sqrt();
        let up = log_step.exp();
        let down = 1.0 / up;
        let p_up = ((gbm.mu * dt).exp() - down) / (up - down);
        if !(p_up > 0.0 && p_up < 1.0) {
            return Err(Error::InvalidLattice(format!(
                "up probability {p_up} outside (0, 1); use a smaller time step"
            )));
        }
        Ok(Lattice {
            spec,
            gbm,
            dt,
            up,
            down,
            p_up,
            disc: (-gbm.r * dt).exp(),
            log_step,
        })
    }

    pub fn n(&self) -> usize {
        self.spec.n_steps
    }

    /// State at log-exponent `m`, i.e. `x0 * up^m`.
    pub fn node(&self, m: i64) -> f64 {
        self.spec.x0 * (m as f64 * self.log_step).exp()
    }

    /// All states `x0 * up^m` for `m = -n..=n`, index `m + n`.
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.n() as i64;
        (-n..=n).map(|m| self.node(m)).collect()
    }

    /// One-period expected gross growth of the state.
    pub fn expected_growth(&self) -> f64 {
        self.p_up * self.up + (1.0 - self.p_up) * self.down
    }

    /// Log-distance between neighbouring nodes.
    pub fn log_step(&self) -> f64 {
        self.log_step
    }

    /// Expected discounted revenue from `s` over one period, exact for GBM.
    pub fn flow(&self, s: &AffineStream, x: f64) -> f64 {
        let k = self.gbm.yield_gap();
        let r = self.gbm.r;
        s.a * x * (-(-k * self.dt).exp_m1()) / k + s.b * (-(-r * self.dt).exp_m1()) / r
    }
}

/// Where the switch is optional: on `(lo, hi)`. At or beyond either
/// barrier the switch is forced.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Feasible {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
}

impl Feasible {
    pub const FREE: Feasible = Feasible { lo: None, hi: None };

    pub fn forced(&self, x: f64) -> bool {
        self.lo.is_some_and(|l| x <= l) || self.hi.is_some_and(|h| x >= h)
    }

    /// The barrier crossed on a move from `x` to `y`, if any.
    fn crossed(&self, x: f64, y: f64) -> Option<f64> {
        match (self.lo, self.hi) {
            (Some(l), _) if y <= l && x > l => Some(l),
            (_, Some(h)) if y >= h && x < h => Some(h),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeStop {
    pub value: f64,
    pub dt: f64,
    pub horizon: f64,
    pub log_step: f64,
    /// `(state, stop?)` for every node exponent, taken at the earliest time
    /// step that reaches it, in increasing state order.
    pub decisions: Vec<(f64, bool)>,
}

impl LatticeStop {
    /// Smallest node in `(a, b)` where stopping is chosen.
    pub fn first_stop_in(&self, a: f64, b: f64) -> Option<f64> {
        self.decisions
            .iter()
            .find(|(x, s)| *s && *x > a && *x < b)
            .map(|(x, _)| *x)
    }
}

/// Backward induction for switching from `from` to `to`.
///
/// Waiting earns the exact one-period flow of `from`; stopping yields the
/// perpetuity of `to`. At the horizon the value is the better of stopping
/// and waiting until a forced switch, the latter in closed form.
pub fn lattice_stopping(
    spec: &LatticeSpec,
    gbm: &GbmParams,
    from: &AffineStream,
    to: &AffineStream,
    feasible: Feasible,
) -> Result<LatticeStop> {
    let lat = Lattice::new(*spec, *gbm)?;
    let n = lat.n();
    let xs = lat.nodes();
    let stop = |x: f64| perpetuity_value(to, gbm, x);
    let wait_forever = |x: f64| -> Result<f64> {
        let (wl, wh) = exit_discounts(gbm, x, feasible.lo, feasible.hi)?;
        let gain = |b: f64| stop(b) - perpetuity_value(from, gbm, b);
        Ok(perpetuity_value(from, gbm, x)
            + feasible.lo.map_or(0.0, |l| wl * gain(l))
            + feasible.hi.map_or(0.0, |h| wh * gain(h)))
    };

    let mut decisions = vec![false; 2 * n + 1];
    let mut v = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let idx = 2 * j;
        let x = xs[idx];
        let (val, s) = if feasible.forced(x) {
            (stop(x), true)
        } else {
            let w = wait_forever(x)?;
            let sv = stop(x);
            (sv.max(w), sv >= w)
        };
        v.push(val);
        decisions[idx] = s;
    }
    let (p, q) = (lat.p_up, 1.0 - lat.p_up);
    for k in (0..n).rev() {
        for j in 0..=k {
            // Exponent 2j - k sits at index 2j - k + n.
            let idx = 2 * j + n - k;
            let x = xs[idx];
            let child = |val: f64, y: f64| match feasible.crossed(x, y) {
                Some(b) if !feasible.forced(x) => stop(b),
                _ => val,
            };
            let sv = stop(x);
            let (val, s) = if feasible.forced(x) {
                (sv, true)
            } else {
                let cont = lat.flow(from, x)
                    + lat.disc * (p * child(v[j + 1], xs[idx + 1]) + q * child(v[j], xs[idx - 1]));
                (sv.max(cont), sv >= cont)
            };
            v[j] = val;
            decisions[idx] = s;
        }
    }
    Ok(LatticeStop {
        value: v[0],
        dt: lat.dt,
        horizon: lat.spec.horizon,
        log_step: lat.log_step(),
        decisions: xs.into_iter().zip(decisions).collect(),
    })
}
