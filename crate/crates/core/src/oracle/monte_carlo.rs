//! Monte Carlo estimates of strategy payoffs.
//!
//! Paths use exact lognormal steps. Barrier crossings inside a step are
//! detected with the Brownian bridge probability, and a crossed barrier is
//! taken to be hit at mid-step. Every path has its own ChaCha stream, and
//! the sums are accumulated over fixed chunks in order, so results are
//! identical in parallel and sequential mode.
//!
//! Estimates are written as `W(x0) + E[e^{-r tau} (V - W)(X_tau)]`, with `W`
//! the value of waiting forever and `tau` the exit from the continuation
//! gap or the horizon, whichever comes first. Paths still inside at the
//! horizon are closed with the analytical continuation value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::equilibrium::CandidateStrategyPair;
use crate::error::{Error, Result};
use crate::model::Firm;
use crate::oracle::Outcomes;
use crate::par::Execution;
use crate::payoff::Duopoly;
use crate::model::GbmParams;
use crate::stopping::{perpetuity_value, SwitchProblem};
use crate::threshold::Threshold;

const CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSpec {
    pub n_paths: usize,
    pub seed: u64,
    pub dt: f64,
    pub horizon: f64,
}

impl McSpec {
    pub fn new(n_paths: usize, seed: u64) -> Self {
        McSpec {
            n_paths,
            seed,
            dt: 0.01,
            horizon: 100.0,
        }
    }

    fn check(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(Error::InvalidParameter {
                name: "paths",
                reason: "need at least 2 paths".into(),
            });
        }
        if !(self.dt > 0.0 && self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "horizon",
                reason: format!("need 0 < dt <= horizon, got dt={} horizon={}", self.dt, self.horizon),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub n_paths: usize,
    /// Share of paths that left the continuation gap before the horizon.
    pub exited: f64,
}

impl McEstimate {
    fn exact(v: f64, n: usize) -> Self {
        McEstimate {
            mean: v,
            stderr: 0.0,
            n_paths: n,
            exited: 1.0,
        }
    }

    /// Whether `v` lies within `k` standard errors (plus `abs`) of the mean.
    pub fn covers(&self, v: f64, k: f64, abs: f64) -> bool {
        (self.mean - v).abs() <= k * self.stderr + abs
    }
}

/// Where a simulated path stopped.
#[derive(Debug, Clone, Copy)]
enum End {
    Lower,
    Upper,
    Horizon(f64),
}

fn bridge_cross(rng: &mut ChaCha8Rng, barrier: f64, u: f64, v: f64, s2dt: f64) -> bool {
    let p = (-2.0 * (barrier - u) * (barrier - v) / s2dt).exp();
    rng.random::<f64>() < p
}

/// First exit from `(lo, hi)` of a path from `x0`: returns the end state
/// and its time.
fn run_path(
    g: &GbmParams,
    x0: f64,
    lo: Option<f64>,
    hi: Option<f64>,
    spec: &McSpec,
    rng: &mut ChaCha8Rng,
) -> (End, f64) {
    let n = (spec.horizon / spec.dt).round().max(1.0) as usize;
    let dt = spec.horizon / n as f64;
    let drift = (g.mu - 0.5 * g.sigma * g.sigma) * dt;
    let vol = g.sigma * dt.sqrt();
    let s2dt = vol * vol;
    let (llo, lhi) = (lo.map(f64::ln), hi.map(f64::ln));
    let mut u = x0.ln();
    for k in 0..n {
        let z: f64 = if vol > 0.0 { rng.sample(StandardNormal) } else { 0.0 };
        let v = u + drift + vol * z;
        let t_mid = (k as f64 + 0.5) * dt;
        if let Some(h) = lhi {
            if v >= h || (vol > 0.0 && bridge_cross(rng, h, u, v, s2dt)) {
                return (End::Upper, t_mid);
            }
        }
        if let Some(l) = llo {
            if v <= l || (vol > 0.0 && bridge_cross(rng, l, u, v, s2dt)) {
                return (End::Lower, t_mid);
            }
        }
        u = v;
    }
    (End::Horizon(u.exp()), n as f64 * dt)
}

// Mean of `K` per-path samples with standard errors and the exit share.
fn estimate<const K: usize>(
    spec: &McSpec,
    exec: Execution,
    sample: impl Fn(&mut ChaCha8Rng) -> ([f64; K], bool) + Sync + Send,
) -> ([f64; K], [f64; K], f64) {
    let n = spec.n_paths;
    let chunks = n.div_ceil(CHUNK);
    let parts = exec.map_range(chunks, |c| {
        let mut s = [0.0; K];
        let mut s2 = [0.0; K];
        let mut exits = 0usize;
        for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64);
            let (y, exited) = sample(&mut rng);
            for k in 0..K {
                s[k] += y[k];
                s2[k] += y[k] * y[k];
            }
            exits += exited as usize;
        }
        (s, s2, exits)
    });
    let mut s = [0.0; K];
    let mut s2 = [0.0; K];
    let mut exits = 0;
    for (a, b, e) in parts {
        for k in 0..K {
            s[k] += a[k];
            s2[k] += b[k];
        }
        exits += e;
    }
    let nf = n as f64;
    let mean = s.map(|v| v / nf);
    let mut se = [0.0; K];
    for k in 0..K {
        let var = ((s2[k] - nf * mean[k] * mean[k]) / (nf - 1.0)).max(0.0);
        se[k] = (var / nf).sqrt();
    }
    (mean, se, exits as f64 / nf)
}

/// Payoffs to both firms of playing `cand` from `x0`.
pub fn monte_carlo_payoff(
    duo: &Duopoly,
    cand: &CandidateStrategyPair,
    x0: f64,
    spec: &McSpec,
    exec: Execution,
) -> Result<[McEstimate; 2]> {
    spec.check()?;
    let out = Outcomes::new(duo, cand)?;
    if let Some(p) = out.payoff(x0) {
        return Ok(p.map(|v| McEstimate::exact(v, spec.n_paths)));
    }
    let g = *duo.gbm();
    let r = g.r;
    let (lo, hi) = out.gap(x0);
    let w = |x: f64| [Firm::One, Firm::Two].map(|f| duo.waiting_stream_value(f, x));
    let jump = |edge: f64| {
        let p = out.payoff_entering(edge, x0);
        let we = w(edge);
        [p[0] - we[0], p[1] - we[1]]
    };
    let (j_lo, j_hi) = (lo.map(jump), hi.map(jump));
    // Tail values can fail only for degenerate dynamics, checked here once.
    out.continuation_value(x0)?;

    let (mean, se, exited) = estimate::<2>(spec, exec, |rng| {
        let (end, t) = run_path(&g, x0, lo, hi, spec, rng);
        let d = (-r * t).exp();
        match end {
            End::Lower => (j_lo.unwrap().map(|v| d * v), true),
            End::Upper => (j_hi.unwrap().map(|v| d * v), true),
            End::Horizon(x) => {
                let c = out.continuation_value(x).unwrap_or([0.0; 2]);
                let wx = w(x);
                ([d * (c[0] - wx[0]), d * (c[1] - wx[1])], false)
            }
        }
    });
    let w0 = w(x0);
    Ok([0, 1].map(|i| McEstimate {
        mean: w0[i] + mean[i],
        stderr: se[i],
        n_paths: spec.n_paths,
        exited,
    }))
}

/// Value of the single-agent rule "switch on first reaching `theta`".
pub fn monte_carlo_switch(
    p: &SwitchProblem,
    theta: Threshold,
    x0: f64,
    spec: &McSpec,
    exec: Execution,
) -> Result<McEstimate> {
    spec.check()?;
    let g = *p.gbm();
    let from = p.from_stream();
    let w0 = perpetuity_value(&from, &g, x0);
    let t = match theta {
        Threshold::Finite(t) if x0 >= t => {
            return Ok(McEstimate::exact(w0 + p.stop_payoff(x0), spec.n_paths))
        }
        Threshold::Finite(t) => t,
        Threshold::Infinite => return Ok(McEstimate::exact(w0, spec.n_paths)),
    };
    let jump = p.stop_payoff(t);
    let (mean, se, exited) = estimate::<1>(spec, exec, |rng| {
        let (end, tau) = run_path(&g, x0, None, Some(t), spec, rng);
        let d = (-g.r * tau).exp();
        match end {
            End::Upper => ([d * jump], true),
            End::Horizon(x) => {
                let tail = p.threshold_rule_value(theta, x) - perpetuity_value(&from, &g, x);
                ([d * tail], false)
            }
            End::Lower => unreachable!("no lower barrier"),
        }
    });
    Ok(McEstimate {
        mean: w0 + mean[0],
        stderr: se[0],
        n_paths: spec.n_paths,
        exited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gbm() -> GbmParams {
        GbmParams::new(0.1, 0.08, 0.2).unwrap()
    }

    #[test]
    fn switch_rule_matches_closed_form() {
        let p = SwitchProblem::from_gain(1.5, 1.0, gbm()).unwrap();
        let theta = Threshold::Finite(0.12);
        let spec = McSpec { n_paths: 20_000, seed: 7, dt: 0.01, horizon: 60.0 };
        let est = monte_carlo_switch(&p, theta, 0.06, &spec, Execution::Parallel).unwrap();
        let exact = p.threshold_rule_value(theta, 0.06);
        assert!(est.covers(exact, 4.0, 1e-3 * exact.abs()), "{est:?} vs {exact}");
    }

    #[test]
    fn deterministic_across_modes() {
        let p = SwitchProblem::from_gain(1.5, 1.0, gbm()).unwrap();
        let spec = McSpec { n_paths: 3000, seed: 11, dt: 0.05, horizon: 20.0 };
        let a = monte_carlo_switch(&p, Threshold::Finite(0.1), 0.05, &spec, Execution::Parallel).unwrap();
        let b = monte_carlo_switch(&p, Threshold::Finite(0.1), 0.05, &spec, Execution::Sequential).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn above_threshold_is_exact() {
        let p = SwitchProblem::from_gain(1.5, 1.0, gbm()).unwrap();
        let spec = McSpec::new(10, 1);
        let e = monte_carlo_switch(&p, Threshold::Finite(0.1), 0.2, &spec, Execution::Sequential).unwrap();
        assert_eq!(e.stderr, 0.0);
        assert_eq!(e.mean, p.threshold_rule_value(Threshold::Finite(0.1), 0.2));
    }

    #[test]
    fn rejects_bad_spec() {
        let p = SwitchProblem::from_gain(1.5, 1.0, gbm()).unwrap();
        let spec = McSpec { n_paths: 1, seed: 0, dt: 0.01, horizon: 1.0 };
        assert!(monte_carlo_switch(&p, Threshold::Finite(0.1), 0.05, &spec, Execution::Sequential).is_err());
    }
}
