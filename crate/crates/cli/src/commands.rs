//! One function per subcommand. Each returns rendered output.

use std::path::Path;

use clap::Args;
use serde::Serialize;

use preempt::equilibrium::{
    classify as classify_eq, grenadier_analysis, joint_equilibrium, sequential_equilibrium,
};
use preempt::oracle::{
    candidate_values, lattice_stopping, monte_carlo_payoff, monte_carlo_switch,
    one_shot_deviation_check, DeviationReport, Feasible, LatticeSpec, McEstimate, McSpec,
};
use preempt::sweep::{sweep as run_sweep, Grid, SweepSpec};
use preempt::{
    beta_roots, constrained_threshold, BetaRoots, Duopoly, Execution, Firm, ModelSpec,
    SwitchProblem, Threshold, ThresholdSet,
};

use crate::format::{json, num, opt_bool, opt_num, thr, Csv};
use crate::{CliError, Output};

pub fn load_model(path: &Path) -> Result<ModelSpec, CliError> {
    let s = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    Ok(ModelSpec::from_json(&s)?)
}

fn duopoly(spec: &ModelSpec) -> Result<Duopoly, CliError> {
    Ok(Duopoly::new(spec.to_affine()?)?)
}

#[derive(Serialize)]
struct ThresholdsOut {
    #[serde(flatten)]
    beta: BetaRoots,
    #[serde(flatten)]
    thresholds: ThresholdSet,
}

pub fn thresholds(spec: &ModelSpec) -> Result<Output, CliError> {
    let duo = duopoly(spec)?;
    let beta = beta_roots(duo.gbm())?;
    Ok(Output::ok(json(&ThresholdsOut {
        beta,
        thresholds: *duo.thresholds(),
    })))
}

pub fn curves(spec: &ModelSpec, grid: &Grid) -> Result<Output, CliError> {
    let duo = duopoly(spec)?;
    if grid.lo <= 0.0 {
        return Err(CliError::Input(format!("grid must be positive, got lo={}", grid.lo)));
    }
    let region = duo.preemption_region()?;
    let mut csv = Csv::new(&["x", "L1", "F1", "M1", "L2", "F2", "M2", "in_preemption"]);
    for x in grid.points() {
        let mut row = vec![num(x)];
        for f in Firm::BOTH {
            row.push(num(duo.leader_value(f, x)));
            row.push(num(duo.follower_value(f, x)));
            row.push(num(duo.simultaneous_value(f, x)));
        }
        row.push(u8::from(region.contains(x)).to_string());
        csv.row(&row);
    }
    Ok(Output::ok(csv.finish()))
}

pub fn classify(spec: &ModelSpec) -> Result<Output, CliError> {
    let rep = classify_eq(&duopoly(spec)?)?;
    Ok(Output::ok(json(&rep)))
}

pub fn joint(spec: &ModelSpec, xj: Option<f64>) -> Result<Output, CliError> {
    let p = spec.to_pawlina_kort()?;
    let x_j = match xj {
        Some(v) if v.is_nan() || v <= 0.0 => {
            return Err(CliError::Input(format!("xj must be positive, got {v}")))
        }
        Some(v) => Threshold::new(v),
        None => Duopoly::from_pawlina_kort(&p)?.thresholds().x_m1,
    };
    Ok(Output::ok(json(&joint_equilibrium(&p, x_j)?)))
}

pub fn seq(spec: &ModelSpec) -> Result<Output, CliError> {
    let p = spec.to_pawlina_kort()?;
    Ok(Output::ok(json(&sequential_equilibrium(&p)?)))
}

pub fn grenadier(spec: &ModelSpec) -> Result<Output, CliError> {
    let ModelSpec::Grenadier(p) = spec else {
        return Err(CliError::Inapplicable(
            "grenadier needs a model of kind \"grenadier\"".into(),
        ));
    };
    Ok(Output::ok(json(&grenadier_analysis(p)?)))
}

pub fn sweep(spec: &ModelSpec, sw: &SweepSpec) -> Result<Output, CliError> {
    let base = spec.to_pawlina_kort()?;
    let rows = run_sweep(&base, sw, Execution::default())?;
    let mut csv = Csv::new(&[
        &sw.name,
        "bar_x",
        "x_hat",
        "xL1",
        "xF2",
        "xM1",
        "joint_exists",
        "seq_exists",
    ]);
    for r in rows {
        csv.row(&[
            num(r.value),
            opt_num(r.bar_x),
            opt_num(r.x_hat),
            thr(r.x_l1),
            thr(r.x_f2),
            thr(r.x_m1),
            opt_bool(r.joint_exists),
            opt_bool(r.seq_exists),
        ]);
    }
    Ok(Output::ok(csv.finish()))
}

/// Below this many lattice steps results are too coarse to mean much.
const MIN_STEPS: usize = 1000;

#[derive(Args, Debug, Clone)]
pub struct OracleArgs {
    /// Lattice time steps.
    #[arg(long, default_value_t = 2000)]
    steps: usize,
    /// Lattice and simulation horizon in years; defaults to 5/mu, or 50 when mu <= 0.
    #[arg(long)]
    horizon: Option<f64>,
    /// Monte Carlo paths.
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative tolerance for lattice values.
    #[arg(long, default_value_t = 5e-3)]
    rtol: f64,
    /// Deviation-gain tolerance; defaults to 10 dt r times the model's cost scale.
    #[arg(long)]
    eps: Option<f64>,
    /// Monte Carlo tolerance in standard errors.
    #[arg(long, default_value_t = 3.0)]
    zmax: f64,
}

#[derive(Serialize)]
struct LatticeCheck {
    check: String,
    x0: f64,
    closed_form: f64,
    lattice: f64,
    rel_error: f64,
    pass: bool,
}

#[derive(Serialize)]
struct McCheck {
    check: String,
    x0: f64,
    closed_form: f64,
    #[serde(flatten)]
    estimate: McEstimate,
    z: f64,
    pass: bool,
}

#[derive(Serialize)]
struct DeviationOut {
    #[serde(flatten)]
    report: DeviationReport,
    pass: bool,
}

#[derive(Serialize)]
struct VerifyOut {
    steps: usize,
    horizon: f64,
    paths: usize,
    seed: u64,
    rtol: f64,
    zmax: f64,
    x0: f64,
    warnings: Vec<String>,
    lattice: Vec<LatticeCheck>,
    deviation: DeviationOut,
    monte_carlo: Vec<McCheck>,
    passed: bool,
}

// A lattice the dynamics cannot support counts as a failed check, not bad input.
fn coarse(e: preempt::Error) -> CliError {
    match e {
        preempt::Error::InvalidLattice(m) => CliError::Numerical(format!("lattice check failed: {m}")),
        e => e.into(),
    }
}

fn rel_error(approx: f64, exact: f64, scale: f64) -> f64 {
    (approx - exact).abs() / exact.abs().max(1e-12 * scale)
}

pub fn verify(spec: &ModelSpec, a: &OracleArgs) -> Result<Output, CliError> {
    let duo = duopoly(spec)?;
    let g = *duo.gbm();
    let m = *duo.model();
    if g.sigma <= 0.0 {
        return Err(CliError::Inapplicable("the lattice oracle needs sigma > 0".into()));
    }
    if a.steps == 0 || a.paths < 2 {
        return Err(CliError::Input("need steps >= 1 and paths >= 2".into()));
    }
    if !(a.rtol > 0.0 && a.zmax > 0.0) || a.eps.is_some_and(|e| !(e > 0.0)) {
        return Err(CliError::Input("tolerances must be positive".into()));
    }
    let horizon = a
        .horizon
        .unwrap_or(if g.mu > 0.0 { 5.0 / g.mu } else { 50.0 });
    let th = *duo.thresholds();
    let rep = classify_eq(&duo)?;
    let cand = rep.candidate();
    let scale = m.cost_scale().max(1.0);

    // Start below every entry point so that each check has something to do.
    let x_ref = [rep.preemption.lower, th.x_l1.finite(), th.x_f2.finite()]
        .into_iter()
        .flatten()
        .fold(f64::INFINITY, f64::min);
    let x0 = if x_ref.is_finite() { 0.8 * x_ref } else { 1.0 };

    let mut warnings = Vec::new();
    if a.steps < MIN_STEPS {
        let w = format!("{} lattice steps is too coarse for converged values (use >= {MIN_STEPS})", a.steps);
        eprintln!("warning: {w}");
        warnings.push(w);
    }

    let mut lattice = Vec::new();
    let mut lat_check = |check: String, x: f64, exact: f64, approx: f64| {
        let rel = rel_error(approx, exact, scale);
        lattice.push(LatticeCheck {
            check,
            x0: x,
            closed_form: exact,
            lattice: approx,
            rel_error: rel,
            pass: rel <= a.rtol,
        });
    };
    if th.x_f2.is_finite() {
        let (sf, sb) = (m.s_f(Firm::Two), m.s_b(Firm::Two));
        let sp = LatticeSpec::aligned(a.steps, horizon, x0, th.x_f2.value(), g.sigma)?;
        let lat = lattice_stopping(&sp, &g, &sf, &sb, Feasible::FREE).map_err(coarse)?;
        lat_check("follower firm 2".into(), x0, duo.follower_value(Firm::Two, x0), lat.value);
    }
    if let Threshold::Finite(xl1) = th.x_l1 {
        let (s0, sl) = (m.s0(Firm::One), m.s_l(Firm::One));
        let prob = SwitchProblem::new(s0, sl, g)?;
        for k in [0.8, 1.5] {
            let bar = k * xl1;
            let x = x0.min(0.5 * bar);
            let theta = constrained_threshold(&prob, Threshold::Finite(bar))?;
            let sp = LatticeSpec::aligned(a.steps, horizon, x, bar, g.sigma)?;
            let feas = Feasible { lo: None, hi: Some(bar) };
            let lat = lattice_stopping(&sp, &g, &s0, &sl, feas).map_err(coarse)?;
            lat_check(
                format!("leader firm 1 forced at {k} xL1"),
                x,
                prob.threshold_rule_value(theta, x),
                lat.value,
            );
        }
    }

    let dev_spec = LatticeSpec::new(a.steps, horizon, x0);
    let report = one_shot_deviation_check(&dev_spec, &duo, &cand, a.eps).map_err(coarse)?;
    let deviation = DeviationOut {
        pass: report.passed(),
        report,
    };

    let mc = McSpec { n_paths: a.paths, seed: a.seed, dt: 0.01, horizon };
    let exec = Execution::default();
    let mut monte_carlo = Vec::new();
    let mut mc_check = |check: String, exact: f64, est: McEstimate| {
        let z = if est.stderr > 0.0 { (est.mean - exact).abs() / est.stderr } else { 0.0 };
        monte_carlo.push(McCheck {
            check,
            x0,
            closed_form: exact,
            estimate: est,
            z,
            pass: est.covers(exact, a.zmax, 1e-9 * scale),
        });
    };
    if th.x_f2.is_finite() {
        let fp = SwitchProblem::new(m.s_f(Firm::Two), m.s_b(Firm::Two), g)?;
        let est = monte_carlo_switch(&fp, th.x_f2, x0, &mc, exec)?;
        mc_check("follower firm 2".into(), fp.threshold_rule_value(th.x_f2, x0), est);
    }
    let ests = monte_carlo_payoff(&duo, &cand, x0, &mc, exec)?;
    let exact = candidate_values(&duo, &cand, x0)?;
    for (i, f) in ["firm 1", "firm 2"].into_iter().enumerate() {
        mc_check(format!("equilibrium payoff {f}"), exact[i], ests[i]);
    }

    let passed = lattice.iter().all(|c| c.pass)
        && deviation.pass
        && monte_carlo.iter().all(|c| c.pass);
    let out = VerifyOut {
        steps: a.steps,
        horizon,
        paths: a.paths,
        seed: a.seed,
        rtol: a.rtol,
        zmax: a.zmax,
        x0,
        warnings,
        lattice,
        deviation,
        monte_carlo,
        passed,
    };
    Ok(Output {
        text: json(&out),
        passed,
    })
}
