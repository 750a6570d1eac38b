use std::path::Path;

use hokdv_core::experiments::{
    almost_conservation_sweep, approx_truncated_sweep, high_freq_insensitivity, scaling_check, smooth_random_field,
    squeeze_witness, DataSpec, ExperimentConfig, ExperimentKind, SweepResult,
};
use hokdv_core::flow::{conservation_report, integrate, FlowSpec, Scheme};
use hokdv_core::imethod::{EnergyHierarchy, IMultiplier};
use hokdv_core::resonance::{verify_arity, ArityReport, TupleRecord};
use hokdv_core::{snapshot, Dealias, FourierField, GridSpec};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{key, ConfigError, Default as D, Key, Kind, Resolved, Schema};
use crate::output::{cell, OutDir};
use crate::RunError;

/// What a finished command reports back for the manifest.
pub struct Outcome {
    pub summary: serde_json::Value,
    /// Failed check, reported with exit status 1 after outputs are written.
    pub failure: Option<String>,
}

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub schema: Schema,
    pub run: fn(&Resolved, &mut OutDir) -> Result<Outcome, RunError>,
}

const SOLVE: &[Key] = &[
    key("j", Kind::Int, D::Required, "dispersion order; the linear term is d_x^(2j+1)"),
    key("K", Kind::Int, D::Required, "Fourier cutoff"),
    key("N", Kind::Int, D::Optional, "truncation level; selects the truncated flow when set"),
    key("mu", Kind::Float, D::Value("1.0"), "period parameter; the torus has length 2 pi mu"),
    key("dt", Kind::Float, D::Value("1e-3"), "time step"),
    key("T", Kind::Float, D::Value("1.0"), "final time, a multiple of dt"),
    key("scheme", Kind::Str, D::Value("etdrk4"), "etdrk4, lawson_rk4 or filon_midpoint"),
    key("sample_every", Kind::Int, D::Value("100"), "steps between written samples"),
    key("blowup", Kind::Float, D::Value("1e12"), "abort when a coefficient exceeds this"),
    key("input", Kind::Str, D::Optional, "initial snapshot; random smooth data when absent"),
    key("output", Kind::Str, D::Value("solve"), "file name prefix inside the output directory"),
    key("seed", Kind::Int, D::Value("0"), "seed for random initial data"),
    key("data_band", Kind::Int, D::Value("8"), "random data: highest excited mode"),
    key("data_decay", Kind::Float, D::Value("1.0"), "random data: amplitude decay rate per mode"),
    key("data_size", Kind::Float, D::Value("1.0"), "random data: norm of the initial field"),
    key("data_s", Kind::Float, D::Value("0.0"), "random data: Sobolev index of that norm"),
];

const ENERGIES: &[Key] = &[
    key("j", Kind::Int, D::Required, "dispersion order"),
    key("K", Kind::Int, D::Required, "Fourier cutoff"),
    key("N", Kind::Float, D::Required, "multiplier threshold"),
    key("s", Kind::Float, D::Value("-0.5"), "Sobolev index of the multiplier"),
    key("mu", Kind::Float, D::Value("1.0"), "period parameter"),
    key("orders", Kind::IntList, D::Value("2,3,4"), "modified energies to record"),
    key("dt", Kind::Float, D::Value("1e-4"), "time step"),
    key("T", Kind::Float, D::Value("1e-2"), "final time"),
    key("sample_every", Kind::Int, D::Value("10"), "steps between rows"),
    key("scheme", Kind::Str, D::Value("etdrk4"), "time integrator"),
    key("input", Kind::Str, D::Optional, "initial snapshot; random smooth data when absent"),
    key("seed", Kind::Int, D::Value("0"), "seed for random initial data"),
    key("data_band", Kind::Int, D::Value("8"), "random data: highest excited mode"),
    key("data_decay", Kind::Float, D::Value("1.0"), "random data: amplitude decay rate"),
    key("data_size", Kind::Float, D::Value("1.0"), "random data: norm of the initial field"),
    key("data_s", Kind::Float, D::Value("0.0"), "random data: Sobolev index of that norm"),
];

const RESONANCE: &[Key] = &[
    key("j", Kind::Int, D::Required, "dispersion order"),
    key("K", Kind::Int, D::Required, "entry bound for three-frequency tuples"),
    key("K4", Kind::Int, D::Optional, "entry bound for four-frequency tuples; default min(K, 24)"),
    key("tuples_csv", Kind::Bool, D::Value("false"), "also write every checked tuple"),
];

macro_rules! experiment_keys {
    ($($extra:expr),* $(,)?) => {
        &[
            key("j", Kind::Int, D::Required, "dispersion order"),
            key("K", Kind::Int, D::Required, "Fourier cutoff (reference grid for sweeps)"),
            key("mu", Kind::Float, D::Value("1.0"), "period parameter"),
            key("dt", Kind::Float, D::Value("1e-3"), "largest time step"),
            key("T", Kind::Float, D::Value("1.0"), "horizon"),
            key("scheme", Kind::Str, D::Value("etdrk4"), "time integrator"),
            key("seed", Kind::Int, D::Value("0"), "RNG seed"),
            key("data_band", Kind::Int, D::Value("8"), "random data: highest excited mode"),
            key("data_decay", Kind::Float, D::Value("1.0"), "random data: amplitude decay rate"),
            key("data_size", Kind::Float, D::Value("1.0"), "random data: norm of the initial field"),
            key("data_s", Kind::Float, D::Value("-0.5"), "random data: Sobolev index of that norm"),
            $($extra),*
        ]
    };
}

const N_LIST: Key = key("N_list", Kind::IntList, D::Required, "increasing truncation levels");
const SAMPLES: Key = key("samples", Kind::Int, D::Value("1"), "random initial data per level");
const FIT: Key = key("fit_threshold", Kind::Float, D::Value("0.25"), "flag fits with larger RMS log residual");

const APPROX: &[Key] = experiment_keys!(N_LIST, SAMPLES, FIT);
const TAIL: &[Key] = experiment_keys!(
    N_LIST,
    SAMPLES,
    FIT,
    key("tail_size", Kind::Float, D::Value("1.0"), "H^-1/2 size of the high-frequency tail")
);
const ALMOST: &[Key] = experiment_keys!(
    N_LIST,
    SAMPLES,
    FIT,
    key("s", Kind::Float, D::Value("-0.5"), "Sobolev index, in [-j/2, 0)")
);
const SQUEEZE: &[Key] = experiment_keys!(
    key("samples", Kind::Int, D::Value("64"), "random sphere points before the ascent"),
    key("center", Kind::Str, D::Optional, "snapshot of the ball centre; zero when absent"),
    key("R", Kind::Float, D::Value("1.0"), "ball radius in homogeneous H^-1/2"),
    key("k0", Kind::Int, D::Value("1"), "cylinder mode"),
    key("z", Kind::Pair, D::Value("0,0"), "cylinder centre, re,im"),
    key("r", Kind::Float, D::Optional, "cylinder radius; the run fails if the witness stays inside"),
    key("ascent_sweeps", Kind::Int, D::Value("200"), "coordinate ascent sweeps"),
);
const SCALING: &[Key] = experiment_keys!(
    key("s", Kind::Float, D::Value("-0.5"), "Sobolev index of the norm ratio"),
    key("mu_target", Kind::Float, D::Value("2.0"), "period parameter of the rescaled solve"),
    key("target_K", Kind::Int, D::Optional, "cutoff of the rescaled grid; default K"),
    key("mismatch_tol", Kind::Float, D::Value("1e-6"), "largest accepted L2 mismatch"),
    key("ratio_tol", Kind::Float, D::Value("1e-12"), "largest accepted relative norm-ratio error"),
);

pub const COMMANDS: &[Command] = &[
    Command { name: "solve", about: "Integrate one initial field and record conserved quantities", schema: SOLVE, run: solve },
    Command { name: "energies", about: "Modified energies along a trajectory", schema: ENERGIES, run: energies },
    Command { name: "resonance-check", about: "Exact resonance factorization over integer lattices", schema: RESONANCE, run: resonance },
    Command { name: "approx-sweep", about: "Truncated versus full flow over N", schema: APPROX, run: approx },
    Command { name: "tail-sweep", about: "Effect of a high-frequency tail on low modes over N", schema: TAIL, run: tail },
    Command { name: "almost-cons", about: "Drift of the fourth modified energy over N", schema: ALMOST, run: almost },
    Command { name: "squeeze", about: "Search for data leaving a cylinder over one mode", schema: SQUEEZE, run: squeeze },
    Command { name: "scaling-check", about: "Rescaled solve on a longer torus", schema: SCALING, run: scaling },
];

fn j_of(r: &Resolved) -> Result<u32, ConfigError> {
    let j = r.int("j").ok_or_else(|| ConfigError::Missing("j".into()))?;
    u32::try_from(j).ok().filter(|j| *j >= 1).ok_or_else(|| ConfigError::Invalid {
        key: "j".into(),
        message: format!("{j} must be a positive integer"),
    })
}

fn scheme_of(r: &Resolved) -> Result<Scheme, ConfigError> {
    let s = r.string("scheme").unwrap_or("etdrk4");
    s.parse().map_err(|_| ConfigError::Invalid {
        key: "scheme".into(),
        message: format!("unknown scheme \"{s}\"; expected etdrk4, lawson_rk4 or filon_midpoint"),
    })
}

fn data_of(r: &Resolved) -> Result<DataSpec, ConfigError> {
    Ok(DataSpec {
        band: r.require_count("data_band")?,
        decay: r.require_float("data_decay")?,
        size: r.require_float("data_size")?,
        size_s: r.require_float("data_s")?,
    })
}

fn grid_of(r: &Resolved) -> Result<GridSpec, RunError> {
    Ok(GridSpec::new(j_of(r)?, r.require_count("K")?, r.float("mu").unwrap_or(1.0), Dealias::Padded)?)
}

/// Snapshot from `path`, checked against `grid` and moved onto it.
fn load_field(path: &str, grid: &GridSpec, what: &str) -> Result<FourierField, RunError> {
    let u = snapshot::read(Path::new(path))?;
    let g = u.grid();
    if g.j() != grid.j() || g.mu() != grid.mu() {
        return Err(RunError::Config(ConfigError::Invalid {
            key: what.into(),
            message: format!("snapshot has j = {}, mu = {}; run uses j = {}, mu = {}", g.j(), g.mu(), grid.j(), grid.mu()),
        }));
    }
    if u.coeffs().iter().skip(grid.k_max()).any(|c| c.norm_sqr() > 0.0) {
        return Err(RunError::Config(ConfigError::Invalid {
            key: what.into(),
            message: format!("snapshot has modes above K = {}", grid.k_max()),
        }));
    }
    Ok(u.resample(grid)?)
}

fn initial_field(r: &Resolved, grid: GridSpec) -> Result<FourierField, RunError> {
    match r.string("input") {
        Some(p) => load_field(p, &grid, "input"),
        None => Ok(smooth_random_field(grid, &data_of(r)?, r.seed().unwrap_or(0), 0)?),
    }
}

fn flow_of(r: &Resolved, grid: GridSpec) -> Result<FlowSpec, RunError> {
    let mut spec = FlowSpec::new(grid, r.require_float("dt")?, r.require_float("T")?)?
        .with_scheme(scheme_of(r)?)
        .with_sample_every(r.require_count("sample_every")?)?;
    if let Some(b) = r.float("blowup") {
        spec.blowup = b;
    }
    if let Some(n) = r.count("N")? {
        spec = spec.truncated(n)?;
    }
    Ok(spec)
}

fn solve(r: &Resolved, out: &mut OutDir) -> Result<Outcome, RunError> {
    let grid = grid_of(r)?;
    let spec = flow_of(r, grid)?;
    let u0 = initial_field(r, grid)?;
    let traj = integrate(&u0, &spec)?;
    let prefix = r.string("output").unwrap_or("solve");
    for (i, (_, u)) in traj.samples.iter().enumerate() {
        out.write(&format!("{prefix}_{i:04}.toml"), snapshot::render(u).as_bytes())?;
    }
    let report = conservation_report(&traj);
    let rows: Vec<Vec<String>> = report
        .reports
        .iter()
        .map(|c| vec![cell(c.timestamp), cell(c.mass), cell(c.l2_energy), cell(c.hamiltonian)])
        .collect();
    out.write_csv(&format!("{prefix}_conserved.csv"), &["t", "mass", "l2_energy", "hamiltonian"], &rows)?;
    Ok(Outcome {
        summary: json!({
            "samples": traj.samples.len(),
            "steps": traj.stats.steps,
            "max_abs_mass": report.max_abs_mass,
            "energy_drift": report.energy_drift,
            "hamiltonian_drift": report.hamiltonian_drift,
        }),
        failure: None,
    })
}

fn energies(r: &Resolved, out: &mut OutDir) -> Result<Outcome, RunError> {
    let grid = grid_of(r)?;
    let orders: Vec<usize> = r.positive_counts("orders")?;
    if let Some(o) = orders.iter().find(|o| !(2..=4).contains(*o)) {
        return Err(RunError::Config(ConfigError::Invalid { key: "orders".into(), message: format!("order {o} is not one of 2, 3, 4") }));
    }
    let mult = IMultiplier::clipped(r.require_float("s")?, r.require_float("N")?)?;
    let h = EnergyHierarchy::full(mult, grid)?;
    let spec = flow_of(r, grid)?;
    let traj = integrate(&initial_field(r, grid)?, &spec)?;
    let mut header: Vec<String> = vec!["t".into()];
    header.extend(orders.iter().map(|o| format!("E{o}")));
    header.push("Lambda5M5".into());
    let mut rows = Vec::with_capacity(traj.samples.len());
    for (t, u) in &traj.samples {
        let mut row = vec![cell(*t)];
        for &o in &orders {
            row.push(cell(h.energy(u, o)?));
        }
        row.push(cell(h.drift(u, 4)?));
        rows.push(row);
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    out.write_csv("energies.csv", &header, &rows)?;
    Ok(Outcome { summary: json!({ "rows": rows.len() }), failure: None })
}

fn arity_summary(a: &ArityReport) -> serde_json::Value {
    json!({
        "n": a.n,
        "bound": a.bound,
        "tuples": a.count,
        "resonant": a.resonant,
        "failures": a.failures.len(),
        "min_ratio": a.min_ratio_f64(),
        "max_ratio": a.max_ratio_f64(),
        "constant_q": a.constant_q.as_ref().map(|q| q.to_string()),
    })
}

fn resonance(r: &Resolved, out: &mut OutDir) -> Result<Outcome, RunError> {
    let j = j_of(r)?;
    let k3 = r.int("K").unwrap_or(0);
    let k4 = r.int("K4").unwrap_or(k3.min(24));
    let reports = if r.boolean("tuples_csv").unwrap_or(false) {
        let mut w = csv::Writer::from_writer(out.begin()?);
        w.write_record(["n", "k1", "k2", "k3", "k4", "P", "Q", "ratio"])?;
        let mut err = None;
        let mut sink = |t: TupleRecord| {
            let mut rec: Vec<String> = vec![t.tuple.len().to_string()];
            rec.extend((0..4).map(|i| t.tuple.get(i).map(|k| k.to_string()).unwrap_or_default()));
            rec.extend([t.p.to_string(), t.q.to_string(), t.ratio.to_string()]);
            if let Err(e) = w.write_record(&rec) {
                err.get_or_insert(e);
            }
        };
        let a = verify_arity(j, 3, k3, Some(&mut sink))?;
        let b = verify_arity(j, 4, k4, Some(&mut sink))?;
        if let Some(e) = err {
            return Err(e.into());
        }
        let f = w.into_inner().map_err(|e| e.into_error())?;
        out.commit(f, "resonance_tuples.csv")?;
        [a, b]
    } else {
        [verify_arity(j, 3, k3, None)?, verify_arity(j, 4, k4, None)?]
    };
    let mut line = format!("j={j}");
    for a in &reports {
        line += &format!(
            "; n={} |k|<={}: {} tuples, {} resonant, {} failures",
            a.n, a.bound, a.count, a.resonant, a.failures.len()
        );
        if let Some(q) = &a.constant_q {
            line += &format!(", Q{} = {q} on every tuple", a.n);
        }
        if let (Some(lo), Some(hi)) = (a.min_ratio_f64(), a.max_ratio_f64()) {
            line += &format!(", Q/max^(2j-2) in [{lo:.6}, {hi:.6}]");
        }
    }
    println!("{line}");
    let failure = reports.iter().find(|a| !a.passed()).map(|a| match a.failures.first() {
        Some(f) => format!("n={}: {} failures, first at {:?}: {}", a.n, a.failures.len(), f.tuple, f.reason),
        None => format!("n={}: cofactor ratio not bounded away from zero", a.n),
    });
    Ok(Outcome { summary: json!({ "line": line, "gamma3": arity_summary(&reports[0]), "gamma4": arity_summary(&reports[1]) }), failure })
}

fn experiment_of(kind: ExperimentKind, r: &Resolved) -> Result<ExperimentConfig, RunError> {
    let mut c = ExperimentConfig::new(kind, j_of(r)?, r.require_count("K")?);
    c.mu = r.require_float("mu")?;
    c.dt = r.require_float("dt")?;
    c.horizon = r.require_float("T")?;
    c.scheme = scheme_of(r)?;
    c.seed = r.seed().unwrap_or(0);
    c.data = data_of(r)?;
    if r.has("N_list") {
        c.n_list = r.positive_counts("N_list")?;
    }
    if let Some(n) = r.count("samples")? {
        c.samples = n;
    }
    if let Some(v) = r.float("fit_threshold") {
        c.fit_threshold = v;
    }
    if let Some(v) = r.float("tail_size") {
        c.tail_size = v;
    }
    if let Some(v) = r.float("s") {
        c.s = v;
    }
    if let Some(v) = r.float("R") {
        c.radius = v;
    }
    if let Some(v) = r.int("k0") {
        c.k0 = v;
    }
    if let Some((re, im)) = r.pair("z") {
        c.z = Complex64::new(re, im);
    }
    if let Some(v) = r.float("r") {
        c.cylinder_radius = v;
    }
    if let Some(v) = r.count("ascent_sweeps")? {
        c.ascent_sweeps = v;
    }
    if let Some(v) = r.float("mu_target") {
        c.mu_target = v;
    }
    c.target_k = r.count("target_K")?;
    if let Some(p) = r.string("center") {
        c.center = Some(load_field(p, &c.grid()?, "center")?);
    }
    c.validate()?;
    Ok(c)
}

fn sweep_outcome(res: SweepResult, out: &mut OutDir) -> Result<Outcome, RunError> {
    out.write(&format!("{}.csv", res.kind.name()), res.to_csv().as_bytes())?;
    let failure = res.first_non_decreasing().map(|(a, b)| {
        let (ra, rb) = (&res.rows[a], &res.rows[b]);
        format!(
            "{} does not decrease from N = {} to N = {}: {:e} -> {:e}",
            res.columns[1], ra.param, rb.param, ra.value, rb.value
        )
    });
    let fit = res.fit.map(|f| json!({ "exponent": f.exponent, "intercept": f.intercept, "residual": f.residual, "flagged": f.flagged }));
    let diagnostics: serde_json::Map<String, serde_json::Value> =
        res.diagnostics.iter().map(|(k, v)| (k.clone(), json!(v))).collect();
    Ok(Outcome { summary: json!({ "values": res.values(), "fit": fit, "diagnostics": diagnostics }), failure })
}

fn approx(r: &Resolved, out: &mut OutDir) -> Result<Outcome, RunError> {
    sweep_outcome(approx_truncated_sweep(&experiment_of(ExperimentKind::ApproxSweep, r)?)?, out)
}

fn tail(r: &Resolved, out: &mut OutDir) -> Result<Outcome, RunError> {
    sweep_outcome(high_freq_insensitivity(&experiment_of(ExperimentKind::TailSweep, r)?)?, out)
}

fn almost(r: &Resolved, out: &mut OutDir) -> Result<Outcome, RunError> {
    sweep_outcome(almost_conservation_sweep(&experiment_of(ExperimentKind::AlmostConservation, r)?)?, out)
}

fn squeeze(r: &Resolved, out: &mut OutDir) -> Result<Outcome, RunError> {
    let c = experiment_of(ExperimentKind::Squeeze, r)?;
    let w = squeeze_witness(&c)?;
    let rows: Vec<Vec<String>> =
        w.history.iter().enumerate().map(|(i, v)| vec![(i + 1).to_string(), cell(*v)]).collect();
    out.write_csv("squeeze.csv", &["sweep", "best_value"], &rows)?;
    out.write("squeeze_witness.toml", snapshot::render(&w.u0).as_bytes())?;
    let failure = (c.cylinder_radius > 0.0 && w.value < c.cylinder_radius)
        .then(|| format!("witness value {} stays inside the cylinder of radius {}", w.value, c.cylinder_radius));
    Ok(Outcome {
        summary: json!({
            "value": w.value,
            "value_over_R": w.value / c.radius,
            "sample_best": w.sample_best,
            "evaluations": w.evaluations,
        }),
        failure,
    })
}

fn scaling(r: &Resolved, out: &mut OutDir) -> Result<Outcome, RunError> {
    let c = experiment_of(ExperimentKind::Scaling, r)?;
    let rep = scaling_check(&c)?;
    let rows: Vec<Vec<String>> = rep.times.iter().zip(&rep.mismatch).map(|(t, m)| vec![cell(*t), cell(*m)]).collect();
    out.write_csv("scaling-check.csv", &["t", "l2_mismatch"], &rows)?;
    let (mt, rt) = (r.require_float("mismatch_tol")?, r.require_float("ratio_tol")?);
    let failure = if rep.max_mismatch > mt {
        Some(format!("L2 mismatch {:e} exceeds {mt:e}", rep.max_mismatch))
    } else if rep.ratio_error > rt {
        Some(format!("norm ratio {} differs from {} by {:e} relative", rep.norm_ratio, rep.predicted_ratio, rep.ratio_error))
    } else {
        None
    };
    Ok(Outcome {
        summary: json!({
            "lambda": rep.lambda,
            "max_mismatch": rep.max_mismatch,
            "norm_ratio": rep.norm_ratio,
            "predicted_ratio": rep.predicted_ratio,
            "ratio_error": rep.ratio_error,
        }),
        failure,
    })
}
