//! Subcommand implementations. Each writes its declared files into the
//! output directory and returns an error carrying the exit code.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use supwave_core::ensemble::{
    convergence_experiment, event_frequency_experiment, linear_tail_experiment, profile_pair, uniform_energy_experiment, ConvergenceOptions,
    EnergyOptions, EventOptions, Flow, Runner, StatisticSpec, TailOptions,
};
use supwave_core::field::oversampled_resolution;
use supwave_core::lp::{bernstein_ratio, grid_lebesgue_norm, lp_sobolev_ratio, DyadicDecomposition};
use supwave_core::randomize::{draw_randomized_pair, SeedSpec};
use supwave_core::solver::{solve_truncated, ContinuationOptions, Exponent, SolveOptions};
use supwave_core::stats::LinearFit;
use supwave_core::{synthesize, CauchyPair};

use crate::cli::{Cli, Command, Experiment, FlowName, Resolved};
use crate::config::{DataSpec, RunConfig};
use crate::error::CliError;
use crate::output::{fmt17, num, CsvWriter, NdjsonWriter, OutputDir, Provenance};
use crate::runner::PoolRunner;
use crate::snapshot::{read_pair, write_fields, write_pair};

/// Largest cutoff used for the random fields of `lp-check`.
const LP_CHECK_CUTOFF: usize = 6;
const LP_CHECK_REGULARITIES: [f64; 4] = [0.0, 0.3, 0.6, 0.9];
const BERNSTEIN_PAIRS: [(f64, f64); 4] = [(2.0, 4.0), (2.0, 8.0), (4.0, 8.0), (2.0, f64::INFINITY)];
const BERNSTEIN_LEVELS: [f64; 2] = [2.0, 4.0];
const BERNSTEIN_BOUND: f64 = 10.0;
const TELESCOPING_TOL: f64 = 1e-12;
const PARSEVAL_TOL: f64 = 1e-10;

/// Everything a command needs besides its own flags.
pub struct Context {
    pub config: RunConfig,
    pub provenance: Provenance,
    pub out: OutputDir,
    pub runner: PoolRunner,
    /// Directory that relative data paths are resolved against.
    pub data_root: Option<PathBuf>,
}

impl Context {
    pub fn new(resolved: Resolved, data_root: Option<PathBuf>) -> Result<Self, CliError> {
        let config = resolved.parsed.config;
        let out = OutputDir::new(&resolved.output_dir).map_err(|e| CliError::io(&resolved.output_dir, e))?;
        let runner = PoolRunner::new(resolved.workers).map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
        Ok(Self { provenance: Provenance::of(&config), config, out, runner, data_root })
    }

    fn exponent(&self) -> Result<Exponent, CliError> {
        Ok(Exponent::new(self.config.p)?)
    }

    fn csv(&self, name: &str, header: &[&str]) -> Result<(CsvWriter<io::BufWriter<File>>, PathBuf), CliError> {
        let path = self.out.path(name);
        let file = self.out.create(name).map_err(|e| CliError::io(&path, e))?;
        Ok((CsvWriter::new(file, &self.provenance, header).map_err(|e| CliError::io(&path, e))?, path))
    }

    fn ndjson(&self, name: &str, kind: &str) -> Result<(NdjsonWriter<io::BufWriter<File>>, PathBuf), CliError> {
        let path = self.out.path(name);
        let file = self.out.create(name).map_err(|e| CliError::io(&path, e))?;
        Ok((NdjsonWriter::new(file, &self.provenance, kind).map_err(|e| CliError::io(&path, e))?, path))
    }

    /// Deterministic data, padded to the solver cutoff.
    pub fn base_pair(&self) -> Result<CauchyPair, CliError> {
        let m = self.config.cutoff();
        let pair = match &self.config.data {
            DataSpec::Profile { delta, amplitude, cutoff } => profile_pair(cutoff.unwrap_or(m), self.config.s, *delta, *amplitude),
            DataSpec::File { path } => {
                let path = match &self.data_root {
                    Some(root) if Path::new(path).is_relative() => root.join(path),
                    _ => PathBuf::from(path),
                };
                let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
                let (pair, _) = read_pair(BufReader::new(file), self.config.s).map_err(|source| CliError::Snapshot { path: path.clone(), source })?;
                if pair.cutoff() > m {
                    return Err(CliError::Usage(format!(
                        "data in {} has cutoff {} above the solver cutoff {m} of resolution {}",
                        path.display(),
                        pair.cutoff(),
                        self.config.resolution
                    )));
                }
                pair
            }
        };
        Ok(pair.map(|f| f.with_cutoff(m)))
    }

    fn sample(&self, base: &CauchyPair, index: u64) -> CauchyPair {
        draw_randomized_pair(base, &self.config.law.law(), &SeedSpec::new(self.config.seed, index))
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |e| CliError::io(path, e)
}

/// Prints a JSON warning record on standard error.
pub fn warn(message: &str) {
    eprintln!("{}", json!({"record": "warning", "message": message}));
}

fn fit_json(fit: &Option<LinearFit>) -> Value {
    match fit {
        Some(f) => json!({
            "slope": num(f.slope),
            "intercept": num(f.intercept),
            "r_squared": num(f.r_squared),
            "slope_std_error": num(f.slope_std_error),
            "points": f.points,
        }),
        None => Value::Null,
    }
}

fn opt_num(x: Option<f64>) -> Value {
    x.map_or(Value::Null, num)
}

/// Parses arguments already split by clap and runs the command, returning
/// the process exit code. Errors are reported on standard error.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(()) => crate::error::EXIT_OK,
        Err(e) => {
            eprintln!("{}", e.record());
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    let resolved = crate::cli::resolve(&cli.overrides)?;
    for w in &resolved.parsed.warnings {
        warn(w);
    }
    let data_root = cli.overrides.config.as_ref().and_then(|p| p.parent()).map(Path::to_path_buf);
    let ctx = Context::new(resolved, data_root)?;
    match cli.command {
        Command::Randomize { sample } => randomize(&ctx, sample),
        Command::Evolve { sample, truncation, record_every, deterministic } => evolve(&ctx, sample, truncation, record_every, deterministic),
        Command::Ensemble { experiment: Experiment::Energy, record_every } => energy(&ctx, record_every),
        Command::Ensemble { experiment: Experiment::Events, .. } => events(&ctx),
        Command::LpCheck => lp_check(&ctx),
        Command::Converge { linear_only, strichartz, time_samples } => converge(&ctx, linear_only, strichartz, time_samples),
        Command::Tail { flow, q, r, time_samples, long_time, derivative, lambda_points } => {
            let flow = match flow {
                FlowName::S => Flow::S,
                FlowName::STilde => Flow::STilde,
            };
            let spec = if long_time {
                StatisticSpec::long_time(flow, q, r, ctx.config.horizon, time_samples)
            } else {
                StatisticSpec::local(flow, q, r, ctx.config.horizon, time_samples)
            };
            tail(&ctx, &spec.with_derivative(derivative), lambda_points)
        }
    }
}

fn randomize(ctx: &Context, snapshot_sample: u64) -> Result<(), CliError> {
    let base = ctx.base_pair()?;
    let s = ctx.config.s;
    let (mut csv, path) = ctx.csv("randomize.csv", &["sample", "u0_l2", "u0_hs", "u1_hs_minus_1", "energy_norm_0", "energy_norm_s"])?;
    let rows = ctx.runner.map(ctx.config.samples, |i| {
        let pair = ctx.sample(&base, i as u64);
        [pair.u0.l2_norm(), pair.u0.sobolev_norm(s), pair.u1.sobolev_norm(s - 1.0), pair.energy_norm(0.0), pair.energy_norm(s)]
    });
    for (i, r) in rows.iter().enumerate() {
        let mut cells = vec![i.to_string()];
        cells.extend(r.iter().map(|&x| fmt17(x)));
        csv.row(&cells).map_err(io_err(&path))?;
    }
    csv.finish().map_err(io_err(&path))?;
    let name = format!("randomized_{snapshot_sample}.swf");
    let path = ctx.out.path(&name);
    let pair = ctx.sample(&base, snapshot_sample);
    let mut file = ctx.out.create(&name).map_err(io_err(&path))?;
    write_pair(&mut file, &pair, &format!("{} sample={snapshot_sample}", ctx.provenance.line())).map_err(io_err(&path))?;
    file.flush().map_err(io_err(&path))
}

fn evolve(ctx: &Context, sample: u64, truncation: Option<f64>, record_every: usize, deterministic: bool) -> Result<(), CliError> {
    if record_every == 0 {
        return Err(CliError::Usage("--record-every must be at least 1".into()));
    }
    let base = ctx.base_pair()?;
    let pair = if deterministic { base } else { ctx.sample(&base, sample) };
    let options = SolveOptions { dt_max: ctx.config.effective_dt_max(), record_stride: record_every, keep_states: false, lebesgue_norms: true };
    let record = solve_truncated(&pair, truncation, ctx.exponent()?, ctx.config.horizon, &options)?;
    let (mut csv, path) = ctx.csv("evolve.csv", &["t", "kinetic", "gradient", "potential", "total", "v_l2p", "z_l2p", "sum_l2p"])?;
    for r in &record.rows {
        let e = r.energy;
        csv.numbers(&[e.t, e.kinetic, e.gradient, e.potential, e.total, r.v_l2p, r.z_l2p, r.sum_l2p]).map_err(io_err(&path))?;
    }
    csv.finish().map_err(io_err(&path))?;
    let name = "evolve_final.swf";
    let path = ctx.out.path(name);
    let mut file = ctx.out.create(name).map_err(io_err(&path))?;
    let label = format!("{} sample={sample} t={} fields=v,dv/dt", ctx.provenance.line(), fmt17(record.last.t));
    write_fields(&mut file, &[&record.last.v, &record.last.vt], &label).map_err(io_err(&path))?;
    file.flush().map_err(io_err(&path))
}

fn energy(ctx: &Context, record_every: usize) -> Result<(), CliError> {
    if record_every == 0 {
        return Err(CliError::Usage("--record-every must be at least 1".into()));
    }
    let c = &ctx.config;
    let options = EnergyOptions {
        truncations: c.truncations.clone(),
        horizon: c.horizon,
        samples: c.samples,
        solve: SolveOptions { dt_max: c.effective_dt_max(), record_stride: record_every, keep_states: false, lebesgue_norms: false },
    };
    let report = uniform_energy_experiment(&ctx.base_pair()?, &c.law.law(), ctx.exponent()?, &options, c.seed, &ctx.runner)?;
    let (mut nd, path) = ctx.ndjson("energy.ndjson", "energy")?;
    for r in &report.rows {
        nd.record(&json!({
            "record": "sample",
            "seed": c.seed,
            "sample": r.sample,
            "N": num(r.n),
            "sup_energy": opt_num(r.sup_energy),
            "blow_up_at": opt_num(r.blow_up_at),
        }))
        .map_err(io_err(&path))?;
    }
    nd.record(&json!({
        "record": "summary",
        "seed": c.seed,
        "samples": c.samples,
        "spread": num(report.spread),
        "trend": fit_json(&report.trend),
        "growth_detected": report.growth_detected(),
        "blow_ups": report.blow_ups(),
    }))
    .map_err(io_err(&path))?;
    nd.finish().map_err(io_err(&path))?;
    let (mut csv, path) = ctx.csv("energy_summary.csv", &["N", "median_sup_energy", "max_sup_energy", "flagged"])?;
    for s in &report.per_n {
        csv.row(&[fmt17(s.n), fmt17(s.median), fmt17(s.max), s.flagged.to_string()]).map_err(io_err(&path))?;
    }
    csv.finish().map_err(io_err(&path))?;
    if report.blow_ups() > 0 {
        warn(&format!("{} run(s) blew up; they are flagged in energy.ndjson", report.blow_ups()));
    }
    Ok(())
}

fn events(ctx: &Context) -> Result<(), CliError> {
    let c = &ctx.config;
    let ev = &c.events;
    let options = EventOptions {
        horizon: c.horizon,
        tstar: ev.tstar,
        nodes_per_interval: ev.nodes_per_interval,
        prefactors: ev.prefactors.clone(),
        epsilon: ev.epsilon,
        alpha: ev.alpha,
        samples: c.samples,
    };
    let report = event_frequency_experiment(&ctx.base_pair()?, &c.law.law(), ctx.exponent()?, &options, c.seed, &ctx.runner)?;
    let (mut nd, path) = ctx.ndjson("events.ndjson", "events")?;
    for s in &report.samples {
        nd.record(&json!({
            "record": "sample",
            "seed": c.seed,
            "sample": s.sample,
            "omega1_ratio": num(s.omega1_ratio),
            "omega3_ratio": num(s.omega3_ratio),
        }))
        .map_err(io_err(&path))?;
    }
    nd.record(&json!({
        "record": "summary",
        "seed": c.seed,
        "alpha": num(report.alpha),
        "beta": num(report.beta),
        "m_threshold": num(report.m_threshold),
        "K": num(report.k),
        "monotone": report.is_monotone(),
    }))
    .map_err(io_err(&path))?;
    nd.finish().map_err(io_err(&path))?;
    let header = ["prefactor", "omega1", "omega1_lo", "omega1_hi", "omega3", "omega3_lo", "omega3_hi", "both", "both_lo", "both_hi"];
    let (mut csv, path) = ctx.csv("events.csv", &header)?;
    for f in &report.frequencies {
        csv.numbers(&[f.prefactor, f.omega1, f.omega1_ci.0, f.omega1_ci.1, f.omega3, f.omega3_ci.0, f.omega3_ci.1, f.both, f.both_ci.0, f.both_ci.1])
            .map_err(io_err(&path))?;
    }
    csv.finish().map(drop).map_err(io_err(&path))
}

struct CheckRow {
    check: &'static str,
    sample: usize,
    param: String,
    value: f64,
    bound: String,
    pass: bool,
}

fn lp_check(ctx: &Context) -> Result<(), CliError> {
    let m = ctx.config.cutoff().min(LP_CHECK_CUTOFF);
    let base = profile_pair(m, ctx.config.s, 0.01, 1.0);
    let top = DyadicDecomposition::covering_level(m);
    let per_sample = ctx.runner.map(ctx.config.samples, |i| -> Result<Vec<CheckRow>, CliError> {
        let field = ctx.sample(&base, i as u64).u0;
        let mut rows = Vec::new();
        for s in LP_CHECK_REGULARITIES {
            let ratio = lp_sobolev_ratio(&field, s)?;
            rows.push(CheckRow { check: "lp_sobolev", sample: i, param: format!("s={s}"), value: ratio, bound: "0.25..4".into(), pass: (0.25..=4.0).contains(&ratio) });
        }
        for n in BERNSTEIN_LEVELS {
            for (p, q) in BERNSTEIN_PAIRS {
                let ratio = bernstein_ratio(&field, n, p, q)?;
                rows.push(CheckRow {
                    check: "bernstein",
                    sample: i,
                    param: format!("N={n} p={p} q={q}"),
                    value: ratio,
                    bound: format!("<={BERNSTEIN_BOUND}"),
                    pass: ratio <= BERNSTEIN_BOUND,
                });
            }
        }
        let sum = DyadicDecomposition::new(&field, top).sum().expect("at least one dyadic block");
        let gap = sum.max_abs_diff(&field);
        rows.push(CheckRow { check: "telescoping", sample: i, param: format!("J={top}"), value: gap, bound: format!("<={TELESCOPING_TOL:e}"), pass: gap <= TELESCOPING_TOL });
        let l2 = field.l2_norm();
        let samples = synthesize(&field, oversampled_resolution(m))?;
        let grid = grid_lebesgue_norm(samples.values(), 2.0);
        let rel = (grid - l2).abs() / l2;
        rows.push(CheckRow { check: "parseval", sample: i, param: "r=2".into(), value: rel, bound: format!("<={PARSEVAL_TOL:e}"), pass: rel <= PARSEVAL_TOL });
        Ok(rows)
    });
    let (mut csv, path) = ctx.csv("lp_check.csv", &["check", "sample", "param", "value", "bound", "pass"])?;
    let mut failed = 0;
    for rows in per_sample {
        for r in rows? {
            failed += usize::from(!r.pass);
            csv.row(&[r.check.into(), r.sample.to_string(), r.param, fmt17(r.value), r.bound, r.pass.to_string()]).map_err(io_err(&path))?;
        }
    }
    csv.finish().map_err(io_err(&path))?;
    if failed > 0 {
        return Err(CliError::ChecksFailed { failed });
    }
    Ok(())
}

fn converge(ctx: &Context, linear_only: bool, strichartz: bool, time_samples: usize) -> Result<(), CliError> {
    let c = &ctx.config;
    let nonlinear = (!linear_only).then(|| ContinuationOptions { rule: c.tstar.rule(), dt_max: c.effective_dt_max(), min_tstar: c.tstar.min });
    let options = ConvergenceOptions { truncations: c.truncations.clone(), horizon: c.horizon, time_samples, strichartz, nonlinear, samples: c.samples };
    let report = convergence_experiment(&ctx.base_pair()?, &c.law.law(), ctx.exponent()?, &options, c.seed, &ctx.runner)?;
    let list = |v: &Option<Vec<f64>>| v.as_ref().map_or(Value::Null, |v| Value::Array(v.iter().map(|&x| num(x)).collect()));
    let (mut nd, path) = ctx.ndjson("converge.ndjson", "converge")?;
    for s in &report.samples {
        let status = match s.status {
            None => Value::Null,
            Some(supwave_core::solver::ContinuationStatus::Completed) => json!({"completed": true}),
            Some(supwave_core::solver::ContinuationStatus::Underflow { t, tstar }) => json!({"completed": false, "t": num(t), "tstar": num(tstar)}),
        };
        nd.record(&json!({
            "record": "sample",
            "seed": c.seed,
            "sample": s.sample,
            "N": report.truncations.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            "linear": s.linear.iter().map(|&x| num(x)).collect::<Vec<_>>(),
            "linear_strichartz": list(&s.linear_strichartz),
            "nonlinear": list(&s.nonlinear),
            "status": status,
            "linear_alpha": opt_num(s.linear_alpha),
            "nonlinear_alpha": opt_num(s.nonlinear_alpha),
        }))
        .map_err(io_err(&path))?;
    }
    nd.record(&json!({
        "record": "summary",
        "seed": c.seed,
        "linear_fit": fit_json(&report.linear_fit),
        "linear_alpha_median": opt_num(report.linear_alpha_median),
        "nonlinear_fit": fit_json(&report.nonlinear_fit),
        "nonlinear_alpha_median": opt_num(report.nonlinear_alpha_median),
        "exact": report.exact,
    }))
    .map_err(io_err(&path))?;
    nd.finish().map_err(io_err(&path))?;
    let (mut csv, path) = ctx.csv("converge.csv", &["N", "median_linear", "median_nonlinear"])?;
    for (k, &n) in report.truncations.iter().enumerate() {
        let lin: Vec<f64> = report.samples.iter().map(|s| s.linear[k]).collect();
        let nl: Vec<f64> = report.samples.iter().filter_map(|s| s.nonlinear.as_ref().map(|v| v[k])).collect();
        let nl_med = if nl.is_empty() { f64::NAN } else { supwave_core::stats::median(&nl) };
        csv.numbers(&[n, supwave_core::stats::median(&lin), nl_med]).map_err(io_err(&path))?;
    }
    csv.finish().map(drop).map_err(io_err(&path))
}

fn tail(ctx: &Context, spec: &StatisticSpec, lambda_points: usize) -> Result<(), CliError> {
    let c = &ctx.config;
    let base = ctx.base_pair()?;
    let options = TailOptions { samples: c.samples, lambda_points };
    let report = linear_tail_experiment(&base, &c.law.law(), spec, &options, c.seed, &ctx.runner)?;
    let (mut nd, path) = ctx.ndjson("tail.ndjson", "tail")?;
    for (i, &x) in report.norms.iter().enumerate() {
        nd.record(&json!({"record": "sample", "seed": c.seed, "sample": i, "norm": num(x)})).map_err(io_err(&path))?;
    }
    nd.record(&json!({
        "record": "summary",
        "seed": c.seed,
        "samples": report.sample_count(),
        "scale": num(report.scale),
        "fit": fit_json(&report.fit),
        "fitted_c": opt_num(report.fitted_c()),
        "diagnostic": report.diagnostic,
    }))
    .map_err(io_err(&path))?;
    nd.finish().map_err(io_err(&path))?;
    let (mut csv, path) = ctx.csv("tail.csv", &["lambda", "exceedances", "tail"])?;
    for k in 0..report.lambda_grid.len() {
        csv.row(&[fmt17(report.lambda_grid[k]), report.exceedances[k].to_string(), fmt17(report.tail[k])]).map_err(io_err(&path))?;
    }
    csv.finish().map_err(io_err(&path))?;
    if let Some(d) = report.diagnostic {
        warn(d);
    }
    Ok(())
}
