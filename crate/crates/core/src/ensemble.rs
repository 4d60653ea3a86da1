//! Monte Carlo experiments over the randomization.
//!
//! Every sample is keyed by `(master_seed, sample_index)` and computed
//! independently, so a [`Runner`] may evaluate samples in any order or in
//! parallel; results are always assembled in index order before reduction.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::field::{japanese, oversampled_resolution, CauchyPair, FourierField, SpectralWorkspace};
use crate::lp::{project_leq, time_norm};
use crate::propagator::{free_position, tilde_free_evolve};
use crate::randomize::{draw_randomized_pair, RandomLaw, SeedSpec};
use crate::solver::{continuation_solve, solve_truncated, ContinuationOptions, ContinuationStatus, Exponent, SolveOptions};
use crate::stats::{linear_fit, median, wilson_interval, LinearFit, Z_95};
use crate::{Error, Result};

/// Evaluates `f(0), …, f(count−1)` and returns the results in index order.
pub trait Runner {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Evaluates samples one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Runner for Sequential {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}

/// Deterministic data `(u₀,u₁)` with every real-basis coefficient of `u₀`
/// equal to `amplitude·⟨n⟩^{−(s+3/2+δ)}` and of `u₁` equal to
/// `amplitude·⟨n⟩^{−(s+1/2+δ)}`, on `|n|_∞ ≤ cutoff`.
pub fn profile_pair(cutoff: usize, s: f64, delta: f64, amplitude: f64) -> CauchyPair {
    let field = |decay: f64| {
        FourierField::from_fn(cutoff, |n| {
            let w = amplitude * libm::pow(japanese(n), -decay);
            if n == [0, 0, 0] {
                Complex64::new(w, 0.0)
            } else if crate::field::is_half_lattice(n) {
                Complex64::new(0.5 * w, -0.5 * w)
            } else {
                Complex64::new(0.5 * w, 0.5 * w)
            }
        })
        .expect("profile coefficients are Hermitian by construction")
    };
    CauchyPair { u0: field(s + 1.5 + delta), u1: field(s + 0.5 + delta), s }
}

fn sample_pair(base: &CauchyPair, law: &RandomLaw, master_seed: u64, index: usize) -> CauchyPair {
    draw_randomized_pair(base, law, &SeedSpec::new(master_seed, index as u64))
}

/// Which free flow a statistic is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    /// `S(t)(u₀,u₁)`.
    S,
    /// `S̃(t)(u₀,u₁)`.
    STilde,
}

/// Regularity `ε` of the long-time normalization.
pub const LONG_TIME_EPSILON: f64 = 0.01;

/// `‖⟨∇⟩^σ F(t)(u₀^ω,u₁^ω)‖_{L^q_{[t0,t1]} L^r_x}` on `time_samples` equally
/// spaced times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatisticSpec {
    pub flow: Flow,
    pub q: f64,
    pub r: f64,
    pub t0: f64,
    pub t1: f64,
    pub time_samples: usize,
    pub derivative: f64,
    pub long_time: bool,
}

impl StatisticSpec {
    /// Local-in-time statistic on `[0, T]`.
    pub fn local(flow: Flow, q: f64, r: f64, horizon: f64, time_samples: usize) -> Self {
        Self { flow, q, r, t0: 0.0, t1: horizon, time_samples, derivative: 0.0, long_time: false }
    }

    /// Statistic on the unit window `[T, T+1]`.
    pub fn long_time(flow: Flow, q: f64, r: f64, start: f64, time_samples: usize) -> Self {
        Self { flow, q, r, t0: start, t1: start + 1.0, time_samples, derivative: 0.0, long_time: true }
    }

    pub fn with_derivative(mut self, sigma: f64) -> Self {
        self.derivative = sigma;
        self
    }

    fn times(&self) -> Vec<f64> {
        let n = self.time_samples.max(1);
        if n == 1 {
            return alloc::vec![self.t0];
        }
        (0..n).map(|i| self.t0 + (self.t1 - self.t0) * i as f64 / (n - 1) as f64).collect()
    }

    /// Squared scale `σ²` of the predicted tail `exp(−cλ²/σ²)`:
    /// `‖(u₀,u₁)‖²_{𝓗^σ}` locally, `max(1,T²)‖(u₀,u₁)‖²_{𝓗^{σ+ε}}` on `[T,T+1]`.
    pub fn tail_scale(&self, base: &CauchyPair) -> f64 {
        if self.long_time {
            let norm = base.energy_norm(self.derivative + LONG_TIME_EPSILON);
            { let t = self.t0.max(1.0); t * t * norm * norm }
        } else {
            let norm = base.energy_norm(self.derivative);
            norm * norm
        }
    }

    /// Evaluates the statistic for fixed data.
    pub fn evaluate(&self, pair: &CauchyPair) -> Result<f64> {
        if self.time_samples == 0 || !(self.t1 >= self.t0) {
            return Err(Error::InvalidArgument("statistic needs time samples and t1 >= t0"));
        }
        let mut workspace = LebesgueWorkspace::new(pair.cutoff());
        let sigma = self.derivative;
        let times = self.times();
        let norms = times
            .iter()
            .map(|&t| {
                let mut field = match self.flow {
                    Flow::S => free_position(pair, t),
                    Flow::STilde => tilde_free_evolve(pair, t),
                };
                if sigma != 0.0 {
                    field = field.map_radial(|k2| libm::pow(1.0 + k2, 0.5 * sigma));
                }
                workspace.norm(&field, self.r)
            })
            .collect::<Result<Vec<f64>>>()?;
        if norms.len() == 1 {
            return Ok(norms[0]);
        }
        time_norm(&times, &norms, self.q)
    }
}

/// Spatial `L^r` norms reusing one oversampled transform buffer.
struct LebesgueWorkspace {
    workspace: Option<SpectralWorkspace>,
    cutoff: usize,
}

impl LebesgueWorkspace {
    fn new(cutoff: usize) -> Self {
        Self { workspace: None, cutoff }
    }

    fn norm(&mut self, field: &FourierField, r: f64) -> Result<f64> {
        if r == 2.0 || field.is_zero() {
            return Ok(field.l2_norm());
        }
        let cutoff = self.cutoff;
        let ws = match &mut self.workspace {
            Some(ws) => ws,
            slot => slot.insert(SpectralWorkspace::new(oversampled_resolution(cutoff))?),
        };
        let buf = ws.synthesize_buffer(field)?;
        if r.is_infinite() {
            return Ok(buf.iter().fold(0.0f64, |m, z| m.max(z.re.abs())));
        }
        let cell = crate::field::TORUS_VOLUME / buf.len() as f64;
        let sum: f64 = buf.iter().map(|z| libm::pow(z.re.abs(), r)).sum();
        Ok(libm::pow(sum * cell, 1.0 / r))
    }
}

/// Empirical tail of a linear statistic and its Gaussian-tail fit.
#[derive(Debug, Clone, PartialEq)]
pub struct TailReport {
    pub master_seed: u64,
    pub statistic: StatisticSpec,
    /// Statistic per sample, in sample order.
    pub norms: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// Number of samples exceeding each `λ`.
    pub exceedances: Vec<usize>,
    /// Fraction of samples exceeding each `λ`.
    pub tail: Vec<f64>,
    /// `ln tail ≈ intercept + slope·λ²` over bins with at least
    /// [`MIN_BIN_EXCEEDANCES`] exceedances.
    pub fit: Option<LinearFit>,
    /// `σ²` from [`StatisticSpec::tail_scale`].
    pub scale: f64,
    pub diagnostic: Option<&'static str>,
}

impl TailReport {
    pub fn sample_count(&self) -> usize {
        self.norms.len()
    }

    /// Fitted `c` in `exp(−cλ²/σ²)`.
    pub fn fitted_c(&self) -> Option<f64> {
        self.fit.map(|f| -f.slope * self.scale)
    }
}

pub const MIN_BIN_EXCEEDANCES: usize = 10;

/// Recommended minimum sample count for a meaningful tail fit.
pub const MIN_TAIL_SAMPLES: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailOptions {
    pub samples: usize,
    pub lambda_points: usize,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self { samples: 2000, lambda_points: 40 }
    }
}

/// Samples the statistic over randomized data and fits `ln P(X > λ)` against `λ²`.
pub fn linear_tail_experiment<R: Runner>(
    base: &CauchyPair,
    law: &RandomLaw,
    statistic: &StatisticSpec,
    options: &TailOptions,
    master_seed: u64,
    runner: &R,
) -> Result<TailReport> {
    if options.samples == 0 {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    let norms = runner
        .map(options.samples, |i| statistic.evaluate(&sample_pair(base, law, master_seed, i)))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    Ok(tail_report(norms, statistic, base, options.lambda_points, master_seed))
}

/// Tail table and fit for precomputed per-sample statistics.
pub fn tail_report(norms: Vec<f64>, statistic: &StatisticSpec, base: &CauchyPair, lambda_points: usize, master_seed: u64) -> TailReport {
    let scale = statistic.tail_scale(base);
    let mut report = TailReport {
        master_seed,
        statistic: *statistic,
        norms,
        lambda_grid: Vec::new(),
        exceedances: Vec::new(),
        tail: Vec::new(),
        fit: None,
        scale,
        diagnostic: None,
    };
    let n = report.norms.len();
    let max = report.norms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = report.norms.iter().copied().fold(f64::INFINITY, f64::min);
    let mid = median(&report.norms);
    let lo = if mid > 0.0 { mid } else { report.norms.iter().copied().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min) };
    if n < 2 || !(max > min) || !(lo.is_finite() && lo > 0.0 && max > lo) || lambda_points < 2 {
        report.diagnostic = Some("degenerate sample: all statistics equal or too few samples; fit skipped");
        return report;
    }
    let ratio = max / lo;
    report.lambda_grid = (0..lambda_points).map(|k| lo * libm::pow(ratio, k as f64 / (lambda_points - 1) as f64)).collect();
    report.exceedances = report.lambda_grid.iter().map(|&l| report.norms.iter().filter(|&&x| x > l).count()).collect();
    report.tail = report.exceedances.iter().map(|&c| c as f64 / n as f64).collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = report
        .lambda_grid
        .iter()
        .zip(&report.exceedances)
        .filter(|(_, &c)| c >= MIN_BIN_EXCEEDANCES)
        .map(|(&l, &c)| (l * l, libm::log(c as f64 / n as f64)))
        .unzip();
    report.fit = linear_fit(&xs, &ys);
    if report.fit.is_none() {
        report.diagnostic = Some("fewer than three populated tail bins; fit skipped");
    } else if n < MIN_TAIL_SAMPLES {
        report.diagnostic = Some("fewer than 500 samples; tail fit is unreliable");
    }
    report
}

/// Sup-in-time energy of one truncated run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRow {
    pub sample: usize,
    pub n: f64,
    /// `sup_{t ≤ T} E(v_N)`, absent when the run blew up.
    pub sup_energy: Option<f64>,
    pub blow_up_at: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySummary {
    pub n: f64,
    pub max: f64,
    pub median: f64,
    pub flagged: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub master_seed: u64,
    /// Ordered by sample, then by truncation.
    pub rows: Vec<EnergyRow>,
    pub per_n: Vec<EnergySummary>,
    /// `max_N / min_N` of the per-`N` medians.
    pub spread: f64,
    /// Median sup-energy against `ln N`.
    pub trend: Option<LinearFit>,
}

impl EnergyReport {
    pub fn blow_ups(&self) -> usize {
        self.rows.iter().filter(|r| r.blow_up_at.is_some()).count()
    }

    /// Whether the medians grow with `N` at one-sided 95% confidence.
    pub fn growth_detected(&self) -> bool {
        self.trend.is_some_and(|f| f.slope_significantly_positive())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyOptions {
    pub truncations: Vec<f64>,
    pub horizon: f64,
    pub samples: usize,
    pub solve: SolveOptions,
}

/// `sup_{t≤T} E(v_N^ω)` for every `(sample, N)`.
pub fn uniform_energy_experiment<R: Runner>(
    base: &CauchyPair,
    law: &RandomLaw,
    p: Exponent,
    options: &EnergyOptions,
    master_seed: u64,
    runner: &R,
) -> Result<EnergyReport> {
    let nn = options.truncations.len();
    if nn == 0 || options.samples == 0 {
        return Err(Error::InvalidArgument("energy experiment needs truncations and samples"));
    }
    let solve = SolveOptions { keep_states: false, ..options.solve };
    let rows = runner
        .map(options.samples * nn, |task| {
            let (sample, n) = (task / nn, options.truncations[task % nn]);
            let pair = sample_pair(base, law, master_seed, sample);
            match solve_truncated(&pair, Some(n), p, options.horizon, &solve) {
                Ok(rec) => Ok(EnergyRow { sample, n, sup_energy: Some(rec.sup_energy()), blow_up_at: None }),
                Err(Error::BlowUp { t }) => Ok(EnergyRow { sample, n, sup_energy: None, blow_up_at: Some(t) }),
                Err(e) => Err(e),
            }
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let per_n: Vec<EnergySummary> = options
        .truncations
        .iter()
        .map(|&n| {
            let values: Vec<f64> = rows.iter().filter(|r| r.n == n).filter_map(|r| r.sup_energy).collect();
            let flagged = rows.iter().filter(|r| r.n == n && r.blow_up_at.is_some()).count();
            EnergySummary { n, max: values.iter().copied().fold(0.0, f64::max), median: median(&values), flagged }
        })
        .collect();
    let medians: Vec<f64> = per_n.iter().map(|s| s.median).collect();
    let (lo, hi) = medians.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &m| (lo.min(m), hi.max(m)));
    let spread = if lo > 0.0 { hi / lo } else if hi == 0.0 { 1.0 } else { f64::INFINITY };
    let logs: Vec<f64> = per_n.iter().map(|s| libm::log(s.n)).collect();
    let trend = linear_fit(&logs, &medians);
    Ok(EnergyReport { master_seed, rows, per_n, spread, trend })
}

/// Event thresholds for `Ω₁` and `Ω₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventOptions {
    pub horizon: f64,
    /// Length of the intervals `I_k` partitioning `[0, T]`.
    pub tstar: f64,
    /// Time nodes per interval `I_k`, endpoints included.
    pub nodes_per_interval: usize,
    pub prefactors: Vec<f64>,
    /// Failure probability `ε` in `M ∼ T^{(p−3)/p}(ln 1/ε)^{1/2}‖(u₀,u₁)‖_{𝓗^α}`.
    pub epsilon: f64,
    /// Derivative order `α` in `Ω₁`; defaults to `s/2`.
    pub alpha: Option<f64>,
    pub samples: usize,
}

/// Normalized event statistics of one sample: an event at prefactor `c`
/// holds when the ratio is at most `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSample {
    pub sample: usize,
    /// `‖⟨∇⟩^α z‖_{L^{2p/(p−3)}_T L^{2p}} / M`.
    pub omega1_ratio: f64,
    /// `max_k ‖z‖_{L^{2p/(p−3)}_{I_k} L^{2p}} / (K|I_k|^β)`.
    pub omega3_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventFrequency {
    pub prefactor: f64,
    pub omega1: f64,
    pub omega3: f64,
    pub both: f64,
    pub omega1_ci: (f64, f64),
    pub omega3_ci: (f64, f64),
    pub both_ci: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventReport {
    pub master_seed: u64,
    pub alpha: f64,
    pub beta: f64,
    /// `M` of `Ω₁` at unit prefactor.
    pub m_threshold: f64,
    /// `K = ‖(u₀,u₁)‖_{𝓗⁰}`.
    pub k: f64,
    pub samples: Vec<EventSample>,
    pub frequencies: Vec<EventFrequency>,
}

impl EventReport {
    /// Frequencies are nondecreasing along increasing prefactors.
    pub fn is_monotone(&self) -> bool {
        let mut rows: Vec<&EventFrequency> = self.frequencies.iter().collect();
        rows.sort_by(|a, b| a.prefactor.total_cmp(&b.prefactor));
        rows.windows(2).all(|w| w[1].omega1 >= w[0].omega1 && w[1].omega3 >= w[0].omega3 && w[1].both >= w[0].both)
    }
}

fn interval_nodes(horizon: f64, tstar: f64, per: usize) -> Vec<(f64, f64, Vec<f64>)> {
    let count = libm::floor(horizon / tstar) as usize;
    (0..=count)
        .filter_map(|k| {
            let a = k as f64 * tstar;
            let b = ((k + 1) as f64 * tstar).min(horizon);
            if b - a <= 1e-12 * horizon {
                return None;
            }
            Some((a, b, (0..per).map(|i| a + (b - a) * i as f64 / (per - 1) as f64).collect()))
        })
        .collect()
}

/// Frequencies of `Ω₁`, `Ω₃` and `Ω₁ ∩ Ω₃` over the prefactor grid.
///
/// `Ω₃` requires the bound on every interval `I_k`.
pub fn event_frequency_experiment<R: Runner>(
    base: &CauchyPair,
    law: &RandomLaw,
    p: Exponent,
    options: &EventOptions,
    master_seed: u64,
    runner: &R,
) -> Result<EventReport> {
    if options.samples == 0 || !(options.horizon > 0.0) || !(options.tstar > 0.0) || options.nodes_per_interval < 2 {
        return Err(Error::InvalidArgument("event experiment needs samples, T > 0, t* > 0 and two nodes per interval"));
    }
    if !(options.epsilon > 0.0 && options.epsilon < 1.0) {
        return Err(Error::InvalidArgument("epsilon must lie in (0,1)"));
    }
    let pv = p.get();
    let (q, r) = p.strichartz_pair();
    let alpha = options.alpha.unwrap_or(0.5 * base.s);
    let beta = (pv - 3.0) / (4.0 * pv);
    let k = base.energy_norm(0.0);
    let m_threshold =
        libm::pow(options.horizon, (pv - 3.0) / pv) * libm::sqrt(libm::log(1.0 / options.epsilon)) * base.energy_norm(alpha);
    let intervals = interval_nodes(options.horizon, options.tstar, options.nodes_per_interval);
    let mut all_times: Vec<f64> = intervals.iter().flat_map(|(_, _, t)| t.iter().copied()).collect();
    all_times.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * options.horizon.max(1.0));

    let samples = runner
        .map(options.samples, |i| -> Result<EventSample> {
            let pair = sample_pair(base, law, master_seed, i);
            let mut ws = LebesgueWorkspace::new(pair.cutoff());
            let z_norm = |ws: &mut LebesgueWorkspace, t: f64| ws.norm(&free_position(&pair, t), r);
            let mut deriv = Vec::with_capacity(all_times.len());
            for &t in &all_times {
                let z = free_position(&pair, t).map_radial(|k2| libm::pow(1.0 + k2, 0.5 * alpha));
                deriv.push(ws.norm(&z, r)?);
            }
            let a = time_norm(&all_times, &deriv, q)?;
            let mut worst = 0.0f64;
            for (t0, t1, nodes) in &intervals {
                let norms = nodes.iter().map(|&t| z_norm(&mut ws, t)).collect::<Result<Vec<_>>>()?;
                let b = time_norm(nodes, &norms, q)?;
                worst = worst.max(b / (k * libm::pow(t1 - t0, beta)));
            }
            Ok(EventSample { sample: i, omega1_ratio: a / m_threshold, omega3_ratio: worst })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let n = samples.len();
    let frequencies = options
        .prefactors
        .iter()
        .map(|&c| {
            let e1 = samples.iter().filter(|s| s.omega1_ratio <= c).count();
            let e3 = samples.iter().filter(|s| s.omega3_ratio <= c).count();
            let both = samples.iter().filter(|s| s.omega1_ratio <= c && s.omega3_ratio <= c).count();
            EventFrequency {
                prefactor: c,
                omega1: e1 as f64 / n as f64,
                omega3: e3 as f64 / n as f64,
                both: both as f64 / n as f64,
                omega1_ci: wilson_interval(e1, n, Z_95),
                omega3_ci: wilson_interval(e3, n, Z_95),
                both_ci: wilson_interval(both, n, Z_95),
            }
        })
        .collect();
    Ok(EventReport { master_seed, alpha, beta, m_threshold, k, samples, frequencies })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceOptions {
    pub truncations: Vec<f64>,
    pub horizon: f64,
    /// Time samples for the linear norms over `[0, T]`.
    pub time_samples: usize,
    /// Also compute `‖z − z_N‖_{L^{2p/(p−3)}_T L^{2p}}` (needs grid transforms).
    pub strichartz: bool,
    /// Run the nonlinear continuation and record `w_N(T)`.
    pub nonlinear: Option<ContinuationOptions>,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceSample {
    pub sample: usize,
    /// `‖z − z_N‖_{L^∞_T L²}` per truncation.
    pub linear: Vec<f64>,
    pub linear_strichartz: Option<Vec<f64>>,
    /// `w_N` at the last time reached, per truncation.
    pub nonlinear: Option<Vec<f64>>,
    pub status: Option<ContinuationStatus>,
    /// Fitted `α̂ = −slope` of `ln‖z − z_N‖_{L^∞_T L²}` against `ln N`.
    pub linear_alpha: Option<f64>,
    pub nonlinear_alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub master_seed: u64,
    pub truncations: Vec<f64>,
    pub samples: Vec<ConvergenceSample>,
    /// Fit of the per-`N` medians of the linear differences.
    pub linear_fit: Option<LinearFit>,
    pub linear_alpha_median: Option<f64>,
    pub nonlinear_fit: Option<LinearFit>,
    pub nonlinear_alpha_median: Option<f64>,
    /// Every difference vanished: the data is band-limited below `N_min`.
    pub exact: bool,
}

fn log_log_fit(ns: &[f64], values: &[f64]) -> Option<LinearFit> {
    if values.iter().any(|&v| !(v > 0.0)) {
        return None;
    }
    let x: Vec<f64> = ns.iter().map(|&n| libm::log(n)).collect();
    let y: Vec<f64> = values.iter().map(|&v| libm::log(v)).collect();
    linear_fit(&x, &y)
}

fn median_alpha(values: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = values.flatten().collect();
    (!v.is_empty()).then(|| median(&v))
}

fn column_medians(rows: &[&Vec<f64>], len: usize) -> Vec<f64> {
    (0..len).map(|j| median(&rows.iter().map(|r| r[j]).collect::<Vec<_>>())).collect()
}

/// Decay of `z − z_N` and of `w_N = ‖(v − v_N)(T)‖_{𝓗¹}` in `N`.
pub fn convergence_experiment<R: Runner>(
    base: &CauchyPair,
    law: &RandomLaw,
    p: Exponent,
    options: &ConvergenceOptions,
    master_seed: u64,
    runner: &R,
) -> Result<ConvergenceReport> {
    let ns = &options.truncations;
    if ns.len() < 3 || ns.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidArgument("convergence study needs at least three ascending truncations"));
    }
    if options.samples == 0 || options.time_samples < 2 || !(options.horizon > 0.0) {
        return Err(Error::InvalidArgument("convergence study needs samples, T > 0 and two time samples"));
    }
    let (q, r) = p.strichartz_pair();
    let times: Vec<f64> = (0..options.time_samples).map(|i| options.horizon * i as f64 / (options.time_samples - 1) as f64).collect();
    let samples = runner
        .map(options.samples, |i| -> Result<ConvergenceSample> {
            let pair = sample_pair(base, law, master_seed, i);
            let mut ws = LebesgueWorkspace::new(pair.cutoff());
            let mut linear = Vec::with_capacity(ns.len());
            let mut strich = Vec::with_capacity(ns.len());
            for &n in ns {
                let tail = pair.map(|f| f - &project_leq(f, n));
                let l2: Vec<f64> = times.iter().map(|&t| free_position(&tail, t).l2_norm()).collect();
                linear.push(l2.iter().copied().fold(0.0, f64::max));
                if options.strichartz {
                    let norms = times.iter().map(|&t| ws.norm(&free_position(&tail, t), r)).collect::<Result<Vec<_>>>()?;
                    strich.push(time_norm(&times, &norms, q)?);
                }
            }
            let (nonlinear, status) = match &options.nonlinear {
                Some(opts) => {
                    let out = continuation_solve(&pair, p, options.horizon, ns, opts)?;
                    (Some(out.final_differences().iter().map(|d| d.w).collect::<Vec<f64>>()), Some(out.status))
                }
                None => (None, None),
            };
            Ok(ConvergenceSample {
                sample: i,
                linear_alpha: log_log_fit(ns, &linear).map(|f| -f.slope),
                nonlinear_alpha: nonlinear.as_deref().and_then(|w| log_log_fit(ns, w)).map(|f| -f.slope),
                linear,
                linear_strichartz: options.strichartz.then_some(strich),
                nonlinear,
                status,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;

    let exact = samples.iter().all(|s| s.linear.iter().all(|&v| v == 0.0) && s.nonlinear.as_ref().is_none_or(|w| w.iter().all(|&v| v == 0.0)));
    let linear_rows: Vec<&Vec<f64>> = samples.iter().map(|s| &s.linear).collect();
    let linear_fit = log_log_fit(ns, &column_medians(&linear_rows, ns.len()));
    let nonlinear_rows: Vec<&Vec<f64>> = samples.iter().filter_map(|s| s.nonlinear.as_ref()).collect();
    let nonlinear_fit = if nonlinear_rows.is_empty() { None } else { log_log_fit(ns, &column_medians(&nonlinear_rows, ns.len())) };
    Ok(ConvergenceReport {
        master_seed,
        truncations: ns.clone(),
        linear_alpha_median: median_alpha(samples.iter().map(|s| s.linear_alpha)),
        nonlinear_alpha_median: median_alpha(samples.iter().map(|s| s.nonlinear_alpha)),
        samples,
        linear_fit,
        nonlinear_fit,
        exact,
    })
}
