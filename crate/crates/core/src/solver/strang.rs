use alloc::vec::Vec;

use super::{energy_with_samples, EnergyRecord, Exponent, NonlinearGrid, SolverState, Truncation};
use crate::field::{CauchyPair, FourierField, GridValues};
use crate::lp::{grid_lebesgue_norm, project_leq, time_norm};
use crate::propagator::{free_evolve, free_position};
use crate::{Error, Result};

/// Space-time forcing `z(t)` entering the remainder equation.
pub trait Forcing: Sync {
    fn cutoff(&self) -> usize;

    fn at(&self, t: f64) -> FourierField;

    fn is_zero(&self) -> bool {
        false
    }
}

/// `z(t) = S(t)(P_{≤N}u₀, P_{≤N}u₁)`, evaluated exactly mode by mode.
#[derive(Debug, Clone, PartialEq)]
pub struct FreeWave {
    data: CauchyPair,
}

impl FreeWave {
    pub fn new(pair: &CauchyPair, truncation: Truncation) -> Self {
        let data = match truncation {
            Some(n) => pair.map(|f| project_leq(f, n)),
            None => pair.clone(),
        };
        Self { data }
    }

    pub fn data(&self) -> &CauchyPair {
        &self.data
    }
}

impl Forcing for FreeWave {
    fn cutoff(&self) -> usize {
        self.data.cutoff()
    }

    fn at(&self, t: f64) -> FourierField {
        free_position(&self.data, t)
    }

    fn is_zero(&self) -> bool {
        self.data.u0.is_zero() && self.data.u1.is_zero()
    }
}

/// `z ≡ 0`: the remainder equation becomes the defocusing wave equation itself.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoForcing {
    pub cutoff: usize,
}

impl Forcing for NoForcing {
    fn cutoff(&self) -> usize {
        self.cutoff
    }

    fn at(&self, _t: f64) -> FourierField {
        FourierField::zeros(self.cutoff)
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// Strang splitting: half kick with `F(v + z)`, exact free flow, half kick.
///
/// The closing kick of one step and the opening kick of the next see the
/// same `(t, v)`, so the force is evaluated once per step.
pub struct Integrator<'a> {
    state: SolverState,
    forcing: &'a dyn Forcing,
    grid: NonlinearGrid,
    cached_force: Option<FourierField>,
}

impl<'a> Integrator<'a> {
    pub fn new(state: SolverState, forcing: &'a dyn Forcing) -> Result<Self> {
        if forcing.cutoff() != state.cutoff() {
            return Err(Error::CutoffMismatch(state.cutoff(), forcing.cutoff()));
        }
        let grid = NonlinearGrid::new(state.cutoff(), state.p.get());
        Ok(Self { state, forcing, grid, cached_force: None })
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    pub fn into_state(self) -> SolverState {
        self.state
    }

    fn force_now(&mut self) -> Result<FourierField> {
        if self.forcing.is_zero() {
            if self.state.v.is_zero() {
                return Ok(FourierField::zeros(self.state.cutoff()));
            }
            return self.grid.force(&self.state.v);
        }
        let mut w = self.forcing.at(self.state.t);
        w.axpy(1.0, &self.state.v);
        self.grid.force(&w)
    }

    pub fn step(&mut self, dt: f64) -> Result<()> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument("time step must be positive"));
        }
        let opening = match self.cached_force.take() {
            Some(f) => f,
            None => self.force_now()?,
        };
        self.state.vt.axpy(-0.5 * dt, &opening);
        let pair = CauchyPair { u0: core::mem::replace(&mut self.state.v, FourierField::zeros(0)), u1: core::mem::replace(&mut self.state.vt, FourierField::zeros(0)), s: 1.0 };
        let moved = free_evolve(&pair, dt);
        self.state.v = moved.u0;
        self.state.vt = moved.u1;
        self.state.t += dt;
        let closing = self.force_now()?;
        self.state.vt.axpy(-0.5 * dt, &closing);
        if !self.state.is_finite() {
            return Err(Error::BlowUp { t: self.state.t });
        }
        self.cached_force = Some(closing);
        Ok(())
    }

    /// Advances by `steps` equal steps covering `duration`.
    pub fn advance(&mut self, duration: f64, steps: usize) -> Result<()> {
        let dt = duration / steps as f64;
        for _ in 0..steps {
            self.step(dt)?;
        }
        Ok(())
    }
}

/// One Strang step of size `dt`.
pub fn step_strang(state: &SolverState, forcing: &dyn Forcing, dt: f64) -> Result<SolverState> {
    let mut integ = Integrator::new(state.clone(), forcing)?;
    integ.step(dt)?;
    Ok(integ.into_state())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub dt_max: f64,
    /// Steps between recorded rows (the final time is always recorded).
    pub record_stride: usize,
    /// Keep full states at the recorded times.
    pub keep_states: bool,
    /// Record the `L^{2p}` norms; when false only energies are recorded and
    /// the norm columns hold zero.
    pub lebesgue_norms: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { dt_max: 1e-2, record_stride: 1, keep_states: false, lebesgue_norms: true }
    }
}

/// Diagnostics at one recorded time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub energy: EnergyRecord,
    /// `‖v(t)‖_{L^{2p}}`.
    pub v_l2p: f64,
    /// `‖z(t)‖_{L^{2p}}`.
    pub z_l2p: f64,
    /// `‖(v + z)(t)‖_{L^{2p}}`.
    pub sum_l2p: f64,
}

/// Recorded rows, optional states, and `L^{2p/(p−3)}_t L^{2p}_x` norms of
/// `v`, `z`, `v + z` accumulated over the rows.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub p: Exponent,
    pub truncation: Truncation,
    pub dt: f64,
    pub rows: Vec<TrajectoryRow>,
    pub states: Vec<SolverState>,
    /// State at the end of the run.
    pub last: SolverState,
    pub strichartz_v: f64,
    pub strichartz_z: f64,
    pub strichartz_sum: f64,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.energy.t).collect()
    }

    pub fn sup_energy(&self) -> f64 {
        self.rows.iter().fold(0.0f64, |m, r| m.max(r.energy.total))
    }

}

fn record_row(state: &SolverState, forcing: &dyn Forcing, grid: &mut NonlinearGrid, norms: bool) -> Result<TrajectoryRow> {
    let p = state.p.get();
    let v_samples = grid.samples(&state.v)?;
    let energy = energy_with_samples(state, grid, &v_samples);
    if !norms {
        return Ok(TrajectoryRow { energy, v_l2p: 0.0, z_l2p: 0.0, sum_l2p: 0.0 });
    }
    let (z_l2p, sum_l2p) = if forcing.is_zero() {
        (0.0, grid_lebesgue_norm(v_samples.values(), 2.0 * p))
    } else {
        let z = grid.samples(&forcing.at(state.t))?;
        let sum: Vec<f64> = v_samples.values().iter().zip(z.values()).map(|(a, b)| a + b).collect();
        (grid_lebesgue_norm(z.values(), 2.0 * p), grid_lebesgue_norm(&sum, 2.0 * p))
    };
    Ok(TrajectoryRow { energy, v_l2p: grid_lebesgue_norm(v_samples.values(), 2.0 * p), z_l2p, sum_l2p })
}

/// Integrates from `initial` over `[t0, t0 + duration]` against `forcing`.
pub fn integrate(initial: SolverState, forcing: &dyn Forcing, duration: f64, options: &SolveOptions) -> Result<TrajectoryRecord> {
    if !(duration > 0.0) {
        return Err(Error::InvalidArgument("integration time must be positive"));
    }
    if !(options.dt_max > 0.0) || options.record_stride == 0 {
        return Err(Error::InvalidArgument("dt_max must be positive and record_stride nonzero"));
    }
    let steps = libm::ceil(duration / options.dt_max).max(1.0) as usize;
    let dt = duration / steps as f64;
    let (p, truncation) = (initial.p, initial.truncation);
    let mut grid = NonlinearGrid::new(initial.cutoff(), p.get());
    let mut integ = Integrator::new(initial, forcing)?;
    let mut rows = Vec::new();
    let mut states = Vec::new();
    let t0 = integ.state().t;
    // Stamps come from the step count so accumulated round-off cannot reorder them.
    let mut push = |integ: &Integrator, k: usize| -> Result<()> {
        let mut row = record_row(integ.state(), forcing, &mut grid, options.lebesgue_norms)?;
        row.energy.t = t0 + k as f64 * dt;
        rows.push(row);
        if options.keep_states {
            let mut state = integ.state().clone();
            state.t = row.energy.t;
            states.push(state);
        }
        Ok(())
    };
    push(&integ, 0)?;
    for k in 1..=steps {
        integ.step(dt)?;
        if k % options.record_stride == 0 || k == steps {
            push(&integ, k)?;
        }
    }
    let times: Vec<f64> = rows.iter().map(|r| r.energy.t).collect();
    let q = p.strichartz_pair().0;
    let norm = |f: fn(&TrajectoryRow) -> f64| -> Result<f64> {
        let vals: Vec<f64> = rows.iter().map(f).collect();
        time_norm(&times, &vals, q)
    };
    let (strichartz_v, strichartz_z, strichartz_sum) = (norm(|r| r.v_l2p)?, norm(|r| r.z_l2p)?, norm(|r| r.sum_l2p)?);
    let mut last = integ.into_state();
    last.t = t0 + steps as f64 * dt;
    Ok(TrajectoryRecord { p, truncation, dt, rows, states, last, strichartz_v, strichartz_z, strichartz_sum })
}

/// Solves the truncated remainder equation with zero data on `[0, T]`,
/// forced by `z_N(t) = S(t)(P_{≤N}u₀, P_{≤N}u₁)`.
pub fn solve_truncated(
    pair: &CauchyPair,
    truncation: Truncation,
    p: Exponent,
    horizon: f64,
    options: &SolveOptions,
) -> Result<TrajectoryRecord> {
    let forcing = FreeWave::new(pair, truncation);
    integrate(SolverState::zero(pair.cutoff(), p, truncation), &forcing, horizon, options)
}

/// Largest normalized mismatch between the centered difference of the
/// recorded energy and `−∫ ∂ₜv (|v+z|^{p−1}(v+z) − |v|^{p−1}v) dx`.
pub fn energy_derivative_residual(trajectory: &TrajectoryRecord, forcing: &dyn Forcing) -> Result<f64> {
    let states = &trajectory.states;
    if states.len() < 3 || trajectory.rows.len() != states.len() {
        return Err(Error::InsufficientSamples { needed: 3, got: states.len() });
    }
    let p = trajectory.p.get();
    let mut grid = NonlinearGrid::new(states[0].cutoff(), p);
    let mut worst = 0.0f64;
    for i in 1..states.len() - 1 {
        let (e0, e1, e2) = (&trajectory.rows[i - 1].energy, &trajectory.rows[i].energy, &trajectory.rows[i + 1].energy);
        let (h1, h2) = (e1.t - e0.t, e2.t - e1.t);
        let de = -h2 / (h1 * (h1 + h2)) * e0.total + (h2 - h1) / (h1 * h2) * e1.total + h1 / (h2 * (h1 + h2)) * e2.total;
        let state = &states[i];
        let v = grid.samples(&state.v)?;
        let vt = grid.samples(&state.vt)?;
        let z = grid.samples(&forcing.at(state.t))?;
        let rhs = -integrate_power(&v, &vt, &z, p);
        worst = worst.max((de - rhs).abs() / e1.total.max(1.0));
    }
    Ok(worst)
}

fn integrate_power(v: &GridValues, vt: &GridValues, z: &GridValues, p: f64) -> f64 {
    use super::power_nonlinearity as f;
    let cell = crate::field::TORUS_VOLUME / v.values().len() as f64;
    let sum: f64 = v
        .values()
        .iter()
        .zip(vt.values())
        .zip(z.values())
        .map(|((&v, &vt), &z)| vt * (f(v + z, p) - f(v, p)))
        .sum();
    sum * cell
}
