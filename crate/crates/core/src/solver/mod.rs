//! Nonlinear solvers for the remainder `v = u − z`:
//!
//! `(∂ₜ² − Δ)v + |v + z|^{p−1}(v + z) = 0`, `(v, ∂ₜv)(0) = (0, 0)`,
//!
//! where `z` is a free wave (possibly frequency truncated). The nonlinearity
//! is evaluated pseudospectrally on a grid twice as fine as the Nyquist grid
//! of the retained modes and projected back onto them.

mod continuation;
mod picard;
mod strang;

pub use continuation::{continuation_solve, ContinuationOptions, ContinuationOutcome, ContinuationStatus, DifferenceRow, IntervalRecord};
pub use picard::{picard_solve, PicardOptions, PicardOutcome};
pub use strang::{
    energy_derivative_residual, integrate, solve_truncated, step_strang, Forcing, FreeWave, Integrator, NoForcing,
    SolveOptions, TrajectoryRecord, TrajectoryRow,
};

use crate::field::{oversampled_resolution, FourierField, GridValues, SpectralWorkspace, TORUS_VOLUME};
use crate::{Error, Result};

/// `s_cr = 3/2 − 2/(p−1)` and `s_min = (p−3)/(p−1)` for `p ∈ (3,5)`.
pub fn critical_exponents(p: f64) -> Result<(f64, f64)> {
    if !(p > 3.0 && p < 5.0) {
        return Err(Error::InvalidExponent(p));
    }
    Ok(critical_exponents_limit(p))
}

/// The same formulas continued to the closed range `[3,5]`; used for the
/// endpoint limits `(1/2, 0)` at `p = 3` and `(1, 1/2)` at `p = 5`.
pub fn critical_exponents_limit(p: f64) -> (f64, f64) {
    (1.5 - 2.0 / (p - 1.0), (p - 3.0) / (p - 1.0))
}

/// Validated exponent `p ∈ (3,5)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Exponent(f64);

impl Exponent {
    pub fn new(p: f64) -> Result<Self> {
        critical_exponents(p).map(|_| Self(p))
    }

    pub fn get(self) -> f64 {
        self.0
    }

    /// Strichartz pair `(2p/(p−3), 2p)`.
    pub fn strichartz_pair(self) -> (f64, f64) {
        (2.0 * self.0 / (self.0 - 3.0), 2.0 * self.0)
    }
}

/// `|u|^{p−1}u` for one value.
#[inline]
pub fn power_nonlinearity(u: f64, p: f64) -> f64 {
    if p == 4.0 {
        u * u * u * u.abs()
    } else {
        libm::pow(u.abs(), p - 1.0) * u
    }
}

#[inline]
fn abs_pow(u: f64, r: f64) -> f64 {
    if r == 5.0 {
        let a = u.abs();
        let a2 = a * a;
        a2 * a2 * a
    } else {
        libm::pow(u.abs(), r)
    }
}

/// Pointwise `|u|^{p−1}u`.
pub fn nonlinearity(values: &GridValues, p: f64) -> GridValues {
    values.map(|u| power_nonlinearity(u, p))
}

/// Parts of `E(v) = ½‖∂ₜv‖² + ½‖∇v‖² + (p+1)^{−1}‖v‖^{p+1}_{L^{p+1}}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRecord {
    pub t: f64,
    pub kinetic: f64,
    pub gradient: f64,
    pub potential: f64,
    pub total: f64,
}

/// Truncation parameter `N` of the forcing; `None` is untruncated.
pub type Truncation = Option<f64>;

/// `(t, v, ∂ₜv)` with the exponent and truncation of the run.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub t: f64,
    pub v: FourierField,
    pub vt: FourierField,
    pub p: Exponent,
    pub truncation: Truncation,
}

impl SolverState {
    /// Zero remainder at `t = 0`, as the truncated equation starts.
    pub fn zero(cutoff: usize, p: Exponent, truncation: Truncation) -> Self {
        Self { t: 0.0, v: FourierField::zeros(cutoff), vt: FourierField::zeros(cutoff), p, truncation }
    }

    pub fn cutoff(&self) -> usize {
        self.v.cutoff()
    }

    /// `‖(v, ∂ₜv)‖_{𝓗¹} = (‖v‖²_{H¹} + ‖∂ₜv‖²_{L²})^{1/2}`.
    pub fn h1_norm(&self) -> f64 {
        libm::hypot(self.v.sobolev_norm(1.0), self.vt.l2_norm())
    }

    /// `‖(v − w, ∂ₜv − ∂ₜw)‖_{𝓗¹}`.
    pub fn h1_distance(&self, other: &Self) -> f64 {
        libm::hypot((&self.v - &other.v).sobolev_norm(1.0), (&self.vt - &other.vt).l2_norm())
    }

    pub fn is_finite(&self) -> bool {
        self.v.coeffs().iter().chain(self.vt.coeffs()).all(|c| c.re.is_finite() && c.im.is_finite())
    }
}

/// Pseudospectral evaluation of `|w|^{p−1}w` on the oversampled grid.
#[derive(Debug, Clone)]
pub(crate) struct NonlinearGrid {
    pub cutoff: usize,
    pub p: f64,
    workspace: SpectralWorkspace,
}

impl NonlinearGrid {
    pub fn new(cutoff: usize, p: f64) -> Self {
        let workspace = SpectralWorkspace::new(oversampled_resolution(cutoff)).expect("oversampled resolution is a power of two");
        Self { cutoff, p, workspace }
    }

    pub fn samples(&mut self, field: &FourierField) -> Result<GridValues> {
        self.workspace.synthesize(field)
    }

    /// `P_M(|w|^{p−1}w)`.
    pub fn force(&mut self, w: &FourierField) -> Result<FourierField> {
        let p = self.p;
        for z in self.workspace.synthesize_buffer(w)?.iter_mut() {
            z.re = power_nonlinearity(z.re, p);
        }
        self.workspace.analyze_buffer(self.cutoff)
    }

    pub fn potential_from(&self, grid: &GridValues) -> f64 {
        let p1 = self.p + 1.0;
        grid.integrate(|u| abs_pow(u, p1)) / p1
    }
}

/// Energy of `(v, ∂ₜv)`; the potential uses the oversampled rectangle rule.
pub fn energy(state: &SolverState) -> Result<EnergyRecord> {
    let mut grid = NonlinearGrid::new(state.cutoff(), state.p.get());
    let samples = grid.samples(&state.v)?;
    Ok(energy_with_samples(state, &grid, &samples))
}

pub(crate) fn energy_with_samples(state: &SolverState, grid: &NonlinearGrid, v_samples: &GridValues) -> EnergyRecord {
    let kinetic = 0.5 * { let n = state.vt.l2_norm(); n * n };
    let gradient = 0.5 * TORUS_VOLUME * state.v.weighted_power(|k2| k2);
    let potential = if state.v.is_zero() { 0.0 } else { grid.potential_from(v_samples) };
    EnergyRecord { t: state.t, kinetic, gradient, potential, total: kinetic + gradient + potential }
}

/// Parameters of `t* = c (‖(v₀,v₁)‖_{𝓗¹} + K)^{−γ}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalTimeRule {
    pub c: f64,
    /// Defaults to `2(p−1)/(5−p)`.
    pub gamma: Option<f64>,
}

impl Default for LocalTimeRule {
    fn default() -> Self {
        Self { c: 0.1, gamma: None }
    }
}

/// `γ = 2(p−1)/(5−p)`, from `t*^{(5−p)/2} R^{p−1} ≪ 1` with `R ∼ ‖(v₀,v₁)‖_{𝓗¹}`.
pub fn default_gamma(p: f64) -> f64 {
    2.0 * (p - 1.0) / (5.0 - p)
}

/// Local existence time `min(c · max(h1_norm + K, 1)^{−γ}, 1)`.
pub fn local_time(h1_norm: f64, k: f64, c: f64, p: f64) -> f64 {
    local_time_with(h1_norm, k, LocalTimeRule { c, gamma: None }, p)
}

pub fn local_time_with(h1_norm: f64, k: f64, rule: LocalTimeRule, p: f64) -> f64 {
    let gamma = rule.gamma.unwrap_or_else(|| default_gamma(p));
    let base = (h1_norm + k).max(1.0);
    (rule.c * libm::pow(base, -gamma)).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    #[test]
    fn critical_exponent_examples() {
        let (scr, smin) = critical_exponents(4.0).unwrap();
        assert_relative_eq!(scr, 5.0 / 6.0, epsilon = 1e-15);
        assert_relative_eq!(smin, 1.0 / 3.0, epsilon = 1e-15);
        assert_eq!(critical_exponents_limit(3.0), (0.5, 0.0));
        assert_eq!(critical_exponents_limit(5.0), (1.0, 0.5));
        assert_eq!(critical_exponents(5.0), Err(Error::InvalidExponent(5.0)));
        assert_eq!(critical_exponents(2.5), Err(Error::InvalidExponent(2.5)));
        for i in 1..100 {
            let p = 3.0 + 0.02 * i as f64;
            let (scr, smin) = critical_exponents(p).unwrap();
            assert!(smin < scr);
        }
    }

    #[test]
    fn nonlinearity_examples() {
        let g = GridValues::new(2, alloc::vec![0.0, -1.0, 2.0, 0.5, -2.0, 1.0, 0.0, 0.0]).unwrap();
        let out = nonlinearity(&g, 4.0);
        assert_eq!(&out.values()[..3], &[0.0, -1.0, 16.0]);
        assert_eq!(out.values()[4], -16.0);
        assert_eq!(nonlinearity(&g, 3.7).values()[1], -1.0);
        assert_relative_eq!(power_nonlinearity(2.0, 3.5), libm::pow(2.0, 3.5), max_relative = 1e-15);
    }

    #[test]
    fn energy_examples() {
        let p = Exponent::new(4.0).unwrap();
        let zero = SolverState::zero(3, p, None);
        let e = energy(&zero).unwrap();
        assert_eq!((e.kinetic, e.gradient, e.potential, e.total), (0.0, 0.0, 0.0, 0.0));

        let mut s = SolverState::zero(15, p, None);
        s.v = FourierField::single_mode(15, [1, 0, 0], 1.0, 0.0);
        let e = energy(&s).unwrap();
        assert_relative_eq!(e.gradient, 2.0 * PI * PI * PI, max_relative = 1e-13);
        assert_relative_eq!(e.potential, 128.0 * PI * PI / 75.0, max_relative = 1e-7);
        assert_relative_eq!(e.total, 2.0 * PI * PI * PI + 128.0 * PI * PI / 75.0, max_relative = 1e-8);
        assert_relative_eq!(e.total, 78.8567, epsilon = 1e-4);

        let mut s = SolverState::zero(2, p, None);
        s.vt = FourierField::constant(2, 3.0);
        let e = energy(&s).unwrap();
        assert_relative_eq!(e.kinetic, 4.5 * TORUS_VOLUME, max_relative = 1e-14);
        assert_relative_eq!(e.kinetic, 1116.0, epsilon = 0.5);
    }

    #[test]
    fn local_time_examples() {
        assert_eq!(local_time(0.0, 0.0, 0.1, 4.0), 0.1);
        assert_eq!(local_time(0.0, 0.0, 3.0, 4.0), 1.0);
        assert_relative_eq!(local_time(4.0, 6.0, 0.1, 4.0), 1e-7, max_relative = 1e-12);
        let a = local_time(3.0, 2.0, 0.1, 3.5);
        let b = local_time(6.0, 4.0, 0.1, 3.5);
        assert_relative_eq!(a / b, libm::pow(2.0, default_gamma(3.5)), max_relative = 1e-12);
        let custom = local_time_with(9.0, 1.0, LocalTimeRule { c: 0.5, gamma: Some(1.0) }, 4.0);
        assert_relative_eq!(custom, 0.05, max_relative = 1e-14);
    }
}
