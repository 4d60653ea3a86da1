use alloc::vec::Vec;

use super::{NonlinearGrid, SolverState};
use super::strang::Forcing;
use crate::field::CauchyPair;
use crate::lp::TimeSample;
use crate::propagator::{duhamel_pair, free_evolve};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardOptions {
    /// Number of equal subintervals; the iterates live on `steps + 1` nodes.
    pub steps: usize,
    /// Stop once successive iterates differ by at most `tol · max(1, ‖v‖)` in `𝓗¹`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self { steps: 32, tol: 1e-10, max_iter: 50 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    /// Converged iterate at the nodes, starting with the initial state.
    pub states: Vec<SolverState>,
    pub iterations: usize,
    /// `sup_t ‖v^k − v^{k−1}‖_{𝓗¹}` for `k = 1, 2, ...`.
    pub distances: Vec<f64>,
}

impl PicardOutcome {
    /// Ratios of successive distances.
    pub fn contraction_factors(&self) -> Vec<f64> {
        self.distances.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Fixed point of `v ↦ S(t−t₀)(v₀,v₁) − ∫_{t₀}^t sin((t−t')|∇|)/|∇| F(v+z)(t') dt'`
/// on `[t₀, t₀ + duration]`, starting from the free evolution.
///
/// Fails with [`Error::NonContraction`] when the distances stop decreasing
/// or the iteration budget runs out; the caller should shrink the interval.
pub fn picard_solve(initial: &SolverState, forcing: &dyn Forcing, duration: f64, options: &PicardOptions) -> Result<PicardOutcome> {
    if forcing.cutoff() != initial.cutoff() {
        return Err(Error::CutoffMismatch(initial.cutoff(), forcing.cutoff()));
    }
    if !(duration > 0.0) || options.steps == 0 || options.max_iter == 0 {
        return Err(Error::InvalidArgument("Picard iteration needs a positive duration, steps and max_iter"));
    }
    let mut grid = NonlinearGrid::new(initial.cutoff(), initial.p.get());
    let t0 = initial.t;
    let h = duration / options.steps as f64;
    let times: Vec<f64> = (0..=options.steps).map(|i| t0 + i as f64 * h).collect();
    let data = CauchyPair { u0: initial.v.clone(), u1: initial.vt.clone(), s: 1.0 };
    let free: Vec<CauchyPair> = times.iter().map(|&t| free_evolve(&data, t - t0)).collect();
    let z: Vec<_> = times.iter().map(|&t| forcing.at(t)).collect();

    let at_nodes = |pairs: &[CauchyPair]| -> Vec<SolverState> {
        pairs
            .iter()
            .zip(&times)
            .map(|(pair, &t)| SolverState { t, v: pair.u0.clone(), vt: pair.u1.clone(), p: initial.p, truncation: initial.truncation })
            .collect()
    };
    let mut current = at_nodes(&free);
    let mut distances: Vec<f64> = Vec::new();
    for k in 1..=options.max_iter {
        let sources = current
            .iter()
            .zip(&z)
            .map(|(s, z)| {
                let mut w = z.clone();
                w.axpy(1.0, &s.v);
                grid.force(&w).map(|field| TimeSample { t: s.t, field })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut next = Vec::with_capacity(current.len());
        for (i, &t) in times.iter().enumerate() {
            let mut pair = free[i].clone();
            if i > 0 {
                let (pos, vel) = duhamel_pair(&sources[..=i], t0, t)?;
                pair.u0.axpy(-1.0, &pos);
                pair.u1.axpy(-1.0, &vel);
            }
            next.push(SolverState { t, v: pair.u0, vt: pair.u1, p: initial.p, truncation: initial.truncation });
        }
        let d = next.iter().zip(&current).map(|(a, b)| a.h1_distance(b)).fold(0.0f64, f64::max);
        let scale = next.iter().map(SolverState::h1_norm).fold(1.0f64, f64::max);
        if !d.is_finite() || next.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonContraction { factor: f64::INFINITY, iterations: k });
        }
        let previous = distances.last().copied();
        distances.push(d);
        current = next;
        if d <= options.tol * scale {
            return Ok(PicardOutcome { states: current, iterations: k, distances });
        }
        if let Some(prev) = previous {
            if d >= prev {
                return Err(Error::NonContraction { factor: d / prev, iterations: k });
            }
        }
    }
    let factor = match distances.as_slice() {
        [.., a, b] => b / a,
        _ => f64::NAN,
    };
    Err(Error::NonContraction { factor, iterations: options.max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FourierField;
    use crate::solver::strang::{FreeWave, Integrator};
    use crate::solver::Exponent;

    fn forcing(amp: f64) -> FreeWave {
        let mut u0 = FourierField::zeros(2);
        u0.set_real_mode([1, 0, 0], amp, 0.0);
        u0.set_real_mode([0, 1, -1], 0.0, 0.5 * amp);
        let u1 = FourierField::constant(2, 0.2 * amp);
        FreeWave::new(&CauchyPair::new(u0, u1, 1.0).unwrap(), None)
    }

    #[test]
    fn agrees_with_strang_for_small_data() {
        let p = Exponent::new(4.0).unwrap();
        let z = forcing(0.3);
        let state = SolverState::zero(2, p, None);
        let out = picard_solve(&state, &z, 0.1, &PicardOptions { steps: 64, ..Default::default() }).unwrap();
        assert!(out.contraction_factors().iter().all(|&f| f < 1.0));
        let mut integ = Integrator::new(state, &z).unwrap();
        integ.advance(0.1, 64).unwrap();
        let last = out.states.last().unwrap();
        let scale = last.h1_norm();
        assert!(scale > 0.0);
        assert!(last.h1_distance(integ.state()) < 1e-3 * scale, "{} vs {}", last.h1_distance(integ.state()), scale);
    }

    #[test]
    fn large_interval_fails_to_contract() {
        let p = Exponent::new(4.0).unwrap();
        let z = forcing(40.0);
        let state = SolverState::zero(2, p, None);
        let err = picard_solve(&state, &z, 2.0, &PicardOptions { steps: 16, tol: 1e-12, max_iter: 30 }).unwrap_err();
        assert!(matches!(err, Error::NonContraction { .. }));
    }

    #[test]
    fn rejects_bad_arguments() {
        let p = Exponent::new(4.0).unwrap();
        let z = forcing(1.0);
        assert!(picard_solve(&SolverState::zero(3, p, None), &z, 0.1, &PicardOptions::default()).is_err());
        assert!(picard_solve(&SolverState::zero(2, p, None), &z, 0.0, &PicardOptions::default()).is_err());
    }
}
