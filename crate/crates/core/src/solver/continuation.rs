use alloc::vec::Vec;

use super::strang::{FreeWave, Integrator};
use super::{local_time_with, Exponent, LocalTimeRule, SolverState};
use crate::field::CauchyPair;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    pub rule: LocalTimeRule,
    pub dt_max: f64,
    /// Below this local time the run stops and returns what it has.
    pub min_tstar: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self { rule: LocalTimeRule::default(), dt_max: 1e-2, min_tstar: 1e-6 }
    }
}

/// One local interval `[t0, t1]` of the continuation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalRecord {
    pub t0: f64,
    pub t1: f64,
    /// Local time granted at `t0`; `t1 − t0` is smaller only on the last interval.
    pub tstar: f64,
    /// `‖(v, ∂ₜv)(t0)‖_{𝓗¹}`.
    pub h1_norm: f64,
    pub steps: usize,
}

/// `w_N(t) = ‖(v − v_N, ∂ₜv − ∂ₜv_N)(t)‖_{𝓗¹}` at one interval endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DifferenceRow {
    pub t: f64,
    pub n: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContinuationStatus {
    Completed,
    /// The local time fell below the floor at time `t`.
    Underflow { t: f64, tstar: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationOutcome {
    /// `K = ‖(u₀,u₁)‖_{𝓗⁰}`.
    pub k: f64,
    pub intervals: Vec<IntervalRecord>,
    /// `v` at `t = 0` and at every interval endpoint.
    pub endpoints: Vec<SolverState>,
    pub differences: Vec<DifferenceRow>,
    pub status: ContinuationStatus,
}

impl ContinuationOutcome {
    /// `w_N` at the last endpoint reached, one entry per truncation.
    pub fn final_differences(&self) -> Vec<DifferenceRow> {
        let t = self.endpoints.last().map_or(0.0, |s| s.t);
        self.differences.iter().copied().filter(|d| d.t == t).collect()
    }
}

/// Solves for `v` forced by the full free wave `z` on `[0, T]`, one local
/// interval at a time, and alongside it every `v_N` forced by `z_N`.
pub fn continuation_solve(
    pair: &CauchyPair,
    p: Exponent,
    horizon: f64,
    truncations: &[f64],
    options: &ContinuationOptions,
) -> Result<ContinuationOutcome> {
    if !(horizon > 0.0) || !(options.dt_max > 0.0) || !(options.min_tstar > 0.0) {
        return Err(Error::InvalidArgument("horizon, dt_max and min_tstar must be positive"));
    }
    if truncations.windows(2).any(|w| !(w[1] > w[0])) || truncations.iter().any(|&n| !(n > 0.0)) {
        return Err(Error::InvalidArgument("truncation list must be positive and ascending"));
    }
    let cutoff = pair.cutoff();
    let k = pair.energy_norm(0.0);
    let full = FreeWave::new(pair, None);
    let truncated: Vec<FreeWave> = truncations.iter().map(|&n| FreeWave::new(pair, Some(n))).collect();
    let mut main = Integrator::new(SolverState::zero(cutoff, p, None), &full)?;
    let mut followers = truncated
        .iter()
        .zip(truncations)
        .map(|(z, &n)| Integrator::new(SolverState::zero(cutoff, p, Some(n)), z))
        .collect::<Result<Vec<_>>>()?;

    let mut intervals = Vec::new();
    let mut endpoints = alloc::vec![main.state().clone()];
    let mut differences = Vec::new();
    let record = |t: f64, main: &Integrator, followers: &[Integrator], out: &mut Vec<DifferenceRow>| {
        for (f, &n) in followers.iter().zip(truncations) {
            out.push(DifferenceRow { t, n, w: main.state().h1_distance(f.state()) });
        }
    };
    record(0.0, &main, &followers, &mut differences);

    let mut t = 0.0;
    let mut status = ContinuationStatus::Completed;
    while horizon - t > 1e-12 * horizon {
        let h1 = main.state().h1_norm();
        let tstar = local_time_with(h1, k, options.rule, p.get());
        if tstar < options.min_tstar {
            status = ContinuationStatus::Underflow { t, tstar };
            break;
        }
        let len = tstar.min(horizon - t);
        let steps = libm::ceil(len / options.dt_max).max(1.0) as usize;
        main.advance(len, steps)?;
        for f in &mut followers {
            f.advance(len, steps)?;
        }
        let t1 = if tstar >= horizon - t { horizon } else { t + len };
        intervals.push(IntervalRecord { t0: t, t1, tstar, h1_norm: h1, steps });
        t = t1;
        record(t, &main, &followers, &mut differences);
        let mut end = main.state().clone();
        end.t = t;
        endpoints.push(end);
    }
    Ok(ContinuationOutcome { k, intervals, endpoints, differences, status })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FourierField;

    fn p4() -> Exponent {
        Exponent::new(4.0).unwrap()
    }

    #[test]
    fn zero_data_gives_zero_differences() {
        let out = continuation_solve(&CauchyPair::zeros(3, 0.5), p4(), 0.5, &[1.0, 2.0], &ContinuationOptions::default()).unwrap();
        assert_eq!(out.status, ContinuationStatus::Completed);
        assert!(out.differences.iter().all(|d| d.w == 0.0));
        assert!(out.endpoints.iter().all(|s| s.v.is_zero()));
        assert_eq!(out.endpoints.last().unwrap().t, 0.5);
    }

    #[test]
    fn low_frequency_data_is_untouched_by_truncation() {
        let mut u0 = FourierField::zeros(3);
        u0.set_real_mode([1, 0, 0], 0.02, 0.0);
        let pair = CauchyPair::new(u0, FourierField::zeros(3), 0.5).unwrap();
        let out = continuation_solve(&pair, p4(), 0.3, &[4.0, 8.0], &ContinuationOptions::default()).unwrap();
        assert!(out.endpoints.last().unwrap().h1_norm() > 0.0);
        assert!(out.differences.iter().all(|d| d.w == 0.0));
        let tstars: Vec<f64> = out.intervals.iter().map(|i| i.tstar).collect();
        assert!(tstars.iter().all(|&t| t == 0.1));
        assert_eq!(out.intervals.len(), 3);
    }

    #[test]
    fn large_data_underflows() {
        let u0 = FourierField::constant(2, 50.0);
        let pair = CauchyPair::new(u0, FourierField::zeros(2), 0.5).unwrap();
        let out = continuation_solve(&pair, p4(), 1.0, &[1.0], &ContinuationOptions::default()).unwrap();
        assert!(matches!(out.status, ContinuationStatus::Underflow { t, .. } if t == 0.0));
        assert!(out.intervals.is_empty());
    }
}
