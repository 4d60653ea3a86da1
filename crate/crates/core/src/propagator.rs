//! Exact free wave evolution and Duhamel integrals, mode by mode.
//!
//! Every symbol here depends on `|n|` only, so each call tabulates the
//! trigonometric factors once per distinct `|n|²` on the lattice.

use alloc::vec::Vec;

use crate::field::{CauchyPair, FourierField};
use crate::lp::TimeSample;
use crate::{Error, Result};

/// Factors of the free flow at time `t` for one value of `|n|`.
#[derive(Debug, Clone, Copy)]
struct FlowFactors {
    cos: f64,
    /// `sin(t|n|)/|n|`, `t` at `n = 0`.
    sinc: f64,
    /// `|n| sin(t|n|)`.
    ksin: f64,
    /// `⟨n⟩`.
    bracket: f64,
}

fn flow_table(cutoff: usize, t: f64) -> Vec<FlowFactors> {
    let max_k2 = 3 * cutoff * cutoff;
    (0..=max_k2)
        .map(|k2| {
            let k = libm::sqrt(k2 as f64);
            let (s, c) = libm::sincos(t * k);
            let sinc = if k2 == 0 { t } else { s / k };
            FlowFactors { cos: c, sinc, ksin: k * s, bracket: libm::sqrt(1.0 + k2 as f64) }
        })
        .collect()
}

/// `S(t)(u₀,u₁)` together with its time derivative:
/// `ĉ₀ ↦ cos(t|n|)ĉ₀ + sin(t|n|)/|n| ĉ₁`, `ĉ₁ ↦ −|n| sin(t|n|)ĉ₀ + cos(t|n|)ĉ₁`,
/// and `(ĉ₀ + tĉ₁, ĉ₁)` on the zero mode.
pub fn free_evolve(pair: &CauchyPair, t: f64) -> CauchyPair {
    let table = flow_table(pair.cutoff(), t);
    let mut u0 = pair.u0.clone();
    let mut u1 = pair.u1.clone();
    let k2s: Vec<usize> = pair.u0.norms_sq().collect();
    for ((a, b), &k2) in u0.coeffs_mut().iter_mut().zip(u1.coeffs_mut().iter_mut()).zip(k2s.iter()) {
        let f = table[k2];
        let (c0, c1) = (*a, *b);
        *a = c0 * f.cos + c1 * f.sinc;
        *b = c1 * f.cos - c0 * f.ksin;
    }
    CauchyPair { u0, u1, s: pair.s }
}

/// Position component of [`free_evolve`] only.
pub fn free_position(pair: &CauchyPair, t: f64) -> FourierField {
    let table = flow_table(pair.cutoff(), t);
    let mut out = pair.u0.clone();
    let k2s = pair.u0.norms_sq();
    for ((a, b), k2) in out.coeffs_mut().iter_mut().zip(pair.u1.coeffs().iter()).zip(k2s) {
        let f = table[k2];
        *a = *a * f.cos + b * f.sinc;
    }
    out
}

/// `S̃(t)(u₀,u₁) = −(|∇|/⟨∇⟩) sin(t|∇|)u₀ + (cos(t|∇|)/⟨∇⟩) u₁`.
pub fn tilde_free_evolve(pair: &CauchyPair, t: f64) -> FourierField {
    let table = flow_table(pair.cutoff(), t);
    let mut out = pair.u1.clone();
    let k2s = pair.u0.norms_sq();
    for ((b, a), k2) in out.coeffs_mut().iter_mut().zip(pair.u0.coeffs().iter()).zip(k2s) {
        let f = table[k2];
        *b = (*b * f.cos - a * f.ksin) / f.bracket;
    }
    out
}

/// Trapezoid weights of the samples lying in `[t0, t1]`, which must include
/// both endpoints.
fn interval_weights(forcing: &[TimeSample], t0: f64, t1: f64) -> Result<Vec<(usize, f64)>> {
    if forcing.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::NonMonotoneTimes);
    }
    let tol = 1e-12 * (1.0 + t0.abs().max(t1.abs()));
    let idx: Vec<usize> = (0..forcing.len())
        .filter(|&i| forcing[i].t >= t0 - tol && forcing[i].t <= t1 + tol)
        .collect();
    let covered = match (idx.first(), idx.last()) {
        (Some(&a), Some(&b)) => (forcing[a].t - t0).abs() <= tol && (forcing[b].t - t1).abs() <= tol,
        _ => false,
    };
    if !covered {
        return Err(Error::UncoveredInterval { t0, t1 });
    }
    if idx.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: idx.len() });
    }
    let mut weights: Vec<(usize, f64)> = idx.iter().map(|&i| (i, 0.0)).collect();
    for w in 0..idx.len() - 1 {
        let h = forcing[idx[w + 1]].t - forcing[idx[w]].t;
        weights[w].1 += 0.5 * h;
        weights[w + 1].1 += 0.5 * h;
    }
    Ok(weights)
}

/// Trapezoid approximation of the Duhamel integral
/// `∫_{t0}^{t} sin((t−t')|∇|)/|∇| f(t') dt'` (kernel `t − t'` on the zero mode)
/// and of its time derivative `∫ cos((t−t')|∇|) f(t') dt'`.
pub fn duhamel_pair(forcing: &[TimeSample], t0: f64, t: f64) -> Result<(FourierField, FourierField)> {
    let cutoff = forcing.first().map(|s| s.field.cutoff()).ok_or(Error::InsufficientSamples { needed: 2, got: 0 })?;
    if forcing.iter().any(|s| s.field.cutoff() != cutoff) {
        return Err(Error::CutoffMismatch(cutoff, forcing.iter().map(|s| s.field.cutoff()).find(|&c| c != cutoff).unwrap_or(cutoff)));
    }
    let mut pos = FourierField::zeros(cutoff);
    let mut vel = FourierField::zeros(cutoff);
    if t == t0 {
        return Ok((pos, vel));
    }
    let k2s: Vec<usize> = pos.norms_sq().collect();
    for (i, w) in interval_weights(forcing, t0, t)? {
        let table = flow_table(cutoff, t - forcing[i].t);
        let src = forcing[i].field.coeffs();
        for (j, (p, v)) in pos.coeffs_mut().iter_mut().zip(vel.coeffs_mut().iter_mut()).enumerate() {
            let f = table[k2s[j]];
            *p += src[j] * (w * f.sinc);
            *v += src[j] * (w * f.cos);
        }
    }
    Ok((pos, vel))
}

/// Position part of [`duhamel_pair`].
pub fn duhamel_increment(forcing: &[TimeSample], t0: f64, t: f64) -> Result<FourierField> {
    duhamel_pair(forcing, t0, t).map(|(p, _)| p)
}

/// Linear energy `½‖∂ₜz‖² + ½‖∇z‖²` of the nonzero modes, and the zero-mode
/// velocity term `½ĉ₁(0)²(2π)³` reported separately.
pub fn linear_energy(pair: &CauchyPair) -> (f64, f64) {
    let vol = crate::field::TORUS_VOLUME;
    let zero_vel = pair.u1.coeff([0, 0, 0]).re;
    let grad = pair.u0.weighted_power(|k2| k2);
    let kin = pair.u1.weighted_power(|k2| if k2 == 0.0 { 0.0 } else { 1.0 });
    (0.5 * vol * (grad + kin), 0.5 * vol * zero_vel * zero_vel)
}
