//! Littlewood-Paley projections and Lebesgue/mixed norms.

use alloc::vec::Vec;

use crate::field::{oversampled_resolution, synthesize, FourierField, TORUS_VOLUME};
use crate::{Error, Result};

#[inline]
fn psi(x: f64) -> f64 {
    if x > 0.0 {
        libm::exp(-1.0 / x)
    } else {
        0.0
    }
}

/// Smooth radial cutoff: `1` on `[0,1]`, `0` on `[2,∞)`, and
/// `ψ(2−r)/(ψ(2−r)+ψ(r−1))` in between with `ψ(x) = e^{−1/x}`.
pub fn bump(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let (a, b) = (psi(2.0 - r), psi(r - 1.0));
        a / (a + b)
    }
}

/// Symbol of `P_{≤N}` at `|n|² = k2`.
#[inline]
pub(crate) fn leq_symbol(k2: f64, n: f64) -> f64 {
    bump(libm::sqrt(k2) / n)
}

/// `P_{≤N}`: multiplies `ĉ(n)` by `φ₀(|n|/N)`.
pub fn project_leq(field: &FourierField, n: f64) -> FourierField {
    field.map_radial(|k2| leq_symbol(k2, n))
}

/// Symbol of `P_j` at `|n|² = k2` (`P_{≤2^{-1}} = 0`).
fn dyadic_symbol(k2: f64, j: u32) -> f64 {
    let hi = leq_symbol(k2, libm::ldexp(1.0, j as i32));
    if j == 0 {
        hi
    } else {
        hi - leq_symbol(k2, libm::ldexp(1.0, j as i32 - 1))
    }
}

/// `P_j = P_{≤2^j} − P_{≤2^{j−1}}` with `P_{≤2^{−1}} = 0`.
pub fn project_dyadic(field: &FourierField, j: u32) -> FourierField {
    field.map_radial(|k2| dyadic_symbol(k2, j))
}

/// Blocks `P_0 u, …, P_J u`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicDecomposition {
    pub blocks: Vec<FourierField>,
}

impl DyadicDecomposition {
    pub fn new(field: &FourierField, top: u32) -> Self {
        Self { blocks: (0..=top).map(|j| project_dyadic(field, j)).collect() }
    }

    /// Smallest `J` with `P_{≤2^J} u = u` for every field of this cutoff.
    pub fn covering_level(cutoff: usize) -> u32 {
        let max_norm = libm::sqrt(3.0) * cutoff as f64;
        let mut j = 0;
        while libm::ldexp(1.0, j as i32) < max_norm {
            j += 1;
        }
        j
    }

    pub fn sum(&self) -> Option<FourierField> {
        let mut iter = self.blocks.iter();
        let mut acc = iter.next()?.clone();
        for b in iter {
            acc.axpy(1.0, b);
        }
        Some(acc)
    }
}

/// `(Σ_j 2^{2js} ‖P_j u‖²_{L²}) / ‖u‖²_{H^s}`.
pub fn lp_sobolev_ratio(field: &FourierField, s: f64) -> Result<f64> {
    let denom = field.sobolev_norm(s);
    if denom == 0.0 {
        return Err(Error::ZeroField);
    }
    let top = DyadicDecomposition::covering_level(field.cutoff());
    let numer: f64 = DyadicDecomposition::new(field, top)
        .blocks
        .iter()
        .enumerate()
        .map(|(j, b)| libm::pow(2.0, 2.0 * j as f64 * s) * { let n = b.sobolev_norm(0.0); n * n })
        .sum();
    Ok(numer / (denom * denom))
}

/// `‖u‖_{L^r}` by the rectangle rule on `resolution³` points (default: twice
/// the Nyquist grid). `r = ∞` is the grid maximum; `r = 2` uses Parseval,
/// which the rectangle rule reproduces exactly on band-limited data.
pub fn lebesgue_norm(field: &FourierField, r: f64, resolution: Option<usize>) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::InvalidArgument("Lebesgue exponent must be >= 1"));
    }
    if field.is_zero() {
        return Ok(0.0);
    }
    let resolution = resolution.unwrap_or_else(|| oversampled_resolution(field.cutoff()));
    if r == 2.0 {
        // Still validate the grid so r = 2 fails exactly like other exponents.
        if resolution < 2 * field.cutoff() + 2 {
            return Err(Error::Aliasing { resolution, cutoff: field.cutoff() });
        }
        return Ok(field.l2_norm());
    }
    let grid = synthesize(field, resolution)?;
    Ok(grid_lebesgue_norm(grid.values(), r))
}

/// `L^r` norm of grid samples covering the torus.
pub fn grid_lebesgue_norm(values: &[f64], r: f64) -> f64 {
    if r.is_infinite() {
        return values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    }
    let cell = TORUS_VOLUME / values.len() as f64;
    let sum: f64 = values.iter().map(|v| libm::pow(v.abs(), r)).sum();
    libm::pow(sum * cell, 1.0 / r)
}

/// `‖P_{≤N}u‖_{L^q} / (N^{3/p−3/q} ‖P_{≤N}u‖_{L^p})`.
pub fn bernstein_ratio(field: &FourierField, n: f64, p: f64, q: f64) -> Result<f64> {
    if !(1.0 <= p && p <= q) {
        return Err(Error::InvalidArgument("Bernstein ratio needs 1 <= p <= q"));
    }
    // The symbol vanishes for |n| >= 2N, so a smaller box holds P_{≤N}u.
    let support = (libm::ceil(2.0 * n) as usize).min(field.cutoff());
    let projected = project_leq(field, n).with_cutoff(support);
    if projected.is_zero() {
        return Err(Error::ZeroField);
    }
    let res = oversampled_resolution(projected.cutoff());
    let grid = synthesize(&projected, res)?;
    let lq = grid_lebesgue_norm(grid.values(), q);
    let lp = grid_lebesgue_norm(grid.values(), p);
    let exponent = 3.0 / p - if q.is_infinite() { 0.0 } else { 3.0 / q };
    Ok(lq / (libm::pow(n, exponent) * lp))
}

/// A field sampled at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSample {
    pub t: f64,
    pub field: FourierField,
}

/// `‖u‖_{L^q_t L^r_x}` over time samples: trapezoid rule in time applied to
/// `‖u(t)‖^q_{L^r}`, maximum over samples for `q = ∞`.
pub fn mixed_norm(series: &[TimeSample], q: f64, r: f64) -> Result<f64> {
    let times: Vec<f64> = series.iter().map(|s| s.t).collect();
    let norms = series.iter().map(|s| lebesgue_norm(&s.field, r, None)).collect::<Result<Vec<f64>>>()?;
    time_norm(&times, &norms, q)
}

/// The time part of [`mixed_norm`], on precomputed spatial norms.
pub fn time_norm(times: &[f64], norms: &[f64], q: f64) -> Result<f64> {
    if times.len() != norms.len() {
        return Err(Error::InvalidArgument("time stamps and norms differ in length"));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::NonMonotoneTimes);
    }
    if q.is_infinite() {
        if norms.is_empty() {
            return Err(Error::InsufficientSamples { needed: 1, got: 0 });
        }
        return Ok(norms.iter().fold(0.0f64, |m, &v| m.max(v)));
    }
    if norms.len() < 2 {
        return Err(Error::InsufficientSamples { needed: 2, got: norms.len() });
    }
    let integral: f64 = times
        .windows(2)
        .zip(norms.windows(2))
        .map(|(t, v)| 0.5 * (t[1] - t[0]) * (libm::pow(v[0], q) + libm::pow(v[1], q)))
        .sum();
    Ok(libm::pow(integral, 1.0 / q))
}
