//! Real fields on the torus `[0,2π)^3` stored as finite Fourier series.
//!
//! Storage is the complex exponential form `u(x) = Σ ĉ(n) e^{i n·x}` over the
//! cube `|n|_∞ ≤ M`, kept Hermitian so that `u` is real. The cosine/sine
//! basis `a₀ + Σ b_n cos(n·x) + c_n sin(n·x)` over a half lattice is exposed
//! through [`RealBasis`] and converts exactly in both directions.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Sub};

use num_complex::Complex64;

use crate::fft::Radix2;
use crate::{Error, Result};

/// A lattice point of `ℤ³`.
pub type Mode = [i32; 3];

/// Volume of the torus `[0,2π)^3`.
pub const TORUS_VOLUME: f64 = 8.0 * PI * PI * PI;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Euclidean length `|n|`.
#[inline]
pub fn mode_norm(n: Mode) -> f64 {
    libm::sqrt(mode_norm_sq(n))
}

#[inline]
pub fn mode_norm_sq(n: Mode) -> f64 {
    let [a, b, c] = n.map(f64::from);
    a * a + b * b + c * c
}

/// `⟨n⟩ = (1 + |n|²)^{1/2}`.
#[inline]
pub fn japanese(n: Mode) -> f64 {
    libm::sqrt(1.0 + mode_norm_sq(n))
}

/// True for the canonical member of each pair `{n, -n}`, `n ≠ 0`: the first
/// nonzero component is positive.
#[inline]
pub fn is_half_lattice(n: Mode) -> bool {
    n[0] > 0 || (n[0] == 0 && (n[1] > 0 || (n[1] == 0 && n[2] > 0)))
}

#[inline]
fn neg(n: Mode) -> Mode {
    [-n[0], -n[1], -n[2]]
}

/// Even Fourier symbols used throughout the crate.
pub mod symbols {
    use super::{japanese, mode_norm, mode_norm_sq, Mode};

    /// `⟨∇⟩^σ`.
    pub fn bessel(sigma: f64) -> impl Fn(Mode) -> f64 {
        move |n| libm::pow(japanese(n), sigma)
    }

    /// `|∇|`.
    pub fn abs_grad(n: Mode) -> f64 {
        mode_norm(n)
    }

    /// `-Δ`.
    pub fn neg_laplacian(n: Mode) -> f64 {
        mode_norm_sq(n)
    }
}

/// Finite, Hermitian Fourier series on `T³`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierField {
    cutoff: usize,
    coeffs: Vec<Complex64>,
}

impl FourierField {
    pub fn zeros(cutoff: usize) -> Self {
        let side = 2 * cutoff + 1;
        Self { cutoff, coeffs: vec![ZERO; side * side * side] }
    }

    /// A constant field `u ≡ value`.
    pub fn constant(cutoff: usize, value: f64) -> Self {
        let mut f = Self::zeros(cutoff);
        f.set_coeff([0, 0, 0], Complex64::new(value, 0.0));
        f
    }

    /// `b cos(n·x) + c sin(n·x)` for a single nonzero mode.
    pub fn single_mode(cutoff: usize, n: Mode, b: f64, c: f64) -> Self {
        let mut f = Self::zeros(cutoff);
        f.set_real_mode(n, b, c);
        f
    }

    /// Builds a field from complex coefficients, checking Hermitian symmetry
    /// to a relative tolerance of `1e-12`.
    pub fn from_fn(cutoff: usize, mut coeff: impl FnMut(Mode) -> Complex64) -> Result<Self> {
        let mut f = Self::zeros(cutoff);
        let m = cutoff as i32;
        for (i, n) in lattice(m).enumerate() {
            f.coeffs[i] = coeff(n);
        }
        let scale = f.coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.norm()));
        for n in lattice(m) {
            let a = f.coeff(n);
            let b = f.coeff(neg(n)).conj();
            if (a - b).norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(Error::NotHermitian(n));
            }
        }
        f.symmetrize();
        Ok(f)
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    #[inline]
    fn side(&self) -> usize {
        2 * self.cutoff + 1
    }

    #[inline]
    fn index(&self, n: Mode) -> usize {
        let m = self.cutoff as i32;
        let side = self.side();
        let [a, b, c] = n.map(|k| (k + m) as usize);
        (a * side + b) * side + c
    }

    #[inline]
    pub fn contains(&self, n: Mode) -> bool {
        let m = self.cutoff as i32;
        n.iter().all(|&k| -m <= k && k <= m)
    }

    /// `ĉ(n)`, zero outside the retained cube.
    #[inline]
    pub fn coeff(&self, n: Mode) -> Complex64 {
        if self.contains(n) {
            self.coeffs[self.index(n)]
        } else {
            ZERO
        }
    }

    /// Sets `ĉ(n)` and `ĉ(-n) = conj ĉ(n)`. For `n = 0` only the real part is kept.
    pub fn set_coeff(&mut self, n: Mode, value: Complex64) {
        assert!(self.contains(n), "mode {n:?} outside cutoff {}", self.cutoff);
        if n == [0, 0, 0] {
            let i = self.index(n);
            self.coeffs[i] = Complex64::new(value.re, 0.0);
        } else {
            let i = self.index(n);
            let j = self.index(neg(n));
            self.coeffs[i] = value;
            self.coeffs[j] = value.conj();
        }
    }

    /// Sets the real-basis pair `(b_n, c_n)`: `ĉ(n) = (b - ic)/2`.
    pub fn set_real_mode(&mut self, n: Mode, b: f64, c: f64) {
        assert!(n != [0, 0, 0], "use set_coeff for the zero mode");
        let n = if is_half_lattice(n) { n } else { return self.set_real_mode(neg(n), b, -c) };
        self.set_coeff(n, Complex64::new(0.5 * b, -0.5 * c));
    }

    /// Raw coefficients in lexicographic lattice order (`n₁` slowest, each
    /// component running `-M..=M`).
    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Inverse of [`FourierField::coeffs`]; checks Hermitian symmetry.
    pub fn from_coeffs(cutoff: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let side = 2 * cutoff + 1;
        if coeffs.len() != side * side * side {
            return Err(Error::InvalidArgument("coefficient count does not match cutoff"));
        }
        let mut iter = coeffs.into_iter();
        Self::from_fn(cutoff, |_| iter.next().unwrap_or(ZERO))
    }

    /// Iterates `(n, ĉ(n))` over the retained cube.
    pub fn iter(&self) -> impl Iterator<Item = (Mode, Complex64)> + '_ {
        lattice(self.cutoff as i32).zip(self.coeffs.iter().copied())
    }

    /// Copies into a field with a different cutoff, dropping modes outside it.
    pub fn with_cutoff(&self, cutoff: usize) -> Self {
        if cutoff == self.cutoff {
            return self.clone();
        }
        let mut out = Self::zeros(cutoff);
        let m = cutoff.min(self.cutoff) as i32;
        for n in lattice(m) {
            let i = out.index(n);
            out.coeffs[i] = self.coeff(n);
        }
        out
    }

    /// Largest `|n|_∞` carrying a nonzero coefficient (0 for the zero field).
    pub fn support_radius(&self) -> usize {
        self.iter()
            .filter(|(_, c)| *c != ZERO)
            .map(|(n, _)| n.iter().map(|k| k.unsigned_abs() as usize).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == ZERO)
    }

    pub fn scale(&self, factor: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * factor).collect();
        Self { cutoff: self.cutoff, coeffs }
    }

    /// `self += factor * other`. Cutoffs must agree.
    pub fn axpy(&mut self, factor: f64, other: &Self) {
        assert_eq!(self.cutoff, other.cutoff, "cutoff mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += b * factor;
        }
    }

    /// Multiplies coefficient-wise by `symbol(n)`.
    ///
    /// The symbol has to be even, otherwise the result is not a real field.
    pub fn apply_multiplier(&self, symbol: impl Fn(Mode) -> f64) -> Result<Self> {
        let values: Vec<f64> = lattice(self.cutoff as i32).map(&symbol).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("multiplier symbol is not finite on the retained lattice"));
        }
        let side = self.side();
        let total = values.len();
        for (i, &v) in values.iter().enumerate() {
            // The lexicographic index of -n is the mirror of the index of n.
            let mirror = values[total - 1 - i];
            let tol = 1e-14 * v.abs().max(mirror.abs()).max(1.0);
            if (v - mirror).abs() > tol {
                let m = self.cutoff as i32;
                let n = [(i / (side * side)) as i32 - m, ((i / side) % side) as i32 - m, (i % side) as i32 - m];
                return Err(Error::NonEvenSymbol(n));
            }
        }
        let coeffs = self.coeffs.iter().zip(values.iter()).map(|(c, &v)| c * v).collect();
        Ok(Self { cutoff: self.cutoff, coeffs })
    }

    /// Multiplier without the evenness check, for symbols that are even by
    /// construction (functions of `|n|`).
    pub(crate) fn map_radial(&self, symbol: impl Fn(f64) -> f64) -> Self {
        let coeffs = lattice(self.cutoff as i32)
            .zip(self.coeffs.iter())
            .map(|(n, c)| c * symbol(mode_norm_sq(n)))
            .collect();
        Self { cutoff: self.cutoff, coeffs }
    }

    /// `Σ w(|n|²) |ĉ(n)|²` over the full cube.
    pub(crate) fn weighted_power(&self, weight: impl Fn(f64) -> f64) -> f64 {
        lattice(self.cutoff as i32)
            .zip(self.coeffs.iter())
            .map(|(n, c)| weight(mode_norm_sq(n)) * c.norm_sqr())
            .sum()
    }

    /// `‖u‖_{H^s} = ((2π)³ Σ ⟨n⟩^{2s} |ĉ(n)|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let sum = if s == 0.0 {
            self.coeffs.iter().map(|c| c.norm_sqr()).sum()
        } else {
            self.weighted_power(|k2| libm::pow(1.0 + k2, s))
        };
        libm::sqrt(TORUS_VOLUME * sum)
    }

    pub fn l2_norm(&self) -> f64 {
        self.sobolev_norm(0.0)
    }

    /// `∫ u v dx` for real fields.
    pub fn inner(&self, other: &Self) -> f64 {
        let m = self.cutoff.min(other.cutoff) as i32;
        let sum: f64 = lattice(m).map(|n| (self.coeff(n) * other.coeff(n).conj()).re).sum();
        TORUS_VOLUME * sum
    }

    /// Maximum coefficient-wise distance.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let m = self.cutoff.max(other.cutoff) as i32;
        lattice(m).map(|n| (self.coeff(n) - other.coeff(n)).norm()).fold(0.0, f64::max)
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// `|n|²` for each stored coefficient, in storage order.
    pub(crate) fn norms_sq(&self) -> impl Iterator<Item = usize> {
        lattice(self.cutoff as i32).map(|n| n.iter().map(|&k| (k * k) as usize).sum())
    }

    /// Restores exact Hermitian symmetry (averaging `ĉ(n)` and `conj ĉ(-n)`).
    pub(crate) fn symmetrize(&mut self) {
        let total = self.coeffs.len();
        for i in 0..total / 2 {
            let j = total - 1 - i;
            let avg = 0.5 * (self.coeffs[i] + self.coeffs[j].conj());
            self.coeffs[i] = avg;
            self.coeffs[j] = avg.conj();
        }
        let mid = total / 2;
        self.coeffs[mid] = Complex64::new(self.coeffs[mid].re, 0.0);
    }

    /// The cosine/sine view of the field.
    pub fn to_real_basis(&self) -> RealBasis {
        let a0 = self.coeff([0, 0, 0]).re;
        let terms = self
            .iter()
            .filter(|(n, _)| is_half_lattice(*n))
            .map(|(n, c)| RealTerm { mode: n, cos: 2.0 * c.re, sin: -2.0 * c.im })
            .collect();
        RealBasis { cutoff: self.cutoff, a0, terms }
    }

    pub fn from_real_basis(basis: &RealBasis) -> Self {
        let mut f = Self::constant(basis.cutoff, basis.a0);
        for t in &basis.terms {
            f.set_real_mode(t.mode, t.cos, t.sin);
        }
        f
    }
}

impl Add for &FourierField {
    type Output = FourierField;

    fn add(self, rhs: Self) -> FourierField {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &FourierField {
    type Output = FourierField;

    fn sub(self, rhs: Self) -> FourierField {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

/// One half-lattice term `b cos(n·x) + c sin(n·x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealTerm {
    pub mode: Mode,
    pub cos: f64,
    pub sin: f64,
}

/// `a₀ + Σ_{n in half lattice} b_n cos(n·x) + c_n sin(n·x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealBasis {
    pub cutoff: usize,
    pub a0: f64,
    pub terms: Vec<RealTerm>,
}

/// Iterates the cube `|n|_∞ ≤ m` in lexicographic order.
pub fn lattice(m: i32) -> impl Iterator<Item = Mode> + Clone {
    (-m..=m).flat_map(move |a| (-m..=m).flat_map(move |b| (-m..=m).map(move |c| [a, b, c])))
}

/// Position/velocity data `(u₀, u₁) ∈ H^s × H^{s-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyPair {
    pub u0: FourierField,
    pub u1: FourierField,
    /// Regularity label `s`; bookkeeping only.
    pub s: f64,
}

impl CauchyPair {
    pub fn new(u0: FourierField, u1: FourierField, s: f64) -> Result<Self> {
        if u0.cutoff() != u1.cutoff() {
            return Err(Error::CutoffMismatch(u0.cutoff(), u1.cutoff()));
        }
        Ok(Self { u0, u1, s })
    }

    pub fn zeros(cutoff: usize, s: f64) -> Self {
        Self { u0: FourierField::zeros(cutoff), u1: FourierField::zeros(cutoff), s }
    }

    pub fn cutoff(&self) -> usize {
        self.u0.cutoff()
    }

    /// `‖(u₀,u₁)‖_{𝓗^σ} = (‖u₀‖²_{H^σ} + ‖u₁‖²_{H^{σ-1}})^{1/2}`.
    pub fn energy_norm(&self, sigma: f64) -> f64 {
        libm::hypot(self.u0.sobolev_norm(sigma), self.u1.sobolev_norm(sigma - 1.0))
    }

    pub fn map(&self, mut f: impl FnMut(&FourierField) -> FourierField) -> Self {
        Self { u0: f(&self.u0), u1: f(&self.u1), s: self.s }
    }
}

/// Real samples on the uniform grid `x_k = 2πk/G`, index `(k₁ G + k₂) G + k₃`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridValues {
    resolution: usize,
    values: Vec<f64>,
}

impl GridValues {
    pub fn new(resolution: usize, values: Vec<f64>) -> Result<Self> {
        if !resolution.is_power_of_two() || resolution < 2 {
            return Err(Error::NotPowerOfTwo(resolution));
        }
        if values.len() != resolution * resolution * resolution {
            return Err(Error::InvalidArgument("sample count is not resolution^3"));
        }
        Ok(Self { resolution, values })
    }

    /// Samples `f(x)` at every grid point.
    pub fn from_fn(resolution: usize, f: impl Fn([f64; 3]) -> f64) -> Result<Self> {
        let h = 2.0 * PI / resolution as f64;
        let values = (0..resolution * resolution * resolution)
            .map(|i| {
                let k = [i / (resolution * resolution), (i / resolution) % resolution, i % resolution];
                f(k.map(|k| k as f64 * h))
            })
            .collect();
        Self::new(resolution, values)
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Rectangle-rule integral of `g(u)` over the torus.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        let cell = TORUS_VOLUME / self.values.len() as f64;
        self.values.iter().map(|&u| g(u)).sum::<f64>() * cell
    }

    pub(crate) fn map(&self, g: impl Fn(f64) -> f64) -> Self {
        Self { resolution: self.resolution, values: self.values.iter().map(|&u| g(u)).collect() }
    }
}

/// Smallest power-of-two grid that resolves `cutoff` without aliasing
/// (`G ≥ 2M + 2`).
pub fn nyquist_resolution(cutoff: usize) -> usize {
    (2 * cutoff + 2).next_power_of_two()
}

/// Default quadrature grid: twice the Nyquist grid.
pub fn oversampled_resolution(cutoff: usize) -> usize {
    2 * nyquist_resolution(cutoff)
}

fn check_resolution(resolution: usize, cutoff: usize) -> Result<()> {
    if !resolution.is_power_of_two() || resolution < 2 {
        return Err(Error::NotPowerOfTwo(resolution));
    }
    if resolution < 2 * cutoff + 2 {
        return Err(Error::Aliasing { resolution, cutoff });
    }
    Ok(())
}

#[inline]
fn wrap(k: i32, g: usize) -> usize {
    k.rem_euclid(g as i32) as usize
}

/// Transform plan and scratch cube for one grid resolution, reused across
/// calls so repeated transforms do not reallocate a `resolution³` buffer.
#[derive(Debug, Clone)]
pub struct SpectralWorkspace {
    resolution: usize,
    plan: Radix2,
    buf: Vec<Complex64>,
}

impl SpectralWorkspace {
    pub fn new(resolution: usize) -> Result<Self> {
        if !resolution.is_power_of_two() || resolution < 2 {
            return Err(Error::NotPowerOfTwo(resolution));
        }
        let plan = Radix2::new(resolution);
        Ok(Self { resolution, plan, buf: vec![ZERO; resolution * resolution * resolution] })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Evaluates `field` on the grid; the samples are the real parts of the
    /// returned buffer (imaginary parts vanish up to round-off).
    pub fn synthesize_buffer(&mut self, field: &FourierField) -> Result<&mut [Complex64]> {
        let m = field.cutoff();
        let g = self.resolution;
        check_resolution(g, m)?;
        let mi = m as i32;
        let buf = &mut self.buf;
        buf.fill(ZERO);
        for (n, c) in field.iter() {
            buf[(wrap(n[0], g) * g + wrap(n[1], g)) * g + wrap(n[2], g)] = c;
        }
        for a in -mi..=mi {
            let wa = wrap(a, g);
            for b in -mi..=mi {
                let start = (wa * g + wrap(b, g)) * g;
                self.plan.process(&mut buf[start..start + g], true);
            }
        }
        for a in -mi..=mi {
            let start = wrap(a, g) * g * g;
            self.plan.process_rows(&mut buf[start..start + g * g], g, true);
        }
        self.plan.process_rows(buf, g * g, true);
        Ok(buf)
    }

    pub fn synthesize(&mut self, field: &FourierField) -> Result<GridValues> {
        let g = self.resolution;
        let values = self.synthesize_buffer(field)?.iter().map(|z| z.re).collect();
        Ok(GridValues { resolution: g, values })
    }

    /// Projects the buffer contents onto `|n|_∞ ≤ cutoff`, discarding
    /// imaginary parts first.
    pub fn analyze_buffer(&mut self, cutoff: usize) -> Result<FourierField> {
        let g = self.resolution;
        check_resolution(g, cutoff)?;
        let mi = cutoff as i32;
        let buf = &mut self.buf;
        for z in buf.iter_mut() {
            z.im = 0.0;
        }
        self.plan.process_rows(buf, g * g, false);
        for a in -mi..=mi {
            let start = wrap(a, g) * g * g;
            self.plan.process_rows(&mut buf[start..start + g * g], g, false);
        }
        for a in -mi..=mi {
            let wa = wrap(a, g);
            for b in -mi..=mi {
                let start = (wa * g + wrap(b, g)) * g;
                self.plan.process(&mut buf[start..start + g], false);
            }
        }
        let norm = 1.0 / (g * g * g) as f64;
        let mut out = FourierField::zeros(cutoff);
        for (i, n) in lattice(mi).enumerate() {
            out.coeffs[i] = buf[(wrap(n[0], g) * g + wrap(n[1], g)) * g + wrap(n[2], g)] * norm;
        }
        out.symmetrize();
        Ok(out)
    }

    pub fn analyze(&mut self, values: &GridValues, cutoff: usize) -> Result<FourierField> {
        if values.resolution() != self.resolution {
            return Err(Error::InvalidArgument("grid resolution differs from the workspace"));
        }
        for (z, &v) in self.buf.iter_mut().zip(values.values()) {
            *z = Complex64::new(v, 0.0);
        }
        self.analyze_buffer(cutoff)
    }
}

/// Evaluates the series on the `resolution³` grid.
pub fn synthesize(field: &FourierField, resolution: usize) -> Result<GridValues> {
    check_resolution(resolution, field.cutoff())?;
    SpectralWorkspace::new(resolution)?.synthesize(field)
}

/// Projects grid samples onto the modes `|n|_∞ ≤ cutoff`.
///
/// Exact inverse of [`synthesize`] for band-limited data.
pub fn analyze(values: &GridValues, cutoff: usize) -> Result<FourierField> {
    check_resolution(values.resolution(), cutoff)?;
    SpectralWorkspace::new(values.resolution())?.analyze(values, cutoff)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn cos_x1(cutoff: usize) -> FourierField {
        FourierField::single_mode(cutoff, [1, 0, 0], 1.0, 0.0)
    }

    #[test]
    fn synthesize_zero_and_constant() {
        let z = synthesize(&FourierField::zeros(3), 16).unwrap();
        assert!(z.values().iter().all(|&v| v == 0.0));
        let c = synthesize(&FourierField::constant(3, 2.0), 16).unwrap();
        assert!(c.values().iter().all(|&v| (v - 2.0).abs() < 1e-14));
    }

    #[test]
    fn synthesize_single_mode() {
        let g = 32;
        let vals = synthesize(&cos_x1(4), g).unwrap();
        for k1 in 0..g {
            let expect = libm::cos(2.0 * PI * k1 as f64 / g as f64);
            for rest in 0..g * g {
                assert!((vals.values()[k1 * g * g + rest] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn synthesize_rejects_aliasing() {
        assert_eq!(
            synthesize(&cos_x1(8), 16),
            Err(Error::Aliasing { resolution: 16, cutoff: 8 })
        );
        assert_eq!(synthesize(&cos_x1(2), 12), Err(Error::NotPowerOfTwo(12)));
        let grid = GridValues::new(8, vec![0.0; 512]).unwrap();
        assert!(matches!(analyze(&grid, 4), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn analyze_constant_and_basis_readout() {
        let c = analyze(&GridValues::new(8, vec![3.0; 512]).unwrap(), 3).unwrap();
        assert_relative_eq!(c.coeff([0, 0, 0]).re, 3.0, epsilon = 1e-14);
        assert!(c.iter().filter(|(n, _)| *n != [0, 0, 0]).all(|(_, c)| c.norm() < 1e-14));

        let grid = GridValues::from_fn(16, |x| libm::cos(x[0]) + 0.5 * libm::sin(2.0 * x[1])).unwrap();
        let f = analyze(&grid, 5).unwrap();
        let basis = f.to_real_basis();
        let find = |n: Mode| basis.terms.iter().find(|t| t.mode == n).copied().unwrap();
        assert_relative_eq!(find([1, 0, 0]).cos, 1.0, epsilon = 1e-13);
        assert_relative_eq!(find([0, 2, 0]).sin, 0.5, epsilon = 1e-13);
        assert_relative_eq!(find([0, 2, 0]).cos, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn real_basis_round_trip_is_exact() {
        let mut f = FourierField::constant(2, 0.25);
        f.set_real_mode([1, -2, 0], 0.5, -1.5);
        f.set_real_mode([0, 0, -1], 2.0, 3.0);
        let back = FourierField::from_real_basis(&f.to_real_basis());
        assert_eq!(back, f);
        // sin is odd: the -n representative flips the sine coefficient.
        let t = f.to_real_basis().terms.into_iter().find(|t| t.mode == [0, 0, 1]).unwrap();
        assert_eq!((t.cos, t.sin), (2.0, -3.0));
    }

    #[test]
    fn multiplier_examples() {
        let f = cos_x1(3);
        assert_eq!(f.apply_multiplier(|_| 1.0).unwrap(), f);
        let lap = f.apply_multiplier(symbols::neg_laplacian).unwrap();
        assert!(lap.max_abs_diff(&f) < 1e-15);
        let b = f.apply_multiplier(symbols::bessel(1.0)).unwrap();
        assert!(b.max_abs_diff(&f.scale(libm::sqrt(2.0))) < 1e-15);
        assert!(matches!(f.apply_multiplier(|n| n[0] as f64), Err(Error::NonEvenSymbol(_))));
    }

    #[test]
    fn sobolev_norm_examples() {
        assert_eq!(FourierField::zeros(2).sobolev_norm(0.7), 0.0);
        // ∫cos² = (2π)³/2 = 4π³
        let f = cos_x1(2);
        let l2 = libm::sqrt(4.0 * PI * PI * PI);
        assert_relative_eq!(f.sobolev_norm(0.0), l2, max_relative = 1e-14);
        assert_relative_eq!(f.sobolev_norm(0.0), 11.1366, epsilon = 1e-4);
        assert_relative_eq!(f.sobolev_norm(1.0), libm::sqrt(2.0) * l2, max_relative = 1e-14);
        assert_relative_eq!(f.sobolev_norm(1.0), 15.7496, epsilon = 1e-4);
    }

    #[test]
    fn from_fn_rejects_non_hermitian() {
        let err = FourierField::from_fn(1, |n| if n == [1, 0, 0] { Complex64::new(1.0, 0.0) } else { ZERO });
        assert!(matches!(err, Err(Error::NotHermitian(_))));
    }

    #[test]
    fn cauchy_pair_requires_shared_cutoff() {
        let err = CauchyPair::new(FourierField::zeros(1), FourierField::zeros(2), 0.5);
        assert_eq!(err, Err(Error::CutoffMismatch(1, 2)));
    }
}
