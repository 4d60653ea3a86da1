//! Sub-Gaussian laws and the coefficient-wise randomization of Cauchy data.
//!
//! Every draw comes from a ChaCha8 keystream keyed by
//! `(master_seed, sample_index)` with one stream per coefficient, so the
//! value attached to a coefficient depends only on its key and never on the
//! order in which samples or modes are visited.

use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::StandardNormal;

use crate::field::{is_half_lattice, CauchyPair, FourierField, Mode};
use crate::{Error, Result};

/// Distribution shape of the i.i.d. multipliers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LawKind {
    Gaussian { variance: f64 },
    Rademacher,
    SymmetricUniform { halfwidth: f64 },
}

/// A mean-zero law together with a constant `c` such that
/// `E[e^{γX}] ≤ e^{cγ²}` for all real `γ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomLaw {
    pub kind: LawKind,
    pub subgaussian_c: f64,
}

impl RandomLaw {
    /// `c = σ²/2`, exact.
    pub fn gaussian(variance: f64) -> Self {
        Self { kind: LawKind::Gaussian { variance }, subgaussian_c: 0.5 * variance }
    }

    pub fn standard_gaussian() -> Self {
        Self::gaussian(1.0)
    }

    /// `cosh γ ≤ e^{γ²/2}`.
    pub fn rademacher() -> Self {
        Self { kind: LawKind::Rademacher, subgaussian_c: 0.5 }
    }

    /// `sinh(γh)/(γh) ≤ e^{γ²h²/6}`.
    pub fn symmetric_uniform(halfwidth: f64) -> Self {
        Self { kind: LawKind::SymmetricUniform { halfwidth }, subgaussian_c: halfwidth * halfwidth / 6.0 }
    }

    pub fn with_subgaussian_c(mut self, c: f64) -> Self {
        self.subgaussian_c = c;
        self
    }

    pub fn sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        match self.kind {
            LawKind::Gaussian { variance } => {
                let g: f64 = rng.sample(StandardNormal);
                libm::sqrt(variance) * g
            }
            LawKind::Rademacher => {
                if rng.next_u32() & 1 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
            LawKind::SymmetricUniform { halfwidth } => {
                let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                (2.0 * u - 1.0) * halfwidth
            }
        }
    }

    /// Closed-form `E[e^{γX}]`.
    pub fn exact_mgf(&self, gamma: f64) -> f64 {
        match self.kind {
            LawKind::Gaussian { variance } => libm::exp(0.5 * variance * gamma * gamma),
            LawKind::Rademacher => libm::cosh(gamma),
            LawKind::SymmetricUniform { halfwidth } => {
                let x = gamma * halfwidth;
                if x == 0.0 {
                    1.0
                } else {
                    libm::sinh(x) / x
                }
            }
        }
    }

    /// `E[X²]`.
    pub fn variance(&self) -> f64 {
        match self.kind {
            LawKind::Gaussian { variance } => variance,
            LawKind::Rademacher => 1.0,
            LawKind::SymmetricUniform { halfwidth } => halfwidth * halfwidth / 3.0,
        }
    }
}

/// Key of one randomization sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub sample_index: u64,
}

/// Which real-basis function a draw multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Basis {
    Constant,
    Cos,
    Sin,
}

const MODE_OFFSET: i64 = 1 << 19;

impl SeedSpec {
    pub fn new(master_seed: u64, sample_index: u64) -> Self {
        Self { master_seed, sample_index }
    }

    fn generator(&self) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.master_seed.to_le_bytes());
        key[8..16].copy_from_slice(&self.sample_index.to_le_bytes());
        key[16..24].copy_from_slice(b"supwave.");
        ChaCha8Rng::from_seed(key)
    }

    /// Independent keystream number `stream` of this sample.
    pub fn stream(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = self.generator();
        rng.set_stream(stream);
        rng.set_word_pos(0);
        rng
    }

    /// Stream carrying the multiplier of `(n, basis)` for datum `j ∈ {0,1}`.
    pub fn coefficient_stream(&self, n: Mode, j: u8, basis: Basis) -> ChaCha8Rng {
        self.stream(coefficient_stream_id(n, j, basis))
    }
}

fn coefficient_stream_id(n: Mode, j: u8, basis: Basis) -> u64 {
    let packed = n
        .iter()
        .fold(0u64, |acc, &k| (acc << 20) | (i64::from(k) + MODE_OFFSET) as u64 & 0xF_FFFF);
    let tag = match basis {
        Basis::Constant => 0,
        Basis::Cos => 1,
        Basis::Sin => 2,
    };
    (packed << 3) | (u64::from(j & 1) << 2) | tag
}

fn randomize_field(field: &FourierField, law: &RandomLaw, seed: &SeedSpec, j: u8) -> FourierField {
    let mut out = FourierField::zeros(field.cutoff());
    let a0 = field.coeff([0, 0, 0]).re;
    if a0 != 0.0 {
        let alpha = law.sample(&mut seed.coefficient_stream([0, 0, 0], j, Basis::Constant));
        out.set_coeff([0, 0, 0], (alpha * a0).into());
    }
    for (n, c) in field.iter() {
        if !is_half_lattice(n) {
            continue;
        }
        let (b, s) = (2.0 * c.re, -2.0 * c.im);
        if b == 0.0 && s == 0.0 {
            continue;
        }
        let beta = if b != 0.0 { law.sample(&mut seed.coefficient_stream(n, j, Basis::Cos)) } else { 0.0 };
        let gamma = if s != 0.0 { law.sample(&mut seed.coefficient_stream(n, j, Basis::Sin)) } else { 0.0 };
        out.set_real_mode(n, beta * b, gamma * s);
    }
    out
}

/// Multiplies every real-basis coefficient of `(u₀,u₁)` by an independent
/// draw from `law`.
pub fn draw_randomized_pair(pair: &CauchyPair, law: &RandomLaw, seed: &SeedSpec) -> CauchyPair {
    CauchyPair {
        u0: randomize_field(&pair.u0, law, seed, 0),
        u1: randomize_field(&pair.u1, law, seed, 1),
        s: pair.s,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgfRow {
    pub gamma: f64,
    pub empirical: f64,
    pub std_error: f64,
    pub bound: f64,
    /// Empirical value exceeds the bound by more than three standard errors.
    pub violated: bool,
    /// `γ·max|X|` was too large to evaluate; the row carries no estimate.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgfReport {
    pub samples: usize,
    pub subgaussian_c: f64,
    pub rows: Vec<MgfRow>,
}

impl MgfReport {
    pub fn any_violation(&self) -> bool {
        self.rows.iter().any(|r| r.violated)
    }
}

/// Minimum sample count for the moment checks.
pub const MIN_CHECK_SAMPLES: usize = 10_000;

const MGF_STREAM: u64 = u64::MAX - 1;

/// Empirical `E[e^{γX}]` against the bound `e^{cγ²}` on a grid of `γ`.
pub fn mgf_bound_check(law: &RandomLaw, gamma_grid: &[f64], samples: usize, seed: &SeedSpec) -> Result<MgfReport> {
    if samples < MIN_CHECK_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_CHECK_SAMPLES, got: samples });
    }
    let mut rng = seed.stream(MGF_STREAM);
    let draws: Vec<f64> = (0..samples).map(|_| law.sample(&mut rng)).collect();
    let max_abs = draws.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let rows = gamma_grid
        .iter()
        .map(|&gamma| {
            let bound = libm::exp(law.subgaussian_c * gamma * gamma);
            if (gamma * max_abs).abs() > 700.0 {
                return MgfRow { gamma, empirical: f64::NAN, std_error: f64::NAN, bound, violated: false, truncated: true };
            }
            let (mean, se) = crate::stats::mean_and_std_error(draws.iter().map(|x| libm::exp(gamma * x)));
            MgfRow { gamma, empirical: mean, std_error: se, bound, violated: mean - 3.0 * se > bound, truncated: false }
        })
        .collect();
    Ok(MgfReport { samples, subgaussian_c: law.subgaussian_c, rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KhinchinReport {
    pub q: f64,
    /// `‖Σ g_n c_n‖_{L^q_ω} / (√q ‖c‖_{ℓ²})`.
    pub ratio: f64,
    /// Delta-method standard error of `ratio`.
    pub std_error: f64,
}

/// Empirical large-deviation ratio for the random sum `Σ g_n c_n`.
pub fn khinchin_check(
    coeffs: &[f64],
    law: &RandomLaw,
    q: f64,
    samples: usize,
    seed: &SeedSpec,
) -> Result<KhinchinReport> {
    if samples < MIN_CHECK_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_CHECK_SAMPLES, got: samples });
    }
    if q < 2.0 || !q.is_finite() {
        return Err(Error::InvalidArgument("khinchin_check needs finite q >= 2"));
    }
    let l2 = libm::sqrt(coeffs.iter().map(|c| c * c).sum::<f64>());
    if l2 == 0.0 {
        return Err(Error::ZeroField);
    }
    let moments = (0..samples as u64).map(|i| {
        let mut rng = seed.stream(i);
        let sum: f64 = coeffs.iter().map(|c| c * law.sample(&mut rng)).sum();
        libm::pow(sum.abs(), q)
    });
    let (moment, se) = crate::stats::mean_and_std_error(moments);
    let norm = libm::sqrt(q) * l2;
    let ratio = libm::pow(moment, 1.0 / q) / norm;
    let std_error = se * libm::pow(moment, 1.0 / q - 1.0) / (q * norm);
    Ok(KhinchinReport { q, ratio, std_error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::lattice;
    use approx::assert_relative_eq;

    fn sample_pair() -> CauchyPair {
        let mut u0 = FourierField::constant(3, 0.5);
        let mut u1 = FourierField::zeros(3);
        for n in lattice(3).filter(|n| crate::field::is_half_lattice(*n)) {
            let w = 1.0 / (1.0 + crate::field::mode_norm_sq(n));
            u0.set_real_mode(n, w, -0.5 * w);
            u1.set_real_mode(n, 0.3 * w, w);
        }
        CauchyPair::new(u0, u1, 0.5).unwrap()
    }

    #[test]
    fn rademacher_preserves_every_coefficient_modulus() {
        let pair = sample_pair();
        let out = draw_randomized_pair(&pair, &RandomLaw::rademacher(), &SeedSpec::new(7, 3));
        for (field, rand) in [(&pair.u0, &out.u0), (&pair.u1, &out.u1)] {
            let (a, b) = (field.to_real_basis(), rand.to_real_basis());
            assert_eq!(a.a0.abs(), b.a0.abs());
            for (x, y) in a.terms.iter().zip(b.terms.iter()) {
                assert_eq!((x.cos.abs(), x.sin.abs()), (y.cos.abs(), y.sin.abs()));
            }
            assert_relative_eq!(field.l2_norm(), rand.l2_norm(), max_relative = 1e-15);
        }
    }

    #[test]
    fn identical_seeds_give_identical_draws() {
        let pair = sample_pair();
        let law = RandomLaw::standard_gaussian();
        let a = draw_randomized_pair(&pair, &law, &SeedSpec::new(11, 4));
        let b = draw_randomized_pair(&pair, &law, &SeedSpec::new(11, 4));
        assert_eq!(a, b);
        let c = draw_randomized_pair(&pair, &law, &SeedSpec::new(11, 5));
        assert_ne!(a, c);
    }

    #[test]
    fn draw_does_not_depend_on_other_coefficients() {
        // A coefficient's multiplier is keyed by its mode, so adding or
        // removing other modes leaves it unchanged.
        let law = RandomLaw::standard_gaussian();
        let seed = SeedSpec::new(5, 9);
        let single = FourierField::single_mode(3, [1, 2, -1], 1.0, 1.0);
        let mut many = sample_pair().u0;
        many.set_real_mode([1, 2, -1], 1.0, 1.0);
        let a = randomize_field(&single, &law, &seed, 0);
        let b = randomize_field(&many, &law, &seed, 0);
        assert_eq!(a.coeff([1, 2, -1]), b.coeff([1, 2, -1]));
    }

    #[test]
    fn stream_ids_are_distinct() {
        let mut ids: Vec<u64> = Vec::new();
        for n in lattice(2) {
            for j in 0..2 {
                for basis in [Basis::Constant, Basis::Cos, Basis::Sin] {
                    ids.push(coefficient_stream_id(n, j, basis));
                }
            }
        }
        let total = ids.len();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), total);
    }

    #[test]
    fn checks_need_enough_samples() {
        let law = RandomLaw::rademacher();
        let seed = SeedSpec::new(1, 0);
        assert!(matches!(mgf_bound_check(&law, &[1.0], 100, &seed), Err(Error::InsufficientSamples { .. })));
        assert!(matches!(khinchin_check(&[1.0], &law, 2.0, 100, &seed), Err(Error::InsufficientSamples { .. })));
    }

    #[test]
    fn mgf_overflow_is_reported_as_truncation() {
        let report = mgf_bound_check(&RandomLaw::standard_gaussian(), &[1e4], 10_000, &SeedSpec::new(1, 0)).unwrap();
        assert!(report.rows[0].truncated);
        assert!(!report.any_violation());
    }
}
