use crate::field::Mode;

/// Errors raised by the spectral kernels, solvers and experiments.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid resolution {resolution} aliases modes up to cutoff {cutoff} (need resolution >= 2*cutoff+2)")]
    Aliasing { resolution: usize, cutoff: usize },
    #[error("grid resolution {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("multiplier symbol is not even at mode {0:?}; output would be complex")]
    NonEvenSymbol(Mode),
    #[error("coefficients are not Hermitian at mode {0:?}")]
    NotHermitian(Mode),
    #[error("fields have different cutoffs ({0} and {1})")]
    CutoffMismatch(usize, usize),
    #[error("ratio is undefined for the zero field")]
    ZeroField,
    #[error("p must lie in (3,5), got {0}")]
    InvalidExponent(f64),
    #[error("need at least {needed} samples, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("time stamps must be strictly increasing")]
    NonMonotoneTimes,
    #[error("forcing samples do not cover [{t0}, {t1}]")]
    UncoveredInterval { t0: f64, t1: f64 },
    #[error("solution blew up (non-finite values) at t = {t}")]
    BlowUp { t: f64 },
    #[error("fixed-point iteration does not contract (factor {factor:.3e} after {iterations} iterations); shrink t*")]
    NonContraction { factor: f64, iterations: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
