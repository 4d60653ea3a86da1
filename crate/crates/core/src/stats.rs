//! Small statistics kit for the experiments: moments, least squares,
//! Wilson intervals and normal tails.

use alloc::vec::Vec;

/// Sample mean and standard error of the mean.
pub fn mean_and_std_error(values: impl IntoIterator<Item = f64>) -> (f64, f64) {
    // Welford
    let (mut n, mut mean, mut m2) = (0usize, 0.0f64, 0.0f64);
    for x in values {
        n += 1;
        let d = x - mean;
        mean += d / n as f64;
        m2 += d * (x - mean);
    }
    if n < 2 {
        return (mean, f64::NAN);
    }
    let var = m2 / (n - 1) as f64;
    (mean, libm::sqrt(var / n as f64))
}

/// Median of a non-empty slice (average of the middle pair for even length).
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Ordinary least-squares fit `y ≈ intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Standard error of the slope (NaN with fewer than three points).
    pub slope_std_error: f64,
    pub points: usize,
}

impl LinearFit {
    /// Whether the slope is significantly positive at one-sided 95%.
    pub fn slope_significantly_positive(&self) -> bool {
        if self.points < 3 || !self.slope_std_error.is_finite() {
            return false;
        }
        if self.slope_std_error == 0.0 {
            return self.slope > 0.0;
        }
        self.slope / self.slope_std_error > student_t_95(self.points - 2)
    }

    /// Whether the slope is significantly negative at one-sided 95%.
    pub fn slope_significantly_negative(&self) -> bool {
        Self { slope: -self.slope, ..*self }.slope_significantly_positive()
    }
}

/// Least squares over paired points; `None` with fewer than two points or
/// zero spread in `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (dx, dy) = (x[i] - mx, y[i] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = (0..n).map(|i| { let e = y[i] - intercept - slope * x[i]; e * e }).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ssr / syy };
    let slope_std_error = if n > 2 { libm::sqrt(ssr / (n - 2) as f64 / sxx) } else { f64::NAN };
    Some(LinearFit { slope, intercept, r_squared, slope_std_error, points: n })
}

/// One-sided 95% Student-t quantile.
pub fn student_t_95(dof: usize) -> f64 {
    const TABLE: [(usize, f64); 26] = [
        (1, 6.313_752),
        (2, 2.919_986),
        (3, 2.353_363),
        (4, 2.131_847),
        (5, 2.015_048),
        (6, 1.943_180),
        (7, 1.894_579),
        (8, 1.859_548),
        (9, 1.833_113),
        (10, 1.812_461),
        (11, 1.795_885),
        (12, 1.782_288),
        (13, 1.770_933),
        (14, 1.761_310),
        (15, 1.753_050),
        (16, 1.745_884),
        (17, 1.739_607),
        (18, 1.734_064),
        (19, 1.729_133),
        (20, 1.724_718),
        (25, 1.708_141),
        (30, 1.697_261),
        (40, 1.683_851),
        (60, 1.670_649),
        (120, 1.657_651),
        (usize::MAX, 1.644_854),
    ];
    if dof == 0 {
        return f64::INFINITY;
    }
    let mut prev = TABLE[0];
    for &(d, t) in TABLE.iter() {
        if dof == d {
            return t;
        }
        if dof < d {
            // Quantiles are close to linear in 1/dof between table rows.
            let (d0, t0) = prev;
            let (inv, inv0, inv1) = (1.0 / dof as f64, 1.0 / d0 as f64, if d == usize::MAX { 0.0 } else { 1.0 / d as f64 });
            return t + (t0 - t) * (inv - inv1) / (inv0 - inv1);
        }
        prev = (d, t);
    }
    1.644_854
}

/// Wilson score interval for `successes` out of `trials` at normal quantile `z`.
pub fn wilson_interval(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * libm::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Standard normal upper tail `P(g > x)`.
pub fn normal_upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / core::f64::consts::SQRT_2)
}

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;
/// Two-sided 99% normal quantile.
pub const Z_99: f64 = 2.575_829_303_548_901;
