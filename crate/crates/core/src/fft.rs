//! Radix-2 transforms on batches of rows.
//!
//! A "row" is a contiguous run of `row_len` complex values; the transform
//! runs across `count` rows, so axis transforms of a 3D cube reduce to
//! butterflies on whole contiguous rows and never gather strided data.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;

const COLUMN_BLOCK: usize = 64;

/// Twiddle and bit-reversal tables for one transform length.
#[derive(Debug, Clone)]
pub struct Radix2 {
    len: usize,
    twiddles: Vec<Complex64>,
    bitrev: Vec<usize>,
}

impl Radix2 {
    /// `len` must be a power of two.
    pub fn new(len: usize) -> Self {
        assert!(len.is_power_of_two(), "radix-2 length must be a power of two");
        let bits = len.trailing_zeros();
        let bitrev = (0..len)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (usize::BITS - bits) })
            .collect();
        let twiddles = (0..len / 2)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / len as f64;
                Complex64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        Self { len, twiddles, bitrev }
    }

    /// In-place transform over `count = len` rows of `row_len` values each.
    ///
    /// Forward uses the kernel `e^{-2πi jk/len}`, inverse `e^{+2πi jk/len}`;
    /// neither is normalized.
    pub fn process_rows(&self, data: &mut [Complex64], row_len: usize, inverse: bool) {
        debug_assert_eq!(data.len(), self.len * row_len);
        // Long rows are handled in column blocks so each pass stays in cache.
        let mut col = 0;
        while col < row_len {
            let width = COLUMN_BLOCK.min(row_len - col);
            self.process_block(data, row_len, col, width, inverse);
            col += width;
        }
    }

    fn process_block(&self, data: &mut [Complex64], stride: usize, col: usize, width: usize, inverse: bool) {
        let n = self.len;
        if n == 1 {
            return;
        }
        let at = |row: usize| row * stride + col;
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                let (lo, hi) = data.split_at_mut(at(j));
                lo[at(i)..at(i) + width].swap_with_slice(&mut hi[..width]);
            }
        }
        let mut half = 1;
        while half < n {
            let step = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * step];
                    if inverse {
                        w = w.conj();
                    }
                    let (a, b) = (at(start + k), at(start + k + half));
                    let (lo, hi) = data.split_at_mut(b);
                    let ra = &mut lo[a..a + width];
                    let rb = &mut hi[..width];
                    if k == 0 {
                        for (x, y) in ra.iter_mut().zip(rb.iter_mut()) {
                            let t = *y;
                            *y = *x - t;
                            *x += t;
                        }
                    } else {
                        for (x, y) in ra.iter_mut().zip(rb.iter_mut()) {
                            let t = *y * w;
                            *y = *x - t;
                            *x += t;
                        }
                    }
                }
            }
            half *= 2;
        }
    }

    /// Transform of one contiguous sequence.
    pub fn process(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.len;
        debug_assert_eq!(data.len(), n);
        for i in 0..n {
            let j = self.bitrev[i];
            if i < j {
                data.swap(i, j);
            }
        }
        let mut half = 1;
        while half < n {
            let step = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                let (lo, hi) = data[start..start + 2 * half].split_at_mut(half);
                for (k, (x, y)) in lo.iter_mut().zip(hi.iter_mut()).enumerate() {
                    let w = self.twiddles[k * step];
                    let t = *y * if inverse { w.conj() } else { w };
                    *y = *x - t;
                    *x += t;
                }
            }
            half *= 2;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn naive_dft(x: &[Complex64], inverse: bool) -> Vec<Complex64> {
        let n = x.len();
        let sign = if inverse { 1.0 } else { -1.0 };
        (0..n)
            .map(|k| {
                x.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &v)| {
                    let th = sign * 2.0 * PI * (j * k) as f64 / n as f64;
                    acc + v * Complex64::new(libm::cos(th), libm::sin(th))
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for &n in &[1usize, 2, 4, 8, 32] {
            let x: Vec<Complex64> = (0..n)
                .map(|i| Complex64::new(libm::sin(i as f64 * 0.7), libm::cos(i as f64 * 1.3)))
                .collect();
            for inverse in [false, true] {
                let mut y = x.clone();
                Radix2::new(n).process(&mut y, inverse);
                let expect = naive_dft(&x, inverse);
                for (a, b) in y.iter().zip(expect.iter()) {
                    assert!((a - b).norm() < 1e-12 * n as f64, "n={n}");
                }
            }
        }
    }

    #[test]
    fn batched_rows_equal_columnwise() {
        let n = 8;
        let row_len = 3;
        let data: Vec<Complex64> = (0..n * row_len)
            .map(|i| Complex64::new(i as f64, (i * i) as f64 * 0.1))
            .collect();
        let mut batched = data.clone();
        Radix2::new(n).process_rows(&mut batched, row_len, false);
        for c in 0..row_len {
            let col: Vec<Complex64> = (0..n).map(|r| data[r * row_len + c]).collect();
            let expect = naive_dft(&col, false);
            for r in 0..n {
                assert!((batched[r * row_len + c] - expect[r]).norm() < 1e-10);
            }
        }
        let mut zero = vec![Complex64::new(0.0, 0.0); n];
        Radix2::new(n).process(&mut zero, true);
        assert!(zero.iter().all(|z| z.norm() == 0.0));
    }
}
