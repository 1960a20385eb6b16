//! Iterative radix-2 FFT over `Complex64`.
//!
//! Every transform in this crate runs on a power-of-two length (analysis
//! frames are 2048 or 16384 samples, correlations are zero-padded to the
//! next power of two), so a plain Cooley-Tukey kernel covers all of it.
//! The handful of 12-point transforms in the harmony features use the
//! direct [`dft`] instead.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use crate::math;

/// Smallest power of two >= `n` (and >= 1).
pub fn next_pow2(n: usize) -> usize {
    let mut p = 1;
    while p < n {
        p <<= 1;
    }
    p
}

/// In-place forward FFT. `buf.len()` must be a power of two.
pub fn fft_in_place(buf: &mut [Complex64]) {
    let n = buf.len();
    assert!(n.is_power_of_two(), "fft length must be a power of two");
    if n <= 1 {
        return;
    }

    // Bit-reversal permutation.
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }

    let mut len = 2;
    while len <= n {
        let ang = -2.0 * PI / len as f64;
        let wlen = Complex64::new(math::cos(ang), math::sin(ang));
        for start in (0..n).step_by(len) {
            let mut w = Complex64::new(1.0, 0.0);
            for k in 0..len / 2 {
                let u = buf[start + k];
                let v = buf[start + k + len / 2] * w;
                buf[start + k] = u + v;
                buf[start + k + len / 2] = u - v;
                w *= wlen;
            }
        }
        len <<= 1;
    }
}

/// In-place inverse FFT (includes the 1/n scaling).
pub fn ifft_in_place(buf: &mut [Complex64]) {
    for v in buf.iter_mut() {
        *v = v.conj();
    }
    fft_in_place(buf);
    let n = buf.len() as f64;
    for v in buf.iter_mut() {
        *v = v.conj() / n;
    }
}

/// Forward FFT of a real signal zero-padded to `n` (a power of two).
pub fn fft_real_padded(signal: &[f64], n: usize) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for (slot, &x) in buf.iter_mut().zip(signal.iter()) {
        slot.re = x;
    }
    fft_in_place(&mut buf);
    buf
}

/// Direct O(n^2) DFT of a real signal; fine for the short transforms.
pub fn dft(signal: &[f64]) -> Vec<Complex64> {
    let n = signal.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, &x) in signal.iter().enumerate() {
            let ang = -2.0 * PI * (k * i) as f64 / n as f64;
            acc += Complex64::new(x * math::cos(ang), x * math::sin(ang));
        }
        out.push(acc);
    }
    out
}

/// Magnitudes of the first `keep` bins of the direct DFT.
pub fn dft_magnitudes(signal: &[f64], keep: usize) -> Vec<f64> {
    dft(signal).iter().take(keep).map(|c| magnitude(*c)).collect()
}

#[inline]
pub fn magnitude(c: Complex64) -> f64 {
    math::sqrt(c.re * c.re + c.im * c.im)
}
