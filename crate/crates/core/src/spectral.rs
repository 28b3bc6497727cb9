//! Discrete Fourier transforms of arbitrary length and circulant matrices.
//!
//! Convention: the forward transform is unnormalized,
//! `p̂ₖ = Σₗ pₗ e^{−2πi lk/n}`, and the inverse carries the `1/n`.
//! Power-of-two lengths use an iterative radix-2 kernel; every other length
//! goes through Bluestein's chirp-z reduction onto a power-of-two convolution.
//!
//! `circ(pᵀ)` is the matrix whose row `k` is `p` cyclically shifted right by
//! `k`, so `circ(pᵀ)[j][l] = p[(l − j) mod n]`. Its eigenvalues are `conj(p̂)`
//! for real `p`, which is what [`circulant_matvec`] and [`circulant_solve`]
//! use.

use std::cell::{Cell, RefCell};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative threshold below which a DFT coefficient counts as zero.
pub const DEFAULT_SUPPORT_TOL: f64 = 1e-12;

thread_local! {
    static TRANSFORMS: Cell<u64> = const { Cell::new(0) };
    static TWIDDLES: RefCell<HashMap<usize, Rc<Vec<Complex64>>>> = RefCell::new(HashMap::new());
}

/// `e^{−2πik/n}` for `k < n/2`, cached per length. Each entry is computed
/// directly, not by recurrence, to keep the error flat.
fn forward_twiddles(n: usize) -> Rc<Vec<Complex64>> {
    TWIDDLES.with(|cache| {
        Rc::clone(cache.borrow_mut().entry(n).or_insert_with(|| {
            let step = -2.0 * PI / n as f64;
            Rc::new((0..n / 2).map(|k| Complex64::from_polar(1.0, step * k as f64)).collect())
        }))
    })
}

/// Number of forward or inverse transforms executed on this thread.
pub fn transform_count() -> u64 {
    TRANSFORMS.with(Cell::get)
}

fn bump() {
    TRANSFORMS.with(|c| c.set(c.get() + 1));
}

fn fft_pow2_in_place(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            buf.swap(i, j);
        }
    }
    let twiddles = forward_twiddles(n);
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let a = buf[start + k];
                let w = twiddles[k * stride];
                let b = buf[start + k + half] * if inverse { w.conj() } else { w };
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

fn bluestein(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let n = input.len();
    let m = (2 * n - 1).next_power_of_two();
    let sign = if inverse { 1.0 } else { -1.0 };
    // w_k = e^{∓iπ k²/n}; k² is reduced mod 2n so the phase stays accurate.
    let chirp: Vec<Complex64> = (0..n)
        .map(|k| {
            let k2 = (k as u128 * k as u128 % (2 * n as u128)) as f64;
            Complex64::from_polar(1.0, sign * PI * k2 / n as f64)
        })
        .collect();

    let mut a = vec![Complex64::new(0.0, 0.0); m];
    for k in 0..n {
        a[k] = input[k] * chirp[k];
    }
    let mut b = vec![Complex64::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        b[k] = chirp[k].conj();
        b[m - k] = chirp[k].conj();
    }
    fft_pow2_in_place(&mut a, false);
    fft_pow2_in_place(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft_pow2_in_place(&mut a, true);
    let scale = 1.0 / m as f64;
    (0..n).map(|k| a[k] * scale * chirp[k]).collect()
}

fn transform(input: &[Complex64], inverse: bool) -> Vec<Complex64> {
    bump();
    let n = input.len();
    let mut out = if n.is_power_of_two() {
        let mut buf = input.to_vec();
        fft_pow2_in_place(&mut buf, inverse);
        buf
    } else {
        bluestein(input, inverse)
    };
    if inverse {
        let s = 1.0 / n as f64;
        for v in &mut out {
            *v *= s;
        }
    }
    out
}

/// Unnormalized forward DFT of a complex vector.
pub fn dft_complex(v: &[Complex64]) -> Vec<Complex64> {
    if v.is_empty() {
        return Vec::new();
    }
    transform(v, false)
}

/// Unnormalized forward DFT of a real vector.
pub fn dft(v: &[f64]) -> Vec<Complex64> {
    let c: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    dft_complex(&c)
}

/// Inverse DFT including the `1/n` factor.
pub fn idft(v: &[Complex64]) -> Vec<Complex64> {
    if v.is_empty() {
        return Vec::new();
    }
    transform(v, true)
}

/// Inverse DFT keeping only real parts, for spectra of real signals.
pub fn idft_real(v: &[Complex64]) -> Vec<f64> {
    idft(v).into_iter().map(|c| c.re).collect()
}

fn support_mask(spectrum: &[Complex64], tol: f64) -> Vec<bool> {
    let max = spectrum.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return vec![false; spectrum.len()];
    }
    spectrum.iter().map(|c| c.norm() > tol * max).collect()
}

/// Indices `k` with `|p̂ₖ| > tol · maxⱼ|p̂ⱼ|`.
pub fn spectral_support(spectrum: &[Complex64], tol: f64) -> Vec<usize> {
    support_mask(spectrum, tol)
        .into_iter()
        .enumerate()
        .filter_map(|(k, on)| on.then_some(k))
        .collect()
}

/// `‖v̂‖₀` under a relative threshold.
pub fn dft_support(v: &[f64], tol: f64) -> usize {
    support_mask(&dft(v), tol).into_iter().filter(|&b| b).count()
}

/// Rows of `circ(pᵀ)`: row `k` is `p` shifted right by `k`.
pub fn circulant_rows(p: &[f64]) -> Vec<Vec<f64>> {
    let n = p.len();
    (0..n)
        .map(|k| (0..n).map(|l| p[(l + n - k) % n]).collect())
        .collect()
}

/// `circ(pᵀ) · z` through the DFT diagonalization.
pub fn circulant_matvec(p: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    if p.len() != z.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: z.len(),
        });
    }
    let ph = dft(p);
    let mut zh = dft(z);
    for (a, b) in zh.iter_mut().zip(&ph) {
        *a *= b.conj();
    }
    Ok(idft_real(&zh))
}

/// Solves `circ(pᵀ) · x = b` by division in the frequency domain.
///
/// Frequencies with `|p̂ₖ| ≤ 10⁻¹² · max|p̂|` make the system singular and are
/// reported by index.
pub fn circulant_solve(p: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if p.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            found: b.len(),
        });
    }
    let ph = dft(p);
    let mask = support_mask(&ph, DEFAULT_SUPPORT_TOL);
    let vanishing: Vec<usize> = mask
        .iter()
        .enumerate()
        .filter_map(|(k, &on)| (!on).then_some(k))
        .collect();
    if !vanishing.is_empty() {
        return Err(Error::Singular {
            frequencies: vanishing,
        });
    }
    let mut bh = dft(b);
    for (a, e) in bh.iter_mut().zip(&ph) {
        *a /= e.conj();
    }
    Ok(idft_real(&bh))
}
