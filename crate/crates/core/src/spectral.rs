//! Fourier-space primitives on a uniform periodic grid.
//!
//! All differential operations in this crate (derivative, antiderivative,
//! exact translation, band-limited point evaluation) are realized through the
//! discrete Fourier transform of real samples. Conventions:
//!
//! * samples live at `x_j = x0 + j*dx`, `j = 0..n`, period `L = n*dx`;
//! * the signed wavenumber of bin `j` is `k_j = 2*pi*s_j/L` with
//!   `s_j = j` for `j <= n/2` and `s_j = j - n` otherwise;
//! * the Nyquist bin (`j = n/2`, present because `n` is even) is zeroed by
//!   the derivative and antiderivative and translated with a real `cos`
//!   factor, which keeps real inputs exactly real.

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Forward DFT of real samples.
pub(crate) fn dft(values: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_forward(buf.len());
        fft.process(&mut buf);
    });
    buf
}

/// Inverse DFT, returning the real part of the normalized result.
pub(crate) fn idft_real(mut spectrum: Vec<Complex<f64>>) -> Vec<f64> {
    let n = spectrum.len();
    PLANNER.with(|p| {
        let fft = p.borrow_mut().plan_fft_inverse(n);
        fft.process(&mut spectrum);
    });
    let scale = 1.0 / n as f64;
    spectrum.iter().map(|c| c.re * scale).collect()
}

/// Signed wavenumber index of bin `j` for an `n`-point transform.
fn signed_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Signed wavenumber `k_j` of bin `j` on a grid of period `length`.
pub(crate) fn wavenumber(j: usize, n: usize, length: f64) -> f64 {
    2.0 * std::f64::consts::PI * signed_index(j, n) as f64 / length
}

/// Spectral derivative: multiplies bin `j` by `i*k_j`, zeroing Nyquist.
pub(crate) fn derivative(values: &[f64], length: f64) -> Vec<f64> {
    let n = values.len();
    let mut spectrum = dft(values);
    for (j, c) in spectrum.iter_mut().enumerate() {
        if n.is_multiple_of(2) && j == n / 2 {
            *c = Complex::new(0.0, 0.0);
        } else {
            let k = wavenumber(j, n, length);
            *c *= Complex::new(0.0, k);
        }
    }
    idft_real(spectrum)
}

/// Spectral antiderivative with zero-mean output: divides bin `j` by `i*k_j`
/// and zeroes both the mean bin and Nyquist.
///
/// The caller is responsible for the zero-mean precondition on the input;
/// this routine simply discards whatever sits in bin 0.
pub(crate) fn antiderivative_zero_mean(values: &[f64], length: f64) -> Vec<f64> {
    let n = values.len();
    let mut spectrum = dft(values);
    for (j, c) in spectrum.iter_mut().enumerate() {
        if j == 0 || (n.is_multiple_of(2) && j == n / 2) {
            *c = Complex::new(0.0, 0.0);
        } else {
            let k = wavenumber(j, n, length);
            *c /= Complex::new(0.0, k);
        }
    }
    idft_real(spectrum)
}

/// Exact periodic translation: returns samples of `u(x - shift)`.
///
/// Bin `j` is multiplied by `exp(-i*k_j*shift)`; the Nyquist bin gets the
/// real factor `cos(k_N*shift)` so real inputs stay real.
pub(crate) fn translate(values: &[f64], length: f64, shift: f64) -> Vec<f64> {
    let n = values.len();
    let mut spectrum = dft(values);
    for (j, c) in spectrum.iter_mut().enumerate() {
        let k = wavenumber(j, n, length);
        if n.is_multiple_of(2) && j == n / 2 {
            *c *= (k * shift).cos();
        } else {
            *c *= Complex::from_polar(1.0, -k * shift);
        }
    }
    idft_real(spectrum)
}

/// Band-limited (trigonometric) evaluation of the sampled field at an
/// arbitrary point. Exact for fields that are resolved on the grid.
///
/// `x0` is the coordinate of sample 0. Cost is O(n) per point.
pub(crate) fn eval_trig(spectrum: &[Complex<f64>], length: f64, x0: f64, x: f64) -> f64 {
    let n = spectrum.len();
    let mut acc = 0.0;
    for (j, c) in spectrum.iter().enumerate() {
        let k = wavenumber(j, n, length);
        let phase = k * (x - x0);
        if n.is_multiple_of(2) && j == n / 2 {
            acc += c.re * phase.cos();
        } else {
            acc += c.re * phase.cos() - c.im * phase.sin();
        }
    }
    acc / n as f64
}
