//! Thin FFT layer over rustfft with per-thread plan caching.
//!
//! Conventions: `fft` computes the unnormalized forward DFT, `ifft` divides by
//! the length, so `ifft(fft(f)) == f` to roundoff. Frequency bin `k` carries
//! the angular frequency `omega_k = 2*pi*k'/L` where `k' = k` for `k <= N/2`
//! and `k' = k - N` above.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan_forward(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

fn plan_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

/// Forward DFT of a real signal.
pub fn fft(values: &[f64]) -> Vec<Complex<f64>> {
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    plan_forward(values.len()).process(&mut buf);
    buf
}

/// Forward DFT of a complex signal, in place.
pub fn fft_complex(buf: &mut [Complex<f64>]) {
    plan_forward(buf.len()).process(buf);
}

/// Inverse DFT (normalized by 1/N), real part returned. The imaginary part is
/// discarded; callers that multiply spectra by even real multipliers stay real
/// to roundoff anyway.
pub fn ifft_real(spectrum: &[Complex<f64>]) -> Vec<f64> {
    let n = spectrum.len();
    let mut buf = spectrum.to_vec();
    plan_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter().map(|c| c.re * scale).collect()
}

/// Signed frequency index for bin `k` of an N-point DFT: 0..N/2 then negative.
pub fn signed_index(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

/// Band-limited (trigonometric) upsampling of a periodic real signal by an
/// integer factor. Output has `factor * n` samples over the same period.
pub fn upsample(values: &[f64], factor: usize) -> Vec<f64> {
    let n = values.len();
    let m = n * factor;
    if factor == 1 {
        return values.to_vec();
    }
    let spec = fft(values);
    let mut padded = vec![Complex::new(0.0, 0.0); m];
    for (k, &c) in spec.iter().enumerate() {
        let s = signed_index(k, n);
        if 2 * k == n {
            // split the Nyquist bin symmetrically to keep the signal real
            padded[k] = c * 0.5;
            padded[m - k] = c * 0.5;
        } else if s >= 0 {
            padded[k] = c;
        } else {
            padded[(m as i64 + s) as usize] = c;
        }
    }
    let mut out = ifft_real(&padded);
    let scale = factor as f64;
    for v in &mut out {
        *v *= scale;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let f: Vec<f64> = (0..64).map(|i| (i as f64 * 0.37).sin() + 0.2).collect();
        let back = ifft_real(&fft(&f));
        for (a, b) in f.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn upsample_hits_original_samples() {
        let n = 64;
        let f: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 / n as f64;
                (2.0 * std::f64::consts::PI * 3.0 * x).cos() - 0.5 * (2.0 * std::f64::consts::PI * 7.0 * x).sin()
            })
            .collect();
        let up = upsample(&f, 4);
        for i in 0..n {
            assert!((up[4 * i] - f[i]).abs() < 1e-12);
        }
        // interior point of a pure cosine is exact under trig interpolation
        let x = 2.5 / n as f64;
        let expect = (2.0 * std::f64::consts::PI * 3.0 * x).cos()
            - 0.5 * (2.0 * std::f64::consts::PI * 7.0 * x).sin();
        assert!((up[10] - expect).abs() < 1e-12);
    }
}
