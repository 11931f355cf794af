//! Scalar special functions: fractional-order Bessel J, its positive zeros,
//! and the Mittag-Leffler function (used as a closed-form solver oracle).
//!
//! Bessel evaluation uses the ascending power series for small arguments and
//! the Hankel large-argument expansion beyond; zeros are seeded by the McMahon
//! asymptotic and polished by Newton to 1e-10. Orders of interest are
//! nu in (-1, 1) (the fractional-noise constructions use nu = -H and 1 - H).

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

const SERIES_CUTOFF: f64 = 16.0;

fn bessel_series(nu: f64, x: f64) -> f64 {
    // J_nu(x) = (x/2)^nu sum_k (-1)^k (x^2/4)^k / (k! Gamma(nu+k+1))
    let q = x * x / 4.0;
    let mut term = 1.0 / gamma(nu + 1.0);
    let mut sum = term;
    for k in 1..80 {
        term *= -q / (k as f64 * (nu + k as f64));
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) {
            break;
        }
    }
    (x / 2.0).powf(nu) * sum
}

fn bessel_hankel(nu: f64, x: f64) -> f64 {
    // J_nu(x) ~ sqrt(2/(pi x)) [ P cos(omega) - Q sin(omega) ],
    // omega = x - nu pi/2 - pi/4, mu = 4 nu^2
    let mu = 4.0 * nu * nu;
    let omega = x - nu * std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4;
    let z = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    // asymptotic factors (mu - (2k-1)^2); ten terms bottom out near 1e-10
    // at the series/asymptotic seam
    let mut num = 1.0;
    let mut denom = 1.0;
    let mut power = 1.0;
    for k in 1..=10 {
        num *= mu - ((2 * k - 1) as f64).powi(2);
        denom *= k as f64;
        power *= z;
        let term = num / (denom * power);
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
    }
    (2.0 / (std::f64::consts::PI * x)).sqrt() * (p * omega.cos() - q * omega.sin())
}

/// Bessel function of the first kind, fractional order `nu > -1`, `x > 0`.
pub fn bessel_j(nu: f64, x: f64) -> Result<f64> {
    if nu <= -1.0 {
        return Err(Error::Parameter(format!("bessel_j requires nu > -1, got {nu}")));
    }
    if !(x > 0.0) {
        return Err(Error::Parameter(format!("bessel_j requires x > 0, got {x}")));
    }
    Ok(if x <= SERIES_CUTOFF {
        bessel_series(nu, x)
    } else {
        bessel_hankel(nu, x)
    })
}

/// d/dx J_nu(x) via the recurrence (J_{nu-1} - J_{nu+1}) / 2.
pub fn bessel_j_prime(nu: f64, x: f64) -> Result<f64> {
    let lower = if x <= SERIES_CUTOFF {
        bessel_series(nu - 1.0, x)
    } else {
        bessel_hankel(nu - 1.0, x)
    };
    let upper = bessel_j(nu + 1.0, x)?;
    Ok(0.5 * (lower - upper))
}

/// First `count` positive zeros of J_nu, McMahon-seeded, Newton-polished to
/// 1e-10. Fails loudly (with the offending index) if Newton stalls.
pub fn bessel_zeros(nu: f64, count: usize) -> Result<Vec<f64>> {
    let mu = 4.0 * nu * nu;
    let mut zeros = Vec::with_capacity(count);
    for n in 1..=count {
        // McMahon: j_{nu,n} ~ b - (mu-1)/(8b) - 4(mu-1)(7mu-31)/(3 (8b)^3)
        let b = (n as f64 + nu / 2.0 - 0.25) * std::f64::consts::PI;
        let mut x = b - (mu - 1.0) / (8.0 * b)
            - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * (8.0 * b).powi(3));
        let mut converged = false;
        for _ in 0..60 {
            let f = bessel_j(nu, x)?;
            let fp = bessel_j_prime(nu, x)?;
            if fp == 0.0 {
                break;
            }
            let step = f / fp;
            x -= step;
            if step.abs() <= 1e-10 * x.max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged || !x.is_finite() || x <= 0.0 {
            return Err(Error::Numerical(format!(
                "Newton failed on zero #{n} of J_{nu}"
            )));
        }
        if let Some(&prev) = zeros.last() {
            if x <= prev {
                return Err(Error::Numerical(format!(
                    "zero ordering broke at index {n} for nu = {nu}"
                )));
            }
        }
        zeros.push(x);
    }
    Ok(zeros)
}

/// Mittag-Leffler function `E_r(z) = sum_k z^k / Gamma(r k + 1)`, truncated at
/// `terms` (the solver oracle uses 50; plenty for |z| up to a few).
pub fn mittag_leffler(r: f64, z: f64, terms: usize) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Parameter(format!("mittag_leffler requires r > 0, got {r}")));
    }
    let mut sum = 0.0;
    let mut zk = 1.0;
    for k in 0..terms {
        sum += zk / gamma(r * k as f64 + 1.0);
        zk *= z;
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bessel_half_order_closed_form() {
        // J_{1/2}(x) = sqrt(2/(pi x)) sin x, J_{-1/2}(x) = sqrt(2/(pi x)) cos x
        for &x in &[0.3, 1.0, 5.0, 15.9, 16.1, 40.0, 500.0] {
            let scale = (2.0 / (std::f64::consts::PI * x)).sqrt();
            let jp = bessel_j(0.5, x).unwrap();
            let jm = bessel_j(-0.5, x).unwrap();
            assert!((jp - scale * x.sin()).abs() < 1e-9 * scale.max(1.0), "J_1/2 at {x}");
            assert!((jm - scale * x.cos()).abs() < 1e-9 * scale.max(1.0), "J_-1/2 at {x}");
        }
    }

    #[test]
    fn series_and_hankel_agree_at_the_seam() {
        for &nu in &[-0.6, -0.3, 0.4, 0.7] {
            for &x in &[15.0, 16.0, 17.0, 18.0] {
                let a = bessel_series(nu, x);
                let b = bessel_hankel(nu, x);
                assert!((a - b).abs() < 1e-9, "nu={nu} x={x}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn zeros_are_zeros() {
        for &nu in &[-0.6, 0.4] {
            let zs = bessel_zeros(nu, 300).unwrap();
            for (i, &z) in zs.iter().enumerate() {
                let v = bessel_j(nu, z).unwrap();
                assert!(v.abs() < 1e-8, "nu={nu} zero #{i} residual {v}");
            }
            // interlacing-ish spacing: gaps approach pi
            let gap = zs[299] - zs[298];
            assert!((gap - std::f64::consts::PI).abs() < 1e-3);
        }
        // half-order zeros are exactly n pi
        let zs = bessel_zeros(0.5, 10).unwrap();
        for (n, &z) in zs.iter().enumerate() {
            assert!((z - (n as f64 + 1.0) * std::f64::consts::PI).abs() < 1e-9);
        }
    }

    #[test]
    fn mittag_leffler_reduces_to_exp() {
        for &z in &[-1.0, 0.0, 0.5, 2.0] {
            let e = mittag_leffler(1.0, z, 60).unwrap();
            assert!((e - z.exp()).abs() < 1e-12 * z.exp().max(1.0));
        }
        // E_2(z^2) = cosh z
        let z: f64 = 1.3;
        let e = mittag_leffler(2.0, z * z, 60).unwrap();
        assert!((e - z.cosh()).abs() < 1e-12);
    }
}
