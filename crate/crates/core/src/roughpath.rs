//! Convolutional rough paths: the pair (xi, mu) with mu standing for the
//! resonant term pi(phi * xi, xi) that the paracontrolled solver consumes as
//! data.
//!
//! Smooth (band-limited) signals are lifted canonically. Stochastic signals
//! are built from series expansions xi = sum_n a_n zeta_n with i.i.d. Gaussian
//! zeta_n, truncated along a schedule that forces the level differences of the
//! resonant term to be summable; the per-level differences are reported as
//! empirical Cauchy diagnostics. The module also carries the regular-kernel
//! reduction check and the ill-posedness probe demonstrating why the rough
//! datum is needed at all.

use rand::Rng;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{GridFunction, GridSpec};
use crate::kernels;
use crate::paracalc::{convolve, resonant};
use crate::rng;
use crate::special;
use crate::spectral::{BesovParams, DyadicPartition};

/// Measured regularities attached to a rough path; NaN when the block-decay
/// fit is degenerate (e.g. single-frequency signals).
#[derive(Debug, Clone, Copy)]
pub struct BesovReport {
    /// measured regularity of xi (noise class beta corresponds to beta - 1)
    pub xi_regularity: f64,
    /// measured regularity of mu (target alpha + beta - 1)
    pub mu_regularity: f64,
}

/// A noise xi enhanced with the resonant datum mu ~ pi(phi * xi, xi), tied to
/// the kernel it was built against.
#[derive(Debug, Clone)]
pub struct ConvRoughPath {
    pub xi: GridFunction,
    pub mu: GridFunction,
    pub kernel_id: String,
    pub besov_report: BesovReport,
}

fn fit_or_nan(part: &DyadicPartition, f: &GridFunction) -> f64 {
    part.estimate_regularity(f, f64::INFINITY, None).unwrap_or(f64::NAN)
}

/// Fraction of spectral energy above half the Nyquist frequency; the
/// "smooth cone" admission test for canonical lifts.
pub fn top_octave_energy_fraction(f: &GridFunction) -> f64 {
    let n = f.spec().n();
    let mut top = 0.0;
    let mut total = 0.0;
    for c in 0..f.channels() {
        let s = fft::fft(&f.channel(c));
        for (k, v) in s.iter().enumerate() {
            let e = v.norm_sqr();
            total += e;
            if fft::signed_index(k, n).unsigned_abs() as usize > n / 4 {
                top += e;
            }
        }
    }
    if total == 0.0 {
        0.0
    } else {
        top / total
    }
}

/// Canonical lift of a band-limited signal: mu is computed directly.
pub fn lift_smooth(
    phi: &GridFunction,
    xi: &GridFunction,
    part: &DyadicPartition,
    kernel_id: &str,
) -> Result<ConvRoughPath> {
    let frac = top_octave_energy_fraction(xi);
    if frac > 1e-8 {
        return Err(Error::Smoothness(format!(
            "signal is not band-limited: top-octave energy fraction {frac:.2e}"
        )));
    }
    let mu = resonant(&convolve(phi, xi)?, xi, part)?;
    Ok(ConvRoughPath {
        besov_report: BesovReport {
            xi_regularity: fit_or_nan(part, xi),
            mu_regularity: fit_or_nan(part, &mu),
        },
        xi: xi.clone(),
        mu,
        kernel_id: kernel_id.to_string(),
    })
}

/// One term of a series expansion: a windowed trigonometric coefficient
/// function, stored parametrically and materialized on demand.
#[derive(Debug, Clone, Copy)]
pub enum Coefficient {
    /// `amp * cos(w t) * chi(t)`
    Cos { w: f64, amp: f64 },
    /// `amp * sin(w t) * chi(t)`
    Sin { w: f64, amp: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseKind {
    Bm,
    Fbm { h: f64 },
}

/// Series expansion xi = sum_n a_n zeta_n of a Gaussian noise, with the
/// coefficient Besov norms that drive the truncation schedule.
#[derive(Debug, Clone)]
pub struct SeriesExpansion {
    pub spec: GridSpec,
    pub chi: GridFunction,
    pub coefficients: Vec<Coefficient>,
    /// `||a_n||_{beta-1, p, 1}` (the schedule input)
    pub norms: Vec<f64>,
    /// `||a_n||_{beta-1, p, p}` (recorded for diagnostics only)
    pub norms_qp: Vec<f64>,
    pub beta: f64,
    pub p: f64,
    pub kind: NoiseKind,
}

impl SeriesExpansion {
    /// Materialize the n-th coefficient function (0-based).
    pub fn coefficient(&self, k: usize) -> GridFunction {
        let f = match self.coefficients[k] {
            Coefficient::Cos { w, amp } => {
                GridFunction::from_fn(self.spec, move |t| amp * (w * t).cos())
            }
            Coefficient::Sin { w, amp } => {
                GridFunction::from_fn(self.spec, move |t| amp * (w * t).sin())
            }
        };
        f.mul(&self.chi).expect("chi shares the spec")
    }

    /// Antiderivative of the n-th coefficient vanishing at 0 (the path-side
    /// coefficient), windowed like the noise.
    pub fn path_coefficient(&self, k: usize) -> GridFunction {
        let f = match self.coefficients[k] {
            Coefficient::Cos { w, amp } => {
                GridFunction::from_fn(self.spec, move |t| amp * (w * t).sin() / w)
            }
            Coefficient::Sin { w, amp } => {
                GridFunction::from_fn(self.spec, move |t| amp * (1.0 - (w * t).cos()) / w)
            }
        };
        f.mul(&self.chi).expect("chi shares the spec")
    }

    /// Path sample sum_{k <= terms} zeta_k A_k(t) from a seeded draw.
    pub fn sample_path(&self, terms: usize, seed: u64) -> GridFunction {
        let mut r = rng::rng(seed);
        let mut acc = GridFunction::zeros(self.spec);
        for k in 0..terms.min(self.coefficients.len()) {
            let z: f64 = r.sample(rand_distr::StandardNormal);
            acc = acc.add(&self.path_coefficient(k).scale(z)).unwrap();
        }
        acc
    }
}

fn coefficient_norms(
    part: &DyadicPartition,
    exp_spec: GridSpec,
    chi: &GridFunction,
    coeffs: &[Coefficient],
    beta: f64,
    p: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut q1 = Vec::with_capacity(coeffs.len());
    let mut qp = Vec::with_capacity(coeffs.len());
    for &c in coeffs {
        let f = match c {
            Coefficient::Cos { w, amp } => {
                GridFunction::from_fn(exp_spec, move |t| amp * (w * t).cos())
            }
            Coefficient::Sin { w, amp } => {
                GridFunction::from_fn(exp_spec, move |t| amp * (w * t).sin())
            }
        }
        .mul(chi)?;
        let block = part.block_norms(&f, p)?;
        let weight = |q: f64| -> f64 {
            let it = block
                .iter()
                .enumerate()
                .map(|(idx, &v)| 2f64.powf((idx as f64 - 1.0) * (beta - 1.0)) * v);
            if q.is_infinite() {
                it.fold(0.0, f64::max)
            } else {
                it.map(|w| w.powf(q)).sum::<f64>().powf(1.0 / q)
            }
        };
        q1.push(weight(1.0));
        qp.push(weight(p));
    }
    Ok((q1, qp))
}

/// Karhunen-Loeve coefficients of white noise on the window [0, L/2]:
/// `a_n(t) = sqrt(2/T) cos((n - 1/2) pi t / T) chi(t)`.
pub fn bm_coefficients(
    part: &DyadicPartition,
    chi: &GridFunction,
    n_max: usize,
    beta: f64,
    p: f64,
) -> Result<SeriesExpansion> {
    let spec = part.spec();
    if chi.spec() != spec {
        return Err(Error::GridMismatch("window and partition grids differ".into()));
    }
    if chi.tail_sup() > 0.0 {
        return Err(Error::Support("window must be supported in [0, L/2]".into()));
    }
    let t_w = spec.l() / 2.0;
    let amp = (2.0 / t_w).sqrt();
    let coeffs: Vec<Coefficient> = (1..=n_max)
        .map(|n| Coefficient::Cos {
            w: (n as f64 - 0.5) * std::f64::consts::PI / t_w,
            amp,
        })
        .collect();
    let (norms, norms_qp) = coefficient_norms(part, spec, chi, &coeffs, beta, p)?;
    Ok(SeriesExpansion {
        spec,
        chi: chi.clone(),
        coefficients: coeffs,
        norms,
        norms_qp,
        beta,
        p,
        kind: NoiseKind::Bm,
    })
}

/// Sine-series coefficients of fractional Brownian motion on the window
/// [0, L/2]: the two families ride on the positive zeros of J_{-H} and
/// J_{1-H}, with weights `x_n^{-2H} J_{1-H}(x_n)^{-2}` and
/// `y_n^{-2H} J_{-H}(y_n)^{-2}` up to one overall constant. That constant is
/// not taken from a formula: it is calibrated so the synthesized process has
/// variance `(L/4)^{2H}` at `t = L/4`, and cross-checked elsewhere against an
/// exact-covariance sampler.
pub fn fbm_coefficients(
    part: &DyadicPartition,
    h: f64,
    chi: &GridFunction,
    n_max: usize,
    beta: f64,
    p: f64,
) -> Result<SeriesExpansion> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Parameter(format!("Hurst index must lie in (0,1), got {h}")));
    }
    let spec = part.spec();
    if chi.spec() != spec {
        return Err(Error::GridMismatch("window and partition grids differ".into()));
    }
    let t_w = spec.l() / 2.0;
    let xs = special::bessel_zeros(-h, n_max)?;
    let ys = special::bessel_zeros(1.0 - h, n_max)?;
    let mut sig = Vec::with_capacity(n_max);
    let mut tau = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let j1 = special::bessel_j(1.0 - h, xs[n])?;
        sig.push(xs[n].powf(-2.0 * h) / (j1 * j1));
        let j0 = special::bessel_j(-h, ys[n])?;
        tau.push(ys[n].powf(-2.0 * h) / (j0 * j0));
    }
    // calibrate the overall constant at t = L/4 (s = 1/2 in expansion time)
    let s = 0.5;
    let mut var = 0.0;
    for n in 0..n_max {
        var += sig[n] * (xs[n] * s).sin().powi(2) / (xs[n] * xs[n]);
        var += tau[n] * (1.0 - (ys[n] * s).cos()).powi(2) / (ys[n] * ys[n]);
    }
    let c_h = s.powf(2.0 * h) / var;
    // noise coefficients are the t-derivatives of the path expansion scaled
    // from [0,1] onto [0, T]: frequencies x_n / T, amplitudes T^{H-1} sigma_n
    let mut coeffs = Vec::with_capacity(2 * n_max);
    for n in 0..n_max {
        coeffs.push(Coefficient::Cos {
            w: xs[n] / t_w,
            amp: t_w.powf(h - 1.0) * (c_h * sig[n]).sqrt(),
        });
        coeffs.push(Coefficient::Sin {
            w: ys[n] / t_w,
            amp: t_w.powf(h - 1.0) * (c_h * tau[n]).sqrt(),
        });
    }
    let (norms, norms_qp) = coefficient_norms(part, spec, chi, &coeffs, beta, p)?;
    Ok(SeriesExpansion {
        spec,
        chi: chi.clone(),
        coefficients: coeffs,
        norms,
        norms_qp,
        beta,
        p,
        kind: NoiseKind::Fbm { h },
    })
}

/// Truncation schedule: `m_n` is the smallest cutoff past `m_{n-1}` whose
/// squared-norm tail (over the built range) is at most `n^{-6}`.
#[derive(Debug, Clone)]
pub struct Schedule {
    /// m_n for n = 1..=levels
    pub m: Vec<usize>,
    /// true if some level only closed because the built range ran out
    pub exhausted: bool,
}

pub fn truncation_schedule(exp: &SeriesExpansion, n_levels: usize) -> Schedule {
    let n_built = exp.norms.len();
    // suffix sums: tail[k] = sum_{i >= k} norms[i]^2
    let mut tail = vec![0.0; n_built + 1];
    for k in (0..n_built).rev() {
        tail[k] = tail[k + 1] + exp.norms[k] * exp.norms[k];
    }
    let mut m = Vec::with_capacity(n_levels);
    let mut prev = 1usize;
    let mut exhausted = false;
    for n in 1..=n_levels {
        let budget = (n as f64).powi(-6);
        let mut k = prev;
        while k < n_built && tail[k] > budget {
            k += 1;
        }
        if k == n_built {
            exhausted = true;
        }
        m.push(k);
        prev = k;
    }
    Schedule { m, exhausted }
}

/// How the Gaussian draw is sourced; `Zero` is the test hook.
#[derive(Debug, Clone, Copy)]
pub enum Draw {
    Seeded(u64),
    Zero,
}

/// Truncated noises along the schedule, their final-level rough path, and the
/// per-level resonant differences `d_n` measured in the Cauchy-theorem norm
/// `(2 beta + gamma - 2, p/2, inf)`.
pub fn stochastic_resonant(
    exp: &SeriesExpansion,
    phi: &GridFunction,
    part: &DyadicPartition,
    gamma_reg: f64,
    draw: Draw,
    n_levels: usize,
) -> Result<(ConvRoughPath, Schedule, Vec<f64>)> {
    if exp.p < 2.0 {
        return Err(Error::Parameter(
            "Cauchy diagnostics need p >= 2 (the norm uses p/2)".into(),
        ));
    }
    if n_levels < 2 {
        return Err(Error::Parameter("need at least two levels".into()));
    }
    let schedule = truncation_schedule(exp, n_levels);
    let m_last = *schedule.m.last().unwrap();
    let zeta: Vec<f64> = match draw {
        Draw::Zero => vec![0.0; m_last],
        Draw::Seeded(seed) => {
            let mut r = rng::rng(seed);
            (0..m_last).map(|_| r.sample(rand_distr::StandardNormal)).collect()
        }
    };
    let bp = BesovParams::new(2.0 * exp.beta + gamma_reg - 2.0, exp.p / 2.0, f64::INFINITY)?;
    let mut xi = GridFunction::zeros(exp.spec);
    let mut next_k = 0usize;
    let mut prev_pi: Option<GridFunction> = None;
    let mut diagnostics = Vec::with_capacity(n_levels - 1);
    let mut final_pi = GridFunction::zeros(exp.spec);
    for &m_n in &schedule.m {
        while next_k < m_n {
            if zeta[next_k] != 0.0 {
                xi = xi.add(&exp.coefficient(next_k).scale(zeta[next_k]))?;
            }
            next_k += 1;
        }
        let pi_n = resonant(&convolve(phi, &xi)?, &xi, part)?;
        if let Some(prev) = prev_pi.take() {
            diagnostics.push(part.besov_norm(&pi_n.sub(&prev)?, bp)?);
        }
        prev_pi = Some(pi_n.clone());
        final_pi = pi_n;
    }
    let rp = ConvRoughPath {
        besov_report: BesovReport {
            xi_regularity: fit_or_nan(part, &xi),
            mu_regularity: fit_or_nan(part, &final_pi),
        },
        xi,
        mu: final_pi,
        kernel_id: "series".to_string(),
    };
    Ok((rp, schedule, diagnostics))
}

/// Report of the regular-kernel reduction: the resonant term against
/// `phi = psi 1_{[0,inf)}` differs from `psi(0)` times the one against the
/// plain windowed indicator by something strictly smoother.
#[derive(Debug, Clone)]
pub struct ReductionReport {
    pub defect_regularity: f64,
    pub singular_regularity: f64,
    pub reference_regularity: f64,
}

pub fn regular_reduction_check(
    psi: &GridFunction,
    chi: &GridFunction,
    xi: &GridFunction,
    part: &DyadicPartition,
) -> Result<(GridFunction, ReductionReport)> {
    let psi0 = psi.values()[0];
    if psi0 == 0.0 {
        return Err(Error::Parameter("reduction check needs psi(0) != 0".into()));
    }
    let spec = part.spec();
    let ind = GridFunction::from_fn(spec, |x| if x <= spec.l() / 2.0 { 1.0 } else { 0.0 });
    let phi = psi.mul(&ind)?.mul(chi)?;
    let reference = ind.mul(chi)?;
    let term1 = resonant(&convolve(&phi, xi)?, xi, part)?;
    let term2 = resonant(&convolve(&reference, xi)?, xi, part)?;
    let defect = term1.sub(&term2.scale(psi0))?;
    let report = ReductionReport {
        defect_regularity: fit_or_nan(part, &defect),
        singular_regularity: fit_or_nan(part, &term1),
        reference_regularity: fit_or_nan(part, &term2),
    };
    Ok((defect, report))
}

/// Outcome of the ill-posedness probe: fitted growth slopes of the resonant
/// norms across mollification levels, per kernel.
#[derive(Debug, Clone)]
pub struct ProbeReport {
    pub singular_slopes: Vec<f64>,
    pub step_slopes: Vec<f64>,
    pub singular_median: f64,
    pub step_median: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

/// Hard spectral truncation: keep blocks up to `j_cut` (commutes exactly with
/// the Littlewood-Paley analysis).
pub fn mollify(f: &GridFunction, part: &DyadicPartition, j_cut: i32) -> Result<GridFunction> {
    let blocks = part.blocks(f)?;
    let mut out = GridFunction::zeros(f.spec());
    for j in -1..=j_cut.min(part.j_max()) {
        out = out.add(&blocks[(j + 1) as usize])?;
    }
    Ok(out)
}

/// The counterexample harness: for independent fBM-derivative noises xi1, xi2
/// with Hurst index `h` in (1/2, 2/3) and a fractional kernel exponent in
/// (4/3 - h, 2 - 2h), the product (phi * xi1) xi2 has no limit under
/// mollification, while the step-kernel analogue does. Both resonants are
/// measured in the classical space (2 beta - 1, p/2, inf); the singular
/// kernel's norm then grows at rate ~ 1 - gamma per refinement level.
pub fn illposedness_probe(
    part: &DyadicPartition,
    h: f64,
    r_exp: f64,
    seeds: usize,
    master_seed: u64,
) -> Result<ProbeReport> {
    if !(h > 0.5 && h < 2.0 / 3.0) {
        return Err(Error::Parameter(format!(
            "probe needs Hurst index in (1/2, 2/3), got {h}"
        )));
    }
    if !(r_exp > 4.0 / 3.0 - h && r_exp < 2.0 - 2.0 * h) {
        return Err(Error::Parameter(format!(
            "probe needs kernel exponent in ({:.4}, {:.4}), got {r_exp}",
            4.0 / 3.0 - h,
            2.0 - 2.0 * h
        )));
    }
    let spec = part.spec();
    let t_w = spec.l() / 4.0;
    let phi_sing = kernels::fractional_kernel(spec, r_exp, t_w)?;
    let phi_step = kernels::step_kernel(spec, t_w)?;
    // The divergence lives at the refinement frontier: content below the cut
    // is a fixed, well-defined contribution that would mask the growth if the
    // norm supped over all blocks. Track the weighted block norm at the cut.
    let s_wt = 2.0 * h - 1.0;
    let frontier = |pi: &GridFunction, jc: i32| -> Result<f64> {
        let blocks = part.blocks(pi)?;
        let mut best: f64 = 0.0;
        for j in (jc - 1)..=jc {
            let nm = blocks[(j + 1) as usize].lp_norm(1.0)?;
            best = best.max(2f64.powi(j).powf(s_wt) * nm);
        }
        Ok(best)
    };
    let cuts: Vec<i32> = (1..=5).rev().map(|l| part.j_max() - l).collect();
    let mut singular_slopes = Vec::with_capacity(seeds);
    let mut step_slopes = Vec::with_capacity(seeds);
    for s in 0..seeds {
        let xi1 = crate::models::sample_fbm(spec, h, rng::split_seed(master_seed, 2 * s as u64))?
            .noise;
        let xi2 =
            crate::models::sample_fbm(spec, h, rng::split_seed(master_seed, 2 * s as u64 + 1))?
                .noise;
        let fit = |phi: &GridFunction| -> Result<f64> {
            let mut pts = Vec::new();
            for &jc in &cuts {
                let x1 = mollify(&xi1, part, jc)?;
                let x2 = mollify(&xi2, part, jc)?;
                let pi = resonant(&convolve(phi, &x1)?, &x2, part)?;
                pts.push((jc as f64, frontier(&pi, jc)?.log2()));
            }
            let n = pts.len() as f64;
            let sx: f64 = pts.iter().map(|p| p.0).sum();
            let sy: f64 = pts.iter().map(|p| p.1).sum();
            let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
            let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
            Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
        };
        singular_slopes.push(fit(&phi_sing)?);
        step_slopes.push(fit(&phi_step)?);
    }
    Ok(ProbeReport {
        singular_median: median(singular_slopes.clone()),
        step_median: median(step_slopes.clone()),
        singular_slopes,
        step_slopes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{fractional_kernel, taper};
    use crate::spectral::synthesize_decay;

    fn setup(n: usize, l: f64) -> (GridSpec, DyadicPartition) {
        let spec = GridSpec::new(n, l).unwrap();
        (spec, DyadicPartition::build(spec).unwrap())
    }

    fn window(spec: GridSpec) -> GridFunction {
        let l = spec.l();
        taper(spec, 0.1 * l, 0.375 * l, 0.5 * l).unwrap()
    }

    #[test]
    fn lift_smooth_basics() {
        let (spec, part) = setup(1024, 2.0);
        let phi = fractional_kernel(spec, 0.9, 0.25).unwrap();
        let zero = GridFunction::zeros(spec);
        let rp = lift_smooth(&phi, &zero, &part, "frac").unwrap();
        assert_eq!(rp.mu.lp_norm(f64::INFINITY).unwrap(), 0.0);

        // quadratic scaling and bit-identical recomputation
        let xi = synthesize_decay(&part, -0.4, f64::INFINITY, part.j_max() - 3, 42).unwrap();
        let rp1 = lift_smooth(&phi, &xi, &part, "frac").unwrap();
        let rp2 = lift_smooth(&phi, &xi.scale(3.0), &part, "frac").unwrap();
        let dev = rp2
            .mu
            .sub(&rp1.mu.scale(9.0))
            .unwrap()
            .lp_norm(f64::INFINITY)
            .unwrap();
        assert!(dev <= 1e-12 * rp2.mu.lp_norm(f64::INFINITY).unwrap().max(1.0));
        let again = lift_smooth(&phi, &xi, &part, "frac").unwrap();
        assert_eq!(rp1.mu, again.mu);

        // non-band-limited input is refused
        let rough = synthesize_decay(&part, 0.1, f64::INFINITY, part.j_max() - 1, 43).unwrap();
        assert!(matches!(
            lift_smooth(&phi, &rough, &part, "frac"),
            Err(Error::Smoothness(_))
        ));
    }

    #[test]
    fn lift_of_cosine_matches_direct_resonant() {
        let (spec, part) = setup(1024, 2.0);
        let mut delta = vec![0.0; spec.n()];
        delta[0] = 1.0 / spec.dx();
        let delta = GridFunction::from_values(spec, 1, delta).unwrap();
        let w = spec.omega(40);
        let xi = GridFunction::from_fn(spec, |x| (w * x).cos());
        let rp = lift_smooth(&delta, &xi, &part, "delta").unwrap();
        let direct = resonant(&xi, &xi, &part).unwrap();
        let dev = rp.mu.sub(&direct).unwrap().lp_norm(f64::INFINITY).unwrap();
        assert!(dev < 1e-9);
    }

    #[test]
    fn lift_mu_regularity_tracks_target_exponent() {
        let (spec, part) = setup(4096, 2.0);
        // synthetic noise of regularity beta - 1 with beta = 0.55
        let beta = 0.55;
        let xi = synthesize_decay(&part, beta - 1.0, f64::INFINITY, part.j_max() - 3, 77).unwrap();
        let phi = fractional_kernel(spec, 0.9, 0.25).unwrap();
        let gamma = kernels::measured_gamma(&phi, &part).unwrap();
        let rp = lift_smooth(&phi, &xi, &part, "frac").unwrap();
        let target = 2.0 * beta + gamma - 2.0;
        assert!(
            (rp.besov_report.mu_regularity - target).abs() < 0.25,
            "mu regularity {} vs target {target}",
            rp.besov_report.mu_regularity
        );
    }

    #[test]
    fn bm_coefficient_norm_decay() {
        let (spec, part) = setup(1024, 2.0);
        let chi = window(spec);
        let beta = 0.45;
        let exp = bm_coefficients(&part, &chi, 256, beta, 2.0).unwrap();
        // ||a_n|| ~ n^{beta - 1}: log-log slope over n in [16, 256]
        let pts: Vec<(f64, f64)> = (16..256)
            .map(|n| ((n as f64).ln(), exp.norms[n].ln()))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        assert!((slope - (beta - 1.0)).abs() < 0.1, "decay slope {slope}");

        // Assumption (B) proxy: partial sums of squared norms settle for
        // beta = 0.45 and keep climbing for beta = 0.55
        let flat = bm_coefficients(&part, &chi, 256, 0.45, 2.0).unwrap();
        let steep = bm_coefficients(&part, &chi, 256, 0.55, 2.0).unwrap();
        let partial = |norms: &[f64], upto: usize| -> f64 {
            norms[..upto].iter().map(|v| v * v).sum()
        };
        let flat_growth = partial(&flat.norms, 256) / partial(&flat.norms, 128);
        let steep_growth = partial(&steep.norms, 256) / partial(&steep.norms, 128);
        assert!(flat_growth < steep_growth);
        assert!(steep_growth > 1.05);
    }

    #[test]
    fn bm_partial_path_covariance() {
        let (spec, part) = setup(512, 2.0);
        let chi = window(spec);
        let exp = bm_coefficients(&part, &chi, 256, 0.45, 2.0).unwrap();
        // empirical variance at a few times vs min(t, s) covariance
        let n_seeds = 500;
        let idxs = [64usize, 128, 180];
        let mut acc = [0.0f64; 3];
        for s in 0..n_seeds {
            let path = exp.sample_path(256, rng::split_seed(900, s));
            for (a, &i) in acc.iter_mut().zip(idxs.iter()) {
                *a += path.values()[i] * path.values()[i];
            }
        }
        for (a, &i) in acc.iter_mut().zip(idxs.iter()) {
            let t = spec.x(i);
            let var = *a / n_seeds as f64;
            assert!((var - t).abs() < 0.05 * t + 0.02, "var at {t}: {var}");
        }
    }

    #[test]
    fn fbm_coefficients_decay_and_h_half_consistency() {
        let (spec, part) = setup(1024, 2.0);
        let chi = window(spec);
        let h = 0.4;
        let beta = 0.35;
        let exp = fbm_coefficients(&part, h, &chi, 192, beta, 2.0).unwrap();
        // family-1 norms (even indices, q = p) decay like n^{-1/2 - H + beta}
        let pts: Vec<(f64, f64)> = (16..192)
            .map(|n| ((n as f64).ln(), exp.norms_qp[2 * n].ln()))
            .collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let target = -0.5 - h + beta;
        assert!((slope - target).abs() < 0.1, "fbm decay {slope} vs {target}");

        // at H = 1/2 the decay matches the white-noise scaling beta - 1
        let exp_half = fbm_coefficients(&part, 0.5, &chi, 192, 0.45, 2.0).unwrap();
        let pts: Vec<(f64, f64)> = (16..192)
            .map(|n| ((n as f64).ln(), exp_half.norms[2 * n].ln()))
            .collect();
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (pts.len() as f64 * sxy - sx * sy) / (pts.len() as f64 * sxx - sx * sx);
        assert!((slope - (0.45 - 1.0)).abs() < 0.1, "H=1/2 decay {slope}");

        assert!(fbm_coefficients(&part, 1.2, &chi, 8, beta, 2.0).is_err());
    }

    #[test]
    fn fbm_path_variance_is_calibrated() {
        let (spec, part) = setup(512, 2.0);
        let chi = window(spec);
        let h = 0.4;
        let exp = fbm_coefficients(&part, h, &chi, 256, 0.35, 2.0).unwrap();
        let n_seeds = 600;
        let i = spec.n() / 4; // t = L/4, the calibration point
        let mut acc = 0.0;
        for s in 0..n_seeds {
            let path = exp.sample_path(512, rng::split_seed(901, s));
            acc += path.values()[i] * path.values()[i];
        }
        let var = acc / n_seeds as f64;
        let t = spec.x(i);
        assert!(
            (var - t.powf(2.0 * h)).abs() < 0.1 * t.powf(2.0 * h),
            "variance {var} vs {}",
            t.powf(2.0 * h)
        );
    }

    #[test]
    fn schedule_monotone_and_tail_bounded() {
        let (_, part) = setup(1024, 2.0);
        let chi = window(part.spec());
        let exp = bm_coefficients(&part, &chi, 512, 0.35, 2.0).unwrap();
        let sched = truncation_schedule(&exp, 4);
        for w in sched.m.windows(2) {
            assert!(w[0] <= w[1]);
        }
        // directly assert the tail bound the schedule promises
        for (n, &m_n) in sched.m.iter().enumerate() {
            let tail: f64 = exp.norms[m_n..].iter().map(|v| v * v).sum();
            assert!(tail <= ((n + 1) as f64).powi(-6) + 1e-15);
        }
        // tiny norms put the first level at the lower bound
        let mut tiny = exp.clone();
        for v in &mut tiny.norms {
            *v *= 1e-9;
        }
        let sched = truncation_schedule(&tiny, 2);
        assert_eq!(sched.m[0], 1);
        assert!(!sched.exhausted);
    }

    #[test]
    fn stochastic_resonant_hooks_and_determinism() {
        let (spec, part) = setup(1024, 2.0);
        let chi = window(spec);
        let exp = bm_coefficients(&part, &chi, 256, 0.4, 2.0).unwrap();
        let phi = fractional_kernel(spec, 0.9, 0.25).unwrap();
        let (rp, _, diag) =
            stochastic_resonant(&exp, &phi, &part, 0.85, Draw::Zero, 3).unwrap();
        assert_eq!(rp.mu.lp_norm(f64::INFINITY).unwrap(), 0.0);
        assert!(diag.iter().all(|&d| d == 0.0));

        let (a, _, da) =
            stochastic_resonant(&exp, &phi, &part, 0.85, Draw::Seeded(5), 3).unwrap();
        let (b, _, db) =
            stochastic_resonant(&exp, &phi, &part, 0.85, Draw::Seeded(5), 3).unwrap();
        assert_eq!(a.xi, b.xi);
        assert_eq!(a.mu, b.mu);
        assert_eq!(da, db);
        let (c, _, _) =
            stochastic_resonant(&exp, &phi, &part, 0.85, Draw::Seeded(6), 3).unwrap();
        assert_ne!(a.xi, c.xi);
    }

    #[test]
    fn reduction_check_gap() {
        let (spec, part) = setup(2048, 2.0);
        // the kernel window must equal 1 at the base point for the reduction
        // to see the indicator's jump
        let chi = crate::models::plateau(spec, 0.75, 1.0).unwrap();
        // psi identically 1 inside the window: defect vanishes
        let one = GridFunction::constant(spec, 1.0);
        let xi = synthesize_decay(&part, -0.55, f64::INFINITY, part.j_max() - 3, 7).unwrap();
        let (defect, _) = regular_reduction_check(&one, &chi, &xi, &part).unwrap();
        assert!(defect.lp_norm(f64::INFINITY).unwrap() < 1e-12);

        // Lipschitz psi with psi(0) = 1: defect strictly smoother
        let psi = GridFunction::from_fn(spec, |x| 1.0 / (1.0 + x));
        let (defect, report) = regular_reduction_check(&psi, &chi, &xi, &part).unwrap();
        assert!(
            report.defect_regularity
                >= report.singular_regularity.max(report.reference_regularity) + 0.3,
            "gap too small: {report:?}"
        );
        // quadratic homogeneity in the noise
        let (defect2, _) = regular_reduction_check(&psi, &chi, &xi.scale(2.0), &part).unwrap();
        let dev = defect2
            .sub(&defect.scale(4.0))
            .unwrap()
            .lp_norm(f64::INFINITY)
            .unwrap();
        assert!(dev <= 1e-10 * defect2.lp_norm(f64::INFINITY).unwrap().max(1e-12));

        let zero_at_origin = GridFunction::from_fn(spec, |x| x);
        assert!(regular_reduction_check(&zero_at_origin, &chi, &xi, &part).is_err());
    }

    #[test]
    fn probe_rejects_parameters_outside_window() {
        let (_, part) = setup(1024, 2.0);
        assert!(illposedness_probe(&part, 0.4, 0.75, 1, 0).is_err());
        assert!(illposedness_probe(&part, 0.6, 0.9, 1, 0).is_err());
        // H = 0.6 admits r in (0.7333, 0.8)
        assert!(illposedness_probe(&part, 0.6, 0.75, 1, 0).is_ok());
    }
}
