//! Application drivers and path samplers: delay equations driven by
//! fractional noise, rough fractional SDEs, SDEs with additive Levy noise,
//! Levy moving averages, and the heat-equation edge process, plus the
//! independent samplers (random walk, circulant-embedding fractional Brownian
//! motion, compound Poisson) used to drive and cross-check them.
//!
//! Every driver is a thin assembly layer: it builds a `VolterraProblem` from
//! sampled data and delegates to the solver module. A sequential O(N^2)
//! quadrature solver for the same discrete equation serves as the
//! cross-implementation oracle.

use rand::Rng;
use rand_distr::{Poisson, StandardNormal};

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{GridFunction, GridSpec, VectorField};
use crate::kernels;
use crate::rng;
use crate::roughpath::{self, ConvRoughPath, Draw};
use crate::solver::{self, Exponents, InitialData, SolveReport, VolterraProblem};
use crate::spectral::{smooth_transition, DyadicPartition};

/// Plateau window: 1 on [0, a] (including t = 0), smooth descent to 0 on
/// [a, b], zero beyond. The right-end taper for sampled paths and initial
/// conditions.
pub fn plateau(spec: GridSpec, a: f64, b: f64) -> Result<GridFunction> {
    if !(0.0 < a && a < b && b <= spec.l() / 2.0) {
        return Err(Error::Parameter(format!(
            "plateau needs 0 < a < b <= L/2, got a={a}, b={b}"
        )));
    }
    Ok(GridFunction::from_fn(spec, |x| {
        if x <= a {
            1.0
        } else if x < b {
            smooth_transition(0.75 + (x - a) / (b - a) * (4.0 / 3.0 - 0.75))
        } else {
            0.0
        }
    }))
}

/// A sampled path on [0, L/2] (tapered to zero before L/2) together with its
/// forward-difference derivative noise.
#[derive(Debug, Clone)]
pub struct SamplePath {
    pub path: GridFunction,
    pub noise: GridFunction,
}

/// Indicator clock `1_{[0, t_end]}` with half-weighted boundary cells, the
/// same jump-cell convention as the step kernel; paired with a step kernel it
/// makes the discrete convolution a trapezoidal rule on smooth integrands.
pub fn clock(spec: GridSpec, t_end: f64) -> GridFunction {
    GridFunction::from_fn(spec, |s| {
        if s == 0.0 || s == t_end {
            0.5
        } else if s < t_end {
            1.0
        } else {
            0.0
        }
    })
}

fn default_taper(spec: GridSpec) -> GridFunction {
    plateau(spec, 0.4 * spec.l(), 0.5 * spec.l()).expect("valid default taper")
}

fn differentiate(path: &GridFunction) -> GridFunction {
    let n = path.spec().n();
    let dx = path.spec().dx();
    let v = path.values();
    let mut noise = vec![0.0; n];
    for i in 0..n - 1 {
        noise[i] = (v[i + 1] - v[i]) / dx;
    }
    noise[n - 1] = (v[0] - v[n - 1]) / dx;
    GridFunction::from_values(path.spec(), 1, noise).expect("finite differences")
}

/// Brownian motion on [0, L/2]: a sqrt(dx)-scaled Gaussian walk, smoothly
/// tapered to zero on the last tenth of the window. `noise` holds the
/// increments divided by dx, so the path is exactly the left-point integral
/// of the noise.
pub fn sample_bm(spec: GridSpec, seed: u64) -> Result<SamplePath> {
    let mut r = rng::rng(seed);
    let m = spec.n() / 2;
    let sdx = spec.dx().sqrt();
    let mut path = vec![0.0; spec.n()];
    for i in 0..m {
        let g: f64 = r.sample(StandardNormal);
        path[i + 1] = path[i] + sdx * g;
    }
    let path = GridFunction::from_values(spec, 1, path)?.mul(&default_taper(spec))?;
    let noise = differentiate(&path);
    Ok(SamplePath { path, noise })
}

/// Fractional Brownian motion on [0, L/2] with exact increment covariance,
/// sampled by circulant embedding of the fractional Gaussian noise
/// autocovariance. This construction is independent of the Bessel-series
/// expansion and serves as its calibration oracle.
pub fn sample_fbm(spec: GridSpec, h: f64, seed: u64) -> Result<SamplePath> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::Parameter(format!("Hurst index must lie in (0,1), got {h}")));
    }
    let m = spec.n() / 2;
    let dx = spec.dx();
    // autocovariance of increments: gamma(k) = dx^{2H}/2 (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})
    let gamma = |k: f64| -> f64 {
        0.5 * dx.powf(2.0 * h)
            * ((k + 1.0).powf(2.0 * h) - 2.0 * k.powf(2.0 * h) + (k - 1.0).abs().powf(2.0 * h))
    };
    let two_m = 2 * m;
    let mut c = vec![0.0; two_m];
    for (k, ck) in c.iter_mut().enumerate() {
        let lag = if k <= m { k } else { two_m - k };
        *ck = gamma(lag as f64);
    }
    let mut eig = fft::fft(&c);
    let max_eig = eig.iter().map(|z| z.re).fold(0.0f64, f64::max);
    for z in eig.iter_mut() {
        if z.re < -1e-8 * max_eig {
            return Err(Error::Sampler(format!(
                "circulant embedding is not positive semidefinite (eigenvalue {:.3e}) \
                 for H = {h}, N = {}",
                z.re,
                spec.n()
            )));
        }
        z.re = z.re.max(0.0);
    }
    let mut r = rng::rng(seed);
    let mut freq: Vec<num_complex::Complex<f64>> = Vec::with_capacity(two_m);
    for z in &eig {
        let a: f64 = r.sample(StandardNormal);
        let b: f64 = r.sample(StandardNormal);
        freq.push(num_complex::Complex::new(a, b) * (z.re / 2.0).sqrt());
    }
    fft::fft_complex(&mut freq);
    // real part carries half the complex variance; sqrt(2) restores it
    let scale = (2.0f64).sqrt() / (two_m as f64).sqrt();
    let mut path = vec![0.0; spec.n()];
    for i in 0..m {
        path[i + 1] = path[i] + freq[i].re * scale;
    }
    let path = GridFunction::from_values(spec, 1, path)?.mul(&default_taper(spec))?;
    let noise = differentiate(&path);
    Ok(SamplePath { path, noise })
}

/// A sampled Levy path: compound Poisson with Gaussian jump sizes plus an
/// independent diffusion part, tapered like the other samplers.
#[derive(Debug, Clone)]
pub struct LevySample {
    pub path: GridFunction,
    pub noise: GridFunction,
    pub jump_count: usize,
    pub jump_times: Vec<f64>,
    pub jump_sizes: Vec<f64>,
}

/// Levy process on [0, L/2]: jumps arrive at rate `jump_rate` per unit time
/// with N(0, jump_scale^2) sizes, on top of `diffusion` times an independent
/// Brownian path.
pub fn sample_levy(
    spec: GridSpec,
    jump_rate: f64,
    jump_scale: f64,
    diffusion: f64,
    seed: u64,
) -> Result<LevySample> {
    if jump_rate < 0.0 || jump_scale < 0.0 {
        return Err(Error::Parameter("jump rate and scale must be nonnegative".into()));
    }
    let t_w = spec.l() / 2.0;
    let mut r = rng::rng(rng::split_seed(seed, 0));
    let jump_count = if jump_rate > 0.0 {
        r.sample(Poisson::new(jump_rate * t_w).map_err(|e| Error::Parameter(e.to_string()))?)
            as usize
    } else {
        0
    };
    let mut jump_times: Vec<f64> = (0..jump_count).map(|_| r.gen::<f64>() * t_w).collect();
    jump_times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let jump_sizes: Vec<f64> = (0..jump_count)
        .map(|_| jump_scale * r.sample::<f64, _>(StandardNormal))
        .collect();
    let mut path = vec![0.0; spec.n()];
    for i in 0..spec.n() {
        let t = spec.x(i);
        path[i] = jump_times
            .iter()
            .zip(&jump_sizes)
            .filter(|(tj, _)| **tj <= t)
            .map(|(_, s)| s)
            .sum();
    }
    let mut path = GridFunction::from_values(spec, 1, path)?;
    if diffusion != 0.0 {
        let bm = sample_bm(spec, rng::split_seed(seed, 1))?;
        path = path.add(&bm.path.scale(diffusion))?;
    }
    let path = path.mul(&default_taper(spec))?;
    let noise = differentiate(&path);
    Ok(LevySample { path, noise, jump_count, jump_times, jump_sizes })
}

/// Sequential O(N^2) solver for the same discrete fixed-point equation the
/// FFT Picard iteration targets: time-stepping with an inner substitution for
/// the implicit diagonal cell. A genuinely different code path with the same
/// fixed point, used as the drivers' cross-check oracle.
pub fn quadrature_solve(prob: &VolterraProblem, tol: f64, max_inner: usize) -> Result<GridFunction> {
    let n = prob.spec.n();
    let dx = prob.spec.dx();
    let u0 = match &prob.u0 {
        InitialData::Plain(f) => f.clone(),
        InitialData::Triple { .. } => {
            return Err(Error::Parameter("quadrature oracle needs a plain initial condition".into()))
        }
    };
    let half = n / 2;
    let slots: Vec<(&GridFunction, &VectorField, &GridFunction)> = vec![
        (&prob.phi1, &prob.sigma1, &prob.xi1),
        (&prob.phi2, &prob.sigma2, &prob.xi2),
    ];
    // effective kernel reach: last index with a nonzero sample
    let reach: Vec<usize> = slots
        .iter()
        .map(|(phi, _, _)| {
            (0..=half)
                .rev()
                .find(|&k| phi.values()[k] != 0.0)
                .unwrap_or(0)
        })
        .collect();
    let mut u = vec![0.0; n];
    for i in 0..n {
        // explicit part: everything but the diagonal cell k = i
        let mut rhs = u0.values()[i];
        for (s, (phi, sigma, xi)) in slots.iter().enumerate() {
            if matches!(sigma, VectorField::Zero) {
                continue;
            }
            let pv = phi.values();
            let xv = xi.values();
            let lo = i.saturating_sub(reach[s]);
            for k in lo..i {
                // noise support keeps the circular sum causal
                rhs += dx * pv[i - k] * sigma.eval(u[k], 0)? * xv[k];
            }
        }
        // implicit diagonal: u_i = rhs + dx sum_s phi_s[0] sigma_s(u_i) xi_s[i]
        let mut ui = rhs;
        for _ in 0..max_inner {
            let mut next = rhs;
            for (phi, sigma, xi) in &slots {
                if matches!(sigma, VectorField::Zero) {
                    continue;
                }
                next += dx * phi.values()[0] * sigma.eval(ui, 0)? * xi.values()[i];
            }
            if (next - ui).abs() <= tol * (1.0 + ui.abs()) {
                ui = next;
                break;
            }
            ui = next;
        }
        u[i] = ui;
    }
    GridFunction::from_values(prob.spec, 1, u)
}

/// One driver run: the solution, the solver report, the driving noise that
/// was actually used, and the regularity the theory targets for the solution.
#[derive(Debug, Clone)]
pub struct ModelRun {
    pub u: GridFunction,
    pub report: SolveReport,
    pub problem: VolterraProblem,
    pub alpha_target: f64,
}

/// Solution regime for the delay equation driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DelayMode {
    Young,
    Rough,
}

/// Delay equation driven by fractional noise with Hurst index `h`: the delays
/// `r1` (noise term) and `r2` (drift term) are absorbed into shifted step
/// kernels `phi_T(. - r_j)`, the driving signal is the windowed fractional
/// derivative noise, and the drift clock is the correspondingly clipped
/// indicator. Young mode needs `h > 1/2`; rough mode (`h in (1/3, 1/2]`)
/// builds the rough path from the Bessel-series expansion of the noise.
pub fn run_delay_rde(
    part: &DyadicPartition,
    h: f64,
    r1: f64,
    r2: f64,
    sigma1: VectorField,
    sigma2: VectorField,
    u0_value: f64,
    seed: u64,
    mode: DelayMode,
) -> Result<ModelRun> {
    let spec = part.spec();
    let l = spec.l();
    match mode {
        DelayMode::Young if !(h > 0.5) => {
            return Err(Error::Parameter(format!(
                "Young-mode delay equation needs Hurst index > 1/2, got {h}"
            )))
        }
        DelayMode::Rough if !(h > 1.0 / 3.0 && h <= 0.5) => {
            return Err(Error::Parameter(format!(
                "rough-mode delay equation needs Hurst index in (1/3, 1/2], got {h}"
            )))
        }
        _ => {}
    }
    let t = l / 8.0;
    for r in [r1, r2] {
        if !(0.0..l / 2.0 - 2.0 * t).contains(&r) {
            return Err(Error::Parameter(format!(
                "delay {r} pushes the shifted kernel outside [0, L/2]"
            )));
        }
    }
    let base = kernels::step_kernel(spec, t)?;
    let phi1 = base.shift(-r1);
    let phi2 = base.shift(-r2);
    // drift clock 1_{[0,T]}(s + r2), clipped to the forward window
    let xi2 = clock(spec, t - r2);
    let u0_window = plateau(spec, t, 2.0 * t)?;
    let u0 = u0_window.scale(u0_value);
    let gamma1 = kernels::measured_gamma(&phi1, part)?;

    match mode {
        DelayMode::Young => {
            let theta = sample_fbm(spec, h, seed)?;
            let exponents = Exponents {
                beta1: h,
                beta2: 1.0,
                gamma1: gamma1.min(1.0),
                gamma2: gamma1.min(1.0),
                p: 2.0,
            };
            let prob = VolterraProblem {
                spec,
                phi1,
                phi2,
                phi1_id: format!("step:T={t}@r={r1}"),
                phi2_id: format!("step:T={t}@r={r2}"),
                sigma1,
                sigma2,
                xi1: theta.noise,
                xi2,
                u0: InitialData::Plain(u0),
                r1,
                r2,
                exponents,
            }
            .validated()?;
            let (u, report) = solver::solve_young(&prob, part, 1e-9, 300)?;
            Ok(ModelRun { u, report, problem: prob, alpha_target: exponents.alpha() })
        }
        DelayMode::Rough => {
            let chi = kernels::taper(spec, 0.1 * l, 0.375 * l, 0.5 * l)?;
            let beta = h;
            let exp = roughpath::fbm_coefficients(part, h, &chi, 512, beta, 2.0)?;
            let (rp, _, _) = roughpath::stochastic_resonant(
                &exp,
                &phi1,
                part,
                gamma1.min(1.0),
                Draw::Seeded(seed),
                4,
            )?;
            let exponents = Exponents {
                beta1: beta,
                beta2: 1.0,
                gamma1: gamma1.min(1.0),
                gamma2: gamma1.min(1.0),
                p: 2.0,
            };
            let kernel_id = format!("step:T={t}@r={r1}");
            let prob = VolterraProblem {
                spec,
                phi1,
                phi2,
                phi1_id: kernel_id.clone(),
                phi2_id: format!("step:T={t}@r={r2}"),
                sigma1,
                sigma2,
                xi1: rp.xi.clone(),
                xi2,
                u0: InitialData::Triple {
                    u1: GridFunction::zeros(spec),
                    u2: GridFunction::zeros(spec),
                    usharp: u0,
                },
                r1,
                r2,
                exponents,
            };
            let rp = ConvRoughPath { kernel_id, ..rp };
            let (u, _, report) = solver::solve_paracontrolled(&prob, &rp, part, 1e-8, 300)?;
            Ok(ModelRun { u, report, problem: prob, alpha_target: exponents.alpha() })
        }
    }
}

/// How the fractional-SDE driver builds its rough path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LiftMode {
    /// truncated Karhunen-Loeve series of the Brownian noise (the stochastic
    /// construction)
    Series,
    /// spectrally mollified sampled walk with the canonical smooth lift; used
    /// for oracle comparisons
    MollifiedSmooth,
}

/// Fractional SDE `u = u0 + frac-kernel * (sigma(u) dW)` in the rough regime;
/// requires `r_exp > 5/6` so the target regularity `alpha < r_exp - 1/2`
/// clears 1/3.
pub fn run_fractional_sde(
    part: &DyadicPartition,
    r_exp: f64,
    sigma: VectorField,
    u0_value: f64,
    seed: u64,
    lift: LiftMode,
) -> Result<ModelRun> {
    if !(r_exp > 5.0 / 6.0 && r_exp < 1.0) {
        return Err(Error::Parameter(format!(
            "fractional SDE needs kernel exponent in (5/6, 1), got {r_exp}"
        )));
    }
    let spec = part.spec();
    let l = spec.l();
    let t = l / 8.0;
    let phi1 = kernels::fractional_kernel(spec, r_exp, t)?;
    let kernel_id = format!("frac:r={r_exp},T={t}");
    // the kernel family is parametric, so its smoothing exponent is known
    // analytically; the spectral measurement only sanity-checks it
    let measured = kernels::measured_gamma(&phi1, part)?;
    if (measured + 0.05 - r_exp).abs() > 0.15 {
        return Err(Error::Smoothness(format!(
            "fractional kernel measures gamma = {measured:.3}, expected about {r_exp:.3}"
        )));
    }
    let gamma1 = r_exp;
    let beta = 0.5;
    let (xi, rp) = match lift {
        LiftMode::Series => {
            let chi = kernels::taper(spec, 0.1 * l, 0.375 * l, 0.5 * l)?;
            let exp = roughpath::bm_coefficients(part, &chi, 1024, beta, 2.0)?;
            let (rp, _, _) = roughpath::stochastic_resonant(
                &exp,
                &phi1,
                part,
                gamma1,
                Draw::Seeded(seed),
                4,
            )?;
            (rp.xi.clone(), ConvRoughPath { kernel_id: kernel_id.clone(), ..rp })
        }
        LiftMode::MollifiedSmooth => {
            let raw = sample_bm(spec, seed)?.noise;
            let chi = kernels::taper(spec, 0.1 * l, 0.375 * l, 0.5 * l)?;
            let xi = roughpath::mollify(&raw, part, part.j_max() - 4)?.mul(&chi)?;
            let rp = roughpath::lift_smooth(&phi1, &xi, part, &kernel_id)?;
            (xi, rp)
        }
    };
    let exponents = Exponents {
        beta1: beta,
        beta2: 1.0,
        gamma1,
        gamma2: 1.0,
        p: 2.0,
    };
    let prob = VolterraProblem {
        spec,
        phi1,
        phi2: GridFunction::zeros(spec),
        phi1_id: kernel_id,
        phi2_id: "zero".into(),
        sigma1: sigma,
        sigma2: VectorField::Zero,
        xi1: xi,
        xi2: GridFunction::zeros(spec),
        u0: InitialData::Triple {
            u1: GridFunction::zeros(spec),
            u2: GridFunction::zeros(spec),
            usharp: GridFunction::constant(spec, u0_value),
        },
        r1: 0.0,
        r2: 0.0,
        exponents,
    };
    let (u, _, report) = solver::solve_paracontrolled(&prob, &rp, part, 1e-8, 300)?;
    Ok(ModelRun { u, report, problem: prob, alpha_target: r_exp - 0.5 })
}

/// SDE with additive Levy noise: `u = u0 + int sigma1(u) ds + int sigma2(u)
/// dtheta + L(t)` with fractional theta (`h > 1/2`). The Levy path enters
/// through the initial-condition slot and its jumps pass into the solution
/// unchanged; the jumps-aware Picard variant is used with `p > 2`.
pub fn run_levy_sde(
    part: &DyadicPartition,
    jump_rate: f64,
    jump_scale: f64,
    diffusion: f64,
    h: f64,
    sigma_drift: VectorField,
    sigma_noise: VectorField,
    u0_value: f64,
    seed: u64,
) -> Result<ModelRun> {
    let p = 4.0;
    if !(h > 0.5) {
        return Err(Error::Parameter(format!("Levy SDE needs Hurst index > 1/2, got {h}")));
    }
    if !(h + 1.0 / p > 1.0) {
        return Err(Error::Parameter(format!(
            "jumps regime needs h + 1/p > 1, got {:.3}",
            h + 1.0 / p
        )));
    }
    let spec = part.spec();
    let t = spec.l() / 8.0;
    let phi = kernels::step_kernel(spec, t)?;
    let levy = sample_levy(spec, jump_rate, jump_scale, diffusion, rng::split_seed(seed, 0))?;
    let theta = sample_fbm(spec, h, rng::split_seed(seed, 1))?;
    let drift_clock = clock(spec, t);
    let u0_window = plateau(spec, t, 2.0 * t)?;
    let u0 = u0_window.scale(u0_value).add(&levy.path)?;
    let gamma = kernels::measured_gamma(&phi, part)?.min(1.0);
    let exponents = Exponents { beta1: h, beta2: 1.0, gamma1: gamma, gamma2: gamma, p };
    let prob = VolterraProblem {
        spec,
        phi1: phi.clone(),
        phi2: phi,
        phi1_id: format!("step:T={t}"),
        phi2_id: format!("step:T={t}"),
        sigma1: sigma_noise,
        sigma2: sigma_drift,
        xi1: theta.noise,
        xi2: drift_clock,
        u0: InitialData::Plain(u0),
        r1: 0.0,
        r2: 0.0,
        exponents,
    }
    .validated()?;
    let (u, report) = solver::solve_young_jumps(&prob, part, 1e-9, 300)?;
    Ok(ModelRun { u, report, problem: prob, alpha_target: 1.0 / p })
}

/// Levy moving average `u = u0 + int psi(t - s) sigma(u(s)) dL(s)` with a
/// smooth kernel of measured regularity above 1; the kernel's smoothing
/// (`2/p + gamma > 2`) puts the problem in the plain Young regime despite the
/// jump noise, with `p = 4`. The target solution regularity is
/// `1/p + gamma - 1`.
pub fn run_moving_average(
    part: &DyadicPartition,
    psi: &GridFunction,
    sigma: VectorField,
    jump_rate: f64,
    jump_scale: f64,
    diffusion: f64,
    u0_value: f64,
    seed: u64,
) -> Result<ModelRun> {
    let spec = part.spec();
    let p = 4.0;
    let gamma_raw = kernels::measured_gamma(psi, part)?;
    // margin above 1 covers the measurement slack (a bare jump reads ~1.05)
    if !(gamma_raw > 1.2) {
        return Err(Error::Smoothness(format!(
            "moving-average kernel must have measured regularity clearly above 1, got {gamma_raw:.3}"
        )));
    }
    // cap so that alpha = 1/p + gamma - 1 stays inside the admissible (1/p, 1]
    let gamma = gamma_raw.min(1.7);
    let levy = sample_levy(spec, jump_rate, jump_scale, diffusion, seed)?;
    let exponents = Exponents { beta1: 1.0 / p, beta2: 1.0, gamma1: gamma, gamma2: gamma, p };
    let prob = VolterraProblem {
        spec,
        phi1: psi.clone(),
        phi2: GridFunction::zeros(spec),
        phi1_id: "file:psi".into(),
        phi2_id: "zero".into(),
        sigma1: sigma,
        sigma2: VectorField::Zero,
        xi1: levy.noise,
        xi2: GridFunction::zeros(spec),
        u0: InitialData::Plain(GridFunction::constant(spec, u0_value)),
        r1: 0.0,
        r2: 0.0,
        exponents,
    }
    .validated()?;
    let (u, report) = solver::solve_young(&prob, part, 1e-10, 300)?;
    Ok(ModelRun { u, report, problem: prob, alpha_target: 1.0 / p + gamma - 1.0 })
}

/// Edge process of the heat equation with boundary noise: a fractional-SDE
/// reduction with kernel exponent `1 - 1/(2 - theta)` (constant set to 1).
/// Only `theta < -4` gives an exponent above 5/6.
pub fn run_spde_edge(
    part: &DyadicPartition,
    theta: f64,
    sigma: VectorField,
    u0_value: f64,
    seed: u64,
) -> Result<ModelRun> {
    if !(theta < -4.0) {
        return Err(Error::Parameter(format!(
            "edge-process reduction requires theta < -4, got {theta}"
        )));
    }
    let r_exp = 1.0 - 1.0 / (2.0 - theta);
    run_fractional_sde(part, r_exp, sigma, u0_value, seed, LiftMode::Series)
}
