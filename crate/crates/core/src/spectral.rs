//! Dyadic partition of unity and Littlewood-Paley analysis on the discrete
//! frequency grid.
//!
//! The partition is built from one smooth transition bump `h`: the low-pass
//! `chi(omega) = h(|omega|)` equals 1 on [0, 3/4] and 0 beyond 4/3, and the
//! annulus bumps are `rho_j(omega) = chi(omega/2^{j+1}) - chi(omega/2^j)`. The
//! top block is closed with the Nyquist tail `1 - chi(2^{-j_top} omega)` so the
//! multipliers sum to 1 at every discrete frequency to the last bit; Besov
//! norms and block transforms inherit exact reconstruction from that.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::fft;
use crate::grid::{GridFunction, GridSpec};

/// `g(t) = exp(-1/t)` for positive `t`, else 0.
fn g(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth descent from 1 to 0 across [3/4, 4/3]; every smooth window in the
/// crate (partition, kernel tails, cutoffs) reuses this single bump.
pub fn smooth_transition(t: f64) -> f64 {
    const DELTA: f64 = 4.0 / 3.0 - 3.0 / 4.0;
    let ga = g((4.0 / 3.0 - t) / DELTA);
    let gb = g((t - 3.0 / 4.0) / DELTA);
    if ga == 0.0 {
        0.0
    } else {
        ga / (ga + gb)
    }
}

/// Low-pass symbol `chi(omega)`.
pub fn chi(omega: f64) -> f64 {
    smooth_transition(omega.abs())
}

/// Besov space parameters `(alpha, p, q)`; infinities are allowed for p and q.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesovParams {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl BesovParams {
    pub fn new(alpha: f64, p: f64, q: f64) -> Result<Self> {
        if p < 1.0 || q < 1.0 {
            return Err(Error::Parameter(format!(
                "Besov indices require p, q >= 1, got p={p}, q={q}"
            )));
        }
        Ok(BesovParams { alpha, p, q })
    }
}

/// Frequency multipliers realizing the Littlewood-Paley blocks on a grid.
///
/// Block indices run from -1 (the low-pass `chi`) to `j_max` (the tail-closed
/// top annulus). `j_max` is chosen as the last index whose annulus still meets
/// the discrete spectrum; the top multiplier absorbs everything up to Nyquist.
#[derive(Debug, Clone)]
pub struct DyadicPartition {
    spec: GridSpec,
    j_max: i32,
    /// multipliers[j + 1][k] over DFT bins k, for j in -1..=j_max
    multipliers: Vec<Vec<f64>>,
}

impl DyadicPartition {
    pub fn build(spec: GridSpec) -> Result<Self> {
        let nyq = spec.omega_nyquist();
        // smallest j with (3/4) 2^j > omega_Nyquist; annuli from that index on
        // no longer meet the grid, so the previous one becomes the tail block
        let mut j_cut = 0;
        while 0.75 * 2f64.powi(j_cut) <= nyq {
            j_cut += 1;
        }
        let j_max = j_cut - 1;
        if j_max < 4 {
            return Err(Error::Grid(format!(
                "grid hosts only {} dyadic annuli; need at least 5",
                j_max + 1
            )));
        }
        let n = spec.n();
        let mut multipliers = Vec::with_capacity((j_max + 2) as usize);
        // chi at scale 2^{-j}, cached so consecutive rho_j telescope exactly
        let chi_at = |j: i32| -> Vec<f64> {
            (0..n).map(|k| chi(spec.omega(k) * 2f64.powi(-j))).collect()
        };
        let mut lower = chi_at(0); // chi(omega) itself
        multipliers.push(lower.clone());
        for j in 0..j_max {
            let upper = chi_at(j + 1);
            multipliers.push(
                (0..n).map(|k| upper[k] - lower[k]).collect(),
            );
            lower = upper;
        }
        // top block: tail 1 - chi(2^{-j_max} omega); with the telescoped sum
        // below this makes the partition of unity exact in floating point
        multipliers.push((0..n).map(|k| 1.0 - lower[k]).collect());
        Ok(DyadicPartition { spec, j_max, multipliers })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    /// Highest block index (the tail-absorbing top block).
    pub fn j_max(&self) -> i32 {
        self.j_max
    }

    pub fn multiplier(&self, j: i32) -> Result<&[f64]> {
        if j < -1 || j > self.j_max {
            return Err(Error::Parameter(format!(
                "block index {j} outside [-1, {}]",
                self.j_max
            )));
        }
        Ok(&self.multipliers[(j + 1) as usize])
    }

    /// Sum of all multipliers at DFT bin `k` (partition-of-unity check).
    pub fn multiplier_sum(&self, k: usize) -> f64 {
        self.multipliers.iter().map(|m| m[k]).sum()
    }

    fn apply_multiplier(&self, spectrum: &[Complex<f64>], m: &[f64]) -> Vec<f64> {
        let filtered: Vec<Complex<f64>> =
            spectrum.iter().zip(m.iter()).map(|(c, &w)| c * w).collect();
        fft::ifft_real(&filtered)
    }

    /// Single Littlewood-Paley block `Delta_j f`.
    pub fn lp_block(&self, f: &GridFunction, j: i32) -> Result<GridFunction> {
        self.check_spec(f)?;
        let m = self.multiplier(j)?;
        let chans: Vec<Vec<f64>> = (0..f.channels())
            .map(|c| self.apply_multiplier(&fft::fft(&f.channel(c)), m))
            .collect();
        GridFunction::from_channels(f.spec(), &chans)
    }

    /// All blocks of `f`, indices -1..=j_max, sharing one forward FFT.
    pub fn blocks(&self, f: &GridFunction) -> Result<Vec<GridFunction>> {
        self.check_spec(f)?;
        let spectra: Vec<Vec<Complex<f64>>> =
            (0..f.channels()).map(|c| fft::fft(&f.channel(c))).collect();
        let mut out = Vec::with_capacity(self.multipliers.len());
        for m in &self.multipliers {
            let chans: Vec<Vec<f64>> =
                spectra.iter().map(|s| self.apply_multiplier(s, m)).collect();
            out.push(GridFunction::from_channels(f.spec(), &chans)?);
        }
        Ok(out)
    }

    /// L^p norms of all blocks, indices -1..=j_max.
    pub fn block_norms(&self, f: &GridFunction, p: f64) -> Result<Vec<f64>> {
        self.blocks(f)?.iter().map(|b| b.lp_norm(p)).collect()
    }

    /// `||f||_{alpha,p,q}`: the l^q aggregation of `2^{j alpha} ||Delta_j f||_p`
    /// over the finite block range.
    pub fn besov_norm(&self, f: &GridFunction, bp: BesovParams) -> Result<f64> {
        let norms = self.block_norms(f, bp.p)?;
        let weighted = norms
            .iter()
            .enumerate()
            .map(|(idx, &v)| 2f64.powf((idx as f64 - 1.0) * bp.alpha) * v);
        if bp.q.is_infinite() {
            Ok(weighted.fold(0.0, f64::max))
        } else {
            Ok(weighted.map(|w| w.powf(bp.q)).sum::<f64>().powf(1.0 / bp.q))
        }
    }

    /// Empirical Besov regularity: minus the least-squares slope of
    /// `log2 ||Delta_j f||_p` against `j` over `j_range` (default
    /// `[2, j_max - 2]`, skipping the boundary blocks).
    pub fn estimate_regularity(
        &self,
        f: &GridFunction,
        p: f64,
        j_range: Option<(i32, i32)>,
    ) -> Result<f64> {
        let (lo, hi) = j_range.unwrap_or((2, self.j_max - 2));
        if lo < -1 || hi > self.j_max || hi < lo {
            return Err(Error::Parameter(format!("bad fit range [{lo}, {hi}]")));
        }
        let norms = self.block_norms(f, p)?;
        let pts: Vec<(f64, f64)> = (lo..=hi)
            .filter_map(|j| {
                let v = norms[(j + 1) as usize];
                (v > 0.0).then(|| (j as f64, v.log2()))
            })
            .collect();
        if pts.len() < 4 {
            return Err(Error::Estimation(format!(
                "only {} nonzero blocks in fit range [{lo}, {hi}]; need 4",
                pts.len()
            )));
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        Ok(-slope)
    }

    fn check_spec(&self, f: &GridFunction) -> Result<()> {
        if f.spec() != self.spec {
            return Err(Error::GridMismatch(
                "function and partition built on different grids".into(),
            ));
        }
        Ok(())
    }
}

/// Random function with prescribed Littlewood-Paley block decay: block `j`
/// has `||Delta_j f||_p ~ 2^{-j alpha}` for `j` in `[0, j_hi]`, and the
/// spectrum above `j_hi` is empty. The workhorse behind every smoothing-slope
/// probe in the crate.
pub fn synthesize_decay(
    part: &DyadicPartition,
    alpha: f64,
    p: f64,
    j_hi: i32,
    seed: u64,
) -> Result<GridFunction> {
    use rand::Rng;
    let j_hi = j_hi.min(part.j_max() - 1);
    let spec = part.spec();
    let mut r = crate::rng::rng(seed);
    let white = GridFunction::from_values(
        spec,
        1,
        (0..spec.n())
            .map(|_| r.sample::<f64, _>(rand_distr::StandardNormal))
            .collect(),
    )?;
    let blocks = part.blocks(&white)?;
    let mut f = GridFunction::zeros(spec);
    for j in 0..=j_hi {
        let b = &blocks[(j + 1) as usize];
        let norm = b.lp_norm(p)?;
        if norm == 0.0 {
            continue;
        }
        f = f.add(&b.scale(2f64.powf(-(j as f64) * alpha) / norm))?;
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(n: usize, l: f64) -> (GridSpec, DyadicPartition) {
        let spec = GridSpec::new(n, l).unwrap();
        let part = DyadicPartition::build(spec).unwrap();
        (spec, part)
    }

    #[test]
    fn transition_shape() {
        assert_eq!(smooth_transition(0.0), 1.0);
        assert_eq!(smooth_transition(0.75), 1.0);
        assert_eq!(smooth_transition(1.4), 0.0);
        let mid = smooth_transition(1.0);
        assert!(mid > 0.0 && mid < 1.0);
    }

    #[test]
    fn partition_of_unity() {
        let (spec, part) = setup(1024, 2.0);
        for k in 0..spec.n() {
            assert!((part.multiplier_sum(k) - 1.0).abs() <= 1e-12);
        }
        // chi alone at omega = 0
        assert_eq!(part.multiplier(-1).unwrap()[0], 1.0);
        for j in 0..=part.j_max() {
            assert_eq!(part.multiplier(j).unwrap()[0], 0.0);
        }
    }

    #[test]
    fn annulus_supports_disjoint() {
        let (spec, part) = setup(1024, 2.0);
        let r0 = part.multiplier(0).unwrap();
        let r2 = part.multiplier(2).unwrap();
        for k in 0..spec.n() {
            assert_eq!(r0[k] * r2[k], 0.0);
        }
        // adjacent annuli do overlap (finer frequency grid so bins land in
        // the shared transition band)
        let (spec, part) = setup(1024, 16.0);
        let r0 = part.multiplier(0).unwrap();
        let r1 = part.multiplier(1).unwrap();
        assert!((0..spec.n()).any(|k| r0[k] * r1[k] > 0.0));
    }

    #[test]
    fn constant_lives_in_low_block() {
        let (spec, part) = setup(256, 2.0);
        let f = GridFunction::constant(spec, 2.5);
        let low = part.lp_block(&f, -1).unwrap();
        assert!(low.sub(&f).unwrap().lp_norm(f64::INFINITY).unwrap() < 1e-12);
        for j in 0..=part.j_max() {
            assert!(part.lp_block(&f, j).unwrap().lp_norm(f64::INFINITY).unwrap() < 1e-12);
        }
    }

    #[test]
    fn single_block_cosine() {
        // L = 16 puts bin k = 28 (omega ~ 11.0) inside the plateau of rho_3,
        // where only that multiplier is 1
        let (spec, part) = setup(256, 16.0);
        let omega = spec.omega(28);
        assert!(omega > 4.0 / 3.0 * 8.0 && omega < 0.75 * 16.0);
        let f = GridFunction::from_fn(spec, |x| (omega * x).cos());
        for j in -1..=part.j_max() {
            let b = part.lp_block(&f, j).unwrap();
            let dev = if j == 3 {
                b.sub(&f).unwrap().lp_norm(f64::INFINITY).unwrap()
            } else {
                b.lp_norm(f64::INFINITY).unwrap()
            };
            assert!(dev < 1e-12, "block {j} deviation {dev}");
        }
        // one nonzero term in the Besov sum
        let bp = BesovParams::new(0.7, 2.0, f64::INFINITY).unwrap();
        let expect = 2f64.powf(3.0 * 0.7) * f.lp_norm(2.0).unwrap();
        assert!((part.besov_norm(&f, bp).unwrap() - expect).abs() < 1e-10 * expect);
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let (spec, part) = setup(512, 2.0);
        let f = GridFunction::from_fn(spec, |x| {
            (40.0 * x).sin() + 0.3 * (333.0 * x).cos() + x * (2.0 - x)
        });
        let blocks = part.blocks(&f).unwrap();
        let mut sum = GridFunction::zeros(spec);
        for b in &blocks {
            sum = sum.add(b).unwrap();
        }
        let sup = f.lp_norm(f64::INFINITY).unwrap();
        let err = sum.sub(&f).unwrap().lp_norm(f64::INFINITY).unwrap();
        assert!(err <= 1e-10 * (1.0 + sup));
        // re-filtering a block far away yields zero
        let b3 = part.lp_block(&f, 3).unwrap();
        for j in [-1, 0, 1, 5, 6] {
            let z = part.lp_block(&b3, j).unwrap().lp_norm(f64::INFINITY).unwrap();
            assert!(z <= 1e-12 * (1.0 + sup), "blocks 3/{j} leak {z}");
        }
    }

    #[test]
    fn besov_norm_properties() {
        let (spec, part) = setup(512, 2.0);
        let f = GridFunction::from_fn(spec, |x| (7.0 * x).sin() + 0.1 * (200.0 * x).cos());
        let bp = |alpha: f64| BesovParams::new(alpha, 2.0, f64::INFINITY).unwrap();
        assert_eq!(part.besov_norm(&GridFunction::zeros(spec), bp(0.5)).unwrap(), 0.0);
        // homogeneity
        let a = part.besov_norm(&f.scale(-3.0), bp(0.5)).unwrap();
        let b = 3.0 * part.besov_norm(&f, bp(0.5)).unwrap();
        assert!((a - b).abs() < 1e-12 * b);
        // embedding monotonicity in alpha
        assert!(part.besov_norm(&f, bp(0.2)).unwrap() <= part.besov_norm(&f, bp(0.8)).unwrap());
        // shift invariance
        let shifted = f.shift(0.375);
        let d = (part.besov_norm(&shifted, bp(0.6)).unwrap()
            - part.besov_norm(&f, bp(0.6)).unwrap())
        .abs();
        assert!(d <= 1e-10 * part.besov_norm(&f, bp(0.6)).unwrap());
    }

    #[test]
    fn weierstrass_regularity() {
        let (spec, part) = setup(4096, 2.0);
        let h = 0.5;
        let f = GridFunction::from_fn(spec, |x| {
            (0..=10)
                .map(|k| {
                    let w = 2f64.powi(k) * 2.0 * std::f64::consts::PI / 2.0;
                    2f64.powf(-(k as f64) * h) * (w * x).cos()
                })
                .sum()
        });
        let est = part.estimate_regularity(&f, f64::INFINITY, None).unwrap();
        assert!((est - h).abs() < 0.1, "estimated {est}");
    }

    #[test]
    fn synthetic_decay_is_recovered() {
        let (_, part) = setup(4096, 2.0);
        for alpha in [0.3, 0.7] {
            let f = synthesize_decay(&part, alpha, f64::INFINITY, part.j_max() - 1, 11).unwrap();
            let est = part.estimate_regularity(&f, f64::INFINITY, None).unwrap();
            assert!((est - alpha).abs() < 0.1, "alpha {alpha} estimated {est}");
        }
    }

    #[test]
    fn degenerate_fit_flagged() {
        let (spec, part) = setup(256, 16.0);
        let f = GridFunction::from_fn(spec, |x| (spec.omega(28) * x).cos());
        assert!(part.estimate_regularity(&f, 2.0, None).is_err());
    }
}
