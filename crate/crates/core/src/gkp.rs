//! Single-mode finite-energy GKP qubits: closed-form quadrature
//! wavefunctions, comb-mixture outcome statistics and sampling.

use crate::error::{contract, Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub const SQRT_PI: f64 = 1.772_453_850_905_516;

/// Tail weight below which comb teeth are dropped.
pub const TOOTH_TAIL: f64 = 1e-15;
/// Teeth farther than this many widths from a point contribute below e^{-72}.
const TOOTH_WINDOW: f64 = 12.0;

/// Tooth indices within `window` of `x` (comb `k·spacing`), clipped to `[lo, hi]`.
fn near_teeth(x: f64, spacing: f64, window: f64, lo: i64, hi: i64) -> (i64, i64) {
    let a = ((x - window) / spacing).floor() as i64;
    let b = ((x + window) / spacing).ceil() as i64;
    (a.max(lo), b.min(hi))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IdealLogical {
    Z0,
    Z1,
    XPlus,
    XMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quadrature {
    Q,
    P,
}

impl Quadrature {
    pub fn other(self) -> Quadrature {
        match self {
            Quadrature::Q => Quadrature::P,
            Quadrature::P => Quadrature::Q,
        }
    }
}

impl IdealLogical {
    /// Comb of the ideal state in the given quadrature: `(spacing, offset, alternating sign)`.
    ///
    /// Tooth `k` sits at `offset + k·spacing` with amplitude `(−1)^k` when
    /// the sign alternates.
    pub fn comb(self, quad: Quadrature) -> (f64, f64, bool) {
        use IdealLogical::*;
        use Quadrature::*;
        match (self, quad) {
            (Z0, Q) | (XPlus, P) => (2.0 * SQRT_PI, 0.0, false),
            (Z1, Q) | (XMinus, P) => (2.0 * SQRT_PI, SQRT_PI, false),
            (Z0, P) | (XPlus, Q) => (SQRT_PI, 0.0, false),
            (Z1, P) | (XMinus, Q) => (SQRT_PI, 0.0, true),
        }
    }
}

/// Square-root-Gaussian error wavefunction of one mode.
///
/// `delta2`/`kappa2` are multiples of σ².
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEnvelope1 {
    pub delta2: f64,
    pub kappa2: f64,
    #[serde(default)]
    pub mean_u: f64,
    #[serde(default)]
    pub mean_v: f64,
}

impl ErrorEnvelope1 {
    pub fn symmetric() -> Self {
        ErrorEnvelope1 { delta2: 1.0, kappa2: 1.0, mean_u: 0.0, mean_v: 0.0 }
    }

    pub fn with_means(mut self, u: f64, v: f64) -> Self {
        self.mean_u = u;
        self.mean_v = v;
        self
    }
}

/// A finite-energy GKP state `∫ η(u,v) e^{i(−u p̂ + v q̂)} |ψ̄⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiniteGkp {
    pub label: IdealLogical,
    pub env: ErrorEnvelope1,
    pub sigma2: f64,
    /// Set when σ is not small against √π.
    pub regime_warning: Option<String>,
    norm_q: f64,
    norm_p: f64,
}

/// Approximate-regime threshold for `max(δ, κ)`.
const REGIME_LIMIT: f64 = SQRT_PI / 4.0;

pub fn make_finite_gkp(label: IdealLogical, env: ErrorEnvelope1, sigma2: f64) -> Result<FiniteGkp> {
    if !(env.delta2 > 0.0 && env.kappa2 > 0.0 && sigma2 > 0.0) {
        return contract(format!(
            "envelope variances must be positive (δ²={}, κ²={}, σ²={})",
            env.delta2, env.kappa2, sigma2
        ));
    }
    let d = (env.delta2 * sigma2).sqrt();
    let k = (env.kappa2 * sigma2).sqrt();
    if d * k >= 1.0 {
        return Err(Error::UnphysicalEnvelope(d * k));
    }
    let regime_warning = if d.max(k) > REGIME_LIMIT {
        Some(format!("max(δ,κ) = {:.3} is not small against √π; comb approximations degrade", d.max(k)))
    } else {
        None
    };
    let mut s = FiniteGkp { label, env, sigma2, regime_warning, norm_q: 1.0, norm_p: 1.0 };
    s.norm_q = s.numeric_norm(Quadrature::Q);
    s.norm_p = s.numeric_norm(Quadrature::P);
    Ok(s)
}

impl FiniteGkp {
    pub fn delta(&self) -> f64 {
        (self.env.delta2 * self.sigma2).sqrt()
    }
    pub fn kappa(&self) -> f64 {
        (self.env.kappa2 * self.sigma2).sqrt()
    }

    /// Width of the wavefunction teeth and of the envelope in a quadrature.
    fn widths(&self, quad: Quadrature) -> (f64, f64) {
        match quad {
            Quadrature::Q => (self.delta(), self.kappa()),
            Quadrature::P => (self.kappa(), self.delta()),
        }
    }

    /// Teeth indices whose envelope weight exceeds the tail cutoff.
    fn tooth_range(&self, quad: Quadrature) -> (i64, i64) {
        let (spacing, offset, _) = self.label.comb(quad);
        let (_, env_w) = self.widths(quad);
        // tooth c carries weight ~ e^{−w² c²}
        let cmax = (-TOOTH_TAIL.ln()).sqrt() / env_w;
        let lo = ((-cmax - offset) / spacing).floor() as i64;
        let hi = ((cmax - offset) / spacing).ceil() as i64;
        (lo, hi)
    }

    pub fn n_max(&self, quad: Quadrature) -> i64 {
        let (lo, hi) = self.tooth_range(quad);
        hi.max(-lo)
    }

    /// Unnormalized closed form of the error-wavefunction integral.
    fn raw_amplitude(&self, quad: Quadrature, x: f64) -> Complex64 {
        let (spacing, offset, alt) = self.label.comb(quad);
        let (lo, hi) = self.tooth_range(quad);
        let (tooth, env) = self.widths(quad);
        // position shift and phase-carrying mean for this quadrature
        let (shift, phase_mean, sgn) = match quad {
            Quadrature::Q => (self.env.mean_u, self.env.mean_v, 1.0),
            Quadrature::P => (self.env.mean_v, self.env.mean_u, -1.0),
        };
        let pref = (2.0 * env / tooth).sqrt();
        let mut acc = Complex64::new(0.0, 0.0);
        let (lo, hi) = near_teeth(x - shift - offset, spacing, TOOTH_WINDOW * tooth, lo, hi);
        for k in lo..=hi {
            let c = offset + k as f64 * spacing;
            let a = if alt && k.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            let g = (-(x - c - shift).powi(2) / (2.0 * tooth * tooth) - env * env * (x + c).powi(2) / 8.0).exp();
            if g == 0.0 {
                continue;
            }
            let ph = sgn * phase_mean * (x + c) / 2.0;
            acc += Complex64::from_polar(a * g, ph);
        }
        acc * pref
    }

    /// Limit form: a comb of displaced squeezed vacua whose envelope is
    /// evaluated at the tooth centre.
    fn raw_comb_amplitude(&self, quad: Quadrature, x: f64) -> Complex64 {
        let (spacing, offset, alt) = self.label.comb(quad);
        let (lo, hi) = self.tooth_range(quad);
        let (tooth, env) = self.widths(quad);
        let (shift, phase_mean, sgn) = match quad {
            Quadrature::Q => (self.env.mean_u, self.env.mean_v, 1.0),
            Quadrature::P => (self.env.mean_v, self.env.mean_u, -1.0),
        };
        let mut acc = Complex64::new(0.0, 0.0);
        let (lo, hi) = near_teeth(x - shift - offset, spacing, TOOTH_WINDOW * tooth, lo, hi);
        for k in lo..=hi {
            let c = offset + k as f64 * spacing;
            let a = if alt && k.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
            let g = (-(x - c - shift).powi(2) / (2.0 * tooth * tooth) - env * env * (c + shift / 2.0).powi(2) / 2.0).exp();
            if g == 0.0 {
                continue;
            }
            acc += Complex64::from_polar(a * g, sgn * phase_mean * (x + c) / 2.0);
        }
        acc
    }

    fn numeric_norm(&self, quad: Quadrature) -> f64 {
        let (spacing, offset, _) = self.label.comb(quad);
        let (lo, hi) = self.tooth_range(quad);
        let (tooth, _) = self.widths(quad);
        let shift = match quad {
            Quadrature::Q => self.env.mean_u,
            Quadrature::P => self.env.mean_v,
        };
        // integrate cell by cell, only where the tooth has support
        let half = (TOOTH_WINDOW * tooth).min(spacing / 2.0);
        let cells = (2.0 * half / (tooth / 12.0)).ceil() as usize;
        let dx = 2.0 * half / cells as f64;
        let mut sum = 0.0;
        for k in lo - 1..=hi + 1 {
            let c = offset + k as f64 * spacing + shift;
            for i in 0..cells {
                let x = c - half + (i as f64 + 0.5) * dx;
                sum += self.raw_amplitude(quad, x).norm_sqr();
            }
        }
        (sum * dx).sqrt()
    }

    /// Normalized closed-form amplitude at one point.
    pub fn amplitude(&self, quad: Quadrature, x: f64) -> Complex64 {
        let n = match quad {
            Quadrature::Q => self.norm_q,
            Quadrature::P => self.norm_p,
        };
        self.raw_amplitude(quad, x) / n
    }
}

/// Closed-form wavefunction on a strictly increasing grid.
pub fn quadrature_wavefunction(state: &FiniteGkp, quad: Quadrature, grid: &[f64]) -> Result<Vec<Complex64>> {
    check_grid(grid)?;
    Ok(grid.iter().map(|&x| state.amplitude(quad, x)).collect())
}

/// The comb-of-squeezed-states form, normalized on the supplied grid.
pub fn comb_state_wavefunction(state: &FiniteGkp, quad: Quadrature, grid: &[f64]) -> Result<Vec<Complex64>> {
    check_grid(grid)?;
    let mut w: Vec<Complex64> = grid.iter().map(|&x| state.raw_comb_amplitude(quad, x)).collect();
    normalize_on_grid(&mut w, grid);
    Ok(w)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return contract("grid must be strictly increasing");
    }
    Ok(())
}

/// Scales `w` so that the trapezoid rule on `grid` gives unit norm.
pub fn normalize_on_grid(w: &mut [Complex64], grid: &[f64]) {
    let n = trapezoid(grid, |i| w[i].norm_sqr()).sqrt();
    if n > 0.0 {
        for z in w.iter_mut() {
            *z /= n;
        }
    }
}

pub fn trapezoid(grid: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    let mut s = 0.0;
    for i in 1..grid.len() {
        s += 0.5 * (f(i) + f(i - 1)) * (grid[i] - grid[i - 1]);
    }
    s
}

/// `‖a/‖a‖ − b/‖b‖‖` with trapezoid norms.
pub fn l2_distance(a: &[Complex64], b: &[Complex64], grid: &[f64]) -> f64 {
    let na = trapezoid(grid, |i| a[i].norm_sqr()).sqrt();
    let nb = trapezoid(grid, |i| b[i].norm_sqr()).sqrt();
    trapezoid(grid, |i| (a[i] / na - b[i] / nb).norm_sqr()).sqrt()
}

/// Comb mixture `Σ_n P_N[n] · N(x; offset + n·spacing, residue_variance)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub spacing: f64,
    pub offset: f64,
    /// `P_N[n] ∝ exp(−c_n² / (2·envelope_variance))` with `c_n` the tooth position.
    pub envelope_variance: f64,
    pub residue_variance: f64,
}

impl MixtureSpec {
    pub fn new(spacing: f64, offset: f64, envelope_variance: f64, residue_variance: f64) -> Result<Self> {
        if !(envelope_variance > 0.0 && residue_variance > 0.0 && spacing > 0.0) {
            return contract("mixture variances and spacing must be positive");
        }
        Ok(MixtureSpec { spacing, offset, envelope_variance, residue_variance })
    }

    /// Tooth indices carrying non-negligible weight.
    pub fn tooth_range(&self) -> (i64, i64) {
        let cmax = (2.0 * self.envelope_variance * (-TOOTH_TAIL.ln())).sqrt();
        (((-cmax - self.offset) / self.spacing).floor() as i64, ((cmax - self.offset) / self.spacing).ceil() as i64)
    }

    /// Normalized `P_N` over the truncated tooth range.
    pub fn tooth_weights(&self) -> Vec<(i64, f64)> {
        let (lo, hi) = self.tooth_range();
        let raw: Vec<(i64, f64)> = (lo..=hi)
            .map(|n| {
                let c = self.offset + n as f64 * self.spacing;
                (n, (-c * c / (2.0 * self.envelope_variance)).exp())
            })
            .collect();
        let z: f64 = raw.iter().map(|x| x.1).sum();
        raw.into_iter().map(|(n, w)| (n, w / z)).collect()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        let v = self.residue_variance;
        self.tooth_weights()
            .into_iter()
            .map(|(n, w)| {
                let d = x - self.offset - n as f64 * self.spacing;
                w * (-d * d / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
            })
            .sum()
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let weights = self.tooth_weights();
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut pick = weights.last().map(|w| w.0).unwrap_or(0);
        for (n, w) in &weights {
            acc += w;
            if u < acc {
                pick = *n;
                break;
            }
        }
        let q = Normal::new(0.0, self.residue_variance.sqrt()).expect("positive variance").sample(rng);
        self.offset + pick as f64 * self.spacing + q
    }
}

/// Outcome statistics of a homodyne measurement of `state`.
pub fn outcome_mixture(state: &FiniteGkp, quad: Quadrature) -> MixtureSpec {
    let (spacing, offset, _) = state.label.comb(quad);
    let (tooth, env) = state.widths(quad);
    let shift = match quad {
        Quadrature::Q => state.env.mean_u,
        Quadrature::P => state.env.mean_v,
    };
    // tooth c: |amplitude|² ∝ e^{−env² c²} and residue ∝ e^{−(x−c)²/tooth²}
    MixtureSpec {
        spacing,
        offset: offset + shift,
        envelope_variance: 1.0 / (2.0 * env * env),
        residue_variance: tooth * tooth / 2.0,
    }
}

pub fn homodyne_outcome_pdf(state: &FiniteGkp, quad: Quadrature, x: f64) -> f64 {
    outcome_mixture(state, quad).pdf(x)
}

pub fn sample_homodyne(state: &FiniteGkp, quad: Quadrature, rng: &mut impl Rng) -> f64 {
    outcome_mixture(state, quad).sample(rng)
}

/// Deterministic generator used throughout the crate.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn plus(sigma2: f64) -> FiniteGkp {
        make_finite_gkp(IdealLogical::XPlus, ErrorEnvelope1::symmetric(), sigma2).unwrap()
    }

    #[test]
    fn unphysical_envelope_rejected() {
        let env = ErrorEnvelope1 { delta2: 1.5, kappa2: 1.5, mean_u: 0.0, mean_v: 0.0 };
        assert!(matches!(make_finite_gkp(IdealLogical::Z0, env, 1.0), Err(Error::UnphysicalEnvelope(_))));
    }

    #[test]
    fn default_tooth_cutoff() {
        let z = make_finite_gkp(IdealLogical::Z0, ErrorEnvelope1::symmetric(), 0.1).unwrap();
        assert_eq!(z.n_max(Quadrature::Q), 6);
    }

    #[test]
    fn zero_state_mid_tooth_suppressed() {
        let z = make_finite_gkp(IdealLogical::Z0, ErrorEnvelope1::symmetric(), 0.1).unwrap();
        let r = z.amplitude(Quadrature::Q, SQRT_PI).norm() / z.amplitude(Quadrature::Q, 0.0).norm();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn normalization_close_to_unity() {
        for label in [IdealLogical::Z0, IdealLogical::Z1, IdealLogical::XPlus, IdealLogical::XMinus] {
            let s = make_finite_gkp(label, ErrorEnvelope1::symmetric(), 0.1).unwrap();
            for quad in [Quadrature::Q, Quadrature::P] {
                let grid: Vec<f64> = (0..6001).map(|i| -30.0 + i as f64 * 0.01).collect();
                let w = quadrature_wavefunction(&s, quad, &grid).unwrap();
                let n = trapezoid(&grid, |i| w[i].norm_sqr());
                assert!((n - 1.0).abs() < 1e-6, "{label:?} {quad:?} {n}");
            }
        }
    }

    #[test]
    fn pdf_normalized_and_symmetric() {
        let s = plus(0.1);
        let grid: Vec<f64> = (0..56001).map(|i| -14.0 * SQRT_PI + i as f64 * 28.0 * SQRT_PI / 56000.0).collect();
        let total = trapezoid(&grid, |i| homodyne_outcome_pdf(&s, Quadrature::Q, grid[i]));
        assert!((total - 1.0).abs() < 1e-6);
        for &x in &[0.3, 1.1, 2.9] {
            let a = homodyne_outcome_pdf(&s, Quadrature::Q, x);
            let b = homodyne_outcome_pdf(&s, Quadrature::Q, -x);
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_state_pdf_at_origin() {
        let z = make_finite_gkp(IdealLogical::Z0, ErrorEnvelope1::symmetric(), 0.1).unwrap();
        let v = homodyne_outcome_pdf(&z, Quadrature::Q, 0.0);
        assert!((v - 2.0 / PI.sqrt()).abs() < 1e-3, "{v}");
    }

    #[test]
    fn sampling_is_deterministic_and_clusters() {
        let s = plus(1e-4);
        let mut r1 = seeded_rng(7);
        let mut r2 = seeded_rng(7);
        let a: Vec<f64> = (0..100).map(|_| sample_homodyne(&s, Quadrature::Q, &mut r1)).collect();
        let b: Vec<f64> = (0..100).map(|_| sample_homodyne(&s, Quadrature::Q, &mut r2)).collect();
        assert_eq!(a, b);
        for x in a {
            let d = x - (x / SQRT_PI).round() * SQRT_PI;
            assert!(d.abs() < 0.05, "{x}");
        }
    }
}
