//! Affine-symplectic propagation, marginalization and conditioning of the
//! displacement-variable Gaussian.
//!
//! Variables are ordered `(s_1..s_n, t_1..t_n)`: q-displacements first.
//! Covariances are dimensionless multiples of σ².

use crate::error::{contract, Error, Result};
use crate::scalar::{Mat, Scalar};
use serde::{Deserialize, Serialize};

/// Index helper for the `(s_1..s_n, t_1..t_n)` layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureOrder {
    pub n_modes: usize,
}

impl QuadratureOrder {
    pub fn new(n_modes: usize) -> Self {
        QuadratureOrder { n_modes }
    }
    pub fn dim(&self) -> usize {
        2 * self.n_modes
    }
    pub fn q(&self, mode: usize) -> usize {
        mode
    }
    pub fn p(&self, mode: usize) -> usize {
        self.n_modes + mode
    }
    /// Index of the conjugate variable of `idx`.
    pub fn conjugate(&self, idx: usize) -> usize {
        if idx < self.n_modes {
            idx + self.n_modes
        } else {
            idx - self.n_modes
        }
    }
    pub fn mode_of(&self, idx: usize) -> usize {
        idx % self.n_modes
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMoments<T> {
    pub mean: Vec<T>,
    pub cov: Mat<T>,
}

impl<T: Scalar> GaussianMoments<T> {
    pub fn new(mean: Vec<T>, cov: Mat<T>) -> Result<Self> {
        if !cov.is_square() || cov.rows != mean.len() {
            return Err(Error::DimensionMismatch(format!(
                "mean has {} entries, covariance is {}x{}",
                mean.len(),
                cov.rows,
                cov.cols
            )));
        }
        if cov.rows % 2 != 0 {
            return Err(Error::DimensionMismatch(format!("odd dimension {}", cov.rows)));
        }
        Ok(GaussianMoments { mean, cov })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn order(&self) -> QuadratureOrder {
        QuadratureOrder::new(self.dim() / 2)
    }

    /// Uncorrelated modes with `q`-variances `l` and `p`-variances `m`.
    pub fn product(l: &[T], m: &[T]) -> Self {
        let mut d = l.to_vec();
        d.extend_from_slice(m);
        GaussianMoments { mean: vec![T::zero(); d.len()], cov: Mat::diag(&d) }
    }

    pub fn to_f64(&self) -> GaussianMoments<f64> {
        GaussianMoments { mean: self.mean.iter().map(|x| x.to_f64()).collect(), cov: self.cov.to_f64() }
    }
}

/// `x ↦ S·x + d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap<T> {
    pub linear: Mat<T>,
    pub shift: Vec<T>,
}

impl<T: Scalar> AffineMap<T> {
    pub fn linear(linear: Mat<T>) -> Self {
        let shift = vec![T::zero(); linear.rows];
        AffineMap { linear, shift }
    }

    pub fn identity(n_modes: usize) -> Self {
        Self::linear(Mat::identity(2 * n_modes))
    }

    /// `C_Z = e^{−i q_i q_j}`: `t_i −= s_j`, `t_j −= s_i`.
    pub fn cz(n: usize, i: usize, j: usize) -> Self {
        let mut s = Mat::identity(2 * n);
        s[(n + i, j)] = -T::one();
        s[(n + j, i)] = -T::one();
        Self::linear(s)
    }

    /// `C_X = e^{−i q_c p_t}`: `s_t += s_c`, `t_c −= t_t`.
    pub fn cx(n: usize, c: usize, t: usize) -> Self {
        let mut s = Mat::identity(2 * n);
        s[(t, c)] = T::one();
        s[(n + c, n + t)] = -T::one();
        Self::linear(s)
    }

    /// Phase-space rotation `q → p`, `p → −q`: `s' = −t`, `t' = s`.
    pub fn fourier(n: usize, i: usize) -> Self {
        let mut s = Mat::identity(2 * n);
        s[(i, i)] = T::zero();
        s[(n + i, n + i)] = T::zero();
        s[(i, n + i)] = -T::one();
        s[(n + i, i)] = T::one();
        Self::linear(s)
    }

    /// Beamsplitter with amplitude coefficients `a = √T`, `b = √(1−T)`.
    pub fn beamsplitter_coeffs(n: usize, i: usize, j: usize, a: T, b: T) -> Self {
        let mut s = Mat::identity(2 * n);
        for off in [0, n] {
            s[(i + off, i + off)] = a.clone();
            s[(i + off, j + off)] = b.clone();
            s[(j + off, i + off)] = -b.clone();
            s[(j + off, j + off)] = a.clone();
        }
        Self::linear(s)
    }

    /// 50:50 beamsplitter, exact in Q(√2).
    pub fn beamsplitter_balanced(n: usize, i: usize, j: usize) -> Self {
        Self::beamsplitter_coeffs(n, i, j, T::frac_1_sqrt2(), T::frac_1_sqrt2())
    }

    pub fn beamsplitter(n: usize, i: usize, j: usize, transmissivity: f64) -> Self {
        if transmissivity == 0.5 {
            return Self::beamsplitter_balanced(n, i, j);
        }
        Self::beamsplitter_coeffs(
            n,
            i,
            j,
            T::from_f64(transmissivity.sqrt()),
            T::from_f64((1.0 - transmissivity).sqrt()),
        )
    }

    /// `q → e^{−r} q`, `p → e^{r} p`.
    pub fn squeezer(n: usize, i: usize, r: f64) -> Self {
        let mut s = Mat::identity(2 * n);
        s[(i, i)] = T::from_f64((-r).exp());
        s[(n + i, n + i)] = T::from_f64(r.exp());
        Self::linear(s)
    }

    pub fn displacement(n: usize, mode: usize, du: T, dv: T) -> Self {
        let mut f = Self::identity(n);
        f.shift[mode] = du;
        f.shift[n + mode] = dv;
        f
    }

    /// `self ∘ other`.
    pub fn after(&self, other: &AffineMap<T>) -> AffineMap<T> {
        let linear = self.linear.matmul(&other.linear);
        let shifted = self.linear.matvec(&other.shift);
        let shift = shifted.into_iter().zip(self.shift.iter()).map(|(a, b)| a + b.clone()).collect();
        AffineMap { linear, shift }
    }
}

/// `Ω = [[0, I], [−I, 0]]` in the `(s, t)` ordering.
pub fn symplectic_form<T: Scalar>(n: usize) -> Mat<T> {
    let mut w = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        w[(i, n + i)] = T::one();
        w[(n + i, i)] = -T::one();
    }
    w
}

/// `max |S Ω Sᵀ − Ω|`.
pub fn symplectic_defect<T: Scalar>(s: &Mat<T>) -> f64 {
    let n = s.rows / 2;
    let sf = s.to_f64();
    let w = symplectic_form::<f64>(n);
    sf.matmul(&w).matmul(&sf.transpose()).max_abs_diff(&w)
}

pub fn apply_affine<T: Scalar>(m: &GaussianMoments<T>, f: &AffineMap<T>) -> Result<GaussianMoments<T>> {
    if f.linear.cols != m.dim() || f.shift.len() != f.linear.rows {
        return Err(Error::DimensionMismatch(format!(
            "map {}x{} applied to dimension {}",
            f.linear.rows,
            f.linear.cols,
            m.dim()
        )));
    }
    let mean = f
        .linear
        .matvec(&m.mean)
        .into_iter()
        .zip(f.shift.iter())
        .map(|(a, b)| a + b.clone())
        .collect();
    let cov = f.linear.matmul(&m.cov).matmul(&f.linear.transpose()).symmetrize();
    Ok(GaussianMoments { mean, cov })
}

/// Result of conditioning on one variable.
#[derive(Clone, Debug)]
pub struct Conditioned<T> {
    /// Moments of the remaining variables.
    pub moments: GaussianMoments<T>,
    /// Density of the observed value under the prior marginal.
    pub weight: f64,
    /// Regression coefficients `V_ba / V_aa` over the remaining variables.
    pub gain: Vec<T>,
}

/// Regression vector `V[:, k] / V[k, k]` over all variables.
pub fn regression<T: Scalar>(cov: &Mat<T>, k: usize) -> Result<Vec<T>> {
    let vkk = cov[(k, k)].clone();
    if vkk.to_f64() <= 0.0 {
        return Err(Error::DegenerateConditioning { index: k, variance: vkk.to_f64() });
    }
    Ok((0..cov.rows).map(|i| cov[(i, k)].clone() / vkk.clone()).collect())
}

/// Schur-complement update on all variables, keeping the dimension.
pub fn schur_update<T: Scalar>(cov: &Mat<T>, k: usize) -> Result<Mat<T>> {
    let beta = regression(cov, k)?;
    let n = cov.rows;
    let out = Mat::from_fn(n, n, |i, j| {
        let corr = beta[i].clone() * cov[(k, j)].clone();
        if corr.is_zero() {
            cov[(i, j)].clone()
        } else {
            cov[(i, j)].clone() - corr
        }
    });
    Ok(out.symmetrize())
}

pub fn condition_on_linear<T: Scalar>(m: &GaussianMoments<T>, index: usize, value: T) -> Result<Conditioned<T>> {
    if index >= m.dim() {
        return contract(format!("conditioning index {} out of range {}", index, m.dim()));
    }
    let beta = regression(&m.cov, index)?;
    let vkk = m.cov[(index, index)].to_f64();
    let resid = value - m.mean[index].clone();
    let r = resid.to_f64();
    let weight = (-r * r / (2.0 * vkk)).exp() / (2.0 * std::f64::consts::PI * vkk).sqrt();
    let cov_full = schur_update(&m.cov, index)?;
    let keep: Vec<usize> = (0..m.dim()).filter(|&i| i != index).collect();
    let mean = keep.iter().map(|&i| m.mean[i].clone() + beta[i].clone() * resid.clone()).collect();
    let cov = cov_full.select(&keep, &keep);
    let gain = keep.iter().map(|&i| beta[i].clone()).collect();
    Ok(Conditioned { moments: GaussianMoments { mean, cov }, weight, gain })
}

pub fn marginalize<T: Scalar>(m: &GaussianMoments<T>, keep: &[usize]) -> Result<GaussianMoments<T>> {
    if keep.is_empty() {
        return contract("marginalize: empty keep set");
    }
    if let Some(&bad) = keep.iter().find(|&&i| i >= m.dim()) {
        return contract(format!("marginalize: index {} out of range {}", bad, m.dim()));
    }
    Ok(GaussianMoments { mean: keep.iter().map(|&i| m.mean[i].clone()).collect(), cov: m.cov.select(keep, keep) })
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue<T: Scalar>(cov: &Mat<T>) -> f64 {
    if cov.rows == 0 {
        return 0.0;
    }
    let eig = nalgebra::SymmetricEigen::new(cov.to_nalgebra());
    eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// `1 / (V⁻¹)_{jj}`: variance of variable `j` given all the others.
pub fn conditional_variance<T: Scalar>(cov: &Mat<T>, j: usize) -> Result<f64> {
    let v = cov.to_nalgebra();
    let inv = v
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .or_else(|| v.try_inverse())
        .ok_or(Error::DegenerateConditioning { index: j, variance: 0.0 })?;
    let pjj = inv[(j, j)];
    if !(pjj > 0.0) {
        return Err(Error::DegenerateConditioning { index: j, variance: 1.0 / pjj });
    }
    Ok(1.0 / pjj)
}

/// `Λ_{jr} / Λ_{jj}` for precision `Λ = V⁻¹`, over all `r`.
pub fn precision_ratio<T: Scalar>(cov: &Mat<T>, j: usize) -> Result<Vec<f64>> {
    let v = cov.to_nalgebra();
    let inv = v
        .clone()
        .cholesky()
        .map(|c| c.inverse())
        .or_else(|| v.try_inverse())
        .ok_or(Error::DegenerateConditioning { index: j, variance: 0.0 })?;
    let pjj = inv[(j, j)];
    Ok((0..cov.rows).map(|r| inv[(j, r)] / pjj).collect())
}
