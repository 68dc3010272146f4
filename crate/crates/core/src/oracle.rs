//! Dense position-grid wavefunctions for up to three modes.
//!
//! Grid: `M = 2k²` points per mode, `Δx = √π/k`, `x_j = (j − M/2)·Δx`.
//! Since `Δx·Δp = 2π/M` with `Δp = Δx`, the momentum grid coincides with
//! the position grid and the Fourier gate maps the grid to itself:
//!
//! `ψ'_j = (1/√M) (−1)^{j+k} Σ_l e^{2πi jl/M} (−1)^l ψ_l`
//!
//! which is an unnormalized inverse DFT bracketed by alternating signs.
//! Amplitudes are stored row-major with mode 0 slowest and normalized so
//! that `Σ|ψ|² Δxⁿ = 1`.

use crate::error::{contract, Error, Result};
use crate::gkp::{quadrature_wavefunction, FiniteGkp, Quadrature, SQRT_PI};
use crate::graph::GkpGraphState;
use crate::scalar::Mat;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::io::Write;

pub const MAX_MODES: usize = 3;
/// Weight allowed to leave the grid before a gate reports aliasing.
pub const ALIAS_TOL: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per `√π`.
    pub k: usize,
    pub modes: usize,
}

impl GridSpec {
    pub fn new(k: usize, modes: usize) -> Result<Self> {
        if modes == 0 || modes > MAX_MODES {
            return Err(Error::Capacity(format!("grid oracle handles 1..={MAX_MODES} modes, got {modes}")));
        }
        let g = GridSpec { k, modes };
        let min_points = if modes == 1 { 1024 } else { 256 };
        if k < 6 || g.points() < min_points {
            return contract(format!("grid with k={k} is too coarse for {modes} mode(s)"));
        }
        Ok(g)
    }

    /// Default resolution: `k = 32` for one mode, `16` for two, `12` for three.
    pub fn for_modes(modes: usize) -> Result<Self> {
        let k = match modes {
            1 => 32,
            2 => 16,
            _ => 12,
        };
        GridSpec::new(k, modes)
    }

    /// Points per mode.
    pub fn points(&self) -> usize {
        2 * self.k * self.k
    }

    pub fn dx(&self) -> f64 {
        SQRT_PI / self.k as f64
    }

    /// Half-width `L = k√π`.
    pub fn extent(&self) -> f64 {
        self.k as f64 * SQRT_PI
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.points() / 2) as f64) * self.dx()
    }

    pub fn axis(&self) -> Vec<f64> {
        (0..self.points()).map(|j| self.x(j)).collect()
    }

    pub fn len(&self) -> usize {
        self.points().pow(self.modes as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn stride(&self, mode: usize) -> usize {
        self.points().pow((self.modes - 1 - mode) as u32)
    }

    fn cell(&self) -> f64 {
        self.dx().powi(self.modes as i32)
    }

    fn index_to_coords(&self, mut idx: usize) -> Vec<usize> {
        let m = self.points();
        let mut c = vec![0; self.modes];
        for d in (0..self.modes).rev() {
            c[d] = idx % m;
            idx /= m;
        }
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridWavefunction {
    pub spec: GridSpec,
    pub amplitudes: Vec<Complex64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GridGate {
    Cz(usize, usize),
    Cx(usize, usize),
    /// `(mode, Δq, Δp)` in absolute units.
    Displacement(usize, f64, f64),
    Fourier(usize),
    /// `(i, j, transmissivity)`.
    Beamsplitter(usize, usize, f64),
}

impl GridWavefunction {
    pub fn zeros(spec: GridSpec) -> Self {
        GridWavefunction { spec, amplitudes: vec![Complex64::new(0.0, 0.0); spec.len()] }
    }

    pub fn norm2(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.spec.cell()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm2();
        if !(n > 0.0) || !n.is_finite() {
            return contract("cannot normalize a vanishing wavefunction");
        }
        let f = 1.0 / n.sqrt();
        self.amplitudes.iter_mut().for_each(|a| *a *= f);
        Ok(())
    }

    /// Position density marginal of one mode.
    pub fn marginal(&self, mode: usize) -> Result<Vec<f64>> {
        check_mode(&self.spec, mode)?;
        let m = self.spec.points();
        let st = self.spec.stride(mode);
        let mut out = vec![0.0; m];
        for (idx, a) in self.amplitudes.iter().enumerate() {
            out[(idx / st) % m] += a.norm_sqr();
        }
        let w = self.spec.cell() / self.spec.dx();
        out.iter_mut().for_each(|x| *x *= w);
        Ok(out)
    }

    /// Writes `x, |ψ(x)|²` of a single-mode marginal as CSV.
    pub fn dump_marginal_csv(&self, mode: usize, out: &mut impl Write) -> Result<()> {
        let rho = self.marginal(mode)?;
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(["x", "density"]).map_err(|e| Error::Io(e.to_string()))?;
        for (j, r) in rho.iter().enumerate() {
            w.write_record([crate::runner::fmt_num(self.spec.x(j)), crate::runner::fmt_num(*r)])
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::Io(e.to_string()))
    }
}

fn check_mode(spec: &GridSpec, mode: usize) -> Result<()> {
    if mode >= spec.modes {
        return contract(format!("mode {mode} out of range for a {}-mode grid", spec.modes));
    }
    Ok(())
}

/// Grid samples of a single-mode finite GKP state's position wavefunction.
pub fn synthesize_single(state: &FiniteGkp, spec: GridSpec) -> Result<GridWavefunction> {
    if spec.modes != 1 {
        return contract("single-mode synthesis needs a one-mode grid");
    }
    let amps = quadrature_wavefunction(state, Quadrature::Q, &spec.axis())?;
    let mut w = GridWavefunction { spec, amplitudes: amps };
    w.normalize()?;
    Ok(w)
}

/// Teeth within this many standard deviations of a grid point are summed
/// (amplitude tails below e^{-28}).
const LATTICE_WINDOW: f64 = 7.5;

/// Position wavefunction of a small graph state.
///
/// `ψ(q) = Σ_b a_b Σ_c α(c) ∫dt η_b(q − c, t) e^{i t·(q + c)/2}`, with `c`
/// running over lattice points `n√π` and `α` the ideal amplitude of the
/// bit string `n mod 2`. The `t` integral is done in closed form.
pub fn synthesize(state: &GkpGraphState<f64>, spec: GridSpec) -> Result<GridWavefunction> {
    let n = state.n_modes();
    if n > MAX_MODES {
        return Err(Error::Capacity(format!("grid oracle handles at most {MAX_MODES} modes, state has {n}")));
    }
    if spec.modes != n {
        return contract(format!("grid has {} modes, state has {n}", spec.modes));
    }
    if !state.in_sync() {
        return Err(Error::InternalConsistency("Gaussian and ideal layers disagree on mode order".into()));
    }
    let alpha = state.ideal.statevector()?;
    let s2 = state.sigma2;
    let cov = to_na(&state.cov).scale(s2);
    let lam = cov
        .clone()
        .try_inverse()
        .ok_or(Error::DegenerateConditioning { index: 0, variance: 0.0 })?;
    let sel = |r: std::ops::Range<usize>, c: std::ops::Range<usize>| lam.view((r.start, c.start), (r.len(), c.len())).into_owned();
    let l_ss = sel(0..n, 0..n);
    let l_ts = sel(n..2 * n, 0..n);
    let l_tt_inv = sel(n..2 * n, n..2 * n)
        .try_inverse()
        .ok_or(Error::DegenerateConditioning { index: n, variance: 0.0 })?;
    let sd: Vec<f64> = (0..n).map(|i| cov[(i, i)].sqrt()).collect();

    let mut w = GridWavefunction::zeros(spec);
    let mut q = [0.0; MAX_MODES];
    let mut ranges = [(0i64, 0i64); MAX_MODES];
    for (b, br) in state.branches.iter().enumerate() {
        let mu = state.mean_abs(b);
        let (mu_s, mu_t) = (&mu[..n], &mu[n..]);
        let (om_s, om_t) = (&br.phase_slope[..n], &br.phase_slope[n..]);
        for (idx, amp) in w.amplitudes.iter_mut().enumerate() {
            let mut rem = idx;
            for d in (0..n).rev() {
                q[d] = spec.x(rem % spec.points());
                rem /= spec.points();
            }
            for i in 0..n {
                let centre = (q[i] - mu_s[i]) / SQRT_PI;
                let half = LATTICE_WINDOW * sd[i] / SQRT_PI;
                ranges[i] = ((centre - half).floor() as i64, (centre + half).ceil() as i64);
            }
            let mut acc = Complex64::new(0.0, 0.0);
            for_each_lattice_point(&ranges[..n], &mut |teeth: &[i64]| {
                let bits = teeth.iter().fold(0usize, |a, t| (a << 1) | (t.rem_euclid(2) as usize));
                let al = alpha[bits];
                if al.norm_sqr() == 0.0 {
                    return;
                }
                let mut s = [0.0; MAX_MODES];
                let mut ds = [0.0; MAX_MODES];
                let mut lin_t = [Complex64::new(0.0, 0.0); MAX_MODES];
                for i in 0..n {
                    let c = teeth[i] as f64 * SQRT_PI;
                    s[i] = q[i] - c;
                    ds[i] = s[i] - mu_s[i];
                    lin_t[i] = Complex64::new(0.0, -om_t[i] + (q[i] + c) / 2.0);
                }
                let mut h = [Complex64::new(0.0, 0.0); MAX_MODES];
                let mut e = Complex64::new(0.0, 0.0);
                for i in 0..n {
                    let mut lts = 0.0;
                    let mut lss = 0.0;
                    for j in 0..n {
                        lts += l_ts[(i, j)] * ds[j];
                        lss += l_ss[(i, j)] * ds[j];
                    }
                    h[i] = lin_t[i] - lts;
                    e += -0.5 * lss * ds[i] - I * om_s[i] * s[i] + lin_t[i] * mu_t[i];
                }
                for i in 0..n {
                    for j in 0..n {
                        e += 0.5 * h[i] * l_tt_inv[(i, j)] * h[j];
                    }
                }
                acc += al * e.exp();
            });
            *amp += br.amplitude * acc;
        }
    }
    w.normalize()?;
    Ok(w)
}

fn for_each_lattice_point(ranges: &[(i64, i64)], f: &mut impl FnMut(&[i64])) {
    let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
    if ranges.iter().any(|r| r.0 > r.1) {
        return;
    }
    loop {
        f(&cur);
        let mut d = ranges.len();
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            if cur[d] < ranges[d].1 {
                cur[d] += 1;
                for (e, r) in cur.iter_mut().zip(ranges).skip(d + 1) {
                    *e = r.0;
                }
                break;
            }
        }
    }
}

fn to_na(m: &Mat<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.rows, m.cols, |i, j| m[(i, j)])
}

/// Runs `f` on every 1D line of `w` along `mode`.
fn map_lines(w: &mut GridWavefunction, mode: usize, mut f: impl FnMut(&mut [Complex64], usize)) {
    let m = w.spec.points();
    let st = w.spec.stride(mode);
    let outer = w.spec.len() / (m * st);
    let mut line = vec![Complex64::new(0.0, 0.0); m];
    for o in 0..outer {
        for inner in 0..st {
            let base = o * m * st + inner;
            for (j, l) in line.iter_mut().enumerate() {
                *l = w.amplitudes[base + j * st];
            }
            f(&mut line, base);
            for (j, l) in line.iter().enumerate() {
                w.amplitudes[base + j * st] = *l;
            }
        }
    }
}

fn alt(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Centered momentum-grid index offset `m − M/2`.
fn centered_index(j: usize, m: usize) -> f64 {
    j as f64 - (m / 2) as f64
}

/// `φ(p_j) = (Δx/√2π) Σ_l e^{−i p_j x_l} ψ_l` on the shared grid.
fn to_momentum(line: &mut [Complex64], planner: &mut FftPlanner<f64>, k: usize) {
    let m = line.len();
    let fft = planner.plan_fft_forward(m);
    for (l, a) in line.iter_mut().enumerate() {
        *a *= alt(l);
    }
    fft.process(line);
    let g = alt(k) / (m as f64).sqrt();
    for (j, a) in line.iter_mut().enumerate() {
        *a *= alt(j) * g;
    }
}

/// Inverse of [`to_momentum`].
fn from_momentum(line: &mut [Complex64], planner: &mut FftPlanner<f64>, k: usize) {
    let m = line.len();
    let fft = planner.plan_fft_inverse(m);
    for (l, a) in line.iter_mut().enumerate() {
        *a *= alt(l);
    }
    fft.process(line);
    let g = alt(k) / (m as f64).sqrt();
    for (j, a) in line.iter_mut().enumerate() {
        *a *= alt(j) * g;
    }
}

/// `f(x) → f(x − d)` by a momentum-space phase ramp.
fn translate_line(line: &mut [Complex64], d: f64, dx: f64, planner: &mut FftPlanner<f64>, k: usize) {
    let m = line.len();
    to_momentum(line, planner, k);
    for (j, a) in line.iter_mut().enumerate() {
        let p = centered_index(j, m) * dx;
        *a *= Complex64::from_polar(1.0, -d * p);
    }
    from_momentum(line, planner, k);
}

/// Weight of `line` outside the central window of half-width `keep`.
fn edge_weight(line: &[Complex64], keep: usize) -> f64 {
    let m = line.len();
    let lo = (m / 2).saturating_sub(keep);
    let hi = (m / 2 + keep).min(m);
    line.iter().enumerate().filter(|(j, _)| *j < lo || *j >= hi).map(|(_, a)| a.norm_sqr()).sum()
}

/// Applies `gate` exactly on the grid.
pub fn evolve(w: &GridWavefunction, gate: GridGate) -> Result<GridWavefunction> {
    let spec = w.spec;
    let mut out = w.clone();
    let mut planner = FftPlanner::new();
    let (m, dx, k) = (spec.points(), spec.dx(), spec.k);
    match gate {
        GridGate::Cz(i, j) => {
            check_pair(&spec, i, j)?;
            for (idx, a) in out.amplitudes.iter_mut().enumerate() {
                let c = spec.index_to_coords(idx);
                *a *= Complex64::from_polar(1.0, -spec.x(c[i]) * spec.x(c[j]));
            }
        }
        GridGate::Cx(c, t) => {
            check_pair(&spec, c, t)?;
            // ψ'(q_c, q_t) = ψ(q_c, q_t − q_c): an exact index shift
            let mut lost = 0.0;
            let src = &w.amplitudes;
            for (idx, a) in out.amplitudes.iter_mut().enumerate() {
                *a = Complex64::new(0.0, 0.0);
                let co = spec.index_to_coords(idx);
                let from = co[t] as i64 - (co[c] as i64 - (m / 2) as i64);
                if (0..m as i64).contains(&from) {
                    let delta = (from - co[t] as i64) * spec.stride(t) as i64;
                    *a = src[(idx as i64 + delta) as usize];
                }
            }
            for (idx, a) in src.iter().enumerate() {
                let co = spec.index_to_coords(idx);
                let to = co[t] as i64 + (co[c] as i64 - (m / 2) as i64);
                if !(0..m as i64).contains(&to) {
                    lost += a.norm_sqr();
                }
            }
            if lost * spec.cell() > ALIAS_TOL {
                return Err(Error::Aliasing(format!("controlled shift pushes weight {:.3e} off the grid", lost * spec.cell())));
            }
        }
        GridGate::Displacement(mode, dq, dp) => {
            check_mode(&spec, mode)?;
            let mut lost = 0.0;
            let keep = ((spec.extent() - dq.abs()) / dx).floor().max(0.0) as usize;
            map_lines(&mut out, mode, |line, _| {
                lost += edge_weight(line, keep);
                translate_line(line, dq, dx, &mut planner, k);
                for (j, a) in line.iter_mut().enumerate() {
                    *a *= Complex64::from_polar(1.0, dp * spec.x(j) - dq * dp / 2.0);
                }
            });
            if lost * spec.cell() > ALIAS_TOL {
                return Err(Error::Aliasing(format!("displacement pushes weight {:.3e} off the grid", lost * spec.cell())));
            }
        }
        GridGate::Fourier(mode) => {
            check_mode(&spec, mode)?;
            map_lines(&mut out, mode, |line, _| {
                // ψ'(x) = (1/√2π) ∫ e^{ixy} ψ(y) dy
                from_momentum(line, &mut planner, k);
            });
        }
        GridGate::Beamsplitter(i, j, tr) => {
            check_pair(&spec, i, j)?;
            if !(tr > 0.0 && tr < 1.0) {
                return contract("transmissivity must lie in (0, 1)");
            }
            // ψ'(x) = ψ(Rᵀx) for the position rotation R, done as three shears
            let theta = (1.0 - tr).sqrt().atan2(tr.sqrt());
            let a = -(theta / 2.0).tan();
            let b = theta.sin();
            shear(&mut out, i, j, a, &mut planner)?;
            shear(&mut out, j, i, b, &mut planner)?;
            shear(&mut out, i, j, a, &mut planner)?;
        }
    }
    Ok(out)
}

/// `ψ(…, x_a, …, x_b, …) → ψ(…, x_a + g·x_b, …)`.
fn shear(w: &mut GridWavefunction, a: usize, b: usize, g: f64, planner: &mut FftPlanner<f64>) -> Result<()> {
    let spec = w.spec;
    let (dx, k) = (spec.dx(), spec.k);
    let mut lost = 0.0;
    map_lines(w, a, |line, base| {
        let co = spec.index_to_coords(base);
        let d = -g * spec.x(co[b]);
        let keep = ((spec.extent() - d.abs()) / dx).floor().max(0.0) as usize;
        lost += edge_weight(line, keep);
        translate_line(line, d, dx, planner, k);
    });
    if lost * spec.cell() > ALIAS_TOL {
        return Err(Error::Aliasing(format!("shear pushes weight {:.3e} off the grid", lost * spec.cell())));
    }
    Ok(())
}

fn check_pair(spec: &GridSpec, i: usize, j: usize) -> Result<()> {
    check_mode(spec, i)?;
    check_mode(spec, j)?;
    if i == j {
        return contract("two-mode gate on a single mode");
    }
    Ok(())
}

/// Homodyne slice of `mode` at outcome `y` (absolute units).
///
/// Returns the renormalized wavefunction of the remaining modes (`None` if
/// none remain) and the outcome density.
pub fn slice_homodyne(w: &GridWavefunction, mode: usize, quad: Quadrature, y: f64) -> Result<(Option<GridWavefunction>, f64)> {
    let spec = w.spec;
    check_mode(&spec, mode)?;
    if !y.is_finite() || y.abs() >= spec.extent() {
        return contract(format!("outcome {y} outside the grid"));
    }
    let (m, dx, k) = (spec.points(), spec.dx(), spec.k);
    let mut planner = FftPlanner::new();
    // spectral evaluation at an arbitrary point
    let mut src = w.clone();
    if quad == Quadrature::Q {
        map_lines(&mut src, mode, |line, _| to_momentum(line, &mut planner, k));
    }
    let kernel: Vec<Complex64> = (0..m)
        .map(|j| {
            let z = centered_index(j, m) * dx;
            let ph = match quad {
                // ψ(y) = (Δp/√2π) Σ e^{i y p_j} φ_j
                Quadrature::Q => y * z,
                // φ(y) = (Δx/√2π) Σ e^{−i y x_j} ψ_j
                Quadrature::P => -y * z,
            };
            Complex64::from_polar(dx / (2.0 * PI).sqrt(), ph)
        })
        .collect();
    let rest_modes = spec.modes - 1;
    let st = spec.stride(mode);
    let rest_len = spec.len() / m;
    let mut rest = vec![Complex64::new(0.0, 0.0); rest_len];
    for (r, slot) in rest.iter_mut().enumerate() {
        // r enumerates the other coordinates in order
        let (hi, lo) = (r / st, r % st);
        let base = hi * m * st + lo;
        *slot = (0..m).map(|j| kernel[j] * src.amplitudes[base + j * st]).sum();
    }
    let density: f64 = rest.iter().map(|a| a.norm_sqr()).sum::<f64>() * dx.powi(rest_modes as i32);
    if rest_modes == 0 {
        return Ok((None, density));
    }
    let mut g = GridWavefunction { spec: GridSpec { k: spec.k, modes: rest_modes }, amplitudes: rest };
    if density > 0.0 {
        g.normalize()?;
    }
    Ok((Some(g), density))
}

/// `⟨w1|w2⟩` on the grid.
pub fn overlap(w1: &GridWavefunction, w2: &GridWavefunction) -> Result<Complex64> {
    if w1.spec != w2.spec {
        return contract("overlap of wavefunctions on different grids");
    }
    let s: Complex64 = w1.amplitudes.iter().zip(&w2.amplitudes).map(|(a, b)| a.conj() * b).sum();
    Ok(s * w1.spec.cell())
}

/// `|⟨w1|w2⟩|²`.
pub fn fidelity(w1: &GridWavefunction, w2: &GridWavefunction) -> Result<f64> {
    Ok(overlap(w1, w2)?.norm_sqr())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gkp::{make_finite_gkp, ErrorEnvelope1, IdealLogical};

    fn coherent(spec: GridSpec, q0: f64, p0: f64) -> GridWavefunction {
        let amps = spec.axis().iter().map(|&x| Complex64::from_polar((-(x - q0).powi(2) / 2.0).exp(), p0 * x)).collect();
        let mut w = GridWavefunction { spec, amplitudes: amps };
        w.normalize().unwrap();
        w
    }

    fn mean_q(w: &GridWavefunction) -> f64 {
        let rho = w.marginal(0).unwrap();
        rho.iter().enumerate().map(|(j, r)| r * w.spec.x(j)).sum::<f64>() * w.spec.dx()
    }

    #[test]
    fn fourier_rotates_phase_space() {
        let spec = GridSpec::for_modes(1).unwrap();
        let w = coherent(spec, 1.5, -0.7);
        let f = evolve(&w, GridGate::Fourier(0)).unwrap();
        // q' = −p, p' = q
        assert!((mean_q(&f) - 0.7).abs() < 1e-9, "{}", mean_q(&f));
        let ff = evolve(&f, GridGate::Fourier(0)).unwrap();
        assert!((mean_q(&ff) + 1.5).abs() < 1e-9);
        let f4 = evolve(&evolve(&ff, GridGate::Fourier(0)).unwrap(), GridGate::Fourier(0)).unwrap();
        assert!((overlap(&w, &f4).unwrap() - 1.0).norm() < 1e-10);
    }

    #[test]
    fn displacement_matches_coherent_state() {
        let spec = GridSpec::for_modes(1).unwrap();
        let w = coherent(spec, 0.0, 0.0);
        let d = evolve(&w, GridGate::Displacement(0, 0.8, -1.1)).unwrap();
        let want = coherent(spec, 0.8, -1.1);
        // D(s,t)|0⟩ = e^{−ist/2} |coherent⟩ in this phase convention
        let ov = overlap(&want, &d).unwrap();
        assert!((ov - Complex64::from_polar(1.0, 0.8 * 1.1 / 2.0)).norm() < 1e-9, "{ov}");
    }

    #[test]
    fn zero_and_one_nearly_orthogonal() {
        let spec = GridSpec::for_modes(1).unwrap();
        let z0 = make_finite_gkp(IdealLogical::Z0, ErrorEnvelope1::symmetric(), 0.1).unwrap();
        let z1 = make_finite_gkp(IdealLogical::Z1, ErrorEnvelope1::symmetric(), 0.1).unwrap();
        let a = synthesize_single(&z0, spec).unwrap();
        let b = synthesize_single(&z1, spec).unwrap();
        assert!((overlap(&a, &a).unwrap() - 1.0).norm() < 1e-8);
        assert!(overlap(&a, &b).unwrap().norm() < 1e-3);
    }

    #[test]
    fn lattice_enumeration_is_a_product() {
        let mut n = 0;
        for_each_lattice_point(&[(-1, 1), (0, 2), (3, 3)], &mut |_| n += 1);
        assert_eq!(n, 9);
    }
}
