//! The branch-superposition state container.
//!
//! A state is `Σ_b a_b ∫dx η_b(x) D(x) |Ḡ⟩` where every branch envelope
//! `η_b ∝ exp(−½(x−μ_b)ᵀ(Vσ²)⁻¹(x−μ_b) − iω_b·x)` shares the covariance
//! `V` (stored in units of σ²). Means are stored in units of √π, phase
//! slopes `ω_b` in absolute units. `D(x) = e^{i s t/2} X(s) Z(t)` per mode with
//! variables ordered `(s_1..s_n, t_1..t_n)`.
//!
//! The ideal layer is a stabilizer tableau over its own mode list. The two
//! lists coincide except transiently inside composite protocols, where a
//! homodyne removes a mode from the Gaussian layer before the ideal-layer
//! projection removes it from the tableau.

use crate::error::{contract, Error, Result};
use crate::gaussian::{
    apply_affine, conditional_variance, precision_ratio, regression, schur_update, AffineMap, GaussianMoments,
    QuadratureOrder,
};
use crate::gkp::{IdealLogical, Quadrature, SQRT_PI};
use crate::ideal::{
    ideal_graph_from_edges, BellOutcome, GraphForm, GraphTopology, Pauli1, PauliRow, StabilizerTableau,
};
use crate::scalar::{Mat, Scalar};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Default pruning threshold on `|amplitude|²`.
pub const DEFAULT_PRUNE: f64 = 1e-12;

/// Per-vertex input envelope. Means are in units of √π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexEnvelope<T> {
    pub l: T,
    pub m: T,
    pub mu_q: T,
    pub mu_p: T,
}

impl<T: Scalar> VertexEnvelope<T> {
    pub fn centered(l: T, m: T) -> Self {
        VertexEnvelope { l, m, mu_q: T::zero(), mu_p: T::zero() }
    }
    pub fn unit() -> Self {
        Self::centered(T::one(), T::one())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Branch<T> {
    pub amplitude: Complex64,
    /// Mean in units of √π, length `2n`.
    pub mean: Vec<T>,
    /// Linear phase slope `ω` in absolute units, length `2n`.
    pub phase_slope: Vec<f64>,
    /// Comb index `n` chosen at each homodyne, in measurement order.
    pub tags: Vec<i64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BranchFilter {
    All,
    Index(usize),
}

/// Displacement applied after a homodyne to remove the outcome dependence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Feedback {
    /// Subtract the full regression response to the centered outcome.
    Full,
    /// Like `Full`, but the listed variable (index before removal) is
    /// displaced by `gain · p_c` instead.
    Gain { variable: usize, gain: f64 },
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub mode: String,
    pub quadrature: Quadrature,
    /// Outcome in units of √π.
    pub outcome: f64,
    /// Comb spacing in units of √π.
    pub spacing: f64,
    /// Nearest comb index `z`.
    pub cell: i64,
    /// `y − z·spacing`, in units of √π.
    pub centered: f64,
    /// Comb offset of the retained partner tooth (±1).
    pub partner: i64,
    /// Prior variance of the measured variable, in units of σ².
    pub variance: f64,
    /// `1/(V⁻¹)_jj` of the conjugate variable, in units of σ².
    pub conjugate_precision: f64,
    /// Per parent branch: measured-variable mean in units of √π, and parent tags.
    pub parent_means: Vec<(Vec<i64>, f64)>,
    /// Weight fraction of the partner-tooth branches.
    pub branch_error: f64,
    pub accepted: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GkpGraphState<T> {
    pub sigma2: f64,
    /// Gaussian-layer mode labels.
    pub modes: Vec<String>,
    /// Covariance in units of σ², shared by every branch.
    pub cov: Mat<T>,
    pub branches: Vec<Branch<T>>,
    /// Ideal-layer mode labels (tableau qubit order).
    pub ideal_modes: Vec<String>,
    pub ideal: StabilizerTableau,
    pub prune_threshold: f64,
    pub dropped_weight: f64,
}

impl<T: Scalar> GkpGraphState<T> {
    pub fn empty(sigma2: f64) -> Self {
        GkpGraphState {
            sigma2,
            modes: vec![],
            cov: Mat::zeros(0, 0),
            branches: vec![Branch { amplitude: Complex64::new(1.0, 0.0), mean: vec![], phase_slope: vec![], tags: vec![] }],
            ideal_modes: vec![],
            ideal: StabilizerTableau::empty(),
            prune_threshold: DEFAULT_PRUNE,
            dropped_weight: 0.0,
        }
    }

    pub fn n_modes(&self) -> usize {
        self.modes.len()
    }

    pub fn order(&self) -> QuadratureOrder {
        QuadratureOrder::new(self.n_modes())
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.modes
            .iter()
            .position(|m| m == label)
            .ok_or_else(|| Error::Contract(format!("unknown mode {label:?}")))
    }

    fn ideal_index(&self, label: &str) -> Result<usize> {
        self.ideal_modes
            .iter()
            .position(|m| m == label)
            .ok_or_else(|| Error::InternalConsistency(format!("mode {label:?} missing from ideal layer")))
    }

    pub fn in_sync(&self) -> bool {
        self.modes == self.ideal_modes
    }

    /// Graph form of the ideal layer (topology, local gates, Z corrections).
    pub fn ideal_form(&self) -> Result<GraphForm> {
        if !self.in_sync() {
            return Err(Error::InternalConsistency("ideal layer out of sync with Gaussian layer".into()));
        }
        self.ideal.graph_form()
    }

    pub fn topology(&self) -> Result<GraphTopology> {
        Ok(self.ideal_form()?.topology)
    }

    pub fn norm2(&self) -> f64 {
        self.branches.iter().map(|b| b.amplitude.norm_sqr()).sum()
    }

    pub fn cov_f64(&self) -> Mat<f64> {
        self.cov.to_f64()
    }

    /// Branch mean in absolute units.
    pub fn mean_abs(&self, b: usize) -> Vec<f64> {
        self.branches[b].mean.iter().map(|m| m.to_f64() * SQRT_PI).collect()
    }

    fn check_mode(&self, i: usize) -> Result<()> {
        if i >= self.n_modes() {
            return contract(format!("mode index {i} out of range {}", self.n_modes()));
        }
        Ok(())
    }

    /// Appends a fresh single-mode GKP qubit.
    pub fn add_qubit(&mut self, label: &str, logical: IdealLogical, env: VertexEnvelope<T>) -> Result<()> {
        if env.l.to_f64() <= 0.0 || env.m.to_f64() <= 0.0 {
            return contract(format!("envelope variances must be positive for {label:?}"));
        }
        if self.modes.iter().chain(&self.ideal_modes).any(|m| m == label) {
            return contract(format!("duplicate mode label {label:?}"));
        }
        let n = self.n_modes();
        let n2 = n + 1;
        let remap = |i: usize| if i < n { i } else { i + 1 };
        let mut cov = Mat::zeros(2 * n2, 2 * n2);
        for i in 0..2 * n {
            for j in 0..2 * n {
                cov[(remap(i), remap(j))] = self.cov[(i, j)].clone();
            }
        }
        cov[(n, n)] = env.l.clone();
        cov[(2 * n2 - 1, 2 * n2 - 1)] = env.m.clone();
        for b in &mut self.branches {
            let mut mean = vec![T::zero(); 2 * n2];
            let mut slope = vec![0.0; 2 * n2];
            for i in 0..2 * n {
                mean[remap(i)] = b.mean[i].clone();
                slope[remap(i)] = b.phase_slope[i];
            }
            mean[n] = env.mu_q.clone();
            mean[2 * n2 - 1] = env.mu_p.clone();
            b.mean = mean;
            b.phase_slope = slope;
        }
        self.cov = cov;
        self.modes.push(label.to_string());
        let row = match logical {
            IdealLogical::Z0 => "+Z",
            IdealLogical::Z1 => "-Z",
            IdealLogical::XPlus => "+X",
            IdealLogical::XMinus => "-X",
        };
        self.ideal = self.ideal.tensor(&StabilizerTableau::single(row)?);
        self.ideal_modes.push(label.to_string());
        Ok(())
    }

    /// Applies a linear symplectic map to the Gaussian layer of every branch.
    pub fn apply_linear(&mut self, map: &AffineMap<T>) -> Result<()> {
        let dim = 2 * self.n_modes();
        if map.linear.rows != dim || map.linear.cols != dim {
            return Err(Error::DimensionMismatch(format!("map of size {} on {dim} variables", map.linear.rows)));
        }
        let moments = GaussianMoments { mean: vec![T::zero(); dim], cov: self.cov.clone() };
        let zero_shift = AffineMap { linear: map.linear.clone(), shift: vec![T::zero(); dim] };
        self.cov = apply_affine(&moments, &zero_shift)?.cov;
        // ω' = S^{−T} ω; for symplectic S, S^{−T} = Ω S Ωᵀ.
        let sf = map.linear.to_f64();
        let n = self.n_modes();
        let inv_t = symplectic_inverse_transpose(&sf, n);
        for b in &mut self.branches {
            b.mean = map.linear.matvec(&b.mean);
            b.phase_slope = inv_t.matvec(&b.phase_slope);
        }
        let shift_is_zero = map.shift.iter().all(|s| s.is_zero());
        if !shift_is_zero {
            let d = map.shift.clone();
            self.displace_vector(&d, BranchFilter::All);
        }
        Ok(())
    }

    pub fn apply_cz(&mut self, i: usize, j: usize) -> Result<()> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i == j {
            return contract("CZ needs two distinct modes");
        }
        self.apply_linear(&AffineMap::cz(self.n_modes(), i, j))?;
        let (a, b) = (self.ideal_index(&self.modes[i].clone())?, self.ideal_index(&self.modes[j].clone())?);
        self.ideal.cz(a, b);
        Ok(())
    }

    pub fn apply_cx(&mut self, control: usize, target: usize) -> Result<()> {
        self.check_mode(control)?;
        self.check_mode(target)?;
        if control == target {
            return contract("CX needs two distinct modes");
        }
        self.apply_linear(&AffineMap::cx(self.n_modes(), control, target))?;
        let (a, b) = (self.ideal_index(&self.modes[control].clone())?, self.ideal_index(&self.modes[target].clone())?);
        self.ideal.cnot(a, b);
        Ok(())
    }

    /// Fourier gate; acts as a logical Hadamard on the ideal layer.
    pub fn apply_fourier(&mut self, i: usize) -> Result<()> {
        self.check_mode(i)?;
        self.apply_linear(&AffineMap::fourier(self.n_modes(), i))?;
        let a = self.ideal_index(&self.modes[i].clone())?;
        self.ideal.h(a);
        Ok(())
    }

    /// Beamsplitter on the displacement layer only.
    pub fn apply_beamsplitter(&mut self, i: usize, j: usize, transmissivity: f64) -> Result<()> {
        self.check_mode(i)?;
        self.check_mode(j)?;
        if i == j {
            return contract("beamsplitter needs two distinct modes");
        }
        if !(transmissivity > 0.0 && transmissivity < 1.0) {
            return contract(format!("transmissivity {transmissivity} outside (0, 1)"));
        }
        let map = if transmissivity == 0.5 {
            AffineMap::beamsplitter_balanced(self.n_modes(), i, j)
        } else {
            AffineMap::beamsplitter(self.n_modes(), i, j, transmissivity)
        };
        self.apply_linear(&map)
    }

    /// Squeezer on the displacement layer only.
    pub fn apply_squeezer(&mut self, i: usize, r: f64) -> Result<()> {
        self.check_mode(i)?;
        self.apply_linear(&AffineMap::squeezer(self.n_modes(), i, r))
    }

    /// Displaces mode `mode` by `(du, dv)` in units of √π.
    pub fn apply_displacement(&mut self, mode: usize, du: T, dv: T, filter: BranchFilter) -> Result<()> {
        self.check_mode(mode)?;
        if let BranchFilter::Index(b) = filter {
            if b >= self.branches.len() {
                return contract(format!("branch index {b} out of range"));
            }
        }
        let n = self.n_modes();
        let mut d = vec![T::zero(); 2 * n];
        d[mode] = du;
        d[n + mode] = dv;
        self.displace_vector(&d, filter);
        Ok(())
    }

    /// `D(d)` on the selected branches, `d` in units of √π.
    fn displace_vector(&mut self, d: &[T], filter: BranchFilter) {
        let n = self.n_modes();
        let dabs: Vec<f64> = d.iter().map(|x| x.to_f64() * SQRT_PI).collect();
        for (bi, b) in self.branches.iter_mut().enumerate() {
            if let BranchFilter::Index(k) = filter {
                if k != bi {
                    continue;
                }
            }
            displace_branch(b, d, &dabs, n);
        }
    }

    /// Drops branches below the pruning threshold and renormalizes.
    pub fn normalize_and_prune(&mut self) -> Result<()> {
        let total = self.norm2();
        if !(total > 0.0) || !total.is_finite() {
            return Err(Error::InternalConsistency(format!("branch norm {total} cannot be normalized")));
        }
        let scale = 1.0 / total.sqrt();
        for b in &mut self.branches {
            b.amplitude *= scale;
        }
        let thr = self.prune_threshold;
        if thr > 0.0 {
            let dropped: f64 = self.branches.iter().filter(|b| b.amplitude.norm_sqr() < thr).map(|b| b.amplitude.norm_sqr()).sum();
            if dropped > 0.0 {
                self.branches.retain(|b| b.amplitude.norm_sqr() >= thr);
                self.dropped_weight += dropped;
                let s = 1.0 / self.norm2().sqrt();
                for b in &mut self.branches {
                    b.amplitude *= s;
                }
            }
        }
        Ok(())
    }

    /// Homodyne on the Gaussian layer only.
    ///
    /// `outcome` and `spacing` are in units of √π. Every branch splits into
    /// the nearest comb tooth `z` and its neighbour on the side of the
    /// centered outcome. The ideal layer is left untouched; the caller is
    /// responsible for the matching stabilizer update.
    pub fn homodyne_gaussian(
        &mut self,
        mode: usize,
        quad: Quadrature,
        outcome: f64,
        spacing: T,
        feedback: &Feedback,
    ) -> Result<MeasurementRecord> {
        self.check_mode(mode)?;
        if !outcome.is_finite() {
            return contract("homodyne outcome must be finite");
        }
        let n = self.n_modes();
        let ord = self.order();
        let (k, j) = match quad {
            Quadrature::Q => (ord.q(mode), ord.p(mode)),
            Quadrature::P => (ord.p(mode), ord.q(mode)),
        };
        let s_units = spacing.to_f64();
        if !(s_units > 0.0) {
            return contract("comb spacing must be positive");
        }
        let sigma2 = self.sigma2;
        let beta = regression(&self.cov, k)?;
        let vkk = self.cov[(k, k)].to_f64();
        let cvar = conditional_variance(&self.cov, j)?;
        let ratio = precision_ratio(&self.cov, j)?;

        let z = (outcome / s_units + 0.5).floor() as i64;
        let y_t = T::from_f64(outcome);
        let pc_t = y_t.clone() - T::from_i64(z) * spacing.clone();
        let pc = pc_t.to_f64();
        let partner = if pc >= 0.0 { 1 } else { -1 };

        // feedback displacement over all 2n variables (entries k, j are dropped later)
        let fb: Vec<T> = match feedback {
            Feedback::None => vec![T::zero(); 2 * n],
            Feedback::Full => beta.iter().map(|b| -(b.clone() * pc_t.clone())).collect(),
            Feedback::Gain { variable, gain } => {
                if *variable >= 2 * n {
                    return contract("feedback variable out of range");
                }
                let mut v: Vec<T> = beta.iter().map(|b| -(b.clone() * pc_t.clone())).collect();
                v[*variable] = T::from_f64(*gain) * pc_t.clone();
                v
            }
        };

        let keep: Vec<usize> = (0..2 * n).filter(|&i| i != k && i != j).collect();
        let s_abs = s_units * SQRT_PI;
        let y_abs = outcome * SQRT_PI;
        let q_var = vkk * sigma2 / 2.0;
        let mut parent_means = Vec::with_capacity(self.branches.len());
        let mut out = Vec::with_capacity(2 * self.branches.len());
        let mut partner_weight = 0.0;
        let mut total_weight = 0.0;
        for b in &self.branches {
            let mu_k = b.mean[k].clone();
            parent_means.push((b.tags.clone(), mu_k.to_f64()));
            let mu_abs: Vec<f64> = b.mean.iter().map(|m| m.to_f64() * SQRT_PI).collect();
            for (tooth, is_partner) in [(z, false), (z + partner, true)] {
                let ns_t = T::from_i64(tooth) * spacing.clone();
                let ns_abs = tooth as f64 * s_abs;
                // comb weight c_n = P_N[n] · P_Q(y − n s − μ_k)
                let resid = y_abs - ns_abs - mu_abs[k];
                let c_n = (-(ns_abs * ns_abs) * cvar * sigma2).exp() * (-(resid * resid) / (2.0 * q_var)).exp()
                    / (2.0 * PI * q_var).sqrt();
                if is_partner {
                    partner_weight += b.amplitude.norm_sqr() * c_n;
                }
                total_weight += b.amplitude.norm_sqr() * c_n;

                // phase bookkeeping for integrating out the conjugate variable
                let kk = 0.5 * (y_abs + ns_abs);
                let wj = b.phase_slope[j] + kk;
                let mut slope = b.phase_slope.clone();
                let mut phase = -wj * mu_abs[j];
                for r in 0..2 * n {
                    if r != j {
                        slope[r] -= wj * ratio[r];
                        phase -= wj * ratio[r] * mu_abs[r];
                    }
                }
                phase -= slope[k] * (y_abs - ns_abs);

                let shift = y_t.clone() - ns_t - mu_k.clone();
                let mean: Vec<T> = b.mean.iter().zip(&beta).map(|(m, be)| m.clone() + be.clone() * shift.clone()).collect();
                let mut nb = Branch {
                    amplitude: b.amplitude * c_n.sqrt() * Complex64::from_polar(1.0, phase),
                    mean,
                    phase_slope: slope,
                    tags: {
                        let mut t = b.tags.clone();
                        t.push(tooth);
                        t
                    },
                };
                nb.mean[k] = T::zero();
                nb.mean[j] = T::zero();
                nb.phase_slope[k] = 0.0;
                nb.phase_slope[j] = 0.0;
                let fb_abs: Vec<f64> = fb.iter().map(|x| x.to_f64() * SQRT_PI).collect();
                displace_branch(&mut nb, &fb, &fb_abs, n);
                nb.mean = keep.iter().map(|&i| nb.mean[i].clone()).collect();
                nb.phase_slope = keep.iter().map(|&i| nb.phase_slope[i]).collect();
                out.push(nb);
            }
        }
        if !(total_weight > 0.0) {
            return Err(Error::ImpossibleOutcome(format!(
                "outcome {outcome}√π has vanishing density on every branch"
            )));
        }
        let cov = schur_update(&self.cov, k)?.select(&keep, &keep);
        self.cov = cov;
        self.branches = out;
        let label = self.modes.remove(mode);
        self.normalize_and_prune()?;
        Ok(MeasurementRecord {
            mode: label,
            quadrature: quad,
            outcome,
            spacing: s_units,
            cell: z,
            centered: pc,
            partner,
            variance: vkk,
            conjugate_precision: cvar,
            parent_means,
            branch_error: partner_weight / total_weight,
            accepted: true,
        })
    }

    /// Pauli measurement of a vertex on the ideal layer, removing it there.
    pub fn ideal_measure(&mut self, label: &str, basis: Pauli1, outcome: bool) -> Result<()> {
        let q = self.ideal_index(label)?;
        self.ideal.measure_and_discard(q, basis, outcome)?;
        self.ideal_modes.remove(q);
        Ok(())
    }

    /// Bell projection of two vertices on the ideal layer, removing both.
    pub fn ideal_bell(&mut self, control: &str, target: &str, outcome: BellOutcome) -> Result<GraphForm> {
        let c = self.ideal_index(control)?;
        let t = self.ideal_index(target)?;
        let proj = crate::ideal::project_bell_ideal(&self.ideal, c, t, outcome)?;
        self.ideal = proj.tableau;
        self.ideal_modes.retain(|m| m != control && m != target);
        Ok(proj.form)
    }

    /// Measures a stabilizer-valued Pauli on the ideal layer without removal.
    pub fn ideal_stabilizer_sign(&self, p: &PauliRow) -> Option<bool> {
        self.ideal.stabilizer_sign(p)
    }

    /// Symbolic coefficient view: entry `[b][i]` is branch `b`'s mean `i` in units of √π.
    pub fn means_f64(&self) -> Vec<Vec<f64>> {
        self.branches.iter().map(|b| b.mean.iter().map(|m| m.to_f64()).collect()).collect()
    }

    pub fn to_f64(&self) -> GkpGraphState<f64> {
        GkpGraphState {
            sigma2: self.sigma2,
            modes: self.modes.clone(),
            cov: self.cov.to_f64(),
            branches: self
                .branches
                .iter()
                .map(|b| Branch {
                    amplitude: b.amplitude,
                    mean: b.mean.iter().map(|m| m.to_f64()).collect(),
                    phase_slope: b.phase_slope.clone(),
                    tags: b.tags.clone(),
                })
                .collect(),
            ideal_modes: self.ideal_modes.clone(),
            ideal: self.ideal.clone(),
            prune_threshold: self.prune_threshold,
            dropped_weight: self.dropped_weight,
        }
    }
}

/// Single-branch state for a graph built from fresh `|+̃⟩` vertices and CZ gates.
pub fn build_graph_state<T: Scalar>(
    envs: &[VertexEnvelope<T>],
    topology: &GraphTopology,
    sigma2: f64,
) -> Result<GkpGraphState<T>> {
    if envs.len() != topology.n {
        return Err(Error::DimensionMismatch(format!("{} envelopes for {} vertices", envs.len(), topology.n)));
    }
    if !topology.is_valid() {
        return contract("adjacency must be symmetric with zero diagonal");
    }
    if !(sigma2 > 0.0) {
        return contract("σ² must be positive");
    }
    let n = topology.n;
    let mut cov = Mat::zeros(2 * n, 2 * n);
    let mut mean = vec![T::zero(); 2 * n];
    for (i, e) in envs.iter().enumerate() {
        if e.l.to_f64() <= 0.0 || e.m.to_f64() <= 0.0 {
            return contract(format!("vertex {i}: envelope variances must be positive"));
        }
        cov[(i, i)] = e.l.clone();
        mean[i] = e.mu_q.clone();
        let mut mp = e.m.clone();
        let mut mup = e.mu_p.clone();
        for (jj, f) in envs.iter().enumerate() {
            if topology.has_edge(i, jj) {
                mp = mp + f.l.clone();
                mup = mup - f.mu_q.clone();
                cov[(n + i, jj)] = -f.l.clone();
                cov[(jj, n + i)] = -f.l.clone();
            }
        }
        cov[(n + i, n + i)] = mp;
        mean[n + i] = mup;
    }
    // off-diagonal P entries: Σ_k A_ik A_jk l_k
    for i in 0..n {
        for jj in 0..n {
            if i == jj {
                continue;
            }
            let mut acc = T::zero();
            for (kk, e) in envs.iter().enumerate() {
                if topology.has_edge(i, kk) && topology.has_edge(jj, kk) {
                    acc = acc + e.l.clone();
                }
            }
            cov[(n + i, n + jj)] = acc;
        }
    }
    let labels: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    Ok(GkpGraphState {
        sigma2,
        modes: labels.clone(),
        cov,
        branches: vec![Branch { amplitude: Complex64::new(1.0, 0.0), mean, phase_slope: vec![0.0; 2 * n], tags: vec![] }],
        ideal_modes: labels,
        ideal: ideal_graph_from_edges(topology),
        prune_threshold: DEFAULT_PRUNE,
        dropped_weight: 0.0,
    })
}

/// `D(d)` on one branch: `d` in √π units and in absolute units.
fn displace_branch<T: Scalar>(b: &mut Branch<T>, d: &[T], dabs: &[f64], n: usize) {
    let phase: f64 = b.phase_slope.iter().zip(dabs).map(|(w, x)| w * x).sum();
    if phase != 0.0 {
        b.amplitude *= Complex64::from_polar(1.0, phase);
    }
    for i in 0..n {
        b.phase_slope[i] -= dabs[n + i] / 2.0;
        b.phase_slope[n + i] += dabs[i] / 2.0;
    }
    for (m, x) in b.mean.iter_mut().zip(d) {
        if !x.is_zero() {
            *m = m.clone() + x.clone();
        }
    }
}

/// `S^{−T} = Ω S Ωᵀ` for symplectic `S`.
fn symplectic_inverse_transpose(s: &Mat<f64>, n: usize) -> Mat<f64> {
    let w = crate::gaussian::symplectic_form::<f64>(n);
    w.matmul(s).matmul(&w.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::QSqrt2;

    fn q(a: i64) -> QSqrt2 {
        QSqrt2::from_ratio(a, 1)
    }

    #[test]
    fn single_edge_covariance() {
        let g = GraphTopology::from_edges(2, &[(0, 1)]).unwrap();
        let st = build_graph_state(&[VertexEnvelope::<QSqrt2>::unit(), VertexEnvelope::unit()], &g, 0.1).unwrap();
        let want = [[1, 0, 0, -1], [0, 1, -1, 0], [0, -1, 2, 0], [-1, 0, 0, 2]];
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(st.cov[(i, j)], q(want[i][j]));
            }
        }
    }

    #[test]
    fn means_follow_edges() {
        let g = GraphTopology::from_edges(2, &[(0, 1)]).unwrap();
        let mut e0 = VertexEnvelope::<QSqrt2>::unit();
        e0.mu_q = q(1);
        let st = build_graph_state(&[e0, VertexEnvelope::unit()], &g, 0.1).unwrap();
        assert_eq!(st.branches[0].mean, vec![q(1), q(0), q(0), q(-1)]);
    }

    #[test]
    fn fresh_cz_matches_builder() {
        let mut s = GkpGraphState::<QSqrt2>::empty(0.1);
        s.add_qubit("v0", IdealLogical::XPlus, VertexEnvelope::unit()).unwrap();
        s.add_qubit("v1", IdealLogical::XPlus, VertexEnvelope::unit()).unwrap();
        s.apply_cz(0, 1).unwrap();
        let g = GraphTopology::from_edges(2, &[(0, 1)]).unwrap();
        let b = build_graph_state(&[VertexEnvelope::<QSqrt2>::unit(), VertexEnvelope::unit()], &g, 0.1).unwrap();
        assert_eq!(s.cov, b.cov);
        assert_eq!(s.ideal, b.ideal);
        assert_eq!(s.topology().unwrap(), g);
    }

    #[test]
    fn homodyne_doubles_branches_and_drops_mode() {
        let mut s = GkpGraphState::<f64>::empty(0.1);
        s.prune_threshold = 0.0;
        s.add_qubit("a", IdealLogical::XPlus, VertexEnvelope::unit()).unwrap();
        s.add_qubit("b", IdealLogical::XPlus, VertexEnvelope::unit()).unwrap();
        s.apply_cz(0, 1).unwrap();
        let rec = s.homodyne_gaussian(0, Quadrature::Q, 0.2, 1.0, &Feedback::Full).unwrap();
        assert_eq!(s.branches.len(), 2);
        assert_eq!(s.modes, vec!["b".to_string()]);
        assert_eq!(rec.cell, 0);
        assert_eq!(rec.partner, 1);
        assert!((s.norm2() - 1.0).abs() < 1e-12);
    }
}
