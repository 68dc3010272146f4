//! Steane error correction, fusions, and outcome statistics.

use crate::error::{contract, Error, Result};
use crate::gaussian::AffineMap;
use crate::gkp::{IdealLogical, MixtureSpec, Quadrature, SQRT_PI};
use crate::graph::{Feedback, GkpGraphState, MeasurementRecord, VertexEnvelope};
use crate::ideal::{BellOutcome, Pauli1, StabilizerTableau};
use crate::scalar::Scalar;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Absolute integration tolerance for outcome-window integrals.
pub const QUAD_TOL: f64 = 1e-12;

/// `y = z·√π + p_c` with `p_c ∈ [−√π/2, √π/2)`.
pub fn centered_mod_root_pi(y: f64) -> (f64, i64) {
    centered_mod(y, SQRT_PI)
}

/// `y = z·s + p_c` with `p_c ∈ [−s/2, s/2)`.
pub fn centered_mod(y: f64, s: f64) -> (f64, i64) {
    let z = (y / s + 0.5).floor();
    (y - z * s, z as i64)
}

/// Envelope parameters of a single-qubit Steane round (variances in units of σ²).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteaneParams {
    pub l_a: f64,
    pub l_b: f64,
    pub m_a: f64,
    pub m_b: f64,
    pub sigma2: f64,
}

impl SteaneParams {
    pub fn new(l_a: f64, l_b: f64, m_a: f64, m_b: f64, sigma2: f64) -> Result<Self> {
        if [l_a, l_b, m_a, m_b, sigma2].iter().any(|v| !(*v > 0.0)) {
            return contract("Steane parameters must be positive");
        }
        Ok(SteaneParams { l_a, l_b, m_a, m_b, sigma2 })
    }

    /// `ln P_N[n]` up to normalization.
    fn log_pn(&self, n: i64) -> f64 {
        let nn = n as f64;
        -PI * nn * nn * self.sigma2 * self.l_a * self.l_b / (self.l_a + self.l_b)
    }

    fn pn_norm(&self) -> f64 {
        let var = (self.l_a + self.l_b) / (self.l_a * self.l_b) / (2.0 * PI * self.sigma2);
        let nmax = (var.sqrt() * 40.0).ceil() as i64 + 2;
        (-nmax..=nmax).map(|n| self.log_pn(n).exp()).sum()
    }

    /// Normalized `P_N[n]`.
    pub fn p_n(&self, n: i64) -> f64 {
        self.log_pn(n).exp() / self.pn_norm()
    }

    pub fn q_variance(&self) -> f64 {
        (self.m_a + self.m_b) * self.sigma2 / 2.0
    }

    /// `P_Q(x)`.
    pub fn p_q(&self, x: f64) -> f64 {
        let v = self.q_variance();
        (-x * x / (2.0 * v)).exp() / (2.0 * PI * v).sqrt()
    }

    /// True when `√(m_A+m_B)·σ` is not small against `√π/2`.
    pub fn regime_warning(&self) -> bool {
        ((self.m_a + self.m_b) * self.sigma2).sqrt() > SQRT_PI / 4.0
    }
}

/// Outcome density `P_Y(y) = Σ_n P_N[n] P_Q(y − n√π)`.
pub fn steane_outcome_pdf(p: &SteaneParams, y: f64) -> f64 {
    let norm = p.pn_norm();
    let sd = p.q_variance().sqrt();
    let lo = ((y - 40.0 * sd) / SQRT_PI).floor() as i64 - 1;
    let hi = ((y + 40.0 * sd) / SQRT_PI).ceil() as i64 + 1;
    (lo..=hi).map(|n| p.log_pn(n).exp() * p.p_q(y - n as f64 * SQRT_PI)).sum::<f64>() / norm
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchWeights {
    pub n: i64,
    pub c_n: f64,
    pub c_n1: f64,
}

/// The two comb weights bracketing `|y|`.
pub fn steane_branch_weights(p: &SteaneParams, y: f64) -> BranchWeights {
    let a = y.abs();
    let n = (a / SQRT_PI).floor() as i64;
    BranchWeights {
        n,
        c_n: p.p_n(n) * p.p_q(a - n as f64 * SQRT_PI),
        c_n1: p.p_n(n + 1) * p.p_q((n + 1) as f64 * SQRT_PI - a),
    }
}

/// `P_b(y)`: weight of the branch not selected by the nearest-tooth decision.
pub fn branch_error_probability(w: &BranchWeights, y: f64) -> Result<f64> {
    let tot = w.c_n + w.c_n1;
    if !(tot > 0.0) || w.c_n < 0.0 || w.c_n1 < 0.0 {
        return contract("branch weights must be nonnegative with positive sum");
    }
    let frac = y.abs() - w.n as f64 * SQRT_PI;
    Ok(if frac < SQRT_PI / 2.0 { w.c_n1 / tot } else { w.c_n / tot })
}

fn check_nu(nu: f64) -> Result<()> {
    if !(0.0..SQRT_PI / 2.0).contains(&nu) {
        return contract(format!("post-selection half-window {nu} outside [0, √π/2)"));
    }
    Ok(())
}

fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    quadrature::integrate(f, a, b, QUAD_TOL).integral
}

/// Accepted intervals on `y ≥ 0` (the density is symmetric).
fn accepted_half_windows(nu: f64) -> [(f64, f64); 2] {
    [(0.0, SQRT_PI / 2.0 - nu), (SQRT_PI / 2.0 + nu, SQRT_PI)]
}

/// `P_succ(ν) = ∫_{I₀(ν) ∪ I₁(ν)} P_Y`.
pub fn postselect_success_probability(p: &SteaneParams, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    let mut s = 0.0;
    for (a, b) in accepted_half_windows(nu) {
        s += 2.0 * integrate(|y| steane_outcome_pdf(p, y), a, b);
    }
    Ok(s.clamp(0.0, 1.0))
}

/// `∫ P_Y P_b` over the accepted windows, normalized by `P_succ(ν)`.
pub fn average_error_probability(p: &SteaneParams, nu: f64) -> Result<f64> {
    check_nu(nu)?;
    let succ = postselect_success_probability(p, nu)?;
    let mut s = 0.0;
    for (a, b) in accepted_half_windows(nu) {
        s += 2.0
            * integrate(
                |y| {
                    let w = steane_branch_weights(p, y);
                    steane_outcome_pdf(p, y) * branch_error_probability(&w, y).unwrap_or(0.0)
                },
                a,
                b,
            );
    }
    if !(succ > 0.0) {
        return Err(Error::PostSelectionExhausted { attempts: 0 });
    }
    Ok((s / succ).clamp(0.0, 1.0))
}

/// Where homodyne outcomes come from.
pub enum OutcomeSource<'a, R: Rng> {
    /// Outcomes in units of √π, consumed in order.
    Forced { values: &'a [f64], next: usize },
    Sampled(&'a mut R),
    /// `+s/4` for a comb spacing `s`: inside the zero cell, partner tooth +1.
    InCell,
}

impl<'a, R: Rng> OutcomeSource<'a, R> {
    pub fn sampled(rng: &'a mut R) -> Self {
        OutcomeSource::Sampled(rng)
    }

    fn draw<T: Scalar>(&mut self, state: &GkpGraphState<T>, mode: usize, quad: Quadrature, spacing: f64) -> Result<f64> {
        match self {
            OutcomeSource::Forced { values, next } => {
                let v = *values
                    .get(*next)
                    .ok_or_else(|| Error::Contract(format!("forced outcome #{} missing", *next)))?;
                *next += 1;
                Ok(v)
            }
            OutcomeSource::Sampled(rng) => sample_outcome(state, mode, quad, spacing, *rng),
            OutcomeSource::InCell => Ok(0.25 * spacing),
        }
    }
}

/// Forced outcomes only.
pub type Forced<'a> = OutcomeSource<'a, rand_chacha::ChaCha8Rng>;

/// A source replaying `values` (units of √π) in order.
pub fn forced(values: &[f64]) -> Forced<'_> {
    OutcomeSource::Forced { values, next: 0 }
}

/// Draws a homodyne outcome (units of √π) from the branch-mixture statistics.
pub fn sample_outcome<T: Scalar, R: Rng>(
    state: &GkpGraphState<T>,
    mode: usize,
    quad: Quadrature,
    spacing: f64,
    rng: &mut R,
) -> Result<f64> {
    let ord = state.order();
    let (k, j) = match quad {
        Quadrature::Q => (ord.q(mode), ord.p(mode)),
        Quadrature::P => (ord.p(mode), ord.q(mode)),
    };
    let c = crate::gaussian::conditional_variance(&state.cov, j)?;
    let vkk = state.cov[(k, k)].to_f64();
    let s_abs = spacing * SQRT_PI;
    let mix = MixtureSpec::new(s_abs, 0.0, 1.0 / (2.0 * c * state.sigma2), vkk * state.sigma2 / 2.0)?;
    let u: f64 = rng.random::<f64>() * state.norm2();
    let mut acc = 0.0;
    let mut pick = state.branches.len() - 1;
    for (i, b) in state.branches.iter().enumerate() {
        acc += b.amplitude.norm_sqr();
        if u < acc {
            pick = i;
            break;
        }
    }
    let mu = state.branches[pick].mean[k].to_f64() * SQRT_PI;
    Ok((mix.sample(rng) + mu) / SQRT_PI)
}

/// Whether `y` (units of √π) falls in the excluded band around a half-cell boundary.
pub fn postselect_rejects(y: f64, spacing: f64, nu: f64) -> bool {
    if nu <= 0.0 {
        return false;
    }
    let (pc, _) = centered_mod(y * SQRT_PI, spacing * SQRT_PI);
    pc.abs() > spacing * SQRT_PI / 2.0 - nu
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteaneConfig {
    pub target: String,
    pub quadrature: Quadrature,
    pub l_a: f64,
    pub m_a: f64,
    /// Overrides the default gain `m_B/(m_A+m_B)` (or `l_B/(l_A+l_B)` for q).
    pub gain: Option<f64>,
    pub nu: f64,
}

impl SteaneConfig {
    pub fn p(target: &str) -> Self {
        SteaneConfig { target: target.into(), quadrature: Quadrature::P, l_a: 1.0, m_a: 1.0, gain: None, nu: 0.0 }
    }
}

/// Result of a protocol step that may be rejected by post-selection.
#[derive(Clone, Debug)]
pub struct StepOutcome<T> {
    pub state: GkpGraphState<T>,
    pub records: Vec<MeasurementRecord>,
    pub accepted: bool,
}

fn ancilla_label<T: Scalar>(state: &GkpGraphState<T>, base: &str) -> String {
    let mut k = 0;
    loop {
        let l = format!("{base}#{k}");
        if !state.modes.contains(&l) && !state.ideal_modes.contains(&l) {
            return l;
        }
        k += 1;
    }
}

/// Steane error correction of one vertex of a graph state.
///
/// p-variant: ancilla `|0̃⟩`, `C_X(ancilla → target)`, p-homodyne of the
/// ancilla, feedback `Z(g·p_c)` on the target plus the regression response
/// on its neighbours. The q-variant is the quadrature-swapped mirror.
pub fn steane_correct_vertex<T: Scalar, R: Rng>(
    state: &GkpGraphState<T>,
    cfg: &SteaneConfig,
    source: &mut OutcomeSource<'_, R>,
) -> Result<StepOutcome<T>> {
    check_nu(cfg.nu)?;
    if !(cfg.l_a > 0.0 && cfg.m_a > 0.0) {
        return contract("ancilla variances must be positive");
    }
    let mut s = state.clone();
    let target = s.index_of(&cfg.target)?;
    let anc = ancilla_label(&s, &format!("steane:{}", cfg.target));
    let env = VertexEnvelope { l: T::from_f64(cfg.l_a), m: T::from_f64(cfg.m_a), mu_q: T::zero(), mu_p: T::zero() };
    let logical = match cfg.quadrature {
        Quadrature::P => IdealLogical::Z0,
        Quadrature::Q => IdealLogical::XPlus,
    };
    s.add_qubit(&anc, logical, env)?;
    let a = s.n_modes() - 1;
    match cfg.quadrature {
        Quadrature::P => s.apply_cx(a, target)?,
        Quadrature::Q => s.apply_cx(target, a)?,
    }
    let y = source.draw(&s, a, cfg.quadrature, 1.0)?;
    if postselect_rejects(y, 1.0, cfg.nu) {
        let (pc, z) = centered_mod(y, 1.0);
        return Ok(StepOutcome { state: state.clone(), records: vec![rejected_record(&anc, cfg.quadrature, y, 1.0, z, pc)], accepted: false });
    }
    let n = s.n_modes();
    let feedback = match (cfg.gain, cfg.quadrature) {
        (None, _) => Feedback::Full,
        (Some(g), Quadrature::P) => Feedback::Gain { variable: n + target, gain: g },
        (Some(g), Quadrature::Q) => Feedback::Gain { variable: target, gain: -g },
    };
    let rec = s.homodyne_gaussian(a, cfg.quadrature, y, T::one(), &feedback)?;
    let basis = match cfg.quadrature {
        Quadrature::P => Pauli1::X,
        Quadrature::Q => Pauli1::Z,
    };
    s.ideal_measure(&anc, basis, rec.cell.rem_euclid(2) == 1)?;
    Ok(StepOutcome { state: s, records: vec![rec], accepted: true })
}

fn rejected_record(mode: &str, quad: Quadrature, y: f64, spacing: f64, z: i64, pc: f64) -> MeasurementRecord {
    MeasurementRecord {
        mode: mode.into(),
        quadrature: quad,
        outcome: y,
        spacing,
        cell: z,
        centered: pc,
        partner: if pc >= 0.0 { 1 } else { -1 },
        variance: f64::NAN,
        conjugate_precision: f64::NAN,
        parent_means: vec![],
        branch_error: f64::NAN,
        accepted: false,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FusionVariant {
    A,
    B,
    C,
}

impl FusionVariant {
    pub fn all() -> [FusionVariant; 3] {
        [FusionVariant::A, FusionVariant::B, FusionVariant::C]
    }
}

impl std::str::FromStr for FusionVariant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(FusionVariant::A),
            "B" => Ok(FusionVariant::B),
            "C" => Ok(FusionVariant::C),
            _ => Err(Error::Parse(format!("unknown fusion variant {s:?}"))),
        }
    }
}

/// Comb spacing assumed for the beamsplitter outputs of fusion C.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DualHomodyneComb {
    /// Teeth at multiples of √(π/2), the actual comb of a 50:50 output.
    #[default]
    Physical,
    /// Teeth at multiples of √π.
    Unit,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    pub variant: FusionVariant,
    pub control: String,
    pub target: String,
    /// Post-selection half-windows for the control and target homodynes.
    #[serde(default)]
    pub nu: [f64; 2],
    #[serde(default)]
    pub comb: DualHomodyneComb,
}

impl FusionConfig {
    pub fn new(variant: FusionVariant, control: &str, target: &str) -> Self {
        FusionConfig { variant, control: control.into(), target: target.into(), nu: [0.0, 0.0], comb: DualHomodyneComb::Physical }
    }
}

/// Circuit layout of one fusion variant: measured quadratures and comb spacings.
struct FusionLayout<T> {
    quads: [Quadrature; 2],
    spacing: T,
}

fn fusion_layout<T: Scalar>(cfg: &FusionConfig) -> FusionLayout<T> {
    match cfg.variant {
        FusionVariant::A => FusionLayout { quads: [Quadrature::P, Quadrature::Q], spacing: T::one() },
        FusionVariant::B => FusionLayout { quads: [Quadrature::Q, Quadrature::P], spacing: T::one() },
        FusionVariant::C => FusionLayout {
            quads: [Quadrature::P, Quadrature::Q],
            spacing: match cfg.comb {
                DualHomodyneComb::Physical => T::frac_1_sqrt2(),
                DualHomodyneComb::Unit => T::one(),
            },
        },
    }
}

/// Applies the variant's two-mode circuit to the displacement layer.
fn fusion_circuit<T: Scalar>(s: &mut GkpGraphState<T>, variant: FusionVariant, c: usize, t: usize) -> Result<()> {
    let n = s.n_modes();
    let f = AffineMap::<T>::fourier(n, c);
    let second = match variant {
        FusionVariant::A => AffineMap::cx(n, c, t),
        FusionVariant::B => AffineMap::cx(n, t, c),
        FusionVariant::C => AffineMap::beamsplitter_balanced(n, c, t),
    };
    s.apply_linear(&second.after(&f))
}

/// Bell outcome implied by the two cell indices.
fn bell_from_cells(variant: FusionVariant, z_c: i64, z_t: i64) -> BellOutcome {
    let (pc, pt) = (z_c.rem_euclid(2) as u8, z_t.rem_euclid(2) as u8);
    match variant {
        FusionVariant::A | FusionVariant::C => BellOutcome { i: pt, j: pc },
        FusionVariant::B => BellOutcome { i: pc, j: pt },
    }
}

/// Qubit-level rendering of fusions A and B, used to cross-check the Bell projection.
fn qubit_circuit_check(
    tab: &StabilizerTableau,
    variant: FusionVariant,
    c: usize,
    t: usize,
    z: [i64; 2],
) -> Result<StabilizerTableau> {
    let mut tab = tab.clone();
    tab.h(c);
    let (bc, bt) = match variant {
        FusionVariant::A => {
            tab.cnot(c, t);
            (Pauli1::X, Pauli1::Z)
        }
        FusionVariant::B => {
            tab.cnot(t, c);
            (Pauli1::Z, Pauli1::X)
        }
        FusionVariant::C => unreachable!("fusion C has no qubit-gate rendering"),
    };
    let mut p = crate::ideal::PauliRow::identity(tab.n);
    match bc {
        Pauli1::X => p.x[c] = true,
        Pauli1::Z => p.z[c] = true,
    }
    let r1 = tab.measure(&p, z[0].rem_euclid(2) == 1)?;
    let mut p2 = crate::ideal::PauliRow::identity(tab.n);
    match bt {
        Pauli1::X => p2.x[t] = true,
        Pauli1::Z => p2.z[t] = true,
    }
    let r2 = tab.measure_keeping(&p2, z[1].rem_euclid(2) == 1, &[r1])?;
    tab.discard(&[r1, r2], &[c, t])?;
    Ok(tab)
}

/// Fuses vertices `control` and `target` with the configured variant.
pub fn fuse<T: Scalar, R: Rng>(
    state: &GkpGraphState<T>,
    cfg: &FusionConfig,
    source: &mut OutcomeSource<'_, R>,
) -> Result<StepOutcome<T>> {
    for nu in cfg.nu {
        check_nu(nu)?;
    }
    if cfg.control == cfg.target {
        return contract("fusion needs two distinct vertices");
    }
    let mut s = state.clone();
    let c = s.index_of(&cfg.control)?;
    let t = s.index_of(&cfg.target)?;
    fusion_circuit(&mut s, cfg.variant, c, t)?;
    let layout = fusion_layout::<T>(cfg);
    let sp = layout.spacing.to_f64();
    let mut records = Vec::new();

    let y_c = source.draw(&s, c, layout.quads[0], sp)?;
    if postselect_rejects(y_c, sp, cfg.nu[0]) {
        let (pc, z) = centered_mod(y_c, sp);
        return Ok(StepOutcome { state: state.clone(), records: vec![rejected_record(&cfg.control, layout.quads[0], y_c, sp, z, pc)], accepted: false });
    }
    records.push(s.homodyne_gaussian(c, layout.quads[0], y_c, layout.spacing.clone(), &Feedback::Full)?);

    let t2 = s.index_of(&cfg.target)?;
    let y_t = source.draw(&s, t2, layout.quads[1], sp)?;
    if postselect_rejects(y_t, sp, cfg.nu[1]) {
        let (pc, z) = centered_mod(y_t, sp);
        records.push(rejected_record(&cfg.target, layout.quads[1], y_t, sp, z, pc));
        return Ok(StepOutcome { state: state.clone(), records, accepted: false });
    }
    records.push(s.homodyne_gaussian(t2, layout.quads[1], y_t, layout.spacing.clone(), &Feedback::Full)?);

    let z = [records[0].cell, records[1].cell];
    let before = s.ideal.clone();
    let (ic, it) = (
        s.ideal_modes.iter().position(|m| *m == cfg.control).ok_or_else(|| Error::InternalConsistency("control missing".into()))?,
        s.ideal_modes.iter().position(|m| *m == cfg.target).ok_or_else(|| Error::InternalConsistency("target missing".into()))?,
    );
    let form = s.ideal_bell(&cfg.control, &cfg.target, bell_from_cells(cfg.variant, z[0], z[1]))?;
    if cfg.variant != FusionVariant::C {
        let check = qubit_circuit_check(&before, cfg.variant, ic, it, z)?.graph_form()?;
        if check.topology != form.topology {
            return Err(Error::InternalConsistency("fused topology disagrees with the qubit-circuit rendering".into()));
        }
    }
    Ok(StepOutcome { state: s, records, accepted: true })
}

/// Plain homodyne of a vertex: a Z (q) or X (p) measurement of the qubit.
pub fn measure_vertex<T: Scalar, R: Rng>(
    state: &GkpGraphState<T>,
    label: &str,
    quad: Quadrature,
    nu: f64,
    source: &mut OutcomeSource<'_, R>,
) -> Result<StepOutcome<T>> {
    check_nu(nu)?;
    let mut s = state.clone();
    let m = s.index_of(label)?;
    let y = source.draw(&s, m, quad, 1.0)?;
    if postselect_rejects(y, 1.0, nu) {
        let (pc, z) = centered_mod(y, 1.0);
        return Ok(StepOutcome { state: state.clone(), records: vec![rejected_record(label, quad, y, 1.0, z, pc)], accepted: false });
    }
    let rec = s.homodyne_gaussian(m, quad, y, T::one(), &Feedback::Full)?;
    let basis = match quad {
        Quadrature::Q => Pauli1::Z,
        Quadrature::P => Pauli1::X,
    };
    s.ideal_measure(label, basis, rec.cell.rem_euclid(2) == 1)?;
    Ok(StepOutcome { state: s, records: vec![rec], accepted: true })
}

/// Per-measurement data needed for outcome-averaged error probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    /// Prior variance of the measured variable (σ² units).
    pub variance: f64,
    /// `1/(V⁻¹)_jj` of the conjugate (σ² units).
    pub conjugate_precision: f64,
    /// Comb spacing in units of √π.
    pub spacing: f64,
    /// Measured-variable mean (√π units) as `a₀ + Σ_i a_i δ_i` over earlier tooth offsets.
    pub mean_constant: f64,
    pub mean_coeffs: Vec<f64>,
    /// Post-selection half-window (absolute units).
    pub nu: f64,
}

/// Fits the affine dependence of each measured mean on earlier tooth offsets.
///
/// `records` must come from a run with in-cell forced outcomes on the
/// positive side (partner offset +1) and pruning disabled.
pub fn trace_from_records(records: &[MeasurementRecord], nus: &[f64]) -> Result<Vec<TraceEntry>> {
    let mut out = Vec::with_capacity(records.len());
    for (m, r) in records.iter().enumerate() {
        if !r.accepted || r.partner != 1 {
            return contract("trace records need accepted outcomes with a +1 partner tooth");
        }
        let cells: Vec<i64> = records[..m].iter().map(|x| x.cell).collect();
        let deltas = |tags: &Vec<i64>| -> Vec<i64> { tags.iter().zip(&cells).map(|(n, z)| n - z).collect() };
        let find = |want: &dyn Fn(&[i64]) -> bool| -> Option<f64> {
            r.parent_means.iter().find(|(tags, _)| want(&deltas(tags))).map(|(_, mu)| *mu)
        };
        let a0 = find(&|d| d.iter().all(|&x| x == 0))
            .ok_or_else(|| Error::InternalConsistency("no outcome-zero parent branch".into()))?;
        let mut coeffs = Vec::with_capacity(m);
        for i in 0..m {
            let ai = find(&|d| d.iter().enumerate().all(|(k, &x)| x == if k == i { 1 } else { 0 }))
                .ok_or_else(|| Error::InternalConsistency(format!("parent branch with offset on measurement {i} was pruned")))?;
            coeffs.push(ai - a0);
        }
        for (tags, mu) in &r.parent_means {
            let d = deltas(tags);
            let pred = a0 + d.iter().zip(&coeffs).map(|(x, a)| *x as f64 * a).sum::<f64>();
            if (pred - mu).abs() > 1e-9 {
                return Err(Error::InternalConsistency("measured mean is not affine in earlier offsets".into()));
            }
        }
        out.push(TraceEntry {
            variance: r.variance,
            conjugate_precision: r.conjugate_precision,
            spacing: r.spacing,
            mean_constant: a0,
            mean_coeffs: coeffs,
            nu: nus.get(m).cloned().unwrap_or(0.0),
        });
    }
    Ok(out)
}

/// Half-cell segments of the window `|y| < s`: `(lo, hi, z, partner)` in units of the spacing.
const SEGMENTS: [(f64, f64, i64, i64); 4] = [(-1.0, -0.5, -1, 1), (-0.5, 0.0, 0, -1), (0.0, 0.5, 0, 1), (0.5, 1.0, 1, -1)];

/// Outcome-averaged error statistics of a measurement sequence.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorSummary {
    /// `1 −` (weight of the all-nearest-tooth path) / (total accepted weight).
    pub total_error: f64,
    /// Accepted weight relative to the window without post-selection.
    pub success: f64,
}

/// Average total error over all outcome windows `|y_m| < s_m`.
///
/// Each measurement contributes, per half-cell segment, the nearest tooth
/// or its partner; a path's weight is the product of the per-measurement
/// integrals `∫ P_N[n] P_Q(y − n s − μ)` with `μ` following earlier choices.
///
/// A lone centred measurement on the `√π` comb is a single Steane round and
/// uses the full-comb statistics [`average_error_probability`] instead.
pub fn average_total_error(trace: &[TraceEntry], sigma2: f64) -> Result<ErrorSummary> {
    if !(sigma2 > 0.0) {
        return contract("σ² must be positive");
    }
    if let [e] = trace {
        if e.spacing == 1.0 && e.mean_constant == 0.0 {
            let cp = 2.0 * e.conjugate_precision;
            let p = SteaneParams::new(cp, cp, e.variance / 2.0, e.variance / 2.0, sigma2)?;
            let all = postselect_success_probability(&p, 0.0)?;
            return Ok(ErrorSummary {
                total_error: average_error_probability(&p, e.nu)?,
                success: (postselect_success_probability(&p, e.nu)? / all).clamp(0.0, 1.0),
            });
        }
    }
    let accepted = path_weights(trace, sigma2, true);
    let all = path_weights(trace, sigma2, false);
    if !(accepted.1 > 0.0) {
        return Err(Error::PostSelectionExhausted { attempts: 0 });
    }
    Ok(ErrorSummary {
        total_error: (1.0 - accepted.0 / accepted.1).clamp(0.0, 1.0),
        success: (accepted.1 / all.1).clamp(0.0, 1.0),
    })
}

/// `(error-free weight, total weight)`.
fn path_weights(trace: &[TraceEntry], sigma2: f64, apply_nu: bool) -> (f64, f64) {
    fn rec(trace: &[TraceEntry], sigma2: f64, apply_nu: bool, m: usize, deltas: &mut Vec<i64>, clean: bool, w: f64, acc: &mut (f64, f64)) {
        if m == trace.len() {
            if clean {
                acc.0 += w;
            }
            acc.1 += w;
            return;
        }
        let e = &trace[m];
        let s = e.spacing * SQRT_PI;
        let mu = (e.mean_constant + deltas.iter().zip(&e.mean_coeffs).map(|(d, a)| *d as f64 * a).sum::<f64>()) * SQRT_PI;
        let var = e.variance * sigma2 / 2.0;
        let cut = if apply_nu { e.nu } else { 0.0 };
        for (lo, hi, z, partner) in SEGMENTS {
            let (mut a, mut b) = (lo * s, hi * s);
            // keep |p_c| ≤ s/2 − ν
            if cut > 0.0 {
                let centre = z as f64 * s;
                a = a.max(centre - (s / 2.0 - cut));
                b = b.min(centre + (s / 2.0 - cut));
            }
            for which in [0, 1] {
                let n = z + which * partner;
                let ns = n as f64 * s;
                let pn = (-e.conjugate_precision * sigma2 * ns * ns).exp();
                let integral = pn * gauss_cdf_diff(a - ns - mu, b - ns - mu, var);
                if integral <= 0.0 {
                    continue;
                }
                deltas.push(which * partner);
                rec(trace, sigma2, apply_nu, m + 1, deltas, clean && which == 0, w * integral, acc);
                deltas.pop();
            }
        }
    }
    let mut acc = (0.0, 0.0);
    rec(trace, sigma2, apply_nu, 0, &mut Vec::new(), true, 1.0, &mut acc);
    acc
}

/// `∫_a^b N(x; 0, var) dx`.
fn gauss_cdf_diff(a: f64, b: f64, var: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let sd = var.sqrt();
    integrate(|x| (-x * x / (2.0 * var)).exp() / (sd * (2.0 * PI).sqrt()), a, b)
}

/// Labels of the two three-vertex star graphs and the Steane ancilla of the
/// tree-generation protocol.
pub const TREE_STAR_B: [&str; 3] = ["b0", "b1", "b2"];
pub const TREE_STAR_A: [&str; 3] = ["a0", "a1", "a2"];

/// Tree-generation protocol: two 3-vertex stars, p-Steane on `b0`, then a
/// fusion of `a0` (control) with `b1` (target). Survivors are `[b0, b2, a1, a2]`.
///
/// Outcomes (units of √π) are consumed as `[w, u, v]`: Steane, control, target.
pub fn run_tree_protocol<T: Scalar, R: Rng>(
    variant: FusionVariant,
    comb: DualHomodyneComb,
    sigma2: f64,
    nu: [f64; 3],
    prune: Option<f64>,
    source: &mut OutcomeSource<'_, R>,
) -> Result<StepOutcome<T>> {
    let mut s = GkpGraphState::<T>::empty(sigma2);
    if let Some(p) = prune {
        s.prune_threshold = p;
    }
    for names in [TREE_STAR_B, TREE_STAR_A] {
        for v in names {
            s.add_qubit(v, IdealLogical::XPlus, VertexEnvelope::unit())?;
        }
        let c = s.index_of(names[0])?;
        s.apply_cz(c, s.index_of(names[1])?)?;
        s.apply_cz(c, s.index_of(names[2])?)?;
    }
    let mut records = Vec::new();
    let mut cfg = SteaneConfig::p("b0");
    cfg.nu = nu[0];
    let st = steane_correct_vertex(&s, &cfg, source)?;
    records.extend(st.records);
    if !st.accepted {
        return Ok(StepOutcome { state: st.state, records, accepted: false });
    }
    let mut fcfg = FusionConfig::new(variant, "a0", "b1");
    fcfg.comb = comb;
    fcfg.nu = [nu[1], nu[2]];
    let fu = fuse(&st.state, &fcfg, source)?;
    records.extend(fu.records);
    Ok(StepOutcome { state: fu.state, records, accepted: fu.accepted })
}

/// Average total error of the tree protocol for one fusion variant.
pub fn tree_protocol_error(variant: FusionVariant, comb: DualHomodyneComb, sigma2: f64, nu: [f64; 3]) -> Result<ErrorSummary> {
    let run = run_tree_protocol::<f64, rand_chacha::ChaCha8Rng>(
        variant,
        comb,
        sigma2,
        [0.0; 3],
        Some(0.0),
        &mut forced(&representative_outcomes(variant, comb)),
    )?;
    let trace = trace_from_records(&run.records, &nu)?;
    average_total_error(&trace, sigma2)
}

/// A source placing every outcome at `+s/4`.
pub fn in_cell() -> Forced<'static> {
    OutcomeSource::InCell
}

/// In-cell outcomes `+s/4` for each measurement of the tree protocol.
pub fn representative_outcomes(variant: FusionVariant, comb: DualHomodyneComb) -> [f64; 3] {
    let cfg = FusionConfig { comb, ..FusionConfig::new(variant, "a0", "b1") };
    let sp = fusion_layout::<f64>(&cfg).spacing;
    [0.25, 0.25 * sp, 0.25 * sp]
}
