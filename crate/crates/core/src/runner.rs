//! Declarative protocol scripts: parsing, execution, sweeps and data emission.
//!
//! A script is a JSON document with an ordered `steps` list. Each step has an
//! `op` field naming one of `new_qubit`, `cz`, `steane`, `fuse`, `measure` or
//! `emit`. Homodyne outcomes are either replayed from `outcomes` (units of √π)
//! or sampled from a ChaCha8 stream seeded with `seed`.
//!
//! ```json
//! {
//!   "sigma2": 0.1,
//!   "outcomes": [0.25, 0.25, 0.25],
//!   "steps": [
//!     { "op": "new_qubit", "label": "a" },
//!     { "op": "new_qubit", "label": "b" },
//!     { "op": "cz", "a": "a", "b": "b" },
//!     { "op": "steane", "target": "a" },
//!     { "op": "emit", "what": "branches" }
//!   ]
//! }
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{contract, Error, Result};
use crate::gkp::{
    homodyne_outcome_pdf, make_finite_gkp, quadrature_wavefunction, seeded_rng, ErrorEnvelope1, IdealLogical, Quadrature,
};
use crate::graph::{GkpGraphState, MeasurementRecord, VertexEnvelope};
use crate::oracle::{evolve, fidelity, synthesize, GridGate, GridSpec};
use crate::protocols::{
    average_total_error, fuse, measure_vertex, steane_correct_vertex, trace_from_records, DualHomodyneComb, ErrorSummary,
    FusionConfig, FusionVariant, OutcomeSource, SteaneConfig,
};
use crate::scalar::{QSqrt2, Scalar};

/// Environment variable capping the sweep worker pool.
pub const THREADS_ENV: &str = "GKPLAB_THREADS";
const DEFAULT_MAX_ATTEMPTS: usize = 1000;

fn default_sigma2() -> f64 {
    0.1
}
fn default_one() -> f64 {
    1.0
}
fn default_logical() -> IdealLogical {
    IdealLogical::XPlus
}
fn default_quadrature_p() -> Quadrature {
    Quadrature::P
}
fn default_attempts() -> usize {
    DEFAULT_MAX_ATTEMPTS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolScript {
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    #[serde(default)]
    pub seed: u64,
    /// Forced homodyne outcomes in units of √π, consumed in measurement order.
    #[serde(default)]
    pub outcomes: Option<Vec<f64>>,
    /// Run the Gaussian layer in exact Q(√2) arithmetic.
    #[serde(default)]
    pub exact: bool,
    /// Branch-pruning threshold on relative weight.
    #[serde(default)]
    pub prune: Option<f64>,
    /// Restarts allowed when sampled outcomes are rejected by post-selection.
    #[serde(default = "default_attempts")]
    pub max_attempts: usize,
    /// Output directory for report files.
    #[serde(default)]
    pub out: Option<String>,
    #[serde(default)]
    pub steps: Vec<Step>,
    #[serde(default)]
    pub sweep: Option<SweepBlock>,
}

impl Default for ProtocolScript {
    fn default() -> Self {
        ProtocolScript {
            sigma2: default_sigma2(),
            seed: 0,
            outcomes: None,
            exact: false,
            prune: None,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
            out: None,
            steps: vec![],
            sweep: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum Step {
    NewQubit {
        label: String,
        #[serde(default = "default_logical")]
        logical: IdealLogical,
        /// Envelope variances in units of σ².
        #[serde(default = "default_one")]
        l: f64,
        #[serde(default = "default_one")]
        m: f64,
        /// Envelope means in units of √π.
        #[serde(default)]
        mu_q: f64,
        #[serde(default)]
        mu_p: f64,
    },
    Cz {
        a: String,
        b: String,
    },
    Steane {
        target: String,
        #[serde(default = "default_quadrature_p")]
        quadrature: Quadrature,
        #[serde(default = "default_one")]
        l_a: f64,
        #[serde(default = "default_one")]
        m_a: f64,
        #[serde(default)]
        gain: Option<f64>,
        #[serde(default)]
        nu: f64,
    },
    Fuse {
        variant: FusionVariant,
        control: String,
        target: String,
        #[serde(default)]
        nu: [f64; 2],
        #[serde(default)]
        comb: DualHomodyneComb,
    },
    Measure {
        mode: String,
        quadrature: Quadrature,
        #[serde(default)]
        nu: f64,
    },
    Emit {
        what: EmitWhat,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmitWhat {
    Covariance,
    Branches,
    Topology,
}

/// Sweep block: parameter and metric are checked when the sweep runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default = "default_metric")]
    pub metric: String,
}

fn default_metric() -> String {
    "avg_error".into()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParameter {
    Sigma2,
    MB,
    Nu,
}

impl std::str::FromStr for SweepParameter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sigma2" => Ok(SweepParameter::Sigma2),
            "m_b" => Ok(SweepParameter::MB),
            "nu" => Ok(SweepParameter::Nu),
            _ => contract(format!("unknown sweep parameter '{s}' (sigma2, m_b, nu)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    AvgError,
    PSucc,
    Tradeoff,
}

impl std::str::FromStr for Metric {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "avg_error" => Ok(Metric::AvgError),
            "p_succ" => Ok(Metric::PSucc),
            "tradeoff" => Ok(Metric::Tradeoff),
            _ => contract(format!("unknown metric '{s}' (avg_error, p_succ, tradeoff)")),
        }
    }
}

/// Command-line overrides applied on top of a parsed script.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub sigma2: Option<f64>,
    pub variant: Option<FusionVariant>,
    /// Replaces every post-selection half-window (absolute units).
    pub nu: Option<f64>,
}

impl ProtocolScript {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e)))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(s) = o.sigma2 {
            self.sigma2 = s;
        }
        for step in &mut self.steps {
            match step {
                Step::Fuse { variant, nu, .. } => {
                    if let Some(v) = o.variant {
                        *variant = v;
                    }
                    if let Some(n) = o.nu {
                        *nu = [n, n];
                    }
                }
                Step::Steane { nu, .. } | Step::Measure { nu, .. } => {
                    if let Some(n) = o.nu {
                        *nu = n;
                    }
                }
                _ => {}
            }
        }
    }

    pub fn has_fusion(&self) -> bool {
        self.steps.iter().any(|s| matches!(s, Step::Fuse { .. }))
    }

    /// Checks label references, step parameters and the sweep block.
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2 > 0.0) {
            return contract(format!("sigma2 must be positive, got {}", self.sigma2));
        }
        if self.max_attempts == 0 {
            return contract("max_attempts must be at least 1");
        }
        let mut live: BTreeSet<&str> = BTreeSet::new();
        let need = |live: &BTreeSet<&str>, step: usize, l: &str| -> Result<()> {
            if live.contains(l) {
                Ok(())
            } else {
                Err(Error::Script { step, message: format!("unknown vertex '{l}'") })
            }
        };
        for (i, step) in self.steps.iter().enumerate() {
            match step {
                Step::NewQubit { label, l, m, .. } => {
                    if label.contains('#') || label.contains(':') {
                        return Err(Error::Script { step: i, message: format!("label '{label}' uses a reserved character") });
                    }
                    if !(*l > 0.0 && *m > 0.0) {
                        return Err(Error::Script { step: i, message: "envelope variances must be positive".into() });
                    }
                    if !live.insert(label) {
                        return Err(Error::Script { step: i, message: format!("duplicate vertex '{label}'") });
                    }
                }
                Step::Cz { a, b } => {
                    need(&live, i, a)?;
                    need(&live, i, b)?;
                    if a == b {
                        return Err(Error::Script { step: i, message: "cz needs two distinct vertices".into() });
                    }
                }
                Step::Steane { target, .. } => need(&live, i, target)?,
                Step::Fuse { control, target, .. } => {
                    need(&live, i, control)?;
                    need(&live, i, target)?;
                    if control == target {
                        return Err(Error::Script { step: i, message: "fusion needs two distinct vertices".into() });
                    }
                    live.remove(control.as_str());
                    live.remove(target.as_str());
                }
                Step::Measure { mode, .. } => {
                    need(&live, i, mode)?;
                    live.remove(mode.as_str());
                }
                Step::Emit { .. } => {}
            }
        }
        if let Some(sw) = &self.sweep {
            sw.parameter.parse::<SweepParameter>()?;
            sw.metric.parse::<Metric>()?;
        }
        Ok(())
    }
}

/// One row of the branch table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub tags: Vec<i64>,
    /// `|a_b|²`, normalized over the table.
    pub weight: f64,
    /// Means in units of √π, order `(q_1..q_n, p_1..p_n)`.
    pub means: Vec<f64>,
    /// Exact means when the run used Q(√2) arithmetic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub means_exact: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub step: usize,
    pub what: EmitWhat,
    pub value: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub sigma2: f64,
    pub seed: u64,
    pub modes: Vec<String>,
    /// Edges of the ideal graph between surviving vertices.
    pub edges: Vec<(String, String)>,
    /// Covariance in units of σ².
    pub covariance: Vec<Vec<f64>>,
    /// Exact covariance entries in Q(√2) when available.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub covariance_exact: Option<Vec<Vec<String>>>,
    pub branches: Vec<BranchRow>,
    pub records: Vec<MeasurementRecord>,
    /// Weight outside the branch whose comb indices equal the observed cells.
    pub error_probability: f64,
    /// Fraction of attempts accepted by post-selection.
    pub success_probability: f64,
    pub attempts: usize,
    pub dropped_weight: f64,
    pub snapshots: Vec<Snapshot>,
}

struct Execution<T> {
    state: GkpGraphState<T>,
    records: Vec<MeasurementRecord>,
    /// Post-selection half-window of each accepted measurement, in order.
    nus: Vec<f64>,
    accepted: bool,
    snapshots: Vec<Snapshot>,
}

fn step_error(step: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::PostSelectionExhausted { .. } | Error::Script { .. } => e,
        other => Error::Script { step, message: other.to_string() },
    }
}

/// Runs the steps once. With `ignore_nu` every window is treated as zero,
/// but the configured windows are still returned in `nus`.
fn execute<T: Scalar, R: rand::Rng>(
    script: &ProtocolScript,
    source: &mut OutcomeSource<'_, R>,
    ignore_nu: bool,
    prune: Option<f64>,
) -> Result<Execution<T>> {
    let mut s = GkpGraphState::<T>::empty(script.sigma2);
    if let Some(p) = prune {
        s.prune_threshold = p;
    }
    let mut records = Vec::new();
    let mut nus = Vec::new();
    let mut snapshots = Vec::new();
    let eff = |nu: f64| if ignore_nu { 0.0 } else { nu };
    for (i, step) in script.steps.iter().enumerate() {
        let err = step_error(i);
        let out = match step {
            Step::NewQubit { label, logical, l, m, mu_q, mu_p } => {
                let env = VertexEnvelope { l: T::from_f64(*l), m: T::from_f64(*m), mu_q: T::from_f64(*mu_q), mu_p: T::from_f64(*mu_p) };
                s.add_qubit(label, *logical, env).map_err(&err)?;
                continue;
            }
            Step::Cz { a, b } => {
                let (ia, ib) = (s.index_of(a).map_err(&err)?, s.index_of(b).map_err(&err)?);
                s.apply_cz(ia, ib).map_err(&err)?;
                continue;
            }
            Step::Emit { what } => {
                snapshots.push(Snapshot { step: i, what: *what, value: snapshot(&s, *what).map_err(&err)? });
                continue;
            }
            Step::Steane { target, quadrature, l_a, m_a, gain, nu } => {
                let cfg = SteaneConfig { target: target.clone(), quadrature: *quadrature, l_a: *l_a, m_a: *m_a, gain: *gain, nu: eff(*nu) };
                nus.push(*nu);
                steane_correct_vertex(&s, &cfg, source).map_err(&err)?
            }
            Step::Fuse { variant, control, target, nu, comb } => {
                let cfg = FusionConfig { variant: *variant, control: control.clone(), target: target.clone(), nu: nu.map(eff), comb: *comb };
                nus.extend_from_slice(nu);
                fuse(&s, &cfg, source).map_err(&err)?
            }
            Step::Measure { mode, quadrature, nu } => {
                nus.push(*nu);
                measure_vertex(&s, mode, *quadrature, eff(*nu), source).map_err(&err)?
            }
        };
        records.extend(out.records);
        if !out.accepted {
            return Ok(Execution { state: out.state, records, nus, accepted: false, snapshots });
        }
        s = out.state;
    }
    Ok(Execution { state: s, records, nus, accepted: true, snapshots })
}

fn edges<T: Scalar>(s: &GkpGraphState<T>) -> Result<Vec<(String, String)>> {
    if s.ideal_modes.is_empty() {
        return Ok(vec![]);
    }
    let topo = s.topology()?;
    let mut out = Vec::new();
    for i in 0..topo.n {
        for j in i + 1..topo.n {
            if topo.adjacency[i][j] {
                out.push((s.ideal_modes[i].clone(), s.ideal_modes[j].clone()));
            }
        }
    }
    Ok(out)
}

fn branch_rows<T: Scalar>(s: &GkpGraphState<T>, exact: bool) -> Vec<BranchRow> {
    let total = s.norm2();
    s.branches
        .iter()
        .map(|b| BranchRow {
            tags: b.tags.clone(),
            weight: if total > 0.0 { b.amplitude.norm_sqr() / total } else { 0.0 },
            means: b.mean.iter().map(|m| m.to_f64()).collect(),
            means_exact: exact.then(|| b.mean.iter().map(|m| m.to_string()).collect()),
        })
        .collect()
}

fn cov_rows<T: Scalar>(s: &GkpGraphState<T>) -> Vec<Vec<f64>> {
    let c = s.cov_f64();
    (0..c.rows).map(|i| c.row(i).to_vec()).collect()
}

fn snapshot<T: Scalar>(s: &GkpGraphState<T>, what: EmitWhat) -> Result<serde_json::Value> {
    let v = match what {
        EmitWhat::Covariance => serde_json::to_value(cov_rows(s)),
        EmitWhat::Branches => serde_json::to_value(branch_rows(s, false)),
        EmitWhat::Topology => serde_json::to_value(edges(s)?),
    };
    v.map_err(|e| Error::InternalConsistency(e.to_string()))
}

fn build_report<T: Scalar>(script: &ProtocolScript, run: Execution<T>, attempts: usize, exact: bool) -> Result<RunReport> {
    let s = &run.state;
    let branches = branch_rows(s, exact);
    let cells: Vec<i64> = run.records.iter().map(|r| r.cell).collect();
    let clean: f64 = branches.iter().filter(|b| b.tags == cells).map(|b| b.weight).sum();
    let error_probability = if s.branches.len() == 1 && cells.is_empty() { 0.0 } else { (1.0 - clean).clamp(0.0, 1.0) };
    Ok(RunReport {
        sigma2: script.sigma2,
        seed: script.seed,
        modes: s.modes.clone(),
        edges: edges(s)?,
        covariance: cov_rows(s),
        covariance_exact: exact.then(|| {
            (0..s.cov.rows).map(|i| s.cov.row(i).iter().map(|x| x.to_string()).collect()).collect()
        }),
        branches,
        records: run.records,
        error_probability,
        success_probability: 1.0 / attempts as f64,
        attempts,
        dropped_weight: s.dropped_weight,
        snapshots: run.snapshots,
    })
}

fn run_typed<T: Scalar>(script: &ProtocolScript, exact: bool) -> Result<RunReport> {
    match &script.outcomes {
        Some(values) => {
            let mut src = OutcomeSource::<ChaCha8Rng>::Forced { values, next: 0 };
            let run = execute::<T, _>(script, &mut src, false, script.prune)?;
            if !run.accepted {
                return Err(Error::PostSelectionExhausted { attempts: 1 });
            }
            build_report(script, run, 1, exact)
        }
        None => {
            let mut rng = seeded_rng(script.seed);
            for attempt in 1..=script.max_attempts {
                let run = execute::<T, _>(script, &mut OutcomeSource::sampled(&mut rng), false, script.prune)?;
                if run.accepted {
                    return build_report(script, run, attempt, exact);
                }
            }
            Err(Error::PostSelectionExhausted { attempts: script.max_attempts })
        }
    }
}

/// Validates and runs a parsed script.
pub fn run_script(script: &ProtocolScript) -> Result<RunReport> {
    script.validate()?;
    if script.exact {
        run_typed::<QSqrt2>(script, true)
    } else {
        run_typed::<f64>(script, false)
    }
}

/// Loads, overrides, runs, and writes `report.json` plus CSV tables when the
/// script names an output directory.
pub fn run_protocol_script(path: &Path, overrides: &Overrides) -> Result<RunReport> {
    let mut script = ProtocolScript::load(path)?;
    script.apply(overrides);
    let report = run_script(&script)?;
    if let Some(dir) = &script.out {
        write_report(&report, Path::new(dir))?;
    }
    Ok(report)
}

/// Outcome-averaged total error and post-selection success of the script's
/// measurement sequence, from the exact path sum over retained teeth.
pub fn error_model(script: &ProtocolScript) -> Result<ErrorSummary> {
    script.validate()?;
    let mut src = OutcomeSource::<ChaCha8Rng>::InCell;
    let run = execute::<f64, _>(script, &mut src, true, Some(0.0))?;
    if run.records.is_empty() {
        return Ok(ErrorSummary { total_error: 0.0, success: 1.0 });
    }
    let trace = trace_from_records(&run.records, &run.nus)?;
    average_total_error(&trace, script.sigma2)
}

/// Fixed 12-significant-digit rendering used in every CSV.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// A numeric table with a header row.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn to_csv(&self) -> String {
        csv_text(&self.header, self.rows.iter().map(|r| r.iter().map(|x| fmt_num(*x)).collect()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InternalConsistency(e.to_string()))
    }
}

/// Worker pool sized by `GKPLAB_THREADS` (capped at the available cores).
pub fn worker_pool() -> Result<rayon::ThreadPool> {
    let avail = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n.min(avail),
            _ => return contract(format!("{THREADS_ENV} must be a positive integer, got '{v}'")),
        },
        Err(_) => avail,
    };
    rayon::ThreadPoolBuilder::new().num_threads(n).build().map_err(|e| Error::InternalConsistency(e.to_string()))
}

fn with_parameter(script: &ProtocolScript, p: SweepParameter, value: f64) -> Result<ProtocolScript> {
    let mut s = script.clone();
    match p {
        SweepParameter::Sigma2 => s.sigma2 = value,
        SweepParameter::Nu => s.apply(&Overrides { nu: Some(value), ..Default::default() }),
        SweepParameter::MB => {
            let target = s
                .steps
                .iter()
                .find_map(|st| match st {
                    Step::Steane { target, .. } => Some(target.clone()),
                    _ => None,
                })
                .ok_or_else(|| Error::Contract("m_b sweep needs a steane step".into()))?;
            for st in &mut s.steps {
                if let Step::NewQubit { label, m, .. } = st {
                    if *label == target {
                        *m = value;
                    }
                }
            }
        }
    }
    Ok(s)
}

/// Sweeps one parameter and tabulates the metric, one column per fusion
/// variant when the script fuses.
pub fn sweep_emit(script: &ProtocolScript, parameter: &str, values: &[f64], metric: &str) -> Result<Table> {
    sweep_emit_variants(script, parameter, values, metric, &FusionVariant::all())
}

/// [`sweep_emit`] restricted to the listed fusion variants.
pub fn sweep_emit_variants(
    script: &ProtocolScript,
    parameter: &str,
    values: &[f64],
    metric: &str,
    only: &[FusionVariant],
) -> Result<Table> {
    let p: SweepParameter = parameter.parse()?;
    let metric: Metric = metric.parse()?;
    script.validate()?;
    if only.is_empty() {
        return contract("no fusion variant selected");
    }
    let variants: Vec<Option<FusionVariant>> =
        if script.has_fusion() { only.iter().copied().map(Some).collect() } else { vec![None] };
    let mut header = vec![parameter.to_string()];
    for v in &variants {
        let suffix = v.map(|v| format!("_{v:?}")).unwrap_or_default();
        match metric {
            Metric::AvgError => header.push(format!("avg_error{suffix}")),
            Metric::PSucc => header.push(format!("p_succ{suffix}")),
            Metric::Tradeoff => {
                header.push(format!("p_succ{suffix}"));
                header.push(format!("avg_error{suffix}"));
            }
        }
    }
    let point = |value: f64| -> Result<Vec<f64>> {
        let mut row = vec![value];
        for v in &variants {
            let mut s = with_parameter(script, p, value)?;
            s.apply(&Overrides { variant: *v, ..Default::default() });
            let e = error_model(&s)?;
            match metric {
                Metric::AvgError => row.push(e.total_error),
                Metric::PSucc => row.push(e.success),
                Metric::Tradeoff => row.extend([e.success, e.total_error]),
            }
        }
        Ok(row)
    };
    let pool = worker_pool()?;
    let rows: Vec<Result<Vec<f64>>> = pool.install(|| values.par_iter().map(|&v| point(v)).collect());
    Ok(Table { header, rows: rows.into_iter().collect::<Result<_>>()? })
}

/// Runs the script's own sweep block.
pub fn sweep_script(script: &ProtocolScript) -> Result<Table> {
    let sw = script.sweep.as_ref().ok_or_else(|| Error::Contract("script has no sweep block".into()))?;
    sweep_emit(script, &sw.parameter, &sw.values, &sw.metric)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    /// Homodyne outcome density.
    #[default]
    Pdf,
    /// Real and imaginary parts of the closed-form wavefunction.
    Wavefunction,
}

/// A single-mode state and an evaluation grid (absolute quadrature units).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistributionSpec {
    #[serde(default = "default_logical")]
    pub logical: IdealLogical,
    #[serde(default = "default_sigma2")]
    pub sigma2: f64,
    #[serde(default = "ErrorEnvelope1::symmetric")]
    pub envelope: ErrorEnvelope1,
    pub quadrature: Quadrature,
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default)]
    pub kind: DistributionKind,
}

/// Tabulates a single-mode density or wavefunction on a uniform grid.
pub fn emit_distribution(spec: &DistributionSpec) -> Result<Table> {
    if spec.points < 2 || !(spec.max > spec.min) {
        return contract(format!("grid needs max > min and at least 2 points, got [{}, {}] × {}", spec.min, spec.max, spec.points));
    }
    let st = make_finite_gkp(spec.logical, spec.envelope, spec.sigma2)?;
    let h = (spec.max - spec.min) / (spec.points - 1) as f64;
    let grid: Vec<f64> = (0..spec.points).map(|i| spec.min + i as f64 * h).collect();
    match spec.kind {
        DistributionKind::Pdf => Ok(Table {
            header: vec!["x".into(), "pdf".into()],
            rows: grid.iter().map(|&x| vec![x, homodyne_outcome_pdf(&st, spec.quadrature, x)]).collect(),
        }),
        DistributionKind::Wavefunction => {
            let w = quadrature_wavefunction(&st, spec.quadrature, &grid)?;
            Ok(Table {
                header: vec!["x".into(), "re".into(), "im".into()],
                rows: grid.iter().zip(&w).map(|(&x, a)| vec![x, a.re, a.im]).collect(),
            })
        }
    }
}

/// Header plus rows with LF line endings; fields are quoted only when needed.
pub fn csv_text(header: &[String], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    // writing into a Vec cannot fail
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    String::from_utf8(w.into_inner().expect("in-memory csv")).expect("utf-8 fields")
}

fn covariance_table(r: &RunReport) -> String {
    let header: Vec<String> =
        r.modes.iter().map(|m| format!("q_{m}")).chain(r.modes.iter().map(|m| format!("p_{m}"))).collect();
    csv_text(&header, r.covariance.iter().map(|row| row.iter().map(|x| fmt_num(*x)).collect()))
}

fn branch_table(r: &RunReport) -> String {
    let mut header = vec!["tags".to_string(), "weight".to_string()];
    header.extend(r.modes.iter().map(|m| format!("mu_q_{m}")));
    header.extend(r.modes.iter().map(|m| format!("mu_p_{m}")));
    csv_text(
        &header,
        r.branches.iter().map(|b| {
            let tags: Vec<String> = b.tags.iter().map(|t| t.to_string()).collect();
            let mut row = vec![tags.join(";"), fmt_num(b.weight)];
            row.extend(b.means.iter().map(|m| fmt_num(*m)));
            row
        }),
    )
}

fn record_table(r: &RunReport) -> String {
    let header: Vec<String> = ["mode", "quadrature", "outcome", "spacing", "cell", "centered", "partner", "variance", "branch_error"]
        .map(String::from)
        .to_vec();
    csv_text(
        &header,
        r.records.iter().map(|rec| {
            let q = match rec.quadrature {
                Quadrature::Q => "q",
                Quadrature::P => "p",
            };
            vec![
                rec.mode.clone(),
                q.into(),
                fmt_num(rec.outcome),
                fmt_num(rec.spacing),
                rec.cell.to_string(),
                fmt_num(rec.centered),
                rec.partner.to_string(),
                fmt_num(rec.variance),
                fmt_num(rec.branch_error),
            ]
        }),
    )
}

/// CSV renderings of a report: `(file name, contents)`.
pub fn report_tables(r: &RunReport) -> Vec<(&'static str, String)> {
    vec![("covariance.csv", covariance_table(r)), ("branches.csv", branch_table(r)), ("records.csv", record_table(r))]
}

pub fn report_json(r: &RunReport) -> Result<String> {
    serde_json::to_string_pretty(r).map_err(|e| Error::InternalConsistency(e.to_string()))
}

/// Writes `report.json` and the CSV tables into `dir`.
pub fn write_report(r: &RunReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("report.json"), report_json(r)?)?;
    for (name, body) in report_tables(r) {
        std::fs::write(dir.join(name), body)?;
    }
    Ok(())
}

/// Fidelity of the engine against the brute-force grid for one gate sequence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleCheck {
    pub name: String,
    pub fidelity: f64,
    pub pass: bool,
}

/// Minimum engine/grid fidelity accepted for unitary steps.
pub const ORACLE_FIDELITY: f64 = 1.0 - 1e-9;

/// Replays a script made of `new_qubit` and `cz` steps (at most three
/// vertices) on the grid and compares it with the engine state.
pub fn oracle_check_script(script: &ProtocolScript) -> Result<OracleCheck> {
    script.validate()?;
    let mut fresh = ProtocolScript { steps: vec![], outcomes: None, ..script.clone() };
    let mut gates = Vec::new();
    for (i, st) in script.steps.iter().enumerate() {
        match st {
            Step::NewQubit { .. } => fresh.steps.push(st.clone()),
            Step::Cz { a, b } => gates.push((a.clone(), b.clone())),
            Step::Emit { .. } => {}
            _ => return Err(Error::Script { step: i, message: "oracle check replays only new_qubit and cz steps".into() }),
        }
    }
    let mut src = OutcomeSource::<ChaCha8Rng>::InCell;
    let start = execute::<f64, _>(&fresh, &mut src, true, None)?.state;
    let end = execute::<f64, _>(script, &mut src, true, None)?.state;
    let n = start.n_modes();
    if n == 0 {
        return contract("oracle check needs at least one vertex");
    }
    let spec = GridSpec::for_modes(n)?;
    let mut w = synthesize(&start, spec)?;
    for (a, b) in &gates {
        w = evolve(&w, GridGate::Cz(start.index_of(a)?, start.index_of(b)?))?;
    }
    let f = fidelity(&synthesize(&end, spec)?, &w)?;
    Ok(OracleCheck { name: format!("script ({n} modes, {} cz)", gates.len()), fidelity: f, pass: f > ORACLE_FIDELITY })
}

/// Built-in gate checks on two-mode states at the given σ².
pub fn oracle_check_builtin(sigma2: f64) -> Result<Vec<OracleCheck>> {
    let pair = |a: IdealLogical, b: IdealLogical| -> Result<GkpGraphState<f64>> {
        let mut s = GkpGraphState::<f64>::empty(sigma2);
        s.add_qubit("a", a, VertexEnvelope::unit())?;
        s.add_qubit("b", b, VertexEnvelope::unit())?;
        Ok(s)
    };
    let spec = GridSpec::for_modes(2)?;
    type Apply = fn(&mut GkpGraphState<f64>) -> Result<()>;
    let cases: [(&str, IdealLogical, IdealLogical, GridGate, Apply); 3] = [
        ("cz", IdealLogical::XPlus, IdealLogical::XPlus, GridGate::Cz(0, 1), |s| s.apply_cz(0, 1)),
        ("cx", IdealLogical::XMinus, IdealLogical::Z1, GridGate::Cx(0, 1), |s| s.apply_cx(0, 1)),
        ("fourier", IdealLogical::Z0, IdealLogical::XPlus, GridGate::Fourier(1), |s| s.apply_fourier(1)),
    ];
    let mut out = Vec::new();
    for (name, a, b, gate, apply) in cases {
        let s = pair(a, b)?;
        let grid = evolve(&synthesize(&s, spec)?, gate)?;
        let mut t = s.clone();
        apply(&mut t)?;
        let f = fidelity(&synthesize(&t, spec)?, &grid)?;
        out.push(OracleCheck { name: name.into(), fidelity: f, pass: f > ORACLE_FIDELITY });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{average_error_probability, SteaneParams};

    fn star_script() -> ProtocolScript {
        ProtocolScript::parse(
            r#"{"sigma2": 0.1, "outcomes": [0.25],
                "steps": [
                  {"op": "new_qubit", "label": "a"},
                  {"op": "new_qubit", "label": "b"},
                  {"op": "cz", "a": "a", "b": "b"},
                  {"op": "steane", "target": "a"}
                ]}"#,
        )
        .unwrap()
    }

    #[test]
    fn empty_script_gives_empty_report() {
        let r = run_script(&ProtocolScript::parse("{\"steps\": []}").unwrap()).unwrap();
        assert!(r.modes.is_empty() && r.covariance.is_empty());
        assert_eq!(r.branches.len(), 1);
        assert_eq!(r.error_probability, 0.0);
        assert_eq!(r.success_probability, 1.0);
    }

    #[test]
    fn parse_errors_carry_positions() {
        let e = ProtocolScript::parse("{\n  \"steps\": [ {\"op\": \"cz\", \"a\": 1} ]\n}").unwrap_err();
        assert!(matches!(&e, Error::Parse(m) if m.starts_with("line 2")), "{e}");
    }

    #[test]
    fn unknown_reference_names_the_step() {
        let mut s = star_script();
        s.steps.push(Step::Measure { mode: "zz".into(), quadrature: Quadrature::Q, nu: 0.0 });
        assert_eq!(s.validate().unwrap_err(), Error::Script { step: 4, message: "unknown vertex 'zz'".into() });
    }

    #[test]
    fn unknown_metric_is_a_contract_violation() {
        assert!(matches!(sweep_emit(&star_script(), "sigma2", &[0.1], "fidelity"), Err(Error::Contract(_))));
        assert!(matches!(sweep_emit(&star_script(), "kappa", &[0.1], "p_succ"), Err(Error::Contract(_))));
    }

    #[test]
    fn weights_sum_to_one() {
        let r = run_script(&star_script()).unwrap();
        let w: f64 = r.branches.iter().map(|b| b.weight).sum();
        assert!((w - 1.0).abs() < 1e-10);
        assert!((0.0..=1.0).contains(&r.error_probability));
    }

    #[test]
    fn single_steane_script_uses_the_closed_form() {
        let s = ProtocolScript::parse(
            r#"{"sigma2": 0.08, "steps": [
                  {"op": "new_qubit", "label": "a", "m": 1.5},
                  {"op": "steane", "target": "a", "nu": 0.2}
                ]}"#,
        )
        .unwrap();
        let e = error_model(&s).unwrap();
        let p = SteaneParams::new(1.0, 1.0, 1.0, 1.5, 0.08).unwrap();
        let want = average_error_probability(&p, 0.2).unwrap();
        assert!((e.total_error - want).abs() < 1e-14, "{} vs {want}", e.total_error);
    }

    #[test]
    fn csv_numbers_have_twelve_digits() {
        assert_eq!(fmt_num(0.1), "1.00000000000e-1");
        let t = Table { header: vec!["x".into()], rows: vec![vec![2.0]] };
        assert_eq!(t.to_csv(), "x\n2.00000000000e0\n");
    }
}
