use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gkplab::gkp::{ErrorEnvelope1, IdealLogical, Quadrature};
use gkplab::protocols::FusionVariant;
use gkplab::runner::{
    csv_text, emit_distribution, fmt_num, oracle_check_builtin, oracle_check_script, report_json, report_tables, run_script,
    sweep_emit_variants, write_report, DistributionKind, DistributionSpec, OracleCheck, Overrides, ProtocolScript,
    Table,
};
use gkplab::{Error, Result};

#[derive(Parser)]
#[command(name = "gkplab", version, about = "Finite-energy GKP graph-state protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct Common {
    /// JSON protocol script (or distribution spec for emit-dist).
    #[arg(long)]
    script: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    sigma2: Option<f64>,
    #[arg(long, value_parser = parse_variant)]
    variant: Option<FusionVariant>,
    /// Post-selection half-window applied to every homodyne (absolute units).
    #[arg(long)]
    nu: Option<f64>,
    /// Output directory (run) or file (other subcommands); stdout if absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Execute a protocol script and emit its report.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Sweep σ², m_B or ν and tabulate an error or success metric.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// sigma2, m_b or nu (defaults to the script's sweep block).
        #[arg(long)]
        parameter: Option<String>,
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// avg_error, p_succ or tradeoff.
        #[arg(long)]
        metric: Option<String>,
    },
    /// Tabulate a single-mode outcome density or wavefunction.
    EmitDist {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_logical, default_value = "XPlus")]
        state: IdealLogical,
        #[arg(long, value_parser = parse_quadrature, default_value = "q")]
        quadrature: Quadrature,
        #[arg(long, default_value_t = -6.0, allow_hyphen_values = true)]
        min: f64,
        #[arg(long, default_value_t = 6.0, allow_hyphen_values = true)]
        max: f64,
        #[arg(long, default_value_t = 1201)]
        points: usize,
        /// Envelope means (units of √π).
        #[arg(long, default_value_t = 0.0)]
        mean_u: f64,
        #[arg(long, default_value_t = 0.0)]
        mean_v: f64,
        #[arg(long)]
        wavefunction: bool,
    },
    /// Compare engine gates against the brute-force grid oracle.
    OracleCheck {
        #[command(flatten)]
        common: Common,
    },
}

fn parse_variant(s: &str) -> std::result::Result<FusionVariant, String> {
    s.parse::<FusionVariant>().map_err(|e| e.to_string())
}

fn parse_logical(s: &str) -> std::result::Result<IdealLogical, String> {
    match s {
        "Z0" | "0" => Ok(IdealLogical::Z0),
        "Z1" | "1" => Ok(IdealLogical::Z1),
        "XPlus" | "+" => Ok(IdealLogical::XPlus),
        "XMinus" | "-" => Ok(IdealLogical::XMinus),
        _ => Err(format!("unknown logical state '{s}' (Z0, Z1, XPlus, XMinus)")),
    }
}

fn parse_quadrature(s: &str) -> std::result::Result<Quadrature, String> {
    match s {
        "q" => Ok(Quadrature::Q),
        "p" => Ok(Quadrature::P),
        _ => Err(format!("unknown quadrature '{s}' (q, p)")),
    }
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides { seed: self.seed, sigma2: self.sigma2, variant: self.variant, nu: self.nu }
    }

    fn load(&self) -> Result<ProtocolScript> {
        let path = self.script.as_ref().ok_or_else(|| Error::Contract("--script is required".into()))?;
        let mut s = ProtocolScript::load(path)?;
        s.apply(&self.overrides());
        Ok(s)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn emit_table(t: &Table, c: &Common) -> Result<()> {
    let text = match c.format {
        Format::Csv => t.to_csv(),
        Format::Json => t.to_json()? + "\n",
    };
    emit(&text, c.out.as_deref())
}

fn print_checks(checks: &[OracleCheck], c: &Common) -> Result<()> {
    let text = match c.format {
        Format::Json => serde_json::to_string_pretty(checks).map_err(|e| Error::InternalConsistency(e.to_string()))? + "\n",
        Format::Csv => {
            let header = ["check", "fidelity", "pass"].map(String::from);
            csv_text(&header, checks.iter().map(|k| vec![k.name.clone(), fmt_num(k.fidelity), k.pass.to_string()]))
        }
    };
    emit(&text, c.out.as_deref())?;
    if checks.iter().all(|k| k.pass) {
        Ok(())
    } else {
        Err(Error::InternalConsistency("engine disagrees with the grid oracle".into()))
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { common } => {
            let mut script = common.load()?;
            if let Some(dir) = &common.out {
                script.out = Some(dir.display().to_string());
            }
            let report = run_script(&script)?;
            if let Some(dir) = &script.out {
                return write_report(&report, Path::new(dir));
            }
            match common.format {
                Format::Json => emit(&(report_json(&report)? + "\n"), None),
                Format::Csv => {
                    let tables = report_tables(&report);
                    let branches = tables.iter().find(|(n, _)| *n == "branches.csv").map(|(_, b)| b.as_str());
                    emit(branches.unwrap_or_default(), None)
                }
            }
        }
        Command::Sweep { common, parameter, values, metric } => {
            let script = common.load()?;
            let block = script.sweep.clone();
            let parameter = parameter
                .or_else(|| block.as_ref().map(|b| b.parameter.clone()))
                .ok_or_else(|| Error::Contract("no sweep parameter given".into()))?;
            let values = values
                .or_else(|| block.as_ref().map(|b| b.values.clone()))
                .ok_or_else(|| Error::Contract("no sweep values given".into()))?;
            let metric = metric.or_else(|| block.as_ref().map(|b| b.metric.clone())).unwrap_or_else(|| "avg_error".into());
            let only: Vec<FusionVariant> = match common.variant {
                Some(v) => vec![v],
                None => FusionVariant::all().to_vec(),
            };
            let t = sweep_emit_variants(&script, &parameter, &values, &metric, &only)?;
            emit_table(&t, &common)
        }
        Command::EmitDist { common, state, quadrature, min, max, points, mean_u, mean_v, wavefunction } => {
            let spec = match &common.script {
                Some(p) => {
                    let text = std::fs::read_to_string(p)?;
                    let mut spec: DistributionSpec = serde_json::from_str(&text)
                        .map_err(|e| Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e)))?;
                    if let Some(s) = common.sigma2 {
                        spec.sigma2 = s;
                    }
                    spec
                }
                None => DistributionSpec {
                    logical: state,
                    sigma2: common.sigma2.unwrap_or(0.1),
                    envelope: ErrorEnvelope1::symmetric().with_means(mean_u, mean_v),
                    quadrature,
                    min,
                    max,
                    points,
                    kind: if wavefunction { DistributionKind::Wavefunction } else { DistributionKind::Pdf },
                },
            };
            emit_table(&emit_distribution(&spec)?, &common)
        }
        Command::OracleCheck { common } => {
            let checks = match &common.script {
                Some(_) => vec![oracle_check_script(&common.load()?)?],
                None => oracle_check_builtin(common.sigma2.unwrap_or(0.1))?,
            };
            print_checks(&checks, &common)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gkplab: {e}");
            match e {
                Error::PostSelectionExhausted { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
