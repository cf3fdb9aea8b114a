//! `opsum` command line: positivity checks, norms, marginal problems,
//! monogamy witnesses, and the seeded experiment suite.
//!
//! Exit codes: 0 pass, 1 fail, 2 indeterminate.

use clap::{Parser, Subcommand, ValueEnum};
use opsum::experiments::{self, ExperimentConfig, ExperimentId, Outcome};
use opsum::opsys::{
    self, is_positive_coproduct, is_tensor_compatible, monogamy_witness, norm_coproduct,
    norm_min, OpsysError, TensorCompat,
};
use opsum::wire::{self, AlgebraRegistry};
use opsum::FdAlgebra;
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "opsum",
    about = "Operator system structures on unital direct sums of finite-dimensional C*-algebras",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum NormChoice {
    Min,
    Coproduct,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Tests tensor-structure and coproduct positivity of a sum element.
    CheckPos {
        /// Sum element JSON file ({"level": k, "a": element, "b": element}).
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Computes the induced operator-space norms of a sum element.
    Norm {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = NormChoice::Both)]
        kind: NormChoice,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decides the quantum marginal problem for a pair of states.
    Marginal {
        /// State JSON for α on M_k(A).
        #[arg(long)]
        alpha: PathBuf,
        /// State JSON for β on M_k(B).
        #[arg(long)]
        beta: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Builds the monogamy witness and separating element for two algebras.
    Witness {
        /// Block sizes of A, comma separated (e.g. "2" or "2,3").
        #[arg(long = "algebra-a", default_value = "2")]
        algebra_a: String,
        #[arg(long = "algebra-b", default_value = "2")]
        algebra_b: String,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a seeded experiment (E1..E5) and writes the report.
    Experiment {
        /// Experiment id; may be omitted when --config provides one.
        id: Option<ExperimentId>,
        /// JSON config file overriding the defaults.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Report output path (JSON; a .csv summary is written alongside).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_sizes(spec: &str) -> Result<Vec<usize>, String> {
    spec.split(',')
        .map(|s| s.trim().parse::<usize>().map_err(|e| e.to_string()))
        .collect()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn emit(value: &serde_json::Value, out: &Option<PathBuf>) -> Result<(), String> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| e.to_string()),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run_command(cli: Cli) -> Result<Outcome, String> {
    let reg = AlgebraRegistry::new();
    match cli.command {
        Command::CheckPos { input, tol, out } => {
            let dto: wire::SumElementDto = read_json(&input)?;
            let x = wire::sum_element_from_dto(&dto, &reg).map_err(|e| e.to_string())?;
            let min_pos = opsys::is_positive_min_tol(&x, tol).map_err(|e| e.to_string())?;
            let (coprod, outcome) = match is_positive_coproduct(&x, tol) {
                Ok(chk) => {
                    let outcome = if chk.positive && min_pos {
                        Outcome::Pass
                    } else {
                        Outcome::Fail
                    };
                    (Some(chk), outcome)
                }
                Err(OpsysError::Indeterminate(_)) => (None, Outcome::Indeterminate),
                Err(e) => return Err(e.to_string()),
            };
            let payload = json!({
                "min_positive": min_pos,
                "min_margin": opsys::min_structure_margin(&x).map_err(|e| e.to_string())?,
                "coproduct_positive": coprod.as_ref().map(|c| c.positive),
                "coproduct_margin": coprod.as_ref().map(|c| c.margin),
                "lambda": coprod.as_ref().and_then(|c| c.lambda.as_ref()).map(|l| {
                    l.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()
                }),
                "witness_pair": coprod.as_ref().and_then(|c| c.witness.as_ref()).map(wire::pair_to_dto)
                    .map(|d| serde_json::to_value(d).expect("serializable")),
            });
            emit(&payload, &out)?;
            Ok(outcome)
        }
        Command::Norm {
            input,
            kind,
            tol,
            out,
        } => {
            let dto: wire::SumElementDto = read_json(&input)?;
            let x = wire::sum_element_from_dto(&dto, &reg).map_err(|e| e.to_string())?;
            let mut payload = serde_json::Map::new();
            let mut outcome = Outcome::Pass;
            if matches!(kind, NormChoice::Min | NormChoice::Both) {
                payload.insert("norm_min".into(), json!(norm_min(&x)));
            }
            if matches!(kind, NormChoice::Coproduct | NormChoice::Both) {
                match norm_coproduct(&x, tol) {
                    Ok(n) => {
                        payload.insert("norm_coproduct".into(), json!(n));
                    }
                    Err(OpsysError::Indeterminate(_)) => outcome = Outcome::Indeterminate,
                    Err(e) => return Err(e.to_string()),
                }
            }
            emit(&serde_json::Value::Object(payload), &out)?;
            Ok(outcome)
        }
        Command::Marginal {
            alpha,
            beta,
            tol,
            out,
        } => {
            let da: wire::StateDto = read_json(&alpha)?;
            let db: wire::StateDto = read_json(&beta)?;
            let sa = wire::state_from_dto(&da, &reg).map_err(|e| e.to_string())?;
            let sb = wire::state_from_dto(&db, &reg).map_err(|e| e.to_string())?;
            match is_tensor_compatible(&sa, &sb, tol).map_err(|e| e.to_string())? {
                TensorCompat::Yes(gamma) => {
                    let payload = json!({
                        "compatible": true,
                        "joint_state": serde_json::to_value(wire::state_to_dto(&gamma)).unwrap(),
                    });
                    emit(&payload, &out)?;
                    Ok(Outcome::Pass)
                }
                TensorCompat::No(cert) => {
                    let check = cert.verify(&sa, &sb, 1e-7).map_err(|e| e.to_string())?;
                    let payload = json!({
                        "compatible": false,
                        "certificate": serde_json::to_value(wire::marginal_cert_to_dto(&cert)).unwrap(),
                        "recomputed_violation": check.recomputed_violation,
                        "certificate_ok": check.ok,
                    });
                    emit(&payload, &out)?;
                    Ok(Outcome::Fail)
                }
                TensorCompat::Unknown => {
                    emit(&json!({"compatible": null}), &out)?;
                    Ok(Outcome::Indeterminate)
                }
            }
        }
        Command::Witness {
            algebra_a,
            algebra_b,
            tol: _,
            out,
        } => {
            let a = FdAlgebra::new(&parse_sizes(&algebra_a)?).map_err(|e| e.to_string())?;
            let b = FdAlgebra::new(&parse_sizes(&algebra_b)?).map_err(|e| e.to_string())?;
            match monogamy_witness(&a, &b) {
                Ok(w) => {
                    let payload =
                        serde_json::to_value(wire::witness_to_dto(&w)).expect("serializable");
                    emit(&payload, &out)?;
                    Ok(Outcome::Pass)
                }
                Err(OpsysError::Indeterminate(msg)) => {
                    emit(&json!({"error": msg}), &out)?;
                    Ok(Outcome::Indeterminate)
                }
                Err(e) => Err(e.to_string()),
            }
        }
        Command::Experiment {
            id,
            config,
            seed,
            tol,
            samples,
            out,
        } => {
            let mut cfg: ExperimentConfig = match (&config, id) {
                (Some(path), _) => read_json(path)?,
                (None, Some(id)) => ExperimentConfig::default_for(id),
                (None, None) => {
                    return Err("provide an experiment id or --config".into());
                }
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(t) = tol {
                cfg.tol = t;
            }
            if let Some(n) = samples {
                cfg.samples = n;
            }
            if let Some(o) = &out {
                cfg.out = Some(o.display().to_string());
            }
            let report = experiments::run(&cfg).map_err(|e| e.to_string())?;
            if let Some(path) = &cfg.out {
                report
                    .write_files(std::path::Path::new(path))
                    .map_err(|e| e.to_string())?;
                eprintln!(
                    "{}: {:?} ({} records, {} failures, {} indeterminate)",
                    report.experiment,
                    report.aggregate.outcome,
                    report.aggregate.total,
                    report.aggregate.failures,
                    report.aggregate.indeterminates
                );
            } else {
                println!("{}", report.to_json());
            }
            Ok(report.aggregate.outcome)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run_command(cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
