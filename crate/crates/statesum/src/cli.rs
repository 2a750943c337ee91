//! Command-line front end.
//!
//! Subcommands load the documented JSON formats, run checks or evaluations,
//! and report every residual.  Exit codes: 0 when all checks pass or an
//! evaluation succeeds, 1 when a check fails, 2 on input errors (bad files,
//! malformed JSON, unusable data).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::euler::{euler_characteristics, z_euler_evaluate};
use crate::frob::check_frobenius_axioms;
use crate::fusioncat::validate_fusion_data;
use crate::io;
use crate::mesh::{builtin_manifold, MoveKind, Triangulation};
use crate::report::Report;
use crate::scalar::{Cx, Rat, Scalar};
use crate::statesum3d::{check_pachner_3d, ten_constraints, tv_evaluate_closed};
use crate::tqft2d::{check_pachner_2d, evaluate_closed_2d};

#[derive(Parser)]
#[command(
    name = "statesum",
    version,
    about = "State-sum invariants of oriented 2- and 3-manifolds",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    run: RunOptions,
}

#[derive(Args)]
struct RunOptions {
    /// Scalar arithmetic: exact rationals or complex floats.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    mode: Mode,
    /// Residual tolerance in float mode (ignored in exact mode).
    #[arg(long, global = true, env = "STATESUM_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
    /// Upper bound on worker threads (reserved; evaluations run on one).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check the defining axioms of an algebra file.
    CheckFrobenius {
        /// Path to an algebra JSON file.
        algebra: PathBuf,
    },
    /// Check well-formedness and the ten defining constraints of a
    /// category file.
    CheckDatum {
        /// Path to a category JSON file.
        category: PathBuf,
    },
    /// Evaluate a closed surface against an algebra.
    Eval2d {
        /// Built-in name (sphere2/s2, torus2/t2, genus<g>) or a file path.
        #[arg(long)]
        surface: String,
        /// Path to an algebra JSON file.
        #[arg(long)]
        algebra: PathBuf,
    },
    /// Evaluate a closed 3-manifold against a category.
    Eval3d {
        /// Built-in name (sphere3/s3, s2xs1, torus3/t3, rp3) or a file path.
        #[arg(long)]
        manifold: String,
        /// Path to a category JSON file.
        #[arg(long)]
        category: PathBuf,
    },
    /// Scramble a closed manifold with random oriented moves and verify the
    /// state sum is unchanged.  Bit-reproducible for a fixed seed in exact
    /// mode.
    PachnerFuzz {
        /// Dimension of the scramble: 2 or 3.
        #[arg(long)]
        dim: u8,
        /// Algebra file (dim 2) or category file (dim 3).
        #[arg(long)]
        data: PathBuf,
        /// Number of random moves to attempt.
        #[arg(long)]
        steps: usize,
        /// Seed for the move sequence.
        #[arg(long)]
        seed: u64,
        /// Base manifold: built-in name or file (default sphere2/sphere3).
        #[arg(long)]
        base: Option<String>,
    },
    /// Per-stratum Euler characteristics and the invertible Euler theory.
    Euler {
        /// Path to a (possibly stratified) complex JSON file.
        #[arg(long)]
        complex: PathBuf,
        /// Path to a weight JSON file.
        #[arg(long)]
        weights: PathBuf,
    },
}

enum Failure {
    /// Unusable input: missing files, malformed JSON, invalid data. Exit 2.
    Input(String),
    /// A check ran and failed. Exit 1.
    Check,
}

type Outcome = Result<(), Failure>;

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

pub fn main_entry() -> i32 {
    let cli = Cli::parse();
    if let Some(jobs) = cli.run.jobs {
        // Bounds any parallel section; harmless if the pool is already set.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    if cli.run.mode == Mode::Float && !(cli.run.tol > 0.0) {
        eprintln!("input error: float mode needs a positive --tol");
        return 2;
    }
    let result = match cli.run.mode {
        Mode::Exact => run_typed::<Rat>(&cli.command, &cli.run, 0.0),
        Mode::Float => run_typed::<Cx>(&cli.command, &cli.run, cli.run.tol),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Check) => 1,
        Err(Failure::Input(message)) => {
            eprintln!("input error: {message}");
            2
        }
    }
}

fn run_typed<S: Scalar>(command: &Command, opts: &RunOptions, tol: f64) -> Outcome {
    match command {
        Command::CheckFrobenius { algebra } => check_frobenius_cmd::<S>(algebra, opts, tol),
        Command::CheckDatum { category } => check_datum_cmd::<S>(category, opts, tol),
        Command::Eval2d { surface, algebra } => eval2d_cmd::<S>(surface, algebra, opts),
        Command::Eval3d { manifold, category } => eval3d_cmd::<S>(manifold, category, opts),
        Command::PachnerFuzz { dim, data, steps, seed, base } => {
            fuzz_cmd::<S>(*dim, data, *steps, *seed, base.as_deref(), opts, tol)
        }
        Command::Euler { complex, weights } => euler_cmd::<S>(complex, weights, opts),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

/// Resolve a built-in manifold alias or fall back to reading a file.
fn resolve_complex(name: &str, expected_dim: u8) -> Result<Triangulation, Failure> {
    let builtin = match name {
        "s2" | "sphere2" => Some(("sphere2", None)),
        "t2" | "torus2" => Some(("torus2", None)),
        "s3" | "sphere3" => Some(("sphere3", None)),
        "s2xs1" => Some(("s2xs1", None)),
        "t3" | "torus3" => Some(("torus3", None)),
        "rp3" => Some(("rp3", None)),
        _ => name
            .strip_prefix("genus")
            .and_then(|g| g.parse::<i64>().ok())
            .map(|g| ("surface_genus", Some(g))),
    };
    let t = match builtin {
        Some((key, param)) => builtin_manifold(key, param).map_err(input)?,
        None => {
            let path = Path::new(name);
            if !path.exists() {
                return Err(Failure::Input(format!(
                    "`{name}` is neither a built-in manifold nor an existing file"
                )));
            }
            io::triangulation_from_json(&read(path)?).map_err(input)?
        }
    };
    if t.dim() != expected_dim {
        return Err(Failure::Input(format!(
            "`{name}` has dimension {}, expected {expected_dim}",
            t.dim()
        )));
    }
    Ok(t)
}

fn emit_reports(reports: &[Report], opts: &RunOptions) {
    match opts.format {
        OutputFormat::Text => {
            for r in reports {
                print!("{}", r.render_text());
            }
        }
        OutputFormat::Json => {
            let value = if reports.len() == 1 {
                serde_json::to_value(&reports[0]).expect("reports serialize")
            } else {
                serde_json::to_value(reports).expect("reports serialize")
            };
            println!("{}", serde_json::to_string_pretty(&value).expect("reports render"));
        }
    }
}

fn emit_value(fields: serde_json::Value, text: String, opts: &RunOptions) {
    match opts.format {
        OutputFormat::Text => println!("{text}"),
        OutputFormat::Json => {
            println!("{}", serde_json::to_string_pretty(&fields).expect("values render"))
        }
    }
}

fn check_frobenius_cmd<S: Scalar>(path: &Path, opts: &RunOptions, tol: f64) -> Outcome {
    let alg = io::algebra_from_json::<S>(&read(path)?).map_err(input)?;
    let check = check_frobenius_axioms(&alg, tol).map_err(input)?;
    let report = Report::from_check("algebra axioms", &check);
    emit_reports(&[report], opts);
    if check.passed() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn check_datum_cmd<S: Scalar>(path: &Path, opts: &RunOptions, tol: f64) -> Outcome {
    let c = io::category_from_json::<S>(&read(path)?).map_err(input)?;
    let validation = validate_fusion_data(&c, tol);
    let well_formed = Report::from_check("well-formedness", &validation);
    if !validation.passed() {
        emit_reports(&[well_formed], opts);
        return Err(Failure::Check);
    }
    let constraints = ten_constraints(&c, tol).map_err(input)?;
    let defining = Report::from_constraints("defining constraints", &constraints);
    let passed = constraints.passed();
    emit_reports(&[well_formed, defining], opts);
    if passed {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn eval2d_cmd<S: Scalar>(surface: &str, algebra: &Path, opts: &RunOptions) -> Outcome {
    let alg = io::algebra_from_json::<S>(&read(algebra)?).map_err(input)?;
    let m = resolve_complex(surface, 2)?;
    let value = evaluate_closed_2d(&alg, &m).map_err(input)?;
    emit_value(
        json!({ "surface": surface, "value": value.to_json(), "rendered": value.render() }),
        value.render(),
        opts,
    );
    Ok(())
}

fn eval3d_cmd<S: Scalar>(manifold: &str, category: &Path, opts: &RunOptions) -> Outcome {
    let c = io::category_from_json::<S>(&read(category)?).map_err(input)?;
    let m = resolve_complex(manifold, 3)?;
    let value = tv_evaluate_closed(&c, &m).map_err(input)?;
    emit_value(
        json!({ "manifold": manifold, "value": value.to_json(), "rendered": value.render() }),
        value.render(),
        opts,
    );
    Ok(())
}

fn fuzz_cmd<S: Scalar>(
    dim: u8,
    data: &Path,
    steps: usize,
    seed: u64,
    base: Option<&str>,
    opts: &RunOptions,
    tol: f64,
) -> Outcome {
    let (before, after, kinds, base_name, fv_before, fv_after): (
        S,
        S,
        Vec<MoveKind>,
        String,
        Vec<usize>,
        Vec<usize>,
    ) = match dim {
        2 => {
            let alg = io::algebra_from_json::<S>(&read(data)?).map_err(input)?;
            let name = base.unwrap_or("sphere2").to_string();
            let m = resolve_complex(&name, 2)?;
            let kinds = vec![MoveKind::Flip22, MoveKind::Expand13, MoveKind::Contract31];
            let scrambled = m.pachner_scramble(&kinds, steps, seed).map_err(input)?;
            let v1 = evaluate_closed_2d(&alg, &m).map_err(input)?;
            let v2 = evaluate_closed_2d(&alg, &scrambled).map_err(input)?;
            (v1, v2, kinds, name, m.f_vector(), scrambled.f_vector())
        }
        3 => {
            let c = io::category_from_json::<S>(&read(data)?).map_err(input)?;
            let name = base.unwrap_or("sphere3").to_string();
            let m = resolve_complex(&name, 3)?;
            let kinds = vec![
                MoveKind::Expand23,
                MoveKind::Contract32,
                MoveKind::Expand14,
                MoveKind::Contract41,
            ];
            let scrambled = m.pachner_scramble(&kinds, steps, seed).map_err(input)?;
            let v1 = tv_evaluate_closed(&c, &m).map_err(input)?;
            let v2 = tv_evaluate_closed(&c, &scrambled).map_err(input)?;
            (v1, v2, kinds, name, m.f_vector(), scrambled.f_vector())
        }
        other => return Err(Failure::Input(format!("--dim must be 2 or 3, got {other}"))),
    };
    let equal = if S::is_exact() { before == after } else { before.approx_eq(&after, tol) };
    let kind_names: Vec<String> = kinds.iter().map(|k| format!("{k:?}")).collect();
    emit_value(
        json!({
            "base": base_name,
            "dim": dim,
            "steps": steps,
            "seed": seed,
            "kinds": kind_names,
            "f_vector_before": fv_before,
            "f_vector_after": fv_after,
            "before": before.to_json(),
            "after": after.to_json(),
            "equal": equal,
        }),
        format!(
            "base {base_name}, {steps} moves, seed {seed}\nbefore  {}  (f-vector {fv_before:?})\nafter   {}  (f-vector {fv_after:?})\n{}",
            before.render(),
            after.render(),
            if equal { "PASS: the state sum is move-invariant" } else { "FAIL: values differ" }
        ),
        opts,
    );
    if equal {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn euler_cmd<S: Scalar>(complex: &Path, weights: &Path, opts: &RunOptions) -> Outcome {
    let x = io::stratified_from_json(&read(complex)?).map_err(input)?;
    let w = io::weights_from_json::<S>(&read(weights)?).map_err(input)?;
    let chis = euler_characteristics(&x);
    let value = z_euler_evaluate(&x, &w).map_err(input)?;
    let strata: Vec<serde_json::Value> = chis
        .iter()
        .map(|c| json!({ "label": c.label, "dim": c.dim, "chi": c.chi, "chi_tilde": c.chi_tilde }))
        .collect();
    let mut text = String::new();
    let width = chis.iter().map(|c| c.label.len()).max().unwrap_or(0);
    for c in &chis {
        text.push_str(&format!(
            "stratum {:width$}  dim {}  chi {:>3}  chi~ {:>3}\n",
            c.label, c.dim, c.chi, c.chi_tilde
        ));
    }
    text.push_str(&format!("value {}", value.render()));
    emit_value(
        json!({ "strata": strata, "value": value.to_json(), "rendered": value.render() }),
        text,
        opts,
    );
    Ok(())
}

/// The Pachner checkers behind one entry point, used by integration tests
/// to exercise the same path the CLI wires up.
pub fn run_pachner_report<S: Scalar>(
    dim: u8,
    algebra: Option<&crate::frob::FrobeniusData<S>>,
    category: Option<&crate::fusioncat::FusionData<S>>,
    base: &Triangulation,
    tol: f64,
) -> Result<Report, String> {
    match dim {
        2 => {
            let alg = algebra.ok_or("an algebra is required in dimension 2")?;
            let report = check_pachner_2d(alg, base, tol).map_err(|e| e.to_string())?;
            Ok(Report::from_constraints("oriented moves (dim 2)", &report))
        }
        3 => {
            let c = category.ok_or("a category is required in dimension 3")?;
            let report = check_pachner_3d(c, tol).map_err(|e| e.to_string())?;
            Ok(Report::from_constraints("oriented moves (dim 3)", &report))
        }
        other => Err(format!("dimension {other} is not supported")),
    }
}

/// Names that `resolve_complex` accepts without touching the filesystem.
pub fn builtin_names() -> BTreeSet<&'static str> {
    ["s2", "sphere2", "t2", "torus2", "s3", "sphere3", "s2xs1", "t3", "torus3", "rp3"]
        .into_iter()
        .collect()
}
