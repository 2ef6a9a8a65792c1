//! `qgame`: canonicalize, compare, value and analyse quantum games from JSON files.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qgame_core::derivation::{derive_value, DerivationError, Precision};
use qgame_core::equivalence::equivalent;
use qgame_core::inference::{gaussian_approx, strategy_eu, sweep, weight_table, InferenceError};
use qgame_core::json::{self, JsonError};
use qgame_core::probability::{check_measure, event_weight, uniqueness_search, CandidateMeasure, ProbabilityError, Verdict};
use qgame_core::value::{build_value, IntegerOracle, MoneyOracle, ValueCut, ValueError};
use qgame_core::{parse_scalar, Game, Measurement, Rational, RepeatedMeasurement};
use serde_json::json;

#[derive(Parser)]
#[command(name = "qgame", version, about = "Exact decision theory for quantum games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the canonical form of a game.
    Canonicalize { game: PathBuf },
    /// Decide whether two games have the same canonical form.
    Equiv { a: PathBuf, b: PathBuf },
    /// Derive the value of a game and check the derivation.
    Derive {
        game: PathBuf,
        /// Largest acceptable width of the value interval.
        #[arg(long, default_value = "1/1000", value_parser = rational, allow_hyphen_values = true)]
        epsilon: Rational,
        /// Write the derivation trace as JSON to this file.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Check the weight measure of a measurement and search for rival measures.
    ProbCheck {
        measurement: PathBuf,
        /// Largest denominator of candidate measures.
        #[arg(long, default_value_t = 12)]
        bound: u64,
    },
    /// Bracket the value of a consequence with a built-in preference oracle.
    ValueFn {
        #[arg(long, value_enum)]
        oracle: Oracle,
        #[arg(long, allow_hyphen_values = true)]
        unit: String,
        #[arg(long, allow_hyphen_values = true)]
        target: String,
        #[arg(long, default_value_t = 10)]
        depth: u32,
    },
    /// Expected utility of betting on observed frequencies.
    Infer {
        #[arg(long)]
        n: u32,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        p: Rational,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        x: Rational,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        y: Rational,
        #[arg(long, value_parser = rational, allow_hyphen_values = true)]
        epsilon: Rational,
        /// Comma-separated repetition counts for a convergence table.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<u32>>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Oracle {
    Integer,
    Money,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_scalar(s).ok_or_else(|| format!("`{s}` is not a rational \"p/q\""))
}

enum Failure {
    /// Input or usage error; exit 2.
    Input(String),
    /// A check did not pass; exit 1.
    Verification(String),
}

impl From<JsonError> for Failure {
    fn from(e: JsonError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_game(path: &Path) -> Result<Game, Failure> {
    json::parse_game(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn derivation_failure(e: DerivationError) -> Failure {
    match e {
        DerivationError::Game(_) | DerivationError::NonPositivePrecision => Failure::Input(e.to_string()),
        other => Failure::Verification(other.to_string()),
    }
}

fn canonicalize(path: &Path) -> Result<String, Failure> {
    let canonical = load_game(path)?.canonicalize().map_err(|e| Failure::Input(e.to_string()))?;
    Ok(json::to_pretty(&json::canonical_to_json(&canonical)))
}

fn equiv(a: &Path, b: &Path) -> Result<String, Failure> {
    let (ga, gb) = (load_game(a)?, load_game(b)?);
    match equivalent(&ga, &gb).map_err(|e| Failure::Input(e.to_string()))? {
        true => Ok("EQUIVALENT\n".into()),
        false => {
            println!("NOT EQUIVALENT");
            Err(Failure::Verification("canonical forms differ".into()))
        }
    }
}

fn derive(path: &Path, epsilon: Rational, trace_out: Option<&Path>) -> Result<String, Failure> {
    let g = load_game(path)?;
    let prec = Precision::new(epsilon).map_err(derivation_failure)?;
    let ((lower, upper), trace) = derive_value(&g, &prec).map_err(derivation_failure)?;
    trace.verify().map_err(derivation_failure)?;
    if let Some(out) = trace_out {
        std::fs::write(out, json::to_pretty(&json::trace_to_json(&trace)))
            .map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
    }
    let report = json!({
        "lower": lower.to_string(),
        "upper": upper.to_string(),
        "games": trace.games.len(),
        "steps": trace.entries.len(),
    });
    Ok(json::to_pretty(&report))
}

/// Event listing is skipped above this many outcomes.
const LIST_LIMIT: usize = 6;

fn prob_check(path: &Path, bound: u64) -> Result<String, Failure> {
    let m: Measurement = json::parse_measurement(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let probability = |e: ProbabilityError| Failure::Input(e.to_string());
    let mut out = String::new();
    let weights = m.weights();
    let outcomes: Vec<String> = weights.iter().map(|(x, w)| format!("{x} ({w})")).collect();
    writeln!(out, "outcomes: {}", outcomes.join(", ")).expect("string write");

    let events = m.power_set().map_err(probability)?;
    if weights.len() <= LIST_LIMIT {
        let mut ranked: Vec<(Rational, String)> = events
            .iter()
            .map(|e| {
                let members: Vec<String> = e.members().iter().map(|x| x.to_string()).collect();
                (event_weight(e), format!("{{{}}}", members.join(", ")))
            })
            .collect();
        ranked.sort();
        writeln!(out, "order:").expect("string write");
        for (k, (w, name)) in ranked.iter().enumerate() {
            let rel = match k {
                0 => " ",
                _ if ranked[k - 1].0 == *w => "~",
                _ => "<",
            };
            writeln!(out, "  {rel} {name} {w}").expect("string write");
        }
    } else {
        writeln!(out, "order: {} events, listing omitted", events.len()).expect("string write");
    }

    let report = check_measure(&events, &CandidateMeasure::weights_of(&m)).map_err(probability)?;
    let holds = |b: bool| if b { "holds" } else { "fails" };
    writeln!(
        out,
        "weight measure: order {}, additivity {}, normalization {}",
        holds(report.order.holds),
        holds(report.additive.holds),
        holds(report.normalized.holds)
    )
    .expect("string write");

    let verdict = match uniqueness_search(&m, bound) {
        Ok(r) => r,
        Err(ProbabilityError::TooLarge(k, limit)) => {
            writeln!(out, "uniqueness (bound {bound}): INCONCLUSIVE: {k} outcomes exceeds the search limit of {limit}")
                .expect("string write");
            return Ok(out);
        }
        Err(e) => return Err(probability(e)),
    };
    match verdict.verdict {
        Verdict::Unique => {
            writeln!(out, "uniqueness (bound {bound}): UNIQUE").expect("string write");
            Ok(out)
        }
        Verdict::Inconclusive(why) => {
            writeln!(out, "uniqueness (bound {bound}): INCONCLUSIVE: {why}").expect("string write");
            Ok(out)
        }
        Verdict::Violation => {
            writeln!(out, "uniqueness (bound {bound}): VIOLATION").expect("string write");
            for c in &verdict.candidates {
                writeln!(out, "  candidate {}", json::scalar_map(&c.assignment)).expect("string write");
            }
            print!("{out}");
            Err(Failure::Verification(format!("{} candidate measures survive", verdict.candidates.len())))
        }
    }
}

fn cut_report<E>(cut: &ValueCut<Rational, E>, unit: &str, target: &str, depth: u32) -> String {
    json::to_pretty(&json!({
        "unit": unit,
        "target": target,
        "depth": depth,
        "lower": cut.lower.to_string(),
        "upper": cut.upper.to_string(),
    }))
}

fn value_failure(e: ValueError) -> Failure {
    match e {
        ValueError::NotPositiveUnit | ValueError::InvalidDepth => Failure::Input(e.to_string()),
        other => Failure::Verification(other.to_string()),
    }
}

fn value_fn(oracle: Oracle, unit: &str, target: &str, depth: u32) -> Result<String, Failure> {
    match oracle {
        Oracle::Integer => {
            let int = |s: &str| s.parse::<i64>().map_err(|_| Failure::Input(format!("`{s}` is not an integer")));
            let (u, t) = (i128::from(int(unit)?), i128::from(int(target)?));
            let cut = build_value(&IntegerOracle, &u, &t, depth).map_err(value_failure)?;
            Ok(cut_report(&cut, unit, target, depth))
        }
        Oracle::Money => {
            let (u, t) = (rational(unit).map_err(Failure::Input)?, rational(target).map_err(Failure::Input)?);
            let cut = build_value(&MoneyOracle::new(), &u, &t, depth).map_err(value_failure)?;
            Ok(cut_report(&cut, unit, target, depth))
        }
    }
}

fn approx(v: f64) -> String {
    format!("{v:.11e} (approx)")
}

fn infer(rm: RepeatedMeasurement, ns: Option<Vec<u32>>) -> Result<String, Failure> {
    let input = |e: InferenceError| Failure::Input(e.to_string());
    let mut out = String::new();
    if let Some(ns) = ns {
        writeln!(out, "n\texact\tgaussian\tdeviation").expect("string write");
        for row in sweep(&rm, &ns).map_err(input)? {
            writeln!(out, "{}\t{}\t{}\t{:.11e}", row.n, row.exact, approx(row.approx), row.deviation).expect("string write");
        }
        return Ok(out);
    }
    writeln!(out, "p0 = {}", rm.threshold().map_err(input)?).expect("string write");
    writeln!(out, "m\tweight\taccepted").expect("string write");
    for (m, w) in weight_table(&rm).map_err(input)? {
        writeln!(out, "{m}\t{w}\t{}", if rm.accepts(m).map_err(input)? { "yes" } else { "no" }).expect("string write");
    }
    writeln!(out, "exact EU = {}", strategy_eu(&rm).map_err(input)?).expect("string write");
    match gaussian_approx(&rm) {
        Ok(v) => writeln!(out, "gaussian = {}", approx(v)).expect("string write"),
        Err(e) => writeln!(out, "gaussian = unavailable: {e}").expect("string write"),
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<String, Failure> {
    match cli.command {
        Command::Canonicalize { game } => canonicalize(&game),
        Command::Equiv { a, b } => equiv(&a, &b),
        Command::Derive { game, epsilon, trace_out } => derive(&game, epsilon, trace_out.as_deref()),
        Command::ProbCheck { measurement, bound } => prob_check(&measurement, bound),
        Command::ValueFn { oracle, unit, target, depth } => value_fn(oracle, &unit, &target, depth),
        Command::Infer { n, p, x, y, epsilon, sweep } => {
            let rm = RepeatedMeasurement::new(n, p, x, y, epsilon).map_err(|e| Failure::Input(e.to_string()))?;
            infer(rm, sweep)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
