//! Command-line front end.
//!
//! Every invocation prints one JSON report on stdout carrying at least
//! `{tool_version, command, pass}`. Exit codes: 0 when everything passes,
//! 1 on a mathematical failure (a violation or a failed certificate), 2 on
//! input or usage errors. A directory argument runs the command on each
//! matrix file inside it; results keep the sorted file order.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::determinants::{
    det_bareiss, det_cofactor, det_dodgson, det_pivoted, verify_cofactor_symmetry,
    verify_dodgson_identity,
};
use crate::error::Error;
use crate::generators::{gen_symmetrizable, gen_violation, Corruption, GenSpec, Pattern};
use crate::io::{parse_matrix, serialize_matrix, Format};
use crate::matrix::{DenseMatrix, Matrix};
use crate::scalar::{parse_rational, Rational, Regime, Scalar};
use crate::spectra::{
    alternation_certificates, eig_symmetrizable, interlacing_with_parent, minor_sign_uniformity,
    minor_sum_identity, symmetrized,
};
use crate::symmetrizability::compute_symmetrizer;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SEED_ENV: &str = "SYMX_SEED";

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "symx", version, about = "Symmetrizable matrix toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide symmetrizability and print the symmetrizer or a violation witness.
    Check(InputArgs),
    /// Print the symmetrizer and the symmetric similar matrix.
    Symmetrize(InputArgs),
    /// Compute the real spectrum, optionally with certificates.
    Eig(EigArgs),
    /// Interlacing certificates for every single deletion.
    Interlace(InputArgs),
    /// Check a determinant identity on random draws.
    Verify(VerifyArgs),
    /// Compute a determinant.
    Det(DetArgs),
    /// Generate a matrix file and a JSON sidecar describing it.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum RegimeArg {
    Exact,
    Float,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Exact => Regime::ExactRational,
            RegimeArg::Float => Regime::Float64,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FormatArg {
    Mm,
    Csv,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Mm => Format::MatrixMarket,
            FormatArg::Csv => Format::Csv,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Matrix file, or a directory of matrix files.
    pub path: PathBuf,
    #[arg(long, value_enum, default_value = "exact")]
    pub regime: RegimeArg,
    /// Defaults to the file extension (.mtx/.mm Matrix Market, else CSV).
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
}

#[derive(Args, Debug, Clone)]
pub struct EigArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub certify_interlacing: bool,
    #[arg(long)]
    pub certify_alternation: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Identity {
    Dodgson,
    Lemma,
    Minors,
    Altern,
}

#[derive(Args, Debug, Clone)]
pub struct VerifyArgs {
    /// Matrix file; omit to verify on a generated matrix (--n, --pattern).
    pub path: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub identity: Identity,
    #[arg(long, default_value_t = 10)]
    pub trials: usize,
    /// Seed for the random draws (and for --n generation). SYMX_SEED overrides it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    pub regime: RegimeArg,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value = "dense")]
    pub pattern: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum DetMethod {
    Dodgson,
    Bareiss,
    Cofactor,
}

#[derive(Args, Debug, Clone)]
pub struct DetArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "bareiss")]
    pub method: DetMethod,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum CorruptionArg {
    Signflip,
    Cyclebreak,
    Onesidedzero,
}

impl From<CorruptionArg> for Corruption {
    fn from(c: CorruptionArg) -> Self {
        match c {
            CorruptionArg::Signflip => Corruption::SignFlip,
            CorruptionArg::Cyclebreak => Corruption::CycleBreak,
            CorruptionArg::Onesidedzero => Corruption::OneSidedZero,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct GenArgs {
    #[arg(long)]
    pub n: usize,
    /// dense, banded:W, or paper.
    #[arg(long, default_value = "dense")]
    pub pattern: String,
    /// Diagonal (a,b,c) for the paper pattern.
    #[arg(long, default_value = "0,0,0")]
    pub abc: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum)]
    pub violation: Option<CorruptionArg>,
    #[arg(long, value_enum, default_value = "exact")]
    pub regime: RegimeArg,
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    #[arg(long, default_value_t = 5)]
    pub magnitude: u32,
}

/// Result of one command on one input.
enum Outcome {
    Done { pass: bool, result: Value },
    Invalid(Error),
}

impl Outcome {
    fn code(&self) -> i32 {
        match self {
            Outcome::Done { pass: true, .. } => EXIT_PASS,
            Outcome::Done { pass: false, .. } => EXIT_FAIL,
            Outcome::Invalid(Error::NotSymmetrizable { .. }) => EXIT_FAIL,
            Outcome::Invalid(Error::NoConvergence { .. }) => EXIT_FAIL,
            Outcome::Invalid(_) => EXIT_USAGE,
        }
    }
}

impl From<Result<(bool, Value), Error>> for Outcome {
    fn from(r: Result<(bool, Value), Error>) -> Self {
        match r {
            Ok((pass, result)) => Outcome::Done { pass, result },
            Err(e) => Outcome::Invalid(e),
        }
    }
}

pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Parses `args` (including the program name), runs the command, prints the
/// report, and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let _ = e.print();
            return code;
        }
    };
    let seed_override = match std::env::var(SEED_ENV) {
        Ok(v) => match v.trim().parse::<u64>() {
            Ok(s) => Some(s),
            Err(_) => {
                eprintln!("{SEED_ENV} must be an unsigned integer, got '{v}'");
                return EXIT_USAGE;
            }
        },
        Err(_) => None,
    };
    let (code, report) = execute(cli.command, seed_override);
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("reports are valid JSON")
    );
    code
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Check(_) => "check",
        Command::Symmetrize(_) => "symmetrize",
        Command::Eig(_) => "eig",
        Command::Interlace(_) => "interlace",
        Command::Verify(_) => "verify",
        Command::Det(_) => "det",
        Command::Gen(_) => "gen",
    }
}

/// Runs a command and returns `(exit code, report)`.
pub fn execute(cmd: Command, seed_override: Option<u64>) -> (i32, Value) {
    let name = command_name(&cmd);
    let started = Instant::now();
    let (code, input, body) = match cmd {
        Command::Gen(args) => {
            let seed = seed_override.unwrap_or(args.seed);
            single(json!({"seed": seed}), cmd_gen(&args, seed).into())
        }
        Command::Verify(args) if args.path.is_none() => {
            let seed = seed_override.unwrap_or(args.seed);
            let outcome: Outcome = generated_input(&args, seed)
                .and_then(|m| cmd_verify(&m, &args, seed))
                .into();
            single(json!({"n": args.n, "pattern": args.pattern, "seed": seed}), outcome)
        }
        Command::Verify(args) => {
            let seed = seed_override.unwrap_or(args.seed);
            let path = args.path.clone().expect("checked above");
            let regime = args.regime.into();
            let format = args.format.map(Format::from);
            over_inputs(&path, regime, format, |m| cmd_verify(m, &args, seed))
        }
        Command::Check(i) => over_inputs(&i.path, i.regime.into(), i.format.map(Into::into), cmd_check),
        Command::Symmetrize(i) => {
            over_inputs(&i.path, i.regime.into(), i.format.map(Into::into), cmd_symmetrize)
        }
        Command::Interlace(i) => {
            over_inputs(&i.path, i.regime.into(), i.format.map(Into::into), |m| {
                cmd_eig(m, true, false)
            })
        }
        Command::Eig(e) => {
            let i = &e.input;
            over_inputs(&i.path, i.regime.into(), i.format.map(Into::into), |m| {
                cmd_eig(m, e.certify_interlacing, e.certify_alternation)
            })
        }
        Command::Det(d) => {
            let i = &d.input;
            over_inputs(&i.path, i.regime.into(), i.format.map(Into::into), |m| {
                cmd_det(m, d.method)
            })
        }
    };
    let mut report = json!({
        "tool_version": TOOL_VERSION,
        "command": name,
        "pass": code == EXIT_PASS,
        "input": input,
        "wall_time_ms": started.elapsed().as_secs_f64() * 1e3,
    });
    let obj = report.as_object_mut().expect("report is an object");
    for (k, v) in body.as_object().cloned().unwrap_or_default() {
        obj.insert(k, v);
    }
    (code, report)
}

fn outcome_body(outcome: &Outcome) -> Value {
    match outcome {
        Outcome::Done { result, .. } => json!({ "result": result }),
        Outcome::Invalid(Error::NotSymmetrizable { witness }) => json!({
            "error": "not symmetrizable",
            "result": { "verdict": witness },
        }),
        Outcome::Invalid(e) => {
            eprintln!("error: {e}");
            json!({ "error": e.to_string() })
        }
    }
}

fn single(input: Value, outcome: Outcome) -> (i32, Value, Value) {
    (outcome.code(), input, outcome_body(&outcome))
}

fn read_input(path: &Path, regime: Regime, format: Option<Format>) -> Result<DenseMatrix, Error> {
    let bytes = std::fs::read(path)?;
    let format = format.unwrap_or_else(|| Format::from_path(path));
    parse_matrix(&bytes, format, regime)
}

fn is_matrix_file(path: &Path) -> bool {
    path.is_file()
        && matches!(
            path.extension().and_then(|e| e.to_str()),
            Some("csv") | Some("mtx") | Some("mm")
        )
}

fn over_inputs<F>(
    path: &Path,
    regime: Regime,
    format: Option<Format>,
    f: F,
) -> (i32, Value, Value)
where
    F: Fn(&DenseMatrix) -> Result<(bool, Value), Error> + Sync,
{
    let run_one = |p: &Path| -> Outcome {
        read_input(p, regime, format).and_then(|m| f(&m)).into()
    };
    if !path.is_dir() {
        let input = json!(path.display().to_string());
        return single(input, run_one(path));
    }
    let mut files: Vec<PathBuf> = match std::fs::read_dir(path) {
        Ok(entries) => entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| is_matrix_file(p))
            .collect(),
        Err(e) => return single(json!(path.display().to_string()), Outcome::Invalid(e.into())),
    };
    files.sort();
    let outcomes: Vec<(PathBuf, Outcome)> = files
        .into_par_iter()
        .map(|p| {
            let o = run_one(&p);
            (p, o)
        })
        .collect();
    let code = outcomes
        .iter()
        .map(|(_, o)| o.code())
        .max_by_key(|&c| match c {
            EXIT_USAGE => 2,
            EXIT_FAIL => 1,
            _ => 0,
        })
        .unwrap_or(EXIT_PASS);
    let results: Vec<Value> = outcomes
        .iter()
        .map(|(p, o)| {
            let mut entry = json!({
                "input": p.display().to_string(),
                "exit_code": o.code(),
                "pass": o.code() == EXIT_PASS,
            });
            let obj = entry.as_object_mut().expect("object");
            for (k, v) in outcome_body(o).as_object().cloned().unwrap_or_default() {
                obj.insert(k, v);
            }
            entry
        })
        .collect();
    (
        code,
        json!(path.display().to_string()),
        json!({ "batch": results }),
    )
}

fn cmd_check(m: &DenseMatrix) -> Result<(bool, Value), Error> {
    let verdict = match m {
        DenseMatrix::Exact(a) => compute_symmetrizer(a).to_json(),
        DenseMatrix::Float(a) => compute_symmetrizer(a).to_json(),
    };
    let pass = verdict["status"] == "symmetrizable";
    Ok((pass, json!({ "order": m.order(), "verdict": verdict })))
}

fn cmd_symmetrize(m: &DenseMatrix) -> Result<(bool, Value), Error> {
    let (d, t) = match m {
        DenseMatrix::Exact(a) => symmetrized(a)?,
        DenseMatrix::Float(a) => symmetrized(a)?,
    };
    Ok((
        true,
        json!({ "symmetrizer": d.to_json(), "symmetrized": t }),
    ))
}

fn cmd_eig(m: &DenseMatrix, interlacing: bool, alternation: bool) -> Result<(bool, Value), Error> {
    match m {
        DenseMatrix::Exact(a) => eig_report(a, interlacing, alternation),
        DenseMatrix::Float(a) => eig_report(a, interlacing, alternation),
    }
}

fn eig_report<T: Scalar>(
    a: &Matrix<T>,
    interlacing: bool,
    alternation: bool,
) -> Result<(bool, Value), Error> {
    let eig = eig_symmetrizable(a)?;
    let spectrum = eig.spectrum;
    let mut pass = true;
    let mut result = json!({
        "spectrum": spectrum.values,
        "clusters": spectrum.clusters(),
        "residual_norm": eig.residual_norm,
    });
    if interlacing {
        let certs = interlacing_with_parent(a, &spectrum)?;
        pass &= certs.iter().all(|c| c.pass);
        result["interlacing"] = serde_json::to_value(&certs).expect("serializable");
    }
    if alternation {
        let certs = alternation_certificates(a, &spectrum)?;
        pass &= certs.iter().all(|c| c.pass);
        result["alternation"] = serde_json::to_value(&certs).expect("serializable");
    }
    Ok((pass, result))
}

fn cmd_det(m: &DenseMatrix, method: DetMethod) -> Result<(bool, Value), Error> {
    let result = match (m, method) {
        (DenseMatrix::Exact(a), DetMethod::Dodgson) => {
            let (det, trace) = det_dodgson(a);
            json!({
                "determinant": det.to_json(),
                "fallback_used": trace.fallback_used,
                "trace": trace,
            })
        }
        (DenseMatrix::Float(a), DetMethod::Dodgson) => {
            let (det, trace) = det_dodgson(a);
            json!({
                "determinant": det,
                "fallback_used": trace.fallback_used,
                "trace": trace,
            })
        }
        (DenseMatrix::Exact(a), DetMethod::Bareiss) => json!({ "determinant": det_bareiss(a).to_json() }),
        (DenseMatrix::Float(a), DetMethod::Bareiss) => json!({ "determinant": det_pivoted(a) }),
        (DenseMatrix::Exact(a), DetMethod::Cofactor) => {
            json!({ "determinant": det_cofactor(a)?.to_json() })
        }
        (DenseMatrix::Float(a), DetMethod::Cofactor) => json!({ "determinant": det_cofactor(a)? }),
    };
    Ok((true, result))
}

fn parse_pattern(text: &str, abc: &str) -> Result<Pattern, Error> {
    let text = text.trim().to_ascii_lowercase();
    if text == "dense" {
        return Ok(Pattern::Dense);
    }
    if text == "paper" {
        let parts: Vec<Rational> = abc
            .split(',')
            .map(|s| {
                parse_rational(s).ok_or_else(|| Error::InvalidSpec(format!("bad diagonal value '{s}'")))
            })
            .collect::<Result<_, _>>()?;
        let [a, b, c]: [Rational; 3] = parts
            .try_into()
            .map_err(|_| Error::InvalidSpec("--abc needs three values".into()))?;
        return Ok(Pattern::PaperExample { a, b, c });
    }
    if let Some(w) = text.strip_prefix("banded:") {
        let w = w
            .parse::<usize>()
            .map_err(|_| Error::InvalidSpec(format!("bad bandwidth '{w}'")))?;
        return Ok(Pattern::Banded(w));
    }
    Err(Error::InvalidSpec(format!("unknown pattern '{text}'")))
}

fn cmd_gen(args: &GenArgs, seed: u64) -> Result<(bool, Value), Error> {
    let spec = GenSpec {
        order: args.n,
        pattern: parse_pattern(&args.pattern, &args.abc)?,
        seed,
        regime: args.regime.into(),
        magnitude: args.magnitude,
    };
    let matrix = match args.violation {
        Some(kind) => gen_violation(&spec, kind.into())?,
        None => gen_symmetrizable(&spec)?,
    };
    let format = args
        .format
        .map(Format::from)
        .unwrap_or_else(|| Format::from_path(&args.out));
    std::fs::write(&args.out, serialize_matrix(&matrix, format))?;
    let mut sidecar_path = args.out.clone().into_os_string();
    sidecar_path.push(".json");
    let sidecar_path = PathBuf::from(sidecar_path);
    let sidecar = json!({
        "tool_version": TOOL_VERSION,
        "spec": spec.to_json(),
        "violation": args.violation.map(Corruption::from),
        "format": format.extension(),
    });
    std::fs::write(
        &sidecar_path,
        serde_json::to_string_pretty(&sidecar).expect("valid JSON"),
    )?;
    Ok((
        true,
        json!({
            "path": args.out.display().to_string(),
            "sidecar": sidecar_path.display().to_string(),
            "spec": sidecar["spec"],
            "violation": sidecar["violation"],
        }),
    ))
}

fn generated_input(args: &VerifyArgs, seed: u64) -> Result<DenseMatrix, Error> {
    let n = args
        .n
        .ok_or_else(|| Error::InvalidSpec("verify needs a matrix path or --n".into()))?;
    let spec = GenSpec {
        order: n,
        pattern: parse_pattern(&args.pattern, "0,0,0")?,
        seed,
        regime: args.regime.into(),
        magnitude: 5,
    };
    gen_symmetrizable(&spec)
}

fn cmd_verify(m: &DenseMatrix, args: &VerifyArgs, seed: u64) -> Result<(bool, Value), Error> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match m {
        DenseMatrix::Exact(a) => verify_typed(a, args, &mut rng, |rng| {
            Rational::new(
                rng.random_range(-20i64..=20).into(),
                rng.random_range(1i64..=7).into(),
            )
        }),
        DenseMatrix::Float(a) => {
            let bound = a.inf_norm().max(1.0);
            verify_typed(a, args, &mut rng, move |rng| rng.random_range(-bound..=bound))
        }
    }
}

fn random_pair(rng: &mut ChaCha8Rng, m: usize) -> (usize, usize) {
    let k = rng.random_range(1..=m);
    let mut l = rng.random_range(1..m);
    if l >= k {
        l += 1;
    }
    (k, l)
}

fn verify_typed<T: Scalar>(
    a: &Matrix<T>,
    args: &VerifyArgs,
    rng: &mut ChaCha8Rng,
    draw_lambda: impl Fn(&mut ChaCha8Rng) -> T,
) -> Result<(bool, Value), Error> {
    let m = a.order();
    let identity_name = format!("{:?}", args.identity).to_ascii_lowercase();
    match args.identity {
        Identity::Dodgson | Identity::Lemma => {
            if m < 2 || (args.identity == Identity::Dodgson && m < 3) {
                return Err(Error::InvalidIndex(format!(
                    "identity '{identity_name}' needs a larger matrix (order {m})"
                )));
            }
            let mut reports = Vec::new();
            let mut failures = 0;
            let mut max_residual = T::zero();
            for _ in 0..args.trials {
                let (k, l) = random_pair(rng, m);
                let (holds, residual, report) = if args.identity == Identity::Dodgson {
                    let r = verify_dodgson_identity(a, k.min(l), k.max(l))?;
                    (r.holds(), r.residual.clone(), serde_json::to_value(&r))
                } else {
                    let r = verify_cofactor_symmetry(a, k, l, &draw_lambda(rng))?;
                    (r.holds(), r.residual.clone(), serde_json::to_value(&r))
                };
                if !holds {
                    failures += 1;
                }
                if residual.abs() > max_residual.abs() {
                    max_residual = residual;
                }
                reports.push(report.expect("serializable"));
            }
            Ok((
                failures == 0,
                json!({
                    "identity": identity_name,
                    "trials": args.trials,
                    "failures": failures,
                    "max_residual": max_residual.to_json(),
                    "reports": reports,
                }),
            ))
        }
        Identity::Minors => {
            let spectrum = eig_symmetrizable(a)?.spectrum;
            let mut pass = true;
            let mut signs = Vec::new();
            let mut sums = Vec::new();
            for (idx, &lambda) in spectrum.values.iter().enumerate() {
                let r = minor_sign_uniformity(a, lambda)?;
                pass &= r.uniform;
                signs.push(r);
                if spectrum.multiplicity_at(idx + 1) == 1 {
                    let s = minor_sum_identity(a, &spectrum, idx + 1)?;
                    pass &= s.pass;
                    sums.push(s);
                }
            }
            Ok((
                pass,
                json!({
                    "identity": identity_name,
                    "spectrum": spectrum.values,
                    "sign_uniformity": signs,
                    "minor_sums": sums,
                }),
            ))
        }
        Identity::Altern => {
            let spectrum = eig_symmetrizable(a)?.spectrum;
            let certs = alternation_certificates(a, &spectrum)?;
            let pass = certs.iter().all(|c| c.pass);
            Ok((
                pass,
                json!({
                    "identity": identity_name,
                    "spectrum": spectrum.values,
                    "certificates": certs,
                }),
            ))
        }
    }
}

