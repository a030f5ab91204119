//! Command line solver for abstract argumentation frameworks.
//!
//! Subcommands parse a framework (TGF, APX, or APX extended with joint
//! attacks), then validate it, compute the extensions of a semantics,
//! iterate the value equations numerically, enumerate loop busters,
//! compare two semantics, or rewrite joint attacks into plain ones.
//! Results go to standard output as one JSON document ending in a
//! newline; `--text` switches to a human-readable form. Repeated runs on
//! the same input produce byte-identical output.
//!
//! Exit codes: 0 success (for `compare`, equal results), 1 usage error,
//! 2 input or parse error, 3 unequal `compare` results, 4 solver
//! non-convergence or a size bound hit.

use std::fmt::Write as _;
use std::fs;
use std::io::Read as _;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use afeq::af::{ArgumentSet, Format, Framework, ParseError};
use afeq::equations::{build_equations, perturb, Combinator, EqError, EquationSystem};
use afeq::joint::{encode_standard, joint_equations, parse_joint, JointError, NodeOrigin};
use afeq::loops::{enumerate_busters_bounded, BusterKind, LoopsError, BUSTER_ENUMERATION_BOUND};
use afeq::semantics::{
    compare, solve_bounded, LbTrace, Semantics, SemanticsError, CLASSICAL_ENUMERATION_BOUND,
    RECURSIVE_SEMANTICS_BOUND,
};
use afeq::solver::{iterate_fixed_point, IterationParams, SolverError, Valuation};

/// Extension and equation solver for argumentation frameworks.
#[derive(Parser)]
#[command(name = "afeq", version)]
struct Cli {
    /// Input format; inferred from the file extension when omitted.
    #[arg(long, global = true, value_enum)]
    format: Option<FormatArg>,
    /// Human-readable output instead of JSON.
    #[arg(long, global = true)]
    text: bool,
    /// Overrides the built-in enumeration size bounds.
    #[arg(long, global = true)]
    size_bound: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parses the input and reports its size.
    Validate { input: String },
    /// Computes the extensions of a semantics.
    Solve {
        /// One of grounded, complete, stable, preferred, cf2, lb1, lb2,
        /// lb3, lb4.
        #[arg(long)]
        sem: Semantics,
        /// Also emits the loop-busting runs behind the extensions.
        #[arg(long)]
        trace: bool,
        input: String,
    },
    /// Iterates the value equations to a numeric solution.
    Numeric {
        /// Equation shape: max keeps the strongest attacker, inverse
        /// multiplies the attackers away.
        #[arg(long, value_enum, default_value = "max")]
        eq: EqArg,
        /// Convergence threshold on the residual.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Update step blend in (0,1].
        #[arg(long, default_value_t = 0.5)]
        damping: f64,
        /// Comma-separated arguments clamped to zero.
        #[arg(long, value_delimiter = ',')]
        force_zero: Vec<String>,
        input: String,
    },
    /// Enumerates loop busters.
    Busters {
        #[arg(long, value_enum)]
        kind: KindArg,
        input: String,
    },
    /// Compares the extensions of two semantics on one input.
    Compare {
        #[arg(long)]
        left: Semantics,
        #[arg(long)]
        right: Semantics,
        input: String,
    },
    /// Rewrites joint attacks into plain attacks over helper nodes.
    EncodeJoint { input: String },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Tgf,
    Apx,
    Japx,
}

impl FormatArg {
    fn name(self) -> &'static str {
        match self {
            FormatArg::Tgf => "tgf",
            FormatArg::Apx => "apx",
            FormatArg::Japx => "japx",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum EqArg {
    Max,
    Inverse,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Absolute,
    Relative,
    CompAbsolute,
    CompRelative,
}

/// A failed run, bucketed by exit code.
enum Failure {
    /// Exit 1: bad parameters.
    Usage(String),
    /// Exit 2: unreadable or unparsable input.
    Input(String),
    /// Exit 4: iteration gave up or an enumeration bound was hit.
    Limit(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Limit(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Limit(m) => m,
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<JointError> for Failure {
    fn from(e: JointError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<EqError> for Failure {
    fn from(e: EqError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<LoopsError> for Failure {
    fn from(e: LoopsError) -> Self {
        match e {
            LoopsError::TooManyArguments { .. } => Failure::Limit(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::NonConvergence { .. } | SolverError::TooManyVariables { .. } => {
                Failure::Limit(e.to_string())
            }
            SolverError::InvalidParams(_) => Failure::Usage(e.to_string()),
            SolverError::Eq(inner) => inner.into(),
        }
    }
}

impl From<SemanticsError> for Failure {
    fn from(e: SemanticsError) -> Self {
        match e {
            SemanticsError::TooManyArguments { .. } => Failure::Limit(e.to_string()),
            SemanticsError::Solver(inner) => inner.into(),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // help and version requests land here too and must exit 0
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn execute(cli: &Cli) -> Result<(String, u8), Failure> {
    match &cli.command {
        Command::Validate { input } => run_validate(input, cli),
        Command::Solve { sem, trace, input } => run_solve(*sem, *trace, input, cli),
        Command::Numeric {
            eq,
            tol,
            damping,
            force_zero,
            input,
        } => run_numeric(*eq, *tol, *damping, force_zero, input, cli),
        Command::Busters { kind, input } => run_busters(*kind, input, cli),
        Command::Compare { left, right, input } => run_compare(*left, *right, input, cli),
        Command::EncodeJoint { input } => run_encode_joint(input, cli),
    }
}

fn infer_format(path: &str) -> Result<FormatArg, Failure> {
    if path == "-" {
        return Err(Failure::Input(
            "reading standard input needs an explicit --format".into(),
        ));
    }
    match std::path::Path::new(path)
        .extension()
        .and_then(|e| e.to_str())
    {
        Some("tgf") => Ok(FormatArg::Tgf),
        Some("apx") => Ok(FormatArg::Apx),
        Some("japx") => Ok(FormatArg::Japx),
        _ => Err(Failure::Input(format!(
            "cannot infer the input format of `{path}`; pass --format"
        ))),
    }
}

fn read_input(path: &str, cli: &Cli) -> Result<(String, FormatArg), Failure> {
    let format = match cli.format {
        Some(f) => f,
        None => infer_format(path)?,
    };
    let text = if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| Failure::Input(format!("standard input: {e}")))?;
        buf
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))?
    };
    Ok((text, format))
}

fn load_plain(path: &str, cli: &Cli) -> Result<Framework, Failure> {
    let (text, format) = read_input(path, cli)?;
    let format = match format {
        FormatArg::Tgf => Format::Tgf,
        FormatArg::Apx => Format::Apx,
        FormatArg::Japx => {
            return Err(Failure::Input(
                "joint input is not supported by this command; run encode-joint first".into(),
            ))
        }
    };
    Ok(Framework::parse(&text, format)?)
}

fn emit(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("in-memory values serialize");
    s.push('\n');
    s
}

fn set_text(s: &ArgumentSet) -> String {
    format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(", "))
}

fn bounds(cli: &Cli) -> (usize, usize) {
    (
        cli.size_bound.unwrap_or(CLASSICAL_ENUMERATION_BOUND),
        cli.size_bound.unwrap_or(RECURSIVE_SEMANTICS_BOUND),
    )
}

fn run_validate(input: &str, cli: &Cli) -> Result<(String, u8), Failure> {
    let (text, format) = read_input(input, cli)?;
    let (arguments, attacks) = match format {
        FormatArg::Tgf => {
            let f = Framework::parse(&text, Format::Tgf)?;
            (f.args().len(), f.attacks().len())
        }
        FormatArg::Apx => {
            let f = Framework::parse(&text, Format::Apx)?;
            (f.args().len(), f.attacks().len())
        }
        FormatArg::Japx => {
            let jf = parse_joint(&text)?;
            (jf.args().len(), jf.attacks().len())
        }
    };
    let out = if cli.text {
        format!(
            "ok: {arguments} arguments, {attacks} attacks ({})\n",
            format.name()
        )
    } else {
        emit(&json!({
            "ok": true,
            "format": format.name(),
            "arguments": arguments,
            "attacks": attacks,
        }))
    };
    Ok((out, 0))
}

fn trace_lines(out: &mut String, runs: &[LbTrace]) {
    for (i, run) in runs.iter().enumerate() {
        let busters: Vec<String> = run.steps.iter().map(|s| set_text(&s.buster)).collect();
        let _ = writeln!(
            out,
            "run {}: busters [{}], extension {}",
            i + 1,
            busters.join(", "),
            set_text(&run.extension)
        );
    }
}

fn run_solve(sem: Semantics, trace: bool, input: &str, cli: &Cli) -> Result<(String, u8), Failure> {
    let f = load_plain(input, cli)?;
    let (classical, recursive) = bounds(cli);
    let (exts, traces) = solve_bounded(&f, sem, classical, recursive)?;
    let out = if cli.text {
        let mut out = format!(
            "{}: {} extension{}\n",
            exts.semantics,
            exts.extensions.len(),
            if exts.extensions.len() == 1 { "" } else { "s" }
        );
        for e in &exts.extensions {
            let _ = writeln!(out, "{}", set_text(e));
        }
        if trace {
            if let Some(runs) = &traces {
                trace_lines(&mut out, runs);
            }
        }
        out
    } else {
        let mut doc = exts.to_json();
        if trace {
            if let Some(runs) = &traces {
                doc["traces"] = Value::Array(runs.iter().map(|t| t.to_json()).collect());
            }
        }
        emit(&doc)
    };
    Ok((out, 0))
}

fn run_numeric(
    eq: EqArg,
    tol: f64,
    damping: f64,
    force_zero: &[String],
    input: &str,
    cli: &Cli,
) -> Result<(String, u8), Failure> {
    let (text, format) = read_input(input, cli)?;
    let kind = match eq {
        EqArg::Max => Combinator::Max,
        EqArg::Inverse => Combinator::Product,
    };
    let sys: EquationSystem = match format {
        FormatArg::Tgf => build_equations(&Framework::parse(&text, Format::Tgf)?, kind),
        FormatArg::Apx => build_equations(&Framework::parse(&text, Format::Apx)?, kind),
        FormatArg::Japx => joint_equations(&parse_joint(&text)?, kind),
    };
    let sys = if force_zero.is_empty() {
        sys
    } else {
        let zero: ArgumentSet = force_zero.iter().cloned().collect();
        perturb(&sys, &zero)?
    };
    let params = IterationParams {
        damping,
        tolerance: tol,
        ..IterationParams::default()
    };
    let values: Valuation = iterate_fixed_point(&sys, &params)?;
    let out = if cli.text {
        let mut out = String::new();
        for (name, value) in &values {
            let _ = writeln!(out, "{name} = {value}");
        }
        out
    } else {
        let doc: Map<String, Value> = values.iter().map(|(k, &v)| (k.clone(), json!(v))).collect();
        emit(&Value::Object(doc))
    };
    Ok((out, 0))
}

fn run_busters(kind: KindArg, input: &str, cli: &Cli) -> Result<(String, u8), Failure> {
    let f = load_plain(input, cli)?;
    let kind = match kind {
        KindArg::Absolute => BusterKind::Absolute,
        KindArg::Relative => BusterKind::Relative,
        KindArg::CompAbsolute => BusterKind::ComputationalAbsolute,
        KindArg::CompRelative => BusterKind::ComputationalRelative,
    };
    let bound = cli.size_bound.unwrap_or(BUSTER_ENUMERATION_BOUND);
    let sets = enumerate_busters_bounded(&f, kind, bound)?;
    let out = if cli.text {
        let mut out = format!(
            "{kind}: {} buster{}\n",
            sets.len(),
            if sets.len() == 1 { "" } else { "s" }
        );
        for b in &sets {
            let _ = write!(out, "{}", set_text(&b.members));
            if !b.induced_zero.is_empty() {
                let _ = write!(out, " propagates to {}", set_text(&b.induced_zero));
            }
            out.push('\n');
        }
        out
    } else {
        emit(&Value::Array(sets.iter().map(|b| b.to_json()).collect()))
    };
    Ok((out, 0))
}

fn run_compare(
    left: Semantics,
    right: Semantics,
    input: &str,
    cli: &Cli,
) -> Result<(String, u8), Failure> {
    let f = load_plain(input, cli)?;
    let (classical, recursive) = bounds(cli);
    let (l, _) = solve_bounded(&f, left, classical, recursive)?;
    let (r, _) = solve_bounded(&f, right, classical, recursive)?;
    let report = compare(&l, &r);
    let code = if report.equal { 0 } else { 3 };
    let out = if cli.text {
        let mut out = format!(
            "{} vs {}: {}\n",
            report.left,
            report.right,
            if report.equal { "equal" } else { "unequal" }
        );
        for e in &report.only_left {
            let _ = writeln!(out, "only {}: {}", report.left, set_text(e));
        }
        for e in &report.only_right {
            let _ = writeln!(out, "only {}: {}", report.right, set_text(e));
        }
        out
    } else {
        emit(&report.to_json())
    };
    Ok((out, code))
}

fn origin_json(origin: &NodeOrigin) -> Value {
    match origin {
        NodeOrigin::Original => json!({"kind": "original"}),
        NodeOrigin::SourceMirror { source } => {
            json!({"kind": "source-mirror", "source": source})
        }
        NodeOrigin::AttackGate { sources, target } => json!({
            "kind": "attack-gate",
            "sources": sources.iter().cloned().collect::<Vec<_>>(),
            "target": target,
        }),
    }
}

fn run_encode_joint(input: &str, cli: &Cli) -> Result<(String, u8), Failure> {
    let (text, format) = read_input(input, cli)?;
    if format == FormatArg::Tgf {
        return Err(Failure::Input(
            "joint attacks need the apx or japx format".into(),
        ));
    }
    let jf = parse_joint(&text)?;
    let (encoded, provenance) = encode_standard(&jf)?;
    let apx = encoded.serialize(Format::Apx);
    let out = if cli.text {
        let mut out = String::new();
        for (name, origin) in &provenance {
            match origin {
                NodeOrigin::Original => {}
                NodeOrigin::SourceMirror { source } => {
                    let _ = writeln!(out, "% {name} mirrors {source}");
                }
                NodeOrigin::AttackGate { sources, target } => {
                    let _ = writeln!(out, "% {name} gates {} against {target}", set_text(sources));
                }
            }
        }
        out.push_str(&apx);
        out
    } else {
        let origins: Map<String, Value> = provenance
            .iter()
            .map(|(name, origin)| (name.clone(), origin_json(origin)))
            .collect();
        emit(&json!({"framework": apx, "provenance": origins}))
    };
    Ok((out, 0))
}
