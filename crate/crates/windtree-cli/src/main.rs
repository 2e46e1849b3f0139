//! `windtree`: exact renormalization, certification and tracing for the
//! periodic wind-tree billiard.
//!
//! Exit codes: 0 success / certified, 2 certificate refused, 3 certificate
//! failed (internal inconsistency), 4 input or capacity errors.

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};
use std::path::PathBuf;
use std::process::ExitCode;

use windtree_core::cocycle::{
    self, certify_divergence, endpoint_recurrence, CertifyRequest, SlopeSource, Verdict,
};
use windtree_core::exact::{parse_scalar, ExactScalar};
use windtree_core::renorm::{self, LengthQuadruple};
use windtree_core::svg::{render_svg, BoxOverlay, RenderScene};
use windtree_core::tracer::{self, compare_with_cocycle, trace, EventKind, TableParams};
use windtree_core::veech::{
    expansion_to_cot_exact, expansion_to_cot_numeric, multitwist_from_ab, params_from_multitwist,
    MultiTwist, SlopeCoeffs, SlopeExpansion,
};
use windtree_core::words;

const SCHEMA: &str = "windtree/1";

#[derive(Parser)]
#[command(name = "windtree", version, about = "wind-tree billiard renormalization toolkit")]
struct Cli {
    /// Target enclosure width 2^-bits for numeric slope output.
    #[arg(long, global = true, default_value_t = 64)]
    precision_bits: u32,
    /// Memory cap in bytes for materialized words and position sets.
    #[arg(long, global = true, default_value_t = 1 << 30)]
    cap_bytes: u64,
    /// Suppress the meta block in JSON output.
    #[arg(long, global = true)]
    no_meta: bool,
    /// Output path (defaults to stdout; trace writes CSV, render SVG).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Veech surface parameters from a multi-twist tuple or from (a, b).
    Params {
        #[command(subcommand)]
        source: ParamsSource,
    },
    /// Slope of a width expansion, exact or enclosed.
    Slope(SlopeArgs),
    /// Renormalization convergents of a length quadruple.
    Renorm {
        /// Quadruple x1,x2,y1,y2 (scalars: "p/q", decimals, "x+y*sqrt(D)").
        #[arg(long = "Z", value_name = "X1,X2,Y1,Y2")]
        z: String,
        #[arg(long)]
        steps: usize,
    },
    /// Substitution words at a level driven by a convergent file.
    Words {
        /// JSON file: {"entries": [[m,n],...]} or a bare [[m,n],...] array.
        #[arg(long)]
        convergents: PathBuf,
        #[arg(long)]
        level: usize,
        /// Emit lengths, endpoints and boxes instead of the words themselves.
        #[arg(long)]
        stats_only: bool,
    },
    /// Finite-depth divergence certificate.
    Certify(CertifyArgs),
    /// Event-driven billiard trace to CSV.
    Trace(TraceArgs),
    /// Trace plus cocycle comparison report.
    Compare(CompareArgs),
    /// SVG rendering of a trajectory and nested boxes.
    Render(RenderArgs),
}

#[derive(Subcommand)]
enum ParamsSource {
    /// From the affine multi-twist tuple.
    Veech {
        #[arg(long)]
        mh: u64,
        #[arg(long)]
        nh: u64,
        #[arg(long)]
        mv: u64,
        #[arg(long)]
        nv: u64,
    },
    /// From table parameters (reports the tuple when the surface is Veech).
    Ab {
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
    },
}

#[derive(Args)]
struct SlopeArgs {
    /// Parabolic widths "sh,sv".
    #[arg(long, value_name = "SH,SV")]
    widths: String,
    /// Expansion digits a0,a1,...
    #[arg(long, visible_alias = "expansion", value_name = "A0,A1,...")]
    coeffs: String,
    /// Treat the digit list as the repeating period (with --pre in front).
    #[arg(long)]
    periodic: bool,
    /// Preperiod digits, only with --periodic.
    #[arg(long, value_name = "A0,A1,...")]
    pre: Option<String>,
    /// Solve the periodic tail exactly in a quadratic field.
    #[arg(long)]
    exact: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[arg(long)]
    mh: Option<u64>,
    #[arg(long)]
    nh: Option<u64>,
    #[arg(long)]
    mv: Option<u64>,
    #[arg(long)]
    nv: Option<u64>,
    /// Expansion digits; with --periodic the list repeats.
    #[arg(long, visible_alias = "coeffs", value_name = "A0,A1,...")]
    expansion: Option<String>,
    #[arg(long)]
    periodic: bool,
    #[arg(long, value_name = "A0,A1,...")]
    pre: Option<String>,
    /// Direct table parameters (alternative to the multi-twist tuple).
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    /// Exact slope value (alternative to --expansion).
    #[arg(long)]
    slope: Option<String>,
    #[arg(long)]
    depth: usize,
    #[arg(long)]
    pattern_level: Option<usize>,
}

#[derive(Args)]
struct TraceArgs {
    #[arg(long)]
    a: String,
    #[arg(long)]
    b: String,
    #[arg(long)]
    slope: String,
    #[arg(long, value_name = "X,Y")]
    start: String,
    #[arg(long)]
    crossings: usize,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    trace: TraceArgs,
    /// Materialize the word system to this level for the language check.
    #[arg(long)]
    language_level: Option<usize>,
}

#[derive(Args)]
struct RenderArgs {
    /// Trajectory CSV produced by `windtree trace`.
    #[arg(long)]
    traj: Option<PathBuf>,
    #[arg(long, default_value = "1/2")]
    a: String,
    #[arg(long, default_value = "1/2")]
    b: String,
    /// Box levels to overlay, e.g. 4,6,8 (needs --convergents or the tuple).
    #[arg(long, value_name = "K1,K2,...")]
    boxes_levels: Option<String>,
    /// Convergent file for the box recurrences.
    #[arg(long)]
    convergents: Option<PathBuf>,
    /// World window "x0,y0,x1,y1"; defaults to the trajectory bounds.
    #[arg(long, value_name = "X0,Y0,X1,Y1")]
    window: Option<String>,
}

#[derive(Debug)]
struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn input(message: impl Into<String>) -> Self {
        CliError { code: 4, message: message.into() }
    }
}

impl<E: std::error::Error> From<E> for CliError {
    fn from(e: E) -> Self {
        CliError { code: 4, message: e.to_string() }
    }
}

type CliResult = Result<(), CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version print normally; anything else is an input error
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            return ExitCode::from(4);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> CliResult {
    match &cli.command {
        Command::Params { source } => run_params(&cli, source),
        Command::Slope(args) => run_slope(&cli, args),
        Command::Renorm { z, steps } => run_renorm(&cli, z, *steps),
        Command::Words { convergents, level, stats_only } => {
            run_words(&cli, convergents, *level, *stats_only)
        }
        Command::Certify(args) => run_certify(&cli, args),
        Command::Trace(args) => run_trace(&cli, args),
        Command::Compare(args) => run_compare(&cli, args),
        Command::Render(args) => run_render(&cli, args),
    }
}

fn attach_meta(cli: &Cli, mut value: Value) -> Value {
    if !cli.no_meta {
        value["meta"] = json!({ "generator": format!("windtree {}", env!("CARGO_PKG_VERSION")) });
    }
    value
}

fn emit_json(cli: &Cli, value: Value) -> CliResult {
    let payload = serde_json::to_string_pretty(&attach_meta(cli, value))
        .map_err(|e| CliError::input(e.to_string()))?;
    emit_text(cli, &(payload + "\n"))
}

fn emit_text(cli: &Cli, payload: &str) -> CliResult {
    match &cli.out {
        Some(path) => std::fs::write(path, payload).map_err(|e| CliError::input(e.to_string())),
        None => {
            print!("{payload}");
            Ok(())
        }
    }
}

fn scalar_json(v: &ExactScalar) -> Value {
    json!({ "exact": v.to_string(), "decimal": v.to_f64() })
}

fn parse_scalar_arg(name: &str, s: &str) -> Result<ExactScalar, CliError> {
    parse_scalar(s).map_err(|e| CliError::input(format!("--{name}: {e}")))
}

fn parse_u64_list(name: &str, s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| CliError::input(format!("--{name}: {e}"))))
        .collect()
}

fn run_params(cli: &Cli, source: &ParamsSource) -> CliResult {
    let params = match source {
        ParamsSource::Veech { mh, nh, mv, nv } => {
            let mt = MultiTwist::new(*mh, *nh, *mv, *nv).map_err(|e| CliError::input(e.to_string()))?;
            params_from_multitwist(&mt).map_err(|e| CliError::input(e.to_string()))?
        }
        ParamsSource::Ab { a, b } => {
            let a = parse_scalar_arg("a", a)?;
            let b = parse_scalar_arg("b", b)?;
            match multitwist_from_ab(&a, &b).map_err(|e| CliError::input(e.to_string()))? {
                None => {
                    return emit_json(
                        cli,
                        json!({
                            "schema": SCHEMA,
                            "a": scalar_json(&a),
                            "b": scalar_json(&b),
                            "veech": false,
                        }),
                    )
                }
                Some(mt) => params_from_multitwist(&mt).map_err(|e| CliError::input(e.to_string()))?,
            }
        }
    };
    emit_json(
        cli,
        json!({
            "schema": SCHEMA,
            "veech": true,
            "a": scalar_json(&params.a),
            "b": scalar_json(&params.b),
            "s_h": scalar_json(&params.s_h),
            "s_v": scalar_json(&params.s_v),
            "D": params.d,
            "multitwist": { "mh": params.mt.mh, "nh": params.mt.nh, "mv": params.mt.mv, "nv": params.mt.nv },
        }),
    )
}

fn build_expansion(
    widths: (ExactScalar, ExactScalar),
    coeffs: &str,
    periodic: bool,
    pre: &Option<String>,
) -> Result<SlopeExpansion, CliError> {
    let digits = parse_u64_list("coeffs", coeffs)?;
    let coeffs = if periodic {
        let pre = match pre {
            Some(p) => parse_u64_list("pre", p)?,
            None => Vec::new(),
        };
        SlopeCoeffs::EventuallyPeriodic { pre, period: digits }
    } else {
        if pre.is_some() {
            return Err(CliError::input("--pre needs --periodic"));
        }
        SlopeCoeffs::Finite(digits)
    };
    SlopeExpansion::new(coeffs, widths.0, widths.1).map_err(|e| CliError::input(e.to_string()))
}

fn run_slope(cli: &Cli, args: &SlopeArgs) -> CliResult {
    let parts: Vec<&str> = args.widths.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::input("--widths needs exactly \"sh,sv\""));
    }
    let s_h = parse_scalar_arg("widths", parts[0])?;
    let s_v = parse_scalar_arg("widths", parts[1])?;
    let se = build_expansion((s_h, s_v), &args.coeffs, args.periodic, &args.pre)?;
    let cot = if args.exact {
        expansion_to_cot_exact(&se).map_err(|e| CliError::input(e.to_string()))?
    } else {
        let raw = expansion_to_cot_numeric(&se).map_err(|e| CliError::input(e.to_string()))?;
        let target = windtree_core::Rational::new(
            windtree_core::BigInt::from(1),
            windtree_core::BigInt::from(2).pow(cli.precision_bits.min(1 << 20)),
        );
        raw.refine(&target).map_err(|e| CliError::input(e.to_string()))?
    };
    let slope = cot.recip().map_err(|e| CliError::input(e.to_string()))?;
    emit_json(
        cli,
        json!({
            "schema": SCHEMA,
            "exact": args.exact,
            "cot": scalar_json(&cot),
            "slope": scalar_json(&slope),
        }),
    )
}

fn run_renorm(cli: &Cli, z: &str, steps: usize) -> CliResult {
    let parts: Vec<&str> = z.split(',').collect();
    if parts.len() != 4 {
        return Err(CliError::input("--Z needs exactly four comma-separated scalars"));
    }
    let vals: Vec<ExactScalar> =
        parts.iter().map(|p| parse_scalar_arg("Z", p)).collect::<Result<_, _>>()?;
    let quad = LengthQuadruple::new(vals[0].clone(), vals[1].clone(), vals[2].clone(), vals[3].clone())
        .map_err(|e| CliError::input(e.to_string()))?;
    let seq = renorm::convergents(&quad, steps).map_err(|e| CliError::input(e.to_string()))?;
    emit_json(
        cli,
        json!({
            "schema": SCHEMA,
            "Z": parts,
            "steps": steps,
            "entries": seq.entries,
            "status": seq.status,
            "admissible_prefix": renorm::check_admissible(&seq.entries),
            "warnings": renorm::admissibility_warnings(&seq.entries),
        }),
    )
}

fn load_convergents(path: &PathBuf) -> Result<Vec<(u64, u64)>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if let Ok(seq) = serde_json::from_str::<renorm::ConvergentSequence>(&text) {
        return Ok(seq.entries);
    }
    serde_json::from_str::<Vec<(u64, u64)>>(&text)
        .map_err(|e| CliError::input(format!("{}: neither a convergent sequence nor a pair array: {e}", path.display())))
}

fn run_words(cli: &Cli, path: &PathBuf, level: usize, stats_only: bool) -> CliResult {
    let convs = load_convergents(path)?;
    if stats_only {
        let (l, r) = words::predicted_lengths(&convs, level)
            .map_err(|e| CliError::input(e.to_string()))?;
        let value = match endpoint_recurrence(&convs, level) {
            Ok(states) => {
                let top = states.last().expect("nonempty");
                json!({
                    "schema": SCHEMA,
                    "level": level,
                    "lengths": { "L": l.map(|v| v.to_string()), "R": r.map(|v| v.to_string()) },
                    "endpoints": {
                        "X": top.x.clone().map(|v| v.to_string()),
                        "Y": top.y.clone().map(|v| v.to_string()),
                        "x4": top.x4.to_string(),
                        "y4": top.y4.to_string(),
                    },
                    "boxes": cocycle::boxes(top),
                })
            }
            Err(cocycle::CocycleError::OddN { index, n }) => json!({
                "schema": SCHEMA,
                "level": level,
                "lengths": { "L": l.map(|v| v.to_string()), "R": r.map(|v| v.to_string()) },
                "endpoints": Value::Null,
                "note": format!("endpoint recurrence unavailable: n_{index} = {n} is odd"),
            }),
            Err(e) => return Err(CliError::input(e.to_string())),
        };
        return emit_json(cli, value);
    }
    let ws = words::expand(&convs, level, cli.cap_bytes).map_err(|e| CliError::input(e.to_string()))?;
    let repr = ws.to_repr();
    emit_json(
        cli,
        json!({
            "schema": SCHEMA,
            "level": repr.level,
            "L": repr.l,
            "R": repr.r,
            "history": repr.history,
        }),
    )
}

fn run_certify(cli: &Cli, args: &CertifyArgs) -> CliResult {
    let pattern_level = args.pattern_level.unwrap_or_else(|| args.depth.min(8));
    let exact_source = args.a.is_some() || args.b.is_some() || args.slope.is_some();
    let tuple_source = args.mh.is_some() || args.expansion.is_some();
    if exact_source && tuple_source {
        return Err(CliError::input(
            "give exactly one slope source: --a/--b/--slope or the multi-twist tuple with --expansion",
        ));
    }
    let (a, b, slope_source) = match (&args.a, &args.b, &args.slope) {
        (Some(a), Some(b), Some(slope)) => {
            let a = parse_scalar_arg("a", a)?;
            let b = parse_scalar_arg("b", b)?;
            let slope = parse_scalar_arg("slope", slope)?;
            (a, b, SlopeSource::Exact(slope))
        }
        _ => {
            let (mh, nh, mv, nv) = match (args.mh, args.nh, args.mv, args.nv) {
                (Some(mh), Some(nh), Some(mv), Some(nv)) => (mh, nh, mv, nv),
                _ => {
                    return Err(CliError::input(
                        "provide either --a/--b/--slope or the full multi-twist tuple",
                    ))
                }
            };
            let mt = MultiTwist::new(mh, nh, mv, nv).map_err(|e| CliError::input(e.to_string()))?;
            let params = params_from_multitwist(&mt).map_err(|e| CliError::input(e.to_string()))?;
            let digits = args
                .expansion
                .as_ref()
                .ok_or_else(|| CliError::input("--expansion (or --coeffs) is required"))?;
            let se = build_expansion(
                (params.s_h.clone(), params.s_v.clone()),
                digits,
                args.periodic,
                &args.pre,
            )?;
            (params.a, params.b, SlopeSource::Expansion { se, mt })
        }
    };
    let req = CertifyRequest {
        a,
        b,
        slope: slope_source,
        depth: args.depth,
        pattern_level,
        cap_bytes: cli.cap_bytes,
    };
    let cert = certify_divergence(&req).map_err(|e| CliError::input(e.to_string()))?;
    let verdict = cert.verdict;
    let value = serde_json::to_value(&cert).map_err(|e| CliError::input(e.to_string()))?;
    emit_json(cli, value)?;
    match verdict {
        Verdict::CertifiedToDepth => Ok(()),
        Verdict::Refused => Err(CliError { code: 2, message: "certificate refused".into() }),
        Verdict::Failed => Err(CliError {
            code: 3,
            message: "certificate FAILED: checks violated despite hypotheses".into(),
        }),
    }
}

fn parse_start(s: &str) -> Result<(ExactScalar, ExactScalar), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::input("--start needs exactly \"x,y\""));
    }
    Ok((parse_scalar_arg("start", parts[0])?, parse_scalar_arg("start", parts[1])?))
}

fn run_traced(args: &TraceArgs) -> Result<(TableParams, windtree_core::tracer::BilliardTrajectory), CliError> {
    let a = parse_scalar_arg("a", &args.a)?;
    let b = parse_scalar_arg("b", &args.b)?;
    let slope = parse_scalar_arg("slope", &args.slope)?;
    let start = parse_start(&args.start)?;
    let tp = TableParams::new(a, b).map_err(|e| CliError::input(e.to_string()))?;
    let traj = trace(&tp, start, slope, args.crossings).map_err(|e| CliError::input(e.to_string()))?;
    Ok((tp, traj))
}

fn run_trace(cli: &Cli, args: &TraceArgs) -> CliResult {
    let (_, traj) = run_traced(args)?;
    let mut csv = String::new();
    csv.push_str(&format!(
        "# schema={SCHEMA} a={} b={} slope={} start={},{} free_flight={} corner_hit={}\n",
        traj.table.a,
        traj.table.b,
        traj.base_slope,
        traj.start.0,
        traj.start.1,
        traj.free_flight,
        traj.corner_hit.is_some(),
    ));
    csv.push_str("n,t,x,y,event_type,cell_i,cell_j,letter,kappa\n");
    // arc-length parameter along the ray, decimal rendering
    let mut travelled = 0.0f64;
    let mut prev = (traj.start.0.to_f64(), traj.start.1.to_f64());
    for e in &traj.events {
        let x = e.pos.0.to_f64();
        let y = e.pos.1.to_f64();
        travelled += ((x - prev.0).powi(2) + (y - prev.1).powi(2)).sqrt();
        prev = (x, y);
        let kind = match e.kind {
            EventKind::Reflection { .. } => "reflection",
            EventKind::Crossing => "crossing",
        };
        csv.push_str(&format!(
            "{},{:.12},{:.12},{:.12},{},{},{},{},{}\n",
            e.n, travelled, x, y, kind, e.cell.0, e.cell.1, e.letter, e.kappa_after
        ));
    }
    emit_text(cli, &csv)
}

fn run_compare(cli: &Cli, args: &CompareArgs) -> CliResult {
    let (_, traj) = run_traced(&args.trace)?;
    let language = match args.language_level {
        Some(level) => {
            let a = parse_scalar_arg("a", &args.trace.a)?;
            let b = parse_scalar_arg("b", &args.trace.b)?;
            let slope = parse_scalar_arg("slope", &args.trace.slope)?;
            let z = LengthQuadruple::from_parameters(&a, &b, &slope)
                .map_err(|e| CliError::input(e.to_string()))?;
            let seq = renorm::convergents(&z, level).map_err(|e| CliError::input(e.to_string()))?;
            if seq.entries.len() < level {
                None // not renormalizable that deep; factor check unavailable
            } else {
                Some(
                    words::expand(&seq.entries, level, cli.cap_bytes)
                        .map_err(|e| CliError::input(e.to_string()))?,
                )
            }
        }
        None => None,
    };
    match compare_with_cocycle(&traj, language.as_ref()) {
        Ok(report) => {
            let ok = report.bound_holds;
            emit_json(
                cli,
                json!({
                    "schema": SCHEMA,
                    "verdict": if ok { "bound_holds" } else { "bound_violated" },
                    "crossings": report.crossings,
                    "max_deviation": report.max_deviation,
                    "sqrt2": std::f64::consts::SQRT_2,
                    "language_checked": report.language_checked,
                    "free_flight": traj.free_flight,
                    "corner_hit": traj.corner_hit.is_some(),
                }),
            )?;
            if ok {
                Ok(())
            } else {
                Err(CliError { code: 3, message: "discretization bound violated".into() })
            }
        }
        Err(tracer::TraceError::LabelingMismatch { at, detail }) => {
            emit_json(
                cli,
                json!({
                    "schema": SCHEMA,
                    "verdict": "labeling_mismatch",
                    "at": at,
                    "detail": detail,
                }),
            )?;
            Err(CliError { code: 3, message: "LABELING_MISMATCH".into() })
        }
        Err(e) => Err(CliError::input(e.to_string())),
    }
}

fn parse_f64_list(name: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| CliError::input(format!("--{name}: {e}"))))
        .collect()
}

fn run_render(cli: &Cli, args: &RenderArgs) -> CliResult {
    let mut polyline: Vec<(f64, f64)> = Vec::new();
    let mut a = parse_scalar_arg("a", &args.a)?.to_f64();
    let mut b = parse_scalar_arg("b", &args.b)?.to_f64();
    if let Some(path) = &args.traj {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        for (lineno, line) in text.lines().enumerate() {
            if line.starts_with('#') {
                // header comment carries the table parameters
                for tok in line.trim_start_matches('#').split_whitespace() {
                    if let Some(v) = tok.strip_prefix("a=") {
                        if let Ok(s) = parse_scalar(v) {
                            a = s.to_f64();
                        }
                    }
                    if let Some(v) = tok.strip_prefix("b=") {
                        if let Ok(s) = parse_scalar(v) {
                            b = s.to_f64();
                        }
                    }
                }
                continue;
            }
            if line.starts_with("n,") || line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 9 {
                return Err(CliError::input(format!(
                    "{}:{}: expected 9 columns, found {}",
                    path.display(),
                    lineno + 1,
                    cols.len()
                )));
            }
            let x: f64 = cols[2]
                .parse()
                .map_err(|e| CliError::input(format!("{}:{}: bad x: {e}", path.display(), lineno + 1)))?;
            let y: f64 = cols[3]
                .parse()
                .map_err(|e| CliError::input(format!("{}:{}: bad y: {e}", path.display(), lineno + 1)))?;
            polyline.push((x, y));
        }
    }
    let mut boxes = Vec::new();
    if let Some(levels) = &args.boxes_levels {
        let levels = parse_u64_list("boxes-levels", levels)?;
        let convs = match &args.convergents {
            Some(path) => load_convergents(path)?,
            None => return Err(CliError::input("--boxes-levels needs --convergents")),
        };
        let max_level = *levels.iter().max().unwrap_or(&0) as usize;
        let states = endpoint_recurrence(&convs, max_level)
            .map_err(|e| CliError::input(e.to_string()))?;
        for &lvl in &levels {
            let state = &states[lvl as usize];
            let bx = cocycle::boxes(state);
            // the widest of the six boxes at this level
            let overall = bx
                .iter()
                .max_by_key(|c| (c.xmax.clone(), c.ymax.clone()))
                .expect("six boxes");
            boxes.push(BoxOverlay {
                level: lvl as usize,
                rect: (
                    0.0,
                    0.0,
                    overall.xmax.to_string().parse::<f64>().unwrap_or(0.0),
                    overall.ymax.to_string().parse::<f64>().unwrap_or(0.0),
                ),
            });
        }
    }
    let window = match &args.window {
        Some(w) => {
            let vals = parse_f64_list("window", w)?;
            if vals.len() != 4 {
                return Err(CliError::input("--window needs x0,y0,x1,y1"));
            }
            (vals[0], vals[1], vals[2], vals[3])
        }
        None => {
            let mut xs: Vec<f64> = polyline.iter().map(|p| p.0).collect();
            let mut ys: Vec<f64> = polyline.iter().map(|p| p.1).collect();
            for ov in &boxes {
                xs.push(ov.rect.2);
                ys.push(ov.rect.3);
            }
            if xs.is_empty() {
                (-2.0, -2.0, 6.0, 6.0)
            } else {
                let fold = |v: &[f64], init: f64, f: fn(f64, f64) -> f64| {
                    v.iter().fold(init, |acc, &x| f(acc, x))
                };
                (
                    fold(&xs, f64::INFINITY, f64::min) - 1.5,
                    fold(&ys, f64::INFINITY, f64::min) - 1.5,
                    fold(&xs, f64::NEG_INFINITY, f64::max) + 1.5,
                    fold(&ys, f64::NEG_INFINITY, f64::max) + 1.5,
                )
            }
        }
    };
    let scene = RenderScene { a, b, window, polyline, boxes };
    emit_text(cli, &render_svg(&scene))
}
