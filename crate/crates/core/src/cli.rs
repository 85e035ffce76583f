//! Command-line front end.
//!
//! Reports go to stdout as JSON, diagnostics to stderr. Exit codes: 0 on
//! success, 1 on other errors, 2 on usage errors, 3 for an infeasible point,
//! 4 when a repro example does not match. Indices in the output are 1-based.

use std::ffi::OsString;
use std::path::Path;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::error::SblsError;
use crate::feasible::SupportProfile;
use crate::format::{parse_instance, serialize_instance, FormatError, ParsedInstance};
use crate::generators::{gen_planted, gen_planted_blind_deconv, gen_planted_matrix_sensing, gen_random};
use crate::likeproj::{classic_project, like_project, ProjectionResult};
use crate::oracle::{global_brute, OracleConfig, DEFAULT_PAIR_BUDGET};
use crate::repro::{run_example, ReproOutcome, EXAMPLES};
use crate::solvers::{multistart, Method, SolveConfig};
use crate::stationarity::{classify, StationarityReport, Tolerance};
use crate::tensor::{Instance, Point};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_MISMATCH: i32 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliOutput {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Parser, Debug)]
#[command(name = "sbls", version, about = "Sparse bilinear least squares: stationarity checks, projections and solvers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify a point under every stationarity notion.
    Check {
        file: String,
        /// Comma-separated point of length m+n, or `known` for the file's known point.
        #[arg(long, default_value = "known", allow_hyphen_values = true)]
        point: String,
        /// Step constant for the L-like test. Defaults to the smallest valid L, or 1.
        #[arg(long = "L", visible_alias = "l")]
        l: Option<f64>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Like-project (or project) a point onto the feasible set.
    Project {
        /// Instance file, or `m,n,s,t`.
        target: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Euclidean projection instead of the like-projection.
        #[arg(long)]
        classic: bool,
    },
    /// Run the solvers from seeded random starts.
    Solve {
        file: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        #[arg(long, default_value_t = 10)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2000)]
        max_iter: usize,
    },
    /// Brute-force search over support pairs.
    Oracle {
        file: String,
        /// Random restarts per support pair.
        #[arg(long, default_value_t = 8)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Add a grid scan for pairs with at most three free x entries.
        #[arg(long)]
        grid: bool,
        #[arg(long, default_value_t = DEFAULT_PAIR_BUDGET)]
        max_pairs: u128,
    },
    /// Generate an instance file.
    Gen {
        #[arg(value_enum)]
        kind: GenKind,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        t: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write to this path instead of stdout.
        #[arg(long)]
        out: Option<String>,
    },
    /// Run a bundled worked example and compare with its expected values.
    Repro {
        /// One of paperA, paperB, likeproj1, likeproj2, likeproj3, or `all`.
        name: String,
    },
}

#[derive(Args, Debug)]
struct TolArgs {
    /// Absolute gradient tolerance. Defaults to a scale-aware value.
    #[arg(long)]
    grad_tol: Option<f64>,
    /// Absolute objective tolerance. Defaults to a scale-aware value.
    #[arg(long)]
    obj_tol: Option<f64>,
    /// Entries at most this large count as zero.
    #[arg(long)]
    zero_tol: Option<f64>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum MethodArg {
    Liht,
    Alt,
    Both,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GenKind {
    BlindDeconv,
    MatrixSensing,
    Planted,
    Random,
}

enum Failure {
    Usage(String),
    Lib(SblsError),
    Format(String, FormatError),
    Io(String),
}

impl From<SblsError> for Failure {
    fn from(e: SblsError) -> Self {
        Failure::Lib(e)
    }
}

struct Success {
    code: i32,
    stdout: String,
    stderr: String,
}

fn ok_json(v: Value) -> Success {
    Success {
        code: EXIT_OK,
        stdout: format!("{}\n", serde_json::to_string_pretty(&v).expect("json values serialize")),
        stderr: String::new(),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> CliOutput
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return if e.use_stderr() {
                CliOutput { code, stdout: String::new(), stderr: text }
            } else {
                CliOutput { code, stdout: text, stderr: String::new() }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(s) => CliOutput { code: s.code, stdout: s.stdout, stderr: s.stderr },
        Err(f) => {
            let (code, msg) = match f {
                Failure::Usage(m) => (EXIT_USAGE, format!("error: {m}")),
                Failure::Lib(SblsError::Infeasible(e)) => (EXIT_INFEASIBLE, format!("error: infeasible point: {e}")),
                Failure::Lib(SblsError::InvalidArgument(m)) => (EXIT_USAGE, format!("error: {m}")),
                Failure::Lib(e) => (EXIT_ERROR, format!("error: {e}")),
                Failure::Format(path, e) => (EXIT_ERROR, format!("error: {path}: {e}")),
                Failure::Io(m) => (EXIT_ERROR, format!("error: {m}")),
            };
            CliOutput { code, stdout: String::new(), stderr: format!("{msg}\n") }
        }
    }
}

fn dispatch(cmd: Command) -> Result<Success, Failure> {
    match cmd {
        Command::Check { file, point, l, tol } => cmd_check(&file, &point, l, &tol),
        Command::Project { target, point, classic } => cmd_project(&target, &point, classic),
        Command::Solve { file, method, starts, seed, max_iter } => cmd_solve(&file, method, starts, seed, max_iter),
        Command::Oracle { file, starts, seed, grid, max_pairs } => {
            let parsed = load(&file)?;
            let cfg = OracleConfig { n_starts: starts, seed, grid, max_pairs, ..OracleConfig::default() };
            let r = global_brute(&parsed.instance, &cfg)?;
            Ok(ok_json(json!({
                "point": r.point.as_slice(),
                "objective": r.f,
                "support_x": one_based(&r.pair.s1),
                "support_y": one_based(&r.pair.s2),
                "certified": r.certified,
                "heuristic": !r.certified,
                "pairs_examined": r.pairs_examined,
            })))
        }
        Command::Gen { kind, l, m, n, s, t, seed, out } => cmd_gen(kind, [l, m, n, s, t], seed, out),
        Command::Repro { name } => cmd_repro(&name),
    }
}

fn load(path: &str) -> Result<ParsedInstance, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{path}: {e}")))?;
    parse_instance(&text).map_err(|e| Failure::Format(path.to_string(), e))
}

fn parse_point(spec: &str, known: Option<&Point>, m: usize, n: usize) -> Result<Point, Failure> {
    if spec == "known" {
        return known
            .cloned()
            .ok_or_else(|| Failure::Usage("the file has no known_point; pass --point".into()));
    }
    let vals: Vec<f64> = spec
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| Failure::Usage(format!("bad --point `{spec}`: {e}")))?;
    if vals.len() != m + n {
        return Err(Failure::Usage(format!("--point has {} entries, expected m+n = {}", vals.len(), m + n)));
    }
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Usage("--point entries must be finite".into()));
    }
    Ok(Point::from_concat(vals, m)?)
}

fn one_based(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

pub fn report_json(inst: &Instance, z: &Point, r: &StationarityReport) -> Value {
    let p = SupportProfile::new(z, r.tolerance.zero_tol);
    let [nb, tb, nc, tc, cw, ll, m] = r.flags();
    let witness = r.cw.witness().map(|mv| {
        json!({
            "remove": mv.remove.map(|i| i + 1),
            "adjust": mv.adjust + 1,
            "step": mv.step,
            "objective": mv.value,
            "point": mv.point.as_slice(),
        })
    });
    json!({
        "point": z.as_slice(),
        "objective": r.objective,
        "gradient": r.gradient,
        "case": p.case(inst.s, inst.t).label(),
        "tolerance": {
            "grad_tol": r.tolerance.grad_tol,
            "obj_tol": r.tolerance.obj_tol,
            "zero_tol": r.tolerance.zero_tol,
        },
        "flags": {"NB": nb, "TB": tb, "NC": nc, "TC": tc, "CW": cw, "Llike": ll, "M": m},
        "nb": {"holds": nb, "violations": one_based(&r.nb.violations)},
        "nc": {"holds": nc, "violations": one_based(&r.nc.violations)},
        "tb": {"holds": tb, "norm": r.tb.norm, "max_abs": r.tb.max_abs, "covered": one_based(&r.tb.covered)},
        "tc": {"holds": tc, "norm": r.tc.norm, "max_abs": r.tc.max_abs, "covered": one_based(&r.tc.covered)},
        "cw": {"holds": cw, "violating_moves": r.cw.violations.len(), "witness": witness},
        "llike": {
            "holds": ll,
            "L": r.llike.l,
            "cross_checked": r.llike.cross_checked,
            "violations": one_based(&r.llike.violations),
        },
        "minimal_L": r.minimal_l,
        "m": {"holds": m, "w": r.m.witness.w, "mu": r.m.witness.mu, "violations": one_based(&r.m.violations)},
    })
}

fn cmd_check(file: &str, point: &str, l: Option<f64>, t: &TolArgs) -> Result<Success, Failure> {
    let parsed = load(file)?;
    let inst = &parsed.instance;
    let z = parse_point(point, parsed.known_point.as_ref(), inst.m(), inst.n())?;
    let mut tol = Tolerance::at(inst, &z)?;
    if let Some(v) = t.grad_tol {
        tol.grad_tol = v;
    }
    if let Some(v) = t.obj_tol {
        tol.obj_tol = v;
    }
    if let Some(v) = t.zero_tol {
        tol.zero_tol = v;
    }
    if !(tol.grad_tol >= 0.0 && tol.obj_tol >= 0.0 && tol.zero_tol >= 0.0) {
        return Err(Failure::Usage("tolerances must be nonnegative".into()));
    }
    let l = match l {
        Some(v) if v > 0.0 && v.is_finite() => v,
        Some(_) => return Err(Failure::Usage("--L must be positive".into())),
        None => crate::stationarity::minimal_l(inst, &z, &tol)?
            .filter(|v| *v > 0.0)
            .unwrap_or(1.0),
    };
    let report = classify(inst, &z, l, &tol)?;
    Ok(ok_json(report_json(inst, &z, &report)))
}

fn projection_json(r: &ProjectionResult) -> Value {
    let pts: Vec<&[f64]> = r.minimizers.iter().map(|p| p.as_slice()).collect();
    json!({
        "minimizers": pts,
        "count": r.count.to_string(),
        "distance_sq": r.distance_sq,
        "truncated": r.truncated,
    })
}

fn cmd_project(target: &str, point: &str, classic: bool) -> Result<Success, Failure> {
    let dims: Option<Vec<usize>> = target.split(',').map(|p| p.trim().parse().ok()).collect();
    let (m, n, s, t) = match dims {
        Some(d) if d.len() == 4 && !Path::new(target).exists() => {
            if d[0] == 0 || d[1] == 0 || d[2] == 0 || d[3] == 0 || d[2] > d[0] || d[3] > d[1] {
                return Err(Failure::Usage(format!("bad dimensions `{target}`, expected m,n,s,t with 1 <= s <= m, 1 <= t <= n")));
            }
            (d[0], d[1], d[2], d[3])
        }
        _ => {
            let p = load(target)?;
            (p.instance.m(), p.instance.n(), p.instance.s, p.instance.t)
        }
    };
    let z = parse_point(point, None, m, n)?;
    let r = if classic { classic_project(&z, s, t) } else { like_project(&z, s, t) };
    Ok(ok_json(projection_json(&r)))
}

fn cmd_solve(file: &str, method: MethodArg, starts: usize, seed: u64, max_iter: usize) -> Result<Success, Failure> {
    let parsed = load(file)?;
    let methods = match method {
        MethodArg::Liht => vec![Method::Liht],
        MethodArg::Alt => vec![Method::Alternating],
        MethodArg::Both => vec![Method::Liht, Method::Alternating],
    };
    let cfg = SolveConfig { n_starts: starts, seed, max_iter, methods, ..SolveConfig::default() };
    let res = multistart(&parsed.instance, &cfg)?;
    let best = &res.best;
    let runs: Vec<Value> = res
        .runs
        .iter()
        .map(|r| {
            json!({
                "start": r.start,
                "method": r.method.name(),
                "objective": r.f,
                "status": r.status.name(),
                "iterations": r.iterations,
            })
        })
        .collect();
    Ok(ok_json(json!({
        "best": {
            "start": res.best_start,
            "method": best.method.name(),
            "objective": best.f,
            "L": best.l,
            "status": best.status.name(),
            "iterations": best.iterates.len() - 1,
            "point": best.point.as_slice(),
            "report": report_json(&parsed.instance, &best.point, &best.report),
        },
        "runs": runs,
    })))
}

fn cmd_gen(kind: GenKind, dims: [usize; 5], seed: u64, out: Option<String>) -> Result<Success, Failure> {
    let [l, m, n, s, t] = dims;
    if l == 0 || s == 0 || s >= m || t == 0 || t >= n {
        return Err(Failure::Usage(format!(
            "need l >= 1, 1 <= s < m and 1 <= t < n, got l={l}, m={m}, n={n}, s={s}, t={t}"
        )));
    }
    let (inst, point, label) = match kind {
        GenKind::BlindDeconv => {
            let (i, z) = gen_planted_blind_deconv(l, m, n, s, t, seed)?;
            (i, Some(z), "blind deconvolution")
        }
        GenKind::MatrixSensing => {
            let (i, z) = gen_planted_matrix_sensing(l, m, n, s, t, seed)?;
            (i, Some(z), "matrix sensing")
        }
        GenKind::Planted => {
            let (i, z) = gen_planted(l, m, n, s, t, seed)?;
            (i, Some(z), "planted")
        }
        GenKind::Random => (gen_random(l, m, n, s, t, seed)?, None, "random"),
    };
    let label = format!("{label}, seed {seed}");
    let text = serialize_instance(&inst, point.as_ref(), Some(&label)) + "\n";
    match out {
        Some(path) => {
            std::fs::write(&path, text).map_err(|e| Failure::Io(format!("{path}: {e}")))?;
            Ok(Success { code: EXIT_OK, stdout: String::new(), stderr: format!("wrote {path}\n") })
        }
        None => Ok(Success { code: EXIT_OK, stdout: text, stderr: String::new() }),
    }
}

fn cmd_repro(name: &str) -> Result<Success, Failure> {
    let names: Vec<&str> = if name == "all" { EXAMPLES.to_vec() } else { vec![name] };
    let mut outcomes: Vec<ReproOutcome> = Vec::new();
    for n in names {
        match run_example(n) {
            Some(r) => outcomes.push(r?),
            None => {
                return Err(Failure::Usage(format!(
                    "unknown example `{n}`, expected one of {} or all",
                    EXAMPLES.join(", ")
                )))
            }
        }
    }
    let mut stderr = String::new();
    for o in &outcomes {
        for c in &o.checks {
            let tag = if c.pass { "ok" } else { "MISMATCH" };
            stderr.push_str(&format!("{}: {} [{tag}] expected {}, got {}\n", o.example, c.name, c.expected, c.actual));
        }
        for note in &o.notes {
            stderr.push_str(&format!("{}: note: {note}\n", o.example));
        }
    }
    let pass = outcomes.iter().all(|o| o.pass);
    let body = if outcomes.len() == 1 {
        serde_json::to_value(&outcomes[0])
    } else {
        serde_json::to_value(&outcomes)
    }
    .expect("outcomes serialize");
    let mut s = ok_json(body);
    s.stderr = stderr;
    if !pass {
        s.code = EXIT_MISMATCH;
    }
    Ok(s)
}
