//! Command-line front end.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use crate::error::Error;
use crate::report::{Report, ScanReport, ScanRow};
use crate::rootsys::{build_parabolic, structure_constants, Root};
use crate::scalar::Q2;
use crate::spectral::{analyze_structure, Options, Structure, Weights};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_CONSISTENCY: i32 = 3;

pub const THREADS_ENV: &str = "FLAGROCK_THREADS";

#[derive(Parser, Debug)]
#[command(name = "flagrock", version, about = "Rockland-failure certificates for Dolbeault Laplacians on U(p,q) flag domains")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Analyze one instance U(p,q) ⊃ U(p1) × U(p − p1, q).
    Analyze(AnalyzeArgs),
    /// Analyze every instance with p + q ≤ max-n.
    Scan(ScanArgs),
    /// Run the consistency suite on built-in instances.
    Selftest(SelftestArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
#[command(allow_negative_numbers = true)]
pub struct AnalyzeArgs {
    /// Positional form: P Q P1.
    #[arg(value_name = "P Q P1", num_args = 0..=3)]
    pub positional: Vec<i64>,
    #[arg(long)]
    pub p: Option<i64>,
    #[arg(long)]
    pub q: Option<i64>,
    #[arg(long)]
    pub p1: Option<i64>,
    /// Comma-separated weights, one per orthogonal-sequence root
    /// (`sqrt2`, `3/2`, `2*sqrt2`, or any float).
    #[arg(long, value_delimiter = ',')]
    pub weights: Option<Vec<String>>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Omit timing so output is byte-identical across runs.
    #[arg(long)]
    pub no_timing: bool,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long)]
    pub max_n: i64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 6)]
    pub max_n: usize,
    /// Flip one structure constant before checking.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// Parse and run; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    match cli.command {
        Command::Analyze(a) => cmd_analyze(&a, out, err),
        Command::Scan(s) => cmd_scan(&s, out, err),
        Command::Selftest(s) => cmd_selftest(&s, out, err),
    }
}

pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidParabolic { .. } | Error::InvalidForm(_) | Error::UnsupportedForm(_) => EXIT_INVALID,
        _ => EXIT_CONSISTENCY,
    }
}

fn report_error(e: &Error, err: &mut dyn Write) -> i32 {
    match e.invariant() {
        Some(name) => {
            let _ = writeln!(err, "error: invariant `{name}` violated: {e}");
        }
        None => {
            let _ = writeln!(err, "error: {e}");
        }
    }
    exit_code(e)
}

fn resolve_params(a: &AnalyzeArgs) -> Result<(i64, i64, i64), String> {
    let flags = [a.p, a.q, a.p1];
    if a.positional.is_empty() {
        match flags {
            [Some(p), Some(q), Some(p1)] => Ok((p, q, p1)),
            _ => Err("need --p, --q and --p1 (or three positional values)".into()),
        }
    } else if flags.iter().any(Option::is_some) {
        Err("give parameters either positionally or as flags, not both".into())
    } else if a.positional.len() == 3 {
        Ok((a.positional[0], a.positional[1], a.positional[2]))
    } else {
        Err("need three positional values P Q P1".into())
    }
}

/// Exact when every token parses in `ℚ(√2)`, float otherwise.
pub fn parse_weights(tokens: &[String]) -> Result<Weights, String> {
    let exact: Result<Vec<Q2>, _> = tokens.iter().map(|t| t.parse::<Q2>()).collect();
    if let Ok(w) = exact {
        return Ok(Weights::Exact(w));
    }
    tokens
        .iter()
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| format!("cannot parse weight `{t}`"))
        })
        .collect::<Result<Vec<f64>, String>>()
        .map(Weights::Float)
}

/// Write through a sibling temporary file and rename into place.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(contents.as_bytes())?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path).inspect_err(|_| {
        let _ = std::fs::remove_file(&tmp);
    })
}

fn emit(contents: &str, output: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match output {
        Some(path) => match write_atomic(path, contents) {
            Ok(()) => EXIT_OK,
            Err(e) => {
                let _ = writeln!(err, "error: cannot write {}: {e}", path.display());
                EXIT_INVALID
            }
        },
        None => {
            let _ = out.write_all(contents.as_bytes());
            EXIT_OK
        }
    }
}

pub fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (p, q, p1) = match resolve_params(a) {
        Ok(v) => v,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_INVALID;
        }
    };
    let weights = match a.weights.as_deref().map(parse_weights).transpose() {
        Ok(w) => w,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_INVALID;
        }
    };
    let start = Instant::now();
    let result = build_parabolic(p, q, p1)
        .and_then(|pd| Structure::build(&pd))
        .and_then(|st| analyze_structure(&st, weights.as_ref(), Options::default()));
    let analysis = match result {
        Ok(x) => x,
        Err(e) => return report_error(&e, err),
    };
    let elapsed = (!a.no_timing).then(|| start.elapsed());
    let report = Report::from_analysis(&analysis, elapsed);
    let mut text = match a.format {
        Format::Json => report.to_json(),
        Format::Text => report.to_text(),
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    emit(&text, a.output.as_deref(), out, err)
}

/// All `(p, q, p1)` with `p, q ≥ 1`, `1 ≤ p1 ≤ p`, `p + q ≤ max_n`.
pub fn instances(max_n: usize) -> Vec<(usize, usize, usize)> {
    let mut v = Vec::new();
    for n in 2..=max_n {
        for p in 1..n {
            for p1 in 1..=p {
                v.push((p, n - p, p1));
            }
        }
    }
    v
}

fn scan_row(p: usize, q: usize, p1: usize) -> (ScanRow, bool) {
    let result = build_parabolic(p as i64, q as i64, p1 as i64)
        .and_then(|pd| Structure::build(&pd))
        .and_then(|st| analyze_structure(&st, None, Options::default()));
    match result {
        Ok(a) => (ScanRow::from_analysis(&a), false),
        Err(e) => {
            let pd = build_parabolic(p as i64, q as i64, p1 as i64).ok();
            let row = ScanRow {
                p,
                q,
                p1,
                s: pd.as_ref().map_or(0, |d| d.s()),
                t: pd.as_ref().map_or(0, |d| d.t()),
                case: None,
                hormander: None,
                hypothesis_h: None,
                rockland_fails: None,
                maximal_hypoelliptic: None,
                witness_degrees: Vec::new(),
                error: Some(match e.invariant() {
                    Some(name) => format!("{name}: {e}"),
                    None => e.to_string(),
                }),
            };
            (row, e.invariant().is_some())
        }
    }
}

fn thread_pool() -> Result<rayon::ThreadPool, String> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| format!("{THREADS_ENV} must be a positive integer, got `{v}`"))?;
        b = b.num_threads(n);
    }
    b.build().map_err(|e| e.to_string())
}

pub fn cmd_scan(s: &ScanArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if s.max_n < 2 {
        let _ = writeln!(err, "error: --max-n must be at least 2");
        return EXIT_INVALID;
    }
    if s.max_n > 12 {
        let _ = writeln!(err, "error: --max-n above 12 is out of reach");
        return EXIT_INVALID;
    }
    let pool = match thread_pool() {
        Ok(p) => p,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_INVALID;
        }
    };
    let max_n = s.max_n as usize;
    let results: Vec<(ScanRow, bool)> =
        pool.install(|| instances(max_n).into_par_iter().map(|(p, q, p1)| scan_row(p, q, p1)).collect());
    let inconsistent = results.iter().any(|(_, bad)| *bad);
    let report = ScanReport::new(max_n, results.into_iter().map(|(r, _)| r).collect());
    let text = match s.format {
        Format::Json => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    let code = emit(&text, s.output.as_deref(), out, err);
    if code != EXIT_OK {
        return code;
    }
    if inconsistent {
        let _ = writeln!(err, "error: internal consistency failures in scan");
        return EXIT_CONSISTENCY;
    }
    EXIT_OK
}

/// Instances always included in the self-test.
pub const SELFTEST_INSTANCES: [(usize, usize, usize); 5] = [(2, 2, 1), (3, 1, 1), (1, 1, 1), (3, 2, 2), (2, 3, 1)];

pub fn cmd_selftest(s: &SelftestArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut list: Vec<(usize, usize, usize)> = SELFTEST_INSTANCES.to_vec();
    for i in instances(s.max_n) {
        if !list.contains(&i) {
            list.push(i);
        }
    }
    for (p, q, p1) in list {
        let pd = match build_parabolic(p as i64, q as i64, p1 as i64) {
            Ok(pd) => pd,
            Err(e) => return report_error(&e, err),
        };
        let mut nc = structure_constants(&pd);
        if s.inject_fault && pd.n() >= 3 {
            nc.corrupt(Root::new(1, 2), Root::new(2, pd.n()));
        }
        let result =
            Structure::build_with(&pd, nc).and_then(|st| analyze_structure(&st, None, Options::default()));
        match result {
            Ok(a) => {
                let _ = writeln!(out, "ok   ({p},{q},{p1}): {} checks", a.checks.len());
            }
            Err(e) => {
                let name = e.invariant().unwrap_or("analysis");
                let _ = writeln!(out, "FAIL ({p},{q},{p1}): {name}");
                let _ = writeln!(err, "error: invariant `{name}` violated: {e}");
                return EXIT_CONSISTENCY;
            }
        }
    }
    let _ = writeln!(out, "selftest passed");
    EXIT_OK
}
