//! The `htp` command line.
//!
//! Exit codes: 0 success or found, 1 unsolvable or failed verification,
//! 2 inconclusive (limit hit), 64 malformed flags or files, 65 unsupported shape.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};

use crate::bounds::{bounds_for, complement_magic, BoundsError};
use crate::hexgrid::{build_shape, complement_solution, verify_solution, Shape, ShapeError, ShapeFamily, VerifyError};
use crate::io::SolutionFile;
use crate::oracle::oracle_count;
use crate::solver::{count_solutions, solve_one, sweep, CountOutcome, SearchOutcome, SolverConfig, SweepStatus, ValueOrder};

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNSOLVABLE: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_UNSUPPORTED: i32 = 65;

/// Optional default per-solve time budget, in seconds.
pub const TIMEOUT_ENV: &str = "HTP_DEFAULT_TIMEOUT_SECS";

#[derive(Debug, Parser)]
#[command(name = "htp", version, about = "Hexagonal Tortoise Problem shapes, bounds and solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct ShapeArgs {
    #[arg(long)]
    family: ShapeFamily,
    #[arg(long)]
    order: u32,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OrderArg {
    Ascending,
    Descending,
    Shuffle,
}

impl From<OrderArg> for ValueOrder {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Ascending => ValueOrder::Ascending,
            OrderArg::Descending => ValueOrder::Descending,
            OrderArg::Shuffle => ValueOrder::SeededShuffle,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print vertex and hexagon counts, or the full incidence structure as JSON.
    Shape {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        json: bool,
    },
    /// Print the magic-constant bounds and their derivation.
    Bounds {
        #[command(flatten)]
        shape: ShapeArgs,
    },
    /// Search for one solution with the given magic constant.
    Solve {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        magic: i64,
        #[arg(long)]
        seed: Option<u64>,
        /// Seconds.
        #[arg(long)]
        timeout: Option<f64>,
        #[arg(long)]
        node_limit: Option<u64>,
        #[arg(long, value_enum)]
        value_order: Option<OrderArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve every magic constant in a range (default: the bounds).
    Sweep {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long, requires = "to")]
        from: Option<i64>,
        #[arg(long, requires = "from")]
        to: Option<i64>,
        #[arg(long)]
        timeout_per_m: Option<f64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        value_order: Option<OrderArg>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Count every solution with the given magic constant.
    Count {
        #[command(flatten)]
        shape: ShapeArgs,
        #[arg(long)]
        magic: i64,
        /// Use the brute-force enumeration instead of the solver.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        timeout: Option<f64>,
    },
    /// Check a solution file.
    Verify { file: PathBuf },
    /// Write the complemented solution (each value v becomes n + 1 - v).
    Complement {
        file: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Error carrying the exit code it maps to.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure { code: EXIT_USAGE, message: message.to_string() }
    }
}

impl From<ShapeError> for Failure {
    fn from(e: ShapeError) -> Self {
        let code = match e {
            ShapeError::Unsupported { .. } => EXIT_UNSUPPORTED,
            ShapeError::UnknownFamily(_) => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

impl From<BoundsError> for Failure {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::Shape(s) => s.into(),
            other => Failure { code: EXIT_UNSUPPORTED, message: other.to_string() },
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::usage(e)
    }
}

type CliResult = Result<i32, Failure>;

fn seconds(label: &str, secs: f64) -> Result<Duration, Failure> {
    Duration::try_from_secs_f64(secs).map_err(|_| Failure::usage(format!("invalid {label}: {secs}")))
}

fn default_timeout() -> Result<Option<Duration>, Failure> {
    match std::env::var(TIMEOUT_ENV) {
        Ok(v) => {
            let secs: f64 = v
                .trim()
                .parse()
                .map_err(|_| Failure::usage(format!("{TIMEOUT_ENV} must be a number of seconds, got `{v}`")))?;
            seconds(TIMEOUT_ENV, secs).map(Some)
        }
        Err(_) => Ok(None),
    }
}

fn timeout_or_default(flag: Option<f64>) -> Result<Option<Duration>, Failure> {
    match flag {
        Some(secs) => seconds("timeout", secs).map(Some),
        None => default_timeout(),
    }
}

fn build(args: &ShapeArgs) -> Result<Shape, Failure> {
    Ok(build_shape(args.family, args.order)?)
}

fn read_solution(path: &Path) -> Result<SolutionFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    SolutionFile::parse(&text).map_err(|e| match e {
        crate::io::ParseError::Shape(s @ ShapeError::Unsupported { .. }) => s.into(),
        other => Failure::usage(format!("{}: {other}", path.display())),
    })
}

fn write_or_print(out: &mut dyn Write, path: Option<&Path>, file: &SolutionFile) -> Result<(), Failure> {
    match path {
        Some(p) => fs::write(p, file.to_string()).map_err(|e| Failure::usage(format!("{}: {e}", p.display()))),
        None => Ok(write!(out, "{file}")?),
    }
}

/// Runs the CLI with explicit arguments and output streams; returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match command {
        Command::Shape { shape, json } => {
            let s = build(&shape)?;
            if json {
                writeln!(out, "{}", s.to_json())?;
            } else {
                writeln!(out, "{} {}: {} vertices, {} hexagons", s.family(), s.order(), s.vertex_count(), s.hexagon_count())?;
            }
            Ok(EXIT_OK)
        }
        Command::Bounds { shape } => {
            let (bounds, report) = bounds_for(shape.family, shape.order)?;
            writeln!(out, "{} {} {}", bounds.lower, bounds.upper, bounds.kind)?;
            for (label, value) in &report.quantities {
                writeln!(out, "  {label} = {value}")?;
            }
            for line in &report.chain {
                writeln!(out, "  {line}")?;
            }
            for cert in &report.certificates {
                writeln!(out, "  certificate ok: {}", cert.label)?;
            }
            for w in &report.warnings {
                writeln!(err, "warning: {w}")?;
            }
            Ok(EXIT_OK)
        }
        Command::Solve { shape, magic, seed, timeout, node_limit, value_order, out: path } => {
            let s = build(&shape)?;
            let config = SolverConfig {
                seed: seed.unwrap_or(0),
                node_limit,
                time_budget: timeout_or_default(timeout)?,
                value_order: value_order.map(Into::into).unwrap_or_default(),
                ..Default::default()
            };
            let outcome = solve_one(&s, magic, &config);
            let st = outcome.stats();
            let summary = format!(
                "nodes={} forced={} prunes={} ms={} seed={}",
                st.nodes_expanded,
                st.forced_assignments,
                st.prunes,
                st.elapsed.as_millis(),
                st.seed
            );
            match &outcome {
                SearchOutcome::Found(a, _) => {
                    writeln!(err, "found magic={magic} {summary}")?;
                    write_or_print(out, path.as_deref(), &SolutionFile::from_assignment(a, magic as u64))?;
                    Ok(EXIT_OK)
                }
                SearchOutcome::Unsolvable(_) => {
                    writeln!(out, "none magic={magic} {summary}")?;
                    Ok(EXIT_UNSOLVABLE)
                }
                SearchOutcome::Inconclusive(_, reason) => {
                    writeln!(out, "timeout magic={magic} reason={reason:?} {summary}")?;
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }
        Command::Sweep { shape, from, to, timeout_per_m, jobs, seed, value_order, out_dir } => {
            let s = build(&shape)?;
            let range = from.zip(to);
            if let Some((a, b)) = range {
                if a > b {
                    return Err(Failure::usage(format!("empty range {a}..{b}")));
                }
            }
            let config = SolverConfig {
                seed: seed.unwrap_or(0),
                time_budget: timeout_or_default(timeout_per_m)?,
                value_order: value_order.map(Into::into).unwrap_or_default(),
                ..Default::default()
            };
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(j) = jobs {
                if j == 0 {
                    return Err(Failure::usage("--jobs must be at least 1"));
                }
                pool = pool.num_threads(j);
            }
            let pool = pool.build().map_err(|e| Failure::usage(e))?;
            let results = pool.install(|| sweep(&s, range, &config))?;
            if let Some(dir) = &out_dir {
                fs::create_dir_all(dir).map_err(|e| Failure::usage(format!("{}: {e}", dir.display())))?;
            }
            for (m, entry) in &results {
                let status = match entry.status {
                    SweepStatus::Found => "found",
                    SweepStatus::FoundComplement => "found (complement)",
                    SweepStatus::Unsolvable => "none",
                    SweepStatus::Inconclusive(_) => "timeout",
                };
                writeln!(out, "{m} {status} nodes={} ms={}", entry.stats.nodes_expanded, entry.stats.elapsed.as_millis())?;
                if let (Some(dir), Some(a)) = (&out_dir, &entry.assignment) {
                    let path = dir.join(format!("{}-{}-{m}.htp", s.family(), s.order()));
                    write_or_print(out, Some(&path), &SolutionFile::from_assignment(a, *m as u64))?;
                }
            }
            Ok(EXIT_OK)
        }
        Command::Count { shape, magic, oracle, timeout } => {
            let s = build(&shape)?;
            if oracle {
                let count = oracle_count(&s, magic).map_err(|e| Failure { code: EXIT_UNSUPPORTED, message: e.to_string() })?;
                writeln!(out, "{count}")?;
                return Ok(EXIT_OK);
            }
            let config = SolverConfig { time_budget: timeout_or_default(timeout)?, ..SolverConfig::counting() };
            match count_solutions(&s, magic, &config) {
                CountOutcome::Exact(count, _) => {
                    writeln!(out, "{count}")?;
                    Ok(EXIT_OK)
                }
                CountOutcome::Inconclusive { at_least, reason, .. } => {
                    writeln!(out, "at least {at_least} ({reason:?})")?;
                    Ok(EXIT_INCONCLUSIVE)
                }
            }
        }
        Command::Verify { file } => {
            let sol = read_solution(&file)?;
            let s = build_shape(sol.family, sol.order)?;
            match verify_solution(&s, &sol.assignment()) {
                Ok(m) if m == sol.magic => {
                    writeln!(out, "OK magic={m}")?;
                    Ok(EXIT_OK)
                }
                Ok(m) => {
                    writeln!(out, "declared magic {} but every hexagon sums to {m}", sol.magic)?;
                    Ok(EXIT_UNSOLVABLE)
                }
                Err(VerifyError::Violations(vs)) => {
                    for v in vs {
                        writeln!(out, "{v}")?;
                    }
                    Ok(EXIT_UNSOLVABLE)
                }
                Err(e) => {
                    writeln!(out, "{e}")?;
                    Ok(EXIT_UNSOLVABLE)
                }
            }
        }
        Command::Complement { file, out: path } => {
            let sol = read_solution(&file)?;
            let image = match complement_solution(&sol.assignment()) {
                Ok(a) => a,
                Err(e) => {
                    writeln!(out, "{e}")?;
                    return Ok(EXIT_UNSOLVABLE);
                }
            };
            let magic = complement_magic(sol.magic as i64, sol.values.len());
            if magic < 0 {
                return Err(Failure::usage(format!("declared magic {} has no complement", sol.magic)));
            }
            write_or_print(out, path.as_deref(), &SolutionFile::from_assignment(&image, magic as u64))?;
            Ok(EXIT_OK)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("htp").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bounds_for_the_star() {
        let (code, out, _) = call(&["bounds", "--family", "star", "--order", "2"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next(), Some("129 129 exact-formula"));
    }

    #[test]
    fn bounds_warn_about_published_values() {
        let (code, out, err) = call(&["bounds", "--family", "triangular", "--order", "3"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().next(), Some("57 81 exact-formula"));
        assert!(err.starts_with("warning: "));
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["bounds", "--family", "square", "--order", "2"]).0, EXIT_USAGE);
        assert_eq!(call(&["solve", "--family", "diamond"]).0, EXIT_USAGE);
        assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(call(&["verify", "/nonexistent/file.htp"]).0, EXIT_USAGE);
        assert_eq!(call(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn unsupported_shapes() {
        assert_eq!(call(&["shape", "--family", "star", "--order", "3"]).0, EXIT_UNSUPPORTED);
        assert_eq!(call(&["bounds", "--family", "diamond", "--order", "0"]).0, EXIT_UNSUPPORTED);
        assert_eq!(call(&["count", "--family", "diamond", "--order", "3", "--magic", "93", "--oracle"]).0, EXIT_UNSUPPORTED);
    }

    #[test]
    fn shape_counts_and_json() {
        let (code, out, _) = call(&["shape", "--family", "hexagonal", "--order", "3"]);
        assert_eq!(code, 0);
        assert_eq!(out, "hexagonal 3: 54 vertices, 19 hexagons\n");
        let (_, a, _) = call(&["shape", "--family", "star", "--order", "2", "--json"]);
        let (_, b, _) = call(&["shape", "--family", "star", "--order", "2", "--json"]);
        assert_eq!(a, b);
        let doc: serde_json::Value = serde_json::from_str(&a).unwrap();
        assert_eq!(doc["vertices"].as_array().unwrap().len(), 42);
        assert_eq!(doc["hexagons"].as_array().unwrap().len(), 13);
    }

    #[test]
    fn solve_exit_codes() {
        let (code, out, _) = call(&["solve", "--family", "diamond", "--order", "1", "--magic", "21"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.starts_with("htp-solution v1\nshape diamond 1\nmagic 21\nvalues "));
        assert_eq!(call(&["solve", "--family", "diamond", "--order", "2", "--magic", "63"]).0, EXIT_UNSOLVABLE);
        let (code, out, _) = call(&["solve", "--family", "diamond", "--order", "3", "--magic", "93", "--node-limit", "3"]);
        assert_eq!(code, EXIT_INCONCLUSIVE);
        assert!(out.starts_with("timeout magic=93"));
    }

    #[test]
    fn counts() {
        let (code, out, _) = call(&["count", "--family", "diamond", "--order", "1", "--magic", "21"]);
        assert_eq!((code, out.as_str()), (0, "720\n"));
        let (code, out, _) = call(&["count", "--family", "diamond", "--order", "1", "--magic", "21", "--oracle"]);
        assert_eq!((code, out.as_str()), (0, "720\n"));
    }
}
