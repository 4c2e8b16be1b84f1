//! Command-line front end. [`run`] takes the argument list and two sinks so
//! tests can drive it in-process; `main` only wires up the real streams.
//!
//! Exit codes: 0 on success, 1 when a construction or check fails, 2 on a
//! usage error (the message names the offending flag).

use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::PathBuf;

use armadillo_core::chains::{bottom_chain, new_piece};
use armadillo_core::cylinder::build_cylinder;
use armadillo_core::decomposition::{decompose, AxisKind, CylinderRecord};
use armadillo_core::flow::{special_slope, trace};
use armadillo_core::iet::{section_map, IetError};
use armadillo_core::render::{axis_scene, decomposition_scene, render_scene, spine_scene, Scene};
use armadillo_core::report::{all_passed, report};
use armadillo_core::verify::suite;
use armadillo_core::{chains, Point, Rational, Slope, Tail};
use clap::{Args, Parser, Subcommand};

const SPINE_SQUARES: usize = 12;
const AXIS_SQUARES: usize = 8;
const SURFACE_SQUARES: usize = 6;

#[derive(Parser, Debug)]
#[command(name = "armadillo", version, about = "Exact flows and cylinder decompositions on geometric armadillo tails")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Trace a straight-line trajectory.
    Trace(TraceArgs),
    /// Build a bottom saddle chain, or with --prime the new connection of that level.
    Bsc(BscArgs),
    /// Build one cylinder of the special-direction decomposition.
    Cyl(CylArgs),
    /// Build cylinders 1..=k-max with the spine.
    Decompose(DecomposeArgs),
    /// Iterate the section map.
    Iet(IetArgs),
    /// Run the invariant suite.
    Verify(VerifyArgs),
    /// Draw an SVG figure.
    Render(RenderArgs),
}

#[derive(Args, Debug)]
#[group(id = "tail", required = true, multiple = false)]
struct TailArg {
    #[arg(long, value_parser = parse_q, group = "tail")]
    q: Option<u32>,
    #[arg(long, value_parser = parse_r, group = "tail")]
    r: Option<Rational>,
}

impl TailArg {
    fn tail(&self) -> Tail {
        match (&self.q, &self.r) {
            (Some(q), _) => Tail::new(*q).expect("validated by the parser"),
            (None, Some(r)) => Tail::with_ratio(r.clone()).expect("validated by the parser"),
            (None, None) => unreachable!("clap requires one of --q and --r"),
        }
    }
}

#[derive(Args, Debug)]
struct TraceArgs {
    #[command(flatten)]
    tail: TailArg,
    /// Start point as `x,y`.
    #[arg(long, value_parser = parse_point)]
    start: Point,
    /// Defaults to the special slope `1/(2-r)`.
    #[arg(long, value_parser = parse_rational)]
    slope: Option<Rational>,
    #[arg(long, default_value_t = armadillo_core::flow::DEFAULT_MAX_EVENTS)]
    max_events: usize,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BscArgs {
    #[arg(long, value_parser = parse_q)]
    q: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    #[arg(long)]
    prime: bool,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CylArgs {
    #[arg(long, value_parser = parse_q)]
    q: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    k: u32,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DecomposeArgs {
    #[arg(long, value_parser = parse_q)]
    q: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    k_max: u32,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct IetArgs {
    #[arg(long, value_parser = parse_q)]
    q: u32,
    #[arg(long, value_parser = clap::value_parser!(u32).range(3..))]
    k: u32,
    #[arg(long, value_parser = parse_rational)]
    orbit: Rational,
    /// Stop on reaching this point; without it the orbit runs until it
    /// returns, falls into the gap, or exhausts --max-iter.
    #[arg(long, value_parser = parse_rational)]
    target: Option<Rational>,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    /// Print JSON instead of one value per line; with a path, write it there.
    #[arg(long, num_args = 0..=1)]
    json: Option<Option<PathBuf>>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// `A..B` (inclusive) or a single value.
    #[arg(long, value_parser = parse_q_range)]
    q: RangeInclusive<u32>,
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    k_max: u32,
    #[arg(long)]
    parallel: bool,
}

#[derive(Args, Debug)]
#[group(id = "figure", multiple = false)]
struct FigureArg {
    /// Cylinders 1..=N of the special direction.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..), group = "figure")]
    decompose: Option<u32>,
    #[arg(long, group = "figure")]
    spine: bool,
    #[arg(long, group = "figure")]
    horizontal: bool,
    #[arg(long, group = "figure")]
    vertical: bool,
}

#[derive(Args, Debug)]
struct RenderArgs {
    #[command(flatten)]
    tail: TailArg,
    #[command(flatten)]
    figure: FigureArg,
    #[arg(long)]
    out: PathBuf,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    s.parse::<Rational>().map_err(|e| e.to_string())
}

fn parse_q(s: &str) -> Result<u32, String> {
    let q: u32 = s.trim().parse().map_err(|_| format!("`{s}` is not a positive integer"))?;
    if q < 2 {
        return Err(format!("q must be at least 2, got {q}"));
    }
    Ok(q)
}

fn parse_r(s: &str) -> Result<Rational, String> {
    let r = parse_rational(s)?;
    if !r.is_positive() || r >= Rational::one() {
        return Err(format!("r must lie strictly between 0 and 1, got {r}"));
    }
    Ok(r)
}

fn parse_point(s: &str) -> Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or_else(|| format!("`{s}` is not of the form x,y"))?;
    Ok(Point::new(parse_rational(x)?, parse_rational(y)?))
}

fn parse_q_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (parse_q(lo)?, parse_q(hi.trim_start_matches('='))?),
        None => {
            let q = parse_q(s)?;
            (q, q)
        }
    };
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok(lo..=hi)
}

enum Failure {
    Usage(String),
    Check(String),
    Io(String),
}

type Outcome = Result<(), Failure>;

fn usage(flag: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("invalid value for '{flag}': {msg}"))
}

fn write_file(path: &PathBuf, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

/// Writes `text` to `path`, or to `out` when no path is given.
fn emit(out: &mut dyn Write, path: Option<&PathBuf>, text: &str) -> Outcome {
    match path {
        Some(p) => write_file(p, text),
        None => out.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string())),
    }
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("records serialize") + "\n"
}

fn cmd_trace(a: &TraceArgs, out: &mut dyn Write) -> Outcome {
    let tail = a.tail.tail();
    let slope = match &a.slope {
        Some(m) => Slope::from_value(m.clone()).map_err(|e| usage("--slope", e))?,
        None => special_slope(&tail),
    };
    let t = trace(&a.start, &slope, &tail, a.max_events).map_err(|e| usage("--start", e))?;
    emit(out, a.json.as_ref(), &to_json(&t.to_record()))
}

fn cmd_bsc(a: &BscArgs, out: &mut dyn Write) -> Outcome {
    if a.prime && a.k < 2 {
        return Err(usage("--k", "--prime needs k >= 2"));
    }
    let chain = if a.prime { new_piece(a.q, a.k) } else { bottom_chain(a.q, a.k) };
    let chain = chain.map_err(|e| Failure::Check(e.to_string()))?;
    emit(out, a.json.as_ref(), &to_json(&chains::SaddleChain::to_record(&chain, a.q)))
}

fn cmd_cyl(a: &CylArgs, out: &mut dyn Write) -> Outcome {
    let c = build_cylinder(a.q, a.k).map_err(|e| Failure::Check(e.to_string()))?;
    emit(out, a.json.as_ref(), &to_json(&CylinderRecord::from(&c)))
}

fn cmd_decompose(a: &DecomposeArgs, out: &mut dyn Write) -> Outcome {
    let d = decompose(a.q, a.k_max).map_err(|e| Failure::Check(e.to_string()))?;
    if let Some(path) = &a.svg {
        write_file(path, &render_scene(&decomposition_scene(&d, a.k_max as usize + 2)))?;
    }
    emit(out, a.json.as_ref(), &to_json(&d.to_record()))
}

#[derive(serde::Serialize)]
struct OrbitRecord {
    q: u32,
    k: u32,
    orbit: Vec<Rational>,
    /// `target`, `returned`, `gap` or `budget`.
    stop: &'static str,
}

fn cmd_iet(a: &IetArgs, out: &mut dyn Write) -> Outcome {
    let map = section_map(a.q, a.k).map_err(|e| usage("--k", e))?;
    let mut orbit = vec![a.orbit.clone()];
    let mut stop = "budget";
    let mut cur = a.orbit.clone();
    for _ in 0..=a.max_iter {
        if a.target.as_ref() == Some(&cur) {
            stop = "target";
            break;
        }
        if orbit.len() > 1 && a.target.is_none() && cur == a.orbit {
            stop = "returned";
            break;
        }
        if orbit.len() > a.max_iter {
            break;
        }
        match map.apply(&cur) {
            Ok(next) => {
                cur = next;
                orbit.push(cur.clone());
            }
            Err(IetError::InGap(_)) => {
                stop = "gap";
                break;
            }
            Err(e) => return Err(usage("--orbit", e)),
        }
    }
    let record = OrbitRecord { q: a.q, k: a.k, orbit, stop };
    match &a.json {
        Some(path) => emit(out, path.as_ref(), &to_json(&record))?,
        None => {
            let text: String = record.orbit.iter().map(|x| format!("{x}\n")).collect();
            emit(out, None, &text)?;
        }
    }
    match (&a.target, stop) {
        (Some(t), s) if s != "target" => {
            Err(Failure::Check(format!("target {t} not reached from {} (stopped: {s})", a.orbit)))
        }
        _ => Ok(()),
    }
}

fn cmd_verify(a: &VerifyArgs, out: &mut dyn Write) -> Outcome {
    let checks = suite(a.q.clone(), a.k_max, a.parallel);
    emit(out, None, &report(&checks))?;
    if all_passed(&checks) {
        Ok(())
    } else {
        Err(Failure::Check("verification failed".into()))
    }
}

fn cmd_render(a: &RenderArgs, _out: &mut dyn Write) -> Outcome {
    let tail = a.tail.tail();
    let f = &a.figure;
    let scene = if let Some(n) = f.decompose {
        let q = tail.q().filter(|_| a.tail.q.is_some()).ok_or_else(|| usage("--decompose", "needs --q"))?;
        let d = decompose(q, n).map_err(|e| Failure::Check(e.to_string()))?;
        decomposition_scene(&d, n as usize + 2)
    } else if f.spine {
        let s = chains::spine(&tail, SPINE_SQUARES).map_err(|e| Failure::Check(e.to_string()))?;
        spine_scene(&s, SPINE_SQUARES)
    } else if f.horizontal {
        axis_scene(&tail, AxisKind::Horizontal, AXIS_SQUARES)
    } else if f.vertical {
        axis_scene(&tail, AxisKind::Vertical, AXIS_SQUARES)
    } else {
        Scene::surface(&tail, SURFACE_SQUARES)
    };
    write_file(&a.out, &render_scene(&scene))
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                2
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let result = match &cli.command {
        Command::Trace(a) => cmd_trace(a, out),
        Command::Bsc(a) => cmd_bsc(a, out),
        Command::Cyl(a) => cmd_cyl(a, out),
        Command::Decompose(a) => cmd_decompose(a, out),
        Command::Iet(a) => cmd_iet(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Render(a) => cmd_render(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Check(msg)) | Err(Failure::Io(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("armadillo").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn bad_q_names_the_flag() {
        let (code, _, err) = run_str(&["bsc", "--q", "1", "--k", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("--q"), "{err}");
    }

    #[test]
    fn q_and_r_conflict() {
        let (code, _, err) = run_str(&["trace", "--q", "2", "--r", "1/2", "--start", "1,0"]);
        assert_eq!(code, 2);
        assert!(err.contains("--r") || err.contains("--q"), "{err}");
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_q_range("2..4"), Ok(2..=4));
        assert_eq!(parse_q_range("2..=4"), Ok(2..=4));
        assert_eq!(parse_q_range("3"), Ok(3..=3));
        assert!(parse_q_range("4..2").is_err());
        assert!(parse_q_range("1..3").is_err());
    }

    #[test]
    fn iet_orbit_lines() {
        let (code, out, _) = run_str(&["iet", "--q", "2", "--k", "3", "--orbit", "7/12", "--target", "1/4"]);
        assert_eq!(code, 0);
        assert_eq!(out.lines().collect::<Vec<_>>(), ["7/12", "1/4"]);
        let (code, _, err) =
            run_str(&["iet", "--q", "2", "--k", "3", "--orbit", "1/12", "--target", "1/4", "--max-iter", "0"]);
        assert_eq!(code, 1);
        assert!(err.contains("1/4"), "{err}");
    }

    #[test]
    fn not_entering_start_is_a_usage_error() {
        let (code, _, err) = run_str(&["trace", "--q", "2", "--start", "1,1"]);
        assert_eq!(code, 2);
        assert!(err.contains("--start"), "{err}");
    }
}
