use abelcycles::bounds::{khovanskii_bound, paper_bounds};
use abelcycles::curves::{contour_m, h_branch_samples, solve_tangency_params, CurveError, CurveParams};
use abelcycles::flow::{AbelEq, Tolerances};
use abelcycles::oracle::{brute_count, cos_family, BruteCount, OracleConfig, OracleError};
use abelcycles::poincare::{find_cycles, SearchConfig};
use abelcycles::report::{analyze, AnalysisOptions, SCHEMA_VERSION};
use abelcycles::sweep::{scan, GridSpec, ScanRow};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

mod json;

const EXIT_BAD_INPUT: u8 = 2;
const EXIT_PARTIAL: u8 = 3;

/// Limit cycles of x' = a(t)|x| + b(t) with a, b = c0 + c1 cos t + c2 sin t.
#[derive(Parser, Debug)]
#[command(name = "abelcycles", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Full report for one equation.
    Analyze(AnalyzeArgs),
    /// Analyze every cell of a coefficient grid.
    Scan(ScanArgs),
    /// Export the h = 0 branch, the m = 0 components and the tangency points.
    Curves(CurvesArgs),
    /// Print the bound chain, or a Khovanskii bound for given degrees.
    Bounds(BoundsArgs),
    /// Brute-force cycle count by dense sampling of the return map.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct Common {
    /// Coefficients of a(t) as c0,c1,c2.
    #[arg(long = "a", value_name = "c0,c1,c2", allow_hyphen_values = true)]
    a: String,
    /// Coefficients of b(t) as c0,c1,c2, or a single b0 for sin t + b0 (1 - cos t).
    #[arg(long = "b", value_name = "c0,c1,c2", allow_hyphen_values = true)]
    b: String,
}

#[derive(Args, Debug)]
struct Output {
    /// Write here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AnalyzeArgs {
    #[command(flatten)]
    coeffs: Common,
    /// Integrator tolerances.
    #[arg(long, value_name = "REL,ABS")]
    tol: Option<String>,
    /// Cells per side of the grid used to count m = 0 components.
    #[arg(long, default_value_t = 512)]
    component_grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// e.g. "a0=-1:1:3;a2=1;b0=-1:1:3".
    #[arg(long, value_name = "SPEC", allow_hyphen_values = true)]
    grid: String,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    #[arg(long, value_name = "REL,ABS")]
    tol: Option<String>,
    #[arg(long, default_value_t = 512)]
    component_grid: usize,
    /// Fill in the wall_ms column. Timed output is not reproducible byte for byte.
    #[arg(long)]
    timing: bool,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct CurvesArgs {
    #[command(flatten)]
    coeffs: Common,
    /// Grid cells per side for the contour and samples along the h = 0 branch.
    #[arg(long, default_value_t = 512)]
    resolution: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct BoundsArgs {
    /// Degrees m_1,...,m_n of the n equations; prints that Khovanskii bound only.
    #[arg(long, value_name = "m1,m2,...")]
    degrees: Option<String>,
    /// Number of exponentials.
    #[arg(long, default_value_t = 0, requires = "degrees")]
    k: u64,
    /// Number of sine/cosine pairs.
    #[arg(long, default_value_t = 0, requires = "degrees")]
    rho: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long = "a", value_name = "c0,c1,c2", allow_hyphen_values = true, required_unless_present = "cos_family")]
    a: Option<String>,
    #[arg(long = "b", value_name = "c0,c1,c2", allow_hyphen_values = true, required_unless_present = "cos_family")]
    b: Option<String>,
    /// Use x' = eps cos(k t)|x| + sin t instead of --a/--b.
    #[arg(long, value_name = "EPS,K", allow_hyphen_values = true, conflicts_with_all = ["a", "b"])]
    cos_family: Option<String>,
    /// Sample x0 in [-W, W]; defaults to a window derived from the coefficients.
    #[arg(long, value_name = "W")]
    window: Option<f64>,
    /// Number of sample points.
    #[arg(long, default_value_t = 4096)]
    grid: usize,
    /// RK4 steps per period; 0 picks from the size of a.
    #[arg(long, default_value_t = 0)]
    steps: usize,
    /// REL is the bisection tolerance on roots; ABS is unused by the oracle.
    #[arg(long, value_name = "REL,ABS")]
    tol: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(flatten)]
    output: Output,
}

/// Bad user input (exit code 2), or a failure to write the output.
#[derive(Debug)]
enum CliError {
    Input(String),
    Io(io::Error),
}

fn bad(msg: String) -> CliError {
    CliError::Input(msg)
}

macro_rules! input_error_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Input(e.to_string())
            }
        }
    )*};
}

input_error_from!(
    abelcycles::sweep::GridError,
    abelcycles::report::AnalysisError,
    abelcycles::bounds::BoundError,
    serde_json::Error
);

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Io(e)
    }
}

fn parse_list(flag: &str, s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|p| {
            let v: f64 = p.trim().parse().map_err(|_| bad(format!("--{flag}: `{}` is not a number", p.trim())))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(bad(format!("--{flag}: `{}` is not finite", p.trim())))
            }
        })
        .collect()
}

fn parse_equation(a: &str, b: &str) -> Result<AbelEq, CliError> {
    let a = parse_list("a", a)?;
    let b = parse_list("b", b)?;
    let a: [f64; 3] = a.try_into().map_err(|v: Vec<f64>| bad(format!("--a takes 3 values, got {}", v.len())))?;
    let b = match b.as_slice() {
        &[b0] => [b0, 0.0 - b0, 1.0],
        &[b0, b1, b2] => [b0, b1, b2],
        other => return Err(bad(format!("--b takes 1 or 3 values, got {}", other.len()))),
    };
    Ok(AbelEq::from_coeffs(a, b))
}

fn parse_tol(s: Option<&str>) -> Result<Tolerances, CliError> {
    let Some(s) = s else { return Ok(Tolerances::default()) };
    match parse_list("tol", s)?.as_slice() {
        &[rel, abs] if rel > 0.0 && abs >= 0.0 => Ok(Tolerances::new(rel, abs)),
        &[_, _] => Err(bad("--tol needs REL > 0 and ABS >= 0".into())),
        other => Err(bad(format!("--tol takes REL,ABS, got {} values", other.len()))),
    }
}

fn analysis_options(tol: Option<&str>, component_grid: usize) -> Result<AnalysisOptions, CliError> {
    if component_grid < 4 {
        return Err(bad("--component-grid must be at least 4".into()));
    }
    let search = SearchConfig { tol: parse_tol(tol)?, ..SearchConfig::default() };
    Ok(AnalysisOptions { search, component_grid, skip_geometry: false })
}

fn sink(out: &Output) -> io::Result<Box<dyn Write>> {
    Ok(match &out.out {
        Some(p) => Box::new(io::BufWriter::new(File::create(p)?)),
        None => Box::new(io::BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize + ?Sized>(out: &Output, value: &T) -> io::Result<()> {
    let text = json::to_string(value).map_err(io::Error::other)?;
    let mut w = sink(out)?;
    w.write_all(text.as_bytes())?;
    w.flush()
}

fn write_csv<T: Serialize>(out: &Output, rows: &[T]) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(sink(out)?);
    for r in rows {
        w.serialize(r).map_err(csv_io)?;
    }
    w.flush()
}

fn csv_io(e: csv::Error) -> io::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(e) => e,
        other => io::Error::other(format!("{other:?}")),
    }
}

/// Wrapper that pins the schema version on non-report outputs too.
#[derive(Serialize)]
struct Versioned<T: Serialize> {
    schema_version: u32,
    #[serde(flatten)]
    body: T,
}

fn cmd_analyze(args: &AnalyzeArgs) -> Result<u8, CliError> {
    let eq = parse_equation(&args.coeffs.a, &args.coeffs.b)?;
    let opts = analysis_options(args.tol.as_deref(), args.component_grid)?;
    let report = analyze(&eq, &opts)?;
    let partial = report.partial;
    match args.format {
        Format::Json => write_json(&args.output, &report)?,
        Format::Csv => {
            let c = [eq.a.c0, eq.a.c1, eq.a.c2, eq.b.c0, eq.b.c1, eq.b.c2];
            write_csv(&args.output, &[ScanRow::summarize(0, c, Ok(report))])?
        }
    }
    Ok(if partial { EXIT_PARTIAL } else { 0 })
}

fn cmd_scan(args: &ScanArgs) -> Result<u8, CliError> {
    let spec = GridSpec::parse(&args.grid)?;
    let opts = analysis_options(args.tol.as_deref(), args.component_grid)?;
    let rows = scan(&spec, &opts, args.jobs, args.timing)?;
    match args.format {
        Format::Csv => write_csv(&args.output, &rows)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                grid: &'a GridSpec,
                rows: &'a [ScanRow],
            }
            write_json(&args.output, &Versioned { schema_version: SCHEMA_VERSION, body: Body { grid: &spec, rows: &rows } })?
        }
    }
    Ok(if rows.iter().any(|r| r.partial) { EXIT_PARTIAL } else { 0 })
}

#[derive(Serialize)]
struct CurveRow {
    kind: &'static str,
    component: Option<usize>,
    index: usize,
    t: f64,
    x: f64,
    closed: Option<bool>,
    h_residual: Option<f64>,
    m_residual: Option<f64>,
    minor_residual: Option<f64>,
}

impl CurveRow {
    fn point(kind: &'static str, component: Option<usize>, index: usize, (t, x): (f64, f64)) -> Self {
        CurveRow {
            kind,
            component,
            index,
            t,
            x,
            closed: None,
            h_residual: None,
            m_residual: None,
            minor_residual: None,
        }
    }
}

fn cmd_curves(args: &CurvesArgs) -> Result<u8, CliError> {
    let eq = parse_equation(&args.coeffs.a, &args.coeffs.b)?;
    if args.resolution < 4 {
        return Err(bad("--resolution must be at least 4".into()));
    }
    let p = match CurveParams::from_eq(&eq) {
        Ok(p) => p,
        Err(e @ (CurveError::A0Zero | CurveError::Normalize(_))) => return Err(bad(e.to_string())),
        Err(e) => {
            eprintln!("abelcycles: {e}");
            return Ok(EXIT_PARTIAL);
        }
    };
    let branch = h_branch_samples(&p, args.resolution);
    let (contour, tangency) = match (contour_m(&p, args.resolution, true), solve_tangency_params(&p)) {
        (Ok(c), Ok(t)) => (c, t),
        (Err(e), _) | (_, Err(e)) => {
            eprintln!("abelcycles: {e}");
            return Ok(EXIT_PARTIAL);
        }
    };
    match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                params: &'a CurveParams,
                h_branch: &'a [(f64, f64)],
                m_components: &'a abelcycles::curves::Contour,
                tangency: &'a abelcycles::curves::TangencyReport,
            }
            let body = Body { params: &p, h_branch: &branch, m_components: &contour, tangency: &tangency };
            write_json(&args.output, &Versioned { schema_version: SCHEMA_VERSION, body })?;
        }
        Format::Csv => {
            let mut rows: Vec<CurveRow> =
                branch.iter().enumerate().map(|(i, &pt)| CurveRow::point("h_branch", None, i, pt)).collect();
            for (k, pl) in contour.components.iter().enumerate() {
                for (i, &pt) in pl.points.iter().enumerate() {
                    rows.push(CurveRow { closed: Some(pl.closed), ..CurveRow::point("m_component", Some(k), i, pt) });
                }
            }
            for (i, q) in tangency.points.iter().enumerate() {
                rows.push(CurveRow {
                    h_residual: Some(q.h_residual),
                    m_residual: Some(q.m_residual),
                    minor_residual: Some(q.minor_residual),
                    ..CurveRow::point("tangency", None, i, (q.t, q.x))
                });
            }
            write_csv(&args.output, &rows)?;
        }
    }
    Ok(if tangency.partial { EXIT_PARTIAL } else { 0 })
}

fn cmd_bounds(args: &BoundsArgs) -> Result<u8, CliError> {
    #[derive(Serialize)]
    struct Entry {
        name: String,
        value: String,
    }
    let entries: Vec<Entry> = match &args.degrees {
        Some(d) => {
            let degrees = d
                .split(',')
                .map(|s| s.trim().parse::<u64>().map_err(|_| bad(format!("--degrees: `{}` is not a degree", s.trim()))))
                .collect::<Result<Vec<_>, _>>()?;
            // Big values do not fit any JSON number type, so they travel as decimal strings.
            let v = khovanskii_bound(degrees.len(), &degrees, args.k, args.rho)?;
            vec![Entry { name: "khovanskii".into(), value: v.to_string() }]
        }
        None => {
            let b = paper_bounds();
            let v = serde_json::to_value(&b)?;
            let obj = v.as_object().expect("struct serializes to an object");
            // keep the declaration order of BoundReport
            [
                "khovanskii_region",
                "khovanskii_total",
                "coarse_total",
                "bezout_tangency",
                "groebner_tangency",
                "component_bound",
                "assembled_bezout",
                "assembled_groebner",
            ]
            .iter()
            .map(|k| Entry { name: k.to_string(), value: obj[*k].to_string() })
            .collect()
        }
    };
    match args.format {
        Format::Csv => write_csv(&args.output, &entries)?,
        Format::Json if args.degrees.is_some() => {
            write_json(&args.output, &Versioned { schema_version: SCHEMA_VERSION, body: &entries[0] })?
        }
        Format::Json => write_json(&args.output, &Versioned { schema_version: SCHEMA_VERSION, body: paper_bounds() })?,
    }
    Ok(0)
}

fn cmd_oracle(args: &OracleArgs) -> Result<u8, CliError> {
    let tol = parse_tol(args.tol.as_deref())?;
    if args.grid < 16 {
        return Err(bad("--grid must be at least 16".into()));
    }
    if let Some(w) = args.window {
        if !(w.is_finite() && w > 0.0) {
            return Err(bad("--window must be positive".into()));
        }
    }
    let cfg = OracleConfig { grid: args.grid, tol: tol.rel, steps: args.steps, ..OracleConfig::default() };
    let brute = |r: Result<BruteCount, OracleError>| -> Result<BruteCount, CliError> {
        r.map_err(|e| match e {
            OracleError::WindowTooSmall { .. } | OracleError::Config(_) => bad(e.to_string()),
        })
    };

    #[derive(Serialize)]
    struct Body {
        equation: Option<AbelEq>,
        cos_family: Option<(f64, f64)>,
        count: usize,
        suspected_continuum: bool,
        brute: BruteCount,
        /// Isolated cycles reported by the return-map search, when available.
        find_cycles: Option<usize>,
        agree: Option<bool>,
    }

    let body = if let Some(cf) = &args.cos_family {
        let (eps, k) = match parse_list("cos-family", cf)?.as_slice() {
            &[eps, k] => (eps, k),
            other => return Err(bad(format!("--cos-family takes EPS,K, got {} values", other.len()))),
        };
        let r = brute(brute_count(&cos_family(eps, k), args.window, &cfg))?;
        Body {
            equation: None,
            cos_family: Some((eps, k)),
            count: r.count(),
            suspected_continuum: r.suspected_continuum(),
            brute: r,
            find_cycles: None,
            agree: None,
        }
    } else {
        let eq = parse_equation(args.a.as_deref().unwrap_or_default(), args.b.as_deref().unwrap_or_default())?;
        let r = brute(brute_count(&eq, args.window, &cfg))?;
        let search = SearchConfig { tol, ..SearchConfig::default() };
        let fc = find_cycles(&eq, &search).ok().map(|c| c.cycles.len());
        Body {
            equation: Some(eq),
            cos_family: None,
            count: r.count(),
            suspected_continuum: r.suspected_continuum(),
            agree: fc.map(|n| !r.suspected_continuum() && n == r.count()),
            brute: r,
            find_cycles: fc,
        }
    };
    let partial = args.cos_family.is_none() && body.find_cycles.is_none();
    match args.format {
        Format::Json => write_json(&args.output, &Versioned { schema_version: SCHEMA_VERSION, body })?,
        Format::Csv => {
            #[derive(Serialize)]
            struct Root {
                kind: &'static str,
                x0: f64,
                x1: Option<f64>,
            }
            let mut rows: Vec<Root> = body.brute.roots.iter().map(|&x0| Root { kind: "cycle", x0, x1: None }).collect();
            rows.extend(body.brute.continuum.iter().map(|&(lo, hi)| Root { kind: "continuum", x0: lo, x1: Some(hi) }));
            write_csv(&args.output, &rows)?;
        }
    }
    Ok(if partial { EXIT_PARTIAL } else { 0 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze(a) => cmd_analyze(a),
        Command::Scan(a) => cmd_scan(a),
        Command::Curves(a) => cmd_curves(a),
        Command::Bounds(a) => cmd_bounds(a),
        Command::Oracle(a) => cmd_oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(CliError::Input(msg)) => {
            eprintln!("abelcycles: {msg}");
            ExitCode::from(EXIT_BAD_INPUT)
        }
        // The reader went away (`| head`); nothing left to report.
        Err(CliError::Io(e)) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(CliError::Io(e)) => {
            eprintln!("abelcycles: cannot write output: {e}");
            ExitCode::from(EXIT_BAD_INPUT)
        }
    }
}
