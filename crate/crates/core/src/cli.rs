//! Command-line front end. Every subcommand takes flags and an optional JSON
//! config file (`--config`); flags override file values.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::annulus::{build_grid, solve_dirichlet, FourierPerturbation};
use crate::bifurcation::{bifurcation_table, find_lambda_star, write_bifurcation_csv};
use crate::cheeger::{gradient_bound_check, perimeter_area, CheegerReport};
use crate::continuation::{
    continue_branch, tangent_vector, verify_overdetermined, write_boundary_csv, NewtonOptions,
};
use crate::error::Error;
use crate::modes::{eigen_branch_table, write_branch_csv};
use crate::radial::{ProblemParams, RadialSolution};
use crate::validate::run_validation;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COMPUTE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(String),
    Io(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            Self::Usage(_) => EXIT_USAGE,
            Self::Compute(_) => EXIT_COMPUTE,
            Self::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Compute(m) | Self::Io(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } | Error::Singular(_) | Error::NoSignChange { .. } => {
                Self::Compute(e.to_string())
            }
            _ => Self::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

#[derive(Debug, Parser)]
#[command(name = "serrin-annulus", version, about = "Overdetermined torsion problem on annuli")]
struct Cli {
    /// JSON file with default values for the subcommand's options.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Eigenvalue branches mu_(k,j)(lambda) as CSV.
    Eigens(EigensArgs),
    /// Bifurcation values lambda_k as CSV.
    Bifurcations(BifurcationsArgs),
    /// Continue a bifurcating branch (n = 2).
    Branch(BranchArgs),
    /// Run the self-check suite.
    Validate(ValidateArgs),
    /// Perimeter/area ratio and gradient bound for a perturbed annulus.
    Cheeger(DomainArgs),
    /// Solve the Dirichlet problem on a perturbed annulus.
    Solve(SolveArgs),
}

/// Fills unset fields of `self` from `file`.
trait Merge {
    fn merge(self, file: Self) -> Self;
}

macro_rules! mergeable {
    ($ty:ident { $($field:ident),* $(,)? }) => {
        impl Merge for $ty {
            fn merge(self, file: Self) -> Self {
                Self { $($field: self.$field.or(file.$field)),* }
            }
        }
    };
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct EigensArgs {
    /// Space dimension n >= 2.
    #[arg(long)]
    n: Option<u32>,
    /// Degrees: a range `a..b` (inclusive) or a comma list.
    #[arg(long)]
    k: Option<String>,
    /// Inner radii as `start:stop:count`.
    #[arg(long)]
    lambda: Option<String>,
    /// Output CSV path (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}
mergeable!(EigensArgs { n, k, lambda, out });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct BifurcationsArgs {
    #[arg(long)]
    n: Option<u32>,
    /// Number of invariant bifurcation values.
    #[arg(long)]
    kmax: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}
mergeable!(BifurcationsArgs { n, kmax, tol, out });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct BranchArgs {
    #[arg(long)]
    n: Option<u32>,
    /// Bifurcating harmonic degree (even, >= 2).
    #[arg(long)]
    mode: Option<u32>,
    /// Comma-separated amplitudes, ordered by |s|.
    #[arg(long, allow_hyphen_values = true)]
    s: Option<String>,
    #[arg(long)]
    nr: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    /// Retained cosine modes J per boundary.
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long)]
    tol: Option<f64>,
    /// Directory for `branch.jsonl` and boundary CSVs.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}
mergeable!(BranchArgs { n, mode, s, nr, nt, modes, tol, out_dir });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct ValidateArgs {
    /// Reduced grids; skips branch continuation.
    #[arg(long)]
    quick: bool,
    /// Write the JSON summary here as well as to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Merge for ValidateArgs {
    fn merge(self, file: Self) -> Self {
        Self {
            quick: self.quick || file.quick,
            out: self.out.or(file.out),
        }
    }
}

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
struct DomainArgs {
    #[arg(long)]
    lambda: Option<f64>,
    /// Inner cosine coefficients of cos(2j theta), comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    coeffs1: Option<String>,
    /// Outer cosine coefficients of cos(2j theta), comma-separated.
    #[arg(long, allow_hyphen_values = true)]
    coeffs2: Option<String>,
    #[arg(long)]
    nr: Option<usize>,
    #[arg(long)]
    nt: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}
mergeable!(DomainArgs { lambda, coeffs1, coeffs2, nr, nt, out });

#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(from = "SolveFile")]
struct SolveArgs {
    #[command(flatten)]
    domain: DomainArgs,
    /// Inner Dirichlet value (defaults to the radial a_lambda).
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    /// Directory for `inner_trace.csv` and `outer_trace.csv`.
    #[arg(long)]
    traces_dir: Option<PathBuf>,
}

/// Flat config-file form of [`SolveArgs`].
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveFile {
    lambda: Option<f64>,
    coeffs1: Option<String>,
    coeffs2: Option<String>,
    nr: Option<usize>,
    nt: Option<usize>,
    out: Option<PathBuf>,
    a: Option<f64>,
    traces_dir: Option<PathBuf>,
}

impl From<SolveFile> for SolveArgs {
    fn from(f: SolveFile) -> Self {
        Self {
            domain: DomainArgs {
                lambda: f.lambda,
                coeffs1: f.coeffs1,
                coeffs2: f.coeffs2,
                nr: f.nr,
                nt: f.nt,
                out: f.out,
            },
            a: f.a,
            traces_dir: f.traces_dir,
        }
    }
}

impl Merge for SolveArgs {
    fn merge(self, file: Self) -> Self {
        Self {
            domain: self.domain.merge(file.domain),
            a: self.a.or(file.a),
            traces_dir: self.traces_dir.or(file.traces_dir),
        }
    }
}

fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    match path {
        None => Ok(T::default()),
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| io_err(p, e))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Usage(format!("{}: invalid config: {e}", p.display())))
        }
    }
}

fn required<T>(value: Option<T>, name: &str) -> Result<T, CliError> {
    value.ok_or_else(|| CliError::Usage(format!("missing required option --{name}")))
}

fn parse_f64(text: &str, what: &str) -> Result<f64, CliError> {
    text.trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{what}: cannot parse '{text}' as a number")))
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(',').map(|t| parse_f64(t, what)).collect()
}

/// `a..b` (inclusive) or `a,b,c`.
pub fn parse_degrees(text: &str) -> Result<Vec<u32>, CliError> {
    let bad = || CliError::Usage(format!("--k: cannot parse '{text}'"));
    let out: Vec<u32> = if let Some((a, b)) = text.split_once("..") {
        let a: u32 = a.trim().parse().map_err(|_| bad())?;
        let b: u32 = b.trim().parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        text.split(',')
            .map(|t| t.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    if out.is_empty() {
        return Err(CliError::Usage("--k: empty degree list".into()));
    }
    Ok(out)
}

/// `start:stop:count`, both ends included; a single number is one point.
pub fn parse_lambda_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [one] => Ok(vec![parse_f64(one, "--lambda")?]),
        [a, b, count] => {
            let (a, b) = (parse_f64(a, "--lambda")?, parse_f64(b, "--lambda")?);
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("--lambda: bad count in '{text}'")))?;
            if count == 0 {
                return Err(CliError::Usage("--lambda: empty grid".into()));
            }
            if count == 1 {
                return Ok(vec![a]);
            }
            Ok((0..count)
                .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
                .collect())
        }
        _ => Err(CliError::Usage(format!("--lambda: expected start:stop:count, got '{text}'"))),
    }
}

/// Writes to a file, or to stdout when no path is given.
fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| io_err(p, e))?;
            let mut w = BufWriter::new(file);
            f(&mut w).and_then(|_| w.flush()).map_err(|e| io_err(p, e))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            f(&mut lock).map_err(|e| io_err(Path::new("<stdout>"), e))
        }
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Compute(e.to_string()))?;
    if let Some(p) = path {
        fs::write(p, format!("{text}\n")).map_err(|e| io_err(p, e))?;
    }
    println!("{text}");
    Ok(())
}

fn cmd_eigens(args: EigensArgs) -> Result<(), CliError> {
    let n = required(args.n, "n")?;
    let degrees = parse_degrees(&required(args.k, "k")?)?;
    let lambdas = parse_lambda_grid(&args.lambda.unwrap_or_else(|| "0.01:0.99:99".into()))?;
    for &l in &lambdas {
        ProblemParams::new(n, l)?;
    }
    let rows = eigen_branch_table(n, &degrees, &lambdas)?;
    with_output(args.out.as_deref(), |w| write_branch_csv(&rows, w))
}

fn cmd_bifurcations(args: BifurcationsArgs) -> Result<(), CliError> {
    let n = required(args.n, "n")?;
    let kmax = required(args.kmax, "kmax")?;
    let tol = args.tol.unwrap_or(1e-12);
    if n < 2 {
        return Err(CliError::Usage(format!("--n must be >= 2, got {n}")));
    }
    if kmax == 0 {
        return Err(CliError::Usage("--kmax must be >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(CliError::Usage(format!("--tol must be > 0, got {tol}")));
    }
    let rows = bifurcation_table(n, kmax, tol)?;
    with_output(args.out.as_deref(), |w| write_bifurcation_csv(&rows, w))
}

#[derive(Serialize)]
struct BranchRecord<'a> {
    #[serde(flatten)]
    point: &'a crate::continuation::BranchPoint,
    orthogonality: f64,
    w_norm: f64,
    overdetermined: crate::continuation::OverdeterminedReport,
    cheeger: CheegerReport,
}

fn cmd_branch(args: BranchArgs) -> Result<(), CliError> {
    let n = args.n.unwrap_or(2);
    if n != 2 {
        return Err(CliError::Usage(format!("branch continuation supports --n 2 only, got {n}")));
    }
    let mode = args.mode.unwrap_or(2);
    if mode < 2 || mode % 2 != 0 {
        return Err(CliError::Usage(format!("--mode must be even and >= 2, got {mode}")));
    }
    let amplitudes = parse_list(&required(args.s, "s")?, "--s")?;
    if amplitudes.is_empty() {
        return Err(CliError::Usage("--s: empty amplitude list".into()));
    }
    let defaults = NewtonOptions::default();
    let opts = NewtonOptions {
        nr: args.nr.unwrap_or(defaults.nr),
        nt: args.nt.unwrap_or(defaults.nt),
        modes: args.modes.unwrap_or((mode as usize / 2 + 4).max(defaults.modes)),
        tol: args.tol.unwrap_or(defaults.tol),
        ..defaults
    };
    if opts.nr < 8 || opts.nt < 8 || opts.nt % 2 != 0 {
        return Err(CliError::Usage("grid needs --nr >= 8 and even --nt >= 8".into()));
    }
    if opts.modes < mode as usize / 2 + 4 || 4 * opts.modes > opts.nt {
        return Err(CliError::Usage(format!(
            "--modes must lie in [{}, nt/4]",
            mode as usize / 2 + 4
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(CliError::Usage("--tol must be > 0".into()));
    }
    let out_dir = args.out_dir.unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out_dir).map_err(|e| io_err(&out_dir, e))?;

    let star = find_lambda_star(2, mode, 1e-13)?.lambda_star;
    let tangent = tangent_vector(2, star, mode)?;
    let trace = continue_branch(tangent, &amplitudes, &opts);

    let jsonl = out_dir.join("branch.jsonl");
    let mut lines = String::new();
    for (i, p) in trace.points.iter().enumerate() {
        let record = BranchRecord {
            point: p,
            orthogonality: p.orthogonality(),
            w_norm: p.w_norm(),
            overdetermined: verify_overdetermined(p)?,
            cheeger: crate::cheeger::cheeger_report(p)?,
        };
        lines.push_str(&serde_json::to_string(&record).map_err(|e| CliError::Compute(e.to_string()))?);
        lines.push('\n');
        let csv = out_dir.join(format!("boundary_{i:03}.csv"));
        with_output(Some(&csv), |w| write_boundary_csv(p, 256, w))?;
    }
    fs::write(&jsonl, lines).map_err(|e| io_err(&jsonl, e))?;
    match trace.failure {
        None => Ok(()),
        Some((s, e)) => Err(CliError::Compute(format!(
            "branch stopped at s = {s} after {} converged points: {e}",
            trace.points.len()
        ))),
    }
}

fn cmd_validate(args: ValidateArgs) -> Result<(), CliError> {
    let summary = run_validation(args.quick);
    write_json(args.out.as_deref(), &summary)?;
    if summary.passed {
        Ok(())
    } else {
        let names: Vec<&str> = summary
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::Compute(format!("failed checks: {}", names.join(", "))))
    }
}

struct Domain {
    lambda: f64,
    perturbation: FourierPerturbation,
    nr: usize,
    nt: usize,
}

fn domain(args: &DomainArgs) -> Result<Domain, CliError> {
    let lambda = required(args.lambda, "lambda")?;
    ProblemParams::new(2, lambda)?;
    let coeffs1 = parse_list(args.coeffs1.as_deref().unwrap_or(""), "--coeffs1")?;
    let coeffs2 = parse_list(args.coeffs2.as_deref().unwrap_or(""), "--coeffs2")?;
    let perturbation = FourierPerturbation::new(coeffs1, coeffs2);
    perturbation.check_admissible(lambda)?;
    let nr = args.nr.unwrap_or(32);
    let nt = args.nt.unwrap_or(64);
    if nr < 8 || nt < 8 || nt % 2 != 0 {
        return Err(CliError::Usage("grid needs --nr >= 8 and even --nt >= 8".into()));
    }
    Ok(Domain {
        lambda,
        perturbation,
        nr,
        nt,
    })
}

fn cmd_cheeger(args: DomainArgs) -> Result<(), CliError> {
    let d = domain(&args)?;
    let rad = RadialSolution::new(ProblemParams::new(2, d.lambda)?);
    let grid = build_grid(d.lambda, &d.perturbation, d.nr, d.nt)?;
    let sol = solve_dirichlet(&grid, rad.a)?;
    // the unperturbed annulus has the exact constant
    let c = if is_zero(&d.perturbation) {
        rad.c
    } else {
        sol.pooled_neumann_mean()
    };
    let geo = perimeter_area(d.lambda, &d.perturbation)?;
    let grad = gradient_bound_check(&sol, c);
    write_json(args.out.as_deref(), &CheegerReport::assemble(&geo, c, &grad))
}

fn is_zero(p: &FourierPerturbation) -> bool {
    p.coeffs1.iter().chain(&p.coeffs2).all(|c| *c == 0.0)
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let d = domain(&args.domain)?;
    let a = match args.a {
        Some(a) => a,
        None => RadialSolution::new(ProblemParams::new(2, d.lambda)?).a,
    };
    let grid = build_grid(d.lambda, &d.perturbation, d.nr, d.nt)?;
    let sol = solve_dirichlet(&grid, a)?;
    if let Some(dir) = &args.traces_dir {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        with_output(Some(&dir.join("inner_trace.csv")), |w| sol.inner.write_csv(w))?;
        with_output(Some(&dir.join("outer_trace.csv")), |w| sol.outer.write_csv(w))?;
    }
    write_json(args.domain.out.as_deref(), &sol.summary())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.config.as_deref();
    match cli.command {
        Command::Eigens(a) => cmd_eigens(a.merge(load(cfg)?)),
        Command::Bifurcations(a) => cmd_bifurcations(a.merge(load(cfg)?)),
        Command::Branch(a) => cmd_branch(a.merge(load(cfg)?)),
        Command::Validate(a) => cmd_validate(a.merge(load(cfg)?)),
        Command::Cheeger(a) => cmd_cheeger(a.merge(load(cfg)?)),
        Command::Solve(a) => cmd_solve(a.merge(load(cfg)?)),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("{first}");
            return EXIT_USAGE;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message().replace('\n', " "));
            e.code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degree_lists() {
        assert_eq!(parse_degrees("0..3").unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(parse_degrees("1, 4,7").unwrap(), vec![1, 4, 7]);
        assert!(parse_degrees("3..1").is_err());
        assert!(parse_degrees("x").is_err());
    }

    #[test]
    fn lambda_grids() {
        let g = parse_lambda_grid("0.01:0.99:99").unwrap();
        assert_eq!(g.len(), 99);
        assert!((g[0] - 0.01).abs() < 1e-15 && (g[98] - 0.99).abs() < 1e-15);
        assert_eq!(parse_lambda_grid("0.5").unwrap(), vec![0.5]);
        assert!(parse_lambda_grid("0.1:0.9:0").is_err());
        assert!(parse_lambda_grid("0.1:0.9").is_err());
    }

    #[test]
    fn flags_override_config() {
        let flags = EigensArgs {
            n: Some(3),
            ..Default::default()
        };
        let file: EigensArgs = serde_json::from_str(r#"{"n": 2, "k": "0..1"}"#).unwrap();
        let merged = flags.merge(file);
        assert_eq!(merged.n, Some(3));
        assert_eq!(merged.k.as_deref(), Some("0..1"));
    }

    #[test]
    fn error_classes() {
        assert_eq!(CliError::from(Error::Dimension(1)).code(), EXIT_USAGE);
        assert_eq!(CliError::from(Error::Singular("x")).code(), EXIT_COMPUTE);
        assert_eq!(run(["serrin-annulus", "bogus"]), EXIT_USAGE);
        assert_eq!(run(["serrin-annulus", "eigens", "--n", "2", "--k", "1", "--lambda", "0.1:0.2:0"]), EXIT_USAGE);
    }
}
