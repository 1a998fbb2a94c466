use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ddjacobi::diagnostics::{self, SpectrumSource};
use ddjacobi::homotopy::{self, TrackerConfig};
use ddjacobi::io::{self, HistoryRow};
use ddjacobi::spectral::{self, ClusterResult};
use ddjacobi::{reference, solver, Error, SolveOptions, Status, SymMatrix};

const EXIT_USAGE: u8 = 64;
const EXIT_DATA: u8 = 65;

/// Targeted Jacobi eigensolver. Indices on the command line are 1-based and
/// refer to the ascending order of the diagonal.
#[derive(Parser)]
#[command(name = "ddjacobi", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Approximate one eigenpair.
    Eig(EigArgs),
    /// All eigenvalues by cyclic Jacobi.
    Full(FullArgs),
    /// Two-way spectral clustering.
    Cluster(ClusterArgs),
    /// Track all eigenpaths from diag(A) to A.
    Track(TrackArgs),
    /// Write a test matrix.
    Gen(GenArgs),
    /// Convergence diagnostics for one target.
    Diagnose(DiagnoseArgs),
}

#[derive(Args)]
struct SolveFlags {
    /// Rotate only entries with |a_mk| >= tol.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    /// Stop when off(A(m,:)) <= stop_rel·‖A‖_F [default: sqrt(eps)].
    #[arg(long)]
    stop_rel: Option<f64>,
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u64).range(1..))]
    max_sweeps: u64,
}

impl SolveFlags {
    fn options(&self, m: usize) -> SolveOptions {
        let mut o = SolveOptions::new(m).tol(self.tol).max_sweeps(self.max_sweeps as usize);
        if let Some(r) = self.stop_rel {
            o = o.stop_rel(r);
        }
        o
    }
}

#[derive(Args)]
struct EigArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    m: u64,
    #[command(flatten)]
    solve: SolveFlags,
    /// Print the unit eigenvector.
    #[arg(long)]
    vector: bool,
    /// Write the per-sweep history CSV.
    #[arg(long)]
    history: Option<PathBuf>,
    /// Compare against the full cyclic Jacobi oracle.
    #[arg(long = "ref")]
    reference: bool,
}

#[derive(Args)]
struct FullArgs {
    #[arg(long)]
    input: PathBuf,
    /// Write eigenvalues as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClusterArgs {
    /// Points CSV, one point per row.
    #[arg(long, conflicts_with = "weights", required_unless_present = "weights")]
    points: Option<PathBuf>,
    /// Weight matrix (Matrix Market or dense CSV).
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value_t = 10.0)]
    sigma: f64,
    /// Write `index,label,fiedler_entry` CSV.
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    history: Option<PathBuf>,
    #[command(flatten)]
    solve: SolveFlags,
}

#[derive(Args)]
struct TrackArgs {
    #[arg(long)]
    input: PathBuf,
    /// Step constant c in s = min(1 − t, c·γ̂/‖Ω‖_F).
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Write the per-step CSV.
    #[arg(long)]
    path: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    /// Solve the eigenpairs of each step concurrently.
    #[arg(long)]
    parallel: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Example1,
    Drk1,
    RandomDd,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.005)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    m: u64,
    /// Compute γ from the oracle spectrum (O(n³)).
    #[arg(long)]
    exact: bool,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidOptions(msg) => Failure::Usage(msg),
            e => Failure::Data(e),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn status_code(s: Status) -> u8 {
    match s {
        Status::Converged => 0,
        Status::ToleranceFloor => 2,
        Status::MaxSweeps => 3,
        Status::Stagnated => 4,
    }
}

fn target(m: u64, n: usize) -> Result<usize, Failure> {
    let m = m as usize;
    if m > n {
        return Err(Failure::Usage(format!("--m {m} exceeds the matrix order {n}")));
    }
    Ok(m - 1)
}

fn join(v: &[f64]) -> String {
    v.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), |v| v.to_string())
}

fn write_rows(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), Error> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_eig(args: &EigArgs) -> CmdResult {
    let a = io::read_matrix(&args.input)?;
    let m = target(args.m, a.n())?;
    let mut opts = args.solve.options(m);
    opts.want_vector = args.vector;
    opts.record_history = args.history.is_some();
    let r = solver::solve(&a, &opts)?;
    println!("lambda_hat={}", r.lambda_hat);
    println!("status={}", r.status);
    println!("sweeps={}", r.sweeps_used);
    println!("off_row_m={}", r.off_row_m);
    if args.vector {
        println!("vector={}", join(r.eigenvector()?));
    }
    let lambda_ref = if args.reference {
        let values = reference::eigenvalues(&a)?;
        println!("lambda_ref={}", values[m]);
        println!("err_vs_ref={}", (r.lambda_hat - values[m]).abs());
        Some(values[m])
    } else {
        None
    };
    if let Some(path) = &args.history {
        let rows: Vec<HistoryRow> = r
            .history
            .iter()
            .map(|rec| HistoryRow::from_record(rec, lambda_ref))
            .collect();
        io::write_history_csv(path, &rows)?;
    }
    Ok(status_code(r.status))
}

fn cmd_full(args: &FullArgs) -> CmdResult {
    let a = io::read_matrix(&args.input)?;
    let d = reference::full_jacobi_default(&a)?;
    println!("n={}", a.n());
    println!("sweeps={}", d.sweeps);
    println!("eigenvalues={}", join(&d.values));
    if let Some(path) = &args.out {
        let rows = d
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| vec![(i + 1).to_string(), v.to_string()]);
        write_rows(path, &["index".into(), "eigenvalue".into()], rows)?;
    }
    Ok(0)
}

fn cmd_cluster(args: &ClusterArgs) -> CmdResult {
    if !(args.sigma > 0.0 && args.sigma.is_finite()) {
        return Err(Failure::Usage(format!("--sigma must be positive, got {}", args.sigma)));
    }
    let w = match (&args.points, &args.weights) {
        (Some(p), _) => spectral::gaussian_similarity(&io::read_points_csv(p)?, args.sigma)?,
        (None, Some(p)) => io::read_matrix(p)?,
        (None, None) => return Err(Failure::Usage("one of --points or --weights is required".into())),
    };
    let l = spectral::normalized_laplacian(&w).map_err(Failure::Data)?;
    let mut opts = args.solve.options(1);
    opts.record_history = args.history.is_some();
    let r: ClusterResult = spectral::fiedler_partition(&l, &opts)?;
    let gamma2 = spectral::fiedler_gap(&l, &args.solve.options(1))?;
    let ones = r.labels.iter().filter(|&&x| x == 1).count();
    println!("lambda_hat={}", r.lambda2);
    println!("status={}", r.solve_status);
    println!("sweeps={}", r.sweeps);
    println!("gamma_m={gamma2}");
    println!("cluster_0={}", r.labels.len() - ones);
    println!("cluster_1={ones}");
    if let Some(path) = &args.labels {
        let rows = r
            .labels
            .iter()
            .zip(&r.fiedler)
            .enumerate()
            .map(|(i, (lab, f))| vec![(i + 1).to_string(), lab.to_string(), f.to_string()]);
        write_rows(path, &["index".into(), "label".into(), "fiedler_entry".into()], rows)?;
    }
    if let Some(path) = &args.history {
        let rows: Vec<HistoryRow> = r.history.iter().map(|rec| HistoryRow::from_record(rec, None)).collect();
        io::write_history_csv(path, &rows)?;
    }
    Ok(status_code(r.solve_status))
}

fn cmd_track(args: &TrackArgs) -> CmdResult {
    if !(args.c > 0.0 && args.c.is_finite()) {
        return Err(Failure::Usage(format!("--c must be positive, got {}", args.c)));
    }
    let a = io::read_matrix(&args.input)?;
    let cfg = TrackerConfig {
        c: args.c,
        max_steps: args.max_steps,
        parallel: args.parallel,
        ..TrackerConfig::default()
    };
    let path = match homotopy::track(&a, &cfg) {
        Ok(p) => p,
        Err(e @ Error::TrackerStalled { .. }) => {
            eprintln!("error: {e}");
            return Ok(4);
        }
        Err(e @ Error::StepLimit(_)) => {
            eprintln!("error: {e}");
            return Ok(3);
        }
        Err(e) => return Err(e.into()),
    };
    println!("steps={}", path.total_steps);
    println!("avg_iters={}", path.avg_iters);
    println!("eigenvalues={}", join(path.eigenvalues()));
    if let Some(out) = &args.path {
        let mut header: Vec<String> = ["t", "s", "gamma_hat", "avg_iters"].map(String::from).to_vec();
        header.extend((1..=a.n()).map(|i| format!("sigma_{i}")));
        let rows = path.steps.iter().map(|st| {
            let mut r = vec![
                st.t.to_string(),
                st.s.to_string(),
                st.gamma_hat.to_string(),
                st.avg_iters().to_string(),
            ];
            r.extend(st.sigma.iter().map(f64::to_string));
            r
        });
        write_rows(out, &header, rows)?;
    }
    Ok(0)
}

fn cmd_gen(args: &GenArgs) -> CmdResult {
    let generated = match args.kind {
        Kind::Example1 => Ok(io::gen_example1()),
        Kind::Drk1 => io::gen_diag_rank1(args.n.unwrap_or(1023)),
        Kind::RandomDd => io::gen_random_dd(args.n.unwrap_or(8), args.alpha, args.seed),
    };
    let a: SymMatrix = generated.map_err(|e| Failure::Usage(e.to_string()))?;
    io::write_matrix_market(&args.out, &a)?;
    println!("n={}", a.n());
    Ok(0)
}

fn cmd_diagnose(args: &DiagnoseArgs) -> CmdResult {
    let a = io::read_matrix(&args.input)?;
    let m = target(args.m, a.n())?;
    let source = if args.exact {
        SpectrumSource::Exact
    } else {
        SpectrumSource::Estimated
    };
    let r = diagnostics::diagnose(&a, m, source)?;
    println!("alpha0={}", r.alpha0);
    println!("gamma_hat={}", r.gamma_hat);
    println!("foa_factor={}", opt(r.foa_factor));
    if args.exact {
        println!("gamma={}", opt(r.gamma));
        println!("gamma_m={}", opt(r.gamma_m));
        println!("rho={}", opt(r.rho));
        println!("thm2_applicable={}", r.thm2_applicable);
        println!("thm2_rate_bound={}", opt(r.thm2_rate_bound));
    }
    Ok(0)
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.cmd {
        Cmd::Eig(a) => cmd_eig(a),
        Cmd::Full(a) => cmd_full(a),
        Cmd::Cluster(a) => cmd_cluster(a),
        Cmd::Track(a) => cmd_track(a),
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Diagnose(a) => cmd_diagnose(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DATA)
        }
    }
}
