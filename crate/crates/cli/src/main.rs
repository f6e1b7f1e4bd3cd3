use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use maxeig::format::{self, Layout};
use maxeig::record::{trace_csv, InputRecord, Mode, RunRecord};
use maxeig::reproduce::{self, TableId};
use maxeig::solve::{self, sig6, CliError, Method, NormChoice, SolveOptions, V0Choice, Z0Choice};
use maxeig::wall_clock;
use maxeig_core::{Model, ModelName, ModelParams, ModelSpec, TriangularRule};

#[derive(Parser)]
#[command(name = "maxeig", version, about = "Maximal eigenpairs of matrices with nonnegative off-diagonals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the maximal eigenpair of a model or a matrix file.
    Solve(SolveArgs),
    /// Write a model matrix in a text format.
    Model(ModelArgs),
    /// Recompute the benchmark tables and diff them against reference values.
    Reproduce(ReproduceArgs),
}

fn parse_model_name(s: &str) -> Result<ModelName, String> {
    ModelName::parse(s).ok_or_else(|| {
        let names: Vec<&str> = ModelName::ALL.iter().map(|m| m.as_str()).collect();
        format!("unknown model `{s}`; expected one of {}", names.join(", "))
    })
}

fn parse_rule(s: &str) -> Result<TriangularRule, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown rule `{s}`; expected inv_kp1, one, k or k2"))
}

#[derive(Args)]
struct ModelSource {
    /// Named model family.
    #[arg(long, value_parser = parse_model_name, group = "source")]
    model: Option<ModelName>,
    /// Model spec as JSON, e.g. '{"name":"branching","size":100,"params":{"alpha":1.75}}'.
    #[arg(long, group = "source")]
    spec: Option<String>,
    /// Size parameter of the model family.
    #[arg(long, short = 'n')]
    n: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_parser = parse_rule)]
    rule: Option<TriangularRule>,
    #[arg(long)]
    block: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    diag: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    off: Option<f64>,
}

impl ModelSource {
    fn spec(&self) -> Result<Option<ModelSpec>, CliError> {
        let mut spec = match (&self.model, &self.spec) {
            (Some(name), _) => ModelSpec::new(*name, 0),
            (None, Some(json)) => serde_json::from_str(json)
                .map_err(|e| CliError::Parse(format!("--spec: {e}")))?,
            (None, None) => return Ok(None),
        };
        if let Some(n) = self.n {
            spec.size = n;
        }
        let p = &mut spec.params;
        let set = ModelParams {
            rule: self.rule.or(p.rule),
            alpha: self.alpha.or(p.alpha),
            block: self.block.or(p.block),
            diag: self.diag.or(p.diag),
            off: self.off.or(p.off),
        };
        *p = set;
        let fixed = matches!(spec.name, ModelName::Negative3 | ModelName::Complex3);
        if spec.size == 0 && !fixed {
            return Err(CliError::Usage(format!("model {} needs --n", spec.name)));
        }
        Ok(Some(spec))
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Matrix file in coordinate or TRIDIAG format.
    #[arg(long, group = "source")]
    input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "rqi-general")]
    method: Method,
    /// Tolerance on successive shifts, relative to max(1, |z|).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Tolerance on the scaled residual.
    #[arg(long, default_value_t = 1e-8)]
    residual_tol: f64,
    #[arg(long)]
    max_iter: Option<usize>,
    /// A number, or one of rayleigh, safe, max-ratio, combined, delta.
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<Z0Choice>,
    #[arg(long, value_enum)]
    v0: Option<V0Choice>,
    #[arg(long, value_enum)]
    norm: Option<NormChoice>,
    /// Treat the input as a Q-matrix and report lambda_min(-Q) = -rho(Q).
    /// On by default for bd_squares, triangular and branching.
    #[arg(long, conflicts_with = "no_negate")]
    negate: bool,
    /// Report rho(A) even for Q-matrix models.
    #[arg(long)]
    no_negate: bool,
    /// Number of power iteration steps.
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    /// Skip the cross-check against Algorithm 2.
    #[arg(long)]
    no_verify: bool,
    /// Write the shift sequence as CSV.
    #[arg(long)]
    trace_out: Option<PathBuf>,
    /// Print the run record as JSON instead of the text summary.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    Coordinate,
    Tridiagonal,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    source: ModelSource,
    /// Output path; standard output when absent.
    #[arg(long)]
    emit: Option<PathBuf>,
    /// Defaults to tridiagonal for bd_squares, coordinate otherwise.
    #[arg(long, value_enum)]
    layout: Option<LayoutArg>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(value_enum)]
    table: TableId,
    /// Rows whose matrix order exceeds this are skipped.
    #[arg(long, default_value_t = 1600)]
    max_size: usize,
}

fn io_err(path: &std::path::Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn load(args: &SolveArgs) -> Result<(Model, InputRecord, bool), CliError> {
    if let Some(path) = &args.input {
        let model = format::read_file(path).map_err(|e| match e {
            format::ReadError::Io(e) => io_err(path, e),
            format::ReadError::Parse(e) => CliError::Parse(format!("{}: {e}", path.display())),
        })?;
        return Ok((model, InputRecord::File { path: path.display().to_string() }, false));
    }
    match args.source.spec()? {
        Some(spec) => {
            let model = spec.build()?;
            Ok((model, InputRecord::Model { spec }, solve::is_q_model(spec.name)))
        }
        None => Err(CliError::Usage("one of --model, --spec or --input is required".into())),
    }
}

fn cmd_solve(args: SolveArgs) -> Result<(), CliError> {
    let start = wall_clock();
    let (model, input, q_model) = load(&args)?;
    let opts = SolveOptions {
        method: args.method,
        tol: args.tol,
        residual_tol: args.residual_tol,
        max_iter: args.max_iter,
        z0: args.z0.unwrap_or(Z0Choice::Default),
        v0: args.v0,
        norm: args.norm,
        negate: args.negate || (q_model && !args.no_negate),
        steps: args.steps,
        verify: !args.no_verify,
    };
    let solved = solve::solve(&model, &opts, Some(wall_clock))?;
    let record = RunRecord {
        version: env!("CARGO_PKG_VERSION").to_string(),
        input,
        options: opts,
        mode: solved.mode,
        trace: solved.trace,
        result: solved.result,
        capture: solved.capture,
        wall_seconds: wall_clock() - start,
    };
    if let Some(path) = &args.trace_out {
        std::fs::write(path, trace_csv(&record.trace)).map_err(|e| io_err(path, e))?;
    }
    if args.json {
        println!("{}", record.to_json());
    } else {
        print!("{}", summary(&record));
    }
    Ok(())
}

fn complex_text(re: f64, im: Option<f64>) -> String {
    match im {
        Some(im) => format!("{}{}{}i", sig6(re), if im < 0.0 { "-" } else { "+" }, sig6(im.abs())),
        None => sig6(re),
    }
}

fn summary(r: &RunRecord) -> String {
    let res = &r.result;
    let quantity = match r.mode {
        Mode::Maximal => "rho(A)",
        Mode::MinOfNegated => "lambda_min(-Q)",
    };
    let mut s = format!(
        "eigenvalue  {} ({quantity})\niterations  {} (six-digit value stable from step {})\nsteps       {}\nresidual    {:.2e}\n",
        complex_text(res.eigenvalue, res.eigenvalue_im),
        res.iterations,
        res.display_stable_at,
        res.steps,
        res.residual
    );
    const SHOWN: usize = 10;
    let entries: Vec<String> = (0..res.eigenvector.len().min(SHOWN))
        .map(|i| complex_text(res.eigenvector[i], res.eigenvector_im.as_ref().map(|v| v[i])))
        .collect();
    let more = if res.eigenvector.len() > SHOWN { " ..." } else { "" };
    s += &format!("eigenvector {}{more}\n", entries.join(" "));
    if let Some(c) = r.capture {
        let flip = |x: f64| if r.mode == Mode::MinOfNegated { -x } else { x };
        if !c.is_maximal {
            s += &format!(
                "warning: pitfall, converged to {} but the maximal eigenpair has {}\n",
                sig6(flip(c.claimed)),
                sig6(flip(c.reference))
            );
        }
    }
    s
}

fn cmd_model(args: ModelArgs) -> Result<(), CliError> {
    let spec = args.source.spec()?.ok_or_else(|| CliError::Usage("--model or --spec is required".into()))?;
    let model = spec.build()?;
    let layout = match args.layout {
        Some(LayoutArg::Coordinate) => Layout::Coordinate,
        Some(LayoutArg::Tridiagonal) => Layout::Tridiagonal,
        None => format::default_layout(&model),
    };
    let text = format::write_model(&model, layout).map_err(|e| CliError::Usage(e.to_string()))?;
    match &args.emit {
        Some(path) => std::fs::write(path, text).map_err(|e| io_err(path, e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<bool, CliError> {
    let (report, tally) = reproduce::reproduce(args.table, args.max_size)?;
    print!("{report}");
    Ok(tally.failed == 0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a).map(|_| true),
        Command::Model(a) => cmd_model(a).map(|_| true),
        Command::Reproduce(a) => cmd_reproduce(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
