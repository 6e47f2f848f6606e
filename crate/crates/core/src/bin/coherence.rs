use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use coherence::channels::{build_dephasing_channel, build_preparation_channel, QuantumChannel};
use coherence::io::{self, StateInput};
use coherence::majorization::{aggregate_vector, convertible_pure_to_ensemble, CoherenceVector};
use coherence::measures::{MeasureKind, PureCoherenceFunctional};
use coherence::solver::{self, SolveOptions, SolveReport};
use coherence::suites::{run_suite, Suite, SuiteResult};
use coherence::{tol, Error};

const EXIT_INPUT: u8 = 2;
const EXIT_UNSUPPORTED: u8 = 3;
const EXIT_SUITE: u8 = 4;
const EXIT_CONSTRUCTION: u8 = 5;

#[derive(Parser)]
#[command(
    name = "coherence",
    version,
    about = "Coherence monotones from pure-state conversion",
    after_help = "Set COHERENCE_TOL to override the state and channel tolerances (default 1e-9 / 1e-8). Not recommended."
)]
struct Cli {
    /// Print a readable table instead of JSON.
    #[arg(long, global = true)]
    human: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Closed form: qubits, or the geometric measure at any dimension.
    Analytic,
    /// Search for the least coherent convertible pure state.
    Optimize,
    /// Convex roof.
    Roof,
}

#[derive(Clone, Copy, ValueEnum)]
enum Make {
    Prep,
    Dephase,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a coherence measure of the state in FILE.
    Compute {
        file: PathBuf,
        #[arg(long, default_value = "geometric")]
        measure: String,
        #[arg(long, value_enum, default_value = "optimize")]
        method: Method,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
    },
    /// Run a seeded verification suite.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build the preparation or dephasing channel for a state.
    Channel {
        #[arg(long, value_enum)]
        make: Make,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Whether a pure state converts to an ensemble under incoherent operations.
    ConvertCheck {
        #[arg(long)]
        pure: PathBuf,
        #[arg(long)]
        ensemble: PathBuf,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, e: impl std::fmt::Display) -> Self {
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(String, u8), Failure>;

fn input(e: Error) -> Failure {
    Failure::new(EXIT_INPUT, e)
}

fn solver_error(e: Error) -> Failure {
    match e {
        Error::DimensionTooLarge { .. } | Error::Unsupported(_) | Error::DimensionMismatch { .. } => {
            Failure::new(EXIT_UNSUPPORTED, e)
        }
        other => Failure::new(EXIT_INPUT, other),
    }
}

fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    io::to_json(value).map_err(input)
}

fn compute(file: &PathBuf, measure: &str, method: Method, seed: u64, restarts: usize, human: bool) -> Outcome {
    let f: PureCoherenceFunctional = measure.parse().map_err(input)?;
    let rho = io::parse_state(&io::read_file(file).map_err(input)?).map_err(input)?.density();
    let opts = SolveOptions {
        seed,
        restarts,
        ..SolveOptions::default()
    };
    let report = match method {
        Method::Analytic if rho.dim() == 2 => solver::qubit_report(&rho, &f),
        Method::Analytic if f.kind() == MeasureKind::Geometric => solver::cm_geometric(&rho, &opts),
        Method::Analytic => {
            return Err(Failure::new(
                EXIT_UNSUPPORTED,
                format!("no closed form for {} at dimension {}", f.name(), rho.dim()),
            ))
        }
        Method::Optimize => solver::cm_estimate(&rho, &f, &opts),
        Method::Roof => solver::cf_estimate(&rho, &f, &opts),
    }
    .map_err(solver_error)?;
    let text = if human { human_report(&report) } else { io::write_report(&report).map_err(input)? };
    Ok((text, 0))
}

fn human_report(r: &SolveReport) -> String {
    let mu: Vec<String> = r.best_mu.probs().iter().map(|p| format!("{p:.6}")).collect();
    format!(
        "measure        {}\nmethod         {}\nvalue          {:.12}\nupper bound    {}\nconverged      {}\nrestarts       {}\nensemble size  {}\nbest mu        [{}]",
        r.measure,
        r.method,
        r.value,
        r.upper_bound,
        r.converged,
        r.restarts_used,
        r.best_ensemble.len(),
        mu.join(", ")
    )
}

fn human_suite(r: &SuiteResult) -> String {
    format!(
        "suite      {}\nstatus     {}\ndim        {}\ntrials     {}\nfailures   {}\nworst      {:.3e} (slack {:.0e})\nseed       {}\nwall time  {:.3} s",
        r.suite,
        if r.passed() { "PASS" } else { "FAIL" },
        r.dim,
        r.trials,
        r.failures,
        r.worst_violation,
        r.slack,
        r.seed,
        r.wall_time
    )
}

fn verify(suite: &str, dim: usize, trials: usize, seed: u64, human: bool) -> Outcome {
    let suite: Suite = suite.parse().map_err(input)?;
    let r = run_suite(suite, dim, trials, seed).map_err(solver_error)?;
    let code = if r.passed() { 0 } else { EXIT_SUITE };
    let text = if human { human_suite(&r) } else { json(&r)? };
    Ok((text, code))
}

#[derive(Serialize)]
struct ChannelSummary<'a> {
    out: String,
    kraus: usize,
    dim_in: usize,
    dim_out: usize,
    classes: Vec<&'a str>,
}

fn channel(make: Make, state: &PathBuf, out: &PathBuf, human: bool) -> Outcome {
    let text = io::read_file(state).map_err(input)?;
    let ch: QuantumChannel = match make {
        Make::Prep => {
            let m = io::parse_unchecked_matrix(&text).map_err(input)?;
            let diag: Vec<f64> = m.diagonal().iter().map(|z| z.re).collect();
            build_preparation_channel(&diag)
        }
        Make::Dephase => {
            let rho = io::parse_state(&text).map_err(input)?.density();
            build_dephasing_channel(&rho)
        }
    }
    .map_err(|e| Failure::new(EXIT_CONSTRUCTION, e))?;
    let body = io::write_channel(&ch).map_err(input)?;
    fs::write(out, &body).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", out.display())))?;
    let summary = ChannelSummary {
        out: out.display().to_string(),
        kraus: ch.kraus().len(),
        dim_in: ch.dim_in(),
        dim_out: ch.dim_out(),
        classes: ch.tag_names(),
    };
    let text = if human {
        format!(
            "wrote {} ({} Kraus operators, {} -> {})\nclasses {}",
            summary.out,
            summary.kraus,
            summary.dim_in,
            summary.dim_out,
            summary.classes.join(" ")
        )
    } else {
        json(&summary)?
    };
    Ok((text, 0))
}

#[derive(Serialize)]
struct ConvertSummary<'a> {
    convertible: bool,
    pure_mu: &'a [f64],
    aggregate_mu: &'a [f64],
}

fn convert_check(pure: &PathBuf, ensemble: &PathBuf, human: bool) -> Outcome {
    let psi = match io::parse_state(&io::read_file(pure).map_err(input)?).map_err(input)? {
        StateInput::Pure(psi) => psi,
        StateInput::Mixed(_) => return Err(Failure::new(EXIT_INPUT, "--pure needs a \"vector\" state file")),
    };
    let e = io::parse_ensemble(&io::read_file(ensemble).map_err(input)?).map_err(input)?;
    let ok = convertible_pure_to_ensemble(&psi, &e).map_err(input)?;
    let mu = CoherenceVector::of(&psi).sort_desc();
    let agg = aggregate_vector(&e);
    let text = if human {
        format!(
            "convertible  {ok}\npure mu      {:?}\naggregate    {:?}",
            mu.probs(),
            agg.probs()
        )
    } else {
        json(&ConvertSummary {
            convertible: ok,
            pure_mu: mu.probs(),
            aggregate_mu: agg.probs(),
        })?
    };
    Ok((text, 0))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = tol::check_env() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_INPUT);
    }
    let result = match &cli.command {
        Command::Compute {
            file,
            measure,
            method,
            seed,
            restarts,
        } => compute(file, measure, *method, *seed, *restarts, cli.human),
        Command::Verify { suite, dim, trials, seed } => verify(suite, *dim, *trials, *seed, cli.human),
        Command::Channel { make, state, out } => channel(*make, state, out, cli.human),
        Command::ConvertCheck { pure, ensemble } => convert_check(pure, ensemble, cli.human),
    };
    match result {
        Ok((text, code)) => {
            println!("{text}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
