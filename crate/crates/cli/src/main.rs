//! `canard-lab`: simulations, invariant checks, Melnikov sums and figure data
//! for the Euler and Kahan discretizations of the planar fold/canard model.

mod commands;
mod config;
mod error;
mod figures;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::MelnikovOptions;
use config::{resolve, Defaults, MapId, ParamArgs, RunConfig};
use error::{CliResult, EXIT_OK};
use figures::FigureId;

#[derive(Debug, Parser)]
#[command(name = "canard-lab", version, about = "Euler and Kahan discretizations of the planar fold/canard model")]
#[command(after_help = "Parameters are resolved as flags, then --config file entries, then defaults.\n\
Exit status: 0 success, 1 i/o failure, 2 invalid input, 3 singular step or other early termination.")]
struct Cli {
    #[command(flatten)]
    params: ParamArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Iterate a map from (x0, y0).
    #[command(long_about = "Iterate --map for --steps steps from (x0, y0).\n\n\
CSV columns: n,x,y (symplectic-euler: n,v,w,Hhat with (x0, y0) read as (v0, w0)).\n\
An orbit ending at a pole or overflow gets a trailing `# singular at n=<N>` or\n\
`# non-finite after n=<N>` line and the exit status is 3.")]
    Simulate,
    /// Iterate the unperturbed Kahan map along its invariant curve.
    #[command(long_about = "Start on the invariant curve of the unperturbed Kahan map at x = x0 and iterate.\n\
k2-kahan: the curve S_h = {y = x^2 - 1/2 - h^2/8}, x advances by h/2.\n\
kahan: the curve {y = x^2 - eps/2 - eps^2 h^2/8}, x advances by h eps/2.\n\n\
CSV columns: n,x,y,phi,advance_residual. A summary goes to standard error.")]
    InvariantCheck,
    /// Discrete Melnikov sums along the special solution.
    #[command(long_about = "Discrete Melnikov sums d_lambda and d_r over n = -N..N-1 for step --h and\n\
coefficients --a1..--a5. Errors are taken against -sqrt(2 pi) and -C sqrt(2 pi).\n\n\
CSV columns: h,N,d_lambda,d_r,err_lambda,err_r. JSON adds d_lambda_over_h,\n\
d_r_over_h and telescope_residual. Sweeps run in parallel; CANARD_LAB_THREADS\n\
caps the number of worker threads.")]
    Melnikov {
        /// Compute the sums through the forward/backward variational recursions.
        #[arg(long)]
        boundary_corrected: bool,
        /// Emit rows for N = stride, 2 stride, ..., N for every step size.
        #[arg(long)]
        sweep: bool,
        /// Comma-separated step sizes (default: --h).
        #[arg(long, value_delimiter = ',')]
        hs: Option<Vec<f64>>,
        /// N increment of a sweep (default: N/20).
        #[arg(long)]
        stride: Option<i64>,
    },
    /// Formal conserved quantity of the rescaled Kahan map.
    Conserved {
        #[command(subcommand)]
        action: ConservedAction,
    },
    /// Fixed points and Jacobian eigen-action of the chart K1 map.
    #[command(long_about = "Plain-text report of the fixed points p_a, p_r on {r1 = eps1 = lambda1 = 0},\n\
their x1-derivatives and the eigen-action deviations of the Jacobian.\n\n\
With --format csv: columns h1,alpha,dev_a,dev_r. JSON adds dev_r_from_jacobian.")]
    Blowup {
        /// Comma-separated h1 values in (0, 1).
        #[arg(long, value_delimiter = ',', default_value = "0.1")]
        h1: Vec<f64>,
    },
    /// Canonical (v, w) coordinates and the symplectic Euler scheme.
    Hamiltonian {
        #[command(subcommand)]
        action: HamiltonianAction,
    },
    /// Write figure data and a claim sidecar for one recipe or all of them.
    #[command(long_about = "Write <figure>.csv (or .json) and <figure>.claim.txt into --out-dir.\n\
The sidecar states the qualitative claim checked, the measured values and\n\
whether the claim held. Multi-orbit CSVs use columns series,n,x,y,H,Hbar.\n\
Singular events inside a recipe are recorded, not fatal.")]
    Reproduce {
        /// Figure id, or `all`.
        #[arg(value_parser = parse_figure)]
        figure: FigureSelection,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum ConservedAction {
    /// Print the polynomial p with Hbar_order = p(x, y) e^{-2y}.
    Derive {
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
    /// CSV n,H,Hbar along an orbit of --map.
    Monitor {
        #[arg(long, default_value_t = 2)]
        order: usize,
    },
}

#[derive(Debug, Subcommand)]
enum HamiltonianAction {
    /// Identity, area and energy-drift report.
    Check {
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        v0: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        w0: f64,
    },
    /// CSV n,v,w,Hhat of the symplectic Euler scheme.
    Simulate {
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        v0: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        w0: f64,
    },
}

#[derive(Debug, Clone, Copy)]
enum FigureSelection {
    All,
    One(FigureId),
}

fn parse_figure(s: &str) -> Result<FigureSelection, String> {
    if s == "all" {
        return Ok(FigureSelection::All);
    }
    FigureId::from_str(s, false).map(FigureSelection::One).map_err(|_| {
        let names: Vec<&str> = FigureId::ALL.iter().map(|f| f.name()).collect();
        format!("unknown figure {s:?}; expected all or one of {}", names.join(", "))
    })
}

fn cfg(name: &str, params: &ParamArgs, defaults: Defaults) -> CliResult<RunConfig> {
    resolve(name, params, defaults)
}

fn run(cli: Cli) -> CliResult<()> {
    let p = &cli.params;
    let d = Defaults::default();
    match cli.command {
        Command::Simulate => commands::simulate(&cfg("simulate", p, d)?),
        Command::InvariantCheck => commands::invariant_check(&cfg("invariant-check", p, d)?),
        Command::Melnikov { boundary_corrected, sweep, hs, stride } => {
            let opts = MelnikovOptions { boundary_corrected, sweep, hs, stride };
            commands::melnikov(&cfg("melnikov", p, d)?, &opts)
        }
        Command::Conserved { action } => {
            let c = cfg("conserved", p, d)?;
            match action {
                ConservedAction::Derive { order } => commands::conserved_derive(&c, order),
                ConservedAction::Monitor { order } => commands::conserved_monitor(&c, order),
            }
        }
        Command::Blowup { h1 } => commands::blowup(&cfg("blowup", p, d)?, &h1),
        Command::Hamiltonian { action } => {
            let defaults = Defaults { map: MapId::SymplecticEuler, steps: 10_000, ..d };
            let c = cfg("hamiltonian", p, defaults)?;
            match action {
                HamiltonianAction::Check { v0, w0 } => commands::hamiltonian_check(&c, v0, w0),
                HamiltonianAction::Simulate { v0, w0 } => commands::hamiltonian_simulate(&c, v0, w0),
            }
        }
        Command::Reproduce { figure, out_dir } => {
            let c = cfg("reproduce", p, d)?;
            std::fs::create_dir_all(&out_dir)?;
            let ids: Vec<FigureId> = match figure {
                FigureSelection::All => FigureId::ALL.to_vec(),
                FigureSelection::One(id) => vec![id],
            };
            let figures = commands::thread_pool()?.install(|| figures::reproduce_many(&ids))?;
            for f in &figures {
                f.write(&out_dir, c.format)?;
                eprintln!("{}: {}", f.id.name(), if f.holds { "claim holds" } else { "claim does not hold" });
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("canard-lab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
