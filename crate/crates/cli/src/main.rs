use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use menger::MengerError;

mod commands;

#[derive(Debug, Parser)]
#[command(
    name = "menger",
    version,
    about = "Integral Menger curvature energies of closed curves"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads for the parallel kernels ("auto" or a count).
    #[arg(long, global = true, env = "MENGER_THREADS", default_value = "auto")]
    threads: String,

    /// Sum parallel partial results in a fixed order.
    #[arg(long, global = true)]
    deterministic: bool,
}

#[derive(Debug, Clone, Args)]
pub struct Exponents {
    #[arg(long, default_value_t = 2.5, allow_negative_numbers = true)]
    pub p: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    pub q: f64,
}

#[derive(Debug, Clone, Args)]
pub struct CurveSource {
    /// Curve file (.json, .csv or .txt).
    #[arg(long, conflicts_with = "preset")]
    pub input: Option<PathBuf>,
    /// Preset such as circle, ellipse:2, torus:2,3, trefoil, polygon:4, perturbed:0.05,7.
    #[arg(long)]
    pub preset: Option<String>,
    /// Vertex count for presets.
    #[arg(long = "N", default_value_t = 128)]
    pub n: usize,
    /// Ambient dimension for presets; torus knots default to 3, others to 2.
    #[arg(long)]
    pub dim: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Discrete energy of a curve.
    Energy {
        #[command(flatten)]
        exp: Exponents,
        #[command(flatten)]
        src: CurveSource,
    },
    /// Regime label of (p, q).
    Classify {
        #[command(flatten)]
        exp: Exponents,
    },
    /// Energy of a preset under refinement.
    Converge {
        #[command(flatten)]
        exp: Exponents,
        #[arg(long, default_value = "circle")]
        preset: String,
        #[arg(long)]
        dim: Option<usize>,
        /// Comma-separated vertex counts.
        #[arg(long, default_value = "64,128,256,512", value_delimiter = ',')]
        ns: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mixed-triple energy of two nearly touching straight strands.
    Strands {
        #[command(flatten)]
        exp: Exponents,
        #[arg(long, default_value = "0.1,0.03,0.01,0.003", value_delimiter = ',')]
        deltas: Vec<f64>,
        /// Nodes per strand.
        #[arg(long = "N", default_value_t = 300)]
        n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Length-constrained gradient at a curve.
    Grad {
        #[command(flatten)]
        exp: Exponents,
        #[command(flatten)]
        src: CurveSource,
        /// Also compare against central finite differences with this step.
        #[arg(long)]
        fd_step: Option<f64>,
        /// Directory for gradient.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gradient descent at fixed length.
    Flow {
        #[command(flatten)]
        exp: Exponents,
        #[command(flatten)]
        src: CurveSource,
        #[arg(long, default_value_t = 2000)]
        steps: usize,
        #[arg(long = "step-size", default_value_t = 1e-2)]
        step_size: f64,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 1e-4)]
        armijo_c: f64,
        #[arg(long, default_value_t = 0.5)]
        backtrack: f64,
        #[arg(long, default_value_t = 10)]
        resample_every: usize,
        #[arg(long, default_value_t = 0.25)]
        guard_factor: f64,
        #[arg(long, default_value_t = 50)]
        snapshot_every: usize,
        /// Directory for history.csv and snap_<k>.json.
        #[arg(long, default_value = "flow_out")]
        out: PathBuf,
    },
    /// Fractional Sobolev seminorms of the tangent.
    Seminorm {
        #[command(flatten)]
        src: CurveSource,
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, default_value_t = 2.0)]
        rho: f64,
        /// first, second, or both (with the equivalence check).
        #[arg(long, default_value = "both")]
        variant: String,
    },
    /// Fourier symbol of the leading bilinear form.
    Symbol {
        #[arg(long, default_value_t = 2.5)]
        p: f64,
        #[arg(long, default_value = "8,16,32,64", value_delimiter = ',')]
        ks: Vec<u32>,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        /// Directory for symbol.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in self-test battery.
    Check {
        /// Halve all problem sizes.
        #[arg(long)]
        fast: bool,
    },
}

fn configure_threads(spec: &str) -> anyhow::Result<()> {
    if spec == "auto" {
        return Ok(());
    }
    let n: usize = spec.parse().map_err(|_| {
        MengerError::BadParams(format!("threads must be 'auto' or a count, got {spec}"))
    })?;
    if n == 0 {
        return Err(MengerError::BadParams("threads must be positive".into()).into());
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    configure_threads(&cli.threads)?;
    let det = cli.deterministic;
    match cli.command {
        Command::Energy { exp, src } => commands::energy(&exp, &src, det),
        Command::Classify { exp } => commands::classify(&exp),
        Command::Converge {
            exp,
            preset,
            dim,
            ns,
            out,
        } => commands::converge(&exp, &preset, dim, &ns, out.as_deref()),
        Command::Strands {
            exp,
            deltas,
            n,
            out,
        } => commands::strands(&exp, &deltas, n, out.as_deref()),
        Command::Grad {
            exp,
            src,
            fd_step,
            out,
        } => commands::grad(&exp, &src, fd_step, out.as_deref()),
        Command::Flow {
            exp,
            src,
            steps,
            step_size,
            tol,
            armijo_c,
            backtrack,
            resample_every,
            guard_factor,
            snapshot_every,
            out,
        } => {
            let cfg = commands::FlowFlags {
                steps,
                step_size,
                tol,
                armijo_c,
                backtrack,
                resample_every,
                guard_factor,
                snapshot_every,
            };
            commands::flow(&exp, &src, &cfg, &out)
        }
        Command::Seminorm {
            src,
            s,
            rho,
            variant,
        } => commands::seminorm(&src, s, rho, &variant),
        Command::Symbol { p, ks, lambda, out } => commands::symbol(p, &ks, lambda, out.as_deref()),
        Command::Check { fast } => commands::check(fast),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let numeric = e
                .downcast_ref::<MengerError>()
                .is_some_and(MengerError::is_numeric_failure);
            ExitCode::from(if numeric { 2 } else { 1 })
        }
    }
}
