use clap::{Args, Parser, Subcommand};
use octafield::cli::{
    self, load_constraints, load_mesh, parse_canonical, run_bench, run_solve, run_verify,
    CliError, MeshSource, RunManifest,
};
use octafield::energy::PNorm;
use octafield::solver::SolveConfig;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "octafield", version, about = "Feature-aligned cross fields from octahedral frames")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct MeshArgs {
    /// OBJ mesh to load
    #[arg(long, conflicts_with = "canonical")]
    mesh: Option<PathBuf>,
    /// Canonical mesh spec, e.g. cube:8, wedge:2.356, noisy_cube:0.08,42,6
    #[arg(long)]
    canonical: Option<String>,
}

impl MeshArgs {
    fn source(&self) -> Result<MeshSource, CliError> {
        match (&self.mesh, &self.canonical) {
            (Some(p), None) => Ok(MeshSource::Path(p.clone())),
            (None, Some(s)) => {
                parse_canonical(s)?; // validate early
                Ok(MeshSource::Canonical(s.clone()))
            }
            _ => Err(CliError::Usage(
                "exactly one of --mesh or --canonical is required".into(),
            )),
        }
    }
}

#[derive(Args, Clone)]
struct SolveOpts {
    /// Energy exponent: a float >= 1 or `inf`
    #[arg(long, default_value = "2")]
    p: String,
    /// Soft normal-alignment radius in [0, sqrt(7/12))
    #[arg(long, default_value_t = 0.0)]
    eps: f64,
    /// Relative primal residual tolerance (conic path)
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Iteration cap for the conic path
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
    /// Seed for randomized starts
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON constraints file: [{"face": i, "frame": [9 floats]} | {"face": i, "direction": [3 floats]}]
    #[arg(long)]
    constraints: Option<PathBuf>,
}

impl SolveOpts {
    fn config(&self) -> Result<SolveConfig, CliError> {
        let p = PNorm::parse(&self.p).map_err(CliError::Usage)?;
        Ok(SolveConfig {
            p,
            epsilon: self.eps,
            tol_primal: self.tol,
            tol_dual: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            ..SolveConfig::default()
        })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a cross field and write field/report/singularity artifacts
    Solve {
        #[command(flatten)]
        mesh: MeshArgs,
        #[command(flatten)]
        opts: SolveOpts,
        /// Output directory
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write a per-iteration convergence trace CSV
        #[arg(long)]
        trace: bool,
    },
    /// Run the closed-form identity suite and report residuals
    Verify {
        /// Grid density per axis
        #[arg(long, default_value_t = 50)]
        grid: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Time assemble/solve over a set of meshes and emit CSV
    Bench {
        /// Canonical mesh specs (repeatable)
        #[arg(long = "canonical", num_args = 1..)]
        canonical: Vec<String>,
        /// OBJ files (repeatable)
        #[arg(long = "mesh", num_args = 0..)]
        mesh: Vec<PathBuf>,
        #[command(flatten)]
        opts: SolveOpts,
        /// Output CSV path (stdout if omitted)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print mesh statistics as JSON
    Stats {
        #[command(flatten)]
        mesh: MeshArgs,
    },
    /// Sample the soft-alignment deviation curve
    Deviation {
        /// Epsilon grid step
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        /// Largest epsilon
        #[arg(long, default_value_t = 0.7)]
        max_eps: f64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output JSON path
        #[arg(long, default_value = "deviation.json")]
        out: PathBuf,
    },
}

fn run(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Solve {
            mesh,
            opts,
            out,
            trace,
        } => {
            let source = mesh.source()?;
            let mut config = opts.config()?;
            config.collect_trace = trace;
            if let Some(path) = &opts.constraints {
                let m = load_mesh(&source)?;
                config.prescribed = load_constraints(path, &m)?;
            }
            let manifest = RunManifest {
                input: source,
                config,
                out_dir: out,
                field_schema_version: cli::FIELD_SCHEMA_VERSION.to_string(),
                wall_time_budget_s: None,
            };
            let artifacts = run_solve(&manifest)?;
            eprintln!(
                "objective {:.6e}, artifacts in {}",
                artifacts.objective,
                artifacts.out_dir.display()
            );
            Ok(if artifacts.converged {
                cli::EXIT_OK
            } else {
                cli::EXIT_NON_CONVERGED
            })
        }
        Command::Verify { grid, seed } => {
            let (all_pass, _) = run_verify(grid, seed);
            Ok(if all_pass { cli::EXIT_OK } else { 1 })
        }
        Command::Bench {
            canonical,
            mesh,
            opts,
            out,
        } => {
            let mut sources: Vec<MeshSource> = Vec::new();
            for spec in &canonical {
                parse_canonical(spec)?;
                sources.push(MeshSource::Canonical(spec.clone()));
            }
            sources.extend(mesh.into_iter().map(MeshSource::Path));
            let config = opts.config()?;
            let (csv, _) = run_bench(&sources, &config)?;
            match out {
                Some(path) => std::fs::write(path, csv).map_err(CliError::Io)?,
                None => print!("{csv}"),
            }
            Ok(cli::EXIT_OK)
        }
        Command::Stats { mesh } => {
            let m = load_mesh(&mesh.source()?)?;
            println!("{}", cli::to_json_string(&m.stats()));
            Ok(cli::EXIT_OK)
        }
        Command::Deviation {
            step,
            max_eps,
            samples,
            seed,
            out,
        } => {
            if step <= 0.0 || max_eps < 0.0 {
                return Err(CliError::Usage("step must be > 0 and max-eps >= 0".into()));
            }
            let mut grid = Vec::new();
            let mut e = 0.0;
            while e <= max_eps + 1e-12 {
                grid.push(e);
                e += step;
            }
            cli::run_deviation(&grid, samples, seed, &out)?;
            Ok(cli::EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
