//! `bfssd`: run benchmark experiments from TOML configs.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bfssd::bench::{run_experiment, write_experiment, PlotOptions};
use bfssd::config::ExperimentConfig;
use bfssd::linesearch::{surrogate_profile, write_profile_csv};
use bfssd::optimizers::first_surrogate;
use bfssd::problems::PROBLEM_KINDS;
use bfssd::{Error, Method, Vector};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bfssd", version, about = "Bi-fidelity stochastic subspace descent benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config (TOML).
    #[arg(long, short)]
    config: PathBuf,
    /// Override a config key, e.g. `--set trials=1` or
    /// `--set method.BF-SSD.linesearch.shrink=0.99`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Base seed; same as `--set seed=N`.
    #[arg(long)]
    seed: Option<u64>,
}

impl ConfigArgs {
    fn load(&self, extra: &[String]) -> Result<ExperimentConfig, Failure> {
        let mut o = self.overrides.clone();
        if let Some(s) = self.seed {
            o.push(format!("seed={s}"));
        }
        o.extend_from_slice(extra);
        ExperimentConfig::load(&self.config, &o).map_err(Failure::Config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every method of an experiment and write CSVs and a plot.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        /// Output root; the experiment goes to `<out>/<name>/`.
        #[arg(long, env = "BFSSD_OUT_DIR", default_value = "results")]
        out: PathBuf,
        /// Worker threads for trials; same as `--set workers=N`.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// List the problem kinds accepted in `[problem]`.
    ListProblems,
    /// List the optimizer names accepted in `methods`.
    ListMethods,
    /// Build the surrogate of one BF-SSD iteration and tabulate it against
    /// HF and LF along the search ray.
    InspectSurrogate {
        #[command(flatten)]
        config: ConfigArgs,
        /// Comma-separated point, or `@file` with whitespace or comma separated
        /// values. Defaults to the problem's initial point.
        #[arg(long)]
        point: Option<String>,
        /// Number of equispaced steps on `[0, alpha_max]`.
        #[arg(long, default_value_t = 101)]
        samples: usize,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Error with its exit code: configuration problems exit 1, failures while
/// running exit 2.
enum Failure {
    Config(Error),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Data { .. } => Failure::Config(e),
            e => Failure::Runtime(e),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, out, workers } => {
            let extra: Vec<String> = workers.map(|w| format!("workers={w}")).into_iter().collect();
            run(config.load(&extra)?, &out)
        }
        Command::ListProblems => {
            for (kind, about) in PROBLEM_KINDS {
                println!("{kind:<26}{about}");
            }
            Ok(())
        }
        Command::ListMethods => {
            for m in Method::ALL {
                println!("{:<8}{}", m.name(), m.description());
            }
            Ok(())
        }
        Command::InspectSurrogate {
            config,
            point,
            samples,
            out,
        } => inspect(config.load(&[])?, point.as_deref(), samples, out.as_deref()),
    }
}

fn run(cfg: ExperimentConfig, out: &Path) -> Result<(), Failure> {
    let spec = cfg.experiment()?;
    eprintln!(
        "{}: {} method(s) x {} trial(s), budget {}",
        spec.name,
        spec.runs.len(),
        spec.trials,
        spec.budget
    );
    let result = run_experiment(&spec)?;
    let plot = PlotOptions {
        log_y: cfg.log_y,
        ..PlotOptions::default()
    };
    let dir = write_experiment(&result, out, &plot)?;
    fs::write(dir.join("config.toml"), cfg.to_toml()?).map_err(Error::from)?;
    print!(
        "{}",
        bfssd::bench::emit_table(&result.summaries(), &result.grid)?
    );
    eprintln!("wrote {}", dir.display());
    Ok(())
}

fn parse_point(arg: &str) -> Result<Vector, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => fs::read_to_string(path).map_err(Error::from)?,
        None => arg.to_string(),
    };
    let values = text
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Failure::Config(Error::Config(format!("point entry `{s}` is not a number"))))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Vector::from_vec(values))
}

fn inspect(cfg: ExperimentConfig, point: Option<&str>, samples: usize, out: Option<&Path>) -> Result<(), Failure> {
    let spec = cfg.experiment()?;
    let problem = spec.build_problem()?;
    let opt = cfg.optimizer_config(Method::BfSsd, spec.budget)?;
    let x = match point {
        Some(p) => parse_point(p)?,
        None => problem.initial_point().clone(),
    };
    let s = first_surrogate(&problem, &opt, &x, spec.trial_seed(0))?;
    let profile = surrogate_profile(&s, &problem, samples)?;
    match out {
        Some(path) => write_profile_csv(&s, &profile, fs::File::create(path).map_err(Error::from)?)?,
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            write_profile_csv(&s, &profile, &mut lock)?;
            lock.flush().map_err(Error::from)?;
        }
    }
    eprintln!("rho = {}, knots = {}", s.rho(), s.knots().len() - 1);
    Ok(())
}
