use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use logds::bench::{run_study, tau_label, StudyOutput};
use logds::problem_file;
use logds::registry::{self, ProblemRegistry};
use logds::solver::{solve, LinearMode, SolverConfig};
use logds::strategy::SolverRegistry;
use logds::{Error, Problem};

#[derive(Parser)]
#[command(name = "logds", version, about = "Derivative-free direct search with a log-barrier / exterior-penalty merit function")]
struct Cli {
    /// Reserved; the solver uses no randomness, so this flag is rejected.
    #[arg(long, global = true)]
    seedless: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and print the JSON report.
    Solve {
        /// Built-in problem name.
        #[arg(long, conflicts_with = "problem_file", required_unless_present = "problem_file")]
        problem: Option<String>,
        /// Problem definition file.
        #[arg(long)]
        problem_file: Option<PathBuf>,
        /// Solver label; when given, its modes override --linear-mode.
        #[arg(long)]
        solver: Option<String>,
        /// Also write the report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Run solver arms over a suite and write profiles.
    Bench {
        #[arg(long)]
        suite: String,
        /// Comma-separated solver labels.
        #[arg(long, default_value = "logds-penalty")]
        solvers: String,
        #[arg(long, default_value = "bench-out")]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// Preset two-arm studies.
    Compare {
        #[arg(long, value_enum)]
        study: Study,
        #[arg(long, default_value = "hs2d")]
        suite: String,
        #[arg(long, default_value = "compare-out")]
        out: PathBuf,
        #[command(flatten)]
        config: ConfigArgs,
    },
    /// List built-in problems.
    ListProblems {
        #[arg(long)]
        suite: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    /// Linear rows in the penalty vs. conforming directions.
    Linear,
    /// Merit function vs. extreme barrier.
    Barrier,
}

impl Study {
    fn solvers(&self) -> &'static str {
        match self {
            Study::Linear => "logds-penalty,logds-conforming",
            Study::Barrier => "logds-penalty,extreme-barrier",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LinearModeArg {
    Penalty,
    Conforming,
}

#[derive(Args)]
struct ConfigArgs {
    /// File of `key=value` lines applied before the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    max_evals: Option<usize>,
    #[arg(long)]
    alpha_min: Option<f64>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    theta_alpha: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    zeta: Option<f64>,
    #[arg(long)]
    rho0_log: Option<f64>,
    #[arg(long)]
    eps_active: Option<f64>,
    #[arg(long, value_enum)]
    linear_mode: Option<LinearModeArg>,
    /// Skip the model-based search step.
    #[arg(long)]
    no_search: bool,
}

impl ConfigArgs {
    fn build(&self) -> logds::Result<SolverConfig> {
        let mut c = SolverConfig::default();
        if let Some(path) = &self.config {
            c.apply_kv(&std::fs::read_to_string(path)?)?;
        }
        macro_rules! take {
            ($($field:ident),*) => {
                $(if let Some(v) = self.$field { c.$field = v; })*
            };
        }
        take!(max_evals, alpha_min, alpha0, theta_alpha, phi, gamma, nu, beta, zeta, rho0_log, eps_active);
        if let Some(m) = self.linear_mode {
            c.linear_mode = match m {
                LinearModeArg::Penalty => LinearMode::Penalty,
                LinearModeArg::Conforming => LinearMode::Conforming,
            };
        }
        if self.no_search {
            c.search_enabled = false;
        }
        c.validate()?;
        Ok(c)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if cli.seedless {
        eprintln!("error: --seedless is reserved; the solver has no randomness to seed");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 2 } else { 3 })
        }
    }
}

fn run(command: Command) -> logds::Result<()> {
    match command {
        Command::Solve {
            problem,
            problem_file,
            solver,
            out,
            config,
        } => {
            let config = config.build()?;
            let problem = match (problem, problem_file) {
                (Some(name), _) => registry::lookup(&name)?,
                (None, Some(path)) => problem_file::load(&path)?,
                (None, None) => unreachable!("clap requires one of them"),
            };
            let result = match solver {
                Some(label) => SolverRegistry::builtin().get(&label)?.solve(&problem, &config)?,
                None => solve(&problem, &config)?,
            };
            let text = serde_json::to_string_pretty(&result)?;
            if let Some(path) = out {
                std::fs::write(path, format!("{text}\n"))?;
            }
            print_stdout(&text)?;
        }
        Command::Bench {
            suite,
            solvers,
            out,
            config,
        } => bench(&suite, &solvers, &out, &config.build()?)?,
        Command::Compare {
            study,
            suite,
            out,
            config,
        } => bench(&suite, study.solvers(), &out, &config.build()?)?,
        Command::ListProblems { suite } => {
            let reg = ProblemRegistry::builtin();
            let names: Vec<String> = match suite {
                Some(s) => registry::suite(&s)?,
                None => reg.names().map(String::from).collect(),
            };
            for name in names {
                let entry = reg.entry(&name)?;
                let p = entry.build()?;
                let opt = entry
                    .known_optimum
                    .map_or_else(|| "-".to_string(), |v| v.to_string());
                print_stdout(&format!(
                    "{:<12} n={} m={} p={} linear={} f*={}",
                    p.name(),
                    p.n(),
                    p.m(),
                    p.p(),
                    p.q(),
                    opt
                ))?;
            }
        }
    }
    Ok(())
}

fn bench(suite: &str, solvers: &str, out: &Path, config: &SolverConfig) -> logds::Result<()> {
    let arms_reg = SolverRegistry::builtin();
    let arms = arms_reg.parse_list(solvers)?;
    let problems = registry::suite(suite)?
        .iter()
        .map(|n| registry::lookup(n))
        .collect::<logds::Result<Vec<Problem>>>()?;
    let StudyOutput { tables, files, .. } = run_study(&problems, &arms, config, Some(out))?;
    let summary = json!({
        "suite": suite,
        "solvers": arms.iter().map(|a| a.label()).collect::<Vec<_>>(),
        "out": out.display().to_string(),
        "tables": tables.iter().map(|t| json!({
            "tau": tau_label(t.tau),
            "problems": t.problems,
            "solvers": t.solvers,
            "t": t.t,
        })).collect::<Vec<_>>(),
        "files": files.len(),
    });
    print_stdout(&serde_json::to_string_pretty(&summary).map_err(Error::from)?)
}

/// Writes one line to stdout; a closed pipe (`| head`) is not an error.
fn print_stdout(text: &str) -> logds::Result<()> {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    match writeln!(out, "{text}").and_then(|_| out.flush()) {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}
