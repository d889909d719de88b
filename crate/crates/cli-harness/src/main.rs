use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use cli_harness::experiment::{build_quadrature, certificate, run_experiment};
use cli_harness::expr::Expr;
use cli_harness::output::{report, write_artifacts};
use cli_harness::{parse_config, ExperimentConfig, HarnessError, OUTPUT_ENV, PRESETS};
use milne_layer::{solve_milne, MilneProblem};

#[derive(Parser)]
#[command(name = "slab-lab", version, about = "Diffusive-limit sweeps for slab transport")]
struct Cli {
    /// Output directory (overrides the config file and the environment).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for the ε sweep.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Reject unknown configuration keys.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep and write CSV, summary and plot script.
    Run { config: PathBuf },
    /// Parse and certify a configuration without solving.
    Validate { config: PathBuf },
    /// Preset catalog.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
    /// Standalone half-space solve for an incoming datum `rho(mu)`.
    Milne {
        /// Expression in `mu`.
        #[arg(long)]
        data: String,
        /// Angular nodes of the Gauss-Legendre rule.
        #[arg(long, default_value_t = 16)]
        nodes: usize,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    List,
}

const EXIT_FAIL: u8 = 1;
const EXIT_ERROR: u8 = 2;

fn load(path: &Path, cli: &Cli) -> Result<ExperimentConfig, HarnessError> {
    let parsed = parse_config(path, cli.strict)?;
    for k in &parsed.ignored_keys {
        eprintln!("warning: ignoring unknown key `{k}`");
    }
    let mut cfg = parsed.config;
    if let Some(j) = cli.jobs {
        cfg.jobs = j;
        let errors = cfg.validate();
        if !errors.is_empty() {
            return Err(HarnessError::Config(errors));
        }
    }
    Ok(cfg)
}

fn output_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output.clone())
        .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("slab-lab-out"))
}

fn execute(cli: &Cli) -> Result<u8, HarnessError> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = load(config, cli)?;
            let result = run_experiment(&cfg)?;
            let dir = output_dir(cli, &cfg);
            let files = write_artifacts(&result, &dir)?;
            print!("{}", report(&result));
            for f in files {
                println!("wrote {}", f.display());
            }
            Ok(if result.passed() { 0 } else { EXIT_FAIL })
        }
        Command::Validate { config } => {
            let cfg = load(config, cli)?;
            let (data, rep) = certificate(&cfg)?;
            println!("configuration valid: data `{}`, {} values of epsilon", data.label, cfg.epsilons.len());
            for c in &rep.checks {
                println!("  {} ({} wall): violation {:.3e}", c.name, c.side.name(), c.violation);
            }
            rep.into_result()?;
            println!("compatibility certificate: ok");
            Ok(0)
        }
        Command::Presets { action: PresetAction::List } => {
            for p in PRESETS {
                let checks: Vec<&str> = p.default_checks.iter().map(|c| c.as_str()).collect();
                println!("{:<16} {:<9} {}  [checks: {}]", p.name, p.kind.name(), p.summary, checks.join(", "));
            }
            Ok(0)
        }
        Command::Milne { data, nodes } => {
            let e = Expr::parse(data)?;
            let mut cfg = ExperimentConfig::for_preset("constant", vec![0.1, 0.05, 0.025]);
            cfg.quadrature.rule = cli_harness::config::QuadratureRule::GaussLegendre;
            cfg.quadrature.nodes = *nodes;
            let q: Arc<_> = build_quadrature(&cfg)?;
            let sol = solve_milne(&MilneProblem::from_fn(q, |mu| e.eval(0.0, 0.0, mu, -1.0)))?;
            println!("phi_inf = {:e}", sol.phi_inf);
            println!("residual = {:e}", sol.residual);
            match sol.decay_rate {
                Some(b) => println!("decay_rate = {b:e}"),
                None => println!("decay_rate = none (flat profile)"),
            }
            if let Some(d) = sol.truncation_sensitivity {
                println!("truncation_sensitivity = {d:e}");
            }
            for w in &sol.warnings {
                eprintln!("warning: {w}");
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
