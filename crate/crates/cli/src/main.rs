use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use dsp_core::assembly::export_system;
use dsp_core::harness::{
    build_system, describe_failure, exit, parse_h, reproduce, run_experiment, Analysis, ExperimentConfig, Overrides,
    RunOutcome, TableId,
};

#[derive(Parser, Debug)]
#[command(name = "dsp", version, about = "Assemble, precondition, solve and analyze double saddle-point Biot systems")]
struct Cli {
    /// Experiment configuration (`key = value` lines). Defaults apply without one.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Root of the output tree.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed of the manufactured right-hand side.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Largest system handed to the dense eigensolvers.
    #[arg(long, global = true)]
    max_dense_n: Option<usize>,
    /// Extra `key=value` settings applied after the config file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Assemble the system and record its block sizes.
    Assemble,
    /// Solve with the configured Krylov methods.
    Solve,
    /// Indicators, bounds, spectra and containment checks.
    Analyze {
        /// Depth of the analysis when the config does not set one.
        #[arg(long, default_value = "verify")]
        level: String,
    },
    /// Rerun the presets behind a table: sizes, iterations, eigen-bounds or scalability.
    Reproduce {
        table: TableId,
        /// Comma-separated mesh sizes, e.g. `1/10,1/20`.
        #[arg(long)]
        h: Option<String>,
    },
    /// Write A, B, C, D, E and the right-hand side as Matrix Market files.
    ExportMm {
        /// Target directory; defaults to `<out>/<name>/mm`.
        #[arg(long)]
        dir: Option<PathBuf>,
    },
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, String> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p).map_err(|e| format!("error: {}: {e}", p.display()))?,
        None => ExperimentConfig::default(),
    };
    for kv in &cli.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("error: --set expects KEY=VALUE, got `{kv}`"))?;
        cfg.set(k.trim(), v.trim()).map_err(|e| format!("error: {e}"))?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.max_dense_n {
        cfg.max_dense_n = n;
    }
    cfg.validate().map_err(|e| format!("error: {e}"))?;
    Ok(cfg)
}

fn report(out: &RunOutcome) -> i32 {
    println!("{}", out.dir.display());
    let s = &out.sizes;
    println!("{} 1/h={} n={} m={} p={} N={} nnz={}", s.problem, s.cells, s.n, s.m, s.p, s.n + s.m + s.p, s.nnz);
    for st in &out.stats {
        println!(
            "{} {}: {} iterations, converged {}, rel. error {:.3e}, {:.3}s",
            st.method, st.recipe_id, st.iterations, st.converged, st.rel_err, st.wall_time
        );
    }
    if let Some(r) = &out.report {
        print!("{}", r.to_text());
    }
    for v in &out.verdicts {
        print!("{}", v.to_text());
    }
    if out.verify_failed() {
        exit::VERIFY_FAILED
    } else {
        exit::SUCCESS
    }
}

fn run(cli: &Cli) -> i32 {
    let cfg = match load_config(cli) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return exit::ERROR;
        }
    };
    let outcome = match &cli.cmd {
        Command::Assemble => {
            let cfg = ExperimentConfig { solvers: vec![], analysis: Analysis::None, ..cfg };
            run_experiment(&cfg, &cli.out).map(|o| report(&o)).map_err(|e| (e, cfg))
        }
        Command::Solve => {
            let cfg = ExperimentConfig { analysis: Analysis::None, ..cfg };
            run_experiment(&cfg, &cli.out).map(|o| report(&o)).map_err(|e| (e, cfg))
        }
        Command::Analyze { level } => {
            let mut cfg = ExperimentConfig { solvers: vec![], ..cfg };
            if cfg.analysis == Analysis::None {
                if let Err(msg) = cfg.set("analysis", level) {
                    eprintln!("error: {msg}");
                    return exit::ERROR;
                }
            }
            run_experiment(&cfg, &cli.out).map(|o| report(&o)).map_err(|e| (e, cfg))
        }
        Command::Reproduce { table, h } => {
            let cells = match h {
                None => None,
                Some(list) => {
                    let parsed: Option<Vec<usize>> = list.split(',').map(|t| parse_h(t.trim())).collect();
                    match parsed {
                        Some(c) => Some(c),
                        None => {
                            eprintln!("error: --h expects a comma-separated list such as 1/10,1/20, got `{list}`");
                            return exit::ERROR;
                        }
                    }
                }
            };
            let ov = Overrides { cells, seed: cli.seed, max_dense_n: cli.max_dense_n };
            match reproduce(*table, &cli.out, &ov, |m| eprintln!("{m}")) {
                Ok(r) => {
                    for w in &r.table.warnings {
                        eprintln!("warning: {w}");
                    }
                    println!("{}", r.dir.display());
                    print!("{}", r.table.text);
                    return if r.verify_failed { exit::VERIFY_FAILED } else { exit::SUCCESS };
                }
                Err(e) => Err((e, cfg)),
            }
        }
        Command::ExportMm { dir } => {
            let dir = dir.clone().unwrap_or_else(|| cli.out.join(&cfg.name).join("mm"));
            build_system(&cfg)
                .and_then(|sys| export_system(&sys, &dir))
                .map(|_| {
                    println!("{}", dir.display());
                    exit::SUCCESS
                })
                .map_err(|e| (e, cfg))
        }
    };
    match outcome {
        Ok(code) => code,
        Err((e, cfg)) => {
            eprintln!("{}", describe_failure(&e, &cfg));
            exit::ERROR
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // usage errors share the generic error code; 2 is reserved for verify failures
            return ExitCode::from(if e.use_stderr() { exit::ERROR as u8 } else { exit::SUCCESS as u8 });
        }
    };
    ExitCode::from(run(&cli) as u8)
}
