use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use timepref::config::{
    expand_sweep, parse_axis, parse_config_over, preset, preset_description, Scenario, PRESET_NAMES,
};
use timepref::output::{run_scenario, ScenarioOutcome, VARIABLES};
use timepref::{Error, Execution, Result};

#[derive(Parser)]
#[command(
    name = "timepref",
    version,
    about = "Time-preference interaction simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// First seed; further seeds count up from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of seeds per scenario.
    #[arg(long)]
    seeds: Option<u32>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Update agents on one thread.
    #[arg(long)]
    serial: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a scenario document.
    Run {
        #[arg(long, required_unless_present = "config")]
        preset: Option<String>,
        /// TOML scenario; overrides the preset when both are given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Run a scenario over the cartesian product of `--vary` axes.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `section.key=v1,v2,...`; may be repeated.
        #[arg(long, required = true)]
        vary: Vec<String>,
        #[command(flatten)]
        common: Common,
    },
    /// List built-in presets.
    Presets,
}

fn read(path: &PathBuf) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })
}

fn apply(common: &Common, scenarios: &mut [Scenario]) {
    for s in scenarios {
        if let Some(seed) = common.seed {
            s.base_seed = seed;
        }
        if let Some(n) = common.seeds {
            s.n_seeds = n;
        }
    }
}

fn report(outcome: &ScenarioOutcome) {
    let a = &outcome.aggregate;
    println!(
        "{} ({} seeds) -> {}",
        a.scenario,
        a.seeds.len(),
        outcome.dir.display()
    );
    for var in VARIABLES {
        let v = a.get(var).expect("known variable");
        let gini = v
            .gini
            .map(|g| format!("{:.4} ± {:.4}", g.mean, g.se))
            .unwrap_or_else(|| "-".into());
        println!(
            "  {var:>3}  mean {:.4} ± {:.4}  cv {:.4} ± {:.4}  gini {gini}",
            v.mean.mean, v.mean.se, v.cv.mean, v.cv.se
        );
    }
    if a.floor_hits > 0 {
        println!("  discount-rate floor applied {} times", a.floor_hits);
    }
}

fn execute(scenarios: Vec<Scenario>, common: &Common) -> Result<()> {
    let execution = if common.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };
    for s in &scenarios {
        s.validate()?;
    }
    for s in &scenarios {
        report(&run_scenario(s, &common.out, execution)?);
    }
    Ok(())
}

fn main_inner(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Presets => {
            for name in PRESET_NAMES {
                println!("{name:<10} {}", preset_description(name).unwrap_or(""));
            }
            Ok(())
        }
        Command::Run {
            preset: name,
            config,
            common,
        } => {
            let bases = match &name {
                Some(n) => preset(n)?,
                None => vec![Scenario::default()],
            };
            let mut scenarios = match &config {
                Some(path) => {
                    let text = read(path)?;
                    bases
                        .iter()
                        .map(|b| parse_config_over(&text, b))
                        .collect::<Result<Vec<_>>>()?
                }
                None => bases,
            };
            apply(&common, &mut scenarios);
            execute(scenarios, &common)
        }
        Command::Sweep {
            config,
            vary,
            common,
        } => {
            let mut base = parse_config_over(&read(&config)?, &Scenario::default())?;
            apply(&common, std::slice::from_mut(&mut base));
            let axes = vary
                .iter()
                .map(|v| parse_axis(v))
                .collect::<Result<Vec<_>>>()?;
            execute(expand_sweep(&base, &axes)?, &common)
        }
    }
}

fn main() -> ExitCode {
    match main_inner(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
