use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use wavefarm::farm::Layout;
use wavefarm::harness::analysis::{buoy_removal, landscape_scan, removal_csv};
use wavefarm::harness::plot::{caption, plot_layout};
use wavefarm::harness::{run_experiment, ClimateRef, ExperimentConfig, ExperimentResult};
use wavefarm::hydro::{BesselJ0, BuoySpec, FarmModel, HydroTable};
use wavefarm::{Error, Result};

#[derive(Parser)]
#[command(name = "wavefarm", version, about = "Wave-energy farm power model and layout optimizers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the annual power and q-factor of a layout.
    Evaluate {
        #[arg(long)]
        layout: PathBuf,
        #[command(flatten)]
        physics: Physics,
    },
    /// Run the algorithm(s) of an experiment file over its seeds.
    Optimize {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a multi-algorithm experiment and write statistics and Friedman ranks.
    Benchmark {
        #[arg(long)]
        config: PathBuf,
    },
    /// Post-hoc analyses of a layout.
    Analyze {
        #[command(subcommand)]
        analysis: Analysis,
    },
    /// Draw a layout as SVG, buoys coloured by power.
    Plot {
        #[arg(long)]
        layout: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        physics: Physics,
    },
}

#[derive(Subcommand)]
enum Analysis {
    /// Remove the weakest buoy repeatedly and report power and q.
    Removal {
        #[arg(long)]
        layout: PathBuf,
        #[command(flatten)]
        physics: Physics,
        /// CSV destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sample the power of one buoy moved over a grid, the others fixed.
    Landscape {
        #[arg(long)]
        layout: PathBuf,
        #[command(flatten)]
        physics: Physics,
        /// Index of the buoy to move; the last one by default.
        #[arg(long)]
        buoy: Option<usize>,
        #[arg(long, default_value_t = 25.0)]
        step: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Physics {
    /// Synthetic site (`perth_like`, `sydney_like`) or climate CSV.
    #[arg(long, default_value = "perth_like")]
    climate: String,
    /// Coefficient table CSV; the bundled table when absent.
    #[arg(long)]
    hydro_table: Option<PathBuf>,
}

impl Physics {
    fn model(&self) -> Result<FarmModel> {
        let climate = ClimateRef::parse(&self.climate).load()?;
        let table = match &self.hydro_table {
            Some(p) => HydroTable::load_csv(p)?,
            None => HydroTable::default_sphere(),
        };
        let spec = BuoySpec::for_climate(&table, &climate)?;
        FarmModel::new(spec, table, climate, std::sync::Arc::new(BesselJ0))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            if e.use_stderr() {
                let text = e.to_string();
                eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            } else {
                print!("{e}");
            }
            return ExitCode::from(code);
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let text = e.to_string();
            eprintln!("error: {}", text.lines().next().unwrap_or("unknown failure"));
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Evaluate { layout, physics } => {
            let model = physics.model()?;
            let layout = Layout::load(&layout)?;
            let power = model.evaluate(&layout)?;
            let q = model.q_from_total(&layout, power.total)?;
            println!("power_w={}", power.total);
            println!("q_factor={q}");
            Ok(())
        }
        Command::Optimize { config } => {
            let result = experiment(&config)?;
            for runs in &result.runs {
                for r in runs {
                    println!("{} seed={} final_power={} evaluations={}", r.algorithm, r.seed, r.final_power, r.evaluations);
                }
            }
            Ok(())
        }
        Command::Benchmark { config } => {
            let result = experiment(&config)?;
            print!("{}", result.stats_csv());
            print!("{}", result.friedman_csv());
            Ok(())
        }
        Command::Analyze { analysis } => analyze(analysis),
        Command::Plot { layout, out, physics } => {
            let model = physics.model()?;
            let layout = Layout::load(&layout)?;
            let (per_buoy, total, q) = if layout.is_empty() {
                (Vec::new(), 0.0, None)
            } else {
                let power = model.evaluate(&layout)?;
                let q = model.q_from_total(&layout, power.total)?;
                (power.per_buoy, power.total, Some(q))
            };
            let svg = plot_layout(&layout, &per_buoy, total, q, model.spec().radius);
            write(&out, &svg)?;
            println!("{}", caption(total, q));
            Ok(())
        }
    }
}

fn experiment(path: &Path) -> Result<ExperimentResult> {
    let config = ExperimentConfig::load(path)?;
    run_experiment(&config)
}

fn analyze(analysis: Analysis) -> Result<()> {
    match analysis {
        Analysis::Removal { layout, physics, out } => {
            let model = physics.model()?;
            let steps = buoy_removal(&model, &Layout::load(&layout)?)?;
            emit(out.as_deref(), &removal_csv(&steps))
        }
        Analysis::Landscape {
            layout,
            physics,
            buoy,
            step,
            out,
        } => {
            if !(step.is_finite() && step > 0.0) {
                return Err(Error::InvalidParams(format!("grid step {step} is not positive")));
            }
            let model = physics.model()?;
            let layout = Layout::load(&layout)?;
            if layout.is_empty() {
                return Err(Error::InvalidLayout("landscape needs at least one buoy".into()));
            }
            let index = buoy.unwrap_or(layout.len() - 1);
            if index >= layout.len() {
                return Err(Error::InvalidParams(format!(
                    "buoy index {index} out of range for {} buoys",
                    layout.len()
                )));
            }
            let scan = landscape_scan(&model, &layout.without(index), step)?;
            emit(out.as_deref(), &scan.to_csv())
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io {
        context: format!("writing {}", path.display()),
        source: e,
    })
}
