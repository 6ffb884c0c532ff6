//! Command-line front end for the jigsaw MCTS solver.

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use jigsaw_mcts::env::{compute_metrics, render_canvas, save_image, synthetic_image, well_placed};
use jigsaw_mcts::eval::Evaluator;
use jigsaw_mcts::harness::{
    attempt_orders, brute_force_solve, deactivation_cells, export_samples, hinted_start, play_once, puzzle_seed,
    run_benchmark, run_grid, solve_settings, solve_with_attempts, sweep_cells, Dataset, EvaluatorFactory,
    ExperimentConfig, ExportMode, HarnessError, Scorer, Stream, Sweep, DEFAULT_LEAF_CAP,
};

#[derive(Parser)]
#[command(name = "jigsaw-mcts", version, about = "Reassemble square jigsaw puzzles with Monte-Carlo tree search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment config file (`key = value` lines).
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override one config key; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        for o in &self.overrides {
            cfg.set_assignment(o)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve one puzzle and print its metrics.
    Solve {
        #[command(flatten)]
        config: ConfigArgs,
        /// Puzzle index within the configured set.
        #[arg(long, default_value_t = 0)]
        index: usize,
        /// Write the final canvas as PNG.
        #[arg(long)]
        render: Option<PathBuf>,
    },
    /// Solve the configured puzzle set and report aggregate metrics.
    Bench {
        #[command(flatten)]
        config: ConfigArgs,
        /// Write the JSON report here (same as `--set report=PATH`).
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Run one benchmark per cell of a parameter sweep.
    Grid {
        #[command(flatten)]
        config: ConfigArgs,
        /// `key=v1,v2,...`; repeat for a cartesian product.
        #[arg(long, value_name = "KEY=V1,V2")]
        sweep: Vec<String>,
        /// Run the head-deactivation cells instead of a sweep.
        #[arg(long, conflicts_with = "sweep")]
        deactivation: bool,
        /// Write the JSON grid report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Check search results against exhaustive enumeration.
    Oracle {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_enum, default_value_t = ScorerArg::GroundTruth)]
        scorer: ScorerArg,
        /// Largest number of complete assignments to enumerate.
        #[arg(long, default_value_t = DEFAULT_LEAF_CAP)]
        cap: usize,
    },
    /// Write training samples as JSON lines.
    ExportSamples {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long, value_name = "pretrain-p|pretrain-v|mcts-visited")]
        mode: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write synthetic source images or instance records.
    GenSynthetic {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Number of files; defaults to the configured puzzle count.
        #[arg(long)]
        count: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Png)]
        format: Format,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ScorerArg {
    GroundTruth,
    ValueHead,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    /// Square source images with a margin around the canvas.
    Png,
    /// Sliced instances in the binary record format.
    Record,
}

/// Border added around synthetic source images, so crops vary.
const SOURCE_MARGIN: usize = 32;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn io_err(path: &std::path::Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

fn run(command: Command) -> Result<ExitCode, HarnessError> {
    match command {
        Command::Solve { config, index, render } => {
            let cfg = config.load()?;
            let dataset = Dataset::open(&cfg.dataset, cfg.spec, cfg.master_seed)?;
            let instance = std::sync::Arc::new(dataset.instance(index)?);
            let evaluator = EvaluatorFactory::from_config(&cfg)?.for_puzzle(index, &instance);
            let seed = puzzle_seed(cfg.master_seed, index, Stream::Order);
            let out = solve_with_attempts(&instance, evaluator.as_ref(), &solve_settings(&cfg), seed)?;
            let best = out.best();
            println!("puzzle         {index} ({})", instance.source_id());
            println!("attempt        {} of {}", out.chosen + 1, out.attempts.len());
            println!("patch-wise     {:.4}", best.metrics.patch_wise);
            println!("neighbor-wise  {:.4}", best.metrics.neighbor_wise);
            println!("puzzle-wise    {}", best.metrics.puzzle_wise);
            println!("well-placed    {} / {}", well_placed(&best.terminal, &instance), cfg.spec.patches());
            println!("predicted      {:.4}", best.predicted);
            if let Some(path) = render {
                render_canvas(&best.terminal, &path)?;
                println!("rendered       {}", path.display());
            }
        }
        Command::Bench { config, report } => {
            let mut cfg = config.load()?;
            if report.is_some() {
                cfg.report = report;
            }
            let run = run_benchmark(&cfg)?;
            print!("{}", run.table());
            if let Some(path) = &cfg.report {
                println!("report written to {}", path.display());
            }
        }
        Command::Grid {
            config,
            sweep,
            deactivation,
            report,
        } => {
            let cfg = config.load()?;
            let cells = if deactivation {
                deactivation_cells()
            } else {
                let sweeps = sweep.iter().map(|s| s.parse()).collect::<Result<Vec<Sweep>, _>>()?;
                if sweeps.is_empty() {
                    return Err(HarnessError::Config("grid needs --sweep or --deactivation".into()));
                }
                sweep_cells(&sweeps)
            };
            let grid = run_grid(&cfg, &cells)?;
            print!("{}", grid.table());
            if let Some(path) = report.or(cfg.report) {
                std::fs::write(&path, grid.to_json()).map_err(|e| io_err(&path, e))?;
                println!("report written to {}", path.display());
            }
        }
        Command::Oracle { config, scorer, cap } => {
            let cfg = config.load()?;
            let scorer = match scorer {
                ScorerArg::GroundTruth => Scorer::GroundTruth,
                ScorerArg::ValueHead => Scorer::ValueHead,
            };
            let dataset = Dataset::open(&cfg.dataset, cfg.spec, cfg.master_seed)?;
            let factory = EvaluatorFactory::from_config(&cfg)?;
            let settings = solve_settings(&cfg);
            let mut mismatches = 0;
            for (index, instance) in dataset.instances(cfg.puzzles)?.iter().enumerate() {
                let evaluator = factory.for_puzzle(index, instance);
                let seed = puzzle_seed(cfg.master_seed, index, Stream::Order);
                let order = attempt_orders(instance, 1, seed, cfg.hint_kind).remove(0);
                let best = brute_force_solve(instance, &order, scorer, evaluator.as_ref(), cap)?;
                let start = hinted_start(instance, &order, cfg.hints)?;
                let game = play_once(start, instance, evaluator.as_ref(), &settings)?;
                let found = match scorer {
                    Scorer::GroundTruth => f64::from(compute_metrics(&game.terminal, instance)?.puzzle_wise),
                    Scorer::ValueHead => evaluator.evaluate_one(&game.terminal)?.value,
                };
                if found != best.score {
                    mismatches += 1;
                    println!("puzzle {index}: search {found} vs optimum {} ({:?})", best.score, best.assignment);
                }
            }
            println!("{} of {} puzzles match the exhaustive optimum", cfg.puzzles - mismatches, cfg.puzzles);
            if mismatches > 0 {
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::ExportSamples { config, mode, out } => {
            let cfg = config.load()?;
            let mode: ExportMode = mode.parse()?;
            let n = export_samples(&cfg, mode, &out)?;
            println!("{n} samples written to {}", out.display());
        }
        Command::GenSynthetic {
            config,
            out,
            count,
            format,
        } => {
            let cfg = config.load()?;
            std::fs::create_dir_all(&out).map_err(|e| io_err(&out, e))?;
            let count = count.unwrap_or(cfg.puzzles);
            match format {
                Format::Png => {
                    let side = cfg.spec.canvas_side() + SOURCE_MARGIN;
                    for i in 0..count {
                        let image = synthetic_image(side, side, puzzle_seed(cfg.master_seed, i, Stream::Image));
                        save_image(&image, &out.join(format!("synthetic_{i:04}.png")))?;
                    }
                }
                Format::Record => {
                    let dataset = Dataset::open(&cfg.dataset, cfg.spec, cfg.master_seed)?;
                    for i in 0..count {
                        let path = out.join(format!("puzzle_{i:04}.azpz"));
                        let file = File::create(&path).map_err(|e| io_err(&path, e))?;
                        dataset
                            .instance(i)?
                            .write_record(BufWriter::new(file))
                            .map_err(|e| io_err(&path, e))?;
                    }
                }
            }
            println!("{count} files written to {}", out.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}
