//! `popdyn` — analyze and simulate turn-by-turn population game dynamics.
//!
//! Exit codes: 0 success, 2 malformed input or spec validation error,
//! 3 numerical failure.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use popdyn::di::{oracle_integrate, solve};
use popdyn::game::{Aggregate, GameSpec};
use popdyn::io::{load_game, save_game, write_solution_csv, write_trajectory_csv};
use popdyn::preset::{queuing_preset, QueuingParams};
use popdyn::report::{analyze, AnalysisOptions};
use popdyn::rv::Orientation;
use popdyn::sim::{batch, run_with_stream, SimConfig};

#[derive(Parser)]
#[command(name = "popdyn", version, about = "Population game dynamics toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct GameArg {
    /// Game specification file (JSON).
    #[arg(long, value_name = "FILE")]
    game: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Full analysis: regions, adjacency, attractors with equilibrium
    /// verdicts, RV graph with cycles, and three-action cycle tests.
    Analyze {
        #[command(flatten)]
        game: GameArg,
        /// Output directory; the report goes to stdout when omitted.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        /// Use the mirrored RV edge orientation.
        #[arg(long)]
        reverse_rv: bool,
        /// Cap on enumerated cycles.
        #[arg(long, default_value_t = 10_000)]
        cycle_cap: usize,
    },
    /// Run seeded stochastic trajectories and classify their limits.
    Simulate {
        #[command(flatten)]
        game: GameArg,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        #[arg(long, default_value_t = 1)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Record every Nth step.
        #[arg(long, default_value_t = 100)]
        thin: u64,
        /// Initial aggregate "v1,v2,..."; barycenter when omitted.
        #[arg(long, value_name = "LIST")]
        initial: Option<String>,
        /// Warm-start weight of the initial aggregate.
        #[arg(long, default_value_t = 1.0)]
        t0: f64,
        /// Convergence tolerance for limit classification.
        #[arg(long, default_value_t = 0.02)]
        tol: f64,
        /// Output directory for trajectory CSVs and the limits report.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Closed-form solution of the mean differential inclusion.
    DiSolve {
        #[command(flatten)]
        game: GameArg,
        /// Initial aggregate "v1,v2,...".
        #[arg(long, value_name = "LIST")]
        initial: String,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
        /// CSV sampling interval.
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Also run the fixed-step integrator and report the deviation.
        #[arg(long)]
        check: bool,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Enumerate the nonempty preference regions.
    Regions {
        #[command(flatten)]
        game: GameArg,
    },
    /// Build the Region-Vertex graph and list its directed cycles.
    RvGraph {
        #[command(flatten)]
        game: GameArg,
        #[arg(long)]
        reverse_rv: bool,
        #[arg(long, default_value_t = 10_000)]
        cycle_cap: usize,
    },
    /// Run the three-action cycle-existence tests on every RV cycle.
    CycleTest {
        #[command(flatten)]
        game: GameArg,
    },
    /// Emit a built-in game specification.
    Preset {
        #[command(subcommand)]
        which: PresetCommand,
    },
}

#[derive(Subcommand)]
enum PresetCommand {
    /// Priority-queue game: standard/moderate/premium queues.
    Queuing {
        /// Moderate-queue congestion discount, 0 < rho < 1.
        #[arg(long)]
        rho: f64,
        /// Moderate-queue fee.
        #[arg(long)]
        p: f64,
        /// Premium-queue fee.
        #[arg(long)]
        ps: f64,
        /// Premium comparison trade-off, c >= 1.
        #[arg(long)]
        c: f64,
        /// Type shares "a_cs,a_cm" or "a_cs,a_cm,a_ac".
        #[arg(long, value_name = "LIST")]
        alpha: String,
        /// Output file; stdout when omitted.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

/// 2 = malformed spec / bad arguments, 3 = numerical failure.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn spec(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }
    fn numerical(message: impl Into<String>) -> Failure {
        Failure { code: 3, message: message.into() }
    }
}

fn parse_list(text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Failure::spec(format!("bad number {s:?} in list: {e}")))
        })
        .collect()
}

fn load(path: &Path) -> Result<GameSpec, Failure> {
    load_game(path).map_err(|e| Failure::spec(e.to_string()))
}

fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::spec(format!("cannot create {}: {e}", dir.display())))
}

fn emit_json(value: &impl serde::Serialize, out: Option<(&Path, &str)>) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match out {
        None => println!("{text}"),
        Some((dir, name)) => {
            ensure_dir(dir)?;
            let path = dir.join(name);
            std::fs::write(&path, text)
                .map_err(|e| Failure::spec(format!("cannot write {}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn run_analyze(
    game: &GameSpec,
    reverse_rv: bool,
    cycle_cap: usize,
) -> Result<popdyn::report::AnalysisReport, Failure> {
    let opts = AnalysisOptions {
        cycle_cap,
        rv_orientation: if reverse_rv { Orientation::Reverse } else { Orientation::Standard },
        ..AnalysisOptions::default()
    };
    analyze(game, &opts).map_err(|e| Failure::numerical(e.to_string()))
}

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("POPDYN_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Analyze { game, out, reverse_rv, cycle_cap } => {
            let game = load(&game.game)?;
            let report = run_analyze(&game, reverse_rv, cycle_cap)?;
            emit_json(&report, out.as_deref().map(|d| (d, "report.json")))
        }
        Command::Regions { game } => {
            let game = load(&game.game)?;
            let regions = popdyn::region::enumerate_regions(&game)
                .map_err(|e| Failure::numerical(e.to_string()))?;
            emit_json(&regions, None)
        }
        Command::RvGraph { game, reverse_rv, cycle_cap } => {
            let game = load(&game.game)?;
            let report = run_analyze(&game, reverse_rv, cycle_cap)?;
            emit_json(&report.rv_graph, None)
        }
        Command::CycleTest { game } => {
            let game = load(&game.game)?;
            let report = run_analyze(&game, false, 10_000)?;
            if game.k() != 3 {
                return Err(Failure::spec(format!(
                    "cycle-test covers three-action games; this one has {} actions",
                    game.k()
                )));
            }
            emit_json(&report.cycle_tests, None)
        }
        Command::Simulate {
            game,
            steps,
            runs,
            seed,
            thin,
            initial,
            t0,
            tol,
            out,
        } => {
            let game = load(&game.game)?;
            let mut config = SimConfig::new(steps, seed);
            config.thin = thin;
            config.t0 = t0;
            if let Some(text) = initial {
                let v = parse_list(&text)?;
                Aggregate::new(v.clone())
                    .map_err(|e| Failure::spec(format!("--initial: {e}")))?;
                config.initial = Some(v);
            }
            let report = run_analyze(&game, false, 10_000)?;
            let attractors = report.attractor_list();
            let (limits, summary) = batch(
                &game,
                &config,
                runs,
                &report.regions,
                &attractors,
                &report.rv_graph.cycles,
                tol,
            );
            if let Some(dir) = &out {
                ensure_dir(dir)?;
                for i in 0..runs {
                    let traj = run_with_stream(&game, &config, i as u64);
                    let path = dir.join(format!("run_{i}.csv"));
                    let mut file = std::fs::File::create(&path).map_err(|e| {
                        Failure::spec(format!("cannot write {}: {e}", path.display()))
                    })?;
                    write_trajectory_csv(&traj, game.k(), &mut file)
                        .map_err(|e| Failure::spec(e.to_string()))?;
                }
                emit_json(&(&limits, &summary), Some((dir.as_path(), "limits.json")))?;
                Ok(())
            } else {
                emit_json(&(&limits, &summary), None)
            }
        }
        Command::DiSolve { game, initial, horizon, dt, check, out } => {
            let game = load(&game.game)?;
            let v = parse_list(&initial)?;
            let start = Aggregate::new(v).map_err(|e| Failure::spec(format!("--initial: {e}")))?;
            let regions = popdyn::region::enumerate_regions(&game)
                .map_err(|e| Failure::numerical(e.to_string()))?;
            let records = popdyn::region::adjacency(&regions, &game)
                .map_err(|e| Failure::numerical(e.to_string()))?;
            let solution = solve(&game, &regions, &records, &start, horizon)
                .map_err(|e| Failure::numerical(e.to_string()))?;
            if check {
                let oracle = oracle_integrate(&game, &start, horizon, 1e-4)
                    .map_err(|e| Failure::numerical(e.to_string()))?;
                let mut worst = 0.0f64;
                for (i, p) in oracle.points.iter().enumerate() {
                    if let Some(q) = solution.at(i as f64 * oracle.dt) {
                        let d = p
                            .iter()
                            .zip(&q)
                            .map(|(a, b)| (a - b).abs())
                            .fold(0.0, f64::max);
                        worst = worst.max(d);
                    }
                }
                eprintln!("integrator cross-check: sup deviation {worst:.3e}");
            }
            match out {
                None => {
                    let mut stdout = std::io::stdout().lock();
                    write_solution_csv(&solution, game.k(), horizon, dt, &mut stdout)
                        .map_err(|e| Failure::spec(e.to_string()))
                }
                Some(dir) => {
                    ensure_dir(&dir)?;
                    let path = dir.join("solution.csv");
                    let mut file = std::fs::File::create(&path).map_err(|e| {
                        Failure::spec(format!("cannot write {}: {e}", path.display()))
                    })?;
                    write_solution_csv(&solution, game.k(), horizon, dt, &mut file)
                        .map_err(|e| Failure::spec(e.to_string()))?;
                    eprintln!("wrote {}", path.display());
                    emit_json(&solution.termination, None)
                }
            }
        }
        Command::Preset { which } => match which {
            PresetCommand::Queuing { rho, p, ps, c, alpha, out } => {
                let alpha = parse_list(&alpha)?;
                let game = queuing_preset(&QueuingParams { rho, p, ps, c, alpha })
                    .map_err(|e| Failure::spec(e.to_string()))?;
                match out {
                    None => {
                        let file = popdyn::io::GameFile::from_game(&game);
                        emit_json(&file, None)
                    }
                    Some(path) => {
                        save_game(&game, &path).map_err(|e| Failure::spec(e.to_string()))?;
                        eprintln!("wrote {}", path.display());
                        Ok(())
                    }
                }
            }
        },
    }
}
