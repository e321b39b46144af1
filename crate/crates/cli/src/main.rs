use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, CommandFactory, Parser, Subcommand};
use marker_crowds::engine::run_with_trace;
use marker_crowds::{
    compute_group_metrics, export_trajectories, parse_config, preset, render_config, state_hash,
    write_metrics_csv, InputTrace, MetricsRow, ScenarioConfig, TrajectoryHeader,
};
use marker_crowds_server::{Server, ServerOptions};

#[derive(Parser)]
#[command(name = "marker-crowds", version, about = "Marker-based crowd simulation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario headless and write trajectories and metrics.
    Run(RunArgs),
    /// Run the verification battery.
    Verify {
        /// Seeds per figure check.
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        seeds: u64,
    },
    /// Serve an interactive session over TCP.
    Serve(ServeArgs),
    /// Print a preset as a scenario config document.
    Preset { name: String },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in scenario name.
    #[arg(long)]
    preset: Option<String>,
    /// Scenario config file (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    source: Source,
    /// Ticks to simulate (defaults to the scenario's n_ticks).
    #[arg(long)]
    ticks: Option<u64>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, env = "MARKER_CROWDS_OUT", default_value = "out")]
    out: PathBuf,
    /// Ticks at which to record group metrics (defaults to the last tick).
    #[arg(long, value_delimiter = ',')]
    metrics_at: Vec<u64>,
    /// Print the state hash of the run.
    #[arg(long)]
    hash: bool,
    /// Avatar input trace (JSON lines of {"tick","dx","dy"}).
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, default_value = "127.0.0.1:7878")]
    bind: String,
    /// Drive the avatar from a trace file instead of client input.
    #[arg(long)]
    replay: Option<PathBuf>,
    /// Stop the session after this many ticks.
    #[arg(long)]
    ticks: Option<u64>,
    /// Milliseconds between frames (defaults to the scenario dt; 0 runs unpaced).
    #[arg(long)]
    tick_ms: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

fn load_config(source: &Source, seed: Option<u64>) -> Result<ScenarioConfig> {
    let mut config = match (&source.preset, &source.config) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            parse_config(&text).with_context(|| format!("in {}", path.display()))?
        }
        (None, None) => unreachable!("clap requires a source"),
    };
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn load_trace(path: &Path) -> Result<InputTrace> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    InputTrace::read(BufReader::new(file)).with_context(|| format!("in {}", path.display()))
}

fn cmd_run(args: RunArgs) -> Result<()> {
    let config = load_config(&args.source, args.seed)?;
    let ticks = args.ticks.unwrap_or(config.n_ticks);
    let metrics_at = if args.metrics_at.is_empty() { vec![ticks] } else { args.metrics_at.clone() };
    if let Some(bad) = metrics_at.iter().find(|&&t| t > ticks) {
        bail!("--metrics-at {bad} is past the last tick {ticks}");
    }
    let trace = match &args.trace {
        Some(path) => load_trace(path)?,
        None => InputTrace::default(),
    };

    let frames = run_with_trace(&config, ticks, &trace)?;

    let mut rows = Vec::new();
    for &tick in &metrics_at {
        let frame = &frames[tick as usize];
        for label in config.profile_labels() {
            let goal = config.goal_for_label(&label).expect("label from config");
            rows.push(MetricsRow { tick, metrics: compute_group_metrics(frame, &label, goal)? });
        }
    }

    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let header = TrajectoryHeader::new(config.name.clone(), config.seed, config.dt);
    export_trajectories(&frames, &header, &args.out.join("trajectory.jsonl"))?;
    write_metrics_csv(&rows, &args.out.join("metrics.csv"))?;
    if args.hash {
        println!("{}", state_hash(&frames));
    }
    Ok(())
}

fn cmd_verify(seeds: u64) -> Result<bool> {
    let started = Instant::now();
    let outcomes = marker_crowds_cli::run_battery(seeds as usize);
    for outcome in &outcomes {
        println!("{}", outcome.line());
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!(
        "{passed}/{} checks passed in {:.1}s",
        outcomes.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(passed == outcomes.len())
}

fn cmd_serve(args: ServeArgs) -> Result<()> {
    let config = load_config(&args.source, args.seed)?;
    let mut options = ServerOptions::new(config);
    if let Some(ms) = args.tick_ms {
        options.tick_interval = Some(Duration::from_millis(ms));
    }
    if let Some(path) = &args.replay {
        options.replay = Some(load_trace(path)?);
    }
    options.max_ticks = args.ticks;
    let server = Server::bind(&args.bind, options).with_context(|| format!("binding {}", args.bind))?;
    eprintln!("listening on {}", server.local_addr()?);
    server.run()?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let rendered = e.render().to_string();
            eprint!("{rendered}");
            if !rendered.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args).map(|_| true),
        Command::Verify { seeds } => cmd_verify(seeds),
        Command::Serve(args) => cmd_serve(args).map(|_| true),
        Command::Preset { name } => preset(&name).map(|c| {
            print!("{}", render_config(&c));
            true
        }).map_err(Into::into),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
