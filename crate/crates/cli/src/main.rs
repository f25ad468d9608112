//! `aldus` command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 I/O error,
//! 3 sink or stream error.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aldus::engine::THREADS_ENV;
use aldus::io::sink::{create_file, CsvSink, DiscardSink, FrameSink, PcdSink, StreamSink};
use aldus::io::stream::accept_one;
use aldus::{
    inject_dust, read_csv_file, run_scenario, sweep, Engine, OutputFormat, ScenarioConfig,
    SweepParam,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "aldus",
    version,
    about = "LIDAR simulation under airborne dust and smoke clouds"
)]
struct Cli {
    /// Worker threads (0 = all cores). Never changes the output.
    #[arg(long, global = true, env = THREADS_ENV, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate frames of a scenario and write them out.
    Simulate(SimulateArgs),
    /// Apply the dust model to a recorded point-cloud CSV.
    Inject(InjectArgs),
    /// Sweep cloud density or distance and emit per-object metrics as CSV.
    Sweep(SweepArgs),
    /// Measure simulation throughput, discarding frames.
    Bench(BenchArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    frames: Option<u64>,
    #[arg(long)]
    format: Option<OutputFormat>,
    /// File path, `-` for stdout, or host:port for `--format stream`.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct InjectArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: String,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// `density` or `cloud_front_distance`.
    #[arg(long)]
    param: String,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    replicates: u32,
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    frames: Option<u64>,
}

enum Failure {
    Config(String),
    Io(String),
    Sink(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Io(_) => 2,
            Failure::Sink(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Io(m) | Failure::Sink(m) => m,
        }
    }
}

fn load(path: &Path) -> Result<ScenarioConfig, Failure> {
    ScenarioConfig::load(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn write_output(out: &str, text: &str) -> Result<(), Failure> {
    if out == "-" {
        let mut stdout = io::stdout().lock();
        stdout
            .write_all(text.as_bytes())
            .and_then(|_| stdout.flush())
            .map_err(|e| Failure::Io(format!("stdout: {e}")))
    } else {
        std::fs::write(out, text).map_err(|e| Failure::Io(format!("{out}: {e}")))
    }
}

fn simulate(args: SimulateArgs, engine: &Engine) -> Result<(), Failure> {
    let mut config = load(&args.config)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(frames) = args.frames {
        if frames == 0 {
            return Err(Failure::Config("--frames must be >= 1".into()));
        }
        config.frames = frames;
    }
    if let Some(format) = args.format {
        config.output.format = format;
    }
    if let Some(out) = args.out {
        config.output.path = out;
    }
    let path = config.output.path.clone();

    let mut sink: Box<dyn FrameSink> = match config.output.format {
        OutputFormat::Csv if path == "-" => Box::new(CsvSink::new(io::stdout().lock())),
        OutputFormat::Csv => Box::new(CsvSink::new(
            create_file(&path).map_err(|e| Failure::Io(format!("{path}: {e}")))?,
        )),
        OutputFormat::Pcd if path == "-" => Box::new(PcdSink::Writer(io::stdout().lock())),
        OutputFormat::Pcd => Box::new(PcdSink::files(&path, config.frames)),
        OutputFormat::Stream => {
            eprintln!("waiting for a client on {path}");
            let stream = accept_one(path.as_str())
                .map_err(|e| Failure::Sink(format!("stream {path}: {e}")))?;
            Box::new(StreamSink::new(stream))
        }
    };
    let summary =
        run_scenario(&config, engine, sink.as_mut()).map_err(|e| Failure::Sink(e.to_string()))?;
    eprintln!("{summary}");
    Ok(())
}

fn inject(args: InjectArgs, engine: &Engine) -> Result<(), Failure> {
    let config = load(&args.config)?;
    let points = read_csv_file(&args.input).map_err(|e| match e {
        aldus::io::csv::ReadError::Io(e) => Failure::Io(format!("{}: {e}", args.input.display())),
        aldus::io::csv::ReadError::Parse(e) => {
            Failure::Config(format!("{}: {e}", args.input.display()))
        }
    })?;
    let seed = args.seed.unwrap_or(config.seed);
    let injected = inject_dust(&points, &config.world, seed, engine)
        .map_err(|e| Failure::Config(e.to_string()))?;
    write_output(&args.out, &injected.to_csv())?;
    eprintln!("{}", injected.report);
    Ok(())
}

fn run_sweep(args: SweepArgs, engine: &Engine) -> Result<(), Failure> {
    let config = load(&args.config)?;
    let param: SweepParam = args
        .param
        .parse()
        .map_err(|e: aldus::ConfigError| Failure::Config(e.to_string()))?;
    let table = sweep(&config, param, &args.values, args.replicates, engine)
        .map_err(|e| Failure::Config(e.to_string()))?;
    write_output(&args.out, &table.to_csv())
}

fn bench(args: BenchArgs, engine: &Engine) -> Result<(), Failure> {
    let mut config = load(&args.config)?;
    if let Some(frames) = args.frames {
        if frames == 0 {
            return Err(Failure::Config("--frames must be >= 1".into()));
        }
        config.frames = frames;
    }
    let mut sink = DiscardSink::default();
    let summary =
        run_scenario(&config, engine, &mut sink).map_err(|e| Failure::Sink(e.to_string()))?;
    eprintln!(
        "sensor {} ({} rays/frame), {} threads",
        config.world.sensor.name,
        config.world.sensor.beams_per_frame(),
        engine.threads()
    );
    eprintln!("{summary}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let engine = Engine::with_threads(cli.threads);
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, &engine),
        Command::Inject(a) => inject(a, &engine),
        Command::Sweep(a) => run_sweep(a, &engine),
        Command::Bench(a) => bench(a, &engine),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
