use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dropmaze::io::{
    read_field_csv, render_field, FieldRef, FieldTable, Normalization, Overlay, RenderOptions,
    RenderStyle,
};
use dropmaze::maze::{emit_maze, parse_maze};
use dropmaze::scenario::{
    build_maze, compare_bundles, diff_json, error_exit_code, export_bundle, load_config,
    run_scenario, MazeSource, ScenarioConfig, Stage,
};
use dropmaze::HarnessError;

#[derive(Parser)]
#[command(
    name = "dropmaze",
    version,
    about = "Electrolyte maze solver and droplet simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the potential and write the field files.
    Solve(RunArgs),
    /// Full pipeline: fields, droplet, oracle and comparison.
    Simulate(RunArgs),
    /// Fields plus the Lee path and streamline, without the droplet.
    Oracle(RunArgs),
    /// Compare the reports of two bundles (corner-force edge study).
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Also write compare.json here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the maze a generator config describes as a maze file.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Render a field CSV as a PGM image.
    Render {
        field: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Style::Gray)]
        style: Style,
        /// Maze file to draw under an overlay.
        #[arg(long)]
        maze: Option<PathBuf>,
        /// Pixels per cell.
        #[arg(long, default_value_t = 1)]
        scale: usize,
        /// Log scale over this many decades instead of linear.
        #[arg(long)]
        log_decades: Option<f64>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Scenario config; repeat for a batch.
    #[arg(long, required = true)]
    config: Vec<PathBuf>,
    /// Output directory; in a batch each scenario writes to a subdirectory
    /// named after it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Scenarios to run at once.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Style {
    Gray,
    Strokes,
    Overlay,
}

fn fail(e: &HarnessError) -> i32 {
    eprintln!("error: {e}");
    error_exit_code(e)
}

fn out_dir(cfg: &ScenarioConfig, out: Option<&Path>, batch: bool) -> PathBuf {
    let name: String = cfg
        .name
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    match (out, &cfg.out_dir) {
        (Some(o), _) if batch => o.join(name),
        (Some(o), _) => o.to_path_buf(),
        (None, Some(d)) => d.clone(),
        (None, None) => PathBuf::from("out").join(name),
    }
}

fn run_one(cfg: &ScenarioConfig, stage: Stage, dir: &Path) -> Result<(i32, String), HarnessError> {
    let run = run_scenario(cfg, stage)?;
    export_bundle(&run, dir)?;
    let outcome = match &run.report.trajectory {
        Some(t) => format!("{:?}", t.termination),
        None => "solved".to_string(),
    };
    Ok((
        run.report.exit_code,
        format!("{}: {outcome} -> {}", cfg.name, dir.display()),
    ))
}

fn run_batch(args: &RunArgs, stage: Stage) -> i32 {
    let mut configs = Vec::new();
    for p in &args.config {
        match load_config(p) {
            Ok(c) => configs.push(match args.seed {
                Some(s) => c.with_seed(s),
                None => c,
            }),
            Err(e) => return fail(&e),
        }
    }
    let batch = configs.len() > 1;
    let codes = Mutex::new(vec![0; configs.len()]);
    let next = AtomicUsize::new(0);
    let worker = || loop {
        let i = next.fetch_add(1, Ordering::Relaxed);
        let Some(cfg) = configs.get(i) else { break };
        let code = match run_one(cfg, stage, &out_dir(cfg, args.out.as_deref(), batch)) {
            Ok((code, line)) => {
                println!("{line}");
                code
            }
            Err(e) => {
                eprintln!("{}: error: {e}", cfg.name);
                error_exit_code(&e)
            }
        };
        codes.lock().unwrap()[i] = code;
    };
    std::thread::scope(|s| {
        for _ in 0..args.jobs.clamp(1, configs.len().max(1)) {
            s.spawn(worker);
        }
    });
    let codes = codes.into_inner().unwrap();
    codes.into_iter().max().unwrap_or(0)
}

fn generate(config: &Path, out: &Path, seed: Option<u64>) -> Result<PathBuf, HarnessError> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg = cfg.with_seed(s);
    }
    if matches!(cfg.maze, MazeSource::File(_)) {
        return Err(HarnessError::Config {
            line: 0,
            message: "`generate` needs a `generator` config".into(),
        });
    }
    let maze = build_maze(&cfg)?;
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let p = out.join("maze.txt");
    std::fs::write(&p, emit_maze(&maze)).map_err(|e| HarnessError::io(&p, e))?;
    Ok(p)
}

fn render(
    field: &Path,
    out: &Path,
    style: Style,
    maze: Option<&Path>,
    scale: usize,
    log: Option<f64>,
) -> Result<PathBuf, HarnessError> {
    let text = std::fs::read_to_string(field).map_err(|e| HarnessError::io(field, e))?;
    let table = read_field_csv(&text).map_err(|e| match e {
        HarnessError::Csv { line, message } => HarnessError::Format {
            path: field.into(),
            message: format!("line {line}: {message}"),
        },
        e => e,
    })?;
    let maze = match maze {
        Some(p) => Some(parse_maze(
            &std::fs::read_to_string(p).map_err(|e| HarnessError::io(p, e))?,
        )?),
        None => None,
    };
    let opts = RenderOptions {
        style: match style {
            Style::Gray => RenderStyle::Gray,
            Style::Strokes => RenderStyle::Strokes,
            Style::Overlay => RenderStyle::Overlay,
        },
        normalization: log.map_or(Normalization::Linear, |decades| Normalization::Log {
            decades,
        }),
        scale,
        stroke_spacing: 0,
    };
    let overlay = Overlay {
        maze: maze.as_ref(),
        ..Overlay::default()
    };
    let img = match &table {
        FieldTable::Scalar(f) => render_field(FieldRef::Scalar(f), &opts, &overlay)?,
        FieldTable::Vector(f) => render_field(FieldRef::Vector(f), &opts, &overlay)?,
    };
    std::fs::create_dir_all(out).map_err(|e| HarnessError::io(out, e))?;
    let stem = field
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("field");
    let p = out.join(format!("{stem}.pgm"));
    std::fs::write(&p, img.to_pgm()).map_err(|e| HarnessError::io(&p, e))?;
    Ok(p)
}

fn main() -> ExitCode {
    // usage errors get the bad-input status; clap's own 2 means Locked here
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 4 } else { 0 });
        }
    };
    let code = match &cli.command {
        Command::Solve(a) => run_batch(a, Stage::Solve),
        Command::Simulate(a) => run_batch(a, Stage::Simulate),
        Command::Oracle(a) => run_batch(a, Stage::Oracle),
        Command::Compare { a, b, out } => match compare_bundles(a, b) {
            Ok(d) => {
                let json = diff_json(&d);
                print!("{json}");
                match out {
                    Some(o) => {
                        let p = o.join("compare.json");
                        match std::fs::create_dir_all(o).and_then(|_| std::fs::write(&p, &json)) {
                            Ok(()) => 0,
                            Err(e) => fail(&HarnessError::io(p, e)),
                        }
                    }
                    None => 0,
                }
            }
            Err(e) => fail(&e),
        },
        Command::Generate { config, out, seed } => match generate(config, out, *seed) {
            Ok(p) => {
                println!("{}", p.display());
                0
            }
            Err(e) => fail(&e),
        },
        Command::Render {
            field,
            out,
            style,
            maze,
            scale,
            log_decades,
        } => match render(field, out, *style, maze.as_deref(), *scale, *log_decades) {
            Ok(p) => {
                println!("{}", p.display());
                0
            }
            Err(e) => fail(&e),
        },
    };
    ExitCode::from(code as u8)
}
