use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use afb::harness::{self, ExperimentConfig, ReportRows};
use afb::{io as afb_io, theory, Direction, GridField2D, SampledPath, Seed, SpectralModel, Window};
use afb::{AnisotropicIndex, DiscreteFilter, FbmGenerator, SraSynthesizer};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "afb", version, about = "Anisotropic fractional Brownian fields: simulate, project, estimate")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw fields (with --index) or fBm paths (with --hurst).
    Simulate(SimulateArgs),
    /// Project a field onto one axis.
    Project(ProjectArgs),
    /// Estimate regularity from a field file or a path CSV.
    Estimate(EstimateArgs),
    /// Asymptotic constants of the two-scale estimator.
    Theory(TheoryArgs),
    /// Monte Carlo bias and spread table.
    Evaluate(EvaluateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldFormat {
    Bin,
    Csv,
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Field index, e.g. `axes:0.7,0.2` or `constant:0.5`.
    #[arg(long, conflicts_with = "hurst", required_unless_present = "hurst")]
    index: Option<AnisotropicIndex>,
    /// Grid size M (power of two).
    #[arg(long, default_value_t = 512)]
    grid: usize,
    /// Hurst index of an fBm path.
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long, default_value_t = 4096)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of draws; replicate i uses the seed derived from (seed, i).
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, value_enum, default_value = "bin")]
    format: FieldFormat,
    /// Output file, or directory when --reps > 1.
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct ProjectArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "horizontal")]
    direction: Direction,
    /// `unit`, `indicator:lo,hi`, `gaussian:sigma` or `zero`.
    #[arg(long, default_value = "unit")]
    window: Window,
    /// Samples of the window weight; defaults to the grid size.
    #[arg(long)]
    sub_size: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct EstimateArgs {
    /// Field file (`.afb`) or `t,value` path CSV.
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,
    /// Sub-sampling levels for fields.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    nu: Vec<u32>,
    /// Filter for paths.
    #[arg(long, default_value = "1,-2,1")]
    filter: DiscreteFilter,
    #[arg(long, default_value_t = 2)]
    u: usize,
    #[arg(long, default_value_t = 1)]
    v: usize,
    /// Index of the path, reported as the true value.
    #[arg(long)]
    hurst: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args)]
struct TheoryArgs {
    #[arg(long, default_value = "1,-2,1")]
    filter: DiscreteFilter,
    #[arg(long, default_value_t = 2)]
    u: usize,
    #[arg(long, default_value_t = 1)]
    v: usize,
    #[arg(long, value_delimiter = ',', required = true)]
    hurst: Vec<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Six index pairs, M = 512, nu = 0..3.
    Sra,
    /// Exact fBm, H in {0.2, 0.5, 0.7}, N in {1024, 4096}.
    Paths,
}

#[derive(clap::Args)]
struct EvaluateArgs {
    /// Flat key = value experiment file.
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn output(path: Option<&Path>) -> afb::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn replicate_path(out: &Path, reps: usize, i: usize, ext: &str) -> afb::Result<PathBuf> {
    if reps == 1 {
        return Ok(out.to_path_buf());
    }
    std::fs::create_dir_all(out)?;
    Ok(out.join(format!("{i:05}.{ext}")))
}

fn simulate(args: SimulateArgs) -> afb::Result<()> {
    if args.reps == 0 {
        return Err(afb::Error::InvalidParameter("--reps must be positive".into()));
    }
    let base = Seed(args.seed);
    let seed_of = |i: usize| if args.reps == 1 { base } else { base.derive(i as u64) };
    if let Some(index) = args.index {
        let synth = SraSynthesizer::new(&SpectralModel::planar(index), args.grid)?;
        for i in 0..args.reps {
            let field = synth.synthesize(seed_of(i));
            match args.format {
                FieldFormat::Bin => afb_io::save_field(&field, replicate_path(&args.out, args.reps, i, "afb")?)?,
                FieldFormat::Csv => {
                    let file = File::create(replicate_path(&args.out, args.reps, i, "csv")?)?;
                    afb_io::write_field_csv(&field, BufWriter::new(file))?
                }
            }
        }
    } else if let Some(h) = args.hurst {
        let gen = FbmGenerator::new(h, args.steps)?;
        for i in 0..args.reps {
            let path = gen.sample(seed_of(i));
            let file = File::create(replicate_path(&args.out, args.reps, i, "csv")?)?;
            afb_io::write_path_csv(&path, BufWriter::new(file))?;
        }
    }
    Ok(())
}

fn project(args: ProjectArgs) -> afb::Result<()> {
    let field: GridField2D = afb_io::load_field(&args.input)?;
    let projection = match (args.window, args.sub_size) {
        (Window::Indicator { lo, hi }, None) if lo == 0.0 && hi == 1.0 => afb::project_axis(&field, args.direction),
        (w, sub) => afb::project_window(&field, args.direction, &w, sub.unwrap_or(field.size()))?,
    };
    afb_io::write_projection_csv(&projection, output(args.out.as_deref())?)
}

fn is_field_file(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "afb")
}

fn estimate(args: EstimateArgs) -> afb::Result<()> {
    let mut rows = Vec::new();
    for input in &args.input {
        if is_field_file(input) {
            let field: GridField2D = afb_io::load_field(input)?;
            rows.extend(harness::field_estimate_rows(&field, &args.nu)?);
        } else {
            let mut path: SampledPath = afb_io::read_path_csv(File::open(input)?)?;
            if let Some(h) = args.hurst {
                path = path.with_hurst(h);
            }
            rows.push(harness::path_estimate_row(&path, &args.filter, args.u, args.v, 0)?);
        }
    }
    harness::write_estimate_rows(&rows, output(args.out.as_deref())?)
}

fn theory_table(args: TheoryArgs) -> afb::Result<()> {
    let mut out = output(args.out.as_deref())?;
    writeln!(out, "hurst,e_u,e_v,c_uu,c_vv,c_uv,gamma")?;
    for &h in &args.hurst {
        let c = theory::gamma_const(&args.filter, args.u, args.v, h)?;
        writeln!(out, "{},{},{},{},{},{},{}", h, c.e_u, c.e_v, c.c_uu, c.c_vv, c.c_uv, c.gamma)?;
    }
    out.flush()?;
    Ok(())
}

fn evaluate(args: EvaluateArgs) -> afb::Result<()> {
    let mut config = match (&args.config, args.preset) {
        (Some(path), _) => std::fs::read_to_string(path)?.parse::<ExperimentConfig>()?,
        (None, Some(Preset::Sra)) => ExperimentConfig::sra_table(1000, Seed(0)),
        (None, Some(Preset::Paths)) => {
            ExperimentConfig::exact_paths(vec![0.2, 0.5, 0.7], vec![1024, 4096], 1000, Seed(0))
        }
        (None, None) => unreachable!("clap requires one of --config, --preset"),
    };
    if let Some(r) = args.reps {
        config.reps = r;
    }
    if let Some(s) = args.seed {
        config.seed = Seed(s);
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    if args.out.is_some() {
        config.out = args.out;
    }
    let report = harness::run_eval(&config)?;
    harness::emit_table(&report, output(config.out.as_deref())?)?;
    let failed: usize = match &report.rows {
        ReportRows::Fields(rows) => rows.iter().map(|r| r.failed).sum(),
        ReportRows::Paths(rows) => rows.iter().map(|r| r.failed).sum(),
    };
    eprintln!("{} replicates per cell, {} failed, {:.1}s", report.reps, failed, report.runtime.as_secs_f64());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Project(a) => project(a),
        Command::Estimate(a) => estimate(a),
        Command::Theory(a) => theory_table(a),
        Command::Evaluate(a) => evaluate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
