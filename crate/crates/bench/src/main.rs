use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use nyfem_bench::{run, write_report, Config, Experiment};

#[derive(Parser)]
#[command(name = "nyfem-bench", about = "Nyström layer-potential and Poisson-space convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[command(rename_all = "snake_case")]
enum Command {
    /// Log-potential on the L-hexagon at five interior points.
    #[command(name = "nystrom_L")]
    NystromL(Opts),
    /// Singular corner solution on the circular L-shape.
    NystromSector(Opts),
    /// Interpolation of sin(2πx) sin(2πy) on refined meshes, m = 1..3.
    InterpSquare(Opts),
    /// Interpolation of the reentrant-corner solution on both L-shape families.
    InterpLshape(Opts),
    /// Dirichlet interpolation on the sine-bottomed cell.
    CurvedDirichlet(Opts),
    /// Sample the local basis of the degenerate octagon.
    BasisDump(Opts),
    /// Run every experiment.
    All(Opts),
}

#[derive(Args, Clone)]
struct Opts {
    /// Points per edge; comma separated for the Nyström tables.
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<usize>>,
    /// Sigmoid grading exponent.
    #[arg(long, default_value_t = nyfem::quadrature::DEFAULT_GRADING)]
    p: u32,
    /// Space degrees, comma separated.
    #[arg(long, value_delimiter = ',')]
    m: Option<Vec<usize>>,
    /// Refinement levels or family members.
    #[arg(long)]
    levels: Option<u32>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// JSON mesh used as the initial mesh (interp_square) or element (basis_dump).
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Permit n above 512.
    #[arg(long)]
    allow_large: bool,
}

impl From<Opts> for Config {
    fn from(o: Opts) -> Self {
        Config { n: o.n, p: o.p, m: o.m, levels: o.levels, out: o.out, mesh: o.mesh, seed: o.seed, allow_large: o.allow_large }
    }
}

fn execute(e: Experiment, config: &Config) -> Result<bool> {
    let report = run(e, config)?;
    let (csv, json) = write_report(&report, config, &config.out)?;
    for c in &report.checks {
        println!("{} {}: {} ({})", if c.pass { "PASS" } else { "FAIL" }, report.experiment, c.name, c.detail);
    }
    println!("{} rows -> {}, {} ({:.1} s)", report.rows.len(), csv.display(), json.display(), report.wall_time_s);
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (experiments, opts): (Vec<Experiment>, Opts) = match cli.command {
        Command::NystromL(o) => (vec![Experiment::NystromL], o),
        Command::NystromSector(o) => (vec![Experiment::NystromSector], o),
        Command::InterpSquare(o) => (vec![Experiment::InterpSquare], o),
        Command::InterpLshape(o) => (vec![Experiment::InterpLshape], o),
        Command::CurvedDirichlet(o) => (vec![Experiment::CurvedDirichlet], o),
        Command::BasisDump(o) => (vec![Experiment::BasisDump], o),
        Command::All(o) => (Experiment::ALL.to_vec(), o),
    };
    let config = Config::from(opts);
    let mut ok = true;
    for e in experiments {
        match execute(e, &config) {
            Ok(pass) => ok &= pass,
            Err(err) => {
                eprintln!("error: {}: {err:#}", e.id());
                ok = false;
            }
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
