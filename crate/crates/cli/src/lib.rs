//! Configuration parsing and CSV output for the `cavity-tangle` binary.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;

use cavity_tangle::model::{Family, InitialStateSpec, PairSum};
use cavity_tangle::scan::{
    cp_trajectory, density_scan, red_curve, ModelKind, ScanConfig, ScanGrid, TrajectoryPoint,
};
use clap::{Parser, ValueEnum};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_PHYSICS: u8 = 4;

const EXIT_HELP: &str = "\
Exit status: 0 success, 2 usage error, 3 I/O error, 4 physics error.
Config file: one key=value per line, `#` starts a comment; keys are the long
flag names with `_` or `-` (e.g. t_max=20). Flags override file values.
CAVITY_TANGLE_THREADS caps the number of worker threads.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Concurrence-purity trajectory of one Hamiltonian.
    Trajectory,
    /// Non-interacting reference trajectory from the W state.
    Redcurve,
    /// Purity (and concurrence) over a grid of Ising couplings and times.
    Scan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Homogeneous,
    QuasiHomogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    Phi,
    Psi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PairSumArg {
    Matrix,
    Unordered,
    Ordered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Layer {
    Purity,
    Concurrence,
}

#[derive(Debug, Parser)]
#[command(name = "cavity-tangle", version, about = "Entanglement dynamics of three atoms in a cavity", after_help = EXIT_HELP)]
#[command(args_override_self = true)]
struct Args {
    #[arg(value_enum)]
    command: Command,
    /// key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "homogeneous")]
    model: Model,
    /// Normalisation of the pair terms.
    #[arg(long, value_enum, default_value = "matrix")]
    pair_sum: PairSumArg,
    /// Dipole-dipole coupling κ.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    kappa: f64,
    /// Ising coupling J (trajectory only).
    #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
    ising: f64,
    #[arg(long, value_enum, default_value = "psi")]
    family: FamilyArg,
    /// Initial-state angle; defaults to arctan √2 (the W state for psi).
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    /// Total excitation number.
    #[arg(long, default_value_t = 1)]
    n: usize,
    #[arg(long, default_value_t = 20.0)]
    t_max: f64,
    #[arg(long, default_value_t = 401)]
    t_steps: usize,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    j_min: f64,
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    j_max: f64,
    #[arg(long, default_value_t = 201)]
    j_steps: usize,
    /// Scan layers, comma separated.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "purity")]
    layers: Vec<Layer>,
    /// Seed for stochastic estimators; all current outputs are deterministic.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; `-` writes to standard output.
    #[arg(long, default_value = "-")]
    out: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub model: Model,
    pub pair_sum: PairSum,
    pub kappa: f64,
    pub ising: f64,
    pub alpha: f64,
    pub family: Family,
    pub n: usize,
    pub t_max: f64,
    pub t_steps: usize,
    pub j_min: f64,
    pub j_max: f64,
    pub j_steps: usize,
    pub layers: Vec<Layer>,
    pub seed: u64,
    pub out_path: String,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Physics(cavity_tangle::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Physics(_) => EXIT_PHYSICS,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Physics(e) => write!(f, "{e}"),
        }
    }
}

impl From<cavity_tangle::Error> for CliError {
    fn from(e: cavity_tangle::Error) -> Self {
        CliError::Physics(e)
    }
}

/// Keys accepted in a config file.
const FILE_KEYS: &[&str] = &[
    "model", "pair_sum", "kappa", "ising", "family", "alpha", "n", "t_max", "t_steps", "j_min",
    "j_max", "j_steps", "layers", "seed", "out",
];

/// Turn config-file text into `--key=value` arguments.
pub fn file_arguments(text: &str) -> Result<Vec<String>, CliError> {
    let mut args = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::Usage(format!(
                "config line {}: expected key=value, got {raw:?}",
                lineno + 1
            ))
        })?;
        let key = key.trim().replace('-', "_");
        if !FILE_KEYS.contains(&key.as_str()) {
            return Err(CliError::Usage(format!(
                "config line {}: unknown key {key:?}",
                lineno + 1
            )));
        }
        args.push(format!("--{}={}", key.replace('_', "-"), value.trim()));
    }
    Ok(args)
}

/// Parse `argv` (including the program name), reading `--config` if given.
/// File values come first so that flags override them.
pub fn parse_config<I, S>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let first = Args::try_parse_from(&argv).map_err(clap_error)?;
    let args = match &first.config {
        None => first,
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let mut merged = vec![argv[0].clone()];
            merged.extend(file_arguments(&text)?);
            merged.extend(argv[1..].iter().cloned());
            Args::try_parse_from(&merged).map_err(clap_error)?
        }
    };
    let config = RunConfig {
        command: args.command,
        model: args.model,
        pair_sum: match args.pair_sum {
            PairSumArg::Matrix => PairSum::Matrix,
            PairSumArg::Unordered => PairSum::Unordered,
            PairSumArg::Ordered => PairSum::Ordered,
        },
        kappa: args.kappa,
        ising: args.ising,
        alpha: args.alpha.unwrap_or_else(cavity_tangle::model::w_angle),
        family: match args.family {
            FamilyArg::Phi => Family::Phi,
            FamilyArg::Psi => Family::Psi,
        },
        n: args.n,
        t_max: args.t_max,
        t_steps: args.t_steps,
        j_min: args.j_min,
        j_max: args.j_max,
        j_steps: args.j_steps,
        layers: {
            let mut l = args.layers;
            l.sort();
            l.dedup();
            l
        },
        seed: args.seed,
        out_path: args.out,
    };
    validate(&config)?;
    Ok(config)
}

fn clap_error(e: clap::Error) -> CliError {
    CliError::Usage(e.render().to_string())
}

fn validate(c: &RunConfig) -> Result<(), CliError> {
    let reals = [
        ("kappa", c.kappa),
        ("ising", c.ising),
        ("alpha", c.alpha),
        ("t_max", c.t_max),
        ("j_min", c.j_min),
        ("j_max", c.j_max),
    ];
    if let Some((name, v)) = reals.iter().find(|(_, v)| !v.is_finite()) {
        return Err(CliError::Usage(format!("{name} must be finite, got {v}")));
    }
    for (name, steps) in [("t_steps", c.t_steps), ("j_steps", c.j_steps)] {
        if steps < 2 {
            return Err(CliError::Usage(format!(
                "{name} must be at least 2, got {steps}"
            )));
        }
    }
    if c.out_path.is_empty() {
        return Err(CliError::Usage("out path must be nonempty".into()));
    }
    if !c.layers.contains(&Layer::Purity) {
        return Err(CliError::Usage("layers must include purity".into()));
    }
    Ok(())
}

fn model_kind(m: Model) -> ModelKind {
    match m {
        Model::Homogeneous => ModelKind::Homogeneous,
        Model::QuasiHomogeneous => ModelKind::QuasiHomogeneous,
    }
}

fn spec(c: &RunConfig) -> Result<InitialStateSpec, CliError> {
    Ok(InitialStateSpec::new(c.family, c.alpha, c.n)?)
}

pub fn trajectory_points(c: &RunConfig) -> Result<Vec<TrajectoryPoint>, CliError> {
    match c.command {
        Command::Redcurve => Ok(red_curve(c.n, c.t_max, c.t_steps)?),
        _ => {
            let params = model_kind(c.model).params(c.kappa, c.ising, c.pair_sum)?;
            Ok(cp_trajectory(&params, &spec(c)?, c.t_max, c.t_steps)?)
        }
    }
}

pub fn scan_grid(c: &RunConfig) -> Result<ScanGrid, CliError> {
    let mut cfg = ScanConfig::new(c.kappa, model_kind(c.model), spec(c)?);
    cfg.pair_sum = c.pair_sum;
    cfg.j_min = c.j_min;
    cfg.j_max = c.j_max;
    cfg.j_steps = c.j_steps;
    cfg.t_max = c.t_max;
    cfg.t_steps = c.t_steps;
    cfg.concurrence = c.layers.contains(&Layer::Concurrence);
    Ok(density_scan(&cfg)?)
}

pub fn write_trajectory<W: Write>(w: &mut W, points: &[TrajectoryPoint]) -> io::Result<()> {
    writeln!(w, "t,purity,concurrence")?;
    for p in points {
        writeln!(w, "{},{},{}", p.t, p.purity, p.concurrence)?;
    }
    Ok(())
}

pub fn write_scan<W: Write>(w: &mut W, grid: &ScanGrid) -> io::Result<()> {
    let nt = grid.t_values.len();
    match &grid.concurrence {
        Some(_) => writeln!(w, "J,t,purity,concurrence")?,
        None => writeln!(w, "J,t,purity")?,
    }
    for (i, j) in grid.j_values.iter().enumerate() {
        for (k, t) in grid.t_values.iter().enumerate() {
            let idx = i * nt + k;
            match &grid.concurrence {
                Some(c) => writeln!(w, "{j},{t},{},{}", grid.purity[idx], c[idx])?,
                None => writeln!(w, "{j},{t},{}", grid.purity[idx])?,
            }
        }
    }
    Ok(())
}

/// Compute the requested output, then write it in one go.
pub fn run(c: &RunConfig) -> Result<(), CliError> {
    let mut buf = Vec::new();
    match c.command {
        Command::Trajectory | Command::Redcurve => {
            write_trajectory(&mut buf, &trajectory_points(c)?)
        }
        Command::Scan => write_scan(&mut buf, &scan_grid(c)?),
    }
    .expect("writing to memory");

    let io_err = |e: io::Error| CliError::Io(format!("{}: {e}", c.out_path));
    if c.out_path == "-" {
        let mut out = io::stdout().lock();
        out.write_all(&buf)
            .and_then(|_| out.flush())
            .map_err(io_err)
    } else {
        let mut out = BufWriter::new(File::create(&c.out_path).map_err(io_err)?);
        out.write_all(&buf)
            .and_then(|_| out.flush())
            .map_err(io_err)
    }
}

/// Size the global worker pool from `CAVITY_TANGLE_THREADS`, if set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("CAVITY_TANGLE_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw.trim().parse().ok().filter(|&t| t > 0).ok_or_else(|| {
        CliError::Usage(format!(
            "CAVITY_TANGLE_THREADS must be a positive integer, got {raw:?}"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot size thread pool: {e}")))
}
