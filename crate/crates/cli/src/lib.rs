//! Command-line front end: reads a protocol mix and censor parameters, runs
//! the solver and writes CSV, SVG or JSON artifacts.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use censor_game::enumeration::{
    count_distributor_strategies, enumerate_censor_actions, enumerate_distributor_strategies,
};
use censor_game::game::{find_critical_protocols, find_equilibrium};
use censor_game::report::{
    build_grid, render_heatmap_svg, write_equilibrium_report, write_grid_csv,
};
use censor_game::utility::{utility_curve, write_curve_csv, CurveSpec};
use censor_game::{load_mix, write_mix_csv, ProtocolMix, UtilityParams};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "censor-game",
    version,
    about = "Solve the censor vs. traffic-distributor blocking game",
    arg_required_else_help = true
)]
struct Cli {
    /// Print a built-in protocol mix as mix-CSV and exit.
    #[arg(long, value_enum, value_name = "NAME")]
    seed_mix: Option<SeedMix>,

    /// Worker threads for grid and equilibrium sweeps (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SeedMix {
    Paper,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Censor utility curves as curve-CSV.
    Curve(CurveArgs),
    /// List admissible distributor strategies (or censor actions).
    Enumerate(EnumerateArgs),
    /// Solve for the equilibrium and print equilibrium-JSON.
    Solve(SolveArgs),
    /// Build the full utility grid as grid-CSV and/or an SVG heatmap.
    Grid(GridArgs),
    /// Print the protocols the censor will never block.
    Critical(CriticalArgs),
}

#[derive(Debug, Args)]
struct CensorArgs {
    /// Constant C of the utility function (must be < 0).
    #[arg(long = "c", value_name = "DECIMAL", allow_negative_numbers = true)]
    c: f64,
    /// Constant D of the utility function (must be > 0).
    #[arg(long = "d", value_name = "DECIMAL", allow_negative_numbers = true)]
    d: f64,
    /// Distributor quantization step in percent; must divide 100.
    #[arg(long, default_value_t = 5, value_name = "INT")]
    quantum: u32,
}

impl CensorArgs {
    fn params(&self) -> Result<UtilityParams, CliError> {
        Ok(UtilityParams::new(self.c, self.d, self.quantum)?)
    }
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    censor: CensorArgs,
    /// True-positive percentages, one curve each.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "100,50,0",
        value_name = "LIST"
    )]
    t_values: Vec<f64>,
    #[arg(long, default_value_t = 0.0)]
    f_min: f64,
    #[arg(long, default_value_t = 35.0)]
    f_max: f64,
    #[arg(long, default_value_t = 0.25)]
    f_step: f64,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EnumerateArgs {
    #[arg(long, value_name = "PATH")]
    mix: PathBuf,
    #[arg(long, default_value_t = 5, value_name = "INT")]
    quantum: u32,
    /// Print only the number of strategies.
    #[arg(long)]
    count_only: bool,
    /// List censor actions (blocked-set bitstrings) instead of strategies.
    #[arg(long)]
    censor: bool,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[arg(long, value_name = "PATH")]
    mix: PathBuf,
    #[command(flatten)]
    censor: CensorArgs,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, value_name = "PATH")]
    mix: PathBuf,
    #[command(flatten)]
    censor: CensorArgs,
    /// Write grid-CSV here.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
    /// Write the SVG heatmap here.
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    /// Plot area width of the heatmap.
    #[arg(long, default_value_t = 640.0)]
    width: f64,
    /// Plot area height of the heatmap.
    #[arg(long, default_value_t = 846.0)]
    height: f64,
}

#[derive(Debug, Args)]
struct CriticalArgs {
    #[arg(long, value_name = "PATH")]
    mix: PathBuf,
    #[command(flatten)]
    censor: CensorArgs,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Io(m) => m,
        }
    }
}

impl From<censor_game::Error> for CliError {
    fn from(e: censor_game::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

/// One artifact: where it goes and its bytes.
type Output = (Option<PathBuf>, Vec<u8>);

/// Runs the command line `args` (program name first) and returns the exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_CONFIG
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };

    let result = match cli.threads {
        Some(0) => Err(CliError::Config(
            "invalid value for `--threads`: must be at least 1".into(),
        )),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {n} threads: {e}")))
            .and_then(|pool| pool.install(|| execute(&cli))),
        None => execute(&cli),
    }
    .and_then(|outputs| emit(outputs, stdout));

    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {}", e.message());
            e.exit_code()
        }
    }
}

/// Computes every artifact in memory; nothing is written until all succeed.
fn execute(cli: &Cli) -> Result<Vec<Output>, CliError> {
    if let Some(SeedMix::Paper) = cli.seed_mix {
        let mut buf = Vec::new();
        write_mix_csv(&ProtocolMix::paper(), &mut buf)?;
        return Ok(vec![(None, buf)]);
    }
    let Some(command) = &cli.command else {
        return Err(CliError::Config(
            "a subcommand or --seed-mix is required".into(),
        ));
    };
    match command {
        Command::Curve(args) => {
            let params = args.censor.params()?;
            let spec = CurveSpec::new(args.t_values.clone(), args.f_min, args.f_max, args.f_step)?;
            let mut buf = Vec::new();
            write_curve_csv(&utility_curve(&params, &spec), &mut buf)?;
            Ok(vec![(args.out.clone(), buf)])
        }
        Command::Enumerate(args) => {
            let mix = read_mix(&args.mix)?;
            let mut buf = Vec::new();
            let line = |buf: &mut Vec<u8>, s: String| writeln!(buf, "{s}").map_err(io_error);
            if args.censor {
                let actions = enumerate_censor_actions(&mix)?;
                if args.count_only {
                    line(&mut buf, actions.len().to_string())?;
                } else {
                    for a in actions {
                        line(&mut buf, a.bitstring(mix.len()))?;
                    }
                }
            } else if args.count_only {
                line(
                    &mut buf,
                    count_distributor_strategies(mix.len(), args.quantum)?.to_string(),
                )?;
            } else {
                for s in enumerate_distributor_strategies(&mix, args.quantum)? {
                    line(&mut buf, s.to_string())?;
                }
            }
            Ok(vec![(args.out.clone(), buf)])
        }
        Command::Solve(args) => {
            let params = args.censor.params()?;
            let mix = read_mix(&args.mix)?;
            let eq = find_equilibrium(&mix, &params)?;
            let mut buf = Vec::new();
            write_equilibrium_report(&eq, &mix, &params, &mut buf)?;
            Ok(vec![(args.out.clone(), buf)])
        }
        Command::Grid(args) => {
            let params = args.censor.params()?;
            if !(args.width > 0.0
                && args.height > 0.0
                && args.width.is_finite()
                && args.height.is_finite())
            {
                return Err(CliError::Config(
                    "invalid value for `--width`/`--height`: must be positive".into(),
                ));
            }
            let mix = read_mix(&args.mix)?;
            let grid = build_grid(&mix, &params)?;
            let mut outputs = Vec::new();
            if args.csv.is_some() || args.svg.is_none() {
                let mut buf = Vec::new();
                write_grid_csv(&grid, &mut buf)?;
                outputs.push((args.csv.clone(), buf));
            }
            if let Some(path) = &args.svg {
                let mut buf = Vec::new();
                render_heatmap_svg(&grid, args.width, args.height, &mut buf)?;
                outputs.push((Some(path.clone()), buf));
            }
            Ok(outputs)
        }
        Command::Critical(args) => {
            let params = args.censor.params()?;
            let mix = read_mix(&args.mix)?;
            let mut buf = Vec::new();
            for i in find_critical_protocols(&mix, &params) {
                writeln!(buf, "{}", mix.name(i)).map_err(io_error)?;
            }
            Ok(vec![(args.out.clone(), buf)])
        }
    }
}

fn read_mix(path: &Path) -> Result<ProtocolMix, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    load_mix(BufReader::new(file)).map_err(|e| match e {
        e if e.is_io() => CliError::Io(format!("{}: {e}", path.display())),
        e => CliError::Config(format!("{}: {e}", path.display())),
    })
}

fn emit(outputs: Vec<Output>, stdout: &mut dyn Write) -> Result<(), CliError> {
    for (path, bytes) in outputs {
        match path {
            Some(path) => std::fs::write(&path, bytes)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => stdout.write_all(&bytes).map_err(io_error)?,
        }
    }
    stdout.flush().map_err(io_error)
}

fn io_error(e: io::Error) -> CliError {
    CliError::Io(e.to_string())
}
