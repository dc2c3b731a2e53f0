//! Command-line front end. Exit codes: 0 success, 1 usage or configuration
//! error, 2 runtime failure.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config_with, SimConfig};
use crate::error::{Error, Result};
use crate::grid::GridGeometry;
use crate::harness::scenario::{run_scenario, Method};
use crate::harness::study::{bench, convergence_study, lambda_sweep, ReferenceSpec, TimingRow};
use crate::io;
use crate::model::{build_layered_model, LayeredModelSpec};
use crate::model_file::save_model;

pub const THREADS_ENV: &str = "GODUNOV_SEIS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "godunov-seis", version, about = "2-D P-wave simulation and method comparison")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct ConfigArgs {
    /// JSON run configuration.
    #[arg(long, short)]
    config: PathBuf,
    /// Override a configuration key, e.g. `--set grid.h=5` (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Methods to compare; defaults to all six.
    #[arg(long, value_delimiter = ',')]
    method: Vec<Method>,
    /// Reference method.
    #[arg(long, default_value = "df20")]
    reference: Method,
    /// Reference cell size is the finest study cell size divided by this.
    #[arg(long, default_value_t = 4)]
    refine: usize,
    /// Output CSV.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one configuration; writes the seismogram, snapshots and cut.
    Run {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Output directory; overrides `output_dir` from the configuration.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Cut errors against a fine reference over a list of cell sizes.
    Convergence {
        #[command(flatten)]
        study: StudyArgs,
        /// Cell sizes in x (y scales with the configured aspect ratio).
        #[arg(long, value_delimiter = ',', required = true)]
        h: Vec<f64>,
    },
    /// Cut errors as the layer contrasts are reduced.
    SweepLambda {
        #[command(flatten)]
        study: StudyArgs,
        /// Jump reductions in percent.
        #[arg(long, value_delimiter = ',', default_value = "0,25,50,75,100")]
        lambda: Vec<f64>,
    },
    /// Write a layered GSM1 model file.
    MakeModel {
        #[arg(long)]
        layers: usize,
        #[arg(long)]
        v0: f64,
        #[arg(long)]
        dv: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1000.0)]
        width: f64,
        #[arg(long, default_value_t = 1000.0)]
        height: f64,
        #[arg(long, default_value_t = 10.0)]
        dx: f64,
        #[arg(long)]
        dy: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        x0: f64,
        #[arg(long, default_value_t = 0.0)]
        y0: f64,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Wall-clock time per method and cell size.
    Bench {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_delimiter = ',')]
        method: Vec<Method>,
        /// Cell sizes; defaults to the configured one.
        #[arg(long, value_delimiter = ',')]
        h: Vec<f64>,
        /// Runs averaged per measurement; overrides the configuration.
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long, short)]
        out: PathBuf,
    },
}

/// Run the program on `argv` (including the program name) and return the
/// process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return 1;
    }
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } | Error::Parse { .. } => 1,
                _ => 2,
            }
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::config(THREADS_ENV, format!("expected a non-negative integer, found `{raw}`")))?;
    // A pool that already exists (e.g. a second call in one process) is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load(cfg: &ConfigArgs) -> Result<SimConfig> {
    parse_config_with(&cfg.config, &cfg.set)
}

fn methods_or_all(m: &[Method]) -> Vec<Method> {
    if m.is_empty() {
        Method::ALL.to_vec()
    } else {
        m.to_vec()
    }
}

fn reference(study: &StudyArgs) -> Result<ReferenceSpec> {
    if study.refine < 1 {
        return Err(Error::config("refine", "must be at least 1"));
    }
    Ok(ReferenceSpec { method: study.reference, refine: study.refine })
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Run { cfg, out } => {
            let sim = load(&cfg)?;
            let dir = out.unwrap_or(sim.output_dir.clone());
            run(&sim, &dir)
        }
        Command::Convergence { study, h } => {
            let sim = load(&study.cfg)?;
            let rep = convergence_study(&sim.scenario, &methods_or_all(&study.method), &h, reference(&study)?)?;
            io::write_convergence(&study.out, &rep)
        }
        Command::SweepLambda { study, lambda } => {
            let sim = load(&study.cfg)?;
            let rows = lambda_sweep(&sim.scenario, &lambda, &methods_or_all(&study.method), reference(&study)?)?;
            io::write_sweep(&study.out, &rows)
        }
        Command::MakeModel { layers, v0, dv, lambda, width, height, dx, dy, x0, y0, out } => {
            let spec = LayeredModelSpec { v_base: v0, dv, n_layers: layers, lambda_pct: lambda };
            spec.validate().map_err(|e| Error::config("layers", e.to_string()))?;
            let dy = dy.unwrap_or(dx);
            if !(dx > 0.0 && dy > 0.0 && width > 0.0 && height > 0.0) {
                return Err(Error::config("dx", "cell sizes and extents must be positive"));
            }
            let nx = (width / dx).round() as usize;
            let ny = (height / dy).round() as usize;
            let geom = GridGeometry::new(nx, ny, dx, dy, x0, y0, 2).map_err(|e| Error::config("width", e.to_string()))?;
            let model = build_layered_model(&spec, &geom)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            save_model(&model, &geom, &out)
        }
        Command::Bench { cfg, method, h, repeats, out } => {
            let mut sim = load(&cfg)?;
            if let Some(r) = repeats {
                if r < 1 {
                    return Err(Error::config("repeats", "must be at least 1"));
                }
                sim.scenario.repeats = r;
            }
            let hs = if h.is_empty() { vec![sim.scenario.dx] } else { h };
            let rows = bench(&sim.scenario, &methods_or_all(&method), &hs)?;
            io::write_timing(&out, &rows)
        }
    }
}

fn run(sim: &SimConfig, dir: &Path) -> Result<()> {
    let scn = &sim.scenario;
    let out = run_scenario(scn)?;
    std::fs::create_dir_all(dir)?;
    io::write_seismogram(&dir.join("seismogram.csv"), &out.seismogram)?;
    for (k, s) in out.snapshots.iter().enumerate() {
        let stem = format!("snapshot_{k:03}");
        io::write_pgm(&dir.join(format!("{stem}.pgm")), &s.sigma)?;
        io::write_grid(&dir.join(format!("{stem}.csv")), &s.sigma)?;
    }
    if let Some(c) = &out.cut {
        io::write_cut(&dir.join("cut.csv"), c)?;
    }
    let cells = out.geom.nx * out.geom.ny;
    let row = TimingRow {
        method: scn.method,
        h: scn.dx,
        nx: out.geom.nx,
        ny: out.geom.ny,
        steps: out.steps,
        seconds: out.timing.seconds,
        per_cell_step_ns: if out.steps > 0 { out.timing.seconds * 1e9 / (cells * out.steps) as f64 } else { 0.0 },
    };
    io::write_timing(&dir.join("timing.csv"), &[row])
}
