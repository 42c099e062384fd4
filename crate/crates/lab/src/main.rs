use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fillvol_core::models::{sample_cube_planes, sample_great_spheres, sample_random_jump};
use fillvol_core::slicing::{slice_great_spheres, slice_planes, slice_polycycle, with_retries};
use fillvol_core::transport::{fv, FvMethod};
use fillvol_core::winding::fv_winding;
use fillvol_core::witness::{
    build_grid_witness, build_interval_witness, build_multiscale_witness, default_grid_cells, default_max_scale,
    DEFAULT_INTERVALS,
};
use fillvol_core::{Ambient, PolyCycle, RngStream, ZeroCycle};
use fillvol_lab::formats::{FamilyJson, FvOutput, InputJson, PlanJson, PolyCycleJson, WitnessOutput, ZeroCycleJson};
use fillvol_lab::harness::{
    fit_rows, read_rows, run_concentration_experiment, run_correlation_test, run_scaling_experiment, write_rows,
};
use fillvol_lab::{ExperimentConfig, ExperimentKind, LabError};

/// Filling volumes of random cycles: generate, slice, solve, experiment.
#[derive(Parser)]
#[command(name = "fillvol", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenModel {
    Jump,
    Planes,
    Spheres,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Auto,
    Interval,
    Flow,
    Brute,
    Winding,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Grid,
    Multiscale,
    Interval,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a random-jump polygon, cube planes, or great spheres.
    Generate {
        #[arg(long, value_enum)]
        model: GenModel,
        /// Ambient dimension.
        #[arg(long)]
        n: usize,
        /// Cycle dimension (planes and spheres).
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Vertices (jump) or number of planes/spheres.
        #[arg(long)]
        num: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Slice a cycle or plane family by coordinate planes, or a sphere
    /// family by a random great sphere drawn from `--seed`.
    Slice {
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        axes: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        at: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filling volume of a 0-cycle, or of a planar polygon with `winding`.
    Fv {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "auto")]
        method: Method,
        /// Raster side for `winding`.
        #[arg(long, default_value_t = 1.0 / 256.0)]
        h: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dual witness lower bound for a 0-cycle in a cube.
    Witness {
        input: PathBuf,
        /// Defaults to interval, multiscale, or grid for d = 1, 2, ≥ 3.
        #[arg(long, value_enum)]
        kind: Option<Kind>,
        /// Coefficient cap: κ for multiscale, C for interval.
        #[arg(long)]
        cap: Option<f64>,
        /// Number of dyadic scales (multiscale).
        #[arg(long)]
        scales: Option<u32>,
        /// Number of intervals (interval).
        #[arg(long = "R")]
        intervals: Option<usize>,
        /// Grid cells per side (grid).
        #[arg(long)]
        cells: Option<usize>,
        /// Include the atom list.
        #[arg(long)]
        atoms: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run or fit experiments.
    Experiment {
        #[command(subcommand)]
        action: ExperimentAction,
    },
}

#[derive(Subcommand)]
enum ExperimentAction {
    /// Run the experiment described by a JSON config.
    Run {
        config: PathBuf,
        /// Rows (CSV) for scaling runs, the report (JSON) otherwise.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Where to write fitted exponents of a scaling run.
        #[arg(long)]
        fits: Option<PathBuf>,
    },
    /// Fit scaling laws to a rows CSV.
    Fit {
        rows: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn open_input(path: &Path) -> Result<Box<dyn Read>, LabError> {
    if path.as_os_str() == "-" {
        Ok(Box::new(io::stdin().lock()))
    } else {
        Ok(Box::new(BufReader::new(File::open(path)?)))
    }
}

fn read_text(path: &Path) -> Result<String, LabError> {
    let mut s = String::new();
    open_input(path)?.read_to_string(&mut s)?;
    Ok(s)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, LabError> {
    match path {
        Some(p) => Ok(Box::new(BufWriter::new(File::create(p)?))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn emit<T: serde::Serialize>(value: &T, path: Option<&Path>) -> Result<(), LabError> {
    let mut w = output(path)?;
    serde_json::to_writer(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn parse_input(path: &Path) -> Result<InputJson, LabError> {
    serde_json::from_str(&read_text(path)?).map_err(|e| LabError::Config(format!("unrecognized input: {e}")))
}

fn zero_cycle(path: &Path) -> Result<ZeroCycle, LabError> {
    match parse_input(path)? {
        InputJson::Zero(z) => ZeroCycle::try_from(z),
        _ => Err(LabError::Config("expected a 0-cycle".into())),
    }
}

fn run(cli: Cli) -> Result<(), LabError> {
    match cli.command {
        Command::Generate { model, n, k, num, seed, out } => {
            let stream = RngStream::new(seed, 0);
            match model {
                GenModel::Jump => {
                    let z = sample_random_jump(num, n, stream)?;
                    emit(&PolyCycleJson::from(&z), out.as_deref())
                }
                GenModel::Planes => emit(&FamilyJson::planes(&sample_cube_planes(num, n, k, stream)?), out.as_deref()),
                GenModel::Spheres => {
                    emit(&FamilyJson::subspaces(&sample_great_spheres(num, n, k, stream)?), out.as_deref())
                }
            }
        }
        Command::Slice { input, axes, at, seed, out } => {
            let mut rng = RngStream::new(seed, 1).rng();
            let (z, atoms) = match parse_input(&input)? {
                InputJson::Poly(j) => {
                    let z = PolyCycle::try_from(j)?;
                    with_retries(&at, &mut rng, |v| slice_polycycle(&z, &axes, v))?.0
                }
                InputJson::Family(f @ FamilyJson::Planes(_)) => {
                    let planes = f.to_planes()?;
                    with_retries(&at, &mut rng, |v| slice_planes(&planes, &axes, v))?.0
                }
                InputJson::Family(f) => {
                    let us = f.to_subspaces()?;
                    let Some(u) = us.first() else {
                        return Err(LabError::Config("empty subspace list".into()));
                    };
                    let n = u.ambient_dim() - 1;
                    let k = u.dim() - 1;
                    let v = sample_great_spheres(1, n, n - k, RngStream::new(seed, 2))?.remove(0);
                    slice_great_spheres(&us, &v)?
                }
                InputJson::Zero(_) => return Err(LabError::Config("a 0-cycle cannot be sliced".into())),
            };
            emit(&ZeroCycleJson::from_slice(&z, &atoms), out.as_deref())
        }
        Command::Fv { input, method, h, out } => {
            let result = match method {
                Method::Winding => match parse_input(&input)? {
                    InputJson::Poly(j) => {
                        let f = fv_winding(&PolyCycle::try_from(j)?, h)?;
                        FvOutput { fv: f.value, plan: None, error_bound: Some(f.error_bound), shift: Some(f.shift) }
                    }
                    _ => return Err(LabError::Config("winding needs a polygon with n = 2, k = 1".into())),
                },
                m => {
                    let z = zero_cycle(&input)?;
                    let m = match m {
                        Method::Interval => FvMethod::Interval,
                        Method::Flow => FvMethod::Flow,
                        Method::Brute => FvMethod::Brute,
                        _ => FvMethod::Auto,
                    };
                    let (value, plan) = fv(&z, m)?;
                    FvOutput { fv: value, plan: plan.as_ref().map(PlanJson::from), error_bound: None, shift: None }
                }
            };
            emit(&result, out.as_deref())
        }
        Command::Witness { input, kind, cap, scales, intervals, cells, atoms, out } => {
            let z = zero_cycle(&input)?;
            let Ambient::Cube(d) = z.ambient() else {
                return Err(LabError::Config("witnesses live in the cube".into()));
            };
            let kind = kind.unwrap_or(match d {
                1 => Kind::Interval,
                2 => Kind::Multiscale,
                _ => Kind::Grid,
            });
            let w = match kind {
                Kind::Grid => build_grid_witness(&z, cells.unwrap_or_else(|| default_grid_cells(z.len(), d)))?,
                Kind::Multiscale => build_multiscale_witness(
                    &z,
                    scales.unwrap_or_else(|| default_max_scale(z.len())),
                    cap.unwrap_or(1.0),
                )?,
                Kind::Interval => {
                    build_interval_witness(&z, intervals.unwrap_or(DEFAULT_INTERVALS), cap.unwrap_or(1.0))?
                }
            };
            emit(&WitnessOutput::new(&w, &z, atoms)?, out.as_deref())
        }
        Command::Experiment { action: ExperimentAction::Run { config, out, fits } } => {
            let cfg = ExperimentConfig::from_json(&read_text(&config)?)?;
            match cfg.experiment {
                ExperimentKind::Scaling => {
                    let result = run_scaling_experiment(&cfg)?;
                    let mut w = output(out.as_deref())?;
                    write_rows(&result.rows, &mut w)?;
                    w.flush()?;
                    match fits {
                        Some(p) => emit(&result.fits, Some(&p)),
                        None => {
                            for f in &result.fits {
                                if let Some(p) = f.power {
                                    log::info!("{} exponent {:.4} ± {:.4} (R² {:.4})", f.observable, p.exponent, p.stderr, p.r2);
                                }
                            }
                            Ok(())
                        }
                    }
                }
                ExperimentKind::Concentration => emit(&run_concentration_experiment(&cfg)?, out.as_deref()),
                ExperimentKind::Correlation => emit(&run_correlation_test(&cfg)?, out.as_deref()),
            }
        }
        Command::Experiment { action: ExperimentAction::Fit { rows, out } } => {
            let rows = read_rows(open_input(&rows)?)?;
            emit(&fit_rows(&rows), out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fillvol: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
