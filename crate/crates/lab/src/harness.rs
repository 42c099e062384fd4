//! Experiment drivers: slice-integral estimators, scaling runs,
//! concentration and correlation experiments.
//!
//! Every trial draws from its own [`RngStream`] keyed by
//! `(master_seed, N index, trial index)`, and results are merged in key
//! order, so the rows do not depend on the number of workers.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use fillvol_core::models::{
    sample_cube_planes, sample_great_spheres, sample_iid_zero_cycle, sample_random_jump, uniform_point,
};
use fillvol_core::slicing::{slice_great_spheres, slice_planes, slice_polycycle, slice_segment, with_retries, MAX_RETRIES};
use fillvol_core::transport::{filling_volume, mass_f0};
use fillvol_core::witness::{build_witness, knot_slice_lower_bound};
use fillvol_core::winding::fv_winding;
use fillvol_core::{
    AffineKPlane, Ambient, Error as CoreError, PolyCycle, RngStream, SignedPoint, SliceAtom, WitnessParams, ZeroCycle,
};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::fit::{fit_power_law, fit_sqrtlog, PowerFit, SqrtLogFit};
use crate::stats;
use crate::LabError;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "FILLVOL_WORKERS";
pub const DEFAULT_QUADRATURE: usize = 32;
pub const DEFAULT_WINDING_H: f64 = 1.0 / 256.0;
pub const CSV_HEADER: [&str; 8] = ["model", "n", "k", "N", "trial", "seed", "observable", "value"];
/// Tolerance of the one-point perturbation check.
pub const PERTURBATION_TOL: f64 = 1e-9;
/// Conditioning events below this count flag a correlation estimate.
pub const MIN_EVENTS: u64 = 100;
pub const CORRELATION_SIDES: [f64; 4] = [0.25, 0.125, 0.0625, 0.03125];

// Slice parameters and quadrature points come from a stream disjoint from
// the one that generates the cycle.
const AUX_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

const SPHERE_NOTE: &str = "sphere slices use one uniformly random great sphere per trial";
const TAIL_NOTE: &str = "tails are reported in the exp(-C r / sqrt(N)) normalization";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Jump,
    Planes,
    Spheres,
    Iid0cycle,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Jump => "jump",
            Model::Planes => "planes",
            Model::Spheres => "spheres",
            Model::Iid0cycle => "iid0cycle",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    /// Exact filling volume of an i.i.d. 0-cycle.
    Fv,
    /// Mass of the unshifted filling of a 0-cycle on `[0,1]`.
    MassF0,
    /// Exact filling volume of the slice at `slice_at`.
    SliceFv,
    /// Monte Carlo integral of slice filling volumes, with `_stderr` row.
    SliceIntegral,
    /// Dual witness lower bound, on the slice for cycle models.
    WitnessBound,
    /// Raster filling of a planar polygon, with `_error` row.
    FvWinding,
}

impl Observable {
    pub fn name(self) -> &'static str {
        match self {
            Observable::Fv => "fv",
            Observable::MassF0 => "mass_f0",
            Observable::SliceFv => "slice_fv",
            Observable::SliceIntegral => "slice_integral",
            Observable::WitnessBound => "witness_bound",
            Observable::FvWinding => "fv_winding",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    #[default]
    Scaling,
    Concentration,
    Correlation,
}

/// Witness construction knobs; see [`WitnessParams`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WitnessConfig {
    pub grid_cells: Option<usize>,
    pub max_scale: Option<u32>,
    pub kappa: f64,
    pub intervals: usize,
    pub interval_cap: f64,
}

impl Default for WitnessConfig {
    fn default() -> Self {
        let p = WitnessParams::default();
        WitnessConfig {
            grid_cells: p.grid_cells,
            max_scale: p.max_scale,
            kappa: p.kappa,
            intervals: p.intervals,
            interval_cap: p.interval_cap,
        }
    }
}

impl WitnessConfig {
    pub fn params(&self) -> WitnessParams {
        WitnessParams {
            grid_cells: self.grid_cells,
            max_scale: self.max_scale,
            kappa: self.kappa,
            intervals: self.intervals,
            interval_cap: self.interval_cap,
        }
    }
}

fn default_quadrature() -> usize {
    DEFAULT_QUADRATURE
}

fn default_h() -> f64 {
    DEFAULT_WINDING_H
}

/// An experiment as read from JSON. For `iid0cycle`, `n` is the cube
/// dimension and `k` is 0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub experiment: ExperimentKind,
    pub model: Model,
    pub n: usize,
    #[serde(default)]
    pub k: usize,
    #[serde(rename = "N_grid")]
    pub n_grid: Vec<usize>,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default = "default_quadrature")]
    pub quadrature_m: usize,
    /// Defaults to [`ExperimentConfig::default_observables`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observables: Option<Vec<Observable>>,
    /// Slice point for `slice_fv` and the witness; 0.5 on every fixed axis
    /// when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slice_at: Option<Vec<f64>>,
    #[serde(default = "default_h")]
    pub winding_h: f64,
    #[serde(default)]
    pub witness: WitnessConfig,
}

impl ExperimentConfig {
    pub fn new(model: Model, n: usize, k: usize, n_grid: Vec<usize>, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            experiment: ExperimentKind::Scaling,
            model,
            n,
            k,
            n_grid,
            trials,
            master_seed,
            quadrature_m: DEFAULT_QUADRATURE,
            observables: None,
            slice_at: None,
            winding_h: DEFAULT_WINDING_H,
            witness: WitnessConfig::default(),
        }
    }

    pub fn with_observables(mut self, obs: &[Observable]) -> Self {
        self.observables = Some(obs.to_vec());
        self
    }

    pub fn default_observables(&self) -> Vec<Observable> {
        use Observable::*;
        match self.model {
            Model::Iid0cycle if self.n == 1 => vec![Fv, MassF0, WitnessBound],
            Model::Iid0cycle => vec![Fv, WitnessBound],
            Model::Jump if self.n == 2 => vec![SliceFv, WitnessBound, SliceIntegral, FvWinding],
            Model::Jump => vec![SliceFv, WitnessBound, SliceIntegral],
            Model::Planes => vec![SliceFv, WitnessBound, SliceIntegral],
            Model::Spheres => vec![SliceFv],
        }
    }

    pub fn observables(&self) -> Vec<Observable> {
        self.observables.clone().unwrap_or_else(|| self.default_observables())
    }

    /// Fixed slice values, one per fixed axis.
    pub fn slice_values(&self) -> Vec<f64> {
        self.slice_at.clone().unwrap_or_else(|| vec![0.5; self.k])
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: String| Err(LabError::Config(m));
        let (n, k) = (self.n, self.k);
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return bad("N_grid must be a nonempty list of positive integers".into());
        }
        if self.quadrature_m == 0 {
            return bad("quadrature_m must be positive".into());
        }
        match self.model {
            Model::Iid0cycle if k != 0 || n == 0 => return bad("iid0cycle needs n >= 1 and k = 0".into()),
            Model::Jump if k != 1 || n < 2 => return bad("jump needs k = 1 and n >= 2".into()),
            Model::Jump if self.n_grid.iter().any(|&v| v < 3) => return bad("jump needs N >= 3".into()),
            Model::Planes if k == 0 || k >= n => return bad("planes need 1 <= k < n".into()),
            Model::Spheres if k >= n => return bad("spheres need k < n".into()),
            _ => {}
        }
        if let Some(v) = &self.slice_at {
            if v.len() != k || v.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return bad(format!("slice_at needs {k} values in [0,1]"));
            }
        }
        for o in self.observables() {
            let ok = match (self.model, o) {
                (Model::Iid0cycle, Observable::Fv | Observable::WitnessBound) => true,
                (Model::Iid0cycle, Observable::MassF0) => n == 1,
                (Model::Jump | Model::Planes, Observable::SliceFv | Observable::SliceIntegral) => true,
                (Model::Jump | Model::Planes, Observable::WitnessBound) => true,
                (Model::Jump, Observable::FvWinding) => n == 2,
                (Model::Spheres, Observable::SliceFv) => true,
                _ => false,
            };
            if !ok {
                return bad(format!("observable {} is not available for {} with n = {n}", o.name(), self.model.name()));
            }
        }
        if self.observables().contains(&Observable::FvWinding) {
            fillvol_core::winding::fv_winding(&PolyCycle::new(2, 1, Vec::new())?, self.winding_h)?;
        }
        if self.experiment == ExperimentKind::Concentration && self.trials < 200 {
            return bad("concentration experiments need at least 200 trials".into());
        }
        if self.experiment == ExperimentKind::Correlation && (self.model != Model::Jump || n < 3) {
            return bad("correlation tests need the jump model with n >= 3".into());
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, LabError> {
        let c: ExperimentConfig = serde_json::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }
}

/// One CSV record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub model: String,
    pub n: usize,
    pub k: usize,
    #[serde(rename = "N")]
    pub size: usize,
    pub trial: usize,
    pub seed: u64,
    pub observable: String,
    pub value: f64,
}

/// Sample mean of one observable at one `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    #[serde(rename = "N")]
    pub size: usize,
    pub count: usize,
    pub failures: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableFit {
    pub model: String,
    pub n: usize,
    pub k: usize,
    pub observable: String,
    pub points: Vec<FitPoint>,
    pub power: Option<PowerFit>,
    pub sqrtlog: Option<SqrtLogFit>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl ObservableFit {
    pub fn means(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.size as f64, p.mean)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingResult {
    pub rows: Vec<Row>,
    pub fits: Vec<ObservableFit>,
}

impl ScalingResult {
    pub fn fit(&self, observable: &str) -> Option<&ObservableFit> {
        self.fits.iter().find(|f| f.observable == observable)
    }

    /// Values of one observable at one `N`, in trial order.
    pub fn values(&self, observable: &str, size: usize) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.observable == observable && r.size == size)
            .map(|r| r.value)
            .collect()
    }
}

fn aux_stream(s: RngStream) -> RngStream {
    RngStream::new(s.master_seed ^ AUX_SALT, s.stream_id)
}

fn slice_axes(k: usize) -> Vec<usize> {
    (0..k).collect()
}

/// Fills a 0-cycle, returning 0 for an empty one.
fn fill(z: &ZeroCycle) -> Result<f64, CoreError> {
    if z.is_empty() {
        Ok(0.0)
    } else {
        filling_volume(z)
    }
}

fn sample_summary(values: &[f64]) -> (f64, f64) {
    (stats::mean(values), stats::std_err(values))
}

/// Monte Carlo average over `m` uniform slice points of the filling volume
/// of the slice of `z` by the coordinate planes fixing `axes`, with its
/// standard error. An unbiased estimate of `∫ FV(Z ∩ P_x) dx`.
pub fn integrate_slice_fv<R: Rng + ?Sized>(
    z: &PolyCycle,
    axes: &[usize],
    m: usize,
    rng: &mut R,
) -> Result<(f64, f64), LabError> {
    if m == 0 {
        return Err(LabError::Config("quadrature needs at least one slice".into()));
    }
    let mut values = Vec::with_capacity(m);
    for _ in 0..m {
        let x: Vec<f64> = (0..axes.len()).map(|_| rng.random::<f64>()).collect();
        let ((slice, _), _) = with_retries(&x, rng, |v| slice_polycycle(z, axes, v))?;
        values.push(fill(&slice)?);
    }
    Ok(sample_summary(&values))
}

fn integrate_plane_slices<R: Rng + ?Sized>(
    planes: &[AffineKPlane],
    axes: &[usize],
    m: usize,
    rng: &mut R,
) -> Result<(f64, f64), LabError> {
    let mut values = Vec::with_capacity(m);
    for _ in 0..m {
        let x: Vec<f64> = (0..axes.len()).map(|_| rng.random::<f64>()).collect();
        let ((slice, _), _) = with_retries(&x, rng, |v| slice_planes(planes, axes, v))?;
        values.push(fill(&slice)?);
    }
    Ok(sample_summary(&values))
}

/// Slice-integral estimates for every set of `k` coordinate axes, in
/// lexicographic order. Their sum bounds `FV(Z)` from above only up to an
/// unknown dimensional constant, so it is a proxy.
pub fn directional_slice_sums<R: Rng + ?Sized>(
    z: &PolyCycle,
    m: usize,
    rng: &mut R,
) -> Result<Vec<(Vec<usize>, f64, f64)>, LabError> {
    let mut out = Vec::new();
    for axes in combinations(z.n(), z.k()) {
        let (est, se) = integrate_slice_fv(z, &axes, m, rng)?;
        out.push((axes, est, se));
    }
    Ok(out)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn relay<T>(r: &Result<T, LabError>) -> Result<&T, LabError> {
    r.as_ref().map_err(|e| LabError::Solver(e.to_string()))
}

enum Source {
    Poly(PolyCycle),
    Planes(Vec<AffineKPlane>),
}

type Slice = (ZeroCycle, Vec<SliceAtom>);

/// Observable values of one trial, in config order. Composite observables
/// add a second entry (`_stderr`, `_error`).
fn trial_values(cfg: &ExperimentConfig, size: usize, stream: RngStream) -> Vec<(String, Result<f64, LabError>)> {
    let params = cfg.witness.params();
    let mut aux = aux_stream(stream).rng();
    let mut out: Vec<(String, Result<f64, LabError>)> = Vec::new();
    let mut put = |name: &str, v: Result<f64, LabError>| out.push((name.to_string(), v));
    let split = |r: Result<(f64, f64), LabError>| match r {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => (Err(LabError::Solver(e.to_string())), Err(e)),
    };

    match cfg.model {
        Model::Iid0cycle => {
            let z = sample_iid_zero_cycle(size, cfg.n, stream).map_err(LabError::from);
            for o in cfg.observables() {
                let v = relay(&z).and_then(|z| {
                    Ok(match o {
                        Observable::Fv => fill(z)?,
                        Observable::MassF0 => mass_f0(z)?,
                        _ => build_witness(z, &params)?.lower_bound(z)?,
                    })
                });
                put(o.name(), v);
            }
        }
        Model::Spheres => {
            let z = sphere_slice(cfg.n, cfg.k, size, stream, &mut aux);
            for o in cfg.observables() {
                put(o.name(), relay(&z).and_then(|z| Ok(fill(z)?)));
            }
        }
        Model::Jump | Model::Planes => {
            let axes = slice_axes(cfg.k);
            let values = cfg.slice_values();
            let source = match cfg.model {
                Model::Jump => sample_random_jump(size, cfg.n, stream).map(Source::Poly),
                _ => sample_cube_planes(size, cfg.n, cfg.k, stream).map(Source::Planes),
            }
            .map_err(LabError::from);
            let slice: Result<Slice, LabError> = relay(&source).and_then(|s| {
                let r = match s {
                    Source::Poly(z) => with_retries(&values, &mut aux, |v| slice_polycycle(z, &axes, v)),
                    Source::Planes(p) => with_retries(&values, &mut aux, |v| slice_planes(p, &axes, v)),
                };
                Ok(r?.0)
            });
            for o in cfg.observables() {
                match o {
                    Observable::SliceFv => put(o.name(), relay(&slice).and_then(|(z, _)| Ok(fill(z)?))),
                    Observable::WitnessBound => {
                        let v = relay(&slice).and_then(|(z, atoms)| {
                            if z.is_empty() {
                                return Ok(0.0);
                            }
                            let d = cfg.n - cfg.k;
                            Ok(match &source {
                                Ok(Source::Poly(p)) if p.provenance().is_some() => {
                                    knot_slice_lower_bound(atoms, p.provenance().unwrap(), d, &params)?
                                }
                                _ => build_witness(z, &params)?.lower_bound(z)?,
                            })
                        });
                        put(o.name(), v);
                    }
                    Observable::SliceIntegral => {
                        let r = relay(&source).and_then(|s| match s {
                            Source::Poly(z) => integrate_slice_fv(z, &axes, cfg.quadrature_m, &mut aux),
                            Source::Planes(p) => integrate_plane_slices(p, &axes, cfg.quadrature_m, &mut aux),
                        });
                        let (est, se) = split(r);
                        put("slice_integral", est);
                        put("slice_integral_stderr", se);
                    }
                    Observable::FvWinding => {
                        let r = relay(&source).and_then(|s| match s {
                            Source::Poly(z) => {
                                let f = fv_winding(z, cfg.winding_h)?;
                                Ok((f.value, f.error_bound))
                            }
                            Source::Planes(_) => Err(LabError::Config("winding needs a polygon".into())),
                        });
                        let (v, e) = split(r);
                        put("fv_winding", v);
                        put("fv_winding_error", e);
                    }
                    _ => put(o.name(), Err(LabError::Config(format!("{} unavailable", o.name())))),
                }
            }
        }
    }
    out
}

/// Slices `size` random great k-spheres of `S^n` by one random great
/// `(n−k)`-sphere, redrawing the latter on degeneracy.
pub fn sphere_slice<R: Rng + ?Sized>(
    n: usize,
    k: usize,
    size: usize,
    stream: RngStream,
    rng: &mut R,
) -> Result<ZeroCycle, LabError> {
    let spheres = sample_great_spheres(size, n, k, stream)?;
    let mut last = None;
    for _ in 0..=MAX_RETRIES {
        let v = sample_great_spheres(1, n, n - k, RngStream::new(rng.random(), rng.random()))?.remove(0);
        match slice_great_spheres(&spheres, &v) {
            Ok((z, _)) => return Ok(z),
            Err(e @ CoreError::DegenerateSlice(_)) => last = Some(e),
            Err(e) => return Err(e.into()),
        }
    }
    Err(last.map(LabError::from).unwrap_or_else(|| LabError::Solver("sphere slice retries exhausted".into())))
}

/// Worker count from [`WORKERS_ENV`], if set to a positive integer.
pub fn workers_from_env() -> Option<usize> {
    std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse().ok()).filter(|&w| w > 0)
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, LabError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers.or_else(workers_from_env) {
        b = b.num_threads(w);
    }
    b.build().map_err(|e| LabError::Config(format!("thread pool: {e}")))
}

/// Runs every `(N, trial)` pair of the grid and fits the per-`N` means.
/// Failed observables are recorded as `NaN` rows and logged.
pub fn run_scaling_experiment(cfg: &ExperimentConfig) -> Result<ScalingResult, LabError> {
    run_scaling_with_workers(cfg, None)
}

pub fn run_scaling_with_workers(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<ScalingResult, LabError> {
    cfg.validate()?;
    let tasks: Vec<(usize, usize)> =
        (0..cfg.n_grid.len()).flat_map(|i| (0..cfg.trials).map(move |t| (i, t))).collect();
    let run = |&(i, t): &(usize, usize)| -> Vec<Row> {
        let size = cfg.n_grid[i];
        let stream = RngStream::for_trial(cfg.master_seed, i as u32, t as u32);
        trial_values(cfg, size, stream)
            .into_iter()
            .map(|(observable, v)| {
                let value = v.unwrap_or_else(|e| {
                    log::warn!("{} N={size} trial={t} {observable}: {e}", cfg.model.name());
                    f64::NAN
                });
                Row {
                    model: cfg.model.name().into(),
                    n: cfg.n,
                    k: cfg.k,
                    size,
                    trial: t,
                    seed: stream.stream_id,
                    observable,
                    value,
                }
            })
            .collect()
    };
    let per_task: Vec<Vec<Row>> = pool(workers)?.install(|| tasks.par_iter().map(run).collect());
    let rows: Vec<Row> = per_task.into_iter().flatten().collect();
    let fits = fit_rows(&rows);
    Ok(ScalingResult { rows, fits })
}

/// Groups rows by `(model, n, k, observable)` and fits the per-`N` means.
pub fn fit_rows(rows: &[Row]) -> Vec<ObservableFit> {
    let mut groups: BTreeMap<(String, usize, usize, String), BTreeMap<usize, Vec<f64>>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.model.clone(), r.n, r.k, r.observable.clone()))
            .or_default()
            .entry(r.size)
            .or_default()
            .push(r.value);
    }
    groups
        .into_iter()
        .map(|((model, n, k, observable), by_n)| {
            let points: Vec<FitPoint> = by_n
                .into_iter()
                .map(|(size, vals)| {
                    let ok: Vec<f64> = vals.iter().copied().filter(|v| v.is_finite()).collect();
                    FitPoint {
                        size,
                        count: ok.len(),
                        failures: vals.len() - ok.len(),
                        mean: stats::mean(&ok),
                        stderr: stats::std_err(&ok),
                    }
                })
                .collect();
            let pairs: Vec<(f64, f64)> = points.iter().map(|p| (p.size as f64, p.mean)).collect();
            let power = fit_power_law(&pairs).ok();
            let sqrtlog = fit_sqrtlog(&pairs).ok();
            let notes = if model == Model::Spheres.name() { vec![SPHERE_NOTE.to_string()] } else { Vec::new() };
            ObservableFit { model, n, k, observable, points, power, sqrtlog, notes }
        })
        .collect()
}

/// Writes rows with the fixed header, floats at 17 significant digits.
pub fn write_rows<W: Write>(rows: &[Row], out: W) -> Result<(), LabError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.model.clone(),
            r.n.to_string(),
            r.k.to_string(),
            r.size.to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.observable.clone(),
            format!("{:.16e}", r.value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(input: R) -> Result<Vec<Row>, LabError> {
    let mut rd = csv::Reader::from_reader(input);
    let header: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(LabError::Config(format!("unexpected CSV header {header:?}")));
    }
    rd.deserialize().map(|r| r.map_err(LabError::from)).collect()
}

/// Spread of one observable at one `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    #[serde(rename = "N")]
    pub size: usize,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
    pub std_over_sqrt_n: f64,
    /// `P[|X − mean| ≥ rσ]` for `r = 1, 2, 3`.
    pub exceedance: [f64; 3],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub observable: String,
    pub rows: Vec<ConcentrationRow>,
    pub note: String,
}

pub fn concentration_row(size: usize, values: &[f64]) -> ConcentrationRow {
    let mean = stats::mean(values);
    let std = stats::std_dev(values);
    let exceed = |r: f64| {
        if std == 0.0 {
            return 0.0;
        }
        values.iter().filter(|v| (*v - mean).abs() >= r * std).count() as f64 / values.len() as f64
    };
    ConcentrationRow {
        size,
        trials: values.len(),
        mean,
        std,
        std_over_sqrt_n: std / (size as f64).sqrt(),
        exceedance: [exceed(1.0), exceed(2.0), exceed(3.0)],
    }
}

/// Mean, spread, and tail frequencies of the first configured observable.
pub fn run_concentration_experiment(cfg: &ExperimentConfig) -> Result<ConcentrationReport, LabError> {
    if cfg.trials < 200 {
        return Err(LabError::Config("concentration experiments need at least 200 trials".into()));
    }
    let primary = cfg.observables()[0];
    let run = run_scaling_experiment(&cfg.clone().with_observables(&[primary]))?;
    let rows = cfg
        .n_grid
        .iter()
        .map(|&size| {
            let vals: Vec<f64> =
                run.values(primary.name(), size).into_iter().filter(|v| v.is_finite()).collect();
            concentration_row(size, &vals)
        })
        .collect();
    Ok(ConcentrationReport { observable: primary.name().into(), rows, note: TAIL_NOTE.into() })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationReport {
    pub instances: usize,
    pub violations: usize,
    /// Largest `|FV(Z) − FV(Z′)| / distance moved`.
    pub max_ratio: f64,
}

/// Moves one point of an i.i.d. 0-cycle by each `eps` in a random
/// direction (clipped to the cube) and checks that the filling volume
/// changes by at most the distance moved.
pub fn perturbation_check(
    d: usize,
    size: usize,
    instances: usize,
    eps: &[f64],
    master_seed: u64,
) -> Result<PerturbationReport, LabError> {
    let results: Vec<Result<(usize, f64), LabError>> = pool(None)?.install(|| {
        (0..instances)
            .into_par_iter()
            .map(|i| {
                let stream = RngStream::for_trial(master_seed, 0, i as u32);
                let z = sample_iid_zero_cycle(size, d, stream)?;
                let base = fill(&z)?;
                let mut rng = aux_stream(stream).rng();
                let (mut bad, mut worst) = (0, 0.0f64);
                for &e in eps {
                    let idx = rng.random_range(0..size);
                    let dir = fillvol_core::models::haar_frame(d, 1, &mut rng).remove(0);
                    let mut pts = z.points().to_vec();
                    let old = pts[idx].pos.clone();
                    let new: Vec<f64> = old.iter().zip(&dir).map(|(x, u)| (x + e * u).clamp(0.0, 1.0)).collect();
                    let dist = old.iter().zip(&new).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                    pts[idx] = SignedPoint::new(new, pts[idx].sign);
                    let moved = fill(&ZeroCycle::new(Ambient::Cube(d), pts)?)?;
                    let change = (moved - base).abs();
                    if change > dist + PERTURBATION_TOL {
                        bad += 1;
                    }
                    if dist > 0.0 {
                        worst = worst.max(change / dist);
                    }
                }
                Ok((bad, worst))
            })
            .collect()
    });
    let mut report = PerturbationReport { instances, violations: 0, max_ratio: 0.0 };
    for r in results {
        let (bad, worst) = r?;
        report.violations += bad;
        report.max_ratio = report.max_ratio.max(worst);
    }
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub side: f64,
    /// Samples whose first slice point lands in `Q`.
    pub events: u64,
    /// `P[ζ′ ∈ ±Q | ζ ∈ Q]` for the adjacent segment.
    pub conditional: f64,
    pub conditional_ci: (f64, f64),
    /// Same for a vertex-disjoint segment.
    pub disjoint_conditional: f64,
    /// `P[ζ′ ∈ ±Q]` without conditioning.
    pub unconditional: f64,
    /// `conditional / √side`.
    pub constant: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationReport {
    pub samples: usize,
    pub rows: Vec<CorrelationRow>,
    pub exponent: Option<PowerFit>,
}

fn in_cube(p: &SignedPoint, center: &[f64], half: f64) -> bool {
    p.pos.iter().zip(center).all(|(x, c)| (x - c).abs() < half)
}

fn slice_of(a: &[f64], b: &[f64], c: f64) -> Option<SignedPoint> {
    // ties with the slice value have probability zero; count them as misses
    slice_segment(a, b, 0, c).ok().flatten()
}

/// Conditional hitting probabilities of slice points of adjacent segments
/// of a random-jump polygon, for cubes `Q` of decreasing side centered in
/// the slice plane. `cfg.trials` is the number of sampled segment triples.
pub fn run_correlation_test(cfg: &ExperimentConfig) -> Result<CorrelationReport, LabError> {
    if cfg.model != Model::Jump || cfg.n < 3 {
        return Err(LabError::Config("correlation tests need the jump model with n >= 3".into()));
    }
    let c = cfg.slice_at.as_ref().map_or(0.5, |v| v[0]);
    if !(0.25..=0.75).contains(&c) {
        return Err(LabError::Config("slice point must lie in [1/4, 3/4]".into()));
    }
    let n = cfg.n;
    let center = vec![0.5; n - 1];
    let chunks = 64usize;
    let per_chunk = cfg.trials.div_ceil(chunks);
    let counts: Vec<[[u64; 4]; 4]> = pool(None)?.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = RngStream::for_trial(cfg.master_seed, 0, chunk as u32).rng();
                // per side: events, adjacent hits, disjoint hits, unconditional hits
                let mut acc = [[0u64; 4]; 4];
                let todo = per_chunk.min(cfg.trials.saturating_sub(chunk * per_chunk));
                for _ in 0..todo {
                    let v: Vec<Vec<f64>> = (0..5).map(|_| uniform_point(n, &mut rng)).collect();
                    let zeta = slice_of(&v[0], &v[1], c);
                    let next = slice_of(&v[1], &v[2], c);
                    let far = slice_of(&v[3], &v[4], c);
                    for (s, &side) in CORRELATION_SIDES.iter().enumerate() {
                        let half = side / 2.0;
                        let hit = |p: &Option<SignedPoint>| p.as_ref().is_some_and(|p| in_cube(p, &center, half));
                        if hit(&next) {
                            acc[s][3] += 1;
                        }
                        if hit(&zeta) {
                            acc[s][0] += 1;
                            acc[s][1] += u64::from(hit(&next));
                            acc[s][2] += u64::from(hit(&far));
                        }
                    }
                }
                acc
            })
            .collect()
    });
    let mut total = [[0u64; 4]; 4];
    for a in counts {
        for s in 0..4 {
            for j in 0..4 {
                total[s][j] += a[s][j];
            }
        }
    }
    let rows: Vec<CorrelationRow> = CORRELATION_SIDES
        .iter()
        .zip(total)
        .map(|(&side, [events, adj, far, any])| {
            let ratio = |x: u64| if events == 0 { f64::NAN } else { x as f64 / events as f64 };
            let conditional = ratio(adj);
            CorrelationRow {
                side,
                events,
                conditional,
                conditional_ci: stats::wilson_interval(adj, events, 0.99),
                disjoint_conditional: ratio(far),
                unconditional: any as f64 / cfg.trials as f64,
                constant: conditional / side.sqrt(),
                flagged: events < MIN_EVENTS,
            }
        })
        .collect();
    let exponent = fit_power_law(&rows.iter().map(|r| (r.side, r.conditional)).collect::<Vec<_>>()).ok();
    Ok(CorrelationReport { samples: cfg.trials, rows, exponent })
}
