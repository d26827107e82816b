//! Monte Carlo evaluation: simulate, project, estimate, aggregate.
//!
//! Replicate `i` of cell `c` draws from `seed.derive(c).derive(i)`, so cells
//! are independent and raising the replicate count keeps earlier replicates
//! unchanged. Replicates run on a rayon pool; results are reduced in
//! replicate order, so the worker count never changes a report.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::{estimate_h, estimate_projection, EstimateResult, MIN_STEPS};
use crate::filters::DiscreteFilter;
use crate::projection::{project_axis, Direction};
use crate::spectral::{AnisotropicIndex, SpectralModel};
use crate::synthesis::{FbmGenerator, GridField2D, SampledPath, Seed, SraSynthesizer};
use crate::theory::TheoryCache;

/// Largest failed-replicate fraction tolerated in one cell.
pub const MAX_FAILURE_RATE: f64 = 0.01;

/// Index pairs `(h_h, h_v)` of the anisotropic evaluation grid.
pub const SRA_PAIRS: [(f64, f64); 6] = [(0.7, 0.7), (0.5, 0.5), (0.2, 0.2), (0.7, 0.5), (0.7, 0.2), (0.5, 0.2)];

#[derive(Clone, Debug, PartialEq)]
pub struct FieldExperiment {
    pub models: Vec<AnisotropicIndex>,
    pub grid_size: usize,
    pub nus: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathExperiment {
    pub hursts: Vec<f64>,
    pub steps: Vec<usize>,
    pub filter: DiscreteFilter<f64>,
    pub u: usize,
    pub v: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Experiment {
    Fields(FieldExperiment),
    Paths(PathExperiment),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub reps: usize,
    pub seed: Seed,
    /// Worker threads; `None` uses rayon's global pool.
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    /// The six index pairs on a `512` grid at `nu = 0..=3`.
    pub fn sra_table(reps: usize, seed: Seed) -> Self {
        let models = SRA_PAIRS.iter().map(|&(h, v)| AnisotropicIndex::axis_pair(h, v).expect("valid pair")).collect();
        Self {
            experiment: Experiment::Fields(FieldExperiment { models, grid_size: 512, nus: vec![0, 1, 2, 3] }),
            reps,
            seed,
            workers: None,
            out: None,
        }
    }

    /// Exact fBm paths, second differences at dilations `(2, 1)`.
    pub fn exact_paths(hursts: Vec<f64>, steps: Vec<usize>, reps: usize, seed: Seed) -> Self {
        Self {
            experiment: Experiment::Paths(PathExperiment {
                hursts,
                steps,
                filter: DiscreteFilter::second_difference(),
                u: 2,
                v: 1,
            }),
            reps,
            seed,
            workers: None,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 2 {
            return Err(Error::InvalidParameter("at least two replicates are needed".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::InvalidParameter("worker count must be positive".into()));
        }
        match &self.experiment {
            Experiment::Fields(f) => {
                if f.grid_size < 8 || !f.grid_size.is_power_of_two() {
                    return Err(Error::InvalidParameter(format!(
                        "grid size {} is not a power of two >= 8",
                        f.grid_size
                    )));
                }
                for &nu in &f.nus {
                    if nu >= usize::BITS || f.grid_size >> nu < MIN_STEPS {
                        return Err(Error::GridTooCoarse { grid: f.grid_size, nu });
                    }
                }
            }
            Experiment::Paths(p) => {
                if p.u == p.v {
                    return Err(Error::EqualDilations);
                }
                for &h in &p.hursts {
                    if !(h > 0.0 && h < 1.0) {
                        return Err(Error::InvalidParameter(format!("Hurst index {h} outside (0, 1)")));
                    }
                }
                for &n in &p.steps {
                    if n < p.filter.span() * p.u.max(p.v) + 1 {
                        return Err(Error::InvalidParameter(format!("{n} steps too few for the filter")));
                    }
                }
            }
        }
        Ok(())
    }

    fn run_pool<R: Send>(&self, job: impl FnOnce() -> R + Send) -> Result<R> {
        match self.workers {
            None => Ok(job()),
            Some(n) => {
                let pool = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build()
                    .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
                Ok(pool.install(job))
            }
        }
    }
}

/// One row per `(h_h, h_v, nu)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldRow {
    pub h_h: f64,
    pub h_v: f64,
    pub nu: u32,
    pub b_h: f64,
    pub sigma_h: f64,
    pub b_v: f64,
    pub sigma_v: f64,
    /// `b_h - b_v`.
    pub b_hv: f64,
    /// Standard deviation of `h_h_hat - h_v_hat`.
    pub sigma_hv: f64,
    pub replicates: usize,
    pub failed: usize,
}

/// One row per `(H, N)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PathRow {
    pub hurst: f64,
    pub steps: usize,
    pub bias: f64,
    pub sigma: f64,
    /// `N Var(H_hat)`.
    pub n_var: f64,
    /// Asymptotic `N Var(H_hat)`, when the filter order allows it.
    pub gamma: Option<f64>,
    /// `mean(V_u) / mean(V_v)`, which tends to `(u/v)^{2H}`.
    pub variation_ratio: f64,
    pub replicates: usize,
    pub failed: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ReportRows {
    Fields(Vec<FieldRow>),
    Paths(Vec<PathRow>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub rows: ReportRows,
    pub reps: usize,
    pub seed: Seed,
    /// Wall time; not part of the emitted table.
    pub runtime: Duration,
}

/// Mean and `(n - 1)`-divisor standard deviation.
pub fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn check_failures(failed: usize, total: usize) -> Result<()> {
    if failed as f64 > MAX_FAILURE_RATE * total as f64 {
        Err(Error::TooManyFailures { failed, total })
    } else {
        Ok(())
    }
}

/// Horizontal and vertical estimates at each `nu` for one field.
pub fn field_estimates(field: &GridField2D<f64>, nus: &[u32]) -> Result<Vec<(EstimateResult, EstimateResult)>> {
    let ph = project_axis(field, Direction::Horizontal);
    let pv = project_axis(field, Direction::Vertical);
    nus.iter().map(|&nu| Ok((estimate_projection(&ph, nu)?, estimate_projection(&pv, nu)?))).collect()
}

pub fn run_eval_2d(config: &ExperimentConfig) -> Result<EvalReport> {
    config.validate()?;
    let Experiment::Fields(exp) = &config.experiment else {
        return Err(Error::InvalidParameter("run_eval_2d needs a field experiment".into()));
    };
    let start = Instant::now();
    let mut rows = Vec::with_capacity(exp.models.len() * exp.nus.len());
    for (cell, index) in exp.models.iter().enumerate() {
        let synth = SraSynthesizer::<f64>::new(&SpectralModel::planar(*index), exp.grid_size)?;
        let cell_seed = config.seed.derive(cell as u64);
        let results: Vec<Result<Vec<(f64, f64)>>> = config.run_pool(|| {
            (0..config.reps as u64)
                .into_par_iter()
                .map(|i| {
                    let field = synth.synthesize(cell_seed.derive(i));
                    Ok(field_estimates(&field, &exp.nus)?.into_iter().map(|(h, v)| (h.value, v.value)).collect())
                })
                .collect()
        })?;
        let ok: Vec<Vec<(f64, f64)>> = results.into_iter().filter_map(|r| r.ok()).collect();
        let failed = config.reps - ok.len();
        check_failures(failed, config.reps)?;
        let (h_h, h_v) = index.axes();
        for (j, &nu) in exp.nus.iter().enumerate() {
            let hs: Vec<f64> = ok.iter().map(|r| r[j].0).collect();
            let vs: Vec<f64> = ok.iter().map(|r| r[j].1).collect();
            let ds: Vec<f64> = ok.iter().map(|r| r[j].0 - r[j].1).collect();
            let (mh, sh) = mean_sd(&hs);
            let (mv, sv) = mean_sd(&vs);
            let (_, sd) = mean_sd(&ds);
            let (b_h, b_v) = (mh - h_h, mv - h_v);
            rows.push(FieldRow {
                h_h,
                h_v,
                nu,
                b_h,
                sigma_h: sh,
                b_v,
                sigma_v: sv,
                b_hv: b_h - b_v,
                sigma_hv: sd,
                replicates: ok.len(),
                failed,
            });
        }
    }
    Ok(EvalReport { rows: ReportRows::Fields(rows), reps: config.reps, seed: config.seed, runtime: start.elapsed() })
}

pub fn run_eval_1d(config: &ExperimentConfig) -> Result<EvalReport> {
    run_eval_1d_with_cache(config, &TheoryCache::new())
}

pub fn run_eval_1d_with_cache(config: &ExperimentConfig, cache: &TheoryCache) -> Result<EvalReport> {
    config.validate()?;
    let Experiment::Paths(exp) = &config.experiment else {
        return Err(Error::InvalidParameter("run_eval_1d needs a path experiment".into()));
    };
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut cell = 0u64;
    for &hurst in &exp.hursts {
        // the CLT constant exists only for K > H + 1/4
        let gamma = if exp.filter.order() as f64 > hurst + 0.25 {
            Some(cache.get(&exp.filter, exp.u, exp.v, hurst)?.gamma)
        } else {
            None
        };
        for &steps in &exp.steps {
            let gen = FbmGenerator::<f64>::new(hurst, steps)?;
            let cell_seed = config.seed.derive(cell);
            cell += 1;
            let results: Vec<Result<EstimateResult>> = config.run_pool(|| {
                (0..config.reps as u64)
                    .into_par_iter()
                    .map(|i| estimate_h(&gen.sample(cell_seed.derive(i)), &exp.filter, exp.u, exp.v))
                    .collect()
            })?;
            let ok: Vec<EstimateResult> = results.into_iter().filter_map(|r| r.ok()).collect();
            let failed = config.reps - ok.len();
            check_failures(failed, config.reps)?;
            let values: Vec<f64> = ok.iter().map(|e| e.value).collect();
            let (mean, sd) = mean_sd(&values);
            let mean_u = ok.iter().map(|e| e.v_u).sum::<f64>() / ok.len() as f64;
            let mean_v = ok.iter().map(|e| e.v_v).sum::<f64>() / ok.len() as f64;
            rows.push(PathRow {
                hurst,
                steps,
                bias: mean - hurst,
                sigma: sd,
                n_var: steps as f64 * sd * sd,
                gamma,
                variation_ratio: mean_u / mean_v,
                replicates: ok.len(),
                failed,
            });
        }
    }
    Ok(EvalReport { rows: ReportRows::Paths(rows), reps: config.reps, seed: config.seed, runtime: start.elapsed() })
}

pub fn run_eval(config: &ExperimentConfig) -> Result<EvalReport> {
    match config.experiment {
        Experiment::Fields(_) => run_eval_2d(config),
        Experiment::Paths(_) => run_eval_1d(config),
    }
}

const FIELD_HEADER: [&str; 11] =
    ["h_h", "h_v", "nu", "b_h", "sigma_h", "b_v", "sigma_v", "b_hv", "sigma_hv", "replicates", "failed"];
const PATH_HEADER: [&str; 9] =
    ["hurst", "steps", "bias", "sigma", "n_var", "gamma", "variation_ratio", "replicates", "failed"];

/// Report as CSV, rows in cell order then `nu` (or `N`) ascending.
pub fn emit_table<W: Write>(report: &EvalReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    match &report.rows {
        ReportRows::Fields(rows) => {
            w.write_record(FIELD_HEADER)?;
            let mut sorted: Vec<&FieldRow> = rows.iter().collect();
            // stable: keeps cell order, orders nu inside a cell
            sorted.sort_by_key(|r| (cell_position(rows, r), r.nu));
            for r in sorted {
                w.write_record([
                    r.h_h.to_string(),
                    r.h_v.to_string(),
                    r.nu.to_string(),
                    r.b_h.to_string(),
                    r.sigma_h.to_string(),
                    r.b_v.to_string(),
                    r.sigma_v.to_string(),
                    r.b_hv.to_string(),
                    r.sigma_hv.to_string(),
                    r.replicates.to_string(),
                    r.failed.to_string(),
                ])?;
            }
        }
        ReportRows::Paths(rows) => {
            w.write_record(PATH_HEADER)?;
            for r in rows {
                w.write_record([
                    r.hurst.to_string(),
                    r.steps.to_string(),
                    r.bias.to_string(),
                    r.sigma.to_string(),
                    r.n_var.to_string(),
                    r.gamma.map(|g| g.to_string()).unwrap_or_default(),
                    r.variation_ratio.to_string(),
                    r.replicates.to_string(),
                    r.failed.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn cell_position(rows: &[FieldRow], row: &FieldRow) -> usize {
    rows.iter().position(|r| r.h_h == row.h_h && r.h_v == row.h_v).unwrap_or(0)
}

pub fn emit_table_to_path(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    emit_table(report, std::fs::File::create(path)?)
}

/// One estimate from the `estimate` command.
#[derive(Clone, Debug, PartialEq)]
pub struct EstimateRow {
    pub seed: u64,
    pub h_true: Option<f64>,
    pub direction: Option<Direction>,
    pub nu: Option<u32>,
    pub estimate: f64,
    /// Variation at the smaller dilation.
    pub v1: f64,
    /// Variation at the larger dilation.
    pub v2: f64,
}

impl EstimateRow {
    pub fn from_estimate(seed: u64, h_true: Option<f64>, e: &EstimateResult) -> Self {
        let (v1, v2) = if e.u > e.v { (e.v_v, e.v_u) } else { (e.v_u, e.v_v) };
        Self { seed, h_true, direction: e.direction, nu: e.nu, estimate: e.value, v1, v2 }
    }
}

/// Estimates for a field at every `nu`, both axes.
pub fn field_estimate_rows(field: &GridField2D<f64>, nus: &[u32]) -> Result<Vec<EstimateRow>> {
    let mut rows = Vec::new();
    for (h, v) in field_estimates(field, nus)? {
        let truth = field.truth;
        rows.push(EstimateRow::from_estimate(field.seed, truth.map(|t| t.0), &h));
        rows.push(EstimateRow::from_estimate(field.seed, truth.map(|t| t.1), &v));
    }
    Ok(rows)
}

pub fn path_estimate_row(
    path: &SampledPath<f64>,
    filter: &DiscreteFilter<f64>,
    u: usize,
    v: usize,
    seed: u64,
) -> Result<EstimateRow> {
    Ok(EstimateRow::from_estimate(seed, path.hurst, &estimate_h(path, filter, u, v)?))
}

pub fn write_estimate_rows<W: Write>(rows: &[EstimateRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "h_true", "direction", "nu", "estimate", "v1", "v2"])?;
    for r in rows {
        w.write_record([
            r.seed.to_string(),
            r.h_true.map(|h| h.to_string()).unwrap_or_default(),
            r.direction.map(|d| d.to_string()).unwrap_or_default(),
            r.nu.map(|n| n.to_string()).unwrap_or_default(),
            r.estimate.to_string(),
            r.v1.to_string(),
            r.v2.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value.split(',').map(|s| s.trim().parse::<T>().map_err(|e| Error::Parse(format!("{key}: {s:?}: {e}")))).collect()
}

fn parse_one<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| Error::Parse(format!("{key}: {value:?}: {e}")))
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    /// Flat `key = value` text; `#` starts a comment. `index` may repeat, one
    /// cell per line. Keys: `mode` (`fields`/`paths`), `index`, `grid`, `nu`,
    /// `hurst`, `steps`, `filter`, `u`, `v`, `reps`, `seed`, `workers`, `out`.
    fn from_str(text: &str) -> Result<Self> {
        let mut mode: Option<String> = None;
        let mut models = Vec::new();
        let mut grid = 512usize;
        let mut nus = vec![0u32, 1, 2, 3];
        let mut hursts: Vec<f64> = Vec::new();
        let mut steps = vec![4096usize];
        let mut filter = DiscreteFilter::<f64>::second_difference();
        let (mut u, mut v) = (2usize, 1usize);
        let mut reps = 1000usize;
        let mut seed = 0u64;
        let mut workers = None;
        let mut out = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "mode" => mode = Some(value.to_string()),
                "index" => models.push(value.parse::<AnisotropicIndex>()?),
                "grid" => grid = parse_one(key, value)?,
                "nu" => nus = parse_list(key, value)?,
                "hurst" => hursts = parse_list(key, value)?,
                "steps" => steps = parse_list(key, value)?,
                "filter" => filter = value.parse()?,
                "u" => u = parse_one(key, value)?,
                "v" => v = parse_one(key, value)?,
                "reps" => reps = parse_one(key, value)?,
                "seed" => seed = parse_one(key, value)?,
                "workers" => workers = Some(parse_one(key, value)?),
                "out" => out = Some(PathBuf::from(value)),
                other => return Err(Error::Parse(format!("line {}: unknown key {other:?}", lineno + 1))),
            }
        }
        let mode = mode.unwrap_or_else(|| if hursts.is_empty() { "fields" } else { "paths" }.to_string());
        let experiment = match mode.as_str() {
            "fields" => {
                if models.is_empty() {
                    return Err(Error::Parse("field experiment needs at least one index".into()));
                }
                Experiment::Fields(FieldExperiment { models, grid_size: grid, nus })
            }
            "paths" => {
                if hursts.is_empty() {
                    return Err(Error::Parse("path experiment needs hurst values".into()));
                }
                Experiment::Paths(PathExperiment { hursts, steps, filter, u, v })
            }
            other => return Err(Error::Parse(format!("unknown mode {other:?}"))),
        };
        let config = ExperimentConfig { experiment, reps, seed: Seed(seed), workers, out };
        config.validate()?;
        Ok(config)
    }
}
