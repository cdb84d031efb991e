//! Experiment driver: seeded Monte Carlo runs of the three simulation
//! protocols (rate curves, sparse thresholding, graphical-model selection),
//! with CSV/JSON outputs and log-log slope analysis.
//!
//! Determinism contract: identical config and master seed produce
//! byte-identical CSV outputs regardless of the rayon pool in use. Per-trial
//! seeds are derived by hashing (master_seed, n, trial); results are
//! collected in index order and reduced sequentially.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimator::{
    default_m_prime, norms, reynolds_project_with, threshold, ThresholdRule,
};
use crate::gauss::{cycle_model, empirical_cov, random_invariant_spd, sample};
use crate::group::{edge_orbits, ordered_orbits, orbit_parameters, OrbitParameters};
use crate::io::GroupSpec;
use crate::linalg::Mat;
use crate::logdet::{
    edge_recovery_report, solve_logdet, LogDetProblem, SolveOptions,
};
use crate::seed::{self, tag};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Fig1Rates,
    Fig2Sparse,
    Fig3Selection,
    Custom,
}

impl ExperimentKind {
    fn name(&self) -> &'static str {
        match self {
            Self::Fig1Rates => "fig1_rates",
            Self::Fig2Sparse => "fig2_sparse",
            Self::Fig3Selection => "fig3_selection",
            Self::Custom => "custom",
        }
    }
}

fn default_schema() -> u32 {
    1
}
fn default_p() -> usize {
    50
}
fn default_master_seed() -> u64 {
    1
}
fn default_m1() -> f64 {
    2.5
}
fn default_min_eig() -> f64 {
    crate::gauss::DEFAULT_MIN_EIG
}

/// Experiment configuration (JSON schema version 1). Omitted fields take
/// experiment-specific defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default = "default_schema")]
    pub schema: u32,
    pub experiment: ExperimentKind,
    #[serde(default = "default_p")]
    pub p: usize,
    /// Group spec; defaults to the cyclic group on p indices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group: Option<GroupSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default = "default_master_seed")]
    pub master_seed: u64,
    /// Threshold constant; `None` selects the scale-aware default (twice the
    /// largest diagonal entry of the projected empirical covariance).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m_prime: Option<f64>,
    #[serde(default = "default_m1")]
    pub m1: f64,
    /// Nonzero fraction for sparse models (fig2 defaults to 0.2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sparsity: Option<f64>,
    #[serde(default = "default_min_eig")]
    pub min_eig: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            schema: 1,
            experiment,
            p: default_p(),
            group: None,
            n_grid: None,
            trials: None,
            master_seed: default_master_seed(),
            m_prime: None,
            m1: default_m1(),
            sparsity: None,
            min_eig: default_min_eig(),
            output_dir: None,
        }
    }

    pub fn resolved_group(&self) -> GroupSpec {
        self.group.clone().unwrap_or_else(|| GroupSpec::cyclic(self.p))
    }

    pub fn resolved_n_grid(&self) -> Vec<usize> {
        self.n_grid.clone().unwrap_or_else(|| match self.experiment {
            ExperimentKind::Fig3Selection => (0..=15).map(|k| 5 + 100 * k).collect(),
            _ => vec![10, 20, 40, 80, 160, 320, 640],
        })
    }

    pub fn resolved_trials(&self) -> usize {
        self.trials.unwrap_or(match self.experiment {
            ExperimentKind::Fig3Selection => 50,
            _ => 20,
        })
    }

    pub fn resolved_sparsity(&self) -> Option<f64> {
        match self.experiment {
            ExperimentKind::Fig2Sparse => Some(self.sparsity.unwrap_or(0.2)),
            _ => self.sparsity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != 1 {
            return Err(Error::Config(format!(
                "unsupported config schema {}, expected 1",
                self.schema
            )));
        }
        let grid = self.resolved_n_grid();
        if grid.is_empty() || grid[0] == 0 {
            return Err(Error::Config("n_grid must be nonempty with all n >= 1".into()));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("n_grid must be strictly increasing".into()));
        }
        if self.resolved_trials() == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        let group = self.resolved_group();
        if group.p != self.p {
            return Err(Error::Config(format!(
                "group acts on {} indices but p = {}",
                group.p, self.p
            )));
        }
        if self.m1 <= 0.0 {
            return Err(Error::Config("M_1 must be positive".into()));
        }
        Ok(())
    }

    /// Hash of the canonical config JSON (output directory excluded, so the
    /// hash identifies the experiment rather than where it was written).
    pub fn config_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = None;
        let json = serde_json::to_string(&canonical).expect("config serializes");
        hex_digest(json.as_bytes())
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// Git-blob-style content hash: sha256 over `blob <len>\0<content>`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(format!("blob {}\0", bytes.len()).as_bytes());
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// One Monte Carlo point: per-trial values with their mean and standard
/// error.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
    pub values: Vec<f64>,
}

impl CurvePoint {
    pub fn from_values(n: usize, values: Vec<f64>) -> Self {
        let t = values.len();
        let mean = values.iter().sum::<f64>() / t as f64;
        let stderr = if t > 1 {
            let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (t - 1) as f64;
            (var / t as f64).sqrt()
        } else {
            0.0
        };
        Self {
            n,
            mean,
            stderr,
            values,
        }
    }
}

/// A named curve: one metric, one method, one point per grid n.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub metric: String,
    pub method: String,
    pub points: Vec<CurvePoint>,
}

impl Curve {
    pub fn mean_at(&self, n: usize) -> Option<f64> {
        self.points.iter().find(|pt| pt.n == n).map(|pt| pt.mean)
    }
}

/// A solve that did not produce a usable solution; counted as a failure in
/// success-probability curves and kept for replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FailureRecord {
    pub n: usize,
    pub trial: usize,
    pub method: String,
    pub seed: u64,
    pub detail: String,
}

/// The in-memory result of one experiment run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub curves: Vec<Curve>,
    pub failures: Vec<FailureRecord>,
    /// Realized threshold constants per grid n (trial 0), when the
    /// scale-aware default is in effect.
    pub m_prime_realized: Vec<(usize, f64)>,
}

fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    seed::derive(&[master, tag::TRIAL, n as u64, trial as u64])
}

const RATE_METRICS: [&str; 3] = ["spectral", "frobenius", "linf"];

fn rate_errors(diff: &Mat) -> Result<[f64; 3]> {
    let r = norms(diff)?;
    Ok([r.spectral, r.frobenius, r.linf])
}

fn build_rate_curves(
    methods: [&str; 2],
    grid: &[usize],
    per_n: Vec<Vec<[f64; 6]>>,
) -> Vec<Curve> {
    let mut curves: Vec<Curve> = RATE_METRICS
        .iter()
        .flat_map(|metric| {
            methods.iter().map(move |method| Curve {
                metric: (*metric).into(),
                method: (*method).into(),
                points: vec![],
            })
        })
        .collect();
    for (gi, &n) in grid.iter().enumerate() {
        for (mi, _) in RATE_METRICS.iter().enumerate() {
            for side in 0..2 {
                let values: Vec<f64> = per_n[gi].iter().map(|row| row[2 * mi + side]).collect();
                curves[2 * mi + side].points.push(CurvePoint::from_values(n, values));
            }
        }
    }
    curves
}

/// Rate-curve experiment: one invariant model, then per (n, trial) the
/// estimation error of the plain empirical covariance against its projection
/// onto the fixed-point subspace, in spectral, Frobenius, and elementwise
/// l-infinity norms.
pub fn run_fig1(config: &ExperimentConfig) -> Result<RunSummary> {
    run_rates(config, None)
}

/// As [`run_fig1`] with the configured group and optional orbit-sparse model.
pub fn run_custom(config: &ExperimentConfig) -> Result<RunSummary> {
    run_rates(config, config.resolved_sparsity())
}

fn run_rates(config: &ExperimentConfig, sparsity: Option<f64>) -> Result<RunSummary> {
    config.validate()?;
    let group = config.resolved_group().to_group()?;
    let model = random_invariant_spd(&group, config.master_seed, config.min_eig, sparsity)?;
    let orbits = ordered_orbits(&group);
    let sigma = model.sigma();
    let grid = config.resolved_n_grid();
    let trials = config.resolved_trials();

    let mut per_n = Vec::with_capacity(grid.len());
    for &n in &grid {
        let rows: Vec<[f64; 6]> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<[f64; 6]> {
                let samples = sample(&model, n, trial_seed(config.master_seed, n, t))?;
                let emp = empirical_cov(&samples)?;
                let proj = reynolds_project_with(&emp, &orbits);
                let e = rate_errors(&(&emp - sigma))?;
                let p = rate_errors(&(&proj - sigma))?;
                Ok([e[0], p[0], e[1], p[1], e[2], p[2]])
            })
            .collect::<Result<Vec<_>>>()?;
        per_n.push(rows);
    }
    Ok(RunSummary {
        curves: build_rate_curves(["empirical", "projected"], &grid, per_n),
        failures: vec![],
        m_prime_realized: vec![],
    })
}

/// Sparse-covariance experiment: a sparse invariant model; per (n, trial)
/// the plain thresholded empirical covariance (level `M' sqrt(log p / n)`)
/// against projection followed by thresholding at the orbit-parameter level.
pub fn run_fig2(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let group = config.resolved_group().to_group()?;
    let sparsity = config.resolved_sparsity().unwrap_or(0.2);
    let model = random_invariant_spd(&group, config.master_seed, config.min_eig, Some(sparsity))?;
    let orbits = ordered_orbits(&group);
    let params = orbit_parameters(&edge_orbits(&group));
    let sigma = model.sigma();
    let p = group.p();
    let log_p = (p as f64).ln();
    let grid = config.resolved_n_grid();
    let trials = config.resolved_trials();

    let mut per_n = Vec::with_capacity(grid.len());
    let mut m_prime_realized = vec![];
    for &n in &grid {
        let rows: Vec<([f64; 6], f64)> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<([f64; 6], f64)> {
                let samples = sample(&model, n, trial_seed(config.master_seed, n, t))?;
                let emp = empirical_cov(&samples)?;
                let proj = reynolds_project_with(&emp, &orbits);
                let m_prime = config.m_prime.unwrap_or_else(|| default_m_prime(&proj));
                let t_oblivious = m_prime * (log_p / n as f64).sqrt();
                let t_symmetric = ThresholdRule::new(m_prime, &params, p, n)?.evaluate();
                let est_oblivious = threshold(&emp, t_oblivious)?;
                let est_symmetric = threshold(&proj, t_symmetric)?;
                let e = rate_errors(&(est_oblivious - sigma))?;
                let s = rate_errors(&(est_symmetric - sigma))?;
                Ok(([e[0], s[0], e[1], s[1], e[2], s[2]], m_prime))
            })
            .collect::<Result<Vec<_>>>()?;
        m_prime_realized.push((n, rows[0].1));
        per_n.push(rows.into_iter().map(|(row, _)| row).collect());
    }
    Ok(RunSummary {
        curves: build_rate_curves(["oblivious", "symmetric"], &grid, per_n),
        failures: vec![],
        m_prime_realized,
    })
}

/// Model-selection experiment on the cycle graphical model: per (n, trial),
/// exact edge recovery of the penalized log-det estimate from the plain
/// empirical covariance (penalty `M_1 sqrt(log p / n)`) against the
/// projected covariance (penalty `M_1 sqrt(log p / (n p))`). Nonconvergent
/// solves count as failures and are logged with their seed.
pub fn run_fig3(config: &ExperimentConfig) -> Result<RunSummary> {
    config.validate()?;
    let group_spec = config.resolved_group();
    if group_spec.kind != "cyclic" {
        return Err(Error::Config(
            "the selection experiment uses the cycle model; group must be cyclic".into(),
        ));
    }
    let p = config.p;
    let (model, theta_star) = cycle_model(p, -0.25)?;
    let group = model.group().clone();
    let orbits = ordered_orbits(&group);
    let log_p = (p as f64).ln();
    let grid = config.resolved_n_grid();
    let trials = config.resolved_trials();
    let opts = SolveOptions::default();

    let mut oblivious = Curve {
        metric: "success".into(),
        method: "oblivious".into(),
        points: vec![],
    };
    let mut symmetric = Curve {
        metric: "success".into(),
        method: "symmetric".into(),
        points: vec![],
    };
    let mut failures = vec![];
    for &n in &grid {
        let mu_oblivious = config.m1 * (log_p / n as f64).sqrt();
        let mu_symmetric = config.m1 * (log_p / (n as f64 * p as f64)).sqrt();
        let rows: Vec<(f64, f64, Vec<FailureRecord>)> = (0..trials)
            .into_par_iter()
            .map(|t| -> Result<(f64, f64, Vec<FailureRecord>)> {
                let s_seed = trial_seed(config.master_seed, n, t);
                let samples = sample(&model, n, s_seed)?;
                let emp = empirical_cov(&samples)?;
                let mut local_failures = vec![];
                let mut run = |s: Mat, mu: f64, method: &str| -> Result<f64> {
                    let outcome = LogDetProblem::new(s, mu, opts).and_then(|pb| solve_logdet(&pb));
                    match outcome {
                        Ok(sol) => {
                            let report = edge_recovery_report(&sol, &theta_star, None);
                            Ok(if report.exact_match { 1.0 } else { 0.0 })
                        }
                        Err(Error::NonConvergence { iterations, kkt_residual }) => {
                            local_failures.push(FailureRecord {
                                n,
                                trial: t,
                                method: method.into(),
                                seed: s_seed,
                                detail: format!(
                                    "nonconvergence after {iterations} iterations (kkt {kkt_residual:.3e})"
                                ),
                            });
                            Ok(0.0)
                        }
                        Err(Error::Numeric(detail)) => {
                            local_failures.push(FailureRecord {
                                n,
                                trial: t,
                                method: method.into(),
                                seed: s_seed,
                                detail,
                            });
                            Ok(0.0)
                        }
                        Err(other) => Err(other),
                    }
                };
                let obl = run(emp.clone(), mu_oblivious, "oblivious")?;
                let sym = run(
                    reynolds_project_with(&emp, &orbits),
                    mu_symmetric,
                    "symmetric",
                )?;
                Ok((obl, sym, local_failures))
            })
            .collect::<Result<Vec<_>>>()?;
        let obl_values: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let sym_values: Vec<f64> = rows.iter().map(|r| r.1).collect();
        for (_, _, f) in rows {
            failures.extend(f);
        }
        oblivious.points.push(CurvePoint::from_values(n, obl_values));
        symmetric.points.push(CurvePoint::from_values(n, sym_values));
    }
    Ok(RunSummary {
        curves: vec![oblivious, symmetric],
        failures,
        m_prime_realized: vec![],
    })
}

/// Dispatches on the config's experiment tag.
pub fn run_experiment(config: &ExperimentConfig) -> Result<RunSummary> {
    match config.experiment {
        ExperimentKind::Fig1Rates => run_fig1(config),
        ExperimentKind::Fig2Sparse => run_fig2(config),
        ExperimentKind::Fig3Selection => run_fig3(config),
        ExperimentKind::Custom => run_custom(config),
    }
}

/// Ordinary least squares of `ln(mean)` on `ln(n)`: returns
/// `(slope, intercept, r^2)`. Requires at least 4 points with positive
/// means.
pub fn slope_fit(points: &[(usize, f64)]) -> Result<(f64, f64, f64)> {
    if points.len() < 4 {
        return Err(Error::Config(format!(
            "slope fit requires >= 4 points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|&(_, m)| m <= 0.0) {
        return Err(Error::Config("slope fit requires positive means".into()));
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, m)| m.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xbar) * (y - ybar)).sum();
    if sxx == 0.0 {
        return Err(Error::Config("slope fit requires distinct n values".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - ybar) * (y - ybar)).sum();
    let r2 = if ss_tot == 0.0 {
        if ss_res < 1e-24 {
            1.0
        } else {
            0.0
        }
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok((slope, intercept, r2))
}

#[derive(Debug, Clone, Serialize)]
struct SlopeRecord {
    slope: f64,
    intercept: f64,
    r2: f64,
}

#[derive(Debug, Clone, Serialize)]
struct Sidecar<'a> {
    schema: u32,
    experiment: &'static str,
    master_seed: u64,
    config_hash: String,
    content_hash: String,
    constants: Constants<'a>,
}

#[derive(Debug, Clone, Serialize)]
struct Constants<'a> {
    m1: f64,
    m_prime: serde_json::Value,
    min_eig: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    sparsity: Option<f64>,
    kkt_tol: f64,
    edge_eps: f64,
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    m_prime_realized: &'a [(usize, f64)],
}

/// Writes `curves_<metric>.csv` files (columns `n,method,mean,stderr,
/// trial_0..`), one `.meta.json` sidecar per file, and `report.json` with
/// slopes, orbit parameters, failures, and the config echo. Returns the
/// paths written.
pub fn write_outputs(
    config: &ExperimentConfig,
    summary: &RunSummary,
    out_dir: impl AsRef<Path>,
) -> Result<Vec<PathBuf>> {
    let out_dir = out_dir.as_ref();
    fs::create_dir_all(out_dir)?;
    let config_hash = config.config_hash();
    let opts = SolveOptions::default();
    let mut written = vec![];

    let mut metrics: Vec<&str> = vec![];
    for curve in &summary.curves {
        if !metrics.contains(&curve.metric.as_str()) {
            metrics.push(&curve.metric);
        }
    }

    let mut content_hashes = BTreeMap::new();
    for metric in &metrics {
        let curves: Vec<&Curve> = summary
            .curves
            .iter()
            .filter(|c| c.metric == *metric)
            .collect();
        let trials = curves[0].points[0].values.len();
        let mut csv = String::from("n,method,mean,stderr");
        for t in 0..trials {
            csv.push_str(&format!(",trial_{t}"));
        }
        csv.push('\n');
        let grid: Vec<usize> = curves[0].points.iter().map(|pt| pt.n).collect();
        for &n in &grid {
            for curve in &curves {
                let pt = curve
                    .points
                    .iter()
                    .find(|pt| pt.n == n)
                    .ok_or_else(|| Error::Numeric(format!("curve missing point n={n}")))?;
                csv.push_str(&format!("{},{},{},{}", n, curve.method, pt.mean, pt.stderr));
                for v in &pt.values {
                    csv.push_str(&format!(",{v}"));
                }
                csv.push('\n');
            }
        }
        let path = out_dir.join(format!("curves_{metric}.csv"));
        fs::write(&path, &csv)?;
        let hash = content_hash(csv.as_bytes());
        content_hashes.insert(format!("curves_{metric}.csv"), hash.clone());

        let sidecar = Sidecar {
            schema: 1,
            experiment: config.experiment.name(),
            master_seed: config.master_seed,
            config_hash: config_hash.clone(),
            content_hash: hash,
            constants: Constants {
                m1: config.m1,
                m_prime: match config.m_prime {
                    Some(v) => serde_json::json!(v),
                    None => serde_json::json!("auto(2*max_diag)"),
                },
                min_eig: config.min_eig,
                sparsity: config.resolved_sparsity(),
                kkt_tol: opts.kkt_tol,
                edge_eps: opts.edge_eps,
                m_prime_realized: &summary.m_prime_realized,
            },
        };
        let meta_path = out_dir.join(format!("curves_{metric}.meta.json"));
        fs::write(&meta_path, serde_json::to_string_pretty(&sidecar)?)?;
        written.push(meta_path);
        written.push(path);
    }

    // Slopes for every curve with enough positive means.
    let mut slopes: BTreeMap<String, Option<SlopeRecord>> = BTreeMap::new();
    for curve in &summary.curves {
        let pts: Vec<(usize, f64)> = curve.points.iter().map(|pt| (pt.n, pt.mean)).collect();
        let fit = slope_fit(&pts).ok().map(|(slope, intercept, r2)| SlopeRecord {
            slope,
            intercept,
            r2,
        });
        slopes.insert(format!("{}/{}", curve.metric, curve.method), fit);
    }

    let group = config.resolved_group().to_group()?;
    let params: OrbitParameters = orbit_parameters(&edge_orbits(&group));
    let report = serde_json::json!({
        "schema": 1,
        "config": config,
        "config_hash": config_hash,
        "orbit_parameters": {
            "min_orbit_size": params.min_orbit_size,
            "min_size_to_degree": format!("{}/{}", params.min_size_to_degree.numer(), params.min_size_to_degree.denom()),
            "min_size_to_degree_f64": params.min_size_to_degree_f64(),
            "n_orbits": params.n_orbits,
        },
        "slopes": slopes,
        "failures": summary.failures,
        "content_hashes": content_hashes,
    });
    let report_path = out_dir.join("report.json");
    fs::write(&report_path, serde_json::to_string_pretty(&report)?)?;
    written.push(report_path);
    Ok(written)
}
