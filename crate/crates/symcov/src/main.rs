//! Thin command-line front end over the `symcov` library.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use symcov::error::{Error, Result};
use symcov::estimator::{
    least_squares_project, norms, reynolds_project, reynolds_project_oracle, sparse_cov_estimate,
    threshold,
};
use symcov::group::{edge_orbits, orbit_parameters, PermutationGroup};
use symcov::harness::{run_experiment, write_outputs, ExperimentConfig};
use symcov::io;
use symcov::linalg::Mat;
use symcov::logdet::{
    kkt_residual, solve_logdet, solve_logdet_symmetric, LogDetProblem, LogDetSolution,
    SolveOptions,
};

#[derive(Parser)]
#[command(name = "symcov", version, about = "Symmetry-aware covariance estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProjectMethod {
    /// Orbit averaging (fast path).
    Orbit,
    /// Explicit group-element sum (requires enumerable order).
    Sum,
    /// Constrained least squares over the commutation constraints.
    Lsq,
}

#[derive(Subcommand)]
enum Command {
    /// Project a matrix onto the fixed-point subspace of a group.
    Project {
        #[arg(long)]
        matrix: PathBuf,
        /// Group spec JSON file.
        #[arg(long)]
        group: PathBuf,
        #[arg(long, value_enum, default_value = "orbit")]
        method: ProjectMethod,
        #[arg(long, default_value = "projected.csv")]
        out: PathBuf,
    },
    /// Hard-threshold the entries of a matrix.
    Threshold {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        t: f64,
        #[arg(long, default_value = "thresholded.csv")]
        out: PathBuf,
    },
    /// Symmetry-plus-threshold sparse covariance estimate from samples.
    EstimateCov {
        /// Sample CSV, one draw per row.
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        group: PathBuf,
        /// Threshold constant M'.
        #[arg(long)]
        mprime: f64,
        #[arg(long, default_value = "estimate.csv")]
        out: PathBuf,
    },
    /// Solve the l1-penalized log-determinant program.
    Glasso {
        /// Input covariance CSV (with p=<int> header).
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        mu: f64,
        /// Group spec JSON; with --symmetric, the input is projected first.
        #[arg(long)]
        group: Option<PathBuf>,
        #[arg(long)]
        symmetric: bool,
        /// KKT tolerance.
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long, default_value = "theta.csv")]
        out: PathBuf,
        #[arg(long, default_value = "glasso_report.json")]
        report: PathBuf,
    },
    /// Run a Monte Carlo experiment from a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (overrides the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn load_group(path: &PathBuf) -> Result<PermutationGroup> {
    io::read_group_spec(path)?.to_group()
}

fn write_estimate_outputs(
    out: &PathBuf,
    estimate: &Mat,
    t: Option<f64>,
    group: Option<&PermutationGroup>,
) -> Result<()> {
    io::write_matrix_csv(out, estimate)?;
    let report = norms(estimate)?;
    let orbit = group.map(|g| {
        let params = orbit_parameters(&edge_orbits(g));
        json!({
            "min_orbit_size": params.min_orbit_size,
            "min_size_to_degree": format!("{}/{}", params.min_size_to_degree.numer(), params.min_size_to_degree.denom()),
            "n_orbits": params.n_orbits,
        })
    });
    let sidecar = json!({
        "t": t,
        "orbit_parameters": orbit,
        "norms": {
            "spectral": report.spectral,
            "frobenius": report.frobenius,
            "linf": report.linf,
            "op_inf": report.op_inf,
            "l1_off": report.l1_off,
        },
    });
    let meta = out.with_extension("meta.json");
    std::fs::write(meta, serde_json::to_string_pretty(&sidecar)?)?;
    Ok(())
}

fn glasso_report(path: &PathBuf, solution: &LogDetSolution) -> Result<()> {
    let edges: Vec<[usize; 2]> = solution.edges.iter().map(|&(i, j)| [i, j]).collect();
    let report = json!({
        "objective": solution.objective,
        "kkt_residual": solution.kkt_residual,
        "iterations": solution.iterations,
        "edges": edges,
    });
    std::fs::write(path, serde_json::to_string_pretty(&report)?)?;
    Ok(())
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Project {
            matrix,
            group,
            method,
            out,
        } => {
            let m = io::read_matrix_csv(&matrix)?;
            let g = load_group(&group)?;
            let projected = match method {
                ProjectMethod::Orbit => reynolds_project(&m, &g)?,
                ProjectMethod::Sum => reynolds_project_oracle(&m, &g)?,
                ProjectMethod::Lsq => least_squares_project(&m, &g)?,
            };
            write_estimate_outputs(&out, &projected, None, Some(&g))?;
            println!("wrote {}", out.display());
        }
        Command::Threshold { matrix, t, out } => {
            let m = io::read_matrix_csv(&matrix)?;
            let thresholded = threshold(&m, t)?;
            write_estimate_outputs(&out, &thresholded, Some(t), None)?;
            println!("wrote {}", out.display());
        }
        Command::EstimateCov {
            samples,
            group,
            mprime,
            out,
        } => {
            let sample_set = io::read_samples_csv(&samples)?;
            let g = load_group(&group)?;
            let (estimate, t) = sparse_cov_estimate(&sample_set, &g, mprime)?;
            write_estimate_outputs(&out, &estimate, Some(t), Some(&g))?;
            println!("wrote {} (t = {t})", out.display());
        }
        Command::Glasso {
            input,
            mu,
            group,
            symmetric,
            tol,
            max_iters,
            out,
            report,
        } => {
            let s = io::read_matrix_csv(&input)?;
            let mut opts = SolveOptions::default();
            if let Some(t) = tol {
                opts.kkt_tol = t;
            }
            if let Some(m) = max_iters {
                opts.max_iters = m;
            }
            // With --symmetric the program solved is the one on the
            // projected input; the recheck must use the same matrix.
            let (solved, effective_s) = if symmetric {
                let path = group.ok_or_else(|| Error::Config("--symmetric requires --group".into()))?;
                let g = load_group(&path)?;
                let projected = reynolds_project(&s, &g)?;
                (solve_logdet_symmetric(&s, &g, mu, opts), projected)
            } else {
                (solve_logdet(&LogDetProblem::new(s.clone(), mu, opts)?), s)
            };
            match solved {
                Ok(solution) => {
                    io::write_matrix_csv(&out, &solution.theta)?;
                    glasso_report(&report, &solution)?;
                    // Re-verify with the independent checker before reporting success.
                    let recheck = kkt_residual(&effective_s, &solution.theta, mu, opts.edge_eps);
                    println!(
                        "wrote {} ({} iterations, kkt {:.3e}, recheck {:.3e})",
                        out.display(),
                        solution.iterations,
                        solution.kkt_residual,
                        recheck.unwrap_or(f64::NAN)
                    );
                }
                Err(Error::NonConvergence {
                    iterations,
                    kkt_residual,
                }) => {
                    eprintln!(
                        "did not converge after {iterations} iterations (kkt {kkt_residual:.3e})"
                    );
                    return Ok(ExitCode::from(2));
                }
                Err(other) => return Err(other),
            }
        }
        Command::Experiment {
            config,
            seed,
            out,
            threads,
        } => {
            if let Some(t) = threads {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(t)
                    .build_global()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            }
            let text = std::fs::read_to_string(&config)?;
            let mut cfg: ExperimentConfig = serde_json::from_str(&text)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            cfg.validate()?;
            let out_dir = out
                .or_else(|| cfg.output_dir.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("out"));
            let summary = run_experiment(&cfg)?;
            let written = write_outputs(&cfg, &summary, &out_dir)?;
            for path in written {
                println!("wrote {}", path.display());
            }
            if !summary.failures.is_empty() {
                eprintln!("{} solve(s) failed; see report.json", summary.failures.len());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
