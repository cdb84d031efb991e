//! The l1-off-diagonal-penalized log-determinant program, its symmetry-aware
//! variant, and model-selection diagnostics (edge recovery, degree,
//! incoherence, curvature constants).
//!
//! The solver is alternating-direction operator splitting: an
//! eigendecomposition proximal step for the smooth `Tr(S Theta) - log det`
//! part and entrywise soft-thresholding for the off-diagonal l1 part, with
//! adaptive penalty rebalancing. Convergence is certified by an independent
//! KKT checker, never by the iteration count alone.

use std::collections::BTreeSet;

use crate::basis::{blockwise_matrix_function, SymmetryBasis};
use crate::error::{Error, Result};
use crate::estimator::reynolds_project;
use crate::group::{edge_orbits, orbit_parameters, PermutationGroup};
use crate::linalg::{
    is_square, is_symmetric, max_abs, soft_threshold_off_diagonal, spd_inverse, spd_log_det,
    symmetric_part, Mat,
};

/// Dimension cap for the dense incoherence diagnostics.
pub const DIAGNOSTICS_MAX_P: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub primal_tol: f64,
    pub dual_tol: f64,
    pub kkt_tol: f64,
    pub max_iters: usize,
    /// Entries of the solution with magnitude above this level are reported
    /// as edges.
    pub edge_eps: f64,
    /// Initial splitting penalty.
    pub rho0: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            primal_tol: 1e-7,
            dual_tol: 1e-7,
            kkt_tol: 1e-6,
            max_iters: 5000,
            edge_eps: 1e-6,
            rho0: 1.0,
        }
    }
}

/// A penalized log-det instance: input matrix `S` (empirical or
/// group-averaged covariance), penalty `mu`, and solver tolerances.
#[derive(Debug, Clone)]
pub struct LogDetProblem {
    s: Mat,
    mu: f64,
    opts: SolveOptions,
}

impl LogDetProblem {
    pub fn new(s: Mat, mu: f64, opts: SolveOptions) -> Result<Self> {
        if !is_square(&s) {
            return Err(Error::Dimension("input matrix must be square".into()));
        }
        if !is_symmetric(&s, 1e-10) {
            return Err(Error::Validation("input matrix must be symmetric".into()));
        }
        if mu < 0.0 {
            return Err(Error::Config(format!("penalty must be >= 0, got {mu}")));
        }
        if s.diagonal().iter().any(|&d| d <= 0.0) {
            return Err(Error::Validation(
                "input matrix must have strictly positive diagonal".into(),
            ));
        }
        Ok(Self { s, mu, opts })
    }

    pub fn s(&self) -> &Mat {
        &self.s
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn opts(&self) -> &SolveOptions {
        &self.opts
    }
}

/// A solution to the penalized log-det program.
#[derive(Debug, Clone)]
pub struct LogDetSolution {
    /// The estimated concentration matrix (positive definite).
    pub theta: Mat,
    /// Off-diagonal support: unordered pairs with `|theta_ij| > edge_eps`.
    pub edges: BTreeSet<(usize, usize)>,
    pub iterations: usize,
    pub kkt_residual: f64,
    pub objective: f64,
}

/// How the solver performs its eigendecomposition proximal step.
#[derive(Clone, Copy)]
pub enum EigEngine<'a> {
    Dense,
    /// Blockwise eigendecompositions through a symmetry-adapted basis;
    /// requires the input (and hence every iterate) to be invariant.
    Blockwise(&'a SymmetryBasis),
}

fn spd_prox(w: &Mat, rho: f64, engine: &EigEngine) -> Result<Mat> {
    let f = move |l: f64| (l + (l * l + 4.0 * rho).sqrt()) / (2.0 * rho);
    match engine {
        EigEngine::Dense => {
            let eig = symmetric_part(w).symmetric_eigen();
            let p = w.nrows();
            let d = Mat::from_fn(p, p, |a, b| if a == b { f(eig.eigenvalues[a]) } else { 0.0 });
            Ok(&eig.eigenvectors * d * eig.eigenvectors.transpose())
        }
        EigEngine::Blockwise(basis) => blockwise_matrix_function(w, basis, f),
    }
}

/// The penalized objective `Tr(S Theta) - log det Theta + mu ||Theta||_1,off`.
pub fn objective(s: &Mat, theta: &Mat, mu: f64) -> Result<f64> {
    let trace = s.dot(theta);
    let l1_off: f64 = (0..theta.nrows())
        .flat_map(|i| (0..theta.ncols()).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .map(|(i, j)| theta[(i, j)].abs())
        .sum();
    Ok(trace - spd_log_det(theta)? + mu * l1_off)
}

/// Independent stationarity check. With `W = Theta^{-1}`, the residual is
/// the largest violation of: `|S_ii - W_ii|` on the diagonal,
/// `|S_ij - W_ij + mu sign(Theta_ij)|` on active off-diagonals, and
/// `max(0, |S_ij - W_ij| - mu)` on zero off-diagonals. Entries with
/// magnitude at most `zero_eps` count as zero.
pub fn kkt_residual(s: &Mat, theta: &Mat, mu: f64, zero_eps: f64) -> Result<f64> {
    if s.shape() != theta.shape() {
        return Err(Error::Dimension("S and Theta must have the same shape".into()));
    }
    let w = spd_inverse(theta)?;
    let p = s.nrows();
    let mut res = 0.0f64;
    for i in 0..p {
        for j in 0..p {
            let grad = s[(i, j)] - w[(i, j)];
            let v = if i == j {
                grad.abs()
            } else if theta[(i, j)].abs() > zero_eps {
                (grad + mu * theta[(i, j)].signum()).abs()
            } else {
                (grad.abs() - mu).max(0.0)
            };
            res = res.max(v);
        }
    }
    Ok(res)
}

fn extract_edges(theta: &Mat, edge_eps: f64) -> BTreeSet<(usize, usize)> {
    let mut edges = BTreeSet::new();
    for i in 0..theta.nrows() {
        for j in (i + 1)..theta.ncols() {
            if theta[(i, j)].abs() > edge_eps {
                edges.insert((i, j));
            }
        }
    }
    edges
}

/// Solves the penalized log-det program with the dense eigendecomposition
/// path.
pub fn solve_logdet(problem: &LogDetProblem) -> Result<LogDetSolution> {
    solve_logdet_with(problem, EigEngine::Dense)
}

/// Solves with an explicit eigendecomposition engine. Returns a
/// nonconvergence error carrying the last KKT residual when `max_iters` is
/// exhausted.
pub fn solve_logdet_with(problem: &LogDetProblem, engine: EigEngine) -> Result<LogDetSolution> {
    solve_inner(problem, engine, None)
}

/// As [`solve_logdet_with`], also recording the objective value of each
/// outer iterate.
pub fn solve_logdet_traced(
    problem: &LogDetProblem,
    engine: EigEngine,
) -> Result<(LogDetSolution, Vec<f64>)> {
    let mut trace = Vec::new();
    let sol = solve_inner(problem, engine, Some(&mut trace))?;
    Ok((sol, trace))
}

fn solve_inner(
    problem: &LogDetProblem,
    engine: EigEngine,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<LogDetSolution> {
    let s = &problem.s;
    let mu = problem.mu;
    let o = &problem.opts;
    let p = s.nrows();
    let mut rho = o.rho0;
    let mut theta = Mat::from_fn(p, p, |i, j| if i == j { 1.0 / s[(i, i)] } else { 0.0 });
    let mut z = theta.clone();
    let mut u = Mat::zeros(p, p);
    let mut last_kkt = f64::INFINITY;
    // Residual targets shrink whenever a KKT check fails, so the expensive
    // certificate only runs on plausible candidates.
    let mut tighten = 1.0f64;

    for iter in 1..=o.max_iters {
        let w = (&z - &u) * rho - s;
        theta = spd_prox(&w, rho, &engine)?;
        let z_prev = std::mem::replace(&mut z, &theta + &u);
        soft_threshold_off_diagonal(&mut z, mu / rho);
        u += &theta - &z;

        let primal = (&theta - &z).norm();
        let dual = ((&z - &z_prev) * rho).norm();
        if !primal.is_finite() || !dual.is_finite() {
            return Err(Error::Numeric(format!(
                "splitting iterate diverged at iteration {iter}"
            )));
        }
        if let Some(t) = trace.as_deref_mut() {
            t.push(objective(s, &theta, mu)?);
        }

        let eps_pri = tighten * o.primal_tol * theta.norm().max(z.norm()).max(1.0);
        let eps_dual = tighten * o.dual_tol * (u.norm() * rho).max(1.0);
        // The KKT certificate is the convergence gate; the residual test only
        // schedules it. A slow-crawling iterate can pass the certificate long
        // before the residual thresholds fire, hence the periodic check.
        if (primal <= eps_pri && dual <= eps_dual) || iter % 250 == 0 {
            if let Some(sol) = certify(s, mu, o, &theta, &z, iter, &mut last_kkt)? {
                return Ok(sol);
            }
            if primal <= eps_pri && dual <= eps_dual {
                tighten *= 0.25;
            }
        }

        if iter % 2 == 0 {
            if primal > 10.0 * dual {
                rho *= 2.0;
                u /= 2.0;
            } else if dual > 10.0 * primal {
                rho /= 2.0;
                u *= 2.0;
            }
        }
    }
    Err(Error::NonConvergence {
        iterations: o.max_iters,
        kkt_residual: last_kkt,
    })
}

/// Runs the independent KKT checker on the sparse iterate (exact zeros), and
/// on the smooth iterate as a fallback when the sparse one is not positive
/// definite.
fn certify(
    s: &Mat,
    mu: f64,
    o: &SolveOptions,
    theta: &Mat,
    z: &Mat,
    iter: usize,
    last_kkt: &mut f64,
) -> Result<Option<LogDetSolution>> {
    for (candidate, zero_eps) in [(z, 0.0), (theta, o.edge_eps)] {
        if candidate.clone().cholesky().is_none() {
            continue;
        }
        let kkt = kkt_residual(s, candidate, mu, zero_eps)?;
        *last_kkt = last_kkt.min(kkt);
        if kkt <= o.kkt_tol {
            return Ok(Some(LogDetSolution {
                theta: candidate.clone(),
                edges: extract_edges(candidate, o.edge_eps),
                iterations: iter,
                kkt_residual: kkt,
                objective: objective(s, candidate, mu)?,
            }));
        }
    }
    Ok(None)
}

/// Solves the symmetry-aware program: projects the input onto the
/// fixed-point subspace, solves the ordinary program on the projection, and
/// asserts the solution is itself invariant (within `10 * kkt_tol`).
pub fn solve_logdet_symmetric(
    s: &Mat,
    group: &PermutationGroup,
    mu: f64,
    opts: SolveOptions,
) -> Result<LogDetSolution> {
    let projected = reynolds_project(s, group)?;
    let problem = LogDetProblem::new(projected, mu, opts)?;
    let solution = solve_logdet(&problem)?;
    let drift = max_abs(&(&solution.theta - reynolds_project(&solution.theta, group)?));
    if drift > 10.0 * opts.kkt_tol {
        return Err(Error::Numeric(format!(
            "solution left the fixed-point subspace (drift {drift:.3e}); solver asymmetry"
        )));
    }
    Ok(solution)
}

/// The penalty schedule: with a group,
/// `M_1 * max( sqrt(log p / (n O)), log p / (n O_d) )` from the orbit
/// parameters; without one, the symmetry-oblivious `M_1 * sqrt(log p / n)`.
/// Natural logs throughout.
pub fn regularizer_schedule(
    p: usize,
    n: usize,
    group: Option<&PermutationGroup>,
    m1: f64,
) -> Result<f64> {
    if p < 2 || n == 0 || m1 <= 0.0 {
        return Err(Error::Config(
            "regularizer schedule requires p >= 2, n >= 1, M_1 > 0".into(),
        ));
    }
    let log_p = (p as f64).ln();
    Ok(match group {
        None => m1 * (log_p / n as f64).sqrt(),
        Some(g) => {
            let params = orbit_parameters(&edge_orbits(g));
            let o = params.min_orbit_size as f64;
            let od = params.min_size_to_degree_f64();
            m1 * (log_p / (n as f64 * o)).sqrt().max(log_p / (n as f64 * od))
        }
    })
}

/// Incoherence and curvature diagnostics of a ground-truth concentration
/// matrix: graph degree, the incoherence of `Gamma = Sigma (x) Sigma`
/// restricted to the support, and the operator-infinity constants.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDiagnostics {
    /// Max row count of nonzeros of the concentration matrix (diagonal
    /// included).
    pub degree: usize,
    /// `1 - max_{e in S^c} ||Gamma_eS (Gamma_SS)^{-1}||_1`.
    pub alpha: f64,
    /// `||Sigma||_{inf,inf}`.
    pub kappa_sigma: f64,
    /// `||(Gamma_SS)^{-1}||_{inf,inf}`.
    pub kappa_gamma: f64,
}

fn row_abs_sum_max(m: &Mat) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}

/// Computes [`ModelDiagnostics`] for a true concentration matrix. The
/// Kronecker factor `Gamma = Sigma (x) Sigma` is only materialized on the
/// support rows/columns, so the cost is `O(p^2 |S|^2)` rather than `p^4`.
pub fn diagnostics(theta_star: &Mat) -> Result<ModelDiagnostics> {
    let p = theta_star.nrows();
    if !is_square(theta_star) {
        return Err(Error::Dimension("concentration matrix must be square".into()));
    }
    if p > DIAGNOSTICS_MAX_P {
        return Err(Error::Capacity(format!(
            "diagnostics limited to p <= {DIAGNOSTICS_MAX_P}, got {p}"
        )));
    }
    let support_eps = 1e-12;
    let sigma = spd_inverse(theta_star)?;
    let degree = (0..p)
        .map(|i| (0..p).filter(|&j| theta_star[(i, j)].abs() > support_eps).count())
        .max()
        .unwrap_or(0);

    // Ordered support pairs (diagonal included).
    let mut support = vec![];
    let mut complement = vec![];
    for i in 0..p {
        for j in 0..p {
            if theta_star[(i, j)].abs() > support_eps {
                support.push((i, j));
            } else {
                complement.push((i, j));
            }
        }
    }
    let ns = support.len();
    let gamma_ss = Mat::from_fn(ns, ns, |a, b| {
        let (i, j) = support[a];
        let (k, l) = support[b];
        sigma[(i, k)] * sigma[(j, l)]
    });
    let inv_ss = gamma_ss
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Numeric("Gamma_SS is singular".into()))?;
    let kappa_gamma = row_abs_sum_max(&inv_ss);

    let mut worst = 0.0f64;
    let mut row = Mat::zeros(1, ns);
    for &(i, j) in &complement {
        for (b, &(k, l)) in support.iter().enumerate() {
            row[(0, b)] = sigma[(i, k)] * sigma[(j, l)];
        }
        let x = &row * &inv_ss;
        worst = worst.max(x.iter().map(|v| v.abs()).sum());
    }
    Ok(ModelDiagnostics {
        degree,
        alpha: 1.0 - worst,
        kappa_sigma: row_abs_sum_max(&sigma),
        kappa_gamma,
    })
}

/// Comparison of a recovered edge set against the true off-diagonal support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RecoveryReport {
    pub exact_match: bool,
    pub missed: BTreeSet<(usize, usize)>,
    pub spurious: BTreeSet<(usize, usize)>,
}

/// Compares `solution.edges` against the support of the true concentration
/// matrix; `support_eps` defaults to exact-nonzero detection at 1e-12.
pub fn edge_recovery_report(
    solution: &LogDetSolution,
    theta_star: &Mat,
    support_eps: Option<f64>,
) -> RecoveryReport {
    let eps = support_eps.unwrap_or(1e-12);
    let truth = extract_edges(theta_star, eps);
    let missed: BTreeSet<_> = truth.difference(&solution.edges).copied().collect();
    let spurious: BTreeSet<_> = solution.edges.difference(&truth).copied().collect();
    RecoveryReport {
        exact_match: missed.is_empty() && spurious.is_empty(),
        missed,
        spurious,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::gauss::{random_symmetric_matrix, sample};
    use crate::group::PermutationGroup;

    fn random_spd(p: usize, seed: u64) -> Mat {
        // Well conditioned: eigenvalues in [1, 2].
        let m = random_symmetric_matrix(p, seed);
        let eig = m.symmetric_eigen();
        let lo = eig.eigenvalues.min();
        let hi = eig.eigenvalues.max();
        let d = Mat::from_fn(p, p, |a, b| {
            if a == b {
                1.0 + (eig.eigenvalues[a] - lo) / (hi - lo)
            } else {
                0.0
            }
        });
        &eig.eigenvectors * d * eig.eigenvectors.transpose()
    }

    #[test]
    fn identity_input_zero_penalty() {
        let problem = LogDetProblem::new(Mat::identity(4, 4), 0.0, SolveOptions::default()).unwrap();
        let sol = solve_logdet(&problem).unwrap();
        assert!(max_abs(&(&sol.theta - Mat::identity(4, 4))) < 1e-6);
        assert!(sol.edges.is_empty());
    }

    #[test]
    fn mu_zero_recovers_inverse() {
        for p in [5usize, 12] {
            let s = random_spd(p, 100 + p as u64);
            let problem = LogDetProblem::new(s.clone(), 0.0, SolveOptions::default()).unwrap();
            let sol = solve_logdet(&problem).unwrap();
            let want = spd_inverse(&s).unwrap();
            assert!(max_abs(&(&sol.theta - want)) < 1e-6, "p={p}");
        }
    }

    #[test]
    fn large_penalty_gives_diagonal_solution() {
        let s = Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        for mu in [0.5, 0.7] {
            let problem = LogDetProblem::new(s.clone(), mu, SolveOptions::default()).unwrap();
            let sol = solve_logdet(&problem).unwrap();
            assert!(max_abs(&(&sol.theta - Mat::identity(2, 2))) < 1e-5, "mu={mu}");
            assert!(sol.edges.is_empty());
        }
    }

    /// Pattern-search oracle over symmetric 2x2 PD matrices: coarse grid,
    /// then repeated local refinement down to 1e-6 steps.
    fn grid_oracle_2x2(s: &Mat, mu: f64) -> Mat {
        let obj = |a: f64, b: f64, c: f64| -> f64 {
            let det = a * c - b * b;
            if a <= 1e-9 || c <= 1e-9 || det <= 1e-12 {
                return f64::INFINITY;
            }
            s[(0, 0)] * a + s[(1, 1)] * c + 2.0 * s[(0, 1)] * b - det.ln() + 2.0 * mu * b.abs()
        };
        let (mut a, mut b, mut c) = (1.0, 0.0, 1.0);
        let mut best = obj(a, b, c);
        let mut step = 0.5;
        while step > 1e-7 {
            let mut moved = false;
            for da in -2i32..=2 {
                for db in -2i32..=2 {
                    for dc in -2i32..=2 {
                        let (na, nb, nc) = (
                            a + da as f64 * step,
                            b + db as f64 * step,
                            c + dc as f64 * step,
                        );
                        let v = obj(na, nb, nc);
                        if v < best - 1e-15 {
                            best = v;
                            a = na;
                            b = nb;
                            c = nc;
                            moved = true;
                        }
                    }
                }
            }
            if !moved {
                step *= 0.5;
            }
        }
        Mat::from_row_slice(2, 2, &[a, b, b, c])
    }

    #[test]
    fn two_by_two_matches_grid_oracle() {
        let s = Mat::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        let mu = 0.1;
        let problem = LogDetProblem::new(s.clone(), mu, SolveOptions::default()).unwrap();
        let sol = solve_logdet(&problem).unwrap();
        let oracle = grid_oracle_2x2(&s, mu);
        assert!(max_abs(&(&sol.theta - oracle)) < 1e-3);
    }

    #[test]
    fn kkt_checker_flags_non_optimal_points() {
        let s = Mat::from_row_slice(2, 2, &[1.0, 0.3, 0.3, 1.0]);
        let wrong = Mat::identity(2, 2);
        // At theta = I: W = I, so the off-diagonal violation is |0.3| - mu.
        let res = kkt_residual(&s, &wrong, 0.1, 0.0).unwrap();
        assert!((res - 0.2).abs() < 1e-12);
    }

    #[test]
    fn solutions_pass_independent_kkt_checker() {
        for seed in [1u64, 2, 3] {
            let s = random_spd(8, seed);
            let problem = LogDetProblem::new(s.clone(), 0.15, SolveOptions::default()).unwrap();
            let sol = solve_logdet(&problem).unwrap();
            let res = kkt_residual(&s, &sol.theta, 0.15, 0.0).unwrap();
            assert!(res <= 1e-6, "seed={seed} res={res:.3e}");
        }
    }

    #[test]
    fn symmetric_path_trivial_group_matches_plain_solver() {
        let g = PermutationGroup::trivial(5).unwrap();
        let s = random_spd(5, 7);
        let sol_plain =
            solve_logdet(&LogDetProblem::new(s.clone(), 0.1, SolveOptions::default()).unwrap())
                .unwrap();
        let sol_sym = solve_logdet_symmetric(&s, &g, 0.1, SolveOptions::default()).unwrap();
        assert!(max_abs(&(&sol_plain.theta - &sol_sym.theta)) < 1e-9);
    }

    #[test]
    fn symmetric_path_returns_circulant_solution() {
        let g = PermutationGroup::cyclic(6).unwrap();
        let model = crate::gauss::random_invariant_spd(&g, 3, 0.3, None).unwrap();
        let samples = sample(&model, 40, 11).unwrap();
        let s = crate::gauss::empirical_cov(&samples).unwrap();
        let sol = solve_logdet_symmetric(&s, &g, 0.1, SolveOptions::default()).unwrap();
        let drift = max_abs(&(&sol.theta - reynolds_project(&sol.theta, &g).unwrap()));
        assert!(drift <= 1e-5);
    }

    #[test]
    fn blockwise_and_dense_paths_agree() {
        let g = PermutationGroup::cyclic(8).unwrap();
        let basis = build_basis(&g).unwrap();
        let model = crate::gauss::random_invariant_spd(&g, 5, 0.3, None).unwrap();
        let samples = sample(&model, 60, 13).unwrap();
        let s = reynolds_project(&crate::gauss::empirical_cov(&samples).unwrap(), &g).unwrap();
        let opts = SolveOptions {
            kkt_tol: 1e-9,
            ..SolveOptions::default()
        };
        let problem = LogDetProblem::new(s, 0.1, opts).unwrap();
        let dense = solve_logdet_with(&problem, EigEngine::Dense).unwrap();
        let block = solve_logdet_with(&problem, EigEngine::Blockwise(&basis)).unwrap();
        assert!(max_abs(&(&dense.theta - &block.theta)) < 1e-8);
    }

    #[test]
    fn schedule_examples() {
        // No group, M_1 = 1, p = e^2 (approximated by exp(2).round()), n = 4.
        let p = (std::f64::consts::E * std::f64::consts::E).round() as usize; // 7
        let mu = regularizer_schedule(p, 4, None, 1.0).unwrap();
        assert!((mu - ((p as f64).ln() / 4.0).sqrt()).abs() < 1e-15);

        // Cyclic at odd p, large n: the sqrt branch dominates and the ratio
        // to the oblivious schedule is exactly 1/sqrt(p).
        let g = PermutationGroup::cyclic(5).unwrap();
        let sym = regularizer_schedule(5, 100, Some(&g), 1.0).unwrap();
        let obl = regularizer_schedule(5, 100, None, 1.0).unwrap();
        assert!((sym - obl / 5.0f64.sqrt()).abs() < 1e-15);

        // Trivial group: both schedules coincide once the sqrt branch
        // dominates (log p <= n).
        let t = PermutationGroup::trivial(6).unwrap();
        let a = regularizer_schedule(6, 50, Some(&t), 2.0).unwrap();
        let b = regularizer_schedule(6, 50, None, 2.0).unwrap();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn diagnostics_identity() {
        let d = diagnostics(&Mat::identity(4, 4)).unwrap();
        assert_eq!(d.degree, 1);
        assert!((d.alpha - 1.0).abs() < 1e-12);
        assert!((d.kappa_sigma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_diagonal_model() {
        let theta = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let d = diagnostics(&theta).unwrap();
        assert_eq!(d.degree, 1);
        assert!((d.kappa_sigma - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_matches_dense_kronecker_oracle() {
        let p = 10;
        let (_, theta) = crate::gauss::cycle_model(p, -0.25).unwrap();
        let d = diagnostics(&theta).unwrap();
        // Dense oracle: build the full p^2 x p^2 Kronecker product.
        let sigma = spd_inverse(&theta).unwrap();
        let n2 = p * p;
        let gamma = Mat::from_fn(n2, n2, |r, c| {
            let (i, j) = (r / p, r % p);
            let (k, l) = (c / p, c % p);
            sigma[(i, k)] * sigma[(j, l)]
        });
        let mut support = vec![];
        let mut complement = vec![];
        for i in 0..p {
            for j in 0..p {
                if theta[(i, j)].abs() > 1e-12 {
                    support.push(i * p + j);
                } else {
                    complement.push(i * p + j);
                }
            }
        }
        let ns = support.len();
        let gss = Mat::from_fn(ns, ns, |a, b| gamma[(support[a], support[b])]);
        let inv = gss.lu().try_inverse().unwrap();
        let mut worst = 0.0f64;
        for &e in &complement {
            let row = Mat::from_fn(1, ns, |_, b| gamma[(e, support[b])]);
            let x = &row * &inv;
            worst = worst.max(x.iter().map(|v| v.abs()).sum());
        }
        assert!((d.alpha - (1.0 - worst)).abs() < 1e-10);
        assert_eq!(d.degree, 3);
        assert!(d.alpha > 0.0 && d.alpha <= 1.0);
    }

    #[test]
    fn diagnostics_cycle_regression_value() {
        // Frozen on first run after the dense-oracle cross-check at p=10;
        // the cycle model satisfies the incoherence condition comfortably.
        let (_, theta) = crate::gauss::cycle_model(50, -0.25).unwrap();
        let d = diagnostics(&theta).unwrap();
        assert!(d.alpha > 0.0 && d.alpha <= 1.0);
        assert!((d.alpha - 0.392304845413263).abs() < 1e-9);
        assert_eq!(d.degree, 3);
        assert!((d.kappa_sigma - 2.0).abs() < 1e-9);
        assert!((d.kappa_gamma - 2.049038105676661).abs() < 1e-9);
    }

    #[test]
    fn symmetric_path_on_invariant_input_matches_plain_solver() {
        let g = PermutationGroup::cyclic(7).unwrap();
        let model = crate::gauss::random_invariant_spd(&g, 19, 0.3, None).unwrap();
        let samples = sample(&model, 60, 23).unwrap();
        let s = reynolds_project(&crate::gauss::empirical_cov(&samples).unwrap(), &g).unwrap();
        let plain =
            solve_logdet(&LogDetProblem::new(s.clone(), 0.1, SolveOptions::default()).unwrap())
                .unwrap();
        let symmetric = solve_logdet_symmetric(&s, &g, 0.1, SolveOptions::default()).unwrap();
        assert!(max_abs(&(&plain.theta - &symmetric.theta)) < 1e-9);
        assert_eq!(plain.edges, symmetric.edges);
    }

    #[test]
    fn diagnostics_rejects_oversize_input() {
        let theta = Mat::identity(129, 129);
        assert!(matches!(diagnostics(&theta), Err(Error::Capacity(_))));
    }

    #[test]
    fn recovery_report_set_comparisons() {
        let mut theta_star = Mat::identity(3, 3);
        theta_star[(0, 1)] = -0.2;
        theta_star[(1, 0)] = -0.2;
        theta_star[(1, 2)] = -0.2;
        theta_star[(2, 1)] = -0.2;
        let sol = LogDetSolution {
            theta: Mat::identity(3, 3),
            edges: BTreeSet::from([(0, 1)]),
            iterations: 1,
            kkt_residual: 0.0,
            objective: 0.0,
        };
        let report = edge_recovery_report(&sol, &theta_star, None);
        assert!(!report.exact_match);
        assert_eq!(report.missed, BTreeSet::from([(1, 2)]));
        assert!(report.spurious.is_empty());
    }

    #[test]
    fn recovery_exact_for_strong_penalty_on_identity_model() {
        let g = PermutationGroup::trivial(4).unwrap();
        let model =
            crate::gauss::CovarianceModel::new(Mat::identity(4, 4), g, "identity").unwrap();
        let samples = sample(&model, 200, 21).unwrap();
        let s = crate::gauss::empirical_cov(&samples).unwrap();
        let sol =
            solve_logdet(&LogDetProblem::new(s, 0.8, SolveOptions::default()).unwrap()).unwrap();
        let report = edge_recovery_report(&sol, &Mat::identity(4, 4), None);
        assert!(report.exact_match);
    }

    #[test]
    fn edge_set_size_non_increasing_in_penalty() {
        // Support nesting along the penalty path is typical but not a
        // theorem; these two instances have monotone exact paths (verified
        // at kkt 1e-9), so count inversions here would indicate a solver
        // accuracy regression.
        for seed in [41u64, 43] {
            let s = {
                let g = PermutationGroup::trivial(10).unwrap();
                let model = crate::gauss::random_invariant_spd(&g, seed, 0.5, None).unwrap();
                let samples = sample(&model, 60, seed + 100).unwrap();
                crate::gauss::empirical_cov(&samples).unwrap()
            };
            let opts = SolveOptions {
                kkt_tol: 1e-8,
                ..SolveOptions::default()
            };
            let mut last = usize::MAX;
            for k in 0..8 {
                let mu = 0.02 * 2.0f64.powi(k);
                let sol = solve_logdet(&LogDetProblem::new(s.clone(), mu, opts).unwrap()).unwrap();
                assert!(sol.edges.len() <= last, "seed={seed} mu={mu}");
                last = sol.edges.len();
            }
        }
    }

    #[test]
    fn objective_non_increasing_on_well_conditioned_instances() {
        // Splitting methods are not descent methods in general (rank-deficient
        // inputs do oscillate); on well-conditioned instances the objective
        // trace must be non-increasing to 1e-10 slack.
        for (p, mu, seed) in [(10usize, 0.1, 1u64), (20, 0.2, 2), (10, 0.0, 4)] {
            let g = PermutationGroup::trivial(p).unwrap();
            let model = crate::gauss::random_invariant_spd(&g, seed, 0.5, None).unwrap();
            let samples = sample(&model, 3 * p, seed + 9).unwrap();
            let s = crate::gauss::empirical_cov(&samples).unwrap();
            let (_, trace) = solve_logdet_traced(
                &LogDetProblem::new(s, mu, SolveOptions::default()).unwrap(),
                EigEngine::Dense,
            )
            .unwrap();
            for w in trace.windows(2) {
                assert!(w[1] <= w[0] + 1e-10, "objective increased: {} -> {}", w[0], w[1]);
            }
        }
    }

    #[test]
    fn invalid_problems_rejected() {
        let asym = Mat::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(LogDetProblem::new(asym, 0.1, SolveOptions::default()).is_err());
        let zero_diag = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(LogDetProblem::new(zero_diag, 0.1, SolveOptions::default()).is_err());
        let ok = Mat::identity(2, 2);
        assert!(LogDetProblem::new(ok, -0.1, SolveOptions::default()).is_err());
    }

    #[test]
    fn nonconvergence_carries_residual() {
        let s = random_spd(6, 9);
        let opts = SolveOptions {
            max_iters: 3,
            ..SolveOptions::default()
        };
        match solve_logdet(&LogDetProblem::new(s, 0.1, opts).unwrap()) {
            Err(Error::NonConvergence { iterations, .. }) => assert_eq!(iterations, 3),
            other => panic!("expected nonconvergence, got {other:?}"),
        }
    }
}
