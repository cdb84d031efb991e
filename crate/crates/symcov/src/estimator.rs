//! Fixed-point-subspace projection (orbit averaging plus two independent
//! cross-check routes), matrix norms, entrywise thresholding, and the
//! symmetry-plus-threshold sparse covariance estimator.

use nalgebra::SVD;
use num_rational::Ratio;

use crate::error::{Error, Result};
use crate::gauss::SampleSet;
use crate::group::{
    edge_orbits, ordered_orbits, orbit_parameters, OrbitParameters, OrderedOrbitPartition,
    PermutationGroup,
};
use crate::linalg::{is_square, is_symmetric, max_abs, symmetric_part, Mat};

fn check_dims(m: &Mat, group: &PermutationGroup) -> Result<()> {
    if !is_square(m) || m.nrows() != group.p() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, group acts on {} indices",
            m.nrows(),
            m.ncols(),
            group.p()
        )));
    }
    Ok(())
}

/// Projects `m` onto the fixed-point subspace of `group` by replacing each
/// entry with the mean of `m` over the ordered-pair orbit of its index pair.
///
/// Non-symmetric inputs are allowed; the result of projecting a symmetric
/// matrix is symmetric.
pub fn reynolds_project(m: &Mat, group: &PermutationGroup) -> Result<Mat> {
    check_dims(m, group)?;
    Ok(reynolds_project_with(m, &ordered_orbits(group)))
}

/// Orbit-averaging projection against a precomputed ordered-orbit partition.
pub fn reynolds_project_with(m: &Mat, orbits: &OrderedOrbitPartition) -> Mat {
    let p = orbits.p();
    debug_assert_eq!(m.nrows(), p);
    let mut out = Mat::zeros(p, p);
    for members in orbits.all_members() {
        let mean: f64 =
            members.iter().map(|&f| m[(f / p, f % p)]).sum::<f64>() / members.len() as f64;
        for &f in members {
            out[(f / p, f % p)] = mean;
        }
    }
    out
}

/// Literal group-average projection: `(1/|G|) sum_g Pi_g M Pi_g^T` over the
/// full element enumeration. Test oracle for [`reynolds_project`].
pub fn reynolds_project_oracle(m: &Mat, group: &PermutationGroup) -> Result<Mat> {
    check_dims(m, group)?;
    let elements = group.elements()?;
    let p = group.p();
    let mut out = Mat::zeros(p, p);
    for g in &elements {
        for i in 0..p {
            for j in 0..p {
                out[(g.apply(i), g.apply(j))] += m[(i, j)];
            }
        }
    }
    Ok(out / elements.len() as f64)
}

/// Projection as the constrained least squares problem: minimize
/// `||X - M||_F^2` subject to `Pi_g X = X Pi_g` for every generator.
///
/// Solved by an explicit null-space computation over the vectorized
/// commutation constraints, independent of the orbit-average path. Cost is
/// an SVD of a `(gens * p^2) x p^2` system, so this route is for
/// cross-validation at desk scale rather than production projection.
pub fn least_squares_project(m: &Mat, group: &PermutationGroup) -> Result<Mat> {
    check_dims(m, group)?;
    if !is_symmetric(m, 1e-12) {
        return Err(Error::Dimension("least-squares projection expects a symmetric matrix".into()));
    }
    let p = group.p();
    let n = p * p;
    // Constraint rows: X_{g(i),g(j)} - X_{i,j} = 0 for each generator and pair.
    let mut rows: Vec<Vec<(usize, f64)>> = vec![];
    for g in group.generators() {
        for i in 0..p {
            for j in 0..p {
                let from = i * p + j;
                let to = g.apply(i) * p + g.apply(j);
                if from != to {
                    rows.push(vec![(to, 1.0), (from, -1.0)]);
                }
            }
        }
    }
    let x = Mat::from_fn(n, 1, |k, _| m[(k / p, k % p)]);
    if rows.is_empty() {
        return Ok(m.clone());
    }
    let mut c = Mat::zeros(rows.len(), n);
    for (r, entries) in rows.iter().enumerate() {
        for &(col, v) in entries {
            c[(r, col)] = v;
        }
    }
    let svd = SVD::new(c, false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numeric("SVD failed to produce right singular vectors".into()))?;
    let sigma_max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tol = sigma_max * (rows.len().max(n) as f64) * f64::EPSILON;
    // Remove the row-space component: x_proj = x - sum_{sigma_i > tol} v_i (v_i^T x).
    let mut proj = x.clone();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > tol {
            let v_row = v_t.row(k).transpose();
            let coeff = v_row.dot(&x);
            proj -= v_row * coeff;
        }
    }
    Ok(Mat::from_fn(p, p, |i, j| proj[(i * p + j, 0)]))
}

/// The matrix norms used throughout: spectral, Frobenius, elementwise
/// l-infinity, operator infinity, and off-diagonal l1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormReport {
    pub spectral: f64,
    pub frobenius: f64,
    pub linf: f64,
    pub op_inf: f64,
    pub l1_off: f64,
}

/// Computes all norms of a square matrix. The spectral norm uses a symmetric
/// eigendecomposition when the input is symmetric and singular values
/// otherwise.
pub fn norms(m: &Mat) -> Result<NormReport> {
    if !is_square(m) {
        return Err(Error::Dimension("norms expects a square matrix".into()));
    }
    let spectral = if is_symmetric(m, 1e-12) {
        symmetric_part(m)
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs()))
    } else {
        SVD::new(m.clone(), false, false)
            .singular_values
            .iter()
            .cloned()
            .fold(0.0f64, f64::max)
    };
    let op_inf = (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let l1_off: f64 = (0..m.nrows())
        .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
        .filter(|&(i, j)| i != j)
        .map(|(i, j)| m[(i, j)].abs())
        .sum();
    Ok(NormReport {
        spectral,
        frobenius: m.norm(),
        linf: max_abs(m),
        op_inf,
        l1_off,
    })
}

/// Entrywise hard thresholding: keeps entries with `|m_ij| >= s` (ties kept),
/// zeroes the rest.
pub fn threshold(m: &Mat, s: f64) -> Result<Mat> {
    if s < 0.0 {
        return Err(Error::Config(format!("threshold level must be >= 0, got {s}")));
    }
    Ok(m.map(|x| if x.abs() >= s { x } else { 0.0 }))
}

/// The threshold level of the symmetry-aware sparse covariance estimator:
/// `t = M' * max( sqrt(log p / (n * O)), log p / (n * O_d) )` with natural
/// logs, where `O` is the smallest orbit size and `O_d` the smallest
/// size-to-degree ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdRule {
    pub m_prime: f64,
    pub min_orbit_size: usize,
    pub min_size_to_degree: Ratio<u64>,
    pub p: usize,
    pub n: usize,
}

impl ThresholdRule {
    pub fn new(m_prime: f64, params: &OrbitParameters, p: usize, n: usize) -> Result<Self> {
        if m_prime <= 0.0 {
            return Err(Error::Config("threshold constant M' must be positive".into()));
        }
        if n == 0 {
            return Err(Error::Config("sample size must be >= 1".into()));
        }
        Ok(Self {
            m_prime,
            min_orbit_size: params.min_orbit_size,
            min_size_to_degree: params.min_size_to_degree,
            p,
            n,
        })
    }

    pub fn evaluate(&self) -> f64 {
        let log_p = (self.p as f64).ln();
        let n = self.n as f64;
        let o = self.min_orbit_size as f64;
        let od = *self.min_size_to_degree.numer() as f64 / *self.min_size_to_degree.denom() as f64;
        self.m_prime * (log_p / (n * o)).sqrt().max(log_p / (n * od))
    }
}

/// The default scale-aware threshold constant: twice the largest diagonal
/// entry of the projected empirical covariance.
pub fn default_m_prime(projected: &Mat) -> f64 {
    2.0 * projected.diagonal().iter().cloned().fold(f64::MIN, f64::max)
}

/// Symmetry-plus-threshold covariance estimate: thresholds the projected
/// empirical covariance at the level given by [`ThresholdRule`]. Returns the
/// estimate and the realized threshold.
pub fn sparse_cov_estimate(
    samples: &SampleSet,
    group: &PermutationGroup,
    m_prime: f64,
) -> Result<(Mat, f64)> {
    let emp = crate::gauss::empirical_cov(samples)?;
    check_dims(&emp, group)?;
    let projected = reynolds_project(&emp, group)?;
    let params = orbit_parameters(&edge_orbits(group));
    let rule = ThresholdRule::new(m_prime, &params, group.p(), samples.n())?;
    let t = rule.evaluate();
    Ok((threshold(&projected, t)?, t))
}
