//! Ground-truth invariant covariance models, Gaussian sampling, and the
//! empirical / group-averaged empirical covariance matrices.
//!
//! All sampling is zero-mean. Random streams are keyed per (seed, row), so
//! results are bit-identical across runs and thread counts.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::estimator::reynolds_project;
use crate::group::{edge_orbits, PermutationGroup};
use crate::linalg::{is_symmetric, max_abs, min_eigenvalue_sym, spd_inverse, Mat};
use crate::seed::{self, tag};

/// Default ridge level for experiment models.
pub const DEFAULT_MIN_EIG: f64 = 0.2;

/// A symmetric positive definite covariance matrix lying in the fixed-point
/// subspace of its group, plus the spectral bound used by the theory.
#[derive(Debug, Clone)]
pub struct CovarianceModel {
    sigma: Mat,
    group: PermutationGroup,
    label: String,
    spectral_bound: f64,
}

impl CovarianceModel {
    /// Validates invariance (entrywise, 1e-10) and positive definiteness.
    pub fn new(sigma: Mat, group: PermutationGroup, label: impl Into<String>) -> Result<Self> {
        if sigma.nrows() != group.p() || sigma.ncols() != group.p() {
            return Err(Error::Dimension(format!(
                "sigma is {}x{}, group acts on {} indices",
                sigma.nrows(),
                sigma.ncols(),
                group.p()
            )));
        }
        if !is_symmetric(&sigma, 1e-10) {
            return Err(Error::Validation("sigma must be symmetric".into()));
        }
        let projected = reynolds_project(&sigma, &group)?;
        let drift = max_abs(&(&sigma - &projected));
        if drift > 1e-10 {
            return Err(Error::Validation(format!(
                "sigma is not invariant: projection moved entries by {drift:.3e}"
            )));
        }
        let min_eig = min_eigenvalue_sym(&sigma);
        if min_eig <= 0.0 {
            return Err(Error::Validation(format!(
                "sigma must be positive definite (min eigenvalue {min_eig:.3e})"
            )));
        }
        let spectral_bound = crate::estimator::norms(&sigma)?.spectral;
        Ok(Self {
            sigma,
            group,
            label: label.into(),
            spectral_bound,
        })
    }

    pub fn sigma(&self) -> &Mat {
        &self.sigma
    }

    pub fn group(&self) -> &PermutationGroup {
        &self.group
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn p(&self) -> usize {
        self.sigma.nrows()
    }

    /// Spectral norm of sigma.
    pub fn spectral_bound(&self) -> f64 {
        self.spectral_bound
    }

    /// The concentration matrix `sigma^{-1}`.
    pub fn concentration(&self) -> Result<Mat> {
        spd_inverse(&self.sigma)
    }
}

/// A batch of i.i.d. zero-mean Gaussian draws, one per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    data: Mat,
    seed: u64,
    model_label: String,
}

impl SampleSet {
    pub fn new(data: Mat, seed: u64, model_label: impl Into<String>) -> Result<Self> {
        if data.nrows() == 0 {
            return Err(Error::Config("sample set requires n >= 1".into()));
        }
        Ok(Self {
            data,
            seed,
            model_label: model_label.into(),
        })
    }

    pub fn data(&self) -> &Mat {
        &self.data
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    pub fn p(&self) -> usize {
        self.data.ncols()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn model_label(&self) -> &str {
        &self.model_label
    }
}

/// A symmetric matrix with i.i.d. standard normal upper triangle, mirrored.
pub fn random_symmetric_matrix(p: usize, seed: u64) -> Mat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(&[seed, tag::SYMMETRIC_MATRIX]));
    let mut m = Mat::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let v: f64 = StandardNormal.sample(&mut rng);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    m
}

/// Draws a random invariant SPD model: a random symmetric matrix is
/// (optionally) sparsified orbit-by-orbit, projected onto the fixed-point
/// subspace, and ridge-shifted to enforce `min_eig`.
///
/// Sparsity is the target fraction of nonzero matrix entries; whole edge
/// orbits are zeroed (diagonal orbits always kept) until the fraction drops
/// to the target, so invariance is preserved.
pub fn random_invariant_spd(
    group: &PermutationGroup,
    seed: u64,
    min_eig: f64,
    sparsity: Option<f64>,
) -> Result<CovarianceModel> {
    if min_eig <= 0.0 {
        return Err(Error::Config("min_eig must be positive".into()));
    }
    if let Some(s) = sparsity {
        if !(0.0 < s && s <= 1.0) {
            return Err(Error::Config(format!("sparsity must lie in (0, 1], got {s}")));
        }
    }
    let p = group.p();
    let mut m = random_symmetric_matrix(p, seed::derive(&[seed, tag::MODEL]));
    if let Some(target) = sparsity {
        let partition = edge_orbits(group);
        let mut off_diag: Vec<usize> = (0..partition.n_orbits())
            .filter(|&id| !partition.orbits()[id].is_diagonal())
            .collect();
        // Deterministic shuffle keyed by the seed.
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(&[seed, tag::ORBIT_SHUFFLE]));
        for i in (1..off_diag.len()).rev() {
            let j = (rand::Rng::random_range(&mut rng, 0..=i as u64)) as usize;
            off_diag.swap(i, j);
        }
        let mut nonzero = p * p;
        for id in off_diag {
            if nonzero as f64 / (p * p) as f64 <= target {
                break;
            }
            let orbit = &partition.orbits()[id];
            for &(i, j) in &orbit.pairs {
                m[(i, j)] = 0.0;
                m[(j, i)] = 0.0;
            }
            nonzero -= 2 * orbit.size();
        }
    }
    let mut projected = reynolds_project(&m, group)?;
    let lambda_min = min_eigenvalue_sym(&projected);
    let shift = (-lambda_min).max(0.0) + min_eig;
    for i in 0..p {
        projected[(i, i)] += shift;
    }
    CovarianceModel::new(projected, group.clone(), format!("random-invariant-spd(seed={seed})"))
}

/// The cycle graphical model: concentration matrix with unit diagonal and
/// weight `edge_weight` on the length-p cycle, invariant under the cyclic
/// group. Returns the covariance model together with the true concentration
/// matrix.
pub fn cycle_model(p: usize, edge_weight: f64) -> Result<(CovarianceModel, Mat)> {
    if p < 3 {
        return Err(Error::Config("cycle model requires p >= 3".into()));
    }
    let mut theta = Mat::identity(p, p);
    for i in 0..p {
        let j = (i + 1) % p;
        theta[(i, j)] = edge_weight;
        theta[(j, i)] = edge_weight;
    }
    let group = PermutationGroup::cyclic(p)?;
    let sigma = spd_inverse(&theta)?;
    // The inverse of a circulant matrix is circulant; projection only strips
    // accumulated rounding before the invariance check.
    let sigma = reynolds_project(&sigma, &group)?;
    let model = CovarianceModel::new(sigma, group, format!("cycle(p={p}, w={edge_weight})"))?;
    Ok((model, theta))
}

/// Draws `n` samples from the model via its lower Cholesky factor, with a
/// counter-based per-row stream keyed by `(seed, row)`.
pub fn sample(model: &CovarianceModel, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::Config("sample size must be >= 1".into()));
    }
    let p = model.p();
    let chol = model
        .sigma()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numeric("covariance is not positive definite".into()))?;
    let l = chol.l();
    let mut data = Mat::zeros(n, p);
    let mut z = Mat::zeros(p, 1);
    for k in 0..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(&[seed, tag::SAMPLE_ROW, k as u64]));
        for i in 0..p {
            z[(i, 0)] = StandardNormal.sample(&mut rng);
        }
        let x = &l * &z;
        for j in 0..p {
            data[(k, j)] = x[(j, 0)];
        }
    }
    SampleSet::new(data, seed, model.label())
}

/// The empirical covariance `(1/n) sum_k x_k x_k^T` (no mean subtraction;
/// the model is zero-mean).
pub fn empirical_cov(samples: &SampleSet) -> Result<Mat> {
    if samples.n() == 0 {
        return Err(Error::Config("empty sample set".into()));
    }
    let x = samples.data();
    Ok(x.transpose() * x / samples.n() as f64)
}

/// The group-averaged empirical covariance: the Reynolds projection of the
/// empirical covariance matrix.
pub fn g_empirical_cov(samples: &SampleSet, group: &PermutationGroup) -> Result<Mat> {
    reynolds_project(&empirical_cov(samples)?, group)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::min_eigenvalue_sym;

    #[test]
    fn random_invariant_spd_trivial_group_is_pd() {
        let g = PermutationGroup::trivial(5).unwrap();
        let model = random_invariant_spd(&g, 7, 0.3, None).unwrap();
        assert!(min_eigenvalue_sym(model.sigma()) >= 0.3 - 1e-12);
    }

    #[test]
    fn random_invariant_spd_cyclic_is_circulant() {
        let g = PermutationGroup::cyclic(6).unwrap();
        let model = random_invariant_spd(&g, 9, 0.2, None).unwrap();
        let s = model.sigma();
        for i in 0..6 {
            for j in 0..6 {
                let gap = (j + 6 - i) % 6;
                assert!((s[(i, j)] - s[(0, gap)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn random_invariant_spd_full_symmetric_has_two_values() {
        let g = PermutationGroup::full_symmetric(5).unwrap();
        let model = random_invariant_spd(&g, 11, 0.2, None).unwrap();
        let s = model.sigma();
        for i in 0..5 {
            assert!((s[(i, i)] - s[(0, 0)]).abs() < 1e-12);
            for j in 0..5 {
                if i != j {
                    assert!((s[(i, j)] - s[(0, 1)]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sparsity_target_is_respected_and_invariant() {
        let g = PermutationGroup::cyclic(12).unwrap();
        let model = random_invariant_spd(&g, 13, 0.2, Some(0.3)).unwrap();
        let s = model.sigma();
        let nnz = s.iter().filter(|&&x| x != 0.0).count();
        assert!(nnz as f64 / 144.0 <= 0.3 + 1e-12);
        assert!(nnz >= 12); // diagonal kept
    }

    #[test]
    fn sampling_is_deterministic_per_seed() {
        let g = PermutationGroup::cyclic(4).unwrap();
        let model = random_invariant_spd(&g, 5, 0.2, None).unwrap();
        let a = sample(&model, 8, 42).unwrap();
        let b = sample(&model, 8, 42).unwrap();
        assert_eq!(a.data(), b.data());
        let c = sample(&model, 8, 43).unwrap();
        assert_ne!(a.data(), c.data());
        // Prefix property: the first rows of a longer draw equal a shorter one.
        let long = sample(&model, 16, 42).unwrap();
        assert_eq!(long.data().rows(0, 8), a.data().rows(0, 8));
    }

    #[test]
    fn single_sample_outer_product() {
        let g = PermutationGroup::trivial(3).unwrap();
        let model = random_invariant_spd(&g, 1, 0.2, None).unwrap();
        let s = sample(&model, 1, 2).unwrap();
        assert_eq!(s.n(), 1);
        let x = s.data().row(0).transpose();
        let emp = empirical_cov(&s).unwrap();
        assert!(max_abs(&(&x * x.transpose() - emp)) < 1e-14);
    }

    #[test]
    fn empirical_cov_of_unit_vectors() {
        let data = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let s = SampleSet::new(data, 0, "unit").unwrap();
        let emp = empirical_cov(&s).unwrap();
        assert!(max_abs(&(emp - Mat::identity(2, 2) * 0.5)) < 1e-15);
    }

    #[test]
    fn identity_covariance_large_n_linf() {
        let g = PermutationGroup::trivial(5).unwrap();
        let model = CovarianceModel::new(Mat::identity(5, 5), g, "identity").unwrap();
        let s = sample(&model, 100_000, 1).unwrap();
        let emp = empirical_cov(&s).unwrap();
        assert!(max_abs(&(emp - Mat::identity(5, 5))) < 0.05);
    }

    #[test]
    fn diag_covariance_recovered_within_quarter() {
        let g = PermutationGroup::trivial(2).unwrap();
        let sigma = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 4.0]);
        let model = CovarianceModel::new(sigma, g, "diag14").unwrap();
        let s = sample(&model, 1000, 3).unwrap();
        let emp = empirical_cov(&s).unwrap();
        assert!((emp[(0, 0)] - 1.0).abs() < 0.25);
        assert!((emp[(1, 1)] - 4.0).abs() < 1.0);
    }

    #[test]
    fn g_empirical_trivial_group_equals_empirical() {
        let g = PermutationGroup::trivial(4).unwrap();
        let model = random_invariant_spd(&g, 17, 0.2, None).unwrap();
        let s = sample(&model, 10, 5).unwrap();
        assert_eq!(
            g_empirical_cov(&s, &g).unwrap(),
            empirical_cov(&s).unwrap()
        );
    }

    #[test]
    fn g_empirical_cyclic_unit_vector() {
        // One sample e_0 in p=3: averaging the three rotated rank-1 matrices
        // gives I/3.
        let data = Mat::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let s = SampleSet::new(data, 0, "e0").unwrap();
        let g = PermutationGroup::cyclic(3).unwrap();
        let ghat = g_empirical_cov(&s, &g).unwrap();
        assert!(max_abs(&(ghat - Mat::identity(3, 3) / 3.0)) < 1e-14);
    }

    #[test]
    fn g_empirical_is_psd() {
        let g = PermutationGroup::full_symmetric(5).unwrap();
        let model = random_invariant_spd(&g, 23, 0.2, None).unwrap();
        let s = sample(&model, 3, 9).unwrap();
        let ghat = g_empirical_cov(&s, &g).unwrap();
        assert!(min_eigenvalue_sym(&ghat) >= -1e-10);
    }

    #[test]
    fn g_empirical_matches_entrywise_group_sum() {
        // Entry (i,j) equals (1/(n|G|)) sum_k sum_g X_{g(i)} X_{g(j)}.
        for g in [
            PermutationGroup::cyclic(5).unwrap(),
            PermutationGroup::full_symmetric(4).unwrap(),
            PermutationGroup::product_symmetric(&[2, 3]).unwrap(),
        ] {
            let p = g.p();
            let model = random_invariant_spd(&g, 29, 0.2, None).unwrap();
            let s = sample(&model, 4, 31).unwrap();
            let ghat = g_empirical_cov(&s, &g).unwrap();
            let elements = g.elements().unwrap();
            let x = s.data();
            for i in 0..p {
                for j in 0..p {
                    let mut acc = 0.0;
                    for k in 0..s.n() {
                        for e in &elements {
                            acc += x[(k, e.apply(i))] * x[(k, e.apply(j))];
                        }
                    }
                    acc /= (s.n() * elements.len()) as f64;
                    assert!((ghat[(i, j)] - acc).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn seed_averaged_projection_beats_single_seeds() {
        // Unbiasedness proxy: the average of the projected estimates over
        // many seeds is closer to sigma than any single-seed estimate.
        let g = PermutationGroup::cyclic(8).unwrap();
        let model = random_invariant_spd(&g, 37, 0.2, None).unwrap();
        let mut acc = Mat::zeros(8, 8);
        let mut best_single = f64::INFINITY;
        let n_seeds = 200;
        for s in 0..n_seeds {
            let samples = sample(&model, 50, 500 + s).unwrap();
            let ghat = g_empirical_cov(&samples, &g).unwrap();
            best_single = best_single.min((&ghat - model.sigma()).norm());
            acc += ghat;
        }
        acc /= n_seeds as f64;
        assert!((acc - model.sigma()).norm() < best_single);
    }

    #[test]
    fn cycle_model_matches_construction() {
        let (model, theta) = cycle_model(6, -0.25).unwrap();
        assert_eq!(theta[(0, 1)], -0.25);
        assert_eq!(theta[(0, 5)], -0.25);
        assert_eq!(theta[(0, 2)], 0.0);
        let product = model.sigma() * &theta;
        assert!(max_abs(&(product - Mat::identity(6, 6))) < 1e-10);
    }

    #[test]
    fn non_invariant_sigma_rejected() {
        let g = PermutationGroup::cyclic(3).unwrap();
        let mut sigma = Mat::identity(3, 3);
        sigma[(0, 1)] = 0.5;
        sigma[(1, 0)] = 0.5;
        assert!(matches!(
            CovarianceModel::new(sigma, g, "bad"),
            Err(Error::Validation(_))
        ));
    }
}
