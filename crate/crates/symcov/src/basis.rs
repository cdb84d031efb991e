//! Symmetry-adapted bases for the three canonical group families, block
//! diagonalization of invariant matrices, and the basis-conjugation
//! projection path.
//!
//! A basis is a unitary `T` together with the block structure `(s_i, m_i)`:
//! conjugating any invariant matrix by `T` yields, for each `i`, `m_i`
//! identical diagonal blocks of size `s_i`, and zeros elsewhere.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::estimator::reynolds_project;
use crate::gauss::random_symmetric_matrix;
use crate::group::{GroupKind, PermutationGroup};
use crate::linalg::{
    hermitian_eigenvalues, is_symmetric, max_abs, max_abs_complex, real_part_checked, to_complex,
    CMat, Mat,
};
use crate::seed::{self, tag};

/// Unitarity tolerance for bases constructed by this module.
pub const BUILT_UNITARITY_TOL: f64 = 1e-12;
/// Unitarity tolerance for user-supplied bases.
pub const SUPPLIED_UNITARITY_TOL: f64 = 1e-10;
/// Off-pattern / projection-agreement tolerance for user-supplied bases.
pub const SUPPLIED_RESIDUAL_TOL: f64 = 1e-8;

/// Sizes `s_i` and multiplicities `m_i` of the diagonal blocks, in the order
/// they appear along the diagonal after conjugation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockStructure {
    blocks: Vec<(usize, usize)>,
}

impl BlockStructure {
    pub fn new(blocks: Vec<(usize, usize)>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(|&(s, m)| s == 0 || m == 0) {
            return Err(Error::Config(
                "block structure requires nonempty blocks with s_i, m_i >= 1".into(),
            ));
        }
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[(usize, usize)] {
        &self.blocks
    }

    /// Total dimension `sum_i s_i * m_i`.
    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(|&(s, m)| s * m).sum()
    }

    /// Offset of the first copy of each block family.
    fn family_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for &(s, m) in &self.blocks {
            offsets.push(acc);
            acc += s * m;
        }
        offsets
    }
}

/// A unitary change of basis that block diagonalizes the fixed-point
/// subspace of a group, plus the block metadata.
#[derive(Debug, Clone)]
pub struct SymmetryBasis {
    t: CMat,
    structure: BlockStructure,
    group_kind: GroupKind,
}

impl SymmetryBasis {
    pub fn t(&self) -> &CMat {
        &self.t
    }

    pub fn structure(&self) -> &BlockStructure {
        &self.structure
    }

    pub fn group_kind(&self) -> &GroupKind {
        &self.group_kind
    }

    pub fn p(&self) -> usize {
        self.t.nrows()
    }

    /// `||T* T - I||_inf`.
    pub fn unitarity_residual(&self) -> f64 {
        let p = self.p();
        let mut g = self.t.adjoint() * &self.t;
        for i in 0..p {
            g[(i, i)] -= Complex::new(1.0, 0.0);
        }
        max_abs_complex(&g)
    }
}

fn dft_matrix(p: usize) -> CMat {
    let scale = 1.0 / (p as f64).sqrt();
    CMat::from_fn(p, p, |j, k| {
        let angle = -2.0 * std::f64::consts::PI * (j * k) as f64 / p as f64;
        Complex::from_polar(scale, angle)
    })
}

/// Columns of the orthogonal complement of the normalized all-ones vector
/// within a block of `r` indices starting at `offset`, written into `t`.
fn write_helmert_columns(t: &mut CMat, offset: usize, r: usize, first_col: usize) {
    for k in 1..r {
        let norm = (k as f64 * (k + 1) as f64).sqrt();
        for j in 0..k {
            t[(offset + j, first_col + k - 1)] = Complex::new(1.0 / norm, 0.0);
        }
        t[(offset + k, first_col + k - 1)] = Complex::new(-(k as f64) / norm, 0.0);
    }
}

/// Builds the canonical symmetry-adapted basis for a group: the unitary DFT
/// for the cyclic family, an all-ones column completed by a Helmert
/// complement for the full symmetric family, and the per-block arrangement
/// for products of symmetric groups.
pub fn build_basis(group: &PermutationGroup) -> Result<SymmetryBasis> {
    let p = group.p();
    match group.kind() {
        GroupKind::Cyclic => {
            let structure = BlockStructure::new(vec![(1, 1); p])?;
            Ok(SymmetryBasis {
                t: dft_matrix(p),
                structure,
                group_kind: GroupKind::Cyclic,
            })
        }
        GroupKind::FullSymmetric => {
            let mut t = CMat::zeros(p, p);
            let inv_sqrt_p = 1.0 / (p as f64).sqrt();
            for j in 0..p {
                t[(j, 0)] = Complex::new(inv_sqrt_p, 0.0);
            }
            write_helmert_columns(&mut t, 0, p, 1);
            let mut blocks = vec![(1, 1)];
            if p > 1 {
                blocks.push((1, p - 1));
            }
            Ok(SymmetryBasis {
                t,
                structure: BlockStructure::new(blocks)?,
                group_kind: GroupKind::FullSymmetric,
            })
        }
        GroupKind::ProductSymmetric(block_sizes) => {
            let k = block_sizes.len();
            let mut t = CMat::zeros(p, p);
            // First k columns: normalized indicator of each block.
            let mut offset = 0;
            for (i, &r) in block_sizes.iter().enumerate() {
                let inv_sqrt_r = 1.0 / (r as f64).sqrt();
                for j in 0..r {
                    t[(offset + j, i)] = Complex::new(inv_sqrt_r, 0.0);
                }
                offset += r;
            }
            // Then each block's Helmert complement.
            let mut col = k;
            offset = 0;
            for &r in block_sizes {
                write_helmert_columns(&mut t, offset, r, col);
                col += r - 1;
                offset += r;
            }
            let mut blocks = vec![(k, 1)];
            for &r in block_sizes {
                if r > 1 {
                    blocks.push((1, r - 1));
                }
            }
            Ok(SymmetryBasis {
                t,
                structure: BlockStructure::new(blocks)?,
                group_kind: GroupKind::ProductSymmetric(block_sizes.clone()),
            })
        }
        GroupKind::Custom => Err(Error::Config(
            "no canonical basis for custom groups; supply one via supply_basis".into(),
        )),
    }
}

/// Accepts a user-provided basis after validating unitarity and checking, on
/// five deterministic random matrices, that the basis-conjugation projection
/// reproduces the orbit-average projection and that projected matrices
/// conjugate into the declared block pattern.
pub fn supply_basis(
    t: CMat,
    structure: BlockStructure,
    group: &PermutationGroup,
) -> Result<SymmetryBasis> {
    let p = group.p();
    if t.nrows() != p || t.ncols() != p {
        return Err(Error::Dimension(format!(
            "basis is {}x{}, group acts on {p} indices",
            t.nrows(),
            t.ncols()
        )));
    }
    if structure.dimension() != p {
        return Err(Error::Config(format!(
            "block structure sums to {}, expected {p}",
            structure.dimension()
        )));
    }
    let basis = SymmetryBasis {
        t,
        structure,
        group_kind: group.kind().clone(),
    };
    let unitarity = basis.unitarity_residual();
    if unitarity > SUPPLIED_UNITARITY_TOL {
        return Err(Error::Validation(format!(
            "basis is not unitary: residual {unitarity:.3e} > {SUPPLIED_UNITARITY_TOL:.0e}"
        )));
    }
    for check in 0..5u64 {
        let m = random_symmetric_matrix(p, seed::derive(&[tag::BASIS_CHECK, check]));
        let invariant = reynolds_project(&m, group)?;
        let bd = block_diagonalize(&invariant, &basis)?;
        if bd.off_block_residual > SUPPLIED_RESIDUAL_TOL {
            return Err(Error::Validation(format!(
                "invariant matrix leaks outside the declared block pattern: residual {:.3e}",
                bd.off_block_residual
            )));
        }
        let via_basis = project_via_basis(&m, &basis)?;
        let disagreement = max_abs(&(via_basis - &invariant));
        if disagreement > SUPPLIED_RESIDUAL_TOL {
            return Err(Error::Validation(format!(
                "basis projection disagrees with orbit averaging: residual {disagreement:.3e}"
            )));
        }
    }
    Ok(basis)
}

/// The result of conjugating a matrix into a symmetry-adapted basis: one
/// representative block per family (copies averaged entrywise), the largest
/// magnitude found outside the declared pattern, and the largest spread
/// among multiplicity copies.
#[derive(Debug, Clone)]
pub struct BlockDiagonalization {
    pub blocks: Vec<CMat>,
    pub multiplicities: Vec<usize>,
    pub off_block_residual: f64,
    pub copy_spread: f64,
}

impl BlockDiagonalization {
    /// Eigenvalues of all blocks, each repeated by its multiplicity,
    /// ascending. For an invariant matrix this is the spectrum of the
    /// original matrix.
    pub fn eigenvalues_with_multiplicity(&self) -> Vec<f64> {
        let mut vals = vec![];
        for (block, &m) in self.blocks.iter().zip(&self.multiplicities) {
            for ev in hermitian_eigenvalues(block) {
                for _ in 0..m {
                    vals.push(ev);
                }
            }
        }
        vals.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
        vals
    }
}

fn conjugated(m: &Mat, basis: &SymmetryBasis) -> Result<CMat> {
    if m.nrows() != basis.p() || m.ncols() != basis.p() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, basis has dimension {}",
            m.nrows(),
            m.ncols(),
            basis.p()
        )));
    }
    Ok(basis.t.adjoint() * to_complex(m) * &basis.t)
}

/// Conjugates a symmetric matrix by the basis and extracts the diagonal
/// blocks. For matrices in the fixed-point subspace the off-block residual
/// and copy spread are at rounding level; for other matrices they measure
/// the departure from invariance (reported, not an error).
pub fn block_diagonalize(m: &Mat, basis: &SymmetryBasis) -> Result<BlockDiagonalization> {
    let conj = conjugated(m, basis)?;
    let p = basis.p();
    let offsets = basis.structure.family_offsets();
    let mut in_pattern = vec![false; p * p];
    let mut blocks = vec![];
    let mut multiplicities = vec![];
    let mut copy_spread: f64 = 0.0;
    for (f, &(s, mult)) in basis.structure.blocks().iter().enumerate() {
        let base = offsets[f];
        for copy in 0..mult {
            let at = base + copy * s;
            for a in 0..s {
                for b in 0..s {
                    in_pattern[(at + a) * p + (at + b)] = true;
                }
            }
        }
        let mut mean = CMat::zeros(s, s);
        for copy in 0..mult {
            let at = base + copy * s;
            mean += conj.view((at, at), (s, s));
        }
        mean /= Complex::new(mult as f64, 0.0);
        for copy in 0..mult {
            let at = base + copy * s;
            let diff = conj.view((at, at), (s, s)) - &mean;
            copy_spread = copy_spread.max(max_abs_complex(&diff.into_owned()));
        }
        blocks.push(mean);
        multiplicities.push(mult);
    }
    let mut off_block_residual: f64 = 0.0;
    for i in 0..p {
        for j in 0..p {
            if !in_pattern[i * p + j] {
                off_block_residual = off_block_residual.max(conj[(i, j)].norm());
            }
        }
    }
    Ok(BlockDiagonalization {
        blocks,
        multiplicities,
        off_block_residual,
        copy_spread,
    })
}

/// Projects a symmetric matrix onto the fixed-point subspace through the
/// basis: conjugate, zero everything outside the block pattern, replace each
/// multiplicity family by its entrywise average, and conjugate back.
pub fn project_via_basis(m: &Mat, basis: &SymmetryBasis) -> Result<Mat> {
    if !is_symmetric(m, 1e-12) {
        return Err(Error::Dimension("projection expects a symmetric matrix".into()));
    }
    let conj = conjugated(m, basis)?;
    let p = basis.p();
    let offsets = basis.structure.family_offsets();
    let mut kept = CMat::zeros(p, p);
    for (f, &(s, mult)) in basis.structure.blocks().iter().enumerate() {
        let base = offsets[f];
        let mut mean = CMat::zeros(s, s);
        for copy in 0..mult {
            let at = base + copy * s;
            mean += conj.view((at, at), (s, s));
        }
        mean /= Complex::new(mult as f64, 0.0);
        for copy in 0..mult {
            let at = base + copy * s;
            for a in 0..s {
                for b in 0..s {
                    kept[(at + a, at + b)] = mean[(a, b)];
                }
            }
        }
    }
    let back = &basis.t * kept * basis.t.adjoint();
    real_part_checked(&back, 1e-12)
}

/// Applies a spectral function to an invariant symmetric matrix blockwise:
/// each averaged block is eigendecomposed on its own, `f` is applied to the
/// eigenvalues, and the result is conjugated back. Equals `Q f(L) Q^T` of
/// the dense eigendecomposition when the input is invariant.
pub fn blockwise_matrix_function(
    m: &Mat,
    basis: &SymmetryBasis,
    f: impl Fn(f64) -> f64,
) -> Result<Mat> {
    let conj = conjugated(m, basis)?;
    let p = basis.p();
    let offsets = basis.structure.family_offsets();
    let mut out = CMat::zeros(p, p);
    for (fam, &(s, mult)) in basis.structure.blocks().iter().enumerate() {
        let base = offsets[fam];
        let mut mean = CMat::zeros(s, s);
        for copy in 0..mult {
            let at = base + copy * s;
            mean += conj.view((at, at), (s, s));
        }
        mean /= Complex::new(mult as f64, 0.0);
        let transformed = if s == 1 {
            CMat::from_element(1, 1, Complex::new(f(mean[(0, 0)].re), 0.0))
        } else {
            let herm = (&mean + mean.adjoint()) * Complex::new(0.5, 0.0);
            let eig = herm.symmetric_eigen();
            let d = CMat::from_fn(s, s, |a, b| {
                if a == b {
                    Complex::new(f(eig.eigenvalues[a]), 0.0)
                } else {
                    Complex::new(0.0, 0.0)
                }
            });
            &eig.eigenvectors * d * eig.eigenvectors.adjoint()
        };
        for copy in 0..mult {
            let at = base + copy * s;
            for a in 0..s {
                for b in 0..s {
                    out[(at + a, at + b)] = transformed[(a, b)];
                }
            }
        }
    }
    let back = &basis.t * out * basis.t.adjoint();
    real_part_checked(&back, 1e-9)
}
