//! File formats: CSV matrices and sample sets, JSON group specs, basis
//! bundles, and model bundles.
//!
//! Matrix CSV files carry a `p=<int>` header line followed by row-major
//! comma-separated values; sample files are plain CSV with one draw per row.
//! Floats are written with Rust's shortest round-trip formatting, so
//! write/read cycles are exact.

use std::fs;
use std::path::Path;

use nalgebra::Complex;
use serde::{Deserialize, Serialize};

use crate::basis::{supply_basis, BlockStructure, SymmetryBasis};
use crate::error::{Error, Result};
use crate::gauss::SampleSet;
use crate::group::{GroupKind, Permutation, PermutationGroup};
use crate::linalg::{CMat, Mat};

/// JSON description of a permutation group:
/// `{"kind": "cyclic"|"symmetric"|"product"|"custom", "p": int,
///   "blocks": [int]?, "generators": [[int]]?}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct GroupSpec {
    pub kind: String,
    pub p: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<Vec<Vec<usize>>>,
}

impl GroupSpec {
    pub fn cyclic(p: usize) -> Self {
        Self {
            kind: "cyclic".into(),
            p,
            blocks: None,
            generators: None,
        }
    }

    pub fn symmetric(p: usize) -> Self {
        Self {
            kind: "symmetric".into(),
            p,
            blocks: None,
            generators: None,
        }
    }

    pub fn product(blocks: Vec<usize>) -> Self {
        Self {
            kind: "product".into(),
            p: blocks.iter().sum(),
            blocks: Some(blocks),
            generators: None,
        }
    }

    pub fn to_group(&self) -> Result<PermutationGroup> {
        match self.kind.as_str() {
            "cyclic" => PermutationGroup::cyclic(self.p),
            "symmetric" => PermutationGroup::full_symmetric(self.p),
            "product" => {
                let blocks = self
                    .blocks
                    .as_ref()
                    .ok_or_else(|| Error::Config("product group spec requires blocks".into()))?;
                if blocks.iter().sum::<usize>() != self.p {
                    return Err(Error::Config(format!(
                        "block sizes sum to {}, expected p={}",
                        blocks.iter().sum::<usize>(),
                        self.p
                    )));
                }
                PermutationGroup::product_symmetric(blocks)
            }
            "custom" => {
                let gens = self
                    .generators
                    .as_ref()
                    .ok_or_else(|| Error::Config("custom group spec requires generators".into()))?;
                let perms = gens
                    .iter()
                    .map(|g| Permutation::from_images(g.clone()))
                    .collect::<Result<Vec<_>>>()?;
                if perms.iter().any(|g| g.len() != self.p) {
                    return Err(Error::Config("generators must act on p indices".into()));
                }
                PermutationGroup::custom(perms)
            }
            other => Err(Error::Config(format!("unknown group kind '{other}'"))),
        }
    }

    pub fn from_group(group: &PermutationGroup) -> Self {
        match group.kind() {
            GroupKind::Cyclic => Self::cyclic(group.p()),
            GroupKind::FullSymmetric => Self::symmetric(group.p()),
            GroupKind::ProductSymmetric(blocks) => Self::product(blocks.clone()),
            GroupKind::Custom => Self {
                kind: "custom".into(),
                p: group.p(),
                blocks: None,
                generators: Some(
                    group
                        .generators()
                        .iter()
                        .map(|g| g.images().to_vec())
                        .collect(),
                ),
            },
        }
    }
}

pub fn read_group_spec(path: impl AsRef<Path>) -> Result<GroupSpec> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

pub fn write_group_spec(path: impl AsRef<Path>, spec: &GroupSpec) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(spec)?)?;
    Ok(())
}

fn format_row(row: impl Iterator<Item = f64>) -> String {
    row.map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Writes a square matrix as CSV with a `p=<int>` header line.
pub fn write_matrix_csv(path: impl AsRef<Path>, m: &Mat) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension("matrix CSV format is for square matrices".into()));
    }
    let mut out = format!("p={}\n", m.nrows());
    for i in 0..m.nrows() {
        out.push_str(&format_row((0..m.ncols()).map(|j| m[(i, j)])));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Mat> {
    let text = fs::read_to_string(&path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let p: usize = header
        .strip_prefix("p=")
        .ok_or_else(|| Error::Parse(format!("expected 'p=<int>' header, got '{header}'")))?
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad matrix header: {e}")))?;
    let mut m = Mat::zeros(p, p);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        if i >= p {
            return Err(Error::Parse(format!("more than {p} rows in matrix file")));
        }
        let values: Vec<f64> = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("row {i}: {e}")))?;
        if values.len() != p {
            return Err(Error::Parse(format!(
                "row {i} has {} entries, expected {p}",
                values.len()
            )));
        }
        for (j, v) in values.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

/// Writes a sample set as plain CSV, one draw per row.
pub fn write_samples_csv(path: impl AsRef<Path>, samples: &SampleSet) -> Result<()> {
    let data = samples.data();
    let mut out = String::new();
    for i in 0..data.nrows() {
        out.push_str(&format_row((0..data.ncols()).map(|j| data[(i, j)])));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Reads a sample matrix (one draw per row). A leading `p=<int>` header is
/// tolerated and skipped.
pub fn read_samples_csv(path: impl AsRef<Path>) -> Result<SampleSet> {
    let text = fs::read_to_string(&path)?;
    let mut rows: Vec<Vec<f64>> = vec![];
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("p=") {
            continue;
        }
        let values: Vec<f64> = trimmed
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse(format!("row {i}: {e}")))?;
        if let Some(first) = rows.first() {
            if values.len() != first.len() {
                return Err(Error::Parse(format!(
                    "row {i} has {} entries, expected {}",
                    values.len(),
                    first.len()
                )));
            }
        }
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(Error::Parse("sample file contains no rows".into()));
    }
    let (n, p) = (rows.len(), rows[0].len());
    let data = Mat::from_fn(n, p, |i, j| rows[i][j]);
    SampleSet::new(data, 0, "file")
}

/// JSON basis bundle: row-major real and imaginary parts plus the block
/// structure. Floats round-trip exactly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisFile {
    pub p: usize,
    pub group_kind: String,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
    pub structure: Vec<(usize, usize)>,
}

fn kind_name(kind: &GroupKind) -> String {
    match kind {
        GroupKind::Cyclic => "cyclic".into(),
        GroupKind::FullSymmetric => "symmetric".into(),
        GroupKind::ProductSymmetric(_) => "product".into(),
        GroupKind::Custom => "custom".into(),
    }
}

pub fn write_basis(path: impl AsRef<Path>, basis: &SymmetryBasis) -> Result<()> {
    let p = basis.p();
    let t = basis.t();
    let file = BasisFile {
        p,
        group_kind: kind_name(basis.group_kind()),
        re: (0..p)
            .map(|i| (0..p).map(|j| t[(i, j)].re).collect())
            .collect(),
        im: (0..p)
            .map(|i| (0..p).map(|j| t[(i, j)].im).collect())
            .collect(),
        structure: basis.structure().blocks().to_vec(),
    };
    fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

/// Reads a basis bundle and validates it against the given group (same
/// checks as `supply_basis`).
pub fn read_basis(path: impl AsRef<Path>, group: &PermutationGroup) -> Result<SymmetryBasis> {
    let file: BasisFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    if file.re.len() != file.p || file.im.len() != file.p {
        return Err(Error::Parse("basis file dimensions are inconsistent".into()));
    }
    let t = CMat::from_fn(file.p, file.p, |i, j| Complex::new(file.re[i][j], file.im[i][j]));
    supply_basis(t, BlockStructure::new(file.structure)?, group)
}

/// JSON model bundle: path of the sigma CSV (relative to the bundle file),
/// group spec, label, and generation seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelBundle {
    pub sigma_path: String,
    pub group: GroupSpec,
    pub label: String,
    pub seed: u64,
}

pub fn write_model_bundle(
    path: impl AsRef<Path>,
    bundle: &ModelBundle,
    sigma: &Mat,
) -> Result<()> {
    let path = path.as_ref();
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    write_matrix_csv(dir.join(&bundle.sigma_path), sigma)?;
    fs::write(path, serde_json::to_string_pretty(bundle)?)?;
    Ok(())
}

pub fn read_model_bundle(path: impl AsRef<Path>) -> Result<(ModelBundle, Mat)> {
    let path = path.as_ref();
    let bundle: ModelBundle = serde_json::from_str(&fs::read_to_string(path)?)?;
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let sigma = read_matrix_csv(dir.join(&bundle.sigma_path))?;
    Ok((bundle, sigma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::build_basis;
    use crate::gauss::random_symmetric_matrix;
    use crate::linalg::max_abs;

    #[test]
    fn matrix_csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        let m = random_symmetric_matrix(5, 3) * std::f64::consts::PI;
        write_matrix_csv(&path, &m).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn matrix_csv_rejects_bad_headers() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        fs::write(&path, "rows=3\n1,2,3\n").unwrap();
        assert!(matches!(read_matrix_csv(&path), Err(Error::Parse(_))));
    }

    #[test]
    fn samples_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.csv");
        let g = PermutationGroup::cyclic(3).unwrap();
        let model = crate::gauss::random_invariant_spd(&g, 1, 0.2, None).unwrap();
        let samples = crate::gauss::sample(&model, 4, 9).unwrap();
        write_samples_csv(&path, &samples).unwrap();
        let back = read_samples_csv(&path).unwrap();
        assert_eq!(samples.data(), back.data());
    }

    #[test]
    fn group_spec_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        for spec in [
            GroupSpec::cyclic(5),
            GroupSpec::symmetric(4),
            GroupSpec::product(vec![2, 3]),
            GroupSpec {
                kind: "custom".into(),
                p: 3,
                blocks: None,
                generators: Some(vec![vec![1, 0, 2]]),
            },
        ] {
            let path = dir.path().join("g.json");
            write_group_spec(&path, &spec).unwrap();
            let back = read_group_spec(&path).unwrap();
            assert_eq!(spec, back);
            let group = back.to_group().unwrap();
            assert_eq!(group.p(), spec.p);
        }
    }

    #[test]
    fn basis_round_trip_at_full_precision() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("basis.json");
        let g = PermutationGroup::cyclic(7).unwrap();
        let basis = build_basis(&g).unwrap();
        write_basis(&path, &basis).unwrap();
        let back = read_basis(&path, &g).unwrap();
        // Bit-exact round trip.
        assert_eq!(basis.t(), back.t());
        assert_eq!(basis.structure(), back.structure());
    }

    #[test]
    fn model_bundle_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let g = PermutationGroup::cyclic(4).unwrap();
        let model = crate::gauss::random_invariant_spd(&g, 8, 0.2, None).unwrap();
        let bundle = ModelBundle {
            sigma_path: "sigma.csv".into(),
            group: GroupSpec::from_group(&g),
            label: model.label().into(),
            seed: 8,
        };
        write_model_bundle(&path, &bundle, model.sigma()).unwrap();
        let (back, sigma) = read_model_bundle(&path).unwrap();
        assert_eq!(back.label, model.label());
        assert!(max_abs(&(sigma - model.sigma())) == 0.0);
    }
}
