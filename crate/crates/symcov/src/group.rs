//! Finite permutation groups on index sets, their edge orbits, and the
//! orbit parameters that drive every symmetry-aware estimator in this crate.
//!
//! Groups are always specified by generators; full element enumeration is an
//! internal oracle guarded by a hard order cap. Indices are 0-based.

use std::collections::{HashMap, HashSet, VecDeque};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard cap on group order for explicit element enumeration (|Sym_7| * 2).
pub const DEFAULT_ORDER_CAP: usize = 10_080;

/// A permutation of `{0..p-1}` stored by its image map: `images[i]` is the
/// image of `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Permutation {
    images: Vec<usize>,
}

impl Permutation {
    /// Builds a permutation from an image vector, checking bijectivity.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let p = images.len();
        let mut seen = vec![false; p];
        for &img in &images {
            if img >= p {
                return Err(Error::Validation(format!(
                    "image {img} out of range for permutation of {p} points"
                )));
            }
            if seen[img] {
                return Err(Error::Validation(format!(
                    "image {img} repeated; not a bijection"
                )));
            }
            seen[img] = true;
        }
        Ok(Self { images })
    }

    pub fn identity(p: usize) -> Self {
        Self {
            images: (0..p).collect(),
        }
    }

    /// The cyclic shift `i -> (i+1) mod p`.
    pub fn shift(p: usize) -> Self {
        Self {
            images: (0..p).map(|i| (i + 1) % p).collect(),
        }
    }

    /// The transposition swapping `a` and `b`.
    pub fn transposition(p: usize, a: usize, b: usize) -> Self {
        let mut images: Vec<usize> = (0..p).collect();
        images.swap(a, b);
        Self { images }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &img)| i == img)
    }

    /// Image of index `i`.
    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Composition `self . other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Self {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.images.len()];
        for (i, &img) in self.images.iter().enumerate() {
            inv[img] = i;
        }
        Self { images: inv }
    }
}

impl TryFrom<Vec<usize>> for Permutation {
    type Error = Error;
    fn try_from(images: Vec<usize>) -> Result<Self> {
        Self::from_images(images)
    }
}

impl From<Permutation> for Vec<usize> {
    fn from(p: Permutation) -> Self {
        p.images
    }
}

/// Which canonical family a group belongs to, if any.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GroupKind {
    Cyclic,
    FullSymmetric,
    /// Product of symmetric groups acting blockwise; the payload lists the
    /// block sizes `r_1..r_k` (summing to `p`).
    ProductSymmetric(Vec<usize>),
    Custom,
}

/// A finite permutation group on `{0..p-1}` given by generators.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationGroup {
    p: usize,
    generators: Vec<Permutation>,
    kind: GroupKind,
}

impl PermutationGroup {
    /// Cyclic group of order `p`, generated by the shift `i -> (i+1) mod p`.
    pub fn cyclic(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("group requires p >= 1".into()));
        }
        Ok(Self {
            p,
            generators: vec![Permutation::shift(p)],
            kind: GroupKind::Cyclic,
        })
    }

    /// Full symmetric group on `p` points, generated by the transposition
    /// `(0 1)` and the `p`-cycle.
    pub fn full_symmetric(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::Config("group requires p >= 1".into()));
        }
        let mut generators = vec![];
        if p >= 2 {
            generators.push(Permutation::transposition(p, 0, 1));
        }
        let shift = Permutation::shift(p);
        if !generators.contains(&shift) {
            generators.push(shift);
        }
        Ok(Self {
            p,
            generators,
            kind: GroupKind::FullSymmetric,
        })
    }

    /// Product of symmetric groups acting independently on consecutive index
    /// blocks of sizes `blocks` (which must sum to `p`, all >= 1).
    pub fn product_symmetric(blocks: &[usize]) -> Result<Self> {
        if blocks.is_empty() || blocks.contains(&0) {
            return Err(Error::Config(
                "product-symmetric group requires nonempty blocks, all >= 1".into(),
            ));
        }
        let p: usize = blocks.iter().sum();
        let mut generators = vec![];
        let mut offset = 0;
        for &r in blocks {
            if r >= 2 {
                // Per-block transposition of the first two indices.
                generators.push(Permutation::transposition(p, offset, offset + 1));
            }
            if r >= 3 {
                // Per-block cycle.
                let mut images: Vec<usize> = (0..p).collect();
                for i in 0..r {
                    images[offset + i] = offset + (i + 1) % r;
                }
                generators.push(Permutation::from_images(images)?);
            }
            offset += r;
        }
        if generators.is_empty() {
            // All blocks of size 1: the trivial group.
            generators.push(Permutation::identity(p));
        }
        Ok(Self {
            p,
            generators,
            kind: GroupKind::ProductSymmetric(blocks.to_vec()),
        })
    }

    /// Group generated by an explicit, nonempty list of permutations.
    pub fn custom(generators: Vec<Permutation>) -> Result<Self> {
        let p = match generators.first() {
            Some(g) => g.len(),
            None => return Err(Error::Config("custom group requires generators".into())),
        };
        if p == 0 {
            return Err(Error::Config("group requires p >= 1".into()));
        }
        if generators.iter().any(|g| g.len() != p) {
            return Err(Error::Config(
                "all generators must act on the same index set".into(),
            ));
        }
        Ok(Self {
            p,
            generators,
            kind: GroupKind::Custom,
        })
    }

    /// The trivial group on `p` points (identity generator only).
    pub fn trivial(p: usize) -> Result<Self> {
        Self::custom(vec![Permutation::identity(p)])
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    /// Enumerates all group elements (closure of the generators under
    /// composition), identity first, with the default order cap.
    pub fn elements(&self) -> Result<Vec<Permutation>> {
        self.elements_capped(DEFAULT_ORDER_CAP)
    }

    /// Enumerates all group elements with an explicit order cap.
    pub fn elements_capped(&self, cap: usize) -> Result<Vec<Permutation>> {
        let identity = Permutation::identity(self.p);
        let mut seen: HashSet<Permutation> = HashSet::new();
        let mut out = vec![identity.clone()];
        seen.insert(identity);
        let mut queue: VecDeque<usize> = VecDeque::new();
        queue.push_back(0);
        while let Some(idx) = queue.pop_front() {
            let current = out[idx].clone();
            for g in &self.generators {
                let next = g.compose(&current);
                if !seen.contains(&next) {
                    if out.len() >= cap {
                        return Err(Error::Capacity(format!(
                            "group order exceeds enumeration cap {cap}"
                        )));
                    }
                    seen.insert(next.clone());
                    out.push(next);
                    queue.push_back(out.len() - 1);
                }
            }
        }
        Ok(out)
    }

    /// Group order via enumeration (subject to the default cap).
    pub fn order(&self) -> Result<usize> {
        Ok(self.elements()?.len())
    }
}

/// One edge orbit: the set of unordered index pairs reachable from a seed
/// pair by applying group elements to both endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeOrbit {
    /// Unordered, deduplicated pairs `(i, j)` with `i <= j`.
    pub pairs: Vec<(usize, usize)>,
    /// Sorted set of nodes appearing in `pairs`.
    pub nodes: Vec<usize>,
    /// Maximum number of orbit edges incident to any single node; a diagonal
    /// pair `(k, k)` counts once toward the degree at `k`.
    pub degree: usize,
}

impl EdgeOrbit {
    pub fn size(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.pairs.iter().all(|&(i, j)| i == j)
    }
}

/// Partition of all unordered index pairs (diagonal included) into orbits.
#[derive(Debug, Clone)]
pub struct EdgeOrbitPartition {
    p: usize,
    orbits: Vec<EdgeOrbit>,
    /// Flat `p*p` lookup from an ordered pair to its unordered orbit id.
    orbit_of: Vec<usize>,
}

impl EdgeOrbitPartition {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn orbits(&self) -> &[EdgeOrbit] {
        &self.orbits
    }

    pub fn n_orbits(&self) -> usize {
        self.orbits.len()
    }

    /// Orbit id of the unordered pair `{i, j}`.
    pub fn orbit_id(&self, i: usize, j: usize) -> usize {
        self.orbit_of[i * self.p + j]
    }
}

/// Orbits of ordered index pairs under the simultaneous action on both
/// endpoints. This is the structure behind Reynolds projection of general
/// (possibly non-symmetric) matrices; statistics use the unordered partition.
#[derive(Debug, Clone)]
pub struct OrderedOrbitPartition {
    p: usize,
    /// Flat `p*p` lookup from `i*p + j` to the orbit id.
    orbit_of: Vec<usize>,
    /// Members of each orbit as flat indices `i*p + j`.
    members: Vec<Vec<usize>>,
}

impl OrderedOrbitPartition {
    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n_orbits(&self) -> usize {
        self.members.len()
    }

    pub fn orbit_id(&self, i: usize, j: usize) -> usize {
        self.orbit_of[i * self.p + j]
    }

    pub fn members(&self, orbit: usize) -> &[usize] {
        &self.members[orbit]
    }

    pub fn all_members(&self) -> &[Vec<usize>] {
        &self.members
    }
}

/// Computes the ordered-pair orbit partition by BFS from each unvisited pair.
pub fn ordered_orbits(group: &PermutationGroup) -> OrderedOrbitPartition {
    let p = group.p();
    let mut orbit_of = vec![usize::MAX; p * p];
    let mut members: Vec<Vec<usize>> = vec![];
    for start in 0..p * p {
        if orbit_of[start] != usize::MAX {
            continue;
        }
        let id = members.len();
        let mut orbit = vec![start];
        orbit_of[start] = id;
        let mut queue = VecDeque::from([start]);
        while let Some(flat) = queue.pop_front() {
            let (i, j) = (flat / p, flat % p);
            for g in group.generators() {
                let next = g.apply(i) * p + g.apply(j);
                if orbit_of[next] == usize::MAX {
                    orbit_of[next] = id;
                    orbit.push(next);
                    queue.push_back(next);
                }
            }
        }
        orbit.sort_unstable();
        members.push(orbit);
    }
    OrderedOrbitPartition {
        p,
        orbit_of,
        members,
    }
}

/// Computes the unordered edge-orbit partition of a group, with per-orbit
/// node sets and degrees.
pub fn edge_orbits(group: &PermutationGroup) -> EdgeOrbitPartition {
    let p = group.p();
    let mut orbit_of = vec![usize::MAX; p * p];
    let mut orbits: Vec<EdgeOrbit> = vec![];
    for i in 0..p {
        for j in i..p {
            if orbit_of[i * p + j] != usize::MAX {
                continue;
            }
            let id = orbits.len();
            let mut pairs = vec![(i, j)];
            orbit_of[i * p + j] = id;
            orbit_of[j * p + i] = id;
            let mut queue = VecDeque::from([(i, j)]);
            while let Some((a, b)) = queue.pop_front() {
                for g in group.generators() {
                    let (mut x, mut y) = (g.apply(a), g.apply(b));
                    if x > y {
                        std::mem::swap(&mut x, &mut y);
                    }
                    if orbit_of[x * p + y] == usize::MAX {
                        orbit_of[x * p + y] = id;
                        orbit_of[y * p + x] = id;
                        pairs.push((x, y));
                        queue.push_back((x, y));
                    }
                }
            }
            pairs.sort_unstable();
            let mut incidence: HashMap<usize, usize> = HashMap::new();
            for &(a, b) in &pairs {
                *incidence.entry(a).or_insert(0) += 1;
                if a != b {
                    *incidence.entry(b).or_insert(0) += 1;
                }
            }
            let mut nodes: Vec<usize> = incidence.keys().copied().collect();
            nodes.sort_unstable();
            let degree = incidence.values().copied().max().unwrap_or(1);
            orbits.push(EdgeOrbit {
                pairs,
                nodes,
                degree,
            });
        }
    }
    EdgeOrbitPartition { p, orbits, orbit_of }
}

/// The group-theoretic quantities governing sample-complexity gains: the
/// smallest orbit size, the smallest size-to-degree ratio (kept as an exact
/// rational), and the number of distinct orbits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitParameters {
    pub min_orbit_size: usize,
    pub min_size_to_degree: Ratio<u64>,
    pub n_orbits: usize,
}

impl OrbitParameters {
    pub fn min_size_to_degree_f64(&self) -> f64 {
        *self.min_size_to_degree.numer() as f64 / *self.min_size_to_degree.denom() as f64
    }
}

/// Extracts the orbit parameters from an edge-orbit partition.
pub fn orbit_parameters(partition: &EdgeOrbitPartition) -> OrbitParameters {
    let min_orbit_size = partition
        .orbits()
        .iter()
        .map(EdgeOrbit::size)
        .min()
        .expect("partition is nonempty for p >= 1");
    let min_size_to_degree = partition
        .orbits()
        .iter()
        .map(|o| Ratio::new(o.size() as u64, o.degree as u64))
        .min()
        .expect("partition is nonempty for p >= 1");
    OrbitParameters {
        min_orbit_size,
        min_size_to_degree,
        n_orbits: partition.n_orbits(),
    }
}
