//! Abstract simplicial complexes, filtrations, and their chain data.
//!
//! Simplices are stored with strictly increasing vertex lists; sorting the
//! vertices fixes the orientation and therefore all boundary signs. Bases
//! of chain spaces are ordered lexicographically on the vertex lists, so
//! the matrices produced here are reproducible across runs.
//!
//! A [`ChainTower`] is the common currency handed to the homology and
//! harmonic pipelines: per step, one boundary matrix per degree, and per
//! consecutive pair of steps, one chain map per degree. Towers built from
//! a [`FilteredComplex`] use inclusion chain maps; explicit towers (general
//! monotone sequences of chain maps) are validated against the chain-map
//! condition instead.

use crate::error::Error;
use crate::field::FieldSpec;
use crate::linalg::Matrix;
use crate::Result;

/// A nonempty simplex with strictly increasing vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    pub fn new(vertices: Vec<usize>) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Parse("a simplex needs at least one vertex".into()));
        }
        if !vertices.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Parse(format!(
                "simplex {vertices:?} is not strictly increasing"
            )));
        }
        Ok(Simplex(vertices))
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    /// Dimension `p` of a `(p+1)`-vertex simplex.
    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, in vertex-omission order.
    pub fn facets(&self) -> Vec<Simplex> {
        if self.dim() == 0 {
            return Vec::new();
        }
        (0..self.0.len())
            .map(|i| {
                let mut v = self.0.clone();
                v.remove(i);
                Simplex(v)
            })
            .collect()
    }
}

impl std::fmt::Display for Simplex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// One step of a filtration: a simplex set closed under taking faces,
/// stored per degree in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexSet {
    by_dim: Vec<Vec<Simplex>>,
}

impl SimplexSet {
    /// Build from a list of simplices, which must already be closed under
    /// faces. Duplicates are ignored.
    pub fn new(simplices: Vec<Simplex>) -> Result<Self> {
        let max_dim = simplices.iter().map(Simplex::dim).max();
        let mut by_dim: Vec<Vec<Simplex>> = vec![Vec::new(); max_dim.map_or(0, |d| d + 1)];
        for s in simplices {
            by_dim[s.dim()].push(s);
        }
        for level in by_dim.iter_mut() {
            level.sort();
            level.dedup();
        }
        let set = SimplexSet { by_dim };
        for level in set.by_dim.iter().skip(1) {
            for s in level {
                for f in s.facets() {
                    if !set.contains(&f) {
                        return Err(Error::NotClosedUnderFaces(s.to_string()));
                    }
                }
            }
        }
        Ok(set)
    }

    pub fn empty() -> Self {
        SimplexSet { by_dim: Vec::new() }
    }

    /// Simplices of dimension `k`, lexicographically sorted.
    pub fn simplices_of_dim(&self, k: usize) -> &[Simplex] {
        self.by_dim.get(k).map_or(&[], Vec::as_slice)
    }

    /// Number of `k`-simplices.
    pub fn dim_count(&self, k: usize) -> usize {
        self.simplices_of_dim(k).len()
    }

    pub fn max_dim(&self) -> Option<usize> {
        (0..self.by_dim.len()).rev().find(|&k| !self.by_dim[k].is_empty())
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.index_of(s).is_some()
    }

    fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.by_dim
            .get(s.dim())
            .and_then(|level| level.binary_search(s).ok())
    }

    pub fn len(&self) -> usize {
        self.by_dim.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Simplex> {
        self.by_dim.iter().flatten()
    }

    /// First simplex of `self` missing from `other`, if any.
    fn first_not_in(&self, other: &SimplexSet) -> Option<&Simplex> {
        self.iter().find(|s| !other.contains(s))
    }
}

/// Close a list of simplices under taking faces.
pub fn closure(simplices: &[Simplex]) -> Vec<Simplex> {
    let mut out: std::collections::BTreeSet<Simplex> = std::collections::BTreeSet::new();
    let mut stack: Vec<Simplex> = simplices.to_vec();
    while let Some(s) = stack.pop() {
        if out.insert(s.clone()) {
            stack.extend(s.facets());
        }
    }
    out.into_iter().collect()
}

/// A monotone sequence of simplex sets `Σ_1 ⊆ … ⊆ Σ_p`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilteredComplex {
    steps: Vec<SimplexSet>,
}

impl FilteredComplex {
    pub fn new(steps: Vec<SimplexSet>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::Parse("a filtration needs at least one step".into()));
        }
        for w in steps.windows(2) {
            if let Some(missing) = w[0].first_not_in(&w[1]) {
                return Err(Error::NotASubcomplex(missing.to_string()));
            }
        }
        Ok(FilteredComplex { steps })
    }

    /// Compile a simplexwise filtration `(simplex, value)` into steps, one
    /// per distinct value in ascending order.
    pub fn from_simplexwise(entries: Vec<(Simplex, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Parse("empty simplexwise filtration".into()));
        }
        if entries.iter().any(|(_, t)| !t.is_finite()) {
            return Err(Error::Parse("filtration values must be finite".into()));
        }
        let mut values: Vec<f64> = entries.iter().map(|&(_, t)| t).collect();
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        values.dedup();
        let mut steps = Vec::with_capacity(values.len());
        for &cut in &values {
            let present: Vec<Simplex> = entries
                .iter()
                .filter(|&&(_, t)| t <= cut)
                .map(|(s, _)| s.clone())
                .collect();
            steps.push(SimplexSet::new(present)?);
        }
        FilteredComplex::new(steps)
    }

    pub fn steps(&self) -> &[SimplexSet] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.steps.iter().filter_map(SimplexSet::max_dim).max()
    }
}

/// Matrix of the boundary operator `∂_k` of a simplex set, in the
/// canonical (lexicographic) bases, with the alternating vertex-omission
/// signs. `∂_0` maps onto the zero space, so it has zero rows.
pub fn boundary_matrix(sigma: &SimplexSet, k: usize, field: &FieldSpec) -> Result<Matrix> {
    let cols = sigma.dim_count(k);
    if k == 0 {
        return Ok(Matrix::zeros(*field, 0, cols));
    }
    let rows = sigma.dim_count(k - 1);
    let mut m = Matrix::zeros(*field, rows, cols);
    for (j, s) in sigma.simplices_of_dim(k).iter().enumerate() {
        for (i, face) in s.facets().iter().enumerate() {
            let Some(row) = sigma.index_of(face) else {
                return Err(Error::NotClosedUnderFaces(s.to_string()));
            };
            let sign = if i % 2 == 0 { 1 } else { -1 };
            m.set(row, j, field.from_i64(sign));
        }
    }
    Ok(m)
}

/// The 0/1 column-selection chain map induced in degree `k` by an
/// inclusion `src ⊆ dst`.
pub fn inclusion_chain_map(
    src: &SimplexSet,
    dst: &SimplexSet,
    k: usize,
    field: &FieldSpec,
) -> Result<Matrix> {
    let mut m = Matrix::zeros(*field, dst.dim_count(k), src.dim_count(k));
    for (j, s) in src.simplices_of_dim(k).iter().enumerate() {
        let Some(row) = dst.index_of(s) else {
            return Err(Error::NotASubcomplex(s.to_string()));
        };
        m.set(row, j, field.one());
    }
    Ok(m)
}

/// A sequence of chain complexes connected by chain maps, one boundary
/// matrix per degree `0..=max_degree` per step.
#[derive(Debug, Clone)]
pub struct ChainTower {
    field: FieldSpec,
    max_degree: usize,
    /// `boundaries[s][k]` is `∂_k` at step `s` (0-indexed steps).
    boundaries: Vec<Vec<Matrix>>,
    /// `maps[s][k]` is `f_k : C_k(s) -> C_k(s+1)`.
    maps: Vec<Vec<Matrix>>,
}

impl ChainTower {
    /// Validate shapes, `∂_k ∂_{k+1} = 0` per step, and the chain-map
    /// condition `f_k ∂_{k+1} = ∂_{k+1} f_{k+1}` per arrow and degree.
    pub fn new(
        field: FieldSpec,
        max_degree: usize,
        boundaries: Vec<Vec<Matrix>>,
        maps: Vec<Vec<Matrix>>,
    ) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(Error::Parse("a tower needs at least one step".into()));
        }
        if maps.len() + 1 != boundaries.len() {
            return Err(Error::Parse(format!(
                "{} steps require {} chain maps, got {}",
                boundaries.len(),
                boundaries.len() - 1,
                maps.len()
            )));
        }
        for (s, step) in boundaries.iter().enumerate() {
            if step.len() != max_degree + 1 {
                return Err(Error::Parse(format!(
                    "step {s} carries {} boundary matrices, expected {}",
                    step.len(),
                    max_degree + 1
                )));
            }
            if step[0].rows() != 0 {
                return Err(Error::NotAChainComplex(format!(
                    "step {s}: boundary of degree 0 must map to the zero space"
                )));
            }
            for k in 0..max_degree {
                if step[k + 1].rows() != step[k].cols() {
                    return Err(Error::NotAChainComplex(format!(
                        "step {s}: boundary of degree {} has {} rows but degree {k} has {} columns",
                        k + 1,
                        step[k + 1].rows(),
                        step[k].cols()
                    )));
                }
                if !step[k].mul(&step[k + 1])?.is_zero() {
                    return Err(Error::NotAChainComplex(format!(
                        "step {s}: boundary of degree {k} composed with degree {} is nonzero",
                        k + 1
                    )));
                }
            }
        }
        for (s, arrow) in maps.iter().enumerate() {
            if arrow.len() != max_degree + 1 {
                return Err(Error::Parse(format!(
                    "arrow {s} carries {} chain maps, expected {}",
                    arrow.len(),
                    max_degree + 1
                )));
            }
            for k in 0..=max_degree {
                let (src, dst) = (&boundaries[s][k], &boundaries[s + 1][k]);
                if arrow[k].cols() != src.cols() || arrow[k].rows() != dst.cols() {
                    return Err(Error::Parse(format!(
                        "arrow {s} degree {k}: map is {}x{}, expected {}x{}",
                        arrow[k].rows(),
                        arrow[k].cols(),
                        dst.cols(),
                        src.cols()
                    )));
                }
            }
            for k in 0..max_degree {
                let lhs = arrow[k].mul(&boundaries[s][k + 1])?;
                let rhs = boundaries[s + 1][k + 1].mul(&arrow[k + 1])?;
                let mut diff = lhs.clone();
                for r in 0..diff.rows() {
                    for c in 0..diff.cols() {
                        let v = field.sub(lhs.get(r, c), rhs.get(r, c))?;
                        diff.set(r, c, v);
                    }
                }
                if !diff.is_zero() {
                    return Err(Error::NotAChainComplex(format!(
                        "arrow {s} degree {k}: chain-map condition fails"
                    )));
                }
            }
        }
        Ok(ChainTower {
            field,
            max_degree,
            boundaries,
            maps,
        })
    }

    /// Assemble the tower of a filtration: per-step boundary matrices and
    /// inclusion chain maps. Inclusions satisfy the chain-map condition by
    /// construction, so no validation pass is needed.
    pub fn from_filtration(fc: &FilteredComplex, field: &FieldSpec) -> Result<Self> {
        let max_degree = fc.max_dim().unwrap_or(0);
        let mut boundaries = Vec::with_capacity(fc.len());
        for step in fc.steps() {
            let mut per_degree = Vec::with_capacity(max_degree + 1);
            for k in 0..=max_degree {
                per_degree.push(boundary_matrix(step, k, field)?);
            }
            boundaries.push(per_degree);
        }
        let mut maps = Vec::with_capacity(fc.len().saturating_sub(1));
        for w in fc.steps().windows(2) {
            let mut per_degree = Vec::with_capacity(max_degree + 1);
            for k in 0..=max_degree {
                per_degree.push(inclusion_chain_map(&w[0], &w[1], k, field)?);
            }
            maps.push(per_degree);
        }
        Ok(ChainTower {
            field: *field,
            max_degree,
            boundaries,
            maps,
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.boundaries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boundaries.is_empty()
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Dimension of `C_k` at step `s` (0-indexed step).
    pub fn chain_dim(&self, s: usize, k: usize) -> usize {
        if k <= self.max_degree {
            self.boundaries[s][k].cols()
        } else {
            0
        }
    }

    /// `∂_k` at step `s`; degrees above `max_degree` yield empty matrices
    /// of the right shape.
    pub fn boundary(&self, s: usize, k: usize) -> Matrix {
        if k <= self.max_degree {
            self.boundaries[s][k].clone()
        } else {
            Matrix::zeros(self.field, self.chain_dim(s, k - 1), 0)
        }
    }

    /// `f_k` along arrow `s -> s+1`; degrees above `max_degree` are empty.
    pub fn chain_map(&self, s: usize, k: usize) -> Matrix {
        if k <= self.max_degree {
            self.maps[s][k].clone()
        } else {
            Matrix::zeros(self.field, 0, 0)
        }
    }
}
