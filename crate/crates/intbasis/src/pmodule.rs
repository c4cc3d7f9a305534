//! The persistence-module data model.
//!
//! A module is a finite sequence of step dimensions together with the
//! structure maps between consecutive steps. Steps are 1-indexed
//! throughout: a pair `(b, d)` says the generator is born in `M_b`, its
//! image is nonzero in `M_b ..= M_{d-1}`, and zero in `M_d`. Appending a
//! virtual zero step ([`PersistenceModule::truncate_essential`]) gives every
//! interval a finite death index `<= n + 1`.

use crate::error::Error;
use crate::field::FieldSpec;
use crate::linalg::Matrix;
use crate::Result;

/// A validated persistence module: `dims[i]` is the dimension of step
/// `M_{i+1}` and `maps[i]` the matrix of `φ_{i+1}: M_{i+1} -> M_{i+2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceModule {
    field: FieldSpec,
    dims: Vec<usize>,
    maps: Vec<Matrix>,
}

/// A (birth, death) pair with `birth < death`. Essential intervals carry
/// the virtual death index `n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PersistencePair {
    pub birth: usize,
    pub death: usize,
}

impl PersistenceModule {
    /// Validate shapes and field consistency. `dims` must be nonempty and
    /// `maps[i]` must be a `dims[i+1] x dims[i]` matrix over `field`.
    pub fn new(field: FieldSpec, dims: Vec<usize>, maps: Vec<Matrix>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::DimensionMismatch("a module needs at least one step".into()));
        }
        if maps.len() + 1 != dims.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} steps require {} maps, got {}",
                dims.len(),
                dims.len() - 1,
                maps.len()
            )));
        }
        for (i, m) in maps.iter().enumerate() {
            if m.field() != &field {
                return Err(Error::MixedFields);
            }
            if m.cols() != dims[i] || m.rows() != dims[i + 1] {
                return Err(Error::ShapeMismatch(i + 1));
            }
        }
        Ok(PersistenceModule { field, dims, maps })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    /// Number of steps `n`.
    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a module always has at least one step
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Dimension of step `M_i`, 1-indexed.
    pub fn dim(&self, i: usize) -> usize {
        assert!((1..=self.len()).contains(&i));
        self.dims[i - 1]
    }

    /// Structure map `φ_i : M_i -> M_{i+1}`, 1-indexed, `1 <= i < n`.
    pub fn map(&self, i: usize) -> &Matrix {
        assert!((1..self.len()).contains(&i));
        &self.maps[i - 1]
    }

    pub fn maps(&self) -> &[Matrix] {
        &self.maps
    }

    /// Composite `φ_{i,j} = φ_{j-1} ∘ … ∘ φ_i`; the identity when `i == j`.
    pub fn compose(&self, i: usize, j: usize) -> Result<Matrix> {
        let n = self.len();
        if !(1 <= i && i <= j && j <= n) {
            return Err(Error::IndexOutOfRange {
                index: if i < 1 || i > n { i } else { j },
                steps: n,
            });
        }
        let mut acc = Matrix::identity(self.field, self.dim(i));
        for k in i..j {
            acc = self.map(k).mul(&acc)?;
        }
        Ok(acc)
    }

    /// Append a virtual step of dimension zero with a zero map into it, so
    /// that every interval of the result has a finite death `<= n + 1`.
    /// An interval `[b, ∞]` of the original corresponds to `[b, n+1]`.
    pub fn truncate_essential(&self) -> PersistenceModule {
        let mut dims = self.dims.clone();
        let mut maps = self.maps.clone();
        maps.push(Matrix::zeros(self.field, 0, *dims.last().expect("nonempty")));
        dims.push(0);
        PersistenceModule {
            field: self.field,
            dims,
            maps,
        }
    }

    /// True when the last step has dimension zero, which rules out
    /// essential intervals. [`PersistenceModule::truncate_essential`]
    /// establishes this form.
    pub fn ends_in_zero(&self) -> bool {
        *self.dims.last().expect("nonempty") == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn real() -> FieldSpec {
        FieldSpec::real_default()
    }

    /// The running example module: R -> R^2 -> R with maps (1,0)^T and (1 1).
    pub(crate) fn example_module(f: FieldSpec) -> PersistenceModule {
        let maps = vec![
            Matrix::from_i64_rows(&f, 2, 1, &[&[1], &[0]]).unwrap(),
            Matrix::from_i64_rows(&f, 1, 2, &[&[1, 1]]).unwrap(),
        ];
        PersistenceModule::new(f, vec![1, 2, 1], maps).unwrap()
    }

    #[test]
    fn example_module_validates() {
        let m = example_module(real());
        assert_eq!(m.len(), 3);
        assert_eq!(m.dims(), &[1, 2, 1]);
    }

    #[test]
    fn shape_mismatch_names_the_map() {
        let f = real();
        let bad = Matrix::zeros(f, 3, 2);
        let err = PersistenceModule::new(f, vec![2, 2], vec![bad]).unwrap_err();
        assert!(matches!(err, Error::ShapeMismatch(1)));
    }

    #[test]
    fn single_step_module_is_fine() {
        let m = PersistenceModule::new(real(), vec![4], vec![]).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.compose(1, 1).unwrap(), Matrix::identity(real(), 4));
    }

    #[test]
    fn compose_in_the_example() {
        let m = example_module(real());
        let c = m.compose(1, 3).unwrap();
        assert_eq!(c.rows(), 1);
        assert_eq!(c.cols(), 1);
        assert_eq!(c.get(0, 0).to_f64(), 1.0);
        assert_eq!(m.compose(2, 2).unwrap(), Matrix::identity(real(), 2));
    }

    #[test]
    fn compose_through_zero_map_is_zero() {
        let f = FieldSpec::prime(5).unwrap();
        let maps = vec![
            Matrix::from_i64_rows(&f, 2, 2, &[&[1, 0], &[0, 1]]).unwrap(),
            Matrix::zeros(f, 2, 2),
            Matrix::from_i64_rows(&f, 1, 2, &[&[1, 1]]).unwrap(),
        ];
        let m = PersistenceModule::new(f, vec![2, 2, 2, 1], maps).unwrap();
        assert!(m.compose(1, 4).unwrap().is_zero());
    }

    #[test]
    fn compose_rejects_bad_indices() {
        let m = example_module(real());
        assert!(matches!(m.compose(0, 1), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(m.compose(1, 4), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(m.compose(3, 2), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn truncation_appends_a_zero_step() {
        let m = example_module(real());
        let t = m.truncate_essential();
        assert_eq!(t.dims(), &[1, 2, 1, 0]);
        assert_eq!(t.map(3).rows(), 0);
        assert_eq!(t.map(3).cols(), 1);
        assert!(t.ends_in_zero());

        let single = PersistenceModule::new(real(), vec![1], vec![]).unwrap();
        assert_eq!(single.truncate_essential().dims(), &[1, 0]);

        let empty = PersistenceModule::new(real(), vec![0], vec![]).unwrap();
        assert_eq!(empty.truncate_essential().dims(), &[0, 0]);
    }

    prop_compose! {
        fn random_z5_module()(n in 1usize..5)
            (dims in proptest::collection::vec(0usize..4, n..n + 1)) -> Vec<usize> {
            dims
        }
    }

    proptest! {
        #[test]
        fn compose_is_transitive(dims in random_z5_module(), seed in 0i64..1000) {
            let f = FieldSpec::prime(5).unwrap();
            let mut maps = Vec::new();
            let mut s = seed;
            for w in dims.windows(2) {
                let (c, r) = (w[0], w[1]);
                let mut entries = Vec::with_capacity(r * c);
                for _ in 0..r * c {
                    s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                    entries.push(f.from_i64(s.rem_euclid(5)));
                }
                maps.push(Matrix::new(f, r, c, entries).unwrap());
            }
            let m = PersistenceModule::new(f, dims.clone(), maps).unwrap();
            let n = m.len();
            for i in 1..=n {
                for j in i..=n {
                    for k in j..=n {
                        let left = m.compose(i, k).unwrap();
                        let right = m.compose(j, k).unwrap().mul(&m.compose(i, j).unwrap()).unwrap();
                        prop_assert_eq!(left, right);
                    }
                }
            }
        }
    }
}
