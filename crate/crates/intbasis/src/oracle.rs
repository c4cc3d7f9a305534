//! Brute-force barcode recovery from the rank function.
//!
//! The multiset of intervals of a persistence module is determined by the
//! ranks of all composite maps `φ_{i,j}`. This module recomputes the
//! diagram that way, straight from [`crate::linalg::rank`] on explicitly
//! composed matrices, and shares no code with the decomposition in
//! [`crate::decompose`] — it exists to cross-check it on small instances.
//! It cannot produce generators, only pairs.

use crate::linalg::rank;
use crate::pmodule::{PersistenceModule, PersistencePair};

/// Ranks of every composite `φ_{i,j}`, `1 <= i <= j <= n`, with
/// `r[i][i] = dim M_i`.
#[derive(Debug)]
pub struct RankTable {
    n: usize,
    // rows[i - 1][j - i] = rank φ_{i,j}
    rows: Vec<Vec<usize>>,
}

impl RankTable {
    /// Compose each `φ_{i,j}` incrementally and record its rank.
    pub fn build(m: &PersistenceModule) -> Self {
        let n = m.len();
        let mut rows = Vec::with_capacity(n);
        for i in 1..=n {
            let mut row = Vec::with_capacity(n - i + 1);
            row.push(m.dim(i));
            let mut acc = crate::linalg::Matrix::identity(*m.field(), m.dim(i));
            for j in i + 1..=n {
                acc = m.map(j - 1).mul(&acc).expect("validated module shapes");
                row.push(rank(&acc));
            }
            rows.push(row);
        }
        RankTable { n, rows }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `rank φ_{i,j}` for `1 <= i <= j <= n`.
    pub fn rank(&self, i: usize, j: usize) -> usize {
        assert!(1 <= i && i <= j && j <= self.n);
        self.rows[i - 1][j - i]
    }
}

/// The barcode as a sorted multiset of pairs, computed from rank-function
/// inclusion-exclusion:
///
/// `mult(b, d) = (r[b][d-1] - r[b][d]) - (r[b-1][d-1] - r[b-1][d])`
///
/// with `r[b][b] = dim M_b` and `r[0][*] = 0`.
///
/// The module must be validated and end in a zero-dimensional step (apply
/// [`PersistenceModule::truncate_essential`] first); this guarantees every
/// interval has a finite death index.
pub fn barcode_oracle(m: &PersistenceModule) -> Vec<PersistencePair> {
    assert!(
        m.ends_in_zero(),
        "barcode_oracle expects an essential-truncated module"
    );
    let table = RankTable::build(m);
    let n = table.len();
    let r = |i: usize, j: usize| -> i64 {
        if i == 0 {
            0
        } else {
            table.rank(i, j) as i64
        }
    };
    let mut pairs = Vec::new();
    for b in 1..=n {
        for d in b + 1..=n {
            let mult = (r(b, d - 1) - r(b, d)) - (r(b - 1, d - 1) - r(b - 1, d));
            debug_assert!(mult >= 0, "interval multiplicities are nonnegative");
            for _ in 0..mult.max(0) {
                pairs.push(PersistencePair { birth: b, death: d });
            }
        }
    }
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::linalg::Matrix;

    fn real() -> FieldSpec {
        FieldSpec::real_default()
    }

    fn pairs(v: &[(usize, usize)]) -> Vec<PersistencePair> {
        v.iter()
            .map(|&(birth, death)| PersistencePair { birth, death })
            .collect()
    }

    fn example_module(f: FieldSpec) -> PersistenceModule {
        let maps = vec![
            Matrix::from_i64_rows(&f, 2, 1, &[&[1], &[0]]).unwrap(),
            Matrix::from_i64_rows(&f, 1, 2, &[&[1, 1]]).unwrap(),
        ];
        PersistenceModule::new(f, vec![1, 2, 1], maps).unwrap()
    }

    #[test]
    fn running_example_barcode() {
        // dims [1,2,1], maps (1,0)^T then (1 1). The class born at step 2
        // spans ker of (1 1) and dies entering step 3; the class born at
        // step 1 survives to the virtual step 4. Hand-computed ranks:
        // r[1][2] = r[1][3] = 1, r[2][3] = 1, all ranks into step 4 are 0.
        let m = example_module(real()).truncate_essential();
        assert_eq!(barcode_oracle(&m), pairs(&[(1, 4), (2, 3)]));
    }

    #[test]
    fn zero_maps_kill_everything_immediately() {
        let f = FieldSpec::prime(5).unwrap();
        let maps = vec![Matrix::zeros(f, 3, 2), Matrix::zeros(f, 1, 3)];
        let m = PersistenceModule::new(f, vec![2, 3, 1], maps)
            .unwrap()
            .truncate_essential();
        let got = barcode_oracle(&m);
        assert_eq!(got, pairs(&[(1, 2), (1, 2), (2, 3), (2, 3), (2, 3), (3, 4)]));
    }

    #[test]
    fn identity_maps_yield_full_bars() {
        let f = FieldSpec::prime(2).unwrap();
        let n = 4;
        let m_dim = 3;
        let maps = vec![Matrix::identity(f, m_dim); n - 1];
        let m = PersistenceModule::new(f, vec![m_dim; n], maps)
            .unwrap()
            .truncate_essential();
        let got = barcode_oracle(&m);
        assert_eq!(got, pairs(&[(1, n + 1), (1, n + 1), (1, n + 1)]));
    }

    #[test]
    fn rank_table_is_monotone_along_rows() {
        let m = example_module(FieldSpec::rational()).truncate_essential();
        let t = RankTable::build(&m);
        for i in 1..=t.len() {
            for j in i..t.len() {
                assert!(t.rank(i, j) >= t.rank(i, j + 1));
            }
        }
    }

    #[test]
    fn bar_lengths_sum_to_total_dimension() {
        let m = example_module(FieldSpec::rational()).truncate_essential();
        let total: usize = barcode_oracle(&m).iter().map(|p| p.death - p.birth).sum();
        assert_eq!(total, m.dims().iter().sum::<usize>());
    }
}
