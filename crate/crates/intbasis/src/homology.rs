//! Persistent homology of a chain tower, one step and one arrow at a time.
//!
//! For a single chain complex, [`homology_step`] produces a splitting basis
//! `{h_1..h_β, b_1..b_r}` of the cycle space `Z_k`: the `b`'s span the
//! boundary space `B_k` and the `h`'s complete them to `Z_k`, so the classes
//! `[h_i]` form a basis of `H_k`. [`induced_map`] expresses the action of a
//! chain map on homology in these bases by solving one linear system per
//! source class. [`build_persistent_homology`] applies both constructions
//! across a tower — each step and each arrow independently — and assembles
//! the resulting persistence module for [`crate::decompose::pmd`].

use rayon::prelude::*;

use crate::error::Error;
use crate::linalg::{self, reduce_left_to_right, BasisSet, Matrix};
use crate::pmodule::PersistenceModule;
use crate::simplicial::ChainTower;
use crate::Result;

/// Splitting basis of the cycle space in one degree.
///
/// `harmonic_reps` are cycle representatives `h_1..h_β` of a basis of
/// `H_k`; `boundary_reps` are a basis `b_1..b_r` of `B_k`. Together they
/// are linearly independent and span `Z_k`.
#[derive(Debug, Clone)]
pub struct HomologyStep {
    pub degree: usize,
    pub betti: usize,
    pub harmonic_reps: BasisSet,
    pub boundary_reps: BasisSet,
}

impl HomologyStep {
    /// Basis matrix `[h_1..h_β | b_1..b_r]` of `Z_k`.
    pub fn cycle_basis(&self) -> Matrix {
        self.harmonic_reps
            .as_matrix()
            .hstack(&self.boundary_reps.as_matrix())
            .expect("splitting bases share the chain space")
    }
}

/// Compute the splitting basis of `Z_k` from the boundary matrices `∂_k`
/// and `∂_{k+1}`.
///
/// Both boundaries are column-reduced; the nonzero reduced columns of
/// `∂_{k+1}` give `B_k`, the kernel columns of the `∂_k` reduction give a
/// basis of `Z_k`, and one more left-to-right pass completes `B_k` to
/// `Z_k`, yielding the `h`'s.
pub fn homology_step(degree: usize, d_k: &Matrix, d_k1: &Matrix) -> Result<HomologyStep> {
    if d_k.cols() != d_k1.rows() {
        return Err(Error::NotAChainComplex(format!(
            "boundary shapes disagree: {}x{} then {}x{}",
            d_k.rows(),
            d_k.cols(),
            d_k1.rows(),
            d_k1.cols()
        )));
    }
    if !d_k.mul(d_k1)?.is_zero() {
        return Err(Error::NotAChainComplex(
            "composite of consecutive boundaries is nonzero".into(),
        ));
    }
    let field = *d_k.field();
    let n = d_k.cols();

    let (r_k, v_k) = reduce_left_to_right(d_k);
    let (r_k1, _) = reduce_left_to_right(d_k1);

    let boundary_cols: Vec<Vec<_>> = (0..r_k1.cols())
        .filter(|&j| linalg::column_low(&r_k1, j).is_some())
        .map(|j| r_k1.column(j))
        .collect();
    let cycle_cols: Vec<Vec<_>> = (0..r_k.cols())
        .filter(|&j| linalg::column_low(&r_k, j).is_none())
        .map(|j| v_k.column(j))
        .collect();
    let r = boundary_cols.len();

    // Complete B_k to Z_k: reduce [b_1..b_r | z_1..z_s] left to right; the
    // cycle columns that survive are the homology representatives.
    let mut all_cols = boundary_cols.clone();
    all_cols.extend(cycle_cols);
    let j_matrix = Matrix::from_columns(field, n, &all_cols)?;
    let (j_reduced, _) = reduce_left_to_right(&j_matrix);
    let harmonic_cols: Vec<Vec<_>> = (r..j_reduced.cols())
        .filter(|&j| linalg::column_low(&j_reduced, j).is_some())
        .map(|j| j_reduced.column(j))
        .collect();

    let betti = harmonic_cols.len();
    Ok(HomologyStep {
        degree,
        betti,
        harmonic_reps: BasisSet::new(field, n, harmonic_cols)?,
        boundary_reps: BasisSet::new(field, n, boundary_cols)?,
    })
}

/// The matrix of the map induced on homology by a chain map `f_k`.
///
/// Column `i` holds the `λ`-part of the unique solution of
/// `f_k(h_i^src) = Σ λ_j h_j^dst + Σ μ_l b_l^dst`. One elimination of the
/// destination cycle basis is shared by all right-hand sides; an
/// inconsistent system means `f_k` does not map cycles to cycles.
pub fn induced_map(f_k: &Matrix, src: &HomologyStep, dst: &HomologyStep) -> Result<Matrix> {
    if f_k.cols() != src.harmonic_reps.ambient_dim || f_k.rows() != dst.harmonic_reps.ambient_dim {
        return Err(Error::DimensionMismatch(format!(
            "chain map is {}x{} between chain spaces of dims {} and {}",
            f_k.rows(),
            f_k.cols(),
            src.harmonic_reps.ambient_dim,
            dst.harmonic_reps.ambient_dim
        )));
    }
    // Push the whole source splitting basis through f_k; every image must
    // land in the destination cycle space.
    let rhs = f_k.mul(&src.cycle_basis())?;
    let solution = linalg::solve_columns(&dst.cycle_basis(), &rhs)?.ok_or(Error::NotInCycleSpace)?;
    let beta_dst = dst.betti;
    let beta_src = src.betti;
    let mut out = Matrix::zeros(*f_k.field(), beta_dst, beta_src);
    for j in 0..beta_dst {
        for i in 0..beta_src {
            out.set(j, i, solution.get(j, i).clone());
        }
    }
    Ok(out)
}

/// The `k`-persistent homology module of a tower: step `i` is `H_k` of the
/// `i`-th complex, maps are induced by the chain maps. Steps and arrows are
/// computed independently across `threads` workers.
pub fn build_persistent_homology(
    tower: &ChainTower,
    degree: usize,
    threads: usize,
) -> Result<PersistenceModule> {
    let n = tower.len();
    let step_task = |s: usize| -> Result<HomologyStep> {
        homology_step(degree, &tower.boundary(s, degree), &tower.boundary(s, degree + 1))
            .map_err(|e| e.at_step(s + 1))
    };
    let steps: Vec<HomologyStep> = run_indexed(n, threads, step_task)?;
    let arrow_task = |s: usize| -> Result<Matrix> {
        induced_map(&tower.chain_map(s, degree), &steps[s], &steps[s + 1])
            .map_err(|e| e.at_step(s + 1))
    };
    let maps: Vec<Matrix> = run_indexed(n - 1, threads, arrow_task)?;
    let dims = steps.iter().map(|s| s.betti).collect();
    PersistenceModule::new(*tower.field(), dims, maps)
}

/// Run `n` independent tasks, optionally on a dedicated pool, preserving
/// index order and surfacing the first error deterministically.
pub(crate) fn run_indexed<T, F>(n: usize, threads: usize, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = if threads <= 1 {
        (0..n).map(&task).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        pool.install(|| (0..n).into_par_iter().map(&task).collect())
    };
    results.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::oracle::barcode_oracle;
    use crate::pmodule::PersistencePair;
    use crate::simplicial::{closure, boundary_matrix, FilteredComplex, Simplex, SimplexSet};

    fn rat() -> FieldSpec {
        FieldSpec::rational()
    }

    fn sx(v: &[usize]) -> Simplex {
        Simplex::new(v.to_vec()).unwrap()
    }

    fn set(tops: &[&[usize]]) -> SimplexSet {
        let tops: Vec<Simplex> = tops.iter().map(|v| sx(v)).collect();
        SimplexSet::new(closure(&tops)).unwrap()
    }

    fn step_of(s: &SimplexSet, k: usize, f: &FieldSpec) -> HomologyStep {
        let dk = boundary_matrix(s, k, f).unwrap();
        let dk1 = boundary_matrix(s, k + 1, f).unwrap();
        homology_step(k, &dk, &dk1).unwrap()
    }

    #[test]
    fn hollow_triangle_has_one_loop() {
        let h = step_of(&set(&[&[0, 1], &[0, 2], &[1, 2]]), 1, &rat());
        assert_eq!(h.betti, 1);
        assert_eq!(h.boundary_reps.len(), 0);
        // the representative spans ker d_1
        let d1 = boundary_matrix(&set(&[&[0, 1], &[0, 2], &[1, 2]]), 1, &rat()).unwrap();
        let img = d1.apply(&h.harmonic_reps.vectors[0]).unwrap();
        assert!(img.iter().all(|x| rat().is_zero(x)));
    }

    #[test]
    fn filled_triangle_kills_the_loop() {
        let h = step_of(&set(&[&[0, 1, 2]]), 1, &rat());
        assert_eq!(h.betti, 0);
        assert_eq!(h.boundary_reps.len(), 1);
    }

    #[test]
    fn connected_complex_has_one_component_class() {
        for tops in [&[&[0usize, 1][..], &[1, 2][..]][..], &[&[0, 1, 2][..]][..]] {
            let h = step_of(&set(tops), 0, &rat());
            assert_eq!(h.betti, 1);
        }
        // two components
        let h = step_of(&set(&[&[0, 1], &[2, 3]]), 0, &rat());
        assert_eq!(h.betti, 2);
    }

    #[test]
    fn betti_matches_rank_nullity() {
        for (tops, k) in [
            (&[&[0usize, 1, 2][..], &[1, 2, 3][..]][..], 1usize),
            (&[&[0, 1][..], &[0, 2][..], &[1, 2][..], &[3][..]][..], 0),
            (&[&[0, 1, 2][..]][..], 2),
        ] {
            let s = set(tops);
            let dk = boundary_matrix(&s, k, &rat()).unwrap();
            let dk1 = boundary_matrix(&s, k + 1, &rat()).unwrap();
            let h = homology_step(k, &dk, &dk1).unwrap();
            let expected = (dk.cols() - linalg::rank(&dk)) - linalg::rank(&dk1);
            assert_eq!(h.betti, expected);
        }
    }

    #[test]
    fn splitting_basis_spans_the_cycle_space() {
        let s = set(&[&[0, 1, 2], &[1, 2, 3], &[0, 3]]);
        let dk = boundary_matrix(&s, 1, &rat()).unwrap();
        let dk1 = boundary_matrix(&s, 2, &rat()).unwrap();
        let h = homology_step(1, &dk, &dk1).unwrap();
        let z = h.cycle_basis();
        assert_eq!(linalg::rank(&z), z.cols());
        assert_eq!(z.cols(), dk.cols() - linalg::rank(&dk));
        for j in 0..z.cols() {
            let img = dk.apply(&z.column(j)).unwrap();
            assert!(img.iter().all(|x| rat().is_zero(x)));
        }
    }

    #[test]
    fn rejects_non_chain_input() {
        let f = rat();
        let a = Matrix::identity(f, 2);
        assert!(matches!(
            homology_step(1, &a.clone(), &a),
            Err(Error::NotAChainComplex(_))
        ));
    }

    #[test]
    fn identity_induces_identity() {
        let s = set(&[&[0, 1], &[0, 2], &[1, 2], &[1, 3], &[2, 3]]);
        let h = step_of(&s, 1, &rat());
        let f_k = Matrix::identity(rat(), h.harmonic_reps.ambient_dim);
        let ind = induced_map(&f_k, &h, &h).unwrap();
        assert_eq!(ind, Matrix::identity(rat(), h.betti));
    }

    /// Triangulated cylinder on 6 vertices: two triangle rims, with the
    /// inclusion of the rims merging the two 1-cycles into one class.
    fn cylinder() -> SimplexSet {
        set(&[
            &[0, 1, 4],
            &[0, 3, 4],
            &[1, 2, 5],
            &[1, 4, 5],
            &[0, 2, 3],
            &[2, 3, 5],
            // rim edges not covered by the triangles above
            &[0, 1],
            &[1, 2],
            &[0, 2],
            &[3, 4],
            &[4, 5],
            &[3, 5],
        ])
    }

    fn both_rims() -> SimplexSet {
        set(&[&[0, 1], &[1, 2], &[0, 2], &[3, 4], &[4, 5], &[3, 5]])
    }

    #[test]
    fn merging_cycles_induce_equal_columns() {
        let f = rat();
        let rims = both_rims();
        let cyl = cylinder();
        let src = step_of(&rims, 1, &f);
        let dst = step_of(&cyl, 1, &f);
        assert_eq!(src.betti, 2);
        assert_eq!(dst.betti, 1);
        let incl = crate::simplicial::inclusion_chain_map(&rims, &cyl, 1, &f).unwrap();
        let ind = induced_map(&incl, &src, &dst).unwrap();
        // Both rim classes map to the same generator up to sign, and
        // neither dies.
        let (a, b) = (ind.get(0, 0), ind.get(0, 1));
        assert!(!f.is_zero(a) && !f.is_zero(b));
        let same = a == b;
        let opposite = *a == f.neg(b).unwrap();
        assert!(same || opposite);
    }

    #[test]
    fn class_sent_to_boundary_gives_zero_column() {
        // The double cone over the hollow triangle at once: the cycle bounds.
        let f = rat();
        let tri = set(&[&[0, 1], &[0, 2], &[1, 2]]);
        let cone = set(&[&[0, 1, 3], &[0, 2, 3], &[1, 2, 3], &[0, 1], &[0, 2], &[1, 2]]);
        let src = step_of(&tri, 1, &f);
        let dst = step_of(&cone, 1, &f);
        assert_eq!((src.betti, dst.betti), (1, 0));
        let incl = crate::simplicial::inclusion_chain_map(&tri, &cone, 1, &f).unwrap();
        let ind = induced_map(&incl, &src, &dst).unwrap();
        assert_eq!((ind.rows(), ind.cols()), (0, 1));
    }

    fn pairs(v: &[(usize, usize)]) -> Vec<PersistencePair> {
        v.iter()
            .map(|&(birth, death)| PersistencePair { birth, death })
            .collect()
    }

    #[test]
    fn filtration_dims_grow_as_expected() {
        let fc = FilteredComplex::new(vec![
            set(&[&[0], &[1], &[2]]),
            set(&[&[0, 1], &[0, 2]]),
            set(&[&[0, 1], &[0, 2], &[1, 2]]),
        ])
        .unwrap();
        let tower = ChainTower::from_filtration(&fc, &rat()).unwrap();
        let m = build_persistent_homology(&tower, 1, 1).unwrap();
        assert_eq!(m.dims(), &[0, 0, 1]);
    }

    #[test]
    fn constant_filtration_induces_identities() {
        let s = set(&[&[0, 1], &[0, 2], &[1, 2], &[3, 4]]);
        let fc = FilteredComplex::new(vec![s.clone(), s.clone(), s]).unwrap();
        let tower = ChainTower::from_filtration(&fc, &rat()).unwrap();
        for k in 0..=1 {
            let m = build_persistent_homology(&tower, k, 1).unwrap();
            for i in 1..m.len() {
                assert_eq!(m.map(i), &Matrix::identity(rat(), m.dim(i)));
            }
        }
    }

    #[test]
    fn rims_into_cylinder_reproduces_the_running_module() {
        // One rim; both rims; the full cylinder. Two classes are born at
        // steps 1 and 2 and merge at step 3, so one dies entering step 3
        // and the elder survives to the virtual step 4.
        let fc = FilteredComplex::new(vec![
            set(&[&[0, 1], &[1, 2], &[0, 2]]),
            both_rims(),
            cylinder(),
        ])
        .unwrap();
        let tower = ChainTower::from_filtration(&fc, &rat()).unwrap();
        let m = build_persistent_homology(&tower, 1, 1).unwrap();
        assert_eq!(m.dims(), &[1, 2, 1]);
        let (basis, diagram) = crate::decompose::pmd(&m, false, 1).unwrap();
        assert_eq!(diagram, pairs(&[(1, 4), (2, 3)]));
        crate::decompose::verify_interval_basis(&m, &basis).unwrap();
        let mut oracle = barcode_oracle(&m.truncate_essential());
        oracle.sort();
        assert_eq!(diagram, oracle);
    }

    #[test]
    fn functoriality_along_three_steps() {
        let fc = FilteredComplex::new(vec![
            set(&[&[0, 1], &[1, 2], &[0, 2]]),
            both_rims(),
            cylinder(),
        ])
        .unwrap();
        let f = rat();
        let tower = ChainTower::from_filtration(&fc, &f).unwrap();
        for k in 0..=tower.max_degree() {
            let steps: Vec<HomologyStep> = (0..3)
                .map(|s| homology_step(k, &tower.boundary(s, k), &tower.boundary(s, k + 1)).unwrap())
                .collect();
            let f01 = induced_map(&tower.chain_map(0, k), &steps[0], &steps[1]).unwrap();
            let f12 = induced_map(&tower.chain_map(1, k), &steps[1], &steps[2]).unwrap();
            let composite = tower.chain_map(1, k).mul(&tower.chain_map(0, k)).unwrap();
            let f02 = induced_map(&composite, &steps[0], &steps[2]).unwrap();
            assert_eq!(f02, f12.mul(&f01).unwrap());
        }
    }

    #[test]
    fn duplicated_steps_shift_the_diagram() {
        let steps = vec![
            set(&[&[0, 1], &[1, 2], &[0, 2]]),
            both_rims(),
            cylinder(),
        ];
        let fc = FilteredComplex::new(steps.clone()).unwrap();
        let tower = ChainTower::from_filtration(&fc, &rat()).unwrap();
        let m = build_persistent_homology(&tower, 1, 1).unwrap();
        let (_, base) = crate::decompose::pmd(&m, false, 1).unwrap();
        for dup in 0..steps.len() {
            let mut refined = steps.clone();
            refined.insert(dup + 1, steps[dup].clone());
            let fc2 = FilteredComplex::new(refined).unwrap();
            let tower2 = ChainTower::from_filtration(&fc2, &rat()).unwrap();
            let m2 = build_persistent_homology(&tower2, 1, 1).unwrap();
            let (_, got) = crate::decompose::pmd(&m2, false, 1).unwrap();
            let shift = |i: usize| if i > dup + 1 { i + 1 } else { i };
            let expected: Vec<PersistencePair> = base
                .iter()
                .map(|p| PersistencePair {
                    birth: shift(p.birth),
                    death: shift(p.death),
                })
                .collect();
            assert_eq!(got, expected);
        }
    }
}
