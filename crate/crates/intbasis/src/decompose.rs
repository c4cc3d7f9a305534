//! Interval-basis decomposition of a persistence module.
//!
//! The decomposition works one birth step at a time. For step `i`, the
//! composites `φ_{i,i+s+1}` are formed left to right; whenever the rank
//! drops, the kernel grew, and the new kernel directions that are not
//! already explained by the image of `φ_{i-1}` (or by earlier kernel
//! directions) are exactly the generators born at `i`. The stage index at
//! which a generator enters the kernel is its death offset.
//!
//! Each step is independent of the others, so [`pmd`] distributes the
//! per-step work across a thread pool and merges the results by step
//! index; outputs do not depend on the thread count.
//!
//! Over the reals, [`ssd_real`] replaces rank and kernel computations with
//! a chain of SVD steps: after each stage the composite is restricted to
//! the orthogonal complement of the kernel found so far, and an
//! accumulated change of basis maps the kernel directions back to the
//! canonical coordinates of `M_i`.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::Error;
use crate::field::FieldScalar;
use crate::linalg::{self, image_basis, kernel_basis, rank, svd_step, Matrix, SpanTracker};
use crate::pmodule::{PersistenceModule, PersistencePair};
use crate::Result;

/// A generator born at some step, together with the index-function value
/// `J`: the smallest `s` with `φ_{b,b+s}(v) = 0`.
#[derive(Debug, Clone)]
pub struct BirthVector {
    pub vector: Vec<FieldScalar>,
    pub death_offset: usize,
}

/// All generators born at one step.
#[derive(Debug, Clone)]
pub struct BirthSet {
    pub step: usize,
    pub generators: Vec<BirthVector>,
}

impl BirthSet {
    fn empty(step: usize) -> Self {
        BirthSet {
            step,
            generators: Vec::new(),
        }
    }
}

/// One interval-basis element: a homogeneous generator with its pair.
#[derive(Debug, Clone)]
pub struct IntervalBasisElement {
    pub birth: usize,
    pub death: usize,
    pub vector: Vec<FieldScalar>,
}

/// The full interval basis, ordered by (birth, death, discovery order).
/// Element `k` corresponds to pair `k` of the diagram returned by [`pmd`].
#[derive(Debug, Clone, Default)]
pub struct IntervalBasis {
    pub elements: Vec<IntervalBasisElement>,
}

/// Single step decomposition at step `i` of an essential-truncated module.
///
/// Returns the generators born at `i`: kernel vectors of the composites
/// out of `M_i` that are independent from `im φ_{i-1}` and from kernel
/// vectors found at earlier stages. Kernel vectors are fed to the basis
/// completion in the deterministic order produced by
/// [`linalg::kernel_basis`].
pub fn ssd(m: &PersistenceModule, i: usize) -> Result<BirthSet> {
    let n = m.len();
    if !(1..=n).contains(&i) {
        return Err(Error::IndexOutOfRange { index: i, steps: n });
    }
    let d = m.dim(i);
    if d == 0 {
        return Ok(BirthSet::empty(i));
    }
    let field = *m.field();
    let phi_prev = if i == 1 {
        Matrix::zeros(field, d, 0)
    } else {
        m.map(i - 1).clone()
    };
    let im = image_basis(&phi_prev);
    let k = im.len();
    let mut tracker = SpanTracker::new(field, d);
    for v in &im.vectors {
        tracker.absorb(v);
    }
    let mut generators: Vec<BirthVector> = Vec::new();
    let mut composite = Matrix::identity(field, d);
    let mut r = d;
    for s in 0..n - i {
        composite = m.map(i + s).mul(&composite)?;
        let r_new = rank(&composite);
        if r_new < r {
            let ker = kernel_basis(&composite);
            for v in ker.vectors {
                if tracker.absorb(&v) {
                    generators.push(BirthVector {
                        vector: v,
                        death_offset: s + 1,
                    });
                }
            }
            r = r_new;
        }
        if r == 0 || generators.len() + k == d {
            break;
        }
    }
    Ok(BirthSet { step: i, generators })
}

/// Single step decomposition over the reals via chained SVD steps.
///
/// Equivalent contract to [`ssd`]. The composite is kept restricted to the
/// orthogonal complement of the kernel found so far; `v_tot` accumulates
/// the change of basis, so the kernel directions harvested at each stage
/// are read off as columns of `v_tot` in the canonical basis of `M_i`.
pub fn ssd_real(m: &PersistenceModule, i: usize) -> Result<BirthSet> {
    let field = *m.field();
    if !field.is_real() {
        return Err(Error::RealFieldRequired);
    }
    let n = m.len();
    if !(1..=n).contains(&i) {
        return Err(Error::IndexOutOfRange { index: i, steps: n });
    }
    let d = m.dim(i);
    if d == 0 {
        return Ok(BirthSet::empty(i));
    }
    let phi_prev = if i == 1 {
        Matrix::zeros(field, d, 0)
    } else {
        m.map(i - 1).clone()
    };
    let im = image_basis(&phi_prev);
    let r_im = im.len();
    let mut tracker = SpanTracker::new(field, d);
    for v in &im.vectors {
        tracker.absorb(v);
    }
    let mut generators: Vec<BirthVector> = Vec::new();
    let mut v_tot = DMatrix::<f64>::identity(d, d);
    let mut composite = DMatrix::<f64>::identity(d, d);
    let mut killed = 0usize;
    for s in 0..n - i {
        composite = m.map(i + s).to_dmatrix() * composite;
        let active = composite.ncols();
        let (nz, dk) = if composite.nrows() == 0 {
            // The next step is zero-dimensional: every surviving direction
            // dies here and no rotation is needed.
            (0, active)
        } else {
            let step = svd_step(&Matrix::from_dmatrix(field, &composite))?;
            let v = step.v.to_dmatrix();
            let rotated = v_tot.columns(0, active) * &v;
            v_tot.columns_mut(0, active).copy_from(&rotated);
            composite = step.r.to_dmatrix();
            (step.nz, step.dk)
        };
        if dk > 0 {
            for c in (d - killed - dk)..(d - killed) {
                let col: Vec<FieldScalar> =
                    (0..d).map(|row| FieldScalar::Real(v_tot[(row, c)])).collect();
                if tracker.absorb(&col) {
                    generators.push(BirthVector {
                        vector: col,
                        death_offset: s + 1,
                    });
                }
            }
            killed += dk;
        }
        if nz == 0 || generators.len() + r_im == d {
            break;
        }
    }
    Ok(BirthSet { step: i, generators })
}

/// Persistence module decomposition: interval basis plus diagram.
///
/// The module is essential-truncated internally, so deaths range over
/// `2 ..= n + 1` with `n + 1` standing for the virtual zero step. Birth
/// steps are processed independently across `threads` workers
/// (`use_real_path` selects the SVD variant; it requires the real field,
/// and is the default the CLI applies to real input). The output is sorted
/// by (birth, death, intra-step discovery order) regardless of thread
/// count; per-step errors surface with their step index attached.
pub fn pmd(
    m: &PersistenceModule,
    use_real_path: bool,
    threads: usize,
) -> Result<(IntervalBasis, Vec<PersistencePair>)> {
    if use_real_path && !m.field().is_real() {
        return Err(Error::RealFieldRequired);
    }
    let truncated = m.truncate_essential();
    let n = m.len();
    let per_step = |b: usize| -> Result<BirthSet> {
        let r = if use_real_path {
            ssd_real(&truncated, b)
        } else {
            ssd(&truncated, b)
        };
        r.map_err(|e| e.at_step(b))
    };
    let results: Vec<Result<BirthSet>> = if threads <= 1 {
        (1..=n).map(per_step).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        pool.install(|| (1..=n).into_par_iter().map(per_step).collect())
    };
    let mut elements = Vec::new();
    for set in results {
        let set = set?;
        for g in set.generators {
            elements.push(IntervalBasisElement {
                birth: set.step,
                death: set.step + g.death_offset,
                vector: g.vector,
            });
        }
    }
    // Steps were visited in order and discovery order within a step is
    // death-ascending, so a stable sort realizes the documented order.
    elements.sort_by_key(|e| (e.birth, e.death));
    let pairs = elements
        .iter()
        .map(|e| PersistencePair {
            birth: e.birth,
            death: e.death,
        })
        .collect();
    Ok((IntervalBasis { elements }, pairs))
}

/// Certificate that `basis` is an interval basis for `m`.
///
/// Checks, per step `i`, that the images of the alive generators are
/// linearly independent and exactly `dim M_i` many; and, per element, death
/// correctness (`φ_{b,d}(v) = 0`, `φ_{b,d-1}(v) != 0`) and birth
/// correctness (`v` not in `im φ_{b-1}`). `m` is the original module;
/// deaths equal to `n + 1` refer to the virtual zero step.
///
/// Returns a description of the first violated clause, if any.
pub fn verify_interval_basis(
    m: &PersistenceModule,
    basis: &IntervalBasis,
) -> std::result::Result<(), String> {
    let n = m.len();
    let field = *m.field();
    for e in &basis.elements {
        if !(1..=n).contains(&e.birth) || e.death <= e.birth || e.death > n + 1 {
            return Err(format!("pair ({}, {}) out of range", e.birth, e.death));
        }
        if e.vector.len() != m.dim(e.birth) {
            return Err(format!(
                "generator of ({}, {}) has length {} but dim M_{} = {}",
                e.birth,
                e.death,
                e.vector.len(),
                e.birth,
                m.dim(e.birth)
            ));
        }
    }
    // Per-step direct sum: alive images form a basis.
    for i in 1..=n {
        let alive: Vec<&IntervalBasisElement> = basis
            .elements
            .iter()
            .filter(|e| e.birth <= i && i < e.death)
            .collect();
        if alive.len() != m.dim(i) {
            return Err(format!(
                "step {i}: {} alive generators but dim M_{i} = {}",
                alive.len(),
                m.dim(i)
            ));
        }
        let mut images = Vec::with_capacity(alive.len());
        for e in &alive {
            let phi = m.compose(e.birth, i).map_err(|err| err.to_string())?;
            images.push(phi.apply(&e.vector).map_err(|err| err.to_string())?);
        }
        let mat = Matrix::from_columns(field, m.dim(i), &images).map_err(|err| err.to_string())?;
        if linalg::rank(&mat) != alive.len() {
            return Err(format!(
                "step {i}: images of alive generators are linearly dependent"
            ));
        }
    }
    // Death and birth correctness per element.
    for e in &basis.elements {
        if e.death <= n {
            let phi = m.compose(e.birth, e.death).map_err(|err| err.to_string())?;
            let img = phi.apply(&e.vector).map_err(|err| err.to_string())?;
            let scale = phi.max_magnitude();
            if !img.iter().all(|x| field.is_zero_scaled(x, scale)) {
                return Err(format!(
                    "generator of ({}, {}) still alive at its death step",
                    e.birth, e.death
                ));
            }
        }
        let phi = m
            .compose(e.birth, e.death - 1)
            .map_err(|err| err.to_string())?;
        let img = phi.apply(&e.vector).map_err(|err| err.to_string())?;
        let scale = phi.max_magnitude().max(1.0);
        if img.iter().all(|x| field.is_zero_scaled(x, scale)) {
            return Err(format!(
                "generator of ({}, {}) dies before its death step",
                e.birth, e.death
            ));
        }
        let phi_prev = if e.birth == 1 {
            Matrix::zeros(field, m.dim(1), 0)
        } else {
            m.map(e.birth - 1).clone()
        };
        let im = image_basis(&phi_prev);
        let mut cols = im.vectors.clone();
        cols.push(e.vector.clone());
        let with_v = Matrix::from_columns(field, m.dim(e.birth), &cols).map_err(|err| err.to_string())?;
        if linalg::rank(&with_v) != im.len() + 1 {
            return Err(format!(
                "generator of ({}, {}) lies in the image of the previous step",
                e.birth, e.death
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSpec;
    use crate::oracle::barcode_oracle;
    use proptest::prelude::*;

    fn real() -> FieldSpec {
        FieldSpec::real_default()
    }

    fn rat() -> FieldSpec {
        FieldSpec::rational()
    }

    fn example_module(f: FieldSpec) -> PersistenceModule {
        let maps = vec![
            Matrix::from_i64_rows(&f, 2, 1, &[&[1], &[0]]).unwrap(),
            Matrix::from_i64_rows(&f, 1, 2, &[&[1, 1]]).unwrap(),
        ];
        PersistenceModule::new(f, vec![1, 2, 1], maps).unwrap()
    }

    fn pairs(v: &[(usize, usize)]) -> Vec<PersistencePair> {
        v.iter()
            .map(|&(birth, death)| PersistencePair { birth, death })
            .collect()
    }

    #[test]
    fn ssd_on_the_running_example() {
        let t = example_module(rat()).truncate_essential();

        let s1 = ssd(&t, 1).unwrap();
        assert_eq!(s1.generators.len(), 1);
        assert_eq!(s1.generators[0].death_offset, 3); // pair (1, 4)
        assert!(!rat().is_zero(&s1.generators[0].vector[0]));

        // The generator born at step 2 spans ker (1 1), so it dies entering
        // step 3: the composite (1 1) kills it at the first stage.
        let s2 = ssd(&t, 2).unwrap();
        assert_eq!(s2.generators.len(), 1);
        assert_eq!(s2.generators[0].death_offset, 1); // pair (2, 3)
        let v = &s2.generators[0].vector;
        let sum = rat().add(&v[0], &v[1]).unwrap();
        assert!(rat().is_zero(&sum), "generator must span ker (1 1)");

        let s3 = ssd(&t, 3).unwrap();
        assert!(s3.generators.is_empty());
    }

    #[test]
    fn ssd_real_matches_on_the_running_example() {
        let t = example_module(real()).truncate_essential();
        let s2 = ssd_real(&t, 2).unwrap();
        assert_eq!(s2.generators.len(), 1);
        assert_eq!(s2.generators[0].death_offset, 1);
        let v = &s2.generators[0].vector;
        // proportional to (1, -1)
        assert!((v[0].to_f64() + v[1].to_f64()).abs() < 1e-9);
        assert!(v[0].to_f64().abs() > 0.1);

        let s1 = ssd_real(&t, 1).unwrap();
        assert_eq!(s1.generators.len(), 1);
        assert_eq!(s1.generators[0].death_offset, 3);
    }

    #[test]
    fn pmd_on_the_running_example() {
        for (field, real_path) in [(rat(), false), (real(), true), (real(), false)] {
            let m = example_module(field);
            let (basis, diagram) = pmd(&m, real_path, 1).unwrap();
            assert_eq!(diagram, pairs(&[(1, 4), (2, 3)]));
            verify_interval_basis(&m, &basis).unwrap();
            let mut oracle = barcode_oracle(&m.truncate_essential());
            oracle.sort();
            assert_eq!(diagram, oracle);
        }
    }

    #[test]
    fn pmd_of_zero_module_is_empty() {
        let m = PersistenceModule::new(rat(), vec![0, 0, 0], vec![
            Matrix::zeros(rat(), 0, 0),
            Matrix::zeros(rat(), 0, 0),
        ])
        .unwrap();
        let (basis, diagram) = pmd(&m, false, 1).unwrap();
        assert!(basis.elements.is_empty());
        assert!(diagram.is_empty());
    }

    #[test]
    fn injective_maps_die_only_at_truncation() {
        // All maps injective: every generator of step 1 survives to the
        // virtual step; later steps contribute their cokernel dimensions.
        let f = rat();
        let maps = vec![
            Matrix::from_i64_rows(&f, 2, 1, &[&[1], &[0]]).unwrap(),
            Matrix::from_i64_rows(&f, 3, 2, &[&[1, 0], &[0, 1], &[0, 0]]).unwrap(),
        ];
        let m = PersistenceModule::new(f, vec![1, 2, 3], maps).unwrap();
        let (basis, diagram) = pmd(&m, false, 1).unwrap();
        assert_eq!(diagram, pairs(&[(1, 4), (2, 4), (3, 4)]));
        verify_interval_basis(&m, &basis).unwrap();
    }

    #[test]
    fn use_real_path_requires_real_field() {
        let m = example_module(rat());
        assert!(matches!(pmd(&m, true, 1), Err(Error::RealFieldRequired)));
    }

    #[test]
    fn per_step_errors_carry_their_step() {
        let t = example_module(rat()).truncate_essential();
        assert!(matches!(
            ssd(&t, 9),
            Err(Error::IndexOutOfRange { index: 9, .. })
        ));
    }

    fn lcg_module(f: FieldSpec, dims: &[usize], seed: &mut i64, modulus: i64) -> PersistenceModule {
        let mut maps = Vec::new();
        for w in dims.windows(2) {
            let (c, r) = (w[0], w[1]);
            let mut entries = Vec::with_capacity(r * c);
            for _ in 0..r * c {
                *seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                entries.push(f.from_i64(seed.rem_euclid(modulus) - modulus / 2));
            }
            maps.push(Matrix::new(f, r, c, entries).unwrap());
        }
        PersistenceModule::new(f, dims.to_vec(), maps).unwrap()
    }

    proptest! {
        #[test]
        fn pmd_agrees_with_the_rank_oracle(
            dims in proptest::collection::vec(0usize..5, 1..5),
            seed in 0i64..10_000,
        ) {
            let f = FieldSpec::prime(5).unwrap();
            let mut s = seed;
            let m = lcg_module(f, &dims, &mut s, 5);
            let (basis, diagram) = pmd(&m, false, 1).unwrap();
            let mut oracle = barcode_oracle(&m.truncate_essential());
            oracle.sort();
            prop_assert_eq!(diagram, oracle);
            prop_assert!(verify_interval_basis(&m, &basis).is_ok());
        }

        #[test]
        fn thread_count_does_not_change_output(
            dims in proptest::collection::vec(0usize..5, 1..5),
            seed in 0i64..1000,
        ) {
            let f = FieldSpec::prime(5).unwrap();
            let mut s = seed;
            let m = lcg_module(f, &dims, &mut s, 5);
            let (b1, d1) = pmd(&m, false, 1).unwrap();
            let (b2, d2) = pmd(&m, false, 2).unwrap();
            let (b8, d8) = pmd(&m, false, 8).unwrap();
            prop_assert_eq!(&d1, &d2);
            prop_assert_eq!(&d1, &d8);
            for (x, y) in b1.elements.iter().zip(b2.elements.iter().chain(b8.elements.iter())) {
                prop_assert_eq!(&x.vector, &y.vector);
            }
        }

        #[test]
        fn real_and_exact_paths_agree(
            dims in proptest::collection::vec(0usize..5, 1..5),
            seed in 0i64..1000,
        ) {
            let mut s = seed;
            let exact = lcg_module(rat(), &dims, &mut s, 7);
            let mut s = seed;
            let approx = lcg_module(real(), &dims, &mut s, 7);
            let (_, d_exact) = pmd(&exact, false, 1).unwrap();
            let (basis, d_real) = pmd(&approx, true, 1).unwrap();
            prop_assert_eq!(d_exact, d_real);
            prop_assert!(verify_interval_basis(&approx, &basis).is_ok());
        }
    }

    #[test]
    fn coherent_basis_falls_out_of_the_interval_basis() {
        // Pushing the generators forward yields a basis per step in which
        // each structure map becomes a 0/1 column-selection matrix.
        let f = rat();
        let mut seed = 42i64;
        for dims in [vec![2, 3, 2], vec![1, 2, 1], vec![3, 3, 3, 2]] {
            let m = lcg_module(f, &dims, &mut seed, 5);
            let (basis, _) = pmd(&m, false, 1).unwrap();
            verify_interval_basis(&m, &basis).unwrap();
            let n = m.len();
            // step_basis[i] = images of generators alive at i+1, in basis order
            let mut step_alive: Vec<Vec<usize>> = vec![Vec::new(); n];
            let mut step_cols: Vec<Vec<Vec<FieldScalar>>> = vec![Vec::new(); n];
            for (g_idx, e) in basis.elements.iter().enumerate() {
                for i in e.birth..e.death.min(n + 1) {
                    let phi = m.compose(e.birth, i).unwrap();
                    step_alive[i - 1].push(g_idx);
                    step_cols[i - 1].push(phi.apply(&e.vector).unwrap());
                }
            }
            for i in 1..n {
                let src = Matrix::from_columns(f, m.dim(i), &step_cols[i - 1]).unwrap();
                let dst = Matrix::from_columns(f, m.dim(i + 1), &step_cols[i]).unwrap();
                let mapped = m.map(i).mul(&src).unwrap();
                let coeffs = linalg::solve_columns(&dst, &mapped).unwrap().unwrap();
                // Column for generator g: unit vector at g's position in the
                // next step when it survives, zero otherwise.
                for (col, &g_idx) in step_alive[i - 1].iter().enumerate() {
                    for row in 0..coeffs.rows() {
                        let expected = if step_alive[i].get(row) == Some(&g_idx)
                            && basis.elements[g_idx].death > i + 1
                        {
                            f.one()
                        } else {
                            f.zero()
                        };
                        assert_eq!(coeffs.get(row, col), &expected, "dims {dims:?} map {i}");
                    }
                }
            }
        }
    }
}
