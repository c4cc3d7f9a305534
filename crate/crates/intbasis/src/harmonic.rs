//! Harmonic persistence over the reals via the Hodge Laplacian.
//!
//! With the standard inner product on chains (the canonical basis is
//! orthonormal, so adjoints are transposes), the degree-`k` Laplacian is
//! `L_k = ∂_{k+1} ∂_{k+1}^T + ∂_k^T ∂_k`. Its kernel — the harmonic
//! chains — is isomorphic to `H_k`, and an orthonormal kernel basis `V`
//! both includes into the chain space and projects onto the harmonics via
//! `V^T`. A chain map `f_k` does not restrict to harmonics, but the
//! projected map `Φ = V_dst^T f_k V_src` gives structure maps that make
//! the per-step kernels a persistence module isomorphic to persistent
//! homology; only `Φ` is ever used here.
//!
//! Kernel dimensions are decided numerically (eigenvalues at most
//! `tol * λ_max`). Every step cross-checks that dimension against the
//! rank-based Betti number; a disagreement aborts with
//! [`Error::TolMismatch`] rather than silently corrupting the barcode.

use nalgebra::DMatrix;

use crate::error::Error;
use crate::homology::run_indexed;
use crate::linalg::{self, Matrix};
use crate::pmodule::PersistenceModule;
use crate::simplicial::ChainTower;
use crate::Result;

/// Orthonormal basis of the harmonic space `ker L_k` at one step.
#[derive(Debug, Clone)]
pub struct HarmonicStep {
    pub degree: usize,
    /// `dim C_k` x `β_k` matrix with orthonormal columns spanning `ker L_k`.
    pub basis: Matrix,
}

impl HarmonicStep {
    pub fn betti(&self) -> usize {
        self.basis.cols()
    }
}

/// The Hodge Laplacian `L_k = ∂_{k+1} ∂_{k+1}^T + ∂_k^T ∂_k`.
pub fn laplacian(d_k: &Matrix, d_k1: &Matrix) -> Result<Matrix> {
    if !d_k.field().is_real() {
        return Err(Error::RealFieldRequired);
    }
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
    let up = d_k1.mul(&d_k1.transpose())?;
    let down = d_k.transpose().mul(d_k)?;
    let n = d_k.cols();
    let f = *d_k.field();
    let mut l = Matrix::zeros(f, n, n);
    for r in 0..n {
        for c in 0..n {
            l.set(r, c, f.add(up.get(r, c), down.get(r, c))?);
        }
    }
    Ok(l)
}

/// Orthonormal kernel basis of `L_k` by symmetric eigendecomposition.
///
/// The numerical kernel consists of the eigenvalues `<= tol * λ_max`. The
/// resulting dimension must agree with the Betti number obtained from
/// singular-value ranks of the two boundaries; otherwise the tolerance has
/// misjudged a rank somewhere and the step fails with `TolMismatch`.
pub fn harmonic_step(degree: usize, d_k: &Matrix, d_k1: &Matrix) -> Result<HarmonicStep> {
    let l = laplacian(d_k, d_k1)?;
    let f = *d_k.field();
    let n = l.rows();
    let betti = (d_k.cols() - linalg::rank(d_k)) - linalg::rank(d_k1);
    if n == 0 {
        return Ok(HarmonicStep {
            degree,
            basis: Matrix::zeros(f, 0, 0),
        });
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(l.to_dmatrix());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let lambda_max = eig.eigenvalues[order[n - 1]].max(0.0);
    let threshold = f.tol() * lambda_max;
    let kernel: Vec<usize> = order
        .iter()
        .copied()
        .filter(|&i| eig.eigenvalues[i] <= threshold)
        .collect();
    if kernel.len() != betti {
        return Err(Error::TolMismatch {
            kernel_dim: kernel.len(),
            betti,
        });
    }
    let mut basis = DMatrix::zeros(n, kernel.len());
    for (col, &i) in kernel.iter().enumerate() {
        basis.set_column(col, &eig.eigenvectors.column(i));
    }
    Ok(HarmonicStep {
        degree,
        basis: Matrix::from_dmatrix(f, &basis),
    })
}

/// The projected map between harmonic spaces, `Φ = V_dst^T f_k V_src`.
pub fn harmonic_induced_map(f_k: &Matrix, src: &HarmonicStep, dst: &HarmonicStep) -> Result<Matrix> {
    if f_k.cols() != src.basis.rows() || f_k.rows() != dst.basis.rows() {
        return Err(Error::DimensionMismatch(format!(
            "chain map is {}x{} between chain spaces of dims {} and {}",
            f_k.rows(),
            f_k.cols(),
            src.basis.rows(),
            dst.basis.rows()
        )));
    }
    dst.basis.transpose().mul(&f_k.mul(&src.basis)?)
}

/// The harmonic persistence module of a real tower: step `i` is
/// `ker L_k` of the `i`-th complex, maps are the projected `Φ`'s. Its
/// barcode equals the barcode of the homology route.
pub fn build_harmonic_module(
    tower: &ChainTower,
    degree: usize,
    threads: usize,
) -> Result<PersistenceModule> {
    harmonic_pipeline(tower, degree, threads).map(|(_, m)| m)
}

/// Like [`build_harmonic_module`], additionally returning the per-step
/// kernel bases, which embed module-level generators back into chain
/// coordinates.
pub fn harmonic_pipeline(
    tower: &ChainTower,
    degree: usize,
    threads: usize,
) -> Result<(Vec<HarmonicStep>, PersistenceModule)> {
    if !tower.field().is_real() {
        return Err(Error::RealFieldRequired);
    }
    let n = tower.len();
    let steps: Vec<HarmonicStep> = run_indexed(n, threads, |s| {
        harmonic_step(degree, &tower.boundary(s, degree), &tower.boundary(s, degree + 1))
            .map_err(|e| e.at_step(s + 1))
    })?;
    let maps: Vec<Matrix> = run_indexed(n - 1, threads, |s| {
        harmonic_induced_map(&tower.chain_map(s, degree), &steps[s], &steps[s + 1])
            .map_err(|e| e.at_step(s + 1))
    })?;
    let dims = steps.iter().map(HarmonicStep::betti).collect();
    let module = PersistenceModule::new(*tower.field(), dims, maps)?;
    Ok((steps, module))
}
