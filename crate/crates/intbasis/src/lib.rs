//! Decomposition of finite-type persistence modules into interval bases.
//!
//! A persistence module is a finite sequence of vector spaces `M_1, …, M_n`
//! over a field, connected by linear structure maps `φ_i: M_i → M_{i+1}`.
//! This crate computes an *interval basis* for such a module: a set of
//! homogeneous generators whose generated submodules sum directly to the
//! whole module. The persistence diagram (barcode) falls out of the basis
//! for free, but the basis itself is strictly more information than the
//! diagram: its generators certify the direct-sum decomposition step by
//! step.
//!
//! The decomposition runs independently per birth step, so it parallelizes
//! over the module's steps (see [`decompose::pmd`]). Coefficients may be
//! taken in a prime field `Z_p`, the exact rationals, or floating-point
//! reals; over the reals a dedicated SVD-based variant is used.
//!
//! Two standard pipelines produce persistence modules from simplicial
//! filtrations:
//!
//! * [`homology`] — per-step homology via left-to-right boundary reduction
//!   and induced maps between homology spaces (any coefficient field);
//! * [`harmonic`] — per-step kernels of the Hodge Laplacian and projected
//!   maps between them (real coefficients), isomorphic to the homology
//!   route as a persistence module.
//!
//! [`oracle`] recovers the diagram (but no generators) from the rank
//! function of all composite maps; it shares no code with the decomposition
//! and exists to cross-check it.
//!
//! ```
//! use intbasis::field::FieldSpec;
//! use intbasis::linalg::Matrix;
//! use intbasis::pmodule::PersistenceModule;
//! use intbasis::decompose::pmd;
//!
//! // R --(1,0)^T--> R^2 --(1 1)--> R
//! let f = FieldSpec::real_default();
//! let maps = vec![
//!     Matrix::from_i64_rows(&f, 2, 1, &[&[1], &[0]]).unwrap(),
//!     Matrix::from_i64_rows(&f, 1, 2, &[&[1, 1]]).unwrap(),
//! ];
//! let module = PersistenceModule::new(f, vec![1, 2, 1], maps).unwrap();
//! let (basis, pairs) = pmd(&module, true, 1).unwrap();
//! assert_eq!(basis.elements.len(), pairs.len());
//! ```

pub mod cli;
pub mod decompose;
pub mod error;
pub mod field;
pub mod harmonic;
pub mod homology;
pub mod io;
pub mod linalg;
pub mod oracle;
pub mod pmodule;
pub mod simplicial;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
