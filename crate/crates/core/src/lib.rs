//! Column subset selection for short, wide matrices.
//!
//! The pipeline sketches the rows of `A ∈ ℝ^{d×n}` with a sparse embedding,
//! runs a strong rank-revealing QR on the small sketch, maps the selected
//! sketch columns back to the handful of source columns that formed them and
//! finishes with a second strong RRQR on that reduced set. The result is a
//! full pivoted factorization `AΠ = Q [R11 R12; 0 R22]` of the original
//! matrix.
//!
//! Modules:
//! - [`matcore`]: dense column-major matrices, Householder QR, singular values, file formats.
//! - [`testmat`]: seeded generators for the benchmark matrix families.
//! - [`sketch`]: CountSketch, block-wise OSNAP, leverage scores and LESS embeddings.
//! - [`rrqr`]: greedy QRCP and Gu–Eisenstat strong RRQR.
//! - [`seqrcs`]: the sketched column selection pipeline and its bound evaluators.
//! - [`luprrp`]: LU with panel rank-revealing pivoting and the GEPP baseline.
//! - [`metrics`]: ratio/residual summaries, the brute-force oracle and the desk-scale suite.

pub mod error;
pub mod luprrp;
pub mod matcore;
pub mod metrics;
pub mod rng;
pub mod rrqr;
pub mod seqrcs;
pub mod sketch;
pub mod testmat;

pub use error::{Error, Result};
pub use matcore::{DenseMatrix, Permutation};
pub use rrqr::PartialQR;
pub use seqrcs::{se_qrcs, SeqrcsConfig, SeqrcsResult};
pub use sketch::{EmbeddingKind, SparseEmbedding};
