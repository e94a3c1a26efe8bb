//! Column subset selection by sketching followed by strong RRQR.
//!
//! 1. Build a sparse embedding `Ω` and form `B = AΩᵀ`.
//! 2. Run strong RRQR on `B` with rank `k′`; its pivots are rows of `Ω`.
//! 3. Every column of `A` that `Ω` maps into a pivot row is a candidate;
//!    these `p` columns form `Ã₁`.
//! 4. Run strong RRQR on `Ã₁` with rank `k` and extend the factorization to
//!    all of `A` with `Q̃ᵀÃ₂`.

mod bounds;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::matcore::{DenseMatrix, Permutation};
use crate::rrqr::{srrqr, PartialQR, DEFAULT_F};
use crate::sketch::{self, EmbeddingKind, SparseEmbedding};

pub use bounds::{rho1_oblivious, rho2_oblivious, rho_less, verify_factors, verify_guarantee, GuaranteeReport};

#[derive(Clone, Debug, PartialEq)]
pub struct SeqrcsConfig {
    pub k: usize,
    /// Sketch-stage rank; 0 picks it automatically.
    pub kprime: usize,
    pub f: f64,
    pub kind: EmbeddingKind,
    /// Embedding dimension; 0 picks it automatically.
    pub l: usize,
    /// Nonzeros per column (per row for LESS); 0 picks the default.
    pub s: usize,
    pub seed: u64,
    /// Distortion used by the automatic dimension rules and the bounds.
    pub eps: f64,
}

impl SeqrcsConfig {
    /// CountSketch, automatic `k′` and `l`, `f = 2`, `ε = 0.5`, seed 0.
    pub fn new(k: usize) -> Self {
        Self {
            k,
            kprime: 0,
            f: DEFAULT_F,
            kind: EmbeddingKind::CountSketch,
            l: 0,
            s: 0,
            seed: 0,
            eps: 0.5,
        }
    }

    pub fn with_embedding(mut self, kind: EmbeddingKind, s: usize) -> Self {
        self.kind = kind;
        self.s = s;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_l(mut self, l: usize) -> Self {
        self.l = l;
        self
    }

    pub fn with_kprime(mut self, kprime: usize) -> Self {
        self.kprime = kprime;
        self
    }
}

/// Wall-clock time per stage, milliseconds.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    /// Embedding construction (and leverage scores) plus `B = AΩᵀ`.
    pub sketch_ms: f64,
    pub srrqr_b_ms: f64,
    pub support_ms: f64,
    pub srrqr_a1_ms: f64,
    pub assemble_ms: f64,
    pub total_ms: f64,
}

impl StageTimings {
    /// Time spent choosing the columns, i.e. everything but assembly.
    pub fn pivot_ms(&self) -> f64 {
        self.sketch_ms + self.srrqr_b_ms + self.support_ms + self.srrqr_a1_ms
    }
}

#[derive(Clone, Debug)]
pub struct SeqrcsResult {
    /// Factorization of the whole of `A`.
    pub factors: PartialQR,
    /// Number of candidate columns.
    pub p: usize,
    /// Candidate columns of `A`, ascending.
    pub indices_a1: Vec<usize>,
    /// Pivot columns of `B` (rows of `Ω`), in pivot order.
    pub pivots_b: Vec<usize>,
    pub l: usize,
    pub s: usize,
    /// Sketch-stage rank actually used.
    pub kprime: usize,
    /// Largest number of entries in a row of `Ω`.
    pub max_row_load: usize,
    pub kind: EmbeddingKind,
    pub timings: StageTimings,
}

impl SeqrcsResult {
    /// The bound analysis assumes `p ≥ l`; runs below that are annotated.
    pub fn p_below_l(&self) -> bool {
        self.p < self.l
    }
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn validate(a: &DenseMatrix, cfg: &SeqrcsConfig) -> Result<()> {
    let (d, n) = a.shape();
    if d == 0 || n == 0 {
        return Err(Error::InvalidSpec("empty input matrix".into()));
    }
    if d > n {
        return Err(Error::InvalidSpec(format!("input must be wide (d <= n), got {d}x{n}")));
    }
    if cfg.k == 0 || cfg.k > d {
        return Err(Error::InvalidSpec(format!("k={} must lie in 1..={d}", cfg.k)));
    }
    if cfg.kprime != 0 && (cfg.kprime < cfg.k || cfg.kprime > d) {
        return Err(Error::InvalidSpec(format!(
            "k'={} must lie in k..=d ({}..={d})",
            cfg.kprime, cfg.k
        )));
    }
    if !(cfg.f > 1.0 && cfg.f.is_finite()) {
        return Err(Error::InvalidSpec(format!("f must exceed 1, got {}", cfg.f)));
    }
    if !(cfg.eps > 0.0 && cfg.eps < 1.0) {
        return Err(Error::InvalidSpec(format!("eps must lie in (0, 1), got {}", cfg.eps)));
    }
    Ok(())
}

fn resolve_dims(cfg: &SeqrcsConfig, d: usize, n: usize) -> (usize, usize) {
    if cfg.l == 0 {
        return sketch::auto_dims(cfg.kind, d, n, cfg.s, cfg.eps);
    }
    let s = match (cfg.s, cfg.kind) {
        (0, EmbeddingKind::CountSketch) => 1,
        (0, EmbeddingKind::Osnap) => sketch::DEFAULT_OSNAP_S.min(cfg.l),
        (0, _) => sketch::auto_dims(cfg.kind, d, n, 0, cfg.eps).1,
        (s, _) => s,
    };
    (cfg.l, s)
}

/// Runs the pipeline on a wide `d × n` matrix.
///
/// With `k′ = 0` the sketch rank starts at `k` and doubles (capped at
/// `min(d, l)`) until the candidate set has at least `d` columns.
pub fn se_qrcs(a: &DenseMatrix, cfg: &SeqrcsConfig) -> Result<SeqrcsResult> {
    validate(a, cfg)?;
    let start = Instant::now();
    let (d, n) = a.shape();
    let mut timings = StageTimings::default();

    let t = Instant::now();
    let (l, s) = resolve_dims(cfg, d, n);
    let scores = if cfg.kind.is_less() {
        Some(sketch::leverage_scores_exact(a)?)
    } else {
        None
    };
    let omega = sketch::build(cfg.kind, n, l, s, cfg.seed, scores.as_ref())?;
    let b = sketch::apply_right(a, &omega)?;
    timings.sketch_ms = ms(t);

    let l = omega.l();
    let cap = d.min(l);
    let mut kprime = if cfg.kprime == 0 { cfg.k.min(cap) } else { cfg.kprime };
    if kprime > l {
        return Err(Error::InvalidSpec(format!("k'={kprime} exceeds embedding dimension l={l}")));
    }
    let (pivots_b, indices) = loop {
        let t = Instant::now();
        let fb = srrqr(&b, kprime, cfg.f)?;
        timings.srrqr_b_ms += ms(t);
        let t = Instant::now();
        let pivots = fb.selected().to_vec();
        let indices = sketch::support_union(&omega, &pivots)?;
        timings.support_ms += ms(t);
        if cfg.kprime == 0 && indices.len() < d && kprime < cap && fb.k == kprime {
            kprime = (2 * kprime).min(cap);
            continue;
        }
        break (pivots, indices);
    };
    let p = indices.len();
    if p == 0 {
        return Err(Error::EmptySupport);
    }

    let t = Instant::now();
    let a1 = a.select_columns(&indices)?;
    let front = srrqr(&a1, cfg.k.min(p).min(d), cfg.f)?;
    timings.srrqr_a1_ms = ms(t);

    let t = Instant::now();
    let factors = assemble(a, &indices, front)?;
    timings.assemble_ms = ms(t);
    timings.total_ms = ms(start);

    Ok(SeqrcsResult {
        factors,
        p,
        indices_a1: indices,
        kprime: pivots_b.len(),
        pivots_b,
        l,
        s: omega.s(),
        max_row_load: omega.max_row_load(),
        kind: omega.kind(),
        timings,
    })
}

/// Extends a factorization of the candidate columns to all of `A`:
/// `Π = [candidates ∘ Π̃, rest]`, `R = [R̃ | Q̃ᵀÃ₂]`.
fn assemble(a: &DenseMatrix, indices: &[usize], front: PartialQR) -> Result<PartialQR> {
    let (d, n) = a.shape();
    let p = indices.len();
    let mut chosen = vec![false; n];
    for &j in indices {
        chosen[j] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&j| !chosen[j]).collect();
    let mut map: Vec<usize> = front.perm.as_slice().iter().map(|&t| indices[t]).collect();
    map.extend_from_slice(&rest);
    let perm = Permutation::new(map)?;

    let mut r = DenseMatrix::zeros(d, n);
    r.set_block(0, 0, &front.r);
    if !rest.is_empty() {
        let a2 = a.select_columns(&rest)?;
        r.set_block(0, p, &front.q.t_matmul(&a2)?);
    }
    let mut out = PartialQR::from_parts(front.k, front.q, r, perm)?;
    out.swaps = front.swaps;
    Ok(out)
}

/// The embedding a run with this configuration would use, for inspection.
pub fn embedding_for(a: &DenseMatrix, cfg: &SeqrcsConfig) -> Result<SparseEmbedding> {
    validate(a, cfg)?;
    let (d, n) = a.shape();
    let (l, s) = resolve_dims(cfg, d, n);
    let scores = if cfg.kind.is_less() {
        Some(sketch::leverage_scores_exact(a)?)
    } else {
        None
    };
    sketch::build(cfg.kind, n, l, s, cfg.seed, scores.as_ref())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::singular_values;
    use crate::testmat::{gen_gaussian, gen_lowrank};

    #[test]
    fn diagonal_with_zero_padding() {
        let mut a = DenseMatrix::zeros(5, 12);
        for (i, v) in [5.0, 4.0, 3.0, 2.0, 1.0].into_iter().enumerate() {
            a[(i, i)] = v;
        }
        let cfg = SeqrcsConfig::new(2).with_l(8);
        let res = se_qrcs(&a, &cfg).unwrap();
        let f = &res.factors;
        assert!(f.reconstruction_error(&a).unwrap() < 1e-15);
        let sv_a = singular_values(&a);
        let sv_r = singular_values(&f.r11());
        for (x, y) in sv_r.iter().zip(&sv_a) {
            assert!(*x <= y * (1.0 + 1e-12));
        }
        let rho1 = rho1_oblivious(f.k, res.kprime, res.p, res.l, 2.0, 0.5).unwrap();
        let resid = crate::matcore::spectral_norm(&f.r22());
        assert!(resid <= rho1 * 3.0);
    }

    #[test]
    fn exact_low_rank_capture() {
        let a = gen_lowrank(6, 40, 3, 5).unwrap();
        let res = se_qrcs(&a, &SeqrcsConfig::new(3).with_seed(2)).unwrap();
        let resid = crate::matcore::spectral_norm(&res.factors.r22());
        assert!(resid <= 1e-10 * crate::matcore::spectral_norm(&a));
    }

    #[test]
    fn result_invariants() {
        let a = gen_gaussian(10, 300, 1);
        for kind in [EmbeddingKind::CountSketch, EmbeddingKind::Osnap, EmbeddingKind::LessIndRows, EmbeddingKind::LessIndEnt] {
            let cfg = SeqrcsConfig::new(4).with_embedding(kind, 0).with_seed(3);
            let res = se_qrcs(&a, &cfg).unwrap();
            let f = &res.factors;
            assert!(f.reconstruction_error(&a).unwrap() < 1e-13, "{kind}");
            assert_eq!(f.k, 4);
            assert!(f.selected().iter().all(|j| res.indices_a1.binary_search(j).is_ok()));
            assert!(res.indices_a1.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(res.p, res.indices_a1.len());
            assert!(res.p >= 10 || res.kprime == 10.min(res.l), "auto k' should reach p >= d");
            let loads = embedding_for(&a, &cfg).unwrap().row_loads();
            let cover: usize = res.pivots_b.iter().map(|&i| loads[i]).sum();
            assert!(res.p <= cover.min(300));
        }
    }

    #[test]
    fn bad_configs() {
        let a = gen_gaussian(4, 10, 0);
        assert!(se_qrcs(&a, &SeqrcsConfig::new(0)).is_err());
        assert!(se_qrcs(&a, &SeqrcsConfig::new(5)).is_err());
        assert!(se_qrcs(&a, &SeqrcsConfig::new(3).with_kprime(2)).is_err());
        assert!(se_qrcs(&a.transpose(), &SeqrcsConfig::new(2)).is_err());
        let mut cfg = SeqrcsConfig::new(2);
        cfg.eps = 1.0;
        assert!(se_qrcs(&a, &cfg).is_err());
    }

    #[test]
    fn zero_matrix_has_empty_support() {
        let a = DenseMatrix::zeros(3, 10);
        assert!(matches!(se_qrcs(&a, &SeqrcsConfig::new(2)), Err(Error::EmptySupport)));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let a = gen_gaussian(8, 100, 4);
        let cfg = SeqrcsConfig::new(3).with_embedding(EmbeddingKind::Osnap, 3).with_seed(9);
        let x = se_qrcs(&a, &cfg).unwrap();
        let y = se_qrcs(&a, &cfg).unwrap();
        assert_eq!(x.factors.perm, y.factors.perm);
        assert_eq!(x.factors.r, y.factors.r);
        assert_eq!(x.indices_a1, y.indices_a1);
    }
}
