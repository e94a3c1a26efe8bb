//! Sparse subspace embeddings `Ω ∈ ℝ^{l×n}` stored by column.
//!
//! Column `j` of `Ω` lists the rows it touches, so forming `B = AΩᵀ` is one
//! scaled column addition per stored entry and mapping pivots of `B` back to
//! columns of `A` is a single scan of the structure.

mod leverage;

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::distr::weighted::WeightedIndex;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::matcore::{axpy, DenseMatrix};
use crate::rng::{self, streams};

pub use leverage::{leverage_scores_exact, LeverageScores};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EmbeddingKind {
    CountSketch,
    Osnap,
    LessIndRows,
    LessIndEnt,
}

impl EmbeddingKind {
    pub const ALL: [EmbeddingKind; 4] = [
        EmbeddingKind::CountSketch,
        EmbeddingKind::Osnap,
        EmbeddingKind::LessIndRows,
        EmbeddingKind::LessIndEnt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingKind::CountSketch => "countsketch",
            EmbeddingKind::Osnap => "osnap",
            EmbeddingKind::LessIndRows => "less-ind-rows",
            EmbeddingKind::LessIndEnt => "less-ind-ent",
        }
    }

    /// Whether construction needs leverage scores of the input.
    pub fn is_less(self) -> bool {
        matches!(self, EmbeddingKind::LessIndRows | EmbeddingKind::LessIndEnt)
    }
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmbeddingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        EmbeddingKind::ALL
            .into_iter()
            .find(|k| k.name() == key)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown embedding kind {s:?}")))
    }
}

/// `Ω ∈ ℝ^{l×n}` in compressed-column form.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseEmbedding {
    l: usize,
    n: usize,
    s: usize,
    kind: EmbeddingKind,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseEmbedding {
    /// Number of rows (embedding dimension).
    pub fn l(&self) -> usize {
        self.l
    }

    /// Number of columns (source dimension).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Nonzeros per column for CountSketch/OSNAP, per-row budget for LESS.
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Rows and values stored for column `j`, rows ascending.
    pub fn column(&self, j: usize) -> (&[usize], &[f64]) {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.row_idx[a..b], &self.values[a..b])
    }

    /// Number of stored entries in each row.
    pub fn row_loads(&self) -> Vec<usize> {
        let mut loads = vec![0; self.l];
        for &i in &self.row_idx {
            loads[i] += 1;
        }
        loads
    }

    /// Largest row load.
    pub fn max_row_load(&self) -> usize {
        self.row_loads().into_iter().max().unwrap_or(0)
    }

    /// Materializes `Ω` densely; for tests and small diagnostics.
    pub fn to_dense(&self) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(self.l, self.n);
        for j in 0..self.n {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                m[(i, j)] = v;
            }
        }
        m
    }

    /// Diagnostic dump, one `column,row,value` line per stored entry.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "column,row,value")?;
        for j in 0..self.n {
            let (rows, vals) = self.column(j);
            for (&i, &v) in rows.iter().zip(vals) {
                writeln!(w, "{j},{i},{v:.16e}")?;
            }
        }
        Ok(())
    }

    fn from_columns(l: usize, n: usize, s: usize, kind: EmbeddingKind, cols: Vec<Vec<(usize, f64)>>) -> Self {
        let mut col_ptr = Vec::with_capacity(n + 1);
        let nnz = cols.iter().map(Vec::len).sum();
        let mut row_idx = Vec::with_capacity(nnz);
        let mut values = Vec::with_capacity(nnz);
        col_ptr.push(0);
        for mut c in cols {
            c.sort_by_key(|&(i, _)| i);
            for (i, v) in c {
                row_idx.push(i);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        Self { l, n, s, kind, col_ptr, row_idx, values }
    }
}

/// One uniformly placed `±1` per column.
pub fn countsketch(n: usize, l: usize, seed: u64) -> Result<SparseEmbedding> {
    let mut e = osnap_blockwise(n, l, 1, seed)?;
    e.kind = EmbeddingKind::CountSketch;
    Ok(e)
}

/// Block-wise OSNAP: `l` is rounded up to a multiple of `s`, and every
/// column gets one `±1/√s` entry in each of the `s` row blocks.
pub fn osnap_blockwise(n: usize, l: usize, s: usize, seed: u64) -> Result<SparseEmbedding> {
    if l == 0 || s == 0 {
        return Err(Error::InvalidSpec(format!("embedding needs l >= 1 and s >= 1, got l={l}, s={s}")));
    }
    if s > l {
        return Err(Error::InvalidSpec(format!("sparsity s={s} exceeds embedding dimension l={l}")));
    }
    let block = l.div_ceil(s);
    let l = block * s;
    let val = 1.0 / (s as f64).sqrt();
    let mut rng = rng::stream(seed, streams::EMBEDDING);
    let mut col_ptr = Vec::with_capacity(n + 1);
    let mut row_idx = Vec::with_capacity(n * s);
    let mut values = Vec::with_capacity(n * s);
    col_ptr.push(0);
    for _ in 0..n {
        for b in 0..s {
            row_idx.push(b * block + rng.random_range(0..block));
            values.push(if rng.random::<bool>() { val } else { -val });
        }
        col_ptr.push(row_idx.len());
    }
    Ok(SparseEmbedding {
        l,
        n,
        s,
        kind: if s == 1 { EmbeddingKind::CountSketch } else { EmbeddingKind::Osnap },
        col_ptr,
        row_idx,
        values,
    })
}

/// Sampling probabilities `scores / Σ scores`, validated.
fn normalized(scores: &LeverageScores) -> Result<Vec<f64>> {
    let sc = &scores.scores;
    if sc.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidSpec("leverage scores must be finite and nonnegative".into()));
    }
    let total: f64 = sc.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateInput("all leverage scores are zero".into()));
    }
    Ok(sc.iter().map(|v| v / total).collect())
}

/// Raw draws `(row, column, value)` of the independent-rows construction.
fn ind_rows_draws(q: &[f64], l: usize, s: usize, seed: u64) -> Result<Vec<(usize, usize, f64)>> {
    let dist = WeightedIndex::new(q).map_err(|e| Error::DegenerateInput(e.to_string()))?;
    let mut rng = rng::stream(seed, streams::EMBEDDING);
    let sl = (s * l) as f64;
    let mut draws = Vec::with_capacity(s * l);
    for i in 0..l {
        for _ in 0..s {
            let j = dist.sample(&mut rng);
            let v = 1.0 / (sl * q[j]).sqrt();
            draws.push((i, j, if rng.random::<bool>() { v } else { -v }));
        }
    }
    Ok(draws)
}

/// LESS with independent rows: each of the `l` rows sums `s` draws of a
/// column `j` with probability `qⱼ ∝ scoreⱼ` and value `±1/√(s·l·qⱼ)`.
/// Repeated draws of the same `(row, column)` are merged into one entry.
pub fn less_ind_rows(scores: &LeverageScores, l: usize, s: usize, seed: u64) -> Result<SparseEmbedding> {
    if l == 0 || s == 0 {
        return Err(Error::InvalidSpec(format!("embedding needs l >= 1 and s >= 1, got l={l}, s={s}")));
    }
    let q = normalized(scores)?;
    let n = q.len();
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, j, v) in ind_rows_draws(&q, l, s, seed)? {
        match cols[j].last_mut() {
            Some((r, acc)) if *r == i => *acc += v,
            _ => cols[j].push((i, v)),
        }
    }
    for c in &mut cols {
        c.retain(|&(_, v)| v != 0.0);
    }
    Ok(SparseEmbedding::from_columns(l, n, s, EmbeddingKind::LessIndRows, cols))
}

/// Inclusion probabilities `pⱼ = min(1, c·qⱼ)` with `Σ pⱼ = budget`, or all
/// positive-score columns saturated when fewer than `budget` exist.
pub fn inclusion_probabilities(q: &[f64], budget: f64) -> Vec<f64> {
    let positive = q.iter().filter(|&&v| v > 0.0).count();
    if positive as f64 <= budget {
        return q.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
    }
    let mut order: Vec<usize> = (0..q.len()).filter(|&j| q[j] > 0.0).collect();
    order.sort_by(|&a, &b| q[b].total_cmp(&q[a]).then(a.cmp(&b)));
    let mut rest: f64 = order.iter().map(|&j| q[j]).sum();
    let mut c = budget / rest;
    for (saturated, &j) in order.iter().enumerate() {
        c = (budget - saturated as f64) / rest;
        if c * q[j] <= 1.0 {
            break;
        }
        rest -= q[j];
    }
    q.iter().map(|&v| (c * v).min(1.0)).collect()
}

/// LESS with independent entries: entry `(i, j)` is present with
/// probability `pⱼ` from [`inclusion_probabilities`] (`s` expected entries
/// per row) and holds `±1/√(l·pⱼ)`.
pub fn less_ind_ent(scores: &LeverageScores, l: usize, s: usize, seed: u64) -> Result<SparseEmbedding> {
    if l == 0 || s == 0 {
        return Err(Error::InvalidSpec(format!("embedding needs l >= 1 and s >= 1, got l={l}, s={s}")));
    }
    let q = normalized(scores)?;
    let n = q.len();
    let p = inclusion_probabilities(&q, s as f64);
    let mut rng = rng::stream(seed, streams::EMBEDDING);
    let mut cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
    for &pj in &p {
        if pj <= 0.0 {
            cols.push(Vec::new());
            continue;
        }
        let count = Binomial::new(l as u64, pj)
            .map_err(|e| Error::InvalidSpec(e.to_string()))?
            .sample(&mut rng) as usize;
        let v = 1.0 / (l as f64 * pj).sqrt();
        let rows = index::sample(&mut rng, l, count);
        cols.push(
            rows.into_iter()
                .map(|i| (i, if rng.random::<bool>() { v } else { -v }))
                .collect(),
        );
    }
    Ok(SparseEmbedding::from_columns(l, n, s, EmbeddingKind::LessIndEnt, cols))
}

/// `B = A Ωᵀ` (`d × l`) by sparse accumulation, `O(d·nnz(Ω))`.
pub fn apply_right(a: &DenseMatrix, omega: &SparseEmbedding) -> Result<DenseMatrix> {
    if a.cols() != omega.n {
        return Err(Error::DimensionMismatch {
            expected: (a.rows(), omega.n),
            got: a.shape(),
        });
    }
    let mut b = DenseMatrix::zeros(a.rows(), omega.l);
    for j in 0..omega.n {
        let (rows, vals) = omega.column(j);
        let src = a.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            axpy(v, src, b.col_mut(i));
        }
    }
    Ok(b)
}

/// Sorted columns of `A` whose column of `Ω` touches one of the selected rows.
pub fn support_union(omega: &SparseEmbedding, pivots: &[usize]) -> Result<Vec<usize>> {
    let mut selected = vec![false; omega.l];
    for &p in pivots {
        if p >= omega.l {
            return Err(Error::IndexOutOfRange { index: p, bound: omega.l });
        }
        selected[p] = true;
    }
    Ok((0..omega.n)
        .filter(|&j| omega.column(j).0.iter().any(|&i| selected[i]))
        .collect())
}

/// `n(1 − (1 − k/l)^s)`, the mean support size for `k` pivot rows.
pub fn expected_p(n: usize, l: usize, k: usize, s: usize) -> f64 {
    n as f64 * (1.0 - (1.0 - k as f64 / l as f64).powi(s as i32))
}

/// Default sparsity for OSNAP.
pub const DEFAULT_OSNAP_S: usize = 6;

/// Automatic `(l, s)` for a `d × n` input.
///
/// * CountSketch: `s = 1`, `l = min(⌈d²/ε²⌉, ⌊n/2⌋)`.
/// * OSNAP: `s = 6` unless given, `l = s·⌈2·d·ln d / s⌉`.
/// * LESS: `s = max(1, ⌈log₂ d⌉)` unless given, `l = ⌈d/ε²⌉`.
///
/// The result is never below `min(d, n)` nor below `s`.
pub fn auto_dims(kind: EmbeddingKind, d: usize, n: usize, s: usize, eps: f64) -> (usize, usize) {
    let df = d as f64;
    let (l, s) = match kind {
        EmbeddingKind::CountSketch => (((df * df) / (eps * eps)).ceil().min((n / 2) as f64) as usize, 1),
        EmbeddingKind::Osnap => {
            let s = if s == 0 { DEFAULT_OSNAP_S } else { s };
            (s * (2.0 * df * df.ln() / s as f64).ceil() as usize, s)
        }
        EmbeddingKind::LessIndRows | EmbeddingKind::LessIndEnt => {
            let s = if s == 0 { (df.log2().ceil() as usize).max(1) } else { s };
            ((df / (eps * eps)).ceil() as usize, s)
        }
    };
    let floor = d.min(n).max(s).max(1);
    let l = l.max(floor);
    if kind == EmbeddingKind::Osnap {
        (l.div_ceil(s) * s, s)
    } else {
        (l, s)
    }
}

/// Builds an embedding of the given kind; LESS kinds need `scores`.
pub fn build(
    kind: EmbeddingKind,
    n: usize,
    l: usize,
    s: usize,
    seed: u64,
    scores: Option<&LeverageScores>,
) -> Result<SparseEmbedding> {
    match kind {
        EmbeddingKind::CountSketch => countsketch(n, l, seed),
        EmbeddingKind::Osnap => {
            let mut e = osnap_blockwise(n, l, s, seed)?;
            e.kind = EmbeddingKind::Osnap;
            Ok(e)
        }
        EmbeddingKind::LessIndRows | EmbeddingKind::LessIndEnt => {
            let sc = scores.ok_or_else(|| Error::InvalidSpec(format!("{kind} needs leverage scores")))?;
            if sc.scores.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: (n, 1),
                    got: (sc.scores.len(), 1),
                });
            }
            if kind == EmbeddingKind::LessIndRows {
                less_ind_rows(sc, l, s, seed)
            } else {
                less_ind_ent(sc, l, s, seed)
            }
        }
    }
}
