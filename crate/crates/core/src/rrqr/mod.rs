//! Rank-revealing QR: greedy column pivoting and the strong (Gu–Eisenstat)
//! variant, plus checks of the strong rank-revealing condition.

mod strong;

use crate::error::{Error, Result};
use crate::matcore::{invert_upper, pivoted_qr, solve_upper, DenseMatrix, Permutation};

pub use strong::srrqr;

/// Default strong RRQR parameter.
pub const DEFAULT_F: f64 = 2.0;

/// `A Π = Q R` with the leading `k` columns of `R` upper triangular.
///
/// `r` is stored in full (`d × n`): `R₁₁ = r[..k, ..k]`, `R₁₂ = r[..k, k..]`,
/// `R₂₂ = r[k.., k..]`, and `r[k.., ..k]` is zero.
#[derive(Clone, Debug)]
pub struct PartialQR {
    pub k: usize,
    /// Orthogonal, `d × d`.
    pub q: DenseMatrix,
    pub r: DenseMatrix,
    pub perm: Permutation,
    /// Column exchanges performed after the greedy pass.
    pub swaps: usize,
}

impl PartialQR {
    pub fn from_parts(k: usize, q: DenseMatrix, r: DenseMatrix, perm: Permutation) -> Result<Self> {
        let (d, n) = r.shape();
        if q.shape() != (d, d) {
            return Err(Error::DimensionMismatch { expected: (d, d), got: q.shape() });
        }
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: (n, 1), got: (perm.len(), 1) });
        }
        if k > d.min(n) {
            return Err(Error::InvalidSpec(format!("rank {k} exceeds {d}x{n}")));
        }
        Ok(Self { k, q, r, perm, swaps: 0 })
    }

    pub fn d(&self) -> usize {
        self.r.rows()
    }

    pub fn n(&self) -> usize {
        self.r.cols()
    }

    pub fn r11(&self) -> DenseMatrix {
        self.r.block(0, self.k, 0, self.k)
    }

    pub fn r12(&self) -> DenseMatrix {
        self.r.block(0, self.k, self.k, self.n())
    }

    pub fn r22(&self) -> DenseMatrix {
        self.r.block(self.k, self.d(), self.k, self.n())
    }

    /// Indices of the selected columns, in pivot order.
    pub fn selected(&self) -> &[usize] {
        &self.perm.as_slice()[..self.k]
    }

    /// `R₁₁⁻¹ R₁₂`.
    pub fn interpolation(&self) -> Result<DenseMatrix> {
        solve_upper(&self.r11(), &self.r12())
    }

    /// `ωᵢ`: 2-norms of the rows of `R₁₁⁻¹`.
    pub fn omegas(&self) -> Result<Vec<f64>> {
        let inv = invert_upper(&self.r11())?;
        Ok((0..self.k)
            .map(|i| inv.row(i).iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect())
    }

    /// `γⱼ`: 2-norms of the columns of `R₂₂`.
    pub fn gammas(&self) -> Vec<f64> {
        (self.k..self.n())
            .map(|j| self.r.col(j)[self.k..].iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    /// `‖A Π − Q R‖_F / ‖A‖_F`.
    pub fn reconstruction_error(&self, a: &DenseMatrix) -> Result<f64> {
        let ap = a.permute_columns(&self.perm)?;
        let qr = self.q.matmul(&self.r)?;
        let norm = a.frobenius_norm();
        let err = ap.sub(&qr)?.frobenius_norm();
        Ok(if norm == 0.0 { err } else { err / norm })
    }
}

fn check_rank(a: &DenseMatrix, k: usize) -> Result<()> {
    let (d, n) = a.shape();
    if k == 0 || k > d.min(n) {
        return Err(Error::InvalidSpec(format!("rank k={k} must lie in 1..={}", d.min(n))));
    }
    Ok(())
}

/// Greedy QR with column pivoting stopped after `k` steps, or earlier once
/// the largest remaining column norm drops to `1e−14·‖A‖_F` (the returned
/// `k` is then the number of steps taken).
pub fn qrcp(a: &DenseMatrix, k: usize) -> Result<PartialQR> {
    check_rank(a, k)?;
    let f = pivoted_qr(a, k, 1e-14 * a.frobenius_norm());
    let q = f.q_full();
    Ok(PartialQR {
        k: f.rank,
        q,
        r: f.r,
        perm: f.perm,
        swaps: 0,
    })
}

/// Strong RRQR condition diagnostics for a factorization.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionReport {
    /// `max_{i,j} (R₁₁⁻¹R₁₂)ᵢⱼ² + ωᵢ²γⱼ² − f²`; nonpositive when the condition holds.
    pub max_excess: f64,
    /// `max_j Σᵢ [(R₁₁⁻¹R₁₂)ᵢⱼ² + ωᵢ²γⱼ²] − f²k`; nonpositive when the
    /// column-summed form holds.
    pub column_excess: f64,
    /// `‖R₁₁⁻¹R₁₂‖_max`.
    pub max_abs_interp: f64,
}

pub fn verify_condition(fac: &PartialQR, f: f64) -> Result<ConditionReport> {
    if fac.k == 0 {
        return Err(Error::InvalidSpec("condition needs k >= 1".into()));
    }
    let m = fac.interpolation()?;
    let omega = fac.omegas()?;
    let gamma = fac.gammas();
    let f2 = f * f;
    let mut max_val = f64::NEG_INFINITY;
    let mut max_col = f64::NEG_INFINITY;
    let mut max_abs: f64 = 0.0;
    for (j, g) in gamma.iter().enumerate() {
        let col = m.col(j);
        let mut sum = 0.0;
        for (mij, w) in col.iter().zip(&omega) {
            let v = mij * mij + (w * g) * (w * g);
            max_val = max_val.max(v);
            sum += v;
            max_abs = max_abs.max(mij.abs());
        }
        max_col = max_col.max(sum);
    }
    if gamma.is_empty() {
        max_val = 0.0;
        max_col = 0.0;
    }
    Ok(ConditionReport {
        max_excess: max_val - f2,
        column_excess: max_col - f2 * fac.k as f64,
        max_abs_interp: max_abs,
    })
}

/// `√(1 + f²k(n−k))`.
pub fn srrqr_bound(k: usize, n: usize, f: f64) -> f64 {
    let kf = k as f64;
    (1.0 + f * f * kf * (n as f64 - kf)).sqrt()
}
