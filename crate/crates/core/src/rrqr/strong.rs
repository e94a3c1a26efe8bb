//! Gu–Eisenstat column exchanges on top of a greedy factorization.
//!
//! Each exchange swaps a selected column with an unselected one and restores
//! the triangular structure with plane rotations and one reflector, in
//! `O((d + k)·n)` work. `R₁₁⁻¹R₁₂`, the row norms of `R₁₁⁻¹` and the column
//! norms of `R₂₂` are updated in place and recomputed from scratch every
//! [`REFRESH_EVERY`] exchanges and before termination is declared.

use super::{check_rank, qrcp, PartialQR};
use crate::error::{Error, Result};
use crate::matcore::{back_substitute, invert_upper, solve_upper, DenseMatrix, Givens, Reflector};

pub(crate) const REFRESH_EVERY: usize = 32;

/// Interpolation matrix and norms tracked between exchanges.
struct Tracked {
    /// `R₁₁⁻¹R₁₂`, `k × (n−k)`.
    m: DenseMatrix,
    /// Squared row norms of `R₁₁⁻¹`.
    omega2: Vec<f64>,
    /// Squared column norms of `R₂₂`.
    gamma2: Vec<f64>,
}

impl Tracked {
    fn fresh(fac: &PartialQR) -> Result<Self> {
        let k = fac.k;
        let r11 = fac.r11();
        let inv = invert_upper(&r11)?;
        let omega2 = (0..k).map(|i| inv.row(i).iter().map(|v| v * v).sum()).collect();
        let m = solve_upper(&r11, &fac.r12())?;
        Ok(Self { m, omega2, gamma2: gamma2(fac) })
    }

    /// Largest `Mᵢⱼ² + ωᵢ²γⱼ²` with its position; first in column-major order on ties.
    fn worst(&self) -> (f64, usize, usize) {
        let mut best = (f64::NEG_INFINITY, 0, 0);
        for (j, g2) in self.gamma2.iter().enumerate() {
            for (i, (mij, w2)) in self.m.col(j).iter().zip(&self.omega2).enumerate() {
                let v = mij * mij + w2 * g2;
                if v > best.0 {
                    best = (v, i, j);
                }
            }
        }
        best
    }
}

fn gamma2(fac: &PartialQR) -> Vec<f64> {
    (fac.k..fac.n())
        .map(|j| fac.r.col(j)[fac.k..].iter().map(|v| v * v).sum())
        .collect()
}

/// Strong rank-revealing QR with parameter `f > 1`.
///
/// Starts from [`qrcp`] and exchanges the selected/unselected pair with the
/// largest `(R₁₁⁻¹R₁₂)ᵢⱼ² + ωᵢ²γⱼ²` while that value exceeds `f²`. Every
/// exchange multiplies `|det R₁₁|` by more than `f`; more than `4·n·k`
/// exchanges is reported as [`Error::TerminationFailure`].
pub fn srrqr(a: &DenseMatrix, k: usize, f: f64) -> Result<PartialQR> {
    if !f.is_finite() || f <= 1.0 {
        return Err(Error::InvalidSpec(format!("strong RRQR needs f > 1, got {f}")));
    }
    check_rank(a, k)?;
    let mut fac = qrcp(a, k)?;
    let (k, n) = (fac.k, fac.n());
    if k == 0 || k == n {
        return Ok(fac);
    }
    let f2 = f * f;
    let cap = 4 * n * k;
    let mut state = Tracked::fresh(&fac)?;
    let mut stale = 0;
    loop {
        let (val, i, j) = state.worst();
        if val <= f2 {
            if stale == 0 {
                break;
            }
            state = Tracked::fresh(&fac)?;
            stale = 0;
            continue;
        }
        if fac.swaps >= cap {
            return Err(Error::TerminationFailure { iterations: fac.swaps });
        }
        exchange(&mut fac, &mut state, i, j);
        fac.swaps += 1;
        stale += 1;
        if stale == REFRESH_EVERY {
            state = Tracked::fresh(&fac)?;
            stale = 0;
        }
    }
    normalize_diagonal(&mut fac);
    Ok(fac)
}

/// Flips rows of `R` (and columns of `Q`) to make `diag R₁₁` nonnegative.
fn normalize_diagonal(fac: &mut PartialQR) {
    for t in 0..fac.k {
        if fac.r[(t, t)] < 0.0 {
            for c in 0..fac.n() {
                fac.r[(t, c)] = -fac.r[(t, c)];
            }
            fac.q.col_mut(t).iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Exchanges selected column `i` with unselected column `k + j`.
fn exchange(fac: &mut PartialQR, st: &mut Tracked, i: usize, j: usize) {
    let (d, n, k) = (fac.d(), fac.n(), fac.k);
    let r = &mut fac.r;
    let q = &mut fac.q;

    // Move selected column i to the last selected slot and re-triangularize
    // the resulting Hessenberg block. R₁₁⁻¹R₁₂ and ω only permute rows.
    if i + 1 < k {
        for t in i..k - 1 {
            r.swap_cols(t, t + 1);
            fac.perm.swap(t, t + 1);
        }
        for l in 0..n - k {
            st.m.col_mut(l)[i..k].rotate_left(1);
        }
        st.omega2[i..k].rotate_left(1);
        for t in i..k - 1 {
            if let Some((g, rho)) = Givens::zeroing(r[(t, t)], r[(t + 1, t)]) {
                g.rotate_rows(r, t, t + 1);
                r[(t, t)] = rho;
                r[(t + 1, t)] = 0.0;
                g.rotate_cols(q, t);
            }
        }
    }

    // Bring unselected column j to the front of the trailing block and
    // reduce its R₂₂ part to a single leading entry.
    if j != 0 {
        r.swap_cols(k, k + j);
        fac.perm.swap(k, k + j);
        st.m.swap_cols(0, j);
        st.gamma2.swap(0, j);
    }
    if d > k + 1 {
        let (h, beta) = Reflector::annihilate(k, &r.col(k)[k..]);
        {
            let c = r.col_mut(k);
            c[k] = beta;
            c[k + 1..].iter_mut().for_each(|v| *v = 0.0);
        }
        for c in k + 1..n {
            h.apply(r.col_mut(c));
        }
        h.apply_right(q);
    }

    // Quantities of the leading (k−1) block, taken before the swap.
    let g_old = r[(k - 1, k - 1)];
    let mut u = r.col(k - 1)[..k - 1].to_vec();
    back_substitute(r, &mut u);
    let m_last0 = st.m[(k - 1, 0)];
    let u1: Vec<f64> = st.m.col(0)[..k - 1]
        .iter()
        .zip(&u)
        .map(|(m, ut)| m + ut * m_last0)
        .collect();

    r.swap_cols(k - 1, k);
    fac.perm.swap(k - 1, k);
    if d > k {
        if let Some((g, rho)) = Givens::zeroing(r[(k - 1, k - 1)], r[(k, k - 1)]) {
            g.rotate_rows(r, k - 1, k);
            r[(k - 1, k - 1)] = rho;
            r[(k, k - 1)] = 0.0;
            g.rotate_cols(q, k - 1);
        }
    }
    let rho = r[(k - 1, k - 1)];

    for l in 0..n - k {
        let last = r[(k - 1, k + l)] / rho;
        let col = st.m.col_mut(l);
        let carried = col[k - 1];
        for t in 0..k - 1 {
            let base = if l == 0 { u[t] } else { col[t] + u[t] * carried };
            col[t] = base - u1[t] * last;
        }
        col[k - 1] = last;
    }
    for t in 0..k - 1 {
        let w = st.omega2[t] - (u[t] / g_old).powi(2) + (u1[t] / rho).powi(2);
        st.omega2[t] = w.max(0.0);
    }
    st.omega2[k - 1] = 1.0 / (rho * rho);
    for (l, g2) in st.gamma2.iter_mut().enumerate() {
        *g2 = r.col(k + l)[k..].iter().map(|v| v * v).sum();
    }
}
