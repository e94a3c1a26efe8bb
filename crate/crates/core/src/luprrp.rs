//! Block LU with panel rank-revealing pivoting, and plain GEPP for comparison.
//!
//! For each panel of `b` columns the pivot rows are the `b` columns chosen by
//! a rank-revealing QR of the panel's transpose. Those rows are moved to the
//! top, the `b × b` pivot block is factored with partial pivoting restricted
//! to it, and every row below is eliminated against it. The multipliers are
//! then bounded by the RRQR parameter instead of by 1 per step, which is what
//! keeps element growth in check on matrices like Wilkinson's.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::matcore::{invert_upper, DenseMatrix, Permutation};
use crate::rrqr::srrqr;
use crate::seqrcs::{se_qrcs, SeqrcsConfig};
use crate::sketch::EmbeddingKind;

/// How pivot rows of a panel are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PanelMethod {
    Srrqr,
    Seqrcs,
}

impl PanelMethod {
    pub fn name(self) -> &'static str {
        match self {
            PanelMethod::Srrqr => "srrqr",
            PanelMethod::Seqrcs => "seqrcs",
        }
    }
}

impl fmt::Display for PanelMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PanelMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "srrqr" => Ok(PanelMethod::Srrqr),
            "seqrcs" | "se-qrcs" => Ok(PanelMethod::Seqrcs),
            _ => Err(Error::InvalidSpec(format!("unknown panel method {s:?}"))),
        }
    }
}

/// `P A = L U` with diagnostics.
#[derive(Clone, Debug)]
pub struct LuPrrpResult {
    /// Unit lower triangular.
    pub l: DenseMatrix,
    pub u: DenseMatrix,
    /// Row `i` of `PA` is row `perm[i]` of `A`.
    pub perm: Permutation,
    /// `max|U| / max|A|`.
    pub growth: f64,
    pub norm_u_1: f64,
    pub norm_uinv_1: f64,
    /// `‖PA − LU‖_F / ‖A‖_F`.
    pub residual: f64,
}

/// `(1 + f·b)^(n/b − 1)`.
pub fn growth_bound(n: usize, b: usize, f: f64) -> f64 {
    (1.0 + f * b as f64).powf(n as f64 / b as f64 - 1.0)
}

/// In-place factorization state.
struct Work {
    w: DenseMatrix,
    rows: Vec<usize>,
}

impl Work {
    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            self.w.swap_rows(a, b);
            self.rows.swap(a, b);
        }
    }

    /// Factors columns `c..c+b`, searching pivots in rows `t..search_end`
    /// and eliminating all rows below, then updates the trailing matrix.
    fn panel(&mut self, c: usize, b: usize, search_end: usize) -> Result<()> {
        let n = self.w.rows();
        let end = c + b;
        for t in c..end {
            let mut p = t;
            for i in t + 1..search_end {
                if self.w[(i, t)].abs() > self.w[(p, t)].abs() {
                    p = i;
                }
            }
            if self.w[(p, t)] == 0.0 {
                return Err(Error::SingularPanel { column: t });
            }
            self.swap_rows(t, p);
            let piv = self.w[(t, t)];
            self.w.col_mut(t)[t + 1..].iter_mut().for_each(|v| *v /= piv);
            for j in t + 1..end {
                let (lc, cj) = self.w.two_cols_mut(t, j);
                let u = cj[t];
                if u != 0.0 {
                    for (x, l) in cj[t + 1..].iter_mut().zip(&lc[t + 1..]) {
                        *x -= l * u;
                    }
                }
            }
        }
        for j in end..self.w.cols() {
            for t in c..end {
                let (lc, cj) = self.w.two_cols_mut(t, j);
                let u = cj[t];
                if u != 0.0 {
                    for (x, l) in cj[t + 1..n].iter_mut().zip(&lc[t + 1..n]) {
                        *x -= l * u;
                    }
                }
            }
        }
        Ok(())
    }

    fn finish(self, a: &DenseMatrix) -> Result<LuPrrpResult> {
        let n = a.rows();
        let mut l = DenseMatrix::identity(n);
        let mut u = DenseMatrix::zeros(n, n);
        for j in 0..n {
            let src = self.w.col(j);
            u.col_mut(j)[..=j].copy_from_slice(&src[..=j]);
            l.col_mut(j)[j + 1..].copy_from_slice(&src[j + 1..]);
        }
        let perm = Permutation::new(self.rows)?;
        let pa = a.permute_rows(&perm)?;
        let lu = lower_times_upper(&l, &u);
        let norm_a = a.frobenius_norm();
        let residual = pa.sub(&lu)?.frobenius_norm() / if norm_a == 0.0 { 1.0 } else { norm_a };
        let max_a = a.max_abs();
        let growth = u.max_abs() / if max_a == 0.0 { 1.0 } else { max_a };
        let norm_u_1 = u.norm_1();
        let norm_uinv_1 = invert_upper(&u)?.norm_1();
        Ok(LuPrrpResult { l, u, perm, growth, norm_u_1, norm_uinv_1, residual })
    }
}

/// `L U` for unit lower `L` and upper `U`, skipping the structural zeros.
fn lower_times_upper(l: &DenseMatrix, u: &DenseMatrix) -> DenseMatrix {
    let n = l.rows();
    let mut out = DenseMatrix::zeros(n, u.cols());
    for j in 0..u.cols() {
        for t in 0..=j.min(n - 1) {
            let ut = u[(t, j)];
            if ut == 0.0 {
                continue;
            }
            let lc = l.col(t);
            let oc = out.col_mut(j);
            for i in t..n {
                oc[i] += lc[i] * ut;
            }
        }
    }
    out
}

fn check_square(a: &DenseMatrix) -> Result<usize> {
    let (n, m) = a.shape();
    if n != m || n == 0 {
        return Err(Error::InvalidSpec(format!("LU needs a nonempty square matrix, got {n}x{m}")));
    }
    Ok(n)
}

/// Gaussian elimination with partial pivoting (largest magnitude, lowest
/// row on ties).
pub fn gepp(a: &DenseMatrix) -> Result<LuPrrpResult> {
    let n = check_square(a)?;
    let mut work = Work { w: a.clone(), rows: (0..n).collect() };
    let b = 32.min(n);
    let mut c = 0;
    while c < n {
        let width = b.min(n - c);
        work.panel(c, width, n)?;
        c += width;
    }
    work.finish(a)
}

/// LU with panel rank-revealing pivoting, panels of width `b` (`b | n`).
///
/// Panel rows are chosen by strong RRQR with parameter `f`, or by the
/// sketched selection when `method` is [`PanelMethod::Seqrcs`] and the panel
/// has more than `2b` rows; that path uses CountSketch with
/// `l = min(w/2, b²)` and seed `seed + panel index`. The last panel is square
/// and is factored with partial pivoting.
pub fn lu_prrp(a: &DenseMatrix, b: usize, f: f64, method: PanelMethod, seed: u64) -> Result<LuPrrpResult> {
    let n = check_square(a)?;
    if b < 2 || n % b != 0 {
        return Err(Error::InvalidSpec(format!("panel width {b} must be >= 2 and divide n={n}")));
    }
    if !(f > 1.0 && f.is_finite()) {
        return Err(Error::InvalidSpec(format!("f must exceed 1, got {f}")));
    }
    let mut work = Work { w: a.clone(), rows: (0..n).collect() };
    for (panel, c) in (0..n).step_by(b).enumerate() {
        let w = n - c;
        if w > b {
            let pt = work.w.block(c, n, c, c + b).transpose();
            let chosen: Vec<usize> = if method == PanelMethod::Seqrcs && w > 2 * b {
                let cfg = SeqrcsConfig {
                    k: b,
                    kprime: 0,
                    f,
                    kind: EmbeddingKind::CountSketch,
                    l: (w / 2).min(b * b),
                    s: 1,
                    seed: seed.wrapping_add(panel as u64),
                    eps: 0.5,
                };
                let res = se_qrcs(&pt, &cfg).map_err(|e| panel_error(e, c))?;
                res.factors.selected().to_vec()
            } else {
                srrqr(&pt, b, f).map_err(|e| panel_error(e, c))?.selected().to_vec()
            };
            if chosen.len() < b {
                return Err(Error::SingularPanel { column: c + chosen.len() });
            }
            // Selected rows first in pivot order, the rest in their current order.
            let mut taken = vec![false; w];
            let mut order: Vec<usize> = chosen.iter().map(|&i| c + i).collect();
            for &i in &chosen {
                taken[i] = true;
            }
            order.extend((0..w).filter(|&i| !taken[i]).map(|i| c + i));
            let block = work.w.block(c, n, 0, n);
            let reordered = DenseMatrix::from_fn(w, n, |i, j| block[(order[i] - c, j)]);
            work.w.set_block(c, 0, &reordered);
            let old: Vec<usize> = work.rows[c..].to_vec();
            for (i, &src) in order.iter().enumerate() {
                work.rows[c + i] = old[src - c];
            }
        }
        work.panel(c, b, c + b)?;
    }
    work.finish(a)
}

fn panel_error(e: Error, column: usize) -> Error {
    match e {
        Error::SingularBlock | Error::EmptySupport => Error::SingularPanel { column },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testmat::{gen_gaussian, gen_wilkinson};

    #[test]
    fn identity_is_trivial() {
        let a = DenseMatrix::identity(16);
        for res in [gepp(&a).unwrap(), lu_prrp(&a, 4, 2.0, PanelMethod::Srrqr, 0).unwrap()] {
            assert_eq!(res.l, a);
            assert_eq!(res.u, a);
            assert_eq!(res.growth, 1.0);
            assert_eq!(res.residual, 0.0);
        }
    }

    #[test]
    fn wilkinson_growth() {
        assert_eq!(gepp(&gen_wilkinson(4)).unwrap().growth, 8.0);
        assert_eq!(gepp(&gen_wilkinson(16)).unwrap().growth, 32768.0);
        let a = gen_wilkinson(48);
        assert_eq!(gepp(&a).unwrap().growth, 2f64.powi(47));
        let res = lu_prrp(&a, 16, 2.0, PanelMethod::Srrqr, 0).unwrap();
        assert!(res.growth <= 50.0, "growth {}", res.growth);
        assert!(res.residual <= 1e-14);
    }

    #[test]
    fn random_residuals_and_multipliers() {
        let a = gen_gaussian(128, 128, 5);
        let g = gepp(&a).unwrap();
        assert!(g.residual <= 1e-14, "gepp residual {}", g.residual);
        for method in [PanelMethod::Srrqr, PanelMethod::Seqrcs] {
            let res = lu_prrp(&a, 16, 2.0, method, 1).unwrap();
            assert!(res.residual <= 1e-13, "{method}: {}", res.residual);
            assert!(res.growth <= growth_bound(128, 16, 2.0));
            let lower_ok = (0..128).all(|j| res.l.col(j)[j] == 1.0 && res.l.col(j)[..j].iter().all(|&v| v == 0.0));
            assert!(lower_ok);
            assert!(res.l.as_slice().iter().all(|v| v.is_finite()));
            let pa = a.permute_rows(&res.perm).unwrap();
            let lu = res.l.matmul(&res.u).unwrap();
            assert!(pa.sub(&lu).unwrap().frobenius_norm() <= 1e-13 * a.frobenius_norm());
        }
    }

    #[test]
    fn srrqr_panels_bound_multipliers() {
        let a = gen_gaussian(64, 64, 2);
        let res = lu_prrp(&a, 8, 2.0, PanelMethod::Srrqr, 0).unwrap();
        // Below each pivot block the multipliers are entries of (R₁₁⁻¹R₁₂)ᵀ.
        let worst = (0..56)
            .flat_map(|j| {
                let lo = (j / 8 + 1) * 8;
                res.l.col(j)[lo..].to_vec()
            })
            .fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(worst <= 2.0 + 1e-8, "largest multiplier {worst}");
    }

    #[test]
    fn bound_values() {
        assert_eq!(growth_bound(32, 32, 2.0), 1.0);
        assert_eq!(growth_bound(64, 32, 2.0), 65.0);
        assert!(growth_bound(1024, 8, 2.0) > growth_bound(1024, 16, 2.0));
        assert!(growth_bound(1024, 16, 2.0) > growth_bound(1024, 32, 2.0));
    }

    #[test]
    fn invalid_inputs() {
        let a = DenseMatrix::identity(10);
        assert!(lu_prrp(&a, 3, 2.0, PanelMethod::Srrqr, 0).is_err());
        assert!(lu_prrp(&a, 1, 2.0, PanelMethod::Srrqr, 0).is_err());
        assert!(lu_prrp(&a, 5, 1.0, PanelMethod::Srrqr, 0).is_err());
        assert!(gepp(&DenseMatrix::zeros(2, 3)).is_err());
        assert!(matches!(gepp(&DenseMatrix::zeros(3, 3)), Err(Error::SingularPanel { column: 0 })));
        let mut s = DenseMatrix::identity(8);
        s.col_mut(5).iter_mut().for_each(|v| *v = 0.0);
        assert!(matches!(lu_prrp(&s, 4, 2.0, PanelMethod::Srrqr, 0), Err(Error::SingularPanel { .. })));
    }
}
