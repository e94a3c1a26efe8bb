//! Householder QR kernels: unpivoted, greedy column-pivoted, triangular solves.

use super::dense::{dot, norm2, DenseMatrix, Permutation};
use crate::error::{Error, Result};

/// Elementary reflector `H = I − τ v vᵀ` acting on rows `start..` with `v[0] = 1`.
#[derive(Clone, Debug)]
pub(crate) struct Reflector {
    pub start: usize,
    pub v: Vec<f64>,
    pub tau: f64,
}

impl Reflector {
    /// Builds the reflector mapping `x` onto `β e₁` and returns it with `β`.
    /// When the tail of `x` is already zero the reflector is the identity.
    pub fn annihilate(start: usize, x: &[f64]) -> (Self, f64) {
        let alpha = x[0];
        let tail = norm2(&x[1..]);
        if tail == 0.0 {
            let mut v = vec![0.0; x.len()];
            v[0] = 1.0;
            return (Self { start, v, tau: 0.0 }, alpha);
        }
        let norm = alpha.hypot(tail);
        let beta = if alpha >= 0.0 { -norm } else { norm };
        let scale = 1.0 / (alpha - beta);
        let mut v = Vec::with_capacity(x.len());
        v.push(1.0);
        v.extend(x[1..].iter().map(|xi| xi * scale));
        let tau = (beta - alpha) / beta;
        (Self { start, v, tau }, beta)
    }

    /// Applies `H` to a full-length column.
    #[inline]
    pub fn apply(&self, col: &mut [f64]) {
        if self.tau == 0.0 {
            return;
        }
        let seg = &mut col[self.start..self.start + self.v.len()];
        let w = self.tau * dot(&self.v, seg);
        if w != 0.0 {
            for (s, vi) in seg.iter_mut().zip(&self.v) {
                *s -= w * vi;
            }
        }
    }

    /// Right-multiplies the rows of `m` by `H` (`m ← m H`), touching columns
    /// `start..start+len`.
    pub fn apply_right(&self, m: &mut DenseMatrix) {
        if self.tau == 0.0 {
            return;
        }
        let rows = m.rows();
        let mut w = vec![0.0; rows];
        for (t, vt) in self.v.iter().enumerate() {
            let c = m.col(self.start + t);
            for i in 0..rows {
                w[i] += c[i] * vt;
            }
        }
        for (t, vt) in self.v.iter().enumerate() {
            let f = self.tau * vt;
            let c = m.col_mut(self.start + t);
            for i in 0..rows {
                c[i] -= f * w[i];
            }
        }
    }
}

/// Accumulates `Q = H₀ H₁ ⋯` restricted to its first `cols` columns.
pub(crate) fn accumulate_q(rows: usize, cols: usize, reflectors: &[Reflector]) -> DenseMatrix {
    let mut q = DenseMatrix::zeros(rows, cols);
    for j in 0..cols.min(rows) {
        q[(j, j)] = 1.0;
    }
    for h in reflectors.iter().rev() {
        for j in 0..cols {
            h.apply(q.col_mut(j));
        }
    }
    q
}

/// Full Householder QR factors, `A = Q R`.
#[derive(Clone, Debug)]
pub struct QrFactors {
    /// Orthogonal, `rows × rows`.
    pub q: DenseMatrix,
    /// Upper trapezoidal, same shape as the input, nonnegative diagonal.
    pub r: DenseMatrix,
}

/// Unpivoted Householder QR with a nonnegative diagonal in `R`.
pub fn householder_qr(a: &DenseMatrix) -> Result<QrFactors> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return Err(Error::InvalidSpec("householder_qr needs a nonempty matrix".into()));
    }
    let mut r = a.clone();
    let steps = m.min(n);
    let mut reflectors = Vec::with_capacity(steps);
    for t in 0..steps {
        let (h, beta) = Reflector::annihilate(t, &r.col(t)[t..]);
        let c = r.col_mut(t);
        c[t] = beta;
        c[t + 1..].iter_mut().for_each(|v| *v = 0.0);
        for j in t + 1..n {
            h.apply(r.col_mut(j));
        }
        reflectors.push(h);
    }
    let mut q = accumulate_q(m, m, &reflectors);
    fix_signs(&mut q, &mut r, steps);
    Ok(QrFactors { q, r })
}

/// Flips rows of `r` and matching columns of `q` so the first `steps`
/// diagonal entries of `r` are nonnegative.
fn fix_signs(q: &mut DenseMatrix, r: &mut DenseMatrix, steps: usize) {
    for t in 0..steps {
        if r[(t, t)] < 0.0 {
            for j in 0..r.cols() {
                r[(t, j)] = -r[(t, j)];
            }
            q.col_mut(t).iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Orthonormal basis of the columns of a tall `m × c` matrix, `m × c`, the
/// thin `Q` of its Householder QR with the sign convention of [`householder_qr`].
pub fn orthonormal_basis(a: &DenseMatrix) -> Result<DenseMatrix> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 || n > m {
        return Err(Error::InvalidSpec(format!("orthonormal_basis needs a tall matrix, got {m}x{n}")));
    }
    let mut r = a.clone();
    let mut reflectors = Vec::with_capacity(n);
    let mut signs = Vec::with_capacity(n);
    for t in 0..n {
        let (h, beta) = Reflector::annihilate(t, &r.col(t)[t..]);
        for j in t + 1..n {
            h.apply(r.col_mut(j));
        }
        signs.push(beta < 0.0);
        reflectors.push(h);
    }
    let mut q = accumulate_q(m, n, &reflectors);
    for (t, &neg) in signs.iter().enumerate() {
        if neg {
            q.col_mut(t).iter_mut().for_each(|v| *v = -*v);
        }
    }
    Ok(q)
}

/// Output of greedy column-pivoted Householder QR stopped after `rank` steps.
///
/// `r = Qᵀ A Π` in full: the leading `rank` columns are upper triangular and
/// rows `rank..` of the trailing columns hold the untriangularized remainder.
#[derive(Clone, Debug)]
pub struct PivotedQr {
    pub(crate) reflectors: Vec<Reflector>,
    pub r: DenseMatrix,
    pub perm: Permutation,
    pub rank: usize,
    flipped: Vec<usize>,
}

impl PivotedQr {
    pub fn q_full(&self) -> DenseMatrix {
        self.q_thin(self.r.rows())
    }

    /// First `cols` columns of `Q`.
    pub fn q_thin(&self, cols: usize) -> DenseMatrix {
        let m = self.r.rows();
        let mut q = accumulate_q(m, cols, &self.reflectors);
        for &t in self.flipped.iter().filter(|&&t| t < cols) {
            q.col_mut(t).iter_mut().for_each(|v| *v = -*v);
        }
        q
    }

    /// Negates rows of `r` so the leading diagonal is nonnegative; the
    /// matching columns of `Q` are negated when it is formed.
    fn normalize_signs(&mut self) {
        self.flipped = (0..self.rank).filter(|&t| self.r[(t, t)] < 0.0).collect();
        for &t in &self.flipped {
            for j in 0..self.r.cols() {
                self.r[(t, j)] = -self.r[(t, j)];
            }
        }
    }
}

/// Greedy QR with column pivoting (largest remaining norm first).
///
/// Runs at most `max_steps` steps and stops early once the largest remaining
/// downdated column norm is `≤ stop_tol`. Ties go to the lowest column index.
/// Downdated norms are recomputed from scratch once they fall below `√ε` of
/// the value they were last computed at.
pub fn pivoted_qr(a: &DenseMatrix, max_steps: usize, stop_tol: f64) -> PivotedQr {
    let (m, n) = a.shape();
    let steps = max_steps.min(m).min(n);
    let mut r = a.clone();
    let mut perm = Permutation::identity(n);
    let mut norms: Vec<f64> = (0..n).map(|j| norm2(r.col(j))).collect();
    let mut anchor = norms.clone();
    let tol3z = f64::EPSILON.sqrt();
    let mut reflectors = Vec::with_capacity(steps);
    let mut rank = 0;

    for t in 0..steps {
        let mut p = t;
        for j in t + 1..n {
            if norms[j] > norms[p] {
                p = j;
            }
        }
        if norms[p] <= stop_tol {
            break;
        }
        if p != t {
            r.swap_cols(t, p);
            perm.swap(t, p);
            norms.swap(t, p);
            anchor.swap(t, p);
        }
        let (h, beta) = Reflector::annihilate(t, &r.col(t)[t..]);
        {
            let c = r.col_mut(t);
            c[t] = beta;
            c[t + 1..].iter_mut().for_each(|v| *v = 0.0);
        }
        for j in t + 1..n {
            let c = r.col_mut(j);
            h.apply(c);
            if norms[j] != 0.0 {
                let ratio = c[t].abs() / norms[j];
                let shrink = (1.0 - ratio * ratio).max(0.0);
                let rel = norms[j] / anchor[j];
                if shrink * rel * rel <= tol3z {
                    let fresh = norm2(&c[t + 1..]);
                    norms[j] = fresh;
                    anchor[j] = fresh;
                } else {
                    norms[j] *= shrink.sqrt();
                }
            }
        }
        reflectors.push(h);
        rank = t + 1;
    }

    let mut out = PivotedQr {
        reflectors,
        r,
        perm,
        rank,
        flipped: Vec::new(),
    };
    out.normalize_signs();
    out
}

/// Solves `U X = B` for upper triangular `U` (`k × k`) by back substitution.
pub fn solve_upper(u: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    let k = u.rows();
    if u.cols() != k || b.rows() != k {
        return Err(Error::DimensionMismatch {
            expected: (k, k),
            got: b.shape(),
        });
    }
    if (0..k).any(|i| u[(i, i)] == 0.0 || !u[(i, i)].is_finite()) {
        return Err(Error::SingularBlock);
    }
    let mut x = b.clone();
    for j in 0..b.cols() {
        let col = x.col_mut(j);
        back_substitute(u, col);
    }
    if x.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularBlock);
    }
    Ok(x)
}

/// In-place back substitution of one right-hand side; assumes a nonzero diagonal.
pub(crate) fn back_substitute(u: &DenseMatrix, x: &mut [f64]) {
    let k = x.len();
    for i in (0..k).rev() {
        let xi = x[i] / u[(i, i)];
        x[i] = xi;
        if xi != 0.0 {
            let uc = &u.col(i)[..i];
            for (xr, ur) in x[..i].iter_mut().zip(uc) {
                *xr -= xi * ur;
            }
        }
    }
}

/// Inverse of a nonsingular upper triangular matrix.
pub fn invert_upper(u: &DenseMatrix) -> Result<DenseMatrix> {
    solve_upper(u, &DenseMatrix::identity(u.rows()))
}

/// Plane rotation `[c s; −s c]` zeroing the second entry of `(a, b)`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Givens {
    pub c: f64,
    pub s: f64,
}

impl Givens {
    pub fn zeroing(a: f64, b: f64) -> Option<(Self, f64)> {
        if b == 0.0 {
            return None;
        }
        let r = a.hypot(b);
        Some((Self { c: a / r, s: b / r }, r))
    }

    /// Rotates rows `i` and `i+1` of `m` over columns `c0..`.
    pub fn rotate_rows(&self, m: &mut DenseMatrix, i: usize, c0: usize) {
        for j in c0..m.cols() {
            let x = m[(i, j)];
            let y = m[(i + 1, j)];
            m[(i, j)] = self.c * x + self.s * y;
            m[(i + 1, j)] = -self.s * x + self.c * y;
        }
    }

    /// `m ← m Gᵀ` on columns `i` and `i+1`, the update that keeps `Q R` fixed.
    pub fn rotate_cols(&self, m: &mut DenseMatrix, i: usize) {
        let (x, y) = m.two_cols_mut(i, i + 1);
        for (xi, yi) in x.iter_mut().zip(y.iter_mut()) {
            let a = *xi;
            let b = *yi;
            *xi = self.c * a + self.s * b;
            *yi = -self.s * a + self.c * b;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn orth_error(q: &DenseMatrix) -> f64 {
        let qtq = q.t_matmul(q).unwrap();
        qtq.sub(&DenseMatrix::identity(q.cols())).unwrap().max_abs()
    }

    #[test]
    fn identity_factors_trivially() {
        let f = householder_qr(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(f.q, DenseMatrix::identity(3));
        assert_eq!(f.r, DenseMatrix::identity(3));
    }

    #[test]
    fn diagonal_is_already_triangular() {
        let a = DenseMatrix::from_diag(&[3.0, 2.0]);
        let f = householder_qr(&a).unwrap();
        assert_eq!(f.r, a);
        assert_eq!(f.q, DenseMatrix::identity(2));
    }

    #[test]
    fn rank_deficient_gives_zero_diagonal() {
        let a = DenseMatrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let f = householder_qr(&a).unwrap();
        assert!(f.r[(1, 1)].abs() < 1e-15);
        assert!(f.q.matmul(&f.r).unwrap().sub(&a).unwrap().max_abs() < 1e-14);
    }

    #[test]
    fn empty_input_is_rejected() {
        assert!(householder_qr(&DenseMatrix::zeros(0, 2)).is_err());
    }

    #[test]
    fn pivoted_picks_largest_norms_in_order() {
        // diag(3,2,1) padded with two zero columns, columns deliberately shuffled
        let a = DenseMatrix::from_rows(&[
            &[0.0, 0.0, 3.0, 0.0, 0.0],
            &[2.0, 0.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 0.0, 1.0],
        ]);
        let p = pivoted_qr(&a, 3, 0.0);
        assert_eq!(&p.perm.as_slice()[..3], &[2, 0, 4]);
        let q = p.q_full();
        let rec = q.matmul(&p.r).unwrap();
        let ap = a.permute_columns(&p.perm).unwrap();
        assert!(rec.sub(&ap).unwrap().max_abs() < 1e-15);
        assert_eq!((p.r[(0, 0)], p.r[(1, 1)], p.r[(2, 2)]), (3.0, 2.0, 1.0));
    }

    #[test]
    fn pivoted_stops_at_numerical_rank() {
        let a = DenseMatrix::from_rows(&[&[1.0, 1.0, 1.0], &[0.0, 0.0, 0.0]]);
        let p = pivoted_qr(&a, 2, 1e-14 * a.frobenius_norm());
        assert_eq!(p.rank, 1);
        assert!(orth_error(&p.q_full()) < 1e-15);
    }

    #[test]
    fn triangular_solve_and_inverse() {
        let u = DenseMatrix::from_rows(&[&[2.0, 1.0], &[0.0, 4.0]]);
        let inv = invert_upper(&u).unwrap();
        let prod = u.matmul(&inv).unwrap();
        assert!(prod.sub(&DenseMatrix::identity(2)).unwrap().max_abs() < 1e-15);
        let sing = DenseMatrix::from_rows(&[&[1.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(invert_upper(&sing), Err(Error::SingularBlock)));
    }
}
