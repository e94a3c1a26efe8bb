use super::dense::{dot, DenseMatrix};
use super::qr::{pivoted_qr, Reflector};
use crate::error::{Error, Result};

const JACOBI_TOL: f64 = 1e-15;
const MAX_SWEEPS: usize = 30;

/// Singular values in nonincreasing order, `min(rows, cols)` of them.
///
/// The matrix is first reduced to a small square triangular factor by
/// Householder QR of its tall orientation; one-sided Jacobi then
/// orthogonalizes the columns of that factor. A rotation is skipped when
/// `|aᵢᵀaⱼ| ≤ 1e−15·‖aᵢ‖‖aⱼ‖`, and at most 30 sweeps run.
pub fn singular_values(a: &DenseMatrix) -> Vec<f64> {
    let (m, n) = a.shape();
    let s = m.min(n);
    if s == 0 {
        return Vec::new();
    }
    let tall = if m >= n { a.clone() } else { a.transpose() };
    let mut w = triangular_factor(tall);
    one_sided_jacobi(&mut w);
    let mut sv: Vec<f64> = (0..s).map(|j| dot(w.col(j), w.col(j)).sqrt()).collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// The `s × s` upper triangular factor of a tall `m × s` matrix.
fn triangular_factor(mut t: DenseMatrix) -> DenseMatrix {
    let (m, s) = t.shape();
    for c in 0..s.min(m) {
        let (h, beta) = Reflector::annihilate(c, &t.col(c)[c..]);
        {
            let col = t.col_mut(c);
            col[c] = beta;
            col[c + 1..].iter_mut().for_each(|v| *v = 0.0);
        }
        for j in c + 1..s {
            h.apply(t.col_mut(j));
        }
    }
    t.block(0, s, 0, s)
}

fn one_sided_jacobi(w: &mut DenseMatrix) {
    let n = w.cols();
    let mut norms: Vec<f64> = (0..n).map(|j| dot(w.col(j), w.col(j))).collect();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in i + 1..n {
                let alpha = norms[i];
                let beta = norms[j];
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                let gamma = dot(w.col(i), w.col(j));
                if gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (ci, cj) = w.two_cols_mut(i, j);
                for (x, y) in ci.iter_mut().zip(cj.iter_mut()) {
                    let a = *x;
                    let b = *y;
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
                norms[i] = dot(ci, ci);
                norms[j] = dot(cj, cj);
            }
        }
        if !rotated {
            break;
        }
    }
}

/// Largest singular value; zero for an empty matrix.
pub fn spectral_norm(a: &DenseMatrix) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// `‖A − C C⁺ A‖₂`, the spectral norm of `A` projected onto the orthogonal
/// complement of `range(C)`.
///
/// `range(C)` is taken from a column-pivoted QR of `C` truncated at its
/// numerical rank (`1e−14·‖C‖_F`), so dependent columns in `C` are harmless.
pub fn projection_residual(a: &DenseMatrix, c: &DenseMatrix) -> Result<f64> {
    if c.cols() == 0 {
        return Err(Error::DegenerateInput("empty column selection".into()));
    }
    if c.rows() != a.rows() {
        return Err(Error::DimensionMismatch {
            expected: (a.rows(), c.cols()),
            got: c.shape(),
        });
    }
    let tol = 1e-14 * c.frobenius_norm();
    let f = pivoted_qr(c, c.rows().min(c.cols()), tol);
    if f.rank == 0 {
        return Ok(spectral_norm(a));
    }
    let basis = f.q_thin(f.rank);
    let coeff = basis.t_matmul(a)?;
    let proj = basis.matmul(&coeff)?;
    Ok(spectral_norm(&a.sub(&proj)?))
}
