use crate::error::{Error, Result};
use crate::matcore::{pivoted_qr, singular_values, DenseMatrix};

/// Leverage scores of the columns of `A`, i.e. of the rows of an orthonormal
/// basis of `range(Aᵀ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LeverageScores {
    pub scores: Vec<f64>,
    /// Dimension of the basis the scores were taken from.
    pub rank: usize,
}

impl LeverageScores {
    /// Wraps arbitrary nonnegative sampling weights; `rank` is their rounded sum.
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let rank = scores.iter().sum::<f64>().round().max(0.0) as usize;
        Self { scores, rank }
    }
}

/// Exact scores from a thin orthonormal basis `U` (`n × r`) of `range(Aᵀ)`:
/// `scoreᵢ = ‖Uᵢ‖²`, with `r` the number of singular values above
/// `1e−12·σ₁`.
pub fn leverage_scores_exact(a: &DenseMatrix) -> Result<LeverageScores> {
    let sv = singular_values(a);
    let top = sv.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Err(Error::DegenerateInput("leverage scores of a zero matrix".into()));
    }
    let rank = sv.iter().filter(|&&s| s > 1e-12 * top).count();
    let f = pivoted_qr(&a.transpose(), rank, 0.0);
    let u = f.q_thin(f.rank);
    let n = a.cols();
    let mut scores = vec![0.0; n];
    for t in 0..u.cols() {
        for (sc, v) in scores.iter_mut().zip(u.col(t)) {
            *sc += v * v;
        }
    }
    for sc in &mut scores {
        *sc = sc.clamp(0.0, 1.0);
    }
    Ok(LeverageScores { scores, rank: f.rank })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{invert_upper, orthonormal_basis};
    use crate::testmat::gen_gaussian;

    #[test]
    fn orthonormal_rows_give_squared_column_norms() {
        let u = orthonormal_basis(&gen_gaussian(30, 4, 2)).unwrap();
        let a = u.transpose();
        let ls = leverage_scores_exact(&a).unwrap();
        assert_eq!(ls.rank, 4);
        for (j, s) in ls.scores.iter().enumerate() {
            let c: f64 = a.col(j).iter().map(|v| v * v).sum();
            assert!((s - c).abs() < 1e-13);
        }
    }

    #[test]
    fn scores_sum_to_rank() {
        let a = crate::testmat::gen_lowrank(8, 60, 3, 1).unwrap();
        let ls = leverage_scores_exact(&a).unwrap();
        assert_eq!(ls.rank, 3);
        assert!((ls.scores.iter().sum::<f64>() - 3.0).abs() < 1e-8);
        assert!(ls.scores.iter().all(|&s| (0.0..=1.0).contains(&s)));
    }

    #[test]
    fn matches_projector_diagonal() {
        let a = gen_gaussian(4, 50, 9);
        let ls = leverage_scores_exact(&a).unwrap();
        // diag(Aᵀ (AAᵀ)⁻¹ A) through a Cholesky-free route: (AAᵀ)⁻¹ = R⁻¹R⁻ᵀ from QR of Aᵀ.
        let qr = crate::matcore::householder_qr(&a.transpose()).unwrap();
        let r = qr.r.block(0, 4, 0, 4);
        let rinv = invert_upper(&r).unwrap();
        let g = rinv.matmul(&rinv.transpose()).unwrap();
        for j in 0..50 {
            let x = a.col(j);
            let mut quad = 0.0;
            for p in 0..4 {
                for q in 0..4 {
                    quad += x[p] * g[(p, q)] * x[q];
                }
            }
            assert!((ls.scores[j] - quad).abs() < 1e-9, "column {j}");
        }
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        assert!(matches!(
            leverage_scores_exact(&DenseMatrix::zeros(3, 9)),
            Err(Error::DegenerateInput(_))
        ));
    }
}
