//! Instance-level bounds for the sketched factorization and their check.

use super::SeqrcsResult;
use crate::error::{Error, Result};
use crate::matcore::{singular_values, spectral_norm, DenseMatrix};
use crate::rrqr::PartialQR;

/// `(1 + f²k(p−k))·(1 + f²k′(l−k′))`.
fn growth_product(k: usize, kprime: usize, p: usize, l: usize, f: f64) -> Result<f64> {
    if p < k || l < kprime {
        return Err(Error::InvalidSpec(format!(
            "bounds need p >= k and l >= k' (k={k}, p={p}, k'={kprime}, l={l})"
        )));
    }
    let f2 = f * f;
    let front = 1.0 + f2 * k as f64 * (p - k) as f64;
    let sketch = 1.0 + f2 * kprime as f64 * (l - kprime) as f64;
    Ok(front * sketch)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidSpec(format!("eps must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// `√(1 + 4(1+ε)/(1−ε)·(1 + f²k(p−k))·(1 + f²k′(l−k′)))`.
pub fn rho1_oblivious(k: usize, kprime: usize, p: usize, l: usize, f: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let g = growth_product(k, kprime, p, l, f)?;
    Ok((1.0 + 4.0 * (1.0 + eps) / (1.0 - eps) * g).sqrt())
}

/// `√(2(1+ε)/(1−ε)·(1 + f²k(p−k))·(1 + f²k′(l−k′)))`.
pub fn rho2_oblivious(k: usize, kprime: usize, p: usize, l: usize, f: f64, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let g = growth_product(k, kprime, p, l, f)?;
    Ok((2.0 * (1.0 + eps) / (1.0 - eps) * g).sqrt())
}

/// Leverage-score embedding bounds: `(1+ε)` replaced by the measured
/// largest row load `ω★`. Returns `(ρ₁, ρ₂)`.
pub fn rho_less(
    k: usize,
    kprime: usize,
    p: usize,
    l: usize,
    f: f64,
    eps: f64,
    omega_star: f64,
) -> Result<(f64, f64)> {
    check_eps(eps)?;
    if omega_star.is_nan() || omega_star < 1.0 {
        return Err(Error::InvalidSpec(format!("row load must be at least 1, got {omega_star}")));
    }
    let g = growth_product(k, kprime, p, l, f)?;
    let c = omega_star / (1.0 - eps) * g;
    Ok(((1.0 + 4.0 * c).sqrt(), (2.0 * c).sqrt()))
}

/// Measured singular-value ratios against supplied bounds.
#[derive(Clone, Debug, PartialEq)]
pub struct GuaranteeReport {
    /// `maxᵢ σᵢ(A)/σᵢ(R₁₁)`.
    pub max_ratio_r11: f64,
    /// `minᵢ σᵢ(A)/σᵢ(R₁₁)`, at least 1 up to rounding.
    pub min_ratio_r11: f64,
    /// `maxⱼ σⱼ(R₂₂)/σ_{j+k}(A)` over `j` with `σ_{j+k}(A)` above the noise
    /// floor `max(d, n)·eps·σ₁(A)`; 0 when no such `j` exists.
    pub max_ratio_r22: f64,
    pub norm_interp_2: f64,
    pub norm_interp_max: f64,
    pub rho1: f64,
    pub rho2: f64,
    /// `p < l`: the bound analysis assumes `p ≥ l`, so such runs are annotated.
    pub p_below_l: bool,
    pub passed: bool,
}

/// Checks `1 ≤ σᵢ(A)/σᵢ(R₁₁) ≤ ρ₁`, `σⱼ(R₂₂)/σ_{j+k}(A) ≤ ρ₁` and
/// `‖R₁₁⁻¹R₁₂‖₂ ≤ ρ₂` for a factorization of `A`. The lower interlacing
/// side is allowed a relative slack of `1e−10`.
pub fn verify_factors(a: &DenseMatrix, fac: &PartialQR, rho1: f64, rho2: f64) -> Result<GuaranteeReport> {
    let k = fac.k;
    if k == 0 {
        return Err(Error::InvalidSpec("factorization has rank 0".into()));
    }
    let sv_a = singular_values(a);
    let sv_r11 = singular_values(&fac.r11());
    let mut max_r11: f64 = 0.0;
    let mut min_r11 = f64::INFINITY;
    for (sa, sr) in sv_a.iter().zip(&sv_r11) {
        if *sr == 0.0 {
            return Err(Error::SingularBlock);
        }
        let ratio = sa / sr;
        max_r11 = max_r11.max(ratio);
        min_r11 = min_r11.min(ratio);
    }
    let floor = a.rows().max(a.cols()) as f64 * f64::EPSILON * sv_a.first().copied().unwrap_or(0.0);
    let sv_r22 = singular_values(&fac.r22());
    let max_r22 = sv_r22
        .iter()
        .enumerate()
        .filter_map(|(j, sr)| sv_a.get(j + k).filter(|&&sa| sa > floor).map(|sa| sr / sa))
        .fold(0.0, f64::max);
    let interp = fac.interpolation()?;
    let norm2 = spectral_norm(&interp);
    let norm_max = interp.max_abs();
    let passed = max_r11 <= rho1 && max_r22 <= rho1 && norm2 <= rho2 && min_r11 >= 1.0 - 1e-10;
    Ok(GuaranteeReport {
        max_ratio_r11: max_r11,
        min_ratio_r11: min_r11,
        max_ratio_r22: max_r22,
        norm_interp_2: norm2,
        norm_interp_max: norm_max,
        rho1,
        rho2,
        p_below_l: false,
        passed,
    })
}

/// [`verify_factors`] for a pipeline result, annotating runs with `p < l`.
pub fn verify_guarantee(a: &DenseMatrix, result: &SeqrcsResult, rho1: f64, rho2: f64) -> Result<GuaranteeReport> {
    let mut rep = verify_factors(a, &result.factors, rho1, rho2)?;
    rep.p_below_l = result.p_below_l();
    Ok(rep)
}
