//! Measurements on factorizations: singular-value ratios, residuals,
//! order-statistic summaries, an exhaustive column-selection oracle and the
//! desk-scale matrix suite.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::matcore::{projection_residual, singular_values, spectral_norm, DenseMatrix};
use crate::rng::{self, streams};
use crate::rrqr::PartialQR;
use crate::sketch::{osnap_blockwise, support_union};
use crate::testmat::{MatrixFamily, MatrixSpec};

/// Minimum, lower median and maximum.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub min: f64,
    pub median: f64,
    pub max: f64,
}

/// Element of rank `⌊(len−1)/2⌋` in sorted order; NaN for an empty slice.
pub fn lower_median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[(v.len() - 1) / 2]
}

pub fn summarize(values: &[f64]) -> Summary {
    if values.is_empty() {
        return Summary { min: f64::NAN, median: f64::NAN, max: f64::NAN };
    }
    Summary {
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        median: lower_median(values),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    /// `σᵢ(R₁₁)/σᵢ(A)` for `i < k`; 1 where `σᵢ(A) = 0`.
    pub ratios: Vec<f64>,
    pub summary: Summary,
}

pub fn ratio_report(a: &DenseMatrix, fac: &PartialQR) -> RatioReport {
    let sv_a = singular_values(a);
    let sv_r = singular_values(&fac.r11());
    let ratios: Vec<f64> = sv_r
        .iter()
        .zip(&sv_a)
        .map(|(r, s)| if *s == 0.0 { 1.0 } else { r / s })
        .collect();
    let summary = summarize(&ratios);
    RatioReport { ratios, summary }
}

/// `‖R₂₂‖₂ / ‖A‖₂`.
pub fn residual_report(a: &DenseMatrix, fac: &PartialQR) -> f64 {
    let norm = spectral_norm(a);
    let r22 = spectral_norm(&fac.r22());
    if norm == 0.0 {
        r22
    } else {
        r22 / norm
    }
}

/// Largest number of subsets the exhaustive oracle will enumerate.
pub const BRUTE_FORCE_CAP: u128 = 1_000_000;

/// `C(n, k)`, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct CssOracle {
    /// Best subset, ascending; the lexicographically first on ties.
    pub indices: Vec<usize>,
    /// `‖A − CC⁺A‖₂` for that subset.
    pub residual: f64,
}

/// Exhaustive minimization of `‖A − CC⁺A‖₂` over all `k`-column subsets.
pub fn brute_force_css(a: &DenseMatrix, k: usize) -> Result<CssOracle> {
    let n = a.cols();
    if k == 0 || k > n {
        return Err(Error::InvalidSpec(format!("k={k} must lie in 1..={n}")));
    }
    let count = binomial(n, k);
    if count > BRUTE_FORCE_CAP {
        return Err(Error::CombinatorialBlowup { count, cap: BRUTE_FORCE_CAP });
    }
    let mut subset: Vec<usize> = (0..k).collect();
    let mut best = CssOracle { indices: subset.clone(), residual: f64::INFINITY };
    loop {
        let r = projection_residual(a, &a.select_columns(&subset)?)?;
        if r < best.residual {
            best = CssOracle { indices: subset.clone(), residual: r };
        }
        // next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&i| subset[i] < n - k + i) else {
            break;
        };
        subset[pos] += 1;
        for i in pos + 1..k {
            subset[i] = subset[i - 1] + 1;
        }
    }
    Ok(best)
}

/// Support size of `kprime` distinct rows drawn uniformly from an `l × n`
/// block-wise embedding with `s` entries per column (CountSketch for `s = 1`).
///
/// The embedding and the rows both derive from `seed`; this is the sampling
/// model under which the mean support size equals `expected_p`.
pub fn support_size_trial(n: usize, l: usize, kprime: usize, s: usize, seed: u64) -> Result<usize> {
    if kprime == 0 || kprime > l {
        return Err(Error::InvalidSpec(format!("need 1 <= k' <= l, got k'={kprime}, l={l}")));
    }
    let omega = osnap_blockwise(n, l, s, seed)?;
    let rows = index::sample(&mut rng::stream(seed, streams::PIVOT_ROWS), omega.l(), kprime).into_vec();
    Ok(support_union(&omega, &rows)?.len())
}

/// One matrix of the desk-scale suite with its target rank.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteEntry {
    pub spec: MatrixSpec,
    pub k: usize,
}

impl SuiteEntry {
    pub fn name(&self) -> &'static str {
        self.spec.family.name()
    }
}

/// The wide families at `d × n` with a target rank for each.
///
/// Ranks are chosen so the relative residual sits near the usual reference
/// levels: about 1e−4 (exponential), 1e−3 (quadratic), 1e−6 (Fiedler), the
/// outlier count for ROM, the exact rank for LowRank and just before the
/// numerical rank for Chebvand and Prolate. Sizes other than `d = 50` and
/// `d = 100` scale the `d = 50` choices.
pub fn desk_suite(d: usize, n: usize, seed: u64) -> Vec<SuiteEntry> {
    use MatrixFamily::*;
    let ks: [(MatrixFamily, usize); 8] = match d {
        50 => [
            (Exponential, 44),
            (Quadratic, 36),
            (Gaussian, 20),
            (Rom, 40),
            (LowRank, 30),
            (Fiedler, 30),
            (Chebvand, 38),
            (Prolate, 44),
        ],
        100 => [
            (Exponential, 88),
            (Quadratic, 72),
            (Gaussian, 40),
            (Rom, 80),
            (LowRank, 50),
            (Fiedler, 60),
            (Chebvand, 62),
            (Prolate, 70),
        ],
        _ => {
            let scale = |k: usize| ((k * d + 25) / 50).clamp(1, d);
            [
                (Exponential, scale(44)),
                (Quadratic, scale(36)),
                (Gaussian, scale(20)),
                (Rom, scale(40)),
                (LowRank, scale(30)),
                (Fiedler, scale(30)),
                (Chebvand, scale(38)),
                (Prolate, scale(44)),
            ]
        }
    };
    ks.into_iter()
        .map(|(family, k)| {
            let mut spec = MatrixSpec::new(family, d, n, seed);
            match family {
                Rom => spec = spec.with_outliers(k.min(n), 1000.0),
                LowRank => spec = spec.with_rank(k),
                _ => {}
            }
            SuiteEntry { spec, k }
        })
        .collect()
}
