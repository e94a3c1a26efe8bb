//! Seeded generators for the test-matrix families.
//!
//! Every generator is a pure function of its arguments. Random draws come
//! from the [`crate::rng`] streams, Gaussians in column-major order.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matcore::{orthonormal_basis, DenseMatrix};
use crate::rng::{self, streams, SeededRng};

/// Decay rate of the exponential family, `10^(−1/11)`.
pub fn exponential_rate() -> f64 {
    10f64.powf(-1.0 / 11.0)
}

pub const DEFAULT_PROLATE_W: f64 = 0.25;

/// Default Kahan diagonal perturbation, as in the usual test gallery.
pub const DEFAULT_KAHAN_PERT: f64 = 25.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MatrixFamily {
    Exponential,
    Quadratic,
    Gaussian,
    Rom,
    LowRank,
    Fiedler,
    Chebvand,
    Prolate,
    Kahan,
    Wilkinson,
}

impl MatrixFamily {
    pub const ALL: [MatrixFamily; 10] = [
        MatrixFamily::Exponential,
        MatrixFamily::Quadratic,
        MatrixFamily::Gaussian,
        MatrixFamily::Rom,
        MatrixFamily::LowRank,
        MatrixFamily::Fiedler,
        MatrixFamily::Chebvand,
        MatrixFamily::Prolate,
        MatrixFamily::Kahan,
        MatrixFamily::Wilkinson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MatrixFamily::Exponential => "exponential",
            MatrixFamily::Quadratic => "quadratic",
            MatrixFamily::Gaussian => "gaussian",
            MatrixFamily::Rom => "rom",
            MatrixFamily::LowRank => "lowrank",
            MatrixFamily::Fiedler => "fiedler",
            MatrixFamily::Chebvand => "chebvand",
            MatrixFamily::Prolate => "prolate",
            MatrixFamily::Kahan => "kahan",
            MatrixFamily::Wilkinson => "wilkinson",
        }
    }

    /// Square families ignore `n` and require `d == n`.
    pub fn is_square(self) -> bool {
        matches!(self, MatrixFamily::Kahan | MatrixFamily::Wilkinson)
    }

    /// Whether the seed influences the generated matrix.
    pub fn is_random(self) -> bool {
        matches!(
            self,
            MatrixFamily::Exponential
                | MatrixFamily::Quadratic
                | MatrixFamily::Gaussian
                | MatrixFamily::Rom
                | MatrixFamily::LowRank
        )
    }
}

impl fmt::Display for MatrixFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatrixFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['-', '_'], "");
        MatrixFamily::ALL
            .into_iter()
            .find(|f| f.name() == key)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown matrix family {s:?}")))
    }
}

/// A fully specified test matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSpec {
    pub family: MatrixFamily,
    pub d: usize,
    pub n: usize,
    pub seed: u64,
    /// LowRank only.
    pub rank: usize,
    /// ROM only.
    pub outliers: usize,
    /// ROM only.
    pub magnitude: f64,
    /// Kahan only.
    pub phi: f64,
    /// Kahan only: diagonal perturbation in units of `eps·(m−i)`.
    pub kahan_pert: f64,
    /// Prolate only.
    pub prolate_w: f64,
}

impl MatrixSpec {
    /// A spec with the default family parameters: rank 30, 40 outliers of
    /// magnitude 1000, `φ = 0.285` with perturbation 25, `w = 0.25`.
    pub fn new(family: MatrixFamily, d: usize, n: usize, seed: u64) -> Self {
        Self {
            family,
            d,
            n,
            seed,
            rank: 30,
            outliers: 40,
            magnitude: 1000.0,
            phi: 0.285,
            kahan_pert: DEFAULT_KAHAN_PERT,
            prolate_w: DEFAULT_PROLATE_W,
        }
    }

    pub fn with_rank(mut self, rank: usize) -> Self {
        self.rank = rank;
        self
    }

    pub fn with_outliers(mut self, outliers: usize, magnitude: f64) -> Self {
        self.outliers = outliers;
        self.magnitude = magnitude;
        self
    }

    pub fn with_phi(mut self, phi: f64) -> Self {
        self.phi = phi;
        self
    }

    pub fn generate(&self) -> Result<DenseMatrix> {
        let (d, n) = (self.d, self.n);
        if d == 0 || n == 0 {
            return Err(Error::InvalidSpec("matrix dimensions must be positive".into()));
        }
        if self.family.is_square() {
            if d != n {
                return Err(Error::InvalidSpec(format!("{} matrices are square, got {d}x{n}", self.family)));
            }
        } else if d > n {
            return Err(Error::InvalidSpec(format!("{} needs d <= n, got {d}x{n}", self.family)));
        }
        match self.family {
            MatrixFamily::Exponential => gen_exponential(d, n, self.seed),
            MatrixFamily::Quadratic => gen_quadratic(d, n, self.seed),
            MatrixFamily::Gaussian => Ok(gen_gaussian(d, n, self.seed)),
            MatrixFamily::Rom => gen_rom(d, n, self.outliers, self.magnitude, self.seed),
            MatrixFamily::LowRank => gen_lowrank(d, n, self.rank, self.seed),
            MatrixFamily::Fiedler => Ok(gen_fiedler(d, n)),
            MatrixFamily::Chebvand => Ok(gen_chebvand(d, n)),
            MatrixFamily::Prolate => gen_prolate(d, n, self.prolate_w),
            MatrixFamily::Kahan => gen_kahan_perturbed(d, self.phi, self.kahan_pert),
            MatrixFamily::Wilkinson => Ok(gen_wilkinson(d)),
        }
    }
}

fn gaussian_fill(rows: usize, cols: usize, rng: &mut SeededRng) -> DenseMatrix {
    let data = (0..rows * cols).map(|_| StandardNormal.sample(rng)).collect();
    DenseMatrix::new(rows, cols, data).expect("finite gaussian draws")
}

/// `U diag(σ) Vᵀ` with Haar-like `U` (`d × d`) and `V` (`n × d`).
fn with_spectrum(sigma: &[f64], n: usize, seed: u64) -> Result<DenseMatrix> {
    let d = sigma.len();
    if d > n {
        return Err(Error::InvalidSpec(format!("needs d <= n, got {d}x{n}")));
    }
    let u = orthonormal_basis(&gaussian_fill(d, d, &mut rng::stream(seed, streams::MATRIX)))?;
    let v = orthonormal_basis(&gaussian_fill(n, d, &mut rng::stream(seed, streams::MATRIX_AUX)))?;
    let mut us = u;
    for (t, s) in sigma.iter().enumerate() {
        us.col_mut(t).iter_mut().for_each(|x| *x *= s);
    }
    us.matmul(&v.transpose())
}

/// Singular values `α^(i−1)`, `α = 10^(−1/11)`.
pub fn gen_exponential(d: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    let alpha = exponential_rate();
    let sigma: Vec<f64> = (0..d).map(|i| alpha.powi(i as i32)).collect();
    with_spectrum(&sigma, n, seed)
}

/// Singular values `1/i²`.
pub fn gen_quadratic(d: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    let sigma: Vec<f64> = (1..=d).map(|i| 1.0 / (i * i) as f64).collect();
    with_spectrum(&sigma, n, seed)
}

pub fn gen_gaussian(d: usize, n: usize, seed: u64) -> DenseMatrix {
    gaussian_fill(d, n, &mut rng::stream(seed, streams::MATRIX))
}

/// Gaussian with `outliers` distinct columns rescaled to norm `magnitude·√d`.
pub fn gen_rom(d: usize, n: usize, outliers: usize, magnitude: f64, seed: u64) -> Result<DenseMatrix> {
    if outliers > n {
        return Err(Error::InvalidSpec(format!("{outliers} outliers requested for {n} columns")));
    }
    if !(magnitude.is_finite() && magnitude > 0.0) {
        return Err(Error::InvalidSpec(format!("outlier magnitude must be positive, got {magnitude}")));
    }
    let mut a = gen_gaussian(d, n, seed);
    let target = magnitude * (d as f64).sqrt();
    let mut rng = rng::stream(seed, streams::MATRIX_AUX);
    let mut picked = index::sample(&mut rng, n, outliers).into_vec();
    picked.sort_unstable();
    for j in picked {
        let col = a.col_mut(j);
        let norm = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        let f = target / norm;
        col.iter_mut().for_each(|x| *x *= f);
    }
    Ok(a)
}

/// `(d × r Gaussian)·(r × n Gaussian)`.
pub fn gen_lowrank(d: usize, n: usize, r: usize, seed: u64) -> Result<DenseMatrix> {
    if r == 0 {
        return Err(Error::InvalidSpec("rank must be positive".into()));
    }
    let left = gaussian_fill(d, r, &mut rng::stream(seed, streams::MATRIX));
    let right = gaussian_fill(r, n, &mut rng::stream(seed, streams::MATRIX_AUX));
    left.matmul(&right)
}

/// `A(i, j) = |i − j|`: the transposed leading `n × d` block of the Fiedler matrix.
pub fn gen_fiedler(d: usize, n: usize) -> DenseMatrix {
    DenseMatrix::from_fn(d, n, |i, j| (i as f64 - j as f64).abs())
}

/// `A(i, j) = Tᵢ(xⱼ)` with `xⱼ = j/(n−1)` equispaced on `[0, 1]`; row 0 is all ones.
pub fn gen_chebvand(d: usize, n: usize) -> DenseMatrix {
    let mut a = DenseMatrix::zeros(d, n);
    for j in 0..n {
        let x = if n == 1 { 0.0 } else { j as f64 / (n - 1) as f64 };
        let col = a.col_mut(j);
        col[0] = 1.0;
        if d > 1 {
            col[1] = x;
        }
        for i in 2..d {
            col[i] = 2.0 * x * col[i - 1] - col[i - 2];
        }
    }
    a
}

/// Transposed leading block of the symmetric prolate Toeplitz matrix with
/// `c₀ = 2w`, `c_k = sin(2πwk)/(πk)`.
pub fn gen_prolate(d: usize, n: usize, w: f64) -> Result<DenseMatrix> {
    if !(w > 0.0 && w < 0.5) {
        return Err(Error::InvalidSpec(format!("prolate parameter must lie in (0, 0.5), got {w}")));
    }
    let coef: Vec<f64> = (0..n.max(d))
        .map(|k| {
            if k == 0 {
                2.0 * w
            } else {
                let kf = k as f64;
                (2.0 * std::f64::consts::PI * w * kf).sin() / (std::f64::consts::PI * kf)
            }
        })
        .collect();
    Ok(DenseMatrix::from_fn(d, n, |i, j| coef[i.abs_diff(j)]))
}

/// `diag(1, δ, …, δ^(m−1))` times the unit upper triangular matrix with `−φ`
/// above the diagonal, `δ = √(1 − φ²)`.
pub fn gen_kahan(m: usize, phi: f64) -> Result<DenseMatrix> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::InvalidSpec(format!("Kahan parameter must lie in (0, 1), got {phi}")));
    }
    let delta = (1.0 - phi * phi).sqrt();
    let scale: Vec<f64> = (0..m).map(|i| delta.powi(i as i32)).collect();
    Ok(DenseMatrix::from_fn(m, m, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Equal => scale[i],
        std::cmp::Ordering::Less => -phi * scale[i],
        std::cmp::Ordering::Greater => 0.0,
    }))
}

/// [`gen_kahan`] with `pert·eps·(m−i)` added to diagonal entry `i`.
///
/// Without it the column norms tie exactly and rounding decides the greedy
/// pivot order; the perturbation makes greedy pivoting keep the identity
/// order, which is the configuration where it fails to reveal rank.
pub fn gen_kahan_perturbed(m: usize, phi: f64, pert: f64) -> Result<DenseMatrix> {
    if !(pert.is_finite() && pert >= 0.0) {
        return Err(Error::InvalidSpec(format!("Kahan perturbation must be nonnegative, got {pert}")));
    }
    let mut k = gen_kahan(m, phi)?;
    for i in 0..m {
        k[(i, i)] += pert * f64::EPSILON * (m - i) as f64;
    }
    Ok(k)
}

/// Unit lower triangular with `−1` below the diagonal and a last column of ones.
pub fn gen_wilkinson(m: usize) -> DenseMatrix {
    DenseMatrix::from_fn(m, m, |i, j| {
        if j + 1 == m || i == j {
            1.0
        } else if i > j {
            -1.0
        } else {
            0.0
        }
    })
}
