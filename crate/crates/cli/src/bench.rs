//! Predefined experiment suites.

use rayon::prelude::*;
use rayon::ThreadPool;
use seqrcs_core::metrics::{desk_suite, lower_median, summarize, support_size_trial};
use seqrcs_core::sketch::expected_p;
use seqrcs_core::testmat::gen_gaussian;
use seqrcs_core::SeqrcsConfig;

use crate::rows::{num, run_css, CssRow, Method, CSS_HEADER};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    /// SE-QRCS and QRCP on the desk suite, one css row per run.
    Ratios,
    /// Desk-suite residual summaries, one row per (matrix, method).
    Residuals,
    /// Pivot-selection wall time of SE-QRCS against QRCP on a Gaussian matrix.
    Timing,
    /// Mean candidate-set size against its expectation.
    Ep,
}

impl Suite {
    pub fn default_trials(self) -> usize {
        match self {
            Suite::Ratios | Suite::Residuals => 10,
            Suite::Timing => 5,
            Suite::Ep => 50,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchParams {
    pub d: Option<usize>,
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub trials: usize,
    pub seed: u64,
}

type Res<T> = seqrcs_core::Result<T>;

/// Every (matrix, trial, method) run of the desk suite, in that order.
/// Trial `t` uses seed `seed + t` for both the matrix and the sketch.
pub fn desk_runs(d: usize, n: usize, trials: usize, seed: u64, pool: &ThreadPool) -> Res<Vec<CssRow>> {
    let suite = desk_suite(d, n, seed);
    let jobs: Vec<(usize, usize)> = (0..suite.len()).flat_map(|e| (0..trials).map(move |t| (e, t))).collect();
    let rows: Vec<Res<Vec<CssRow>>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(e, t)| {
                let entry = &suite[e];
                let mut spec = entry.spec.clone();
                spec.seed = seed + t as u64;
                let a = spec.generate()?;
                let cfg = SeqrcsConfig::new(entry.k).with_seed(seed + t as u64);
                [Method::Seqrcs, Method::Qrcp]
                    .into_iter()
                    .map(|m| run_css(&a, entry.name(), t, m, &cfg, false))
                    .collect()
            })
            .collect()
    });
    Ok(rows.into_iter().collect::<Res<Vec<_>>>()?.into_iter().flatten().collect())
}

pub fn ratios(p: &BenchParams, pool: &ThreadPool) -> Res<String> {
    let rows = desk_runs(p.d.unwrap_or(50), p.n.unwrap_or(2000), p.trials, p.seed, pool)?;
    let mut out = format!("{CSS_HEADER}\n");
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    Ok(out)
}

pub const RESIDUALS_HEADER: &str =
    "matrix,method,d,n,k,trials,median_residual,min_residual,max_residual,median_ratio,min_ratio";

pub fn residuals(p: &BenchParams, pool: &ThreadPool) -> Res<String> {
    let rows = desk_runs(p.d.unwrap_or(50), p.n.unwrap_or(4000), p.trials, p.seed, pool)?;
    let mut out = format!("{RESIDUALS_HEADER}\n");
    let mut keys: Vec<(String, Method)> = Vec::new();
    for r in &rows {
        if !keys.iter().any(|(m, me)| *m == r.matrix && *me == r.method) {
            keys.push((r.matrix.clone(), r.method));
        }
    }
    for (matrix, method) in keys {
        let group: Vec<&CssRow> = rows.iter().filter(|r| r.matrix == matrix && r.method == method).collect();
        let res = summarize(&group.iter().map(|r| r.residual).collect::<Vec<_>>());
        let med_ratio = lower_median(&group.iter().map(|r| r.median_ratio).collect::<Vec<_>>());
        let min_ratio = group.iter().map(|r| r.min_ratio).fold(f64::INFINITY, f64::min);
        let first = group[0];
        out.push_str(&format!(
            "{matrix},{},{},{},{},{},{},{},{},{},{}\n",
            method.name(),
            first.d,
            first.n,
            first.k,
            group.len(),
            num(res.median),
            num(res.min),
            num(res.max),
            num(med_ratio),
            num(min_ratio)
        ));
    }
    Ok(out)
}

pub const TIMING_HEADER: &str = "trial,method,d,n,k,l,p,pivot_ms,total_ms";

/// Runs sequentially so the methods never compete for cores.
pub fn timing(p: &BenchParams) -> Res<String> {
    let (d, n) = (p.d.unwrap_or(100), p.n.unwrap_or(200_000));
    let k = p.k.unwrap_or(d);
    let a = gen_gaussian(d, n, p.seed);
    let cfg = SeqrcsConfig::new(k).with_seed(p.seed);
    let mut out = format!("{TIMING_HEADER}\n");
    for t in 0..p.trials {
        for m in [Method::Seqrcs, Method::Qrcp] {
            let r = run_css(&a, "gaussian", t, m, &cfg.clone().with_seed(p.seed + t as u64), false)?;
            out.push_str(&format!(
                "{t},{},{d},{n},{},{},{},{},{}\n",
                m.name(),
                r.k,
                r.l.map(|v| v.to_string()).unwrap_or_default(),
                r.p.map(|v| v.to_string()).unwrap_or_default(),
                num(r.pivot_ms()),
                num(r.total_ms)
            ));
        }
    }
    Ok(out)
}

pub const EP_HEADER: &str = "s,l,kprime,n,trials,mean_p,expected_p,rel_err";

/// `s = 1` uses `l = n/4`; `s ∈ {3, 6}` use `l = 6·⌈2·d·ln d / 6⌉` with
/// `d = 200` unless given. `k′ = 50` unless given.
pub fn ep(p: &BenchParams, pool: &ThreadPool) -> Res<String> {
    let n = p.n.unwrap_or(10_000);
    let d = p.d.unwrap_or(200) as f64;
    let kprime = p.k.unwrap_or(50);
    let l_sparse = 6 * (2.0 * d * d.ln() / 6.0).ceil() as usize;
    let mut out = format!("{EP_HEADER}\n");
    for (s, l) in [(1, n / 4), (3, l_sparse), (6, l_sparse)] {
        let sizes: Vec<Res<usize>> = pool.install(|| {
            (0..p.trials)
                .into_par_iter()
                .map(|t| support_size_trial(n, l, kprime, s, p.seed + t as u64))
                .collect()
        });
        let sizes = sizes.into_iter().collect::<Res<Vec<_>>>()?;
        let mean = sizes.iter().sum::<usize>() as f64 / sizes.len().max(1) as f64;
        let expect = expected_p(n, l, kprime, s);
        out.push_str(&format!(
            "{s},{l},{kprime},{n},{},{},{},{}\n",
            p.trials,
            num(mean),
            num(expect),
            num((mean - expect).abs() / expect)
        ));
    }
    Ok(out)
}
