//! CSV rows for column-selection runs.

use std::time::Instant;

use seqrcs_core::matcore::{spectral_norm, DenseMatrix};
use seqrcs_core::metrics::{ratio_report, residual_report};
use seqrcs_core::rrqr::{qrcp, srrqr, srrqr_bound, PartialQR};
use seqrcs_core::seqrcs::{rho1_oblivious, rho2_oblivious, rho_less, verify_factors, GuaranteeReport};
use seqrcs_core::{se_qrcs, SeqrcsConfig};

pub const CSS_HEADER: &str = "trial,method,matrix,d,n,k,kprime,l,s,p,residual,norm_R11invR12_2,norm_R11invR12_max,\
min_ratio,median_ratio,max_ratio,rho1,rho2,sketch_ms,srrqr_B_ms,support_ms,srrqr_A1_ms,assemble_ms,total_ms";

/// Column-selection methods exposed on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Method {
    Seqrcs,
    Qrcp,
    Srrqr,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Seqrcs => "seqrcs",
            Method::Qrcp => "qrcp",
            Method::Srrqr => "srrqr",
        }
    }
}

pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn opt_num(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

/// One run of a method on one matrix.
#[derive(Clone, Debug)]
pub struct CssRow {
    pub trial: usize,
    pub method: Method,
    pub matrix: String,
    pub d: usize,
    pub n: usize,
    pub k: usize,
    pub kprime: Option<usize>,
    pub l: Option<usize>,
    pub s: Option<usize>,
    pub p: Option<usize>,
    pub residual: f64,
    pub interp_2: f64,
    pub interp_max: f64,
    pub min_ratio: f64,
    pub median_ratio: f64,
    pub max_ratio: f64,
    pub rho1: Option<f64>,
    pub rho2: Option<f64>,
    /// sketch, srrqr on B, support, srrqr on Ã₁, assembly.
    pub stages: Option<[f64; 5]>,
    pub total_ms: f64,
    /// Bound check, filled on request for runs that carry bounds.
    pub guarantee: Option<GuaranteeReport>,
}

impl CssRow {
    pub fn to_csv(&self) -> String {
        let stages: Vec<String> = match self.stages {
            Some(st) => st.iter().map(|v| num(*v)).collect(),
            None => vec![String::new(); 5],
        };
        [
            self.trial.to_string(),
            self.method.name().to_string(),
            self.matrix.clone(),
            self.d.to_string(),
            self.n.to_string(),
            self.k.to_string(),
            opt(self.kprime),
            opt(self.l),
            opt(self.s),
            opt(self.p),
            num(self.residual),
            num(self.interp_2),
            num(self.interp_max),
            num(self.min_ratio),
            num(self.median_ratio),
            num(self.max_ratio),
            opt_num(self.rho1),
            opt_num(self.rho2),
        ]
        .into_iter()
        .chain(stages)
        .chain(std::iter::once(num(self.total_ms)))
        .collect::<Vec<_>>()
        .join(",")
    }

    /// Pivot-selection time: the sketch and both RRQR stages for SE-QRCS,
    /// the whole call otherwise.
    pub fn pivot_ms(&self) -> f64 {
        match self.stages {
            Some(st) => st[..4].iter().sum(),
            None => self.total_ms,
        }
    }
}

/// Runs `method` once; `cfg.seed` is the trial seed for SE-QRCS. With
/// `check`, runs that carry bounds are verified against them.
pub fn run_css(
    a: &DenseMatrix,
    matrix: &str,
    trial: usize,
    method: Method,
    cfg: &SeqrcsConfig,
    check: bool,
) -> seqrcs_core::Result<CssRow> {
    let n = a.cols();
    let k = cfg.k;
    let start = Instant::now();
    let (fac, extra) = match method {
        Method::Qrcp => (qrcp(a, k)?, None),
        Method::Srrqr => (srrqr(a, k, cfg.f)?, None),
        Method::Seqrcs => {
            let res = se_qrcs(a, cfg)?;
            let fac = res.factors.clone();
            (fac, Some(res))
        }
    };
    let total_ms = start.elapsed().as_secs_f64() * 1e3;
    let (rho1, rho2) = match (&extra, method) {
        (Some(res), _) => {
            let bounds = if res.kind.is_less() {
                rho_less(fac.k, res.kprime, res.p, res.l, cfg.f, cfg.eps, res.max_row_load.max(1) as f64).ok()
            } else {
                rho1_oblivious(fac.k, res.kprime, res.p, res.l, cfg.f, cfg.eps)
                    .and_then(|r1| Ok((r1, rho2_oblivious(fac.k, res.kprime, res.p, res.l, cfg.f, cfg.eps)?)))
                    .ok()
            };
            (bounds.map(|b| b.0), bounds.map(|b| b.1))
        }
        (None, Method::Srrqr) => {
            let kf = fac.k as f64;
            (Some(srrqr_bound(fac.k, n, cfg.f)), Some(cfg.f * (kf * (n as f64 - kf)).sqrt()))
        }
        _ => (None, None),
    };
    let guarantee = match (check, rho1, rho2) {
        (true, Some(r1), Some(r2)) => {
            let mut rep = verify_factors(a, &fac, r1, r2)?;
            rep.p_below_l = extra.as_ref().is_some_and(|r| r.p_below_l());
            Some(rep)
        }
        _ => None,
    };
    let mut row = finish(a, matrix, trial, method, fac, extra.as_ref(), rho1, rho2, total_ms)?;
    row.guarantee = guarantee;
    Ok(row)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    a: &DenseMatrix,
    matrix: &str,
    trial: usize,
    method: Method,
    fac: PartialQR,
    res: Option<&seqrcs_core::SeqrcsResult>,
    rho1: Option<f64>,
    rho2: Option<f64>,
    total_ms: f64,
) -> seqrcs_core::Result<CssRow> {
    let ratios = ratio_report(a, &fac);
    let interp = fac.interpolation()?;
    Ok(CssRow {
        trial,
        method,
        matrix: matrix.to_string(),
        d: a.rows(),
        n: a.cols(),
        k: fac.k,
        kprime: res.map(|r| r.kprime),
        l: res.map(|r| r.l),
        s: res.map(|r| r.s),
        p: res.map(|r| r.p),
        residual: residual_report(a, &fac),
        interp_2: spectral_norm(&interp),
        interp_max: interp.max_abs(),
        min_ratio: ratios.summary.min,
        median_ratio: ratios.summary.median,
        max_ratio: ratios.summary.max,
        rho1,
        rho2,
        stages: res.map(|r| {
            let t = &r.timings;
            [t.sketch_ms, t.srrqr_b_ms, t.support_ms, t.srrqr_a1_ms, t.assemble_ms]
        }),
        total_ms: res.map_or(total_ms, |r| r.timings.total_ms),
        guarantee: None,
    })
}
