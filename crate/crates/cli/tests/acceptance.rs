//! Acceptance run: every criterion prints one PASS/FAIL line; the process
//! exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::sync::OnceLock;
use std::time::Instant;

use rayon::prelude::*;
use seqrcs_core::luprrp::{gepp, growth_bound, lu_prrp, PanelMethod};
use seqrcs_core::matcore::{orthonormal_basis, singular_values, spectral_norm, DenseMatrix};
use seqrcs_core::metrics::{
    brute_force_css, desk_suite, lower_median, ratio_report, residual_report, support_size_trial, SuiteEntry,
};
use seqrcs_core::rrqr::{qrcp, srrqr, srrqr_bound, verify_condition};
use seqrcs_core::seqrcs::{rho1_oblivious, rho2_oblivious, verify_guarantee};
use seqrcs_core::sketch::{apply_right, countsketch, expected_p};
use seqrcs_core::testmat::{gen_gaussian, gen_kahan_perturbed, gen_wilkinson, MatrixFamily, MatrixSpec};
use seqrcs_core::{se_qrcs, EmbeddingKind, SeqrcsConfig, SeqrcsResult};

type Criterion = (&'static str, Box<dyn Fn() -> Outcome>);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn instance(entry: &SuiteEntry, seed: u64) -> DenseMatrix {
    let mut spec = entry.spec.clone();
    spec.seed = seed;
    spec.generate().unwrap()
}

fn rho_pair(res: &SeqrcsResult, k: usize, cfg: &SeqrcsConfig) -> (f64, f64) {
    (
        rho1_oblivious(k, res.kprime, res.p, res.l, cfg.f, cfg.eps).unwrap(),
        rho2_oblivious(k, res.kprime, res.p, res.l, cfg.f, cfg.eps).unwrap(),
    )
}

fn c1_reconstruction() -> Outcome {
    let start = Instant::now();
    let mut jobs: Vec<(SuiteEntry, SeqrcsConfig, u64)> = Vec::new();
    for seed in 0..10u64 {
        for e in desk_suite(50, 2000, 0) {
            let cfg = SeqrcsConfig::new(e.k).with_seed(seed);
            jobs.push((e, cfg, seed));
        }
        for e in desk_suite(100, 2000, 0) {
            let cfg = SeqrcsConfig::new(e.k).with_embedding(EmbeddingKind::Osnap, 6).with_seed(seed);
            jobs.push((e, cfg, seed));
        }
    }
    let errs: Vec<(String, f64)> = jobs
        .par_iter()
        .map(|(e, cfg, seed)| {
            let a = instance(e, *seed);
            let res = se_qrcs(&a, cfg).unwrap();
            (format!("{} d={} s={} seed={seed}", e.name(), e.spec.d, cfg.s), res.factors.reconstruction_error(&a).unwrap())
        })
        .collect();
    let secs = start.elapsed().as_secs_f64();
    let worst = errs.iter().max_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
    outcome(
        worst.1 <= 1e-11 && secs < 60.0,
        format!("{} runs, worst error {:.2e} ({}), {secs:.1}s", errs.len(), worst.1, worst.0),
    )
}

fn c2_condition() -> Outcome {
    let mut cases: Vec<(String, DenseMatrix, usize)> =
        desk_suite(50, 2000, 0).iter().map(|e| (e.name().to_string(), instance(e, 0), e.k)).collect();
    cases.push(("kahan96".into(), gen_kahan_perturbed(96, 0.285, 25.0).unwrap(), 95));
    let excess: Vec<(String, f64)> = cases
        .par_iter()
        .map(|(name, a, k)| {
            let fac = srrqr(a, *k, 2.0).unwrap();
            (name.clone(), verify_condition(&fac, 2.0).unwrap().max_excess)
        })
        .collect();
    let worst = excess.iter().max_by(|x, y| x.1.total_cmp(&y.1)).unwrap();
    let (_, kahan, k) = cases.last().unwrap();
    let sv = singular_values(kahan);
    let greedy = qrcp(kahan, *k).unwrap();
    let smin = *singular_values(&greedy.r11()).last().unwrap();
    let factor = sv[k - 1] / smin / srrqr_bound(*k, 96, 2.0);
    outcome(
        worst.1 <= 1e-8 && factor >= 1e3,
        format!(
            "max condition excess {:.2e} ({}); qrcp on Kahan exceeds the sigma_min bound by {factor:.2e}x",
            worst.1, worst.0
        ),
    )
}

/// The 20 matrix configurations behind criteria 3 and 4: ten wide matrices,
/// each sketched with CountSketch and with OSNAP (s = 6).
fn guarantee_configs() -> Vec<(String, MatrixSpec, usize, EmbeddingKind, usize)> {
    let mut base: Vec<(MatrixSpec, usize)> = desk_suite(50, 2000, 0).into_iter().map(|e| (e.spec, e.k)).collect();
    base.push((MatrixSpec::new(MatrixFamily::Gaussian, 20, 500, 0), 5));
    base.push((MatrixSpec::new(MatrixFamily::Rom, 30, 1000, 0).with_outliers(10, 1000.0), 10));
    let mut out = Vec::new();
    for (spec, k) in base {
        for (kind, s) in [(EmbeddingKind::CountSketch, 1), (EmbeddingKind::Osnap, 6)] {
            out.push((format!("{} {}x{} s={s}", spec.family, spec.d, spec.n), spec.clone(), k, kind, s));
        }
    }
    out
}

struct GuaranteeRun {
    label: String,
    passed: bool,
    max_r11: f64,
    rho1: f64,
    interp2: f64,
    rho2: f64,
    worst_interlace: f64,
    p_below_l: bool,
}

fn guarantee_runs() -> &'static [GuaranteeRun] {
    static RUNS: OnceLock<Vec<GuaranteeRun>> = OnceLock::new();
    RUNS.get_or_init(compute_guarantee_runs)
}

fn compute_guarantee_runs() -> Vec<GuaranteeRun> {
    let jobs: Vec<_> = guarantee_configs()
        .into_iter()
        .flat_map(|c| (0..10u64).map(move |seed| (c.clone(), seed)))
        .collect();
    jobs.par_iter()
        .map(|((label, spec, k, kind, s), seed)| {
            let mut spec = spec.clone();
            spec.seed = *seed;
            let a = spec.generate().unwrap();
            let cfg = SeqrcsConfig::new(*k).with_embedding(*kind, *s).with_seed(*seed);
            let res = se_qrcs(&a, &cfg).unwrap();
            let (rho1, rho2) = rho_pair(&res, res.factors.k, &cfg);
            let rep = verify_guarantee(&a, &res, rho1, rho2).unwrap();
            let worst_interlace = ratio_report(&a, &res.factors).ratios.into_iter().fold(0.0, f64::max);
            GuaranteeRun {
                label: format!("{label} seed={seed}"),
                passed: rep.max_ratio_r11 <= rho1 && rep.norm_interp_2 <= rho2,
                max_r11: rep.max_ratio_r11,
                rho1,
                interp2: rep.norm_interp_2,
                rho2,
                worst_interlace,
                p_below_l: rep.p_below_l,
            }
        })
        .collect()
}

fn c3_guarantee(runs: &[GuaranteeRun]) -> Outcome {
    let bad: Vec<&GuaranteeRun> = runs.iter().filter(|r| !r.passed).collect();
    let tightest = runs
        .iter()
        .max_by(|x, y| (x.max_r11 / x.rho1).total_cmp(&(y.max_r11 / y.rho1)))
        .unwrap();
    let tightest2 = runs.iter().map(|r| r.interp2 / r.rho2).fold(0.0, f64::max);
    let below = runs.iter().filter(|r| r.p_below_l).count();
    let mut detail = format!(
        "{} runs, {} violations; largest sigma ratio / rho1 = {:.2e} ({}), largest |R11^-1 R12|_2 / rho2 = {tightest2:.2e}; {below} runs annotated p < l",
        runs.len(),
        bad.len(),
        tightest.max_r11 / tightest.rho1,
        tightest.label
    );
    if let Some(b) = bad.first() {
        detail.push_str(&format!("; first violation {}", b.label));
    }
    outcome(runs.len() == 200 && bad.is_empty(), detail)
}

fn c4_interlacing(runs: &[GuaranteeRun]) -> Outcome {
    let worst = runs.iter().max_by(|x, y| x.worst_interlace.total_cmp(&y.worst_interlace)).unwrap();
    outcome(
        worst.worst_interlace <= 1.0 + 1e-10,
        format!("max sigma_i(R11)/sigma_i(A) = {:.15} ({})", worst.worst_interlace, worst.label),
    )
}

fn c5_support_size() -> Outcome {
    let start = Instant::now();
    let (n, kprime) = (10_000, 50);
    let l_sparse = 6 * (2.0 * 200.0 * 200f64.ln() / 6.0).ceil() as usize;
    let mean = |s: usize, l: usize| {
        let sizes: Vec<usize> =
            (0..100u64).into_par_iter().map(|seed| support_size_trial(n, l, kprime, s, seed).unwrap()).collect();
        sizes.iter().sum::<usize>() as f64 / sizes.len() as f64
    };
    let m1 = mean(1, 2500);
    let mut pass = (190.0..=210.0).contains(&m1);
    let mut detail = format!("s=1 l=2500: mean p {m1:.1} (expected {:.1})", expected_p(n, 2500, kprime, 1));
    for s in [3, 6] {
        let m = mean(s, l_sparse);
        let e = expected_p(n, l_sparse, kprime, s);
        pass &= ((m - e) / e).abs() <= 0.05;
        detail.push_str(&format!("; s={s} l={l_sparse}: mean {m:.1} vs {e:.1}"));
    }
    let secs = start.elapsed().as_secs_f64();
    detail.push_str(&format!("; {secs:.1}s"));
    outcome(pass && secs < 30.0, detail)
}

/// Per matrix of the desk suite: per-seed (residual, median ratio) for
/// SE-QRCS and QRCP.
fn desk_comparison(d: usize, n: usize, families: &[MatrixFamily]) -> Vec<(String, Vec<[f64; 4]>)> {
    desk_suite(d, n, 0)
        .into_iter()
        .filter(|e| families.contains(&e.spec.family))
        .map(|e| {
            let per_seed: Vec<[f64; 4]> = (0..10u64)
                .into_par_iter()
                .map(|seed| {
                    let a = instance(&e, seed);
                    let se = se_qrcs(&a, &SeqrcsConfig::new(e.k).with_seed(seed)).unwrap().factors;
                    let qr = qrcp(&a, e.k).unwrap();
                    [
                        residual_report(&a, &se),
                        residual_report(&a, &qr),
                        ratio_report(&a, &se).summary.median,
                        ratio_report(&a, &qr).summary.median,
                    ]
                })
                .collect();
            (e.name().to_string(), per_seed)
        })
        .collect()
}

fn column(v: &[[f64; 4]], i: usize) -> Vec<f64> {
    v.iter().map(|r| r[i]).collect()
}

fn c6_residual_parity() -> Outcome {
    use MatrixFamily::*;
    let rows = desk_comparison(50, 4000, &[Fiedler, Prolate, Chebvand, Rom, LowRank]);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, runs) in rows {
        let se = lower_median(&column(&runs, 0));
        let qr = lower_median(&column(&runs, 1));
        let mut ok = se <= 10.0 * qr;
        if ["lowrank", "prolate", "chebvand"].contains(&name.as_str()) {
            ok &= se <= 1e-10 && qr <= 1e-10;
        }
        pass &= ok;
        parts.push(format!("{name} {se:.2e}/{qr:.2e}{}", if ok { "" } else { " !" }));
    }
    outcome(pass, format!("median residual seqrcs/qrcp: {}", parts.join(", ")))
}

fn c7_ratio_summaries() -> Outcome {
    let rows = desk_comparison(50, 2000, &MatrixFamily::ALL);
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, runs) in rows {
        let se = lower_median(&column(&runs, 2));
        let qr = lower_median(&column(&runs, 3));
        let mut ok = se >= 0.25 * qr;
        if ["rom", "fiedler", "prolate"].contains(&name.as_str()) {
            ok &= se >= 0.5 && qr >= 0.5;
        }
        pass &= ok;
        parts.push(format!("{name} {se:.3}/{qr:.3}{}", if ok { "" } else { " !" }));
    }
    outcome(pass, format!("median ratio seqrcs/qrcp: {}", parts.join(", ")))
}

fn c8_runtime() -> Outcome {
    let start = Instant::now();
    let a = gen_gaussian(100, 200_000, 0);
    let mut se_ms = Vec::new();
    let mut qr_ms = Vec::new();
    for seed in 0..5u64 {
        let res = se_qrcs(&a, &SeqrcsConfig::new(100).with_seed(seed)).unwrap();
        se_ms.push(res.timings.pivot_ms());
        let t = Instant::now();
        let f = qrcp(&a, 100).unwrap();
        qr_ms.push(t.elapsed().as_secs_f64() * 1e3);
        assert_eq!(f.k, 100);
    }
    let (se, qr) = (lower_median(&se_ms), lower_median(&qr_ms));
    let secs = start.elapsed().as_secs_f64();
    outcome(
        se <= qr / 3.0 && secs < 600.0,
        format!("median pivot time seqrcs {se:.0} ms, qrcp {qr:.0} ms (speedup {:.2}x); {secs:.1}s", qr / se),
    )
}

fn c9_embedding() -> Outcome {
    let (n, d, eps) = (2000, 10, 0.5f64);
    let l = ((d * d) as f64 / (eps * eps)).round() as usize;
    let u = orthonormal_basis(&gen_gaussian(n, d, 0)).unwrap();
    let (lo, hi) = ((1.0 - eps).sqrt(), (1.0 + eps).sqrt());
    let good = (0..100u64)
        .into_par_iter()
        .filter(|&seed| {
            let omega = countsketch(n, l, seed).unwrap();
            // ΩU = (UᵀΩᵀ)ᵀ; singular values are transpose invariant
            let s = singular_values(&apply_right(&u.transpose(), &omega).unwrap());
            s.iter().all(|&v| v >= lo && v <= hi)
        })
        .count();
    outcome(good >= 90, format!("{good}/100 trials inside [sqrt(1-eps), sqrt(1+eps)] with l={l}"))
}

fn c10_sandwich() -> Outcome {
    let mut pass = true;
    let mut slack_lo = f64::INFINITY;
    let mut slack_hi = f64::INFINITY;
    for seed in 0..20u64 {
        let a = gen_gaussian(6, 12, 1000 + seed);
        let cfg = SeqrcsConfig::new(3).with_l(9).with_seed(seed);
        let res = se_qrcs(&a, &cfg).unwrap();
        let (rho1, _) = rho_pair(&res, 3, &cfg);
        let resid = spectral_norm(&res.factors.r22());
        let best = brute_force_css(&a, 3).unwrap().residual;
        let sigma4 = singular_values(&a)[3];
        pass &= best <= resid * (1.0 + 1e-12) && resid <= rho1 * sigma4;
        slack_lo = slack_lo.min(resid / best);
        slack_hi = slack_hi.min(rho1 * sigma4 / resid);
    }
    outcome(
        pass,
        format!("20 instances; min seqrcs/best = {slack_lo:.4}, min rho1*sigma4/seqrcs = {slack_hi:.2e}"),
    )
}

fn c11_luprrp() -> Outcome {
    let mut jobs = Vec::new();
    for n in [256usize, 512, 1024] {
        for b in [8usize, 16, 32] {
            for m in [PanelMethod::Srrqr, PanelMethod::Seqrcs] {
                jobs.push((n, b, m));
            }
        }
    }
    let gepp_growth: Vec<(usize, f64)> = [256usize, 512, 1024]
        .par_iter()
        .map(|&n| (n, gepp(&gen_gaussian(n, n, n as u64)).unwrap().growth))
        .collect();
    let runs: Vec<(String, bool)> = jobs
        .par_iter()
        .map(|&(n, b, m)| {
            let a = gen_gaussian(n, n, n as u64);
            let r = lu_prrp(&a, b, 2.0, m, 0).unwrap();
            let g = gepp_growth.iter().find(|x| x.0 == n).unwrap().1;
            let rel = r.growth / g;
            let ok = r.residual <= 1e-12 && r.growth <= growth_bound(n, b, 2.0) && (0.3..=3.0).contains(&rel);
            (format!("n={n} b={b} {m}: growth {:.2} (gepp {g:.2}) resid {:.1e}", r.growth, r.residual), ok)
        })
        .collect();
    let w = gen_wilkinson(48);
    let prrp = lu_prrp(&w, 16, 2.0, PanelMethod::Srrqr, 0).unwrap().growth;
    let pp = gepp(&w).unwrap().growth;
    let bad: Vec<&String> = runs.iter().filter(|r| !r.1).map(|r| &r.0).collect();
    let pass = bad.is_empty() && prrp <= 50.0 && pp >= 2f64.powi(40);
    let growths: Vec<f64> = gepp_growth.iter().map(|g| g.1).collect();
    let mut detail = format!(
        "{} random runs, {} failing; gepp growth {:?}; wilkinson48 growth prrp {prrp:.2}, gepp {pp:.3e}",
        runs.len(),
        bad.len(),
        growths.iter().map(|g| format!("{g:.2}")).collect::<Vec<_>>()
    );
    if let Some(b) = bad.first() {
        detail.push_str(&format!("; first failure {b}"));
    }
    outcome(pass, detail)
}

fn strip_timing(csv: &str) -> String {
    let timing = ["sketch_ms", "srrqr_B_ms", "support_ms", "srrqr_A1_ms", "assemble_ms", "total_ms", "time_ms", "pivot_ms"];
    let header: Vec<&str> = csv.lines().next().unwrap_or("").split(',').collect();
    csv.lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| !timing.contains(&header[*i]))
                .map(|(_, f)| f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_seqrcs");
    let mat = dir.path().join("rom.bin");
    let mat = mat.to_str().unwrap();
    let run = |args: &[&str]| {
        let out = Command::new(bin).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}");
        String::from_utf8(out.stdout).unwrap()
    };
    run(&["gen", "--family", "rom", "--d", "30", "--n", "1500", "--seed", "3", "--out", mat]);
    let commands: Vec<Vec<&str>> = vec![
        vec!["css", "--in", mat, "--k", "10", "--trials", "5", "--seed", "2", "--jobs", "3"],
        vec!["css", "--in", mat, "--k", "10", "--embedding", "osnap", "--s", "3", "--trials", "3"],
        vec!["css", "--in", mat, "--k", "10", "--embedding", "less-ind-rows", "--trials", "3"],
        vec!["css", "--in", mat, "--k", "10", "--method", "srrqr"],
        vec!["luprrp", "--n", "128", "--b", "16", "--panel", "seqrcs", "--seed", "9"],
        vec!["bench", "--suite", "ep", "--trials", "10", "--jobs", "2"],
        vec!["bench", "--suite", "ratios", "--d", "10", "--n", "300", "--trials", "2", "--jobs", "2"],
    ];
    let mut identical = 0;
    for c in &commands {
        if strip_timing(&run(c)) == strip_timing(&run(c)) {
            identical += 1;
        }
    }
    outcome(
        identical == commands.len(),
        format!("{identical}/{} command lines reproduce byte-identical CSV outside timing columns", commands.len()),
    )
}

fn main() {
    let criteria: Vec<Criterion> = vec![
        ("factorization correctness", Box::new(c1_reconstruction)),
        ("strong RRQR condition", Box::new(c2_condition)),
        ("sketched guarantee", Box::new(|| c3_guarantee(guarantee_runs()))),
        ("interlacing", Box::new(|| c4_interlacing(guarantee_runs()))),
        ("expected support size", Box::new(c5_support_size)),
        ("residual parity with QRCP", Box::new(c6_residual_parity)),
        ("ratio summaries", Box::new(c7_ratio_summaries)),
        ("pivot-selection runtime", Box::new(c8_runtime)),
        ("embedding property", Box::new(c9_embedding)),
        ("brute-force sandwich", Box::new(c10_sandwich)),
        ("LU with panel RRQR", Box::new(c11_luprrp)),
        ("CLI determinism", Box::new(c12_determinism)),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let res = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !res.pass {
            failures += 1;
        }
        println!(
            "{} criterion {:>2} {name} [{:.1}s]: {}",
            if res.pass { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64(),
            res.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
