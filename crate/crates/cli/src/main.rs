//! `seqrcs`: seeded experiment driver.
//!
//! Exit codes: 0 on success, 2 for invalid arguments, 3 for runtime or
//! numerical failures.

mod bench;
mod rows;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use seqrcs_core::luprrp::{gepp, lu_prrp, PanelMethod};
use seqrcs_core::matcore::{io, DenseMatrix};
use seqrcs_core::metrics::brute_force_css;
use seqrcs_core::testmat::{MatrixFamily, MatrixSpec};
use seqrcs_core::{EmbeddingKind, SeqrcsConfig};

use bench::{BenchParams, Suite};
use rows::{num, run_css, Method, CSS_HEADER};

#[derive(Parser)]
#[command(name = "seqrcs", version, about = "Column subset selection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a test matrix and write it to a file.
    Gen(GenArgs),
    /// Select columns of a stored matrix and report one CSV row per trial.
    Css(CssArgs),
    /// Run a predefined experiment suite.
    Bench(BenchArgs),
    /// Exhaustive best column subset (small problems only).
    Oracle(OracleArgs),
    /// LU with panel rank-revealing pivoting.
    Luprrp(LuArgs),
}

#[derive(Args)]
struct GenArgs {
    /// exponential, quadratic, gaussian, rom, lowrank, fiedler, chebvand,
    /// prolate, kahan or wilkinson.
    #[arg(long)]
    family: MatrixFamily,
    #[arg(long)]
    d: usize,
    /// Columns; must equal d for kahan and wilkinson.
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// lowrank: rank [default: 30].
    #[arg(long)]
    rank: Option<usize>,
    /// rom: number of outlier columns [default: 40].
    #[arg(long)]
    outliers: Option<usize>,
    /// rom: outlier magnitude [default: 1000].
    #[arg(long)]
    magnitude: Option<f64>,
    /// kahan: angle parameter [default: 0.285].
    #[arg(long)]
    phi: Option<f64>,
    /// kahan: diagonal perturbation in units of eps·(m−i) [default: 25].
    #[arg(long)]
    pert: Option<f64>,
    /// Write CSV instead of the SEQMAT01 binary format.
    #[arg(long)]
    csv: bool,
}

#[derive(Args)]
struct CssArgs {
    /// Matrix file (SEQMAT01 or CSV).
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    /// Sketch-stage rank; 0 starts at k and doubles until the candidate set
    /// covers d columns.
    #[arg(long, default_value_t = 0)]
    kprime: usize,
    #[arg(long, value_enum, default_value_t = Method::Seqrcs)]
    method: Method,
    /// countsketch, osnap, less-ind-rows or less-ind-ent.
    #[arg(long, default_value = "countsketch")]
    embedding: EmbeddingKind,
    /// Nonzeros per column; 0 picks 1 for countsketch, 6 for osnap and
    /// ⌈log₂ d⌉ for the leverage-score kinds.
    #[arg(long, default_value_t = 0)]
    s: usize,
    /// Embedding dimension; 0 picks min(⌈d²/ε²⌉, ⌊n/2⌋) for countsketch,
    /// s·⌈2·d·ln d / s⌉ for osnap and ⌈d/ε²⌉ for the leverage-score kinds.
    #[arg(long, default_value_t = 0)]
    l: usize,
    #[arg(long, default_value_t = 2.0)]
    f: f64,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Trial t uses seed + t.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    /// Worker threads for independent trials; output order is unaffected.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Also check each run against its bounds and print a verdict to stderr.
    #[arg(long)]
    report: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum)]
    suite: Suite,
    /// Defaults: 10 for ratios and residuals, 5 for timing, 50 for ep.
    #[arg(long)]
    trials: Option<usize>,
    /// Rows; defaults: 50 (ratios, residuals), 100 (timing), 200 (ep, sets l).
    #[arg(long)]
    d: Option<usize>,
    /// Columns; defaults: 2000 (ratios), 4000 (residuals), 200000 (timing), 10000 (ep).
    #[arg(long)]
    n: Option<usize>,
    /// timing: target rank [default: d]; ep: sketch rank [default: 50].
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Panel {
    Srrqr,
    Seqrcs,
    /// Plain partial pivoting, for comparison.
    Gepp,
}

#[derive(Args)]
struct LuArgs {
    #[arg(long)]
    n: usize,
    /// Panel width; must divide n.
    #[arg(long, default_value_t = 16)]
    b: usize,
    /// A square family (kahan, wilkinson) or gaussian; `random` is gaussian.
    #[arg(long, default_value = "random")]
    matrix: String,
    #[arg(long, value_enum, default_value_t = Panel::Srrqr)]
    panel: Panel,
    #[arg(long, default_value_t = 2.0)]
    f: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

enum CliError {
    Usage(String),
    Runtime(String),
}

impl From<seqrcs_core::Error> for CliError {
    fn from(e: seqrcs_core::Error) -> Self {
        match e {
            seqrcs_core::Error::InvalidSpec(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn with_path(path: &Path) -> impl Fn(seqrcs_core::Error) -> CliError + '_ {
    move |e| match e {
        seqrcs_core::Error::InvalidSpec(_) => CliError::Usage(format!("{}: {e}", path.display())),
        _ => CliError::Runtime(format!("{}: {e}", path.display())),
    }
}

fn load(path: &Path) -> CliResult<DenseMatrix> {
    io::load(path).map_err(with_path(path))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Runtime(e.to_string())),
    }
}

fn pool(jobs: usize) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn matrix_name(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn cmd_gen(args: GenArgs) -> CliResult<()> {
    let mut spec = MatrixSpec::new(args.family, args.d, args.n, args.seed);
    if let Some(r) = args.rank {
        spec.rank = r;
    }
    if let Some(o) = args.outliers {
        spec.outliers = o;
    }
    if let Some(m) = args.magnitude {
        spec.magnitude = m;
    }
    if let Some(phi) = args.phi {
        spec.phi = phi;
    }
    if let Some(p) = args.pert {
        spec.kahan_pert = p;
    }
    let a = spec.generate()?;
    io::save(&a, &args.out, args.csv).map_err(with_path(&args.out))
}

fn cmd_css(args: CssArgs) -> CliResult<()> {
    let a = load(&args.input)?;
    let name = matrix_name(&args.input);
    let mut base = SeqrcsConfig::new(args.k).with_embedding(args.embedding, args.s);
    base.kprime = args.kprime;
    base.l = args.l;
    base.f = args.f;
    base.eps = args.eps;
    let results: Vec<_> = pool(args.jobs)?.install(|| {
        (0..args.trials)
            .into_par_iter()
            .map(|t| {
                let cfg = base.clone().with_seed(args.seed + t as u64);
                run_css(&a, &name, t, args.method, &cfg, args.report)
            })
            .collect()
    });
    let mut out = format!("{CSS_HEADER}\n");
    for r in results {
        let row = r?;
        if let Some(g) = &row.guarantee {
            eprintln!(
                "trial {}: bounds {}{} (max σ(A)/σ(R11) {:.3e} vs rho1 {:.3e}, ‖R11⁻¹R12‖₂ {:.3e} vs rho2 {:.3e})",
                row.trial,
                if g.passed { "hold" } else { "VIOLATED" },
                if g.p_below_l { ", p < l" } else { "" },
                g.max_ratio_r11,
                g.rho1,
                g.norm_interp_2,
                g.rho2
            );
        }
        out.push_str(&row.to_csv());
        out.push('\n');
    }
    emit(args.out.as_deref(), &out)
}

fn cmd_bench(args: BenchArgs) -> CliResult<()> {
    let params = BenchParams {
        d: args.d,
        n: args.n,
        k: args.k,
        trials: args.trials.unwrap_or(args.suite.default_trials()),
        seed: args.seed,
    };
    let pool = pool(args.jobs)?;
    let text = match args.suite {
        Suite::Ratios => bench::ratios(&params, &pool)?,
        Suite::Residuals => bench::residuals(&params, &pool)?,
        Suite::Timing => bench::timing(&params)?,
        Suite::Ep => bench::ep(&params, &pool)?,
    };
    emit(args.out.as_deref(), &text)
}

fn cmd_oracle(args: OracleArgs) -> CliResult<()> {
    let a = load(&args.input)?;
    let best = brute_force_css(&a, args.k)?;
    let idx: Vec<String> = best.indices.iter().map(|i| i.to_string()).collect();
    let text = format!("k,residual,indices\n{},{},{}\n", args.k, num(best.residual), idx.join(";"));
    emit(args.out.as_deref(), &text)
}

fn cmd_luprrp(args: LuArgs) -> CliResult<()> {
    let family: MatrixFamily = match args.matrix.to_ascii_lowercase().as_str() {
        "random" => MatrixFamily::Gaussian,
        other => other.parse()?,
    };
    let a = MatrixSpec::new(family, args.n, args.n, args.seed).generate()?;
    let start = Instant::now();
    let res = match args.panel {
        Panel::Gepp => gepp(&a)?,
        Panel::Srrqr => lu_prrp(&a, args.b, args.f, PanelMethod::Srrqr, args.seed)?,
        Panel::Seqrcs => lu_prrp(&a, args.b, args.f, PanelMethod::Seqrcs, args.seed)?,
    };
    let ms = start.elapsed().as_secs_f64() * 1e3;
    let panel = match args.panel {
        Panel::Gepp => "gepp",
        Panel::Srrqr => "srrqr",
        Panel::Seqrcs => "seqrcs",
    };
    let text = format!(
        "matrix,n,b,panel_method,growth,norm_U_1,norm_Uinv_1,residual,time_ms\n{},{},{},{},{},{},{},{},{}\n",
        family.name(),
        args.n,
        args.b,
        panel,
        num(res.growth),
        num(res.norm_u_1),
        num(res.norm_uinv_1),
        num(res.residual),
        num(ms)
    );
    emit(args.out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Css(a) => cmd_css(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Luprrp(a) => cmd_luprrp(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
