//! `sphtess`: exact moments, reference tables, figure data and Monte Carlo checks.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use sphtess_core::geom::KappaFamily;
use sphtess_core::moments::{self, EuclidGamma, EuclidQuery, ExpectationQuery, Flavor, Quantity};
use sphtess_core::report::{self, FigureId, FigureSpec, RowVerdict, TableId, TableSpec};
use sphtess_core::simulate::{self, ExperimentConfig, Route, Verdict};
use sphtess_core::exactnum::format_sig;

#[derive(Parser)]
#[command(name = "sphtess", version, about = "Faces of random great-hypersphere tessellations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact value of one expectation.
    Eval(EvalArgs),
    /// Reproduce a reference table and compare it with the printed values.
    Table(TableArgs),
    /// Write every reference table into a directory.
    DumpTables {
        #[arg(long)]
        dir: PathBuf,
    },
    /// Exact plot data for a figure.
    Figure(FigureArgs),
    /// Monte Carlo estimate of one expectation.
    Simulate(SimArgs),
    /// Monte Carlo estimate next to the exact value.
    Compare {
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Sampler cross-checks (size bias, kappa invariance, skeleton content).
    Consistency {
        #[arg(long, default_value_t = 20_000)]
        reps: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Gap between scaled spherical intrinsic volumes and their Euclidean limit.
    Limit {
        #[arg(long)]
        d: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[arg(long, default_value = "typical")]
        flavor: Flavor,
        #[arg(long, value_delimiter = ',', default_value = "25,50,100,200")]
        n: Vec<u32>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EvalQuantity {
    F,
    #[value(name = "U")]
    U,
    V,
    Vminus1,
    Statdim,
    Hk,
    Isect,
    EuclidV,
    EuclidF,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, value_enum)]
    quantity: EvalQuantity,
    #[arg(long, default_value = "typical")]
    flavor: Flavor,
    #[arg(long, default_value_t = 0)]
    n: u32,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    d: u32,
    /// Face dimension; defaults to `d`.
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, default_value_t = 0)]
    l: u32,
    /// Euclidean intensity: a positive rational or `star`.
    #[arg(long, default_value = "star")]
    gamma: EuclidGamma,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long)]
    which: TableId,
    /// Column range `lo..hi` (inclusive); defaults to the printed one.
    #[arg(long, value_parser = parse_range)]
    n: Option<(u32, u32)>,
    #[arg(long, value_parser = parse_range)]
    m: Option<(u32, u32)>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FigureArgs {
    #[arg(long)]
    which: FigureId,
    /// Override the dimension of a single panel (requires `--n`).
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long, value_delimiter = ',')]
    n: Option<Vec<u32>>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    /// JSON file with the experiment configuration; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    quantity: Option<Quantity>,
    #[arg(long)]
    flavor: Option<Flavor>,
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    k: Option<u32>,
    #[arg(long)]
    l: Option<u32>,
    #[arg(long)]
    reps: Option<u64>,
    /// Seed; falls back to `SPHTESS_SEED`, then to the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// `iso` or `pole:<beta>`.
    #[arg(long, value_parser = parse_kappa)]
    kappa: Option<KappaFamily>,
    #[arg(long, value_enum)]
    route: Option<RouteArg>,
    /// Nested random subspaces per sampled face.
    #[arg(long)]
    subspace_reps: Option<u32>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RouteArg {
    Direct,
    Section,
}

fn parse_range(s: &str) -> std::result::Result<(u32, u32), String> {
    let (a, b) = s
        .split_once("..")
        .or_else(|| s.split_once(','))
        .ok_or_else(|| format!("expected lo..hi, got {s:?}"))?;
    let lo = a.trim().parse().map_err(|e| format!("{e}"))?;
    let hi = b.trim().parse().map_err(|e| format!("{e}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

fn parse_kappa(s: &str) -> std::result::Result<KappaFamily, String> {
    match s {
        "iso" | "isotropic" => Ok(KappaFamily::Isotropic),
        _ => {
            let beta = s
                .strip_prefix("pole:")
                .ok_or_else(|| format!("expected iso or pole:<beta>, got {s:?}"))?
                .parse::<f64>()
                .map_err(|e| e.to_string())?;
            if !(beta >= 0.0 && beta.is_finite()) {
                return Err(format!("beta must be finite and >= 0, got {beta}"));
            }
            Ok(KappaFamily::PoleConcentrated { beta })
        }
    }
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn eval(a: &EvalArgs) -> Result<()> {
    let k = a.k.unwrap_or(a.d);
    let value = match a.quantity {
        EvalQuantity::EuclidV => {
            let q = EuclidQuery { d: a.d, k, l: a.l, gamma: a.gamma.clone() };
            moments::euclid_v(a.flavor, &q)?
        }
        EvalQuantity::EuclidF => moments::euclid_f_weighted(k, a.l)?,
        other => {
            let quantity = match other {
                EvalQuantity::F => Quantity::F,
                EvalQuantity::U => Quantity::U,
                EvalQuantity::V => Quantity::V,
                EvalQuantity::Vminus1 => Quantity::VMinus1,
                EvalQuantity::Statdim => Quantity::Statdim,
                EvalQuantity::Hk => Quantity::HkMean,
                _ => Quantity::Isect,
            };
            let q = if quantity == Quantity::Isect {
                ExpectationQuery::isect(a.flavor, a.n, a.m.unwrap_or(a.n), a.d)
            } else {
                ExpectationQuery::new(quantity, a.flavor, a.n, a.d, k, a.l)
            };
            moments::exact(&q)?
        }
    };
    println!("{value}");
    println!("{}", format_sig(value.to_f64(), report::FLOAT_DIGITS));
    Ok(())
}

/// Renders a table, reports discrepancies on stderr and returns whether any row failed.
fn table(spec: &TableSpec, out: Option<&Path>) -> Result<bool> {
    let t = report::render_table(spec)?;
    write_out(out, &t.to_csv())?;
    for line in t.discrepancy_report() {
        eprintln!("{line}");
    }
    let known = t.count(RowVerdict::KnownDiscrepancy);
    if known > 0 {
        eprintln!("warning: {} has {known} known discrepancies with the printed values", spec.which.name());
    }
    Ok(t.has_failures())
}

fn figure(a: &FigureArgs) -> Result<()> {
    let panels = match (a.d, &a.n) {
        (None, None) => FigureSpec::panels(a.which),
        (Some(d), Some(ns)) => {
            let base = &FigureSpec::panels(a.which)[0];
            vec![FigureSpec {
                which: a.which,
                d,
                k: a.k.unwrap_or(d),
                ns: ns.clone(),
                l_range: base.l_range.map(|(lo, _)| (lo, a.k.unwrap_or(d))),
            }]
        }
        _ => bail!("--d and --n go together"),
    };
    let mut points = Vec::new();
    for p in &panels {
        points.extend(report::figure_data(p)?);
    }
    write_out(a.out.as_deref(), &report::figure_csv(&points))
}

fn sim_config(a: &SimArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            serde_json::from_str::<ExperimentConfig>(&text).with_context(|| format!("parsing {}", p.display()))?
        }
        None => {
            let (Some(quantity), Some(n), Some(d)) = (a.quantity, a.n, a.d) else {
                bail!("--quantity, --n and --d are required without --config");
            };
            let flavor = a.flavor.unwrap_or(Flavor::Typical);
            let q = if quantity == Quantity::Isect {
                ExpectationQuery::isect(flavor, n, a.m.unwrap_or(n), d)
            } else {
                ExpectationQuery::new(quantity, flavor, n, d, a.k.unwrap_or(d), a.l.unwrap_or(0))
            };
            ExperimentConfig::new(q, 20_000, 0)
        }
    };
    let q = &mut cfg.query;
    if let Some(x) = a.quantity {
        q.quantity = x;
    }
    if let Some(x) = a.flavor {
        q.flavor = x;
    }
    if let Some(x) = a.n {
        q.n = x;
    }
    if let Some(x) = a.d {
        q.d = x;
        if a.k.is_none() && q.quantity == Quantity::Isect {
            q.k = x;
        }
    }
    if let Some(x) = a.k {
        q.k = x;
    }
    if let Some(x) = a.l {
        q.l = x;
    }
    if a.m.is_some() {
        q.m = a.m;
    }
    if let Some(x) = a.reps {
        cfg.reps = x;
    }
    if let Ok(s) = std::env::var("SPHTESS_SEED") {
        cfg.seed = s.trim().parse().with_context(|| format!("SPHTESS_SEED={s:?} is not an integer"))?;
    }
    if let Some(x) = a.seed {
        cfg.seed = x;
    }
    if let Some(x) = a.kappa {
        cfg.kappa = x;
    }
    if let Some(r) = a.route {
        cfg.route = match r {
            RouteArg::Direct => Route::Direct,
            RouteArg::Section => Route::Section,
        };
    }
    if let Some(x) = a.subspace_reps {
        cfg.inner.subspaces = x;
    }
    if a.threads.is_some() {
        cfg.threads = a.threads;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Eval(a) => eval(&a).map(|_| false),
        Command::Table(a) => table(&TableSpec { which: a.which, n: a.n, m: a.m }, a.out.as_deref()),
        Command::DumpTables { dir } => {
            fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let mut failed = false;
            for t in TableId::ALL {
                let path = dir.join(format!("{}.csv", t.name()));
                failed |= table(&TableSpec::new(t), Some(&path))?;
            }
            Ok(failed)
        }
        Command::Figure(a) => figure(&a).map(|_| false),
        Command::Simulate(a) => {
            let cfg = sim_config(&a)?;
            let e = simulate::estimate(&cfg)?;
            let out = serde_json::json!({
                "query": cfg.query.label(),
                "estimate": e.mean,
                "stderr": e.std_err,
                "reps": e.reps,
                "seed": cfg.seed,
                "degenerate_redraws": e.degenerate_redraws,
            });
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(false)
        }
        Command::Compare { sim, format } => {
            let cfg = sim_config(&sim)?;
            let r = simulate::compare(&cfg)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&r)?),
                Format::Csv => {
                    println!("label,exact,exact_float,estimate,stderr,reps,seed,degenerate_redraws,z,verdict");
                    println!(
                        "{},{},{},{},{},{},{},{},{},{}",
                        r.label,
                        r.exact,
                        format_sig(r.exact_float, report::FLOAT_DIGITS),
                        format_sig(r.estimate.mean, report::FLOAT_DIGITS),
                        format_sig(r.estimate.std_err, report::FLOAT_DIGITS),
                        r.estimate.reps,
                        r.estimate.seed,
                        r.estimate.degenerate_redraws,
                        format_sig(r.z_score, 6),
                        serde_json::to_value(r.verdict)?.as_str().unwrap_or_default()
                    );
                }
            }
            if r.z_score.abs() > cfg.tolerance.warn_z && r.verdict == Verdict::Pass {
                eprintln!("warning: |z| = {:.2} exceeds {}", r.z_score.abs(), cfg.tolerance.warn_z);
            }
            Ok(r.verdict == Verdict::Fail)
        }
        Command::Consistency { reps, seed, threads } => {
            let q = ExpectationQuery::new(Quantity::F, Flavor::Typical, 4, 2, 2, 0);
            let mut cfg = ExperimentConfig::new(q, reps, 0);
            if let Ok(s) = std::env::var("SPHTESS_SEED") {
                cfg.seed = s.trim().parse().with_context(|| format!("SPHTESS_SEED={s:?} is not an integer"))?;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.threads = threads;
            cfg.validate()?;
            let checks = simulate::consistency_checks(&cfg)?;
            println!("{}", serde_json::to_string_pretty(&checks)?);
            Ok(checks.iter().any(|c| c.verdict == Verdict::Fail))
        }
        Command::Limit { d, k, l, flavor, n } => {
            let rows = report::limit_sweep(d, k, l, flavor, &n)?;
            print!("{}", report::limit_csv(&rows));
            Ok(false)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("error: at least one verdict is fail");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
