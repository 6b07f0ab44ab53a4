//! Acceptance suite: one line per criterion, nonzero exit if any fails.
//!
//! Run a subset with `cargo test --test acceptance -- 1 5 8`.

use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use sphtess_core::combinat::{b_closed_form, coeff_a, coeff_b, coeff_b_oracle, BClosed};
use sphtess_core::exactnum::{factorial, gamma_half, SqrtPiPoly};
use sphtess_core::geom::KappaFamily;
use sphtess_core::moments::{self, ExpectationQuery, Flavor, IdentityGrid, Quantity};
use sphtess_core::report::{self, FigureId, FigureSpec, RowVerdict, Table, TableId, TableSpec};
use sphtess_core::simulate::{self, BatchSpec, ExperimentConfig, TolerancePolicy};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn table(which: TableId) -> Result<Table, String> {
    report::render_table(&TableSpec::new(which)).map_err(|e| e.to_string())
}

fn p(s: &str) -> SqrtPiPoly {
    s.parse().unwrap()
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn within(label: &str, t: Duration, limit_s: f64) -> Result<(), String> {
    ensure(t.as_secs_f64() < limit_s, || format!("{label} took {t:.2?}, limit {limit_s} s"))
}

fn no_fail(t: &Table) -> Result<(), String> {
    let bad = t.discrepancy_report().into_iter().filter(|l| l.starts_with("fail")).collect::<Vec<_>>();
    ensure(bad.is_empty(), || bad.join("; "))
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let d2 = table(TableId::AppAD2)?;
    let d3 = table(TableId::AppAD3)?;
    let elapsed = t0.elapsed();
    no_fail(&d2)?;
    no_fail(&d3)?;
    for t in [&d2, &d3] {
        for r in t.rows.iter().filter(|r| r.query.flavor == Flavor::Weighted) {
            ensure(r.verdict == RowVerdict::Match, || format!("weighted {} is {:?}", r.query.label(), r.verdict))?;
        }
    }
    let w6 = d2.rows.iter().find(|r| r.query.flavor == Flavor::Weighted && r.query.n == 6).unwrap();
    ensure(w6.exact == p("15 + 720*pi^-4 - 180*pi^-2"), || format!("E f0(W_6,2) = {}", w6.exact))?;

    // formula-consistent typical sequence for n = 3..9
    let seq = ["3", "24/7", "40/11", "15/4", "42/11", "112/29", "144/37"];
    let typ: Vec<_> = d2.rows.iter().filter(|r| r.query.flavor == Flavor::Typical).collect();
    for (r, s) in typ.iter().zip(seq) {
        ensure(r.exact == p(s), || format!("typical n={}: {} != {s}", r.query.n, r.exact))?;
    }
    let shifted: Vec<u32> = typ.iter().filter(|r| r.verdict == RowVerdict::KnownDiscrepancy).map(|r| r.query.n).collect();
    ensure(shifted == (4..=10).collect::<Vec<_>>(), || format!("shifted columns {shifted:?}"))?;
    for w in typ.windows(2) {
        ensure(w[1].printed.as_ref() == Some(&w[0].exact), || format!("printed at n={} is not the n-1 value", w[1].query.n))?;
    }
    let d3_known = d3.count(RowVerdict::KnownDiscrepancy);
    ensure(d3_known == 1, || format!("{d3_known} known discrepancies in d=3"))?;
    within("tables", elapsed, 1.0)?;
    let weighted = [&d2, &d3].iter().flat_map(|t| &t.rows).filter(|r| r.query.flavor == Flavor::Weighted).count();
    let d3_typical = d3.rows.iter().filter(|r| r.query.flavor == Flavor::Typical && r.verdict == RowVerdict::Match).count();
    Ok(format!(
        "{weighted} weighted entries match; d=2 typical row matches the sequence with its one-column shift reported at n=4..10; \
         {d3_typical}/21 d=3 typical entries match, f1 at n=10 reported as misprint ({elapsed:.2?})"
    ))
}

fn criterion_2() -> Outcome {
    let t0 = Instant::now();
    let d2 = table(TableId::AppBD2)?;
    let d3 = table(TableId::AppBD3)?;
    let elapsed = t0.elapsed();
    let matched = d2.count(RowVerdict::Match) + d3.count(RowVerdict::Match);
    ensure(matched == 2 * 7 * 2 + 2 * 6 * 3, || format!("{matched} of 64 match"))?;
    ensure(d2.rows.len() + d3.rows.len() == 64, || "unexpected row count".into())?;
    within("tables", elapsed, 1.0)?;
    Ok(format!("64/64 entries match ({elapsed:.2?})"))
}

fn criterion_3() -> Outcome {
    let t0 = Instant::now();
    let tables = [(table(TableId::AppCD2)?, TableId::AppBD2), (table(TableId::AppCD3)?, TableId::AppBD3)];
    let elapsed = t0.elapsed();
    let mut matched = 0;
    let mut known = 0;
    for (t, quermass) in &tables {
        no_fail(t)?;
        // printed Quermass goldens: the v_l = U_l - U_{l+2} oracle
        let gold = report::goldens(*quermass).map_err(|e| e.to_string())?;
        let u = |n: u32, l: u32| -> SqrtPiPoly {
            gold.iter()
                .find(|g| g.flavor == Flavor::Weighted && g.n == n && g.l == Some(l))
                .map(|g| g.printed.clone())
                .unwrap_or_else(SqrtPiPoly::zero)
        };
        for r in &t.rows {
            let q = &r.query;
            if q.flavor == Flavor::Weighted && q.l >= 1 {
                ensure(r.verdict == RowVerdict::KnownDiscrepancy, || format!("{} is {:?}", q.label(), r.verdict))?;
                let oracle = u(q.n, q.l) - u(q.n, q.l + 2);
                ensure(r.exact == oracle, || format!("{}: {} != U-relation {}", q.label(), r.exact, oracle))?;
                known += 1;
            } else {
                ensure(r.verdict == RowVerdict::Match, || format!("{} is {:?}", q.label(), r.verdict))?;
                matched += 1;
            }
        }
    }
    within("tables", elapsed, 1.0)?;
    Ok(format!(
        "{matched} typical/weighted-v0 entries match; {known} weighted v1+ entries reported as known discrepancies with U-consistent values ({elapsed:.2?})"
    ))
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let t = table(TableId::AppD)?;
    ensure(t.count(RowVerdict::Match) == t.rows.len(), || t.discrepancy_report().join("; "))?;
    let mut closed = 0;
    for d in 2..=5u32 {
        for n in d + 1..=d + 20 {
            let a = moments::statdim_closed(Flavor::Typical, d, n).map_err(|e| e.to_string())?;
            let b = moments::statdim(Flavor::Typical, n, d, d).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("typical d={d} n={n}: {a} != {b}"))?;
            closed += 1;
        }
    }
    for d in 2..=3u32 {
        for n in d + 1..=d + 12 {
            let a = moments::statdim_closed(Flavor::Weighted, d, n).map_err(|e| e.to_string())?;
            let b = moments::statdim(Flavor::Weighted, n, d, d).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("weighted d={d} n={n}: {a} != {b}"))?;
            closed += 1;
        }
    }
    let elapsed = t0.elapsed();
    within("statdim", elapsed, 5.0)?;
    Ok(format!("{}/{} entries match; closed forms agree on {closed} cases ({elapsed:.2?})", t.rows.len(), t.rows.len()))
}

/// The printed typical intersection rational functions for d = 2, 3.
fn printed_typical_isect(n: i64, m: i64, d: u32) -> BigRational {
    match d {
        2 => rat(m * m + 2 * m * n - m + n * n - n + 2, (m * m - m + 2) * (n * n - n + 2)),
        3 => rat(
            3 * (m + n) * (m * m + 2 * m * n - 3 * m + n * n - 3 * n + 8),
            m * (m * m - 3 * m + 8) * n * (n * n - 3 * n + 8),
        ),
        _ => unreachable!(),
    }
}

fn criterion_5() -> Outcome {
    let t0 = Instant::now();
    let d2 = table(TableId::AppED2)?;
    let d3 = table(TableId::AppED3)?;
    ensure(d2.count(RowVerdict::Match) == 36, || d2.discrepancy_report().join("; "))?;
    ensure(d3.count(RowVerdict::Match) == 25, || d3.discrepancy_report().join("; "))?;
    let mut recomposed = 0;
    for (d, hi) in [(2u32, 8u32), (3, 8)] {
        for n in d + 1..=hi {
            for m in d + 1..=hi {
                let a = moments::isect_prob_weighted(n, m, d).map_err(|e| e.to_string())?;
                let b = moments::isect_recompose(Flavor::Weighted, n, m, d).map_err(|e| e.to_string())?;
                ensure(a == b, || format!("recomposition differs at d={d} n={n} m={m}"))?;
                recomposed += 1;
            }
        }
    }
    let mut typical = 0;
    for d in 2..=3u32 {
        for n in d + 1..=12 {
            for m in d + 1..=12 {
                let got = moments::isect_prob_typical(n, m, d).map_err(|e| e.to_string())?;
                let want = printed_typical_isect(n as i64, m as i64, d);
                ensure(got.as_rational() == Some(want.clone()), || format!("typical d={d} n={n} m={m}: {got} != {want}"))?;
                typical += 1;
            }
        }
    }
    let elapsed = t0.elapsed();
    within("intersections", elapsed, 10.0)?;
    Ok(format!("61/61 entries match; {recomposed} recompositions and {typical} typical rational values exact ({elapsed:.2?})"))
}

fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let mut count = 0;
    for m in 0..=12u32 {
        for l in -1..=14i32 {
            let lhs = coeff_a(m + 2, l) - coeff_a(m, l);
            let rhs = coeff_a(m, l - 2).scale(&BigRational::from_integer(BigInt::from((m + 1) * (m + 1))));
            ensure(lhs == rhs, || format!("A recurrence fails at m={m}, l={l}"))?;
            count += 1;
        }
    }
    for n in 1..=12u32 {
        for k in 2..=8u32 {
            let lhs = coeff_b(n, k - 2) - coeff_b(n, k);
            let rhs = coeff_b(n + 2, k).scale(&BigRational::from_integer(BigInt::from((k - 1) * (k - 1))));
            ensure(lhs == rhs, || format!("B recurrence fails at n={n}, k={k}"))?;
            count += 1;
        }
    }
    for m in 1..=12u32 {
        for l in 1..=m {
            let b = coeff_b(m, l);
            ensure(b == coeff_b_oracle(m, l).map_err(|e| e.to_string())?, || format!("B{{{m},{l}}} != integral"))?;
            count += 1;
        }
        if m >= 2 {
            ensure(coeff_b(m, 2) == b_closed_form(m, BClosed::K2).map_err(|e| e.to_string())?, || format!("B{{{m},2}} closed form"))?;
        }
        if m >= 3 {
            ensure(coeff_b(m, 3) == b_closed_form(m, BClosed::K3).map_err(|e| e.to_string())?, || format!("B{{{m},3}} closed form"))?;
        }
    }
    for d in 0..=10u32 {
        let fact = BigRational::from_integer(factorial(d));
        let g = gamma_half(d + 2).map_err(|e| e.to_string())?;
        let closed = SqrtPiPoly::from_rational(&fact * &fact / BigRational::from_integer(BigInt::from(2).pow(d)))
            .div_monomial(&(g.clone() * g))
            .map_err(|e| e.to_string())?;
        ensure(coeff_a(d, d as i32) == closed, || format!("A[{d},{d}] closed form"))?;
        count += 1;
    }
    let report = moments::identity_suite(IdentityGrid { d_max: 4, n_extra: 8 });
    let failures: Vec<String> = report
        .failures()
        .map(|c| format!("{} n={} d={} k={} l={}: {:?}", c.identity, c.n, c.d, c.k, c.l, c.status))
        .collect();
    ensure(failures.is_empty(), || failures.join("; "))?;
    let mut summary = Vec::new();
    for name in ["efron", "uv_typical", "uv_weighted", "v_sum_weighted", "v_sum_typical", "f0_equal", "f0_monotone"] {
        let (pass, total) = report.count(name);
        ensure(pass > 0, || format!("{name} never ran"))?;
        summary.push(format!("{name} {pass}/{total}"));
    }
    let elapsed = t0.elapsed();
    within("identities", elapsed, 30.0)?;
    Ok(format!("{count} coefficient identities; {} ({elapsed:.2?})", summary.join(", ")))
}

fn criterion_7() -> Outcome {
    let t0 = Instant::now();
    let ns = [25u32, 50, 100, 200];
    let (mut checked, mut exact_zero, mut worst) = (0, 0, 0.0f64);
    for d in 1..=3u32 {
        for k in 0..=d {
            for l in 0..=k {
                for fl in Flavor::BOTH {
                    let rows = report::limit_sweep(d, k, l, fl, &ns).map_err(|e| e.to_string())?;
                    let last = rows.last().unwrap();
                    ensure(last.rel_gap < 0.05, || format!("d={d} k={k} l={l} {fl:?}: rel gap {} at n=200", last.rel_gap))?;
                    worst = worst.max(last.rel_gap);
                    let gaps: Vec<SqrtPiPoly> = ns
                        .iter()
                        .map(|&n| moments::euclid_limit_gap(d, k, l, fl, n))
                        .collect::<Result<_, _>>()
                        .map_err(|e| e.to_string())?;
                    if gaps.iter().all(|g| g.is_zero()) {
                        exact_zero += 1;
                        continue;
                    }
                    ensure(rows.windows(2).all(|w| w[1].rel_gap < w[0].rel_gap), || {
                        format!("d={d} k={k} l={l} {fl:?}: gaps not strictly decreasing {:?}", rows.iter().map(|r| r.rel_gap).collect::<Vec<_>>())
                    })?;
                    checked += 1;
                }
            }
        }
    }
    let elapsed = t0.elapsed();
    within("limits", elapsed, 10.0)?;
    Ok(format!(
        "{checked} sweeps strictly decreasing, {exact_zero} identically zero; worst relative gap at n=200 is {worst:.4} ({elapsed:.2?})"
    ))
}

const GRID_REPS: u64 = 20_000;

fn criterion_8() -> Outcome {
    let t0 = Instant::now();
    let policy = TolerancePolicy::default();
    let (mut cells, mut within4, mut constant, mut redraws, mut draws) = (0usize, 0usize, 0usize, 0u64, 0u64);
    let mut sum_z2 = 0.0;
    let mut worst: (f64, String) = (0.0, String::new());
    let mut audits = (0u64, 0u64, 0u64);
    let mut record = |label: String, z: f64, std_err: f64| -> Result<(), String> {
        if std_err == 0.0 {
            ensure(z == 0.0, || format!("{label}: constant estimate off the exact value"))?;
            constant += 1;
            return Ok(());
        }
        cells += 1;
        sum_z2 += z * z;
        if z.abs() <= 4.0 {
            within4 += 1;
        }
        if z.abs() > worst.0 {
            worst = (z.abs(), label);
        }
        Ok(())
    };
    for d in 2..=3u32 {
        for k in 1..=d {
            for n in d + 1..=d + 5 {
                let spec = BatchSpec::new(n, d, k, GRID_REPS, 1000 + 100 * d as u64 + 10 * k as u64 + n as u64);
                let batch = simulate::run_batch(&spec).map_err(|e| format!("n={n} d={d} k={k}: {e}"))?;
                audits.0 += batch.audits.euler_checks;
                audits.1 += batch.audits.moreau_checks;
                audits.2 += batch.audits.arrangements_audited;
                redraws += batch.degenerate_redraws;
                draws += 2 * GRID_REPS;
                for r in simulate::compare_batch(&batch, &policy).map_err(|e| e.to_string())? {
                    record(r.label, r.z_score, r.estimate.std_err)?;
                }
            }
        }
        for n in d + 1..=d + 5 {
            let q = ExpectationQuery::isect(Flavor::Weighted, n, n, d);
            let cfg = ExperimentConfig::new(q, GRID_REPS, 5000 + 10 * d as u64 + n as u64);
            let (t, w) = simulate::estimate_isect_pair(n, n, d, &cfg, &Flavor::BOTH).map_err(|e| e.to_string())?;
            redraws += t.unwrap().degenerate_redraws;
            draws += GRID_REPS;
            for (fl, e) in [(Flavor::Typical, t.unwrap()), (Flavor::Weighted, w.unwrap())] {
                let exact = moments::isect_prob(fl, n, n, d).map_err(|e| e.to_string())?.to_f64();
                let q = ExpectationQuery::isect(fl, n, n, d);
                record(q.label(), e.z_score(exact), e.std_err)?;
            }
        }
    }
    let elapsed = t0.elapsed();
    let share = within4 as f64 / cells as f64;
    let redraw_rate = redraws as f64 / draws as f64;
    let summary = format!(
        "{within4}/{cells} cells with |z| <= 4 ({:.1}%), rms z {:.2}, max |z| {:.2} at {}, {constant} constant cells exact; \
         audits: {} Euler, {} Moreau, {} full arrangements, 0 failures; redraw rate {redraw_rate:.1e} ({elapsed:.0?})",
        100.0 * share,
        (sum_z2 / cells as f64).sqrt(),
        worst.0,
        worst.1,
        audits.0,
        audits.1,
        audits.2
    );
    ensure(share >= 0.95, || summary.clone())?;
    ensure(worst.0 <= 6.0, || summary.clone())?;
    ensure(redraw_rate < 1e-3, || summary.clone())?;
    within("grid", elapsed, 15.0 * 60.0)?;
    Ok(summary)
}

const LONG_REPS: u64 = 50_000;

fn criterion_9() -> Outcome {
    let t0 = Instant::now();
    let mut parts = Vec::new();
    for (n, d, want) in [(4u32, 2u32, "24/7"), (5, 3, "16/3")] {
        let exact = moments::ef_typical(n, d, d, 0).map_err(|e| e.to_string())?;
        ensure(exact == p(want), || format!("exact f0(Z n={n} d={d}) = {exact}, expected {want}"))?;
        let mut spec = BatchSpec::new(n, d, d, LONG_REPS, 9000 + n as u64);
        spec.flavors = vec![Flavor::Typical];
        spec.kappa = KappaFamily::PoleConcentrated { beta: 4.0 };
        let b = simulate::run_batch(&spec).map_err(|e| e.to_string())?;
        let e = b.get(Flavor::Typical, Quantity::F, 0).unwrap();
        let z = e.z_score(exact.to_f64());
        ensure(z.abs() <= 4.0, || format!("f0(Z n={n} d={d}) under pole(4): {} +- {} vs {want}, z = {z:.2}", e.mean, e.std_err))?;
        parts.push(format!("f0(Z n={n} d={d}) = {:.4} +- {:.4} vs {want} (z = {z:.2})", e.mean, e.std_err));
    }
    let elapsed = t0.elapsed();
    within("kappa invariance", elapsed, 120.0)?;
    Ok(format!("{} ({elapsed:.1?})", parts.join("; ")))
}

fn criterion_10() -> Outcome {
    let t0 = Instant::now();
    let b = simulate::run_batch(&BatchSpec::new(4, 2, 2, LONG_REPS, 10_010)).map_err(|e| e.to_string())?;
    let biased = b.typical.as_ref().unwrap().size_biased_f0.unwrap();
    let w = b.weighted.as_ref().unwrap().f[0];
    let se = (biased.std_err.powi(2) + w.std_err.powi(2)).sqrt();
    let z = (biased.mean - w.mean) / se;
    let elapsed = t0.elapsed();
    let summary = format!(
        "E[f0 H^2]/E[H^2] (typical) = {:.4} +- {:.4}, E f0(W) = {:.4} +- {:.4}, z = {z:.2} ({elapsed:.1?})",
        biased.mean, biased.std_err, w.mean, w.std_err
    );
    ensure(z.abs() <= 4.0, || summary.clone())?;
    within("size bias", elapsed, 120.0)?;
    Ok(summary)
}

fn criterion_figures() -> Outcome {
    let t0 = Instant::now();
    let mut sizes = Vec::new();
    for f in FigureId::ALL {
        let mut csvs = Vec::new();
        for _ in 0..2 {
            let mut pts = Vec::new();
            for panel in FigureSpec::panels(f) {
                pts.extend(report::figure_data(&panel).map_err(|e| e.to_string())?);
            }
            csvs.push(report::figure_csv(&pts));
        }
        ensure(csvs[0] == csvs[1], || format!("{} is not deterministic", f.name()))?;
        sizes.push(format!("{} {}", f.name(), csvs[0].lines().count() - 1));
    }
    let spec = FigureSpec { which: FigureId::FvecFig3, d: 19, k: 19, ns: vec![80], l_range: Some((0, 19)) };
    let pts = report::figure_data(&spec).map_err(|e| e.to_string())?;
    for fl in Flavor::BOTH {
        let ys: Vec<f64> = pts.iter().filter(|p| p.flavor == fl).map(|p| p.value.to_f64()).collect();
        ensure(ys.len() == 20 && ys.iter().all(|y| y.is_finite() && *y > 0.0), || format!("{fl:?}: {ys:?}"))?;
        let peak = ys.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let unimodal = ys[..=peak].windows(2).all(|w| w[0] < w[1]) && ys[peak..].windows(2).all(|w| w[0] > w[1]);
        ensure(unimodal, || format!("{fl:?} f-vector at n=80 is not unimodal: {ys:?}"))?;
    }
    let elapsed = t0.elapsed();
    Ok(format!("figure CSVs regenerate identically ({}); d=19, n=80 f-vectors positive and unimodal ({elapsed:.1?})", sizes.join(", ")))
}

fn main() {
    let wanted: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, &str, fn() -> Outcome); 11] = [
        ("1", "exact goldens, face numbers", criterion_1),
        ("2", "exact goldens, Quermass integrals", criterion_2),
        ("3", "exact goldens, intrinsic volumes", criterion_3),
        ("4", "exact goldens, statistical dimensions", criterion_4),
        ("5", "exact goldens, intersection probabilities", criterion_5),
        ("6", "algebraic identity suite", criterion_6),
        ("7", "Euclidean limit", criterion_7),
        ("8", "Monte Carlo vs exact grid", criterion_8),
        ("9", "kappa invariance", criterion_9),
        ("10", "size bias", criterion_10),
        ("figures", "figure data", criterion_figures),
    ];
    let mut failed = 0;
    for (id, name, run) in criteria {
        if !wanted.is_empty() && !wanted.iter().any(|w| w == id) {
            continue;
        }
        match run() {
            Ok(msg) => println!("criterion {id} ({name}): PASS - {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {id} ({name}): FAIL - {msg}");
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
