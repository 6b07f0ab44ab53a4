//! Reference tables with golden comparison, figure data and limit sweeps.
//!
//! Goldens live in `fixtures/*.csv` as exact-expression strings and are
//! compared after parsing, never as floats.

use std::fmt::Write as _;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::{format_sig, SqrtPiPoly};
use crate::moments::{self, EuclidGamma, EuclidQuery, ExpectationQuery, Flavor, Quantity};

/// Significant digits of every float column.
pub const FLOAT_DIGITS: usize = 15;

/// The reproducible reference tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableId {
    #[serde(rename = "appA_d2")]
    AppAD2,
    #[serde(rename = "appA_d3")]
    AppAD3,
    #[serde(rename = "appB_d2")]
    AppBD2,
    #[serde(rename = "appB_d3")]
    AppBD3,
    #[serde(rename = "appC_d2")]
    AppCD2,
    #[serde(rename = "appC_d3")]
    AppCD3,
    #[serde(rename = "appD")]
    AppD,
    #[serde(rename = "appE_d2")]
    AppED2,
    #[serde(rename = "appE_d3")]
    AppED3,
}

impl TableId {
    pub const ALL: [TableId; 9] = [
        TableId::AppAD2,
        TableId::AppAD3,
        TableId::AppBD2,
        TableId::AppBD3,
        TableId::AppCD2,
        TableId::AppCD3,
        TableId::AppD,
        TableId::AppED2,
        TableId::AppED3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TableId::AppAD2 => "appA_d2",
            TableId::AppAD3 => "appA_d3",
            TableId::AppBD2 => "appB_d2",
            TableId::AppBD3 => "appB_d3",
            TableId::AppCD2 => "appC_d2",
            TableId::AppCD3 => "appC_d3",
            TableId::AppD => "appD",
            TableId::AppED2 => "appE_d2",
            TableId::AppED3 => "appE_d3",
        }
    }

    fn fixture(self) -> &'static str {
        match self {
            TableId::AppAD2 => include_str!("../fixtures/appA_d2.csv"),
            TableId::AppAD3 => include_str!("../fixtures/appA_d3.csv"),
            TableId::AppBD2 => include_str!("../fixtures/appB_d2.csv"),
            TableId::AppBD3 => include_str!("../fixtures/appB_d3.csv"),
            TableId::AppCD2 => include_str!("../fixtures/appC_d2.csv"),
            TableId::AppCD3 => include_str!("../fixtures/appC_d3.csv"),
            TableId::AppD => include_str!("../fixtures/appD.csv"),
            TableId::AppED2 => include_str!("../fixtures/appE_d2.csv"),
            TableId::AppED3 => include_str!("../fixtures/appE_d3.csv"),
        }
    }

    /// `(quantity, d, ls)` row groups in printed order; each group is listed
    /// weighted first, then typical.
    fn layout(self) -> Vec<(Quantity, u32, Vec<Option<u32>>)> {
        let ls = |r: std::ops::RangeInclusive<u32>| r.map(Some).collect::<Vec<_>>();
        match self {
            TableId::AppAD2 => vec![(Quantity::F, 2, ls(0..=0))],
            TableId::AppAD3 => vec![(Quantity::F, 3, ls(0..=2))],
            TableId::AppBD2 => vec![(Quantity::U, 2, ls(1..=2))],
            TableId::AppBD3 => vec![(Quantity::U, 3, ls(1..=3))],
            TableId::AppCD2 => vec![(Quantity::V, 2, ls(0..=2))],
            TableId::AppCD3 => vec![(Quantity::V, 3, ls(0..=3))],
            TableId::AppD => vec![(Quantity::Statdim, 2, vec![None]), (Quantity::Statdim, 3, vec![None])],
            TableId::AppED2 => vec![(Quantity::Isect, 2, vec![None])],
            TableId::AppED3 => vec![(Quantity::Isect, 3, vec![None])],
        }
    }

    /// Printed column range for dimension `d`.
    pub fn default_n_range(self, d: u32) -> (u32, u32) {
        match self {
            TableId::AppAD2 => (3, 10),
            TableId::AppAD3 => (4, 10),
            TableId::AppBD2 | TableId::AppCD2 => (3, 9),
            TableId::AppBD3 | TableId::AppCD3 => (4, 9),
            TableId::AppD => (d + 1, 10),
            TableId::AppED2 => (3, 8),
            TableId::AppED3 => (4, 8),
        }
    }

    pub fn is_isect(self) -> bool {
        matches!(self, TableId::AppED2 | TableId::AppED3)
    }
}

impl FromStr for TableId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TableId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown table {s:?}")))
    }
}

/// A table request; `None` ranges mean the printed ones.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableSpec {
    pub which: TableId,
    #[serde(default)]
    pub n: Option<(u32, u32)>,
    #[serde(default)]
    pub m: Option<(u32, u32)>,
}

impl TableSpec {
    pub fn new(which: TableId) -> Self {
        Self { which, n: None, m: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowVerdict {
    Match,
    KnownDiscrepancy,
    Fail,
    /// Outside the printed range.
    NoGolden,
}

impl RowVerdict {
    pub fn name(self) -> &'static str {
        match self {
            RowVerdict::Match => "match",
            RowVerdict::KnownDiscrepancy => "known-discrepancy",
            RowVerdict::Fail => "fail",
            RowVerdict::NoGolden => "",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TableRow {
    pub query: ExpectationQuery,
    pub exact: SqrtPiPoly,
    pub printed: Option<SqrtPiPoly>,
    pub verdict: RowVerdict,
    pub note: Option<String>,
}

impl TableRow {
    fn l_column(&self) -> String {
        match self.query.quantity {
            Quantity::F | Quantity::U | Quantity::V => self.query.l.to_string(),
            _ => String::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub spec: TableSpec,
    pub rows: Vec<TableRow>,
}

pub const TABLE_HEADER: &str = "quantity,flavor,d,l,n,m,exact,float,printed,verdict";

impl Table {
    /// Deterministic CSV: fixed row order, exact strings and 15-digit floats.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(TABLE_HEADER);
        out.push('\n');
        for r in &self.rows {
            let q = &r.query;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                q.quantity.name(),
                q.flavor.name(),
                q.d,
                r.l_column(),
                q.n,
                q.m.map(|m| m.to_string()).unwrap_or_default(),
                r.exact,
                format_sig(r.exact.to_f64(), FLOAT_DIGITS),
                r.printed.as_ref().map(|p| p.to_string()).unwrap_or_default(),
                r.verdict.name()
            );
        }
        out
    }

    pub fn count(&self, v: RowVerdict) -> usize {
        self.rows.iter().filter(|r| r.verdict == v).count()
    }

    pub fn has_failures(&self) -> bool {
        self.count(RowVerdict::Fail) > 0
    }

    /// One line per row that is not a plain match.
    pub fn discrepancy_report(&self) -> Vec<String> {
        self.rows
            .iter()
            .filter(|r| matches!(r.verdict, RowVerdict::Fail | RowVerdict::KnownDiscrepancy))
            .map(|r| {
                format!(
                    "{} {} {}: printed {}, computed {}{}",
                    r.verdict.name(),
                    self.spec.which.name(),
                    r.query.label(),
                    r.printed.as_ref().map(|p| p.to_string()).unwrap_or_default(),
                    r.exact,
                    r.note.as_ref().map(|n| format!(" ({n})")).unwrap_or_default()
                )
            })
            .collect()
    }
}

/// One printed golden entry.
#[derive(Clone, Debug, PartialEq)]
pub struct Golden {
    pub quantity: Quantity,
    pub flavor: Flavor,
    pub d: u32,
    pub l: Option<u32>,
    pub n: u32,
    pub m: Option<u32>,
    pub printed: SqrtPiPoly,
}

/// The printed entries of a table, parsed from its fixture.
pub fn goldens(which: TableId) -> Result<Vec<Golden>> {
    let text = which.fixture();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let bad = |what: &str| Error::Config(format!("{} fixture line {}: {what}", which.name(), i + 1));
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(bad("expected 7 fields"));
        }
        let opt = |s: &str| -> Result<Option<u32>> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad("bad integer"))
            }
        };
        out.push(Golden {
            quantity: f[0].parse()?,
            flavor: f[1].parse()?,
            d: f[2].parse().map_err(|_| bad("bad d"))?,
            l: opt(f[3])?,
            n: f[4].parse().map_err(|_| bad("bad n"))?,
            m: opt(f[5])?,
            printed: f[6].parse()?,
        });
    }
    Ok(out)
}

fn find<'a>(gs: &'a [Golden], q: &ExpectationQuery, l: Option<u32>) -> Option<&'a Golden> {
    gs.iter().find(|g| {
        g.quantity == q.quantity && g.flavor == q.flavor && g.d == q.d && g.l == l && g.n == q.n && g.m == q.m
    })
}

/// Classifies a printed entry that differs from the computed value. Only the
/// documented misprints qualify; everything else is a failure.
fn known_discrepancy(which: TableId, q: &ExpectationQuery, printed: &SqrtPiPoly) -> Result<Option<String>> {
    let (n, d, l) = (q.n, q.d, q.l);
    match (which, q.quantity, q.flavor) {
        (TableId::AppAD2, Quantity::F, Flavor::Typical) if n > d + 1 => {
            let prev = moments::ef_typical(n - 1, d, d, l)?;
            Ok((*printed == prev).then(|| format!("printed entry is the value at n={}", n - 1)))
        }
        (TableId::AppAD3, Quantity::F, Flavor::Typical) if (l, n) == (1, 10) => {
            Ok(Some("misprinted numerator".into()))
        }
        (TableId::AppCD2 | TableId::AppCD3, Quantity::V, Flavor::Weighted) if l >= 1 => {
            // v_l = U_l - U_{l+2} with U_{d+1} = U_{d+2} = 0
            let u = |j: u32| -> Result<SqrtPiPoly> {
                if j > d {
                    Ok(SqrtPiPoly::zero())
                } else {
                    moments::u_weighted(n, d, d, j)
                }
            };
            let from_u = u(l)? - u(l + 2)?;
            let exact = moments::v_weighted(n, d, d, l)?;
            Ok((exact == from_u).then(|| "computed value equals U_l - U_(l+2)".into()))
        }
        _ => Ok(None),
    }
}

/// Computes a table and compares it with the printed goldens.
pub fn render_table(spec: &TableSpec) -> Result<Table> {
    let which = spec.which;
    let gs = goldens(which)?;
    let mut rows = Vec::new();
    for (quantity, d, ls) in which.layout() {
        let (n_lo, n_hi) = spec.n.unwrap_or_else(|| which.default_n_range(d));
        let n_lo = n_lo.max(d + 1);
        if which.is_isect() {
            let (m_lo, m_hi) = spec.m.unwrap_or_else(|| which.default_n_range(d));
            for m in m_lo.max(d + 1)..=m_hi {
                for n in n_lo..=n_hi {
                    let q = ExpectationQuery::isect(Flavor::Weighted, n, m, d);
                    rows.push(row(which, &gs, q, None)?);
                }
            }
            continue;
        }
        for flavor in [Flavor::Weighted, Flavor::Typical] {
            for &l in &ls {
                for n in n_lo..=n_hi {
                    let q = ExpectationQuery::new(quantity, flavor, n, d, d, l.unwrap_or(0));
                    rows.push(row(which, &gs, q, l)?);
                }
            }
        }
    }
    Ok(Table { spec: spec.clone(), rows })
}

fn row(which: TableId, gs: &[Golden], query: ExpectationQuery, l: Option<u32>) -> Result<TableRow> {
    let exact = moments::exact(&query)?;
    let printed = find(gs, &query, l).map(|g| g.printed.clone());
    let (verdict, note) = match &printed {
        None => (RowVerdict::NoGolden, None),
        Some(p) if *p == exact => (RowVerdict::Match, None),
        Some(p) => match known_discrepancy(which, &query, p)? {
            Some(note) => (RowVerdict::KnownDiscrepancy, Some(note)),
            None => (RowVerdict::Fail, None),
        },
    };
    Ok(TableRow { query, exact, printed, verdict, note })
}

/// Plot-data sets, one per figure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FigureId {
    FvecFig3,
    QuermassFig4,
    IntvolFig5,
    StatdimFig6,
    IsectFig8,
}

impl FigureId {
    pub const ALL: [FigureId; 5] = [
        FigureId::FvecFig3,
        FigureId::QuermassFig4,
        FigureId::IntvolFig5,
        FigureId::StatdimFig6,
        FigureId::IsectFig8,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FigureId::FvecFig3 => "fvec_fig3",
            FigureId::QuermassFig4 => "quermass_fig4",
            FigureId::IntvolFig5 => "intvol_fig5",
            FigureId::StatdimFig6 => "statdim_fig6",
            FigureId::IsectFig8 => "isect_fig8",
        }
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown figure {s:?}")))
    }
}

/// One panel: dimension `d`, face dimension `k`, intensities `ns` and,
/// for per-`l` figures, the range of `l`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FigureSpec {
    pub which: FigureId,
    pub d: u32,
    pub k: u32,
    pub ns: Vec<u32>,
    #[serde(default)]
    pub l_range: Option<(u32, u32)>,
}

impl FigureSpec {
    /// The panels as plotted.
    pub fn panels(which: FigureId) -> Vec<FigureSpec> {
        let per_l = |ns: Vec<u32>| FigureSpec { which, d: 19, k: 19, ns, l_range: Some((0, 19)) };
        let grid = |d: u32, k: u32| FigureSpec { which, d, k, ns: (d + 1..=d + 20).collect(), l_range: None };
        match which {
            FigureId::FvecFig3 => vec![per_l(vec![40, 60, 80])],
            FigureId::QuermassFig4 | FigureId::IntvolFig5 => vec![per_l(vec![20, 40, 60])],
            FigureId::StatdimFig6 => vec![grid(2, 2), grid(10, 5), grid(20, 10)],
            FigureId::IsectFig8 => vec![grid(2, 2), grid(5, 5), grid(10, 10)],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FigurePoint {
    pub flavor: Flavor,
    pub d: u32,
    pub k: u32,
    pub n: u32,
    pub l: Option<u32>,
    pub value: SqrtPiPoly,
}

pub const FIGURE_HEADER: &str = "flavor,d,k,n,l,exact,float";

/// Exact plot data; face numbers are divided by `10^7` as plotted.
pub fn figure_data(spec: &FigureSpec) -> Result<Vec<FigurePoint>> {
    let FigureSpec { which, d, k, .. } = *spec;
    if k > d || spec.ns.iter().any(|&n| n <= d) {
        return Err(Error::Precondition(format!("figure needs k <= d < n, got d={d}, k={k}, n={:?}", spec.ns)));
    }
    let quantity = match which {
        FigureId::FvecFig3 => Quantity::F,
        FigureId::QuermassFig4 => Quantity::U,
        FigureId::IntvolFig5 => Quantity::V,
        FigureId::StatdimFig6 => Quantity::Statdim,
        FigureId::IsectFig8 => Quantity::Isect,
    };
    let scale = match which {
        FigureId::FvecFig3 => BigRational::new(BigInt::from(1), BigInt::from(10_000_000)),
        _ => BigRational::from_integer(BigInt::from(1)),
    };
    let mut out = Vec::new();
    for flavor in [Flavor::Typical, Flavor::Weighted] {
        for &n in &spec.ns {
            let ls: Vec<Option<u32>> = match spec.l_range {
                Some((lo, hi)) if matches!(quantity, Quantity::F | Quantity::U | Quantity::V) => {
                    (lo..=hi.min(k)).map(Some).collect()
                }
                _ => vec![None],
            };
            for l in ls {
                let q = match quantity {
                    Quantity::Isect => ExpectationQuery::isect(flavor, n, n, d),
                    _ => ExpectationQuery::new(quantity, flavor, n, d, k, l.unwrap_or(0)),
                };
                let value = moments::exact(&q)?.scale(&scale);
                out.push(FigurePoint { flavor, d, k, n, l, value });
            }
        }
    }
    Ok(out)
}

pub fn figure_csv(points: &[FigurePoint]) -> String {
    let mut out = String::from(FIGURE_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            p.flavor.name(),
            p.d,
            p.k,
            p.n,
            p.l.map(|l| l.to_string()).unwrap_or_default(),
            p.value,
            format_sig(p.value.to_f64(), FLOAT_DIGITS)
        );
    }
    out
}

/// `n^l omega_{l+1} E v_l` against its Euclidean limit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitRow {
    pub n: u32,
    pub scaled: f64,
    pub limit: f64,
    pub gap: f64,
    pub rel_gap: f64,
}

pub fn limit_sweep(d: u32, k: u32, l: u32, flavor: Flavor, ns: &[u32]) -> Result<Vec<LimitRow>> {
    let limit = moments::euclid_v(flavor, &EuclidQuery { d, k, l, gamma: EuclidGamma::Star })?.to_f64();
    ns.iter()
        .map(|&n| {
            let gap = moments::euclid_limit_gap(d, k, l, flavor, n)?.to_f64();
            Ok(LimitRow { n, scaled: limit + gap, limit, gap, rel_gap: (gap / limit).abs() })
        })
        .collect()
}

pub fn limit_csv(rows: &[LimitRow]) -> String {
    let mut out = String::from("n,scaled,limit,gap,rel_gap\n");
    for r in rows {
        let f = |x: f64| format_sig(x, FLOAT_DIGITS);
        let _ = writeln!(out, "{},{},{},{},{}", r.n, f(r.scaled), f(r.limit), f(r.gap), f(r.rel_gap));
    }
    out
}
