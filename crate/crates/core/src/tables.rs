//! Rendering of the classified census and comparison against the bundled
//! transcription of the published tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::cases::{CaseParams, CaseRow};
use crate::pell::{
    classify_equation, default_moduli, prime_power_obstruction, qnr_obstruction, residue_obstruction,
    PellEquation, PellVerdict, Prime, LEMMA_PRIME_LIMIT,
};
use crate::surd::QuadraticSurd;

/// Significant digits used for every rendered ratio.
pub const RATIO_DIGITS: usize = 11;

/// Default binary working precision for rendered ratios.
pub const DEFAULT_PRECISION: u32 = 64;

/// Smallest accepted working precision.
pub const MIN_PRECISION: u32 = 60;

/// Absolute tolerance when comparing against printed ratios.
pub const RATIO_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown format '{0}' (expected markdown, csv or json)")]
pub struct UnknownFormat(pub String);

impl FromStr for Format {
    type Err = UnknownFormat;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(UnknownFormat(other.to_string())),
        }
    }
}

pub fn format_ratio(r: &QuadraticSurd, bits: u32) -> String {
    r.approximate(bits).to_decimal(RATIO_DIGITS)
}

fn evidence(v: &PellVerdict) -> String {
    match v {
        PellVerdict::Obstructed { certificate } => {
            format!("mod {} ({})", certificate.modulus(), certificate.kind().replace('_', " "))
        }
        PellVerdict::Solvable { witnesses } => {
            let (x, y) = witnesses[0];
            format!("x={x}, y={y}")
        }
        PellVerdict::Unknown { bound } => format!("none up to {bound}"),
    }
}

fn status(v: &PellVerdict) -> &'static str {
    match v {
        PellVerdict::Obstructed { .. } => "obstructed",
        PellVerdict::Solvable { .. } => "solvable",
        PellVerdict::Unknown { .. } => "unknown",
    }
}

/// JSON object for one row; `ratio` appears only on solvable rows.
pub fn row_json(row: &CaseRow, bits: u32) -> Value {
    let mut v = serde_json::to_value(row.params).expect("params serialize");
    let obj = v.as_object_mut().expect("params are an object");
    obj.insert("equation".into(), serde_json::to_value(row.equation).expect("equation serializes"));
    obj.insert("verdict".into(), serde_json::to_value(&row.verdict).expect("verdict serializes"));
    if let Some(r) = &row.ratio_limit {
        obj.insert("ratio".into(), Value::String(format_ratio(r, bits)));
    }
    v
}

fn grouped(rows: &[CaseRow]) -> BTreeMap<(u64, u64, u64), Vec<&CaseRow>> {
    let mut groups: BTreeMap<_, Vec<&CaseRow>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.params.skews()).or_default().push(r);
    }
    groups
}

/// Renders one sub-table per skew group plus the list of solvable rows.
/// Rows keep the order they are given in.
pub fn emit_tables(rows: &[CaseRow], format: Format, bits: u32) -> String {
    match format {
        Format::Json => emit_json(rows, bits),
        Format::Csv => emit_csv(rows, bits),
        Format::Markdown => emit_markdown(rows, bits),
    }
}

fn emit_json(rows: &[CaseRow], bits: u32) -> String {
    let groups: Vec<Value> = grouped(rows)
        .into_iter()
        .map(|((a, b, c), rs)| {
            json!({
                "skews": [a, b, c],
                "rows": rs.iter().map(|r| row_json(r, bits)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let solvable: Vec<Value> = rows
        .iter()
        .filter_map(|r| {
            let ratio = r.ratio_limit.as_ref()?;
            let mut v = serde_json::to_value(r.params).ok()?;
            v.as_object_mut()?
                .insert("ratio".into(), Value::String(format_ratio(ratio, bits)));
            Some(v)
        })
        .collect();
    let doc = json!({ "groups": groups, "solvable": solvable });
    serde_json::to_string_pretty(&doc).expect("tables serialize") + "\n"
}

fn emit_csv(rows: &[CaseRow], bits: u32) -> String {
    let mut out = String::from("section,D21,D31,D32,d_a,d_b,k,m,K,M,tau,status,modulus,x,y,ratio\n");
    let line = |out: &mut String, section: &str, r: &CaseRow| {
        let p = r.params;
        let modulus = r.verdict.certificate().map(|c| c.modulus().to_string()).unwrap_or_default();
        let (x, y) = r
            .verdict
            .witnesses()
            .first()
            .map(|&(x, y)| (x.to_string(), y.to_string()))
            .unwrap_or_default();
        let ratio = r.ratio_limit.as_ref().map(|q| format_ratio(q, bits)).unwrap_or_default();
        let _ = writeln!(
            out,
            "{section},{},{},{},{},{},{},{},{},{},{},{},{modulus},{x},{y},{ratio}",
            p.d21,
            p.d31,
            p.d32,
            p.d_a,
            p.d_b,
            p.k,
            p.m,
            r.equation.k(),
            r.equation.m(),
            r.equation.tau(),
            status(&r.verdict),
        );
    };
    for r in rows {
        line(&mut out, "cases", r);
    }
    for r in rows.iter().filter(|r| r.ratio_limit.is_some()) {
        line(&mut out, "solvable", r);
    }
    out
}

fn emit_markdown(rows: &[CaseRow], bits: u32) -> String {
    let mut out = String::new();
    for ((a, b, c), rs) in grouped(rows) {
        let _ = writeln!(out, "## D21 = {a}, D31 = {b}, D32 = {c}\n");
        out.push_str("| d_a | d_b | k | m | equation | verdict | evidence |\n");
        out.push_str("|---|---|---|---|---|---|---|\n");
        for r in rs {
            let p = r.params;
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} |",
                p.d_a,
                p.d_b,
                p.k,
                p.m,
                r.equation,
                status(&r.verdict),
                evidence(&r.verdict)
            );
        }
        out.push('\n');
    }
    out.push_str("## Solvable rows\n\n");
    out.push_str("| D21 | D31 | D32 | d_a | d_b | k | m | ratio A/a3^3 |\n");
    out.push_str("|---|---|---|---|---|---|---|---|\n");
    for r in rows {
        if let Some(q) = &r.ratio_limit {
            let p = r.params;
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} | {} | {} | {} |",
                p.d21,
                p.d31,
                p.d32,
                p.d_a,
                p.d_b,
                p.k,
                p.m,
                format_ratio(q, bits)
            );
        }
    }
    out
}

/// A row of the bundled transcription.
#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ReferenceRow {
    pub d_a: u64,
    pub d_b: u64,
    pub k: u64,
    pub m: u64,
    /// `[K, M, tau]` as printed.
    pub equation: [i64; 3],
    #[serde(default)]
    pub witness: Option<(u64, u64)>,
    /// `"mod N"`, `"parity"`, `"prime_power_lemma"` or `"non_residue_lemma"`.
    #[serde(default)]
    pub attribution: Option<String>,
    /// Expanded from a printed row that stood for several `(k, m)`.
    #[serde(default)]
    pub collapsed: bool,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ReferenceTable {
    pub table: u32,
    pub skews: [u64; 3],
    pub rows: Vec<ReferenceRow>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ReferenceRatio {
    pub params: [u64; 7],
    pub ratio: String,
    pub highlighted: bool,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ReferenceRatioTable {
    pub table: u32,
    pub rows: Vec<ReferenceRatio>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
pub struct ReferenceTables {
    pub tables: Vec<ReferenceTable>,
    pub ratio_table: ReferenceRatioTable,
}

pub fn reference() -> &'static ReferenceTables {
    static DATA: OnceLock<ReferenceTables> = OnceLock::new();
    DATA.get_or_init(|| {
        serde_json::from_str(include_str!("../data/reference_tables.json"))
            .expect("bundled reference tables parse")
    })
}

/// Whether the printed reason on its own proves the printed equation has
/// no solution.
pub fn attribution_holds(attribution: &str, eq: &PellEquation) -> bool {
    let primes = || Prime::up_to(LEMMA_PRIME_LIMIT);
    match attribution {
        "parity" => residue_obstruction(eq, 2).is_some(),
        "prime_power_lemma" => primes().any(|p| prime_power_obstruction(eq, p).is_some()),
        "non_residue_lemma" => primes().any(|p| qnr_obstruction(eq, p).is_some()),
        other => other
            .strip_prefix("mod ")
            .and_then(|m| m.parse::<u64>().ok())
            .is_some_and(|m| m >= 2 && residue_obstruction(eq, m).is_some()),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RowComparison {
    pub d_a: u64,
    pub d_b: u64,
    pub k: u64,
    pub m: u64,
    pub printed_equation: [i64; 3],
    /// The enumerated census contains these parameters.
    pub enumerated: bool,
    /// The printed equation is the one the parameters produce.
    pub equation_matches: bool,
    pub printed: String,
    pub status: &'static str,
    /// Verdict re-derived for the printed equation; independent of
    /// `enumerated`.
    pub verdict: PellVerdict,
    /// Printed "No" is obstructed with a certificate that re-verifies, or
    /// the printed witness is among the witnesses found.
    pub agrees: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attribution_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TableDiff {
    pub table: u32,
    pub skews: [u64; 3],
    pub row_set_matches: bool,
    /// Printed rows the census does not contain, as `(d_a,d_b,k,m)`.
    pub missing_from_census: Vec<[u64; 4]>,
    /// Census rows the printed table omits.
    pub missing_from_table: Vec<[u64; 4]>,
    pub rows: Vec<RowComparison>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioComparison {
    pub params: [u64; 7],
    pub printed: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub deviation: Option<f64>,
    pub in_census: bool,
    pub within_tolerance: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioTableDiff {
    pub table: u32,
    pub row_set_matches: bool,
    pub printed_rows: usize,
    pub solvable_rows: usize,
    pub missing_from_census: Vec<[u64; 7]>,
    pub missing_from_table: Vec<[u64; 7]>,
    pub rows: Vec<RatioComparison>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DiffReport {
    pub tables: Vec<TableDiff>,
    pub ratio_table: RatioTableDiff,
}

impl DiffReport {
    pub fn verdicts_agree(&self) -> bool {
        self.tables.iter().flat_map(|t| &t.rows).all(|r| r.agrees)
    }

    pub fn row_sets_match(&self) -> bool {
        self.tables.iter().all(|t| t.row_set_matches)
    }
}

fn compare_row(reference: &ReferenceRow, skews: [u64; 3], census: &BTreeMap<[u64; 7], &CaseRow>, bound: u64) -> RowComparison {
    let key = [skews[0], skews[1], skews[2], reference.d_a, reference.d_b, reference.k, reference.m];
    let engine = census.get(&key);
    let [kk, mm, tau] = reference.equation;
    let printed_eq = PellEquation::new(kk, mm, tau).expect("printed equations are well formed");
    let verdict = match engine {
        Some(row) if row.equation == printed_eq => row.verdict.clone(),
        _ => classify_equation(&printed_eq, &default_moduli(), bound),
    };
    let (printed, agrees, attribution_holds) = match (&reference.witness, &reference.attribution) {
        (Some((x, y)), _) => (
            format!("x={x}, y={y}"),
            verdict.witnesses().contains(&(*x, *y)),
            None,
        ),
        (None, Some(attr)) => (
            format!("no ({attr})"),
            verdict.certificate().is_some_and(|c| c.verify(&printed_eq)),
            Some(attribution_holds(attr, &printed_eq)),
        ),
        (None, None) => ("blank".into(), false, None),
    };
    let mut notes = Vec::new();
    if engine.is_none() {
        notes.push("parameters are not in the census".to_string());
    }
    if let Some(row) = engine {
        if row.equation != printed_eq {
            notes.push(format!("census equation is {}", row.equation));
        }
    }
    if attribution_holds == Some(false) {
        notes.push("printed reason does not certify this equation on its own".into());
    }
    if let (Some(attr), Some(c)) = (&reference.attribution, verdict.certificate()) {
        let printed_modulus = attr.strip_prefix("mod ").and_then(|m| m.parse::<u64>().ok());
        if printed_modulus.is_some_and(|m| m != c.modulus()) {
            notes.push(format!("smallest obstructing modulus is {}", c.modulus()));
        }
    }
    RowComparison {
        d_a: reference.d_a,
        d_b: reference.d_b,
        k: reference.k,
        m: reference.m,
        printed_equation: reference.equation,
        enumerated: engine.is_some(),
        equation_matches: engine.is_some_and(|r| r.equation == printed_eq),
        printed,
        status: status(&verdict),
        verdict,
        agrees,
        attribution_holds,
        note: (!notes.is_empty()).then(|| notes.join("; ")),
    }
}

/// Compares classified rows against the transcription. `rows` should be
/// the full census classified with `bound`.
pub fn paper_diff(rows: &[CaseRow], bound: u64, bits: u32) -> DiffReport {
    let census: BTreeMap<[u64; 7], &CaseRow> = rows.iter().map(|r| (r.params.as_tuple(), r)).collect();
    let reference = reference();
    let tables = reference
        .tables
        .iter()
        .map(|t| {
            let printed: BTreeSet<[u64; 4]> = t.rows.iter().map(|r| [r.d_a, r.d_b, r.k, r.m]).collect();
            let derived: BTreeSet<[u64; 4]> = rows
                .iter()
                .filter(|r| r.params.skews() == (t.skews[0], t.skews[1], t.skews[2]))
                .map(|r| [r.params.d_a, r.params.d_b, r.params.k, r.params.m])
                .collect();
            TableDiff {
                table: t.table,
                skews: t.skews,
                row_set_matches: printed == derived,
                missing_from_census: printed.difference(&derived).copied().collect(),
                missing_from_table: derived.difference(&printed).copied().collect(),
                rows: t.rows.iter().map(|r| compare_row(r, t.skews, &census, bound)).collect(),
            }
        })
        .collect();

    let printed: BTreeSet<[u64; 7]> = reference.ratio_table.rows.iter().map(|r| r.params).collect();
    let solvable: BTreeSet<[u64; 7]> = rows
        .iter()
        .filter(|r| r.ratio_limit.is_some())
        .map(|r| r.params.as_tuple())
        .collect();
    let ratio_rows = reference
        .ratio_table
        .rows
        .iter()
        .map(|r| {
            let in_census = solvable.contains(&r.params);
            // rows outside the census are still evaluated when the formula
            // makes sense for them, so the printed value can be checked
            let value = census
                .get(&r.params)
                .and_then(|row| row.ratio_limit.clone())
                .or_else(|| formula_outside_census(r.params));
            let printed_value: f64 = r.ratio.parse().expect("printed ratio parses");
            let deviation = value.as_ref().map(|v| (v.approximate(bits).to_f64() - printed_value).abs());
            RatioComparison {
                params: r.params,
                printed: r.ratio.clone(),
                engine: value.as_ref().map(|v| format_ratio(v, bits)),
                deviation,
                in_census,
                within_tolerance: deviation.is_some_and(|d| d <= RATIO_TOLERANCE),
            }
        })
        .collect();
    DiffReport {
        tables,
        ratio_table: RatioTableDiff {
            table: reference.ratio_table.table,
            row_set_matches: printed == solvable,
            printed_rows: printed.len(),
            solvable_rows: solvable.len(),
            missing_from_census: printed.difference(&solvable).copied().collect(),
            missing_from_table: solvable.difference(&printed).copied().collect(),
            rows: ratio_rows,
        },
    }
}

/// The limit formula only needs positive `k, m, d_a, d_b` and
/// `D21 < D31 < D21 + D32`, so it can be evaluated on printed rows the
/// census excludes.
fn formula_outside_census(p: [u64; 7]) -> Option<QuadraticSurd> {
    let [d21, d31, d32, d_a, d_b, k, m] = p;
    if p.contains(&0) || d31 <= d21 || d32 + d21 <= d31 {
        return None;
    }
    let params = CaseParams { d21, d31, d32, d_a, d_b, k, m };
    Some(crate::cases::ratio_limit(&params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cases::{classify, enumerate_group, CaseParams};

    #[test]
    fn format_parsing() {
        assert_eq!("csv".parse::<Format>(), Ok(Format::Csv));
        assert_eq!("markdown".parse::<Format>(), Ok(Format::Markdown));
        assert!("xml".parse::<Format>().is_err());
    }

    #[test]
    fn reference_parses() {
        let r = reference();
        assert_eq!(r.tables.len(), 16);
        assert_eq!(r.ratio_table.rows.len(), 22);
        assert_eq!(r.ratio_table.rows.iter().filter(|r| r.highlighted).count(), 1);
    }

    #[test]
    fn attribution_checks() {
        let eq = PellEquation::new(12, 1, 2).unwrap();
        assert!(attribution_holds("mod 4", &eq));
        assert!(!attribution_holds("mod 3", &eq));
        assert!(attribution_holds("prime_power_lemma", &PellEquation::new(18, 1, 3).unwrap()));
        // printed as a lemma application but neither lemma applies
        assert!(!attribution_holds("prime_power_lemma", &PellEquation::new(10, 3, 3).unwrap()));
        assert!(!attribution_holds("mod x", &eq));
    }

    #[test]
    fn json_ratio_only_on_solvable_rows() {
        let rows: Vec<_> = enumerate_group(1, 2, 4).iter().map(|p| classify(p, 100)).collect();
        let doc: Value = serde_json::from_str(&emit_tables(&rows, Format::Json, 64)).unwrap();
        let group = &doc["groups"][0]["rows"];
        for row in group.as_array().unwrap() {
            assert_eq!(row.get("ratio").is_some(), row["verdict"]["status"] == "solvable");
        }
        assert_eq!(doc["solvable"][0]["ratio"], "0.040720673228");
    }

    #[test]
    fn csv_sections() {
        let rows = vec![classify(&CaseParams::new(1, 3, 4, 1, 1, 6, 4).unwrap(), 100)];
        let csv = emit_tables(&rows, Format::Csv, 64);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("cases,1,3,4,1,1,6,4,6,4,6,solvable,,5,6,0.047420655584"));
        assert!(lines[2].starts_with("solvable,"));
    }

    #[test]
    fn markdown_has_group_headers() {
        let rows: Vec<_> = enumerate_group(1, 2, 3).iter().map(|p| classify(p, 100)).collect();
        let md = emit_tables(&rows, Format::Markdown, 64);
        assert!(md.contains("## D21 = 1, D31 = 2, D32 = 3"));
        assert!(md.contains("| 1 | 1 | 12 | 1 | 12x^2 - 1y^2 = 2 | obstructed | mod 4 (residue sweep) |"));
    }
}
