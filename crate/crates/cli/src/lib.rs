//! Command-line front end. [`run`] takes the argument vector and returns
//! the exit code with the data and diagnostic streams, so the binary and
//! the tests share one code path.

use std::fmt::Write as _;

use clap::{Args, Parser, Subcommand, ValueEnum};
use closefact::cases::{
    classify_all, enumerate_group, excluded_pair_threshold, large_skew_threshold, supremum_closed_form,
    supremum_ratio, CaseRow,
};
use closefact::factorization::{
    check_structure, compute_skews, reconstruct_ab, verify_quadruple, CloseFactorization, Offset,
};
use closefact::oracle::{brute_force, optimal_family, theorem0_family, FamilyInstance, SearchBox};
use closefact::pell::{classify_equation, default_moduli, fundamental_solution, PellEquation, DEFAULT_SEARCH_BOUND};
use closefact::tables::{emit_tables, format_ratio, paper_diff, Format, DEFAULT_PRECISION, MIN_PRECISION};
use closefact::QuadraticSurd;
use num_bigint::BigInt;
use serde_json::{json, Value};

/// Environment variable overriding the ratio working precision in bits.
pub const PRECISION_VAR: &str = "CLOSEFACT_PRECISION";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn data(stdout: String) -> Self {
        Outcome { code: 0, stdout, stderr: String::new() }
    }

    fn domain(stdout: String, message: impl std::fmt::Display) -> Self {
        Outcome { code: 1, stdout, stderr: format!("error: {message}\n") }
    }

    fn usage(message: impl std::fmt::Display) -> Self {
        Outcome { code: 2, stdout: String::new(), stderr: format!("error: {message}\n") }
    }
}

#[derive(Parser, Debug)]
#[command(name = "closefact", version, about = "Integers with several close factorizations")]
struct Cli {
    /// Output format; not every command supports every format.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
    Markdown,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate n = A*B = (A + a_i)(B - b_i) for every offset.
    Verify {
        #[arg(long)]
        n: String,
        #[arg(long = "A")]
        big_a: String,
        #[arg(long = "B")]
        big_b: String,
        /// Offsets as a:b,a:b,...
        #[arg(long)]
        offsets: String,
    },
    /// Skews of three offsets and the base pair they force.
    Skews {
        #[arg(long)]
        offsets: String,
    },
    /// Generalized Pell equations K x^2 - M y^2 = tau.
    #[command(subcommand)]
    Pell(PellCommand),
    /// The classified case census.
    Cases {
        /// Restrict to one skew group, as D21,D31,D32.
        #[arg(long)]
        group: Option<String>,
        /// Compare against the bundled transcription of the published tables.
        #[arg(long)]
        paper_diff: bool,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BOUND)]
        bound: u64,
    },
    /// Members of the explicit families.
    Family(FamilyArgs),
    /// Exhaustive search for close factorizations in a box.
    Search {
        #[arg(long)]
        amax: u64,
        #[arg(long)]
        cmax: u64,
        /// Minimum number of factorizations, counting A*B.
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Full pipeline: census, ratios, supremum and family cross-checks.
    Report {
        #[arg(long, default_value_t = DEFAULT_SEARCH_BOUND)]
        bound: u64,
    },
}

#[derive(Subcommand, Debug)]
enum PellCommand {
    /// Obstruction certificate or witnesses for K x^2 - M y^2 = TAU.
    Classify {
        #[arg(value_name = "K")]
        k: i64,
        #[arg(value_name = "M")]
        m: i64,
        #[arg(value_name = "TAU", allow_negative_numbers = true)]
        tau: i64,
        /// Comma-separated sweep moduli (default: prime powers up to 64).
        #[arg(long)]
        moduli: Option<String>,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BOUND)]
        bound: u64,
    },
    /// Fundamental solution of x^2 - D y^2 = 1, optionally raised to a power.
    Fundamental {
        #[arg(value_name = "D")]
        d: u64,
        #[arg(long)]
        power: Option<u32>,
    },
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct FamilyArgs {
    /// Four-factorization family member built from (5 + 2 sqrt 6)^i.
    #[arg(long)]
    index: Option<u64>,
    /// Three-factorization family member with C = 2N + 1.
    #[arg(long)]
    k3: Option<u64>,
}

/// Runs the CLI, reading the precision override from the environment.
pub fn run<I, S>(args: I) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    run_with_precision(args, std::env::var(PRECISION_VAR).ok())
}

pub fn run_with_precision<I, S>(args: I, precision: Option<String>) -> Outcome
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let argv: Vec<String> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome { code: 2, stdout: String::new(), stderr: text }
            } else {
                Outcome::data(text)
            };
        }
    };
    let bits = match precision.as_deref().map(str::parse::<u32>) {
        None => DEFAULT_PRECISION,
        Some(Ok(b)) if b >= MIN_PRECISION => b,
        Some(_) => {
            return Outcome::usage(format!(
                "{PRECISION_VAR} must be an integer of at least {MIN_PRECISION}"
            ))
        }
    };
    dispatch(cli, bits)
}

fn require(format: OutputFormat, allowed: &[OutputFormat], command: &str) -> Result<(), Outcome> {
    if allowed.contains(&format) {
        Ok(())
    } else {
        let name = format!("{format:?}").to_lowercase();
        Err(Outcome::usage(format!("--format {name} is not supported by '{command}'")))
    }
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("json renders") + "\n"
}

fn parse_int(flag: &str, s: &str) -> Result<BigInt, Outcome> {
    s.parse::<BigInt>()
        .map_err(|_| Outcome::usage(format!("invalid integer for {flag}: '{s}'")))
}

fn parse_offsets(s: &str) -> Result<Vec<Offset>, Outcome> {
    s.split(',')
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| Outcome::usage(format!("invalid offset '{pair}' for --offsets (expected a:b)")))?;
            Ok(Offset::new(parse_int("--offsets", a.trim())?, parse_int("--offsets", b.trim())?))
        })
        .collect()
}

fn rational_decimal(r: &num_rational::BigRational, bits: u32) -> String {
    format_ratio(&QuadraticSurd::from_rational(r.clone()), bits)
}

fn skews_json(offsets: &[Offset]) -> Option<Value> {
    let s = compute_skews(offsets).ok()?;
    Some(json!({ "D21": s.d21.to_string(), "D31": s.d31.to_string(), "D32": s.d32.to_string() }))
}

fn factorization_json(cf: &CloseFactorization, bits: u32) -> Value {
    let mut v = serde_json::to_value(cf).expect("factorization serializes");
    let obj = v.as_object_mut().expect("object");
    obj.insert("k".into(), json!(cf.k()));
    obj.insert(
        "factorizations".into(),
        cf.factor_pairs()
            .iter()
            .map(|(x, y)| json!([x.to_string(), y.to_string()]))
            .collect(),
    );
    if cf.offsets().len() == 3 {
        if let Some(s) = skews_json(cf.offsets()) {
            obj.insert("skews".into(), s);
        }
        obj.insert("structure".into(), serde_json::to_value(check_structure(cf)).expect("report serializes"));
    }
    let ratio = cf.ratio();
    obj.insert(
        "ratio".into(),
        json!({ "exact": ratio.to_string(), "decimal": rational_decimal(&ratio, bits) }),
    );
    v
}

fn dispatch(cli: Cli, bits: u32) -> Outcome {
    let format = cli.format;
    let result = match cli.command {
        Command::Verify { n, big_a, big_b, offsets } => cmd_verify(format, &n, &big_a, &big_b, &offsets, bits),
        Command::Skews { offsets } => cmd_skews(format, &offsets),
        Command::Pell(PellCommand::Classify { k, m, tau, moduli, bound }) => {
            cmd_pell_classify(format, k, m, tau, moduli.as_deref(), bound)
        }
        Command::Pell(PellCommand::Fundamental { d, power }) => cmd_pell_fundamental(format, d, power),
        Command::Cases { group, paper_diff, bound } => cmd_cases(format, group.as_deref(), paper_diff, bound, bits),
        Command::Family(args) => cmd_family(format, args, bits),
        Command::Search { amax, cmax, k, jobs } => cmd_search(format, amax, cmax, k, jobs, bits),
        Command::Report { bound } => cmd_report(format, bound, bits),
    };
    result.unwrap_or_else(|e| e)
}

fn cmd_verify(format: OutputFormat, n: &str, a: &str, b: &str, offsets: &str, bits: u32) -> Result<Outcome, Outcome> {
    require(format, &[OutputFormat::Json], "verify")?;
    let n = parse_int("--n", n)?;
    let big_a = parse_int("--A", a)?;
    let big_b = parse_int("--B", b)?;
    let offsets = parse_offsets(offsets)?;
    match verify_quadruple(&n, &big_a, &big_b, &offsets) {
        Ok(cf) => {
            let mut v = json!({ "status": "valid" });
            if let (Some(obj), Value::Object(rest)) = (v.as_object_mut(), factorization_json(&cf, bits)) {
                obj.extend(rest);
            }
            Ok(Outcome::data(pretty(&v)))
        }
        Err(e) => {
            let v = json!({ "status": "invalid", "error": e.code(), "message": e.to_string() });
            Err(Outcome::domain(pretty(&v), e))
        }
    }
}

fn cmd_skews(format: OutputFormat, offsets: &str) -> Result<Outcome, Outcome> {
    require(format, &[OutputFormat::Json], "skews")?;
    let offsets = parse_offsets(offsets)?;
    let skews = compute_skews(&offsets).map_err(|e| Outcome::domain(String::new(), e))?;
    let (a, b) = reconstruct_ab(&offsets, &skews).map_err(|e| Outcome::domain(String::new(), e))?;
    let v = json!({
        "D21": skews.d21.to_string(),
        "D31": skews.d31.to_string(),
        "D32": skews.d32.to_string(),
        "A": a.to_string(),
        "B": b.to_string(),
    });
    Ok(Outcome::data(pretty(&v)))
}

fn cmd_pell_classify(
    format: OutputFormat,
    k: i64,
    m: i64,
    tau: i64,
    moduli: Option<&str>,
    bound: u64,
) -> Result<Outcome, Outcome> {
    require(format, &[OutputFormat::Json], "pell classify")?;
    let eq = PellEquation::new(k, m, tau).map_err(|e| Outcome::domain(String::new(), e))?;
    let moduli = match moduli {
        None => default_moduli(),
        Some(list) => list
            .split(',')
            .map(|s| match s.trim().parse::<u64>() {
                Ok(m) if m >= 2 => Ok(m),
                _ => Err(Outcome::usage(format!("invalid modulus '{s}' for --moduli (need integers >= 2)"))),
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    if bound == 0 {
        return Err(Outcome::usage("--bound must be at least 1"));
    }
    let verdict = classify_equation(&eq, &moduli, bound);
    let mut v = serde_json::to_value(&verdict).expect("verdict serializes");
    let obj = v.as_object_mut().expect("object");
    obj.insert("equation".into(), serde_json::to_value(eq).expect("equation serializes"));
    if let Some(c) = verdict.certificate() {
        obj.insert("modulus".into(), json!(c.modulus()));
    }
    Ok(Outcome::data(pretty(&v)))
}

fn cmd_pell_fundamental(format: OutputFormat, d: u64, power: Option<u32>) -> Result<Outcome, Outcome> {
    require(format, &[OutputFormat::Json], "pell fundamental")?;
    let unit = fundamental_solution(d).map_err(|e| Outcome::domain(String::new(), e))?;
    let v = match power {
        None => json!({ "D": d, "x": unit.x.to_string(), "y": unit.y.to_string() }),
        Some(i) => {
            let (x, y) = unit.power(i);
            json!({ "D": d, "power": i, "x": x.to_string(), "y": y.to_string() })
        }
    };
    Ok(Outcome::data(pretty(&v)))
}

fn parse_group(s: &str) -> Result<(u64, u64, u64), Outcome> {
    let parts: Vec<u64> = s
        .split(',')
        .map(|p| p.trim().parse::<u64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Outcome::usage(format!("invalid value '{s}' for --group (expected D21,D31,D32)")))?;
    match parts[..] {
        [a, b, c] => Ok((a, b, c)),
        _ => Err(Outcome::usage(format!("invalid value '{s}' for --group (expected D21,D31,D32)"))),
    }
}

fn table_format(format: OutputFormat) -> Format {
    match format {
        OutputFormat::Json => Format::Json,
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Markdown => Format::Markdown,
    }
}

fn cmd_cases(format: OutputFormat, group: Option<&str>, diff: bool, bound: u64, bits: u32) -> Result<Outcome, Outcome> {
    if diff {
        require(format, &[OutputFormat::Json], "cases --paper-diff")?;
        let rows = classify_all(bound);
        let report = paper_diff(&rows, bound, bits);
        let v = serde_json::to_value(&report).expect("diff serializes");
        return Ok(Outcome::data(pretty(&v)));
    }
    let rows: Vec<CaseRow> = match group {
        None => classify_all(bound),
        Some(g) => {
            let (a, b, c) = parse_group(g)?;
            let params = enumerate_group(a, b, c);
            if params.is_empty() {
                return Err(Outcome::domain(
                    String::new(),
                    format!("skew group ({a},{b},{c}) is not part of the census"),
                ));
            }
            params.iter().map(|p| closefact::cases::classify(p, bound)).collect()
        }
    };
    Ok(Outcome::data(emit_tables(&rows, table_format(format), bits)))
}

fn family_json(f: &FamilyInstance, bits: u32) -> Value {
    let mut v = factorization_json(&f.cf, bits);
    let obj = v.as_object_mut().expect("object");
    obj.insert("index".into(), json!(f.index));
    if let Some((x, y)) = &f.unit {
        obj.insert("family".into(), json!("optimal"));
        obj.insert("unit".into(), json!({ "x": x.to_string(), "y": y.to_string() }));
    }
    if let Some(bound) = &f.bound {
        obj.insert("family".into(), json!("three_factor"));
        obj.insert("C".into(), json!(f.cf.closeness().to_string()));
        obj.insert("bound".into(), json!(bound.to_string()));
        obj.insert("within_bound".into(), json!(f.within_bound()));
    }
    v
}

fn cmd_family(format: OutputFormat, args: FamilyArgs, bits: u32) -> Result<Outcome, Outcome> {
    require(format, &[OutputFormat::Json], "family")?;
    let instance = match (args.index, args.k3) {
        (Some(i), _) => optimal_family(i),
        (_, Some(n)) => theorem0_family(n),
        _ => unreachable!("clap enforces exactly one of --index and --k3"),
    }
    .map_err(|e| Outcome::domain(String::new(), e))?;
    Ok(Outcome::data(pretty(&family_json(&instance, bits))))
}

fn cmd_search(format: OutputFormat, amax: u64, cmax: u64, k: usize, jobs: usize, bits: u32) -> Result<Outcome, Outcome> {
    require(format, &[OutputFormat::Json, OutputFormat::Csv], "search")?;
    if jobs == 0 {
        return Err(Outcome::usage("--jobs must be at least 1"));
    }
    let sbox = SearchBox::new(amax, cmax, k).map_err(|e| Outcome::domain(String::new(), e))?;
    let found = brute_force(sbox, jobs);
    if format == OutputFormat::Csv {
        let mut out = String::from("n,A,B,offsets\n");
        for cf in &found {
            let offs: Vec<String> = cf.offsets().iter().map(Offset::to_string).collect();
            let _ = writeln!(out, "{},{},{},{}", cf.n(), cf.a(), cf.b(), offs.join(";"));
        }
        return Ok(Outcome::data(out));
    }
    let v = json!({
        "box": { "amax": amax, "cmax": cmax, "k": k },
        "count": found.len(),
        "results": found.iter().map(|cf| factorization_json(cf, bits)).collect::<Vec<_>>(),
    });
    Ok(Outcome::data(pretty(&v)))
}

fn cmd_report(format: OutputFormat, bound: u64, bits: u32) -> Result<Outcome, Outcome> {
    require(format, &[OutputFormat::Json, OutputFormat::Markdown], "report")?;
    let flagship = optimal_family(2).map_err(|e| Outcome::domain(String::new(), e))?;
    let rows = classify_all(bound);
    let (sup_params, sup_value) =
        supremum_ratio(&rows).ok_or_else(|| Outcome::domain(String::new(), "no solvable rows"))?;
    let large = QuadraticSurd::from_rational(large_skew_threshold());
    let excluded = QuadraticSurd::from_rational(excluded_pair_threshold());
    let others_below = rows
        .iter()
        .filter(|r| r.params != sup_params)
        .filter_map(|r| r.ratio_limit.as_ref())
        .all(|r| r < &large);
    let family: Vec<Value> = (1..=8)
        .map(|i| {
            let f = optimal_family(i).expect("family index is positive");
            let skews = compute_skews(f.cf.offsets()).expect("family skews");
            json!({
                "index": i,
                "A": f.cf.a().to_string(),
                "skews": [skews.d21.to_string(), skews.d31.to_string(), skews.d32.to_string()],
                "ratio": rational_decimal(&f.cf.ratio(), bits),
            })
        })
        .collect();
    let diff = paper_diff(&rows, bound, bits);
    let supremum = json!({
        "params": sup_params,
        "value": format_ratio(&sup_value, bits),
        "equals_closed_form": sup_value == supremum_closed_form(),
        "exceeds_large_skew_threshold": sup_value > large,
        "exceeds_excluded_pair_threshold": sup_value > excluded,
        "others_below_large_skew_threshold": others_below,
    });
    if format == OutputFormat::Markdown {
        let mut out = String::from("# Close factorization report\n\n## Flagship example\n\n");
        for (x, y) in flagship.cf.factor_pairs() {
            let _ = writeln!(out, "- {} = {x} * {y}", flagship.cf.n());
        }
        let _ = writeln!(out, "\nratio A/C^3 = {}\n", rational_decimal(&flagship.cf.ratio(), bits));
        out.push_str(&emit_tables(&rows, Format::Markdown, bits));
        let _ = writeln!(
            out,
            "\n## Supremum\n\n{} at {} (closed form match: {}; all other rows below 0.042: {})\n",
            format_ratio(&sup_value, bits),
            sup_params,
            sup_value == supremum_closed_form(),
            others_below
        );
        out.push_str("## Optimal family\n\n| i | A | ratio |\n|---|---|---|\n");
        for f in &family {
            let _ = writeln!(out, "| {} | {} | {} |", f["index"], f["A"].as_str().unwrap_or(""), f["ratio"].as_str().unwrap_or(""));
        }
        let _ = writeln!(
            out,
            "\n## Comparison with published tables\n\nverdicts agree: {}; row sets match: {}; solvable rows {} (published {})",
            diff.verdicts_agree(),
            diff.row_sets_match(),
            diff.ratio_table.solvable_rows,
            diff.ratio_table.printed_rows
        );
        return Ok(Outcome::data(out));
    }
    let tables: Value = serde_json::from_str(&emit_tables(&rows, Format::Json, bits)).expect("tables are json");
    let v = json!({
        "flagship": family_json(&flagship, bits),
        "tables": tables,
        "supremum": supremum,
        "family": family,
        "paper_diff": {
            "verdicts_agree": diff.verdicts_agree(),
            "row_sets_match": diff.row_sets_match(),
            "solvable_rows": diff.ratio_table.solvable_rows,
            "published_rows": diff.ratio_table.printed_rows,
            "missing_from_census": diff.ratio_table.missing_from_census,
            "missing_from_table": diff.ratio_table.missing_from_table,
        },
    });
    Ok(Outcome::data(pretty(&v)))
}
