//! Acceptance suite. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line; the process fails if any criterion does.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use closefact::cases::{classify_all, enumerate_group, supremum_closed_form, supremum_ratio, CaseParams};
use closefact::factorization::{check_structure, compute_skews, derive_case, skew_ratio_bound};
use closefact::oracle::{brute_force, max_ratio, optimal_family, quadruples, theorem0_family, SearchBox};
use closefact::pell::{
    bounded_search, classify_equation, default_moduli, fundamental_solution, PellEquation, DEFAULT_SEARCH_BOUND,
};
use closefact::tables::{format_ratio, reference, DEFAULT_PRECISION};
use closefact::QuadraticSurd;
use num_bigint::BigInt;
use num_rational::BigRational;
use serde_json::Value;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Verdict { pass, detail: detail.into() }
    }
}

fn timed(limit: Duration, f: impl FnOnce() -> Verdict) -> Verdict {
    let start = Instant::now();
    let mut v = f();
    let took = start.elapsed();
    if took > limit {
        v.pass = false;
    }
    v.detail = format!("{} [{:.2?} of {:?}]", v.detail, took, limit);
    v
}

fn big(v: u64) -> BigInt {
    BigInt::from(v)
}

fn closed_form_f64() -> f64 {
    let s6 = 6f64.sqrt();
    (6.0 + s6) / (9.0 * (2.0 + s6).powi(2))
}

fn flagship() -> Verdict {
    let out = closefact_cli::run_with_precision(["closefact", "family", "--index", "2"], None);
    if out.code != 0 {
        return Verdict::new(false, format!("exit code {}: {}", out.code, out.stderr.trim()));
    }
    let v: Value = serde_json::from_str(&out.stdout).expect("family emits json");
    let n = big(665165362680);
    let expected = [(902460u64, 737058u64), (902520, 737009), (902629, 736920), (902727, 736840)];
    let pairs: Vec<(BigInt, BigInt)> = v["factorizations"]
        .as_array()
        .map(|a| {
            a.iter()
                .map(|p| (p[0].as_str().unwrap().parse().unwrap(), p[1].as_str().unwrap().parse().unwrap()))
                .collect()
        })
        .unwrap_or_default();
    let same = pairs == expected.iter().map(|&(x, y)| (big(x), big(y))).collect::<Vec<_>>();
    let products = pairs.iter().all(|(x, y)| x * y == n);
    let n_ok = v["n"].as_str() == Some("665165362680");
    let r4 = BigRational::new(big(902460), big(267u64.pow(3)));
    let r4_ok = v["ratio"]["exact"].as_str() == Some(r4.to_string().as_str());
    let dev = (902460.0 / 267f64.powi(3) - 0.0474126).abs();
    Verdict::new(
        n_ok && same && products && r4_ok && dev < 1e-7,
        format!("n = {}, {} factorizations, R4 = {} (|R4 - 0.0474126| = {dev:.1e})", v["n"], pairs.len(), r4),
    )
}

fn ratio_table() -> Verdict {
    let rows = classify_all(DEFAULT_SEARCH_BOUND);
    let engine: BTreeSet<[u64; 7]> = rows
        .iter()
        .filter(|r| r.verdict.is_solvable())
        .map(|r| r.params.as_tuple())
        .collect();
    let printed = &reference().ratio_table.rows;
    let printed_set: BTreeSet<[u64; 7]> = printed.iter().map(|r| r.params).collect();
    let mut worst = 0f64;
    let mut compared = 0;
    for r in printed {
        let Ok(p) = CaseParams::new(r.params[0], r.params[1], r.params[2], r.params[3], r.params[4], r.params[5], r.params[6]) else {
            continue;
        };
        if !engine.contains(&r.params) {
            continue;
        }
        let value: f64 = format_ratio(&closefact::cases::ratio_limit(&p), DEFAULT_PRECISION).parse().unwrap();
        worst = worst.max((value - r.ratio.parse::<f64>().unwrap()).abs());
        compared += 1;
    }
    let missing: Vec<_> = printed_set.difference(&engine).collect();
    let extra: Vec<_> = engine.difference(&printed_set).collect();
    Verdict::new(
        missing.is_empty() && extra.is_empty() && worst <= 1e-9,
        format!(
            "engine {} solvable rows vs {} printed; printed but not solvable {:?}; solvable but not printed {:?}; \
             max ratio deviation {worst:.1e} over {compared} shared rows",
            engine.len(),
            printed.len(),
            missing,
            extra
        ),
    )
}

fn verdict_fidelity() -> Verdict {
    let moduli = default_moduli();
    let mut disagreements = Vec::new();
    let mut mismatched_tables = Vec::new();
    let mut checked = 0;
    for table in &reference().tables {
        let [d21, d31, d32] = table.skews;
        let enumerated: BTreeSet<[u64; 4]> =
            enumerate_group(d21, d31, d32).iter().map(|p| [p.d_a, p.d_b, p.k, p.m]).collect();
        let printed: BTreeSet<[u64; 4]> = table.rows.iter().map(|r| [r.d_a, r.d_b, r.k, r.m]).collect();
        if enumerated != printed {
            mismatched_tables.push(table.table);
        }
        for row in &table.rows {
            checked += 1;
            let [k, m, tau] = row.equation;
            let eq = PellEquation::new(k, m, tau).expect("printed equations are well formed");
            let verdict = classify_equation(&eq, &moduli, DEFAULT_SEARCH_BOUND);
            let ok = match row.witness {
                None => verdict.certificate().is_some_and(|c| c.verify(&eq)),
                Some(w) => verdict.is_solvable() && bounded_search(&eq, DEFAULT_SEARCH_BOUND).contains(&w),
            };
            if !ok {
                disagreements.push(format!("table {} {eq}", table.table));
            }
        }
    }
    Verdict::new(
        disagreements.is_empty() && mismatched_tables.is_empty(),
        format!(
            "{checked} printed rows, verdict disagreements {disagreements:?}, row sets differ in tables {mismatched_tables:?}"
        ),
    )
}

fn supremum() -> Verdict {
    let rows = classify_all(DEFAULT_SEARCH_BOUND);
    let Some((params, value)) = supremum_ratio(&rows) else {
        return Verdict::new(false, "no solvable rows");
    };
    let target = CaseParams::new(1, 3, 4, 1, 1, 6, 4).unwrap();
    let dev = (value.approximate(128).to_f64() - closed_form_f64()).abs();
    let cutoff = QuadraticSurd::from_rational(BigRational::new(big(42), big(1000)));
    let above: Vec<String> = rows
        .iter()
        .filter(|r| r.params != params)
        .filter_map(|r| r.ratio_limit.as_ref().filter(|v| *v >= &cutoff).map(|_| r.params.to_string()))
        .collect();
    Verdict::new(
        params == target && value == supremum_closed_form() && dev < 1e-12 && above.is_empty(),
        format!("supremum at {params} = {} (deviation {dev:.1e}), other rows at or above 0.042: {above:?}", format_ratio(&value, 64)),
    )
}

fn oracle() -> Verdict {
    let sbox = SearchBox::new(1200, 27, 4).unwrap();
    let start = Instant::now();
    let single = brute_force(sbox, 1);
    let t1 = start.elapsed();
    let start = Instant::now();
    let parallel = brute_force(sbox, 4);
    let t4 = start.elapsed();
    let found = single.iter().any(|cf| cf.n() == &big(706860));
    let mut failures = 0;
    let mut quads = 0;
    for cf in &single {
        for quad in cf.sub_tuples(3) {
            quads += 1;
            let o = quad.offsets();
            let ok = check_structure(&quad).all_pass()
                && compute_skews(o).is_ok_and(|s| {
                    [(1, 0, &s.d21), (2, 0, &s.d31), (2, 1, &s.d32)].into_iter().all(|(i, j, d)| {
                        let lambda = BigRational::new(&o[i].a - &o[j].a, o[j].a.clone());
                        BigRational::from_integer(quad.a().clone()) <= skew_ratio_bound(&lambda, &o[2].a, d)
                    })
                })
                && derive_case(&quad).is_ok_and(|c| c.km_identity_holds() && c.k_dominates() && c.pell_holds());
            if !ok {
                failures += 1;
            }
        }
    }
    let all_quads = quadruples(&single);
    let max = max_ratio(&all_quads).map(|(r, _)| r);
    let max_ok = max.as_ref().is_ok_and(|r| r <= &BigRational::new(big(475), big(10000)));
    let pass = found
        && failures == 0
        && quads > 0
        && max_ok
        && single == parallel
        && t1 < Duration::from_secs(60)
        && t4 < Duration::from_secs(15);
    Verdict::new(
        pass,
        format!(
            "{} tuples, 706860 found: {found}, {quads} quadruples with {failures} identity failures, max ratio {}, \
             1 worker {t1:.2?}, 4 workers {t4:.2?}, identical: {}",
            single.len(),
            max.map(|r| format_ratio(&QuadraticSurd::from_rational(r), 64)).unwrap_or_default(),
            single == parallel
        ),
    )
}

fn pell_machinery() -> Verdict {
    let mut bad = Vec::new();
    for d in 2u64..=50 {
        let r = (d as f64).sqrt() as u64;
        if r * r == d {
            continue;
        }
        let minimal = (1u64..)
            .find_map(|y| {
                let x2 = 1 + d * y * y;
                let x = (x2 as f64).sqrt().round() as u64;
                (x * x == x2).then_some((big(x), big(y)))
            })
            .unwrap();
        let unit = fundamental_solution(d).unwrap();
        if (unit.x, unit.y) != minimal {
            bad.push(d);
        }
    }
    let unit = fundamental_solution(6).unwrap();
    let powers_ok = (1..=24).all(|i| {
        let (x, y) = unit.power(i);
        &x * &x - big(6) * &y * &y == big(1)
    });
    let second = unit.power(2) == (big(49), big(20));
    Verdict::new(
        bad.is_empty() && powers_ok && second,
        format!("fundamental mismatches {bad:?}, powers 1..=24 on x^2 - 6y^2 = 1: {powers_ok}, power 2 = (49, 20): {second}"),
    )
}

fn convergence() -> Verdict {
    let limit = supremum_closed_form();
    let members: Vec<_> = (1..=8).map(|i| optimal_family(i).unwrap()).collect();
    let ratios: Vec<QuadraticSurd> = members.iter().map(|f| QuadraticSurd::from_rational(f.cf.ratio())).collect();
    let increasing = ratios.windows(2).all(|w| w[0] < w[1]);
    let gap8 = (&limit - &ratios[7]).approximate(256).to_f64();
    let scaled: Vec<f64> = members[1..]
        .iter()
        .zip(&ratios[1..])
        .map(|(f, r)| {
            let alpha = QuadraticSurd::from_rational(BigRational::from_integer(f.cf.offsets()[0].a.clone()));
            (&(&limit - r) * &(&alpha * &alpha)).approximate(256).to_f64()
        })
        .collect();
    let hi = scaled.iter().cloned().fold(f64::MIN, f64::max);
    let lo = scaled.iter().cloned().fold(f64::MAX, f64::min);
    Verdict::new(
        increasing && gap8.abs() < 1e-6 && lo > 0.0 && hi / lo < 10.0,
        format!("increasing: {increasing}, limit - R4(8) = {gap8:.2e}, (limit - R4)*alpha1^2 in [{lo:.4}, {hi:.4}]"),
    )
}

fn three_factor() -> Verdict {
    let mut bad = Vec::new();
    for n in 2..=50 {
        let f = theorem0_family(n).unwrap();
        let pairs = f.cf.factor_pairs();
        let equal = pairs.len() == 3 && pairs.iter().all(|(x, y)| x * y == *f.cf.n());
        let c = BigRational::from_integer(f.cf.closeness().clone());
        let one = BigRational::from_integer(big(1));
        let bound = &c * (&c - &one) * (&c - &one) / BigRational::from_integer(big(4));
        if !(equal && BigRational::from_integer(f.cf.a().clone()) <= bound) {
            bad.push(n);
        }
    }
    Verdict::new(bad.is_empty(), format!("N = 2..=50, failures {bad:?}"))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Verdict); 8] = [
        ("flagship reproduction", Duration::from_secs(1), flagship),
        ("solvable-row census and ratios", Duration::from_secs(5), ratio_table),
        ("case table verdict fidelity", Duration::from_secs(30), verdict_fidelity),
        ("supremum and closure", Duration::from_secs(30), supremum),
        ("oracle cross-validation", Duration::from_secs(60), oracle),
        ("pell machinery", Duration::from_secs(30), pell_machinery),
        ("convergence of the optimal family", Duration::from_secs(30), convergence),
        ("three-factorization family", Duration::from_secs(30), three_factor),
    ];
    let mut failed = 0;
    for (i, (name, limit, check)) in criteria.into_iter().enumerate() {
        let v = timed(limit, check);
        if !v.pass {
            failed += 1;
        }
        println!("{} criterion {} ({name}): {}", if v.pass { "PASS" } else { "FAIL" }, i + 1, v.detail);
    }
    println!("{} of 8 criteria pass", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
