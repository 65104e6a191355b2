//! Acceptance gate: one PASS/FAIL line per criterion. Exits non-zero if
//! any criterion fails. Tolerances are fixed here and must not be relaxed.

use std::process::Command;
use std::time::{Duration, Instant};

use ouroboros_core::catalog::{instantiate, list_entries, Kind, Params};
use ouroboros_core::deriv::{dual_eval, fd_partial, sample_unity, Method, UnitySweep};
use ouroboros_core::expr::{format, parse};
use ouroboros_core::finite::{
    count_idempotent, enumerate_idempotent, enumerate_idempotent_with, EnumerationMode,
    FiniteEndofunction,
};
use ouroboros_core::verifier::{check_iterated, check_membership, FailReason};
use ouroboros_core::{DomainBox, SamplePlan, ScalarFunction, Status, Target};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL_THEOREM: f64 = 1e-6;
const TOL_CROSS: f64 = 1e-4;
const MEMBERSHIP_ATOL: f64 = 1e-9;
const MEMBERSHIP_RTOL: f64 = 1e-9;
const POINTS: usize = 64;
const K_MAX_ITERATED: u32 = 64;
const BUDGET_THEOREM: Duration = Duration::from_secs(5);
const BUDGET_FINITE: Duration = Duration::from_secs(10);
const FUZZ_CASES: usize = 10_000;

struct Outcome {
    passed: bool,
    notes: Vec<String>,
}

impl Outcome {
    fn new() -> Outcome {
        Outcome {
            passed: true,
            notes: Vec::new(),
        }
    }

    fn fail(&mut self, note: String) {
        self.passed = false;
        self.notes.push(note);
    }

    fn require(&mut self, ok: bool, note: impl FnOnce() -> String) {
        if !ok {
            self.fail(note());
        }
    }
}

fn plan(samples: usize) -> SamplePlan {
    SamplePlan {
        sample_count: samples,
        ..SamplePlan::default()
    }
}

fn scalar(name: &str, params: Params) -> (ScalarFunction, DomainBox) {
    let inst = instantiate(name, &params).unwrap_or_else(|e| panic!("{name}: {e}"));
    let f = inst.scalar().expect("scalar entry").clone();
    (f, inst.domain)
}

fn n(k: usize) -> Params {
    Params::new().with("n", [k as f64])
}

fn criterion_1() -> Outcome {
    let mut out = Outcome::new();
    let started = Instant::now();
    for name in [
        "arith_mean",
        "geo_mean",
        "harmonic_mean",
        "power_mean",
        "median",
    ] {
        for arity in 2..=6 {
            let mut params = n(arity);
            if name == "power_mean" {
                params.set("p", [2.0]);
            }
            let (f, domain) = scalar(name, params);
            let sweep = match sample_unity(&f, &domain, &plan(POINTS), Method::Dual) {
                Ok(s) => s,
                Err(e) => {
                    out.fail(format!("{name} n={arity}: {e}"));
                    continue;
                }
            };
            let target = 1.0 / arity as f64;
            let good: Vec<_> = sweep.non_degenerate().collect();
            out.require(good.len() == POINTS, || {
                format!(
                    "{name} n={arity}: {} of {POINTS} points non-degenerate ({} skipped after kink retries)",
                    good.len(),
                    sweep.skipped.len()
                )
            });
            for s in good {
                let shares = s.report.shares.as_ref().expect("non-degenerate");
                let sum: f64 = shares.iter().sum();
                let worst = shares.iter().fold(0.0f64, |m, v| m.max((v - target).abs()));
                if (sum - 1.0).abs() > TOL_THEOREM || worst > TOL_THEOREM {
                    out.fail(format!(
                        "{name} n={arity} sample {}: sum {sum:e}, max |share - 1/n| {worst:e}",
                        s.sample_index
                    ));
                    break;
                }
            }
        }
    }
    let elapsed = started.elapsed();
    out.require(elapsed < BUDGET_THEOREM, || {
        format!("runtime {elapsed:?} >= {BUDGET_THEOREM:?}")
    });
    out.notes.push(format!("runtime {elapsed:.2?}"));
    out
}

fn criterion_2() -> Outcome {
    let mut out = Outcome::new();
    let uni = |name: &str, params: Params, lo: f64, hi: f64| {
        let (f, _) = scalar(name, params);
        (
            format!("{name} on [{lo}, {hi}]"),
            f,
            DomainBox::uniform(1, lo, hi).unwrap(),
        )
    };
    let c0 = || Params::new().with("c", [0.0]);
    let delta = SamplePlan::default().kink_margin;
    let unity_cases = [
        uni("abs", Params::new(), delta, 10.0),
        uni("abs", Params::new(), -10.0, 10.0),
        uni("identity", Params::new(), -10.0, 10.0),
        uni("clamp", Params::new(), 0.0, 1.0),
        uni("max_const", c0(), 0.0, 10.0),
        uni("min_const", c0(), -10.0, 0.0),
    ];
    for (label, f, domain) in &unity_cases {
        let sweep = sample_unity(f, domain, &plan(POINTS), Method::Dual).unwrap();
        let pass = sweep.sum_to_one.pass;
        out.require(pass == POINTS && sweep.sum_to_one.fail == 0, || {
            format!(
                "{label}: f'(f(x)) = 1 at {pass} of {POINTS} points (fail {}, degenerate {}, skipped {})",
                sweep.sum_to_one.fail,
                sweep.sum_to_one.degenerate,
                sweep.skipped.len()
            )
        });
        for s in &sweep.reports {
            let share = s.report.shares.as_ref().map(|v| v[0]);
            if let Some(share) = share.filter(|v| (v - 1.0).abs() > TOL_THEOREM) {
                out.fail(format!(
                    "{label}: f'(f(x)) = {share} at sample {}",
                    s.sample_index
                ));
                break;
            }
        }
    }
    let degenerate_cases = [
        uni("clamp", Params::new(), 1.5, 10.0),
        uni("clamp", Params::new(), -10.0, -0.5),
        uni("max_const", c0(), -10.0, -0.5),
        uni("min_const", c0(), 0.5, 10.0),
        uni("relu", Params::new(), -10.0, -0.5),
        uni("constant", Params::new(), -10.0, 10.0),
        uni("floor", Params::new(), -10.0, 10.0),
        uni("ceil", Params::new(), -10.0, 10.0),
    ];
    for (label, f, domain) in &degenerate_cases {
        let sweep = sample_unity(f, domain, &plan(POINTS), Method::Dual).unwrap();
        out.require(
            sweep.sum_to_one.fail == 0 && sweep.equal_shares.fail == 0,
            || format!("{label}: saturated case reported FAIL"),
        );
        out.require(
            sweep.sum_to_one.degenerate + sweep.skipped.len() == POINTS,
            || {
                format!(
                    "{label}: expected DEGENERATE everywhere, got {:?}",
                    sweep.sum_to_one
                )
            },
        );
    }
    out
}

fn criterion_3() -> Outcome {
    let mut out = Outcome::new();
    for w in [vec![0.3, 0.7], vec![0.1, 0.2, 0.7]] {
        let (f, domain) = scalar("weighted_mean", Params::new().with("w", w.clone()));
        let sweep = sample_unity(&f, &domain, &plan(POINTS), Method::Dual).unwrap();
        out.require(sweep.reports.len() == POINTS, || {
            format!("w={w:?}: {} points", sweep.reports.len())
        });
        out.require(sweep.sum_to_one.pass == POINTS, || {
            format!(
                "w={w:?}: sum-to-one passed at {} of {POINTS}",
                sweep.sum_to_one.pass
            )
        });
        out.require(sweep.equal_shares.fail == POINTS, || {
            format!(
                "w={w:?}: equal-shares failed at {} of {POINTS}",
                sweep.equal_shares.fail
            )
        });
        for s in &sweep.reports {
            let shares = s.report.shares.as_ref().unwrap();
            let sum: f64 = shares.iter().sum();
            out.require((sum - 1.0).abs() <= TOL_THEOREM, || {
                format!("w={w:?}: sum {sum}")
            });
            let matches_weights = shares
                .iter()
                .zip(&w)
                .all(|(s, wi)| (s - wi).abs() <= TOL_THEOREM);
            out.require(matches_weights, || format!("w={w:?}: shares {shares:?}"));
        }
        out.require(
            UnitySweep::claim_status(&sweep.equal_shares) == Status::Fail,
            || format!("w={w:?}: equal-shares status"),
        );
    }
    out
}

fn catalog_instances() -> Vec<(String, Params)> {
    let mut out = Vec::new();
    for e in list_entries() {
        let variants: Vec<Params> = match (e.kind, e.name) {
            (_, "weighted_mean") => vec![
                Params::new().with("w", [0.3, 0.7]),
                Params::new().with("w", [0.1, 0.2, 0.7]),
            ],
            (Kind::ScalarUnivariate, _) => vec![Params::new()],
            (Kind::ScalarMultivariate, _) => (2..=6).map(n).collect(),
            (Kind::VectorOperator, _) => (1..=5).map(n).collect(),
        };
        out.extend(variants.into_iter().map(|p| (e.name.to_string(), p)));
    }
    out
}

fn criterion_4() -> Outcome {
    let mut out = Outcome::new();
    let plan = SamplePlan {
        atol: MEMBERSHIP_ATOL,
        rtol: MEMBERSHIP_RTOL,
        k_max: K_MAX_ITERATED,
        ..SamplePlan::default()
    };
    let mut checked = 0;
    for (name, params) in catalog_instances() {
        let inst = instantiate(&name, &params).unwrap();
        let (member, iterated) = match &inst.target {
            Target::Scalar(f) => (
                check_membership(f, &inst.domain, &plan).unwrap(),
                check_iterated(f, &inst.domain, &plan).unwrap(),
            ),
            Target::Operator(op) => (
                ouroboros_core::verifier::check_operator_idempotence(op, &inst.domain, &plan)
                    .unwrap(),
                ouroboros_core::verifier::check_operator_iterated(op, &inst.domain, &plan).unwrap(),
            ),
        };
        checked += 1;
        out.require(member.passed(), || {
            format!("{name} {params:?}: membership {:?}", member.status)
        });
        out.require(iterated.passed(), || {
            format!("{name} {params:?}: iterated {:?}", iterated.status)
        });
        if inst.entry.flags.exact_fixed_points {
            out.require(iterated.max_residual == 0.0, || {
                format!(
                    "{name} {params:?}: drift {:e} but flagged exact",
                    iterated.max_residual
                )
            });
        }
    }
    out.notes.push(format!("{checked} instances"));
    out
}

fn all_maps(m: usize) -> Vec<Vec<usize>> {
    (0..m.pow(m as u32))
        .map(|mut code| {
            let mut t = vec![0; m];
            for slot in t.iter_mut().rev() {
                *slot = code % m;
                code /= m;
            }
            t
        })
        .collect()
}

fn criterion_5() -> Outcome {
    let mut out = Outcome::new();
    let started = Instant::now();
    let pinned = [1u64, 3, 10, 41, 196];
    for (m, &expected) in (1..=5).zip(&pinned) {
        let brute = all_maps(m)
            .iter()
            .filter(|t| (0..m).all(|x| t[t[x]] == t[x]))
            .count() as u64;
        out.require(brute == expected, || format!("oracle m={m}: {brute}"));
        let listed = enumerate_idempotent(m).unwrap().len() as u64;
        out.require(listed == expected, || {
            format!("enumeration m={m}: {listed}")
        });
    }
    for m in 1..=7 {
        let brute = enumerate_idempotent_with(m, EnumerationMode::BruteForce).unwrap();
        let built = enumerate_idempotent_with(m, EnumerationMode::Constructive).unwrap();
        out.require(brute == built, || format!("modes differ at m={m}"));
        let closed = count_idempotent(m).unwrap();
        out.require(closed == brute.len() as u64, || {
            format!("closed form m={m}: {closed} vs {}", brute.len())
        });
    }
    for m in 1..=5 {
        for t in all_maps(m) {
            let f = FiniteEndofunction::new(t.clone()).unwrap();
            if f.image_fixing_holds() != f.is_idempotent() {
                out.fail(format!("characterization disagrees on {t:?}"));
            }
        }
    }
    let elapsed = started.elapsed();
    out.require(elapsed < BUDGET_FINITE, || {
        format!("runtime {elapsed:?} >= {BUDGET_FINITE:?}")
    });
    out.notes.push(format!("runtime {elapsed:.2?}"));
    out
}

fn criterion_6() -> Outcome {
    let mut out = Outcome::new();
    let margin = SamplePlan::default().kink_margin;
    let mut compared = 0usize;
    for (name, params) in catalog_instances() {
        let inst = instantiate(&name, &params).unwrap();
        if !inst.entry.flags.smooth {
            continue;
        }
        let f = inst.scalar().expect("smooth entries are scalar");
        let p = plan(POINTS);
        for index in 0..POINTS as u64 {
            let interior = (0..=16)
                .map(|attempt| p.sample_point(&inst.domain, index, attempt))
                .find(|x| {
                    (0..f.arity())
                        .all(|i| dual_eval(f, x, i, margin).is_ok_and(|d| d.kink.is_none()))
                });
            let Some(x) = interior else {
                out.fail(format!(
                    "{name} {params:?}: no non-kink point for sample {index}"
                ));
                continue;
            };
            for i in 0..f.arity() {
                let dual = dual_eval(f, &x, i, margin).unwrap().partial;
                let fd = fd_partial(f, &x, i, None).unwrap();
                compared += 1;
                if (dual - fd).abs() > TOL_CROSS {
                    out.fail(format!(
                        "{name} {params:?} at {x:?}, i={i}: dual {dual} vs fd {fd}"
                    ));
                }
            }
        }
    }
    out.notes.push(format!("{compared} partials compared"));
    out
}

fn criterion_7() -> Outcome {
    let mut out = Outcome::new();
    for (src, dim) in [("x+1", 1), ("x/2", 1), ("x^2", 1), ("x1*x2", 2)] {
        let f = ScalarFunction::parse(src).unwrap();
        let domain = DomainBox::uniform(dim, -10.0, 10.0).unwrap();
        let v = check_membership(&f, &domain, &SamplePlan::default()).unwrap();
        if v.status != Status::Fail {
            out.fail(format!("{src}: {:?}", v.status));
            continue;
        }
        let Some(w) = v.witness else {
            out.fail(format!("{src}: FAIL without witness"));
            continue;
        };
        // standalone re-evaluation from the reported point only
        let fx = f.eval(&w.point).unwrap();
        let tol = MEMBERSHIP_ATOL + MEMBERSHIP_RTOL * fx.abs();
        let reproduced = match v.reason {
            Some(FailReason::NotIdempotent) => {
                let ffx = f.eval(&vec![fx; dim]).unwrap();
                ffx - fx == w.residual && (ffx - fx).abs() > tol
            }
            Some(FailReason::RangeEscape) => {
                let outside = (-10.0 - fx).max(fx - 10.0);
                outside == w.residual && outside > tol
            }
            _ => false,
        };
        out.require(reproduced, || {
            format!("{src}: witness {w:?} does not reproduce")
        });
        out.notes.push(format!(
            "{src}: {:?} residual {:e}",
            v.reason.unwrap(),
            w.residual
        ));
    }
    out
}

fn ouro(args: &[&str]) -> (i32, Vec<u8>) {
    let output = Command::new(env!("CARGO_BIN_EXE_ouro"))
        .args(args)
        .output()
        .expect("run ouro");
    (output.status.code().unwrap_or(-1), output.stdout)
}

fn criterion_8() -> Outcome {
    let mut out = Outcome::new();
    let runs: [&[&str]; 5] = [
        &[
            "check",
            "--catalog",
            "geo_mean",
            "--n",
            "3",
            "--seed",
            "42",
            "--format",
            "json",
        ],
        &[
            "check", "--expr", "x1*x2", "--seed", "7", "--format", "json",
        ],
        &[
            "check",
            "--catalog",
            "simplex_projection",
            "--n",
            "4",
            "--seed",
            "3",
            "--format",
            "json",
        ],
        &[
            "derive",
            "--catalog",
            "power_mean",
            "--n",
            "4",
            "--seed",
            "9",
            "--format",
            "json",
        ],
        &[
            "derive",
            "--catalog",
            "weighted_mean",
            "--w",
            "0.3,0.7",
            "--point",
            "1,2",
            "--format",
            "json",
        ],
    ];
    for args in runs {
        let (code_a, a) = ouro(args);
        let (code_b, b) = ouro(args);
        out.require(code_a == code_b && a == b, || {
            format!("`ouro {}` differs between runs", args.join(" "))
        });
        let parsed: Result<serde_json::Value, _> = serde_json::from_slice(&a);
        out.require(parsed.is_ok_and(|v| v["schema_version"] == 1), || {
            format!("`ouro {}` is not a versioned JSON report", args.join(" "))
        });
    }
    out
}

const FUZZ_ALPHABET: &[u8] = b"xyz12_ 0.5e+-*/^(),\tabsminclampsqrtlnfloor";

fn grammar_string(rng: &mut ChaCha8Rng, depth: u32) -> String {
    if depth == 0 || rng.random_bool(0.3) {
        return match rng.random_range(0..4) {
            0 => "x".into(),
            1 => format!("x{}", rng.random_range(1..4)),
            2 => format!("{}", rng.random_range(0..100)),
            _ => format!("{}e-{}", rng.random_range(1..9), rng.random_range(1..20)),
        };
    }
    let a = grammar_string(rng, depth - 1);
    let b = grammar_string(rng, depth - 1);
    match rng.random_range(0..9) {
        0 => format!("{a}+{b}"),
        1 => format!("{a} - {b}"),
        2 => format!("({a})*{b}"),
        3 => format!("{a}/({b})"),
        4 => format!("{a}^{b}"),
        5 => format!("-{a}"),
        6 => format!("max({a},{b})"),
        7 => format!("clamp({a}, {b}, 1)"),
        _ => format!("sqrt(({a}))"),
    }
}

fn mutate(rng: &mut ChaCha8Rng, s: &str) -> String {
    let mut bytes = s.as_bytes().to_vec();
    for _ in 0..rng.random_range(1..4) {
        let pos = rng.random_range(0..=bytes.len());
        match rng.random_range(0..3) {
            0 if pos < bytes.len() => {
                bytes.remove(pos);
            }
            1 if pos < bytes.len() => {
                bytes[pos] = FUZZ_ALPHABET[rng.random_range(0..FUZZ_ALPHABET.len())]
            }
            _ => bytes.insert(pos, FUZZ_ALPHABET[rng.random_range(0..FUZZ_ALPHABET.len())]),
        }
    }
    String::from_utf8_lossy(&bytes).into_owned()
}

fn fuzz_case(rng: &mut ChaCha8Rng, i: usize) -> String {
    match i % 4 {
        0 => grammar_string(rng, 5),
        1 => {
            let base = grammar_string(rng, 4);
            mutate(rng, &base)
        }
        2 => (0..rng.random_range(0..40))
            .map(|_| FUZZ_ALPHABET[rng.random_range(0..FUZZ_ALPHABET.len())] as char)
            .collect(),
        _ => (0..rng.random_range(0..24))
            .map(|_| rng.random::<char>())
            .collect(),
    }
}

/// Round trip and format idempotence for one source string. `None` when
/// the string does not parse.
fn round_trip(src: &str) -> Option<Result<(), String>> {
    let ast = parse(src).ok()?;
    let text = format(&ast);
    Some(match parse(&text) {
        Ok(back) if back == ast && format(&back) == text => Ok(()),
        Ok(_) => Err(format!("{src:?} -> {text:?} changes the tree or the text")),
        Err(e) => Err(format!("{src:?} -> {text:?} does not reparse: {e}")),
    })
}

fn criterion_9() -> Outcome {
    let mut out = Outcome::new();
    let corpus: Vec<&str> = include_str!("../../core/tests/data/expr_corpus.txt")
        .lines()
        .filter(|l| !l.trim().is_empty())
        .collect();
    out.require(corpus.len() == 200, || {
        format!("corpus has {} cases", corpus.len())
    });
    for src in &corpus {
        match round_trip(src) {
            Some(Ok(())) => {}
            Some(Err(e)) => out.fail(e),
            None => out.fail(format!("corpus case {src:?} does not parse")),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut parsed = 0;
    let quiet = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    for i in 0..FUZZ_CASES {
        let src = fuzz_case(&mut rng, i);
        match std::panic::catch_unwind(|| round_trip(&src)) {
            Err(_) => out.fail(format!("panic on {src:?}")),
            Ok(Some(Err(e))) => out.fail(e),
            Ok(Some(Ok(()))) => parsed += 1,
            Ok(None) => {}
        }
    }
    std::panic::set_hook(quiet);
    out.notes
        .push(format!("{parsed} of {FUZZ_CASES} fuzz inputs parsed"));
    out
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 9] = [
        ("theorem reproduction, symmetric case", criterion_1),
        ("univariate result", criterion_2),
        ("sum without symmetry", criterion_3),
        ("membership and iteration", criterion_4),
        ("finite-domain oracle equivalence", criterion_5),
        ("differentiation cross-validation", criterion_6),
        ("negative controls", criterion_7),
        ("determinism", criterion_8),
        ("parser properties", criterion_9),
    ];
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let outcome = run();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("criterion {} ({title}): {status}", i + 1);
        const SHOWN: usize = 12;
        for note in outcome.notes.iter().take(SHOWN) {
            println!("    {note}");
        }
        if outcome.notes.len() > SHOWN {
            println!("    ... {} more", outcome.notes.len() - SHOWN);
        }
        failed += usize::from(!outcome.passed);
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
