//! Acceptance gate. Runs every criterion, prints one PASS/FAIL line each,
//! and exits non-zero if any criterion fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use symx::determinants::{
    det_bareiss, det_cofactor, det_dodgson, verify_cofactor_symmetry,
    verify_dodgson_identity,
};
use symx::generators::{
    gen_paper_example, gen_symmetrizable_exact, gen_violation_exact, Corruption, GenSpec, Pattern,
};
use symx::matrix::exact_from_ints;
use symx::poly::{charpoly_coefficients, charpoly_real_roots, Poly};
use symx::spectra::{
    alternation_certificates, check_interlacing, eig_symmetric, eig_symmetrizable,
    interlacing_all_deletions, minor_sign_uniformity, minor_sum_identity, symmetrized,
    INTERLACING_TOL,
};
use symx::symmetrizability::{
    compute_symmetrizer, cycle_product_oracle, permutation_product_oracle, Verdict, ViolationKind,
};
use symx::{Matrix, Rational, Scalar};

type Outcome = Result<String, String>;
type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

fn random_rational(rng: &mut ChaCha8Rng, num: i64, den: i64) -> Rational {
    q(rng.random_range(-num..=num), rng.random_range(1..=den))
}

fn random_matrix(rng: &mut ChaCha8Rng, m: usize, num: i64, den: i64) -> Matrix<Rational> {
    Matrix::from_fn(m, |_, _| random_rational(rng, num, den))
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn corruption_for(i: usize) -> Corruption {
    [Corruption::SignFlip, Corruption::CycleBreak, Corruption::OneSidedZero][i % 3]
}

fn expected_kind(c: Corruption) -> ViolationKind {
    match c {
        Corruption::CycleBreak => ViolationKind::Cycle,
        _ => ViolationKind::Sign,
    }
}

fn criterion_1() -> Outcome {
    let mut agreed = 0;
    let mut rejected = 0;
    for i in 0..300usize {
        let m = 3 + i % 4;
        let seed = 1000 + i as u64;
        let spec = if i % 5 == 4 && m >= 4 {
            GenSpec::banded(m, 2, seed)
        } else {
            GenSpec::dense(m, seed)
        };
        let a = if i % 2 == 0 {
            gen_symmetrizable_exact(&spec).map_err(|e| e.to_string())?
        } else {
            gen_violation_exact(&spec, corruption_for(i / 2)).map_err(|e| e.to_string())?
        };
        let fast = compute_symmetrizer(&a).is_symmetrizable();
        let perm = permutation_product_oracle(&a).map_err(|e| e.to_string())?;
        let cycle = cycle_product_oracle(&a, m).map_err(|e| e.to_string())?.is_none();
        ensure(fast == perm && perm == cycle, || {
            format!("instance {i}: fast={fast} permutation={perm} cycle={cycle}")
        })?;
        if i % 2 == 1 {
            ensure(!fast, || format!("corrupted instance {i} accepted"))?;
            rejected += 1;
        }
        agreed += 1;
    }
    Ok(format!("{agreed}/300 agree, {rejected} corrupted rejected"))
}

fn criterion_2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let expected = vec![q(5, 1), q(5, 2), q(1, 1)];
    for i in 0..50 {
        let (a, b, c) = (
            random_rational(&mut rng, 20, 6),
            random_rational(&mut rng, 20, 6),
            random_rational(&mut rng, 20, 6),
        );
        let m = gen_paper_example(a, b, c);
        let Verdict::Symmetrizable(d) = compute_symmetrizer(&m) else {
            return Err(format!("draw {i} rejected"));
        };
        ensure(d.d == expected, || format!("draw {i}: d = {:?}", d.d))?;
        let da = d.apply(&m);
        let residual = (1..=3)
            .flat_map(|r| (1..=3).map(move |c| (r, c)))
            .map(|(r, c)| da.get(r, c) - da.get(c, r))
            .fold(Rational::zero(), |acc, x| if x.is_zero() { acc } else { x });
        ensure(residual.is_zero(), || format!("draw {i}: residual {residual}"))?;
    }
    Ok("50 draws, d = (5, 5/2, 1), residual 0".into())
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut pairs = 0;
    let mut worst_float = 0.0f64;
    for i in 0..200usize {
        let m = 3 + i % 6;
        let a = random_matrix(&mut rng, m, 9, 4);
        let af = a.to_f64();
        for k in 1..=m {
            for l in k + 1..=m {
                let r = verify_dodgson_identity(&a, k, l).map_err(|e| e.to_string())?;
                ensure(r.residual.is_zero(), || {
                    format!("matrix {i} ({k},{l}): residual {}", r.residual)
                })?;
                let rf = verify_dodgson_identity(&af, k, l).map_err(|e| e.to_string())?;
                ensure(rf.residual.abs() <= 1e-8 * rf.scale, || {
                    format!("matrix {i} ({k},{l}): float residual {} scale {}", rf.residual, rf.scale)
                })?;
                worst_float = worst_float.max(rf.residual.abs() / rf.scale.max(f64::MIN_POSITIVE));
                pairs += 1;
            }
        }
    }
    Ok(format!(
        "{pairs} pairs exact, worst float residual/scale {worst_float:.2e}"
    ))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut fallbacks = 0;
    for i in 0..1000usize {
        let m = 1 + i % 8;
        let a = if i % 2 == 0 {
            random_matrix(&mut rng, m, 2, 1)
        } else {
            random_matrix(&mut rng, m, 12, 5)
        };
        let (dodgson, trace) = det_dodgson(&a);
        let bareiss = det_bareiss(&a);
        let cofactor = det_cofactor(&a).map_err(|e| e.to_string())?;
        ensure(dodgson == bareiss && bareiss == cofactor, || {
            format!("matrix {i}: dodgson {dodgson} bareiss {bareiss} cofactor {cofactor}")
        })?;
        if trace.fallback_used {
            fallbacks += 1;
        }
    }
    ensure(fallbacks >= 50, || format!("only {fallbacks} fallback instances"))?;
    Ok(format!("1000 matrices agree, {fallbacks} used the fallback"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checks = 0;
    for i in 0..200usize {
        let m = 3 + i % 5;
        let a = gen_symmetrizable_exact(&GenSpec::dense(m, 5000 + i as u64))
            .map_err(|e| e.to_string())?;
        let mut lambdas: Vec<Rational> = Vec::new();
        while lambdas.len() < m - 1 {
            let l = random_rational(&mut rng, 30, 7);
            if !lambdas.contains(&l) {
                lambdas.push(l);
            }
        }
        for lambda in &lambdas {
            for k in 1..=m {
                for l in 1..=m {
                    if k == l {
                        continue;
                    }
                    let r = verify_cofactor_symmetry(&a, k, l, lambda).map_err(|e| e.to_string())?;
                    ensure(r.residual.is_zero(), || {
                        format!("matrix {i} k={k} l={l} λ={lambda}: residual {}", r.residual)
                    })?;
                    checks += 1;
                }
            }
        }
    }
    let p = gen_paper_example(q(0, 1), q(0, 1), q(0, 1));
    let r = verify_cofactor_symmetry(&p, 1, 2, &q(0, 1)).map_err(|e| e.to_string())?;
    ensure(r.lhs == q(60, 1) && r.rhs == q(60, 1), || {
        format!("worked example: {} vs {}", r.lhs, r.rhs)
    })?;
    Ok(format!("{checks} exact checks, worked example 60 = 60"))
}

/// The 500 symmetrizable instances shared by criteria 6 to 9.
fn float_instances() -> Vec<(Matrix<Rational>, Matrix<f64>)> {
    (0..500usize)
        .map(|i| {
            let m = 3 + i % 8;
            let seed = 6000 + i as u64;
            let spec = if i % 4 == 3 {
                GenSpec::banded(m, 1 + i % 2, seed)
            } else {
                GenSpec::dense(m, seed)
            };
            let exact = gen_symmetrizable_exact(&spec).expect("valid spec");
            let float = exact.to_f64();
            (exact, float)
        })
        .collect()
}

fn criterion_6(instances: &[(Matrix<Rational>, Matrix<f64>)]) -> Outcome {
    let mut worst_product = 0.0f64;
    let mut singular = 0;
    for (i, (exact, a)) in instances.iter().enumerate() {
        let m = a.order();
        let eig = eig_symmetrizable(a).map_err(|e| e.to_string())?;
        let values = &eig.spectrum.values;
        ensure(values.len() == m && values.iter().all(|v| v.is_finite()), || {
            format!("instance {i}: {values:?}")
        })?;
        let (_, t) = symmetrized(a).map_err(|e| e.to_string())?;
        let sym_residual = (1..=m)
            .flat_map(|r| (1..=m).map(move |c| (r, c)))
            .map(|(r, c)| (t.get(r, c) - t.get(c, r)).abs())
            .fold(0.0, f64::max);
        ensure(sym_residual <= 1e-9 * t.inf_norm(), || {
            format!("instance {i}: symmetry residual {sym_residual}")
        })?;
        let trace = a.trace();
        let scale = values.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
        ensure((eig.spectrum.sum() - trace).abs() <= 1e-8 * scale, || {
            format!("instance {i}: sum {} trace {trace}", eig.spectrum.sum())
        })?;
        let exact_det = det_bareiss(exact);
        let det = exact_det.to_f64();
        let prod = eig.spectrum.product();
        // Relative error is undefined at an exactly singular matrix; there the
        // product is measured against the determinant's natural scale.
        let reference = if exact_det.is_zero() {
            singular += 1;
            a.inf_norm().powi(m as i32)
        } else {
            det.abs()
        };
        let rel = (prod - det).abs() / reference;
        worst_product = worst_product.max(rel);
        ensure(rel <= 1e-6, || format!("instance {i}: product {prod} det {det}"))?;
    }
    let paper = gen_paper_example(q(0, 1), q(0, 1), q(0, 1));
    let oracle = charpoly_real_roots(&paper);
    ensure(oracle.all_real(), || "paper roots not all real".into())?;
    let eig = eig_symmetrizable(&paper).map_err(|e| e.to_string())?;
    for (x, y) in eig.spectrum.values.iter().zip(&oracle.roots) {
        ensure((x - y).abs() <= 1e-8, || format!("paper: {x} vs oracle {y}"))?;
    }
    Ok(format!(
        "500 real spectra ({singular} singular), worst product rel err {worst_product:.2e}, paper spectrum {:?}",
        eig.spectrum.values
    ))
}

fn criterion_7(instances: &[(Matrix<Rational>, Matrix<f64>)]) -> Outcome {
    let mut certs = 0;
    for (i, (_, a)) in instances.iter().enumerate() {
        for c in interlacing_all_deletions(a).map_err(|e| e.to_string())? {
            let expected_tol = INTERLACING_TOL * (c.parent.spread() + 1.0);
            ensure(c.pass && (c.tolerance - expected_tol).abs() <= f64::EPSILON * expected_tol, || {
                format!("instance {i} k={:?}: failures {:?}", c.k, c.failures())
            })?;
            certs += 1;
        }
    }
    let t = Matrix::from_rows(vec![
        vec![2.0, -1.0, 0.0],
        vec![-1.0, 2.0, -1.0],
        vec![0.0, -1.0, 2.0],
    ])
    .map_err(|e| e.to_string())?;
    let parent = eig_symmetric(&t, 1e-12, 50).map_err(|e| e.to_string())?.spectrum;
    let child = eig_symmetric(&t.principal_submatrix(&[3]).map_err(|e| e.to_string())?, 1e-12, 50)
        .map_err(|e| e.to_string())?
        .spectrum;
    let s = 2f64.sqrt();
    let close = |got: &[f64], want: &[f64]| got.iter().zip(want).all(|(x, y)| (x - y).abs() <= 1e-10);
    ensure(close(&parent.values, &[2.0 - s, 2.0, 2.0 + s]), || format!("parent {:?}", parent.values))?;
    ensure(close(&child.values, &[1.0, 3.0]), || format!("child {:?}", child.values))?;
    ensure(check_interlacing(&parent, &child, INTERLACING_TOL).is_ok_and(|c| c.pass), || "worked case".into())?;
    Ok(format!("{certs} certificates pass, worked case reproduced"))
}

/// `a + b√2` with rational parts.
#[derive(Clone, Debug, PartialEq)]
struct Surd {
    a: Rational,
    b: Rational,
}

impl Surd {
    fn mul(&self, o: &Surd) -> Surd {
        let two = q(2, 1);
        Surd {
            a: &self.a * &o.a + two * &self.b * &o.b,
            b: &self.a * &o.b + &self.b * &o.a,
        }
    }

    fn add(&self, o: &Surd) -> Surd {
        Surd { a: &self.a + &o.a, b: &self.b + &o.b }
    }

    fn rational(r: Rational) -> Surd {
        Surd { a: r, b: Rational::zero() }
    }
}

fn eval_surd(p: &Poly, x: &Surd) -> Surd {
    p.coeffs()
        .iter()
        .rev()
        .fold(Surd::rational(Rational::zero()), |acc, c| acc.mul(x).add(&Surd::rational(c.clone())))
}

fn criterion_8(instances: &[(Matrix<Rational>, Matrix<f64>)]) -> Outcome {
    let mut certified = 0;
    let mut skipped_instances = 0;
    for (i, (_, a)) in instances.iter().enumerate() {
        let spectrum = eig_symmetrizable(a).map_err(|e| e.to_string())?.spectrum;
        if spectrum.min_gap() <= 1e-6 * spectrum.spread() {
            skipped_instances += 1;
            continue;
        }
        for c in alternation_certificates(a, &spectrum).map_err(|e| e.to_string())? {
            ensure(c.pass, || format!("instance {i} k={}: signs {:?}", c.k, c.signs))?;
            certified += 1;
        }
    }
    let t = exact_from_ints(&[&[2, -1, 0], &[-1, 2, -1], &[0, -1, 2]]);
    let parent_poly = charpoly_coefficients(&t);
    let child_poly = charpoly_coefficients(&t.principal_submatrix(&[3]).map_err(|e| e.to_string())?);
    let lambdas = [
        Surd { a: q(2, 1), b: q(-1, 1) },
        Surd::rational(q(2, 1)),
        Surd { a: q(2, 1), b: q(1, 1) },
    ];
    let mut values = Vec::new();
    for lambda in &lambdas {
        ensure(eval_surd(&parent_poly, lambda) == Surd::rational(Rational::zero()), || {
            format!("{lambda:?} is not an exact eigenvalue")
        })?;
        let v = eval_surd(&child_poly, lambda);
        ensure(v.b.is_zero(), || format!("P_3({lambda:?}) = {v:?} is irrational"))?;
        values.push(v.a);
    }
    let want = [Rational::one(), -Rational::one(), Rational::one()];
    ensure(values == want, || format!("P_3 values {values:?}"))?;
    Ok(format!(
        "{certified} certificates pass ({skipped_instances} clustered instances excluded), P_3 = (1, -1, 1) exact"
    ))
}

fn criterion_9(instances: &[(Matrix<Rational>, Matrix<f64>)]) -> Outcome {
    let mut sign_checks = 0;
    let mut sum_checks = 0;
    for (i, (_, a)) in instances.iter().enumerate() {
        let spectrum = eig_symmetrizable(a).map_err(|e| e.to_string())?.spectrum;
        for (p, &lambda) in spectrum.values.iter().enumerate() {
            let r = minor_sign_uniformity(a, lambda).map_err(|e| e.to_string())?;
            ensure(r.uniform, || format!("instance {i} λ={lambda}: minors {:?}", r.minors))?;
            sign_checks += 1;
            if spectrum.multiplicity_at(p + 1) == 1 {
                let s = minor_sum_identity(a, &spectrum, p + 1).map_err(|e| e.to_string())?;
                ensure(s.pass && s.residual.abs() <= 1e-8 * s.scale, || {
                    format!("instance {i} p={}: residual {} scale {}", p + 1, s.residual, s.scale)
                })?;
                sum_checks += 1;
            }
        }
    }
    Ok(format!("{sign_checks} sign checks, {sum_checks} minor-sum checks"))
}

fn criterion_10() -> Outcome {
    let mut rejected = 0;
    for i in 0..300usize {
        let kind = corruption_for(i);
        let m = 3 + i % 6;
        let seed = 10_000 + i as u64;
        let spec = match i % 4 {
            0 if m >= 4 => GenSpec::banded(m, 2, seed),
            1 => GenSpec::banded(m, 1, seed),
            _ => GenSpec::dense(m, seed),
        };
        let a = match gen_violation_exact(&spec, kind) {
            Ok(a) => a,
            Err(symx::Error::PatternAcyclic) if kind == Corruption::CycleBreak => continue,
            Err(e) => return Err(format!("instance {i}: {e}")),
        };
        let got = compute_symmetrizer(&a).violation().map(|v| v.kind());
        ensure(got == Some(expected_kind(kind)), || {
            format!("instance {i}: {kind:?} produced {got:?}")
        })?;
        let af = a.to_f64();
        let got_f = compute_symmetrizer(&af).violation().map(|v| v.kind());
        ensure(got_f == Some(expected_kind(kind)), || {
            format!("instance {i} (float): {kind:?} produced {got_f:?}")
        })?;
        rejected += 1;
    }
    let paper_bad = Pattern::PaperExample { a: q(0, 1), b: q(0, 1), c: q(0, 1) };
    let a = gen_violation_exact(
        &GenSpec { pattern: paper_bad, ..GenSpec::dense(3, 7) },
        Corruption::CycleBreak,
    )
    .map_err(|e| e.to_string())?;
    ensure(!compute_symmetrizer(&a).is_symmetrizable(), || "paper corruption accepted".into())?;
    let bad = exact_from_ints(&[&[0, 1, 1], &[1, 0, 1], &[2, 1, 0]]);
    let r = verify_cofactor_symmetry(&bad, 1, 3, &q(0, 1)).map_err(|e| e.to_string())?;
    ensure(!r.residual.is_zero(), || "lemma residual vanished".into())?;
    Ok(format!("{rejected} corrupted matrices rejected with the right class, lemma residual {}", r.residual))
}

fn symx(args: &[&str]) -> (i32, serde_json::Value) {
    let out = Command::new(env!("CARGO_BIN_EXE_symx"))
        .args(args)
        .env_remove("SYMX_SEED")
        .output()
        .expect("binary runs");
    let report = serde_json::from_slice(&out.stdout).unwrap_or(serde_json::Value::Null);
    (out.status.code().unwrap_or(-1), report)
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = |name: &str| dir.path().join(name).display().to_string();
    for i in 0..100usize {
        let n = (2 + i % 7).to_string();
        let seed = (11_000 + i).to_string();
        let ext = if i % 2 == 0 { "mtx" } else { "csv" };
        let regime = if i % 3 == 0 { "float" } else { "exact" };
        let file = path(&format!("m{i}.{ext}"));
        let pattern = if i % 5 == 0 { "banded:1" } else { "dense" };
        let steps: [Vec<&str>; 3] = [
            vec!["gen", "--n", &n, "--pattern", pattern, "--seed", &seed, "--out", &file, "--regime", regime],
            vec!["check", &file, "--regime", regime],
            vec!["eig", &file, "--regime", regime, "--certify-interlacing", "--certify-alternation"],
        ];
        for step in &steps {
            let (code, report) = symx(step);
            ensure(code == 0 && report["pass"] == true, || {
                format!("spec {i}: {step:?} exited {code}: {report}")
            })?;
        }
    }

    let good = path("good.csv");
    std::fs::write(&good, "0,-3,1\n-6,0,4\n5,10,0\n").map_err(|e| e.to_string())?;
    let bad = path("bad.csv");
    std::fs::write(&bad, "0,1,1\n1,0,1\n2,1,0\n").map_err(|e| e.to_string())?;
    let malformed = path("malformed.csv");
    std::fs::write(&malformed, "1,2\n3,x\n").map_err(|e| e.to_string())?;
    let big = path("big.csv");
    let row = ["1"; 9].join(",");
    std::fs::write(&big, [row.as_str(); 9].join("\n")).map_err(|e| e.to_string())?;
    let missing = path("missing.csv");
    let out_of_band = path("x.csv");
    let cases: Vec<(Vec<&str>, i32)> = vec![
        (vec!["check", &good], 0),
        (vec!["eig", &good, "--certify-alternation"], 0),
        (vec!["verify", &good, "--identity", "lemma", "--trials", "20", "--seed", "3"], 0),
        (vec!["det", &good, "--method", "dodgson"], 0),
        (vec!["check", &bad], 1),
        (vec!["eig", &bad], 1),
        (vec!["verify", &bad, "--identity", "lemma", "--trials", "50", "--seed", "1"], 1),
        (vec!["check", &malformed], 2),
        (vec!["check", &missing], 2),
        (vec!["det", &big, "--method", "cofactor"], 2),
        (vec!["gen", "--n", "4", "--pattern", "banded:9", "--out", &out_of_band], 2),
        (vec!["check", &good, "--no-such-flag"], 2),
        (vec!["frobnicate"], 2),
    ];
    for (args, want) in &cases {
        let (code, _) = symx(args);
        ensure(code == *want, || format!("{args:?}: exit {code}, expected {want}"))?;
    }
    ensure(Path::new(&path("m0.mtx.json")).exists(), || "missing gen sidecar".into())?;
    Ok(format!("100 pipelines exit 0, {} exit-code cases", cases.len()))
}

fn main() {
    let started = Instant::now();
    let instances = float_instances();
    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 symmetrizability equivalence", Box::new(criterion_1)),
        ("2 paper example symmetrizer", Box::new(criterion_2)),
        ("3 condensation identity", Box::new(criterion_3)),
        ("4 determinant engine agreement", Box::new(criterion_4)),
        ("5 cofactor symmetry lemma", Box::new(criterion_5)),
        ("6 real spectra", Box::new(|| criterion_6(&instances))),
        ("7 interlacing", Box::new(|| criterion_7(&instances))),
        ("8 alternation", Box::new(|| criterion_8(&instances))),
        ("9 minor-sign uniformity", Box::new(|| criterion_9(&instances))),
        ("10 negative suite", Box::new(criterion_10)),
        ("11 cli end-to-end", Box::new(criterion_11)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".into()));
        let ms = t.elapsed().as_millis();
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({ms} ms): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} ({ms} ms): {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1} s",
        criteria.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
