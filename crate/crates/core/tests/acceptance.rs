//! Acceptance suite. Runs every criterion once and prints one PASS/FAIL line
//! per criterion; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use threecubes::driver::{plan_run, run, verify_text, RunPlan, RunStatus, SearchConfig};
use threecubes::geometry::{
    curve_d2y, curve_dy, curve_y, ratio_to_f64, CoveringPlan, Fix, Flagstone, StripParams,
};
use threecubes::lattice::reduce::{is_unimodular, lovasz_holds_exact, GUARANTEED_DELTA};
use threecubes::lattice::{build_frame, reduce_basis, search_flagstone, search_range, LinearFormFrame};
use threecubes::oracle::{brute_force, OracleResult};
use threecubes::parametric::{param_k1, param_k2, scale_solution};
use threecubes::report::density_report;
use threecubes::{mod9_admissible, verify_solution, Solution, TargetSet, I256};

const LARGE_SOLUTIONS: &str = include_str!("data/large_solutions.txt");

type Outcome = Result<String, String>;

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

/// Engine and oracle output for B = 10⁴, k_max = 1000, shared by several
/// criteria.
struct Central {
    plan: RunPlan,
    engine: Vec<Solution>,
    oracle: OracleResult,
}

fn central_config() -> SearchConfig {
    let mut cfg = SearchConfig::new(1, 10_000, TargetSet::up_to(1000).unwrap());
    cfg.margin = 2.0;
    cfg
}

fn criterion_1() -> Outcome {
    let t = Instant::now();
    let report = verify_text(LARGE_SOLUTIONS);
    check(report.checked == 14, format!("expected 14 solutions, read {}", report.checked))?;
    check(report.passed(), format!("failures: {:?}", report.failures))?;
    let elapsed = t.elapsed();
    check(elapsed.as_secs_f64() < 1.0, format!("took {elapsed:?}"))?;
    Ok(format!("14/14 verified exactly in {elapsed:?}"))
}

fn criterion_2(central: &mut Option<Central>) -> Outcome {
    let cfg = central_config();
    let t = Instant::now();
    let plan = plan_run(&cfg).map_err(|e| e.to_string())?;
    let outcome = run(&cfg).map_err(|e| e.to_string())?;
    let engine_time = t.elapsed();
    let RunStatus::Complete(engine) = outcome.status else {
        return Err("run did not complete".into());
    };
    let t = Instant::now();
    let oracle = brute_force(10_000, 1000).map_err(|e| e.to_string())?;
    let oracle_time = t.elapsed();
    let missing = oracle.solutions.iter().filter(|s| engine.binary_search(s).is_err()).count();
    let extra = engine.iter().filter(|s| oracle.solutions.binary_search(s).is_err()).count();
    let detail = format!(
        "engine {} solutions ({} units, {engine_time:?}), oracle {} ({oracle_time:?}), missing {missing}, extra {extra}",
        engine.len(),
        outcome.units_total,
        oracle.solutions.len()
    );
    let equal = engine == oracle.solutions;
    *central = Some(Central { plan, engine, oracle });
    check(equal, detail.clone())?;
    Ok(detail)
}

fn criterion_3() -> Outcome {
    let expected = Solution::new(-284650292555885, 66229832190556, 283450105697727, 74i64);
    let x = Fix::from_ratio_floor(&BigInt::from(66229832190556i64), &BigInt::from(284650292555885i64));
    let hw = Fix::from_f64_floor(1e-14);
    let (c_lo, c_hi) = (200_000_000_000_000u64, 300_000_000_000_000u64);
    let params = StripParams {
        k_max: 100,
        b_lo: c_lo,
        margin: 2.0,
    };
    let f = Flagstone::build(&x - &hw, &x + &hw, &params).map_err(|e| e.to_string())?;
    let plan = CoveringPlan::from_flagstones(vec![f], c_lo, c_hi, 100, 2.0).map_err(|e| e.to_string())?;
    let targets = TargetSet::up_to(100).unwrap();
    let t = Instant::now();
    let found = search_range(&plan, &targets).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed();
    let inspected = search_flagstone(&plan, 0, c_lo, c_hi, &targets)
        .map_err(|e| e.to_string())?
        .inspected;
    check(
        found.contains(&expected),
        format!("k=74 solution not found; got {found:?}"),
    )?;
    check(found.iter().all(verify_solution), "unverified output")?;
    Ok(format!(
        "found {expected} among {} solution(s), {inspected} lattice points, {elapsed:?}",
        found.len()
    ))
}

fn criterion_4(central: &Central) -> Outcome {
    let small = brute_force(1000, 1000).map_err(|e| e.to_string())?;
    let bad: Vec<&Solution> = central
        .engine
        .iter()
        .chain(&small.solutions)
        .filter(|s| matches!(s.k.rem_euclid_u64(9), 4 | 5))
        .collect();
    check(bad.is_empty(), format!("k ≡ ±4 (mod 9) in output: {bad:?}"))?;
    let mut disagreements = Vec::new();
    for k in -10_000i64..=10_000 {
        let direct = k != 0 && !matches!(k.rem_euclid(9), 4 | 5);
        if mod9_admissible(k) != direct {
            disagreements.push(k);
        }
    }
    check(disagreements.is_empty(), format!("mod9_admissible disagrees at {disagreements:?}"))?;
    Ok(format!(
        "{} + {} solutions all admissible; residue test agrees on 20001 values",
        central.engine.len(),
        small.solutions.len()
    ))
}

fn criterion_5() -> Outcome {
    let one = I256::from(1i64);
    let two = I256::from(2i64);
    let mut checked = 0u64;
    for t in -1000i64..=1000 {
        let k1 = param_k1(t).map_err(|e| e.to_string())?;
        let k2 = param_k2(t).map_err(|e| e.to_string())?;
        let s1 = threecubes::arith::cube_sum_raw(k1).map_err(|e| e.to_string())?;
        let s2 = threecubes::arith::cube_sum_raw(k2).map_err(|e| e.to_string())?;
        check(s1 == one, format!("param_k1({t}) sums to {s1}"))?;
        check(s2 == two, format!("param_k2({t}) sums to {s2}"))?;
        for s in 1..=100u64 {
            let s3 = I256::from(s.pow(3));
            let a = threecubes::arith::cube_sum_raw(scale_solution(k1, s).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let b = threecubes::arith::cube_sum_raw(scale_solution(k2, s).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            check(a == s3, format!("scaled k1 t={t} s={s} sums to {a}"))?;
            check(b == s3 * two, format!("scaled k2 t={t} s={s} sums to {b}"))?;
            checked += 2;
        }
    }
    Ok(format!("4002 family members and {checked} scaled members exact"))
}

fn criterion_6(central: &Central) -> Outcome {
    let mut worst1: f64 = 0.0;
    let mut worst2: f64 = 0.0;
    for i in 0..100 {
        let x = 0.01 + 0.77 * i as f64 / 99.0;
        let h1 = 1e-5;
        let fd1 = (curve_y(x + h1).unwrap() - curve_y(x - h1).unwrap()) / (2.0 * h1);
        worst1 = worst1.max((fd1 - curve_dy(x).unwrap()).abs());
        let h2 = 1e-4;
        let fd2 = (curve_dy(x + h2).unwrap() - curve_dy(x - h2).unwrap()) / (2.0 * h2);
        worst2 = worst2.max((fd2 - curve_d2y(x).unwrap()).abs());
    }
    check(worst1 <= 1e-6, format!("first-order deviation {worst1:e}"))?;
    check(worst2 <= 1e-4, format!("second-order deviation {worst2:e}"))?;

    let coverings = &central.plan.coverings;
    let tiles: usize = coverings.iter().map(|c| c.len()).sum();
    let failures: Vec<String> = coverings
        .iter()
        .enumerate()
        .flat_map(|(r, c)| c.flagstones().iter().enumerate().map(move |(t, f)| (r, t, f)))
        .collect::<Vec<_>>()
        .par_iter()
        .filter_map(|&(r, t, f)| {
            f.check_containment(1000)
                .err()
                .map(|x| format!("sub-range {r} flagstone {t} at X = {}", x.to_f64()))
        })
        .collect();
    check(failures.is_empty(), format!("containment failures: {:?}", &failures[..failures.len().min(5)]))?;
    Ok(format!(
        "max |Δ| {worst1:.1e} (first), {worst2:.1e} (second); {tiles} flagstones in {} coverings contain 1000 samples each",
        coverings.len()
    ))
}

fn det3(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Unimodularity, determinant preservation by the floating basis, and the
/// exact Lovász condition.
fn check_reduction(frame: &LinearFormFrame) -> Result<(), String> {
    let rb = reduce_basis(frame).map_err(|e| e.to_string())?;
    check(is_unimodular(&rb.u), format!("U = {:?} not unimodular", rb.u))?;
    let d = frame.det();
    let exact = ratio_to_f64(d.numer(), d.denom()).abs();
    let reduced = det3(&rb.vectors).abs();
    let rel = (reduced - exact).abs() / exact;
    check(rel <= 1e-9, format!("determinant drift {rel:e}"))?;
    check(
        lovasz_holds_exact(frame.matrix(), &rb.u, GUARANTEED_DELTA),
        "Lovász condition fails",
    )
}

fn criterion_7(central: &Central) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut random = Vec::new();
    for i in 0..100 {
        let b_lo = 10f64.powf(rng.gen_range(2.0..15.0)) as u64;
        let k_max = rng.gen_range(1..=1000u64);
        let x0 = rng.gen_range(0.0..0.79);
        let w = 10f64.powf(rng.gen_range(-12.0..-3.0));
        let params = StripParams {
            k_max,
            b_lo,
            margin: 2.0,
        };
        let f = Flagstone::build(Fix::from_f64_floor(x0), Fix::from_f64_floor(x0 + w), &params)
            .map_err(|e| e.to_string())?;
        random.push((i, f, b_lo, 2 * b_lo - 1));
    }
    let random_failures: Vec<String> = random
        .par_iter()
        .filter_map(|(i, f, lo, hi)| {
            build_frame(f, *i, *lo, *hi)
                .map_err(|e| e.to_string())
                .and_then(|fr| check_reduction(&fr))
                .err()
                .map(|e| format!("random frame {i}: {e}"))
        })
        .collect();
    check(random_failures.is_empty(), format!("{:?}", &random_failures[..random_failures.len().min(5)]))?;

    let plan = &central.plan;
    let units: Vec<(usize, usize)> = plan
        .coverings
        .iter()
        .enumerate()
        .flat_map(|(r, c)| (0..c.len()).map(move |t| (r, t)))
        .collect();
    let failures: Vec<String> = units
        .par_iter()
        .filter_map(|&(r, t)| {
            let range = plan.ranges[r];
            build_frame(&plan.coverings[r].flagstones()[t], t, range.lo, range.hi)
                .map_err(|e| e.to_string())
                .and_then(|fr| check_reduction(&fr))
                .err()
                .map(|e| format!("sub-range {r} flagstone {t}: {e}"))
        })
        .collect();
    check(failures.is_empty(), format!("{:?}", &failures[..failures.len().min(5)]))?;
    Ok(format!("100 random frames and {} run frames reduced correctly", units.len()))
}

fn resume_run(dir: &Path, name: &str, steps: &[(usize, Option<usize>)]) -> Result<Vec<u8>, String> {
    let out = dir.join(format!("{name}.txt"));
    let ckpt = dir.join(format!("{name}.ckpt"));
    for (n, &(workers, max_units)) in steps.iter().enumerate() {
        let mut cfg = resume_config();
        cfg.workers = workers;
        cfg.max_units = max_units;
        cfg.checkpoint = Some(ckpt.clone());
        cfg.output = Some(out.clone());
        let outcome = run(&cfg).map_err(|e| e.to_string())?;
        let last = n + 1 == steps.len();
        match (&outcome.status, last) {
            (RunStatus::Complete(_), true) | (RunStatus::Interrupted { .. }, false) => {}
            (s, _) => return Err(format!("{name} step {n}: unexpected status {s:?}")),
        }
        if !last {
            check(!out.exists(), format!("{name}: output written before completion"))?;
            if n == 0 {
                // a torn append from a killed process
                let mut text = fs::read_to_string(&ckpt).map_err(|e| e.to_string())?;
                text.push_str("done tile 0 ");
                fs::write(&ckpt, text).map_err(|e| e.to_string())?;
            }
        }
    }
    fs::read(&out).map_err(|e| e.to_string())
}

fn resume_config() -> SearchConfig {
    SearchConfig::new(1, 3000, TargetSet::up_to(500).unwrap())
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let units = plan_run(&resume_config()).map_err(|e| e.to_string())?.units().len();
    let third = Some(units / 3);

    let mut reference = Vec::new();
    for workers in [1, 4] {
        let out = dir.path().join(format!("straight{workers}.txt"));
        let mut cfg = resume_config();
        cfg.workers = workers;
        cfg.output = Some(out.clone());
        run(&cfg).map_err(|e| e.to_string())?;
        reference.push(fs::read(&out).map_err(|e| e.to_string())?);
    }
    check(reference[0] == reference[1], "uninterrupted outputs differ between 1 and 4 workers")?;

    let a = resume_run(dir.path(), "a", &[(1, third), (4, third), (1, None)])?;
    let b = resume_run(dir.path(), "b", &[(4, third), (1, None)])?;
    let c = resume_run(dir.path(), "c", &[(4, Some(1)), (4, None)])?;
    for (name, bytes) in [("a", &a), ("b", &b), ("c", &c)] {
        check(*bytes == reference[0], format!("resumed run {name} differs from the uninterrupted output"))?;
    }
    check(!reference[0].is_empty(), "empty output")?;
    Ok(format!(
        "{units} units; 3 interrupted/resumed runs across workers {{1, 4}} match byte for byte ({} bytes)",
        reference[0].len()
    ))
}

fn criterion_9(central: &Central) -> Outcome {
    let engine = density_report(&central.engine, 1000);
    let oracle = density_report(&central.oracle.solutions, 1000);
    for (name, r) in [("engine", &engine), ("oracle", &oracle)] {
        let cum = r.cumulative();
        check(
            cum.windows(2).all(|w| w[0].1 <= w[1].1 && w[0].0 < w[1].0),
            format!("{name} cumulative counts not monotone: {cum:?}"),
        )?;
        check(
            cum.last().map(|c| c.1) == Some(r.total),
            format!("{name} cumulative total mismatch"),
        )?;
    }
    let get = |m: &BTreeMap<u32, u64>, d| m.get(&d).copied().unwrap_or(0);
    for d in [2, 3] {
        check(
            get(&engine.decade_counts, d) == get(&oracle.decade_counts, d),
            format!(
                "decade {d}: engine {} vs oracle {}",
                get(&engine.decade_counts, d),
                get(&oracle.decade_counts, d)
            ),
        )?;
    }
    let per_decade: Vec<String> = oracle
        .decade_counts
        .iter()
        .map(|(d, n)| format!("10^{d}:{n}/{}", get(&oracle.sporadic_decade_counts, *d)))
        .collect();
    Ok(format!(
        "decade 2 = {}, decade 3 = {} in both; all/sporadic per decade {}; context only: ~1000 per decade is expected near 10^15, not at this scale",
        get(&oracle.decade_counts, 2),
        get(&oracle.decade_counts, 3),
        per_decade.join(" ")
    ))
}

fn main() -> ExitCode {
    panic::set_hook(Box::new(|_| {}));

    let mut central = None;
    let mut results: Vec<(u32, &str, Outcome, f64)> = Vec::new();
    let mut record = |id: u32, name: &'static str, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = t.elapsed().as_secs_f64();
        let line = match &outcome {
            Ok(d) => format!("PASS criterion {id} ({name}, {secs:.2}s): {d}"),
            Err(e) => format!("FAIL criterion {id} ({name}, {secs:.2}s): {e}"),
        };
        println!("{line}");
        results.push((id, name, outcome, secs));
    };

    record(1, "large-solution verification", &mut criterion_1);
    record(2, "oracle equivalence", &mut || criterion_2(&mut central));
    record(3, "targeted k=74 rediscovery", &mut criterion_3);
    let need = || -> Result<&Central, String> { central.as_ref().ok_or_else(|| "criterion 2 produced no run".into()) };
    let c = need();
    record(4, "mod-9 soundness", &mut || criterion_4(c.clone()?));
    record(5, "parametric identities", &mut criterion_5);
    record(6, "geometry", &mut || criterion_6(c.clone()?));
    record(7, "reduction properties", &mut || criterion_7(c.clone()?));
    record(8, "determinism and resume", &mut criterion_8);
    record(9, "density report", &mut || criterion_9(c.clone()?));

    let failed = results.iter().filter(|r| r.2.is_err()).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
