//! Acceptance suite. Runs every criterion, prints one line each, and exits
//! nonzero if any fails.

use std::f64::consts::PI;
use std::time::Instant;

use enflo_core::harness::suites::{random_vectors, trial_rng};
use enflo_core::harness::{
    run_experiment, select_parameters, verify_composite_smoothing_chain, verify_theorem_suite, ExperimentConfig,
    PlanMode, Task, TrialStatus,
};
use enflo_core::{
    brute_force_tau_oracle, certify_t_le_2pi_tau, maximize_scaled_enflo_ratio, project, rademacher_pair,
    scaled_enflo_pair, smooth, smoothing_bound_report, GridFunction, LpSpace, SamplingPlan, SearchBudget,
    TorusDomain, Vector,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ex() -> SamplingPlan {
    SamplingPlan::exhaustive()
}

fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// `‖v‖_q` for real storage, or for `(re, im)` pairs when `complex`.
fn lq_norm(v: &[f64], q: f64, complex: bool) -> f64 {
    let moduli: Vec<f64> = if complex { v.chunks(2).map(|c| c[0].hypot(c[1])).collect() } else { v.iter().map(|x| x.abs()).collect() };
    moduli.iter().map(|a| a.powf(q)).sum::<f64>().powf(1.0 / q)
}

/// `E_ε ‖Σ ε_j x_j‖^p` by plain enumeration.
fn direct_rademacher_lhs(vectors: &[Vec<f64>], q: f64, complex: bool, p: f64) -> f64 {
    let n = vectors.len();
    let len = vectors[0].len();
    let mut total = 0.0;
    for mask in 0..1usize << n {
        let mut s = vec![0.0; len];
        for (j, v) in vectors.iter().enumerate() {
            let sign = if mask >> j & 1 == 1 { -1.0 } else { 1.0 };
            for (a, b) in s.iter_mut().zip(v) {
                *a += sign * b;
            }
        }
        total += lq_norm(&s, q, complex).powf(p);
    }
    total / (1usize << n) as f64
}

fn decode(mut idx: usize, n: usize, m: usize) -> Vec<usize> {
    let mut x = vec![0; n];
    for c in x.iter_mut().rev() {
        *c = idx % m;
        idx /= m;
    }
    x
}

fn encode(x: &[i64], m: usize) -> usize {
    x.iter().fold(0, |acc, &c| acc * m + c.rem_euclid(m as i64) as usize)
}

/// Average of `f` over `x + offsets`, by direct summation.
fn naive_average(f: &GridFunction, axis_offsets: &[Vec<i64>]) -> Vec<f64> {
    let d = f.domain();
    let (n, m) = (d.n(), d.m());
    let vs = f.stride();
    let mut offsets: Vec<Vec<i64>> = vec![vec![]];
    for opts in axis_offsets {
        offsets = offsets.into_iter().flat_map(|o| opts.iter().map(move |&t| [o.clone(), vec![t]].concat())).collect();
    }
    let mut out = vec![0.0; f.values().len()];
    for idx in 0..f.point_count() {
        let x = decode(idx, n, m);
        for off in &offsets {
            let y: Vec<i64> = x.iter().zip(off).map(|(&a, &b)| a as i64 + b).collect();
            let val = f.value(encode(&y, m));
            for q in 0..vs {
                out[idx * vs + q] += val[q];
            }
        }
        for q in 0..vs {
            out[idx * vs + q] /= offsets.len() as f64;
        }
    }
    out
}

fn even_in(k: i64) -> Vec<i64> {
    (-k + 1..k).filter(|t| t % 2 == 0).collect()
}

fn odd_in(k: i64) -> Vec<i64> {
    (-k..=k).filter(|t| t.rem_euclid(2) == 1).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for m in [4, 8] {
            let mut cfg = ExperimentConfig::new(Task::VerifyTheorem, 2.0);
            cfg.dim = 4;
            cfg.n = Some(n);
            cfg.m = Some(m);
            cfg.trials = 1000;
            cfg.seed = 11 + (10 * n + m) as u64;
            let out = verify_theorem_suite(&cfg).map_err(|e| e.to_string())?;
            for t in out.trials.iter().filter(|t| t.kind == "upper") {
                if t.status == TrialStatus::Degenerate {
                    continue;
                }
                let tau = t.constant.ok_or("missing τ")?;
                ensure(tau <= 5.0, || format!("n={n} m={m} trial {}: τ = {tau} > 5", t.id))?;
                worst = worst.max(tau);
                checked += 1;
            }
            ensure(out.trials.iter().all(|t| t.status != TrialStatus::Fail), || format!("n={n} m={m}: failing trial"))?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(checked == 6000, || format!("only {checked} nondegenerate upper trials"))?;
    ensure(secs < 60.0, || format!("took {secs:.1}s"))?;
    Ok(format!("6000 grid functions, max τ_est = {worst:.4} ≤ 5, {secs:.2}s"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut count = 0;
    for q in [2.0, 1.0] {
        let space = LpSpace::complexified(3, q).unwrap();
        for p in [1.0, 2.0] {
            for m in [4, 8, 16] {
                let domain = TorusDomain::new(3, m).unwrap();
                for trial in 0..100 {
                    let vectors = random_vectors(&space, 3, &mut trial_rng(2000 + m as u64, trial));
                    let w = certify_t_le_2pi_tau(&space, &vectors, p, &domain, &ex()).map_err(|e| e.to_string())?;
                    let ctx = || format!("ℓ_{q} p={p} m={m} trial {trial}");
                    ensure(w.chain_ok, || format!("{}: chain failed", ctx()))?;

                    let raw: Vec<Vec<f64>> = vectors.iter().map(|v| v.coords().to_vec()).collect();
                    let norm_sum: f64 = raw.iter().map(|v| lq_norm(v, q, true).powf(p)).sum();
                    let edge = (2.0 * (PI / m as f64).sin()).powf(p) * norm_sum;
                    ensure(rel_close(w.edge_sum, edge, 1e-9), || format!("{}: edge {} vs {edge}", ctx(), w.edge_sum))?;

                    // ∫ ‖Σ e^{2πi x_j/m} v_j‖^p by direct enumeration
                    let mut integral = 0.0;
                    for idx in 0..m * m * m {
                        let x = decode(idx, 3, m);
                        let mut s = vec![0.0; raw[0].len()];
                        for (j, v) in raw.iter().enumerate() {
                            let th = 2.0 * PI * x[j] as f64 / m as f64;
                            let (c, sn) = (th.cos(), th.sin());
                            for t in 0..v.len() / 2 {
                                s[2 * t] += c * v[2 * t] - sn * v[2 * t + 1];
                                s[2 * t + 1] += sn * v[2 * t] + c * v[2 * t + 1];
                            }
                        }
                        integral += lq_norm(&s, q, true).powf(p);
                    }
                    integral /= (m * m * m) as f64;
                    ensure(rel_close(w.half_shift_lhs, 2f64.powf(p) * integral, 1e-9), || {
                        format!("{}: half-shift {} vs {}", ctx(), w.half_shift_lhs, 2f64.powf(p) * integral)
                    })?;
                    ensure(rel_close(w.sym_integral, integral, 1e-9), || format!("{}: symmetrized integral", ctx()))?;
                    ensure(rel_close(w.signed_integral, integral, 1e-9), || format!("{}: signed integral", ctx()))?;

                    let t_inst = (direct_rademacher_lhs(&raw, q, true, p) / norm_sum).powf(1.0 / p);
                    let reported = w.rademacher_constant.ok_or("degenerate tuple")?;
                    ensure(rel_close(reported, t_inst, 1e-9), || format!("{}: T {reported} vs {t_inst}", ctx()))?;
                    ensure(t_inst <= 2.0 * PI * w.witness_tau.unwrap() * (1.0 + 1e-10), || format!("{}: T > 2πτ", ctx()))?;
                    count += 1;
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 30.0, || format!("took {secs:.1}s"))?;
    Ok(format!("{count} tuples certified, identities within 1e-9, {secs:.2}s"))
}

fn criterion_3() -> Outcome {
    let combos: Vec<(usize, usize, usize, f64)> = (1..=3)
        .flat_map(|n| [4, 8].into_iter().flat_map(move |m| [1, 3].into_iter().flat_map(move |k| [1.0, 1.5, 2.0].map(|p| (n, m, k, p)))))
        .collect();
    let space = LpSpace::real(2, 2.0).unwrap();
    let mut worst = f64::INFINITY;
    for trial in 0..1000 {
        let (n, m, k, p) = combos[trial % combos.len()];
        let domain = TorusDomain::new(n, m).unwrap();
        let f = GridFunction::random_gaussian(domain, space, &mut trial_rng(3, trial)).unwrap();
        let r = smoothing_bound_report(&f, k, p, &ex()).map_err(|e| e.to_string())?;
        let margin = r.bound_margin();
        if k == 1 {
            ensure(r.lhs == 0.0 && r.scale == 0.0 && margin == 0.0, || format!("trial {trial}: k=1 gave lhs {}", r.lhs))?;
        } else {
            ensure(margin >= -1e-10, || format!("trial {trial} (n={n} m={m} k={k} p={p}): margin {margin}"))?;
            worst = worst.min(margin / (r.scale * r.rhs_raw));
        }
    }
    Ok(format!("1000 functions, min relative margin {worst:.4}, k=1 exact"))
}

fn criterion_4() -> Outcome {
    let oracle = brute_force_tau_oracle(4, 1, &[0.0, 1.0], 1.0).map_err(|e| e.to_string())?;
    ensure(oracle.functions == 16, || format!("{} functions enumerated", oracle.functions))?;
    ensure(oracle.max_ratio == 0.5, || format!("oracle max {}", oracle.max_ratio))?;

    // independent enumeration: τ-ratio of f: ℤ_4 → {0,1} is
    // E|f(x+2) − f(x)| / (4 E|f(x+1) − f(x)|) because x ± 2 agree mod 4
    let mut best: f64 = 0.0;
    for bits in 0u32..16 {
        let f = |x: usize| (bits >> (x % 4) & 1) as f64;
        let lhs: f64 = (0..4).map(|x| (f(x + 2) - f(x)).abs()).sum::<f64>() / 4.0;
        let rhs: f64 = (0..4).map(|x| (f(x + 1) - f(x)).abs()).sum::<f64>() / 4.0;
        if rhs > 0.0 {
            best = best.max(lhs / (4.0 * rhs));
        }
    }
    ensure(best == 0.5, || format!("independent enumeration gives {best}"))?;

    let line = LpSpace::real(1, 1.0).unwrap();
    let budget = SearchBudget { restarts: 50, steps_per_restart: 500, seed: 4, ..SearchBudget::default() };
    let search = maximize_scaled_enflo_ratio(&line, 1, 4, 1.0, &budget, &ex()).map_err(|e| e.to_string())?;
    ensure(search.best_constant >= 0.495, || format!("search reached {}", search.best_constant))?;
    ensure(search.best_constant <= 0.5 + 1e-12, || format!("search exceeded the oracle: {}", search.best_constant))?;
    Ok(format!("oracle = 0.5 exactly, search = {:.6}", search.best_constant))
}

fn criterion_5() -> Outcome {
    let mut rng = trial_rng(5, 0);
    let mut worst: f64 = 0.0;
    for trial in 0..100 {
        let dim = rng.random_range(1..=5);
        let n = rng.random_range(1..=6);
        let space = LpSpace::real(dim, 2.0).unwrap();
        let vectors = random_vectors(&space, n, &mut trial_rng(5, trial + 1));
        let t = rademacher_pair(&space, &vectors, 2.0, &ex()).map_err(|e| e.to_string())?.derived_constant.unwrap();
        ensure((t - 1.0).abs() <= 1e-12, || format!("trial {trial}: T_est = {t}"))?;
        worst = worst.max((t - 1.0).abs());
    }
    for n in [2, 4, 8] {
        let space = LpSpace::real(n, 1.0).unwrap();
        let basis: Vec<Vector> = (0..n).map(|j| space.basis(j).unwrap()).collect();
        let t = rademacher_pair(&space, &basis, 2.0, &ex()).map_err(|e| e.to_string())?.derived_constant.unwrap();
        let expected = (n as f64).sqrt();
        ensure((t - expected).abs() <= 1e-9, || format!("ℓ_1^{n}: T_est = {t}, expected {expected}"))?;
    }
    Ok(format!("ℓ_2 max deviation {worst:.1e}; ℓ_1 basis gives √2, 2, 2√2"))
}

fn criterion_6() -> Outcome {
    let holds = |n: usize, p: f64, m: usize, k: usize| {
        let nf = n as f64;
        let kf = k as f64;
        m.is_multiple_of(4)
            && k % 2 == 1
            && 4.0 * nf.powf(2.0 - 1.0 / p) <= kf
            && kf <= 3.0 * m as f64 / (2.0 * nf.powf(1.0 - 1.0 / p))
            && (k as f64) < m as f64 / 2.0
            && m as f64 >= 3.0 * nf.powf(3.0 - 2.0 / p)
    };
    for n in 1..=6 {
        for p in [1.0, 1.25, 1.5, 2.0] {
            let (m, k) = select_parameters(n, p).map_err(|e| e.to_string())?;
            ensure(holds(n, p, m, k), || format!("n={n} p={p}: ({m},{k}) violates a constraint"))?;
            let first = (1..).map(|i| 4 * i).find(|&mm| (1..mm).step_by(2).any(|kk| holds(n, p, mm, kk))).unwrap();
            ensure(m == first, || format!("n={n} p={p}: m = {m}, smallest admissible is {first}"))?;
        }
    }
    let ex12 = select_parameters(1, 2.0).map_err(|e| e.to_string())?;
    ensure(ex12 == (12, 5), || format!("(n=1, p=2) gave {ex12:?}"))?;
    Ok("24 (n, p) pairs admissible and minimal; (1, 2) -> (12, 5)".into())
}

fn criterion_7() -> Outcome {
    let mut cfg = ExperimentConfig::new(Task::VerifyChain, 2.0);
    cfg.dim = 2;
    cfg.n = Some(1);
    cfg.trials = 200;
    cfg.seed = 7;
    let out = verify_composite_smoothing_chain(&cfg).map_err(|e| e.to_string())?;
    ensure(out.parameters == Some((12, 5)), || format!("parameters {:?}", out.parameters))?;
    let chain: Vec<_> = out.trials.iter().filter(|t| t.kind == "chain").collect();
    ensure(chain.len() == 200, || format!("{} chain trials", chain.len()))?;
    for t in &chain {
        let tau = t.constant.ok_or("degenerate trial")?;
        ensure(tau <= 5.0, || format!("trial {}: τ = {tau}", t.id))?;
    }
    let fails = out.trials.iter().filter(|t| t.status == TrialStatus::Fail).count();
    ensure(fails == 0, || format!("{fails} violations"))?;
    let min = out.trials.iter().filter(|t| t.kind == "chain").filter_map(|t| t.margin).fold(f64::INFINITY, f64::min);
    Ok(format!("200 functions at (m, k) = (12, 5), zero violations, min margin {min:.3e}"))
}

fn criterion_8() -> Outcome {
    let mut cfgs = Vec::new();
    let mut theorem = ExperimentConfig::new(Task::VerifyTheorem, 2.0);
    theorem.dim = 3;
    theorem.n = Some(2);
    theorem.m = Some(8);
    theorem.trials = 40;
    theorem.seed = 81;
    cfgs.push(theorem.clone());
    let mut mc = theorem.clone();
    mc.plan = PlanMode::MonteCarlo;
    mc.samples = 500;
    cfgs.push(mc);
    let mut tau = ExperimentConfig::new(Task::EstimateTau, 1.5);
    tau.n = Some(1);
    tau.m = Some(8);
    tau.restarts = Some(4);
    tau.steps = Some(100);
    tau.seed = 82;
    cfgs.push(tau);

    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().map_err(|e| e.to_string())?;
    for cfg in &cfgs {
        let a = run_experiment(cfg).map_err(|e| e.to_string())?.without_timing().to_json().map_err(|e| e.to_string())?;
        let b = run_experiment(cfg).map_err(|e| e.to_string())?.without_timing().to_json().map_err(|e| e.to_string())?;
        let c = single
            .install(|| run_experiment(cfg))
            .map_err(|e| e.to_string())?
            .without_timing()
            .to_json()
            .map_err(|e| e.to_string())?;
        ensure(a == b && a == c, || format!("task {}: reports differ", cfg.task.name()))?;
    }

    let space = LpSpace::real(2, 2.0).unwrap();
    let domain = TorusDomain::new(2, 8).unwrap();
    let mut agree = 0;
    for trial in 0..500 {
        let f = GridFunction::random_gaussian(domain, space, &mut trial_rng(8, trial)).unwrap();
        let exact = scaled_enflo_pair(&f, 1.5, &ex()).map_err(|e| e.to_string())?;
        let plan = SamplingPlan::monte_carlo(2000, 8000 + trial as u64);
        let est = scaled_enflo_pair(&f, 1.5, &plan).map_err(|e| e.to_string())?;
        let lhs_ok = (est.lhs - exact.lhs).abs() <= 4.0 * est.lhs_error;
        let rhs_ok = (est.rhs_raw - exact.rhs_raw).abs() <= 4.0 * est.rhs_error;
        if lhs_ok && rhs_ok {
            agree += 1;
        }
    }
    ensure(agree >= 495, || format!("only {agree}/500 Monte Carlo estimates within 4 SE"))?;
    Ok(format!("3 configs byte-identical across runs and thread counts; MC within 4 SE in {agree}/500"))
}

fn criterion_9() -> Outcome {
    let mut cases = 0;
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        for m in [2, 4, 6, 8] {
            for k in [1usize, 3] {
                let space = LpSpace::real(2, 2.0).unwrap();
                let domain = TorusDomain::new(n, m).unwrap();
                let f = GridFunction::random_gaussian(domain, space, &mut trial_rng(9, 100 * n + 10 * m + k)).unwrap();
                let ki = k as i64;
                let mut check = |fast: &GridFunction, slow: Vec<f64>, what: &str| {
                    let diff = fast.values().iter().zip(&slow).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    worst = worst.max(diff);
                    cases += 1;
                    ensure(diff <= 1e-12, || format!("{what} n={n} m={m} k={k}: diff {diff:e}"))
                };
                let s = smooth(&f, k).map_err(|e| e.to_string())?;
                check(&s, naive_average(&f, &vec![even_in(ki); n]), "smooth")?;
                for axis in 0..n {
                    let offsets: Vec<Vec<i64>> =
                        (0..n).map(|a| if a == axis { even_in(ki) } else { odd_in(ki) }).collect();
                    let e = project(&f, axis, k).map_err(|e| e.to_string())?;
                    check(&e, naive_average(&f, &offsets), "project")?;
                }
            }
        }
    }
    Ok(format!("{cases} operator applications, max deviation {worst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("upper direction τ ≤ 5T on ℓ_2^4", criterion_1),
        ("lower direction T ≤ 2πτ via witness", criterion_2),
        ("smoothing bound", criterion_3),
        ("oracle equivalence on ℤ_4", criterion_4),
        ("exact Rademacher constants", criterion_5),
        ("parameter selector", criterion_6),
        ("composite smoothing chain", criterion_7),
        ("determinism and Monte Carlo agreement", criterion_8),
        ("separable operators vs naive summation", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} ({detail}) [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
