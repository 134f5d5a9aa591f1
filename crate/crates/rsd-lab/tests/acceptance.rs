//! Acceptance criteria, one line each. Runs without the libtest harness so
//! the lines are always printed; exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use rsd_core::battery::oracle_battery;
use rsd_core::verify::check_increasing_differences;
use rsd_core::{enumerate_oracle, generate_instance, CutoffVector, GeneratorKind, GeneratorSpec, MarketInstance};
use rsd_lab::bounds;
use rsd_lab::calibrate::calibrate_against;
use rsd_lab::experiments::{
    phase_transition_experiment, phase_transition_shape, toy_model_law_check, uniform_tail_experiment,
    PhaseTransitionParams,
};
use rsd_lab::mc::{fold_replications, Scratch};
use rsd_lab::suites::{run_suite, Suite, SuiteConfig};
use rsd_lab::McConfig;

const SEED: u64 = 0x5EED;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn c1_toy_law() -> Verdict {
    let cfg = McConfig::new(10_000, SEED);
    let start = Instant::now();
    let r = toy_model_law_check(1000, 10, &cfg).expect("valid block market");
    let secs = start.elapsed().as_secs_f64();
    let sup: Vec<f64> = r.rows_named("cdf_sup_distance").map(|x| x.estimate).collect();
    let worst = sup.iter().cloned().fold(0.0, f64::max);
    let means: Vec<_> = r.rows_named("mean_lottery_cutoff").collect();
    let means_ok = means.iter().all(|x| x.pass == Some(true));
    let m1 = means[1];
    let formula = bounds::block_cutoff_mean_formula(100);
    let pass = worst <= 0.02 && means_ok && secs < 30.0;
    verdict(
        pass,
        format!(
            "sup|F_n - x^100| school 1 = {:.4}, worst school = {worst:.4} (<= 0.02); mean school 1 = {:.6} +- {:.6} vs 1-1/(c+1) = {:.6} (all schools within 3 s.e.: {means_ok}); 1-1/c = {formula:.6}, discrepancy {:.6}; {secs:.1}s (< 30s)",
            sup[1],
            m1.estimate,
            m1.stderr.unwrap(),
            m1.bound.unwrap(),
            m1.bound.unwrap() - formula,
        ),
    )
}

fn c2_phase_law() -> Verdict {
    let cfg = McConfig::new(100_000, SEED);
    let mut fails = Vec::new();
    let mut cells = 0;
    for (m, c) in [(2usize, 2usize), (10, 5), (100, 7)] {
        let alpha = (m as f64).ln() / c as f64;
        let (n, c2, _) = phase_transition_shape(m, alpha).unwrap();
        assert_eq!((n, c2), (m * c, c));
        let params = PhaseTransitionParams { m, alpha, epsilon: 0.5, extra_t: vec![0.3, 0.5, 0.8] };
        let r = phase_transition_experiment(&params, &cfg).unwrap();
        for row in r.rows.iter().filter(|x| {
            x.quantity == "p_min_cutoff_gt_t[t]" || x.quantity == "p_min_cutoff_gt_t[t=exp(-alpha)]"
        }) {
            cells += 1;
            if row.pass != Some(true) {
                fails.push(format!("(m={m},c={c},t={:.4}) est {} exact {}", row.t_or_epsilon.unwrap(), row.estimate, row.bound.unwrap()));
            }
        }
    }
    let (_, c, a_eff) = phase_transition_shape(10_000, 1.0).unwrap();
    let exact = bounds::min_cutoff_survival((-a_eff).exp(), c, 10_000);
    let limit = (-1f64).exp();
    let requested = bounds::min_cutoff_survival((-1f64).exp(), c, 10_000);
    let pass = fails.is_empty() && (exact - limit).abs() <= 0.01;
    verdict(
        pass,
        format!(
            "{} of {cells} (m,c,t) cells within 3 binomial s.e. at 1e5 reps{}; alpha=1, m=1e4: c={c}, alpha'={a_eff:.5}, exact (1-t^c)^m = {exact:.5} vs 1/e = {limit:.5} (|diff| <= 0.01); at the requested t=e^-1 the exact value is {requested:.5}",
            cells - fails.len(),
            if fails.is_empty() { String::new() } else { format!(" FAILED: {}", fails.join("; ")) },
        ),
    )
}

fn spec(kind: GeneratorKind, n: usize, m: usize, fill: f64, seed: u64) -> GeneratorSpec {
    if kind == GeneratorKind::Block {
        return GeneratorSpec::balanced(kind, n, m, seed);
    }
    // total capacity below n keeps every school oversubscribed
    let per = ((n as f64 * fill) / m as f64).floor() as u32;
    GeneratorSpec { kind, n, m, capacities: vec![per; m], seed }
}

fn tail_battery() -> Vec<(String, MarketInstance)> {
    use GeneratorKind::*;
    let pl = |m: usize| PlackettLuce { weights: (0..m).map(|k| 1.0 + (k % 5) as f64).collect() };
    let specs = vec![
        spec(Block, 1000, 10, 1.0, 1),
        spec(UniformFull, 1000, 20, 0.8, 2),
        spec(UniformPartial { list_length: 5 }, 1000, 20, 0.8, 3),
        spec(CommonRanking, 1000, 10, 0.8, 4),
        spec(pl(20), 1000, 20, 0.8, 5),
        spec(Block, 10_000, 50, 1.0, 6),
        spec(UniformFull, 10_000, 50, 0.8, 7),
        spec(UniformPartial { list_length: 5 }, 10_000, 50, 0.8, 8),
        spec(CommonRanking, 10_000, 20, 0.8, 9),
        spec(pl(50), 10_000, 50, 0.8, 10),
        spec(Block, 100_000, 100, 1.0, 11),
        spec(UniformPartial { list_length: 3 }, 100_000, 20, 0.8, 12),
        spec(CommonRanking, 100_000, 10, 0.8, 13),
        spec(pl(20), 100_000, 20, 0.9, 14),
    ];
    specs
        .into_iter()
        .map(|s| {
            let label = format!("{} n={} m={}", s.kind.name(), s.n, s.m);
            (label, generate_instance(&s).expect("valid spec"))
        })
        .collect()
}

fn c3_c4_tails() -> (Verdict, Verdict) {
    let cfg = McConfig::new(10_000, SEED);
    let battery = tail_battery();
    let (mut school_cells, mut school_fail) = (0, Vec::new());
    let (mut max_cells, mut max_fail) = (0, Vec::new());
    for (label, inst) in &battery {
        let r = match uniform_tail_experiment(inst, &cfg) {
            Ok(r) => r,
            Err(e) => {
                school_fail.push(format!("{label}: {e}"));
                max_fail.push(format!("{label}: {e}"));
                continue;
            }
        };
        for row in r.rows_named("tail_frequency") {
            school_cells += 1;
            if row.pass != Some(true) {
                school_fail.push(format!("{label} school {:?} eps {:?}: {} > {:?}", row.school, row.t_or_epsilon, row.estimate, row.bound));
            }
        }
        for row in r.rows_named("max_tail_frequency") {
            max_cells += 1;
            if row.pass != Some(true) {
                max_fail.push(format!("{label} eps {:?}: {} > {:?}", row.t_or_epsilon, row.estimate, row.bound));
            }
        }
    }

    // capacity n/m with m ln m << n
    let big = generate_instance(&GeneratorSpec::balanced(GeneratorKind::UniformFull, 100_000, 100, 15)).unwrap();
    let r = uniform_tail_experiment(&big, &McConfig { epsilon_grid: vec![0.05], ..cfg.clone() });
    let (freq, big_ok) = match &r {
        Ok(r) => {
            let row = r.rows_named("max_tail_frequency").next().unwrap();
            (row.estimate, row.estimate <= 0.01)
        }
        Err(e) => {
            max_fail.push(format!("uniform_full n=1e5 m=100: {e}"));
            (f64::NAN, false)
        }
    };
    let kinds = "block, uniform_full, uniform_partial, common_ranking, plackett_luce; n in {1e3,1e4,1e5}";
    let c3 = verdict(
        school_fail.is_empty(),
        format!(
            "{} instances ({kinds}), {school_cells} (school, eps) cells at 1e4+1e4 reps, {} above bound + 3 s.e.{}",
            battery.len(),
            school_fail.len(),
            if school_fail.is_empty() { String::new() } else { format!(": {}", school_fail.join("; ")) }
        ),
    );
    let c4 = verdict(
        max_fail.is_empty() && big_ok,
        format!(
            "{max_cells} (instance, eps) max-deviation cells, {} above bound + 3 s.e.; uniform_full n=1e5 m=100 caps n/m: P(max|gamma-gamma_bar| >= 0.05) = {freq} (<= 0.01){}",
            max_fail.len(),
            if max_fail.is_empty() { String::new() } else { format!(": {}", max_fail.join("; ")) }
        ),
    );
    (c3, c4)
}

fn c5_properties() -> Verdict {
    let cfg = SuiteConfig { seed: SEED, trials: 100_000, random_max_n: 50, exhaustive_max_n: 5, ..SuiteConfig::default() };
    let start = Instant::now();
    let mut parts = Vec::new();
    let mut all = true;
    for suite in [Suite::Lipschitz, Suite::Insertion, Suite::Equivalence] {
        let r = run_suite(suite, &cfg).unwrap();
        for v in &r.verdicts {
            all &= v.passed;
            let mut s = format!(
                "{} {} ({} exhaustive + {} random",
                v.name,
                if v.passed { "ok" } else { "VIOLATED" },
                v.exhaustive_cases,
                v.random_cases
            );
            if let Some(m) = v.max_observed {
                s += &format!(", max |dtau| {m}");
            }
            s += ")";
            if let Some((label, w)) = &v.witness {
                s += &format!(" witness [{label}] {w}");
            }
            parts.push(s);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(all && secs < 300.0, format!("{secs:.0}s (< 300s); {}", parts.join("; ")))
}

fn c6_differences() -> Verdict {
    let battery = oracle_battery(SEED, 8);
    let mut bad = Vec::new();
    let mut schools = 0;
    for item in &battery {
        match check_increasing_differences(&item.instance) {
            Ok(o) => schools += o.m,
            Err(e) => bad.push(format!("{}: {e:?}", item.label)),
        }
    }
    verdict(
        battery.len() >= 20 && bad.is_empty(),
        format!("{} instances (n <= 8), {schools} school curves, {} violations {}", battery.len(), bad.len(), bad.join("; ")),
    )
}

fn c7_calibration() -> Verdict {
    let battery = oracle_battery(SEED, 8);
    let oracles: Vec<_> = battery.iter().map(|b| enumerate_oracle(&b.instance).unwrap()).collect();
    let (mut cells, mut failed, mut clean_seeds) = (0u64, 0u64, 0u32);
    for s in 0..100u64 {
        let cfg = McConfig::new(10_000, 1000 + s);
        let mut seed_clean = true;
        for (item, o) in battery.iter().zip(&oracles) {
            let c = calibrate_against(&item.instance, o, &cfg).unwrap();
            cells += c.cells.len() as u64;
            failed += c.failures() as u64;
            seed_clean &= c.passed();
        }
        clean_seeds += seed_clean as u32;
    }
    let coverage = (cells - failed) as f64 / cells as f64;
    verdict(
        coverage >= 0.99,
        format!(
            "{} instances x 100 seeds at 1e4 reps: {} of {cells} estimates within 3 s.e. (coverage {:.4}, needs >= 0.99); seeds with every estimate inside: {clean_seeds}/100",
            battery.len(),
            cells - failed,
            coverage
        ),
    )
}

fn c8_performance() -> Verdict {
    let n = 1_000_000;
    let m = 1000;
    let spec = GeneratorSpec::balanced(GeneratorKind::UniformPartial { list_length: 10 }, n, m, 8);
    let inst = generate_instance(&spec).unwrap();
    let mut scratch = Scratch::new(n);
    let start = Instant::now();
    scratch.replicate(&inst, SEED, "perf", 0);
    let cut = CutoffVector::from_assignment(&scratch.assignment);
    let single = start.elapsed().as_secs_f64();
    let binding = (0..m).filter(|&k| cut.binding(k)).count();

    let aggregate = |workers: usize| {
        let cfg = McConfig::new(1000, SEED).with_parallelism(workers);
        let start = Instant::now();
        let sums = fold_replications(
            &cfg,
            || (Scratch::new(n), vec![0u64; m]),
            |(s, acc), rep| {
                s.replicate(&inst, cfg.master_seed, "perf", rep);
                let c = CutoffVector::from_assignment(&s.assignment);
                for (k, a) in acc.iter_mut().enumerate() {
                    *a += c.position(k).unwrap_or(n) as u64;
                }
            },
            |(_, a), (_, b)| a.iter_mut().zip(b).for_each(|(x, y)| *x += y),
        )
        .1;
        (sums, start.elapsed().as_secs_f64())
    };
    let (one, t1) = aggregate(1);
    let (eight, t8) = aggregate(8);
    let speedup = t1 / t8;
    let cores = std::thread::available_parallelism().map(|c| c.get()).unwrap_or(1);
    let identical = one == eight;
    verdict(
        single < 1.0 && identical && speedup >= 5.0,
        format!(
            "one RSD pass + cutoffs at n=1e6, m=1e3, 10-school lists: {single:.3}s (< 1s, {binding} schools binding); 1e3 reps: 1 worker {t1:.1}s, 8 workers {t8:.1}s, speedup {speedup:.2}x (needs >= 5x; {cores} core(s) available); aggregates identical: {identical}"
        ),
    )
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    // `cargo test -- --list` and filters from the harness protocol
    if args.iter().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|v| v.parse().ok());
    let mut failed = 0;
    let mut report = |id: u32, name: &str, v: Verdict| {
        println!("criterion {id} {name}: {} | {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += (!v.pass) as u32;
    };
    let want = |id: u32| only.is_none_or(|o| o == id);
    if want(1) {
        report(1, "toy-model law", c1_toy_law());
    }
    if want(2) {
        report(2, "phase-transition exact law", c2_phase_law());
    }
    if want(3) || want(4) {
        let (c3, c4) = c3_c4_tails();
        report(3, "single-school tail bound", c3);
        report(4, "uniform tail bound", c4);
    }
    if want(5) {
        report(5, "property suites", c5_properties());
    }
    if want(6) {
        report(6, "increasing differences", c6_differences());
    }
    if want(7) {
        report(7, "oracle calibration", c7_calibration());
    }
    if want(8) {
        report(8, "performance and determinism", c8_performance());
    }
    if failed == 0 {
        println!("acceptance: all criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} criterion(s) failed");
        ExitCode::FAILURE
    }
}
