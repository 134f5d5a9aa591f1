//! Verifier suites: exhaustive sweeps over a fixed small battery plus
//! seeded randomized trials, and the oracle-based checks.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use rsd_core::battery::{exhaustive_battery, oracle_battery};
use rsd_core::verify::{
    check_increasing_differences, exhaustive_sweep, run_trials, DifferencesError, Engine, Property, PropertyRun,
    Witness, EXHAUSTIVE_MAX_STUDENTS, INSERTION_CONVENTION,
};
use rsd_core::{OracleError, ORACLE_MAX_STUDENTS};
use thiserror::Error;

use crate::calibrate::{calibrate_against, Calibration};
use crate::mc::McConfig;

/// Randomized trials are scheduled in fixed chunks of this many indices,
/// so the first witness does not depend on the worker count.
pub const TRIAL_CHUNK: u64 = 1000;

/// Minimum fraction of calibration cells within 3 s.e. for the oracle
/// suite to pass.
pub const CALIBRATION_COVERAGE: f64 = 0.99;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Oracle,
    Lipschitz,
    Insertion,
    Differences,
    Equivalence,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 6] = ["oracle", "lipschitz", "insertion", "differences", "equivalence", "all"];

    pub fn parse(name: &str) -> Option<Suite> {
        Some(match name {
            "oracle" => Suite::Oracle,
            "lipschitz" => Suite::Lipschitz,
            "insertion" => Suite::Insertion,
            "differences" => Suite::Differences,
            "equivalence" => Suite::Equivalence,
            "all" => Suite::All,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Lipschitz => "lipschitz",
            Suite::Insertion => "insertion",
            Suite::Differences => "differences",
            Suite::Equivalence => "equivalence",
            Suite::All => "all",
        }
    }

    fn properties(self) -> &'static [Property] {
        match self {
            Suite::Lipschitz => &[Property::Outcome, Property::Transposition, Property::Hamming, Property::Decomposition],
            Suite::Insertion => &[Property::Insertion],
            Suite::Equivalence => &[Property::Outcome, Property::CutoffEquivalence],
            Suite::All => &Property::ALL,
            Suite::Oracle | Suite::Differences => &[],
        }
    }

    fn uses_oracle(self) -> (bool, bool) {
        match self {
            Suite::Oracle => (true, false),
            Suite::Differences => (false, true),
            Suite::All => (true, true),
            _ => (false, false),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Randomized trials per property.
    pub trials: u64,
    /// Largest `n` in randomized trials.
    pub random_max_n: usize,
    /// Largest `n` in the exhaustive battery.
    pub exhaustive_max_n: usize,
    /// Random instances added to the exhaustive battery.
    pub exhaustive_random: usize,
    /// Largest `n` in the oracle battery.
    pub oracle_max_n: usize,
    /// Replications for the oracle calibration.
    pub calibration_reps: u64,
    pub workers: usize,
    pub engine: Engine,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            seed: 0x5EED,
            trials: 100_000,
            random_max_n: 50,
            exhaustive_max_n: 5,
            exhaustive_random: 40,
            oracle_max_n: 8,
            calibration_reps: 10_000,
            workers: 1,
            engine: Engine::Faithful,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SuiteError {
    #[error("{0}")]
    Oracle(#[from] OracleError),
    #[error("invalid suite configuration: {0}")]
    Config(String),
}

impl SuiteError {
    pub fn class(&self) -> &'static str {
        match self {
            SuiteError::Oracle(OracleError::InstanceTooLarge { .. }) => "InstanceTooLarge",
            SuiteError::Config(_) => "ConfigInvalid",
        }
    }
}

/// Verdict for one property.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub name: String,
    pub exhaustive_cases: u64,
    pub random_cases: u64,
    pub instances: usize,
    /// Largest `|Δτ|` seen, where meaningful.
    pub max_observed: Option<u32>,
    pub witness: Option<(String, String)>,
    pub convention: Option<&'static str>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: u64,
    pub engine: Engine,
    pub verdicts: Vec<Verdict>,
    pub wall_clock: Duration,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }

    /// Structured-text verdict file body (without provenance header).
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "suite = {}", self.suite.name());
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "engine = {:?}", self.engine);
        let _ = writeln!(s, "result = {}", if self.passed() { "pass" } else { "fail" });
        for v in &self.verdicts {
            let _ = writeln!(s, "\n[{}]", v.name);
            let _ = writeln!(s, "result = {}", if v.passed { "pass" } else { "fail" });
            let _ = writeln!(s, "instances = {}", v.instances);
            let _ = writeln!(s, "exhaustive_cases = {}", v.exhaustive_cases);
            let _ = writeln!(s, "random_cases = {}", v.random_cases);
            if let Some(m) = v.max_observed {
                let _ = writeln!(s, "max_observed = {m}");
            }
            if let Some(c) = v.convention {
                let _ = writeln!(s, "convention = {c}");
            }
            if let Some((label, w)) = &v.witness {
                let _ = writeln!(s, "witness_instance = {label}");
                let _ = writeln!(s, "witness = {w}");
            }
        }
        s
    }
}

fn witness_text(w: Option<(String, Witness)>) -> Option<(String, String)> {
    w.map(|(label, w)| (label, w.to_string()))
}

fn pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool")
}

/// Randomized trials `0..trials`, chunked and merged in chunk order.
pub fn parallel_trials(engine: Engine, property: Property, seed: u64, trials: u64, max_n: usize, workers: usize) -> PropertyRun {
    let chunks = trials.div_ceil(TRIAL_CHUNK);
    let run_chunk = |c: u64| {
        let lo = c * TRIAL_CHUNK;
        run_trials(engine, property, seed, lo..(lo + TRIAL_CHUNK).min(trials), max_n)
    };
    let parts: Vec<PropertyRun> = if workers <= 1 {
        (0..chunks).map(run_chunk).collect()
    } else {
        pool(workers).install(|| (0..chunks).into_par_iter().map(run_chunk).collect())
    };
    let mut run = PropertyRun::new(property);
    for p in parts {
        run.absorb(p);
    }
    run
}

fn property_verdict(cfg: &SuiteConfig, property: Property) -> Verdict {
    let battery = exhaustive_battery(cfg.seed, cfg.exhaustive_max_n, cfg.exhaustive_random);
    let sweep = |item| exhaustive_sweep(cfg.engine, item, property);
    let parts: Vec<PropertyRun> = if cfg.workers <= 1 {
        battery.iter().map(sweep).collect()
    } else {
        pool(cfg.workers).install(|| battery.par_iter().map(sweep).collect())
    };
    let mut exhaustive = PropertyRun::new(property);
    for p in parts {
        exhaustive.absorb(p);
    }
    let random = parallel_trials(cfg.engine, property, cfg.seed, cfg.trials, cfg.random_max_n, cfg.workers);
    let lipschitz = matches!(property, Property::Transposition | Property::Hamming | Property::Insertion);
    let passed = exhaustive.passed() && random.passed();
    Verdict {
        name: property.name().to_string(),
        exhaustive_cases: exhaustive.cases,
        random_cases: random.cases,
        instances: battery.len(),
        max_observed: lipschitz.then(|| exhaustive.max_observed.max(random.max_observed)),
        witness: witness_text(exhaustive.witness.or(random.witness)),
        convention: (property == Property::Insertion).then_some(INSERTION_CONVENTION),
        passed,
    }
}

/// Exact oracle checks: probabilities sum to one, first differences are
/// nondecreasing in `[0, 1]`, and (with `calibrate`) Monte Carlo coverage.
fn oracle_verdicts(cfg: &SuiteConfig, consistency: bool, differences: bool) -> Result<Vec<Verdict>, SuiteError> {
    let battery = oracle_battery(cfg.seed, cfg.oracle_max_n);
    let mut sums = Verdict {
        name: "oracle-consistency".into(),
        exhaustive_cases: 0,
        random_cases: 0,
        instances: battery.len(),
        max_observed: None,
        witness: None,
        convention: None,
        passed: true,
    };
    let mut diffs = Verdict { name: "increasing-differences".into(), ..sums.clone() };
    let mut calib = Verdict { name: "mc-vs-oracle".into(), ..sums.clone() };
    let mc = McConfig { parallelism: cfg.workers, ..McConfig::new(cfg.calibration_reps, cfg.seed) };
    let (mut cells, mut failed) = (0u64, 0u64);
    for item in &battery {
        let o = match check_increasing_differences(&item.instance) {
            Ok(o) => o,
            Err(DifferencesError::Oracle(e)) => return Err(e.into()),
            Err(DifferencesError::Violated { violation }) => {
                diffs.passed = false;
                diffs.witness.get_or_insert((item.label.clone(), format!("{violation:?}")));
                continue;
            }
        };
        diffs.exhaustive_cases += o.m as u64;
        let d = o.denominator;
        let rows_ok = o.lottery_counts.iter().all(|r| r.iter().sum::<u64>() == d)
            && o.cutoff_counts.iter().all(|r| r.iter().sum::<u64>() == d);
        sums.exhaustive_cases += d;
        if !rows_ok && sums.witness.is_none() {
            sums.passed = false;
            sums.witness = Some((item.label.clone(), "probabilities do not sum to 1".into()));
        }
        if consistency {
            let c: Calibration = calibrate_against(&item.instance, &o, &mc).map_err(|e| SuiteError::Config(e.to_string()))?;
            cells += c.cells.len() as u64;
            failed += c.failures() as u64;
            if calib.witness.is_none() {
                if let Some(bad) = c.cells.iter().find(|c| !c.pass) {
                    calib.witness = Some((item.label.clone(), format!("{bad:?}")));
                }
            }
        }
    }
    let mut out = Vec::new();
    if consistency {
        calib.random_cases = cells;
        calib.passed = cells > 0 && (cells - failed) as f64 / cells as f64 >= CALIBRATION_COVERAGE;
        out.push(sums);
        out.push(calib);
    }
    if differences {
        out.push(diffs);
    }
    Ok(out)
}

pub fn run_suite(suite: Suite, cfg: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    if cfg.oracle_max_n > ORACLE_MAX_STUDENTS {
        return Err(OracleError::InstanceTooLarge { n: cfg.oracle_max_n, max: ORACLE_MAX_STUDENTS }.into());
    }
    if cfg.exhaustive_max_n > EXHAUSTIVE_MAX_STUDENTS {
        return Err(SuiteError::Config(format!(
            "exhaustive sweeps support n <= {EXHAUSTIVE_MAX_STUDENTS}, got {}",
            cfg.exhaustive_max_n
        )));
    }
    if cfg.random_max_n == 0 || cfg.calibration_reps == 0 {
        return Err(SuiteError::Config("random_max_n and calibration_reps must be positive".into()));
    }
    let start = Instant::now();
    let mut verdicts: Vec<Verdict> = suite.properties().iter().map(|&p| property_verdict(cfg, p)).collect();
    let (consistency, differences) = suite.uses_oracle();
    if consistency || differences {
        verdicts.extend(oracle_verdicts(cfg, consistency, differences)?);
    }
    Ok(SuiteReport { suite, seed: cfg.seed, engine: cfg.engine, verdicts, wall_clock: start.elapsed() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SuiteConfig {
        SuiteConfig { trials: 2500, random_max_n: 12, exhaustive_random: 4, oracle_max_n: 6, calibration_reps: 2000, ..SuiteConfig::default() }
    }

    #[test]
    fn equivalence_and_differences_pass() {
        for s in [Suite::Equivalence, Suite::Differences] {
            let r = run_suite(s, &small()).unwrap();
            assert!(r.passed(), "{}", r.render());
        }
    }

    #[test]
    fn lipschitz_verdicts() {
        let r = run_suite(Suite::Lipschitz, &small()).unwrap();
        for name in ["outcome", "decomposition"] {
            assert!(r.verdict(name).unwrap().passed, "{}", r.render());
        }
        // single swaps can move τ by 3 once n >= 6 and by 5 at n = 19, so
        // both Lipschitz verdicts may carry witnesses; they must be labelled
        for (name, tag) in [("transposition-lipschitz", "Transposition"), ("hamming-lipschitz", "Hamming")] {
            let v = r.verdict(name).unwrap();
            assert_eq!(v.passed, v.witness.is_none());
            if let Some((_, w)) = &v.witness {
                assert!(w.contains(tag), "{w}");
                assert!(v.max_observed.unwrap() > 2, "{v:?}");
            }
        }
    }

    #[test]
    fn verdicts_do_not_depend_on_workers() {
        let a = run_suite(Suite::Insertion, &small()).unwrap();
        let b = run_suite(Suite::Insertion, &SuiteConfig { workers: 3, ..small() }).unwrap();
        assert_eq!(a.verdicts, b.verdicts);
    }

    #[test]
    fn corrupted_engine_is_caught() {
        let r = run_suite(Suite::Lipschitz, &SuiteConfig { engine: Engine::CapacityOffByOne, ..small() }).unwrap();
        assert!(!r.passed());
        let v = r.verdict("outcome").unwrap();
        assert!(v.witness.as_ref().unwrap().1.contains("CapacityExceeded"), "{v:?}");
    }

    #[test]
    fn oracle_guard() {
        let err = run_suite(Suite::Oracle, &SuiteConfig { oracle_max_n: 12, ..small() }).unwrap_err();
        assert_eq!(err.class(), "InstanceTooLarge");
    }

    #[test]
    fn suite_names_round_trip() {
        for n in Suite::NAMES {
            assert_eq!(Suite::parse(n).unwrap().name(), n);
        }
        assert!(Suite::parse("nope").is_none());
    }
}
