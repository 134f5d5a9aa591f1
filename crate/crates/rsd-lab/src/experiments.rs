//! Tail-bound comparisons, the block-market law check and the
//! phase-transition study.

use std::time::{Duration, Instant};

use rsd_core::generators::lottery_model_permutation;
use rsd_core::seed::substream;
use rsd_core::{generate_instance, CutoffVector, GeneratorKind, GeneratorSpec, MarketInstance, SpecError};
use thiserror::Error;

use crate::bounds;
use crate::mc::{fold_replications, gamma_bar_from_sums, demand_sums, labels, map_replications, GammaBar, McConfig, Scratch};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid generator spec: {0}")]
    SpecInvalid(#[from] SpecError),
    #[error("schools {schools:?} do not bind under the estimated mean demand")]
    NotBindingSchool { schools: Vec<usize> },
    #[error("school {school} out of range (m = {m})")]
    SchoolOutOfRange { school: usize, m: usize },
}

impl ExperimentError {
    pub fn class(&self) -> &'static str {
        match self {
            ExperimentError::Config(_) => "ConfigInvalid",
            ExperimentError::SpecInvalid(_) => "SpecInvalid",
            ExperimentError::NotBindingSchool { .. } => "NotBindingSchool",
            ExperimentError::SchoolOutOfRange { .. } => "SchoolOutOfRange",
        }
    }
}

/// One CSV row: `quantity, school, t_or_epsilon, estimate, stderr, bound, pass`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub quantity: String,
    pub school: Option<usize>,
    pub t_or_epsilon: Option<f64>,
    pub estimate: f64,
    pub stderr: Option<f64>,
    /// Theoretical bound or exact reference value the estimate is held to.
    pub bound: Option<f64>,
    pub pass: Option<bool>,
}

impl ReportRow {
    pub fn new(quantity: impl Into<String>, estimate: f64) -> Self {
        ReportRow {
            quantity: quantity.into(),
            school: None,
            t_or_epsilon: None,
            estimate,
            stderr: None,
            bound: None,
            pass: None,
        }
    }

    pub fn school(mut self, k: usize) -> Self {
        self.school = Some(k);
        self
    }

    pub fn at(mut self, x: f64) -> Self {
        self.t_or_epsilon = Some(x);
        self
    }

    pub fn stderr(mut self, se: f64) -> Self {
        self.stderr = Some(se);
        self
    }

    pub fn bound(mut self, b: f64) -> Self {
        self.bound = Some(b);
        self
    }

    pub fn pass(mut self, ok: bool) -> Self {
        self.pass = Some(ok);
        self
    }
}

/// Result of one estimation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub experiment: String,
    pub master_seed: u64,
    pub replications: u64,
    /// Not written to report files, which must be byte-identical on rerun.
    pub wall_clock: Duration,
    pub rows: Vec<ReportRow>,
    /// Free-form `key = value` lines for the text summary.
    pub notes: Vec<(String, String)>,
}

impl ExperimentReport {
    fn new(experiment: &str, cfg: &McConfig) -> Self {
        ExperimentReport {
            experiment: experiment.into(),
            master_seed: cfg.master_seed,
            replications: cfg.replications,
            wall_clock: Duration::ZERO,
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.into(), value.to_string()));
    }

    /// True when no row carries a failing pass flag.
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass != Some(false))
    }

    pub fn failing_rows(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| r.pass == Some(false))
    }

    pub fn rows_named<'a>(&'a self, quantity: &'a str) -> impl Iterator<Item = &'a ReportRow> + 'a {
        self.rows.iter().filter(move |r| r.quantity == quantity)
    }
}

fn check_school(inst: &MarketInstance, school: usize) -> Result<(), ExperimentError> {
    if school >= inst.m() {
        return Err(ExperimentError::SchoolOutOfRange { school, m: inst.m() });
    }
    Ok(())
}

/// Integer tallies from the deviation batch.
struct DeviationTally {
    /// `[school][eps]`: replications with `|γ_k − γ̄_k| >= ε`.
    per_school: Vec<Vec<u64>>,
    /// `[eps]`: replications with `max_k |γ_k − γ̄_k| >= ε`.
    max: Vec<u64>,
    position_sum: Vec<u64>,
    position_sq: Vec<u128>,
}

/// Fresh replications (stream [`labels::DEVIATION`]) compared with fixed
/// deterministic cutoff positions `bar` for the listed schools.
fn deviation_batch(inst: &MarketInstance, schools: &[usize], bar: &[usize], cfg: &McConfig) -> DeviationTally {
    let n = inst.n();
    let eps = &cfg.epsilon_grid;
    struct Acc {
        scratch: Scratch,
        tally: DeviationTally,
    }
    let width = schools.len();
    let acc = fold_replications(
        cfg,
        || Acc {
            scratch: Scratch::new(n),
            tally: DeviationTally {
                per_school: vec![vec![0; eps.len()]; width],
                max: vec![0; eps.len()],
                position_sum: vec![0; width],
                position_sq: vec![0; width],
            },
        },
        |a, rep| {
            a.scratch.replicate(inst, cfg.master_seed, labels::DEVIATION, rep);
            let cut = CutoffVector::from_assignment(&a.scratch.assignment);
            let mut worst = 0.0f64;
            for (i, &k) in schools.iter().enumerate() {
                let p = cut.position(k).unwrap_or(n);
                a.tally.position_sum[i] += p as u64;
                a.tally.position_sq[i] += (p as u128) * (p as u128);
                let dev = p.abs_diff(bar[i]) as f64 / n as f64;
                worst = worst.max(dev);
                for (e, &x) in eps.iter().enumerate() {
                    a.tally.per_school[i][e] += u64::from(dev >= x);
                }
            }
            for (e, &x) in eps.iter().enumerate() {
                a.tally.max[e] += u64::from(worst >= x);
            }
        },
        |a, b| {
            let (t, u) = (&mut a.tally, b.tally);
            for (x, y) in t.per_school.iter_mut().zip(u.per_school) {
                x.iter_mut().zip(y).for_each(|(p, q)| *p += q);
            }
            t.max.iter_mut().zip(u.max).for_each(|(p, q)| *p += q);
            t.position_sum.iter_mut().zip(u.position_sum).for_each(|(p, q)| *p += q);
            t.position_sq.iter_mut().zip(u.position_sq).for_each(|(p, q)| *p += q);
        },
    );
    acc.tally
}

/// `frequency <= bound + 3 s.e.`
fn tail_pass(freq: f64, se: f64, bound: f64) -> bool {
    freq <= bound + 3.0 * se
}

fn push_school_rows(
    report: &mut ExperimentReport,
    inst: &MarketInstance,
    school: usize,
    bar: usize,
    slot: usize,
    tally: &DeviationTally,
    cfg: &McConfig,
) {
    let n = inst.n() as f64;
    let reps = cfg.replications;
    let gamma_bar = bar as f64 / n;
    let ratio = inst.capacity(school) as f64 / gamma_bar;
    report.rows.push(ReportRow::new("gamma_bar", gamma_bar).school(school));
    let (mean, se) = crate::mc::mean_and_stderr(
        tally.position_sum[slot] as f64,
        tally.position_sq[slot] as f64,
        reps,
    );
    report.rows.push(ReportRow::new("mean_gamma", mean / n).school(school).stderr(se / n));
    for (e, &eps) in cfg.epsilon_grid.iter().enumerate() {
        let freq = tally.per_school[slot][e] as f64 / reps as f64;
        let se = bounds::binomial_stderr(freq, reps);
        let bound = bounds::school_tail_bound(eps, ratio);
        report.rows.push(
            ReportRow::new("tail_frequency", freq)
                .school(school)
                .at(eps)
                .stderr(se)
                .bound(bound)
                .pass(tail_pass(freq, se, bound)),
        );
    }
}

/// Single-school tail frequencies against `17 exp(−ε α_k / (32 γ̄_k))`.
///
/// `γ̄_k` comes from one batch of replications, the deviation frequencies
/// from an independent second batch of the same size.
pub fn cutoff_tail_experiment(
    inst: &MarketInstance,
    school: usize,
    cfg: &McConfig,
) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    check_school(inst, school)?;
    let start = Instant::now();
    let sums = demand_sums(inst, &[school], cfg, labels::GAMMA_BAR);
    let bar = match gamma_bar_from_sums(&sums[0], inst.capacity(school), cfg.replications) {
        GammaBar::Binding { position, .. } => position,
        GammaBar::NotBinding => return Err(ExperimentError::NotBindingSchool { schools: vec![school] }),
    };
    let tally = deviation_batch(inst, &[school], &[bar], cfg);
    let mut report = ExperimentReport::new("tail", cfg);
    push_school_rows(&mut report, inst, school, bar, 0, &tally, cfg);
    report.note("n", inst.n());
    report.note("m", inst.m());
    report.note("school", school);
    report.note("capacity", inst.capacity(school));
    report.wall_clock = start.elapsed();
    Ok(report)
}

/// Max-deviation frequencies over all schools against
/// `17 m exp(−ε η / 32)`, `η = min_k α_k / γ̄_k`, plus every school's own
/// tail rows.
pub fn uniform_tail_experiment(inst: &MarketInstance, cfg: &McConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let start = Instant::now();
    let m = inst.m();
    let schools: Vec<usize> = (0..m).collect();
    let sums = demand_sums(inst, &schools, cfg, labels::GAMMA_BAR);
    let bars: Vec<GammaBar> = sums
        .iter()
        .enumerate()
        .map(|(k, s)| gamma_bar_from_sums(s, inst.capacity(k), cfg.replications))
        .collect();
    let missing: Vec<usize> = (0..m).filter(|&k| bars[k] == GammaBar::NotBinding).collect();
    if !missing.is_empty() {
        return Err(ExperimentError::NotBindingSchool { schools: missing });
    }
    let bar: Vec<usize> = bars.iter().map(|b| b.position().expect("binding")).collect();
    let tally = deviation_batch(inst, &schools, &bar, cfg);

    let n = inst.n() as f64;
    let eta = (0..m)
        .map(|k| inst.capacity(k) as f64 / (bar[k] as f64 / n))
        .fold(f64::INFINITY, f64::min);
    let mut report = ExperimentReport::new("uniform-tail", cfg);
    for k in 0..m {
        push_school_rows(&mut report, inst, k, bar[k], k, &tally, cfg);
    }
    let reps = cfg.replications;
    for (e, &eps) in cfg.epsilon_grid.iter().enumerate() {
        let freq = tally.max[e] as f64 / reps as f64;
        let se = bounds::binomial_stderr(freq, reps);
        let bound = bounds::uniform_tail_bound(eps, eta, m);
        report.rows.push(
            ReportRow::new("max_tail_frequency", freq)
                .at(eps)
                .stderr(se)
                .bound(bound)
                .pass(tail_pass(freq, se, bound)),
        );
    }
    report.note("n", inst.n());
    report.note("m", m);
    report.note("eta", eta);
    report.wall_clock = start.elapsed();
    Ok(report)
}

/// Kolmogorov distance between the empirical CDF of `samples` and `cdf`.
pub fn sup_distance(samples: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let len = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (((i + 1) as f64 / len) - f).max(f - i as f64 / len)
        })
        .fold(0.0, f64::max)
}

/// Lottery-unit cutoffs: for each school, the largest draw among its
/// admitted students (0 if nobody was admitted).
fn lottery_cutoffs(assignment: &rsd_core::Assignment, draws: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0f64; m];
    for (i, &x) in draws.iter().enumerate() {
        if let Some(k) = assignment.school_of(i) {
            out[k] = out[k].max(x);
        }
    }
    out
}

fn block_market(n: usize, m: usize) -> Result<MarketInstance, ExperimentError> {
    let spec = GeneratorSpec::balanced(GeneratorKind::Block, n, m, 0);
    Ok(generate_instance(&spec)?)
}

/// Lottery-model cutoffs in the block market: empirical CDF of each
/// school's cutoff against `x^c`, and its mean against both `1 − 1/c` and
/// `1 − 1/(c+1)`.
///
/// Pass flags: sup-distance within the 99.9% DKW half-width, and the mean
/// within 3 s.e. of `1 − 1/(c+1)`. The `1 − 1/c` row is reported without a
/// flag.
pub fn toy_model_law_check(n: usize, m: usize, cfg: &McConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let start = Instant::now();
    let inst = block_market(n, m)?;
    let c = n / m;
    let per_rep: Vec<(Vec<f64>, Vec<f64>)> = map_replications(cfg, |rep| {
        let mut rng = substream(cfg.master_seed, labels::LOTTERY, rep);
        let (pi, draws) = lottery_model_permutation(n, &mut rng);
        let asg = rsd_core::run_rsd(&inst, &pi);
        (lottery_cutoffs(&asg, &draws, m), CutoffVector::from_assignment(&asg).gammas())
    });
    let reps = cfg.replications;
    let dkw = bounds::dkw_halfwidth(reps, 1e-3);
    let mut report = ExperimentReport::new("toy-law", cfg);
    let formula = bounds::block_cutoff_mean_formula(c);
    let integral = bounds::block_cutoff_mean_integral(c);
    for k in 0..m {
        let mut samples: Vec<f64> = per_rep.iter().map(|(l, _)| l[k]).collect();
        let sum: f64 = samples.iter().sum();
        let sq: f64 = samples.iter().map(|x| x * x).sum();
        let (mean, se) = crate::mc::mean_and_stderr(sum, sq, reps);
        let below_half = samples.iter().filter(|&&x| x <= 0.5).count() as f64 / reps as f64;
        let d = sup_distance(&mut samples, |x| bounds::block_cutoff_cdf(x, c));
        report.rows.push(ReportRow::new("cdf_sup_distance", d).school(k).bound(dkw).pass(d <= dkw));
        let ref_half = bounds::block_cutoff_cdf(0.5, c);
        report.rows.push(
            ReportRow::new("empirical_cdf", below_half)
                .school(k)
                .at(0.5)
                .stderr(bounds::binomial_stderr(ref_half, reps))
                .bound(ref_half),
        );
        report.rows.push(
            ReportRow::new("mean_lottery_cutoff", mean)
                .school(k)
                .stderr(se)
                .bound(integral)
                .pass((mean - integral).abs() <= 3.0 * se),
        );
        report.rows.push(ReportRow::new("mean_vs_formula_1-1/c", mean - formula).school(k).stderr(se).bound(formula));
        let rank_mean = per_rep.iter().map(|(_, g)| g[k]).sum::<f64>() / reps as f64;
        report.rows.push(ReportRow::new("mean_rank_cutoff", rank_mean).school(k));
    }
    report.rows.push(ReportRow::new("reference_mean_formula", formula));
    report.rows.push(ReportRow::new("reference_mean_integral", integral));
    report.rows.push(ReportRow::new("reference_mean_discrepancy", integral - formula));
    report.rows.push(ReportRow::new("reference_cdf", bounds::block_cutoff_cdf(0.5, c)).at(0.5));
    report.note("n", n);
    report.note("m", m);
    report.note("c", c);
    report.note("dkw_halfwidth_99.9", dkw);
    report.wall_clock = start.elapsed();
    Ok(report)
}

/// Parameters of the phase-transition study.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTransitionParams {
    pub m: usize,
    /// Requested `α` in `n = m ln m / α`.
    pub alpha: f64,
    pub epsilon: f64,
    /// Additional thresholds `t` to evaluate.
    pub extra_t: Vec<f64>,
}

/// Block market sized from `(m, α)`: `c = round(ln m / α)` (at least 1),
/// `n = c m`, and the effective `α' = m ln m / n = ln m / c` after
/// rounding.
pub fn phase_transition_shape(m: usize, alpha: f64) -> Result<(usize, usize, f64), ExperimentError> {
    if m < 2 || !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ExperimentError::Config("phase transition needs m >= 2 and alpha > 0".into()));
    }
    let ln_m = (m as f64).ln();
    let c = ((ln_m / alpha).round() as usize).max(1);
    Ok((c * m, c, ln_m / c as f64))
}

/// `P(min_k γ_k > t)` in lottery units against the exact `(1 − t^c)^m`.
///
/// Evaluated at `t = e^{−α}`, `e^{−(1+ε)α}`, the same two points for the
/// effective `α'`, and every `extra_t`. At `t = e^{−α'}` the exact value is
/// `(1 − 1/m)^m`, whose limit `1/e` is reported as the asymptotic reference;
/// at `e^{−(1+ε)α'}` the reference is 1. Rank-based cutoffs are reported
/// alongside without flags.
pub fn phase_transition_experiment(
    params: &PhaseTransitionParams,
    cfg: &McConfig,
) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    if !(params.epsilon > 0.0) {
        return Err(ExperimentError::Config("epsilon must be positive".into()));
    }
    let start = Instant::now();
    let m = params.m;
    let (n, c, alpha_eff) = phase_transition_shape(m, params.alpha)?;
    let inst = block_market(n, m)?;
    let mins: Vec<(f64, f64)> = map_replications(cfg, |rep| {
        let mut rng = substream(cfg.master_seed, labels::LOTTERY, rep);
        let (pi, draws) = lottery_model_permutation(n, &mut rng);
        let asg = rsd_core::run_rsd(&inst, &pi);
        let lot = lottery_cutoffs(&asg, &draws, m).into_iter().fold(f64::INFINITY, f64::min);
        let rank = CutoffVector::from_assignment(&asg).gammas().into_iter().fold(f64::INFINITY, f64::min);
        (lot, rank)
    });
    let reps = cfg.replications;
    let a = params.alpha;
    let e = params.epsilon;
    let mut points: Vec<(&str, f64, Option<f64>)> = vec![
        ("t=exp(-alpha)", (-a).exp(), None),
        ("t=exp(-(1+eps)alpha)", (-(1.0 + e) * a).exp(), None),
        ("t=exp(-alpha_eff)", (-alpha_eff).exp(), Some((-1f64).exp())),
        ("t=exp(-(1+eps)alpha_eff)", (-(1.0 + e) * alpha_eff).exp(), Some(1.0)),
    ];
    for &t in &params.extra_t {
        points.push(("t", t, None));
    }
    let mut report = ExperimentReport::new("phase-transition", cfg);
    for (name, t, asymptotic) in points {
        let hits = mins.iter().filter(|(l, _)| *l > t).count() as f64 / reps as f64;
        let rank_hits = mins.iter().filter(|(_, r)| *r > t).count() as f64 / reps as f64;
        let exact = bounds::min_cutoff_survival(t, c, m);
        let se = bounds::binomial_stderr(exact, reps);
        report.rows.push(
            ReportRow::new(format!("p_min_cutoff_gt_t[{name}]"), hits)
                .at(t)
                .stderr(se)
                .bound(exact)
                .pass((hits - exact).abs() <= 3.0 * se),
        );
        report.rows.push(ReportRow::new(format!("exact_law[{name}]"), exact).at(t));
        report.rows.push(
            ReportRow::new(format!("p_min_rank_cutoff_gt_t[{name}]"), rank_hits)
                .at(t)
                .stderr(bounds::binomial_stderr(rank_hits, reps)),
        );
        if let Some(reference) = asymptotic {
            report.rows.push(ReportRow::new(format!("asymptotic_reference[{name}]"), reference).at(t));
        }
    }
    report.note("m", m);
    report.note("alpha_requested", a);
    report.note("alpha_effective", alpha_eff);
    report.note("epsilon", e);
    report.note("n_adjusted", n);
    report.note("c_adjusted", c);
    report.wall_clock = start.elapsed();
    Ok(report)
}

/// Lottery probabilities as report rows (exploratory, no flags).
pub fn lottery_experiment(inst: &MarketInstance, cfg: &McConfig) -> Result<ExperimentReport, ExperimentError> {
    cfg.validate()?;
    let start = Instant::now();
    let lm = crate::mc::estimate_lottery_probabilities(inst, cfg);
    let m = inst.m();
    let mut report = ExperimentReport::new("lottery", cfg);
    for i in 0..inst.n() {
        for k in 0..=m {
            let p = lm.probability(i, k);
            let row = if k < m {
                ReportRow::new(format!("assignment_probability[student={i}]"), p).school(k)
            } else {
                ReportRow::new(format!("unmatched_probability[student={i}]"), p)
            };
            report.rows.push(row.stderr(lm.stderr(i, k)));
        }
    }
    report.note("n", inst.n());
    report.note("m", m);
    report.wall_clock = start.elapsed();
    Ok(report)
}
