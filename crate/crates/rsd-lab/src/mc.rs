//! Seeded replication engine and the basic Monte Carlo estimators.

use rayon::prelude::*;
use rsd_core::generators::resample_permutation;
use rsd_core::rsd::{demand_trajectory_from, for_each_demand_step};
use rsd_core::seed::{substream, StreamRng};
use rsd_core::{Assignment, MarketInstance, Permutation};
use serde::{Deserialize, Serialize};

use crate::experiments::ExperimentError;

pub const DEFAULT_EPSILON_GRID: [f64; 6] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.5];

/// Stream labels. Estimators that share a label see the same orders.
pub mod labels {
    pub const ORDER: &str = "order";
    pub const GAMMA_BAR: &str = "gamma-bar-batch";
    pub const DEVIATION: &str = "deviation-batch";
    pub const LOTTERY: &str = "lottery-draws";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub replications: u64,
    pub master_seed: u64,
    pub epsilon_grid: Vec<f64>,
    /// Worker-count hint; results never depend on it.
    pub parallelism: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            replications: 10_000,
            master_seed: 0x5EED,
            epsilon_grid: DEFAULT_EPSILON_GRID.to_vec(),
            parallelism: 1,
        }
    }
}

impl McConfig {
    pub fn new(replications: u64, master_seed: u64) -> Self {
        McConfig { replications, master_seed, ..McConfig::default() }
    }

    pub fn with_parallelism(mut self, workers: usize) -> Self {
        self.parallelism = workers;
        self
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.replications == 0 {
            return Err(ExperimentError::Config("replications must be at least 1".into()));
        }
        let g = &self.epsilon_grid;
        if g.iter().any(|&e| !(e > 0.0 && e < 1.0)) || g.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ExperimentError::Config(
                "epsilon_grid must be strictly ascending within (0, 1)".into(),
            ));
        }
        Ok(())
    }

    fn pool(&self) -> rayon::ThreadPool {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.parallelism.max(1))
            .build()
            .expect("thread pool")
    }
}

/// Folds replications `0..cfg.replications` into one accumulator per
/// worker (contiguous blocks of replications), then merges the blocks in
/// order.
///
/// Block boundaries depend on the worker count, so accumulators must hold
/// exact integer sums (or otherwise merge associatively and commutatively)
/// for the result to be identical across worker counts.
pub fn fold_replications<A, I, B, M>(cfg: &McConfig, init: I, body: B, merge: M) -> A
where
    A: Send,
    I: Fn() -> A + Sync,
    B: Fn(&mut A, u64) + Sync,
    M: Fn(&mut A, A),
{
    let reps = cfg.replications;
    let blocks = (cfg.parallelism.max(1) as u64).min(reps).max(1);
    let run_block = |b: u64| {
        let (lo, hi) = (b * reps / blocks, (b + 1) * reps / blocks);
        let mut acc = init();
        for r in lo..hi {
            body(&mut acc, r);
        }
        acc
    };
    let parts: Vec<A> = if cfg.parallelism <= 1 {
        (0..blocks).map(run_block).collect()
    } else {
        cfg.pool().install(|| (0..blocks).into_par_iter().map(run_block).collect())
    };
    let mut it = parts.into_iter();
    let mut acc = it.next().expect("at least one block");
    for p in it {
        merge(&mut acc, p);
    }
    acc
}

/// One value per replication, in replication order.
pub fn map_replications<T, F>(cfg: &McConfig, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Send + Sync,
{
    let n = cfg.replications;
    if cfg.parallelism <= 1 {
        (0..n).map(f).collect()
    } else {
        cfg.pool().install(|| (0..n).into_par_iter().map(f).collect())
    }
}

/// Reusable per-block buffers for one RSD replication.
pub struct Scratch {
    pub order: Permutation,
    pub assignment: Assignment,
}

impl Scratch {
    pub fn new(n: usize) -> Self {
        Scratch { order: Permutation::identity(n), assignment: Assignment::default() }
    }

    /// Draws the order for replication `rep` of stream `label` and runs RSD.
    pub fn replicate(&mut self, inst: &MarketInstance, seed: u64, label: &str, rep: u64) {
        let mut rng: StreamRng = substream(seed, label, rep);
        resample_permutation(&mut self.order, &mut rng);
        self.assignment.run_into(inst, &self.order);
    }
}

/// Mean and standard error from integer sums over `reps` replications.
pub fn mean_and_stderr(sum: f64, sum_sq: f64, reps: u64) -> (f64, f64) {
    let r = reps as f64;
    let mean = sum / r;
    if reps < 2 {
        return (mean, f64::INFINITY);
    }
    let var = ((sum_sq - sum * sum / r) / (r - 1.0)).max(0.0);
    (mean, (var / r).sqrt())
}

/// Estimated `t ↦ E τ_k(t)` with per-point standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanDemand {
    pub school: usize,
    pub replications: u64,
    /// `Σ_r τ_k(t)` over replications, exact.
    pub sums: Vec<u64>,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

pub fn estimate_mean_demand(inst: &MarketInstance, school: usize, cfg: &McConfig) -> MeanDemand {
    estimate_mean_demand_on(inst, school, cfg, labels::ORDER)
}

pub fn estimate_mean_demand_on(inst: &MarketInstance, school: usize, cfg: &McConfig, label: &str) -> MeanDemand {
    let n = inst.n();
    struct Acc {
        scratch: Scratch,
        sum: Vec<u64>,
        sq: Vec<u128>,
    }
    let acc = fold_replications(
        cfg,
        || Acc { scratch: Scratch::new(n), sum: vec![0; n + 1], sq: vec![0; n + 1] },
        |a, rep| {
            a.scratch.replicate(inst, cfg.master_seed, label, rep);
            let tr = demand_trajectory_from(inst, &a.scratch.order, &a.scratch.assignment, school);
            for (t, &v) in tr.values.iter().enumerate() {
                a.sum[t] += v as u64;
                a.sq[t] += (v as u128) * (v as u128);
            }
        },
        |a, b| {
            a.sum.iter_mut().zip(b.sum).for_each(|(x, y)| *x += y);
            a.sq.iter_mut().zip(b.sq).for_each(|(x, y)| *x += y);
        },
    );
    let (mean, stderr) = acc
        .sum
        .iter()
        .zip(&acc.sq)
        .map(|(&s, &q)| mean_and_stderr(s as f64, q as f64, cfg.replications))
        .unzip();
    MeanDemand { school, replications: cfg.replications, sums: acc.sum, mean, stderr }
}

/// Exact sums `Σ_r τ_k(t)` for several schools at once (rows follow
/// `schools`), from the per-step demand increments.
pub fn demand_sums(inst: &MarketInstance, schools: &[usize], cfg: &McConfig, label: &str) -> Vec<Vec<u64>> {
    let (n, m) = (inst.n(), inst.m());
    let mut slot = vec![usize::MAX; m];
    for (i, &k) in schools.iter().enumerate() {
        slot[k] = i;
    }
    let width = schools.len();
    struct Acc {
        scratch: Scratch,
        // steps[slot * n + rank]: replications in which τ steps up at rank + 1
        steps: Vec<u32>,
    }
    let acc = fold_replications(
        cfg,
        || Acc { scratch: Scratch::new(n), steps: vec![0; width * n] },
        |a, rep| {
            a.scratch.replicate(inst, cfg.master_seed, label, rep);
            let steps = &mut a.steps;
            for_each_demand_step(inst, &a.scratch.order, &a.scratch.assignment, |rank, k| {
                let s = slot[k];
                if s != usize::MAX {
                    steps[s * n + rank] += 1;
                }
            });
        },
        |a, b| a.steps.iter_mut().zip(b.steps).for_each(|(x, y)| *x += y),
    );
    (0..width)
        .map(|s| {
            let mut out = Vec::with_capacity(n + 1);
            out.push(0);
            for r in 0..n {
                out.push(out[r] + acc.steps[s * n + r] as u64);
            }
            out
        })
        .collect()
}

/// Estimated deterministic cutoff of one school.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaBar {
    /// First `t` with estimated `E τ_k(t) >= α_k`; `gamma = position / n`.
    Binding { position: usize, gamma: f64 },
    /// The estimated mean demand never reaches capacity.
    NotBinding,
}

impl GammaBar {
    pub fn position(&self) -> Option<usize> {
        match self {
            GammaBar::Binding { position, .. } => Some(*position),
            GammaBar::NotBinding => None,
        }
    }
}

/// `inf{t : Σ_r τ_k(t) >= α_k · R}` on exact integer sums.
pub fn gamma_bar_from_sums(sums: &[u64], capacity: u32, reps: u64) -> GammaBar {
    let n = sums.len() - 1;
    let level = capacity as u64 * reps;
    match sums.iter().position(|&s| s >= level) {
        Some(position) => GammaBar::Binding { position, gamma: position as f64 / n as f64 },
        None => GammaBar::NotBinding,
    }
}

pub fn estimate_gamma_bar(inst: &MarketInstance, school: usize, cfg: &McConfig) -> GammaBar {
    let sums = demand_sums(inst, &[school], cfg, labels::ORDER);
    gamma_bar_from_sums(&sums[0], inst.capacity(school), cfg.replications)
}

pub fn estimate_gamma_bars(inst: &MarketInstance, cfg: &McConfig, label: &str) -> Vec<GammaBar> {
    let schools: Vec<usize> = (0..inst.m()).collect();
    demand_sums(inst, &schools, cfg, label)
        .iter()
        .enumerate()
        .map(|(k, s)| gamma_bar_from_sums(s, inst.capacity(k), cfg.replications))
        .collect()
}

/// Empirical assignment frequencies; column `m` is Unmatched.
#[derive(Debug, Clone, PartialEq)]
pub struct LotteryMatrix {
    pub replications: u64,
    pub counts: Vec<Vec<u64>>,
}

impl LotteryMatrix {
    pub fn probability(&self, student: usize, outcome: usize) -> f64 {
        self.counts[student][outcome] as f64 / self.replications as f64
    }

    pub fn stderr(&self, student: usize, outcome: usize) -> f64 {
        crate::bounds::binomial_stderr(self.probability(student, outcome), self.replications)
    }

    /// Row sums in counts; each equals the replication count.
    pub fn row_totals(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }
}

pub fn estimate_lottery_probabilities(inst: &MarketInstance, cfg: &McConfig) -> LotteryMatrix {
    let (n, m) = (inst.n(), inst.m());
    struct Acc {
        scratch: Scratch,
        counts: Vec<u64>,
    }
    let acc = fold_replications(
        cfg,
        || Acc { scratch: Scratch::new(n), counts: vec![0; n * (m + 1)] },
        |a, rep| {
            a.scratch.replicate(inst, cfg.master_seed, labels::ORDER, rep);
            for i in 0..n {
                let k = a.scratch.assignment.school_of(i).unwrap_or(m);
                a.counts[i * (m + 1) + k] += 1;
            }
        },
        |a, b| a.counts.iter_mut().zip(b.counts).for_each(|(x, y)| *x += y),
    );
    LotteryMatrix {
        replications: cfg.replications,
        counts: acc.counts.chunks(m + 1).map(|c| c.to_vec()).collect(),
    }
}
