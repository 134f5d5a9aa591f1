//! Monte Carlo estimators held against the exact enumeration oracle.

use rsd_core::{enumerate_oracle, MarketInstance, OracleError, OracleResult};

use crate::experiments::{ExperimentError, ReportRow};
use crate::mc::{demand_sums, estimate_lottery_probabilities, gamma_bar_from_sums, labels, McConfig};

/// Half-width multiplier for every calibration cell.
pub const Z: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub enum CellKind {
    /// `E τ_k(t)`.
    MeanDemand { school: usize, t: usize },
    /// Estimated `n γ̄_k` (`None` = not binding) against the exact curve.
    GammaBar { school: usize, estimate: Option<usize>, exact: Option<usize> },
    /// `P(μ(i) = k)`, `k = m` meaning unmatched.
    Lottery { student: usize, outcome: usize },
}

/// One estimate with its exact counterpart and the exact-variance
/// standard error of the estimator.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub kind: CellKind,
    pub estimate: f64,
    pub exact: f64,
    pub stderr: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub replications: u64,
    pub master_seed: u64,
    pub cells: Vec<Cell>,
}

impl Calibration {
    pub fn passed(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> usize {
        self.cells.iter().filter(|c| !c.pass).count()
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        self.cells
            .iter()
            .map(|c| {
                let (q, school, t) = match &c.kind {
                    CellKind::MeanDemand { school, t } => ("mean_demand".to_string(), Some(*school), Some(*t as f64)),
                    CellKind::GammaBar { school, .. } => ("gamma_bar_position".to_string(), Some(*school), None),
                    CellKind::Lottery { student, outcome } => {
                        (format!("lottery_probability[student={student}]"), Some(*outcome), None)
                    }
                };
                let mut row = ReportRow::new(q, c.estimate).stderr(c.stderr).bound(c.exact).pass(c.pass);
                row.school = school;
                row.t_or_epsilon = t;
                row
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CalibrationError {
    Oracle(OracleError),
    Config(ExperimentError),
}

impl std::fmt::Display for CalibrationError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CalibrationError::Oracle(e) => e.fmt(f),
            CalibrationError::Config(e) => e.fmt(f),
        }
    }
}

impl std::error::Error for CalibrationError {}

fn within(estimate: f64, exact: f64, se: f64) -> bool {
    (estimate - exact).abs() <= Z * se
}

/// Whether an estimated crossing point `p` (or `None`) is consistent with
/// the exact mean-demand curve: `E τ(p) >= α − Z se(p)` and
/// `E τ(p − 1) < α + Z se(p − 1)`.
fn crossing_consistent(o: &OracleResult, reps: u64, school: usize, capacity: u32, p: Option<usize>) -> bool {
    let alpha = capacity as f64;
    let se = |t: usize| (o.demand_variance(school, t) / reps as f64).sqrt();
    let below_ok = |t: usize| o.mean_demand(school, t) < alpha + Z * se(t);
    match p {
        Some(p) => {
            let reached = o.mean_demand(school, p) >= alpha - Z * se(p);
            reached && (p == 0 || below_ok(p - 1))
        }
        None => below_ok(o.n),
    }
}

/// Runs the exact oracle and the Monte Carlo estimators on `inst` and
/// compares every mean-demand point, every `γ̄_k`, and every
/// lottery-matrix entry.
pub fn mc_vs_oracle(inst: &MarketInstance, cfg: &McConfig) -> Result<Calibration, CalibrationError> {
    cfg.validate().map_err(CalibrationError::Config)?;
    let o = enumerate_oracle(inst).map_err(CalibrationError::Oracle)?;
    calibrate_against(inst, &o, cfg).map_err(CalibrationError::Config)
}

/// As [`mc_vs_oracle`] with a precomputed oracle result.
pub fn calibrate_against(inst: &MarketInstance, o: &OracleResult, cfg: &McConfig) -> Result<Calibration, ExperimentError> {
    cfg.validate()?;
    let (n, m) = (inst.n(), inst.m());
    let reps = cfg.replications;
    let schools: Vec<usize> = (0..m).collect();
    let sums = demand_sums(inst, &schools, cfg, labels::ORDER);
    let mut cells = Vec::new();
    for k in 0..m {
        for t in 0..=n {
            let estimate = sums[k][t] as f64 / reps as f64;
            let exact = o.mean_demand(k, t);
            let se = (o.demand_variance(k, t) / reps as f64).sqrt();
            cells.push(Cell {
                kind: CellKind::MeanDemand { school: k, t },
                estimate,
                exact,
                stderr: se,
                pass: within(estimate, exact, se),
            });
        }
        let cap = inst.capacity(k);
        let est = gamma_bar_from_sums(&sums[k], cap, reps).position();
        let exact = o.gamma_bar_position(k, cap);
        let as_gamma = |p: Option<usize>| p.map_or(1.0, |p| p as f64 / n as f64);
        let se = est.map_or(0.0, |p| (o.demand_variance(k, p) / reps as f64).sqrt());
        cells.push(Cell {
            kind: CellKind::GammaBar { school: k, estimate: est, exact },
            estimate: as_gamma(est),
            exact: as_gamma(exact),
            stderr: se,
            pass: crossing_consistent(o, reps, k, cap, est),
        });
    }
    let lm = estimate_lottery_probabilities(inst, cfg);
    for i in 0..n {
        for k in 0..=m {
            let exact = o.lottery_probability(i, k);
            let estimate = lm.probability(i, k);
            let se = crate::bounds::binomial_stderr(exact, reps);
            cells.push(Cell {
                kind: CellKind::Lottery { student: i, outcome: k },
                estimate,
                exact,
                stderr: se,
                pass: within(estimate, exact, se),
            });
        }
    }
    Ok(Calibration { replications: reps, master_seed: cfg.master_seed, cells })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rsd_core::{generate_instance, GeneratorKind, GeneratorSpec};

    #[test]
    fn block_and_all_prefer_pass() {
        let block = generate_instance(&GeneratorSpec::balanced(GeneratorKind::Block, 4, 2, 0)).unwrap();
        let all = MarketInstance::from_lists(&[1, 1], &vec![vec![0u32, 1]; 3]).unwrap();
        for inst in [block, all] {
            let c = mc_vs_oracle(&inst, &McConfig::new(10_000, 5)).unwrap();
            assert!(c.passed(), "{:?}", c.cells.iter().filter(|c| !c.pass).collect::<Vec<_>>());
        }
    }

    #[test]
    fn exact_gamma_bar_for_block() {
        let block = generate_instance(&GeneratorSpec::balanced(GeneratorKind::Block, 4, 2, 0)).unwrap();
        let c = mc_vs_oracle(&block, &McConfig::new(2000, 1)).unwrap();
        let g: Vec<_> = c
            .cells
            .iter()
            .filter_map(|c| match c.kind {
                CellKind::GammaBar { exact, .. } => Some(exact),
                _ => None,
            })
            .collect();
        assert_eq!(g, vec![Some(4), Some(4)]);
    }

    #[test]
    fn single_replication_runs() {
        let inst = MarketInstance::from_lists(&[1], &[vec![0], vec![0]]).unwrap();
        let c = mc_vs_oracle(&inst, &McConfig::new(1, 9)).unwrap();
        assert_eq!(c.replications, 1);
        assert!(!c.cells.is_empty());
    }

    #[test]
    fn oversized_instance_is_refused() {
        let inst = MarketInstance::from_lists(&[1], &vec![vec![0u32]; 12]).unwrap();
        assert!(matches!(
            mc_vs_oracle(&inst, &McConfig::new(10, 0)),
            Err(CalibrationError::Oracle(OracleError::InstanceTooLarge { .. }))
        ));
    }
}
