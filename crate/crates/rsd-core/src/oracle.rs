//! Exact answers for small markets by running RSD under all `n!` orders.
//!
//! Every aggregate is an integer numerator over the common denominator
//! `n!`; no floating point enters the aggregation.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::OracleError;
use crate::market::MarketInstance;
use crate::permutation::Permutation;
use crate::rsd::{for_each_demand_step, Assignment};

/// Largest market the oracle will enumerate (`9! = 362 880` orders).
pub const ORACLE_MAX_STUDENTS: usize = 9;

/// Exact distributional facts about RSD on one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResult {
    pub n: usize,
    pub m: usize,
    /// `n!`, the denominator of every probability below.
    pub denominator: u64,
    /// `[k][t]`: sum over orders of `τ_k(t)`.
    pub demand_sum: Vec<Vec<u64>>,
    /// `[k][t]`: sum over orders of `τ_k(t)²`.
    pub demand_sq_sum: Vec<Vec<u64>>,
    /// `[k][p]`: number of orders whose cutoff position is `p` (1-based);
    /// `p = 0` counts orders where school `k` does not fill.
    pub cutoff_counts: Vec<Vec<u64>>,
    /// `[i][k]`: number of orders assigning student `i` to school `k`;
    /// column `m` counts unmatched outcomes.
    pub lottery_counts: Vec<Vec<u64>>,
}

impl OracleResult {
    pub fn mean_demand(&self, school: usize, t: usize) -> f64 {
        self.demand_sum[school][t] as f64 / self.denominator as f64
    }

    /// Exact variance of `τ_k(t)` under a uniform order.
    pub fn demand_variance(&self, school: usize, t: usize) -> f64 {
        let d = self.denominator as f64;
        let mean = self.demand_sum[school][t] as f64 / d;
        (self.demand_sq_sum[school][t] as f64 / d - mean * mean).max(0.0)
    }

    /// Numerators (over `n!`) of `E τ_k(t) − E τ_k(t−1)` for `t = 1..=n`.
    pub fn first_differences(&self, school: usize) -> Vec<u64> {
        self.demand_sum[school].windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// `inf{t : E τ_k(t) >= α_k}`, exactly, or `None` if never reached.
    pub fn gamma_bar_position(&self, school: usize, capacity: u32) -> Option<usize> {
        let level = capacity as u64 * self.denominator;
        self.demand_sum[school].iter().position(|&s| s >= level)
    }

    pub fn lottery_probability(&self, student: usize, outcome: usize) -> f64 {
        self.lottery_counts[student][outcome] as f64 / self.denominator as f64
    }

    pub fn cutoff_probability(&self, school: usize, position: usize) -> f64 {
        self.cutoff_counts[school][position] as f64 / self.denominator as f64
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

/// Calls `f` once for each of the `n!` orders (Heap's algorithm).
pub fn for_each_permutation<F: FnMut(&Permutation)>(n: usize, mut f: F) {
    let mut p = Permutation::identity(n);
    f(&p);
    let mut c = vec![0usize; n];
    let mut i = 1;
    while i < n {
        if c[i] < i {
            let a = if i % 2 == 0 { 0 } else { c[i] };
            let (sa, sb) = (p.student_at(a), p.student_at(i));
            p.transpose_in_place(sa, sb);
            f(&p);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Enumerates every order of an instance with at most
/// [`ORACLE_MAX_STUDENTS`] students.
pub fn enumerate_oracle(inst: &MarketInstance) -> Result<OracleResult, OracleError> {
    let (n, m) = (inst.n(), inst.m());
    if n > ORACLE_MAX_STUDENTS {
        return Err(OracleError::InstanceTooLarge { n, max: ORACLE_MAX_STUDENTS });
    }
    let mut out = OracleResult {
        n,
        m,
        denominator: factorial(n),
        demand_sum: vec![vec![0; n + 1]; m],
        demand_sq_sum: vec![vec![0; n + 1]; m],
        cutoff_counts: vec![vec![0; n + 1]; m],
        lottery_counts: vec![vec![0; m + 1]; n],
    };
    let mut asg = Assignment::default();
    let mut step = vec![vec![false; m]; n];
    let mut tau = vec![0u64; m];
    for_each_permutation(n, |pi| {
        asg.run_into(inst, pi);
        for row in step.iter_mut() {
            row.fill(false);
        }
        for_each_demand_step(inst, pi, &asg, |rank, k| step[rank][k] = true);
        tau.fill(0);
        for (r, row) in step.iter().enumerate() {
            for k in 0..m {
                tau[k] += row[k] as u64;
                out.demand_sum[k][r + 1] += tau[k];
                out.demand_sq_sum[k][r + 1] += tau[k] * tau[k];
            }
        }
        for k in 0..m {
            let pos = asg.exhaustion_rank(k).map_or(0, |r| r + 1);
            out.cutoff_counts[k][pos] += 1;
        }
        for i in 0..n {
            out.lottery_counts[i][asg.school_of(i).unwrap_or(m)] += 1;
        }
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;

    #[test]
    fn heap_enumeration_visits_every_order_once() {
        for n in 1..=6 {
            let mut seen = BTreeSet::new();
            for_each_permutation(n, |p| {
                seen.insert(p.order().to_vec());
            });
            assert_eq!(seen.len() as u64, factorial(n));
        }
    }

    #[test]
    fn two_students_one_seat() {
        let inst = MarketInstance::from_lists(&[1], &[vec![0], vec![0]]).unwrap();
        let o = enumerate_oracle(&inst).unwrap();
        assert_eq!(o.denominator, 2);
        assert_eq!(o.lottery_counts, vec![vec![1, 1], vec![1, 1]]);
    }

    #[test]
    fn three_students_two_seats() {
        let inst = MarketInstance::from_lists(&[1, 1], &[vec![0, 1], vec![0, 1], vec![0, 1]]).unwrap();
        let o = enumerate_oracle(&inst).unwrap();
        for i in 0..3 {
            // 2 of 6 orders put student i first, 2 second, 2 last
            assert_eq!(o.lottery_counts[i], vec![2, 2, 2]);
        }
        assert_eq!(o.first_differences(0), vec![6, 6, 6]);
        assert_eq!(o.gamma_bar_position(0, 1), Some(1));
        assert_eq!(o.demand_variance(0, 2), 0.0);
    }

    #[test]
    fn block_gamma_bar_is_one() {
        let inst = MarketInstance::from_lists(&[2, 2], &[vec![0], vec![0], vec![1], vec![1]]).unwrap();
        let o = enumerate_oracle(&inst).unwrap();
        // E τ_k(t) = t/2, reaching capacity 2 at t = 4
        for k in 0..2 {
            assert_eq!(o.demand_sum[k], vec![0, 12, 24, 36, 48]);
            assert_eq!(o.gamma_bar_position(k, 2), Some(4));
        }
        // cutoff position is the later of two random positions: P(p) = (p-1)/6
        assert_eq!(o.cutoff_counts[0], vec![0, 0, 4, 8, 12]);
    }

    #[test]
    fn guard_rejects_large_instances() {
        let prefs = vec![vec![0u32]; 10];
        let inst = MarketInstance::from_lists(&[10], &prefs).unwrap();
        assert_eq!(
            enumerate_oracle(&inst).unwrap_err(),
            OracleError::InstanceTooLarge { n: 10, max: 9 }
        );
    }

    #[test]
    fn distributions_sum_to_one() {
        let inst =
            MarketInstance::from_lists(&[2, 1], &[vec![0], vec![0, 1], vec![1, 0], vec![1], vec![1, 0]])
                .unwrap();
        let o = enumerate_oracle(&inst).unwrap();
        for row in &o.lottery_counts {
            assert_eq!(row.iter().sum::<u64>(), o.denominator);
        }
        for row in &o.cutoff_counts {
            assert_eq!(row.iter().sum::<u64>(), o.denominator);
        }
    }
}
