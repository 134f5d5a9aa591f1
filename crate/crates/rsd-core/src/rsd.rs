//! Running the mechanism and reading cutoffs and demand off the outcome.
//!
//! Positions `t` passed to demand trajectories count students: `τ_k(t)`
//! looks at the first `t` students in picking order, so `t` ranges over
//! `0..=n` and `values[0] = 0`.

use alloc::vec;
use alloc::vec::Vec;

use crate::market::MarketInstance;
use crate::permutation::Permutation;

const UNMATCHED: u32 = u32::MAX;
const NEVER: u32 = u32::MAX;

/// Outcome of one RSD run.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    school_of: Vec<u32>,
    seats_filled: Vec<u32>,
    exhaustion_rank: Vec<u32>,
}

impl Assignment {
    /// School assigned to `student`, `None` if unmatched.
    #[inline]
    pub fn school_of(&self, student: usize) -> Option<usize> {
        match self.school_of[student] {
            UNMATCHED => None,
            k => Some(k as usize),
        }
    }

    pub fn seats_filled(&self, school: usize) -> u32 {
        self.seats_filled[school]
    }

    /// 0-based rank of the student who took the school's last seat.
    pub fn exhaustion_rank(&self, school: usize) -> Option<usize> {
        match self.exhaustion_rank[school] {
            NEVER => None,
            r => Some(r as usize),
        }
    }

    pub fn n(&self) -> usize {
        self.school_of.len()
    }

    pub fn m(&self) -> usize {
        self.seats_filled.len()
    }

    /// `school_of` with `-1` for unmatched students.
    pub fn to_signed(&self) -> Vec<i64> {
        self.school_of
            .iter()
            .map(|&k| if k == UNMATCHED { -1 } else { k as i64 })
            .collect()
    }

    /// Runs RSD, reusing this value's buffers.
    pub fn run_into(&mut self, inst: &MarketInstance, pi: &Permutation) {
        self.run_with_slack(inst, pi, 0);
    }

    /// `slack` extra seats per school beyond capacity; only the verifier's
    /// self-test uses a nonzero value.
    pub(crate) fn run_with_slack(&mut self, inst: &MarketInstance, pi: &Permutation, slack: u32) {
        let (n, m) = (inst.n(), inst.m());
        debug_assert_eq!(pi.len(), n, "order and market have different sizes");
        self.school_of.clear();
        self.school_of.resize(n, UNMATCHED);
        self.seats_filled.clear();
        self.seats_filled.resize(m, 0);
        self.exhaustion_rank.clear();
        self.exhaustion_rank.resize(m, NEVER);
        let caps = inst.capacities();
        for (rank, &student) in pi.order().iter().enumerate() {
            let student = student as usize;
            for &k in inst.preferences(student) {
                let k = k as usize;
                let filled = self.seats_filled[k];
                if filled < caps[k] + slack {
                    self.seats_filled[k] = filled + 1;
                    self.school_of[student] = k as u32;
                    if filled + 1 == caps[k] {
                        self.exhaustion_rank[k] = rank as u32;
                    }
                    break;
                }
            }
        }
    }
}

/// Deterministic RSD: students pick in `pi` order, each taking the first
/// school on their list that still has a free seat.
pub fn run_rsd(inst: &MarketInstance, pi: &Permutation) -> Assignment {
    let mut a = Assignment::default();
    a.run_into(inst, pi);
    a
}

/// Whether `student` weakly prefers `school` to their own outcome.
///
/// Unlisted schools are never weakly preferred; an unmatched student weakly
/// prefers every school on their list.
#[inline]
pub fn weakly_prefers(inst: &MarketInstance, asg: &Assignment, student: usize, school: usize) -> bool {
    let assigned = asg.school_of[student];
    for &k in inst.preferences(student) {
        if k as usize == school {
            return true;
        }
        if k == assigned {
            return false;
        }
    }
    false
}

/// `t ↦ τ_k(t, Π)` for one school.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandTrajectory {
    pub school: usize,
    /// `values[t]`, `t = 0..=n`.
    pub values: Vec<u32>,
}

impl DemandTrajectory {
    /// `inf{t : τ_k(t) >= level}`, or `None` if never reached.
    pub fn first_reaching(&self, level: u32) -> Option<usize> {
        // nondecreasing, so binary search on the predicate
        let idx = self.values.partition_point(|&v| v < level);
        (idx < self.values.len()).then_some(idx)
    }

    pub fn at(&self, t: usize) -> u32 {
        self.values[t]
    }
}

/// Calls `f(rank, school)` for every school the student at `rank` weakly
/// prefers to their outcome, i.e. every `(t - 1, k)` at which `τ_k` steps up.
pub fn for_each_demand_step<F: FnMut(usize, usize)>(
    inst: &MarketInstance,
    pi: &Permutation,
    asg: &Assignment,
    mut f: F,
) {
    for (rank, &student) in pi.order().iter().enumerate() {
        let assigned = asg.school_of[student as usize];
        for &k in inst.preferences(student as usize) {
            f(rank, k as usize);
            if k == assigned {
                break;
            }
        }
    }
}

/// Demand trajectory of `school` for an already computed assignment.
pub fn demand_trajectory_from(
    inst: &MarketInstance,
    pi: &Permutation,
    asg: &Assignment,
    school: usize,
) -> DemandTrajectory {
    let mut values = Vec::with_capacity(pi.len() + 1);
    let mut acc = 0u32;
    values.push(0);
    for &student in pi.order() {
        acc += weakly_prefers(inst, asg, student as usize, school) as u32;
        values.push(acc);
    }
    DemandTrajectory { school, values }
}

/// Replays RSD under `pi` and returns `τ_school(·, pi)`.
pub fn demand_trajectory(inst: &MarketInstance, pi: &Permutation, school: usize) -> DemandTrajectory {
    let asg = run_rsd(inst, pi);
    demand_trajectory_from(inst, pi, &asg, school)
}

/// Trajectories of every school at once (`m` rows of `n + 1` values).
pub fn all_demand_trajectories(
    inst: &MarketInstance,
    pi: &Permutation,
    asg: &Assignment,
) -> Vec<DemandTrajectory> {
    let (n, m) = (inst.n(), inst.m());
    let mut steps = vec![vec![0u32; n + 1]; m];
    for_each_demand_step(inst, pi, asg, |rank, k| steps[k][rank + 1] = 1);
    steps
        .into_iter()
        .enumerate()
        .map(|(school, mut v)| {
            for t in 1..=n {
                v[t] += v[t - 1];
            }
            DemandTrajectory { school, values: v }
        })
        .collect()
}

/// Cutoffs `γ_k` of one realization.
///
/// A binding school's cutoff is the 1-based position of its lowest-ranked
/// admitted student divided by `n`. Schools that never fill get `γ = 1` and
/// `binding = false`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CutoffVector {
    n: usize,
    positions: Vec<Option<u32>>,
}

impl CutoffVector {
    pub fn from_assignment(asg: &Assignment) -> Self {
        let positions = asg
            .exhaustion_rank
            .iter()
            .map(|&r| (r != NEVER).then(|| r + 1))
            .collect();
        CutoffVector { n: asg.n(), positions }
    }

    pub fn m(&self) -> usize {
        self.positions.len()
    }

    pub fn binding(&self, school: usize) -> bool {
        self.positions[school].is_some()
    }

    /// 1-based position of the last admitted student, for binding schools.
    pub fn position(&self, school: usize) -> Option<usize> {
        self.positions[school].map(|p| p as usize)
    }

    pub fn gamma(&self, school: usize) -> f64 {
        match self.positions[school] {
            Some(p) => p as f64 / self.n as f64,
            None => 1.0,
        }
    }

    pub fn gammas(&self) -> Vec<f64> {
        (0..self.m()).map(|k| self.gamma(k)).collect()
    }
}

/// Replays RSD and returns the cutoff vector.
pub fn cutoffs(inst: &MarketInstance, pi: &Permutation) -> CutoffVector {
    CutoffVector::from_assignment(&run_rsd(inst, pi))
}

/// `sup{(rank(i) + 1) : μ(i) = k}` over admitted students of each school that
/// filled, computed directly from the assignment (not from exhaustion ranks).
pub fn sup_cutoff_positions(inst: &MarketInstance, pi: &Permutation, asg: &Assignment) -> Vec<Option<usize>> {
    let mut last = vec![0usize; inst.m()];
    for student in 0..inst.n() {
        if let Some(k) = asg.school_of(student) {
            last[k] = last[k].max(pi.rank_of(student) + 1);
        }
    }
    (0..inst.m())
        .map(|k| (asg.seats_filled(k) >= inst.capacity(k)).then_some(last[k]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_prefer_01() -> MarketInstance {
        MarketInstance::from_lists(&[1, 1], &[vec![0, 1], vec![0, 1], vec![0, 1]]).unwrap()
    }

    #[test]
    fn forced_choices() {
        let inst = MarketInstance::from_lists(&[1, 1], &[vec![0, 1], vec![0, 1]]).unwrap();
        let a = run_rsd(&inst, &Permutation::identity(2));
        assert_eq!(a.to_signed(), vec![0, 1]);
    }

    #[test]
    fn both_schools_exhaust() {
        let inst = all_prefer_01();
        let a = run_rsd(&inst, &Permutation::identity(3));
        assert_eq!(a.to_signed(), vec![0, 1, -1]);
        assert_eq!(a.exhaustion_rank(0), Some(0));
        assert_eq!(a.exhaustion_rank(1), Some(1));
    }

    #[test]
    fn trajectories_of_hand_instance() {
        let inst = all_prefer_01();
        let pi = Permutation::identity(3);
        assert_eq!(demand_trajectory(&inst, &pi, 0).values, vec![0, 1, 2, 3]);
        assert_eq!(demand_trajectory(&inst, &pi, 1).values, vec![0, 0, 1, 2]);
    }

    #[test]
    fn trajectory_of_mixed_partial_instance() {
        // Hand replay, order (2, 0, 3, 1), caps [2, 1]:
        //  t=1 student 2 [1,0] takes 1 (school 1 full)      -> weakly prefers 1: yes
        //  t=2 student 0 [0]   takes 0                       -> lists no 1: no
        //  t=3 student 3 [1]   school 1 full, unmatched       -> lists 1: yes
        //  t=4 student 1 [0,1] takes 0 (school 0 full)        -> 1 after 0: no
        let inst =
            MarketInstance::from_lists(&[2, 1], &[vec![0], vec![0, 1], vec![1, 0], vec![1]]).unwrap();
        let pi = Permutation::from_student_at(vec![2, 0, 3, 1]).unwrap();
        assert_eq!(demand_trajectory(&inst, &pi, 1).values, vec![0, 1, 1, 2, 2]);
        assert_eq!(demand_trajectory(&inst, &pi, 0).values, vec![0, 0, 1, 1, 2]);
        let a = run_rsd(&inst, &pi);
        assert_eq!(a.to_signed(), vec![0, 0, 1, -1]);
    }

    #[test]
    fn cutoff_examples() {
        let c = cutoffs(&all_prefer_01(), &Permutation::identity(3));
        assert!(c.binding(0) && c.binding(1));
        assert_eq!(c.gamma(0), 1.0 / 3.0);
        assert_eq!(c.gamma(1), 2.0 / 3.0);

        // both students take school 0, which fills exactly at the last pick
        let two = MarketInstance::from_lists(&[2, 2], &[vec![0], vec![0]]).unwrap();
        let c = cutoffs(&two, &Permutation::identity(2));
        assert!(c.binding(0) && !c.binding(1));
        assert_eq!(c.gammas(), vec![1.0, 1.0]);

        let under = MarketInstance::from_lists(&[3, 3], &[vec![0], vec![0]]).unwrap();
        let c = cutoffs(&under, &Permutation::identity(2));
        assert!(!c.binding(0) && !c.binding(1));
        assert_eq!(c.gammas(), vec![1.0, 1.0]);
    }

    #[test]
    fn cutoff_routes_agree_on_hand_instance() {
        let inst = all_prefer_01();
        let pi = Permutation::identity(3);
        let a = run_rsd(&inst, &pi);
        let sup = sup_cutoff_positions(&inst, &pi, &a);
        let trajs = all_demand_trajectories(&inst, &pi, &a);
        for k in 0..2 {
            let inf = trajs[k].first_reaching(inst.capacity(k));
            assert_eq!(sup[k], inf);
            assert_eq!(CutoffVector::from_assignment(&a).position(k), inf);
        }
    }

    #[test]
    fn block_instance_assignment_is_order_free() {
        let inst = MarketInstance::from_lists(&[2, 2], &[vec![0], vec![0], vec![1], vec![1]]).unwrap();
        for order in [[0u32, 1, 2, 3], [3, 2, 1, 0], [2, 0, 3, 1]] {
            let a = run_rsd(&inst, &Permutation::from_student_at(order.to_vec()).unwrap());
            assert_eq!(a.to_signed(), vec![0, 0, 1, 1]);
        }
    }
}
