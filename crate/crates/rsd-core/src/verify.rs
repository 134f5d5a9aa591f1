//! Executable property checks.
//!
//! Each check evaluates one case and returns either a small summary or a
//! [`Witness`] naming the exact order(s), students, school and position
//! where the property broke. Sweeps and trial runners apply the checks
//! over whole batteries; they stop at the first witness, and because every
//! loop runs in a fixed order the witness is deterministic.
//!
//! Convention: `τ_k(t, π)` counts the first `t` students of `π`, so the
//! value "at student `h`" is `τ_k(rank(h) + 1, π)`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::battery::{random_instance, Labeled};
use crate::error::OracleError;
use crate::generators::sample_permutation;
use crate::market::MarketInstance;
use crate::oracle::{enumerate_oracle, for_each_permutation, OracleResult};
use crate::permutation::Permutation;
use crate::rsd::{all_demand_trajectories, sup_cutoff_positions, Assignment, DemandTrajectory};
use crate::seed::substream;

/// Which RSD implementation the checks exercise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Engine {
    #[default]
    Faithful,
    /// Deliberately broken: every school admits one student beyond its
    /// capacity. Used to show the checks can fail.
    CapacityOffByOne,
}

impl Engine {
    pub fn assign(self, inst: &MarketInstance, pi: &Permutation) -> Assignment {
        let mut a = Assignment::default();
        let slack = match self {
            Engine::Faithful => 0,
            Engine::CapacityOffByOne => 1,
        };
        a.run_with_slack(inst, pi, slack);
        a
    }
}

/// The properties the checks cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Property {
    /// Capacity feasibility, individual rationality, greedy optimality and
    /// trajectory regularity of single runs.
    Outcome,
    /// `|τ_k(t, π) − τ_k(t, t_ij π)| <= 2`.
    Transposition,
    /// `|τ_k(t, π) − τ_k(t, σ)| <= 2 d(π, σ)`.
    Hamming,
    /// Transposition sequences replay from `σ` to `π` within `d(π, σ)` steps.
    Decomposition,
    /// One-sided insertion bound.
    Insertion,
    /// Sup-of-admitted-ranks cutoff equals `inf{t : τ_k(t) >= α_k}`.
    CutoffEquivalence,
}

impl Property {
    pub const ALL: [Property; 6] = [
        Property::Outcome,
        Property::Transposition,
        Property::Hamming,
        Property::Decomposition,
        Property::Insertion,
        Property::CutoffEquivalence,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::Outcome => "outcome",
            Property::Transposition => "transposition-lipschitz",
            Property::Hamming => "hamming-lipschitz",
            Property::Decomposition => "decomposition",
            Property::Insertion => "insertion-inequality",
            Property::CutoffEquivalence => "cutoff-equivalence",
        }
    }
}

/// What went wrong, with the coordinates needed to reproduce it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    CapacityExceeded { school: usize, filled: u32, capacity: u32 },
    UnlistedAssignment { student: usize, school: usize },
    NotGreedy { student: usize, expected: Option<usize>, found: Option<usize> },
    ExhaustionMismatch { school: usize },
    IrregularTrajectory { school: usize, t: usize },
    Transposition { i: usize, j: usize, school: usize, t: usize, left: u32, right: u32 },
    Hamming { school: usize, t: usize, distance: usize, left: u32, right: u32 },
    Decomposition { steps: usize, distance: usize, reproduces: bool },
    Insertion { j: usize, s: usize, h: usize, school: usize, left: u32, right: u32, bound: u32 },
    CutoffMismatch { school: usize, sup: Option<usize>, inf: Option<usize>, exhaustion: Option<usize> },
    /// Exact first differences of `E τ_k` fail to be nondecreasing or leave
    /// `[0, 1]` at `t` (numerators over `n!`).
    Differences { school: usize, t: usize, previous: u64, current: u64 },
}

impl Violation {
    /// `|Δτ|` for the Lipschitz-type violations.
    pub fn gap(&self) -> Option<u32> {
        match *self {
            Violation::Transposition { left, right, .. }
            | Violation::Hamming { left, right, .. }
            | Violation::Insertion { left, right, .. } => Some(left.abs_diff(right)),
            _ => None,
        }
    }
}

/// A violation together with the order(s) it was observed under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub violation: Violation,
    pub order: Vec<u32>,
    pub other_order: Option<Vec<u32>>,
}

impl Witness {
    fn new(violation: Violation, pi: &Permutation) -> Self {
        Witness { violation, order: pi.order().to_vec(), other_order: None }
    }

    fn pair(violation: Violation, pi: &Permutation, other: &Permutation) -> Self {
        Witness { violation, order: pi.order().to_vec(), other_order: Some(other.order().to_vec()) }
    }
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} order={:?}", self.violation, self.order)?;
        if let Some(o) = &self.other_order {
            write!(f, " other_order={o:?}")?;
        }
        Ok(())
    }
}

/// One run and everything read off it.
struct Evaluated {
    asg: Assignment,
    trajectories: Vec<DemandTrajectory>,
}

fn evaluate(engine: Engine, inst: &MarketInstance, pi: &Permutation) -> Evaluated {
    let asg = engine.assign(inst, pi);
    let trajectories = all_demand_trajectories(inst, pi, &asg);
    Evaluated { asg, trajectories }
}

/// Feasibility, individual rationality, greedy optimality (by independent
/// replay) and consistency of the recorded exhaustion ranks.
pub fn check_outcome(inst: &MarketInstance, pi: &Permutation, asg: &Assignment) -> Result<(), Violation> {
    let m = inst.m();
    for k in 0..m {
        let (filled, capacity) = (asg.seats_filled(k), inst.capacity(k));
        if filled > capacity {
            return Err(Violation::CapacityExceeded { school: k, filled, capacity });
        }
        if asg.exhaustion_rank(k).is_some() != (filled == capacity) {
            return Err(Violation::ExhaustionMismatch { school: k });
        }
    }
    let mut seats = alloc::vec![0u32; m];
    for r in 0..pi.len() {
        let student = pi.student_at(r);
        let found = asg.school_of(student);
        if let Some(k) = found {
            if inst.position(student, k).is_none() {
                return Err(Violation::UnlistedAssignment { student, school: k });
            }
        }
        let expected = inst
            .preferences(student)
            .iter()
            .map(|&k| k as usize)
            .find(|&k| seats[k] < inst.capacity(k));
        if expected != found {
            return Err(Violation::NotGreedy { student, expected, found });
        }
        if let Some(k) = expected {
            seats[k] += 1;
        }
    }
    Ok(())
}

/// Each trajectory starts at 0 and moves in steps of 0 or 1.
pub fn check_regularity(trajectories: &[DemandTrajectory]) -> Result<(), Violation> {
    for tr in trajectories {
        if tr.values.first() != Some(&0) {
            return Err(Violation::IrregularTrajectory { school: tr.school, t: 0 });
        }
        if let Some(t) = tr.values.windows(2).position(|w| w[1] < w[0] || w[1] - w[0] > 1) {
            return Err(Violation::IrregularTrajectory { school: tr.school, t: t + 1 });
        }
    }
    Ok(())
}

/// Largest `|a_k(t) − b_k(t)|` over schools and positions, with its location.
fn max_gap(a: &[DemandTrajectory], b: &[DemandTrajectory]) -> (u32, usize, usize) {
    let mut best = (0, 0, 0);
    for (k, (ta, tb)) in a.iter().zip(b).enumerate() {
        for (t, (&x, &y)) in ta.values.iter().zip(&tb.values).enumerate() {
            let d = x.abs_diff(y);
            if d > best.0 {
                best = (d, k, t);
            }
        }
    }
    best
}

pub fn check_outcome_case(engine: Engine, inst: &MarketInstance, pi: &Permutation) -> Result<(), Witness> {
    let ev = evaluate(engine, inst, pi);
    check_outcome(inst, pi, &ev.asg).map_err(|v| Witness::new(v, pi))?;
    check_regularity(&ev.trajectories).map_err(|v| Witness::new(v, pi))
}

/// Returns the largest observed difference.
pub fn check_transposition(
    engine: Engine,
    inst: &MarketInstance,
    pi: &Permutation,
    i: usize,
    j: usize,
) -> Result<u32, Witness> {
    let a = evaluate(engine, inst, pi);
    transposition_against(engine, inst, pi, &a.trajectories, i, j)
}

fn transposition_against(
    engine: Engine,
    inst: &MarketInstance,
    pi: &Permutation,
    base: &[DemandTrajectory],
    i: usize,
    j: usize,
) -> Result<u32, Witness> {
    let swapped = pi.apply_transposition(i, j);
    let b = evaluate(engine, inst, &swapped);
    let (gap, k, t) = max_gap(base, &b.trajectories);
    if gap > 2 {
        let v = Violation::Transposition {
            i,
            j,
            school: k,
            t,
            left: base[k].values[t],
            right: b.trajectories[k].values[t],
        };
        return Err(Witness::pair(v, pi, &swapped));
    }
    Ok(gap)
}

/// Returns the largest observed difference.
pub fn check_hamming(
    engine: Engine,
    inst: &MarketInstance,
    pi: &Permutation,
    sigma: &Permutation,
) -> Result<u32, Witness> {
    let a = evaluate(engine, inst, pi);
    let b = evaluate(engine, inst, sigma);
    hamming_between(pi, sigma, &a.trajectories, &b.trajectories)
}

fn hamming_between(
    pi: &Permutation,
    sigma: &Permutation,
    a: &[DemandTrajectory],
    b: &[DemandTrajectory],
) -> Result<u32, Witness> {
    let distance = pi.hamming_distance(sigma);
    let (gap, k, t) = max_gap(a, b);
    if gap as usize > 2 * distance {
        let v = Violation::Hamming { school: k, t, distance, left: a[k].values[t], right: b[k].values[t] };
        return Err(Witness::pair(v, pi, sigma));
    }
    Ok(gap)
}

pub fn check_decomposition(sigma: &Permutation, pi: &Permutation) -> Result<usize, Witness> {
    let steps = sigma.decompose_into_transpositions(pi);
    let distance = sigma.hamming_distance(pi);
    let mut cur = sigma.clone();
    for &(i, j) in &steps {
        cur.transpose_in_place(i, j);
    }
    let reproduces = &cur == pi;
    if !reproduces || steps.len() > distance {
        let v = Violation::Decomposition { steps: steps.len(), distance, reproduces };
        return Err(Witness::pair(v, sigma, pi));
    }
    Ok(steps.len())
}

/// Convention used by [`check_insertion`], reported alongside verdicts.
pub const INSERTION_CONVENTION: &str = "pi' = insertion(pi, j, s) with s < rank_pi(j) (0-based); \
for h != j and every school k: |tau_k(rank_pi(h)+1, pi) - tau_k(rank_pi'(h)+1, pi')| <= 1{rank_pi(h) >= s}";

/// One-sided insertion bound for a single `(π, j, s)`, `s < rank(j)`.
///
/// Students ranked before `s` see identical prefixes, so the bound there is
/// 0; every other student `h != j` is allowed a difference of 1. Returns the
/// largest observed difference.
///
/// # Panics
/// If `s >= rank(j)`.
pub fn check_insertion(
    engine: Engine,
    inst: &MarketInstance,
    pi: &Permutation,
    j: usize,
    s: usize,
) -> Result<u32, Witness> {
    let a = evaluate(engine, inst, pi);
    insertion_against(engine, inst, pi, &a.trajectories, j, s)
}

fn insertion_against(
    engine: Engine,
    inst: &MarketInstance,
    pi: &Permutation,
    base: &[DemandTrajectory],
    j: usize,
    s: usize,
) -> Result<u32, Witness> {
    assert!(s < pi.rank_of(j), "insertion checks move j strictly forward");
    let moved = pi.insertion(j, s);
    let b = evaluate(engine, inst, &moved);
    let mut worst = 0;
    for h in (0..pi.len()).filter(|&h| h != j) {
        let (rp, rq) = (pi.rank_of(h), moved.rank_of(h));
        let bound = u32::from(rp >= s);
        for (k, (ta, tb)) in base.iter().zip(&b.trajectories).enumerate() {
            let (left, right) = (ta.values[rp + 1], tb.values[rq + 1]);
            let d = left.abs_diff(right);
            if d > bound {
                let v = Violation::Insertion { j, s, h, school: k, left, right, bound };
                return Err(Witness::pair(v, pi, &moved));
            }
            worst = worst.max(d);
        }
    }
    Ok(worst)
}

/// Tally from one cutoff-equivalence case.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EquivalenceTally {
    pub binding: usize,
    pub non_binding: usize,
}

/// For binding schools the three cutoff routes (supremum of admitted
/// ranks, first crossing of `τ_k`, recorded exhaustion rank) must agree.
/// Non-binding schools must have neither a supremum nor a crossing.
pub fn check_cutoff_equivalence(
    engine: Engine,
    inst: &MarketInstance,
    pi: &Permutation,
) -> Result<EquivalenceTally, Witness> {
    let ev = evaluate(engine, inst, pi);
    let sup = sup_cutoff_positions(inst, pi, &ev.asg);
    let mut tally = EquivalenceTally::default();
    for k in 0..inst.m() {
        let inf = ev.trajectories[k].first_reaching(inst.capacity(k));
        let exhaustion = ev.asg.exhaustion_rank(k).map(|r| r + 1);
        if sup[k] != inf || exhaustion != inf {
            let v = Violation::CutoffMismatch { school: k, sup: sup[k], inf, exhaustion };
            return Err(Witness::new(v, pi));
        }
        if inf.is_some() {
            tally.binding += 1;
        } else {
            tally.non_binding += 1;
        }
    }
    Ok(tally)
}

/// Checks exact first-difference numerators: for each school,
/// `t ↦ S_k(t) − S_k(t−1)` must be nondecreasing and lie in
/// `[0, denominator]`.
pub fn check_difference_sequences(demand_sum: &[Vec<u64>], denominator: u64) -> Result<(), Violation> {
    for (k, sums) in demand_sum.iter().enumerate() {
        let mut previous = 0u64;
        for t in 1..sums.len() {
            let current = match sums[t].checked_sub(sums[t - 1]) {
                Some(d) if d <= denominator => d,
                _ => return Err(Violation::Differences { school: k, t, previous, current: u64::MAX }),
            };
            if current < previous {
                return Err(Violation::Differences { school: k, t, previous, current });
            }
            previous = current;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DifferencesError {
    Oracle(OracleError),
    Violated { violation: Violation },
}

/// Runs the exact oracle and checks increasing first differences of
/// `E τ_k(t)` for every school.
pub fn check_increasing_differences(inst: &MarketInstance) -> Result<OracleResult, DifferencesError> {
    let o = enumerate_oracle(inst).map_err(DifferencesError::Oracle)?;
    check_difference_sequences(&o.demand_sum, o.denominator)
        .map_err(|violation| DifferencesError::Violated { violation })?;
    Ok(o)
}

/// Counts and worst observed value from a sweep or trial run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyRun {
    pub property: Property,
    pub cases: u64,
    /// Largest observed `|Δτ|` for the Lipschitz-type properties.
    pub max_observed: u32,
    pub witness: Option<(String, Witness)>,
}

impl PropertyRun {
    pub fn new(property: Property) -> Self {
        PropertyRun { property, cases: 0, max_observed: 0, witness: None }
    }

    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }

    /// Folds another run of the same property into this one; the earlier
    /// witness wins.
    pub fn absorb(&mut self, other: PropertyRun) {
        self.cases += other.cases;
        self.max_observed = self.max_observed.max(other.max_observed);
        if self.witness.is_none() {
            self.witness = other.witness;
        }
    }

    fn record(&mut self, label: &str, r: Result<u32, Witness>) -> bool {
        self.cases += 1;
        match r {
            Ok(v) => {
                self.max_observed = self.max_observed.max(v);
                true
            }
            Err(w) => {
                self.max_observed = self.max_observed.max(w.violation.gap().unwrap_or(0));
                self.witness = Some((String::from(label), w));
                false
            }
        }
    }
}

/// Largest `n` the exhaustive sweep accepts (`n!²` order pairs for the
/// Hamming check).
pub const EXHAUSTIVE_MAX_STUDENTS: usize = 6;

/// Every order, every transposition, every insertion with `s < rank(j)`,
/// and every ordered pair of orders, for one instance.
pub fn exhaustive_sweep(engine: Engine, item: &Labeled, property: Property) -> PropertyRun {
    let inst = &item.instance;
    let n = inst.n();
    assert!(n <= EXHAUSTIVE_MAX_STUDENTS, "exhaustive sweep needs n <= {EXHAUSTIVE_MAX_STUDENTS}");
    let label = item.label.as_str();
    let mut run = PropertyRun::new(property);

    let mut orders = Vec::new();
    for_each_permutation(n, |p| orders.push(p.clone()));
    let evals: Vec<Evaluated> = match property {
        Property::Decomposition => Vec::new(),
        _ => orders.iter().map(|p| evaluate(engine, inst, p)).collect(),
    };

    match property {
        Property::Outcome => {
            for (p, ev) in orders.iter().zip(&evals) {
                let r = check_outcome(inst, p, &ev.asg)
                    .and_then(|_| check_regularity(&ev.trajectories))
                    .map(|_| 0)
                    .map_err(|v| Witness::new(v, p));
                if !run.record(label, r) {
                    break;
                }
            }
        }
        Property::Transposition => {
            'outer: for (p, ev) in orders.iter().zip(&evals) {
                for i in 0..n {
                    for j in i + 1..n {
                        if !run.record(label, transposition_against(engine, inst, p, &ev.trajectories, i, j)) {
                            break 'outer;
                        }
                    }
                }
            }
        }
        Property::Hamming => {
            'outer: for (p, a) in orders.iter().zip(&evals) {
                for (q, b) in orders.iter().zip(&evals) {
                    if !run.record(label, hamming_between(p, q, &a.trajectories, &b.trajectories)) {
                        break 'outer;
                    }
                }
            }
        }
        Property::Decomposition => {
            'outer: for p in &orders {
                for q in &orders {
                    if !run.record(label, check_decomposition(p, q).map(|_| 0)) {
                        break 'outer;
                    }
                }
            }
        }
        Property::Insertion => {
            'outer: for (p, ev) in orders.iter().zip(&evals) {
                for j in 0..n {
                    for s in 0..p.rank_of(j) {
                        if !run.record(label, insertion_against(engine, inst, p, &ev.trajectories, j, s)) {
                            break 'outer;
                        }
                    }
                }
            }
        }
        Property::CutoffEquivalence => {
            for p in &orders {
                if !run.record(label, check_cutoff_equivalence(engine, inst, p).map(|_| 0)) {
                    break;
                }
            }
        }
    }
    run
}

/// A single randomized trial: draws an instance with `n <= max_n` and the
/// orders/students the property needs, all from `(seed, property, index)`.
pub fn random_trial(engine: Engine, property: Property, seed: u64, index: u64, max_n: usize) -> PropertyRun {
    let mut rng = substream(seed, property.name(), index);
    let item = random_instance(&mut rng, max_n);
    let inst = &item.instance;
    let n = inst.n();
    let pi = sample_permutation(n, &mut rng);
    let mut run = PropertyRun::new(property);
    let label = item.label.as_str();
    let result = match property {
        Property::Outcome => check_outcome_case(engine, inst, &pi).map(|_| 0),
        Property::Transposition => {
            if n < 2 {
                Ok(0)
            } else {
                let i = rng.gen_range(0..n);
                let j = (i + rng.gen_range(1..n)) % n;
                check_transposition(engine, inst, &pi, i, j)
            }
        }
        Property::Hamming => {
            // mix near neighbours (few transpositions) with independent orders
            let sigma = if rng.gen_bool(0.5) {
                sample_permutation(n, &mut rng)
            } else {
                let mut s = pi.clone();
                for _ in 0..rng.gen_range(0..=3usize) {
                    if n >= 2 {
                        let i = rng.gen_range(0..n);
                        let j = (i + rng.gen_range(1..n)) % n;
                        s.transpose_in_place(i, j);
                    }
                }
                s
            };
            check_hamming(engine, inst, &pi, &sigma)
        }
        Property::Decomposition => {
            let sigma = sample_permutation(n, &mut rng);
            check_decomposition(&sigma, &pi).map(|_| 0)
        }
        Property::Insertion => {
            if n < 2 {
                Ok(0)
            } else {
                let rank_j = rng.gen_range(1..n);
                let j = pi.student_at(rank_j);
                let s = rng.gen_range(0..rank_j);
                check_insertion(engine, inst, &pi, j, s)
            }
        }
        Property::CutoffEquivalence => check_cutoff_equivalence(engine, inst, &pi).map(|_| 0),
    };
    run.record(label, result);
    run
}

/// Sequential trial run over `indices`, stopping at the first witness.
pub fn run_trials(
    engine: Engine,
    property: Property,
    seed: u64,
    indices: core::ops::Range<u64>,
    max_n: usize,
) -> PropertyRun {
    let mut run = PropertyRun::new(property);
    for idx in indices {
        run.absorb(random_trial(engine, property, seed, idx, max_n));
        if !run.passed() {
            break;
        }
    }
    run
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::edge_instances;
    use alloc::vec;

    fn all_prefer() -> MarketInstance {
        MarketInstance::from_lists(&[1, 1], &[vec![0, 1], vec![0, 1], vec![0, 1]]).unwrap()
    }

    #[test]
    fn identical_orders_have_zero_gap() {
        let inst = all_prefer();
        let pi = Permutation::identity(3);
        assert_eq!(check_hamming(Engine::Faithful, &inst, &pi, &pi), Ok(0));
    }

    #[test]
    fn equivalence_on_hand_instance() {
        let t = check_cutoff_equivalence(Engine::Faithful, &all_prefer(), &Permutation::identity(3)).unwrap();
        assert_eq!(t, EquivalenceTally { binding: 2, non_binding: 0 });
        let under = MarketInstance::from_lists(&[3, 3], &[vec![0], vec![0]]).unwrap();
        let t = check_cutoff_equivalence(Engine::Faithful, &under, &Permutation::identity(2)).unwrap();
        assert_eq!(t, EquivalenceTally { binding: 0, non_binding: 2 });
    }

    #[test]
    fn adjacent_insertion_holds_on_hand_instance() {
        let inst = all_prefer();
        let pi = Permutation::identity(3);
        assert!(check_insertion(Engine::Faithful, &inst, &pi, 2, 1).is_ok());
    }

    #[test]
    fn insertion_counterexample_is_reported() {
        let inst = MarketInstance::from_lists(&[1, 1], &[vec![1], vec![0, 1], vec![1, 0]]).unwrap();
        let w = check_insertion(Engine::Faithful, &inst, &Permutation::identity(3), 2, 1).unwrap_err();
        assert_eq!(
            w.violation,
            Violation::Insertion { j: 2, s: 1, h: 1, school: 1, left: 1, right: 3, bound: 1 }
        );
        assert_eq!(w.other_order, Some(vec![0, 2, 1]));
    }

    #[test]
    fn transposition_counterexample_is_reported() {
        let prefs = [
            vec![5, 4, 1, 2, 3, 0],
            vec![3, 2, 5, 1, 0, 4],
            vec![4, 2, 5, 1, 3, 0],
            vec![4, 5, 3, 0, 1, 2],
            vec![1, 4, 0, 2, 5, 3],
            vec![2, 5, 4, 1, 0, 3],
        ];
        let inst = MarketInstance::from_lists(&[2, 1, 6, 1, 1, 1], &prefs).unwrap();
        let pi = Permutation::from_student_at(vec![2, 3, 0, 1, 4, 5]).unwrap();
        let w = check_transposition(Engine::Faithful, &inst, &pi, 2, 5).unwrap_err();
        match w.violation {
            Violation::Transposition { left, right, .. } => assert_eq!(left.abs_diff(right), 3),
            v => panic!("{v:?}"),
        }
        assert_eq!(w.other_order, Some(vec![5, 3, 0, 1, 4, 2]));
        // the same pair is within the Hamming bound (distance 2, bound 4)
        let sigma = pi.apply_transposition(2, 5);
        assert_eq!(check_hamming(Engine::Faithful, &inst, &pi, &sigma), Ok(3));
    }

    #[test]
    fn single_swap_can_exceed_hamming_bound() {
        let prefs = [
            vec![15, 1, 11],
            vec![11, 6, 0, 14, 2, 4, 9, 10, 5, 1, 12, 13, 15, 8, 3, 7],
            vec![],
            vec![10, 3, 15, 0, 8, 2, 12, 13, 14, 6, 7, 9, 5, 11, 4, 1],
            vec![0, 1, 4, 8, 5, 9],
            vec![2],
            vec![1, 8, 9, 11, 7, 15, 6, 13, 0, 14, 5, 4, 3, 2, 12, 10],
            vec![10],
            vec![8, 10, 11, 9, 2, 1, 5, 0, 15, 12, 3, 7, 6, 14],
            vec![14, 1, 15, 6, 10, 13, 0, 8, 4, 11, 3, 5, 12, 9, 7, 2],
            vec![5, 2, 10, 0, 1, 3, 11, 14, 7, 15, 12, 13, 8],
            vec![5, 15, 4, 3, 2, 9, 0, 1, 11, 10, 12, 14, 13, 7, 6, 8],
            vec![8, 13, 7, 9, 11, 2, 5, 6],
            vec![14, 15, 4, 10, 12, 5, 1, 11],
            vec![9, 3, 4, 6, 0, 8, 7, 1, 10, 13, 15, 2, 11, 12],
            vec![2, 1, 13],
            vec![14, 8, 4, 6, 9, 2, 15, 7, 10, 5, 13, 0, 12, 3, 11],
            vec![1, 6, 11, 0, 14, 4, 12, 7, 5, 2, 9, 13, 8],
            vec![3, 9, 0, 2, 15, 1],
        ];
        let caps = [1, 1, 1, 2, 1, 2, 1, 2, 1, 2, 1, 2, 2, 1, 2, 1];
        let inst = MarketInstance::from_lists(&caps, &prefs).unwrap();
        let order = vec![17, 16, 18, 11, 2, 9, 0, 7, 4, 1, 5, 12, 15, 14, 6, 8, 10, 3, 13];
        let pi = Permutation::from_student_at(order).unwrap();
        let sigma = pi.apply_transposition(13, 18);
        // distance 2 allows 4; school 1 at t = 19 moves from 3 to 8
        let w = check_hamming(Engine::Faithful, &inst, &pi, &sigma).unwrap_err();
        assert!(matches!(w.violation, Violation::Hamming { school: 1, t: 19, distance: 2, left: 3, right: 8 }));
    }

    #[test]
    fn corrupted_engine_is_caught() {
        let inst = all_prefer();
        let pi = Permutation::identity(3);
        let w = check_outcome_case(Engine::CapacityOffByOne, &inst, &pi).unwrap_err();
        assert!(matches!(w.violation, Violation::CapacityExceeded { school: 0, filled: 2, capacity: 1 }));
        let w = check_cutoff_equivalence(Engine::CapacityOffByOne, &inst, &pi).unwrap_err();
        assert!(matches!(w.violation, Violation::CutoffMismatch { school: 0, .. }));
    }

    #[test]
    fn corrupted_differences_are_caught() {
        // E τ increments 1, 0: decreasing at t = 2
        let sums = vec![vec![0u64, 2, 2, 4]];
        assert_eq!(
            check_difference_sequences(&sums, 2),
            Err(Violation::Differences { school: 0, t: 2, previous: 2, current: 0 })
        );
        // an increment above 1
        let sums = vec![vec![0u64, 3]];
        assert!(check_difference_sequences(&sums, 2).is_err());
    }

    #[test]
    fn differences_hold_on_hand_instances() {
        for item in edge_instances() {
            let o = check_increasing_differences(&item.instance).unwrap();
            assert_eq!(o.n, item.instance.n());
        }
    }

    #[test]
    fn differences_guard_large_instances() {
        let inst = MarketInstance::from_lists(&[12], &vec![vec![0u32]; 12]).unwrap();
        assert!(matches!(check_increasing_differences(&inst), Err(DifferencesError::Oracle(_))));
    }

    #[test]
    fn exhaustive_sweeps_pass_on_edge_instances() {
        for item in edge_instances().iter().filter(|l| !l.label.starts_with("insertion")) {
            for p in Property::ALL {
                let r = exhaustive_sweep(Engine::Faithful, item, p);
                if p == Property::Insertion {
                    continue;
                }
                assert!(r.passed(), "{} {:?}", item.label, r.witness);
            }
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let a = run_trials(Engine::Faithful, Property::Transposition, 5, 0..200, 12);
        let b = run_trials(Engine::Faithful, Property::Transposition, 5, 0..200, 12);
        assert_eq!(a, b);
        assert!(a.passed());
        assert_eq!(a.cases, 200);
    }
}
