//! Preference profiles and random picking orders.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::SpecError;
use crate::market::MarketInstance;
use crate::permutation::Permutation;
use crate::seed::substream;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

/// Shape of the generated preference profile.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "type"))]
pub enum GeneratorKind {
    /// `c = n/m` students list school `k` as their only acceptable school.
    Block,
    /// Independent uniform total orders over all schools.
    UniformFull,
    /// Uniform ordered subsets of a fixed length.
    UniformPartial { list_length: usize },
    /// Every student has the list `0, 1, ..., m-1`.
    CommonRanking,
    /// Full lists drawn by sequential sampling without replacement,
    /// proportional to the school weights.
    PlackettLuce { weights: Vec<f64> },
}

impl GeneratorKind {
    pub fn name(&self) -> &'static str {
        match self {
            GeneratorKind::Block => "block",
            GeneratorKind::UniformFull => "uniform_full",
            GeneratorKind::UniformPartial { .. } => "uniform_partial",
            GeneratorKind::CommonRanking => "common_ranking",
            GeneratorKind::PlackettLuce { .. } => "plackett_luce",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub n: usize,
    pub m: usize,
    pub capacities: Vec<u32>,
    pub seed: u64,
}

impl GeneratorSpec {
    /// Capacities split `n` as evenly as possible (the first `n mod m`
    /// schools get one extra seat), so total capacity is exactly `n`.
    pub fn balanced(kind: GeneratorKind, n: usize, m: usize, seed: u64) -> Self {
        let capacities = if m == 0 {
            Vec::new()
        } else {
            (0..m).map(|k| (n / m + usize::from(k < n % m)) as u32).collect()
        };
        GeneratorSpec { kind, n, m, capacities, seed }
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let (n, m) = (self.n, self.m);
        if n == 0 || m == 0 {
            return Err(crate::error::InstanceError::EmptyMarket.into());
        }
        if m > n {
            return Err(crate::error::InstanceError::MoreSchoolsThanStudents { n, m }.into());
        }
        if self.capacities.len() != m {
            return Err(crate::error::InstanceError::LengthMismatch {
                field: "capacities",
                expected: m,
                found: self.capacities.len(),
            }
            .into());
        }
        if let Some(school) = self.capacities.iter().position(|&c| c == 0) {
            return Err(crate::error::InstanceError::ZeroCapacity { school }.into());
        }
        match &self.kind {
            GeneratorKind::Block => {
                if n % m != 0 || self.capacities.iter().any(|&c| c as usize != n / m) {
                    return Err(SpecError::BlockShape { n, m });
                }
            }
            GeneratorKind::UniformPartial { list_length } => {
                if *list_length == 0 || *list_length > m {
                    return Err(SpecError::ListLength { length: *list_length, m });
                }
            }
            GeneratorKind::PlackettLuce { weights } => {
                if weights.len() != m {
                    return Err(SpecError::Weights { reason: "need one weight per school" });
                }
                if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
                    return Err(SpecError::Weights { reason: "weights must be positive and finite" });
                }
            }
            GeneratorKind::UniformFull | GeneratorKind::CommonRanking => {}
        }
        Ok(())
    }
}

/// Builds the instance described by `spec`; a pure function of the spec.
pub fn generate_instance(spec: &GeneratorSpec) -> Result<MarketInstance, SpecError> {
    spec.validate()?;
    let (n, m) = (spec.n, spec.m);
    let mut rng = substream(spec.seed, "instance", 0);
    let all: Vec<u32> = (0..m as u32).collect();
    let prefs: Vec<Vec<u32>> = match &spec.kind {
        GeneratorKind::Block => {
            let c = n / m;
            (0..n).map(|i| alloc::vec![(i / c) as u32]).collect()
        }
        GeneratorKind::UniformFull => (0..n)
            .map(|_| {
                let mut l = all.clone();
                l.shuffle(&mut rng);
                l
            })
            .collect(),
        GeneratorKind::UniformPartial { list_length } => (0..n)
            .map(|_| {
                let mut l = all.clone();
                let (chosen, _) = l.partial_shuffle(&mut rng, *list_length);
                chosen.to_vec()
            })
            .collect(),
        GeneratorKind::CommonRanking => (0..n).map(|_| all.clone()).collect(),
        GeneratorKind::PlackettLuce { weights } => {
            // Exponential race: school k finishes at E_k / w_k with E_k ~ Exp(1);
            // the finishing order has the sequential proportional-sampling law.
            let mut keyed: Vec<(f64, u32)> = Vec::with_capacity(m);
            (0..n)
                .map(|_| {
                    keyed.clear();
                    for (k, w) in weights.iter().enumerate() {
                        let u: f64 = 1.0 - rng.gen::<f64>();
                        keyed.push((-libm::log(u) / w, k as u32));
                    }
                    keyed.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                    keyed.iter().map(|&(_, k)| k).collect()
                })
                .collect()
        }
    };
    Ok(MarketInstance::from_lists(&spec.capacities, &prefs)?)
}

/// Uniform random order over `n` students (Fisher-Yates on the identity).
pub fn sample_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
    let mut p = Permutation::identity(n);
    resample_permutation(&mut p, rng);
    p
}

/// Overwrites `p` with a fresh uniform order of the same length.
///
/// The result depends only on the stream state, not on the previous `p`.
pub fn resample_permutation<R: Rng + ?Sized>(p: &mut Permutation, rng: &mut R) {
    let order = p.order_mut();
    for (r, s) in order.iter_mut().enumerate() {
        *s = r as u32;
    }
    order.shuffle(rng);
    p.set_order_unchecked();
}

/// Lottery-number model: each student draws `X_i ~ U[0, 1)` and students
/// pick in ascending draw order (smallest draw picks first). Equal draws
/// are broken by lower student index.
pub fn lottery_model_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (Permutation, Vec<f64>) {
    let draws: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    (order_by_draws(&draws), draws)
}

/// The order induced by lottery draws (ascending, ties by student index).
pub fn order_by_draws(draws: &[f64]) -> Permutation {
    let mut order: Vec<u32> = (0..draws.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        draws[a as usize]
            .total_cmp(&draws[b as usize])
            .then(a.cmp(&b))
    });
    Permutation::from_student_at(order).expect("sorted indices form a permutation")
}
