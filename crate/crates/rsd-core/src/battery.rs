//! Instance batteries used by the property checks and the exact oracle.
//!
//! Batteries mix every generator kind with hand-built edge cases (empty
//! lists, a school large enough for everyone, a single school). All of them
//! are pure functions of their seed.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::generators::{generate_instance, GeneratorKind, GeneratorSpec};
use crate::market::MarketInstance;
use crate::seed::substream;

/// An instance with a short human-readable description.
#[derive(Debug, Clone)]
pub struct Labeled {
    pub label: String,
    pub instance: MarketInstance,
}

fn labeled(label: impl Into<String>, instance: MarketInstance) -> Labeled {
    Labeled { label: label.into(), instance }
}

/// Hand-built instances that every battery includes (all `n <= 5`).
pub fn edge_instances() -> Vec<Labeled> {
    let mk = |caps: &[u32], prefs: &[&[u32]]| {
        let prefs: Vec<Vec<u32>> = prefs.iter().map(|l| l.to_vec()).collect();
        MarketInstance::from_lists(caps, &prefs).expect("hand-built instance is valid")
    };
    vec![
        labeled("all-prefer-01 n=3", mk(&[1, 1], &[&[0, 1], &[0, 1], &[0, 1]])),
        labeled("mixed-partial n=4", mk(&[2, 1], &[&[0], &[0, 1], &[1, 0], &[1]])),
        labeled("block n=4 m=2", mk(&[2, 2], &[&[0], &[0], &[1], &[1]])),
        labeled("single-school n=5", mk(&[5], &[&[0], &[0], &[0], &[0], &[0]])),
        labeled("scarce-single-school n=4", mk(&[1], &[&[0], &[0], &[0], &[0]])),
        labeled("empty-lists n=4", mk(&[1, 2], &[&[], &[1, 0], &[], &[0]])),
        labeled("capacity-ge-n n=4", mk(&[4, 1], &[&[1, 0], &[1, 0], &[0, 1], &[1]])),
        labeled("insertion-witness n=3", mk(&[1, 1], &[&[1], &[0, 1], &[1, 0]])),
        labeled("opposed n=4", mk(&[1, 1], &[&[0, 1], &[0, 1], &[1, 0], &[1, 0]])),
    ]
}

/// Random capacities in `[1, 2n/m]`.
fn random_capacities<R: Rng>(rng: &mut R, n: usize, m: usize) -> Vec<u32> {
    let hi = (2 * n / m).max(1) as u32;
    (0..m).map(|_| rng.gen_range(1..=hi)).collect()
}

/// One random instance with `1 <= n <= max_n`, drawn across all generator
/// kinds and the edge shapes.
pub fn random_instance<R: Rng>(rng: &mut R, max_n: usize) -> Labeled {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=n);
    let seed = rng.gen::<u64>();
    let shape = rng.gen_range(0..8u32);
    let spec = |kind: GeneratorKind, caps: Vec<u32>| GeneratorSpec { kind, n, m, capacities: caps, seed };
    let (name, inst) = match shape {
        0 => {
            // largest m' <= m dividing n keeps the block shape valid
            let m = (1..=m).rev().find(|d| n % d == 0).unwrap_or(1);
            let s = GeneratorSpec::balanced(GeneratorKind::Block, n, m, seed);
            ("block", generate_instance(&s))
        }
        1 => ("uniform_full", generate_instance(&spec(GeneratorKind::UniformFull, random_capacities(rng, n, m)))),
        2 => {
            let list_length = rng.gen_range(1..=m);
            let k = GeneratorKind::UniformPartial { list_length };
            ("uniform_partial", generate_instance(&spec(k, random_capacities(rng, n, m))))
        }
        3 => ("common_ranking", generate_instance(&spec(GeneratorKind::CommonRanking, random_capacities(rng, n, m)))),
        4 => {
            let weights = (0..m).map(|_| rng.gen_range(0.1..10.0)).collect();
            let k = GeneratorKind::PlackettLuce { weights };
            ("plackett_luce", generate_instance(&spec(k, random_capacities(rng, n, m))))
        }
        5 => {
            // ragged lists, some empty
            let caps = random_capacities(rng, n, m);
            let prefs: Vec<Vec<u32>> = (0..n)
                .map(|_| {
                    let mut all: Vec<u32> = (0..m as u32).collect();
                    all.shuffle(rng);
                    all.truncate(rng.gen_range(0..=m));
                    all
                })
                .collect();
            ("ragged", MarketInstance::from_lists(&caps, &prefs).map_err(Into::into))
        }
        6 => {
            // one school with room for everyone
            let mut caps = random_capacities(rng, n, m);
            let big = rng.gen_range(0..m);
            caps[big] = n as u32;
            ("capacity_ge_n", generate_instance(&spec(GeneratorKind::UniformFull, caps)))
        }
        _ => {
            let s = GeneratorSpec { kind: GeneratorKind::CommonRanking, n, m: 1, capacities: vec![rng.gen_range(1..=n as u32)], seed };
            ("single_school", generate_instance(&s))
        }
    };
    let inst = inst.expect("battery specs are valid by construction");
    labeled(format!("{name} n={} m={}", inst.n(), inst.m()), inst)
}

/// Fixed battery for exhaustive sweeps: edge instances plus random ones
/// with `n <= max_n`.
pub fn exhaustive_battery(seed: u64, max_n: usize, random_count: usize) -> Vec<Labeled> {
    let mut out: Vec<Labeled> = edge_instances().into_iter().filter(|l| l.instance.n() <= max_n).collect();
    let mut rng = substream(seed, "exhaustive-battery", 0);
    out.extend((0..random_count).map(|_| random_instance(&mut rng, max_n)));
    out
}

/// Battery for the exact oracle: edge instances plus one instance of each
/// generator kind at every `n` in `4..=max_n`.
pub fn oracle_battery(seed: u64, max_n: usize) -> Vec<Labeled> {
    let mut out = edge_instances();
    let mut rng = substream(seed, "oracle-battery", 0);
    for n in 4..=max_n {
        let m = rng.gen_range(2..=n.min(4));
        let kinds = [
            GeneratorKind::UniformFull,
            GeneratorKind::UniformPartial { list_length: rng.gen_range(1..=m) },
            GeneratorKind::CommonRanking,
            GeneratorKind::PlackettLuce { weights: (0..m).map(|k| 1.0 + k as f64).collect() },
        ];
        for kind in kinds {
            let name = kind.name();
            let spec = GeneratorSpec { kind, n, m, capacities: random_capacities(&mut rng, n, m), seed: rng.gen() };
            let inst = generate_instance(&spec).expect("valid spec");
            out.push(labeled(format!("{name} n={n} m={m}"), inst));
        }
        if let Some(d) = (2..=n / 2).find(|d| n % d == 0) {
            let spec = GeneratorSpec::balanced(GeneratorKind::Block, n, d, 0);
            out.push(labeled(format!("block n={n} m={d}"), generate_instance(&spec).expect("valid spec")));
        }
    }
    out
}
