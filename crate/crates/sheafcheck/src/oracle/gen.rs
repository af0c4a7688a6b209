//! Seeded deterministic input generation for sampling.
//!
//! The pool is ints from -8..=8 plus program constants +-1; list inputs
//! draw lengths 0..=6 over the same pool. Boundary cases are always
//! emitted first: the empty list, a singleton, all-zeros, and a small
//! unsorted permutation probe for lists; 0, 1, -1 for ints.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Value;
use crate::frontend::{BaseTy, Ty};

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub seed: u64,
    /// Extra pool constants (program constants +-1).
    pub constants: BTreeSet<i64>,
    /// Generate sorted list inputs (binary-search-shaped callees).
    pub sorted_lists: bool,
    pub max_list_len: usize,
}

impl GenConfig {
    pub fn new(seed: u64) -> GenConfig {
        GenConfig { seed, constants: BTreeSet::new(), sorted_lists: false, max_list_len: 6 }
    }
}

fn int_pool(cfg: &GenConfig) -> Vec<i64> {
    let mut pool: BTreeSet<i64> = (-8..=8).collect();
    for c in &cfg.constants {
        pool.insert(c.saturating_sub(1));
        pool.insert(*c);
        pool.insert(c.saturating_add(1));
    }
    pool.into_iter().collect()
}

/// Deterministic argument tuples for a signature. Identical seeds yield
/// identical sequences.
pub fn generate_inputs(signature: &[Ty], cfg: &GenConfig, n: usize) -> Vec<Vec<Value>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pool = int_pool(cfg);
    let mut out = Vec::with_capacity(n);

    // Forced boundary tuples first (as many as fit the budget).
    let boundaries = boundary_tuples(signature, cfg);
    for b in boundaries.into_iter().take(n) {
        out.push(b);
    }
    while out.len() < n {
        let tuple = signature
            .iter()
            .map(|ty| random_value(ty, &pool, cfg, &mut rng))
            .collect();
        out.push(tuple);
    }
    out
}

fn boundary_tuples(signature: &[Ty], cfg: &GenConfig) -> Vec<Vec<Value>> {
    let list_probes: Vec<Value> = vec![
        Value::List(vec![]),
        Value::list_of(&[0]),
        Value::list_of(&[0, 0, 0]),
        // Canonical unsorted permutation probe.
        Value::list_of(&[3, 1, 2]),
    ];
    let int_probes: Vec<Value> = vec![Value::int(0), Value::int(1), Value::int(-1)];
    let count = list_probes.len().max(int_probes.len());
    let mut out = Vec::new();
    for i in 0..count {
        let tuple: Vec<Value> = signature
            .iter()
            .map(|ty| match ty.base {
                BaseTy::List => {
                    let v = list_probes[i.min(list_probes.len() - 1)].clone();
                    maybe_sort(v, cfg)
                }
                BaseTy::Bool => Value::Bool(i % 2 == 0),
                _ => int_probes[i.min(int_probes.len() - 1)].clone(),
            })
            .collect();
        out.push(tuple);
    }
    out
}

fn maybe_sort(v: Value, cfg: &GenConfig) -> Value {
    if !cfg.sorted_lists {
        return v;
    }
    match v {
        Value::List(mut xs) => {
            xs.sort();
            Value::List(xs)
        }
        other => other,
    }
}

fn random_value(ty: &Ty, pool: &[i64], cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Value {
    match ty.base {
        BaseTy::List => {
            let len = rng.gen_range(0..=cfg.max_list_len);
            let mut xs: Vec<i64> =
                (0..len).map(|_| pool[rng.gen_range(0..pool.len())]).collect();
            if cfg.sorted_lists {
                xs.sort_unstable();
            }
            Value::List(xs.into_iter().map(Value::int).collect())
        }
        BaseTy::Bool => Value::Bool(rng.gen_bool(0.5)),
        _ => Value::int(pool[rng.gen_range(0..pool.len())]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn includes_empty_list_boundary() {
        let cfg = GenConfig::new(7);
        let inputs = generate_inputs(&[Ty::list()], &cfg, 4);
        assert!(inputs.iter().any(|t| matches!(&t[0], Value::List(xs) if xs.is_empty())));
    }

    #[test]
    fn deterministic_for_fixed_seed() {
        let cfg = GenConfig::new(42);
        let a = generate_inputs(&[Ty::int(), Ty::list()], &cfg, 32);
        let b = generate_inputs(&[Ty::int(), Ty::list()], &cfg, 32);
        assert_eq!(a, b);
    }

    #[test]
    fn draws_stay_in_declared_pool() {
        let mut cfg = GenConfig::new(3);
        cfg.constants.insert(12);
        let pool: BTreeSet<i64> = int_pool(&cfg).into_iter().collect();
        let inputs = generate_inputs(&[Ty::int()], &cfg, 64);
        for t in inputs.iter().skip(3) {
            match &t[0] {
                Value::Int(n) => {
                    let n = i64::try_from(n.clone()).unwrap();
                    assert!(pool.contains(&n), "{n} outside pool");
                }
                other => panic!("unexpected {other}"),
            }
        }
    }

    #[test]
    fn sorted_mode_sorts_lists() {
        let mut cfg = GenConfig::new(9);
        cfg.sorted_lists = true;
        let inputs = generate_inputs(&[Ty::list()], &cfg, 32);
        for t in inputs {
            if let Value::List(xs) = &t[0] {
                let mut sorted = xs.clone();
                sorted.sort();
                assert_eq!(xs, &sorted);
            }
        }
    }
}
