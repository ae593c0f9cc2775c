//! Fixture builders shared by the criterion benchmarks.

use pcover::generators::{gap_instance, random_instance, RandomParams};
use pcover::model::Instance;

pub fn gap(n: usize) -> Instance {
    gap_instance(n).expect("perfect square")
}

pub fn random(n: usize, m: usize, r: usize, seed: u64) -> Instance {
    random_instance(&RandomParams::new(n, m, r, 0.3, seed)).expect("valid parameters")
}

/// One color class of cyclically overlapping thin sets; keeps every element
/// below the heavy threshold so the randomized phase dominates the runtime.
pub fn thin_cycle(elements: usize, set_size: usize, requirement: usize) -> Instance {
    let sets: Vec<(f64, Vec<usize>)> = (0..elements)
        .map(|i| (1.0, (0..set_size).map(|t| (i + t) % elements).collect()))
        .collect();
    Instance::new(elements, sets, vec![((0..elements).collect(), requirement)])
        .expect("valid construction")
}
