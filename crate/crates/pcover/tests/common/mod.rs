//! Shared fixtures for the integration suites.

use pcover::fl::FLInstance;
use pcover::mcc::MCCInstance;
use pcover::model::Instance;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One windmill block: `elements` ground elements forming a color with
/// requirement `k`, covered by `elements` cyclic sets of `set_size`
/// consecutive members, all at weight `w`.
pub struct WindmillBlock {
    pub elements: usize,
    pub set_size: usize,
    pub requirement: usize,
    pub weight: f64,
}

impl WindmillBlock {
    pub fn new(elements: usize, set_size: usize, requirement: usize, weight: f64) -> Self {
        WindmillBlock {
            elements,
            set_size,
            requirement,
            weight,
        }
    }
}

/// Concatenates windmill blocks into one instance. With `elements > 36 *
/// requirement` per block, the strengthened solve keeps every element light
/// and leaves the block's residual requirement to the randomized phase.
pub fn windmill(blocks: &[WindmillBlock]) -> Instance {
    let mut sets = Vec::new();
    let mut colors = Vec::new();
    let mut offset = 0;
    for b in blocks {
        for i in 0..b.elements {
            let members: Vec<usize> = (0..b.set_size)
                .map(|t| offset + (i + t) % b.elements)
                .collect();
            sets.push((b.weight, members));
        }
        colors.push(((offset..offset + b.elements).collect(), b.requirement));
        offset += b.elements;
    }
    Instance::new(offset, sets, colors).unwrap()
}

/// A windmill block plus a tiny fully-required color whose set is forced to
/// open, producing a fixture with both heavy and light parts.
pub fn windmill_with_forced_block(elements: usize) -> Instance {
    let mut sets: Vec<(f64, Vec<usize>)> = (0..elements)
        .map(|i| (1.0, vec![i]))
        .collect();
    sets.push((1.0, vec![elements, elements + 1]));
    let colors = vec![
        ((0..elements).collect(), 1),
        (vec![elements, elements + 1], 2),
    ];
    Instance::new(elements + 2, sets, colors).unwrap()
}

/// Seeded facility location instance on the line: facility and client
/// positions drawn in [0, 10), color classes as contiguous client blocks.
pub fn random_fl_line(seed: u64, nf: usize, nc: usize, r: usize) -> FLInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let fpos: Vec<f64> = (0..nf).map(|_| rng.gen_range(0.0..10.0)).collect();
    let cpos: Vec<f64> = (0..nc).map(|_| rng.gen_range(0.0..10.0)).collect();
    let dist: Vec<Vec<f64>> = fpos
        .iter()
        .map(|&f| cpos.iter().map(|&c| (f - c).abs()).collect())
        .collect();
    let cdist: Vec<Vec<f64>> = cpos
        .iter()
        .map(|&a| cpos.iter().map(|&b| (a - b).abs()).collect())
        .collect();
    let costs: Vec<f64> = (0..nf).map(|_| rng.gen_range(0.2..3.0)).collect();
    let mut colors = Vec::new();
    for t in 0..r {
        let start = t * nc / r;
        let end = (t + 1) * nc / r;
        let members: Vec<usize> = (start..end).collect();
        let k = rng.gen_range(1..=members.len());
        colors.push((members, k));
    }
    FLInstance::new(costs, nc, dist, Some(cdist), colors).unwrap()
}

pub fn random_mcc_line(seed: u64, nf: usize, nc: usize, r: usize, gamma: f64) -> MCCInstance {
    let fl = random_fl_line(seed.wrapping_add(0x4D43), nf, nc, r);
    MCCInstance::new(fl, gamma).unwrap()
}

/// Exact facility location optimum by enumerating facility subsets; per open
/// set, the optimal served clients are the cheapest `k_t` per color.
pub fn fl_oracle(fl: &FLInstance) -> f64 {
    let nf = fl.num_facilities();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << nf) {
        let open: Vec<usize> = (0..nf).filter(|&i| mask & (1 << i) != 0).collect();
        let mut cost: f64 = open.iter().map(|&i| fl.open_cost(i)).sum();
        for color in fl.colors() {
            let mut dists: Vec<f64> = color
                .elements
                .iter()
                .map(|&j| fl.nearest_open(&open, j).1)
                .collect();
            dists.sort_by(f64::total_cmp);
            cost += dists[..color.requirement].iter().sum::<f64>();
        }
        best = best.min(cost);
    }
    best
}
