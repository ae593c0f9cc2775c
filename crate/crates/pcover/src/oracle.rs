//! Exact optimal covers for small instances, used as ground truth in tests
//! and benchmark ratio reports.
//!
//! [`exact_opt`] runs a branch-and-bound over include/exclude decisions with
//! an admissible completion bound; [`exact_opt_bruteforce`] enumerates all
//! subsets and exists to cross-check the branch-and-bound. Ties between
//! equal-weight optima go to the lexicographically smallest index set in both.

use crate::error::{Error, Result};
use crate::model::{Cover, Instance};

/// Weight comparisons treat differences below this as ties.
const WEIGHT_TIE: f64 = 1e-9;

/// Default guard for [`exact_opt`]; instances with more sets are refused.
pub const BB_SET_LIMIT: usize = 25;
/// Guard for [`exact_opt_bruteforce`].
pub const BRUTE_SET_LIMIT: usize = 16;

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub cover: Cover,
    pub weight: f64,
    pub nodes: u64,
}

/// True when `(weight_a, chosen_a)` beats `(weight_b, chosen_b)`: strictly
/// lighter, or tied in weight and lexicographically smaller.
fn better(weight_a: f64, chosen_a: &[usize], weight_b: f64, chosen_b: &[usize]) -> bool {
    if weight_a < weight_b - WEIGHT_TIE {
        return true;
    }
    if weight_a > weight_b + WEIGHT_TIE {
        return false;
    }
    chosen_a < chosen_b
}

/// Per-color members as bit masks over the ground set, packed into u64 words.
struct Masks {
    words: usize,
    sets: Vec<Vec<u64>>,
    colors: Vec<Vec<u64>>,
    requirements: Vec<usize>,
}

impl Masks {
    fn build(instance: &Instance) -> Masks {
        let n = instance.num_elements();
        let words = n.div_ceil(64).max(1);
        let pack = |elements: &[usize]| {
            let mut mask = vec![0u64; words];
            for &e in elements {
                mask[e / 64] |= 1 << (e % 64);
            }
            mask
        };
        Masks {
            words,
            sets: instance.sets().iter().map(|s| pack(&s.elements)).collect(),
            colors: instance
                .colors()
                .iter()
                .map(|c| pack(&c.elements))
                .collect(),
            requirements: instance
                .colors()
                .iter()
                .map(|c| c.requirement)
                .collect(),
        }
    }

    fn or_into(&self, acc: &mut [u64], set: usize) {
        for (a, b) in acc.iter_mut().zip(&self.sets[set]) {
            *a |= b;
        }
    }

    fn feasible(&self, covered: &[u64]) -> bool {
        self.colors.iter().zip(&self.requirements).all(|(c, &k)| {
            let got: u32 = c
                .iter()
                .zip(covered)
                .map(|(cm, cov)| (cm & cov).count_ones())
                .sum();
            got as usize >= k
        })
    }

    /// Total shortfall across colors for the given coverage.
    fn deficit(&self, covered: &[u64]) -> usize {
        self.colors
            .iter()
            .zip(&self.requirements)
            .map(|(c, &k)| {
                let got: u32 = c
                    .iter()
                    .zip(covered)
                    .map(|(cm, cov)| (cm & cov).count_ones())
                    .sum();
                k.saturating_sub(got as usize)
            })
            .sum()
    }

    /// How much a set reduces the total shortfall, counting each color's
    /// contribution only up to its remaining requirement.
    fn gain(&self, covered: &[u64], set: usize) -> usize {
        self.colors
            .iter()
            .zip(&self.requirements)
            .map(|(c, &k)| {
                let got: u32 = c
                    .iter()
                    .zip(covered)
                    .map(|(cm, cov)| (cm & cov).count_ones())
                    .sum();
                let need = k.saturating_sub(got as usize);
                if need == 0 {
                    return 0;
                }
                let fresh: u32 = c
                    .iter()
                    .zip(covered)
                    .zip(&self.sets[set])
                    .map(|((cm, cov), sm)| (cm & sm & !cov).count_ones())
                    .sum();
                need.min(fresh as usize)
            })
            .sum()
    }
}

struct Search<'a> {
    instance: &'a Instance,
    masks: Masks,
    /// Set indices in branching order (by weight per unit of initial gain).
    order: Vec<usize>,
    best_weight: f64,
    best_chosen: Option<Vec<usize>>,
    nodes: u64,
}

impl Search<'_> {
    /// Admissible completion bound: the remaining shortfall divided by the
    /// best per-set gain still available, times the cheapest remaining weight.
    fn completion_bound(&self, covered: &[u64], depth: usize) -> f64 {
        let deficit = self.masks.deficit(covered);
        if deficit == 0 {
            return 0.0;
        }
        let mut best_gain = 0usize;
        let mut min_weight = f64::INFINITY;
        for &i in &self.order[depth..] {
            best_gain = best_gain.max(self.masks.gain(covered, i));
            min_weight = min_weight.min(self.instance.sets()[i].weight);
        }
        if best_gain == 0 {
            return f64::INFINITY; // dead end: requirements unreachable
        }
        let sets_needed = deficit.div_ceil(best_gain);
        sets_needed as f64 * min_weight
    }

    fn explore(&mut self, covered: &mut Vec<u64>, chosen: &mut Vec<usize>, weight: f64, depth: usize) {
        self.nodes += 1;
        if self.masks.feasible(covered) {
            let candidate: Vec<usize> = {
                let mut c = chosen.clone();
                c.sort_unstable();
                c
            };
            if self
                .best_chosen
                .as_ref()
                .is_none_or(|best| better(weight, &candidate, self.best_weight, best))
            {
                self.best_weight = weight;
                self.best_chosen = Some(candidate);
            }
            return;
        }
        if depth == self.order.len() {
            return;
        }
        let bound = weight + self.completion_bound(covered, depth);
        // Prune strictly above the incumbent only: ties must be explored so
        // the lexicographically smallest optimum wins.
        if self.best_chosen.is_some() && bound > self.best_weight + WEIGHT_TIE {
            return;
        }
        if bound.is_infinite() {
            return;
        }

        let i = self.order[depth];
        // Include branch first: taking cheap high-gain sets early tightens
        // the incumbent and the bound.
        let saved = covered.clone();
        self.masks.or_into(covered, i);
        chosen.push(i);
        self.explore(covered, chosen, weight + self.instance.sets()[i].weight, depth + 1);
        chosen.pop();
        *covered = saved;

        self.explore(covered, chosen, weight, depth + 1);
    }
}

/// Globally minimal feasible cover by branch-and-bound. Refuses instances
/// with more than `BB_SET_LIMIT` sets unless a higher guard is supplied.
pub fn exact_opt_guarded(instance: &Instance, set_limit: usize) -> Result<OracleResult> {
    let m = instance.num_sets();
    if m > set_limit {
        return Err(Error::InvalidInput(format!(
            "exact search refused: {m} sets exceeds the guard of {set_limit}"
        )));
    }
    let masks = Masks::build(instance);

    let empty = vec![0u64; masks.words];
    let mut order: Vec<usize> = (0..m).collect();
    let ratio = |i: usize| {
        let gain = masks.gain(&empty, i);
        if gain == 0 {
            f64::INFINITY
        } else {
            instance.sets()[i].weight / gain as f64
        }
    };
    order.sort_by(|&a, &b| ratio(a).total_cmp(&ratio(b)).then(a.cmp(&b)));

    let mut search = Search {
        instance,
        masks,
        order,
        best_weight: f64::INFINITY,
        best_chosen: None,
        nodes: 0,
    };
    let mut covered = empty;
    let mut chosen = Vec::new();
    search.explore(&mut covered, &mut chosen, 0.0, 0);

    match search.best_chosen {
        Some(chosen) => Ok(OracleResult {
            weight: instance.weight_of(&chosen),
            cover: Cover { chosen },
            nodes: search.nodes,
        }),
        None => Err(Error::Infeasible(
            "no feasible cover exists; instance invariants should rule this out".into(),
        )),
    }
}

pub fn exact_opt(instance: &Instance) -> Result<OracleResult> {
    exact_opt_guarded(instance, BB_SET_LIMIT)
}

/// Full subset enumeration; the independent cross-check for [`exact_opt`].
pub fn exact_opt_bruteforce(instance: &Instance) -> Result<OracleResult> {
    let m = instance.num_sets();
    if m > BRUTE_SET_LIMIT {
        return Err(Error::InvalidInput(format!(
            "brute force refused: {m} sets exceeds the guard of {BRUTE_SET_LIMIT}"
        )));
    }
    let masks = Masks::build(instance);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut nodes = 0u64;
    for mask in 0u32..(1u32 << m) {
        nodes += 1;
        let mut covered = vec![0u64; masks.words];
        let mut weight = 0.0;
        let mut chosen = Vec::new();
        for i in 0..m {
            if mask & (1 << i) != 0 {
                masks.or_into(&mut covered, i);
                weight += instance.sets()[i].weight;
                chosen.push(i);
            }
        }
        if masks.feasible(&covered)
            && best
                .as_ref()
                .is_none_or(|(bw, bc)| better(weight, &chosen, *bw, bc))
        {
            best = Some((weight, chosen));
        }
    }
    match best {
        Some((weight, chosen)) => Ok(OracleResult {
            cover: Cover { chosen },
            weight,
            nodes,
        }),
        None => Err(Error::Infeasible(
            "no feasible cover exists; instance invariants should rule this out".into(),
        )),
    }
}
