//! Minimum-cost ball covering with per-color requirements, reduced to
//! partition set cover over the relevant radii.
//!
//! A ball `B(i, r)` covers the clients within distance `r` of facility `i`
//! and costs `f_i + r^gamma`. Only the radii occurring as client distances
//! matter, so the reduction creates one set per (facility, relevant radius)
//! pair and runs the standard pipeline. The result may pick several
//! concentric balls at one facility; keeping only the largest preserves
//! coverage and never raises the cost.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fl::FLInstance;
use crate::model::{Cover, Instance};
use crate::rounding::{solve, RoundingConfig, RoundingTrace};

/// The ball covering instance: facility location data plus the radius cost
/// exponent `gamma >= 1`.
#[derive(Debug, Clone)]
pub struct MCCInstance {
    pub fl: FLInstance,
    pub gamma: f64,
}

impl MCCInstance {
    pub fn new(fl: FLInstance, gamma: f64) -> Result<MCCInstance> {
        if !(gamma >= 1.0 && gamma.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "gamma must be a finite number at least 1, got {gamma}"
            )));
        }
        Ok(MCCInstance { fl, gamma })
    }

    pub fn from_json(text: &str) -> Result<MCCInstance> {
        let (fl, gamma) = FLInstance::from_json(text)?;
        let gamma = gamma.ok_or_else(|| {
            Error::InvalidInput("ball covering input requires a `gamma` field".into())
        })?;
        MCCInstance::new(fl, gamma)
    }

    pub fn ball_cost(&self, facility: usize, radius: f64) -> f64 {
        self.fl.open_cost(facility) + radius.powf(self.gamma)
    }
}

/// The distinct client distances from a facility, sorted ascending. Any
/// optimal ball at this facility can be shrunk to one of these radii without
/// losing coverage.
pub fn relevant_radii(mcc: &MCCInstance, facility: usize) -> Vec<f64> {
    let mut radii: Vec<f64> = (0..mcc.fl.num_clients())
        .map(|j| mcc.fl.distance(facility, j))
        .collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    radii
}

/// One candidate ball of the reduced system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub facility: usize,
    pub radius: f64,
}

/// Builds the set system over all (facility, relevant radius) balls. The
/// returned map aligns with the instance's set indices.
pub fn mcc_reduce(mcc: &MCCInstance) -> Result<(Instance, Vec<Ball>)> {
    let clients = mcc.fl.num_clients();
    let mut sets: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut balls: Vec<Ball> = Vec::new();
    for i in 0..mcc.fl.num_facilities() {
        for radius in relevant_radii(mcc, i) {
            let members: Vec<usize> = (0..clients)
                .filter(|&j| mcc.fl.distance(i, j) <= radius)
                .collect();
            sets.push((mcc.ball_cost(i, radius), members));
            balls.push(Ball {
                facility: i,
                radius,
            });
        }
    }
    let colors = mcc
        .fl
        .colors()
        .iter()
        .map(|c| (c.elements.clone(), c.requirement))
        .collect();
    let instance = Instance::new(clients, sets, colors)?;
    Ok((instance, balls))
}

/// Keeps only the largest selected radius at each facility. Balls at one
/// facility are nested, so the union of covered clients is unchanged and the
/// cost never increases.
pub fn prune_concentric(cover: &Cover, balls: &[Ball]) -> Cover {
    let mut best: std::collections::BTreeMap<usize, usize> = Default::default();
    for &s in &cover.chosen {
        let ball = balls[s];
        match best.get(&ball.facility) {
            Some(&cur) if balls[cur].radius >= ball.radius => {}
            _ => {
                best.insert(ball.facility, s);
            }
        }
    }
    Cover::new(best.into_values().collect())
}

/// Result of a ball covering run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MccOutput {
    pub balls: Vec<Ball>,
    pub cost: f64,
    pub trace: RoundingTrace,
}

/// Full pipeline: reduce to set cover, run the rounding solver, prune
/// concentric picks, and report the chosen balls.
pub fn solve_mcc(mcc: &MCCInstance, config: &RoundingConfig) -> Result<MccOutput> {
    let (instance, balls) = mcc_reduce(mcc)?;
    let out = solve(&instance, config)?;
    let pruned = prune_concentric(&out.cover, &balls);

    let before = instance.union_of(&out.cover.chosen)?;
    let after = instance.union_of(&pruned.chosen)?;
    if before != after {
        return Err(Error::Contract(
            "concentric pruning changed the covered client set".into(),
        ));
    }
    let report = instance.verify_cover(&pruned)?;
    if !report.feasible {
        return Err(Error::Contract(
            "pruned ball selection misses a color requirement".into(),
        ));
    }

    let selection: Vec<Ball> = pruned.chosen.iter().map(|&s| balls[s]).collect();
    let cost = selection
        .iter()
        .map(|b| mcc.ball_cost(b.facility, b.radius))
        .sum();
    Ok(MccOutput {
        balls: selection,
        cost,
        trace: out.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::exact_opt_guarded;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line_mcc(seed: u64, nf: usize, nc: usize, r: usize, gamma: f64) -> MCCInstance {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fpos: Vec<f64> = (0..nf).map(|_| rng.gen_range(0.0..8.0)).collect();
        let cpos: Vec<f64> = (0..nc).map(|_| rng.gen_range(0.0..8.0)).collect();
        let dist: Vec<Vec<f64>> = fpos
            .iter()
            .map(|&f| cpos.iter().map(|&c| (f - c).abs()).collect())
            .collect();
        let costs: Vec<f64> = (0..nf).map(|_| rng.gen_range(0.0..1.5)).collect();
        let mut colors = Vec::new();
        for t in 0..r {
            let start = t * nc / r;
            let end = (t + 1) * nc / r;
            let members: Vec<usize> = (start..end).collect();
            let k = rng.gen_range(1..=members.len());
            colors.push((members, k));
        }
        let fl = FLInstance::new(costs, nc, dist, None, colors).unwrap();
        MCCInstance::new(fl, gamma).unwrap()
    }

    /// Exact optimum by enumerating one radius choice (or none) per facility.
    fn mcc_oracle(mcc: &MCCInstance) -> f64 {
        let nf = mcc.fl.num_facilities();
        let options: Vec<Vec<Option<f64>>> = (0..nf)
            .map(|i| {
                let mut o: Vec<Option<f64>> = vec![None];
                o.extend(relevant_radii(mcc, i).into_iter().map(Some));
                o
            })
            .collect();
        let mut best = f64::INFINITY;
        let mut picks = vec![0usize; nf];
        loop {
            let mut cost = 0.0;
            let mut feasible_cost = true;
            let mut covered = vec![false; mcc.fl.num_clients()];
            for i in 0..nf {
                if let Some(radius) = options[i][picks[i]] {
                    cost += mcc.ball_cost(i, radius);
                    for j in 0..mcc.fl.num_clients() {
                        if mcc.fl.distance(i, j) <= radius {
                            covered[j] = true;
                        }
                    }
                }
            }
            for color in mcc.fl.colors() {
                let got = color.elements.iter().filter(|&&j| covered[j]).count();
                if got < color.requirement {
                    feasible_cost = false;
                    break;
                }
            }
            if feasible_cost {
                best = best.min(cost);
            }
            // Advance the mixed-radix counter.
            let mut i = 0;
            loop {
                if i == nf {
                    return best;
                }
                picks[i] += 1;
                if picks[i] < options[i].len() {
                    break;
                }
                picks[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn relevant_radii_examples() {
        let fl = FLInstance::new(
            vec![0.0],
            2,
            vec![vec![1.0, 3.0]],
            None,
            vec![(vec![0, 1], 1)],
        )
        .unwrap();
        let mcc = MCCInstance::new(fl, 1.0).unwrap();
        assert_eq!(relevant_radii(&mcc, 0), vec![1.0, 3.0]);

        // Co-located client contributes radius zero; duplicates collapse.
        let fl = FLInstance::new(
            vec![0.0],
            3,
            vec![vec![0.0, 2.0, 2.0]],
            None,
            vec![(vec![0, 1, 2], 1)],
        )
        .unwrap();
        let mcc = MCCInstance::new(fl, 1.0).unwrap();
        assert_eq!(relevant_radii(&mcc, 0), vec![0.0, 2.0]);
    }

    #[test]
    fn reduce_ball_weights() {
        let fl = FLInstance::new(
            vec![0.0],
            2,
            vec![vec![3.0, 3.0]],
            None,
            vec![(vec![0, 1], 1)],
        )
        .unwrap();
        let mcc = MCCInstance::new(fl, 2.0).unwrap();
        let (inst, balls) = mcc_reduce(&mcc).unwrap();
        assert_eq!(balls, vec![Ball { facility: 0, radius: 3.0 }]);
        assert!((inst.sets()[0].weight - 9.0).abs() < 1e-12);

        let fl = FLInstance::new(
            vec![1.0],
            2,
            vec![vec![1.0, 1.0]],
            None,
            vec![(vec![0, 1], 2)],
        )
        .unwrap();
        let mcc = MCCInstance::new(fl, 1.0).unwrap();
        let (inst, _) = mcc_reduce(&mcc).unwrap();
        assert_eq!(inst.sets()[0].elements, vec![0, 1]);
        assert!((inst.sets()[0].weight - 2.0).abs() < 1e-12);
    }

    #[test]
    fn gamma_below_one_rejected() {
        let fl = FLInstance::new(
            vec![0.0],
            1,
            vec![vec![1.0]],
            None,
            vec![(vec![0], 1)],
        )
        .unwrap();
        assert!(MCCInstance::new(fl, 0.5).is_err());
    }

    #[test]
    fn prune_keeps_largest_radius() {
        let mcc = line_mcc(1, 2, 5, 1, 1.0);
        let (inst, balls) = mcc_reduce(&mcc).unwrap();
        // Pick two concentric balls at facility 0 plus one at facility 1.
        let f0: Vec<usize> = (0..balls.len()).filter(|&s| balls[s].facility == 0).collect();
        let f1: Vec<usize> = (0..balls.len()).filter(|&s| balls[s].facility == 1).collect();
        let cover = Cover::new(vec![f0[0], f0[f0.len() - 1], f1[0]]);
        let pruned = prune_concentric(&cover, &balls);
        assert_eq!(pruned.chosen.len(), 2);
        assert_eq!(inst.union_of(&cover.chosen).unwrap(), inst.union_of(&pruned.chosen).unwrap());
        let w_before = inst.weight_of(&cover.chosen);
        let w_after = inst.weight_of(&pruned.chosen);
        assert!(w_after <= w_before + 1e-12);

        // One ball per facility: pruning is the identity.
        let single = Cover::new(vec![f0[1], f1[0]]);
        assert_eq!(prune_concentric(&single, &balls), single);
    }

    #[test]
    fn reduced_optimum_matches_direct_enumeration() {
        for seed in 0..25u64 {
            let mcc = line_mcc(seed, 3, 5, 2, 1.0 + (seed % 3) as f64 * 0.5);
            let (inst, _balls) = mcc_reduce(&mcc).unwrap();
            let reduced_opt = exact_opt_guarded(&inst, 40).unwrap().weight;
            let direct = mcc_oracle(&mcc);
            assert!(
                (reduced_opt - direct).abs() < 1e-9,
                "seed {seed}: {reduced_opt} vs {direct}"
            );
        }
    }

    #[test]
    fn solve_single_cluster() {
        // One zero-cost facility with all clients at distance 1, gamma 1 and
        // a full coverage requirement: one radius-1 ball.
        let fl = FLInstance::new(
            vec![0.0],
            3,
            vec![vec![1.0, 1.0, 1.0]],
            None,
            vec![(vec![0, 1, 2], 3)],
        )
        .unwrap();
        let mcc = MCCInstance::new(fl, 1.0).unwrap();
        let out = solve_mcc(&mcc, &RoundingConfig::default()).unwrap();
        assert_eq!(out.balls, vec![Ball { facility: 0, radius: 1.0 }]);
        assert!((out.cost - 1.0).abs() < 1e-9);
    }

    #[test]
    fn solve_two_private_clusters() {
        // Facilities at 0 and 100, each with a private client at distance 1
        // and a per-cluster color: one small ball each.
        let fl = FLInstance::new(
            vec![0.0, 0.0],
            2,
            vec![vec![1.0, 101.0], vec![99.0, 1.0]],
            None,
            vec![(vec![0], 1), (vec![1], 1)],
        )
        .unwrap();
        let mcc = MCCInstance::new(fl, 1.0).unwrap();
        let out = solve_mcc(&mcc, &RoundingConfig::default()).unwrap();
        let direct = mcc_oracle(&mcc);
        assert!((out.cost - direct).abs() < 1e-9);
        assert_eq!(out.balls.len(), 2);
    }

    #[test]
    fn solve_random_sweep_feasible() {
        for seed in 0..15u64 {
            let mcc = line_mcc(seed, 3, 6, 2, 1.5);
            let config = RoundingConfig {
                seed,
                ..RoundingConfig::default()
            };
            let out = solve_mcc(&mcc, &config).unwrap();
            assert!(out.cost >= mcc_oracle(&mcc) - 1e-9, "seed {seed}");
            // At most one ball per facility after pruning.
            let mut facs: Vec<usize> = out.balls.iter().map(|b| b.facility).collect();
            facs.dedup();
            assert_eq!(facs.len(), out.balls.len());
        }
    }
}
