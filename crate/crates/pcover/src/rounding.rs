//! Heavy/light element split, set-cover rounders for the heavy part, and the
//! iterated randomized rounding that covers the residual color requirements.
//!
//! The pipeline: obtain a cut-strengthened fractional solution, cover the
//! heavily-covered elements with a deterministic set-cover rounder, then run
//! `ceil(c * ln(r+1))` independent rounding iterations in which each remaining
//! set is taken with probability `6 x_i`. A draw is accepted when the combined
//! cover is feasible and the random part's weight stays within the Markov
//! budget; otherwise the draw is redone with a fresh stream, up to
//! `max_restarts` times.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::EPS_FEAS;
use crate::model::{Cover, Instance, Projection};
use crate::partition::{check_kc, find_solution, SearchOptions, StrengthenedSolution};
use crate::rng::{RngStream, SplitRng};

/// Scaled-coverage threshold below which an element counts as light.
pub fn heavy_threshold(alpha: f64) -> f64 {
    1.0 / (6.0 * alpha)
}

/// Fractional coverage of one element under per-set values `x`.
pub fn coverage(instance: &Instance, x: &[f64], element: usize) -> f64 {
    instance.sets_of(element).iter().map(|&i| x[i]).sum()
}

/// Elements whose fractional coverage reaches `1/(6*alpha)`, within the
/// solver's feasibility tolerance.
pub fn heavy_elements(instance: &Instance, x: &[f64], alpha: f64) -> Vec<usize> {
    let thr = heavy_threshold(alpha) - EPS_FEAS;
    (0..instance.num_elements())
        .filter(|&j| coverage(instance, x, j) >= thr)
        .collect()
}

/// Sets whose own value reaches the heavy threshold; these join the committed
/// collection because all of their elements are heavy.
pub fn heavy_sets(x: &[f64], alpha: f64) -> Vec<usize> {
    let thr = heavy_threshold(alpha) - EPS_FEAS;
    (0..x.len()).filter(|&i| x[i] >= thr).collect()
}

/// Scales a fractional solution by `6*alpha`, capped at 1. For every heavy
/// element the scaled coverage reaches 1, so the result is a feasible
/// fractional set cover on the heavy projection.
pub fn scale_solution(x: &[f64], alpha: f64) -> Vec<f64> {
    x.iter().map(|&v| (6.0 * alpha * v).min(1.0)).collect()
}

/// A set-cover rounding procedure for a projected system: turns a feasible
/// fractional cover into an integral one. The greedy rounder ignores the
/// fractional input; the frequency rounder consumes it.
pub trait Rounder {
    fn round(&self, system: &Projection, fractional: &[f64]) -> Result<Cover>;
}

/// Classical weighted greedy: repeatedly take the set minimizing weight per
/// newly covered element.
#[derive(Debug, Clone, Copy, Default)]
pub struct GreedyRounder;

/// Threshold rounding at `1/f`, where `f` is the maximum element frequency.
#[derive(Debug, Clone, Copy, Default)]
pub struct FrequencyRounder;

/// Rounder selection for configs and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RounderKind {
    Greedy,
    Frequency,
}

impl RounderKind {
    pub fn rounder(self) -> &'static dyn Rounder {
        match self {
            RounderKind::Greedy => &GreedyRounder,
            RounderKind::Frequency => &FrequencyRounder,
        }
    }
}

impl std::str::FromStr for RounderKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(RounderKind::Greedy),
            "frequency" => Ok(RounderKind::Frequency),
            other => Err(Error::InvalidInput(format!(
                "unknown rounder `{other}` (expected greedy or frequency)"
            ))),
        }
    }
}

impl Rounder for GreedyRounder {
    fn round(&self, system: &Projection, _fractional: &[f64]) -> Result<Cover> {
        greedy_cover(system)
    }
}

impl Rounder for FrequencyRounder {
    fn round(&self, system: &Projection, fractional: &[f64]) -> Result<Cover> {
        frequency_cover(system, fractional)
    }
}

/// Greedy weighted set cover over a projection. The returned cover uses the
/// projection's set indices, which line up with the originating instance.
pub fn greedy_cover(system: &Projection) -> Result<Cover> {
    let ny = system.num_elements();
    let mut covered = vec![false; ny];
    let mut remaining = ny;
    let mut chosen = Vec::new();

    while remaining > 0 {
        let mut best: Option<(f64, usize, usize)> = None; // (ratio, set, gain)
        for (i, set) in system.sets.iter().enumerate() {
            let gain = set.iter().filter(|&&e| !covered[e]).count();
            if gain == 0 {
                continue;
            }
            let ratio = system.weights[i] / gain as f64;
            if best.is_none_or(|(r, _, _)| ratio < r) {
                best = Some((ratio, i, gain));
            }
        }
        let Some((_, i, gain)) = best else {
            return Err(Error::InvalidInput(
                "greedy rounder: some element is contained in no set".into(),
            ));
        };
        for &e in &system.sets[i] {
            if !covered[e] {
                covered[e] = true;
            }
        }
        remaining -= gain;
        chosen.push(i);
    }
    Ok(Cover::new(chosen))
}

/// Frequency rounding: `fractional` must cover every projected element to at
/// least 1; every set with value at least `1/f` is selected.
pub fn frequency_cover(system: &Projection, fractional: &[f64]) -> Result<Cover> {
    const TOL: f64 = 1e-5;
    let ny = system.num_elements();
    if ny == 0 {
        return Ok(Cover::empty());
    }
    let mut cov = vec![0.0f64; ny];
    for (i, set) in system.sets.iter().enumerate() {
        for &e in set {
            cov[e] += fractional[i];
        }
    }
    if let Some(j) = cov.iter().position(|&c| c < 1.0 - TOL) {
        return Err(Error::InvalidInput(format!(
            "frequency rounder: fractional cover leaves element {j} at {:.4} < 1",
            cov[j]
        )));
    }
    let f = system.max_frequency();
    let threshold = 1.0 / f as f64 - TOL;
    let chosen: Vec<usize> = (0..system.num_sets())
        .filter(|&i| !system.sets[i].is_empty() && fractional[i] >= threshold)
        .collect();
    Ok(Cover::new(chosen))
}

/// One iteration of randomized rounding: every set outside `base` joins the
/// draw independently with probability `6 x_i`. Callers guarantee
/// `x_i < 1/(6*alpha)` off the base, so the probability is genuine; a value
/// pushing it past 1 is a contract violation rather than something to clamp.
pub fn randomized_round_once(
    instance: &Instance,
    x: &[f64],
    base: &[usize],
    stream: &RngStream,
) -> Result<Vec<usize>> {
    let m = instance.num_sets();
    if x.len() != m {
        return Err(Error::InvalidInput(format!(
            "x has {} entries but the instance has {m} sets",
            x.len()
        )));
    }
    let mut in_base = vec![false; m];
    for &i in base {
        if i >= m {
            return Err(Error::InvalidInput(format!("base set index {i} out of range")));
        }
        in_base[i] = true;
    }
    let mut chosen = Vec::new();
    for i in 0..m {
        if in_base[i] {
            continue;
        }
        let p = 6.0 * x[i];
        if p > 1.0 + EPS_FEAS {
            return Err(Error::Contract(format!(
                "randomized rounding requires 6*x < 1 off the base; set {i} has x={}",
                x[i]
            )));
        }
        if stream.uniform(i as u64) < p.min(1.0) {
            chosen.push(i);
        }
    }
    Ok(chosen)
}

/// Expected weight of a single rounding draw: `6 * sum_{i not in base} w_i x_i`.
pub fn expected_sigma_weight(instance: &Instance, x: &[f64], base: &[usize]) -> f64 {
    let mut in_base = vec![false; instance.num_sets()];
    for &i in base {
        in_base[i] = true;
    }
    6.0 * instance
        .sets()
        .iter()
        .enumerate()
        .filter(|(i, _)| !in_base[*i])
        .map(|(i, s)| s.weight * x[i])
        .sum::<f64>()
}

/// Number of rounding iterations per restart: `ceil(c * ln(r + 1))`, at least 1.
pub fn iteration_count(c: f64, num_colors: usize) -> usize {
    ((c * ((num_colors as f64) + 1.0).ln()).ceil() as usize).max(1)
}

/// Parameters of the full rounding pipeline.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundingConfig {
    pub alpha: f64,
    /// Iteration constant: each restart runs `ceil(c * ln(r+1))` draws.
    pub c: f64,
    pub max_restarts: usize,
    pub seed: u64,
    pub rounder: RounderKind,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        RoundingConfig {
            alpha: 6.0,
            c: 4.0,
            max_restarts: 20,
            seed: 0,
            rounder: RounderKind::Greedy,
        }
    }
}

impl RoundingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) {
            return Err(Error::InvalidInput(format!(
                "alpha must exceed 1, got {}",
                self.alpha
            )));
        }
        if !(self.c > 0.0) {
            return Err(Error::InvalidInput(format!("c must be positive, got {}", self.c)));
        }
        if self.max_restarts == 0 {
            return Err(Error::InvalidInput("max_restarts must be positive".into()));
        }
        Ok(())
    }
}

/// One restart of the randomized phase.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RestartRecord {
    pub iterations: usize,
    /// Per-iteration chosen set lists.
    pub chosen: Vec<Vec<usize>>,
    pub feasible: bool,
    pub sigma_weight: f64,
    pub accepted: bool,
}

/// Full record of a pipeline run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundingTrace {
    pub delta: f64,
    /// Weight of the deterministic heavy cover.
    pub heavy_weight: f64,
    /// Fractional weight of the strengthened solution.
    pub lp_weight: f64,
    pub iterations: usize,
    pub separated_cuts: usize,
    pub delta_raised: bool,
    pub restarts: Vec<RestartRecord>,
}

/// Result of [`solve`]: the feasible cover, the run trace, and the fractional
/// solution the rounding was driven by.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub cover: Cover,
    pub trace: RoundingTrace,
    pub strengthened: StrengthenedSolution,
}

/// Runs the whole pipeline and returns a feasible cover.
///
/// A restart is accepted only if the combined cover verifies as feasible and
/// the random part's weight stays within `3 * 6 * iterations * delta`. If
/// every restart is rejected, the cost guess is doubled once and the pipeline
/// re-entered; a second exhaustion is reported as an error carrying the trace.
pub fn solve(instance: &Instance, config: &RoundingConfig) -> Result<SolveOutput> {
    config.validate()?;
    let rounder = config.rounder.rounder();
    let mut options = SearchOptions::default();
    let mut strengthened = find_solution(instance, rounder, config.alpha, &options)?;

    let iterations = iteration_count(config.c, instance.num_colors());
    let rng = SplitRng::new(config.seed);
    let mut trace = RoundingTrace {
        delta: strengthened.delta_guess,
        heavy_weight: instance.weight_of(&strengthened.heavy_cover.chosen),
        lp_weight: strengthened.weight(instance),
        iterations,
        separated_cuts: strengthened.separated_cuts(),
        delta_raised: false,
        restarts: Vec::new(),
    };

    for attempt in 0..2u64 {
        let budget = 18.0 * iterations as f64 * strengthened.delta_guess;
        let x = &strengthened.frac.x;
        let base = &strengthened.base;
        for local in 0..config.max_restarts as u64 {
            let restart = attempt * config.max_restarts as u64 + local;
            let mut chosen_lists = Vec::with_capacity(iterations);
            let mut sigma: Vec<usize> = Vec::new();
            for l in 0..iterations as u64 {
                let draw = randomized_round_once(instance, x, base, &rng.stream(restart, l))?;
                sigma.extend_from_slice(&draw);
                chosen_lists.push(draw);
            }
            sigma.sort_unstable();
            sigma.dedup();
            let sigma_weight = instance.weight_of(&sigma);

            let mut combined = strengthened.heavy_cover.chosen.clone();
            combined.extend_from_slice(&sigma);
            let candidate = Cover::new(combined);
            let feasible = instance.verify_cover(&candidate)?.feasible;
            let accepted = feasible && sigma_weight <= budget;
            trace.restarts.push(RestartRecord {
                iterations,
                chosen: chosen_lists,
                feasible,
                sigma_weight,
                accepted,
            });
            if accepted {
                return Ok(SolveOutput {
                    cover: candidate,
                    trace,
                    strengthened,
                });
            }
        }
        if attempt == 0 {
            // Every restart was rejected: the cost guess may be too tight.
            options.delta_floor = Some(strengthened.delta_guess * 2.0);
            strengthened = find_solution(instance, rounder, config.alpha, &options)?;
            trace.delta = strengthened.delta_guess;
            trace.heavy_weight = instance.weight_of(&strengthened.heavy_cover.chosen);
            trace.lp_weight = strengthened.weight(instance);
            trace.separated_cuts = strengthened.separated_cuts();
            trace.delta_raised = true;
        }
    }
    Err(Error::RestartsExhausted {
        restarts: 2 * config.max_restarts,
        trace: Box::new(trace),
    })
}

/// Monte Carlo estimate of the probability that a single rounding iteration
/// meets color `t`'s residual requirement over the given base.
///
/// Requires a positive residual, a positive trial count, and a fractional
/// solution that satisfies the strengthened row for this base.
pub fn estimate_iteration_success(
    instance: &Instance,
    x: &[f64],
    base: &[usize],
    t: usize,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::Contract("trials must be positive".into()));
    }
    if t >= instance.num_colors() {
        return Err(Error::InvalidInput(format!(
            "color index {t} out of range (r={})",
            instance.num_colors()
        )));
    }
    let state = instance.residual(base)?;
    let k = state.residual_per_color[t];
    if k == 0 {
        return Err(Error::Contract(format!(
            "color {t} has zero residual requirement over this base"
        )));
    }
    if let Some(violated) = check_kc(instance, x, base)? {
        return Err(Error::Contract(format!(
            "strengthened row for color {violated} is violated by the given solution"
        )));
    }

    let mut uncovered = vec![false; instance.num_elements()];
    for &e in &instance.colors()[t].elements {
        if state.covered_per_color[t].binary_search(&e).is_err() {
            uncovered[e] = true;
        }
    }

    let rng = SplitRng::new(seed);
    let mut seen = vec![false; instance.num_elements()];
    let mut hits = 0usize;
    for trial in 0..trials as u64 {
        let sigma = randomized_round_once(instance, x, &state.base, &rng.stream(trial, 0))?;
        let mut fresh = 0usize;
        let mut touched: Vec<usize> = Vec::new();
        for &i in &sigma {
            for &e in &instance.sets()[i].elements {
                if uncovered[e] && !seen[e] {
                    seen[e] = true;
                    touched.push(e);
                    fresh += 1;
                }
            }
        }
        for e in touched {
            seen[e] = false;
        }
        if fresh >= k {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gap_instance, random_instance, RandomParams};
    use crate::model::Instance;
    use crate::oracle::exact_opt;

    /// One color of `e` elements with requirement `k`, covered by `e` cyclic
    /// sets of `d` consecutive elements each. With `e > 36 k` the spread LP
    /// solution keeps every element light, so the pipeline's randomized phase
    /// does all the work.
    fn thin_cycle(e: usize, d: usize, k: usize, w: f64) -> Instance {
        let sets: Vec<(f64, Vec<usize>)> = (0..e)
            .map(|i| (w, (0..d).map(|t| (i + t) % e).collect()))
            .collect();
        Instance::new(e, sets, vec![((0..e).collect(), k)]).unwrap()
    }

    #[test]
    fn heavy_element_threshold() {
        let gap = gap_instance(4).unwrap();
        assert_eq!(heavy_elements(&gap, &[0.5, 0.5], 6.0), vec![0, 1, 2, 3]);
        assert!(heavy_elements(&gap, &[0.0, 0.0], 6.0).is_empty());

        // An element in three sets at 0.01 each: 0.03 >= 1/36.
        let inst = Instance::new(
            1,
            vec![(1.0, vec![0]), (1.0, vec![0]), (1.0, vec![0])],
            vec![(vec![0], 1)],
        )
        .unwrap();
        assert_eq!(heavy_elements(&inst, &[0.01, 0.01, 0.01], 6.0), vec![0]);
        assert!(heavy_elements(&inst, &[0.009, 0.009, 0.009], 6.0).is_empty());
    }

    #[test]
    fn scaling_formula() {
        let scaled = scale_solution(&[1.0 / 36.0, 0.01, 0.0], 6.0);
        assert!((scaled[0] - 1.0).abs() < 1e-12);
        assert!((scaled[1] - 0.36).abs() < 1e-12);
        assert_eq!(scaled[2], 0.0);
    }

    #[test]
    fn greedy_examples() {
        // Y={0..3}; A={0,1,2} w1, B={0,1} w1, C={2,3} w1. Exhaustive search
        // over subsets confirms the optimum weight is 2.
        let inst = Instance::new(
            4,
            vec![(1.0, vec![0, 1, 2]), (1.0, vec![0, 1]), (1.0, vec![2, 3])],
            vec![(vec![0, 1, 2, 3], 4)],
        )
        .unwrap();
        let full = inst.project(&[0, 1, 2, 3]).unwrap();
        let cover = greedy_cover(&full).unwrap();
        assert_eq!(cover.chosen, vec![0, 2]);
        assert_eq!(exact_opt(&inst).unwrap().weight, 2.0);

        let single = Instance::new(2, vec![(3.0, vec![0, 1])], vec![(vec![0, 1], 1)]).unwrap();
        let proj = single.project(&[0, 1]).unwrap();
        assert_eq!(greedy_cover(&proj).unwrap().chosen, vec![0]);

        let empty = single.project(&[]).unwrap();
        assert!(greedy_cover(&empty).unwrap().chosen.is_empty());
    }

    #[test]
    fn greedy_rejects_uncoverable() {
        let inst = Instance::new(2, vec![(1.0, vec![0])], vec![(vec![0, 1], 1)]).unwrap();
        let proj = inst.project(&[0, 1]).unwrap();
        assert!(greedy_cover(&proj).is_err());
    }

    #[test]
    fn frequency_examples() {
        // One element in two sets, both at 0.5: f=2, both selected.
        let two = Instance::new(1, vec![(1.0, vec![0]), (1.0, vec![0])], vec![(vec![0], 1)])
            .unwrap();
        let proj = two.project(&[0]).unwrap();
        assert_eq!(frequency_cover(&proj, &[0.5, 0.5]).unwrap().chosen, vec![0, 1]);

        let single = Instance::new(1, vec![(1.0, vec![0])], vec![(vec![0], 1)]).unwrap();
        let proj = single.project(&[0]).unwrap();
        assert_eq!(frequency_cover(&proj, &[1.0]).unwrap().chosen, vec![0]);

        // f=3, values (0.4, 0.4, 0.2): the first two clear the 1/3 threshold.
        let three = Instance::new(
            1,
            vec![(1.0, vec![0]), (1.0, vec![0]), (1.0, vec![0])],
            vec![(vec![0], 1)],
        )
        .unwrap();
        let proj = three.project(&[0]).unwrap();
        let cover = frequency_cover(&proj, &[0.4, 0.4, 0.2]).unwrap();
        assert_eq!(cover.chosen, vec![0, 1]);

        // Infeasible fractional input is rejected.
        assert!(frequency_cover(&proj, &[0.2, 0.2, 0.2]).is_err());
    }

    #[test]
    fn round_once_zero_and_contract() {
        let gap = gap_instance(4).unwrap();
        let stream = SplitRng::new(1).stream(0, 0);
        assert!(randomized_round_once(&gap, &[0.0, 0.0], &[], &stream)
            .unwrap()
            .is_empty());
        // 6 * 0.2 > 1 off the base: clamping would distort the distribution.
        assert!(matches!(
            randomized_round_once(&gap, &[0.2, 0.0], &[], &stream),
            Err(Error::Contract(_))
        ));
        // The same set inside the base is fine.
        randomized_round_once(&gap, &[0.2, 0.0], &[0], &stream).unwrap();
    }

    #[test]
    fn round_once_inclusion_frequency() {
        let inst = Instance::new(
            2,
            vec![(1.0, vec![0]), (1.0, vec![1])],
            vec![(vec![0, 1], 1)],
        )
        .unwrap();
        let x = [0.02, 0.02];
        let rng = SplitRng::new(9);
        let trials = 100_000u64;
        let mut count = [0usize; 2];
        for t in 0..trials {
            for &i in &randomized_round_once(&inst, &x, &[], &rng.stream(t, 0)).unwrap() {
                count[i] += 1;
            }
        }
        // Binomial with p = 0.12; 0.004 is about 4 sigma at 1e5 trials.
        for c in count {
            let freq = c as f64 / trials as f64;
            assert!((freq - 0.12).abs() < 0.004, "frequency {freq}");
        }
    }

    #[test]
    fn solve_single_set_cover() {
        let inst = Instance::new(3, vec![(2.0, vec![0, 1, 2])], vec![(vec![0, 1, 2], 3)]).unwrap();
        let out = solve(&inst, &RoundingConfig::default()).unwrap();
        assert_eq!(out.cover.chosen, vec![0]);
        assert_eq!(inst.weight_of(&out.cover.chosen), 2.0);
    }

    #[test]
    fn solve_gap_matches_optimum() {
        let gap = gap_instance(4).unwrap();
        let out = solve(&gap, &RoundingConfig::default()).unwrap();
        assert_eq!(out.cover.chosen, vec![0, 1]);
        assert_eq!(gap.weight_of(&out.cover.chosen), 2.0);
    }

    #[test]
    fn solve_random_sweep_is_feasible() {
        for seed in 0..20u64 {
            let inst = random_instance(&RandomParams::new(
                2 + (seed as usize % 11),
                1 + (seed as usize % 10),
                1 + (seed as usize % 4).min(1 + seed as usize % 11),
                0.35,
                seed,
            ))
            .unwrap();
            let config = RoundingConfig {
                seed,
                ..RoundingConfig::default()
            };
            let out = solve(&inst, &config).unwrap();
            let report = inst.verify_cover(&out.cover).unwrap();
            assert!(report.feasible, "seed {seed}");
            let opt = exact_opt(&inst).unwrap();
            assert!(report.total_weight >= opt.weight - 1e-9, "seed {seed}");
        }
    }

    #[test]
    fn solve_is_deterministic() {
        let inst = random_instance(&RandomParams::new(10, 8, 3, 0.3, 4)).unwrap();
        let config = RoundingConfig {
            seed: 123,
            ..RoundingConfig::default()
        };
        let a = solve(&inst, &config).unwrap();
        let b = solve(&inst, &config).unwrap();
        assert_eq!(a.cover, b.cover);
        assert_eq!(
            serde_json::to_string(&a.trace).unwrap(),
            serde_json::to_string(&b.trace).unwrap()
        );
    }

    #[test]
    fn thin_cycle_pipeline_stays_light() {
        let inst = thin_cycle(40, 1, 1, 1.0);
        let out = solve(&inst, &RoundingConfig::default()).unwrap();
        assert!(inst.verify_cover(&out.cover).unwrap().feasible);
        // The strengthened solution keeps every set below the heavy threshold,
        // so the base is empty and the randomized phase covered the color.
        assert!(out.strengthened.base.is_empty());
        assert_eq!(out.trace.heavy_weight, 0.0);
        let state = inst.residual(&out.strengthened.base).unwrap();
        assert_eq!(state.residual_per_color[0], 1);
    }

    #[test]
    fn iteration_success_closed_form() {
        // 40 singleton sets at x = 1/40 covering one color with k = 1:
        // per-iteration success probability is 1 - (1 - 0.15)^40.
        let inst = thin_cycle(40, 1, 1, 1.0);
        let x = vec![1.0 / 40.0; 40];
        let expected = 1.0 - 0.85f64.powi(40);
        let est = estimate_iteration_success(&inst, &x, &[], 0, 10_000, 7).unwrap();
        let sigma = (expected * (1.0 - expected) / 10_000.0).sqrt();
        assert!(
            (est - expected).abs() <= 4.0 * sigma + 1e-9,
            "estimate {est} vs {expected}"
        );
    }

    #[test]
    fn iteration_success_contracts() {
        let inst = thin_cycle(40, 1, 1, 1.0);
        let x = vec![1.0 / 40.0; 40];
        assert!(matches!(
            estimate_iteration_success(&inst, &x, &[], 0, 0, 7),
            Err(Error::Contract(_))
        ));
        // Base covering the color: zero residual.
        let base: Vec<usize> = (0..40).collect();
        assert!(matches!(
            estimate_iteration_success(&inst, &x, &base, 0, 100, 7),
            Err(Error::Contract(_))
        ));
        // A solution violating the strengthened row is rejected.
        let weak = vec![0.001; 40];
        assert!(matches!(
            estimate_iteration_success(&inst, &weak, &[], 0, 100, 7),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn sigma_weight_expectation() {
        let inst = thin_cycle(40, 1, 1, 1.0);
        let x = vec![1.0 / 40.0; 40];
        let expected = expected_sigma_weight(&inst, &x, &[]);
        assert!((expected - 6.0).abs() < 1e-9);

        let rng = SplitRng::new(3);
        let trials = 10_000u64;
        let mut total = 0.0;
        let mut totalsq = 0.0;
        for t in 0..trials {
            let sigma = randomized_round_once(&inst, &x, &[], &rng.stream(t, 0)).unwrap();
            let w = inst.weight_of(&sigma);
            total += w;
            totalsq += w * w;
        }
        let mean = total / trials as f64;
        let var = (totalsq / trials as f64 - mean * mean).max(0.0);
        let rse = (var / trials as f64).sqrt();
        assert!(
            (mean - expected).abs() <= 5.0 * rse,
            "mean {mean} vs expected {expected} (rse {rse})"
        );
    }
}
