//! The covering LP for partition set cover, knapsack-cover rows, and the
//! guess-and-cut search that produces the strengthened fractional solution
//! consumed by the rounding pipeline.
//!
//! The plain LP (per-element coverage linked to per-color counting
//! constraints) has an unbounded integrality gap, closed by knapsack-cover
//! rows: for a committed collection `A` and color `t`, any integral cover
//! must satisfy `sum_{i not in A} x_i * min(deg_t(i, A), k_t(A)) >= k_t(A)`.
//! There are exponentially many such rows, so [`find_solution`] separates
//! them lazily: solve a cost-capped feasibility LP, derive the committed
//! collection from the candidate solution itself (heavy sets plus the
//! rounder's cover of the heavy elements), and add the row for the first
//! violated color until none is.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, Row, EPS_FEAS};
use crate::model::{Cover, Instance, ResidualState};
use crate::rounding::{heavy_elements, heavy_sets, heavy_threshold, scale_solution, Rounder};

/// Per-set and per-element values of any of the covering LPs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FractionalSolution {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

/// One knapsack-cover row added during the search. Rows recorded with
/// `violation: None` were seeded for the empty base before the first solve;
/// the rest were produced by separation, each violated by the solution that
/// triggered it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CutRecord {
    pub color: usize,
    pub base_size: usize,
    pub rhs: usize,
    pub violation: Option<f64>,
}

/// Output of the guess-and-cut search.
///
/// The triple `(frac, heavy_cover, base)` satisfies: the plain constraints
/// hold; the fractional weight is at most `delta_guess`; and every
/// knapsack-cover row for `base` holds, where `base` is derived from `frac`
/// itself via the heavy split and the supplied rounder.
#[derive(Debug, Clone)]
pub struct StrengthenedSolution {
    pub frac: FractionalSolution,
    /// The rounder's integral cover of the heavy elements.
    pub heavy_cover: Cover,
    /// Committed collection: heavy cover plus all sets at the heavy threshold.
    pub base: Vec<usize>,
    pub delta_guess: f64,
    pub cuts: Vec<CutRecord>,
    pub lp_solves: usize,
}

impl StrengthenedSolution {
    /// Fractional weight `sum w_i x_i` of the returned solution.
    pub fn weight(&self, instance: &Instance) -> f64 {
        instance
            .sets()
            .iter()
            .zip(&self.frac.x)
            .map(|(s, x)| s.weight * x)
            .sum()
    }

    /// Number of rows added by separation (excluding the seeded ones).
    pub fn separated_cuts(&self) -> usize {
        self.cuts.iter().filter(|c| c.violation.is_some()).count()
    }
}

/// Builds the plain covering LP: variables `x` per set and `z` per element in
/// `[0,1]`, per-element rows linking coverage to `z`, per-color counting rows,
/// and the set-weight objective.
pub fn build_natural_lp(instance: &Instance) -> LinearProgram {
    let m = instance.num_sets();
    let n = instance.num_elements();
    let mut lp = LinearProgram::new(m + n);
    for (i, set) in instance.sets().iter().enumerate() {
        lp.set_objective(i, set.weight).expect("valid index");
    }
    for j in 0..n {
        let mut coeffs: Vec<(usize, f64)> =
            instance.sets_of(j).iter().map(|&i| (i, 1.0)).collect();
        coeffs.push((m + j, -1.0));
        lp.add_row(Row::ge(coeffs, 0.0).with_label(format!("cover_e{j}")))
            .expect("valid row");
    }
    for (t, color) in instance.colors().iter().enumerate() {
        let coeffs: Vec<(usize, f64)> = color.elements.iter().map(|&j| (m + j, 1.0)).collect();
        lp.add_row(Row::ge(coeffs, color.requirement as f64).with_label(format!("color{t}")))
            .expect("valid row");
    }
    lp
}

/// Knapsack-cover row for color `t` over the state's base: coefficients
/// `min(deg_t(i, base), k_t(base))` on every set outside the base, right-hand
/// side `k_t(base)`. The residual must be positive; vacuous rows are a
/// contract error because callers are expected to skip them.
pub fn kc_row(instance: &Instance, state: &ResidualState, t: usize) -> Result<Row> {
    let k = *state
        .residual_per_color
        .get(t)
        .ok_or_else(|| Error::InvalidInput(format!("color index {t} out of range")))?;
    if k == 0 {
        return Err(Error::Contract(format!(
            "knapsack-cover row requested for color {t} with zero residual"
        )));
    }
    let mut coeffs = Vec::new();
    for i in 0..instance.num_sets() {
        if state.in_base(i) {
            continue;
        }
        let deg = instance.degree(state, i, t)?;
        let c = deg.min(k);
        if c > 0 {
            coeffs.push((i, c as f64));
        }
    }
    Ok(Row::ge(coeffs, k as f64).with_label(format!("kc_c{t}_b{}", state.base.len())))
}

/// Evaluates every positive-residual color's knapsack-cover row for `base`
/// against `x` and returns the lowest violated color index, if any.
pub fn check_kc(instance: &Instance, x: &[f64], base: &[usize]) -> Result<Option<usize>> {
    let state = instance.residual(base)?;
    check_kc_state(instance, x, &state)
}

/// As [`check_kc`], reusing an already-computed residual state.
pub fn check_kc_state(
    instance: &Instance,
    x: &[f64],
    state: &ResidualState,
) -> Result<Option<usize>> {
    for t in 0..instance.num_colors() {
        let k = state.residual_per_color[t];
        if k == 0 {
            continue;
        }
        let mut lhs = 0.0;
        for i in 0..instance.num_sets() {
            if state.in_base(i) || x[i] == 0.0 {
                continue;
            }
            let deg = instance.degree(state, i, t)?;
            lhs += x[i] * deg.min(k) as f64;
        }
        if lhs < k as f64 - EPS_FEAS {
            return Ok(Some(t));
        }
    }
    Ok(None)
}

/// Knobs of [`find_solution`] beyond the rounding parameters.
#[derive(Debug, Clone, Default)]
pub struct SearchOptions {
    /// Lower bound for the cost-guess search (used when the pipeline re-enters
    /// after rejected rounding restarts).
    pub delta_floor: Option<f64>,
}

/// Fraction of the heavy threshold that the feasibility solve pushes set
/// values down to. Mass below the target is free, so the solver prefers
/// spread, light solutions whenever the constraints allow them.
const SPREAD_TARGET_FACTOR: f64 = 0.9;

/// Builds the cost-capped feasibility LP for one search iteration.
///
/// Variables: `x` (m sets), `z` (n elements), and one excess variable per set.
/// Constraints: the plain rows, `sum w_i x_i <= delta`, every accumulated
/// knapsack-cover row, and `x_i - e_i <= target`. The objective minimizes the
/// total excess, which acts as the feasibility search's tie-break: it never
/// affects feasibility, but among feasible points it prefers those with no
/// more heavy mass than the constraints force.
fn build_feasibility_lp(
    instance: &Instance,
    delta: f64,
    alpha: f64,
    cut_rows: &[Row],
) -> LinearProgram {
    let m = instance.num_sets();
    let n = instance.num_elements();
    let mut lp = LinearProgram::new(2 * m + n);
    let excess = |i: usize| m + n + i;

    for j in 0..n {
        let mut coeffs: Vec<(usize, f64)> =
            instance.sets_of(j).iter().map(|&i| (i, 1.0)).collect();
        coeffs.push((m + j, -1.0));
        lp.add_row(Row::ge(coeffs, 0.0).with_label(format!("cover_e{j}")))
            .expect("valid row");
    }
    for (t, color) in instance.colors().iter().enumerate() {
        let coeffs: Vec<(usize, f64)> = color.elements.iter().map(|&j| (m + j, 1.0)).collect();
        lp.add_row(Row::ge(coeffs, color.requirement as f64).with_label(format!("color{t}")))
            .expect("valid row");
    }
    let cost: Vec<(usize, f64)> = instance
        .sets()
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.weight))
        .collect();
    lp.add_row(Row::le(cost, delta).with_label("cost_cap"))
        .expect("valid row");
    for row in cut_rows {
        lp.add_row(row.clone()).expect("valid row");
    }

    let target = SPREAD_TARGET_FACTOR * heavy_threshold(alpha);
    for i in 0..m {
        lp.set_objective(excess(i), 1.0).expect("valid index");
        lp.add_row(Row::le(vec![(i, 1.0), (excess(i), -1.0)], target))
            .expect("valid row");
    }
    lp
}

/// Cut-addition cap for the search, scaled by the color count and the weight
/// spread of the instance.
fn cut_cap(instance: &Instance) -> usize {
    let total = instance.total_weight();
    let w_min = instance
        .sets()
        .iter()
        .map(|s| s.weight)
        .filter(|&w| w > 0.0)
        .fold(f64::INFINITY, f64::min);
    let ratio = if w_min.is_finite() { total / w_min } else { 0.0 };
    let log = (ratio + 2.0).log2().ceil().max(1.0) as usize;
    50 * instance.num_colors().max(1) * log
}

/// Guess-and-cut search for a strengthened fractional solution.
///
/// The cost guess starts at the smallest positive set weight (so it never
/// overshoots the optimum) and doubles on infeasibility, capping at the total
/// weight. At a feasible guess, the candidate solution's own heavy split and
/// rounder cover define the committed collection; the first violated
/// knapsack-cover row for it is added and the LP re-solved, keeping all
/// accumulated rows across guesses. The empty-base rows for every color are
/// seeded before the first solve.
pub fn find_solution(
    instance: &Instance,
    rounder: &dyn Rounder,
    alpha: f64,
    options: &SearchOptions,
) -> Result<StrengthenedSolution> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidInput(format!(
            "alpha must exceed 1, got {alpha}"
        )));
    }
    let m = instance.num_sets();
    let n = instance.num_elements();
    let total = instance.total_weight();

    let w_min_pos = instance
        .sets()
        .iter()
        .map(|s| s.weight)
        .filter(|&w| w > 0.0)
        .fold(f64::INFINITY, f64::min);
    let start = options
        .delta_floor
        .unwrap_or(if w_min_pos.is_finite() { w_min_pos } else { 0.0 });
    let mut delta = start;
    let mut at_cap = delta >= total;
    if at_cap {
        delta = delta.max(total);
    }

    let mut cut_rows: Vec<Row> = Vec::new();
    let mut cuts: Vec<CutRecord> = Vec::new();
    let mut seen: HashSet<(usize, Vec<usize>)> = HashSet::new();
    let empty_state = instance.residual(&[])?;
    for t in 0..instance.num_colors() {
        cut_rows.push(kc_row(instance, &empty_state, t)?);
        cuts.push(CutRecord {
            color: t,
            base_size: 0,
            rhs: empty_state.residual_per_color[t],
            violation: None,
        });
        seen.insert((t, Vec::new()));
    }

    let max_cuts = cut_cap(instance);
    let mut heavy_cover_memo: HashMap<Vec<usize>, Cover> = HashMap::new();
    let mut lp_solves = 0usize;
    let mut separated = 0usize;

    loop {
        let lp = build_feasibility_lp(instance, delta, alpha, &cut_rows);
        lp_solves += 1;
        let outcome = solve_lp(&lp)?;
        let Some(light_sol) = outcome.optimal() else {
            if at_cap {
                return Err(Error::Infeasible(
                    "feasibility LP is infeasible at the full collection weight; \
                     instance invariants should rule this out"
                        .into(),
                ));
            }
            delta = if delta > 0.0 { delta * 2.0 } else { total.min(1.0) };
            if delta >= total {
                delta = total;
                at_cap = true;
            }
            continue;
        };

        // Second stage: among the lightest solutions, take a cheapest one.
        // Leaving the weight free would let the solver pad set values up to
        // the cost cap, inflating every rounding probability downstream.
        let mut cheap_lp = lp;
        let excess_cap = light_sol.objective + EPS_FEAS * (1.0 + light_sol.objective);
        let excess_row: Vec<(usize, f64)> = (m + n..2 * m + n).map(|v| (v, 1.0)).collect();
        cheap_lp
            .add_row(Row::le(excess_row, excess_cap).with_label("lightness"))
            .expect("valid row");
        for v in m + n..2 * m + n {
            cheap_lp.set_objective(v, 0.0).expect("valid index");
        }
        for (i, set) in instance.sets().iter().enumerate() {
            cheap_lp.set_objective(i, set.weight).expect("valid index");
        }
        lp_solves += 1;
        let outcome = solve_lp(&cheap_lp)?;
        let Some(sol) = outcome.optimal() else {
            return Err(Error::Numerical(
                "weight re-minimization lost the lightness-stage point".into(),
            ));
        };

        let x: Vec<f64> = sol.values[..m].to_vec();
        let z: Vec<f64> = sol.values[m..m + n].to_vec();

        let heavy = heavy_elements(instance, &x, alpha);
        let heavy_cover = match heavy_cover_memo.get(&heavy) {
            Some(c) => c.clone(),
            None => {
                let projection = instance.project(&heavy)?;
                let scaled = scale_solution(&x, alpha);
                let cover = rounder.round(&projection, &scaled)?;
                heavy_cover_memo.insert(heavy.clone(), cover.clone());
                cover
            }
        };
        let mut base = heavy_cover.chosen.clone();
        base.extend(heavy_sets(&x, alpha));
        base.sort_unstable();
        base.dedup();

        let state = instance.residual(&base)?;
        match check_kc_state(instance, &x, &state)? {
            None => {
                return Ok(StrengthenedSolution {
                    frac: FractionalSolution { x, z },
                    heavy_cover,
                    base,
                    delta_guess: delta,
                    cuts,
                    lp_solves,
                });
            }
            Some(t) => {
                let key = (t, state.base.clone());
                if !seen.insert(key) {
                    return Err(Error::Numerical(format!(
                        "separation produced a row already in the LP \
                         (color {t}, base size {}); solver tolerance exhausted",
                        state.base.len()
                    )));
                }
                let row = kc_row(instance, &state, t)?;
                let k = state.residual_per_color[t] as f64;
                let lhs: f64 = row.coeffs.iter().map(|&(i, c)| c * x[i]).sum();
                cuts.push(CutRecord {
                    color: t,
                    base_size: state.base.len(),
                    rhs: state.residual_per_color[t],
                    violation: Some(k - lhs),
                });
                cut_rows.push(row);
                separated += 1;
                if separated > max_cuts {
                    return Err(Error::CutLimit {
                        cuts: separated,
                        delta,
                    });
                }
            }
        }
    }
}

/// Re-checks the three contract properties of a strengthened solution:
/// the plain constraints hold, the fractional weight respects the guess, and
/// every knapsack-cover row for the stored base is satisfied. Also confirms
/// the stored base is consistent with the solution's own heavy split.
pub fn validate_strengthened(
    instance: &Instance,
    sol: &StrengthenedSolution,
    alpha: f64,
) -> Result<()> {
    let x = &sol.frac.x;
    let z = &sol.frac.z;
    let fail = |msg: String| Err(Error::Contract(msg));

    if x.len() != instance.num_sets() || z.len() != instance.num_elements() {
        return fail("solution dimensions do not match the instance".into());
    }
    for (i, &v) in x.iter().chain(z.iter()).enumerate() {
        if !(-EPS_FEAS..=1.0 + EPS_FEAS).contains(&v) {
            return fail(format!("value {i} = {v} outside [0, 1]"));
        }
    }
    for j in 0..instance.num_elements() {
        let cov: f64 = instance.sets_of(j).iter().map(|&i| x[i]).sum();
        if cov < z[j] - EPS_FEAS {
            return fail(format!("element {j}: coverage {cov} below z = {}", z[j]));
        }
    }
    for (t, color) in instance.colors().iter().enumerate() {
        let sum: f64 = color.elements.iter().map(|&j| z[j]).sum();
        if sum < color.requirement as f64 - EPS_FEAS {
            return fail(format!(
                "color {t}: z-mass {sum} below requirement {}",
                color.requirement
            ));
        }
    }
    if sol.weight(instance) > sol.delta_guess + EPS_FEAS {
        return fail(format!(
            "fractional weight {} exceeds the guess {}",
            sol.weight(instance),
            sol.delta_guess
        ));
    }

    // Base consistency with the solution's heavy split.
    let heavy = heavy_elements(instance, x, alpha);
    let scaled = scale_solution(x, alpha);
    for &j in &heavy {
        let cov: f64 = instance.sets_of(j).iter().map(|&i| scaled[i]).sum();
        if cov < 1.0 - 6.0 * alpha * EPS_FEAS {
            return fail(format!(
                "heavy element {j}: scaled coverage {cov} below 1"
            ));
        }
    }
    let report = {
        let projection = instance.project(&heavy)?;
        let mut covered = vec![false; projection.num_elements()];
        for &i in &sol.heavy_cover.chosen {
            for &e in &projection.sets[i] {
                covered[e] = true;
            }
        }
        covered.iter().all(|&c| c)
    };
    if !report {
        return fail("heavy cover misses a heavy element".into());
    }
    let mut expected_base = sol.heavy_cover.chosen.clone();
    expected_base.extend(heavy_sets(x, alpha));
    expected_base.sort_unstable();
    expected_base.dedup();
    if expected_base != sol.base {
        return fail("stored base differs from the heavy cover plus heavy sets".into());
    }
    // Sets at the heavy threshold contain only heavy elements, so committing
    // them adds nothing beyond the heavy cover's span.
    if instance.union_of(&sol.base)? != instance.union_of(&sol.heavy_cover.chosen)? {
        return fail("base spans elements outside the heavy cover".into());
    }

    if let Some(t) = check_kc(instance, x, &sol.base)? {
        return fail(format!("knapsack-cover row for color {t} is violated"));
    }
    Ok(())
}
