//! Generic bounded-variable linear programs and a dense primal simplex solver.
//!
//! Every LP built by this crate has boxed variables, so a two-phase bounded
//! simplex over a dense tableau is sufficient at the instance sizes we target.
//! Pivoting follows Bland's least-index rule on both the entering and leaving
//! choices, which makes the solver deterministic and free of cycling. Rows
//! with `>=` sense are negated into `<=` form internally.
//!
//! Each call to [`solve_lp`] allocates its own working state, so concurrent
//! solves of distinct programs are safe.

use std::fmt;

use crate::error::{Error, Result};

/// Feasibility tolerance: optimal outcomes violate no row or bound by more.
pub const EPS_FEAS: f64 = 1e-7;
/// Objective tolerance for comparisons against known optima.
pub const EPS_OBJ: f64 = 1e-6;
/// Entries smaller than this are treated as zero during pivoting.
pub const PIVOT_TOL: f64 = 1e-9;

/// Comparison sense of a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Ge,
    Le,
}

/// A sparse constraint row.
#[derive(Debug, Clone)]
pub struct Row {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub label: Option<String>,
}

impl Row {
    pub fn ge(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Row {
            coeffs,
            sense: Sense::Ge,
            rhs,
            label: None,
        }
    }

    pub fn le(coeffs: Vec<(usize, f64)>, rhs: f64) -> Self {
        Row {
            coeffs,
            sense: Sense::Le,
            rhs,
            label: None,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }
}

/// A minimization LP over boxed variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    bounds: Vec<(f64, f64)>,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

impl LinearProgram {
    /// Creates an LP with all variables in `[0, 1]` and zero objective.
    pub fn new(num_vars: usize) -> Self {
        LinearProgram {
            bounds: vec![(0.0, 1.0); num_vars],
            objective: vec![0.0; num_vars],
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<()> {
        if var >= self.bounds.len() {
            return Err(Error::InvalidInput(format!(
                "variable index {var} out of range ({} variables)",
                self.bounds.len()
            )));
        }
        if !(lower.is_finite() && upper.is_finite() && lower <= upper) {
            return Err(Error::InvalidInput(format!(
                "bounds for variable {var} must be finite with lower <= upper, got [{lower}, {upper}]"
            )));
        }
        self.bounds[var] = (lower, upper);
        Ok(())
    }

    pub fn set_objective(&mut self, var: usize, coeff: f64) -> Result<()> {
        if var >= self.objective.len() {
            return Err(Error::InvalidInput(format!(
                "variable index {var} out of range ({} variables)",
                self.objective.len()
            )));
        }
        self.objective[var] = coeff;
        Ok(())
    }

    /// Appends a constraint; existing rows are untouched.
    pub fn add_row(&mut self, row: Row) -> Result<()> {
        if let Some(&(bad, _)) = row.coeffs.iter().find(|&&(j, _)| j >= self.bounds.len()) {
            return Err(Error::InvalidInput(format!(
                "row references variable {bad} but the program has {} variables",
                self.bounds.len()
            )));
        }
        if !row.rhs.is_finite() {
            return Err(Error::InvalidInput("row rhs must be finite".into()));
        }
        self.rows.push(row);
        Ok(())
    }

    /// Objective value of an assignment.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .zip(values)
            .map(|(c, x)| c * x)
            .sum()
    }

    /// Largest violation of any row or bound by the assignment.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            worst = worst.max(lo - values[j]).max(values[j] - hi);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * values[j]).sum();
            let gap = match row.sense {
                Sense::Ge => row.rhs - lhs,
                Sense::Le => lhs - row.rhs,
            };
            worst = worst.max(gap);
        }
        worst
    }
}

impl fmt::Display for LinearProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "minimize")?;
        let terms: Vec<String> = self
            .objective
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(j, c)| format!("{c:+} x{j}"))
            .collect();
        writeln!(
            f,
            "  {}",
            if terms.is_empty() {
                "0".to_string()
            } else {
                terms.join(" ")
            }
        )?;
        writeln!(f, "subject to")?;
        for (idx, row) in self.rows.iter().enumerate() {
            let lhs: Vec<String> = row
                .coeffs
                .iter()
                .map(|&(j, a)| format!("{a:+} x{j}"))
                .collect();
            let op = match row.sense {
                Sense::Ge => ">=",
                Sense::Le => "<=",
            };
            let name = row.label.clone().unwrap_or_else(|| format!("r{idx}"));
            writeln!(f, "  [{name}] {} {op} {}", lhs.join(" "), row.rhs)?;
        }
        writeln!(f, "bounds")?;
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            writeln!(f, "  {lo} <= x{j} <= {hi}")?;
        }
        Ok(())
    }
}

/// Solution values and objective for an optimal outcome.
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub values: Vec<f64>,
    pub objective: f64,
}

/// Result of solving an LP: optimal with a certificate-checked point, or
/// infeasible. Numerical trouble is reported as an error, never as a bogus
/// status.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal(LpSolution),
    Infeasible,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<&LpSolution> {
        match self {
            LpOutcome::Optimal(s) => Some(s),
            LpOutcome::Infeasible => None,
        }
    }

    pub fn is_infeasible(&self) -> bool {
        matches!(self, LpOutcome::Infeasible)
    }
}

/// Solves the program with a two-phase bounded-variable primal simplex.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpOutcome> {
    for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidInput(format!(
                "variable {j} has invalid bounds [{lo}, {hi}]"
            )));
        }
    }
    let mut simplex = Simplex::build(lp);
    if !simplex.phase_one()? {
        return Ok(LpOutcome::Infeasible);
    }
    simplex.phase_two(lp)?;
    let values = simplex.extract(lp);

    let violation = lp.max_violation(&values);
    if violation > EPS_FEAS {
        return Err(Error::Numerical(format!(
            "simplex finished with residual violation {violation:.3e} > {EPS_FEAS:.1e}"
        )));
    }
    let objective = lp.objective_value(&values);
    Ok(LpOutcome::Optimal(LpSolution { values, objective }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum NonBasic {
    AtLower,
    AtUpper,
}

struct Simplex {
    nstruct: usize,
    ncols: usize,
    nrows: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Dense dictionary rows over every column, kept with the basis columns
    /// forming an identity.
    tab: Vec<Vec<f64>>,
    /// Transformed right-hand side (used to refresh basic values).
    rhs: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    status: Vec<NonBasic>,
    /// Current values of the basic variables, row by row.
    xb: Vec<f64>,
    first_artificial: usize,
    pivots: u64,
}

impl Simplex {
    fn build(lp: &LinearProgram) -> Simplex {
        let nstruct = lp.num_vars();
        let nrows = lp.rows.len();
        let nslack = nrows;

        // Dense <=-form rows.
        let mut dense: Vec<Vec<f64>> = Vec::with_capacity(nrows);
        let mut brhs: Vec<f64> = Vec::with_capacity(nrows);
        for row in &lp.rows {
            let mut r = vec![0.0; nstruct];
            for &(j, a) in &row.coeffs {
                r[j] += a;
            }
            match row.sense {
                Sense::Le => brhs.push(row.rhs),
                Sense::Ge => {
                    for a in r.iter_mut() {
                        *a = -*a;
                    }
                    brhs.push(-row.rhs);
                }
            }
            dense.push(r);
        }

        // Non-basic structurals start at their lower bound.
        let start: Vec<f64> = lp.bounds.iter().map(|&(lo, _)| lo).collect();
        let acts: Vec<f64> = dense
            .iter()
            .map(|r| r.iter().zip(&start).map(|(a, x)| a * x).sum())
            .collect();
        let needs_artificial: Vec<bool> = acts
            .iter()
            .zip(&brhs)
            .map(|(&act, &b)| b - act < 0.0)
            .collect();
        let nart = needs_artificial.iter().filter(|&&x| x).count();

        let ncols = nstruct + nslack + nart;
        let mut lower = vec![0.0; ncols];
        let mut upper = vec![f64::INFINITY; ncols];
        for (j, &(lo, hi)) in lp.bounds.iter().enumerate() {
            lower[j] = lo;
            upper[j] = hi;
        }

        let mut tab = vec![vec![0.0; ncols]; nrows];
        let mut rhs = vec![0.0; nrows];
        let mut basis = vec![0usize; nrows];
        let mut xb = vec![0.0; nrows];
        let mut is_basic = vec![false; ncols];
        let mut next_art = nstruct + nslack;

        for i in 0..nrows {
            let slack = nstruct + i;
            if !needs_artificial[i] {
                // Row as-is; the slack is basic and already feasible.
                tab[i][..nstruct].copy_from_slice(&dense[i]);
                tab[i][slack] = 1.0;
                rhs[i] = brhs[i];
                basis[i] = slack;
                xb[i] = brhs[i] - acts[i];
            } else {
                // Negate the row so the artificial starts basic at a
                // non-negative value; the slack keeps coefficient -1.
                for (j, &a) in dense[i].iter().enumerate() {
                    tab[i][j] = -a;
                }
                tab[i][slack] = -1.0;
                tab[i][next_art] = 1.0;
                rhs[i] = -brhs[i];
                basis[i] = next_art;
                xb[i] = acts[i] - brhs[i];
                next_art += 1;
            }
            is_basic[basis[i]] = true;
        }

        let status = vec![NonBasic::AtLower; ncols];
        Simplex {
            nstruct,
            ncols,
            nrows,
            lower,
            upper,
            tab,
            rhs,
            basis,
            is_basic,
            status,
            xb,
            first_artificial: nstruct + nslack,
            pivots: 0,
        }
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.status[j] {
            NonBasic::AtLower => self.lower[j],
            NonBasic::AtUpper => self.upper[j],
        }
    }

    /// Recomputes basic values from the transformed rhs, shedding the
    /// round-off accumulated by incremental updates.
    fn refresh_basics(&mut self) {
        for i in 0..self.nrows {
            let mut v = self.rhs[i];
            for j in 0..self.ncols {
                if !self.is_basic[j] {
                    let x = self.nonbasic_value(j);
                    if x != 0.0 {
                        v -= self.tab[i][j] * x;
                    }
                }
            }
            self.xb[i] = v;
        }
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for i in 0..self.nrows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                for j in 0..self.ncols {
                    d[j] -= cb * self.tab[i][j];
                }
            }
        }
        d
    }

    fn phase_one(&mut self) -> Result<bool> {
        if self.first_artificial == self.ncols {
            return Ok(true);
        }
        let mut cost = vec![0.0; self.ncols];
        for c in cost.iter_mut().skip(self.first_artificial) {
            *c = 1.0;
        }
        self.run(&cost)?;
        let infeasibility: f64 = (0..self.nrows)
            .filter(|&i| self.basis[i] >= self.first_artificial)
            .map(|i| self.xb[i].max(0.0))
            .sum();
        let scale = 1.0 + self
            .rhs
            .iter()
            .fold(0.0f64, |acc, &b| acc.max(b.abs()));
        if infeasibility > EPS_FEAS * scale {
            return Ok(false);
        }
        // Pin the artificials at zero; the ratio test then forces them out of
        // any move that would lift them.
        for j in self.first_artificial..self.ncols {
            self.upper[j] = 0.0;
        }
        Ok(true)
    }

    fn phase_two(&mut self, lp: &LinearProgram) -> Result<()> {
        let mut cost = vec![0.0; self.ncols];
        cost[..self.nstruct].copy_from_slice(&lp.objective);
        self.run(&cost)
    }

    fn select_entering(&self, d: &[f64]) -> Option<usize> {
        // Least index with a profitable direction.
        (0..self.ncols).find(|&j| {
            if self.is_basic[j] || self.upper[j] - self.lower[j] <= 0.0 {
                return false;
            }
            match self.status[j] {
                NonBasic::AtLower => d[j] < -PIVOT_TOL,
                NonBasic::AtUpper => d[j] > PIVOT_TOL,
            }
        })
    }

    fn run(&mut self, cost: &[f64]) -> Result<()> {
        let mut d = self.reduced_costs(cost);
        let max_pivots = 20_000 + 200 * (self.nrows as u64 + self.ncols as u64);
        let mut since_refresh = 0u32;

        loop {
            let entering = match self.select_entering(&d) {
                Some(q) => Some(q),
                None => {
                    // Re-derive the costs before accepting optimality; the
                    // incremental updates drift over long pivot runs.
                    d = self.reduced_costs(cost);
                    self.select_entering(&d)
                }
            };
            let Some(q) = entering else {
                self.refresh_basics();
                return Ok(());
            };
            let dir = match self.status[q] {
                NonBasic::AtLower => 1.0,
                NonBasic::AtUpper => -1.0,
            };

            // Ratio test: how far the entering variable can move before a
            // basic variable hits one of its bounds.
            let span = self.upper[q] - self.lower[q];
            let mut best = span;
            let mut leave: Option<usize> = None;
            for i in 0..self.nrows {
                let alpha = self.tab[i][q];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let rate = -dir * alpha; // change of xb[i] per unit step
                let b = self.basis[i];
                let room = if rate < 0.0 {
                    (self.xb[i] - self.lower[b]).max(0.0) / -rate
                } else {
                    if self.upper[b].is_infinite() {
                        continue;
                    }
                    (self.upper[b] - self.xb[i]).max(0.0) / rate
                };
                if best.is_infinite() {
                    if room.is_finite() {
                        best = room;
                        leave = Some(i);
                    }
                    continue;
                }
                let tie = PIVOT_TOL * (1.0 + best.abs());
                if room < best - tie {
                    best = room;
                    leave = Some(i);
                } else if room < best + tie {
                    // Bland tie-break: prefer the smallest basic index.
                    if let Some(cur) = leave {
                        if self.basis[i] < self.basis[cur] {
                            leave = Some(i);
                        }
                    }
                }
            }

            if best.is_infinite() {
                return Err(Error::Numerical(
                    "unbounded improving direction; the program is not boxed as expected".into(),
                ));
            }

            match leave {
                None => {
                    // Bound flip: the entering variable crosses its span.
                    for i in 0..self.nrows {
                        self.xb[i] -= dir * self.tab[i][q] * span;
                    }
                    self.status[q] = match self.status[q] {
                        NonBasic::AtLower => NonBasic::AtUpper,
                        NonBasic::AtUpper => NonBasic::AtLower,
                    };
                }
                Some(r) => {
                    let step = best;
                    let new_q_value = self.nonbasic_value(q) + dir * step;
                    let leaving = self.basis[r];
                    // Which bound did the leaving variable hit?
                    let leaving_status = if -dir * self.tab[r][q] < 0.0 {
                        NonBasic::AtLower
                    } else {
                        NonBasic::AtUpper
                    };
                    for i in 0..self.nrows {
                        if i != r {
                            self.xb[i] -= dir * self.tab[i][q] * step;
                        }
                    }

                    let piv = self.tab[r][q];
                    let inv = 1.0 / piv;
                    for v in self.tab[r].iter_mut() {
                        *v *= inv;
                    }
                    self.rhs[r] *= inv;
                    for i in 0..self.nrows {
                        if i == r {
                            continue;
                        }
                        let f = self.tab[i][q];
                        if f != 0.0 {
                            let (head, tail) = self.tab.split_at_mut(r.max(i));
                            let (row_i, row_r) = if i < r {
                                (&mut head[i], &tail[0])
                            } else {
                                (&mut tail[0], &head[r])
                            };
                            for (vi, vr) in row_i.iter_mut().zip(row_r.iter()) {
                                *vi -= f * vr;
                            }
                            row_i[q] = 0.0;
                            self.rhs[i] -= f * self.rhs[r];
                        }
                    }
                    let f = d[q];
                    if f != 0.0 {
                        for (dj, vr) in d.iter_mut().zip(self.tab[r].iter()) {
                            *dj -= f * vr;
                        }
                        d[q] = 0.0;
                    }

                    self.is_basic[leaving] = false;
                    self.status[leaving] = leaving_status;
                    self.is_basic[q] = true;
                    self.basis[r] = q;
                    self.xb[r] = new_q_value;
                }
            }

            self.pivots += 1;
            since_refresh += 1;
            if since_refresh >= 64 {
                self.refresh_basics();
                d = self.reduced_costs(cost);
                since_refresh = 0;
            }
            if self.pivots > max_pivots {
                return Err(Error::Numerical(format!(
                    "simplex exceeded {max_pivots} pivots; possible numerical stall"
                )));
            }
        }
    }

    fn extract(&self, lp: &LinearProgram) -> Vec<f64> {
        let mut values = vec![0.0; self.nstruct];
        for j in 0..self.nstruct {
            values[j] = self.nonbasic_value(j);
        }
        for i in 0..self.nrows {
            if self.basis[i] < self.nstruct {
                values[self.basis[i]] = self.xb[i];
            }
        }
        // Snap round-off inside the boxes.
        for (j, v) in values.iter_mut().enumerate() {
            let (lo, hi) = lp.bounds[j];
            *v = v.clamp(lo, hi);
        }
        values
    }
}
