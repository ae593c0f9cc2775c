//! Facility location with per-color connection requirements, reduced to the
//! partition set cover pipeline.
//!
//! The LP has opening variables `x_i`, connection variables `y_ij`, and
//! coverage variables `z_j`. Its gap is closed by per-color rows
//! `sum_i min(x_i * k_t(H), sum_{j in C_t(H)} y_ij) >= k_t(H)` (encoded with
//! one auxiliary variable per facility), separated lazily against the heavy
//! client set of each candidate solution. Heavy clients are served by
//! threshold-opening plus greedy stars; light clients are handled by
//! splitting each facility into co-located copies with uniform connection
//! values and rounding the resulting set system with [`crate::rounding`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpSolution, Row, EPS_FEAS};
use crate::model::{ColorClass, Instance};
use crate::rounding::{heavy_threshold, RoundingConfig, RoundingTrace};

/// Tolerance for metric validation.
const METRIC_TOL: f64 = 1e-9;

/// A facility location instance with color classes over the clients.
///
/// Distances are given facility-to-client; client-to-client distances are
/// optional and used only to validate the triangle inequality on the triples
/// they determine. Colors partition the clients.
#[derive(Debug, Clone)]
pub struct FLInstance {
    open_costs: Vec<f64>,
    num_clients: usize,
    dist: Vec<Vec<f64>>,
    client_dist: Option<Vec<Vec<f64>>>,
    colors: Vec<ColorClass>,
}

impl FLInstance {
    pub fn new(
        open_costs: Vec<f64>,
        num_clients: usize,
        dist: Vec<Vec<f64>>,
        client_dist: Option<Vec<Vec<f64>>>,
        colors: Vec<(Vec<usize>, usize)>,
    ) -> Result<FLInstance> {
        let f = open_costs.len();
        if f == 0 {
            return Err(Error::InvalidInput("facilities: at least one required".into()));
        }
        if num_clients == 0 {
            return Err(Error::InvalidInput("clients: at least one required".into()));
        }
        for (i, &c) in open_costs.iter().enumerate() {
            if !(c >= 0.0 && c.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "facilities[{i}].cost: must be finite and non-negative, got {c}"
                )));
            }
        }
        if dist.len() != f {
            return Err(Error::InvalidInput(format!(
                "distances.facility_client: expected {f} rows, got {}",
                dist.len()
            )));
        }
        for (i, row) in dist.iter().enumerate() {
            if row.len() != num_clients {
                return Err(Error::InvalidInput(format!(
                    "distances.facility_client[{i}]: expected {num_clients} entries, got {}",
                    row.len()
                )));
            }
            if let Some(j) = row.iter().position(|&d| !(d >= 0.0 && d.is_finite())) {
                return Err(Error::InvalidInput(format!(
                    "distances.facility_client[{i}][{j}]: must be finite and non-negative"
                )));
            }
        }
        if let Some(cd) = &client_dist {
            if cd.len() != num_clients {
                return Err(Error::InvalidInput(format!(
                    "distances.client_client: expected {num_clients} rows, got {}",
                    cd.len()
                )));
            }
            for (a, row) in cd.iter().enumerate() {
                if row.len() != num_clients {
                    return Err(Error::InvalidInput(format!(
                        "distances.client_client[{a}]: expected {num_clients} entries"
                    )));
                }
                if row[a].abs() > METRIC_TOL {
                    return Err(Error::InvalidInput(format!(
                        "distances.client_client[{a}][{a}]: diagonal must be zero"
                    )));
                }
                for (b, &d) in row.iter().enumerate() {
                    if !(d >= 0.0 && d.is_finite()) {
                        return Err(Error::InvalidInput(format!(
                            "distances.client_client[{a}][{b}]: must be finite and non-negative"
                        )));
                    }
                    if (d - cd[b][a]).abs() > METRIC_TOL {
                        return Err(Error::InvalidInput(format!(
                            "distances.client_client[{a}][{b}]: not symmetric"
                        )));
                    }
                }
            }
            // Triangle inequality on every triple the inputs determine.
            for i in 0..f {
                for a in 0..num_clients {
                    for b in 0..num_clients {
                        if dist[i][a] > dist[i][b] + cd[b][a] + METRIC_TOL {
                            return Err(Error::InvalidInput(format!(
                                "triangle inequality violated: d(f{i}, c{a}) > \
                                 d(f{i}, c{b}) + d(c{b}, c{a})"
                            )));
                        }
                    }
                }
            }
            for a in 0..num_clients {
                for b in 0..num_clients {
                    for c in 0..num_clients {
                        if cd[a][b] > cd[a][c] + cd[c][b] + METRIC_TOL {
                            return Err(Error::InvalidInput(format!(
                                "triangle inequality violated among clients {a}, {c}, {b}"
                            )));
                        }
                    }
                }
            }
        }

        let mut owner = vec![usize::MAX; num_clients];
        let colors: Vec<ColorClass> = colors
            .into_iter()
            .map(|(mut elements, requirement)| {
                elements.sort_unstable();
                elements.dedup();
                ColorClass {
                    elements,
                    requirement,
                }
            })
            .collect();
        for (t, color) in colors.iter().enumerate() {
            if color.elements.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "colors[{t}].elements: color class must be non-empty"
                )));
            }
            if let Some(&bad) = color.elements.iter().find(|&&j| j >= num_clients) {
                return Err(Error::InvalidInput(format!(
                    "colors[{t}].elements: client id {bad} out of range"
                )));
            }
            if color.requirement < 1 || color.requirement > color.elements.len() {
                return Err(Error::InvalidInput(format!(
                    "colors[{t}].requirement: must be between 1 and {}, got {}",
                    color.elements.len(),
                    color.requirement
                )));
            }
            for &j in &color.elements {
                if owner[j] != usize::MAX {
                    return Err(Error::InvalidInput(format!(
                        "colors[{t}]: client {j} already belongs to colors[{}]; \
                         classes must partition the clients",
                        owner[j]
                    )));
                }
                owner[j] = t;
            }
        }
        if let Some(orphan) = owner.iter().position(|&t| t == usize::MAX) {
            return Err(Error::InvalidInput(format!(
                "client {orphan} belongs to no color class"
            )));
        }

        Ok(FLInstance {
            open_costs,
            num_clients,
            dist,
            client_dist,
            colors,
        })
    }

    pub fn num_facilities(&self) -> usize {
        self.open_costs.len()
    }

    pub fn num_clients(&self) -> usize {
        self.num_clients
    }

    pub fn num_colors(&self) -> usize {
        self.colors.len()
    }

    pub fn colors(&self) -> &[ColorClass] {
        &self.colors
    }

    pub fn open_cost(&self, i: usize) -> f64 {
        self.open_costs[i]
    }

    pub fn distance(&self, facility: usize, client: usize) -> f64 {
        self.dist[facility][client]
    }

    pub fn client_distances(&self) -> Option<&Vec<Vec<f64>>> {
        self.client_dist.as_ref()
    }

    /// Cost of opening everything and serving every client at its nearest
    /// facility; an upper bound on the optimum.
    pub fn serve_all_cost(&self) -> f64 {
        let open: f64 = self.open_costs.iter().sum();
        let connect: f64 = (0..self.num_clients)
            .map(|j| self.nearest_among_all(j).1)
            .sum();
        open + connect
    }

    fn nearest_among_all(&self, client: usize) -> (usize, f64) {
        let mut best = (0usize, f64::INFINITY);
        for i in 0..self.num_facilities() {
            if self.dist[i][client] < best.1 {
                best = (i, self.dist[i][client]);
            }
        }
        best
    }

    /// Nearest facility to `client` among `open` (which must be non-empty).
    pub fn nearest_open(&self, open: &[usize], client: usize) -> (usize, f64) {
        let mut best = (open[0], self.dist[open[0]][client]);
        for &i in &open[1..] {
            if self.dist[i][client] < best.1 {
                best = (i, self.dist[i][client]);
            }
        }
        best
    }
}

/// An integral solution: which facilities open and which clients connect.
/// Every served client is charged the distance to its nearest open facility.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FLSolution {
    pub open: Vec<usize>,
    /// `(client, assigned facility)` pairs, sorted by client.
    pub served: Vec<(usize, usize)>,
    pub cost: f64,
}

impl FLSolution {
    /// Checks per-color served counts and recomputes the cost.
    pub fn verify(&self, fl: &FLInstance) -> Result<()> {
        if self.open.is_empty() {
            return Err(Error::Contract("solution opens no facility".into()));
        }
        let mut served_flag = vec![false; fl.num_clients()];
        for &(j, i) in &self.served {
            if j >= fl.num_clients() || i >= fl.num_facilities() {
                return Err(Error::InvalidInput("served pair out of range".into()));
            }
            served_flag[j] = true;
        }
        for (t, color) in fl.colors().iter().enumerate() {
            let got = color.elements.iter().filter(|&&j| served_flag[j]).count();
            if got < color.requirement {
                return Err(Error::Contract(format!(
                    "color {t}: served {got} of required {}",
                    color.requirement
                )));
            }
        }
        let open_cost: f64 = self.open.iter().map(|&i| fl.open_cost(i)).sum();
        let connect: f64 = self
            .served
            .iter()
            .map(|&(j, _)| fl.nearest_open(&self.open, j).1)
            .sum();
        if (open_cost + connect - self.cost).abs() > 1e-6 {
            return Err(Error::Contract(format!(
                "stored cost {} differs from recomputed {}",
                self.cost,
                open_cost + connect
            )));
        }
        Ok(())
    }
}

/// Variable layout of the facility location LP.
#[derive(Debug, Clone, Copy)]
pub struct FlLayout {
    pub facilities: usize,
    pub clients: usize,
}

impl FlLayout {
    pub fn of(fl: &FLInstance) -> FlLayout {
        FlLayout {
            facilities: fl.num_facilities(),
            clients: fl.num_clients(),
        }
    }

    pub fn x(&self, i: usize) -> usize {
        i
    }

    pub fn y(&self, i: usize, j: usize) -> usize {
        self.facilities + i * self.clients + j
    }

    pub fn z(&self, j: usize) -> usize {
        self.facilities + self.facilities * self.clients + j
    }

    pub fn base_vars(&self) -> usize {
        self.facilities + self.facilities * self.clients + self.clients
    }
}

fn push_natural_fl_rows(lp: &mut LinearProgram, fl: &FLInstance, layout: &FlLayout) {
    for j in 0..fl.num_clients() {
        let mut coeffs: Vec<(usize, f64)> = (0..fl.num_facilities())
            .map(|i| (layout.y(i, j), 1.0))
            .collect();
        coeffs.push((layout.z(j), -1.0));
        lp.add_row(Row::ge(coeffs, 0.0).with_label(format!("serve_c{j}")))
            .expect("valid row");
    }
    for (t, color) in fl.colors().iter().enumerate() {
        let coeffs: Vec<(usize, f64)> = color
            .elements
            .iter()
            .map(|&j| (layout.z(j), 1.0))
            .collect();
        lp.add_row(Row::ge(coeffs, color.requirement as f64).with_label(format!("color{t}")))
            .expect("valid row");
    }
    for i in 0..fl.num_facilities() {
        for j in 0..fl.num_clients() {
            lp.add_row(Row::le(vec![(layout.y(i, j), 1.0), (layout.x(i), -1.0)], 0.0))
                .expect("valid row");
        }
    }
}

fn fl_cost_terms(fl: &FLInstance, layout: &FlLayout) -> Vec<(usize, f64)> {
    let mut terms = Vec::new();
    for i in 0..fl.num_facilities() {
        terms.push((layout.x(i), fl.open_cost(i)));
        for j in 0..fl.num_clients() {
            terms.push((layout.y(i, j), fl.distance(i, j)));
        }
    }
    terms
}

/// The plain facility location LP with the opening-plus-connection objective.
pub fn build_fl_lp(fl: &FLInstance) -> LinearProgram {
    let layout = FlLayout::of(fl);
    let mut lp = LinearProgram::new(layout.base_vars());
    for (var, coeff) in fl_cost_terms(fl, &layout) {
        lp.set_objective(var, coeff).expect("valid index");
    }
    push_natural_fl_rows(&mut lp, fl, &layout);
    lp
}

/// A strengthening row captured at separation time: the heavy client set and
/// the color's residual requirement, which together pin the row's shape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlCut {
    pub color: usize,
    /// Heavy clients at the time the row was generated, sorted.
    pub heavy: Vec<usize>,
    /// Residual members `C_t \ heavy`.
    pub residual_clients: Vec<usize>,
    pub residual: usize,
}

/// Builds the cut descriptor for color `t` against the heavy client set.
/// The residual requirement must be positive.
pub fn fl_cut(fl: &FLInstance, heavy: &[usize], t: usize) -> Result<FlCut> {
    if t >= fl.num_colors() {
        return Err(Error::InvalidInput(format!("color index {t} out of range")));
    }
    let heavy_sorted = {
        let mut h = heavy.to_vec();
        h.sort_unstable();
        h.dedup();
        h
    };
    let color = &fl.colors()[t];
    let in_heavy = |j: usize| heavy_sorted.binary_search(&j).is_ok();
    let residual_clients: Vec<usize> = color
        .elements
        .iter()
        .copied()
        .filter(|&j| !in_heavy(j))
        .collect();
    let heavy_members = color.elements.len() - residual_clients.len();
    let residual = color.requirement.saturating_sub(heavy_members);
    if residual == 0 {
        return Err(Error::Contract(format!(
            "cut requested for color {t} with zero residual requirement"
        )));
    }
    Ok(FlCut {
        color: t,
        heavy: heavy_sorted,
        residual_clients,
        residual,
    })
}

/// Left-hand side of a cut for a fractional `(x, y)`:
/// `sum_i min(x_i * k, sum_{j in residual} y_ij)`.
pub fn fl_cut_lhs(fl: &FLInstance, cut: &FlCut, x: &[f64], y: &[Vec<f64>]) -> f64 {
    let k = cut.residual as f64;
    (0..fl.num_facilities())
        .map(|i| {
            let ysum: f64 = cut.residual_clients.iter().map(|&j| y[i][j]).sum();
            (x[i] * k).min(ysum)
        })
        .sum()
}

/// Encodes a cut into the LP: one auxiliary variable `u_i` per facility with
/// `u_i <= x_i * k`, `u_i <= sum_{j in residual} y_ij`, and `sum_i u_i >= k`.
/// Returns the number of variables appended.
pub fn append_fl_cut(
    lp: &mut LinearProgram,
    layout: &FlLayout,
    cut: &FlCut,
    aux_start: usize,
) -> Result<usize> {
    let k = cut.residual as f64;
    for i in 0..layout.facilities {
        let u = aux_start + i;
        lp.set_bounds(u, 0.0, k)?;
        lp.add_row(Row::le(vec![(u, 1.0), (layout.x(i), -k)], 0.0))?;
        let mut coeffs: Vec<(usize, f64)> = vec![(u, 1.0)];
        coeffs.extend(cut.residual_clients.iter().map(|&j| (layout.y(i, j), -1.0)));
        lp.add_row(Row::le(coeffs, 0.0))?;
    }
    let total: Vec<(usize, f64)> = (0..layout.facilities)
        .map(|i| (aux_start + i, 1.0))
        .collect();
    lp.add_row(Row::ge(total, k).with_label(format!("flkc_c{}", cut.color)))?;
    Ok(layout.facilities)
}

fn build_fl_feasibility_lp(
    fl: &FLInstance,
    delta: f64,
    cuts: &[FlCut],
) -> Result<LinearProgram> {
    let layout = FlLayout::of(fl);
    let total_vars = layout.base_vars() + cuts.len() * layout.facilities;
    let mut lp = LinearProgram::new(total_vars);
    for (var, coeff) in fl_cost_terms(fl, &layout) {
        lp.set_objective(var, coeff)?;
    }
    push_natural_fl_rows(&mut lp, fl, &layout);
    lp.add_row(Row::le(fl_cost_terms(fl, &layout), delta).with_label("cost_cap"))?;
    let mut aux = layout.base_vars();
    for cut in cuts {
        aux += append_fl_cut(&mut lp, &layout, cut, aux)?;
    }
    Ok(lp)
}

/// Fractional pieces of an LP solution in facility/client shape.
#[derive(Debug, Clone)]
pub struct FlFractional {
    pub x: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub z: Vec<f64>,
}

impl FlFractional {
    fn from_lp(fl: &FLInstance, sol: &LpSolution) -> FlFractional {
        let layout = FlLayout::of(fl);
        let x: Vec<f64> = (0..fl.num_facilities())
            .map(|i| sol.values[layout.x(i)])
            .collect();
        let y: Vec<Vec<f64>> = (0..fl.num_facilities())
            .map(|i| {
                (0..fl.num_clients())
                    // Connections never exceed the opening value; snap off
                    // solver round-off so downstream splits stay consistent.
                    .map(|j| sol.values[layout.y(i, j)].min(x[i]))
                    .collect()
            })
            .collect();
        let z: Vec<f64> = (0..fl.num_clients())
            .map(|j| sol.values[layout.z(j)])
            .collect();
        FlFractional { x, y, z }
    }

    /// Fractional coverage of a client: `sum_i y_ij`.
    pub fn client_coverage(&self, j: usize) -> f64 {
        self.y.iter().map(|row| row[j]).sum()
    }

    pub fn cost(&self, fl: &FLInstance) -> f64 {
        let mut cost = 0.0;
        for i in 0..fl.num_facilities() {
            cost += fl.open_cost(i) * self.x[i];
            for j in 0..fl.num_clients() {
                cost += fl.distance(i, j) * self.y[i][j];
            }
        }
        cost
    }
}

/// Clients whose fractional coverage reaches the heavy threshold.
pub fn heavy_clients(fl: &FLInstance, frac: &FlFractional, alpha: f64) -> Vec<usize> {
    let thr = heavy_threshold(alpha) - EPS_FEAS;
    (0..fl.num_clients())
        .filter(|&j| frac.client_coverage(j) >= thr)
        .collect()
}

/// One co-located copy of a facility produced by splitting: its share of the
/// opening variable and the light clients connected at exactly that share.
#[derive(Debug, Clone)]
pub struct SplitFacility {
    pub facility: usize,
    pub x_value: f64,
    pub clients: Vec<usize>,
}

/// Splits each facility into co-located copies so that every copy serves each
/// of its flagged clients at exactly the copy's value, and the per-color cut
/// left-hand sides are preserved. Connection values for heavy clients must
/// already be zeroed out of `y`.
///
/// The construction wraps the clients' connection masses around a circle of
/// circumference `x_i`, one arc of length `y_ij` per client, laid out in
/// color order. Each color's arcs then cover every point of the circle
/// either `floor(T/x)` or `ceil(T/x)` times (`T` being the color's total
/// connection mass at this facility), and a copy is an arc segment between
/// consecutive endpoints. With counts that balanced,
/// `sum_copies x_c * min(k, |flags in C_t|) = min(x_i k, T)` exactly, so the
/// strengthening rows survive the split. A naive split at nested prefix
/// levels does not have this property: `min` is concave, so uneven counts
/// across copies can only lose. Copies at or above the heavy threshold are
/// subdivided into equal pieces below it, which keeps all sums unchanged.
pub fn split_facilities(fl: &FLInstance, x: &[f64], y: &[Vec<f64>], alpha: f64) -> Vec<SplitFacility> {
    const VAL_TOL: f64 = 1e-12;
    let threshold = heavy_threshold(alpha);
    let order: Vec<usize> = fl
        .colors()
        .iter()
        .flat_map(|c| c.elements.iter().copied())
        .collect();

    let mut copies = Vec::new();
    for i in 0..fl.num_facilities() {
        let xi = x[i];
        if xi <= VAL_TOL {
            continue;
        }
        // Arcs (client, start, length) on the circle [0, xi), wrapping at
        // most once since y <= x.
        let mut arcs: Vec<(usize, f64, f64)> = Vec::new();
        let mut endpoints: Vec<f64> = vec![0.0, xi];
        let mut pos = 0.0;
        for &j in &order {
            let len = y[i][j].min(xi);
            if len <= VAL_TOL {
                continue;
            }
            let start = pos;
            arcs.push((j, start, len));
            endpoints.push(start);
            let end = start + len;
            endpoints.push(if end > xi { end - xi } else { end });
            pos = end;
            if pos >= xi {
                pos -= xi;
            }
        }
        endpoints.sort_by(f64::total_cmp);
        endpoints.dedup_by(|a, b| (*a - *b).abs() <= VAL_TOL);

        let covers = |start: f64, len: f64, point: f64| {
            let end = start + len;
            if end <= xi + VAL_TOL {
                point >= start && point < end
            } else {
                point >= start || point < end - xi
            }
        };
        for w in endpoints.windows(2) {
            let span = w[1] - w[0];
            if span <= VAL_TOL {
                continue;
            }
            let mid = 0.5 * (w[0] + w[1]);
            let mut clients: Vec<usize> = arcs
                .iter()
                .filter(|&&(_, s, l)| covers(s, l, mid))
                .map(|&(j, _, _)| j)
                .collect();
            clients.sort_unstable();
            // Keep every copy strictly below the heavy threshold.
            let pieces = if span >= threshold {
                (span / threshold).floor() as usize + 1
            } else {
                1
            };
            for _ in 0..pieces {
                copies.push(SplitFacility {
                    facility: i,
                    x_value: span / pieces as f64,
                    clients: clients.clone(),
                });
            }
        }
    }
    copies
}

/// Mapping data accompanying the reduced set cover instance.
#[derive(Debug, Clone)]
pub struct FlReduction {
    pub instance: Instance,
    /// Per reduced set: the originating facility.
    pub set_facility: Vec<usize>,
    /// Per reduced set: the copy's fractional value.
    pub set_x: Vec<f64>,
    /// Reduced element id -> client id.
    pub element_client: Vec<usize>,
    /// Colors kept (those with positive residual), by original index.
    pub kept_colors: Vec<usize>,
}

/// Builds the partition set cover instance for the light clients: one set per
/// facility copy holding its flagged clients, weighted by the full opening
/// cost plus the connection distances of all flagged clients; colors are the
/// residual classes with positive requirements.
pub fn fl_reduce(fl: &FLInstance, splits: &[SplitFacility], heavy: &[usize]) -> Result<FlReduction> {
    let in_heavy = |j: usize| heavy.binary_search(&j).is_ok();

    let mut kept_colors = Vec::new();
    let mut element_client = Vec::new();
    let mut colors_spec: Vec<(Vec<usize>, usize)> = Vec::new();
    let mut local_of = vec![usize::MAX; fl.num_clients()];
    for (t, color) in fl.colors().iter().enumerate() {
        let residual_members: Vec<usize> = color
            .elements
            .iter()
            .copied()
            .filter(|&j| !in_heavy(j))
            .collect();
        let heavy_members = color.elements.len() - residual_members.len();
        let residual = color.requirement.saturating_sub(heavy_members);
        if residual == 0 {
            continue;
        }
        let mut members_local = Vec::with_capacity(residual_members.len());
        for j in residual_members {
            let local = element_client.len();
            element_client.push(j);
            local_of[j] = local;
            members_local.push(local);
        }
        colors_spec.push((members_local, residual));
        kept_colors.push(t);
    }

    let mut sets_spec: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut set_facility = Vec::new();
    let mut set_x = Vec::new();
    for copy in splits {
        let connection: f64 = copy
            .clients
            .iter()
            .map(|&j| fl.distance(copy.facility, j))
            .sum();
        let weight = fl.open_cost(copy.facility) + connection;
        let members: Vec<usize> = copy
            .clients
            .iter()
            .filter(|&&j| local_of[j] != usize::MAX)
            .map(|&j| local_of[j])
            .collect();
        sets_spec.push((weight, members));
        set_facility.push(copy.facility);
        set_x.push(copy.x_value);
    }

    let instance = Instance::new(element_client.len(), sets_spec, colors_spec)?;
    Ok(FlReduction {
        instance,
        set_facility,
        set_x,
        element_client,
        kept_colors,
    })
}

/// Diagnostics of a facility location run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlRunStats {
    pub delta: f64,
    pub lp_cost: f64,
    pub cuts: usize,
    pub heavy_clients: usize,
    pub rounding_trace: Option<RoundingTrace>,
}

#[derive(Debug, Clone)]
pub struct FlOutput {
    pub solution: FLSolution,
    pub stats: FlRunStats,
}

/// Cut cap mirroring the partition search's safety valve.
fn fl_cut_cap(fl: &FLInstance, hi: f64) -> usize {
    let terms: Vec<f64> = fl
        .open_costs
        .iter()
        .copied()
        .chain(fl.dist.iter().flatten().copied())
        .filter(|&v| v > 0.0)
        .collect();
    let min_pos = terms.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let ratio = if min_pos.is_finite() { hi / min_pos } else { 0.0 };
    let log = (ratio + 2.0).log2().ceil().max(1.0) as usize;
    50 * fl.num_colors().max(1) * log
}

/// Guess-and-cut search for the facility location LP: returns a fractional
/// solution of cost at most `delta` whose cut rows hold against its own heavy
/// client set.
pub fn find_fl_solution(
    fl: &FLInstance,
    alpha: f64,
    delta_floor: Option<f64>,
) -> Result<(FlFractional, Vec<usize>, f64, usize)> {
    if !(alpha > 1.0) {
        return Err(Error::InvalidInput(format!("alpha must exceed 1, got {alpha}")));
    }
    let hi = fl.serve_all_cost();
    let min_pos = fl
        .open_costs
        .iter()
        .copied()
        .chain(fl.dist.iter().flatten().copied())
        .filter(|&v| v > 0.0)
        .fold(f64::INFINITY, f64::min);
    let start = delta_floor.unwrap_or(if min_pos.is_finite() { min_pos } else { 0.0 });
    let mut delta = start;
    let mut at_cap = delta >= hi;
    if at_cap {
        delta = delta.max(hi);
    }

    let mut cuts: Vec<FlCut> = Vec::new();
    let mut seen: std::collections::HashSet<(usize, Vec<usize>)> = Default::default();
    let cap = fl_cut_cap(fl, hi);

    loop {
        let lp = build_fl_feasibility_lp(fl, delta, &cuts)?;
        let outcome = solve_lp(&lp)?;
        let Some(sol) = outcome.optimal() else {
            if at_cap {
                return Err(Error::Infeasible(
                    "facility LP infeasible at the serve-all cost; \
                     instance invariants should rule this out"
                        .into(),
                ));
            }
            delta = if delta > 0.0 { delta * 2.0 } else { hi.min(1.0) };
            if delta >= hi {
                delta = hi;
                at_cap = true;
            }
            continue;
        };
        let frac = FlFractional::from_lp(fl, sol);
        let heavy = heavy_clients(fl, &frac, alpha);

        let mut violated = None;
        for t in 0..fl.num_colors() {
            let color = &fl.colors()[t];
            let heavy_members = color
                .elements
                .iter()
                .filter(|&&j| heavy.binary_search(&j).is_ok())
                .count();
            if color.requirement <= heavy_members {
                continue;
            }
            let cut = fl_cut(fl, &heavy, t)?;
            let lhs = fl_cut_lhs(fl, &cut, &frac.x, &frac.y);
            if lhs < cut.residual as f64 - EPS_FEAS {
                violated = Some(cut);
                break;
            }
        }
        match violated {
            None => return Ok((frac, heavy, delta, cuts.len())),
            Some(cut) => {
                if !seen.insert((cut.color, cut.heavy.clone())) {
                    return Err(Error::Numerical(format!(
                        "facility separation repeated a row for color {}; \
                         solver tolerance exhausted",
                        cut.color
                    )));
                }
                cuts.push(cut);
                if cuts.len() > cap {
                    return Err(Error::CutLimit {
                        cuts: cuts.len(),
                        delta,
                    });
                }
            }
        }
    }
}

/// Rounds the heavy clients: open every facility whose scaled opening value
/// reaches 1/2 and connect each heavy client through its cheapest positive
/// fractional connection; clients left unserved fall back to greedy stars.
fn round_heavy_clients(
    fl: &FLInstance,
    frac: &FlFractional,
    heavy: &[usize],
    alpha: f64,
) -> (Vec<usize>, Vec<usize>) {
    let mut open: Vec<usize> = (0..fl.num_facilities())
        .filter(|&i| (6.0 * alpha * frac.x[i]).min(1.0) >= 0.5)
        .collect();

    let mut unserved: Vec<usize> = Vec::new();
    for &j in heavy {
        let mut best: Option<(f64, usize)> = None;
        for &i in &open {
            if frac.y[i][j] > EPS_FEAS {
                let d = fl.distance(i, j);
                if best.is_none_or(|(bd, _)| d < bd) {
                    best = Some((d, i));
                }
            }
        }
        if best.is_none() {
            unserved.push(j);
        }
    }

    // Greedy stars for the leftovers: repeatedly open (or reuse) the facility
    // whose next batch of unserved heavy clients has the lowest cost per
    // client.
    while !unserved.is_empty() {
        let mut best: Option<(f64, usize, usize)> = None; // (ratio, facility, count)
        for i in 0..fl.num_facilities() {
            let mut dists: Vec<f64> = unserved.iter().map(|&j| fl.distance(i, j)).collect();
            dists.sort_by(f64::total_cmp);
            let opening = if open.contains(&i) { 0.0 } else { fl.open_cost(i) };
            let mut acc = opening;
            for (cnt, &d) in dists.iter().enumerate() {
                acc += d;
                let ratio = acc / (cnt + 1) as f64;
                if best.is_none_or(|(br, _, _)| ratio < br) {
                    best = Some((ratio, i, cnt + 1));
                }
            }
        }
        let (_, i, cnt) = best.expect("at least one facility exists");
        if !open.contains(&i) {
            open.push(i);
        }
        let mut by_dist = unserved.clone();
        by_dist.sort_by(|&a, &b| {
            fl.distance(i, a)
                .total_cmp(&fl.distance(i, b))
                .then(a.cmp(&b))
        });
        let taken: Vec<usize> = by_dist[..cnt].to_vec();
        unserved.retain(|j| !taken.contains(j));
    }
    open.sort_unstable();
    open.dedup();
    (open, heavy.to_vec())
}

/// Full pipeline for facility location with per-color requirements.
pub fn solve_fl(fl: &FLInstance, config: &RoundingConfig) -> Result<FlOutput> {
    config.validate()?;
    let (frac, heavy, delta, cuts) = find_fl_solution(fl, config.alpha, None)?;

    let (mut open, served_heavy) = if heavy.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        round_heavy_clients(fl, &frac, &heavy, config.alpha)
    };

    // Light side: zero the heavy columns, split, reduce, round.
    let mut y_light = frac.y.clone();
    for &j in &heavy {
        for row in y_light.iter_mut() {
            row[j] = 0.0;
        }
    }
    let splits = split_facilities(fl, &frac.x, &y_light, config.alpha);
    let reduction = fl_reduce(fl, &splits, &heavy)?;

    let mut covered_light: Vec<usize> = Vec::new();
    let mut rounding_trace = None;
    if !reduction.kept_colors.is_empty() {
        let sub_config = RoundingConfig {
            seed: config.seed.wrapping_add(0x5F4C),
            ..config.clone()
        };
        let out = crate::rounding::solve(&reduction.instance, &sub_config)?;
        let mut covered = vec![false; reduction.instance.num_elements()];
        for &s in &out.cover.chosen {
            let facility = reduction.set_facility[s];
            if !open.contains(&facility) {
                open.push(facility);
            }
            for &e in &reduction.instance.sets()[s].elements {
                covered[e] = true;
            }
        }
        covered_light = covered
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(e, _)| reduction.element_client[e])
            .collect();
        rounding_trace = Some(out.trace);
    }
    open.sort_unstable();
    open.dedup();
    if open.is_empty() {
        // Possible only if every requirement was met without opening; the
        // cheapest facility keeps the solution well-formed.
        let cheapest = (0..fl.num_facilities())
            .min_by(|&a, &b| fl.open_cost(a).total_cmp(&fl.open_cost(b)))
            .expect("at least one facility");
        open.push(cheapest);
    }

    // Serve every heavy client plus, per color, the cheapest residual covered
    // clients up to the residual requirement.
    let mut served: Vec<(usize, usize)> = Vec::new();
    let mut served_flag = vec![false; fl.num_clients()];
    for &j in &served_heavy {
        let (i, _) = fl.nearest_open(&open, j);
        served.push((j, i));
        served_flag[j] = true;
    }
    let covered_sorted = {
        let mut c = covered_light;
        c.sort_unstable();
        c
    };
    for (t, color) in fl.colors().iter().enumerate() {
        let heavy_members = color
            .elements
            .iter()
            .filter(|&&j| served_flag[j])
            .count();
        let residual = color.requirement.saturating_sub(heavy_members);
        if residual == 0 {
            continue;
        }
        let mut candidates: Vec<usize> = color
            .elements
            .iter()
            .copied()
            .filter(|&j| !served_flag[j] && covered_sorted.binary_search(&j).is_ok())
            .collect();
        if candidates.len() < residual {
            return Err(Error::Contract(format!(
                "rounded cover left color {t} short: {} covered of {residual} needed",
                candidates.len()
            )));
        }
        candidates.sort_by(|&a, &b| {
            fl.nearest_open(&open, a)
                .1
                .total_cmp(&fl.nearest_open(&open, b).1)
                .then(a.cmp(&b))
        });
        for &j in candidates.iter().take(residual) {
            let (i, _) = fl.nearest_open(&open, j);
            served.push((j, i));
            served_flag[j] = true;
        }
    }
    served.sort_unstable();

    let open_cost: f64 = open.iter().map(|&i| fl.open_cost(i)).sum();
    let connect: f64 = served.iter().map(|&(j, _)| fl.nearest_open(&open, j).1).sum();
    let solution = FLSolution {
        open,
        served,
        cost: open_cost + connect,
    };
    solution.verify(fl)?;
    Ok(FlOutput {
        solution,
        stats: FlRunStats {
            delta,
            lp_cost: frac.cost(fl),
            cuts,
            heavy_clients: heavy.len(),
            rounding_trace,
        },
    })
}

// ---------------------------------------------------------------------------
// JSON format shared by the facility location and ball covering solvers
// ---------------------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct FacilityJson {
    cost: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct DistancesJson {
    facility_client: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    client_client: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Serialize, Deserialize)]
struct FlColorJson {
    elements: Vec<usize>,
    requirement: usize,
}

/// Serialized form: `{"facilities": [{"cost"}], "clients": N, "distances":
/// {"facility_client", "client_client"?}, "colors": [...], "gamma"?}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct FlJson {
    facilities: Vec<FacilityJson>,
    clients: usize,
    distances: DistancesJson,
    colors: Vec<FlColorJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
}

impl FlJson {
    pub fn from_instance(fl: &FLInstance, gamma: Option<f64>) -> FlJson {
        FlJson {
            facilities: fl
                .open_costs
                .iter()
                .map(|&cost| FacilityJson { cost })
                .collect(),
            clients: fl.num_clients,
            distances: DistancesJson {
                facility_client: fl.dist.clone(),
                client_client: fl.client_dist.clone(),
            },
            colors: fl
                .colors
                .iter()
                .map(|c| FlColorJson {
                    elements: c.elements.clone(),
                    requirement: c.requirement,
                })
                .collect(),
            gamma,
        }
    }

    pub fn into_instance(self) -> Result<(FLInstance, Option<f64>)> {
        let fl = FLInstance::new(
            self.facilities.into_iter().map(|f| f.cost).collect(),
            self.clients,
            self.distances.facility_client,
            self.distances.client_client,
            self.colors
                .into_iter()
                .map(|c| (c.elements, c.requirement))
                .collect(),
        )?;
        Ok((fl, self.gamma))
    }
}

impl FLInstance {
    pub fn from_json(text: &str) -> Result<(FLInstance, Option<f64>)> {
        let raw: FlJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("facility JSON: {e}")))?;
        raw.into_instance()
    }

    pub fn to_json(&self, gamma: Option<f64>) -> String {
        serde_json::to_string_pretty(&FlJson::from_instance(self, gamma))
            .expect("facility serialization cannot fail")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Two facilities, each with a private pair of co-located clients and a
    /// per-cluster color: fractionally half-opening both is cheap, while any
    /// integral solution pays both opening costs.
    fn fl_gap() -> FLInstance {
        FLInstance::new(
            vec![1.0, 1.0],
            4,
            vec![
                vec![0.0, 0.0, 10.0, 10.0],
                vec![10.0, 10.0, 0.0, 0.0],
            ],
            Some(vec![
                vec![0.0, 0.0, 10.0, 10.0],
                vec![0.0, 0.0, 10.0, 10.0],
                vec![10.0, 10.0, 0.0, 0.0],
                vec![10.0, 10.0, 0.0, 0.0],
            ]),
            vec![(vec![0, 1], 1), (vec![2, 3], 1)],
        )
        .unwrap()
    }

    /// Exact optimum by enumerating facility subsets; given the open set, the
    /// best choice is the cheapest `k_t` connections per color.
    fn fl_oracle(fl: &FLInstance) -> f64 {
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

    fn random_fl(seed: u64, nf: usize, nc: usize, r: usize) -> FLInstance {
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

    #[test]
    fn validation_rejects_bad_metric() {
        // Triangle violation: facility at distance 5 from client 0 but the
        // detour through client 1 is shorter than claimed.
        let bad = FLInstance::new(
            vec![1.0],
            2,
            vec![vec![5.0, 1.0]],
            Some(vec![vec![0.0, 1.0], vec![1.0, 0.0]]),
            vec![(vec![0, 1], 1)],
        );
        assert!(bad.unwrap_err().to_string().contains("triangle"));

        let bad = FLInstance::new(
            vec![1.0],
            2,
            vec![vec![1.0, 1.0]],
            None,
            vec![(vec![0], 1), (vec![0, 1], 1)],
        );
        assert!(bad.unwrap_err().to_string().contains("partition"));
    }

    #[test]
    fn natural_lp_small_optima() {
        // One facility (cost 1), two clients at distance 1, one color.
        let fl = FLInstance::new(
            vec![1.0],
            2,
            vec![vec![1.0, 1.0]],
            Some(vec![vec![0.0, 2.0], vec![2.0, 0.0]]),
            vec![(vec![0, 1], 2)],
        )
        .unwrap();
        let lp = build_fl_lp(&fl);
        let sol = solve_lp(&lp).unwrap();
        assert!((sol.optimal().unwrap().objective - 3.0).abs() < 1e-6);

        let fl_k1 = FLInstance::new(
            vec![1.0],
            2,
            vec![vec![1.0, 1.0]],
            Some(vec![vec![0.0, 2.0], vec![2.0, 0.0]]),
            vec![(vec![0, 1], 1)],
        )
        .unwrap();
        // Half-opening the facility and half-serving both clients is
        // feasible: cost x + y00 + y01 with x >= max(z) and z summing to 1
        // bottoms out at 1.5.
        let sol = solve_lp(&build_fl_lp(&fl_k1)).unwrap();
        assert!((sol.optimal().unwrap().objective - 1.5).abs() < 1e-6);
    }

    #[test]
    fn natural_lp_has_a_gap() {
        let fl = fl_gap();
        let lp_value = solve_lp(&build_fl_lp(&fl))
            .unwrap()
            .optimal()
            .unwrap()
            .objective;
        let opt = fl_oracle(&fl);
        assert!((lp_value - 1.0).abs() < 1e-6, "LP value {lp_value}");
        assert!((opt - 2.0).abs() < 1e-9);
        assert!(lp_value < opt - 0.5);
    }

    #[test]
    fn gap_witness_violates_empty_heavy_cut() {
        let fl = fl_gap();
        // The fractional point: both facilities half open, own clients served
        // at 1/2 each.
        let x = vec![0.5, 0.5];
        let y = vec![
            vec![0.5, 0.5, 0.0, 0.0],
            vec![0.0, 0.0, 0.5, 0.5],
        ];
        let cut = fl_cut(&fl, &[], 0).unwrap();
        assert_eq!(cut.residual, 1);
        let lhs = fl_cut_lhs(&fl, &cut, &x, &y);
        assert!(lhs < 1.0 - 1e-9, "lhs {lhs}");
    }

    #[test]
    fn cut_block_forces_integrality() {
        // One facility, two residual clients, residual requirement 2: the
        // auxiliary block admits only x = y = 1.
        let fl = FLInstance::new(
            vec![1.0],
            2,
            vec![vec![1.0, 1.0]],
            None,
            vec![(vec![0, 1], 2)],
        )
        .unwrap();
        let cut = fl_cut(&fl, &[], 0).unwrap();
        assert_eq!(cut.residual, 2);
        let layout = FlLayout::of(&fl);
        let mut lp = LinearProgram::new(layout.base_vars() + 1);
        for (var, coeff) in fl_cost_terms(&fl, &layout) {
            lp.set_objective(var, coeff).unwrap();
        }
        push_natural_fl_rows(&mut lp, &fl, &layout);
        append_fl_cut(&mut lp, &layout, &cut, layout.base_vars()).unwrap();
        let sol = solve_lp(&lp).unwrap();
        let sol = sol.optimal().unwrap();
        assert!((sol.values[layout.x(0)] - 1.0).abs() < 1e-6);
        assert!((sol.values[layout.y(0, 0)] - 1.0).abs() < 1e-6);
        assert!((sol.values[layout.y(0, 1)] - 1.0).abs() < 1e-6);
    }

    /// Integral feasible solutions satisfy every cut, for the derived heavy
    /// set of the run and for arbitrary heavy subsets.
    #[test]
    fn cuts_hold_for_integral_solutions() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for seed in 0..20u64 {
            let fl = random_fl(seed, 3, 5, 2);
            let nf = fl.num_facilities();
            let nc = fl.num_clients();
            for mask in 1u32..(1 << nf) {
                let open: Vec<usize> = (0..nf).filter(|&i| mask & (1 << i) != 0).collect();
                // Serve everything at the nearest open facility.
                let mut x = vec![0.0; nf];
                for &i in &open {
                    x[i] = 1.0;
                }
                let mut y = vec![vec![0.0; nc]; nf];
                for j in 0..nc {
                    let (i, _) = fl.nearest_open(&open, j);
                    y[i][j] = 1.0;
                }
                for _ in 0..4 {
                    let heavy: Vec<usize> = (0..nc).filter(|_| rng.gen_bool(0.4)).collect();
                    for t in 0..fl.num_colors() {
                        match fl_cut(&fl, &heavy, t) {
                            Ok(cut) => {
                                let lhs = fl_cut_lhs(&fl, &cut, &x, &y);
                                assert!(
                                    lhs >= cut.residual as f64 - 1e-9,
                                    "seed {seed} mask {mask} color {t}"
                                );
                            }
                            Err(Error::Contract(_)) => {}
                            Err(e) => panic!("{e}"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn split_breakpoints_match_hand_calculation() {
        // x = 0.05, connections 0.05 and 0.02 at alpha = 6: copies (0.02,
        // both) and (0.03, first), the latter split into two below 1/36.
        let fl = FLInstance::new(
            vec![1.0],
            2,
            vec![vec![2.0, 2.0]],
            None,
            vec![(vec![0, 1], 1)],
        )
        .unwrap();
        let splits = split_facilities(&fl, &[0.05], &[vec![0.05, 0.02]], 6.0);
        assert_eq!(splits.len(), 3);
        assert!((splits[0].x_value - 0.02).abs() < 1e-12);
        assert_eq!(splits[0].clients, vec![0, 1]);
        assert!((splits[1].x_value - 0.015).abs() < 1e-12);
        assert_eq!(splits[1].clients, vec![0]);
        assert!((splits[2].x_value - 0.015).abs() < 1e-12);
        assert_eq!(splits[2].clients, vec![0]);

        // All connections zero: a single unflagged copy.
        let splits = split_facilities(&fl, &[0.02], &[vec![0.0, 0.0]], 6.0);
        assert_eq!(splits.len(), 1);
        assert!((splits[0].x_value - 0.02).abs() < 1e-12);
        assert!(splits[0].clients.is_empty());
    }

    #[test]
    fn split_conservation_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for seed in 0..40u64 {
            let fl = random_fl(seed, 4, 6, 2);
            let nf = fl.num_facilities();
            let nc = fl.num_clients();
            let x: Vec<f64> = (0..nf).map(|_| rng.gen_range(0.0..0.2)).collect();
            let y: Vec<Vec<f64>> = (0..nf)
                .map(|i| (0..nc).map(|_| rng.gen_range(0.0..1.0) * x[i]).collect())
                .collect();
            let splits = split_facilities(&fl, &x, &y, 6.0);
            let thr = heavy_threshold(6.0);

            for i in 0..nf {
                let total: f64 = splits
                    .iter()
                    .filter(|s| s.facility == i)
                    .map(|s| s.x_value)
                    .sum();
                assert!((total - x[i]).abs() < 1e-9, "facility {i} mass");
            }
            for s in &splits {
                assert!(s.x_value < thr, "copy at {} >= threshold", s.x_value);
            }
            for i in 0..nf {
                for j in 0..nc {
                    let flagged: f64 = splits
                        .iter()
                        .filter(|s| s.facility == i && s.clients.contains(&j))
                        .map(|s| s.x_value)
                        .sum();
                    assert!(
                        (flagged - y[i][j]).abs() < 1e-9,
                        "seed {seed}: y[{i}][{j}] = {} vs flagged {flagged}",
                        y[i][j]
                    );
                }
            }

            // Splitting never decreases a cut's left-hand side: evaluate the
            // copies as stand-alone facilities.
            for t in 0..fl.num_colors() {
                if let Ok(cut) = fl_cut(&fl, &[], t) {
                    let original = fl_cut_lhs(&fl, &cut, &x, &y);
                    let k = cut.residual as f64;
                    let split_lhs: f64 = splits
                        .iter()
                        .map(|s| {
                            let ysum: f64 = cut
                                .residual_clients
                                .iter()
                                .filter(|j| s.clients.contains(j))
                                .map(|_| s.x_value)
                                .sum();
                            (s.x_value * k).min(ysum)
                        })
                        .sum();
                    assert!(
                        split_lhs >= original - 1e-9,
                        "seed {seed} color {t}: {split_lhs} < {original}"
                    );
                }
            }
        }
    }

    #[test]
    fn reduce_weight_formula() {
        // A copy at 0.02 flagged for both clients of a cost-1 facility at
        // distance 2 each: full-charge weight 1 + 4 = 5.
        let fl = FLInstance::new(
            vec![1.0],
            2,
            vec![vec![2.0, 2.0]],
            None,
            vec![(vec![0, 1], 1)],
        )
        .unwrap();
        let splits = vec![SplitFacility {
            facility: 0,
            x_value: 0.02,
            clients: vec![0, 1],
        }];
        let reduction = fl_reduce(&fl, &splits, &[]).unwrap();
        assert_eq!(reduction.instance.num_sets(), 1);
        assert!((reduction.instance.sets()[0].weight - 5.0).abs() < 1e-12);
        assert_eq!(reduction.instance.sets()[0].elements, vec![0, 1]);

        // A copy with no flagged clients reduces to an empty set (kept so
        // indices align with the copy list).
        let splits = vec![
            SplitFacility {
                facility: 0,
                x_value: 0.02,
                clients: vec![0, 1],
            },
            SplitFacility {
                facility: 0,
                x_value: 0.01,
                clients: vec![],
            },
        ];
        let reduction = fl_reduce(&fl, &splits, &[]).unwrap();
        assert!(reduction.instance.sets()[1].elements.is_empty());
        assert!((reduction.instance.sets()[1].weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn reduce_cost_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for seed in 0..30u64 {
            let fl = random_fl(seed, 3, 6, 3);
            let nf = fl.num_facilities();
            let nc = fl.num_clients();
            let x: Vec<f64> = (0..nf).map(|_| rng.gen_range(0.0..0.2)).collect();
            let y: Vec<Vec<f64>> = (0..nf)
                .map(|i| (0..nc).map(|_| rng.gen_range(0.0..1.0) * x[i]).collect())
                .collect();
            let splits = split_facilities(&fl, &x, &y, 6.0);
            let reduction = fl_reduce(&fl, &splits, &[]).unwrap();

            let reduced_cost: f64 = reduction
                .instance
                .sets()
                .iter()
                .zip(&reduction.set_x)
                .map(|(s, &xv)| s.weight * xv)
                .sum();
            let mut direct = 0.0;
            for i in 0..nf {
                direct += fl.open_cost(i) * x[i];
                for j in 0..nc {
                    direct += fl.distance(i, j) * y[i][j];
                }
            }
            assert!(
                (reduced_cost - direct).abs() < 1e-9,
                "seed {seed}: {reduced_cost} vs {direct}"
            );
        }
    }

    #[test]
    fn solve_colocated_pair() {
        let fl = FLInstance::new(
            vec![1.5],
            2,
            vec![vec![0.0, 0.0]],
            None,
            vec![(vec![0, 1], 2)],
        )
        .unwrap();
        let out = solve_fl(&fl, &RoundingConfig::default()).unwrap();
        assert_eq!(out.solution.open, vec![0]);
        assert!((out.solution.cost - 1.5).abs() < 1e-9);
    }

    #[test]
    fn solve_gap_instance_matches_oracle() {
        let fl = fl_gap();
        let out = solve_fl(&fl, &RoundingConfig::default()).unwrap();
        assert!((out.solution.cost - fl_oracle(&fl)).abs() < 1e-9);
        assert_eq!(out.solution.open, vec![0, 1]);
    }

    #[test]
    fn solve_random_sweep_feasible() {
        for seed in 0..15u64 {
            let fl = random_fl(seed, 3, 6, 2);
            let config = RoundingConfig {
                seed,
                ..RoundingConfig::default()
            };
            let out = solve_fl(&fl, &config).unwrap();
            out.solution.verify(&fl).unwrap();
            let opt = fl_oracle(&fl);
            assert!(out.solution.cost >= opt - 1e-9, "seed {seed}");
        }
    }

    /// On a split solution the reduced system's empty-base strengthening row
    /// is the facility row restated: if the facility cuts held, the reduced
    /// rows hold for the copies' values.
    #[test]
    fn reduction_preserves_strengthening_rows() {
        use crate::partition::check_kc;
        for seed in 0..15u64 {
            let fl = random_fl(seed, 3, 6, 2);
            let (frac, heavy, _, _) = find_fl_solution(&fl, 6.0, None).unwrap();
            let mut y_light = frac.y.clone();
            for &j in &heavy {
                for row in y_light.iter_mut() {
                    row[j] = 0.0;
                }
            }
            let splits = split_facilities(&fl, &frac.x, &y_light, 6.0);
            let reduction = fl_reduce(&fl, &splits, &heavy).unwrap();
            if reduction.kept_colors.is_empty() {
                continue;
            }
            assert_eq!(
                check_kc(&reduction.instance, &reduction.set_x, &[]).unwrap(),
                None,
                "seed {seed}: reduced row violated by the copy values"
            );
        }
    }

    #[test]
    fn json_round_trip() {
        let fl = fl_gap();
        let text = fl.to_json(None);
        let (back, gamma) = FLInstance::from_json(&text).unwrap();
        assert!(gamma.is_none());
        assert_eq!(back.num_facilities(), 2);
        assert_eq!(back.colors()[1].elements, vec![2, 3]);
    }
}

