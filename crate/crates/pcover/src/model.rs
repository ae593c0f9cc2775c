//! Problem data types and the bookkeeping shared by every solver module:
//! instances, covers, residual coverage state, and projections.
//!
//! An instance is a weighted set system over elements `0..n` together with
//! color classes, each carrying a coverage requirement. All element and set
//! ids are dense integers and all id lists are kept sorted and duplicate-free,
//! so intersections run in linear time. Instances are immutable after
//! construction; every operation here is a pure function of its inputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One weighted set of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct SetEntry {
    pub elements: Vec<usize>,
    pub weight: f64,
}

/// A color class: a group of elements and how many of them must be covered.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorClass {
    pub elements: Vec<usize>,
    pub requirement: usize,
}

/// A partition set cover instance.
///
/// Invariants enforced at construction:
/// - every element id in any set or color is `< n`;
/// - every color class is non-empty with `1 <= requirement <= |class|`;
/// - every element belongs to at least one color class;
/// - all set weights are non-negative and finite;
/// - every requirement is attainable by the full collection, so selecting
///   all sets is always feasible.
#[derive(Debug, Clone)]
pub struct Instance {
    n: usize,
    sets: Vec<SetEntry>,
    colors: Vec<ColorClass>,
    /// Inverted incidence: for each element, the sorted list of sets containing it.
    sets_of_element: Vec<Vec<usize>>,
}

/// A selected sub-collection of sets, by index into the instance's set list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cover {
    pub chosen: Vec<usize>,
}

impl Cover {
    /// Builds a cover, sorting and deduplicating the indices.
    pub fn new(mut chosen: Vec<usize>) -> Self {
        chosen.sort_unstable();
        chosen.dedup();
        Cover { chosen }
    }

    pub fn empty() -> Self {
        Cover { chosen: Vec::new() }
    }

    pub fn contains(&self, i: usize) -> bool {
        self.chosen.binary_search(&i).is_ok()
    }
}

/// Residual coverage bookkeeping for a committed partial cover.
#[derive(Debug, Clone)]
pub struct ResidualState {
    /// The committed sets, sorted and duplicate-free.
    pub base: Vec<usize>,
    /// For each color, the covered members (sorted element ids).
    pub covered_per_color: Vec<Vec<usize>>,
    /// For each color, the remaining requirement, clamped at zero.
    pub residual_per_color: Vec<usize>,
}

impl ResidualState {
    pub fn in_base(&self, i: usize) -> bool {
        self.base.binary_search(&i).is_ok()
    }

    /// Colors whose residual requirement is still positive.
    pub fn active_colors(&self) -> impl Iterator<Item = usize> + '_ {
        self.residual_per_color
            .iter()
            .enumerate()
            .filter(|(_, &k)| k > 0)
            .map(|(t, _)| t)
    }
}

/// Outcome of checking a cover against an instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverageReport {
    /// Per-color count of covered members.
    pub covered: Vec<usize>,
    pub feasible: bool,
    pub total_weight: f64,
}

impl CoverageReport {
    /// Per-color shortfalls (requirement minus covered, clamped at zero).
    pub fn deficits(&self, instance: &Instance) -> Vec<usize> {
        instance
            .colors()
            .iter()
            .zip(&self.covered)
            .map(|(c, &got)| c.requirement.saturating_sub(got))
            .collect()
    }
}

/// A set system restricted to a subset of the elements.
///
/// All sets of the original instance are retained (possibly empty) so that
/// set indices line up with the instance. Elements are re-identified as
/// `0..element_ids.len()` with `element_ids` mapping back to original ids.
#[derive(Debug, Clone)]
pub struct Projection {
    pub element_ids: Vec<usize>,
    /// Per set, the local ids of its surviving elements.
    pub sets: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
}

impl Projection {
    pub fn num_elements(&self) -> usize {
        self.element_ids.len()
    }

    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    /// Maximum number of sets any element belongs to (0 for an empty ground set).
    pub fn max_frequency(&self) -> usize {
        let mut freq = vec![0usize; self.element_ids.len()];
        for set in &self.sets {
            for &e in set {
                freq[e] += 1;
            }
        }
        freq.into_iter().max().unwrap_or(0)
    }
}

fn normalize_ids(mut ids: Vec<usize>) -> Vec<usize> {
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// Sorted-list intersection size.
fn intersection_count(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Sorted-list intersection.
fn intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

impl Instance {
    /// Builds and validates an instance. Element lists are sorted and
    /// deduplicated; all other invariants are checked and reported with a
    /// field-specific message.
    pub fn new(
        n: usize,
        sets: Vec<(f64, Vec<usize>)>,
        colors: Vec<(Vec<usize>, usize)>,
    ) -> Result<Instance> {
        let sets: Vec<SetEntry> = sets
            .into_iter()
            .map(|(weight, elements)| SetEntry {
                elements: normalize_ids(elements),
                weight,
            })
            .collect();
        let colors: Vec<ColorClass> = colors
            .into_iter()
            .map(|(elements, requirement)| ColorClass {
                elements: normalize_ids(elements),
                requirement,
            })
            .collect();

        for (i, set) in sets.iter().enumerate() {
            if !(set.weight >= 0.0 && set.weight.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "sets[{i}].weight: must be a finite non-negative number, got {}",
                    set.weight
                )));
            }
            if let Some(&bad) = set.elements.iter().find(|&&e| e >= n) {
                return Err(Error::InvalidInput(format!(
                    "sets[{i}].elements: element id {bad} out of range (n={n})"
                )));
            }
        }

        let mut in_some_color = vec![false; n];
        for (t, color) in colors.iter().enumerate() {
            if color.elements.is_empty() {
                return Err(Error::InvalidInput(format!(
                    "colors[{t}].elements: color class must be non-empty"
                )));
            }
            if let Some(&bad) = color.elements.iter().find(|&&e| e >= n) {
                return Err(Error::InvalidInput(format!(
                    "colors[{t}].elements: element id {bad} out of range (n={n})"
                )));
            }
            if color.requirement < 1 || color.requirement > color.elements.len() {
                return Err(Error::InvalidInput(format!(
                    "colors[{t}].requirement: must be between 1 and {}, got {}",
                    color.elements.len(),
                    color.requirement
                )));
            }
            for &e in &color.elements {
                in_some_color[e] = true;
            }
        }
        if let Some(orphan) = in_some_color.iter().position(|&b| !b) {
            return Err(Error::InvalidInput(format!(
                "element {orphan} belongs to no color class"
            )));
        }

        let mut sets_of_element = vec![Vec::new(); n];
        for (i, set) in sets.iter().enumerate() {
            for &e in &set.elements {
                sets_of_element[e].push(i);
            }
        }

        // Requirements must be attainable by the full collection; rejecting
        // here makes "select everything" a universal fallback downstream.
        let mut coverable = vec![false; n];
        for set in &sets {
            for &e in &set.elements {
                coverable[e] = true;
            }
        }
        for (t, color) in colors.iter().enumerate() {
            let reachable = color.elements.iter().filter(|&&e| coverable[e]).count();
            if reachable < color.requirement {
                return Err(Error::InvalidInput(format!(
                    "colors[{t}]: requirement {} exceeds the {} members covered by any set",
                    color.requirement, reachable
                )));
            }
        }

        Ok(Instance {
            n,
            sets,
            colors,
            sets_of_element,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.n
    }

    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn num_colors(&self) -> usize {
        self.colors.len()
    }

    pub fn sets(&self) -> &[SetEntry] {
        &self.sets
    }

    pub fn colors(&self) -> &[ColorClass] {
        &self.colors
    }

    /// Sets containing the given element, sorted.
    pub fn sets_of(&self, element: usize) -> &[usize] {
        &self.sets_of_element[element]
    }

    pub fn total_weight(&self) -> f64 {
        self.sets.iter().map(|s| s.weight).sum()
    }

    pub fn weight_of(&self, chosen: &[usize]) -> f64 {
        chosen.iter().map(|&i| self.sets[i].weight).sum()
    }

    fn check_set_indices(&self, indices: &[usize]) -> Result<()> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.sets.len()) {
            return Err(Error::InvalidInput(format!(
                "set index {bad} out of range (m={})",
                self.sets.len()
            )));
        }
        Ok(())
    }

    /// Union of the given sets, as a sorted element list.
    pub fn union_of(&self, indices: &[usize]) -> Result<Vec<usize>> {
        self.check_set_indices(indices)?;
        let mut hit = vec![false; self.n];
        for &i in indices {
            for &e in &self.sets[i].elements {
                hit[e] = true;
            }
        }
        Ok((0..self.n).filter(|&e| hit[e]).collect())
    }

    /// Checks a cover: per-color covered counts, feasibility, and weight.
    pub fn verify_cover(&self, cover: &Cover) -> Result<CoverageReport> {
        let union = self.union_of(&cover.chosen)?;
        let covered: Vec<usize> = self
            .colors
            .iter()
            .map(|c| intersection_count(&union, &c.elements))
            .collect();
        let feasible = covered
            .iter()
            .zip(&self.colors)
            .all(|(&got, c)| got >= c.requirement);
        Ok(CoverageReport {
            covered,
            feasible,
            total_weight: self.weight_of(&cover.chosen),
        })
    }

    /// Residual coverage state after committing the sets in `base`.
    pub fn residual(&self, base: &[usize]) -> Result<ResidualState> {
        let base = normalize_ids(base.to_vec());
        let union = self.union_of(&base)?;
        let covered_per_color: Vec<Vec<usize>> = self
            .colors
            .iter()
            .map(|c| intersection(&union, &c.elements))
            .collect();
        let residual_per_color: Vec<usize> = self
            .colors
            .iter()
            .zip(&covered_per_color)
            .map(|(c, cov)| c.requirement.saturating_sub(cov.len()))
            .collect();
        Ok(ResidualState {
            base,
            covered_per_color,
            residual_per_color,
        })
    }

    /// Number of still-uncovered members of color `t` that set `i` would add
    /// on top of the state's base. `i` must not already be committed.
    pub fn degree(&self, state: &ResidualState, i: usize, t: usize) -> Result<usize> {
        self.check_set_indices(&[i])?;
        if t >= self.colors.len() {
            return Err(Error::InvalidInput(format!(
                "color index {t} out of range (r={})",
                self.colors.len()
            )));
        }
        if state.in_base(i) {
            return Err(Error::Contract(format!(
                "degree queried for set {i} already in the base"
            )));
        }
        let fresh: Vec<usize> = self.colors[t]
            .elements
            .iter()
            .copied()
            .filter(|e| state.covered_per_color[t].binary_search(e).is_err())
            .collect();
        Ok(intersection_count(&self.sets[i].elements, &fresh))
    }

    /// Restricts the set system to `subset`, keeping every set (possibly
    /// empty) so indices stay aligned with the instance.
    pub fn project(&self, subset: &[usize]) -> Result<Projection> {
        let element_ids = normalize_ids(subset.to_vec());
        if let Some(&bad) = element_ids.iter().find(|&&e| e >= self.n) {
            return Err(Error::InvalidInput(format!(
                "projection element id {bad} out of range (n={})",
                self.n
            )));
        }
        let mut local = vec![usize::MAX; self.n];
        for (idx, &e) in element_ids.iter().enumerate() {
            local[e] = idx;
        }
        let sets = self
            .sets
            .iter()
            .map(|s| {
                s.elements
                    .iter()
                    .filter(|&&e| local[e] != usize::MAX)
                    .map(|&e| local[e])
                    .collect()
            })
            .collect();
        Ok(Projection {
            element_ids,
            sets,
            weights: self.sets.iter().map(|s| s.weight).collect(),
        })
    }
}

// ---------------------------------------------------------------------------
// JSON format
// ---------------------------------------------------------------------------

/// Geometry annotations carried alongside an instance (interval constructions).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Geometry {
    /// Per-set interval on the real line.
    pub intervals: Vec<[f64; 2]>,
    /// Per-element point: coordinate and color id.
    pub points: Vec<GeoPoint>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GeoPoint {
    pub coord: f64,
    pub color: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct SetJson {
    weight: f64,
    elements: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ColorJson {
    elements: Vec<usize>,
    requirement: usize,
}

/// Serialized instance: `{"n": .., "sets": [{"weight", "elements"}], "colors":
/// [{"elements", "requirement"}]}` plus an optional `geometry` block.
#[derive(Debug, Serialize, Deserialize)]
pub struct InstanceJson {
    n: usize,
    sets: Vec<SetJson>,
    colors: Vec<ColorJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    geometry: Option<Geometry>,
}

impl InstanceJson {
    pub fn from_instance(instance: &Instance, geometry: Option<Geometry>) -> Self {
        InstanceJson {
            n: instance.num_elements(),
            sets: instance
                .sets()
                .iter()
                .map(|s| SetJson {
                    weight: s.weight,
                    elements: s.elements.clone(),
                })
                .collect(),
            colors: instance
                .colors()
                .iter()
                .map(|c| ColorJson {
                    elements: c.elements.clone(),
                    requirement: c.requirement,
                })
                .collect(),
            geometry,
        }
    }

    pub fn into_instance(self) -> Result<(Instance, Option<Geometry>)> {
        let instance = Instance::new(
            self.n,
            self.sets
                .into_iter()
                .map(|s| (s.weight, s.elements))
                .collect(),
            self.colors
                .into_iter()
                .map(|c| (c.elements, c.requirement))
                .collect(),
        )?;
        Ok((instance, self.geometry))
    }
}

impl Instance {
    /// Parses and validates an instance from JSON, reporting syntax errors
    /// with line/column and invariant violations with the offending field.
    pub fn from_json(text: &str) -> Result<(Instance, Option<Geometry>)> {
        let raw: InstanceJson = serde_json::from_str(text)
            .map_err(|e| Error::InvalidInput(format!("instance JSON: {e}")))?;
        raw.into_instance()
    }

    pub fn to_json(&self, geometry: Option<Geometry>) -> String {
        serde_json::to_string_pretty(&InstanceJson::from_instance(self, geometry))
            .expect("instance serialization cannot fail")
    }
}
