//! Instance constructions: the block-partition family with its known gap
//! between the plain covering LP and the integral optimum, the interval
//! embedding of plain set cover, and seeded random instances for test sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{GeoPoint, Geometry, Instance};

/// An instance together with its one-dimensional geometric realization.
#[derive(Debug, Clone)]
pub struct GeometricInstance {
    pub instance: Instance,
    pub geometry: Geometry,
}

impl GeometricInstance {
    /// Checks the geometric annotations: every element's point lies inside
    /// the interval of each set containing it, and intervals are pairwise
    /// disjoint.
    pub fn validate(&self) -> Result<()> {
        let geo = &self.geometry;
        if geo.intervals.len() != self.instance.num_sets() {
            return Err(Error::InvalidInput(
                "geometry.intervals length must match the set count".into(),
            ));
        }
        if geo.points.len() != self.instance.num_elements() {
            return Err(Error::InvalidInput(
                "geometry.points length must match the element count".into(),
            ));
        }
        for (i, set) in self.instance.sets().iter().enumerate() {
            let [lo, hi] = geo.intervals[i];
            for &e in &set.elements {
                let p = geo.points[e].coord;
                if p < lo || p > hi {
                    return Err(Error::InvalidInput(format!(
                        "point {e} at {p} lies outside interval {i} [{lo}, {hi}]"
                    )));
                }
            }
        }
        let mut spans: Vec<[f64; 2]> = geo.intervals.clone();
        spans.sort_by(|a, b| a[0].total_cmp(&b[0]));
        for w in spans.windows(2) {
            if w[1][0] <= w[0][1] {
                return Err(Error::InvalidInput(format!(
                    "intervals [{}, {}] and [{}, {}] overlap",
                    w[0][0], w[0][1], w[1][0], w[1][1]
                )));
            }
        }
        Ok(())
    }
}

/// The gap family on `n = s^2` elements: `s` unit-weight sets of `s` elements
/// partition the ground set, and each color class equals one set with
/// requirement 1. The plain covering LP has value 1 while any feasible
/// integral cover must take all `s` sets.
pub fn gap_instance(n: usize) -> Result<Instance> {
    let s = (n as f64).sqrt().round() as usize;
    if n == 0 || s * s != n {
        return Err(Error::InvalidInput(format!(
            "gap instance needs a positive perfect square, got n={n}"
        )));
    }
    let sets: Vec<(f64, Vec<usize>)> = (0..s)
        .map(|i| (1.0, (i * s..(i + 1) * s).collect()))
        .collect();
    let colors: Vec<(Vec<usize>, usize)> = (0..s)
        .map(|i| ((i * s..(i + 1) * s).collect(), 1))
        .collect();
    Instance::new(n, sets, colors)
}

/// Embeds a plain set cover instance (one color class over the whole ground
/// set, requirement `n`) into disjoint unit intervals: set `i` becomes the
/// interval `[2i, 2i+1]`, and each incidence `(set i, element j)` becomes a
/// point of color `j` placed inside that interval. Feasible interval covers
/// correspond one-to-one with feasible set covers of the input, at equal cost.
pub fn setcover_to_intervals(sc: &Instance) -> Result<GeometricInstance> {
    let n = sc.num_elements();
    if sc.num_colors() != 1
        || sc.colors()[0].elements.len() != n
        || sc.colors()[0].requirement != n
    {
        return Err(Error::InvalidInput(
            "interval embedding expects a plain set cover instance: \
             one color class spanning all elements with requirement n"
                .into(),
        ));
    }

    let mut points: Vec<GeoPoint> = Vec::new();
    let mut new_sets: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut intervals: Vec<[f64; 2]> = Vec::new();
    let mut color_members: Vec<Vec<usize>> = vec![Vec::new(); n];

    for (i, set) in sc.sets().iter().enumerate() {
        let lo = 2.0 * i as f64;
        intervals.push([lo, lo + 1.0]);
        let size = set.elements.len();
        let mut members = Vec::with_capacity(size);
        for (rank, &j) in set.elements.iter().enumerate() {
            let id = points.len();
            points.push(GeoPoint {
                coord: lo + (rank as f64 + 1.0) / (size as f64 + 1.0),
                color: j,
            });
            members.push(id);
            color_members[j].push(id);
        }
        new_sets.push((set.weight, members));
    }

    let colors: Vec<(Vec<usize>, usize)> = color_members
        .into_iter()
        .map(|members| (members, 1))
        .collect();
    let instance = Instance::new(points.len(), new_sets, colors)?;
    Ok(GeometricInstance {
        instance,
        geometry: Geometry { intervals, points },
    })
}

/// Parameters for [`random_instance`].
#[derive(Debug, Clone)]
pub struct RandomParams {
    pub n: usize,
    pub m: usize,
    pub r: usize,
    pub density: f64,
    pub weight_range: (f64, f64),
    pub seed: u64,
}

impl RandomParams {
    pub fn new(n: usize, m: usize, r: usize, density: f64, seed: u64) -> Self {
        RandomParams {
            n,
            m,
            r,
            density,
            weight_range: (1.0, 10.0),
            seed,
        }
    }
}

/// Seeded random instance: each (set, element) incidence is drawn
/// independently with the given density, isolated elements are patched into a
/// random set, colors partition the ground set into `r` near-equal blocks,
/// and each requirement is uniform in `[1, |class|]`.
pub fn random_instance(params: &RandomParams) -> Result<Instance> {
    let RandomParams {
        n,
        m,
        r,
        density,
        weight_range: (w_lo, w_hi),
        seed,
    } = *params;
    if n == 0 || m == 0 || r == 0 {
        return Err(Error::InvalidInput(
            "random instance needs positive n, m, and r".into(),
        ));
    }
    if r > n {
        return Err(Error::InvalidInput(format!(
            "cannot partition {n} elements into {r} non-empty color classes"
        )));
    }
    if !(density > 0.0 && density <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "density must lie in (0, 1], got {density}"
        )));
    }
    if !(0.0 <= w_lo && w_lo <= w_hi) {
        return Err(Error::InvalidInput(format!(
            "weight range must satisfy 0 <= lo <= hi, got [{w_lo}, {w_hi}]"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut covered = vec![false; n];
    for set in membership.iter_mut() {
        for e in 0..n {
            if rng.gen_bool(density) {
                set.push(e);
                covered[e] = true;
            }
        }
    }
    for e in 0..n {
        if !covered[e] {
            let i = rng.gen_range(0..m);
            membership[i].push(e);
        }
    }

    let sets: Vec<(f64, Vec<usize>)> = membership
        .into_iter()
        .map(|elements| {
            let w = if w_lo == w_hi {
                w_lo
            } else {
                rng.gen_range(w_lo..w_hi)
            };
            (w, elements)
        })
        .collect();

    let mut colors = Vec::with_capacity(r);
    for t in 0..r {
        let start = t * n / r;
        let end = (t + 1) * n / r;
        let members: Vec<usize> = (start..end).collect();
        let k = rng.gen_range(1..=members.len());
        colors.push((members, k));
    }

    Instance::new(n, sets, colors)
}
