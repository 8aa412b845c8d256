//! Pareto dominance, non-dominated fronts and hypervolume.
//!
//! Every vector here is in the canonical orientation where each coordinate is maximised.
//! Objectives that are naturally minimised are negated before they reach this module.
//!
//! Hypervolume is exact for two objectives (strip sweep) and three objectives (slicing
//! along the last coordinate into 2-D sweeps). Higher dimensions use a Monte Carlo
//! estimate over the bounding box `[r, max]`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Samples per Monte Carlo block. Each block draws from its own ChaCha stream so the
/// estimate does not depend on how blocks are scheduled.
const MC_BLOCK: usize = 4096;

/// A point in objective space, every coordinate maximised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::invalid(format!(
                "objective vectors need at least 2 coordinates, got {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("objective vector"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for ObjectiveVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<ObjectiveVector> for Vec<f64> {
    fn from(v: ObjectiveVector) -> Self {
        v.0
    }
}

impl AsRef<[f64]> for ObjectiveVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// Lower corner of the hypervolume region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoint(Vec<f64>);

impl ReferencePoint {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("reference point"));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }
}

/// A set of mutually non-dominated objective vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoFront {
    dim: usize,
    points: Vec<ObjectiveVector>,
}

impl ParetoFront {
    pub fn empty(dim: usize) -> Self {
        Self { dim, points: Vec::new() }
    }

    pub fn points(&self) -> &[ObjectiveVector] {
        &self.points
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `a ≻ b`: at least as good everywhere and strictly better somewhere.
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> Result<bool> {
    check_dim(a.dim(), b.dim())?;
    Ok(dominates_slice(a.values(), b.values()))
}

pub(crate) fn dominates_slice(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x < y {
            return false;
        }
        if x > y {
            strict = true;
        }
    }
    strict
}

/// Indices of the non-dominated points. When several points share identical
/// coordinates only the earliest index is reported.
pub fn front_indices(points: &[ObjectiveVector]) -> Result<Vec<usize>> {
    let first = points.first().ok_or(Error::Empty("front extraction"))?;
    for p in points {
        check_dim(first.dim(), p.dim())?;
    }
    let idx = (0..points.len())
        .filter(|&i| {
            let p = points[i].values();
            !points.iter().enumerate().any(|(j, q)| {
                let q = q.values();
                dominates_slice(q, p) || (j < i && q == p)
            })
        })
        .collect();
    Ok(idx)
}

/// The maximal subset of `points`, duplicates collapsed to their first occurrence.
pub fn extract_front(points: &[ObjectiveVector]) -> Result<ParetoFront> {
    let idx = front_indices(points)?;
    Ok(ParetoFront {
        dim: points[0].dim(),
        points: idx.into_iter().map(|i| points[i].clone()).collect(),
    })
}

fn validate(front: &ParetoFront, r: &ReferencePoint) -> Result<()> {
    check_dim(front.dim(), r.dim())?;
    for p in front.points() {
        check_dim(front.dim(), p.dim())?;
        if p.values().iter().zip(r.values()).any(|(y, rj)| y <= rj) {
            return Err(Error::ReferenceNotDominated {
                reference: r.values().to_vec(),
                point: p.values().to_vec(),
            });
        }
    }
    Ok(())
}

/// Exact hypervolume for two or three objectives.
pub fn hypervolume(front: &ParetoFront, r: &ReferencePoint) -> Result<f64> {
    validate(front, r)?;
    let pts: Vec<&[f64]> = front.points().iter().map(|p| p.values()).collect();
    match front.dim() {
        2 | 3 => Ok(hv_exact(&pts, r.values())),
        m => Err(Error::invalid(format!(
            "exact hypervolume supports 2 or 3 objectives, got {m}; use estimate_hypervolume"
        ))),
    }
}

/// `HV(front ∪ candidates) − HV(front)` for two or three objectives.
pub fn hypervolume_improvement(
    candidates: &[ObjectiveVector],
    front: &ParetoFront,
    r: &ReferencePoint,
) -> Result<f64> {
    validate(front, r)?;
    let mut union: Vec<ObjectiveVector> = front.points().to_vec();
    union.extend_from_slice(candidates);
    if candidates.is_empty() {
        return Ok(0.0);
    }
    let combined = extract_front(&union)?;
    let after = hypervolume(&combined, r)?;
    let before = hypervolume(front, r)?;
    Ok((after - before).max(0.0))
}

/// Monte Carlo hypervolume estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Uniform Monte Carlo estimate over `[r, component-wise max]`, any dimension.
pub fn estimate_hypervolume(
    front: &ParetoFront,
    r: &ReferencePoint,
    samples: usize,
    seed: u64,
) -> Result<HvEstimate> {
    validate(front, r)?;
    if samples == 0 {
        return Err(Error::invalid("monte carlo hypervolume needs samples > 0"));
    }
    if front.is_empty() {
        return Ok(HvEstimate { value: 0.0, std_error: 0.0 });
    }
    let m = front.dim();
    let rv = r.values();
    let upper: Vec<f64> = (0..m)
        .map(|j| {
            front
                .points()
                .iter()
                .map(|p| p.values()[j])
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    let volume: f64 = upper.iter().zip(rv).map(|(u, l)| u - l).product();

    let mut hits = 0usize;
    let mut z = vec![0.0; m];
    let blocks = samples.div_ceil(MC_BLOCK);
    for block in 0..blocks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block as u64);
        let n = MC_BLOCK.min(samples - block * MC_BLOCK);
        for _ in 0..n {
            for j in 0..m {
                z[j] = rv[j] + rng.random::<f64>() * (upper[j] - rv[j]);
            }
            if front
                .points()
                .iter()
                .any(|p| p.values().iter().zip(&z).all(|(y, zj)| y >= zj))
            {
                hits += 1;
            }
        }
    }
    let n = samples as f64;
    let p = hits as f64 / n;
    Ok(HvEstimate {
        value: volume * p,
        std_error: volume * (p * (1.0 - p) / n).sqrt(),
    })
}

/// Exact hypervolume of arbitrary points (dominated ones allowed). Points that do not
/// strictly dominate `r` contribute nothing. Three or more objectives are sliced along the
/// last coordinate recursively; the public API only exposes this for M ≤ 3.
pub(crate) fn hv_exact(points: &[&[f64]], r: &[f64]) -> f64 {
    let pts: Vec<&[f64]> = points
        .iter()
        .copied()
        .filter(|p| p.iter().zip(r).all(|(y, rj)| y > rj))
        .collect();
    hv_slices(pts, r)
}

fn hv_slices(mut pts: Vec<&[f64]>, r: &[f64]) -> f64 {
    let m = r.len();
    if m == 2 {
        let mut flat: Vec<[f64; 2]> = pts.iter().map(|p| [p[0], p[1]]).collect();
        return hv2d(&mut flat, [r[0], r[1]]);
    }
    let last = m - 1;
    pts.sort_by(|a, b| b[last].total_cmp(&a[last]));
    let mut volume = 0.0;
    for i in 0..pts.len() {
        let next = pts.get(i + 1).map_or(r[last], |q| q[last]);
        let depth = pts[i][last] - next;
        if depth > 0.0 {
            let slice: Vec<&[f64]> = pts[..=i].iter().map(|p| &p[..last]).collect();
            volume += depth * hv_slices(slice, &r[..last]);
        }
    }
    volume
}

/// Strip sweep: sort by first coordinate descending and add the rectangle each point
/// contributes above the highest second coordinate seen so far.
pub(crate) fn hv2d(pts: &mut [[f64; 2]], r: [f64; 2]) -> f64 {
    pts.sort_by(|a, b| b[0].total_cmp(&a[0]).then(b[1].total_cmp(&a[1])));
    let mut area = 0.0;
    let mut ceiling = r[1];
    for p in pts.iter() {
        if p[0] <= r[0] {
            break;
        }
        if p[1] > ceiling {
            area += (p[0] - r[0]) * (p[1] - ceiling);
            ceiling = p[1];
        }
    }
    area
}
