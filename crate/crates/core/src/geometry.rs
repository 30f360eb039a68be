//! Points, weighted point sets, distances and the two clustering costs.

use alloc::vec::Vec;
use core::ops::Deref;

use crate::{Error, Result};

/// A point in R^d with finite coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::ZeroDimension);
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinates"));
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: usize) -> Result<Self> {
        Point::new(alloc::vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    /// Builds a point without validation. Callers guarantee a nonempty,
    /// finite coordinate vector.
    pub(crate) fn from_raw(coords: Vec<f64>) -> Self {
        debug_assert!(!coords.is_empty() && coords.iter().all(|c| c.is_finite()));
        Point(coords)
    }
}

impl Deref for Point {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl<const N: usize> TryFrom<[f64; N]> for Point {
    type Error = Error;

    fn try_from(coords: [f64; N]) -> Result<Self> {
        Point::new(coords.to_vec())
    }
}

/// Clustering objective: exponent 2 on distances for k-means, 1 for k-median.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Objective {
    KMeans,
    KMedian,
}

impl Objective {
    pub fn exponent(self) -> u32 {
        match self {
            Objective::KMeans => 2,
            Objective::KMedian => 1,
        }
    }

    /// Per-point cost at squared distance `sq`.
    #[inline]
    pub fn cost_from_sq(self, sq: f64) -> f64 {
        match self {
            Objective::KMeans => sq,
            Objective::KMedian => libm::sqrt(sq),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Objective::KMeans => "kmeans",
            Objective::KMedian => "kmedian",
        }
    }
}

impl core::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kmeans" | "k-means" => Ok(Objective::KMeans),
            "kmedian" | "k-median" => Ok(Objective::KMedian),
            _ => Err(Error::invalid(alloc::format!("unknown objective `{s}`"))),
        }
    }
}

/// Ordered collection of points with one real weight each.
///
/// Raw data carries unit weights. Coresets may carry negative weights on
/// their center entries, and these flow through [`cost`] unchanged.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightedPointSet {
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl WeightedPointSet {
    pub fn new(points: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if points.len() != weights.len() {
            return Err(Error::LengthMismatch { points: points.len(), weights: weights.len() });
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("weights"));
        }
        if let Some(first) = points.first() {
            let dim = first.dim();
            if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
                return Err(Error::DimensionMismatch { expected: dim, got: bad.dim() });
            }
        }
        Ok(WeightedPointSet { points, weights })
    }

    /// All weights equal to one.
    pub fn unit(points: Vec<Point>) -> Result<Self> {
        let weights = alloc::vec![1.0; points.len()];
        WeightedPointSet::new(points, weights)
    }

    pub fn empty() -> Self {
        WeightedPointSet::default()
    }

    pub fn push(&mut self, point: Point, weight: f64) -> Result<()> {
        if !weight.is_finite() {
            return Err(Error::NonFinite("weights"));
        }
        if let Some(dim) = self.dim() {
            if point.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: point.dim() });
            }
        }
        self.points.push(point);
        self.weights.push(weight);
        Ok(())
    }

    /// Appends every entry of `other`.
    pub fn extend_from(&mut self, other: &WeightedPointSet) -> Result<()> {
        if let (Some(a), Some(b)) = (self.dim(), other.dim()) {
            if a != b {
                return Err(Error::DimensionMismatch { expected: a, got: b });
            }
        }
        self.points.extend_from_slice(&other.points);
        self.weights.extend_from_slice(&other.weights);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Dimension of the points, `None` for an empty set.
    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(Point::dim)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> + '_ {
        self.points.iter().zip(self.weights.iter().copied())
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn has_negative_weight(&self) -> bool {
        self.weights.iter().any(|&w| w < 0.0)
    }

    /// Entries with strictly positive weight, in order.
    pub fn positive_part(&self) -> WeightedPointSet {
        let (points, weights) = self
            .iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(p, w)| (p.clone(), w))
            .unzip();
        WeightedPointSet { points, weights }
    }

    pub fn into_parts(self) -> (Vec<Point>, Vec<f64>) {
        (self.points, self.weights)
    }
}

/// A nonempty list of centers of uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Centers(Vec<Point>);

impl Centers {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::EmptyCenters);
        };
        let dim = first.dim();
        if let Some(bad) = points.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.dim() });
        }
        Ok(Centers(points))
    }

    pub fn dim(&self) -> usize {
        self.0[0].dim()
    }

    pub fn as_slice(&self) -> &[Point] {
        &self.0
    }

    pub fn into_points(self) -> Vec<Point> {
        self.0
    }

    pub(crate) fn points_mut(&mut self) -> &mut [Point] {
        &mut self.0
    }
}

impl Deref for Centers {
    type Target = [Point];

    fn deref(&self) -> &[Point] {
        &self.0
    }
}

#[inline]
pub(crate) fn sq_dist(p: &[f64], q: &[f64]) -> f64 {
    debug_assert_eq!(p.len(), q.len());
    p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Index of the closest center and the squared distance to it, lowest index
/// on ties. `centers` must be nonempty and dimensions must agree.
#[inline]
pub(crate) fn nearest_sq(p: &[f64], centers: &[Point]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centers.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Euclidean distance.
pub fn distance(p: &[f64], q: &[f64]) -> Result<f64> {
    check_dim(p.len(), q.len())?;
    Ok(libm::sqrt(sq_dist(p, q)))
}

/// Closest center to `p` as `(index, distance)`; ties go to the lowest index.
pub fn closest_center(p: &[f64], centers: &[Point]) -> Result<(usize, f64)> {
    let first = centers.first().ok_or(Error::EmptyCenters)?;
    check_dim(first.dim(), p.len())?;
    let (i, sq) = nearest_sq(p, centers);
    Ok((i, libm::sqrt(sq)))
}

/// Weighted clustering cost `sum_p w(p) * d(p, X)^e`.
pub fn cost(set: &WeightedPointSet, centers: &[Point], obj: Objective) -> Result<f64> {
    let first = centers.first().ok_or(Error::EmptyCenters)?;
    if let Some(dim) = set.dim() {
        check_dim(first.dim(), dim)?;
    }
    Ok(cost_unchecked(set, centers, obj))
}

pub(crate) fn cost_unchecked(set: &WeightedPointSet, centers: &[Point], obj: Objective) -> f64 {
    set.iter()
        .map(|(p, w)| w * obj.cost_from_sq(nearest_sq(p, centers).1))
        .sum()
}
