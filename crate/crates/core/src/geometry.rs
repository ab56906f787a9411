//! Planar intervals with finitely many minimal and maximal points.
//!
//! An interval is stored as the antichain of its minimal points (the lower
//! staircase) and the antichain of its maximal points (the upper staircase).
//! Its region is the set of points lying above some minimal point and below
//! some maximal point in the product order. All regions are closed.
//!
//! Intervals with at most two minimal points and one maximal point also have
//! a six-coordinate embedding `(x, y, a, b, c, d)`: the corner `(x, y)`
//! shared by the two lower steps, the height `a` and width `d` to the maximal
//! point, and the step lengths `b` (left) and `c` (down) of the lower
//! staircase. See [`IntervalVec6`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Product order: `self <= other` in both coordinates.
    pub fn leq(&self, other: &Point2) -> bool {
        self.x <= other.x && self.y <= other.y
    }

    fn shifted(&self, by: f64) -> Point2 {
        Point2::new(self.x + by, self.y + by)
    }

    fn join(&self, other: &Point2) -> Point2 {
        Point2::new(self.x.max(other.x), self.y.max(other.y))
    }

    fn meet(&self, other: &Point2) -> Point2 {
        Point2::new(self.x.min(other.x), self.y.min(other.y))
    }
}

impl From<[f64; 2]> for Point2 {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2::new(x, y)
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

/// A `(p, q)`-interval of the plane: `p` minimal points, `q` maximal points.
///
/// Both lists are antichains sorted by strictly increasing `x` (hence strictly
/// decreasing `y`).
#[derive(Clone, Debug, PartialEq)]
pub struct PQInterval {
    mins: Vec<Point2>,
    maxs: Vec<Point2>,
}

impl PQInterval {
    /// Builds an interval from its minimal and maximal points, in any order.
    ///
    /// Rejects empty lists, non-finite coordinates, comparable or repeated
    /// points within a list, minimal points below no maximal point (and vice
    /// versa), and disconnected regions.
    pub fn new(mins: Vec<Point2>, maxs: Vec<Point2>) -> Result<Self> {
        let mins = sorted_antichain(mins, "minimal")?;
        let maxs = sorted_antichain(maxs, "maximal")?;
        for m in &mins {
            if !maxs.iter().any(|big| m.leq(big)) {
                return Err(Error::InvalidInterval(format!(
                    "minimal point ({}, {}) lies below no maximal point",
                    m.x, m.y
                )));
            }
        }
        for big in &maxs {
            if !mins.iter().any(|m| m.leq(big)) {
                return Err(Error::InvalidInterval(format!(
                    "maximal point ({}, {}) lies above no minimal point",
                    big.x, big.y
                )));
            }
        }
        let interval = PQInterval { mins, maxs };
        if !interval.is_connected() {
            return Err(Error::InvalidInterval("region is not connected".into()));
        }
        Ok(interval)
    }

    /// Like [`PQInterval::new`], but first discards points that are not
    /// minimal (resp. maximal) within their own list, including duplicates.
    pub fn from_extremal_candidates(mins: Vec<Point2>, maxs: Vec<Point2>) -> Result<Self> {
        PQInterval::new(keep_minimal(mins), keep_maximal(maxs))
    }

    /// The closed rectangle `[lo, hi]`.
    pub fn rect(lo: Point2, hi: Point2) -> Result<Self> {
        PQInterval::new(vec![lo], vec![hi])
    }

    pub fn mins(&self) -> &[Point2] {
        &self.mins
    }

    pub fn maxs(&self) -> &[Point2] {
        &self.maxs
    }

    /// `(p, q)`: the number of minimal and maximal points.
    pub fn shape(&self) -> (usize, usize) {
        (self.mins.len(), self.maxs.len())
    }

    pub fn contains_point(&self, p: &Point2) -> bool {
        self.mins.iter().any(|m| m.leq(p)) && self.maxs.iter().any(|big| p.leq(big))
    }

    /// Whether `other` is a subset of `self`.
    pub fn contains(&self, other: &PQInterval) -> bool {
        other
            .mins
            .iter()
            .all(|q| self.mins.iter().any(|m| m.leq(q)))
            && other
                .maxs
                .iter()
                .all(|q| self.maxs.iter().any(|big| q.leq(big)))
    }

    /// The union of closed sup-norm balls of radius `eps` around the region:
    /// minimal points move by `-eps`, maximal points by `+eps`.
    pub fn thicken(&self, eps: f64) -> Result<PQInterval> {
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::InvalidRadius(eps));
        }
        Ok(PQInterval {
            mins: self.mins.iter().map(|m| m.shifted(-eps)).collect(),
            maxs: self.maxs.iter().map(|m| m.shifted(eps)).collect(),
        })
    }

    /// Rigid translation by `(dx, dy)`.
    pub fn translate(&self, dx: f64, dy: f64) -> PQInterval {
        let mv = |p: &Point2| Point2::new(p.x + dx, p.y + dy);
        PQInterval {
            mins: self.mins.iter().map(mv).collect(),
            maxs: self.maxs.iter().map(mv).collect(),
        }
    }

    /// Lower-left and upper-right corners of the bounding box.
    pub fn bounding_box(&self) -> (Point2, Point2) {
        let lo = self
            .mins
            .iter()
            .skip(1)
            .fold(self.mins[0], |acc, p| acc.meet(p));
        let hi = self
            .maxs
            .iter()
            .skip(1)
            .fold(self.maxs[0], |acc, p| acc.join(p));
        (lo, hi)
    }

    // The region is the union of the rectangles [m, M] over comparable pairs
    // m <= M; it is connected iff the intersection graph of those rectangles is.
    fn is_connected(&self) -> bool {
        let rects: Vec<(Point2, Point2)> = self
            .mins
            .iter()
            .flat_map(|m| {
                self.maxs
                    .iter()
                    .filter(|big| m.leq(big))
                    .map(move |big| (*m, *big))
            })
            .collect();
        let mut parent: Vec<usize> = (0..rects.len()).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for i in 0..rects.len() {
            for j in (i + 1)..rects.len() {
                let lo = rects[i].0.join(&rects[j].0);
                let hi = rects[i].1.meet(&rects[j].1);
                if lo.leq(&hi) {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
        let root = find(&mut parent, 0);
        (0..rects.len()).all(|i| find(&mut parent, i) == root)
    }
}

fn sorted_antichain(mut points: Vec<Point2>, which: &str) -> Result<Vec<Point2>> {
    if points.is_empty() {
        return Err(Error::InvalidInterval(format!("no {which} points")));
    }
    if let Some(p) = points.iter().find(|p| !p.is_finite()) {
        return Err(Error::InvalidInterval(format!(
            "non-finite {which} point ({}, {})",
            p.x, p.y
        )));
    }
    points.sort_by(|a, b| a.x.total_cmp(&b.x));
    for w in points.windows(2) {
        if !(w[0].x < w[1].x && w[0].y > w[1].y) {
            return Err(Error::InvalidInterval(format!(
                "{which} points ({}, {}) and ({}, {}) are comparable",
                w[0].x, w[0].y, w[1].x, w[1].y
            )));
        }
    }
    Ok(points)
}

fn keep_minimal(points: Vec<Point2>) -> Vec<Point2> {
    let mut kept: Vec<Point2> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        // drop p if another point lies below it; among equal points keep the first
        let dominated = points
            .iter()
            .enumerate()
            .any(|(j, q)| j != i && q.leq(p) && (q != p || j < i));
        if !dominated {
            kept.push(*p);
        }
    }
    kept
}

fn keep_maximal(points: Vec<Point2>) -> Vec<Point2> {
    let mut kept: Vec<Point2> = Vec::with_capacity(points.len());
    for (i, p) in points.iter().enumerate() {
        let dominated = points
            .iter()
            .enumerate()
            .any(|(j, q)| j != i && p.leq(q) && (q != p || j < i));
        if !dominated {
            kept.push(*p);
        }
    }
    kept
}

/// The six-coordinate embedding of a `(1,1)`- or `(2,1)`-interval.
///
/// Decodes to minimal points `(x - b, y)` and `(x, y - c)` and maximal point
/// `(x + d, y + a)`. With `b = c = 0` the two minimal points coincide and the
/// interval is a rectangle. When exactly one of `b`, `c` is zero one minimal
/// point dominates the other; decoding keeps only the lower one, so the
/// result is again a rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntervalVec6 {
    pub x: f64,
    pub y: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl IntervalVec6 {
    pub fn new(x: f64, y: f64, a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        IntervalVec6::from_array([x, y, a, b, c, d])
    }

    pub fn from_array(v: [f64; 6]) -> Result<Self> {
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidEmbedding(format!(
                "non-finite coordinate in {v:?}"
            )));
        }
        if v[2..].iter().any(|&c| c < 0.0) {
            return Err(Error::InvalidEmbedding(format!(
                "negative side length in {v:?} (a, b, c, d must be >= 0)"
            )));
        }
        Ok(IntervalVec6 {
            x: v[0],
            y: v[1],
            a: v[2],
            b: v[3],
            c: v[4],
            d: v[5],
        })
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.x, self.y, self.a, self.b, self.c, self.d]
    }

    /// True for a rectangle (`b = c = 0`) or a proper `(2,1)`-interval
    /// (`b > 0` and `c > 0`).
    pub fn is_canonical(&self) -> bool {
        (self.b == 0.0) == (self.c == 0.0)
    }

    pub fn decode(&self) -> Result<PQInterval> {
        // re-check: the fields are public
        let v = IntervalVec6::from_array(self.to_array())?;
        let mins = vec![Point2::new(v.x - v.b, v.y), Point2::new(v.x, v.y - v.c)];
        let maxs = vec![Point2::new(v.x + v.d, v.y + v.a)];
        PQInterval::from_extremal_candidates(mins, maxs)
    }

    /// Embeds a `(1,1)`- or `(2,1)`-interval.
    pub fn encode(interval: &PQInterval) -> Result<IntervalVec6> {
        let top = match interval.maxs() {
            [top] => *top,
            _ => return Err(unsupported(interval)),
        };
        match interval.mins() {
            [m] => IntervalVec6::new(m.x, m.y, top.y - m.y, 0.0, 0.0, top.x - m.x),
            [left, right] => IntervalVec6::new(
                right.x,
                left.y,
                top.y - left.y,
                right.x - left.x,
                left.y - right.y,
                top.x - right.x,
            ),
            _ => Err(unsupported(interval)),
        }
    }

    /// Thickening expressed in embedding coordinates.
    pub fn thicken(&self, eps: f64) -> Result<IntervalVec6> {
        if !eps.is_finite() || eps < 0.0 {
            return Err(Error::InvalidRadius(eps));
        }
        IntervalVec6::new(
            self.x - eps,
            self.y - eps,
            self.a + 2.0 * eps,
            self.b,
            self.c,
            self.d + 2.0 * eps,
        )
    }
}

fn unsupported(interval: &PQInterval) -> Error {
    let (mins, maxs) = interval.shape();
    Error::UnsupportedShape { mins, maxs }
}

/// The intervals of a domain: either all embeddable in six coordinates or
/// general `(p, q)`-intervals.
#[derive(Clone, Debug, PartialEq)]
pub enum DomainIntervals {
    Vec6(Vec<IntervalVec6>),
    General(Vec<PQInterval>),
}

/// An ordered, nonempty, finite set of intervals. Order fixes the row and
/// column indices of epsilon matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct Domain {
    pub name: String,
    intervals: DomainIntervals,
}

impl Domain {
    pub fn from_vec6(name: impl Into<String>, intervals: Vec<IntervalVec6>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::EmptyDomain);
        }
        for v in &intervals {
            IntervalVec6::from_array(v.to_array())?;
        }
        Ok(Domain {
            name: name.into(),
            intervals: DomainIntervals::Vec6(intervals),
        })
    }

    pub fn from_intervals(name: impl Into<String>, intervals: Vec<PQInterval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::EmptyDomain);
        }
        Ok(Domain {
            name: name.into(),
            intervals: DomainIntervals::General(intervals),
        })
    }

    pub fn len(&self) -> usize {
        match &self.intervals {
            DomainIntervals::Vec6(v) => v.len(),
            DomainIntervals::General(v) => v.len(),
        }
    }

    /// Always false: domains are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &DomainIntervals {
        &self.intervals
    }

    pub fn vec6(&self) -> Option<&[IntervalVec6]> {
        match &self.intervals {
            DomainIntervals::Vec6(v) => Some(v),
            DomainIntervals::General(_) => None,
        }
    }

    /// The intervals as `(p, q)`-intervals, decoding embedded ones.
    pub fn intervals(&self) -> Result<Vec<PQInterval>> {
        match &self.intervals {
            DomainIntervals::Vec6(v) => v.iter().map(IntervalVec6::decode).collect(),
            DomainIntervals::General(v) => Ok(v.clone()),
        }
    }

    /// The same domain with every interval embedded in six coordinates.
    pub fn to_vec6_domain(&self) -> Result<Domain> {
        match &self.intervals {
            DomainIntervals::Vec6(_) => Ok(self.clone()),
            DomainIntervals::General(v) => Domain::from_vec6(
                self.name.clone(),
                v.iter().map(IntervalVec6::encode).collect::<Result<_>>()?,
            ),
        }
    }

    pub fn to_vector(&self) -> Result<DomainVector> {
        let d = self.to_vec6_domain()?;
        let coords = d
            .vec6()
            .into_iter()
            .flatten()
            .flat_map(|v| v.to_array())
            .collect();
        Ok(DomainVector { coords })
    }
}

/// The concatenated embedding of a domain, six coordinates per interval.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainVector {
    coords: Vec<f64>,
}

impl DomainVector {
    pub fn from_coords(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() % 6 != 0 {
            return Err(Error::InvalidEmbedding(format!(
                "domain vector length {} is not a positive multiple of 6",
                coords.len()
            )));
        }
        for chunk in coords.chunks_exact(6) {
            IntervalVec6::from_array(chunk.try_into().expect("chunk of 6"))?;
        }
        Ok(DomainVector { coords })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn num_intervals(&self) -> usize {
        self.coords.len() / 6
    }

    pub fn slot(&self, k: usize) -> IntervalVec6 {
        let c = &self.coords[6 * k..6 * k + 6];
        IntervalVec6 {
            x: c[0],
            y: c[1],
            a: c[2],
            b: c[3],
            c: c[4],
            d: c[5],
        }
    }

    pub fn to_domain(&self, name: impl Into<String>) -> Domain {
        let intervals = (0..self.num_intervals()).map(|k| self.slot(k)).collect();
        Domain {
            name: name.into(),
            intervals: DomainIntervals::Vec6(intervals),
        }
    }
}

/// A closed coordinate range sampled at evenly spaced values.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRange {
    pub lo: f64,
    pub hi: f64,
}

impl SampleRange {
    pub const fn new(lo: f64, hi: f64) -> Self {
        SampleRange { lo, hi }
    }

    /// `count` evenly spaced values from `lo` to `hi` inclusive; a single
    /// sample is `lo`.
    pub fn samples(&self, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(Error::DegenerateGrid("sample count must be >= 1".into()));
        }
        if !self.lo.is_finite() || !self.hi.is_finite() || self.lo > self.hi {
            return Err(Error::DegenerateGrid(format!(
                "bad range [{}, {}]",
                self.lo, self.hi
            )));
        }
        if count > 1 && self.lo == self.hi {
            return Err(Error::DegenerateGrid(format!(
                "empty range [{}, {}] sampled {count} times",
                self.lo, self.hi
            )));
        }
        if count == 1 {
            return Ok(vec![self.lo]);
        }
        let step = (self.hi - self.lo) / (count - 1) as f64;
        Ok((0..count)
            .map(|i| {
                if i + 1 == count {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect())
    }
}

/// Parameters of a grid domain in embedding coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub x: SampleRange,
    pub y: SampleRange,
    /// Ranges for `a`, `b`, `c`, `d` in that order.
    pub sides: [SampleRange; 4],
    pub n_xy: usize,
    pub n_sides: usize,
}

impl GridSpec {
    /// Unit-square corners with all four side lengths drawn from `sides`.
    pub fn unit(n_xy: usize, n_sides: usize, sides: SampleRange) -> Self {
        GridSpec {
            x: SampleRange::new(0.0, 1.0),
            y: SampleRange::new(0.0, 1.0),
            sides: [sides; 4],
            n_xy,
            n_sides,
        }
    }
}

/// Cartesian product of evenly sampled coordinates, in lexicographic order
/// of `(x, y, a, b, c, d)`. Size is `n_xy^2 * n_sides^4`.
pub fn grid_domain(spec: &GridSpec) -> Result<Domain> {
    if spec.sides.iter().any(|r| r.lo < 0.0) {
        return Err(Error::DegenerateGrid(
            "side ranges must be nonnegative".into(),
        ));
    }
    let xs = spec.x.samples(spec.n_xy)?;
    let ys = spec.y.samples(spec.n_xy)?;
    let sides = spec
        .sides
        .iter()
        .map(|r| r.samples(spec.n_sides))
        .collect::<Result<Vec<_>>>()?;
    let mut out =
        Vec::with_capacity(xs.len() * ys.len() * sides.iter().map(Vec::len).product::<usize>());
    for &x in &xs {
        for &y in &ys {
            for &a in &sides[0] {
                for &b in &sides[1] {
                    for &c in &sides[2] {
                        for &d in &sides[3] {
                            out.push(IntervalVec6::new(x, y, a, b, c, d)?);
                        }
                    }
                }
            }
        }
    }
    Domain::from_vec6(format!("grid-{}x{}", spec.n_xy, spec.n_sides), out)
}
