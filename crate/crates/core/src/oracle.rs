//! Brute-force reference computations.
//!
//! Nothing here calls the closed-form distance code. Interval membership is
//! tested point by point against the minimal/maximal lists, distances are
//! measured on a lattice with a chessboard distance transform, and the
//! inversion of the rank table is a dense integer solve.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::erosion::{dhat, eps_pq};
use crate::error::{Error, Result};
use crate::geometry::{Domain, PQInterval, Point2};
use crate::gpd::{gri, mobius_inversion, Gpd, GriTable};
use crate::random::{random_barcode, random_pq, random_pq_domain, random_vec6_domain};

fn in_region(iv: &PQInterval, p: &Point2) -> bool {
    iv.mins().iter().any(|m| m.x <= p.x && m.y <= p.y)
        && iv.maxs().iter().any(|big| p.x <= big.x && p.y <= big.y)
}

/// `inner ⊆ outer`. Intervals are order-convex, so it suffices that every
/// extremal point of `inner` lies in `outer`.
fn region_contains(outer: &PQInterval, inner: &PQInterval) -> bool {
    inner
        .mins()
        .iter()
        .chain(inner.maxs())
        .all(|p| in_region(outer, p))
}

/// Lattice points `origin + (i h, j h)` inside an interval.
#[derive(Clone, Debug)]
pub struct RasterRegion {
    pub origin: Point2,
    pub h: f64,
    pub nx: usize,
    pub ny: usize,
    bits: Vec<bool>,
}

impl RasterRegion {
    pub fn rasterize(iv: &PQInterval, origin: Point2, h: f64, nx: usize, ny: usize) -> Self {
        let mut bits = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let p = Point2::new(origin.x + i as f64 * h, origin.y + j as f64 * h);
                bits[j * nx + i] = in_region(iv, &p);
            }
        }
        RasterRegion {
            origin,
            h,
            nx,
            ny,
            bits,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[j * self.nx + i]
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    /// Chessboard distance, in cells, from every lattice point to the set.
    /// Two raster passes with unit 8-neighbour steps are exact for this
    /// metric.
    fn distance_transform(&self) -> Vec<u32> {
        let (nx, ny) = (self.nx, self.ny);
        let inf = u32::MAX / 2;
        let mut d: Vec<u32> = self.bits.iter().map(|&b| if b { 0 } else { inf }).collect();
        for j in 0..ny {
            for i in 0..nx {
                let mut best = d[j * nx + i];
                if i > 0 {
                    best = best.min(d[j * nx + i - 1] + 1);
                }
                if j > 0 {
                    let up = (j - 1) * nx;
                    best = best.min(d[up + i] + 1);
                    if i > 0 {
                        best = best.min(d[up + i - 1] + 1);
                    }
                    if i + 1 < nx {
                        best = best.min(d[up + i + 1] + 1);
                    }
                }
                d[j * nx + i] = best;
            }
        }
        for j in (0..ny).rev() {
            for i in (0..nx).rev() {
                let mut best = d[j * nx + i];
                if i + 1 < nx {
                    best = best.min(d[j * nx + i + 1] + 1);
                }
                if j + 1 < ny {
                    let down = (j + 1) * nx;
                    best = best.min(d[down + i] + 1);
                    if i > 0 {
                        best = best.min(d[down + i - 1] + 1);
                    }
                    if i + 1 < nx {
                        best = best.min(d[down + i + 1] + 1);
                    }
                }
                d[j * nx + i] = best;
            }
        }
        d
    }
}

/// A raster together with its distance transform.
struct Rastered {
    region: RasterRegion,
    dist: Vec<u32>,
}

impl Rastered {
    fn new(iv: &PQInterval, lattice: &Lattice) -> Self {
        let region = RasterRegion::rasterize(iv, lattice.origin, lattice.h, lattice.nx, lattice.ny);
        let dist = region.distance_transform();
        Rastered { region, dist }
    }

    /// Largest distance (in cells) from a point of `other` to `self`.
    fn directed_from(&self, other: &Rastered) -> f64 {
        if self.region.count() == 0 || other.region.count() == 0 {
            return f64::INFINITY;
        }
        other
            .region
            .bits
            .iter()
            .zip(&self.dist)
            .filter(|(b, _)| **b)
            .map(|(_, &d)| d)
            .max()
            .unwrap_or(0) as f64
    }
}

struct Lattice {
    origin: Point2,
    h: f64,
    nx: usize,
    ny: usize,
}

impl Lattice {
    fn covering<'a>(intervals: impl IntoIterator<Item = &'a PQInterval>, h: f64) -> Lattice {
        let (lo, hi) = joint_box(intervals);
        Lattice {
            origin: lo,
            h,
            nx: ((hi.x - lo.x) / h).ceil() as usize + 1,
            ny: ((hi.y - lo.y) / h).ceil() as usize + 1,
        }
    }
}

fn joint_box<'a>(intervals: impl IntoIterator<Item = &'a PQInterval>) -> (Point2, Point2) {
    let mut lo = Point2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for iv in intervals {
        for p in iv.mins() {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
        }
        for p in iv.maxs() {
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    (lo, hi)
}

/// Diagonal length of the joint bounding box.
pub fn joint_diagonal<'a>(intervals: impl IntoIterator<Item = &'a PQInterval>) -> f64 {
    let (lo, hi) = joint_box(intervals);
    (hi.x - lo.x).hypot(hi.y - lo.y)
}

/// Resolution at which every interval spans at least 64 cells per axis.
pub fn default_resolution<'a>(intervals: impl IntoIterator<Item = &'a PQInterval>) -> f64 {
    intervals
        .into_iter()
        .map(|iv| {
            let (lo, hi) = joint_box([iv]);
            (hi.x - lo.x).min(hi.y - lo.y)
        })
        .fold(f64::INFINITY, f64::min)
        / 64.0
}

/// Smallest lattice radius at which each raster lies in the dilation of the
/// other. Agrees with the exact value to within `2h` when every rectangle of
/// both intervals is at least `h` wide and tall.
pub fn raster_eps_pair(i: &PQInterval, j: &PQInterval, h: f64) -> f64 {
    let lattice = Lattice::covering([i, j], h);
    let (ri, rj) = (Rastered::new(i, &lattice), Rastered::new(j, &lattice));
    h * ri.directed_from(&rj).max(rj.directed_from(&ri))
}

/// Max of row minima and column minima of the rasterized distance matrix.
pub fn brute_dhat(a: &Domain, b: &Domain, h: f64) -> Result<f64> {
    let ia = a.intervals()?;
    let ib = b.intervals()?;
    if ia.is_empty() || ib.is_empty() {
        return Err(Error::EmptyDomain);
    }
    let lattice = Lattice::covering(ia.iter().chain(&ib), h);
    let ra: Vec<Rastered> = ia
        .par_iter()
        .map(|iv| Rastered::new(iv, &lattice))
        .collect();
    let rb: Vec<Rastered> = ib
        .par_iter()
        .map(|iv| Rastered::new(iv, &lattice))
        .collect();
    let m: Vec<Vec<f64>> = ra
        .par_iter()
        .map(|r| {
            rb.iter()
                .map(|s| h * r.directed_from(s).max(s.directed_from(r)))
                .collect()
        })
        .collect();
    let rows = m
        .iter()
        .map(|row| row.iter().copied().fold(f64::INFINITY, f64::min));
    let cols = (0..rb.len()).map(|s| m.iter().map(|row| row[s]).fold(f64::INFINITY, f64::min));
    Ok(rows.chain(cols).fold(f64::NEG_INFINITY, f64::max))
}

/// Solves `rk(I) = sum of dgm(J) over J ⊇ I` as a dense 0/1 system over the
/// integers, after merging repeated intervals.
///
/// Elimination repeatedly takes an equation with exactly one unknown left;
/// its coefficient is 1, so the solve stays in the integers.
pub fn brute_mobius(rk: &GriTable) -> Result<Gpd> {
    let domain = rk.domain();
    let intervals = domain.intervals()?;
    let same = |p: &PQInterval, q: &PQInterval| region_contains(p, q) && region_contains(q, p);
    let mut kept: Vec<usize> = Vec::new();
    for (i, iv) in intervals.iter().enumerate() {
        match kept.iter().find(|&&k| same(&intervals[k], iv)) {
            Some(&k) if rk.values()[k] != rk.values()[i] => {
                return Err(Error::InvalidConfig(format!(
                    "duplicate intervals {k} and {i} carry different ranks"
                )))
            }
            Some(_) => {}
            None => kept.push(i),
        }
    }
    let n = kept.len();
    let coeff: Vec<Vec<i64>> = kept
        .iter()
        .map(|&r| {
            kept.iter()
                .map(|&c| i64::from(region_contains(&intervals[c], &intervals[r])))
                .collect()
        })
        .collect();
    let rhs: Vec<i64> = kept.iter().map(|&k| rk.values()[k] as i64).collect();

    let mut solved: Vec<Option<i64>> = vec![None; n];
    let mut remaining = n;
    while remaining > 0 {
        let mut progress = false;
        for row in 0..n {
            let open: Vec<usize> = (0..n)
                .filter(|&c| coeff[row][c] != 0 && solved[c].is_none())
                .collect();
            if open.len() != 1 {
                continue;
            }
            let col = open[0];
            if coeff[row][col] != 1 {
                return Err(Error::SingularSystem);
            }
            let known: i64 = (0..n)
                .filter_map(|c| solved[c].map(|v| coeff[row][c] * v))
                .sum();
            solved[col] = Some(rhs[row] - known);
            remaining -= 1;
            progress = true;
        }
        if !progress {
            return Err(Error::SingularSystem);
        }
    }
    let deduped = match domain.vec6() {
        Some(v) => Domain::from_vec6(domain.name.clone(), kept.iter().map(|&k| v[k]).collect())?,
        None => Domain::from_intervals(
            domain.name.clone(),
            kept.iter().map(|&k| intervals[k].clone()).collect(),
        )?,
    };
    let values = solved.into_iter().map(|v| v.expect("all solved")).collect();
    Ok(Gpd::from_parts(deduped, values, intervals.len() - n))
}

/// `(|dhat(k, j1) - dhat(k, j2)|, 2 * min over matchings of the sup-norm gap)`
/// for two domains of equal size; the first should never exceed the second.
pub fn brute_lipschitz(k: &Domain, j1: &Domain, j2: &Domain) -> Result<(f64, f64)> {
    if j1.len() != j2.len() {
        return Err(Error::SizeMismatch {
            expected: j1.len(),
            got: j2.len(),
        });
    }
    let lhs = (dhat(k, j1)? - dhat(k, j2)?).abs();
    let v1 = j1.to_vector()?;
    let v2 = j2.to_vector()?;
    let (c1, c2) = (v1.coords(), v2.coords());
    let gap = |a: usize, b: usize| {
        (0..6).fold(0.0f64, |acc, t| {
            acc.max((c1[6 * a + t] - c2[6 * b + t]).abs())
        })
    };
    let n = j1.len();
    let best = (0..n)
        .permutations(n)
        .map(|perm| {
            perm.iter()
                .enumerate()
                .fold(0.0f64, |acc, (a, &b)| acc.max(gap(a, b)))
        })
        .fold(f64::INFINITY, f64::min);
    Ok((lhs, 2.0 * best))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    Eps,
    Dhat,
    Mobius,
    Lipschitz,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eps" => Ok(Suite::Eps),
            "dhat" => Ok(Suite::Dhat),
            "mobius" => Ok(Suite::Mobius),
            "lipschitz" => Ok(Suite::Lipschitz),
            other => Err(Error::InvalidConfig(format!(
                "unknown oracle suite {other:?}"
            ))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Eps => "eps",
            Suite::Dhat => "dhat",
            Suite::Mobius => "mobius",
            Suite::Lipschitz => "lipschitz",
        })
    }
}

/// One comparison between the fast path and its oracle.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRecord {
    pub case: usize,
    pub computed: f64,
    pub oracle: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    rng
}

fn check_case(suite: Suite, case: usize, seed: u64) -> Result<CheckRecord> {
    use rand::Rng;
    let mut rng = case_rng(seed, case);
    let record = |computed: f64, oracle: f64, tolerance: f64, pass: bool| CheckRecord {
        case,
        computed,
        oracle,
        tolerance,
        pass,
    };
    Ok(match suite {
        Suite::Eps => {
            let (i, j) = (random_pq(&mut rng, true), random_pq(&mut rng, true));
            let h = default_resolution([&i, &j]);
            let (c, o) = (eps_pq(&i, &j), raster_eps_pair(&i, &j, h));
            record(c, o, 2.0 * h, (c - o).abs() <= 2.0 * h)
        }
        Suite::Dhat => {
            let len = rng.gen_range(1..=4);
            let a = random_vec6_domain(&mut rng, len, true);
            let len = rng.gen_range(1..=4);
            let b = random_vec6_domain(&mut rng, len, true);
            let (ia, ib) = (a.intervals()?, b.intervals()?);
            let h = joint_diagonal(ia.iter().chain(&ib)) / 256.0;
            let (c, o) = (dhat(&a, &b)?, brute_dhat(&a, &b, h)?);
            record(c, o, 2.0 * h, (c - o).abs() <= 2.0 * h)
        }
        Suite::Mobius => {
            let module = random_barcode(&mut rng, 6);
            let len = rng.gen_range(1..=30);
            let domain = random_pq_domain(&mut rng, len, false);
            let rk = gri(&module, &domain)?;
            let (fast, slow) = (mobius_inversion(&rk)?, brute_mobius(&rk)?);
            let l1 = |g: &Gpd| g.values().iter().map(|v| v.unsigned_abs()).sum::<u64>() as f64;
            record(l1(&fast), l1(&slow), 0.0, fast == slow)
        }
        Suite::Lipschitz => {
            let len = rng.gen_range(1..=4);
            let k = random_vec6_domain(&mut rng, len, false);
            let n = rng.gen_range(1..=5);
            let j1 = random_vec6_domain(&mut rng, n, false);
            let j2 = random_vec6_domain(&mut rng, n, false);
            let (lhs, rhs) = brute_lipschitz(&k, &j1, &j2)?;
            record(lhs, rhs, 1e-12, lhs <= rhs + 1e-12)
        }
    })
}

/// Runs `cases` randomized comparisons; case `k` draws from stream `k` of
/// the seed, so results do not depend on thread count.
pub fn run_suite(suite: Suite, cases: usize, seed: u64) -> Result<Vec<CheckRecord>> {
    (0..cases)
        .into_par_iter()
        .map(|c| check_case(suite, c, seed))
        .collect()
}
