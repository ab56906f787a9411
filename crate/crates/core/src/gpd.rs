//! Generalized persistence diagrams of interval-decomposable modules.
//!
//! A module is given by its barcode. Its rank over a connected interval `I`
//! is the number of bars (with multiplicity) containing `I`. The diagram over
//! a finite domain is the Möbius inversion of that rank function along
//! containment: `rk(I) = sum of dgm(J) over domain intervals J ⊇ I`.
//!
//! The sparse erosion distance compares two (module, domain) pairs. Along a
//! thickening ray `t -> I^t` the rank is a step function whose breakpoints
//! are the largest radii at which `I^t` still fits inside each bar. Every
//! condition in the definition reduces to counting breakpoints, so the
//! infimum is found exactly among finitely many candidate values.

use rayon::prelude::*;

use crate::erosion::{epsilon_matrix, EpsilonMatrix};
use crate::error::{Error, Result};
use crate::geometry::{Domain, IntervalVec6, PQInterval};

#[derive(Clone, Debug, PartialEq)]
pub struct Bar {
    pub interval: PQInterval,
    pub mult: u64,
}

/// Multiset of intervals of an interval-decomposable module.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Barcode {
    bars: Vec<Bar>,
}

impl Barcode {
    pub fn new(bars: Vec<Bar>) -> Result<Self> {
        if bars.iter().any(|b| b.mult == 0) {
            return Err(Error::InvalidInterval(
                "bar multiplicity must be >= 1".into(),
            ));
        }
        Ok(Barcode { bars })
    }

    /// The zero module.
    pub fn empty() -> Self {
        Barcode { bars: Vec::new() }
    }

    /// A single interval module with the given multiplicity.
    pub fn single(interval: PQInterval, mult: u64) -> Result<Self> {
        Barcode::new(vec![Bar { interval, mult }])
    }

    pub fn bars(&self) -> &[Bar] {
        &self.bars
    }

    /// Every bar translated by `(s, s)`.
    pub fn shifted(&self, s: f64) -> Barcode {
        Barcode {
            bars: self
                .bars
                .iter()
                .map(|b| Bar {
                    interval: b.interval.translate(s, s),
                    mult: b.mult,
                })
                .collect(),
        }
    }
}

/// Sum of multiplicities of bars containing `interval`.
pub fn rank_over(module: &Barcode, interval: &PQInterval) -> u64 {
    module
        .bars
        .iter()
        .filter(|b| b.interval.contains(interval))
        .map(|b| b.mult)
        .sum()
}

/// Rank invariant of a module restricted to a finite domain.
#[derive(Clone, Debug, PartialEq)]
pub struct GriTable {
    domain: Domain,
    values: Vec<u64>,
}

impl GriTable {
    pub fn new(domain: Domain, values: Vec<u64>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::SizeMismatch {
                expected: domain.len(),
                got: values.len(),
            });
        }
        Ok(GriTable { domain, values })
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Whether `I ⊇ J` implies `rk(I) <= rk(J)` across the domain.
    pub fn is_monotone(&self) -> Result<bool> {
        let iv = self.domain.intervals()?;
        for (i, big) in iv.iter().enumerate() {
            for (j, small) in iv.iter().enumerate() {
                if big.contains(small) && self.values[i] > self.values[j] {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

pub fn gri(module: &Barcode, domain: &Domain) -> Result<GriTable> {
    let values = domain
        .intervals()?
        .par_iter()
        .map(|i| rank_over(module, i))
        .collect();
    GriTable::new(domain.clone(), values)
}

/// Signed diagram over a domain with duplicate intervals merged.
#[derive(Clone, Debug, PartialEq)]
pub struct Gpd {
    domain: Domain,
    values: Vec<i64>,
    merged_duplicates: usize,
}

impl Gpd {
    pub(crate) fn from_parts(domain: Domain, values: Vec<i64>, merged_duplicates: usize) -> Self {
        Gpd {
            domain,
            values,
            merged_duplicates,
        }
    }

    /// The deduplicated domain the diagram lives on.
    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    /// Number of domain entries dropped because they repeated an earlier
    /// interval.
    pub fn merged_duplicates(&self) -> usize {
        self.merged_duplicates
    }
}

/// Removes repeated intervals, keeping the first occurrence. Returns the
/// kept domain, the kept original indices, and for every original index the
/// position of its representative.
pub(crate) fn dedup_domain(domain: &Domain) -> Result<(Domain, Vec<usize>, Vec<usize>)> {
    let intervals = domain.intervals()?;
    let mut kept: Vec<usize> = Vec::new();
    let mut rep = Vec::with_capacity(intervals.len());
    for (i, iv) in intervals.iter().enumerate() {
        match kept
            .iter()
            .position(|&k| intervals[k].contains(iv) && iv.contains(&intervals[k]))
        {
            Some(pos) => rep.push(pos),
            None => {
                rep.push(kept.len());
                kept.push(i);
            }
        }
    }
    let deduped = match domain.vec6() {
        Some(v) => Domain::from_vec6(domain.name.clone(), kept.iter().map(|&k| v[k]).collect())?,
        None => Domain::from_intervals(
            domain.name.clone(),
            kept.iter().map(|&k| intervals[k].clone()).collect(),
        )?,
    };
    Ok((deduped, kept, rep))
}

/// Möbius inversion of a rank table along containment.
///
/// Intervals are visited in order of their number of strict supersets, so
/// every strict superset is finalized before the intervals it contains.
pub fn mobius_inversion(rk: &GriTable) -> Result<Gpd> {
    let (domain, kept, rep) = dedup_domain(&rk.domain)?;
    for (orig, &r) in rep.iter().enumerate() {
        if rk.values[orig] != rk.values[kept[r]] {
            return Err(Error::InvalidConfig(format!(
                "duplicate intervals {} and {} carry different ranks",
                kept[r], orig
            )));
        }
    }
    let intervals = domain.intervals()?;
    let n = intervals.len();
    let rank: Vec<i64> = kept.iter().map(|&k| rk.values[k] as i64).collect();

    let supersets: Vec<Vec<usize>> = (0..n)
        .map(|j| {
            (0..n)
                .filter(|&k| k != j && intervals[k].contains(&intervals[j]))
                .collect()
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&j| supersets[j].len());

    let mut done = vec![false; n];
    let mut dgm = vec![0i64; n];
    for &j in &order {
        let mut value = rank[j];
        for &k in &supersets[j] {
            if !done[k] {
                return Err(Error::ContainmentCycle(k, j));
            }
            value -= dgm[k];
        }
        dgm[j] = value;
        done[j] = true;
    }
    Ok(Gpd {
        domain,
        values: dgm,
        merged_duplicates: rep.len() - n,
    })
}

/// Nonzero diagram entries as points of the six-coordinate embedding.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GpdPointCloud {
    pub points: Vec<(IntervalVec6, i64)>,
}

pub fn gpd_points(dgm: &Gpd) -> Result<GpdPointCloud> {
    let embedded = dgm.domain.to_vec6_domain()?;
    let v = embedded.vec6().expect("embedded domain");
    Ok(GpdPointCloud {
        points: v
            .iter()
            .zip(&dgm.values)
            .filter(|(_, &m)| m != 0)
            .map(|(p, &m)| (*p, m))
            .collect(),
    })
}

/// Largest `t >= 0` with `interval^t ⊆ bar`, or `-inf` when `interval` is not
/// inside `bar` at all.
pub fn max_thickening(interval: &PQInterval, bar: &PQInterval) -> f64 {
    let lower = interval
        .mins()
        .iter()
        .map(|q| {
            bar.mins()
                .iter()
                .map(|m| (q.x - m.x).min(q.y - m.y))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    let upper = interval
        .maxs()
        .iter()
        .map(|q| {
            bar.maxs()
                .iter()
                .map(|big| (big.x - q.x).min(big.y - q.y))
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .fold(f64::INFINITY, f64::min);
    let slack = lower.min(upper);
    if slack >= 0.0 {
        slack
    } else {
        f64::NEG_INFINITY
    }
}

/// Breakpoints of `t -> rk(interval^t)`: the rank is the total multiplicity
/// of entries with `t <= breakpoint`.
fn breakpoints(module: &Barcode, interval: &PQInterval) -> Vec<(f64, u64)> {
    module
        .bars
        .iter()
        .map(|b| (max_thickening(interval, &b.interval), b.mult))
        .filter(|(t, _)| t.is_finite())
        .collect()
}

fn weight(points: &[(f64, u64)], keep: impl Fn(f64) -> bool) -> u64 {
    points
        .iter()
        .filter(|(t, _)| keep(*t))
        .map(|(_, m)| m)
        .sum()
}

/// Whether `rk_up(X^(eps + d)) <= rk_low(Y^d)` for every `d >= 0` and every
/// `eps` slightly above `c`, where `up` and `low` are the breakpoints of the
/// two rays. Right-limits at each breakpoint of `low` are the binding cases.
fn dominated_after_shift(up: &[(f64, u64)], low: &[(f64, u64)], c: f64) -> bool {
    if weight(up, |u| u > c) > weight(low, |_| true) {
        return false;
    }
    low.iter()
        .all(|&(l, _)| weight(up, |u| u - l > c) <= weight(low, |t| t > l))
}

/// Smallest `c >= eps` such that the pair satisfies both rank conditions for
/// all radii above `c`. Feasibility is monotone in `c` and only changes at
/// breakpoints or breakpoint differences.
fn pair_threshold(eps: f64, left: &[(f64, u64)], right: &[(f64, u64)]) -> f64 {
    let mut candidates = vec![eps];
    let all = left.iter().chain(right);
    candidates.extend(all.map(|p| p.0));
    for (u, l) in right
        .iter()
        .flat_map(|u| left.iter().map(move |l| (u.0, l.0)))
    {
        candidates.push(u - l);
        candidates.push(l - u);
    }
    candidates.retain(|c| *c >= eps);
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    let feasible =
        |c: f64| dominated_after_shift(right, left, c) && dominated_after_shift(left, right, c);
    let first = candidates.partition_point(|&c| !feasible(c));
    candidates.get(first).copied().unwrap_or(f64::INFINITY)
}

/// Per-pair feasibility thresholds; the sparse erosion distance is the cover
/// value of this matrix.
pub fn sparse_erosion_matrix(
    m: &Barcode,
    dom_m: &Domain,
    n: &Barcode,
    dom_n: &Domain,
) -> Result<EpsilonMatrix> {
    let eps = epsilon_matrix(dom_m, dom_n)?;
    let left: Vec<_> = dom_m
        .intervals()?
        .iter()
        .map(|i| breakpoints(m, i))
        .collect();
    let right: Vec<_> = dom_n
        .intervals()?
        .iter()
        .map(|j| breakpoints(n, j))
        .collect();
    let cols = right.len();
    let entries = (0..left.len() * cols)
        .into_par_iter()
        .map(|k| {
            let (r, s) = (k / cols, k % cols);
            pair_threshold(eps.get(r, s), &left[r], &right[s])
        })
        .collect();
    EpsilonMatrix::from_entries(left.len(), cols, entries)
}

/// Sparse erosion distance between `(dgm_m, dom_m)` and `(dgm_n, dom_n)`.
///
/// `+inf` if no correspondence ever becomes feasible, which cannot happen for
/// bounded intervals.
pub fn sparse_erosion_distance(
    m: &Barcode,
    dom_m: &Domain,
    n: &Barcode,
    dom_n: &Domain,
) -> Result<f64> {
    Ok(sparse_erosion_matrix(m, dom_m, n, dom_n)?.cover_value())
}

/// Erosion distance over the thickening closure `{I^t : I in seed, t >= 0}`.
pub fn erosion_distance_closure(seed: &Domain, m: &Barcode, n: &Barcode) -> Result<f64> {
    let thresholds: Vec<f64> = seed
        .intervals()?
        .par_iter()
        .map(|i| pair_threshold(0.0, &breakpoints(m, i), &breakpoints(n, i)))
        .collect();
    Ok(thresholds.into_iter().fold(0.0, f64::max))
}
