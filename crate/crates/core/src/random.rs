//! Random intervals, domains and barcodes on a dyadic lattice.
//!
//! Coordinates are multiples of 1/64, so sums and differences of a few of
//! them are exact in `f64`. "Fat" instances keep every rectangle of every
//! interval at least 1/8 wide and tall, which rasterized checks rely on.

use rand::Rng;

use crate::geometry::{Domain, IntervalVec6, PQInterval, Point2};
use crate::gpd::{Bar, Barcode};

const UNIT: f64 = 1.0 / 64.0;

fn dyadic<R: Rng + ?Sized>(rng: &mut R, lo: i32, hi: i32) -> f64 {
    rng.gen_range(lo..=hi) as f64 * UNIT
}

/// A `(1,1)` or `(2,1)` interval in embedding coordinates. Side lengths `b`
/// and `c` are zero with probability 1/4 each.
pub fn random_vec6<R: Rng + ?Sized>(rng: &mut R, fat: bool) -> IntervalVec6 {
    let side_lo = if fat { 8 } else { 0 };
    let notch = |rng: &mut R| {
        if rng.gen_bool(0.25) {
            0.0
        } else {
            dyadic(rng, side_lo, 24)
        }
    };
    let (b, c) = (notch(rng), notch(rng));
    IntervalVec6::new(
        dyadic(rng, 0, 64),
        dyadic(rng, 0, 64),
        dyadic(rng, side_lo, 32),
        b,
        c,
        dyadic(rng, side_lo, 32),
    )
    .expect("nonnegative sides")
}

fn distinct_offsets<R: Rng + ?Sized>(rng: &mut R, k: usize, lo: i32, hi: i32) -> Vec<i32> {
    let mut picks = rand::seq::index::sample(rng, (hi - lo + 1) as usize, k)
        .into_iter()
        .map(|i| i as i32 + lo)
        .collect::<Vec<_>>();
    picks.sort_unstable();
    picks
}

/// A `(p, q)` interval with `p, q <= 3` whose minimal points all lie below a
/// common corner and whose maximal points all lie above it.
pub fn random_pq<R: Rng + ?Sized>(rng: &mut R, fat: bool) -> PQInterval {
    let margin = if fat { 8 } else { 1 };
    let (cx, cy) = (dyadic(rng, 32, 96), dyadic(rng, 32, 96));
    let p = rng.gen_range(1..=3);
    let q = rng.gen_range(1..=3);
    // x offsets below the corner shrink as x grows, y offsets grow
    let dx = distinct_offsets(rng, p, margin, 40);
    let dy = distinct_offsets(rng, p, margin, 40);
    let mins = (0..p)
        .map(|i| Point2::new(cx - dx[p - 1 - i] as f64 * UNIT, cy - dy[i] as f64 * UNIT))
        .collect();
    let ex = distinct_offsets(rng, q, margin, 40);
    let ey = distinct_offsets(rng, q, margin, 40);
    let maxs = (0..q)
        .map(|j| Point2::new(cx + ex[j] as f64 * UNIT, cy + ey[q - 1 - j] as f64 * UNIT))
        .collect();
    PQInterval::new(mins, maxs).expect("antichains around a common corner")
}

pub fn random_vec6_domain<R: Rng + ?Sized>(rng: &mut R, len: usize, fat: bool) -> Domain {
    Domain::from_vec6("random", (0..len).map(|_| random_vec6(rng, fat)).collect())
        .expect("nonempty")
}

pub fn random_pq_domain<R: Rng + ?Sized>(rng: &mut R, len: usize, fat: bool) -> Domain {
    Domain::from_intervals("random", (0..len).map(|_| random_pq(rng, fat)).collect())
        .expect("nonempty")
}

/// Up to `max_bars` bars with multiplicities in `1..=3`.
pub fn random_barcode<R: Rng + ?Sized>(rng: &mut R, max_bars: usize) -> Barcode {
    let k = rng.gen_range(0..=max_bars);
    Barcode::new(
        (0..k)
            .map(|_| Bar {
                interval: random_pq(rng, false),
                mult: rng.gen_range(1..=3),
            })
            .collect(),
    )
    .expect("positive multiplicities")
}
