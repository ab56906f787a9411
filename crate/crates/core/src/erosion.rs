//! Closed-form pairwise thickening distances and the domain distance `dhat`.
//!
//! `eps_rs` is the smallest `eps >= 0` such that `J_s` lies in the
//! `eps`-thickening of `I_r` and `I_r` lies in the `eps`-thickening of `J_s`.
//! It only depends on the minimal and maximal points of both intervals.
//! `dhat` is the smallest `eps` admitting an `eps`-correspondence between two
//! domains, which reduces to a max-of-row-and-column-minima over the matrix
//! of `eps_rs`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainIntervals, IntervalVec6, PQInterval};

/// 1 if `x <= y`, else 0.
pub fn delta(x: f64, y: f64) -> f64 {
    if x <= y {
        1.0
    } else {
        0.0
    }
}

/// `max(delta(w1, w2)|w2 - w1|, delta(w3, w4)|w4 - w3|)`.
pub fn f_term(w1: f64, w2: f64, w3: f64, w4: f64) -> f64 {
    (delta(w1, w2) * (w2 - w1).abs()).max(delta(w3, w4) * (w4 - w3).abs())
}

/// `min(F(m1, m2, m3, m4), m5)`. Not used by the pairwise formulas.
pub fn g_term(m1: f64, m2: f64, m3: f64, m4: f64, m5: f64) -> f64 {
    f_term(m1, m2, m3, m4).min(m5)
}

/// `max(min(o1, o2), min(o3, o4))`.
pub fn h_term(o1: f64, o2: f64, o3: f64, o4: f64) -> f64 {
    o1.min(o2).max(o3.min(o4))
}

/// Smallest `eps >= 0` with `inner` contained in the `eps`-thickening of
/// `outer`.
///
/// Each minimal point of `inner` must dominate some minimal point of `outer`
/// shifted by `-eps`; each maximal point of `inner` must be dominated by some
/// maximal point of `outer` shifted by `+eps`.
pub fn directed_eps(outer: &PQInterval, inner: &PQInterval) -> f64 {
    let lower = inner
        .mins()
        .iter()
        .map(|q| {
            outer
                .mins()
                .iter()
                .map(|m| f_term(q.x, m.x, q.y, m.y))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    let upper = inner
        .maxs()
        .iter()
        .map(|q| {
            outer
                .maxs()
                .iter()
                .map(|big| f_term(big.x, q.x, big.y, q.y))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    lower.max(upper)
}

/// Pairwise distance between two `(p, q)`-intervals. Symmetric; zero on
/// identical intervals.
pub fn eps_pq(i: &PQInterval, j: &PQInterval) -> f64 {
    directed_eps(i, j).max(directed_eps(j, i))
}

/// Pairwise distance in embedding coordinates, as the maximum of four closed
/// form terms. Agrees with [`eps_pq`] on the decoded intervals.
pub fn eps_21(u: &IntervalVec6, v: &IntervalVec6) -> f64 {
    let IntervalVec6 {
        x: x1,
        y: y1,
        a,
        b,
        c,
        d,
    } = *u;
    let IntervalVec6 {
        x: x2,
        y: y2,
        a: e,
        b: f,
        c: g,
        d: h,
    } = *v;
    // minima of v above minima of u
    let t5 = h_term(
        f_term(x2 - f, x1 - b, y2, y1),
        f_term(x2 - f, x1, y2, y1 - c),
        f_term(x2, x1 - b, y2 - g, y1),
        f_term(x2, x1, y2 - g, y1 - c),
    );
    // maximum of v below maximum of u
    let t6 = f_term(x1 + d, x2 + h, y1 + a, y2 + e);
    let t7 = h_term(
        f_term(x1 - b, x2 - f, y1, y2),
        f_term(x1 - b, x2, y1, y2 - g),
        f_term(x1, x2 - f, y1 - c, y2),
        f_term(x1, x2, y1 - c, y2 - g),
    );
    let t8 = f_term(x2 + h, x1 + d, y2 + e, y1 + a);
    t5.max(t6).max(t7).max(t8)
}

/// Dense row-major matrix of pairwise distances between two domains.
#[derive(Clone, Debug, PartialEq)]
pub struct EpsilonMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl EpsilonMatrix {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::EmptyDomain);
        }
        if entries.len() != rows * cols {
            return Err(Error::SizeMismatch {
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(EpsilonMatrix {
            rows,
            cols,
            entries,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, s: usize) -> f64 {
        self.entries[r * self.cols + s]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn transpose(&self) -> EpsilonMatrix {
        let mut entries = Vec::with_capacity(self.entries.len());
        for s in 0..self.cols {
            for r in 0..self.rows {
                entries.push(self.get(r, s));
            }
        }
        EpsilonMatrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    /// `max(max_r min_s e_rs, max_s min_r e_rs)`: the smallest threshold at
    /// which every row and every column has an entry at or below it.
    pub fn cover_value(&self) -> f64 {
        let row_part = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|s| self.get(r, s))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        let col_part = (0..self.cols)
            .map(|s| {
                (0..self.rows)
                    .map(|r| self.get(r, s))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max);
        row_part.max(col_part)
    }
}

/// Builds the matrix `e_rs = eps(I_r, J_s)`. Uses [`eps_21`] when both domains
/// are embedded and [`eps_pq`] otherwise. Rows are evaluated in parallel; each
/// entry is an independent pure function so the result does not depend on
/// scheduling.
pub fn epsilon_matrix(rows: &Domain, cols: &Domain) -> Result<EpsilonMatrix> {
    let (n, m) = (rows.len(), cols.len());
    let entries: Vec<f64> = match (rows.kind(), cols.kind()) {
        (DomainIntervals::Vec6(a), DomainIntervals::Vec6(b)) => a
            .par_iter()
            .flat_map_iter(|u| b.iter().map(move |v| eps_21(u, v)))
            .collect(),
        _ => {
            let a = rows.intervals()?;
            let b = cols.intervals()?;
            a.par_iter()
                .flat_map_iter(|i| b.iter().map(move |j| eps_pq(i, j)))
                .collect()
        }
    };
    EpsilonMatrix::from_entries(n, m, entries)
}

/// Smallest `eps` for which an `eps`-correspondence between the domains exists.
pub fn dhat(a: &Domain, b: &Domain) -> Result<f64> {
    Ok(epsilon_matrix(a, b)?.cover_value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    fn rect(x0: f64, y0: f64, x1: f64, y1: f64) -> PQInterval {
        PQInterval::rect(Point2::new(x0, y0), Point2::new(x1, y1)).unwrap()
    }

    fn v6(a: [f64; 6]) -> IntervalVec6 {
        IntervalVec6::from_array(a).unwrap()
    }

    #[test]
    fn delta_values() {
        assert_eq!(delta(1.0, 2.0), 1.0);
        assert_eq!(delta(2.0, 1.0), 0.0);
        assert_eq!(delta(3.5, 3.5), 1.0);
    }

    #[test]
    fn fgh_values() {
        assert_eq!(f_term(0.0, 1.0, 0.0, 2.0), 2.0);
        assert_eq!(f_term(1.0, 0.0, 2.0, 0.0), 0.0);
        assert_eq!(h_term(3.0, 1.0, 2.0, 5.0), 2.0);
        assert_eq!(g_term(0.0, 1.0, 0.0, 2.0, 1.5), 1.5);
        assert_eq!(g_term(0.0, 1.0, 0.0, 2.0, 7.0), 2.0);
    }

    #[test]
    fn eps_pq_examples() {
        let r = rect(0.0, 0.0, 1.0, 1.0);
        assert_eq!(eps_pq(&r, &r), 0.0);
        assert_eq!(eps_pq(&r, &rect(0.5, 0.0, 1.5, 1.0)), 0.5);
        let l = PQInterval::new(
            vec![Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)],
            vec![Point2::new(2.0, 2.0)],
        )
        .unwrap();
        assert_eq!(eps_pq(&l, &rect(0.0, 0.0, 2.0, 2.0)), 1.0);
        assert_eq!(eps_pq(&rect(0.0, 0.0, 2.0, 2.0), &l), 1.0);
    }

    #[test]
    fn eps_21_examples() {
        let v = v6([1.0, 2.0, 0.5, 0.3, 0.4, 0.6]);
        assert_eq!(eps_21(&v, &v), 0.0);
        assert_eq!(
            eps_21(
                &v6([0.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
                &v6([0.5, 0.0, 1.0, 0.0, 0.0, 1.0])
            ),
            0.5
        );
        let (u, w) = (v6([1.0; 6]), v6([1.0, 1.0, 1.0, 0.0, 0.0, 1.0]));
        let expect = eps_pq(&u.decode().unwrap(), &w.decode().unwrap());
        assert_eq!(eps_21(&u, &w), expect);
        // rectangle (1,1)-(2,2) against the L-shape: the shape's minimal
        // points sit one unit below/left of the corner
        assert_eq!(expect, 1.0);
    }

    #[test]
    fn matrix_basics() {
        let d = Domain::from_vec6(
            "d",
            vec![
                v6([0.0, 0.0, 1.0, 0.0, 0.0, 1.0]),
                v6([1.0, 2.0, 0.5, 0.3, 0.4, 0.6]),
            ],
        )
        .unwrap();
        let e = epsilon_matrix(&d, &d).unwrap();
        assert_eq!(e.get(0, 0), 0.0);
        assert_eq!(e.get(1, 1), 0.0);
        assert_eq!(e.get(0, 1), e.get(1, 0));
        assert_eq!(dhat(&d, &d).unwrap(), 0.0);

        let single_a = Domain::from_intervals("a", vec![rect(0.0, 0.0, 1.0, 1.0)]).unwrap();
        let single_b = Domain::from_intervals("b", vec![rect(0.5, 0.0, 1.5, 1.0)]).unwrap();
        let e = epsilon_matrix(&single_a, &single_b).unwrap();
        assert_eq!((e.rows(), e.cols()), (1, 1));
        assert_eq!(e.get(0, 0), 0.5);
    }

    #[test]
    fn dhat_half_example() {
        let a = Domain::from_intervals("a", vec![rect(0.0, 0.0, 0.5, 0.5)]).unwrap();
        let b = Domain::from_intervals("b", vec![rect(0.0, 0.0, 1.0, 1.0)]).unwrap();
        assert_eq!(dhat(&a, &b).unwrap(), 0.5);
    }

    #[test]
    fn mixed_domain_kinds_use_general_formula() {
        let a = Domain::from_vec6("a", vec![v6([0.0, 0.0, 1.0, 0.0, 0.0, 1.0])]).unwrap();
        let b = Domain::from_intervals("b", vec![rect(0.5, 0.0, 1.5, 1.0)]).unwrap();
        assert_eq!(dhat(&a, &b).unwrap(), 0.5);
    }

    #[test]
    fn cover_value_uses_rows_and_columns() {
        // rows are covered cheaply but column 1 is far from every row
        let e = EpsilonMatrix::from_entries(2, 2, vec![0.0, 5.0, 0.1, 3.0]).unwrap();
        assert_eq!(e.cover_value(), 3.0);
        assert_eq!(e.transpose().cover_value(), 3.0);
        assert!(EpsilonMatrix::from_entries(2, 2, vec![0.0]).is_err());
    }
}
