//! Time-delay embedding of scalar series and histogram vectorization of
//! diagrams seen as signed point clouds in six dimensions.

use crate::error::{Error, Result};
use crate::gpd::GpdPointCloud;

#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeries {
    pub label: String,
    pub samples: Vec<f64>,
}

/// Default embedding dimension.
pub const EMBED_DIM: usize = 3;

/// Sliding windows `(f(t_k), .., f(t_{k+dim-1}))`, `len - dim + 1` of them.
pub fn time_delay_embed(samples: &[f64], dim: usize) -> Result<Vec<Vec<f64>>> {
    if dim == 0 {
        return Err(Error::InvalidConfig(
            "embedding dimension must be >= 1".into(),
        ));
    }
    if samples.len() < dim.max(3) {
        return Err(Error::SeriesTooShort {
            len: samples.len(),
            dim,
        });
    }
    Ok(samples.windows(dim).map(<[f64]>::to_vec).collect())
}

/// Per-axis bin edges: `bins` equal cells covering `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisBins {
    pub lo: f64,
    pub hi: f64,
    pub bins: usize,
}

impl AxisBins {
    /// Values outside the range land in the nearest edge bin.
    fn index(&self, v: f64) -> usize {
        if self.hi <= self.lo {
            return 0;
        }
        let t = ((v - self.lo) / (self.hi - self.lo) * self.bins as f64).floor();
        (t.max(0.0) as usize).min(self.bins - 1)
    }
}

/// Dense signed histogram over six axes, row-major with axis 0 slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Histogram6 {
    pub axes: [AxisBins; 6],
    pub counts: Vec<f64>,
}

impl Histogram6 {
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    fn strides(&self) -> [usize; 6] {
        let mut s = [1; 6];
        for k in (0..5).rev() {
            s[k] = s[k + 1] * self.axes[k + 1].bins;
        }
        s
    }

    pub fn get(&self, idx: [usize; 6]) -> f64 {
        let s = self.strides();
        self.counts[(0..6).map(|k| idx[k] * s[k]).sum::<usize>()]
    }
}

/// Axis ranges spanning every point of every cloud.
pub fn fit_ranges<'a>(clouds: impl IntoIterator<Item = &'a GpdPointCloud>) -> [(f64, f64); 6] {
    let mut r = [(f64::INFINITY, f64::NEG_INFINITY); 6];
    for cloud in clouds {
        for (p, _) in &cloud.points {
            for (k, v) in p.to_array().into_iter().enumerate() {
                r[k] = (r[k].0.min(v), r[k].1.max(v));
            }
        }
    }
    r.map(|(lo, hi)| if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) })
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let half = (4.0 * sigma).ceil() as i64;
    let raw: Vec<f64> = (-half..=half)
        .map(|k| (-0.5 * (k as f64 / sigma).powi(2)).exp())
        .collect();
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Bins signed multiplicities, then smooths each axis with a Gaussian of
/// width `sigma` bins truncated at `4 sigma`. Mass pushed past the outer
/// bins is dropped. `sigma = 0` skips smoothing.
pub fn histogram_vectorize(
    cloud: &GpdPointCloud,
    bins: [usize; 6],
    ranges: [(f64, f64); 6],
    sigma: f64,
) -> Result<Histogram6> {
    if bins.contains(&0) {
        return Err(Error::InvalidConfig(
            "every axis needs at least one bin".into(),
        ));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "bandwidth must be finite and >= 0, got {sigma}"
        )));
    }
    let axes: [AxisBins; 6] = std::array::from_fn(|k| AxisBins {
        lo: ranges[k].0,
        hi: ranges[k].1,
        bins: bins[k],
    });
    let mut h = Histogram6 {
        axes,
        counts: vec![0.0; bins.iter().product()],
    };
    let strides = h.strides();
    for (p, mult) in &cloud.points {
        let at: usize = p
            .to_array()
            .iter()
            .enumerate()
            .map(|(k, &v)| axes[k].index(v) * strides[k])
            .sum();
        h.counts[at] += *mult as f64;
    }
    if sigma > 0.0 {
        let kernel = gaussian_kernel(sigma);
        let half = (kernel.len() / 2) as i64;
        for k in 0..6 {
            let (n, stride) = (bins[k] as i64, strides[k]);
            let mut out = vec![0.0; h.counts.len()];
            for (flat, &v) in h.counts.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                let pos = (flat / stride) as i64 % n;
                for (t, w) in kernel.iter().enumerate() {
                    let dst = pos + t as i64 - half;
                    if (0..n).contains(&dst) {
                        out[(flat as i64 + (dst - pos) * stride as i64) as usize] += v * w;
                    }
                }
            }
            h.counts = out;
        }
    }
    Ok(h)
}
