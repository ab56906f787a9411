//! Heavy-ball subgradient descent on `v -> dhat(full, decode(v))`.
//!
//! Every step uses the whole loss (there is nothing to minibatch); the only
//! randomness is the initial subset. The iterate with the lowest loss seen
//! is returned because subgradient steps on a piecewise-linear objective can
//! go uphill.

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainVector};
use crate::subgrad::{build_loss_graph, reparam_nonneg};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode")]
pub enum Init {
    /// Uniform `m`-subset of the full domain, drawn from the seed.
    #[default]
    RandomSubset,
    /// Start from these raw coordinates (length `6m`).
    Explicit { coords: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimConfig {
    pub m: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub lr_decay: f64,
    pub seed: u64,
    pub init: Init,
}

impl Default for OptimConfig {
    fn default() -> Self {
        OptimConfig {
            m: 400,
            epochs: 750,
            learning_rate: 0.001,
            momentum: 0.9,
            lr_decay: 0.99,
            seed: 0,
            init: Init::RandomSubset,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if self.m == 0 {
            return bad("m must be >= 1");
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return bad("momentum must lie in [0, 1)");
        }
        if !(self.lr_decay > 0.0 && self.lr_decay <= 1.0) {
            return bad("lr_decay must lie in (0, 1]");
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return bad("learning_rate must be finite and >= 0");
        }
        if let Init::Explicit { coords } = &self.init {
            if coords.len() != 6 * self.m {
                return Err(Error::SizeMismatch {
                    expected: 6 * self.m,
                    got: coords.len(),
                });
            }
        }
        Ok(())
    }
}

/// Loss per epoch (index 0 is the initial point) and wall time since start.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LossTrace {
    pub losses: Vec<f64>,
    pub seconds: Vec<f64>,
}

impl LossTrace {
    pub fn len(&self) -> usize {
        self.losses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.losses.is_empty()
    }

    pub fn best_so_far(&self) -> Vec<f64> {
        let mut best = f64::INFINITY;
        self.losses
            .iter()
            .map(|&l| {
                best = best.min(l);
                best
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    pub domain: Domain,
    pub vector: DomainVector,
    pub best_loss: f64,
    pub best_epoch: usize,
    pub trace: LossTrace,
}

/// Random `m`-subset of `full` without replacement, in sampled order.
pub fn init_domain(full: &Domain, m: usize, seed: u64) -> Result<DomainVector> {
    let n = full.len();
    if m > n {
        return Err(Error::SubsetTooLarge { m, n });
    }
    let full = full.to_vec6_domain()?;
    let v = full.vec6().expect("embedded");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let picks = rand::seq::index::sample(&mut rng, n, m);
    let coords = picks.iter().flat_map(|k| v[k].to_array()).collect();
    DomainVector::from_coords(coords)
}

pub fn optimize(full: &Domain, cfg: &OptimConfig) -> Result<OptimResult> {
    optimize_with(full, cfg, |_, _, _| {})
}

/// Like [`optimize`], calling `observe(epoch, iterate, loss)` at every
/// recorded point of the trace.
pub fn optimize_with(
    full: &Domain,
    cfg: &OptimConfig,
    mut observe: impl FnMut(usize, &DomainVector, f64),
) -> Result<OptimResult> {
    cfg.validate()?;
    let graph = build_loss_graph(full, cfg.m)?;
    let mut raw = match &cfg.init {
        Init::RandomSubset => init_domain(full, cfg.m, cfg.seed)?.coords().to_vec(),
        Init::Explicit { coords } => coords.clone(),
    };
    let mut velocity = vec![0.0; raw.len()];
    let mut lr = cfg.learning_rate;
    let mut trace = LossTrace::default();
    let mut best: Option<(f64, usize, DomainVector)> = None;
    let start = Instant::now();

    for epoch in 0..=cfg.epochs {
        let rep = reparam_nonneg(&raw).map_err(|_| Error::NonFinite {
            what: "iterate",
            epoch,
        })?;
        let (loss, g, _) = graph.forward_backward(&rep.vector)?;
        if !loss.is_finite() {
            return Err(Error::NonFinite {
                what: "loss",
                epoch,
            });
        }
        if g.coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite {
                what: "subgradient",
                epoch,
            });
        }
        observe(epoch, &rep.vector, loss);
        trace.losses.push(loss);
        trace.seconds.push(start.elapsed().as_secs_f64());
        if best.as_ref().map_or(true, |b| loss < b.0) {
            best = Some((loss, epoch, rep.vector.clone()));
        }
        if epoch == cfg.epochs {
            break;
        }
        let g = rep.pullback(&g);
        for ((r, v), g) in raw.iter_mut().zip(velocity.iter_mut()).zip(&g) {
            *v = cfg.momentum * *v - lr * g;
            *r += *v;
        }
        lr *= cfg.lr_decay;
    }

    let (best_loss, best_epoch, vector) = best.expect("at least one epoch");
    Ok(OptimResult {
        domain: vector.to_domain(format!("{}-sparse{}", full.name, cfg.m)),
        vector,
        best_loss,
        best_epoch,
        trace,
    })
}
