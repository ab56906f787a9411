//! Sparsification of interval domains for generalized persistence diagrams
//! of two-parameter persistence modules.

pub mod erosion;
pub mod error;
pub mod geometry;
pub mod gpd;
pub mod io;
pub mod optim;
pub mod oracle;
pub mod pipeline;
pub mod random;
pub mod subgrad;

pub use erosion::{dhat, eps_21, eps_pq, epsilon_matrix, EpsilonMatrix};
pub use error::{Error, Result};
pub use geometry::{
    grid_domain, Domain, DomainIntervals, DomainVector, GridSpec, IntervalVec6, PQInterval, Point2,
    SampleRange,
};
pub use gpd::{
    erosion_distance_closure, gpd_points, gri, mobius_inversion, sparse_erosion_distance, Bar,
    Barcode, Gpd, GpdPointCloud, GriTable,
};
pub use optim::{init_domain, optimize, optimize_with, Init, LossTrace, OptimConfig, OptimResult};
pub use subgrad::{build_loss_graph, reparam_nonneg, LossGraph, Subgradient};
