//! Piecewise-linear evaluation of `dhat(I, J)` with a subgradient in the
//! embedding coordinates of `J`.
//!
//! The pairwise distance is compiled once into a small graph over twelve
//! inputs (six fixed coordinates of a full-domain interval, six free
//! coordinates of a sparse-domain interval) using only additions,
//! subtractions, negations, absolute values and binary max/min. Gated
//! differences `delta(x, y)|y - x|` are written as `max(0, y - x)`, which is
//! the same function; the constant comes first so a tie at the kink selects
//! the flat branch. The loss applies that graph to every pair and reduces
//! with row minima, column minima and a final maximum.
//!
//! Ties in max/min select the first child. Because every reduction picks a
//! single child, the backward pass only touches the one active pair.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Domain, DomainVector};

pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PlOp {
    Input(usize),
    Constant(f64),
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Neg(NodeId),
    Abs(NodeId),
    Max2(NodeId, NodeId),
    Min2(NodeId, NodeId),
}

impl PlOp {
    fn label(&self) -> String {
        match self {
            PlOp::Input(slot) => format!("input[{slot}]"),
            PlOp::Constant(c) => format!("const {c}"),
            PlOp::Add(..) => "add".into(),
            PlOp::Sub(..) => "sub".into(),
            PlOp::Neg(_) => "neg".into(),
            PlOp::Abs(_) => "abs".into(),
            PlOp::Max2(..) => "max".into(),
            PlOp::Min2(..) => "min".into(),
        }
    }
}

/// An acyclic piecewise-linear expression graph in topological order.
#[derive(Clone, Debug, Default)]
pub struct PlGraph {
    nodes: Vec<PlOp>,
    num_inputs: usize,
}

/// Per-evaluation state: node values and, for max/min/abs, which branch was
/// taken (0 = first child or nonnegative argument).
#[derive(Clone, Debug, Default)]
pub struct Scratch {
    values: Vec<f64>,
    branch: Vec<u8>,
}

impl PlGraph {
    pub fn new() -> Self {
        PlGraph::default()
    }

    fn push(&mut self, op: PlOp) -> NodeId {
        self.nodes.push(op);
        self.nodes.len() - 1
    }

    pub fn input(&mut self, slot: usize) -> NodeId {
        self.num_inputs = self.num_inputs.max(slot + 1);
        self.push(PlOp::Input(slot))
    }

    pub fn constant(&mut self, c: f64) -> NodeId {
        self.push(PlOp::Constant(c))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(PlOp::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(PlOp::Sub(a, b))
    }

    pub fn neg(&mut self, a: NodeId) -> NodeId {
        self.push(PlOp::Neg(a))
    }

    pub fn abs(&mut self, a: NodeId) -> NodeId {
        self.push(PlOp::Abs(a))
    }

    pub fn max2(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(PlOp::Max2(a, b))
    }

    pub fn min2(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(PlOp::Min2(a, b))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn nodes(&self) -> &[PlOp] {
        &self.nodes
    }

    /// Evaluates every node; the last node is the output.
    pub fn forward(&self, inputs: &[f64], scratch: &mut Scratch) -> f64 {
        let n = self.nodes.len();
        scratch.values.clear();
        scratch.values.resize(n, 0.0);
        scratch.branch.clear();
        scratch.branch.resize(n, 0);
        let v = &mut scratch.values;
        for (k, op) in self.nodes.iter().enumerate() {
            v[k] = match *op {
                PlOp::Input(slot) => inputs[slot],
                PlOp::Constant(c) => c,
                PlOp::Add(a, b) => v[a] + v[b],
                PlOp::Sub(a, b) => v[a] - v[b],
                PlOp::Neg(a) => -v[a],
                PlOp::Abs(a) => {
                    scratch.branch[k] = u8::from(v[a] < 0.0);
                    v[a].abs()
                }
                PlOp::Max2(a, b) => {
                    let second = v[b] > v[a];
                    scratch.branch[k] = u8::from(second);
                    if second {
                        v[b]
                    } else {
                        v[a]
                    }
                }
                PlOp::Min2(a, b) => {
                    let second = v[b] < v[a];
                    scratch.branch[k] = u8::from(second);
                    if second {
                        v[b]
                    } else {
                        v[a]
                    }
                }
            };
        }
        v[n - 1]
    }

    /// Reverse pass after [`PlGraph::forward`]; adds `seed * d(output)/d(input)`
    /// into `grad` (indexed by input slot).
    pub fn backward(&self, scratch: &Scratch, seed: f64, grad: &mut [f64]) {
        let mut adj = vec![0.0; self.nodes.len()];
        let last = self.nodes.len() - 1;
        adj[last] = seed;
        for k in (0..self.nodes.len()).rev() {
            let g = adj[k];
            if g == 0.0 {
                continue;
            }
            match self.nodes[k] {
                PlOp::Input(slot) => grad[slot] += g,
                PlOp::Constant(_) => {}
                PlOp::Add(a, b) => {
                    adj[a] += g;
                    adj[b] += g;
                }
                PlOp::Sub(a, b) => {
                    adj[a] += g;
                    adj[b] -= g;
                }
                PlOp::Neg(a) => adj[a] -= g,
                PlOp::Abs(a) => adj[a] += if scratch.branch[k] == 1 { -g } else { g },
                PlOp::Max2(a, b) | PlOp::Min2(a, b) => {
                    adj[if scratch.branch[k] == 1 { b } else { a }] += g
                }
            }
        }
    }

    /// Nodes reachable from the output through the branches taken.
    pub fn active_nodes(&self, scratch: &Scratch) -> Vec<NodeId> {
        let mut on = vec![false; self.nodes.len()];
        on[self.nodes.len() - 1] = true;
        for k in (0..self.nodes.len()).rev() {
            if !on[k] {
                continue;
            }
            match self.nodes[k] {
                PlOp::Input(_) | PlOp::Constant(_) => {}
                PlOp::Add(a, b) | PlOp::Sub(a, b) => {
                    on[a] = true;
                    on[b] = true;
                }
                PlOp::Neg(a) | PlOp::Abs(a) => on[a] = true,
                PlOp::Max2(a, b) | PlOp::Min2(a, b) => {
                    on[if scratch.branch[k] == 1 { b } else { a }] = true
                }
            }
        }
        (0..self.nodes.len()).filter(|&k| on[k]).collect()
    }
}

/// Graph of the pairwise distance between a fixed interval (inputs 0..6)
/// and a free interval (inputs 6..12), both in embedding coordinates.
pub fn pair_template() -> PlGraph {
    let mut g = PlGraph::new();
    let u: Vec<NodeId> = (0..6).map(|s| g.input(s)).collect();
    let v: Vec<NodeId> = (6..12).map(|s| g.input(s)).collect();
    let zero = g.constant(0.0);
    let (x1, y1, a, b, c, d) = (u[0], u[1], u[2], u[3], u[4], u[5]);
    let (x2, y2, e, f, gg, h) = (v[0], v[1], v[2], v[3], v[4], v[5]);

    // max(0, w2 - w1) max max(0, w4 - w3)
    let gated = |g: &mut PlGraph, w1: NodeId, w2: NodeId, w3: NodeId, w4: NodeId| {
        let d1 = g.sub(w2, w1);
        let r1 = g.max2(zero, d1);
        let d2 = g.sub(w4, w3);
        let r2 = g.max2(zero, d2);
        g.max2(r1, r2)
    };
    let minmax = |g: &mut PlGraph, o: [NodeId; 4]| {
        let l = g.min2(o[0], o[1]);
        let r = g.min2(o[2], o[3]);
        g.max2(l, r)
    };

    let x1b = g.sub(x1, b);
    let y1c = g.sub(y1, c);
    let x2f = g.sub(x2, f);
    let y2g = g.sub(y2, gg);
    let x1d = g.add(x1, d);
    let y1a = g.add(y1, a);
    let x2h = g.add(x2, h);
    let y2e = g.add(y2, e);

    let t5 = [
        gated(&mut g, x2f, x1b, y2, y1),
        gated(&mut g, x2f, x1, y2, y1c),
        gated(&mut g, x2, x1b, y2g, y1),
        gated(&mut g, x2, x1, y2g, y1c),
    ];
    let t5 = minmax(&mut g, t5);
    let t6 = gated(&mut g, x1d, x2h, y1a, y2e);
    let t7 = [
        gated(&mut g, x1b, x2f, y1, y2),
        gated(&mut g, x1b, x2, y1, y2g),
        gated(&mut g, x1, x2f, y1c, y2),
        gated(&mut g, x1, x2, y1c, y2g),
    ];
    let t7 = minmax(&mut g, t7);
    let t8 = gated(&mut g, x2h, x1d, y2e, y1a);
    let m1 = g.max2(t5, t6);
    let m2 = g.max2(m1, t7);
    g.max2(m2, t8);
    g
}

/// A subgradient with respect to the concatenated sparse-domain vector.
#[derive(Clone, Debug, PartialEq)]
pub struct Subgradient {
    pub coords: Vec<f64>,
}

impl Subgradient {
    pub fn norm_inf(&self) -> f64 {
        self.coords.iter().fold(0.0, |acc, g| acc.max(g.abs()))
    }
}

/// Which reduction produced the loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActiveSide {
    /// The worst-covered full-domain interval (row minimum).
    Row,
    /// The worst-covered sparse-domain interval (column minimum).
    Col,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActivePair {
    pub row: usize,
    pub col: usize,
    pub side: ActiveSide,
}

/// `v_J -> dhat(I, J)` for a fixed full domain `I` and `m` free intervals.
#[derive(Clone, Debug)]
pub struct LossGraph {
    full: Vec<[f64; 6]>,
    m: usize,
    template: PlGraph,
}

pub fn build_loss_graph(full: &Domain, m: usize) -> Result<LossGraph> {
    if m == 0 {
        return Err(Error::InvalidConfig(
            "sparse domain size must be >= 1".into(),
        ));
    }
    let full = full.to_vec6_domain()?;
    let full = full
        .vec6()
        .expect("embedded")
        .iter()
        .map(|v| v.to_array())
        .collect();
    Ok(LossGraph {
        full,
        m,
        template: pair_template(),
    })
}

impl LossGraph {
    pub fn full_len(&self) -> usize {
        self.full.len()
    }

    pub fn sparse_len(&self) -> usize {
        self.m
    }

    pub fn template(&self) -> &PlGraph {
        &self.template
    }

    /// Nodes of the unrolled graph: one template per pair plus the binary
    /// min/max reductions.
    pub fn node_count(&self) -> usize {
        let (n, m) = (self.full.len(), self.m);
        let reductions = n * (m - 1) + m * (n - 1) + (n + m - 1);
        self.template.len() * n * m + reductions
    }

    fn pair_values(&self, v: &DomainVector) -> Result<Vec<f64>> {
        if v.num_intervals() != self.m {
            return Err(Error::SizeMismatch {
                expected: 6 * self.m,
                got: v.coords().len(),
            });
        }
        let coords = v.coords();
        let m = self.m;
        Ok(self
            .full
            .par_iter()
            .map_init(
                || (Scratch::default(), [0.0f64; 12]),
                |(scratch, inputs), row| {
                    inputs[..6].copy_from_slice(row);
                    (0..m)
                        .map(|s| {
                            inputs[6..].copy_from_slice(&coords[6 * s..6 * s + 6]);
                            self.template.forward(inputs, scratch)
                        })
                        .collect::<Vec<_>>()
                },
            )
            .flatten()
            .collect())
    }

    fn reduce(&self, pairs: &[f64]) -> (f64, ActivePair) {
        let (n, m) = (self.full.len(), self.m);
        let mut best = (
            f64::NEG_INFINITY,
            ActivePair {
                row: 0,
                col: 0,
                side: ActiveSide::Row,
            },
        );
        for r in 0..n {
            let mut arg = 0;
            for s in 1..m {
                if pairs[r * m + s] < pairs[r * m + arg] {
                    arg = s;
                }
            }
            let val = pairs[r * m + arg];
            if val > best.0 || r == 0 {
                best = (
                    val,
                    ActivePair {
                        row: r,
                        col: arg,
                        side: ActiveSide::Row,
                    },
                );
            }
        }
        for s in 0..m {
            let mut arg = 0;
            for r in 1..n {
                if pairs[r * m + s] < pairs[arg * m + s] {
                    arg = r;
                }
            }
            let val = pairs[arg * m + s];
            if val > best.0 {
                best = (
                    val,
                    ActivePair {
                        row: arg,
                        col: s,
                        side: ActiveSide::Col,
                    },
                );
            }
        }
        best
    }

    pub fn forward(&self, v: &DomainVector) -> Result<f64> {
        Ok(self.reduce(&self.pair_values(v)?).0)
    }

    /// Loss, a subgradient, and the pair that carries it.
    pub fn forward_backward(&self, v: &DomainVector) -> Result<(f64, Subgradient, ActivePair)> {
        let pairs = self.pair_values(v)?;
        let (loss, active) = self.reduce(&pairs);
        let scratch = self.evaluate_pair(v, active);
        let mut local = [0.0; 12];
        self.template.backward(&scratch, 1.0, &mut local);
        let mut coords = vec![0.0; 6 * self.m];
        coords[6 * active.col..6 * active.col + 6].copy_from_slice(&local[6..]);
        Ok((loss, Subgradient { coords }, active))
    }

    fn evaluate_pair(&self, v: &DomainVector, pair: ActivePair) -> Scratch {
        let mut inputs = [0.0; 12];
        inputs[..6].copy_from_slice(&self.full[pair.row]);
        inputs[6..].copy_from_slice(&v.coords()[6 * pair.col..6 * pair.col + 6]);
        let mut scratch = Scratch::default();
        self.template.forward(&inputs, &mut scratch);
        scratch
    }

    /// Smallest gap between the two arguments of any max/min on the active
    /// path (including the reductions), or between an abs argument and 0.
    /// The loss is linear within this distance, up to the factor 2 bound on
    /// how fast pair values move in the sup norm.
    pub fn tie_margin(&self, v: &DomainVector) -> Result<f64> {
        let pairs = self.pair_values(v)?;
        let (loss, pair) = self.reduce(&pairs);
        let (n, m) = (self.full.len(), self.m);
        let mut margin = f64::INFINITY;
        let at = |r: usize, s: usize| pairs[r * m + s];
        let chosen = at(pair.row, pair.col);
        match pair.side {
            ActiveSide::Row => (0..m)
                .filter(|&s| s != pair.col)
                .for_each(|s| margin = margin.min((at(pair.row, s) - chosen).abs())),
            ActiveSide::Col => (0..n)
                .filter(|&r| r != pair.row)
                .for_each(|r| margin = margin.min((at(r, pair.col) - chosen).abs())),
        }
        let row_mins = (0..n).map(|r| (0..m).map(|s| at(r, s)).fold(f64::INFINITY, f64::min));
        let col_mins = (0..m).map(|s| (0..n).map(|r| at(r, s)).fold(f64::INFINITY, f64::min));
        let active_idx = match pair.side {
            ActiveSide::Row => pair.row,
            ActiveSide::Col => n + pair.col,
        };
        for (k, val) in row_mins.chain(col_mins).enumerate() {
            if k != active_idx {
                margin = margin.min((loss - val).abs());
            }
        }
        let scratch = self.evaluate_pair(v, pair);
        let vals = &scratch.values;
        for k in self.template.active_nodes(&scratch) {
            match self.template.nodes[k] {
                PlOp::Max2(a, b) | PlOp::Min2(a, b) => {
                    margin = margin.min((vals[a] - vals[b]).abs())
                }
                PlOp::Abs(a) => margin = margin.min(vals[a].abs()),
                _ => {}
            }
        }
        Ok(margin)
    }

    /// DOT rendering of the active path: the reduction that selected the
    /// pair and the template nodes on the branches taken.
    pub fn active_path_dot(&self, v: &DomainVector) -> Result<String> {
        let (loss, _, pair) = self.forward_backward(v)?;
        let scratch = self.evaluate_pair(v, pair);
        let mut out = String::from("digraph active_path {\n  rankdir=BT;\n");
        let side = match pair.side {
            ActiveSide::Row => format!("min over sparse for full[{}]", pair.row),
            ActiveSide::Col => format!("min over full for sparse[{}]", pair.col),
        };
        writeln!(out, "  loss [shape=box,label=\"max = {loss}\"];").unwrap();
        writeln!(out, "  reduce [shape=box,label=\"{side}\"];").unwrap();
        writeln!(out, "  reduce -> loss;").unwrap();
        let active = self.template.active_nodes(&scratch);
        for &k in &active {
            let label = match self.template.nodes[k] {
                PlOp::Input(s) if s < 6 => format!("full[{}].{}", pair.row, AXES[s]),
                PlOp::Input(s) => format!("sparse[{}].{}", pair.col, AXES[s - 6]),
                op => op.label(),
            };
            writeln!(out, "  n{k} [label=\"{label} = {}\"];", scratch.values[k]).unwrap();
        }
        for &k in &active {
            let children: Vec<NodeId> = match self.template.nodes[k] {
                PlOp::Input(_) | PlOp::Constant(_) => vec![],
                PlOp::Add(a, b) | PlOp::Sub(a, b) => vec![a, b],
                PlOp::Neg(a) | PlOp::Abs(a) => vec![a],
                PlOp::Max2(a, b) | PlOp::Min2(a, b) => {
                    vec![if scratch.branch[k] == 1 { b } else { a }]
                }
            };
            for c in children {
                writeln!(out, "  n{c} -> n{k};").unwrap();
            }
        }
        writeln!(out, "  n{} -> reduce;", self.template.len() - 1).unwrap();
        out.push_str("}\n");
        Ok(out)
    }
}

const AXES: [&str; 6] = ["x", "y", "a", "b", "c", "d"];

/// Nonnegativity through ReLU on the `a, b, c, d` slots.
#[derive(Clone, Debug, PartialEq)]
pub struct Reparam {
    pub vector: DomainVector,
    /// Derivative of each output coordinate with respect to its raw input:
    /// 1 on `x, y` and on nonnegative raw sides (including exactly 0), else 0.
    pub mask: Vec<f64>,
}

pub fn reparam_nonneg(raw: &[f64]) -> Result<Reparam> {
    if raw.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidEmbedding("non-finite raw coordinate".into()));
    }
    let mut coords = raw.to_vec();
    let mut mask = vec![1.0; raw.len()];
    for (k, c) in coords.iter_mut().enumerate() {
        if k % 6 >= 2 && *c < 0.0 {
            *c = 0.0;
            mask[k] = 0.0;
        }
    }
    Ok(Reparam {
        vector: DomainVector::from_coords(coords)?,
        mask,
    })
}

impl Reparam {
    /// Chain rule from a subgradient in domain coordinates to raw coordinates.
    pub fn pullback(&self, g: &Subgradient) -> Vec<f64> {
        g.coords
            .iter()
            .zip(&self.mask)
            .map(|(g, m)| g * m)
            .collect()
    }
}
