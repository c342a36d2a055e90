//! Weak gradients as per-edge constant `ν`-densities.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::function::pa::PaFunction;
use crate::geometry::address::{Address, Digit};
use crate::geometry::graph::{shared_graph, CableGraph};
use crate::scalar::{pow3, Scalar};

/// A density on `V̄_n`, constant on each edge. Values are slopes in the
/// `lo → hi` direction (away from the center).
#[derive(Clone, Debug)]
pub struct EdgeDensity<T> {
    graph: Arc<CableGraph>,
    values: Vec<T>,
}

impl<T: Scalar> EdgeDensity<T> {
    pub fn new(graph: Arc<CableGraph>, values: Vec<T>) -> Result<Self> {
        if values.len() != graph.edge_count() {
            return Err(Error::Shape { expected: graph.edge_count(), found: values.len() });
        }
        Ok(Self { graph, values })
    }

    pub fn zero(n: u32) -> Result<Self> {
        let g = shared_graph(n)?;
        let values = vec![T::zero(); g.edge_count()];
        Self::new(g, values)
    }

    /// Slope 1 on every edge, oriented away from the center.
    pub fn unit(n: u32) -> Result<Self> {
        let g = shared_graph(n)?;
        let values = vec![T::one(); g.edge_count()];
        Self::new(g, values)
    }

    pub fn level(&self) -> u32 {
        self.graph.level()
    }

    pub fn graph(&self) -> &Arc<CableGraph> {
        &self.graph
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Slope from the owning cell's center towards its corner.
    pub fn arm_slope(&self, e: usize) -> T {
        let (lo, _) = self.graph.edge_endpoints(e);
        let center = self.graph.cell_vertices(e / 4)[4];
        if lo == center {
            self.values[e].clone()
        } else {
            T::zero() - self.values[e].clone()
        }
    }

    fn from_arm_slopes(graph: Arc<CableGraph>, arms: Vec<T>) -> Self {
        let values = arms
            .into_iter()
            .enumerate()
            .map(|(e, s)| {
                let (lo, _) = graph.edge_endpoints(e);
                if lo == graph.cell_vertices(e / 4)[4] {
                    s
                } else {
                    T::zero() - s
                }
            })
            .collect();
        Self { graph, values }
    }

    /// Re-expresses the density at level `m ≥ n`: each edge's value moves to
    /// its three sub-edges, and edges of newly hanging branches get 0.
    pub fn refine(&self, m: u32) -> Result<Self> {
        if m < self.level() {
            return Err(Error::Level { requested: m, minimum: self.level() });
        }
        let mut arms: Vec<[T; 4]> = (0..self.graph.cell_count())
            .map(|c| std::array::from_fn(|k| self.arm_slope(4 * c + k)))
            .collect();
        for _ in self.level()..m {
            let mut next = Vec::with_capacity(arms.len() * 5);
            for a in &arms {
                for d in Digit::ALL {
                    next.push(refine_arms(a, d));
                }
            }
            arms = next;
        }
        let g = shared_graph(m)?;
        Ok(Self::from_arm_slopes(g, arms.into_iter().flatten().collect()))
    }

    /// The PA function `x ↦ base + ∫_{γ(q_5, x)} g dν`.
    pub fn reconstruct(&self, base: T) -> PaFunction<T> {
        let g = &self.graph;
        let len = T::one() / pow3::<T>(g.level());
        let mut values: Vec<Option<T>> = vec![None; g.vertex_count()];
        values[g.root()] = Some(base);
        let mut queue = VecDeque::from([g.root()]);
        while let Some(u) = queue.pop_front() {
            let fu = values[u].clone().expect("visited");
            for (v, e) in g.neighbors(u) {
                if values[v].is_none() {
                    // the BFS tree from the root only walks lo → hi
                    values[v] = Some(fu.clone() + self.values[e].clone() * len.clone());
                    queue.push_back(v);
                }
            }
        }
        let values = values.into_iter().map(|v| v.expect("tree is connected")).collect();
        PaFunction::on_graph(Arc::clone(g), values).expect("one value per vertex")
    }

    /// `3^{-|w|}·(g ∘ Ψ_w)` re-expressed on `V̄_{max(n−|w|, 0)}` with its own
    /// orientation; this is the density of the pulled-back function.
    pub fn pullback(&self, w: &Address) -> Result<Self> {
        let n = self.level();
        let fine = if w.level() > n { self.refine(w.level())? } else { self.clone() };
        let level = fine.level() - w.level();
        let g = shared_graph(level)?;
        let factor = T::one() / pow3::<T>(w.level());
        let base = w.descendant_range(fine.level()).start as usize;
        let arms = (0..g.edge_count())
            .map(|e| fine.arm_slope(4 * (base + e / 4) + e % 4) * factor.clone())
            .collect();
        Ok(Self::from_arm_slopes(g, arms))
    }
}

fn refine_arms<T: Scalar>(a: &[T; 4], d: Digit) -> [T; 4] {
    if d.is_center() {
        return a.clone();
    }
    let i = d.slot();
    let mut out: [T; 4] = std::array::from_fn(|_| T::zero());
    // the inner arm points back towards the parent center
    out[i] = a[i].clone();
    out[d.opposite().slot()] = T::zero() - a[i].clone();
    out
}
