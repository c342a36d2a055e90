//! Piecewise-affine functions and the interpolation operator `H_n`.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::function::density::EdgeDensity;
use crate::function::sampler::{refine_cross, sample_on_graph, CrossSampler, Pulled};
use crate::geometry::address::{Address, Anchor, Digit};
use crate::geometry::graph::{shared_graph, CableGraph, EdgeId};
use crate::geometry::lattice::LatticePoint;
use crate::scalar::{pow3, Scalar};

/// An `n`-piecewise-affine function: affine on every edge of `V̄_n` and
/// constant on each component of `V̄_m ∖ V̄_n`, where it takes the value of
/// the attachment point.
#[derive(Clone, Debug)]
pub struct PaFunction<T> {
    graph: Arc<CableGraph>,
    values: Vec<T>,
}

impl<T: Scalar> PaFunction<T> {
    /// `H_n`: the `n`-PA function with the given values on `V_n`.
    pub fn interpolate(values: Vec<T>, n: u32) -> Result<Self> {
        Self::on_graph(shared_graph(n)?, values)
    }

    pub fn on_graph(graph: Arc<CableGraph>, values: Vec<T>) -> Result<Self> {
        if values.len() != graph.vertex_count() {
            return Err(Error::Shape { expected: graph.vertex_count(), found: values.len() });
        }
        Ok(Self { graph, values })
    }

    pub fn constant(c: T, n: u32) -> Result<Self> {
        let g = shared_graph(n)?;
        let values = vec![c; g.vertex_count()];
        Self::on_graph(g, values)
    }

    /// The level-0 function with `f(q_2) = f(q_4) = 1`, `f(q_1) = f(q_3) = −1`
    /// and `f(q_5) = 0`.
    pub fn cross() -> Self {
        Self::from_cross_values([-1, 1, -1, 1, 0].map(|x| T::from_i64(x).expect("small integer")))
    }

    /// The level-0 function with the given values at `q_1..q_4, q_5`.
    pub fn from_cross_values(v: [T; 5]) -> Self {
        let g = shared_graph(0).expect("level 0 always fits");
        let mut values: Vec<Option<T>> = vec![None; 5];
        for (id, x) in g.cell_vertices(0).into_iter().zip(v) {
            values[id] = Some(x);
        }
        Self { graph: g, values: values.into_iter().map(Option::unwrap).collect() }
    }

    /// Random dyadic values `k/16` with `|k| ≤ 64`, exactly representable in
    /// every scalar type.
    pub fn random<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        let g = shared_graph(n)?;
        let values = (0..g.vertex_count()).map(|_| T::from_ratio(rng.gen_range(-64..=64), 16)).collect();
        Self::on_graph(g, values)
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

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    /// Value at a point of `V_n`.
    pub fn value_at_vertex(&self, v: usize) -> Result<T> {
        self.values
            .get(v)
            .cloned()
            .ok_or_else(|| Error::Lookup(format!("vertex id {v} out of range")))
    }

    /// Value at `offset ∈ [0, 3^{-n}]` from the `lo` end of an edge.
    pub fn evaluate_edge(&self, e: EdgeId, offset: &T) -> Result<T> {
        if e >= self.graph.edge_count() {
            return Err(Error::Lookup(format!("edge id {e} out of range")));
        }
        let scale: T = pow3(self.level());
        let t = offset.clone() * scale;
        if t < T::zero() || t > T::one() {
            return Err(Error::Domain(format!("offset {offset} outside the edge")));
        }
        let (lo, hi) = self.graph.edge_endpoints(e);
        let (a, b) = (self.values[lo].clone(), self.values[hi].clone());
        Ok(a.clone() + (b - a) * t)
    }

    /// Value at the attachment vertex of the cell `K_w`.
    pub fn evaluate_cell(&self, w: &Address) -> T {
        self.anchor_value(w)
    }

    /// Value at an arbitrary lattice point of `K`.
    pub fn evaluate_point(&self, p: &LatticePoint) -> Result<T> {
        let mut w = Address::root();
        let mut s = self.root();
        while w.level() < p.scale() {
            let d = Digit::ALL
                .into_iter()
                .find(|&d| w.child(d).map().square_contains(p))
                .ok_or_else(|| Error::Domain(format!("{p:?} is not a point of the fractal")))?;
            s = self.child(&s, d);
            w = w.child(d);
        }
        let map = w.map();
        Digit::ALL
            .into_iter()
            .find(|&d| map.apply(&d.point()) == *p)
            .map(|d| self.vertex_values(&s)[d.slot()].clone())
            .ok_or_else(|| Error::Domain(format!("{p:?} is not a point of the fractal")))
    }

    /// Exact values on `V_m` for `m ≥ n`.
    pub fn restrict(&self, m: u32) -> Result<Vec<T>> {
        if m < self.level() {
            return Err(Error::Level { requested: m, minimum: self.level() });
        }
        if m == self.level() {
            return Ok(self.values.clone());
        }
        Ok(sample_on_graph(self, &*shared_graph(m)?))
    }

    /// The same function represented at level `m ≥ n`.
    pub fn refine(&self, m: u32) -> Result<Self> {
        let values = self.restrict(m)?;
        Self::interpolate(values, m)
    }

    /// `∂Φ`: the slope `(Φ(hi) − Φ(lo))·3^n` on every edge.
    pub fn weak_gradient(&self) -> EdgeDensity<T> {
        let scale: T = pow3(self.level());
        let values = (0..self.graph.edge_count())
            .map(|e| {
                let (lo, hi) = self.graph.edge_endpoints(e);
                (self.values[hi].clone() - self.values[lo].clone()) * scale.clone()
            })
            .collect();
        EdgeDensity::new(Arc::clone(&self.graph), values).expect("one value per edge")
    }

    /// `Φ ∘ Ψ_w`, a PA function of level `max(n − |w|, 0)`.
    pub fn pullback(&self, w: &Address) -> Result<Self> {
        let level = self.level().saturating_sub(w.level());
        let g = shared_graph(level)?;
        let values = sample_on_graph(&Pulled::new(self, *w), &g);
        Self::on_graph(g, values)
    }

    /// Pointwise difference, at the finer of the two levels.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        let m = self.level().max(other.level());
        let (a, b) = (self.restrict(m)?, other.restrict(m)?);
        Self::interpolate(a.into_iter().zip(b).map(|(x, y)| x - y).collect(), m)
    }

    pub fn add_constant(&self, c: &T) -> Self {
        Self { graph: Arc::clone(&self.graph), values: self.values.iter().map(|x| x.clone() + c.clone()).collect() }
    }

    pub fn scale(&self, c: &T) -> Self {
        Self { graph: Arc::clone(&self.graph), values: self.values.iter().map(|x| x.clone() * c.clone()).collect() }
    }

    pub fn is_constant(&self) -> bool {
        self.values.windows(2).all(|w| w[0] == w[1])
    }

    pub fn map_values<U: Scalar>(&self, f: impl Fn(&T) -> U) -> PaFunction<U> {
        PaFunction { graph: Arc::clone(&self.graph), values: self.values.iter().map(f).collect() }
    }

    fn cell_values(&self, cell: usize) -> [T; 5] {
        self.graph.cell_vertices(cell).map(|v| self.values[v].clone())
    }

    fn table_values(&self, w: &Address) -> [T; 5] {
        let ids = Digit::ALL.map(|d| {
            self.graph.find_vertex(&w.vertex(d)).expect("cell vertices of coarser levels are vertices of V_n")
        });
        ids.map(|v| self.values[v].clone())
    }
}

/// Descent state for a PA function: cells above level `n` are looked up in
/// the vertex table, finer cells carry their own cross values.
#[derive(Clone, Debug)]
pub enum PaState<T> {
    Coarse(Address),
    Affine([T; 5]),
}

impl<T: Scalar> CrossSampler<T> for PaFunction<T> {
    type State = PaState<T>;

    fn root(&self) -> PaState<T> {
        if self.level() == 0 {
            PaState::Affine(self.cell_values(0))
        } else {
            PaState::Coarse(Address::root())
        }
    }

    fn child(&self, s: &PaState<T>, d: Digit) -> PaState<T> {
        match s {
            PaState::Coarse(w) => {
                let c = w.child(d);
                if c.level() == self.level() {
                    PaState::Affine(self.cell_values(c.index() as usize))
                } else {
                    PaState::Coarse(c)
                }
            }
            PaState::Affine(v) => PaState::Affine(refine_cross(v, d)),
        }
    }

    fn vertex_values(&self, s: &PaState<T>) -> [T; 5] {
        match s {
            PaState::Coarse(w) => self.table_values(w),
            PaState::Affine(v) => v.clone(),
        }
    }

    fn is_constant(&self, s: &PaState<T>) -> bool {
        match s {
            PaState::Coarse(_) => false,
            PaState::Affine(v) => v.iter().all(|x| *x == v[4]),
        }
    }

    fn anchor_value(&self, w: &Address) -> T {
        let s = self.state_at(w);
        self.vertex_values(&s)[Anchor::of(w).slot()].clone()
    }
}
