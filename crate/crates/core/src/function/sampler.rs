//! Top-down evaluation of functions cell by cell.
//!
//! A [`CrossSampler`] yields, for every cell `K_w`, the function values at the
//! five vertices `Ψ_w(q_1), …, Ψ_w(q_5)`, and derives a child's state from its
//! parent's. Streaming energies and level-`m` restrictions walk this tree
//! without materialising a graph.

use crate::geometry::address::{Address, Anchor, Digit};
use crate::geometry::graph::CableGraph;
use crate::scalar::Scalar;

/// Cell-wise evaluation of a function on `K`.
pub trait CrossSampler<T: Scalar>: Sync {
    type State: Clone + Send + Sync;

    fn root(&self) -> Self::State;

    fn child(&self, state: &Self::State, d: Digit) -> Self::State;

    /// Values at the cell's corners `q_1..q_4` followed by its center.
    fn vertex_values(&self, state: &Self::State) -> [T; 5];

    /// Whether the function is constant on the whole cell. Energies skip
    /// such subtrees.
    fn is_constant(&self, _state: &Self::State) -> bool {
        false
    }

    fn state_at(&self, w: &Address) -> Self::State {
        w.digits().into_iter().fold(self.root(), |s, d| self.child(&s, d))
    }

    /// Value at the cell's attachment vertex.
    fn anchor_value(&self, w: &Address) -> T {
        let s = self.state_at(w);
        let slot = Anchor::of(w).slot();
        self.vertex_values(&s)[slot].clone()
    }
}

/// Cross values of the child `d` of a cell on which the function is affine
/// along the four arms and constant on everything finer.
pub fn refine_cross<T: Scalar>(v: &[T; 5], d: Digit) -> [T; 5] {
    let c = &v[4];
    let three = T::from_u64(3).expect("small integer");
    let two = T::from_u64(2).expect("small integer");
    let near = |x: &T| (two.clone() * c.clone() + x.clone()) / three.clone();
    if d.is_center() {
        return [near(&v[0]), near(&v[1]), near(&v[2]), near(&v[3]), c.clone()];
    }
    let i = d.slot();
    let outer = v[i].clone();
    let mid = (c.clone() + two.clone() * outer.clone()) / three.clone();
    let mut out: [T; 5] = std::array::from_fn(|_| mid.clone());
    out[i] = outer.clone();
    out[d.opposite().slot()] = near(&outer);
    out
}

/// `f ∘ Ψ_w` for a sampler `f`.
pub struct Pulled<'a, S> {
    inner: &'a S,
    path: Address,
}

impl<'a, S> Pulled<'a, S> {
    pub fn new(inner: &'a S, path: Address) -> Self {
        Self { inner, path }
    }
}

impl<T: Scalar, S: CrossSampler<T>> CrossSampler<T> for Pulled<'_, S> {
    type State = S::State;

    fn root(&self) -> Self::State {
        self.inner.state_at(&self.path)
    }

    fn child(&self, state: &Self::State, d: Digit) -> Self::State {
        self.inner.child(state, d)
    }

    fn vertex_values(&self, state: &Self::State) -> [T; 5] {
        self.inner.vertex_values(state)
    }

    fn is_constant(&self, state: &Self::State) -> bool {
        self.inner.is_constant(state)
    }
}

/// The constant function.
#[derive(Clone, Debug)]
pub struct Constant<T>(pub T);

impl<T: Scalar> CrossSampler<T> for Constant<T> {
    type State = ();

    fn root(&self) {}

    fn child(&self, _: &(), _: Digit) {}

    fn vertex_values(&self, _: &()) -> [T; 5] {
        std::array::from_fn(|_| self.0.clone())
    }

    fn is_constant(&self, _: &()) -> bool {
        true
    }
}

/// `x ↦ d(q_5, x)`, which is 1-Lipschitz but has divergent `p`-energies.
#[derive(Clone, Copy, Debug, Default)]
pub struct DistanceToCenter;

#[derive(Clone, Copy, Debug)]
pub struct DistanceState {
    anchor: Anchor,
    /// Distance of the anchor in steps of `3^{-depth}`.
    steps: u64,
    depth: u32,
}

impl<T: Scalar> CrossSampler<T> for DistanceToCenter {
    type State = DistanceState;

    fn root(&self) -> DistanceState {
        DistanceState { anchor: Anchor::Center, steps: 0, depth: 0 }
    }

    fn child(&self, s: &DistanceState, d: Digit) -> DistanceState {
        let offset = match s.anchor {
            Anchor::Center if d.is_center() => 0,
            Anchor::Center => 1,
            Anchor::Corner(a) if a == d => 0,
            Anchor::Corner(_) if d.is_center() => 2,
            Anchor::Corner(_) => 4,
        };
        DistanceState { anchor: s.anchor.step(d), steps: 3 * s.steps + offset, depth: s.depth + 1 }
    }

    fn vertex_values(&self, s: &DistanceState) -> [T; 5] {
        let den = 3i64.pow(s.depth);
        let at = |k: u64| T::from_ratio((s.steps + k) as i64, den);
        match s.anchor {
            Anchor::Center => [at(1), at(1), at(1), at(1), at(0)],
            Anchor::Corner(a) => {
                let mut v: [T; 5] = std::array::from_fn(|_| at(2));
                v[a.slot()] = at(0);
                v[4] = at(1);
                v
            }
        }
    }
}

/// Values on all of `V_m`, in the graph's vertex order.
pub fn sample_on_graph<T: Scalar, S: CrossSampler<T>>(f: &S, g: &CableGraph) -> Vec<T> {
    let m = g.level();
    let mut out: Vec<Option<T>> = vec![None; g.vertex_count()];
    let mut stack = vec![(Address::root(), f.root())];
    while let Some((w, s)) = stack.pop() {
        if w.level() == m {
            let ids = g.cell_vertices(w.index() as usize);
            for (id, v) in ids.into_iter().zip(f.vertex_values(&s)) {
                out[id] = Some(v);
            }
            continue;
        }
        for d in Digit::ALL {
            stack.push((w.child(d), f.child(&s, d)));
        }
    }
    out.into_iter().map(|v| v.expect("every vertex lies in a cell")).collect()
}

/// Attachment-vertex values of all level-`m` cells, in lexicographic order.
pub fn anchor_values<T: Scalar, S: CrossSampler<T>>(f: &S, m: u32) -> Vec<T> {
    let mut out = Vec::with_capacity(5usize.pow(m));
    let mut stack = vec![(0u32, Anchor::Center, f.root())];
    while let Some((k, a, s)) = stack.pop() {
        if k == m {
            out.push(f.vertex_values(&s)[a.slot()].clone());
            continue;
        }
        for d in Digit::ALL.into_iter().rev() {
            stack.push((k + 1, a.step(d), f.child(&s, d)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::graph::CableGraph;
    use num_rational::BigRational;

    #[test]
    fn distance_sampler_matches_root_distances() {
        let g = CableGraph::build(3).unwrap();
        let vals: Vec<BigRational> = sample_on_graph(&DistanceToCenter, &g);
        for v in 0..g.vertex_count() {
            assert_eq!(vals[v], BigRational::from_ratio(g.root_steps(v) as i64, 27));
        }
    }

    #[test]
    fn refinement_keeps_shared_vertices_consistent() {
        let v: [f64; 5] = [-1.0, 1.0, -1.0, 1.0, 0.0];
        let c5 = refine_cross(&v, Digit::CENTER);
        let c2 = refine_cross(&v, Digit::Q2);
        // J_2 is corner q_2 of the center cell and corner q_4 of cell 2
        assert_eq!(c5[1], c2[3]);
        assert_eq!(c2, [2.0 / 3.0, 1.0, 2.0 / 3.0, 1.0 / 3.0, 2.0 / 3.0]);
    }
}
