//! Functions sampled at the attachment vertex of every level-`m` cell.

use crate::error::{Error, Result};
use crate::function::sampler::{anchor_values, CrossSampler};
use crate::geometry::address::Address;
use crate::geometry::graph::CableGraph;
use crate::scalar::{pairwise_sum, pow5, Exponent, Scalar};

/// One value per level-`m` cell, taken at the cell's attachment vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct CellFunction<T> {
    level: u32,
    values: Vec<T>,
}

impl<T: Scalar> CellFunction<T> {
    pub fn new(level: u32, values: Vec<T>) -> Result<Self> {
        let expected = 5usize.pow(level);
        if values.len() != expected {
            return Err(Error::Shape { expected, found: values.len() });
        }
        Ok(Self { level, values })
    }

    pub fn from_sampler<S: CrossSampler<T>>(f: &S, m: u32) -> Self {
        Self { level: m, values: anchor_values(f, m) }
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, w: &Address) -> Result<T> {
        if w.level() != self.level {
            return Err(Error::Level { requested: w.level(), minimum: self.level });
        }
        Ok(self.values[w.index() as usize].clone())
    }

    /// `f ∘ Ψ_w` at level `m − |w|`.
    pub fn pullback(&self, w: &Address) -> Result<Self> {
        if w.level() > self.level {
            return Err(Error::Level { requested: w.level(), minimum: 0 });
        }
        let r = w.descendant_range(self.level);
        Ok(Self { level: self.level - w.level(), values: self.values[r.start as usize..r.end as usize].to_vec() })
    }

    /// `Σ_cells |value|^p · 5^{-m}`.
    pub fn quadrature(&self, p: Exponent) -> Result<T> {
        T::check_exponent(p)?;
        let terms: Vec<T> = self.values.iter().map(|v| v.abs_pow(p)).collect();
        Ok(pairwise_sum(&terms) / pow5::<T>(self.level))
    }

    /// `Σ_cells value · 5^{-m}`.
    pub fn mean(&self) -> T {
        pairwise_sum(&self.values) / pow5::<T>(self.level)
    }

    /// Vertex values used when a discrete energy is requested for cell data:
    /// a vertex takes the value of the cell attached there, or otherwise of
    /// the cell containing it.
    pub fn vertex_surrogate(&self, g: &CableGraph) -> Result<Vec<T>> {
        if g.level() != self.level {
            return Err(Error::Level { requested: g.level(), minimum: self.level });
        }
        let mut out: Vec<Option<T>> = vec![None; g.vertex_count()];
        for (c, a) in g.anchors().into_iter().enumerate() {
            out[a] = Some(self.values[c].clone());
        }
        for c in 0..g.cell_count() {
            for v in g.cell_vertices(c) {
                if out[v].is_none() {
                    out[v] = Some(self.values[c].clone());
                }
            }
        }
        Ok(out.into_iter().map(|v| v.expect("every vertex lies in a cell")).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::pa::PaFunction;
    use crate::geometry::graph::shared_graph;
    use num_rational::BigRational;

    #[test]
    fn anchors_of_the_cross() {
        let f = PaFunction::<BigRational>::cross();
        let c = CellFunction::from_sampler(&f, 2);
        assert_eq!(c.values().len(), 25);
        for i in 0..25u64 {
            let w = Address::from_index(2, i).unwrap();
            assert_eq!(c.value(&w).unwrap(), f.evaluate_cell(&w));
        }
        let p = c.pullback(&"5".parse().unwrap()).unwrap();
        assert_eq!(p.level(), 1);
        assert_eq!(p.values(), &c.values()[20..25]);
    }

    #[test]
    fn quadrature_of_constants() {
        let c = CellFunction::new(2, vec![-2.0f64; 25]).unwrap();
        assert_eq!(c.quadrature(Exponent::new(3.0).unwrap()).unwrap(), 8.0);
        assert!(CellFunction::new(1, vec![0.0f64; 4]).is_err());
    }

    #[test]
    fn surrogate_of_pa_data_is_exact() {
        let f = PaFunction::<BigRational>::cross();
        let g = shared_graph(2).unwrap();
        let c = CellFunction::from_sampler(&f, 2);
        let s = c.vertex_surrogate(&g).unwrap();
        let exact = f.restrict(2).unwrap();
        // anchors carry exact values; leaf corners carry their cell's anchor value
        for (a, v) in g.anchors().into_iter().map(|a| (a, &exact[a])) {
            assert_eq!(&s[a], v);
        }
    }
}
