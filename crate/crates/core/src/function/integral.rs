//! `μ`-integrals of piecewise-affine functions.
//!
//! On one cell a 0-PA function is affine on the four arms and constant on
//! every finer branch. Splitting the cell into its five children leaves the
//! center child in the same family and turns each corner child into a
//! function that is affine along one diagonal and constant on the branches.
//! For the latter, the push-forward `ρ` of `μ` onto the diagonal parameter
//! satisfies
//!
//! ```text
//! ρ = (ρ∘S_1⁻¹ + ρ∘S_2⁻¹ + ρ∘S_3⁻¹)/5 + (2/5)·δ_{1/2}
//! ```
//!
//! with `S_j` the three third-maps of `[0, 1]`. Its central moments close
//! under a linear recursion, which gives `∫|a + (b−a)t|^p dρ(t)` as a
//! binomial series whenever the integrand does not change sign, and a
//! self-similar subdivision otherwise.

use std::sync::OnceLock;

use serde::Serialize;

use crate::function::pa::PaFunction;
use crate::function::sampler::CrossSampler;
use crate::geometry::address::{Address, Anchor, Digit};
use crate::scalar::{pairwise_sum, pow5, Exponent, Real, Scalar};

const MOMENTS: usize = 240;
const MAX_DEPTH: u32 = 60;

/// Central moments `E[X^l]`, `X = t − 1/2`, of the diagonal measure `ρ`.
pub fn diagonal_moments() -> &'static [f64] {
    static M: OnceLock<Vec<f64>> = OnceLock::new();
    M.get_or_init(|| {
        let mut binom = vec![vec![1.0f64]];
        for l in 1..MOMENTS {
            let prev = &binom[l - 1];
            let mut row = vec![1.0; l + 1];
            for i in 1..l {
                row[i] = prev[i - 1] + prev[i];
            }
            binom.push(row);
        }
        let mut mu = vec![0.0f64; MOMENTS];
        mu[0] = 1.0;
        for l in (2..MOMENTS).step_by(2) {
            let s: f64 = (0..l).step_by(2).map(|i| 2.0 * binom[l][i] * mu[i]).sum();
            mu[l] = s / 5.0 * 3f64.powi(-(l as i32)) / (1.0 - 3f64.powi(1 - l as i32) / 5.0);
        }
        mu
    })
}

fn moment<T: Real>(l: usize) -> T {
    T::from(diagonal_moments()[l]).expect("finite moment")
}

/// `E|m + sX|^p` as a binomial series; requires `|s|/2 ≤ |m|` (and for
/// non-integer `p` comfortably less, for convergence speed).
fn binomial_series<T: Real>(m: T, s: T, p: Exponent) -> T {
    let pf = T::from(p.get()).expect("finite");
    let r2 = (s / m) * (s / m);
    let (mut sum, mut coef, mut rp) = (T::zero(), T::one(), T::one());
    let eps = T::from(1e-19).expect("finite");
    let mut l = 0usize;
    while l < MOMENTS {
        let term = coef * rp * moment::<T>(l);
        sum = sum + term;
        if let Some(k) = p.as_integer() {
            if l + 2 > k as usize {
                break;
            }
        }
        if l > 0 && term.abs() <= eps * sum.abs() {
            break;
        }
        let lf = T::from(l).expect("small");
        coef = coef * (pf - lf) * (pf - lf - T::one()) / ((lf + T::one()) * (lf + T::from(2).expect("small")));
        rp = rp * r2;
        l += 2;
    }
    m.abs_pow(p) * sum
}

/// `E(m + sX)^k` for even `k`, as a polynomial (valid for any `m`).
fn even_polynomial<T: Real>(m: T, s: T, k: u32) -> T {
    let mut sum = T::zero();
    let mut coef = T::one();
    for l in (0..=k as usize).step_by(2) {
        sum = sum + coef * m.powi((k as usize - l) as i32) * s.powi(l as i32) * moment::<T>(l);
        let lf = T::from(l).expect("small");
        let kf = T::from(k).expect("small");
        coef = coef * (kf - lf) * (kf - lf - T::one()) / ((lf + T::one()) * (lf + T::from(2).expect("small")));
    }
    sum
}

/// `∫|a + (b−a)t|^p dρ(t)`: the integral over a cell of a function affine
/// along one diagonal (from `a` to `b`) and constant on the branches.
pub fn diagonal_integral<T: Real>(a: T, b: T, p: Exponent) -> T {
    diagonal_rec(a, b, p, 0)
}

fn diagonal_rec<T: Real>(a: T, b: T, p: Exponent, depth: u32) -> T {
    let two = T::from(2).expect("small");
    let three = T::from(3).expect("small");
    let five = T::from(5).expect("small");
    let m = (a + b) / two;
    let s = b - a;
    if s == T::zero() {
        return m.abs_pow(p);
    }
    if p.is_even_integer() {
        return even_polynomial(m, s, p.as_integer().expect("integer"));
    }
    let q = s.abs() / (two * m.abs());
    let safe = if p.as_integer().is_some() { T::one() } else { T::from(0.5).expect("finite") };
    if m != T::zero() && q <= safe {
        return binomial_series(m, s, p);
    }
    if depth >= MAX_DEPTH {
        return m.abs_pow(p);
    }
    let c1 = (two * a + b) / three;
    let c2 = (a + two * b) / three;
    (diagonal_rec(a, c1, p, depth + 1)
        + diagonal_rec(c1, c2, p, depth + 1)
        + diagonal_rec(c2, b, p, depth + 1)
        + two * m.abs_pow(p))
        / five
}

/// `∫_K |f|^p dμ` for the 0-PA function with values `v` at `q_1..q_4, q_5`.
pub fn cross_integral<T: Real>(v: &[T; 5], p: Exponent) -> T {
    let c = v[4];
    if v.iter().all(|x| *x == c) {
        return c.abs_pow(p);
    }
    let three = T::from(3).expect("small");
    let fifth = T::one() / T::from(5).expect("small");
    if c == T::zero() {
        // exact scaling: the k-th ring is the first one shrunk by 3^{-k}
        let ring: T = v[..4].iter().map(|&x| diagonal_integral(x / three, x, p)).fold(T::zero(), |a, b| a + b);
        let decay = fifth * T::from(3f64.powf(-p.get())).expect("finite");
        return ring * fifth / (T::one() - decay);
    }
    let mut total = T::zero();
    let mut weight = fifth;
    let mut scale = T::one();
    let tiny = T::from(1e-22).expect("finite");
    while weight > tiny {
        let ring = v[..4]
            .iter()
            .map(|&x| diagonal_integral(c + (x - c) * scale / three, c + (x - c) * scale, p))
            .fold(T::zero(), |a, b| a + b);
        total = total + weight * ring;
        weight = weight * fifth;
        scale = scale / three;
    }
    // the remaining central cell is within (max|v − c|)·scale of c
    total + weight * T::from(5).expect("small") * c.abs_pow(p)
}

/// `∫_K |Φ − shift|^p dμ` by the self-similar recursion.
pub fn mu_integral_shifted<T: Real>(f: &PaFunction<T>, p: Exponent, shift: T) -> T {
    let g = f.graph();
    let terms: Vec<T> = (0..g.cell_count())
        .map(|c| {
            let v = g.cell_vertices(c).map(|i| f.values()[i] - shift);
            cross_integral(&v, p)
        })
        .collect();
    pairwise_sum(&terms) / pow5::<T>(f.level())
}

/// `∫_K |Φ|^p dμ` by the self-similar recursion.
pub fn mu_integral<T: Real>(f: &PaFunction<T>, p: Exponent) -> T {
    mu_integral_shifted(f, p, T::zero())
}

/// `∫_{K_w} |Φ − shift|^p dμ`.
pub fn mu_integral_on_cell<T: Real>(f: &PaFunction<T>, w: &Address, p: Exponent, shift: T) -> crate::Result<T> {
    let g = f.pullback(w)?;
    Ok(mu_integral_shifted(&g, p, shift) / pow5::<T>(w.level()))
}

/// `∫_K Φ dμ`, exact in every scalar type: on a 0-PA cell the mean is
/// `c + Σ_i (v_i − c)/7`.
pub fn mu_mean<T: Scalar>(f: &PaFunction<T>) -> T {
    let g = f.graph();
    let seven = T::from_u64(7).expect("small");
    let terms: Vec<T> = (0..g.cell_count())
        .map(|c| {
            let v = g.cell_vertices(c).map(|i| f.values()[i].clone());
            let c = v[4].clone();
            let spread = v[..4].iter().fold(T::zero(), |acc, x| acc + (x.clone() - c.clone()));
            c + spread / seven.clone()
        })
        .collect();
    pairwise_sum(&terms) / pow5::<T>(f.level())
}

/// A quadrature value with a rigorous error bound.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct Quadrature<T> {
    pub value: T,
    pub bound: T,
}

/// `Σ_cells |f(anchor) − shift|^p · 5^{-m}` with the bound
/// `Σ_cells 5^{-m} · sup_{x ∈ cell} ||f(x) − shift|^p − |f(anchor) − shift|^p|`,
/// using that on a cell the function ranges between its vertex values (true
/// for PA functions of level ≤ `m`, the distance function and the staircase).
pub fn quadrature<T: Real, S: CrossSampler<T>>(f: &S, p: Exponent, m: u32, shift: T) -> Quadrature<T> {
    let mut values = Vec::with_capacity(5usize.pow(m));
    let mut bounds = Vec::with_capacity(5usize.pow(m));
    let mut stack = vec![(0u32, Anchor::Center, f.root())];
    while let Some((k, a, s)) = stack.pop() {
        if k == m {
            let v = f.vertex_values(&s);
            let g = |x: T| (x - shift).abs_pow(p);
            let lo = v.iter().copied().fold(T::infinity(), T::min);
            let hi = v.iter().copied().fold(T::neg_infinity(), T::max);
            let ga = g(v[a.slot()]);
            let gmax = g(lo).max(g(hi));
            let gmin = if lo <= shift && shift <= hi { T::zero() } else { g(lo).min(g(hi)) };
            values.push(ga);
            bounds.push((gmax - ga).max(ga - gmin));
            continue;
        }
        for d in Digit::ALL.into_iter().rev() {
            stack.push((k + 1, a.step(d), f.child(&s, d)));
        }
    }
    let w = pow5::<T>(m);
    Quadrature { value: pairwise_sum(&values) / w, bound: pairwise_sum(&bounds) / w }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    fn p(x: f64) -> Exponent {
        Exponent::new(x).unwrap()
    }

    #[test]
    fn second_moment() {
        assert!((diagonal_moments()[2] - 1.0 / 21.0).abs() < 1e-16);
        assert_eq!(diagonal_moments()[3], 0.0);
    }

    #[test]
    fn ramp_and_cross() {
        assert!((diagonal_integral(0.0f64, 1.0, p(2.0)) - 25.0 / 84.0).abs() < 1e-15);
        let cross = PaFunction::<f64>::cross();
        assert!((mu_integral(&cross, p(2.0)) - 8.0 / 21.0).abs() < 1e-14);
    }

    #[test]
    fn functional_equation_holds_for_odd_and_fractional_p() {
        for &pp in &[1.0, 1.5, 3.0, 2.5] {
            for &(a, b) in &[(-1.0, 2.0), (0.3, -0.7), (0.0, 1.0), (2.0, 3.0)] {
                let e = p(pp);
                let lhs = diagonal_integral(a, b, e);
                let (c1, c2, m) = ((2.0 * a + b) / 3.0, (a + 2.0 * b) / 3.0, (a + b) / 2.0);
                let rhs = (diagonal_integral(a, c1, e)
                    + diagonal_integral(c1, c2, e)
                    + diagonal_integral(c2, b, e)
                    + 2.0 * f64::abs(m).powf(pp))
                    / 5.0;
                assert!((lhs - rhs).abs() < 1e-13 * lhs.abs().max(1.0), "p={pp} a={a} b={b}");
            }
        }
    }

    #[test]
    fn exact_mean() {
        let f = PaFunction::<BigRational>::from_cross_values([0, 0, 0, 7, 0].map(|x| BigRational::from_ratio(x, 1)));
        assert_eq!(mu_mean(&f), BigRational::from_ratio(1, 1));
    }

    #[test]
    fn quadrature_brackets_exact_value() {
        let f = PaFunction::<f64>::cross();
        let exact = 8.0 / 21.0;
        let mut prev = f64::INFINITY;
        for m in 2..6 {
            let q = quadrature(&f, p(2.0), m, 0.0);
            assert!((q.value - exact).abs() <= q.bound + 1e-12);
            assert!(q.bound < prev);
            prev = q.bound;
        }
    }
}
