//! Gauss–Legendre rules and an adaptive bisection driver for vector-valued
//! complex integrands.
//!
//! Rules are generic over the real scalar; the adaptive driver works on
//! `f64` because the period pipeline does.

use num_complex::Complex;
use num_traits::{Float, FloatConst, Zero};
use std::ops::{Add, Mul};

use crate::error::{Error, Result};

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre<T> {
    nodes: Vec<T>,
    weights: Vec<T>,
}

impl<T: Float + FloatConst> GaussLegendre<T> {
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Chebyshev-like initial guesses `cos(pi (i + 3/4) / (n + 1/2))`.
    pub fn new(n: usize) -> Self {
        assert!(n > 0, "rule needs at least one node");
        let two = T::one() + T::one();
        let nt = T::from(n).unwrap();
        let quarter = T::from(0.25).unwrap();
        let half = T::from(0.5).unwrap();
        let eps = T::epsilon() * T::from(4.0).unwrap();
        let mut nodes = vec![T::zero(); n];
        let mut weights = vec![T::zero(); n];
        for i in 0..n.div_ceil(2) {
            let it = T::from(i).unwrap();
            let mut x = (T::PI() * (it + T::one() - quarter) / (nt + half)).cos();
            let mut dp = T::one();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x = x - dx;
                if dx.abs() <= eps {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != T::zero() {
                dp = d;
            }
            let w = two / ((T::one() - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = T::zero();
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    /// Nodes and weights mapped affinely onto `[a, b]`.
    pub fn mapped(&self, a: T, b: T) -> impl Iterator<Item = (T, T)> + '_ {
        let half = (b - a) / (T::one() + T::one());
        let mid = (a + b) / (T::one() + T::one());
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(&x, &w)| (mid + half * x, half * w))
    }

    pub fn integrate<V, F>(&self, a: T, b: T, mut f: F) -> V
    where
        V: Zero + Add<Output = V> + Mul<T, Output = V>,
        F: FnMut(T) -> V,
    {
        self.mapped(a, b).fold(V::zero(), |acc, (x, w)| acc + f(x) * w)
    }
}

fn legendre_with_derivative<T: Float>(n: usize, x: T) -> (T, T) {
    let mut p0 = T::one();
    let mut p1 = x;
    for k in 2..=n {
        let kt = T::from(k).unwrap();
        let p2 = ((kt + kt - T::one()) * x * p1 - (kt - T::one()) * p0) / kt;
        p0 = p1;
        p1 = p2;
    }
    let nt = T::from(n).unwrap();
    let d = nt * (x * p1 - p0) / (x * x - T::one());
    (p1, d)
}

/// Outcome of [`adaptive_integrate`].
#[derive(Debug, Clone)]
pub struct AdaptiveResult {
    pub value: Vec<Complex<f64>>,
    /// Sum of the per-interval |Q_n - Q_2n| estimates.
    pub error_estimate: f64,
    pub intervals: usize,
}

/// Adaptive bisection on `[a, b]` comparing an `n`-point and a `2n`-point
/// rule on every subinterval. Accepts an interval when the max-norm
/// difference is below `tol * (b_i - a_i) / (b - a)` (absolute) or the same
/// fraction of `rel_tol * |Q|`.
pub fn adaptive_integrate<F>(
    coarse: &GaussLegendre<f64>,
    fine: &GaussLegendre<f64>,
    a: f64,
    b: f64,
    dim: usize,
    tol: f64,
    max_depth: usize,
    mut f: F,
) -> Result<AdaptiveResult>
where
    F: FnMut(f64, &mut [Complex<f64>]),
{
    let mut buf = vec![Complex::new(0.0, 0.0); dim];
    let mut eval = |rule: &GaussLegendre<f64>, lo: f64, hi: f64, buf: &mut [Complex<f64>]| {
        let mut acc = vec![Complex::new(0.0, 0.0); dim];
        for (x, w) in rule.mapped(lo, hi) {
            f(x, buf);
            for (s, v) in acc.iter_mut().zip(buf.iter()) {
                *s += *v * w;
            }
        }
        acc
    };
    let total = (b - a).abs();
    let mut value = vec![Complex::new(0.0, 0.0); dim];
    let mut err_sum = 0.0;
    let mut intervals = 0;
    let mut stack = vec![(a, b, 0usize)];
    while let Some((lo, hi, depth)) = stack.pop() {
        let q1 = eval(coarse, lo, hi, &mut buf);
        let q2 = eval(fine, lo, hi, &mut buf);
        let diff = q1.iter().zip(&q2).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let scale = q2.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let frac = if total > 0.0 { (hi - lo).abs() / total } else { 1.0 };
        let target = tol * frac * scale.max(1.0);
        if diff <= target || depth >= max_depth {
            if depth >= max_depth && diff > target {
                return Err(Error::QuadratureBudgetExceeded { tol, estimate: diff });
            }
            for (s, v) in value.iter_mut().zip(&q2) {
                *s += v;
            }
            err_sum += diff;
            intervals += 1;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    Ok(AdaptiveResult {
        value,
        error_estimate: err_sum,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn weights_sum_to_two() {
        for n in [1, 2, 5, 20, 40] {
            let r = GaussLegendre::<f64>::new(n);
            let s: f64 = r.weights().iter().sum();
            assert_relative_eq!(s, 2.0, epsilon = 1e-13);
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        let r = GaussLegendre::<f64>::new(6);
        let v: f64 = r.integrate(0.0, 2.0, |x| x.powi(11));
        assert_relative_eq!(v, 2f64.powi(12) / 12.0, max_relative = 1e-13);
    }

    #[test]
    fn f32_rule_is_usable() {
        let r = GaussLegendre::<f32>::new(8);
        let v: f32 = r.integrate(0.0, 1.0, |x| x.exp());
        assert!((v - (1f32.exp() - 1.0)).abs() < 1e-5);
    }

    #[test]
    fn adaptive_handles_nearby_pole() {
        let c = GaussLegendre::new(20);
        let f = GaussLegendre::new(40);
        // ∫_0^1 dx / (x + a) = ln((1 + a) / a)
        let res = adaptive_integrate(&c, &f, 0.0, 1.0, 1, 1e-12, 40, |x, out| {
            out[0] = Complex::new(1.0 / (x + 1e-3), 0.0);
        })
        .unwrap();
        assert_relative_eq!(res.value[0].re, (1.001f64 / 1e-3).ln(), max_relative = 1e-11);
    }
}
