//! Analytic continuation of `y` along straight segments and the three kinds
//! of path pieces used for periods and Abel maps: ordinary segments,
//! segments ending at a branch point (`x = b + (x_ref - b) u^r`), and the ray
//! from infinity (`x = x_1 t^{-r}`). Each substitution leaves an integer,
//! nonnegative power of the parameter, so Gauss-Legendre converges
//! geometrically.

use crate::curve::{CyclicCurveSpec, FunctionExpr, Term};
use crate::error::{Error, Result};
use crate::quadrature::{adaptive_integrate, GaussLegendre};
use crate::C64;

/// Quadrature settings shared by all path pieces.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub coarse: GaussLegendre<f64>,
    pub fine: GaussLegendre<f64>,
    pub tol: f64,
    pub max_depth: usize,
}

impl QuadratureRule {
    pub fn new(coarse: usize, fine: usize, tol: f64) -> Self {
        QuadratureRule {
            coarse: GaussLegendre::new(coarse),
            fine: GaussLegendre::new(fine),
            tol,
            max_depth: 30,
        }
    }

    pub fn standard() -> Self {
        Self::new(20, 40, 1e-10)
    }

    /// Same tolerance at twice the orders.
    pub fn doubled() -> Self {
        Self::new(40, 80, 1e-10)
    }

    fn integrate<F: FnMut(f64, &mut [C64])>(&self, dim: usize, f: F) -> Result<Vec<C64>> {
        Ok(adaptive_integrate(&self.coarse, &self.fine, 0.0, 1.0, dim, self.tol, self.max_depth, f)?.value)
    }
}

/// `y(x)` continued along the straight segment from `(x0, y0)`.
pub fn continue_y(spec: &CyclicCurveSpec, x0: C64, y0: C64, x: C64) -> C64 {
    let r = spec.r() as f64;
    let log: C64 = spec
        .branch()
        .iter()
        .map(|bp| ((x - bp.b) / (x0 - bp.b)).ln() * (bp.m as f64 / r))
        .sum();
    y0 * log.exp()
}

/// Distance from `p` to the segment `[a, b]`.
pub fn segment_distance(p: C64, a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let t = (((p - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Smallest distance from the segment to a branch point, skipping `skip`.
pub fn segment_clearance(spec: &CyclicCurveSpec, a: C64, b: C64, skip: &[usize]) -> f64 {
    spec.branch()
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, bp)| segment_distance(bp.b, a, b))
        .fold(f64::INFINITY, f64::min)
}

fn eval_terms(spec: &CyclicCurveSpec, nu: &[FunctionExpr], x: C64, y: C64, out: &mut [C64]) {
    for (o, f) in out.iter_mut().zip(nu) {
        *o = f.evaluate_xy(spec, x, y);
    }
}

/// `int nu` along the segment `x0 -> x1` starting on the branch `y0`.
/// Returns the integrals and `y` at `x1`.
pub fn integrate_segment(
    spec: &CyclicCurveSpec,
    nu: &[FunctionExpr],
    x0: C64,
    y0: C64,
    x1: C64,
    rule: &QuadratureRule,
) -> Result<(Vec<C64>, C64)> {
    let dx = x1 - x0;
    let val = rule.integrate(nu.len(), |t, out| {
        let x = x0 + dx * t;
        let y = continue_y(spec, x0, y0, x);
        eval_terms(spec, nu, x, y, out);
        for o in out.iter_mut() {
            *o *= dx;
        }
    })?;
    Ok((val, continue_y(spec, x0, y0, x1)))
}

fn term_at_branch(spec: &CyclicCurveSpec, t: &Term, s: usize, x: C64, d: C64, y_rest: C64) -> (C64, i32) {
    let r = spec.r() as i32;
    let bs = spec.branch()[s];
    let mut upow = 0i32;
    let mut v = t.coeff;
    if bs.b == C64::new(0.0, 0.0) {
        v *= d.powu(t.x_exp);
        upow += r * t.x_exp as i32;
    } else {
        v *= x.powu(t.x_exp);
    }
    for (i, bp) in spec.branch().iter().enumerate() {
        let p = t.lin_exps.get(i).copied().unwrap_or(0);
        if p == 0 {
            continue;
        }
        if i == s {
            v *= d.powi(p);
            upow += r * p;
        } else {
            v *= (x - bp.b).powi(p);
        }
    }
    v *= y_rest.powi(t.y_exp);
    upow += t.y_exp * bs.m as i32;
    (v, upow)
}

/// `int_{b_s}^{x_ref} nu` on the branch with `y(x_ref) = y_ref`, via
/// `x = b_s + (x_ref - b_s) u^r`.
pub fn integrate_from_branch(
    spec: &CyclicCurveSpec,
    nu: &[FunctionExpr],
    s: usize,
    x_ref: C64,
    y_ref: C64,
    rule: &QuadratureRule,
) -> Result<Vec<C64>> {
    let r = spec.r() as i32;
    let bs = spec.branch()[s];
    let d = x_ref - bs.b;
    // check integrability once
    for f in nu {
        for t in &f.terms {
            let (_, upow) = term_at_branch(spec, t, s, x_ref, d, y_ref);
            if upow + r - 1 < 0 {
                return Err(Error::Precondition(format!(
                    "integrand not integrable at branch point {s} (u-power {})",
                    upow + r - 1
                )));
            }
        }
    }
    rule.integrate(nu.len(), |u, out| {
        let x = bs.b + d * u.powi(r);
        let rest: C64 = spec
            .branch()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != s)
            .map(|(_, bp)| ((x - bp.b) / (x_ref - bp.b)).ln() * (bp.m as f64 / r as f64))
            .sum();
        let y_rest = y_ref * rest.exp();
        for (o, f) in out.iter_mut().zip(nu) {
            *o = f
                .terms
                .iter()
                .map(|t| {
                    let (v, upow) = term_at_branch(spec, t, s, x, d, y_rest);
                    v * u.powi(upow + r - 1) * (d * r as f64)
                })
                .sum();
        }
    })
}

/// `int_inf^{x1} nu` along the ray `x = x1 t^{-r}`, `t` in `(0, 1]`, on the
/// branch with `y(x1) = y1`. The ray must avoid the branch points.
pub fn integrate_ray(
    spec: &CyclicCurveSpec,
    nu: &[FunctionExpr],
    x1: C64,
    y1: C64,
    rule: &QuadratureRule,
) -> Result<Vec<C64>> {
    let r = spec.r() as i32;
    let s = spec.s() as i32;
    for f in nu {
        for t in &f.terms {
            let lin: i32 = t.lin_exps.iter().sum();
            let tpow = -r * (t.x_exp as i32 + lin) - s * t.y_exp - r - 1;
            if tpow < 0 {
                return Err(Error::Precondition(format!(
                    "integrand has a pole at infinity (t-power {tpow})"
                )));
            }
        }
    }
    rule.integrate(nu.len(), |t, out| {
        let tr = t.powi(r);
        let ratios: Vec<C64> = spec.branch().iter().map(|bp| (x1 - bp.b * tr) / (x1 - bp.b)).collect();
        let log: C64 = spec
            .branch()
            .iter()
            .zip(&ratios)
            .map(|(bp, q)| q.ln() * (bp.m as f64 / r as f64))
            .sum();
        let y_unit = y1 * log.exp(); // y = y_unit * t^{-s}
        for (o, f) in out.iter_mut().zip(nu) {
            *o = f
                .terms
                .iter()
                .map(|term| {
                    let mut v = term.coeff * x1.powu(term.x_exp);
                    let mut lin = 0;
                    for (i, bp) in spec.branch().iter().enumerate() {
                        let p = term.lin_exps.get(i).copied().unwrap_or(0);
                        if p != 0 {
                            v *= (x1 - bp.b * tr).powi(p);
                            lin += p;
                        }
                    }
                    v *= y_unit.powi(term.y_exp);
                    let tpow = -r * (term.x_exp as i32 + lin) - s * term.y_exp - r - 1;
                    v * (-(r as f64) * x1) * t.powi(tpow)
                })
                .sum();
        }
    })
}
