//! Finite sums `sum c x^a prod (x - b_i)^{p_i} y^k` on a cyclic curve, with
//! exact valuations at infinity and at the branch places.

use std::collections::BTreeMap;

use super::{CyclicCurveSpec, PointKind, PointOnCurve};
use crate::error::{Error, Result};
use crate::C64;

/// Relative size below which a sum of leading coefficients counts as a
/// cancellation.
const CANCEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: C64,
    pub x_exp: u32,
    /// Exponent of `(x - b_i)`, one entry per branch point (missing = 0).
    pub lin_exps: Vec<i32>,
    pub y_exp: i32,
}

impl Term {
    fn lin(&self, i: usize) -> i32 {
        self.lin_exps.get(i).copied().unwrap_or(0)
    }

    fn weight(&self, spec: &CyclicCurveSpec) -> i64 {
        let lin: i64 = self.lin_exps.iter().map(|&p| p as i64).sum();
        spec.r() as i64 * (self.x_exp as i64 + lin) + spec.s() as i64 * self.y_exp as i64
    }

    fn branch_valuation(&self, spec: &CyclicCurveSpec, i: usize) -> i64 {
        let bp = spec.branch()[i];
        let x_part = if bp.b == C64::new(0.0, 0.0) {
            self.x_exp as i64
        } else {
            0
        };
        spec.r() as i64 * (self.lin(i) as i64 + x_part) + self.y_exp as i64 * bp.m as i64
    }

    /// Coefficient of `t^{valuation}` in the local parameter at `b_i`, where
    /// `x - b_i = t^r` and `y = t^{m_i} u(t)`, `u(0)` the principal root of
    /// `prod_{j != i} (b_i - b_j)^{m_j}`.
    fn branch_leading(&self, spec: &CyclicCurveSpec, i: usize) -> C64 {
        let bi = spec.branch()[i].b;
        let r = spec.r() as i32;
        let mut c = self.coeff;
        if bi != C64::new(0.0, 0.0) {
            c *= bi.powu(self.x_exp);
        }
        let mut u_r = C64::new(1.0, 0.0);
        for (j, bp) in spec.branch().iter().enumerate() {
            if j == i {
                continue;
            }
            let d = bi - bp.b;
            c *= d.powi(self.lin(j));
            u_r *= d.powu(bp.m);
        }
        if self.y_exp % r == 0 {
            c * u_r.powi(self.y_exp / r)
        } else {
            c * (u_r.ln() / r as f64 * self.y_exp as f64).exp()
        }
    }

    fn eval_generic(&self, spec: &CyclicCurveSpec, x: C64, y: C64) -> C64 {
        let mut v = self.coeff * x.powu(self.x_exp) * y.powi(self.y_exp);
        for (i, bp) in spec.branch().iter().enumerate() {
            let p = self.lin(i);
            if p != 0 {
                v *= (x - bp.b).powi(p);
            }
        }
        v
    }

    fn key(&self, n: usize) -> (u32, Vec<i32>, i32) {
        let lin = (0..n).map(|i| self.lin(i)).collect();
        (self.x_exp, lin, self.y_exp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Place {
    Infinity,
    Branch(usize),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FunctionExpr {
    pub terms: Vec<Term>,
}

impl FunctionExpr {
    pub fn monomial(coeff: C64, x_exp: u32, lin_exps: Vec<i32>, y_exp: i32) -> Self {
        FunctionExpr {
            terms: vec![Term {
                coeff,
                x_exp,
                lin_exps,
                y_exp,
            }],
        }
    }

    pub fn one() -> Self {
        Self::monomial(C64::new(1.0, 0.0), 0, vec![], 0)
    }

    pub fn x_pow(a: u32) -> Self {
        Self::monomial(C64::new(1.0, 0.0), a, vec![], 0)
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    pub fn mul(&self, other: &FunctionExpr) -> FunctionExpr {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                let n = a.lin_exps.len().max(b.lin_exps.len());
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    x_exp: a.x_exp + b.x_exp,
                    lin_exps: (0..n).map(|i| a.lin(i) + b.lin(i)).collect(),
                    y_exp: a.y_exp + b.y_exp,
                });
            }
        }
        FunctionExpr { terms }.simplified()
    }

    pub fn add(&self, other: &FunctionExpr) -> FunctionExpr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        FunctionExpr { terms }.simplified()
    }

    pub fn scale(&self, c: C64) -> FunctionExpr {
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                coeff: t.coeff * c,
                ..t.clone()
            })
            .collect();
        FunctionExpr { terms }.simplified()
    }

    /// Merges identical monomials and drops exact zeros. Syntactically
    /// different forms of the same function (`y^5` versus `prod (x-b_i)^{m_i}`)
    /// are not identified.
    pub fn simplified(&self) -> FunctionExpr {
        let n = self.terms.iter().map(|t| t.lin_exps.len()).max().unwrap_or(0);
        let mut acc: BTreeMap<(u32, Vec<i32>, i32), C64> = BTreeMap::new();
        for t in &self.terms {
            *acc.entry(t.key(n)).or_default() += t.coeff;
        }
        let terms = acc
            .into_iter()
            .filter(|(_, c)| *c != C64::new(0.0, 0.0))
            .map(|((x_exp, mut lin, y_exp), coeff)| {
                while lin.last() == Some(&0) {
                    lin.pop();
                }
                Term {
                    coeff,
                    x_exp,
                    lin_exps: lin,
                    y_exp,
                }
            })
            .collect();
        FunctionExpr { terms }
    }

    /// Largest term weight `r (a + sum p_i) + s k`; equals `-ord_inf` unless
    /// the leading terms cancel.
    pub fn weight(&self, spec: &CyclicCurveSpec) -> i64 {
        self.terms.iter().map(|t| t.weight(spec)).max().unwrap_or(i64::MIN)
    }

    /// Exact order at `place`. Sums use the minimum over terms; if the
    /// leading coefficients of the minimal terms cancel the result is
    /// `CancellationDetected`. The zero function has valuation `i64::MAX`.
    pub fn valuation(&self, spec: &CyclicCurveSpec, place: Place) -> Result<i64> {
        let vals: Vec<(i64, C64)> = self
            .terms
            .iter()
            .map(|t| match place {
                // x = t^{-r}, y = t^{-s}(1 + O(t^r))
                Place::Infinity => (-t.weight(spec), t.coeff),
                Place::Branch(i) => (t.branch_valuation(spec, i), t.branch_leading(spec, i)),
            })
            .collect();
        let Some(min) = vals.iter().map(|v| v.0).min() else {
            return Ok(i64::MAX);
        };
        let (sum, size) = vals
            .iter()
            .filter(|v| v.0 == min)
            .fold((C64::new(0.0, 0.0), 0.0), |(s, n), v| (s + v.1, n + v.1.norm()));
        if sum.norm() <= CANCEL_TOL * size {
            return Err(Error::CancellationDetected);
        }
        Ok(min)
    }

    /// Holomorphic at every finite place: nonnegative order at each branch
    /// place (elsewhere only `x^a` with `a >= 0` and units appear).
    pub fn is_regular_affine(&self, spec: &CyclicCurveSpec) -> Result<bool> {
        for i in 0..spec.branch().len() {
            if self.valuation(spec, Place::Branch(i))? < 0 {
                return Ok(false);
            }
        }
        Ok(true)
    }

    pub fn evaluate(&self, spec: &CyclicCurveSpec, p: &PointOnCurve) -> Result<C64> {
        match p.kind {
            PointKind::Generic => Ok(self.terms.iter().map(|t| t.eval_generic(spec, p.x, p.y)).sum()),
            PointKind::Branch(i) => {
                let v = self.valuation(spec, Place::Branch(i))?;
                match v.cmp(&0) {
                    std::cmp::Ordering::Less => Err(Error::PoleAtPoint),
                    std::cmp::Ordering::Greater => Ok(C64::new(0.0, 0.0)),
                    std::cmp::Ordering::Equal => Ok(self
                        .terms
                        .iter()
                        .filter(|t| t.branch_valuation(spec, i) == 0)
                        .map(|t| t.branch_leading(spec, i))
                        .sum()),
                }
            }
            PointKind::Infinity => {
                let v = self.valuation(spec, Place::Infinity)?;
                match v.cmp(&0) {
                    std::cmp::Ordering::Less => Err(Error::PoleAtPoint),
                    std::cmp::Ordering::Greater => Ok(C64::new(0.0, 0.0)),
                    std::cmp::Ordering::Equal => {
                        Ok(self.terms.iter().filter(|t| t.weight(spec) == 0).map(|t| t.coeff).sum())
                    }
                }
            }
        }
    }

    /// Rewrites every term with `0 <= y_exp < r` using
    /// `y^r = prod (x - b_i)^{m_i}`, and folds nonnegative powers of `(x - 0)`
    /// into `x^a`, so that equal monomials compare equal.
    pub fn reduced(&self, spec: &CyclicCurveSpec) -> FunctionExpr {
        let r = spec.r() as i32;
        let n = spec.branch().len();
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let q = t.y_exp.div_euclid(r);
                let mut x_exp = t.x_exp;
                let mut lin: Vec<i32> = (0..n).map(|i| t.lin(i)).collect();
                for (i, bp) in spec.branch().iter().enumerate() {
                    lin[i] += q * bp.m as i32;
                    if bp.b == C64::new(0.0, 0.0) && lin[i] > 0 {
                        x_exp += lin[i] as u32;
                        lin[i] = 0;
                    }
                }
                Term {
                    coeff: t.coeff,
                    x_exp,
                    lin_exps: lin,
                    y_exp: t.y_exp - q * r,
                }
            })
            .collect();
        FunctionExpr { terms }.simplified()
    }

    /// Same function value at `(x, y)` given explicitly.
    pub fn evaluate_xy(&self, spec: &CyclicCurveSpec, x: C64, y: C64) -> C64 {
        self.terms.iter().map(|t| t.eval_generic(spec, x, y)).sum()
    }

    /// Exact structural equality after simplification.
    pub fn same_as(&self, other: &FunctionExpr) -> bool {
        let a = self.simplified();
        let b = other.simplified();
        a.terms.len() == b.terms.len()
            && a.terms.iter().zip(&b.terms).all(|(s, t)| {
                s.x_exp == t.x_exp
                    && s.lin_exps == t.lin_exps
                    && s.y_exp == t.y_exp
                    && (s.coeff - t.coeff).norm() <= 1e-14 * s.coeff.norm().max(1.0)
            })
    }
}
