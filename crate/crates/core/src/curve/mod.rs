//! Curve models: cyclic covers `y^r = prod (x - b_i)^{m_i}` with full numeric
//! support, and plane Weierstrass-form polynomials with symbolic support
//! (validation, weights, monomial labels).

mod basis;
mod config;
mod expr;

pub use basis::{
    canonical_basis, extended_basis, label_for_weight, monomial_basis, BasisFunction, DifferentialData, Divisor,
    LabelRules,
};
pub use config::{load_curve_spec, parse_curve_spec, CurveSpec};
pub use expr::{FunctionExpr, Place, Term};

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::semigroup::NumericalSemigroup;
use crate::C64;

/// Points closer than this to a branch point need the ramified constructor.
pub const BRANCH_TOL: f64 = 1e-9;

use crate::gcd;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchPoint {
    pub b: C64,
    pub m: u32,
}

/// `y^r = prod_i (x - b_i)^{m_i}` with every branch point totally ramified
/// and a single place over `x = inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct CyclicCurveSpec {
    pub id: String,
    r: u32,
    branch: Vec<BranchPoint>,
    s: u32,
    /// Names given to new eigen-generators `y_l` (default `w`, `w2`, ...).
    pub generator_names: Vec<String>,
    pub labels: LabelRules,
}

impl CyclicCurveSpec {
    pub fn new(id: impl Into<String>, r: u32, branch: Vec<BranchPoint>) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidSpec(format!("cover degree r = {r} must be >= 2")));
        }
        if branch.is_empty() {
            return Err(Error::InvalidSpec("no branch points".into()));
        }
        for (i, bp) in branch.iter().enumerate() {
            if bp.m == 0 || bp.m >= r {
                return Err(Error::InvalidSpec(format!(
                    "multiplicity m_{} = {} not in 1..{}",
                    i + 1,
                    bp.m,
                    r
                )));
            }
            if gcd(r as u64, bp.m as u64) != 1 {
                return Err(Error::NotCoprime {
                    m: r as u64,
                    n: bp.m as u64,
                });
            }
            for other in &branch[..i] {
                if (other.b - bp.b).norm() < BRANCH_TOL {
                    return Err(Error::InvalidSpec(format!("branch point {} repeated", bp.b)));
                }
            }
        }
        let s: u32 = branch.iter().map(|bp| bp.m).sum();
        if gcd(r as u64, s as u64) != 1 {
            return Err(Error::NotCoprime {
                m: r as u64,
                n: s as u64,
            });
        }
        let spec = CyclicCurveSpec {
            id: id.into(),
            r,
            branch,
            s,
            generator_names: Vec::new(),
            labels: LabelRules::cyclic_default(r),
        };
        if spec.genus() == 0 {
            return Err(Error::DegenerateGenusZero);
        }
        Ok(spec)
    }

    /// `y^2 = prod (x - e_i)`, odd number of roots.
    pub fn hyperelliptic(id: impl Into<String>, roots: &[C64]) -> Result<Self> {
        let branch = roots.iter().map(|&b| BranchPoint { b, m: 1 }).collect();
        Self::new(id, 2, branch)
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    pub fn s(&self) -> u32 {
        self.s
    }

    pub fn branch(&self) -> &[BranchPoint] {
        &self.branch
    }

    pub fn genus(&self) -> usize {
        (self.branch.len() - 1) * (self.r as usize - 1) / 2
    }

    pub fn zeta(&self) -> C64 {
        C64::from_polar(1.0, 2.0 * PI / self.r as f64)
    }

    /// `e_{l,i} = floor(l m_i / r)`: the eigen-generator of character `l` is
    /// `y_l = y^l / prod (x - b_i)^{e_{l,i}}`.
    pub fn eigen_exponents(&self, l: u32) -> Vec<i32> {
        self.branch.iter().map(|bp| ((l * bp.m) / self.r) as i32).collect()
    }

    pub fn eigen_generator(&self, l: u32) -> FunctionExpr {
        let lin = self.eigen_exponents(l).iter().map(|e| -e).collect();
        FunctionExpr::monomial(C64::new(1.0, 0.0), 0, lin, l as i32)
    }

    /// Pole order of `y_l` at infinity.
    pub fn eigen_weight(&self, l: u32) -> i64 {
        let e: i64 = self.eigen_exponents(l).iter().map(|&e| e as i64).sum();
        l as i64 * self.s as i64 - self.r as i64 * e
    }

    /// Weierstrass semigroup at infinity, generated by `r` and the `wt(y_l)`.
    pub fn semigroup(&self) -> NumericalSemigroup {
        let mut gens = vec![self.r as u64];
        gens.extend((1..self.r).map(|l| self.eigen_weight(l) as u64));
        NumericalSemigroup::from_generators(&gens).expect("gcd(r, s) = 1")
    }

    /// `prod (x - b_i)^{m_i / r}` on principal logarithm branches.
    pub fn principal_y(&self, x: C64) -> C64 {
        let r = self.r as f64;
        let log: C64 = self.branch.iter().map(|bp| (x - bp.b).ln() * (bp.m as f64 / r)).sum();
        log.exp()
    }

    /// Right-hand side `prod (x - b_i)^{m_i}`.
    pub fn rhs(&self, x: C64) -> C64 {
        self.branch.iter().map(|bp| (x - bp.b).powu(bp.m)).product()
    }

    pub fn residual(&self, x: C64, y: C64) -> f64 {
        let rhs = self.rhs(x);
        (y.powu(self.r) - rhs).norm() / rhs.norm().max(1.0)
    }

    /// Index of the branch point within `tol` of `x`.
    pub fn near_branch(&self, x: C64, tol: f64) -> Option<(usize, f64)> {
        self.branch
            .iter()
            .enumerate()
            .map(|(i, bp)| (i, (x - bp.b).norm()))
            .find(|&(_, d)| d < tol)
    }

    /// Point over `x0` on sheet `sheet`: `y = zeta^sheet * principal_y(x0)`.
    pub fn point_on_curve(&self, x0: C64, sheet: u32) -> Result<PointOnCurve> {
        if sheet >= self.r {
            return Err(Error::BadSheet { sheet, r: self.r });
        }
        if let Some((index, distance)) = self.near_branch(x0, BRANCH_TOL) {
            return Err(Error::NearBranchPoint { index, distance });
        }
        let y = self.zeta().powu(sheet) * self.principal_y(x0);
        Ok(PointOnCurve {
            x: x0,
            y,
            sheet,
            kind: PointKind::Generic,
        })
    }

    /// The unique (ramified) point over `b_i`.
    pub fn branch_place(&self, i: usize) -> PointOnCurve {
        PointOnCurve {
            x: self.branch[i].b,
            y: C64::new(0.0, 0.0),
            sheet: 0,
            kind: PointKind::Branch(i),
        }
    }

    pub fn infinity(&self) -> PointOnCurve {
        PointOnCurve {
            x: C64::new(f64::INFINITY, 0.0),
            y: C64::new(f64::INFINITY, 0.0),
            sheet: 0,
            kind: PointKind::Infinity,
        }
    }

    /// Sheet index of an arbitrary `(x, y)` with `x` off the branch locus.
    pub fn sheet_of(&self, x: C64, y: C64) -> u32 {
        let ratio = y / self.principal_y(x);
        let k = (ratio.arg() / (2.0 * PI / self.r as f64)).round() as i64;
        k.rem_euclid(self.r as i64) as u32
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Generic,
    Branch(usize),
    Infinity,
}

/// A point of a cyclic curve. For generic points `y` is the value on the
/// tagged sheet; branch places have `y = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointOnCurve {
    pub x: C64,
    pub y: C64,
    pub sheet: u32,
    pub kind: PointKind,
}

/// Plane model `y^m + A_1(x) y^{m-1} + ... + A_m(x) = 0`.
///
/// `coeffs[i-1][j]` is `lambda_{i,j}`, the coefficient of `x^j` in `A_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWeierstrassSpec {
    pub id: String,
    pub m: u32,
    pub n: u32,
    pub coeffs: Vec<Vec<C64>>,
    /// Additional ring generators beyond `x`, `y`: (name, weight).
    pub extra_generators: Vec<(String, u64)>,
    /// `d_1` when the semigroup is not symmetric (not derivable symbolically).
    pub d1: Option<u64>,
    /// Semigroup generators when they differ from `<m, n, extra weights>`.
    pub semigroup_generators: Option<Vec<u64>>,
    pub labels: LabelRules,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalFormReport {
    pub m: u32,
    pub n: u32,
    /// `<m, n>`, contained in the Weierstrass semigroup.
    pub lower_semigroup: NumericalSemigroup,
    /// Genus of `<m, n>`, an upper bound for the curve's genus.
    pub genus_bound: usize,
    /// Random `x0` at which `f(x0, y)` had `m` distinct roots.
    pub squarefree_samples: usize,
}

impl PlaneWeierstrassSpec {
    pub fn a_poly(&self, i: usize) -> &[C64] {
        self.coeffs.get(i - 1).map(|v| v.as_slice()).unwrap_or(&[])
    }

    /// Coefficients of `f(x0, y)` in `y`, constant term first.
    pub fn y_poly(&self, x0: C64) -> Vec<C64> {
        let m = self.m as usize;
        let mut c = vec![C64::new(0.0, 0.0); m + 1];
        c[m] = C64::new(1.0, 0.0);
        for i in 1..=m {
            let v = self
                .a_poly(i)
                .iter()
                .rev()
                .fold(C64::new(0.0, 0.0), |acc, &l| acc * x0 + l);
            c[m - i] = v;
        }
        c
    }

    pub fn semigroup(&self) -> Result<NumericalSemigroup> {
        let gens = match &self.semigroup_generators {
            Some(g) => g.clone(),
            None => {
                let mut g = vec![self.m as u64, self.n as u64];
                g.extend(self.extra_generators.iter().map(|(_, w)| *w));
                g
            }
        };
        NumericalSemigroup::from_generators(&gens)
    }

    /// Named generators with weights, `x` and `y` first.
    pub fn generators(&self) -> Vec<(String, u64)> {
        let mut g = vec![("x".to_string(), self.m as u64), ("y".to_string(), self.n as u64)];
        g.extend(self.extra_generators.iter().cloned());
        g
    }
}

/// Degree bounds `deg A_i <= floor(i n / m)`, `gcd(m, n) = 1`, top
/// coefficient of `A_m` equal to 1, plus a squarefreeness probe of
/// `f(x0, .)` at 20 seeded random `x0`.
///
/// The top-coefficient condition with `gcd(m, n) = 1` makes infinity a
/// single totally ramified place, which already forces irreducibility; the
/// probe only guards against repeated factors.
pub fn validate_normal_form(spec: &PlaneWeierstrassSpec) -> Result<NormalFormReport> {
    let (m, n) = (spec.m as u64, spec.n as u64);
    if m == 0 || n == 0 {
        return Err(Error::InvalidSpec("m and n must be positive".into()));
    }
    if gcd(m, n) != 1 {
        return Err(Error::NotCoprime { m, n });
    }
    if spec.coeffs.len() > m as usize {
        return Err(Error::InvalidSpec(format!(
            "{} coefficient rows for m = {}",
            spec.coeffs.len(),
            m
        )));
    }
    for i in 1..=m as usize {
        let bound = (i as u64 * n / m) as usize;
        for (j, c) in spec.a_poly(i).iter().enumerate() {
            if j > bound && c.norm() > 0.0 {
                return Err(Error::DegreeBoundViolated { i, j, bound });
            }
        }
    }
    let top = spec.a_poly(m as usize).get(n as usize).copied();
    match top {
        Some(c) if (c - C64::new(1.0, 0.0)).norm() < 1e-12 => {}
        other => {
            return Err(Error::NotNormalized(format!(
                "lambda_{{{m},{n}}} = {:?}, expected 1",
                other
            )))
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let samples = 20;
    for _ in 0..samples {
        let x0 = C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let p = spec.y_poly(x0);
        let dp: Vec<C64> = p.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
        let res = resultant(&p, &dp);
        let scale: f64 = p.iter().map(|c| c.norm()).fold(1.0, f64::max);
        if res.norm() < 1e-10 * scale.powi(2 * m as i32 - 1) {
            return Err(Error::InvalidSpec(format!(
                "f(x0, y) has a repeated root at x0 = {x0}; equation not squarefree"
            )));
        }
    }
    let lower = NumericalSemigroup::from_generators(&[m, n])?;
    Ok(NormalFormReport {
        m: spec.m,
        n: spec.n,
        genus_bound: lower.genus(),
        lower_semigroup: lower,
        squarefree_samples: samples,
    })
}

/// Sylvester resultant of two polynomials (constant term first).
fn resultant(p: &[C64], q: &[C64]) -> C64 {
    let dp = p.len() - 1;
    let dq = q.len() - 1;
    let size = dp + dq;
    if size == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut s = DMatrix::<C64>::zeros(size, size);
    for row in 0..dq {
        for (k, &c) in p.iter().rev().enumerate() {
            s[(row, row + k)] = c;
        }
    }
    for row in 0..dp {
        for (k, &c) in q.iter().rev().enumerate() {
            s[(dq + row, row + k)] = c;
        }
    }
    s.determinant()
}
