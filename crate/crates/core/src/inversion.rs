//! Numerical checks of the theta-gradient identities on the strata `W_k`:
//! Jorgenson's determinant ratio, the Jacobi inversion formulae for the
//! mu-coefficients, the `mu_g` expansion, and the Burgers relation.
//!
//! Derivatives `d_i` are taken in the unnormalized coordinates `u`, with
//! `z = (2 omega')^{-1} u + xi`, so `grad_u = (2 omega')^{-T} grad_z`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::curve::{BasisFunction, CyclicCurveSpec, DifferentialData, FunctionExpr, PointOnCurve};
use crate::error::{Error, Result};
use crate::fs_mu::{basis_values, mu, mu_coefficients};
use crate::periods::{integrate_segment, reduce_to_cell, AbelMap, QuadratureRule, RiemannConstantData};
use crate::theta::{Characteristic, ThetaContext};
use crate::C64;

/// Floor in `|lhs - rhs| / max(|lhs|, |rhs|, floor)`.
pub const RESIDUAL_FLOOR: f64 = 1e-12;
/// Floor of the `mu_g` expansion residual, relative to the sum of the moduli
/// of the right-hand summands.
pub const EXPANSION_FLOOR: f64 = 1e-6;
/// `|d_{k+1} theta| / |grad theta|` below this is treated as vanishing.
pub const DENOMINATOR_TOL: f64 = 1e-8;
/// `|grad_z theta|` at the reduced argument below this means the divisor
/// sits in the singular locus of the theta divisor.
pub const GRADIENT_TOL: f64 = 1e-8;

pub fn relative_residual(lhs: C64, rhs: C64, floor: f64) -> f64 {
    (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(floor)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InversionReport {
    pub k: usize,
    pub i: usize,
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    /// `|psi_k(P_1..P_k)|`.
    pub psi_k: f64,
    /// `|d_{k+1} theta| / |grad_u theta|`.
    pub denominator: f64,
    /// `|theta|` at the lattice-reduced argument; vanishes on the strata.
    pub theta_abs: f64,
    /// `|grad_z theta|` at the lattice-reduced argument.
    pub grad_norm: f64,
    /// Same ratio from `theta[delta]` when the characteristic is known.
    pub rhs_delta: Option<C64>,
}

/// Gradient data of `theta` at `(2 omega')^{-1} u + xi`.
#[derive(Debug, Clone)]
pub struct GradientAt {
    pub z: DVector<C64>,
    pub grad_u: DVector<C64>,
    pub hess_u: Option<DMatrix<C64>>,
    pub theta_abs: f64,
    pub grad_norm: f64,
}

/// Everything the checks share: curve, basis, periods, Abel map and `xi`.
pub struct InversionContext<'a> {
    pub abel: &'a AbelMap<'a>,
    pub diff: &'a DifferentialData,
    /// Canonical basis followed by at least one more element of `S_hat_R`.
    pub basis: &'a [BasisFunction],
    pub xi: DVector<C64>,
    pub delta: Option<Characteristic>,
    pub theta: ThetaContext,
}

impl<'a> InversionContext<'a> {
    pub fn new(
        abel: &'a AbelMap<'a>,
        diff: &'a DifferentialData,
        basis: &'a [BasisFunction],
        rc: &RiemannConstantData,
        eps: f64,
    ) -> Self {
        InversionContext {
            abel,
            diff,
            basis,
            xi: rc.xi.clone(),
            delta: rc.delta.clone(),
            theta: ThetaContext::new(abel.periods.tau.clone(), eps),
        }
    }

    pub fn spec(&self) -> &CyclicCurveSpec {
        self.abel.spec
    }

    pub fn genus(&self) -> usize {
        self.xi.len()
    }

    fn a_matrix(&self) -> DMatrix<C64> {
        // (2 omega')^{-1}
        let g = self.genus();
        DMatrix::from_fn(g, g, |i, j| {
            let mut e = DVector::zeros(g);
            e[j] = C64::new(1.0, 0.0);
            self.abel.periods.normalize(&e)[i]
        })
    }

    /// `theta` derivatives at `(2 omega')^{-1} u + xi`, in `u`.
    pub fn gradient_at(&self, u: &DVector<C64>, order: usize) -> Result<GradientAt> {
        let z = self.abel.periods.normalize(u) + &self.xi;
        self.gradient_at_z(z, order, &self.theta)
    }

    fn gradient_at_z(&self, z: DVector<C64>, order: usize, ctx: &ThetaContext) -> Result<GradientAt> {
        let res = ctx.eval(&z, order.max(1))?;
        let a = self.a_matrix();
        let at = a.transpose();
        let grad_u = &at * res.grad.expect("order >= 1");
        let hess_u = res.hessian.map(|h| &at * h * &a);
        let red = ctx.eval(&reduce_to_cell(self.abel, &z), 1)?;
        let grad_norm = red.grad.expect("order 1").norm();
        if grad_norm < GRADIENT_TOL {
            return Err(Error::ThetaDenominatorVanishes(grad_norm));
        }
        Ok(GradientAt {
            z,
            grad_u,
            hess_u,
            theta_abs: red.value.norm(),
            grad_norm,
        })
    }

    /// Gradient of `theta[delta]` at `(2 omega')^{-1} u`.
    fn delta_gradient(&self, u: &DVector<C64>) -> Option<Result<DVector<C64>>> {
        let delta = self.delta.clone()?;
        let ctx = self.theta.clone().with_characteristic(delta);
        let z = self.abel.periods.normalize(u);
        Some(ctx.grad(&z).map(|g| self.a_matrix().transpose() * g))
    }

    fn abel_sum(&self, points: &[PointOnCurve]) -> Result<DVector<C64>> {
        self.abel.points(points)
    }

    fn nu_values(&self, p: &PointOnCurve) -> Result<Vec<C64>> {
        self.diff.nu.iter().map(|f| f.evaluate(self.spec(), p)).collect()
    }
}

fn det_with_row(rows: &[Vec<C64>], last: &[C64]) -> C64 {
    let g = last.len();
    DMatrix::from_fn(g, g, |i, j| if i < rows.len() { rows[i][j] } else { last[j] }).determinant()
}

fn dot(a: &[C64], b: &DVector<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

/// `det[nu(P_1..P_{g-1}); a] / det[...; b]` against
/// `sum a_i d_i theta / sum b_i d_i theta` at `w~(P_1..P_{g-1})`.
pub fn jorgenson_check(
    ctx: &InversionContext,
    points: &[PointOnCurve],
    a: &[C64],
    b: &[C64],
) -> Result<JorgensonReport> {
    let g = ctx.genus();
    if points.len() + 1 != g || a.len() != g || b.len() != g {
        return Err(Error::WrongPointCount {
            expected: g - 1,
            got: points.len(),
        });
    }
    let rows: Vec<Vec<C64>> = points.iter().map(|p| ctx.nu_values(p)).collect::<Result<_>>()?;
    let num = det_with_row(&rows, a);
    let den = det_with_row(&rows, b);
    let scale: f64 = rows
        .iter()
        .map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt())
        .product::<f64>()
        * b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if den.norm() < 1e-10 * scale {
        return Err(Error::DegenerateConfiguration(format!(
            "determinant denominator {:e}",
            den.norm()
        )));
    }
    let grad = ctx.gradient_at(&ctx.abel_sum(points)?, 1)?;
    let tn = dot(a, &grad.grad_u);
    let td = dot(b, &grad.grad_u);
    let gscale = grad.grad_u.norm() * b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if td.norm() < DENOMINATOR_TOL * gscale {
        return Err(Error::DegenerateConfiguration(format!(
            "theta denominator {:e}",
            td.norm()
        )));
    }
    let lhs = num / den;
    let rhs = tn / td;
    Ok(JorgensonReport {
        lhs,
        rhs,
        residual: relative_residual(lhs, rhs, RESIDUAL_FLOOR),
        theta_abs: grad.theta_abs,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JorgensonReport {
    pub lhs: C64,
    pub rhs: C64,
    pub residual: f64,
    pub theta_abs: f64,
}

fn special(e: Error) -> Error {
    match e {
        Error::DegenerateDivisor { det, .. } => Error::SpecialDivisor(det),
        other => other,
    }
}

/// `mu_{k,i-1}(P_1..P_k)` against `(-1)^{k-i+1} d_i theta / d_{k+1} theta`
/// at `w~(P_1..P_k)`. The sign matches the convention
/// `mu_k = sum_j (-1)^{k-j} mu_{k,j} phi_hat_j` of [`crate::fs_mu`].
///
/// For `k = g` on a hyperelliptic curve (`phi_hat_j = x^j`) the coefficients
/// are compared with the elementary symmetric functions of the `k = 1`
/// ratios at each point.
pub fn jacobi_inversion_check(ctx: &InversionContext, points: &[PointOnCurve], i: usize) -> Result<InversionReport> {
    let g = ctx.genus();
    let k = points.len();
    if i < 1 || i > k || k > g || (k == g && ctx.spec().r() != 2) {
        return Err(Error::StratumOutOfRange { k, i, g });
    }
    let exp = mu_coefficients(ctx.spec(), ctx.basis, points).map_err(special)?;
    let lhs = exp.coefficients[i - 1];
    if k == g {
        return symmetric_function_check(ctx, points, i, lhs, exp.psi_n.norm());
    }
    let u = ctx.abel_sum(points)?;
    let grad = ctx.gradient_at(&u, 1)?;
    let gk = grad.grad_u[k];
    let denominator = gk.norm() / grad.grad_u.norm();
    if !(denominator >= DENOMINATOR_TOL) {
        return Err(Error::ThetaDenominatorVanishes(denominator));
    }
    let sign = if (k + 1 - i).is_multiple_of(2) { 1.0 } else { -1.0 };
    let rhs = grad.grad_u[i - 1] / gk * sign;
    let rhs_delta = match ctx.delta_gradient(&u) {
        Some(gd) => {
            let gd = gd?;
            Some(gd[i - 1] / gd[k] * sign)
        }
        None => None,
    };
    Ok(InversionReport {
        k,
        i,
        lhs,
        rhs,
        residual: relative_residual(lhs, rhs, RESIDUAL_FLOOR),
        psi_k: exp.psi_n.norm(),
        denominator,
        theta_abs: grad.theta_abs,
        grad_norm: grad.grad_norm,
        rhs_delta,
    })
}

fn symmetric_function_check(
    ctx: &InversionContext,
    points: &[PointOnCurve],
    i: usize,
    lhs: C64,
    psi_k: f64,
) -> Result<InversionReport> {
    let k = points.len();
    let mut roots = Vec::with_capacity(k);
    let mut denominator = f64::INFINITY;
    let mut theta_abs: f64 = 0.0;
    let mut grad_norm = f64::INFINITY;
    for p in points {
        let r = jacobi_inversion_check(ctx, std::slice::from_ref(p), 1)?;
        denominator = denominator.min(r.denominator);
        theta_abs = theta_abs.max(r.theta_abs);
        grad_norm = grad_norm.min(r.grad_norm);
        roots.push(r.rhs);
    }
    // e_0..e_k of the roots; mu_{k, j} = e_{k - j}
    let mut e = vec![C64::new(0.0, 0.0); k + 1];
    e[0] = C64::new(1.0, 0.0);
    for x in &roots {
        for d in (1..=k).rev() {
            e[d] = e[d] + e[d - 1] * x;
        }
    }
    let rhs = e[k - (i - 1)];
    Ok(InversionReport {
        k,
        i,
        lhs,
        rhs,
        residual: relative_residual(lhs, rhs, RESIDUAL_FLOOR),
        psi_k,
        denominator,
        theta_abs,
        grad_norm,
        rhs_delta: None,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MuExpansionReport {
    /// Largest residual over the probe points.
    pub residual: f64,
    /// Same with the sum over `i = 1..g` added to `phi_hat_{g-1}` and the
    /// denominator `d_{g-1}`, read literally.
    pub literal_residual: f64,
    pub probes: usize,
}

/// `mu_{g-1}(P; P_1..P_{g-1})` from the FS determinants against
/// `phi_hat_{g-1}(P) + sum_{i<g} (d_i theta / d_g theta) phi_hat_{i-1}(P)`.
pub fn mu_g_expansion_check(
    ctx: &InversionContext,
    probes: &[PointOnCurve],
    points: &[PointOnCurve],
) -> Result<MuExpansionReport> {
    let g = ctx.genus();
    if points.len() + 1 != g {
        return Err(Error::WrongPointCount {
            expected: g - 1,
            got: points.len(),
        });
    }
    let grad = ctx.gradient_at(&ctx.abel_sum(points)?, 1)?;
    let gg = grad.grad_u[g - 1];
    if gg.norm() < DENOMINATOR_TOL * grad.grad_u.norm() {
        return Err(Error::ThetaDenominatorVanishes(gg.norm() / grad.grad_u.norm()));
    }
    let mut residual: f64 = 0.0;
    let mut literal_residual: f64 = 0.0;
    for p in probes {
        let lhs = mu(ctx.spec(), ctx.basis, p, points).map_err(special)?;
        let phi = basis_values(ctx.spec(), ctx.basis, g, p)?;
        let terms: Vec<C64> = (0..g - 1).map(|i| grad.grad_u[i] / gg * phi[i]).collect();
        let rhs: C64 = phi[g - 1] + terms.iter().sum::<C64>();
        // P = P_i makes both sides vanish; measure against the summands then
        let scale = phi[g - 1].norm() + terms.iter().map(|t| t.norm()).sum::<f64>();
        residual = residual.max(relative_residual(lhs, rhs, EXPANSION_FLOOR * scale));
        if g >= 2 {
            let gl = grad.grad_u[g - 2];
            let lit: C64 = phi[g - 1] + (0..g).map(|i| grad.grad_u[i] / gl * phi[i]).sum::<C64>();
            literal_residual = literal_residual.max(relative_residual(lhs, lit, EXPANSION_FLOOR * scale));
        }
    }
    Ok(MuExpansionReport {
        residual,
        literal_residual,
        probes: probes.len(),
    })
}

/// `d_1 theta / d_2 theta` at `w~(P_1) + xi` against `phi_hat_1 / phi_hat_0`
/// at `P_1` (for the `(5, 7, 11)` curve, `w_1 / y_1`).
pub fn pentagonal_check(ctx: &InversionContext, p1: &PointOnCurve) -> Result<InversionReport> {
    if ctx.genus() < 2 {
        return Err(Error::Precondition("genus must be at least 2".into()));
    }
    let r = jacobi_inversion_check(ctx, std::slice::from_ref(p1), 1)?;
    let phi = basis_values(ctx.spec(), ctx.basis, 2, p1)?;
    let direct = phi[1] / phi[0];
    debug_assert!((direct - r.lhs).norm() <= 1e-9 * direct.norm().max(1.0));
    Ok(r)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BurgersReport {
    pub i: usize,
    pub j: usize,
    /// `|D_i F - (phi_hat_j / phi_hat_i) D_j F|`, relative. `D_i` is the
    /// derivative along the curve with respect to `u_i`, from the chain rule;
    /// `D_j` from central differences (for `i = j` both sides coincide).
    pub residual: f64,
    /// Chain rule against central differences along the curve.
    pub fd_discrepancy: f64,
    /// `F = d_1 theta / d_2 theta` at `P` and `x(P)`.
    pub ratio: C64,
    pub x: C64,
    pub df_dx: C64,
}

/// Burgers relation for `F = d_1 theta[delta] / d_2 theta[delta]` along the
/// image of the curve (requires `phi_hat_1 = x phi_hat_0`). `i`, `j` index
/// `phi_hat` and the matching coordinate `u`.
pub fn burgers_residual(ctx: &InversionContext, p: &PointOnCurve, i: usize, j: usize) -> Result<BurgersReport> {
    let g = ctx.genus();
    if g < 2 || i >= g || j >= g {
        return Err(Error::Precondition(format!(
            "indices ({i}, {j}) out of range for genus {g}"
        )));
    }
    let phi0 = ctx.diff.phi_hat[0].expr.as_ref();
    let phi1 = ctx.diff.phi_hat[1].expr.as_ref();
    let ok = match (phi0, phi1) {
        (Some(a), Some(b)) => a.mul(&FunctionExpr::x_pow(1)).same_as(b),
        _ => false,
    };
    if !ok {
        return Err(Error::Precondition("phi_hat_1 / phi_hat_0 is not x".into()));
    }
    let spec = ctx.spec();
    let u0 = ctx.abel.point(p)?.value;
    let f_at = |u: &DVector<C64>, order: usize| -> Result<(C64, Option<DVector<C64>>)> {
        let gr = ctx.gradient_at(u, order)?;
        let f = gr.grad_u[0] / gr.grad_u[1];
        let df = gr.hess_u.map(|h| {
            DVector::from_fn(g, |l, _| {
                (h[(0, l)] * gr.grad_u[1] - gr.grad_u[0] * h[(1, l)]) / (gr.grad_u[1] * gr.grad_u[1])
            })
        });
        Ok((f, df))
    };
    let (ratio, df_du) = f_at(&u0, 2)?;
    let df_du = df_du.expect("hessian requested");
    let nu = ctx.nu_values(p)?;
    let df_dx: C64 = (0..g).map(|l| df_du[l] * nu[l]).sum();

    let step = 1e-4 * (1.0 + p.x.norm());
    let rule = QuadratureRule::standard();
    let side = |sgn: f64| -> Result<C64> {
        let (du, _) = integrate_segment(spec, &ctx.diff.nu, p.x, p.y, p.x + C64::new(sgn * step, 0.0), &rule)?;
        Ok(f_at(&(&u0 + DVector::from_vec(du)), 1)?.0)
    };
    let fd = (side(1.0)? - side(-1.0)?) / (2.0 * step);
    let fd_discrepancy = relative_residual(df_dx, fd, RESIDUAL_FLOOR);

    let residual = if i == j {
        0.0
    } else {
        let phi = basis_values(spec, ctx.basis, g, p)?;
        let di = df_dx / nu[i];
        let dj = fd / nu[j];
        relative_residual(di, phi[j] / phi[i] * dj, RESIDUAL_FLOOR)
    };
    Ok(BurgersReport {
        i,
        j,
        residual,
        fd_discrepancy,
        ratio,
        x: p.x,
        df_dx,
    })
}
