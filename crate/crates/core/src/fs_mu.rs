//! Frobenius-Stickelberger matrices and determinants over the extended
//! canonical basis, and the mu-functions built from them.

use nalgebra::DMatrix;

use crate::curve::{BasisFunction, CyclicCurveSpec, PointOnCurve};
use crate::error::{Error, Result};
use crate::C64;

/// `|psi_n| < DEGENERACY_TOL * prod(row norms)` flags a special divisor.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// `phi_hat_0(P) .. phi_hat_{count-1}(P)`.
pub fn basis_values(
    spec: &CyclicCurveSpec,
    basis: &[BasisFunction],
    count: usize,
    p: &PointOnCurve,
) -> Result<Vec<C64>> {
    if basis.len() < count {
        return Err(Error::BasisTooShort {
            have: basis.len(),
            need: count,
        });
    }
    basis[..count]
        .iter()
        .map(|f| f.expr.as_ref().ok_or(Error::NotCyclic)?.evaluate(spec, p))
        .collect()
}

/// `Psi_n`: row `i` holds `phi_hat_0 .. phi_hat_{n-1}` at `points[i]`.
pub fn fs_matrix(spec: &CyclicCurveSpec, basis: &[BasisFunction], points: &[PointOnCurve]) -> Result<DMatrix<C64>> {
    let n = points.len();
    let mut m = DMatrix::zeros(n, n);
    for (i, p) in points.iter().enumerate() {
        for (j, v) in basis_values(spec, basis, n, p)?.into_iter().enumerate() {
            m[(i, j)] = v;
        }
    }
    Ok(m)
}

pub fn fs_det(spec: &CyclicCurveSpec, basis: &[BasisFunction], points: &[PointOnCurve]) -> Result<C64> {
    if points.is_empty() {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok(fs_matrix(spec, basis, points)?.determinant())
}

fn row_norm_product(m: &DMatrix<C64>) -> f64 {
    m.row_iter().map(|r| r.norm()).product()
}

/// Ratio of extreme singular values.
pub fn condition_number(m: &DMatrix<C64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    let min = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Gate shared by `mu` and `mu_coefficients`: returns `psi_n` and `Psi_n`.
fn admitted(spec: &CyclicCurveSpec, basis: &[BasisFunction], points: &[PointOnCurve]) -> Result<(C64, DMatrix<C64>)> {
    let m = fs_matrix(spec, basis, points)?;
    let det = m.determinant();
    let threshold = DEGENERACY_TOL * row_norm_product(&m);
    if det.norm() < threshold || !det.is_finite() {
        return Err(Error::DegenerateDivisor {
            det: det.norm(),
            threshold,
        });
    }
    Ok((det, m))
}

/// `mu_n(P; P_1..P_n) = psi_{n+1}(P_1, .., P_n, P) / psi_n(P_1, .., P_n)`.
pub fn mu(spec: &CyclicCurveSpec, basis: &[BasisFunction], p: &PointOnCurve, points: &[PointOnCurve]) -> Result<C64> {
    let (den, _) = admitted(spec, basis, points)?;
    let mut all = points.to_vec();
    all.push(*p);
    Ok(fs_det(spec, basis, &all)? / den)
}

/// `mu_n = phi_hat_n + sum_{k<n} (-1)^{n-k} mu_{n,k} phi_hat_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuExpansion {
    pub n: usize,
    /// `mu_{n,0}, ..., mu_{n,n}` with `mu_{n,n} = 1`.
    pub coefficients: Vec<C64>,
    /// Condition number of `Psi_n`.
    pub condition: f64,
    pub psi_n: C64,
}

impl MuExpansion {
    /// Evaluates the expansion from basis values `phi_hat_0(P) .. phi_hat_n(P)`.
    pub fn eval(&self, phi: &[C64]) -> C64 {
        (0..=self.n)
            .map(|k| {
                let sign = if (self.n - k).is_multiple_of(2) { 1.0 } else { -1.0 };
                self.coefficients[k] * phi[k] * sign
            })
            .sum()
    }

    pub fn eval_at(&self, spec: &CyclicCurveSpec, basis: &[BasisFunction], p: &PointOnCurve) -> Result<C64> {
        Ok(self.eval(&basis_values(spec, basis, self.n + 1, p)?))
    }
}

/// Cofactor expansion of `psi_{n+1}(P_1, .., P_n, P)` along the row of `P`:
/// `mu_{n,k} = M_k / psi_n`, `M_k` the minor of `Psi_{n+1}` without its last
/// row and column `k`.
pub fn mu_coefficients(
    spec: &CyclicCurveSpec,
    basis: &[BasisFunction],
    points: &[PointOnCurve],
) -> Result<MuExpansion> {
    let n = points.len();
    let (psi_n, psi) = admitted(spec, basis, points)?;
    let mut top = DMatrix::zeros(n, n + 1);
    for (i, p) in points.iter().enumerate() {
        for (j, v) in basis_values(spec, basis, n + 1, p)?.into_iter().enumerate() {
            top[(i, j)] = v;
        }
    }
    let coefficients = (0..=n)
        .map(|k| {
            if k == n {
                C64::new(1.0, 0.0)
            } else {
                top.clone().remove_column(k).determinant() / psi_n
            }
        })
        .collect();
    Ok(MuExpansion {
        n,
        coefficients,
        condition: condition_number(&psi),
        psi_n,
    })
}
