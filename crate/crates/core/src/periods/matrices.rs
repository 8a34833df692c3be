//! Period matrices `2 omega'`, `2 omega''`, `tau` and the lattice helpers.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::homology::{homology_basis, HomologyBasis};
use super::path::{integrate_from_branch, QuadratureRule};
use crate::curve::{CyclicCurveSpec, DifferentialData, FunctionExpr};
use crate::error::{Error, Result};
use crate::theta::RiemannMatrix;
use crate::C64;

/// Admission tolerance for `tau - tau^T`.
pub const TAU_SYMMETRY_TOL: f64 = 1e-7;

#[derive(Debug, Clone)]
pub struct PeriodData {
    /// `omega'`: half the `alpha`-periods, `(2 omega')_{jk} = int_{alpha_k} nu_j`.
    pub omega1: DMatrix<C64>,
    /// `omega''`: half the `beta`-periods.
    pub omega2: DMatrix<C64>,
    pub tau: RiemannMatrix,
    pub homology: Option<HomologyBasis>,
    /// 2-norm condition number of `omega'`.
    pub condition: f64,
    two_omega1_inv: DMatrix<C64>,
}

impl PeriodData {
    pub fn from_omegas(omega1: DMatrix<C64>, omega2: DMatrix<C64>, homology: Option<HomologyBasis>) -> Result<Self> {
        let g = omega1.nrows();
        for m in [&omega1, &omega2] {
            if m.nrows() != g || m.ncols() != g {
                return Err(Error::DimensionMismatch {
                    expected: g,
                    got: m.ncols(),
                });
            }
        }
        let sv = omega1.clone().singular_values();
        let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
        let smax = sv.iter().copied().fold(0.0, f64::max);
        let two_omega1_inv = (&omega1 * C64::new(2.0, 0.0))
            .try_inverse()
            .ok_or_else(|| Error::NotRiemannMatrix("omega' is singular".into()))?;
        let tau = omega1
            .clone()
            .lu()
            .solve(&omega2)
            .ok_or_else(|| Error::NotRiemannMatrix("omega' is singular".into()))?;
        let tau = RiemannMatrix::with_tolerance(tau, TAU_SYMMETRY_TOL)?;
        Ok(PeriodData {
            omega1,
            omega2,
            tau,
            homology,
            condition: smax / smin,
            two_omega1_inv,
        })
    }

    pub fn genus(&self) -> usize {
        self.omega1.nrows()
    }

    /// `v -> (2 omega')^{-1} v`, unnormalized to normalized coordinates.
    pub fn normalize(&self, v: &DVector<C64>) -> DVector<C64> {
        &self.two_omega1_inv * v
    }

    /// `2 omega' n1 + 2 omega'' n2`.
    pub fn lattice_point(&self, n1: &[i64], n2: &[i64]) -> DVector<C64> {
        let a = DVector::from_iterator(n1.len(), n1.iter().map(|&v| C64::new(2.0 * v as f64, 0.0)));
        let b = DVector::from_iterator(n2.len(), n2.iter().map(|&v| C64::new(2.0 * v as f64, 0.0)));
        &self.omega1 * a + &self.omega2 * b
    }

    /// Real `(a, b)` with `z = a + tau b` for a normalized vector `z`.
    pub fn normalized_coords(&self, z: &DVector<C64>) -> (DVector<f64>, DVector<f64>) {
        let b = self.tau.lattice_coords(z);
        let x = self.tau.tau().map(|v| v.re);
        let a = z.map(|v| v.re) - x * &b;
        (a, b)
    }

    /// Largest distance of the normalized coordinates of `z` from integers.
    pub fn distance_to_lattice(&self, z: &DVector<C64>) -> f64 {
        let (a, b) = self.normalized_coords(z);
        a.iter()
            .chain(b.iter())
            .map(|v| (v - v.round()).abs())
            .fold(0.0, f64::max)
    }

    /// Writes `omega'` and `omega''` row-major as `re im` pairs.
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        let _ = writeln!(out, "# omega' then omega'', row-major, re im pairs");
        let _ = writeln!(out, "genus {}", self.genus());
        for (name, m) in [("omega1", &self.omega1), ("omega2", &self.omega2)] {
            let _ = writeln!(out, "{name}");
            for row in m.row_iter() {
                let line: Vec<String> = row.iter().map(|v| format!("{:.16e} {:.16e}", v.re, v.im)).collect();
                let _ = writeln!(out, "{}", line.join(" "));
            }
        }
        std::fs::write(path, out)?;
        Ok(())
    }

    /// Reads a file written by [`PeriodData::save`]; `tau` is recomputed.
    pub fn load(path: &Path, expected_genus: usize) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let fmt = |line: usize, msg: &str| Error::Format {
            line,
            msg: msg.to_string(),
        };
        let (ln, head) = lines.next().ok_or_else(|| fmt(0, "empty file"))?;
        let g: usize = head
            .strip_prefix("genus ")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| fmt(ln, "expected `genus <g>`"))?;
        if g != expected_genus {
            return Err(Error::ShapeMismatch {
                expected: expected_genus,
                found: g,
            });
        }
        let mut read_matrix = |name: &str| -> Result<DMatrix<C64>> {
            let (ln, tag) = lines.next().ok_or_else(|| fmt(0, "truncated file"))?;
            if tag != name {
                return Err(fmt(ln, &format!("expected `{name}`")));
            }
            let mut m = DMatrix::zeros(g, g);
            for i in 0..g {
                let (ln, row) = lines.next().ok_or_else(|| fmt(0, "truncated matrix"))?;
                let vals: Vec<f64> = row
                    .split_whitespace()
                    .map(|t| t.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| fmt(ln, &e.to_string()))?;
                if vals.len() != 2 * g {
                    return Err(fmt(ln, &format!("expected {} numbers, got {}", 2 * g, vals.len())));
                }
                for k in 0..g {
                    m[(i, k)] = C64::new(vals[2 * k], vals[2 * k + 1]);
                }
            }
            Ok(m)
        };
        let omega1 = read_matrix("omega1")?;
        let omega2 = read_matrix("omega2")?;
        Self::from_omegas(omega1, omega2, None)
    }
}

/// `int nu` over the lift of each tree edge on sheet 0, from `b_p` to `b_q`.
pub fn edge_integrals(
    spec: &CyclicCurveSpec,
    nu: &[FunctionExpr],
    homology: &HomologyBasis,
    rule: &QuadratureRule,
) -> Result<Vec<Vec<C64>>> {
    homology
        .edges
        .iter()
        .map(|e| {
            let p = spec.branch()[e.p].b;
            let q = spec.branch()[e.q].b;
            let mid = (p + q) * 0.5;
            let y0 = spec.principal_y(mid);
            let from_p = integrate_from_branch(spec, nu, e.p, mid, y0, rule)?;
            let from_q = integrate_from_branch(spec, nu, e.q, mid, y0, rule)?;
            Ok(from_p.iter().zip(&from_q).map(|(a, b)| a - b).collect())
        })
        .collect()
}

/// Periods of `nu` over each harvested cycle (rows = cycles).
pub fn cycle_periods(
    spec: &CyclicCurveSpec,
    nu: &[FunctionExpr],
    homology: &HomologyBasis,
    rule: &QuadratureRule,
) -> Result<Vec<Vec<C64>>> {
    let edge = edge_integrals(spec, nu, homology, rule)?;
    let zeta = spec.zeta();
    let r = spec.r() as i32;
    Ok(homology
        .cycles
        .iter()
        .map(|c| {
            nu.iter()
                .zip(&edge[c.edge])
                .map(|(f, ie)| {
                    let ye = f.terms[0].y_exp.rem_euclid(r);
                    let j = c.sheet as i32;
                    (zeta.powi(j * ye) - zeta.powi((j + 1) * ye)) * ie
                })
                .collect()
        })
        .collect())
}

/// `omega'`, `omega''` and `tau` for the canonical basis in `diff`.
pub fn period_matrices(spec: &CyclicCurveSpec, diff: &DifferentialData, rule: &QuadratureRule) -> Result<PeriodData> {
    let g = spec.genus();
    if diff.nu.len() != g || diff.nu.iter().any(|f| !f.is_monomial()) {
        return Err(Error::Precondition(
            "period matrices need the monomial forms nu of a cyclic canonical basis".into(),
        ));
    }
    let homology = homology_basis(spec)?;
    let per = cycle_periods(spec, &diff.nu, &homology, rule)?;
    let mut omega1 = DMatrix::zeros(g, g);
    let mut omega2 = DMatrix::zeros(g, g);
    for k in 0..g {
        for (c, coeffs) in [(k, &mut omega1), (k + g, &mut omega2)] {
            let comb = &homology.symplectic[c];
            for j in 0..g {
                let v: C64 = comb.iter().zip(&per).map(|(&n, p)| p[j] * n as f64).sum();
                coeffs[(j, k)] = v * 0.5;
            }
        }
    }
    PeriodData::from_omegas(omega1, omega2, Some(homology))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{canonical_basis, CurveSpec};
    use crate::samples;

    fn periods(spec: &CyclicCurveSpec, rule: &QuadratureRule) -> PeriodData {
        let diff = canonical_basis(&CurveSpec::Cyclic(spec.clone())).unwrap();
        period_matrices(spec, &diff, rule).unwrap()
    }

    /// Genus-1 reduction to the standard fundamental domain.
    fn reduce(mut t: C64) -> C64 {
        for _ in 0..100 {
            t.re -= t.re.round();
            if t.norm() < 1.0 - 1e-12 {
                t = -t.inv();
            } else {
                break;
            }
        }
        t
    }

    #[test]
    fn lemniscatic_tau_is_i() {
        let p = periods(&samples::lemniscatic(), &QuadratureRule::standard());
        let t = reduce(p.tau.tau()[(0, 0)]);
        assert!((t - C64::new(0.0, 1.0)).norm() < 1e-8, "{t}");
    }

    #[test]
    fn genus_two_fifth_roots_self_consistent() {
        let spec = samples::genus_two_fifth_roots();
        let p = periods(&spec, &QuadratureRule::standard());
        assert!(p.tau.asymmetry < 1e-9, "{}", p.tau.asymmetry);
        let q = periods(&spec, &QuadratureRule::doubled());
        let rel = (&p.omega1 - &q.omega1).norm() / p.omega1.norm();
        assert!(rel < 1e-9, "{rel}");
    }

    #[test]
    fn example_two_tau() {
        let p = periods(&samples::example_two(), &QuadratureRule::standard());
        assert_eq!(p.genus(), 8);
        assert!(p.tau.asymmetry < 1e-7, "{}", p.tau.asymmetry);
    }

    #[test]
    fn trigonal_and_general_genus_two() {
        for spec in [samples::trigonal(), samples::genus_two()] {
            let p = periods(&spec, &QuadratureRule::standard());
            assert!(p.tau.asymmetry < 1e-9, "{}", p.tau.asymmetry);
        }
    }

    #[test]
    fn lattice_points_have_integer_coords() {
        let p = periods(&samples::genus_two(), &QuadratureRule::standard());
        let v = p.lattice_point(&[1, -2], &[3, 0]);
        let z = p.normalize(&v);
        let (a, b) = p.normalized_coords(&z);
        assert!((a[0] - 1.0).abs() < 1e-9 && (a[1] + 2.0).abs() < 1e-9);
        assert!((b[0] - 3.0).abs() < 1e-9 && b[1].abs() < 1e-9);
        assert!(p.distance_to_lattice(&z) < 1e-9);
    }

    #[test]
    fn save_load_round_trip() {
        let p = periods(&samples::genus_two(), &QuadratureRule::standard());
        let dir = std::env::temp_dir().join(format!("wcurve-periods-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let file = dir.join("g2.txt");
        p.save(&file).unwrap();
        let q = PeriodData::load(&file, 2).unwrap();
        assert!((&p.omega1 - &q.omega1).norm() < 1e-15 * p.omega1.norm());
        assert!((p.tau.tau() - q.tau.tau()).norm() < 1e-12);
        assert!(matches!(
            PeriodData::load(&file, 3),
            Err(Error::ShapeMismatch { expected: 3, found: 2 })
        ));
        std::fs::write(&file, "genus 2\nomega1\n1 2 3\n").unwrap();
        assert!(matches!(PeriodData::load(&file, 2), Err(Error::Format { line: 3, .. })));
        std::fs::remove_dir_all(&dir).ok();
    }
}
