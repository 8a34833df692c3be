//! Abel map from the base point at infinity along explicit paths: a ray
//! `x = x_1 t^{-r}` in from infinity, straight segments through optional
//! waypoints, and a ramified end piece when the target is a branch point.

use nalgebra::DVector;

use super::matrices::PeriodData;
use super::path::{
    continue_y, integrate_from_branch, integrate_ray, integrate_segment, segment_clearance, QuadratureRule,
};
use crate::curve::{CyclicCurveSpec, DifferentialData, FunctionExpr, PointKind, PointOnCurve};
use crate::error::{Error, Result};
use crate::C64;

/// The contour realizing a point: ray angle, waypoints, and the sheet of the
/// ray (`y(x_1) = zeta^sheet * principal(x_1)`).
#[derive(Debug, Clone, PartialEq)]
pub struct AbelPath {
    pub ray_angle: f64,
    pub ray_radius: f64,
    pub waypoints: Vec<C64>,
    pub sheet: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AbelResult {
    /// Unnormalized `int_inf^P nu`.
    pub value: DVector<C64>,
    /// `(2 omega')^{-1} value`.
    pub normalized: DVector<C64>,
    /// `None` for the base point.
    pub path: Option<AbelPath>,
}

/// Optional routing for [`AbelMap::point_with`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PathHint {
    pub ray_angle: Option<f64>,
    pub waypoints: Vec<C64>,
}

/// Minimum distance from a path piece to any branch point it does not end at.
const MIN_CLEARANCE: f64 = 1e-6;

pub struct AbelMap<'a> {
    pub spec: &'a CyclicCurveSpec,
    pub nu: &'a [FunctionExpr],
    pub periods: &'a PeriodData,
    pub rule: QuadratureRule,
}

impl<'a> AbelMap<'a> {
    pub fn new(spec: &'a CyclicCurveSpec, diff: &'a DifferentialData, periods: &'a PeriodData) -> Self {
        AbelMap {
            spec,
            nu: &diff.nu,
            periods,
            rule: QuadratureRule::standard(),
        }
    }

    fn radius(&self, x: C64) -> f64 {
        let bmax = self.spec.branch().iter().map(|bp| bp.b.norm()).fold(0.0, f64::max);
        (2.0 * bmax + 1.0).max(x.norm() + 1.0)
    }

    /// End of the straight part: the point itself, or a point near the branch
    /// point from which the ramified piece is integrated.
    fn landing(&self, p: &PointOnCurve, approach: C64) -> C64 {
        match p.kind {
            PointKind::Branch(s) => {
                let b = self.spec.branch()[s].b;
                let near = self
                    .spec
                    .branch()
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != s)
                    .map(|(_, bp)| (bp.b - b).norm())
                    .fold(1.0, f64::min);
                let dir = approach - b;
                b + dir / dir.norm() * (0.3 * near)
            }
            _ => p.x,
        }
    }

    fn clearance(&self, verts: &[C64]) -> f64 {
        verts
            .windows(2)
            .map(|w| segment_clearance(self.spec, w[0], w[1], &[]))
            .fold(f64::INFINITY, f64::min)
    }

    fn auto_path(&self, p: &PointOnCurve) -> (f64, Vec<C64>) {
        let rad = self.radius(p.x);
        let base = match p.kind {
            PointKind::Branch(s) => self.spec.branch()[s].b.arg(),
            _ => p.x.arg(),
        };
        let mut best = (f64::NEG_INFINITY, base, Vec::new());
        for k in 0..16 {
            let step = ((k + 1) / 2) as f64 * 0.4 * if k % 2 == 0 { 1.0 } else { -1.0 };
            let theta = base + step;
            let x1 = C64::from_polar(rad, theta);
            let verts = vec![x1, self.landing(p, x1)];
            let c = self.clearance(&verts);
            if c > best.0 {
                best = (c, theta, verts);
            }
            if c > 0.05 * rad {
                break;
            }
        }
        (best.1, best.2)
    }

    /// `w~(P)` along an automatically chosen path.
    pub fn point(&self, p: &PointOnCurve) -> Result<AbelResult> {
        self.point_with(p, &PathHint::default())
    }

    pub fn point_with(&self, p: &PointOnCurve, hint: &PathHint) -> Result<AbelResult> {
        let g = self.nu.len();
        if p.kind == PointKind::Infinity {
            let zero = DVector::zeros(g);
            return Ok(AbelResult {
                value: zero.clone(),
                normalized: zero,
                path: None,
            });
        }
        let rad = self.radius(p.x);
        let (theta, verts) = match hint.ray_angle {
            None if hint.waypoints.is_empty() => self.auto_path(p),
            _ => {
                let theta = hint.ray_angle.unwrap_or_else(|| p.x.arg());
                let x1 = C64::from_polar(rad, theta);
                let mut verts = vec![x1];
                verts.extend(&hint.waypoints);
                let last = *verts.last().unwrap();
                verts.push(self.landing(p, last));
                (theta, verts)
            }
        };
        if self.clearance(&verts) < MIN_CLEARANCE {
            return Err(Error::BranchClearanceViolated(self.nearest_branch(&verts)));
        }

        let x1 = verts[0];
        let mut y = self.spec.principal_y(x1);
        let mut total = integrate_ray(self.spec, self.nu, x1, y, &self.rule)?;
        for w in verts.windows(2) {
            let (part, y1) = integrate_segment(self.spec, self.nu, w[0], y, w[1], &self.rule)?;
            for (t, v) in total.iter_mut().zip(part) {
                *t += v;
            }
            y = y1;
        }
        let x_end = *verts.last().unwrap();
        let sheet = match p.kind {
            PointKind::Branch(s) => {
                let tail = integrate_from_branch(self.spec, self.nu, s, x_end, y, &self.rule)?;
                for (t, v) in total.iter_mut().zip(tail) {
                    *t -= v;
                }
                0
            }
            _ => {
                let ratio = p.y / y;
                let r = self.spec.r();
                let c = self.spec.sheet_of(x_end, p.y) + r - self.spec.sheet_of(x_end, y);
                let c = c % r;
                let expect = self.spec.zeta().powu(c);
                if (ratio - expect).norm() > 1e-6 {
                    return Err(Error::PathCrossesBranchCut(format!(
                        "y ratio {ratio} at the end of the path is not a root of unity"
                    )));
                }
                let zeta = self.spec.zeta();
                for (t, f) in total.iter_mut().zip(self.nu) {
                    *t *= zeta.powi(c as i32 * f.terms[0].y_exp);
                }
                c
            }
        };
        let value = DVector::from_vec(total);
        Ok(AbelResult {
            normalized: self.periods.normalize(&value),
            value,
            path: Some(AbelPath {
                ray_angle: theta,
                ray_radius: rad,
                waypoints: verts[1..verts.len() - 1].to_vec(),
                sheet,
            }),
        })
    }

    fn nearest_branch(&self, verts: &[C64]) -> usize {
        (0..self.spec.branch().len())
            .min_by(|&a, &b| {
                let da = verts
                    .windows(2)
                    .map(|w| super::path::segment_distance(self.spec.branch()[a].b, w[0], w[1]))
                    .fold(f64::INFINITY, f64::min);
                let db = verts
                    .windows(2)
                    .map(|w| super::path::segment_distance(self.spec.branch()[b].b, w[0], w[1]))
                    .fold(f64::INFINITY, f64::min);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap_or(0)
    }

    /// `sum n_i w~(P_i)`.
    pub fn divisor(&self, divisor: &[(PointOnCurve, i64)]) -> Result<DVector<C64>> {
        let mut acc = DVector::zeros(self.nu.len());
        for (p, n) in divisor {
            acc += self.point(p)?.value * C64::new(*n as f64, 0.0);
        }
        Ok(acc)
    }

    /// `sum w~(P_i)` for an effective divisor given as a point list.
    pub fn points(&self, pts: &[PointOnCurve]) -> Result<DVector<C64>> {
        let mut acc = DVector::zeros(self.nu.len());
        for p in pts {
            acc += self.point(p)?.value;
        }
        Ok(acc)
    }

    /// `y` at the end of `verts` when starting on sheet 0 at `verts[0]`.
    pub fn continue_along(&self, verts: &[C64]) -> C64 {
        let mut y = self.spec.principal_y(verts[0]);
        for w in verts.windows(2) {
            y = continue_y(self.spec, w[0], y, w[1]);
        }
        y
    }
}
