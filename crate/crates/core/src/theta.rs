//! Riemann theta functions with characteristics, their gradients and
//! Hessians, summed over a truncation ellipsoid with a certified tail bound.
//!
//! `theta[d](z, tau) = sum_n exp(pi i (n+d')^T tau (n+d') + 2 pi i (n+d')^T (z+d''))`.
//!
//! Before summation `z` is reduced by `tau k` (`k = round(Y^{-1} Im z)`) and
//! the exact quasi-periodicity factor is reapplied. `eps` bounds the
//! truncation error of the reduced sum.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannMatrix {
    tau: DMatrix<C64>,
    /// `U` with `pi Y = U^T U`, upper triangular.
    u: DMatrix<f64>,
    y_inv: DMatrix<f64>,
    lambda_min: f64,
    /// `max |tau - tau^T|` before symmetrization.
    pub asymmetry: f64,
}

impl RiemannMatrix {
    pub fn new(tau: DMatrix<C64>) -> Result<Self> {
        Self::with_tolerance(tau, 1e-9)
    }

    /// Admits `tau` if `max |tau - tau^T| <= tol * max(1, max |tau|)`.
    pub fn with_tolerance(tau: DMatrix<C64>, tol: f64) -> Result<Self> {
        let g = tau.nrows();
        if g == 0 || tau.ncols() != g {
            return Err(Error::NotRiemannMatrix(format!(
                "tau must be square and nonempty, got {}x{}",
                tau.nrows(),
                tau.ncols()
            )));
        }
        let asymmetry = (&tau - tau.transpose()).iter().map(|v| v.norm()).fold(0.0, f64::max);
        let scale = tau.iter().map(|v| v.norm()).fold(1.0, f64::max);
        if asymmetry > tol * scale {
            return Err(Error::TauNotSymmetric(asymmetry));
        }
        let tau = (&tau + tau.transpose()) * C64::new(0.5, 0.0);
        let y = tau.map(|v| v.im);
        let chol = nalgebra::Cholesky::new(y.clone() * PI)
            .ok_or_else(|| Error::NotRiemannMatrix("Im tau is not positive definite".into()))?;
        let u = chol.l().transpose();
        let lambda_min = y.clone().symmetric_eigenvalues().min();
        if lambda_min <= 0.0 {
            return Err(Error::NotRiemannMatrix(format!("Im tau has eigenvalue {lambda_min}")));
        }
        let y_inv = y.try_inverse().expect("positive definite");
        Ok(RiemannMatrix {
            tau,
            u,
            y_inv,
            lambda_min,
            asymmetry,
        })
    }

    pub fn genus(&self) -> usize {
        self.tau.nrows()
    }

    pub fn tau(&self) -> &DMatrix<C64> {
        &self.tau
    }

    pub fn lambda_min(&self) -> f64 {
        self.lambda_min
    }

    /// `Y^{-1} Im z`: coordinates of `z` in the `tau`-direction of the lattice.
    pub fn lattice_coords(&self, z: &DVector<C64>) -> DVector<f64> {
        &self.y_inv * z.map(|v| v.im)
    }
}

/// Characteristic `d = (d', d'')` with entries in `{0, 1/2}`, stored as bits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Characteristic {
    pub d1: Vec<u8>,
    pub d2: Vec<u8>,
}

impl Characteristic {
    pub fn zero(g: usize) -> Self {
        Characteristic {
            d1: vec![0; g],
            d2: vec![0; g],
        }
    }

    pub fn from_bits(g: usize, bits1: u32, bits2: u32) -> Self {
        Characteristic {
            d1: (0..g).map(|i| ((bits1 >> i) & 1) as u8).collect(),
            d2: (0..g).map(|i| ((bits2 >> i) & 1) as u8).collect(),
        }
    }

    pub fn genus(&self) -> usize {
        self.d1.len()
    }

    pub fn delta1(&self) -> Vec<f64> {
        self.d1.iter().map(|&b| b as f64 / 2.0).collect()
    }

    pub fn delta2(&self) -> Vec<f64> {
        self.d2.iter().map(|&b| b as f64 / 2.0).collect()
    }

    /// `e(d) = exp(4 pi i d'.d'') = (-1)^{4 d'.d''}`.
    pub fn parity(&self) -> i32 {
        let dot: u32 = self.d1.iter().zip(&self.d2).map(|(a, b)| (a * b) as u32).sum();
        if dot.is_multiple_of(2) {
            1
        } else {
            -1
        }
    }

    /// Half period `d'' + tau d'` represented by this characteristic.
    pub fn half_period(&self, tau: &DMatrix<C64>) -> DVector<C64> {
        let d1 = DVector::from_vec(self.delta1()).map(|v| C64::new(v, 0.0));
        let d2 = DVector::from_vec(self.delta2()).map(|v| C64::new(v, 0.0));
        d2 + tau * d1
    }

    /// All `2^{2g}` characteristics, `d'` bits major.
    pub fn all(g: usize) -> Vec<Characteristic> {
        let n = 1u32 << g;
        (0..n)
            .flat_map(|a| (0..n).map(move |b| Characteristic::from_bits(g, a, b)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThetaResult {
    pub value: C64,
    pub grad: Option<DVector<C64>>,
    pub hessian: Option<DMatrix<C64>>,
    /// Certified bound on the truncation error of the reduced sum (largest
    /// over the requested derivative orders).
    pub tail_bound: f64,
    pub radius: f64,
    pub points: usize,
}

/// Evaluation context: matrix, characteristic and truncation control.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaContext {
    pub tau: RiemannMatrix,
    pub delta: Characteristic,
    pub eps: f64,
    pub max_radius: f64,
    pub max_points: usize,
}

impl ThetaContext {
    pub fn new(tau: RiemannMatrix, eps: f64) -> Self {
        let g = tau.genus();
        ThetaContext {
            tau,
            delta: Characteristic::zero(g),
            eps,
            max_radius: 40.0,
            max_points: 20_000_000,
        }
    }

    pub fn with_characteristic(mut self, delta: Characteristic) -> Self {
        self.delta = delta;
        self
    }

    pub fn value(&self, z: &DVector<C64>) -> Result<C64> {
        Ok(self.eval(z, 0)?.value)
    }

    pub fn grad(&self, z: &DVector<C64>) -> Result<DVector<C64>> {
        Ok(self.eval(z, 1)?.grad.expect("order 1"))
    }

    pub fn hessian(&self, z: &DVector<C64>) -> Result<DMatrix<C64>> {
        Ok(self.eval(z, 2)?.hessian.expect("order 2"))
    }

    /// Value and derivatives up to `order` (0, 1 or 2).
    pub fn eval(&self, z: &DVector<C64>, order: usize) -> Result<ThetaResult> {
        let g = self.tau.genus();
        if z.len() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                got: z.len(),
            });
        }
        if self.delta.genus() != g {
            return Err(Error::DimensionMismatch {
                expected: g,
                got: self.delta.genus(),
            });
        }
        assert!(self.eps > 0.0, "eps must be positive");
        let order = order.min(2);
        let red = reduce(&self.tau, z);
        let (radius, tail) = choose_radius(&self.tau, &red.c, order, self.eps, self.max_radius)?;
        let d1 = self.delta.delta1();
        let d2 = self.delta.delta2();
        let w: Vec<C64> = (0..g).map(|i| red.zr[i] + d2[i]).collect();

        let mut val = C64::new(0.0, 0.0);
        let mut grad = vec![C64::new(0.0, 0.0); if order >= 1 { g } else { 0 }];
        let mut hess = vec![C64::new(0.0, 0.0); if order >= 2 { g * g } else { 0 }];
        let points = enumerate(&self.tau, &red.c, &d1, radius, self.max_points, |m, q| {
            let lin: C64 = (0..g).map(|i| w[i] * m[i]).sum();
            let t = (I * PI * q + I * 2.0 * PI * lin).exp();
            val += t;
            if order >= 1 {
                for i in 0..g {
                    let ti = t * I * 2.0 * PI * m[i];
                    grad[i] += ti;
                    if order >= 2 {
                        for j in 0..g {
                            hess[i * g + j] += ti * I * 2.0 * PI * m[j];
                        }
                    }
                }
            }
        })?;

        // theta(z) = E * theta(z_r), E = exp(-pi i k^T tau k - 2 pi i k^T (z_r + d''))
        let k = &red.k;
        let ktk: C64 = (0..g)
            .flat_map(|i| (0..g).map(move |j| (i, j)))
            .map(|(i, j)| self.tau.tau[(i, j)] * k[i] * k[j])
            .sum();
        let kw: C64 = (0..g).map(|i| w[i] * k[i]).sum();
        let e = (-I * PI * ktk - I * 2.0 * PI * kw).exp();
        let a: Vec<C64> = k.iter().map(|&ki| -I * 2.0 * PI * ki).collect();
        let value = e * val;
        let grad_out = (order >= 1).then(|| DVector::from_fn(g, |i, _| e * (grad[i] + a[i] * val)));
        let hess_out = (order >= 2).then(|| {
            DMatrix::from_fn(g, g, |i, j| {
                e * (hess[i * g + j] + a[i] * grad[j] + a[j] * grad[i] + a[i] * a[j] * val)
            })
        });
        Ok(ThetaResult {
            value,
            grad: grad_out,
            hessian: hess_out,
            tail_bound: tail,
            radius,
            points,
        })
    }
}

struct Reduced {
    zr: Vec<C64>,
    k: Vec<f64>,
    /// `Y^{-1} Im z_r`.
    c: Vec<f64>,
}

fn reduce(tau: &RiemannMatrix, z: &DVector<C64>) -> Reduced {
    let g = tau.genus();
    let c0 = tau.lattice_coords(z);
    let k: Vec<f64> = c0.iter().map(|v| v.round()).collect();
    let zr: Vec<C64> = (0..g)
        .map(|i| z[i] - (0..g).map(|j| tau.tau[(i, j)] * k[j]).sum::<C64>())
        .collect();
    let c: Vec<f64> = (0..g).map(|i| c0[i] - k[i]).collect();
    Reduced { zr, k, c }
}

/// `int_U^inf u^k e^{-u^2} du` for `k = 0..=kmax`, with `erfc` replaced by
/// the upper bound `erfc(U) <= 2 e^{-U^2} / (sqrt(pi) (U + sqrt(U^2 + 4/pi)))`.
fn gaussian_moments(u: f64, kmax: usize) -> Vec<f64> {
    let e = (-u * u).exp();
    let mut m = vec![0.0; kmax + 1];
    m[0] = e / (u + (u * u + 4.0 / PI).sqrt());
    if kmax >= 1 {
        m[1] = 0.5 * e;
    }
    for k in 2..=kmax {
        m[k] = (k as f64 - 1.0) / 2.0 * m[k - 2] + 0.5 * u.powi(k as i32 - 1) * e;
    }
    m
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Bound on `sum_{||v|| > R} |term|` for derivative order `d`, where
/// `v = U (m + c)`. Disjoint balls of radius `rho/2` around lattice points
/// give `e^{pi c^T Y c} g (2/rho)^g int_{R - rho/2}^inf e^{-(t - rho/2)^2}
/// t^{g-1} W_d(t + rho/2) dt` with `W_d(t) = (2 pi (t / sqrt(pi lambda_min)
/// + |c|))^d`; substituting `u = t - rho/2` makes it a Gaussian moment sum.
pub fn tail_bound(tau: &RiemannMatrix, c: &[f64], d: usize, radius: f64) -> f64 {
    let g = tau.genus();
    let rho = (PI * tau.lambda_min).sqrt();
    if radius < rho {
        return f64::INFINITY;
    }
    let cnorm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    // pi c^T Y c = |U c|^2
    let uc: f64 = (0..g)
        .map(|i| {
            let s: f64 = (i..g).map(|j| tau.u[(i, j)] * c[j]).sum();
            s * s
        })
        .sum();
    // t^{g-1} = (u + rho/2)^{g-1}
    let mut p = vec![1.0];
    for _ in 0..g - 1 {
        p = poly_mul(&p, &[rho / 2.0, 1.0]);
    }
    // W_d(u + rho) = (a u + a rho + b)^d
    let a = 2.0 * PI / (PI * tau.lambda_min).sqrt();
    let b = 2.0 * PI * cnorm;
    for _ in 0..d {
        p = poly_mul(&p, &[a * rho + b, a]);
    }
    let moments = gaussian_moments(radius - rho, p.len() - 1);
    let integral: f64 = p.iter().zip(&moments).map(|(c, m)| c * m).sum();
    uc.exp() * g as f64 * (2.0 / rho).powi(g as i32) * integral
}

fn choose_radius(tau: &RiemannMatrix, c: &[f64], order: usize, eps: f64, cap: f64) -> Result<(f64, f64)> {
    let rho = (PI * tau.lambda_min).sqrt();
    let mut r = rho.max(1.0);
    loop {
        let bound = (0..=order).map(|d| tail_bound(tau, c, d, r)).fold(0.0, f64::max);
        if bound < eps {
            return Ok((r, bound));
        }
        r += 0.25;
        if r > cap {
            return Err(Error::TruncationBudgetExceeded { radius: r, cap });
        }
    }
}

/// Visits every `m = n + d'` with `|U (m + c)| <= radius` in a fixed
/// lexicographic order (last coordinate outermost), passing `m` and
/// `m^T tau m`.
fn enumerate<F: FnMut(&[f64], C64)>(
    tau: &RiemannMatrix,
    c: &[f64],
    d1: &[f64],
    radius: f64,
    max_points: usize,
    mut visit: F,
) -> Result<usize> {
    let g = tau.genus();
    let mut m = vec![0.0; g];
    let mut count = 0usize;
    // tm[level] = tau * (m restricted to coordinates >= level)
    let mut tm = vec![vec![C64::new(0.0, 0.0); g]; g + 1];
    let mut q = vec![C64::new(0.0, 0.0); g + 1];
    #[allow(clippy::too_many_arguments)]
    fn rec<F: FnMut(&[f64], C64)>(
        i: usize,
        rem: f64,
        tau: &RiemannMatrix,
        c: &[f64],
        d1: &[f64],
        m: &mut Vec<f64>,
        tm: &mut Vec<Vec<C64>>,
        q: &mut Vec<C64>,
        count: &mut usize,
        max_points: usize,
        radius: f64,
        visit: &mut F,
    ) -> Result<()> {
        let g = m.len();
        let uii = tau.u[(i, i)];
        let s: f64 = (i + 1..g).map(|j| tau.u[(i, j)] * (m[j] + c[j])).sum();
        let center = -c[i] - s / uii;
        let hw = rem.max(0.0).sqrt() / uii;
        let lo = (center - hw - d1[i]).ceil() as i64;
        let hi = (center + hw - d1[i]).floor() as i64;
        for n in lo..=hi {
            let mi = n as f64 + d1[i];
            let t = uii * (mi + c[i]) + s;
            let rem_next = rem - t * t;
            if rem_next < -1e-12 * radius * radius {
                continue;
            }
            m[i] = mi;
            // q_i = q_{i+1} + 2 m_i (tau m_{>i})_i + tau_ii m_i^2
            q[i] = q[i + 1] + tm[i + 1][i] * (2.0 * mi) + tau.tau[(i, i)] * (mi * mi);
            if i == 0 {
                *count += 1;
                if *count > max_points {
                    return Err(Error::TruncationBudgetExceeded {
                        radius,
                        cap: max_points as f64,
                    });
                }
                visit(m, q[0]);
            } else {
                let (upper, lower) = tm.split_at_mut(i + 1);
                let next = &mut upper[i];
                let prev = &lower[0];
                for k in 0..g {
                    next[k] = prev[k] + tau.tau[(k, i)] * mi;
                }
                rec(i - 1, rem_next, tau, c, d1, m, tm, q, count, max_points, radius, visit)?;
            }
        }
        m[i] = 0.0;
        Ok(())
    }
    rec(
        g - 1,
        radius * radius,
        tau,
        c,
        d1,
        &mut m,
        &mut tm,
        &mut q,
        &mut count,
        max_points,
        radius,
        &mut visit,
    )?;
    Ok(count)
}

/// `theta(z, tau)` to truncation error `eps`.
pub fn theta(z: &DVector<C64>, tau: &RiemannMatrix, eps: f64) -> Result<C64> {
    ThetaContext::new(tau.clone(), eps).value(z)
}

pub fn theta_char(delta: &Characteristic, z: &DVector<C64>, tau: &RiemannMatrix, eps: f64) -> Result<C64> {
    ThetaContext::new(tau.clone(), eps)
        .with_characteristic(delta.clone())
        .value(z)
}

pub fn theta_grad(z: &DVector<C64>, tau: &RiemannMatrix, eps: f64) -> Result<DVector<C64>> {
    ThetaContext::new(tau.clone(), eps).grad(z)
}

pub fn theta_hessian(z: &DVector<C64>, tau: &RiemannMatrix, eps: f64) -> Result<DMatrix<C64>> {
    ThetaContext::new(tau.clone(), eps).hessian(z)
}

/// One entry of [`theta_all_characteristics`].
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicValue {
    pub delta: Characteristic,
    pub value: C64,
    /// Sum of the moduli of the summed terms (same scale as `value`), for
    /// relative smallness tests.
    pub abs_sum: f64,
}

/// `theta[d](z)` for all `2^{2g}` characteristics at once. For each `d'` the
/// lattice sum is split by `n mod 2`; the `d''` dependence is then a
/// Walsh-Hadamard transform over those classes. Order matches
/// `Characteristic::all`.
pub fn theta_all_characteristics(
    z: &DVector<C64>,
    tau: &RiemannMatrix,
    eps: f64,
    max_points: usize,
) -> Result<Vec<CharacteristicValue>> {
    let g = tau.genus();
    if g > 16 {
        return Err(Error::DimensionMismatch { expected: 16, got: g });
    }
    let red = reduce(tau, z);
    let (radius, _) = choose_radius(tau, &red.c, 0, eps, 40.0)?;
    let n = 1usize << g;
    let ktk: C64 = (0..g)
        .flat_map(|i| (0..g).map(move |j| (i, j)))
        .map(|(i, j)| tau.tau[(i, j)] * red.k[i] * red.k[j])
        .sum();
    let kz: C64 = (0..g).map(|i| red.zr[i] * red.k[i]).sum();
    let base = (-I * PI * ktk - I * 2.0 * PI * kz).exp();
    let mut out = Vec::with_capacity(n * n);
    for a in 0..n {
        let ch = Characteristic::from_bits(g, a as u32, 0);
        let d1 = ch.delta1();
        let mut classes = vec![C64::new(0.0, 0.0); n];
        let mut abs = 0.0;
        enumerate(tau, &red.c, &d1, radius, max_points, |m, q| {
            let lin: C64 = (0..g).map(|i| red.zr[i] * m[i]).sum();
            let t = (I * PI * q + I * 2.0 * PI * lin).exp();
            abs += t.norm();
            let mut p = 0usize;
            for (i, &mi) in m.iter().enumerate() {
                let ni = (mi - d1[i]).round() as i64;
                if ni.rem_euclid(2) == 1 {
                    p |= 1 << i;
                }
            }
            classes[p] += t;
        })?;
        // Walsh-Hadamard: out[e] = sum_p (-1)^{p.e} classes[p]
        let mut h = 1;
        while h < n {
            for start in (0..n).step_by(2 * h) {
                for j in start..start + h {
                    let (u, v) = (classes[j], classes[j + h]);
                    classes[j] = u + v;
                    classes[j + h] = u - v;
                }
            }
            h *= 2;
        }
        for b in 0..n {
            let ch = Characteristic::from_bits(g, a as u32, b as u32);
            // exp(2 pi i d'.d'') and the (-1)^{k.e''} part of the reduction factor
            let dd: f64 = ch.delta1().iter().zip(ch.delta2()).map(|(x, y)| x * y).sum();
            let kd: f64 = red.k.iter().zip(ch.delta2()).map(|(k, y)| k * y).sum();
            let phase = (I * 2.0 * PI * (dd - kd)).exp();
            out.push(CharacteristicValue {
                delta: ch,
                value: base * phase * classes[b],
                abs_sum: base.norm() * abs,
            });
        }
    }
    Ok(out)
}
