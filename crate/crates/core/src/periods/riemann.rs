//! Riemann constant for the base point at infinity.
//!
//! `2 xi = -w°(K)` modulo the lattice, and `K` is supported on the branch
//! points and infinity (the divisor of `phi_hat_0 dx / h`). That fixes `xi`
//! up to a half period, which is picked by the vanishing property
//! `theta(w°(D) + xi) = 0` for effective `D` of degree `g - 1`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::abel::AbelMap;
use crate::curve::{DifferentialData, Place, PointOnCurve};
use crate::error::{Error, Result};
use crate::theta::{theta, theta_all_characteristics, Characteristic};
use crate::C64;

/// A half period survives while `|theta|` stays below this on every divisor.
const SURVIVOR_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct RiemannOptions {
    pub divisors: usize,
    pub seed: u64,
    pub eps: f64,
    /// Run the `4^g` half-period search beyond genus 4.
    pub allow_large_search: bool,
    pub max_points: usize,
}

impl Default for RiemannOptions {
    fn default() -> Self {
        RiemannOptions {
            divisors: 20,
            seed: 1,
            eps: 1e-12,
            allow_large_search: false,
            max_points: 5_000_000,
        }
    }
}

/// Data determined without any theta evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct RiemannClass {
    /// `(branch index, multiplicity)` of the finite part of `K`.
    pub k_fin: Vec<(usize, i64)>,
    /// Normalized `w°(K_fin)`.
    pub w_k: DVector<C64>,
    /// `-w°(K_fin) / 2`.
    pub xi0: DVector<C64>,
    /// Distance of `w°(K_fin)` (equivalently of `2 xi`) from the lattice.
    pub half_period_distance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiemannConstantData {
    /// Normalized, reduced to `a + tau b` with `a, b` in `[0, 1)`.
    pub xi: DVector<C64>,
    /// Equal to `xi` when `d_1 = 0`.
    pub xi_s: Option<DVector<C64>>,
    /// Characteristic with `xi_s = d' + tau d''` when `xi_s` is a half period.
    pub delta: Option<Characteristic>,
    pub class: RiemannClass,
    /// Largest `|theta(w°(D) + xi)|` over the test divisors, with the argument
    /// reduced into the fundamental cell.
    pub vanishing_residual: f64,
    /// Smallest `|theta|` among the rejected half periods (relative to the
    /// term moduli on the first divisor, at the reduced argument after).
    pub runner_up: f64,
    pub test_divisors: Vec<Vec<PointOnCurve>>,
}

/// Finite part of the canonical divisor and the induced class of `2 xi`.
pub fn riemann_class(am: &AbelMap, diff: &DifferentialData) -> Result<RiemannClass> {
    let spec = am.spec;
    let r = spec.r() as i64;
    let phi0 = diff.phi_hat[0]
        .expr
        .as_ref()
        .ok_or_else(|| Error::Precondition("phi_hat_0 has no expression".into()))?;
    let h = diff
        .h
        .expr
        .as_ref()
        .ok_or_else(|| Error::Precondition("h has no expression".into()))?;
    let mut k_fin = Vec::new();
    let g = am.nu.len();
    let mut w_k = DVector::zeros(g);
    for i in 0..spec.branch().len() {
        let place = Place::Branch(i);
        let c = phi0.valuation(spec, place)? + r - 1 - h.valuation(spec, place)?;
        if c != 0 {
            k_fin.push((i, c));
            w_k += am.point(&spec.branch_place(i))?.normalized * C64::new(c as f64, 0.0);
        }
    }
    let xi0 = &w_k * C64::new(-0.5, 0.0);
    let half_period_distance = am.periods.distance_to_lattice(&w_k);
    Ok(RiemannClass {
        k_fin,
        w_k,
        xi0,
        half_period_distance,
    })
}

/// `n` random points off the branch locus, `|x| <= 2`.
pub fn random_points(am: &AbelMap, rng: &mut ChaCha8Rng, n: usize) -> Vec<PointOnCurve> {
    let spec = am.spec;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let sheet = rng.random_range(0..spec.r());
        if spec.near_branch(x, 0.05).is_some() {
            continue;
        }
        if let Ok(p) = spec.point_on_curve(x, sheet) {
            out.push(p);
        }
    }
    out
}

/// `z` moved by a lattice vector into `a + tau b`, `a, b` in `[0, 1)`.
pub fn reduce_to_cell(am: &AbelMap, z: &DVector<C64>) -> DVector<C64> {
    let (a, b) = am.periods.normalized_coords(z);
    let tau = am.periods.tau.tau();
    let g = z.len();
    let af = DVector::from_fn(g, |i, _| C64::new(a[i] - a[i].floor(), 0.0));
    let bf = DVector::from_fn(g, |i, _| C64::new(b[i] - b[i].floor(), 0.0));
    af + tau * bf
}

pub fn riemann_constant(am: &AbelMap, diff: &DifferentialData, opts: &RiemannOptions) -> Result<RiemannConstantData> {
    let g = am.nu.len();
    if g > 4 && !opts.allow_large_search {
        return Err(Error::CharacteristicSearchSkipped(g));
    }
    let class = riemann_class(am, diff)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let count = if g == 1 { 1 } else { opts.divisors };
    let test_divisors: Vec<Vec<PointOnCurve>> = (0..count).map(|_| random_points(am, &mut rng, g - 1)).collect();
    let shifts: Vec<DVector<C64>> = test_divisors
        .iter()
        .map(|d| Ok(am.periods.normalize(&am.points(d)?) + &class.xi0))
        .collect::<Result<_>>()?;

    let tau = &am.periods.tau;
    // all half periods at the first divisor, relative to the term moduli
    let all = theta_all_characteristics(&shifts[0], tau, opts.eps, opts.max_points)?;
    let mut runner_up = f64::INFINITY;
    let mut survivors = Vec::new();
    for cv in all {
        let s = cv.value.norm() / cv.abs_sum;
        if s < SURVIVOR_TOL {
            survivors.push(cv.delta);
        } else {
            runner_up = runner_up.min(s);
        }
    }
    // the rest one by one at the lattice-reduced argument
    for z in &shifts[1..] {
        let mut kept = Vec::new();
        for d in survivors {
            let v = theta(&reduce_to_cell(am, &(z + d.half_period(tau.tau()))), tau, opts.eps)?.norm();
            if v < SURVIVOR_TOL {
                kept.push(d);
            } else {
                runner_up = runner_up.min(v);
            }
        }
        survivors = kept;
    }
    if survivors.len() != 1 {
        return Err(Error::VanishingTestFailed(format!(
            "{} half periods pass the vanishing test (runner-up {runner_up:e})",
            survivors.len()
        )));
    }
    let delta = survivors.pop().expect("one survivor");
    let xi = reduce_to_cell(am, &(&class.xi0 + delta.half_period(tau.tau())));
    let mut vanishing_residual: f64 = 0.0;
    for d in &test_divisors {
        let z = am.periods.normalize(&am.points(d)?) + &xi;
        let v = theta(&reduce_to_cell(am, &z), tau, opts.eps)?;
        vanishing_residual = vanishing_residual.max(v.norm());
    }
    let (xi_s, delta) = if diff.d1 == 0 {
        let hp = reduce_to_cell(am, &delta.half_period(tau.tau()));
        // delta describes xi itself only when K_fin contributes nothing
        let same = (&hp - &xi).norm() < 1e-8;
        (Some(xi.clone()), same.then_some(delta))
    } else {
        (None, None)
    };
    Ok(RiemannConstantData {
        xi,
        xi_s,
        delta,
        class,
        vanishing_residual,
        runner_up,
        test_divisors,
    })
}
