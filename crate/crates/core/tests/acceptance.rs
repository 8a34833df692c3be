//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criteria known to be unattainable print FAIL without aborting; any other
//! failure makes the target exit nonzero. Criterion 8 needs
//! `WCURVE_EXTENDED=1`.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wcurve_core::curve::{
    canonical_basis, extended_basis, monomial_basis, BasisFunction, CurveSpec, CyclicCurveSpec, DifferentialData,
};
use wcurve_core::fs_mu::mu_coefficients;
use wcurve_core::inversion::{
    burgers_residual, jacobi_inversion_check, jorgenson_check, pentagonal_check, relative_residual, InversionContext,
};
use wcurve_core::periods::{
    period_matrices, random_points, riemann_class, riemann_constant, AbelMap, PeriodData, QuadratureRule,
    RiemannConstantData, RiemannOptions,
};
use wcurve_core::semigroup::NumericalSemigroup;
use wcurve_core::theta::{theta, theta_char, theta_grad, theta_hessian, Characteristic, RiemannMatrix};
use wcurve_core::{samples, Error, C64};

/// Criteria that cannot pass as stated; see the project notes.
const UNATTAINABLE: &[usize] = &[7, 8];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

struct Fixture {
    spec: CyclicCurveSpec,
    diff: DifferentialData,
    periods: PeriodData,
    basis: Vec<BasisFunction>,
}

impl Fixture {
    fn new(spec: CyclicCurveSpec) -> Self {
        let diff = canonical_basis(&CurveSpec::Cyclic(spec.clone())).unwrap();
        let periods = period_matrices(&spec, &diff, &QuadratureRule::standard()).unwrap();
        let basis = extended_basis(&spec, spec.genus() + 1).unwrap();
        Fixture {
            spec,
            diff,
            periods,
            basis,
        }
    }

    fn abel(&self) -> AbelMap<'_> {
        AbelMap::new(&self.spec, &self.diff, &self.periods)
    }
}

fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

// 1. Semigroups

fn criterion_1() -> Outcome {
    let cases: [(&[u64], &[u64], u64, &[u64]); 3] = [
        (
            &[5, 7],
            &[1, 2, 3, 4, 6, 8, 9, 11, 13, 16, 18, 23],
            5,
            &[12, 8, 7, 5, 4, 3, 3, 2, 1, 1, 1, 1],
        ),
        (&[5, 7, 11], &[1, 2, 3, 4, 6, 8, 9, 13], 5, &[6, 3, 3, 2, 1, 1, 1, 1]),
        (&[3, 7, 8], &[1, 2, 4, 5], 3, &[2, 2, 1, 1]),
    ];
    let mut bad = vec![];
    for (gens, gaps, a_min, young) in cases {
        let s = NumericalSemigroup::from_generators(gens).unwrap();
        let sd = s.schubert_data();
        if s.gaps() != gaps || s.multiplicity() != a_min || sd.young != young {
            bad.push(format!("{gens:?}"));
        }
    }
    outcome(bad.is_empty(), format!("3 semigroups, mismatches {bad:?}"))
}

// 2. Basis tables

/// Monomial label as sorted (variable, exponent) pairs; `1` is empty.
fn monomial(label: &str) -> BTreeMap<char, u32> {
    let mut out = BTreeMap::new();
    let mut chars = label.chars().peekable();
    while let Some(c) = chars.next() {
        if !c.is_ascii_alphabetic() {
            continue;
        }
        let mut e = 0;
        if chars.peek() == Some(&'^') {
            chars.next();
            while let Some(d) = chars.peek().and_then(|d| d.to_digit(10)) {
                e = 10 * e + d;
                chars.next();
            }
        } else {
            e = 1;
        }
        *out.entry(c).or_insert(0) += e;
    }
    out
}

type Row = Vec<(u64, BTreeMap<char, u32>)>;

fn row(entries: &[(u64, &str)]) -> Row {
    entries.iter().map(|&(w, l)| (w, monomial(l))).collect()
}

fn computed(b: &[BasisFunction]) -> Row {
    b.iter().map(|f| (f.weight, monomial(&f.label))).collect()
}

#[rustfmt::skip]
fn criterion_2() -> Outcome {
    let t1_i = row(&[
        (0, "1"), (5, "x"), (7, "y"), (10, "x^2"), (12, "xy"), (14, "y^2"), (15, "x^3"), (17, "x^2y"),
        (19, "xy^2"), (20, "x^4"), (21, "y^3"), (22, "x^3y"), (24, "x^2y^2"),
    ]);
    let t1_ii = row(&[
        (0, "1"), (5, "x"), (7, "y"), (10, "x^2"), (11, "w"), (12, "xy"), (14, "y^2"), (15, "x^3"), (16, "xw"),
        (17, "x^2y"), (18, "wy"), (19, "xy^2"), (20, "x^4"), (21, "y^3"), (22, "x^3y"), (23, "xyw"), (24, "x^2y^2"),
    ]);
    // weights 23 and 24 use the corrected entries x^3y^2 and x^3yw; the
    // printed x^3y and x^3w^2 have weights 16 and 25
    let t1_iii = row(&[
        (0, "1"), (3, "x"), (6, "x^2"), (7, "y"), (8, "w"), (9, "x^3"), (10, "xy"), (11, "xw"), (12, "x^4"),
        (13, "x^2y"), (14, "y^2"), (15, "yw"), (16, "w^2"), (17, "xy^2"), (18, "xyw"), (19, "xw^2"),
        (20, "x^2y^2"), (21, "x^2yw"), (22, "x^2w^2"), (23, "x^3y^2"), (24, "x^3yw"),
    ]);
    let t2_i = row(&[
        (0, "1"), (5, "x"), (7, "y"), (10, "x^2"), (12, "xy"), (14, "y^2"), (15, "x^3"), (17, "x^2y"),
        (19, "xy^2"), (20, "x^4"), (21, "y^3"), (22, "x^3y"),
    ]);
    let t2_ii = row(&[(7, "y"), (11, "w"), (12, "xy"), (14, "y^2"), (16, "xw"), (17, "x^2y"), (18, "wy"), (19, "xy^2")]);
    let t2_iii = row(&[(7, "y"), (8, "w"), (10, "xy"), (11, "xw")]);
    let specs = [
        ("I", CurveSpec::Plane(samples::example_one()), t1_i, t2_i),
        ("II", CurveSpec::Cyclic(samples::example_two()), t1_ii, t2_ii),
        ("III", CurveSpec::Plane(samples::example_three()), t1_iii, t2_iii),
    ];
    let mut bad = vec![];
    for (name, spec, t1, t2) in specs {
        if computed(&monomial_basis(&spec, 24).unwrap()) != t1 {
            bad.push(format!("table 1 row {name}"));
        }
        if computed(&canonical_basis(&spec).unwrap().phi_hat) != t2 {
            bad.push(format!("table 2 row {name}"));
        }
    }
    outcome(bad.is_empty(), format!("rows I-III of both tables, mismatches {bad:?}"))
}

// 3. Theta

fn random_tau(rng: &mut ChaCha8Rng, g: usize) -> RiemannMatrix {
    let a = DMatrix::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
    let y = &a * a.transpose() + DMatrix::identity(g, g) * 0.4;
    let mut x = DMatrix::from_fn(g, g, |_, _| rng.random_range(-0.5..0.5));
    x = (&x + x.transpose()) * 0.5;
    RiemannMatrix::new(DMatrix::from_fn(g, g, |i, j| C64::new(x[(i, j)], y[(i, j)]))).unwrap()
}

fn unit(g: usize, i: usize, h: f64) -> DVector<C64> {
    DVector::from_fn(g, |k, _| if k == i { C64::new(h, 0.0) } else { C64::new(0.0, 0.0) })
}

/// Central differences of theta values with one Richardson step.
fn fd_grad(z: &DVector<C64>, tau: &RiemannMatrix, h: f64) -> DVector<C64> {
    let g = z.len();
    let th = |v: DVector<C64>| theta(&v, tau, 1e-15).unwrap();
    let d = |i: usize, h: f64| (th(z + unit(g, i, h)) - th(z - unit(g, i, h))) / (2.0 * h);
    DVector::from_fn(g, |i, _| (d(i, h / 2.0) * 4.0 - d(i, h)) / 3.0)
}

fn fd_hessian(z: &DVector<C64>, tau: &RiemannMatrix, h: f64) -> DMatrix<C64> {
    let g = z.len();
    let th = |v: DVector<C64>| theta(&v, tau, 1e-15).unwrap();
    let d = |i: usize, j: usize, h: f64| {
        let (ei, ej) = (unit(g, i, h), unit(g, j, h));
        (th(z + &ei + &ej) - th(z + &ei - &ej) - th(z - &ei + &ej) + th(z - &ei - &ej)) / (4.0 * h * h)
    };
    DMatrix::from_fn(g, g, |i, j| (d(i, j, h / 2.0) * 4.0 - d(i, j, h)) / 3.0)
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut parity, mut quasi, mut grad, mut hess) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let i = C64::new(0.0, 1.0);
    let pi = std::f64::consts::PI;
    for trial in 0..50 {
        let g = 1 + trial % 3;
        let tau = random_tau(&mut rng, g);
        let z = DVector::from_fn(g, |_, _| rand_c(&mut rng));
        for delta in Characteristic::all(g) {
            let e = if delta.d1.iter().zip(&delta.d2).map(|(a, b)| a * b).sum::<u8>() % 2 == 0 {
                1.0
            } else {
                -1.0
            };
            let plus = theta_char(&delta, &z, &tau, 1e-14).unwrap();
            let minus = theta_char(&delta, &(-&z), &tau, 1e-14).unwrap();
            parity = parity.max(relative_residual(minus, plus * e, 1e-12));
        }
        let m: Vec<i64> = (0..g).map(|_| rng.random_range(-1..=1)).collect();
        let n: Vec<i64> = (0..g).map(|_| rng.random_range(-1..=1)).collect();
        let mv = DVector::from_fn(g, |k, _| C64::new(m[k] as f64, 0.0));
        let shift = DVector::from_fn(g, |k, _| C64::new(n[k] as f64, 0.0)) + tau.tau() * &mv;
        let lhs = theta(&(&z + shift), &tau, 1e-14).unwrap();
        let quad = (mv.transpose() * tau.tau() * &mv)[(0, 0)];
        let lin = (mv.transpose() * &z)[(0, 0)];
        let rhs = (-i * pi * quad - i * 2.0 * pi * lin).exp() * theta(&z, &tau, 1e-14).unwrap();
        quasi = quasi.max(relative_residual(lhs, rhs, 1e-12));
        let gr = theta_grad(&z, &tau, 1e-14).unwrap();
        grad = grad.max((&gr - fd_grad(&z, &tau, 1e-3)).norm() / gr.norm().max(1e-12));
        let he = theta_hessian(&z, &tau, 1e-14).unwrap();
        hess = hess.max((&he - fd_hessian(&z, &tau, 1e-3)).norm() / he.norm().max(1e-12));
    }
    let pass = parity < 1e-8 && quasi < 1e-8 && grad < 1e-6 && hess < 1e-6;
    outcome(
        pass,
        format!(
            "50 trials g<=3: parity {parity:.1e}, quasi-periodicity {quasi:.1e}, grad {grad:.1e}, hessian {hess:.1e}"
        ),
    )
}

// 4. Periods

/// Arithmetic-geometric mean of positive reals.
fn agm(mut a: f64, mut b: f64) -> f64 {
    while (a - b).abs() > 1e-16 * a {
        (a, b) = ((a + b) / 2.0, (a * b).sqrt());
    }
    a
}

/// Representative of `t` in the standard fundamental domain of SL(2, Z).
fn reduce_upper(mut t: C64) -> C64 {
    for _ in 0..100 {
        t -= t.re.round();
        if t.norm() < 1.0 - 1e-12 {
            t = -1.0 / t;
        } else {
            break;
        }
    }
    t
}

fn criterion_4() -> Outcome {
    // y^2 = (x - 1) x (x + 1): real periods pi / agm(sqrt(e1 - e3), sqrt(e1 - e2))
    // and i pi / agm(sqrt(e1 - e3), sqrt(e2 - e3)).
    let (e1, e2, e3) = (1.0f64, 0.0f64, -1.0f64);
    let w1 = std::f64::consts::PI / agm((e1 - e3).sqrt(), (e1 - e2).sqrt());
    let w2 = std::f64::consts::PI / agm((e1 - e3).sqrt(), (e2 - e3).sqrt());
    let oracle = reduce_upper(C64::new(0.0, w2 / w1));
    let lem = Fixture::new(samples::lemniscatic());
    let tau_err = (reduce_upper(lem.periods.tau.tau()[(0, 0)]) - oracle).norm();
    let mut asym = 0.0f64;
    let mut min_eig = f64::INFINITY;
    let mut drift = 0.0f64;
    let curves = [
        samples::lemniscatic(),
        samples::genus_two(),
        samples::genus_two_fifth_roots(),
        samples::trigonal(),
        samples::example_two(),
    ];
    for spec in curves {
        let diff = canonical_basis(&CurveSpec::Cyclic(spec.clone())).unwrap();
        let p = period_matrices(&spec, &diff, &QuadratureRule::standard()).unwrap();
        asym = asym.max(p.tau.asymmetry);
        min_eig = min_eig.min(p.tau.lambda_min());
        if spec.genus() <= 3 {
            let q = period_matrices(&spec, &diff, &QuadratureRule::doubled()).unwrap();
            for (a, b) in [(&p.omega1, &q.omega1), (&p.omega2, &q.omega2)] {
                drift = drift.max((a - b).norm() / a.norm());
            }
        }
    }
    let pass = tau_err < 1e-8 && asym < 1e-7 && min_eig > 0.0 && drift < 1e-9;
    outcome(
        pass,
        format!(
            "tau vs AGM {tau_err:.1e}, max asymmetry {asym:.1e}, min eig Im tau {min_eig:.3}, doubled order {drift:.1e}"
        ),
    )
}

// 5. Riemann constant

fn riemann(f: &Fixture, am: &AbelMap) -> RiemannConstantData {
    riemann_constant(am, &f.diff, &RiemannOptions::default()).unwrap()
}

fn criterion_5(fixtures: &[&Fixture]) -> Outcome {
    let mut vanish = 0.0f64;
    let mut recovery = 0.0f64;
    let mut divisors = 0;
    for f in fixtures {
        let am = f.abel();
        let rc = riemann(f, &am);
        divisors = divisors.max(rc.test_divisors.len());
        vanish = vanish.max(rc.vanishing_residual);
        assert_eq!(f.diff.d1, 0);
        let two_xi = &rc.xi * C64::new(2.0, 0.0) + &rc.class.w_k;
        recovery = recovery.max(f.periods.distance_to_lattice(&two_xi));
    }
    let ex2 = Fixture::new(samples::example_two());
    let class = riemann_class(&ex2.abel(), &ex2.diff).unwrap();
    let off = class.half_period_distance;
    let pass = divisors == 20 && vanish < 1e-6 && recovery < 1e-6 && off > 1e-3;
    outcome(
        pass,
        format!(
            "genus 2 and 3: vanishing {vanish:.1e} on {divisors} divisors, recovery {recovery:.1e}; (5,7,11) curve: 2 xi off lattice by {off:.3}"
        ),
    )
}

// 6. Jorgenson

fn criterion_6(fixtures: &[(&Fixture, f64)]) -> Outcome {
    let mut parts = vec![];
    let mut pass = true;
    for &(f, tol) in fixtures {
        let am = f.abel();
        let rc = riemann(f, &am);
        let ctx = InversionContext::new(&am, &f.diff, &f.basis, &rc, 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let g = f.spec.genus();
        let mut worst = 0.0f64;
        for _ in 0..20 {
            let pts = random_points(&am, &mut rng, g - 1);
            let a: Vec<C64> = (0..g).map(|_| rand_c(&mut rng)).collect();
            let b: Vec<C64> = (0..g).map(|_| rand_c(&mut rng)).collect();
            worst = worst.max(jorgenson_check(&ctx, &pts, &a, &b).map_or(f64::INFINITY, |r| r.residual));
        }
        pass &= worst < tol;
        parts.push(format!("genus {g}: {worst:.1e} (< {tol:e})"));
    }
    outcome(pass, format!("20 configurations each, {}", parts.join(", ")))
}

// 7. Jacobi inversion

fn inversion_levels(f: &Fixture, levels: &[usize], tol: f64) -> (f64, Vec<String>) {
    let am = f.abel();
    let rc = riemann(f, &am);
    let ctx = InversionContext::new(&am, &f.diff, &f.basis, &rc, 1e-13);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut errors = vec![];
    for _ in 0..20 {
        for &k in levels {
            let pts = random_points(&am, &mut rng, k);
            for i in 1..=k {
                match jacobi_inversion_check(&ctx, &pts, i) {
                    Ok(r) => worst = worst.max(r.residual),
                    Err(e) => {
                        let msg = format!("k={k}: {e}");
                        if !errors.contains(&msg) {
                            errors.push(msg);
                        }
                    }
                }
            }
        }
    }
    assert!(worst < tol, "attainable inversion levels exceed {tol}: {worst}");
    (worst, errors)
}

fn criterion_7(g2: &Fixture, g3: &Fixture) -> Outcome {
    let (w2, e2) = inversion_levels(g2, &[1, 2], 1e-6);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let am = g2.abel();
    let mut sym = 0.0f64;
    for _ in 0..20 {
        let p = random_points(&am, &mut rng, 2);
        let exp = mu_coefficients(&g2.spec, &g2.basis, &p).unwrap();
        sym = sym.max(relative_residual(exp.coefficients[1], p[0].x + p[1].x, 1e-12));
        sym = sym.max(relative_residual(exp.coefficients[0], p[0].x * p[1].x, 1e-12));
    }
    let (w3, e3) = inversion_levels(g3, &[1, 2], 1e-5);
    let (_, e3_top) = {
        let am = g3.abel();
        let rc = riemann(g3, &am);
        let ctx = InversionContext::new(&am, &g3.diff, &g3.basis, &rc, 1e-13);
        let pts = random_points(&am, &mut ChaCha8Rng::seed_from_u64(27), 3);
        let errs: Vec<String> = (1..=3)
            .filter_map(|i| match jacobi_inversion_check(&ctx, &pts, i) {
                Err(Error::StratumOutOfRange { .. }) => Some("k=3 outside 1 <= k < g".to_string()),
                Err(e) => Some(format!("k=3: {e}")),
                Ok(_) => None,
            })
            .collect();
        ((), errs)
    };
    let pass = e2.is_empty() && e3.is_empty() && e3_top.is_empty() && w2 < 1e-6 && w3 < 1e-5 && sym < 1e-9;
    let mut detail = format!("genus 2 k=1,2: {w2:.1e}, symmetric functions {sym:.1e}; trigonal k=1,2: {w3:.1e}");
    let mut errs: Vec<String> = e2.into_iter().chain(e3).collect();
    if let Some(first) = e3_top.first() {
        errs.push(format!("trigonal {first}"));
    }
    if !errs.is_empty() {
        detail.push_str(&format!("; not evaluated: {}", errs.join("; ")));
    }
    outcome(pass, detail)
}

// 8. Extended genus 8

fn criterion_8() -> Option<Outcome> {
    if !std::env::var("WCURVE_EXTENDED").is_ok_and(|v| v == "1") {
        return None;
    }
    let t = Instant::now();
    let f = Fixture::new(samples::example_two());
    let period_time = t.elapsed();
    let basis = extended_basis(&f.spec, 9).unwrap();
    let am = f.abel();
    let opts = RiemannOptions {
        allow_large_search: true,
        ..RiemannOptions::default()
    };
    let rc = riemann_constant(&am, &f.diff, &opts).unwrap();
    let ctx = InversionContext::new(&am, &f.diff, &basis, &rc, 1e-12);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let mut errors = vec![];
    for p in random_points(&am, &mut rng, 3) {
        match pentagonal_check(&ctx, &p) {
            Ok(r) => worst = worst.max(r.residual),
            Err(e) => errors.push(e.to_string()),
        }
    }
    let pass = errors.is_empty() && worst < 1e-4 && period_time < Duration::from_secs(600);
    let mut detail = format!("periods in {:.1} s", period_time.as_secs_f64());
    if errors.is_empty() {
        detail.push_str(&format!(", d1/d2 residual {worst:.1e} at 3 points"));
    } else {
        detail.push_str(&format!(
            ", d1/d2 check failed at {}/3 points: {}",
            errors.len(),
            errors[0]
        ));
    }
    Some(outcome(pass, detail))
}

// 9. Burgers

fn criterion_9(g2: &Fixture) -> Outcome {
    let am = g2.abel();
    let rc = riemann(g2, &am);
    let ctx = InversionContext::new(&am, &g2.diff, &g2.basis, &rc, 1e-13);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = 0.0f64;
    for p in random_points(&am, &mut rng, 10) {
        let r = burgers_residual(&ctx, &p, 0, 1).unwrap();
        worst = worst.max(r.residual).max(r.fd_discrepancy);
    }
    outcome(worst < 1e-5, format!("genus 2, 10 points: residual {worst:.1e}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut failed = vec![];
    let mut report = |n: usize, name: &str, budget: Option<Duration>, run: &mut dyn FnMut() -> Option<Outcome>| {
        let t = Instant::now();
        let Some(mut o) = run() else {
            println!("criterion {n} [{name}]: SKIPPED (set WCURVE_EXTENDED=1)");
            return;
        };
        let dt = t.elapsed();
        if let Some(b) = budget {
            if dt > b {
                o.pass = false;
                o.detail.push_str(&format!("; over the {} s budget", b.as_secs()));
            }
        }
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n} [{name}]: {verdict} ({:.2} s) {}",
            dt.as_secs_f64(),
            o.detail
        );
        if !o.pass {
            failed.push(n);
        }
    };
    let secs = Duration::from_secs;
    report(1, "semigroup golden data", Some(secs(1)), &mut || Some(criterion_1()));
    report(2, "basis golden data", Some(secs(1)), &mut || Some(criterion_2()));
    report(3, "theta suite", Some(secs(30)), &mut || Some(criterion_3()));
    report(4, "periods", Some(secs(60)), &mut || Some(criterion_4()));
    let g2 = Fixture::new(samples::genus_two());
    let g3 = Fixture::new(samples::trigonal());
    report(5, "Riemann constant", None, &mut || Some(criterion_5(&[&g2, &g3])));
    report(6, "Jorgenson identity", Some(secs(120)), &mut || {
        Some(criterion_6(&[(&g2, 1e-6), (&g3, 1e-5)]))
    });
    report(7, "Jacobi inversion", Some(secs(120)), &mut || {
        Some(criterion_7(&g2, &g3))
    });
    report(8, "extended genus 8", None, &mut criterion_8);
    report(9, "Burgers residual", None, &mut || Some(criterion_9(&g2)));
    report(10, "offline and fast", None, &mut || {
        let total = start.elapsed();
        let detail = format!(
            "no network or data files, acceptance target ran in {:.1} s",
            total.as_secs_f64()
        );
        Some(outcome(total < secs(300), detail))
    });
    let unexpected: Vec<_> = failed.iter().filter(|n| !UNATTAINABLE.contains(n)).collect();
    println!("failed {failed:?}, known unattainable {UNATTAINABLE:?}");
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
