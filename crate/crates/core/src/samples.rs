//! Fixed sample curves used by tests, the CLI and the acceptance suite.

use crate::curve::{BranchPoint, CyclicCurveSpec, LabelRules, PlaneWeierstrassSpec};
use crate::C64;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn cyclic(id: &str, r: u32, pts: &[(C64, u32)]) -> CyclicCurveSpec {
    let branch = pts.iter().map(|&(b, m)| BranchPoint { b, m }).collect();
    CyclicCurveSpec::new(id, r, branch).expect("sample curve is valid")
}

/// `y^2 = x^3 - x`, lattice of `i`.
pub fn lemniscatic() -> CyclicCurveSpec {
    cyclic(
        "lemniscatic",
        2,
        &[(c(-1.0, 0.0), 1), (c(0.0, 0.0), 1), (c(1.0, 0.0), 1)],
    )
}

/// `y^2 = (x - e_1) ... (x - e_5)` with scattered complex roots.
pub fn genus_two() -> CyclicCurveSpec {
    let roots = [c(-1.6, 0.3), c(-0.5, -0.8), c(0.2, 0.9), c(1.1, -0.2), c(1.9, 0.6)];
    let pts: Vec<_> = roots.iter().map(|&b| (b, 1)).collect();
    cyclic("genus-two", 2, &pts)
}

/// `y^2 = x^5 - 1`.
pub fn genus_two_fifth_roots() -> CyclicCurveSpec {
    let pts: Vec<_> = (0..5)
        .map(|k| (C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 5.0), 1))
        .collect();
    cyclic("x5-minus-1", 2, &pts)
}

/// `y^3 = (x - b_1) ... (x - b_4)`, genus 3, semigroup `<3, 4>`.
pub fn trigonal() -> CyclicCurveSpec {
    let roots = [c(-1.4, -0.4), c(-0.3, 1.0), c(0.6, -0.7), c(1.5, 0.5)];
    let pts: Vec<_> = roots.iter().map(|&b| (b, 1)).collect();
    cyclic("trigonal", 3, &pts)
}

/// `y^5 = k_2(x)^2 k_3(x)`, genus 8, semigroup `<5, 7, 11>`.
pub fn example_two() -> CyclicCurveSpec {
    cyclic(
        "pentagonal",
        5,
        &[
            (c(-1.3, 0.2), 2),
            (c(0.4, -0.9), 2),
            (c(1.1, 0.7), 1),
            (c(-0.2, 1.5), 1),
            (c(2.0, -0.4), 1),
        ],
    )
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![c(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn from_roots(roots: &[C64]) -> Vec<C64> {
    roots
        .iter()
        .fold(vec![c(1.0, 0.0)], |acc, &r| poly_mul(&acc, &[-r, c(1.0, 0.0)]))
}

/// Plane model with `m = 5`, `n = 7` and fixed generic coefficients.
pub fn example_one() -> PlaneWeierstrassSpec {
    let row = |d: usize, seed: f64| -> Vec<C64> {
        (0..=d)
            .map(|j| c((seed * (j as f64 + 1.3)).sin(), (seed * (j as f64 + 0.7)).cos() * 0.5))
            .collect()
    };
    let mut a5 = row(7, 0.9);
    a5[7] = c(1.0, 0.0);
    PlaneWeierstrassSpec {
        id: "example-i".into(),
        m: 5,
        n: 7,
        coeffs: vec![row(1, 0.3), row(2, 0.4), row(4, 0.5), row(5, 0.7), a5],
        extra_generators: vec![],
        d1: None,
        semigroup_generators: None,
        labels: LabelRules {
            caps: vec![("y".into(), 4)],
            default_cap: None,
            total_cap: None,
        },
    }
}

/// `y^3 + a_1 k_2 y^2 + a_2 k~_2 k_2 y + k_2^2 k_3 = 0`, semigroup `<3, 7, 8>`
/// with the extra generator `w = k_2 k_3 / y` of weight 8.
pub fn example_three() -> PlaneWeierstrassSpec {
    let b = [
        c(-1.2, 0.1),
        c(0.3, -0.6),
        c(0.9, 0.8),
        c(-0.4, 1.3),
        c(1.7, -0.2),
        c(-1.0, -1.1),
        c(0.5, 1.6),
    ];
    let (a1, a2) = (c(0.7, -0.2), c(-0.4, 0.9));
    let k2 = from_roots(&b[0..2]);
    let k3 = from_roots(&b[2..5]);
    let kt2 = from_roots(&b[5..7]);
    let scale = |p: Vec<C64>, s: C64| p.into_iter().map(|v| v * s).collect::<Vec<_>>();
    PlaneWeierstrassSpec {
        id: "example-iii".into(),
        m: 3,
        n: 7,
        coeffs: vec![
            scale(k2.clone(), a1),
            scale(poly_mul(&kt2, &k2), a2),
            poly_mul(&poly_mul(&k2, &k2), &k3),
        ],
        extra_generators: vec![("w".into(), 8)],
        d1: Some(5),
        semigroup_generators: Some(vec![3, 7, 8]),
        labels: LabelRules {
            caps: vec![("w".into(), 2), ("y".into(), 2)],
            default_cap: None,
            total_cap: Some(2),
        },
    }
}
