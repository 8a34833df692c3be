//! Weight-ordered monomial bases, the denominator `h`, canonical bases and
//! the divisor data of `dx/h`.

use super::config::CurveSpec;
use super::expr::{FunctionExpr, Place};
use super::{CyclicCurveSpec, PlaneWeierstrassSpec};
use crate::error::{Error, Result};
use crate::C64;

/// Which monomial in the named generators labels a weight.
///
/// Among monomials `x^a g_1^{e_1} ... g_k^{e_k}` of the given weight that
/// respect the per-generator caps and the optional cap on `sum e_i`, the
/// one with the smallest `a` wins; ties prefer smaller exponents of later
/// generators. If nothing fits the caps they are dropped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabelRules {
    pub caps: Vec<(String, u32)>,
    /// Cap for generators (other than `x`) not listed in `caps`.
    pub default_cap: Option<u32>,
    /// Cap on the total degree in the non-`x` generators.
    pub total_cap: Option<u32>,
}

impl LabelRules {
    pub fn cyclic_default(r: u32) -> Self {
        LabelRules {
            caps: vec![("y".into(), r - 1)],
            default_cap: Some(1),
            total_cap: None,
        }
    }

    pub fn plane_default(m: u32) -> Self {
        LabelRules {
            caps: vec![("y".into(), m - 1)],
            default_cap: None,
            total_cap: None,
        }
    }

    fn cap(&self, name: &str) -> Option<u32> {
        self.caps
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| *c)
            .or(self.default_cap)
    }
}

/// Exponent vector (aligned with `gens`, `gens[0]` must be `x`) of the
/// labelling monomial of `weight`, or `None` if `weight` is a gap.
pub fn label_for_weight(gens: &[(String, u64)], rules: &LabelRules, weight: u64) -> Option<Vec<u32>> {
    search_label(gens, rules, weight, true).or_else(|| search_label(gens, rules, weight, false))
}

fn search_label(gens: &[(String, u64)], rules: &LabelRules, weight: u64, capped: bool) -> Option<Vec<u32>> {
    let wx = gens[0].1;
    let others = &gens[1..];
    let mut best: Option<Vec<u32>> = None;
    let mut exps = vec![0u32; others.len()];
    fn better(cand: &[u32], best: &[u32]) -> bool {
        if cand[0] != best[0] {
            return cand[0] < best[0];
        }
        for k in (1..cand.len()).rev() {
            if cand[k] != best[k] {
                return cand[k] < best[k];
            }
        }
        false
    }
    fn rec(
        k: usize,
        rest: u64,
        total: u32,
        exps: &mut Vec<u32>,
        others: &[(String, u64)],
        rules: &LabelRules,
        capped: bool,
        wx: u64,
        best: &mut Option<Vec<u32>>,
    ) {
        if k == others.len() {
            if rest.is_multiple_of(wx) {
                let mut cand = vec![(rest / wx) as u32];
                cand.extend_from_slice(exps);
                if best.as_ref().is_none_or(|b| better(&cand, b)) {
                    *best = Some(cand);
                }
            }
            return;
        }
        let (name, wt) = &others[k];
        let mut max = (rest / wt) as u32;
        if capped {
            if let Some(c) = rules.cap(name) {
                max = max.min(c);
            }
            if let Some(t) = rules.total_cap {
                max = max.min(t.saturating_sub(total));
            }
        }
        for e in 0..=max {
            exps[k] = e;
            rec(
                k + 1,
                rest - e as u64 * wt,
                total + e,
                exps,
                others,
                rules,
                capped,
                wx,
                best,
            );
        }
        exps[k] = 0;
    }
    rec(0, weight, 0, &mut exps, others, rules, capped, wx, &mut best);
    best
}

/// `x^3yw`, `x^2y^2`, `1`.
pub fn format_label(gens: &[(String, u64)], exps: &[u32]) -> String {
    let mut s = String::new();
    for ((name, _), &e) in gens.iter().zip(exps) {
        match e {
            0 => {}
            1 => s.push_str(name),
            _ => s.push_str(&format!("{name}^{e}")),
        }
    }
    if s.is_empty() {
        s.push('1');
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisFunction {
    pub weight: u64,
    pub label: String,
    /// Available for cyclic curves only.
    pub expr: Option<FunctionExpr>,
}

pub type Divisor = Vec<(Place, i64)>;

#[derive(Debug, Clone, PartialEq)]
pub struct DifferentialData {
    pub h: BasisFunction,
    /// `phi_hat_0 .. phi_hat_{g-1}`; `phi_hat_{i-1} dx / h` are holomorphic.
    pub phi_hat: Vec<BasisFunction>,
    pub d1: u64,
    /// `B` in `(dx/h) = (2g - 2 + d_1) inf - B`; unknown for plane specs.
    pub b_divisor: Option<Divisor>,
    /// `nu_i = phi_hat_{i-1} / h` as monomials `x^a prod (x - b)^e y^{-k}`
    /// (cyclic curves only; empty otherwise).
    pub nu: Vec<FunctionExpr>,
}

impl DifferentialData {
    pub fn genus(&self) -> usize {
        self.phi_hat.len()
    }
}

/// Named generators `x`, `y`, then the eigen-generators `y_l` that are not
/// monomials in the earlier ones, as (name, weight, function).
pub fn cyclic_generators(spec: &CyclicCurveSpec) -> Vec<(String, u64, FunctionExpr)> {
    let mut gens = vec![
        ("x".to_string(), spec.r() as u64, FunctionExpr::x_pow(1)),
        ("y".to_string(), spec.s() as u64, spec.eigen_generator(1)),
    ];
    let mut ls: Vec<u32> = (2..spec.r()).collect();
    ls.sort_by_key(|&l| spec.eigen_weight(l));
    let mut fresh = 0;
    for l in ls {
        let target = spec.eigen_generator(l).reduced(spec);
        let wt = spec.eigen_weight(l) as u64;
        let named: Vec<(String, u64)> = gens.iter().map(|(n, w, _)| (n.clone(), *w)).collect();
        let found = monomials_of_weight(&named, wt)
            .into_iter()
            .any(|e| product(&gens, &e, spec).same_as(&target));
        if !found {
            let name = spec.generator_names.get(fresh).cloned().unwrap_or_else(|| {
                if fresh == 0 {
                    "w".to_string()
                } else {
                    format!("w{}", fresh + 1)
                }
            });
            fresh += 1;
            gens.push((name, wt, target));
        }
    }
    gens
}

fn monomials_of_weight(gens: &[(String, u64)], weight: u64) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut exps = vec![0u32; gens.len()];
    fn rec(k: usize, rest: u64, exps: &mut Vec<u32>, gens: &[(String, u64)], out: &mut Vec<Vec<u32>>) {
        if k == gens.len() {
            if rest == 0 {
                out.push(exps.clone());
            }
            return;
        }
        let w = gens[k].1;
        for e in 0..=(rest / w) as u32 {
            exps[k] = e;
            rec(k + 1, rest - e as u64 * w, exps, gens, out);
        }
        exps[k] = 0;
    }
    rec(0, weight, &mut exps, gens, &mut out);
    out
}

fn product(gens: &[(String, u64, FunctionExpr)], exps: &[u32], spec: &CyclicCurveSpec) -> FunctionExpr {
    let mut f = FunctionExpr::one();
    for ((_, _, g), &e) in gens.iter().zip(exps) {
        for _ in 0..e {
            f = f.mul(g);
        }
    }
    f.reduced(spec)
}

fn plane_labels(spec: &PlaneWeierstrassSpec) -> (Vec<(String, u64)>, LabelRules) {
    let rules = if spec.labels == LabelRules::default() {
        LabelRules::plane_default(spec.m)
    } else {
        spec.labels.clone()
    };
    (spec.generators(), rules)
}

/// `S_R` up to `weight_bound`: one element per semigroup member, increasing
/// weight. Cyclic elements are the labelling monomials as functions.
pub fn monomial_basis(spec: &CurveSpec, weight_bound: u64) -> Result<Vec<BasisFunction>> {
    match spec {
        CurveSpec::Cyclic(c) => {
            let gens = cyclic_generators(c);
            let named: Vec<(String, u64)> = gens.iter().map(|(n, w, _)| (n.clone(), *w)).collect();
            let h = c.semigroup();
            let mut out = Vec::new();
            for w in h.members_up_to(weight_bound) {
                let exps = label_for_weight(&named, &c.labels, w).ok_or(Error::BasisGapUnfillable(w))?;
                let f = product(&gens, &exps, c);
                if f.weight(c) != w as i64 || !f.is_regular_affine(c)? {
                    return Err(Error::BasisGapUnfillable(w));
                }
                out.push(BasisFunction {
                    weight: w,
                    label: format_label(&named, &exps),
                    expr: Some(f),
                });
            }
            Ok(out)
        }
        CurveSpec::Plane(p) => {
            let (gens, rules) = plane_labels(p);
            let h = p.semigroup()?;
            h.members_up_to(weight_bound)
                .into_iter()
                .map(|w| {
                    let exps = label_for_weight(&gens, &rules, w).ok_or(Error::BasisGapUnfillable(w))?;
                    Ok(BasisFunction {
                        weight: w,
                        label: format_label(&gens, &exps),
                        expr: None,
                    })
                })
                .collect()
        }
    }
}

/// Exponent of `(x - b_i)` relating `y_j / y_k = y_l prod (x - b_i)^{E_i}`,
/// `l = (j - k) mod r`.
fn quotient_exponents(spec: &CyclicCurveSpec, j: u32, k: u32) -> Vec<i32> {
    let r = spec.r();
    let l = (j + r - k) % r;
    let (el, ek, ej) = (
        spec.eigen_exponents(l),
        spec.eigen_exponents(k),
        spec.eigen_exponents(j),
    );
    spec.branch()
        .iter()
        .enumerate()
        .map(|(i, bp)| {
            let wrap = if j < k { bp.m as i32 } else { 0 };
            el[i] + ek[i] - ej[i] - wrap
        })
        .collect()
}

/// Structure of `h = prod (x - b_i)^{p_i} y_j` found by the denominator search.
#[derive(Debug, Clone, PartialEq)]
struct Denominator {
    j: u32,
    p: Vec<i32>,
    weight: i64,
}

impl Denominator {
    fn expr(&self, spec: &CyclicCurveSpec) -> FunctionExpr {
        let ej = spec.eigen_exponents(self.j);
        let lin = self.p.iter().zip(&ej).map(|(p, e)| p - e).collect();
        FunctionExpr::monomial(C64::new(1.0, 0.0), 0, lin, self.j as i32).reduced(spec)
    }

    /// `x^a h / y_k`.
    fn numerator(&self, spec: &CyclicCurveSpec, k: u32, a: u32) -> FunctionExpr {
        let ej = spec.eigen_exponents(self.j);
        let ek = spec.eigen_exponents(k);
        let lin = (0..self.p.len()).map(|i| self.p[i] - ej[i] + ek[i]).collect();
        FunctionExpr::monomial(C64::new(1.0, 0.0), a, lin, self.j as i32 - k as i32).reduced(spec)
    }
}

/// `(k, A_k)`: the forms `x^a dx / y_k`, `0 <= a <= A_k`, are holomorphic.
fn holomorphic_classes(spec: &CyclicCurveSpec) -> Vec<(u32, u32)> {
    let r = spec.r() as i64;
    (1..spec.r())
        .filter_map(|k| {
            let room = spec.eigen_weight(k) - r - 1;
            (room >= 0).then(|| (k, (room / r) as u32))
        })
        .collect()
}

fn find_denominator(spec: &CyclicCurveSpec) -> Result<Denominator> {
    let classes = holomorphic_classes(spec);
    let r = spec.r() as i64;
    (0..spec.r())
        .map(|j| {
            let mut p = vec![0i32; spec.branch().len()];
            for &(k, _) in &classes {
                for (pi, e) in p.iter_mut().zip(quotient_exponents(spec, j, k)) {
                    *pi = (*pi).max(-e);
                }
            }
            let weight = r * p.iter().map(|&v| v as i64).sum::<i64>() + spec.eigen_weight(j);
            Denominator { j, p, weight }
        })
        .min_by_key(|d| (d.weight, d.j))
        .ok_or(Error::DenominatorSearchExhausted)
}

fn label_cyclic(
    spec: &CyclicCurveSpec,
    named: &[(String, u64)],
    gens: &[(String, u64, FunctionExpr)],
    f: &FunctionExpr,
    fallback: String,
) -> String {
    let w = f.weight(spec) as u64;
    match label_for_weight(named, &spec.labels, w) {
        Some(exps) if product(gens, &exps, spec).same_as(f) => format_label(named, &exps),
        _ => fallback,
    }
}

/// Denominator `h`, canonical basis `phi_hat`, `d_1` and `B`.
pub fn canonical_basis(spec: &CurveSpec) -> Result<DifferentialData> {
    match spec {
        CurveSpec::Cyclic(c) => canonical_basis_cyclic(c),
        CurveSpec::Plane(p) => canonical_basis_plane(p),
    }
}

fn canonical_basis_cyclic(spec: &CyclicCurveSpec) -> Result<DifferentialData> {
    let g = spec.genus();
    let r = spec.r() as i64;
    let den = find_denominator(spec)?;
    let h = den.expr(spec);
    let gens = cyclic_generators(spec);
    let named: Vec<(String, u64)> = gens.iter().map(|(n, w, _)| (n.clone(), *w)).collect();

    let mut phi: Vec<(BasisFunction, FunctionExpr)> = Vec::new();
    for (k, amax) in holomorphic_classes(spec) {
        let ek = spec.eigen_exponents(k);
        for a in 0..=amax {
            let f = den.numerator(spec, k, a);
            let w = f.weight(spec);
            if !f.is_regular_affine(spec)? || w > den.weight - r - 1 {
                return Err(Error::DenominatorSearchExhausted);
            }
            let fallback = if a == 0 {
                format!("h/y_{k}")
            } else {
                format!("x^{a}h/y_{k}")
            };
            let nu = FunctionExpr::monomial(C64::new(1.0, 0.0), a, ek.clone(), -(k as i32));
            phi.push((
                BasisFunction {
                    weight: w as u64,
                    label: label_cyclic(spec, &named, &gens, &f, fallback),
                    expr: Some(f),
                },
                nu,
            ));
        }
    }
    phi.sort_by_key(|b| b.0.weight);
    let (phi, nu): (Vec<_>, Vec<_>) = phi.into_iter().unzip();
    if phi.len() != g {
        return Err(Error::DenominatorSearchExhausted);
    }

    let mut b_divisor = Vec::new();
    let mut d1 = 0i64;
    for i in 0..spec.branch().len() {
        let mult = h.valuation(spec, Place::Branch(i))? - (r - 1);
        if mult < 0 {
            return Err(Error::DenominatorSearchExhausted);
        }
        if mult > 0 {
            b_divisor.push((Place::Branch(i), mult));
        }
        d1 += mult;
    }
    if den.weight - r - 1 != 2 * g as i64 - 2 + d1 {
        return Err(Error::DenominatorSearchExhausted);
    }
    let h_label = label_cyclic(spec, &named, &gens, &h, "h".into());
    Ok(DifferentialData {
        h: BasisFunction {
            weight: den.weight as u64,
            label: h_label,
            expr: Some(h),
        },
        phi_hat: phi,
        d1: d1 as u64,
        b_divisor: Some(b_divisor),
        nu,
    })
}

fn canonical_basis_plane(spec: &PlaneWeierstrassSpec) -> Result<DifferentialData> {
    let sg = spec.semigroup()?;
    let g = sg.genus();
    if g == 0 {
        return Err(Error::DegenerateGenusZero);
    }
    let symmetric = sg.is_symmetric()?;
    let d1 = match (symmetric, spec.d1) {
        (true, None) | (true, Some(0)) => 0,
        (true, Some(d)) => {
            return Err(Error::InvalidSpec(format!(
                "d1 = {d} given for a symmetric semigroup (must be 0)"
            )))
        }
        (false, Some(d)) => d,
        (false, None) => {
            return Err(Error::InvalidSpec(
                "non-symmetric semigroup: d1 must be supplied".into(),
            ))
        }
    };
    let (gens, rules) = plane_labels(spec);
    let gaps = sg.gaps();
    let top = 2 * g as u64 - 1 + d1;
    let phi = (0..g)
        .map(|i| {
            let w = top - gaps[g - 1 - i];
            let exps = label_for_weight(&gens, &rules, w).ok_or(Error::BasisGapUnfillable(w))?;
            Ok(BasisFunction {
                weight: w,
                label: format_label(&gens, &exps),
                expr: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DifferentialData {
        h: BasisFunction {
            weight: top + spec.m as u64,
            label: "h".into(),
            expr: None,
        },
        phi_hat: phi,
        d1,
        b_divisor: None,
        nu: Vec::new(),
    })
}

/// First `count` elements of `S_hat_R = { x^a h / y_k }`, by weight. The
/// first `g` are the canonical basis.
pub fn extended_basis(spec: &CyclicCurveSpec, count: usize) -> Result<Vec<BasisFunction>> {
    let den = find_denominator(spec)?;
    let gens = cyclic_generators(spec);
    let named: Vec<(String, u64)> = gens.iter().map(|(n, w, _)| (n.clone(), *w)).collect();
    let r = spec.r() as i64;
    let mut bound = den.weight + r * count as i64;
    loop {
        let mut items: Vec<(i64, u32, u32)> = Vec::new();
        for k in 0..spec.r() {
            let base = den.weight - spec.eigen_weight(k);
            let mut a = 0u32;
            while base + r * a as i64 <= bound {
                items.push((base + r * a as i64, k, a));
                a += 1;
            }
        }
        if items.len() >= count {
            items.sort();
            return items
                .into_iter()
                .take(count)
                .map(|(w, k, a)| {
                    let f = den.numerator(spec, k, a);
                    let fallback = match (k, a) {
                        (0, 0) => "h".to_string(),
                        (0, _) => format!("x^{a}h"),
                        (_, 0) => format!("h/y_{k}"),
                        _ => format!("x^{a}h/y_{k}"),
                    };
                    Ok(BasisFunction {
                        weight: w as u64,
                        label: label_cyclic(spec, &named, &gens, &f, fallback),
                        expr: Some(f),
                    })
                })
                .collect();
        }
        bound += r * count as i64;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    fn labels(b: &[BasisFunction]) -> Vec<(u64, String)> {
        b.iter().map(|f| (f.weight, f.label.clone())).collect()
    }

    fn pairs(v: &[(u64, &str)]) -> Vec<(u64, String)> {
        v.iter().map(|(w, s)| (*w, s.to_string())).collect()
    }

    #[test]
    fn example_two_generators() {
        let e = samples::example_two();
        let gens = cyclic_generators(&e);
        let names: Vec<_> = gens.iter().map(|(n, w, _)| (n.as_str(), *w)).collect();
        assert_eq!(names, vec![("x", 5), ("y", 7), ("w", 11)]);
    }

    #[test]
    fn example_two_table_one_prefix() {
        let spec = CurveSpec::Cyclic(samples::example_two());
        let b = monomial_basis(&spec, 14).unwrap();
        assert_eq!(
            labels(&b),
            pairs(&[
                (0, "1"),
                (5, "x"),
                (7, "y"),
                (10, "x^2"),
                (11, "w"),
                (12, "xy"),
                (14, "y^2")
            ])
        );
    }

    #[test]
    fn hyperelliptic_canonical_basis() {
        let spec = CurveSpec::Cyclic(samples::genus_two());
        let d = canonical_basis(&spec).unwrap();
        assert_eq!(d.h.label, "y");
        assert_eq!(labels(&d.phi_hat), pairs(&[(0, "1"), (2, "x")]));
        assert_eq!(d.d1, 0);
        assert_eq!(d.b_divisor, Some(vec![]));
        let b = monomial_basis(&spec, 6).unwrap();
        assert_eq!(
            labels(&b),
            pairs(&[(0, "1"), (2, "x"), (4, "x^2"), (5, "y"), (6, "x^3")])
        );
    }

    #[test]
    fn trigonal_canonical_basis() {
        let spec = CurveSpec::Cyclic(samples::trigonal());
        let d = canonical_basis(&spec).unwrap();
        assert_eq!(d.h.label, "y^2");
        assert_eq!(labels(&d.phi_hat), pairs(&[(0, "1"), (3, "x"), (4, "y")]));
        assert_eq!(d.d1, 0);
    }

    #[test]
    fn example_two_canonical_basis() {
        let e = samples::example_two();
        let d = canonical_basis(&CurveSpec::Cyclic(e.clone())).unwrap();
        assert_eq!(d.h.weight, 25);
        assert_eq!(d.d1, 5);
        assert_eq!(
            labels(&d.phi_hat),
            pairs(&[
                (7, "y"),
                (11, "w"),
                (12, "xy"),
                (14, "y^2"),
                (16, "xw"),
                (17, "x^2y"),
                (18, "yw"),
                (19, "xy^2")
            ])
        );
        let b = d.b_divisor.unwrap();
        assert_eq!(b.len(), 5);
        assert!(b.iter().all(|&(_, m)| m == 1));
        let ext = extended_basis(&e, 12).unwrap();
        assert_eq!(labels(&ext[..8]), labels(&d.phi_hat));
        assert!(ext.windows(2).all(|p| p[0].weight < p[1].weight));
    }

    #[test]
    fn holomorphy_is_exact() {
        for c in [samples::genus_two(), samples::trigonal(), samples::example_two()] {
            let d = canonical_basis(&CurveSpec::Cyclic(c.clone())).unwrap();
            let h = d.h.expr.as_ref().unwrap();
            let r = c.r() as i64;
            for f in &d.phi_hat {
                let f = f.expr.as_ref().unwrap();
                for i in 0..c.branch().len() {
                    let v = f.valuation(&c, Place::Branch(i)).unwrap() + (r - 1)
                        - h.valuation(&c, Place::Branch(i)).unwrap();
                    assert!(v >= 0);
                }
                let at_inf =
                    f.valuation(&c, Place::Infinity).unwrap() - r - 1 - h.valuation(&c, Place::Infinity).unwrap();
                assert!(at_inf >= 0);
            }
            let g = c.genus() as u64;
            assert_eq!(d.phi_hat.last().unwrap().weight, 2 * g - 2 + d.d1);
        }
    }

    #[test]
    fn label_rule_prefers_low_x_degree() {
        let gens = vec![("x".to_string(), 3), ("y".to_string(), 7), ("w".to_string(), 8)];
        let rules = LabelRules {
            caps: vec![("y".into(), 2), ("w".into(), 2)],
            default_cap: None,
            total_cap: Some(2),
        };
        let lab = |w| format_label(&gens, &label_for_weight(&gens, &rules, w).unwrap());
        assert_eq!(lab(15), "yw");
        assert_eq!(lab(16), "w^2");
        assert_eq!(lab(21), "x^2yw");
        assert_eq!(lab(23), "x^3y^2");
        assert!(label_for_weight(&gens, &rules, 5).is_none());
    }
}
