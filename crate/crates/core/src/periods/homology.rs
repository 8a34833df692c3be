//! Homology of a cyclic cover: a spanning tree on the finite branch points,
//! the cycles `lift_j(e) - lift_{j+1}(e)` over its edges, their intersection
//! numbers from explicit polygon realizations, and an integer symplectic
//! reduction to an `alpha`/`beta` basis.

use std::f64::consts::PI;

use super::path::{continue_y, segment_clearance};
use crate::curve::CyclicCurveSpec;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub p: usize,
    pub q: usize,
    /// Distance from the segment to the nearest other branch point.
    pub clearance: f64,
}

/// Closed polygon on the curve: `x` vertices with the continued `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cycle {
    pub edge: usize,
    /// `j` in `lift_j(e) - lift_{j+1}(e)`.
    pub sheet: u32,
    pub vertices: Vec<(C64, C64)>,
    /// `|y_end - y_start| / |y_start|` after going around once.
    pub closure_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub from: C64,
    pub to: C64,
    pub sheet: u32,
}

impl Cycle {
    pub fn segments(&self, spec: &CyclicCurveSpec) -> Vec<Segment> {
        self.vertices
            .windows(2)
            .map(|w| Segment {
                from: w[0].0,
                to: w[1].0,
                sheet: spec.sheet_of(w[0].0, w[0].1),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HomologyBasis {
    pub edges: Vec<Edge>,
    pub cycles: Vec<Cycle>,
    /// `<cycle_a, cycle_b>`.
    pub intersection: Vec<Vec<i64>>,
    /// Rows `alpha_1..alpha_g, beta_1..beta_g` as integer combinations of
    /// `cycles`.
    pub symplectic: Vec<Vec<i64>>,
}

impl HomologyBasis {
    pub fn genus(&self) -> usize {
        self.symplectic.len() / 2
    }
}

/// Sheet permutation along a polyline: entry `q` is the sheet reached when
/// starting on sheet `q` at `path[0]`.
pub fn monodromy(spec: &CyclicCurveSpec, path: &[C64], clearance: f64) -> Result<Vec<u32>> {
    for w in path.windows(2) {
        for (i, bp) in spec.branch().iter().enumerate() {
            if super::path::segment_distance(bp.b, w[0], w[1]) < clearance {
                return Err(Error::BranchClearanceViolated(i));
            }
        }
    }
    let zeta = spec.zeta();
    Ok((0..spec.r())
        .map(|q| {
            let mut y = zeta.powu(q) * spec.principal_y(path[0]);
            for w in path.windows(2) {
                y = continue_y(spec, w[0], y, w[1]);
            }
            spec.sheet_of(*path.last().unwrap(), y)
        })
        .collect())
}

/// Maximum-clearance spanning tree (Prim), ties broken by length.
pub fn branch_tree(spec: &CyclicCurveSpec) -> Vec<Edge> {
    let b: Vec<C64> = spec.branch().iter().map(|bp| bp.b).collect();
    let n = b.len();
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    let mut edges = Vec::new();
    for _ in 1..n {
        let mut best: Option<(f64, f64, usize, usize)> = None;
        for p in (0..n).filter(|&i| in_tree[i]) {
            for q in (0..n).filter(|&i| !in_tree[i]) {
                let clr = segment_clearance(spec, b[p], b[q], &[p, q]);
                let len = (b[q] - b[p]).norm();
                let better = match best {
                    None => true,
                    Some((c, l, _, _)) => clr > c * (1.0 + 1e-12) || (clr >= c * (1.0 - 1e-12) && len < l),
                };
                if better {
                    best = Some((clr, len, p, q));
                }
            }
        }
        let (clearance, _, p, q) = best.expect("tree grows");
        in_tree[q] = true;
        edges.push(Edge { p, q, clearance });
    }
    edges
}

fn spiral(center: C64, from: C64, to: C64, turn: f64) -> Vec<C64> {
    let (r1, t1) = (from - center).to_polar();
    let (r2, _) = (to - center).to_polar();
    let steps = ((turn.abs() / (PI / 48.0)).ceil() as usize).max(8);
    (1..=steps)
        .map(|k| {
            let s = k as f64 / steps as f64;
            if k == steps {
                to
            } else {
                center + C64::from_polar(r1 + (r2 - r1) * s, t1 + turn * s)
            }
        })
        .collect()
}

fn follow(spec: &CyclicCurveSpec, start: (C64, C64), pts: &[C64]) -> Vec<(C64, C64)> {
    let mut out = Vec::with_capacity(pts.len());
    let (mut x, mut y) = start;
    for &p in pts {
        y = continue_y(spec, x, y, p);
        x = p;
        out.push((x, y));
    }
    out
}

/// Spiral from `from` (value `y_from`) to `to` around `center` whose
/// continuation lands on `y_target`; smallest total turn wins.
fn matching_spiral(
    spec: &CyclicCurveSpec,
    center: C64,
    from: (C64, C64),
    to: C64,
    y_target: C64,
) -> Result<Vec<(C64, C64)>> {
    let base = (to - center).arg() - (from.0 - center).arg();
    let r = spec.r() as i64;
    let mut turns: Vec<f64> = (-r..=r).map(|k| base + 2.0 * PI * k as f64).collect();
    turns.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap());
    for turn in turns {
        let pts = spiral(center, from.0, to, turn);
        let walked = follow(spec, from, &pts);
        let y_end = walked.last().unwrap().1;
        if (y_end - y_target).norm() < 1e-6 * y_target.norm() {
            return Ok(walked);
        }
    }
    Err(Error::RankDeficientHomology(format!(
        "no spiral around {center} reaches the target sheet"
    )))
}

fn build_cycle(
    spec: &CyclicCurveSpec,
    edge_index: usize,
    edge: &Edge,
    j: u32,
    rho_a: f64,
    rho_b: f64,
    delta: f64,
) -> Result<Cycle> {
    let p = spec.branch()[edge.p].b;
    let q = spec.branch()[edge.q].b;
    let d = (q - p) / (q - p).norm();
    let n = d * C64::new(0.0, 1.0);
    let mid = (p + q) * 0.5;
    let zeta = spec.zeta();
    let y_mid = spec.principal_y(mid);
    let m_plus = mid + n * delta;
    let m_minus = mid - n * delta;
    let along = |rho: f64| (rho * rho - delta * delta).sqrt();
    let a_q = q - d * along(rho_a) + n * delta;
    let b_q = q - d * along(rho_b) - n * delta;
    let b_p = p + d * along(rho_b) - n * delta;
    let a_p = p + d * along(rho_a) + n * delta;

    let y_plus = continue_y(spec, mid, zeta.powu(j) * y_mid, m_plus);
    let y_minus = continue_y(spec, mid, zeta.powu(j + 1) * y_mid, m_minus);
    let target_bq = continue_y(spec, m_minus, y_minus, b_q);
    let target_ap = continue_y(spec, m_plus, y_plus, a_p);

    let mut verts = vec![(m_plus, y_plus)];
    verts.extend(follow(spec, (m_plus, y_plus), &[a_q]));
    let around_q = matching_spiral(spec, q, *verts.last().unwrap(), b_q, target_bq)?;
    verts.extend(around_q);
    let back = follow(spec, *verts.last().unwrap(), &[m_minus, b_p]);
    verts.extend(back);
    let around_p = matching_spiral(spec, p, *verts.last().unwrap(), a_p, target_ap)?;
    verts.extend(around_p);
    let close = follow(spec, *verts.last().unwrap(), &[m_plus]);
    verts.extend(close);
    let end = verts.last().unwrap().1;
    let closure_residual = (end - y_plus).norm() / y_plus.norm();
    if closure_residual > 1e-8 {
        return Err(Error::RankDeficientHomology(format!(
            "cycle over edge {edge_index} sheet {j} does not close ({closure_residual:e})"
        )));
    }
    Ok(Cycle {
        edge: edge_index,
        sheet: j,
        vertices: verts,
        closure_residual,
    })
}

fn cross(u: C64, v: C64) -> f64 {
    (u.conj() * v).im
}

/// Signed count of same-sheet crossings of two closed polygons.
pub fn intersection_number(spec: &CyclicCurveSpec, a: &Cycle, b: &Cycle) -> i64 {
    let mut total = 0;
    for wa in a.vertices.windows(2) {
        let (p, yp) = wa[0];
        let da = wa[1].0 - p;
        let (ax0, ax1) = (p.re.min(wa[1].0.re), p.re.max(wa[1].0.re));
        let (ay0, ay1) = (p.im.min(wa[1].0.im), p.im.max(wa[1].0.im));
        for wb in b.vertices.windows(2) {
            let (r, yr) = wb[0];
            let s1 = wb[1].0;
            if s1.re.max(r.re) < ax0 || s1.re.min(r.re) > ax1 || s1.im.max(r.im) < ay0 || s1.im.min(r.im) > ay1 {
                continue;
            }
            let db = s1 - r;
            let den = cross(da, db);
            if den.abs() < 1e-300 {
                continue;
            }
            let s = cross(r - p, db) / den;
            let t = cross(r - p, da) / den;
            if !(0.0..1.0).contains(&s) || !(0.0..1.0).contains(&t) {
                continue;
            }
            let x = p + da * s;
            let ya = continue_y(spec, p, yp, x);
            let yb = continue_y(spec, r, yr, x);
            if (ya - yb).norm() < 1e-6 * ya.norm() {
                total += den.signum() as i64;
            }
        }
    }
    total
}

fn pairing(j: &[Vec<i64>], a: &[i64], b: &[i64]) -> i64 {
    let n = a.len();
    let mut s = 0;
    for i in 0..n {
        if a[i] == 0 {
            continue;
        }
        for k in 0..n {
            s += a[i] * j[i][k] * b[k];
        }
    }
    s
}

/// Unimodular integer change of basis bringing `j` to `[[0, I], [-I, 0]]`.
/// Rows of the result: `alpha_1..alpha_g, beta_1..beta_g`.
pub fn symplectic_reduction(j: &[Vec<i64>]) -> Result<Vec<Vec<i64>>> {
    let n = j.len();
    if !n.is_multiple_of(2) {
        return Err(Error::RankDeficientHomology(format!("odd cycle count {n}")));
    }
    let mut remaining: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|k| (i == k) as i64).collect()).collect();
    let mut alphas = Vec::new();
    let mut betas = Vec::new();
    while !remaining.is_empty() {
        let e = remaining.remove(0);
        let f = loop {
            let pairs: Vec<i64> = remaining.iter().map(|v| pairing(j, &e, v)).collect();
            let Some(idx) = (0..pairs.len())
                .filter(|&k| pairs[k] != 0)
                .min_by_key(|&k| pairs[k].abs())
            else {
                return Err(Error::RankDeficientHomology(
                    "a cycle pairs trivially with all others".into(),
                ));
            };
            let pmin = pairs[idx];
            if pmin.abs() == 1 {
                let mut f = remaining.remove(idx);
                if pmin < 0 {
                    f.iter_mut().for_each(|v| *v = -*v);
                }
                break f;
            }
            let pivot = remaining[idx].clone();
            let mut progressed = false;
            for k in 0..remaining.len() {
                if k == idx || pairs[k] == 0 {
                    continue;
                }
                let qk = pairs[k].div_euclid(pmin);
                if qk != 0 {
                    progressed = true;
                    for (v, pv) in remaining[k].iter_mut().zip(&pivot) {
                        *v -= qk * pv;
                    }
                }
            }
            if !progressed {
                return Err(Error::RankDeficientHomology(format!(
                    "intersection form not unimodular (pairing gcd {pmin})"
                )));
            }
        };
        for v in remaining.iter_mut() {
            let vf = pairing(j, v, &f);
            let ve = pairing(j, v, &e);
            for k in 0..n {
                v[k] += -vf * e[k] + ve * f[k];
            }
        }
        alphas.push(e);
        betas.push(f);
    }
    alphas.extend(betas);
    Ok(alphas)
}

/// Cycles, intersection matrix and symplectic basis.
pub fn homology_basis(spec: &CyclicCurveSpec) -> Result<HomologyBasis> {
    let edges = branch_tree(spec);
    let b: Vec<C64> = spec.branch().iter().map(|bp| bp.b).collect();
    let mut dmin = f64::INFINITY;
    for i in 0..b.len() {
        for k in 0..i {
            dmin = dmin.min((b[i] - b[k]).norm());
        }
    }
    let clr = edges.iter().map(|e| e.clearance).fold(f64::INFINITY, f64::min);
    let rho_max = 0.3 * (0.5 * dmin).min(clr);
    let count = edges.len() * (spec.r() as usize - 1);
    let mut cycles = Vec::with_capacity(count);
    for (ei, e) in edges.iter().enumerate() {
        for j in 0..spec.r() - 1 {
            let c = cycles.len() as f64;
            let bands = 2.0 * count as f64;
            let rho_a = rho_max * (0.5 + 0.5 * (2.0 * c) / bands);
            let rho_b = rho_max * (0.5 + 0.5 * (2.0 * c + 1.0) / bands);
            let delta = 0.2 * rho_max * (c + 1.0) / (count as f64 + 1.0);
            cycles.push(build_cycle(spec, ei, e, j, rho_a, rho_b, delta)?);
        }
    }
    let n = cycles.len();
    let mut intersection = vec![vec![0i64; n]; n];
    for a in 0..n {
        for bidx in (a + 1)..n {
            let v = intersection_number(spec, &cycles[a], &cycles[bidx]);
            let w = intersection_number(spec, &cycles[bidx], &cycles[a]);
            if v != -w {
                return Err(Error::RankDeficientHomology(format!(
                    "intersection of cycles {a}, {bidx} not antisymmetric ({v}, {w})"
                )));
            }
            intersection[a][bidx] = v;
            intersection[bidx][a] = -v;
        }
    }
    let symplectic = symplectic_reduction(&intersection)?;
    Ok(HomologyBasis {
        edges,
        cycles,
        intersection,
        symplectic,
    })
}
