//! The pipeline behind `wcurve`: each stage appends rows to a [`Report`].

use std::path::PathBuf;

use clap::ValueEnum;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;
use wcurve_core::curve::{
    canonical_basis, extended_basis, load_curve_spec, monomial_basis, BasisFunction, CurveSpec, CyclicCurveSpec,
    DifferentialData,
};
use wcurve_core::inversion::{
    burgers_residual, jacobi_inversion_check, jorgenson_check, mu_g_expansion_check, pentagonal_check, InversionContext,
};
use wcurve_core::periods::{
    period_matrices, random_points, riemann_class, riemann_constant, AbelMap, PeriodData, QuadratureRule,
    RiemannConstantData, RiemannOptions, TAU_SYMMETRY_TOL,
};
use wcurve_core::{Error, C64};

use crate::report::Report;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Stage {
    Semigroup,
    Basis,
    Periods,
    Riemann,
    Jorgenson,
    Invert,
    Burgers,
    Pentagonal,
}

impl Stage {
    fn needs_periods(self) -> bool {
        self >= Stage::Periods
    }

    fn needs_riemann(self) -> bool {
        self >= Stage::Riemann
    }

    fn name(self) -> &'static str {
        match self {
            Stage::Semigroup => "semigroup",
            Stage::Basis => "basis",
            Stage::Periods => "periods",
            Stage::Riemann => "riemann",
            Stage::Jorgenson => "jorgenson",
            Stage::Invert => "invert",
            Stage::Burgers => "burgers",
            Stage::Pentagonal => "pentagonal",
        }
    }

    /// Offset mixed into the seed so a stage draws the same points whatever
    /// else runs.
    fn salt(self) -> u64 {
        self as u64 * 0x9e37_79b9
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub spec: PathBuf,
    /// Empty means the default set for the spec kind.
    pub stages: Vec<Stage>,
    pub seed: u64,
    /// Theta truncation target.
    pub eps: f64,
    pub samples: usize,
    pub periods_cache: Option<PathBuf>,
    /// Residual gate of the identity checks; by genus when absent.
    pub tolerance: Option<f64>,
    /// Run the `4^g` half-period search beyond genus 4.
    pub large_search: bool,
}

pub const BURGERS_TOL: f64 = 1e-5;
pub const PENTAGONAL_TOL: f64 = 1e-4;
pub const VANISHING_TOL: f64 = 1e-6;
pub const RECOVERY_TOL: f64 = 1e-6;
pub const HALF_PERIOD_MIN: f64 = 1e-3;
const TABLE_WEIGHT: u64 = 24;
const PENTAGONAL_POINTS: usize = 3;

fn identity_tol(cfg: &RunConfig, g: usize) -> f64 {
    cfg.tolerance.unwrap_or(match g {
        0..=2 => 1e-6,
        3 => 1e-5,
        _ => 1e-4,
    })
}

struct Numeric {
    spec: CyclicCurveSpec,
    diff: DifferentialData,
    periods: PeriodData,
    basis: Vec<BasisFunction>,
}

/// Errors here abort the run (bad spec file); stage failures become rows.
pub fn run(cfg: &RunConfig) -> Result<Report, Error> {
    let spec = load_curve_spec(&cfg.spec)?;
    let mut rep = Report::new(spec.id());
    let mut stages = cfg.stages.clone();
    if stages.is_empty() {
        stages = match &spec {
            CurveSpec::Plane(_) => vec![Stage::Semigroup, Stage::Basis],
            CurveSpec::Cyclic(_) => vec![
                Stage::Semigroup,
                Stage::Basis,
                Stage::Periods,
                Stage::Riemann,
                Stage::Jorgenson,
                Stage::Invert,
                Stage::Burgers,
            ],
        };
    }
    stages.sort();
    stages.dedup();

    if stages.contains(&Stage::Semigroup) {
        semigroup_stage(&spec, &mut rep);
    }
    if stages.contains(&Stage::Basis) {
        basis_stage(&spec, &mut rep);
    }
    let numeric: Vec<Stage> = stages.iter().copied().filter(|s| s.needs_periods()).collect();
    if numeric.is_empty() {
        return Ok(rep);
    }
    let Some(cyclic) = spec.as_cyclic() else {
        for s in numeric {
            rep.error(s.name(), "setup", Error::NotCyclic);
        }
        return Ok(rep);
    };
    let num = match numeric_data(cfg, cyclic, &mut rep, stages.contains(&Stage::Periods)) {
        Ok(n) => n,
        Err(e) => {
            for s in numeric {
                rep.error(s.name(), "setup", &e);
            }
            return Ok(rep);
        }
    };
    let am = AbelMap::new(&num.spec, &num.diff, &num.periods);
    if !stages.iter().any(|s| s.needs_riemann()) {
        return Ok(rep);
    }
    let rc = riemann_stage(cfg, &am, &num.diff, &mut rep, stages.contains(&Stage::Riemann));
    let rest: Vec<Stage> = stages.iter().copied().filter(|&s| s > Stage::Riemann).collect();
    let rc = match rc {
        Ok(rc) => rc,
        Err(e) => {
            for s in rest {
                rep.error(s.name(), "setup", &e);
            }
            return Ok(rep);
        }
    };
    let ctx = InversionContext::new(&am, &num.diff, &num.basis, &rc, cfg.eps);
    for s in rest {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ s.salt());
        match s {
            Stage::Jorgenson => jorgenson_stage(cfg, &ctx, &mut rng, &mut rep),
            Stage::Invert => invert_stage(cfg, &ctx, &mut rng, &mut rep),
            Stage::Burgers => burgers_stage(cfg, &ctx, &mut rng, &mut rep),
            Stage::Pentagonal => pentagonal_stage(&ctx, &mut rng, &mut rep),
            _ => unreachable!(),
        }
    }
    Ok(rep)
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn semigroup_stage(spec: &CurveSpec, rep: &mut Report) {
    const S: &str = "semigroup";
    let sg = match spec.semigroup() {
        Ok(sg) => sg,
        Err(e) => return rep.error(S, "generators", e),
    };
    rep.info(S, "generators", format!("<{}>", join(sg.generators())), sg.generators());
    rep.info(S, "genus", sg.genus().to_string(), sg.genus());
    rep.info(S, "gaps", join(sg.gaps()), sg.gaps());
    rep.info(
        S,
        "conductor",
        sg.conductor().to_string(),
        json!({ "conductor": sg.conductor(), "frobenius": sg.frobenius(), "a_min": sg.multiplicity() }),
    );
    if sg.genus() > 0 {
        let sd = sg.schubert_data();
        rep.info(
            S,
            "young",
            format!("({})", join(&sd.young)),
            json!({ "young": sd.young, "alpha": sd.alpha }),
        );
    }
    match sg.is_symmetric() {
        Ok(sym) => rep.info(S, "symmetric", sym.to_string(), sym),
        Err(e) => rep.skip(S, "symmetric", e),
    }
}

fn basis_stage(spec: &CurveSpec, rep: &mut Report) {
    const S: &str = "basis";
    match monomial_basis(spec, TABLE_WEIGHT) {
        Ok(rows) => {
            for f in rows {
                rep.info(
                    S,
                    format!("weight {}", f.weight),
                    f.label.clone(),
                    json!({ "weight": f.weight, "label": f.label }),
                );
            }
        }
        Err(e) => rep.error(S, "monomials", e),
    }
    match canonical_basis(spec) {
        Ok(d) => {
            let labels: Vec<&str> = d.phi_hat.iter().map(|f| f.label.as_str()).collect();
            let detail: Vec<_> = d
                .phi_hat
                .iter()
                .map(|f| json!({ "weight": f.weight, "label": f.label }))
                .collect();
            rep.info(S, "canonical", labels.join(", "), detail);
            rep.info(
                S,
                "h",
                format!("{} (weight {})", d.h.label, d.h.weight),
                json!({ "label": d.h.label, "weight": d.h.weight }),
            );
            rep.info(S, "d1", d.d1.to_string(), d.d1);
        }
        Err(e) => rep.error(S, "canonical", e),
    }
}

fn numeric_data(cfg: &RunConfig, spec: &CyclicCurveSpec, rep: &mut Report, record: bool) -> Result<Numeric, Error> {
    const S: &str = "periods";
    let diff = canonical_basis(&CurveSpec::Cyclic(spec.clone()))?;
    let g = diff.genus();
    let cached = cfg.periods_cache.as_ref().filter(|p| p.exists());
    let (periods, source) = match cached {
        Some(path) => (PeriodData::load(path, g)?, "cache"),
        None => {
            let p = period_matrices(spec, &diff, &QuadratureRule::standard())?;
            if let Some(path) = &cfg.periods_cache {
                p.save(path)?;
            }
            (p, "computed")
        }
    };
    if record {
        let tau = periods.tau.tau();
        let asym = periods.tau.asymmetry;
        rep.info(S, "source", source, source);
        rep.gated(
            S,
            "tau symmetry",
            asym,
            &format!("< {TAU_SYMMETRY_TOL:e}"),
            asym < TAU_SYMMETRY_TOL,
            (),
        );
        let lmin = periods.tau.lambda_min();
        rep.gated(S, "min eig Im tau", lmin, "> 0", lmin > 0.0, ());
        rep.info(
            S,
            "condition omega'",
            format!("{:.3e}", periods.condition),
            periods.condition,
        );
        if g <= 3 {
            let rows: Vec<Vec<C64>> = tau.row_iter().map(|r| r.iter().copied().collect()).collect();
            rep.info(S, "tau_11", format!("{:.6}", tau[(0, 0)]), rows);
        }
    }
    let basis = extended_basis(spec, g + 1)?;
    Ok(Numeric {
        spec: spec.clone(),
        diff,
        periods,
        basis,
    })
}

fn riemann_stage(
    cfg: &RunConfig,
    am: &AbelMap,
    diff: &DifferentialData,
    rep: &mut Report,
    record: bool,
) -> Result<RiemannConstantData, Error> {
    const S: &str = "riemann";
    let opts = RiemannOptions {
        seed: cfg.seed,
        eps: cfg.eps,
        allow_large_search: cfg.large_search,
        ..RiemannOptions::default()
    };
    let result = riemann_constant(am, diff, &opts);
    if !record {
        return result;
    }
    let class = match &result {
        Ok(rc) => rc.class.clone(),
        Err(Error::CharacteristicSearchSkipped(_)) => riemann_class(am, diff)?,
        Err(e) => {
            rep.error(S, "vanishing", e);
            return result;
        }
    };
    if diff.d1 > 0 {
        let d = class.half_period_distance;
        rep.gated(
            S,
            "2 xi off lattice",
            d,
            &format!("> {HALF_PERIOD_MIN:e}"),
            d > HALF_PERIOD_MIN,
            (),
        );
    }
    match &result {
        Ok(rc) => {
            let v = rc.vanishing_residual;
            let detail = json!({ "runner_up": rc.runner_up, "divisors": rc.test_divisors.len() });
            rep.gated(
                S,
                "vanishing",
                v,
                &format!("< {VANISHING_TOL:e}"),
                v < VANISHING_TOL,
                detail,
            );
            if diff.d1 == 0 {
                let two_xi = &rc.xi * C64::new(2.0, 0.0) + &class.w_k;
                let d = am.periods.distance_to_lattice(&two_xi);
                rep.gated(
                    S,
                    "2 xi + w(K) in lattice",
                    d,
                    &format!("< {RECOVERY_TOL:e}"),
                    d < RECOVERY_TOL,
                    (),
                );
            }
            if let Some(delta) = &rc.delta {
                let bits = |v: &[u8]| v.iter().map(|b| b.to_string()).collect::<String>();
                let text = format!("[{};{}]", bits(&delta.d1), bits(&delta.d2));
                rep.info(S, "characteristic", text, json!({ "d1": delta.d1, "d2": delta.d2 }));
            }
        }
        Err(e) => rep.skip(S, "vanishing", e),
    }
    result
}

fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Errors that mean "not defined here" rather than "failed".
fn not_applicable(e: &Error) -> bool {
    matches!(e, Error::StratumOutOfRange { .. } | Error::Precondition(_))
}

fn jorgenson_stage(cfg: &RunConfig, ctx: &InversionContext, rng: &mut ChaCha8Rng, rep: &mut Report) {
    const S: &str = "jorgenson";
    let g = ctx.genus();
    let tol = identity_tol(cfg, g);
    for s in 0..cfg.samples {
        let pts = random_points(ctx.abel, rng, g - 1);
        let a: Vec<C64> = (0..g).map(|_| rand_c(rng)).collect();
        let b: Vec<C64> = (0..g).map(|_| rand_c(rng)).collect();
        let check = format!("sample {s}");
        match jorgenson_check(ctx, &pts, &a, &b) {
            Ok(r) => rep.gated(S, check, r.residual, &format!("< {tol:e}"), r.residual < tol, r),
            Err(e) => rep.error(S, check, e),
        }
    }
}

fn invert_stage(cfg: &RunConfig, ctx: &InversionContext, rng: &mut ChaCha8Rng, rep: &mut Report) {
    const S: &str = "invert";
    let g = ctx.genus();
    let tol = identity_tol(cfg, g);
    let gate = format!("< {tol:e}");
    let mut unsupported = vec![false; g + 1];
    for s in 0..cfg.samples {
        for k in 1..=g {
            if unsupported[k] {
                continue;
            }
            let pts = random_points(ctx.abel, rng, k);
            for i in 1..=k {
                let check = format!("k={k} i={i} sample {s}");
                match jacobi_inversion_check(ctx, &pts, i) {
                    Ok(r) => rep.gated(S, check, r.residual, &gate, r.residual < tol, r),
                    Err(e) if not_applicable(&e) => {
                        rep.skip(S, format!("k={k}"), e);
                        unsupported[k] = true;
                        break;
                    }
                    Err(e) => rep.error(S, check, e),
                }
            }
        }
        let pts = random_points(ctx.abel, rng, g - 1);
        let probes = random_points(ctx.abel, rng, 3);
        let check = format!("mu_g expansion sample {s}");
        match mu_g_expansion_check(ctx, &probes, &pts) {
            Ok(r) => rep.gated(S, check, r.residual, &gate, r.residual < tol, r),
            Err(e) => rep.error(S, check, e),
        }
    }
}

fn burgers_stage(cfg: &RunConfig, ctx: &InversionContext, rng: &mut ChaCha8Rng, rep: &mut Report) {
    const S: &str = "burgers";
    let gate = format!("< {BURGERS_TOL:e}");
    for s in 0..cfg.samples {
        let p = random_points(ctx.abel, rng, 1)[0];
        let check = format!("sample {s}");
        match burgers_residual(ctx, &p, 0, 1) {
            Ok(r) => rep.gated(S, check, r.residual, &gate, r.residual < BURGERS_TOL, r),
            Err(e) if not_applicable(&e) => return rep.skip(S, "all", e),
            Err(e) => rep.error(S, check, e),
        }
    }
}

fn pentagonal_stage(ctx: &InversionContext, rng: &mut ChaCha8Rng, rep: &mut Report) {
    const S: &str = "pentagonal";
    let gate = format!("< {PENTAGONAL_TOL:e}");
    for s in 0..PENTAGONAL_POINTS {
        let p = random_points(ctx.abel, rng, 1)[0];
        let check = format!("d1/d2 point {s}");
        match pentagonal_check(ctx, &p) {
            Ok(r) => rep.gated(S, check, r.residual, &gate, r.residual < PENTAGONAL_TOL, r),
            Err(e) => rep.error(S, check, e),
        }
    }
}
