//! TOML curve specifications.
//!
//! ```toml
//! id = "genus-two"
//! kind = "cyclic"          # y^r = prod (x - b)^m
//! r = 2
//! generator_names = ["w"]  # optional names for new eigen-generators
//!
//! [[branch]]
//! b = [0.0, 0.0]           # (re, im)
//! m = 1
//!
//! [labels]                 # optional monomial-label caps
//! caps = { y = 4 }
//! default_cap = 1
//! total_cap = 2
//! ```
//!
//! Plane specs use `kind = "plane"`, `m`, `n`, `coeffs` (row `i` holds the
//! coefficients of `A_i`, constant term first, as `[re, im]` pairs), and
//! optionally `d1`, `semigroup`, `[[generator]]` tables with `name` and
//! `weight`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;
use toml::Spanned;

use super::basis::LabelRules;
use super::{BranchPoint, CyclicCurveSpec, PlaneWeierstrassSpec};
use crate::error::{Error, Result};
use crate::semigroup::NumericalSemigroup;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum CurveSpec {
    Cyclic(CyclicCurveSpec),
    Plane(PlaneWeierstrassSpec),
}

impl CurveSpec {
    pub fn id(&self) -> &str {
        match self {
            CurveSpec::Cyclic(c) => &c.id,
            CurveSpec::Plane(p) => &p.id,
        }
    }

    pub fn semigroup(&self) -> Result<NumericalSemigroup> {
        match self {
            CurveSpec::Cyclic(c) => Ok(c.semigroup()),
            CurveSpec::Plane(p) => p.semigroup(),
        }
    }

    pub fn as_cyclic(&self) -> Option<&CyclicCurveSpec> {
        match self {
            CurveSpec::Cyclic(c) => Some(c),
            CurveSpec::Plane(_) => None,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    id: Option<String>,
    kind: Spanned<String>,
    r: Option<Spanned<u32>>,
    branch: Option<Vec<Spanned<RawBranch>>>,
    generator_names: Option<Vec<String>>,
    m: Option<Spanned<u32>>,
    n: Option<Spanned<u32>>,
    coeffs: Option<Spanned<Vec<Vec<[f64; 2]>>>>,
    d1: Option<u64>,
    semigroup: Option<Spanned<Vec<u64>>>,
    generator: Option<Vec<RawGenerator>>,
    labels: Option<Spanned<RawLabels>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBranch {
    b: [f64; 2],
    m: u32,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGenerator {
    name: String,
    weight: u64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLabels {
    #[serde(default)]
    caps: BTreeMap<String, u32>,
    default_cap: Option<u32>,
    total_cap: Option<u32>,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn key_on_line(text: &str, line: usize) -> String {
    text.lines()
        .nth(line.saturating_sub(1))
        .and_then(|l| l.split('=').next())
        .map(|k| k.trim().trim_matches(|c| c == '[' || c == ']').to_string())
        .unwrap_or_default()
}

fn config_err(text: &str, span: std::ops::Range<usize>, key: &str, msg: impl Into<String>) -> Error {
    Error::Config {
        line: line_of(text, span.start),
        key: key.to_string(),
        msg: msg.into(),
    }
}

fn wrap_spec_error(text: &str, span: std::ops::Range<usize>, key: &str, e: Error) -> Error {
    config_err(text, span, key, e.to_string())
}

fn required<T>(text: &str, field: Option<Spanned<T>>, key: &str) -> Result<Spanned<T>> {
    field.ok_or_else(|| Error::Config {
        line: line_of(text, 0),
        key: key.to_string(),
        msg: "required key missing".into(),
    })
}

pub fn parse_curve_spec(text: &str) -> Result<CurveSpec> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| {
        let line = e.span().map(|s| line_of(text, s.start)).unwrap_or(1);
        Error::Config {
            line,
            key: key_on_line(text, line),
            msg: e.message().trim().to_string(),
        }
    })?;
    let id = raw.id.clone().unwrap_or_else(|| "curve".to_string());
    let labels = raw.labels.as_ref().map(|l| {
        let l = l.get_ref();
        LabelRules {
            caps: l.caps.iter().map(|(k, v)| (k.clone(), *v)).collect(),
            default_cap: l.default_cap,
            total_cap: l.total_cap,
        }
    });
    match raw.kind.get_ref().as_str() {
        "cyclic" => {
            let r = required(text, raw.r, "r")?;
            let branch = raw.branch.unwrap_or_default();
            if branch.is_empty() {
                return Err(Error::Config {
                    line: line_of(text, raw.kind.span().start),
                    key: "branch".into(),
                    msg: "at least one [[branch]] table required".into(),
                });
            }
            for (i, b) in branch.iter().enumerate() {
                let v = b.get_ref();
                if v.m == 0 || v.m >= *r.get_ref() {
                    return Err(config_err(
                        text,
                        b.span(),
                        &format!("branch[{i}].m"),
                        format!("multiplicity {} not in 1..{}", v.m, r.get_ref()),
                    ));
                }
            }
            let points = branch
                .iter()
                .map(|b| BranchPoint {
                    b: C64::new(b.get_ref().b[0], b.get_ref().b[1]),
                    m: b.get_ref().m,
                })
                .collect();
            let mut spec =
                CyclicCurveSpec::new(id, *r.get_ref(), points).map_err(|e| wrap_spec_error(text, r.span(), "r", e))?;
            spec.generator_names = raw.generator_names.unwrap_or_default();
            if let Some(l) = labels {
                spec.labels = l;
            }
            Ok(CurveSpec::Cyclic(spec))
        }
        "plane" => {
            let m = required(text, raw.m, "m")?;
            let n = required(text, raw.n, "n")?;
            let coeffs = raw
                .coeffs
                .map(|c| {
                    c.into_inner()
                        .into_iter()
                        .map(|row| row.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                        .collect()
                })
                .unwrap_or_default();
            let spec = PlaneWeierstrassSpec {
                id,
                m: *m.get_ref(),
                n: *n.get_ref(),
                coeffs,
                extra_generators: raw
                    .generator
                    .unwrap_or_default()
                    .into_iter()
                    .map(|g| (g.name, g.weight))
                    .collect(),
                d1: raw.d1,
                semigroup_generators: raw.semigroup.as_ref().map(|s| s.get_ref().clone()),
                labels: labels.unwrap_or_default(),
            };
            if let Some(s) = &raw.semigroup {
                NumericalSemigroup::from_generators(s.get_ref())
                    .map_err(|e| wrap_spec_error(text, s.span(), "semigroup", e))?;
            }
            if crate::gcd(spec.m as u64, spec.n as u64) != 1 {
                return Err(config_err(
                    text,
                    n.span(),
                    "n",
                    format!("gcd(m, n) = gcd({}, {}) != 1", spec.m, spec.n),
                ));
            }
            Ok(CurveSpec::Plane(spec))
        }
        other => Err(config_err(
            text,
            raw.kind.span(),
            "kind",
            format!("unknown curve kind `{other}` (expected `cyclic` or `plane`)"),
        )),
    }
}

pub fn load_curve_spec(path: &Path) -> Result<CurveSpec> {
    let text = std::fs::read_to_string(path)?;
    parse_curve_spec(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GENUS_TWO: &str = r#"
id = "g2"
kind = "cyclic"
r = 2

[[branch]]
b = [0.0, 0.0]
m = 1

[[branch]]
b = [1.0, 0.0]
m = 1

[[branch]]
b = [-1.0, 0.5]
m = 1

[[branch]]
b = [2.0, -0.3]
m = 1

[[branch]]
b = [0.3, 1.2]
m = 1
"#;

    #[test]
    fn parses_cyclic() {
        let spec = parse_curve_spec(GENUS_TWO).unwrap();
        let c = spec.as_cyclic().unwrap();
        assert_eq!(c.genus(), 2);
        assert_eq!(c.branch()[2].b, C64::new(-1.0, 0.5));
        assert_eq!(spec.id(), "g2");
    }

    #[test]
    fn errors_cite_line_and_key() {
        let bad = GENUS_TWO.replace("r = 2", "r = \"two\"");
        match parse_curve_spec(&bad) {
            Err(Error::Config { line, key, .. }) => {
                assert_eq!(line, 4);
                assert_eq!(key, "r");
            }
            other => panic!("{other:?}"),
        }
        let bad = GENUS_TWO.replacen("m = 1", "m = 2", 1);
        match parse_curve_spec(&bad) {
            Err(Error::Config { key, .. }) => assert_eq!(key, "branch[0].m"),
            other => panic!("{other:?}"),
        }
        let bad = GENUS_TWO.replace("kind = \"cyclic\"", "kind = \"conic\"");
        match parse_curve_spec(&bad) {
            Err(Error::Config { line, key, .. }) => assert_eq!((line, key.as_str()), (3, "kind")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn parses_plane() {
        let text = r#"
kind = "plane"
m = 3
n = 7
d1 = 5
semigroup = [3, 7, 8]
coeffs = [[], [], [[0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]]

[[generator]]
name = "w"
weight = 8
"#;
        let spec = parse_curve_spec(text).unwrap();
        match spec {
            CurveSpec::Plane(p) => {
                assert_eq!(p.extra_generators, vec![("w".to_string(), 8)]);
                assert_eq!(p.semigroup().unwrap().gaps(), &[1, 2, 4, 5]);
            }
            _ => panic!(),
        }
        let bad = text.replace("n = 7", "n = 6");
        assert!(matches!(parse_curve_spec(&bad), Err(Error::Config { line: 4, .. })));
    }
}
