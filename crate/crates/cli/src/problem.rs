//! Problem files: a single JSON document, polynomials written as term lists
//! over explicit exponent vectors.
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "name": "flat-plane",
//!   "dimension": 2,
//!   "caps": { "eps": 3, "y": 10, "x": 8 },
//!   "output_order": 3,
//!   "mode": "symplectic",
//!   "symplectic_form": [[[], [{ "c": "1" }]], [[{ "c": "-1" }], []]],
//!   "chart": { "kind": "flat" },
//!   "twist": [],
//!   "functions": [{ "name": "f", "poly": [{ "c": "1", "x": [1, 0] }] }]
//! }
//! ```

use std::collections::BTreeSet;
use std::path::Path;

use dq_core::fedosov::{output_order, working_weight};
use dq_core::fps::{parse_rational, Caps, Monomial, Series, Q};
use dq_core::moyal::FormalBivector;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("validation error: {0}")]
    Invalid(String),
}

fn invalid(msg: impl Into<String>) -> ProblemError {
    ProblemError::Invalid(msg.into())
}

/// One term `c · ε^eps · y^y · x^x`; omitted exponent vectors are zero.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub c: String,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub eps: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub y: Vec<u16>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub x: Vec<u16>,
}

fn is_zero(v: &u32) -> bool {
    *v == 0
}

pub type Poly = Vec<Term>;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CapsSpec {
    pub eps: u32,
    pub y: u32,
    pub x: u32,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChartSpec {
    Flat,
    /// `gamma[j][k][l] = Γ^j_{kl}`, optional `higher[j]` of y-degree ≥ 3.
    Christoffel {
        gamma: Vec<Vec<Vec<Poly>>>,
        #[serde(default)]
        higher: Option<Vec<Poly>>,
    },
    Jets {
        phi: Vec<Poly>,
    },
    /// Composition of Hamiltonian flows, applied right to left.
    Flows {
        flows: Vec<FlowSpec>,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct FlowSpec {
    pub time: Poly,
    pub hamiltonian: Poly,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct TwistPart {
    pub eps_power: u32,
    pub matrix: Vec<Vec<Poly>>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct NamedFunction {
    pub name: String,
    pub poly: Poly,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Symplectic,
    FlatPoisson,
}

/// The file as written.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub format_version: u32,
    #[serde(default)]
    pub name: String,
    pub dimension: usize,
    pub caps: CapsSpec,
    pub output_order: u32,
    pub mode: Mode,
    #[serde(default)]
    pub symplectic_form: Option<Vec<Vec<Poly>>>,
    #[serde(default)]
    pub poisson: Option<Vec<Vec<Poly>>>,
    #[serde(default)]
    pub chart: Option<ChartSpec>,
    #[serde(default)]
    pub twist: Vec<TwistPart>,
    #[serde(default)]
    pub functions: Vec<NamedFunction>,
    #[serde(default)]
    pub seed: u64,
}

/// Validated problem with every polynomial converted to a [`Series`].
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub name: String,
    pub dim: usize,
    pub caps: Caps,
    pub output_order: u32,
    pub seed: u64,
    pub kind: ProblemKind,
    pub functions: Vec<(String, Series)>,
    pub source: ProblemFile,
}

#[derive(Clone, Debug)]
pub enum ProblemKind {
    Symplectic {
        omega: Vec<Vec<Series>>,
        chart: ChartData,
        twist: Vec<(u32, Vec<Vec<Series>>)>,
    },
    /// First-order product `fg + ε{f,g}` for an x-dependent bivector; the
    /// bivector and the functions are re-expressed in fiber variables.
    FlatPoisson { alpha: FormalBivector },
}

#[derive(Clone, Debug)]
pub enum ChartData {
    Flat,
    Christoffel {
        gamma: Vec<Vec<Vec<Series>>>,
        higher: Option<Vec<Series>>,
    },
    Jets(Vec<Series>),
    Flows(Vec<(Series, Series)>),
}

pub fn parse_problem(text: &str) -> Result<ProblemFile, ProblemError> {
    serde_json::from_str(text).map_err(|e| ProblemError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

pub fn load_problem(path: &Path) -> Result<ProblemSpec, ProblemError> {
    let text = std::fs::read_to_string(path).map_err(|source| ProblemError::Io {
        path: path.display().to_string(),
        source,
    })?;
    validate(parse_problem(&text)?)
}

/// Replaces the caps of a file before validation.
pub fn with_caps(mut file: ProblemFile, eps: Option<u32>, y: Option<u32>, x: Option<u32>) -> ProblemFile {
    if let Some(v) = eps {
        file.caps.eps = v;
    }
    if let Some(v) = y {
        file.caps.y = v;
    }
    if let Some(v) = x {
        file.caps.x = v;
    }
    file
}

pub fn poly(p: &[Term], dim: usize, caps: Caps) -> Result<Series, ProblemError> {
    let mut terms = Vec::with_capacity(p.len());
    for t in p {
        let c: Q = parse_rational(&t.c).map_err(|e| invalid(e.to_string()))?;
        let expand = |v: &[u16], what: &str| -> Result<Vec<u16>, ProblemError> {
            match v.len() {
                0 => Ok(vec![0; dim]),
                n if n == dim => Ok(v.to_vec()),
                n => Err(invalid(format!("{what}-exponent vector of length {n}, expected {dim}"))),
            }
        };
        terms.push((Monomial::new(t.eps, &expand(&t.y, "y")?, &expand(&t.x, "x")?), c));
    }
    Series::from_terms(dim, caps, terms).map_err(|e| invalid(e.to_string()))
}

fn x_poly(p: &[Term], dim: usize, caps: Caps, what: &str) -> Result<Series, ProblemError> {
    let s = poly(p, dim, caps)?;
    if !s.is_x_polynomial() {
        return Err(invalid(format!("{what} must be an x-polynomial (no y, no eps)")));
    }
    Ok(s)
}

fn matrix(
    m: &[Vec<Poly>],
    dim: usize,
    caps: Caps,
    what: &str,
) -> Result<Vec<Vec<Series>>, ProblemError> {
    if m.len() != dim || m.iter().any(|r| r.len() != dim) {
        return Err(invalid(format!("{what} must be a {dim}x{dim} matrix")));
    }
    let out: Vec<Vec<Series>> = m
        .iter()
        .map(|r| r.iter().map(|p| x_poly(p, dim, caps, what)).collect())
        .collect::<Result<_, _>>()?;
    for i in 0..dim {
        for j in 0..dim {
            if out[i][j] != -&out[j][i] {
                return Err(invalid(format!("{what} not antisymmetric")));
            }
        }
    }
    Ok(out)
}

pub fn validate(file: ProblemFile) -> Result<ProblemSpec, ProblemError> {
    if file.format_version != FORMAT_VERSION {
        return Err(invalid(format!(
            "unsupported format_version {} (expected {FORMAT_VERSION})",
            file.format_version
        )));
    }
    let dim = file.dimension;
    if dim == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let caps = Caps::new(file.caps.eps, file.caps.y, file.caps.x);
    let mut names = BTreeSet::new();
    let mut functions = Vec::new();
    for f in &file.functions {
        if !names.insert(f.name.clone()) {
            return Err(invalid(format!("duplicate function name {:?}", f.name)));
        }
        functions.push((f.name.clone(), x_poly(&f.poly, dim, caps, "function")?));
    }
    let kind = match file.mode {
        Mode::Symplectic => {
            if dim % 2 != 0 {
                return Err(invalid("dimension must be even in symplectic mode"));
            }
            let exact = output_order(working_weight(caps));
            if file.output_order > exact {
                return Err(invalid(format!(
                    "output_order {} exceeds the exact order {exact} reachable at caps (N_ε, N_y) = ({}, {})",
                    file.output_order, caps.eps, caps.y
                )));
            }
            let omega = matrix(
                file.symplectic_form
                    .as_deref()
                    .ok_or_else(|| invalid("symplectic mode requires symplectic_form"))?,
                dim,
                caps,
                "symplectic form",
            )?;
            let chart = match file.chart.as_ref().unwrap_or(&ChartSpec::Flat) {
                ChartSpec::Flat => ChartData::Flat,
                ChartSpec::Christoffel { gamma, higher } => {
                    if gamma.len() != dim
                        || gamma.iter().any(|a| a.len() != dim || a.iter().any(|b| b.len() != dim))
                    {
                        return Err(invalid("christoffel symbols must have shape d x d x d"));
                    }
                    let g: Vec<Vec<Vec<Series>>> = gamma
                        .iter()
                        .map(|a| {
                            a.iter()
                                .map(|b| {
                                    b.iter()
                                        .map(|p| x_poly(p, dim, caps, "christoffel symbol"))
                                        .collect()
                                })
                                .collect()
                        })
                        .collect::<Result<_, _>>()?;
                    for (j, gj) in g.iter().enumerate() {
                        for k in 0..dim {
                            for l in 0..dim {
                                if gj[k][l] != gj[l][k] {
                                    return Err(invalid(format!(
                                        "christoffel not symmetric: Γ^{}_{{{}{}}} != Γ^{}_{{{}{}}}",
                                        j + 1,
                                        k + 1,
                                        l + 1,
                                        j + 1,
                                        l + 1,
                                        k + 1
                                    )));
                                }
                            }
                        }
                    }
                    let higher = higher
                        .as_ref()
                        .map(|h| h.iter().map(|p| poly(p, dim, caps)).collect())
                        .transpose()?;
                    ChartData::Christoffel { gamma: g, higher }
                }
                ChartSpec::Jets { phi } => {
                    if phi.len() != dim {
                        return Err(invalid("jets must list one series per coordinate"));
                    }
                    ChartData::Jets(phi.iter().map(|p| poly(p, dim, caps)).collect::<Result<_, _>>()?)
                }
                ChartSpec::Flows { flows } => ChartData::Flows(
                    flows
                        .iter()
                        .map(|f| {
                            Ok((
                                x_poly(&f.time, dim, caps, "flow time")?,
                                poly(&f.hamiltonian, dim, caps)?,
                            ))
                        })
                        .collect::<Result<_, ProblemError>>()?,
                ),
            };
            let twist = file
                .twist
                .iter()
                .map(|t| {
                    if t.eps_power == 0 {
                        return Err(invalid("twist must start at order eps^1"));
                    }
                    Ok((t.eps_power, matrix(&t.matrix, dim, caps, "twist")?))
                })
                .collect::<Result<_, _>>()?;
            ProblemKind::Symplectic { omega, chart, twist }
        }
        Mode::FlatPoisson => {
            let m = matrix(
                file.poisson
                    .as_deref()
                    .ok_or_else(|| invalid("flat-poisson mode requires poisson"))?,
                dim,
                caps,
                "poisson bivector",
            )?;
            let comps = m
                .iter()
                .map(|r| r.iter().map(|s| s.x_to_y()).collect())
                .collect::<Result<_, _>>()
                .map_err(|e| invalid(e.to_string()))?;
            let alpha = FormalBivector::new(comps).map_err(|e| invalid(e.to_string()))?;
            alpha
                .check_jacobi()
                .map_err(|_| invalid("poisson bivector fails the Jacobi identity"))?;
            ProblemKind::FlatPoisson { alpha }
        }
    };
    Ok(ProblemSpec {
        name: file.name.clone(),
        dim,
        caps,
        output_order: file.output_order,
        seed: file.seed,
        kind,
        functions,
        source: file,
    })
}

impl ProblemSpec {
    pub fn function(&self, name: &str) -> Option<&Series> {
        self.functions.iter().find(|(n, _)| n == name).map(|(_, s)| s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FLAT: &str = r#"{
      "format_version": 1,
      "dimension": 2,
      "caps": { "eps": 2, "y": 5, "x": 4 },
      "output_order": 2,
      "mode": "symplectic",
      "symplectic_form": [[[], [{ "c": "1" }]], [[{ "c": "-1" }], []]],
      "chart": { "kind": "flat" }
    }"#;

    #[test]
    fn minimal_flat_problem() {
        let p = validate(parse_problem(FLAT).unwrap()).unwrap();
        assert_eq!(p.dim, 2);
        match p.kind {
            ProblemKind::Symplectic { chart: ChartData::Flat, ref omega, .. } => {
                assert_eq!(omega[0][1], Series::one(2, p.caps));
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn asymmetric_christoffel_rejected() {
        let text = FLAT.replace(
            r#""chart": { "kind": "flat" }"#,
            r#""chart": { "kind": "christoffel", "gamma": [[[[], [{"c": "1"}]], [[], []]], [[[], []], [[], []]]] }"#,
        );
        let err = validate(parse_problem(&text).unwrap()).unwrap_err();
        assert!(err.to_string().contains("christoffel not symmetric"), "{err}");
    }

    #[test]
    fn symmetric_twist_rejected() {
        let text = FLAT.replace(
            r#""chart": { "kind": "flat" }"#,
            r#""chart": { "kind": "flat" }, "twist": [{ "eps_power": 1, "matrix": [[[], [{"c": "1"}]], [[{"c": "1"}], []]] }]"#,
        );
        let err = validate(parse_problem(&text).unwrap()).unwrap_err();
        assert!(err.to_string().contains("twist not antisymmetric"), "{err}");
    }

    #[test]
    fn parse_error_has_line() {
        let err = parse_problem("{\n  \"format_version\": 1,\n  oops\n}").unwrap_err();
        match err {
            ProblemError::Parse { line, .. } => assert_eq!(line, 3),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn odd_dimension_rejected_in_symplectic_mode() {
        let text = FLAT.replace(r#""dimension": 2"#, r#""dimension": 3"#);
        let err = validate(parse_problem(&text).unwrap()).unwrap_err();
        assert!(err.to_string().contains("even"), "{err}");
    }
}
