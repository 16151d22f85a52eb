//! darboux_check → hamiltonian_lift → weyl_curvature → solve_gamma →
//! quantize, with every stage recorded.

use std::time::{Duration, Instant};

use dq_core::fedosov::{
    output_order, solve_gamma, twist_form, working_weight, FedosovConnection, FedosovSolution,
    QuantizedSection,
};
use dq_core::forms::EForm;
use dq_core::fps::{q, Series};
use dq_core::jet::{darboux_check, ChartJetFamily, SymplecticData};
use dq_core::moyal::{kontsevich_first_order, ConstantBivector, FormalBivector};
use dq_core::{Error, Location};

use crate::problem::{ChartData, ProblemKind, ProblemSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub name: String,
    pub status: Status,
    pub location: Option<Location>,
    pub detail: String,
}

impl Outcome {
    pub fn pass(name: &str, detail: impl Into<String>) -> Self {
        Outcome {
            name: name.into(),
            status: Status::Pass,
            location: None,
            detail: detail.into(),
        }
    }

    pub fn fail(name: &str, location: Option<Location>, detail: impl Into<String>) -> Self {
        Outcome {
            name: name.into(),
            status: Status::Fail,
            location,
            detail: detail.into(),
        }
    }

    pub fn skip(name: &str, detail: impl Into<String>) -> Self {
        Outcome {
            name: name.into(),
            status: Status::Skip,
            location: None,
            detail: detail.into(),
        }
    }

    pub fn from_error(name: &str, e: &Error) -> Self {
        let location = match e {
            Error::TheoryViolation { location, .. } => Some(*location),
            _ => None,
        };
        Outcome::fail(name, location, e.to_string())
    }

    /// `name: PASS` or `name: FAIL at (ε1, degree 2)`.
    pub fn headline(&self) -> String {
        match (self.status, self.location) {
            (Status::Fail, Some(l)) => format!("{}: FAIL at {l}", self.name),
            (s, _) => format!("{}: {s}", self.name),
        }
    }
}

/// The constructed object a problem describes.
#[derive(Clone, Debug)]
pub enum Built {
    Fedosov(Box<FedosovSolution>),
    FirstOrder(FormalBivector),
}

#[derive(Clone, Debug)]
pub struct PipelineRun {
    pub stages: Vec<Outcome>,
    pub timing: Vec<(String, Duration)>,
    pub built: Option<Built>,
    pub sections: Vec<(String, QuantizedSection)>,
}

impl PipelineRun {
    pub fn ok(&self) -> bool {
        self.built.is_some() && self.stages.iter().all(|s| s.status != Status::Fail)
    }

    pub fn solution(&self) -> Option<&FedosovSolution> {
        match &self.built {
            Some(Built::Fedosov(s)) => Some(s),
            _ => None,
        }
    }

    pub fn first_failure(&self) -> Option<&Outcome> {
        self.stages.iter().find(|s| s.status == Status::Fail)
    }
}

pub fn build_chart(spec: &ProblemSpec, chart: &ChartData, alpha: &ConstantBivector) -> dq_core::Result<ChartJetFamily> {
    match chart {
        ChartData::Flat => ChartJetFamily::flat(spec.dim, spec.caps),
        ChartData::Christoffel { gamma, higher } => {
            ChartJetFamily::from_christoffel(spec.dim, spec.caps, gamma, higher.as_deref())
        }
        ChartData::Jets(phi) => ChartJetFamily::new(phi.clone()),
        ChartData::Flows(flows) => ChartJetFamily::from_flows(spec.dim, spec.caps, alpha, flows),
    }
}

/// `γ + ε(y¹dx² + (y¹)²dx²)`: a perturbation that breaks flatness at the
/// first ε-order.
pub fn corrupt_gamma(sol: &FedosovSolution) -> EForm {
    let (d, caps) = (sol.dim(), sol.caps());
    let mut e1 = vec![0u16; d];
    e1[0] = 1;
    let mut e2 = vec![0u16; d];
    e2[0] = 2;
    let zero = vec![0u16; d];
    let bad = &Series::monomial(d, caps, q(1), 1, &e1, &zero).expect("within caps")
        + &Series::monomial(d, caps, q(1), 1, &e2, &zero).expect("within caps");
    sol.gamma().add(&EForm::monomial_form(bad, &[1.min(d - 1)]))
}

struct Recorder {
    stages: Vec<Outcome>,
    timing: Vec<(String, Duration)>,
}

impl Recorder {
    fn stage<T>(&mut self, name: &str, f: impl FnOnce() -> dq_core::Result<(T, String)>) -> Option<T> {
        let start = Instant::now();
        let r = f();
        self.timing.push((name.to_string(), start.elapsed()));
        match r {
            Ok((v, detail)) => {
                self.stages.push(Outcome::pass(name, detail));
                Some(v)
            }
            Err(e) => {
                self.stages.push(Outcome::from_error(name, &e));
                None
            }
        }
    }
}

fn terms(f: &EForm) -> usize {
    f.components().map(|(_, s)| s.len()).sum()
}

pub fn run_pipeline(spec: &ProblemSpec, negative_control: bool) -> PipelineRun {
    let mut rec = Recorder {
        stages: Vec::new(),
        timing: Vec::new(),
    };
    let mut sections = Vec::new();
    let built = match &spec.kind {
        ProblemKind::FlatPoisson { alpha } => rec
            .stage("jacobi", || {
                alpha.check_jacobi()?;
                Ok((Built::FirstOrder(alpha.clone()), "Jacobiator vanishes".into()))
            }),
        ProblemKind::Symplectic { omega, chart, twist } => {
            build_fedosov(spec, omega, chart, twist, negative_control, &mut rec, &mut sections)
        }
    };
    PipelineRun {
        stages: rec.stages,
        timing: rec.timing,
        built,
        sections,
    }
}

fn build_fedosov(
    spec: &ProblemSpec,
    omega: &[Vec<Series>],
    chart: &ChartData,
    twist: &[(u32, Vec<Vec<Series>>)],
    negative_control: bool,
    rec: &mut Recorder,
    sections: &mut Vec<(String, QuantizedSection)>,
) -> Option<Built> {
    let w = working_weight(spec.caps);
    let symplectic = rec.stage("symplectic_data", || {
        let s = SymplecticData::new(omega.to_vec())?;
        Ok((s, format!("working weight {w}, exact to eps^{}", output_order(w))))
    })?;
    let chart = rec.stage("chart", || {
        let c = build_chart(spec, chart, symplectic.alpha0())?;
        let n: usize = c.phi().iter().map(Series::len).sum();
        Ok((c, format!("{n} jet terms")))
    })?;
    rec.stage("darboux_check", || {
        let r = darboux_check(&chart, &symplectic)?;
        if r.ok {
            Ok(((), "pullback of Ω is constant".into()))
        } else {
            Err(Error::NotDarboux(r.residual.to_string()))
        }
    })?;
    let conn = rec.stage("hamiltonian_lift", || {
        let c = FedosovConnection::new(chart.clone(), symplectic.clone())?;
        let n = terms(c.h());
        Ok((c, format!("h has {n} terms")))
    })?;
    rec.stage("weyl_curvature", || {
        Ok(((), format!("F has {} terms", terms(conn.curvature()))))
    })?;
    let omega_form = twist_form(spec.dim, spec.caps, twist);
    let sol = rec.stage("solve_gamma", || {
        let sol = solve_gamma(conn.clone(), &omega_form?)?;
        let orders: Vec<String> = sol
            .diagnostics()
            .iter()
            .map(|d| format!("eps^{}: {} -> {}", d.eps_order, d.beta_terms, d.solution_terms))
            .collect();
        let detail = format!("gamma has {} terms [{}]", terms(sol.gamma()), orders.join(", "));
        Ok((sol, detail))
    })?;
    let sol = if negative_control {
        let bad = sol.with_gamma(corrupt_gamma(&sol));
        rec.stages.push(Outcome::pass("negative_control", "gamma corrupted at order eps^1"));
        bad
    } else {
        sol
    };
    for (name, f) in &spec.functions {
        let stage = format!("quantize {name}");
        if let Some(s) = rec.stage(&stage, || {
            let s = sol.quantize(f)?;
            if !sol.dbar_apply(&EForm::scalar(s.sigma.clone()))?.is_zero() {
                return Err(Error::Precondition("quantized section is not flat".into()));
            }
            let n = s.sigma.len();
            Ok((s, format!("{n} terms")))
        }) {
            sections.push((name.clone(), s));
        }
    }
    Some(Built::Fedosov(Box::new(sol)))
}

/// `f ⋆ g` for the built object, truncated to the requested output order.
pub fn star(spec: &ProblemSpec, built: &Built, f: &Series, g: &Series) -> dq_core::Result<Series> {
    match built {
        Built::Fedosov(sol) => Ok(sol.global_star(f, g)?.truncate_eps(spec.output_order)),
        Built::FirstOrder(alpha) => {
            let p = kontsevich_first_order(&f.x_to_y()?, &g.x_to_y()?, alpha)?;
            Ok(y_to_x(&p)?.truncate_eps(spec.output_order.min(1)))
        }
    }
}

/// Inverse of [`Series::x_to_y`] on y-only series.
pub fn y_to_x(s: &Series) -> dq_core::Result<Series> {
    let (d, caps) = (s.dim(), s.caps());
    let zero = vec![0u16; d];
    let mut out = Series::zero(d, caps);
    for (m, c) in s.terms() {
        out += &Series::monomial(d, caps, c.clone(), m.eps, &zero, &m.y)?;
    }
    Ok(out)
}
