//! Reports come in two renderings of one structure: a text summary for
//! people and a JSON document for golden comparison. Timing lives in its own
//! optional block so the rest is byte-stable across runs.

use std::time::Duration;

use dq_core::fedosov::{output_order, working_weight};
use dq_core::forms::EForm;
use dq_core::fps::Series;
use dq_core::Location;
use serde::Serialize;

use crate::pipeline::{Outcome, Status};
use crate::problem::{ProblemKind, ProblemSpec};

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct Term {
    pub numerator: String,
    pub denominator: String,
    pub eps: u32,
    pub y: Vec<u16>,
    pub x: Vec<u16>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SeriesEntry {
    pub label: String,
    pub text: String,
    pub terms: Vec<Term>,
}

impl SeriesEntry {
    pub fn new(label: impl Into<String>, s: &Series) -> Self {
        SeriesEntry {
            label: label.into(),
            text: s.to_string(),
            terms: s
                .to_structured()
                .into_iter()
                .map(|t| Term {
                    numerator: t.numerator,
                    denominator: t.denominator,
                    eps: t.eps,
                    y: t.y,
                    x: t.x,
                })
                .collect(),
        }
    }

    /// One entry per nonzero component, labelled `name[dx1^dx2]`.
    pub fn form(name: &str, f: &EForm) -> Vec<Self> {
        f.components()
            .filter(|(_, s)| !s.is_zero())
            .map(|(idx, s)| {
                let dx: Vec<String> = idx.iter().map(|i| format!("dx{}", i + 1)).collect();
                let label = if dx.is_empty() {
                    name.to_string()
                } else {
                    format!("{name}[{}]", dx.join("^"))
                };
                SeriesEntry::new(label, s)
            })
            .collect()
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct CapsEntry {
    pub eps: u32,
    pub y: u32,
    pub x: u32,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct LocationEntry {
    pub eps_order: u32,
    pub total_degree: u32,
}

impl From<Location> for LocationEntry {
    fn from(l: Location) -> Self {
        LocationEntry {
            eps_order: l.eps_order,
            total_degree: l.total_degree,
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct OutcomeEntry {
    pub name: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub location: Option<LocationEntry>,
    pub detail: String,
}

impl From<&Outcome> for OutcomeEntry {
    fn from(o: &Outcome) -> Self {
        OutcomeEntry {
            name: o.name.clone(),
            status: o.status,
            location: o.location.map(Into::into),
            detail: o.detail.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct TimingEntry {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub format_version: u32,
    pub command: String,
    pub problem: String,
    pub mode: String,
    pub caps: CapsEntry,
    pub working_weight: u32,
    pub exact_order: u32,
    pub output_order: u32,
    pub stages: Vec<OutcomeEntry>,
    pub suites: Vec<OutcomeEntry>,
    pub results: Vec<SeriesEntry>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<Vec<TimingEntry>>,
}

impl Report {
    pub fn new(command: &str, spec: &ProblemSpec) -> Self {
        let w = working_weight(spec.caps);
        let (mode, exact) = match spec.kind {
            ProblemKind::Symplectic { .. } => ("symplectic", output_order(w)),
            ProblemKind::FlatPoisson { .. } => ("flat-poisson", 1),
        };
        Report {
            format_version: REPORT_FORMAT_VERSION,
            command: command.into(),
            problem: spec.name.clone(),
            mode: mode.into(),
            caps: CapsEntry {
                eps: spec.caps.eps,
                y: spec.caps.y,
                x: spec.caps.x,
            },
            working_weight: w,
            exact_order: exact,
            output_order: spec.output_order,
            stages: Vec::new(),
            suites: Vec::new(),
            results: Vec::new(),
            status: Status::Pass,
            timing: None,
        }
    }

    pub fn with_stages(mut self, stages: &[Outcome]) -> Self {
        self.stages = stages.iter().map(Into::into).collect();
        self.refresh_status();
        self
    }

    pub fn with_suites(mut self, suites: &[Outcome]) -> Self {
        self.suites = suites.iter().map(Into::into).collect();
        self.refresh_status();
        self
    }

    pub fn with_timing(mut self, timing: &[(String, Duration)]) -> Self {
        self.timing = Some(
            timing
                .iter()
                .map(|(s, d)| TimingEntry {
                    stage: s.clone(),
                    seconds: d.as_secs_f64(),
                })
                .collect(),
        );
        self
    }

    pub fn push_result(&mut self, e: SeriesEntry) {
        self.results.push(e);
    }

    pub fn fail(&mut self) {
        self.status = Status::Fail;
    }

    fn refresh_status(&mut self) {
        if self
            .stages
            .iter()
            .chain(&self.suites)
            .any(|o| o.status == Status::Fail)
        {
            self.status = Status::Fail;
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "problem {} ({}), caps (N_ε, N_y, N_x) = ({}, {}, {}), working weight {}, exact to eps^{}\n",
            self.problem, self.mode, self.caps.eps, self.caps.y, self.caps.x, self.working_weight, self.exact_order
        );
        let line = |o: &OutcomeEntry| {
            let status = match (&o.status, &o.location) {
                (Status::Fail, Some(l)) => format!("FAIL at (ε{}, degree {})", l.eps_order, l.total_degree),
                (s, _) => s.to_string(),
            };
            if o.detail.is_empty() {
                format!("{}: {status}\n", o.name)
            } else {
                format!("{}: {status}  [{}]\n", o.name, o.detail)
            }
        };
        if !self.stages.is_empty() {
            out.push_str("stages\n");
            self.stages.iter().for_each(|o| out.push_str(&format!("  {}", line(o))));
        }
        if !self.suites.is_empty() {
            out.push_str("checks\n");
            self.suites.iter().for_each(|o| out.push_str(&format!("  {}", line(o))));
        }
        for r in &self.results {
            out.push_str(&format!("{} = {}\n", r.label, r.text));
        }
        if let Some(t) = &self.timing {
            out.push_str("timing\n");
            for e in t {
                out.push_str(&format!("  {}: {:.3}s\n", e.stage, e.seconds));
            }
        }
        out.push_str(&format!("status: {}\n", self.status));
        out
    }
}
