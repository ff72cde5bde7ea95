//! Structured reports, rendered as text or JSON.

use std::fmt;

use serde::Serialize;
use spectral_orbits::decisions::{FailedCondition, Status, Verdict, Witness};
use spectral_orbits::distances::{DistanceReport, GapBound};

/// Tolerances and discretization parameters in effect for a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Settings {
    pub tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    /// Complement frame margin (absolute).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_margin: Option<f64>,
    /// Contour sample spacing parameter (absolute).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contour_refinement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionLine {
    pub id: &'static str,
    pub label: String,
    pub description: &'static str,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapEntry {
    pub region: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<GapBound>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: String,
    pub value: f64,
    pub relation: &'static str,
    pub bound: f64,
    pub holds: bool,
}

impl InequalityCheck {
    pub fn new(name: impl Into<String>, value: f64, relation: &'static str, bound: f64) -> Self {
        let holds = match relation {
            "<" => value < bound,
            "<=" => value <= bound,
            ">=" => value >= bound,
            "==" => value == bound,
            _ => unreachable!("unknown relation {relation}"),
        };
        InequalityCheck { name: name.into(), value, relation, bound, holds }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Decision {
        subcommand: String,
        answer: bool,
        conditions: Vec<ConditionLine>,
        failures: Vec<FailedCondition>,
    },
    Distance {
        bounds: DistanceReport,
        gap_bounds: Vec<GapEntry>,
        notes: Vec<String>,
    },
    Plan {
        schedule: String,
        cost: f64,
        certified_bound: f64,
        hausdorff: f64,
        splits: usize,
        matches: usize,
        #[serde(skip_serializing_if = "Option::is_none")]
        plan_file: Option<String>,
        checks: Vec<InequalityCheck>,
    },
    Sandbox {
        checks: Vec<InequalityCheck>,
        notes: Vec<String>,
    },
    Failure {
        message: String,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub command: String,
    pub exit_code: i32,
    pub settings: Settings,
    pub result: Body,
}

/// Human-readable name of a condition id.
pub fn condition_label(id: &str) -> String {
    if let Some(rest) = id.strip_prefix("aue-") {
        format!("unitary-equivalence condition {rest}")
    } else if id.starts_with('(') {
        format!("similarity condition {id}")
    } else if id == spectral_orbits::decisions::MOMENT {
        "moment condition".to_string()
    } else {
        format!("nilpotent-limit condition {id}")
    }
}

pub fn condition_lines(v: &Verdict) -> Vec<ConditionLine> {
    v.checks
        .iter()
        .map(|c| ConditionLine {
            id: c.condition_id,
            label: condition_label(c.condition_id),
            description: c.description,
            status: c.status,
            note: c.note.clone(),
        })
        .collect()
}

fn witness(w: &Witness) -> String {
    match w {
        Witness::Component(i) => format!("component {i}"),
        Witness::Hole(i) => format!("hole {i}"),
        Witness::UnboundedRegion => "unbounded region".to_string(),
        Witness::Point(z) => format!("point {}{:+}i", z.re, z.im),
        Witness::Moment(k) => format!("moment {k}"),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "unknown".to_string(), |v| v.to_string())
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.result {
            Body::Decision { subcommand, answer, conditions, failures } => {
                writeln!(f, "{} {subcommand}: {}", self.command, if *answer { "yes" } else { "no" })?;
                for c in conditions {
                    write!(f, "  {}: {}", c.label, c.status)?;
                    if let Some(n) = &c.note {
                        write!(f, " ({n})")?;
                    }
                    writeln!(f)?;
                }
                if failures.is_empty() {
                    writeln!(f, "all conditions pass")?;
                }
                for fc in failures {
                    writeln!(f, "  failed {}: {} [{}]", condition_label(fc.condition_id), fc.reason, witness(&fc.witness))?;
                }
            }
            Body::Distance { bounds, gap_bounds, notes } => {
                writeln!(f, "{}: lower {} [{}], upper {} [{}]", self.command, bounds.lower, bounds.lower_rule, opt(bounds.upper), bounds.upper_rule)?;
                writeln!(f, "  hausdorff {}, discretization slack {}", bounds.rho.hausdorff, bounds.discretization_slack)?;
                for g in gap_bounds {
                    match (&g.result, &g.error) {
                        (Some(GapBound::Applicable(cb)), _) => writeln!(
                            f,
                            "  gap bound on region {:?}: applicable, {} (contour length {}, sup {})",
                            g.region, cb.bound, cb.contour_length, cb.certified_sup
                        )?,
                        (Some(GapBound::NotApplicable { class1, class2 }), _) => {
                            writeln!(f, "  gap bound on region {:?}: not applicable (classes {class1} = {class2})", g.region)?
                        }
                        (None, Some(e)) => writeln!(f, "  gap bound on region {:?}: {e}", g.region)?,
                        (None, None) => {}
                    }
                }
                for n in notes {
                    writeln!(f, "  note: {n}")?;
                }
            }
            Body::Plan { schedule, cost, certified_bound, hausdorff, splits, matches, plan_file, checks } => {
                writeln!(f, "{} ({schedule}): cost {cost}, certified bound {certified_bound}", self.command)?;
                writeln!(f, "  hausdorff {hausdorff}, {splits} splits, {matches} matches")?;
                for c in checks {
                    writeln!(f, "  {}", render_check(c))?;
                }
                if let Some(p) = plan_file {
                    writeln!(f, "  plan written to {p}")?;
                }
            }
            Body::Sandbox { checks, notes } => {
                let ok = checks.iter().all(|c| c.holds);
                writeln!(f, "{}: {}", self.command, if ok { "all inequalities hold" } else { "inequality violated" })?;
                for c in checks {
                    writeln!(f, "  {}", render_check(c))?;
                }
                for n in notes {
                    writeln!(f, "  note: {n}")?;
                }
            }
            Body::Failure { message } => writeln!(f, "{}: {message}", self.command)?,
        }
        let s = &self.settings;
        write!(f, "settings: tol={:e}", s.tol)?;
        if let Some(p) = &s.profile {
            write!(f, " profile={p}")?;
        }
        if let Some(r) = s.resolution {
            write!(f, " resolution={r}")?;
        }
        if let Some(m) = s.frame_margin {
            write!(f, " frame_margin={m}")?;
        }
        if let Some(h) = s.contour_refinement {
            write!(f, " contour_refinement={h}")?;
        }
        writeln!(f)
    }
}

fn num(x: f64) -> String {
    if x != 0.0 && (x.abs() < 1e-4 || x.abs() >= 1e6) {
        format!("{x:e}")
    } else {
        x.to_string()
    }
}

fn render_check(c: &InequalityCheck) -> String {
    format!("{}: {} {} {}: {}", c.name, num(c.value), c.relation, num(c.bound), if c.holds { "ok" } else { "VIOLATED" })
}
