//! Command implementations: documents in, reports out.

use std::collections::BTreeSet;

use num_complex::Complex64;
use serde::Deserialize;
use spectral_orbits::decisions::{
    decide_aue, decide_nilpotent_limit, decide_similarity, ii1_moment_obstruction, DecisionError, Verdict,
};
use spectral_orbits::distances::{distance_bounds, projection_gap_lower_bound, DistanceError, GapBound};
use spectral_orbits::geometry::{connected_components, hausdorff_distance, point_set_hausdorff, GridSet};
use spectral_orbits::kdata::{AlgebraProfile, SpectralDatum, FRAME_MARGIN_CELLS};
use spectral_orbits::matching::{
    bipartite_schedule, bipartite_threshold, partitioned_schedule, tree_schedule, Block, MatchingError, PairingPlan,
};
use spectral_orbits::sandbox::{
    analytic_calculus_bound, execute_plan, lower_bound_check, projection_conjugator,
    triangular_similarity, DenseMatrix, Polygon, SandboxError, STRUCTURE_TOL,
};

use crate::document::{Document, Schedule};
use crate::error::CliError;
use crate::report::{condition_lines, Body, GapEntry, InequalityCheck, Report, Settings};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_DEGREE: usize = 4;
/// Largest model dimension for which the dense lower-bound check runs.
pub const DENSE_CHECK_MAX_DIM: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub tol: f64,
    pub profile: Option<String>,
    pub resolution_check: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { tol: DEFAULT_TOL, profile: None, resolution_check: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecideKind {
    Aue,
    SimOrbit,
    Nilpotent,
    Ii1,
}

impl DecideKind {
    fn name(self) -> &'static str {
        match self {
            DecideKind::Aue => "aue",
            DecideKind::SimOrbit => "simorbit",
            DecideKind::Nilpotent => "nilpotent",
            DecideKind::Ii1 => "ii1",
        }
    }
}

fn decision_err(e: DecisionError) -> CliError {
    CliError::Input(e.to_string())
}

fn distance_err(e: DistanceError) -> CliError {
    CliError::Input(e.to_string())
}

fn matching_err(e: MatchingError) -> CliError {
    match e {
        MatchingError::ResolutionMismatch(..) | MatchingError::BadBlocks(_) => CliError::Input(e.to_string()),
        other => CliError::Hypothesis(other.to_string()),
    }
}

fn sandbox_err(e: SandboxError) -> CliError {
    match e {
        SandboxError::AchievedMismatch { .. } | SandboxError::NotUnitary(_) => CliError::Hypothesis(e.to_string()),
        other => CliError::Input(other.to_string()),
    }
}

struct Loaded {
    profile: AlgebraProfile,
    data: Vec<SpectralDatum>,
}

fn load(doc: &Document, opts: &RunOptions, arity: usize) -> Result<Loaded, CliError> {
    doc.expect_spectra(arity)?;
    if opts.resolution_check {
        doc.resolution_check()?;
    }
    let profile = doc.profile(opts.profile.as_deref())?;
    let data = (0..arity).map(|i| doc.datum(i, &profile)).collect::<Result<Vec<_>, _>>()?;
    Ok(Loaded { profile, data })
}

fn settings(opts: &RunOptions, profile: Option<&AlgebraProfile>, eps: Option<f64>, refinement: Option<f64>) -> Settings {
    Settings {
        tol: opts.tol,
        profile: profile.map(|p| p.name.clone()),
        resolution: eps,
        frame_margin: eps.map(|e| FRAME_MARGIN_CELLS * e),
        contour_refinement: refinement,
    }
}

fn decision_report(kind: DecideKind, v: &Verdict, settings: Settings) -> Report {
    let answer = v.answer();
    Report {
        command: "decide".into(),
        exit_code: if answer { 0 } else { 1 },
        settings,
        result: Body::Decision {
            subcommand: kind.name().into(),
            answer,
            conditions: condition_lines(v),
            failures: v.failed_conditions.clone(),
        },
    }
}

pub fn decide(kind: DecideKind, doc: &Document, opts: &RunOptions) -> Result<Report, CliError> {
    if kind == DecideKind::Ii1 {
        let [mu1, mu2] = doc
            .options
            .measures
            .as_ref()
            .ok_or_else(|| CliError::Input("options.measures: required for ii1".into()))?;
        let to_measure =
            |m: &Vec<(f64, f64)>| m.iter().map(|&(x, w)| (Complex64::new(x, 0.0), w)).collect::<Vec<_>>();
        let max_degree = doc.options.max_degree.unwrap_or(DEFAULT_MAX_DEGREE);
        let v = ii1_moment_obstruction(&to_measure(mu1), &to_measure(mu2), max_degree, opts.tol).map_err(decision_err)?;
        return Ok(decision_report(kind, &v, settings(opts, None, None, None)));
    }
    let arity = if kind == DecideKind::Nilpotent { 1 } else { 2 };
    let l = load(doc, opts, arity)?;
    let v = match kind {
        DecideKind::Aue => decide_aue(&l.data[0], &l.data[1]),
        DecideKind::SimOrbit => decide_similarity(&l.data[0], &l.data[1]),
        DecideKind::Nilpotent => decide_nilpotent_limit(&l.data[0]),
        DecideKind::Ii1 => unreachable!("handled above"),
    }
    .map_err(decision_err)?;
    let eps = l.data[0].resolution();
    Ok(decision_report(kind, &v, settings(opts, Some(&l.profile), Some(eps), None)))
}

pub const PROJECTION_RULE_NOTE: &str = "Murray-von Neumann rule: inequivalent spectral projections onto an isolated \
     region keep the orbits at distance at least 1; the contour bound is a separate, weaker certificate";

pub fn dist(doc: &Document, opts: &RunOptions) -> Result<Report, CliError> {
    let l = load(doc, opts, 2)?;
    let (d1, d2) = (&l.data[0], &l.data[1]);
    let bounds = distance_bounds(d1, d2).map_err(distance_err)?;
    let eps = d1.resolution();
    let offset = doc.options.offset.unwrap_or(eps);
    let refinement = doc.options.refinement.unwrap_or(eps / 4.0);

    let regions: Vec<Vec<usize>> = match &doc.options.gap_regions {
        Some(r) => r.clone(),
        None => {
            let union = d1.spectrum().union(d2.spectrum()).map_err(|e| CliError::Input(e.to_string()))?;
            (0..connected_components(&union).len()).map(|i| vec![i]).collect()
        }
    };
    let mut gap_bounds = Vec::new();
    let mut notes = Vec::new();
    for region in regions {
        let ids: BTreeSet<usize> = region.iter().copied().collect();
        let entry = match projection_gap_lower_bound(d1, d2, &ids, offset, Some(refinement)) {
            Ok(g) => {
                if matches!(g, GapBound::Applicable(_)) && notes.is_empty() {
                    notes.push(PROJECTION_RULE_NOTE.to_string());
                }
                GapEntry { region, result: Some(g), error: None }
            }
            Err(e @ (DistanceError::UnknownRegion(_) | DistanceError::BadOffset(_) | DistanceError::BadRefinement(_))) => {
                return Err(CliError::Input(format!("options: {e}")))
            }
            Err(e) => GapEntry { region, result: None, error: Some(e.to_string()) },
        };
        gap_bounds.push(entry);
    }
    Ok(Report {
        command: "dist".into(),
        exit_code: 0,
        settings: settings(opts, Some(&l.profile), Some(eps), Some(refinement)),
        result: Body::Distance { bounds, gap_bounds, notes },
    })
}

/// Sub-spectrum made of the listed components.
fn sub_gridset(d: &SpectralDatum, ids: &BTreeSet<usize>) -> Result<GridSet, CliError> {
    let comps = d.components();
    let mut boxes = Vec::new();
    let mut points = Vec::new();
    for &id in ids {
        let c = comps.get(id).ok_or_else(|| CliError::Input(format!("options.blocks: no component {id}")))?;
        boxes.extend_from_slice(c.boxes());
        points.extend(c.point());
    }
    GridSet::new(d.resolution(), boxes, points).map_err(|e| CliError::Input(format!("options.blocks: {e}")))
}

/// Returns the report and the plan, which the caller may write out.
pub fn plan(doc: &Document, opts: &RunOptions) -> Result<(Report, PairingPlan), CliError> {
    let schedule = doc.options.schedule.unwrap_or(Schedule::Bipartite);
    let (profile, p, bound, hausdorff, eps) = match schedule {
        Schedule::Tree => {
            let l = load(doc, opts, 1)?;
            let g = l.data[0].spectrum();
            let p = tree_schedule(g).map_err(matching_err)?;
            (l.profile, p, std::f64::consts::SQRT_2 * g.resolution(), 0.0, g.resolution())
        }
        Schedule::Bipartite => {
            let l = load(doc, opts, 2)?;
            let (s1, s2) = (l.data[0].spectrum(), l.data[1].spectrum());
            let p = bipartite_schedule(&l.data[0], &l.data[1]).map_err(matching_err)?;
            let (t, h) = (bipartite_threshold(s1, s2), hausdorff_distance(s1, s2));
            (l.profile, p, t, h, s1.resolution())
        }
        Schedule::Partitioned => {
            let l = load(doc, opts, 2)?;
            let specs = doc.options.blocks.as_ref().ok_or_else(|| CliError::Input("options.blocks: required".into()))?;
            let blocks: Vec<Block> = specs
                .iter()
                .map(|b| (b.side1.iter().copied().collect(), b.side2.iter().copied().collect()))
                .collect();
            let p = partitioned_schedule(&l.data[0], &l.data[1], &blocks).map_err(matching_err)?;
            let mut bound: f64 = 0.0;
            for (b1, b2) in &blocks {
                let (g1, g2) = (sub_gridset(&l.data[0], b1)?, sub_gridset(&l.data[1], b2)?);
                bound = bound.max(bipartite_threshold(&g1, &g2));
            }
            let h = hausdorff_distance(l.data[0].spectrum(), l.data[1].spectrum());
            (l.profile, p, bound, h, l.data[0].resolution())
        }
    };
    let name = match schedule {
        Schedule::Tree => "tree",
        Schedule::Bipartite => "bipartite",
        Schedule::Partitioned => "partitioned",
    };
    let checks = vec![InequalityCheck::new("plan cost vs certified bound", p.cost, "<=", bound)];
    let exit_code = if checks.iter().all(|c| c.holds) { 0 } else { 1 };
    let report = Report {
        command: "plan".into(),
        exit_code,
        settings: settings(opts, Some(&profile), Some(eps), None),
        result: Body::Plan {
            schedule: name.into(),
            cost: p.cost,
            certified_bound: bound,
            hausdorff,
            splits: p.splits(),
            matches: p.matches(),
            plan_file: None,
            checks,
        },
    };
    Ok((report, p))
}

/// Matrix as rows of `[re, im]` entries.
pub type MatrixSpec = Vec<Vec<(f64, f64)>>;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConjugatorCase {
    pub p: MatrixSpec,
    pub q: MatrixSpec,
    pub v: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TriangularCase {
    /// `[[re, im], block_dim]` per diagonal block.
    pub diagonal: Vec<((f64, f64), usize)>,
    pub upper: MatrixSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum FunctionSpec {
    Exp,
    Polynomial { coefficients: Vec<(f64, f64)> },
    Resolvent { pole: (f64, f64) },
}

impl FunctionSpec {
    fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            FunctionSpec::Exp => z.exp(),
            FunctionSpec::Polynomial { coefficients } => {
                coefficients.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &(re, im)| acc * z + Complex64::new(re, im))
            }
            FunctionSpec::Resolvent { pole } => 1.0 / (z - Complex64::new(pole.0, pole.1)),
        }
    }
}

fn default_nodes() -> usize {
    64
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyticCase {
    pub a: MatrixSpec,
    pub b: MatrixSpec,
    pub v: MatrixSpec,
    pub function: FunctionSpec,
    pub contour: Vec<(f64, f64)>,
    #[serde(default = "default_nodes")]
    pub nodes_per_edge: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandboxDocument {
    pub version: u32,
    #[serde(default)]
    pub plan: Option<PairingPlan>,
    #[serde(default)]
    pub conjugator: Vec<ConjugatorCase>,
    #[serde(default)]
    pub triangular: Vec<TriangularCase>,
    #[serde(default)]
    pub analytic: Vec<AnalyticCase>,
}

/// A bare plan (as written by `plan --emit-plan`) or a sandbox document.
pub fn parse_sandbox(text: &str) -> Result<SandboxDocument, CliError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed document: {e}")))?;
    if value.get("atoms1").is_some() {
        let plan: PairingPlan =
            serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed plan: {e}")))?;
        return Ok(SandboxDocument { version: 1, plan: Some(plan), conjugator: vec![], triangular: vec![], analytic: vec![] });
    }
    let doc: SandboxDocument =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("malformed document: {e}")))?;
    if doc.version != crate::document::VERSION {
        return Err(CliError::Input(format!("version: expected {}, got {}", crate::document::VERSION, doc.version)));
    }
    Ok(doc)
}

fn matrix(spec: &MatrixSpec, field: &str) -> Result<DenseMatrix, CliError> {
    let rows: Vec<Vec<Complex64>> =
        spec.iter().map(|r| r.iter().map(|&(re, im)| Complex64::new(re, im)).collect()).collect();
    DenseMatrix::from_rows(&rows).map_err(|e| CliError::Input(format!("{field}: {e}")))
}

fn field_err(field: String) -> impl Fn(SandboxError) -> CliError {
    move |e| match sandbox_err(e) {
        CliError::Input(m) => CliError::Input(format!("{field}: {m}")),
        CliError::Hypothesis(m) => CliError::Hypothesis(format!("{field}: {m}")),
    }
}

fn sorted_eigs(m: &DenseMatrix) -> Result<Vec<Complex64>, SandboxError> {
    let mut v = m.eigenvalues()?;
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(v)
}

pub fn sandbox(doc: &SandboxDocument, verify: bool, opts: &RunOptions) -> Result<Report, CliError> {
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    if let Some(p) = &doc.plan {
        let ex = execute_plan(p).map_err(field_err("plan".into()))?;
        checks.push(InequalityCheck::new("plan: ‖M1 − U*M2U‖ vs plan cost", ex.achieved, "==", p.cost));
        if verify {
            let n = ex.diag1.len();
            if n <= DENSE_CHECK_MAX_DIM {
                let (m1, m2, u) = ex.models().map_err(field_err("plan".into()))?;
                let lower = point_set_hausdorff(m1.eigenvalues(), m2.eigenvalues());
                let holds = lower_bound_check(&m1, &m2, &u, opts.tol).map_err(field_err("plan".into()))?;
                let dense = (&m1.matrix() - &(&(&u.adjoint() * &m2.matrix()) * &u)).norm();
                let mut c = InequalityCheck::new("plan: dense ‖M1 − U*M2U‖ vs d_H of eigenvalues", dense, ">=", lower - opts.tol);
                c.holds = c.holds && holds;
                checks.push(c);
            } else {
                notes.push(format!("plan dimension {n} exceeds {DENSE_CHECK_MAX_DIM}; dense lower-bound check skipped"));
            }
        }
    }
    for (i, c) in doc.conjugator.iter().enumerate() {
        let f = format!("conjugator[{i}]");
        let (p, q, v) = (matrix(&c.p, &f)?, matrix(&c.q, &f)?, matrix(&c.v, &f)?);
        let out = projection_conjugator(&p, &q, &v).map_err(field_err(f.clone()))?;
        checks.push(InequalityCheck::new(format!("{f}: ‖WPW* − Q‖"), out.err, "<", STRUCTURE_TOL));
        if verify {
            let n = p.rows();
            let defect = (&(&out.w.adjoint() * &out.w) - &DenseMatrix::identity(n)).norm();
            checks.push(InequalityCheck::new(format!("{f}: ‖W*W − I‖"), defect, "<", STRUCTURE_TOL));
            let (rp, rq) = (p.rank(STRUCTURE_TOL.sqrt()), q.rank(STRUCTURE_TOL.sqrt()));
            checks.push(InequalityCheck::new(format!("{f}: rank P vs rank Q"), rp as f64, "==", rq as f64));
        }
    }
    for (i, c) in doc.triangular.iter().enumerate() {
        let f = format!("triangular[{i}]");
        let diagonal: Vec<(Complex64, usize)> = c.diagonal.iter().map(|&((re, im), k)| (Complex64::new(re, im), k)).collect();
        let upper = matrix(&c.upper, &f)?;
        let s = triangular_similarity(&diagonal, &upper).map_err(field_err(f.clone()))?;
        checks.push(InequalityCheck::new(format!("{f}: ‖TAT⁻¹ − D‖"), s.err, "<", STRUCTURE_TOL));
        if verify {
            let conj = &(&s.t * &s.a) * &s.t_inv;
            let (before, after) = (sorted_eigs(&s.d).map_err(field_err(f.clone()))?, sorted_eigs(&conj).map_err(field_err(f.clone()))?);
            let drift = before.iter().zip(&after).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            checks.push(InequalityCheck::new(format!("{f}: spectrum drift"), drift, "<", STRUCTURE_TOL.sqrt()));
        }
    }
    for (i, c) in doc.analytic.iter().enumerate() {
        let f = format!("analytic[{i}]");
        let (a, b, v) = (matrix(&c.a, &f)?, matrix(&c.b, &f)?, matrix(&c.v, &f)?);
        let contour = Polygon(c.contour.iter().map(|&(re, im)| Complex64::new(re, im)).collect());
        let out = analytic_calculus_bound(&a, &b, &v, |z| c.function.eval(z), &contour, c.nodes_per_edge)
            .map_err(field_err(f.clone()))?;
        checks.push(InequalityCheck::new(
            format!("{f}: ‖f(A) − Vf(B)V⁻¹‖ vs contour bound + quadrature bound"),
            out.lhs,
            "<=",
            out.rhs + out.quadrature_bound,
        ));
    }
    if checks.is_empty() {
        return Err(CliError::Input("document contains nothing to check".into()));
    }
    let exit_code = if checks.iter().all(|c| c.holds) { 0 } else { 1 };
    Ok(Report { command: "sandbox".into(), exit_code, settings: settings(opts, None, None, None), result: Body::Sandbox { checks, notes } })
}

/// Report for a command that stopped on an unmet hypothesis.
pub fn failure_report(command: &str, err: &CliError, opts: &RunOptions) -> Report {
    Report {
        command: command.into(),
        exit_code: err.exit_code(),
        settings: settings(opts, None, None, None),
        result: Body::Failure { message: err.to_string() },
    }
}
