//! Diagonal normal models and the execution of pairing plans.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::{DenseMatrix, SandboxError};
use crate::geometry::point_set_hausdorff;
use crate::matching::{plan_validate, PairingPlan};

/// Diagonal normal operator with distinct eigenvalues and multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalMatrixModel {
    eigenvalues: Vec<Complex64>,
    multiplicities: Vec<usize>,
}

impl NormalMatrixModel {
    pub fn new(eigenvalues: Vec<Complex64>, multiplicities: Vec<usize>) -> Result<Self, SandboxError> {
        if eigenvalues.is_empty() {
            return Err(SandboxError::Empty);
        }
        if eigenvalues.len() != multiplicities.len() || multiplicities.contains(&0) {
            return Err(SandboxError::Shape("one positive multiplicity per eigenvalue".into()));
        }
        for (i, a) in eigenvalues.iter().enumerate() {
            if eigenvalues[..i].contains(a) {
                return Err(SandboxError::DuplicateEigenvalue(*a));
            }
        }
        Ok(Self { eigenvalues, multiplicities })
    }

    pub fn eigenvalues(&self) -> &[Complex64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[usize] {
        &self.multiplicities
    }

    pub fn dimension(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    /// Diagonal entries with repetition.
    pub fn diagonal(&self) -> Vec<Complex64> {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&v, &k)| std::iter::repeat_n(v, k))
            .collect()
    }

    pub fn matrix(&self) -> DenseMatrix {
        DenseMatrix::diagonal(&self.diagonal())
    }
}

/// Diagonal model of a finite multiset of points; eigenvalues keep their
/// first-occurrence order.
pub fn realize_spectrum(points: &[Complex64]) -> Result<NormalMatrixModel, SandboxError> {
    let mut eigenvalues: Vec<Complex64> = Vec::new();
    let mut multiplicities = Vec::new();
    for &p in points {
        match eigenvalues.iter().position(|&e| e == p) {
            Some(i) => multiplicities[i] += 1,
            None => {
                eigenvalues.push(p);
                multiplicities.push(1);
            }
        }
    }
    NormalMatrixModel::new(eigenvalues, multiplicities)
}

/// Matrices realizing a plan: `‖M1 − U*M2U‖ = achieved`.
#[derive(Debug, Clone, PartialEq)]
pub struct Execution {
    pub m1: DenseMatrix,
    pub m2: DenseMatrix,
    pub u: DenseMatrix,
    pub achieved: f64,
    /// Diagonal entries of `M1` and `M2`, one per leaf fragment.
    pub diag1: Vec<Complex64>,
    pub diag2: Vec<Complex64>,
}

impl Execution {
    /// Diagonal models of `M1` and `M2` together with `U` rewritten in the
    /// model bases, so that `‖M1 − U*M2U‖` is unchanged.
    pub fn models(&self) -> Result<(NormalMatrixModel, NormalMatrixModel, DenseMatrix), SandboxError> {
        let m1 = realize_spectrum(&self.diag1)?;
        let m2 = realize_spectrum(&self.diag2)?;
        let p1 = grouping(&self.diag1, &m1);
        let p2 = grouping(&self.diag2, &m2);
        let u = &(&p2 * &self.u) * &p1.adjoint();
        Ok((m1, m2, u))
    }
}

/// Permutation `Π` with `Π diag(values) Π* = model.matrix()`.
fn grouping(values: &[Complex64], model: &NormalMatrixModel) -> DenseMatrix {
    let mut next: Vec<usize> = model
        .multiplicities()
        .iter()
        .scan(0, |acc, &k| {
            let s = *acc;
            *acc += k;
            Some(s)
        })
        .collect();
    let mut target = Vec::with_capacity(values.len());
    for v in values {
        let e = model.eigenvalues().iter().position(|x| x == v).expect("value is an eigenvalue");
        target.push(next[e]);
        next[e] += 1;
    }
    let one = Complex64::new(1.0, 0.0);
    DenseMatrix::from_fn(values.len(), values.len(), |i, j| if target[j] == i { one } else { Complex64::new(0.0, 0.0) })
}

/// Realize a valid plan with one basis vector per leaf fragment. Side-1
/// leaves are ordered by fragment id, side-2 leaves likewise, and `U` is the
/// permutation sending each side-1 leaf to its matched side-2 leaf.
pub fn execute_plan(p: &PairingPlan) -> Result<Execution, SandboxError> {
    let violations = plan_validate(p);
    if !violations.is_empty() {
        return Err(SandboxError::InvalidPlan(violations.iter().map(ToString::to_string).collect()));
    }
    let values = p.fragment_values();
    let mut pairs = p.pairs();
    pairs.sort_unstable();
    let mut side2: Vec<usize> = pairs.iter().map(|&(_, b)| b).collect();
    side2.sort_unstable();
    let pos2: BTreeMap<usize, usize> = side2.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let n = pairs.len();

    let diag1: Vec<Complex64> = pairs.iter().map(|(a, _)| values[a].1).collect();
    let diag2: Vec<Complex64> = side2.iter().map(|b| values[b].1).collect();
    let sigma: Vec<usize> = pairs.iter().map(|(_, b)| pos2[b]).collect();
    let u = DenseMatrix::from_fn(n, n, |i, j| if sigma[j] == i { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) });
    // U*M2U is diagonal with entry diag2[sigma(i)] at (i, i).
    let achieved = (0..n).map(|i| (diag1[i] - diag2[sigma[i]]).norm()).fold(0.0, f64::max);
    if achieved != p.cost {
        return Err(SandboxError::AchievedMismatch { achieved, cost: p.cost });
    }
    Ok(Execution { m1: DenseMatrix::diagonal(&diag1), m2: DenseMatrix::diagonal(&diag2), u, achieved, diag1, diag2 })
}

/// Whether `‖M1 − U*M2U‖ ≥ d_H(σ(M1), σ(M2)) − tol`.
pub fn lower_bound_check(m1: &NormalMatrixModel, m2: &NormalMatrixModel, u: &DenseMatrix, tol: f64) -> Result<bool, SandboxError> {
    let n = m1.dimension();
    if m2.dimension() != n || u.rows() != n || u.cols() != n {
        return Err(SandboxError::Shape(format!("dimensions {n}, {} and {}x{}", m2.dimension(), u.rows(), u.cols())));
    }
    let unitary_tol = tol.max(1e-10) * n as f64;
    if !u.is_unitary(unitary_tol) {
        let defect = (&(&u.adjoint() * u) - &DenseMatrix::identity(n)).norm();
        return Err(SandboxError::NotUnitary(defect));
    }
    let diff = &m1.matrix() - &(&(&u.adjoint() * &m2.matrix()) * u);
    Ok(diff.norm() >= point_set_hausdorff(m1.eigenvalues(), m2.eigenvalues()) - tol)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeResult {
    /// Least index from which every model meets the disk.
    From(usize),
    NoIntersection,
}

/// For a sequence whose last model stands in for the norm limit: the least
/// `k` such that every model from `k` on has an eigenvalue in the open disk.
pub fn semicontinuity_probe(sequence: &[NormalMatrixModel], center: Complex64, radius: f64) -> ProbeResult {
    let meets = |m: &NormalMatrixModel| m.eigenvalues().iter().any(|&z| (z - center).norm() < radius);
    match sequence.last() {
        Some(limit) if meets(limit) => {
            let misses = sequence.iter().rposition(|m| !meets(m));
            ProbeResult::From(misses.map_or(0, |i| i + 1))
        }
        _ => ProbeResult::NoIntersection,
    }
}
