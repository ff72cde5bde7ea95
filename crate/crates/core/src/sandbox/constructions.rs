//! Matrix forms of the constructive steps: conjugating nearby projections,
//! removing strictly upper blocks by similarity, and the contour bound for
//! the holomorphic functional calculus.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{DenseMatrix, SandboxError};

/// Tolerance for the projection and invertibility checks.
pub const STRUCTURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Conjugation {
    pub w: DenseMatrix,
    /// `‖WPW* − Q‖`.
    pub err: f64,
    /// `‖Q − VPV⁻¹‖`.
    pub gap: f64,
}

fn require_square(ms: &[(&str, &DenseMatrix)]) -> Result<usize, SandboxError> {
    let n = ms[0].1.rows();
    for (name, m) in ms {
        if m.rows() != n || m.cols() != n {
            return Err(SandboxError::Shape(format!("{name} must be {n}x{n}, got {}x{}", m.rows(), m.cols())));
        }
    }
    Ok(n)
}

/// Unitary `W` with `WPW* = Q`, built from an invertible `V` that nearly
/// conjugates `P` onto `Q` (`‖Q − VPV⁻¹‖ < 1/2`).
pub fn projection_conjugator(p: &DenseMatrix, q: &DenseMatrix, v: &DenseMatrix) -> Result<Conjugation, SandboxError> {
    let n = require_square(&[("P", p), ("Q", q), ("V", v)])?;
    for (name, m) in [("P", p), ("Q", q)] {
        if !m.is_projection(STRUCTURE_TOL) {
            return Err(SandboxError::NotProjection(name));
        }
    }
    let id = DenseMatrix::identity(n);
    let v_inv = v.inverse()?;
    let p0 = &(v * p) * &v_inv;
    let gap = (q - &p0).norm();
    if gap >= 0.5 {
        return Err(SandboxError::GapTooLarge(gap));
    }
    // ZQ = P0Z holds for any idempotent P0, so X = Z⁻¹V satisfies XPX⁻¹ = Q
    // and the unitary polar factor of X conjugates P onto Q.
    let z = &(&p0 * q) + &(&(&id - &p0) * &(&id - q));
    let x = &z.inverse()? * v;
    let w = x.polar_unitary(STRUCTURE_TOL)?;
    let err = (&(&(&w * p) * &w.adjoint()) - q).norm();
    Ok(Conjugation { w, err, gap })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Similarity {
    pub t: DenseMatrix,
    pub t_inv: DenseMatrix,
    /// `A = D + strict upper part`.
    pub a: DenseMatrix,
    pub d: DenseMatrix,
    /// `‖TAT⁻¹ − D‖`.
    pub err: f64,
}

/// Similarity taking `D + X` to `D`, where `D = diag(λ_j I_{k_j})` and `X` is
/// strictly block upper triangular. Blocks are cleared top to bottom; each
/// stage uses `Y = X(λ(I−P) − Z)⁻¹` and `T = I + Y`, `T⁻¹ = I − Y`.
pub fn triangular_similarity(diagonal: &[(Complex64, usize)], upper: &DenseMatrix) -> Result<Similarity, SandboxError> {
    if diagonal.is_empty() || diagonal.iter().any(|&(_, k)| k == 0) {
        return Err(SandboxError::Shape("blocks must be non-empty".into()));
    }
    for (i, (a, _)) in diagonal.iter().enumerate() {
        if diagonal[..i].iter().any(|(b, _)| b == a) {
            return Err(SandboxError::RepeatedScalar(*a));
        }
    }
    let n: usize = diagonal.iter().map(|&(_, k)| k).sum();
    if upper.rows() != n || upper.cols() != n {
        return Err(SandboxError::Shape(format!("upper part must be {n}x{n}")));
    }
    let starts: Vec<usize> = diagonal
        .iter()
        .scan(0, |acc, &(_, k)| {
            let s = *acc;
            *acc += k;
            Some(s)
        })
        .collect();
    let block_of = |i: usize| starts.iter().rposition(|&s| s <= i).expect("index in range");
    for i in 0..n {
        for j in 0..n {
            if block_of(i) >= block_of(j) && upper.get(i, j) != Complex64::new(0.0, 0.0) {
                return Err(SandboxError::Shape(format!("entry ({i}, {j}) is not strictly block upper triangular")));
            }
        }
    }

    let lambdas: Vec<Complex64> = (0..n).map(|i| diagonal[block_of(i)].0).collect();
    let d = DenseMatrix::diagonal(&lambdas);
    let a = &d + upper;
    let mut current = a.clone();
    let mut t = DenseMatrix::identity(n);
    let mut t_inv = DenseMatrix::identity(n);
    for (b, &(lambda, k)) in diagonal.iter().enumerate().take(diagonal.len() - 1) {
        let s = starts[b];
        let rest = s + k;
        let m = n - rest;
        // X: rows of block b, columns after it. Z: trailing corner.
        let x = DenseMatrix::from_fn(k, m, |i, j| current.get(s + i, rest + j));
        let z = DenseMatrix::from_fn(m, m, |i, j| current.get(rest + i, rest + j));
        let shifted = &DenseMatrix::identity(m).scale(lambda) - &z;
        let y_small = &x * &shifted.inverse()?;
        let y = DenseMatrix::from_fn(n, n, |i, j| {
            if (s..rest).contains(&i) && j >= rest {
                y_small.get(i - s, j - rest)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let id = DenseMatrix::identity(n);
        let (stage, stage_inv) = (&id + &y, &id - &y);
        current = &(&stage * &current) * &stage_inv;
        t = &stage * &t;
        t_inv = &t_inv * &stage_inv;
    }
    let err = (&(&(&t * &a) * &t_inv) - &d).norm();
    Ok(Similarity { t, t_inv, a, d, err })
}

/// Closed polygon, vertices in order; the last edge returns to the first.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon(pub Vec<Complex64>);

impl Polygon {
    pub fn edges(&self) -> impl Iterator<Item = (Complex64, Complex64)> + '_ {
        let v = &self.0;
        (0..v.len()).map(move |i| (v[i], v[(i + 1) % v.len()]))
    }

    pub fn length(&self) -> f64 {
        self.edges().map(|(a, b)| (b - a).norm()).sum()
    }

    /// Winding number about `z` (assumes `z` is off the polygon).
    pub fn winding(&self, z: Complex64) -> i64 {
        let total: f64 = self.edges().map(|(a, b)| ((b - z) / (a - z)).arg()).sum();
        (total / (2.0 * PI)).round() as i64
    }

    pub fn distance(&self, z: Complex64) -> f64 {
        self.edges()
            .map(|(a, b)| {
                let d = b - a;
                let t = if d.norm_sqr() == 0.0 { 0.0 } else { (((z - a) * d.conj()).re / d.norm_sqr()).clamp(0.0, 1.0) };
                (z - (a + d * t)).norm()
            })
            .fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticBound {
    /// `‖f(A) − V f(B) V⁻¹‖` by trapezoid quadrature on the contour.
    pub lhs: f64,
    /// `(len/2π)·‖A − VBV⁻¹‖·sup |f|·‖(z−A)⁻¹‖·‖(z−VBV⁻¹)⁻¹‖` over the nodes.
    pub rhs: f64,
    /// A-posteriori trapezoid error estimate for `lhs`.
    pub quadrature_bound: f64,
    pub contour_length: f64,
    pub nodes: usize,
}

impl AnalyticBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + self.quadrature_bound
    }
}

/// Contour form of the functional-calculus perturbation bound for normal
/// `A`, `B` and invertible `V`, with `nodes_per_edge` trapezoid intervals.
pub fn analytic_calculus_bound(
    a: &DenseMatrix,
    b: &DenseMatrix,
    v: &DenseMatrix,
    f: impl Fn(Complex64) -> Complex64,
    contour: &Polygon,
    nodes_per_edge: usize,
) -> Result<AnalyticBound, SandboxError> {
    let n = require_square(&[("A", a), ("B", b), ("V", v)])?;
    if contour.0.len() < 3 || nodes_per_edge < 2 {
        return Err(SandboxError::BadContour("need at least 3 vertices and 2 intervals per edge".into()));
    }
    for (name, m) in [("A", a), ("B", b)] {
        if !m.is_normal(STRUCTURE_TOL) {
            return Err(SandboxError::NotNormal(name));
        }
    }
    let vb = &(v * b) * &v.inverse()?;
    let mut spectrum = a.eigenvalues()?;
    spectrum.extend(b.eigenvalues()?);
    spectrum.extend(vb.eigenvalues()?);
    for &z in &spectrum {
        let d = contour.distance(z);
        if d <= STRUCTURE_TOL {
            return Err(SandboxError::ContourHitsSpectrum(z));
        }
        if contour.winding(z) != 1 {
            return Err(SandboxError::BadContour(format!("winding number {} about eigenvalue {z}", contour.winding(z))));
        }
    }

    let id = DenseMatrix::identity(n);
    let diff_norm = (a - &vb).norm();
    let resolvent = |m: &DenseMatrix, z: Complex64| (&id.scale(z) - m).inverse();
    let mut integral = DenseMatrix::zeros(n, n);
    let mut sup = 0.0f64;
    let mut quad = 0.0f64;
    let mut nodes = 0usize;
    for (p, q) in contour.edges() {
        let len = (q - p).norm();
        let h = (q - p) / nodes_per_edge as f64;
        let mut samples = Vec::with_capacity(nodes_per_edge + 1);
        for k in 0..=nodes_per_edge {
            let z = p + h * k as f64;
            let (ra, rb) = (resolvent(a, z)?, resolvent(&vb, z)?);
            let g = (&ra - &rb).scale(f(z));
            sup = sup.max(f(z).norm() * ra.norm() * rb.norm());
            samples.push(g);
            nodes += 1;
        }
        for (k, g) in samples.iter().enumerate() {
            let w = if k == 0 || k == nodes_per_edge { h * 0.5 } else { h };
            integral = &integral + &g.scale(w);
        }
        let second = samples
            .windows(3)
            .map(|s| (&(&s[0] - &s[1].scale(Complex64::new(2.0, 0.0))) + &s[2]).norm())
            .fold(0.0, f64::max);
        quad += len / 12.0 * second;
    }
    let lhs = integral.norm() / (2.0 * PI);
    let length = contour.length();
    Ok(AnalyticBound {
        lhs,
        rhs: length / (2.0 * PI) * diff_norm * sup,
        quadrature_bound: quad / (2.0 * PI),
        contour_length: length,
        nodes,
    })
}
