//! Is a binary k-sparse `x̄` the unique optimum of
//! `min eᵀx s.t. Ax = b, 0 ≤ x ≤ 1`?
//!
//! Three independent deciders:
//!
//! * [`is_unique_solution`]: `x̄` is unique iff `conv({Aⱼ : x̄ⱼ = 0} ∪ {0})`
//!   and `conv({Aⱼ : x̄ⱼ = 1})` are disjoint. One feasibility LP decides this
//!   and the answer comes with a re-checkable proof object: a strictly
//!   separating hyperplane, or convex weights of a common point.
//! * [`mangasarian_unique`]: the generic test for `min cᵀx s.t. Gx = h,
//!   Px ≥ q` — `x̄` is unique iff no `z ≠ 0` has `Gz = 0`, `P_eq z ≥ 0`,
//!   `cᵀz ≤ 0`, where `P_eq` are the rows tight at `x̄`.
//! * [`optimal_face_unique`]: solve the program, then minimize and maximize
//!   every coordinate over the optimal face.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, DenseMatrix};
use crate::lp::{solve_lp, LpOutcome, LpProblem, SolverSettings};
use crate::recovery::{l1_box_problem, SparseBinarySignal};

/// Split of the coordinates into zeros (`j0`) and ones (`j1`) of `x̄`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    pub j0: Vec<usize>,
    pub j1: Vec<usize>,
}

impl Partition {
    pub fn from_signal(x: &SparseBinarySignal) -> Self {
        Self { j0: x.zeros(), j1: x.support().to_vec() }
    }
}

/// Hyperplane `{p : w·p = γ}` with every side-0 point at most `γ − margin`
/// and every side-1 point at least `γ + margin`. `w` has max-norm 1.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparationCertificate {
    pub normal: Vec<f64>,
    pub offset: f64,
    pub margin: f64,
}

impl SeparationCertificate {
    /// Re-evaluates the certificate against the points; `tol` absorbs
    /// round-off in the dot products.
    pub fn verify(&self, points: &DenseMatrix, side0: &[usize], with_origin: bool, side1: &[usize], tol: f64) -> bool {
        if self.margin <= 0.0 || self.normal.len() != points.rows() {
            return false;
        }
        let w = &self.normal;
        let below = |v: f64| v <= self.offset - self.margin + tol;
        let above = |v: f64| v >= self.offset + self.margin - tol;
        (!with_origin || below(0.0))
            && side0.iter().all(|&j| below(dot(w, &points.column(j))))
            && side1.iter().all(|&j| above(dot(w, &points.column(j))))
    }
}

/// Convex weights on both sides that produce the same point.
#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionWitness {
    pub j0: Vec<usize>,
    pub alpha0: Vec<f64>,
    /// Weight on the origin, zero when the origin is not part of side 0.
    pub alpha_origin: f64,
    pub j1: Vec<usize>,
    pub alpha1: Vec<f64>,
}

impl IntersectionWitness {
    /// `‖Σ α0ⱼAⱼ − Σ α1ⱼAⱼ‖∞`.
    pub fn residual(&self, points: &DenseMatrix) -> f64 {
        let mut diff = vec![0.0; points.rows()];
        for (&j, &a) in self.j0.iter().zip(&self.alpha0) {
            for (d, v) in diff.iter_mut().zip(points.column(j)) {
                *d += a * v;
            }
        }
        for (&j, &a) in self.j1.iter().zip(&self.alpha1) {
            for (d, v) in diff.iter_mut().zip(points.column(j)) {
                *d -= a * v;
            }
        }
        norm_inf(&diff)
    }

    pub fn verify(&self, points: &DenseMatrix, tol: f64) -> bool {
        let nonneg = self.alpha0.iter().chain(&self.alpha1).all(|&a| a >= 0.0) && self.alpha_origin >= 0.0;
        let s0: f64 = self.alpha0.iter().sum::<f64>() + self.alpha_origin;
        let s1: f64 = self.alpha1.iter().sum();
        nonneg && (s0 - 1.0).abs() <= tol && (s1 - 1.0).abs() <= tol && self.residual(points) <= tol
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum HullRelation {
    Disjoint(SeparationCertificate),
    Intersecting(IntersectionWitness),
}

/// Decides whether `conv(side0 ∪ {0 if with_origin})` and `conv(side1)`
/// intersect; `points` holds one point per column.
///
/// The system `Σ α0ⱼAⱼ − Σ α1ⱼAⱼ = 0, Σ α0 = 1, Σ α1 = 1, α ≥ 0` is solved
/// as an LP. When it is infeasible the Farkas vector `(w, s0, s1)` satisfies
/// `w·p ≤ −s0 < s1 ≤ w·q` for `p` on side 0 and `q` on side 1, so `w` is a
/// separating normal; offset and margin are recomputed from the points.
/// Touching hulls come out as `Intersecting`.
pub fn hull_relation(
    points: &DenseMatrix,
    side0: &[usize],
    with_origin: bool,
    side1: &[usize],
    settings: &SolverSettings,
) -> Result<HullRelation> {
    let m = points.rows();
    let n = points.cols();
    if side1.is_empty() || (side0.is_empty() && !with_origin) {
        return Err(Error::InvalidInput("both sides of a hull test need at least one point".into()));
    }
    if let Some(&j) = side0.iter().chain(side1).find(|&&j| j >= n) {
        return Err(Error::InvalidInput(format!("point index {j} out of range for {n} points")));
    }

    let n0 = side0.len() + usize::from(with_origin);
    let nv = n0 + side1.len();
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(nv);
    for &j in side0 {
        let mut col = points.column(j);
        col.extend([1.0, 0.0]);
        columns.push(col);
    }
    if with_origin {
        let mut col = vec![0.0; m];
        col.extend([1.0, 0.0]);
        columns.push(col);
    }
    for &j in side1 {
        let mut col: Vec<f64> = points.column(j).iter().map(|v| -v).collect();
        col.extend([0.0, 1.0]);
        columns.push(col);
    }
    let mut rhs = vec![0.0; m];
    rhs.extend([1.0, 1.0]);
    let problem = LpProblem::new(
        vec![0.0; nv],
        DenseMatrix::from_columns(&columns)?,
        rhs,
        vec![0.0; nv],
        vec![f64::INFINITY; nv],
    )?;

    match solve_lp(&problem, settings)? {
        LpOutcome::Optimal { solution, .. } => {
            let normalize = |v: &[f64]| {
                let v: Vec<f64> = v.iter().map(|a| a.max(0.0)).collect();
                let s: f64 = v.iter().sum();
                v.into_iter().map(|a| a / s).collect::<Vec<f64>>()
            };
            let side0_w = normalize(&solution[..n0]);
            let (alpha0, alpha_origin) =
                if with_origin { (side0_w[..side0.len()].to_vec(), side0_w[side0.len()]) } else { (side0_w, 0.0) };
            Ok(HullRelation::Intersecting(IntersectionWitness {
                j0: side0.to_vec(),
                alpha0,
                alpha_origin,
                j1: side1.to_vec(),
                alpha1: normalize(&solution[n0..]),
            }))
        }
        LpOutcome::Infeasible { certificate } => {
            let scale = norm_inf(&certificate[..m]);
            if scale.is_nan() || scale <= 0.0 {
                return Err(Error::SolverInconsistency("infeasibility certificate has a zero normal".into()));
            }
            let normal: Vec<f64> = certificate[..m].iter().map(|v| v / scale).collect();
            let mut hi0 = if with_origin { 0.0 } else { f64::NEG_INFINITY };
            for &j in side0 {
                hi0 = f64::max(hi0, dot(&normal, &points.column(j)));
            }
            let lo1 = side1.iter().map(|&j| dot(&normal, &points.column(j))).fold(f64::INFINITY, f64::min);
            let gap = lo1 - hi0;
            if gap.is_nan() || gap <= 0.0 {
                return Err(Error::SolverInconsistency(format!(
                    "certificate normal does not separate the hulls (gap {gap:e})"
                )));
            }
            Ok(HullRelation::Disjoint(SeparationCertificate { normal, offset: 0.5 * (hi0 + lo1), margin: 0.5 * gap }))
        }
        LpOutcome::Unbounded => Err(Error::SolverInconsistency("feasibility program reported unbounded".into())),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Unique(SeparationCertificate),
    NotUnique(IntersectionWitness),
}

impl Verdict {
    pub fn is_unique(&self) -> bool {
        matches!(self, Verdict::Unique(_))
    }
}

/// Hull-disjointness test for `x̄ = truth`.
pub fn is_unique_solution(a: &DenseMatrix, truth: &SparseBinarySignal, settings: &SolverSettings) -> Result<Verdict> {
    if truth.n() != a.cols() {
        return Err(Error::Dimension(format!("signal length {} vs {} columns", truth.n(), a.cols())));
    }
    if truth.k() == 0 {
        return Err(Error::InvalidInput("uniqueness test needs k ≥ 1".into()));
    }
    let part = Partition::from_signal(truth);
    Ok(match hull_relation(a, &part.j0, true, &part.j1, settings)? {
        HullRelation::Disjoint(c) => Verdict::Unique(c),
        HullRelation::Intersecting(w) => Verdict::NotUnique(w),
    })
}

/// `min cᵀx s.t. Gx = h, Px ≥ q`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneralLp {
    pub g: DenseMatrix,
    pub h: Vec<f64>,
    pub p: DenseMatrix,
    pub q: Vec<f64>,
    pub c: Vec<f64>,
}

impl GeneralLp {
    /// `min eᵀx s.t. Ax = b, x ≥ 0, −x ≥ −e`.
    pub fn l1_box(a: &DenseMatrix, b: &[f64]) -> Result<Self> {
        let n = a.cols();
        let p = DenseMatrix::identity(n).vstack(&DenseMatrix::identity(n).scaled(-1.0))?;
        let mut q = vec![0.0; n];
        q.extend(std::iter::repeat_n(-1.0, n));
        let lp = Self { g: a.clone(), h: b.to_vec(), p, q, c: vec![1.0; n] };
        lp.check_dims()?;
        Ok(lp)
    }

    fn check_dims(&self) -> Result<()> {
        let nv = self.c.len();
        if self.g.cols() != nv || self.p.cols() != nv || self.g.rows() != self.h.len() || self.p.rows() != self.q.len()
        {
            return Err(Error::Dimension("general LP blocks disagree in size".into()));
        }
        Ok(())
    }
}

/// Decides uniqueness of `x_bar` for `lp` by the no-improving-direction test.
///
/// The homogeneous cone `{z : Gz = 0, P_eq z ≥ 0, cᵀz ≤ 0}` is nonzero iff
/// some coordinate can be pushed off zero, which 2·nv box-normalized LPs
/// decide (maximize `zⱼ ≤ 1`, minimize `zⱼ ≥ −1`).
pub fn mangasarian_unique(lp: &GeneralLp, x_bar: &[f64], settings: &SolverSettings) -> Result<bool> {
    lp.check_dims()?;
    let nv = lp.c.len();
    if x_bar.len() != nv {
        return Err(Error::Dimension(format!("x̄ has length {} but the program has {nv} variables", x_bar.len())));
    }
    let tol = settings.feas_tol;
    let gx = lp.g.mul_vec(x_bar);
    let eq_viol = gx.iter().zip(&lp.h).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if eq_viol > tol * (1.0 + norm_inf(&lp.h)) {
        return Err(Error::InvalidInput(format!("x̄ violates Gx = h by {eq_viol:e}")));
    }
    let px = lp.p.mul_vec(x_bar);
    if px.iter().zip(&lp.q).any(|(a, b)| a < &(b - tol)) {
        return Err(Error::InvalidInput("x̄ violates Px ≥ q".into()));
    }
    let tight: Vec<usize> = (0..lp.q.len()).filter(|&i| (px[i] - lp.q[i]).abs() <= tol).collect();

    // variables (z, s, t): Gz = 0, P_eq z − s = 0, cᵀz + t = 0
    let ns = tight.len();
    let width = nv + ns + 1;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..lp.g.rows() {
        let mut r = lp.g.row(i).to_vec();
        r.resize(width, 0.0);
        rows.push(r);
    }
    for (t, &i) in tight.iter().enumerate() {
        let mut r = lp.p.row(i).to_vec();
        r.resize(width, 0.0);
        r[nv + t] = -1.0;
        rows.push(r);
    }
    let mut r = lp.c.clone();
    r.resize(width, 0.0);
    r[width - 1] = 1.0;
    rows.push(r);
    let matrix = DenseMatrix::from_rows(&rows)?;
    let rhs = vec![0.0; rows.len()];

    for j in 0..nv {
        for dir in [1.0, -1.0] {
            let mut lower = vec![f64::NEG_INFINITY; nv];
            let mut upper = vec![f64::INFINITY; nv];
            if dir > 0.0 {
                upper[j] = 1.0;
            } else {
                lower[j] = -1.0;
            }
            lower.resize(width, 0.0);
            upper.resize(width, f64::INFINITY);
            let mut objective = vec![0.0; width];
            objective[j] = -dir;
            let problem = LpProblem::new(objective, matrix.clone(), rhs.clone(), lower, upper)?;
            match solve_lp(&problem, settings)? {
                LpOutcome::Optimal { objective, .. } => {
                    if objective.abs() > tol {
                        return Ok(false);
                    }
                }
                other => {
                    return Err(Error::SolverInconsistency(format!(
                        "direction probe should be feasible and bounded, got {:?}",
                        other.status()
                    )))
                }
            }
        }
    }
    Ok(true)
}

/// Spread tolerance for [`optimal_face_unique`].
pub const FACE_TOL: f64 = 1e-7;

/// Uniqueness by measuring the optimal face coordinate by coordinate.
///
/// Says nothing about *which* point is optimal; see [`optimal_face_is`].
pub fn optimal_face_unique(a: &DenseMatrix, b: &[f64], settings: &SolverSettings) -> Result<bool> {
    Ok(optimal_face_point(a, b, settings)?.is_some())
}

/// True iff the optimal face of the ℓ1 box program for `b = A·x̄` is exactly
/// `{x̄}`, the same question the hull and direction tests answer.
pub fn optimal_face_is(a: &DenseMatrix, x_bar: &[f64], settings: &SolverSettings) -> Result<bool> {
    if x_bar.len() != a.cols() {
        return Err(Error::Dimension(format!("x̄ has {} entries, A has {} columns", x_bar.len(), a.cols())));
    }
    Ok(optimal_face_point(a, &a.mul_vec(x_bar), settings)?
        .is_some_and(|p| p.iter().zip(x_bar).all(|(u, v)| (u - v).abs() <= FACE_TOL)))
}

/// The single point of the optimal face, or `None` when some coordinate
/// spreads by more than [`FACE_TOL`].
pub fn optimal_face_point(a: &DenseMatrix, b: &[f64], settings: &SolverSettings) -> Result<Option<Vec<f64>>> {
    let base = l1_box_problem(a, b)?;
    let value = match solve_lp(&base, settings)? {
        LpOutcome::Optimal { objective, .. } => objective,
        other => {
            return Err(Error::InvalidInput(format!("program is not solvable ({:?})", other.status())));
        }
    };
    let n = a.cols();
    let matrix = a.vstack(&DenseMatrix::from_rows(&[vec![1.0; n]])?)?;
    let mut rhs = b.to_vec();
    rhs.push(value);
    let mut point = Vec::with_capacity(n);
    for j in 0..n {
        let mut extremes = [0.0; 2];
        for (slot, sign) in [1.0, -1.0].into_iter().enumerate() {
            let mut objective = vec![0.0; n];
            objective[j] = sign;
            let problem = LpProblem::new(objective, matrix.clone(), rhs.clone(), vec![0.0; n], vec![1.0; n])?;
            extremes[slot] = match solve_lp(&problem, settings)? {
                LpOutcome::Optimal { solution, .. } => solution[j],
                other => {
                    return Err(Error::SolverInconsistency(format!("optimal face probe returned {:?}", other.status())))
                }
            };
        }
        if extremes[1] - extremes[0] > FACE_TOL {
            return Ok(None);
        }
        point.push(0.5 * (extremes[0] + extremes[1]));
    }
    Ok(Some(point))
}
