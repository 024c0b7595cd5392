//! LP relaxations for recovering a binary k-sparse `x̄` from `b = A·x̄`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{lu_solve_with_tol, norm_inf, DenseMatrix};
use crate::lp::{solve_lp, LpOutcome, LpProblem, LpStatus, SolverSettings};

/// A vector in {0,1}ⁿ given by the positions of its ones.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SparseBinarySignal {
    n: usize,
    support: Vec<usize>,
}

impl SparseBinarySignal {
    /// Indices may come in any order; they are stored sorted.
    pub fn new(n: usize, mut support: Vec<usize>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("signal length must be positive".into()));
        }
        support.sort_unstable();
        if let Some(&bad) = support.iter().find(|&&j| j >= n) {
            return Err(Error::InvalidInput(format!("support index {bad} out of range for n = {n}")));
        }
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("support indices must be distinct".into()));
        }
        Ok(Self { n, support })
    }

    /// Reads a 0/1 vector; entries must be exactly 0 or 1.
    pub fn from_vector(x: &[f64]) -> Result<Self> {
        let mut support = Vec::new();
        for (j, &v) in x.iter().enumerate() {
            if v == 1.0 {
                support.push(j);
            } else if v != 0.0 {
                return Err(Error::InvalidInput(format!("entry {j} = {v} is not binary")));
            }
        }
        Self::new(x.len(), support)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn contains(&self, j: usize) -> bool {
        self.support.binary_search(&j).is_ok()
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for &j in &self.support {
            x[j] = 1.0;
        }
        x
    }

    /// The ±1 image `ȳ = e − 2x̄`.
    pub fn to_pm_one(&self) -> Vec<f64> {
        self.to_vector().iter().map(|x| 1.0 - 2.0 * x).collect()
    }

    pub fn complement(&self) -> Self {
        let support = (0..self.n).filter(|&j| !self.contains(j)).collect();
        Self { n: self.n, support }
    }

    /// Indices of the zero entries.
    pub fn zeros(&self) -> Vec<usize> {
        self.complement().support
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Formulation {
    /// `min δ s.t. A·y = A·e − 2b, −δe ≤ y ≤ δe`, then `x = (e − y)/2`.
    #[serde(rename = "linf")]
    LinfL2,
    /// `min eᵀx s.t. A·x = b, 0 ≤ x ≤ 1`.
    #[serde(rename = "l1box")]
    L1Box,
    /// `min 0 s.t. A·x = b, 0 ≤ x ≤ 1`.
    #[serde(rename = "boxfeas")]
    BoxFeas,
    /// `min eᵀx s.t. A·x = b, x ≥ 0`.
    #[serde(rename = "nonneg")]
    NonnegL1,
    /// `x = A⁻¹·b` for square A.
    #[serde(rename = "square")]
    SquareInverse,
}

impl Formulation {
    pub fn as_str(self) -> &'static str {
        match self {
            Formulation::LinfL2 => "linf",
            Formulation::L1Box => "l1box",
            Formulation::BoxFeas => "boxfeas",
            Formulation::NonnegL1 => "nonneg",
            Formulation::SquareInverse => "square",
        }
    }
}

impl fmt::Display for Formulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Formulation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linf" => Ok(Formulation::LinfL2),
            "l1box" => Ok(Formulation::L1Box),
            "boxfeas" => Ok(Formulation::BoxFeas),
            "nonneg" => Ok(Formulation::NonnegL1),
            "square" => Ok(Formulation::SquareInverse),
            other => Err(Error::InvalidInput(format!("unknown formulation `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecoveryResult {
    pub formulation: Formulation,
    /// Empty unless `status` is `Optimal`.
    pub x_hat: Vec<f64>,
    /// Optimal ℓ∞ radius; present only for [`Formulation::LinfL2`].
    pub auxiliary: Option<f64>,
    pub objective: Option<f64>,
    pub status: LpStatus,
}

impl RecoveryResult {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }

    fn from_outcome(formulation: Formulation, outcome: LpOutcome) -> Self {
        let status = outcome.status();
        match outcome {
            LpOutcome::Optimal { solution, objective } => {
                Self { formulation, x_hat: solution, auxiliary: None, objective: Some(objective), status }
            }
            _ => Self { formulation, x_hat: Vec::new(), auxiliary: None, objective: None, status },
        }
    }
}

fn check_dims(a: &DenseMatrix, b: &[f64]) -> Result<()> {
    if a.rows() != b.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but right-hand side has length {}",
            a.rows(),
            b.len()
        )));
    }
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("non-finite right-hand side".into()));
    }
    Ok(())
}

/// LP data for `min eᵀx s.t. A·x = b, 0 ≤ x ≤ 1`.
pub fn l1_box_problem(a: &DenseMatrix, b: &[f64]) -> Result<LpProblem> {
    check_dims(a, b)?;
    let n = a.cols();
    LpProblem::new(vec![1.0; n], a.clone(), b.to_vec(), vec![0.0; n], vec![1.0; n])
}

pub fn recover_l1_box(a: &DenseMatrix, b: &[f64], settings: &SolverSettings) -> Result<RecoveryResult> {
    let problem = l1_box_problem(a, b)?;
    Ok(RecoveryResult::from_outcome(Formulation::L1Box, solve_lp(&problem, settings)?))
}

pub fn recover_nonneg(a: &DenseMatrix, b: &[f64], settings: &SolverSettings) -> Result<RecoveryResult> {
    check_dims(a, b)?;
    let n = a.cols();
    let problem = LpProblem::new(vec![1.0; n], a.clone(), b.to_vec(), vec![0.0; n], vec![f64::INFINITY; n])?;
    let outcome = solve_lp(&problem, settings)?;
    if outcome.status() == LpStatus::Unbounded {
        return Err(Error::SolverInconsistency("nonnegative ℓ1 program reported unbounded".into()));
    }
    Ok(RecoveryResult::from_outcome(Formulation::NonnegL1, outcome))
}

pub fn feasibility_box(a: &DenseMatrix, b: &[f64], settings: &SolverSettings) -> Result<RecoveryResult> {
    check_dims(a, b)?;
    let n = a.cols();
    let problem = LpProblem::new(vec![0.0; n], a.clone(), b.to_vec(), vec![0.0; n], vec![1.0; n])?;
    Ok(RecoveryResult::from_outcome(Formulation::BoxFeas, solve_lp(&problem, settings)?))
}

/// LP data for the ℓ∞ program over the packed variables `(y, δ, s, t)`:
///
/// ```text
///     min δ  s.t.  A·y = d,  yⱼ − δ + sⱼ = 0,  −yⱼ − δ + tⱼ = 0,
///                  y free,  δ, s, t ≥ 0
/// ```
pub fn linf_problem(a: &DenseMatrix, d: &[f64]) -> Result<LpProblem> {
    check_dims(a, d)?;
    let (m, n) = (a.rows(), a.cols());
    let nv = 3 * n + 1;
    let p = m + 2 * n;
    let delta = n;
    let mut data = vec![0.0; p * nv];
    for i in 0..m {
        data[i * nv..i * nv + n].copy_from_slice(a.row(i));
    }
    for j in 0..n {
        let r = m + 2 * j;
        data[r * nv + j] = 1.0;
        data[r * nv + delta] = -1.0;
        data[r * nv + n + 1 + j] = 1.0;
        let r = r + 1;
        data[r * nv + j] = -1.0;
        data[r * nv + delta] = -1.0;
        data[r * nv + 2 * n + 1 + j] = 1.0;
    }
    let mut objective = vec![0.0; nv];
    objective[delta] = 1.0;
    let mut rhs = d.to_vec();
    rhs.resize(p, 0.0);
    let mut lower = vec![0.0; nv];
    lower[..n].fill(f64::NEG_INFINITY);
    LpProblem::new(objective, DenseMatrix::from_row_major(p, nv, data)?, rhs, lower, vec![f64::INFINITY; nv])
}

/// Recovers through the ±1 program: `d = A·e − 2b`, minimize `‖y‖∞` subject
/// to `A·y = d`, and report `x̂ = (e − ŷ)/2` with `δ̂` as the auxiliary value.
pub fn recover_linf(a: &DenseMatrix, b: &[f64], settings: &SolverSettings) -> Result<RecoveryResult> {
    check_dims(a, b)?;
    let n = a.cols();
    let ae = a.mul_vec(&vec![1.0; n]);
    let d: Vec<f64> = ae.iter().zip(b).map(|(s, bi)| s - 2.0 * bi).collect();
    let problem = linf_problem(a, &d)?;
    let outcome = solve_lp(&problem, settings)?;
    let status = outcome.status();
    match outcome {
        LpOutcome::Optimal { solution, objective } => {
            let x_hat = solution[..n].iter().map(|y| (1.0 - y) / 2.0).collect();
            Ok(RecoveryResult {
                formulation: Formulation::LinfL2,
                x_hat,
                auxiliary: Some(solution[n].max(0.0)),
                objective: Some(objective),
                status,
            })
        }
        LpOutcome::Unbounded => Err(Error::SolverInconsistency("ℓ∞ program reported unbounded".into())),
        LpOutcome::Infeasible { .. } => Ok(RecoveryResult {
            formulation: Formulation::LinfL2,
            x_hat: Vec::new(),
            auxiliary: None,
            objective: None,
            status,
        }),
    }
}

pub fn recover_square(a: &DenseMatrix, b: &[f64], settings: &SolverSettings) -> Result<RecoveryResult> {
    check_dims(a, b)?;
    if !a.is_square() {
        return Err(Error::Dimension(format!("square recovery needs m = n, got {}x{}", a.rows(), a.cols())));
    }
    let x_hat = lu_solve_with_tol(a, b, settings.pivot_tol)?;
    Ok(RecoveryResult {
        formulation: Formulation::SquareInverse,
        x_hat,
        auxiliary: None,
        objective: None,
        status: LpStatus::Optimal,
    })
}

pub fn recover(
    formulation: Formulation,
    a: &DenseMatrix,
    b: &[f64],
    settings: &SolverSettings,
) -> Result<RecoveryResult> {
    match formulation {
        Formulation::LinfL2 => recover_linf(a, b, settings),
        Formulation::L1Box => recover_l1_box(a, b, settings),
        Formulation::BoxFeas => feasibility_box(a, b, settings),
        Formulation::NonnegL1 => recover_nonneg(a, b, settings),
        Formulation::SquareInverse => recover_square(a, b, settings),
    }
}

fn relative_linf_error(estimate: &[f64], truth: &[f64]) -> Option<f64> {
    if estimate.len() != truth.len() {
        return None;
    }
    let err = estimate.iter().zip(truth).fold(0.0_f64, |acc, (e, t)| acc.max((e - t).abs()));
    Some(err / norm_inf(truth).max(1.0))
}

/// `‖x̂ − x̄‖∞ / max(1, ‖x̄‖∞) ≤ tol`. Mismatched lengths never succeed.
pub fn check_success(x_hat: &[f64], truth: &SparseBinarySignal, tol: f64) -> bool {
    relative_linf_error(x_hat, &truth.to_vector()).is_some_and(|e| e <= tol)
}

/// The ±1 variant: compares `ŷ` with `ȳ = e − 2x̄`.
pub fn check_success_pm(y_hat: &[f64], truth: &SparseBinarySignal, tol: f64) -> bool {
    relative_linf_error(y_hat, &truth.to_pm_one()).is_some_and(|e| e <= tol)
}
