//! Bounded-variable two-phase primal simplex over a dense tableau.
//!
//! Problems are stated in equality form
//!
//! ```text
//!     min cᵀx  s.t.  G·x = h,  lower ≤ x ≤ upper
//! ```
//!
//! where individual bounds may be infinite. Nonbasic variables rest at one of
//! their finite bounds (or at zero when free), so there is no need to split
//! free variables or shift bounds.
//!
//! Phase 1 starts from a crash basis: every row that owns a positive unit
//! column which can absorb the row residual within its bounds takes that
//! column as basic, and the remaining rows receive artificial variables.
//! Pricing is Dantzig's rule; after `10·(nv + p)` consecutive iterations
//! without objective decrease the solver switches to Bland's rule for the rest
//! of the phase. Ties are always broken by the lowest variable index.
//!
//! Programs with a nonzero objective whose starting basis becomes dual
//! feasible once every nonbasic variable sits at the bound matching the sign
//! of its reduced cost (always the case for boxed variables) are instead
//! solved by a bounded dual simplex from that basis, with the artificials
//! fixed at zero. The dual method is immune to the heavy primal degeneracy of
//! binary vertices, where primal pivoting stalls.
//!
//! At the end of each phase the basic solution and the reduced costs are
//! recomputed from a fresh LU factorization of the basis, so reported
//! solutions carry no accumulated tableau drift.

use crate::error::{Error, Result};
use crate::linalg::{dot, norm_inf, DenseMatrix, LuFactor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    /// Bounded dual simplex when the starting basis can be made dual
    /// feasible by placing nonbasic variables at bounds, two-phase primal
    /// otherwise.
    #[default]
    Auto,
    /// Always two-phase primal.
    Primal,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverSettings {
    pub feas_tol: f64,
    pub pivot_tol: f64,
    /// Defaults to `50·(nv + p)` when unset.
    pub max_iterations: Option<usize>,
    pub method: Method,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self { feas_tol: 1e-9, pivot_tol: 1e-10, max_iterations: None, method: Method::Auto }
    }
}

impl SolverSettings {
    fn validate(&self) -> Result<()> {
        if !(self.feas_tol > 0.0 && self.pivot_tol > 0.0) {
            return Err(Error::InvalidInput("solver tolerances must be strictly positive".into()));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidInput("iteration limit must be positive".into()));
        }
        Ok(())
    }
}

/// `min cᵀx s.t. G·x = h, lower ≤ x ≤ upper`.
///
/// Infinite bounds are written as `f64::NEG_INFINITY` / `f64::INFINITY`.
#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    objective: Vec<f64>,
    eq_matrix: DenseMatrix,
    eq_rhs: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LpProblem {
    pub fn new(
        objective: Vec<f64>,
        eq_matrix: DenseMatrix,
        eq_rhs: Vec<f64>,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self> {
        let nv = eq_matrix.cols();
        if objective.len() != nv || lower.len() != nv || upper.len() != nv {
            return Err(Error::Dimension(format!(
                "{nv} variables but objective/lower/upper have lengths {}/{}/{}",
                objective.len(),
                lower.len(),
                upper.len()
            )));
        }
        if eq_rhs.len() != eq_matrix.rows() {
            return Err(Error::Dimension(format!(
                "{} equality rows but right-hand side has length {}",
                eq_matrix.rows(),
                eq_rhs.len()
            )));
        }
        if objective.iter().chain(&eq_rhs).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("objective and right-hand side must be finite".into()));
        }
        for j in 0..nv {
            let (l, u) = (lower[j], upper[j]);
            if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY || l > u {
                return Err(Error::InvalidInput(format!("invalid bounds [{l}, {u}] on variable {j}")));
            }
        }
        Ok(Self { objective, eq_matrix, eq_rhs, lower, upper })
    }

    pub fn num_vars(&self) -> usize {
        self.eq_matrix.cols()
    }

    pub fn num_rows(&self) -> usize {
        self.eq_matrix.rows()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn eq_matrix(&self) -> &DenseMatrix {
        &self.eq_matrix
    }

    pub fn eq_rhs(&self) -> &[f64] {
        &self.eq_rhs
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// Tolerance applied to equality residuals: `feas_tol·(1 + ‖h‖∞)`.
    pub fn residual_tol(&self, feas_tol: f64) -> f64 {
        feas_tol * (1.0 + norm_inf(&self.eq_rhs))
    }

    /// Largest violation of the equality rows and the bounds at `x`.
    pub fn violation(&self, x: &[f64]) -> (f64, f64) {
        let gx = self.eq_matrix.mul_vec(x);
        let eq = gx.iter().zip(&self.eq_rhs).fold(0.0_f64, |a, (p, q)| a.max((p - q).abs()));
        let bound = x.iter().enumerate().fold(0.0_f64, |a, (j, &v)| a.max(self.lower[j] - v).max(v - self.upper[j]));
        (eq, bound)
    }

    /// Checks that `y` proves infeasibility: `yᵀh` exceeds the maximum of
    /// `yᵀG·x` over the bound box by more than `tol`.
    pub fn is_farkas_certificate(&self, y: &[f64], tol: f64) -> bool {
        if y.len() != self.num_rows() {
            return false;
        }
        let r = self.eq_matrix.tr_mul_vec(y);
        let mut box_max = 0.0;
        for (j, &rj) in r.iter().enumerate() {
            let b = if rj > 0.0 { self.upper[j] } else { self.lower[j] };
            if rj != 0.0 {
                if !b.is_finite() {
                    // allow round-off sized coefficients on unbounded directions
                    if rj.abs() > tol {
                        return false;
                    }
                    continue;
                }
                box_max += rj * b;
            }
        }
        dot(y, &self.eq_rhs) - box_max > tol
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome {
    Optimal {
        solution: Vec<f64>,
        objective: f64,
    },
    /// `certificate` is a row multiplier vector `y` with `yᵀh > max yᵀG·x`
    /// over the bound box.
    Infeasible {
        certificate: Vec<f64>,
    },
    Unbounded,
}

impl LpOutcome {
    pub fn status(&self) -> LpStatus {
        match self {
            LpOutcome::Optimal { .. } => LpStatus::Optimal,
            LpOutcome::Infeasible { .. } => LpStatus::Infeasible,
            LpOutcome::Unbounded => LpStatus::Unbounded,
        }
    }

    pub fn solution(&self) -> Option<&[f64]> {
        match self {
            LpOutcome::Optimal { solution, .. } => Some(solution),
            _ => None,
        }
    }

    pub fn objective_value(&self) -> Option<f64> {
        match self {
            LpOutcome::Optimal { objective, .. } => Some(*objective),
            _ => None,
        }
    }
}

/// Solves `problem` to a vertex optimum, or proves it infeasible or unbounded.
pub fn solve_lp(problem: &LpProblem, settings: &SolverSettings) -> Result<LpOutcome> {
    settings.validate()?;
    Simplex::new(problem, settings).run()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
    Free,
}

enum Step {
    Flip(f64),
    Pivot { row: usize, t: f64, to_upper: bool },
    Unbounded,
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Simplex<'a> {
    problem: &'a LpProblem,
    settings: SolverSettings,
    p: usize,
    nv: usize,
    ncol: usize,
    /// Row-sign-normalized constraint matrix including artificial columns.
    a_full: Vec<f64>,
    rhs: Vec<f64>,
    row_sign: Vec<f64>,
    /// `B⁻¹·a_full`, row-major `p × ncol`.
    tab: Vec<f64>,
    lo: Vec<f64>,
    up: Vec<f64>,
    val: Vec<f64>,
    state: Vec<VarState>,
    basis: Vec<usize>,
    cost: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
    limit: usize,
}

const OPT_TOL: f64 = 1e-9;
const RATIO_TIE: f64 = 1e-12;

impl<'a> Simplex<'a> {
    fn new(problem: &'a LpProblem, settings: &SolverSettings) -> Self {
        let p = problem.num_rows();
        let nv = problem.num_vars();
        let g = problem.eq_matrix();

        let mut val = vec![0.0; nv];
        let mut state = vec![VarState::Free; nv];
        for j in 0..nv {
            let (l, u) = (problem.lower[j], problem.upper[j]);
            if l.is_finite() {
                val[j] = l;
                state[j] = VarState::AtLower;
            } else if u.is_finite() {
                val[j] = u;
                state[j] = VarState::AtUpper;
            }
        }

        let gx = g.mul_vec(&val);
        let mut resid: Vec<f64> = problem.eq_rhs.iter().zip(&gx).map(|(h, v)| h - v).collect();
        let row_sign: Vec<f64> = resid.iter().map(|&r| if r < 0.0 { -1.0 } else { 1.0 }).collect();
        for (r, s) in resid.iter_mut().zip(&row_sign) {
            *r *= s;
        }

        // crash basis from positive unit columns
        let mut row_owner: Vec<Option<usize>> = vec![None; p];
        for j in 0..nv {
            let mut nz = None;
            let mut count = 0;
            for i in 0..p {
                if g.get(i, j) != 0.0 {
                    count += 1;
                    nz = Some(i);
                }
            }
            let Some(i) = nz else { continue };
            if count != 1 || row_owner[i].is_some() {
                continue;
            }
            let a = g.get(i, j) * row_sign[i];
            if a <= 0.0 || state[j] == VarState::AtUpper {
                continue;
            }
            let target = val[j] + resid[i] / a;
            if target >= problem.lower[j] && target <= problem.upper[j] {
                row_owner[i] = Some(j);
            }
        }

        let artificial_rows: Vec<usize> = (0..p).filter(|&i| row_owner[i].is_none()).collect();
        let ncol = nv + artificial_rows.len();

        let mut a_full = vec![0.0; p * ncol];
        for i in 0..p {
            for j in 0..nv {
                a_full[i * ncol + j] = g.get(i, j) * row_sign[i];
            }
        }
        let mut lo = problem.lower.clone();
        let mut up = problem.upper.clone();
        let mut basis = vec![usize::MAX; p];
        for (t, &i) in artificial_rows.iter().enumerate() {
            a_full[i * ncol + nv + t] = 1.0;
            basis[i] = nv + t;
        }
        lo.resize(ncol, 0.0);
        up.resize(ncol, f64::INFINITY);
        val.resize(ncol, 0.0);
        state.resize(ncol, VarState::AtLower);
        let rhs: Vec<f64> = problem.eq_rhs.iter().zip(&row_sign).map(|(h, s)| h * s).collect();

        let mut tab = a_full.clone();
        for i in 0..p {
            let j = match row_owner[i] {
                Some(j) => j,
                None => basis[i],
            };
            basis[i] = j;
            let piv = tab[i * ncol + j];
            if piv != 1.0 {
                for v in &mut tab[i * ncol..(i + 1) * ncol] {
                    *v /= piv;
                }
            }
            val[j] += resid[i] / piv;
            state[j] = VarState::Basic;
        }

        let limit = settings.max_iterations.unwrap_or(50 * (nv + p));
        Self {
            problem,
            settings: *settings,
            p,
            nv,
            ncol,
            a_full,
            rhs,
            row_sign,
            tab,
            lo,
            up,
            val,
            state,
            basis,
            cost: vec![0.0; ncol],
            d: vec![0.0; ncol],
            iterations: 0,
            limit,
        }
    }

    fn run(mut self) -> Result<LpOutcome> {
        let tol = self.problem.residual_tol(self.settings.feas_tol);

        let has_objective = self.problem.objective.iter().any(|&c| c != 0.0);
        if self.settings.method == Method::Auto && has_objective && self.try_dual_start() {
            if let Some(certificate) = self.dual_optimize()? {
                return Ok(LpOutcome::Infeasible { certificate });
            }
            // primal-feasible now; the primal pass only fixes residual dual
            // infeasibilities left by round-off
            if let PhaseEnd::Unbounded = self.optimize(None)? {
                return Ok(LpOutcome::Unbounded);
            }
            return self.finish(tol);
        }

        if self.ncol > self.nv {
            self.cost = (0..self.ncol).map(|j| if j >= self.nv { 1.0 } else { 0.0 }).collect();
            self.reduced_costs_from_tableau();
            if let PhaseEnd::Unbounded = self.optimize(Some(tol))? {
                return Err(Error::SolverInconsistency("phase 1 reported unbounded".into()));
            }
            let infeasibility = self.artificial_sum();
            if infeasibility > tol {
                let lu = self.factor_basis()?;
                let c_b: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
                let pi = lu.solve_transpose(&c_b);
                let certificate = pi.iter().zip(&self.row_sign).map(|(a, s)| a * s).collect();
                return Ok(LpOutcome::Infeasible { certificate });
            }
            for j in self.nv..self.ncol {
                self.up[j] = 0.0;
                self.val[j] = 0.0;
                if self.state[j] != VarState::Basic {
                    self.state[j] = VarState::AtLower;
                }
            }
            self.drive_out_artificials();
        }

        self.cost = self.problem.objective.clone();
        self.cost.resize(self.ncol, 0.0);
        self.reduced_costs_from_tableau();
        if let PhaseEnd::Unbounded = self.optimize(None)? {
            return Ok(LpOutcome::Unbounded);
        }
        self.finish(tol)
    }

    fn finish(&self, tol: f64) -> Result<LpOutcome> {
        let solution = self.val[..self.nv].to_vec();
        let (eq_viol, bound_viol) = self.problem.violation(&solution);
        if eq_viol > tol || bound_viol > tol {
            return Err(Error::SolverInconsistency(format!(
                "final basis violates constraints (residual {eq_viol:e}, bounds {bound_viol:e})"
            )));
        }
        let objective = dot(&self.problem.objective, &solution);
        Ok(LpOutcome::Optimal { solution, objective })
    }

    /// Installs the phase-2 costs with artificials fixed at zero and moves
    /// every nonbasic variable to the bound its reduced cost asks for.
    /// Returns false, leaving the primal start untouched, when some reduced
    /// cost points towards an infinite bound.
    fn try_dual_start(&mut self) -> bool {
        self.cost = self.problem.objective.clone();
        self.cost.resize(self.ncol, 0.0);
        self.reduced_costs_from_tableau();
        let mut moves = Vec::new();
        for j in 0..self.nv {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let dj = self.d[j];
            let target = if dj > OPT_TOL {
                (self.lo[j], VarState::AtLower)
            } else if dj < -OPT_TOL {
                (self.up[j], VarState::AtUpper)
            } else {
                continue;
            };
            if !target.0.is_finite() {
                return false;
            }
            if target.1 != self.state[j] {
                moves.push((j, target));
            }
        }
        for j in self.nv..self.ncol {
            self.up[j] = 0.0;
        }
        for (j, (v, st)) in moves {
            let delta = v - self.val[j];
            self.shift_entering(j, 1.0, delta);
            self.val[j] = v;
            self.state[j] = st;
        }
        true
    }

    /// Dual simplex until primal feasible. Returns a Farkas certificate when
    /// some infeasible basic row cannot be repaired.
    fn dual_optimize(&mut self) -> Result<Option<Vec<f64>>> {
        let mut confirmed_row = None;
        for attempt in 0.. {
            match self.dual_iterate()? {
                None => {
                    self.polish()?;
                    if self.leaving_row(false).is_none() {
                        return Ok(None);
                    }
                }
                Some(row) => {
                    if confirmed_row == Some(row) {
                        return Ok(Some(self.dual_ray(row)?));
                    }
                    confirmed_row = Some(row);
                    self.polish()?;
                }
            }
            if attempt >= 4 {
                return Err(Error::SolverInconsistency("dual simplex did not settle after refactorization".into()));
            }
            self.rebuild_tableau()?;
        }
        unreachable!()
    }

    fn primal_tol(&self, bound: f64) -> f64 {
        self.settings.feas_tol * (1.0 + bound.abs())
    }

    /// The basic row with the largest bound violation, as `(row, below)`.
    fn leaving_row(&self, bland: bool) -> Option<(usize, bool)> {
        let mut best: Option<(usize, bool, f64)> = None;
        for (i, &b) in self.basis.iter().enumerate() {
            let x = self.val[b];
            let (viol, below) = if x < self.lo[b] - self.primal_tol(self.lo[b]) {
                (self.lo[b] - x, true)
            } else if x > self.up[b] + self.primal_tol(self.up[b]) {
                (x - self.up[b], false)
            } else {
                continue;
            };
            let take = match best {
                None => true,
                Some((r, _, v)) if bland => b < self.basis[r] && v.is_finite(),
                Some((r, _, v)) => viol > v || (viol == v && b < self.basis[r]),
            };
            if take {
                best = Some((i, below, viol));
            }
        }
        best.map(|(r, below, _)| (r, below))
    }

    fn dual_iterate(&mut self) -> Result<Option<usize>> {
        let stall_limit = 10 * (self.nv + self.p);
        let mut stall = 0usize;
        let mut bland = false;
        let ncol = self.ncol;
        loop {
            let Some((r, below)) = self.leaving_row(bland) else {
                return Ok(None);
            };
            let mut best: Option<(usize, f64, f64)> = None;
            for j in 0..ncol {
                if self.state[j] == VarState::Basic || self.lo[j] == self.up[j] {
                    continue;
                }
                let alpha = self.tab[r * ncol + j];
                if alpha.abs() <= self.settings.pivot_tol {
                    continue;
                }
                // x_r moves by -alpha·Δx_j and must head back towards its bound
                let want = if below { -alpha } else { alpha };
                let ok = match self.state[j] {
                    VarState::AtLower => want > 0.0,
                    VarState::AtUpper => want < 0.0,
                    _ => true,
                };
                if !ok {
                    continue;
                }
                let ratio = self.d[j].abs() / alpha.abs();
                let take = match best {
                    None => true,
                    Some((_, br, _)) if ratio < br - RATIO_TIE => true,
                    Some((_, br, ba)) => !bland && ratio <= br + RATIO_TIE && alpha.abs() > ba,
                };
                if take {
                    best = Some((j, ratio, alpha.abs()));
                }
            }
            let Some((q, ratio, _)) = best else {
                return Ok(Some(r));
            };
            if self.iterations >= self.limit {
                return Err(Error::IterationLimit { limit: self.limit });
            }
            self.iterations += 1;

            let leaving = self.basis[r];
            let bound = if below { self.lo[leaving] } else { self.up[leaving] };
            let alpha = self.tab[r * ncol + q];
            let step = (self.val[leaving] - bound) / alpha;
            let viol = (self.val[leaving] - bound).abs();
            self.shift_entering(q, 1.0, step);
            self.val[leaving] = bound;
            self.state[leaving] = if below { VarState::AtLower } else { VarState::AtUpper };
            self.pivot(r, q);

            if ratio * viol > 1e-12 {
                stall = 0;
            } else {
                stall += 1;
                if stall >= stall_limit {
                    bland = true;
                }
            }
        }
    }

    /// Farkas certificate read off row `r` of `B⁻¹`, in original row signs.
    fn dual_ray(&self, r: usize) -> Result<Vec<f64>> {
        let b = self.basis[r];
        let below = self.val[b] < self.lo[b];
        let lu = self.factor_basis()?;
        let mut unit = vec![0.0; self.p];
        unit[r] = 1.0;
        let row = lu.solve_transpose(&unit);
        let sign = if below { -1.0 } else { 1.0 };
        Ok(row.iter().zip(&self.row_sign).map(|(v, s)| sign * v * s).collect())
    }

    /// Runs simplex iterations until the exactly recomputed reduced costs
    /// certify optimality, or a ray is found. With `feasible_below` set
    /// (phase 1), also stops once the artificial sum drops to that level.
    fn optimize(&mut self, feasible_below: Option<f64>) -> Result<PhaseEnd> {
        for attempt in 0.. {
            if let PhaseEnd::Unbounded = self.iterate(feasible_below)? {
                return Ok(PhaseEnd::Unbounded);
            }
            self.polish()?;
            if self.choose_entering(false).is_none() || feasible_below.is_some_and(|tol| self.artificial_sum() <= tol) {
                return Ok(PhaseEnd::Optimal);
            }
            if attempt >= 3 {
                return Err(Error::SolverInconsistency("reduced costs disagree with refactored basis".into()));
            }
            self.rebuild_tableau()?;
        }
        unreachable!()
    }

    fn artificial_sum(&self) -> f64 {
        self.val[self.nv..].iter().map(|v| v.max(0.0)).sum()
    }

    fn iterate(&mut self, feasible_below: Option<f64>) -> Result<PhaseEnd> {
        let stall_limit = 10 * (self.nv + self.p);
        let mut stall = 0usize;
        let mut bland = false;
        loop {
            if feasible_below.is_some_and(|tol| self.artificial_sum() <= tol) {
                return Ok(PhaseEnd::Optimal);
            }
            let Some((q, dir)) = self.choose_entering(bland) else {
                return Ok(PhaseEnd::Optimal);
            };
            if self.iterations >= self.limit {
                return Err(Error::IterationLimit { limit: self.limit });
            }
            self.iterations += 1;
            let gain = self.d[q].abs();
            let t = match self.ratio_test(q, dir) {
                Step::Unbounded => return Ok(PhaseEnd::Unbounded),
                Step::Flip(t) => {
                    self.shift_entering(q, dir, t);
                    self.state[q] = match self.state[q] {
                        VarState::AtLower => VarState::AtUpper,
                        _ => VarState::AtLower,
                    };
                    self.val[q] = if self.state[q] == VarState::AtUpper { self.up[q] } else { self.lo[q] };
                    t
                }
                Step::Pivot { row, t, to_upper } => {
                    self.shift_entering(q, dir, t);
                    let leaving = self.basis[row];
                    self.val[leaving] = if to_upper { self.up[leaving] } else { self.lo[leaving] };
                    self.state[leaving] = if to_upper { VarState::AtUpper } else { VarState::AtLower };
                    self.pivot(row, q);
                    t
                }
            };
            if gain * t > 1e-12 {
                stall = 0;
            } else {
                stall += 1;
                if stall >= stall_limit {
                    bland = true;
                }
            }
        }
    }

    fn eligible(&self, j: usize) -> Option<f64> {
        let dj = self.d[j];
        match self.state[j] {
            VarState::Basic => None,
            _ if self.lo[j] == self.up[j] => None,
            VarState::AtLower if dj < -OPT_TOL => Some(1.0),
            VarState::AtUpper if dj > OPT_TOL => Some(-1.0),
            VarState::Free if dj.abs() > OPT_TOL => Some(-dj.signum()),
            _ => None,
        }
    }

    fn choose_entering(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        let mut best_score = 0.0;
        for j in 0..self.ncol {
            if let Some(dir) = self.eligible(j) {
                if bland {
                    return Some((j, dir));
                }
                let score = self.d[j].abs();
                if score > best_score {
                    best_score = score;
                    best = Some((j, dir));
                }
            }
        }
        best
    }

    fn ratio_test(&self, q: usize, dir: f64) -> Step {
        let ncol = self.ncol;
        let own = self.up[q] - self.lo[q];
        let mut best_t = f64::INFINITY;
        let mut best: Option<(usize, bool)> = None;
        for i in 0..self.p {
            let alpha = self.tab[i * ncol + q];
            if alpha.abs() <= self.settings.pivot_tol {
                continue;
            }
            let b = self.basis[i];
            // basic variable moves at rate -dir·alpha per unit step
            let rate = -dir * alpha;
            let (limit, to_upper) = if rate < 0.0 {
                if !self.lo[b].is_finite() {
                    continue;
                }
                (((self.val[b] - self.lo[b]) / -rate).max(0.0), false)
            } else {
                if !self.up[b].is_finite() {
                    continue;
                }
                (((self.up[b] - self.val[b]) / rate).max(0.0), true)
            };
            let take = match best {
                None => true,
                Some(_) if limit < best_t - RATIO_TIE => true,
                Some((r, _)) => limit <= best_t + RATIO_TIE && b < self.basis[r],
            };
            if take {
                best_t = best_t.min(limit);
                best = Some((i, to_upper));
            }
        }
        if own.is_finite() && own <= best_t {
            return Step::Flip(own);
        }
        match best {
            Some((row, to_upper)) => Step::Pivot { row, t: best_t, to_upper },
            None => Step::Unbounded,
        }
    }

    fn shift_entering(&mut self, q: usize, dir: f64, t: f64) {
        if t == 0.0 {
            return;
        }
        let ncol = self.ncol;
        for i in 0..self.p {
            let alpha = self.tab[i * ncol + q];
            if alpha != 0.0 {
                self.val[self.basis[i]] -= dir * alpha * t;
            }
        }
        self.val[q] += dir * t;
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let ncol = self.ncol;
        let piv = self.tab[r * ncol + q];
        {
            let row = &mut self.tab[r * ncol..(r + 1) * ncol];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let nz: Vec<usize> = (0..ncol).filter(|&j| self.tab[r * ncol + j] != 0.0).collect();
        let (before, rest) = self.tab.split_at_mut(r * ncol);
        let (pivot_row, after) = rest.split_at_mut(ncol);
        for row in before.chunks_exact_mut(ncol).chain(after.chunks_exact_mut(ncol)) {
            let f = row[q];
            if f != 0.0 {
                for &j in &nz {
                    row[j] -= f * pivot_row[j];
                }
                row[q] = 0.0;
            }
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for &j in &nz {
                self.d[j] -= dq * pivot_row[j];
            }
            self.d[q] = 0.0;
        }
        self.state[q] = VarState::Basic;
        self.basis[r] = q;
    }

    fn reduced_costs_from_tableau(&mut self) {
        let ncol = self.ncol;
        self.d = self.cost.clone();
        for i in 0..self.p {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                for (dj, &t) in self.d.iter_mut().zip(&self.tab[i * ncol..(i + 1) * ncol]) {
                    *dj -= cb * t;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn factor_basis(&self) -> Result<LuFactor> {
        let p = self.p;
        let mut b = vec![0.0; p * p];
        for (k, &j) in self.basis.iter().enumerate() {
            for i in 0..p {
                b[i * p + k] = self.a_full[i * self.ncol + j];
            }
        }
        LuFactor::from_row_major(p, b, 1e-14)
            .map_err(|_| Error::SolverInconsistency("basis matrix became numerically singular".into()))
    }

    /// Recomputes basic values and reduced costs from the original data.
    fn polish(&mut self) -> Result<()> {
        let lu = self.factor_basis()?;
        let ncol = self.ncol;
        let mut r = self.rhs.clone();
        for j in 0..ncol {
            if self.state[j] != VarState::Basic && self.val[j] != 0.0 {
                let v = self.val[j];
                for (i, ri) in r.iter_mut().enumerate() {
                    *ri -= self.a_full[i * ncol + j] * v;
                }
            }
        }
        let xb = lu.solve(&r);
        for (&j, v) in self.basis.iter().zip(xb) {
            self.val[j] = v;
        }
        let c_b: Vec<f64> = self.basis.iter().map(|&j| self.cost[j]).collect();
        let pi = lu.solve_transpose(&c_b);
        for j in 0..ncol {
            self.d[j] = if self.state[j] == VarState::Basic {
                0.0
            } else {
                let col_dot: f64 = (0..self.p).map(|i| pi[i] * self.a_full[i * ncol + j]).sum();
                self.cost[j] - col_dot
            };
        }
        Ok(())
    }

    fn rebuild_tableau(&mut self) -> Result<()> {
        let lu = self.factor_basis()?;
        let (p, ncol) = (self.p, self.ncol);
        for j in 0..ncol {
            let col: Vec<f64> = (0..p).map(|i| self.a_full[i * ncol + j]).collect();
            for (i, v) in lu.solve(&col).into_iter().enumerate() {
                self.tab[i * ncol + j] = v;
            }
        }
        for (i, &b) in self.basis.iter().enumerate() {
            for k in 0..p {
                self.tab[k * ncol + b] = if k == i { 1.0 } else { 0.0 };
            }
        }
        Ok(())
    }

    /// Pivots zero-level artificials out of the basis where a structural
    /// column can replace them. Rows with no such column are redundant and
    /// keep their artificial, now fixed at zero.
    fn drive_out_artificials(&mut self) {
        let ncol = self.ncol;
        for r in 0..self.p {
            if self.basis[r] < self.nv {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for j in 0..self.nv {
                if self.state[j] == VarState::Basic {
                    continue;
                }
                let a = self.tab[r * ncol + j].abs();
                if a > self.settings.pivot_tol && best.is_none_or(|(_, b)| a > b) {
                    best = Some((j, a));
                }
            }
            if let Some((q, _)) = best {
                let leaving = self.basis[r];
                self.state[leaving] = VarState::AtLower;
                self.val[leaving] = 0.0;
                self.pivot(r, q);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const INF: f64 = f64::INFINITY;

    fn lp(c: &[f64], g: &[Vec<f64>], h: &[f64], lo: &[f64], up: &[f64]) -> LpProblem {
        LpProblem::new(c.to_vec(), DenseMatrix::from_rows(g).unwrap(), h.to_vec(), lo.to_vec(), up.to_vec()).unwrap()
    }

    fn solve(p: &LpProblem) -> LpOutcome {
        solve_lp(p, &SolverSettings::default()).unwrap()
    }

    #[test]
    fn forcing_constraint() {
        let p = lp(&[1.0, 0.0], &[vec![1.0, 1.0]], &[1.0], &[0.0, 0.0], &[1.0, 1.0]);
        match solve(&p) {
            LpOutcome::Optimal { solution, objective } => {
                assert_eq!(objective, 0.0);
                assert_eq!(solution, vec![0.0, 1.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bound_contradiction_is_infeasible_with_certificate() {
        let p = lp(&[0.0], &[vec![1.0]], &[2.0], &[0.0], &[1.0]);
        match solve(&p) {
            LpOutcome::Infeasible { certificate } => {
                assert!(p.is_farkas_certificate(&certificate, 1e-9));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn free_ray_is_unbounded() {
        let p = lp(&[-1.0, 0.0], &[vec![1.0, -1.0]], &[0.0], &[0.0, 0.0], &[INF, INF]);
        assert_eq!(solve(&p).status(), LpStatus::Unbounded);
    }

    #[test]
    fn free_variables() {
        // min x1 + x2, x1 - x2 = 1, x1 free, x2 ≥ 0 → x2 = 0, x1 = 1
        let p = lp(&[1.0, 1.0], &[vec![1.0, -1.0]], &[1.0], &[-INF, 0.0], &[INF, INF]);
        let out = solve(&p);
        assert_eq!(out.solution().unwrap(), &[1.0, 0.0]);
    }

    #[test]
    fn upper_bounded_only_variable() {
        // min -x, x ≤ 3 only
        let p = lp(&[-1.0, 0.0], &[vec![1.0, 1.0]], &[5.0], &[-INF, 0.0], &[3.0, INF]);
        let out = solve(&p);
        assert_eq!(out.objective_value(), Some(-3.0));
        assert_eq!(out.solution().unwrap(), &[3.0, 2.0]);
    }

    #[test]
    fn zero_row_inconsistent_rhs() {
        let p = lp(&[1.0, 1.0], &[vec![1.0, 1.0], vec![0.0, 0.0]], &[1.0, 1.0], &[0.0; 2], &[1.0; 2]);
        match solve(&p) {
            LpOutcome::Infeasible { certificate } => assert!(p.is_farkas_certificate(&certificate, 1e-9)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn repeated_and_zero_rows_are_handled() {
        let g = vec![vec![1.0, 2.0, 1.0], vec![1.0, 2.0, 1.0], vec![0.0, 0.0, 0.0], vec![2.0, 4.0, 2.0]];
        let p = lp(&[1.0, 1.0, 1.0], &g, &[2.0, 2.0, 0.0, 4.0], &[0.0; 3], &[1.0; 3]);
        let out = solve(&p);
        assert!((out.objective_value().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iteration_limit_is_an_error() {
        let g = vec![vec![1.0, 2.0, 3.0, 4.0], vec![4.0, 3.0, 2.0, 1.0]];
        let p = lp(&[1.0, -1.0, 1.0, -1.0], &g, &[3.0, 3.0], &[0.0; 4], &[1.0; 4]);
        let settings = SolverSettings { max_iterations: Some(1), ..Default::default() };
        assert!(matches!(solve_lp(&p, &settings), Err(Error::IterationLimit { limit: 1 })));
    }

    #[test]
    fn invalid_bounds_rejected() {
        let r = LpProblem::new(vec![0.0], DenseMatrix::identity(1), vec![0.0], vec![1.0], vec![0.0]);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
        let r = LpProblem::new(vec![0.0], DenseMatrix::identity(1), vec![f64::NAN], vec![0.0], vec![1.0]);
        assert!(r.is_err());
        let s = SolverSettings { feas_tol: 0.0, ..Default::default() };
        let p = lp(&[0.0], &[vec![1.0]], &[0.5], &[0.0], &[1.0]);
        assert!(solve_lp(&p, &s).is_err());
    }

    #[test]
    fn deterministic() {
        let g = vec![vec![1.0, 2.0, 3.0, 4.0], vec![4.0, 3.0, 2.0, 1.0]];
        let p = lp(&[1.0, 1.0, 1.0, 1.0], &g, &[3.0, 3.0], &[0.0; 4], &[1.0; 4]);
        assert_eq!(solve(&p), solve(&p));
    }
}
