//! Monte Carlo sweeps over `(m, k)` grids, level sets of the success rate,
//! transition points and the entropy fit.
//!
//! Two grid geometries are supported:
//!
//! * [`SweepMode::RhoDelta`]: 17 values of `m` from `n/10` to `9n/10`, and for
//!   each `m`, `⌈m/4⌉` equally spaced values of `k` from 1 to `m`.
//! * [`SweepMode::EtaDelta`]: 17 values of `k` from `n/10` to `9n/10` crossed
//!   with 25 values of `m` from `0.02n` to `0.98n`.
//!
//! Grid values are rounded to integers and deduplicated. Every repetition of
//! every cell is a pure function of `derive_seed(base, [dist, n, m, k, rep])`,
//! and all formulations are scored on the same instances, so results do not
//! depend on the degree of parallelism.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::lp::SolverSettings;
use crate::par::{self, Execution};
use crate::randgen::{derive_seed, sample_matrix, sample_signal, Alphabet, DistributionSpec, SignalSample};
use crate::recovery::{check_success, check_success_pm, recover, Formulation, SparseBinarySignal};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Abscissa δ = m/n, ordinate ρ = k/m.
    RhoDelta,
    /// Abscissa η = k/n, ordinate δ = m/n.
    EtaDelta,
}

impl fmt::Display for SweepMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepMode::RhoDelta => "rho_delta",
            SweepMode::EtaDelta => "eta_delta",
        })
    }
}

impl FromStr for SweepMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rho_delta" => Ok(SweepMode::RhoDelta),
            "eta_delta" => Ok(SweepMode::EtaDelta),
            other => Err(Error::InvalidInput(format!("unknown sweep mode `{other}`"))),
        }
    }
}

/// How the k-values of a `RhoDelta` gridline are chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    /// `⌈m/4⌉` equally spaced values from 1 to m (step ≈ 4).
    #[default]
    Quarter,
    /// Five values: 1 to m in four equal steps.
    FourSteps,
}

fn default_distributions() -> Vec<DistributionSpec> {
    vec![DistributionSpec::D1]
}

fn default_trials() -> usize {
    200
}

fn default_tolerance() -> f64 {
    1e-9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub mode: SweepMode,
    pub n: usize,
    pub formulations: Vec<Formulation>,
    #[serde(default = "default_distributions")]
    pub distributions: Vec<DistributionSpec>,
    #[serde(default = "default_trials")]
    pub trials_per_cell: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Relative ℓ∞ tolerance of the success check.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Replaces the m-grid.
    #[serde(default)]
    pub m_values: Option<Vec<usize>>,
    /// Replaces the k-grid (`RhoDelta`: applied to every m, keeping k ≤ m).
    #[serde(default)]
    pub k_values: Option<Vec<usize>>,
    #[serde(default)]
    pub k_rule: KRule,
    /// Give the ±1 signal k entries equal to −1 instead of +1.
    #[serde(default)]
    pub flip_pm_signal: bool,
    /// Put the ±1 signal's k marked entries on the support of x̄ instead of
    /// drawing them independently.
    #[serde(default)]
    pub couple_signals: bool,
}

impl SweepConfig {
    /// A config with defaults for everything but the essentials.
    pub fn new(mode: SweepMode, n: usize, formulations: Vec<Formulation>) -> Self {
        Self {
            mode,
            n,
            formulations,
            distributions: default_distributions(),
            trials_per_cell: default_trials(),
            base_seed: 0,
            tolerance: default_tolerance(),
            m_values: None,
            k_values: None,
            k_rule: KRule::default(),
            flip_pm_signal: false,
            couple_signals: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, message: String| Err(Error::Config { field: field.into(), message });
        if self.n < 10 {
            return bad("n", format!("must be at least 10, got {}", self.n));
        }
        if self.formulations.is_empty() {
            return bad("formulations", "must not be empty".into());
        }
        if let Some(f) = self.formulations.iter().find(|f| **f == Formulation::SquareInverse) {
            return bad("formulations", format!("`{f}` cannot be swept (needs m = n)"));
        }
        if has_duplicates(&self.formulations) {
            return bad("formulations", "duplicate entries".into());
        }
        if self.distributions.is_empty() {
            return bad("distributions", "must not be empty".into());
        }
        if has_duplicates(&self.distributions) {
            return bad("distributions", "duplicate entries".into());
        }
        if self.trials_per_cell == 0 {
            return bad("trials_per_cell", "must be at least 1".into());
        }
        if !(self.tolerance.is_finite() && self.tolerance > 0.0) {
            return bad("tolerance", format!("must be positive and finite, got {}", self.tolerance));
        }
        for (field, values) in [("m_values", &self.m_values), ("k_values", &self.k_values)] {
            if let Some(v) = values {
                if v.is_empty() {
                    return bad(field, "must not be empty".into());
                }
                if let Some(x) = v.iter().find(|&&x| x == 0 || x > self.n) {
                    return bad(field, format!("value {x} outside 1..={}", self.n));
                }
            }
        }
        Ok(())
    }
}

fn has_duplicates<T: PartialEq>(v: &[T]) -> bool {
    v.iter().enumerate().any(|(i, a)| v[..i].contains(a))
}

/// One `(m, k)` grid point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cell {
    pub m: usize,
    pub k: usize,
}

/// `count` equally spaced values from `lo` to `hi`, rounded, clamped to
/// `[1, n]` and deduplicated.
pub fn rounded_grid(lo: f64, hi: f64, count: usize, n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = (0..count)
        .map(|i| {
            let t = if count > 1 { i as f64 / (count - 1) as f64 } else { 0.0 };
            let v = (lo + t * (hi - lo)).round() as usize;
            v.clamp(1, n)
        })
        .collect();
    out.dedup();
    out
}

fn k_line(m: usize, rule: KRule) -> Vec<usize> {
    let count = match rule {
        KRule::Quarter => m.div_ceil(4).max(m.min(2)),
        KRule::FourSteps => 5,
    };
    rounded_grid(1.0, m as f64, count, m)
}

/// The cells of a sweep, ordered by `(k, m)`.
pub fn grid(config: &SweepConfig) -> Vec<Cell> {
    let n = config.n;
    let nf = n as f64;
    let mut cells = Vec::new();
    match config.mode {
        SweepMode::RhoDelta => {
            let ms = config.m_values.clone().unwrap_or_else(|| rounded_grid(0.1 * nf, 0.9 * nf, 17, n));
            for m in ms {
                let ks = match &config.k_values {
                    Some(ks) => ks.iter().copied().filter(|&k| k <= m).collect(),
                    None => k_line(m, config.k_rule),
                };
                cells.extend(ks.into_iter().map(|k| Cell { m, k }));
            }
        }
        SweepMode::EtaDelta => {
            let ks = config.k_values.clone().unwrap_or_else(|| rounded_grid(0.1 * nf, 0.9 * nf, 17, n));
            let ms = config.m_values.clone().unwrap_or_else(|| rounded_grid(0.02 * nf, 0.98 * nf, 25, n));
            for &k in &ks {
                cells.extend(ms.iter().map(|&m| Cell { m, k }));
            }
        }
    }
    cells.sort_by_key(|c| (c.k, c.m));
    cells.dedup();
    cells
}

/// Seed of one repetition of one cell.
pub fn rep_seed(base: u64, dist: DistributionSpec, n: usize, cell: Cell, rep: usize) -> u64 {
    derive_seed(base, &[dist.code(), n as u64, cell.m as u64, cell.k as u64, rep as u64])
}

/// One random problem: the matrix, the 0/1 signal and the ±1 signal.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub a: DenseMatrix,
    pub x_bar: SparseBinarySignal,
    pub y_bar: SignalSample,
}

/// Draws the instance of one repetition; A, x̄ and ȳ use the sub-streams
/// `[0]`, `[1]` and `[2]` of the repetition seed.
pub fn draw_instance(config: &SweepConfig, dist: DistributionSpec, cell: Cell, rep: usize) -> Result<Instance> {
    let n = config.n;
    let seed = rep_seed(config.base_seed, dist, n, cell, rep);
    let a = sample_matrix(dist, cell.m, n, derive_seed(seed, &[0]));
    let x_bar = sample_signal(n, cell.k, derive_seed(seed, &[1]), Alphabet::Binary)?.support;
    let marked = if config.couple_signals {
        x_bar.clone()
    } else {
        sample_signal(n, cell.k, derive_seed(seed, &[2]), Alphabet::PmOne)?.support
    };
    // the support of a ±1 sample holds its +1 entries
    let plus = if config.flip_pm_signal { marked.complement() } else { marked };
    Ok(Instance { a, x_bar, y_bar: SignalSample { support: plus, alphabet: Alphabet::PmOne } })
}

/// Solves one formulation on one instance and applies the success check.
///
/// The ℓ∞ program is scored against ȳ, the others against x̄. A non-optimal
/// status on these always-feasible instances is reported as an error.
pub fn score(formulation: Formulation, inst: &Instance, tol: f64, settings: &SolverSettings) -> Result<bool> {
    let target = match formulation {
        Formulation::LinfL2 => inst.y_bar.binary_equivalent(),
        _ => inst.x_bar.clone(),
    };
    let b = inst.a.mul_vec(&target.to_vector());
    let r = recover(formulation, &inst.a, &b, settings)?;
    if !r.is_optimal() {
        return Err(Error::SolverInconsistency(format!(
            "{formulation} returned {:?} on a consistent instance",
            r.status
        )));
    }
    Ok(match formulation {
        Formulation::LinfL2 => {
            let y_hat: Vec<f64> = r.x_hat.iter().map(|x| 1.0 - 2.0 * x).collect();
            check_success_pm(&y_hat, &target, tol)
        }
        _ => check_success(&r.x_hat, &target, tol),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellResult {
    pub distribution: DistributionSpec,
    pub formulation: Formulation,
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    /// Set when some repetition failed; the rate is then unavailable.
    pub error: Option<String>,
}

impl CellResult {
    pub fn delta(&self) -> f64 {
        self.m as f64 / self.n as f64
    }

    pub fn rho(&self) -> f64 {
        self.k as f64 / self.m as f64
    }

    pub fn eta(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn rate(&self) -> Option<f64> {
        match self.error {
            None => Some(self.successes as f64 / self.trials as f64),
            Some(_) => None,
        }
    }
}

/// Runs the sweep over its own grid.
pub fn run_sweep(config: &SweepConfig, exec: Execution) -> Result<Vec<CellResult>> {
    run_cells(config, &grid(config), exec)
}

/// Runs a sweep over explicit cells. Output is ordered by distribution,
/// formulation name, k, m; solver failures mark the cell instead of aborting.
pub fn run_cells(config: &SweepConfig, cells: &[Cell], exec: Execution) -> Result<Vec<CellResult>> {
    config.validate()?;
    let n = config.n;
    if let Some(c) = cells.iter().find(|c| c.m == 0 || c.m > n || c.k == 0 || c.k > n) {
        return Err(Error::InvalidInput(format!("cell (m = {}, k = {}) outside the grid for n = {n}", c.m, c.k)));
    }
    let mut cells = cells.to_vec();
    cells.sort_by_key(|c| (c.k, c.m));
    cells.dedup();

    let trials = config.trials_per_cell;
    let mut seen = HashSet::with_capacity(config.distributions.len() * cells.len() * trials);
    for &d in &config.distributions {
        for &c in &cells {
            for rep in 0..trials {
                if !seen.insert(rep_seed(config.base_seed, d, n, c, rep)) {
                    return Err(Error::InvalidInput(format!(
                        "seed collision at {d}, m = {}, k = {}, rep {rep}",
                        c.m, c.k
                    )));
                }
            }
        }
    }

    let mut formulations = config.formulations.clone();
    formulations.sort_by_key(|f| f.as_str());
    let settings = SolverSettings::default();

    let tasks: Vec<(usize, usize, usize)> = (0..config.distributions.len())
        .flat_map(|d| (0..cells.len()).flat_map(move |c| (0..trials).map(move |r| (d, c, r))))
        .collect();
    let outcomes: Vec<Vec<Result<bool>>> =
        par::map(exec, &tasks, |&(d, c, rep)| match draw_instance(config, config.distributions[d], cells[c], rep) {
            Ok(inst) => formulations.iter().map(|&f| score(f, &inst, config.tolerance, &settings)).collect(),
            Err(e) => vec![Err(e); formulations.len()],
        });

    let mut results = Vec::with_capacity(config.distributions.len() * formulations.len() * cells.len());
    let mut dists: Vec<(usize, DistributionSpec)> = config.distributions.iter().copied().enumerate().collect();
    dists.sort_by_key(|&(_, d)| d);
    for &(d, dist) in &dists {
        for (fi, &formulation) in formulations.iter().enumerate() {
            for (c, cell) in cells.iter().enumerate() {
                let base = (d * cells.len() + c) * trials;
                let mut successes = 0;
                let mut error = None;
                for outcome in &outcomes[base..base + trials] {
                    match &outcome[fi] {
                        Ok(true) => successes += 1,
                        Ok(false) => {}
                        Err(e) => {
                            error = Some(e.to_string());
                            break;
                        }
                    }
                }
                if error.is_some() {
                    successes = 0;
                }
                results.push(CellResult {
                    distribution: dist,
                    formulation,
                    n,
                    m: cell.m,
                    k: cell.k,
                    trials,
                    successes,
                    error,
                });
            }
        }
    }
    Ok(results)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LevelPoint {
    pub abscissa: f64,
    pub ordinate: f64,
    /// The gridline's rates are not monotone; the first crossing was used.
    pub non_monotone: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelSet {
    pub target_rate: f64,
    /// Sorted by abscissa.
    pub points: Vec<LevelPoint>,
    /// Abscissae of gridlines whose rates never bracket the target.
    pub gaps: Vec<f64>,
    pub notice: Option<String>,
}

/// `(abscissa, ordinate)` of a cell in the mode's plane.
pub fn coordinates(cell: &CellResult, mode: SweepMode) -> (f64, f64) {
    match mode {
        SweepMode::EtaDelta => (cell.eta(), cell.delta()),
        SweepMode::RhoDelta => (cell.delta(), cell.rho()),
    }
}

fn check_slice(cells: &[CellResult]) -> Result<()> {
    if let Some(first) = cells.first() {
        if cells
            .iter()
            .any(|c| c.formulation != first.formulation || c.distribution != first.distribution || c.n != first.n)
        {
            return Err(Error::InvalidInput(
                "level sets need cells from a single formulation, distribution and n".into(),
            ));
        }
    }
    Ok(())
}

/// Where the success rate crosses `target_rate`, one point per gridline.
///
/// Gridlines are the k-values (`EtaDelta`) or m-values (`RhoDelta`); along
/// each, cells are walked in increasing ordinate and the first adjacent pair
/// bracketing the target is linearly interpolated. Cells with errors are
/// skipped.
pub fn level_set(cells: &[CellResult], mode: SweepMode, target_rate: f64) -> Result<LevelSet> {
    if !(target_rate > 0.0 && target_rate < 1.0) {
        return Err(Error::InvalidInput(format!("target rate {target_rate} outside (0, 1)")));
    }
    check_slice(cells)?;
    let mut lines: BTreeMap<usize, Vec<(usize, f64, f64)>> = BTreeMap::new();
    for c in cells {
        let Some(rate) = c.rate() else { continue };
        let (line, along) = match mode {
            SweepMode::EtaDelta => (c.k, c.m),
            SweepMode::RhoDelta => (c.m, c.k),
        };
        lines.entry(line).or_default().push((along, coordinates(c, mode).1, rate));
    }
    let mut out = LevelSet { target_rate, points: Vec::new(), gaps: Vec::new(), notice: None };
    if lines.len() < 2 {
        out.notice = Some(format!("{} gridline(s); a level set needs at least two", lines.len()));
        return Ok(out);
    }
    let n = cells[0].n as f64;
    for (line, mut pts) in lines {
        pts.sort_by_key(|p| p.0);
        // k/n or m/n, depending on the mode
        let abscissa = line as f64 / n;
        let rates: Vec<f64> = pts.iter().map(|p| p.2).collect();
        let non_monotone = !(rates.windows(2).all(|w| w[0] <= w[1]) || rates.windows(2).all(|w| w[0] >= w[1]));
        match first_crossing(&pts, target_rate) {
            Some(ordinate) => out.points.push(LevelPoint { abscissa, ordinate, non_monotone }),
            None => out.gaps.push(abscissa),
        }
    }
    Ok(out)
}

fn first_crossing(pts: &[(usize, f64, f64)], target: f64) -> Option<f64> {
    if let [(_, o, r)] = pts {
        return (*r == target).then_some(*o);
    }
    for w in pts.windows(2) {
        let (_, o0, r0) = w[0];
        let (_, o1, r1) = w[1];
        if r0 == target {
            return Some(o0);
        }
        if (r0 - target) * (r1 - target) < 0.0 {
            return Some(o0 + (target - r0) / (r1 - r0) * (o1 - o0));
        }
        if r1 == target {
            return Some(o1);
        }
    }
    None
}

/// `(η, δ*)`: the 0.5 level set of an `EtaDelta` slice.
pub fn transition_points(cells: &[CellResult]) -> Result<Vec<(f64, f64)>> {
    Ok(level_set(cells, SweepMode::EtaDelta, 0.5)?.points.iter().map(|p| (p.abscissa, p.ordinate)).collect())
}

/// Ordinate distance between the 0.1 and 0.9 level sets, per gridline where
/// both exist.
pub fn transition_width(cells: &[CellResult], mode: SweepMode) -> Result<Vec<(f64, f64)>> {
    let lo = level_set(cells, mode, 0.1)?;
    let hi = level_set(cells, mode, 0.9)?;
    Ok(lo
        .points
        .iter()
        .filter_map(|p| {
            hi.points.iter().find(|q| q.abscissa == p.abscissa).map(|q| (p.abscissa, (p.ordinate - q.ordinate).abs()))
        })
        .collect())
}

/// `H(x) = −x log₂ x − (1 − x) log₂(1 − x)`, with `H(0) = H(1) = 0`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::InvalidInput(format!("entropy argument {x} outside [0, 1]")));
    }
    let term = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(term(x) + term(1.0 - x))
}

/// Conjectured transition `δ̄(η) = H(η)/2`.
pub fn conjecture_curve(eta: f64) -> Result<f64> {
    Ok(binary_entropy(eta)? / 2.0)
}

/// `k·log₂(n/k)` measurements.
pub fn cs_lower_bound_curve(n: usize, k: usize) -> Result<f64> {
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} outside 1..={n}")));
    }
    Ok(k as f64 * (n as f64 / k as f64).log2())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitRow {
    pub eta: f64,
    pub delta_star: Option<f64>,
    pub conjecture: f64,
    /// `δ* − H(η)/2`.
    pub deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub rows: Vec<FitRow>,
    pub max_abs_deviation: Option<f64>,
    pub mean_abs_deviation: Option<f64>,
    /// Gridlines without a transition point, excluded from the summary.
    pub gaps: usize,
}

/// Transition points of an `EtaDelta` slice against `H(η)/2`.
pub fn fit_report(cells: &[CellResult]) -> Result<FitReport> {
    let levels = level_set(cells, SweepMode::EtaDelta, 0.5)?;
    let mut rows = Vec::new();
    for p in &levels.points {
        let conjecture = conjecture_curve(p.abscissa)?;
        rows.push(FitRow {
            eta: p.abscissa,
            delta_star: Some(p.ordinate),
            conjecture,
            deviation: Some(p.ordinate - conjecture),
        });
    }
    for &eta in &levels.gaps {
        rows.push(FitRow { eta, delta_star: None, conjecture: conjecture_curve(eta)?, deviation: None });
    }
    rows.sort_by(|a, b| a.eta.total_cmp(&b.eta));
    let devs: Vec<f64> = rows.iter().filter_map(|r| r.deviation.map(f64::abs)).collect();
    let (max_abs_deviation, mean_abs_deviation) = if devs.is_empty() {
        (None, None)
    } else {
        (devs.iter().copied().reduce(f64::max), Some(devs.iter().sum::<f64>() / devs.len() as f64))
    };
    Ok(FitReport { rows, max_abs_deviation, mean_abs_deviation, gaps: levels.gaps.len() })
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;

    fn cell(n: usize, m: usize, k: usize, trials: usize, successes: usize) -> CellResult {
        CellResult {
            distribution: DistributionSpec::D1,
            formulation: Formulation::L1Box,
            n,
            m,
            k,
            trials,
            successes,
            error: None,
        }
    }

    fn tiny(m: usize, k: usize, trials: usize) -> SweepConfig {
        let mut c = SweepConfig::new(SweepMode::EtaDelta, 20, vec![Formulation::L1Box]);
        c.m_values = Some(vec![m]);
        c.k_values = Some(vec![k]);
        c.trials_per_cell = trials;
        c.base_seed = 17;
        c
    }

    #[test]
    fn grid_sizes() {
        let c = SweepConfig::new(SweepMode::EtaDelta, 200, vec![Formulation::L1Box]);
        let g = grid(&c);
        assert_eq!(g.len(), 17 * 25);
        assert_eq!(g.first(), Some(&Cell { m: 4, k: 20 }));
        assert_eq!(g.last(), Some(&Cell { m: 196, k: 180 }));

        let c = SweepConfig::new(SweepMode::RhoDelta, 200, vec![Formulation::L1Box]);
        let g = grid(&c);
        let ms: std::collections::BTreeSet<usize> = g.iter().map(|c| c.m).collect();
        assert_eq!(ms.len(), 17);
        assert_eq!((ms.first(), ms.last()), (Some(&20), Some(&180)));
        // m = 20 gives ⌈20/4⌉ = 5 values 1, 6, 11, 15, 20
        let line: Vec<usize> = g.iter().filter(|c| c.m == 20).map(|c| c.k).collect();
        assert_eq!(line, vec![1, 6, 11, 15, 20]);
        assert!(g.iter().all(|c| c.k <= c.m));
    }

    #[test]
    fn k_rules() {
        assert_eq!(k_line(1, KRule::Quarter), vec![1]);
        assert_eq!(k_line(2, KRule::Quarter), vec![1, 2]);
        assert_eq!(k_line(9, KRule::Quarter), vec![1, 5, 9]);
        assert_eq!(k_line(20, KRule::FourSteps), vec![1, 6, 11, 15, 20]);
        assert_eq!(k_line(3, KRule::FourSteps), vec![1, 2, 3]);
    }

    #[test]
    fn validation_names_the_field() {
        let mut c = tiny(10, 5, 3);
        c.trials_per_cell = 0;
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "trials_per_cell"));
        let mut c = tiny(10, 5, 3);
        c.n = 5;
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "n"));
        let mut c = tiny(10, 5, 3);
        c.formulations.clear();
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "formulations"));
        let mut c = tiny(10, 5, 3);
        c.m_values = Some(vec![21]);
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "m_values"));
    }

    #[test]
    fn square_cell_always_succeeds() {
        let r = run_sweep(&tiny(20, 5, 50), Execution::Parallel).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].rate(), Some(1.0));
    }

    #[test]
    fn far_above_transition_always_fails() {
        let r = run_sweep(&tiny(2, 10, 50), Execution::Parallel).unwrap();
        assert_eq!(r[0].rate(), Some(0.0));
    }

    #[test]
    fn sweeps_are_deterministic_and_ordered() {
        let mut c = SweepConfig::new(
            SweepMode::EtaDelta,
            20,
            vec![Formulation::NonnegL1, Formulation::LinfL2, Formulation::L1Box],
        );
        c.distributions = vec![DistributionSpec::D3, DistributionSpec::D1];
        c.trials_per_cell = 3;
        c.m_values = Some(vec![8, 14]);
        c.k_values = Some(vec![6, 2]);
        let a = run_sweep(&c, Execution::Sequential).unwrap();
        let b = run_sweep(&c, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let keys: Vec<_> = a.iter().map(|r| (r.distribution, r.formulation.as_str(), r.k, r.m)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert_eq!(a.len(), 2 * 3 * 4);
    }

    #[test]
    fn formulations_share_instances() {
        let c = tiny(12, 4, 1);
        let i1 = draw_instance(&c, DistributionSpec::D1, Cell { m: 12, k: 4 }, 0).unwrap();
        let i2 = draw_instance(&c, DistributionSpec::D1, Cell { m: 12, k: 4 }, 0).unwrap();
        assert_eq!(i1, i2);
        assert_eq!(i1.x_bar.k(), 4);
        assert_eq!(i1.y_bar.support.k(), 4);

        let mut flipped = c.clone();
        flipped.flip_pm_signal = true;
        let f = draw_instance(&flipped, DistributionSpec::D1, Cell { m: 12, k: 4 }, 0).unwrap();
        assert_eq!(f.y_bar.support, i1.y_bar.support.complement());

        let mut coupled = c;
        coupled.couple_signals = true;
        let j = draw_instance(&coupled, DistributionSpec::D1, Cell { m: 12, k: 4 }, 0).unwrap();
        assert_eq!(j.y_bar.support, j.x_bar);
    }

    #[test]
    fn cell_coordinates() {
        let c = cell(200, 100, 60, 10, 4);
        assert_eq!((c.delta(), c.rho(), c.eta()), (0.5, 0.6, 0.3));
        assert_eq!(c.rate(), Some(0.4));
        let mut e = c.clone();
        e.error = Some("boom".into());
        assert_eq!(e.rate(), None);
    }

    #[test]
    fn step_data_gives_flat_level_set() {
        let n = 100;
        let mut cells = Vec::new();
        for k in [10, 20, 30] {
            for m in (10..=90).step_by(10) {
                let s = if m > 50 {
                    10
                } else if m == 50 {
                    5
                } else {
                    0
                };
                cells.push(cell(n, m, k, 10, s));
            }
        }
        let ls = level_set(&cells, SweepMode::EtaDelta, 0.5).unwrap();
        assert_eq!(ls.points.len(), 3);
        for p in &ls.points {
            assert_abs_diff_eq!(p.ordinate, 0.5, epsilon = 1e-12);
            assert!(!p.non_monotone);
        }
    }

    #[test]
    fn linear_interpolation() {
        let cells = vec![
            cell(100, 40, 10, 10, 2),
            cell(100, 60, 10, 10, 8),
            cell(100, 40, 20, 10, 0),
            cell(100, 60, 20, 10, 0),
        ];
        let ls = level_set(&cells, SweepMode::EtaDelta, 0.5).unwrap();
        assert_eq!(ls.points.len(), 1);
        assert_abs_diff_eq!(ls.points[0].ordinate, 0.5, epsilon = 1e-12);
        assert_eq!(ls.gaps, vec![0.2]);
    }

    #[test]
    fn noisy_line_takes_first_crossing() {
        let cells = vec![
            cell(100, 40, 10, 10, 6),
            cell(100, 50, 10, 10, 4),
            cell(100, 60, 10, 10, 9),
            cell(100, 40, 20, 10, 0),
            cell(100, 60, 20, 10, 10),
        ];
        let ls = level_set(&cells, SweepMode::EtaDelta, 0.5).unwrap();
        let p = ls.points[0];
        assert_abs_diff_eq!(p.ordinate, 0.45, epsilon = 1e-12);
        assert!(p.non_monotone);
        assert!(!ls.points[1].non_monotone);
    }

    #[test]
    fn rho_delta_levels_run_along_k() {
        let cells = vec![
            cell(100, 40, 10, 10, 10),
            cell(100, 40, 30, 10, 0),
            cell(100, 60, 10, 10, 10),
            cell(100, 60, 30, 10, 5),
        ];
        let ls = level_set(&cells, SweepMode::RhoDelta, 0.5).unwrap();
        assert_eq!(ls.points.len(), 2);
        assert_abs_diff_eq!(ls.points[0].abscissa, 0.4);
        assert_abs_diff_eq!(ls.points[0].ordinate, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(ls.points[1].ordinate, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn level_set_notices_and_errors() {
        let one_line = vec![cell(100, 40, 10, 10, 2), cell(100, 60, 10, 10, 8)];
        let ls = level_set(&one_line, SweepMode::EtaDelta, 0.5).unwrap();
        assert!(ls.points.is_empty() && ls.notice.is_some());
        assert!(level_set(&one_line, SweepMode::EtaDelta, 1.0).is_err());
        let mut mixed = one_line.clone();
        mixed[1].formulation = Formulation::NonnegL1;
        assert!(level_set(&mixed, SweepMode::EtaDelta, 0.5).is_err());
    }

    #[test]
    fn entropy_values() {
        assert_eq!(binary_entropy(0.5).unwrap(), 1.0);
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert_abs_diff_eq!(binary_entropy(0.1).unwrap(), 0.468_995_593_589_281, epsilon = 1e-12);
        assert!(binary_entropy(1.5).is_err());
        assert_eq!(conjecture_curve(0.5).unwrap(), 0.5);
        assert_eq!(conjecture_curve(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(conjecture_curve(0.1).unwrap(), 0.234_497_796_794_640, epsilon = 1e-12);
        assert_eq!(cs_lower_bound_curve(10, 10).unwrap(), 0.0);
        assert_eq!(cs_lower_bound_curve(8, 2).unwrap(), 4.0);
        assert_abs_diff_eq!(cs_lower_bound_curve(500, 50).unwrap(), 166.096_404_744_368, epsilon = 1e-9);
        assert!(cs_lower_bound_curve(5, 0).is_err());
    }

    #[test]
    fn fit_on_exact_conjecture_has_zero_deviation() {
        let n = 1000;
        let mut cells = Vec::new();
        for k in [100, 300, 500] {
            let target = (conjecture_curve(k as f64 / n as f64).unwrap() * n as f64).round() as usize;
            for m in [target - 10, target, target + 10] {
                let s = match m.cmp(&target) {
                    std::cmp::Ordering::Less => 0,
                    std::cmp::Ordering::Equal => 5,
                    std::cmp::Ordering::Greater => 10,
                };
                cells.push(cell(n, m, k, 10, s));
            }
        }
        let fit = fit_report(&cells).unwrap();
        assert_eq!(fit.gaps, 0);
        // the grid is integral, so the conjecture is hit up to rounding of m
        assert!(fit.max_abs_deviation.unwrap() <= 0.5 / n as f64);
    }

    #[test]
    fn fit_counts_gaps() {
        let cells = vec![
            cell(100, 40, 10, 10, 10),
            cell(100, 60, 10, 10, 10),
            cell(100, 40, 20, 10, 10),
            cell(100, 60, 20, 10, 10),
        ];
        let fit = fit_report(&cells).unwrap();
        assert_eq!(fit.gaps, 2);
        assert_eq!(fit.max_abs_deviation, None);
        assert!(fit.rows.iter().all(|r| r.delta_star.is_none()));
    }
}
