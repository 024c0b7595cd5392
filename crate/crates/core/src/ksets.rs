//! k-sets of point clouds and the Monte Carlo link to recovery probability.
//!
//! A k-set is a k-subset that a hyperplane strictly separates from the other
//! points. With `augment_origin` the origin joins the complement, which is
//! exactly the hull condition for unique recovery; without it the count is
//! the classical, columns-only one. Both are exposed because they can differ.

use itertools::Itertools;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;
use crate::lp::SolverSettings;
use crate::par::{self, Execution};
use crate::randgen::{derive_seed, sample_matrix, DistributionSpec};
use crate::recovery::SparseBinarySignal;
use crate::uniqueness::{hull_relation, is_unique_solution, HullRelation};

/// Default cap on the number of subsets [`count_ksets`] will enumerate.
pub const DEFAULT_SUBSET_CAP: u128 = 1_000_000;

/// Points in `R^dim`, stored as the columns of a matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    columns: DenseMatrix,
}

impl PointCloud {
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        Ok(Self { columns: DenseMatrix::from_columns(points)? })
    }

    pub fn from_matrix(a: &DenseMatrix) -> Self {
        Self { columns: a.clone() }
    }

    pub fn dim(&self) -> usize {
        self.columns.rows()
    }

    pub fn len(&self) -> usize {
        self.columns.cols()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.columns.column(i)
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.columns
    }
}

/// `C(n, k)`, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc·(n−i)/(i+1) stays integral at every step
        let Some(next) = acc.checked_mul((n - i) as u128) else {
            return u128::MAX;
        };
        acc = next / (i as u128 + 1);
    }
    acc
}

/// Whether `subset` can be strictly separated from the remaining points
/// (plus the origin when `augment_origin`).
pub fn is_separable(
    cloud: &PointCloud,
    subset: &[usize],
    augment_origin: bool,
    settings: &SolverSettings,
) -> Result<bool> {
    let n = cloud.len();
    let mut inside = vec![false; n];
    for &j in subset {
        if j >= n {
            return Err(Error::InvalidInput(format!("index {j} out of range for {n} points")));
        }
        if inside[j] {
            return Err(Error::InvalidInput(format!("index {j} repeated in subset")));
        }
        inside[j] = true;
    }
    if subset.is_empty() {
        return Err(Error::InvalidInput("subset must be nonempty".into()));
    }
    let rest: Vec<usize> = (0..n).filter(|&j| !inside[j]).collect();
    if rest.is_empty() && !augment_origin {
        return Err(Error::InvalidInput("subset must be a proper subset".into()));
    }
    let rel = hull_relation(cloud.as_matrix(), &rest, augment_origin, subset, settings)?;
    Ok(matches!(rel, HullRelation::Disjoint(_)))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KsetReport {
    pub n: usize,
    pub k: usize,
    pub count: u64,
    /// `count / C(n, k)`.
    pub ratio: f64,
}

/// Exhaustive k-set count. `k = n` counts 1 without the origin (the empty
/// complement is trivially separated); with the origin it is tested.
pub fn count_ksets(
    cloud: &PointCloud,
    k: usize,
    augment_origin: bool,
    cap: u128,
    settings: &SolverSettings,
    exec: Execution,
) -> Result<KsetReport> {
    let n = cloud.len();
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} outside 1..={n}")));
    }
    let total = binomial(n, k);
    if total > cap {
        return Err(Error::SizeCap { requested: total, cap });
    }
    if k == n && !augment_origin {
        return Ok(KsetReport { n, k, count: 1, ratio: 1.0 });
    }
    let subsets: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    let hits = par::try_map(exec, &subsets, |s| is_separable(cloud, s, augment_origin, settings))?;
    let count = hits.iter().filter(|&&h| h).count() as u64;
    Ok(KsetReport { n, k, count, ratio: count as f64 / total as f64 })
}

/// Sample mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub trials: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let t = xs.len();
        let mean = xs.iter().sum::<f64>() / t as f64;
        let stderr = if t > 1 {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1) as f64;
            (var / t as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, stderr, trials: t }
    }
}

fn check_trials(m: usize, n: usize, k: usize, trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be ≥ 1".into()));
    }
    if m == 0 || n == 0 {
        return Err(Error::InvalidInput("m and n must be positive".into()));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidInput(format!("k = {k} outside 1..={n}")));
    }
    Ok(())
}

// independent sub-streams for the two estimators
const RECOVERY_STREAM: u64 = 0;
const KSET_STREAM: u64 = 1;

/// Fraction of random matrices for which `x̄ = (1,…,1,0,…,0)` (first k
/// coordinates) is the unique optimum. Exchangeable columns make the choice of
/// support immaterial.
#[allow(clippy::too_many_arguments)]
pub fn estimate_recovery_prob(
    dist: DistributionSpec,
    m: usize,
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
    settings: &SolverSettings,
    exec: Execution,
) -> Result<Estimate> {
    check_trials(m, n, k, trials)?;
    let truth = SparseBinarySignal::new(n, (0..k).collect())?;
    let hits = par::map_range(exec, trials, |t| {
        let a = sample_matrix(dist, m, n, derive_seed(seed, &[RECOVERY_STREAM, t as u64]));
        is_unique_solution(&a, &truth, settings).map(|v| if v.is_unique() { 1.0 } else { 0.0 })
    });
    Ok(Estimate::from_samples(&hits.into_iter().collect::<Result<Vec<f64>>>()?))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsetEstimate {
    pub count: Estimate,
    /// `X / C(n, k)`.
    pub ratio: Estimate,
}

/// Average k-set count over random clouds (matrix columns).
#[allow(clippy::too_many_arguments)]
pub fn estimate_expected_ksets(
    dist: DistributionSpec,
    m: usize,
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
    augment_origin: bool,
    settings: &SolverSettings,
    exec: Execution,
) -> Result<KsetEstimate> {
    check_trials(m, n, k, trials)?;
    let total = binomial(n, k);
    if total > DEFAULT_SUBSET_CAP {
        return Err(Error::SizeCap { requested: total, cap: DEFAULT_SUBSET_CAP });
    }
    // parallelism across trials; each count runs sequentially
    let counts = par::map_range(exec, trials, |t| {
        let a = sample_matrix(dist, m, n, derive_seed(seed, &[KSET_STREAM, t as u64]));
        count_ksets(
            &PointCloud::from_matrix(&a),
            k,
            augment_origin,
            DEFAULT_SUBSET_CAP,
            settings,
            Execution::Sequential,
        )
        .map(|r| r.count as f64)
    });
    let counts = counts.into_iter().collect::<Result<Vec<f64>>>()?;
    let ratios: Vec<f64> = counts.iter().map(|c| c / total as f64).collect();
    Ok(KsetEstimate { count: Estimate::from_samples(&counts), ratio: Estimate::from_samples(&ratios) })
}

/// One side of the comparison in [`Theorem3Report`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsetComparison {
    pub ksets: KsetEstimate,
    /// `|P̂ − Ê[X]/C(n,k)|`.
    pub gap: f64,
    /// `√(se_P² + se_ratio²)`.
    pub pooled_stderr: f64,
}

impl KsetComparison {
    fn new(recovery: &Estimate, ksets: KsetEstimate) -> Self {
        let gap = (recovery.mean - ksets.ratio.mean).abs();
        let pooled_stderr = recovery.stderr.hypot(ksets.ratio.stderr);
        Self { ksets, gap, pooled_stderr }
    }

    /// Gap in units of the pooled standard error; 0 when both are exact.
    pub fn z_score(&self) -> f64 {
        if self.pooled_stderr > 0.0 {
            self.gap / self.pooled_stderr
        } else if self.gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Recovery probability against the expected k-set fraction, with and
/// without the origin on the complement side.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Theorem3Report {
    pub distribution: DistributionSpec,
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub recovery: Estimate,
    pub augmented: KsetComparison,
    pub literal: KsetComparison,
}

#[allow(clippy::too_many_arguments)]
pub fn verify_theorem3(
    dist: DistributionSpec,
    m: usize,
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
    settings: &SolverSettings,
    exec: Execution,
) -> Result<Theorem3Report> {
    let recovery = estimate_recovery_prob(dist, m, n, k, trials, seed, settings, exec)?;
    let aug = estimate_expected_ksets(dist, m, n, k, trials, seed, true, settings, exec)?;
    let lit = estimate_expected_ksets(dist, m, n, k, trials, seed, false, settings, exec)?;
    Ok(Theorem3Report {
        distribution: dist,
        m,
        n,
        k,
        trials,
        recovery,
        augmented: KsetComparison::new(&recovery, aug),
        literal: KsetComparison::new(&recovery, lit),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s() -> SolverSettings {
        SolverSettings::default()
    }

    fn line(xs: &[f64]) -> PointCloud {
        PointCloud::from_points(&xs.iter().map(|&x| vec![x]).collect::<Vec<_>>()).unwrap()
    }

    fn square() -> PointCloud {
        PointCloud::from_points(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()
    }

    fn hexagon() -> PointCloud {
        let pts: Vec<Vec<f64>> = (0..6)
            .map(|i| {
                let t = std::f64::consts::PI * i as f64 / 3.0;
                vec![t.cos(), t.sin()]
            })
            .collect();
        PointCloud::from_points(&pts).unwrap()
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(100, 50), 100891344545564193334812497256);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(200, 100), u128::MAX);
    }

    #[test]
    fn separability_examples() {
        let c = line(&[0.0, 1.0, 2.0]);
        assert!(is_separable(&c, &[2], false, &s()).unwrap());
        assert!(!is_separable(&c, &[1], false, &s()).unwrap());
        assert!(!is_separable(&square(), &[0, 2], false, &s()).unwrap());
        assert!(is_separable(&square(), &[0, 1], false, &s()).unwrap());
    }

    #[test]
    fn separability_input_errors() {
        let c = line(&[0.0, 1.0]);
        assert!(is_separable(&c, &[], false, &s()).is_err());
        assert!(is_separable(&c, &[0, 1], false, &s()).is_err());
        assert!(is_separable(&c, &[0, 0], false, &s()).is_err());
        assert!(is_separable(&c, &[5], false, &s()).is_err());
    }

    #[test]
    fn count_examples() {
        for exec in [Execution::Sequential, Execution::Parallel] {
            assert_eq!(count_ksets(&square(), 2, false, DEFAULT_SUBSET_CAP, &s(), exec).unwrap().count, 4);
            assert_eq!(count_ksets(&hexagon(), 2, false, DEFAULT_SUBSET_CAP, &s(), exec).unwrap().count, 6);
            let r = count_ksets(&line(&[0.0, 1.0, 2.0]), 1, false, DEFAULT_SUBSET_CAP, &s(), exec).unwrap();
            assert_eq!(r.count, 2);
            assert!((r.ratio - 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn full_subset_convention() {
        let r = count_ksets(&square(), 4, false, DEFAULT_SUBSET_CAP, &s(), Execution::Sequential).unwrap();
        assert_eq!((r.count, r.ratio), (1, 1.0));
        // the origin is a vertex of the square, so it cannot be cut off
        let r = count_ksets(&square(), 4, true, DEFAULT_SUBSET_CAP, &s(), Execution::Sequential).unwrap();
        assert_eq!(r.count, 0);
        let r = count_ksets(&line(&[1.0, 2.0]), 2, true, DEFAULT_SUBSET_CAP, &s(), Execution::Sequential).unwrap();
        assert_eq!(r.count, 1);
    }

    #[test]
    fn cap_is_enforced() {
        let c = line(&[0.0, 1.0, 2.0, 3.0, 4.0]);
        let err = count_ksets(&c, 2, false, 9, &s(), Execution::Sequential).unwrap_err();
        assert_eq!(err, Error::SizeCap { requested: 10, cap: 9 });
    }

    #[test]
    fn convex_position_counts_n() {
        for k in 1..6 {
            let r = count_ksets(&hexagon(), k, false, DEFAULT_SUBSET_CAP, &s(), Execution::Sequential).unwrap();
            assert_eq!(r.count, 6, "k = {k}");
        }
    }

    #[test]
    fn full_rank_estimates_are_exact() {
        let p = estimate_recovery_prob(DistributionSpec::D1, 3, 3, 1, 20, 5, &s(), Execution::Parallel).unwrap();
        assert_eq!((p.mean, p.stderr), (1.0, 0.0));
        for k in 1..=3 {
            let e =
                estimate_expected_ksets(DistributionSpec::D3, 3, 3, k, 10, 5, true, &s(), Execution::Parallel).unwrap();
            assert_eq!(e.ratio.mean, 1.0);
            assert_eq!(e.count.mean, binomial(3, k) as f64);
        }
        let r = verify_theorem3(DistributionSpec::D1, 3, 3, 1, 10, 9, &s(), Execution::Sequential).unwrap();
        assert_eq!(r.augmented.gap, 0.0);
        assert_eq!(r.augmented.z_score(), 0.0);
    }

    #[test]
    fn single_trial_is_an_indicator_and_deterministic() {
        for seed in 0..5 {
            let p =
                estimate_recovery_prob(DistributionSpec::D1, 1, 4, 2, 1, seed, &s(), Execution::Sequential).unwrap();
            assert!(p.mean == 0.0 || p.mean == 1.0);
            let a = estimate_expected_ksets(DistributionSpec::D1, 2, 5, 2, 1, seed, false, &s(), Execution::Parallel)
                .unwrap();
            let b = estimate_expected_ksets(DistributionSpec::D1, 2, 5, 2, 1, seed, false, &s(), Execution::Sequential)
                .unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn planar_four_points_bracket() {
        for seed in 0..30 {
            let e = estimate_expected_ksets(DistributionSpec::D1, 2, 4, 2, 1, seed, false, &s(), Execution::Sequential)
                .unwrap();
            assert!((4.0..=6.0).contains(&e.count.mean), "X = {}", e.count.mean);
        }
    }

    #[test]
    fn estimator_input_errors() {
        let d = DistributionSpec::D1;
        assert!(estimate_recovery_prob(d, 2, 4, 2, 0, 1, &s(), Execution::Sequential).is_err());
        assert!(estimate_recovery_prob(d, 2, 4, 0, 3, 1, &s(), Execution::Sequential).is_err());
        assert!(matches!(
            estimate_expected_ksets(d, 2, 60, 30, 1, 1, true, &s(), Execution::Sequential),
            Err(Error::SizeCap { .. })
        ));
    }
}
