//! Path following for one-parameter families of boundary curves, fold
//! bracketing and mod-2 counts of minimal half disks.
//!
//! Branches are followed with a secant predictor and a Newton corrector.
//! A branch ends at a fold when the corrector fails and the smallest
//! singular value of the linearization has dropped; the fold is bracketed
//! by bisection in `t`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::minimal_disk::{
    boundary_extension, newton_solve_with, singular_extremes, BoundaryCurve, Embedding, MetricField, NewtonOptions, TransversalField, Vec3,
};
use crate::{Error, Result};

pub type CurveFamily = Arc<dyn Fn(f64) -> BoundaryCurve + Send + Sync>;
pub type MetricFamily = Arc<dyn Fn(f64) -> MetricField + Send + Sync>;

/// `t ↦ γ(t)` on `[0, 1]`, optionally with a metric family.
#[derive(Clone)]
pub struct CurvePath {
    pub name: String,
    curve: CurveFamily,
    metric: Option<MetricFamily>,
    /// Sampled Lipschitz constant of `t ↦ γ(t)` in the sup norm.
    pub lipschitz: f64,
}

impl core::fmt::Debug for CurvePath {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "CurvePath({}, L = {:.3e})", self.name, self.lipschitz)
    }
}

fn sup_distance(a: &BoundaryCurve, b: &BoundaryCurve) -> f64 {
    (0..=32)
        .map(|i| {
            let th = PI * i as f64 / 32.0;
            let (x, y) = (a.eval(th).0, b.eval(th).0);
            (0..3).map(|c| (x[c] - y[c]).abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
}

impl CurvePath {
    pub fn new(name: &str, curve: impl Fn(f64) -> BoundaryCurve + Send + Sync + 'static) -> Self {
        let curve: CurveFamily = Arc::new(curve);
        let samples = 32;
        let lipschitz = (0..samples)
            .map(|i| {
                let (t0, t1) = (i as f64 / samples as f64, (i + 1) as f64 / samples as f64);
                sup_distance(&curve(t0), &curve(t1)) / (t1 - t0)
            })
            .fold(0.0, f64::max);
        CurvePath { name: name.into(), curve, metric: None, lipschitz }
    }

    pub fn constant(gamma: BoundaryCurve) -> Self {
        Self::new("constant", move |_| gamma.clone())
    }

    /// `γ(t) = γ₀ + t·v`; `v` must be parallel to `∂N₊`.
    pub fn translation(gamma: BoundaryCurve, v: Vec3) -> Self {
        Self::new("translation", move |t| {
            let g = gamma.clone();
            BoundaryCurve::new("translated", move |th| {
                let (x, d) = g.eval(th);
                ([x[0] + t * v[0], x[1] + t * v[1], x[2] + t * v[2]], d)
            })
        })
    }

    pub fn with_metric_family(mut self, metric: impl Fn(f64) -> MetricField + Send + Sync + 'static) -> Self {
        self.metric = Some(Arc::new(metric));
        self
    }

    pub fn curve(&self, t: f64) -> BoundaryCurve {
        (self.curve)(t)
    }

    /// The family metric at `t`, or `base` when the path has none.
    pub fn metric(&self, t: f64, base: &MetricField) -> MetricField {
        match &self.metric {
            Some(m) => m(t),
            None => base.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct BranchEntry {
    pub t: f64,
    pub embedding: Embedding,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldBracket {
    pub t_lo: f64,
    pub t_hi: f64,
    /// `σ_min` at the last converged point `t_lo`.
    pub sigma_lo: f64,
    /// `σ_min` at `(t_lo + t_hi)/2` when the corrector converges there.
    pub sigma_mid: Option<f64>,
    /// `σ_min` at the start of the branch.
    pub sigma_start: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    Fold(FoldBracket),
    /// The corrector failed without a drop of `σ_min`.
    Lost { t: f64 },
}

#[derive(Debug, Clone)]
pub struct SolutionBranch {
    /// Index of the first seed that converged to this branch.
    pub seed: usize,
    pub entries: Vec<BranchEntry>,
    pub termination: Termination,
    /// `max ‖f(t') − f(t)‖∞ / |t' − t|` over consecutive entries before the
    /// final bracketing.
    pub continuity: f64,
}

impl SolutionBranch {
    pub fn fold(&self) -> Option<FoldBracket> {
        match self.termination {
            Termination::Fold(b) => Some(b),
            _ => None,
        }
    }

    pub fn last(&self) -> &BranchEntry {
        self.entries.last().expect("branch has at least its start")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FollowOptions {
    pub newton: NewtonOptions,
    /// Bracket width at which bisection stops.
    pub bracket: f64,
    /// A failed corrector counts as a fold when `σ_min` has dropped below
    /// this fraction of its starting value.
    pub fold_ratio: f64,
    /// Largest accepted distance between prediction and correction.
    pub jump_tol: f64,
    /// Nodal distance under which two solutions are the same.
    pub dedup: f64,
}

impl Default for FollowOptions {
    fn default() -> Self {
        FollowOptions {
            newton: NewtonOptions { max_iter: 15, check_singular: false, ..NewtonOptions::default() },
            bracket: 1e-4,
            fold_ratio: 0.2,
            jump_tol: 0.1,
            dedup: 1e-6,
        }
    }
}

fn par_map<T: Send>(n: usize, f: impl Fn(usize) -> T + Send + Sync) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

fn entry(t: f64, f: Embedding, iterations: usize, residual: f64, metric: &MetricField, p: &TransversalField) -> Result<BranchEntry> {
    let (sigma_min, sigma_max) = singular_extremes(&f, metric, p)?;
    Ok(BranchEntry { t, embedding: f, sigma_min, sigma_max, iterations, residual })
}

fn extrapolate(entries: &[BranchEntry], t: f64) -> Embedding {
    let last = &entries[entries.len() - 1];
    if entries.len() < 2 {
        return last.embedding.clone();
    }
    let prev = &entries[entries.len() - 2];
    let w = (t - last.t) / (last.t - prev.t);
    let mut out = last.embedding.clone();
    for (o, (a, b)) in out.values.iter_mut().zip(last.embedding.values.iter().zip(&prev.embedding.values)) {
        for c in 0..3 {
            o[c] = a[c] + w * (a[c] - b[c]);
        }
    }
    out
}

/// Corrector at `t` from the secant prediction; `None` when Newton fails
/// or lands too far from the prediction.
fn correct(
    path: &CurvePath,
    base: &MetricField,
    p: &TransversalField,
    entries: &[BranchEntry],
    t: f64,
    opts: &FollowOptions,
) -> Result<Option<BranchEntry>> {
    let gamma = path.curve(t);
    let metric = path.metric(t, base);
    gamma.validate(&metric)?;
    let pred = extrapolate(entries, t);
    let pred = if pred.boundary_matches(&gamma, 0.0) { pred } else { boundary_extension(&gamma, &pred)? };
    match newton_solve_with(&gamma, &metric, p, &pred, opts.newton) {
        Ok(out) => {
            if out.embedding.max_distance(&pred) > opts.jump_tol {
                return Ok(None);
            }
            let r = *out.history.last().unwrap_or(&0.0);
            Ok(Some(entry(t, out.embedding, out.iterations, r, &metric, p)?))
        }
        Err(Error::Divergence { .. }) | Err(Error::JacobiKernel(_)) | Err(Error::Degenerate(_)) | Err(Error::Singular(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn continuity(entries: &[BranchEntry]) -> f64 {
    entries
        .windows(2)
        .map(|w| w[1].embedding.max_distance(&w[0].embedding) / (w[1].t - w[0].t))
        .fold(0.0, f64::max)
}

fn follow_one(
    path: &CurvePath,
    base: &MetricField,
    p: &TransversalField,
    start: BranchEntry,
    seed: usize,
    steps: usize,
    opts: &FollowOptions,
) -> Result<SolutionBranch> {
    let sigma_start = start.sigma_min;
    let mut entries = alloc::vec![start];
    for k in 1..=steps {
        let t = k as f64 / steps as f64;
        if let Some(e) = correct(path, base, p, &entries, t, opts)? {
            entries.push(e);
            continue;
        }
        let smooth = continuity(&entries);
        let mut hi = t;
        while hi - entries[entries.len() - 1].t > opts.bracket {
            let mid = 0.5 * (entries[entries.len() - 1].t + hi);
            match correct(path, base, p, &entries, mid, opts)? {
                Some(e) => entries.push(e),
                None => hi = mid,
            }
        }
        let last = &entries[entries.len() - 1];
        let termination = if last.sigma_min <= opts.fold_ratio * sigma_start {
            let mid = correct(path, base, p, &entries, 0.5 * (last.t + hi), opts)?.map(|e| e.sigma_min);
            Termination::Fold(FoldBracket { t_lo: last.t, t_hi: hi, sigma_lo: last.sigma_min, sigma_mid: mid, sigma_start })
        } else {
            Termination::Lost { t: hi }
        };
        return Ok(SolutionBranch { seed, entries, termination, continuity: smooth });
    }
    let c = continuity(&entries);
    Ok(SolutionBranch { seed, entries, termination: Termination::Completed, continuity: c })
}

pub fn follow_path(path: &CurvePath, metric: &MetricField, p: &TransversalField, seeds: &[Embedding], steps: usize) -> Result<Vec<SolutionBranch>> {
    follow_path_with(path, metric, p, seeds, steps, FollowOptions::default())
}

/// Follows every distinct solution reached from `seeds` at `t = 0` along
/// `path` with `steps` uniform steps (refined by bisection at failures).
pub fn follow_path_with(
    path: &CurvePath,
    metric: &MetricField,
    p: &TransversalField,
    seeds: &[Embedding],
    steps: usize,
    opts: FollowOptions,
) -> Result<Vec<SolutionBranch>> {
    if steps == 0 {
        return Err(Error::InvalidArgument("at least one continuation step is required".into()));
    }
    let gamma0 = path.curve(0.0);
    let metric0 = path.metric(0.0, metric);
    gamma0.validate(&metric0)?;
    let starts = par_map(seeds.len(), |i| {
        newton_solve_with(&gamma0, &metric0, p, &seeds[i], opts.newton).ok().map(|o| (i, o))
    });
    let mut distinct: Vec<(usize, Embedding, usize, f64)> = Vec::new();
    for (i, o) in starts.into_iter().flatten() {
        if distinct.iter().all(|d| d.1.max_distance(&o.embedding) > opts.dedup) {
            let r = *o.history.last().unwrap_or(&0.0);
            distinct.push((i, o.embedding, o.iterations, r));
        }
    }
    if distinct.is_empty() {
        return Err(Error::NoSeedConverged);
    }
    let branches = par_map(distinct.len(), |b| {
        let (seed, f, its, r) = distinct[b].clone();
        let start = entry(0.0, f, its, r, &metric0, p)?;
        follow_one(path, metric, p, start, seed, steps, &opts)
    });
    branches.into_iter().collect()
}

/// Distinct solutions reached from a seed set.
#[derive(Debug, Clone)]
pub struct SolutionCensus {
    pub solutions: Vec<Embedding>,
    pub areas: Vec<f64>,
    /// `σ_min / σ_max` per solution.
    pub sigma_ratio: Vec<f64>,
    pub seeds_converged: usize,
    /// Pairs with equal area (within `1e-8`) that differ nodally; possibly
    /// reparametrizations of one surface.
    pub equal_area_pairs: Vec<(usize, usize)>,
}

impl SolutionCensus {
    pub fn count(&self) -> usize {
        self.solutions.len()
    }
}

/// Solves from every seed (in parallel) and deduplicates the converged
/// solutions at nodal distance `dedup`.
pub fn census(
    gamma: &BoundaryCurve,
    metric: &MetricField,
    p: &TransversalField,
    seeds: &[Embedding],
    newton: NewtonOptions,
    dedup: f64,
) -> Result<SolutionCensus> {
    gamma.validate(metric)?;
    let solved = par_map(seeds.len(), |i| newton_solve_with(gamma, metric, p, &seeds[i], newton).ok().map(|o| o.embedding));
    let converged: Vec<Embedding> = solved.into_iter().flatten().collect();
    let seeds_converged = converged.len();
    let mut solutions: Vec<Embedding> = Vec::new();
    for f in converged {
        if solutions.iter().all(|s| s.max_distance(&f) > dedup) {
            solutions.push(f);
        }
    }
    let areas: Vec<f64> = solutions.iter().map(|f| f.area(metric)).collect();
    let mut sigma_ratio = Vec::with_capacity(solutions.len());
    for f in &solutions {
        let (lo, hi) = singular_extremes(f, metric, p)?;
        sigma_ratio.push(lo / hi);
    }
    let mut equal_area_pairs = Vec::new();
    for i in 0..areas.len() {
        for j in i + 1..areas.len() {
            if (areas[i] - areas[j]).abs() <= 1e-8 {
                equal_area_pairs.push((i, j));
            }
        }
    }
    Ok(SolutionCensus { solutions, areas, sigma_ratio, seeds_converged, equal_area_pairs })
}

#[derive(Debug, Clone)]
pub struct ParityReport {
    /// Number of distinct solutions modulo 2.
    pub parity: u8,
    pub census: SolutionCensus,
}

/// Mod-2 count of the distinct solutions reached from `seeds`. Refused when
/// some solution has `σ_min ≤ 1e-6 σ_max` (not a regular value).
pub fn parity_count(gamma: &BoundaryCurve, metric: &MetricField, p: &TransversalField, seeds: &[Embedding]) -> Result<ParityReport> {
    let opts = FollowOptions::default();
    let census = census(gamma, metric, p, seeds, opts.newton, opts.dedup)?;
    if let Some(i) = census.sigma_ratio.iter().position(|r| *r <= 1e-6) {
        return Err(Error::NotRegular(format!("solution {i} has σ_min/σ_max = {:e}", census.sigma_ratio[i])));
    }
    Ok(ParityReport { parity: (census.count() % 2) as u8, census })
}

/// Metric family `(1 + a(t) e^{−y²/2w²}) δ` with `a(t) = a₀ + t(a₁ − a₀)`
/// over the fixed semicircle in the plane `y = offset`. An offset off the
/// ridge crest unfolds the symmetric pitchfork into a fold.
pub fn ridge_amplitude_path(offset: f64, a0: f64, a1: f64, width: f64) -> CurvePath {
    let mut path = CurvePath::constant(BoundaryCurve::semicircle(1.0, [0.0, offset, 0.0]))
        .with_metric_family(move |t| MetricField::ridge(a0 + t * (a1 - a0), width));
    path.name = "ridge-amplitude".into();
    path
}

/// Seeds `(x, c(1 − x² − y²), y)` for a spread of heights `c`.
pub fn bump_seeds(mesh: &Arc<crate::minimal_disk::HalfDiskMesh>, heights: &[f64]) -> Vec<Embedding> {
    heights
        .iter()
        .map(|&c| Embedding::from_fn(mesh.clone(), move |q| [q[0], c * (1.0 - q[0] * q[0] - q[1] * q[1]), q[1]]))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minimal_disk::HalfDiskMesh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn setup(n: usize, metric: &MetricField) -> (Arc<HalfDiskMesh>, Embedding, TransversalField) {
        let mesh = HalfDiskMesh::new(n).unwrap();
        let f = Embedding::flat(mesh.clone());
        let p = TransversalField::constant(&f, metric, [0.0, 1.0, 0.0]);
        (mesh, f, p)
    }

    #[test]
    fn translations_give_one_regular_branch() {
        let g = MetricField::euclidean();
        let (mesh, f, p) = setup(10, &g);
        let path = CurvePath::translation(BoundaryCurve::semicircle(1.0, [0.0; 3]), [0.4, 0.3, 0.0]);
        assert!((path.lipschitz - 0.4).abs() < 1e-12);
        let seeds = bump_seeds(&mesh, &[0.0, 0.05, -0.05]);
        let branches = follow_path(&path, &g, &p, &seeds, 4).unwrap();
        assert_eq!(branches.len(), 1);
        let b = &branches[0];
        assert_eq!(b.termination, Termination::Completed);
        assert_eq!(b.entries.len(), 5);
        let s0 = b.entries[0].sigma_min;
        for e in &b.entries {
            assert!(e.sigma_min > 0.5 * s0);
            let off = e.embedding.values.iter().map(|v| (v[1] - 0.3 * e.t).abs()).fold(0.0, f64::max);
            assert!(off <= 1e-9, "{off:e} at {}", e.t);
            assert!(e.embedding.boundary_matches(&path.curve(e.t), 1e-12));
        }
        let c = b.continuity;
        assert!(c.is_finite() && c < 2.0, "{c}");
        let _ = f;
    }

    #[test]
    fn constant_path_repeats_the_start() {
        let g = MetricField::bump(0.05, [0.1, 0.3, 0.4], 0.8);
        let (mesh, _, p) = setup(10, &g);
        let path = CurvePath::constant(BoundaryCurve::semicircle(1.0, [0.0; 3]));
        let branches = follow_path(&path, &g, &p, &bump_seeds(&mesh, &[0.0]), 3).unwrap();
        let b = &branches[0];
        for e in &b.entries {
            assert!(e.embedding.max_distance(&b.entries[0].embedding) <= 1e-9);
        }
        assert_eq!(path.lipschitz, 0.0);
    }

    #[test]
    fn parity_of_flat_disk_with_random_seeds() {
        let g = MetricField::euclidean();
        let (mesh, _, p) = setup(10, &g);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut seeds = bump_seeds(&mesh, &[0.0]);
        for _ in 0..5 {
            let c: [f64; 3] = core::array::from_fn(|_| rng.gen_range(-0.1..0.1));
            seeds.push(Embedding::from_fn(mesh.clone(), move |q| {
                let b = 1.0 - q[0] * q[0] - q[1] * q[1];
                [q[0], b * (c[0] + c[1] * q[0] + c[2] * q[1]), q[1]]
            }));
        }
        let gamma = BoundaryCurve::semicircle(1.0, [0.0; 3]);
        let r = parity_count(&gamma, &g, &p, &seeds).unwrap();
        assert_eq!(r.parity, 1);
        assert_eq!(r.census.count(), 1);
        let mut shuffled: Vec<Embedding> = seeds.iter().rev().cloned().collect();
        shuffled.extend(seeds.iter().take(3).cloned());
        assert_eq!(parity_count(&gamma, &g, &p, &shuffled).unwrap().parity, 1);
    }

    fn ridge_seeds(mesh: &Arc<HalfDiskMesh>) -> Vec<Embedding> {
        bump_seeds(mesh, &[-0.6, -0.4, -0.25, -0.1, 0.0, 0.1, 0.25, 0.4, 0.6])
    }

    #[test]
    fn ridge_fold_is_bracketed_with_even_count_change() {
        let path = ridge_amplitude_path(0.05, 1.5, 0.8, 0.25);
        let g0 = path.metric(0.0, &MetricField::euclidean());
        let (mesh, _, p) = setup(12, &g0);
        let seeds = ridge_seeds(&mesh);
        let branches = follow_path(&path, &g0, &p, &seeds, 10).unwrap();
        assert_eq!(branches.len(), 3);
        let folds: Vec<FoldBracket> = branches.iter().filter_map(|b| b.fold()).collect();
        assert_eq!(folds.len(), 2);
        for f in &folds {
            assert!(f.t_hi - f.t_lo <= 1e-4 + 1e-15);
            assert!(f.sigma_lo < 0.05 * f.sigma_start);
            if let Some(m) = f.sigma_mid {
                assert!(m < 10.0 * f.sigma_lo);
            }
        }
        assert!((folds[0].t_lo - folds[1].t_lo).abs() <= 2e-4);
        let lo = folds.iter().map(|f| f.t_lo).fold(1.0, f64::min);
        let hi = folds.iter().map(|f| f.t_hi).fold(0.0, f64::max);
        let mut all = seeds.clone();
        all.extend(branches.iter().map(|b| b.last().embedding.clone()));
        let o = FollowOptions::default();
        let count = |t: f64| census(&path.curve(t), &path.metric(t, &g0), &p, &all, o.newton, o.dedup).unwrap().count();
        let (before, after) = (count(lo), count(hi));
        assert_eq!((before, after), (3, 1));
        let completed = branches.iter().find(|b| b.termination == Termination::Completed).unwrap();
        assert!(completed.last().sigma_min > 0.2 * completed.entries[0].sigma_min);
    }

    #[test]
    fn fold_free_family_keeps_parity() {
        let path = ridge_amplitude_path(0.15, 1.0, 0.6, 0.25);
        let g0 = path.metric(0.0, &MetricField::euclidean());
        let (mesh, _, p) = setup(10, &g0);
        let seeds = ridge_seeds(&mesh);
        let branches = follow_path(&path, &g0, &p, &seeds, 5).unwrap();
        assert!(branches.iter().all(|b| b.termination == Termination::Completed));
        let p0 = parity_count(&path.curve(0.0), &path.metric(0.0, &g0), &p, &seeds).unwrap();
        let p1 = parity_count(&path.curve(1.0), &path.metric(1.0, &g0), &p, &seeds).unwrap();
        assert_eq!(p0.parity, p1.parity);
    }

    #[test]
    fn near_singular_solution_is_refused() {
        let mesh = HalfDiskMesh::new(8).unwrap();
        let f = Embedding::flat(mesh.clone());
        let gamma = BoundaryCurve::semicircle(1.0, [0.0; 3]);
        let sigma = |a: f64| {
            let g = MetricField::ridge(a, 0.25);
            let p = TransversalField::constant(&f, &g, [0.0, 1.0, 0.0]);
            let (lo, hi) = singular_extremes(&f, &g, &p).unwrap();
            lo / hi
        };
        let (mut a, mut b) = (0.5, 0.65);
        for _ in 0..60 {
            let (m1, m2) = (a + (b - a) / 3.0, b - (b - a) / 3.0);
            if sigma(m1) < sigma(m2) {
                b = m2;
            } else {
                a = m1;
            }
        }
        let critical = 0.5 * (a + b);
        let g = MetricField::ridge(critical, 0.25);
        let p = TransversalField::constant(&f, &g, [0.0, 1.0, 0.0]);
        let r = parity_count(&gamma, &g, &p, core::slice::from_ref(&f));
        assert!(matches!(r, Err(Error::NotRegular(_))), "{:?}", r.map(|r| r.census.sigma_ratio));
        let g = MetricField::ridge(critical + 0.05, 0.25);
        assert!(parity_count(&gamma, &g, &p, &[f]).is_ok());
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(6))]
        #[test]
        fn parity_ignores_seed_order_and_duplicates(order in proptest::sample::subsequence((0..6).collect::<Vec<usize>>(), 1..6), dup in 0usize..6, shift in 0usize..6) {
            let g = MetricField::ridge(1.0, 0.25);
            let (mesh, _, p) = setup(8, &g);
            let seeds = bump_seeds(&mesh, &[-0.4, -0.2, 0.0, 0.1, 0.25, 0.4]);
            let gamma = BoundaryCurve::semicircle(1.0, [0.0; 3]);
            let base = parity_count(&gamma, &g, &p, &seeds).unwrap().parity;
            let mut shuffled: Vec<Embedding> = seeds.clone();
            shuffled.rotate_left(shift);
            shuffled.extend(order.iter().map(|&i| seeds[i].clone()));
            shuffled.push(seeds[dup].clone());
            let r = parity_count(&gamma, &g, &p, &shuffled).unwrap();
            proptest::prop_assert_eq!(r.parity, base);
        }
    }

    #[test]
    fn all_seeds_failing_is_an_error() {
        let g = MetricField::euclidean();
        let (mesh, _, p) = setup(8, &g);
        let path = CurvePath::constant(BoundaryCurve::semicircle(1.0, [0.0; 3]));
        let wild = Embedding::from_fn(mesh, |q| [q[0], 1e6 * (1.0 - q[0] * q[0] - q[1] * q[1]), q[1]]);
        let r = follow_path(&path, &g, &p, &[wild], 2);
        assert!(matches!(r, Err(Error::NoSeedConverged)), "{r:?}");
    }
}
