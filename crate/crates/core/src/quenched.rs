//! The quenched Monte-Carlo harness: pin one realization of the past, draw
//! many independent futures, and test the normalized centered-sum paths
//! against the Brownian-sheet limit — marginal Kolmogorov-Smirnov tests and
//! finite-dimensional covariance checks.

use std::sync::Arc;

use rayon::prelude::*;

use crate::fields::{sigma2_theoretical, FieldModel};
use crate::innovations::{mix64, InnovationSpec, SeedContext};
use crate::lattice::Rect;
use crate::stats::{ks_test_normal, ks_two_sample, ks_two_sample_critical, KsResult};
use crate::sums::{centered_path, raw_path, PathSample, TGrid};
use crate::{Error, Real, Result};

/// Summation regime: cubes `(N, ..., N)` or general rectangles.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SummationMode {
    Cubic,
    Rectangular,
}

/// Full description of one quenched experiment.
#[derive(Clone, Debug)]
pub struct QuenchedConfig<F: Real> {
    pub model: FieldModel<F>,
    pub spec: InnovationSpec<F>,
    pub mode: SummationMode,
    pub n_list: Vec<Rect>,
    pub grid: Arc<TGrid<F>>,
    pub trials: usize,
    pub omega_seeds: Vec<u64>,
    pub master_salt: u64,
    /// Family-wise test level; Bonferroni-corrected across grid points.
    pub alpha: F,
}

impl<F: Real> QuenchedConfig<F> {
    pub fn validate(&self) -> Result<()> {
        if self.trials < 100 {
            return Err(Error::InvalidConfig(format!(
                "quenched run needs at least 100 trials, got {}",
                self.trials
            )));
        }
        if self.omega_seeds.is_empty() {
            return Err(Error::InvalidConfig("need at least one omega seed".into()));
        }
        if self.n_list.is_empty() {
            return Err(Error::InvalidConfig("need at least one rectangle".into()));
        }
        let dim = self.model.dim();
        for n in &self.n_list {
            if n.dim() != dim {
                return Err(Error::InvalidConfig(
                    "rectangle dimension does not match the model".into(),
                ));
            }
            if self.mode == SummationMode::Cubic && !n.is_square() {
                return Err(Error::InvalidConfig(format!(
                    "cubic mode requires square regions, got {n:?}"
                )));
            }
        }
        if self.alpha <= F::zero() || self.alpha >= F::one() {
            return Err(Error::InvalidConfig("alpha must lie in (0,1)".into()));
        }
        Ok(())
    }
}

/// The paths of one `(omega_seed, n)` cell.
#[derive(Clone, Debug)]
pub struct EnsembleRun<F: Real> {
    pub omega_seed: u64,
    pub n: Rect,
    pub paths: Vec<PathSample<F>>,
    /// Mean square of the path value at `t = (1, ..., 1)`.
    pub sigma2_empirical: F,
    /// Degenerate when fewer than two trials contribute.
    pub sigma2_degenerate: bool,
}

impl<F: Real> EnsembleRun<F> {
    /// Marginal sample at one grid point across trials.
    pub fn marginal(&self, point_index: usize) -> Vec<F> {
        self.paths.iter().map(|p| p.values[point_index]).collect()
    }
}

/// All runs of a quenched experiment.
#[derive(Clone, Debug)]
pub struct QuenchedEnsemble<F: Real> {
    pub runs: Vec<EnsembleRun<F>>,
    pub grid: Arc<TGrid<F>>,
    /// Average of the per-run terminal-point variance estimates.
    pub sigma2_empirical: F,
    pub sigma2_theoretical: F,
}

fn run_cell<F: Real>(
    cfg: &QuenchedConfig<F>,
    omega_seed: u64,
    n: &Rect,
    centered: bool,
) -> Result<EnsembleRun<F>> {
    let base = SeedContext::new(cfg.master_salt, omega_seed, 0);
    let paths: Vec<PathSample<F>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let ctx = base.derive_trial(t as u64);
            if centered {
                centered_path(&cfg.model, &cfg.spec, &ctx, n, &cfg.grid)
            } else {
                raw_path(&cfg.model, &cfg.spec, &ctx, n, &cfg.grid)
            }
        })
        .collect::<Result<_>>()?;
    let terminal = cfg.grid.terminal_index();
    let (sigma2, degenerate) = match terminal {
        Some(idx) if paths.len() >= 2 => {
            let sq: Vec<F> = paths.iter().map(|p| p.values[idx] * p.values[idx]).collect();
            (sq.iter().copied().sum::<F>() / F::cast_usize(sq.len()), false)
        }
        _ => (F::zero(), true),
    };
    Ok(EnsembleRun {
        omega_seed,
        n: *n,
        paths,
        sigma2_empirical: sigma2,
        sigma2_degenerate: degenerate,
    })
}

/// Run the full quenched experiment: every omega seed crossed with every
/// rectangle, `cfg.trials` centered paths each.
///
/// Deterministic in the config: trials are keyed by counters, reduced in
/// trial order regardless of the worker interleaving.
pub fn run_quenched_mc<F: Real>(cfg: &QuenchedConfig<F>) -> Result<QuenchedEnsemble<F>> {
    cfg.validate()?;
    let mut runs = Vec::with_capacity(cfg.omega_seeds.len() * cfg.n_list.len());
    for &omega in &cfg.omega_seeds {
        for n in &cfg.n_list {
            runs.push(run_cell(cfg, omega, n, true)?);
        }
    }
    let valid: Vec<F> = runs
        .iter()
        .filter(|r| !r.sigma2_degenerate)
        .map(|r| r.sigma2_empirical)
        .collect();
    let sigma2_empirical = if valid.is_empty() {
        F::zero()
    } else {
        valid.iter().copied().sum::<F>() / F::cast_usize(valid.len())
    };
    Ok(QuenchedEnsemble {
        runs,
        grid: Arc::clone(&cfg.grid),
        sigma2_empirical,
        sigma2_theoretical: sigma2_theoretical(&cfg.model, &cfg.spec).sigma2,
    })
}

/// KS test of the marginal at one grid point against
/// `Normal(0, sigma2 * prod_i t_i)`.
pub fn ks_marginal_test<F: Real>(
    run: &EnsembleRun<F>,
    sigma2: F,
    point_index: usize,
    alpha: F,
) -> Result<KsResult<F>> {
    if run.paths.len() < 500 {
        return Err(Error::InvalidConfig(format!(
            "KS marginal test needs at least 500 paths, got {}",
            run.paths.len()
        )));
    }
    if sigma2 <= F::zero() {
        return Err(Error::InvalidVariance(sigma2.to_f64().unwrap_or(f64::NAN)));
    }
    let point = &run.paths[0].grid.points()[point_index];
    let scale: F = point.iter().copied().fold(F::one(), |acc, t| acc * t);
    if scale == F::zero() {
        return Err(Error::InvalidVariance(0.0));
    }
    let samples = run.marginal(point_index);
    ks_test_normal(&samples, sigma2 * scale, alpha)
}

/// KS results at every grid point with a nonzero target variance, at the
/// Bonferroni-corrected per-point level `alpha / #points`.
pub fn ks_all_points<F: Real>(
    run: &EnsembleRun<F>,
    sigma2: F,
    alpha: F,
) -> Result<Vec<(usize, KsResult<F>)>> {
    let grid = &run.paths[0].grid;
    let testable: Vec<usize> = grid
        .points()
        .iter()
        .enumerate()
        .filter(|(_, p)| p.iter().all(|&t| t > F::zero()))
        .map(|(i, _)| i)
        .collect();
    let corrected = alpha / F::cast_usize(testable.len().max(1));
    testable
        .into_iter()
        .map(|i| Ok((i, ks_marginal_test(run, sigma2, i, corrected)?)))
        .collect()
}

/// One covariance comparison of the finite-dimensional check.
#[derive(Clone, Copy, Debug)]
pub struct FddPair<F: Real> {
    pub s_index: usize,
    pub t_index: usize,
    pub empirical: F,
    pub target: F,
    pub rel_error: F,
}

/// Result of [`fdd_covariance_check`].
#[derive(Clone, Debug)]
pub struct FddReport<F: Real> {
    pub pairs: Vec<FddPair<F>>,
    pub max_rel_error: F,
    pub paths_used: usize,
}

/// Compare empirical covariances of the path marginals against
/// `sigma2 * prod_i min(s_i, t_i)` over all grid pairs whose target is at
/// least `0.05 * sigma2`.
///
/// Paths are pooled across every run with rectangle `n` (the centered-path
/// law does not depend on the pinned past, so pooling across omega seeds is
/// sound and buys resolution).
pub fn fdd_covariance_check<F: Real>(
    ensemble: &QuenchedEnsemble<F>,
    n: &Rect,
    sigma2: F,
) -> Result<FddReport<F>> {
    if sigma2 <= F::zero() {
        return Err(Error::InvalidVariance(sigma2.to_f64().unwrap_or(f64::NAN)));
    }
    let paths: Vec<&PathSample<F>> = ensemble
        .runs
        .iter()
        .filter(|r| r.n == *n)
        .flat_map(|r| r.paths.iter())
        .collect();
    if paths.len() < 500 {
        return Err(Error::InvalidConfig(format!(
            "fdd covariance check needs at least 500 paths, got {}",
            paths.len()
        )));
    }
    let grid = &ensemble.grid;
    let npts = grid.len();
    if npts < 4 {
        return Err(Error::InvalidConfig(
            "fdd covariance check needs a grid of at least 4 points".into(),
        ));
    }
    let count = F::cast_usize(paths.len());
    let means: Vec<F> = (0..npts)
        .map(|i| paths.iter().map(|p| p.values[i]).sum::<F>() / count)
        .collect();
    let threshold = F::cast(0.05) * sigma2;
    let mut pairs = Vec::new();
    let mut max_rel = F::zero();
    for i in 0..npts {
        for j in i..npts {
            let target: F = grid.points()[i]
                .iter()
                .zip(&grid.points()[j])
                .fold(F::one(), |acc, (&a, &b)| acc * a.min(b))
                * sigma2;
            if target < threshold {
                continue;
            }
            let mut cov = F::zero();
            for p in &paths {
                cov += (p.values[i] - means[i]) * (p.values[j] - means[j]);
            }
            cov = cov / count;
            let rel = (cov / target - F::one()).abs();
            max_rel = max_rel.max(rel);
            pairs.push(FddPair {
                s_index: i,
                t_index: j,
                empirical: cov,
                target,
                rel_error: rel,
            });
        }
    }
    Ok(FddReport {
        pairs,
        max_rel_error: max_rel,
        paths_used: paths.len(),
    })
}

/// One pairwise comparison of quenched marginal laws.
#[derive(Clone, Copy, Debug)]
pub struct LawDistance<F: Real> {
    pub left: u64,
    pub right: u64,
    pub distance: F,
    pub critical: F,
    pub pass: bool,
}

/// Output of [`quenched_vs_annealed`].
#[derive(Clone, Debug)]
pub struct QuenchedVsAnnealed<F: Real> {
    /// Pairwise two-sample KS distances between distinct pinned pasts.
    pub pairwise: Vec<LawDistance<F>>,
    /// Each pinned past against the omega-resampling ensemble
    /// (`right` is the annealed pseudo-label `u64::MAX`).
    pub vs_annealed: Vec<LawDistance<F>>,
    pub all_pass: bool,
}

/// Compare the conditional laws of the *uncentered* normalized sums across
/// pinned pasts, and against an annealed ensemble that redraws the past
/// every trial.
///
/// The uncentered sums carry the past-measurable centering contribution, so
/// they are where a dependence on the pinned past shows up; the centered
/// sums are free of it by construction for the models built here.
pub fn quenched_vs_annealed<F: Real>(
    cfg: &QuenchedConfig<F>,
    n: &Rect,
) -> Result<QuenchedVsAnnealed<F>> {
    cfg.validate()?;
    if cfg.omega_seeds.len() < 2 {
        return Err(Error::InvalidConfig(
            "quenched-vs-annealed needs at least two omega seeds".into(),
        ));
    }
    let terminal = cfg
        .grid
        .terminal_index()
        .ok_or_else(|| Error::InvalidConfig("grid must contain the point (1, ..., 1)".into()))?;

    let mut per_omega: Vec<(u64, Vec<F>)> = Vec::new();
    for &omega in &cfg.omega_seeds {
        let run = run_cell(cfg, omega, n, false)?;
        per_omega.push((omega, run.marginal(terminal)));
    }

    // annealed: a fresh past per trial
    let annealed: Vec<F> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let omega = mix64(cfg.master_salt ^ 0xA11E_A1ED ^ (t as u64).wrapping_mul(0x9E37));
            let ctx = SeedContext::new(cfg.master_salt, omega, 0).derive_trial(t as u64);
            raw_path(&cfg.model, &cfg.spec, &ctx, n, &cfg.grid).map(|p| p.values[terminal])
        })
        .collect::<Result<_>>()?;

    let crit = |a: usize, b: usize| ks_two_sample_critical(cfg.alpha, a, b);
    let mut pairwise = Vec::new();
    for i in 0..per_omega.len() {
        for j in i + 1..per_omega.len() {
            let mut a = per_omega[i].1.clone();
            let mut b = per_omega[j].1.clone();
            let d = ks_two_sample(&mut a, &mut b);
            let critical = crit(a.len(), b.len());
            pairwise.push(LawDistance {
                left: per_omega[i].0,
                right: per_omega[j].0,
                distance: d,
                critical,
                pass: d <= critical,
            });
        }
    }
    let mut vs_annealed = Vec::new();
    for (omega, samples) in &per_omega {
        let mut a = samples.clone();
        let mut b = annealed.clone();
        let d = ks_two_sample(&mut a, &mut b);
        let critical = crit(a.len(), b.len());
        vs_annealed.push(LawDistance {
            left: *omega,
            right: u64::MAX,
            distance: d,
            critical,
            pass: d <= critical,
        });
    }
    let all_pass = pairwise.iter().chain(vs_annealed.iter()).all(|r| r.pass);
    Ok(QuenchedVsAnnealed {
        pairwise,
        vs_annealed,
        all_pass,
    })
}

/// KS distances (against the limiting normal) of the centered and the
/// uncentered normalized sums at `t = (1, ..., 1)`, for one pinned past.
/// Quantifies how much the random centering matters.
pub fn centering_contrast<F: Real>(
    cfg: &QuenchedConfig<F>,
    omega_seed: u64,
    n: &Rect,
    sigma2: F,
) -> Result<(F, F)> {
    let terminal = cfg
        .grid
        .terminal_index()
        .ok_or_else(|| Error::InvalidConfig("grid must contain the point (1, ..., 1)".into()))?;
    let centered = run_cell(cfg, omega_seed, n, true)?;
    let uncentered = run_cell(cfg, omega_seed, n, false)?;
    let kc = ks_marginal_test(&centered, sigma2, terminal, cfg.alpha)?;
    let ku = ks_marginal_test(&uncentered, sigma2, terminal, cfg.alpha)?;
    Ok((kc.statistic, ku.statistic))
}
