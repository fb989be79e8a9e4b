//! Partial sums over rectangles, the quadrant-corner random centering, and
//! normalized centered-sum paths on a grid of time points in `[0,1]^d`.

use std::sync::Arc;

use crate::fields::{cond_expect_sum, field_eval, FieldModel};
use crate::innovations::{innovation_at, InnovationSpec, SeedContext};
use crate::lattice::{corner, BoxIter, CornerMask, MultiIndex, Rect};
use crate::numeric::CompensatedSum;
use crate::{Error, Real, Result};

/// `S_n = sum_{1 <= i <= n} X_i`.
pub fn partial_sum<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    n: &Rect,
) -> F {
    match model {
        FieldModel::Linear(m) => m.weighted_innovation_sum(spec, ctx, n.upper(), n.upper()),
        _ => {
            let mut acc = CompensatedSum::new();
            for i in BoxIter::new(MultiIndex::ones(n.dim()), *n.upper()) {
                acc.add(field_eval(model, spec, ctx, &i));
            }
            acc.value()
        }
    }
}

/// `R_n`, the signed sum of conditional expectations of `S_n` over the
/// `2^d - 1` proper quadrant corners.
pub fn random_centering<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    n: &Rect,
) -> Result<F> {
    let mut acc = CompensatedSum::new();
    for mask in CornerMask::nonempty(n.dim()) {
        let c = corner(n.upper(), mask)?;
        let term = cond_expect_sum(model, spec, ctx, n, &c)?;
        if mask.len() % 2 == 1 {
            acc.add(term);
        } else {
            acc.add(-term);
        }
    }
    Ok(acc.value())
}

/// `S_n - R_n`.
///
/// For linear models the centering algebra collapses to the innovation-weight
/// form supported on strictly positive sites, which is used as a fast path;
/// the generic signed-corner route is kept for everything else and for
/// cross-checking.
pub fn centered_sum<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    n: &Rect,
) -> Result<F> {
    match model {
        FieldModel::Linear(m) => {
            // inclusion-exclusion over corners kills every innovation with a
            // nonpositive coordinate, leaving sum_{m in [1, n]} W_n(m) xi_m
            let mut acc = CompensatedSum::new();
            for site in BoxIter::new(MultiIndex::ones(n.dim()), *n.upper()) {
                let w = m.window_weight(&site, n.upper());
                if w != F::zero() {
                    acc.add(w * innovation_at(spec, ctx, &site));
                }
            }
            Ok(acc.value())
        }
        FieldModel::IidDiff { .. } => Ok(partial_sum(model, spec, ctx, n)),
        FieldModel::Volterra(_) => {
            let s = partial_sum(model, spec, ctx, n);
            let r = random_centering(model, spec, ctx, n)?;
            Ok(s - r)
        }
    }
}

/// Generic `S_n - R_n` through the signed corner sums, with no model-specific
/// shortcut. Used to validate the fast path.
pub fn centered_sum_via_corners<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    n: &Rect,
) -> Result<F> {
    let s = partial_sum(model, spec, ctx, n);
    let r = random_centering(model, spec, ctx, n)?;
    Ok(s - r)
}

/// Exact variance of `S_n` (or of `Sbar_n` with `centered`) divided by
/// `|n|`, from the innovation-weight representation. Available for linear
/// and i.i.d.-difference models; Volterra variances are estimated by Monte
/// Carlo instead.
pub fn exact_variance_ratio<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    n: &Rect,
    centered: bool,
) -> Result<F> {
    let var = spec.variance();
    match model {
        FieldModel::IidDiff { .. } => Ok(var),
        FieldModel::Linear(m) => {
            let dim = n.dim();
            let lo = if centered {
                MultiIndex::ones(dim)
            } else {
                MultiIndex::splat(dim, 1 - m.radius())
            };
            let mut acc = CompensatedSum::new();
            for site in BoxIter::new(lo, *n.upper()) {
                let w = m.window_weight(&site, n.upper());
                acc.add(w * w);
            }
            Ok(var * acc.value() / F::cast_i64(n.volume()))
        }
        FieldModel::Volterra(_) => Err(Error::NotComputable {
            condition: "exact_variance_ratio",
            model: "volterra",
        }),
    }
}

/// Grid of evaluation points in `[0,1]^d`, shared across the paths of an
/// ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct TGrid<F: Real> {
    points: Vec<Vec<F>>,
}

impl<F: Real> TGrid<F> {
    pub fn from_points(points: Vec<Vec<F>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidConfig("grid must not be empty".into()));
        }
        let dim = points[0].len();
        for p in &points {
            if p.len() != dim {
                return Err(Error::InvalidConfig("grid points of mixed dimension".into()));
            }
            if p.iter().any(|&t| t < F::zero() || t > F::one()) {
                return Err(Error::InvalidConfig(format!(
                    "grid point {p:?} outside [0,1]^d"
                )));
            }
        }
        Ok(Self { points })
    }

    /// Cartesian power of one axis level set.
    pub fn cartesian(dim: usize, levels: &[F]) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidConfig("grid levels must not be empty".into()));
        }
        let mut points: Vec<Vec<F>> = vec![vec![]];
        for _ in 0..dim {
            let mut next = Vec::with_capacity(points.len() * levels.len());
            for p in &points {
                for &l in levels {
                    let mut q = p.clone();
                    q.push(l);
                    next.push(q);
                }
            }
            points = next;
        }
        Self::from_points(points)
    }

    /// The default `{0.25, 0.5, 0.75, 1}^d` grid.
    pub fn default_grid(dim: usize) -> Self {
        let levels = [F::cast(0.25), F::cast(0.5), F::cast(0.75), F::one()];
        Self::cartesian(dim, &levels).expect("static grid is valid")
    }

    pub fn points(&self) -> &[Vec<F>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Index of the grid point equal to `(1, ..., 1)`, if present.
    pub fn terminal_index(&self) -> Option<usize> {
        self.points
            .iter()
            .position(|p| p.iter().all(|&t| t == F::one()))
    }
}

/// `floor(t * n)` with a relative guard against representation error in `t`.
pub fn scaled_floor<F: Real>(t: F, n: i64) -> i64 {
    let x = t * F::cast_i64(n) + F::cast(1e-9);
    x.floor().to_i64().expect("scaled index fits i64")
}

/// One normalized centered-sum path evaluated on a grid.
#[derive(Clone, Debug)]
pub struct PathSample<F: Real> {
    pub grid: Arc<TGrid<F>>,
    /// `Sbar_{floor(t n)} / normalization` per grid point.
    pub values: Vec<F>,
    pub n: Rect,
    /// `sqrt(|n|)` (equals `N^(d/2)` in cubic mode).
    pub normalization: F,
    pub trial_seed: u64,
}

fn path_values<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    n: &Rect,
    grid: &Arc<TGrid<F>>,
    centered: bool,
) -> Result<PathSample<F>> {
    let dim = n.dim();
    let normalization = F::cast_i64(n.volume()).sqrt();
    let mut values = Vec::with_capacity(grid.len());
    for point in grid.points() {
        if point.len() != dim {
            return Err(Error::InvalidConfig(
                "grid dimension does not match rectangle".into(),
            ));
        }
        let mut window = MultiIndex::zeros(dim);
        let mut empty = false;
        for (axis, &t) in point.iter().enumerate() {
            let w = scaled_floor(t, n.upper().get(axis));
            if w == 0 {
                empty = true;
                break;
            }
            window.set(axis, w);
        }
        if empty {
            values.push(F::zero());
            continue;
        }
        let rect = Rect::new(window)?;
        let v = if centered {
            centered_sum(model, spec, ctx, &rect)?
        } else {
            partial_sum(model, spec, ctx, &rect)
        };
        values.push(v / normalization);
    }
    Ok(PathSample {
        grid: Arc::clone(grid),
        values,
        n: *n,
        normalization,
        trial_seed: ctx.trial_seed,
    })
}

/// The normalized centered path `t -> Sbar_{floor(t n)} / sqrt(|n|)`.
pub fn centered_path<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    n: &Rect,
    grid: &Arc<TGrid<F>>,
) -> Result<PathSample<F>> {
    path_values(model, spec, ctx, n, grid, true)
}

/// The uncentered path `t -> S_{floor(t n)} / sqrt(|n|)`, kept for
/// diagnostics that quantify how much the random centering matters.
pub fn raw_path<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    n: &Rect,
    grid: &Arc<TGrid<F>>,
) -> Result<PathSample<F>> {
    path_values(model, spec, ctx, n, grid, false)
}

/// One level of the centering-negligibility diagnostic.
#[derive(Clone, Debug)]
pub struct NegligibilityLevel<F: Real> {
    pub n: Rect,
    /// Monte-Carlo estimate of
    /// `E_omega[max_{1 <= m <= n} (E_{m^(axis)}[S_m])^2] / |n|`.
    pub value: F,
    pub stderr: F,
    /// Whether the max ran over a dyadic sublattice instead of all `m <= n`.
    pub dyadic_max: bool,
}

/// Decay table of the corner-conditional centering contribution, reported
/// over a doubling sequence of rectangles up to `n`.
#[derive(Clone, Debug)]
pub struct NegligibilityReport<F: Real> {
    pub axis: usize,
    pub levels: Vec<NegligibilityLevel<F>>,
}

impl<F: Real> NegligibilityReport<F> {
    pub fn is_decreasing(&self) -> bool {
        self.levels.windows(2).all(|w| w[1].value <= w[0].value)
    }
}

/// Estimate the quenched negligibility quantity for coordinate `axis`
/// (0-based) and a doubling sequence of rectangles ending at `n`.
///
/// The past is pinned by `omega_seed`; each trial resamples the future.
/// When `|n| > 10^4` the max runs over a per-coordinate dyadic sublattice,
/// which makes the value a lower bound used only as a decay indicator.
pub fn centering_negligibility<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    master_salt: u64,
    omega_seed: u64,
    axis: usize,
    n: &Rect,
    trials: usize,
) -> Result<NegligibilityReport<F>> {
    if trials < 100 {
        return Err(Error::InvalidConfig(format!(
            "negligibility diagnostic needs at least 100 trials, got {trials}"
        )));
    }
    let dim = model.dim();
    if axis >= dim {
        return Err(Error::InvalidConfig(format!(
            "axis {axis} out of range for dimension {dim}"
        )));
    }

    // doubling sequence n, n/2, n/4, n/8 (ascending), floored at 1
    let mut sequence = Vec::new();
    let mut current = *n.upper();
    for _ in 0..4 {
        sequence.push(Rect::new(current)?);
        if current.coords().iter().any(|&c| c < 2) {
            break;
        }
        for a in 0..dim {
            current.set(a, current.get(a) / 2);
        }
    }
    sequence.reverse();

    let base = SeedContext::new(master_salt, omega_seed, 0);
    let mut levels = Vec::new();
    for rect in sequence {
        let dyadic_max = rect.volume() > 10_000;
        let m_list: Vec<MultiIndex> = if dyadic_max {
            let mut per_axis: Vec<Vec<i64>> = Vec::new();
            for a in 0..dim {
                let top = rect.upper().get(a);
                let mut ticks = vec![];
                let mut v = 1i64;
                while v < top {
                    ticks.push(v);
                    v *= 2;
                }
                ticks.push(top);
                per_axis.push(ticks);
            }
            let mut out = vec![MultiIndex::zeros(dim)];
            for (a, ticks) in per_axis.iter().enumerate() {
                let mut next = Vec::with_capacity(out.len() * ticks.len());
                for m in &out {
                    for &t in ticks {
                        let mut q = *m;
                        q.set(a, t);
                        next.push(q);
                    }
                }
                out = next;
            }
            out
        } else {
            BoxIter::new(MultiIndex::ones(dim), *rect.upper()).collect()
        };

        let per_trial: Vec<F> = (0..trials)
            .map(|t| {
                let ctx = base.derive_trial(t as u64);
                let mut worst = F::zero();
                for m in &m_list {
                    let m_rect = Rect::new(*m).expect("m >= 1");
                    let c = corner(m, CornerMask::from_axes(&[axis])).expect("axis validated");
                    let e = cond_expect_sum(model, spec, &ctx, &m_rect, &c)
                        .expect("corner dominated by construction");
                    worst = worst.max(e * e);
                }
                worst / F::cast_i64(rect.volume())
            })
            .collect();
        let (mean, stderr) = crate::stats::mean_stderr(&per_trial);
        levels.push(NegligibilityLevel {
            n: rect,
            value: mean,
            stderr,
            dyadic_max,
        });
    }
    Ok(NegligibilityReport { axis, levels })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::CoefFamily;
    use approx::assert_relative_eq;

    fn mi(c: &[i64]) -> MultiIndex {
        MultiIndex::new(c)
    }

    fn ctx() -> SeedContext {
        SeedContext::new(31337, 5, 11)
    }

    fn gaussian() -> InnovationSpec<f64> {
        InnovationSpec::gaussian(1.0)
    }

    #[test]
    fn singleton_partial_sum_is_one_innovation() {
        let model = FieldModel::linear(2, 2, &CoefFamily::Delta).unwrap();
        let n = Rect::new(mi(&[1, 1])).unwrap();
        assert_eq!(
            partial_sum(&model, &gaussian(), &ctx(), &n),
            innovation_at(&gaussian(), &ctx(), &mi(&[1, 1]))
        );
    }

    #[test]
    fn partial_sum_block_additivity() {
        let model = FieldModel::linear(2, 3, &CoefFamily::Geometric { ratio: 0.5 }).unwrap();
        let spec = gaussian();
        let whole = partial_sum(&model, &spec, &ctx(), &Rect::new(mi(&[5, 8])).unwrap());
        let lower = partial_sum(&model, &spec, &ctx(), &Rect::new(mi(&[5, 4])).unwrap());
        let mut upper_block = 0.0;
        for i in BoxIter::new(mi(&[1, 5]), mi(&[5, 8])) {
            upper_block += field_eval(&model, &spec, &ctx(), &i);
        }
        assert_relative_eq!(whole, lower + upper_block, epsilon = 1e-10);
    }

    #[test]
    fn linear_fast_sum_matches_sitewise_sum() {
        let model = FieldModel::linear(2, 4, &CoefFamily::Geometric { ratio: 0.5 }).unwrap();
        let spec = gaussian();
        let n = Rect::new(mi(&[8, 8])).unwrap();
        let fast = partial_sum(&model, &spec, &ctx(), &n);
        let mut slow = 0.0;
        for i in BoxIter::new(mi(&[1, 1]), mi(&[8, 8])) {
            slow += field_eval(&model, &spec, &ctx(), &i);
        }
        assert_relative_eq!(fast, slow, epsilon = 1e-10);
    }

    #[test]
    fn centering_vanishes_for_martingale_difference_field() {
        let model = FieldModel::<f64>::iid_diff(2);
        let spec = gaussian();
        for side in [1i64, 2, 5, 16] {
            let n = Rect::square(2, side).unwrap();
            assert_eq!(random_centering(&model, &spec, &ctx(), &n).unwrap(), 0.0);
        }
    }

    #[test]
    fn centering_matches_two_dimensional_expansion() {
        let model = FieldModel::linear(2, 3, &CoefFamily::Geometric { ratio: 0.5 }).unwrap();
        let spec = gaussian();
        let n = Rect::new(mi(&[4, 3])).unwrap();
        let r = random_centering(&model, &spec, &ctx(), &n).unwrap();
        let row = cond_expect_sum(&model, &spec, &ctx(), &n, &mi(&[4, 0])).unwrap();
        let col = cond_expect_sum(&model, &spec, &ctx(), &n, &mi(&[0, 3])).unwrap();
        let past = cond_expect_sum(&model, &spec, &ctx(), &n, &mi(&[0, 0])).unwrap();
        assert_relative_eq!(r, row + col - past, epsilon = 1e-12);
    }

    #[test]
    fn centered_fast_path_agrees_with_corner_route() {
        let spec = gaussian();
        let models = [
            FieldModel::linear(2, 4, &CoefFamily::Geometric { ratio: 0.5 }).unwrap(),
            FieldModel::linear(2, 4, &CoefFamily::PolynomialDecay { alpha: 1.2 }).unwrap(),
            FieldModel::iid_diff(2),
        ];
        for model in &models {
            for n in [mi(&[4, 4]), mi(&[7, 3]), mi(&[1, 6])] {
                let rect = Rect::new(n).unwrap();
                let fast = centered_sum(model, &spec, &ctx(), &rect).unwrap();
                let slow = centered_sum_via_corners(model, &spec, &ctx(), &rect).unwrap();
                assert_relative_eq!(fast, slow, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn centered_equals_plain_sum_for_iid_diff() {
        let model = FieldModel::<f64>::iid_diff(2);
        let spec = gaussian();
        let n = Rect::new(mi(&[6, 9])).unwrap();
        assert_eq!(
            centered_sum(&model, &spec, &ctx(), &n).unwrap(),
            partial_sum(&model, &spec, &ctx(), &n)
        );
    }

    #[test]
    fn path_vanishes_at_origin_and_matches_full_sum_at_one() {
        let model = FieldModel::linear(2, 3, &CoefFamily::Geometric { ratio: 0.5 }).unwrap();
        let spec = gaussian();
        let n = Rect::new(mi(&[8, 8])).unwrap();
        let grid = Arc::new(
            TGrid::from_points(vec![vec![0.0, 0.0], vec![0.0, 0.7], vec![1.0, 1.0]]).unwrap(),
        );
        let path = centered_path(&model, &spec, &ctx(), &n, &grid).unwrap();
        assert_eq!(path.values[0], 0.0);
        assert_eq!(path.values[1], 0.0);
        let sbar = centered_sum(&model, &spec, &ctx(), &n).unwrap();
        assert_relative_eq!(path.values[2], sbar / 8.0, epsilon = 1e-12);
    }

    #[test]
    fn scaled_floor_handles_representation_error() {
        assert_eq!(scaled_floor(0.75f64, 64), 48);
        assert_eq!(scaled_floor(0.1f64, 30), 3);
        assert_eq!(scaled_floor(0.25f64, 10), 2);
        assert_eq!(scaled_floor(0.0f64, 64), 0);
    }

    #[test]
    fn default_grid_has_cartesian_structure() {
        let grid = TGrid::<f64>::default_grid(2);
        assert_eq!(grid.len(), 16);
        assert_eq!(grid.terminal_index(), Some(15));
        let grid3 = TGrid::<f64>::default_grid(3);
        assert_eq!(grid3.len(), 64);
    }

    #[test]
    fn negligibility_is_exactly_zero_for_annihilated_models() {
        let spec = gaussian();
        for model in [
            FieldModel::<f64>::iid_diff(2),
            FieldModel::linear(2, 2, &CoefFamily::Delta).unwrap(),
        ] {
            let n = Rect::new(mi(&[8, 8])).unwrap();
            let report =
                centering_negligibility(&model, &spec, 7, 1, 0, &n, 100).unwrap();
            for level in &report.levels {
                assert_eq!(level.value, 0.0, "{}", model.kind_name());
            }
        }
    }

    #[test]
    fn negligibility_rejects_small_trial_counts() {
        let model = FieldModel::<f64>::iid_diff(2);
        let err = centering_negligibility(
            &model,
            &gaussian(),
            7,
            1,
            0,
            &Rect::new(mi(&[4, 4])).unwrap(),
            10,
        );
        assert!(err.is_err());
    }

    #[test]
    fn centered_sum_is_orthogonal_to_removed_corner_conditionals() {
        // E[Sbar_n * E_corner[S_n]] should vanish within MC error
        let model = FieldModel::linear(2, 2, &CoefFamily::Geometric { ratio: 0.5 }).unwrap();
        let spec = gaussian();
        let n = Rect::new(mi(&[4, 4])).unwrap();
        for mask in CornerMask::nonempty(2) {
            let c = corner(n.upper(), mask).unwrap();
            let trials = 4000;
            let mut products = Vec::with_capacity(trials);
            for t in 0..trials {
                let tc = SeedContext::new(91, t as u64, 1 + t as u64);
                let sbar = centered_sum(&model, &spec, &tc, &n).unwrap();
                let cond = cond_expect_sum(&model, &spec, &tc, &n, &c).unwrap();
                products.push(sbar * cond);
            }
            let (mean, stderr) = crate::stats::mean_stderr(&products);
            assert!(
                mean.abs() <= 4.0 * stderr,
                "corner {c:?}: mean {mean}, stderr {stderr}"
            );
        }
    }
}
