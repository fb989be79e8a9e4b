//! Brownian-sheet reference sampler: the centered Gaussian process on
//! `[0,1]^d` with covariance `prod_i min(s_i, t_i)`, discretized on a cell
//! lattice with independent `N(0, cell volume)` increments.

use std::sync::Arc;

use crate::innovations::SeedContext;
use crate::lattice::Rect;
use crate::stats::normal_quantile;
use crate::sums::{scaled_floor, PathSample, TGrid};
use crate::{Real, Result};

/// Sample one sheet path on `grid`, using `n_cells` increments per axis.
///
/// At a grid point `t` the value is the sum of all cell increments inside
/// `[0, floor(t * n_cells))`, so the covariance matches the min-product up
/// to the cell discretization (exactly, when the grid levels are multiples
/// of `1 / n_cells`).
pub fn brownian_sheet_sample<F: Real>(
    grid: &Arc<TGrid<F>>,
    n_cells: &Rect,
    seed: u64,
) -> Result<PathSample<F>> {
    let dim = n_cells.dim();
    let sides: Vec<usize> = n_cells.upper().coords().iter().map(|&c| c as usize).collect();
    let len: usize = sides.iter().product();
    let cell_sd = (F::one() / F::cast_i64(n_cells.volume())).sqrt();

    let ctx = SeedContext::new(seed, 0, seed);
    let mut cells: Vec<F> = (0..len)
        .map(|i| cell_sd * normal_quantile(F::cast(crate::innovations::unit_open(ctx.tagged_bits(0x5EE7, i as u64)))))
        .collect();

    // in-place inclusive prefix sums along each axis
    for axis in 0..dim {
        let stride: usize = sides[axis + 1..].iter().product();
        let side = sides[axis];
        for flat in 0..len {
            let coord = flat / stride % side;
            if coord > 0 {
                let prev = cells[flat - stride];
                cells[flat] = cells[flat] + prev;
            }
        }
    }

    let mut values = Vec::with_capacity(grid.len());
    for point in grid.points() {
        let mut flat = 0usize;
        let mut zero = false;
        for (axis, &t) in point.iter().enumerate() {
            let w = scaled_floor(t, sides[axis] as i64);
            if w == 0 {
                zero = true;
                break;
            }
            flat = flat * sides[axis] + (w as usize - 1);
        }
        values.push(if zero { F::zero() } else { cells[flat] });
    }

    Ok(PathSample {
        grid: Arc::clone(grid),
        values,
        n: *n_cells,
        normalization: F::one(),
        trial_seed: seed,
    })
}
