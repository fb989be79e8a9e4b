//! Scalar numeric utilities: compensated accumulation and bracketed
//! root finding for monotone functions.

use crate::{Error, Real, Result};

/// Neumaier-compensated accumulator.
///
/// Used wherever sums grow past a few thousand terms so that oracle
/// comparisons at 1e-12 absolute stay meaningful.
#[derive(Debug, Clone, Copy)]
pub struct CompensatedSum<F: Real> {
    sum: F,
    comp: F,
}

impl<F: Real> Default for CompensatedSum<F> {
    fn default() -> Self {
        Self {
            sum: F::zero(),
            comp: F::zero(),
        }
    }
}

impl<F: Real> CompensatedSum<F> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: F) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> F {
        self.sum + self.comp
    }
}

/// Sum a slice with compensation.
pub fn compensated_sum<F: Real>(values: &[F]) -> F {
    let mut acc = CompensatedSum::new();
    for &v in values {
        acc.add(v);
    }
    acc.value()
}

/// Expand `[lo, hi]` geometrically until `f(lo) <= target <= f(hi)`.
///
/// `f` must be nondecreasing. Both endpoints must stay positive; this is
/// only used for brackets on `(0, inf)`.
pub fn expand_bracket<F: Real>(
    f: impl Fn(F) -> F,
    target: F,
    mut lo: F,
    mut hi: F,
) -> Result<(F, F)> {
    let factor = F::cast(8.0);
    let mut guard = 0usize;
    while f(lo) > target {
        hi = lo;
        lo = lo / factor;
        guard += 1;
        if guard > 600 || lo <= F::zero() || !lo.is_finite() {
            return Err(Error::Numeric(format!(
                "bracket expansion failed below: target {target}"
            )));
        }
    }
    guard = 0;
    while f(hi) < target {
        lo = hi;
        hi = hi * factor;
        guard += 1;
        if guard > 600 || !hi.is_finite() {
            return Err(Error::Numeric(format!(
                "bracket expansion failed above: target {target}"
            )));
        }
    }
    Ok((lo, hi))
}

/// Solve `f(x) = target` for nondecreasing `f` by bisection on `[lo, hi]`.
///
/// Stops when the residual satisfies `|f(x) - target| <= rtol * max(1, |target|)`
/// or the interval width shrinks below `rtol * max(1, |x|)`.
pub fn solve_increasing<F: Real>(
    f: impl Fn(F) -> F,
    target: F,
    lo: F,
    hi: F,
    rtol: F,
) -> Result<F> {
    let (mut lo, mut hi) = expand_bracket(&f, target, lo, hi)?;
    let scale = F::one().max(target.abs());
    let mut mid = (lo + hi) / F::cast(2.0);
    for _ in 0..800 {
        mid = (lo + hi) / F::cast(2.0);
        let val = f(mid);
        if (val - target).abs() <= rtol * scale {
            return Ok(mid);
        }
        if val < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= rtol * F::one().max(mid.abs()) {
            return Ok((lo + hi) / F::cast(2.0));
        }
    }
    Ok(mid)
}

/// Solve `f(x) = target` for a strictly decreasing `f` on `(0, inf)`.
pub fn solve_decreasing<F: Real>(
    f: impl Fn(F) -> F,
    target: F,
    lo: F,
    hi: F,
    rtol: F,
) -> Result<F> {
    let neg = |x: F| -f(x);
    solve_increasing(neg, -target, lo, hi, rtol)
}
