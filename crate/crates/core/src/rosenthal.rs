//! Numerical verification of a Rosenthal-type moment inequality for
//! ortho-martingale difference fields in the `L^2 log^(d-1) L` Orlicz space:
//!
//! `sum_{u in [0, n-1]} E[Phi_d(d_u)]
//!     <= C1 * max( f_d(varphi_d^{-1}(C2 ||M_n||)), phi_d(C2 ||M_n||) )`
//!
//! with `M_n` the rectangular sum of the differences, `C1 = 12 (log 2)^(1-d)`
//! and `C2 = 2 * 3^((d+5)/2)` — the explicit constants the bound is proved
//! with. Both sides are computed here: the left side exactly where the
//! difference law makes it exact, by Monte Carlo otherwise; the norm on the
//! right from trial sums with a bootstrap confidence bound.

use rayon::prelude::*;

use crate::innovations::{mix64, Distribution, InnovationSpec, SeedContext};
use crate::lattice::Rect;
use crate::numeric::CompensatedSum;
use crate::orlicz::{luxemburg_norm, LuxemburgOpts, NormEstimate, YoungFamily, YoungKind};
use crate::{Error, Real, Result};

/// Ortho-martingale difference fields the check can generate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DiffField<F: Real> {
    /// I.i.d. centered differences `d_u = xi_u`.
    Iid(InnovationSpec<F>),
    /// Separable product differences `d_u = prod_i eta^(i)_(u_i)` with
    /// independent one-dimensional streams per axis; exercises genuine
    /// multi-parameter martingale structure.
    AxisProduct(InnovationSpec<F>),
}

impl<F: Real> DiffField<F> {
    pub fn spec(&self) -> &InnovationSpec<F> {
        match self {
            DiffField::Iid(s) | DiffField::AxisProduct(s) => s,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            DiffField::Iid(_) => "iid",
            DiffField::AxisProduct(_) => "axis_product",
        }
    }

    /// `|d_u|` is identically 1, making `E[Phi_d(|d_u|)]` exact.
    fn has_unit_magnitude(&self) -> bool {
        matches!(self.spec().dist, Distribution::Rademacher)
    }

    /// One draw of `d_0` from the trial stream `(salt, trial)`.
    fn sample_single(&self, ctx: &SeedContext, trial: u64, dim: usize) -> F {
        match self {
            DiffField::Iid(spec) => {
                spec_transform(spec, ctx.tagged_bits(0xD1FF, trial))
            }
            DiffField::AxisProduct(spec) => {
                let mut v = F::one();
                for axis in 0..dim {
                    v = v * spec_transform(spec, ctx.tagged_bits(0xA515 + axis as u64, trial));
                }
                v
            }
        }
    }

    /// One draw of `M_n = sum_{u in [0, n-1]} d_u`.
    fn sample_rect_sum(&self, ctx: &SeedContext, trial: u64, n: &Rect) -> F {
        match self {
            DiffField::Iid(spec) => {
                let vol = n.volume() as u64;
                let mut acc = CompensatedSum::new();
                for flat in 0..vol {
                    let bits = ctx.tagged_bits(0xD1FF, trial.wrapping_mul(0x1_0000_0001) ^ flat);
                    acc.add(spec_transform(spec, bits));
                }
                acc.value()
            }
            DiffField::AxisProduct(spec) => {
                // sum factorizes into a product of per-axis sums
                let mut v = F::one();
                for axis in 0..n.dim() {
                    let mut acc = CompensatedSum::new();
                    for k in 0..n.upper().get(axis) as u64 {
                        let bits = ctx.tagged_bits(
                            0xA515 + axis as u64,
                            trial.wrapping_mul(0x1_0000_0001) ^ k,
                        );
                        acc.add(spec_transform(spec, bits));
                    }
                    v = v * acc.value();
                }
                v
            }
        }
    }
}

fn spec_transform<F: Real>(spec: &InnovationSpec<F>, bits: u64) -> F {
    spec.draw_from_bits(bits)
}

/// Everything measured for one rectangle.
#[derive(Clone, Debug)]
pub struct RosenthalReport<F: Real> {
    pub n: Rect,
    pub d: usize,
    /// `sum_u E[Phi_d(d_u)] = |n| E[Phi_d(d_0)]`.
    pub lhs: F,
    pub lhs_exact: bool,
    pub m_norm: NormEstimate<F>,
    pub c1: F,
    pub c2: F,
    /// Right side at the norm point estimate.
    pub rhs: F,
    /// Right side at the 99% upper confidence bound of the norm.
    pub rhs_upper: F,
    /// False when the `f_d o varphi_d^{-1}` branch is unsupported for this
    /// `d` and only the power branch was used.
    pub fracpow_branch: bool,
    pub verdict: bool,
}

/// `C1 = 12 (log 2)^(1-d)`.
pub fn constant_c1<F: Real>(d: usize) -> F {
    F::cast(12.0) * F::cast(2f64.ln()).powi(1 - d as i32)
}

/// `C2 = 2 * 3^((d+5)/2)`.
pub fn constant_c2<F: Real>(d: usize) -> F {
    F::cast(2.0) * F::cast(3.0).powf(F::cast((d as f64 + 5.0) / 2.0))
}

/// Evaluate the right side at a given norm value. Returns the value and
/// whether the fractional-power branch participated.
pub fn rosenthal_rhs<F: Real>(fam: &YoungFamily<F>, m_norm: F) -> Result<(F, bool)> {
    let c1 = constant_c1::<F>(fam.d());
    let c2 = constant_c2::<F>(fam.d());
    let arg = c2 * m_norm;
    let power_branch = fam.eval(YoungKind::PhiPow, arg)?;
    match fam.fracpow_of_varphi_inverse(arg) {
        Ok(frac) => Ok((c1 * frac.max(power_branch), true)),
        Err(Error::UnsupportedInverse { .. }) => Ok((c1 * power_branch, false)),
        Err(e) => Err(e),
    }
}

/// Check the inequality for one rectangle.
///
/// `trials` controls both the Monte-Carlo sample for the left side (when it
/// is not exact) and the number of rectangular sums feeding the norm
/// estimate. The verdict compares the left side against the right side
/// evaluated at the norm's upper 99% bootstrap bound, so estimator noise
/// cannot produce spurious failures.
pub fn rosenthal_check<F: Real>(
    d: usize,
    diff: &DiffField<F>,
    n: &Rect,
    trials: usize,
    salt: u64,
) -> Result<RosenthalReport<F>> {
    if trials < 1000 {
        return Err(Error::InvalidConfig(format!(
            "rosenthal check needs at least 1000 trials, got {trials}"
        )));
    }
    let fam = YoungFamily::<F>::new(d)?;
    let ctx = SeedContext::new(salt, 0, mix64(salt ^ 0x6005));
    let volume = F::cast_i64(n.volume());

    let (lhs, lhs_exact) = if diff.has_unit_magnitude() {
        (volume * fam.eval(YoungKind::Phi, F::one())?, true)
    } else {
        let mean: F = (0..trials)
            .into_par_iter()
            .map(|t| {
                let x = diff.sample_single(&ctx, t as u64, n.dim()).abs();
                fam.eval(YoungKind::Phi, x)
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .sum::<F>()
            / F::cast_usize(trials);
        (volume * mean, false)
    };

    let sums: Vec<F> = (0..trials)
        .into_par_iter()
        .map(|t| diff.sample_rect_sum(&ctx, t as u64, n))
        .collect();
    let m_norm = luxemburg_norm(
        &fam,
        &sums,
        YoungKind::Phi,
        LuxemburgOpts {
            bootstrap: 200,
            seed: mix64(salt ^ 0x0075),
        },
    )?;

    let (rhs, fracpow_branch) = rosenthal_rhs(&fam, m_norm.value)?;
    let upper = m_norm.upper(F::cast(2.326));
    let (rhs_upper, _) = rosenthal_rhs(&fam, upper)?;

    Ok(RosenthalReport {
        n: *n,
        d,
        lhs,
        lhs_exact,
        m_norm,
        c1: constant_c1::<F>(d),
        c2: constant_c2::<F>(d),
        rhs,
        rhs_upper,
        fracpow_branch,
        verdict: lhs <= rhs_upper,
    })
}

/// One report per rectangle; an empty list yields an empty table.
pub fn rosenthal_sweep<F: Real>(
    d: usize,
    diff: &DiffField<F>,
    n_list: &[Rect],
    trials: usize,
    salt: u64,
) -> Result<Vec<RosenthalReport<F>>> {
    n_list
        .iter()
        .map(|n| rosenthal_check(d, diff, n, trials, salt))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constants_match_their_closed_forms() {
        assert_relative_eq!(constant_c1::<f64>(2), 12.0 / 2f64.ln(), max_relative = 1e-14);
        assert_relative_eq!(
            constant_c1::<f64>(3),
            12.0 / 2f64.ln().powi(2),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            constant_c2::<f64>(2),
            2.0 * 3f64.powf(3.5),
            max_relative = 1e-14
        );
        assert_relative_eq!(constant_c2::<f64>(3), 162.0, max_relative = 1e-14);
    }

    #[test]
    fn rademacher_lhs_is_exact() {
        let diff = DiffField::Iid(InnovationSpec::<f64>::rademacher());
        let n = Rect::square(2, 4).unwrap();
        let report = rosenthal_check(2, &diff, &n, 1000, 9).unwrap();
        assert!(report.lhs_exact);
        assert_relative_eq!(report.lhs, 16.0 * 2f64.ln(), max_relative = 1e-14);
        assert!(report.verdict);
    }

    #[test]
    fn unit_rectangle_norm_matches_constant_closed_form() {
        let diff = DiffField::Iid(InnovationSpec::<f64>::rademacher());
        let n = Rect::square(2, 1).unwrap();
        let report = rosenthal_check(2, &diff, &n, 1500, 21).unwrap();
        assert_relative_eq!(report.lhs, 2f64.ln(), max_relative = 1e-14);
        let fam = YoungFamily::<f64>::new(2).unwrap();
        let expect = 1.0 / fam.inverse(YoungKind::Phi, 1.0).unwrap();
        assert_relative_eq!(report.m_norm.value, expect, max_relative = 1e-6);
    }

    #[test]
    fn gaussian_and_product_fields_satisfy_the_bound() {
        for diff in [
            DiffField::Iid(InnovationSpec::<f64>::gaussian(1.0)),
            DiffField::AxisProduct(InnovationSpec::<f64>::gaussian(1.0)),
            DiffField::AxisProduct(InnovationSpec::<f64>::rademacher()),
        ] {
            let n = Rect::square(2, 8).unwrap();
            let report = rosenthal_check(2, &diff, &n, 2000, 33).unwrap();
            assert!(
                report.verdict,
                "{}: lhs {} vs rhs {}",
                diff.kind_name(),
                report.lhs,
                report.rhs_upper
            );
        }
    }

    #[test]
    fn fracpow_branch_flag_follows_dimension() {
        let fam2 = YoungFamily::<f64>::new(2).unwrap();
        let (_, has2) = rosenthal_rhs(&fam2, 1.0).unwrap();
        assert!(has2);
        let fam4 = YoungFamily::<f64>::new(4).unwrap();
        let (_, has4) = rosenthal_rhs(&fam4, 1.0).unwrap();
        assert!(!has4);
    }

    #[test]
    fn rhs_is_nondecreasing_in_the_norm() {
        for d in [2usize, 3] {
            let fam = YoungFamily::<f64>::new(d).unwrap();
            let mut prev = 0.0;
            for k in 1..=60 {
                let m = 10f64.powf(-3.0 + k as f64 * 0.1);
                let (rhs, _) = rosenthal_rhs(&fam, m).unwrap();
                assert!(rhs >= prev, "d={d} rhs not monotone at m={m}");
                prev = rhs;
            }
        }
    }

    #[test]
    fn sweep_preserves_order_and_handles_empty_input() {
        let diff = DiffField::Iid(InnovationSpec::<f64>::rademacher());
        let list = [
            Rect::square(2, 2).unwrap(),
            Rect::square(2, 4).unwrap(),
            Rect::square(2, 8).unwrap(),
        ];
        let reports = rosenthal_sweep(2, &diff, &list, 1000, 5).unwrap();
        assert_eq!(reports.len(), 3);
        for (r, n) in reports.iter().zip(&list) {
            assert_eq!(r.n, *n);
            assert!(r.verdict);
        }
        let empty = rosenthal_sweep(2, &diff, &[], 1000, 5).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn product_rect_sum_factorizes() {
        let diff = DiffField::AxisProduct(InnovationSpec::<f64>::gaussian(1.0));
        let ctx = SeedContext::new(4, 0, 8);
        let n = Rect::square(2, 3).unwrap();
        let direct = diff.sample_rect_sum(&ctx, 0, &n);
        // recompute from the per-axis draws
        let spec = InnovationSpec::<f64>::gaussian(1.0);
        let mut per_axis = [0.0f64; 2];
        for (axis, slot) in per_axis.iter_mut().enumerate() {
            for k in 0..3u64 {
                *slot += spec_transform(&spec, ctx.tagged_bits(0xA515 + axis as u64, k));
            }
        }
        assert_relative_eq!(direct, per_axis[0] * per_axis[1], max_relative = 1e-12);
    }
}
