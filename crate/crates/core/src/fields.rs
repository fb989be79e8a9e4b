//! Concrete stationary field models built from an i.i.d. innovation lattice:
//! linear (moving-average), Volterra (bilinear) and the bare innovation
//! field. All conditional expectations and projections are exact at the
//! coefficient level — conditioning on a sigma-field generated by
//! `(xi_u : u <= c)` keeps the terms whose innovation indices stay inside
//! that region and kills the rest by independence and centering.

use std::collections::HashMap;

use crate::innovations::{innovation_at, InnovationSpec, SeedContext};
use crate::lattice::{BoxIter, CornerMask, MultiIndex, Rect, MAX_DIM};
use crate::numeric::CompensatedSum;
use crate::{Error, Real, Result};

/// Named coefficient families for linear models.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefFamily<F: Real> {
    /// `a_0 = 1`, everything else zero.
    Delta,
    /// `a_j = ratio^(j_1 + ... + j_d)`, `|ratio| < 1`.
    Geometric { ratio: F },
    /// `a_j = prod_i (j_i + 1)^(-alpha)`; slowly decaying for small `alpha`.
    PolynomialDecay { alpha: F },
    /// Explicit sparse list of `(index, value)` pairs inside the box.
    Explicit(Vec<(Vec<i64>, F)>),
}

/// Dense tensor over the box `[0, radius]^d` with strict prefix tables for
/// O(1) box sums of the values, their absolute values and their squares.
#[derive(Clone, Debug, PartialEq)]
struct CoefGrid<F: Real> {
    dim: usize,
    side: usize,
    values: Vec<F>,
    prefix: Vec<F>,
    prefix_abs: Vec<F>,
    prefix_sq: Vec<F>,
}

impl<F: Real> CoefGrid<F> {
    fn new(dim: usize, radius: i64, entries: &[(MultiIndex, F)]) -> Result<Self> {
        if radius < 1 {
            return Err(Error::InvalidConfig(format!(
                "truncation radius must be >= 1, got {radius}"
            )));
        }
        let side = radius as usize + 1;
        let len = side.pow(dim as u32);
        let mut values = vec![F::zero(); len];
        for (idx, v) in entries {
            if idx.dim() != dim {
                return Err(Error::InvalidConfig(format!(
                    "coefficient index {idx:?} has wrong dimension, expected {dim}"
                )));
            }
            if !idx.nonnegative() || idx.coords().iter().any(|&c| c > radius) {
                return Err(Error::InvalidConfig(format!(
                    "coefficient index {idx:?} outside [0, {radius}]^{dim}"
                )));
            }
            let mut flat = 0usize;
            for &c in idx.coords() {
                flat = flat * side + c as usize;
            }
            values[flat] = values[flat] + *v;
        }
        let prefix = Self::build_prefix(dim, side, &values, |v| v);
        let prefix_abs = Self::build_prefix(dim, side, &values, |v| v.abs());
        let prefix_sq = Self::build_prefix(dim, side, &values, |v| v * v);
        Ok(Self {
            dim,
            side,
            values,
            prefix,
            prefix_abs,
            prefix_sq,
        })
    }

    /// Strict prefix table: `P[b] = sum_{j <= b-1} f(v[j])` on side `side+1`.
    fn build_prefix(dim: usize, side: usize, values: &[F], f: impl Fn(F) -> F) -> Vec<F> {
        let pside = side + 1;
        let plen = pside.pow(dim as u32);
        let mut table = vec![F::zero(); plen];
        // scatter shifted values
        let mut idx = vec![0usize; dim];
        for (flat, &v) in values.iter().enumerate() {
            let mut rem = flat;
            for a in (0..dim).rev() {
                idx[a] = rem % side;
                rem /= side;
            }
            let mut pflat = 0usize;
            for &c in idx.iter() {
                pflat = pflat * pside + (c + 1);
            }
            table[pflat] = f(v);
        }
        // accumulate along each axis
        for axis in 0..dim {
            let stride = pside.pow((dim - 1 - axis) as u32);
            for flat in 0..plen {
                let coord = flat / stride % pside;
                if coord > 0 {
                    let prev = table[flat - stride];
                    table[flat] = table[flat] + prev;
                }
            }
        }
        table
    }

    #[inline]
    fn radius(&self) -> i64 {
        self.side as i64 - 1
    }

    #[inline]
    fn value_at(&self, idx: &MultiIndex) -> F {
        if !idx.nonnegative() || idx.coords().iter().any(|&c| c >= self.side as i64) {
            return F::zero();
        }
        let mut flat = 0usize;
        for &c in idx.coords() {
            flat = flat * self.side + c as usize;
        }
        self.values[flat]
    }

    /// Inclusive box sum of `table` over `[lo, hi]` clamped to the grid.
    fn box_sum_in(&self, table: &[F], lo: &MultiIndex, hi: &MultiIndex) -> F {
        let pside = self.side + 1;
        let mut lo_c = [0usize; MAX_DIM];
        let mut hi_c = [0usize; MAX_DIM];
        for a in 0..self.dim {
            let l = lo.get(a).max(0);
            let h = hi.get(a).min(self.radius());
            if h < l {
                return F::zero();
            }
            lo_c[a] = l as usize;
            hi_c[a] = h as usize + 1; // exclusive upper in prefix coordinates
        }
        let mut total = F::zero();
        for mask in 0..(1u32 << self.dim) {
            let mut flat = 0usize;
            let mut sign_neg = false;
            for a in 0..self.dim {
                let c = if mask & (1 << a) != 0 {
                    sign_neg = !sign_neg;
                    lo_c[a]
                } else {
                    hi_c[a]
                };
                flat = flat * pside + c;
            }
            if sign_neg {
                total = total - table[flat];
            } else {
                total = total + table[flat];
            }
        }
        total
    }
}

/// Linear moving-average field `X_k = sum_{j >= 0} a_j xi_{k-j}` with the
/// coefficient map truncated to `[0, radius]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearField<F: Real> {
    dim: usize,
    radius: i64,
    grid: CoefGrid<F>,
    entries: Vec<(MultiIndex, F)>,
}

impl<F: Real> LinearField<F> {
    pub fn new(dim: usize, radius: i64, entries: Vec<(MultiIndex, F)>) -> Result<Self> {
        let grid = CoefGrid::new(dim, radius, &entries)?;
        let entries = entries.into_iter().filter(|(_, v)| *v != F::zero()).collect();
        Ok(Self {
            dim,
            radius,
            grid,
            entries,
        })
    }

    pub fn from_family(dim: usize, radius: i64, family: &CoefFamily<F>) -> Result<Self> {
        let mut entries = Vec::new();
        match family {
            CoefFamily::Delta => entries.push((MultiIndex::zeros(dim), F::one())),
            CoefFamily::Geometric { ratio } => {
                if ratio.abs() >= F::one() {
                    return Err(Error::InvalidConfig(format!(
                        "geometric ratio must satisfy |r| < 1, got {ratio}"
                    )));
                }
                for j in BoxIter::new(MultiIndex::zeros(dim), MultiIndex::splat(dim, radius)) {
                    let total: i64 = j.coords().iter().sum();
                    entries.push((j, ratio.powi(total as i32)));
                }
            }
            CoefFamily::PolynomialDecay { alpha } => {
                for j in BoxIter::new(MultiIndex::zeros(dim), MultiIndex::splat(dim, radius)) {
                    let mut v = F::one();
                    for &c in j.coords() {
                        v = v * F::cast_i64(c + 1).powf(-*alpha);
                    }
                    entries.push((j, v));
                }
            }
            CoefFamily::Explicit(list) => {
                for (coords, v) in list {
                    entries.push((MultiIndex::new(coords), *v));
                }
            }
        }
        Self::new(dim, radius, entries)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn radius(&self) -> i64 {
        self.radius
    }

    #[inline]
    pub fn coefficient(&self, j: &MultiIndex) -> F {
        self.grid.value_at(j)
    }

    /// `sum_{j in [lo, hi]} a_j`, clamped to the coefficient box.
    pub fn coef_box_sum(&self, lo: &MultiIndex, hi: &MultiIndex) -> F {
        self.grid.box_sum_in(&self.grid.prefix, lo, hi)
    }

    /// `sum_{j in [0, hi]} |a_j|`.
    pub fn abs_box_sum(&self, hi: &MultiIndex) -> F {
        self.grid
            .box_sum_in(&self.grid.prefix_abs, &MultiIndex::zeros(self.dim), hi)
    }

    /// `sum_{j >= lo} a_j^2` over the truncation box.
    pub fn tail_square_sum(&self, lo: &MultiIndex) -> F {
        self.grid
            .box_sum_in(&self.grid.prefix_sq, lo, &MultiIndex::splat(self.dim, self.radius))
    }

    /// Total coefficient sum over the box.
    pub fn total_coef_sum(&self) -> F {
        self.coef_box_sum(
            &MultiIndex::zeros(self.dim),
            &MultiIndex::splat(self.dim, self.radius),
        )
    }

    /// Weight of innovation site `m` in `S_window`:
    /// `W_window(m) = sum_{j in [1-m, window-m]} a_j`.
    #[inline]
    pub fn window_weight(&self, m: &MultiIndex, window: &MultiIndex) -> F {
        let ones = MultiIndex::ones(self.dim);
        self.grid
            .box_sum_in(&self.grid.prefix, &ones.sub(m), &window.sub(m))
    }

    /// `sum_{m <= caps} W_window(m) xi_m`, the innovation-weight form shared
    /// by partial sums and their conditional expectations.
    pub fn weighted_innovation_sum(
        &self,
        spec: &InnovationSpec<F>,
        ctx: &SeedContext,
        caps: &MultiIndex,
        window: &MultiIndex,
    ) -> F {
        let mut lo = MultiIndex::zeros(self.dim);
        for a in 0..self.dim {
            lo.set(a, 1 - self.radius);
        }
        let hi = caps.min(window);
        let mut acc = CompensatedSum::new();
        for m in BoxIter::new(lo, hi) {
            let w = self.window_weight(&m, window);
            if w != F::zero() {
                acc.add(w * innovation_at(spec, ctx, &m));
            }
        }
        acc.value()
    }
}

/// One bilinear coefficient `a_{u,v}` of a Volterra field.
#[derive(Clone, Debug, PartialEq)]
pub struct VolterraEntry<F: Real> {
    pub u: MultiIndex,
    pub v: MultiIndex,
    pub a: F,
}

/// Named coefficient families for Volterra models.
#[derive(Clone, Debug, PartialEq)]
pub enum VolterraFamily<F: Real> {
    /// `a_{u,v} = ratio^(|u|_1 + |v|_1)` off the diagonal.
    Geometric { ratio: F },
    /// Explicit sparse list.
    Explicit(Vec<(Vec<i64>, Vec<i64>, F)>),
}

/// Second-order field `X_k = sum_{(u,v) >= 0} a_{u,v} xi_{k-u} xi_{k-v}`
/// with vanishing diagonal and both indices truncated to `[0, radius]^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolterraField<F: Real> {
    dim: usize,
    radius: i64,
    entries: Vec<VolterraEntry<F>>,
}

impl<F: Real> VolterraField<F> {
    pub fn new(dim: usize, radius: i64, entries: Vec<VolterraEntry<F>>) -> Result<Self> {
        if radius < 1 {
            return Err(Error::InvalidConfig(format!(
                "truncation radius must be >= 1, got {radius}"
            )));
        }
        for e in &entries {
            if e.u.dim() != dim || e.v.dim() != dim {
                return Err(Error::InvalidConfig(
                    "Volterra entry has wrong dimension".into(),
                ));
            }
            if e.u == e.v {
                return Err(Error::InvalidConfig(format!(
                    "diagonal Volterra coefficients must vanish, got entry at u = v = {:?}",
                    e.u
                )));
            }
            let inside = |m: &MultiIndex| m.nonnegative() && m.coords().iter().all(|&c| c <= radius);
            if !inside(&e.u) || !inside(&e.v) {
                return Err(Error::InvalidConfig(format!(
                    "Volterra entry ({:?}, {:?}) outside [0, {radius}]^{dim}",
                    e.u, e.v
                )));
            }
        }
        Ok(Self {
            dim,
            radius,
            entries,
        })
    }

    pub fn from_family(dim: usize, radius: i64, family: &VolterraFamily<F>) -> Result<Self> {
        let mut entries = Vec::new();
        match family {
            VolterraFamily::Geometric { ratio } => {
                if ratio.abs() >= F::one() {
                    return Err(Error::InvalidConfig(format!(
                        "geometric ratio must satisfy |r| < 1, got {ratio}"
                    )));
                }
                let lo = MultiIndex::zeros(dim);
                let hi = MultiIndex::splat(dim, radius);
                for u in BoxIter::new(lo, hi) {
                    for v in BoxIter::new(lo, hi) {
                        if u == v {
                            continue;
                        }
                        let total: i64 =
                            u.coords().iter().sum::<i64>() + v.coords().iter().sum::<i64>();
                        entries.push(VolterraEntry {
                            u,
                            v,
                            a: ratio.powi(total as i32),
                        });
                    }
                }
            }
            VolterraFamily::Explicit(list) => {
                for (u, v, a) in list {
                    entries.push(VolterraEntry {
                        u: MultiIndex::new(u),
                        v: MultiIndex::new(v),
                        a: *a,
                    });
                }
            }
        }
        Self::new(dim, radius, entries)
    }

    pub fn entries(&self) -> &[VolterraEntry<F>] {
        &self.entries
    }

    /// `sum_{(u,v) >= lo, u != v} a_{u,v}^2`.
    pub fn tail_square_sum(&self, lo: &MultiIndex) -> F {
        let mut acc = CompensatedSum::new();
        for e in &self.entries {
            if lo.le(&e.u) && lo.le(&e.v) {
                acc.add(e.a * e.a);
            }
        }
        acc.value()
    }
}

/// A stationary field model over the innovation lattice.
#[derive(Clone, Debug, PartialEq)]
pub enum FieldModel<F: Real> {
    Linear(LinearField<F>),
    Volterra(VolterraField<F>),
    /// The bare innovation field `X_k = xi_k` (an ortho-martingale
    /// difference field).
    IidDiff { dim: usize },
}

/// Coefficient-level representation of the limiting innovation-at-origin
/// contribution `D_0 = sum_{i >= 0} P_0(X_i)`.
#[derive(Clone, Debug, PartialEq)]
pub enum D0Representation<F: Real> {
    /// `D_0 = c * xi_0`.
    ScaledInnovation { coefficient: F },
    /// `D_0 = sum over unordered index pairs of c_{m,m'} xi_m xi_{m'}`.
    PairSum {
        pairs: Vec<((MultiIndex, MultiIndex), F)>,
    },
    /// `D_0 = xi_0`.
    SingleInnovation,
}

/// Long-run variance of the normalized centered sums together with the
/// representation it was computed from.
#[derive(Clone, Debug, PartialEq)]
pub struct SigmaReport<F: Real> {
    pub sigma2: F,
    pub d0: D0Representation<F>,
}

impl<F: Real> FieldModel<F> {
    pub fn linear(dim: usize, radius: i64, family: &CoefFamily<F>) -> Result<Self> {
        Ok(FieldModel::Linear(LinearField::from_family(
            dim, radius, family,
        )?))
    }

    pub fn volterra(dim: usize, radius: i64, family: &VolterraFamily<F>) -> Result<Self> {
        Ok(FieldModel::Volterra(VolterraField::from_family(
            dim, radius, family,
        )?))
    }

    pub fn iid_diff(dim: usize) -> Self {
        FieldModel::IidDiff { dim }
    }

    pub fn dim(&self) -> usize {
        match self {
            FieldModel::Linear(m) => m.dim,
            FieldModel::Volterra(m) => m.dim,
            FieldModel::IidDiff { dim } => *dim,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FieldModel::Linear(_) => "linear",
            FieldModel::Volterra(_) => "volterra",
            FieldModel::IidDiff { .. } => "iid_diff",
        }
    }
}

/// Evaluate `X_k`.
pub fn field_eval<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    k: &MultiIndex,
) -> F {
    match model {
        FieldModel::Linear(m) => {
            let mut acc = CompensatedSum::new();
            for (j, a) in &m.entries {
                acc.add(*a * innovation_at(spec, ctx, &k.sub(j)));
            }
            acc.value()
        }
        FieldModel::Volterra(m) => {
            let mut acc = CompensatedSum::new();
            for e in &m.entries {
                acc.add(
                    e.a * innovation_at(spec, ctx, &k.sub(&e.u))
                        * innovation_at(spec, ctx, &k.sub(&e.v)),
                );
            }
            acc.value()
        }
        FieldModel::IidDiff { .. } => innovation_at(spec, ctx, k),
    }
}

/// Exact conditional expectation `E[X_k | sigma(xi_u : u <= c)]`.
///
/// Linear terms survive iff their innovation index lies under `c`; Volterra
/// terms survive iff both factors do — a single surviving factor leaves a
/// centered independent factor and the term vanishes.
pub fn cond_expect_field<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    c: &MultiIndex,
    k: &MultiIndex,
) -> F {
    match model {
        FieldModel::Linear(m) => {
            let mut acc = CompensatedSum::new();
            for (j, a) in &m.entries {
                let site = k.sub(j);
                if site.le(c) {
                    acc.add(*a * innovation_at(spec, ctx, &site));
                }
            }
            acc.value()
        }
        FieldModel::Volterra(m) => {
            let mut acc = CompensatedSum::new();
            for e in &m.entries {
                let su = k.sub(&e.u);
                let sv = k.sub(&e.v);
                if su.le(c) && sv.le(c) {
                    acc.add(e.a * innovation_at(spec, ctx, &su) * innovation_at(spec, ctx, &sv));
                }
            }
            acc.value()
        }
        FieldModel::IidDiff { .. } => {
            if k.le(c) {
                innovation_at(spec, ctx, k)
            } else {
                F::zero()
            }
        }
    }
}

/// Exact conditional expectation `E[S_n | sigma(xi_u : u <= c)]` for `c <= n`.
pub fn cond_expect_sum<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    n: &Rect,
    c: &MultiIndex,
) -> Result<F> {
    if c.dim() != n.dim() {
        return Err(Error::InvalidConfig(
            "corner dimension does not match rectangle".into(),
        ));
    }
    if !c.le(n.upper()) {
        return Err(Error::InvalidCorner {
            corner: c.coords().to_vec(),
            upper: n.upper().coords().to_vec(),
        });
    }
    Ok(match model {
        FieldModel::Linear(m) => {
            let caps = c.min(n.upper());
            m.weighted_innovation_sum(spec, ctx, &caps, n.upper())
        }
        FieldModel::Volterra(_) => {
            let mut acc = CompensatedSum::new();
            for i in BoxIter::new(MultiIndex::ones(n.dim()), *n.upper()) {
                acc.add(cond_expect_field(model, spec, ctx, c, &i));
            }
            acc.value()
        }
        FieldModel::IidDiff { .. } => {
            let mut acc = CompensatedSum::new();
            let caps = c.min(n.upper());
            for i in BoxIter::new(MultiIndex::ones(n.dim()), caps) {
                acc.add(innovation_at(spec, ctx, &i));
            }
            acc.value()
        }
    })
}

/// Closed-form projection `P_j(X_k)` where
/// `P_j = prod_i (E_j - E_{j - e_i})`.
///
/// The product of one-coordinate differences isolates the terms whose
/// innovation support hits coordinate level `j` exactly: for linear fields
/// that is the single term `a_{k-j} xi_j`, for Volterra fields the terms
/// whose two innovation indices have coordinate-wise maximum equal to `j`.
pub fn projection<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    j: &MultiIndex,
    k: &MultiIndex,
) -> F {
    match model {
        FieldModel::Linear(m) => {
            let lag = k.sub(j);
            let a = m.coefficient(&lag);
            if a == F::zero() {
                F::zero()
            } else {
                a * innovation_at(spec, ctx, j)
            }
        }
        FieldModel::Volterra(m) => {
            let mut acc = CompensatedSum::new();
            for e in &m.entries {
                let su = k.sub(&e.u);
                let sv = k.sub(&e.v);
                if su.max(&sv) == *j {
                    acc.add(e.a * innovation_at(spec, ctx, &su) * innovation_at(spec, ctx, &sv));
                }
            }
            acc.value()
        }
        FieldModel::IidDiff { .. } => {
            if j == k {
                innovation_at(spec, ctx, k)
            } else {
                F::zero()
            }
        }
    }
}

/// Brute-force projection: expand `prod_i (E_j - E_{j-e_i})` into its `2^d`
/// signed conditional expectations and evaluate each one exactly.
pub fn projection_oracle<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
    ctx: &SeedContext,
    j: &MultiIndex,
    k: &MultiIndex,
) -> F {
    let dim = model.dim();
    let mut acc = CompensatedSum::new();
    for mask in CornerMask::all(dim) {
        let mut level = *j;
        for axis in 0..dim {
            if mask.contains(axis) {
                level.set(axis, level.get(axis) - 1);
            }
        }
        let term = cond_expect_field(model, spec, ctx, &level, k);
        if mask.len() % 2 == 0 {
            acc.add(term);
        } else {
            acc.add(-term);
        }
    }
    acc.value()
}

/// Long-run variance `sigma^2 = E[D_0^2]` of the truncated model, computed
/// exactly from the coefficients.
pub fn sigma2_theoretical<F: Real>(
    model: &FieldModel<F>,
    spec: &InnovationSpec<F>,
) -> SigmaReport<F> {
    let var = spec.variance();
    match model {
        FieldModel::Linear(m) => {
            let total = m.total_coef_sum();
            SigmaReport {
                sigma2: total * total * var,
                d0: D0Representation::ScaledInnovation { coefficient: total },
            }
        }
        FieldModel::Volterra(m) => {
            // P_0(X_i) is nonzero only at i = min(u, v) per entry; collect
            // the innovation pair (min - u, min - v) and sum coefficients
            // over unordered pairs.
            let mut pairs: HashMap<(MultiIndex, MultiIndex), F> = HashMap::new();
            for e in &m.entries {
                let meet = e.u.min(&e.v);
                let a = meet.sub(&e.u);
                let b = meet.sub(&e.v);
                let key = if a.coords() <= b.coords() { (a, b) } else { (b, a) };
                *pairs.entry(key).or_insert(F::zero()) += e.a;
            }
            let mut sigma2 = F::zero();
            let mut listed: Vec<_> = pairs.into_iter().collect();
            listed.sort_by(|x, y| (x.0 .0.coords(), x.0 .1.coords()).cmp(&(y.0 .0.coords(), y.0 .1.coords())));
            for (_, coeff) in &listed {
                sigma2 += *coeff * *coeff * var * var;
            }
            SigmaReport {
                sigma2,
                d0: D0Representation::PairSum { pairs: listed },
            }
        }
        FieldModel::IidDiff { .. } => SigmaReport {
            sigma2: var,
            d0: D0Representation::SingleInnovation,
        },
    }
}
