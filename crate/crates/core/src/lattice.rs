//! Multi-index arithmetic on `Z^d`, rectangle iteration and the quadrant
//! corner algebra used by the random centering.
//!
//! The coordinate dimension is a runtime value with `1 <= d <= MAX_DIM`;
//! keeping `d` small bounds the `2^d` inclusion-exclusion cost everywhere.

use crate::{Error, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 4;

/// A point of `Z^d`, `1 <= d <= MAX_DIM`. Ordered coordinate-wise.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct MultiIndex {
    dim: u8,
    coords: [i64; MAX_DIM],
}

impl std::fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.coords()).finish()
    }
}

impl MultiIndex {
    pub fn new(coords: &[i64]) -> Self {
        assert!(
            !coords.is_empty() && coords.len() <= MAX_DIM,
            "dimension must be in 1..={MAX_DIM}"
        );
        let mut c = [0i64; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Self {
            dim: coords.len() as u8,
            coords: c,
        }
    }

    /// The index `(v, v, ..., v)` in dimension `dim`.
    pub fn splat(dim: usize, v: i64) -> Self {
        assert!(dim >= 1 && dim <= MAX_DIM);
        let mut c = [0i64; MAX_DIM];
        c[..dim].fill(v);
        Self {
            dim: dim as u8,
            coords: c,
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::splat(dim, 0)
    }

    pub fn ones(dim: usize) -> Self {
        Self::splat(dim, 1)
    }

    /// The `axis`-th unit vector (0-based axis).
    pub fn unit(dim: usize, axis: usize) -> Self {
        let mut u = Self::zeros(dim);
        assert!(axis < dim);
        u.coords[axis] = 1;
        u
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn get(&self, axis: usize) -> i64 {
        debug_assert!(axis < self.dim());
        self.coords[axis]
    }

    #[inline]
    pub fn set(&mut self, axis: usize, v: i64) {
        debug_assert!(axis < self.dim());
        self.coords[axis] = v;
    }

    /// Coordinate-wise partial order `self <= other`.
    #[inline]
    pub fn le(&self, other: &Self) -> bool {
        debug_assert_eq!(self.dim, other.dim);
        self.coords()
            .iter()
            .zip(other.coords())
            .all(|(a, b)| a <= b)
    }

    /// True when every coordinate is `>= 1`.
    #[inline]
    pub fn strictly_positive(&self) -> bool {
        self.coords().iter().all(|&c| c >= 1)
    }

    /// True when every coordinate is `>= 0`.
    #[inline]
    pub fn nonnegative(&self) -> bool {
        self.coords().iter().all(|&c| c >= 0)
    }

    #[inline]
    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for k in 0..self.dim() {
            out.coords[k] += other.coords[k];
        }
        out
    }

    #[inline]
    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for k in 0..self.dim() {
            out.coords[k] -= other.coords[k];
        }
        out
    }

    /// Coordinate-wise minimum.
    #[inline]
    pub fn min(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for k in 0..self.dim() {
            out.coords[k] = out.coords[k].min(other.coords[k]);
        }
        out
    }

    /// Coordinate-wise maximum.
    #[inline]
    pub fn max(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut out = *self;
        for k in 0..self.dim() {
            out.coords[k] = out.coords[k].max(other.coords[k]);
        }
        out
    }

    /// Product of coordinates, `|n| = n_1 * ... * n_d`.
    pub fn volume(&self) -> i64 {
        self.coords().iter().product()
    }
}

/// Product of coordinates of `n`.
pub fn volume(n: &MultiIndex) -> i64 {
    n.volume()
}

/// The summation region `[1, n_1] x ... x [1, n_d]`.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rect {
    upper: MultiIndex,
}

impl std::fmt::Debug for Rect {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Rect{:?}", self.upper)
    }
}

impl Rect {
    pub fn new(upper: MultiIndex) -> Result<Self> {
        if !upper.strictly_positive() {
            return Err(Error::InvalidConfig(format!(
                "rectangle upper bound must have all coordinates >= 1, got {upper:?}"
            )));
        }
        Ok(Self { upper })
    }

    pub fn square(dim: usize, side: i64) -> Result<Self> {
        Self::new(MultiIndex::splat(dim, side))
    }

    #[inline]
    pub fn upper(&self) -> &MultiIndex {
        &self.upper
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.upper.dim()
    }

    #[inline]
    pub fn volume(&self) -> i64 {
        self.upper.volume()
    }

    pub fn is_square(&self) -> bool {
        let first = self.upper.get(0);
        self.upper.coords().iter().all(|&c| c == first)
    }
}

/// Subset of coordinates replaced by `0` when forming a quadrant corner.
///
/// The empty mask is the identity; the full mask sends `n` to the origin.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CornerMask {
    bits: u8,
}

impl CornerMask {
    pub fn empty() -> Self {
        Self { bits: 0 }
    }

    /// Mask from 0-based coordinate positions.
    pub fn from_axes(axes: &[usize]) -> Self {
        let mut bits = 0u8;
        for &a in axes {
            assert!(a < 8);
            bits |= 1 << a;
        }
        Self { bits }
    }

    pub(crate) fn from_bits(bits: u8) -> Self {
        Self { bits }
    }

    #[inline]
    pub fn contains(&self, axis: usize) -> bool {
        self.bits & (1 << axis) != 0
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    /// Number of zeroed coordinates.
    #[inline]
    pub fn len(&self) -> u32 {
        self.bits.count_ones()
    }

    /// Validate against a dimension and return the highest referenced axis on error.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let highest = 8 - self.bits.leading_zeros() as usize;
        if highest > dim {
            return Err(Error::InvalidMask {
                coord: highest,
                dim,
            });
        }
        Ok(())
    }

    /// All `2^d` masks of dimension `dim`, including the empty one.
    pub fn all(dim: usize) -> impl Iterator<Item = CornerMask> {
        assert!(dim <= MAX_DIM);
        (0u8..(1 << dim)).map(CornerMask::from_bits)
    }

    /// All `2^d - 1` nonempty masks of dimension `dim`.
    pub fn nonempty(dim: usize) -> impl Iterator<Item = CornerMask> {
        Self::all(dim).filter(|m| !m.is_empty())
    }
}

/// Replace the masked coordinates of `n` with `0`.
pub fn corner(n: &MultiIndex, mask: CornerMask) -> Result<MultiIndex> {
    mask.validate(n.dim())?;
    let mut out = *n;
    for axis in 0..n.dim() {
        if mask.contains(axis) {
            out.set(axis, 0);
        }
    }
    Ok(out)
}

/// Lexicographic iterator over the integer box `[lo, hi]` (both inclusive).
///
/// Empty when `hi < lo` in any coordinate.
pub struct BoxIter {
    lo: MultiIndex,
    hi: MultiIndex,
    next: Option<MultiIndex>,
}

impl BoxIter {
    pub fn new(lo: MultiIndex, hi: MultiIndex) -> Self {
        debug_assert_eq!(lo.dim(), hi.dim());
        let next = if lo.le(&hi) { Some(lo) } else { None };
        Self { lo, hi, next }
    }
}

impl Iterator for BoxIter {
    type Item = MultiIndex;

    fn next(&mut self) -> Option<MultiIndex> {
        let current = self.next?;
        // advance the odometer, last coordinate fastest
        let mut succ = current;
        let mut axis = current.dim();
        loop {
            if axis == 0 {
                self.next = None;
                break;
            }
            axis -= 1;
            if succ.get(axis) < self.hi.get(axis) {
                succ.set(axis, succ.get(axis) + 1);
                for a in axis + 1..succ.dim() {
                    succ.set(a, self.lo.get(a));
                }
                self.next = Some(succ);
                break;
            }
        }
        Some(current)
    }
}

/// Lexicographic enumeration of the region `[1, n]`.
pub fn rect_iter(n: &Rect) -> BoxIter {
    BoxIter::new(MultiIndex::ones(n.dim()), *n.upper())
}
