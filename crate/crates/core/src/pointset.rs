use fixedbitset::FixedBitSet;

use crate::space::MetricMeasureSpace;
use crate::sum::compensated_sum;

/// A subset of the points of a [`MetricMeasureSpace`] with its cached mass.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    bits: FixedBitSet,
    mass: f64,
}

impl PointSet {
    pub(crate) fn from_bits(bits: FixedBitSet, weights: &[f64]) -> Self {
        let mass = compensated_sum(bits.ones().map(|i| weights[i]));
        Self { bits, mass }
    }

    pub fn empty(space: &MetricMeasureSpace) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(space.len()),
            mass: 0.0,
        }
    }

    pub fn full(space: &MetricMeasureSpace) -> Self {
        let mut bits = FixedBitSet::with_capacity(space.len());
        bits.insert_range(..);
        Self::from_bits(bits, space.weights())
    }

    /// Builds a set from point indices; out-of-range indices are an error.
    pub fn from_indices<I>(space: &MetricMeasureSpace, indices: I) -> crate::Result<Self>
    where
        I: IntoIterator<Item = usize>,
    {
        let n = space.len();
        let mut bits = FixedBitSet::with_capacity(n);
        for i in indices {
            if i >= n {
                return Err(crate::Error::IndexOutOfRange { index: i, n });
            }
            bits.insert(i);
        }
        Ok(Self::from_bits(bits, space.weights()))
    }

    pub fn from_predicate(space: &MetricMeasureSpace, pred: impl Fn(usize) -> bool) -> Self {
        let mut bits = FixedBitSet::with_capacity(space.len());
        for i in 0..space.len() {
            if pred(i) {
                bits.insert(i);
            }
        }
        Self::from_bits(bits, space.weights())
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.bits.contains(i)
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    pub fn universe_len(&self) -> usize {
        self.bits.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.ones()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.bits.ones().collect()
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn intersection(&self, other: &PointSet, space: &MetricMeasureSpace) -> PointSet {
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Self::from_bits(bits, space.weights())
    }

    pub fn union(&self, other: &PointSet, space: &MetricMeasureSpace) -> PointSet {
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Self::from_bits(bits, space.weights())
    }

    /// `self \ other`.
    pub fn difference(&self, other: &PointSet, space: &MetricMeasureSpace) -> PointSet {
        let mut bits = self.bits.clone();
        bits.difference_with(&other.bits);
        Self::from_bits(bits, space.weights())
    }

    /// `X \ self`.
    pub fn complement(&self, space: &MetricMeasureSpace) -> PointSet {
        let mut bits = self.bits.clone();
        bits.toggle_range(..);
        Self::from_bits(bits, space.weights())
    }

    pub fn is_disjoint(&self, other: &PointSet) -> bool {
        self.bits.is_disjoint(&other.bits)
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.bits.is_subset(&other.bits)
    }

    /// Mass of `self ∩ other` without materializing the intersection.
    pub fn intersection_mass(&self, other: &PointSet, weights: &[f64]) -> f64 {
        compensated_sum(self.bits.intersection(&other.bits).map(|i| weights[i]))
    }

    pub(crate) fn debug_check_mass(&self, weights: &[f64]) {
        debug_assert!({
            let m = compensated_sum(self.bits.ones().map(|i| weights[i]));
            (m - self.mass).abs() <= 1e-12 * m.max(1.0)
        });
    }
}
