use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Largest network a [`Cluster`] bitmask can address.
pub const MAX_CELLS: usize = 64;

/// A nonempty set of cells that transmit together while every other cell
/// sleeps. Bit `i` of the mask is set when cell `i` is a member.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u64", into = "u64")]
pub struct Cluster(u64);

impl Cluster {
    pub fn from_bits(bits: u64) -> Result<Self, ModelError> {
        if bits == 0 {
            return Err(ModelError::EmptyCluster);
        }
        Ok(Cluster(bits))
    }

    pub fn from_cells<I: IntoIterator<Item = usize>>(cells: I) -> Result<Self, ModelError> {
        let mut bits = 0u64;
        for c in cells {
            if c >= MAX_CELLS {
                return Err(ModelError::CellOutOfRange {
                    cell: c,
                    cells: MAX_CELLS,
                });
            }
            bits |= 1 << c;
        }
        Self::from_bits(bits)
    }

    pub fn singleton(cell: usize) -> Self {
        assert!(cell < MAX_CELLS, "cell {cell} exceeds bitmask width");
        Cluster(1 << cell)
    }

    /// The cluster of all `cell_count` cells.
    pub fn full(cell_count: usize) -> Self {
        assert!((1..=MAX_CELLS).contains(&cell_count));
        if cell_count == MAX_CELLS {
            Cluster(u64::MAX)
        } else {
            Cluster((1u64 << cell_count) - 1)
        }
    }

    #[inline]
    pub fn bits(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn contains(self, cell: usize) -> bool {
        cell < MAX_CELLS && self.0 >> cell & 1 == 1
    }

    #[inline]
    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Always false; clusters are nonempty by construction.
    pub fn is_empty(self) -> bool {
        false
    }

    pub fn is_subset_of(self, other: Cluster) -> bool {
        self.0 & !other.0 == 0
    }

    /// Highest member index plus one.
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    /// Member cells in increasing order.
    pub fn cells(self) -> Cells {
        Cells(self.0)
    }
}

impl fmt::Debug for Cluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.cells()).finish()
    }
}

impl fmt::Display for Cluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (n, c) in self.cells().enumerate() {
            if n > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "}}")
    }
}

impl TryFrom<u64> for Cluster {
    type Error = ModelError;
    fn try_from(bits: u64) -> Result<Self, ModelError> {
        Cluster::from_bits(bits)
    }
}

impl From<Cluster> for u64 {
    fn from(c: Cluster) -> u64 {
        c.0
    }
}

/// Iterator over the member cells of a cluster.
#[derive(Clone)]
pub struct Cells(u64);

impl Iterator for Cells {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.0 == 0 {
            return None;
        }
        let c = self.0.trailing_zeros() as usize;
        self.0 &= self.0 - 1;
        Some(c)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = self.0.count_ones() as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for Cells {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_is_canonical() {
        let a = Cluster::from_cells([3, 0, 2]).unwrap();
        let b = Cluster::from_cells([0, 2, 3, 2]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.bits(), 0b1101);
        assert_eq!(a.cells().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert_eq!(a.len(), 3);
        assert_eq!(a.to_string(), "{0,2,3}");
    }

    #[test]
    fn empty_is_rejected() {
        assert_eq!(Cluster::from_bits(0), Err(ModelError::EmptyCluster));
        assert!(Cluster::from_cells(std::iter::empty()).is_err());
        assert!(Cluster::from_cells([64]).is_err());
    }

    #[test]
    fn subsets_and_full() {
        let full = Cluster::full(7);
        assert_eq!(full.bits(), 127);
        assert!(Cluster::singleton(6).is_subset_of(full));
        assert!(!Cluster::singleton(7).is_subset_of(full));
        assert_eq!(Cluster::full(64).len(), 64);
        assert_eq!(full.span(), 7);
    }
}
