//! Dense GF(2) linear algebra on u64-packed bit rows.
//!
//! Used for stabilizer tableaus, adjacency rows, and the symplectic
//! eliminations behind recoverability and local-Clifford equivalence tests.

/// Fixed-length bit vector over GF(2), packed into u64 words.
///
/// Invariant: bits at positions >= `len` are always zero, so word-wise
/// comparisons and popcounts need no masking.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        BitRow {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % 64);
        if value {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn xor_in(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w ^= o;
        }
    }

    /// Parity of the AND of two rows; the GF(2) inner product.
    pub fn dot(&self, other: &BitRow) -> bool {
        debug_assert_eq!(self.len, other.len);
        self.words
            .iter()
            .zip(&other.words)
            .fold(0u32, |acc, (a, b)| acc ^ (a & b).count_ones())
            & 1
            == 1
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn first_one(&self) -> Option<usize> {
        for (k, &w) in self.words.iter().enumerate() {
            if w != 0 {
                return Some(k * 64 + w.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Iterate set bit positions in ascending order.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(k * 64 + b)
                }
            })
        })
    }

    /// Concatenate two rows into one of length `self.len + other.len`.
    pub fn concat(&self, other: &BitRow) -> BitRow {
        let mut out = BitRow::zeros(self.len + other.len);
        for i in self.ones() {
            out.set(i, true);
        }
        for i in other.ones() {
            out.set(self.len + i, true);
        }
        out
    }
}

impl std::fmt::Debug for BitRow {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Online GF(2) row space: supports independence insertion and membership.
///
/// Rows are kept in echelon form keyed by their leading bit.
#[derive(Clone, Default)]
pub struct RowSpace {
    /// (pivot column, reduced row); sorted by pivot.
    rows: Vec<(usize, BitRow)>,
}

impl RowSpace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: BitRow) -> BitRow {
        for (p, row) in &self.rows {
            if v.get(*p) {
                v.xor_in(row);
            }
        }
        v
    }

    /// Insert `v`; returns true if it was independent of the current span.
    pub fn insert(&mut self, v: BitRow) -> bool {
        let v = self.reduce(v);
        match v.first_one() {
            None => false,
            Some(p) => {
                let idx = self.rows.partition_point(|(q, _)| *q < p);
                self.rows.insert(idx, (p, v));
                true
            }
        }
    }

    pub fn contains(&self, v: &BitRow) -> bool {
        self.reduce(v.clone()).is_zero()
    }
}

/// Basis of the null space of the linear map x -> A x, where the rows of `a`
/// are the constraint rows over `ncols` unknowns.
pub fn null_space(a: &[BitRow], ncols: usize) -> Vec<BitRow> {
    // Reduce constraints to row echelon form, tracking pivot columns.
    let mut rows: Vec<BitRow> = a.to_vec();
    let mut pivots: Vec<usize> = Vec::new();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(r) = (rank..rows.len()).find(|&r| rows[r].get(col)) else {
            continue;
        };
        rows.swap(rank, r);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row.get(col) {
                row.xor_in(&pivot_row);
            }
        }
        pivots.push(col);
        rank += 1;
        if rank == rows.len() {
            break;
        }
    }
    rows.truncate(rank);

    let is_pivot: Vec<bool> = {
        let mut v = vec![false; ncols];
        for &p in &pivots {
            v[p] = true;
        }
        v
    };
    let mut basis = Vec::new();
    for free in (0..ncols).filter(|&c| !is_pivot[c]) {
        let mut v = BitRow::zeros(ncols);
        v.set(free, true);
        // Back-substitute: pivot var p must cancel the free column's entry.
        for (row, &p) in rows.iter().zip(&pivots) {
            if row.get(free) {
                v.set(p, true);
            }
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bitrow_basics() {
        let mut r = BitRow::zeros(130);
        r.set(0, true);
        r.set(64, true);
        r.set(129, true);
        assert_eq!(r.count_ones(), 3);
        assert_eq!(r.ones().collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(r.first_one(), Some(0));
        r.toggle(0);
        assert_eq!(r.first_one(), Some(64));
        let mut s = BitRow::zeros(130);
        s.set(64, true);
        assert!(r.dot(&s));
        s.set(129, true);
        assert!(!r.dot(&s));
    }

    #[test]
    fn rowspace_membership() {
        let mut sp = RowSpace::new();
        let mk = |bits: &[usize]| {
            let mut v = BitRow::zeros(8);
            for &b in bits {
                v.set(b, true);
            }
            v
        };
        assert!(sp.insert(mk(&[0, 1])));
        assert!(sp.insert(mk(&[1, 2])));
        assert!(!sp.insert(mk(&[0, 2])));
        assert!(sp.contains(&mk(&[0, 2])));
        assert!(!sp.contains(&mk(&[0, 3])));
        assert_eq!(sp.rank(), 2);
    }

    #[test]
    fn null_space_of_parity_constraints() {
        // x0 + x1 = 0, x1 + x2 = 0 over 3 unknowns -> kernel {000, 111}.
        let mk = |bits: &[usize]| {
            let mut v = BitRow::zeros(3);
            for &b in bits {
                v.set(b, true);
            }
            v
        };
        let basis = null_space(&[mk(&[0, 1]), mk(&[1, 2])], 3);
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].ones().collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn null_space_full_rank_is_trivial() {
        let mut rows = Vec::new();
        for i in 0..4 {
            let mut v = BitRow::zeros(4);
            v.set(i, true);
            rows.push(v);
        }
        assert!(null_space(&rows, 4).is_empty());
    }
}
