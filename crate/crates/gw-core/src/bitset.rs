//! A growable bit matrix: one row of bits per polytope vertex, one column
//! per constraint. Rows come and go (vertices are cut away and created);
//! columns only get appended (cuts are never retracted). Row pairs are
//! compared with `popcount(and)`, the hot operation of the vertex engine.

#[derive(Debug, Clone, Default)]
pub struct BitMatrix {
    /// Words per row.
    stride: usize,
    ncols: usize,
    nrows: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    #[must_use]
    pub fn new(ncols: usize) -> Self {
        BitMatrix {
            stride: ncols.div_ceil(64).max(1),
            ncols,
            nrows: 0,
            data: Vec::new(),
        }
    }

    #[must_use]
    pub fn nrows(&self) -> usize {
        self.nrows
    }

    #[must_use]
    pub fn ncols(&self) -> usize {
        self.ncols
    }

    /// Appends an all-zero row and returns its index.
    pub fn push_row(&mut self) -> usize {
        self.data.extend(std::iter::repeat_n(0u64, self.stride));
        self.nrows += 1;
        self.nrows - 1
    }

    /// Appends a copy of the given raw row (must match the current stride).
    pub fn push_row_from(&mut self, words: &[u64]) -> usize {
        assert_eq!(words.len(), self.stride);
        self.data.extend_from_slice(words);
        self.nrows += 1;
        self.nrows - 1
    }

    pub fn set(&mut self, row: usize, col: usize) {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.data[row * self.stride + col / 64] |= 1u64 << (col % 64);
    }

    #[must_use]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.nrows && col < self.ncols);
        self.data[row * self.stride + col / 64] & (1u64 << (col % 64)) != 0
    }

    #[must_use]
    pub fn row(&self, row: usize) -> &[u64] {
        &self.data[row * self.stride..(row + 1) * self.stride]
    }

    /// Number of set bits in the row.
    #[must_use]
    pub fn row_count(&self, row: usize) -> u32 {
        self.row(row).iter().map(|w| w.count_ones()).sum()
    }

    /// Set bits shared by two rows: `popcount(row_a & row_b)`.
    #[must_use]
    pub fn shared_count(&self, a: usize, b: usize) -> u32 {
        shared_words(self.row(a), self.row(b))
    }

    /// Column indices of the set bits, ascending.
    #[must_use]
    pub fn row_indices(&self, row: usize) -> Vec<usize> {
        let mut out = Vec::new();
        for (wi, &w) in self.row(row).iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                out.push(wi * 64 + b);
                bits &= bits - 1;
            }
        }
        out
    }

    /// Appends a column (initially zero everywhere), growing the stride and
    /// re-laying out the matrix when the current word capacity is exhausted.
    pub fn push_col(&mut self) -> usize {
        if self.ncols == self.stride * 64 {
            let new_stride = self.stride + 1;
            let mut data = vec![0u64; self.nrows * new_stride];
            for r in 0..self.nrows {
                data[r * new_stride..r * new_stride + self.stride]
                    .copy_from_slice(self.row(r));
            }
            self.data = data;
            self.stride = new_stride;
        }
        self.ncols += 1;
        self.ncols - 1
    }

    /// Keeps exactly the rows with `keep[i] == true`, preserving their
    /// relative order. Returns the old-to-new index map.
    pub fn retain_rows(&mut self, keep: &[bool]) -> Vec<Option<usize>> {
        assert_eq!(keep.len(), self.nrows);
        let mut map = vec![None; self.nrows];
        let mut next = 0usize;
        for (old, &k) in keep.iter().enumerate() {
            if k {
                if old != next {
                    let (dst, src) = (next * self.stride, old * self.stride);
                    self.data.copy_within(src..src + self.stride, dst);
                }
                map[old] = Some(next);
                next += 1;
            }
        }
        self.data.truncate(next * self.stride);
        self.nrows = next;
        map
    }

    /// Raw words of a row, copied out (useful before mutating the matrix).
    #[must_use]
    pub fn row_to_vec(&self, row: usize) -> Vec<u64> {
        self.row(row).to_vec()
    }

    /// Bitwise AND of two rows, as raw words.
    #[must_use]
    pub fn and_rows(&self, a: usize, b: usize) -> Vec<u64> {
        self.row(a)
            .iter()
            .zip(self.row(b))
            .map(|(x, y)| x & y)
            .collect()
    }
}

/// `popcount(a & b)` over raw rows.
#[must_use]
pub fn shared_words(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum()
}
