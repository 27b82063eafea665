use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::dense::DenseMatrix;

/// Symmetric sparse matrix in compressed row storage.
///
/// Both triangles are stored, but every off-diagonal value is written once
/// from a single upper-triangle accumulator, so `(i, j)` and `(j, i)` agree
/// bit for bit.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseSymMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSymMatrix {
    /// Builds from `(i, j, v)` triplets. Entries with `i > j` are reflected to
    /// the upper triangle; duplicates are summed in input order.
    pub fn from_upper_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut upper: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for &(i, j, v) in triplets {
            assert!(i < n && j < n, "triplet index out of range");
            let key = if i <= j { (i, j) } else { (j, i) };
            *upper.entry(key).or_insert(0.0) += v;
        }
        Self::from_upper_map(n, &upper)
    }

    pub(crate) fn from_upper_map(n: usize, upper: &BTreeMap<(usize, usize), f64>) -> Self {
        let mut counts = vec![0usize; n];
        for &(i, j) in upper.keys() {
            counts[i] += 1;
            if i != j {
                counts[j] += 1;
            }
        }
        let mut row_ptr = vec![0usize; n + 1];
        for i in 0..n {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        let nnz = row_ptr[n];
        let mut col_idx = vec![0usize; nnz];
        let mut values = vec![0.0; nnz];
        let mut fill = row_ptr.clone();
        // BTreeMap iterates (i, j) lexicographically: the lower-triangle
        // entries of row j arrive (in ascending i) before its upper ones.
        for (&(i, j), &v) in upper {
            if i != j {
                let p = fill[j];
                col_idx[p] = i;
                values[p] = v;
                fill[j] += 1;
            }
            let p = fill[i];
            col_idx[p] = j;
            values[p] = v;
            fill[i] += 1;
        }
        let mut m = Self {
            n,
            row_ptr,
            col_idx,
            values,
        };
        m.sort_rows();
        m
    }

    fn sort_rows(&mut self) {
        for i in 0..self.n {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut pairs: Vec<(usize, f64)> = self.col_idx[lo..hi]
                .iter()
                .copied()
                .zip(self.values[lo..hi].iter().copied())
                .collect();
            pairs.sort_by_key(|p| p.0);
            for (k, (c, v)) in pairs.into_iter().enumerate() {
                self.col_idx[lo + k] = c;
                self.values[lo + k] = v;
            }
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            n: self.n,
            row_ptr: self.row_ptr.clone(),
            col_idx: self.col_idx.clone(),
            values: vec![0.0; self.values.len()],
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.col_idx[lo..hi]
            .iter()
            .copied()
            .zip(self.values[lo..hi].iter().copied())
    }

    /// Iterates the upper triangle `(i, j, v)` with `i <= j`.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| self.row(i).filter(move |&(j, _)| j >= i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(p) => self.values[lo + p],
            Err(_) => 0.0,
        }
    }

    pub fn half_bandwidth(&self) -> usize {
        (0..self.n)
            .flat_map(|i| self.row(i).map(move |(j, _)| i.abs_diff(j)))
            .max()
            .unwrap_or(0)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        for (i, yi) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = 0.0;
            for p in lo..hi {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi = s;
        }
    }

    /// `A X` for a dense block `X`.
    pub fn mul_dense(&self, x: &DenseMatrix) -> DenseMatrix {
        assert_eq!(x.nrows(), self.n);
        let mut out = DenseMatrix::zeros(self.n, x.ncols());
        for j in 0..x.ncols() {
            self.matvec_into(x.col(j), out.col_mut(j));
        }
        out
    }

    /// `Xᵀ A X`, symmetrized.
    pub fn congruence(&self, x: &DenseMatrix) -> DenseMatrix {
        let ax = self.mul_dense(x);
        let mut r = x.tr_matmul(&ax);
        r.symmetrize();
        r
    }

    /// `xᵀ A y`
    pub fn inner(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.matvec(y);
        super::dense::dot(x, &ay)
    }

    /// `sum_k c_k A_k` over matrices sharing this sparsity pattern or not.
    pub fn linear_combination(terms: &[(f64, &SparseSymMatrix)]) -> Self {
        assert!(!terms.is_empty(), "empty linear combination");
        let n = terms[0].1.n;
        if terms.iter().all(|(_, m)| m.row_ptr == terms[0].1.row_ptr && m.col_idx == terms[0].1.col_idx) {
            let mut out = terms[0].1.zeros_like();
            for (c, m) in terms {
                for (o, v) in out.values.iter_mut().zip(&m.values) {
                    *o += c * v;
                }
            }
            return out;
        }
        let mut upper = BTreeMap::new();
        for (c, m) in terms {
            assert_eq!(m.n, n, "dimension mismatch in linear combination");
            for (i, j, v) in m.upper_entries() {
                *upper.entry((i, j)).or_insert(0.0) += c * v;
            }
        }
        Self::from_upper_map(n, &upper)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }

    pub fn from_dense(a: &DenseMatrix) -> Self {
        assert!(a.is_square());
        let n = a.nrows();
        let mut upper = BTreeMap::new();
        for j in 0..n {
            for i in 0..=j {
                let v = a[(i, j)];
                if v != 0.0 {
                    upper.insert((i, j), v);
                }
            }
        }
        Self::from_upper_map(n, &upper)
    }

    /// Largest `|(i,j) - (j,i)|` over the stored pattern.
    pub fn asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}
