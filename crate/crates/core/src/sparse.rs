//! Compressed sparse row operators used on the hot paths of time evolution
//! and superoperator assembly.

use crate::matrix::{CMatrix, C64, ZERO};

#[derive(Clone, Debug)]
pub struct SparseOp {
    n: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseOp {
    pub fn from_dense(m: &CMatrix) -> Self {
        assert!(m.is_square());
        let n = m.nrows();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for i in 0..n {
            for (j, &v) in m.row(i).iter().enumerate() {
                if v != ZERO {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Self { n, indptr, indices, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Iterate over `(row, col, value)`.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n).flat_map(move |i| {
            (self.indptr[i]..self.indptr[i + 1]).map(move |k| (i, self.indices[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.entries() {
            m[(i, j)] += v;
        }
        m
    }

    /// `out += s * self * x`
    pub fn mul_left_acc(&self, x: &CMatrix, s: C64, out: &mut CMatrix) {
        let n = x.ncols();
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for i in 0..self.n {
            let orow = &mut os[i * n..(i + 1) * n];
            for k in self.indptr[i]..self.indptr[i + 1] {
                let a = s * self.values[k];
                let r = self.indices[k];
                for (o, b) in orow.iter_mut().zip(&xs[r * n..(r + 1) * n]) {
                    *o += a * b;
                }
            }
        }
    }

    /// `out += s * x * self`
    pub fn mul_right_acc(&self, x: &CMatrix, s: C64, out: &mut CMatrix) {
        let n = self.n;
        let rows = x.nrows();
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for r in 0..rows {
            let xrow = &xs[r * n..(r + 1) * n];
            let orow = &mut os[r * n..(r + 1) * n];
            for (k, &xv) in xrow.iter().enumerate() {
                if xv == ZERO {
                    continue;
                }
                let xv = s * xv;
                for p in self.indptr[k]..self.indptr[k + 1] {
                    orow[self.indices[p]] += xv * self.values[p];
                }
            }
        }
    }

    pub fn mul_left(&self, x: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.n, x.ncols());
        self.mul_left_acc(x, C64::new(1.0, 0.0), &mut out);
        out
    }
}
