use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};
use crate::matrix::{re, CMatrix, C64, I, ONE, ZERO};
use crate::models::LindbladTerm;
use crate::sparse::SparseOp;

/// Linear generator written as
///
/// d rho/dt = K rho + rho R + sum_k c_k A_k rho B_k.
///
/// Lindblad generators, cascaded couplings and anything else of that shape
/// share one representation, so time stepping and superoperator assembly
/// use the same data.
#[derive(Clone, Debug)]
pub struct MasterEquation {
    dim: usize,
    left: SparseOp,
    right: SparseOp,
    sandwiches: Vec<(C64, SparseOp, SparseOp)>,
}

/// Accumulates generator pieces before sparsification.
#[derive(Clone, Debug)]
pub struct GeneratorBuilder {
    dim: usize,
    left: CMatrix,
    right: CMatrix,
    sandwiches: Vec<(C64, CMatrix, CMatrix)>,
}

impl GeneratorBuilder {
    pub fn new(dim: usize) -> Self {
        Self {
            dim,
            left: CMatrix::zeros(dim, dim),
            right: CMatrix::zeros(dim, dim),
            sandwiches: Vec::new(),
        }
    }

    fn check(&self, m: &CMatrix, what: &str) -> Result<()> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::InvalidArgument(format!(
                "{what} has size {}x{}, generator acts on dimension {}",
                m.nrows(),
                m.ncols(),
                self.dim
            )));
        }
        Ok(())
    }

    /// -i [H, rho]
    pub fn hamiltonian(mut self, h: &CMatrix) -> Result<Self> {
        self.check(h, "Hamiltonian")?;
        self.left.axpy(-I, h);
        self.right.axpy(I, h);
        Ok(self)
    }

    /// rate * (2 x rho x^dag - x^dag x rho - rho x^dag x)
    pub fn dissipator(mut self, x: &CMatrix, rate: f64) -> Result<Self> {
        self.check(x, "jump operator")?;
        let xdx = x.adjoint().matmul(x);
        self.left.axpy(re(-rate), &xdx);
        self.right.axpy(re(-rate), &xdx);
        self.sandwiches.push((re(2.0 * rate), x.clone(), x.adjoint()));
        Ok(self)
    }

    /// c * A rho
    pub fn left(mut self, c: C64, a: &CMatrix) -> Result<Self> {
        self.check(a, "left operator")?;
        self.left.axpy(c, a);
        Ok(self)
    }

    /// c * rho B
    pub fn right(mut self, c: C64, b: &CMatrix) -> Result<Self> {
        self.check(b, "right operator")?;
        self.right.axpy(c, b);
        Ok(self)
    }

    /// c * A rho B
    pub fn sandwich(mut self, c: C64, a: &CMatrix, b: &CMatrix) -> Result<Self> {
        self.check(a, "left factor")?;
        self.check(b, "right factor")?;
        self.sandwiches.push((c, a.clone(), b.clone()));
        Ok(self)
    }

    pub fn build(self) -> MasterEquation {
        MasterEquation {
            dim: self.dim,
            left: SparseOp::from_dense(&self.left),
            right: SparseOp::from_dense(&self.right),
            sandwiches: self
                .sandwiches
                .into_iter()
                .filter(|(c, _, _)| *c != ZERO)
                .map(|(c, a, b)| (c, SparseOp::from_dense(&a), SparseOp::from_dense(&b)))
                .collect(),
        }
    }
}

impl MasterEquation {
    /// -i[H, rho] + sum_k rate_k L_{x_k} rho
    pub fn lindblad(h: &CMatrix, terms: &[LindbladTerm]) -> Result<Self> {
        if !h.is_square() {
            return Err(Error::InvalidArgument("Hamiltonian must be square".into()));
        }
        if !h.is_hermitian(1e-10) {
            return Err(Error::InvalidArgument("Hamiltonian is not Hermitian".into()));
        }
        let mut b = GeneratorBuilder::new(h.nrows()).hamiltonian(h)?;
        for t in terms {
            if t.rate < 0.0 {
                return Err(Error::InvalidParameter("negative dissipation rate".into()));
            }
            b = b.dissipator(&t.jump, t.rate)?;
        }
        Ok(b.build())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// out = L(rho)
    pub fn apply_into(&self, rho: &CMatrix, out: &mut CMatrix) {
        out.as_mut_slice().fill(ZERO);
        self.left.mul_left_acc(rho, ONE, out);
        self.right.mul_right_acc(rho, ONE, out);
        let mut tmp = CMatrix::zeros(self.dim, self.dim);
        for (c, a, b) in &self.sandwiches {
            tmp.as_mut_slice().fill(ZERO);
            a.mul_left_acc(rho, ONE, &mut tmp);
            b.mul_right_acc(&tmp, *c, out);
        }
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        self.apply_into(rho, &mut out);
        out
    }

    /// Merged (row, col, value) entries of the superoperator in the
    /// column-stacking convention vec(X)[i + j d] = X[i, j], sorted by
    /// column then row.
    pub fn superoperator_triplets(&self) -> Vec<(usize, usize, C64)> {
        let d = self.dim;
        let mut t: Vec<(usize, usize, C64)> = Vec::new();
        // K rho: (i + j d, k + j d) += K_ik
        for (i, k, v) in self.left.entries() {
            for j in 0..d {
                t.push((i + j * d, k + j * d, v));
            }
        }
        // rho R: (i + j d, i + l d) += R_lj
        for (l, j, v) in self.right.entries() {
            for i in 0..d {
                t.push((i + j * d, i + l * d, v));
            }
        }
        // c A rho B: (i + j d, k + l d) += c A_ik B_lj
        for (c, a, b) in &self.sandwiches {
            for (i, k, av) in a.entries() {
                for (l, j, bv) in b.entries() {
                    t.push((i + j * d, k + l * d, c * av * bv));
                }
            }
        }
        t.sort_by_key(|&(r, c, _)| (c, r));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != ZERO);
        merged
    }

    pub fn superoperator_dense(&self) -> CMatrix {
        let n = self.dim * self.dim;
        let mut m = CMatrix::zeros(n, n);
        for (r, c, v) in self.superoperator_triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Sparse superoperator plus `shift` on the diagonal.
    pub fn superoperator_sparse(&self, shift: C64) -> Result<SparseColMat<usize, C64>> {
        let n = self.dim * self.dim;
        let mut trip: Vec<Triplet<usize, usize, C64>> =
            self.superoperator_triplets().into_iter().map(|(r, c, v)| Triplet::new(r, c, v)).collect();
        if shift != ZERO {
            for i in 0..n {
                trip.push(Triplet::new(i, i, shift));
            }
        }
        SparseColMat::try_new_from_triplets(n, n, &trip)
            .map_err(|e| Error::Numerical(format!("sparse assembly: {e:?}")))
    }
}

/// Column-stacked vec(X).
pub fn vectorize(x: &CMatrix) -> Vec<C64> {
    let d = x.nrows();
    let mut v = Vec::with_capacity(d * x.ncols());
    for j in 0..x.ncols() {
        for i in 0..d {
            v.push(x[(i, j)]);
        }
    }
    v
}

pub fn unvectorize(v: &[C64], d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| v[i + j * d])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::c;

    fn random_matrix(d: usize, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        CMatrix::from_fn(d, d, |_, _| c(next(), next()))
    }

    #[test]
    fn vec_roundtrip_and_convention() {
        let x = random_matrix(4, 1);
        assert_eq!(unvectorize(&vectorize(&x), 4), x);
        // vec(A X B) = (B^T kron A) vec(X)
        let a = random_matrix(4, 2);
        let b = random_matrix(4, 3);
        let lhs = vectorize(&a.matmul(&x).matmul(&b));
        let rhs = b.transpose().kron(&a).mat_vec(&vectorize(&x));
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).norm() < 1e-12);
        }
    }

    #[test]
    fn superoperator_matches_matrix_form() {
        let h = random_matrix(5, 4).hermitian_part();
        let x = random_matrix(5, 5);
        let y = random_matrix(5, 6);
        let gen = GeneratorBuilder::new(5)
            .hamiltonian(&h)
            .unwrap()
            .dissipator(&x, 0.3)
            .unwrap()
            .sandwich(c(0.2, -0.1), &x, &y)
            .unwrap()
            .left(c(0.0, 0.5), &y)
            .unwrap()
            .right(c(-0.4, 0.0), &x)
            .unwrap()
            .build();
        let rho = random_matrix(5, 7);
        let direct = vectorize(&gen.apply(&rho));
        let viasuper = gen.superoperator_dense().mat_vec(&vectorize(&rho));
        for (l, r) in direct.iter().zip(&viasuper) {
            assert!((l - r).norm() < 1e-12);
        }
    }

    #[test]
    fn lindblad_is_trace_preserving() {
        let h = random_matrix(4, 8).hermitian_part();
        let x = random_matrix(4, 9);
        let l = MasterEquation::lindblad(&h, &[LindbladTerm::new(x, 0.7).unwrap()]).unwrap();
        let sup = l.superoperator_dense();
        let rho = random_matrix(4, 10);
        let out = sup.mat_vec(&vectorize(&rho));
        let tr: C64 = (0..4).map(|i| out[i + 4 * i]).sum();
        assert!(tr.norm() < 1e-13);
        assert!(MasterEquation::lindblad(&random_matrix(4, 11), &[]).is_err());
        assert!(MasterEquation::lindblad(&h, &[LindbladTerm::new(CMatrix::identity(3), 1.0).unwrap()]).is_err());
    }
}
