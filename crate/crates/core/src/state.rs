use crate::error::{Error, Result};
use crate::matrix::{inner, re, vec_norm, CMatrix, C64, ZERO};
use crate::space::HilbertSpec;

/// Normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct KetState {
    amplitudes: Vec<C64>,
}

impl KetState {
    /// Normalizes the given amplitudes.
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidDimension("empty state vector".into()));
        }
        if amplitudes.iter().any(|z| !z.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude".into()));
        }
        let n = vec_norm(&amplitudes);
        if n < 1e-300 {
            return Err(Error::InvalidState("zero vector cannot be normalized".into()));
        }
        Ok(Self { amplitudes: amplitudes.into_iter().map(|z| z / n).collect() })
    }

    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidDimension(format!("basis index {index} out of range {dim}")));
        }
        let mut v = vec![ZERO; dim];
        v[index] = re(1.0);
        Ok(Self { amplitudes: v })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn tensor(&self, other: &KetState) -> KetState {
        let mut v = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                v.push(a * b);
            }
        }
        KetState { amplitudes: v }
    }

    /// <self|other>
    pub fn overlap(&self, other: &KetState) -> C64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn projector(&self) -> CMatrix {
        let n = self.dim();
        CMatrix::from_fn(n, n, |i, j| self.amplitudes[i] * self.amplitudes[j].conj())
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix { matrix: self.projector(), space: None }
    }

    pub fn apply(&self, op: &CMatrix) -> Result<KetState> {
        if op.ncols() != self.dim() {
            return Err(Error::InvalidDimension("operator does not act on this state".into()));
        }
        KetState::new(op.mat_vec(&self.amplitudes))
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: CMatrix,
    space: Option<HilbertSpec>,
}

pub const HERMITIAN_TOL: f64 = 1e-9;
pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-8;

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let rho = Self { matrix, space: None };
        rho.validate()?;
        Ok(rho)
    }

    /// Wraps a matrix without checks. Used for integrator output, where
    /// positivity is monitored rather than enforced.
    pub fn new_unchecked(matrix: CMatrix) -> Self {
        Self { matrix, space: None }
    }

    pub fn with_space(mut self, space: HilbertSpec) -> Result<Self> {
        if space.total_dim() != self.dim() {
            return Err(Error::InvalidDimension(format!(
                "space {space} has dimension {}, state has {}",
                space.total_dim(),
                self.dim()
            )));
        }
        self.space = Some(space);
        Ok(self)
    }

    pub fn space(&self) -> Option<&HilbertSpec> {
        self.space.as_ref()
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix;
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::InvalidDimension("density matrix must be square".into()));
        }
        if !m.is_hermitian(HERMITIAN_TOL) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = m.trace();
        if (tr - re(1.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn purity(&self) -> f64 {
        // Tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.matrix.as_slice().iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> Result<f64> {
        Ok(self.matrix.eigvalsh()?[0])
    }

    pub fn expect(&self, op: &CMatrix) -> C64 {
        let n = self.dim();
        let mut s = ZERO;
        for i in 0..n {
            for j in 0..n {
                s += op[(i, j)] * self.matrix[(j, i)];
            }
        }
        s
    }

    /// Trace out the second factor of a bipartition `d_a x d_b`.
    pub fn trace_out_second(&self, d_a: usize, d_b: usize) -> Result<DensityMatrix> {
        self.check_split(d_a, d_b)?;
        let m = CMatrix::from_fn(d_a, d_a, |i, j| (0..d_b).map(|k| self.matrix[(i * d_b + k, j * d_b + k)]).sum());
        Ok(DensityMatrix::new_unchecked(m))
    }

    /// Trace out the first factor of a bipartition `d_a x d_b`.
    pub fn trace_out_first(&self, d_a: usize, d_b: usize) -> Result<DensityMatrix> {
        self.check_split(d_a, d_b)?;
        let m = CMatrix::from_fn(d_b, d_b, |i, j| (0..d_a).map(|k| self.matrix[(k * d_b + i, k * d_b + j)]).sum());
        Ok(DensityMatrix::new_unchecked(m))
    }

    fn check_split(&self, d_a: usize, d_b: usize) -> Result<()> {
        if d_a * d_b != self.dim() {
            return Err(Error::InvalidDimension(format!(
                "{d_a} x {d_b} does not match dimension {}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// Trace distance 0.5 * ||rho - sigma||_1.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::InvalidDimension("trace distance of unequal dimensions".into()));
        }
        let d = &self.matrix - &other.matrix;
        Ok(0.5 * d.eigvalsh()?.iter().map(|x| x.abs()).sum::<f64>())
    }
}
