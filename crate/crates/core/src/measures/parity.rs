use crate::error::{Error, Result};
use crate::matrix::{CMatrix, ONE};
use crate::state::DensityMatrix;

/// Weights of the two parity sectors and the size of the coherences
/// between them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParityDecomposition {
    /// cos^2 theta
    pub weight_even: f64,
    /// sin^2 theta
    pub weight_odd: f64,
    /// max |P+ rho P-|
    pub off_block_norm: f64,
    pub theta: f64,
}

fn projectors(u: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    if !u.is_square() {
        return Err(Error::InvalidArgument("parity operator must be square".into()));
    }
    let n = u.nrows();
    let id = CMatrix::identity(n);
    if (&u.matmul(u) - &id).max_abs() > 1e-12 || !u.is_hermitian(1e-12) {
        return Err(Error::InvalidArgument("parity operator is not a Hermitian involution".into()));
    }
    let mut pe = id.clone();
    pe.axpy(ONE, u);
    let mut po = id;
    po.axpy(-ONE, u);
    Ok((pe.scale_re(0.5), po.scale_re(0.5)))
}

pub fn parity_decompose(rho: &DensityMatrix, u: &CMatrix) -> Result<ParityDecomposition> {
    if u.nrows() != rho.dim() {
        return Err(Error::InvalidDimension("parity operator and state differ in size".into()));
    }
    let (pe, po) = projectors(u)?;
    let m = rho.matrix();
    let weight_even = rho.expect(&pe).re;
    let weight_odd = rho.expect(&po).re;
    let off_block_norm = pe.matmul(m).matmul(&po).max_abs();
    let theta = weight_odd.max(0.0).sqrt().atan2(weight_even.max(0.0).sqrt());
    Ok(ParityDecomposition { weight_even, weight_odd, off_block_norm, theta })
}

/// Largest off-diagonal coherence between basis states of equal parity.
/// Assumes a diagonal parity operator.
pub fn max_within_parity_coherence(rho: &DensityMatrix, u: &CMatrix) -> Result<f64> {
    if u.nrows() != rho.dim() {
        return Err(Error::InvalidDimension("parity operator and state differ in size".into()));
    }
    projectors(u)?;
    let n = rho.dim();
    let mut best: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j && (u[(i, i)] - u[(j, j)]).norm() < 1e-12 {
                best = best.max(rho.matrix()[(i, j)].norm());
            }
        }
    }
    Ok(best)
}
