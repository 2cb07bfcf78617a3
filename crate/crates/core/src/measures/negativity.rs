use crate::error::{Error, Result};
use crate::matrix::CMatrix;
use crate::state::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Partial transpose of a `d_a x d_b` operator on the chosen factor.
pub fn partial_transpose(m: &CMatrix, d_a: usize, d_b: usize, on: Subsystem) -> Result<CMatrix> {
    if m.nrows() != d_a * d_b || !m.is_square() {
        return Err(Error::InvalidDimension(format!("{d_a} x {d_b} does not match dimension {}", m.nrows())));
    }
    Ok(CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| {
        let (i, k) = (r / d_b, r % d_b);
        let (j, l) = (c / d_b, c % d_b);
        match on {
            Subsystem::A => m[(j * d_b + k, i * d_b + l)],
            Subsystem::B => m[(i * d_b + l, j * d_b + k)],
        }
    }))
}

/// log2 of the trace norm of the partial transpose.
pub fn log_negativity_discrete(rho: &DensityMatrix, dims: (usize, usize), on: Subsystem) -> Result<f64> {
    let pt = partial_transpose(rho.matrix(), dims.0, dims.1, on)?;
    let norm: f64 = pt.eigvalsh()?.iter().map(|x| x.abs()).sum();
    Ok(norm.log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c, re};
    use crate::state::KetState;

    #[test]
    fn product_state_has_none() {
        let a = KetState::new(vec![re(1.0), c(0.3, 0.4)]).unwrap();
        let b = KetState::new(vec![re(0.2), re(1.0), c(0.0, 0.5)]).unwrap();
        let rho = a.tensor(&b).to_density();
        assert!(log_negativity_discrete(&rho, (2, 3), Subsystem::B).unwrap().abs() < 1e-9);
    }

    #[test]
    fn bell_state_has_one() {
        let bell = KetState::new(vec![re(1.0), re(0.0), re(0.0), re(1.0)]).unwrap();
        let rho = bell.to_density();
        assert!((log_negativity_discrete(&rho, (2, 2), Subsystem::A).unwrap() - 1.0).abs() < 1e-12);
        assert!((log_negativity_discrete(&rho, (2, 2), Subsystem::B).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_is_an_involution() {
        let m = CMatrix::from_fn(6, 6, |i, j| c(i as f64 * 0.3 - j as f64, (i * j) as f64 * 0.1));
        for on in [Subsystem::A, Subsystem::B] {
            let twice = partial_transpose(&partial_transpose(&m, 2, 3, on).unwrap(), 2, 3, on).unwrap();
            assert_eq!(twice, m);
        }
        // transposing both factors is the full transpose
        let both = partial_transpose(&partial_transpose(&m, 2, 3, Subsystem::A).unwrap(), 2, 3, Subsystem::B).unwrap();
        assert_eq!(both, m.transpose());
    }
}
