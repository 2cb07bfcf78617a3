use crate::error::{Error, Result};
use crate::matrix::{re, CMatrix, C64};
use crate::state::{DensityMatrix, KetState, PSD_TOL};

/// Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a)).
pub fn uhlmann_fidelity(rho_a: &DensityMatrix, rho_b: &DensityMatrix) -> Result<f64> {
    if rho_a.dim() != rho_b.dim() {
        return Err(Error::InvalidDimension("fidelity of states with unequal dimensions".into()));
    }
    for r in [rho_a, rho_b] {
        let min = r.min_eigenvalue()?;
        if min < -PSD_TOL {
            return Err(Error::InvalidState(format!("state has eigenvalue {min:e}")));
        }
    }
    let s = sqrt_floored(rho_a.matrix())?;
    let m = s.matmul(rho_b.matrix()).matmul(&s);
    let vals = m.eigvalsh()?;
    let floor = noise_floor(&vals, m.nrows());
    Ok(vals.iter().filter(|&&v| v > floor).map(|v| v.sqrt()).sum())
}

/// Eigenvalues this small are rounding noise; their square roots are not.
fn noise_floor(vals: &[f64], d: usize) -> f64 {
    let top = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    64.0 * f64::EPSILON * d as f64 * top
}

fn sqrt_floored(m: &CMatrix) -> Result<CMatrix> {
    let (vals, u) = m.eigh()?;
    let floor = noise_floor(&vals, m.nrows());
    let d: Vec<C64> = vals.iter().map(|&v| re(if v > floor { v.sqrt() } else { 0.0 })).collect();
    Ok(u.matmul(&CMatrix::diag(&d)).matmul(&u.adjoint()))
}

/// sqrt(<psi|rho|psi>), equal to the Uhlmann fidelity when one state is pure.
pub fn fidelity_pure(psi: &KetState, rho: &DensityMatrix) -> Result<f64> {
    if psi.dim() != rho.dim() {
        return Err(Error::InvalidDimension("fidelity of states with unequal dimensions".into()));
    }
    let a = psi.amplitudes();
    let v = rho.matrix().mat_vec(a);
    let e: f64 = a.iter().zip(&v).map(|(x, y)| (x.conj() * y).re).sum();
    Ok(e.max(0.0).sqrt())
}
