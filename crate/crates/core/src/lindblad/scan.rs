use crate::error::{Error, Result};
use crate::lindblad::steady::steady_state_null;
use crate::models::{arm_loss, build_arm_hamiltonian, RabiParams};
use crate::state::DensityMatrix;

#[derive(Clone, Debug)]
pub struct TruncationScan {
    pub n_max: Vec<usize>,
    pub values: Vec<f64>,
    /// values[k+1] - values[k]
    pub differences: Vec<f64>,
    pub converged: bool,
}

/// Evaluate `observable` at each truncation and flag convergence when the
/// last successive difference is within `tol`.
pub fn truncation_scan(
    n_max: &[usize],
    tol: f64,
    mut observable: impl FnMut(usize) -> Result<f64>,
) -> Result<TruncationScan> {
    if n_max.len() < 2 {
        return Err(Error::InvalidArgument("a truncation scan needs at least two truncations".into()));
    }
    let values = n_max.iter().map(|&n| observable(n)).collect::<Result<Vec<_>>>()?;
    let differences: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let converged = differences.last().is_some_and(|d| d.abs() <= tol);
    Ok(TruncationScan { n_max: n_max.to_vec(), values, differences, converged })
}

/// Population of the highest Fock level of the field in an ARM state.
pub fn field_tail_mass(rho: &DensityMatrix, n_max: usize) -> Result<f64> {
    let field = rho.trace_out_second(n_max + 1, 2)?;
    Ok(field.matrix()[(n_max, n_max)].re)
}

/// Steady state of the damped ARM at the given truncation.
pub fn arm_steady_state(p: &RabiParams, n_max: usize) -> Result<DensityMatrix> {
    let h = build_arm_hamiltonian(p, n_max)?;
    Ok(steady_state_null(&h, &arm_loss(p, n_max)?)?.rho_ss)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_truncations_have_zero_difference() {
        let p = RabiParams::new(1.0, 1.0, 0.3, 0.3, 0.1).unwrap();
        let s = truncation_scan(&[6, 6], 1e-12, |n| field_tail_mass(&arm_steady_state(&p, n)?, n)).unwrap();
        assert_eq!(s.differences, vec![0.0]);
        assert!(s.converged);
        assert!(truncation_scan(&[6], 1e-3, |_| Ok(0.0)).is_err());
    }

    #[test]
    fn weak_coupling_tail_is_negligible() {
        let p = RabiParams::new(1.0, 1.0, 0.1, 0.1, 0.1).unwrap();
        let tail = field_tail_mass(&arm_steady_state(&p, 10).unwrap(), 10).unwrap();
        assert!(tail.abs() < 1e-8, "tail {tail}");
    }

    #[test]
    fn strong_coupling_tail_shrinks_with_truncation() {
        let p = RabiParams::new(1.0, 1.0, 1.0, 1.0, 0.1).unwrap();
        let s = truncation_scan(&[10, 14, 18, 22], 1.0, |n| field_tail_mass(&arm_steady_state(&p, n)?, n)).unwrap();
        for w in s.values.windows(2) {
            assert!(w[1] < w[0], "{:?}", s.values);
        }
    }
}
