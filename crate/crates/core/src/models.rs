//! Hamiltonians of the anisotropic Rabi, Dicke and two-mode Dicke models.

use crate::error::{Error, Result};
use crate::lindblad::MasterEquation;
use crate::matrix::{re, CMatrix};
use crate::operators::{annihilation, embed, pauli, spin_operators, Axis};
use crate::space::{Factor, HilbertSpec};

/// Frequencies in units of the field frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RabiParams {
    pub omega: f64,
    /// Qubit splitting (or second-mode frequency in the two-mode model).
    pub big_omega: f64,
    /// Co-rotating coupling.
    pub lambda1: f64,
    /// Counter-rotating coupling.
    pub lambda2: f64,
    pub gamma: f64,
}

impl RabiParams {
    pub fn new(omega: f64, big_omega: f64, lambda1: f64, lambda2: f64, gamma: f64) -> Result<Self> {
        let p = Self { omega, big_omega, lambda1, lambda2, gamma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.omega, self.big_omega, self.lambda1, self.lambda2, self.gamma];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite model parameter".into()));
        }
        if self.gamma < 0.0 {
            return Err(Error::InvalidParameter("gamma must be nonnegative".into()));
        }
        if self.lambda1 < 0.0 || self.lambda2 < 0.0 {
            return Err(Error::InvalidParameter("couplings must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Dissipator `rate * (2 x rho x^dag - x^dag x rho - rho x^dag x)`.
#[derive(Clone, Debug)]
pub struct LindbladTerm {
    pub jump: CMatrix,
    pub rate: f64,
}

impl LindbladTerm {
    pub fn new(jump: CMatrix, rate: f64) -> Result<Self> {
        if !(rate >= 0.0 && rate.is_finite()) {
            return Err(Error::InvalidParameter(format!("rate {rate} must be finite and nonnegative")));
        }
        if !jump.is_square() {
            return Err(Error::InvalidDimension("jump operator must be square".into()));
        }
        Ok(Self { jump, rate })
    }
}

pub fn arm_space(n_max: usize) -> Result<HilbertSpec> {
    HilbertSpec::boson_qubit(n_max)
}

/// omega a^dag a + (Omega/2) sigma_z + l1 (a^dag s- + s+ a) + l2 (a^dag s+ + s- a)
pub fn build_arm_hamiltonian(p: &RabiParams, n_max: usize) -> Result<CMatrix> {
    let spec = arm_space(n_max)?;
    let a1 = annihilation(n_max)?;
    let a = embed(&spec, &[(0, &a1)])?;
    let ad = a.adjoint();
    let sp = embed(&spec, &[(1, &pauli(Axis::Plus))])?;
    let sm = sp.adjoint();
    let sz = embed(&spec, &[(1, &pauli(Axis::Z))])?;

    let mut h = ad.matmul(&a).scale_re(p.omega);
    h.axpy(re(p.big_omega / 2.0), &sz);
    h.axpy(re(p.lambda1), &(&ad.matmul(&sm) + &sp.matmul(&a)));
    h.axpy(re(p.lambda2), &(&ad.matmul(&sp) + &sm.matmul(&a)));
    Ok(h)
}

/// Quantum Rabi model omega a^dag a + (Omega/2) sigma_z + g sigma_x (a + a^dag).
pub fn build_rabi_hamiltonian(omega: f64, big_omega: f64, g: f64, n_max: usize) -> Result<CMatrix> {
    let spec = arm_space(n_max)?;
    let a1 = annihilation(n_max)?;
    let x1 = &a1 + &a1.adjoint();
    let n1 = a1.adjoint().matmul(&a1);
    let mut h = embed(&spec, &[(0, &n1)])?.scale_re(omega);
    h.axpy(re(big_omega / 2.0), &embed(&spec, &[(1, &pauli(Axis::Z))])?);
    h.axpy(re(g), &embed(&spec, &[(0, &x1), (1, &pauli(Axis::X))])?);
    Ok(h)
}

/// Two-mode model omega a^dag a + Omega b^dag b + l1 (a^dag b + b^dag a)
/// + l2 (a^dag b^dag + b a), with `a` the first factor.
pub fn build_nad_hamiltonian(p: &RabiParams, n_a: usize, n_b: usize) -> Result<CMatrix> {
    let spec = HilbertSpec::two_boson(n_a, n_b)?;
    let a = embed(&spec, &[(0, &annihilation(n_a)?)])?;
    let b = embed(&spec, &[(1, &annihilation(n_b)?)])?;
    nad_from_modes(p, &a, &b)
}

pub(crate) fn nad_from_modes(p: &RabiParams, a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let ad = a.adjoint();
    let bd = b.adjoint();
    let mut h = ad.matmul(a).scale_re(p.omega);
    h.axpy(re(p.big_omega), &bd.matmul(b));
    h.axpy(re(p.lambda1), &(&ad.matmul(b) + &bd.matmul(a)));
    h.axpy(re(p.lambda2), &(&ad.matmul(&bd) + &b.matmul(a)));
    Ok(h)
}

/// omega a^dag a + (Omega/2) S_z + l1 (a^dag S- + S+ a) + l2 (a^dag S+ + S- a)
/// for spin `two_s / 2`, with S_z|m> = m|m>.
///
/// For S = 1/2 this equals the Pauli-form Rabi Hamiltonian with Omega halved.
pub fn build_adm_hamiltonian(p: &RabiParams, two_s: usize, n_max: usize) -> Result<CMatrix> {
    let spec = HilbertSpec::new(vec![Factor::Boson { n_max }, Factor::Spin { two_s }])?;
    let (sp1, sm1, sz1) = spin_operators(two_s)?;
    let a = embed(&spec, &[(0, &annihilation(n_max)?)])?;
    let ad = a.adjoint();
    let sp = embed(&spec, &[(1, &sp1)])?;
    let sm = embed(&spec, &[(1, &sm1)])?;
    let sz = embed(&spec, &[(1, &sz1)])?;

    let mut h = ad.matmul(&a).scale_re(p.omega);
    h.axpy(re(p.big_omega / 2.0), &sz);
    h.axpy(re(p.lambda1), &(&ad.matmul(&sm) + &sp.matmul(&a)));
    h.axpy(re(p.lambda2), &(&ad.matmul(&sp) + &sm.matmul(&a)));
    Ok(h)
}

/// Field truncated to {|0>, |1>} and written with Pauli operators tau on
/// the field, in the basis (|0>, |1>) x (|up>, |down>):
///
/// (omega/2) tau_z + (Omega/2) sigma_z + ((l1+l2)/2) tau_x sigma_x + ((l1-l2)/2) tau_y sigma_y
///
/// where tau_z = 2 tau+ tau- - 1. This equals the ARM Hamiltonian projected
/// on one photon minus the constant omega/2.
pub fn build_two_qubit_arm(p: &RabiParams) -> CMatrix {
    // tau+ raises |0> to |1>
    let tp = CMatrix::from_real(2, 2, &[0.0, 0.0, 1.0, 0.0]).expect("2x2");
    let tm = tp.adjoint();
    let tx = &tp + &tm;
    let ty = (&tp - &tm).scale(crate::matrix::c(0.0, -1.0));
    let tz = &tp.matmul(&tm).scale_re(2.0) - &CMatrix::identity(2);
    let i2 = CMatrix::identity(2);

    let mut h = tz.kron(&i2).scale_re(p.omega / 2.0);
    h.axpy(re(p.big_omega / 2.0), &i2.kron(&pauli(Axis::Z)));
    h.axpy(re((p.lambda1 + p.lambda2) / 2.0), &tx.kron(&pauli(Axis::X)));
    h.axpy(re((p.lambda1 - p.lambda2) / 2.0), &ty.kron(&pauli(Axis::Y)));
    h
}

/// Photon loss `gamma * L_a` on the ARM space.
pub fn arm_loss(p: &RabiParams, n_max: usize) -> Result<Vec<LindbladTerm>> {
    let spec = arm_space(n_max)?;
    let a = embed(&spec, &[(0, &annihilation(n_max)?)])?;
    Ok(vec![LindbladTerm::new(a, p.gamma)?])
}

/// Loss of the first mode of the two-mode model at the given rate.
pub fn nad_loss(rate: f64, n_a: usize, n_b: usize) -> Result<Vec<LindbladTerm>> {
    let spec = HilbertSpec::two_boson(n_a, n_b)?;
    let a = embed(&spec, &[(0, &annihilation(n_a)?)])?;
    Ok(vec![LindbladTerm::new(a, rate)?])
}

/// Dense superoperator acting on column-stacked vec(rho), i.e.
/// vec(A X B) = (B^T kron A) vec(X).
pub fn build_liouvillian(h: &CMatrix, terms: &[LindbladTerm]) -> Result<CMatrix> {
    Ok(MasterEquation::lindblad(h, terms)?.superoperator_dense())
}
