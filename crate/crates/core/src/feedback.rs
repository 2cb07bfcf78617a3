//! Coherent feedback without delay.
//!
//! Dissipators in this module follow the half-rate convention
//! (gamma/2) L_x with L_x rho = 2 x rho x^dag - x^dag x rho - rho x^dag x,
//! so `gamma` is the energy decay rate of the mode.
//!
//! The source cavity (modes a, b) feeds a fast driven cavity c. A fraction
//! `eta` of the source output reaches c; the rest is lost. With
//! kappa = sqrt(eta gamma gamma_d) the joint state W obeys
//!
//!   dW/dt = -i[H_nAD + Omega_d c^dag c + H_int, W]
//!           + kappa ([a W, c^dag] + [c, W a^dag])
//!           + (gamma/2) L_a W + (gamma_d/2) L_c W,
//!   H_int = i mu (kappa/2) (a^dag c - c^dag a).
//!
//! Eliminating c gives loss of a at gamma (1 + eta mu (2 + mu)).

use crate::error::{Error, Result};
use crate::lindblad::{evolve_sampled, evolve_with, GeneratorBuilder, IntegratorOptions, MasterEquation};
use crate::matrix::{c, re, CMatrix, C64, ZERO};
use crate::measures::fidelity_pure;
use crate::models::{nad_from_modes, RabiParams};
use crate::operators::{annihilation, coherent_amplitudes, embed};
use crate::space::{Factor, HilbertSpec};
use crate::state::{DensityMatrix, KetState};

/// Fidelity of the best classical strategy.
pub const CLASSICAL_FIDELITY: f64 = 2.0 / 3.0;

/// Largest joint dimension accepted by the cascade builders.
pub const CASCADE_MAX_DIM: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackParams {
    pub mu: f64,
    /// Loop efficiency in [0, 1].
    pub eta: f64,
    pub gamma_d: f64,
    pub omega_d: f64,
}

impl FeedbackParams {
    pub fn new(mu: f64, eta: f64, gamma_d: f64, omega_d: f64) -> Result<Self> {
        let f = Self { mu, eta, gamma_d, omega_d };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if [self.mu, self.eta, self.gamma_d, self.omega_d].iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite feedback parameter".into()));
        }
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(Error::InvalidParameter(format!("loop efficiency {} outside [0, 1]", self.eta)));
        }
        if self.gamma_d <= 0.0 {
            return Err(Error::InvalidParameter("driven-cavity decay must be positive".into()));
        }
        Ok(())
    }
}

/// gamma (1 + eta mu (2 + mu)).
pub fn effective_gamma(gamma: f64, mu: f64, eta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("loop efficiency {eta} outside [0, 1]")));
    }
    if !(gamma >= 0.0 && gamma.is_finite() && mu.is_finite()) {
        return Err(Error::InvalidParameter("gamma must be finite and nonnegative, mu finite".into()));
    }
    let g = gamma * (1.0 + eta * mu * (2.0 + mu));
    if g < 0.0 {
        return Err(Error::InvalidParameter(format!("loop gain gives negative damping {g}")));
    }
    Ok(g)
}

/// Fock truncations of the source modes a, b and the driven mode c.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CascadeTruncation {
    pub n_a: usize,
    pub n_b: usize,
    pub n_c: usize,
}

impl CascadeTruncation {
    pub fn space(&self) -> Result<HilbertSpec> {
        if self.n_c < 2 {
            return Err(Error::InvalidDimension("driven cavity needs at least |0>, |1>, |2>".into()));
        }
        let spec = HilbertSpec::new(vec![
            Factor::Boson { n_max: self.n_a },
            Factor::Boson { n_max: self.n_b },
            Factor::Boson { n_max: self.n_c },
        ])?;
        if spec.total_dim() > CASCADE_MAX_DIM {
            return Err(Error::Capacity { dim: spec.total_dim(), limit: CASCADE_MAX_DIM });
        }
        Ok(spec)
    }

    pub fn source_dim(&self) -> usize {
        (self.n_a + 1) * (self.n_b + 1)
    }
}

/// Generator of the joint source + driven cavity state.
pub fn cascade_master_equation(p: &RabiParams, f: &FeedbackParams, tr: CascadeTruncation) -> Result<MasterEquation> {
    p.validate()?;
    f.validate()?;
    let spec = tr.space()?;
    let a = embed(&spec, &[(0, &annihilation(tr.n_a)?)])?;
    let b = embed(&spec, &[(1, &annihilation(tr.n_b)?)])?;
    let cc = embed(&spec, &[(2, &annihilation(tr.n_c)?)])?;
    let ad = a.adjoint();
    let cd = cc.adjoint();
    let kappa = (f.eta * p.gamma * f.gamma_d).sqrt();

    let mut h = nad_from_modes(p, &a, &b)?;
    h.axpy(re(f.omega_d), &cd.matmul(&cc));
    // i mu kappa/2 (a^dag c - c^dag a)
    let hint = (&ad.matmul(&cc) - &cd.matmul(&a)).scale(c(0.0, f.mu * kappa / 2.0));
    h = &h + &hint;

    let k = re(kappa);
    // [a W, c^dag] + [c, W a^dag] = a W c^dag - c^dag a W + c W a^dag - W a^dag c
    Ok(GeneratorBuilder::new(spec.total_dim())
        .hamiltonian(&h)?
        .dissipator(&a, p.gamma / 2.0)?
        .dissipator(&cc, f.gamma_d / 2.0)?
        .sandwich(k, &a, &cd)?
        .left(-k, &cd.matmul(&a))?
        .sandwich(k, &cc, &ad)?
        .right(-k, &ad.matmul(&cc))?
        .build())
}

/// Dense superoperator of the cascade generator (column stacking).
pub fn build_cascade_liouvillian(p: &RabiParams, f: &FeedbackParams, tr: CascadeTruncation) -> Result<CMatrix> {
    const DENSE_LIMIT: usize = 48;
    let d = tr.space()?.total_dim();
    if d > DENSE_LIMIT {
        return Err(Error::Capacity { dim: d, limit: DENSE_LIMIT });
    }
    Ok(cascade_master_equation(p, f, tr)?.superoperator_dense())
}

/// Source-cavity state Tr_c W.
pub fn source_state(w: &DensityMatrix, tr: CascadeTruncation) -> Result<DensityMatrix> {
    w.trace_out_second(tr.source_dim(), tr.n_c + 1)
}

/// Joint state rho_source x |0><0|_c.
pub fn with_empty_driven_cavity(rho: &DensityMatrix, tr: CascadeTruncation) -> Result<DensityMatrix> {
    if rho.dim() != tr.source_dim() {
        return Err(Error::InvalidDimension("source state does not match the truncation".into()));
    }
    let mut vac = CMatrix::zeros(tr.n_c + 1, tr.n_c + 1);
    vac[(0, 0)] = re(1.0);
    Ok(DensityMatrix::new_unchecked(rho.matrix().kron(&vac)))
}

/// -i[H_nAD, rho] + (gamma_eff/2) L_a rho on the two-mode space.
pub fn effective_master_equation(p: &RabiParams, gamma_eff: f64, n_a: usize, n_b: usize) -> Result<MasterEquation> {
    if !(gamma_eff >= 0.0 && gamma_eff.is_finite()) {
        return Err(Error::InvalidParameter(format!("effective damping {gamma_eff} must be nonnegative")));
    }
    let spec = HilbertSpec::two_boson(n_a, n_b)?;
    let a = embed(&spec, &[(0, &annihilation(n_a)?)])?;
    let b = embed(&spec, &[(1, &annihilation(n_b)?)])?;
    let h = nad_from_modes(p, &a, &b)?;
    Ok(GeneratorBuilder::new(spec.total_dim()).hamiltonian(&h)?.dissipator(&a, gamma_eff / 2.0)?.build())
}

pub fn effective_evolution(
    rho0: &DensityMatrix,
    p: &RabiParams,
    gamma_eff: f64,
    t: f64,
    n_a: usize,
    n_b: usize,
) -> Result<DensityMatrix> {
    let gen = effective_master_equation(p, gamma_eff, n_a, n_b)?;
    if rho0.dim() != gen.dim() {
        return Err(Error::InvalidDimension("initial state does not match the truncation".into()));
    }
    evolve_with(rho0, &gen, t, IntegratorOptions::default())
}

/// (|N>_a |0>_b - |0>_a |N>_b) / sqrt 2
pub fn noon_state(n: usize, n_a: usize, n_b: usize) -> Result<KetState> {
    if n == 0 || n > n_a || n > n_b {
        return Err(Error::InvalidDimension(format!("NOON state with N = {n} needs 1 <= N <= truncation")));
    }
    let db = n_b + 1;
    let mut amp = vec![ZERO; (n_a + 1) * db];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    amp[n * db] = re(s);
    amp[n] = re(-s);
    KetState::new(amp)
}

/// (|alpha>_a |0>_b + |0>_a |alpha>_b) / sqrt(2 (1 + e^{-|alpha|^2}))
pub fn entangled_coherent_state(alpha: C64, n_a: usize, n_b: usize) -> Result<KetState> {
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument("non-finite coherent amplitude".into()));
    }
    let ca = coherent_amplitudes(alpha, n_a);
    let cb = coherent_amplitudes(alpha, n_b);
    let norm = (2.0 * (1.0 + (-alpha.norm_sqr()).exp())).sqrt();
    let db = n_b + 1;
    let mut amp = vec![ZERO; (n_a + 1) * db];
    for (i, x) in ca.iter().enumerate() {
        amp[i * db] += x / norm;
    }
    for (j, y) in cb.iter().enumerate() {
        amp[j] += y / norm;
    }
    let n2: f64 = amp.iter().map(|z| z.norm_sqr()).sum();
    if (n2 - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidDimension(format!(
            "truncation ({n_a}, {n_b}) too small for |alpha| = {}: norm^2 = {n2}",
            alpha.norm()
        )));
    }
    KetState::new(amp)
}

#[derive(Clone, Debug, PartialEq)]
pub struct FidelityTrajectory {
    pub times: Vec<f64>,
    pub fidelity: Vec<f64>,
    /// First time the fidelity falls below 2/3, linearly interpolated
    /// between grid points.
    pub classical_crossing: Option<f64>,
}

/// Uhlmann fidelity between |psi0><psi0| and the state evolved under the
/// effective model. For a pure reference this is sqrt(<psi0|rho(t)|psi0>).
pub fn fidelity_trajectory(
    psi0: &KetState,
    p: &RabiParams,
    gamma_eff: f64,
    times: &[f64],
    n_a: usize,
    n_b: usize,
) -> Result<FidelityTrajectory> {
    let gen = effective_master_equation(p, gamma_eff, n_a, n_b)?;
    if psi0.dim() != gen.dim() {
        return Err(Error::InvalidDimension("initial state does not match the truncation".into()));
    }
    let states = evolve_sampled(&psi0.to_density(), &gen, times, IntegratorOptions::default())?;
    let fidelity = states.iter().map(|r| fidelity_pure(psi0, r)).collect::<Result<Vec<_>>>()?;
    let classical_crossing = first_crossing(times, &fidelity, CLASSICAL_FIDELITY);
    Ok(FidelityTrajectory { times: times.to_vec(), fidelity, classical_crossing })
}

fn first_crossing(t: &[f64], f: &[f64], level: f64) -> Option<f64> {
    if f.first().is_some_and(|&x| x < level) {
        return Some(t[0]);
    }
    (1..f.len()).find(|&k| f[k] < level).map(|k| {
        let (t0, t1, f0, f1) = (t[k - 1], t[k], f[k - 1], f[k]);
        t0 + (f0 - level) / (f0 - f1) * (t1 - t0)
    })
}
