//! Dormand-Prince 5(4) integration of master equations.

use crate::error::{Error, Result};
use crate::lindblad::generator::MasterEquation;
use crate::lindblad::steady::{Method, SteadyStateReport};
use crate::matrix::{re, CMatrix, C64};
use crate::models::LindbladTerm;
use crate::state::DensityMatrix;

#[derive(Clone, Copy, Debug)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    pub dt_max: f64,
    /// Steps below this size raise a stiffness error.
    pub h_min: f64,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { rtol: 1e-9, atol: 1e-11, dt_max: 0.5, h_min: 1e-12 }
    }
}

impl IntegratorOptions {
    pub fn with_dt_max(dt_max: f64) -> Self {
        Self { dt_max, ..Self::default() }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Stepper state: time, density matrix and the derivative at that point.
pub struct Integrator<'a> {
    gen: &'a MasterEquation,
    opts: IntegratorOptions,
    pub t: f64,
    y: CMatrix,
    k1: CMatrix,
    h: f64,
    pub steps: usize,
    pub rejected: usize,
}

fn lin(y: &CMatrix, h: f64, terms: &[(f64, &CMatrix)]) -> CMatrix {
    let mut out = y.clone();
    for (c, k) in terms {
        if *c != 0.0 {
            out.axpy(re(h * c), k);
        }
    }
    out
}

impl<'a> Integrator<'a> {
    pub fn new(gen: &'a MasterEquation, rho0: &CMatrix, opts: IntegratorOptions) -> Result<Self> {
        if rho0.nrows() != gen.dim() || rho0.ncols() != gen.dim() {
            return Err(Error::InvalidArgument(format!(
                "state dimension {} does not match generator dimension {}",
                rho0.nrows(),
                gen.dim()
            )));
        }
        if !(opts.dt_max > 0.0) {
            return Err(Error::InvalidArgument("dt_max must be positive".into()));
        }
        let k1 = gen.apply(rho0);
        // initial step from the derivative scale
        let scale = k1.max_abs().max(1e-12);
        let h = (0.01 / scale).min(opts.dt_max);
        Ok(Self { gen, opts, t: 0.0, y: rho0.clone(), k1, h, steps: 0, rejected: 0 })
    }

    pub fn state(&self) -> &CMatrix {
        &self.y
    }

    /// max |d rho / dt| at the current point.
    pub fn residual(&self) -> f64 {
        self.k1.max_abs()
    }

    /// Advance by one accepted step, never past `t_end`.
    pub fn step(&mut self, t_end: f64) -> Result<()> {
        let g = self.gen;
        loop {
            let remaining = t_end - self.t;
            if remaining <= 0.0 {
                return Ok(());
            }
            let mut h = self.h.min(self.opts.dt_max);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let y = &self.y;
            let k1 = &self.k1;
            let k2 = g.apply(&lin(y, h, &[(A21, k1)]));
            let k3 = g.apply(&lin(y, h, &[(A31, k1), (A32, &k2)]));
            let k4 = g.apply(&lin(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
            let k5 = g.apply(&lin(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = g.apply(&lin(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
            let ynew = lin(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]).hermitian_part();
            let k7 = g.apply(&ynew);
            let err = lin(&CMatrix::zeros(y.nrows(), y.ncols()), h, &[(E1, k1), (E3, &k3), (E4, &k4), (E5, &k5), (E6, &k6), (E7, &k7)]);

            let mut enorm: f64 = 0.0;
            for ((e, a), b) in err.as_slice().iter().zip(y.as_slice()).zip(ynew.as_slice()) {
                let sc = self.opts.atol + self.opts.rtol * a.norm().max(b.norm());
                enorm = enorm.max(e.norm() / sc);
            }
            if !enorm.is_finite() {
                return Err(Error::Numerical(format!("non-finite state at t = {}", self.t)));
            }
            let factor = if enorm == 0.0 { 5.0 } else { (0.9 * enorm.powf(-0.2)).clamp(0.2, 5.0) };
            if enorm <= 1.0 {
                self.t = if last { t_end } else { self.t + h };
                self.y = ynew;
                self.k1 = k7;
                self.steps += 1;
                if !last || factor < 1.0 {
                    self.h = (h * factor).min(self.opts.dt_max);
                }
                if !last && self.h < self.opts.h_min {
                    return Err(Error::Stiffness { t: self.t, h: self.h });
                }
                return Ok(());
            }
            self.rejected += 1;
            self.h = h * factor.min(1.0);
            if self.h < self.opts.h_min {
                return Err(Error::Stiffness { t: self.t, h: self.h });
            }
        }
    }

    pub fn advance_to(&mut self, t_end: f64) -> Result<()> {
        while self.t < t_end {
            self.step(t_end)?;
        }
        Ok(())
    }
}

/// rho(t_final) under the generator.
pub fn evolve_with(
    rho0: &DensityMatrix,
    gen: &MasterEquation,
    t_final: f64,
    opts: IntegratorOptions,
) -> Result<DensityMatrix> {
    if !(t_final >= 0.0) {
        return Err(Error::InvalidArgument("t_final must be nonnegative".into()));
    }
    if t_final == 0.0 {
        return Ok(rho0.clone());
    }
    let mut it = Integrator::new(gen, rho0.matrix(), opts)?;
    it.advance_to(t_final)?;
    Ok(DensityMatrix::new_unchecked(it.y))
}

pub fn evolve(
    rho0: &DensityMatrix,
    h: &CMatrix,
    terms: &[LindbladTerm],
    t_final: f64,
    dt_max: f64,
) -> Result<DensityMatrix> {
    let gen = MasterEquation::lindblad(h, terms)?;
    evolve_with(rho0, &gen, t_final, IntegratorOptions::with_dt_max(dt_max))
}

/// States at each of the nondecreasing `times`.
pub fn evolve_sampled(
    rho0: &DensityMatrix,
    gen: &MasterEquation,
    times: &[f64],
    opts: IntegratorOptions,
) -> Result<Vec<DensityMatrix>> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < 0.0) {
        return Err(Error::InvalidArgument("sample times must be nonnegative and sorted".into()));
    }
    let mut it = Integrator::new(gen, rho0.matrix(), opts)?;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        it.advance_to(t)?;
        out.push(DensityMatrix::new_unchecked(it.y.clone()));
    }
    Ok(out)
}

/// Integrate until max |d rho/dt| <= tol.
pub fn steady_state_integrate_with(
    rho0: &DensityMatrix,
    gen: &MasterEquation,
    tol: f64,
    t_max: f64,
    opts: IntegratorOptions,
) -> Result<SteadyStateReport> {
    let mut it = Integrator::new(gen, rho0.matrix(), opts)?;
    while it.residual() > tol {
        if it.t >= t_max {
            return Err(Error::Timeout { t_max, residual: it.residual() });
        }
        it.step(t_max)?;
    }
    let residual = it.residual();
    Ok(SteadyStateReport {
        rho_ss: DensityMatrix::new_unchecked(it.y),
        residual,
        method: Method::Integrate,
        iterations: it.steps,
        time: it.t,
    })
}

pub fn steady_state_integrate(
    rho0: &DensityMatrix,
    h: &CMatrix,
    terms: &[LindbladTerm],
    tol: f64,
    t_max: f64,
) -> Result<SteadyStateReport> {
    if terms.iter().all(|t| t.rate == 0.0) {
        return Err(Error::InvalidParameter("steady-state integration needs nonzero dissipation".into()));
    }
    let gen = MasterEquation::lindblad(h, terms)?;
    steady_state_integrate_with(rho0, &gen, tol, t_max, IntegratorOptions::default())
}

/// Pure-state propagation exp(-i H t) psi through the eigenbasis of H.
pub fn unitary_propagator(h: &CMatrix) -> Result<impl Fn(f64, &[C64]) -> Vec<C64>> {
    let (vals, u) = h.eigh()?;
    let ud = u.adjoint();
    Ok(move |t: f64, psi: &[C64]| {
        let mut c = ud.mat_vec(psi);
        for (ci, e) in c.iter_mut().zip(&vals) {
            *ci *= C64::from_polar(1.0, -e * t);
        }
        u.mat_vec(&c)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{arm_loss, build_arm_hamiltonian, RabiParams};
    use crate::operators::annihilation;
    use crate::state::KetState;

    #[test]
    fn zero_time_is_identity() {
        let p = RabiParams::new(1.0, 1.0, 0.3, 0.2, 0.1).unwrap();
        let h = build_arm_hamiltonian(&p, 4).unwrap();
        let rho = KetState::basis(10, 3).unwrap().to_density();
        let out = evolve(&rho, &h, &arm_loss(&p, 4).unwrap(), 0.0, 0.1).unwrap();
        assert_eq!(out.matrix(), rho.matrix());
    }

    #[test]
    fn amplitude_damping_population() {
        let a = annihilation(1).unwrap();
        let g = 0.3;
        let terms = [LindbladTerm::new(a, g).unwrap()];
        let rho = KetState::basis(2, 1).unwrap().to_density();
        let h = CMatrix::zeros(2, 2);
        for t in [0.5, 2.0, 5.0] {
            let out = evolve(&rho, &h, &terms, t, 0.1).unwrap();
            assert!((out.matrix()[(1, 1)].re - (-2.0 * g * t).exp()).abs() < 1e-6);
        }
    }

    #[test]
    fn closed_evolution_keeps_purity() {
        let p = RabiParams::new(1.0, 1.0, 0.5, 0.8, 0.0).unwrap();
        let h = build_arm_hamiltonian(&p, 12).unwrap();
        let psi = KetState::basis(26, 4).unwrap();
        let out = evolve(&psi.to_density(), &h, &[], 20.0, 0.1).unwrap();
        assert!((out.purity() - 1.0).abs() < 1e-8);
        // against exact propagation
        let prop = unitary_propagator(&h).unwrap();
        let exact = KetState::new(prop(20.0, psi.amplitudes())).unwrap().to_density();
        assert!(out.trace_distance(&exact).unwrap() < 1e-6);
    }

    #[test]
    fn trace_is_conserved_over_long_runs() {
        let p = RabiParams::new(1.0, 1.0, 0.5, 0.8, 0.1).unwrap();
        let h = build_arm_hamiltonian(&p, 10).unwrap();
        let rho = KetState::basis(22, 0).unwrap().to_density();
        let out = evolve(&rho, &h, &arm_loss(&p, 10).unwrap(), 200.0, 0.5).unwrap();
        assert!((out.trace() - re(1.0)).norm() < 1e-8);
        assert!(out.matrix().is_hermitian(1e-12));
    }

    #[test]
    fn stiffness_is_reported() {
        let a = annihilation(1).unwrap();
        let terms = [LindbladTerm::new(a, 1e13).unwrap()];
        let rho = KetState::basis(2, 1).unwrap().to_density();
        let opts = IntegratorOptions { h_min: 1e-9, ..IntegratorOptions::default() };
        let gen = MasterEquation::lindblad(&CMatrix::zeros(2, 2), &terms).unwrap();
        match evolve_with(&rho, &gen, 1.0, opts) {
            Err(Error::Stiffness { .. }) => {}
            other => panic!("expected stiffness error, got {other:?}"),
        }
    }
}
