//! Resonant two-mode model without counter-rotating terms.
//!
//! With lambda2 = 0 and omega = Omega the modes z+- = (a +- b)/sqrt 2
//! decouple, H = (omega + lambda1) z+^dag z+ + (omega - lambda1) z-^dag z-.

use crate::error::{Error, Result};
use crate::feedback::noon_state;
use crate::lindblad::unitary_propagator;
use crate::matrix::{c, inner, re, CMatrix, C64, ZERO};
use crate::models::{build_nad_hamiltonian, RabiParams};
use crate::state::KetState;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalModeSpectrum {
    pub e_plus: f64,
    pub e_minus: f64,
}

impl NormalModeSpectrum {
    pub fn new(omega: f64, lambda1: f64) -> Self {
        Self { e_plus: omega + lambda1, e_minus: omega - lambda1 }
    }

    pub fn energy(&self, n_plus: usize, n_minus: usize) -> f64 {
        self.e_plus * n_plus as f64 + self.e_minus * n_minus as f64
    }
}

/// |<Psi_-^N | Psi_-^N(t)>| for (|N,0> - |0,N>)/sqrt 2.
pub fn rwa_noon_fidelity(n: usize, t: f64, omega: f64, lambda1: f64) -> Result<f64> {
    if ![t, omega, lambda1].iter().all(|x| x.is_finite()) {
        return Err(Error::InvalidArgument("non-finite time or frequency".into()));
    }
    let ph = |x: f64| C64::from_polar(1.0, x);
    let l = lambda1 * t;
    match n {
        1 | 2 => Ok(1.0),
        3 => Ok((ph(-l) * 3.0 + ph(3.0 * l)).norm() / 4.0),
        4 => Ok((2.0 * l).cos().abs()),
        _ => Err(Error::InvalidArgument(format!("closed form known for N = 1..4, got {n}"))),
    }
}

fn ln_factorial(n: usize) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp().round()
}

/// Columns are the states z+^dag^p z-^dag^m |0,0> / sqrt(p! m!) written in
/// the |n_a, n_b> basis, column index p (n_max + 1) + m. Columns with
/// p + m > n_max are cut by the truncation.
pub fn normal_mode_matrix(n_max: usize) -> CMatrix {
    let d = n_max + 1;
    let mut w = CMatrix::zeros(d * d, d * d);
    for p in 0..d {
        for m in 0..d {
            let n = p + m;
            let pre = -(n as f64) * std::f64::consts::LN_2 / 2.0 - (ln_factorial(p) + ln_factorial(m)) / 2.0;
            // ((a + b)^p (a - b)^m) on a^k b^{n-k}
            for k in 0..=n.min(n_max) {
                if n - k > n_max {
                    continue;
                }
                let mut coef = 0.0;
                for i in k.saturating_sub(m)..=k.min(p) {
                    let j = k - i;
                    let sign = if (m - j) % 2 == 0 { 1.0 } else { -1.0 };
                    coef += binomial(p, i) * binomial(m, j) * sign;
                }
                if coef != 0.0 {
                    let amp = coef * (pre + (ln_factorial(k) + ln_factorial(n - k)) / 2.0).exp();
                    w[(k * d + (n - k), p * d + m)] = re(amp);
                }
            }
        }
    }
    w
}

/// A state expressed on the normal modes.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalModeKet {
    /// Amplitudes on |n_+, n_-> with index n_+ (n_max + 1) + n_-, renormalised.
    pub ket: KetState,
    /// Weight lost to normal-mode states beyond the truncation.
    pub discarded: f64,
}

/// Basis change a (x) b -> z+ (x) z- with equal truncations on both modes.
pub fn normal_mode_transform(psi: &KetState, n_max: usize) -> Result<NormalModeKet> {
    let d = n_max + 1;
    if psi.dim() != d * d {
        return Err(Error::InvalidDimension(format!("state of dimension {} is not on two modes of {d} levels", psi.dim())));
    }
    let w = normal_mode_matrix(n_max);
    let out = w.adjoint().mat_vec(psi.amplitudes());
    let kept: f64 = out.iter().map(|z| z.norm_sqr()).sum();
    Ok(NormalModeKet { ket: KetState::new(out)?, discarded: (1.0 - kept).max(0.0) })
}

/// |<psi|psi(t)>| under the normal-mode Hamiltonian.
pub fn rwa_fidelity(psi: &KetState, n_max: usize, spectrum: NormalModeSpectrum, t: f64) -> Result<f64> {
    let z = normal_mode_transform(psi, n_max)?;
    if z.discarded > 1e-12 {
        return Err(Error::InvalidDimension(format!("state reaches beyond the truncation ({:e} discarded)", z.discarded)));
    }
    let d = n_max + 1;
    let mut acc = ZERO;
    for (idx, a) in z.ket.amplitudes().iter().enumerate() {
        acc += C64::from_polar(a.norm_sqr(), -spectrum.energy(idx / d, idx % d) * t);
    }
    Ok(acc.norm())
}

/// max over `times` of |Phi_exact - Phi_RWA| for the NOON state of order n,
/// the exact value from the full two-mode Hamiltonian at truncation n_max.
pub fn rwa_error_check(n: usize, p: &RabiParams, times: &[f64], n_max: usize) -> Result<f64> {
    p.validate()?;
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidArgument("non-finite time".into()));
    }
    rwa_noon_fidelity(n, 0.0, p.omega, p.lambda1)?;
    let psi = noon_state(n, n_max, n_max)?;
    let h = build_nad_hamiltonian(p, n_max, n_max)?;
    let prop = unitary_propagator(&h)?;
    let mut worst = 0.0f64;
    for &t in times {
        let exact = inner(psi.amplitudes(), &prop(t, psi.amplitudes())).norm();
        worst = worst.max((exact - rwa_noon_fidelity(n, t, p.omega, p.lambda1)?).abs());
    }
    Ok(worst)
}

/// (|2,0> + |0,2>)/sqrt 2
pub fn symmetric_noon2(n_max: usize) -> Result<KetState> {
    if n_max < 2 {
        return Err(Error::InvalidDimension("needs at least two photons per mode".into()));
    }
    let d = n_max + 1;
    let mut amp = vec![ZERO; d * d];
    amp[2 * d] = c(1.0, 0.0);
    amp[2] = c(1.0, 0.0);
    KetState::new(amp)
}
