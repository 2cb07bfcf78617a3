//! Ladder, Pauli and spin operators, displacement and parity.
//!
//! Qubit basis is (|up>, |down>), so `sigma_z = diag(1, -1)` and
//! `sigma_plus |down> = |up>`.

use crate::error::{Error, Result};
use crate::matrix::{c, re, CMatrix, C64, ZERO};
use crate::space::{Factor, HilbertSpec};

pub fn annihilation(n_max: usize) -> Result<CMatrix> {
    if n_max < 1 {
        return Err(Error::InvalidDimension("n_max must be at least 1".into()));
    }
    let mut a = CMatrix::zeros(n_max + 1, n_max + 1);
    for n in 1..=n_max {
        a[(n - 1, n)] = re((n as f64).sqrt());
    }
    Ok(a)
}

pub fn creation(n_max: usize) -> Result<CMatrix> {
    Ok(annihilation(n_max)?.adjoint())
}

pub fn number(n_max: usize) -> Result<CMatrix> {
    if n_max < 1 {
        return Err(Error::InvalidDimension("n_max must be at least 1".into()));
    }
    Ok(CMatrix::diag(&(0..=n_max).map(|n| re(n as f64)).collect::<Vec<_>>()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

pub fn pauli(axis: Axis) -> CMatrix {
    let v = match axis {
        Axis::X => [ZERO, re(1.0), re(1.0), ZERO],
        Axis::Y => [ZERO, c(0.0, -1.0), c(0.0, 1.0), ZERO],
        Axis::Z => [re(1.0), ZERO, ZERO, re(-1.0)],
        Axis::Plus => [ZERO, re(1.0), ZERO, ZERO],
        Axis::Minus => [ZERO, ZERO, re(1.0), ZERO],
    };
    CMatrix::from_vec(2, 2, v.to_vec()).expect("2x2")
}

/// Spin operators (S+, S-, Sz) for spin `two_s / 2` with Sz|m> = m|m>,
/// basis ordered m = S, S-1, ..., -S.
pub fn spin_operators(two_s: usize) -> Result<(CMatrix, CMatrix, CMatrix)> {
    if two_s < 1 {
        return Err(Error::InvalidDimension("spin must be at least 1/2".into()));
    }
    let s = two_s as f64 / 2.0;
    let d = two_s + 1;
    let m = |k: usize| s - k as f64;
    let sz = CMatrix::diag(&(0..d).map(|k| re(m(k))).collect::<Vec<_>>());
    let mut sp = CMatrix::zeros(d, d);
    for k in 1..d {
        let mk = m(k);
        sp[(k - 1, k)] = re((s * (s + 1.0) - mk * (mk + 1.0)).sqrt());
    }
    let sm = sp.adjoint();
    Ok((sp, sm, sz))
}

pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kron(b)
}

/// Embed single-factor operators into the full space; factors without an
/// entry get the identity.
pub fn embed(spec: &HilbertSpec, ops: &[(usize, &CMatrix)]) -> Result<CMatrix> {
    let dims = spec.dims();
    let mut out = CMatrix::identity(1);
    for (k, &d) in dims.iter().enumerate() {
        let f = match ops.iter().find(|(i, _)| *i == k) {
            Some((_, m)) => {
                if m.nrows() != d || m.ncols() != d {
                    return Err(Error::InvalidDimension(format!(
                        "operator on factor {k} has size {}, expected {d}",
                        m.nrows()
                    )));
                }
                (*m).clone()
            }
            None => CMatrix::identity(d),
        };
        out = out.kron(&f);
    }
    Ok(out)
}

/// exp(alpha a^dag - alpha^* a) on the truncated space.
pub fn displacement(alpha: C64, n_max: usize) -> Result<CMatrix> {
    if !alpha.is_finite() {
        return Err(Error::InvalidArgument("displacement amplitude must be finite".into()));
    }
    let a = annihilation(n_max)?;
    let mut g = a.adjoint().scale(alpha);
    g.axpy(-alpha.conj(), &a);
    g.expm()
}

/// Fock amplitudes e^{-|alpha|^2/2} alpha^n / sqrt(n!) for n = 0..=n_max,
/// without renormalization.
pub fn coherent_amplitudes(alpha: C64, n_max: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(n_max + 1);
    let mut cur = re((-alpha.norm_sqr() / 2.0).exp());
    out.push(cur);
    for n in 1..=n_max {
        cur = cur * alpha / (n as f64).sqrt();
        out.push(cur);
    }
    out
}

/// Parity exp[i pi (a^dag a + sigma_plus sigma_minus)] on boson x qubit.
pub fn parity_operator(spec: &HilbertSpec) -> Result<CMatrix> {
    match spec.factors() {
        [Factor::Boson { n_max }, Factor::Qubit] => {
            let n_max = *n_max;
            let mut d = Vec::with_capacity(2 * (n_max + 1));
            for n in 0..=n_max {
                // qubit index 0 is |up>, which carries one excitation
                for q in 0..2usize {
                    let exc = n + usize::from(q == 0);
                    d.push(re(if exc % 2 == 0 { 1.0 } else { -1.0 }));
                }
            }
            Ok(CMatrix::diag(&d))
        }
        _ => Err(Error::InvalidArgument(format!("parity needs a boson x qubit space, got {spec}"))),
    }
}

/// Parity exp[i pi (a^dag a + b^dag b)] on two bosons.
pub fn two_mode_parity(n_a: usize, n_b: usize) -> CMatrix {
    let mut d = Vec::with_capacity((n_a + 1) * (n_b + 1));
    for i in 0..=n_a {
        for j in 0..=n_b {
            d.push(re(if (i + j) % 2 == 0 { 1.0 } else { -1.0 }));
        }
    }
    CMatrix::diag(&d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::KetState;

    #[test]
    fn ladder_entries() {
        let a = annihilation(2).unwrap();
        assert_eq!(a[(0, 1)], re(1.0));
        assert!((a[(1, 2)] - re(2f64.sqrt())).norm() < 1e-15);
        let nnz = a.as_slice().iter().filter(|z| **z != ZERO).count();
        assert_eq!(nnz, 2);
        assert!(annihilation(0).is_err());
        let n = creation(1).unwrap().matmul(&annihilation(1).unwrap());
        assert_eq!(n, CMatrix::diag(&[ZERO, re(1.0)]));
    }

    #[test]
    fn canonical_commutator_away_from_edge() {
        let a = annihilation(30).unwrap();
        let comm = a.commutator(&a.adjoint());
        for i in 0..30 {
            for j in 0..31 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((comm[(i, j)] - re(want)).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn pauli_conventions() {
        assert_eq!(pauli(Axis::Z), CMatrix::diag(&[re(1.0), re(-1.0)]));
        let down = KetState::basis(2, 1).unwrap();
        let up = down.apply(&pauli(Axis::Plus)).unwrap();
        assert_eq!(up, KetState::basis(2, 0).unwrap());
        let x = pauli(Axis::X);
        assert_eq!(x.matmul(&x), CMatrix::identity(2));
        let p = (&pauli(Axis::X) + &pauli(Axis::Y).scale(c(0.0, 1.0))).scale_re(0.5);
        assert!((&p - &pauli(Axis::Plus)).max_abs() < 1e-15);
    }

    #[test]
    fn tensor_acts_on_slowest_index_first() {
        let op = tensor(&annihilation(1).unwrap(), &CMatrix::identity(2));
        // |1, down> is index 1*2 + 1
        let s = KetState::basis(4, 3).unwrap().apply(&op).unwrap();
        assert_eq!(s, KetState::basis(4, 1).unwrap());
    }

    #[test]
    fn spin_one_algebra() {
        let (sp, sm, sz) = spin_operators(2).unwrap();
        let comm = sp.commutator(&sm);
        assert!((&comm - &sz.scale_re(2.0)).max_abs() <= 1e-12);
        let (sp, _, sz) = spin_operators(1).unwrap();
        assert_eq!(sp, pauli(Axis::Plus));
        assert_eq!(sz, pauli(Axis::Z).scale_re(0.5));
    }

    #[test]
    fn displacement_of_vacuum_is_coherent() {
        let alpha = c(0.5, 0.0);
        let d = displacement(alpha, 20).unwrap();
        let want = coherent_amplitudes(alpha, 20);
        for n in 0..=20 {
            assert!((d[(n, 0)] - want[n]).norm() < 1e-8);
        }
        assert!((&displacement(ZERO, 5).unwrap() - &CMatrix::identity(6)).max_abs() < 1e-15);
        assert!(displacement(c(f64::NAN, 0.0), 5).is_err());
    }

    #[test]
    fn displacement_is_unitary_away_from_edge() {
        let d = displacement(c(1.2, -1.5), 40).unwrap();
        let u = d.matmul(&d.adjoint());
        for i in 0..20 {
            for j in 0..20 {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((u[(i, j)] - re(want)).norm() <= 1e-8);
            }
        }
    }

    #[test]
    fn parity_signs() {
        let spec = HilbertSpec::boson_qubit(4).unwrap();
        let u = parity_operator(&spec).unwrap();
        // |0, down> -> +1, |1, down> -> -1
        assert_eq!(u[(1, 1)], re(1.0));
        assert_eq!(u[(3, 3)], re(-1.0));
        assert_eq!(u.matmul(&u), CMatrix::identity(10));
        let sx = embed(&spec, &[(1, &pauli(Axis::X))]).unwrap();
        let sz = embed(&spec, &[(1, &pauli(Axis::Z))]).unwrap();
        let conj = |m: &CMatrix| u.matmul(m).matmul(&u.adjoint());
        assert!((&conj(&sx) + &sx).max_abs() < 1e-15);
        assert!((&conj(&sz) - &sz).max_abs() < 1e-15);
        assert!(parity_operator(&HilbertSpec::two_boson(2, 2).unwrap()).is_err());
    }
}
