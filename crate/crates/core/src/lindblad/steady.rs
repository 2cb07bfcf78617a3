//! Stationary states from the null space of the Liouvillian.
//!
//! The null vector is found by shift-invert block subspace iteration on the
//! sparse superoperator. A small block (three vectors) is carried so the
//! Rayleigh-Ritz values also expose a degenerate null space.

use faer::linalg::solvers::SolveCore;
use faer::{Conj, Mat};

use crate::error::{Error, Result};
use crate::lindblad::generator::{unvectorize, vectorize, MasterEquation};
use crate::matrix::{inner, re, vec_norm, CMatrix, C64, ZERO};
use crate::models::LindbladTerm;
use crate::state::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Integrate,
    NullSpace,
}

#[derive(Clone, Debug)]
pub struct SteadyStateReport {
    pub rho_ss: DensityMatrix,
    /// max |L(rho_ss)|
    pub residual: f64,
    pub method: Method,
    /// Integrator steps or subspace iterations.
    pub iterations: usize,
    /// Integration time reached; zero for the null-space solver.
    pub time: f64,
}

#[derive(Clone, Copy, Debug)]
pub struct NullSpaceOptions {
    /// Largest Hilbert-space dimension accepted.
    pub max_dim: usize,
    pub shift: f64,
    pub block: usize,
    pub max_iter: usize,
    pub residual_tol: f64,
    /// Ritz values with |Re| and |Im| below this count as null.
    pub null_window: f64,
}

impl Default for NullSpaceOptions {
    fn default() -> Self {
        Self { max_dim: 80, shift: 1e-6, block: 3, max_iter: 80, residual_tol: 1e-10, null_window: 1e-9 }
    }
}

pub fn steady_state_null(h: &CMatrix, terms: &[LindbladTerm]) -> Result<SteadyStateReport> {
    let gen = MasterEquation::lindblad(h, terms)?;
    steady_state_null_with(&gen, NullSpaceOptions::default())
}

/// Deterministic start vectors; the first is vec(I), which overlaps every
/// trace-carrying null vector.
fn start_block(d: usize, k: usize) -> Vec<Vec<C64>> {
    let n = d * d;
    let mut s: u64 = 0x9e37_79b9_7f4a_7c15;
    let mut next = move || {
        s ^= s << 13;
        s ^= s >> 7;
        s ^= s << 17;
        (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let mut out = vec![vectorize(&CMatrix::identity(d))];
    for _ in 1..k {
        out.push((0..n).map(|_| C64::new(next(), next())).collect());
    }
    out
}

fn orthonormalize(vs: &mut Vec<Vec<C64>>) {
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(vs.len());
    for v in vs.drain(..) {
        let mut v = v;
        for _ in 0..2 {
            for q in &out {
                let p = inner(q, &v);
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= p * y;
                }
            }
        }
        let nrm = vec_norm(&v);
        if nrm > 1e-300 {
            v.iter_mut().for_each(|x| *x /= nrm);
            out.push(v);
        }
    }
    *vs = out;
}

fn apply_vec(gen: &MasterEquation, v: &[C64]) -> Vec<C64> {
    vectorize(&gen.apply(&unvectorize(v, gen.dim())))
}

struct Ritz {
    value: C64,
    vector: Vec<C64>,
    residual: f64,
}

fn rayleigh_ritz(gen: &MasterEquation, q: &[Vec<C64>]) -> Result<Vec<Ritz>> {
    let k = q.len();
    let lq: Vec<Vec<C64>> = q.iter().map(|v| apply_vec(gen, v)).collect();
    let hk = CMatrix::from_fn(k, k, |i, j| inner(&q[i], &lq[j]));
    let e = hk
        .to_faer()
        .eigen()
        .map_err(|e| Error::Numerical(format!("Ritz eigenproblem: {e:?}")))?;
    let mut out = Vec::with_capacity(k);
    for m in 0..k {
        let theta = e.S()[m];
        let n = q[0].len();
        let mut v = vec![ZERO; n];
        let mut lv = vec![ZERO; n];
        for j in 0..k {
            let y = e.U()[(j, m)];
            for i in 0..n {
                v[i] += y * q[j][i];
                lv[i] += y * lq[j][i];
            }
        }
        let nv = vec_norm(&v);
        let residual = lv.iter().zip(&v).map(|(a, b)| (a - theta * b).norm()).fold(0.0, f64::max) / nv;
        out.push(Ritz { value: theta, vector: v, residual });
    }
    out.sort_by(|a, b| a.value.norm().total_cmp(&b.value.norm()));
    Ok(out)
}

pub fn steady_state_null_with(gen: &MasterEquation, opts: NullSpaceOptions) -> Result<SteadyStateReport> {
    let d = gen.dim();
    if d > opts.max_dim {
        return Err(Error::Capacity { dim: d, limit: opts.max_dim });
    }
    let n = d * d;
    let k = opts.block.clamp(1, n);
    let shifted = gen.superoperator_sparse(re(-opts.shift))?;
    let lu = shifted.sp_lu().map_err(|e| Error::Numerical(format!("sparse LU: {e:?}")))?;
    let solve = |vs: &[Vec<C64>]| -> Vec<Vec<C64>> {
        let mut rhs = Mat::<C64>::from_fn(n, vs.len(), |i, j| vs[j][i]);
        lu.solve_in_place_with_conj(Conj::No, rhs.as_mut());
        (0..vs.len()).map(|j| (0..n).map(|i| rhs[(i, j)]).collect()).collect()
    };

    let mut q = start_block(d, k);
    orthonormalize(&mut q);
    let mut prev: Option<Vec<C64>> = None;
    let mut ritz = Vec::new();
    let mut iterations = 0;
    for it in 1..=opts.max_iter {
        iterations = it;
        q = solve(&q);
        if q.iter().flatten().any(|z| !z.is_finite()) {
            return Err(Error::Numerical("shift-invert solve produced non-finite values".into()));
        }
        orthonormalize(&mut q);
        ritz = rayleigh_ritz(gen, &q)?;
        let vals: Vec<C64> = ritz.iter().map(|r| r.value).collect();
        let settled = match &prev {
            Some(p) if p.len() == vals.len() => {
                p.iter().zip(&vals).all(|(a, b)| (a - b).norm() <= 1e-10 * (1.0 + b.norm()))
            }
            _ => false,
        };
        prev = Some(vals);
        if settled && ritz[0].residual <= 1e-3 * opts.residual_tol {
            break;
        }
    }

    let null: Vec<&Ritz> = ritz
        .iter()
        .filter(|r| r.value.re.abs() < opts.null_window && r.value.im.abs() < opts.null_window)
        .collect();
    if null.len() > 1 {
        return Err(Error::NonUniqueSteadyState {
            multiplicity: null.len(),
            eigenvalues: ritz.iter().map(|r| r.value).collect(),
        });
    }

    let mut v = ritz[0].vector.clone();
    let mut rho = CMatrix::identity(d);
    let mut residual = f64::INFINITY;
    for polish in 0..6 {
        let m = unvectorize(&v, d);
        let tr = m.trace();
        if tr.norm() < 1e-14 {
            return Err(Error::Numerical("null vector has vanishing trace".into()));
        }
        rho = m.scale(tr.inv()).hermitian_part();
        residual = gen.apply(&rho).max_abs();
        if residual <= opts.residual_tol || polish == 5 {
            break;
        }
        v = solve(&[vectorize(&rho)]).pop().expect("one column");
        iterations += 1;
    }
    if null.is_empty() && residual > opts.residual_tol {
        return Err(Error::Numerical(format!(
            "no null eigenvalue found; smallest Ritz value {}",
            ritz[0].value
        )));
    }
    Ok(SteadyStateReport {
        rho_ss: DensityMatrix::new_unchecked(rho),
        residual,
        method: Method::NullSpace,
        iterations,
        time: 0.0,
    })
}

/// Full spectrum of the superoperator by dense eigen-decomposition.
pub fn liouvillian_spectrum(gen: &MasterEquation) -> Result<Vec<C64>> {
    const LIMIT: usize = 30;
    if gen.dim() > LIMIT {
        return Err(Error::Capacity { dim: gen.dim(), limit: LIMIT });
    }
    gen.superoperator_dense().eigenvalues()
}

/// Number of eigenvalues inside the null window.
pub fn null_multiplicity(spectrum: &[C64], window: f64) -> usize {
    spectrum.iter().filter(|z| z.re.abs() < window && z.im.abs() < window).count()
}
