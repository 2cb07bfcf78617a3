//! Gaussian dynamics of the two-mode model under loss of the first mode.
//!
//! The normal-ordered characteristic function obeys
//! d chi/dt = z^T M z chi + z^T N grad chi with z = (e_a, e_a^*, e_b, e_b^*).
//! Differentiating at z = 0 closes the first and second normal-ordered
//! moments of X = (a^dag, -a, b^dag, -b):
//!
//!   dw/dt = N w,   dG/dt = N G + G N^T + 2 M,
//!
//! with w_k = <X_k> and G_kl = <:X_k X_l:>.

use crate::error::{Error, Result};
use crate::matrix::{c, re, CMatrix, C64, ZERO};
use crate::models::RabiParams;

#[derive(Clone, Debug, PartialEq)]
pub struct ChiGenerators {
    pub m: CMatrix,
    pub n: CMatrix,
}

pub fn chi_generators(p: &RabiParams) -> ChiGenerators {
    let (w, om, l1, l2, g) = (p.omega, p.big_omega, p.lambda1, p.lambda2, p.gamma);
    let h = c(0.0, l2 / 2.0);
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 2)] = h;
    m[(2, 0)] = h;
    m[(1, 3)] = -h;
    m[(3, 1)] = -h;
    let i = |x: f64| c(0.0, x);
    #[rustfmt::skip]
    let n = CMatrix::from_vec(4, 4, vec![
        c(-g, w), ZERO,      i(l1),  i(-l2),
        ZERO,     c(-g, -w), i(l2),  i(-l1),
        i(l1),    i(-l2),    i(om),  ZERO,
        i(l2),    i(-l1),    ZERO,   i(-om),
    ])
    .expect("4x4");
    ChiGenerators { m, n }
}

/// Quadratures R = (q_a, p_a, q_b, p_b) with q = (a + a^dag)/sqrt 2 and
/// p = (a - a^dag)/(i sqrt 2); vacuum has V = I/2.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianState {
    pub mean: [f64; 4],
    /// V_ij = <R_i R_j + R_j R_i>/2 - <R_i><R_j>
    pub v: [[f64; 4]; 4],
}

/// Normal-ordered second moments of the two modes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeMoments {
    /// <a^dag a>
    pub n_a: f64,
    /// <b^dag b>
    pub n_b: f64,
    /// <a b>
    pub ab: C64,
    /// <a^dag b>
    pub adag_b: C64,
}

fn symplectic_form() -> CMatrix {
    let mut o = CMatrix::zeros(4, 4);
    for k in [0, 2] {
        o[(k, k + 1)] = re(1.0);
        o[(k + 1, k)] = re(-1.0);
    }
    o
}

/// R = T X
fn quadrature_map() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut t = CMatrix::zeros(4, 4);
    for k in [0, 2] {
        t[(k, k)] = re(s);
        t[(k, k + 1)] = re(-s);
        t[(k + 1, k)] = c(0.0, s);
        t[(k + 1, k + 1)] = c(0.0, s);
    }
    t
}

fn quadrature_map_inv() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut t = CMatrix::zeros(4, 4);
    for k in [0, 2] {
        t[(k, k)] = re(s);
        t[(k, k + 1)] = c(0.0, -s);
        t[(k + 1, k)] = re(-s);
        t[(k + 1, k + 1)] = c(0.0, -s);
    }
    t
}

/// Symmetric-minus-normal ordering offsets in X: sym(a^dag (-a)) = -(a^dag a + 1/2).
fn ordering_offset() -> CMatrix {
    let mut k = CMatrix::zeros(4, 4);
    for (i, j) in [(0, 1), (1, 0), (2, 3), (3, 2)] {
        k[(i, j)] = re(-0.5);
    }
    k
}

impl GaussianState {
    /// Validated constructor: V symmetric and V + (i/2) Omega >= -1e-8.
    pub fn new(mean: [f64; 4], v: [[f64; 4]; 4]) -> Result<Self> {
        if mean.iter().chain(v.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidState("non-finite Gaussian moments".into()));
        }
        for i in 0..4 {
            for j in 0..i {
                if (v[i][j] - v[j][i]).abs() > 1e-10 * (1.0 + v[i][j].abs()) {
                    return Err(Error::InvalidState("covariance matrix is not symmetric".into()));
                }
            }
        }
        let g = Self { mean, v };
        let e = g.uncertainty_margin()?;
        if e < -1e-8 {
            return Err(Error::InvalidState(format!("covariance violates the uncertainty relation ({e:e})")));
        }
        Ok(g)
    }

    pub fn vacuum() -> Self {
        let mut v = [[0.0; 4]; 4];
        for (k, row) in v.iter_mut().enumerate() {
            row[k] = 0.5;
        }
        Self { mean: [0.0; 4], v }
    }

    /// exp(r (a b - a^dag b^dag)) acting on the vacuum.
    pub fn two_mode_squeezed(r: f64) -> Self {
        let (ch, sh) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
        let v = [[ch, 0.0, -sh, 0.0], [0.0, ch, 0.0, sh], [-sh, 0.0, ch, 0.0], [0.0, sh, 0.0, ch]];
        Self { mean: [0.0; 4], v }
    }

    pub fn v_matrix(&self) -> CMatrix {
        CMatrix::from_fn(4, 4, |i, j| re(self.v[i][j]))
    }

    pub fn det_v(&self) -> f64 {
        self.v_matrix().determinant().re
    }

    /// Smallest eigenvalue of V + (i/2) Omega.
    pub fn uncertainty_margin(&self) -> Result<f64> {
        let mut m = self.v_matrix();
        m.axpy(c(0.0, 0.5), &symplectic_form());
        Ok(m.eigvalsh()?[0])
    }

    /// (G, w) in the ladder basis X.
    pub fn normal_moments(&self) -> (CMatrix, Vec<C64>) {
        let ti = quadrature_map_inv();
        let w = ti.mat_vec(&self.mean.map(re));
        let s = ti.matmul(&self.v_matrix()).matmul(&ti.transpose());
        let mut g = &s - &ordering_offset();
        for i in 0..4 {
            for j in 0..4 {
                g[(i, j)] += w[i] * w[j];
            }
        }
        (g, w)
    }

    pub fn from_normal_moments(g: &CMatrix, w: &[C64]) -> Self {
        let t = quadrature_map();
        let mut s = g + &ordering_offset();
        for i in 0..4 {
            for j in 0..4 {
                s[(i, j)] -= w[i] * w[j];
            }
        }
        let vm = t.matmul(&s).matmul(&t.transpose());
        let mean = t.mat_vec(w);
        let mut v = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                v[i][j] = 0.5 * (vm[(i, j)].re + vm[(j, i)].re);
            }
        }
        Self { mean: [mean[0].re, mean[1].re, mean[2].re, mean[3].re], v }
    }

    pub fn mode_moments(&self) -> ModeMoments {
        let (g, _) = self.normal_moments();
        ModeMoments { n_a: -g[(0, 1)].re, n_b: -g[(2, 3)].re, ab: g[(1, 3)], adag_b: -g[(0, 3)] }
    }
}

/// 16x16 generator of vec(G) under G -> N G + G N^T, column stacking.
fn lyapunov_operator(n: &CMatrix) -> CMatrix {
    let id = CMatrix::identity(4);
    &id.kron(n) + &n.kron(&id)
}

fn vec4(m: &CMatrix) -> Vec<C64> {
    (0..16).map(|k| m[(k % 4, k / 4)]).collect()
}

fn unvec4(v: &[C64]) -> CMatrix {
    CMatrix::from_fn(4, 4, |i, j| v[i + 4 * j])
}

/// Moments at time t from the initial state `g0`.
pub fn covariance_flow(p: &RabiParams, g0: &GaussianState, t: f64) -> Result<GaussianState> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidArgument(format!("time {t} must be finite and nonnegative")));
    }
    p.validate()?;
    let ChiGenerators { m, n } = chi_generators(p);
    let (g, w) = g0.normal_moments();
    // [vec G; 1]' = [[L, 2 vec M], [0, 0]] [vec G; 1]
    let l = lyapunov_operator(&n);
    let vm = vec4(&m);
    let mut aug = CMatrix::zeros(17, 17);
    for i in 0..16 {
        for j in 0..16 {
            aug[(i, j)] = l[(i, j)] * t;
        }
        aug[(i, 16)] = vm[i] * (2.0 * t);
    }
    let e = aug.expm()?;
    let mut x = vec4(&g);
    x.push(re(1.0));
    let gt = unvec4(&e.mat_vec(&x)[..16]);
    let wt = n.scale_re(t).expm()?.mat_vec(&w);
    Ok(GaussianState::from_normal_moments(&gt, &wt))
}

/// max |N G + G N^T + 2 M| for the normal moments of `g`.
pub fn lyapunov_residual(p: &RabiParams, g: &GaussianState) -> f64 {
    let ChiGenerators { m, n } = chi_generators(p);
    let (gm, _) = g.normal_moments();
    let mut r = &n.matmul(&gm) + &gm.matmul(&n.transpose());
    r.axpy(re(2.0), &m);
    r.max_abs()
}

/// Stationary moments; the mean vanishes.
pub fn steady_covariance(p: &RabiParams) -> Result<GaussianState> {
    let rep = stability_zeta(p)?;
    if !rep.stable {
        return Err(Error::Unstable { zeta: rep.zeta });
    }
    let ChiGenerators { m, n } = chi_generators(p);
    let l = lyapunov_operator(&n);
    let rhs = CMatrix::from_fn(16, 1, |k, _| vec4(&m)[k] * -2.0);
    let x = l.solve(&rhs)?;
    let g = unvec4(&(0..16).map(|k| x[(k, 0)]).collect::<Vec<_>>());
    Ok(GaussianState::from_normal_moments(&g, &[ZERO; 4]))
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    /// Closed form on resonance, otherwise 2 max Re eig(N).
    pub zeta: f64,
    /// Present only on resonance.
    pub nu_plus: Option<C64>,
    pub nu_minus: Option<C64>,
    pub eigenvalues_of_n: Vec<C64>,
    /// 2 max Re eig(N); equals the closed form where both exist.
    pub spectral_zeta: f64,
    pub stable: bool,
}

fn is_resonant(p: &RabiParams) -> bool {
    (p.big_omega - p.omega).abs() <= 1e-12 * p.omega.abs().max(1.0)
}

/// nu_plus, nu_minus for Omega = omega.
pub fn nu_pair(p: &RabiParams) -> (C64, C64) {
    let (w, g, l1, l2) = (p.omega, p.gamma, p.lambda1, p.lambda2);
    let inner = re(4.0 * l1 * l1 * w * w - g * g * w * w).sqrt();
    let base = l1 * l1 - l2 * l2 + w * w;
    let nu = |s: f64| (re(g * g) - (inner * s + base) * 4.0).sqrt();
    (nu(1.0), nu(-1.0))
}

/// zeta within this of zero counts as marginal, not stable.
pub const MARGINAL: f64 = 1e-10;

pub fn stability_zeta(p: &RabiParams) -> Result<StabilityReport> {
    p.validate()?;
    let n = chi_generators(p).n;
    let eigs = n.eigenvalues()?;
    let spectral_zeta = 2.0 * eigs.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let (zeta, nu_plus, nu_minus) = if is_resonant(p) {
        let (np, nm) = nu_pair(p);
        let top = [np.re, -np.re, nm.re, -nm.re].into_iter().fold(f64::NEG_INFINITY, f64::max);
        let z = top - p.gamma;
        // the drift eigenvalues are (-gamma +- nu)/2; near coalescing pairs
        // where all four drift eigenvalues coalesce the numerical spectrum
        // is only good to about eps^(1/4)
        let scale = p.omega.abs() + p.big_omega.abs() + p.lambda1 + p.lambda2 + p.gamma;
        if (z - spectral_zeta).abs() > 1e-3 * (1.0 + scale) {
            return Err(Error::Numerical(format!(
                "closed-form zeta {z} disagrees with drift spectrum {spectral_zeta}"
            )));
        }
        (z, Some(np), Some(nm))
    } else {
        (spectral_zeta, None, None)
    };
    Ok(StabilityReport { zeta, nu_plus, nu_minus, eigenvalues_of_n: eigs, spectral_zeta, stable: zeta < -MARGINAL })
}

/// Mean-field critical coupling sqrt(Omega (omega^2 + gamma^2) / omega) / 2.
pub fn critical_coupling(p: &RabiParams) -> f64 {
    (p.big_omega * (p.omega * p.omega + p.gamma * p.gamma) / p.omega).sqrt() / 2.0
}

/// Smallest symplectic eigenvalue of the partial transpose,
/// sqrt(sigma/2 - sqrt(sigma^2 - 4 det V)/2) with
/// sigma = det A + det B - 2 det C.
pub fn nu_minus(g: &GaussianState) -> f64 {
    let v = &g.v;
    let det2 = |a: f64, b: f64, c: f64, d: f64| a * d - b * c;
    let da = det2(v[0][0], v[0][1], v[1][0], v[1][1]);
    let db = det2(v[2][2], v[2][3], v[3][2], v[3][3]);
    let dc = det2(v[0][2], v[0][3], v[1][2], v[1][3]);
    let sigma = da + db - 2.0 * dc;
    let disc = (sigma * sigma - 4.0 * g.det_v()).max(0.0);
    (sigma / 2.0 - disc.sqrt() / 2.0).max(0.0).sqrt()
}

/// max(0, -ln(2 nu_-)).
pub fn log_negativity_gaussian(g: &GaussianState) -> Result<f64> {
    let e = g.uncertainty_margin()?;
    if e < -1e-8 {
        return Err(Error::InvalidState(format!("covariance violates the uncertainty relation ({e:e})")));
    }
    let nu = nu_minus(g);
    Ok(if nu > 0.0 { (-(2.0 * nu).ln()).max(0.0) } else { f64::INFINITY })
}
