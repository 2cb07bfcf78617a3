//! Two-mode model with the field output fed back after a delay tau.
//!
//! In V = (a, a^dag, b, b^dag) the Langevin equations read
//!
//!   dV/dt = (A - B) V(t) + B V(t - tau) - sqrt(2 Gamma) V_in(t),
//!
//! so normal modes e^{Lambda t} solve det(A - B + B e^{-Lambda tau} - Lambda I) = 0.
//! Roots are seeded by counting phase windings of the determinant over grid
//! cells and polished by Newton iteration. The stationary covariance follows
//! from integrating the transfer function over frequency.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::gaussian::{log_negativity_gaussian, steady_covariance, GaussianState};
use crate::matrix::{c, re, CMatrix, C64, ONE, ZERO};
use crate::models::RabiParams;

/// Margin below which a covariance is reported as unphysical.
pub const UNCERTAINTY_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct DelayedLangevin {
    pub a: CMatrix,
    /// gamma/2 on the a and a^dag diagonal entries.
    pub b: CMatrix,
    pub gamma: CMatrix,
    pub tau: f64,
}

pub fn langevin_matrices(p: &RabiParams, tau: f64) -> Result<DelayedLangevin> {
    p.validate()?;
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("delay {tau} must be finite and nonnegative")));
    }
    let (w, om, l1, l2, g) = (p.omega, p.big_omega, p.lambda1, p.lambda2, p.gamma);
    let i = |x: f64| c(0.0, x);
    #[rustfmt::skip]
    let a = CMatrix::from_vec(4, 4, vec![
        c(-g, -w), ZERO,      i(-l1), i(-l2),
        ZERO,      c(-g, w),  i(l2),  i(l1),
        i(-l1),    i(-l2),    i(-om), ZERO,
        i(l2),     i(l1),     ZERO,   i(om),
    ])
    .expect("4x4");
    let b = CMatrix::diag(&[re(g / 2.0), re(g / 2.0), ZERO, ZERO]);
    let gamma = CMatrix::diag(&[re(g), re(g), ZERO, ZERO]);
    Ok(DelayedLangevin { a, b, gamma, tau })
}

impl DelayedLangevin {
    pub fn system(&self) -> DelaySystem {
        DelaySystem { a0: &self.a - &self.b, a1: self.b.clone(), tau: self.tau }
    }
}

/// Linear system dx/dt = a0 x(t) + a1 x(t - tau) of any size.
#[derive(Clone, Debug, PartialEq)]
pub struct DelaySystem {
    pub a0: CMatrix,
    pub a1: CMatrix,
    pub tau: f64,
}

/// In-place LU with partial pivoting on a row-major n x n block.
/// Returns the determinant and the row permutation.
fn lu(m: &mut [C64], n: usize) -> (C64, Vec<usize>) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut det = ONE;
    for k in 0..n {
        let p = (k..n).max_by(|&x, &y| m[x * n + k].norm().total_cmp(&m[y * n + k].norm())).unwrap_or(k);
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            det = -det;
        }
        let piv = m[k * n + k];
        det *= piv;
        if piv == ZERO {
            continue;
        }
        for i in k + 1..n {
            let f = m[i * n + k] / piv;
            m[i * n + k] = f;
            for j in k + 1..n {
                let u = m[k * n + j];
                m[i * n + j] -= f * u;
            }
        }
    }
    (det, perm)
}

fn lu_solve(m: &[C64], perm: &[usize], n: usize, b: &[C64]) -> Vec<C64> {
    let mut x: Vec<C64> = perm.iter().map(|&p| b[p]).collect();
    for i in 0..n {
        for j in 0..i {
            let t = m[i * n + j] * x[j];
            x[i] -= t;
        }
    }
    for i in (0..n).rev() {
        for j in i + 1..n {
            let t = m[i * n + j] * x[j];
            x[i] -= t;
        }
        x[i] /= m[i * n + i];
    }
    x
}

impl DelaySystem {
    pub fn dim(&self) -> usize {
        self.a0.nrows()
    }

    /// a0 + a1 e^{-z tau} - z I, row-major.
    fn characteristic(&self, z: C64) -> Vec<C64> {
        let n = self.dim();
        let e = (-z * self.tau).exp();
        let mut m = vec![ZERO; n * n];
        for i in 0..n {
            for j in 0..n {
                m[i * n + j] = self.a0[(i, j)] + self.a1[(i, j)] * e;
            }
            m[i * n + i] -= z;
        }
        m
    }

    pub fn det(&self, z: C64) -> C64 {
        let n = self.dim();
        lu(&mut self.characteristic(z), n).0
    }

    /// Determinant and Newton step det / det' = 1 / tr(M^{-1} M').
    fn newton_step(&self, z: C64) -> (C64, Option<C64>) {
        let n = self.dim();
        let mut m = self.characteristic(z);
        let (d, perm) = lu(&mut m, n);
        if d == ZERO || !d.is_finite() {
            return (d, None);
        }
        let e = (-z * self.tau).exp() * (-self.tau);
        let mut tr = ZERO;
        for j in 0..n {
            let col: Vec<C64> = (0..n).map(|i| self.a1[(i, j)] * e - if i == j { ONE } else { ZERO }).collect();
            tr += lu_solve(&m, &perm, n, &col)[j];
        }
        (d, if tr == ZERO { None } else { Some(ONE / tr) })
    }

    fn polish(&self, z0: C64) -> Option<(C64, f64)> {
        let mut z = z0;
        for _ in 0..80 {
            let (d, step) = self.newton_step(z);
            if d == ZERO {
                return Some((z, 0.0));
            }
            let s = step?;
            z -= s;
            if !z.is_finite() {
                return None;
            }
            if s.norm() <= 1e-14 * z.norm().max(1.0) {
                return Some((z, self.det(z).norm()));
            }
        }
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootWindow {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl RootWindow {
    /// Re in [-5 gamma - 2(lambda1 + lambda2), 1] and six delay branches
    /// either side of the real axis.
    pub fn default_for(p: &RabiParams, tau: f64) -> Self {
        let im = if tau > 0.0 {
            6.0 * 2.0 * PI / tau
        } else {
            2.0 * p.omega.abs().max(p.big_omega.abs()) + 2.0 * (p.lambda1 + p.lambda2) + 1.0
        };
        Self { re_min: -5.0 * p.gamma - 2.0 * (p.lambda1 + p.lambda2), re_max: 1.0, im_min: -im, im_max: im }
    }

    pub fn contains(&self, z: C64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    fn validate(&self) -> Result<()> {
        let ok = [self.re_min, self.re_max, self.im_min, self.im_max].iter().all(|x| x.is_finite())
            && self.re_min < self.re_max
            && self.im_min < self.im_max;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("degenerate root window {self:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RootGrid {
    pub re_cells: usize,
    pub im_cells: usize,
}

impl Default for RootGrid {
    fn default() -> Self {
        Self { re_cells: 16, im_cells: 96 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootScan {
    /// Sorted by decreasing real part.
    pub roots: Vec<C64>,
    pub max_re: Option<f64>,
    pub window: RootWindow,
    pub grid: RootGrid,
    /// |det| at each root.
    pub residuals: Vec<f64>,
    /// Zeros enclosed by the window boundary, counted with multiplicity.
    pub winding: i64,
    pub warning: Option<String>,
}

const ARG_STEP: f64 = PI / 3.0;
const MAX_EDGE_DEPTH: u32 = 30;
const MAX_CELL_DEPTH: u32 = 8;

#[derive(Clone, Copy)]
struct Sample {
    value: C64,
    /// |det'/det|
    log_slope: f64,
}

struct Winding<'a> {
    sys: &'a DelaySystem,
    seeds: Vec<C64>,
    /// Cells holding a known number of zeros: (lower left, upper right, count).
    leaves: Vec<(C64, C64, i64)>,
}

impl Winding<'_> {
    /// Phase change of det along the segment z0 -> z1. A piece is accepted
    /// once both the sampled phase step and the bound |f'/f| h stay below
    /// pi/3, which rules out skipping a full turn between samples.
    fn edge(&mut self, z0: C64, f0: Sample, z1: C64, f1: Sample, depth: u32) -> f64 {
        if f0.value == ZERO || f1.value == ZERO {
            self.seeds.push(if f0.value == ZERO { z0 } else { z1 });
            return 0.0;
        }
        let d = (f1.value / f0.value).arg();
        let h = (z1 - z0).norm();
        let smooth = d.abs() < ARG_STEP && h * f0.log_slope.max(f1.log_slope) < ARG_STEP;
        if smooth || depth >= MAX_EDGE_DEPTH {
            if !smooth {
                self.seeds.push((z0 + z1) * 0.5);
            }
            return d;
        }
        let zm = (z0 + z1) * 0.5;
        let fm = self.sample(zm);
        self.edge(z0, f0, zm, fm, depth + 1) + self.edge(zm, fm, z1, f1, depth + 1)
    }

    fn sample(&self, z: C64) -> Sample {
        let (value, step) = self.sys.newton_step(z);
        Sample { value, log_slope: step.map_or(f64::INFINITY, |s| 1.0 / s.norm()) }
    }

    /// Winding number of the rectangle with corners z00 (lower left) and z11.
    fn cell(&mut self, z00: C64, z11: C64) -> i64 {
        let z10 = C64::new(z11.re, z00.im);
        let z01 = C64::new(z00.re, z11.im);
        let f = [self.sample(z00), self.sample(z10), self.sample(z11), self.sample(z01)];
        let corners = [z00, z10, z11, z01];
        let mut total = 0.0;
        for k in 0..4 {
            total += self.edge(corners[k], f[k], corners[(k + 1) % 4], f[(k + 1) % 4], 0);
        }
        (total / (2.0 * PI)).round() as i64
    }

    /// Seeds every zero of a cell, splitting cells that hold more than one.
    fn refine(&mut self, z00: C64, z11: C64, count: i64, depth: u32) {
        if count <= 0 {
            return;
        }
        let mid = (z00 + z11) * 0.5;
        if count == 1 || depth >= MAX_CELL_DEPTH {
            self.seeds.push(mid);
            self.leaves.push((z00, z11, count));
            return;
        }
        let quads = [
            (z00, mid),
            (C64::new(mid.re, z00.im), C64::new(z11.re, mid.im)),
            (mid, z11),
            (C64::new(z00.re, mid.im), C64::new(mid.re, z11.im)),
        ];
        let mut found = 0;
        for (lo, hi) in quads {
            let w = self.cell(lo, hi);
            found += w;
            self.refine(lo, hi, w, depth + 1);
        }
        if found < count {
            self.seeds.push(mid);
        }
    }
}

/// Roots of the secular determinant inside `window`.
pub fn secular_roots(sys: &DelaySystem, window: RootWindow, grid: RootGrid) -> Result<RootScan> {
    let n = sys.dim();
    if n == 0 || !sys.a0.is_square() || sys.a1.nrows() != n || sys.a1.ncols() != n {
        return Err(Error::InvalidDimension("delay system matrices must be square and equal".into()));
    }
    if !(sys.tau >= 0.0 && sys.tau.is_finite()) {
        return Err(Error::InvalidArgument(format!("delay {} must be finite and nonnegative", sys.tau)));
    }
    window.validate()?;
    if grid.re_cells == 0 || grid.im_cells == 0 {
        return Err(Error::InvalidArgument("root grid needs at least one cell per axis".into()));
    }

    let mut w = Winding { sys, seeds: Vec::new(), leaves: Vec::new() };
    for m in [&sys.a0 + &sys.a1, sys.a0.clone()] {
        w.seeds.extend(m.eigenvalues()?);
    }

    let mut winding = n as i64;
    if sys.tau > 0.0 {
        let (nx, ny) = (grid.re_cells, grid.im_cells);
        let dx = (window.re_max - window.re_min) / nx as f64;
        let dy = (window.im_max - window.im_min) / ny as f64;
        let node = |i: usize, j: usize| C64::new(window.re_min + dx * i as f64, window.im_min + dy * j as f64);
        let f: Vec<Vec<Sample>> = (0..=nx).map(|i| (0..=ny).map(|j| w.sample(node(i, j))).collect()).collect();
        // horizontal edges (i, j) -> (i+1, j), vertical edges (i, j) -> (i, j+1)
        let mut h = vec![vec![0.0; ny + 1]; nx];
        let mut v = vec![vec![0.0; ny]; nx + 1];
        for i in 0..nx {
            for j in 0..=ny {
                h[i][j] = w.edge(node(i, j), f[i][j], node(i + 1, j), f[i + 1][j], 0);
            }
        }
        for i in 0..=nx {
            for j in 0..ny {
                v[i][j] = w.edge(node(i, j), f[i][j], node(i, j + 1), f[i][j + 1], 0);
            }
        }
        let mut boundary = 0.0;
        for i in 0..nx {
            boundary += h[i][0] - h[i][ny];
        }
        for j in 0..ny {
            boundary += v[nx][j] - v[0][j];
        }
        winding = (boundary / (2.0 * PI)).round() as i64;
        for i in 0..nx {
            for j in 0..ny {
                let cell = ((h[i][j] + v[i + 1][j] - h[i][j + 1] - v[i][j]) / (2.0 * PI)).round() as i64;
                w.refine(node(i, j), node(i + 1, j + 1), cell, 0);
            }
        }
    }

    let mut roots: Vec<(C64, f64)> = Vec::new();
    let accept = |seed: C64, roots: &mut Vec<(C64, f64)>| {
        let Some((z, r)) = sys.polish(seed) else { return };
        if (!window.contains(z) && sys.tau > 0.0) || roots.iter().any(|(y, _)| (z - y).norm() <= 1e-8 * z.norm().max(1.0)) {
            return;
        }
        roots.push((z, r));
    };
    for s in std::mem::take(&mut w.seeds) {
        accept(s, &mut roots);
    }
    // Newton from a cell centre can land on a neighbouring zero; retry
    // short cells from an interior lattice
    for &(lo, hi, count) in &w.leaves {
        let inside = |roots: &[(C64, f64)]| {
            let slack = 1e-9 * (hi - lo).norm();
            roots
                .iter()
                .filter(|(z, _)| {
                    z.re >= lo.re - slack && z.re <= hi.re + slack && z.im >= lo.im - slack && z.im <= hi.im + slack
                })
                .count() as i64
        };
        if inside(&roots) >= count {
            continue;
        }
        'lattice: for a in 0..5 {
            for b in 0..5 {
                let t = C64::new((a as f64 + 0.5) / 5.0, 0.0);
                let u = (b as f64 + 0.5) / 5.0;
                accept(C64::new(lo.re + (hi.re - lo.re) * t.re, lo.im + (hi.im - lo.im) * u), &mut roots);
                if inside(&roots) >= count {
                    break 'lattice;
                }
            }
        }
    }
    roots.sort_by(|x, y| y.0.re.total_cmp(&x.0.re).then(x.0.im.total_cmp(&y.0.im)));

    let max_re = roots.iter().map(|(z, _)| z.re).reduce(f64::max);
    let warning = if roots.is_empty() {
        Some("no roots found in the search window".to_string())
    } else if roots.len() as i64 != winding {
        Some(format!("{} distinct roots found, boundary winding counts {winding}", roots.len()))
    } else {
        None
    };
    let (roots, residuals) = roots.into_iter().unzip();
    Ok(RootScan { roots, max_re, window, grid, residuals, winding, warning })
}

/// Noise entering the a mode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum NoiseModel {
    /// White vacuum input with rate Gamma only.
    #[default]
    Input,
    /// Additionally the vacuum entering the loop, which reaches the mode
    /// once directly and once after the delay. Preserves [a, a^dag] = 1.
    Loop,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralOptions {
    pub noise: NoiseModel,
    /// Stop doubling the frequency cutoff once no entry changes by more.
    pub tol: f64,
    pub window: Option<RootWindow>,
    pub grid: RootGrid,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self { noise: NoiseModel::Input, tol: 1e-8, window: None, grid: RootGrid::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCovariance {
    /// Not validated: may violate the uncertainty relation, see `physical`.
    pub state: GaussianState,
    /// Smallest eigenvalue of V + (i/2) Omega.
    pub margin: f64,
    pub physical: bool,
    pub max_re: f64,
    pub cutoff: f64,
}

// Gauss-Kronrod 7/15 abscissae and weights
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

struct Spectral<'a> {
    d: &'a DelayedLangevin,
    noise: NoiseModel,
    g: f64,
}

impl Spectral<'_> {
    /// T(nu) e_col with T(nu) = [-i nu I - A + B - B e^{i nu tau}]^{-1}.
    fn transfer_column(&self, nu: f64, col: usize) -> [C64; 4] {
        let e = C64::new(0.0, nu * self.d.tau).exp();
        let mut m = [ZERO; 16];
        for i in 0..4 {
            for j in 0..4 {
                m[i * 4 + j] = -self.d.a[(i, j)] + self.d.b[(i, j)] * (ONE - e);
            }
            m[i * 4 + i] += c(0.0, -nu);
        }
        let (_, perm) = lu(&mut m, 4);
        let mut rhs = [ZERO; 4];
        rhs[col] = ONE;
        let x = lu_solve(&m, &perm, 4, &rhs);
        [x[0], x[1], x[2], x[3]]
    }

    /// Spectral density of the a-mode input.
    fn noise_density(&self, nu: f64) -> f64 {
        match self.noise {
            NoiseModel::Input => 2.0 * self.g,
            NoiseModel::Loop => 2.0 * self.g + self.g * (1.0 - (nu * self.d.tau).cos()),
        }
    }

    /// Integrand of <V_i V_j>, flattened.
    fn integrand(&self, nu: f64) -> [C64; 16] {
        let u = self.transfer_column(nu, 0);
        let v = self.transfer_column(-nu, 1);
        let x = self.noise_density(nu) / (2.0 * PI);
        let mut out = [ZERO; 16];
        for i in 0..4 {
            for j in 0..4 {
                out[i * 4 + j] = u[i] * v[j] * x;
            }
        }
        out
    }

    fn kronrod(&self, lo: f64, hi: f64) -> ([C64; 16], f64) {
        let (mid, half) = ((lo + hi) / 2.0, (hi - lo) / 2.0);
        let mut k = [ZERO; 16];
        let mut g = [ZERO; 16];
        for (idx, (&x, &wk)) in XGK.iter().zip(&WGK).enumerate() {
            let nodes: &[f64] = if x == 0.0 { &[0.0] } else { &[-x, x] };
            for &s in nodes {
                let f = self.integrand(mid + half * s);
                for t in 0..16 {
                    k[t] += f[t] * wk;
                    if idx % 2 == 1 {
                        g[t] += f[t] * WG[idx / 2];
                    }
                }
            }
        }
        let mut err = 0.0f64;
        for t in 0..16 {
            k[t] *= half;
            err = err.max(((g[t] * half) - k[t]).norm());
        }
        (k, err)
    }

    fn adaptive(&self, lo: f64, hi: f64, density: f64, acc: &mut [C64; 16]) {
        let mut stack = vec![(lo, hi, 0u32)];
        while let Some((a, b, depth)) = stack.pop() {
            let (val, err) = self.kronrod(a, b);
            if err <= density * (b - a) || depth >= 40 {
                for t in 0..16 {
                    acc[t] += val[t];
                }
            } else {
                let m = (a + b) / 2.0;
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
            }
        }
    }

    /// Integral over [lo, hi] split at the breakpoints and at panels no
    /// wider than `width`.
    fn integrate(&self, lo: f64, hi: f64, breaks: &[f64], width: f64, density: f64) -> [C64; 16] {
        let mut pts: Vec<f64> = vec![lo, hi];
        pts.extend(breaks.iter().copied().filter(|&x| x > lo && x < hi));
        pts.sort_by(f64::total_cmp);
        pts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        let mut acc = [ZERO; 16];
        for w in pts.windows(2) {
            let pieces = ((w[1] - w[0]) / width).ceil().max(1.0) as usize;
            let h = (w[1] - w[0]) / pieces as f64;
            for k in 0..pieces {
                let a = w[0] + h * k as f64;
                self.adaptive(a, if k + 1 == pieces { w[1] } else { a + h }, density, &mut acc);
            }
        }
        acc
    }

    /// 1/nu^2 tail of <a a^dag> beyond |nu| = k, noise averaged.
    fn tail(&self, k: f64) -> f64 {
        let mean = match self.noise {
            NoiseModel::Input => 2.0 * self.g,
            NoiseModel::Loop if self.d.tau > 0.0 => 3.0 * self.g,
            NoiseModel::Loop => 2.0 * self.g,
        };
        mean / (PI * k)
    }
}

/// Stationary covariance of the delayed model for vacuum inputs.
pub fn spectral_covariance(d: &DelayedLangevin, opts: &SpectralOptions) -> Result<SpectralCovariance> {
    if !(opts.tol > 0.0 && opts.tol.is_finite()) {
        return Err(Error::InvalidArgument(format!("tolerance {} must be positive", opts.tol)));
    }
    let g = d.gamma[(0, 0)].re;
    let p_window = opts.window.unwrap_or_else(|| {
        let scale = d.a.max_abs();
        let im = if d.tau > 0.0 { 12.0 * PI / d.tau } else { 2.0 * scale + 1.0 };
        RootWindow { re_min: -5.0 * g - 2.0 * scale, re_max: 1.0, im_min: -im, im_max: im }
    });
    let scan = secular_roots(&d.system(), p_window, opts.grid)?;
    let max_re = scan.max_re.ok_or_else(|| Error::Numerical("root scan found no roots".into()))?;
    if max_re >= 0.0 {
        return Err(Error::Unstable { zeta: max_re });
    }

    let sp = Spectral { d, noise: opts.noise, g };
    let breaks: Vec<f64> = scan.roots.iter().flat_map(|z| [-z.im, z.im]).collect();
    let width = if d.tau > 0.0 { (PI / d.tau).min(2.0) } else { 2.0 };
    let density = opts.tol * 1e-3;
    let reach = scan.roots.iter().filter(|z| z.re > -1.0).map(|z| z.im.abs()).fold(0.0, f64::max);
    let mut k = (2.0 * reach + 10.0).max(16.0);
    let mut acc = sp.integrate(-k, k, &breaks, width, density);
    let total = |acc: &[C64; 16], k: f64| {
        let mut p = *acc;
        p[1] += re(sp.tail(k));
        p
    };
    let mut prev = total(&acc, k);
    let mut converged = false;
    for _ in 0..16 {
        let k2 = 2.0 * k;
        let lo = sp.integrate(-k2, -k, &breaks, width, density);
        let hi = sp.integrate(k, k2, &breaks, width, density);
        for t in 0..16 {
            acc[t] += lo[t] + hi[t];
        }
        k = k2;
        let next = total(&acc, k);
        let change = next.iter().zip(&prev).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prev = next;
        if change < opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!("frequency integral not converged at cutoff {k}")));
    }

    // quadratures R = Q V with q = (a + a^dag)/sqrt 2, p = -i (a - a^dag)/sqrt 2
    let s = FRAC_1_SQRT_2;
    let mut q = [[ZERO; 4]; 4];
    for m in [0, 2] {
        q[m][m] = re(s);
        q[m][m + 1] = re(s);
        q[m + 1][m] = c(0.0, -s);
        q[m + 1][m + 1] = c(0.0, s);
    }
    let sym = |i: usize, j: usize| (prev[i * 4 + j] + prev[j * 4 + i]) * 0.5;
    let mut vc = [[0.0; 4]; 4];
    for (i, row) in vc.iter_mut().enumerate() {
        for (j, out) in row.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in 0..4 {
                for l in 0..4 {
                    acc += q[i][k] * sym(k, l) * q[j][l];
                }
            }
            *out = acc.re;
        }
    }
    let mut v = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            v[i][j] = 0.5 * (vc[i][j] + vc[j][i]);
        }
    }
    let state = GaussianState { mean: [0.0; 4], v };
    let margin = state.uncertainty_margin()?;
    Ok(SpectralCovariance { state, margin, physical: margin >= -UNCERTAINTY_TOL, max_re, cutoff: k })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DelayedNegativity {
    pub tau: f64,
    /// `None` when the covariance violates the uncertainty relation.
    pub negativity: Option<f64>,
    /// Steady-state value without feedback.
    pub baseline: f64,
    pub margin: f64,
    pub max_re: f64,
}

pub fn delayed_negativity(p: &RabiParams, tau: f64, opts: &SpectralOptions) -> Result<DelayedNegativity> {
    let d = langevin_matrices(p, tau)?;
    let baseline = log_negativity_gaussian(&steady_covariance(p)?)?;
    let opts = SpectralOptions { window: opts.window.or(Some(RootWindow::default_for(p, tau))), ..*opts };
    let sc = spectral_covariance(&d, &opts)?;
    let negativity = if sc.physical { Some(log_negativity_gaussian(&sc.state)?) } else { None };
    Ok(DelayedNegativity { tau, negativity, baseline, margin: sc.margin, max_re: sc.max_re })
}
