//! Wigner functions on rectangular grids.
//!
//! W(alpha) = (2/pi) Tr[rho D(2 alpha) P] with P the photon-number parity.
//! Matrix elements <k|D(beta)|j> are those of the untruncated operator.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matrix::{C64, ONE, ZERO};
use crate::state::DensityMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count == 0 || !start.is_finite() || !stop.is_finite() || (count > 1 && stop <= start) {
            return Err(Error::InvalidArgument(format!("bad grid axis {start}..{stop} x {count}")));
        }
        Ok(Self { start, stop, count })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + h * i as f64).collect()
    }

    pub fn step(&self) -> f64 {
        if self.count > 1 {
            (self.stop - self.start) / (self.count - 1) as f64
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug)]
pub struct WignerGrid {
    pub re_axis: Vec<f64>,
    pub im_axis: Vec<f64>,
    /// values[m][r] = W(re_axis[r] + i im_axis[m])
    pub values: Vec<Vec<f64>>,
    /// Set when the state has weight at the truncation edge.
    pub truncation_warning: bool,
}

/// Columns of <k|D(beta)|j> for j, k <= n_max; out[j][k].
///
/// For k >= j the element is sqrt(j!/k!) beta^(k-j) e^(-x/2) L_j^(k-j)(x)
/// with x = |beta|^2; the upper triangle follows from D(beta)^dag = D(-beta).
/// The Laguerre polynomials are run forward in degree, which stays accurate
/// where the ladder recurrence on columns cancels badly.
fn displacement_columns(beta: C64, n_max: usize) -> Vec<Vec<C64>> {
    let x = beta.norm_sqr();
    let r = beta.norm();
    let phase = if r > 0.0 { beta / r } else { ONE };
    let ln_fact: Vec<f64> = std::iter::once(0.0)
        .chain((1..=n_max).scan(0.0, |acc, k| {
            *acc += (k as f64).ln();
            Some(*acc)
        }))
        .collect();
    let mut cols = vec![vec![ZERO; n_max + 1]; n_max + 1];
    let mut lag = vec![0.0; n_max + 1];
    for a in 0..=n_max {
        let len = n_max + 1 - a;
        let af = a as f64;
        lag[0] = 1.0;
        if len > 1 {
            lag[1] = 1.0 + af - x;
        }
        for m in 1..len.saturating_sub(1) {
            let mf = m as f64;
            lag[m + 1] = ((2.0 * mf + 1.0 + af - x) * lag[m] - (mf + af) * lag[m - 1]) / (mf + 1.0);
        }
        let ph = phase.powu(a as u32);
        let ph_neg = if a % 2 == 0 { ph } else { -ph };
        for j in 0..len {
            let k = j + a;
            let mag = if a > 0 && r == 0.0 {
                0.0
            } else {
                let ln_r = if a > 0 { af * r.ln() } else { 0.0 };
                (0.5 * (ln_fact[j] - ln_fact[k]) + ln_r - 0.5 * x).exp() * lag[j]
            };
            cols[j][k] = ph * mag;
            if a > 0 {
                cols[k][j] = (ph_neg * mag).conj();
            }
        }
    }
    cols
}

/// W at a single point.
pub fn wigner_point(rho: &DensityMatrix, alpha: C64) -> f64 {
    let m = rho.matrix();
    let n_max = rho.dim() - 1;
    let cols = displacement_columns(alpha * 2.0, n_max);
    let mut s = ZERO;
    for j in 0..=n_max {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let col = &cols[j];
        let mut acc = ZERO;
        for k in 0..=n_max {
            acc += m[(j, k)] * col[k];
        }
        s += acc * sign;
    }
    2.0 / std::f64::consts::PI * s.re
}

pub fn wigner(rho_field: &DensityMatrix, re_axis: Axis, im_axis: Axis) -> WignerGrid {
    let xs = re_axis.points();
    let ys = im_axis.points();
    let values: Vec<Vec<f64>> = ys
        .par_iter()
        .map(|&y| xs.iter().map(|&x| wigner_point(rho_field, C64::new(x, y))).collect())
        .collect();
    let n_max = rho_field.dim() - 1;
    let edge = rho_field.matrix()[(n_max, n_max)].re;
    WignerGrid { re_axis: xs, im_axis: ys, values, truncation_warning: edge > 1e-6 }
}

impl WignerGrid {
    pub fn min(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    /// Riemann sum of W over the grid.
    pub fn integral(&self) -> f64 {
        let dx = if self.re_axis.len() > 1 { self.re_axis[1] - self.re_axis[0] } else { 0.0 };
        let dy = if self.im_axis.len() > 1 { self.im_axis[1] - self.im_axis[0] } else { 0.0 };
        self.values.iter().flatten().sum::<f64>() * dx * dy
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WignerMaximum {
    pub alpha: C64,
    pub value: f64,
    /// Height above the highest saddle connecting it to a higher peak.
    pub prominence: f64,
}

/// Local maxima with prominence above `min_prominence`, sub-grid refined,
/// sorted by decreasing value.
pub fn wigner_maxima_with(w: &WignerGrid, min_prominence: f64) -> Vec<WignerMaximum> {
    let ny = w.im_axis.len();
    let nx = w.re_axis.len();
    if nx < 3 || ny < 3 {
        return Vec::new();
    }
    let val = |m: usize, r: usize| w.values[m][r];
    let mut order: Vec<(usize, usize)> = (0..ny).flat_map(|m| (0..nx).map(move |r| (m, r))).collect();
    order.sort_by(|a, b| val(b.0, b.1).total_cmp(&val(a.0, a.1)).then(a.cmp(b)));

    // union-find over points in descending order; each component remembers
    // its peak
    let idx = |m: usize, r: usize| m * nx + r;
    let mut parent: Vec<usize> = (0..nx * ny).collect();
    let mut active = vec![false; nx * ny];
    let mut peak_of = vec![usize::MAX; nx * ny];
    let mut prominence = vec![f64::NAN; nx * ny];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let peak_value = |p: usize| w.values[p / nx][p % nx];
    for &(m, r) in &order {
        let here = idx(m, r);
        active[here] = true;
        let mut roots: Vec<usize> = Vec::new();
        for dm in -1i64..=1 {
            for dr in -1i64..=1 {
                if dm == 0 && dr == 0 {
                    continue;
                }
                let (mm, rr) = (m as i64 + dm, r as i64 + dr);
                if mm < 0 || rr < 0 || mm >= ny as i64 || rr >= nx as i64 {
                    continue;
                }
                let nb = idx(mm as usize, rr as usize);
                if active[nb] {
                    let root = find(&mut parent, nb);
                    if !roots.contains(&root) {
                        roots.push(root);
                    }
                }
            }
        }
        if roots.is_empty() {
            peak_of[here] = here;
            continue;
        }
        // the component with the highest peak absorbs the others
        roots.sort_by(|a, b| peak_value(peak_of[*b]).total_cmp(&peak_value(peak_of[*a])).then(a.cmp(b)));
        let keep = roots[0];
        let level = val(m, r);
        for &other in &roots[1..] {
            let p = peak_of[other];
            prominence[p] = peak_value(p) - level;
            parent[other] = keep;
        }
        parent[here] = keep;
    }
    let global_min = val(order.last().unwrap().0, order.last().unwrap().1);
    for p in 0..nx * ny {
        if peak_of[p] == p && prominence[p].is_nan() {
            prominence[p] = peak_value(p) - global_min;
        }
    }

    let hx = w.re_axis[1] - w.re_axis[0];
    let hy = w.im_axis[1] - w.im_axis[0];
    let refine = |fm: f64, f0: f64, fp: f64| {
        let den = fm - 2.0 * f0 + fp;
        if den < 0.0 {
            (0.5 * (fm - fp) / den).clamp(-0.5, 0.5)
        } else {
            0.0
        }
    };
    let mut out: Vec<WignerMaximum> = Vec::new();
    for p in 0..nx * ny {
        if peak_of[p] != p || !(prominence[p] > min_prominence) {
            continue;
        }
        let (m, r) = (p / nx, p % nx);
        if m == 0 || r == 0 || m + 1 == ny || r + 1 == nx {
            continue;
        }
        let f0 = val(m, r);
        let dx = refine(val(m, r - 1), f0, val(m, r + 1));
        let dy = refine(val(m - 1, r), f0, val(m + 1, r));
        out.push(WignerMaximum {
            alpha: C64::new(w.re_axis[r] + dx * hx, w.im_axis[m] + dy * hy),
            value: f0,
            prominence: prominence[p],
        });
    }
    out.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.alpha.re.total_cmp(&b.alpha.re)));
    out
}

/// Maxima more than 1e-4 above their separating saddle.
pub fn wigner_maxima(w: &WignerGrid) -> Vec<WignerMaximum> {
    wigner_maxima_with(w, 1e-4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c, re};
    use crate::operators::{coherent_amplitudes, displacement};
    use crate::state::KetState;
    use std::f64::consts::PI;

    #[test]
    fn spot_values() {
        let vac = KetState::basis(10, 0).unwrap().to_density();
        assert!((wigner_point(&vac, ZERO) - 2.0 / PI).abs() < 1e-12);
        let one = KetState::basis(10, 1).unwrap().to_density();
        assert!((wigner_point(&one, ZERO) + 2.0 / PI).abs() < 1e-12);
        // vacuum is a Gaussian (2/pi) exp(-2|alpha|^2)
        let a = c(0.7, -0.4);
        assert!((wigner_point(&vac, a) - 2.0 / PI * (-2.0 * a.norm_sqr()).exp()).abs() < 1e-12);
    }

    #[test]
    fn matrix_elements_match_large_truncation() {
        for beta in [c(2.5, -1.5), c(0.0, 0.0), c(-0.3, 0.1)] {
            let cols = displacement_columns(beta, 20);
            let d = displacement(beta, 120).unwrap();
            for j in 0..=20 {
                for k in 0..=20 {
                    assert!((cols[j][k] - d[(k, j)]).norm() < 1e-10, "({k},{j}) {} {}", cols[j][k], d[(k, j)]);
                }
            }
        }
        // columns are coherent states displaced from Fock states
        let beta = c(1.2, 0.7);
        let cols = displacement_columns(beta, 30);
        let coh = coherent_amplitudes(beta, 30);
        for k in 0..=30 {
            assert!((cols[0][k] - coh[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn coherent_state_peak_and_norm() {
        let alpha = c(1.0, 0.5);
        let psi = KetState::new(coherent_amplitudes(alpha, 30)).unwrap();
        let ax = Axis::new(-3.0, 4.0, 71).unwrap();
        let g = wigner(&psi.to_density(), ax, ax);
        assert!((g.integral() - 1.0).abs() < 0.02);
        let peaks = wigner_maxima(&g);
        assert_eq!(peaks.len(), 1);
        assert!((peaks[0].alpha - alpha).norm() < 0.05);
        assert!(!g.truncation_warning);
    }

    #[test]
    fn vacuum_has_single_central_maximum() {
        let vac = KetState::basis(8, 0).unwrap().to_density();
        let ax = Axis::new(-2.0, 2.0, 41).unwrap();
        let peaks = wigner_maxima(&wigner(&vac, ax, ax));
        assert_eq!(peaks.len(), 1);
        assert!(peaks[0].alpha.norm() < 1e-12);
    }

    #[test]
    fn cat_state_is_symmetric_with_two_lobes() {
        let a = coherent_amplitudes(re(1.8), 40);
        let b = coherent_amplitudes(re(-1.8), 40);
        let psi = KetState::new(a.iter().zip(&b).map(|(x, y)| x + y).collect()).unwrap();
        let rho = psi.to_density();
        let ax = Axis::new(-3.0, 3.0, 61).unwrap();
        let g = wigner(&rho, ax, ax);
        for m in 0..61 {
            for r in 0..61 {
                assert!((g.values[m][r] - g.values[60 - m][60 - r]).abs() < 1e-12);
            }
        }
        // two outer lobes plus the central interference fringe
        let peaks = wigner_maxima(&g);
        let lobes: Vec<_> = peaks.iter().filter(|p| p.alpha.re.abs() > 1.0).collect();
        assert_eq!(lobes.len(), 2);
        for l in lobes {
            assert!((l.alpha.re.abs() - 1.8).abs() < 0.1);
            assert!(l.alpha.im.abs() < 1e-9);
        }
        assert!((wigner_point(&rho, ZERO) - 2.0 / PI).abs() < 1e-10);
    }
}
