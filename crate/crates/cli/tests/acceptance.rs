//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Runs every shipped config, so it takes a few minutes.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use nesslab::delay::{
    langevin_matrices, secular_roots, DelaySystem, RootGrid, RootWindow,
};
use nesslab::feedback::{
    cascade_master_equation, effective_gamma, effective_master_equation, noon_state, source_state,
    with_empty_driven_cavity, CascadeTruncation, FeedbackParams,
};
use nesslab::gaussian::{chi_generators, log_negativity_gaussian, stability_zeta, steady_covariance};
use nesslab::lindblad::{arm_steady_state, evolve_sampled, steady_state_null, IntegratorOptions};
use nesslab::matrix::{c, re};
use nesslab::measures::wigner::Axis;
use nesslab::measures::{
    log_negativity_discrete, max_within_parity_coherence, parity_decompose, wigner, wigner_maxima, wigner_point,
    Subsystem,
};
use nesslab::models::{arm_space, build_nad_hamiltonian, build_rabi_hamiltonian, nad_loss, RabiParams};
use nesslab::operators::{annihilation, embed, parity_operator};
use nesslab::rwa::{rwa_error_check, rwa_noon_fidelity};
use nesslab::{CMatrix, DensityMatrix, HilbertSpec, KetState, C64};
use nesslab_cli::{run, validate_config, AxisSpec, Status, SweepResult};
use rand::{Rng, SeedableRng};

struct Report {
    failed: usize,
}

impl Report {
    fn check(&mut self, name: &str, pass: bool, detail: String) {
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed += 1;
        }
    }
}

struct Shipped {
    result: SweepResult,
    csv: String,
    elapsed: Duration,
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn col(r: &SweepResult, name: &str) -> usize {
    r.column(name).unwrap_or_else(|| panic!("no column {name}"))
}

fn rabi(l1: f64, l2: f64, g: f64) -> RabiParams {
    RabiParams::new(1.0, 1.0, l1, l2, g).unwrap()
}

fn arm_negativity(p: &RabiParams, n: usize) -> f64 {
    let rho = arm_steady_state(p, n).unwrap();
    log_negativity_discrete(&rho, (n + 1, 2), Subsystem::B).unwrap()
}

fn peak(rep: &mut Report, s: &Shipped) {
    let r = &s.result;
    let cfg = &r.config;
    let step = match &cfg.grid["ratio"] {
        AxisSpec::Range { start, stop, count } => (stop - start) / (*count as f64 - 1.0),
        AxisSpec::List { .. } => f64::INFINITY,
    };
    let n_max = cfg.truncation["n_max"];
    let (x, e, conv) = (col(r, "ratio"), col(r, "log_negativity"), col(r, "converged"));
    let all_converged = r.rows.iter().all(|row| row.status == Status::Ok && row.values[conv] == 1.0);
    let summary = r.summary();
    let argmax = summary["extrema"]["log_negativity"]["argmax"]["ratio"].as_f64().unwrap_or(f64::NAN);
    let at_zero = r.rows[0].values[e];
    let k_peak = r.rows.iter().position(|row| row.values[x] == argmax).unwrap_or(0);
    let falls_after_peak = r.rows[k_peak..].windows(2).all(|w| w[1].values[e] <= w[0].values[e] + 1e-12);
    let at_three = r.rows.last().unwrap().values[e];
    // anti-JC side: lambda1 -> 0 at fixed lambda2, past the bump near lambda1 = 0.06
    let anti: Vec<f64> = [0.05, 0.02, 0.01, 0.005, 0.001, 0.0].iter().map(|&l1| arm_negativity(&rabi(l1, 0.8, 0.1), n_max)).collect();
    let anti_falls = anti.windows(2).all(|w| w[1] < w[0]) && anti[5] <= 1e-8;
    let pass = step <= 0.05 + 1e-12
        && n_max >= 25
        && all_converged
        && (argmax - 1.6).abs() <= 0.1 + 1e-12
        && at_zero.abs() <= 1e-8
        && falls_after_peak
        && anti_falls
        && s.elapsed < Duration::from_secs(600);
    rep.check(
        "log negativity peak",
        pass,
        format!(
            "argmax ratio {argmax}, peak {:.5}, value at 0 {at_zero:e}, at 3 {at_three:.4} (falling), lambda1 -> 0 at lambda2 = 0.8: {:?}, truncation check {}, {:.1} s",
            r.rows[k_peak].values[e],
            anti.iter().map(|v| format!("{v:.2e}")).collect::<Vec<_>>(),
            if all_converged { "passed" } else { "failed" },
            s.elapsed.as_secs_f64()
        ),
    );
}

fn jc_limits(rep: &mut Report) {
    let n = 10;
    let d = 2 * (n + 1);
    // boson (x) qubit with |up> first: |0, down> = 1, |0, up> = 0
    let jc = arm_steady_state(&rabi(0.5, 0.0, 0.1), n).unwrap();
    let ajc = arm_steady_state(&rabi(0.0, 0.5, 0.1), n).unwrap();
    let t_jc = jc.trace_distance(&KetState::basis(d, 1).unwrap().to_density()).unwrap();
    let t_ajc = ajc.trace_distance(&KetState::basis(d, 0).unwrap().to_density()).unwrap();
    rep.check(
        "Jaynes-Cummings limits",
        t_jc <= 1e-5 && t_ajc <= 1e-5,
        format!("trace distance to |0,down> {t_jc:.2e}, to |0,up> {t_ajc:.2e}"),
    );
}

fn parity_blocks(rep: &mut Report) {
    let n = 25;
    let u = parity_operator(&arm_space(n).unwrap()).unwrap();
    let points = [(0.5, 0.5), (0.5, 1.0), (0.5, 2.0), (0.75, 1.0), (1.0, 2.0), (0.5, 1.6)];
    let mut worst_off: f64 = 0.0;
    let mut weakest_within = f64::INFINITY;
    for (l1, ratio) in points {
        let rho = arm_steady_state(&rabi(l1, l1 * ratio, 0.1), n).unwrap();
        worst_off = worst_off.max(parity_decompose(&rho, &u).unwrap().off_block_norm);
        weakest_within = weakest_within.min(max_within_parity_coherence(&rho, &u).unwrap());
    }
    rep.check(
        "parity block structure",
        worst_off <= 1e-6 && weakest_within > 1e-3,
        format!("{} points: max cross-parity coherence {worst_off:.2e}, smallest within-parity maximum {weakest_within:.3e}", points.len()),
    );
}

fn super_poisson(rep: &mut Report, s: &Shipped) {
    let r = &s.result;
    let (x, l, ex) = (col(r, "ratio"), col(r, "lambda1"), col(r, "excess"));
    let all_positive = r.rows.len() == 9 && r.rows.iter().all(|row| row.status == Status::Ok && row.values[ex] > 0.0);
    let mut by_l1: BTreeMap<u64, Vec<(f64, f64)>> = BTreeMap::new();
    for row in &r.rows {
        by_l1.entry(row.values[l].to_bits()).or_default().push((row.values[x], row.values[ex]));
    }
    let increasing = by_l1.values().all(|v| {
        let mut v = v.clone();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        v.windows(2).all(|w| w[1].1 > w[0].1)
    });
    let min = r.rows.iter().map(|row| row.values[ex]).fold(f64::INFINITY, f64::min);
    rep.check(
        "super-Poissonian statistics",
        all_positive && increasing,
        format!("Var(n) - <n> > 0 at {} points (smallest {min:.4}), increasing in the ratio at each lambda1: {increasing}", r.rows.len()),
    );
}

fn ground_state_field(g: f64, n: usize) -> DensityMatrix {
    let h = build_rabi_hamiltonian(1.0, 1.0, g, n).unwrap();
    let (_, vecs) = h.eigh().unwrap();
    let psi = KetState::new((0..vecs.nrows()).map(|i| vecs[(i, 0)]).collect()).unwrap();
    psi.to_density().trace_out_second(n + 1, 2).unwrap()
}

fn wigner_checks(rep: &mut Report, s: &Shipped) {
    let vac = KetState::basis(11, 0).unwrap().to_density();
    let one = KetState::basis(11, 1).unwrap().to_density();
    let spot = (wigner_point(&vac, C64::new(0.0, 0.0)) - 2.0 / PI).abs()
        .max((wigner_point(&one, C64::new(0.0, 0.0)) + 2.0 / PI).abs());

    let r = &s.result;
    let w = col(r, "w");
    let min_w = r.rows.iter().map(|row| row.values[w]).fold(f64::INFINITY, f64::min);

    let n = 25;
    let rho = arm_steady_state(&rabi(1.0, 2.0, 0.1), n).unwrap();
    let ax = Axis::new(-4.0, 4.0, 81).unwrap();
    let lobes = wigner_maxima(&wigner(&rho.trace_out_second(n + 1, 2).unwrap(), ax, ax));

    // closed system at g = 1: two lobes at sqrt(g^2/omega^2 - Omega^2/(16 g^2))
    let g: f64 = 1.0;
    let want = (g * g - 1.0 / (16.0 * g * g)).sqrt();
    let ax = Axis::new(-3.0, 3.0, 121).unwrap();
    let closed = wigner_maxima(&wigner(&ground_state_field(g, 40), ax, ax));
    let outer: Vec<f64> = closed.iter().take(2).map(|m| m.alpha.norm()).collect();
    let closed_ok = outer.len() == 2 && outer.iter().all(|x| (x - want).abs() <= 0.1 * want);
    // not graded: the mean-field position is approached deeper in the superradiant phase
    let deeper: Vec<String> = [1.5f64, 2.0]
        .iter()
        .map(|&g| {
            let lobe = wigner_maxima(&wigner(&ground_state_field(g, 40), ax, ax)).first().map_or(f64::NAN, |m| m.alpha.norm());
            format!("g = {g}: {lobe:.4} against {:.4}", (g * g - 1.0 / (16.0 * g * g)).sqrt())
        })
        .collect();
    rep.check(
        "Wigner function",
        spot <= 1e-8 && min_w >= -1e-3 && lobes.len() == 2 && closed_ok,
        format!(
            "spot values off by {spot:.1e}, panel minimum {min_w:.2e}, lobes at ratio 2 and lambda1 = 1: {}, closed-system lobes at |alpha| = {:?} against {want:.4} ({})",
            lobes.len(),
            outer.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>(),
            deeper.join(", ")
        ),
    );
}

/// First stability boundary along the ray lambda2 = ratio * lambda1; the
/// stable region need not be convex, so scan before bisecting.
fn critical_lambda(ratio: f64, gamma: f64) -> f64 {
    let zeta = |l: f64| stability_zeta(&rabi(l, ratio * l, gamma)).unwrap().zeta;
    let mut lo = 1e-3;
    assert!(zeta(lo) < 0.0);
    let mut hi = lo + 0.01;
    while zeta(hi) < 0.0 {
        lo = hi;
        hi += 0.01;
        assert!(hi < 10.0, "no boundary along ratio {ratio}");
    }
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if zeta(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn dicke_stability(rep: &mut Report, s: &Shipped) {
    let mut worst: f64 = 0.0;
    for gamma in [0.1, 0.4, 1.0] {
        let l = critical_lambda(1.0, gamma);
        worst = worst.max((1.0 + gamma * gamma - 4.0 * l * l).abs());
    }
    let mut rng = rand::rngs::StdRng::seed_from_u64(7);
    let mut agree = 0;
    for _ in 0..100 {
        let w = rng.gen_range(0.5..2.0);
        let p = RabiParams::new(w, w, rng.gen_range(0.0..1.5), rng.gen_range(0.0..1.5), rng.gen_range(0.01..1.0))
            .unwrap();
        let zeta = stability_zeta(&p).unwrap().zeta;
        let top = chi_generators(&p).n.eigenvalues().unwrap().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        if (zeta < 0.0) == (top < 0.0) {
            agree += 1;
        }
    }
    // sweep map: on the lambda1 = lambda2 line the stable -> unstable step brackets the boundary.
    // lambda1 = 0 is marginal since the second mode is undamped there.
    let r = &s.result;
    let (x, g, l, st) = (col(r, "ratio"), col(r, "gamma"), col(r, "lambda1"), col(r, "stable"));
    let mut cells = 0;
    let mut bracketed = 0;
    let line: Vec<_> = r.rows.iter().filter(|row| row.values[x] == 1.0 && row.values[g] > 0.0).collect();
    for chunk in line.chunk_by(|a, b| a.values[g] == b.values[g]) {
        let gamma = chunk[0].values[g];
        let lc = (1.0 + gamma * gamma).sqrt() / 2.0;
        if let Some(k) = chunk.windows(2).position(|w| w[0].values[st] == 1.0 && w[1].values[st] == 0.0) {
            cells += 1;
            if chunk[k].values[l] < lc && lc <= chunk[k + 1].values[l] {
                bracketed += 1;
            }
        }
    }
    rep.check(
        "Dicke stability",
        worst <= 1e-9 && agree == 100 && cells > 0 && bracketed == cells,
        format!("boundary residual |omega^2 + gamma^2 - 4 lambda^2| = {worst:.1e}, sign agreement {agree}/100, map boundary within one cell for {bracketed}/{cells} gamma values"),
    );
}

fn gaussian_fock(rep: &mut Report) {
    let p = rabi(0.05, 0.025, 0.1);
    let n = 6;
    let spec = HilbertSpec::two_boson(n, n).unwrap();
    let a = embed(&spec, &[(0, &annihilation(n).unwrap())]).unwrap();
    let b = embed(&spec, &[(1, &annihilation(n).unwrap())]).unwrap();
    let rho = steady_state_null(&build_nad_hamiltonian(&p, n, n).unwrap(), &nad_loss(p.gamma, n, n).unwrap())
        .unwrap()
        .rho_ss;
    let g = steady_covariance(&p).unwrap().mode_moments();
    let d_a = (rho.expect(&a.adjoint().matmul(&a)).re - g.n_a).abs();
    let d_b = (rho.expect(&b.adjoint().matmul(&b)).re - g.n_b).abs();
    let d_ab = (rho.expect(&a.matmul(&b)).re - g.ab.re).abs();
    rep.check(
        "Gaussian against Fock steady state",
        d_a.max(d_b).max(d_ab) <= 1e-3,
        format!("|diff| <a^dag a> {d_a:.1e}, <b^dag b> {d_b:.1e}, Re<ab> {d_ab:.1e} (values {:.3e}, {:.3e}, {:.3e})", g.n_a, g.n_b, g.ab.re),
    );
}

fn critical_growth(rep: &mut Report) {
    let mut ok = true;
    let mut details = Vec::new();
    for gamma in [0.1, 0.5] {
        for ratio in [0.5, 1.0, 2.0] {
            let lc = critical_lambda(ratio, gamma);
            let e: Vec<f64> = (1..=40)
                .map(|k| {
                    let l = 0.999 * lc * k as f64 / 40.0;
                    log_negativity_gaussian(&steady_covariance(&rabi(l, ratio * l, gamma)).unwrap()).unwrap()
                })
                .collect();
            let monotone = e.windows(2).all(|w| w[1] >= w[0] - 1e-12) && e[39] > e[0];
            ok &= monotone;
            details.push(format!("gamma {gamma} ratio {ratio}: {:.3} -> {:.3}", e[0], e[39]));
        }
    }
    rep.check("entanglement grows toward the critical point", ok, details.join("; "));
}

fn feedback_blocking(rep: &mut Report) {
    let g0 = effective_gamma(0.1, -1.0, 1.0).unwrap();
    let p = rabi(0.05, 0.05, 0.1);
    let tr = CascadeTruncation { n_a: 4, n_b: 4, n_c: 2 };
    let f = FeedbackParams::new(-1.0, 1.0, 100.0 * p.gamma, 1.0).unwrap();
    let psi = noon_state(2, 4, 4).unwrap().to_density();
    let times: Vec<f64> = (1..=10).map(|k| 2.0 * k as f64).collect();
    let joint = cascade_master_equation(&p, &f, tr).unwrap();
    let w = evolve_sampled(&with_empty_driven_cavity(&psi, tr).unwrap(), &joint, &times, IntegratorOptions::default())
        .unwrap();
    let eff = effective_master_equation(&p, effective_gamma(p.gamma, f.mu, f.eta).unwrap(), 4, 4).unwrap();
    let r = evolve_sampled(&psi, &eff, &times, IntegratorOptions::default()).unwrap();
    let worst = w
        .iter()
        .zip(&r)
        .map(|(wk, rk)| source_state(wk, tr).unwrap().trace_distance(rk).unwrap())
        .fold(0.0, f64::max);
    rep.check(
        "feedback blocks the loss",
        g0 == 0.0 && worst <= 0.05,
        format!("gamma_eff(mu = -1, eta = 1) = {g0}, cascade against effective model over t <= 20: max trace distance {worst:.4}"),
    );
}

fn rwa_fidelities(rep: &mut Report) {
    let l = 0.05;
    let times: Vec<f64> = (0..=800).map(|k| 0.25 * k as f64).collect();
    let flat = [1, 2].iter().all(|&n| times.iter().all(|&t| rwa_noon_fidelity(n, t, 1.0, l).unwrap() == 1.0));
    let min3 = times.iter().map(|&t| rwa_noon_fidelity(3, t, 1.0, l).unwrap()).fold(f64::INFINITY, f64::min);
    let t4 = PI / (4.0 * l);
    let phi4 = rwa_noon_fidelity(4, t4, 1.0, l).unwrap();
    // the closed forms against exact evolution without counter-rotating terms
    let rwa = rabi(l, 0.0, 0.0);
    let exact_gap = (1..=4).map(|n| rwa_error_check(n, &rwa, &times, 6).unwrap()).fold(0.0, f64::max);
    let phi4_exact = phi4 + rwa_error_check(4, &rwa, &[t4], 6).unwrap();
    let full = rabi(l, l, 0.0);
    let d1 = rwa_error_check(1, &full, &times, 6).unwrap();
    let d2 = rwa_error_check(2, &full, &times, 6).unwrap();
    rep.check(
        "rotating-wave NOON fidelities",
        flat && (min3 - 0.5).abs() <= 0.02 && phi4_exact <= 0.05 && exact_gap <= 1e-8 && d1 <= 0.0045 && d2 <= 0.006,
        format!("N = 1, 2 constant: {flat}; min N = 3: {min3:.4}; N = 4 at 2 lambda1 t = pi/2: {phi4_exact:.1e}; closed forms vs exact RWA {exact_gap:.1e}; RWA vs full model: N = 1 {d1:.4}, N = 2 {d2:.4}"),
    );
}

fn lambert_w(x: C64, k: i32) -> C64 {
    let l1 = x.ln() + c(0.0, 2.0 * PI * k as f64);
    let mut w = if k == 0 { c(0.5, 0.0) } else { l1 - l1.ln() };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let step = f / (ew * (w + 1.0) - (w + 2.0) * f / (w * 2.0 + 2.0));
        w -= step;
        if step.norm() < 1e-16 * w.norm().max(1.0) {
            break;
        }
    }
    w
}

fn delay_checks(rep: &mut Report, stability: &Shipped, short: &Shipped, long: &Shipped) {
    let mut eig_gap: f64 = 0.0;
    for ratio in [0.0, 1.0, 2.0] {
        let p = rabi(0.1, 0.1 * ratio, 0.1);
        let d = langevin_matrices(&p, 0.0).unwrap();
        let scan = secular_roots(&d.system(), RootWindow::default_for(&p, 0.0), RootGrid::default()).unwrap();
        let eigs = d.a.eigenvalues().unwrap();
        eig_gap = eig_gap.max(if scan.roots.len() == eigs.len() { 0.0 } else { f64::INFINITY });
        for z in &eigs {
            eig_gap = eig_gap.max(scan.roots.iter().map(|r| (r - z).norm()).fold(f64::INFINITY, f64::min));
        }
    }
    let mut lw_gap: f64 = 0.0;
    for (a, b, tau) in [(0.3, 0.5, 1.0), (0.1, 0.4, 2.5), (1.0, 2.0, 0.7)] {
        let sys = DelaySystem {
            a0: CMatrix::from_vec(1, 1, vec![re(-a - b)]).unwrap(),
            a1: CMatrix::from_vec(1, 1, vec![re(b)]).unwrap(),
            tau,
        };
        let im = 12.0 * PI / tau;
        let window = RootWindow { re_min: -6.0, re_max: 1.0, im_min: -im, im_max: im };
        let scan = secular_roots(&sys, window, RootGrid::default()).unwrap();
        let x = re(b * tau * ((a + b) * tau).exp());
        let expected: Vec<C64> =
            (-40..=40).map(|k| lambert_w(x, k) / tau - (a + b)).filter(|z| window.contains(*z)).collect();
        if expected.len() != scan.roots.len() {
            lw_gap = f64::INFINITY;
        }
        for z in &expected {
            lw_gap = lw_gap.max(scan.roots.iter().map(|r| (r - z).norm()).fold(f64::INFINITY, f64::min));
        }
    }
    let r = &stability.result;
    let m = col(r, "max_re");
    let top = r.rows.iter().map(|row| row.values[m]).fold(f64::NEG_INFINITY, f64::max);
    let stable = r.rows.iter().all(|row| row.status == Status::Ok) && top < 0.0;

    let ratio2 = |s: &Shipped| -> Vec<(f64, f64, f64, Status)> {
        let r = &s.result;
        let (x, t, e, b) = (col(r, "ratio"), col(r, "tau"), col(r, "log_negativity"), col(r, "baseline"));
        r.rows
            .iter()
            .filter(|row| row.values[x] == 2.0)
            .map(|row| (row.values[t], row.values[e], row.values[b], row.status))
            .collect()
    };
    let short2 = ratio2(short);
    let gain = short2.iter().filter(|(_, e, b, st)| *st == Status::Ok && *e > b + 1e-9).map(|(t, e, b, _)| (*t, e - b)).collect::<Vec<_>>();
    let unphysical: Vec<f64> = short2
        .iter()
        .chain(ratio2(long).iter())
        .filter(|row| row.3 == Status::Unphysical && row.1.is_nan())
        .map(|row| row.0)
        .collect();
    rep.check(
        "delayed feedback",
        eig_gap <= 1e-10 && lw_gap <= 1e-8 && stable && !gain.is_empty() && !unphysical.is_empty(),
        format!(
            "zero-delay roots vs eig(A) {eig_gap:.1e}; Lambert W roots {lw_gap:.1e}; max Re root over tau in [0, 30] {top:.4}; gain over no feedback at ratio 2: {:?}; unphysical delays flagged at ratio 2 from tau = {:?}",
            gain.iter().map(|(t, d)| format!("tau {t}: +{d:.4}")).collect::<Vec<_>>(),
            unphysical.iter().cloned().fold(f64::INFINITY, f64::min)
        ),
    );
}

fn main() {
    let mut rep = Report { failed: 0 };
    let mut files: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    let mut shipped: BTreeMap<String, Shipped> = BTreeMap::new();
    for f in &files {
        let cfg = validate_config(f).unwrap_or_else(|e| panic!("{}: {e}", f.display()));
        let start = Instant::now();
        let result = run(&cfg, 1);
        let elapsed = start.elapsed();
        let csv = result.to_csv();
        shipped.insert(f.file_stem().unwrap().to_string_lossy().into_owned(), Shipped { result, csv, elapsed });
    }

    peak(&mut rep, &shipped["rabi_entanglement"]);
    jc_limits(&mut rep);
    parity_blocks(&mut rep);
    super_poisson(&mut rep, &shipped["rabi_photon_dist"]);
    wigner_checks(&mut rep, &shipped["rabi_wigner"]);
    dicke_stability(&mut rep, &shipped["dicke_stability"]);
    gaussian_fock(&mut rep);
    critical_growth(&mut rep);
    feedback_blocking(&mut rep);
    rwa_fidelities(&mut rep);
    delay_checks(
        &mut rep,
        &shipped["delay_stability"],
        &shipped["delay_entanglement_short"],
        &shipped["delay_entanglement"],
    );

    let mut differing = Vec::new();
    for f in &files {
        let name = f.file_stem().unwrap().to_string_lossy().into_owned();
        let again = run(&validate_config(f).unwrap(), 3).to_csv();
        if again != shipped[&name].csv {
            differing.push(name);
        }
    }
    rep.check(
        "deterministic output",
        differing.is_empty(),
        format!("{} shipped configs, 1 vs 3 workers, differing: {differing:?}", files.len()),
    );

    if rep.failed > 0 {
        println!("{} criteria failed", rep.failed);
        std::process::exit(1);
    }
    println!("all criteria passed");
}
