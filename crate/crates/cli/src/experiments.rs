//! Grid expansion and the per-point computations of each experiment.

use nesslab::delay::{
    delayed_negativity, langevin_matrices, secular_roots, NoiseModel, RootGrid, RootWindow, SpectralOptions,
};
use nesslab::feedback::{entangled_coherent_state, fidelity_trajectory, noon_state};
use nesslab::gaussian::{log_negativity_gaussian, stability_zeta, steady_covariance};
use nesslab::lindblad::{arm_steady_state, field_tail_mass};
use nesslab::matrix::c;
use nesslab::measures::wigner::Axis;
use nesslab::measures::{
    log_negativity_discrete, max_within_parity_coherence, parity_decompose, photon_statistics, wigner, Subsystem,
};
use nesslab::models::{arm_space, RabiParams};
use nesslab::operators::parity_operator;
use nesslab::{DensityMatrix, Error};
use rayon::prelude::*;

use crate::config::{Experiment, SweepConfig};
use crate::output::{Column, Row, Status, SweepResult};

/// Outer axes run slowest first in this order.
const AXIS_ORDER: [&str; 11] =
    ["ratio", "lambda2", "gamma", "gamma_eff", "lambda1", "omega", "big_omega", "order", "alpha", "tau", "time"];

fn axis_unit(name: &str) -> &'static str {
    match name {
        "ratio" | "order" | "alpha" | "re" | "im" => "",
        "tau" | "time" => "1/omega",
        _ => "omega",
    }
}

/// The outer grid: axis names and every point, first axis slowest.
#[derive(Clone, Debug, PartialEq)]
pub struct Plan {
    pub axes: Vec<String>,
    pub points: Vec<Vec<f64>>,
}

pub fn plan(cfg: &SweepConfig) -> Plan {
    let inner = cfg.experiment.schema().inner;
    let mut axes: Vec<String> = AXIS_ORDER
        .iter()
        .filter(|a| cfg.grid.contains_key(**a) && !inner.contains(*a))
        .map(|a| a.to_string())
        .collect();
    // anything not in the fixed order goes last, alphabetically
    for k in cfg.grid.keys() {
        if !axes.contains(k) && !inner.contains(&k.as_str()) {
            axes.push(k.clone());
        }
    }
    let mut points = vec![Vec::new()];
    for a in &axes {
        let values = cfg.grid[a].points();
        points = points
            .into_iter()
            .flat_map(|p| {
                values.iter().map(move |x| {
                    let mut q = p.clone();
                    q.push(*x);
                    q
                })
            })
            .collect();
    }
    Plan { axes, points }
}

/// Number of rows the sweep produces.
pub fn row_count(cfg: &SweepConfig) -> usize {
    cfg.grid.values().map(|a| a.count()).product()
}

struct Point<'a> {
    cfg: &'a SweepConfig,
    axes: &'a [String],
    coords: &'a [f64],
}

impl Point<'_> {
    fn get(&self, key: &str) -> Option<f64> {
        self.axes.iter().position(|a| a == key).map(|i| self.coords[i]).or_else(|| self.cfg.params.get(key).copied())
    }

    fn rabi(&self) -> Result<RabiParams, Error> {
        let need = |k: &str| self.get(k).ok_or_else(|| Error::InvalidParameter(format!("`{k}` is not set")));
        let lambda1 = need("lambda1")?;
        let lambda2 = match self.get("ratio") {
            Some(r) => r * lambda1,
            None => need("lambda2")?,
        };
        let gamma = self.get("gamma").unwrap_or(0.0);
        RabiParams::new(need("omega")?, need("big_omega")?, lambda1, lambda2, gamma)
    }
}

fn n_max(cfg: &SweepConfig) -> usize {
    cfg.truncation["n_max"]
}

fn inner_axis(cfg: &SweepConfig, name: &str) -> Vec<f64> {
    cfg.grid[name].points()
}

/// Result columns after the axis columns.
pub fn value_columns(cfg: &SweepConfig) -> Vec<Column> {
    let v = |n: &str, u: &'static str| Column::value(n, u);
    match cfg.experiment {
        Experiment::RabiEntanglement => vec![
            v("log_negativity", "log2"),
            v("log_negativity_check", "log2"),
            v("truncation_delta", "log2"),
            v("converged", "0/1"),
            v("tail_mass", ""),
        ],
        Experiment::RabiPhotonDist => {
            let mut cols: Vec<Column> = (0..=cfg.truncation["photons"]).map(|k| v(&format!("p{k}"), "")).collect();
            cols.extend([v("mean", "photons"), v("variance", "photons^2"), v("excess", "photons"), v("tail_mass", "")]);
            cols
        }
        Experiment::RabiCoherences => {
            let k = cfg.truncation["photons"];
            let mut cols = Vec::new();
            for n in 0..=k {
                for m in n + 1..=k {
                    cols.push(v(&format!("abs_p_{n}_{m}"), ""));
                }
            }
            cols.extend([
                v("weight_even", ""),
                v("weight_odd", ""),
                v("off_block_norm", ""),
                v("within_parity_max", ""),
            ]);
            cols
        }
        Experiment::RabiWigner => vec![v("w", ""), v("truncation_warning", "0/1")],
        Experiment::DickeStability => vec![v("zeta", "omega"), v("spectral_zeta", "omega"), v("stable", "0/1")],
        Experiment::DickeEntanglement => vec![
            v("log_negativity", "ln"),
            v("n_a", "photons"),
            v("n_b", "photons"),
            v("re_ab", ""),
            v("im_ab", ""),
            v("uncertainty_margin", ""),
        ],
        Experiment::FeedbackFidelity => vec![v("fidelity", ""), v("classical_crossing", "1/omega")],
        Experiment::DelayStability => {
            vec![v("max_re", "omega"), v("roots", "count"), v("winding", "count"), v("warning", "0/1")]
        }
        Experiment::DelayEntanglement => vec![
            v("log_negativity", "ln"),
            v("baseline", "ln"),
            v("uncertainty_margin", ""),
            v("max_re", "omega"),
        ],
    }
}

pub fn columns(cfg: &SweepConfig, plan: &Plan) -> Vec<Column> {
    let mut cols: Vec<Column> = plan.axes.iter().map(|a| Column::axis(a, axis_unit(a))).collect();
    for a in cfg.experiment.schema().inner {
        cols.push(Column::axis(a, axis_unit(a)));
    }
    cols.extend(value_columns(cfg));
    cols
}

fn status_of(e: &Error) -> Status {
    match e {
        Error::Unstable { .. } => Status::Unstable,
        Error::Timeout { .. } => Status::Timeout,
        _ => Status::Failed,
    }
}

/// Values of one inner row (without axis columns) or the reason it has none.
type Values = Result<Vec<f64>, (Status, String)>;

fn fail(e: Error) -> (Status, String) {
    (status_of(&e), e.to_string())
}

fn steady_field(p: &RabiParams, n: usize) -> Result<(DensityMatrix, DensityMatrix), Error> {
    let rho = arm_steady_state(p, n)?;
    let field = rho.trace_out_second(n + 1, 2)?;
    Ok((rho, field))
}

fn rabi_entanglement(cfg: &SweepConfig, p: &RabiParams) -> Result<Vec<f64>, Error> {
    let n = n_max(cfg);
    let check = cfg.truncation["check"];
    let value = |n: usize| -> Result<(f64, f64), Error> {
        let rho = arm_steady_state(p, n)?;
        Ok((log_negativity_discrete(&rho, (n + 1, 2), Subsystem::B)?, field_tail_mass(&rho, n)?))
    };
    let (e, tail) = value(n)?;
    let (e_check, _) = value(check)?;
    let delta = (e - e_check).abs();
    let converged = delta <= cfg.tolerances["truncation"];
    Ok(vec![e, e_check, delta, f64::from(u8::from(converged)), tail])
}

fn rabi_photons(cfg: &SweepConfig, p: &RabiParams) -> Result<Vec<f64>, Error> {
    let n = n_max(cfg);
    let (rho, field) = steady_field(p, n)?;
    let s = photon_statistics(&field);
    let mut out: Vec<f64> = s.distribution[..=cfg.truncation["photons"]].to_vec();
    out.extend([s.mean, s.variance, s.excess, field_tail_mass(&rho, n)?]);
    Ok(out)
}

fn rabi_coherences(cfg: &SweepConfig, p: &RabiParams) -> Result<Vec<f64>, Error> {
    let n = n_max(cfg);
    let k = cfg.truncation["photons"];
    let (rho, field) = steady_field(p, n)?;
    let m = field.matrix();
    let mut out = Vec::new();
    for i in 0..=k {
        for j in i + 1..=k {
            out.push(m[(i, j)].norm());
        }
    }
    let u = parity_operator(&arm_space(n)?)?;
    let d = parity_decompose(&rho, &u)?;
    out.extend([d.weight_even, d.weight_odd, d.off_block_norm, max_within_parity_coherence(&rho, &u)?]);
    Ok(out)
}

fn rabi_wigner(cfg: &SweepConfig, p: &RabiParams) -> Result<Vec<Vec<f64>>, Error> {
    let axis = |name: &str| -> Result<Axis, Error> {
        match &cfg.grid[name] {
            crate::config::AxisSpec::Range { start, stop, count } => Axis::new(*start, *stop, *count),
            crate::config::AxisSpec::List { .. } => Err(Error::InvalidArgument(format!("`{name}` must be a range"))),
        }
    };
    let (_, field) = steady_field(p, n_max(cfg))?;
    let w = wigner(&field, axis("re")?, axis("im")?);
    let flag = f64::from(u8::from(w.truncation_warning));
    let mut rows = Vec::new();
    for (m, y) in w.im_axis.iter().enumerate() {
        for (r, x) in w.re_axis.iter().enumerate() {
            rows.push(vec![*y, *x, w.values[m][r], flag]);
        }
    }
    Ok(rows)
}

fn dicke_stability(p: &RabiParams) -> Result<Vec<f64>, Error> {
    let r = stability_zeta(p)?;
    Ok(vec![r.zeta, r.spectral_zeta, f64::from(u8::from(r.stable))])
}

fn dicke_entanglement(p: &RabiParams) -> Values {
    let g = steady_covariance(p).map_err(fail)?;
    let margin = g.uncertainty_margin().map_err(fail)?;
    let e = match log_negativity_gaussian(&g) {
        Ok(e) => e,
        Err(Error::InvalidState(msg)) => return Err((Status::Unphysical, msg)),
        Err(e) => return Err(fail(e)),
    };
    let mm = g.mode_moments();
    Ok(vec![e, mm.n_a, mm.n_b, mm.ab.re, mm.ab.im, margin])
}

fn feedback(cfg: &SweepConfig, pt: &Point, p: &RabiParams) -> Result<Vec<Vec<f64>>, Error> {
    let n = n_max(cfg);
    let psi = if cfg.option("state") == "ecs" {
        entangled_coherent_state(c(pt.get("alpha").unwrap_or(0.0), 0.0), n, n)?
    } else {
        noon_state(pt.get("order").unwrap_or(0.0) as usize, n, n)?
    };
    let gamma_eff = pt.get("gamma_eff").unwrap_or(0.0);
    let times = inner_axis(cfg, "time");
    let traj = fidelity_trajectory(&psi, p, gamma_eff, &times, n, n)?;
    let crossing = traj.classical_crossing.unwrap_or(f64::INFINITY);
    Ok(times.iter().zip(&traj.fidelity).map(|(t, f)| vec![*t, *f, crossing]).collect())
}

fn delay_stability(p: &RabiParams, tau: f64) -> Values {
    let d = langevin_matrices(p, tau).map_err(fail)?;
    let scan = secular_roots(&d.system(), RootWindow::default_for(p, tau), RootGrid::default()).map_err(fail)?;
    let Some(max_re) = scan.max_re else {
        return Err((Status::Failed, scan.warning.unwrap_or_else(|| "no roots in the search window".into())));
    };
    Ok(vec![max_re, scan.roots.len() as f64, scan.winding as f64, f64::from(u8::from(scan.warning.is_some()))])
}

fn delay_entanglement(cfg: &SweepConfig, p: &RabiParams, tau: f64) -> (Vec<f64>, Status, Option<String>) {
    let noise = if cfg.option("noise") == "loop" { NoiseModel::Loop } else { NoiseModel::Input };
    let opts = SpectralOptions { noise, tol: cfg.tolerances["spectral"], ..Default::default() };
    match delayed_negativity(p, tau, &opts) {
        Ok(r) => match r.negativity {
            Some(e) => (vec![e, r.baseline, r.margin, r.max_re], Status::Ok, None),
            None => (
                vec![f64::NAN, r.baseline, r.margin, r.max_re],
                Status::Unphysical,
                Some(format!("covariance violates the uncertainty relation (margin {:e})", r.margin)),
            ),
        },
        Err(e) => (vec![f64::NAN; 4], status_of(&e), Some(e.to_string())),
    }
}

/// All rows of one outer grid point, inner axes expanded.
fn evaluate(cfg: &SweepConfig, axes: &[String], coords: &[f64]) -> Vec<Row> {
    let pt = Point { cfg, axes, coords };
    let width = value_columns(cfg).len();
    let inner = cfg.experiment.schema().inner;
    let inner_len: usize = inner.iter().map(|a| cfg.grid[*a].count()).product();
    let failed_rows = |status: Status, msg: String| -> Vec<Row> {
        // inner coordinates are still reported so the row grid stays complete
        let mut inner_coords = vec![Vec::new()];
        for a in inner {
            let xs = inner_axis(cfg, a);
            inner_coords =
                inner_coords.into_iter().flat_map(|p| xs.iter().map(move |x| [p.clone(), vec![*x]].concat())).collect();
        }
        inner_coords
            .into_iter()
            .map(|ic| {
                let mut values = coords.to_vec();
                values.extend(ic);
                values.extend(std::iter::repeat_n(f64::NAN, width));
                Row { values, status, message: Some(msg.clone()) }
            })
            .collect()
    };
    let ok_row = |vals: Vec<f64>| {
        let mut values = coords.to_vec();
        values.extend(vals);
        Row { values, status: Status::Ok, message: None }
    };
    let p = match pt.rabi() {
        Ok(p) => p,
        Err(e) => return failed_rows(status_of(&e), e.to_string()),
    };
    let single = |r: Values| match r {
        Ok(v) => vec![ok_row(v)],
        Err((s, m)) => failed_rows(s, m),
    };
    let rows = match cfg.experiment {
        Experiment::RabiEntanglement => single(rabi_entanglement(cfg, &p).map_err(fail)),
        Experiment::RabiPhotonDist => single(rabi_photons(cfg, &p).map_err(fail)),
        Experiment::RabiCoherences => single(rabi_coherences(cfg, &p).map_err(fail)),
        Experiment::DickeStability => single(dicke_stability(&p).map_err(fail)),
        Experiment::DickeEntanglement => single(dicke_entanglement(&p)),
        Experiment::DelayStability => single(delay_stability(&p, pt.get("tau").unwrap_or(0.0))),
        Experiment::DelayEntanglement => {
            let (vals, status, message) = delay_entanglement(cfg, &p, pt.get("tau").unwrap_or(0.0));
            let mut values = coords.to_vec();
            values.extend(vals);
            vec![Row { values, status, message }]
        }
        Experiment::RabiWigner => match rabi_wigner(cfg, &p) {
            Ok(rows) => rows.into_iter().map(ok_row).collect(),
            Err(e) => failed_rows(status_of(&e), e.to_string()),
        },
        Experiment::FeedbackFidelity => match feedback(cfg, &pt, &p) {
            Ok(rows) => rows.into_iter().map(ok_row).collect(),
            Err(e) => failed_rows(status_of(&e), e.to_string()),
        },
    };
    debug_assert_eq!(rows.len(), inner_len);
    rows.into_iter().map(guard_nan).collect()
}

/// An ok row may not carry NaN.
fn guard_nan(mut r: Row) -> Row {
    if r.status == Status::Ok && r.values.iter().any(|x| x.is_nan()) {
        r.status = Status::Failed;
        r.message = Some("computation produced NaN".into());
    }
    r
}

/// Runs the sweep on a pool of `workers` threads. Output does not depend on
/// the worker count.
pub fn run(cfg: &SweepConfig, workers: usize) -> SweepResult {
    nesslab::matrix::sequential_decompositions();
    let plan = plan(cfg);
    let columns = columns(cfg, &plan);
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers.max(1)).build().expect("thread pool");
    let chunks: Vec<Vec<Row>> =
        pool.install(|| plan.points.par_iter().map(|coords| evaluate(cfg, &plan.axes, coords)).collect());
    SweepResult { config: cfg.clone(), columns, rows: chunks.into_iter().flatten().collect() }
}
