use nesslab::feedback::{fidelity_trajectory, noon_state, entangled_coherent_state};
use nesslab::delay::{delayed_negativity, SpectralOptions};
use nesslab::models::RabiParams;
use nesslab::matrix::c;
fn main() {
    let p = RabiParams::new(1.0, 1.0, 0.05, 0.05, 0.0).unwrap();
    let times: Vec<f64> = (0..=200).map(|k| k as f64).collect();
    for n in [6usize] {
        let t = std::time::Instant::now();
        let f = fidelity_trajectory(&noon_state(4, n, n).unwrap(), &p, 0.01, &times, n, n).unwrap();
        println!("noon {n} {:?} {:?} {:?}", f.fidelity[100], f.classical_crossing, t.elapsed());
    }
    for n in [12usize] {
        let t = std::time::Instant::now();
        let f = fidelity_trajectory(&entangled_coherent_state(c(1.0, 0.0), n, n).unwrap(), &p, 0.01, &times, n, n).unwrap();
        println!("ecs {n} {:?} {:?} {:?}", f.fidelity[100], f.classical_crossing, t.elapsed());
    }
    let p = RabiParams::new(1.0, 1.0, 0.1, 0.2, 0.1).unwrap();
    for tau in [0.0, 0.05, 1.0, 10.0, 30.0] {
        let t = std::time::Instant::now();
        let r = delayed_negativity(&p, tau, &SpectralOptions::default()).unwrap();
        println!("tau {tau} {:?} {:?}", r.negativity, t.elapsed());
    }
}
