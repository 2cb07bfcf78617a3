use crate::state::DensityMatrix;

/// Fock-basis statistics of a single-mode state.
#[derive(Clone, Debug, PartialEq)]
pub struct PhotonStatistics {
    /// P(n)
    pub distribution: Vec<f64>,
    /// |P(n, n+1)|
    pub coherence_1: Vec<f64>,
    /// |P(n, n+2)|
    pub coherence_2: Vec<f64>,
    pub mean: f64,
    pub variance: f64,
    /// variance - mean; positive for super-Poissonian light
    pub excess: f64,
}

pub fn photon_statistics(rho_field: &DensityMatrix) -> PhotonStatistics {
    let m = rho_field.matrix();
    let n = rho_field.dim();
    let distribution: Vec<f64> = (0..n).map(|k| m[(k, k)].re).collect();
    let coherence_1 = (0..n.saturating_sub(1)).map(|k| m[(k, k + 1)].norm()).collect();
    let coherence_2 = (0..n.saturating_sub(2)).map(|k| m[(k, k + 2)].norm()).collect();
    let mean: f64 = distribution.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    let second: f64 = distribution.iter().enumerate().map(|(k, p)| (k * k) as f64 * p).sum();
    let variance = second - mean * mean;
    PhotonStatistics { distribution, coherence_1, coherence_2, mean, variance, excess: variance - mean }
}
