use std::fmt;

use crate::error::{Error, Result};

/// One tensor factor of a composite Hilbert space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Factor {
    /// Fock space truncated at `n_max` quanta.
    Boson { n_max: usize },
    /// Two-level system, basis (|up>, |down>).
    Qubit,
    /// Spin `two_s / 2`, basis m = S, S-1, ..., -S.
    Spin { two_s: usize },
}

impl Factor {
    pub fn dim(&self) -> usize {
        match *self {
            Factor::Boson { n_max } => n_max + 1,
            Factor::Qubit => 2,
            Factor::Spin { two_s } => two_s + 1,
        }
    }
}

impl fmt::Display for Factor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Factor::Boson { n_max } => write!(f, "boson(n_max={n_max})"),
            Factor::Qubit => write!(f, "qubit"),
            Factor::Spin { two_s } => write!(f, "spin(2S={two_s})"),
        }
    }
}

/// Ordered tensor factors; the first factor is the slowest-varying index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertSpec {
    factors: Vec<Factor>,
}

impl HilbertSpec {
    pub fn new(factors: Vec<Factor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidDimension("empty factor list".into()));
        }
        for f in &factors {
            match *f {
                Factor::Boson { n_max } if n_max < 1 => {
                    return Err(Error::InvalidDimension("boson truncation must be at least 1".into()))
                }
                Factor::Spin { two_s } if two_s < 1 => {
                    return Err(Error::InvalidDimension("spin must be at least 1/2".into()))
                }
                _ => {}
            }
        }
        Ok(Self { factors })
    }

    pub fn boson_qubit(n_max: usize) -> Result<Self> {
        Self::new(vec![Factor::Boson { n_max }, Factor::Qubit])
    }

    pub fn two_boson(n_a: usize, n_b: usize) -> Result<Self> {
        Self::new(vec![Factor::Boson { n_max: n_a }, Factor::Boson { n_max: n_b }])
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(Factor::dim).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.dims().iter().product()
    }

    /// Boson truncations in factor order.
    pub fn truncations(&self) -> Vec<usize> {
        self.factors
            .iter()
            .filter_map(|f| match f {
                Factor::Boson { n_max } => Some(*n_max),
                _ => None,
            })
            .collect()
    }

    /// Split a flat basis index into per-factor indices.
    pub fn unflatten(&self, mut idx: usize) -> Vec<usize> {
        let dims = self.dims();
        let mut out = vec![0; dims.len()];
        for k in (0..dims.len()).rev() {
            out[k] = idx % dims[k];
            idx /= dims[k];
        }
        out
    }

    pub fn flatten(&self, parts: &[usize]) -> usize {
        self.dims().iter().zip(parts).fold(0, |acc, (d, p)| acc * d + p)
    }
}

impl fmt::Display for HilbertSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|x| x.to_string()).collect();
        write!(f, "{}", parts.join(" x "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dims_and_indexing() {
        let s = HilbertSpec::new(vec![Factor::Boson { n_max: 3 }, Factor::Qubit, Factor::Spin { two_s: 2 }]).unwrap();
        assert_eq!(s.dims(), vec![4, 2, 3]);
        assert_eq!(s.total_dim(), 24);
        for i in 0..24 {
            assert_eq!(s.flatten(&s.unflatten(i)), i);
        }
        assert_eq!(s.unflatten(7), vec![1, 0, 1]);
    }

    #[test]
    fn rejects_degenerate_factors() {
        assert!(HilbertSpec::new(vec![]).is_err());
        assert!(HilbertSpec::boson_qubit(0).is_err());
        assert!(HilbertSpec::new(vec![Factor::Spin { two_s: 0 }]).is_err());
    }
}
