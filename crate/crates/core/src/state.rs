//! Normalized complex amplitude vectors over vertices or partition cells.

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Which space a state vector lives in.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Basis {
    /// One amplitude per vertex.
    Full { n: u64 },
    /// One amplitude per cell of an equitable partition, identified by its
    /// cell sizes (marked cell first).
    Reduced { cell_sizes: Vec<u64> },
}

pub const NORM_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct StateVector {
    amps: DVector<Complex64>,
    basis: Basis,
}

impl StateVector {
    /// Wraps an amplitude vector, enforcing unit norm within `1e-9`.
    pub fn new(amps: DVector<Complex64>, basis: Basis) -> Result<StateVector> {
        let expected = match &basis {
            Basis::Full { n } => *n,
            Basis::Reduced { cell_sizes } => cell_sizes.len() as u64,
        };
        if amps.len() as u64 != expected {
            return Err(Error::invalid(format!(
                "amplitude vector has {} entries, basis expects {expected}",
                amps.len()
            )));
        }
        let state = StateVector { amps, basis };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!("state norm {norm} is not within 1e-9 of 1")));
        }
        Ok(state)
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amps
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability of measuring basis index `i`, clamped to [0, 1].
    pub fn probability(&self, i: usize) -> f64 {
        self.amps[i].norm_sqr().clamp(0.0, 1.0)
    }

    pub(crate) fn from_parts_unchecked(amps: DVector<Complex64>, basis: Basis) -> StateVector {
        StateVector { amps, basis }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unnormalized() {
        let amps = DVector::from_element(4, Complex64::new(0.5, 0.0));
        assert!(StateVector::new(amps, Basis::Full { n: 4 }).is_ok());
        let amps = DVector::from_element(4, Complex64::new(0.6, 0.0));
        assert!(StateVector::new(amps, Basis::Full { n: 4 }).is_err());
    }

    #[test]
    fn rejects_dimension_mismatch() {
        let amps = DVector::from_element(3, Complex64::new(0.0, 0.0));
        assert!(StateVector::new(amps, Basis::Full { n: 4 }).is_err());
    }
}
