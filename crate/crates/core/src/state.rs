use num_complex::Complex64;

use crate::error::{Error, Result};

/// Pure state of `n` qubits in the computational basis.
///
/// Bit `i` of an amplitude index is qubit `i`; `|0⟩` is the `σ_z = +1`
/// eigenstate.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn from_amplitudes(n: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: amplitudes.len(),
            });
        }
        Ok(StateVector { n, amplitudes })
    }

    pub fn from_real(n: usize, amplitudes: &[f64]) -> Result<Self> {
        Self::from_amplitudes(
            n,
            amplitudes.iter().map(|&a| Complex64::new(a, 0.0)).collect(),
        )
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 1 << n];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        StateVector { n, amplitudes }
    }

    /// Basis state from a bit string written qubit 0 first, e.g. `"0101"`.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let n = bits.len();
        let mut index = 0usize;
        for (q, c) in bits.chars().enumerate() {
            match c {
                '0' => {}
                '1' => index |= 1 << q,
                _ => return Err(Error::Config(format!("invalid bit string `{bits}`"))),
            }
        }
        Ok(Self::basis(n, index))
    }

    /// `|+⟩^{⊗n}`, the ground state of the initial Hamiltonian.
    pub fn plus(n: usize) -> Self {
        let dim = 1usize << n;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        StateVector {
            n,
            amplitudes: vec![a; dim],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes
            .iter()
            .map(|a| a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            let inv = 1.0 / norm;
            self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        }
    }

    pub fn normalized(mut self) -> Self {
        self.normalize();
        self
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_same_dim(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn check_same_dim(&self, other: &StateVector) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }

    /// Multiplies by the phase that makes the largest-magnitude amplitude
    /// real and positive. Ties go to the lowest index.
    pub fn fix_global_phase(&mut self) {
        let mut best = 0usize;
        let mut best_mag = -1.0;
        for (i, a) in self.amplitudes.iter().enumerate() {
            let m = a.norm_sqr();
            if m > best_mag * (1.0 + 1e-12) {
                best = i;
                best_mag = m;
            }
        }
        let a = self.amplitudes[best];
        if a.norm() > 0.0 {
            let phase = a.conj() / a.norm();
            self.amplitudes.iter_mut().for_each(|x| *x *= phase);
        }
    }

    /// Euclidean distance `‖self − other‖`.
    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        self.check_same_dim(other)?;
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_strings_are_qubit_zero_first() {
        let s = StateVector::from_bits("100").unwrap();
        assert_eq!(s.amplitudes()[1], Complex64::new(1.0, 0.0));
        let s = StateVector::from_bits("001").unwrap();
        assert_eq!(s.amplitudes()[4], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn plus_state_is_normalized() {
        for n in 1..8 {
            assert!((StateVector::plus(n).norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn phase_fix_makes_peak_real() {
        let phase = Complex64::from_polar(1.0, 0.7);
        let mut s = StateVector::from_amplitudes(
            1,
            vec![
                Complex64::new(0.6, 0.0) * phase,
                Complex64::new(0.0, 0.8) * phase,
            ],
        )
        .unwrap();
        s.fix_global_phase();
        assert!((s.amplitudes()[1] - Complex64::new(0.8, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn mismatched_inner_product_fails() {
        let a = StateVector::plus(2);
        let b = StateVector::plus(3);
        assert!(matches!(a.inner(&b), Err(Error::DimensionMismatch { .. })));
    }
}
