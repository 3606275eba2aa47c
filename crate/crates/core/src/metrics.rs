//! Figures of merit on states and outcome distributions.

use crate::error::{Error, Result};
use crate::hamiltonian::{build_h_problem, diagonalize};
use crate::problem::SpinProblem;
use crate::state::StateVector;

/// Computational-basis outcome probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Distribution {
    n: usize,
    probabilities: Vec<f64>,
}

impl Distribution {
    /// Entries down to `−1e−12` are clamped to zero; the sum must be within
    /// `1e−9` of one and is then normalized exactly.
    pub fn new(n: usize, mut probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.len() != 1 << n {
            return Err(Error::DimensionMismatch {
                expected: 1 << n,
                found: probabilities.len(),
            });
        }
        for (k, p) in probabilities.iter_mut().enumerate() {
            if !p.is_finite() || *p < -1e-12 {
                return Err(Error::InvalidDistribution(format!("entry {k} is {p}")));
            }
            *p = p.max(0.0);
        }
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("entries sum to {sum}")));
        }
        probabilities.iter_mut().for_each(|p| *p /= sum);
        Ok(Distribution { n, probabilities })
    }

    /// `|ψ_k|²` of a normalized state.
    pub fn from_state(psi: &StateVector) -> Result<Self> {
        Distribution::new(psi.n(), psi.probabilities())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    fn check_same(&self, other: &Distribution) -> Result<()> {
        if self.probabilities.len() != other.probabilities.len() {
            return Err(Error::DimensionMismatch {
                expected: self.probabilities.len(),
                found: other.probabilities.len(),
            });
        }
        Ok(())
    }
}

/// `|⟨ψ1|ψ2⟩|²` for normalized states.
pub fn fidelity_pure(a: &StateVector, b: &StateVector) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().clamp(0.0, 1.0))
}

/// Squared Bhattacharyya coefficient `|Σ_k √(P_ideal,k · P_k)|²`.
pub fn success_measure(ideal: &Distribution, p: &Distribution) -> Result<f64> {
    ideal.check_same(p)?;
    let bc: f64 = ideal
        .probabilities
        .iter()
        .zip(&p.probabilities)
        .map(|(a, b)| (a * b).sqrt())
        .sum();
    Ok((bc * bc).clamp(0.0, 1.0))
}

/// Success measure of the outcome distributions of two states.
pub fn success_measure_states(ideal: &StateVector, psi: &StateVector) -> Result<f64> {
    success_measure(
        &Distribution::from_state(ideal)?,
        &Distribution::from_state(psi)?,
    )
}

/// Kink-count statistics of a distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct KinkProfile {
    /// Probability of exactly `k` kinks, `k = 0..n−1`.
    pub likelihood: Vec<f64>,
    pub expected_kinks: f64,
}

/// A bond is a kink when its bits differ on a ferromagnetic bond
/// (`J_zz > 0`) or agree on an antiferromagnetic one (`J_zz < 0`).
pub fn kink_profile(dist: &Distribution, p: &SpinProblem) -> Result<KinkProfile> {
    if dist.n != p.n {
        return Err(Error::DimensionMismatch {
            expected: 1 << p.n,
            found: dist.probabilities.len(),
        });
    }
    if let Some(bond) = p.j_zz.iter().position(|&j| j == 0.0) {
        return Err(Error::UndefinedKink { bond });
    }
    // Bits of `k ^ (k >> 1)` mark differing neighbours; antiferro bonds flip
    // the meaning.
    let anti_mask: usize = p
        .j_zz
        .iter()
        .enumerate()
        .filter(|(_, &j)| j < 0.0)
        .map(|(b, _)| 1usize << b)
        .sum();
    let bond_mask = (1usize << p.bonds()) - 1;
    let mut likelihood = vec![0.0; p.n];
    for (k, &prob) in dist.probabilities.iter().enumerate() {
        let kinks = ((k ^ (k >> 1) ^ anti_mask) & bond_mask).count_ones() as usize;
        likelihood[kinks] += prob;
    }
    let expected_kinks = likelihood
        .iter()
        .enumerate()
        .map(|(k, p)| k as f64 * p)
        .sum();
    Ok(KinkProfile {
        likelihood,
        expected_kinks,
    })
}

/// `⟨ψ|H_P|ψ⟩ − E_0`, clamped to zero for round-off down to `−1e−9`.
pub fn residual_energy(psi: &StateVector, p: &SpinProblem) -> Result<f64> {
    let h = build_h_problem(p)?;
    let e0 = diagonalize(&h, false)?.ground_energy();
    let r = h.expectation(psi)? - e0;
    Ok(if (-1e-9..0.0).contains(&r) { 0.0 } else { r })
}

fn check_site(i: usize, n: usize) -> Result<()> {
    if i >= n {
        Err(Error::IndexOutOfRange { index: i, n })
    } else {
        Ok(())
    }
}

fn z_sign(k: usize, q: usize) -> f64 {
    if k >> q & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `⟨σ_z^i⟩`.
pub fn magnetization(psi: &StateVector, i: usize) -> Result<f64> {
    check_site(i, psi.n())?;
    Ok(psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| z_sign(k, i) * a.norm_sqr())
        .sum())
}

/// `⟨σ_z^i σ_z^{i+d}⟩`.
pub fn parity_correlation(psi: &StateVector, i: usize, d: usize) -> Result<f64> {
    check_site(i + d, psi.n())?;
    Ok(psi
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| z_sign(k, i) * z_sign(k, i + d) * a.norm_sqr())
        .sum())
}

pub fn uniform_baseline(n: usize) -> Distribution {
    let dim = 1usize << n;
    Distribution {
        n,
        probabilities: vec![1.0 / dim as f64; dim],
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    /// Decay exponent: `E ∝ T^{−η}`.
    pub eta: f64,
    pub amplitude: f64,
    pub window: (f64, f64),
    pub points_used: usize,
}

/// Least-squares line through `(ln T, ln E)` for the points with
/// `T ∈ [lo, hi]`. Points with `T ≤ 0` have no logarithm and are skipped.
pub fn fit_power_law(points: &[(f64, f64)], window: (f64, f64)) -> Result<PowerLawFit> {
    if points.len() < 4 {
        return Err(Error::Fit(format!(
            "need at least 4 points, got {}",
            points.len()
        )));
    }
    let (lo, hi) = window;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(t, e) in points {
        if t < lo || t > hi || t <= 0.0 {
            continue;
        }
        if !(e > 0.0) {
            return Err(Error::Fit(format!("nonpositive value {e} at T = {t}")));
        }
        xs.push(t.ln());
        ys.push(e.ln());
    }
    if xs.len() < 2 {
        return Err(Error::Fit(format!(
            "window [{lo}, {hi}] contains {} usable point(s)",
            xs.len()
        )));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(PowerLawFit {
        eta: -slope,
        amplitude: (my - slope * mx).exp(),
        window,
        points_used: xs.len(),
    })
}
