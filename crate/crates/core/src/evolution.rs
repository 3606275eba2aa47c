//! Ideal continuous (RK4) and ideal digital (first-order product formula)
//! evolution from `|+⟩^{⊗n}`.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{AnnealingOperator, PauliTerm, PauliTermList, TermKind};
use crate::problem::{Sampling, Schedule, SpinProblem};
use crate::state::StateVector;

/// Largest chain for which [`step_unitary`] builds a dense matrix.
pub const STEP_UNITARY_MAX_SITES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub base_step: f64,
    pub norm_tolerance: f64,
    /// Largest allowed state change under one further step halving.
    pub stability_tolerance: f64,
    pub max_step_halvings: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            base_step: 0.05,
            norm_tolerance: 1e-8,
            stability_tolerance: 1e-7,
            max_step_halvings: 14,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.base_step > 0.0 && self.base_step.is_finite()) {
            return Err(Error::OutOfRange {
                what: "integrator base step",
                value: self.base_step,
            });
        }
        if !(self.norm_tolerance > 0.0) {
            return Err(Error::OutOfRange {
                what: "norm tolerance",
                value: self.norm_tolerance,
            });
        }
        if !(self.stability_tolerance > 0.0) {
            return Err(Error::OutOfRange {
                what: "stability tolerance",
                value: self.stability_tolerance,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvolutionMode {
    Continuous,
    Digital,
    Gates,
}

impl EvolutionMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvolutionMode::Continuous => "continuous",
            EvolutionMode::Digital => "digital",
            EvolutionMode::Gates => "gates",
        }
    }
}

impl fmt::Display for EvolutionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for EvolutionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "continuous" => Ok(EvolutionMode::Continuous),
            "digital" => Ok(EvolutionMode::Digital),
            "gates" | "gate" => Ok(EvolutionMode::Gates),
            other => Err(Error::Config(format!(
                "unknown mode `{other}` (expected continuous, digital or gates)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionResult {
    pub final_state: StateVector,
    /// `(s, state)` checkpoints in increasing `s`.
    pub trajectory: Vec<(f64, StateVector)>,
    pub mode: EvolutionMode,
    pub total_time: f64,
    pub steps: usize,
    pub sampling: Sampling,
    /// RK4 steps used by the accepted continuous run; zero otherwise.
    pub integrator_steps: usize,
}

/// Integrates `i dψ/dt = H(t/T) ψ` from `|+⟩^{⊗n}` over `[0, T]`.
///
/// The fixed RK4 step starts at `cfg.base_step` (shrunk so it divides
/// `T`) and is halved until the final norm is within `norm_tolerance` of one
/// and a further halving moves the state by less than `stability_tolerance`.
/// Checkpoints are the states at the integrator step boundary nearest each
/// requested `s`.
pub fn evolve_continuous(
    p: &SpinProblem,
    sched: &Schedule,
    cfg: &IntegratorConfig,
    checkpoints: &[f64],
) -> Result<EvolutionResult> {
    sched.validate()?;
    cfg.validate()?;
    for &s in checkpoints {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::OutOfRange {
                what: "checkpoint s",
                value: s,
            });
        }
    }
    let op = AnnealingOperator::new(p, sched.b_x_init)?;
    let apply = |s: f64, x: &[Complex64], y: &mut [Complex64]| op.apply(s, x, y);
    let initial = StateVector::plus(p.n);
    let result = |final_state, trajectory, integrator_steps| EvolutionResult {
        final_state,
        trajectory,
        mode: EvolutionMode::Continuous,
        total_time: sched.total_time,
        steps: sched.steps,
        sampling: sched.sampling,
        integrator_steps,
    };

    if sched.total_time == 0.0 {
        let trajectory = checkpoints.iter().map(|&s| (s, initial.clone())).collect();
        return Ok(result(initial, trajectory, 0));
    }

    let base_steps = (sched.total_time / cfg.base_step).ceil().max(1.0) as usize;
    let mut previous = rk4(&apply, &initial, sched.total_time, base_steps, &[])?.0;
    for halving in 1..=cfg.max_step_halvings {
        let steps = base_steps << halving;
        let (current, _) = rk4(&apply, &initial, sched.total_time, steps, &[])?;
        let norm_ok = (current.norm() - 1.0).abs() < cfg.norm_tolerance;
        let stable = current.distance(&previous)? < cfg.stability_tolerance;
        if norm_ok && stable {
            let (mut final_state, trajectory) = if checkpoints.is_empty() {
                (current, Vec::new())
            } else {
                rk4(&apply, &initial, sched.total_time, steps, checkpoints)?
            };
            final_state.normalize();
            return Ok(result(final_state, trajectory, steps));
        }
        previous = current;
    }
    Err(Error::Convergence {
        halvings: cfg.max_step_halvings,
    })
}

/// Fixed-step RK4 for `dψ/dt = −i H(t/T) ψ`; `apply(s, x, y)` sets `y = H(s)x`.
fn rk4<F: Fn(f64, &[Complex64], &mut [Complex64])>(
    apply: &F,
    initial: &StateVector,
    total_time: f64,
    steps: usize,
    checkpoints: &[f64],
) -> Result<(StateVector, Vec<(f64, StateVector)>)> {
    let dim = initial.dim();
    let h = total_time / steps as f64;
    let zero = Complex64::new(0.0, 0.0);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut psi = initial.amplitudes().to_vec();
    let (mut k1, mut k2, mut k3, mut k4) = (
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
        vec![zero; dim],
    );
    let mut tmp = vec![zero; dim];

    // Integrator step index nearest each checkpoint.
    let targets: Vec<usize> = checkpoints
        .iter()
        .map(|&s| (s * steps as f64).round() as usize)
        .collect();
    let mut trajectory: Vec<(f64, StateVector)> = Vec::with_capacity(checkpoints.len());
    let record = |step: usize, amps: &[Complex64], out: &mut Vec<(f64, StateVector)>| {
        for (&target, &s) in targets.iter().zip(checkpoints) {
            if target == step {
                let state = StateVector::from_amplitudes(initial.n(), amps.to_vec())
                    .expect("dimension preserved")
                    .normalized();
                out.push((s, state));
            }
        }
    };
    record(0, &psi, &mut trajectory);

    for step in 0..steps {
        let t = step as f64 * h;
        let s0 = t / total_time;
        let s_half = (t + 0.5 * h) / total_time;
        let s1 = ((t + h) / total_time).min(1.0);

        apply(s0, &psi, &mut k1);
        k1.iter_mut().for_each(|x| *x *= minus_i);
        for i in 0..dim {
            tmp[i] = psi[i] + k1[i] * (0.5 * h);
        }
        apply(s_half, &tmp, &mut k2);
        k2.iter_mut().for_each(|x| *x *= minus_i);
        for i in 0..dim {
            tmp[i] = psi[i] + k2[i] * (0.5 * h);
        }
        apply(s_half, &tmp, &mut k3);
        k3.iter_mut().for_each(|x| *x *= minus_i);
        for i in 0..dim {
            tmp[i] = psi[i] + k3[i] * h;
        }
        apply(s1, &tmp, &mut k4);
        k4.iter_mut().for_each(|x| *x *= minus_i);
        for i in 0..dim {
            psi[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
        record(step + 1, &psi, &mut trajectory);
    }
    trajectory.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok((StateVector::from_amplitudes(initial.n(), psi)?, trajectory))
}

/// Groups of terms in one Trotter step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermGroup {
    ZZ,
    XX,
    Z,
    X,
}

pub const DEFAULT_TERM_ORDER: [TermGroup; 4] =
    [TermGroup::ZZ, TermGroup::XX, TermGroup::Z, TermGroup::X];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitalOptions {
    pub order: [TermGroup; 4],
    /// Record the state after every step.
    pub trajectory: bool,
}

impl Default for DigitalOptions {
    fn default() -> Self {
        DigitalOptions {
            order: DEFAULT_TERM_ORDER,
            trajectory: false,
        }
    }
}

/// Terms of step `m` (1-based) with coefficients `a_ℓ(s_m)`, in application
/// order. Terms whose coefficient is exactly zero are skipped.
pub fn step_terms(
    p: &SpinProblem,
    sched: &Schedule,
    m: usize,
    order: &[TermGroup; 4],
) -> Result<Vec<PauliTerm>> {
    p.validate()?;
    sched.validate()?;
    if !(1..=sched.steps).contains(&m) {
        return Err(Error::OutOfRange {
            what: "step index",
            value: m as f64,
        });
    }
    let s = sched.step_parameter(m);
    let mut terms = Vec::with_capacity(2 * p.n + 2 * p.bonds());
    for group in order {
        match group {
            TermGroup::ZZ => terms.extend((0..p.bonds()).map(|b| PauliTerm {
                coefficient: -s * p.j_zz[b],
                kind: TermKind::ZZ(b),
            })),
            TermGroup::XX => terms.extend((0..p.bonds()).map(|b| PauliTerm {
                coefficient: -s * p.j_xx[b],
                kind: TermKind::XX(b),
            })),
            TermGroup::Z => terms.extend((0..p.n).map(|i| PauliTerm {
                coefficient: -s * p.b_z[i],
                kind: TermKind::Z(i),
            })),
            TermGroup::X => terms.extend((0..p.n).map(|i| PauliTerm {
                coefficient: -s * p.b_x[i] - (1.0 - s) * sched.b_x_init,
                kind: TermKind::X(i),
            })),
        }
    }
    terms.retain(|t| t.coefficient != 0.0);
    Ok(terms)
}

/// Applies `exp(−iθP)` for a single Pauli string in place.
pub fn apply_pauli_rotation(amplitudes: &mut [Complex64], kind: TermKind, theta: f64) {
    if kind.is_diagonal() {
        let plus = Complex64::from_polar(1.0, -theta);
        let minus = plus.conj();
        for (k, a) in amplitudes.iter_mut().enumerate() {
            *a *= if kind.diagonal_sign(k) > 0.0 {
                plus
            } else {
                minus
            };
        }
    } else {
        let mask = kind.flip_mask();
        let (c, s) = (theta.cos(), theta.sin());
        let mis = Complex64::new(0.0, -s);
        for k in 0..amplitudes.len() {
            let j = k ^ mask;
            if k < j {
                let (a, b) = (amplitudes[k], amplitudes[j]);
                amplitudes[k] = a * c + b * mis;
                amplitudes[j] = b * c + a * mis;
            }
        }
    }
}

/// Applies Trotter step `m` to `state`.
pub fn apply_step(
    state: &mut StateVector,
    p: &SpinProblem,
    sched: &Schedule,
    m: usize,
    order: &[TermGroup; 4],
) -> Result<()> {
    let dt = sched.time_step();
    for t in step_terms(p, sched, m, order)? {
        apply_pauli_rotation(state.amplitudes_mut(), t.kind, dt * t.coefficient);
    }
    Ok(())
}

/// Product-formula evolution with the default term order.
pub fn evolve_digital(p: &SpinProblem, sched: &Schedule) -> Result<EvolutionResult> {
    evolve_digital_with(p, sched, &DigitalOptions::default())
}

pub fn evolve_digital_with(
    p: &SpinProblem,
    sched: &Schedule,
    opts: &DigitalOptions,
) -> Result<EvolutionResult> {
    p.validate()?;
    sched.validate()?;
    let mut state = StateVector::plus(p.n);
    let mut trajectory = Vec::new();
    if opts.trajectory {
        trajectory.push((0.0, state.clone()));
    }
    for m in 1..=sched.steps {
        apply_step(&mut state, p, sched, m, &opts.order)?;
        if opts.trajectory {
            trajectory.push((m as f64 / sched.steps as f64, state.clone()));
        }
    }
    Ok(EvolutionResult {
        final_state: state,
        trajectory,
        mode: EvolutionMode::Digital,
        total_time: sched.total_time,
        steps: sched.steps,
        sampling: sched.sampling,
        integrator_steps: 0,
    })
}

/// Dense unitary of Trotter step `m`, built from per-term dense matrices.
pub fn step_unitary(p: &SpinProblem, sched: &Schedule, m: usize) -> Result<DMatrix<Complex64>> {
    if p.n > STEP_UNITARY_MAX_SITES {
        return Err(Error::TooLarge {
            n: p.n,
            max: STEP_UNITARY_MAX_SITES,
        });
    }
    let dim = 1usize << p.n;
    let dt = sched.time_step();
    let mut u = DMatrix::<Complex64>::identity(dim, dim);
    for t in step_terms(p, sched, m, &DEFAULT_TERM_ORDER)? {
        let single = PauliTermList::new(
            p.n,
            [PauliTerm {
                coefficient: 1.0,
                kind: t.kind,
            }],
        )?;
        let pauli = single.to_dense().map(|x| Complex64::new(x, 0.0));
        let theta = dt * t.coefficient;
        let factor = DMatrix::<Complex64>::identity(dim, dim) * Complex64::new(theta.cos(), 0.0)
            + pauli * Complex64::new(0.0, -theta.sin());
        u = factor * u;
    }
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{interpolated_hamiltonian, target_state};
    use crate::problem::builtin_instance;

    fn fidelity(a: &StateVector, b: &StateVector) -> f64 {
        a.inner(b).unwrap().norm_sqr()
    }

    fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
        m.map(|x| Complex64::new(x, 0.0))
    }

    fn expm_minus_i(h: &DMatrix<f64>, t: f64) -> DMatrix<Complex64> {
        (to_complex(h) * Complex64::new(0.0, -t)).exp()
    }

    #[test]
    fn zero_time_leaves_plus_state() {
        let p = SpinProblem::uniform_chain(3, 1.0).unwrap();
        let sched = Schedule::new(0.0, 1).unwrap();
        let r = evolve_continuous(&p, &sched, &IntegratorConfig::default(), &[0.0, 1.0]).unwrap();
        assert_eq!(r.final_state, StateVector::plus(3));
        assert_eq!(r.trajectory.len(), 2);
        let d = evolve_digital(&p, &sched).unwrap();
        assert!(d.final_state.distance(&StateVector::plus(3)).unwrap() < 1e-10);
    }

    #[test]
    fn tiny_time_digital_is_identity() {
        let p = builtin_instance("s5-3q-nonstoq").unwrap();
        let sched = Schedule::new(1e-12, 1).unwrap();
        let d = evolve_digital(&p, &sched).unwrap();
        assert!(d.final_state.distance(&StateVector::plus(3)).unwrap() < 1e-10);
    }

    #[test]
    fn frozen_hamiltonian_matches_matrix_exponential() {
        let p = builtin_instance("s5-3q-nonstoq").unwrap();
        let sched = Schedule::new(1.3, 1).unwrap();
        let h1 = interpolated_hamiltonian(&p, &sched, 1.0).unwrap();
        let op = h1.operator();
        let frozen = |_s: f64, x: &[Complex64], y: &mut [Complex64]| op.apply(x, y);
        let initial = StateVector::plus(3);
        let (psi, _) = rk4(&frozen, &initial, 1.3, 2000, &[]).unwrap();
        let exact = expm_minus_i(&h1.to_dense(), 1.3)
            * nalgebra::DVector::from_column_slice(initial.amplitudes());
        for (a, b) in psi.amplitudes().iter().zip(exact.iter()) {
            assert!((a - b).norm() < 1e-7);
        }
    }

    #[test]
    fn continuous_matches_fine_piecewise_exponential() {
        let p = builtin_instance("s4-3q-stoq").unwrap();
        let sched = Schedule::new(2.0, 5).unwrap();
        let r = evolve_continuous(&p, &sched, &IntegratorConfig::default(), &[]).unwrap();
        // Exponential midpoint rule on a fine grid: second-order accurate.
        let steps = 4000;
        let dt = 2.0 / steps as f64;
        let mut psi = nalgebra::DVector::from_column_slice(StateVector::plus(3).amplitudes());
        for k in 0..steps {
            let s = (k as f64 + 0.5) / steps as f64;
            let h = interpolated_hamiltonian(&p, &sched, s).unwrap().to_dense();
            psi = expm_minus_i(&h, dt) * psi;
        }
        let exact = StateVector::from_amplitudes(3, psi.iter().copied().collect()).unwrap();
        assert!(1.0 - fidelity(&exact, &r.final_state) < 1e-6);
    }

    #[test]
    fn continuous_norm_and_checkpoints() {
        let p = builtin_instance("s5-3q-nonstoq").unwrap();
        let sched = Schedule::new(3.0, 5).unwrap();
        let cps = [0.0, 0.2, 0.4, 0.6, 0.8, 1.0];
        let r = evolve_continuous(&p, &sched, &IntegratorConfig::default(), &cps).unwrap();
        assert_eq!(r.trajectory.len(), cps.len());
        for (s, state) in &r.trajectory {
            assert!((state.norm() - 1.0).abs() < 1e-8, "s={s}");
        }
        assert!(r.trajectory[0].1.distance(&StateVector::plus(3)).unwrap() < 1e-15);
        assert!(1.0 - fidelity(&r.trajectory[5].1, &r.final_state) < 1e-12);
    }

    #[test]
    fn convergence_budget_is_reported() {
        let p = SpinProblem::uniform_chain(4, 2.0).unwrap();
        let sched = Schedule::new(3.0, 5).unwrap();
        let cfg = IntegratorConfig {
            base_step: 1.0,
            max_step_halvings: 1,
            ..IntegratorConfig::default()
        };
        assert!(matches!(
            evolve_continuous(&p, &sched, &cfg, &[]),
            Err(Error::Convergence { halvings: 1 })
        ));
    }

    #[test]
    fn digital_preserves_norm() {
        let p = builtin_instance("s7-6q-nonstoq").unwrap();
        let sched = Schedule::new(3.0, 5).unwrap();
        let d = evolve_digital(&p, &sched).unwrap();
        assert!((d.final_state.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn digital_matches_product_of_step_unitaries() {
        let p = builtin_instance("s5-3q-nonstoq").unwrap();
        for sampling in [
            Sampling::Endpoint,
            Sampling::Midpoint,
            Sampling::IntegralAverage,
        ] {
            let sched = Schedule::new(3.0, 5).unwrap().with_sampling(sampling);
            let mut psi = nalgebra::DVector::from_column_slice(StateVector::plus(3).amplitudes());
            for m in 1..=5 {
                psi = step_unitary(&p, &sched, m).unwrap() * psi;
            }
            let d = evolve_digital(&p, &sched).unwrap();
            for (a, b) in d.final_state.amplitudes().iter().zip(psi.iter()) {
                assert!((a - b).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn step_unitary_is_unitary() {
        let p = builtin_instance("s4-3q-stoq").unwrap();
        let sched = Schedule::new(3.0, 5).unwrap();
        for m in 1..=5 {
            let u = step_unitary(&p, &sched, m).unwrap();
            let err = (u.adjoint() * &u - DMatrix::identity(8, 8)).camax();
            assert!(err < 1e-10);
        }
        let big = SpinProblem::uniform_chain(5, 1.0).unwrap();
        assert!(matches!(
            step_unitary(&big, &sched, 1),
            Err(Error::TooLarge { .. })
        ));
    }

    #[test]
    fn single_bond_step_matches_exponential_oracle() {
        let p = SpinProblem::uniform_chain(2, 2.0).unwrap();
        let sched = Schedule::new(1.0, 2)
            .unwrap()
            .with_sampling(Sampling::Endpoint);
        let u = step_unitary(&p, &sched, 1).unwrap();
        let dt = 0.5;
        let s = 0.5;
        let zz = PauliTermList::new(
            2,
            [PauliTerm {
                coefficient: -s * 2.0,
                kind: TermKind::ZZ(0),
            }],
        )
        .unwrap();
        let x = PauliTermList::new(
            2,
            [
                PauliTerm {
                    coefficient: -(1.0 - s) * 2.0,
                    kind: TermKind::X(0),
                },
                PauliTerm {
                    coefficient: -(1.0 - s) * 2.0,
                    kind: TermKind::X(1),
                },
            ],
        )
        .unwrap();
        let expected = expm_minus_i(&x.to_dense(), dt) * expm_minus_i(&zz.to_dense(), dt);
        assert!((u - expected).camax() < 1e-12);
    }

    #[test]
    fn last_endpoint_step_has_no_transverse_rotation() {
        let p = SpinProblem::uniform_chain(2, 2.0).unwrap();
        let sched = Schedule::new(1.0, 2)
            .unwrap()
            .with_sampling(Sampling::Endpoint);
        let terms = step_terms(&p, &sched, 2, &DEFAULT_TERM_ORDER).unwrap();
        assert!(terms.iter().all(|t| t.kind.is_diagonal()));
    }

    #[test]
    fn term_order_is_bonds_then_fields() {
        let p = builtin_instance("s5-3q-nonstoq").unwrap();
        let sched = Schedule::new(3.0, 5).unwrap();
        let kinds: Vec<TermKind> = step_terms(&p, &sched, 1, &DEFAULT_TERM_ORDER)
            .unwrap()
            .iter()
            .map(|t| t.kind)
            .collect();
        use TermKind::*;
        assert_eq!(
            kinds,
            vec![
                ZZ(0),
                ZZ(1),
                XX(0),
                XX(1),
                Z(0),
                Z(1),
                Z(2),
                X(0),
                X(1),
                X(2)
            ]
        );
    }

    #[test]
    fn spin_flip_symmetry_in_both_modes() {
        let mut p = SpinProblem::uniform_chain(4, 1.3).unwrap();
        p.b_x = vec![0.4, -0.7, 1.1, 0.2];
        p.j_zz = vec![1.3, -0.6, 0.9];
        let sched = Schedule::new(2.0, 4).unwrap();
        let full = (1usize << 4) - 1;
        for state in [
            evolve_digital(&p, &sched).unwrap().final_state,
            evolve_continuous(&p, &sched, &IntegratorConfig::default(), &[])
                .unwrap()
                .final_state,
        ] {
            let probs = state.probabilities();
            for k in 0..16 {
                assert!((probs[k] - probs[full ^ k]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ghz_fidelities_in_expected_window() {
        let p = SpinProblem::uniform_chain(4, 2.0).unwrap();
        let sched = Schedule::new(3.0, 5).unwrap();
        let target = target_state(&p).unwrap();
        let dig = evolve_digital(&p, &sched).unwrap().final_state;
        let cont = evolve_continuous(&p, &sched, &IntegratorConfig::default(), &[])
            .unwrap()
            .final_state;
        assert!((fidelity(&dig, &target) - 0.85).abs() <= 0.03);
        assert!((fidelity(&dig, &cont) - 0.93).abs() <= 0.03);
        let fc = fidelity(&cont, &target);
        assert!((0.85..=0.95).contains(&fc));
    }
}
