//! Order-of-magnitude resource estimates from the adiabatic condition and
//! the first-order product-formula error bound. All constants are set to 1.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamiltonian::{build_h_initial, build_h_problem, diagonalize, min_gap, PauliTermList};
use crate::problem::{Schedule, SpinProblem};

/// Gaps below this make the estimate meaningless; outputs become infinite.
pub const MIN_MEANINGFUL_GAP: f64 = 1e-10;

/// Locality of the interaction terms.
pub const LOCALITY: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResourceEstimate {
    /// `T = D/γ²`.
    pub time_bound: f64,
    /// `M = T² a_max² L² / ε`.
    pub steps: f64,
    /// `M · L · k`.
    pub gate_count: f64,
    pub gap: f64,
    /// Location of the minimum gap when it was computed here.
    pub gap_location: Option<f64>,
    pub numerator: f64,
    pub a_max: f64,
    pub term_count: usize,
    pub locality: usize,
    pub epsilon: f64,
}

/// Closed-form part of the estimate: `(T, M, gates)`.
pub fn resource_formula(
    numerator: f64,
    gap: f64,
    a_max: f64,
    term_count: usize,
    locality: usize,
    epsilon: f64,
) -> (f64, f64, f64) {
    if gap < MIN_MEANINGFUL_GAP {
        return (f64::INFINITY, f64::INFINITY, f64::INFINITY);
    }
    let l = term_count as f64;
    let t = numerator / (gap * gap);
    let m = t * t * a_max * a_max * l * l / epsilon;
    (t, m, m * l * locality as f64)
}

/// Largest singular value of `V1ᵀ A V0`, where `V0` spans the ground level
/// and `V1` the first excited level of `H(s)`.
fn transition_element(h: &PauliTermList, derivative: &DMatrix<f64>) -> Result<f64> {
    let spectrum = diagonalize(h, true)?;
    let vectors = spectrum.eigenvectors.as_ref().expect("vectors requested");
    let ground = spectrum.ground_degeneracy();
    let excited = spectrum.first_excited_indices();
    if excited.is_empty() {
        return Ok(0.0);
    }
    let dim = vectors[0].len();
    let v0 = DMatrix::from_fn(dim, ground, |r, c| vectors[c][r]);
    let v1 = DMatrix::from_fn(dim, excited.len(), |r, c| vectors[excited.start + c][r]);
    let block = v1.transpose() * derivative * v0;
    Ok(block.singular_values().iter().copied().fold(0.0, f64::max))
}

/// Estimates `T`, `M` and the gate count for accuracy `epsilon`.
///
/// `D` is the maximum over a uniform grid of `grid_points` values of `s` of
/// the ground-to-first-excited matrix element of `dH/ds = H_P − H_I`. When
/// `gap` is `None` it is taken from [`min_gap`] on the same grid.
pub fn estimate_resources(
    p: &SpinProblem,
    sched: &Schedule,
    epsilon: f64,
    gap: Option<f64>,
    grid_points: usize,
) -> Result<ResourceEstimate> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::OutOfRange {
            what: "epsilon",
            value: epsilon,
        });
    }
    if grid_points < 3 {
        return Err(Error::OutOfRange {
            what: "grid point count",
            value: grid_points as f64,
        });
    }
    let h_p = build_h_problem(p)?;
    let h_i = build_h_initial(p.n, sched.b_x_init);
    let derivative = h_p.combine(1.0, &h_i, -1.0)?.to_dense();

    let mut numerator: f64 = 0.0;
    for g in 0..grid_points {
        let s = g as f64 / (grid_points - 1) as f64;
        let h = h_p.combine(s, &h_i, 1.0 - s)?;
        numerator = numerator.max(transition_element(&h, &derivative)?);
    }

    // Coefficients are affine in s, so their extremes sit at the endpoints.
    let a_max = h_p
        .terms()
        .iter()
        .chain(h_i.terms())
        .map(|t| t.coefficient.abs())
        .fold(0.0, f64::max);
    let mut kinds: Vec<_> = h_p
        .terms()
        .iter()
        .chain(h_i.terms())
        .map(|t| t.kind)
        .collect();
    kinds.sort();
    kinds.dedup();
    let term_count = kinds.len();

    let (gap, gap_location) = match gap {
        Some(g) => (g, None),
        None => {
            let sweep = min_gap(p, sched, grid_points)?;
            (sweep.gap, Some(sweep.s_at_min))
        }
    };
    let (time_bound, steps, gate_count) =
        resource_formula(numerator, gap, a_max, term_count, LOCALITY, epsilon);
    Ok(ResourceEstimate {
        time_bound,
        steps,
        gate_count,
        gap,
        gap_location,
        numerator,
        a_max,
        term_count,
        locality: LOCALITY,
        epsilon,
    })
}
