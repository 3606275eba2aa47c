//! Chain Hamiltonians as Pauli-term lists, their matrix-free action, and
//! spectral quantities (ground space, target state, minimum gap).
//!
//! Stored coefficients are the literal matrix prefactors: the problem term
//! `-J σ_z^i σ_z^{i+1}` is stored as `ZZ(i)` with coefficient `-J`.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::problem::{Schedule, SpinProblem};
use crate::state::StateVector;

/// Eigenvalues closer than this are treated as one level.
pub const DEGENERACY_TOLERANCE: f64 = 1e-8;

/// Largest chain diagonalized densely; larger chains use Lanczos.
pub const DENSE_LIMIT: usize = 10;

/// Pauli operator of a single term. Bond index `b` couples sites `b` and
/// `b + 1`. Variant order is the canonical term order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TermKind {
    Z(usize),
    X(usize),
    ZZ(usize),
    XX(usize),
}

impl TermKind {
    /// Sites the term acts on.
    pub fn support(self) -> (usize, Option<usize>) {
        match self {
            TermKind::Z(i) | TermKind::X(i) => (i, None),
            TermKind::ZZ(b) | TermKind::XX(b) => (b, Some(b + 1)),
        }
    }

    fn max_site(self) -> usize {
        match self.support() {
            (i, None) => i,
            (_, Some(j)) => j,
        }
    }

    /// Bit mask flipped by the term; zero for diagonal terms.
    pub fn flip_mask(self) -> usize {
        match self {
            TermKind::Z(_) | TermKind::ZZ(_) => 0,
            TermKind::X(i) => 1 << i,
            TermKind::XX(b) => 0b11 << b,
        }
    }

    /// Eigenvalue on basis state `index` for diagonal terms.
    pub fn diagonal_sign(self, index: usize) -> f64 {
        let z = |q: usize| if index >> q & 1 == 0 { 1.0 } else { -1.0 };
        match self {
            TermKind::Z(i) => z(i),
            TermKind::ZZ(b) => z(b) * z(b + 1),
            TermKind::X(_) | TermKind::XX(_) => 0.0,
        }
    }

    pub fn is_diagonal(self) -> bool {
        matches!(self, TermKind::Z(_) | TermKind::ZZ(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub kind: TermKind,
}

/// Sum of 1-local and nearest-neighbour 2-local `X`/`Z` terms, kept in
/// canonical order with like terms merged and zeros dropped.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTermList {
    n: usize,
    terms: Vec<PauliTerm>,
}

impl PauliTermList {
    pub fn new(n: usize, terms: impl IntoIterator<Item = PauliTerm>) -> Result<Self> {
        let mut merged: BTreeMap<TermKind, f64> = BTreeMap::new();
        for t in terms {
            if t.kind.max_site() >= n {
                return Err(Error::IndexOutOfRange {
                    index: t.kind.max_site(),
                    n,
                });
            }
            if !t.coefficient.is_finite() {
                return Err(Error::OutOfRange {
                    what: "term coefficient",
                    value: t.coefficient,
                });
            }
            *merged.entry(t.kind).or_insert(0.0) += t.coefficient;
        }
        let terms = merged
            .into_iter()
            .filter(|&(_, c)| c != 0.0)
            .map(|(kind, coefficient)| PauliTerm { coefficient, kind })
            .collect();
        Ok(PauliTermList { n, terms })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, kind: TermKind) -> f64 {
        self.terms
            .iter()
            .find(|t| t.kind == kind)
            .map_or(0.0, |t| t.coefficient)
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: f64, other: &PauliTermList, b: f64) -> Result<PauliTermList> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let scaled = |list: &PauliTermList, f: f64| {
            list.terms
                .iter()
                .map(move |t| PauliTerm {
                    coefficient: f * t.coefficient,
                    kind: t.kind,
                })
                .collect::<Vec<_>>()
        };
        let mut all = scaled(self, a);
        all.extend(scaled(other, b));
        PauliTermList::new(self.n, all)
    }

    /// Upper bound on the operator norm: sum of absolute coefficients.
    pub fn norm_bound(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient.abs()).sum()
    }

    pub fn operator(&self) -> FlipOperator {
        FlipOperator::from_terms(self)
    }

    /// `Hψ`, unnormalized.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.n() != self.n {
            return Err(Error::DimensionMismatch {
                expected: 1 << self.n,
                found: psi.dim(),
            });
        }
        let op = self.operator();
        let mut out = vec![Complex64::new(0.0, 0.0); psi.dim()];
        op.apply(psi.amplitudes(), &mut out);
        StateVector::from_amplitudes(self.n, out)
    }

    pub fn expectation(&self, psi: &StateVector) -> Result<f64> {
        let h_psi = self.apply(psi)?;
        Ok(psi.inner(&h_psi)?.re)
    }

    /// Dense real matrix; every term here is real.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let dim = 1usize << self.n;
        let mut m = DMatrix::zeros(dim, dim);
        for t in &self.terms {
            let mask = t.kind.flip_mask();
            for k in 0..dim {
                if t.kind.is_diagonal() {
                    m[(k, k)] += t.coefficient * t.kind.diagonal_sign(k);
                } else {
                    m[(k ^ mask, k)] += t.coefficient;
                }
            }
        }
        m
    }
}

/// `H_I = -B_{x,I} Σ_i σ_x^i`.
pub fn build_h_initial(n: usize, b_x_init: f64) -> PauliTermList {
    PauliTermList::new(
        n,
        (0..n).map(|i| PauliTerm {
            coefficient: -b_x_init,
            kind: TermKind::X(i),
        }),
    )
    .expect("initial Hamiltonian terms are in range")
}

/// `H_P = -Σ_i (B_z σ_z + B_x σ_x) - Σ_i (J_zz σ_zσ_z + J_xx σ_xσ_x)`.
pub fn build_h_problem(p: &SpinProblem) -> Result<PauliTermList> {
    p.validate()?;
    let sites = (0..p.n).flat_map(|i| {
        [
            PauliTerm {
                coefficient: -p.b_z[i],
                kind: TermKind::Z(i),
            },
            PauliTerm {
                coefficient: -p.b_x[i],
                kind: TermKind::X(i),
            },
        ]
    });
    let bonds = (0..p.bonds()).flat_map(|b| {
        [
            PauliTerm {
                coefficient: -p.j_zz[b],
                kind: TermKind::ZZ(b),
            },
            PauliTerm {
                coefficient: -p.j_xx[b],
                kind: TermKind::XX(b),
            },
        ]
    });
    PauliTermList::new(p.n, sites.chain(bonds).collect::<Vec<_>>())
}

/// `H(s) = s·H_P + (1 − s)·H_I`.
pub fn interpolated_hamiltonian(
    p: &SpinProblem,
    sched: &Schedule,
    s: f64,
) -> Result<PauliTermList> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfRange {
            what: "interpolation parameter s",
            value: s,
        });
    }
    let h_p = build_h_problem(p)?;
    let h_i = build_h_initial(p.n, sched.b_x_init);
    h_p.combine(s, &h_i, 1.0 - s)
}

/// Matrix-free form `Hψ[k] = d[k]ψ[k] + Σ_j c_j ψ[k ⊕ m_j]`.
#[derive(Debug, Clone)]
pub struct FlipOperator {
    n: usize,
    diagonal: Vec<f64>,
    flips: Vec<(usize, f64)>,
}

impl FlipOperator {
    pub fn from_terms(h: &PauliTermList) -> Self {
        let dim = 1usize << h.n;
        let mut diagonal = vec![0.0; dim];
        let mut flips: Vec<(usize, f64)> = Vec::new();
        for t in &h.terms {
            if t.kind.is_diagonal() {
                for (k, d) in diagonal.iter_mut().enumerate() {
                    *d += t.coefficient * t.kind.diagonal_sign(k);
                }
            } else {
                flips.push((t.kind.flip_mask(), t.coefficient));
            }
        }
        FlipOperator {
            n: h.n,
            diagonal,
            flips,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        for (k, out) in y.iter_mut().enumerate() {
            let mut acc = x[k] * self.diagonal[k];
            for &(mask, c) in &self.flips {
                acc += x[k ^ mask] * c;
            }
            *out = acc;
        }
    }

    pub fn apply_real(&self, x: &[f64], y: &mut [f64]) {
        for (k, out) in y.iter_mut().enumerate() {
            let mut acc = x[k] * self.diagonal[k];
            for &(mask, c) in &self.flips {
                acc += x[k ^ mask] * c;
            }
            *out = acc;
        }
    }

    pub fn norm_bound(&self) -> f64 {
        let d = self.diagonal.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        d + self.flips.iter().map(|(_, c)| c.abs()).sum::<f64>()
    }
}

/// `H(s)` for the whole annealing path, applied without rebuilding terms.
#[derive(Debug, Clone)]
pub struct AnnealingOperator {
    problem_diagonal: Vec<f64>,
    /// (mask, problem coefficient, initial coefficient)
    flips: Vec<(usize, f64, f64)>,
}

impl AnnealingOperator {
    pub fn new(p: &SpinProblem, b_x_init: f64) -> Result<Self> {
        let h_p = build_h_problem(p)?;
        let h_i = build_h_initial(p.n, b_x_init);
        let op_p = h_p.operator();
        let mut flips: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        for &(mask, c) in &op_p.flips {
            flips.entry(mask).or_default().0 += c;
        }
        for &(mask, c) in &h_i.operator().flips {
            flips.entry(mask).or_default().1 += c;
        }
        Ok(AnnealingOperator {
            problem_diagonal: op_p.diagonal,
            flips: flips.into_iter().map(|(m, (a, b))| (m, a, b)).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.problem_diagonal.len()
    }

    /// `y = H(s) x`.
    pub fn apply(&self, s: f64, x: &[Complex64], y: &mut [Complex64]) {
        let coeffs: Vec<(usize, f64)> = self
            .flips
            .iter()
            .map(|&(m, p, i)| (m, s * p + (1.0 - s) * i))
            .collect();
        for (k, out) in y.iter_mut().enumerate() {
            let mut acc = x[k] * (s * self.problem_diagonal[k]);
            for &(mask, c) in &coeffs {
                acc += x[k ^ mask] * c;
            }
            *out = acc;
        }
    }
}

/// Eigenvalues in ascending order, optionally with eigenvectors.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    /// Unit eigenvectors matching `eigenvalues`.
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub tolerance: f64,
    /// False when only the lowest part of the spectrum was computed.
    pub complete: bool,
}

impl Spectrum {
    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Number of eigenvalues within tolerance of the ground energy.
    pub fn ground_degeneracy(&self) -> usize {
        let e0 = self.ground_energy();
        self.eigenvalues
            .iter()
            .take_while(|&&e| e - e0 <= self.tolerance)
            .count()
    }

    /// First eigenvalue above the ground level.
    pub fn first_excited(&self) -> Option<f64> {
        let e0 = self.ground_energy();
        self.eigenvalues
            .iter()
            .copied()
            .find(|&e| e - e0 > self.tolerance)
    }

    /// Distance from the ground level to the next distinct level.
    pub fn gap(&self) -> Option<f64> {
        self.first_excited().map(|e| e - self.ground_energy())
    }

    /// Indices of the eigenpairs forming the first excited level.
    pub fn first_excited_indices(&self) -> std::ops::Range<usize> {
        let start = self.ground_degeneracy();
        let Some(e1) = self.first_excited() else {
            return start..start;
        };
        let len = self.eigenvalues[start..]
            .iter()
            .take_while(|&&e| e - e1 <= self.tolerance)
            .count();
        start..start + len
    }
}

/// Spectrum of `h`: dense symmetric eigendecomposition up to
/// [`DENSE_LIMIT`] qubits, deflated Lanczos for the lowest levels above.
pub fn diagonalize(h: &PauliTermList, want_vectors: bool) -> Result<Spectrum> {
    if h.n > crate::problem::MAX_SITES {
        return Err(Error::TooLarge {
            n: h.n,
            max: crate::problem::MAX_SITES,
        });
    }
    if h.n <= DENSE_LIMIT {
        diagonalize_dense(h, want_vectors)
    } else {
        diagonalize_lanczos(h, want_vectors)
    }
}

fn diagonalize_dense(h: &PauliTermList, want_vectors: bool) -> Result<Spectrum> {
    let m = h.to_dense();
    let scale = h.norm_bound().max(1.0);
    let asymmetry = (&m - m.transpose()).amax();
    if asymmetry > 1e-12 * scale {
        return Err(Error::NonHermitian { asymmetry });
    }
    let dim = m.nrows();
    if !want_vectors {
        let mut values: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        values.sort_by(f64::total_cmp);
        return Ok(Spectrum {
            eigenvalues: values,
            eigenvectors: None,
            tolerance: DEGENERACY_TOLERANCE,
            complete: true,
        });
    }
    let eig = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect();
    Ok(Spectrum {
        eigenvalues,
        eigenvectors: Some(eigenvectors),
        tolerance: DEGENERACY_TOLERANCE,
        complete: true,
    })
}

/// Upper limit on eigenpairs extracted by deflation.
const LANCZOS_MAX_PAIRS: usize = 16;

fn diagonalize_lanczos(h: &PauliTermList, want_vectors: bool) -> Result<Spectrum> {
    let op = h.operator();
    let scale = op.norm_bound().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1a2c);
    let mut values: Vec<f64> = Vec::new();
    let mut vectors: Vec<Vec<f64>> = Vec::new();
    while values.len() < LANCZOS_MAX_PAIRS.min(op.dim()) {
        let start: Vec<f64> = (0..op.dim())
            .map(|_| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 - 0.5)
            .collect();
        let (value, vector) = lanczos_lowest(&op, start, &vectors, scale)?;
        values.push(value);
        vectors.push(vector);
        // Stop once a level above the ground level has been found.
        if value - values[0] > DEGENERACY_TOLERANCE {
            break;
        }
    }
    // Deflation yields values in ascending order up to round-off.
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(Spectrum {
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
        eigenvectors: want_vectors.then(|| order.iter().map(|&i| vectors[i].clone()).collect()),
        tolerance: DEGENERACY_TOLERANCE,
        complete: false,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(y, x)| *y += alpha * x);
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            axpy(-c, b, v);
        }
    }
}

/// Lowest eigenpair of `op` restricted to the complement of `deflate`,
/// by Lanczos with full reorthogonalization.
fn lanczos_lowest(
    op: &FlipOperator,
    mut start: Vec<f64>,
    deflate: &[Vec<f64>],
    scale: f64,
) -> Result<(f64, Vec<f64>)> {
    let dim = op.dim();
    let max_iter = dim.min(400);
    let tol = 1e-11 * scale;
    orthogonalize(&mut start, deflate);
    let norm = dot(&start, &start).sqrt();
    if norm == 0.0 {
        return Err(Error::Config("Lanczos start vector vanished".into()));
    }
    start.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; dim];
    loop {
        let j = basis.len() - 1;
        op.apply_real(&basis[j], &mut w);
        orthogonalize(&mut w, deflate);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        orthogonalize(&mut w, &basis);
        let b = dot(&w, &w).sqrt();

        let k = alpha.len();
        let check = k.is_multiple_of(8) || b < tol || k >= max_iter;
        if check {
            let (theta, y) = tridiagonal_lowest(&alpha, &beta);
            let residual = b * y[k - 1].abs();
            if residual < tol || b < tol || k >= max_iter {
                let mut v = vec![0.0; dim];
                for (q, &c) in basis.iter().zip(&y) {
                    axpy(c, q, &mut v);
                }
                orthogonalize(&mut v, deflate);
                let nv = dot(&v, &v).sqrt();
                v.iter_mut().for_each(|x| *x /= nv);
                return Ok((theta, v));
            }
        }
        beta.push(b);
        basis.push(w.iter().map(|x| x / b).collect());
    }
}

fn tridiagonal_lowest(alpha: &[f64], beta: &[f64]) -> (f64, Vec<f64>) {
    let k = alpha.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alpha[i];
        if i + 1 < k {
            t[(i, i + 1)] = beta[i];
            t[(i + 1, i)] = beta[i];
        }
    }
    let eig = SymmetricEigen::new(t);
    let (imin, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty tridiagonal");
    (
        eig.eigenvalues[imin],
        eig.eigenvectors.column(imin).iter().copied().collect(),
    )
}

/// Infinite-time limit of the evolution: the ground state of `H_P`, or the
/// normalized projection of `|+⟩^{⊗n}` onto the ground space when it is
/// degenerate. The global phase makes the largest amplitude real positive.
pub fn target_state(p: &SpinProblem) -> Result<StateVector> {
    let h = build_h_problem(p)?;
    let spectrum = diagonalize(&h, true)?;
    target_from_spectrum(p.n, &spectrum)
}

pub fn target_from_spectrum(n: usize, spectrum: &Spectrum) -> Result<StateVector> {
    let vectors = spectrum
        .eigenvectors
        .as_ref()
        .ok_or_else(|| Error::Config("target state needs eigenvectors".into()))?;
    let degeneracy = spectrum.ground_degeneracy();
    let mut state = if degeneracy == 1 {
        StateVector::from_real(n, &vectors[0])?
    } else {
        let plus = 1.0 / ((1usize << n) as f64).sqrt();
        let mut t = vec![0.0; 1 << n];
        for v in &vectors[..degeneracy] {
            let overlap: f64 = v.iter().sum::<f64>() * plus;
            axpy(overlap, v, &mut t);
        }
        let norm = dot(&t, &t).sqrt();
        if norm < 1e-6 {
            return Err(Error::IllDefinedTarget {
                projection_norm: norm,
            });
        }
        StateVector::from_real(n, &t)?
    };
    state.normalize();
    state.fix_global_phase();
    Ok(state)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapSweep {
    pub gap: f64,
    pub s_at_min: f64,
}

/// Minimum of `E_1 − E_0` over a uniform grid of `grid_points` values of `s`
/// in `[0, 1]`, where `E_1` is the first level distinct from the ground level.
pub fn min_gap(p: &SpinProblem, sched: &Schedule, grid_points: usize) -> Result<GapSweep> {
    if grid_points < 3 {
        return Err(Error::OutOfRange {
            what: "grid point count",
            value: grid_points as f64,
        });
    }
    let mut best = GapSweep {
        gap: f64::INFINITY,
        s_at_min: 0.0,
    };
    for g in 0..grid_points {
        let s = g as f64 / (grid_points - 1) as f64;
        let h = interpolated_hamiltonian(p, sched, s)?;
        let spectrum = diagonalize(&h, false)?;
        if let Some(gap) = spectrum.gap() {
            if gap < best.gap {
                best = GapSweep { gap, s_at_min: s };
            }
        }
    }
    Ok(best)
}
