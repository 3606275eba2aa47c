//! Compilation of product-formula steps into `RX`/`RY`/`RZ` rotations and
//! tunable conditional-phase gates, a gate-level simulator, and a plain-text
//! gate file format.
//!
//! Conventions: `Rα(θ) = exp(−iθσ_α/2)` and `CZPHI(φ) = diag(1, 1, 1, e^{iφ})`
//! on the pair. Equivalence is always up to global phase.
//!
//! A ZZ rotation decomposes as
//! `exp(−iθ Z⊗Z) ∝ CZPHI(−4θ) · RZ(2θ) ⊗ RZ(2θ)`.
//! When the hardware only offers conditional phases with magnitude in
//! `[phase_min, phase_max]`, the phase is shifted by multiples of 2π into
//! range; negative phases are realized by flanking the gate with `RX(π)` on
//! one qubit, and phases with no representative in range by an echo pair of
//! two in-range gates whose difference is the required phase.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt::{self, Write as _};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::evolution::{step_terms, DEFAULT_TERM_ORDER};
use crate::hamiltonian::TermKind;
use crate::problem::{Schedule, SpinProblem};
use crate::state::StateVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    Rz { qubit: usize, angle: f64 },
    CzPhi { a: usize, b: usize, phase: f64 },
}

impl Gate {
    pub fn rx(qubit: usize, angle: f64) -> Gate {
        Gate::Rx {
            qubit,
            angle: canonical_angle(angle),
        }
    }

    pub fn ry(qubit: usize, angle: f64) -> Gate {
        Gate::Ry {
            qubit,
            angle: canonical_angle(angle),
        }
    }

    pub fn rz(qubit: usize, angle: f64) -> Gate {
        Gate::Rz {
            qubit,
            angle: canonical_angle(angle),
        }
    }

    pub fn cz_phi(a: usize, b: usize, phase: f64) -> Gate {
        Gate::CzPhi { a, b, phase }
    }

    pub fn is_entangling(&self) -> bool {
        matches!(self, Gate::CzPhi { .. })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::Rx { .. } => "RX",
            Gate::Ry { .. } => "RY",
            Gate::Rz { .. } => "RZ",
            Gate::CzPhi { .. } => "CZPHI",
        }
    }

    fn max_qubit(&self) -> usize {
        match *self {
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => qubit,
            Gate::CzPhi { a, b, .. } => a.max(b),
        }
    }

    fn relabel(self, a: usize, b: usize) -> Gate {
        let map = |q: usize| if q == 0 { a } else { b };
        match self {
            Gate::Rx { qubit, angle } => Gate::Rx {
                qubit: map(qubit),
                angle,
            },
            Gate::Ry { qubit, angle } => Gate::Ry {
                qubit: map(qubit),
                angle,
            },
            Gate::Rz { qubit, angle } => Gate::Rz {
                qubit: map(qubit),
                angle,
            },
            Gate::CzPhi { a: x, b: y, phase } => Gate::CzPhi {
                a: map(x),
                b: map(y),
                phase,
            },
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Gate::Rx { qubit, angle } | Gate::Ry { qubit, angle } | Gate::Rz { qubit, angle } => {
                write!(f, "{} {} {:?}", self.name(), qubit, angle)
            }
            Gate::CzPhi { a, b, phase } => write!(f, "CZPHI {a} {b} {phase:?}"),
        }
    }
}

/// Reduces a rotation angle to `(−π, π]`.
pub fn canonical_angle(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Ordered gates on `n` qubits. `step_markers[m − 1]` is the index of the
/// first gate of step `m`; gates before the first marker prepare the initial
/// state. A step that compiles to nothing shares its marker with the next.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSequence {
    n: usize,
    gates: Vec<Gate>,
    step_markers: Vec<usize>,
}

impl GateSequence {
    pub fn new(n: usize, gates: Vec<Gate>, step_markers: Vec<usize>) -> Result<Self> {
        for g in &gates {
            if g.max_qubit() >= n {
                return Err(Error::IndexOutOfRange {
                    index: g.max_qubit(),
                    n,
                });
            }
            if let Gate::CzPhi { a, b, .. } = *g {
                if a.abs_diff(b) != 1 {
                    return Err(Error::Config(format!(
                        "CZPHI on non-adjacent qubits {a} and {b}"
                    )));
                }
            }
            let angle = match *g {
                Gate::Rx { angle, .. } | Gate::Ry { angle, .. } | Gate::Rz { angle, .. } => angle,
                Gate::CzPhi { phase, .. } => phase,
            };
            if !angle.is_finite() {
                return Err(Error::OutOfRange {
                    what: "gate angle",
                    value: angle,
                });
            }
        }
        if step_markers.windows(2).any(|w| w[0] > w[1])
            || step_markers.last().is_some_and(|&m| m > gates.len())
        {
            return Err(Error::Config("step markers out of order".into()));
        }
        Ok(GateSequence {
            n,
            gates,
            step_markers,
        })
    }

    pub fn empty(n: usize) -> Self {
        GateSequence {
            n,
            gates: Vec::new(),
            step_markers: Vec::new(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn step_markers(&self) -> &[usize] {
        &self.step_markers
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn entangling_count(&self) -> usize {
        self.gates.iter().filter(|g| g.is_entangling()).count()
    }

    /// Gates belonging to step `m` (1-based).
    pub fn step(&self, m: usize) -> &[Gate] {
        let start = self.step_markers[m - 1];
        let end = self
            .step_markers
            .get(m)
            .copied()
            .unwrap_or(self.gates.len());
        &self.gates[start..end]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompilerConfig {
    pub phase_min: f64,
    pub phase_max: f64,
    /// Restrict conditional phases to `[phase_min, phase_max]` in magnitude.
    pub constrained: bool,
}

impl Default for CompilerConfig {
    fn default() -> Self {
        CompilerConfig {
            phase_min: 0.5,
            phase_max: 4.5,
            constrained: false,
        }
    }
}

impl CompilerConfig {
    /// Constrained mode with the default phase window.
    pub fn hardware() -> Self {
        CompilerConfig {
            constrained: true,
            ..CompilerConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phase_min > 0.0 && self.phase_min < self.phase_max && self.phase_max.is_finite())
        {
            return Err(Error::Config(format!(
                "phase window [{}, {}] must satisfy 0 < min < max",
                self.phase_min, self.phase_max
            )));
        }
        Ok(())
    }

    fn in_range(&self, phase: f64) -> bool {
        (self.phase_min..=self.phase_max).contains(&phase.abs())
    }
}

/// Gates on qubits `(0, 1)` realizing a conditional phase `c` (up to a
/// single-qubit `RZ` correction on qubit 1 returned alongside).
fn conditional_phase(c: f64, cfg: &CompilerConfig) -> Result<(Vec<Gate>, f64)> {
    if !cfg.constrained {
        return Ok((vec![Gate::cz_phi(0, 1, c)], 0.0));
    }
    let d = canonical_angle(c);
    let single = [d, d - TAU, d + TAU]
        .into_iter()
        .filter(|&r| cfg.in_range(r))
        .min_by(|a, b| a.abs().total_cmp(&b.abs()));
    match single {
        Some(r) if r > 0.0 => Ok((vec![Gate::cz_phi(0, 1, r)], 0.0)),
        // X on qubit 0 maps CZPHI(φ) to CZPHI(−φ)·(phase φ on qubit 1).
        Some(r) => Ok((
            vec![Gate::rx(0, PI), Gate::cz_phi(0, 1, -r), Gate::rx(0, PI)],
            r,
        )),
        None => {
            let center = 0.5 * (cfg.phase_min + cfg.phase_max);
            let (p1, p2) = (center + 0.5 * d, center - 0.5 * d);
            if !(cfg.in_range(p1) && cfg.in_range(p2)) {
                return Err(Error::InfeasibleSynthesis {
                    phase: c,
                    min: cfg.phase_min,
                    max: cfg.phase_max,
                });
            }
            Ok((
                vec![
                    Gate::cz_phi(0, 1, p1),
                    Gate::rx(0, PI),
                    Gate::cz_phi(0, 1, p2),
                    Gate::rx(0, PI),
                ],
                -p2,
            ))
        }
    }
}

fn zz_gates(theta: f64, cfg: &CompilerConfig) -> Result<Vec<Gate>> {
    if theta == 0.0 {
        return Ok(Vec::new());
    }
    let (mut gates, correction) = conditional_phase(-4.0 * theta, cfg)?;
    gates.push(Gate::rz(0, 2.0 * theta));
    gates.push(Gate::rz(1, 2.0 * theta + correction));
    Ok(gates)
}

fn xx_gates(theta: f64, cfg: &CompilerConfig) -> Result<Vec<Gate>> {
    if theta == 0.0 {
        return Ok(Vec::new());
    }
    let mut gates = vec![Gate::ry(0, -FRAC_PI_2), Gate::ry(1, -FRAC_PI_2)];
    gates.extend(zz_gates(theta, cfg)?);
    gates.extend([Gate::ry(0, FRAC_PI_2), Gate::ry(1, FRAC_PI_2)]);
    Ok(gates)
}

/// Two-qubit sequence equal to `exp(−iθ Z⊗Z)` up to global phase.
pub fn compile_zz(theta: f64, cfg: &CompilerConfig) -> Result<GateSequence> {
    check_angle(theta)?;
    cfg.validate()?;
    GateSequence::new(2, zz_gates(theta, cfg)?, Vec::new())
}

/// Two-qubit sequence equal to `exp(−iθ X⊗X)` up to global phase.
pub fn compile_xx(theta: f64, cfg: &CompilerConfig) -> Result<GateSequence> {
    check_angle(theta)?;
    cfg.validate()?;
    GateSequence::new(2, xx_gates(theta, cfg)?, Vec::new())
}

fn check_angle(theta: f64) -> Result<()> {
    if theta.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "rotation angle",
            value: theta,
        })
    }
}

fn step_gates(
    p: &SpinProblem,
    sched: &Schedule,
    m: usize,
    cfg: &CompilerConfig,
) -> Result<Vec<Gate>> {
    let dt = sched.time_step();
    let mut gates = Vec::new();
    for t in step_terms(p, sched, m, &DEFAULT_TERM_ORDER)? {
        let theta = dt * t.coefficient;
        match t.kind {
            TermKind::ZZ(b) => gates.extend(
                zz_gates(theta, cfg)?
                    .into_iter()
                    .map(|g| g.relabel(b, b + 1)),
            ),
            TermKind::XX(b) => gates.extend(
                xx_gates(theta, cfg)?
                    .into_iter()
                    .map(|g| g.relabel(b, b + 1)),
            ),
            TermKind::Z(i) => gates.push(Gate::rz(i, 2.0 * theta)),
            TermKind::X(i) => gates.push(Gate::rx(i, 2.0 * theta)),
        }
    }
    Ok(gates)
}

/// Gates of Trotter step `m` (1-based), in the evolution's term order.
pub fn compile_step(
    p: &SpinProblem,
    sched: &Schedule,
    m: usize,
    cfg: &CompilerConfig,
) -> Result<GateSequence> {
    cfg.validate()?;
    GateSequence::new(p.n, step_gates(p, sched, m, cfg)?, vec![0])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StepCount {
    pub step: usize,
    pub entangling: usize,
    pub single_qubit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateCountReport {
    pub entangling_count: usize,
    /// Includes the state-preparation rotations.
    pub single_qubit_count: usize,
    pub initialization: usize,
    pub per_step: Vec<StepCount>,
}

impl GateCountReport {
    pub fn from_sequence(seq: &GateSequence) -> Self {
        let count = |gates: &[Gate]| {
            let e = gates.iter().filter(|g| g.is_entangling()).count();
            (e, gates.len() - e)
        };
        let first = seq.step_markers.first().copied().unwrap_or(seq.gates.len());
        let per_step = (1..=seq.step_markers.len())
            .map(|m| {
                let (entangling, single_qubit) = count(seq.step(m));
                StepCount {
                    step: m,
                    entangling,
                    single_qubit,
                }
            })
            .collect();
        let (entangling_count, single_qubit_count) = count(&seq.gates);
        GateCountReport {
            entangling_count,
            single_qubit_count,
            initialization: first,
            per_step,
        }
    }
}

/// State preparation `RY(π/2)` on every qubit followed by all `M` steps.
pub fn compile_schedule(
    p: &SpinProblem,
    sched: &Schedule,
    cfg: &CompilerConfig,
) -> Result<(GateSequence, GateCountReport)> {
    cfg.validate()?;
    p.validate()?;
    sched.validate()?;
    let mut gates: Vec<Gate> = (0..p.n).map(|q| Gate::ry(q, FRAC_PI_2)).collect();
    let mut markers = Vec::with_capacity(sched.steps);
    for m in 1..=sched.steps {
        markers.push(gates.len());
        gates.extend(step_gates(p, sched, m, cfg)?);
    }
    let seq = GateSequence::new(p.n, gates, markers)?;
    let report = GateCountReport::from_sequence(&seq);
    Ok((seq, report))
}

fn apply_single(amps: &mut [Complex64], q: usize, u: [[Complex64; 2]; 2]) {
    let bit = 1usize << q;
    for k in 0..amps.len() {
        if k & bit == 0 {
            let (a0, a1) = (amps[k], amps[k | bit]);
            amps[k] = u[0][0] * a0 + u[0][1] * a1;
            amps[k | bit] = u[1][0] * a0 + u[1][1] * a1;
        }
    }
}

/// 2×2 matrix of a single-qubit gate.
pub fn single_qubit_matrix(gate: &Gate) -> Option<[[Complex64; 2]; 2]> {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match *gate {
        Gate::Rx { angle, .. } => {
            let (s, co) = (0.5 * angle).sin_cos();
            Some([[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]])
        }
        Gate::Ry { angle, .. } => {
            let (s, co) = (0.5 * angle).sin_cos();
            Some([[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]])
        }
        Gate::Rz { angle, .. } => Some([
            [Complex64::from_polar(1.0, -0.5 * angle), c(0.0, 0.0)],
            [c(0.0, 0.0), Complex64::from_polar(1.0, 0.5 * angle)],
        ]),
        Gate::CzPhi { .. } => None,
    }
}

/// Applies `seq` to `initial` gate by gate.
pub fn simulate_gates(seq: &GateSequence, initial: &StateVector) -> Result<StateVector> {
    if initial.n() != seq.n {
        return Err(Error::DimensionMismatch {
            expected: 1 << seq.n,
            found: initial.dim(),
        });
    }
    let mut state = initial.clone();
    let amps = state.amplitudes_mut();
    for g in &seq.gates {
        match *g {
            Gate::Rx { qubit, .. } | Gate::Ry { qubit, .. } | Gate::Rz { qubit, .. } => {
                apply_single(
                    amps,
                    qubit,
                    single_qubit_matrix(g).expect("single-qubit gate"),
                );
            }
            Gate::CzPhi { a, b, phase } => {
                let mask = (1usize << a) | (1usize << b);
                let factor = Complex64::from_polar(1.0, phase);
                for (k, x) in amps.iter_mut().enumerate() {
                    if k & mask == mask {
                        *x *= factor;
                    }
                }
            }
        }
    }
    Ok(state)
}

/// Text form: a header comment, `QUBITS n`, then one gate per line with
/// `STEP m` lines before each step. Angles use the shortest representation
/// that round-trips exactly.
pub fn serialize_sequence(seq: &GateSequence) -> String {
    let mut out = String::new();
    out.push_str("# gate sequence\n");
    writeln!(out, "QUBITS {}", seq.n).unwrap();
    let mut markers = seq.step_markers.iter().enumerate().peekable();
    for (i, g) in seq.gates.iter().enumerate() {
        while let Some((m, _)) = markers.next_if(|&(_, &start)| start == i) {
            writeln!(out, "STEP {}", m + 1).unwrap();
        }
        writeln!(out, "{g}").unwrap();
    }
    for (m, _) in markers {
        writeln!(out, "STEP {}", m + 1).unwrap();
    }
    out
}

/// Parses the text form. Without a `QUBITS` line the qubit count is one
/// more than the largest index used.
pub fn parse_sequence(text: &str) -> Result<GateSequence> {
    let mut n: Option<usize> = None;
    let mut gates = Vec::new();
    let mut markers = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("");
        let mut fields = line.split_whitespace();
        let Some(op) = fields.next() else { continue };
        let column_of = |field: &str| raw.find(field).map_or(1, |c| c + 1);
        let err = |column: usize, message: String| Error::Parse {
            line: line_no,
            column,
            message,
        };
        let args: Vec<&str> = fields.collect();
        let expect = |count: usize| -> Result<()> {
            if args.len() == count {
                Ok(())
            } else {
                Err(err(
                    column_of(op),
                    format!("{op} takes {count} argument(s), found {}", args.len()),
                ))
            }
        };
        let int = |s: &str| -> Result<usize> {
            s.parse::<usize>().map_err(|_| {
                err(
                    column_of(s),
                    format!("expected a non-negative integer, found `{s}`"),
                )
            })
        };
        let real = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| {
                    err(
                        column_of(s),
                        format!("expected a finite number, found `{s}`"),
                    )
                })
        };
        match op {
            "QUBITS" => {
                expect(1)?;
                if n.is_some() || !gates.is_empty() || !markers.is_empty() {
                    return Err(err(
                        column_of(op),
                        "QUBITS must come first and only once".into(),
                    ));
                }
                n = Some(int(args[0])?);
            }
            "STEP" => {
                expect(1)?;
                let m = int(args[0])?;
                if m != markers.len() + 1 {
                    return Err(err(
                        column_of(args[0]),
                        format!("expected STEP {}, found STEP {m}", markers.len() + 1),
                    ));
                }
                markers.push(gates.len());
            }
            "RX" | "RY" | "RZ" => {
                expect(2)?;
                let (q, angle) = (int(args[0])?, real(args[1])?);
                // Keep the written angle bit-for-bit; it is canonical when
                // produced by the compiler.
                gates.push(match op {
                    "RX" => Gate::Rx { qubit: q, angle },
                    "RY" => Gate::Ry { qubit: q, angle },
                    _ => Gate::Rz { qubit: q, angle },
                });
            }
            "CZPHI" => {
                expect(3)?;
                gates.push(Gate::cz_phi(int(args[0])?, int(args[1])?, real(args[2])?));
            }
            other => {
                return Err(err(
                    column_of(other),
                    format!("unknown instruction `{other}`"),
                ));
            }
        }
    }
    let n = n.unwrap_or_else(|| gates.iter().map(|g| g.max_qubit() + 1).max().unwrap_or(0));
    GateSequence::new(n, gates, markers)
}
