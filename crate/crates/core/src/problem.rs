//! Spin problems, annealing schedules and instance generation.
//!
//! A [`SpinProblem`] is an open chain with per-site longitudinal and
//! transverse fields and nearest-neighbour `ZZ`/`XX` couplings. Values are the
//! physical strengths; the minus signs of the Hamiltonian are applied in
//! [`crate::hamiltonian`].

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_SITES: usize = 2;
pub const MAX_SITES: usize = 12;

/// Tag recorded alongside generated instances. Bump whenever the draw order
/// or the generator changes.
pub const GENERATOR_VERSION: &str = "chacha8-v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinProblem {
    pub n: usize,
    pub b_z: Vec<f64>,
    pub b_x: Vec<f64>,
    pub j_zz: Vec<f64>,
    pub j_xx: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    SiteCountBelowMin(usize),
    SiteCountAboveMax(usize),
    SiteArrayLength {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    BondArrayLength {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    NonFinite {
        field: &'static str,
        index: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SiteCountBelowMin(n) => {
                write!(f, "site count below {MIN_SITES} (n = {n})")
            }
            Violation::SiteCountAboveMax(n) => {
                write!(f, "site count above {MAX_SITES} (n = {n})")
            }
            Violation::SiteArrayLength {
                field,
                expected,
                found,
            } => write!(
                f,
                "site array length: `{field}` has {found} entries, expected {expected}"
            ),
            Violation::BondArrayLength {
                field,
                expected,
                found,
            } => write!(
                f,
                "bond array length: `{field}` has {found} entries, expected {expected}"
            ),
            Violation::NonFinite { field, index } => {
                write!(f, "non-finite entry `{field}[{index}]`")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    Stoquastic,
    NonStoquastic,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ProblemKind::Stoquastic => "stoquastic",
            ProblemKind::NonStoquastic => "non-stoquastic",
        }
    }
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stoquastic" | "stoq" => Ok(ProblemKind::Stoquastic),
            "non-stoquastic" | "nonstoq" => Ok(ProblemKind::NonStoquastic),
            other => Err(Error::Config(format!("unknown problem kind `{other}`"))),
        }
    }
}

impl SpinProblem {
    /// Builds and validates a problem; `n` is taken from `b_z`.
    pub fn new(b_z: Vec<f64>, b_x: Vec<f64>, j_zz: Vec<f64>, j_xx: Vec<f64>) -> Result<Self> {
        let p = SpinProblem {
            n: b_z.len(),
            b_z,
            b_x,
            j_zz,
            j_xx,
        };
        p.validate()?;
        Ok(p)
    }

    /// Field-free chain with the same `ZZ` coupling on every bond. Positive
    /// `j` is ferromagnetic.
    pub fn uniform_chain(n: usize, j: f64) -> Result<Self> {
        let bonds = n.saturating_sub(1);
        SpinProblem::new(vec![0.0; n], vec![0.0; n], vec![j; bonds], vec![0.0; bonds])
    }

    pub fn bonds(&self) -> usize {
        self.n.saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn is_stoquastic(&self) -> bool {
        self.j_xx.iter().all(|&j| j == 0.0)
    }

    pub fn kind(&self) -> ProblemKind {
        if self.is_stoquastic() {
            ProblemKind::Stoquastic
        } else {
            ProblemKind::NonStoquastic
        }
    }

    /// All invariant violations; empty when the problem is well formed.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.n < MIN_SITES {
            out.push(Violation::SiteCountBelowMin(self.n));
        }
        if self.n > MAX_SITES {
            out.push(Violation::SiteCountAboveMax(self.n));
        }
        let bonds = self.bonds();
        for (field, values) in [("b_z", &self.b_z), ("b_x", &self.b_x)] {
            if values.len() != self.n {
                out.push(Violation::SiteArrayLength {
                    field,
                    expected: self.n,
                    found: values.len(),
                });
            }
        }
        for (field, values) in [("j_zz", &self.j_zz), ("j_xx", &self.j_xx)] {
            if values.len() != bonds {
                out.push(Violation::BondArrayLength {
                    field,
                    expected: bonds,
                    found: values.len(),
                });
            }
        }
        for (field, values) in [
            ("b_z", &self.b_z),
            ("b_x", &self.b_x),
            ("j_zz", &self.j_zz),
            ("j_xx", &self.j_xx),
        ] {
            for (index, v) in values.iter().enumerate() {
                if !v.is_finite() {
                    out.push(Violation::NonFinite { field, index });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidProblem(v))
        }
    }
}

/// How the time-dependent coefficients are evaluated inside a product-formula
/// step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sampling {
    /// `s_m = m / M`.
    Endpoint,
    /// `s_m = (m - 1/2) / M`.
    Midpoint,
    /// Each coefficient replaced by its average over the step.
    #[serde(rename = "integral")]
    IntegralAverage,
}

impl Sampling {
    pub fn as_str(self) -> &'static str {
        match self {
            Sampling::Endpoint => "endpoint",
            Sampling::Midpoint => "midpoint",
            Sampling::IntegralAverage => "integral",
        }
    }
}

impl fmt::Display for Sampling {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Sampling {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "endpoint" => Ok(Sampling::Endpoint),
            "midpoint" => Ok(Sampling::Midpoint),
            "integral" | "integral-average" => Ok(Sampling::IntegralAverage),
            other => Err(Error::Config(format!("unknown sampling mode `{other}`"))),
        }
    }
}

/// Linear annealing schedule `s(t) = t / T` digitized into `steps` slices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub total_time: f64,
    pub steps: usize,
    pub b_x_init: f64,
    pub sampling: Sampling,
}

pub const DEFAULT_B_X_INIT: f64 = 2.0;

/// Midpoint sampling reproduces the reference digital fidelities; see README.
pub const DEFAULT_SAMPLING: Sampling = Sampling::Midpoint;

impl Schedule {
    pub fn new(total_time: f64, steps: usize) -> Result<Self> {
        let s = Schedule {
            total_time,
            steps,
            b_x_init: DEFAULT_B_X_INIT,
            sampling: DEFAULT_SAMPLING,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }

    pub fn with_b_x_init(mut self, b_x_init: f64) -> Self {
        self.b_x_init = b_x_init;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_time.is_finite() && self.total_time >= 0.0) {
            return Err(Error::OutOfRange {
                what: "total time",
                value: self.total_time,
            });
        }
        if self.steps == 0 {
            return Err(Error::OutOfRange {
                what: "step count",
                value: 0.0,
            });
        }
        if !self.b_x_init.is_finite() {
            return Err(Error::OutOfRange {
                what: "initial transverse field",
                value: self.b_x_init,
            });
        }
        Ok(())
    }

    pub fn time_step(&self) -> f64 {
        self.total_time / self.steps as f64
    }

    /// Effective interpolation parameter used for step `m` (1-based).
    ///
    /// Every coefficient of `H(s)` is affine in `s`, so the step average of a
    /// coefficient equals the coefficient evaluated at the averaged `s`. The
    /// integral mode therefore averages the step's `s` endpoints.
    pub fn step_parameter(&self, m: usize) -> f64 {
        debug_assert!((1..=self.steps).contains(&m));
        let big_m = self.steps as f64;
        let m = m as f64;
        match self.sampling {
            Sampling::Endpoint => m / big_m,
            Sampling::Midpoint => (m - 0.5) / big_m,
            Sampling::IntegralAverage => 0.5 * ((m - 1.0) / big_m + m / big_m),
        }
    }
}

/// Draws a random problem: fields uniform on `[-2, 2]`, coupling magnitudes
/// uniform on `[0.5, 2]` with an independent fair sign.
///
/// The generator is ChaCha8 seeded with `seed`; floats are formed from the top
/// 53 bits of each `u64` draw, so output is identical on every platform. Draw
/// order: `b_z`, `b_x`, then magnitude/sign pairs for `j_zz`, then `j_xx`.
pub fn generate_random_problem(n: usize, kind: ProblemKind, seed: u64) -> Result<SpinProblem> {
    if !(MIN_SITES..=MAX_SITES).contains(&n) {
        return Err(Error::OutOfRange {
            what: "site count",
            value: n as f64,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b_z = (0..n).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();
    let b_x = (0..n).map(|_| uniform(&mut rng, -2.0, 2.0)).collect();
    let j_zz = (0..n - 1).map(|_| coupling(&mut rng)).collect();
    let j_xx = match kind {
        ProblemKind::Stoquastic => vec![0.0; n - 1],
        ProblemKind::NonStoquastic => (0..n - 1).map(|_| coupling(&mut rng)).collect(),
    };
    SpinProblem::new(b_z, b_x, j_zz, j_xx)
}

fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * unit(rng)
}

fn coupling(rng: &mut ChaCha8Rng) -> f64 {
    let magnitude = uniform(rng, 0.5, 2.0);
    if rng.next_u64() >> 63 == 1 {
        -magnitude
    } else {
        magnitude
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceEntry {
    pub id: usize,
    pub seed: u64,
    pub kind: ProblemKind,
    pub problem: SpinProblem,
}

/// Reproducible batch of generated instances.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstanceSet {
    pub generator_version: String,
    pub instances: Vec<InstanceEntry>,
}

impl ProblemInstanceSet {
    /// Seeds must be distinct.
    pub fn generate(n: usize, kind: ProblemKind, seeds: &[u64]) -> Result<Self> {
        let mut sorted = seeds.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("instance seeds must be distinct".into()));
        }
        let instances = seeds
            .iter()
            .enumerate()
            .map(|(id, &seed)| {
                Ok(InstanceEntry {
                    id,
                    seed,
                    kind,
                    problem: generate_random_problem(n, kind, seed)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProblemInstanceSet {
            generator_version: GENERATOR_VERSION.to_string(),
            instances,
        })
    }

    /// `count` consecutive seeds starting at `seed_base`.
    pub fn generate_range(
        n: usize,
        kind: ProblemKind,
        seed_base: u64,
        count: usize,
    ) -> Result<Self> {
        let seeds: Vec<u64> = (0..count as u64)
            .map(|i| seed_base.wrapping_add(i))
            .collect();
        Self::generate(n, kind, &seeds)
    }

    /// True when every instance regenerates bit-identically from its seed.
    pub fn verify(&self) -> bool {
        self.generator_version == GENERATOR_VERSION
            && self.instances.iter().all(|e| {
                generate_random_problem(e.problem.n, e.kind, e.seed)
                    .map(|p| bitwise_eq(&p, &e.problem))
                    .unwrap_or(false)
            })
    }
}

fn bitwise_eq(a: &SpinProblem, b: &SpinProblem) -> bool {
    let same = |x: &[f64], y: &[f64]| {
        x.len() == y.len() && x.iter().zip(y).all(|(u, v)| u.to_bits() == v.to_bits())
    };
    a.n == b.n
        && same(&a.b_z, &b.b_z)
        && same(&a.b_x, &b.b_x)
        && same(&a.j_zz, &b.j_zz)
        && same(&a.j_xx, &b.j_xx)
}

/// Names of the built-in reference instances.
pub const BUILTIN_NAMES: [&str; 6] = [
    "s3-9q-stoq",
    "s4-3q-stoq",
    "s5-3q-nonstoq",
    "s6-6q-stoq",
    "s7-6q-nonstoq",
    "s8-7q-nonstoq",
];

/// One of the built-in reference instances.
pub fn builtin_instance(name: &str) -> Result<SpinProblem> {
    let (b_x, b_z, j_zz, j_xx): (&[f64], &[f64], &[f64], &[f64]) = match name {
        "s3-9q-stoq" => (
            &[
                1.437, 0.749, 0.912, 1.153, 1.523, 1.670, 1.621, 1.930, -0.899,
            ],
            &[
                -0.559, -1.078, -1.822, -0.407, 0.652, 1.675, 1.362, 0.302, -0.187,
            ],
            &[-0.781, -1.672, 0.520, 0.635, 0.812, -0.816, 1.162, 0.639],
            &[0.0; 8],
        ),
        "s4-3q-stoq" => (
            &[-0.159, 1.22, -1.93],
            &[-1.29, -1.45, -0.772],
            &[-1.09, 1.16],
            &[0.0; 2],
        ),
        "s5-3q-nonstoq" => (
            &[-1.18, -1.71, 1.02],
            &[-0.875, 0.781, -0.428],
            &[-0.757, 1.32],
            &[-0.841, 1.02],
        ),
        "s6-6q-stoq" => (
            &[0.155, -1.238, 1.789, 0.899, -1.501, -1.309],
            &[0.468, -1.577, -1.183, -0.665, -0.928, -1.265],
            &[1.476, -0.740, -0.765, -0.535, -0.966],
            &[0.0; 5],
        ),
        "s7-6q-nonstoq" => (
            &[-0.255, 0.606, -1.735, 0.732, 1.586, -0.305],
            &[-1.672, -1.282, -1.532, -1.433, 1.282, -1.765],
            &[-1.491, 1.349, 0.628, 1.287, 1.919],
            &[0.577, -1.954, -1.616, -1.517, -1.896],
        ),
        "s8-7q-nonstoq" => (
            &[-1.335, 0.760, -1.261, -0.221, -0.892, -1.321, 0.133],
            &[-1.026, -1.896, 0.116, -0.619, -0.493, -1.316, -1.872],
            &[-1.455, -0.588, -0.582, 1.223, -0.635, 0.614],
            &[1.891, 1.517, 1.568, 0.748, 1.419, -0.839],
        ),
        other => {
            return Err(Error::UnknownInstance {
                name: other.to_string(),
                valid: BUILTIN_NAMES.to_vec(),
            })
        }
    };
    SpinProblem::new(b_z.to_vec(), b_x.to_vec(), j_zz.to_vec(), j_xx.to_vec())
}

/// Schedule the reference instance was run with: `T = 3, M = 5` up to six
/// qubits, `T = 1, M = 2` above.
pub fn builtin_schedule(name: &str) -> Result<Schedule> {
    let p = builtin_instance(name)?;
    if p.n <= 6 {
        Schedule::new(3.0, 5)
    } else {
        Schedule::new(1.0, 2)
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScheduleDocument {
    #[serde(rename = "T")]
    total_time: f64,
    #[serde(rename = "M")]
    steps: usize,
    #[serde(default = "default_b_x_init")]
    b_x_init: f64,
    #[serde(default = "default_sampling")]
    sampling: Sampling,
}

fn default_b_x_init() -> f64 {
    DEFAULT_B_X_INIT
}

fn default_sampling() -> Sampling {
    DEFAULT_SAMPLING
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemDocument {
    n: usize,
    b_z: Vec<f64>,
    b_x: Vec<f64>,
    j_zz: Vec<f64>,
    j_xx: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schedule: Option<ScheduleDocument>,
}

/// Serializes a problem (and optional schedule) as a JSON document. Floats are
/// written in shortest round-trip form, so `load_problem` restores them
/// exactly.
pub fn save_problem(p: &SpinProblem, schedule: Option<&Schedule>) -> Result<String> {
    p.validate()?;
    let doc = ProblemDocument {
        n: p.n,
        b_z: p.b_z.clone(),
        b_x: p.b_x.clone(),
        j_zz: p.j_zz.clone(),
        j_xx: p.j_xx.clone(),
        schedule: schedule.map(|s| ScheduleDocument {
            total_time: s.total_time,
            steps: s.steps,
            b_x_init: s.b_x_init,
            sampling: s.sampling,
        }),
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse {
        line: 0,
        column: 0,
        message: e.to_string(),
    })
}

pub fn load_problem(text: &str) -> Result<(SpinProblem, Option<Schedule>)> {
    let doc: ProblemDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let p = SpinProblem {
        n: doc.n,
        b_z: doc.b_z,
        b_x: doc.b_x,
        j_zz: doc.j_zz,
        j_xx: doc.j_xx,
    };
    p.validate()?;
    let schedule = doc
        .schedule
        .map(|s| {
            let sched = Schedule {
                total_time: s.total_time,
                steps: s.steps,
                b_x_init: s.b_x_init,
                sampling: s.sampling,
            };
            sched.validate().map(|_| sched)
        })
        .transpose()?;
    Ok((p, schedule))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_site() -> SpinProblem {
        SpinProblem {
            n: 3,
            b_z: vec![0.1, 0.2, 0.3],
            b_x: vec![0.0; 3],
            j_zz: vec![1.0, -1.0],
            j_xx: vec![0.0; 2],
        }
    }

    #[test]
    fn well_formed_problem_validates() {
        assert!(three_site().violations().is_empty());
    }

    #[test]
    fn wrong_bond_length_is_reported() {
        let mut p = three_site();
        p.j_zz = vec![1.0; 3];
        let v = p.violations();
        assert_eq!(v.len(), 1);
        assert!(v[0].to_string().starts_with("bond array length"));
    }

    #[test]
    fn single_site_is_reported() {
        let p = SpinProblem {
            n: 1,
            b_z: vec![0.0],
            b_x: vec![0.0],
            j_zz: vec![],
            j_xx: vec![],
        };
        let v = p.violations();
        assert!(v
            .iter()
            .any(|v| v.to_string().starts_with("site count below 2")));
    }

    #[test]
    fn non_finite_entries_are_reported() {
        let mut p = three_site();
        p.b_x[1] = f64::NAN;
        assert_eq!(
            p.violations(),
            vec![Violation::NonFinite {
                field: "b_x",
                index: 1
            }]
        );
    }

    #[test]
    fn stoquastic_flag_follows_xx_couplings() {
        let mut p = three_site();
        assert_eq!(p.kind(), ProblemKind::Stoquastic);
        p.j_xx[0] = 1e-300;
        assert_eq!(p.kind(), ProblemKind::NonStoquastic);
    }

    #[test]
    fn generator_bounds() {
        let p = generate_random_problem(6, ProblemKind::Stoquastic, 1).unwrap();
        assert!(p.j_zz.iter().all(|j| (0.5..=2.0).contains(&j.abs())));
        assert!(p.j_xx.iter().all(|&j| j == 0.0));

        let q = generate_random_problem(3, ProblemKind::NonStoquastic, 7).unwrap();
        assert!(q.j_xx.iter().all(|j| (0.5..=2.0).contains(&j.abs())));
        assert_eq!(q.kind(), ProblemKind::NonStoquastic);
    }

    #[test]
    fn generator_rejects_bad_sizes() {
        assert!(generate_random_problem(1, ProblemKind::Stoquastic, 0).is_err());
        assert!(generate_random_problem(13, ProblemKind::Stoquastic, 0).is_err());
    }

    #[test]
    fn coupling_magnitude_mean() {
        // E|J| for |J| ~ U[0.5, 2] is 1.25.
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let draws = 100_000;
        let mean: f64 = (0..draws).map(|_| coupling(&mut rng).abs()).sum::<f64>() / draws as f64;
        assert!((mean - 1.25).abs() < 0.01, "mean |J| = {mean}");
    }

    #[test]
    fn coupling_signs_are_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let neg = (0..20_000).filter(|_| coupling(&mut rng) < 0.0).count();
        assert!((9_500..10_500).contains(&neg), "{neg} negative draws");
    }

    #[test]
    fn generator_support() {
        for seed in 0..1_000u64 {
            let p = generate_random_problem(11, ProblemKind::NonStoquastic, seed).unwrap();
            for j in p.j_zz.iter().chain(&p.j_xx) {
                assert!((0.5..=2.0).contains(&j.abs()));
            }
            for b in p.b_z.iter().chain(&p.b_x) {
                assert!(b.abs() <= 2.0);
            }
        }
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_random_problem(9, ProblemKind::NonStoquastic, 1234).unwrap();
        let b = generate_random_problem(9, ProblemKind::NonStoquastic, 1234).unwrap();
        assert!(bitwise_eq(&a, &b));
        let c = generate_random_problem(9, ProblemKind::NonStoquastic, 1235).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn instance_set_regenerates() {
        let set = ProblemInstanceSet::generate_range(6, ProblemKind::Stoquastic, 100, 20).unwrap();
        assert_eq!(set.instances.len(), 20);
        assert!(set.verify());
        assert!(ProblemInstanceSet::generate(3, ProblemKind::Stoquastic, &[1, 2, 1]).is_err());
    }

    #[test]
    fn builtin_values() {
        let s4 = builtin_instance("s4-3q-stoq").unwrap();
        assert_eq!(s4.b_x, vec![-0.159, 1.22, -1.93]);
        assert_eq!(s4.b_z, vec![-1.29, -1.45, -0.772]);
        assert_eq!(s4.j_zz, vec![-1.09, 1.16]);
        assert!(s4.is_stoquastic());

        let s6 = builtin_instance("s6-6q-stoq").unwrap();
        assert_eq!(s6.j_zz, vec![1.476, -0.740, -0.765, -0.535, -0.966]);

        let s5 = builtin_instance("s5-3q-nonstoq").unwrap();
        assert_eq!(s5.j_xx, vec![-0.841, 1.02]);
        assert_eq!(s5.j_zz, vec![-0.757, 1.32]);

        for name in BUILTIN_NAMES {
            assert!(builtin_instance(name).is_ok(), "{name}");
        }
        assert_eq!(builtin_instance("s3-9q-stoq").unwrap().n, 9);
        assert_eq!(builtin_instance("s8-7q-nonstoq").unwrap().n, 7);
    }

    #[test]
    fn unknown_builtin_lists_names() {
        let err = builtin_instance("nope").unwrap_err().to_string();
        assert!(err.contains("s4-3q-stoq"), "{err}");
    }

    #[test]
    fn builtin_schedules_follow_size() {
        let s = builtin_schedule("s6-6q-stoq").unwrap();
        assert_eq!((s.total_time, s.steps), (3.0, 5));
        let s = builtin_schedule("s3-9q-stoq").unwrap();
        assert_eq!((s.total_time, s.steps), (1.0, 2));
    }

    #[test]
    fn step_parameters() {
        let s = Schedule::new(3.0, 5).unwrap();
        let end = s.with_sampling(Sampling::Endpoint);
        assert_eq!(end.step_parameter(1), 0.2);
        assert_eq!(end.step_parameter(5), 1.0);
        let mid = s.with_sampling(Sampling::Midpoint);
        assert!((mid.step_parameter(1) - 0.1).abs() < 1e-15);
        let int = s.with_sampling(Sampling::IntegralAverage);
        for m in 1..=5 {
            assert!((int.step_parameter(m) - mid.step_parameter(m)).abs() < 1e-15);
        }
    }

    #[test]
    fn round_trip_document() {
        let p = builtin_instance("s4-3q-stoq").unwrap();
        let sched = Schedule::new(3.0, 5)
            .unwrap()
            .with_sampling(Sampling::Endpoint);
        let text = save_problem(&p, Some(&sched)).unwrap();
        let (q, s) = load_problem(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(Some(sched), s);
    }

    #[test]
    fn missing_field_is_named() {
        let text = r#"{"n": 2, "b_z": [0, 0], "b_x": [0, 0], "j_xx": [0]}"#;
        let err = load_problem(text).unwrap_err().to_string();
        assert!(err.contains("j_zz"), "{err}");
    }

    #[test]
    fn bad_lengths_fail_validation() {
        let text = r#"{"n": 3, "b_z": [0,0,0], "b_x": [0,0,0], "j_zz": [1,1,1], "j_xx": [0,0]}"#;
        match load_problem(text) {
            Err(Error::InvalidProblem(v)) => assert!(matches!(
                v[0],
                Violation::BondArrayLength { field: "j_zz", .. }
            )),
            other => panic!("unexpected {other:?}"),
        }
    }
}
