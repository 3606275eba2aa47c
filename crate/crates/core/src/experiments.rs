//! Experiment presets and batch drivers. Everything here is a pure function
//! of its arguments; the CLI turns the returned rows into files.

use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::evolution::{evolve_continuous, evolve_digital_with, DigitalOptions, IntegratorConfig};
use crate::hamiltonian::{build_h_problem, diagonalize, target_state};
use crate::metrics::{
    fidelity_pure, kink_profile, magnetization, parity_correlation, success_measure,
    uniform_baseline, Distribution,
};
use crate::problem::{
    builtin_instance, builtin_schedule, InstanceEntry, ProblemInstanceSet, ProblemKind, Sampling,
    Schedule, SpinProblem, BUILTIN_NAMES,
};
use crate::state::StateVector;

/// Environment variable capping the batch worker count.
pub const THREADS_ENV: &str = "DAQSIM_THREADS";

/// Version tag of the CSV layouts written by the CLI.
pub const CSV_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    GhzFig2,
    ScalingFig3,
    DegeneracyFig4,
    RandomFig5,
    InstancesTableS10,
}

pub const PRESET_NAMES: [&str; 5] = [
    "ghz-fig2",
    "scaling-fig3",
    "degeneracy-fig4",
    "random-fig5",
    "instances-tableS10",
];

impl Preset {
    pub fn as_str(self) -> &'static str {
        match self {
            Preset::GhzFig2 => PRESET_NAMES[0],
            Preset::ScalingFig3 => PRESET_NAMES[1],
            Preset::DegeneracyFig4 => PRESET_NAMES[2],
            Preset::RandomFig5 => PRESET_NAMES[3],
            Preset::InstancesTableS10 => PRESET_NAMES[4],
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ghz-fig2" => Ok(Preset::GhzFig2),
            "scaling-fig3" => Ok(Preset::ScalingFig3),
            "degeneracy-fig4" => Ok(Preset::DegeneracyFig4),
            "random-fig5" => Ok(Preset::RandomFig5),
            "instances-tableS10" => Ok(Preset::InstancesTableS10),
            other => Err(Error::UnknownInstance {
                name: other.to_string(),
                valid: PRESET_NAMES.to_vec(),
            }),
        }
    }
}

/// Formats a float with 12 significant digits in the style of C's `%.12g`.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    const DIGITS: i32 = 12;
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..DIGITS).contains(&exp) {
        trim(format!("{:.*}", (DIGITS - 1 - exp) as usize, x))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{}{:02}", trim(mantissa.to_string()), sign, exp.abs())
    }
}

/// `mode` column of rows comparing digital, continuous and target states.
pub const COMPARE_MODE: &str = "compare";

/// One named scalar result with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub instance_id: String,
    pub seed: Option<u64>,
    pub kind: String,
    pub n: usize,
    pub total_time: f64,
    pub steps: usize,
    /// Evolution mode the value refers to, or [`COMPARE_MODE`] for overlaps
    /// between modes.
    pub mode: String,
    pub metric: String,
    pub value: f64,
}

impl MetricsRecord {
    pub const HEADER: [&'static str; 9] = [
        "instance_id",
        "seed",
        "kind",
        "n",
        "T",
        "M",
        "mode",
        "metric",
        "value",
    ];

    pub fn fields(&self) -> [String; 9] {
        [
            self.instance_id.clone(),
            self.seed.map(|s| s.to_string()).unwrap_or_default(),
            self.kind.clone(),
            self.n.to_string(),
            format_float(self.total_time),
            self.steps.to_string(),
            self.mode.clone(),
            self.metric.clone(),
            format_float(self.value),
        ]
    }
}

/// Worker count from [`THREADS_ENV`], defaulting to the available cores.
pub fn worker_count() -> Result<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(Error::Config(format!(
                "{THREADS_ENV} must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

/// Maps `f` over `items` on `workers` threads. Output order matches input
/// order regardless of scheduling.
pub fn run_batch<I, R, F>(items: &[I], workers: usize, f: F) -> Result<Vec<R>>
where
    I: Sync,
    R: Send,
    F: Fn(&I) -> R + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Overlap {
    pub success: f64,
    pub fidelity: f64,
}

impl Overlap {
    fn between(a: &StateVector, b: &StateVector) -> Result<Self> {
        Ok(Overlap {
            success: success_measure(&Distribution::from_state(a)?, &Distribution::from_state(b)?)?,
            fidelity: fidelity_pure(a, b)?,
        })
    }
}

/// Final states of one instance and their pairwise overlaps.
#[derive(Debug, Clone)]
pub struct InstanceComparison {
    pub digital: StateVector,
    pub continuous: StateVector,
    pub target: StateVector,
    pub digital_vs_continuous: Overlap,
    pub digital_vs_target: Overlap,
    pub continuous_vs_target: Overlap,
    /// Success measure of the uniform distribution against the target.
    pub uniform_vs_target: f64,
}

impl InstanceComparison {
    /// Pair labels and overlaps in reporting order.
    pub fn pairs(&self) -> [(&'static str, Overlap); 3] {
        [
            ("digital_continuous", self.digital_vs_continuous),
            ("digital_target", self.digital_vs_target),
            ("continuous_target", self.continuous_vs_target),
        ]
    }

    pub fn records(
        &self,
        instance_id: &str,
        seed: Option<u64>,
        kind: ProblemKind,
        sched: &Schedule,
    ) -> Vec<MetricsRecord> {
        let n = self.target.n();
        let record = |metric: String, value: f64| MetricsRecord {
            instance_id: instance_id.to_string(),
            seed,
            kind: kind.as_str().to_string(),
            n,
            total_time: sched.total_time,
            steps: sched.steps,
            mode: COMPARE_MODE.to_string(),
            metric,
            value,
        };
        let mut out = Vec::with_capacity(7);
        for (label, o) in self.pairs() {
            out.push(record(format!("success_{label}"), o.success));
            out.push(record(format!("fidelity_{label}"), o.fidelity));
        }
        out.push(record(
            "success_uniform_target".into(),
            self.uniform_vs_target,
        ));
        out
    }
}

/// Evolves `p` digitally and continuously and compares both with the target.
pub fn compare_instance(
    p: &SpinProblem,
    sched: &Schedule,
    cfg: &IntegratorConfig,
) -> Result<InstanceComparison> {
    let digital = evolve_digital_with(p, sched, &DigitalOptions::default())?.final_state;
    let continuous = evolve_continuous(p, sched, cfg, &[])?.final_state;
    let target = target_state(p)?;
    Ok(InstanceComparison {
        digital_vs_continuous: Overlap::between(&digital, &continuous)?,
        digital_vs_target: Overlap::between(&digital, &target)?,
        continuous_vs_target: Overlap::between(&continuous, &target)?,
        uniform_vs_target: success_measure(
            &uniform_baseline(p.n),
            &Distribution::from_state(&target)?,
        )?,
        digital,
        continuous,
        target,
    })
}

/// Reference ferromagnetic chain of the GHZ experiment.
pub fn ghz_problem() -> SpinProblem {
    SpinProblem::uniform_chain(4, 2.0).expect("valid chain")
}

pub fn ghz_schedule(sampling: Sampling) -> Schedule {
    Schedule::new(3.0, 5)
        .expect("valid schedule")
        .with_sampling(sampling)
}

#[derive(Debug, Clone)]
pub struct GhzReport {
    pub schedule: Schedule,
    pub target: StateVector,
    /// States at `s = m/M`, `m = 0..M`.
    pub digital: Vec<(f64, StateVector)>,
    pub continuous: Vec<(f64, StateVector)>,
    pub comparison: InstanceComparison,
}

pub fn ghz_fig2(sampling: Sampling, cfg: &IntegratorConfig) -> Result<GhzReport> {
    let p = ghz_problem();
    let sched = ghz_schedule(sampling);
    let digital = evolve_digital_with(
        &p,
        &sched,
        &DigitalOptions {
            trajectory: true,
            ..DigitalOptions::default()
        },
    )?
    .trajectory;
    let checkpoints: Vec<f64> = digital.iter().map(|(s, _)| *s).collect();
    let continuous = evolve_continuous(&p, &sched, cfg, &checkpoints)?.trajectory;
    let comparison = compare_instance(&p, &sched, cfg)?;
    Ok(GhzReport {
        schedule: sched,
        target: comparison.target.clone(),
        digital,
        continuous,
        comparison,
    })
}

/// Default step count of the scaling runs for an `n`-site chain.
pub fn scaling_steps(n: usize) -> usize {
    if n <= 6 {
        5
    } else {
        2
    }
}

/// Uniform grid of `points` values on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|k| lo + (hi - lo) * k as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// Default scaled-time grid `|J|T ∈ [0, 3]`.
pub fn scaling_grid() -> Vec<f64> {
    linear_grid(0.0, 3.0, 13)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingPoint {
    pub n: usize,
    /// Scaled time `|J|T`.
    pub scaled_time: f64,
    pub mode: &'static str,
    pub steps: usize,
    pub kink_likelihood: Vec<f64>,
    pub expected_kinks: f64,
    pub residual_energy: f64,
}

/// Kink statistics and residual energy of the ferromagnetic chain with
/// coupling `j` for every `n` and scaled time. `steps` overrides
/// [`scaling_steps`].
pub fn scaling_fig3(
    sizes: &[usize],
    scaled_times: &[f64],
    j: f64,
    steps: Option<usize>,
    sampling: Sampling,
    cfg: &IntegratorConfig,
    workers: usize,
) -> Result<Vec<ScalingPoint>> {
    let mut jobs = Vec::new();
    for &n in sizes {
        for &x in scaled_times {
            jobs.push((n, x));
        }
    }
    let rows = run_batch(&jobs, workers, |&(n, x)| -> Result<Vec<ScalingPoint>> {
        let p = SpinProblem::uniform_chain(n, j)?;
        let h = build_h_problem(&p)?;
        let e0 = diagonalize(&h, false)?.ground_energy();
        let m = steps.unwrap_or_else(|| scaling_steps(n));
        let sched = Schedule::new(x / j.abs(), m)?.with_sampling(sampling);
        let states = [
            (
                "continuous",
                evolve_continuous(&p, &sched, cfg, &[])?.final_state,
            ),
            (
                "digital",
                evolve_digital_with(&p, &sched, &DigitalOptions::default())?.final_state,
            ),
        ];
        states
            .into_iter()
            .map(|(mode, psi)| {
                let kinks = kink_profile(&Distribution::from_state(&psi)?, &p)?;
                let residual = (h.expectation(&psi)? - e0).max(0.0);
                Ok(ScalingPoint {
                    n,
                    scaled_time: x,
                    mode,
                    steps: m,
                    kink_likelihood: kinks.likelihood,
                    expected_kinks: kinks.expected_kinks,
                    residual_energy: residual,
                })
            })
            .collect()
    })?;
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyParams {
    pub n: usize,
    pub j: f64,
    pub total_time: f64,
    pub steps: usize,
    pub sampling: Sampling,
}

impl Default for DegeneracyParams {
    fn default() -> Self {
        DegeneracyParams {
            n: 5,
            j: -1.25,
            total_time: 2.5,
            steps: 4,
            sampling: crate::problem::DEFAULT_SAMPLING,
        }
    }
}

/// Default middle-site field sweep `B_z ∈ [−3, 3]`.
pub fn degeneracy_sweep() -> Vec<f64> {
    linear_grid(-3.0, 3.0, 25)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyPoint {
    pub b_z: f64,
    pub mode: &'static str,
    pub magnetization: Vec<f64>,
    /// `parity[d − 1]` is `⟨σ_z^i σ_z^{i+d}⟩` averaged over `i`.
    pub parity: Vec<f64>,
}

/// Chain with a single longitudinal field on the middle site.
pub fn degeneracy_problem(params: &DegeneracyParams, b_z: f64) -> Result<SpinProblem> {
    let mut fields = vec![0.0; params.n];
    fields[params.n / 2] = b_z;
    SpinProblem::new(
        fields,
        vec![0.0; params.n],
        vec![params.j; params.n - 1],
        vec![0.0; params.n - 1],
    )
}

pub fn degeneracy_fig4(
    params: &DegeneracyParams,
    fields: &[f64],
    cfg: &IntegratorConfig,
    workers: usize,
) -> Result<Vec<DegeneracyPoint>> {
    let sched = Schedule::new(params.total_time, params.steps)?.with_sampling(params.sampling);
    let rows = run_batch(fields, workers, |&b_z| -> Result<Vec<DegeneracyPoint>> {
        let p = degeneracy_problem(params, b_z)?;
        let states = [
            (
                "continuous",
                evolve_continuous(&p, &sched, cfg, &[])?.final_state,
            ),
            (
                "digital",
                evolve_digital_with(&p, &sched, &DigitalOptions::default())?.final_state,
            ),
        ];
        states
            .into_iter()
            .map(|(mode, psi)| {
                let magnetization = (0..p.n)
                    .map(|i| magnetization(&psi, i))
                    .collect::<Result<Vec<_>>>()?;
                let parity = (1..p.n)
                    .map(|d| {
                        let vals = (0..p.n - d)
                            .map(|i| parity_correlation(&psi, i, d))
                            .collect::<Result<Vec<_>>>()?;
                        Ok(vals.iter().sum::<f64>() / vals.len() as f64)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(DegeneracyPoint {
                    b_z,
                    mode,
                    magnetization,
                    parity,
                })
            })
            .collect()
    })?;
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(out)
}

/// `(d, signed mean, mean of absolute values)` of the parity over the sweep.
pub fn parity_summary(points: &[DegeneracyPoint], mode: &str) -> Vec<(usize, f64, f64)> {
    let selected: Vec<&DegeneracyPoint> = points.iter().filter(|p| p.mode == mode).collect();
    let Some(first) = selected.first() else {
        return Vec::new();
    };
    (0..first.parity.len())
        .map(|k| {
            let count = selected.len() as f64;
            let signed = selected.iter().map(|p| p.parity[k]).sum::<f64>() / count;
            let abs = selected.iter().map(|p| p.parity[k].abs()).sum::<f64>() / count;
            (k + 1, signed, abs)
        })
        .collect()
}

/// Default schedule of the random-instance runs for `n` sites.
pub fn random_schedule(n: usize) -> Schedule {
    let s = if n <= 6 {
        Schedule::new(3.0, 5)
    } else {
        Schedule::new(1.0, 2)
    };
    s.expect("valid schedule")
}

/// Default `(n, count)` cells of the random-instance preset.
pub const RANDOM_CELLS: [(usize, usize); 5] = [(3, 100), (6, 250), (7, 250), (8, 250), (9, 250)];

/// Generates `count` instances from consecutive seeds and compares each.
pub fn random_fig5(
    n: usize,
    kind: ProblemKind,
    seed_base: u64,
    count: usize,
    sched: &Schedule,
    cfg: &IntegratorConfig,
    workers: usize,
) -> Result<Vec<(InstanceEntry, InstanceComparison)>> {
    let set = ProblemInstanceSet::generate_range(n, kind, seed_base, count)?;
    let results = run_batch(&set.instances, workers, |entry| {
        compare_instance(&entry.problem, sched, cfg)
    })?;
    set.instances
        .into_iter()
        .zip(results)
        .map(|(e, r)| r.map(|c| (e, c)))
        .collect()
}

/// Mean and standard error of the mean.
pub fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Normalized histogram on `[0, 1]`: `(lower edge, upper edge, density)`.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, f64)> {
    let mut counts = vec![0usize; bins];
    for &v in values {
        let b = ((v.clamp(0.0, 1.0) * bins as f64) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let width = 1.0 / bins as f64;
    let total = values.len().max(1) as f64;
    counts
        .iter()
        .enumerate()
        .map(|(b, &c)| {
            (
                b as f64 * width,
                (b + 1) as f64 * width,
                c as f64 / (total * width),
            )
        })
        .collect()
}

/// The six reference instances, each with its reference schedule.
pub fn instances_table_s10(
    sampling: Sampling,
    cfg: &IntegratorConfig,
    workers: usize,
) -> Result<Vec<(&'static str, Schedule, InstanceComparison)>> {
    let rows = run_batch(&BUILTIN_NAMES, workers, |&name| -> Result<_> {
        let p = builtin_instance(name)?;
        let sched = builtin_schedule(name)?.with_sampling(sampling);
        Ok((name, sched, compare_instance(&p, &sched, cfg)?))
    })?;
    rows.into_iter().collect()
}
