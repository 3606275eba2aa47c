//! Single-problem subcommands.

use std::fs;

use anyhow::{Context, Result};
use daqsim_core::compiler::{compile_schedule, serialize_sequence, simulate_gates, CompilerConfig};
use daqsim_core::evolution::{evolve_continuous, evolve_digital, EvolutionMode, IntegratorConfig};
use daqsim_core::experiments::random_schedule;
use daqsim_core::experiments::MetricsRecord;
use daqsim_core::hamiltonian::{
    build_h_problem, diagonalize, interpolated_hamiltonian, min_gap, target_state,
};
use daqsim_core::metrics::{
    fidelity_pure, kink_profile, residual_energy, success_measure_states, Distribution,
};
use daqsim_core::problem::{builtin_instance, builtin_schedule, load_problem};
use daqsim_core::resources::estimate_resources;
use daqsim_core::{Error, Schedule, SpinProblem, StateVector};

use crate::output::{bitstring, f, OutputDir, RunManifest, ScheduleInfo};
use crate::{
    CompileArgs, EvolveArgs, GapArgs, InputError, ProblemSource, ResourcesArgs, ScheduleArgs,
};

pub struct Loaded {
    pub id: String,
    pub problem: SpinProblem,
    pub schedule: Option<Schedule>,
}

pub fn load(source: &ProblemSource) -> Result<Loaded> {
    if let Some(name) = &source.fixture {
        return Ok(Loaded {
            id: name.clone(),
            problem: builtin_instance(name)?,
            schedule: Some(builtin_schedule(name)?),
        });
    }
    let path = source.problem.as_ref().expect("clap requires one source");
    let text = fs::read_to_string(path)
        .map_err(|e| InputError(format!("cannot read {}: {e}", path.display())))?;
    let (problem, schedule) =
        load_problem(&text).with_context(|| format!("loading {}", path.display()))?;
    let id = path.file_stem().map_or_else(
        || "problem".to_string(),
        |s| s.to_string_lossy().into_owned(),
    );
    Ok(Loaded {
        id,
        problem,
        schedule,
    })
}

/// Applies command-line overrides on top of `base`.
pub fn apply_overrides(base: Schedule, args: &ScheduleArgs) -> Result<Schedule> {
    let mut s = base;
    if args.total_time.is_some() || args.steps.is_some() {
        s = Schedule::new(
            args.total_time.unwrap_or(s.total_time),
            args.steps.unwrap_or(s.steps),
        )?
        .with_sampling(s.sampling)
        .with_b_x_init(s.b_x_init);
    }
    if let Some(sampling) = args.sampling {
        s = s.with_sampling(sampling);
    }
    s.validate()?;
    Ok(s)
}

fn resolve_schedule(loaded: &Loaded, args: &ScheduleArgs) -> Result<Schedule> {
    let base = loaded
        .schedule
        .unwrap_or_else(|| random_schedule(loaded.problem.n));
    apply_overrides(base, args)
}

fn compiler_config(constrained: bool) -> CompilerConfig {
    if constrained {
        CompilerConfig::hardware()
    } else {
        CompilerConfig::default()
    }
}

pub fn evolve(args: &EvolveArgs, argv: &[String]) -> Result<()> {
    let loaded = load(&args.source)?;
    let p = &loaded.problem;
    let sched = resolve_schedule(&loaded, &args.schedule)?;
    let mut out = OutputDir::create(&args.out.out)?;

    let psi = match args.mode {
        EvolutionMode::Continuous => {
            evolve_continuous(p, &sched, &IntegratorConfig::default(), &[])?.final_state
        }
        EvolutionMode::Digital => evolve_digital(p, &sched)?.final_state,
        EvolutionMode::Gates => {
            let (seq, _) = compile_schedule(p, &sched, &compiler_config(args.constrained))?;
            out.text("gates.txt", &serialize_sequence(&seq))?;
            simulate_gates(&seq, &StateVector::basis(p.n, 0))?
        }
    };
    let target = target_state(p)?;

    let probs = psi.probabilities();
    let target_probs = target.probabilities();
    out.csv(
        "distribution.csv",
        &["index", "bitstring", "probability", "target_probability"],
        (0..psi.dim()).map(|k| {
            [
                k.to_string(),
                bitstring(k, p.n),
                f(probs[k]),
                f(target_probs[k]),
            ]
        }),
    )?;

    let record = |metric: &str, value: f64| MetricsRecord {
        instance_id: loaded.id.clone(),
        seed: None,
        kind: p.kind().as_str().to_string(),
        n: p.n,
        total_time: sched.total_time,
        steps: sched.steps,
        mode: args.mode.as_str().to_string(),
        metric: metric.to_string(),
        value,
    };
    let mut records = vec![
        record("fidelity_target", fidelity_pure(&psi, &target)?),
        record("success_target", success_measure_states(&target, &psi)?),
        record("energy", build_h_problem(p)?.expectation(&psi)?),
        record("residual_energy", residual_energy(&psi, p)?),
    ];
    match kink_profile(&Distribution::from_state(&psi)?, p) {
        Ok(k) => records.push(record("expected_kinks", k.expected_kinks)),
        Err(Error::UndefinedKink { .. }) => {}
        Err(e) => return Err(e.into()),
    }
    out.metrics("metrics.csv", &records)?;

    let mut manifest = RunManifest::new("evolve", argv).with_problem(&loaded.id, p)?;
    manifest.schedule = Some(ScheduleInfo::from(&sched));
    manifest.set("mode", args.mode.as_str());
    manifest.set("constrained", args.constrained);
    out.finish(manifest)
}

pub fn compile(args: &CompileArgs, argv: &[String]) -> Result<()> {
    let loaded = load(&args.source)?;
    let sched = resolve_schedule(&loaded, &args.schedule)?;
    let cfg = compiler_config(args.constrained);
    let (seq, report) = compile_schedule(&loaded.problem, &sched, &cfg)?;

    let mut out = OutputDir::create(&args.out.out)?;
    out.text("gates.txt", &serialize_sequence(&seq))?;
    let mut rows = vec![[
        "init".to_string(),
        "0".to_string(),
        report.initialization.to_string(),
    ]];
    rows.extend(report.per_step.iter().map(|s| {
        [
            s.step.to_string(),
            s.entangling.to_string(),
            s.single_qubit.to_string(),
        ]
    }));
    rows.push([
        "total".to_string(),
        report.entangling_count.to_string(),
        report.single_qubit_count.to_string(),
    ]);
    out.csv(
        "gate_counts.csv",
        &["step", "entangling", "single_qubit"],
        rows,
    )?;

    let mut manifest =
        RunManifest::new("compile", argv).with_problem(&loaded.id, &loaded.problem)?;
    manifest.schedule = Some(ScheduleInfo::from(&sched));
    manifest.set("constrained", args.constrained);
    manifest.set("phase_window", [cfg.phase_min, cfg.phase_max]);
    out.finish(manifest)
}

pub fn gap(args: &GapArgs, argv: &[String]) -> Result<()> {
    let loaded = load(&args.source)?;
    let p = &loaded.problem;
    let sched = resolve_schedule(&loaded, &ScheduleArgs::default())?;
    let sweep = min_gap(p, &sched, args.grid)?;

    let mut spectrum_rows = Vec::with_capacity(args.grid);
    for g in 0..args.grid {
        let s = g as f64 / (args.grid - 1) as f64;
        let spectrum = diagonalize(&interpolated_hamiltonian(p, &sched, s)?, false)?;
        spectrum_rows.push([
            f(s),
            f(spectrum.ground_energy()),
            spectrum.first_excited().map_or_else(String::new, f),
            spectrum.gap().map_or_else(String::new, f),
            spectrum.ground_degeneracy().to_string(),
        ]);
    }

    let mut out = OutputDir::create(&args.out.out)?;
    out.csv(
        "gap.csv",
        &["instance_id", "n", "grid", "min_gap", "s_at_min"],
        [[
            loaded.id.clone(),
            p.n.to_string(),
            args.grid.to_string(),
            f(sweep.gap),
            f(sweep.s_at_min),
        ]],
    )?;
    out.csv(
        "spectrum.csv",
        &[
            "s",
            "ground_energy",
            "first_excited",
            "gap",
            "ground_degeneracy",
        ],
        spectrum_rows,
    )?;

    let mut manifest = RunManifest::new("gap", argv).with_problem(&loaded.id, p)?;
    manifest.set("grid", args.grid);
    manifest.set("b_x_init", sched.b_x_init);
    out.finish(manifest)
}

pub fn resources(args: &ResourcesArgs, argv: &[String]) -> Result<()> {
    let loaded = load(&args.source)?;
    let p = &loaded.problem;
    let sched = resolve_schedule(&loaded, &ScheduleArgs::default())?;
    let est = estimate_resources(p, &sched, args.epsilon, None, args.grid)?;

    let mut out = OutputDir::create(&args.out.out)?;
    out.csv(
        "resources.csv",
        &[
            "instance_id",
            "n",
            "epsilon",
            "gap",
            "s_at_min",
            "numerator",
            "a_max",
            "term_count",
            "locality",
            "T",
            "M",
            "gates",
        ],
        [[
            loaded.id.clone(),
            p.n.to_string(),
            f(est.epsilon),
            f(est.gap),
            est.gap_location.map_or_else(String::new, f),
            f(est.numerator),
            f(est.a_max),
            est.term_count.to_string(),
            est.locality.to_string(),
            f(est.time_bound),
            f(est.steps),
            f(est.gate_count),
        ]],
    )?;

    let mut manifest = RunManifest::new("resources", argv).with_problem(&loaded.id, p)?;
    manifest.set("grid", args.grid);
    manifest.set("epsilon", args.epsilon);
    manifest.set("b_x_init", sched.b_x_init);
    manifest.set(
        "note",
        "order-of-magnitude estimate, all constants set to 1",
    );
    out.finish(manifest)
}
