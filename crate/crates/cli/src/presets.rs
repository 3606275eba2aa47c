//! Experiment presets. Each writes its CSV files plus `manifest.json`.

use anyhow::Result;
use daqsim_core::evolution::IntegratorConfig;
use daqsim_core::experiments::{
    degeneracy_fig4, degeneracy_sweep, ghz_fig2, histogram, instances_table_s10, mean_and_error,
    parity_summary, random_fig5, random_schedule, scaling_fig3, scaling_grid, worker_count,
    DegeneracyParams, MetricsRecord, Preset, PRESET_NAMES, RANDOM_CELLS,
};
use daqsim_core::metrics::{fidelity_pure, fit_power_law, success_measure_states};
use daqsim_core::problem::{ProblemKind, DEFAULT_SAMPLING};
use daqsim_core::{Error, StateVector};

use crate::commands::apply_overrides;
use crate::output::{bitstring, f, OutputDir, RunManifest, ScheduleInfo};
use crate::{InputError, PresetArgs};

/// Default chain coupling of the scaling runs.
const SCALING_COUPLING: f64 = 2.0;
const HISTOGRAM_BINS: usize = 20;
const DEFAULT_SEED_BASE: u64 = 1;
/// Scaled-time windows compared for the plateau and the power-law regime.
const FIT_WINDOWS: [(f64, f64); 2] = [(0.0, 0.5), (1.0, 3.0)];

/// Rejects flags the preset does not read, instead of silently ignoring them.
fn reject_unused(args: &PresetArgs, preset: Preset, allowed: &[&str]) -> Result<()> {
    let given = [
        ("--T", args.schedule.total_time.is_some()),
        ("--steps", args.schedule.steps.is_some()),
        ("--sampling", args.schedule.sampling.is_some()),
        ("--seed", args.seed.is_some()),
        ("--count", args.count.is_some()),
        ("--sites", !args.sites.is_empty()),
        ("--kind", args.kind.is_some()),
        ("--coupling", args.coupling.is_some()),
    ];
    for (flag, present) in given {
        if present && !allowed.contains(&flag) {
            return Err(InputError(format!("{flag} is not used by preset {preset}")).into());
        }
    }
    Ok(())
}

pub fn run(args: &PresetArgs, argv: &[String]) -> Result<()> {
    let preset: Preset = args.name.parse().map_err(|_| {
        InputError(format!(
            "unknown preset `{}` (valid names: {})",
            args.name,
            PRESET_NAMES.join(", ")
        ))
    })?;
    let workers = worker_count()?;
    let cfg = IntegratorConfig::default();
    let sampling = args.schedule.sampling.unwrap_or(DEFAULT_SAMPLING);
    let mut out = OutputDir::create(&args.out.out)?;
    let mut manifest = RunManifest::new("preset", argv);
    manifest.preset = Some(preset.to_string());
    manifest.set("sampling", sampling.as_str());

    match preset {
        Preset::GhzFig2 => {
            reject_unused(args, preset, &["--sampling"])?;
            ghz(&mut out, &mut manifest, sampling, &cfg)?
        }
        Preset::ScalingFig3 => {
            reject_unused(
                args,
                preset,
                &["--sampling", "--steps", "--sites", "--coupling"],
            )?;
            scaling(args, &mut out, &mut manifest, &cfg, workers)?
        }
        Preset::DegeneracyFig4 => {
            reject_unused(
                args,
                preset,
                &["--sampling", "--T", "--steps", "--sites", "--coupling"],
            )?;
            degeneracy(args, &mut out, &mut manifest, &cfg, workers)?
        }
        Preset::RandomFig5 => {
            reject_unused(
                args,
                preset,
                &[
                    "--sampling",
                    "--T",
                    "--steps",
                    "--seed",
                    "--count",
                    "--sites",
                    "--kind",
                ],
            )?;
            random(args, &mut out, &mut manifest, &cfg, workers)?
        }
        Preset::InstancesTableS10 => {
            reject_unused(args, preset, &["--sampling"])?;
            table(&mut out, sampling, &cfg, workers)?
        }
    }
    out.finish(manifest)
}

fn state_rows(label: &str, s: f64, psi: &StateVector) -> Vec<[String; 7]> {
    let probs = psi.probabilities();
    psi.amplitudes()
        .iter()
        .enumerate()
        .map(|(k, a)| {
            [
                label.to_string(),
                f(s),
                k.to_string(),
                bitstring(k, psi.n()),
                f(a.re),
                f(a.im),
                f(probs[k]),
            ]
        })
        .collect()
}

fn ghz(
    out: &mut OutputDir,
    manifest: &mut RunManifest,
    sampling: daqsim_core::Sampling,
    cfg: &IntegratorConfig,
) -> Result<()> {
    let report = ghz_fig2(sampling, cfg)?;
    let mut states = Vec::new();
    let mut fidelity = Vec::new();
    for (label, traj) in [
        ("digital", &report.digital),
        ("continuous", &report.continuous),
    ] {
        for (s, psi) in traj.iter() {
            states.extend(state_rows(label, *s, psi));
            fidelity.push([
                label.to_string(),
                f(*s),
                f(fidelity_pure(psi, &report.target)?),
                f(success_measure_states(&report.target, psi)?),
            ]);
        }
    }
    states.extend(state_rows("target", 1.0, &report.target));
    out.csv(
        "ghz_states.csv",
        &["mode", "s", "index", "bitstring", "re", "im", "probability"],
        states,
    )?;
    out.csv(
        "ghz_fidelity.csv",
        &["mode", "s", "fidelity_target", "success_target"],
        fidelity,
    )?;
    let records =
        report
            .comparison
            .records("ghz-4q", None, ProblemKind::Stoquastic, &report.schedule);
    out.metrics("ghz_metrics.csv", &records)?;
    manifest.schedule = Some(ScheduleInfo::from(&report.schedule));
    Ok(())
}

fn scaling(
    args: &PresetArgs,
    out: &mut OutputDir,
    manifest: &mut RunManifest,
    cfg: &IntegratorConfig,
    workers: usize,
) -> Result<()> {
    let sizes: Vec<usize> = if args.sites.is_empty() {
        (2..=9).collect()
    } else {
        args.sites.clone()
    };
    let j = args.coupling.unwrap_or(SCALING_COUPLING);
    let grid = scaling_grid();
    let sampling = args.schedule.sampling.unwrap_or(DEFAULT_SAMPLING);
    let points = scaling_fig3(
        &sizes,
        &grid,
        j,
        args.schedule.steps,
        sampling,
        cfg,
        workers,
    )?;

    out.csv(
        "scaling.csv",
        &[
            "n",
            "scaled_time",
            "T",
            "M",
            "mode",
            "expected_kinks",
            "residual_energy",
        ],
        points.iter().map(|pt| {
            [
                pt.n.to_string(),
                f(pt.scaled_time),
                f(pt.scaled_time / j.abs()),
                pt.steps.to_string(),
                pt.mode.to_string(),
                f(pt.expected_kinks),
                f(pt.residual_energy),
            ]
        }),
    )?;
    out.csv(
        "scaling_kinks.csv",
        &["n", "scaled_time", "mode", "kinks", "likelihood"],
        points.iter().flat_map(|pt| {
            pt.kink_likelihood.iter().enumerate().map(move |(k, l)| {
                [
                    pt.n.to_string(),
                    f(pt.scaled_time),
                    pt.mode.to_string(),
                    k.to_string(),
                    f(*l),
                ]
            })
        }),
    )?;

    let mut fits = Vec::new();
    for &n in &sizes {
        for mode in ["continuous", "digital"] {
            let series: Vec<(f64, f64)> = points
                .iter()
                .filter(|pt| pt.n == n && pt.mode == mode)
                .map(|pt| (pt.scaled_time, pt.residual_energy))
                .collect();
            for window in FIT_WINDOWS {
                match fit_power_law(&series, window) {
                    Ok(fit) => fits.push([
                        n.to_string(),
                        mode.to_string(),
                        f(window.0),
                        f(window.1),
                        f(fit.eta),
                        f(fit.amplitude),
                        fit.points_used.to_string(),
                    ]),
                    Err(Error::Fit(_)) => {}
                    Err(e) => return Err(e.into()),
                }
            }
        }
    }
    out.csv(
        "scaling_fits.csv",
        &[
            "n",
            "mode",
            "window_lo",
            "window_hi",
            "eta",
            "amplitude",
            "points",
        ],
        fits,
    )?;

    manifest.set("sizes", &sizes);
    manifest.set("coupling", j);
    manifest.set("scaled_times", &grid);
    manifest.set("steps_override", args.schedule.steps);
    Ok(())
}

fn degeneracy(
    args: &PresetArgs,
    out: &mut OutputDir,
    manifest: &mut RunManifest,
    cfg: &IntegratorConfig,
    workers: usize,
) -> Result<()> {
    let defaults = DegeneracyParams::default();
    let n = match args.sites.as_slice() {
        [] => defaults.n,
        [n] => *n,
        _ => return Err(InputError("degeneracy-fig4 takes a single --sites value".into()).into()),
    };
    let params = DegeneracyParams {
        n,
        j: args.coupling.unwrap_or(defaults.j),
        total_time: args.schedule.total_time.unwrap_or(defaults.total_time),
        steps: args.schedule.steps.unwrap_or(defaults.steps),
        sampling: args.schedule.sampling.unwrap_or(defaults.sampling),
    };
    let fields = degeneracy_sweep();
    let points = degeneracy_fig4(&params, &fields, cfg, workers)?;

    out.csv(
        "magnetization.csv",
        &["b_z", "mode", "site", "magnetization"],
        points.iter().flat_map(|pt| {
            pt.magnetization
                .iter()
                .enumerate()
                .map(move |(i, m)| [f(pt.b_z), pt.mode.to_string(), i.to_string(), f(*m)])
        }),
    )?;
    out.csv(
        "parity.csv",
        &["b_z", "mode", "distance", "parity"],
        points.iter().flat_map(|pt| {
            pt.parity
                .iter()
                .enumerate()
                .map(move |(k, c)| [f(pt.b_z), pt.mode.to_string(), (k + 1).to_string(), f(*c)])
        }),
    )?;
    let mut summary = Vec::new();
    for mode in ["continuous", "digital"] {
        for (d, signed, abs) in parity_summary(&points, mode) {
            summary.push([mode.to_string(), d.to_string(), f(signed), f(abs)]);
        }
    }
    out.csv(
        "parity_summary.csv",
        &["mode", "distance", "mean", "mean_abs"],
        summary,
    )?;

    manifest.set("sites", params.n);
    manifest.set("coupling", params.j);
    manifest.set("fields", &fields);
    manifest.schedule = Some(ScheduleInfo {
        total_time: params.total_time,
        steps: params.steps,
        sampling: params.sampling.as_str(),
        b_x_init: daqsim_core::problem::DEFAULT_B_X_INIT,
    });
    Ok(())
}

fn random(
    args: &PresetArgs,
    out: &mut OutputDir,
    manifest: &mut RunManifest,
    cfg: &IntegratorConfig,
    workers: usize,
) -> Result<()> {
    let seed_base = args.seed.unwrap_or(DEFAULT_SEED_BASE);
    let cells: Vec<(usize, usize)> = if args.sites.is_empty() {
        RANDOM_CELLS.to_vec()
    } else {
        args.sites
            .iter()
            .map(|&n| {
                let default = RANDOM_CELLS.iter().find(|c| c.0 == n).map_or(250, |c| c.1);
                (n, default)
            })
            .collect()
    };
    let kinds = match args.kind {
        Some(k) => vec![k],
        None => vec![ProblemKind::Stoquastic, ProblemKind::NonStoquastic],
    };

    let mut records: Vec<MetricsRecord> = Vec::new();
    let mut summary = Vec::new();
    let mut histograms = Vec::new();
    let mut schedules = Vec::new();
    for &(n, default_count) in &cells {
        let count = args.count.unwrap_or(default_count);
        let sched = apply_overrides(random_schedule(n), &args.schedule)?;
        schedules.push((n, count, ScheduleInfo::from(&sched)));
        for &kind in &kinds {
            let results = random_fig5(n, kind, seed_base, count, &sched, cfg, workers)?;
            let start = records.len();
            for (entry, cmp) in &results {
                let id = format!("{n}q-{}-{:04}", kind.as_str(), entry.id);
                records.extend(cmp.records(&id, Some(entry.seed), kind, &sched));
            }
            let cell = &records[start..];
            let mut metrics: Vec<&str> = Vec::new();
            for r in cell {
                if !metrics.contains(&r.metric.as_str()) {
                    metrics.push(&r.metric);
                }
            }
            for metric in metrics {
                let values: Vec<f64> = cell
                    .iter()
                    .filter(|r| r.metric == metric)
                    .map(|r| r.value)
                    .collect();
                let (mean, err) = mean_and_error(&values);
                summary.push([
                    n.to_string(),
                    kind.as_str().to_string(),
                    values.len().to_string(),
                    metric.to_string(),
                    f(mean),
                    f(err),
                ]);
                for (lo, hi, density) in histogram(&values, HISTOGRAM_BINS) {
                    histograms.push([
                        n.to_string(),
                        kind.as_str().to_string(),
                        metric.to_string(),
                        f(lo),
                        f(hi),
                        f(density),
                    ]);
                }
            }
        }
    }
    out.metrics("random_instances.csv", &records)?;
    out.csv(
        "random_summary.csv",
        &["n", "kind", "count", "metric", "mean", "stderr"],
        summary,
    )?;
    out.csv(
        "random_histograms.csv",
        &["n", "kind", "metric", "bin_lo", "bin_hi", "density"],
        histograms,
    )?;

    manifest.seed_base = Some(seed_base);
    manifest.set(
        "kinds",
        kinds.iter().map(|k| k.as_str()).collect::<Vec<_>>(),
    );
    manifest.set(
        "cells",
        schedules
            .into_iter()
            .map(|(n, count, s)| serde_json::json!({ "n": n, "count": count, "schedule": s }))
            .collect::<Vec<_>>(),
    );
    Ok(())
}

fn table(
    out: &mut OutputDir,
    sampling: daqsim_core::Sampling,
    cfg: &IntegratorConfig,
    workers: usize,
) -> Result<()> {
    let rows = instances_table_s10(sampling, cfg, workers)?;
    let mut records = Vec::new();
    let mut dists = Vec::new();
    for (name, sched, cmp) in &rows {
        records.extend(cmp.records(name, None, cmp_kind(name), sched));
        for (label, psi) in [
            ("digital", &cmp.digital),
            ("continuous", &cmp.continuous),
            ("target", &cmp.target),
        ] {
            for (k, p) in psi.probabilities().iter().enumerate() {
                dists.push([
                    name.to_string(),
                    label.to_string(),
                    k.to_string(),
                    bitstring(k, psi.n()),
                    f(*p),
                ]);
            }
        }
    }
    out.metrics("tableS10.csv", &records)?;
    out.csv(
        "tableS10_distributions.csv",
        &["instance_id", "source", "index", "bitstring", "probability"],
        dists,
    )
}

fn cmp_kind(name: &str) -> ProblemKind {
    daqsim_core::problem::builtin_instance(name)
        .map(|p| p.kind())
        .unwrap_or(ProblemKind::Stoquastic)
}
