//! The run and sweep subcommands.

use std::io::Write;
use std::time::Instant;

use vbqc_core::analysis::{bound_set, gap_at_qstar, RateParams};
use vbqc_core::protocol::{
    bob_respond, estimate_acceptance, exact_compute_acceptance,
    exact_compute_acceptance_for_state, exact_test_probabilities, run_trial, trial_rng,
    AcceptanceEstimate, AliceSecret, Branch,
};

use crate::config::{ExperimentConfig, Mode, OutputFormat};
use crate::report::{write_csv, write_json, ResultRecord};
use crate::CliError;

/// Overrides layered over the config file by command-line flags.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    pub mode: Option<Mode>,
    pub format: Option<OutputFormat>,
    pub out: Option<std::path::PathBuf>,
    pub trace: Option<std::path::PathBuf>,
}

fn apply_overrides(cfg: &mut ExperimentConfig, ov: &Overrides) {
    if let Some(seed) = ov.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = ov.trials {
        cfg.trials = trials;
    }
    if let Some(mode) = ov.mode {
        cfg.mode = Some(mode);
    }
}

/// Reporting ε when the config does not pin one: half the failing margin
/// of the weaker test (both margins when both tests fail), floored away
/// from zero so the bound table stays defined.
fn derived_epsilon(p_gpass: Option<f64>, p_psipass: Option<f64>) -> f64 {
    let f_g = p_gpass.map(|p| (1.0 - p).max(0.0)).unwrap_or(0.0);
    let f_psi = p_psipass.map(|p| (1.0 - p).max(0.0)).unwrap_or(0.0);
    let f_min = f_g.min(f_psi);
    let f_max = f_g.max(f_psi);
    let eps = if f_min > 1e-12 { f_min / 2.0 } else { f_max / 2.0 };
    eps.clamp(1e-9, 1.0 - 1e-9)
}

fn option_rate(accepts: usize, trials: usize) -> Option<f64> {
    (trials > 0).then(|| accepts as f64 / trials as f64)
}

pub fn run_experiment(cfg: &ExperimentConfig, ov: &Overrides) -> Result<ResultRecord, CliError> {
    let mut cfg = cfg.clone();
    apply_overrides(&mut cfg, ov);
    cfg.validate()?;
    let started = Instant::now();
    let graph = cfg.build_graph()?;
    let input = cfg.build_input()?;
    let instance = cfg.build_instance()?;
    let strategy = cfg.build_strategy(&graph)?;
    let mode = cfg.mode.unwrap_or(Mode::Sample);

    let (p_acc, se_acc, p_gpass, p_psipass, p_compute, se_branches, counts) = match mode {
        Mode::Sample => {
            let est = if let Some(trace_path) = &ov.trace {
                traced_estimate(&cfg, &graph, &input, &instance, &strategy, trace_path)?
            } else {
                estimate_acceptance(
                    &instance, &input, &graph, &strategy, cfg.q, cfg.trials, cfg.seed,
                )
                .map_err(|e| CliError::config(format!("simulation failed: {e}")))?
            };
            let se_g = (est.stab_trials > 0).then(|| est.se_gpass());
            let se_psi = (est.input_trials > 0).then(|| est.se_psipass());
            (
                est.p_acc(),
                est.se_acc(),
                option_rate(est.stab_accepts, est.stab_trials),
                option_rate(est.input_accepts, est.input_trials),
                option_rate(est.compute_accepts, est.compute_trials),
                (se_g, se_psi),
                (est.trials, est.compute_trials, est.stab_trials, est.input_trials),
            )
        }
        Mode::Exact => {
            if cfg.m == 2 {
                eprintln!(
                    "note: exact mode at m = 2 enumerates 720·4096 secrets; expect minutes"
                );
            }
            let (p_g, p_psi) = exact_test_probabilities(&strategy, &input, &graph)
                .map_err(|e| CliError::config(format!("exact mode unavailable: {e}")))?;
            let p_comp = exact_compute_probability(&cfg, &graph, &input, &strategy)?;
            let p_acc = cfg.q * p_comp + (1.0 - cfg.q) / 2.0 * (p_g + p_psi);
            (
                p_acc,
                0.0,
                Some(p_g),
                Some(p_psi),
                Some(p_comp),
                (Some(0.0), Some(0.0)),
                (0, 0, 0, 0),
            )
        }
    };

    let epsilon = cfg.epsilon.unwrap_or_else(|| derived_epsilon(p_gpass, p_psipass));
    let params = RateParams::amplified(epsilon, cfg.q, cfg.r)
        .map_err(|e| CliError::config(format!("invalid rate parameters: {e}")))?;
    let set = bound_set(&params).map_err(|e| CliError::config(format!("{e}")))?;
    let gap = gap_at_qstar(&params).ok();

    Ok(ResultRecord {
        experiment_id: cfg.experiment_id(),
        q: cfg.q,
        epsilon,
        r: cfg.r,
        p_acc,
        se_acc,
        p_gpass,
        se_gpass: se_branches.0,
        p_psipass,
        se_psipass: se_branches.1,
        p_compute,
        alpha: set.alpha,
        beta1: set.beta1,
        beta2: set.beta2,
        beta3: set.beta3,
        delta: set.delta,
        q_star: set.q_star,
        gap: gap.map(|g| g.gap),
        trials: counts.0,
        compute_trials: counts.1,
        stab_trials: counts.2,
        input_trials: counts.3,
        wall_time_ms: started.elapsed().as_millis(),
    })
}

/// Exact compute-branch probability: the circuit route for the honest
/// server, otherwise outcome-path enumeration averaged over every secret.
fn exact_compute_probability(
    cfg: &ExperimentConfig,
    graph: &vbqc_core::graph::ProtocolGraph,
    input: &vbqc_core::protocol::InputBlock,
    strategy: &vbqc_core::protocol::BobStrategy,
) -> Result<f64, CliError> {
    let instance = cfg.build_instance()?;
    if matches!(strategy, vbqc_core::protocol::BobStrategy::Honest) {
        return exact_compute_acceptance(graph, &instance.program, input.psi())
            .map_err(|e| CliError::config(format!("exact compute probability: {e}")));
    }
    let secrets = AliceSecret::enumerate_all(input.m());
    let mut acc = 0.0;
    for secret in &secrets {
        let padded = vbqc_core::protocol::alice_prepare_with(input, secret)
            .map_err(|e| CliError::config(format!("{e}")))?
            .density();
        let rho = bob_respond(strategy, &padded, graph)
            .map_err(|e| CliError::config(format!("{e}")))?;
        acc += exact_compute_acceptance_for_state(&rho, secret, &instance.program, graph)
            .map_err(|e| CliError::config(format!("exact compute probability: {e}")))?;
    }
    Ok(acc / secrets.len() as f64)
}

/// Serial trial loop that also writes per-trial records
/// (trial, branch, accepted, secret digest). Same per-trial RNG streams
/// as the parallel estimator, so the aggregate is identical.
fn traced_estimate(
    cfg: &ExperimentConfig,
    graph: &vbqc_core::graph::ProtocolGraph,
    input: &vbqc_core::protocol::InputBlock,
    instance: &vbqc_core::protocol::DecisionInstance,
    strategy: &vbqc_core::protocol::BobStrategy,
    trace_path: &std::path::Path,
) -> Result<AcceptanceEstimate, CliError> {
    let file = std::fs::File::create(trace_path)
        .map_err(|e| CliError::config(format!("cannot create {}: {e}", trace_path.display())))?;
    let mut out = std::io::BufWriter::new(file);
    writeln!(out, "trial,branch,accepted,secret_digest")
        .map_err(|e| CliError::config(format!("cannot write trace: {e}")))?;
    let mut est = AcceptanceEstimate::default();
    for i in 0..cfg.trials {
        let mut rng = trial_rng(cfg.seed, i as u64);
        let outcome = run_trial(instance, input, graph, strategy, cfg.q, &mut rng)
            .map_err(|e| CliError::config(format!("trial {i} failed: {e}")))?;
        let branch = match outcome.branch {
            Branch::Compute => "compute",
            Branch::StabTest => "stab_test",
            Branch::InputTest => "input_test",
        };
        writeln!(
            out,
            "{i},{branch},{},{:016x}",
            u8::from(outcome.accepted),
            outcome.secret_digest
        )
        .map_err(|e| CliError::config(format!("cannot write trace: {e}")))?;
        est.trials += 1;
        est.accepted += usize::from(outcome.accepted);
        match outcome.branch {
            Branch::Compute => {
                est.compute_trials += 1;
                est.compute_accepts += usize::from(outcome.accepted);
            }
            Branch::StabTest => {
                est.stab_trials += 1;
                est.stab_accepts += usize::from(outcome.accepted);
            }
            Branch::InputTest => {
                est.input_trials += 1;
                est.input_accepts += usize::from(outcome.accepted);
            }
        }
    }
    Ok(est)
}

pub fn emit_records(
    cfg: &ExperimentConfig,
    ov: &Overrides,
    records: &[ResultRecord],
) -> Result<(), CliError> {
    let format = ov
        .format
        .or(cfg.output.as_ref().and_then(|o| o.format))
        .unwrap_or(OutputFormat::Json);
    let path = ov
        .out
        .clone()
        .or_else(|| cfg.output.as_ref().and_then(|o| o.path.clone().map(Into::into)));
    match path {
        Some(p) => {
            let file = std::fs::File::create(&p)
                .map_err(|e| CliError::config(format!("cannot create {}: {e}", p.display())))?;
            match format {
                OutputFormat::Csv => write_csv(records, file),
                OutputFormat::Json => write_json(records, file),
            }
        }
        None => {
            let stdout = std::io::stdout();
            match format {
                OutputFormat::Csv => write_csv(records, stdout.lock()),
                OutputFormat::Json => write_json(records, stdout.lock()),
            }
        }
    }
}

pub fn cmd_run(cfg: &ExperimentConfig, ov: &Overrides) -> Result<(), CliError> {
    let record = run_experiment(cfg, ov)?;
    eprintln!(
        "run {}: p_acc = {:.6} (mode {}), wall time {} ms",
        record.experiment_id,
        record.p_acc,
        if record.trials > 0 { "sample" } else { "exact" },
        record.wall_time_ms
    );
    emit_records(cfg, ov, std::slice::from_ref(&record))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepAxis {
    Q,
    Epsilon,
    R,
    Trials,
}

pub fn cmd_sweep(
    cfg: &ExperimentConfig,
    ov: &Overrides,
    axis: SweepAxis,
    values: &str,
) -> Result<(), CliError> {
    let mut records = Vec::new();
    let points: Vec<&str> = values.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if points.is_empty() {
        return Err(CliError::config("sweep needs at least one grid value"));
    }
    for point in &points {
        let mut cfg_point = cfg.clone();
        let label = match axis {
            SweepAxis::Q => {
                let v: f64 = point
                    .parse()
                    .map_err(|_| CliError::config(format!("bad q value {point:?}")))?;
                cfg_point.q = v;
                format!("q={v}")
            }
            SweepAxis::Epsilon => {
                let v: f64 = point
                    .parse()
                    .map_err(|_| CliError::config(format!("bad epsilon value {point:?}")))?;
                cfg_point.epsilon = Some(v);
                format!("epsilon={v}")
            }
            SweepAxis::R => {
                let v: u32 = point
                    .parse()
                    .map_err(|_| CliError::config(format!("bad r value {point:?}")))?;
                cfg_point.r = v;
                format!("r={v}")
            }
            SweepAxis::Trials => {
                let v: usize = point
                    .parse()
                    .map_err(|_| CliError::config(format!("bad trials value {point:?}")))?;
                cfg_point.trials = v;
                format!("trials={v}")
            }
        };
        cfg_point.experiment_id = Some(format!("{}[{label}]", cfg.experiment_id()));
        records.push(run_experiment(&cfg_point, ov)?);
    }
    if axis == SweepAxis::Epsilon {
        flag_gap_crossover(&records);
    }
    emit_records(cfg, ov, &records)
}

/// A sign change of a − b − δ(ε) along the grid means the verifiable-gap
/// region ends between those two points.
fn flag_gap_crossover(records: &[ResultRecord]) {
    for pair in records.windows(2) {
        let margin =
            |r: &ResultRecord| (1.0 - 2.0 * 2f64.powi(-(r.r as i32))) - r.delta;
        let (m0, m1) = (margin(&pair[0]), margin(&pair[1]));
        if m0 > 0.0 && m1 <= 0.0 {
            eprintln!(
                "gap crossover: a − b − δ changes sign between ε = {} and ε = {}",
                pair[0].epsilon, pair[1].epsilon
            );
        }
    }
}
