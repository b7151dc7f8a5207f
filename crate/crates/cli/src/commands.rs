//! Command implementations.

use std::time::Instant;

use rayon::prelude::*;
use relent_core::{
    iterate, min_product_expectation, precision_digits, random_npt, random_pure, random_separable,
    verify_on_separables, werner_reference_entanglement, werner_state, witness_from_result,
    DensityMatrix, Dims, IterationConfig, ReeResult, Verdict, WernerParameter,
};

use crate::args::{Cli, Command, FigureArgs, FigureKind, GenArgs, GenKind, ReeArgs, WitnessArgs};
use crate::report::{self, ConfigEcho, FigureRow, ReeReport, WitnessReport};
use crate::state_file::{read_state, write_text, StateFile};
use crate::{CliError, Outcome};

/// Tolerance applied when validating input state files.
pub const INPUT_TOL: f64 = relent_core::states::STATE_TOL;

/// Werner parameters of the d = 4 benchmark series.
pub const FIG3_F_VALUES: [f64; 6] = [-0.05, -0.2, -0.35, -0.5, -0.65, -0.8];
pub const FIG3_D: usize = 4;
/// Number of random separable 2⊗2 states in the separable benchmark series.
pub const FIG2_STATES: u64 = 6;

pub fn dispatch(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Ree(a) => ree(a),
        Command::Gen(a) => generate(a),
        Command::Witness(a) => witness(a),
        Command::Figure(a) => figure(a),
    }
}

fn outcome(converged: bool) -> Outcome {
    if converged {
        Outcome::Done
    } else {
        Outcome::NotConverged
    }
}

fn warn_if_not_converged(res: &ReeResult) {
    if !res.converged() {
        eprintln!(
            "relent: warning: stopped with termination '{}' after {} iterations",
            res.termination,
            res.iterations()
        );
    }
}

fn ree(a: ReeArgs) -> Result<Outcome, CliError> {
    let cfg = a.solver.config()?;
    let (sigma, bytes) = read_state(&a.input, INPUT_TOL)?;
    let start = Instant::now();
    let res = iterate(&sigma, &cfg)?;
    let elapsed = start.elapsed().as_secs_f64();
    let w = witness_from_result(&res);
    warn_if_not_converged(&res);

    if let Some(path) = &a.trace_out {
        write_text(Some(path), &report::trace_csv(&res.trace)?)?;
    }
    if let Some(path) = &a.witness_out {
        write_text(
            Some(path),
            &StateFile::from_matrix(w.matrix(), w.dims()).to_json(),
        )?;
    }
    let rep = ReeReport::new(&res, &w, &sigma, &cfg, &bytes, a.bits, elapsed);
    write_text(a.out.as_deref(), &report::to_json(&rep))?;
    Ok(outcome(res.converged()))
}

fn gen_dims(a: &GenArgs) -> Result<Dims, CliError> {
    match a.dims.as_deref() {
        Some(&[d1, d2]) if d1 >= 1 && d2 >= 1 => Ok(Dims::new(d1, d2)),
        Some(_) => Err(CliError::Config(
            "--dims needs two positive integers".into(),
        )),
        None => Err(CliError::Config(
            "--dims D1 D2 is required for this kind".into(),
        )),
    }
}

pub fn generate_state(a: &GenArgs) -> Result<DensityMatrix, CliError> {
    let state = match a.kind {
        GenKind::Werner => {
            let d =
                a.d.ok_or_else(|| CliError::Config("--d is required for werner".into()))?;
            let f =
                a.f.ok_or_else(|| CliError::Config("--f is required for werner".into()))?;
            let p = WernerParameter::new(d, f).map_err(|e| CliError::Config(e.to_string()))?;
            werner_state(p)
        }
        GenKind::Separable => random_separable(gen_dims(a)?, a.seed)?,
        GenKind::Npt => {
            let dims = gen_dims(a)?;
            if dims.d1 < 2 || dims.d2 < 2 {
                return Err(CliError::Config(
                    "npt states need both dims at least 2".into(),
                ));
            }
            random_npt(dims, a.seed)?
        }
        GenKind::PureRandom => random_pure(gen_dims(a)?, a.seed)?,
    };
    Ok(state)
}

fn generate(a: GenArgs) -> Result<Outcome, CliError> {
    let state = generate_state(&a)?;
    let mut text = StateFile::from_state(&state).to_json();
    text.push('\n');
    write_text(a.out.as_deref(), &text)?;
    Ok(Outcome::Done)
}

fn witness(a: WitnessArgs) -> Result<Outcome, CliError> {
    let cfg = a.solver.config()?;
    if a.samples == 0 || a.product_restarts == 0 {
        return Err(CliError::Config(
            "--samples and --product-restarts must be at least 1".into(),
        ));
    }
    let (sigma, bytes) = read_state(&a.input, INPUT_TOL)?;
    let start = Instant::now();
    let res = iterate(&sigma, &cfg)?;
    let w = witness_from_result(&res);
    let check = verify_on_separables(&w, a.samples, cfg.seed)?;
    let product = min_product_expectation(&w, a.product_restarts, cfg.seed)?;
    let elapsed = start.elapsed().as_secs_f64();
    warn_if_not_converged(&res);
    if res.verdict == Verdict::Separable {
        eprintln!(
            "relent: warning: input is separable (E = {:.3e} nats); the operator certifies nothing",
            res.entanglement
        );
    }
    if !check.passed {
        eprintln!(
            "relent: warning: Tr(Wρ) = {:.3e} on a separable state",
            check.min_expectation
        );
    }

    if let Some(path) = &a.witness_out {
        write_text(
            Some(path),
            &StateFile::from_matrix(w.matrix(), w.dims()).to_json(),
        )?;
    }
    let dims = sigma.dims();
    let rep = WitnessReport {
        input_sha256: report::sha256_hex(&bytes),
        dims: [dims.d1, dims.d2],
        config: ConfigEcho::new(&cfg, dims),
        entanglement_nats: res.entanglement,
        verdict: res.verdict.to_string(),
        termination: res.termination.to_string(),
        converged: res.converged(),
        certifying: w.is_certifying(),
        expectation_input: w.expectation(&sigma),
        expectation_closest: w.expectation(&res.closest_separable),
        separable_min: check.min_expectation,
        separable_states_checked: check.states_checked,
        separable_passed: check.passed,
        product_min: product.value,
        wall_time_seconds: elapsed,
    };
    write_text(a.out.as_deref(), &report::to_json(&rep))?;
    Ok(outcome(res.converged()))
}

struct Series {
    label: String,
    state: DensityMatrix,
    reference: f64,
}

fn figure_series(kind: FigureKind, seed: u64) -> Result<Vec<Series>, CliError> {
    match kind {
        FigureKind::Fig2 => (0..FIG2_STATES)
            .map(|i| {
                Ok(Series {
                    label: format!("separable_{}", i + 1),
                    state: random_separable(Dims::new(2, 2), seed.wrapping_add(i))?,
                    reference: 0.0,
                })
            })
            .collect(),
        FigureKind::Fig3 => FIG3_F_VALUES
            .iter()
            .map(|&f| {
                let p = WernerParameter::new(FIG3_D, f)?;
                Ok(Series {
                    label: format!("f={f:.2}"),
                    state: werner_state(p),
                    reference: werner_reference_entanglement(p),
                })
            })
            .collect(),
    }
}

/// Runs every series of a benchmark figure; returns sorted rows and whether all converged.
pub fn figure_rows(
    kind: FigureKind,
    cfg: &IterationConfig,
) -> Result<(Vec<FigureRow>, bool), CliError> {
    let series = figure_series(kind, cfg.seed)?;
    let runs: Vec<(String, ReeResult, f64)> = series
        .into_par_iter()
        .map(|s| iterate(&s.state, cfg).map(|r| (s.label, r, s.reference)))
        .collect::<Result<_, _>>()?;
    let all_converged = runs.iter().all(|(_, r, _)| r.converged());
    let mut rows = Vec::new();
    for (label, res, reference) in &runs {
        if !res.converged() {
            eprintln!(
                "relent: warning: series {label} stopped with '{}'",
                res.termination
            );
        }
        let digits = precision_digits(&res.trace, *reference);
        rows.extend(
            res.trace
                .records
                .iter()
                .zip(digits)
                .map(|(r, d)| FigureRow {
                    series_label: label.clone(),
                    iteration: r.iter,
                    s_nats: r.s_value,
                    precision_digits: d,
                }),
        );
    }
    rows.sort_by(|a, b| {
        a.series_label
            .cmp(&b.series_label)
            .then(a.iteration.cmp(&b.iteration))
    });
    Ok((rows, all_converged))
}

fn figure(a: FigureArgs) -> Result<Outcome, CliError> {
    let cfg = a.solver.config()?;
    let (rows, converged) = figure_rows(a.kind, &cfg)?;
    write_text(a.out.as_deref(), &report::figure_csv(&rows)?)?;
    Ok(outcome(converged))
}
