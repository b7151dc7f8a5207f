//! Relative entropy of entanglement by regularized fixed-point iteration.
//!
//! The separable candidate is held as a [`ProductEnsemble`]. Each half-step
//! rebuilds the gradient operator `A` at the current iterate, contracts it
//! against the normalized projectors of one subsystem to get the local
//! operators `R_k`, and maps every vector of the other subsystem through
//! `(1 + α/2 R_k) / (1 + α/2)`. A fixed point satisfies `R_k P_k R_k = P_k`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qmatrix::{
    hermitian_eig, negentropy, partial_contract, relative_entropy_from_parts, ComplexMatrix,
    ComplexVector, Dims, HermitianEigensystem, Subsystem, SUPPORT_FLOOR,
};
use crate::states::{ensemble_to_state, random_product_ensemble, DensityMatrix, ProductEnsemble};

/// Relative gap below which two eigenvalues share the `1/λ` limit coefficient.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

/// Iterates whose minimum eigenvalue drops below this trigger a restart.
pub const RANK_COLLAPSE_FLOOR: f64 = 1e-12;

/// Step-size halvings tried before a half-step is declared stalled.
pub const MAX_HALVINGS: usize = 30;

/// Consecutive accepted half-steps before the step size grows again.
pub const GROWTH_AFTER: usize = 5;

pub const GROWTH_FACTOR: f64 = 1.5;

/// Rank-collapse restarts allowed per start before giving up.
pub const MAX_COLLAPSE_RESTARTS: usize = 3;

/// Weight kept by the fresh ensemble when restarting after a rank collapse.
const RESTART_MIX: f64 = 0.99;

/// Round-off allowance when comparing relative entropies for step acceptance.
pub const ACCEPT_SLACK: f64 = 1e-13;

const ZERO_NORM: f64 = 1e-14;

/// Gradient operator of `ρ ↦ S(σ‖ρ)`, expressed through divided differences of
/// the logarithm in the eigenbasis of the reference state.
#[derive(Debug, Clone)]
pub struct AOperator {
    matrix: ComplexMatrix,
    basis: HermitianEigensystem,
    degeneracy_tol: f64,
}

impl AOperator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    /// Eigensystem of the reference state the operator was built from.
    pub fn basis(&self) -> &HermitianEigensystem {
        &self.basis
    }

    pub fn degeneracy_tol(&self) -> f64 {
        self.degeneracy_tol
    }

    /// `Tr(A M)`, real part.
    pub fn expectation(&self, m: &ComplexMatrix) -> f64 {
        self.matrix.trace_product(m).re
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }
}

/// `(ln y − ln x) / (y − x)`, or the limit `1/y` when the two are relatively closer than `tol`.
pub fn log_divided_difference(x: f64, y: f64, tol: f64) -> f64 {
    let gap = y - x;
    if gap.abs() < tol * x.max(y) {
        1.0 / y
    } else {
        (gap / x).ln_1p() / gap
    }
}

pub(crate) fn a_operator_from_eigensystem(
    sigma: &ComplexMatrix,
    basis: HermitianEigensystem,
    degeneracy_tol: f64,
) -> Result<AOperator> {
    let min_eigenvalue = basis.min_eigenvalue();
    if min_eigenvalue < SUPPORT_FLOOR {
        return Err(Error::RankDeficientReference { min_eigenvalue });
    }
    let mut s = basis.to_eigenbasis(sigma);
    let lambda = &basis.eigenvalues;
    for m in 0..lambda.len() {
        for n in 0..lambda.len() {
            s[(m, n)] *= log_divided_difference(lambda[m], lambda[n], degeneracy_tol);
        }
    }
    let matrix = basis.from_eigenbasis(&s).hermitian_part();
    Ok(AOperator {
        matrix,
        basis,
        degeneracy_tol,
    })
}

fn check_same_dims(a: &DensityMatrix, b: &DensityMatrix) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!(
            "states over {} and {}",
            a.dims(),
            b.dims()
        )));
    }
    Ok(())
}

/// Builds `A(σ, ρ*)` with `⟨λ_m|A|λ_n⟩ = (ln λ_n − ln λ_m)/(λ_n − λ_m) ⟨λ_m|σ|λ_n⟩`.
pub fn build_a_operator(
    sigma: &DensityMatrix,
    rho_star: &DensityMatrix,
    degeneracy_tol: f64,
) -> Result<AOperator> {
    check_same_dims(sigma, rho_star)?;
    let basis = hermitian_eig(rho_star.matrix())?;
    a_operator_from_eigensystem(sigma.matrix(), basis, degeneracy_tol)
}

/// Derivative of `x ↦ S(σ‖(1−x)ρ* + xρ)` at `x = 0`, which equals `1 − Tr(Aρ)`.
pub fn directional_derivative(
    sigma: &DensityMatrix,
    rho_star: &DensityMatrix,
    rho: &DensityMatrix,
) -> Result<f64> {
    check_same_dims(sigma, rho)?;
    let a = build_a_operator(sigma, rho_star, DEFAULT_DEGENERACY_TOL)?;
    Ok(a.expectation(rho_star.matrix()) - a.expectation(rho.matrix()))
}

fn normalized(v: &ComplexVector, term: usize) -> Result<ComplexVector> {
    let n = v.norm();
    if n <= ZERO_NORM {
        return Err(Error::ZeroVector { term });
    }
    Ok(v.unscale(n))
}

/// `R_k` acting on `subsystem`: the partial trace of `A` against the normalized
/// projector of term `k`'s vector on the opposite subsystem.
pub fn r_operator(
    a: &AOperator,
    e: &ProductEnsemble,
    k: usize,
    subsystem: Subsystem,
) -> Result<ComplexMatrix> {
    let dims = e.dims();
    if a.matrix.dim() != dims.total() {
        return Err(Error::DimensionMismatch(format!(
            "A of dim {} for ensemble over {dims}",
            a.matrix.dim()
        )));
    }
    if k >= e.len() {
        return Err(Error::DimensionMismatch(format!(
            "term {k} of an ensemble with {} terms",
            e.len()
        )));
    }
    let v = normalized(e.vector(k, subsystem.other()), k)?;
    Ok(partial_contract(&a.matrix, dims, subsystem, &v).hermitian_part())
}

/// `‖R P R − P‖_F / ‖P‖_F` for `P = |φ⟩⟨φ|`, with `r_phi = Rφ`.
fn fixed_point_residual(phi: &ComplexVector, r_phi: &ComplexVector) -> f64 {
    let n = phi.len();
    let mut diff = 0.0;
    for i in 0..n {
        for j in 0..n {
            diff += (r_phi[i] * r_phi[j].conj() - phi[i] * phi[j].conj()).norm_sqr();
        }
    }
    diff.sqrt() / phi.norm_squared()
}

/// Maps one subsystem's vectors through the regularized `R_k`; returns the new
/// normalized ensemble and the largest unregularized fixed-point residual.
fn regularized_update(
    a: &ComplexMatrix,
    e: &ProductEnsemble,
    subsystem: Subsystem,
    alpha: f64,
) -> Result<(ProductEnsemble, f64)> {
    let dims = e.dims();
    let mut next = e.clone();
    let mut worst = 0.0f64;
    let half = 0.5 * alpha;
    for (k, (phi1, phi2)) in next.terms_mut().iter_mut().enumerate() {
        let (target, other) = match subsystem {
            Subsystem::First => (phi1, &*phi2),
            Subsystem::Second => (phi2, &*phi1),
        };
        let v = normalized(other, k)?;
        let r = partial_contract(a, dims, subsystem, &v).hermitian_part();
        let r_phi = r.mul_vec(target);
        worst = worst.max(fixed_point_residual(target, &r_phi));
        let mapped = (&*target + r_phi.scale(half)).unscale(1.0 + half);
        *target = mapped;
    }
    next.normalize_on(subsystem)?;
    Ok((next, worst))
}

/// One regularized half-step on `subsystem`, with the induced state renormalized.
pub fn half_step(
    e: &ProductEnsemble,
    sigma: &DensityMatrix,
    subsystem: Subsystem,
    alpha: f64,
) -> Result<ProductEnsemble> {
    if sigma.dims() != e.dims() {
        return Err(Error::DimensionMismatch(format!(
            "state over {} for ensemble over {}",
            sigma.dims(),
            e.dims()
        )));
    }
    let rho = ensemble_to_state(e)?;
    let a = build_a_operator(sigma, &rho, DEFAULT_DEGENERACY_TOL)?;
    let (next, _) = regularized_update(&a.matrix, e, subsystem, alpha)?;
    let min = hermitian_eig(&next.induced_operator())?.min_eigenvalue();
    if min < RANK_COLLAPSE_FLOOR {
        return Err(Error::RankCollapse { restarts: 0 });
    }
    Ok(next)
}

/// Separability verdict from the converged relative entropy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Separable,
    Entangled,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Separable => "separable",
            Verdict::Entangled => "entangled",
        })
    }
}

/// Why the iteration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Termination {
    /// Entropy stagnation and fixed-point residual both under tolerance.
    Converged,
    /// `max_iters` reached first.
    MaxIterations,
    /// Both half-steps of an iteration failed to decrease the entropy even
    /// after all halvings, while the residual stayed above tolerance.
    Stalled,
    /// Every shortened step pushed the iterate below the rank floor: the
    /// minimizer lies on the boundary of the full-rank states, as it does
    /// for entangled pure inputs.
    Boundary,
}

impl std::fmt::Display for Termination {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::Stalled => "stalled",
            Termination::Boundary => "boundary",
        })
    }
}

#[derive(Debug, Clone)]
pub struct IterationConfig {
    /// Regularization strength; also the cap for adaptive growth.
    pub alpha: f64,
    pub max_iters: usize,
    /// Stop once a full iteration lowers the entropy by less than this.
    pub tol_entropy: f64,
    /// ... and the worst `‖R P R − P‖_F/‖P‖_F` is below this.
    pub tol_residual: f64,
    /// Entanglement (nats) below which the verdict is separable.
    pub sep_threshold: f64,
    /// Ensemble size; `None` means `(d1·d2)²`.
    pub ensemble_size: Option<usize>,
    pub seed: u64,
    pub backtracking: bool,
    /// Independent random starts; the lowest entropy wins.
    pub starts: usize,
    pub degeneracy_tol: f64,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            max_iters: 20_000,
            tol_entropy: 1e-12,
            tol_residual: 1e-8,
            sep_threshold: 1e-7,
            ensemble_size: None,
            seed: 1,
            backtracking: true,
            starts: 3,
            degeneracy_tol: DEFAULT_DEGENERACY_TOL,
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("tol_entropy", self.tol_entropy),
            ("tol_residual", self.tol_residual),
            ("sep_threshold", self.sep_threshold),
            ("degeneracy_tol", self.degeneracy_tol),
        ];
        for (name, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidConfig("max_iters must be at least 1".into()));
        }
        if self.starts == 0 {
            return Err(Error::InvalidConfig("starts must be at least 1".into()));
        }
        if self.ensemble_size == Some(0) {
            return Err(Error::InvalidConfig(
                "ensemble_size must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn ensemble_size_for(&self, dims: Dims) -> usize {
        self.ensemble_size
            .unwrap_or_else(|| ProductEnsemble::default_size(dims))
    }
}

/// State after one full iteration (both half-steps).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    /// `S(σ‖ρ)` in nats after the iteration.
    pub s_value: f64,
    /// Previous value minus this one; positive means progress.
    pub delta_s: f64,
    /// Smallest step parameter accepted during the iteration.
    pub alpha_used: f64,
    pub max_residual: f64,
    /// Set on the first iteration after a rank-collapse restart.
    pub restarted: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceTrace {
    pub records: Vec<IterationRecord>,
}

impl ConvergenceTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// Largest increase of `S` between consecutive records, ignoring restarts.
    pub fn max_increase(&self) -> f64 {
        self.records
            .windows(2)
            .filter(|w| !w[1].restarted)
            .map(|w| w[1].s_value - w[0].s_value)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `−log₁₀ |S_i − reference|` per record, with the error floored at `1e-15`.
pub fn precision_digits(trace: &ConvergenceTrace, reference_e: f64) -> Vec<f64> {
    trace
        .records
        .iter()
        .map(|r| -((r.s_value - reference_e).abs().max(1e-15)).log10())
        .collect()
}

#[derive(Debug, Clone)]
pub struct ReeResult {
    /// `E(σ)` in nats.
    pub entanglement: f64,
    pub closest_separable: DensityMatrix,
    pub ensemble: ProductEnsemble,
    pub a_operator: AOperator,
    pub verdict: Verdict,
    pub trace: ConvergenceTrace,
    pub termination: Termination,
    /// Seed of the winning start.
    pub start_seed: u64,
    /// Rank-collapse restarts taken by the winning start.
    pub collapse_restarts: usize,
}

impl ReeResult {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }

    pub fn final_residual(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |r| r.max_residual)
    }
}

/// Current iterate with everything derived from it cached.
struct Iterate {
    ensemble: ProductEnsemble,
    eig: HermitianEigensystem,
    s: f64,
}

struct Objective<'a> {
    sigma: &'a DensityMatrix,
    sigma_negentropy: f64,
}

enum Evaluated {
    Ok(Iterate),
    Collapsed,
}

impl Objective<'_> {
    fn evaluate(&self, ensemble: ProductEnsemble) -> Result<Evaluated> {
        let eig = hermitian_eig(&ensemble.induced_operator().hermitian_part())?;
        if eig.min_eigenvalue() < RANK_COLLAPSE_FLOOR {
            return Ok(Evaluated::Collapsed);
        }
        let s = relative_entropy_from_parts(self.sigma.matrix(), self.sigma_negentropy, &eig);
        Ok(Evaluated::Ok(Iterate { ensemble, eig, s }))
    }
}

enum HalfStep {
    Accepted { alpha: f64, residual: f64 },
    Stalled { residual: f64 },
    Collapsed,
}

/// Derives the seed of start `index` (and of its restarts) from the user seed.
fn derived_seed(seed: u64, index: u64) -> u64 {
    seed.wrapping_add(index.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

struct Run {
    current: Iterate,
    trace: ConvergenceTrace,
    termination: Termination,
    seed: u64,
    restarts: usize,
    degeneracy_tol: f64,
}

struct Runner<'a> {
    objective: Objective<'a>,
    config: &'a IterationConfig,
    dims: Dims,
    size: usize,
}

impl Runner<'_> {
    fn fresh(&self, seed: u64, restart: usize) -> Result<Iterate> {
        let mut ensemble = random_product_ensemble(self.dims, self.size, seed)?;
        if restart > 0 {
            ensemble = ensemble.mix(
                RESTART_MIX,
                &ProductEnsemble::computational_basis(self.dims),
            )?;
        }
        match self.objective.evaluate(ensemble)? {
            Evaluated::Ok(it) => Ok(it),
            Evaluated::Collapsed => Err(Error::DegenerateDraw { attempts: 1 }),
        }
    }

    fn half_step(
        &self,
        it: &mut Iterate,
        subsystem: Subsystem,
        alpha: &mut f64,
    ) -> Result<HalfStep> {
        let a = a_operator_from_eigensystem(
            self.objective.sigma.matrix(),
            it.eig.clone(),
            self.config.degeneracy_tol,
        )?;
        let mut residual = None;
        let mut collapsed = false;
        for _ in 0..=MAX_HALVINGS {
            let (candidate, res) = regularized_update(&a.matrix, &it.ensemble, subsystem, *alpha)?;
            residual.get_or_insert(res);
            let next = match self.objective.evaluate(candidate)? {
                Evaluated::Ok(next) => next,
                // a shorter step keeps the iterate off the boundary
                Evaluated::Collapsed if self.config.backtracking => {
                    *alpha *= 0.5;
                    collapsed = true;
                    continue;
                }
                Evaluated::Collapsed => return Ok(HalfStep::Collapsed),
            };
            collapsed = false;
            if !self.config.backtracking || next.s <= it.s + ACCEPT_SLACK {
                let used = *alpha;
                *it = next;
                return Ok(HalfStep::Accepted {
                    alpha: used,
                    residual: residual.unwrap_or(res),
                });
            }
            *alpha *= 0.5;
        }
        if collapsed {
            return Ok(HalfStep::Collapsed);
        }
        Ok(HalfStep::Stalled {
            residual: residual.unwrap_or(f64::INFINITY),
        })
    }

    fn run(&self, start: u64) -> Result<Run> {
        let cfg = self.config;
        let mut restarts = 0usize;
        let seed = derived_seed(cfg.seed, start);
        let mut current = self.fresh(seed, 0)?;
        let mut trace = ConvergenceTrace::default();
        let mut alpha = cfg.alpha;
        let mut accepted_streak = 0usize;
        let mut just_restarted = false;
        let mut termination = Termination::MaxIterations;

        let mut iter = 0;
        while iter < cfg.max_iters {
            let before = current.s;
            let mut residual = 0.0f64;
            let mut alpha_used = f64::INFINITY;
            let mut stalls = 0;
            let mut collapsed = false;
            for subsystem in [Subsystem::First, Subsystem::Second] {
                let prior_alpha = alpha;
                match self.half_step(&mut current, subsystem, &mut alpha)? {
                    HalfStep::Accepted {
                        alpha: used,
                        residual: r,
                    } => {
                        residual = residual.max(r);
                        alpha_used = alpha_used.min(used);
                        if used < prior_alpha {
                            accepted_streak = 0;
                        } else {
                            accepted_streak += 1;
                        }
                        if accepted_streak >= GROWTH_AFTER {
                            alpha = (alpha * GROWTH_FACTOR).min(cfg.alpha);
                            accepted_streak = 0;
                        }
                    }
                    HalfStep::Stalled { residual: r } => {
                        residual = residual.max(r);
                        stalls += 1;
                        alpha = prior_alpha;
                        accepted_streak = 0;
                    }
                    HalfStep::Collapsed => {
                        collapsed = true;
                        break;
                    }
                }
            }
            if collapsed && cfg.backtracking {
                if residual > 0.0 || alpha_used.is_finite() {
                    iter += 1;
                    trace.records.push(IterationRecord {
                        iter,
                        s_value: current.s,
                        delta_s: before - current.s,
                        alpha_used: if alpha_used.is_finite() {
                            alpha_used
                        } else {
                            0.0
                        },
                        max_residual: residual,
                        restarted: just_restarted,
                    });
                }
                termination = Termination::Boundary;
                break;
            }
            if collapsed {
                restarts += 1;
                if restarts > MAX_COLLAPSE_RESTARTS {
                    return Err(Error::RankCollapse {
                        restarts: MAX_COLLAPSE_RESTARTS,
                    });
                }
                current = self.fresh(derived_seed(seed, restarts as u64), restarts)?;
                alpha = cfg.alpha;
                accepted_streak = 0;
                just_restarted = true;
                continue;
            }
            iter += 1;
            let delta = before - current.s;
            trace.records.push(IterationRecord {
                iter,
                s_value: current.s,
                delta_s: delta,
                alpha_used: if alpha_used.is_finite() {
                    alpha_used
                } else {
                    0.0
                },
                max_residual: residual,
                restarted: just_restarted,
            });
            just_restarted = false;
            if delta.abs() < cfg.tol_entropy && residual < cfg.tol_residual {
                termination = Termination::Converged;
                break;
            }
            if stalls == 2 {
                termination = Termination::Stalled;
                break;
            }
        }
        Ok(Run {
            current,
            trace,
            termination,
            seed,
            restarts,
            degeneracy_tol: cfg.degeneracy_tol,
        })
    }
}

/// Minimizes `S(σ‖ρ)` over separable `ρ` from `config.starts` random starts.
///
/// A run that hits `max_iters` is still returned, with
/// [`Termination::MaxIterations`]; only rank collapse after all restarts
/// (on every start) is an error.
pub fn iterate(sigma: &DensityMatrix, config: &IterationConfig) -> Result<ReeResult> {
    config.validate()?;
    let dims = sigma.dims();
    let size = config.ensemble_size_for(dims);
    if size < dims.total() {
        return Err(Error::InvalidConfig(format!(
            "ensemble size {size} cannot represent a full-rank state on {dims}"
        )));
    }
    let sigma_eig = hermitian_eig(sigma.matrix())?;
    let runner = Runner {
        objective: Objective {
            sigma,
            sigma_negentropy: negentropy(&sigma_eig.eigenvalues),
        },
        config,
        dims,
        size,
    };

    let runs: Vec<Result<Run>> = (0..config.starts as u64)
        .into_par_iter()
        .map(|start| runner.run(start))
        .collect();

    let mut best: Option<Run> = None;
    let mut first_err = None;
    for run in runs {
        match run {
            Ok(run) => {
                if best.as_ref().is_none_or(|b| run.current.s < b.current.s) {
                    best = Some(run);
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    let Some(run) = best else {
        return Err(first_err.expect("at least one start"));
    };

    let entanglement = run.current.s.max(0.0);
    let closest_separable = ensemble_to_state(&run.current.ensemble)?;
    let a_operator =
        a_operator_from_eigensystem(sigma.matrix(), run.current.eig, run.degeneracy_tol)?;
    let verdict = if entanglement < config.sep_threshold {
        Verdict::Separable
    } else {
        Verdict::Entangled
    };
    Ok(ReeResult {
        entanglement,
        closest_separable,
        ensemble: run.current.ensemble,
        a_operator,
        verdict,
        trace: run.trace,
        termination: run.termination,
        start_seed: run.seed,
        collapse_restarts: run.restarts,
    })
}
