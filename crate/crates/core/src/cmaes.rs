//! CMA-ES with rank-one and rank-mu covariance updates and cumulative
//! step-size adaptation, written as a maximizer.
//!
//! Bounds are handled by repair plus penalty: an infeasible sample is
//! clamped into the box, the clamped point is evaluated, and its fitness is
//! reduced by `alpha * ||x - repair(x)||^2`. Distribution updates use the
//! original (unrepaired) samples.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::bounds::in_unit_box;
use crate::driver::{drive, RunOutcome, StopFn, Strategy};
use crate::error::{CoreError, Result};
use crate::log::EvaluationLog;
use crate::objective::Objective;
use crate::rng::Rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CmaesConfig {
    /// Initial step size in normalized coordinates.
    pub sigma0: f64,
    /// Population size; `4 + floor(3 ln D)` when unset.
    pub population: Option<usize>,
    /// Parent count; `floor(lambda / 2)` when unset.
    pub parents: Option<usize>,
    /// Penalty coefficient is `penalty_scale * max(1, observed value range)`.
    pub penalty_scale: f64,
    /// Stop when `sigma * sqrt(max eig C)` drops below this.
    pub tol_x: f64,
}

impl Default for CmaesConfig {
    fn default() -> Self {
        Self {
            sigma0: 0.3,
            population: None,
            parents: None,
            penalty_scale: 1e4,
            tol_x: 1e-12,
        }
    }
}

/// Strategy parameters derived from the dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CmaesParams {
    pub dim: usize,
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub c_c: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub mu_cov: f64,
    pub c_cov: f64,
    /// Expected norm of a standard normal vector, `E||N(0, I)||`.
    pub chi_n: f64,
}

pub fn default_population(dim: usize) -> usize {
    4 + (3.0 * (dim as f64).ln()).floor() as usize
}

/// Superlinear recombination weights
/// `(ln(mu+1) - ln i) / (mu ln(mu+1) - ln(mu!))`.
pub fn superlinear_weights(mu: usize) -> Vec<f64> {
    let m = mu as f64;
    let ln_fact: f64 = (1..=mu).map(|i| (i as f64).ln()).sum();
    let denom = m * (m + 1.0).ln() - ln_fact;
    (1..=mu)
        .map(|i| ((m + 1.0).ln() - (i as f64).ln()) / denom)
        .collect()
}

pub fn cmaes_params(dim: usize, lambda: Option<usize>, mu: Option<usize>) -> Result<CmaesParams> {
    if dim == 0 {
        return Err(CoreError::Usage("dimension must be at least 1".into()));
    }
    let lambda = lambda.unwrap_or_else(|| default_population(dim));
    let mu = mu.unwrap_or(lambda / 2);
    if mu == 0 || mu > lambda || lambda < 2 {
        return Err(CoreError::Usage(format!(
            "need 1 <= mu <= lambda and lambda >= 2 (mu={mu}, lambda={lambda})"
        )));
    }
    let n = dim as f64;
    let weights = superlinear_weights(mu);
    let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    let c_c = 4.0 / (n + 4.0);
    let c_sigma = (mu_eff + 2.0) / (n + mu_eff + 3.0);
    let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (n + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
    let mu_cov = mu_eff;
    let c_cov = (1.0 / mu_cov) * 2.0 / (n + std::f64::consts::SQRT_2).powi(2)
        + (1.0 - 1.0 / mu_cov) * (1.0f64).min((2.0 * mu_eff - 1.0) / ((n + 2.0).powi(2) + mu_eff));
    let chi_n = n.sqrt() * (1.0 - 1.0 / (4.0 * n) + 1.0 / (21.0 * n * n));
    Ok(CmaesParams {
        dim,
        lambda,
        mu,
        weights,
        mu_eff,
        c_c,
        c_sigma,
        d_sigma,
        mu_cov,
        c_cov,
        chi_n,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmaesState {
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub cov: DMatrix<f64>,
    pub p_c: DVector<f64>,
    pub p_sigma: DVector<f64>,
    pub iteration: usize,
}

impl CmaesState {
    /// Zero paths and identity covariance.
    pub fn new(mean: &[f64], sigma: f64) -> Self {
        let d = mean.len();
        Self {
            mean: DVector::from_column_slice(mean),
            sigma,
            cov: DMatrix::identity(d, d),
            p_c: DVector::zeros(d),
            p_sigma: DVector::zeros(d),
            iteration: 0,
        }
    }
}

/// `C = B diag(scales^2) B^T`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub basis: DMatrix<f64>,
    pub scales: DVector<f64>,
}

impl Eigen {
    pub fn max_scale(&self) -> f64 {
        self.scales.iter().cloned().fold(0.0, f64::max)
    }

    /// `C^{-1/2} v`.
    pub fn inv_sqrt_mul(&self, v: &DVector<f64>) -> DVector<f64> {
        let mut t = self.basis.tr_mul(v);
        for (ti, s) in t.iter_mut().zip(self.scales.iter()) {
            *ti /= s;
        }
        &self.basis * t
    }
}

pub fn decompose(cov: &DMatrix<f64>) -> Result<Eigen> {
    let eig = SymmetricEigen::new(cov.clone());
    for &ev in eig.eigenvalues.iter() {
        if !(ev.is_finite() && ev > 0.0) {
            return Err(CoreError::NumericDegeneracy { eigenvalue: ev });
        }
    }
    Ok(Eigen {
        basis: eig.eigenvectors,
        scales: eig.eigenvalues.map(f64::sqrt),
    })
}

/// `lambda` draws of `m + sigma * B * D * z`, `z ~ N(0, I)`.
pub fn sample_population(state: &CmaesState, lambda: usize, rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
    let eig = decompose(&state.cov)?;
    let d = state.mean.len();
    Ok((0..lambda)
        .map(|_| {
            let z = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
            let scaled = z.component_mul(&eig.scales);
            let x = &state.mean + state.sigma * (&eig.basis * scaled);
            x.iter().copied().collect()
        })
        .collect())
}

/// Componentwise clamp into the unit box.
pub fn repair(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.clamp(0.0, 1.0)).collect()
}

/// `f(repair(x)) - alpha * ||x - repair(x)||^2`; unchanged for feasible `x`.
pub fn penalized_fitness(raw_value: f64, x: &[f64], repaired: &[f64], alpha: f64) -> f64 {
    let dist2: f64 = x.iter().zip(repaired).map(|(a, b)| (a - b) * (a - b)).sum();
    if dist2 == 0.0 {
        raw_value
    } else {
        raw_value - alpha * dist2
    }
}

/// Repair `x`, evaluate the repaired point once through `value_of`, and
/// return the penalized fitness with the point that was evaluated.
pub fn repair_and_penalize(
    x: &[f64],
    alpha: f64,
    value_of: impl FnOnce(&[f64]) -> f64,
) -> (f64, Vec<f64>) {
    let rep = repair(x);
    let raw = value_of(&rep);
    (penalized_fitness(raw, x, &rep, alpha), rep)
}

/// `sigma * exp(c_sigma / d_sigma * (||p_sigma|| / chi_n - 1))`.
pub fn adapt_step_size(sigma: f64, p_sigma_norm: f64, params: &CmaesParams) -> f64 {
    sigma * (params.c_sigma / params.d_sigma * (p_sigma_norm / params.chi_n - 1.0)).exp()
}

/// One distribution update from the population ranked by penalized fitness
/// (best first). Points are the original samples, before repair.
pub fn cmaes_update(
    state: &CmaesState,
    params: &CmaesParams,
    ranked: &[(f64, Vec<f64>)],
) -> Result<CmaesState> {
    if ranked.len() < params.mu {
        return Err(CoreError::Usage(format!(
            "need at least mu={} ranked points, got {}",
            params.mu,
            ranked.len()
        )));
    }
    for w in ranked.windows(2) {
        if w[1].0 > w[0].0 {
            return Err(CoreError::Usage("ranked points are not in descending order".into()));
        }
    }
    if ranked.iter().any(|(f, _)| !f.is_finite()) {
        return Err(CoreError::Usage("non-finite fitness in ranked population".into()));
    }
    let d = params.dim;
    let eig = decompose(&state.cov)?;
    let old_mean = &state.mean;
    let sigma = state.sigma;

    let mut mean = DVector::zeros(d);
    let mut rank_mu = DMatrix::zeros(d, d);
    for (w, (_, x)) in params.weights.iter().zip(ranked) {
        let x = DVector::from_column_slice(x);
        mean += *w * &x;
        let y = (&x - old_mean) / sigma;
        rank_mu += *w * &y * y.transpose();
    }
    let shift = (&mean - old_mean) / sigma;

    let ps_coef = (params.c_sigma * (2.0 - params.c_sigma) * params.mu_eff).sqrt();
    let p_sigma = (1.0 - params.c_sigma) * &state.p_sigma + ps_coef * eig.inv_sqrt_mul(&shift);
    let pc_coef = (params.c_c * (2.0 - params.c_c) * params.mu_eff).sqrt();
    let p_c = (1.0 - params.c_c) * &state.p_c + pc_coef * &shift;

    let mut cov = (1.0 - params.c_cov) * &state.cov
        + (params.c_cov / params.mu_cov) * &p_c * p_c.transpose()
        + params.c_cov * (1.0 - 1.0 / params.mu_cov) * rank_mu;
    cov = (&cov + cov.transpose()) * 0.5;

    Ok(CmaesState {
        sigma: adapt_step_size(sigma, p_sigma.norm(), params),
        mean,
        cov,
        p_c,
        p_sigma,
        iteration: state.iteration + 1,
    })
}

enum Phase {
    Start,
    StartPending,
    Sampling,
    Pending(Vec<Vec<f64>>, Vec<Vec<f64>>),
    Done,
}

pub struct Cmaes {
    config: CmaesConfig,
    params: CmaesParams,
    state: CmaesState,
    phase: Phase,
    value_min: f64,
    value_max: f64,
}

impl Cmaes {
    pub fn new(x0: &[f64], config: CmaesConfig) -> Result<Self> {
        if !in_unit_box(x0) {
            return Err(CoreError::Infeasible);
        }
        if !(config.sigma0 > 0.0) {
            return Err(CoreError::Usage("sigma0 must be positive".into()));
        }
        let params = cmaes_params(x0.len(), config.population, config.parents)?;
        Ok(Self {
            state: CmaesState::new(x0, config.sigma0),
            params,
            config,
            phase: Phase::Start,
            value_min: f64::INFINITY,
            value_max: f64::NEG_INFINITY,
        })
    }

    pub fn params(&self) -> &CmaesParams {
        &self.params
    }

    pub fn state(&self) -> &CmaesState {
        &self.state
    }

    fn note_values(&mut self, values: &[f64]) {
        for v in values.iter().filter(|v| v.is_finite()) {
            self.value_min = self.value_min.min(*v);
            self.value_max = self.value_max.max(*v);
        }
    }

    /// Current penalty coefficient.
    pub fn alpha(&self) -> f64 {
        let range = if self.value_max >= self.value_min {
            self.value_max - self.value_min
        } else {
            0.0
        };
        self.config.penalty_scale * range.max(1.0)
    }
}

impl Strategy for Cmaes {
    fn propose(&mut self, rng: &mut Rng) -> Result<Vec<Vec<f64>>> {
        match self.phase {
            Phase::Start => {
                self.phase = Phase::StartPending;
                Ok(vec![self.state.mean.iter().copied().collect()])
            }
            Phase::Sampling => {
                let raw = sample_population(&self.state, self.params.lambda, rng)?;
                let repaired: Vec<Vec<f64>> = raw.iter().map(|x| repair(x)).collect();
                self.phase = Phase::Pending(raw, repaired.clone());
                Ok(repaired)
            }
            Phase::Done => Ok(Vec::new()),
            _ => Err(CoreError::Usage("propose called twice without observe".into())),
        }
    }

    fn observe(&mut self, values: &[f64]) -> Result<()> {
        match std::mem::replace(&mut self.phase, Phase::Sampling) {
            Phase::StartPending => {
                self.note_values(values);
            }
            Phase::Pending(raw, repaired) => {
                self.note_values(values);
                let alpha = self.alpha();
                let mut ranked: Vec<(f64, Vec<f64>)> = raw
                    .into_iter()
                    .zip(&repaired)
                    .zip(values)
                    .map(|((x, rep), v)| (penalized_fitness(*v, &x, rep, alpha), x))
                    .collect();
                ranked.sort_by(|a, b| b.0.total_cmp(&a.0));
                self.state = cmaes_update(&self.state, &self.params, &ranked)?;
                let eig = decompose(&self.state.cov)?;
                if self.state.sigma * eig.max_scale() < self.config.tol_x {
                    self.phase = Phase::Done;
                }
            }
            _ => return Err(CoreError::Usage("observe without pending batch".into())),
        }
        Ok(())
    }

    fn next_batch_hint(&self) -> Option<usize> {
        match self.phase {
            Phase::Start => Some(1),
            Phase::Sampling => Some(self.params.lambda),
            _ => None,
        }
    }
}

/// Run CMA-ES from `x0` (objective units). The initial mean is evaluated
/// once before the first generation, so the budget must cover `1 + lambda`.
pub fn run_cmaes(
    objective: &dyn Objective,
    x0: &[f64],
    config: CmaesConfig,
    budget: usize,
    rng: &mut Rng,
) -> Result<(RunOutcome, EvaluationLog)> {
    let bounds = objective.bounds();
    if !bounds.contains(x0) {
        return Err(CoreError::Infeasible);
    }
    let mut es = Cmaes::new(&bounds.normalize(x0)?, config)?;
    let lambda = es.params().lambda;
    if budget < lambda + 1 {
        return Err(CoreError::Usage(format!(
            "budget {budget} cannot cover the initial point plus one generation of {lambda}"
        )));
    }
    let mut log = EvaluationLog::new(budget);
    let out = drive(&mut es, objective, &mut log, budget, rng, None::<&mut StopFn>)?;
    Ok((out, log))
}
