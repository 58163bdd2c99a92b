//! Metropolis estimation of photon-position and momentum moments of the
//! t = 0 soliton state.
//!
//! The target density is
//!
//! ```text
//! |f|^2 ∝ exp[ -2 dp^2 (sum z)^2 + (c/b) S(z) ]
//! ```
//!
//! Pair statistics are averaged over the `N(N-1)/2` distinct pairs, i.e. with
//! the factor `2 / (N (N-1))`. Momentum quadratics use the score identity
//! `<(v.P)^2> = E[(v . grad log|psi|)^2]`, valid for the real t = 0
//! wavefunction.

pub mod ess;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bethe::{self, PulseCenterState};
use crate::model::{self, SolitonParams};
use crate::reduce::tree_sum;
use crate::{Error, Result};

/// Minimum effective sample size accepted for any reported moment.
pub const MIN_ESS: f64 = 1000.0;
/// Post-tuning acceptance rates outside this interval are diagnostic failures.
pub const ACCEPTANCE_RANGE: (f64, f64) = (0.15, 0.7);
const TUNE_TARGET: (f64, f64) = (0.3, 0.5);
const TUNE_BATCH: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcConfig {
    pub chains: usize,
    pub samples_per_chain: usize,
    pub burn_in: usize,
    /// Initial per-coordinate random-walk step; tuned during burn-in.
    pub proposal_stddev: f64,
    pub seed: u64,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            samples_per_chain: 250_000,
            burn_in: 25_000,
            proposal_stddev: 0.5,
            seed: 1,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.chains < 2 {
            return Err(Error::InvalidParameter("mcmc.chains must be >= 2".into()));
        }
        if self.samples_per_chain < 4 {
            return Err(Error::InvalidParameter("mcmc.samples_per_chain must be >= 4".into()));
        }
        if self.burn_in * 10 < self.samples_per_chain {
            return Err(Error::InvalidParameter(
                "mcmc.burn_in must be at least 10% of samples_per_chain".into(),
            ));
        }
        if !(self.proposal_stddev.is_finite() && self.proposal_stddev > 0.0) {
            return Err(Error::InvalidParameter("mcmc.proposal_stddev must be positive".into()));
        }
        Ok(())
    }
}

/// A sampled mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, se: 0.0 }
    }

    /// Distance to `target` in units of `sqrt(se^2 + extra_se^2)`.
    pub fn z_score(&self, target: f64, extra_se: f64) -> f64 {
        let diff = (self.value - target).abs();
        let se = self.se.hypot(extra_se);
        if se > 0.0 {
            diff / se
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Moments of the photon positions at t = 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentEstimates {
    /// Pair-averaged `<|z_j - z_i|>`.
    pub mean_abs_distance: Estimate,
    /// Pair-averaged `<|z_j - z_i|^2>`.
    pub mean_sq_distance: Estimate,
    /// `<|r|^2> / <|r|>^2`.
    pub q: Estimate,
    /// `<(sum z)^2>`.
    pub var_sum: Estimate,
    /// `<z_j^2>` averaged over photons.
    pub cov_same: Estimate,
    /// `<z_i z_j>` averaged over pairs.
    pub cov_cross: Estimate,
    /// `<(P_X - P_Y)^2>` with `P_X`, `P_Y` the total momenta of each mode.
    pub p_minus_var: Estimate,
    /// `<((X + Y)/2)^2>` with X, Y the mode pulse centers; both modes occupied.
    pub var_sum_half: Option<Estimate>,
    /// `<((X - Y)/2)^2>`.
    pub var_diff_half: Option<Estimate>,
    /// Smallest effective sample size over the position moments.
    pub ess: f64,
    pub acceptance_rate: f64,
    pub samples: usize,
    pub dp: f64,
    /// Set when B != 1: no exact theory to compare against.
    pub exploratory: bool,
}

fn log_density(zs: &[f64], params: &SolitonParams, dp: f64) -> f64 {
    let sum: f64 = zs.iter().sum();
    let mut s = 0.0;
    for j in 0..zs.len() {
        for i in 0..j {
            s += params.coupling(i, j) * (zs[j] - zs[i]).abs();
        }
    }
    -2.0 * dp * dp * sum * sum + params.c / params.b * s
}

struct ChainOutput {
    traces: Vec<Vec<f64>>,
    acceptance: f64,
}

/// Runs one tuned random-walk chain and records `observables` per kept draw.
fn run_chain<F>(
    params: &SolitonParams,
    dp: f64,
    mcmc: &McmcConfig,
    chain: usize,
    n_obs: usize,
    observe: &F,
) -> ChainOutput
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    let mut rng = ChaCha8Rng::seed_from_u64(mcmc.seed);
    rng.set_stream(chain as u64);
    let big_n = params.total();
    let w0 = (2.0 * params.b / (big_n as f64 * params.c)).abs();
    let mut z: Vec<f64> = (0..big_n)
        .map(|j| 0.1 * w0 * (j as f64 - 0.5 * (big_n - 1) as f64))
        .collect();
    let mut prop = z.clone();
    let mut logp = log_density(&z, params, dp);
    let mut step = mcmc.proposal_stddev;
    let mut obs = vec![0.0; n_obs];
    let mut traces = vec![Vec::with_capacity(mcmc.samples_per_chain); n_obs];

    let mut advance = |rng: &mut ChaCha8Rng, z: &mut Vec<f64>, logp: &mut f64, step: f64| -> bool {
        for (p, x) in prop.iter_mut().zip(z.iter()) {
            let e: f64 = StandardNormal.sample(rng);
            *p = x + step * e;
        }
        let cand = log_density(&prop, params, dp);
        let u: f64 = rng.random();
        if u.ln() < cand - *logp {
            z.copy_from_slice(&prop);
            *logp = cand;
            true
        } else {
            false
        }
    };

    let mut batch_accepted = 0usize;
    for i in 0..mcmc.burn_in {
        if advance(&mut rng, &mut z, &mut logp, step) {
            batch_accepted += 1;
        }
        if (i + 1) % TUNE_BATCH == 0 {
            let rate = batch_accepted as f64 / TUNE_BATCH as f64;
            if rate < TUNE_TARGET.0 {
                step *= 0.8;
            } else if rate > TUNE_TARGET.1 {
                step *= 1.25;
            }
            batch_accepted = 0;
        }
    }

    let mut accepted = 0usize;
    for _ in 0..mcmc.samples_per_chain {
        if advance(&mut rng, &mut z, &mut logp, step) {
            accepted += 1;
        }
        observe(&z, &mut obs);
        for (t, &o) in traces.iter_mut().zip(&obs) {
            t.push(o);
        }
    }
    ChainOutput {
        traces,
        acceptance: accepted as f64 / mcmc.samples_per_chain as f64,
    }
}

/// Per-observable chains (`[observable][chain][draw]`) plus acceptance rates.
struct Draws {
    per_obs: Vec<Vec<Vec<f64>>>,
    acceptance: Vec<f64>,
}

fn run_chains<F>(params: &SolitonParams, dp: f64, mcmc: &McmcConfig, n_obs: usize, observe: F) -> Result<Draws>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    mcmc.validate()?;
    let outputs: Vec<ChainOutput> = (0..mcmc.chains)
        .into_par_iter()
        .map(|c| run_chain(params, dp, mcmc, c, n_obs, &observe))
        .collect();
    let acceptance: Vec<f64> = outputs.iter().map(|o| o.acceptance).collect();
    for (chain, &rate) in acceptance.iter().enumerate() {
        if rate < ACCEPTANCE_RANGE.0 || rate > ACCEPTANCE_RANGE.1 {
            return Err(Error::AcceptanceOutOfRange { rate, chain });
        }
    }
    let mut per_obs = vec![Vec::with_capacity(mcmc.chains); n_obs];
    for out in outputs {
        for (k, t) in out.traces.into_iter().enumerate() {
            per_obs[k].push(t);
        }
    }
    Ok(Draws { per_obs, acceptance })
}

/// Pooled mean over chains with a fixed summation order.
fn pooled_mean(chains: &[Vec<f64>]) -> f64 {
    let sums: Vec<f64> = chains.iter().map(|c| c.iter().sum::<f64>()).collect();
    let count: usize = chains.iter().map(Vec::len).sum();
    tree_sum(&sums) / count as f64
}

fn pooled_var(chains: &[Vec<f64>], mean: f64) -> f64 {
    let sums: Vec<f64> = chains
        .iter()
        .map(|c| c.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>())
        .collect();
    let count: usize = chains.iter().map(Vec::len).sum();
    tree_sum(&sums) / (count as f64 - 1.0)
}

/// Mean, standard error from the effective sample size, and that ESS.
fn summarize(chains: &[Vec<f64>]) -> (Estimate, f64) {
    let mean = pooled_mean(chains);
    let var = pooled_var(chains, mean);
    let ess = ess::effective_sample_size(chains);
    let se = if var > 0.0 { (var / ess).sqrt() } else { 0.0 };
    (Estimate { value: mean, se }, ess)
}

fn check_at_rest(params: &SolitonParams, state: &PulseCenterState) -> Result<()> {
    params.validate_bound()?;
    if params.total() < 2 {
        return Err(Error::InvalidParameter("pair statistics need at least 2 photons".into()));
    }
    if state.photons != params.total() {
        return Err(Error::InvalidParameter(format!(
            "state has {} photons, parameters {}",
            state.photons,
            params.total()
        )));
    }
    if state.phase_accum != 0.0 {
        return Err(Error::InvalidParameter(
            "sampling requires the t = 0 state (phase_accum = 0)".into(),
        ));
    }
    Ok(())
}

/// `v` with +1 on mode-U photons and -1 on mode-V photons.
pub fn mode_difference_direction(params: &SolitonParams) -> Vec<f64> {
    (0..params.total())
        .map(|j| if params.is_mode_u(j) { 1.0 } else { -1.0 })
        .collect()
}

/// `(v . grad log|psi|)^2` at t = 0, i.e. a quarter of the squared
/// projected gradient of `log |psi|^2`.
fn score_square(zs: &[f64], params: &SolitonParams, state: &PulseCenterState, v: &[f64]) -> f64 {
    // Project the envelope and bound-state parts separately so that a
    // direction orthogonal to the all-ones vector drops the envelope exactly.
    let sum: f64 = zs.iter().sum();
    let envelope = -4.0 * state.dp * state.dp * state.envelope_weight() * sum;
    let g = bethe::sign_sums(zs, params);
    let v_total: f64 = v.iter().sum();
    let v_g: f64 = g.iter().zip(v).map(|(a, b)| a * b).sum();
    let proj = envelope * v_total + params.c / params.b * v_g;
    0.25 * proj * proj
}

mod obs {
    pub const ABS: usize = 0;
    pub const SQ: usize = 1;
    pub const SUM_SQ: usize = 2;
    pub const SAME: usize = 3;
    pub const CROSS: usize = 4;
    pub const SCORE: usize = 5;
    pub const HALF_SUM: usize = 6;
    pub const HALF_DIFF: usize = 7;
    pub const COUNT: usize = 8;
}

/// Samples `|f|^2` at t = 0 and returns pair, covariance and momentum moments.
pub fn sample_positions(
    params: &SolitonParams,
    state: &PulseCenterState,
    mcmc: &McmcConfig,
) -> Result<MomentEstimates> {
    check_at_rest(params, state)?;
    let big_n = params.total();
    let (n, m) = (params.n, params.m);
    let pairs = (big_n * (big_n - 1) / 2) as f64;
    let direction = mode_difference_direction(params);
    let dp = state.dp;

    let draws = run_chains(params, dp, mcmc, obs::COUNT, |z, out| {
        let (mut abs, mut sq, mut cross) = (0.0, 0.0, 0.0);
        for j in 0..z.len() {
            for i in 0..j {
                let r = z[j] - z[i];
                abs += r.abs();
                sq += r * r;
                cross += z[i] * z[j];
            }
        }
        let sum: f64 = z.iter().sum();
        out[obs::ABS] = abs / pairs;
        out[obs::SQ] = sq / pairs;
        out[obs::SUM_SQ] = sum * sum;
        out[obs::SAME] = z.iter().map(|x| x * x).sum::<f64>() / z.len() as f64;
        out[obs::CROSS] = cross / pairs;
        out[obs::SCORE] = score_square(z, params, state, &direction);
        if n > 0 && m > 0 {
            let x = z[..n].iter().sum::<f64>() / n as f64;
            let y = z[n..].iter().sum::<f64>() / m as f64;
            out[obs::HALF_SUM] = 0.25 * (x + y) * (x + y);
            out[obs::HALF_DIFF] = 0.25 * (x - y) * (x - y);
        }
    })?;

    let (abs, ess_abs) = summarize(&draws.per_obs[obs::ABS]);
    let (sq, ess_sq) = summarize(&draws.per_obs[obs::SQ]);
    let (var_sum, ess_sum) = summarize(&draws.per_obs[obs::SUM_SQ]);
    let (cov_same, ess_same) = summarize(&draws.per_obs[obs::SAME]);
    let (cov_cross, ess_cross) = summarize(&draws.per_obs[obs::CROSS]);
    let (p_minus_var, _) = summarize(&draws.per_obs[obs::SCORE]);

    // Ratio estimator: linearize q = A / R^2 around the sample means.
    let q_value = sq.value / (abs.value * abs.value);
    let influence: Vec<Vec<f64>> = draws.per_obs[obs::ABS]
        .iter()
        .zip(&draws.per_obs[obs::SQ])
        .map(|(a, s)| {
            a.iter()
                .zip(s)
                .map(|(a, s)| s / abs.value.powi(2) - 2.0 * sq.value * a / abs.value.powi(3))
                .collect()
        })
        .collect();
    let (q_lin, ess_q) = summarize(&influence);
    let q = Estimate { value: q_value, se: q_lin.se };

    let (var_sum_half, var_diff_half) = if n > 0 && m > 0 {
        (
            Some(summarize(&draws.per_obs[obs::HALF_SUM]).0),
            Some(summarize(&draws.per_obs[obs::HALF_DIFF]).0),
        )
    } else {
        (None, None)
    };

    let ess = [ess_abs, ess_sq, ess_sum, ess_same, ess_cross, ess_q]
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    if ess < MIN_ESS {
        return Err(Error::InsufficientSampling { ess, min: MIN_ESS });
    }
    let acceptance_rate = tree_sum(&draws.acceptance) / draws.acceptance.len() as f64;

    Ok(MomentEstimates {
        mean_abs_distance: abs,
        mean_sq_distance: sq,
        q,
        var_sum,
        cov_same,
        cov_cross,
        p_minus_var,
        var_sum_half,
        var_diff_half,
        ess,
        acceptance_rate,
        samples: mcmc.chains * mcmc.samples_per_chain,
        dp,
        exploratory: params.xpm != 1.0,
    })
}

/// `<(v . P)^2>` of the t = 0 state. Directions parallel to the all-ones
/// vector are answered exactly (`v0^2 N^2 dp^2`), since the bound-state sign
/// sums cancel in total momentum.
pub fn momentum_quadratics(
    params: &SolitonParams,
    state: &PulseCenterState,
    mcmc: &McmcConfig,
    direction: &[f64],
) -> Result<Estimate> {
    check_at_rest(params, state)?;
    if direction.len() != params.total() {
        return Err(Error::InvalidParameter(format!(
            "direction has {} components, expected {}",
            direction.len(),
            params.total()
        )));
    }
    if direction.iter().all(|&v| v == direction[0]) {
        let big_n = params.total() as f64;
        let v0 = direction[0];
        return Ok(Estimate::exact(v0 * v0 * big_n * big_n * state.dp * state.dp));
    }
    let draws = run_chains(params, state.dp, mcmc, 1, |z, out| {
        out[0] = score_square(z, params, state, direction);
    })?;
    let (est, ess) = summarize(&draws.per_obs[0]);
    if ess < MIN_ESS {
        return Err(Error::InsufficientSampling { ess, min: MIN_ESS });
    }
    Ok(est)
}

/// `<z_i z_j>` for every pair `i < j`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairCovariance {
    pub i: usize,
    pub j: usize,
    pub value: Estimate,
}

pub fn pair_covariances(
    params: &SolitonParams,
    state: &PulseCenterState,
    mcmc: &McmcConfig,
) -> Result<Vec<PairCovariance>> {
    check_at_rest(params, state)?;
    let big_n = params.total();
    let index: Vec<(usize, usize)> = (0..big_n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let draws = run_chains(params, state.dp, mcmc, index.len(), |z, out| {
        for (o, &(i, j)) in out.iter_mut().zip(&index) {
            *o = z[i] * z[j];
        }
    })?;
    Ok(index
        .iter()
        .zip(&draws.per_obs)
        .map(|(&(i, j), chains)| PairCovariance { i, j, value: summarize(chains).0 })
        .collect())
}

/// Outcome of the q / shot-noise fixed point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QFixedPoint {
    pub q: Estimate,
    pub dp: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
    pub estimates: MomentEstimates,
}

pub const Q_MAX_ITERATIONS: usize = 10;

/// Iterates `q -> dp(q) -> sample -> q` from `q = 2` until successive values
/// agree to within `max(tolerance, 3 se)`. The dependence on `dp` is weak
/// (for B = 1 the relative coordinates decouple from the pulse center), so
/// convergence is normally immediate.
pub fn estimate_q(params: &SolitonParams, mcmc: &McmcConfig, tolerance: f64) -> Result<QFixedPoint> {
    if params.xpm != 1.0 {
        return Err(Error::InvalidParameter(format!(
            "q estimation needs the exact Manakov theory (B = 1), got B = {}",
            params.xpm
        )));
    }
    params.validate_bound()?;
    let mut q = 2.0;
    let mut trace = vec![q];
    for it in 1..=Q_MAX_ITERATIONS {
        let dp = model::shot_noise_dp(params, q)?;
        let state = PulseCenterState::at_rest(dp, params.total())?;
        let est = sample_positions(params, &state, mcmc)?;
        let next = est.q.value;
        trace.push(next);
        if (next - q).abs() < tolerance.max(3.0 * est.q.se) {
            return Ok(QFixedPoint { q: est.q, dp, iterations: it, trace, estimates: est });
        }
        q = next;
    }
    Err(Error::FixedPointDiverged { iterations: Q_MAX_ITERATIONS, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> McmcConfig {
        McmcConfig { chains: 4, samples_per_chain: 60_000, burn_in: 6_000, proposal_stddev: 0.5, seed: 7 }
    }

    fn n2_state() -> (SolitonParams, PulseCenterState) {
        let p = SolitonParams::manakov(1, 1);
        let dp = model::shot_noise_dp(&p, 2.0).unwrap();
        (p, PulseCenterState::at_rest(dp, 2).unwrap())
    }

    #[test]
    fn config_validation() {
        let mut c = quick();
        c.chains = 1;
        assert!(c.validate().is_err());
        let mut c = quick();
        c.burn_in = 10;
        assert!(c.validate().is_err());
        let mut c = quick();
        c.proposal_stddev = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn two_photon_exponential_oracle() {
        // Relative coordinate is exponential: <|r|> = |b/c| = 1, <r^2> = 2.
        let (p, st) = n2_state();
        let est = sample_positions(&p, &st, &quick()).unwrap();
        assert!(est.mean_abs_distance.z_score(1.0, 0.0) < 3.0, "{:?}", est.mean_abs_distance);
        assert!(est.q.z_score(2.0, 0.0) < 3.0, "{:?}", est.q);
        assert!(est.cov_cross.z_score(0.0, 0.0) < 3.0, "{:?}", est.cov_cross);
        assert!(est.acceptance_rate > 0.15 && est.acceptance_rate < 0.7);
        assert!(!est.exploratory);
    }

    #[test]
    fn sum_identity_is_exact() {
        let p = SolitonParams::manakov(2, 1);
        let st = PulseCenterState::at_rest(0.4, 3).unwrap();
        let est = sample_positions(&p, &st, &quick()).unwrap();
        let rebuilt = 3.0 * est.cov_same.value + 6.0 * est.cov_cross.value;
        assert!((rebuilt - est.var_sum.value).abs() < 1e-10 * est.var_sum.value);
    }

    #[test]
    fn momentum_difference_two_photons() {
        // psi_rel ∝ exp(-kappa |r|), kappa = |c/2b|: <(p1 - p2)^2> = 4 kappa^2 = 1.
        let (p, st) = n2_state();
        let e = momentum_quadratics(&p, &st, &quick(), &[1.0, -1.0]).unwrap();
        assert!(e.z_score(1.0, 0.0) < 3.0, "{e:?}");
        // For N = 2 the score is deterministic in |r|: the estimate is exact.
        assert!((e.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn momentum_total_and_zero_direction() {
        let p = SolitonParams::manakov(2, 2);
        let st = PulseCenterState::at_rest(0.3, 4).unwrap();
        let e = momentum_quadratics(&p, &st, &quick(), &[1.0; 4]).unwrap();
        assert_eq!(e, Estimate::exact(16.0 * 0.09));
        let e = momentum_quadratics(&p, &st, &quick(), &[0.0; 4]).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(momentum_quadratics(&p, &st, &quick(), &[1.0; 3]).is_err());
    }

    #[test]
    fn seed_reproducible() {
        let (p, st) = n2_state();
        let mut c = quick();
        c.samples_per_chain = 20_000;
        c.burn_in = 2_000;
        let a = sample_positions(&p, &st, &c).unwrap();
        let b = sample_positions(&p, &st, &c).unwrap();
        assert_eq!(a, b);
        c.seed += 1;
        let d = sample_positions(&p, &st, &c).unwrap();
        assert_ne!(a.mean_abs_distance.value, d.mean_abs_distance.value);
    }

    #[test]
    fn rejects_unbound_and_moving_states() {
        let p = SolitonParams::new(1.0, 1.0, 1.0, 1, 1);
        let st = PulseCenterState::at_rest(0.3, 2).unwrap();
        assert!(matches!(sample_positions(&p, &st, &quick()), Err(Error::NoBoundState { .. })));
        let p = SolitonParams::manakov(1, 1);
        let st = PulseCenterState::new(0.3, -1.0, 2).unwrap();
        assert!(sample_positions(&p, &st, &quick()).is_err());
    }

    #[test]
    fn too_few_samples_is_a_diagnostic_error() {
        let (p, st) = n2_state();
        let c = McmcConfig { chains: 2, samples_per_chain: 400, burn_in: 200, proposal_stddev: 0.5, seed: 1 };
        assert!(matches!(sample_positions(&p, &st, &c), Err(Error::InsufficientSampling { .. })));
    }

    #[test]
    fn q_fixed_point_two_photons() {
        let fp = estimate_q(&SolitonParams::manakov(1, 1), &quick(), 1e-3).unwrap();
        assert!(fp.q.z_score(2.0, 0.0) < 3.0);
        assert!(fp.iterations <= 3);
        assert_eq!(fp.trace[0], 2.0);
        assert!(estimate_q(&SolitonParams::new(-1.0, 1.0, 0.5, 1, 1), &quick(), 1e-3).is_err());
    }

    #[test]
    fn general_xpm_runs_are_exploratory() {
        let p = SolitonParams::new(-1.0, 1.0, 2.0, 1, 1);
        let st = PulseCenterState::at_rest(0.3, 2).unwrap();
        let e = sample_positions(&p, &st, &quick()).unwrap();
        assert!(e.exploratory);
        // N = 2 relative density exp(-B |r|): <|r|> = 1 / B.
        assert!(e.mean_abs_distance.z_score(0.5, 0.0) < 3.0, "{:?}", e.mean_abs_distance);
    }
}
