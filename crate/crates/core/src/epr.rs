//! Pulse-center EPR metrics for the two polarization modes.
//!
//! `X` and `Y` are the mean positions of the photons in each mode and
//! `P_X`, `P_Y` the total momenta of each mode, so that `[X, P_X] = i` and
//! `<(X - Y)^2> <(P_X - P_Y)^2> >= 1`. Two commuting combinations are
//! tracked: `(X - Y, P_X + P_Y)`, driven down by compression, and
//! `(X + Y, P_X - P_Y)`, driven down by expansion. Either product falling
//! below 1 witnesses EPR entanglement.

use serde::Serialize;

use crate::bethe::PulseCenterState;
use crate::model::SolitonParams;
use crate::sampler::MomentEstimates;
use crate::{Error, Result};

/// Lower bound on `<(X-Y)^2><(P_X-P_Y)^2>` in ħ = 1 units.
pub const EPR_BOUND: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Analytic,
    Sampled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EprMetrics {
    /// `<((X + Y)/2)^2>`
    pub var_sum_half: f64,
    /// `<((X - Y)/2)^2>`
    pub var_diff_half: f64,
    /// `<(P_X + P_Y)^2>`
    pub p_sum_var: f64,
    /// `<(P_X - P_Y)^2>`
    pub p_diff_var: f64,
    /// `<(X - Y)^2> <(P_X - P_Y)^2>`, bounded below by [`EPR_BOUND`].
    pub product_dd: f64,
    /// `<(X - Y)^2> <(P_X + P_Y)^2>`
    pub product_diff_sum: f64,
    /// `<(X + Y)^2> <(P_X - P_Y)^2>`
    pub product_sum_diff: f64,
    pub epr_bound: f64,
    pub p_diff_source: Source,
}

impl EprMetrics {
    fn from_parts(var_sum_half: f64, var_diff_half: f64, p_sum_var: f64, p_diff_var: f64, src: Source) -> Self {
        Self {
            var_sum_half,
            var_diff_half,
            p_sum_var,
            p_diff_var,
            product_dd: 4.0 * var_diff_half * p_diff_var,
            product_diff_sum: 4.0 * var_diff_half * p_sum_var,
            product_sum_diff: 4.0 * var_sum_half * p_diff_var,
            epr_bound: EPR_BOUND,
            p_diff_source: src,
        }
    }
}

/// Metrics for `n = m` Manakov solitons:
///
/// ```text
/// <((X+Y)/2)^2> = dz^2 / N^2
/// <((X-Y)/2)^2> = 2 q b^2 / (N^3 c^2)
/// <(P_X+P_Y)^2> = N^2 dp^2
/// ```
///
/// `<(P_X - P_Y)^2>` is `c^2 / b^2` in closed form for N = 2; for larger N it
/// must be supplied (e.g. from [`crate::sampler::momentum_quadratics`]).
pub fn epr_metrics_analytic(
    params: &SolitonParams,
    state: &PulseCenterState,
    q: f64,
    p_diff_var: Option<f64>,
) -> Result<EprMetrics> {
    if params.n != params.m {
        return Err(Error::InvalidParameter(format!(
            "EPR formulas assume n = m (got n = {}, m = {})",
            params.n, params.m
        )));
    }
    if params.xpm != 1.0 {
        return Err(Error::InvalidParameter(format!(
            "EPR formulas need the Manakov soliton (B = 1), got B = {}",
            params.xpm
        )));
    }
    params.validate_bound()?;
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!("q = {q} must be >= 1")));
    }
    let big_n = params.total() as f64;
    let var_sum_half = state.dz2() / (big_n * big_n);
    let var_diff_half = 2.0 * q * params.b * params.b / (big_n.powi(3) * params.c * params.c);
    let p_sum_var = big_n * big_n * state.dp * state.dp;
    let (p_diff_var, src) = match (p_diff_var, params.total()) {
        (Some(v), _) => (v, Source::Sampled),
        // psi_rel ∝ exp(-kappa |r|) with kappa = |c/2b|: 4 kappa^2.
        (None, 2) => ((params.c / params.b).powi(2), Source::Analytic),
        (None, _) => {
            return Err(Error::InvalidParameter(
                "<(P_X - P_Y)^2> has no closed form for N > 2; supply a sampled value".into(),
            ))
        }
    };
    Ok(EprMetrics::from_parts(var_sum_half, var_diff_half, p_sum_var, p_diff_var, src))
}

/// Metrics built entirely from sampler output (t = 0 state).
pub fn epr_metrics_sampled(est: &MomentEstimates, photons: usize) -> Result<EprMetrics> {
    let (Some(s), Some(d)) = (est.var_sum_half, est.var_diff_half) else {
        return Err(Error::InvalidParameter("both modes must be occupied".into()));
    };
    let big_n = photons as f64;
    Ok(EprMetrics::from_parts(
        s.value,
        d.value,
        big_n * big_n * est.dp * est.dp,
        est.p_minus_var.value,
        Source::Sampled,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessPair {
    /// `(X - Y, P_X + P_Y)`
    DiffSum,
    /// `(X + Y, P_X - P_Y)`
    SumDiff,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EprWitness {
    pub entangled: bool,
    /// Pair with the smaller product.
    pub pair: WitnessPair,
    /// Smaller commuting-pair product divided by the bound.
    pub ratio: f64,
    pub ratio_diff_sum: f64,
    pub ratio_sum_diff: f64,
}

/// Flags entanglement when a commuting-pair product is strictly below the
/// non-commuting bound.
pub fn epr_witness(metrics: &EprMetrics) -> EprWitness {
    let ds = metrics.product_diff_sum / metrics.epr_bound;
    let sd = metrics.product_sum_diff / metrics.epr_bound;
    let (pair, ratio) = if sd < ds { (WitnessPair::SumDiff, sd) } else { (WitnessPair::DiffSum, ds) };
    EprWitness {
        entangled: ratio < 1.0,
        pair,
        ratio,
        ratio_diff_sum: ds,
        ratio_sum_diff: sd,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model;
    use crate::protocol;
    use crate::AdiabaticSchedule;
    use approx::assert_relative_eq;

    fn two() -> (SolitonParams, PulseCenterState) {
        let p = SolitonParams::manakov(1, 1);
        let dp = model::shot_noise_dp(&p, 2.0).unwrap();
        (p, PulseCenterState::at_rest(dp, 2).unwrap())
    }

    fn expanded(gamma: f64) -> EprMetrics {
        let (p, st) = two();
        let s = AdiabaticSchedule::linear(30.0, 1.0, 1.0 / gamma).unwrap();
        let out = protocol::run_scheme(&p, &st, &s, 1.0, 2.0).unwrap();
        epr_metrics_analytic(&out.after_ramp.params, &out.compensated, 2.0, None).unwrap()
    }

    #[test]
    fn uncorrelated_input() {
        let (p, st) = two();
        let e = epr_metrics_analytic(&p, &st, 2.0, None).unwrap();
        assert_relative_eq!(e.var_sum_half, 0.5, max_relative = 1e-12);
        assert_relative_eq!(e.var_diff_half, 0.5, max_relative = 1e-12);
        assert_relative_eq!(e.p_diff_var, 1.0);
        assert_relative_eq!(e.p_sum_var, 0.5, max_relative = 1e-12);
        assert_relative_eq!(e.product_dd, 2.0, max_relative = 1e-12);
        assert!(e.product_dd >= e.epr_bound);
        let w = epr_witness(&e);
        assert!(!w.entangled);
        assert_relative_eq!(w.ratio_diff_sum, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn expansion_by_two() {
        let e = expanded(2.0);
        assert_relative_eq!(e.var_sum_half, 0.5, max_relative = 1e-12);
        assert_relative_eq!(e.var_diff_half, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn expansion_drives_sum_diff_below_bound() {
        let e = expanded(4.0);
        let w = epr_witness(&e);
        assert!(w.entangled);
        assert_eq!(w.pair, WitnessPair::SumDiff);
        // product_sum_diff = 2 / gamma^2.
        assert_relative_eq!(e.product_sum_diff, 2.0 / 16.0, max_relative = 1e-12);
    }

    #[test]
    fn product_dd_is_adiabatic_invariant() {
        for g in [1.0, 2.0, 4.0] {
            assert_relative_eq!(expanded(g).product_dd, 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn witness_monotone_in_gamma() {
        let mut last = f64::INFINITY;
        for g in [1.0, 1.5, 2.0, 3.0, 8.0] {
            let v = expanded(g).product_sum_diff;
            assert!(v < last);
            last = v;
        }
    }

    #[test]
    fn boundary_is_not_entangled() {
        let mut e = expanded(1.0);
        e.product_diff_sum = 1.0;
        e.product_sum_diff = 1.0;
        assert!(!epr_witness(&e).entangled);
    }

    #[test]
    fn rejects_unequal_modes_and_missing_momentum() {
        let p = SolitonParams::manakov(2, 1);
        let st = PulseCenterState::at_rest(0.3, 3).unwrap();
        assert!(epr_metrics_analytic(&p, &st, 2.0, None).is_err());
        let p = SolitonParams::manakov(2, 2);
        let st = PulseCenterState::at_rest(0.3, 4).unwrap();
        assert!(epr_metrics_analytic(&p, &st, 1.5, None).is_err());
        let e = epr_metrics_analytic(&p, &st, 1.5, Some(1.2)).unwrap();
        assert_eq!(e.p_diff_source, Source::Sampled);
    }
}
