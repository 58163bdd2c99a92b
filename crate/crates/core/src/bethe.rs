//! Bethe-ansatz amplitudes of the two-mode soliton.
//!
//! The eigen-amplitude with average momentum `p` is
//!
//! ```text
//! f_nmp = C_nm exp[ i p sum(z) + (c / 2b) S(z) ]
//! S(z)  = sum_{i<j} |x_j - x_i| + sum_{l<k} |y_k - y_l| + B sum_{j,k} |x_j - y_k|
//! ```
//!
//! and superposing momenta with a Gaussian weight of spread `dp` gives the
//! time-dependent amplitude: a dispersive Gaussian in `sum(z)` (the pulse
//! center) times the same bound-state exponential. Everything is evaluated in
//! log-modulus/phase form so that `(N - 1)!` in the normalization does not
//! overflow.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::SolitonParams;
use crate::{Error, Result};

/// Photon positions: `xs` in mode U, `ys` in mode V. The flattened view
/// `z = (x_1..x_n, y_1..y_m)` is used by every numerical kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Configuration {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl Configuration {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Self {
        Self { xs, ys }
    }

    /// Splits a flattened coordinate vector after the first `n` entries.
    pub fn from_flat(zs: &[f64], n: usize) -> Self {
        Self { xs: zs[..n].to_vec(), ys: zs[n..].to_vec() }
    }

    pub fn zs(&self) -> Vec<f64> {
        self.xs.iter().chain(&self.ys).copied().collect()
    }

    pub fn check(&self, params: &SolitonParams) -> Result<()> {
        if self.xs.len() != params.n || self.ys.len() != params.m {
            return Err(Error::ConfigurationMismatch {
                n: params.n,
                m: params.m,
                got_n: self.xs.len(),
                got_m: self.ys.len(),
            });
        }
        Ok(())
    }
}

/// A complex amplitude stored as `exp(log_modulus + i phase)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Amplitude {
    pub log_modulus: f64,
    pub phase: f64,
    /// False when B is neither 0 nor 1: the ansatz is then evaluated for
    /// diagnostics only and is not an eigenstate.
    pub eigenstate: bool,
    /// False when no normalization constant is known and `C = 1` was used.
    pub normalized: bool,
}

impl Amplitude {
    pub fn value(&self) -> Complex64 {
        Complex64::from_polar(self.log_modulus.exp(), self.phase)
    }

    pub fn modulus(&self) -> f64 {
        self.log_modulus.exp()
    }
}

/// Pulse-center part of the state: Gaussian momentum spread `dp` and the
/// accumulated dispersion `phase_accum = integral of b dt` (length^2), which
/// makes piecewise media compose by addition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseCenterState {
    pub dp: f64,
    pub phase_accum: f64,
    pub photons: usize,
}

impl PulseCenterState {
    pub fn new(dp: f64, phase_accum: f64, photons: usize) -> Result<Self> {
        if !(dp.is_finite() && dp > 0.0) {
            return Err(Error::InvalidParameter(format!("dp = {dp} must be positive")));
        }
        if !phase_accum.is_finite() {
            return Err(Error::InvalidParameter("phase_accum must be finite".into()));
        }
        if photons == 0 {
            return Err(Error::NoPhotons { n: 0, m: 0 });
        }
        Ok(Self { dp, phase_accum, photons })
    }

    pub fn at_rest(dp: f64, photons: usize) -> Result<Self> {
        Self::new(dp, 0.0, photons)
    }

    /// `4 N dp^2 phase_accum`, the imaginary part of `1 + 4 i b N dp^2 t`.
    pub fn chirp(&self) -> f64 {
        4.0 * self.photons as f64 * self.dp * self.dp * self.phase_accum
    }

    /// Variance of `sum(z)`: `1/(4 dp^2) + 4 (N dp phase_accum)^2`.
    pub fn dz2(&self) -> f64 {
        let spread = self.photons as f64 * self.dp * self.phase_accum;
        1.0 / (4.0 * self.dp * self.dp) + 4.0 * spread * spread
    }

    /// Real part of `1 / (1 + i chirp)`.
    pub fn envelope_weight(&self) -> f64 {
        let a = self.chirp();
        1.0 / (1.0 + a * a)
    }
}

/// The pair potential `S`: within-mode distances plus `B` times cross-mode
/// distances.
pub fn pairwise_potential(config: &Configuration, xpm: f64) -> f64 {
    let within = |v: &[f64]| -> f64 {
        let mut s = 0.0;
        for (k, a) in v.iter().enumerate() {
            for b in &v[k + 1..] {
                s += (b - a).abs();
            }
        }
        s
    };
    let mut cross = 0.0;
    for x in &config.xs {
        for y in &config.ys {
            cross += (x - y).abs();
        }
    }
    within(&config.xs) + within(&config.ys) + xpm * cross
}

/// `g_j = sum_{i != j} kappa_ij sign(z_j - z_i)` with `kappa` equal to 1
/// within a mode and B across. Coincident coordinates are resolved as if the
/// later-indexed one were displaced upward by one ulp.
pub fn sign_sums(zs: &[f64], params: &SolitonParams) -> Vec<f64> {
    let len = zs.len();
    let mut g = vec![0.0; len];
    for j in 0..len {
        for i in 0..j {
            let s = if zs[j] > zs[i] {
                1.0
            } else if zs[j] < zs[i] {
                -1.0
            } else {
                1.0
            };
            let k = params.coupling(i, j) * s;
            g[j] += k;
            g[i] -= k;
        }
    }
    g
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Scalar-soliton log normalization `ln [(N-1)! r^(N-1) / (2 pi)]^(1/2)` with
/// `r = |c/b|`.
fn ln_scalar_norm(photons: usize, ratio: f64) -> f64 {
    if photons == 0 {
        return 0.0;
    }
    let pow = if photons == 1 { 0.0 } else { (photons - 1) as f64 * ratio.ln() };
    0.5 * (ln_factorial(photons - 1) + pow - (2.0 * PI).ln())
}

fn ln_norm_constant(params: &SolitonParams) -> Result<f64> {
    if params.b == 0.0 {
        return Err(Error::ZeroDispersion);
    }
    params.validate()?;
    let ratio = (params.c / params.b).abs();
    if params.xpm == 1.0 {
        Ok(ln_scalar_norm(params.total(), ratio))
    } else if params.xpm == 0.0 {
        // Two independent scalar solitons.
        Ok(ln_scalar_norm(params.n, ratio) + ln_scalar_norm(params.m, ratio))
    } else {
        Err(Error::NormalizationUnknown(params.xpm))
    }
}

/// Normalization constant `C_nm`. Known for B = 1 (borrowed from the scalar
/// soliton) and for B = 0, where the state factorizes into two scalar
/// solitons and `C_nm = C_n C_m`.
pub fn norm_constant(params: &SolitonParams) -> Result<f64> {
    ln_norm_constant(params).map(f64::exp)
}

fn ln_norm_or_unit(params: &SolitonParams) -> Result<(f64, bool)> {
    match ln_norm_constant(params) {
        Ok(v) => Ok((v, true)),
        Err(Error::NormalizationUnknown(_)) => Ok((0.0, false)),
        Err(e) => Err(e),
    }
}

/// Eigen-amplitude `f_nmp` at average momentum `p`.
pub fn eval_eigenamplitude(
    config: &Configuration,
    params: &SolitonParams,
    p: f64,
) -> Result<Amplitude> {
    if params.b == 0.0 {
        return Err(Error::ZeroDispersion);
    }
    config.check(params)?;
    let (ln_c, normalized) = ln_norm_or_unit(params)?;
    let sum: f64 = config.zs().iter().sum();
    let s = pairwise_potential(config, params.xpm);
    let bound = if params.c == 0.0 { 0.0 } else { params.c / (2.0 * params.b) * s };
    Ok(Amplitude {
        log_modulus: ln_c + bound,
        phase: p * sum,
        eigenstate: params.eigenstate_valid(),
        normalized,
    })
}

/// Eigenenergy `E = b N p^2 - c^2/(12 b) [n(n^2-1) + m(m^2-1) + 3 B^2 n m (n+m)]`,
/// only defined for B in {0, 1}.
pub fn energy(params: &SolitonParams, p: f64) -> Result<f64> {
    if params.b == 0.0 {
        return Err(Error::ZeroDispersion);
    }
    params.require_eigenstate()?;
    let (n, m) = (params.n as f64, params.m as f64);
    let bracket = n * (n * n - 1.0)
        + m * (m * m - 1.0)
        + 3.0 * params.xpm * params.xpm * n * m * (n + m);
    let big_n = n + m;
    Ok(params.b * big_n * p * p - params.c * params.c / (12.0 * params.b) * bracket)
}

/// Momentum-superposed amplitude: Gaussian pulse-center factor with the
/// dispersive chirp realized through `phase_accum`, times the bound-state
/// exponential. The constant energy phase is omitted.
pub fn eval_time_amplitude(
    config: &Configuration,
    params: &SolitonParams,
    state: &PulseCenterState,
) -> Result<Amplitude> {
    if params.b == 0.0 {
        return Err(Error::ZeroDispersion);
    }
    config.check(params)?;
    if state.photons != params.total() {
        return Err(Error::InvalidParameter(format!(
            "state has {} photons, parameters {}",
            state.photons,
            params.total()
        )));
    }
    let (ln_c, normalized) = ln_norm_or_unit(params)?;
    let dp = state.dp;
    let alpha = state.chirp();
    let w = state.envelope_weight();
    let sum: f64 = config.zs().iter().sum();
    let s = pairwise_potential(config, params.xpm);
    let bound = if params.c == 0.0 { 0.0 } else { params.c / (2.0 * params.b) * s };

    let log_modulus = ln_c + 0.25 * (8.0 * PI).ln() + 0.5 * dp.ln()
        - 0.25 * (1.0 + alpha * alpha).ln()
        - dp * dp * w * sum * sum
        + bound;
    let phase = -0.5 * alpha.atan() + dp * dp * alpha * w * sum * sum;
    Ok(Amplitude {
        log_modulus,
        phase,
        eigenstate: params.eigenstate_valid(),
        normalized,
    })
}

/// Gradient of `log |f|^2` for the time-dependent amplitude:
/// `-4 dp^2 w sum(z) + (c/b) g_j`.
pub fn logdensity_gradient(
    config: &Configuration,
    params: &SolitonParams,
    state: &PulseCenterState,
) -> Result<Vec<f64>> {
    if params.b == 0.0 {
        return Err(Error::ZeroDispersion);
    }
    config.check(params)?;
    let zs = config.zs();
    Ok(gradient_flat(&zs, params, state))
}

pub(crate) fn gradient_flat(zs: &[f64], params: &SolitonParams, state: &PulseCenterState) -> Vec<f64> {
    let sum: f64 = zs.iter().sum();
    let envelope = -4.0 * state.dp * state.dp * state.envelope_weight() * sum;
    let ratio = params.c / params.b;
    sign_sums(zs, params)
        .into_iter()
        .map(|g| envelope + ratio * g)
        .collect()
}
