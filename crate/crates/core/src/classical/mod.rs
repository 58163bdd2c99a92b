//! Split-step spectral solver for the classical coupled NLSE
//!
//! ```text
//! i dU/dt = -b d2U/dz2 + 2c (|U|^2 + B |V|^2) U
//! i dV/dt = -b d2V/dz2 + 2c (|V|^2 + B |U|^2) V
//! ```
//!
//! on a periodic grid, with symmetric (Strang) splitting: half a dispersion
//! step in Fourier space, a full nonlinear phase step, half a dispersion step.
//! An equal-amplitude vector soliton `A sech(z/W)` with
//! `A^2 = |b| / ((1 + B) |c| W^2)` is stationary up to the phase
//! `exp(i b t / W^2)`.

mod fit;
pub mod snapshot;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::model::{AdiabaticSchedule, SolitonParams};
use crate::{Error, Result};

pub use fit::fit_soliton_width;

/// Two complex envelopes on the periodic grid `z_k = -L + k dz`,
/// `dz = 2L / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2 {
    pub u: Vec<Complex64>,
    pub v: Vec<Complex64>,
    pub halfwidth: f64,
    /// Propagation time of this snapshot.
    pub t: f64,
}

impl Field2 {
    pub fn zeros(points: usize, halfwidth: f64) -> Result<Self> {
        if points < 16 || !points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!("M = {points} must be a power of two >= 16")));
        }
        if !(halfwidth.is_finite() && halfwidth > 0.0) {
            return Err(Error::InvalidGrid(format!("halfwidth = {halfwidth} must be positive")));
        }
        let zero = vec![Complex64::new(0.0, 0.0); points];
        Ok(Self { u: zero.clone(), v: zero, halfwidth, t: 0.0 })
    }

    /// Builds a field by evaluating `f(z) -> (u, v)` on the grid.
    pub fn from_fn(
        points: usize,
        halfwidth: f64,
        f: impl Fn(f64) -> (Complex64, Complex64),
    ) -> Result<Self> {
        let mut field = Self::zeros(points, halfwidth)?;
        for k in 0..points {
            let (a, b) = f(field.z(k));
            field.u[k] = a;
            field.v[k] = b;
        }
        Ok(field)
    }

    /// Equal-amplitude vector soliton of width `width` centred at 0.
    pub fn vector_soliton(params: &SolitonParams, width: f64, points: usize, halfwidth: f64) -> Result<Self> {
        Self::soliton_at(params, width, points, halfwidth, 0.0)
    }

    /// Exact equal-amplitude soliton at time `t`, including the phase
    /// `exp(i b t / W^2)`.
    pub fn soliton_at(params: &SolitonParams, width: f64, points: usize, halfwidth: f64, t: f64) -> Result<Self> {
        params.validate_bound()?;
        let amp = soliton_amplitude(params, width);
        let phase = Complex64::from_polar(1.0, params.b * t / (width * width));
        let mut f = Self::from_fn(points, halfwidth, |z| {
            let s = phase * (amp / (z / width).cosh());
            (s, s)
        })?;
        f.t = t;
        Ok(f)
    }

    /// Equal-amplitude soliton carrying total power `power` (photon number).
    pub fn soliton_with_power(params: &SolitonParams, power: f64, points: usize, halfwidth: f64) -> Result<Self> {
        Self::vector_soliton(params, soliton_width_for_power(params, power), points, halfwidth)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn dz(&self) -> f64 {
        2.0 * self.halfwidth / self.len() as f64
    }

    pub fn z(&self, k: usize) -> f64 {
        -self.halfwidth + k as f64 * self.dz()
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.u.iter().zip(&self.v).map(|(a, b)| a.norm_sqr() + b.norm_sqr()).collect()
    }

    /// `sum(|u|^2 + |v|^2) dz`
    pub fn power(&self) -> f64 {
        self.intensity().iter().sum::<f64>() * self.dz()
    }

    /// Intensity-weighted mean position.
    pub fn centroid(&self) -> f64 {
        let int = self.intensity();
        let total: f64 = int.iter().sum();
        int.iter().enumerate().map(|(k, i)| self.z(k) * i).sum::<f64>() / total
    }

    /// First spectral moment `sum k (|u_k|^2 + |v_k|^2)`, normalized like the
    /// power so that it equals `integral u* (-i d/dz) u dz + (same for v)`.
    pub fn momentum(&self) -> f64 {
        let m = self.len();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(m);
        let k = wavenumbers(m, self.halfwidth);
        let mut total = 0.0;
        for comp in [&self.u, &self.v] {
            let mut buf = comp.clone();
            fft.process(&mut buf);
            total += buf.iter().zip(&k).map(|(c, k)| k * c.norm_sqr()).sum::<f64>();
        }
        total * self.dz() / m as f64
    }

    /// Multiplies both envelopes by `exp(i k z)`.
    pub fn boost(&mut self, k: f64) {
        for j in 0..self.len() {
            let ph = Complex64::from_polar(1.0, k * self.z(j));
            self.u[j] *= ph;
            self.v[j] *= ph;
        }
    }

    pub fn max_abs_diff(&self, other: &Field2) -> f64 {
        self.u
            .iter()
            .zip(&other.u)
            .chain(self.v.iter().zip(&other.v))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// `A^2 = |b| / ((1 + B) |c| W^2)`.
pub fn soliton_amplitude(params: &SolitonParams, width: f64) -> f64 {
    (params.b.abs() / ((1.0 + params.xpm) * params.c.abs() * width * width)).sqrt()
}

/// Width of an equal-amplitude soliton with total power `power`
/// (`power = 4 A^2 W`), i.e. `4|b| / ((1 + B)|c| power)`; equals `|2b/(Nc)|`
/// for B = 1 and power N.
pub fn soliton_width_for_power(params: &SolitonParams, power: f64) -> f64 {
    4.0 * params.b.abs() / ((1.0 + params.xpm) * params.c.abs() * power)
}

/// Soliton period `pi W^2 / (2 |b|)` of a pulse of width `width`.
pub fn soliton_period(params: &SolitonParams, width: f64) -> f64 {
    PI * width * width / (2.0 * params.b.abs())
}

fn wavenumbers(points: usize, halfwidth: f64) -> Vec<f64> {
    let base = PI / halfwidth;
    (0..points)
        .map(|j| {
            let j = if j < points / 2 { j as f64 } else { j as f64 - points as f64 };
            base * j
        })
        .collect()
}

/// Fixed step size and count for the Strang scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepPlan {
    pub dt: f64,
    pub steps: usize,
}

impl StepPlan {
    /// Conservative step bound `dz^2 / (pi |b|)`.
    pub fn dt_max(params: &SolitonParams, dz: f64) -> f64 {
        dz * dz / (PI * params.b.abs())
    }

    pub fn validate(&self, params: &SolitonParams, dz: f64) -> Result<()> {
        let max = Self::dt_max(params, dz);
        if !(self.dt > 0.0 && self.dt < max) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} must lie in (0, {max:e}) for dz = {dz}",
                self.dt
            )));
        }
        Ok(())
    }

    /// Plan covering `duration` with at least 2000 steps per soliton period
    /// and `dt` at most 80% of the stability bound.
    pub fn covering(params: &SolitonParams, width: f64, dz: f64, duration: f64) -> Self {
        let t_sol = soliton_period(params, width);
        let dt_cap = (t_sol / 2000.0).min(0.8 * Self::dt_max(params, dz));
        let steps = (duration / dt_cap).ceil().max(1.0) as usize;
        Self { dt: duration / steps as f64, steps }
    }
}

/// Damping layer near the periodic boundary that removes outgoing radiation:
/// rate `strength * s^2` with `s` running from 0 to 1 across the outer
/// `width_fraction` of each side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Absorber {
    pub width_fraction: f64,
    pub strength: f64,
}

impl Default for Absorber {
    fn default() -> Self {
        Self { width_fraction: 0.1, strength: 5.0 }
    }
}

/// Reusable Strang stepper for one grid size.
pub struct SplitStep {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    k2: Vec<f64>,
    scratch: Vec<Complex64>,
}

impl SplitStep {
    pub fn new(points: usize, halfwidth: f64) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(points);
        let inverse = planner.plan_fft_inverse(points);
        let scratch = vec![Complex64::new(0.0, 0.0); forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len())];
        let k2 = wavenumbers(points, halfwidth).iter().map(|k| k * k).collect();
        Self { forward, inverse, k2, scratch }
    }

    fn disperse(&mut self, buf: &mut [Complex64], phase: &[Complex64]) {
        let norm = 1.0 / buf.len() as f64;
        self.forward.process_with_scratch(buf, &mut self.scratch);
        for (c, p) in buf.iter_mut().zip(phase) {
            *c *= p * norm;
        }
        self.inverse.process_with_scratch(buf, &mut self.scratch);
    }

    fn half_step_phase(&self, b: f64, dt: f64) -> Vec<Complex64> {
        // Linear part: dU/dt = -i b k^2 U.
        self.k2.iter().map(|k2| Complex64::from_polar(1.0, -b * k2 * 0.5 * dt)).collect()
    }
}

/// Propagates `field` for `plan.steps` steps. With `c_ramp`, `c` follows the
/// schedule (time measured from the start of this call), sampled at step
/// midpoints; past the end of the schedule it stays at the final value.
pub fn propagate(
    field: &Field2,
    params: &SolitonParams,
    plan: &StepPlan,
    c_ramp: Option<&AdiabaticSchedule>,
) -> Result<Field2> {
    propagate_with(field, params, plan, c_ramp, None)
}

/// [`propagate`] with an optional boundary absorber. Power drift is only
/// checked when no absorber is present.
pub fn propagate_with(
    field: &Field2,
    params: &SolitonParams,
    plan: &StepPlan,
    c_ramp: Option<&AdiabaticSchedule>,
    absorber: Option<&Absorber>,
) -> Result<Field2> {
    params.validate()?;
    if params.b == 0.0 {
        return Err(Error::ZeroDispersion);
    }
    let points = field.len();
    if points < 16 || !points.is_power_of_two() || field.v.len() != points {
        return Err(Error::InvalidGrid(format!("M = {points} must be a power of two >= 16")));
    }
    plan.validate(params, field.dz())?;

    let mut stepper = SplitStep::new(points, field.halfwidth);
    let half = stepper.half_step_phase(params.b, plan.dt);
    let damping: Option<Vec<f64>> = absorber.map(|a| {
        let inner = field.halfwidth * (1.0 - a.width_fraction);
        let layer = field.halfwidth * a.width_fraction;
        (0..points)
            .map(|k| {
                let d = (field.z(k).abs() - inner).max(0.0) / layer;
                (-a.strength * d * d * plan.dt).exp()
            })
            .collect()
    });

    let mut out = field.clone();
    let p0 = field.power();
    let dt = plan.dt;
    for step in 0..plan.steps {
        let c = match c_ramp {
            Some(s) => s.c_at((step as f64 + 0.5) * dt).unwrap_or(params.c),
            None => params.c,
        };
        stepper.disperse(&mut out.u, &half);
        stepper.disperse(&mut out.v, &half);
        for (a, b) in out.u.iter_mut().zip(out.v.iter_mut()) {
            let (iu, iv) = (a.norm_sqr(), b.norm_sqr());
            *a *= Complex64::from_polar(1.0, -2.0 * c * (iu + params.xpm * iv) * dt);
            *b *= Complex64::from_polar(1.0, -2.0 * c * (iv + params.xpm * iu) * dt);
        }
        stepper.disperse(&mut out.u, &half);
        stepper.disperse(&mut out.v, &half);
        if let Some(w) = &damping {
            for ((a, b), w) in out.u.iter_mut().zip(out.v.iter_mut()).zip(w) {
                *a *= w;
                *b *= w;
            }
        }
        if (step + 1) % 256 == 0 || step + 1 == plan.steps {
            let p = out.power();
            if !p.is_finite() {
                return Err(Error::Propagation { step, reason: "non-finite field".into() });
            }
            if damping.is_none() && (p - p0).abs() > 1e-6 * p0.max(f64::MIN_POSITIVE) {
                return Err(Error::Propagation {
                    step,
                    reason: format!("power drift {:e}", (p - p0) / p0),
                });
            }
        }
    }
    out.t = field.t + dt * plan.steps as f64;
    Ok(out)
}

/// Grid and stepping choices for [`ramp_stability_probe`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub points: usize,
    /// Half-width of the box in units of the initial soliton width.
    pub halfwidth: f64,
    pub absorber: Option<Absorber>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self { points: 2048, halfwidth: 40.0, absorber: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RampReport {
    pub gamma: f64,
    pub duration: f64,
    pub width_initial: f64,
    pub width_final: f64,
    /// `gamma * width_initial`.
    pub width_predicted: f64,
    pub width_ratio: f64,
    /// Fraction of the initial power not found within ten final widths of
    /// the pulse center.
    pub radiation_fraction: f64,
    pub stable: bool,
    pub steps: usize,
    #[serde(skip)]
    pub final_field: Field2,
}

/// Radiation below this fraction counts as a stable ramp.
pub const RADIATION_LIMIT: f64 = 0.05;

/// Ramps `c -> c / gamma` linearly over `duration` while propagating the
/// equal-amplitude soliton with power N, then compares the final width with
/// `gamma` times the initial one.
pub fn ramp_stability_probe(
    params: &SolitonParams,
    gamma: f64,
    duration: f64,
    config: &ProbeConfig,
) -> Result<RampReport> {
    params.validate_bound()?;
    if !(gamma >= 1.0) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be >= 1")));
    }
    if !(duration >= 0.0) {
        return Err(Error::InvalidParameter("duration must be >= 0".into()));
    }
    let power = params.total() as f64;
    let width = soliton_width_for_power(params, power);
    let field = Field2::soliton_with_power(params, power, config.points, config.halfwidth * width)?;
    let width_initial = fit_soliton_width(&field)?;
    let schedule = AdiabaticSchedule::linear(duration, params.c, params.c / gamma)?;
    let plan = if duration > 0.0 {
        StepPlan::covering(params, width, field.dz(), duration)
    } else {
        StepPlan { dt: 0.5 * StepPlan::dt_max(params, field.dz()), steps: 0 }
    };
    let out = propagate_with(&field, params, &plan, Some(&schedule), config.absorber.as_ref())?;
    let width_final = fit_soliton_width(&out)?;
    let center = fit::peak_position(&out);
    let int = out.intensity();
    let inside: f64 = int
        .iter()
        .enumerate()
        .filter(|(k, _)| periodic_distance(out.z(*k), center, out.halfwidth) <= 10.0 * width_final)
        .map(|(_, i)| i)
        .sum::<f64>()
        * out.dz();
    let radiation_fraction = (1.0 - inside / field.power()).max(0.0);
    let width_predicted = gamma * width_initial;
    Ok(RampReport {
        gamma,
        duration,
        width_initial,
        width_final,
        width_predicted,
        width_ratio: width_final / width_predicted,
        radiation_fraction,
        stable: radiation_fraction < RADIATION_LIMIT,
        steps: plan.steps,
        final_field: out,
    })
}

fn periodic_distance(a: f64, b: f64, halfwidth: f64) -> f64 {
    let period = 2.0 * halfwidth;
    let d = (a - b).rem_euclid(period);
    d.min(period - d)
}
