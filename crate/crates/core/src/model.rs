//! Parameters, unit conventions and adiabatic schedules shared by the other
//! modules.
//!
//! Units: ħ = 1. The default normalized system takes `b = -1`, `c = 1`, so the
//! classical soliton width is `W0 = 2 / N`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bethe;
use crate::{Error, Result};

/// Physical parameters of a two-mode vector soliton with `n` photons in mode U
/// and `m` photons in mode V.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolitonParams {
    /// Group-velocity dispersion coefficient.
    pub b: f64,
    /// Self-phase modulation coefficient.
    pub c: f64,
    /// Cross-phase modulation ratio B (cross-phase coefficient is `B c`).
    #[serde(rename = "B", alias = "xpm")]
    pub xpm: f64,
    pub n: usize,
    pub m: usize,
}

/// Two-photon Manakov soliton with `b = -1`, `c = 1`.
impl Default for SolitonParams {
    fn default() -> Self {
        Self::manakov(1, 1)
    }
}

impl SolitonParams {
    pub fn new(b: f64, c: f64, xpm: f64, n: usize, m: usize) -> Self {
        Self { b, c, xpm, n, m }
    }

    /// Manakov (B = 1) soliton in normalized units.
    pub fn manakov(n: usize, m: usize) -> Self {
        Self::new(-1.0, 1.0, 1.0, n, m)
    }

    pub fn total(&self) -> usize {
        self.n + self.m
    }

    pub fn with_c(self, c: f64) -> Self {
        Self { c, ..self }
    }

    /// The Bethe ansatz is an exact eigenstate only for B = 0 (uncoupled
    /// scalar solitons) and B = 1 (Manakov).
    pub fn eigenstate_valid(&self) -> bool {
        self.xpm == 0.0 || self.xpm == 1.0
    }

    pub fn is_bound(&self) -> bool {
        self.b * self.c < 0.0
    }

    /// Checks the invariants every module relies on: finite values, at least
    /// one photon and B >= 0.
    pub fn validate(&self) -> Result<()> {
        if !(self.b.is_finite() && self.c.is_finite() && self.xpm.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite parameters {self:?}")));
        }
        if self.xpm < 0.0 {
            return Err(Error::InvalidParameter(format!("B = {} must be >= 0", self.xpm)));
        }
        if self.total() == 0 {
            return Err(Error::NoPhotons { n: self.n, m: self.m });
        }
        Ok(())
    }

    /// `validate` plus the bound-state requirement `b c < 0`.
    pub fn validate_bound(&self) -> Result<()> {
        self.validate()?;
        if self.c == 0.0 {
            return Err(Error::ZeroNonlinearity);
        }
        if !self.is_bound() {
            return Err(Error::NoBoundState { b: self.b, c: self.c });
        }
        Ok(())
    }

    pub(crate) fn require_eigenstate(&self) -> Result<()> {
        if self.eigenstate_valid() {
            Ok(())
        } else {
            Err(Error::NotEigenstate(self.xpm))
        }
    }

    /// Mode label of flattened coordinate `j` (`true` for mode U).
    pub fn is_mode_u(&self, j: usize) -> bool {
        j < self.n
    }

    /// Pair coupling: 1 within a mode, B across modes.
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        if self.is_mode_u(i) == self.is_mode_u(j) {
            1.0
        } else {
            self.xpm
        }
    }
}

/// Length, time and momentum scales of a soliton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedScales {
    /// Classical soliton width `|2b / (N c)|`.
    pub w0: f64,
    /// Soliton period `pi W0^2 / (2 |b|)`.
    pub t_sol: f64,
    /// Shot-noise average-momentum spread `1 / (2 sqrt(N) W0)`; equal to
    /// [`shot_noise_dp`] at q = 2.
    pub shot_noise_dp: f64,
}

pub fn derive_scales(params: &SolitonParams) -> Result<DerivedScales> {
    params.validate_bound()?;
    let big_n = params.total() as f64;
    let w0 = (2.0 * params.b / (big_n * params.c)).abs();
    Ok(DerivedScales {
        w0,
        t_sol: PI * w0 * w0 / (2.0 * params.b.abs()),
        shot_noise_dp: 1.0 / (2.0 * big_n.sqrt() * w0),
    })
}

/// Average-momentum spread that makes the photons uncorrelated at t = 0:
/// `sqrt(N) |c| / (sqrt(8 q) |b|)`.
pub fn shot_noise_dp(params: &SolitonParams, q: f64) -> Result<f64> {
    params.validate_bound()?;
    if !(q > 0.0) {
        return Err(Error::InvalidParameter(format!("q = {q} must be positive")));
    }
    let big_n = params.total() as f64;
    Ok(big_n.sqrt() * params.c.abs() / ((8.0 * q).sqrt() * params.b.abs()))
}

/// One linear ramp of the self-phase coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub duration: f64,
    pub c_start: f64,
    pub c_end: f64,
}

/// Piecewise-linear schedule `c(t)` with `b` held fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdiabaticSchedule {
    segments: Vec<Segment>,
}

impl AdiabaticSchedule {
    /// Rejects negative or non-finite durations and any sign change or zero of
    /// `c` across the whole schedule.
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        let sign = segments.first().map(|s| s.c_start.signum());
        for (i, s) in segments.iter().enumerate() {
            if !(s.duration.is_finite() && s.duration >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "segment {i}: duration {} must be finite and >= 0",
                    s.duration
                )));
            }
            let ok = |c: f64| c.is_finite() && c != 0.0 && Some(c.signum()) == sign;
            if !ok(s.c_start) || !ok(s.c_end) {
                return Err(Error::ScheduleCrossesZero { segment: i });
            }
        }
        Ok(Self { segments })
    }

    pub fn linear(duration: f64, c_start: f64, c_end: f64) -> Result<Self> {
        Self::new(vec![Segment { duration, c_start, c_end }])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn c_initial(&self) -> Option<f64> {
        self.segments.first().map(|s| s.c_start)
    }

    pub fn c_final(&self) -> Option<f64> {
        self.segments.last().map(|s| s.c_end)
    }

    /// Expansion ratio `|c_initial / c_final|` (equal to the growth of |b/c|).
    pub fn gamma(&self) -> Option<f64> {
        Some((self.c_initial()? / self.c_final()?).abs())
    }

    pub fn is_expansion(&self) -> bool {
        self.gamma().is_some_and(|g| g >= 1.0)
    }

    /// `c` at time `t` from the schedule start; clamps outside `[0, T]`.
    pub fn c_at(&self, t: f64) -> Option<f64> {
        let first = self.segments.first()?;
        if t <= 0.0 {
            return Some(first.c_start);
        }
        let mut t0 = 0.0;
        for s in &self.segments {
            if t <= t0 + s.duration {
                let frac = if s.duration > 0.0 { (t - t0) / s.duration } else { 1.0 };
                return Some(s.c_start + (s.c_end - s.c_start) * frac);
            }
            t0 += s.duration;
        }
        self.c_final()
    }
}

/// `T |E(end) - E(start)|` with `E` the p = 0 bound-state energy. Values much
/// larger than one indicate an adiabatic schedule. The constant in the
/// criterion is only known to order of magnitude, so no threshold is applied.
pub fn adiabaticity_margin(schedule: &AdiabaticSchedule, params: &SolitonParams) -> Result<f64> {
    params.require_eigenstate()?;
    let (c0, c1) = match (schedule.c_initial(), schedule.c_final()) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::InvalidParameter("empty schedule".into())),
    };
    let e0 = bethe::energy(&params.with_c(c0), 0.0)?;
    let e1 = bethe::energy(&params.with_c(c1), 0.0)?;
    Ok(schedule.total_duration() * (e1 - e0).abs())
}
