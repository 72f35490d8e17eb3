//! Sweep schedules λ(t) with exact first and second derivatives.
//!
//! Both built-in ramps run from `λ(0) = λ₀` to `λ(τ) = −λ₀`. The cubic ramp
//! additionally has vanishing velocity at both ends, which removes the
//! endpoint kicks seen with the linear ramp.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    /// `λ(t) = λ₀ (1 − 2t/τ)`
    Linear,
    /// `λ(t) = λ₀ (4(t/τ)³ − 6(t/τ)² + 1)`
    Cubic,
}

impl SweepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepKind::Linear => "linear",
            SweepKind::Cubic => "cubic",
        }
    }
}

/// Value, velocity and acceleration of the control parameter at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub rate: f64,
    pub accel: f64,
}

impl SweepPoint {
    /// A point of a schedule that is not moving.
    pub fn frozen(value: f64) -> Self {
        SweepPoint {
            value,
            rate: 0.0,
            accel: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSchedule {
    kind: SweepKind,
    lambda0: f64,
    tau: f64,
}

impl SweepSchedule {
    pub fn new(kind: SweepKind, lambda0: f64, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0) {
            return Err(Error::domain(format!("sweep duration must be positive, got {tau}")));
        }
        if !lambda0.is_finite() {
            return Err(Error::domain(format!("sweep amplitude must be finite, got {lambda0}")));
        }
        Ok(SweepSchedule { kind, lambda0, tau })
    }

    pub fn linear(lambda0: f64, tau: f64) -> Result<Self> {
        Self::new(SweepKind::Linear, lambda0, tau)
    }

    pub fn cubic(lambda0: f64, tau: f64) -> Result<Self> {
        Self::new(SweepKind::Cubic, lambda0, tau)
    }

    pub fn kind(&self) -> SweepKind {
        self.kind
    }

    pub fn lambda0(&self) -> f64 {
        self.lambda0
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Evaluate `(λ, λ̇, λ̈)` at `t ∈ [0, τ]`.
    pub fn eval(&self, t: f64) -> Result<SweepPoint> {
        // Allow a few ulps of slack so that grids built as `i·dt` hit τ.
        let slack = 1e-12 * self.tau;
        if !(t >= -slack && t <= self.tau + slack) {
            return Err(Error::domain(format!(
                "t = {t} outside the sweep interval [0, {}]",
                self.tau
            )));
        }
        Ok(self.point(t.clamp(0.0, self.tau)))
    }

    /// Unchecked evaluation used by inner loops that already respect `[0, τ]`.
    pub(crate) fn point(&self, t: f64) -> SweepPoint {
        let l0 = self.lambda0;
        let tau = self.tau;
        let s = t / tau;
        match self.kind {
            SweepKind::Linear => SweepPoint {
                value: l0 * (1.0 - 2.0 * s),
                rate: -2.0 * l0 / tau,
                accel: 0.0,
            },
            SweepKind::Cubic => SweepPoint {
                value: l0 * (s * s * (4.0 * s - 6.0) + 1.0),
                rate: 12.0 * l0 * s * (s - 1.0) / tau,
                accel: 12.0 * l0 * (2.0 * s - 1.0) / (tau * tau),
            },
        }
    }
}
