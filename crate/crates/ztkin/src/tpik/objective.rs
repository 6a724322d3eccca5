//! Scalar control objectives with smooth activation.
//!
//! Every task row carries an objective that turns the row's current value
//! into (a) a reference rate for the solver to chase and (b) an activation
//! weight in `[0, 1]`. Equality objectives are always active; inequality
//! objectives fade in over a buffer strip just inside the violated bound,
//! so rows enter and leave the hierarchy without velocity jumps.

use crate::error::{Error, Result};

/// Cubic smoothstep: 0 below 0, 1 above 1, `3u^2 - 2u^3` between, with a
/// continuous first derivative at both ends.
pub fn smoothstep(u: f64) -> f64 {
    if u <= 0.0 {
        0.0
    } else if u >= 1.0 {
        1.0
    } else {
        u * u * (3.0 - 2.0 * u)
    }
}

/// What a task row is asked to do with its scalar value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObjectiveKind {
    /// Drive the value to `target`.
    Equality { target: f64 },
    /// Keep the value at or above `min`.
    LowerBound { min: f64 },
    /// Keep the value at or below `max`.
    UpperBound { max: f64 },
    /// Keep the value inside `[min, max]`.
    Range { min: f64, max: f64 },
}

/// An objective plus its loop-shaping constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ControlObjective {
    pub kind: ObjectiveKind,
    /// Proportional gain on the value error, 1/s.
    pub gain: f64,
    /// Feedforward rate added when the objective is active.
    pub feedforward: f64,
    /// Width of the activation strip inside each bound.
    pub buffer: f64,
}

impl ControlObjective {
    pub fn new(kind: ObjectiveKind, gain: f64, feedforward: f64, buffer: f64) -> Result<Self> {
        if !(gain.is_finite() && gain >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "objective gain must be finite and non-negative, got {gain}"
            )));
        }
        let needs_buffer = !matches!(kind, ObjectiveKind::Equality { .. });
        if needs_buffer && !(buffer.is_finite() && buffer > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "inequality objectives need a positive buffer, got {buffer}"
            )));
        }
        if let ObjectiveKind::Range { min, max } = kind {
            if !(max - min > 2.0 * buffer) {
                return Err(Error::InvalidParameter(format!(
                    "range [{min}, {max}] is narrower than two buffers of {buffer}"
                )));
            }
        }
        Ok(Self {
            kind,
            gain,
            feedforward,
            buffer,
        })
    }

    pub fn equality(target: f64, gain: f64) -> Self {
        Self {
            kind: ObjectiveKind::Equality { target },
            gain,
            feedforward: 0.0,
            buffer: 0.0,
        }
    }

    fn lower_activation(&self, min: f64, value: f64) -> f64 {
        smoothstep((min + self.buffer - value) / self.buffer)
    }

    fn upper_activation(&self, max: f64, value: f64) -> f64 {
        smoothstep((value - (max - self.buffer)) / self.buffer)
    }

    /// Activation weight in `[0, 1]`: 1 while the bound is violated, 0 deep
    /// inside the valid region, smooth in between.
    pub fn activation(&self, value: f64) -> f64 {
        match self.kind {
            ObjectiveKind::Equality { .. } => 1.0,
            ObjectiveKind::LowerBound { min } => self.lower_activation(min, value),
            ObjectiveKind::UpperBound { max } => self.upper_activation(max, value),
            ObjectiveKind::Range { min, max } => {
                // Probabilistic OR keeps the blend C1 even if the buffers
                // were ever to overlap.
                let lo = self.lower_activation(min, value);
                let hi = self.upper_activation(max, value);
                lo + hi - lo * hi
            }
        }
    }

    /// Reference rate for the solver. Equality rows always chase their
    /// target; inequality rows chase a setpoint one buffer inside the
    /// violated bound and go silent once fully inactive.
    pub fn reference_rate(&self, value: f64) -> f64 {
        match self.kind {
            ObjectiveKind::Equality { target } => self.gain * (target - value) + self.feedforward,
            ObjectiveKind::LowerBound { min } => {
                if self.lower_activation(min, value) > 0.0 {
                    self.gain * (min + self.buffer - value) + self.feedforward
                } else {
                    0.0
                }
            }
            ObjectiveKind::UpperBound { max } => {
                if self.upper_activation(max, value) > 0.0 {
                    self.gain * (max - self.buffer - value) + self.feedforward
                } else {
                    0.0
                }
            }
            ObjectiveKind::Range { min, max } => {
                let lo = self.lower_activation(min, value);
                let hi = self.upper_activation(max, value);
                if lo <= 0.0 && hi <= 0.0 {
                    0.0
                } else if lo >= hi {
                    self.gain * (min + self.buffer - value) + self.feedforward
                } else {
                    self.gain * (max - self.buffer - value) + self.feedforward
                }
            }
        }
    }
}
