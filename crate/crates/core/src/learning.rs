//! Three-neuron associative circuit: a hardwired vibration neuron and a
//! plastic color neuron both drive a binary motion (avoidance) neuron. The
//! color synapse learns with Oja's rule.

use crate::error::{ensure, Result};

/// Color→motion synapse and its learning rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynapseState {
    pub w_color: f64,
    eta: f64,
}

impl SynapseState {
    pub fn new(w_color: f64, eta: f64) -> Result<Self> {
        ensure(
            w_color.is_finite(),
            "circuit.initial_w_color",
            "must be finite",
        )?;
        ensure(eta.is_finite() && eta > 0.0, "circuit.eta", "must be > 0")?;
        Ok(Self { w_color, eta })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Reflex threshold on vibration magnitude, m/s².
    pub vibration_threshold: f64,
    /// Drive `w·x` at which the learned color pathway fires.
    pub color_threshold: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self {
            vibration_threshold: 5.0,
            color_threshold: 0.3,
        }
    }
}

impl CircuitParams {
    pub fn validate(&self) -> Result<()> {
        ensure(
            self.vibration_threshold > 0.0,
            "circuit.vibration_threshold",
            "must be > 0",
        )?;
        ensure(
            self.color_threshold > 0.0,
            "circuit.color_threshold",
            "must be > 0",
        )
    }
}

/// Inputs and output of one circuit evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickIo {
    pub x_color: f64,
    pub vibration: f64,
    pub y: bool,
}

/// Avoid when the vibration reflex fires or when the learned color drive
/// reaches its threshold.
pub fn motion_output(
    vibration: f64,
    x_color: f64,
    synapse: &SynapseState,
    circuit: &CircuitParams,
) -> bool {
    vibration >= circuit.vibration_threshold || synapse.w_color * x_color >= circuit.color_threshold
}

/// Oja weight change `η(y·x − y²·w)` for a real-valued output.
pub fn oja_delta(w: f64, x: f64, y: f64, eta: f64) -> f64 {
    eta * (y * x - y * y * w)
}

/// Applies one Oja step with a binary motion output.
pub fn oja_update(synapse: &SynapseState, x_color: f64, y: bool) -> SynapseState {
    let y = if y { 1.0 } else { 0.0 };
    SynapseState {
        w_color: synapse.w_color + oja_delta(synapse.w_color, x_color, y, synapse.eta),
        eta: synapse.eta,
    }
}

/// Stateful wrapper evaluating the circuit once per control tick.
#[derive(Debug, Clone)]
pub struct AssociativeCircuit {
    pub params: CircuitParams,
    pub synapse: SynapseState,
    pub learning_enabled: bool,
}

impl AssociativeCircuit {
    pub fn step(&mut self, vibration: f64, x_color: f64) -> TickIo {
        let y = motion_output(vibration, x_color, &self.synapse, &self.params);
        if self.learning_enabled {
            self.synapse = oja_update(&self.synapse, x_color, y);
        }
        TickIo {
            x_color,
            vibration,
            y,
        }
    }
}
