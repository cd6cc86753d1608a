//! Circuit parameters in units of the Josephson energy.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Elementary charge (C), exact SI value.
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
/// Planck constant (J s), exact SI value.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Superconducting flux quantum h / 2e (Wb).
pub const FLUX_QUANTUM: f64 = PLANCK / (2.0 * ELEMENTARY_CHARGE);

/// Dimensionless circuit energies. All energies are measured in units of
/// `E_J` and times in units of `1/E_J` (ħ = 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CircuitParams {
    /// Charging energy `E_C`.
    pub e_c: f64,
    /// Josephson energy; 1 when it is the unit, 0 for the free rotor.
    pub e_j: f64,
    /// Linear-inductor energy `E_L` (0 when unshunted).
    pub e_l: f64,
    /// Amplitude of the 4π-periodic element (0 when unshunted).
    pub e_4pi: f64,
    /// Offset (gate) charge `n_x`.
    pub n_x: f64,
    /// Quasicharge broadening `Δ` of the regularised initial states.
    pub delta: f64,
}

/// Which symmetry-breaking element is switched in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ShuntKind {
    Inductive,
    FourPi,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self {
            e_c: 1.0,
            e_j: 1.0,
            e_l: 0.0,
            e_4pi: 0.0,
            n_x: 0.0,
            delta: 0.2,
        }
    }
}

impl CircuitParams {
    /// Unshunted transmon/CPB with the given energies.
    pub fn transmon(e_c: f64, e_j: f64) -> Result<Self> {
        let p = Self {
            e_c,
            e_j,
            ..Self::default()
        };
        p.validate()?;
        Ok(p)
    }

    /// Reference inductively shunted circuit: `E_C = E_J = 1`,
    /// `E_L = 1/(2π)²`, `Δ = 0.2`.
    pub fn inductive_reference() -> Self {
        Self {
            e_l: 1.0 / (4.0 * PI * PI),
            ..Self::default()
        }
    }

    /// `E_C = E_J = 1`, `E_4π = 1/2`.
    pub fn fourpi_reference() -> Self {
        Self {
            e_4pi: 0.5,
            ..Self::default()
        }
    }

    pub fn with_inductance(mut self, e_l: f64) -> Self {
        self.e_l = e_l;
        self
    }

    pub fn with_fourpi(mut self, e_4pi: f64) -> Self {
        self.e_4pi = e_4pi;
        self
    }

    pub fn with_offset_charge(mut self, n_x: f64) -> Self {
        self.n_x = n_x;
        self
    }

    pub fn with_broadening(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.e_c, self.e_j, self.e_l, self.e_4pi, self.n_x, self.delta,
        ]
        .iter()
        .all(|x| x.is_finite());
        if !finite {
            return Err(Error::domain("circuit parameters must be finite"));
        }
        if self.e_c <= 0.0 {
            return Err(Error::domain(format!("e_c must be > 0, got {}", self.e_c)));
        }
        for (name, v) in [("e_j", self.e_j), ("e_l", self.e_l), ("e_4pi", self.e_4pi)] {
            if v < 0.0 {
                return Err(Error::domain(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::domain(format!(
                "delta must lie in (0, 1/2), got {}",
                self.delta
            )));
        }
        if self.e_l > 0.0 && self.e_4pi > 0.0 {
            return Err(Error::domain(
                "at most one of e_l and e_4pi may be nonzero in a single run",
            ));
        }
        Ok(())
    }

    /// The active shunt, if any.
    pub fn shunt(&self) -> Option<ShuntKind> {
        if self.e_l > 0.0 {
            Some(ShuntKind::Inductive)
        } else if self.e_4pi > 0.0 {
            Some(ShuntKind::FourPi)
        } else {
            None
        }
    }

    /// Harmonic-oscillator level spacing `2 sqrt(E_C E_L)` of the inductive
    /// part alone.
    pub fn oscillator_spacing(&self) -> f64 {
        2.0 * (self.e_c * self.e_l).sqrt()
    }
}

/// Nondimensionalise SI circuit values.
///
/// `E_C = 2e²/(C + C_x)`, `E_L = Φ₀²/(8π²L)` and `n_x = C_x V_x / 2e`; the two
/// energies are divided by `josephson_energy` (J). `inductance = None` is the
/// open circuit (`E_L = 0`). The broadening takes its default value.
pub fn params_from_si(
    capacitance_junction: f64,
    capacitance_gate: f64,
    inductance: Option<f64>,
    gate_voltage: f64,
    josephson_energy: f64,
) -> Result<CircuitParams> {
    if !(capacitance_junction > 0.0) || !(capacitance_gate > 0.0) {
        return Err(Error::domain(format!(
            "capacitances must be > 0 (C = {capacitance_junction}, C_x = {capacitance_gate})"
        )));
    }
    if !(josephson_energy > 0.0) {
        return Err(Error::domain("the reference Josephson energy must be > 0"));
    }
    let e_l = match inductance {
        Some(l) if !(l > 0.0) => {
            return Err(Error::domain(format!("inductance must be > 0, got {l}")))
        }
        Some(l) if l.is_infinite() => 0.0,
        Some(l) => FLUX_QUANTUM * FLUX_QUANTUM / (8.0 * PI * PI * l),
        None => 0.0,
    };
    let e_c =
        2.0 * ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (capacitance_junction + capacitance_gate);
    let n_x = capacitance_gate * gate_voltage / (2.0 * ELEMENTARY_CHARGE);
    let p = CircuitParams {
        e_c: e_c / josephson_energy,
        e_j: 1.0,
        e_l: e_l / josephson_energy,
        e_4pi: 0.0,
        n_x,
        delta: CircuitParams::default().delta,
    };
    p.validate()?;
    Ok(p)
}
