//! Run configuration: built-in defaults, then a flat TOML file, then
//! command-line overrides.
//!
//! Units: `E_J = 1`, `ħ = 1`; energies in units of `E_J`, times in `1/E_J`.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{Args, ValueEnum};
use qcs_core::evolution::{ExperimentSettings, InductiveSettings};
use qcs_core::fluxonium::PhaseGrid;
use qcs_core::{bands, evolution, fluxonium, fourpi, zak, CircuitParams, ZakGrid};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
pub enum Shunt {
    #[serde(rename = "ind")]
    #[value(name = "ind")]
    Inductive,
    #[serde(rename = "4pi")]
    #[value(name = "4pi")]
    FourPi,
}

/// Keys accepted in a config file. Every key is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub e_c: Option<f64>,
    pub e_j: Option<f64>,
    pub e_l: Option<f64>,
    pub e_4pi: Option<f64>,
    pub n_x: Option<f64>,
    pub delta: Option<f64>,
    pub n_k: Option<usize>,
    pub n_phi: Option<usize>,
    pub n_kappa: Option<usize>,
    pub n_bands: Option<usize>,
    pub cutoff: Option<usize>,
    pub window_periods: Option<u32>,
    pub phase_points: Option<usize>,
    pub fd_order: Option<usize>,
    pub n_modes: Option<usize>,
    pub gallery_modes: Option<usize>,
    pub capture_threshold: Option<f64>,
    pub fourpi_cutoff: Option<usize>,
    pub fourpi_bands: Option<usize>,
    pub time_points: Option<usize>,
    pub time_span: Option<f64>,
    pub shunt: Option<Shunt>,
    pub sweep: Option<Vec<f64>>,
}

/// Per-field overrides shared by all subcommands.
#[derive(Clone, Debug, Default, Args)]
pub struct Overrides {
    /// Charging energy E_C
    #[arg(long = "ec")]
    pub e_c: Option<f64>,
    /// Josephson energy E_J (the energy unit; 0 gives the free rotor)
    #[arg(long = "ej")]
    pub e_j: Option<f64>,
    /// Inductive energy E_L
    #[arg(long = "el")]
    pub e_l: Option<f64>,
    /// 4π-element energy E_4π
    #[arg(long = "e4pi")]
    pub e_4pi: Option<f64>,
    /// Offset charge n_x
    #[arg(long = "nx", allow_hyphen_values = true)]
    pub n_x: Option<f64>,
    /// Quasicharge broadening Δ
    #[arg(long)]
    pub delta: Option<f64>,
    /// Zak grid samples in k
    #[arg(long)]
    pub n_k: Option<usize>,
    /// Zak grid samples in φ
    #[arg(long)]
    pub n_phi: Option<usize>,
    /// Quasicharge samples for the band structure
    #[arg(long)]
    pub n_kappa: Option<usize>,
    /// Number of bands
    #[arg(long)]
    pub n_bands: Option<usize>,
    /// Charge-basis cutoff M of the Bloch solver
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// Phase window half-width in units of π
    #[arg(long)]
    pub window_periods: Option<u32>,
    /// Interior points of the phase grid
    #[arg(long)]
    pub phase_points: Option<usize>,
    /// Finite-difference accuracy order
    #[arg(long)]
    pub fd_order: Option<usize>,
    /// Retained shunted modes
    #[arg(long)]
    pub n_modes: Option<usize>,
    /// Modes written as Zak-plane CSVs
    #[arg(long)]
    pub gallery_modes: Option<usize>,
    /// Required mode capture of the initial state
    #[arg(long)]
    pub capture_threshold: Option<f64>,
    /// Half-integer plane-wave cutoff of the 4π solver
    #[arg(long)]
    pub fourpi_cutoff: Option<usize>,
    /// Retained 4π bands
    #[arg(long)]
    pub fourpi_bands: Option<usize>,
    /// Number of time samples
    #[arg(long)]
    pub time_points: Option<usize>,
    /// Time span in units of t_2pi
    #[arg(long)]
    pub time_span: Option<f64>,
    /// Shunt element
    #[arg(long, value_enum)]
    pub shunt: Option<Shunt>,
    /// E_J/E_C values of the Z-splitting sweep (comma separated)
    #[arg(long, value_delimiter = ',')]
    pub sweep: Option<Vec<f64>>,
}

/// Fully resolved configuration; written next to every output as
/// `config.json`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub e_c: f64,
    pub e_j: f64,
    pub e_l: f64,
    pub e_4pi: f64,
    pub n_x: f64,
    pub delta: f64,
    pub n_k: usize,
    pub n_phi: usize,
    pub n_kappa: usize,
    pub n_bands: usize,
    pub cutoff: usize,
    pub window_periods: u32,
    pub phase_points: usize,
    pub fd_order: usize,
    pub n_modes: usize,
    pub gallery_modes: usize,
    pub capture_threshold: f64,
    pub fourpi_cutoff: usize,
    pub fourpi_bands: usize,
    pub time_points: usize,
    pub time_span: f64,
    pub shunt: Option<Shunt>,
    pub sweep: Vec<f64>,
    pub units: String,
}

pub fn load_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))?;
    toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

/// Reference inductor energy `1/(2π)²`.
pub fn reference_e_l() -> f64 {
    1.0 / (4.0 * PI * PI)
}

/// Reference 4π-element energy.
pub const REFERENCE_E_4PI: f64 = 0.5;

impl RunConfig {
    /// Merges defaults, file and overrides, then fills command-specific
    /// shunt defaults and validates the physical parameters.
    pub fn resolve(command: &str, file: FileConfig, o: &Overrides) -> Result<Self> {
        macro_rules! pick {
            ($field:ident, $default:expr) => {
                o.$field.clone().or(file.$field.clone()).unwrap_or($default)
            };
        }
        let base = CircuitParams::default();
        let e_l_given = o.e_l.or(file.e_l);
        let e_4pi_given = o.e_4pi.or(file.e_4pi);
        let shunt_given = o.shunt.or(file.shunt);
        let mut cfg = RunConfig {
            command: command.to_string(),
            e_c: pick!(e_c, base.e_c),
            e_j: pick!(e_j, base.e_j),
            e_l: 0.0,
            e_4pi: 0.0,
            n_x: pick!(n_x, base.n_x),
            delta: pick!(delta, base.delta),
            n_k: pick!(n_k, zak::DEFAULT_N_K),
            n_phi: pick!(n_phi, zak::DEFAULT_N_PHI),
            n_kappa: pick!(n_kappa, 201),
            n_bands: pick!(n_bands, 4),
            cutoff: pick!(cutoff, bands::DEFAULT_CUTOFF),
            window_periods: pick!(window_periods, fluxonium::DEFAULT_WINDOW_PERIODS),
            phase_points: pick!(phase_points, fluxonium::DEFAULT_POINTS),
            fd_order: pick!(fd_order, fluxonium::DEFAULT_ORDER),
            n_modes: pick!(n_modes, evolution::DEFAULT_MODES),
            gallery_modes: pick!(gallery_modes, 7),
            capture_threshold: pick!(capture_threshold, evolution::DEFAULT_CAPTURE_THRESHOLD),
            fourpi_cutoff: pick!(fourpi_cutoff, fourpi::DEFAULT_CUTOFF),
            fourpi_bands: pick!(fourpi_bands, fourpi::DEFAULT_BANDS),
            time_points: pick!(time_points, evolution::DEFAULT_TIME_POINTS),
            time_span: pick!(time_span, evolution::DEFAULT_SPAN),
            shunt: None,
            sweep: pick!(sweep, vec![50.0, 10.0, 1.0, 0.0]),
            units: "E_J = 1, hbar = 1".to_string(),
        };
        match command {
            "bands" => {
                if e_l_given.unwrap_or(0.0) != 0.0 || e_4pi_given.unwrap_or(0.0) != 0.0 {
                    bail!("bands solves the unshunted device; e_l and e_4pi must be 0");
                }
            }
            "fluxonium-modes" => {
                if e_4pi_given.unwrap_or(0.0) != 0.0 {
                    bail!("fluxonium-modes needs e_4pi = 0");
                }
                cfg.e_l = e_l_given.unwrap_or_else(reference_e_l);
                cfg.shunt = Some(Shunt::Inductive);
            }
            "evolve" => {
                let shunt = shunt_given.unwrap_or(if e_4pi_given.unwrap_or(0.0) > 0.0 {
                    Shunt::FourPi
                } else {
                    Shunt::Inductive
                });
                match shunt {
                    Shunt::Inductive => {
                        if e_4pi_given.unwrap_or(0.0) != 0.0 {
                            bail!("shunt = ind needs e_4pi = 0");
                        }
                        cfg.e_l = e_l_given.unwrap_or_else(reference_e_l);
                    }
                    Shunt::FourPi => {
                        if e_l_given.unwrap_or(0.0) != 0.0 {
                            bail!("shunt = 4pi needs e_l = 0");
                        }
                        cfg.e_4pi = e_4pi_given.unwrap_or(REFERENCE_E_4PI);
                    }
                }
                cfg.shunt = Some(shunt);
            }
            "protocol" => {
                // both shunts are simulated unless one is selected
                cfg.shunt = shunt_given;
                cfg.e_l = e_l_given.unwrap_or_else(reference_e_l);
                cfg.e_4pi = e_4pi_given.unwrap_or(REFERENCE_E_4PI);
            }
            other => bail!("unknown command {other}"),
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        let mut p = self.base_params();
        p.validate()?;
        for (name, v) in [("e_l", self.e_l), ("e_4pi", self.e_4pi)] {
            if !(v.is_finite() && v >= 0.0) {
                bail!("{name} must be finite and >= 0, got {v}");
            }
        }
        if self.command != "protocol" {
            p.e_l = self.e_l;
            p.e_4pi = self.e_4pi;
            p.validate()?;
        }
        if !(self.capture_threshold > 0.0 && self.capture_threshold <= 1.0) {
            bail!("capture_threshold must lie in (0, 1]");
        }
        if !(self.time_span > 0.0 && self.time_span.is_finite()) || self.time_points < 2 {
            bail!("need time_span > 0 and time_points >= 2");
        }
        if self.n_kappa < 2 {
            bail!("n_kappa must be >= 2");
        }
        if self.sweep.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            bail!("sweep ratios must be finite and >= 0");
        }
        Ok(())
    }

    /// Circuit parameters without any shunt.
    pub fn base_params(&self) -> CircuitParams {
        CircuitParams {
            e_c: self.e_c,
            e_j: self.e_j,
            e_l: 0.0,
            e_4pi: 0.0,
            n_x: self.n_x,
            delta: self.delta,
        }
    }

    pub fn inductive_params(&self) -> CircuitParams {
        self.base_params().with_inductance(self.e_l)
    }

    pub fn fourpi_params(&self) -> CircuitParams {
        self.base_params().with_fourpi(self.e_4pi)
    }

    pub fn zak_grid(&self) -> Result<ZakGrid> {
        Ok(ZakGrid::new(self.n_k, self.n_phi)?)
    }

    pub fn phase_grid(&self) -> Result<PhaseGrid> {
        Ok(
            PhaseGrid::with_periods(self.window_periods, self.phase_points)?
                .with_order(self.fd_order)?,
        )
    }

    pub fn experiment_settings(&self) -> Result<ExperimentSettings> {
        Ok(ExperimentSettings {
            inductive: InductiveSettings {
                zak_grid: self.zak_grid()?,
                phase_grid: self.phase_grid()?,
                n_modes: self.n_modes,
                capture_threshold: self.capture_threshold,
            },
            fourpi_bands: self.fourpi_bands,
            fourpi_cutoff: self.fourpi_cutoff,
        })
    }
}
