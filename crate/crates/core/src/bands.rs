//! Bloch bands of the unshunted Cooper-pair box / transmon,
//! `H = E_C (n̂ - n_x)² - E_J cos φ̂`, solved per quasicharge in the
//! plane-wave (integer charge) basis where the Bloch Hamiltonian is exactly
//! tridiagonal.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::SymmetricBanded;
use crate::params::CircuitParams;

/// Default plane-wave cutoff `M` (charges `m ∈ [-M, M]`).
pub const DEFAULT_CUTOFF: usize = 40;
/// Smallest accepted cutoff.
pub const MIN_CUTOFF: usize = 10;

/// `(2M+1)×(2M+1)` Bloch Hamiltonian for `u_κ = Σ c_m e^{imφ}`: diagonal
/// `E_C (m - n_x - κ)²`, off-diagonals `-E_J/2`.
pub fn charge_basis_hamiltonian(
    params: &CircuitParams,
    kappa: f64,
    cutoff: usize,
) -> Result<SymmetricBanded> {
    if cutoff < MIN_CUTOFF {
        return Err(Error::domain(format!(
            "charge cutoff must be >= {MIN_CUTOFF}, got {cutoff}"
        )));
    }
    let dim = 2 * cutoff + 1;
    let mut h = SymmetricBanded::zeros(dim, 1);
    for i in 0..dim {
        let m = i as f64 - cutoff as f64;
        h.set(i, i, params.e_c * (m - params.n_x - kappa).powi(2));
        if i + 1 < dim {
            h.set(i, i + 1, -params.e_j / 2.0);
        }
    }
    Ok(h)
}

/// Sorted band energies over a quasicharge grid.
#[derive(Clone, Debug)]
pub struct BandStructure {
    pub kappa_values: Vec<f64>,
    /// `energies[i][b]` is `E_{κ_i, b}`.
    pub energies: Vec<Vec<f64>>,
    pub n_bands: usize,
    pub cutoff: usize,
    pub params: CircuitParams,
}

impl BandStructure {
    pub fn energy(&self, kappa_index: usize, band: usize) -> f64 {
        self.energies[kappa_index][band]
    }

    /// One band as a function of κ.
    pub fn band(&self, band: usize) -> Vec<f64> {
        self.energies.iter().map(|e| e[band]).collect()
    }
}

/// Diagonalises the Bloch Hamiltonian at every κ (in parallel). Band `b` is
/// the `b`-th smallest eigenvalue at each κ.
pub fn solve_band_structure(
    params: &CircuitParams,
    kappa_values: &[f64],
    n_bands: usize,
    cutoff: usize,
) -> Result<BandStructure> {
    params.validate()?;
    if n_bands == 0 || n_bands > cutoff {
        return Err(Error::domain(format!(
            "n_bands must lie in 1..={cutoff}, got {n_bands}"
        )));
    }
    let energies = kappa_values
        .par_iter()
        .enumerate()
        .map(|(i, &kappa)| {
            let h = charge_basis_hamiltonian(params, kappa, cutoff)?;
            h.eigh_lowest(n_bands)
                .map(|e| e.values)
                .map_err(|e| Error::Numeric {
                    kappa_index: Some(i),
                    reason: e.to_string(),
                })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BandStructure {
        kappa_values: kappa_values.to_vec(),
        energies,
        n_bands,
        cutoff,
        params: *params,
    })
}

/// `n` uniform quasicharges on `(-½, ½]`, the last one exactly `½`.
pub fn kappa_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                0.5
            } else {
                -0.5 + (i + 1) as f64 / n as f64
            }
        })
        .collect()
}

/// Bloch function `F_{κ,b}(φ) = e^{-iκφ} Σ_m c_m e^{imφ}`, unit norm on
/// `(-π, π]`, with the global phase chosen so that its largest sample on
/// `phi_values` is real and positive.
#[derive(Clone, Debug)]
pub struct BlochWavefunction {
    pub kappa: f64,
    pub band: usize,
    pub energy: f64,
    /// Plane-wave coefficients for charges `-M..=M`, including the phase
    /// convention and the `1/√(2π)` normalisation.
    pub coefficients: Vec<C64>,
    pub phi_values: Vec<f64>,
    pub values: Vec<C64>,
}

impl BlochWavefunction {
    pub fn cutoff(&self) -> usize {
        (self.coefficients.len() - 1) / 2
    }

    /// Evaluates `F` anywhere on the real line; `F(φ + 2π) = e^{-2πiκ} F(φ)`.
    pub fn eval(&self, phi: f64) -> C64 {
        let m0 = -(self.cutoff() as f64);
        let sum: C64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(i, c)| c * C64::from_polar(1.0, (m0 + i as f64) * phi))
            .sum();
        sum * C64::from_polar(1.0, -self.kappa * phi)
    }

    /// `∫_{-π}^{π} conj(F) G dφ`, exact for plane-wave expansions at equal κ.
    pub fn overlap(&self, other: &BlochWavefunction) -> Result<C64> {
        if self.kappa != other.kappa || self.coefficients.len() != other.coefficients.len() {
            return Err(Error::usage(
                "coefficient overlaps need equal quasicharge and cutoff",
            ));
        }
        let s: C64 = self
            .coefficients
            .iter()
            .zip(&other.coefficients)
            .map(|(a, b)| a.conj() * b)
            .sum();
        Ok(s * 2.0 * PI)
    }
}

/// Unit phase that makes the largest-magnitude sample real and positive.
/// Samples within a relative `1e-9` of the maximum tie, and the first wins.
pub(crate) fn phase_convention(samples: &[C64]) -> C64 {
    let peak = samples.iter().map(|z| z.norm()).fold(0.0, f64::max);
    match samples.iter().find(|z| z.norm() >= peak * (1.0 - 1e-9)) {
        Some(z) if peak > 0.0 => z.conj() / z.norm(),
        _ => C64::new(1.0, 0.0),
    }
}

/// Plane-wave eigenvector of band `band` at `kappa`.
pub fn bloch_eigenpair(
    params: &CircuitParams,
    kappa: f64,
    band: usize,
    cutoff: usize,
) -> Result<(f64, Vec<f64>)> {
    params.validate()?;
    if band > 2 * cutoff {
        return Err(Error::domain(format!("band {band} exceeds the basis size")));
    }
    let h = charge_basis_hamiltonian(params, kappa, cutoff)?;
    let mut e = h.eigh_lowest(band + 1)?;
    Ok((e.values[band], e.vectors.swap_remove(band)))
}

/// Bloch function of band `band` at quasicharge `kappa`, sampled on
/// `phi_values` (typically a Zak grid's φ samples).
pub fn bloch_wavefunction(
    params: &CircuitParams,
    kappa: f64,
    band: usize,
    phi_values: &[f64],
    cutoff: usize,
) -> Result<BlochWavefunction> {
    let (energy, vector) = bloch_eigenpair(params, kappa, band, cutoff)?;
    let scale = 1.0 / (2.0 * PI).sqrt();
    let mut wf = BlochWavefunction {
        kappa,
        band,
        energy,
        coefficients: vector.iter().map(|&c| C64::new(c * scale, 0.0)).collect(),
        phi_values: phi_values.to_vec(),
        values: Vec::new(),
    };
    let raw: Vec<C64> = phi_values.iter().map(|&p| wf.eval(p)).collect();
    let phase = phase_convention(&raw);
    wf.coefficients.iter_mut().for_each(|c| *c *= phase);
    wf.values = raw.into_iter().map(|z| z * phase).collect();
    Ok(wf)
}

/// Lowest-band dispersion `E_{½,0} - E_{0,0}`, which sets the Z rotation rate
/// between the two quasicharge-localised computational states.
pub fn z_splitting(params: &CircuitParams) -> Result<f64> {
    let bs = solve_band_structure(params, &[0.0, 0.5], 1, DEFAULT_CUTOFF)?;
    Ok(bs.energy(1, 0) - bs.energy(0, 0))
}

/// `(E_{0,1} - E_{0,0}) / √(2 E_J E_C)`: the first transition at the zone
/// centre in units of the small-oscillation (plasma) frequency.
pub fn plasma_ratio(params: &CircuitParams) -> Result<f64> {
    if params.e_j <= 0.0 {
        return Err(Error::domain("the plasma ratio needs e_j > 0"));
    }
    let bs = solve_band_structure(params, &[0.0], 2, DEFAULT_CUTOFF)?;
    Ok((bs.energy(0, 1) - bs.energy(0, 0)) / (2.0 * params.e_j * params.e_c).sqrt())
}
