//! Junction shunted by a 4π-periodic element,
//! `H = E_C (n̂ - n_x)² - E_J cos φ̂ - E_4π cos(φ̂/2)`.
//!
//! The coupling `cos(φ̂/2)` mixes quasicharges that differ by ½, so the
//! problem is solved on the doubled period `φ̃ ∈ (-2π, 2π]` in the
//! half-integer plane-wave basis `e^{imφ̃/2}/√(4π)`. At `κ̃ = 0` even `m` carry
//! the `κ = 0` sector of the unshunted device and odd `m` the `κ = ½` sector.
//!
//! [`coupled_block_oracle`] solves the same problem independently as two
//! finite-difference blocks on `(-π, π]` (periodic and antiperiodic) coupled
//! by `-E_4π cos(φ/2)`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::bands::{self, BlochWavefunction};
use crate::error::{Error, Result};
use crate::evolution::{ShuntDynamics, Snapshot};
use crate::linalg::{self, Eigenpairs, SymmetricBanded, SymmetricMatrix};
use crate::params::CircuitParams;

/// Default half-integer plane-wave cutoff (`m ∈ [-M, M]`).
pub const DEFAULT_CUTOFF: usize = 80;
pub const MIN_CUTOFF: usize = 20;
/// Number of bands retained for dynamics.
pub const DEFAULT_BANDS: usize = 40;
/// Samples of the doubled period used for wavefunction output.
pub const DEFAULT_SAMPLES: usize = 512;

/// Plane-wave Hamiltonian at quasicharge `kappa_tilde`: diagonal
/// `E_C (m/2 - n_x - κ̃)²`, `-E_J/2` at `|Δm| = 2`, `-E_4π/2` at `|Δm| = 1`.
pub fn fourpi_hamiltonian(
    params: &CircuitParams,
    kappa_tilde: f64,
    cutoff: usize,
) -> Result<SymmetricBanded> {
    if cutoff < MIN_CUTOFF {
        return Err(Error::domain(format!(
            "4π cutoff must be >= {MIN_CUTOFF}, got {cutoff}"
        )));
    }
    let dim = 2 * cutoff + 1;
    let mut h = SymmetricBanded::zeros(dim, 2);
    for i in 0..dim {
        let m = i as f64 - cutoff as f64;
        h.set(
            i,
            i,
            params.e_c * (m / 2.0 - params.n_x - kappa_tilde).powi(2),
        );
        if i + 1 < dim {
            h.set(i, i + 1, -params.e_4pi / 2.0);
        }
        if i + 2 < dim {
            h.set(i, i + 2, -params.e_j / 2.0);
        }
    }
    Ok(h)
}

/// Eigenpairs on the doubled period at fixed `κ̃`.
#[derive(Clone, Debug)]
pub struct FourPiModeSet {
    pub kappa_tilde: f64,
    pub energies: Vec<f64>,
    /// Unit coefficient vectors over `m ∈ [-M, M]`, phase-fixed.
    pub coefficients: Vec<Vec<C64>>,
    /// Samples `φ̃_i = -2π + 4π(i + 1)/n` of `(-2π, 2π]`.
    pub phi_values: Vec<f64>,
    /// `F_{κ̃,b}(φ̃_i)`, unit norm on `(-2π, 2π]`.
    pub wavefunctions: Vec<Vec<C64>>,
    pub cutoff: usize,
    pub params: CircuitParams,
}

/// `n` samples of `(-2π, 2π]` ending exactly at `2π`.
pub fn doubled_period_grid(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                2.0 * PI
            } else {
                -2.0 * PI + 4.0 * PI * (i + 1) as f64 / n as f64
            }
        })
        .collect()
}

fn eval_half_integer(coefficients: &[C64], kappa_tilde: f64, phi: f64) -> C64 {
    let cutoff = (coefficients.len() - 1) / 2;
    let sum: C64 = coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| c * C64::from_polar(1.0, (i as f64 - cutoff as f64) * phi / 2.0))
        .sum();
    sum * C64::from_polar(1.0 / (4.0 * PI).sqrt(), -kappa_tilde * phi)
}

/// Lowest `n_bands` eigenpairs at `kappa_tilde ∈ (-¼, ¼]`.
pub fn solve_fourpi(
    params: &CircuitParams,
    kappa_tilde: f64,
    n_bands: usize,
    cutoff: usize,
) -> Result<FourPiModeSet> {
    params.validate()?;
    if !(kappa_tilde > -0.25 && kappa_tilde <= 0.25) {
        return Err(Error::domain(format!(
            "kappa_tilde must lie in (-1/4, 1/4], got {kappa_tilde}"
        )));
    }
    if n_bands == 0 || n_bands > cutoff {
        return Err(Error::domain(format!(
            "n_bands must lie in 1..={cutoff}, got {n_bands}"
        )));
    }
    let Eigenpairs { values, vectors } = fourpi_hamiltonian(params, kappa_tilde, cutoff)?
        .eigh_lowest(n_bands)
        .map_err(|e| Error::Numeric {
            kappa_index: None,
            reason: e.to_string(),
        })?;
    let phi_values = doubled_period_grid(DEFAULT_SAMPLES);
    let mut coefficients = Vec::with_capacity(n_bands);
    let mut wavefunctions = Vec::with_capacity(n_bands);
    for v in vectors {
        let mut c: Vec<C64> = v.into_iter().map(|x| C64::new(x, 0.0)).collect();
        let raw: Vec<C64> = phi_values
            .iter()
            .map(|&p| eval_half_integer(&c, kappa_tilde, p))
            .collect();
        let phase = bands::phase_convention(&raw);
        c.iter_mut().for_each(|z| *z *= phase);
        wavefunctions.push(raw.into_iter().map(|z| z * phase).collect());
        coefficients.push(c);
    }
    Ok(FourPiModeSet {
        kappa_tilde,
        energies: values,
        coefficients,
        phi_values,
        wavefunctions,
        cutoff,
        params: *params,
    })
}

impl FourPiModeSet {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn eval(&self, band: usize, phi: f64) -> C64 {
        eval_half_integer(&self.coefficients[band], self.kappa_tilde, phi)
    }

    /// `⟨F_b | state⟩` in coefficient space (the basis is orthonormal).
    pub fn overlap(&self, band: usize, state: &FourPiState) -> C64 {
        overlap_aligned(&self.coefficients[band], &state.coefficients)
    }
}

/// `Σ conj(a_m) b_m` for two vectors centred on `m = 0`.
fn overlap_aligned(a: &[C64], b: &[C64]) -> C64 {
    let (ca, cb) = ((a.len() - 1) / 2, (b.len() - 1) / 2);
    let c = ca.min(cb);
    (0..=2 * c)
        .map(|i| a[ca - c + i].conj() * b[cb - c + i])
        .sum()
}

/// A transmon Bloch state embedded on the doubled period, as coefficients
/// over `e^{imφ̃/2}/√(4π)` at `κ̃ = 0`.
#[derive(Clone, Debug)]
pub struct FourPiState {
    pub coefficients: Vec<C64>,
}

impl FourPiState {
    pub fn cutoff(&self) -> usize {
        (self.coefficients.len() - 1) / 2
    }

    pub fn eval(&self, phi: f64) -> C64 {
        eval_half_integer(&self.coefficients, 0.0, phi)
    }

    pub fn norm(&self) -> f64 {
        self.coefficients
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn inner(&self, other: &FourPiState) -> C64 {
        overlap_aligned(&self.coefficients, &other.coefficients)
    }
}

/// Extends `F_{κ,b}` with `κ ∈ {0, ½}` over `(-2π, 2π]` by its Bloch phase
/// (periodic copy for κ = 0, sign-flipped copy for κ = ½) and renormalises it
/// to unit norm there.
pub fn embed_transmon_state(f: &BlochWavefunction) -> Result<FourPiState> {
    let odd = if f.kappa == 0.0 {
        false
    } else if f.kappa == 0.5 {
        true
    } else {
        return Err(Error::usage(format!(
            "only κ = 0 and κ = 1/2 embed on the doubled period, got {}",
            f.kappa
        )));
    };
    // e^{-iκφ} e^{imφ} = e^{i(2m - 2κ)φ/2}; unit norm on (-π, π] gives norm √2
    // on the doubled period, and the basis normalisations differ by √2.
    let m_cut = f.cutoff();
    let cutoff = 2 * m_cut + 1;
    let mut coefficients = vec![C64::new(0.0, 0.0); 2 * cutoff + 1];
    for (i, c) in f.coefficients.iter().enumerate() {
        let m = i as i64 - m_cut as i64;
        let m2 = 2 * m - i64::from(odd);
        coefficients[(m2 + cutoff as i64) as usize] = c * (2.0 * PI).sqrt();
    }
    Ok(FourPiState { coefficients })
}

/// Dense finite-difference oracle for the doubled-period problem at
/// `κ̃ = 0`, on `n_grid` points per block with the given stencil order.
pub fn coupled_block_oracle(
    params: &CircuitParams,
    n_grid: usize,
    order: usize,
    count: usize,
) -> Result<CoupledBlockSpectrum> {
    params.validate()?;
    if params.n_x != 0.0 {
        return Err(Error::usage("the coupled-block oracle assumes n_x = 0"));
    }
    let c = linalg::second_derivative_stencil(order)?;
    if n_grid < 4 * c.len() {
        return Err(Error::domain(format!("oracle grid too small: {n_grid}")));
    }
    if count == 0 || count > 2 * n_grid {
        return Err(Error::domain(format!("cannot return {count} eigenpairs")));
    }
    let n = n_grid;
    let h = 2.0 * PI / n as f64;
    let h2 = h * h;
    let phi = |i: usize| -PI + (i + 1) as f64 * h;
    let mut m = SymmetricMatrix::zeros(2 * n);
    for block in 0..2 {
        let antiperiodic = block == 1;
        let off = block * n;
        for i in 0..n {
            m.add(
                off + i,
                off + i,
                -params.e_c * c[0] / h2 - params.e_j * phi(i).cos(),
            );
            for (s, cs) in c.iter().enumerate().skip(1) {
                let j = i + s;
                let sign = if j >= n && antiperiodic { -1.0 } else { 1.0 };
                m.add(off + i, off + j % n, -params.e_c * cs * sign / h2);
            }
        }
    }
    for i in 0..n {
        m.add(i, n + i, -params.e_4pi * (phi(i) / 2.0).cos());
    }
    let eig = m.eigh_lowest(count)?;
    let f_center = eig.vectors.iter().map(|v| v[..n].to_vec()).collect();
    let f_edge = eig.vectors.iter().map(|v| v[n..].to_vec()).collect();
    Ok(CoupledBlockSpectrum {
        energies: eig.values,
        f_center,
        f_edge,
        step: h,
    })
}

/// Eigenpairs of the coupled-block oracle. Components are stored as
/// Euclidean vectors; `Σ (|f₀|² + |f_½|²) = 1` per eigenvector.
#[derive(Clone, Debug)]
pub struct CoupledBlockSpectrum {
    pub energies: Vec<f64>,
    pub f_center: Vec<Vec<f64>>,
    pub f_edge: Vec<Vec<f64>>,
    pub step: f64,
}

/// Dynamics after switching on the 4π element with the system in the
/// unbroadened transmon ground state.
#[derive(Clone, Debug)]
pub struct FourPiExperiment {
    pub modes: FourPiModeSet,
    pub center: FourPiState,
    pub edge: FourPiState,
    amplitudes: Vec<C64>,
    center_overlaps: Vec<C64>,
    edge_overlaps: Vec<C64>,
}

impl FourPiExperiment {
    pub fn new(params: &CircuitParams, n_bands: usize, cutoff: usize) -> Result<Self> {
        params.validate()?;
        if params.e_4pi <= 0.0 {
            return Err(Error::domain("the 4π experiment needs e_4pi > 0"));
        }
        let unshunted = CircuitParams {
            e_4pi: 0.0,
            ..*params
        };
        let phis = doubled_period_grid(2);
        let band_cutoff = (cutoff / 2).max(bands::MIN_CUTOFF);
        let f0 = bands::bloch_wavefunction(&unshunted, 0.0, 0, &phis, band_cutoff)?;
        let fh = bands::bloch_wavefunction(&unshunted, 0.5, 0, &phis, band_cutoff)?;
        let center = embed_transmon_state(&f0)?;
        let edge = embed_transmon_state(&fh)?;
        let modes = solve_fourpi(params, 0.0, n_bands, cutoff)?;
        let center_overlaps: Vec<C64> = (0..modes.len())
            .map(|b| modes.overlap(b, &center).conj())
            .collect();
        let edge_overlaps: Vec<C64> = (0..modes.len())
            .map(|b| modes.overlap(b, &edge).conj())
            .collect();
        let amplitudes = center_overlaps.iter().map(|z| z.conj()).collect();
        Ok(Self {
            modes,
            center,
            edge,
            amplitudes,
            center_overlaps,
            edge_overlaps,
        })
    }

    /// Coefficient vector of `ψ(t)`.
    pub fn state(&self, t: f64) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); 2 * self.modes.cutoff + 1];
        for ((a, e), v) in self
            .amplitudes
            .iter()
            .zip(&self.modes.energies)
            .zip(&self.modes.coefficients)
        {
            let w = a * C64::from_polar(1.0, -e * t);
            for (o, c) in out.iter_mut().zip(v) {
                *o += w * c;
            }
        }
        out
    }
}

impl ShuntDynamics for FourPiExperiment {
    fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    fn energies(&self) -> &[f64] {
        &self.modes.energies
    }

    fn center_overlaps(&self) -> &[C64] {
        &self.center_overlaps
    }

    fn edge_overlaps(&self) -> &[C64] {
        &self.edge_overlaps
    }

    fn norm_at(&self, t: f64) -> f64 {
        self.state(t)
            .iter()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    fn snapshot(&self, t: f64) -> Result<Snapshot> {
        let state = FourPiState {
            coefficients: self.state(t),
        };
        let phi = self.modes.phi_values.clone();
        let values = phi.iter().map(|&p| state.eval(p)).collect();
        Ok(Snapshot::Extended { phi, values })
    }
}
