//! Inductively shunted junction, `H = E_C (n̂ - n_x)² + E_L φ̂² - E_J cos φ̂`,
//! on the non-compact phase axis.
//!
//! The kinetic term uses a high-order central stencil between hard walls at
//! `±φ_max`; modes are Zak-transformed on demand. The offset charge is a pure
//! gauge for a confined problem: modes carry the factor `e^{i n_x φ}` and the
//! spectrum does not depend on `n_x`.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, SymmetricMatrix};
use crate::params::CircuitParams;
use crate::zak::{self, PhaseField, ZakField, ZakGrid};

/// Default window half-width in units of π.
pub const DEFAULT_WINDOW_PERIODS: u32 = 16;
/// Default number of interior grid points.
pub const DEFAULT_POINTS: usize = 1024;
/// Smallest accepted number of interior grid points.
pub const MIN_POINTS: usize = 512;
/// Default finite-difference accuracy order.
pub const DEFAULT_ORDER: usize = 8;
/// Largest allowed edge amplitude of the ground mode relative to its peak.
pub const EDGE_LIMIT: f64 = 1e-6;
/// Energies closer than this are treated as degenerate when fixing parity.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Hard-wall phase grid: `n` interior points `φ_i = -φ_max + (i + 1) h` with
/// `h = 2φ_max / (n + 1)`; the walls carry zero amplitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseGrid {
    phi_max: f64,
    n: usize,
    order: usize,
}

impl Default for PhaseGrid {
    fn default() -> Self {
        Self {
            phi_max: DEFAULT_WINDOW_PERIODS as f64 * PI,
            n: DEFAULT_POINTS,
            order: DEFAULT_ORDER,
        }
    }
}

impl PhaseGrid {
    pub fn new(phi_max: f64, n: usize) -> Result<Self> {
        let periods = phi_max / PI;
        if !(phi_max > 0.0) || (periods - periods.round()).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "phi_max must be a positive multiple of π, got {phi_max}"
            )));
        }
        if n < MIN_POINTS {
            return Err(Error::domain(format!(
                "phase grid needs at least {MIN_POINTS} points, got {n}"
            )));
        }
        Ok(Self {
            phi_max,
            n,
            order: DEFAULT_ORDER,
        })
    }

    /// Window of `periods · π` half-width.
    pub fn with_periods(periods: u32, n: usize) -> Result<Self> {
        Self::new(periods as f64 * PI, n)
    }

    pub fn with_order(mut self, order: usize) -> Result<Self> {
        linalg::second_derivative_stencil(order)?;
        self.order = order;
        Ok(self)
    }

    pub fn phi_max(&self) -> f64 {
        self.phi_max
    }

    pub fn points(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn step(&self) -> f64 {
        2.0 * self.phi_max / (self.n as f64 + 1.0)
    }

    pub fn phi(&self, i: usize) -> f64 {
        -self.phi_max + (i + 1) as f64 * self.step()
    }
}

/// Finite-difference Hamiltonian (at `n_x = 0`) on the interior points of
/// `grid`: `-E_C ∂²_φ + E_L φ² - E_J cos φ`.
pub fn phase_grid_hamiltonian(params: &CircuitParams, grid: &PhaseGrid) -> Result<SymmetricMatrix> {
    params.validate()?;
    if params.e_l <= 0.0 {
        return Err(Error::domain("the phase-grid solver needs e_l > 0"));
    }
    let c = linalg::second_derivative_stencil(grid.order)?;
    let n = grid.n;
    let h2 = grid.step() * grid.step();
    let mut m = SymmetricMatrix::zeros(n);
    for i in 0..n {
        let phi = grid.phi(i);
        m.set(
            i,
            i,
            -params.e_c * c[0] / h2 + params.e_l * phi * phi - params.e_j * phi.cos(),
        );
        for (s, cs) in c.iter().enumerate().skip(1) {
            if i + s < n {
                m.set(i, i + s, -params.e_c * cs / h2);
            }
        }
    }
    Ok(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Lowest eigenmodes of the shunted problem.
#[derive(Clone, Debug)]
pub struct ModeSet {
    pub energies: Vec<f64>,
    /// Modes on the closed window `[-φ_max, φ_max]` (walls included),
    /// including the offset-charge gauge factor.
    pub modes_phase: Vec<PhaseField>,
    /// Gauge-free real amplitudes on the interior points, `Σ v² h = 1`.
    real_modes: Vec<Vec<f64>>,
    pub params: CircuitParams,
    pub grid: PhaseGrid,
    /// Edge amplitude ratio of each mode (see [`PhaseField::edge_ratio`]).
    pub edge_ratios: Vec<f64>,
}

/// Solves for the lowest `n_modes` modes. Fails if the ground mode reaches
/// the walls.
pub fn solve_modes(params: &CircuitParams, n_modes: usize, grid: &PhaseGrid) -> Result<ModeSet> {
    if n_modes == 0 || n_modes > grid.n / 4 {
        return Err(Error::domain(format!(
            "n_modes must lie in 1..={} for {} grid points",
            grid.n / 4,
            grid.n
        )));
    }
    let h = phase_grid_hamiltonian(params, grid)?;
    let eig = h.eigh_lowest(n_modes)?;
    let step = grid.step();
    let mut vectors: Vec<Vec<f64>> = eig
        .vectors
        .into_iter()
        .map(|v| v.into_iter().map(|x| x / step.sqrt()).collect())
        .collect();
    fix_degenerate_parity(&eig.values, &mut vectors);
    for v in &mut vectors {
        fix_sign(v);
    }

    let gauge: Vec<C64> = (0..grid.n + 2)
        .map(|i| C64::from_polar(1.0, params.n_x * (-grid.phi_max + i as f64 * step)))
        .collect();
    let modes_phase = vectors
        .iter()
        .map(|v| {
            let mut vals = Vec::with_capacity(grid.n + 2);
            vals.push(C64::new(0.0, 0.0));
            vals.extend(v.iter().map(|&x| C64::new(x, 0.0)));
            vals.push(C64::new(0.0, 0.0));
            for (z, g) in vals.iter_mut().zip(&gauge) {
                *z *= g;
            }
            PhaseField::new(grid.phi_max, vals)
        })
        .collect::<Result<Vec<_>>>()?;
    let edge_ratios: Vec<f64> = modes_phase.iter().map(|m| m.edge_ratio()).collect();
    if edge_ratios[0] > EDGE_LIMIT {
        return Err(Error::NotConfined {
            mode: 0,
            edge_ratio: edge_ratios[0],
            limit: EDGE_LIMIT,
        });
    }
    Ok(ModeSet {
        energies: eig.values,
        modes_phase,
        real_modes: vectors,
        params: *params,
        grid: *grid,
        edge_ratios,
    })
}

/// Rotates near-degenerate pairs into parity eigenstates.
fn fix_degenerate_parity(energies: &[f64], vectors: &mut [Vec<f64>]) {
    let mut j = 0;
    while j + 1 < vectors.len() {
        let scale = energies[j].abs().max(1.0);
        if (energies[j + 1] - energies[j]).abs() > DEGENERACY_TOL * scale {
            j += 1;
            continue;
        }
        // 2×2 parity matrix in span{u, v}; a Jacobi rotation diagonalises it
        let reflect = |a: &[f64], b: &[f64]| -> f64 {
            a.iter().zip(b.iter().rev()).map(|(x, y)| x * y).sum()
        };
        let (u, v) = (&vectors[j], &vectors[j + 1]);
        let (puu, pvv, puv) = (reflect(u, u), reflect(v, v), reflect(u, v));
        let theta = 0.5 * (2.0 * puv).atan2(puu - pvv);
        let (c, s) = (theta.cos(), theta.sin());
        let a: Vec<f64> = u.iter().zip(v).map(|(x, y)| c * x + s * y).collect();
        let b: Vec<f64> = u.iter().zip(v).map(|(x, y)| -s * x + c * y).collect();
        vectors[j] = a;
        vectors[j + 1] = b;
        j += 2;
    }
}

/// Makes the first sample of largest magnitude positive.
fn fix_sign(v: &mut [f64]) {
    let peak = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
    if let Some(&x) = v.iter().find(|x| x.abs() >= peak * (1.0 - 1e-9)) {
        if x < 0.0 {
            v.iter_mut().for_each(|y| *y = -*y);
        }
    }
}

impl ModeSet {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    /// Parity of mode `j` under `φ → -φ` and the largest deviation from it
    /// relative to the peak amplitude.
    pub fn parity(&self, j: usize) -> (Parity, f64) {
        let v = &self.real_modes[j];
        let peak = v.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let defect = |sign: f64| {
            v.iter()
                .zip(v.iter().rev())
                .map(|(a, b)| (a - sign * b).abs())
                .fold(0.0, f64::max)
                / peak
        };
        let (even, odd) = (defect(1.0), defect(-1.0));
        if even <= odd {
            (Parity::Even, even)
        } else {
            (Parity::Odd, odd)
        }
    }

    /// `⟨ψ_i|ψ_j⟩` by the trapezoidal rule on the phase grid.
    pub fn overlap(&self, i: usize, j: usize) -> Result<C64> {
        self.modes_phase[i].inner(&self.modes_phase[j])
    }

    /// Zak representations of all modes on `grid` (in parallel).
    pub fn zak_modes(&self, grid: ZakGrid) -> Result<Vec<ZakField>> {
        self.modes_phase
            .par_iter()
            .map(|m| zak::zak_from_phase(m, grid))
            .collect()
    }

    /// `⟨E_C (n̂ - n_x)²⟩` of mode `j` with the solver's own stencil.
    pub fn kinetic_expectation(&self, j: usize) -> f64 {
        let c = linalg::second_derivative_stencil(self.grid.order).expect("validated order");
        let v = &self.real_modes[j];
        let n = v.len();
        let h = self.grid.step();
        let mut acc = 0.0;
        for i in 0..n {
            let mut lap = c[0] * v[i];
            for (s, cs) in c.iter().enumerate().skip(1) {
                let left = if i >= s { v[i - s] } else { 0.0 };
                let right = if i + s < n { v[i + s] } else { 0.0 };
                lap += cs * (left + right);
            }
            acc += v[i] * lap;
        }
        -self.params.e_c * acc / h
    }

    /// `⟨E_L φ̂²⟩` of mode `j`.
    pub fn inductive_expectation(&self, j: usize) -> f64 {
        let h = self.grid.step();
        self.real_modes[j]
            .iter()
            .enumerate()
            .map(|(i, x)| self.params.e_l * self.grid.phi(i).powi(2) * x * x)
            .sum::<f64>()
            * h
    }
}

/// Minimum number of modes for a spacing profile.
pub const MIN_SPACING_MODES: usize = 40;

/// Level spacings `E_{j+1} - E_j`.
pub fn harmonic_spacing_profile(modes: &ModeSet) -> Result<Vec<f64>> {
    if modes.len() < MIN_SPACING_MODES {
        return Err(Error::domain(format!(
            "spacing profile needs at least {MIN_SPACING_MODES} modes, got {}",
            modes.len()
        )));
    }
    Ok(modes.energies.windows(2).map(|w| w[1] - w[0]).collect())
}
