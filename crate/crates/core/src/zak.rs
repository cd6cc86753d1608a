//! The modular (Zak) representation `ψ(k, φ)` with `k ∈ (-½, ½]` and
//! `φ ∈ (-π, π]`, the non-compact phase representation `ψ(φ)`, and the maps
//! between them.
//!
//! Grids sample the closed endpoints `k = ½` and `φ = π` only; the open
//! endpoints are reconstructed from the boundary identities
//!
//! ```text
//! ψ(-½, φ) = ψ(½, φ)
//! ψ(k, -π) = e^{2πi(k - σ)} ψ(k, π)
//! ```
//!
//! where `σ` is the field's [`ZakField::twist`] (0 for every physical state).
//! With that convention the trapezoidal rule reduces to a plain sum with
//! uniform weights.

use std::f64::consts::PI;

use ndarray::{Array2, Zip};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, UniformGrid};

/// Smallest sample count accepted along either Zak axis.
pub const MIN_ZAK_SAMPLES: usize = 16;

/// Default number of `k` samples.
pub const DEFAULT_N_K: usize = 201;
/// Default number of `φ` samples.
pub const DEFAULT_N_PHI: usize = 257;

/// The two high-symmetry quasicharges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BlochPoint {
    /// Zone centre, `κ = 0`.
    Center,
    /// Zone edge, `κ = ½`.
    Edge,
}

impl BlochPoint {
    pub fn kappa(self) -> f64 {
        match self {
            BlochPoint::Center => 0.0,
            BlochPoint::Edge => 0.5,
        }
    }

    pub fn from_kappa(kappa: f64) -> Option<Self> {
        if kappa == 0.0 {
            Some(BlochPoint::Center)
        } else if (kappa.abs() - 0.5).abs() < 1e-15 {
            Some(BlochPoint::Edge)
        } else {
            None
        }
    }
}

/// Wraps `x` into `(-½, ½]`.
pub fn wrap_half(x: f64) -> f64 {
    let y = x - x.round();
    if y <= -0.5 {
        y + 1.0
    } else {
        y
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ZakGrid {
    n_k: usize,
    n_phi: usize,
}

impl Default for ZakGrid {
    fn default() -> Self {
        Self {
            n_k: DEFAULT_N_K,
            n_phi: DEFAULT_N_PHI,
        }
    }
}

impl ZakGrid {
    pub fn new(n_k: usize, n_phi: usize) -> Result<Self> {
        if n_k < MIN_ZAK_SAMPLES || n_phi < MIN_ZAK_SAMPLES {
            return Err(Error::domain(format!(
                "Zak grid needs at least {MIN_ZAK_SAMPLES} samples per axis, got {n_k}x{n_phi}"
            )));
        }
        Ok(Self { n_k, n_phi })
    }

    pub fn n_k(&self) -> usize {
        self.n_k
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn dk(&self) -> f64 {
        1.0 / self.n_k as f64
    }

    pub fn dphi(&self) -> f64 {
        2.0 * PI / self.n_phi as f64
    }

    /// `k_i = -½ + (i + 1)/n_k`; the last sample is exactly `½`.
    pub fn k(&self, i: usize) -> f64 {
        if i + 1 == self.n_k {
            0.5
        } else {
            -0.5 + (i + 1) as f64 / self.n_k as f64
        }
    }

    /// `φ_j = -π + 2π(j + 1)/n_φ`; the last sample is exactly `π`.
    pub fn phi(&self, j: usize) -> f64 {
        if j + 1 == self.n_phi {
            PI
        } else {
            -PI + 2.0 * PI * (j + 1) as f64 / self.n_phi as f64
        }
    }

    pub fn k_values(&self) -> Vec<f64> {
        (0..self.n_k).map(|i| self.k(i)).collect()
    }

    pub fn phi_values(&self) -> Vec<f64> {
        (0..self.n_phi).map(|j| self.phi(j)).collect()
    }

    fn area_element(&self) -> f64 {
        self.dk() * self.dphi()
    }
}

/// A function of `(k, φ)` that can be evaluated anywhere, including the open
/// endpoints of the Zak cell.
pub trait ZakFunction: Sync {
    fn value(&self, k: f64, phi: f64) -> C64;

    /// Offset `σ` in `ψ(k, -π) = e^{2πi(k - σ)} ψ(k, π)`.
    fn twist(&self) -> f64 {
        0.0
    }
}

impl<F: ZakFunction + ?Sized> ZakFunction for &F {
    fn value(&self, k: f64, phi: f64) -> C64 {
        (**self).value(k, phi)
    }

    fn twist(&self) -> f64 {
        (**self).twist()
    }
}

/// Sampled wavefunction on a [`ZakGrid`], indexed `(k, φ)`.
#[derive(Clone, Debug)]
pub struct ZakField {
    grid: ZakGrid,
    values: Array2<C64>,
    twist: f64,
}

impl ZakField {
    pub fn from_values(grid: ZakGrid, values: Array2<C64>, twist: f64) -> Result<Self> {
        if values.dim() != (grid.n_k, grid.n_phi) {
            return Err(Error::usage(format!(
                "value array {:?} does not match grid {}x{}",
                values.dim(),
                grid.n_k,
                grid.n_phi
            )));
        }
        Ok(Self {
            grid,
            values,
            twist,
        })
    }

    /// Samples `f` at every grid point.
    pub fn sample<F: ZakFunction>(grid: ZakGrid, f: &F) -> Self {
        let rows: Vec<Vec<C64>> = (0..grid.n_k)
            .into_par_iter()
            .map(|i| {
                let k = grid.k(i);
                (0..grid.n_phi).map(|j| f.value(k, grid.phi(j))).collect()
            })
            .collect();
        let values = Array2::from_shape_fn((grid.n_k, grid.n_phi), |(i, j)| rows[i][j]);
        Self {
            grid,
            values,
            twist: f.twist(),
        }
    }

    pub fn grid(&self) -> ZakGrid {
        self.grid
    }

    pub fn values(&self) -> &Array2<C64> {
        &self.values
    }

    pub fn twist(&self) -> f64 {
        self.twist
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.grid.area_element()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::domain("cannot normalise a zero field"));
        }
        self.values.mapv_inplace(|z| z / n);
        Ok(self)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.mapv(|z| z * factor),
            twist: self.twist,
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, factor: C64, other: &ZakField) -> Result<()> {
        self.check_compatible(other)?;
        Zip::from(&mut self.values)
            .and(&other.values)
            .for_each(|a, &b| *a += factor * b);
        Ok(())
    }

    /// `∫ |ψ(k, φ)|² dφ` for each `k` sample.
    pub fn k_marginal(&self) -> Vec<f64> {
        let dphi = self.grid.dphi();
        self.values
            .rows()
            .into_iter()
            .map(|row| row.iter().map(|z| z.norm_sqr()).sum::<f64>() * dphi)
            .collect()
    }

    /// `∫ |ψ(k, φ)|² dk` for each `φ` sample.
    pub fn phi_marginal(&self) -> Vec<f64> {
        let dk = self.grid.dk();
        self.values
            .columns()
            .into_iter()
            .map(|col| col.iter().map(|z| z.norm_sqr()).sum::<f64>() * dk)
            .collect()
    }

    /// `k` sample at which the `k` marginal is largest.
    pub fn k_marginal_peak(&self) -> f64 {
        let m = self.k_marginal();
        let (i, _) =
            m.iter().enumerate().fold(
                (0, f64::MIN),
                |best, (i, &v)| if v > best.1 { (i, v) } else { best },
            );
        self.grid.k(i)
    }

    /// Local maxima of the `k` marginal (periodic in `k`) whose height is at
    /// least `rel_height` of the global maximum.
    pub fn k_marginal_peaks(&self, rel_height: f64) -> Vec<f64> {
        let m = self.k_marginal();
        let n = m.len();
        let top = m.iter().cloned().fold(0.0, f64::max);
        (0..n)
            .filter(|&i| {
                let prev = m[(i + n - 1) % n];
                let next = m[(i + 1) % n];
                m[i] >= prev && m[i] > next && m[i] >= rel_height * top
            })
            .map(|i| self.grid.k(i))
            .collect()
    }

    /// `-i ∂_φ ψ`, the charge operator, via a central stencil of the given
    /// order that wraps across the seam with the twisted boundary phase.
    pub fn apply_charge(&self, order: usize) -> Result<ZakField> {
        let d = linalg::first_derivative_stencil(order)?;
        let n_phi = self.grid.n_phi as i64;
        let h = self.grid.dphi();
        let mut out = Array2::zeros(self.values.dim());
        for i in 0..self.grid.n_k {
            let k = self.grid.k(i);
            // ψ(k, φ + 2π) = e^{-2πi(k - σ)} ψ(k, φ)
            let forward = C64::from_polar(1.0, -2.0 * PI * (k - self.twist));
            let at = |j: i64| -> C64 {
                let wraps = j.div_euclid(n_phi);
                let idx = j.rem_euclid(n_phi) as usize;
                self.values[[i, idx]] * forward.powi(wraps as i32)
            };
            for j in 0..n_phi {
                let mut acc = C64::new(0.0, 0.0);
                for (m, dm) in d.iter().enumerate() {
                    let s = (m + 1) as i64;
                    acc += (at(j + s) - at(j - s)) * *dm;
                }
                out[[i, j as usize]] = -C64::i() * acc / h;
            }
        }
        Ok(ZakField {
            grid: self.grid,
            values: out,
            twist: self.twist,
        })
    }

    /// `cos(φ̂) ψ`, local in the Zak basis.
    pub fn apply_cos_phase(&self) -> ZakField {
        let phis = self.grid.phi_values();
        let mut out = self.clone();
        for mut row in out.values.rows_mut() {
            for (z, phi) in row.iter_mut().zip(&phis) {
                *z *= phi.cos();
            }
        }
        out
    }

    /// `cos(2π n̂) ψ`, local in the Zak basis.
    pub fn apply_cos_2pi_charge(&self) -> ZakField {
        let mut out = self.clone();
        for (i, mut row) in out.values.rows_mut().into_iter().enumerate() {
            let c = (2.0 * PI * self.grid.k(i)).cos();
            row.mapv_inplace(|z| z * c);
        }
        out
    }

    /// `cos(φ̂/2) ψ`: `(cos(φ̂/2)ψ)(k, φ) = cos(φ/2) ψ(k + ½, φ)`, with `k + ½`
    /// wrapped into `(-½, ½]`. Couples quasicharges that differ by ½ and
    /// needs an even `n_k` so that the shift maps the grid onto itself.
    pub fn apply_cos_half_phase(&self) -> Result<ZakField> {
        let n_k = self.grid.n_k;
        if !n_k.is_multiple_of(2) {
            return Err(Error::usage(format!(
                "the half-period charge shift needs an even n_k, got {n_k}"
            )));
        }
        let half = n_k / 2;
        let phis = self.grid.phi_values();
        let values = Array2::from_shape_fn(self.values.dim(), |(i, j)| {
            self.values[[(i + half) % n_k, j]] * (phis[j] / 2.0).cos()
        });
        Ok(ZakField {
            grid: self.grid,
            values,
            twist: self.twist,
        })
    }

    fn check_compatible(&self, other: &ZakField) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::usage(format!(
                "grid mismatch: {}x{} vs {}x{}",
                self.grid.n_k, self.grid.n_phi, other.grid.n_k, other.grid.n_phi
            )));
        }
        Ok(())
    }
}

/// `⟨a|b⟩ = ∫∫ conj(a) b dk dφ` by the 2D trapezoidal rule.
pub fn inner_product(a: &ZakField, b: &ZakField) -> Result<C64> {
    a.check_compatible(b)?;
    if (a.twist - b.twist).abs() > 1e-15 {
        return Err(Error::usage(format!(
            "fields obey different boundary twists ({} vs {})",
            a.twist, b.twist
        )));
    }
    let sum = a
        .values
        .iter()
        .zip(b.values.iter())
        .fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y);
    Ok(sum * a.grid.area_element())
}

/// Largest violations of the two boundary identities, relative to the largest
/// sampled magnitude.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryDefect {
    /// `max_φ |ψ(-½, φ) - ψ(½, φ)|`.
    pub k_seam: f64,
    /// `max_k |ψ(k, -π) - e^{2πi(k-σ)} ψ(k, π)|`.
    pub phi_seam: f64,
}

impl BoundaryDefect {
    pub fn max(&self) -> f64 {
        self.k_seam.max(self.phi_seam)
    }
}

/// Evaluates `f` at the open endpoints of `grid` and compares with the
/// values the boundary identities predict from the closed endpoints.
pub fn boundary_defect<F: ZakFunction>(f: &F, grid: ZakGrid) -> BoundaryDefect {
    let sigma = f.twist();
    let mut scale = 0.0_f64;
    let mut k_seam = 0.0_f64;
    for j in 0..grid.n_phi {
        let phi = grid.phi(j);
        let closed = f.value(0.5, phi);
        let open = f.value(-0.5, phi);
        scale = scale.max(closed.norm());
        k_seam = k_seam.max((open - closed).norm());
    }
    let mut phi_seam = 0.0_f64;
    for i in 0..grid.n_k {
        let k = grid.k(i);
        let closed = f.value(k, PI);
        let open = f.value(k, -PI);
        let predicted = closed * C64::from_polar(1.0, 2.0 * PI * (k - sigma));
        scale = scale.max(closed.norm());
        phi_seam = phi_seam.max((open - predicted).norm());
    }
    // interior samples set the scale when the field vanishes on the seams
    for i in (0..grid.n_k).step_by(4) {
        for j in (0..grid.n_phi).step_by(4) {
            scale = scale.max(f.value(grid.k(i), grid.phi(j)).norm());
        }
    }
    let scale = if scale > 0.0 { scale } else { 1.0 };
    BoundaryDefect {
        k_seam: k_seam / scale,
        phi_seam: phi_seam / scale,
    }
}

/// The Δ-broadened quasicharge wavepacket
/// `𝒩 e^{-ik'φ} (e^{-(k'/Δ)²} - e^{-(½/Δ)²})`, `k' = wrap(k - κ₀)`.
#[derive(Clone, Copy, Debug)]
pub struct BroadenedDelta {
    delta: f64,
    center: BlochPoint,
    normalization: f64,
}

impl BroadenedDelta {
    /// Builds the envelope with `𝒩` fixed by the `k` quadrature of `grid`,
    /// so each `φ` column has unit norm on that grid.
    pub fn new(delta: f64, center: BlochPoint, grid: ZakGrid) -> Result<Self> {
        if !(delta > 0.0 && delta < 0.5) {
            return Err(Error::domain(format!(
                "delta must lie in (0, 1/2), got {delta}"
            )));
        }
        let raw = Self {
            delta,
            center,
            normalization: 1.0,
        };
        let column: f64 = (0..grid.n_k)
            .map(|i| raw.profile(grid.k(i)).powi(2))
            .sum::<f64>()
            * grid.dk();
        Ok(Self {
            normalization: 1.0 / column.sqrt(),
            ..raw
        })
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn center(&self) -> BlochPoint {
        self.center
    }

    /// Real `k` profile (without `𝒩` or the phase factor).
    pub fn profile(&self, k: f64) -> f64 {
        let kp = self.shifted(k);
        (-(kp / self.delta).powi(2)).exp() - (-(0.5 / self.delta).powi(2)).exp()
    }

    fn shifted(&self, k: f64) -> f64 {
        match self.center {
            BlochPoint::Center if (-0.5..=0.5).contains(&k) => k,
            _ => wrap_half(k - self.center.kappa()),
        }
    }
}

impl ZakFunction for BroadenedDelta {
    fn value(&self, k: f64, phi: f64) -> C64 {
        let kp = self.shifted(k);
        C64::from_polar(self.normalization * self.profile(k), -kp * phi)
    }

    fn twist(&self) -> f64 {
        self.center.kappa()
    }
}

/// Samples the Δ-broadened quasicharge envelope centred at `center`.
///
/// For the zone edge the bare envelope carries twist ½; multiplying by a
/// zone-edge Bloch function restores the physical boundary condition.
pub fn delta_broadened(grid: ZakGrid, delta: f64, center: BlochPoint) -> Result<ZakField> {
    let d = BroadenedDelta::new(delta, center, grid)?;
    Ok(ZakField::sample(grid, &d))
}

/// Wavefunction in the non-compact phase basis on a symmetric window
/// `[-φ_max, φ_max]`, sampled at `φ_i = -φ_max + i h` including both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct PhaseField {
    phi_max: f64,
    values: Vec<C64>,
}

/// Largest fraction of the norm allowed in the outermost half-periods of a
/// phase window before the Zak transform refuses it.
pub const MAX_LOST_NORM: f64 = 1e-8;

impl PhaseField {
    /// `phi_max` must be a positive integer multiple of π and `values` must
    /// hold at least 16 samples spanning the closed window.
    pub fn new(phi_max: f64, values: Vec<C64>) -> Result<Self> {
        let periods = phi_max / PI;
        if !(phi_max > 0.0) || (periods - periods.round()).abs() > 1e-9 {
            return Err(Error::domain(format!(
                "phase window half-width must be a positive multiple of π, got {phi_max}"
            )));
        }
        if values.len() < MIN_ZAK_SAMPLES {
            return Err(Error::domain("phase field needs at least 16 samples"));
        }
        Ok(Self { phi_max, values })
    }

    pub fn from_fn(phi_max: f64, n: usize, f: impl Fn(f64) -> C64) -> Result<Self> {
        let h = 2.0 * phi_max / (n as f64 - 1.0);
        let values = (0..n).map(|i| f(-phi_max + i as f64 * h)).collect();
        Self::new(phi_max, values)
    }

    pub fn phi_min(&self) -> f64 {
        -self.phi_max
    }

    pub fn phi_max(&self) -> f64 {
        self.phi_max
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> f64 {
        2.0 * self.phi_max / (self.values.len() as f64 - 1.0)
    }

    pub fn phi(&self, i: usize) -> f64 {
        -self.phi_max + i as f64 * self.step()
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    fn sample_grid(&self) -> UniformGrid {
        UniformGrid {
            start: -self.phi_max,
            step: self.step(),
            len: self.values.len(),
        }
    }

    /// Interpolated value; zero outside the window.
    pub fn value_at(&self, phi: f64) -> C64 {
        if phi < -self.phi_max || phi > self.phi_max {
            return C64::new(0.0, 0.0);
        }
        linalg::interpolate(self.sample_grid(), &self.values, phi)
    }

    pub fn norm_sqr(&self) -> f64 {
        let dens: Vec<f64> = self.values.iter().map(|z| z.norm_sqr()).collect();
        linalg::trapezoid(&dens, self.step())
    }

    pub fn inner(&self, other: &PhaseField) -> Result<C64> {
        if self.values.len() != other.values.len() || self.phi_max != other.phi_max {
            return Err(Error::usage("phase fields live on different grids"));
        }
        let n = self.values.len();
        let mut acc = C64::new(0.0, 0.0);
        for (i, (a, b)) in self.values.iter().zip(&other.values).enumerate() {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            acc += a.conj() * b * w;
        }
        Ok(acc * self.step())
    }

    /// Largest magnitude within one sample spacing of either window edge,
    /// relative to the peak magnitude. Hard-wall fields vanish exactly at the
    /// wall, so the first interior samples are the meaningful probe.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if peak == 0.0 {
            return 0.0;
        }
        let n = self.values.len();
        let edge = [0, 1, n - 2, n - 1]
            .iter()
            .map(|&i| self.values[i].norm())
            .fold(0.0, f64::max);
        edge / peak
    }

    /// Fraction of the norm inside the outermost π-wide strips.
    pub fn lost_norm(&self) -> f64 {
        let total = self.norm_sqr();
        if total == 0.0 {
            return 0.0;
        }
        let h = self.step();
        let edge: f64 = self
            .values
            .iter()
            .enumerate()
            .filter(|(i, _)| self.phi(*i).abs() > self.phi_max - PI)
            .map(|(_, z)| z.norm_sqr())
            .sum::<f64>()
            * h;
        edge / total
    }

    /// Copy index range `j` such that `φ - 2πj` stays inside the window.
    fn copy_range(&self, phi: f64) -> std::ops::RangeInclusive<i64> {
        let lo = ((phi - self.phi_max) / (2.0 * PI)).ceil() as i64;
        let hi = ((phi + self.phi_max) / (2.0 * PI)).floor() as i64;
        lo..=hi
    }
}

/// A phase-basis state viewed through the Zak transform
/// `ψ(k, φ) = Σ_j e^{-2πijk} ψ(φ - 2πj)`.
#[derive(Clone, Copy, Debug)]
pub struct ZakTransform<'a>(pub &'a PhaseField);

impl ZakFunction for ZakTransform<'_> {
    fn value(&self, k: f64, phi: f64) -> C64 {
        self.0
            .copy_range(phi)
            .map(|j| {
                C64::from_polar(1.0, -2.0 * PI * j as f64 * k)
                    * self.0.value_at(phi - 2.0 * PI * j as f64)
            })
            .sum()
    }
}

/// Zak transform of a confined phase-basis state onto `grid`.
pub fn zak_from_phase(field: &PhaseField, grid: ZakGrid) -> Result<ZakField> {
    let lost = field.lost_norm();
    if lost > MAX_LOST_NORM {
        return Err(Error::WindowTooSmall {
            lost_norm: lost,
            limit: MAX_LOST_NORM,
        });
    }
    // interpolate each shifted copy once per φ column, then sum over k phases
    let columns: Vec<Vec<(i64, C64)>> = (0..grid.n_phi)
        .into_par_iter()
        .map(|j| {
            let phi = grid.phi(j);
            field
                .copy_range(phi)
                .map(|c| (c, field.value_at(phi - 2.0 * PI * c as f64)))
                .filter(|(_, v)| *v != C64::new(0.0, 0.0))
                .collect()
        })
        .collect();
    let values = Array2::from_shape_fn((grid.n_k, grid.n_phi), |(i, j)| {
        let k = grid.k(i);
        columns[j]
            .iter()
            .map(|&(c, v)| C64::from_polar(1.0, -2.0 * PI * c as f64 * k) * v)
            .sum()
    });
    ZakField::from_values(grid, values, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn bump(center: f64, width: f64) -> impl Fn(f64) -> C64 {
        move |phi: f64| C64::new((-((phi - center) / width).powi(2)).exp(), 0.0)
    }

    #[test]
    fn grid_layout() {
        let g = ZakGrid::new(16, 20).unwrap();
        assert_eq!(g.k(15), 0.5);
        assert_eq!(g.phi(19), PI);
        assert_relative_eq!(g.k(0), -0.5 + 1.0 / 16.0);
        assert!(g.k_values().iter().all(|&k| k > -0.5 && k <= 0.5));
        assert!(g
            .phi_values()
            .windows(2)
            .all(|w| (w[1] - w[0] - g.dphi()).abs() < 1e-12));
        assert!(ZakGrid::new(15, 100).is_err());
        assert!(ZakGrid::new(100, 8).is_err());
    }

    #[test]
    fn wrap_half_range() {
        assert_eq!(wrap_half(0.5), 0.5);
        assert_eq!(wrap_half(-0.5), 0.5);
        assert_relative_eq!(wrap_half(0.75), -0.25);
        assert_relative_eq!(wrap_half(-1.2), -0.2, epsilon = 1e-15);
    }

    #[test]
    fn broadened_delta_vanishes_at_zone_boundary() {
        let g = ZakGrid::default();
        let d = BroadenedDelta::new(0.2, BlochPoint::Center, g).unwrap();
        for phi in [-PI, -1.0, 0.0, 2.0, PI] {
            assert!(d.value(0.5, phi).norm() < 1e-15);
            assert!(d.value(-0.5, phi).norm() < 1e-15);
        }
    }

    #[test]
    fn broadened_delta_twisted_ratio() {
        let g = ZakGrid::default();
        let d = BroadenedDelta::new(0.2, BlochPoint::Center, g).unwrap();
        for i in 0..g.n_k() - 1 {
            let k = g.k(i);
            let ratio = d.value(k, -PI) / d.value(k, PI);
            let expected = C64::from_polar(1.0, 2.0 * PI * k);
            assert!((ratio - expected).norm() < 1e-12, "k = {k}");
        }
        let defect = boundary_defect(&d, g);
        assert!(defect.max() < 1e-12);
    }

    #[test]
    fn broadened_delta_columns_are_unit_and_phase_independent() {
        let g = ZakGrid::default();
        let f = delta_broadened(g, 0.2, BlochPoint::Center).unwrap();
        let dk = g.dk();
        let first: Vec<f64> = f.values().column(0).iter().map(|z| z.norm()).collect();
        for col in f.values().columns() {
            let s: f64 = col.iter().map(|z| z.norm_sqr()).sum::<f64>() * dk;
            assert_relative_eq!(s, 1.0, epsilon = 1e-12);
            for (z, m) in col.iter().zip(&first) {
                assert!((z.norm() - m).abs() < 1e-12);
            }
        }
        assert!(delta_broadened(g, 0.5, BlochPoint::Center).is_err());
        assert!(delta_broadened(g, 0.0, BlochPoint::Edge).is_err());
    }

    #[test]
    fn edge_envelope_carries_half_twist_and_peaks_at_half() {
        let g = ZakGrid::default();
        let d = BroadenedDelta::new(0.2, BlochPoint::Edge, g).unwrap();
        assert_eq!(d.twist(), 0.5);
        assert!(boundary_defect(&d, g).max() < 1e-12);
        let f = ZakField::sample(g, &d);
        assert_eq!(f.k_marginal_peak(), 0.5);
        // the envelope vanishes at k = 0, the far point from the centre
        assert!(d.value(0.0, 1.0).norm() < 1e-15);
    }

    #[test]
    fn zak_of_window_confined_state_is_k_independent() {
        let g = ZakGrid::new(32, 64).unwrap();
        let field = PhaseField::from_fn(4.0 * PI, 4001, bump(0.3, 0.4)).unwrap();
        let z = zak_from_phase(&field, g).unwrap();
        for j in 0..g.n_phi() {
            let reference = z.values()[[0, j]];
            for i in 0..g.n_k() {
                assert!((z.values()[[i, j]] - reference).norm() < 1e-10);
            }
            assert!((reference - field.value_at(g.phi(j))).norm() < 1e-10);
        }
    }

    #[test]
    fn two_copy_comb_concentrates_at_center_or_edge() {
        let g = ZakGrid::new(64, 64).unwrap();
        let even = PhaseField::from_fn(4.0 * PI, 4001, |p| {
            bump(0.0, 0.4)(p) + bump(2.0 * PI, 0.4)(p)
        })
        .unwrap();
        let odd = PhaseField::from_fn(4.0 * PI, 4001, |p| {
            bump(0.0, 0.4)(p) - bump(2.0 * PI, 0.4)(p)
        })
        .unwrap();
        // direct j-sum: |ψ(k)|² ∝ |1 + s e^{-2πik}|² = 2 + 2 s cos(2πk)
        let ze = zak_from_phase(&even, g).unwrap();
        let zo = zak_from_phase(&odd, g).unwrap();
        let me = ze.k_marginal();
        let mo = zo.k_marginal();
        let mid = g.n_k() / 2 - 1;
        assert_relative_eq!(g.k(mid), 0.0, epsilon = 1e-15);
        assert_eq!(ze.k_marginal_peak(), 0.0);
        assert_eq!(zo.k_marginal_peak(), 0.5);
        let ratio = me[mid] / me[g.n_k() - 1];
        assert!(ratio > 1e10 || me[g.n_k() - 1] < 1e-20);
        for i in 0..g.n_k() {
            let k = g.k(i);
            assert_relative_eq!(
                me[i] / me[mid],
                (1.0 + (2.0 * PI * k).cos()) / 2.0,
                epsilon = 1e-9
            );
            assert_relative_eq!(
                mo[i] / mo[g.n_k() - 1],
                (1.0 - (2.0 * PI * k).cos()) / 2.0,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn parseval_for_offset_bump() {
        let g = ZakGrid::new(64, 128).unwrap();
        let field = PhaseField::from_fn(6.0 * PI, 6001, |p| {
            bump(1.3, 1.1)(p) * C64::from_polar(1.0, 0.7 * p) + bump(-4.0, 0.9)(p) * 0.5
        })
        .unwrap();
        let z = zak_from_phase(&field, g).unwrap();
        assert_relative_eq!(z.norm_sqr(), field.norm_sqr(), max_relative = 1e-6);
        assert!(boundary_defect(&ZakTransform(&field), g).max() < 1e-10);
    }

    #[test]
    fn two_pi_offset_states_are_orthogonal() {
        let g = ZakGrid::default();
        let a = PhaseField::from_fn(4.0 * PI, 4001, bump(0.2, 0.5)).unwrap();
        let b = PhaseField::from_fn(4.0 * PI, 4001, bump(0.2 + 2.0 * PI, 0.5)).unwrap();
        let za = zak_from_phase(&a, g).unwrap();
        let zb = zak_from_phase(&b, g).unwrap();
        let overlap = inner_product(&za, &zb).unwrap();
        assert!(overlap.norm() < 1e-6, "overlap {overlap}");
        assert_relative_eq!(
            inner_product(&za, &za).unwrap().re,
            a.norm_sqr(),
            max_relative = 1e-8
        );
    }

    #[test]
    fn window_too_small_is_reported() {
        let g = ZakGrid::new(32, 32).unwrap();
        let wide = PhaseField::from_fn(2.0 * PI, 2001, bump(0.0, 3.0)).unwrap();
        match zak_from_phase(&wide, g) {
            Err(Error::WindowTooSmall { lost_norm, .. }) => assert!(lost_norm > 1e-8),
            other => panic!("expected window error, got {other:?}"),
        }
        assert!(PhaseField::new(2.5, vec![C64::new(0.0, 0.0); 100]).is_err());
    }

    #[test]
    fn inner_product_rejects_mismatched_grids() {
        let a = delta_broadened(ZakGrid::new(32, 32).unwrap(), 0.2, BlochPoint::Center).unwrap();
        let b = delta_broadened(ZakGrid::new(32, 34).unwrap(), 0.2, BlochPoint::Center).unwrap();
        assert!(matches!(inner_product(&a, &b), Err(Error::Usage(_))));
        let c = delta_broadened(ZakGrid::new(32, 32).unwrap(), 0.2, BlochPoint::Edge).unwrap();
        assert!(inner_product(&a, &c).is_err());
    }

    #[test]
    fn separable_states_with_orthogonal_phase_profiles() {
        let g = ZakGrid::default();
        let d = BroadenedDelta::new(0.2, BlochPoint::Center, g).unwrap();
        // cos φ and sin φ are orthogonal on (-π, π]
        let make = |f: fn(f64) -> f64| {
            let v = Array2::from_shape_fn((g.n_k(), g.n_phi()), |(i, j)| {
                d.value(g.k(i), g.phi(j)) * f(g.phi(j))
            });
            ZakField::from_values(g, v, 0.0).unwrap()
        };
        let a = make(f64::cos);
        let b = make(f64::sin);
        assert!(inner_product(&a, &b).unwrap().norm() < 1e-6);
    }

    #[test]
    fn charge_operator_on_charge_eigenstates() {
        // columns e^{i(m - k)φ} are eigenfunctions of -i∂_φ with eigenvalue m - k
        let g = ZakGrid::new(32, 128).unwrap();
        let m = 1.0;
        let v = Array2::from_shape_fn((g.n_k(), g.n_phi()), |(i, j)| {
            C64::from_polar(1.0, (m - g.k(i)) * g.phi(j))
        });
        let f = ZakField::from_values(g, v, 0.0).unwrap();
        let nf = f.apply_charge(8).unwrap();
        for i in 0..g.n_k() {
            let q = m - g.k(i);
            for j in 0..g.n_phi() {
                let expected = f.values()[[i, j]] * q;
                assert!((nf.values()[[i, j]] - expected).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn cos_phase_is_local() {
        let g = ZakGrid::new(16, 32).unwrap();
        let f = delta_broadened(g, 0.2, BlochPoint::Center).unwrap();
        let c = f.apply_cos_phase();
        for i in 0..g.n_k() {
            for j in 0..g.n_phi() {
                let e = f.values()[[i, j]] * g.phi(j).cos();
                assert!((c.values()[[i, j]] - e).norm() < 1e-15);
            }
        }
        let c2 = f.apply_cos_2pi_charge();
        assert!((c2.values()[[g.n_k() - 1, 0]] + f.values()[[g.n_k() - 1, 0]]).norm() < 1e-15);
    }

    #[test]
    fn half_phase_cosine_moves_quasicharge_by_half() {
        let g = ZakGrid::new(200, 64).unwrap();
        let f = delta_broadened(g, 0.1, BlochPoint::Center).unwrap();
        assert_eq!(f.k_marginal_peak(), 0.0);
        let shifted = f.apply_cos_half_phase().unwrap();
        assert_eq!(shifted.k_marginal_peak(), 0.5);
        let odd = ZakGrid::new(201, 64).unwrap();
        let f = delta_broadened(odd, 0.1, BlochPoint::Center).unwrap();
        assert!(f.apply_cos_half_phase().is_err());
    }
}
