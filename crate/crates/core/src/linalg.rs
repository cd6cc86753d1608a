//! Small numerical kernels shared by the solvers: symmetric matrices,
//! eigendecomposition, finite-difference stencils and uniform-grid
//! interpolation.

use faer::{Mat, Side};

use crate::error::{Error, Result};

/// Real symmetric band matrix stored by diagonals.
///
/// `bands[d][i]` holds the entry `(i, i + d)`; `bands[0]` is the main
/// diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricBanded {
    dim: usize,
    bands: Vec<Vec<f64>>,
}

impl SymmetricBanded {
    pub fn zeros(dim: usize, bandwidth: usize) -> Self {
        let bands = (0..=bandwidth)
            .map(|d| vec![0.0; dim.saturating_sub(d)])
            .collect();
        Self { dim, bands }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bandwidth(&self) -> usize {
        self.bands.len() - 1
    }

    /// Entry `(i, j)`; zero outside the band.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d < self.bands.len() {
            self.bands[d][lo]
        } else {
            0.0
        }
    }

    /// Sets `(i, j)` and `(j, i)`. Panics outside the band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        self.bands[hi - lo][lo] = value;
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.bands[0]
    }

    pub fn band(&self, d: usize) -> &[f64] {
        &self.bands[d]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim);
        let mut y: Vec<f64> = self.bands[0].iter().zip(x).map(|(a, b)| a * b).collect();
        for (d, band) in self.bands.iter().enumerate().skip(1) {
            for (i, &a) in band.iter().enumerate() {
                y[i] += a * x[i + d];
                y[i + d] += a * x[i];
            }
        }
        y
    }

    pub fn to_dense(&self) -> SymmetricMatrix {
        let mut m = SymmetricMatrix::zeros(self.dim);
        for (d, band) in self.bands.iter().enumerate() {
            for (i, &a) in band.iter().enumerate() {
                m.set(i, i + d, a);
            }
        }
        m
    }

    pub fn is_symmetric_tridiagonal(&self) -> bool {
        self.bands
            .iter()
            .skip(2)
            .all(|b| b.iter().all(|&x| x == 0.0))
    }

    /// Lowest `count` eigenpairs.
    pub fn eigh_lowest(&self, count: usize) -> Result<Eigenpairs> {
        self.to_dense().eigh_lowest(count)
    }
}

/// Dense real symmetric matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.dim + j] = value;
        self.data[j * self.dim + i] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        if i == j {
            self.data[i * self.dim + i] += value;
        } else {
            self.data[i * self.dim + j] += value;
            self.data[j * self.dim + i] += value;
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in (i + 1)..n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn eigh(&self) -> Result<Eigenpairs> {
        self.eigh_lowest(self.dim)
    }

    /// Lowest `count` eigenpairs in ascending order. Eigenvectors have unit
    /// Euclidean norm.
    pub fn eigh_lowest(&self, count: usize) -> Result<Eigenpairs> {
        let n = self.dim;
        if count > n {
            return Err(Error::usage(format!(
                "requested {count} eigenpairs of a {n}x{n} matrix"
            )));
        }
        let mat = Mat::<f64>::from_fn(n, n, |i, j| self.data[i * n + j]);
        let evd = mat
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| Error::Numeric {
                kappa_index: None,
                reason: format!("{e:?}"),
            })?;
        let s = evd.S().column_vector();
        let u = evd.U();

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| s[a].total_cmp(&s[b]));
        let mut values = Vec::with_capacity(count);
        let mut vectors = Vec::with_capacity(count);
        for &c in order.iter().take(count) {
            let v = s[c];
            if !v.is_finite() {
                return Err(Error::Numeric {
                    kappa_index: None,
                    reason: "non-finite eigenvalue".into(),
                });
            }
            values.push(v);
            vectors.push((0..n).map(|r| u[(r, c)]).collect());
        }
        Ok(Eigenpairs { values, vectors })
    }
}

/// Ascending eigenvalues with their (real, unit-norm) eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Coefficients `[c_0, c_1, .., c_p]` of the symmetric central stencil for the
/// second derivative with accuracy order `2p`:
/// `f''(x) ≈ (c_0 f(x) + Σ_j c_j (f(x + jh) + f(x - jh))) / h²`.
pub fn second_derivative_stencil(order: usize) -> Result<Vec<f64>> {
    if order < 2 || !order.is_multiple_of(2) || order > 16 {
        return Err(Error::domain(format!(
            "finite-difference order must be even and in 2..=16, got {order}"
        )));
    }
    let p = order / 2;
    let fact = |n: usize| (1..=n).fold(1.0_f64, |acc, k| acc * k as f64);
    let mut coeffs = vec![0.0; p + 1];
    for j in 1..=p {
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        coeffs[j] = 2.0 * sign * fact(p).powi(2) / ((j * j) as f64 * fact(p - j) * fact(p + j));
    }
    coeffs[0] = -2.0 * coeffs[1..].iter().sum::<f64>();
    Ok(coeffs)
}

/// Coefficients `[d_1, .., d_p]` of the antisymmetric central stencil for the
/// first derivative with accuracy order `2p`:
/// `f'(x) ≈ Σ_j d_j (f(x + jh) - f(x - jh)) / h`.
pub fn first_derivative_stencil(order: usize) -> Result<Vec<f64>> {
    if order < 2 || !order.is_multiple_of(2) || order > 16 {
        return Err(Error::domain(format!(
            "finite-difference order must be even and in 2..=16, got {order}"
        )));
    }
    let p = order / 2;
    let fact = |n: usize| (1..=n).fold(1.0_f64, |acc, k| acc * k as f64);
    Ok((1..=p)
        .map(|j| {
            let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
            sign * fact(p).powi(2) / (j as f64 * fact(p - j) * fact(p + j))
        })
        .collect())
}

/// Uniform sample grid `x_i = start + i * step` used for Lagrange
/// interpolation of sampled functions. Samples outside the stored range are
/// treated as zero.
#[derive(Clone, Copy, Debug)]
pub struct UniformGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

/// Number of nodes used by [`interpolate`].
pub const INTERPOLATION_POINTS: usize = 8;

/// Local Lagrange interpolation through the `INTERPOLATION_POINTS` nodes
/// nearest to `x` (zero outside the sampled range).
pub fn interpolate<T>(grid: UniformGrid, samples: &[T], x: f64) -> T
where
    T: Copy + Default + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    debug_assert_eq!(samples.len(), grid.len);
    let s = (x - grid.start) / grid.step;
    let last = grid.len as f64 - 1.0;
    if s < -1.0 || s > last + 1.0 {
        return T::default();
    }
    let base = s.floor();
    let frac = s - base;
    let base = base as i64;
    if frac.abs() < 1e-13 {
        return sample_or_zero(samples, base);
    }
    if (1.0 - frac).abs() < 1e-13 {
        return sample_or_zero(samples, base + 1);
    }
    let half = (INTERPOLATION_POINTS / 2) as i64;
    let nodes = (base - half + 1)..=(base + half);
    let mut acc = T::default();
    for m in nodes.clone() {
        let mut w = 1.0;
        let dm = (m - base) as f64;
        for l in nodes.clone() {
            if l != m {
                let dl = (l - base) as f64;
                w *= (frac - dl) / (dm - dl);
            }
        }
        acc = acc + sample_or_zero(samples, m) * w;
    }
    acc
}

fn sample_or_zero<T: Copy + Default>(samples: &[T], idx: i64) -> T {
    if idx < 0 || idx as usize >= samples.len() {
        T::default()
    } else {
        samples[idx as usize]
    }
}

/// Trapezoidal weight-free sum for periodic integrands: `step * Σ f_i`.
pub fn periodic_sum<I: IntoIterator<Item = f64>>(values: I, step: f64) -> f64 {
    step * values.into_iter().sum::<f64>()
}

/// Trapezoidal rule on a closed uniform grid.
pub fn trapezoid(values: &[f64], step: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => step * (values[1..n - 1].iter().sum::<f64>() + 0.5 * (values[0] + values[n - 1])),
    }
}
