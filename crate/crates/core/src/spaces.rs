//! Periodic grids, Fourier representations and the weighted Sobolev norms.
//!
//! A real function on the circle is stored by its real coefficients
//! `u(theta) = c0/2 + sum_n c_n cos(n theta) + s_n sin(n theta)` with
//! `c_n = (1/pi) int u cos(n theta)`, one coefficient set per disorder
//! component. Norms are weighted by the law weights `lambda^k`.

use std::cell::RefCell;
use std::f64::consts::{PI, TAU};
use std::io::Write;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Normalized DFT: `u_hat[n] = (1/len) sum_j u_j exp(-i n theta_j)`.
pub fn fft_forward(values: &[f64]) -> Vec<Complex64> {
    let n = values.len();
    let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n).process(&mut buf));
    let inv = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= inv);
    buf
}

/// Inverse of [`fft_forward`], keeping the real part.
pub fn fft_inverse(coeffs: &[Complex64]) -> Vec<f64> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut buf));
    buf.iter().map(|c| c.re).collect()
}

/// Spectral derivative of periodic grid values keeping modes `|n| <= n_max`.
pub fn grid_derivative(values: &[f64], order: u32, n_max: usize) -> Vec<f64> {
    let n = values.len();
    let mut c = fft_forward(values);
    for (j, cj) in c.iter_mut().enumerate() {
        let m = if j <= n / 2 { j as i64 } else { j as i64 - n as i64 };
        if m.unsigned_abs() as usize > n_max || (n % 2 == 0 && j == n / 2) {
            *cj = Complex64::new(0.0, 0.0);
            continue;
        }
        *cj *= Complex64::new(0.0, m as f64).powu(order);
    }
    fft_inverse(&c)
}

/// Resolution of the angular grid and the Fourier truncation.
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    law: DisorderLaw,
    n_grid: usize,
    n_modes: usize,
}

impl GridSpec {
    pub fn new(law: &DisorderLaw, n_modes: usize, n_grid: usize) -> Result<Self> {
        if n_modes == 0 {
            return Err(Error::InvalidGrid("at least one Fourier mode is required".into()));
        }
        if !n_grid.is_power_of_two() || n_grid < 4 * n_modes {
            return Err(Error::InvalidGrid(format!(
                "need a power of two at least 4 * {} grid points, got {}",
                n_modes, n_grid
            )));
        }
        Ok(Self { law: law.clone(), n_grid, n_modes })
    }

    /// 64 modes on 512 points.
    pub fn standard(law: &DisorderLaw) -> Self {
        Self::new(law, 64, 512).expect("standard grid is valid")
    }

    /// 128 modes on 1024 points.
    pub fn fine(law: &DisorderLaw) -> Self {
        Self::new(law, 128, 1024).expect("fine grid is valid")
    }

    pub fn law(&self) -> &DisorderLaw {
        &self.law
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn n_components(&self) -> usize {
        self.law.n_components()
    }

    pub fn dtheta(&self) -> f64 {
        TAU / self.n_grid as f64
    }

    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_grid as f64
    }

    pub fn thetas(&self) -> Vec<f64> {
        (0..self.n_grid).map(|j| self.theta(j)).collect()
    }
}

/// Real Fourier coefficients of `n_comp` functions, modes `0..=n_modes`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    n_comp: usize,
    n_modes: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl Spectrum {
    pub fn zeros(n_comp: usize, n_modes: usize) -> Self {
        let len = n_comp * (n_modes + 1);
        Self { n_comp, n_modes, cos: vec![0.0; len], sin: vec![0.0; len] }
    }

    /// Coefficients of grid values, truncated to `n_modes`.
    pub fn from_grid(values: &[Vec<f64>], n_modes: usize) -> Self {
        let mut s = Self::zeros(values.len(), n_modes);
        for (k, v) in values.iter().enumerate() {
            let c = fft_forward(v);
            for n in 0..=n_modes.min((v.len() - 1) / 2) {
                s.set(k, n, 2.0 * c[n].re, -2.0 * c[n].im);
            }
        }
        s
    }

    /// From complex coefficients `f_hat[k][n]`, `n >= 0`, of real functions.
    pub fn from_complex(coeffs: &[Vec<Complex64>], n_modes: usize) -> Self {
        let mut s = Self::zeros(coeffs.len(), n_modes);
        for (k, c) in coeffs.iter().enumerate() {
            for n in 0..=n_modes.min(c.len() - 1) {
                s.set(k, n, 2.0 * c[n].re, -2.0 * c[n].im);
            }
        }
        s
    }

    fn idx(&self, k: usize, n: usize) -> usize {
        k * (self.n_modes + 1) + n
    }

    pub fn n_components(&self) -> usize {
        self.n_comp
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn c(&self, k: usize, n: usize) -> f64 {
        self.cos[self.idx(k, n)]
    }

    pub fn s(&self, k: usize, n: usize) -> f64 {
        self.sin[self.idx(k, n)]
    }

    pub fn set(&mut self, k: usize, n: usize, c: f64, s: f64) {
        let i = self.idx(k, n);
        self.cos[i] = c;
        self.sin[i] = if n == 0 { 0.0 } else { s };
    }

    /// Complex coefficient `u_hat_n` for `n >= 0`.
    pub fn complex(&self, k: usize, n: usize) -> Complex64 {
        if n > self.n_modes {
            return Complex64::new(0.0, 0.0);
        }
        if n == 0 {
            Complex64::new(0.5 * self.c(k, 0), 0.0)
        } else {
            Complex64::new(0.5 * self.c(k, n), -0.5 * self.s(k, n))
        }
    }

    pub fn complex_component(&self, k: usize) -> Vec<Complex64> {
        (0..=self.n_modes).map(|n| self.complex(k, n)).collect()
    }

    pub fn eval(&self, k: usize, theta: f64) -> f64 {
        let mut v = 0.5 * self.c(k, 0);
        let e = Complex64::from_polar(1.0, theta);
        let mut z = e;
        for n in 1..=self.n_modes {
            v += self.c(k, n) * z.re + self.s(k, n) * z.im;
            z *= e;
        }
        v
    }

    /// Grid values at `n_grid` equispaced points.
    pub fn to_grid(&self, n_grid: usize) -> Vec<Vec<f64>> {
        (0..self.n_comp)
            .map(|k| {
                let mut c = vec![Complex64::new(0.0, 0.0); n_grid];
                c[0] = self.complex(k, 0);
                for n in 1..=self.n_modes.min((n_grid - 1) / 2) {
                    let z = self.complex(k, n);
                    c[n] = z;
                    c[n_grid - n] = z.conj();
                }
                fft_inverse(&c)
            })
            .collect()
    }

    pub fn max_abs_mean(&self) -> f64 {
        (0..self.n_comp).map(|k| self.c(k, 0).abs()).fold(0.0, f64::max)
    }

    pub fn check_zero_mean(&self, tol: f64) -> Result<()> {
        for k in 0..self.n_comp {
            let c0 = self.c(k, 0);
            if c0.abs() > tol {
                return Err(Error::NotZeroMean { component: k, c0 });
            }
        }
        Ok(())
    }

    pub fn without_mean(&self) -> Self {
        let mut s = self.clone();
        for k in 0..self.n_comp {
            let i = s.idx(k, 0);
            s.cos[i] = 0.0;
        }
        s
    }

    /// Copy with `n_modes` changed, padding with zeros or truncating.
    pub fn resized(&self, n_modes: usize) -> Self {
        let mut s = Self::zeros(self.n_comp, n_modes);
        for k in 0..self.n_comp {
            for n in 0..=n_modes.min(self.n_modes) {
                s.set(k, n, self.c(k, n), self.s(k, n));
            }
        }
        s
    }

    /// Coefficients of `theta -> u(theta - psi)`.
    pub fn rotated(&self, psi: f64) -> Self {
        let mut out = self.clone();
        for n in 1..=self.n_modes {
            let (sn, cn) = (n as f64 * psi).sin_cos();
            for k in 0..self.n_comp {
                let (c, s) = (self.c(k, n), self.s(k, n));
                out.set(k, n, c * cn - s * sn, c * sn + s * cn);
            }
        }
        out
    }

    pub fn derivative(&self) -> Self {
        let mut out = Self::zeros(self.n_comp, self.n_modes);
        for k in 0..self.n_comp {
            for n in 1..=self.n_modes {
                let m = n as f64;
                out.set(k, n, m * self.s(k, n), -m * self.c(k, n));
            }
        }
        out
    }

    /// Zero-mean primitive (the constant mode is ignored).
    pub fn primitive(&self) -> Self {
        let mut out = Self::zeros(self.n_comp, self.n_modes);
        for k in 0..self.n_comp {
            for n in 1..=self.n_modes {
                let m = n as f64;
                out.set(k, n, -self.s(k, n) / m, self.c(k, n) / m);
            }
        }
        out
    }

    pub fn axpy(&mut self, a: f64, other: &Spectrum) {
        assert_eq!(self.n_comp, other.n_comp);
        assert_eq!(self.n_modes, other.n_modes);
        self.cos.iter_mut().zip(&other.cos).for_each(|(x, y)| *x += a * y);
        self.sin.iter_mut().zip(&other.sin).for_each(|(x, y)| *x += a * y);
    }

    /// Dimension of the zero-mean real coefficient vector.
    pub fn vector_len(n_comp: usize, n_modes: usize) -> usize {
        2 * n_comp * n_modes
    }

    /// Position of `(component, mode, part)` in the zero-mean vector, with
    /// `part` 0 for cosine and 1 for sine.
    pub fn vector_index(n_modes: usize, k: usize, n: usize, part: usize) -> usize {
        k * 2 * n_modes + 2 * (n - 1) + part
    }

    /// Zero-mean coefficients flattened as `(k, n, cos/sin)`.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(Self::vector_len(self.n_comp, self.n_modes));
        for k in 0..self.n_comp {
            for n in 1..=self.n_modes {
                v.push(self.c(k, n));
                v.push(self.s(k, n));
            }
        }
        v
    }

    pub fn from_vector(n_comp: usize, n_modes: usize, v: &[f64]) -> Self {
        let mut s = Self::zeros(n_comp, n_modes);
        for k in 0..n_comp {
            for n in 1..=n_modes {
                let i = Self::vector_index(n_modes, k, n, 0);
                s.set(k, n, v[i], v[i + 1]);
            }
        }
        s
    }

    pub fn write_csv<W: Write>(&self, law: &DisorderLaw, mut w: W) -> Result<()> {
        writeln!(w, "component,n,c,s")?;
        for k in 0..self.n_comp {
            for n in 0..=self.n_modes {
                writeln!(w, "{},{},{:.17e},{:.17e}", law.signed_index(k), n, self.c(k, n), self.s(k, n))?;
            }
        }
        Ok(())
    }
}

impl Add for &Spectrum {
    type Output = Spectrum;
    fn add(self, rhs: &Spectrum) -> Spectrum {
        let mut out = self.clone();
        out.axpy(1.0, rhs);
        out
    }
}

impl Sub for &Spectrum {
    type Output = Spectrum;
    fn sub(self, rhs: &Spectrum) -> Spectrum {
        let mut out = self.clone();
        out.axpy(-1.0, rhs);
        out
    }
}

impl Mul<f64> for &Spectrum {
    type Output = Spectrum;
    fn mul(self, a: f64) -> Spectrum {
        let mut out = self.clone();
        out.cos.iter_mut().for_each(|x| *x *= a);
        out.sin.iter_mut().for_each(|x| *x *= a);
        out
    }
}

/// `||u||_{1,d}^2 = sum_k lambda^k pi sum_n n^2 (c_n^2 + s_n^2)`.
pub fn h1_norm(weights: &[f64], u: &Spectrum) -> f64 {
    sobolev_sum(weights, u, |n| (n * n) as f64).sqrt()
}

/// Dual norm `||u||_{-1,d}`; defined for zero-mean functions only.
pub fn hminus1_norm(weights: &[f64], u: &Spectrum) -> Result<f64> {
    u.check_zero_mean(1e-9)?;
    Ok(hminus1_norm_unchecked(weights, u))
}

/// Dual norm ignoring any constant mode.
pub fn hminus1_norm_unchecked(weights: &[f64], u: &Spectrum) -> f64 {
    sobolev_sum(weights, u, |n| 1.0 / (n * n) as f64).sqrt()
}

/// `||u||_{alpha,d}` with multiplier `(1 + n^2)^alpha`, constant mode included.
pub fn h_alpha_norm(weights: &[f64], u: &Spectrum, alpha: f64) -> f64 {
    let mean: f64 = weights
        .iter()
        .enumerate()
        .map(|(k, l)| l * 0.5 * PI * u.c(k, 0).powi(2))
        .sum();
    (sobolev_sum(weights, u, |n| (1.0 + (n * n) as f64).powf(alpha)) + mean).sqrt()
}

fn sobolev_sum<F: Fn(usize) -> f64>(weights: &[f64], u: &Spectrum, mult: F) -> f64 {
    let mut total = 0.0;
    for (k, l) in weights.iter().enumerate().take(u.n_components()) {
        let mut acc = 0.0;
        for n in 1..=u.n_modes() {
            acc += mult(n) * (u.c(k, n).powi(2) + u.s(k, n).powi(2));
        }
        total += l * PI * acc;
    }
    total
}

/// `sum_k lambda^k int u^k v^k` by Parseval.
pub fn bracket(weights: &[f64], u: &Spectrum, v: &Spectrum) -> f64 {
    let m = u.n_modes().min(v.n_modes());
    let mut total = 0.0;
    for (k, l) in weights.iter().enumerate() {
        let mut acc = 0.5 * u.c(k, 0) * v.c(k, 0);
        for n in 1..=m {
            acc += u.c(k, n) * v.c(k, n) + u.s(k, n) * v.s(k, n);
        }
        total += l * PI * acc;
    }
    total
}

/// Fourier coefficients of `J * f` from those of `f`: only mode one survives,
/// `J * f = -K (sin(theta) pi c_1 - cos(theta) pi s_1)`.
pub fn convolve_j(k_coupling: f64, f: &Spectrum) -> Spectrum {
    let mut out = Spectrum::zeros(f.n_components(), f.n_modes());
    for k in 0..f.n_components() {
        out.set(k, 1, k_coupling * PI * f.s(k, 1), -k_coupling * PI * f.c(k, 1));
    }
    out
}

/// `(c, s)` of the mode-one function `sum_k w^k J * f^k`.
pub fn weighted_field(k_coupling: f64, weights: &[f64], f: &Spectrum) -> (f64, f64) {
    let mut c = 0.0;
    let mut s = 0.0;
    for (k, w) in weights.iter().enumerate() {
        c += w * k_coupling * PI * f.s(k, 1);
        s -= w * k_coupling * PI * f.c(k, 1);
    }
    (c, s)
}

/// A smooth density or perturbation sampled on the grid, one row per
/// component.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileField {
    grid: GridSpec,
    values: Vec<Vec<f64>>,
    spectrum: Spectrum,
}

impl ProfileField {
    pub fn from_values(grid: &GridSpec, values: Vec<Vec<f64>>) -> Result<Self> {
        if values.len() != grid.n_components() || values.iter().any(|v| v.len() != grid.n_grid()) {
            return Err(Error::InvalidGrid("field shape does not match the grid".into()));
        }
        let spectrum = Spectrum::from_grid(&values, grid.n_modes());
        Ok(Self { grid: grid.clone(), values, spectrum })
    }

    pub fn from_fn<F: Fn(usize, f64) -> f64>(grid: &GridSpec, f: F) -> Self {
        let values = (0..grid.n_components())
            .map(|k| (0..grid.n_grid()).map(|j| f(k, grid.theta(j))).collect())
            .collect();
        Self::from_values(grid, values).expect("shape is consistent")
    }

    pub fn from_spectrum(grid: &GridSpec, spectrum: &Spectrum) -> Self {
        let s = spectrum.resized(grid.n_modes());
        let values = s.to_grid(grid.n_grid());
        Self { grid: grid.clone(), values, spectrum: s }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn component(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn weights(&self) -> &[f64] {
        self.grid.law().lambdas()
    }

    /// Trapezoid integral of each component.
    pub fn masses(&self) -> Vec<f64> {
        let h = self.grid.dtheta();
        self.values.iter().map(|v| h * v.iter().sum::<f64>()).collect()
    }

    pub fn is_zero_mean(&self, tol: f64) -> bool {
        self.masses().iter().all(|m| m.abs() <= tol)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn h1_norm(&self) -> f64 {
        h1_norm(self.weights(), &self.spectrum)
    }

    pub fn hminus1_norm(&self) -> Result<f64> {
        hminus1_norm(self.weights(), &self.spectrum)
    }

    pub fn h_alpha_norm(&self, alpha: f64) -> f64 {
        h_alpha_norm(self.weights(), &self.spectrum, alpha)
    }

    /// `J * f` per component, evaluated on the grid.
    pub fn convolve_j(&self, k_coupling: f64) -> ProfileField {
        ProfileField::from_spectrum(&self.grid, &convolve_j(k_coupling, &self.spectrum))
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "component,theta,value")?;
        for (k, v) in self.values.iter().enumerate() {
            let signed = self.grid.law().signed_index(k);
            for (j, x) in v.iter().enumerate() {
                writeln!(w, "{},{:.12},{:.17e}", signed, self.grid.theta(j), x)?;
            }
        }
        Ok(())
    }
}

/// Empirical measures per component, optionally minus a smooth density.
#[derive(Clone, Debug)]
pub struct SignedMeasureField {
    grid: GridSpec,
    atoms: Vec<Vec<f64>>,
    smooth: Option<Spectrum>,
    spectrum: Spectrum,
}

impl SignedMeasureField {
    /// `atoms[k]` are the phases of the rotators carrying component `k`.
    pub fn from_atoms(grid: &GridSpec, atoms: Vec<Vec<f64>>) -> Result<Self> {
        if atoms.len() != grid.n_components() {
            return Err(Error::InvalidGrid("atom lists do not match the law".into()));
        }
        for (k, a) in atoms.iter().enumerate() {
            if a.is_empty() {
                return Err(Error::EmptyPopulation(grid.law().signed_index(k)));
            }
        }
        let spectrum = empirical_spectrum(&atoms, grid.n_modes());
        Ok(Self { grid: grid.clone(), atoms, smooth: None, spectrum })
    }

    /// Subtracts a smooth density, e.g. a stationary profile.
    pub fn minus(mut self, density: &Spectrum) -> Self {
        let d = density.resized(self.grid.n_modes());
        self.spectrum = &self.spectrum - &d;
        self.smooth = Some(match self.smooth.take() {
            Some(s) => &s + &d,
            None => d,
        });
        self
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn atoms(&self) -> &[Vec<f64>] {
        &self.atoms
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn weights(&self) -> &[f64] {
        self.grid.law().lambdas()
    }

    pub fn hminus1_norm(&self) -> Result<f64> {
        hminus1_norm(self.weights(), &self.spectrum)
    }
}

/// `sum_k lambda^k int f^k d mu^k` with the atoms summed exactly and any
/// smooth part paired by Parseval.
pub fn weighted_bracket(m: &SignedMeasureField, f: &ProfileField) -> f64 {
    let weights = m.weights();
    let spec = f.spectrum();
    let mut total = 0.0;
    for (k, atoms) in m.atoms.iter().enumerate() {
        let s: f64 = atoms.iter().map(|&phi| spec.eval(k, phi)).sum();
        total += weights[k] * s / atoms.len() as f64;
    }
    if let Some(smooth) = &m.smooth {
        total -= bracket(weights, smooth, spec);
    }
    total
}

/// Coefficients of the empirical probability measures `(1/N^k) sum_j delta_{phi_j}`.
pub fn empirical_spectrum(atoms: &[Vec<f64>], n_modes: usize) -> Spectrum {
    let mut s = Spectrum::zeros(atoms.len(), n_modes);
    let mut acc = vec![Complex64::new(0.0, 0.0); n_modes + 1];
    for (k, a) in atoms.iter().enumerate() {
        acc.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for &phi in a {
            let e = Complex64::from_polar(1.0, phi);
            let mut z = e;
            for slot in acc.iter_mut().skip(1) {
                *slot += z;
                z *= e;
            }
        }
        let scale = 1.0 / (PI * a.len() as f64);
        s.set(k, 0, 1.0 / PI, 0.0);
        for n in 1..=n_modes {
            s.set(k, n, acc[n].re * scale, acc[n].im * scale);
        }
    }
    s
}
