//! Synchronized stationary profiles.
//!
//! For coupling `K`, disorder scale `delta` and synchronization level `r`,
//! component `i` of the stationary density is `S^i(theta) / Z^i` with
//!
//! `S^i(theta) = exp(x cos theta) int_0^{2pi} exp(-x cos(theta - s) + 2 delta omega^i s) ds`,
//!
//! `x = 2 K r`. All integrands are positive, so no cancellation occurs. The
//! level `r` solves the self-consistency `r = Psi(2 K r)` where `Psi` is the
//! weighted first trigonometric moment of the normalized profiles.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::spaces::{fft_forward, fft_inverse, grid_derivative, GridSpec, ProfileField, Spectrum};

/// Quadrature points for the self-consistency function.
pub const N_QUAD: usize = 256;

const R_LOW: f64 = 1e-6;
const R_HIGH: f64 = 1.0 - 1e-9;

fn log_integrand(x: f64, dw: f64, theta: f64, s: f64) -> f64 {
    -x * (theta - s).cos() + 2.0 * dw * s
}

/// `S` for the component with drift `delta * omega` at a single angle,
/// by adaptive quadrature of the positive integrand.
pub fn s_single(dw: f64, theta: f64, x: f64) -> Result<f64> {
    let scale = x + 4.0 * PI * dw.max(0.0);
    let f = |s: f64| (log_integrand(x, dw, theta, s) - scale).exp();
    let v = quadrature::integrate(f, 0.0, TAU, 0.0, 1e-14)?;
    Ok(v * (x * theta.cos() + scale).exp())
}

/// `S^i_delta(theta, x)` for the component with signed index `signed`.
pub fn s_delta(law: &DisorderLaw, signed: i32, theta: f64, x: f64, delta: f64) -> Result<f64> {
    let j = law
        .dense_index(signed)
        .ok_or_else(|| Error::InvalidLaw(format!("no component {}", signed)))?;
    s_single(delta * law.omega(j), theta, x)
}

/// `S` on the grid `theta_j = 2 pi j / n`, up to the common factor
/// `exp(x)`, built from cumulative cell integrals.
///
/// With `A_j = int_0^{theta_j} exp(-x cos u + 2 dw (theta_j - u)) du` and
/// `B_j = int_{theta_j}^{2pi} exp(-x cos u + 2 dw (theta_j + 2pi - u)) du`,
/// `S(theta_j) = exp(x cos theta_j) (A_j + B_j)`.
fn s_grid_scaled(dw: f64, x: f64, n: usize) -> Result<Vec<f64>> {
    let h = TAU / n as f64;
    let mut cells = Vec::with_capacity(n);
    for m in 0..n {
        let t0 = h * m as f64;
        let f = |u: f64| (-x * u.cos() - x - 2.0 * dw * (u - t0)).exp();
        let (v, e) = quadrature::gk15(&f, t0, t0 + h);
        let v = if e > 1e-15 * v.abs() {
            quadrature::integrate(f, t0, t0 + h, 0.0, 1e-15)?
        } else {
            v
        };
        cells.push(v);
    }
    let grow = (2.0 * dw * h).exp();
    let wrap = (4.0 * PI * dw).exp();
    let mut a = vec![0.0; n + 1];
    for j in 0..n {
        a[j + 1] = grow * (a[j] + cells[j]);
    }
    let mut b = vec![0.0; n + 1];
    for j in (0..n).rev() {
        b[j] = wrap * cells[j] + b[j + 1] / grow;
    }
    Ok((0..n)
        .map(|j| ((h * j as f64).cos() * x).exp() * (a[j] + b[j]))
        .collect())
}

/// Normalized profile of one component on `n` points, plus its normalization
/// `Z = int S`.
fn component_profile(dw: f64, x: f64, n: usize) -> Result<(Vec<f64>, f64)> {
    let s = s_grid_scaled(dw, x, n)?;
    let h = TAU / n as f64;
    let total: f64 = h * s.iter().sum::<f64>();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::Normalization(format!("Z = {} for x = {}, delta omega = {}", total, x, dw)));
    }
    // undo the exp(-x) scaling carried through the cell integrals
    let z = total * x.exp();
    Ok((s.iter().map(|v| v / total).collect(), z))
}

/// `Psi_delta(x) = sum_i lambda^i int cos(theta) S^i / int S^i`.
pub fn psi_delta(x: f64, delta: f64, law: &DisorderLaw) -> Result<f64> {
    let mut total = 0.0;
    for j in 0..law.n_components() {
        let (q, _) = component_profile(delta * law.omega(j), x, N_QUAD)?;
        let h = TAU / N_QUAD as f64;
        let m: f64 = q.iter().enumerate().map(|(i, v)| v * (h * i as f64).cos()).sum::<f64>() * h;
        total += law.lambda(j) * m;
    }
    Ok(total)
}

/// The synchronization level: the root of `r = Psi_delta(2 K r)` in `(0, 1)`.
pub fn solve_r(k: f64, delta: f64, law: &DisorderLaw) -> Result<f64> {
    if !(k > 0.0) || !(delta >= 0.0) {
        return Err(Error::InvalidLaw(format!("K = {} and delta = {} must be positive", k, delta)));
    }
    let g = |r: f64| psi_delta(2.0 * k * r, delta, law).map(|p| p - r);
    let mut lo = R_LOW;
    let mut hi = R_HIGH;
    let glo = g(lo)?;
    let ghi = g(hi)?;
    // near r = 0, g is O(r^3) at criticality; demand a sign clear of rounding
    if glo <= 1e-14 || ghi >= 0.0 {
        return Err(Error::NoSynchronizedSolution { k, delta });
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid)?;
        if gm == 0.0 {
            return Ok(mid);
        }
        if gm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Number of sign changes of `r -> Psi_delta(2 K r) - r` on a uniform scan of
/// `(1e-6, 1)`.
pub fn count_fixed_points(k: f64, delta: f64, law: &DisorderLaw, n_scan: usize) -> Result<usize> {
    let mut prev: Option<f64> = None;
    let mut changes = 0;
    for i in 0..n_scan {
        let r = R_LOW + (R_HIGH - R_LOW) * i as f64 / (n_scan - 1) as f64;
        let v = psi_delta(2.0 * k * r, delta, law)? - r;
        if let Some(p) = prev {
            if (p > 0.0) != (v > 0.0) {
                changes += 1;
            }
        }
        prev = Some(v);
    }
    Ok(changes)
}

/// Points `(r, Psi_delta(2 K r))` for plotting the fixed-point problem.
pub fn fixed_point_curve(k: f64, delta: f64, law: &DisorderLaw, rs: &[f64]) -> Result<Vec<(f64, f64)>> {
    rs.iter().map(|&r| Ok((r, psi_delta(2.0 * k * r, delta, law)?))).collect()
}

/// Stationary profile `q_{psi,delta}` on a grid.
#[derive(Clone, Debug)]
pub struct StationaryProfile {
    pub k: f64,
    pub delta: f64,
    pub r: f64,
    pub psi: f64,
    /// Per-component normalizations `Z^i = int S^i`.
    pub z: Vec<f64>,
    field: ProfileField,
}

impl StationaryProfile {
    pub fn field(&self) -> &ProfileField {
        &self.field
    }

    pub fn grid(&self) -> &GridSpec {
        self.field.grid()
    }

    pub fn law(&self) -> &DisorderLaw {
        self.field.grid().law()
    }

    pub fn spectrum(&self) -> &Spectrum {
        self.field.spectrum()
    }

    pub fn x(&self) -> f64 {
        2.0 * self.k * self.r
    }

    /// Complex coefficients `q_hat^i_n`, `0 <= n <= n_max`, from the full grid.
    pub fn complex_coefficients(&self, n_max: usize) -> Vec<Vec<Complex64>> {
        self.field
            .values()
            .iter()
            .map(|v| fft_forward(v)[..=n_max].to_vec())
            .collect()
    }

    /// The profile rotated by `psi`: `theta -> q(theta - psi)`.
    pub fn rotated(&self, psi: f64) -> StationaryProfile {
        let values = self
            .field
            .values()
            .iter()
            .map(|v| rotate_values(v, psi))
            .collect();
        StationaryProfile {
            psi: self.psi + psi,
            field: ProfileField::from_values(self.grid(), values).expect("shape is preserved"),
            ..self.clone()
        }
    }

    /// Coefficients of `d/dtheta q`, the generator of the invariant circle.
    pub fn tangent(&self) -> Spectrum {
        self.field.spectrum().derivative()
    }

    /// Sup-norm of the stationary Fokker-Planck residual on the grid.
    pub fn stationarity_residual(&self) -> f64 {
        stationarity_residual(&self.field, self.k, self.delta)
    }
}

/// Rotates periodic grid values by `psi`, exactly by a circular shift when
/// `psi` is a multiple of the grid spacing, spectrally otherwise.
pub fn rotate_values(v: &[f64], psi: f64) -> Vec<f64> {
    let n = v.len();
    let steps = psi / (TAU / n as f64);
    if (steps - steps.round()).abs() < 1e-12 {
        let s = (steps.round() as i64).rem_euclid(n as i64) as usize;
        return (0..n).map(|j| v[(j + n - s) % n]).collect();
    }
    let mut c = fft_forward(v);
    for (j, cj) in c.iter_mut().enumerate() {
        let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        if n % 2 == 0 && j == n / 2 {
            *cj = Complex64::new(0.0, 0.0);
        } else {
            *cj *= Complex64::from_polar(1.0, -m * psi);
        }
    }
    fft_inverse(&c)
}

/// Builds `q_{psi,delta}` for coupling `k` on `grid`.
pub fn build_profile(k: f64, delta: f64, grid: &GridSpec, psi: f64) -> Result<StationaryProfile> {
    let law = grid.law();
    let r = solve_r(k, delta, law)?;
    let x = 2.0 * k * r;
    let mut values = Vec::with_capacity(law.n_components());
    let mut z = Vec::with_capacity(law.n_components());
    for j in 0..law.n_components() {
        let (q, zj) = component_profile(delta * law.omega(j), x, grid.n_grid())?;
        if q.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::Normalization("profile is not positive".into()));
        }
        values.push(q);
        z.push(zj);
    }
    let field = ProfileField::from_values(grid, values)?;
    for m in field.masses() {
        if (m - 1.0).abs() > 1e-12 {
            return Err(Error::Normalization(format!("component mass {}", m)));
        }
    }
    let base = StationaryProfile { k, delta, r, psi: 0.0, z, field };
    Ok(if psi == 0.0 { base } else { base.rotated(psi) })
}

/// `sup |1/2 q'' - (q (delta omega + J * sum_k lambda^k q^k))'|` with
/// derivatives taken spectrally over the resolved modes of the grid.
pub fn stationarity_residual(field: &ProfileField, k: f64, delta: f64) -> f64 {
    let grid = field.grid();
    let law = grid.law();
    let g = field.convolve_j(k);
    let mut field_g = vec![0.0; grid.n_grid()];
    for (j, l) in law.lambdas().iter().enumerate() {
        for (a, b) in field_g.iter_mut().zip(g.component(j)) {
            *a += l * b;
        }
    }
    let mut max = 0.0f64;
    for j in 0..law.n_components() {
        let q = field.component(j);
        let d2 = grid_derivative(q, 2, grid.n_modes());
        let flux: Vec<f64> = q
            .iter()
            .zip(&field_g)
            .map(|(qv, gv)| qv * (delta * law.omega(j) + gv))
            .collect();
        let dflux = grid_derivative(&flux, 1, grid.n_modes());
        for (a, b) in d2.iter().zip(&dflux) {
            max = max.max((0.5 * a - b).abs());
        }
    }
    max
}

/// The uniform density `1 / (2 pi)` in every component.
pub fn uniform_field(grid: &GridSpec) -> ProfileField {
    ProfileField::from_fn(grid, |_, _| 1.0 / TAU)
}

/// Signed offset of `theta` into `(-pi, pi]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    if t > PI {
        t - TAU
    } else {
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_values_match_single_point() {
        for &(dw, x) in &[(0.0, 3.0), (0.5, 4.0), (-1.0, 8.0), (2.0, 2.0)] {
            let n = 64;
            let (q, z) = component_profile(dw, x, n).unwrap();
            for j in [0usize, 5, 17, 40, 63] {
                let th = TAU * j as f64 / n as f64;
                let s = s_single(dw, th, x).unwrap();
                assert!((q[j] * z / s - 1.0).abs() < 1e-12, "dw={} x={} j={}", dw, x, j);
            }
        }
    }

    #[test]
    fn zero_disorder_profile_is_von_mises() {
        let law = DisorderLaw::two_point(1.0).unwrap();
        let grid = GridSpec::new(&law, 16, 64).unwrap();
        let p = build_profile(3.0, 0.0, &grid, 0.0).unwrap();
        let x = p.x();
        let zc = p.z[0].sqrt();
        for (j, v) in p.field().component(0).iter().enumerate() {
            let th = grid.theta(j);
            assert!((v - (x * th.cos()).exp() / zc).abs() < 1e-12);
        }
    }

    #[test]
    fn subcritical_has_no_solution() {
        let law = DisorderLaw::two_point(1.0).unwrap();
        assert!(matches!(solve_r(1.0, 0.0, &law), Err(Error::NoSynchronizedSolution { .. })));
        assert!(matches!(solve_r(0.5, 0.2, &law), Err(Error::NoSynchronizedSolution { .. })));
    }

    #[test]
    fn circular_shift_rotation() {
        let law = DisorderLaw::two_point(0.5).unwrap();
        let grid = GridSpec::new(&law, 16, 64).unwrap();
        let p = build_profile(4.0, 1.0, &grid, 0.0).unwrap();
        let r = p.rotated(PI);
        for j in 0..64 {
            assert_eq!(r.field().component(1)[j], p.field().component(1)[(j + 32) % 64]);
        }
    }
}
