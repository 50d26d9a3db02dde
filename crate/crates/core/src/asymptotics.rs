//! Small-disorder asymptotics around the `delta = 0` profile
//! `q_0 = exp(x cos theta) / Z_0`, `x = 2 K r_0`, `Z_0 = int exp(x cos)`.
//!
//! First-order correction: `q^i_delta = q_0 (1 + delta omega^i kappa) + O(delta^2)`
//! with
//!
//! `kappa(theta) = 2 theta + 4 pi T(theta) / Z_0 - 2 int u e^{x cos u} du / Z_0
//!                 - 4 pi int e^{x cos u} T(u) du / Z_0^2`,
//!
//! `T(theta) = int_theta^{2pi} exp(-x cos u) du`.

use std::f64::consts::{PI, TAU};

use crate::disorder::DisorderLaw;
use crate::error::{Error, Result};
use crate::quadrature;
use crate::spaces::{GridSpec, Spectrum};
use crate::stationary::{build_profile, solve_r};

const N_TABLE: usize = 2048;

#[derive(Clone, Debug)]
pub struct Delta0Context {
    pub k: f64,
    pub r0: f64,
    pub x: f64,
    pub z0: f64,
    /// `int_0^{2pi} u exp(x cos u) du`
    pub moment: f64,
    /// `int_0^{2pi} exp(x cos u) T(u) du`
    pub cross: f64,
    t_table: Vec<f64>,
}

impl Delta0Context {
    pub fn new(k: f64) -> Result<Self> {
        let law = DisorderLaw::two_point(1.0)?;
        let r0 = solve_r(k, 0.0, &law)?;
        let x = 2.0 * k * r0;
        let z0 = quadrature::integrate(|u: f64| (x * u.cos()).exp(), 0.0, TAU, 0.0, 1e-15)?;
        let h = TAU / N_TABLE as f64;
        let mut t_table = vec![0.0; N_TABLE + 1];
        for j in (0..N_TABLE).rev() {
            let a = h * j as f64;
            let (v, _) = quadrature::gk15(&|u: f64| (-x * u.cos()).exp(), a, a + h);
            t_table[j] = t_table[j + 1] + v;
        }
        let moment = quadrature::integrate(|u: f64| u * (x * u.cos()).exp(), 0.0, TAU, 0.0, 1e-15)?;
        let mut ctx = Delta0Context { k, r0, x, z0, moment, cross: 0.0, t_table };
        // integrate cell by cell so that T is smooth on each panel
        let mut cross = 0.0;
        for j in 0..N_TABLE {
            let a = h * j as f64;
            let c = &ctx;
            let (v, _) = quadrature::gk15(&|u: f64| (x * u.cos()).exp() * c.tail(u), a, a + h);
            cross += v;
        }
        ctx.cross = cross;
        Ok(ctx)
    }

    /// `T(theta) = int_theta^{2pi} exp(-x cos u) du` for `theta` in `[0, 2 pi]`.
    pub fn tail(&self, theta: f64) -> f64 {
        let h = TAU / N_TABLE as f64;
        let j = ((theta / h).floor() as usize).min(N_TABLE - 1);
        let a = h * j as f64;
        if theta <= a {
            return self.t_table[j];
        }
        let x = self.x;
        let (v, _) = quadrature::gk15(&|u: f64| (-x * u.cos()).exp(), a, theta);
        self.t_table[j] - v
    }

    pub fn q0(&self, theta: f64) -> f64 {
        (self.x * theta.cos()).exp() / self.z0
    }

    /// The first-order profile correction; periodic in `theta`.
    pub fn kappa(&self, theta: f64) -> f64 {
        let t = theta.rem_euclid(TAU);
        2.0 * t + 4.0 * PI * self.tail(t) / self.z0
            - 2.0 * self.moment / self.z0
            - 4.0 * PI * self.cross / (self.z0 * self.z0)
    }

    /// `c_b = K r_0 Z_0^2 / (Z_0^2 - 4 pi^2) int sin(theta) kappa(theta) q_0(theta) dtheta`.
    pub fn c_b(&self) -> f64 {
        let h = TAU / N_TABLE as f64;
        let integral: f64 = (0..N_TABLE)
            .map(|j| {
                let t = h * j as f64;
                t.sin() * self.kappa(t) * self.q0(t)
            })
            .sum::<f64>()
            * h;
        let z2 = self.z0 * self.z0;
        self.k * self.r0 * z2 / (z2 - 4.0 * PI * PI) * integral
    }

    /// `int kappa q_0`, zero when the expansion preserves mass.
    pub fn kappa_mass(&self) -> f64 {
        let h = TAU / N_TABLE as f64;
        (0..N_TABLE).map(|j| self.kappa(h * j as f64) * self.q0(h * j as f64)).sum::<f64>() * h
    }

    /// The explicit projection functional at `delta = 0`:
    /// `Z_0^2 / (Z_0^2 - 4 pi^2) sum_k lambda^k int (1 - 2 pi / (Z_0^2 q_0)) U^k`
    /// with `U^k` the zero-mean primitive of `u^k`.
    pub fn p0_explicit(&self, weights: &[f64], u: &Spectrum) -> Result<f64> {
        u.check_zero_mean(1e-9)?;
        let prim = u.primitive();
        let n = (4 * u.n_modes() + 4).max(256);
        let values = prim.to_grid(n);
        let h = TAU / n as f64;
        let weight: Vec<f64> = (0..n)
            .map(|j| 1.0 - TAU * (-self.x * (h * j as f64).cos()).exp() / self.z0)
            .collect();
        let mut total = 0.0;
        for (k, l) in weights.iter().enumerate() {
            let s: f64 = values[k].iter().zip(&weight).map(|(a, b)| a * b).sum();
            total += l * s * h;
        }
        let z2 = self.z0 * self.z0;
        Ok(z2 / (z2 - 4.0 * PI * PI) * total)
    }
}

/// `delta sum_k xi^k omega^k`.
pub fn b_first_order(law: &DisorderLaw, xi: &[f64], delta: f64) -> f64 {
    delta * xi.iter().zip(law.omegas()).map(|(a, w)| a * w).sum::<f64>()
}

/// The limiting variance of `b(xi_N)` as a quadratic form in the fluctuation
/// covariance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VSquared {
    /// `beta^T Sigma beta` with first-order coefficients `beta_k = delta omega^k`.
    pub quadratic_form: f64,
    /// `delta^2 sum_k lambda^k (omega^k)^2`, the closed form of the above for
    /// a symmetric law.
    pub first_order: f64,
    /// `delta sum_k lambda^k (omega^k)^2`, the display with a single power.
    pub single_power: f64,
    /// `beta^T Sigma beta` with the full drift coefficients, when supplied.
    pub full: Option<f64>,
}

pub fn quadratic_form(law: &DisorderLaw, beta: &[f64]) -> f64 {
    let cov = law.fluctuation_covariance();
    let mut v = 0.0;
    for (k, row) in cov.iter().enumerate() {
        for (l, c) in row.iter().enumerate() {
            v += beta[k] * c * beta[l];
        }
    }
    v
}

pub fn v_squared(law: &DisorderLaw, delta: f64, full_beta: Option<&[f64]>) -> VSquared {
    let beta: Vec<f64> = law.omegas().iter().map(|w| delta * w).collect();
    let second: f64 = law.lambdas().iter().zip(law.omegas()).map(|(l, w)| l * w * w).sum();
    VSquared {
        quadratic_form: quadratic_form(law, &beta),
        first_order: delta * delta * second,
        single_power: delta * second,
        full: full_beta.map(|b| quadratic_form(law, b)),
    }
}

/// `max_{i, theta} |q^i_delta - q_0 - delta omega^i kappa q_0|` on the grid.
pub fn expansion_defect(ctx: &Delta0Context, delta: f64, grid: &GridSpec) -> Result<f64> {
    let law = grid.law();
    let p = build_profile(ctx.k, delta, grid, 0.0)?;
    let mut max = 0.0f64;
    for i in 0..law.n_components() {
        for (j, v) in p.field().component(i).iter().enumerate() {
            let t = grid.theta(j);
            let q0 = ctx.q0(t);
            let approx = q0 * (1.0 + delta * law.omega(i) * ctx.kappa(t));
            max = max.max((v - approx).abs());
        }
    }
    if !max.is_finite() {
        return Err(Error::Normalization("non-finite expansion defect".into()));
    }
    Ok(max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tail_matches_adaptive() {
        let ctx = Delta0Context::new(2.0).unwrap();
        for t in [0.0, 0.3, 2.9, 6.0] {
            let direct =
                quadrature::integrate(|u: f64| (-ctx.x * u.cos()).exp(), t, TAU, 0.0, 1e-15).unwrap();
            assert!((ctx.tail(t) - direct).abs() < 1e-13 * direct.abs().max(1.0), "{} {} {}", t, ctx.tail(t), direct);
        }
        assert!((ctx.moment - PI * ctx.z0).abs() < 1e-10 * ctx.z0);
    }

    #[test]
    fn v_squared_two_point() {
        let law = DisorderLaw::two_point(1.0).unwrap();
        let v = v_squared(&law, 0.1, None);
        assert!((v.quadratic_form - 0.01).abs() < 1e-15);
        assert!((v.first_order - 0.01).abs() < 1e-15);
        assert!((v.single_power - 0.1).abs() < 1e-15);
    }
}
