//! Mean-field Fokker-Planck system
//!
//! `d/dt p^i = 1/2 p^i'' - (p^i (delta omega^i + sum_k lambda^k J * p^k))'`
//!
//! integrated in complex Fourier coefficients with an integrating factor for
//! the diagonal linear part (Lawson RK4). The interaction only involves mode
//! one of `p`, so the quadratic term is evaluated exactly within the
//! truncation, without aliasing.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linops::SpectralModel;
use crate::spaces::{GridSpec, ProfileField, Spectrum};
use crate::stats;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Most negative density value tolerated before aborting.
pub const POSITIVITY_FLOOR: f64 = -1e-6;

#[derive(Clone, Debug)]
pub struct PdeState {
    grid: GridSpec,
    pub k: f64,
    pub delta: f64,
    pub t: f64,
    coeffs: Vec<Vec<Complex64>>,
}

impl PdeState {
    /// State from a field of probability densities.
    pub fn new(field: &ProfileField, k: f64, delta: f64) -> Result<Self> {
        for (i, m) in field.masses().iter().enumerate() {
            if (m - 1.0).abs() > 1e-8 {
                return Err(Error::Pde(format!("component {} has mass {}", i, m)));
            }
        }
        let s = field.spectrum();
        let coeffs = (0..s.n_components()).map(|k| s.complex_component(k)).collect();
        Ok(Self { grid: field.grid().clone(), k, delta, t: 0.0, coeffs })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_complex(&self.coeffs, self.grid.n_modes())
    }

    pub fn field(&self) -> ProfileField {
        ProfileField::from_spectrum(&self.grid, &self.spectrum())
    }

    pub fn masses(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| 2.0 * PI * c[0].re).collect()
    }

    fn linear(&self, i: usize, m: usize) -> Complex64 {
        let mf = m as f64;
        Complex64::new(-0.5 * mf * mf, -self.delta * self.grid.law().omega(i) * mf)
    }

    fn nonlinear(&self, p: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let law = self.grid.law();
        let n_modes = self.grid.n_modes();
        let g1 = I * PI * self.k * (0..p.len()).map(|k| law.lambda(k) * p[k][1]).sum::<Complex64>();
        p.iter()
            .map(|pi| {
                let mut out = vec![ZERO; n_modes + 1];
                for m in 1..=n_modes {
                    let above = if m < n_modes { pi[m + 1] } else { ZERO };
                    out[m] = -I * m as f64 * (pi[m - 1] * g1 + above * g1.conj());
                }
                out
            })
            .collect()
    }

    /// Time derivative of the state; the mass mode is zero by construction.
    pub fn rhs(&self) -> Spectrum {
        let mut n = self.nonlinear(&self.coeffs);
        for (i, ni) in n.iter_mut().enumerate() {
            for m in 1..ni.len() {
                ni[m] += self.linear(i, m) * self.coeffs[i][m];
            }
        }
        Spectrum::from_complex(&n, self.grid.n_modes())
    }

    fn step(&mut self, h: f64, e_half: &[Vec<Complex64>], e_full: &[Vec<Complex64>]) {
        let p = &self.coeffs;
        let comb = |a: &[Vec<Complex64>], f: &dyn Fn(usize, usize, Complex64) -> Complex64| -> Vec<Vec<Complex64>> {
            a.iter()
                .enumerate()
                .map(|(i, ai)| ai.iter().enumerate().map(|(m, v)| f(i, m, *v)).collect())
                .collect()
        };
        let k1 = self.nonlinear(p);
        let a = comb(p, &|i, m, v| e_half[i][m] * (v + 0.5 * h * k1[i][m]));
        let k2 = self.nonlinear(&a);
        let b = comb(p, &|i, m, v| e_half[i][m] * v + 0.5 * h * k2[i][m]);
        let k3 = self.nonlinear(&b);
        let c = comb(p, &|i, m, v| e_full[i][m] * v + h * e_half[i][m] * k3[i][m]);
        let k4 = self.nonlinear(&c);
        self.coeffs = comb(p, &|i, m, v| {
            e_full[i][m] * v
                + h / 6.0
                    * (e_full[i][m] * k1[i][m] + 2.0 * e_half[i][m] * (k2[i][m] + k3[i][m]) + k4[i][m])
        });
        self.t += h;
    }

    fn factors(&self, h: f64) -> Vec<Vec<Complex64>> {
        (0..self.coeffs.len())
            .map(|i| (0..=self.grid.n_modes()).map(|m| (self.linear(i, m) * h).exp()).collect())
            .collect()
    }

    fn check_positivity(&self) -> Result<()> {
        let min = self.field().min_value();
        if !min.is_finite() || min < POSITIVITY_FLOOR {
            return Err(Error::Pde(format!("density minimum {:e} at t = {:.4}", min, self.t)));
        }
        Ok(())
    }

    /// Advances to `t_end` with step at most `dt`, calling `observe` after
    /// every multiple of `every` (if given).
    pub fn evolve_observed<F: FnMut(&PdeState) -> Result<()>>(
        &mut self,
        t_end: f64,
        dt: f64,
        every: Option<f64>,
        mut observe: F,
    ) -> Result<()> {
        let m = self.grid.n_modes() as f64;
        if !(dt > 0.0) || dt > 1.0 / (m * m) * (1.0 + 1e-12) {
            return Err(Error::Pde(format!("dt = {:e} exceeds 1/M^2 = {:e}", dt, 1.0 / (m * m))));
        }
        let stops: Vec<f64> = match every {
            Some(e) if e > 0.0 => {
                let n = ((t_end - self.t) / e).round() as usize;
                (1..=n).map(|j| self.t + e * j as f64).collect()
            }
            _ => vec![t_end],
        };
        let mut steps_taken = 0usize;
        for stop in stops {
            let span = stop - self.t;
            if span <= 0.0 {
                continue;
            }
            let n = (span / dt).ceil() as usize;
            let h = span / n as f64;
            let e_half = self.factors(0.5 * h);
            let e_full = self.factors(h);
            for _ in 0..n {
                self.step(h, &e_half, &e_full);
                steps_taken += 1;
                if steps_taken % 256 == 0 {
                    self.check_positivity()?;
                }
            }
            self.t = stop;
            if every.is_some() {
                observe(self)?;
            }
        }
        self.check_positivity()
    }

    pub fn evolve(&mut self, t_end: f64, dt: f64) -> Result<()> {
        self.evolve_observed(t_end, dt, None, |_| Ok(()))
    }
}

/// Default step: the largest allowed by the stiffness check.
pub fn default_dt(grid: &GridSpec) -> f64 {
    1.0 / (grid.n_modes() * grid.n_modes()) as f64
}

#[derive(Clone, Debug)]
pub struct DecayFit {
    pub times: Vec<f64>,
    pub distances: Vec<f64>,
    pub phases: Vec<f64>,
    pub monotone: bool,
    /// Fitted exponential rate over the fit window; `None` when the distance
    /// was not monotone there.
    pub rate: Option<f64>,
}

/// Evolves `state` and fits `dist(p_t, M) ~ exp(-rate t)` over
/// `t in [t_fit.0, t_fit.1]`, sampling every `sample` time units.
pub fn decay_rate_to_m(
    state: &PdeState,
    model: &SpectralModel,
    t_fit: (f64, f64),
    sample: f64,
) -> Result<DecayFit> {
    let mut s = state.clone();
    let mut times = Vec::new();
    let mut distances = Vec::new();
    let mut phases = Vec::new();
    let mut psi = model.proj_m(&s.spectrum(), Some(model.psi()))?.psi;
    let dt = default_dt(s.grid());
    s.evolve_observed(t_fit.1, dt, Some(sample), |st| {
        let (proj, dist) = model.distance_to_circle(&st.spectrum(), Some(psi))?;
        psi = proj.psi;
        times.push(st.t);
        distances.push(dist);
        phases.push(proj.psi);
        Ok(())
    })?;
    let window: Vec<usize> = (0..times.len()).filter(|&j| times[j] >= t_fit.0 - 1e-9).collect();
    let monotone = window.windows(2).all(|w| distances[w[1]] <= distances[w[0]]);
    let rate = if monotone && window.len() >= 3 {
        let x: Vec<f64> = window.iter().map(|&j| times[j]).collect();
        let y: Vec<f64> = window.iter().map(|&j| distances[j].ln()).collect();
        Some(-stats::linear_fit(&x, &y)?.slope)
    } else {
        None
    };
    Ok(DecayFit { times, distances, phases, monotone, rate })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::DisorderLaw;
    use crate::stationary::uniform_field;

    #[test]
    fn uniform_is_stationary() {
        let law = DisorderLaw::two_point(1.0).unwrap();
        let grid = GridSpec::new(&law, 16, 64).unwrap();
        let s = PdeState::new(&uniform_field(&grid), 3.0, 0.2).unwrap();
        assert!(s.rhs().to_vector().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn rejects_large_step() {
        let law = DisorderLaw::two_point(1.0).unwrap();
        let grid = GridSpec::new(&law, 16, 64).unwrap();
        let mut s = PdeState::new(&uniform_field(&grid), 3.0, 0.2).unwrap();
        assert!(matches!(s.evolve(1.0, 0.01), Err(Error::Pde(_))));
    }
}
