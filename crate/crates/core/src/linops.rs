//! The operator linearized around a stationary profile, its adjoint, the
//! spectral projection onto the invariant circle and the drift it induces.
//!
//! Perturbations `u` are zero-mean and represented by `M` modes per
//! component; the operator is
//!
//! `(L u)^i = 1/2 u'' - (delta omega^i u)' - (u G + q^i W)'`
//!
//! with `G = sum_k lambda^k J * q^k`, `W = sum_k lambda^k J * u^k`. Since `J`
//! only sees mode one, products with `G` and `W` shift modes by one and the
//! Galerkin matrix is assembled exactly in coefficient space.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, Mat};
use crate::rng;
use crate::spaces::{grid_derivative, GridSpec, ProfileField, Spectrum};
use crate::stationary::StationaryProfile;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Above this condition number of the eigenvector matrix the semigroup is
/// evaluated with Pade approximants instead of the eigenbasis.
pub const MAX_EIGEN_CONDITION: f64 = 1e8;

/// Random perturbations per radius when calibrating the tube.
pub const TUBE_TRIALS: usize = 200;

/// Random fields behind the estimates of `C_P` and `C_L`.
pub const ESTIMATE_FIELDS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemigroupPath {
    Eigen,
    Pade,
}

/// Result of projecting a measure onto the circle of profiles.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub psi: f64,
    pub iterations: usize,
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SemigroupBound {
    pub c_l: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug)]
pub struct SpectralModel {
    profile: StationaryProfile,
    n_modes: usize,
    q_hat: Vec<Vec<Complex64>>,
    g1: Complex64,
    matrix: Mat<f64>,
    eigenvalues: Vec<c64>,
    eigvecs: Mat<c64>,
    eigvecs_inv: Mat<c64>,
    cond_v: f64,
    zero_index: usize,
    gap: f64,
    tangent: Vec<f64>,
    adjoint_kernel: Vec<f64>,
    p_row: Vec<f64>,
    p_of_profile: f64,
    hm1_weights: Vec<f64>,
    path: SemigroupPath,
}

/// `(f G)_m` for a function with complex coefficients `f` (index `n >= 0`)
/// times a mode-one function with coefficient `g1`.
fn shift_product(f: &[Complex64], g1: Complex64, m: usize) -> Complex64 {
    let below = if m == 0 { f.get(1).map_or(ZERO, |v| v.conj()) } else { f[m - 1] };
    let above = f.get(m + 1).copied().unwrap_or(ZERO);
    below * g1 + above * g1.conj()
}

fn to_complex(n_comp: usize, n_modes: usize, v: &[f64]) -> Vec<Vec<Complex64>> {
    (0..n_comp)
        .map(|k| {
            let mut c = vec![ZERO; n_modes + 2];
            for n in 1..=n_modes {
                let i = Spectrum::vector_index(n_modes, k, n, 0);
                c[n] = Complex64::new(0.5 * v[i], -0.5 * v[i + 1]);
            }
            c
        })
        .collect()
}

fn from_complex(n_modes: usize, c: &[Vec<Complex64>]) -> Vec<f64> {
    let mut v = Vec::with_capacity(2 * c.len() * n_modes);
    for ck in c {
        for n in 1..=n_modes {
            v.push(2.0 * ck[n].re);
            v.push(-2.0 * ck[n].im);
        }
    }
    v
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl SpectralModel {
    /// Assembles the Galerkin matrix with `n_modes` modes per component
    /// around `profile` and computes its spectral data.
    pub fn assemble(profile: &StationaryProfile, n_modes: usize) -> Result<Self> {
        if n_modes + 1 >= profile.grid().n_grid() / 2 {
            return Err(Error::InvalidGrid(format!(
                "{} modes exceed the resolution of the profile grid",
                n_modes
            )));
        }
        let law = profile.law().clone();
        let n_comp = law.n_components();
        let q_hat = profile.complex_coefficients(n_modes + 1);
        let kc = profile.k;
        let g1 = I * PI * kc * (0..n_comp).map(|k| law.lambda(k) * q_hat[k][1]).sum::<Complex64>();
        let dim = Spectrum::vector_len(n_comp, n_modes);

        let mut hm1_weights = vec![0.0; dim];
        for k in 0..n_comp {
            for n in 1..=n_modes {
                let i = Spectrum::vector_index(n_modes, k, n, 0);
                let w = PI * law.lambda(k) / (n * n) as f64;
                hm1_weights[i] = w;
                hm1_weights[i + 1] = w;
            }
        }

        let mut model = SpectralModel {
            profile: profile.clone(),
            n_modes,
            q_hat,
            g1,
            matrix: Mat::zeros(dim, dim),
            eigenvalues: Vec::new(),
            eigvecs: Mat::zeros(0, 0),
            eigvecs_inv: Mat::zeros(0, 0),
            cond_v: 1.0,
            zero_index: 0,
            gap: 0.0,
            tangent: Vec::new(),
            adjoint_kernel: Vec::new(),
            p_row: Vec::new(),
            p_of_profile: 0.0,
            hm1_weights,
            path: SemigroupPath::Eigen,
        };

        let mut e = vec![0.0; dim];
        for a in 0..dim {
            e[a] = 1.0;
            let col = model.apply_vec(&e);
            e[a] = 0.0;
            for (i, v) in col.iter().enumerate() {
                model.matrix[(i, a)] = *v;
            }
        }

        model.tangent = profile.tangent().resized(n_modes).to_vector();
        let lz = model.apply_vec(&model.tangent);
        let lz_norm = model.hm1_norm_vec(&lz);
        if lz_norm > 1e-6 {
            return Err(Error::Assembly(format!(
                "the tangent of the circle is not in the kernel: ||L dq||_-1 = {:e}",
                lz_norm
            )));
        }

        let (values, vecs) = linalg::eigen(&model.matrix)?;
        let zero_index = (0..dim)
            .min_by(|&a, &b| values[a].norm().partial_cmp(&values[b].norm()).unwrap())
            .unwrap();
        let gap = (0..dim)
            .filter(|&j| j != zero_index)
            .map(|j| -values[j].re)
            .fold(f64::INFINITY, f64::min);
        if !(gap > 0.0) {
            return Err(Error::Assembly(format!("no spectral gap: largest nonzero real part {:e}", -gap)));
        }
        model.eigvecs_inv = linalg::inverse_complex(&vecs);
        model.cond_v = linalg::cond2(&vecs)?;
        if model.cond_v > MAX_EIGEN_CONDITION {
            log::warn!("eigenvector condition {:e}; using Pade semigroup", model.cond_v);
            model.path = SemigroupPath::Pade;
        }
        model.eigenvalues = values;
        model.eigvecs = vecs;
        model.zero_index = zero_index;
        model.gap = gap;

        model.adjoint_kernel = model.adjoint_null_vector()?;
        let pair = model.pairing_weights();
        let norm: f64 = (0..dim).map(|a| pair[a] * model.adjoint_kernel[a] * model.tangent[a]).sum();
        let scale = (0..dim)
            .map(|a| (pair[a] * model.adjoint_kernel[a]).powi(2))
            .sum::<f64>()
            .sqrt()
            * dot(&model.tangent, &model.tangent).sqrt();
        if norm.abs() < 1e-10 * scale {
            return Err(Error::Assembly("adjoint kernel is orthogonal to the tangent".into()));
        }
        model.p_row = (0..dim).map(|a| pair[a] * model.adjoint_kernel[a] / norm).collect();
        model.p_of_profile = model.p(profile.spectrum());
        Ok(model)
    }

    fn pairing_weights(&self) -> Vec<f64> {
        let law = self.profile.law();
        let mut w = Vec::with_capacity(self.dim());
        for k in 0..law.n_components() {
            w.extend(std::iter::repeat_n(PI * law.lambda(k), 2 * self.n_modes));
        }
        w
    }

    /// Null vector of `L* = W^-1 L^T W` (`W` the pairing weights) by inverse
    /// iteration with a small shift.
    fn adjoint_null_vector(&self) -> Result<Vec<f64>> {
        let dim = self.dim();
        let w = self.pairing_weights();
        let shift = -1e-9 * self.gap.min(1.0);
        let a = Mat::from_fn(dim, dim, |i, j| {
            let v = self.matrix[(j, i)] * w[j] / w[i];
            if i == j {
                v - shift
            } else {
                v
            }
        });
        let mut x: Vec<f64> = self.tangent.iter().zip(&w).map(|(t, wi)| t * wi).collect();
        for _ in 0..4 {
            x = linalg::solve(&a, &x);
            let n = dot(&x, &x).sqrt();
            if !n.is_finite() || n == 0.0 {
                return Err(Error::LinAlg("adjoint inverse iteration broke down".into()));
            }
            x.iter_mut().for_each(|v| *v /= n);
        }
        Ok(x)
    }

    pub fn profile(&self) -> &StationaryProfile {
        &self.profile
    }

    pub fn grid(&self) -> &GridSpec {
        self.profile.grid()
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn dim(&self) -> usize {
        self.hm1_weights.len()
    }

    pub fn psi(&self) -> f64 {
        self.profile.psi
    }

    pub fn matrix(&self) -> &Mat<f64> {
        &self.matrix
    }

    pub fn eigenvalues(&self) -> &[c64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, j: usize) -> Vec<c64> {
        (0..self.dim()).map(|i| self.eigvecs[(i, j)]).collect()
    }

    pub fn zero_index(&self) -> usize {
        self.zero_index
    }

    pub fn zero_eigenvalue(&self) -> c64 {
        self.eigenvalues[self.zero_index]
    }

    /// Spectral gap `gamma_L`: minus the largest real part off the kernel.
    pub fn gap(&self) -> f64 {
        self.gap
    }

    /// Index of the eigenvalue realizing the gap.
    pub fn gap_index(&self) -> usize {
        (0..self.dim())
            .filter(|&j| j != self.zero_index)
            .min_by(|&a, &b| (-self.eigenvalues[a].re).partial_cmp(&(-self.eigenvalues[b].re)).unwrap())
            .unwrap()
    }

    pub fn eigenvector_condition(&self) -> f64 {
        self.cond_v
    }

    pub fn semigroup_path(&self) -> SemigroupPath {
        self.path
    }

    /// Forces the Pade route for the semigroup.
    pub fn use_pade_semigroup(&mut self) {
        self.path = SemigroupPath::Pade;
    }

    /// Coefficient vector of `d/dtheta q`, spanning the kernel.
    pub fn tangent(&self) -> &[f64] {
        &self.tangent
    }

    /// Coefficient vector of the adjoint kernel function `v_0`.
    pub fn adjoint_kernel(&self) -> &[f64] {
        &self.adjoint_kernel
    }

    /// Row vector of the functional `p` on zero-mean coefficient vectors.
    pub fn p_row(&self) -> &[f64] {
        &self.p_row
    }

    pub fn hm1_weights(&self) -> &[f64] {
        &self.hm1_weights
    }

    pub fn hm1_norm_vec(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.hm1_weights).map(|(x, w)| w * x * x).sum::<f64>().sqrt()
    }

    pub fn to_vector(&self, u: &Spectrum) -> Vec<f64> {
        u.resized(self.n_modes).to_vector()
    }

    pub fn from_vector(&self, v: &[f64]) -> Spectrum {
        Spectrum::from_vector(self.profile.law().n_components(), self.n_modes, v)
    }

    fn apply_complex(&self, u: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        let law = self.profile.law();
        let kc = self.profile.k;
        let delta = self.profile.delta;
        let w1 = I * PI * kc * (0..u.len()).map(|k| law.lambda(k) * u[k][1]).sum::<Complex64>();
        u.iter()
            .enumerate()
            .map(|(i, ui)| {
                let dw = delta * law.omega(i);
                let mut out = vec![ZERO; self.n_modes + 2];
                for m in 1..=self.n_modes {
                    let mf = m as f64;
                    let flux = shift_product(ui, self.g1, m) + shift_product(&self.q_hat[i], w1, m);
                    out[m] = Complex64::new(-0.5 * mf * mf, -dw * mf) * ui[m] - I * mf * flux;
                }
                out
            })
            .collect()
    }

    fn apply_vec(&self, v: &[f64]) -> Vec<f64> {
        let n_comp = self.profile.law().n_components();
        from_complex(self.n_modes, &self.apply_complex(&to_complex(n_comp, self.n_modes, v)))
    }

    /// `L u` in coefficient space.
    pub fn apply(&self, u: &Spectrum) -> Result<Spectrum> {
        u.check_zero_mean(1e-9)?;
        Ok(self.from_vector(&linalg::matvec(&self.matrix, &self.to_vector(u))))
    }

    /// `L u` evaluated pseudospectrally on the grid, then truncated.
    pub fn apply_grid(&self, u: &ProfileField) -> Result<Spectrum> {
        u.spectrum().check_zero_mean(1e-9)?;
        let grid = self.grid();
        let law = grid.law();
        let full = grid.n_grid() / 2 - 1;
        let weighted = |f: &ProfileField| -> Vec<f64> {
            let j = f.convolve_j(self.profile.k);
            let mut acc = vec![0.0; grid.n_grid()];
            for (k, l) in law.lambdas().iter().enumerate() {
                acc.iter_mut().zip(j.component(k)).for_each(|(a, b)| *a += l * b);
            }
            acc
        };
        let g = weighted(self.profile.field());
        let w = weighted(u);
        let mut out = Vec::with_capacity(law.n_components());
        for i in 0..law.n_components() {
            let ui = u.component(i);
            let qi = self.profile.field().component(i);
            let dw = self.profile.delta * law.omega(i);
            let flux: Vec<f64> = (0..grid.n_grid())
                .map(|j| dw * ui[j] + ui[j] * g[j] + qi[j] * w[j])
                .collect();
            let d2 = grid_derivative(ui, 2, full);
            let df = grid_derivative(&flux, 1, full);
            out.push(d2.iter().zip(&df).map(|(a, b)| 0.5 * a - b).collect());
        }
        Ok(Spectrum::from_grid(&out, self.n_modes).without_mean())
    }

    /// `L* v` in coefficient space, adjoint for the weighted pairing.
    pub fn apply_adjoint(&self, v: &Spectrum) -> Spectrum {
        let w = self.pairing_weights();
        let x = self.to_vector(v);
        let dim = self.dim();
        let y: Vec<f64> = (0..dim)
            .map(|i| (0..dim).map(|j| self.matrix[(j, i)] * w[j] * x[j]).sum::<f64>() / w[i])
            .collect();
        self.from_vector(&y)
    }

    /// `L* v = 1/2 v'' + delta omega v' + v' G - J * (sum_k lambda^k q^k v^k')`
    /// minus its mean, evaluated on the grid.
    pub fn apply_adjoint_grid(&self, v: &ProfileField) -> Spectrum {
        let grid = self.grid();
        let law = grid.law();
        let full = grid.n_grid() / 2 - 1;
        let qg = self.profile.field().convolve_j(self.profile.k);
        let mut g = vec![0.0; grid.n_grid()];
        for (k, l) in law.lambdas().iter().enumerate() {
            g.iter_mut().zip(qg.component(k)).for_each(|(a, b)| *a += l * b);
        }
        let dv: Vec<Vec<f64>> = v.values().iter().map(|c| grid_derivative(c, 1, full)).collect();
        let mut coupled = vec![0.0; grid.n_grid()];
        for (k, l) in law.lambdas().iter().enumerate() {
            let qk = self.profile.field().component(k);
            for j in 0..grid.n_grid() {
                coupled[j] += l * qk[j] * dv[k][j];
            }
        }
        let coupled = ProfileField::from_values(grid, vec![coupled; law.n_components()])
            .expect("shape matches")
            .convolve_j(self.profile.k);
        let mut out = Vec::with_capacity(law.n_components());
        for i in 0..law.n_components() {
            let d2 = grid_derivative(v.component(i), 2, full);
            let dw = self.profile.delta * law.omega(i);
            out.push(
                (0..grid.n_grid())
                    .map(|j| 0.5 * d2[j] + (dw + g[j]) * dv[i][j] - coupled.component(i)[j])
                    .collect::<Vec<f64>>(),
            );
        }
        Spectrum::from_grid(&out, self.n_modes).without_mean()
    }

    /// `p(u) = <v_0, u> / <v_0, d/dtheta q>`, so that `p(d/dtheta q) = 1`.
    /// The constant mode of `u` is ignored.
    pub fn p(&self, u: &Spectrum) -> f64 {
        dot(&self.p_row, &self.to_vector(u))
    }

    /// The functional of the profile rotated to `psi`.
    pub fn p_at(&self, psi: f64, u: &Spectrum) -> f64 {
        self.p(&u.rotated(self.psi() - psi))
    }

    /// Projection onto the kernel along the stable subspace.
    pub fn p0_apply(&self, u: &Spectrum) -> Spectrum {
        let a = self.p(u);
        self.from_vector(&self.tangent.iter().map(|t| a * t).collect::<Vec<_>>())
    }

    pub fn ps_apply(&self, u: &Spectrum) -> Spectrum {
        &u.resized(self.n_modes).without_mean() - &self.p0_apply(u)
    }

    /// Exact `||P^0||` in the dual norm; for an oblique rank-one projection
    /// this also equals `||P^s||`.
    pub fn projection_norm(&self) -> f64 {
        let a: f64 = self.tangent.iter().zip(&self.hm1_weights).map(|(t, w)| w * t * t).sum::<f64>().sqrt();
        let b: f64 = self.p_row.iter().zip(&self.hm1_weights).map(|(p, w)| p * p / w).sum::<f64>().sqrt();
        a * b
    }

    /// Action of the semigroup `exp(t L)` on a zero-mean spectrum.
    pub fn semigroup_apply(&self, t: f64, u: &Spectrum) -> Spectrum {
        let v = self.to_vector(u);
        self.from_vector(&self.semigroup_vec(t, &v))
    }

    fn semigroup_vec(&self, t: f64, v: &[f64]) -> Vec<f64> {
        match self.path {
            SemigroupPath::Eigen => {
                let mut y = self.to_eigen(v);
                for (yj, l) in y.iter_mut().zip(&self.eigenvalues) {
                    *yj *= (l * t).exp();
                }
                self.from_eigen(&y)
            }
            SemigroupPath::Pade => {
                let a = Mat::from_fn(self.dim(), self.dim(), |i, j| t * self.matrix[(i, j)]);
                linalg::matvec(&linalg::expm(&a), v)
            }
        }
    }

    pub(crate) fn to_eigen(&self, v: &[f64]) -> Vec<c64> {
        let vc: Vec<c64> = v.iter().map(|x| c64::new(*x, 0.0)).collect();
        linalg::matvec_c(&self.eigvecs_inv, &vc)
    }

    pub(crate) fn from_eigen(&self, y: &[c64]) -> Vec<f64> {
        linalg::matvec_c(&self.eigvecs, y).iter().map(|z| z.re).collect()
    }

    /// `sup_t ||exp(tL) P^s|| exp(gamma t)` for `gamma = fraction * gamma_L`,
    /// with the operator norm found by power iteration on a time grid. An
    /// upper reference for [`SpectralModel::semigroup_bound`].
    pub fn semigroup_operator_bound(&self, fraction: f64) -> SemigroupBound {
        let gamma = fraction * self.gap;
        let dim = self.dim();
        let sq: Vec<f64> = self.hm1_weights.iter().map(|w| w.sqrt()).collect();
        let horizon = self.bound_horizon();
        let mut c_l: f64 = 1.0;
        let mut rng = rng::stream(0, rng::streams::CALIBRATION);
        let mut x: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        for step in 0..=24 {
            let t = horizon * step as f64 / 24.0;
            let dense = self.dense_semigroup(t);
            let forward = |v: &[f64]| match &dense {
                Some(e) => linalg::matvec(e, v),
                None => self.semigroup_vec(t, v),
            };
            let backward = |v: &[f64]| match &dense {
                Some(e) => (0..dim).map(|j| (0..dim).map(|i| e[(i, j)] * v[i]).sum()).collect(),
                None => self.semigroup_transpose_vec(t, v),
            };
            // A = S exp(tL) P^s S^-1 with S = diag(sqrt(w))
            let apply = |x: &[f64]| -> Vec<f64> {
                let u: Vec<f64> = x.iter().zip(&sq).map(|(a, s)| a / s).collect();
                let pu = dot(&self.p_row, &u);
                let ps: Vec<f64> = u.iter().zip(&self.tangent).map(|(a, z)| a - pu * z).collect();
                forward(&ps).iter().zip(&sq).map(|(a, s)| a * s).collect()
            };
            let apply_t = |y: &[f64]| -> Vec<f64> {
                let u: Vec<f64> = y.iter().zip(&sq).map(|(a, s)| a * s).collect();
                let e: Vec<f64> = backward(&u);
                let ze = dot(&self.tangent, &e);
                e.iter().zip(&self.p_row).zip(&sq).map(|((a, p), s)| (a - ze * p) / s).collect()
            };
            let mut sigma = 0.0;
            for _ in 0..40 {
                let y = apply(&x);
                let z = apply_t(&y);
                let n = dot(&z, &z).sqrt();
                if n == 0.0 {
                    break;
                }
                sigma = n.sqrt();
                x = z.iter().map(|v| v / n).collect();
            }
            c_l = c_l.max(sigma * (gamma * t).exp());
        }
        SemigroupBound { c_l, gamma }
    }

    fn bound_horizon(&self) -> f64 {
        12.0 / self.gap.max(1e-3)
    }

    fn dense_semigroup(&self, t: f64) -> Option<Mat<f64>> {
        match self.path {
            SemigroupPath::Eigen => None,
            SemigroupPath::Pade => {
                let dim = self.dim();
                let a = Mat::from_fn(dim, dim, |i, j| t * self.matrix[(i, j)]);
                Some(linalg::expm(&a))
            }
        }
    }

    fn random_fields(&self, count: usize) -> Vec<Vec<f64>> {
        let mut rng = rng::stream(0, rng::streams::CALIBRATION);
        (0..count).map(|_| (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect()).collect()
    }

    /// Estimate of `C_P`: the largest ratio `||P^0 u|| / ||u||` over
    /// [`ESTIMATE_FIELDS`] random fields with independent standard normal
    /// coefficients. Never exceeds [`SpectralModel::projection_norm`].
    pub fn projection_constant(&self) -> f64 {
        self.random_fields(ESTIMATE_FIELDS)
            .iter()
            .map(|u| {
                let a = dot(&self.p_row, u);
                let p0: Vec<f64> = self.tangent.iter().map(|z| a * z).collect();
                self.hm1_norm_vec(&p0) / self.hm1_norm_vec(u)
            })
            .fold(0.0, f64::max)
    }

    /// Estimate of `C_L` in `||exp(tL) P^s u|| <= C_L exp(-gamma t) ||P^s u||`,
    /// `gamma = fraction * gamma_L`: the largest ratio over
    /// [`ESTIMATE_FIELDS`] random fields and a grid of times in
    /// `[0, 12 / gamma_L]`.
    pub fn semigroup_bound(&self, fraction: f64) -> SemigroupBound {
        let gamma = fraction * self.gap;
        let horizon = self.bound_horizon();
        let stable: Vec<Vec<f64>> = self
            .random_fields(ESTIMATE_FIELDS)
            .into_iter()
            .map(|u| {
                let a = dot(&self.p_row, &u);
                u.iter().zip(&self.tangent).map(|(x, z)| x - a * z).collect()
            })
            .collect();
        let norms: Vec<f64> = stable.iter().map(|u| self.hm1_norm_vec(u)).collect();
        let mut c_l: f64 = 1.0;
        for step in 1..=24 {
            let t = horizon * step as f64 / 24.0;
            let dense = self.dense_semigroup(t);
            for (u, n0) in stable.iter().zip(&norms) {
                let v = match &dense {
                    Some(e) => linalg::matvec(e, u),
                    None => self.semigroup_vec(t, u),
                };
                c_l = c_l.max(self.hm1_norm_vec(&v) / n0 * (gamma * t).exp());
            }
        }
        SemigroupBound { c_l, gamma }
    }

    fn semigroup_transpose_vec(&self, t: f64, v: &[f64]) -> Vec<f64> {
        match self.path {
            SemigroupPath::Eigen => {
                // exp(tL)^T = V^-T exp(t Lambda) V^T
                let dim = self.dim();
                let mut y = vec![c64::new(0.0, 0.0); dim];
                for j in 0..dim {
                    let mut s = c64::new(0.0, 0.0);
                    for i in 0..dim {
                        s += self.eigvecs[(i, j)] * v[i];
                    }
                    y[j] = s * (self.eigenvalues[j] * t).exp();
                }
                (0..dim)
                    .map(|i| (0..dim).map(|j| self.eigvecs_inv[(j, i)] * y[j]).sum::<c64>().re)
                    .collect()
            }
            SemigroupPath::Pade => {
                let a = Mat::from_fn(self.dim(), self.dim(), |i, j| t * self.matrix[(j, i)]);
                linalg::matvec(&linalg::expm(&a), v)
            }
        }
    }

    /// Phase `psi` of the profile closest to `h` in the sense of the spectral
    /// projection: the root of `p_psi(h - q_psi) = 0`, found by damped Newton
    /// iteration from `psi_init` (or from the phase of the first moment).
    pub fn proj_m(&self, h: &Spectrum, psi_init: Option<f64>) -> Result<Projection> {
        let h = h.resized(self.n_modes);
        let law = self.profile.law();
        let psi0 = psi_init.unwrap_or_else(|| {
            let z: Complex64 = (0..law.n_components()).map(|k| law.lambda(k) * h.complex(k, 1)).sum();
            -z.arg()
        });
        let f = |psi: f64| {
            let r = h.rotated(self.psi() - psi);
            (self.p(&r) - self.p_of_profile, self.p(&r.derivative()))
        };
        let mut psi = psi0;
        let (mut val, mut slope) = f(psi);
        let mut iterations = 0;
        while iterations < 60 && val.abs() > 1e-13 {
            iterations += 1;
            if !slope.is_finite() || slope.abs() < 1e-12 {
                break;
            }
            let mut step = (-val / slope).clamp(-0.5, 0.5);
            let mut accepted = false;
            for _ in 0..30 {
                let (v, s) = f(psi + step);
                if v.abs() < val.abs() {
                    psi += step;
                    val = v;
                    slope = s;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if val.abs() <= 1e-10 {
            return Ok(Projection { psi, iterations, residual: val.abs() });
        }
        Err(Error::OutsideTube(format!(
            "Newton from psi = {:.6} stalled with residual {:e}",
            psi0, val
        )))
    }

    /// Dual-norm distance `||h - q_psi||` at the projected phase.
    pub fn distance_to_circle(&self, h: &Spectrum, psi_init: Option<f64>) -> Result<(Projection, f64)> {
        let proj = self.proj_m(h, psi_init)?;
        Ok((proj, self.distance_at(h, proj.psi)))
    }

    /// `||h - q_psi||_{-1,d}` for a given phase.
    pub fn distance_at(&self, h: &Spectrum, psi: f64) -> f64 {
        let q = self.profile.spectrum().rotated(psi - self.psi());
        let diff = &h.resized(self.n_modes) - &q.resized(self.n_modes);
        self.hm1_norm_vec(&diff.to_vector())
    }

    /// Coefficients `beta_k` of the linear drift `b(xi) = sum_k beta_k xi^k`
    /// with `b(xi) = p(d/dtheta(q sum_k xi^k J * q^k))`.
    pub fn drift_coefficients(&self) -> Vec<f64> {
        let n_comp = self.profile.law().n_components();
        (0..n_comp)
            .map(|k| {
                let mut xi = vec![0.0; n_comp];
                xi[k] = 1.0;
                self.drift_unchecked(&xi)
            })
            .collect()
    }

    fn drift_unchecked(&self, xi: &[f64]) -> f64 {
        let h1 = I * PI * self.profile.k * (0..xi.len()).map(|k| xi[k] * self.q_hat[k][1]).sum::<Complex64>();
        let flux: Vec<Vec<Complex64>> = self
            .q_hat
            .iter()
            .map(|q| {
                let mut c = vec![ZERO; self.n_modes + 2];
                for m in 1..=self.n_modes {
                    c[m] = I * m as f64 * shift_product(q, h1, m);
                }
                c
            })
            .collect();
        dot(&self.p_row, &from_complex(self.n_modes, &flux))
    }

    /// Disorder-induced drift of the center of synchronization for a balanced
    /// fluctuation vector (dense component order).
    pub fn drift_b(&self, xi: &[f64]) -> Result<f64> {
        if xi.len() != self.profile.law().n_components() {
            return Err(Error::InvalidLaw(format!("xi has {} entries", xi.len())));
        }
        let sum: f64 = xi.iter().sum();
        let scale: f64 = 1.0 + xi.iter().map(|x| x.abs()).sum::<f64>();
        if sum.abs() > 1e-9 * scale {
            return Err(Error::Unbalanced(sum));
        }
        Ok(self.drift_unchecked(xi))
    }

    /// Forcing terms of the finite-size equation for `nu = mu_N - q`:
    /// `D_N = -(q sum_k a^k J * q^k)'` and
    /// `R_N = (sum_k a^k J * q^k) nu + q sum_k a^k J * nu^k + (sum_k lambda_N^k J * nu^k) nu`,
    /// with `a = lambda_N - lambda = xi / sqrt(N)`.
    pub fn mild_terms(&self, xi: &[f64], n: usize, nu: &Spectrum) -> (Spectrum, Spectrum) {
        let law = self.profile.law();
        let n_comp = law.n_components();
        let sq = (n as f64).sqrt();
        let a: Vec<f64> = xi.iter().map(|x| x / sq).collect();
        let kc = self.profile.k;
        let nu_c: Vec<Vec<Complex64>> = (0..n_comp)
            .map(|k| {
                let mut c = nu.resized(self.n_modes).complex_component(k);
                c[0] = ZERO;
                c.push(ZERO);
                c
            })
            .collect();
        let a1 = I * PI * kc * (0..n_comp).map(|k| a[k] * self.q_hat[k][1]).sum::<Complex64>();
        let v1 = I * PI * kc * (0..n_comp).map(|k| a[k] * nu_c[k][1]).sum::<Complex64>();
        let u1 = I * PI * kc * (0..n_comp).map(|k| (law.lambda(k) + a[k]) * nu_c[k][1]).sum::<Complex64>();
        let mut d = Vec::with_capacity(n_comp);
        let mut r = Vec::with_capacity(n_comp);
        for i in 0..n_comp {
            let mut di = vec![ZERO; self.n_modes + 1];
            let mut ri = vec![ZERO; self.n_modes + 1];
            for m in 1..=self.n_modes {
                di[m] = -I * m as f64 * shift_product(&self.q_hat[i], a1, m);
                ri[m] = shift_product(&nu_c[i], a1 + u1, m) + shift_product(&self.q_hat[i], v1, m);
            }
            d.push(di);
            r.push(ri);
        }
        (Spectrum::from_complex(&d, self.n_modes), Spectrum::from_complex(&r, self.n_modes))
    }

    /// Largest radius, from a decreasing ladder, at which the projection
    /// converges from the unperturbed phase for `trials` random perturbations
    /// of that dual norm. Perturbations have independent standard normal
    /// coefficients in every retained mode, the spectral shape of the
    /// fluctuations of an empirical measure.
    pub fn calibrate_tube(&self, trials: usize, seed: u64) -> f64 {
        let mut rng = rng::stream(seed, rng::streams::CALIBRATION);
        let n_comp = self.profile.law().n_components();
        let q = self.profile.spectrum().resized(self.n_modes);
        let mut radius = 1.0;
        while radius > 1e-3 {
            let ok = (0..trials).all(|_| {
                let mut v = Spectrum::zeros(n_comp, self.n_modes);
                for k in 0..n_comp {
                    for n in 1..=self.n_modes {
                        let c: f64 = rng.sample(StandardNormal);
                        let s: f64 = rng.sample(StandardNormal);
                        v.set(k, n, c, s);
                    }
                }
                let norm = self.hm1_norm_vec(&v.to_vector());
                let h = &q + &(&v * (radius / norm));
                self.proj_m(&h, Some(self.psi())).is_ok()
            });
            if ok {
                return radius;
            }
            radius *= 0.8;
        }
        radius
    }
}
