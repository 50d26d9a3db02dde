//! Particle simulation, phase tracking along the circle of profiles, wave
//! speed estimation and the mild-formulation residual.
//!
//! Rotator `j` with disorder component `k(j)` follows
//! `d phi_j = delta omega^{k(j)} dt - (K/N) sum_l sin(phi_j - phi_l) dt + dB_j`,
//! advanced by Euler-Maruyama. The interaction only needs the order
//! parameters `mean cos phi` and `mean sin phi`, so a step costs `O(N)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::disorder::{DisorderLaw, DisorderSample};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::linops::{SemigroupPath, SpectralModel};
use crate::rng::{self, Rng};
use crate::spaces::{empirical_spectrum, GridSpec, ProfileField, SignedMeasureField, Spectrum};
use crate::stats;

/// Population size above which the force loop runs in parallel.
const PARALLEL_THRESHOLD: usize = 20_000;

#[derive(Clone, Debug)]
pub struct RotatorEnsemble {
    law: DisorderLaw,
    k: f64,
    delta: f64,
    comp: Vec<usize>,
    drift: Vec<f64>,
    phases: Vec<f64>,
    t: f64,
    noise: f64,
    coupled: bool,
    rng: Rng,
    normals: Vec<f64>,
    trig: Vec<(f64, f64)>,
}

impl RotatorEnsemble {
    pub fn new(sample: &DisorderSample, k: f64, delta: f64, phases: Vec<f64>, seed: u64) -> Result<Self> {
        if phases.len() != sample.n() {
            return Err(Error::Config(format!(
                "{} phases for {} rotators",
                phases.len(),
                sample.n()
            )));
        }
        let law = sample.law().clone();
        let comp: Vec<usize> = sample
            .assignments()
            .iter()
            .map(|&s| law.dense_index(s).expect("sample indices are valid"))
            .collect();
        let drift = comp.iter().map(|&j| delta * law.omega(j)).collect();
        let n = phases.len();
        Ok(Self {
            law,
            k,
            delta,
            comp,
            drift,
            phases,
            t: 0.0,
            noise: 1.0,
            coupled: false,
            rng: rng::stream(seed, rng::streams::NOISE),
            normals: vec![0.0; n],
            trig: vec![(0.0, 0.0); n],
        })
    }

    /// Scales the Brownian forcing; zero gives the deterministic particle
    /// dynamics.
    pub fn set_noise(&mut self, scale: f64) {
        self.noise = scale;
    }

    /// When set, each step of size `dt` draws the increments of two steps of
    /// size `dt / 2` and sums them, so a run at `dt` is pathwise coupled to a
    /// run at `dt / 2` with the same seed.
    pub fn set_coupled_coarse(&mut self, on: bool) {
        self.coupled = on;
    }

    pub fn n(&self) -> usize {
        self.phases.len()
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// One Euler-Maruyama step.
    pub fn step(&mut self, dt: f64) {
        let n = self.n();
        let (c, s) = if n >= PARALLEL_THRESHOLD {
            self.trig.par_iter_mut().zip(&self.phases).for_each(|(t, p)| *t = p.sin_cos());
            self.trig
                .par_iter()
                .map(|&(s, c)| (c, s))
                .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1))
        } else {
            let mut acc = (0.0, 0.0);
            for (t, p) in self.trig.iter_mut().zip(&self.phases) {
                *t = p.sin_cos();
                acc.0 += t.1;
                acc.1 += t.0;
            }
            acc
        };
        let kc = self.k * c / n as f64;
        let ks = self.k * s / n as f64;
        let amp = self.noise * dt.sqrt();
        for z in self.normals.iter_mut() {
            *z = self.rng.sample(StandardNormal);
        }
        if self.coupled {
            for z in self.normals.iter_mut() {
                let second: f64 = self.rng.sample(StandardNormal);
                *z = (*z + second) / std::f64::consts::SQRT_2;
            }
        }
        let update = |((p, &(sn, cs)), (&w, &z)): ((&mut f64, &(f64, f64)), (&f64, &f64))| {
            let force = w - (sn * kc - cs * ks);
            *p = (*p + force * dt + amp * z).rem_euclid(TAU);
        };
        if n >= PARALLEL_THRESHOLD {
            self.phases
                .par_iter_mut()
                .zip(self.trig.par_iter())
                .zip(self.drift.par_iter().zip(self.normals.par_iter()))
                .for_each(update);
        } else {
            self.phases
                .iter_mut()
                .zip(self.trig.iter())
                .zip(self.drift.iter().zip(self.normals.iter()))
                .for_each(update);
        }
        self.t += dt;
    }

    pub fn advance(&mut self, duration: f64, dt: f64) {
        let steps = (duration / dt).round() as usize;
        for _ in 0..steps {
            self.step(dt);
        }
    }

    /// `|(1/N) sum_j exp(i phi_j)|` and its argument.
    pub fn order_parameter(&self) -> (f64, f64) {
        let z: Complex64 = self.phases.iter().map(|&p| Complex64::from_polar(1.0, p)).sum();
        let z = z / self.n() as f64;
        (z.norm(), z.arg())
    }

    fn atoms(&self) -> Vec<Vec<f64>> {
        let mut atoms = vec![Vec::new(); self.law.n_components()];
        for (&j, &p) in self.comp.iter().zip(&self.phases) {
            atoms[j].push(p);
        }
        atoms
    }

    /// Coefficients of the per-component empirical measures.
    pub fn spectrum(&self, n_modes: usize) -> Spectrum {
        empirical_spectrum(&self.atoms(), n_modes)
    }

    pub fn empirical_measure(&self, grid: &GridSpec) -> Result<SignedMeasureField> {
        SignedMeasureField::from_atoms(grid, self.atoms())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialCondition {
    Uniform,
    /// Independent draws from the profile by inverse CDF, plus Gaussian
    /// jitter of the given size.
    FromProfile { jitter: f64 },
    Explicit(Vec<f64>),
}

impl InitialCondition {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "uniform" => Ok(Self::Uniform),
            "from_profile" | "profile" => Ok(Self::FromProfile { jitter: 0.0 }),
            other => Err(Error::Config(format!("unknown initial condition '{}'", other))),
        }
    }
}

/// Initial phases for `sample`; `density` is required for
/// [`InitialCondition::FromProfile`] and must have one probability density
/// per disorder component.
pub fn prepare_initial(
    kind: &InitialCondition,
    sample: &DisorderSample,
    density: Option<&ProfileField>,
    seed: u64,
) -> Result<Vec<f64>> {
    let mut rng = rng::stream(seed, rng::streams::INITIAL);
    match kind {
        InitialCondition::Uniform => Ok((0..sample.n()).map(|_| rng.random::<f64>() * TAU).collect()),
        InitialCondition::Explicit(p) => {
            if p.len() != sample.n() {
                return Err(Error::Config(format!("{} phases for {} rotators", p.len(), sample.n())));
            }
            Ok(p.clone())
        }
        InitialCondition::FromProfile { jitter } => {
            let density = density.ok_or_else(|| Error::Config("profile start needs a density".into()))?;
            let law = sample.law();
            if density.grid().n_components() != law.n_components() {
                return Err(Error::Config("density does not match the disorder law".into()));
            }
            let h = density.grid().dtheta();
            let cdfs: Vec<Vec<f64>> = (0..law.n_components())
                .map(|k| {
                    let v = density.component(k);
                    let mut cdf = Vec::with_capacity(v.len() + 1);
                    cdf.push(0.0);
                    let mut acc = 0.0;
                    for j in 0..v.len() {
                        acc += 0.5 * h * (v[j] + v[(j + 1) % v.len()]);
                        cdf.push(acc);
                    }
                    cdf
                })
                .collect();
            let phases = sample
                .assignments()
                .iter()
                .map(|&s| {
                    let cdf = &cdfs[law.dense_index(s).unwrap()];
                    let u = rng.random::<f64>() * cdf[cdf.len() - 1];
                    let j = cdf.partition_point(|&c| c <= u).clamp(1, cdf.len() - 1) - 1;
                    let frac = (u - cdf[j]) / (cdf[j + 1] - cdf[j]);
                    let mut phi = h * (j as f64 + frac);
                    if *jitter > 0.0 {
                        let z: f64 = rng.sample(StandardNormal);
                        phi += jitter * z;
                    }
                    phi.rem_euclid(TAU)
                })
                .collect();
            Ok(phases)
        }
    }
}

/// Parameters of the window-by-window phase tracking.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackConfig {
    /// Window length `T` in real time.
    pub window: f64,
    /// Tube radius `sigma` in the dual norm.
    pub sigma: f64,
    /// Euler-Maruyama step.
    pub dt: f64,
    /// Tube monitoring interval inside a window, in steps.
    pub monitor_every: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrackRecord {
    pub n: usize,
    /// Real time `T_n`.
    pub time: f64,
    /// Rescaled time `T_n / sqrt(N)`.
    pub rescaled: f64,
    /// Unwrapped phase `psi_n`.
    pub psi: f64,
    /// `||mu_{T_n} - q_{psi_{n-1}}||` in the dual norm.
    pub nu_norm: f64,
    pub in_tube: bool,
}

#[derive(Clone, Debug, Default)]
pub struct PhaseTrack {
    pub n_rotators: usize,
    pub records: Vec<TrackRecord>,
    /// Real time at which the trajectory left the tube, if it did.
    pub exit_time: Option<f64>,
}

impl PhaseTrack {
    pub fn write_csv<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,T_n,psi_n,nu_norm,in_tube")?;
        for r in &self.records {
            writeln!(w, "{},{:.6},{:.12},{:.6e},{}", r.n, r.time, r.psi, r.nu_norm, r.in_tube as u8)?;
        }
        Ok(())
    }
}

/// Advances `ens` until its empirical measure is within `radius` of the
/// circle of profiles, checking every `check` time units up to `max_time`.
/// Returns the projected phase.
pub fn relax_to_tube(
    ens: &mut RotatorEnsemble,
    model: &SpectralModel,
    radius: f64,
    dt: f64,
    check: f64,
    max_time: f64,
) -> Result<f64> {
    let t0 = ens.t();
    loop {
        let s = ens.spectrum(model.n_modes());
        if let Ok((proj, dist)) = model.distance_to_circle(&s, None) {
            if dist <= radius {
                return Ok(proj.psi);
            }
        }
        if ens.t() - t0 >= max_time {
            return Err(Error::OutsideTube(format!(
                "no approach to the circle of profiles within t = {}",
                max_time
            )));
        }
        ens.advance(check, dt);
    }
}

/// Tracks the phase over `n_windows` windows starting from the current state
/// of `ens`. `observe` receives every monitored snapshot `(t, spectrum)`
/// together with the current window index.
pub fn track_phase<F: FnMut(usize, f64, &Spectrum)>(
    ens: &mut RotatorEnsemble,
    model: &SpectralModel,
    cfg: &TrackConfig,
    n_windows: usize,
    psi_start: Option<f64>,
    mut observe: F,
) -> Result<PhaseTrack> {
    let n = ens.n();
    let sq = (n as f64).sqrt();
    let m = model.n_modes();
    let s0 = ens.spectrum(m);
    let (proj0, d0) = model.distance_to_circle(&s0, psi_start)?;
    let mut track = PhaseTrack { n_rotators: n, records: Vec::new(), exit_time: None };
    let mut psi = proj0.psi;
    track.records.push(TrackRecord {
        n: 0,
        time: ens.t(),
        rescaled: ens.t() / sq,
        psi,
        nu_norm: d0,
        in_tube: d0 < cfg.sigma,
    });
    observe(0, ens.t(), &s0);
    let steps = (cfg.window / cfg.dt).round().max(1.0) as usize;
    let every = cfg.monitor_every.max(1);
    for w in 1..=n_windows {
        for step in 1..=steps {
            ens.step(cfg.dt);
            if step % every == 0 && step != steps {
                let s = ens.spectrum(m);
                observe(w, ens.t(), &s);
                if model.distance_at(&s, psi) >= cfg.sigma {
                    track.exit_time = Some(ens.t());
                    return Ok(track);
                }
            }
        }
        let s = ens.spectrum(m);
        observe(w, ens.t(), &s);
        let nu_norm = model.distance_at(&s, psi);
        if nu_norm >= cfg.sigma {
            track.exit_time = Some(ens.t());
            return Ok(track);
        }
        match model.proj_m(&s, Some(psi)) {
            Ok(p) => psi = p.psi,
            Err(_) => {
                track.exit_time = Some(ens.t());
                return Ok(track);
            }
        }
        track.records.push(TrackRecord {
            n: w,
            time: ens.t(),
            rescaled: ens.t() / sq,
            psi,
            nu_norm,
            in_tube: true,
        });
    }
    Ok(track)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpeedEstimate {
    /// Slope of the phase against rescaled time.
    pub speed: f64,
    /// Standard error under a Brownian phase model.
    pub stderr: f64,
    /// Classical OLS standard error (white residuals), for reference.
    pub ols_stderr: f64,
    pub n_points: usize,
}

/// Least-squares slope of `psi_n` against `T_n / sqrt(N)`, using the records
/// with rescaled time at least `burn_in`.
///
/// The phase performs a random walk around its drift, so OLS residuals are
/// strongly correlated; the reported error uses the covariance
/// `sigma^2 min(s_i, s_j)` with `sigma^2` estimated from the increments.
pub fn wave_speed(track: &PhaseTrack, burn_in: f64) -> Result<SpeedEstimate> {
    let pts: Vec<&TrackRecord> = track.records.iter().filter(|r| r.rescaled >= burn_in).collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData(format!(
            "{} windows after burn-in, at least 10 required",
            pts.len()
        )));
    }
    let x: Vec<f64> = pts.iter().map(|r| r.rescaled).collect();
    let y: Vec<f64> = pts.iter().map(|r| r.psi).collect();
    let fit = stats::linear_fit(&x, &y)?;
    let mx = stats::mean(&x);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let w: Vec<f64> = x.iter().map(|v| (v - mx) / sxx).collect();
    let m = x.len() - 1;
    let mut ss = 0.0;
    let mut span = 0.0;
    for i in 0..m {
        let dx = x[i + 1] - x[i];
        let dy = y[i + 1] - y[i];
        ss += (dy - fit.slope * dx).powi(2);
        span += dx;
    }
    let sigma2 = ss / span * m as f64 / (m as f64 - 1.0);
    // w^T C w with C_ij = min(s_i, s_j): sum over increments of (tail sum of w)^2 dx
    let mut tail = 0.0;
    let mut quad = 0.0;
    for i in (1..x.len()).rev() {
        tail += w[i];
        quad += tail * tail * (x[i] - x[i - 1]);
    }
    Ok(SpeedEstimate {
        speed: fit.slope,
        stderr: (sigma2 * quad).sqrt(),
        ols_stderr: fit.slope_stderr,
        n_points: pts.len(),
    })
}

/// Combines estimates from independent noise seeds of one sample.
pub fn combine_speeds(est: &[SpeedEstimate]) -> SpeedEstimate {
    let n = est.len() as f64;
    SpeedEstimate {
        speed: est.iter().map(|e| e.speed).sum::<f64>() / n,
        stderr: (est.iter().map(|e| e.stderr * e.stderr).sum::<f64>()).sqrt() / n,
        ols_stderr: (est.iter().map(|e| e.ols_stderr * e.ols_stderr).sum::<f64>()).sqrt() / n,
        n_points: est.iter().map(|e| e.n_points).sum(),
    }
}

/// Settings of one tracked trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct SimParams {
    pub dt: f64,
    /// Window length in real time.
    pub window: f64,
    pub sigma: f64,
    /// Horizon in rescaled time `t / sqrt(N)`.
    pub t_final: f64,
    /// Burn-in constant `c`: records before `c log N / sqrt(N)` (rescaled)
    /// are ignored by the speed fit.
    pub burn_in_c: f64,
    pub monitor_every: usize,
    pub ic: InitialCondition,
}

impl SimParams {
    pub fn new(model: &SpectralModel, n: usize, sigma: f64, window: f64) -> Self {
        Self {
            dt: 5e-3,
            window,
            sigma,
            t_final: 5.0,
            burn_in_c: default_burn_in_c(model.gap(), n),
            monitor_every: 20,
            ic: InitialCondition::FromProfile { jitter: 0.0 },
        }
    }

    /// Rejects steps above `1e-2` and windows shorter than `max(1, min_window)`.
    pub fn validate(&self, min_window: f64) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 1e-2) {
            return Err(Error::Config(format!("dt = {} outside (0, 0.01]", self.dt)));
        }
        if self.window < min_window.max(1.0) - 1e-12 {
            return Err(Error::Config(format!(
                "window T = {} is shorter than the required {}",
                self.window,
                min_window.max(1.0)
            )));
        }
        if !(self.sigma > 0.0) {
            return Err(Error::Config("tube radius must be positive".into()));
        }
        Ok(())
    }

    pub fn burn_in(&self, n: usize) -> f64 {
        let nf = n as f64;
        self.burn_in_c * nf.ln() / nf.sqrt()
    }

    pub fn n_windows(&self, n: usize) -> usize {
        (self.t_final * (n as f64).sqrt() / self.window).ceil() as usize
    }
}

/// Shortest window `T >= 1` with `exp(-gamma_L T) <= 1 / (4 C_L C_P)`, using
/// the estimated constants of `model`, rounded up to a multiple of `0.01`.
pub fn minimal_window(model: &SpectralModel) -> f64 {
    let c_l = model.semigroup_bound(1.0).c_l;
    let t = (4.0 * c_l * model.projection_constant()).ln() / model.gap();
    (t.max(1.0) * 100.0).ceil() / 100.0
}

/// The constant making the burn-in `c log N / sqrt(N)` equal to `5 / gamma_L`
/// in real time.
pub fn default_burn_in_c(gap: f64, n: usize) -> f64 {
    5.0 / (gap * (n as f64).ln().max(1.0))
}

/// Simulates one noise realization of `sample` and tracks its phase. Uniform
/// starts first relax until within `sigma / 2` of the circle of profiles.
pub fn run_trajectory<F: FnMut(usize, f64, &Spectrum)>(
    model: &SpectralModel,
    sample: &DisorderSample,
    params: &SimParams,
    seed: u64,
    observe: F,
) -> Result<PhaseTrack> {
    let profile = model.profile();
    let phases = prepare_initial(&params.ic, sample, Some(profile.field()), seed)?;
    let mut ens = RotatorEnsemble::new(sample, profile.k, profile.delta, phases, seed)?;
    let start = match params.ic {
        InitialCondition::Uniform => Some(relax_to_tube(&mut ens, model, 0.5 * params.sigma, params.dt, 0.5, 200.0)?),
        _ => None,
    };
    let cfg = TrackConfig {
        window: params.window,
        sigma: params.sigma,
        dt: params.dt,
        monitor_every: params.monitor_every,
    };
    track_phase(&mut ens, model, &cfg, params.n_windows(sample.n()), start, observe)
}

/// Speed estimate of one disorder sample over several noise realizations.
#[derive(Clone, Debug)]
pub struct SampleSpeed {
    /// Combined estimate over the realizations with enough in-tube windows.
    pub estimate: SpeedEstimate,
    pub tracks: Vec<PhaseTrack>,
    /// Realizations that left the tube before providing enough windows.
    pub rejected: usize,
}

/// Tracks `seeds.len()` noise realizations in parallel and combines the speed
/// estimates of those that stay in the tube long enough. Fails when none does.
pub fn sample_speed(
    model: &SpectralModel,
    sample: &DisorderSample,
    params: &SimParams,
    seeds: &[u64],
) -> Result<SampleSpeed> {
    let burn_in = params.burn_in(sample.n());
    let tracks: Vec<PhaseTrack> = seeds
        .par_iter()
        .map(|&seed| run_trajectory(model, sample, params, seed, |_, _, _| {}))
        .collect::<Result<_>>()?;
    let mut ests = Vec::new();
    let mut last_err = None;
    for t in &tracks {
        match wave_speed(t, burn_in) {
            Ok(e) => ests.push(e),
            Err(e @ Error::InsufficientData(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    if ests.is_empty() {
        return Err(last_err.unwrap_or_else(|| Error::InsufficientData("no realizations".into())));
    }
    Ok(SampleSpeed { estimate: combine_speeds(&ests), rejected: tracks.len() - ests.len(), tracks })
}

fn phi_functions(z: Complex64) -> (Complex64, Complex64) {
    if z.norm() < 1e-3 {
        let phi1 = 1.0 + z / 2.0 + z * z / 6.0 + z * z * z / 24.0 + z * z * z * z / 120.0;
        let phi2 = 0.5 + z / 6.0 + z * z / 24.0 + z * z * z / 120.0 + z * z * z * z / 720.0;
        (phi1, phi2)
    } else {
        let e = z.exp();
        ((e - 1.0) / z, (e - 1.0 - z) / (z * z))
    }
}

/// Dual norm of `Z(t) = nu_t - exp(tL) nu_0 - int_0^t exp((t-s)L)(D_N - d/dtheta R_N(nu_s)) ds`
/// at each snapshot of a window.
///
/// `snapshots` are `(t, empirical spectrum)` in real time; `nu_s` is taken
/// relative to the profile at phase `psi_frame`. The convolution integral is
/// integrated exactly in the eigenbasis of `L` with the forcing interpolated
/// linearly between snapshots.
pub fn mild_residual(
    snapshots: &[(f64, Spectrum)],
    model: &SpectralModel,
    xi: &[f64],
    n: usize,
    psi_frame: f64,
) -> Result<Vec<f64>> {
    if snapshots.len() < 2 {
        return Err(Error::InsufficientData("a window needs at least two snapshots".into()));
    }
    let q = model.profile().spectrum().resized(model.n_modes());
    let nus: Vec<Spectrum> = snapshots
        .iter()
        .map(|(_, s)| &s.resized(model.n_modes()).rotated(model.psi() - psi_frame) - &q)
        .map(|s| s.without_mean())
        .collect();
    let forcing: Vec<Vec<f64>> = nus
        .iter()
        .map(|nu| {
            let (d, r) = model.mild_terms(xi, n, nu);
            (&d - &r.derivative()).to_vector()
        })
        .collect();
    let targets: Vec<Vec<f64>> = nus.iter().map(|s| s.to_vector()).collect();
    let preds = match model.semigroup_path() {
        SemigroupPath::Eigen => mild_eigen(snapshots, model, &targets[0], &forcing),
        SemigroupPath::Pade => mild_dense(snapshots, model, &targets[0], &forcing),
    };
    Ok(preds
        .iter()
        .zip(&targets)
        .map(|(p, t)| {
            let resid: Vec<f64> = t.iter().zip(p).map(|(a, b)| a - b).collect();
            model.hm1_norm_vec(&resid)
        })
        .collect())
}

fn mild_eigen(snapshots: &[(f64, Spectrum)], model: &SpectralModel, nu0: &[f64], forcing: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let lambdas = model.eigenvalues();
    let g: Vec<Vec<Complex64>> = forcing.iter().map(|f| model.to_eigen(f)).collect();
    let mut y = model.to_eigen(nu0);
    let mut out = vec![nu0.to_vec()];
    for m in 1..snapshots.len() {
        let h = snapshots[m].0 - snapshots[m - 1].0;
        for j in 0..y.len() {
            let z = lambdas[j] * h;
            let (p1, p2) = phi_functions(z);
            y[j] = z.exp() * y[j] + h * ((p1 - p2) * g[m - 1][j] + p2 * g[m][j]);
        }
        out.push(model.from_eigen(&y));
    }
    out
}

/// Same recursion with dense propagators from the exponential of the
/// augmented matrix `[[hL, I, 0], [0, 0, I], [0, 0, 0]]`, whose first block
/// row is `[exp(hL), phi_1(hL), phi_2(hL)]`.
fn mild_dense(snapshots: &[(f64, Spectrum)], model: &SpectralModel, nu0: &[f64], forcing: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let dim = model.dim();
    let l = model.matrix();
    let mut cache: Option<(f64, Mat<f64>)> = None;
    let mut x = nu0.to_vec();
    let mut out = vec![x.clone()];
    for m in 1..snapshots.len() {
        let h = snapshots[m].0 - snapshots[m - 1].0;
        let stale = cache.as_ref().map_or(true, |(hc, _)| (hc - h).abs() > 1e-12 * h.abs());
        if stale {
            let aug = Mat::from_fn(3 * dim, 3 * dim, |i, j| {
                if i < dim && j < dim {
                    h * l[(i, j)]
                } else if j == i + dim {
                    1.0
                } else {
                    0.0
                }
            });
            cache = Some((h, linalg::expm(&aug)));
        }
        let e = &cache.as_ref().unwrap().1;
        let mut next = vec![0.0; dim];
        for (i, v) in next.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..dim {
                let p1 = e[(i, dim + j)];
                let p2 = e[(i, 2 * dim + j)];
                acc += e[(i, j)] * x[j] + h * ((p1 - p2) * forcing[m - 1][j] + p2 * forcing[m][j]);
            }
            *v = acc;
        }
        x = next;
        out.push(x.clone());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::disorder::balanced_assignment;

    #[test]
    fn deterministic_given_seed() {
        let law = DisorderLaw::two_point(1.0).unwrap();
        let s = balanced_assignment(&law, 50).unwrap();
        let p = prepare_initial(&InitialCondition::Uniform, &s, None, 3).unwrap();
        let mut a = RotatorEnsemble::new(&s, 2.0, 0.1, p.clone(), 9).unwrap();
        let mut b = RotatorEnsemble::new(&s, 2.0, 0.1, p, 9).unwrap();
        a.advance(1.0, 0.01);
        b.advance(1.0, 0.01);
        assert_eq!(a.phases(), b.phases());
    }

    #[test]
    fn synthetic_linear_track() {
        let records = (0..40)
            .map(|n| TrackRecord {
                n,
                time: n as f64,
                rescaled: n as f64 / 10.0,
                psi: 1.0 + 0.3 * n as f64 / 10.0,
                nu_norm: 0.0,
                in_tube: true,
            })
            .collect();
        let track = PhaseTrack { n_rotators: 100, records, exit_time: None };
        let e = wave_speed(&track, 0.0).unwrap();
        assert!((e.speed - 0.3).abs() < 1e-12);
        assert!(e.stderr < 1e-10);
    }

    #[test]
    fn explicit_initial_roundtrip() {
        let law = DisorderLaw::two_point(1.0).unwrap();
        let s = balanced_assignment(&law, 4).unwrap();
        let phases = vec![0.1, 0.2, 3.0, 6.0];
        let p = prepare_initial(&InitialCondition::Explicit(phases.clone()), &s, None, 0).unwrap();
        assert_eq!(p, phases);
    }
}
