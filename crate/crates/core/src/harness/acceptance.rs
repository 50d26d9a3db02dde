//! The acceptance suite: twelve end-to-end checks of the numerics against
//! independent oracles, convergence exponents and statistical agreement.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng as _;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::oracles;
use crate::asymptotics::{expansion_defect, Delta0Context};
use crate::disorder::{sample_iid, DisorderLaw, DisorderSample};
use crate::error::{Error, Result};
use crate::fp_pde::{decay_rate_to_m, default_dt, PdeState};
use crate::linalg::c64;
use crate::linops::SpectralModel;
use crate::rng::{self, replica_seed, streams};
use crate::sde_sim::{self, mild_residual, prepare_initial, run_trajectory, InitialCondition, RotatorEnsemble, SimParams};
use crate::spaces::{hminus1_norm, GridSpec, ProfileField, Spectrum};
use crate::stationary::{build_profile, solve_r};
use crate::stats;

pub const R0_TOL: f64 = 1e-10;
pub const C_B_TOL: f64 = 1e-8;
pub const SYMMETRIC_DRIFT_TOL: f64 = 1e-10;
pub const MIN_EXPONENT: f64 = 1.9;
pub const P0_TOL: f64 = 1e-6;
pub const ZERO_EIGENVALUE_TOL: f64 = 1e-6;
pub const KERNEL_ANGLE_TOL: f64 = 1e-4;
pub const DECAY_FRACTION: f64 = 0.95;
pub const WAVE_SPEED_EXPONENT: (f64, f64) = (-0.65, -0.35);
pub const NOISE_TERM_EXPONENT: (f64, f64) = (-0.55, -0.35);
pub const CHAOS_EXPONENT: (f64, f64) = (-0.6, -0.4);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    /// Deterministic checks only (no particle ensembles).
    Fast,
    Full,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            other => Err(Error::Config(format!("unknown suite '{}', expected fast or full", other))),
        }
    }
}

impl Suite {
    pub fn criteria(self) -> Vec<u8> {
        match self {
            Suite::Fast => (1..=7).collect(),
            Suite::Full => (1..=12).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub detail: String,
}

impl fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {:<32} {} ({:.1} s of {:.0} s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

/// Master seed for the statistical criteria.
#[derive(Clone, Copy, Debug)]
pub struct AcceptanceOptions {
    pub seed: u64,
}

impl Default for AcceptanceOptions {
    fn default() -> Self {
        Self { seed: 20_240_601 }
    }
}

const NAMES: [&str; 12] = [
    "fixed point vs Bessel oracle",
    "c_b identity",
    "symmetric drift null",
    "first-order drift",
    "profile expansion",
    "projection consistency",
    "spectral gap and decay",
    "wave speed vs drift",
    "N-scaling of the wave",
    "noise-term scaling",
    "propagation of chaos",
    "symmetric quench",
];

const BUDGETS: [f64; 12] = [1.0, 5.0, 30.0, 120.0, 60.0, 120.0, 300.0, 2700.0, 3600.0, 1800.0, 1200.0, 900.0];

/// Runs criterion `id` (1 to 12). Errors inside a criterion count as
/// failures and are reported in the detail string.
pub fn run_criterion(id: u8, opts: &AcceptanceOptions) -> CriterionResult {
    assert!((1..=12).contains(&id), "criterion ids run from 1 to 12");
    let start = Instant::now();
    let outcome = match id {
        1 => c1_fixed_point(),
        2 => c2_c_b(),
        3 => c3_symmetric_null(opts),
        4 => c4_first_order_drift(),
        5 => c5_expansion(),
        6 => c6_projection(opts),
        7 => c7_gap_and_decay(opts),
        8 => c8_wave_speed(opts),
        9 => c9_n_scaling(opts),
        10 => c10_noise_term(opts),
        11 => c11_chaos(opts),
        _ => c12_symmetric_quench(opts),
    };
    let seconds = start.elapsed().as_secs_f64();
    let budget = BUDGETS[id as usize - 1];
    let (ok, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {}", e)),
    };
    if seconds > budget {
        detail.push_str(&format!("; over the runtime budget of {} s", budget));
    }
    CriterionResult {
        id,
        name: NAMES[id as usize - 1],
        passed: ok && seconds <= budget,
        seconds,
        budget_seconds: budget,
        detail,
    }
}

pub fn run_suite(suite: Suite, opts: &AcceptanceOptions) -> Vec<CriterionResult> {
    suite
        .criteria()
        .into_iter()
        .map(|id| {
            let r = run_criterion(id, opts);
            log::info!("{}", r);
            r
        })
        .collect()
}

pub fn write_verdicts<W: Write>(results: &[CriterionResult], mut w: W) -> Result<()> {
    writeln!(w, "criterion,name,passed,seconds,budget_seconds,detail")?;
    for r in results {
        writeln!(
            w,
            "{},{},{},{:.3},{},\"{}\"",
            r.id,
            r.name,
            r.passed,
            r.seconds,
            r.budget_seconds,
            r.detail.replace('"', "'")
        )?;
    }
    Ok(())
}

type Outcome = Result<(bool, String)>;

fn grids(law: &DisorderLaw) -> [GridSpec; 2] {
    [GridSpec::standard(law), GridSpec::fine(law)]
}

fn in_range(v: f64, r: (f64, f64)) -> bool {
    v >= r.0 && v <= r.1
}

fn c1_fixed_point() -> Outcome {
    let law = DisorderLaw::two_point(1.0)?;
    let mut worst: f64 = 0.0;
    for k in [1.5, 2.0, 4.0] {
        let oracle = oracles::r0_bessel(k).ok_or_else(|| Error::Config(format!("oracle has no root at K = {}", k)))?;
        worst = worst.max((solve_r(k, 0.0, &law)? - oracle).abs());
    }
    let none_at_one = matches!(solve_r(1.0, 0.0, &law), Err(Error::NoSynchronizedSolution { .. }));
    Ok((
        worst <= R0_TOL && none_at_one,
        format!("max |r - r_oracle| = {:.2e}, no root at K = 1: {}", worst, none_at_one),
    ))
}

fn c2_c_b() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in [1.2, 2.0, 4.0] {
        worst = worst.max((Delta0Context::new(k)?.c_b() - 1.0).abs());
    }
    Ok((worst <= C_B_TOL, format!("max |c_b - 1| = {:.2e}", worst)))
}

fn c3_symmetric_null(opts: &AcceptanceOptions) -> Outcome {
    let laws = [DisorderLaw::two_point(1.0)?, DisorderLaw::new(&[1.0, 10.0], &[0.25, 0.25])?];
    let configs = [(2.0, 0.3), (5.0, 0.1)];
    let mut rng = rng::stream(opts.seed, streams::PERTURBATION);
    let mut worst: f64 = 0.0;
    for (law, (k, delta)) in laws.iter().zip(configs) {
        let d = law.d();
        for grid in grids(law) {
            let model = SpectralModel::assemble(&build_profile(k, delta, &grid, 0.0)?, grid.n_modes())?;
            let beta = model.drift_coefficients();
            for trial in 0..100 {
                let mut half: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
                // balanced vectors go through the checked entry point
                let balanced = d > 1 && trial % 2 == 0;
                if balanced {
                    let mean = half.iter().sum::<f64>() / d as f64;
                    half.iter_mut().for_each(|x| *x -= mean);
                }
                let xi: Vec<f64> = (0..2 * d).map(|j| half[(law.signed_index(j).unsigned_abs() - 1) as usize]).collect();
                let b = if balanced {
                    model.drift_b(&xi)?
                } else {
                    beta.iter().zip(&xi).map(|(a, x)| a * x).sum()
                };
                worst = worst.max(b.abs());
            }
        }
    }
    Ok((worst <= SYMMETRIC_DRIFT_TOL, format!("max |b| = {:.2e} over 400 symmetric vectors", worst)))
}

fn c4_first_order_drift() -> Outcome {
    let law = DisorderLaw::two_point(1.0)?;
    let deltas = [0.01, 0.02, 0.04];
    let xi = [-1.0, 1.0];
    let mut exps = Vec::new();
    for grid in grids(&law) {
        let mut errs = Vec::new();
        for &delta in &deltas {
            let model = SpectralModel::assemble(&build_profile(2.0, delta, &grid, 0.0)?, grid.n_modes())?;
            let first = crate::asymptotics::b_first_order(&law, &xi, delta);
            errs.push((model.drift_b(&xi)? - first).abs());
        }
        exps.push(stats::power_law_exponent(&deltas, &errs)?);
    }
    let min = exps.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((min >= MIN_EXPONENT, format!("exponents {:.3} / {:.3}", exps[0], exps[1])))
}

fn c5_expansion() -> Outcome {
    let law = DisorderLaw::two_point(1.0)?;
    let ctx = Delta0Context::new(2.0)?;
    let deltas = [0.01, 0.02, 0.04];
    let mut exps = Vec::new();
    for grid in grids(&law) {
        let errs: Vec<f64> = deltas.iter().map(|&d| expansion_defect(&ctx, d, &grid)).collect::<Result<_>>()?;
        exps.push(stats::power_law_exponent(&deltas, &errs)?);
    }
    let min = exps.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((min >= MIN_EXPONENT, format!("exponents {:.3} / {:.3}", exps[0], exps[1])))
}

/// A smooth random zero-mean perturbation with coefficients decaying like `n^-2`.
pub fn smooth_perturbation(rng: &mut rng::Rng, n_comp: usize, n_modes: usize) -> Spectrum {
    let mut u = Spectrum::zeros(n_comp, n_modes);
    for k in 0..n_comp {
        for n in 1..=n_modes {
            let c: f64 = rng.sample(StandardNormal);
            let s: f64 = rng.sample(StandardNormal);
            let scale = 1.0 / (n * n) as f64;
            u.set(k, n, c * scale, s * scale);
        }
    }
    u
}

fn c6_projection(opts: &AcceptanceOptions) -> Outcome {
    let law = DisorderLaw::two_point(1.0)?;
    let ctx = Delta0Context::new(2.0)?;
    let mut rng = rng::stream(opts.seed, streams::PERTURBATION);
    let mut worst_p: f64 = 0.0;
    let mut exps = Vec::new();
    for grid in grids(&law) {
        let m = grid.n_modes();
        let model0 = SpectralModel::assemble(&build_profile(2.0, 0.0, &grid, 0.0)?, m)?;
        for _ in 0..50 {
            let u = smooth_perturbation(&mut rng, 2, m);
            let scale = 1.0 / model0.hm1_norm_vec(&u.to_vector());
            let u = &u * scale;
            worst_p = worst_p.max((model0.p(&u) - ctx.p0_explicit(law.lambdas(), &u)?).abs());
        }
        let model = SpectralModel::assemble(&build_profile(2.0, 0.05, &grid, 0.0)?, m)?;
        let q = model.profile().spectrum().resized(m);
        let u = smooth_perturbation(&mut rng, 2, m);
        let u = &u * (1.0 / model.hm1_norm_vec(&u.to_vector()));
        let eps = [0.01, 0.02, 0.04];
        let errs: Vec<f64> = eps
            .iter()
            .map(|&e| {
                let h = &q + &(&u * e);
                let proj = model.proj_m(&h, Some(model.psi()))?;
                // p is normalized against d/dtheta q, which is minus the
                // derivative of q_psi in psi
                Ok((proj.psi - (model.psi() - e * model.p(&u))).abs())
            })
            .collect::<Result<_>>()?;
        exps.push(stats::power_law_exponent(&eps, &errs)?);
    }
    let min = exps.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((
        worst_p <= P0_TOL && min >= MIN_EXPONENT,
        format!("max |p - p_explicit| = {:.2e}, projection error exponents {:.3} / {:.3}", worst_p, exps[0], exps[1]),
    ))
}

/// Angle between the kernel eigenvector and the profile derivative in the
/// dual inner product.
pub fn kernel_angle(model: &SpectralModel) -> f64 {
    let v = model.eigenvector(model.zero_index());
    let t = model.tangent();
    let w = model.hm1_weights();
    let mut vt = c64::new(0.0, 0.0);
    let mut vv = 0.0;
    for i in 0..v.len() {
        vt += v[i].conj() * t[i] * w[i];
        vv += v[i].norm_sqr() * w[i];
    }
    let alpha = vt / vv;
    let mut resid = 0.0;
    let mut along = 0.0;
    for i in 0..v.len() {
        let a = v[i] * alpha;
        resid += (c64::new(t[i], 0.0) - a).norm_sqr() * w[i];
        along += a.norm_sqr() * w[i];
    }
    (resid / along).sqrt().atan()
}

fn c7_gap_and_decay(opts: &AcceptanceOptions) -> Outcome {
    let law = DisorderLaw::two_point(1.0)?;
    let mut ok = true;
    let mut detail = Vec::new();
    for grid in grids(&law) {
        let m = grid.n_modes();
        let profile = build_profile(2.0, 0.05, &grid, 0.0)?;
        let model = SpectralModel::assemble(&profile, m)?;
        let lambda0 = model.zero_eigenvalue().norm();
        let angle = kernel_angle(&model);
        let gap = model.gap();
        let others_ok = model
            .eigenvalues()
            .iter()
            .enumerate()
            .all(|(j, l)| j == model.zero_index() || l.re <= -gap + 1e-12);
        let mut rng = rng::stream(opts.seed, streams::PERTURBATION);
        let mut min_rate = f64::INFINITY;
        for _ in 0..3 {
            let u = smooth_perturbation(&mut rng, 2, m);
            let u = &u * (1e-3 / model.hm1_norm_vec(&u.to_vector()));
            let start = ProfileField::from_spectrum(&grid, &(profile.spectrum() + &u));
            let fit = decay_rate_to_m(&PdeState::new(&start, 2.0, 0.05)?, &model, (1.0, 8.0), 0.25)?;
            min_rate = min_rate.min(fit.rate.unwrap_or(f64::NEG_INFINITY));
        }
        ok &= lambda0 <= ZERO_EIGENVALUE_TOL
            && angle <= KERNEL_ANGLE_TOL
            && gap > 0.0
            && others_ok
            && min_rate >= DECAY_FRACTION * gap;
        detail.push(format!(
            "M={}: |lambda_0| = {:.1e}, angle = {:.1e}, gamma_L = {:.4}, min decay rate = {:.4}",
            m, lambda0, angle, gap, min_rate
        ));
    }
    Ok((ok, detail.join("; ")))
}

/// Model, tube radius and window of the configuration `K = 4`,
/// `omega = +-1/2`, `delta = 1` used by the wave criteria.
pub struct WaveSetup {
    pub model: SpectralModel,
    pub sigma: f64,
    pub window: f64,
}

impl WaveSetup {
    pub fn new() -> Result<Self> {
        let law = DisorderLaw::two_point(0.5)?;
        let grid = GridSpec::standard(&law);
        let model = SpectralModel::assemble(&build_profile(4.0, 1.0, &grid, 0.0)?, grid.n_modes())?;
        let sigma = model.calibrate_tube(crate::linops::TUBE_TRIALS, 1);
        let window = sde_sim::minimal_window(&model);
        Ok(Self { model, sigma, window })
    }

    pub fn params(&self, n: usize) -> SimParams {
        SimParams::new(&self.model, n, self.sigma, self.window)
    }
}

fn noise_seeds(master: u64, sample: u64, count: u64) -> Vec<u64> {
    (0..count).map(|j| replica_seed(replica_seed(master, sample), 1000 + j)).collect()
}

fn c8_wave_speed(opts: &AcceptanceOptions) -> Outcome {
    let setup = WaveSetup::new()?;
    let model = &setup.model;
    let law = model.profile().law().clone();
    let n = 400;
    let params = setup.params(n);
    let mut agree = 0;
    let mut sign_ok = true;
    let mut worst_z: f64 = 0.0;
    let mut rejected = 0;
    for i in 0..10u64 {
        let sample = sample_iid(&law, n, replica_seed(opts.seed, i))?;
        let xi = sample.xi();
        let b = model.drift_b(&xi)?;
        let run = sde_sim::sample_speed(model, &sample, &params, &noise_seeds(opts.seed, i, 3))?;
        rejected += run.rejected;
        let est = run.estimate;
        let z = (est.speed - b).abs() / est.stderr;
        worst_z = worst_z.max(z);
        if z <= 3.0 {
            agree += 1;
        }
        let first: f64 = xi.iter().zip(law.omegas()).map(|(a, w)| a * w).sum();
        if first.abs() > 2.0 * est.stderr && est.speed.signum() != first.signum() {
            sign_ok = false;
        }
    }
    Ok((
        agree >= 8 && sign_ok,
        format!(
            "{}/10 samples within 3 stderr (worst {:.2}), signs consistent: {}, realizations out of tube: {}",
            agree, worst_z, sign_ok, rejected
        ),
    ))
}

/// Noise realizations per size in the scaling criterion. At `N = 100` most
/// realizations leave the tube early, so more are drawn.
const SCALING_REALIZATIONS: [u64; 3] = [16, 4, 4];
/// Realizations that must stay in the tube long enough at every size.
const MIN_REALIZATIONS: usize = 3;

/// Samples with fluctuation `xi^{+1} = 1/2`, one standard deviation of an
/// iid draw, for `N = 100, 400, 1600`.
pub fn scaling_samples(law: &DisorderLaw) -> Result<Vec<DisorderSample>> {
    [(100usize, 55usize), (400, 210), (1600, 820)]
        .iter()
        .map(|&(n, plus)| DisorderSample::from_counts(law, &[n - plus, plus]))
        .collect()
}

fn c9_n_scaling(opts: &AcceptanceOptions) -> Outcome {
    let setup = WaveSetup::new()?;
    let model = &setup.model;
    let law = model.profile().law().clone();
    let mut ns = Vec::new();
    let mut speeds = Vec::new();
    let mut used = Vec::new();
    for (i, sample) in scaling_samples(&law)?.iter().enumerate() {
        let n = sample.n();
        let params = setup.params(n);
        let seeds = noise_seeds(opts.seed, 100 + i as u64, SCALING_REALIZATIONS[i]);
        let run = sde_sim::sample_speed(model, sample, &params, &seeds)?;
        ns.push(n as f64);
        speeds.push(run.estimate.speed / (n as f64).sqrt());
        used.push(seeds.len() - run.rejected);
    }
    let enough = used.iter().all(|&u| u >= MIN_REALIZATIONS);
    let exp = stats::power_law_exponent(&ns, &speeds)?;
    Ok((
        enough && speeds.iter().all(|s| *s > 0.0) && in_range(exp, WAVE_SPEED_EXPONENT),
        format!("unrescaled speeds {:?}, exponent {:.3}, realizations in tube {:?} of {:?}", speeds, exp, used, SCALING_REALIZATIONS),
    ))
}

/// Largest mild-formulation residual over the windows of one trajectory.
pub fn sup_mild_residual(
    model: &SpectralModel,
    sample: &DisorderSample,
    params: &SimParams,
    seed: u64,
) -> Result<f64> {
    let mut windows: Vec<Vec<(f64, Spectrum)>> = vec![Vec::new()];
    let track = run_trajectory(model, sample, params, seed, |w, t, s| {
        if w >= windows.len() {
            let last = windows.last().and_then(|v| v.last()).cloned();
            windows.push(last.into_iter().collect());
        }
        windows[w].push((t, s.clone()));
    })?;
    let xi = sample.xi();
    let mut sup: f64 = 0.0;
    for w in 1..track.records.len() {
        let r = mild_residual(&windows[w], model, &xi, sample.n(), track.records[w - 1].psi)?;
        sup = r.iter().cloned().fold(sup, f64::max);
    }
    Ok(sup)
}

const NOISE_TERM_REALIZATIONS: u64 = 32;

fn c10_noise_term(opts: &AcceptanceOptions) -> Outcome {
    let setup = WaveSetup::new()?;
    let model = &setup.model;
    let law = model.profile().law().clone();
    let mut ns = Vec::new();
    let mut sups = Vec::new();
    for (i, sample) in scaling_samples(&law)?.iter().enumerate() {
        let n = sample.n();
        let mut params = setup.params(n);
        params.monitor_every = 10;
        params.t_final = 10.0 * params.window / (n as f64).sqrt();
        let vals: Vec<f64> = noise_seeds(opts.seed, 200 + i as u64, NOISE_TERM_REALIZATIONS)
            .par_iter()
            .map(|&s| sup_mild_residual(model, sample, &params, s))
            .collect::<Result<_>>()?;
        ns.push(n as f64);
        sups.push(stats::mean(&vals));
    }
    let exp = stats::power_law_exponent(&ns, &sups)?;
    Ok((in_range(exp, NOISE_TERM_EXPONENT), format!("sup residuals {:?}, exponent {:.3}", sups, exp)))
}

/// Initial densities `exp(1.5 cos theta)`, normalized per component.
pub fn chaos_initial(grid: &GridSpec) -> ProfileField {
    let z = 2.0 * PI * oracles::bessel_i(0, 1.5);
    ProfileField::from_fn(grid, |_, t| (1.5 * t.cos()).exp() / z)
}

fn c11_chaos(opts: &AcceptanceOptions) -> Outcome {
    let law = DisorderLaw::two_point(1.0)?;
    let grid = GridSpec::standard(&law);
    let (k, delta, horizon) = (2.0, 0.05, 2.0);
    let p0 = chaos_initial(&grid);
    let mut pde = PdeState::new(&p0, k, delta)?;
    pde.evolve(horizon, default_dt(&grid))?;
    let pt = pde.spectrum();
    let mut ns = Vec::new();
    let mut rms = Vec::new();
    for (i, (n, reps)) in [(1_000usize, 16u64), (10_000, 8), (100_000, 4)].into_iter().enumerate() {
        let sample = sample_iid(&law, n, replica_seed(opts.seed, 300 + i as u64))?;
        let sq: Vec<f64> = noise_seeds(opts.seed, 300 + i as u64, reps)
            .par_iter()
            .map(|&s| {
                let phases = prepare_initial(&InitialCondition::FromProfile { jitter: 0.0 }, &sample, Some(&p0), s)?;
                let mut ens = RotatorEnsemble::new(&sample, k, delta, phases, s)?;
                ens.advance(horizon, 1e-3);
                let d = &ens.spectrum(grid.n_modes()) - &pt;
                Ok(hminus1_norm(law.lambdas(), &d)?.powi(2))
            })
            .collect::<Result<_>>()?;
        ns.push(n as f64);
        rms.push(stats::mean(&sq).sqrt());
    }
    let exp = stats::power_law_exponent(&ns, &rms)?;
    Ok((in_range(exp, CHAOS_EXPONENT), format!("rms distances {:?}, exponent {:.3}", rms, exp)))
}

fn c12_symmetric_quench(opts: &AcceptanceOptions) -> Outcome {
    let setup = WaveSetup::new()?;
    let model = &setup.model;
    let law = model.profile().law().clone();
    let n = 400;
    let alternating: Vec<i32> = (0..n).map(|j| if j % 2 == 0 { 1 } else { -1 }).collect();
    let sample = DisorderSample::from_assignments(&law, alternating)?;
    let params = setup.params(n);
    let ratios: Vec<f64> = noise_seeds(opts.seed, 400, 5)
        .par_iter()
        .map(|&s| {
            let e = sde_sim::sample_speed(model, &sample, &params, &[s])?.estimate;
            Ok(e.speed / e.stderr)
        })
        .collect::<Result<_>>()?;
    let ok = ratios.iter().filter(|r| r.abs() <= 3.0).count();
    Ok((ok == 5, format!("{}/5 seeds with |slope| <= 3 stderr, slope/stderr = {:?}", ok, ratios)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("fast".parse::<Suite>().unwrap(), Suite::Fast);
        assert!(matches!("".parse::<Suite>(), Err(Error::Config(_))));
        assert_eq!(Suite::Full.criteria().len(), 12);
    }
}
