//! Subcommand runners. Each reads a [`Config`], writes CSV outputs and a
//! `manifest.json` into the output directory and returns the manifest.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use super::config::{Config, ExperimentConfig};
use super::manifest::{ExperimentManifest, ManifestBuilder};
use crate::asymptotics::{b_first_order, expansion_defect, v_squared, Delta0Context};
use crate::disorder::{sample_iid, DisorderLaw, DisorderSample};
use crate::error::{Error, Result};
use crate::fp_pde::{decay_rate_to_m, PdeState};
use crate::linops::SpectralModel;
use crate::rng::{self, streams};
use crate::sde_sim::{self, InitialCondition, SimParams};
use crate::spaces::{GridSpec, ProfileField};
use crate::stationary::build_profile;

fn model_for(e: &ExperimentConfig, grid: &GridSpec) -> Result<SpectralModel> {
    SpectralModel::assemble(&build_profile(e.k, e.delta, grid, 0.0)?, e.n_modes)
}

/// Fluctuation vector from `[drift] xi`, a sample fixture, or the default
/// `+1` on component `+1` and `-1` on component `-1`.
fn xi_for(cfg: &Config, e: &ExperimentConfig) -> Result<Vec<f64>> {
    if let Some(xi) = cfg.list("drift", "xi")? {
        return Ok(xi);
    }
    if let Some(path) = &e.sample {
        let (s, _) = DisorderSample::read_fixture(&e.law, BufReader::new(File::open(path)?))?;
        return Ok(s.xi());
    }
    let mut xi = vec![0.0; e.law.n_components()];
    xi[e.law.dense_index(1).unwrap()] = 1.0;
    xi[e.law.dense_index(-1).unwrap()] = -1.0;
    Ok(xi)
}

pub fn run_stationary(cfg: &Config, out: &Path) -> Result<ExperimentManifest> {
    let e = ExperimentConfig::from_config(cfg)?;
    let grid = e.grid()?;
    let mut m = ManifestBuilder::new("stationary", cfg, out)?;
    let p = build_profile(e.k, e.delta, &grid, 0.0)?;
    p.field().write_csv(m.create("profile.csv")?)?;
    let residual = p.stationarity_residual();
    m.constant("r_delta", p.r);
    m.constant("stationarity_residual", residual);
    let mut w = m.create("report.csv")?;
    writeln!(w, "quantity,value")?;
    writeln!(w, "r,{:.17e}", p.r)?;
    writeln!(w, "residual,{:.6e}", residual)?;
    for (k, z) in p.z.iter().enumerate() {
        writeln!(w, "Z^{},{:.17e}", e.law.signed_index(k), z)?;
        m.constant(&format!("Z^{}", e.law.signed_index(k)), *z);
    }
    drop(w);
    m.finish()
}

pub fn run_spectrum(cfg: &Config, out: &Path) -> Result<ExperimentManifest> {
    let e = ExperimentConfig::from_config(cfg)?;
    let grid = e.grid()?;
    let mut m = ManifestBuilder::new("spectrum", cfg, out)?;
    let model = model_for(&e, &grid)?;
    let mut w = m.create("eigenvalues.csv")?;
    writeln!(w, "re,im")?;
    let mut ev: Vec<_> = model.eigenvalues().to_vec();
    ev.sort_by(|a, b| b.re.partial_cmp(&a.re).unwrap());
    for l in ev {
        writeln!(w, "{:.17e},{:.17e}", l.re, l.im)?;
    }
    drop(w);
    let tangent = model.from_vector(model.tangent());
    let kernel_residual = model.hm1_norm_vec(&model.to_vector(&model.apply(&tangent)?));
    let bound = model.semigroup_bound(1.0);
    m.constant("r_delta", model.profile().r);
    m.constant("gamma_L", model.gap());
    m.constant("zero_mode_residual", kernel_residual);
    m.constant("C_P", model.projection_constant());
    m.constant("C_P_norm", model.projection_norm());
    m.constant("C_L", bound.c_l);
    m.constant("C_L_operator", model.semigroup_operator_bound(1.0).c_l);
    m.constant("min_window", crate::sde_sim::minimal_window(&model));
    m.constant("sigma", model.calibrate_tube(crate::linops::TUBE_TRIALS, e.seed));
    m.constant("eigenvector_condition", model.eigenvector_condition());
    m.finish()
}

pub fn run_drift(cfg: &Config, out: &Path) -> Result<ExperimentManifest> {
    let e = ExperimentConfig::from_config(cfg)?;
    let grid = e.grid()?;
    let mut m = ManifestBuilder::new("drift", cfg, out)?;
    let model = model_for(&e, &grid)?;
    let xi = xi_for(cfg, &e)?;
    let b = model.drift_b(&xi)?;
    let first = b_first_order(&e.law, &xi, e.delta);
    let mut w = m.create("drift.csv")?;
    writeln!(w, "component,omega,xi,beta")?;
    for (k, beta) in model.drift_coefficients().iter().enumerate() {
        writeln!(w, "{},{},{},{:.17e}", e.law.signed_index(k), e.law.omega(k), xi[k], beta)?;
    }
    drop(w);
    m.constant("b", b);
    m.constant("first_order", first);
    m.finish()
}

pub fn run_expand(cfg: &Config, out: &Path) -> Result<ExperimentManifest> {
    let e = ExperimentConfig::from_config(cfg)?;
    let grid = e.grid()?;
    let mut m = ManifestBuilder::new("expand", cfg, out)?;
    let ctx = Delta0Context::new(e.k)?;
    let deltas = cfg.list("expand", "deltas")?.unwrap_or_else(|| vec![0.01, 0.02, 0.04]);
    let xi = xi_for(cfg, &e)?;
    let c_b = ctx.c_b();
    let mut w = m.create("expansion.csv")?;
    writeln!(w, "delta,defect,b_full,b_first_order,c_b,v2_quadratic,v2_single_power,v2_full")?;
    for &delta in &deltas {
        let model = SpectralModel::assemble(&build_profile(e.k, delta, &grid, 0.0)?, e.n_modes)?;
        let beta = model.drift_coefficients();
        let v2 = v_squared(&e.law, delta, Some(&beta));
        writeln!(
            w,
            "{},{:.6e},{:.12e},{:.12e},{:.12},{:.12e},{:.12e},{:.12e}",
            delta,
            expansion_defect(&ctx, delta, &grid)?,
            model.drift_b(&xi)?,
            b_first_order(&e.law, &xi, delta),
            c_b,
            v2.quadratic_form,
            v2.single_power,
            v2.full.unwrap_or(f64::NAN)
        )?;
    }
    drop(w);
    m.constant("c_b", c_b);
    m.constant("r_0", ctx.r0);
    m.finish()
}

pub fn run_simulate(cfg: &Config, out: &Path) -> Result<ExperimentManifest> {
    let e = ExperimentConfig::from_config(cfg)?;
    let grid = e.grid()?;
    let mut m = ManifestBuilder::new("simulate", cfg, out)?;
    m.seed("master", e.seed);
    let model = model_for(&e, &grid)?;
    let sample = match &e.sample {
        Some(path) => DisorderSample::read_fixture(&e.law, BufReader::new(File::open(path)?))?.0,
        None => sample_iid(&e.law, e.n, e.seed)?,
    };
    sample.write_fixture(m.create("sample.txt")?, e.seed)?;
    let sigma = match e.sigma {
        Some(s) => s,
        None => model.calibrate_tube(crate::linops::TUBE_TRIALS, e.seed),
    };
    let min_window = sde_sim::minimal_window(&model);
    let mut params = SimParams::new(&model, sample.n(), sigma, e.window.unwrap_or(min_window));
    params.dt = e.dt;
    params.t_final = e.t_final;
    params.ic = InitialCondition::parse(&e.ic)?;
    if let Some(c) = e.burn_in_c {
        params.burn_in_c = c;
    }
    params.validate(min_window)?;
    m.constant("window", params.window);
    let noise_seed = rng::replica_seed(e.seed, streams::NOISE);
    m.seed("noise", noise_seed);
    let every = e.snapshot_every.max(1);
    let mut snapshots = Vec::new();
    let mut last_window = usize::MAX;
    let track = sde_sim::run_trajectory(&model, &sample, &params, noise_seed, |w, t, s| {
        if w % every == 0 && w != last_window {
            last_window = w;
            snapshots.push((w, t, s.clone()));
        }
    })?;
    track.write_csv(m.create("track.csv")?)?;
    for (w, t, s) in &snapshots {
        let mut f = m.create(&format!("snapshots/window_{:05}.csv", w))?;
        writeln!(f, "# t = {}", t)?;
        ProfileField::from_spectrum(&grid, s).write_csv(f)?;
    }
    let xi = sample.xi();
    let b = model.drift_b(&xi)?;
    let first = b_first_order(&e.law, &xi, e.delta);
    let est = sde_sim::wave_speed(&track, params.burn_in(sample.n()));
    let mut w = m.create("speed.txt")?;
    match &est {
        Ok(s) => writeln!(w, "slope {:.12e}\nstderr {:.12e}", s.speed, s.stderr)?,
        Err(err) => writeln!(w, "slope nan\nstderr nan\n# {}", err)?,
    }
    writeln!(w, "b {:.12e}\nfirst_order {:.12e}", b, first)?;
    drop(w);
    m.constant("r_delta", model.profile().r);
    m.constant("gamma_L", model.gap());
    m.constant("sigma", sigma);
    m.constant("C_P", model.projection_constant());
    m.constant("burn_in_c", params.burn_in_c);
    m.constant("b", b);
    if let Some(t) = track.exit_time {
        m.constant("exit_time", t);
    }
    if let Ok(s) = est {
        m.constant("speed", s.speed);
        m.constant("speed_stderr", s.stderr);
    }
    m.finish()
}

pub fn run_pde(cfg: &Config, out: &Path) -> Result<ExperimentManifest> {
    let e = ExperimentConfig::from_config(cfg)?;
    let grid = e.grid()?;
    let mut m = ManifestBuilder::new("pde", cfg, out)?;
    m.seed("perturbation", e.seed);
    let model = model_for(&e, &grid)?;
    let t_end: f64 = cfg.parse_or("pde", "t_end", 8.0)?;
    let eps: f64 = cfg.parse_or("pde", "epsilon", 1e-3)?;
    let fit_start: f64 = cfg.parse_or("pde", "fit_start", 1.0)?;
    let every: f64 = cfg.parse_or("pde", "sample_every", 0.25)?;
    let mut rng = rng::stream(e.seed, streams::PERTURBATION);
    let u = super::acceptance::smooth_perturbation(&mut rng, e.law.n_components(), e.n_modes);
    let u = &u * (eps / model.hm1_norm_vec(&u.to_vector()));
    let start = ProfileField::from_spectrum(&grid, &(model.profile().spectrum() + &u));
    let state = PdeState::new(&start, e.k, e.delta)?;
    let fit = decay_rate_to_m(&state, &model, (fit_start, t_end), every)?;
    let mut w = m.create("decay.csv")?;
    writeln!(w, "t,distance,psi")?;
    for j in 0..fit.times.len() {
        writeln!(w, "{:.6},{:.12e},{:.12e}", fit.times[j], fit.distances[j], fit.phases[j])?;
    }
    drop(w);
    let mut s = state.clone();
    s.evolve(t_end, crate::fp_pde::default_dt(&grid))?;
    s.field().write_csv(m.create("final_field.csv")?)?;
    m.constant("gamma_L", model.gap());
    m.constant("monotone", if fit.monotone { 1.0 } else { 0.0 });
    if let Some(r) = fit.rate {
        m.constant("decay_rate", r);
    }
    m.finish()
}

/// Figure data: `fig1` (fixed-point curve and a `d = 2` profile), `fig2`
/// (density over time from a uniform start) and `fig3` (phase tracks of
/// several disorder realizations).
pub fn run_reproduce(figure: &str, seed: u64, out: &Path) -> Result<ExperimentManifest> {
    let mut cfg = Config::default();
    cfg.set("reproduce", "figure", figure);
    cfg.set("reproduce", "seed", &seed.to_string());
    let mut m = ManifestBuilder::new("reproduce", &cfg, out)?;
    m.seed("master", seed);
    match figure {
        "fig1" => fig1(&mut m)?,
        "fig2" => fig2(&mut m, seed)?,
        "fig3" => fig3(&mut m, seed)?,
        other => return Err(Error::Config(format!("unknown figure '{}', expected fig1, fig2 or fig3", other))),
    }
    m.finish()
}

fn fig1(m: &mut ManifestBuilder) -> Result<()> {
    let law = DisorderLaw::new(&[1.0, 10.0], &[0.25, 0.25])?;
    let (k, delta) = (5.0, 0.1);
    let rs: Vec<f64> = (0..=200).map(|j| j as f64 / 200.0).collect();
    let curve = crate::stationary::fixed_point_curve(k, delta, &law, &rs)?;
    let mut w = m.create("fig1_curve.csv")?;
    writeln!(w, "r,psi_delta")?;
    for (r, v) in curve {
        writeln!(w, "{},{:.17e}", r, v)?;
    }
    drop(w);
    let grid = GridSpec::standard(&law);
    let p = build_profile(k, delta, &grid, 0.0)?;
    p.field().write_csv(m.create("fig1_profile.csv")?)?;
    m.constant("r_delta", p.r);
    Ok(())
}

fn fig2(m: &mut ManifestBuilder, seed: u64) -> Result<()> {
    let law = DisorderLaw::two_point(1.0)?;
    let (k, delta, n) = (6.0, 1.0, 600);
    let sample = sample_iid(&law, n, seed)?;
    sample.write_fixture(m.create("fig2_sample.txt")?, seed)?;
    let phases = sde_sim::prepare_initial(&InitialCondition::Uniform, &sample, None, seed)?;
    let mut ens = sde_sim::RotatorEnsemble::new(&sample, k, delta, phases, seed)?;
    let bins = 64;
    let mut dens = m.create("fig2_density.csv")?;
    let mut order = m.create("fig2_order.csv")?;
    writeln!(dens, "t,theta,density")?;
    writeln!(order, "t,r_hat,phase")?;
    let horizon = 6.0 + 5.0 * (n as f64).sqrt();
    let dt = 5e-3;
    let frame = 1.0;
    let mut t = 0.0;
    loop {
        let (r, phase) = ens.order_parameter();
        writeln!(order, "{:.3},{:.6},{:.6}", t, r, phase)?;
        let mut hist = vec![0usize; bins];
        for &p in ens.phases() {
            hist[((p / std::f64::consts::TAU * bins as f64) as usize).min(bins - 1)] += 1;
        }
        for (b, c) in hist.iter().enumerate() {
            let theta = (b as f64 + 0.5) * std::f64::consts::TAU / bins as f64;
            let d = *c as f64 * bins as f64 / (n as f64 * std::f64::consts::TAU);
            writeln!(dens, "{:.3},{:.6},{:.6}", t, theta, d)?;
        }
        if t >= horizon {
            break;
        }
        ens.advance(frame, dt);
        t += frame;
    }
    let p = build_profile(k, delta, &GridSpec::standard(&law), 0.0)?;
    m.constant("r_delta", p.r);
    Ok(())
}

fn fig3(m: &mut ManifestBuilder, seed: u64) -> Result<()> {
    let setup = super::acceptance::WaveSetup::new()?;
    let model = &setup.model;
    let law = model.profile().law().clone();
    let n = 400;
    let params = setup.params(n);
    let mut w = m.create("fig3_tracks.csv")?;
    writeln!(w, "realization,n,rescaled_time,psi,b")?;
    for i in 0..8u64 {
        let sample = sample_iid(&law, n, rng::replica_seed(seed, i))?;
        let b = model.drift_b(&sample.xi())?;
        let track = sde_sim::run_trajectory(model, &sample, &params, rng::replica_seed(seed, 1000 + i), |_, _, _| {})?;
        for r in &track.records {
            writeln!(w, "{},{},{:.6},{:.9},{:.9}", i, r.n, r.rescaled, r.psi, b)?;
        }
    }
    drop(w);
    m.constant("sigma", setup.sigma);
    m.constant("window", setup.window);
    m.constant("gamma_L", model.gap());
    Ok(())
}
