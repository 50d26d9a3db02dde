//! Finite symmetric disorder laws, their samples and the fluctuation vector.
//!
//! A law with `d` positive frequencies has `2d` components indexed by the
//! signed integers `-d..=-1, 1..=d`. Internally components are stored densely:
//! dense index `j < d` is signed index `j - d`, dense index `j >= d` is
//! `j - d + 1`, so mirroring `k -> -k` maps `j -> 2d - 1 - j`.

use std::io::{BufRead, Write};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Debug, PartialEq)]
pub struct DisorderLaw {
    d: usize,
    omegas: Vec<f64>,
    lambdas: Vec<f64>,
}

impl DisorderLaw {
    /// Builds the symmetric law from its positive half.
    ///
    /// `omegas[k-1]` is the frequency of component `k` and `lambdas[k-1]` its
    /// weight; component `-k` gets `-omegas[k-1]` and the same weight.
    /// Weights summing to 1 within `1e-9` are renormalized exactly.
    pub fn new(positive_omegas: &[f64], positive_lambdas: &[f64]) -> Result<Self> {
        let d = positive_omegas.len();
        if d == 0 {
            return Err(Error::InvalidLaw("at least one frequency is required".into()));
        }
        if positive_lambdas.len() != d {
            return Err(Error::InvalidLaw(format!(
                "{} frequencies but {} weights",
                d,
                positive_lambdas.len()
            )));
        }
        for (k, w) in positive_omegas.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::InvalidLaw(format!("omega^{} = {} is not positive", k + 1, w)));
            }
        }
        let mut sorted = positive_omegas.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidLaw("frequencies must be distinct".into()));
        }
        if positive_lambdas.iter().any(|l| !l.is_finite() || *l <= 0.0) {
            return Err(Error::InvalidLaw("weights must be positive".into()));
        }
        let total: f64 = positive_lambdas.iter().sum();
        if (2.0 * total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidLaw(format!(
                "weights sum to {} over the full law, expected 1",
                2.0 * total
            )));
        }
        let mut omegas = Vec::with_capacity(2 * d);
        let mut lambdas = Vec::with_capacity(2 * d);
        for j in 0..2 * d {
            let k = dense_to_signed(d, j);
            let p = k.unsigned_abs() as usize - 1;
            omegas.push(k.signum() as f64 * positive_omegas[p]);
            lambdas.push(positive_lambdas[p] / (2.0 * total));
        }
        Ok(Self { d, omegas, lambdas })
    }

    /// The two-point law `omega = +-w` with equal weights.
    pub fn two_point(w: f64) -> Result<Self> {
        Self::new(&[w], &[0.5])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_components(&self) -> usize {
        2 * self.d
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn omega(&self, dense: usize) -> f64 {
        self.omegas[dense]
    }

    pub fn lambda(&self, dense: usize) -> f64 {
        self.lambdas[dense]
    }

    pub fn signed_index(&self, dense: usize) -> i32 {
        dense_to_signed(self.d, dense)
    }

    pub fn dense_index(&self, signed: i32) -> Option<usize> {
        let d = self.d as i32;
        match signed {
            s if (-d..0).contains(&s) => Some((s + d) as usize),
            s if (1..=d).contains(&s) => Some((s + d - 1) as usize),
            _ => None,
        }
    }

    pub fn mirror(&self, dense: usize) -> usize {
        2 * self.d - 1 - dense
    }

    /// Covariance matrix of the limiting Gaussian fluctuation vector:
    /// `diag(lambda) - lambda lambda^T`.
    pub fn fluctuation_covariance(&self) -> Vec<Vec<f64>> {
        let n = self.n_components();
        (0..n)
            .map(|k| {
                (0..n)
                    .map(|l| {
                        let diag = if k == l { self.lambdas[k] } else { 0.0 };
                        diag - self.lambdas[k] * self.lambdas[l]
                    })
                    .collect()
            })
            .collect()
    }
}

fn dense_to_signed(d: usize, dense: usize) -> i32 {
    if dense < d {
        dense as i32 - d as i32
    } else {
        dense as i32 - d as i32 + 1
    }
}

/// A realized assignment of disorder indices to `N` rotators.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderSample {
    law: DisorderLaw,
    assignments: Vec<i32>,
    counts: Vec<usize>,
}

impl DisorderSample {
    pub fn from_assignments(law: &DisorderLaw, assignments: Vec<i32>) -> Result<Self> {
        let mut counts = vec![0usize; law.n_components()];
        for (position, &k) in assignments.iter().enumerate() {
            let j = law
                .dense_index(k)
                .ok_or(Error::InvalidAssignment { position, index: k as i64 })?;
            counts[j] += 1;
        }
        if assignments.is_empty() {
            return Err(Error::InvalidAssignment { position: 0, index: 0 });
        }
        Ok(Self { law: law.clone(), assignments, counts })
    }

    /// Builds a sample with prescribed counts per dense component, assigned
    /// in blocks.
    pub fn from_counts(law: &DisorderLaw, counts: &[usize]) -> Result<Self> {
        if counts.len() != law.n_components() {
            return Err(Error::InvalidLaw(format!(
                "expected {} counts, got {}",
                law.n_components(),
                counts.len()
            )));
        }
        let mut assignments = Vec::with_capacity(counts.iter().sum());
        for (j, &c) in counts.iter().enumerate() {
            assignments.extend(std::iter::repeat_n(law.signed_index(j), c));
        }
        Self::from_assignments(law, assignments)
    }

    /// Counts realizing a prescribed fluctuation vector `xi` at size `n`,
    /// rounded to the nearest integers and rebalanced to sum to `n`.
    pub fn with_fluctuation(law: &DisorderLaw, n: usize, xi: &[f64]) -> Result<Self> {
        let sq = (n as f64).sqrt();
        let mut counts: Vec<usize> = law
            .lambdas()
            .iter()
            .zip(xi)
            .map(|(l, x)| (n as f64 * l + x * sq).round().max(0.0) as usize)
            .collect();
        let total: usize = counts.iter().sum();
        let last = counts.len() - 1;
        if total > n {
            counts[last] = counts[last].saturating_sub(total - n);
        } else {
            counts[last] += n - total;
        }
        Self::from_counts(law, &counts)
    }

    pub fn law(&self) -> &DisorderLaw {
        &self.law
    }

    pub fn n(&self) -> usize {
        self.assignments.len()
    }

    pub fn assignments(&self) -> &[i32] {
        &self.assignments
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Empirical weights `N^k / N`.
    pub fn empirical(&self) -> Vec<f64> {
        let n = self.n() as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Fluctuation vector `xi^k = sqrt(N) (N^k / N - lambda^k)`.
    pub fn xi(&self) -> Vec<f64> {
        let sq = (self.n() as f64).sqrt();
        self.empirical()
            .iter()
            .zip(self.law.lambdas())
            .map(|(e, l)| sq * (e - l))
            .collect()
    }

    pub fn max_abs_xi(&self) -> f64 {
        self.xi().iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Checks the growth condition `max |xi| <= N^zeta`.
    pub fn admissibility(&self, zeta: f64) -> Admissibility {
        let max_abs_xi = self.max_abs_xi();
        let bound = (self.n() as f64).powf(zeta);
        Admissibility { max_abs_xi, bound, admissible: max_abs_xi <= bound }
    }

    /// The sample with every index replaced by its mirror `-k`.
    pub fn mirrored(&self) -> Self {
        let assignments = self.assignments.iter().map(|k| -k).collect();
        Self::from_assignments(&self.law, assignments).expect("mirror of a valid sample is valid")
    }

    /// Fixture format: a header line `d N seed` followed by one signed index
    /// per line.
    pub fn write_fixture<W: Write>(&self, mut w: W, seed: u64) -> Result<()> {
        writeln!(w, "{} {} {}", self.law.d(), self.n(), seed)?;
        for k in &self.assignments {
            writeln!(w, "{}", k)?;
        }
        Ok(())
    }

    pub fn read_fixture<R: BufRead>(law: &DisorderLaw, r: R) -> Result<(Self, u64)> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty disorder fixture".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("bad fixture header '{}'", header)));
        }
        let parse = |s: &str| s.parse::<u64>().map_err(|e| Error::Parse(format!("{}: {}", s, e)));
        let (d, n, seed) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
        if d as usize != law.d() {
            return Err(Error::Parse(format!("fixture has d = {}, law has d = {}", d, law.d())));
        }
        let mut assignments = Vec::with_capacity(n as usize);
        for (position, line) in lines.enumerate() {
            let line = line?;
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let k: i64 = t
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: {}", position + 2, e)))?;
            if k == 0 || k.unsigned_abs() > d {
                return Err(Error::InvalidAssignment { position, index: k });
            }
            assignments.push(k as i32);
        }
        if assignments.len() as u64 != n {
            return Err(Error::Parse(format!(
                "fixture declares N = {} but lists {} indices",
                n,
                assignments.len()
            )));
        }
        Ok((Self::from_assignments(law, assignments)?, seed))
    }

    /// CSV with columns `k,omega,lambda,count,lambda_n,xi`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "k,omega,lambda,count,lambda_n,xi")?;
        let emp = self.empirical();
        let xi = self.xi();
        for j in 0..self.law.n_components() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                self.law.signed_index(j),
                self.law.omega(j),
                self.law.lambda(j),
                self.counts[j],
                emp[j],
                xi[j]
            )?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Admissibility {
    pub max_abs_xi: f64,
    pub bound: f64,
    pub admissible: bool,
}

/// Draws `n` iid disorder indices from `law` using the disorder stream of
/// `seed`.
pub fn sample_iid(law: &DisorderLaw, n: usize, seed: u64) -> Result<DisorderSample> {
    if n < law.n_components() {
        return Err(Error::InvalidLaw(format!(
            "N = {} is smaller than the number of components {}",
            n,
            law.n_components()
        )));
    }
    let mut rng = rng::stream(seed, rng::streams::DISORDER);
    let mut cumulative = Vec::with_capacity(law.n_components());
    let mut acc = 0.0;
    for l in law.lambdas() {
        acc += l;
        cumulative.push(acc);
    }
    let assignments = (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            let j = cumulative.iter().position(|&c| u < c).unwrap_or(cumulative.len() - 1);
            law.signed_index(j)
        })
        .collect();
    DisorderSample::from_assignments(law, assignments)
}

/// Alternating `+k, -k` assignment cycling through the components, exactly
/// balanced when `n` is a multiple of `2d`.
pub fn balanced_assignment(law: &DisorderLaw, n: usize) -> Result<DisorderSample> {
    let d = law.d() as i32;
    let assignments = (0..n)
        .map(|i| {
            let k = (i / 2) as i32 % d + 1;
            if i % 2 == 0 {
                k
            } else {
                -k
            }
        })
        .collect();
    DisorderSample::from_assignments(law, assignments)
}
