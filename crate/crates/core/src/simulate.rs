//! Simulation engine: data models M1–M7, dependence construction by sample
//! correlation and PFA, Monte Carlo replication of the FDP, and the
//! standard-deviation comparison and plug-in estimation studies.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::estimate::plugin_variance_cached;
use crate::matrix::{cholesky, pfa_reduce, sample_correlation, CholeskyFactor, CorrelationMatrix, Matrix, PfaPolicy};
use crate::num::{map_indexed, mean_var};
use crate::pi0::{Pi0Kind, Pi0Method};
use crate::rng::{label, Stream};
use crate::theory::{
    expansion_terms, fdp_limit, fdp_variance_cached, fdp_variance_independent, z_half, NullCovCache, TestProblem,
    VarianceDecomposition,
};

pub const DEFAULT_P: usize = 2000;
pub const DEFAULT_N: usize = 400;
pub const DEFAULT_PFA_THRESHOLD: f64 = 0.05;
pub const DEFAULT_REPS: usize = 1000;

const LOADINGS_LABEL: u64 = 6;

/// Generative model for the rows whose sample correlation defines Σ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Model {
    /// iid N(0, 1).
    M1,
    /// Equicorrelated normal, off-diagonal 1/2.
    M2,
    /// iid normal except a trailing block mixing the first ten columns.
    M3,
    /// iid standard Cauchy.
    M4,
    /// Three normal factors with means -2, 1, 4 and U(-1, 1) loadings.
    M5,
    /// Two standard normal factors with U(-1, 1) loadings.
    M6,
    /// Nonlinear two-factor model with sine and signed exponential terms.
    M7,
}

impl Model {
    pub const ALL: [Model; 7] = [Model::M1, Model::M2, Model::M3, Model::M4, Model::M5, Model::M6, Model::M7];

    fn index(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.index())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .iter()
            .copied()
            .find(|m| {
                let name = m.index();
                s.len() == 2 && (s.starts_with('M') || s.starts_with('m')) && s[1..].parse::<u64>().ok() == Some(name)
            })
            .ok_or(Error::Domain("model must be one of M1..M7"))
    }
}

/// A data model at a given size.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelSpec {
    pub model: Model,
    pub p: usize,
    pub n: usize,
    pub pfa_threshold: f64,
    pub seed: u64,
}

impl ModelSpec {
    pub fn new(model: Model, seed: u64) -> Self {
        Self { model, p: DEFAULT_P, n: DEFAULT_N, pfa_threshold: DEFAULT_PFA_THRESHOLD, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p < 2 {
            return Err(Error::UnsupportedDimension { p: self.p, min: 2 });
        }
        if self.n < 2 {
            return Err(Error::Domain("n must be at least 2"));
        }
        if !(self.pfa_threshold > 0.0 && self.pfa_threshold <= 1.0) {
            return Err(Error::Domain("PFA threshold must lie in (0, 1]"));
        }
        if self.model == Model::M3 && self.p < M3_MIN_P {
            return Err(Error::UnsupportedDimension { p: self.p, min: M3_MIN_P });
        }
        Ok(())
    }
}

/// M3 needs ten base columns in addition to at least one dependent column.
pub const M3_MIN_P: usize = 11;

/// Size of M3's dependent block: ⌈p/20⌉ (100 of 2000).
pub fn m3_dependent_cols(p: usize) -> usize {
    p.div_ceil(20)
}

fn uniform_pm1(s: &mut Stream) -> f64 {
    2.0 * s.uniform() - 1.0
}

/// n×p data matrix drawn from the model. Row r uses its own stream, and
/// per-column loadings come from a separate stream, so the output depends
/// only on the `ModelSpec`.
pub fn gen_model(spec: &ModelSpec) -> Result<Matrix> {
    spec.validate()?;
    let (n, p) = (spec.n, spec.p);
    let mut ls = Stream::new(spec.seed, LOADINGS_LABEL, spec.model.index());
    let factors = match spec.model {
        Model::M5 => 3,
        Model::M6 | Model::M7 => 2,
        _ => 0,
    };
    let loadings: Vec<Vec<f64>> = (0..factors).map(|_| (0..p).map(|_| uniform_pm1(&mut ls)).collect()).collect();
    let model = spec.model;
    let rows: Vec<Vec<f64>> = map_indexed(n, |r| {
        let mut s = Stream::new(spec.seed, label::SIGMA, (model.index() << 40) | r as u64);
        let mut x = vec![0.0; p];
        match model {
            Model::M1 => s.fill_normal(&mut x),
            Model::M2 => {
                let w = s.normal();
                let a = libm::sqrt(0.5);
                for v in x.iter_mut() {
                    *v = a * w + a * s.normal();
                }
            }
            Model::M3 => {
                s.fill_normal(&mut x);
                let base: f64 = (0..10).map(|l| if l % 2 == 0 { x[l] } else { -x[l] }).sum::<f64>() / 5.0;
                let mix = libm::sqrt(1.0 - 10.0 / 25.0);
                for v in x[p - m3_dependent_cols(p)..].iter_mut() {
                    *v = base + mix * *v;
                }
            }
            Model::M4 => {
                for v in x.iter_mut() {
                    *v = s.cauchy();
                }
            }
            Model::M5 => {
                let w = [s.normal() - 2.0, s.normal() + 1.0, s.normal() + 4.0];
                for (j, v) in x.iter_mut().enumerate() {
                    *v = loadings[0][j] * w[0] + loadings[1][j] * w[1] + loadings[2][j] * w[2] + s.normal();
                }
            }
            Model::M6 => {
                let w = [s.normal(), s.normal()];
                for (j, v) in x.iter_mut().enumerate() {
                    *v = loadings[0][j] * w[0] + loadings[1][j] * w[1] + s.normal();
                }
            }
            Model::M7 => {
                let w = [s.normal(), s.normal()];
                for (j, v) in x.iter_mut().enumerate() {
                    let r2 = loadings[1][j];
                    let sign = if r2 > 0.0 {
                        1.0
                    } else if r2 < 0.0 {
                        -1.0
                    } else {
                        0.0
                    };
                    *v = libm::sin(loadings[0][j] * w[0]) + sign * libm::exp(libm::fabs(r2) * w[1]) + s.normal();
                }
            }
        }
        x
    });
    Matrix::from_vec(n, p, rows.into_iter().flatten().collect())
}

/// Σ after sample correlation and PFA.
#[derive(Debug, Clone)]
pub struct BuiltSigma {
    pub sigma: CorrelationMatrix,
    pub k_used: usize,
    pub metric: f64,
}

/// Sample correlation of [`gen_model`] followed by PFA with the criterion
/// policy at `spec.pfa_threshold`.
pub fn build_sigma(spec: &ModelSpec) -> Result<BuiltSigma> {
    let data = gen_model(spec)?;
    let initial = sample_correlation(&data)?;
    let r = pfa_reduce(&initial, PfaPolicy::Criterion(spec.pfa_threshold))?;
    Ok(BuiltSigma { sigma: r.sigma, k_used: r.k_used, metric: r.metric })
}

/// p1 alternatives sampled without replacement with μ_j = 2|z_{t/2}|.
/// The sign is immaterial: every formula depends on μ through ξ, which is
/// even in μ.
pub fn assign_signals(p: usize, p1: usize, t: f64, seed: u64) -> Result<TestProblem> {
    if p1 > p {
        return Err(Error::Domain("p1 cannot exceed p"));
    }
    let c = -z_half(t)?;
    let alts = Stream::new(seed, label::SIGNALS, 0).sample_indices(p, p1);
    TestProblem::with_signals(p, &alts, 2.0 * c, t)
}

/// Monte Carlo summary of the FDP at fixed (μ, Σ, t).
#[derive(Debug, Clone, PartialEq)]
pub struct McResult {
    pub fdp_samples: Vec<f64>,
    /// m(V̄, R̄) per replicate.
    pub m_samples: Vec<f64>,
    pub emp_mean: f64,
    /// Sample standard deviation, divisor reps - 1.
    pub emp_sd: f64,
    pub emp_var_of_m: f64,
}

/// Draws Z = μ + L·ε for replicate `r` from its own stream; `None` means Σ = I.
pub fn draw_statistics(problem: &TestProblem, chol: Option<&CholeskyFactor>, seed: u64, r: u64, out: &mut [f64]) {
    let mut s = Stream::new(seed, label::MONTE_CARLO, r);
    match chol {
        None => {
            for (o, &m) in out.iter_mut().zip(problem.mu()) {
                *o = m + s.normal();
            }
        }
        Some(l) => {
            let mut eps = vec![0.0; problem.p()];
            s.fill_normal(&mut eps);
            l.transform_into(problem.mu(), &eps, out);
        }
    }
}

/// Replicates the FDP `reps` times. Replicate r uses stream r, so results do
/// not depend on the number of workers.
pub fn mc_fdp(problem: &TestProblem, chol: Option<&CholeskyFactor>, reps: usize, seed: u64) -> Result<McResult> {
    if reps < 2 {
        return Err(Error::Domain("Monte Carlo needs at least two replicates"));
    }
    if let Some(l) = chol {
        if l.dim() != problem.p() {
            return Err(Error::DimensionMismatch { expected: problem.p(), found: l.dim() });
        }
    }
    let p = problem.p();
    let c = problem.c();
    let null = problem.null_mask();
    let pairs: Vec<(f64, f64)> = map_indexed(reps, |r| {
        let mut z = vec![0.0; p];
        draw_statistics(problem, chol, seed, r as u64, &mut z);
        let (mut v, mut total) = (0usize, 0usize);
        for (zj, &nj) in z.iter().zip(null) {
            if libm::fabs(*zj) > c {
                total += 1;
                if nj {
                    v += 1;
                }
            }
        }
        let fdp = if total == 0 { 0.0 } else { v as f64 / total as f64 };
        let (_, m) = expansion_terms(v as f64 / p as f64, total as f64 / p as f64, problem);
        (fdp, m)
    });
    let (fdp_samples, m_samples): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let (emp_mean, var) = mean_var(&fdp_samples);
    let (_, var_m) = mean_var(&m_samples);
    Ok(McResult { fdp_samples, m_samples, emp_mean, emp_sd: libm::sqrt(var), emp_var_of_m: var_m })
}

/// Source of wall-clock time in seconds; the std crate supplies a real one.
pub trait Clock {
    fn now(&self) -> f64;
}

/// Reports zero elapsed time.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now(&self) -> f64 {
        0.0
    }
}

/// One row of the standard-deviation comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Table2Config {
    pub t: f64,
    pub p1: usize,
    pub model: Model,
}

/// The 9 (t, p1) combinations crossed with the given models.
pub fn table2_grid(models: &[Model]) -> Vec<Table2Config> {
    let mut out = Vec::new();
    for &model in models {
        for &t in &[0.005, 0.02, 0.05] {
            for &p1 in &[50, 100, 200] {
                out.push(Table2Config { t, p1, model });
            }
        }
    }
    out
}

/// Settings shared by every configuration of a study.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StudySettings {
    pub p: usize,
    pub n: usize,
    pub pfa_threshold: f64,
    pub reps: usize,
    pub seed: u64,
    pub skip_eps: f64,
}

impl Default for StudySettings {
    fn default() -> Self {
        Self {
            p: DEFAULT_P,
            n: DEFAULT_N,
            pfa_threshold: DEFAULT_PFA_THRESHOLD,
            reps: DEFAULT_REPS,
            seed: 1,
            skip_eps: crate::theory::DEFAULT_SKIP_EPS,
        }
    }
}

impl StudySettings {
    pub fn model_spec(&self, model: Model) -> ModelSpec {
        ModelSpec { model, p: self.p, n: self.n, pfa_threshold: self.pfa_threshold, seed: self.seed }
    }
}

/// Asymptotic against empirical FDP standard deviation for one configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimulationReport {
    pub model: Model,
    pub t: f64,
    pub p1: usize,
    pub p: usize,
    pub n: usize,
    pub pfa_threshold: f64,
    pub reps: usize,
    pub seed: u64,
    pub k_pfa: usize,
    pub weak_dep: f64,
    pub cholesky_jitter: f64,
    pub asym_sd: f64,
    pub v1: f64,
    pub v2: f64,
    pub fdp_limit: f64,
    pub emp_sd: f64,
    pub emp_mean: f64,
    pub emp_var_of_m: f64,
    pub sigma_seconds: f64,
    pub variance_seconds: f64,
    pub mc_seconds: f64,
}

struct ModelCache {
    built: BuiltSigma,
    chol: Option<CholeskyFactor>,
    seconds: f64,
    null_cov: Vec<(f64, NullCovCache)>,
}

fn prepare_model(settings: &StudySettings, model: Model, clock: &dyn Clock) -> Result<ModelCache> {
    let start = clock.now();
    let built = build_sigma(&settings.model_spec(model))?;
    // M1 runs the pipeline as a no-op check; its Σ is the identity.
    let chol = if model == Model::M1 { None } else { Some(cholesky(&built.sigma)?) };
    Ok(ModelCache { built, chol, seconds: clock.now() - start, null_cov: Vec::new() })
}

fn variance_for(
    cache: &mut ModelCache,
    model: Model,
    problem: &TestProblem,
    skip_eps: f64,
) -> Result<VarianceDecomposition> {
    if model == Model::M1 {
        return Ok(fdp_variance_independent(problem));
    }
    let t = problem.t();
    let pos = match cache.null_cov.iter().position(|(ct, _)| *ct == t) {
        Some(i) => i,
        None => {
            cache.null_cov.push((t, NullCovCache::new(&cache.built.sigma, t, skip_eps)?));
            cache.null_cov.len() - 1
        }
    };
    fdp_variance_cached(problem, &cache.built.sigma, &cache.null_cov[pos].1)
}

/// Runs every configuration. Σ, its Cholesky factor and the null/null
/// covariances are computed once per model (and threshold) and reused.
pub fn run_table2(
    configs: &[Table2Config],
    settings: &StudySettings,
    clock: &dyn Clock,
) -> Result<Vec<SimulationReport>> {
    let mut caches: Vec<(Model, ModelCache)> = Vec::new();
    let mut out = Vec::with_capacity(configs.len());
    for cfg in configs {
        let idx = match caches.iter().position(|(m, _)| *m == cfg.model) {
            Some(i) => i,
            None => {
                caches.push((cfg.model, prepare_model(settings, cfg.model, clock)?));
                caches.len() - 1
            }
        };
        let cache = &mut caches[idx].1;
        let problem = assign_signals(settings.p, cfg.p1, cfg.t, settings.seed)?;
        let t0 = clock.now();
        let dec = variance_for(cache, cfg.model, &problem, settings.skip_eps)?;
        let t1 = clock.now();
        let mc = mc_fdp(&problem, cache.chol.as_ref(), settings.reps, settings.seed)?;
        let t2 = clock.now();
        out.push(SimulationReport {
            model: cfg.model,
            t: cfg.t,
            p1: cfg.p1,
            p: settings.p,
            n: settings.n,
            pfa_threshold: settings.pfa_threshold,
            reps: settings.reps,
            seed: settings.seed,
            k_pfa: cache.built.k_used,
            weak_dep: cache.built.metric,
            cholesky_jitter: cache.chol.as_ref().map_or(0.0, |c| c.jitter),
            asym_sd: dec.sd(),
            v1: dec.v1,
            v2: dec.v2,
            fdp_limit: fdp_limit(&problem),
            emp_sd: mc.emp_sd,
            emp_mean: mc.emp_mean,
            emp_var_of_m: mc.emp_var_of_m,
            sigma_seconds: cache.seconds,
            variance_seconds: t1 - t0,
            mc_seconds: t2 - t1,
        });
    }
    Ok(out)
}

/// Plug-in estimation study for one (model, t, p1).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Table3Config {
    pub model: Model,
    pub t: f64,
    pub p1: usize,
    pub methods: Vec<Pi0Method>,
}

/// Mean and standard deviation of the plug-in outputs for one π0 method.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Table3Row {
    pub method: Pi0Kind,
    pub sd_mean: f64,
    pub sd_sd: f64,
    pub p1_mean: f64,
    pub p1_sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Table3Report {
    pub model: Model,
    pub t: f64,
    pub p1: usize,
    pub p: usize,
    pub reps: usize,
    pub seed: u64,
    pub k_pfa: usize,
    /// Asymptotic SD at the true (μ, Σ).
    pub true_sd: f64,
    pub rows: Vec<Table3Row>,
    pub seconds: f64,
}

/// For each replicate, draws Z at the true (μ, Σ) and runs the plug-in
/// estimator under every requested π0 method.
pub fn run_table3(config: &Table3Config, settings: &StudySettings, clock: &dyn Clock) -> Result<Table3Report> {
    if config.methods.is_empty() {
        return Err(Error::Domain("at least one pi0 method is required"));
    }
    if settings.reps < 2 {
        return Err(Error::Domain("at least two replicates are required"));
    }
    let start = clock.now();
    let mut cache = prepare_model(settings, config.model, clock)?;
    let problem = assign_signals(settings.p, config.p1, config.t, settings.seed)?;
    let true_dec = variance_for(&mut cache, config.model, &problem, settings.skip_eps)?;
    let sigma =
        if config.model == Model::M1 { CorrelationMatrix::identity(settings.p) } else { cache.built.sigma.clone() };
    let null_cov = match cache.null_cov.first() {
        Some((_, c)) => c.clone(),
        None => NullCovCache::new(&sigma, config.t, settings.skip_eps)?,
    };
    let chol = cache.chol.as_ref();
    let per_rep: Vec<Result<Vec<(f64, f64)>>> = map_indexed(settings.reps, |r| {
        let mut z = vec![0.0; settings.p];
        draw_statistics(&problem, chol, settings.seed, r as u64, &mut z);
        config
            .methods
            .iter()
            .map(|m| {
                let seed = settings.seed ^ ((r as u64) << 20);
                let res = plugin_variance_cached(&z, &sigma, config.t, m, seed, &null_cov)?;
                Ok((res.decomposition.sd(), res.p1_hat as f64))
            })
            .collect()
    });
    let mut sds = vec![Vec::with_capacity(settings.reps); config.methods.len()];
    let mut p1s = vec![Vec::with_capacity(settings.reps); config.methods.len()];
    for r in per_rep {
        for (k, (sd, p1)) in r?.into_iter().enumerate() {
            sds[k].push(sd);
            p1s[k].push(p1);
        }
    }
    let rows = config
        .methods
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let (sd_mean, sd_var) = mean_var(&sds[k]);
            let (p1_mean, p1_var) = mean_var(&p1s[k]);
            Table3Row { method: m.kind(), sd_mean, sd_sd: libm::sqrt(sd_var), p1_mean, p1_sd: libm::sqrt(p1_var) }
        })
        .collect();
    Ok(Table3Report {
        model: config.model,
        t: config.t,
        p1: config.p1,
        p: settings.p,
        reps: settings.reps,
        seed: settings.seed,
        k_pfa: cache.built.k_used,
        true_sd: true_dec.sd(),
        rows,
        seconds: clock.now() - start,
    })
}

/// Model names joined with commas.
pub fn model_list(models: &[Model]) -> String {
    models.iter().map(|m| alloc::format!("{m}")).collect::<Vec<_>>().join(",")
}
