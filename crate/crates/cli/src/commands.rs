//! Subcommand implementations. Each one validates its inputs, computes a
//! report and hands it to [`emit`]; nothing is written when a step fails.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use fdpvar_core::estimate::{plugin_variance_cached, PluginResult};
use fdpvar_core::matrix::cholesky;
use fdpvar_core::pi0::Pi0Method;
use fdpvar_core::simulate::{
    build_sigma, run_table2, run_table3, Clock, ModelSpec, SimulationReport, StudySettings, Table2Config, Table3Config,
    Table3Report,
};
use fdpvar_core::theory::{
    check_conditions, cov_tests_exact, fdp_variance, fdp_variance_independent, thm2_sign_with, thm3_check, z_half,
    BoundInterpretation, ConditionReport, NullCovCache, PairCase, SignPrediction, VarianceDecomposition,
};
use fdpvar_core::{CorrelationMatrix, TestProblem, VERSION};
use serde::Serialize;

use crate::config::{
    check_t, ConditionsSection, EstimateSection, Format, RunConfig, SigmaSection, SigncheckSection, SimulateSection,
    Study, VarianceSection,
};
use crate::error::{CliError, CliResult};
use crate::formats::{fmt_f64, read_correlation, read_mask, read_vector, write_atomic, write_matrix};

/// Common envelope of every JSON report.
#[derive(Debug, Serialize)]
pub struct Report<'a, C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub seed: u64,
    pub config: &'a C,
    pub result: R,
}

fn envelope<'a, C: Serialize, R: Serialize>(
    subcommand: &'static str,
    cfg: &RunConfig,
    section: &'a C,
    result: R,
) -> Report<'a, C, R> {
    Report { tool: "fdpvar", version: VERSION, subcommand, seed: cfg.seed(), config: section, result }
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

/// Writes the report in the configured format to the output path, or to
/// stdout when no path is set.
fn emit(cfg: &RunConfig, json: &str, csv: &str) -> CliResult<()> {
    let body = match cfg.format() {
        Format::Json => json,
        Format::Csv => csv,
    };
    match &cfg.output {
        Some(path) => write_atomic(path, body.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())
                .map_err(|e| CliError::Output { file: "<stdout>".into(), message: e.to_string() })
        }
    }
}

fn section<'a, T>(s: &'a Option<T>, name: &str) -> CliResult<&'a T> {
    s.as_ref().ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
}

/// Reads μ, the optional null mask and the optional Σ, checking that every
/// file agrees on the dimension.
pub fn load_problem(
    mu_path: &Path,
    mask_path: Option<&Path>,
    sigma_path: Option<&Path>,
    t: f64,
) -> CliResult<(TestProblem, Option<CorrelationMatrix>)> {
    let t = check_t(t)?;
    let mu = read_vector(mu_path)?;
    let mask = match mask_path {
        Some(path) => {
            let m = read_mask(path)?;
            if m.len() != mu.len() {
                return Err(CliError::input(
                    path,
                    format!("null mask has {} entries but mu has {}", m.len(), mu.len()),
                ));
            }
            if let Some(j) = (0..m.len()).find(|&j| m[j] && mu[j] != 0.0) {
                return Err(CliError::input(path, format!("row {}: marked null but mu = {}", j + 1, mu[j])));
            }
            m
        }
        None => mu.iter().map(|&m| m == 0.0).collect(),
    };
    let problem = TestProblem::new(mu, mask, t).map_err(|e| CliError::input(mu_path, e.to_string()))?;
    let sigma = match sigma_path {
        Some(path) => {
            let s = read_correlation(path)?;
            if s.dim() != problem.p() {
                return Err(CliError::input(
                    path,
                    format!("sigma is {0}x{0} but mu has {1} entries", s.dim(), problem.p()),
                ));
            }
            Some(s)
        }
        None => None,
    };
    Ok((problem, sigma))
}

#[derive(Debug, Serialize)]
pub struct VarianceResult {
    pub p: usize,
    pub p0: usize,
    pub p1: usize,
    pub t: f64,
    pub v1: f64,
    pub v2: f64,
    pub total: f64,
    pub asym_sd: f64,
    pub asym_mean: f64,
    pub xi_bar: f64,
    pub var_m: f64,
    pub pair_sums: fdpvar_core::theory::PairSums,
    pub pairs_evaluated: u64,
    pub pairs_skipped: u64,
    pub conditions: ConditionsResult,
}

#[derive(Debug, Serialize)]
pub struct ConditionsResult {
    #[serde(flatten)]
    pub report: ConditionReport,
    pub cond2_constant: Option<f64>,
    pub cond2_holds: Option<bool>,
    /// Sufficient conditions for a strictly positive dependence term.
    pub v2_positive_conditions_hold: bool,
}

fn conditions_for(
    problem: &TestProblem,
    sigma: &CorrelationMatrix,
    cond2_constant: Option<f64>,
) -> CliResult<ConditionsResult> {
    let report = check_conditions(problem, sigma)?;
    Ok(ConditionsResult {
        cond2_holds: cond2_constant.map(|c| report.cond2_ratio <= c),
        cond2_constant,
        v2_positive_conditions_hold: thm3_check(problem, sigma)?,
        report,
    })
}

fn decomposition(problem: &TestProblem, sigma: &CorrelationMatrix, skip_eps: f64) -> CliResult<VarianceDecomposition> {
    if sigma.is_identity() {
        Ok(fdp_variance_independent(problem))
    } else {
        Ok(fdp_variance(problem, sigma, skip_eps)?)
    }
}

pub fn variance_result(s: &VarianceSection) -> CliResult<VarianceResult> {
    let (problem, sigma) = load_problem(&s.mu, s.null_mask.as_deref(), s.sigma.as_deref(), s.t)?;
    let sigma = sigma.unwrap_or_else(|| CorrelationMatrix::identity(problem.p()));
    let d = decomposition(&problem, &sigma, s.skip_eps)?;
    Ok(VarianceResult {
        p: problem.p(),
        p0: problem.p0(),
        p1: problem.p1(),
        t: problem.t(),
        v1: d.v1,
        v2: d.v2,
        total: d.total,
        asym_sd: d.sd(),
        asym_mean: d.asym_mean,
        xi_bar: d.xi_bar,
        var_m: d.var_m,
        pair_sums: d.pair_sums,
        pairs_evaluated: d.pairs_evaluated,
        pairs_skipped: d.pairs_skipped,
        conditions: conditions_for(&problem, &sigma, s.cond2_constant)?,
    })
}

fn kv_csv(rows: &[(&str, String)]) -> String {
    let mut s = String::from("field,value\n");
    for (k, v) in rows {
        s.push_str(k);
        s.push(',');
        s.push_str(v);
        s.push('\n');
    }
    s
}

fn variance_csv(r: &VarianceResult) -> String {
    kv_csv(&[
        ("p", r.p.to_string()),
        ("p0", r.p0.to_string()),
        ("p1", r.p1.to_string()),
        ("t", fmt_f64(r.t)),
        ("v1", fmt_f64(r.v1)),
        ("v2", fmt_f64(r.v2)),
        ("total", fmt_f64(r.total)),
        ("asym_sd", fmt_f64(r.asym_sd)),
        ("asym_mean", fmt_f64(r.asym_mean)),
        ("xi_bar", fmt_f64(r.xi_bar)),
        ("var_m", fmt_f64(r.var_m)),
        ("null_null", fmt_f64(r.pair_sums.null_null)),
        ("null_alt", fmt_f64(r.pair_sums.null_alt)),
        ("alt_alt", fmt_f64(r.pair_sums.alt_alt)),
        ("pairs_evaluated", r.pairs_evaluated.to_string()),
        ("pairs_skipped", r.pairs_skipped.to_string()),
        ("cond1_holds", r.conditions.report.cond1_holds.to_string()),
        ("cond2_ratio", fmt_f64(r.conditions.report.cond2_ratio)),
        ("cond3_ratio", fmt_f64(r.conditions.report.cond3_ratio)),
        ("weak_dep", fmt_f64(r.conditions.report.weak_dep)),
    ])
}

pub fn cmd_variance(cfg: &RunConfig) -> CliResult<()> {
    let s = section(&cfg.variance, "variance")?;
    let r = variance_result(s)?;
    let csv = variance_csv(&r);
    emit(cfg, &to_json(&envelope("variance", cfg, s, r)), &csv)
}

pub fn cmd_conditions(cfg: &RunConfig) -> CliResult<()> {
    let s: &ConditionsSection = section(&cfg.conditions, "conditions")?;
    let (problem, sigma) = load_problem(&s.mu, s.null_mask.as_deref(), s.sigma.as_deref(), s.t)?;
    let sigma = sigma.unwrap_or_else(|| CorrelationMatrix::identity(problem.p()));
    let r = conditions_for(&problem, &sigma, s.cond2_constant)?;
    let k = r.report.constants;
    let csv = kv_csv(&[
        ("cond1_lhs", fmt_f64(r.report.cond1_lhs)),
        ("cond1_rhs", fmt_f64(r.report.cond1_rhs)),
        ("cond1_holds", r.report.cond1_holds.to_string()),
        ("cond2_ratio", fmt_f64(r.report.cond2_ratio)),
        ("cond2_holds", r.cond2_holds.map_or(String::new(), |b| b.to_string())),
        ("cond3_ratio", fmt_f64(r.report.cond3_ratio)),
        ("weak_dep", fmt_f64(r.report.weak_dep)),
        ("mu_t", fmt_f64(k.mu_t)),
        ("c_t_max", fmt_f64(k.c_t_max)),
        ("v2_positive_conditions_hold", r.v2_positive_conditions_hold.to_string()),
    ]);
    emit(cfg, &to_json(&envelope("conditions", cfg, s, r)), &csv)
}

#[derive(Debug, Serialize)]
pub struct EstimateRow {
    pub method: Pi0Method,
    pub asym_sd: f64,
    #[serde(flatten)]
    pub plugin: PluginResult,
}

#[derive(Debug, Serialize)]
pub struct EstimateResult {
    pub p: usize,
    pub t: f64,
    pub rows: Vec<EstimateRow>,
}

pub fn estimate_result(s: &EstimateSection, seed: u64) -> CliResult<EstimateResult> {
    let t = check_t(s.t)?;
    if s.methods.is_empty() {
        return Err(CliError::Config("[estimate] methods is empty".into()));
    }
    let z = read_vector(&s.z)?;
    let sigma = match &s.sigma {
        Some(path) => {
            let m = read_correlation(path)?;
            if m.dim() != z.len() {
                return Err(CliError::input(path, format!("sigma is {0}x{0} but z has {1} entries", m.dim(), z.len())));
            }
            m
        }
        None => CorrelationMatrix::identity(z.len()),
    };
    // The null/null covariances depend only on (Σ, t), so every method shares them.
    let cache = NullCovCache::new(&sigma, t, s.skip_eps)?;
    let rows = s
        .methods
        .iter()
        .map(|m| {
            let plugin = plugin_variance_cached(&z, &sigma, t, m, seed, &cache)?;
            Ok(EstimateRow { method: m.clone(), asym_sd: plugin.decomposition.sd(), plugin })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(EstimateResult { p: z.len(), t, rows })
}

fn estimate_csv(r: &EstimateResult) -> String {
    let mut s = String::from("method,pi0,lambda_used,p1_hat,v1,v2,total,asym_sd,asym_mean\n");
    for row in &r.rows {
        let d = &row.plugin.decomposition;
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            method_name(&row.method),
            fmt_f64(row.plugin.pi0.value),
            row.plugin.pi0.lambda_used.map_or(String::new(), fmt_f64),
            row.plugin.p1_hat,
            fmt_f64(d.v1),
            fmt_f64(d.v2),
            fmt_f64(d.total),
            fmt_f64(row.asym_sd),
            fmt_f64(d.asym_mean)
        ));
    }
    s
}

fn method_name(m: &Pi0Method) -> &'static str {
    match m {
        Pi0Method::StoreyFixed { .. } => "storey_fixed",
        Pi0Method::StoreySmoothed { .. } => "storey_smoothed",
        Pi0Method::StoreyBootstrap { .. } => "storey_bootstrap",
        Pi0Method::Grenander { .. } => "grenander",
        Pi0Method::Supplied { .. } => "supplied",
    }
}

pub fn cmd_estimate(cfg: &RunConfig) -> CliResult<()> {
    let s = section(&cfg.estimate, "estimate")?;
    let r = estimate_result(s, cfg.seed())?;
    let csv = estimate_csv(&r);
    emit(cfg, &to_json(&envelope("estimate", cfg, s, r)), &csv)
}

/// Seconds since construction.
pub struct StdClock(Instant);

impl Default for StdClock {
    fn default() -> Self {
        StdClock(Instant::now())
    }
}

impl Clock for StdClock {
    fn now(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

#[derive(Debug, Serialize)]
#[serde(untagged)]
pub enum SimulateResult {
    Table2 { reports: Vec<SimulationReport> },
    Table3 { reports: Vec<Table3Report> },
}

fn validate_simulate(s: &SimulateSection) -> CliResult<()> {
    for &t in &s.t {
        check_t(t)?;
    }
    if s.models.is_empty() || s.t.is_empty() || s.p1.is_empty() {
        return Err(CliError::Config("[simulate] models, t and p1 must be non-empty".into()));
    }
    if s.reps < 2 {
        return Err(CliError::Config(format!("[simulate] reps = {} must be at least 2", s.reps)));
    }
    if let Some(&p1) = s.p1.iter().find(|&&p1| p1 > s.p) {
        return Err(CliError::Config(format!("[simulate] p1 = {p1} exceeds p = {}", s.p)));
    }
    for &m in &s.models {
        ModelSpec { model: m, p: s.p, n: s.n, pfa_threshold: s.pfa_threshold, seed: 0 }
            .validate()
            .map_err(|e| CliError::Config(format!("[simulate] {m}: {e}")))?;
    }
    Ok(())
}

pub fn simulate_result(s: &SimulateSection, seed: u64, clock: &dyn Clock) -> CliResult<SimulateResult> {
    validate_simulate(s)?;
    let settings =
        StudySettings { p: s.p, n: s.n, pfa_threshold: s.pfa_threshold, reps: s.reps, seed, skip_eps: s.skip_eps };
    match s.study {
        Study::Table2 => {
            let mut configs = Vec::new();
            for &model in &s.models {
                for &t in &s.t {
                    for &p1 in &s.p1 {
                        configs.push(Table2Config { t, p1, model });
                    }
                }
            }
            Ok(SimulateResult::Table2 { reports: run_table2(&configs, &settings, clock)? })
        }
        Study::Table3 => {
            if s.methods.is_empty() {
                return Err(CliError::Config("[simulate] methods is empty".into()));
            }
            let mut reports = Vec::new();
            for &model in &s.models {
                for &t in &s.t {
                    for &p1 in &s.p1 {
                        let c = Table3Config { model, t, p1, methods: s.methods.clone() };
                        reports.push(run_table3(&c, &settings, clock)?);
                    }
                }
            }
            Ok(SimulateResult::Table3 { reports })
        }
    }
}

/// One row per configuration, with standard deviations scaled by 100.
pub fn simulate_csv(r: &SimulateResult) -> String {
    let mut s = String::new();
    match r {
        SimulateResult::Table2 { reports } => {
            s.push_str("model,t,p1,asym_sd_x100,emp_sd_x100,emp_mean,fdp_limit,v1,v2,emp_var_of_m,k_pfa,weak_dep,cholesky_jitter,p,n,reps,seed\n");
            for x in reports {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                    x.model,
                    fmt_f64(x.t),
                    x.p1,
                    fmt_f64(100.0 * x.asym_sd),
                    fmt_f64(100.0 * x.emp_sd),
                    fmt_f64(x.emp_mean),
                    fmt_f64(x.fdp_limit),
                    fmt_f64(x.v1),
                    fmt_f64(x.v2),
                    fmt_f64(x.emp_var_of_m),
                    x.k_pfa,
                    fmt_f64(x.weak_dep),
                    fmt_f64(x.cholesky_jitter),
                    x.p,
                    x.n,
                    x.reps,
                    x.seed
                ));
            }
        }
        SimulateResult::Table3 { reports } => {
            s.push_str("model,t,p1,method,true_sd_x100,est_sd_mean_x100,est_sd_sd_x100,p1_hat_mean,p1_hat_sd,k_pfa,p,reps,seed\n");
            for x in reports {
                for row in &x.rows {
                    let method = serde_json::to_value(row.method).expect("kind serializes");
                    s.push_str(&format!(
                        "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                        x.model,
                        fmt_f64(x.t),
                        x.p1,
                        method.as_str().unwrap_or_default(),
                        fmt_f64(100.0 * x.true_sd),
                        fmt_f64(100.0 * row.sd_mean),
                        fmt_f64(100.0 * row.sd_sd),
                        fmt_f64(row.p1_mean),
                        fmt_f64(row.p1_sd),
                        x.k_pfa,
                        x.p,
                        x.reps,
                        x.seed
                    ));
                }
            }
        }
    }
    s
}

/// The CSV companion path for a JSON report.
fn csv_sibling(cfg: &RunConfig, s: &SimulateSection) -> Option<PathBuf> {
    s.csv_output.clone().or_else(|| match (cfg.format(), &cfg.output) {
        (Format::Json, Some(out)) => Some(out.with_extension("csv")),
        _ => None,
    })
}

pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<()> {
    let default_section = SimulateSection::default();
    let s = cfg.simulate.as_ref().unwrap_or(&default_section);
    let r = simulate_result(s, cfg.seed(), &StdClock::default())?;
    let csv = simulate_csv(&r);
    let json = to_json(&envelope("simulate", cfg, s, r));
    if let Some(path) = csv_sibling(cfg, s) {
        write_atomic(&path, csv.as_bytes())?;
    }
    emit(cfg, &json, &csv)
}

/// Absolute accuracy of the bivariate rectangle probabilities behind the
/// exact covariance. A definite prediction is only checked when |Cov| is
/// above it; for strong signals both acceptance probabilities are far
/// smaller and the computed sign is noise.
pub const SIGN_RESOLUTION: f64 = 1e-13;

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SignCell {
    pub mu_i: f64,
    pub mu_j: f64,
    pub sigma: f64,
    pub t: f64,
    pub case: PairCase,
    pub predicted: SignPrediction,
    pub cov: f64,
    /// |Cov| exceeds [`SIGN_RESOLUTION`].
    pub resolved: bool,
    pub violation: bool,
}

#[derive(Debug, Default, Clone, Copy, Serialize)]
pub struct CaseTally {
    pub cells: usize,
    pub definite: usize,
    /// Definite and resolved, so actually checked.
    pub checked: usize,
    pub violations: usize,
}

#[derive(Debug, Serialize)]
pub struct SigncheckResult {
    pub bound_interpretation: BoundInterpretation,
    pub cells: usize,
    pub definite: usize,
    pub checked: usize,
    /// Definite predictions whose covariance is below the resolution floor.
    pub unresolved: usize,
    pub indeterminate: usize,
    pub sign_resolution: f64,
    pub both_null: CaseTally,
    pub mixed: CaseTally,
    pub both_alternative: CaseTally,
    pub violations: Vec<SignCell>,
    #[serde(skip)]
    pub all_cells: Vec<SignCell>,
}

/// Sweeps the (μ_i, μ_j, σ, t) grid, comparing the predicted sign of
/// Cov(t_i, t_j) with its exact value. Indeterminate and unresolved cells
/// never count as violations.
pub fn signcheck_result(s: &SigncheckSection) -> CliResult<SigncheckResult> {
    for &t in &s.t {
        check_t(t)?;
    }
    if let Some(&bad) = s.sigma.iter().find(|v| v.abs() > 1.0 || v.is_nan()) {
        return Err(CliError::Config(format!("[signcheck] sigma = {bad} outside [-1, 1]")));
    }
    let mut cells = Vec::new();
    for &t in &s.t {
        let c = -z_half(t)?;
        let mus: Vec<f64> = match &s.mu {
            Some(m) => m.clone(),
            None => s.mu_multiples.iter().map(|k| k * c).collect(),
        };
        for &mu_i in &mus {
            for &mu_j in &mus {
                let case = PairCase::of(mu_i, mu_j);
                if s.case.is_some_and(|only| only != case) {
                    continue;
                }
                for &sigma in &s.sigma {
                    cells.push((mu_i, mu_j, sigma, t, case));
                }
            }
        }
    }
    let evaluated: Vec<SignCell> = {
        use rayon::prelude::*;
        cells
            .par_iter()
            .map(|&(mu_i, mu_j, sigma, t, case)| {
                let predicted = thm2_sign_with(mu_i, mu_j, sigma, t, s.bound_interpretation);
                let cov = cov_tests_exact(mu_i, mu_j, sigma, t)?;
                let resolved = cov.abs() > SIGN_RESOLUTION;
                let violation = resolved
                    && match predicted {
                        SignPrediction::Positive => cov < 0.0,
                        SignPrediction::Negative => cov > 0.0,
                        SignPrediction::Indeterminate => false,
                    };
                Ok(SignCell { mu_i, mu_j, sigma, t, case, predicted, cov, resolved, violation })
            })
            .collect::<fdpvar_core::Result<_>>()?
    };
    let mut r = SigncheckResult {
        bound_interpretation: s.bound_interpretation,
        cells: evaluated.len(),
        definite: 0,
        checked: 0,
        unresolved: 0,
        indeterminate: 0,
        sign_resolution: SIGN_RESOLUTION,
        both_null: CaseTally::default(),
        mixed: CaseTally::default(),
        both_alternative: CaseTally::default(),
        violations: Vec::new(),
        all_cells: Vec::new(),
    };
    for cell in &evaluated {
        let tally = match cell.case {
            PairCase::BothNull => &mut r.both_null,
            PairCase::Mixed => &mut r.mixed,
            PairCase::BothAlternative => &mut r.both_alternative,
        };
        tally.cells += 1;
        if cell.predicted == SignPrediction::Indeterminate {
            r.indeterminate += 1;
        } else {
            tally.definite += 1;
            r.definite += 1;
            if cell.resolved {
                tally.checked += 1;
                r.checked += 1;
            } else {
                r.unresolved += 1;
            }
        }
        if cell.violation {
            tally.violations += 1;
            r.violations.push(*cell);
        }
    }
    r.all_cells = evaluated;
    Ok(r)
}

fn signcheck_csv(r: &SigncheckResult) -> String {
    let mut s = String::from("mu_i,mu_j,sigma,t,case,predicted,cov,resolved,violation\n");
    for c in &r.all_cells {
        let case = serde_json::to_value(c.case).expect("case serializes");
        let pred = serde_json::to_value(c.predicted).expect("prediction serializes");
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            fmt_f64(c.mu_i),
            fmt_f64(c.mu_j),
            fmt_f64(c.sigma),
            fmt_f64(c.t),
            case.as_str().unwrap_or_default(),
            pred.as_str().unwrap_or_default(),
            fmt_f64(c.cov),
            c.resolved,
            c.violation
        ));
    }
    s
}

/// Writes the report and fails with a violation error when any definite
/// prediction disagrees with the exact covariance.
pub fn cmd_signcheck(cfg: &RunConfig) -> CliResult<()> {
    let default_section = SigncheckSection::default();
    let s = cfg.signcheck.as_ref().unwrap_or(&default_section);
    let r = signcheck_result(s)?;
    let csv = signcheck_csv(&r);
    for v in r.violations.iter().take(20) {
        eprintln!(
            "violation: mu_i={} mu_j={} sigma={} t={} predicted={:?} cov={:e}",
            v.mu_i, v.mu_j, v.sigma, v.t, v.predicted, v.cov
        );
    }
    let n = r.violations.len();
    emit(cfg, &to_json(&envelope("signcheck", cfg, s, r)), &csv)?;
    if n > 0 {
        return Err(CliError::Violation(n));
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct SigmaResult {
    pub model: fdpvar_core::Model,
    pub p: usize,
    pub n: usize,
    pub k_pfa: usize,
    pub weak_dep: f64,
    /// Diagonal jitter a Cholesky factorization of the matrix needs.
    pub cholesky_jitter: f64,
    pub matrix: PathBuf,
}

pub fn cmd_sigma(cfg: &RunConfig) -> CliResult<()> {
    let s: &SigmaSection = section(&cfg.sigma, "sigma")?;
    let spec = ModelSpec { model: s.model, p: s.p, n: s.n, pfa_threshold: s.pfa_threshold, seed: cfg.seed() };
    spec.validate().map_err(|e| CliError::Config(format!("[sigma] {e}")))?;
    let built = build_sigma(&spec)?;
    let jitter = cholesky(&built.sigma)?.jitter;
    write_matrix(&s.matrix, built.sigma.as_matrix())?;
    let r = SigmaResult {
        model: s.model,
        p: s.p,
        n: s.n,
        k_pfa: built.k_used,
        weak_dep: built.metric,
        cholesky_jitter: jitter,
        matrix: s.matrix.clone(),
    };
    let csv = kv_csv(&[
        ("model", s.model.to_string()),
        ("p", s.p.to_string()),
        ("n", s.n.to_string()),
        ("k_pfa", r.k_pfa.to_string()),
        ("weak_dep", fmt_f64(r.weak_dep)),
        ("cholesky_jitter", fmt_f64(r.cholesky_jitter)),
    ]);
    emit(cfg, &to_json(&envelope("sigma", cfg, s, r)), &csv)
}
