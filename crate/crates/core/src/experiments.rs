//! Ensemble-scale concentration measurements.
//!
//! [`run_concentration`] samples `replicates` graphs at every N, optimizes
//! each, and reduces the results in replicate order, so the report depends
//! only on the config and never on the worker count.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_eval, BoundSpec, Theorem, ThresholdSpec};
use crate::ensembles::EnsembleFamily;
use crate::error::{Error, Result};
use crate::functionals::Functional;
use crate::graph::{ConstraintSpec, Graph};
use crate::optimizers::{exhaustive_state_count, optimize_exhaustive, OptimizerPolicy, EXHAUSTIVE_BUDGET};
use crate::seeding::{mix64, tag};

pub const DEFAULT_TAIL_POINTS: usize = 20;
pub const DEFAULT_TAIL_SIGMAS: f64 = 3.0;

pub const FINITE_SAMPLE_NOTE: &str = "ensemble mean <H> is estimated by the sample mean; \
     empirical tails are finite-sample estimates measured against it";

/// Quantity reported in `report.csv` and `scaling.csv`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    #[default]
    H,
    HOverN,
}

impl Normalization {
    fn apply(self, h: f64, n: usize) -> f64 {
        match self {
            Normalization::H => h,
            Normalization::HOverN => h / n as f64,
        }
    }
}

fn default_tail_points() -> usize {
    DEFAULT_TAIL_POINTS
}

fn default_tail_sigmas() -> f64 {
    DEFAULT_TAIL_SIGMAS
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub ensemble: EnsembleFamily,
    /// System sizes, strictly increasing.
    pub ns: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    pub functional: Functional,
    #[serde(default)]
    pub constraint: ConstraintSpec,
    pub optimizer: OptimizerPolicy,
    pub replicates: usize,
    /// Bound compared against the empirical tails. `n` is filled per row;
    /// a missing `c` or `k` is taken from the functional or the K-bound family.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundSpec>,
    #[serde(default)]
    pub normalization: Normalization,
    #[serde(default = "default_tail_points")]
    pub tail_points: usize,
    /// Tail grid runs from 0 to this many sample standard deviations of H.
    #[serde(default = "default_tail_sigmas")]
    pub tail_sigmas: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replicates < 2 {
            return Err(Error::Config("replicates must be at least 2".into()));
        }
        if self.ns.is_empty() {
            return Err(Error::Config("ns must list at least one system size".into()));
        }
        if self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("ns must be strictly increasing".into()));
        }
        if self.tail_points < 1 {
            return Err(Error::Config("tail_points must be at least 1".into()));
        }
        self.functional.validate().map_err(|e| Error::Config(e.to_string()))?;
        for &n in &self.ns {
            self.constraint
                .validate(n, self.functional.q())
                .map_err(|e| Error::Config(format!("N = {n}: {e}")))?;
            if self.optimizer == OptimizerPolicy::Exhaustive {
                let (states, _) = exhaustive_state_count(&self.functional, n, &self.constraint);
                if states > EXHAUSTIVE_BUDGET {
                    return Err(Error::Config(format!(
                        "exhaustive search at N = {n} needs {states} states (budget {EXHAUSTIVE_BUDGET})"
                    )));
                }
            }
        }
        if let OptimizerPolicy::Anneal { schedule } = &self.optimizer {
            schedule.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    /// Seed shared by every replicate at size `n`.
    pub fn size_seed(&self, n: usize) -> u64 {
        mix64(self.seed ^ tag::SIZE, n as u64)
    }

    /// Bound spec specialised to size `n`.
    pub fn bound_at(&self, n: usize) -> Option<BoundSpec> {
        let mut spec = self.bound.clone()?;
        spec.params.n = Some(n);
        if spec.params.k.is_none() {
            spec.params.k = self.ensemble.k_bound();
        }
        if spec.params.c.is_none() && matches!(spec.theorem, Theorem::T1 | Theorem::T3 | Theorem::T4) {
            spec.params.c = Some(self.functional.bounded_diff_constant(n, spec.params.m_star).constant());
        }
        Some(spec)
    }
}

/// One optimized replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleRow {
    pub n: usize,
    pub replicate: usize,
    pub seed: u64,
    pub m: usize,
    pub h: f64,
    pub evaluations: u64,
    pub exact: bool,
}

/// Statistics of the reported quantity at one N.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeRow {
    pub n: usize,
    pub mean_h: f64,
    pub std_h: f64,
    pub min_h: f64,
    pub max_h: f64,
    pub replicates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRow {
    pub n: usize,
    pub t: f64,
    pub empirical: f64,
    pub bound_raw: Option<f64>,
    pub bound_clamped: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
}

impl ScalingFit {
    pub fn predict(&self, n: f64) -> f64 {
        (self.intercept + self.slope * n.ln()).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub rows: Vec<SizeRow>,
    pub tails: Vec<TailRow>,
    pub fit: Option<ScalingFit>,
    pub samples: Vec<SampleRow>,
    pub normalization: Normalization,
    pub notes: Vec<String>,
}

impl ConcentrationReport {
    /// Raw `H` values at size `n`, in replicate order.
    pub fn values_at(&self, n: usize) -> Vec<f64> {
        self.samples.iter().filter(|s| s.n == n).map(|s| s.h).collect()
    }

    /// True when every tail row with a bound has `empirical <= bound_clamped`.
    pub fn bound_dominates(&self) -> bool {
        self.tails
            .iter()
            .all(|r| r.bound_clamped.is_none_or(|b| r.empirical <= b))
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n - 1 denominator).
pub fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let mu = mean(values);
    let ss: f64 = values.iter().map(|v| (v - mu) * (v - mu)).sum();
    (ss / (values.len() - 1) as f64).sqrt()
}

/// Fraction of `values` with `|v - center| > t`, for each `t`. `center`
/// defaults to the sample mean.
pub fn empirical_tail(values: &[f64], center: Option<f64>, ts: &[f64]) -> Result<Vec<f64>> {
    if values.is_empty() {
        return Err(Error::Input("empirical tail of an empty sample".into()));
    }
    let c = center.unwrap_or_else(|| mean(values));
    let total = values.len() as f64;
    Ok(ts
        .iter()
        .map(|&t| values.iter().filter(|&&v| (v - c).abs() > t).count() as f64 / total)
        .collect())
}

/// `count` evenly spaced deviations from 0 to `sigmas * std(values)`.
pub fn tail_grid(values: &[f64], count: usize, sigmas: f64) -> Vec<f64> {
    let top = sigmas * sample_std(values);
    if count == 1 {
        return vec![0.0];
    }
    (0..count).map(|i| top * i as f64 / (count - 1) as f64).collect()
}

/// Least-squares fit of `log std = intercept + slope log N`.
pub fn fit_scaling(points: &[(f64, f64)]) -> Result<ScalingFit> {
    if points.len() < 3 {
        return Err(Error::Input(format!(
            "scaling fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    if let Some(&(n, s)) = points.iter().find(|&&(n, s)| !(s > 0.0) || !(n > 0.0)) {
        return Err(Error::Degenerate(format!(
            "non-positive value at N = {n} (std = {s}); increase the replicate count"
        )));
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let k = xs.len() as f64;
    let xm = xs.iter().sum::<f64>() / k;
    let ym = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
    if sxx == 0.0 {
        return Err(Error::Degenerate("all N values are equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let stderr = (ssr / (k - 2.0) / sxx).sqrt();
    Ok(ScalingFit {
        slope,
        stderr,
        intercept,
    })
}

/// Tail counts split by whether the edge count is below a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitTail {
    pub low_total: usize,
    pub low_exceed: usize,
    pub high_total: usize,
    pub high_exceed: usize,
}

impl SplitTail {
    /// `P(low) P(tail | low) + P(high) P(tail | high)`.
    pub fn recombined(&self) -> f64 {
        let total = (self.low_total + self.high_total) as f64;
        let p_low = self.low_total as f64 / total;
        let p_high = self.high_total as f64 / total;
        let cond = |exceed: usize, n: usize| if n == 0 { 0.0 } else { exceed as f64 / n as f64 };
        p_low * cond(self.low_exceed, self.low_total) + p_high * cond(self.high_exceed, self.high_total)
    }
}

/// Splits replicates by `m < m_threshold` and counts `|H - center| > t` in
/// each part.
pub fn conditioned_tail(samples: &[SampleRow], m_threshold: f64, center: f64, t: f64) -> SplitTail {
    let mut s = SplitTail {
        low_total: 0,
        low_exceed: 0,
        high_total: 0,
        high_exceed: 0,
    };
    for row in samples {
        let exceed = ((row.h - center).abs() > t) as usize;
        if (row.m as f64) < m_threshold {
            s.low_total += 1;
            s.low_exceed += exceed;
        } else {
            s.high_total += 1;
            s.high_exceed += exceed;
        }
    }
    s
}

/// Runs the experiment on the global rayon pool.
pub fn run_concentration(cfg: &ExperimentConfig) -> Result<ConcentrationReport> {
    run_concentration_in(cfg, None)
}

/// Runs the experiment; relative ensemble paths resolve against `base_dir`.
pub fn run_concentration_in(cfg: &ExperimentConfig, base_dir: Option<&Path>) -> Result<ConcentrationReport> {
    cfg.validate()?;
    let ensembles = cfg
        .ns
        .iter()
        .map(|&n| cfg.ensemble.at(n, cfg.size_seed(n), base_dir))
        .collect::<Result<Vec<_>>>()?;

    let tasks: Vec<(usize, usize)> = (0..cfg.ns.len())
        .flat_map(|i| (0..cfg.replicates).map(move |r| (i, r)))
        .collect();
    let samples = tasks
        .par_iter()
        .map(|&(i, r)| {
            let ens = &ensembles[i];
            let seed = ens.replicate_seed(r as u64);
            let g = ens.sample_from_stream(seed)?;
            let res = cfg
                .optimizer
                .run(&cfg.functional, &g, &cfg.constraint, mix64(seed, tag::OPTIMIZER))?;
            Ok(SampleRow {
                n: cfg.ns[i],
                replicate: r,
                seed,
                m: g.edge_count(),
                h: res.best_value,
                evaluations: res.evaluations,
                exact: res.exact,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(cfg.ns.len());
    let mut tails = Vec::new();
    for (i, &n) in cfg.ns.iter().enumerate() {
        let chunk = &samples[i * cfg.replicates..(i + 1) * cfg.replicates];
        let raw: Vec<f64> = chunk.iter().map(|s| s.h).collect();
        let reported: Vec<f64> = raw.iter().map(|&h| cfg.normalization.apply(h, n)).collect();
        rows.push(SizeRow {
            n,
            mean_h: mean(&reported),
            std_h: sample_std(&reported),
            min_h: reported.iter().cloned().fold(f64::INFINITY, f64::min),
            max_h: reported.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
            replicates: reported.len(),
        });

        let ts = tail_grid(&raw, cfg.tail_points, cfg.tail_sigmas);
        let emp = empirical_tail(&raw, None, &ts)?;
        let bound = cfg.bound_at(n);
        for (t, e) in ts.into_iter().zip(emp) {
            let b = match &bound {
                Some(spec) => Some(bound_eval(spec, t)?),
                None => None,
            };
            tails.push(TailRow {
                n,
                t,
                empirical: e,
                bound_raw: b.map(|b| b.raw),
                bound_clamped: b.map(|b| b.clamped),
            });
        }
    }

    let mut notes = vec![
        FINITE_SAMPLE_NOTE.to_string(),
        format!(
            "H per replicate: {} with optimizer seed mix64(replicate_seed, OPTIMIZER) for every replicate",
            policy_label(&cfg.optimizer)
        ),
        "fluctuation is the sample standard deviation (n - 1 denominator)".to_string(),
    ];
    if let Some(b) = &cfg.bound {
        if matches!(b.theorem, Theorem::T5 | Theorem::T7) {
            notes.push(
                "modularity bound constants 25/2 and sigma = 5/4 are used as stated; the \
                 per-edge estimate c = 11N/(8m*) would give (11/8)^2 * 8 = 121/8 instead of 25/2"
                    .to_string(),
            );
        }
    }

    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.n as f64, r.std_h)).collect();
    let fit = if points.len() >= 3 {
        match fit_scaling(&points) {
            Ok(f) => Some(f),
            Err(e) => {
                notes.push(format!("no scaling fit: {e}"));
                None
            }
        }
    } else {
        None
    };

    Ok(ConcentrationReport {
        rows,
        tails,
        fit,
        samples,
        normalization: cfg.normalization,
        notes,
    })
}

fn policy_label(p: &OptimizerPolicy) -> String {
    match p {
        OptimizerPolicy::Exhaustive => "exhaustive".to_string(),
        OptimizerPolicy::Anneal { schedule } => format!(
            "simulated annealing (t_start {}, t_end {}, {} sweeps, {} restarts, {:?})",
            schedule.t_start, schedule.t_end, schedule.steps, schedule.restarts, schedule.move_kind
        ),
        OptimizerPolicy::Local { restarts } => format!("local descent ({restarts} restarts)"),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn samples_csv(report: &ConcentrationReport) -> String {
    let mut out = String::from("N,replicate,seed,m,H,evaluations,exact\n");
    for s in &report.samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.n, s.replicate, s.seed, s.m, s.h, s.evaluations, s.exact
        );
    }
    out
}

pub fn report_csv(report: &ConcentrationReport) -> String {
    let mut out = String::from("N,mean_H,std_H,min_H,max_H,replicates\n");
    for r in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.n, r.mean_h, r.std_h, r.min_h, r.max_h, r.replicates
        );
    }
    out
}

pub fn tails_csv(report: &ConcentrationReport) -> String {
    let mut out = String::from("N,t,empirical,bound_raw,bound_clamped\n");
    for r in &report.tails {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.n,
            r.t,
            r.empirical,
            opt(r.bound_raw),
            opt(r.bound_clamped)
        );
    }
    out
}

pub fn scaling_csv(report: &ConcentrationReport) -> String {
    let mut out = String::from("N,std,fit\n");
    for r in &report.rows {
        let fit = report.fit.map(|f| f.predict(r.n as f64));
        let _ = writeln!(out, "{},{},{}", r.n, r.std_h, opt(fit));
    }
    out
}

/// Writes `samples.csv`, `report.csv`, `tails.csv` and `scaling.csv` into `dir`.
pub fn write_report(report: &ConcentrationReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("samples.csv"), samples_csv(report))?;
    std::fs::write(dir.join("report.csv"), report_csv(report))?;
    std::fs::write(dir.join("tails.csv"), tails_csv(report))?;
    std::fs::write(dir.join("scaling.csv"), scaling_csv(report))?;
    Ok(())
}

/// `(n1, n2, m12)` of a two-community membership vector (labels 0 and 1).
pub fn declared_communities(g: &Graph, membership: &[usize], j: f64) -> Result<ThresholdSpec> {
    if membership.len() != g.node_count() {
        return Err(Error::Input(format!(
            "membership has {} entries for {} nodes",
            membership.len(),
            g.node_count()
        )));
    }
    if membership.iter().any(|&c| c > 1) {
        return Err(Error::Input("membership entries must be 0 or 1".into()));
    }
    let n2 = membership.iter().filter(|&&c| c == 1).count();
    let n1 = membership.len() - n2;
    let m12 = g.edges().filter(|&(u, v)| membership[u] != membership[v]).count();
    let th = ThresholdSpec { j, n1, n2, m12 };
    th.validate()?;
    Ok(th)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaPoint {
    pub gamma: f64,
    pub h: f64,
    /// Every node of both communities shares one label.
    pub merged: bool,
    /// Each community is monochromatic and the two labels differ.
    pub separated: bool,
}

/// Optimizes the q-Potts functional exactly at each `gamma` and reports
/// whether the optimum merges the two declared communities.
pub fn gamma_sweep(g: &Graph, membership: &[usize], j: f64, q: usize, gammas: &[f64]) -> Result<Vec<GammaPoint>> {
    declared_communities(g, membership, j)?;
    gammas
        .iter()
        .map(|&gamma| {
            let f = Functional::q_potts(q, j, gamma);
            let r = optimize_exhaustive(&f, g, &ConstraintSpec::Unconstrained)?;
            let labels = r.best_config.labels();
            let merged = labels.iter().all(|&l| l == labels[0]);
            let label_of = |c: usize| -> Option<usize> {
                let mut it = labels.iter().zip(membership).filter(|(_, &m)| m == c).map(|(&l, _)| l);
                let first = it.next()?;
                it.all(|l| l == first).then_some(first)
            };
            let separated = matches!((label_of(0), label_of(1)), (Some(a), Some(b)) if a != b);
            Ok(GammaPoint {
                gamma,
                h: r.best_value,
                merged,
                separated,
            })
        })
        .collect()
}

/// `(last merged gamma, first non-merged gamma)` over a sweep sorted by gamma.
pub fn switch_point(points: &[GammaPoint]) -> Option<(f64, f64)> {
    points
        .windows(2)
        .find(|w| w[0].merged && !w[1].merged)
        .map(|w| (w[0].gamma, w[1].gamma))
}

pub fn gamma_sweep_csv(points: &[GammaPoint]) -> String {
    let mut out = String::from("gamma,H,merged,separated\n");
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.gamma, p.h, p.merged, p.separated);
    }
    out
}
