//! Seeded samplers for the random-network ensembles.
//!
//! An [`EnsembleSpec`] is the serializable description (`{variant, params,
//! seed}`); [`Ensemble`] is the validated, ready-to-sample form. Sampling is a
//! pure function of `(seed, replicate index)`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::seeding::{mix64, stream_rng, tag, StreamRng};

/// Rejection attempts allowed per K-bound sample.
pub const KBOUND_ATTEMPT_BUDGET: usize = 1_000_000;

/// Weights supplied inline or as a one-per-line text file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct WeightSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights_file: Option<PathBuf>,
}

/// A seed graph supplied inline (`n` plus `edges`) or as an edge-list file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct GraphSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edges: Option<Vec<(usize, usize)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
pub enum EnsembleVariant {
    /// Every pair linked independently with probability `p`.
    ErDense { n: usize, p: f64 },
    /// Every pair linked independently with probability `lambda / (n - 1)`,
    /// so the expected degree is exactly `lambda`.
    ErSparse { n: usize, lambda: f64 },
    /// Pair `{i, j}` linked with probability `w_i w_j / sum_l w_l`.
    ChungLu {
        #[serde(flatten)]
        weights: WeightSource,
    },
    /// The inner ensemble conditioned on maximum degree `<= k` by rejection.
    KBound { inner: Box<EnsembleVariant>, k: usize },
    /// Edges of `seed_graph` deleted with probability `p0`, non-edges added
    /// with the `p1` that conserves the expected edge count.
    Perturbed { seed_graph: GraphSource, p0: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    #[serde(flatten)]
    pub variant: EnsembleVariant,
    #[serde(default)]
    pub seed: u64,
}

impl EnsembleSpec {
    pub fn new(variant: EnsembleVariant, seed: u64) -> Self {
        EnsembleSpec { variant, seed }
    }

    /// Validates and loads any referenced files (relative paths resolve
    /// against `base_dir`).
    pub fn build(&self, base_dir: Option<&Path>) -> Result<Ensemble> {
        Ok(Ensemble {
            sampler: Sampler::from_variant(&self.variant, base_dir)?,
            seed: self.seed,
        })
    }
}

/// Summary statistics of a Chung–Lu weight sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClSummary {
    /// Average degree `(1/N) sum_l w_l`.
    pub d: f64,
    /// Second-order degree `sum_j w_j^2 / sum_l w_l`.
    pub dbar: f64,
    /// `sum_{i<j} w_i w_j / sum_l w_l`, the simple-graph expectation of `m`.
    pub expected_m: f64,
    /// Alternative count `d (N + 1) / 2`, which also includes the diagonal
    /// `i = j` terms of the double sum.
    pub expected_m_with_diagonal: f64,
    /// Declared growth `(B, beta)` when the weights come from a non-sparse
    /// family with `d >= B N^beta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub growth: Option<(f64, f64)>,
}

impl ClSummary {
    pub fn from_weights(w: &[f64]) -> Self {
        let n = w.len() as f64;
        let total: f64 = w.iter().sum();
        let sq: f64 = w.iter().map(|x| x * x).sum();
        ClSummary {
            d: total / n,
            dbar: sq / total,
            // sum_{i<j} w_i w_j = (total^2 - sq) / 2
            expected_m: (total * total - sq) / (2.0 * total),
            expected_m_with_diagonal: total / n * (n + 1.0) / 2.0,
            growth: None,
        }
    }
}

fn validate_weights(w: &[f64]) -> Result<f64> {
    if w.len() < 2 {
        return Err(Error::Spec("Chung-Lu needs at least two weights".into()));
    }
    if let Some(bad) = w.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Spec(format!("Chung-Lu weights must be positive, got {bad}")));
    }
    let total: f64 = w.iter().sum();
    let wmax = w.iter().cloned().fold(0.0, f64::max);
    if wmax * wmax > total {
        return Err(Error::Spec(format!(
            "Chung-Lu pair probability exceeds 1: max w^2 = {} > sum w = {}",
            wmax * wmax,
            total
        )));
    }
    Ok(total)
}

fn validate_probability(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::Spec(format!("{what} = {p} is not a probability")))
    }
}

/// Reads one weight per line, ignoring blank lines and `#` comments.
pub fn read_weights_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            l.parse::<f64>()
                .map_err(|_| Error::Input(format!("invalid weight {l:?} in {}", path.display())))
        })
        .collect()
}

fn resolve_path(path: &Path, base: Option<&Path>) -> PathBuf {
    match base {
        Some(b) if path.is_relative() => b.join(path),
        _ => path.to_path_buf(),
    }
}

fn load_weights(src: &WeightSource, base: Option<&Path>) -> Result<Vec<f64>> {
    match (&src.weights, &src.weights_file) {
        (Some(w), None) => Ok(w.clone()),
        (None, Some(f)) => read_weights_file(&resolve_path(f, base)),
        (Some(_), Some(_)) => Err(Error::Config(
            "give either inline weights or weights_file, not both".into(),
        )),
        (None, None) => Err(Error::Config("Chung-Lu needs weights or weights_file".into())),
    }
}

fn load_graph(src: &GraphSource, base: Option<&Path>) -> Result<Graph> {
    match (&src.file, &src.edges) {
        (Some(f), None) => Graph::load_edge_list(resolve_path(f, base)),
        (None, Some(edges)) => {
            let n = src.n.ok_or_else(|| Error::Config("inline seed graph needs n".into()))?;
            Graph::from_edge_list(n, edges.iter().copied())
        }
        (None, None) => match src.n {
            Some(n) => Ok(Graph::empty(n)),
            None => Err(Error::Config("seed graph needs file or n/edges".into())),
        },
        (Some(_), Some(_)) => Err(Error::Config(
            "give either an edge-list file or inline edges, not both".into(),
        )),
    }
}

#[derive(Debug, Clone)]
enum Sampler {
    Bernoulli { n: usize, p: f64 },
    ChungLu { weights: Vec<f64>, total: f64 },
    KBound { inner: Box<Sampler>, k: usize },
    Perturbed { g0: Graph, p0: f64, p1: f64 },
}

impl Sampler {
    fn from_variant(v: &EnsembleVariant, base: Option<&Path>) -> Result<Self> {
        match v {
            EnsembleVariant::ErDense { n, p } => {
                validate_probability(*p, "p")?;
                Ok(Sampler::Bernoulli { n: *n, p: *p })
            }
            EnsembleVariant::ErSparse { n, lambda } => {
                if !(*lambda >= 0.0) {
                    return Err(Error::Spec(format!("lambda must be >= 0, got {lambda}")));
                }
                if *n < 2 {
                    return Err(Error::Spec("ER-sparse needs N >= 2".into()));
                }
                let p = lambda / (*n as f64 - 1.0);
                validate_probability(p, "lambda / (N - 1)")?;
                Ok(Sampler::Bernoulli { n: *n, p })
            }
            EnsembleVariant::ChungLu { weights } => Sampler::chung_lu(load_weights(weights, base)?),
            EnsembleVariant::KBound { inner, k } => {
                if *k < 1 {
                    return Err(Error::Spec("K must be at least 1".into()));
                }
                Ok(Sampler::KBound {
                    inner: Box::new(Sampler::from_variant(inner, base)?),
                    k: *k,
                })
            }
            EnsembleVariant::Perturbed { seed_graph, p0 } => Sampler::perturbed(load_graph(seed_graph, base)?, *p0),
        }
    }

    fn chung_lu(weights: Vec<f64>) -> Result<Self> {
        let total = validate_weights(&weights)?;
        Ok(Sampler::ChungLu { weights, total })
    }

    fn perturbed(g0: Graph, p0: f64) -> Result<Self> {
        validate_probability(p0, "p0")?;
        let p1 = perturbation_p1(&g0, p0)?;
        if p1 > 1.0 {
            return Err(Error::Spec(format!(
                "perturbation needs p1 = {p1} > 1 to conserve the edge count"
            )));
        }
        Ok(Sampler::Perturbed { g0, p0, p1 })
    }

    fn node_count(&self) -> usize {
        match self {
            Sampler::Bernoulli { n, .. } => *n,
            Sampler::ChungLu { weights, .. } => weights.len(),
            Sampler::KBound { inner, .. } => inner.node_count(),
            Sampler::Perturbed { g0, .. } => g0.node_count(),
        }
    }

    fn draw(&self, rng: &mut StreamRng) -> Result<Graph> {
        match self {
            Sampler::Bernoulli { n, p } => Ok(independent_pairs(*n, rng, |_, _| *p)),
            Sampler::ChungLu { weights, total } => Ok(independent_pairs(weights.len(), rng, |i, j| {
                weights[i] * weights[j] / total
            })),
            Sampler::KBound { inner, k } => {
                for _ in 0..KBOUND_ATTEMPT_BUDGET {
                    let g = inner.draw(rng)?;
                    if g.max_degree() <= *k {
                        return Ok(g);
                    }
                }
                Err(Error::Infeasible(format!(
                    "no sample with max degree <= {k} in {KBOUND_ATTEMPT_BUDGET} attempts"
                )))
            }
            Sampler::Perturbed { g0, p0, p1 } => Ok(independent_pairs(g0.node_count(), rng, |i, j| {
                if g0.has_edge(i, j) {
                    1.0 - p0
                } else {
                    *p1
                }
            })),
        }
    }
}

/// Draws every pair `i < j` independently with probability `prob(i, j)`, in
/// lexicographic pair order.
fn independent_pairs<F>(n: usize, rng: &mut StreamRng, prob: F) -> Graph
where
    F: Fn(usize, usize) -> f64,
{
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let u: f64 = rng.gen();
            if u < prob(i, j) {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    // row i receives all j < i before its own j > i, so lists are sorted
    Graph::from_sorted_adjacency(adj)
}

/// A validated ensemble bound to a master seed.
#[derive(Debug, Clone)]
pub struct Ensemble {
    sampler: Sampler,
    seed: u64,
}

impl Ensemble {
    pub fn from_variant(variant: &EnsembleVariant, seed: u64) -> Result<Self> {
        EnsembleSpec::new(variant.clone(), seed).build(None)
    }

    pub fn er_dense(n: usize, p: f64, seed: u64) -> Result<Self> {
        Self::from_variant(&EnsembleVariant::ErDense { n, p }, seed)
    }

    pub fn er_sparse(n: usize, lambda: f64, seed: u64) -> Result<Self> {
        Self::from_variant(&EnsembleVariant::ErSparse { n, lambda }, seed)
    }

    pub fn chung_lu(weights: Vec<f64>, seed: u64) -> Result<Self> {
        Ok(Ensemble {
            sampler: Sampler::chung_lu(weights)?,
            seed,
        })
    }

    pub fn perturbed(g0: Graph, p0: f64, seed: u64) -> Result<Self> {
        Ok(Ensemble {
            sampler: Sampler::perturbed(g0, p0)?,
            seed,
        })
    }

    /// Wraps `self` in a K-bound rejection sampler.
    pub fn k_bound(self, k: usize) -> Result<Self> {
        if k < 1 {
            return Err(Error::Spec("K must be at least 1".into()));
        }
        Ok(Ensemble {
            sampler: Sampler::KBound {
                inner: Box::new(self.sampler),
                k,
            },
            seed: self.seed,
        })
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn node_count(&self) -> usize {
        self.sampler.node_count()
    }

    /// Seed of the random stream used for replicate `index`.
    pub fn replicate_seed(&self, index: u64) -> u64 {
        mix64(self.seed, index)
    }

    /// Replicate `index` of the ensemble.
    pub fn sample(&self, index: u64) -> Result<Graph> {
        self.sample_from_stream(self.replicate_seed(index))
    }

    /// Draws from the stream keyed by `stream_seed` directly.
    pub fn sample_from_stream(&self, stream_seed: u64) -> Result<Graph> {
        let mut rng = stream_rng(mix64(stream_seed, tag::GRAPH));
        self.sampler.draw(&mut rng)
    }

    /// Chung–Lu summary, when this is a Chung–Lu ensemble (possibly K-bound).
    pub fn cl_summary(&self) -> Option<ClSummary> {
        let mut s = &self.sampler;
        loop {
            match s {
                Sampler::ChungLu { weights, .. } => return Some(ClSummary::from_weights(weights)),
                Sampler::KBound { inner, .. } => s = inner,
                _ => return None,
            }
        }
    }

    /// Pair probability `Pr{A_ij = 1}` of the underlying independent-edge
    /// model (ignores K-bound conditioning).
    pub fn pair_probability(&self, i: usize, j: usize) -> f64 {
        let mut s = &self.sampler;
        loop {
            match s {
                Sampler::Bernoulli { p, .. } => return *p,
                Sampler::ChungLu { weights, total } => return weights[i] * weights[j] / total,
                Sampler::KBound { inner, .. } => s = inner,
                Sampler::Perturbed { g0, p0, p1 } => {
                    return if g0.has_edge(i, j) { 1.0 - p0 } else { *p1 };
                }
            }
        }
    }
}

/// Convenience wrapper: build `spec` and draw replicate `index`.
pub fn sample(spec: &EnsembleSpec, index: u64) -> Result<Graph> {
    spec.build(None)?.sample(index)
}

/// Insertion probability `p1 = p0 m / (N(N-1)/2 - m)` that keeps the expected
/// edge count of a perturbation of `g0` equal to `m`.
pub fn perturbation_p1(g0: &Graph, p0: f64) -> Result<f64> {
    let m = g0.edge_count();
    let free = g0.pair_count() - m;
    if free == 0 {
        return Err(Error::Input(
            "seed graph is complete: no non-edges to balance deletions".into(),
        ));
    }
    Ok(p0 * m as f64 / free as f64)
}

/// Replicate `index` of the perturbation ensemble around `g0`.
pub fn sample_perturbed(g0: &Graph, p0: f64, seed: u64, index: u64) -> Result<Graph> {
    Ensemble::perturbed(g0.clone(), p0, seed)?.sample(index)
}

/// Per-N weight sequence for Chung–Lu ensemble families.
#[derive(Clone)]
pub struct WeightFn(pub Arc<dyn Fn(usize) -> Vec<f64> + Send + Sync>);

impl fmt::Debug for WeightFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("WeightFn(..)")
    }
}

/// How Chung–Lu weights scale with N inside an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightGenerator {
    /// All weights equal to `w`.
    Constant { w: f64 },
    /// All weights equal to `b * N^beta`; declares the growth `(B, beta)`.
    Growing { b: f64, beta: f64 },
    /// `w_i ∝ (i + 1)^(-1/(exponent - 1))`, rescaled to the given mean.
    PowerLaw { mean_degree: f64, exponent: f64 },
    /// Caller-supplied generator; programmatic use only.
    #[serde(skip)]
    Custom { f: WeightFn, growth: Option<(f64, f64)> },
}

impl WeightGenerator {
    pub fn weights(&self, n: usize) -> Vec<f64> {
        match self {
            WeightGenerator::Constant { w } => vec![*w; n],
            WeightGenerator::Growing { b, beta } => vec![b * (n as f64).powf(*beta); n],
            WeightGenerator::PowerLaw { mean_degree, exponent } => {
                let a = -1.0 / (exponent - 1.0);
                let raw: Vec<f64> = (0..n).map(|i| ((i + 1) as f64).powf(a)).collect();
                let scale = mean_degree * n as f64 / raw.iter().sum::<f64>();
                raw.into_iter().map(|x| x * scale).collect()
            }
            WeightGenerator::Custom { f, .. } => (f.0)(n),
        }
    }

    pub fn growth(&self) -> Option<(f64, f64)> {
        match self {
            WeightGenerator::Growing { b, beta } => Some((*b, *beta)),
            WeightGenerator::Custom { growth, .. } => *growth,
            _ => None,
        }
    }
}

/// An ensemble description parameterized by N, used by experiments that sweep
/// the system size.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "variant", content = "params", rename_all = "snake_case")]
pub enum EnsembleFamily {
    ErDense {
        p: f64,
    },
    ErSparse {
        lambda: f64,
    },
    ChungLu {
        weights: WeightGenerator,
    },
    KBound {
        inner: Box<EnsembleFamily>,
        k: usize,
    },
    /// Only valid at the seed graph's own N.
    Perturbed {
        seed_graph: GraphSource,
        p0: f64,
    },
}

impl EnsembleFamily {
    /// The member of the family with `n` nodes.
    pub fn at(&self, n: usize, seed: u64, base: Option<&Path>) -> Result<Ensemble> {
        let sampler = self.sampler_at(n, base)?;
        Ok(Ensemble { sampler, seed })
    }

    fn sampler_at(&self, n: usize, base: Option<&Path>) -> Result<Sampler> {
        match self {
            EnsembleFamily::ErDense { p } => Sampler::from_variant(&EnsembleVariant::ErDense { n, p: *p }, base),
            EnsembleFamily::ErSparse { lambda } => {
                Sampler::from_variant(&EnsembleVariant::ErSparse { n, lambda: *lambda }, base)
            }
            EnsembleFamily::ChungLu { weights } => Sampler::chung_lu(weights.weights(n)),
            EnsembleFamily::KBound { inner, k } => {
                if *k < 1 {
                    return Err(Error::Spec("K must be at least 1".into()));
                }
                Ok(Sampler::KBound {
                    inner: Box::new(inner.sampler_at(n, base)?),
                    k: *k,
                })
            }
            EnsembleFamily::Perturbed { seed_graph, p0 } => {
                let g0 = load_graph(seed_graph, base)?;
                if g0.node_count() != n {
                    return Err(Error::Config(format!(
                        "perturbation seed graph has N = {}, experiment asks for N = {n}",
                        g0.node_count()
                    )));
                }
                Sampler::perturbed(g0, *p0)
            }
        }
    }

    /// Declared growth `(B, beta)` of a non-sparse Chung–Lu family.
    pub fn growth(&self) -> Option<(f64, f64)> {
        match self {
            EnsembleFamily::ChungLu { weights } => weights.growth(),
            EnsembleFamily::KBound { inner, .. } => inner.growth(),
            _ => None,
        }
    }

    /// Degree bound `K`, when the family is K-bound.
    pub fn k_bound(&self) -> Option<usize> {
        match self {
            EnsembleFamily::KBound { k, .. } => Some(*k),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_extremes() {
        let full = Ensemble::er_dense(3, 1.0, 5).unwrap();
        for k in 0..5 {
            assert_eq!(full.sample(k).unwrap(), Graph::complete(3));
        }
        let none = Ensemble::er_dense(4, 0.0, 5).unwrap();
        assert_eq!(none.sample(0).unwrap(), Graph::empty(4));
    }

    #[test]
    fn sampling_is_deterministic() {
        let e = Ensemble::er_sparse(40, 3.0, 11).unwrap();
        assert_eq!(e.sample(7).unwrap(), e.sample(7).unwrap());
        assert_ne!(e.sample(7).unwrap(), e.sample(8).unwrap());
    }

    #[test]
    fn invalid_specs() {
        assert!(Ensemble::er_dense(3, 1.5, 0).is_err());
        assert!(Ensemble::er_sparse(3, 5.0, 0).is_err());
        assert!(Ensemble::er_sparse(3, -1.0, 0).is_err());
        // 3^2 = 9 > 3 + 1 + 1
        assert!(Ensemble::chung_lu(vec![3.0, 1.0, 1.0], 0).is_err());
        assert!(Ensemble::chung_lu(vec![1.0, 0.0], 0).is_err());
        assert!(Ensemble::er_dense(3, 0.5, 0).unwrap().k_bound(0).is_err());
    }

    #[test]
    fn kbound_never_rejects_when_k_is_large() {
        let e = Ensemble::er_sparse(50, 2.0, 1).unwrap().k_bound(50).unwrap();
        let g = e.sample(0).unwrap();
        assert!(g.max_degree() <= 49);
    }

    #[test]
    fn kbound_infeasible() {
        let e = Ensemble::er_dense(4, 1.0, 1).unwrap().k_bound(2).unwrap();
        assert!(matches!(e.sample(0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn kbound_respects_degree_cap() {
        let e = Ensemble::er_sparse(100, 4.0, 3).unwrap().k_bound(8).unwrap();
        for k in 0..1000 {
            let g = e.sample(k).unwrap();
            assert!(g.degrees().into_iter().all(|d| d <= 8));
        }
    }

    #[test]
    fn p1_arithmetic() {
        let tree = Graph::from_edge_list(10, (1..10).map(|i| (0, i))).unwrap();
        assert!((perturbation_p1(&tree, 0.1).unwrap() - 0.025).abs() < 1e-15);
        assert_eq!(perturbation_p1(&tree, 0.0).unwrap(), 0.0);
        let p4 = Graph::from_edge_list(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!((perturbation_p1(&p4, 0.5).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            perturbation_p1(&Graph::complete(3), 1.0),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn perturbation_identity_and_errors() {
        let p4 = Graph::from_edge_list(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        for k in 0..20 {
            assert_eq!(sample_perturbed(&p4, 0.0, 9, k).unwrap(), p4);
        }
        assert!(sample_perturbed(&Graph::complete(3), 1.0, 0, 0).is_err());
        // star on 4 nodes: 3 edges, 3 non-edges, so p1 = p0
        let star = Graph::from_edge_list(4, [(0, 1), (0, 2), (0, 3)]).unwrap();
        assert!(Ensemble::perturbed(star, 1.0, 0).is_ok());
        // 5 edges of 6 pairs: p1 = 5 p0 > 1 for p0 = 0.5
        let dense = Graph::complete(4).flip_edge(0, 1).unwrap();
        assert!(matches!(Ensemble::perturbed(dense, 0.5, 0), Err(Error::Spec(_))));
    }

    #[test]
    fn cl_summary_values() {
        let s = ClSummary::from_weights(&[2.0, 2.0, 2.0, 2.0]);
        assert_eq!(s.d, 2.0);
        assert_eq!(s.dbar, 2.0);
        assert!((s.expected_m - 3.0).abs() < 1e-12);
        assert!((s.expected_m_with_diagonal - 5.0).abs() < 1e-12);
        let s = ClSummary::from_weights(&[1.0, 2.0, 3.0, 4.0]);
        assert!(s.dbar >= s.d);
    }

    #[test]
    fn spec_json_round_trip() {
        let text = r#"{"variant":"k_bound","params":{"inner":{"variant":"er_sparse","params":{"n":50,"lambda":4.0}},"k":8},"seed":3}"#;
        let spec: EnsembleSpec = serde_json::from_str(text).unwrap();
        assert_eq!(spec.seed, 3);
        assert!(matches!(spec.variant, EnsembleVariant::KBound { k: 8, .. }));
        let back: EnsembleSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(back, spec);

        let cl: EnsembleSpec =
            serde_json::from_str(r#"{"variant":"chung_lu","params":{"weights":[2,2,2,2]}}"#).unwrap();
        let e = cl.build(None).unwrap();
        assert_eq!(e.node_count(), 4);
        assert_eq!(e.pair_probability(0, 1), 0.5);
    }

    #[test]
    fn weights_from_file() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("w.txt"), "2\n2\n\n2\n2\n").unwrap();
        let spec: EnsembleSpec =
            serde_json::from_str(r#"{"variant":"chung_lu","params":{"weights_file":"w.txt"},"seed":1}"#).unwrap();
        let e = spec.build(Some(dir.path())).unwrap();
        assert_eq!(e.cl_summary().unwrap().expected_m, 3.0);
    }

    #[test]
    fn family_members() {
        let fam = EnsembleFamily::KBound {
            inner: Box::new(EnsembleFamily::ErSparse { lambda: 4.0 }),
            k: 8,
        };
        let e = fam.at(30, 1, None).unwrap();
        assert_eq!(e.node_count(), 30);
        assert_eq!(fam.k_bound(), Some(8));
        let g = WeightGenerator::Growing { b: 0.5, beta: 0.5 };
        assert_eq!(g.weights(16), vec![2.0; 16]);
        let pl = WeightGenerator::PowerLaw {
            mean_degree: 3.0,
            exponent: 3.0,
        };
        let w = pl.weights(100);
        assert!((w.iter().sum::<f64>() / 100.0 - 3.0).abs() < 1e-12);
    }
}
