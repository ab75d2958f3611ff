//! Community-detecting Hamiltonians `h_G(s)`.
//!
//! All pair sums run over ordered pairs `i != j`, so every edge contributes
//! twice. Each functional reduces to a handful of integer aggregates of the
//! configuration:
//!
//! * two-state kinds: `E = sum_{edges} s_u s_v`, `M = sum_i s_i` and
//!   `D = sum_i d_i s_i`;
//! * q-Potts: the number of monochromatic edges and the occupation numbers.
//!
//! [`EnergyState`] keeps those aggregates up to date under single-node moves,
//! which makes a move delta cost `O(degree + q)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, SpinConfig};

pub type PenaltyFn = Arc<dyn Fn(&[usize]) -> f64 + Send + Sync>;

/// Occupation-number function `f(n_0, ..., n_{q-1})` of the q-Potts penalty.
#[derive(Clone, Default)]
pub enum OccupationPenalty {
    /// `f = sum_s n_s (n_s - 1) / 2`.
    #[default]
    Reichardt,
    Custom(PenaltyFn),
}

impl OccupationPenalty {
    pub fn custom<F>(f: F) -> Self
    where
        F: Fn(&[usize]) -> f64 + Send + Sync + 'static,
    {
        OccupationPenalty::Custom(Arc::new(f))
    }

    pub fn eval(&self, counts: &[usize]) -> f64 {
        match self {
            OccupationPenalty::Reichardt => reichardt(counts) as f64,
            OccupationPenalty::Custom(f) => f(counts),
        }
    }

    fn is_reichardt(&self) -> bool {
        matches!(self, OccupationPenalty::Reichardt)
    }
}

fn reichardt(counts: &[usize]) -> u64 {
    counts
        .iter()
        .map(|&c| (c as u64) * (c as u64).saturating_sub(1) / 2)
        .sum()
}

impl fmt::Debug for OccupationPenalty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OccupationPenalty::Reichardt => f.write_str("Reichardt"),
            OccupationPenalty::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

impl PartialEq for OccupationPenalty {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (OccupationPenalty::Reichardt, OccupationPenalty::Reichardt) => true,
            (OccupationPenalty::Custom(a), OccupationPenalty::Custom(b)) => Arc::ptr_eq(a, b),
            _ => false,
        }
    }
}

/// One of the community-detecting Hamiltonians. Serializes as
/// `{"kind": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Functional {
    /// `-(1/N) sum A_ij s_i s_j`.
    Bipartition,
    /// `-(1/N) sum (A_ij/2 - lambda_pen) s_i s_j`, with `A_ij` normalized to 0/1.
    CircuitPartition { lambda_pen: f64 },
    /// `-(1/4m) sum (A_ij - d_i d_j / 2m) s_i s_j`.
    Modularity,
    /// `-(J/4m) sum A_ij delta(s_i, s_j) + (gamma/2m) f(n)`.
    #[serde(rename = "q_potts")]
    QPotts {
        q: usize,
        j: f64,
        gamma: f64,
        #[serde(skip)]
        penalty: OccupationPenalty,
    },
}

/// How far `H` can move when one edge of the graph flips.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum DifferenceBound {
    /// `|H(G) - H(G')| <= 2c / N`.
    Scaled { c: f64 },
    /// `|H(G) - H(G')| <= bound`, independent of N.
    Absolute { bound: f64 },
}

impl DifferenceBound {
    pub fn max_change(&self, n: usize) -> f64 {
        match *self {
            DifferenceBound::Scaled { c } => 2.0 * c / n as f64,
            DifferenceBound::Absolute { bound } => bound,
        }
    }

    /// The constant as it enters the bound formulas.
    pub fn constant(&self) -> f64 {
        match *self {
            DifferenceBound::Scaled { c } => c,
            DifferenceBound::Absolute { bound } => bound,
        }
    }
}

/// Change of `h_G` when `node` is relabelled to `new_label`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveDelta {
    pub node: usize,
    pub new_label: usize,
    pub delta_h: f64,
}

impl Functional {
    pub fn q_potts(q: usize, j: f64, gamma: f64) -> Self {
        Functional::QPotts {
            q,
            j,
            gamma,
            penalty: OccupationPenalty::Reichardt,
        }
    }

    /// Number of label states the functional acts on.
    pub fn q(&self) -> usize {
        match self {
            Functional::QPotts { q, .. } => *q,
            _ => 2,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Functional::Bipartition => "bipartition",
            Functional::CircuitPartition { .. } => "circuit_partition",
            Functional::Modularity => "modularity",
            Functional::QPotts { .. } => "q_potts",
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Functional::CircuitPartition { lambda_pen } if !(*lambda_pen >= 0.0) => {
                Err(Error::Spec(format!("lambda_pen must be >= 0, got {lambda_pen}")))
            }
            Functional::QPotts { q, j, gamma, .. } => {
                if *q < 2 {
                    Err(Error::Spec(format!("q must be >= 2, got {q}")))
                } else if !(*j > 0.0) {
                    Err(Error::Spec(format!("J must be > 0, got {j}")))
                } else if !(*gamma >= 0.0) {
                    Err(Error::Spec(format!("gamma must be >= 0, got {gamma}")))
                } else {
                    Ok(())
                }
            }
            _ => Ok(()),
        }
    }

    /// True when relabelling states by any permutation leaves `h` unchanged
    /// on every graph.
    pub(crate) fn label_symmetric(&self) -> bool {
        match self {
            Functional::QPotts { penalty, .. } => penalty.is_reichardt(),
            _ => true,
        }
    }

    fn needs_edges(&self) -> bool {
        matches!(self, Functional::Modularity | Functional::QPotts { .. })
    }

    /// Checks that `(g, s)` is a valid argument pair.
    pub fn check(&self, g: &Graph, s: &SpinConfig) -> Result<()> {
        self.validate()?;
        if s.q() != self.q() {
            return Err(Error::QMismatch {
                expected: self.q(),
                found: s.q(),
            });
        }
        if s.len() != g.node_count() {
            return Err(Error::Input(format!(
                "configuration has {} labels for a graph with {} nodes",
                s.len(),
                g.node_count()
            )));
        }
        if self.needs_edges() && g.edge_count() == 0 {
            return Err(Error::Degenerate(format!(
                "{} is undefined on a graph with no edges",
                self.name()
            )));
        }
        Ok(())
    }

    /// Bounded-difference constant for one-edge perturbations. `m_star`
    /// defaults to `n - 1` (only modularity uses it).
    pub fn bounded_diff_constant(&self, n: usize, m_star: Option<usize>) -> DifferenceBound {
        match self {
            Functional::Bipartition => DifferenceBound::Scaled { c: 1.0 },
            Functional::CircuitPartition { .. } => DifferenceBound::Scaled { c: 0.5 },
            Functional::Modularity => {
                let m_star = m_star.unwrap_or(n.saturating_sub(1)).max(1);
                DifferenceBound::Scaled {
                    c: 11.0 * n as f64 / (8.0 * m_star as f64),
                }
            }
            Functional::QPotts { j, .. } => DifferenceBound::Absolute { bound: j / 2.0 },
        }
    }
}

/// `h_G(s)` for functional `f`.
pub fn evaluate(f: &Functional, g: &Graph, s: &SpinConfig) -> Result<f64> {
    Ok(EnergyState::new(f, g, s)?.value())
}

/// `h_G(s') - h_G(s)` where `s'` relabels `node` to `new_label`.
///
/// Building the aggregates costs `O(N + m)`; hold an [`EnergyState`] to get
/// `O(degree + q)` deltas in a loop.
pub fn move_delta(f: &Functional, g: &Graph, s: &SpinConfig, node: usize, new_label: usize) -> Result<MoveDelta> {
    let state = EnergyState::new(f, g, s)?;
    if node >= g.node_count() {
        return Err(Error::Input(format!("node {node} out of range")));
    }
    if new_label >= f.q() {
        return Err(Error::Input(format!("label {new_label} is not below q = {}", f.q())));
    }
    Ok(MoveDelta {
        node,
        new_label,
        delta_h: state.delta(node, new_label),
    })
}

/// Free function form of [`Functional::bounded_diff_constant`].
pub fn bounded_diff_constant(f: &Functional, n: usize, m_star: Option<usize>) -> DifferenceBound {
    f.bounded_diff_constant(n, m_star)
}

/// Aggregates that determine `h_G(s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Aggregates {
    // two-state: sum over edges of s_u s_v; q-Potts: monochromatic edge count
    align: i64,
    // sum_i d_i s_i (two-state only)
    weighted: i64,
}

/// A configuration together with the aggregates of `f` on `g`, updated in
/// `O(degree + q)` per move.
#[derive(Debug, Clone)]
pub struct EnergyState<'a> {
    f: &'a Functional,
    g: &'a Graph,
    labels: Vec<usize>,
    counts: Vec<usize>,
    agg: Aggregates,
    sum_d2: i64,
}

impl<'a> EnergyState<'a> {
    pub fn new(f: &'a Functional, g: &'a Graph, s: &SpinConfig) -> Result<Self> {
        f.check(g, s)?;
        Ok(Self::new_unchecked(f, g, s.labels().to_vec()))
    }

    pub(crate) fn new_unchecked(f: &'a Functional, g: &'a Graph, labels: Vec<usize>) -> Self {
        let q = f.q();
        let mut counts = vec![0; q];
        for &l in &labels {
            counts[l] += 1;
        }
        let mut align = 0i64;
        let mut weighted = 0i64;
        let mut sum_d2 = 0i64;
        let potts = matches!(f, Functional::QPotts { .. });
        for u in 0..g.node_count() {
            let d = g.degree(u) as i64;
            sum_d2 += d * d;
            if !potts {
                weighted += d * spin(labels[u]);
            }
            for &v in g.neighbors(u) {
                if v > u {
                    align += if potts {
                        (labels[u] == labels[v]) as i64
                    } else {
                        spin(labels[u]) * spin(labels[v])
                    };
                }
            }
        }
        EnergyState {
            f,
            g,
            labels,
            counts,
            agg: Aggregates { align, weighted },
            sum_d2,
        }
    }

    #[inline]
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    #[inline]
    pub fn label(&self, node: usize) -> usize {
        self.labels[node]
    }

    pub fn config(&self) -> SpinConfig {
        SpinConfig::from_parts_unchecked(self.labels.clone(), self.f.q())
    }

    /// Current `h_G(s)`.
    pub fn value(&self) -> f64 {
        let penalty = match self.f {
            Functional::QPotts { penalty, .. } => penalty.eval(&self.counts),
            _ => 0.0,
        };
        self.value_of(self.agg, self.magnetization(), penalty)
    }

    #[inline]
    fn magnetization(&self) -> i64 {
        if self.counts.len() == 2 {
            self.counts[1] as i64 - self.counts[0] as i64
        } else {
            0
        }
    }

    fn value_of(&self, agg: Aggregates, mag: i64, penalty: f64) -> f64 {
        let n = self.g.node_count() as f64;
        let m = self.g.edge_count() as i64;
        match *self.f {
            Functional::Bipartition => -2.0 * agg.align as f64 / n,
            Functional::CircuitPartition { lambda_pen } => {
                let pair_sum = (mag * mag) as f64 - n;
                -(agg.align as f64 - lambda_pen * pair_sum) / n
            }
            Functional::Modularity => {
                // -(1/4m)[2E - (D^2 - sum d^2)/(2m)] = -(4mE - D^2 + sum d^2) / (8 m^2)
                let num = 4 * m as i128 * agg.align as i128 - (agg.weighted as i128).pow(2) + self.sum_d2 as i128;
                -(num as f64) / (8.0 * (m as f64) * (m as f64))
            }
            Functional::QPotts { j, gamma, .. } => {
                let m = m as f64;
                -j * agg.align as f64 / (2.0 * m) + gamma * penalty / (2.0 * m)
            }
        }
    }

    fn aggregates_after(&self, node: usize, new_label: usize) -> Aggregates {
        let old = self.labels[node];
        match self.f {
            Functional::QPotts { .. } => {
                let mut gain = 0i64;
                for &v in self.g.neighbors(node) {
                    let lv = self.labels[v];
                    gain += (lv == new_label) as i64 - (lv == old) as i64;
                }
                Aggregates {
                    align: self.agg.align + gain,
                    weighted: 0,
                }
            }
            _ => {
                let s_old = spin(old);
                let nbr: i64 = self.g.neighbors(node).iter().map(|&v| spin(self.labels[v])).sum();
                let d = self.g.degree(node) as i64;
                Aggregates {
                    align: self.agg.align - 2 * s_old * nbr,
                    weighted: self.agg.weighted - 2 * s_old * d,
                }
            }
        }
    }

    fn penalty_after(&self, old: usize, new_label: usize) -> f64 {
        match self.f {
            Functional::QPotts { penalty, .. } => match penalty {
                OccupationPenalty::Reichardt => {
                    let base = reichardt(&self.counts) as i64;
                    // n_new -> n_new + 1 adds n_new; n_old -> n_old - 1 removes n_old - 1
                    (base + self.counts[new_label] as i64 - (self.counts[old] as i64 - 1)) as f64
                }
                OccupationPenalty::Custom(func) => {
                    let mut c = self.counts.clone();
                    c[old] -= 1;
                    c[new_label] += 1;
                    func(&c)
                }
            },
            _ => 0.0,
        }
    }

    /// `h(s') - h(s)` for relabelling `node` to `new_label`.
    pub fn delta(&self, node: usize, new_label: usize) -> f64 {
        let old = self.labels[node];
        if old == new_label {
            return 0.0;
        }
        let after = self.aggregates_after(node, new_label);
        let mag_after = if self.counts.len() == 2 {
            self.magnetization() + spin(new_label) - spin(old)
        } else {
            0
        };
        let (pen_before, pen_after) = match self.f {
            Functional::QPotts { penalty, .. } => (penalty.eval(&self.counts), self.penalty_after(old, new_label)),
            _ => (0.0, 0.0),
        };
        self.value_of(after, mag_after, pen_after) - self.value_of(self.agg, self.magnetization(), pen_before)
    }

    /// Relabels `node` and updates the aggregates.
    pub fn apply(&mut self, node: usize, new_label: usize) {
        let old = self.labels[node];
        if old == new_label {
            return;
        }
        self.agg = self.aggregates_after(node, new_label);
        self.counts[old] -= 1;
        self.counts[new_label] += 1;
        self.labels[node] = new_label;
    }
}

#[inline]
fn spin(label: usize) -> i64 {
    2 * label as i64 - 1
}
