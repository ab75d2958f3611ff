//! Simple undirected graphs, spin configurations and magnetization constraints.
//!
//! A [`Graph`] is immutable once built. The only "mutation" is
//! [`Graph::flip_edge`], which returns a new graph with one node pair toggled.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected simple graph on nodes `0..n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    // sorted neighbor lists; degree of i is adj[i].len()
    adj: Vec<Vec<usize>>,
    m: usize,
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Graph {
            n,
            adj: vec![Vec::new(); n],
            m: 0,
        }
    }

    pub fn complete(n: usize) -> Self {
        let pairs = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j)));
        Self::from_edge_list(n, pairs).expect("complete graph pairs are valid")
    }

    /// Builds a graph from node pairs. Duplicate pairs (in either orientation)
    /// collapse to one edge.
    pub fn from_edge_list<I>(n: usize, pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in pairs {
            if u >= n || v >= n {
                return Err(Error::Input(format!("edge ({u}, {v}) has an endpoint outside 0..{n}")));
            }
            if u == v {
                return Err(Error::Input(format!("self-loop at node {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        let mut twice_m = 0;
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
            twice_m += list.len();
        }
        Ok(Graph { n, adj, m: twice_m / 2 })
    }

    pub(crate) fn from_sorted_adjacency(adj: Vec<Vec<usize>>) -> Self {
        let m = adj.iter().map(Vec::len).sum::<usize>() / 2;
        Graph { n: adj.len(), adj, m }
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.adj.iter().map(Vec::len).collect()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    #[inline]
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.adj[i].binary_search(&j).is_ok()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// Maximum possible edge count, `n(n-1)/2`.
    pub fn pair_count(&self) -> usize {
        self.n * self.n.saturating_sub(1) / 2
    }

    /// Copy of `self` with the presence of `{i, j}` toggled.
    pub fn flip_edge(&self, i: usize, j: usize) -> Result<Graph> {
        if i == j {
            return Err(Error::Input(format!("cannot flip self-pair ({i}, {i})")));
        }
        if i >= self.n || j >= self.n {
            return Err(Error::Input(format!(
                "pair ({i}, {j}) has an endpoint outside 0..{}",
                self.n
            )));
        }
        let mut out = self.clone();
        match out.adj[i].binary_search(&j) {
            Ok(pos) => {
                out.adj[i].remove(pos);
                let pos_j = out.adj[j].binary_search(&i).expect("adjacency is symmetric");
                out.adj[j].remove(pos_j);
                out.m -= 1;
            }
            Err(pos) => {
                out.adj[i].insert(pos, j);
                let pos_j = out.adj[j].binary_search(&i).unwrap_err();
                out.adj[j].insert(pos_j, i);
                out.m += 1;
            }
        }
        Ok(out)
    }

    /// Canonical edge-list text: header `N m`, then one `u v` line per edge
    /// (`u < v`, lexicographic order), LF line endings.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::with_capacity(16 + 12 * self.m);
        let _ = writeln!(out, "{} {}", self.n, self.m);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn write_edge_list<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_edge_list_string().as_bytes())?;
        Ok(())
    }

    pub fn save_edge_list(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_edge_list_string())?;
        Ok(())
    }

    /// Parses the edge-list text format. The declared edge count must match
    /// the number of edge lines, and duplicate edges are rejected.
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        Self::read_edge_list(text.as_bytes())
    }

    pub fn read_edge_list<R: BufRead>(r: R) -> Result<Graph> {
        let mut lines = r.lines();
        let header = loop {
            match lines.next() {
                Some(line) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(Error::Input("edge list is empty".into())),
            }
        };
        let mut fields = header.split_whitespace();
        let n = parse_field(fields.next(), "node count")?;
        let m: usize = parse_field(fields.next(), "edge count")?;
        if fields.next().is_some() {
            return Err(Error::Input(format!("malformed header line: {header:?}")));
        }
        let mut pairs = Vec::with_capacity(m);
        for line in lines {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut f = line.split_whitespace();
            let u = parse_field(f.next(), "edge endpoint")?;
            let v = parse_field(f.next(), "edge endpoint")?;
            if f.next().is_some() {
                return Err(Error::Input(format!("malformed edge line: {line:?}")));
            }
            pairs.push((u, v));
        }
        if pairs.len() != m {
            return Err(Error::Input(format!(
                "header declares {m} edges but {} edge lines follow",
                pairs.len()
            )));
        }
        let g = Graph::from_edge_list(n, pairs)?;
        if g.m != m {
            return Err(Error::Input("edge list contains duplicate edges".into()));
        }
        Ok(g)
    }

    pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Graph> {
        let file = std::fs::File::open(path)?;
        Self::read_edge_list(std::io::BufReader::new(file))
    }
}

fn parse_field(field: Option<&str>, what: &str) -> Result<usize> {
    let s = field.ok_or_else(|| Error::Input(format!("missing {what}")))?;
    s.parse().map_err(|_| Error::Input(format!("invalid {what}: {s:?}")))
}

/// A labelling of the nodes with states `0..q`. For `q = 2` the spin of node
/// `i` is `2 * labels[i] - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfig {
    labels: Vec<usize>,
    q: usize,
}

impl SpinConfig {
    pub fn new(labels: Vec<usize>, q: usize) -> Result<Self> {
        if q < 2 {
            return Err(Error::Input(format!("q must be at least 2, got {q}")));
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l >= q) {
            return Err(Error::Input(format!("label {l} at node {i} is not below q = {q}")));
        }
        Ok(SpinConfig { labels, q })
    }

    /// Two-state configuration from spins in {-1, +1}.
    pub fn from_spins(spins: &[i8]) -> Result<Self> {
        let labels = spins
            .iter()
            .map(|&s| match s {
                1 => Ok(1),
                -1 => Ok(0),
                other => Err(Error::Input(format!("spin must be -1 or +1, got {other}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SpinConfig { labels, q: 2 })
    }

    pub fn uniform(n: usize, q: usize, label: usize) -> Result<Self> {
        Self::new(vec![label; n], q)
    }

    pub(crate) fn from_parts_unchecked(labels: Vec<usize>, q: usize) -> Self {
        SpinConfig { labels, q }
    }

    #[inline]
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn q(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Spin of node `i` for two-state configurations.
    #[inline]
    pub fn spin(&self, i: usize) -> i64 {
        2 * self.labels[i] as i64 - 1
    }

    /// `n_s = #{i : labels[i] = s}` for every state `s`.
    pub fn occupation(&self) -> Vec<usize> {
        let mut counts = vec![0; self.q];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// `M = sum_i s_i`.
    pub fn magnetization(&self) -> Result<i64> {
        if self.q != 2 {
            return Err(Error::UnsupportedForQState(self.q));
        }
        Ok(self.labels.iter().map(|&l| 2 * l as i64 - 1).sum())
    }

    /// Copy with node `node` relabelled.
    pub fn with_label(&self, node: usize, label: usize) -> Result<Self> {
        if node >= self.labels.len() {
            return Err(Error::Input(format!("node {node} out of range")));
        }
        if label >= self.q {
            return Err(Error::Input(format!("label {label} is not below q = {}", self.q)));
        }
        let mut out = self.clone();
        out.labels[node] = label;
        Ok(out)
    }

    /// Global spin flip `s -> -s` (two-state only).
    pub fn flipped(&self) -> Result<Self> {
        if self.q != 2 {
            return Err(Error::UnsupportedForQState(self.q));
        }
        Ok(SpinConfig {
            labels: self.labels.iter().map(|&l| 1 - l).collect(),
            q: 2,
        })
    }

    /// One label per line, node order.
    pub fn to_label_lines(&self) -> String {
        let mut out = String::with_capacity(2 * self.labels.len());
        for l in &self.labels {
            let _ = writeln!(out, "{l}");
        }
        out
    }

    /// Parses one integer label per line.
    pub fn parse_label_lines(text: &str, q: usize) -> Result<Self> {
        let labels = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.parse::<usize>()
                    .map_err(|_| Error::Input(format!("invalid label {l:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(labels, q)
    }
}

/// Restriction on the spin space `S` that `H(G)` is minimized over.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstraintSpec {
    #[default]
    Unconstrained,
    /// `M = 0`: equal halves.
    ZeroMagnetization,
    /// `M = c`.
    FixedMagnetization { c: i64 },
    /// Exact occupation numbers `n_s` for each state.
    FixedGroupSizes { sizes: Vec<usize> },
}

impl ConstraintSpec {
    /// Checks the constraint can be met by some configuration on `n` nodes
    /// with `q` states.
    pub fn validate(&self, n: usize, q: usize) -> Result<()> {
        match self {
            ConstraintSpec::Unconstrained => Ok(()),
            ConstraintSpec::ZeroMagnetization => {
                if q != 2 {
                    Err(Error::UnsupportedForQState(q))
                } else if !n.is_multiple_of(2) {
                    Err(Error::Input(format!("zero magnetization needs even N, got {n}")))
                } else {
                    Ok(())
                }
            }
            ConstraintSpec::FixedMagnetization { c } => {
                if q != 2 {
                    Err(Error::UnsupportedForQState(q))
                } else if c.unsigned_abs() as usize > n || (n as i64 + c) % 2 != 0 {
                    Err(Error::Input(format!("magnetization {c} is not reachable with N = {n}")))
                } else {
                    Ok(())
                }
            }
            ConstraintSpec::FixedGroupSizes { sizes } => {
                if sizes.len() != q {
                    Err(Error::Input(format!("{} group sizes given for q = {q}", sizes.len())))
                } else if sizes.iter().sum::<usize>() != n {
                    Err(Error::Input(format!("group sizes do not sum to N = {n}")))
                } else {
                    Ok(())
                }
            }
        }
    }

    /// Occupation numbers every admissible configuration must have, if fixed.
    pub fn required_counts(&self, n: usize, q: usize) -> Option<Vec<usize>> {
        match self {
            ConstraintSpec::Unconstrained => None,
            ConstraintSpec::ZeroMagnetization => Some(vec![n / 2, n / 2]),
            ConstraintSpec::FixedMagnetization { c } => {
                let up = ((n as i64 + c) / 2) as usize;
                Some(vec![n - up, up])
            }
            ConstraintSpec::FixedGroupSizes { sizes } => {
                debug_assert_eq!(sizes.len(), q);
                Some(sizes.clone())
            }
        }
    }

    pub fn fixes_counts(&self) -> bool {
        !matches!(self, ConstraintSpec::Unconstrained)
    }

    pub fn is_satisfied(&self, s: &SpinConfig) -> bool {
        match self.required_counts(s.len(), s.q()) {
            None => true,
            Some(req) => s.occupation() == req,
        }
    }

    /// True when swapping labels 0 and 1 maps admissible configurations onto
    /// admissible configurations.
    pub(crate) fn symmetric_under_label_swap(&self) -> bool {
        match self {
            ConstraintSpec::Unconstrained | ConstraintSpec::ZeroMagnetization => true,
            ConstraintSpec::FixedMagnetization { c } => *c == 0,
            ConstraintSpec::FixedGroupSizes { sizes } => sizes.windows(2).all(|w| w[0] == w[1]),
        }
    }
}
