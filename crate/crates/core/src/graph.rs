//! Weighted undirected graphs, edge-list I/O, generators, and the symmetric
//! variation operators whose eigenbases drive everything else.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// Undirected weighted edge; canonical orientation `u < v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Weighted undirected graph with no self-loops and no duplicate edges.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<Edge>,
}

/// The symmetric matrix whose eigenbasis defines the frequency domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariationKind {
    /// `L = D - A`.
    CombinatorialLaplacian,
    /// `D^{-1/2} (D - A) D^{-1/2}`; requires every vertex to have an edge.
    NormalizedLaplacian,
    /// The adjacency matrix itself. Eigenvalues are still sorted ascending,
    /// so the "low frequency" end of the index range is the most negative
    /// eigenvalue — the smoothness interpretation is reversed relative to the
    /// Laplacians, but index-based folding and reconstruction are unaffected.
    Adjacency,
}

impl VariationKind {
    pub const ALL: [VariationKind; 3] = [
        VariationKind::CombinatorialLaplacian,
        VariationKind::NormalizedLaplacian,
        VariationKind::Adjacency,
    ];

    /// True for both Laplacian kinds (positive semi-definite, `λ_0 = 0` on
    /// connected graphs).
    pub fn is_laplacian(self) -> bool {
        !matches!(self, VariationKind::Adjacency)
    }
}

impl fmt::Display for VariationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            VariationKind::CombinatorialLaplacian => "comb",
            VariationKind::NormalizedLaplacian => "norm",
            VariationKind::Adjacency => "adj",
        };
        f.write_str(s)
    }
}

impl FromStr for VariationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "comb" | "combinatorial" => Ok(VariationKind::CombinatorialLaplacian),
            "norm" | "normalized" => Ok(VariationKind::NormalizedLaplacian),
            "adj" | "adjacency" => Ok(VariationKind::Adjacency),
            other => Err(Error::Validation(format!(
                "unknown variation kind `{other}` (expected comb, norm, or adj)"
            ))),
        }
    }
}

impl Graph {
    /// Builds a graph from `(u, v, w)` triples, canonicalizing orientation.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("vertex count must be positive".into()));
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for (u, v, w) in edges {
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) exceeds vertex count {n}"
                )));
            }
            if w <= 0.0 || !w.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) has non-positive weight {w}"
                )));
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if !seen.insert((a, b)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            out.push(Edge { u: a, v: b, w });
        }
        Ok(Graph { n, edges: out })
    }

    /// Parses the edge-list text format: a header line `n <count>`, then one
    /// edge per line as `u v [w]` (weight defaults to 1.0). `#` starts a
    /// comment; blank lines are skipped; CRLF is tolerated.
    pub fn parse(text: &str) -> Result<Self> {
        let mut n: Option<usize> = None;
        let mut seen = HashSet::new();
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            let Some(count) = n else {
                if fields.len() == 2 && fields[0] == "n" {
                    n = Some(fields[1].parse().map_err(|_| Error::GraphFormat {
                        line,
                        msg: format!("bad vertex count `{}`", fields[1]),
                    })?);
                    continue;
                }
                return Err(Error::GraphFormat {
                    line,
                    msg: "expected header `n <count>` before edges".into(),
                });
            };
            if fields.len() < 2 || fields.len() > 3 {
                return Err(Error::GraphFormat {
                    line,
                    msg: format!("expected `u v [w]`, got {} fields", fields.len()),
                });
            }
            let u: usize = fields[0].parse().map_err(|_| Error::GraphFormat {
                line,
                msg: format!("bad vertex index `{}`", fields[0]),
            })?;
            let v: usize = fields[1].parse().map_err(|_| Error::GraphFormat {
                line,
                msg: format!("bad vertex index `{}`", fields[1]),
            })?;
            let w: f64 = match fields.get(2) {
                Some(s) => s.parse().map_err(|_| Error::GraphFormat {
                    line,
                    msg: format!("bad weight `{s}`"),
                })?,
                None => 1.0,
            };
            if u == v {
                return Err(Error::GraphFormat {
                    line,
                    msg: format!("self-loop at vertex {u}"),
                });
            }
            if u >= count || v >= count {
                return Err(Error::GraphFormat {
                    line,
                    msg: format!("edge ({u}, {v}) exceeds vertex count {count}"),
                });
            }
            if w <= 0.0 || !w.is_finite() {
                return Err(Error::GraphFormat {
                    line,
                    msg: format!("non-positive weight {w}"),
                });
            }
            let (a, b) = if u < v { (u, v) } else { (v, u) };
            if !seen.insert((a, b)) {
                return Err(Error::GraphFormat {
                    line,
                    msg: format!("duplicate edge ({a}, {b})"),
                });
            }
            edges.push(Edge { u: a, v: b, w });
        }
        match n {
            Some(count) => Ok(Graph { n: count, edges }),
            None => Err(Error::GraphFormat {
                line: 0,
                msg: "empty document: missing `n <count>` header".into(),
            }),
        }
    }

    /// Path graph `0 - 1 - … - (n-1)` with unit weights.
    pub fn path(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph("path graph needs n >= 2".into()));
        }
        Graph::new(n, (0..n - 1).map(|i| (i, i + 1, 1.0)))
    }

    /// Random sensor graph: `n` points uniform in the unit square, each joined
    /// to its `k` nearest neighbors (union-symmetrized), Gaussian weights
    /// `exp(-d^2 / 2θ^2)` with `θ` the mean k-NN distance. Regenerates with an
    /// incremented seed until connected, up to 100 attempts.
    pub fn random_sensor(n: usize, k: usize, seed: u64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGraph("sensor graph needs n >= 2".into()));
        }
        if k == 0 || k >= n {
            return Err(Error::InvalidGraph(format!(
                "neighbor count k = {k} must satisfy 1 <= k < n = {n}"
            )));
        }
        const MAX_ATTEMPTS: usize = 100;
        for attempt in 0..MAX_ATTEMPTS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt as u64));
            let points: Vec<(f64, f64)> = (0..n)
                .map(|_| (rng.random::<f64>(), rng.random::<f64>()))
                .collect();
            let mut pairs = BTreeSet::new();
            let mut dist_sum = 0.0;
            for i in 0..n {
                let mut nearest: Vec<(f64, usize)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| {
                        let dx = points[i].0 - points[j].0;
                        let dy = points[i].1 - points[j].1;
                        ((dx * dx + dy * dy).sqrt(), j)
                    })
                    .collect();
                nearest.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                for &(d, j) in nearest.iter().take(k) {
                    dist_sum += d;
                    pairs.insert(if i < j { (i, j) } else { (j, i) });
                }
            }
            let theta = dist_sum / (n * k) as f64;
            if theta.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                continue; // all points coincident; try the next seed
            }
            let graph = Graph::new(
                n,
                pairs.iter().map(|&(u, v)| {
                    let dx = points[u].0 - points[v].0;
                    let dy = points[u].1 - points[v].1;
                    let d2 = dx * dx + dy * dy;
                    (u, v, (-d2 / (2.0 * theta * theta)).exp())
                }),
            )?;
            if graph.is_connected() {
                return Ok(graph);
            }
        }
        Err(Error::Connectivity(MAX_ATTEMPTS))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Dense symmetric adjacency matrix.
    pub fn adjacency(&self) -> Array2<f64> {
        let mut a = Array2::zeros((self.n, self.n));
        for e in &self.edges {
            a[[e.u, e.v]] = e.w;
            a[[e.v, e.u]] = e.w;
        }
        a
    }

    /// Weighted degree of every vertex.
    pub fn degrees(&self) -> Array1<f64> {
        let mut d = Array1::zeros(self.n);
        for e in &self.edges {
            d[e.u] += e.w;
            d[e.v] += e.w;
        }
        d
    }

    /// Dense variation operator of the requested kind.
    pub fn operator(&self, kind: VariationKind) -> Result<Array2<f64>> {
        let a = self.adjacency();
        let d = self.degrees();
        match kind {
            VariationKind::Adjacency => Ok(a),
            VariationKind::CombinatorialLaplacian => {
                let mut l = -a;
                for i in 0..self.n {
                    l[[i, i]] += d[i];
                }
                Ok(l)
            }
            VariationKind::NormalizedLaplacian => {
                if let Some(i) = d.iter().position(|&x| x <= 0.0) {
                    return Err(Error::IsolatedVertex(i));
                }
                let s: Array1<f64> = d.mapv(|x| 1.0 / x.sqrt());
                let mut l = Array2::zeros((self.n, self.n));
                for i in 0..self.n {
                    l[[i, i]] = 1.0;
                }
                for e in &self.edges {
                    let v = -e.w * s[e.u] * s[e.v];
                    l[[e.u, e.v]] = v;
                    l[[e.v, e.u]] = v;
                }
                Ok(l)
            }
        }
    }

    /// Breadth-first reachability from vertex 0.
    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for e in &self.edges {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// Serializes back to the edge-list text format with lossless weights.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("n {}\n", self.n));
        for e in &self.edges {
            out.push_str(&format!("{} {} {:.16e}\n", e.u, e.v, e.w));
        }
        out
    }
}
