//! Undirected simple graphs on `0..node_count` and their JSON adjacency form.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected graph without self loops. Edges are stored as `(p, q)`, `p < q`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Graph {
    node_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    pub fn empty(node_count: usize) -> Self {
        Graph {
            node_count,
            edges: BTreeSet::new(),
        }
    }

    pub fn complete(node_count: usize) -> Self {
        let mut g = Graph::empty(node_count);
        for p in 0..node_count {
            for q in p + 1..node_count {
                g.edges.insert((p, q));
            }
        }
        g
    }

    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut g = Graph::empty(node_count);
        for (p, q) in edges {
            g.try_add_edge(p, q)?;
        }
        Ok(g)
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of unordered node pairs, `P (P - 1) / 2`.
    pub fn pair_count(&self) -> usize {
        self.node_count * self.node_count.saturating_sub(1) / 2
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, p: usize, q: usize) -> bool {
        self.edges.contains(&(p.min(q), p.max(q)))
    }

    fn try_add_edge(&mut self, p: usize, q: usize) -> Result<bool> {
        if p == q {
            return Err(Error::data(format!("self loop at node {p}")));
        }
        if p >= self.node_count || q >= self.node_count {
            return Err(Error::data(format!(
                "edge ({p}, {q}) out of range for {} nodes",
                self.node_count
            )));
        }
        Ok(self.edges.insert((p.min(q), p.max(q))))
    }

    /// Adds `{p, q}`; returns whether it was new.
    ///
    /// Panics on self loops or out-of-range nodes.
    pub fn add_edge(&mut self, p: usize, q: usize) -> bool {
        self.try_add_edge(p, q).expect("invalid edge")
    }

    pub fn union(&self, other: &Graph) -> Graph {
        assert_eq!(self.node_count, other.node_count, "graph sizes differ");
        Graph {
            node_count: self.node_count,
            edges: self.edges.union(&other.edges).copied().collect(),
        }
    }

    pub fn neighbours(&self, p: usize) -> Vec<usize> {
        (0..self.node_count)
            .filter(|&q| q != p && self.has_edge(p, q))
            .collect()
    }

    pub fn degree(&self, p: usize) -> usize {
        self.neighbours(p).len()
    }

    /// 0/1 symmetric adjacency matrix.
    pub fn adjacency(&self) -> DMatrix<u8> {
        let mut a = DMatrix::zeros(self.node_count, self.node_count);
        for &(p, q) in &self.edges {
            a[(p, q)] = 1;
            a[(q, p)] = 1;
        }
        a
    }

    /// Shortest-path distances from `source`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let adj: Vec<Vec<usize>> = (0..self.node_count).map(|p| self.neighbours(p)).collect();
        let mut dist = vec![None; self.node_count];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &v in &adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Applies a node relabelling `perm[old] = new`.
    pub fn permute(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.node_count);
        Graph {
            node_count: self.node_count,
            edges: self
                .edges
                .iter()
                .map(|&(p, q)| (perm[p].min(perm[q]), perm[p].max(perm[q])))
                .collect(),
        }
    }
}

/// Estimation details carried in the `meta` block of the JSON form.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphMeta {
    #[serde(default)]
    pub method: String,
    #[serde(default)]
    pub scales_selected: Vec<usize>,
    #[serde(default)]
    pub lambda_per_scale: BTreeMap<String, f64>,
}

/// `{"nodes": [...], "edges": [[p, q], ...], "meta": {...}}` with 0-based indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<String>,
    pub edges: Vec<[usize; 2]>,
    #[serde(default)]
    pub meta: GraphMeta,
}

impl GraphDocument {
    pub fn new(graph: &Graph, nodes: Vec<String>, meta: GraphMeta) -> Self {
        assert_eq!(nodes.len(), graph.node_count());
        GraphDocument {
            nodes,
            edges: graph.edges().map(|(p, q)| [p, q]).collect(),
            meta,
        }
    }

    pub fn graph(&self) -> Result<Graph> {
        Graph::from_edges(self.nodes.len(), self.edges.iter().map(|e| (e[0], e[1])))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::data(format!("{}: {e}", path.display())))
    }

    /// Compact JSON followed by a newline.
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }
}
