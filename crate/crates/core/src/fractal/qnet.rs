use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;
use serde_json::json;

use super::{check_iteration, triangles_at, Point, Tri};
use crate::Result;

/// A tripartite channel between the corners of one sub-gasket.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Channel {
    pub corners: [usize; 3],
    /// `s` for a triangle of side `2^s`; elementary channels have scale 0.
    pub scale: usize,
}

/// The quantum network F(t): every sub-gasket at every scale contributes a
/// channel among its three corners.
#[derive(Clone, Debug, Serialize)]
pub struct FractalNetwork {
    pub t: usize,
    pub vertices: Vec<Point>,
    /// Generation in which each vertex appears; the outer corners are 0.
    pub generation: Vec<usize>,
    pub channels: Vec<Channel>,
    pub edges: BTreeSet<(usize, usize)>,
}

pub fn build_quantum_network(t: usize) -> Result<FractalNetwork> {
    check_iteration(t)?;
    let root = Tri { x: 0, y: 0, side: 1 << t };
    let mut index: BTreeMap<Point, usize> = BTreeMap::new();
    let mut vertices = Vec::new();
    let mut generation = Vec::new();
    for p in root.corners() {
        index.insert(p, vertices.len());
        vertices.push(p);
        generation.push(0);
    }
    // Midpoints of a side-2^s triangle first appear in generation t - s + 1.
    for s in (1..=t).rev() {
        for tri in triangles_at(root, 1 << s) {
            for sub in tri.split() {
                for p in sub.corners() {
                    index.entry(p).or_insert_with(|| {
                        vertices.push(p);
                        generation.push(t - s + 1);
                        vertices.len() - 1
                    });
                }
            }
        }
    }
    let mut channels = Vec::new();
    let mut edges = BTreeSet::new();
    for s in 0..=t {
        for tri in triangles_at(root, 1 << s) {
            let c = tri.corners().map(|p| index[&p]);
            for (a, b) in [(c[0], c[1]), (c[1], c[2]), (c[0], c[2])] {
                edges.insert((a.min(b), a.max(b)));
            }
            channels.push(Channel { corners: c, scale: s });
        }
    }
    Ok(FractalNetwork { t, vertices, generation, channels, edges })
}

impl FractalNetwork {
    pub fn node_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbours(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.vertices.len()];
        for &(a, b) in &self.edges {
            adj[a].insert(b);
            adj[b].insert(a);
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.neighbours().iter().map(|n| n.len()).collect()
    }

    /// Local clustering coefficient per vertex (0 below degree 2).
    pub fn clustering(&self) -> Vec<f64> {
        let adj = self.neighbours();
        adj.iter()
            .map(|ns| {
                let k = ns.len();
                if k < 2 {
                    return 0.0;
                }
                let links = ns
                    .iter()
                    .map(|&a| ns.iter().filter(|&&b| b > a && adj[a].contains(&b)).count())
                    .sum::<usize>();
                2.0 * links as f64 / (k * (k - 1)) as f64
            })
            .collect()
    }

    /// Mean shortest-path length over all ordered vertex pairs.
    pub fn average_path_length(&self) -> f64 {
        let adj = self.neighbours();
        let n = adj.len();
        let mut total = 0u64;
        for src in 0..n {
            let mut dist = vec![usize::MAX; n];
            dist[src] = 0;
            let mut queue = VecDeque::from([src]);
            while let Some(v) = queue.pop_front() {
                for &w in &adj[v] {
                    if dist[w] == usize::MAX {
                        dist[w] = dist[v] + 1;
                        queue.push_back(w);
                    }
                }
            }
            total += dist.iter().map(|&d| d as u64).sum::<u64>();
        }
        total as f64 / (n * (n - 1)) as f64
    }

    /// `{"nodes": [...], "adjacency": {"id": [neighbours]}}`.
    pub fn adjacency_json(&self) -> serde_json::Value {
        let adj = self.neighbours();
        let nodes: Vec<_> = self
            .vertices
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| json!({"id": i, "x": x, "y": y, "generation": self.generation[i]}))
            .collect();
        let adjacency: serde_json::Map<String, serde_json::Value> =
            adj.iter().enumerate().map(|(i, ns)| (i.to_string(), json!(ns))).collect();
        json!({"t": self.t, "nodes": nodes, "adjacency": adjacency})
    }

    /// One `a b` pair per line.
    pub fn edge_list(&self) -> String {
        self.edges.iter().map(|(a, b)| format!("{a} {b}\n")).collect()
    }
}
