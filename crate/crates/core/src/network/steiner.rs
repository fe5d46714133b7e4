use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use super::{NodeId, ResourceNetwork};
use crate::{Error, Result};

/// Largest non-terminal count accepted by the exhaustive search.
pub const EXACT_LIMIT: usize = 16;

type Adj = BTreeMap<NodeId, BTreeMap<NodeId, u32>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SteinerTree {
    pub terminals: BTreeSet<NodeId>,
    /// Edges as `(low, high)` pairs, sorted.
    pub edges: Vec<(NodeId, NodeId)>,
    /// Non-terminal nodes the tree passes through.
    pub added: Vec<NodeId>,
}

impl SteinerTree {
    pub fn nodes(&self) -> BTreeSet<NodeId> {
        let mut out = self.terminals.clone();
        for &(a, b) in &self.edges {
            out.insert(a);
            out.insert(b);
        }
        out
    }

    pub fn neighbours(&self) -> BTreeMap<NodeId, BTreeSet<NodeId>> {
        let mut adj: BTreeMap<NodeId, BTreeSet<NodeId>> =
            self.nodes().into_iter().map(|n| (n, BTreeSet::new())).collect();
        for &(a, b) in &self.edges {
            adj.entry(a).or_default().insert(b);
            adj.entry(b).or_default().insert(a);
        }
        adj
    }

    /// Connected, acyclic, spans the terminals, and every leaf is a terminal.
    pub fn is_valid(&self) -> bool {
        let nodes = self.nodes();
        if self.edges.len() + 1 != nodes.len() {
            return false;
        }
        let adj = self.neighbours();
        let Some(&start) = nodes.iter().next() else { return false };
        let mut seen = BTreeSet::from([start]);
        let mut stack = vec![start];
        while let Some(n) = stack.pop() {
            for &m in &adj[&n] {
                if seen.insert(m) {
                    stack.push(m);
                }
            }
        }
        seen.len() == nodes.len()
            && (nodes.len() == 1
                || adj.iter().all(|(n, ns)| ns.len() != 1 || self.terminals.contains(n)))
    }
}

fn norm(a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    (a.min(b), a.max(b))
}

/// Dijkstra with ties broken towards the lowest-id predecessor.
fn shortest_paths(adj: &Adj, src: NodeId) -> BTreeMap<NodeId, (u64, NodeId)> {
    let mut best: BTreeMap<NodeId, (u64, NodeId)> = BTreeMap::from([(src, (0, src))]);
    let mut done = BTreeSet::new();
    let mut heap = BinaryHeap::from([Reverse((0u64, src))]);
    while let Some(Reverse((dist, n))) = heap.pop() {
        if !done.insert(n) {
            continue;
        }
        for (&m, &w) in &adj[&n] {
            let cand = (dist + w as u64, n);
            let better = match best.get(&m) {
                None => true,
                Some(&cur) => cand < cur,
            };
            if better && !done.contains(&m) {
                best.insert(m, cand);
                heap.push(Reverse((cand.0, m)));
            }
        }
    }
    best
}

/// Kruskal over `(weight, u, v)` in lexicographic order.
fn kruskal(nodes: &[NodeId], mut edges: Vec<(u64, NodeId, NodeId)>) -> Vec<(u64, NodeId, NodeId)> {
    let index: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    edges.sort();
    let mut uf = UnionFind::<usize>::new(nodes.len());
    edges.into_iter().filter(|&(_, a, b)| uf.union(index[&a], index[&b])).collect()
}

fn prune_leaves(edges: &mut BTreeSet<(NodeId, NodeId)>, terminals: &BTreeSet<NodeId>) {
    loop {
        let mut degree: BTreeMap<NodeId, usize> = BTreeMap::new();
        for &(a, b) in edges.iter() {
            *degree.entry(a).or_default() += 1;
            *degree.entry(b).or_default() += 1;
        }
        let leaves: Vec<NodeId> = degree
            .iter()
            .filter(|(n, &deg)| deg == 1 && !terminals.contains(n))
            .map(|(&n, _)| n)
            .collect();
        if leaves.is_empty() {
            return;
        }
        edges.retain(|(a, b)| !leaves.contains(a) && !leaves.contains(b));
    }
}

fn finish(terminals: BTreeSet<NodeId>, edges: BTreeSet<(NodeId, NodeId)>) -> SteinerTree {
    let mut added = BTreeSet::new();
    for &(a, b) in &edges {
        for n in [a, b] {
            if !terminals.contains(&n) {
                added.insert(n);
            }
        }
    }
    SteinerTree { terminals, edges: edges.into_iter().collect(), added: added.into_iter().collect() }
}

/// Tree spanning `terminals`: metric-closure MST (a 2-approximation), or an
/// exhaustive search over Steiner-node subsets when `exact` is set.
pub fn steiner_tree(net: &ResourceNetwork, terminals: &[NodeId], exact: bool) -> Result<SteinerTree> {
    let terms: BTreeSet<NodeId> = terminals.iter().copied().collect();
    if terms.is_empty() {
        return Err(Error::Network("no terminals given".into()));
    }
    if let Some(t) = terms.iter().find(|t| !net.contains(**t)) {
        return Err(Error::Network(format!("terminal {t} is not a network node")));
    }
    let adj = net.adjacency();
    let paths: BTreeMap<NodeId, _> = terms.iter().map(|&t| (t, shortest_paths(&adj, t))).collect();
    let first = *terms.iter().next().expect("nonempty");
    if let Some(t) = terms.iter().find(|t| !paths[&first].contains_key(t)) {
        return Err(Error::Disconnected(format!("no path from {first} to {t}")));
    }
    if terms.len() == 1 {
        return Ok(finish(terms, BTreeSet::new()));
    }
    if exact {
        return exact_tree(net, &adj, terms);
    }

    let tlist: Vec<NodeId> = terms.iter().copied().collect();
    let mut closure = Vec::new();
    for (i, &a) in tlist.iter().enumerate() {
        for &b in &tlist[i + 1..] {
            closure.push((paths[&a][&b].0, a, b));
        }
    }
    let mut sub: BTreeMap<(NodeId, NodeId), u64> = BTreeMap::new();
    for (_, a, b) in kruskal(&tlist, closure) {
        let tree = &paths[&a];
        let mut cur = b;
        while cur != a {
            let prev = tree[&cur].1;
            sub.insert(norm(prev, cur), adj[&prev][&cur] as u64);
            cur = prev;
        }
    }
    let sub_nodes: Vec<NodeId> =
        sub.keys().flat_map(|&(a, b)| [a, b]).collect::<BTreeSet<_>>().into_iter().collect();
    let mst = kruskal(&sub_nodes, sub.iter().map(|(&(a, b), &w)| (w, a, b)).collect());
    let mut edges: BTreeSet<_> = mst.into_iter().map(|(_, a, b)| norm(a, b)).collect();
    prune_leaves(&mut edges, &terms);
    Ok(finish(terms, edges))
}

type WeightedEdge = (u64, NodeId, NodeId);

fn exact_tree(net: &ResourceNetwork, adj: &Adj, terms: BTreeSet<NodeId>) -> Result<SteinerTree> {
    let others: Vec<NodeId> = net.node_ids().difference(&terms).copied().collect();
    if others.len() > EXACT_LIMIT {
        return Err(Error::Network(format!(
            "exact Steiner search supports at most {EXACT_LIMIT} non-terminals, got {}",
            others.len()
        )));
    }
    let mut best: Option<(u64, usize, Vec<WeightedEdge>)> = None;
    for mask in 0usize..(1 << others.len()) {
        let mut nodes: BTreeSet<NodeId> = terms.clone();
        nodes.extend(others.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &n)| n));
        let list: Vec<NodeId> = nodes.iter().copied().collect();
        let mut edges = Vec::new();
        for &a in &list {
            for (&b, &w) in &adj[&a] {
                if a < b && nodes.contains(&b) {
                    edges.push((w as u64, a, b));
                }
            }
        }
        let mst = kruskal(&list, edges);
        if mst.len() + 1 != list.len() {
            continue;
        }
        let cost: u64 = mst.iter().map(|e| e.0).sum();
        let key = (cost, list.len());
        if best.as_ref().is_none_or(|(c, n, _)| key < (*c, *n)) {
            best = Some((cost, list.len(), mst));
        }
    }
    let (_, _, mst) = best.ok_or_else(|| Error::Disconnected("terminals are not connected".into()))?;
    let mut edges: BTreeSet<_> = mst.into_iter().map(|(_, a, b)| norm(a, b)).collect();
    prune_leaves(&mut edges, &terms);
    Ok(finish(terms, edges))
}
