use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use super::{NodeId, ResourceNetwork, SteinerTree};
use crate::walk::{ProtocolKind, ProtocolSpec};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceOrigin {
    /// Index into the network's resource list.
    Network(usize),
    /// Fresh Bell pair with both halves at one node.
    Local,
    /// Output of the schedule step with this index.
    Step(usize),
}

/// A resource in the planning ledger; `parties[i]` holds site `i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduledResource {
    pub id: usize,
    pub parties: Vec<NodeId>,
    pub origin: ResourceOrigin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepPhase {
    /// Fuse the Bell pairs towards a node's children into one GHZ state.
    ChildFormation,
    /// Join the resource from above with the node's child resource.
    Merge,
    /// Join every resource held by the root.
    RootMerge,
}

/// One node-local protocol invocation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScheduleStep {
    pub index: usize,
    pub node: NodeId,
    pub level: usize,
    pub phase: StepPhase,
    pub protocol: ProtocolKind,
    pub inputs: Vec<usize>,
    /// For each input, the order of its sites in the protocol layout.
    pub layouts: Vec<Vec<usize>>,
    /// Whether the acting node keeps a site in the output.
    pub retain: bool,
    pub measured_sites: usize,
    pub output: usize,
    pub output_parties: Vec<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bells: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<(usize, usize)>,
}

impl ScheduleStep {
    /// Protocol instance for local dimension `d`.
    pub fn spec(&self, d: usize) -> ProtocolSpec {
        match self.protocol {
            ProtocolKind::BellSwap2D | ProtocolKind::BellSwapD => {
                if d == 2 {
                    ProtocolSpec::bell_swap_2d()
                } else {
                    ProtocolSpec::bell_swap_d(d, [0; 4])
                }
            }
            ProtocolKind::GhzFromBellsD => ProtocolSpec::ghz_from_bells_d(d, self.bells.unwrap_or(1)),
            _ => {
                let (m, n) = self.sizes.unwrap_or((2, 2));
                ProtocolSpec::ghz_parallel_d(d, m, n, 1).with_retain(self.retain)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SwapSchedule {
    pub local_dim: usize,
    pub terminals: Vec<NodeId>,
    pub root: Option<NodeId>,
    pub depth: BTreeMap<NodeId, usize>,
    /// Every resource that ever exists: tree-edge Bells, local Bells, outputs.
    pub resources: Vec<ScheduledResource>,
    pub steps: Vec<ScheduleStep>,
    /// Resources alive before the first step.
    pub initial: Vec<usize>,
    /// The single resource left after the last step, if any.
    pub final_resource: Option<usize>,
}

impl SwapSchedule {
    pub fn resource(&self, id: usize) -> &ScheduledResource {
        &self.resources[id]
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

struct Planner<'a> {
    terminals: &'a BTreeSet<NodeId>,
    resources: Vec<ScheduledResource>,
    live: BTreeSet<usize>,
    steps: Vec<ScheduleStep>,
}

impl Planner<'_> {
    fn add(&mut self, parties: Vec<NodeId>, origin: ResourceOrigin) -> usize {
        let id = self.resources.len();
        self.resources.push(ScheduledResource { id, parties, origin });
        self.live.insert(id);
        id
    }

    fn parties(&self, id: usize) -> &[NodeId] {
        &self.resources[id].parties
    }

    fn position(&self, id: usize, node: NodeId) -> usize {
        self.parties(id).iter().position(|&p| p == node).expect("resource holds a site at the node")
    }

    /// Site order putting `node` first (`first`) or last.
    fn layout(&self, id: usize, node: NodeId, first: bool) -> Vec<usize> {
        let at = self.position(id, node);
        let rest = (0..self.parties(id).len()).filter(|&i| i != at);
        if first {
            std::iter::once(at).chain(rest).collect()
        } else {
            rest.chain(std::iter::once(at)).collect()
        }
    }

    fn others(&self, id: usize, node: NodeId) -> Vec<NodeId> {
        let at = self.position(id, node);
        self.parties(id).iter().enumerate().filter(|&(i, _)| i != at).map(|(_, &p)| p).collect()
    }

    #[allow(clippy::too_many_arguments)]
    fn emit(
        &mut self,
        node: NodeId,
        level: usize,
        phase: StepPhase,
        protocol: ProtocolKind,
        inputs: Vec<usize>,
        layouts: Vec<Vec<usize>>,
        retain: bool,
        output_parties: Vec<NodeId>,
        bells: Option<usize>,
        sizes: Option<(usize, usize)>,
    ) -> usize {
        let index = self.steps.len();
        let consumed: usize = inputs.iter().map(|&i| self.parties(i).len()).sum();
        for i in &inputs {
            self.live.remove(i);
        }
        let measured_sites = consumed - output_parties.len();
        let output = self.add(output_parties.clone(), ResourceOrigin::Step(index));
        self.steps.push(ScheduleStep {
            index,
            node,
            level,
            phase,
            protocol,
            inputs,
            layouts,
            retain,
            measured_sites,
            output,
            output_parties,
            bells,
            sizes,
        });
        output
    }

    /// Merge `inputs` (each holding a site at `node`) into one resource.
    fn merge(
        &mut self,
        node: NodeId,
        level: usize,
        phase: StepPhase,
        d: usize,
        inputs: &[usize],
        retain: bool,
    ) -> usize {
        let all_bells = inputs.iter().all(|&i| self.parties(i).len() == 2);
        if all_bells && inputs.len() == 2 && !retain {
            let (a, b) = (inputs[0], inputs[1]);
            let layouts = vec![self.layout(a, node, false), self.layout(b, node, true)];
            let out = [self.others(a, node), self.others(b, node)].concat();
            let kind = if d == 2 { ProtocolKind::BellSwap2D } else { ProtocolKind::BellSwapD };
            return self.emit(node, level, phase, kind, inputs.to_vec(), layouts, false, out, None, None);
        }
        if all_bells {
            let (coins, position) = if retain {
                (inputs.to_vec(), self.add(vec![node, node], ResourceOrigin::Local))
            } else {
                (inputs[..inputs.len() - 1].to_vec(), inputs[inputs.len() - 1])
            };
            let mut layouts: Vec<Vec<usize>> = coins.iter().map(|&c| self.layout(c, node, false)).collect();
            layouts.push(if retain { vec![0, 1] } else { self.layout(position, node, true) });
            let mut out: Vec<NodeId> = coins.iter().flat_map(|&c| self.others(c, node)).collect();
            out.push(if retain { node } else { self.others(position, node)[0] });
            let all: Vec<usize> = coins.iter().copied().chain(std::iter::once(position)).collect();
            return self.emit(
                node,
                level,
                phase,
                ProtocolKind::GhzFromBellsD,
                all,
                layouts,
                retain,
                out,
                Some(coins.len()),
                None,
            );
        }
        let mut acc = inputs[0];
        for (i, &next) in inputs.iter().enumerate().skip(1) {
            let keep = retain || i + 1 < inputs.len();
            let layouts = vec![self.layout(acc, node, true), self.layout(next, node, true)];
            let sizes = (self.parties(acc).len(), self.parties(next).len());
            let mut out = if keep { vec![node] } else { vec![] };
            out.extend(self.others(acc, node));
            out.extend(self.others(next, node));
            acc = self.emit(
                node,
                level,
                phase,
                ProtocolKind::GhzParallelD,
                vec![acc, next],
                layouts,
                keep,
                out,
                None,
                Some(sizes),
            );
        }
        acc
    }

    fn holding(&self, node: NodeId) -> Vec<usize> {
        self.live.iter().copied().filter(|&r| self.parties(r).contains(&node)).collect()
    }
}

fn eccentricity(adj: &BTreeMap<NodeId, BTreeSet<NodeId>>, src: NodeId) -> usize {
    bfs(adj, src).0.values().copied().max().unwrap_or(0)
}

fn bfs(
    adj: &BTreeMap<NodeId, BTreeSet<NodeId>>,
    src: NodeId,
) -> (BTreeMap<NodeId, usize>, BTreeMap<NodeId, NodeId>) {
    let mut depth = BTreeMap::from([(src, 0)]);
    let mut parent = BTreeMap::new();
    let mut queue = VecDeque::from([src]);
    while let Some(n) = queue.pop_front() {
        for &m in &adj[&n] {
            if !depth.contains_key(&m) {
                depth.insert(m, depth[&n] + 1);
                parent.insert(m, n);
                queue.push_back(m);
            }
        }
    }
    (depth, parent)
}

/// Plan the level-by-level merges that leave one GHZ state over the
/// terminals of `tree`.
///
/// The root is the tree node of least eccentricity (lowest id on ties).
/// Steps run for depth-1 nodes, then the root, then depths 2, 3, ..; within
/// a depth every child formation precedes every merge.
pub fn plan_distribution(tree: &SteinerTree, net: &ResourceNetwork) -> Result<SwapSchedule> {
    let d = net.local_dim;
    let terminals: Vec<NodeId> = tree.terminals.iter().copied().collect();
    let mut planner = Planner {
        terminals: &tree.terminals,
        resources: Vec::new(),
        live: BTreeSet::new(),
        steps: Vec::new(),
    };
    if tree.edges.is_empty() {
        let root = terminals.first().copied();
        return Ok(SwapSchedule {
            local_dim: d,
            terminals,
            root,
            depth: root.into_iter().map(|r| (r, 0)).collect(),
            resources: Vec::new(),
            steps: Vec::new(),
            initial: Vec::new(),
            final_resource: None,
        });
    }
    if !tree.is_valid() {
        return Err(Error::Network("Steiner tree is not a valid tree over its terminals".into()));
    }

    for &(a, b) in &tree.edges {
        let idx = net.bell_between(a, b).ok_or(Error::MissingResource(a, b))?;
        planner.add(net.resources[idx].parties.clone(), ResourceOrigin::Network(idx));
    }
    let initial: Vec<usize> = planner.live.iter().copied().collect();

    let adj = tree.neighbours();
    let root = adj
        .keys()
        .copied()
        .min_by_key(|&n| (eccentricity(&adj, n), n))
        .expect("tree has nodes");
    let (depth, parent) = bfs(&adj, root);
    let mut children: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for (&c, &p) in &parent {
        children.entry(p).or_default().push(c);
    }
    let max_depth = depth.values().copied().max().unwrap_or(0);
    let is_terminal = |n: NodeId| planner.terminals.contains(&n);

    let mut order = vec![1];
    order.push(0);
    order.extend(2..=max_depth);
    let mut child_resource: BTreeMap<NodeId, usize> = BTreeMap::new();
    for level in order {
        if level == 0 {
            let held = planner.holding(root);
            if held.len() >= 2 {
                let keep = is_terminal(root);
                planner.merge(root, 0, StepPhase::RootMerge, d, &held, keep);
            }
            continue;
        }
        let nodes: Vec<NodeId> =
            depth.iter().filter(|&(_, &l)| l == level).map(|(&n, _)| n).collect();
        for &v in &nodes {
            let kids = children.get(&v).cloned().unwrap_or_default();
            let bells: Vec<usize> = planner
                .holding(v)
                .into_iter()
                .filter(|&r| kids.iter().any(|c| planner.parties(r).contains(c)))
                .collect();
            match bells.len() {
                0 => {}
                1 => {
                    child_resource.insert(v, bells[0]);
                }
                _ => {
                    let out = planner.merge(v, level, StepPhase::ChildFormation, d, &bells, true);
                    child_resource.insert(v, out);
                }
            }
        }
        for &v in &nodes {
            let Some(&c) = child_resource.get(&v) else { continue };
            let upper: Vec<usize> = planner.holding(v).into_iter().filter(|&r| r != c).collect();
            if upper.len() != 1 {
                return Err(Error::Ledger(format!(
                    "node {v} holds {} upper resources, expected 1",
                    upper.len()
                )));
            }
            let keep = is_terminal(v);
            planner.merge(v, level, StepPhase::Merge, d, &[upper[0], c], keep);
        }
    }

    let live: Vec<usize> = planner.live.iter().copied().collect();
    if live.len() != 1 {
        return Err(Error::Ledger(format!("{} resources left after planning", live.len())));
    }
    let mut final_parties = planner.parties(live[0]).to_vec();
    final_parties.sort_unstable();
    if final_parties != terminals {
        return Err(Error::Ledger(format!(
            "final resource spans {final_parties:?}, terminals are {terminals:?}"
        )));
    }
    Ok(SwapSchedule {
        local_dim: d,
        terminals,
        root: Some(root),
        depth,
        resources: planner.resources,
        steps: planner.steps,
        initial,
        final_resource: Some(live[0]),
    })
}
