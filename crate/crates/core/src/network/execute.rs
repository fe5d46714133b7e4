use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schedule::{ResourceOrigin, SwapSchedule};
use super::NodeId;
use crate::qudit::{canonical_bell, canonical_ghz, checked_size, fidelity, tensor, QuditState};
use crate::walk::{sample_protocol, ProtocolKind};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExecutionMode {
    /// Run every step on the state-vector simulator.
    Simulated,
    /// Track party bookkeeping only.
    Symbolic,
}

impl std::str::FromStr for ExecutionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simulated" | "sim" => Ok(Self::Simulated),
            "symbolic" => Ok(Self::Symbolic),
            _ => Err(Error::InvalidParameters(format!("unknown mode '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub index: usize,
    pub node: NodeId,
    pub protocol: ProtocolKind,
    pub input_sites: usize,
    pub measured_sites: usize,
    pub output_parties: Vec<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DistributionResult {
    pub mode: ExecutionMode,
    pub local_dim: usize,
    pub terminals: Vec<NodeId>,
    /// Parties of the final resource, sorted.
    pub final_parties: Vec<NodeId>,
    /// Final state over the terminals in ascending id order (simulated mode).
    #[serde(skip)]
    pub final_state: Option<QuditState>,
    /// Overlap with the canonical GHZ state over the terminals.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    pub step_count: usize,
    /// Elementary Bell pairs used, network and local.
    pub resources_consumed: usize,
    pub steps: Vec<StepRecord>,
}

fn laid_out(state: &QuditState, layout: &[usize]) -> Result<QuditState> {
    if layout.iter().enumerate().all(|(i, &p)| i == p) {
        Ok(state.clone())
    } else {
        state.permute_sites(layout)
    }
}

/// Run a schedule. `d` may differ from the planning dimension; Bell swaps
/// switch between the qubit and qudit variants accordingly.
pub fn execute_schedule(
    schedule: &SwapSchedule,
    mode: ExecutionMode,
    d: usize,
    seed: u64,
) -> Result<DistributionResult> {
    checked_size(d, 1)?;
    let consumed = schedule
        .resources
        .iter()
        .filter(|r| !matches!(r.origin, ResourceOrigin::Step(_)))
        .count();
    let mut records = Vec::with_capacity(schedule.steps.len());
    let mut ledger: BTreeMap<usize, Vec<NodeId>> =
        schedule.initial.iter().map(|&i| (i, schedule.resource(i).parties.clone())).collect();
    let mut states: BTreeMap<usize, QuditState> = BTreeMap::new();
    if mode == ExecutionMode::Simulated {
        for &i in &schedule.initial {
            states.insert(i, canonical_bell(d, 0, 0)?);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for step in &schedule.steps {
        let mut input_sites = 0;
        for &i in &step.inputs {
            let res = schedule.resource(i);
            if res.origin == ResourceOrigin::Local {
                ledger.insert(i, res.parties.clone());
                if mode == ExecutionMode::Simulated {
                    states.insert(i, canonical_bell(d, 0, 0)?);
                }
            }
            let parties = ledger
                .remove(&i)
                .ok_or_else(|| Error::Ledger(format!("step {}: resource {i} is not live", step.index)))?;
            if !parties.contains(&step.node) {
                return Err(Error::Ledger(format!(
                    "step {}: resource {i} has no site at node {}",
                    step.index, step.node
                )));
            }
            input_sites += parties.len();
        }
        if input_sites != step.measured_sites + step.output_parties.len() {
            return Err(Error::Ledger(format!(
                "step {}: {input_sites} input sites != {} measured + {} output",
                step.index,
                step.measured_sites,
                step.output_parties.len()
            )));
        }
        ledger.insert(step.output, step.output_parties.clone());

        let mut record = StepRecord {
            index: step.index,
            node: step.node,
            protocol: step.protocol,
            input_sites,
            measured_sites: step.measured_sites,
            output_parties: step.output_parties.clone(),
            outcome: None,
            fidelity: None,
        };
        if mode == ExecutionMode::Simulated {
            if checked_size(d, input_sites).is_err() {
                return Err(Error::ScheduleTooLarge { step: step.index, sites: input_sites, dim: d });
            }
            let mut input: Option<QuditState> = None;
            for (&i, layout) in step.inputs.iter().zip(&step.layouts) {
                let part = laid_out(&states.remove(&i).expect("live state"), layout)?;
                input = Some(match input {
                    None => part,
                    Some(s) => tensor(&s, &part)?,
                });
            }
            let spec = step.spec(d);
            let run = sample_protocol(&spec, &input.expect("steps have inputs"), &mut rng)?;
            record.outcome = Some(run.outcome);
            record.fidelity = Some(run.fidelity);
            states.insert(step.output, run.state);
        }
        records.push(record);
    }

    if ledger.len() > 1 {
        return Err(Error::Ledger(format!("{} resources left after execution", ledger.len())));
    }
    let (final_id, parties) = match ledger.into_iter().next() {
        Some((id, p)) => (Some(id), p),
        None => (None, schedule.terminals.clone()),
    };
    let mut final_parties = parties.clone();
    final_parties.sort_unstable();
    if final_parties != schedule.terminals {
        return Err(Error::Ledger(format!(
            "final resource spans {final_parties:?}, terminals are {:?}",
            schedule.terminals
        )));
    }

    let (final_state, fid) = match (mode, final_id) {
        (ExecutionMode::Symbolic, _) => (None, None),
        (ExecutionMode::Simulated, None) => (None, Some(1.0)),
        (ExecutionMode::Simulated, Some(id)) => {
            let state = states.remove(&id).expect("final state");
            let order: Vec<usize> = final_parties
                .iter()
                .map(|t| parties.iter().position(|p| p == t).expect("terminal present"))
                .collect();
            let state = state.permute_sites(&order)?;
            let f = fidelity(&state, &canonical_ghz(d, state.site_count())?)?;
            (Some(state), Some(f))
        }
    };

    Ok(DistributionResult {
        mode,
        local_dim: d,
        terminals: schedule.terminals.clone(),
        final_parties,
        final_state,
        fidelity: fid,
        step_count: schedule.steps.len(),
        resources_consumed: consumed,
        steps: records,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{plan_distribution, steiner_tree, Node, Resource, ResourceNetwork};

    fn net(d: usize, n: u32, edges: &[(u32, u32)]) -> ResourceNetwork {
        let nodes = (1..=n).map(|id| Node { id, label: String::new() }).collect();
        let res = edges.iter().map(|&(a, b)| Resource::bell(a, b)).collect();
        ResourceNetwork::new(d, nodes, res).unwrap()
    }

    #[test]
    fn repeater_chain_is_one_bell_swap() {
        let net = net(2, 3, &[(1, 2), (2, 3)]);
        let tree = steiner_tree(&net, &[1, 3], false).unwrap();
        let sched = plan_distribution(&tree, &net).unwrap();
        assert_eq!(sched.steps.len(), 1);
        assert_eq!(sched.steps[0].node, 2);
        assert_eq!(sched.steps[0].protocol, ProtocolKind::BellSwap2D);
        let r = execute_schedule(&sched, ExecutionMode::Simulated, 2, 1).unwrap();
        assert!(r.fidelity.unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn star_root_merge_keeps_root() {
        let net = net(3, 3, &[(1, 2), (1, 3)]);
        let tree = steiner_tree(&net, &[1, 2, 3], false).unwrap();
        let sched = plan_distribution(&tree, &net).unwrap();
        assert_eq!(sched.root, Some(1));
        assert_eq!(sched.steps.len(), 1);
        assert_eq!(sched.steps[0].protocol, ProtocolKind::GhzFromBellsD);
        let r = execute_schedule(&sched, ExecutionMode::Simulated, 3, 9).unwrap();
        assert_eq!(r.final_state.as_ref().unwrap().site_count(), 3);
        assert!(r.fidelity.unwrap() > 1.0 - 1e-9);
    }

    #[test]
    fn single_terminal_is_trivial() {
        let net = net(2, 2, &[(1, 2)]);
        let tree = steiner_tree(&net, &[2], false).unwrap();
        let sched = plan_distribution(&tree, &net).unwrap();
        assert!(sched.steps.is_empty());
        let r = execute_schedule(&sched, ExecutionMode::Simulated, 2, 0).unwrap();
        assert_eq!(r.fidelity, Some(1.0));
        assert_eq!(r.final_parties, vec![2]);
    }

    #[test]
    fn ghz_only_edge_is_missing_resource() {
        let nodes = (1..=3).map(|id| Node { id, label: String::new() }).collect();
        let net = ResourceNetwork::new(2, nodes, vec![Resource::ghz(vec![1, 2, 3])]).unwrap();
        let tree = steiner_tree(&net, &[1, 2], false).unwrap();
        assert!(matches!(plan_distribution(&tree, &net), Err(Error::MissingResource(1, 2))));
    }
}
