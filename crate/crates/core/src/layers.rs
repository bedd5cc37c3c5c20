//! Front and lookahead gate layers over the dependency DAG.
//!
//! The front layer holds the gates whose predecessors have all executed;
//! the lookahead layer holds the gates at most `depth` successor steps
//! behind it, used only for cost weighting.

use std::collections::BTreeSet;

use crate::circuit::{DependencyDag, GateId, GateNode, QuantumCircuit};
use crate::error::{MapError, Result};
use crate::mapping::MappingState;
use crate::num::Real;

pub const DEFAULT_LOOKAHEAD_DEPTH: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayerSet {
    pub front: Vec<GateId>,
    pub lookahead: Vec<GateId>,
    pub depth: usize,
}

impl LayerSet {
    pub fn is_done(&self) -> bool {
        self.front.is_empty()
    }
}

/// Computes front and lookahead layers given the set of executed gates
/// (which must be downward-closed in the DAG).
pub fn compute_layers(dag: &DependencyDag, executed: &BTreeSet<GateId>, depth: usize) -> LayerSet {
    let mut front = Vec::new();
    let mut lookahead = Vec::new();
    // Longest unexecuted predecessor chain counted from the front; gates are
    // id-ordered consistently with the DAG, so one forward pass suffices.
    let mut level = vec![0usize; dag.len()];
    for g in 0..dag.len() {
        if executed.contains(&g) {
            continue;
        }
        let mut lvl = 0usize;
        for &p in &dag.preds[g] {
            if !executed.contains(&p) {
                lvl = lvl.max(level[p].saturating_add(1));
            }
        }
        level[g] = lvl;
        if lvl == 0 {
            front.push(g);
        } else if lvl <= depth {
            lookahead.push(g);
        }
    }
    LayerSet {
        front,
        lookahead,
        depth,
    }
}

/// Marks an executable front gate as executed and recomputes the layers.
pub fn commit_executed<R: Real>(
    state: &MappingState<R>,
    circuit: &QuantumCircuit<R>,
    dag: &DependencyDag,
    executed: &mut BTreeSet<GateId>,
    layers: &LayerSet,
    gate: GateId,
) -> Result<LayerSet> {
    if !layers.front.contains(&gate) {
        return Err(MapError::State(format!("gate {gate} is not in the front layer")));
    }
    let node: &GateNode<R> = &circuit.gates[gate];
    if !state.executable(node) {
        return Err(MapError::State(format!("gate {gate} is not executable")));
    }
    executed.insert(gate);
    Ok(compute_layers(dag, executed, layers.depth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{build_dag, parse_circuit};
    use crate::hardware::parse_hardware;

    fn chain_circuit() -> (QuantumCircuit<f64>, DependencyDag) {
        // A -> B -> C through non-commuting gates on q1.
        let c = parse_circuit("qreg q[3]; h q[1]; cz q[0],q[1]; h q[1];").unwrap();
        let dag = build_dag(&c);
        (c, dag)
    }

    #[test]
    fn chain_layers() {
        let (_, dag) = chain_circuit();
        let layers = compute_layers(&dag, &BTreeSet::new(), 1);
        assert_eq!(layers.front, vec![0]);
        assert_eq!(layers.lookahead, vec![1]);

        let deep = compute_layers(&dag, &BTreeSet::new(), 2);
        assert_eq!(deep.lookahead, vec![1, 2]);
    }

    #[test]
    fn all_executed_leaves_empty_front() {
        let (c, dag) = chain_circuit();
        let executed: BTreeSet<GateId> = (0..c.gates.len()).collect();
        let layers = compute_layers(&dag, &executed, 3);
        assert!(layers.is_done());
        assert!(layers.lookahead.is_empty());
    }

    #[test]
    fn commuting_gates_share_the_front() {
        let c = parse_circuit::<f64>("qreg q[3]; cz q[0],q[1]; cz q[1],q[2];").unwrap();
        let dag = build_dag(&c);
        let layers = compute_layers(&dag, &BTreeSet::new(), 1);
        assert_eq!(layers.front, vec![0, 1]);
    }

    #[test]
    fn unbounded_depth_covers_all_unexecuted_gates() {
        let c = parse_circuit::<f64>(
            "qreg q[4]; h q[0]; cz q[0],q[1]; h q[1]; cz q[1],q[2]; h q[2]; cz q[2],q[3];",
        )
        .unwrap();
        let dag = build_dag(&c);
        let layers = compute_layers(&dag, &BTreeSet::new(), usize::MAX);
        let covered: BTreeSet<GateId> = layers
            .front
            .iter()
            .chain(layers.lookahead.iter())
            .copied()
            .collect();
        assert_eq!(covered.len(), c.gates.len());
        // Front and lookahead are disjoint by construction.
        assert_eq!(layers.front.len() + layers.lookahead.len(), covered.len());
    }

    #[test]
    fn commit_updates_front() {
        let spec = parse_hardware(&crate::hardware::tests::example_config()).unwrap();
        let c = parse_circuit::<f64>("qreg q[3]; h q[0]; h q[1]; cz q[0],q[1];").unwrap();
        let dag = build_dag(&c);
        let state = MappingState::initial(&spec, 3, 3).unwrap();
        let mut executed = BTreeSet::new();

        let layers = compute_layers(&dag, &executed, 2);
        assert_eq!(layers.front, vec![0, 1]);

        // Committing one of two independent front gates keeps the other.
        let layers = commit_executed(&state, &c, &dag, &mut executed, &layers, 0).unwrap();
        assert_eq!(layers.front, vec![1]);

        // Child joins the front once its predecessors are done.
        let layers = commit_executed(&state, &c, &dag, &mut executed, &layers, 1).unwrap();
        assert_eq!(layers.front, vec![2]);

        // Commit of a non-front gate is rejected.
        assert!(commit_executed(&state, &c, &dag, &mut executed, &layers, 0).is_err());
    }

    #[test]
    fn commits_follow_topological_order() {
        let spec = parse_hardware(&crate::hardware::tests::example_config()).unwrap();
        let c = parse_circuit::<f64>(
            "qreg q[4]; cz q[0],q[1]; h q[1]; cz q[1],q[2]; cz q[2],q[3];",
        )
        .unwrap();
        let dag = build_dag(&c);
        let state = MappingState::initial(&spec, 4, 4).unwrap();
        let mut executed = BTreeSet::new();
        let mut layers = compute_layers(&dag, &executed, 2);
        let mut order = Vec::new();
        while !layers.is_done() {
            let g = layers.front[0];
            order.push(g);
            layers = commit_executed(&state, &c, &dag, &mut executed, &layers, g).unwrap();
        }
        assert_eq!(order.len(), c.gates.len());
        for (pos, &g) in order.iter().enumerate() {
            for &p in &dag.preds[g] {
                assert!(order[..pos].contains(&p), "gate {g} ran before predecessor {p}");
            }
        }
    }
}
