//! Operation streams passed between the routing, lowering and scheduling
//! stages.

use crate::circuit::{GateKind, GateNode, QuantumCircuit};
use crate::mapping::{MappingState, PhysQubit};
use crate::num::Real;
use crate::shuttle_router::Move;

/// A gate bound to physical atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp<R: Real> {
    pub kind: GateKind,
    pub atoms: Vec<PhysQubit>,
    pub params: Option<[R; 3]>,
}

impl<R: Real> GateOp<R> {
    pub fn of_gate(state: &MappingState<R>, gate: &GateNode<R>) -> Self {
        GateOp {
            kind: gate.kind,
            atoms: gate.qubits.iter().map(|&q| state.host_of(q)).collect(),
            params: gate.params,
        }
    }

    pub fn swap(a: PhysQubit, b: PhysQubit) -> Self {
        GateOp {
            kind: GateKind::Swap,
            atoms: vec![a, b],
            params: None,
        }
    }
}

/// Routing output: committed gates (including virtual SWAPs) interleaved
/// with abstract atom moves, in execution order.
#[derive(Debug, Clone)]
pub enum RoutedOp<R: Real> {
    Gate(GateOp<R>),
    Move(Move),
}

/// A virtual SWAP decomposed to native gates: 3 CZ plus 6 Hadamards.
pub fn expand_swap<R: Real>(a: PhysQubit, b: PhysQubit) -> Vec<GateOp<R>> {
    let h = |q: PhysQubit| GateOp {
        kind: GateKind::H,
        atoms: vec![q],
        params: None,
    };
    let cz = || GateOp {
        kind: GateKind::Cz,
        atoms: vec![a, b],
        params: None,
    };
    vec![h(b), cz(), h(b), h(a), cz(), h(a), h(b), cz(), h(b)]
}

/// Gate count of one kind in a routed stream, expanding virtual SWAPs
/// (one SWAP contributes 3 CZ and 6 H).
pub fn count_native<R: Real>(ops: &[RoutedOp<R>], kind: GateKind) -> usize {
    let mut count = 0;
    for op in ops {
        if let RoutedOp::Gate(g) = op {
            if g.kind == kind {
                count += 1;
            } else if g.kind == GateKind::Swap {
                count += match kind {
                    GateKind::Cz => 3,
                    GateKind::H => 6,
                    _ => 0,
                };
            }
        }
    }
    count
}

/// Native circuit viewed as a routed stream under a mapping state
/// (used for the unmapped reference schedule).
pub fn circuit_as_ops<R: Real>(circuit: &QuantumCircuit<R>) -> Vec<GateOp<R>> {
    circuit
        .gates
        .iter()
        .map(|g| GateOp {
            kind: g.kind,
            atoms: g.qubits.iter().map(|q| PhysQubit(q.0)).collect(),
            params: g.params,
        })
        .collect()
}
