//! Gate-based routing: SWAP insertion driven by a distance-difference cost
//! over the front and lookahead layers, with breadth-first positioning for
//! gates on three or more qubits.
//!
//! Two-qubit gates are scored by the change in SWAP distance between their
//! two atoms. Larger gates cannot simply be driven together (the required
//! geometry may only exist elsewhere), so a target clique of atoms is
//! searched first and the cost then drives each gate qubit towards its
//! assigned slot.

use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{GateId, QuantumCircuit};
use crate::error::Result;
use crate::mapping::{MappingState, PhysQubit};
use crate::num::{real, Real};

/// Maximum number of candidate cliques scored per position search.
const POSITION_CANDIDATE_LIMIT: usize = 20;

/// A clique of atoms with the right geometry for a multi-qubit gate,
/// `slots[i]` being the target of the i-th gate qubit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PositionCandidate {
    pub slots: Vec<PhysQubit>,
    pub total_swaps: u32,
}

/// Per-atom step counter of the most recent SWAP participation or
/// restriction, used by the cost decay term to spread SWAPs over
/// different atoms.
#[derive(Debug, Clone, Default)]
pub struct LastUsedTracker {
    last: BTreeMap<PhysQubit, u64>,
    step: u64,
}

impl LastUsedTracker {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn advance(&mut self) {
        self.step += 1;
    }

    pub fn note_swap(&mut self, a: PhysQubit, b: PhysQubit) {
        self.last.insert(a, self.step);
        self.last.insert(b, self.step);
    }

    pub fn note_restricted(&mut self, atoms: impl IntoIterator<Item = PhysQubit>) {
        for a in atoms {
            self.last.insert(a, self.step);
        }
    }

    /// Steps since either endpoint of the candidate was last used.
    pub fn staleness(&self, a: PhysQubit, b: PhysQubit) -> u64 {
        let of = |q| self.step - self.last.get(&q).copied().unwrap_or(0);
        of(a).min(of(b))
    }
}

/// All connectivity edges incident to an atom hosting a qubit of any
/// listed gate, normalized to (low, high) pairs.
pub fn swap_candidates<R: Real>(
    state: &MappingState<R>,
    circuit: &QuantumCircuit<R>,
    gates: &[GateId],
) -> Vec<(PhysQubit, PhysQubit)> {
    let mut out = BTreeSet::new();
    for &g in gates {
        for &q in &circuit.gates[g].qubits {
            let atom = state.host_of(q);
            for &nbr in state.neighbors(atom) {
                out.insert((atom.min(nbr), atom.max(nbr)));
            }
        }
    }
    out.into_iter().collect()
}

/// Finds a geometric position for a gate on `m >= 3` qubits: a pairwise
/// r_int clique of placed atoms reachable from the gate atoms with few
/// SWAPs. Candidate cliques are grown around atoms discovered by a
/// breadth-first search that starts from all gate atoms simultaneously;
/// the first [`POSITION_CANDIDATE_LIMIT`] cliques are scored and the best
/// kept. Returns `None` when no clique with the required geometry exists.
pub fn find_position<R: Real>(
    state: &MappingState<R>,
    gate_atoms: &[PhysQubit],
) -> Option<PositionCandidate> {
    let m = gate_atoms.len();
    debug_assert!(m >= 3);

    // Multi-source BFS order: atoms by total hop distance from the gate
    // atoms. Unreachable centers cannot host a useful clique.
    let mut order: Vec<(u64, PhysQubit)> = Vec::new();
    for center in state.atoms() {
        let mut total = 0u64;
        let mut reachable = true;
        for &src in gate_atoms {
            match state.hop_distance(src, center) {
                Some(h) => total += h as u64,
                None => {
                    reachable = false;
                    break;
                }
            }
        }
        if reachable {
            order.push((total, center));
        }
    }
    order.sort_unstable();

    let source_cost = |atom: PhysQubit| -> u64 {
        gate_atoms
            .iter()
            .map(|&src| state.hop_distance(src, atom).unwrap_or(0) as u64)
            .sum()
    };

    let mut seen: BTreeSet<Vec<PhysQubit>> = BTreeSet::new();
    let mut best: Option<PositionCandidate> = None;
    for &(_, center) in &order {
        if seen.len() >= POSITION_CANDIDATE_LIMIT {
            break;
        }
        let Ok(vicinity) = state.vicinity(center, state.spec().r_int) else {
            continue;
        };
        if vicinity.len() + 1 < m {
            continue;
        }
        // Grow a clique around the center, preferring atoms close to the
        // gate qubits.
        let mut pool: Vec<(u64, PhysQubit)> =
            vicinity.iter().map(|&a| (source_cost(a), a)).collect();
        pool.sort_unstable();
        let mut clique = vec![center];
        for &(_, cand) in &pool {
            if clique.len() == m {
                break;
            }
            if clique
                .iter()
                .all(|&c| state.clique_within(&[c, cand], state.spec().r_int))
            {
                clique.push(cand);
            }
        }
        if clique.len() < m {
            continue;
        }
        let mut key = clique.clone();
        key.sort_unstable();
        if !seen.insert(key) {
            continue;
        }
        let candidate = assign_slots(state, gate_atoms, &clique);
        if best
            .as_ref()
            .map(|b| candidate.total_swaps < b.total_swaps)
            .unwrap_or(true)
        {
            best = Some(candidate);
        }
    }
    best
}

/// Greedy nearest pairing of gate atoms onto clique slots; the position
/// cost of one pairing is the hop distance from the atom to its slot.
fn assign_slots<R: Real>(
    state: &MappingState<R>,
    gate_atoms: &[PhysQubit],
    clique: &[PhysQubit],
) -> PositionCandidate {
    let m = gate_atoms.len();
    let mut slots = vec![PhysQubit(u32::MAX); m];
    let mut used_src = vec![false; m];
    let mut used_slot = vec![false; m];
    let mut total = 0u32;
    for _ in 0..m {
        let mut pick: Option<(u32, usize, usize)> = None;
        for (i, &src) in gate_atoms.iter().enumerate() {
            if used_src[i] {
                continue;
            }
            for (j, &slot) in clique.iter().enumerate() {
                if used_slot[j] {
                    continue;
                }
                let h = state
                    .hop_distance(src, slot)
                    .unwrap_or(state.atom_count() as u32);
                if pick.map(|(ph, ..)| h < ph).unwrap_or(true) {
                    pick = Some((h, i, j));
                }
            }
        }
        let (h, i, j) = pick.expect("clique has m slots");
        slots[i] = clique[j];
        used_src[i] = true;
        used_slot[j] = true;
        total += h;
    }
    PositionCandidate {
        slots,
        total_swaps: total,
    }
}

/// One gate's contribution target for the cost function: either the pair
/// of atoms to bring together, or the assigned position slots.
#[derive(Debug, Clone)]
enum CostTarget {
    Pair(PhysQubit, PhysQubit),
    Position(Vec<PhysQubit>, Vec<PhysQubit>),
}

/// Pre-resolved cost inputs for one routing round.
#[derive(Debug, Clone, Default)]
pub struct CostModel {
    front: Vec<CostTarget>,
    lookahead: Vec<CostTarget>,
}

impl CostModel {
    /// Builds the cost targets for the gate-routed front and lookahead
    /// layers. Gates whose position search fails are skipped here; the
    /// caller is expected to reroute them through shuttling.
    pub fn build<R: Real>(
        state: &MappingState<R>,
        circuit: &QuantumCircuit<R>,
        front: &[GateId],
        lookahead: &[GateId],
        positions: &BTreeMap<GateId, PositionCandidate>,
    ) -> CostModel {
        let resolve = |gates: &[GateId]| -> Vec<CostTarget> {
            let mut out = Vec::new();
            for &g in gates {
                let atoms: Vec<PhysQubit> = circuit.gates[g]
                    .qubits
                    .iter()
                    .map(|&q| state.host_of(q))
                    .collect();
                match atoms.len() {
                    0 | 1 => {}
                    2 => out.push(CostTarget::Pair(atoms[0], atoms[1])),
                    _ => {
                        if let Some(pos) = positions.get(&g) {
                            out.push(CostTarget::Position(atoms, pos.slots.clone()));
                        }
                    }
                }
            }
            out
        };
        CostModel {
            front: resolve(front),
            lookahead: resolve(lookahead),
        }
    }

    /// Distance-difference sum over one layer for a SWAP candidate.
    fn layer_delta<R: Real>(
        targets: &[CostTarget],
        state: &MappingState<R>,
        swap: (PhysQubit, PhysQubit),
    ) -> i64 {
        let remap = |atom: PhysQubit| -> PhysQubit {
            if atom == swap.0 {
                swap.1
            } else if atom == swap.1 {
                swap.0
            } else {
                atom
            }
        };
        let far = state.atom_count() as i64 + 1;
        let swap_dist = |a: PhysQubit, b: PhysQubit| -> i64 {
            state.swap_distance(a, b).map(|d| d as i64).unwrap_or(far)
        };
        let hop_dist = |a: PhysQubit, b: PhysQubit| -> i64 {
            state.hop_distance(a, b).map(|d| d as i64).unwrap_or(far)
        };
        let mut delta = 0i64;
        for target in targets {
            match target {
                CostTarget::Pair(a, b) => {
                    delta += swap_dist(remap(*a), remap(*b)) - swap_dist(*a, *b);
                }
                CostTarget::Position(atoms, slots) => {
                    for (&atom, &slot) in atoms.iter().zip(slots) {
                        delta += hop_dist(remap(atom), slot) - hop_dist(atom, slot);
                    }
                }
            }
        }
        delta
    }

    /// Front-layer distance difference alone (used by the livelock guard).
    pub fn front_delta<R: Real>(&self, state: &MappingState<R>, swap: (PhysQubit, PhysQubit)) -> i64 {
        Self::layer_delta(&self.front, state, swap)
    }

    /// Full cost of a SWAP candidate:
    /// `exp(-lambda_t * t(S)) * (C_front + w_l * C_lookahead)`.
    pub fn cost<R: Real>(
        &self,
        state: &MappingState<R>,
        swap: (PhysQubit, PhysQubit),
        tracker: &LastUsedTracker,
        lambda_t: R,
        w_l: R,
    ) -> R {
        let c_front = R::from_i64(Self::layer_delta(&self.front, state, swap)).unwrap();
        let c_look = R::from_i64(Self::layer_delta(&self.lookahead, state, swap)).unwrap();
        let staleness = real::<R>(tracker.staleness(swap.0, swap.1) as f64);
        (-lambda_t * staleness).exp() * (c_front + w_l * c_look)
    }
}

/// Outcome of one gate-routing round.
#[derive(Debug, Clone)]
pub enum GateRouteOutcome {
    /// SWAPs applied (in order); at least one front gate became executable.
    Routed { swaps: Vec<(PhysQubit, PhysQubit)> },
    /// The livelock guard fired (or no geometry exists): hand `gate` to
    /// shuttling and keep routing the rest.
    AbortToShuttle {
        swaps: Vec<(PhysQubit, PhysQubit)>,
        gate: GateId,
    },
}

/// The front gate farthest from executable: tug-of-war livelocks resolve
/// by taking the most expensive gate out of the layer.
fn most_blocked_gate<R: Real>(
    state: &MappingState<R>,
    circuit: &QuantumCircuit<R>,
    front_gates: &[GateId],
    positions: &BTreeMap<GateId, PositionCandidate>,
) -> GateId {
    let far = state.atom_count() as u32 + 1;
    let remaining = |g: GateId| -> u32 {
        let atoms: Vec<PhysQubit> = circuit.gates[g]
            .qubits
            .iter()
            .map(|&q| state.host_of(q))
            .collect();
        match atoms.len() {
            2 => state.swap_distance(atoms[0], atoms[1]).unwrap_or(far),
            _ => match positions.get(&g) {
                Some(pos) => atoms
                    .iter()
                    .zip(&pos.slots)
                    .map(|(&a, &s)| state.hop_distance(a, s).unwrap_or(far))
                    .sum(),
                None => far,
            },
        }
    };
    front_gates
        .iter()
        .copied()
        .max_by_key(|&g| (remaining(g), g))
        .expect("front layer is non-empty")
}

/// Inserts SWAPs until at least one gate of `front_gates` is executable.
///
/// Each round scores every candidate (ties broken lexicographically on the
/// atom pair), applies the best one and updates the tracker. If no
/// candidate strictly reduces the front-layer distance sum for
/// `max(50, 2*l)` consecutive SWAPs, the round aborts the most blocked
/// gate so the caller can fall back to shuttling (or defer it).
pub fn route_gate_layer<R: Real>(
    state: &mut MappingState<R>,
    circuit: &QuantumCircuit<R>,
    front_gates: &[GateId],
    lookahead_gates: &[GateId],
    tracker: &mut LastUsedTracker,
    lambda_t: R,
    w_l: R,
) -> Result<GateRouteOutcome> {
    let mut positions: BTreeMap<GateId, PositionCandidate> = BTreeMap::new();
    for &g in front_gates.iter().chain(lookahead_gates) {
        let node = &circuit.gates[g];
        if node.qubits.len() >= 3 {
            let atoms: Vec<PhysQubit> = node.qubits.iter().map(|&q| state.host_of(q)).collect();
            if let Some(pos) = find_position(state, &atoms) {
                positions.insert(g, pos);
            } else if front_gates.contains(&g) {
                // No geometry anywhere: this gate can never be routed by
                // SWAPs in the current layout.
                return Ok(GateRouteOutcome::AbortToShuttle {
                    swaps: Vec::new(),
                    gate: g,
                });
            }
        }
    }

    let livelock_limit = 50usize.max(2 * state.spec().l as usize);
    // Terminal backstop: the stagnation counter resets whenever any
    // candidate improves the front sum, which zero-net cost cycles between
    // front and lookahead terms can exploit indefinitely.
    let swap_budget = livelock_limit * 10;
    let mut stagnant = 0usize;
    let mut swaps = Vec::new();

    loop {
        if front_gates
            .iter()
            .any(|&g| state.executable(&circuit.gates[g]))
        {
            return Ok(GateRouteOutcome::Routed { swaps });
        }
        let model = CostModel::build(state, circuit, front_gates, lookahead_gates, &positions);
        let candidates = swap_candidates(state, circuit, front_gates);
        if candidates.is_empty() {
            let gate = most_blocked_gate(state, circuit, front_gates, &positions);
            return Ok(GateRouteOutcome::AbortToShuttle { swaps, gate });
        }

        let mut best = candidates[0];
        let mut best_cost = model.cost(state, best, tracker, lambda_t, w_l);
        let mut best_front_delta = i64::MAX;
        for &cand in &candidates {
            let cost = model.cost(state, cand, tracker, lambda_t, w_l);
            if cost < best_cost {
                best = cand;
                best_cost = cost;
            }
            best_front_delta = best_front_delta.min(model.front_delta(state, cand));
        }

        if best_front_delta >= 0 {
            stagnant += 1;
        } else {
            stagnant = 0;
        }
        if stagnant > livelock_limit || swaps.len() >= swap_budget {
            // A lone gate may be starved by lookahead interference alone;
            // give it one front-driven retry before aborting.
            if front_gates.len() == 1 && w_l != R::zero() {
                let retry = route_gate_layer(
                    state,
                    circuit,
                    front_gates,
                    &[],
                    tracker,
                    lambda_t,
                    R::zero(),
                )?;
                return Ok(match retry {
                    GateRouteOutcome::Routed { swaps: more } => {
                        swaps.extend(more);
                        GateRouteOutcome::Routed { swaps }
                    }
                    GateRouteOutcome::AbortToShuttle { swaps: more, gate } => {
                        swaps.extend(more);
                        GateRouteOutcome::AbortToShuttle { swaps, gate }
                    }
                });
            }
            let gate = most_blocked_gate(state, circuit, front_gates, &positions);
            return Ok(GateRouteOutcome::AbortToShuttle { swaps, gate });
        }

        state.apply_swap(best.0, best.1)?;
        tracker.advance();
        tracker.note_swap(best.0, best.1);
        swaps.push(best);
    }
}
