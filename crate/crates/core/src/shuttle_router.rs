//! Shuttling-based routing: chains of atom moves that make one gate
//! executable, scored by geometric distance reduction plus a parallelism
//! term over the recent move window.
//!
//! The search space is deliberately small: a qubit is only ever moved
//! directly into the vicinity of an anchor gate qubit, with at most one
//! move-away operation to clear the target site first. A chain for an
//! m-qubit gate therefore never exceeds 2(m-1) moves.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::circuit::{GateId, QuantumCircuit};
use crate::error::{MapError, Result};
use crate::hardware::{Coordinate, HardwareSpec};
use crate::mapping::{MappingState, PhysQubit};
use crate::num::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveKind {
    /// Moves a gate qubit next to the anchor.
    Direct,
    /// Clears a blocked target site first.
    MoveAway,
}

/// One elementary shuttling operation of a single atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub atom: PhysQubit,
    pub from: Coordinate,
    pub to: Coordinate,
    pub kind: MoveKind,
}

impl Move {
    /// Rectangular shuttling distance in micrometres.
    pub fn rect_um<R: Real>(&self, spec: &HardwareSpec<R>) -> R {
        R::from_u64(self.from.rect_dist(self.to)).unwrap() * spec.d
    }

    fn displacement(&self) -> (i64, i64) {
        (
            self.to.x as i64 - self.from.x as i64,
            self.to.y as i64 - self.from.y as i64,
        )
    }
}

/// Ordered moves that make `gate` executable once applied.
#[derive(Debug, Clone)]
pub struct MoveChain {
    pub gate: GateId,
    pub anchor: PhysQubit,
    pub moves: Vec<Move>,
}

impl MoveChain {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }
}

/// Virtual geometry used while constructing and scoring chains.
struct View {
    coord: BTreeMap<PhysQubit, Coordinate>,
    occ: BTreeMap<Coordinate, PhysQubit>,
}

impl View {
    fn of<R: Real>(state: &MappingState<R>) -> View {
        let coord = state.atom_sites().clone();
        let occ = coord.iter().map(|(&a, &c)| (c, a)).collect();
        View { coord, occ }
    }

    fn apply(&mut self, m: &Move) {
        self.occ.remove(&m.from);
        self.occ.insert(m.to, m.atom);
        self.coord.insert(m.atom, m.to);
    }
}

/// Builds candidate move chains for a blocked gate, one per anchor choice.
/// `pinned` lists atoms that must not be chosen for move-away operations
/// (atoms hosting front-layer gate qubits).
pub fn build_chains<R: Real>(
    state: &MappingState<R>,
    circuit: &QuantumCircuit<R>,
    gate: GateId,
    pinned: &BTreeSet<PhysQubit>,
) -> Vec<MoveChain> {
    let gate_atoms: Vec<PhysQubit> = circuit.gates[gate]
        .qubits
        .iter()
        .map(|&q| state.host_of(q))
        .collect();
    let mut chains = Vec::new();
    let mut best_len = usize::MAX;
    for &anchor in &gate_atoms {
        if let Some(chain) = chain_for_anchor(state, gate, &gate_atoms, anchor, pinned) {
            // Keep only chains of minimal length.
            match chain.len().cmp(&best_len) {
                std::cmp::Ordering::Less => {
                    best_len = chain.len();
                    chains.retain(|c: &MoveChain| c.len() == best_len);
                    chains.push(chain);
                }
                std::cmp::Ordering::Equal => chains.push(chain),
                std::cmp::Ordering::Greater => {}
            }
        }
    }
    chains
}

fn chain_for_anchor<R: Real>(
    state: &MappingState<R>,
    gate: GateId,
    gate_atoms: &[PhysQubit],
    anchor: PhysQubit,
    pinned: &BTreeSet<PhysQubit>,
) -> Option<MoveChain> {
    let spec = state.spec();
    let r = spec.r_int;
    let mut view = View::of(state);
    let anchor_coord = view.coord[&anchor];
    let mut fixed = vec![anchor];
    let mut remaining: Vec<PhysQubit> = gate_atoms.iter().copied().filter(|&a| a != anchor).collect();
    let mut moves = Vec::new();

    let feasible = |view: &View, site: Coordinate, fixed: &[PhysQubit]| -> bool {
        spec.coords_within(anchor_coord, site, r)
            && fixed
                .iter()
                .all(|&f| spec.coords_within(view.coord[&f], site, r))
    };

    // Gate qubits already compatible with the growing clique stay in place.
    let absorb = |view: &View, fixed: &mut Vec<PhysQubit>, remaining: &mut Vec<PhysQubit>| loop {
        let idx = remaining.iter().position(|&q| {
            fixed
                .iter()
                .all(|&f| spec.coords_within(view.coord[&q], view.coord[&f], r))
        });
        match idx {
            Some(i) => fixed.push(remaining.remove(i)),
            None => break,
        }
    };
    absorb(&view, &mut fixed, &mut remaining);

    while !remaining.is_empty() {
        // Candidate target sites near the anchor, compatible with every
        // already-fixed gate qubit.
        let sites: Vec<Coordinate> = sites_near(spec, anchor_coord)
            .into_iter()
            .filter(|&s| feasible(&view, s, &fixed))
            .collect();

        // Prefer a qubit that can move directly to a free site.
        let mut direct: Option<(i64, Coordinate, usize)> = None;
        for (i, &q) in remaining.iter().enumerate() {
            let from = view.coord[&q];
            for &s in &sites {
                if view.occ.contains_key(&s) {
                    continue;
                }
                let key = from.dist2(s);
                if direct.map(|(k, c, _)| (key, s) < (k, c)).unwrap_or(true) {
                    direct = Some((key, s, i));
                }
            }
        }
        if let Some((_, site, i)) = direct {
            let q = remaining.remove(i);
            let m = Move {
                atom: q,
                from: view.coord[&q],
                to: site,
                kind: MoveKind::Direct,
            };
            view.apply(&m);
            moves.push(m);
            fixed.push(q);
            absorb(&view, &mut fixed, &mut remaining);
            continue;
        }

        // Otherwise free a blocked site with a move-away first.
        let mut blocked: Option<(i64, Coordinate, usize)> = None;
        for (i, &q) in remaining.iter().enumerate() {
            let from = view.coord[&q];
            for &s in &sites {
                let Some(&occupant) = view.occ.get(&s) else {
                    continue;
                };
                if gate_atoms.contains(&occupant) || pinned.contains(&occupant) {
                    continue;
                }
                let key = from.dist2(s);
                if blocked.map(|(k, c, _)| (key, s) < (k, c)).unwrap_or(true) {
                    blocked = Some((key, s, i));
                }
            }
        }
        let (_, site, i) = blocked?;
        let blocker = view.occ[&site];
        let away = move_away_target(spec, &view, site, anchor_coord)?;
        let m1 = Move {
            atom: blocker,
            from: site,
            to: away,
            kind: MoveKind::MoveAway,
        };
        view.apply(&m1);
        moves.push(m1);
        let q = remaining.remove(i);
        let m2 = Move {
            atom: q,
            from: view.coord[&q],
            to: site,
            kind: MoveKind::Direct,
        };
        view.apply(&m2);
        moves.push(m2);
        fixed.push(q);
        absorb(&view, &mut fixed, &mut remaining);
    }

    // The constructed placement must realize the pairwise clique.
    for (i, &a) in gate_atoms.iter().enumerate() {
        for &b in &gate_atoms[i + 1..] {
            if !spec.coords_within(view.coord[&a], view.coord[&b], r) {
                return None;
            }
        }
    }
    debug_assert!(moves.len() <= 2 * (gate_atoms.len() - 1));
    Some(MoveChain {
        gate,
        anchor,
        moves,
    })
}

/// In-bounds sites within r_int of `center`, row-major order.
fn sites_near<R: Real>(spec: &HardwareSpec<R>, center: Coordinate) -> Vec<Coordinate> {
    let reach = spec.r_int.to_f64().unwrap_or(0.0).ceil() as i64;
    let l = spec.l as i64;
    let mut out = Vec::new();
    for y in (center.y as i64 - reach).max(0)..=(center.y as i64 + reach).min(l - 1) {
        for x in (center.x as i64 - reach).max(0)..=(center.x as i64 + reach).min(l - 1) {
            let c = Coordinate::new(x as u32, y as u32);
            if spec.coords_within(center, c, spec.r_int) {
                out.push(c);
            }
        }
    }
    out
}

/// Nearest free site outside the anchor's restriction vicinity, so the
/// displaced atom cannot re-block the gate; ties are broken row-major.
fn move_away_target<R: Real>(
    spec: &HardwareSpec<R>,
    view: &View,
    from: Coordinate,
    anchor_coord: Coordinate,
) -> Option<Coordinate> {
    let mut best: Option<(i64, Coordinate)> = None;
    for i in 0..spec.sites() {
        let c = spec.site(i);
        if view.occ.contains_key(&c) || spec.coords_within(anchor_coord, c, spec.r_restr) {
            continue;
        }
        let key = from.dist2(c);
        if best.map(|(k, b)| (key, c) < (k, b)).unwrap_or(true) {
            best = Some((key, c));
        }
    }
    best.map(|(_, c)| c)
}

/// Extra schedule time attributed to `m` given the last few moves: zero if
/// it can share both AOD loading and the shuttle itself with a recent move
/// (same row or column, identical displacement), activation overhead only
/// if just the loading can be shared, and the full move time otherwise.
pub fn delta_t_parallel<R: Real>(m: &Move, recent: &[Move], spec: &HardwareSpec<R>) -> R {
    let mut loading_shared = false;
    for other in recent {
        let share_row = other.from.y == m.from.y;
        let share_col = other.from.x == m.from.x;
        if !(share_row || share_col) {
            continue;
        }
        if other.displacement() == m.displacement() {
            return R::zero();
        }
        loading_shared = true;
    }
    if loading_shared {
        spec.t_act + spec.t_deact
    } else {
        spec.move_time(m.rect_um(spec))
    }
}

/// Atom sets of the gates a move chain is scored against.
#[derive(Debug, Clone, Default)]
pub struct ShuttleCostModel {
    front: Vec<Vec<PhysQubit>>,
    lookahead: Vec<Vec<PhysQubit>>,
}

impl ShuttleCostModel {
    pub fn build<R: Real>(
        state: &MappingState<R>,
        circuit: &QuantumCircuit<R>,
        front: &[GateId],
        lookahead: &[GateId],
    ) -> Self {
        let atoms_of = |gates: &[GateId]| {
            gates
                .iter()
                .map(|&g| {
                    circuit.gates[g]
                        .qubits
                        .iter()
                        .map(|&q| state.host_of(q))
                        .collect()
                })
                .collect()
        };
        ShuttleCostModel {
            front: atoms_of(front),
            lookahead: atoms_of(lookahead),
        }
    }

    /// Total chain cost: for every move, the front/lookahead change in
    /// summed pairwise gate distances (um) plus the weighted parallel-time
    /// term against the sliding window of recent moves.
    pub fn chain_cost<R: Real>(
        &self,
        state: &MappingState<R>,
        chain: &MoveChain,
        w_l: R,
        w_t: R,
        recent: &VecDeque<Move>,
        window: usize,
    ) -> R {
        let spec = state.spec();
        let mut view = View::of(state);
        let mut win: VecDeque<Move> = recent.iter().copied().collect();
        let mut total = R::zero();
        for m in &chain.moves {
            let front_delta = layer_distance_delta(&self.front, &view, m, spec);
            let look_delta = layer_distance_delta(&self.lookahead, &view, m, spec);
            let recent_vec: Vec<Move> = win.iter().copied().collect();
            let parallel = delta_t_parallel(m, &recent_vec, spec);
            total += front_delta + w_l * look_delta + w_t * parallel;
            view.apply(m);
            win.push_back(*m);
            while win.len() > window {
                win.pop_front();
            }
        }
        total
    }
}

/// Change, in micrometres, of the summed pairwise Euclidean distances of
/// each gate's atoms caused by one move.
fn layer_distance_delta<R: Real>(
    gates: &[Vec<PhysQubit>],
    view: &View,
    m: &Move,
    spec: &HardwareSpec<R>,
) -> R {
    let mut delta = R::zero();
    for atoms in gates {
        if !atoms.contains(&m.atom) {
            continue;
        }
        for (i, &a) in atoms.iter().enumerate() {
            for &b in &atoms[i + 1..] {
                if a != m.atom && b != m.atom {
                    continue;
                }
                let other = if a == m.atom { b } else { a };
                let oc = view.coord[&other];
                let before: R = view.coord[&m.atom].dist(oc);
                let after: R = m.to.dist(oc);
                delta += (after - before) * spec.d;
            }
        }
    }
    delta
}

/// Result of one shuttle-routing round: the chain that was applied.
#[derive(Debug, Clone)]
pub struct ShuttleOutcome {
    pub chain: MoveChain,
}

/// Picks the cheapest move chain across the shuttle-routed front gates and
/// applies it (ties: lower cost, then shorter chain, then gate id, then
/// anchor id). The routed gate is executable afterwards.
///
/// Atoms in `pinned` (front-layer gate qubits) are not eligible for
/// move-away operations. When that rule leaves no chain at all -- every
/// atom can host a front gate qubit on small registers -- the search is
/// retried without the pinning so commuting front gates can still be
/// serialized one at a time.
pub fn route_shuttle_layer<R: Real>(
    state: &mut MappingState<R>,
    circuit: &QuantumCircuit<R>,
    front_shuttle: &[GateId],
    lookahead_shuttle: &[GateId],
    pinned: &BTreeSet<PhysQubit>,
    w_l: R,
    w_t: R,
    recent: &mut VecDeque<Move>,
    window: usize,
) -> Result<ShuttleOutcome> {
    let model = ShuttleCostModel::build(state, circuit, front_shuttle, lookahead_shuttle);
    let search = |pinned: &BTreeSet<PhysQubit>| -> Option<(R, usize, GateId, PhysQubit, MoveChain)> {
        let mut best: Option<(R, usize, GateId, PhysQubit, MoveChain)> = None;
        for &g in front_shuttle {
            if state.executable(&circuit.gates[g]) {
                continue;
            }
            for chain in build_chains(state, circuit, g, pinned) {
                let cost = model.chain_cost(state, &chain, w_l, w_t, recent, window);
                let key = (cost, chain.len(), g, chain.anchor);
                let better = match &best {
                    None => true,
                    Some((bc, bl, bg, ba, _)) => {
                        (key.0, key.1, key.2, key.3) < (*bc, *bl, *bg, *ba)
                    }
                };
                if better {
                    best = Some((cost, chain.len(), g, chain.anchor, chain));
                }
            }
        }
        best
    };
    let best = search(pinned).or_else(|| {
        if pinned.is_empty() {
            None
        } else {
            search(&BTreeSet::new())
        }
    });
    let Some((.., chain)) = best else {
        return Err(MapError::Routing(
            "no move chain exists for any shuttle-routed front gate".into(),
        ));
    };
    if chain.is_empty() {
        return Err(MapError::Routing("empty move chain selected".into()));
    }
    for m in &chain.moves {
        state.apply_move(m.atom, m.to)?;
        recent.push_back(*m);
        while recent.len() > window {
            recent.pop_front();
        }
    }
    debug_assert!(state.executable(&circuit.gates[chain.gate]));
    Ok(ShuttleOutcome { chain })
}
