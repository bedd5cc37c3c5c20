//! Per-gate capability decision: route by SWAP insertion or by shuttling.
//!
//! For every front and lookahead gate a cheap estimate of the required
//! SWAPs and moves is turned into an approximate success probability per
//! capability; the weighted comparison `alpha_g * P_g >= alpha_s * P_s`
//! assigns the gate to the gate-based or shuttling-based layers. Only the
//! ratio of the two weights matters.

use std::collections::BTreeSet;

use crate::circuit::{GateId, QuantumCircuit};
use crate::hardware::HardwareSpec;
use crate::layers::LayerSet;
use crate::mapping::{MappingState, PhysQubit};
use crate::num::{real, Real};
use crate::swap_router::find_position;

/// SWAP count and time estimate for gate-based routing; `swaps` is `None`
/// when no SWAP route exists (disconnected pair, or no clique geometry for
/// a multi-qubit gate).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateEstimate<R: Real> {
    pub swaps: Option<u32>,
    pub time: R,
}

/// Move count and time estimate for shuttling-based routing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShuttleEstimate<R: Real> {
    pub moves: u32,
    pub time: R,
}

/// Time cost of one SWAP: 3 CZ plus 4 single-qubit rotations.
pub fn swap_time<R: Real>(spec: &HardwareSpec<R>) -> R {
    real::<R>(3.0) * spec.t_cz + real::<R>(4.0) * spec.t_u3
}

/// Fidelity factor of one SWAP under the same decomposition estimate.
pub fn swap_fidelity<R: Real>(spec: &HardwareSpec<R>) -> R {
    spec.f_cz.powi(3) * spec.f_h.powi(4)
}

pub fn estimate_gate_route<R: Real>(
    state: &MappingState<R>,
    circuit: &QuantumCircuit<R>,
    gate: GateId,
) -> GateEstimate<R> {
    let node = &circuit.gates[gate];
    let atoms: Vec<PhysQubit> = node.qubits.iter().map(|&q| state.host_of(q)).collect();
    let swaps = match atoms.len() {
        0 | 1 => Some(0),
        2 => state.swap_distance(atoms[0], atoms[1]),
        _ => {
            if state.executable(node) {
                Some(0)
            } else {
                find_position(state, &atoms).map(|p| p.total_swaps)
            }
        }
    };
    let time = match swaps {
        Some(n) => R::from_u32(n).unwrap() * swap_time(state.spec()),
        None => R::infinity(),
    };
    GateEstimate { swaps, time }
}

pub fn estimate_shuttle_route<R: Real>(
    state: &MappingState<R>,
    circuit: &QuantumCircuit<R>,
    gate: GateId,
) -> ShuttleEstimate<R> {
    let spec = state.spec();
    let node = &circuit.gates[gate];
    let atoms: Vec<PhysQubit> = node.qubits.iter().map(|&q| state.host_of(q)).collect();
    if atoms.len() < 2 {
        return ShuttleEstimate {
            moves: 0,
            time: R::zero(),
        };
    }

    // Anchor: the gate atom whose summed distance to the others is minimal.
    let anchor = *atoms
        .iter()
        .min_by(|&&a, &&b| {
            let sum = |x: PhysQubit| -> i64 {
                atoms.iter().map(|&o| state.coord_of(x).dist2(state.coord_of(o))).sum()
            };
            (sum(a), a).cmp(&(sum(b), b))
        })
        .unwrap();
    let anchor_coord = state.coord_of(anchor);

    let mut free: Vec<_> = state.free_sites_within(anchor_coord, spec.r_int);
    let mut occupied: Vec<_> = state
        .vicinity(anchor, spec.r_int)
        .unwrap_or_default()
        .into_iter()
        .filter(|a| !atoms.contains(a))
        .map(|a| state.coord_of(a))
        .collect();
    occupied.sort_unstable();

    let mut moves = 0u32;
    let mut time = R::zero();
    let mut others: Vec<PhysQubit> = atoms.iter().copied().filter(|&a| a != anchor).collect();
    others.sort_by_key(|&a| (state.coord_of(a).dist2(anchor_coord), a));

    for q in others {
        let from = state.coord_of(q);
        if let Some(idx) = nearest_site(&free, from) {
            let site = free.remove(idx);
            moves += 1;
            time += spec.move_time(rect_um(spec, from, site));
        } else if let Some(idx) = nearest_site(&occupied, from) {
            let site = occupied.remove(idx);
            // Price the move-away to the nearest free site outside the
            // restriction vicinity, then the direct move in.
            let away = nearest_free_outside(state, site, anchor_coord);
            moves += 2;
            let away_dist = match away {
                Some(target) => rect_um(spec, site, target),
                None => R::from_u32(spec.l).unwrap() * spec.d,
            };
            time += spec.move_time(away_dist);
            time += spec.move_time(rect_um(spec, from, site));
        } else {
            // Nothing usable near this anchor; price a cross-lattice pair
            // of moves so the estimate stays finite.
            moves += 2;
            let span = R::from_u32(spec.l).unwrap() * spec.d;
            time += spec.move_time(span) + spec.move_time(span);
        }
    }
    ShuttleEstimate { moves, time }
}

fn rect_um<R: Real>(spec: &HardwareSpec<R>, a: crate::hardware::Coordinate, b: crate::hardware::Coordinate) -> R {
    R::from_u64(a.rect_dist(b)).unwrap() * spec.d
}

fn nearest_site(sites: &[crate::hardware::Coordinate], from: crate::hardware::Coordinate) -> Option<usize> {
    sites
        .iter()
        .enumerate()
        .min_by_key(|(_, &s)| (from.dist2(s), s))
        .map(|(i, _)| i)
}

fn nearest_free_outside<R: Real>(
    state: &MappingState<R>,
    from: crate::hardware::Coordinate,
    anchor: crate::hardware::Coordinate,
) -> Option<crate::hardware::Coordinate> {
    let spec = state.spec();
    (0..spec.sites())
        .map(|i| spec.site(i))
        .filter(|&c| state.is_free(c) && !spec.coords_within(anchor, c, spec.r_restr))
        .min_by_key(|&c| (from.dist2(c), c))
}

/// Success-probability estimate of routing one gate by SWAPs.
pub fn gate_success<R: Real>(spec: &HardwareSpec<R>, est: GateEstimate<R>) -> Option<R> {
    let swaps = est.swaps?;
    let fidelity = swap_fidelity(spec).powi(swaps as i32);
    Some((-est.time / spec.t_eff()).exp() * fidelity)
}

/// Success-probability estimate of routing one gate by shuttling.
pub fn shuttle_success<R: Real>(spec: &HardwareSpec<R>, est: ShuttleEstimate<R>) -> R {
    (-est.time / spec.t_eff()).exp() * spec.f_shuttle.powi(est.moves as i32)
}

/// Partition of the front and lookahead layers into gate-routed and
/// shuttle-routed subsets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CapabilityAssignment {
    pub front_gate: Vec<GateId>,
    pub front_shuttle: Vec<GateId>,
    pub look_gate: Vec<GateId>,
    pub look_shuttle: Vec<GateId>,
}

/// Assigns every front/lookahead gate to a capability. `forced_shuttle`
/// overrides the estimate (used after a gate-routing abort); already
/// executable gates go to the gate side with zero cost.
pub fn assign<R: Real>(
    state: &MappingState<R>,
    circuit: &QuantumCircuit<R>,
    layers: &LayerSet,
    alpha_g: R,
    alpha_s: R,
    forced_shuttle: &BTreeSet<GateId>,
) -> CapabilityAssignment {
    let spec = state.spec();
    let mut out = CapabilityAssignment::default();
    let place = |gates: &[GateId], gate_side: &mut Vec<GateId>, shuttle_side: &mut Vec<GateId>| {
        for &g in gates {
            let node = &circuit.gates[g];
            if node.qubits.len() < 2 || state.executable(node) {
                gate_side.push(g);
                continue;
            }
            if forced_shuttle.contains(&g) {
                shuttle_side.push(g);
                continue;
            }
            let p_gate = gate_success(spec, estimate_gate_route(state, circuit, g));
            let p_shuttle = shuttle_success(spec, estimate_shuttle_route(state, circuit, g));
            match p_gate {
                Some(pg) if alpha_g * pg >= alpha_s * p_shuttle => gate_side.push(g),
                _ => shuttle_side.push(g),
            }
        }
    };
    let (mut fg, mut fs, mut lg, mut ls) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    place(&layers.front, &mut fg, &mut fs);
    place(&layers.lookahead, &mut lg, &mut ls);
    out.front_gate = fg;
    out.front_shuttle = fs;
    out.look_gate = lg;
    out.look_shuttle = ls;
    out
}
