//! ASAP scheduling of the lowered program under the restriction-radius
//! constraint, and the success-probability metrics comparing the mapped
//! program against the unmapped circuit.

use std::collections::BTreeMap;

use crate::aod::{AodOpKind, LoweredOp, ShiftScope};
use crate::circuit::{CircuitQubit, GateKind};
use crate::error::{MapError, Result};
use crate::hardware::{Coordinate, HardwareSpec};
use crate::mapping::PhysQubit;
use crate::num::{real, Real};

#[derive(Debug, Clone)]
pub struct ScheduledOp<R: Real> {
    pub op: LoweredOp<R>,
    pub start: R,
    pub duration: R,
}

/// Final program with start times, plus the bookkeeping needed for the
/// fidelity metrics: per-circuit-qubit busy time, native gate counts and
/// the number of completed atom transfers.
#[derive(Debug, Clone)]
pub struct ScheduledProgram<R: Real> {
    pub ops: Vec<ScheduledOp<R>>,
    pub total: R,
    busy: BTreeMap<CircuitQubit, R>,
    gate_counts: BTreeMap<GateKind, u64>,
    shuttle_transfers: u64,
}

impl<R: Real> ScheduledProgram<R> {
    pub fn gate_count(&self, kind: GateKind) -> u64 {
        self.gate_counts.get(&kind).copied().unwrap_or(0)
    }

    pub fn cz_count(&self) -> u64 {
        self.gate_count(GateKind::Cz)
    }

    pub fn shuttle_transfers(&self) -> u64 {
        self.shuttle_transfers
    }

    pub fn busy_of(&self, q: CircuitQubit) -> R {
        self.busy.get(&q).copied().unwrap_or_else(R::zero)
    }

    pub fn aod_op_count(&self) -> usize {
        self.ops
            .iter()
            .filter(|s| matches!(s.op, LoweredOp::Aod(_)))
            .count()
    }
}

/// ASAP list scheduler. Preserves per-qubit program order, serializes AOD
/// operations on the single deflector device, and (when `restriction` is
/// set) delays a multi-qubit gate until no other multi-qubit gate within
/// the restriction radius overlaps it in time.
pub fn schedule<R: Real>(
    ops: &[LoweredOp<R>],
    initial_sites: &BTreeMap<PhysQubit, Coordinate>,
    initial_hosts: &BTreeMap<PhysQubit, CircuitQubit>,
    spec: &HardwareSpec<R>,
    restriction: bool,
) -> Result<ScheduledProgram<R>> {
    let mut ready: BTreeMap<PhysQubit, R> = BTreeMap::new();
    let mut aod_ready = R::zero();
    let mut host: BTreeMap<PhysQubit, Option<CircuitQubit>> = initial_sites
        .keys()
        .map(|&a| (a, initial_hosts.get(&a).copied()))
        .collect();
    let mut sites = initial_sites.clone();
    // Loaded atoms in flight, tracked in micrometres.
    let mut loaded: BTreeMap<PhysQubit, (R, R)> = BTreeMap::new();
    // Running multi-qubit gates: (start, end, atom coordinates).
    let mut mq_gates: Vec<(R, R, Vec<Coordinate>)> = Vec::new();

    let mut out = Vec::new();
    let mut total = R::zero();
    let mut busy: BTreeMap<CircuitQubit, R> = BTreeMap::new();
    let mut gate_counts: BTreeMap<GateKind, u64> = BTreeMap::new();
    let mut shuttle_transfers = 0u64;
    let pos_tol = spec.d * real(1e-9);

    for op in ops {
        let (participants, duration): (Vec<PhysQubit>, R) = match op {
            LoweredOp::Gate(g) => (g.atoms.clone(), spec.gate_time(g.kind)),
            LoweredOp::SwapMarker(a, b) => {
                let qa = host.get(a).copied().flatten();
                let qb = host.get(b).copied().flatten();
                host.insert(*a, qb);
                host.insert(*b, qa);
                continue;
            }
            LoweredOp::Aod(aod) => {
                let parts = match &aod.kind {
                    AodOpKind::Activate { loads, .. } => {
                        loads.iter().map(|l| l.atom).collect()
                    }
                    AodOpKind::Shift { .. } => loaded.keys().copied().collect(),
                    AodOpKind::Deactivate { cols, rows } => loaded
                        .iter()
                        .filter(|(_, &(x, y))| {
                            cols.iter().any(|&c| (c - x).abs() <= pos_tol)
                                || rows.iter().any(|&r| (r - y).abs() <= pos_tol)
                        })
                        .map(|(&a, _)| a)
                        .collect(),
                };
                (parts, aod.duration)
            }
        };

        let mut start = R::zero();
        for p in &participants {
            start = start.max(ready.get(p).copied().unwrap_or_else(R::zero));
        }

        match op {
            LoweredOp::Gate(g) => {
                if restriction && g.atoms.len() >= 2 {
                    let coords: Vec<Coordinate> = g
                        .atoms
                        .iter()
                        .map(|a| {
                            sites.get(a).copied().ok_or_else(|| {
                                MapError::State(format!("gate on unknown atom {a}"))
                            })
                        })
                        .collect::<Result<_>>()?;
                    // Push the start past every conflicting running gate.
                    loop {
                        let end = start + duration;
                        let mut pushed = false;
                        for (gs, ge, gc) in &mq_gates {
                            if *gs < end && start < *ge && conflicts(spec, &coords, gc) {
                                start = *ge;
                                pushed = true;
                            }
                        }
                        if !pushed {
                            break;
                        }
                    }
                    mq_gates.push((start, start + duration, coords));
                }
                *gate_counts.entry(g.kind).or_insert(0) += 1;
            }
            LoweredOp::Aod(aod) => {
                start = start.max(aod_ready);
                aod_ready = start + duration;
                match &aod.kind {
                    AodOpKind::Activate { loads, .. } => {
                        for l in loads {
                            loaded.insert(l.atom, (l.x, l.y));
                        }
                    }
                    AodOpKind::Shift { dx, dy, scope, .. } => {
                        debug_assert!(matches!(scope, ShiftScope::All));
                        for (x, y) in loaded.values_mut() {
                            *x += *dx;
                            *y += *dy;
                        }
                    }
                    AodOpKind::Deactivate { .. } => {
                        for p in &participants {
                            let (x, y) = loaded.remove(p).expect("deactivated atom was loaded");
                            let site = um_to_site(spec, x, y).ok_or_else(|| {
                                MapError::State(format!("atom {p} released off-lattice"))
                            })?;
                            sites.insert(*p, site);
                            shuttle_transfers += 1;
                        }
                    }
                }
            }
            LoweredOp::SwapMarker(..) => unreachable!(),
        }

        let end = start + duration;
        for p in &participants {
            ready.insert(*p, end);
            if let Some(Some(q)) = host.get(p) {
                *busy.entry(*q).or_insert_with(R::zero) += duration;
            }
        }
        total = total.max(end);
        out.push(ScheduledOp {
            op: op.clone(),
            start,
            duration,
        });
    }

    Ok(ScheduledProgram {
        ops: out,
        total,
        busy,
        gate_counts,
        shuttle_transfers,
    })
}

/// Restriction-radius conflict: some atom of one gate within r_restr of
/// some atom of the other.
fn conflicts<R: Real>(spec: &HardwareSpec<R>, a: &[Coordinate], b: &[Coordinate]) -> bool {
    a.iter()
        .any(|&ca| b.iter().any(|&cb| spec.coords_within(ca, cb, spec.r_restr)))
}

fn um_to_site<R: Real>(spec: &HardwareSpec<R>, x: R, y: R) -> Option<Coordinate> {
    let tol = real::<R>(1e-6) * spec.d;
    let to_index = |v: R| -> Option<u32> {
        let scaled = v / spec.d;
        let rounded = scaled.round();
        ((scaled - rounded).abs() <= tol && rounded >= R::zero()).then(|| {
            rounded.to_f64().unwrap() as u32
        })
    };
    let c = Coordinate::new(to_index(x)?, to_index(y)?);
    spec.in_bounds(c).then_some(c)
}

/// Eq.-style success probability of a scheduled program over `n` circuit
/// qubits: `P = exp(-t_idle / T_eff) * prod F_O`, with `t_idle` summing
/// each circuit qubit's idle time against the total runtime.
pub fn success_probability<R: Real>(
    prog: &ScheduledProgram<R>,
    spec: &HardwareSpec<R>,
    n: usize,
) -> (R, R) {
    let mut t_idle = R::zero();
    for q in 0..n {
        t_idle += prog.total - prog.busy_of(CircuitQubit(q as u32));
    }
    let mut p = (-t_idle / spec.t_eff()).exp();
    for (&kind, &count) in &prog.gate_counts {
        p *= spec.gate_fidelity(kind).powi(count as i32);
    }
    p *= spec.f_shuttle.powi(prog.shuttle_transfers as i32);
    (p, t_idle)
}

/// Comparison of a mapped program against the unmapped reference.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics<R: Real> {
    pub total_time: R,
    pub t_idle: R,
    pub p: R,
    pub delta_f: R,
    pub delta_cz: i64,
    pub delta_t: R,
    /// Mapper CPU time in seconds; reported on stdout only, never in the
    /// artifact files, so identical runs stay byte-identical.
    pub runtime_s: f64,
}

pub fn compare<R: Real>(
    original: &ScheduledProgram<R>,
    mapped: &ScheduledProgram<R>,
    spec: &HardwareSpec<R>,
    n: usize,
) -> Metrics<R> {
    let (p_orig, _) = success_probability(original, spec, n);
    let (p_mapped, t_idle) = success_probability(mapped, spec, n);
    Metrics {
        total_time: mapped.total,
        t_idle,
        p: p_mapped,
        delta_f: -(p_mapped / p_orig).ln(),
        delta_cz: mapped.cz_count() as i64 - original.cz_count() as i64,
        delta_t: mapped.total - original.total,
        runtime_s: 0.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hardware::parse_hardware;
    use crate::program::GateOp;

    fn mixed_spec() -> HardwareSpec<f64> {
        let text = "l = 15\nd = 3.0\nr_int = 2.5\nr_restr = 2.5\nF_cz = 0.995\nF_h = 0.999\n\
                    F_shuttle = 0.9999\nt_u3 = 0.5\nt_cz = 0.2\nt_ccz = 0.4\nt_cccz = 0.6\n\
                    v = 0.3\nt_act = 40\nt_deact = 40\nT1 = 100000000\nT2 = 1500000\n";
        parse_hardware(text).unwrap()
    }

    fn cz(a: u32, b: u32) -> LoweredOp<f64> {
        LoweredOp::Gate(GateOp {
            kind: GateKind::Cz,
            atoms: vec![PhysQubit(a), PhysQubit(b)],
            params: None,
        })
    }

    fn layout(coords: &[(u32, u32)]) -> (BTreeMap<PhysQubit, Coordinate>, BTreeMap<PhysQubit, CircuitQubit>) {
        let sites = coords
            .iter()
            .enumerate()
            .map(|(i, &(x, y))| (PhysQubit(i as u32), Coordinate::new(x, y)))
            .collect();
        let hosts = (0..coords.len())
            .map(|i| (PhysQubit(i as u32), CircuitQubit(i as u32)))
            .collect();
        (sites, hosts)
    }

    #[test]
    fn distant_cz_gates_overlap() {
        let spec = mixed_spec();
        let (sites, hosts) = layout(&[(0, 0), (1, 0), (10, 0), (11, 0)]);
        let prog = schedule(&[cz(0, 1), cz(2, 3)], &sites, &hosts, &spec, true).unwrap();
        assert_eq!(prog.total, 0.2);
    }

    #[test]
    fn close_cz_gates_serialize() {
        let spec = mixed_spec();
        let (sites, hosts) = layout(&[(0, 0), (1, 0), (3, 0), (4, 0)]);
        let prog = schedule(&[cz(0, 1), cz(2, 3)], &sites, &hosts, &spec, true).unwrap();
        assert_eq!(prog.total, 0.4);
        // Without the restriction they would overlap.
        let free = schedule(&[cz(0, 1), cz(2, 3)], &sites, &hosts, &spec, false).unwrap();
        assert_eq!(free.total, 0.2);
    }

    #[test]
    fn empty_program_scores_perfectly() {
        let spec = mixed_spec();
        let prog = schedule::<f64>(&[], &BTreeMap::new(), &BTreeMap::new(), &spec, true).unwrap();
        assert_eq!(prog.total, 0.0);
        let (p, t_idle) = success_probability(&prog, &spec, 0);
        assert_eq!(p, 1.0);
        assert_eq!(t_idle, 0.0);
    }

    #[test]
    fn one_cz_probability_is_exact() {
        let spec = mixed_spec();
        let (sites, hosts) = layout(&[(0, 0), (1, 0)]);
        let prog = schedule(&[cz(0, 1)], &sites, &hosts, &spec, true).unwrap();
        let (p, t_idle) = success_probability(&prog, &spec, 2);
        assert_eq!(t_idle, 0.0);
        assert_eq!(p, 0.995);
    }

    #[test]
    fn effective_coherence_time_matches_formula() {
        let spec = mixed_spec();
        let expected = 1e8 * 1.5e6 / (1e8 + 1.5e6);
        let rel = ((spec.t_eff() - expected) / expected).abs();
        assert!(rel < 1e-12);
    }

    #[test]
    fn idle_time_counts_waiting_qubits() {
        let spec = mixed_spec();
        let (sites, hosts) = layout(&[(0, 0), (1, 0), (3, 0), (4, 0)]);
        // Serialized pair: each qubit busy 0.2 of the 0.4 total.
        let prog = schedule(&[cz(0, 1), cz(2, 3)], &sites, &hosts, &spec, true).unwrap();
        let (_, t_idle) = success_probability(&prog, &spec, 4);
        assert!((t_idle - 4.0 * 0.2).abs() < 1e-12);
    }

    #[test]
    fn probability_decreases_when_ops_are_appended() {
        let spec = mixed_spec();
        let (sites, hosts) = layout(&[(0, 0), (1, 0), (10, 0), (11, 0)]);
        let short = schedule(&[cz(0, 1)], &sites, &hosts, &spec, true).unwrap();
        let long = schedule(&[cz(0, 1), cz(2, 3), cz(0, 1)], &sites, &hosts, &spec, true).unwrap();
        let (p_short, _) = success_probability(&short, &spec, 4);
        let (p_long, _) = success_probability(&long, &spec, 4);
        assert!(p_long < p_short);
    }

    #[test]
    fn comparison_deltas() {
        let spec = mixed_spec();
        let (sites, hosts) = layout(&[(0, 0), (1, 0)]);
        let orig = schedule(&[cz(0, 1)], &sites, &hosts, &spec, false).unwrap();
        let same = compare(&orig, &orig, &spec, 2);
        assert_eq!(same.delta_f, 0.0);
        assert_eq!(same.delta_cz, 0);
        assert_eq!(same.delta_t, 0.0);

        // One extra (decomposed) SWAP adds exactly 3 CZ.
        let mut with_swap: Vec<LoweredOp<f64>> = vec![cz(0, 1)];
        with_swap.extend(
            crate::program::expand_swap::<f64>(PhysQubit(0), PhysQubit(1))
                .into_iter()
                .map(LoweredOp::Gate),
        );
        let mapped = schedule(&with_swap, &sites, &hosts, &spec, false).unwrap();
        let m = compare(&orig, &mapped, &spec, 2);
        assert_eq!(m.delta_cz, 3);
        assert!(m.delta_f > 0.0);
    }

    #[test]
    fn per_qubit_order_is_preserved() {
        let spec = mixed_spec();
        let (sites, hosts) = layout(&[(0, 0), (1, 0), (2, 0)]);
        let h = |a: u32| {
            LoweredOp::Gate(GateOp {
                kind: GateKind::H,
                atoms: vec![PhysQubit(a)],
                params: None,
            })
        };
        let prog = schedule(&[h(0), cz(0, 1), h(0), cz(1, 2)], &sites, &hosts, &spec, true).unwrap();
        // q0: H at 0, CZ after it, H after the CZ.
        assert_eq!(prog.ops[0].start, 0.0);
        assert!(prog.ops[1].start >= prog.ops[0].start + prog.ops[0].duration);
        assert!(prog.ops[2].start >= prog.ops[1].start + prog.ops[1].duration);
    }
}
