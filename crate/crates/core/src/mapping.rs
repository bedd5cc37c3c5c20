//! The double mapping maintained during routing: circuit qubits onto atoms
//! (changed by SWAPs) and atoms onto lattice sites (changed by shuttling),
//! plus the interaction-derived connectivity graph over the atoms.
//!
//! The graph is updated incrementally on every atom move; a full recompute
//! cross-check runs in debug builds.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{CircuitQubit, GateNode};
use crate::error::{MapError, Result};
use crate::hardware::{Coordinate, HardwareSpec};
use crate::num::Real;

/// An atom of the register; hosts at most one circuit qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhysQubit(pub u32);

impl std::fmt::Display for PhysQubit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

type DistanceMatrix = Vec<Vec<u32>>;

pub const UNREACHABLE: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct MappingState<R: Real> {
    spec: HardwareSpec<R>,
    qubit_to_atom: BTreeMap<CircuitQubit, PhysQubit>,
    atom_to_qubit: BTreeMap<PhysQubit, CircuitQubit>,
    atom_site: BTreeMap<PhysQubit, Coordinate>,
    site_atom: BTreeMap<Coordinate, PhysQubit>,
    graph: BTreeMap<PhysQubit, BTreeSet<PhysQubit>>,
    /// Bumped whenever the geometry (and hence the graph) changes.
    version: u64,
    /// All-pairs hop distances, recomputed lazily per geometry version.
    hops: RefCell<Option<(u64, DistanceMatrix)>>,
}

impl<R: Real> MappingState<R> {
    /// Trivial identity layout: circuit qubit `i` on atom `i` on the `i`-th
    /// row-major site; remaining atoms continue on subsequent sites.
    pub fn initial(spec: &HardwareSpec<R>, circuit_qubits: usize, atoms: usize) -> Result<Self> {
        if atoms < circuit_qubits {
            return Err(MapError::Capacity(format!(
                "{atoms} atoms cannot host {circuit_qubits} circuit qubits"
            )));
        }
        if spec.sites() <= atoms {
            return Err(MapError::Capacity(format!(
                "{}x{} lattice has {} sites; need more sites than atoms ({atoms})",
                spec.l,
                spec.l,
                spec.sites()
            )));
        }
        let placements: Vec<(Coordinate, Option<CircuitQubit>)> = (0..atoms)
            .map(|i| {
                let q = (i < circuit_qubits).then_some(CircuitQubit(i as u32));
                (spec.site(i), q)
            })
            .collect();
        Self::from_placements(spec, &placements)
    }

    /// Explicit layout, atom ids assigned in order of `placements`.
    pub fn from_placements(
        spec: &HardwareSpec<R>,
        placements: &[(Coordinate, Option<CircuitQubit>)],
    ) -> Result<Self> {
        let mut state = MappingState {
            spec: spec.clone(),
            qubit_to_atom: BTreeMap::new(),
            atom_to_qubit: BTreeMap::new(),
            atom_site: BTreeMap::new(),
            site_atom: BTreeMap::new(),
            graph: BTreeMap::new(),
            version: 0,
            hops: RefCell::new(None),
        };
        for (i, &(site, qubit)) in placements.iter().enumerate() {
            let atom = PhysQubit(i as u32);
            if !spec.in_bounds(site) {
                return Err(MapError::State(format!("site {site} out of bounds")));
            }
            if state.site_atom.insert(site, atom).is_some() {
                return Err(MapError::State(format!("site {site} doubly occupied")));
            }
            state.atom_site.insert(atom, site);
            if let Some(q) = qubit {
                if state.qubit_to_atom.insert(q, atom).is_some() {
                    return Err(MapError::State(format!("{q} mapped twice")));
                }
                state.atom_to_qubit.insert(atom, q);
            }
            state.graph.insert(atom, BTreeSet::new());
        }
        state.recompute_graph();
        Ok(state)
    }

    pub fn spec(&self) -> &HardwareSpec<R> {
        &self.spec
    }

    pub fn atom_count(&self) -> usize {
        self.atom_site.len()
    }

    pub fn atoms(&self) -> impl Iterator<Item = PhysQubit> + '_ {
        self.atom_site.keys().copied()
    }

    pub fn host_of(&self, q: CircuitQubit) -> PhysQubit {
        self.qubit_to_atom[&q]
    }

    pub fn qubit_at(&self, atom: PhysQubit) -> Option<CircuitQubit> {
        self.atom_to_qubit.get(&atom).copied()
    }

    pub fn coord_of(&self, atom: PhysQubit) -> Coordinate {
        self.atom_site[&atom]
    }

    pub fn atom_at(&self, site: Coordinate) -> Option<PhysQubit> {
        self.site_atom.get(&site).copied()
    }

    pub fn is_free(&self, site: Coordinate) -> bool {
        self.spec.in_bounds(site) && !self.site_atom.contains_key(&site)
    }

    /// Final circuit-to-atom assignment, e.g. for replaying the program.
    pub fn qubit_map(&self) -> &BTreeMap<CircuitQubit, PhysQubit> {
        &self.qubit_to_atom
    }

    pub fn atom_sites(&self) -> &BTreeMap<PhysQubit, Coordinate> {
        &self.atom_site
    }

    pub fn neighbors(&self, atom: PhysQubit) -> &BTreeSet<PhysQubit> {
        &self.graph[&atom]
    }

    pub fn has_edge(&self, a: PhysQubit, b: PhysQubit) -> bool {
        self.graph.get(&a).is_some_and(|n| n.contains(&b))
    }

    pub fn edges(&self) -> BTreeSet<(PhysQubit, PhysQubit)> {
        let mut out = BTreeSet::new();
        for (&a, nbrs) in &self.graph {
            for &b in nbrs {
                out.insert((a.min(b), a.max(b)));
            }
        }
        out
    }

    /// All other placed atoms within `radius` (units of `d`) of `atom`.
    pub fn vicinity(&self, atom: PhysQubit, radius: R) -> Result<Vec<PhysQubit>> {
        let center = *self
            .atom_site
            .get(&atom)
            .ok_or_else(|| MapError::State(format!("unknown atom {atom}")))?;
        let mut out: Vec<PhysQubit> = self
            .sites_within(center, radius)
            .filter_map(|c| self.site_atom.get(&c).copied())
            .filter(|&a| a != atom)
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Unoccupied sites within `radius` (units of `d`) of `center`,
    /// row-major order. `center` itself is included when free.
    pub fn free_sites_within(&self, center: Coordinate, radius: R) -> Vec<Coordinate> {
        let mut out: Vec<Coordinate> = self
            .sites_within(center, radius)
            .filter(|c| !self.site_atom.contains_key(c))
            .collect();
        out.sort_unstable();
        out
    }

    /// In-bounds sites within `radius` of `center` (including `center`).
    fn sites_within(&self, center: Coordinate, radius: R) -> impl Iterator<Item = Coordinate> + '_ {
        let reach = radius.to_f64().unwrap_or(0.0).ceil().max(0.0) as i64;
        let (cx, cy) = (center.x as i64, center.y as i64);
        let l = self.spec.l as i64;
        let xs = (cx - reach).max(0)..=(cx + reach).min(l - 1);
        xs.flat_map(move |x| {
            let ys = (cy - reach).max(0)..=(cy + reach).min(l - 1);
            ys.map(move |y| Coordinate::new(x as u32, y as u32))
        })
        .filter(move |c| self.spec.coords_within(center, *c, radius))
    }

    /// Number of SWAPs needed to make `a` and `b` adjacent: shortest-path
    /// hop count minus one. `None` when the atoms are disconnected.
    pub fn swap_distance(&self, a: PhysQubit, b: PhysQubit) -> Option<u32> {
        if a == b {
            return Some(0);
        }
        self.hop_distance(a, b).map(|h| h - 1)
    }

    /// Shortest-path hop count between two atoms in the connectivity graph.
    pub fn hop_distance(&self, a: PhysQubit, b: PhysQubit) -> Option<u32> {
        let mut cache = self.hops.borrow_mut();
        let matrix = match cache.as_ref() {
            Some((v, m)) if *v == self.version => m,
            _ => {
                *cache = Some((self.version, self.all_pairs_hops()));
                &cache.as_ref().unwrap().1
            }
        };
        let d = matrix[a.0 as usize][b.0 as usize];
        (d != UNREACHABLE).then_some(d)
    }

    fn all_pairs_hops(&self) -> DistanceMatrix {
        let n = self.atom_count();
        let mut matrix = vec![vec![UNREACHABLE; n]; n];
        for &start in self.atom_site.keys() {
            let row = &mut matrix[start.0 as usize];
            row[start.0 as usize] = 0;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(cur) = queue.pop_front() {
                let base = row[cur.0 as usize];
                for &next in &self.graph[&cur] {
                    if row[next.0 as usize] == UNREACHABLE {
                        row[next.0 as usize] = base + 1;
                        queue.push_back(next);
                    }
                }
            }
        }
        matrix
    }

    /// Exchanges the circuit qubits hosted by two adjacent atoms.
    pub fn apply_swap(&mut self, a: PhysQubit, b: PhysQubit) -> Result<()> {
        if !self.has_edge(a, b) {
            return Err(MapError::State(format!("swap on non-adjacent atoms {a}, {b}")));
        }
        let qa = self.atom_to_qubit.remove(&a);
        let qb = self.atom_to_qubit.remove(&b);
        if let Some(q) = qa {
            self.atom_to_qubit.insert(b, q);
            self.qubit_to_atom.insert(q, b);
        }
        if let Some(q) = qb {
            self.atom_to_qubit.insert(a, q);
            self.qubit_to_atom.insert(q, a);
        }
        Ok(())
    }

    /// Moves an atom to an unoccupied in-bounds site and updates the edges
    /// incident to it.
    pub fn apply_move(&mut self, atom: PhysQubit, target: Coordinate) -> Result<()> {
        if !self.spec.in_bounds(target) {
            return Err(MapError::State(format!("move target {target} out of bounds")));
        }
        if self.site_atom.contains_key(&target) {
            return Err(MapError::State(format!("move target {target} occupied")));
        }
        let old = *self
            .atom_site
            .get(&atom)
            .ok_or_else(|| MapError::State(format!("unknown atom {atom}")))?;
        self.site_atom.remove(&old);
        self.site_atom.insert(target, atom);
        self.atom_site.insert(atom, target);

        let stale: Vec<PhysQubit> = self.graph[&atom].iter().copied().collect();
        for other in stale {
            self.graph.get_mut(&other).unwrap().remove(&atom);
        }
        let fresh: BTreeSet<PhysQubit> = self
            .sites_within(target, self.spec.r_int)
            .filter_map(|c| self.site_atom.get(&c).copied())
            .filter(|&a| a != atom)
            .collect();
        for &other in &fresh {
            self.graph.get_mut(&other).unwrap().insert(atom);
        }
        self.graph.insert(atom, fresh);
        self.version += 1;
        debug_assert!(self.graph_consistent());
        Ok(())
    }

    /// True iff every pair of the gate's atoms is within the interaction
    /// radius (single-qubit gates are always executable).
    pub fn executable(&self, gate: &GateNode<R>) -> bool {
        let atoms: Vec<PhysQubit> = gate.qubits.iter().map(|&q| self.host_of(q)).collect();
        self.clique_within(&atoms, self.spec.r_int)
    }

    /// Pairwise radius check over a set of atoms.
    pub fn clique_within(&self, atoms: &[PhysQubit], radius: R) -> bool {
        for (i, &a) in atoms.iter().enumerate() {
            for &b in &atoms[i + 1..] {
                if !self.spec.coords_within(self.coord_of(a), self.coord_of(b), radius) {
                    return false;
                }
            }
        }
        true
    }

    /// Full-recompute cross-check of the incremental graph.
    pub fn graph_consistent(&self) -> bool {
        let mut expected: BTreeMap<PhysQubit, BTreeSet<PhysQubit>> = self
            .atom_site
            .keys()
            .map(|&a| (a, BTreeSet::new()))
            .collect();
        let atoms: Vec<PhysQubit> = self.atom_site.keys().copied().collect();
        for (i, &a) in atoms.iter().enumerate() {
            for &b in &atoms[i + 1..] {
                if self
                    .spec
                    .coords_within(self.coord_of(a), self.coord_of(b), self.spec.r_int)
                {
                    expected.get_mut(&a).unwrap().insert(b);
                    expected.get_mut(&b).unwrap().insert(a);
                }
            }
        }
        expected == self.graph
    }

    fn recompute_graph(&mut self) {
        let atoms: Vec<PhysQubit> = self.atom_site.keys().copied().collect();
        for &a in &atoms {
            let site = self.coord_of(a);
            let nbrs: BTreeSet<PhysQubit> = self
                .sites_within(site, self.spec.r_int)
                .filter_map(|c| self.site_atom.get(&c).copied())
                .filter(|&b| b != a)
                .collect();
            self.graph.insert(a, nbrs);
        }
        self.version += 1;
    }
}
