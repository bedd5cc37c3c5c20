//! Lowering of abstract atom moves to native AOD operation sequences, and
//! validation of the two hardware constraints:
//!
//! * ORDERING — active column/row coordinates never cross or collide;
//! * GHOST SPOTS — an empty intersection of active coordinates never
//!   coincides (within d/10) with a trapped static atom, at any instant.
//!
//! Moves with identical displacement are grouped and loaded under one AOD
//! grid: one activation per occupied row, a diagonal d/4 offset after each
//! activation so that cross-phase ghost intersections sit strictly between
//! lattice sites, one common transfer shift (axis-decomposed), and phased
//! deactivation with compensating offsets so every atom lands exactly on
//! its target site. A candidate group is simulated against the current
//! static atom configuration before being accepted; moves that cannot be
//! grouped safely are lowered serially, which is always safe because a
//! single-row grid has no empty intersections at all.

use std::collections::BTreeMap;

use crate::error::{MapError, Result};
use crate::hardware::{Coordinate, HardwareSpec};
use crate::mapping::PhysQubit;
use crate::num::{real, Real};
use crate::program::{expand_swap, GateOp, RoutedOp};
use crate::shuttle_router::Move;

/// Ghost-spot tolerance as a fraction of the lattice constant.
const GHOST_TOL: f64 = 0.1;
/// Matching tolerance for coordinate positions, in units of d.
const POS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftPurpose {
    /// Ghost-avoidance offset during loading/unloading.
    Offset,
    /// The common displacement carrying atoms to their targets.
    Transfer,
    /// Undoes one loading offset during phased unloading.
    Compensate,
}

/// Which active coordinates a shift displaces. Lowered programs always
/// shift everything; subsets exist so that hand-built schedules can
/// exercise the ordering validator.
#[derive(Debug, Clone, PartialEq)]
pub enum ShiftScope<R: Real> {
    All,
    Subset { cols: Vec<R>, rows: Vec<R> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AodLoad<R: Real> {
    pub atom: PhysQubit,
    pub x: R,
    pub y: R,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AodOpKind<R: Real> {
    Activate {
        cols: Vec<R>,
        rows: Vec<R>,
        loads: Vec<AodLoad<R>>,
    },
    Shift {
        dx: R,
        dy: R,
        purpose: ShiftPurpose,
        scope: ShiftScope<R>,
    },
    Deactivate {
        cols: Vec<R>,
        rows: Vec<R>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AodOperation<R: Real> {
    pub kind: AodOpKind<R>,
    pub duration: R,
}

/// Time-ordered AOD operation sequence.
#[derive(Debug, Clone, Default)]
pub struct AodSchedule<R: Real> {
    pub ops: Vec<AodOperation<R>>,
}

impl<R: Real> AodSchedule<R> {
    pub fn total_duration(&self) -> R {
        self.ops
            .iter()
            .fold(R::zero(), |acc, op| acc + op.duration)
    }
}

/// Fully lowered program: native gates, AOD operations, and bookkeeping
/// markers for qubit-mapping swaps (markers carry no time and are not
/// rendered).
#[derive(Debug, Clone)]
pub enum LoweredOp<R: Real> {
    Gate(GateOp<R>),
    Aod(AodOperation<R>),
    SwapMarker(PhysQubit, PhysQubit),
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation<R: Real> {
    Ordering { time: R, axis: char, a: R, b: R },
    GhostSpot { time: R, x: R, y: R, atom: PhysQubit },
    Malformed { time: R, msg: String },
}

impl<R: Real> std::fmt::Display for Violation<R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::Ordering { time, axis, a, b } => {
                write!(f, "ordering violation at t={time}: {axis} coordinates {a} and {b} cross")
            }
            Violation::GhostSpot { time, x, y, atom } => {
                write!(f, "ghost spot at t={time}: empty trap ({x},{y}) hits atom {atom}")
            }
            Violation::Malformed { time, msg } => write!(f, "malformed schedule at t={time}: {msg}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Lowering
// ---------------------------------------------------------------------------

/// Builds the operation sequence for one group of same-displacement moves.
fn group_ops<R: Real>(moves: &[Move], spec: &HardwareSpec<R>) -> Vec<AodOperation<R>> {
    let d = spec.d;
    let q = d / real(4.0);
    let um = |v: u32| -> R { R::from_u32(v).unwrap() * d };
    let (dx, dy) = {
        let m = &moves[0];
        (
            (R::from_i64(m.to.x as i64 - m.from.x as i64).unwrap()) * d,
            (R::from_i64(m.to.y as i64 - m.from.y as i64).unwrap()) * d,
        )
    };

    // Load phases: one per occupied source row, unless the whole group sits
    // in a single column (then one grid covers it without ghosts).
    let mut phases: Vec<Vec<&Move>> = Vec::new();
    let single_column = moves.len() > 1 && moves.iter().all(|m| m.from.x == moves[0].from.x);
    if single_column {
        phases.push(moves.iter().collect());
    } else {
        let mut by_row: BTreeMap<u32, Vec<&Move>> = BTreeMap::new();
        for m in moves {
            by_row.entry(m.from.y).or_default().push(m);
        }
        phases.extend(by_row.into_values());
    }
    let count = phases.len();

    let mut ops = Vec::new();
    let offset = |sign: R| -> [AodOperation<R>; 2] {
        [
            AodOperation {
                kind: AodOpKind::Shift {
                    dx: sign * q,
                    dy: R::zero(),
                    purpose: if sign > R::zero() {
                        ShiftPurpose::Offset
                    } else {
                        ShiftPurpose::Compensate
                    },
                    scope: ShiftScope::All,
                },
                duration: q / spec.v,
            },
            AodOperation {
                kind: AodOpKind::Shift {
                    dx: R::zero(),
                    dy: sign * q,
                    purpose: if sign > R::zero() {
                        ShiftPurpose::Offset
                    } else {
                        ShiftPurpose::Compensate
                    },
                    scope: ShiftScope::All,
                },
                duration: q / spec.v,
            },
        ]
    };

    for (k, phase) in phases.iter().enumerate() {
        let mut cols: Vec<R> = phase.iter().map(|m| um(m.from.x)).collect();
        cols.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cols.dedup_by(|a, b| *a == *b);
        let mut rows: Vec<R> = phase.iter().map(|m| um(m.from.y)).collect();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rows.dedup_by(|a, b| *a == *b);
        let loads = phase
            .iter()
            .map(|m| AodLoad {
                atom: m.atom,
                x: um(m.from.x),
                y: um(m.from.y),
            })
            .collect();
        ops.push(AodOperation {
            kind: AodOpKind::Activate { cols, rows, loads },
            duration: spec.t_act,
        });
        if k + 1 < count {
            ops.extend(offset(R::one()));
        }
    }

    if dx != R::zero() {
        ops.push(AodOperation {
            kind: AodOpKind::Shift {
                dx,
                dy: R::zero(),
                purpose: ShiftPurpose::Transfer,
                scope: ShiftScope::All,
            },
            duration: dx.abs() / spec.v,
        });
    }
    if dy != R::zero() {
        ops.push(AodOperation {
            kind: AodOpKind::Shift {
                dx: R::zero(),
                dy,
                purpose: ShiftPurpose::Transfer,
                scope: ShiftScope::All,
            },
            duration: dy.abs() / spec.v,
        });
    }

    for (k, phase) in phases.iter().enumerate().rev() {
        let mut cols: Vec<R> = phase.iter().map(|m| um(m.to.x)).collect();
        cols.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cols.dedup_by(|a, b| *a == *b);
        let mut rows: Vec<R> = phase.iter().map(|m| um(m.to.y)).collect();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rows.dedup_by(|a, b| *a == *b);
        ops.push(AodOperation {
            kind: AodOpKind::Deactivate { cols, rows },
            duration: spec.t_deact,
        });
        if k > 0 {
            ops.extend(offset(-R::one()));
        }
    }
    ops
}

/// Lowers a move stream to AOD operations, grouping greedily over the
/// window. Candidate groups are simulated against the current static atom
/// positions; an unsafe extension closes the group and the move starts a
/// new one (single moves are always safe).
pub fn lower_moves<R: Real>(
    moves: &[Move],
    initial_sites: &BTreeMap<PhysQubit, Coordinate>,
    spec: &HardwareSpec<R>,
    window: usize,
) -> Result<AodSchedule<R>> {
    let mut sites = initial_sites.clone();
    let mut schedule = AodSchedule::default();
    let mut pending: Vec<Move> = Vec::new();
    let window = window.max(1);

    let flush = |pending: &mut Vec<Move>,
                 sites: &mut BTreeMap<PhysQubit, Coordinate>,
                 schedule: &mut AodSchedule<R>| {
        if pending.is_empty() {
            return;
        }
        schedule.ops.extend(group_ops(pending, spec));
        for m in pending.iter() {
            sites.insert(m.atom, m.to);
        }
        pending.clear();
    };

    for &m in moves {
        let extends = !pending.is_empty()
            && pending.len() < window
            && same_displacement(&pending[0], &m)
            && {
                let mut candidate = pending.clone();
                candidate.push(m);
                group_is_safe(&candidate, &sites, spec)
            };
        if !extends {
            flush(&mut pending, &mut sites, &mut schedule);
        }
        pending.push(m);
    }
    flush(&mut pending, &mut sites, &mut schedule);
    Ok(schedule)
}

fn same_displacement(a: &Move, b: &Move) -> bool {
    (a.to.x as i64 - a.from.x as i64, a.to.y as i64 - a.from.y as i64)
        == (b.to.x as i64 - b.from.x as i64, b.to.y as i64 - b.from.y as i64)
}

fn group_is_safe<R: Real>(
    candidate: &[Move],
    sites: &BTreeMap<PhysQubit, Coordinate>,
    spec: &HardwareSpec<R>,
) -> bool {
    let ops = group_ops(candidate, spec);
    validate_ops(&ops, sites, spec).is_ok()
}

/// Lowers a routed stream: gates pass through (virtual SWAPs expand to
/// 3 CZ + 6 H plus a mapping marker), consecutive moves lower through
/// [`lower_moves`]-style grouping.
pub fn lower_program<R: Real>(
    routed: &[RoutedOp<R>],
    initial_sites: &BTreeMap<PhysQubit, Coordinate>,
    spec: &HardwareSpec<R>,
    window: usize,
) -> Result<Vec<LoweredOp<R>>> {
    let mut out = Vec::new();
    let mut sites = initial_sites.clone();
    let mut run: Vec<Move> = Vec::new();

    let flush_run = |run: &mut Vec<Move>,
                         sites: &mut BTreeMap<PhysQubit, Coordinate>,
                         out: &mut Vec<LoweredOp<R>>|
     -> Result<()> {
        if run.is_empty() {
            return Ok(());
        }
        let lowered = lower_moves(run, sites, spec, window)?;
        out.extend(lowered.ops.into_iter().map(LoweredOp::Aod));
        for m in run.iter() {
            sites.insert(m.atom, m.to);
        }
        run.clear();
        Ok(())
    };

    for op in routed {
        match op {
            RoutedOp::Move(m) => run.push(*m),
            RoutedOp::Gate(g) => {
                flush_run(&mut run, &mut sites, &mut out)?;
                if g.kind == crate::circuit::GateKind::Swap {
                    out.extend(
                        expand_swap::<R>(g.atoms[0], g.atoms[1])
                            .into_iter()
                            .map(LoweredOp::Gate),
                    );
                    out.push(LoweredOp::SwapMarker(g.atoms[0], g.atoms[1]));
                } else {
                    out.push(LoweredOp::Gate(g.clone()));
                }
            }
        }
    }
    flush_run(&mut run, &mut sites, &mut out)?;
    Ok(out)
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

struct Axis<R: Real> {
    // Coordinate id -> position; None once deactivated. Ids are stable so
    // loaded atoms can reference their trap.
    pos: Vec<Option<R>>,
}

impl<R: Real> Axis<R> {
    fn new() -> Self {
        Axis { pos: Vec::new() }
    }

    fn active(&self) -> impl Iterator<Item = (usize, R)> + '_ {
        self.pos
            .iter()
            .enumerate()
            .filter_map(|(i, p)| p.map(|p| (i, p)))
    }

    fn find(&self, x: R, tol: R) -> Option<usize> {
        self.active()
            .find(|&(_, p)| (p - x).abs() <= tol)
            .map(|(i, _)| i)
    }
}

struct Tracker<R: Real> {
    cols: Axis<R>,
    rows: Axis<R>,
    loaded: BTreeMap<PhysQubit, (usize, usize)>,
    static_atoms: BTreeMap<PhysQubit, (R, R)>,
    time: R,
    ghost_tol: R,
    pos_tol: R,
}

type Check<R> = std::result::Result<(), Violation<R>>;

impl<R: Real> Tracker<R> {
    fn new(initial_sites: &BTreeMap<PhysQubit, Coordinate>, spec: &HardwareSpec<R>) -> Self {
        let static_atoms = initial_sites
            .iter()
            .map(|(&a, &c)| {
                (
                    a,
                    (
                        R::from_u32(c.x).unwrap() * spec.d,
                        R::from_u32(c.y).unwrap() * spec.d,
                    ),
                )
            })
            .collect();
        Tracker {
            cols: Axis::new(),
            rows: Axis::new(),
            loaded: BTreeMap::new(),
            static_atoms,
            time: R::zero(),
            ghost_tol: spec.d * real(GHOST_TOL),
            pos_tol: spec.d * real(POS_TOL),
        }
    }

    fn malformed(&self, msg: impl Into<String>) -> Violation<R> {
        Violation::Malformed {
            time: self.time,
            msg: msg.into(),
        }
    }

    /// Empty active intersections: every (col, row) pair without a loaded
    /// atom assigned to exactly that pair.
    fn ghosts(&self) -> Vec<(usize, usize, R, R)> {
        let mut out = Vec::new();
        for (ci, cx) in self.cols.active() {
            for (ri, ry) in self.rows.active() {
                let held = self
                    .loaded
                    .values()
                    .any(|&(lc, lr)| lc == ci && lr == ri);
                if !held {
                    out.push((ci, ri, cx, ry));
                }
            }
        }
        out
    }

    fn check_ghosts_static(&self) -> Check<R> {
        for (_, _, x, y) in self.ghosts() {
            for (&atom, &(ax, ay)) in &self.static_atoms {
                let dist = ((x - ax).powi(2) + (y - ay).powi(2)).sqrt();
                if dist < self.ghost_tol {
                    return Err(Violation::GhostSpot {
                        time: self.time,
                        x,
                        y,
                        atom,
                    });
                }
            }
        }
        Ok(())
    }

    fn apply_activate(&mut self, cols: &[R], rows: &[R], loads: &[AodLoad<R>]) -> Check<R> {
        for &x in cols {
            if self.cols.find(x, self.pos_tol).is_some() {
                return Err(Violation::Ordering {
                    time: self.time,
                    axis: 'x',
                    a: x,
                    b: x,
                });
            }
            self.cols.pos.push(Some(x));
        }
        for &y in rows {
            if self.rows.find(y, self.pos_tol).is_some() {
                return Err(Violation::Ordering {
                    time: self.time,
                    axis: 'y',
                    a: y,
                    b: y,
                });
            }
            self.rows.pos.push(Some(y));
        }
        for load in loads {
            let ci = self
                .cols
                .find(load.x, self.pos_tol)
                .ok_or_else(|| self.malformed(format!("load of {} on inactive column", load.atom)))?;
            let ri = self
                .rows
                .find(load.y, self.pos_tol)
                .ok_or_else(|| self.malformed(format!("load of {} on inactive row", load.atom)))?;
            match self.static_atoms.get(&load.atom) {
                Some(&(ax, ay))
                    if (ax - load.x).abs() <= self.pos_tol && (ay - load.y).abs() <= self.pos_tol =>
                {
                    self.static_atoms.remove(&load.atom);
                    self.loaded.insert(load.atom, (ci, ri));
                }
                _ => {
                    return Err(
                        self.malformed(format!("atom {} is not trapped at the load point", load.atom))
                    )
                }
            }
        }
        self.check_ghosts_static()
    }

    fn moved_sets(&self, scope: &ShiftScope<R>) -> std::result::Result<(Vec<usize>, Vec<usize>), Violation<R>> {
        match scope {
            ShiftScope::All => Ok((
                self.cols.active().map(|(i, _)| i).collect(),
                self.rows.active().map(|(i, _)| i).collect(),
            )),
            ShiftScope::Subset { cols, rows } => {
                let mut ci = Vec::new();
                for &x in cols {
                    ci.push(
                        self.cols
                            .find(x, self.pos_tol)
                            .ok_or_else(|| self.malformed(format!("shift of inactive column {x}")))?,
                    );
                }
                let mut ri = Vec::new();
                for &y in rows {
                    ri.push(
                        self.rows
                            .find(y, self.pos_tol)
                            .ok_or_else(|| self.malformed(format!("shift of inactive row {y}")))?,
                    );
                }
                Ok((ci, ri))
            }
        }
    }

    fn apply_shift(&mut self, dx: R, dy: R, scope: &ShiftScope<R>) -> Check<R> {
        let (moved_cols, moved_rows) = self.moved_sets(scope)?;

        // Ordering: linear motion crosses or collides iff the endpoint
        // order differs or coincides.
        for (axis, axis_coords, moved, delta) in [
            ('x', &self.cols, &moved_cols, dx),
            ('y', &self.rows, &moved_rows, dy),
        ] {
            let state: Vec<(usize, R, R)> = axis_coords
                .active()
                .map(|(i, p)| {
                    let after = if moved.contains(&i) { p + delta } else { p };
                    (i, p, after)
                })
                .collect();
            for (i, (_, b1, a1)) in state.iter().enumerate() {
                for (_, b2, a2) in state[i + 1..].iter() {
                    let before = *b2 - *b1;
                    let after = *a2 - *a1;
                    if before.signum() != after.signum() || after.abs() <= self.pos_tol {
                        return Err(Violation::Ordering {
                            time: self.time,
                            axis,
                            a: *b1,
                            b: *b2,
                        });
                    }
                }
            }
        }

        // Ghost spots along the whole trajectory (exact segment check).
        for (ci, ri, x0, y0) in self.ghosts() {
            let gdx = if moved_cols.contains(&ci) { dx } else { R::zero() };
            let gdy = if moved_rows.contains(&ri) { dy } else { R::zero() };
            for (&atom, &(ax, ay)) in &self.static_atoms {
                if segment_point_distance(x0, y0, gdx, gdy, ax, ay) < self.ghost_tol {
                    return Err(Violation::GhostSpot {
                        time: self.time,
                        x: x0,
                        y: y0,
                        atom,
                    });
                }
            }
        }

        for i in moved_cols {
            if let Some(p) = self.cols.pos[i] {
                self.cols.pos[i] = Some(p + dx);
            }
        }
        for i in moved_rows {
            if let Some(p) = self.rows.pos[i] {
                self.rows.pos[i] = Some(p + dy);
            }
        }
        Ok(())
    }

    fn apply_deactivate(&mut self, cols: &[R], rows: &[R]) -> Check<R> {
        let mut dropped_cols = Vec::new();
        for &x in cols {
            let i = self
                .cols
                .find(x, self.pos_tol)
                .ok_or_else(|| self.malformed(format!("deactivation of inactive column {x}")))?;
            dropped_cols.push(i);
        }
        let mut dropped_rows = Vec::new();
        for &y in rows {
            let i = self
                .rows
                .find(y, self.pos_tol)
                .ok_or_else(|| self.malformed(format!("deactivation of inactive row {y}")))?;
            dropped_rows.push(i);
        }
        // Atoms lose their trap when either coordinate goes away; they fall
        // back to a static trap at their current position.
        let released: Vec<PhysQubit> = self
            .loaded
            .iter()
            .filter(|(_, &(ci, ri))| dropped_cols.contains(&ci) || dropped_rows.contains(&ri))
            .map(|(&a, _)| a)
            .collect();
        for atom in released {
            let (ci, ri) = self.loaded.remove(&atom).unwrap();
            let x = self.cols.pos[ci].unwrap();
            let y = self.rows.pos[ri].unwrap();
            self.static_atoms.insert(atom, (x, y));
        }
        for i in dropped_cols {
            self.cols.pos[i] = None;
        }
        for i in dropped_rows {
            self.rows.pos[i] = None;
        }
        self.check_ghosts_static()
    }

    fn apply(&mut self, op: &AodOperation<R>) -> Check<R> {
        match &op.kind {
            AodOpKind::Activate { cols, rows, loads } => self.apply_activate(cols, rows, loads)?,
            AodOpKind::Shift { dx, dy, scope, .. } => self.apply_shift(*dx, *dy, scope)?,
            AodOpKind::Deactivate { cols, rows } => self.apply_deactivate(cols, rows)?,
        }
        self.time += op.duration;
        Ok(())
    }
}

/// Minimal distance between the segment `(x0, y0) -> (x0+dx, y0+dy)` and a
/// point.
fn segment_point_distance<R: Real>(x0: R, y0: R, dx: R, dy: R, px: R, py: R) -> R {
    let len2 = dx * dx + dy * dy;
    let t = if len2 > R::zero() {
        (((px - x0) * dx + (py - y0) * dy) / len2)
            .max(R::zero())
            .min(R::one())
    } else {
        R::zero()
    };
    let (cx, cy) = (x0 + t * dx, y0 + t * dy);
    ((px - cx).powi(2) + (py - cy).powi(2)).sqrt()
}

/// Replays a schedule against the ordering and ghost-spot constraints.
/// Returns the final atom positions (um) on success, or the first
/// violation with its timestamp.
pub fn validate_ops<R: Real>(
    ops: &[AodOperation<R>],
    initial_sites: &BTreeMap<PhysQubit, Coordinate>,
    spec: &HardwareSpec<R>,
) -> std::result::Result<BTreeMap<PhysQubit, (R, R)>, Violation<R>> {
    let mut tracker = Tracker::new(initial_sites, spec);
    for op in ops {
        tracker.apply(op)?;
    }
    if !tracker.loaded.is_empty() {
        return Err(tracker.malformed("atoms left loaded at end of schedule"));
    }
    Ok(tracker.static_atoms)
}

/// [`validate_ops`] for a whole schedule value.
pub fn validate_schedule<R: Real>(
    schedule: &AodSchedule<R>,
    initial_sites: &BTreeMap<PhysQubit, Coordinate>,
    spec: &HardwareSpec<R>,
) -> std::result::Result<BTreeMap<PhysQubit, (R, R)>, Violation<R>> {
    validate_ops(&schedule.ops, initial_sites, spec)
}

/// Convenience wrapper turning a violation into a routing-stage error.
pub fn ensure_valid<R: Real>(
    schedule: &AodSchedule<R>,
    initial_sites: &BTreeMap<PhysQubit, Coordinate>,
    spec: &HardwareSpec<R>,
) -> Result<()> {
    validate_schedule(schedule, initial_sites, spec)
        .map(|_| ())
        .map_err(|v| MapError::State(format!("lowered schedule invalid: {v}")))
}
