//! End-to-end mapping pipeline: parse, decompose, map, route, lower,
//! schedule, compare. This is what the CLI drives; the acceptance tests
//! call it directly.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Write as _;

use crate::aod::{lower_program, AodOpKind, LoweredOp};
use crate::circuit::{
    build_dag, decompose_to_native, parse_circuit, CircuitQubit, GateId, GateKind, QuantumCircuit,
};
use crate::decide::assign;
use crate::error::{MapError, Result};
use crate::hardware::HardwareSpec;
use crate::layers::{compute_layers, DEFAULT_LOOKAHEAD_DEPTH};
use crate::mapping::{MappingState, PhysQubit};
use crate::num::{real, Real};
use crate::program::{circuit_as_ops, GateOp, RoutedOp};
use crate::schedule::{compare, schedule, Metrics, ScheduledProgram};
use crate::shuttle_router::{route_shuttle_layer, Move, MoveChain};
use crate::swap_router::{route_gate_layer, GateRouteOutcome, LastUsedTracker};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    GateOnly,
    ShuttleOnly,
    Hybrid,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::GateOnly => "gate-only",
            Mode::ShuttleOnly => "shuttle-only",
            Mode::Hybrid => "hybrid",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = MapError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gate-only" => Ok(Mode::GateOnly),
            "shuttle-only" => Ok(Mode::ShuttleOnly),
            "hybrid" => Ok(Mode::Hybrid),
            other => Err(MapError::Config(format!(
                "unknown mode '{other}' (expected gate-only, shuttle-only or hybrid)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Kv,
    Table,
}

impl std::str::FromStr for ReportFormat {
    type Err = MapError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kv" => Ok(ReportFormat::Kv),
            "table" => Ok(ReportFormat::Table),
            other => Err(MapError::Config(format!(
                "unknown report format '{other}' (expected kv or table)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig<R: Real> {
    pub mode: Mode,
    /// Decision ratio alpha_g / alpha_s; `infinity` reproduces gate-only
    /// behaviour, `0` reproduces shuttle-only behaviour.
    pub alpha: R,
    pub lambda_t: R,
    pub w_l: R,
    pub w_t: R,
    pub window: usize,
    pub lookahead: usize,
    /// Reserved for randomized stress shuffling; all default tie-breaking
    /// is deterministic and ignores it.
    pub seed: u64,
    pub report_format: ReportFormat,
}

impl<R: Real> Default for RunConfig<R> {
    fn default() -> Self {
        RunConfig {
            mode: Mode::Hybrid,
            alpha: R::one(),
            lambda_t: R::zero(),
            w_l: real(0.1),
            w_t: real(0.1),
            window: 4,
            lookahead: DEFAULT_LOOKAHEAD_DEPTH,
            seed: 0,
            report_format: ReportFormat::Kv,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunResult<R: Real> {
    pub mapped: ScheduledProgram<R>,
    pub original: ScheduledProgram<R>,
    pub metrics: Metrics<R>,
    pub final_hosts: BTreeMap<CircuitQubit, PhysQubit>,
    pub routed: Vec<RoutedOp<R>>,
    pub chains: Vec<MoveChain>,
    pub swap_count: u64,
    pub move_count: u64,
    pub mode: Mode,
    pub alpha: R,
    pub program_text: String,
    pub report_text: String,
}

/// Runs the full pipeline on circuit source text.
pub fn run_source<R: Real>(
    source: &str,
    spec: &HardwareSpec<R>,
    config: &RunConfig<R>,
) -> Result<RunResult<R>> {
    let circuit = parse_circuit(source)?;
    run_circuit(&circuit, spec, config)
}

/// Runs the full pipeline on a parsed circuit.
pub fn run_circuit<R: Real>(
    circuit: &QuantumCircuit<R>,
    spec: &HardwareSpec<R>,
    config: &RunConfig<R>,
) -> Result<RunResult<R>> {
    let started = std::time::Instant::now();
    spec.validate()?;
    let native = decompose_to_native(circuit);
    let dag = build_dag(&native);
    let mut state = MappingState::initial(spec, native.n, native.n)?;
    let initial_sites = state.atom_sites().clone();
    let initial_hosts: BTreeMap<PhysQubit, CircuitQubit> = (0..native.n)
        .map(|i| (PhysQubit(i as u32), CircuitQubit(i as u32)))
        .collect();

    let (alpha_g, alpha_s) = match config.mode {
        Mode::GateOnly => (R::one(), R::zero()),
        Mode::ShuttleOnly => (R::zero(), R::one()),
        Mode::Hybrid => (config.alpha, R::one()),
    };

    let mut executed: BTreeSet<GateId> = BTreeSet::new();
    let mut routed: Vec<RoutedOp<R>> = Vec::new();
    let mut chains: Vec<MoveChain> = Vec::new();
    let mut tracker = LastUsedTracker::new();
    let mut recent: VecDeque<Move> = VecDeque::new();
    let mut forced_shuttle: BTreeSet<GateId> = BTreeSet::new();
    let mut swap_count = 0u64;

    loop {
        let layers = compute_layers(&dag, &executed, config.lookahead);
        if layers.is_done() {
            break;
        }

        // Commit everything that is executable right away.
        let ready: Vec<GateId> = layers
            .front
            .iter()
            .copied()
            .filter(|&g| state.executable(&native.gates[g]))
            .collect();
        if !ready.is_empty() {
            for g in ready {
                let node = &native.gates[g];
                routed.push(RoutedOp::Gate(GateOp::of_gate(&state, node)));
                executed.insert(g);
                if node.qubits.len() >= 2 {
                    let mut restricted: BTreeSet<PhysQubit> = BTreeSet::new();
                    for &q in &node.qubits {
                        let atom = state.host_of(q);
                        restricted.insert(atom);
                        restricted.extend(state.vicinity(atom, spec.r_restr)?);
                    }
                    tracker.note_restricted(restricted);
                }
            }
            forced_shuttle.clear();
            continue;
        }

        let assignment = assign(&state, &native, &layers, alpha_g, alpha_s, &forced_shuttle);

        if config.mode == Mode::GateOnly {
            // Without shuttling to fall back on, a livelocked gate simply
            // waits for the rest of the layer; a gate with no SWAP route
            // at all is fatal.
            if let Some(&stuck) = assignment
                .front_shuttle
                .iter()
                .find(|g| !forced_shuttle.contains(g))
            {
                return Err(MapError::Routing(format!(
                    "no SWAP route can realize the geometry of gate {stuck}"
                )));
            }
            if assignment.front_gate.is_empty() {
                return Err(MapError::Routing(
                    "every front gate livelocked in gate-only mode".into(),
                ));
            }
        }

        if !assignment.front_gate.is_empty() {
            let outcome = route_gate_layer(
                &mut state,
                &native,
                &assignment.front_gate,
                &assignment.look_gate,
                &mut tracker,
                config.lambda_t,
                config.w_l,
            )?;
            let swaps = match outcome {
                GateRouteOutcome::Routed { swaps } => swaps,
                GateRouteOutcome::AbortToShuttle { swaps, gate } => {
                    forced_shuttle.insert(gate);
                    swaps
                }
            };
            swap_count += swaps.len() as u64;
            routed.extend(
                swaps
                    .into_iter()
                    .map(|(a, b)| RoutedOp::Gate(GateOp::swap(a, b))),
            );
            continue;
        }

        // Shuttling round: only reached with an empty gate-routed front.
        debug_assert_ne!(config.mode, Mode::GateOnly);
        let pinned: BTreeSet<PhysQubit> = layers
            .front
            .iter()
            .flat_map(|&g| native.gates[g].qubits.iter())
            .map(|&q| state.host_of(q))
            .collect();
        let outcome = route_shuttle_layer(
            &mut state,
            &native,
            &assignment.front_shuttle,
            &assignment.look_shuttle,
            &pinned,
            config.w_l,
            config.w_t,
            &mut recent,
            config.window,
        )?;
        routed.extend(outcome.chain.moves.iter().map(|&m| RoutedOp::Move(m)));
        chains.push(outcome.chain);
    }

    let move_count = routed
        .iter()
        .filter(|op| matches!(op, RoutedOp::Move(_)))
        .count() as u64;

    let lowered = lower_program(&routed, &initial_sites, spec, config.window)?;
    let mapped = schedule(&lowered, &initial_sites, &initial_hosts, spec, true)?;

    let reference_ops: Vec<LoweredOp<R>> = circuit_as_ops(&native)
        .into_iter()
        .map(LoweredOp::Gate)
        .collect();
    let reference_sites: BTreeMap<PhysQubit, crate::hardware::Coordinate> = (0..native.n)
        .map(|i| (PhysQubit(i as u32), spec.site(i)))
        .collect();
    let original = schedule(&reference_ops, &reference_sites, &initial_hosts, spec, false)?;

    let mut metrics = compare(&original, &mapped, spec, native.n);
    metrics.runtime_s = started.elapsed().as_secs_f64();

    let final_hosts = state.qubit_map().clone();
    let program_text = render_program(&mapped);
    let report_text = render_report(&metrics, config.mode, config.alpha, config.report_format);

    Ok(RunResult {
        mapped,
        original,
        metrics,
        final_hosts,
        routed,
        chains,
        swap_count,
        move_count,
        mode: config.mode,
        alpha: config.alpha,
        program_text,
        report_text,
    })
}

/// Alpha-sweep for hybrid mode: runs once per ratio, keeps the smallest
/// fidelity decrease.
pub struct SweepResult<R: Real> {
    pub best: RunResult<R>,
    pub rows: Vec<(R, Metrics<R>)>,
    pub table_text: String,
}

pub fn sweep<R: Real>(
    circuit: &QuantumCircuit<R>,
    spec: &HardwareSpec<R>,
    config: &RunConfig<R>,
    alphas: &[R],
) -> Result<SweepResult<R>> {
    if alphas.is_empty() {
        return Err(MapError::Config("alpha sweep needs at least one value".into()));
    }
    let mut best: Option<RunResult<R>> = None;
    let mut rows = Vec::new();
    for &alpha in alphas {
        let mut cfg = config.clone();
        cfg.mode = Mode::Hybrid;
        cfg.alpha = alpha;
        let result = run_circuit(circuit, spec, &cfg)?;
        rows.push((alpha, result.metrics.clone()));
        let better = match &best {
            None => true,
            Some(b) => result.metrics.delta_f < b.metrics.delta_f,
        };
        if better {
            best = Some(result);
        }
    }
    let best = best.expect("at least one run");
    let table_text = render_sweep_table(&rows, best.alpha);
    Ok(SweepResult {
        best,
        rows,
        table_text,
    })
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

fn fmt_scalar<R: Real>(v: R, decimals: usize) -> String {
    format!("{:.*}", decimals, v.to_f64().unwrap_or(f64::NAN))
}

fn fmt_alpha<R: Real>(alpha: R) -> String {
    let a = alpha.to_f64().unwrap_or(f64::NAN);
    if a.is_infinite() {
        "inf".to_string()
    } else {
        format!("{a}")
    }
}

fn fmt_list<R: Real>(values: &[R]) -> String {
    let inner: Vec<String> = values.iter().map(|&v| fmt_scalar(v, 4)).collect();
    format!("[{}]", inner.join(","))
}

/// Line-oriented program text: gates and AOD operations with start times
/// in microseconds, ordered by start time (stream order on ties).
pub fn render_program<R: Real>(prog: &ScheduledProgram<R>) -> String {
    let mut indexed: Vec<(usize, &crate::schedule::ScheduledOp<R>)> =
        prog.ops.iter().enumerate().collect();
    indexed.sort_by(|(ia, a), (ib, b)| {
        a.start
            .partial_cmp(&b.start)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(ia.cmp(ib))
    });
    let mut out = String::new();
    for (_, sop) in indexed {
        let t = fmt_scalar(sop.start, 4);
        match &sop.op {
            LoweredOp::SwapMarker(..) => {}
            LoweredOp::Gate(g) => {
                let kind = match g.kind {
                    GateKind::U3 => {
                        let p = g.params.unwrap_or([R::zero(); 3]);
                        format!(
                            "U3({},{},{})",
                            fmt_scalar(p[0], 9),
                            fmt_scalar(p[1], 9),
                            fmt_scalar(p[2], 9)
                        )
                    }
                    other => other.name().to_string(),
                };
                let atoms: Vec<String> = g.atoms.iter().map(|a| a.0.to_string()).collect();
                let _ = writeln!(out, "GATE {kind} q=[{}] t={t}", atoms.join(","));
            }
            LoweredOp::Aod(aod) => match &aod.kind {
                AodOpKind::Activate { cols, rows, .. } => {
                    let _ = writeln!(
                        out,
                        "AOD_ACT cols={} rows={} t={t}",
                        fmt_list(cols),
                        fmt_list(rows)
                    );
                }
                AodOpKind::Shift { dx, dy, .. } => {
                    let _ = writeln!(
                        out,
                        "AOD_SHIFT dx={} dy={} t={t} dur={}",
                        fmt_scalar(*dx, 4),
                        fmt_scalar(*dy, 4),
                        fmt_scalar(sop.duration, 4)
                    );
                }
                AodOpKind::Deactivate { cols, rows } => {
                    let _ = writeln!(
                        out,
                        "AOD_DEACT cols={} rows={} t={t}",
                        fmt_list(cols),
                        fmt_list(rows)
                    );
                }
            },
        }
    }
    out
}

/// Metrics report. CPU runtime is intentionally absent so identical runs
/// produce byte-identical files; the CLI prints it separately.
pub fn render_report<R: Real>(
    metrics: &Metrics<R>,
    mode: Mode,
    alpha: R,
    format: ReportFormat,
) -> String {
    match format {
        ReportFormat::Kv => {
            let mut out = String::new();
            let _ = writeln!(out, "mode = {}", mode.name());
            let _ = writeln!(out, "alpha = {}", fmt_alpha(alpha));
            let _ = writeln!(out, "T_us = {}", fmt_scalar(metrics.total_time, 4));
            let _ = writeln!(out, "t_idle_us = {}", fmt_scalar(metrics.t_idle, 4));
            let _ = writeln!(out, "P = {:.12e}", metrics.p.to_f64().unwrap_or(f64::NAN));
            let _ = writeln!(out, "delta_F = {}", fmt_scalar(metrics.delta_f, 9));
            let _ = writeln!(out, "delta_CZ = {}", metrics.delta_cz);
            let _ = writeln!(out, "delta_T_us = {}", fmt_scalar(metrics.delta_t, 4));
            out
        }
        ReportFormat::Table => {
            let rows = [(
                mode.name().to_string(),
                metrics.delta_cz.to_string(),
                fmt_scalar(metrics.delta_t, 1),
                fmt_scalar(metrics.delta_f, 4),
                fmt_alpha(alpha),
            )];
            let mut out = String::new();
            let _ = writeln!(
                out,
                "{:<14}{:>10}{:>12}{:>12}{:>8}",
                "mode", "dCZ", "dT[us]", "dF", "alpha"
            );
            for (mode, dcz, dt, df, alpha) in rows {
                let _ = writeln!(out, "{mode:<14}{dcz:>10}{dt:>12}{df:>12}{alpha:>8}");
            }
            out
        }
    }
}

fn render_sweep_table<R: Real>(rows: &[(R, Metrics<R>)], best_alpha: R) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<10}{:>10}{:>12}{:>14}",
        "alpha", "dCZ", "dT[us]", "dF"
    );
    for (alpha, m) in rows {
        let _ = writeln!(
            out,
            "{:<10}{:>10}{:>12}{:>14}",
            fmt_alpha(*alpha),
            m.delta_cz,
            fmt_scalar(m.delta_t, 1),
            fmt_scalar(m.delta_f, 6)
        );
    }
    let _ = writeln!(out, "best = {}", fmt_alpha(best_alpha));
    out
}
