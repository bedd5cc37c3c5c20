//! Circuit intermediate representation.
//!
//! Parses a QASM-2 subset (`qreg`, `u3`/`u`, `h`, `cx`, `cz`, `ccx`, `ccz`,
//! `cccx`, `cccz`), decomposes controlled-X forms to the native CZ family,
//! and builds a commutation-aware dependency DAG: two gates that share a
//! qubit get no precedence edge when both act diagonally on every shared
//! qubit, so they may be reordered freely by the mapper.

use std::collections::BTreeMap;

use crate::error::{MapError, Result};
use crate::num::{real, Real};

/// Logical qubit named in the input program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CircuitQubit(pub u32);

impl std::fmt::Display for CircuitQubit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "q{}", self.0)
    }
}

pub type GateId = usize;

/// Gate kinds understood by the IR. Controlled-X forms survive parsing and
/// are removed by [`decompose_to_native`]; `Swap` is only ever produced by
/// the router, never by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateKind {
    U3,
    H,
    Cz,
    C2z,
    C3z,
    Cx,
    C2x,
    C3x,
    Swap,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::U3 | GateKind::H => 1,
            GateKind::Cz | GateKind::Cx | GateKind::Swap => 2,
            GateKind::C2z | GateKind::C2x => 3,
            GateKind::C3z | GateKind::C3x => 4,
        }
    }

    pub fn is_native(self) -> bool {
        !matches!(self, GateKind::Cx | GateKind::C2x | GateKind::C3x | GateKind::Swap)
    }

    /// The Z-family gate of the same arity, used by the CX decomposition.
    fn z_equivalent(self) -> GateKind {
        match self {
            GateKind::Cx => GateKind::Cz,
            GateKind::C2x => GateKind::C2z,
            GateKind::C3x => GateKind::C3z,
            other => other,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::U3 => "U3",
            GateKind::H => "H",
            GateKind::Cz => "CZ",
            GateKind::C2z => "C2Z",
            GateKind::C3z => "C3Z",
            GateKind::Cx => "CX",
            GateKind::C2x => "C2X",
            GateKind::C3x => "C3X",
            GateKind::Swap => "SWAP",
        }
    }
}

/// One gate of the circuit. `params` is present only for `U3`
/// (theta, phi, lambda in radians).
#[derive(Debug, Clone, PartialEq)]
pub struct GateNode<R: Real> {
    pub id: GateId,
    pub kind: GateKind,
    pub qubits: Vec<CircuitQubit>,
    pub params: Option<[R; 3]>,
}

impl<R: Real> GateNode<R> {
    pub fn new(id: GateId, kind: GateKind, qubits: Vec<CircuitQubit>) -> Self {
        debug_assert_eq!(kind.arity(), qubits.len());
        GateNode {
            id,
            kind,
            qubits,
            params: None,
        }
    }

    /// Whether the gate acts diagonally (in the computational basis) on the
    /// given qubit. CZ-family gates are diagonal everywhere; a U3 counts as
    /// diagonal when theta vanishes (it is then a pure phase rotation);
    /// controlled-X forms are diagonal on their controls only.
    pub fn diagonal_on(&self, q: CircuitQubit) -> bool {
        match self.kind {
            GateKind::Cz | GateKind::C2z | GateKind::C3z => true,
            GateKind::H | GateKind::Swap => false,
            GateKind::U3 => {
                let theta = self.params.map(|p| p[0]).unwrap_or_else(R::zero);
                theta.abs() <= real(U3_DIAGONAL_TOL)
            }
            // Target is the last qubit by convention.
            GateKind::Cx | GateKind::C2x | GateKind::C3x => {
                self.qubits.last() != Some(&q)
            }
        }
    }
}

/// Tolerance (radians) under which a U3 theta is treated as zero.
pub const U3_DIAGONAL_TOL: f64 = 1e-9;

/// Parsed gate list over `n` circuit qubits, in source order.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCircuit<R: Real> {
    pub n: usize,
    pub gates: Vec<GateNode<R>>,
}

impl<R: Real> QuantumCircuit<R> {
    pub fn new(n: usize) -> Self {
        QuantumCircuit { n, gates: Vec::new() }
    }

    pub fn push(&mut self, kind: GateKind, qubits: Vec<CircuitQubit>, params: Option<[R; 3]>) {
        let id = self.gates.len();
        self.gates.push(GateNode {
            id,
            kind,
            qubits,
            params,
        });
    }

    pub fn is_native(&self) -> bool {
        self.gates.iter().all(|g| g.kind.is_native())
    }

    pub fn count_kind(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind == kind).count()
    }
}

/// True iff the two gates commute: either they share no qubit, or both act
/// diagonally on every shared qubit.
pub fn commutes<R: Real>(a: &GateNode<R>, b: &GateNode<R>) -> bool {
    a.qubits
        .iter()
        .filter(|q| b.qubits.contains(q))
        .all(|&q| a.diagonal_on(q) && b.diagonal_on(q))
}

/// Replaces every controlled-X gate with H(target), C_mZ, H(target).
/// Native circuits come back unchanged (up to gate re-numbering).
pub fn decompose_to_native<R: Real>(c: &QuantumCircuit<R>) -> QuantumCircuit<R> {
    let mut out = QuantumCircuit::new(c.n);
    for g in &c.gates {
        match g.kind {
            GateKind::Cx | GateKind::C2x | GateKind::C3x => {
                let target = *g.qubits.last().expect("controlled gate has a target");
                out.push(GateKind::H, vec![target], None);
                out.push(g.kind.z_equivalent(), g.qubits.clone(), None);
                out.push(GateKind::H, vec![target], None);
            }
            _ => out.push(g.kind, g.qubits.clone(), g.params),
        }
    }
    out
}

/// Precedence DAG over gate ids. Edges point from earlier to later gates;
/// transitively implied edges are omitted.
#[derive(Debug, Clone, Default)]
pub struct DependencyDag {
    pub preds: Vec<Vec<GateId>>,
    pub succs: Vec<Vec<GateId>>,
}

impl DependencyDag {
    pub fn len(&self) -> usize {
        self.preds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.preds.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.succs.iter().map(|s| s.len()).sum()
    }

    pub fn has_edge(&self, a: GateId, b: GateId) -> bool {
        self.succs[a].contains(&b)
    }
}

/// Builds the dependency DAG of a native circuit.
///
/// For each gate and each of its qubits we scan backwards through the
/// earlier gates on that qubit: every non-commuting predecessor gets an
/// edge, and the scan stops at the first predecessor that acts
/// non-diagonally on the qubit (anything before it is ordered through that
/// gate already).
pub fn build_dag<R: Real>(c: &QuantumCircuit<R>) -> DependencyDag {
    let mut preds: Vec<Vec<GateId>> = vec![Vec::new(); c.gates.len()];
    let mut succs: Vec<Vec<GateId>> = vec![Vec::new(); c.gates.len()];
    // Gate history per qubit, most recent last.
    let mut history: BTreeMap<CircuitQubit, Vec<GateId>> = BTreeMap::new();

    for g in &c.gates {
        for &q in &g.qubits {
            let seen = history.entry(q).or_default();
            for &earlier in seen.iter().rev() {
                let e = &c.gates[earlier];
                if !commutes(e, g) && !preds[g.id].contains(&earlier) {
                    preds[g.id].push(earlier);
                    succs[earlier].push(g.id);
                }
                if !e.diagonal_on(q) {
                    break;
                }
            }
            seen.push(g.id);
        }
    }
    for p in &mut preds {
        p.sort_unstable();
    }
    for s in &mut succs {
        s.sort_unstable();
    }
    DependencyDag { preds, succs }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

struct Statement {
    line: usize,
    text: String,
}

/// Splits source text into `;`-terminated statements, stripping `//`
/// comments and remembering the line each statement started on.
fn split_statements(text: &str) -> Vec<Statement> {
    let mut out = Vec::new();
    let mut buf = String::new();
    let mut start_line = 0usize;
    for (lineno, raw) in text.lines().enumerate() {
        let line = match raw.find("//") {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        for part in line.split_inclusive(';') {
            if buf.trim().is_empty() {
                start_line = lineno + 1;
            }
            if let Some(stripped) = part.strip_suffix(';') {
                buf.push_str(stripped);
                let text = buf.trim().to_string();
                if !text.is_empty() {
                    out.push(Statement {
                        line: start_line,
                        text,
                    });
                }
                buf.clear();
            } else {
                buf.push_str(part);
                buf.push(' ');
            }
        }
    }
    if !buf.trim().is_empty() {
        out.push(Statement {
            line: start_line,
            text: buf.trim().to_string(),
        });
    }
    out
}

fn gate_kind_of(name: &str) -> Option<GateKind> {
    match name {
        "u3" | "u" => Some(GateKind::U3),
        "h" => Some(GateKind::H),
        "cx" => Some(GateKind::Cx),
        "cz" => Some(GateKind::Cz),
        "ccx" => Some(GateKind::C2x),
        "ccz" => Some(GateKind::C2z),
        "cccx" => Some(GateKind::C3x),
        "cccz" => Some(GateKind::C3z),
        _ => None,
    }
}

/// Minimal arithmetic evaluator for gate parameters: numbers, `pi`,
/// unary minus, `+ - * /`, parentheses.
struct ExprParser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
}

impl<'a> ExprParser<'a> {
    fn eval(text: &'a str) -> Option<f64> {
        let mut p = ExprParser {
            chars: text.chars().peekable(),
        };
        let v = p.expr()?;
        p.skip_ws();
        if p.chars.peek().is_some() {
            return None;
        }
        Some(v)
    }

    fn skip_ws(&mut self) {
        while matches!(self.chars.peek(), Some(c) if c.is_whitespace()) {
            self.chars.next();
        }
    }

    fn expr(&mut self) -> Option<f64> {
        let mut v = self.term()?;
        loop {
            self.skip_ws();
            match self.chars.peek() {
                Some('+') => {
                    self.chars.next();
                    v += self.term()?;
                }
                Some('-') => {
                    self.chars.next();
                    v -= self.term()?;
                }
                _ => return Some(v),
            }
        }
    }

    fn term(&mut self) -> Option<f64> {
        let mut v = self.factor()?;
        loop {
            self.skip_ws();
            match self.chars.peek() {
                Some('*') => {
                    self.chars.next();
                    v *= self.factor()?;
                }
                Some('/') => {
                    self.chars.next();
                    let d = self.factor()?;
                    if d == 0.0 {
                        return None;
                    }
                    v /= d;
                }
                _ => return Some(v),
            }
        }
    }

    fn factor(&mut self) -> Option<f64> {
        self.skip_ws();
        match self.chars.peek()? {
            '-' => {
                self.chars.next();
                Some(-self.factor()?)
            }
            '(' => {
                self.chars.next();
                let v = self.expr()?;
                self.skip_ws();
                if self.chars.next() != Some(')') {
                    return None;
                }
                Some(v)
            }
            'p' | 'P' => {
                let name: String = std::iter::from_fn(|| {
                    self.chars
                        .next_if(|c| c.is_ascii_alphabetic())
                })
                .collect();
                if name.eq_ignore_ascii_case("pi") {
                    Some(std::f64::consts::PI)
                } else {
                    None
                }
            }
            c if c.is_ascii_digit() || *c == '.' => {
                let mut num = String::new();
                while let Some(c) = self
                    .chars
                    .next_if(|c| c.is_ascii_digit() || matches!(c, '.' | 'e' | 'E'))
                {
                    num.push(c);
                    if (c == 'e' || c == 'E')
                        && matches!(self.chars.peek(), Some('+') | Some('-'))
                    {
                        num.push(self.chars.next().unwrap());
                    }
                }
                num.parse().ok()
            }
            _ => None,
        }
    }
}

/// Parses a qubit reference `name[idx]` against the declared registers and
/// returns the flattened qubit id.
fn parse_qubit_ref(
    token: &str,
    regs: &BTreeMap<String, (u32, u32)>,
    line: usize,
) -> Result<CircuitQubit> {
    let token = token.trim();
    let open = token
        .find('[')
        .ok_or_else(|| MapError::parse(line, format!("expected qubit reference, got '{token}'")))?;
    if !token.ends_with(']') {
        return Err(MapError::parse(line, format!("malformed qubit reference '{token}'")));
    }
    let name = &token[..open];
    let idx: u32 = token[open + 1..token.len() - 1]
        .trim()
        .parse()
        .map_err(|_| MapError::parse(line, format!("malformed qubit index in '{token}'")))?;
    let &(offset, size) = regs
        .get(name)
        .ok_or_else(|| MapError::parse(line, format!("unknown register '{name}'")))?;
    if idx >= size {
        return Err(MapError::parse(
            line,
            format!("qubit index out of range: {name}[{idx}] (size {size})"),
        ));
    }
    Ok(CircuitQubit(offset + idx))
}

/// Parses a QASM-2 subset into a circuit. `OPENQASM` and `include`
/// statements are accepted and ignored; anything else outside the
/// supported gate set is an error.
pub fn parse_circuit<R: Real>(text: &str) -> Result<QuantumCircuit<R>> {
    let mut regs: BTreeMap<String, (u32, u32)> = BTreeMap::new();
    let mut next_offset: u32 = 0;
    let mut circuit: QuantumCircuit<R> = QuantumCircuit::new(0);

    for stmt in split_statements(text) {
        let line = stmt.line;
        let text = stmt.text.as_str();
        let head_end = text
            .find(|c: char| c.is_whitespace() || c == '(')
            .unwrap_or(text.len());
        let head = &text[..head_end];

        match head {
            "OPENQASM" | "include" => continue,
            "qreg" => {
                let rest = text[head_end..].trim();
                let open = rest
                    .find('[')
                    .ok_or_else(|| MapError::parse(line, "malformed qreg declaration"))?;
                if !rest.ends_with(']') {
                    return Err(MapError::parse(line, "malformed qreg declaration"));
                }
                let name = rest[..open].trim().to_string();
                let size: u32 = rest[open + 1..rest.len() - 1]
                    .trim()
                    .parse()
                    .map_err(|_| MapError::parse(line, "malformed qreg size"))?;
                if regs.contains_key(&name) {
                    return Err(MapError::parse(line, format!("register '{name}' redeclared")));
                }
                regs.insert(name, (next_offset, size));
                next_offset += size;
                circuit.n = next_offset as usize;
            }
            _ => {
                let kind = gate_kind_of(head).ok_or_else(|| {
                    MapError::parse(line, format!("unsupported gate '{head}'"))
                })?;
                let mut rest = &text[head_end..];
                let mut params = None;
                if kind == GateKind::U3 {
                    let rest_t = rest.trim_start();
                    let inner = rest_t
                        .strip_prefix('(')
                        .ok_or_else(|| MapError::parse(line, "u3 requires three parameters"))?;
                    let close = inner
                        .find(')')
                        .ok_or_else(|| MapError::parse(line, "unterminated parameter list"))?;
                    let values: Vec<f64> = inner[..close]
                        .split(',')
                        .map(|p| {
                            ExprParser::eval(p).ok_or_else(|| {
                                MapError::parse(line, format!("bad parameter expression '{}'", p.trim()))
                            })
                        })
                        .collect::<Result<_>>()?;
                    if values.len() != 3 {
                        return Err(MapError::parse(line, "u3 requires three parameters"));
                    }
                    params = Some([real(values[0]), real(values[1]), real(values[2])]);
                    rest = &inner[close + 1..];
                } else if rest.trim_start().starts_with('(') {
                    return Err(MapError::parse(line, format!("gate '{head}' takes no parameters")));
                }
                let qubits: Vec<CircuitQubit> = rest
                    .split(',')
                    .map(|tok| parse_qubit_ref(tok, &regs, line))
                    .collect::<Result<_>>()?;
                if qubits.len() != kind.arity() {
                    return Err(MapError::parse(
                        line,
                        format!(
                            "gate '{head}' expects {} qubits, got {}",
                            kind.arity(),
                            qubits.len()
                        ),
                    ));
                }
                for (i, a) in qubits.iter().enumerate() {
                    if qubits[i + 1..].contains(a) {
                        return Err(MapError::parse(line, format!("duplicate qubit {a} in gate")));
                    }
                }
                circuit.push(kind, qubits, params);
            }
        }
    }
    Ok(circuit)
}
