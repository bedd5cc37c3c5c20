//! Dense unitary simulator for small registers.
//!
//! This is the equivalence oracle used by the test suites: it knows nothing
//! about mapping or routing, it just multiplies gate matrices. Intended for
//! n <= 8 wires; memory grows as 4^n.

use num_complex::Complex64;

use crate::circuit::{GateKind, QuantumCircuit};
use crate::num::Real;

/// Column-major 2^n x 2^n matrix; wire k corresponds to bit k of the index.
#[derive(Debug, Clone)]
pub struct Unitary {
    n: usize,
    cols: Vec<Vec<Complex64>>,
}

impl Unitary {
    pub fn identity(n: usize) -> Self {
        let dim = 1usize << n;
        let mut cols = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for (j, col) in cols.iter_mut().enumerate() {
            col[j] = Complex64::new(1.0, 0.0);
        }
        Unitary { n, cols }
    }

    pub fn wires(&self) -> usize {
        self.n
    }

    /// Applies a gate to every column. `wires` uses the gate's qubit order
    /// (controls first, target last, matching the IR convention).
    pub fn apply(&mut self, kind: GateKind, wires: &[usize], params: Option<[f64; 3]>) {
        assert_eq!(kind.arity(), wires.len());
        assert!(wires.iter().all(|&w| w < self.n));
        for col in &mut self.cols {
            apply_to_state(col, kind, wires, params);
        }
    }

    pub fn of_circuit<R: Real>(c: &QuantumCircuit<R>) -> Unitary {
        let mut u = Unitary::identity(c.n);
        for g in &c.gates {
            let wires: Vec<usize> = g.qubits.iter().map(|q| q.0 as usize).collect();
            let params = g
                .params
                .map(|p| [to_f64(p[0]), to_f64(p[1]), to_f64(p[2])]);
            u.apply(g.kind, &wires, params);
        }
        u
    }

    /// Relabels output wires: bit q of each output index moves to bit
    /// `perm[q]`. Used to undo the final qubit-mapping permutation of a
    /// routed program before comparing against the source circuit.
    pub fn permute_output_wires(&self, perm: &[usize]) -> Unitary {
        assert_eq!(perm.len(), self.n);
        let dim = 1usize << self.n;
        let mut map = vec![0usize; dim];
        for (i, m) in map.iter_mut().enumerate() {
            let mut out = 0usize;
            for (q, &p) in perm.iter().enumerate() {
                out |= ((i >> q) & 1) << p;
            }
            *m = out;
        }
        let mut cols = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        for (j, col) in self.cols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                cols[j][map[i]] = v;
            }
        }
        Unitary { n: self.n, cols }
    }

    fn at(&self, row: usize, col: usize) -> Complex64 {
        self.cols[col][row]
    }
}

fn to_f64<R: Real>(x: R) -> f64 {
    x.to_f64().expect("scalar converts to f64")
}

fn apply_to_state(state: &mut [Complex64], kind: GateKind, wires: &[usize], params: Option<[f64; 3]>) {
    match kind {
        GateKind::H => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            apply_single(state, wires[0], [
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(s, 0.0),
                Complex64::new(-s, 0.0),
            ]);
        }
        GateKind::U3 => {
            let [theta, phi, lambda] = params.expect("u3 carries parameters");
            let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
            apply_single(state, wires[0], [
                Complex64::new(c, 0.0),
                -Complex64::from_polar(s, lambda),
                Complex64::from_polar(s, phi),
                Complex64::from_polar(c, phi + lambda),
            ]);
        }
        GateKind::Cz | GateKind::C2z | GateKind::C3z => {
            let mask = wire_mask(wires);
            for (i, amp) in state.iter_mut().enumerate() {
                if i & mask == mask {
                    *amp = -*amp;
                }
            }
        }
        GateKind::Cx | GateKind::C2x | GateKind::C3x => {
            let (target, controls) = wires.split_last().expect("controlled gate");
            let cmask = wire_mask(controls);
            let tbit = 1usize << *target;
            for i in 0..state.len() {
                if i & cmask == cmask && i & tbit == 0 {
                    state.swap(i, i | tbit);
                }
            }
        }
        GateKind::Swap => {
            let (a, b) = (1usize << wires[0], 1usize << wires[1]);
            for i in 0..state.len() {
                if i & a != 0 && i & b == 0 {
                    state.swap(i, (i & !a) | b);
                }
            }
        }
    }
}

fn wire_mask(wires: &[usize]) -> usize {
    wires.iter().fold(0usize, |m, &w| m | (1usize << w))
}

/// 2x2 matrix in row-major order [m00, m01, m10, m11].
fn apply_single(state: &mut [Complex64], wire: usize, m: [Complex64; 4]) {
    let bit = 1usize << wire;
    for i in 0..state.len() {
        if i & bit == 0 {
            let j = i | bit;
            let (a, b) = (state[i], state[j]);
            state[i] = m[0] * a + m[1] * b;
            state[j] = m[2] * a + m[3] * b;
        }
    }
}

/// Largest elementwise deviation between `a` and `b` after removing a
/// global phase (fixed at the element of largest magnitude in `a`).
pub fn max_deviation_up_to_phase(a: &Unitary, b: &Unitary) -> f64 {
    assert_eq!(a.n, b.n);
    let dim = 1usize << a.n;
    let mut best = (0usize, 0usize, 0.0f64);
    for j in 0..dim {
        for i in 0..dim {
            let mag = a.at(i, j).norm();
            if mag > best.2 {
                best = (i, j, mag);
            }
        }
    }
    let (bi, bj, _) = best;
    let denom = b.at(bi, bj);
    if denom.norm() < 1e-300 {
        return f64::INFINITY;
    }
    let phase = a.at(bi, bj) / denom;
    let phase = phase / Complex64::new(phase.norm(), 0.0);
    let mut dev: f64 = 0.0;
    for j in 0..dim {
        for i in 0..dim {
            dev = dev.max((a.at(i, j) - b.at(i, j) * phase).norm());
        }
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::parse_circuit;

    #[test]
    fn hadamard_squares_to_identity() {
        let mut u = Unitary::identity(1);
        u.apply(GateKind::H, &[0], None);
        u.apply(GateKind::H, &[0], None);
        assert!(max_deviation_up_to_phase(&Unitary::identity(1), &u) < 1e-12);
    }

    #[test]
    fn u3_of_zero_theta_is_diagonal_phase() {
        let mut u = Unitary::identity(1);
        u.apply(GateKind::U3, &[0], Some([0.0, 0.3, 0.4]));
        assert!(u.at(1, 0).norm() < 1e-15);
        assert!(u.at(0, 1).norm() < 1e-15);
        assert!((u.at(1, 1) - Complex64::from_polar(1.0, 0.7)).norm() < 1e-12);
    }

    #[test]
    fn cx_equals_h_cz_h() {
        let c1 = parse_circuit::<f64>("qreg q[2]; cx q[0],q[1];").unwrap();
        let c2 = parse_circuit::<f64>("qreg q[2]; h q[1]; cz q[0],q[1]; h q[1];").unwrap();
        let (u1, u2) = (Unitary::of_circuit(&c1), Unitary::of_circuit(&c2));
        assert!(max_deviation_up_to_phase(&u1, &u2) < 1e-12);
    }

    #[test]
    fn swap_gate_matches_wire_relabeling() {
        // SWAP(0,1) applied to U equals relabeling the output wires of U.
        let c = parse_circuit::<f64>("qreg q[2]; h q[0]; cz q[0],q[1]; u3(0.3,0.2,0.1) q[1];")
            .unwrap();
        let mut swapped = Unitary::of_circuit(&c);
        swapped.apply(GateKind::Swap, &[0, 1], None);
        let relabeled = Unitary::of_circuit(&c).permute_output_wires(&[1, 0]);
        assert!(max_deviation_up_to_phase(&swapped, &relabeled) < 1e-12);
    }

    #[test]
    fn global_phase_is_ignored() {
        let c = parse_circuit::<f64>("qreg q[1]; u3(0,0,pi) q[0];").unwrap();
        let a = Unitary::of_circuit(&c);
        // Same gate written with the phase split differently.
        let c2 = parse_circuit::<f64>("qreg q[1]; u3(0,pi/2,pi/2) q[0];").unwrap();
        let b = Unitary::of_circuit(&c2);
        assert!(max_deviation_up_to_phase(&a, &b) < 1e-12);
    }
}
