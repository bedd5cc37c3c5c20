#!/usr/bin/env python3
"""Regenerates the bundled benchmark circuits in benchmarks/.

The gate set is the mapper's input subset: u3/h/cx/cz/ccx/ccz/cccx/cccz.
Controlled-phase rotations are decomposed into cx + u3 so the standard
QFT/QPE constructions stay inside that subset.
"""

import math
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "benchmarks"


def fmt(x: float) -> str:
    return repr(float(x))


def cp(lam: float, c: int, t: int) -> list[str]:
    """Controlled-phase via 2 cx and 3 u3 rotations."""
    half = fmt(lam / 2)
    neg = fmt(-lam / 2)
    return [
        f"u3(0,0,{half}) q[{c}];",
        f"cx q[{c}],q[{t}];",
        f"u3(0,0,{neg}) q[{t}];",
        f"cx q[{c}],q[{t}];",
        f"u3(0,0,{half}) q[{t}];",
    ]


def header(n: int) -> list[str]:
    return ["OPENQASM 2.0;", f"qreg q[{n}];"]


def qft(n: int) -> list[str]:
    lines = header(n)
    for i in range(n):
        lines.append(f"h q[{i}];")
        for j in range(i + 1, n):
            lines += cp(math.pi / 2 ** (j - i), j, i)
    return lines


def qpe(n: int) -> list[str]:
    # n-1 counting qubits, one eigenstate qubit of a phase gate.
    counting = n - 1
    target = n - 1
    phase = 2 * math.pi * 0.3125
    lines = header(n)
    lines.append(f"u3({fmt(math.pi)},0,{fmt(math.pi)}) q[{target}];")  # X
    for k in range(counting):
        lines.append(f"h q[{k}];")
    for k in range(counting):
        lines += cp(phase * (2**k), k, target)
    # Inverse QFT on the counting register.
    for i in reversed(range(counting)):
        for j in reversed(range(i + 1, counting)):
            lines += cp(-math.pi / 2 ** (j - i), j, i)
        lines.append(f"h q[{i}];")
    return lines


def graph_state(n: int) -> list[str]:
    lines = header(n)
    for i in range(n):
        lines.append(f"h q[{i}];")
    for i in range(n):
        lines.append(f"cz q[{i}],q[{(i + 1) % n}];")
    for i in range(0, n, 4):
        lines.append(f"cz q[{i}],q[{(i + 5) % n}];")
    return lines


def rev10() -> list[str]:
    # Small reversible-logic block mixing Toffoli sizes.
    lines = header(10)
    lines += [
        "ccx q[0],q[1],q[2];",
        "ccx q[2],q[3],q[4];",
        "cccx q[1],q[3],q[5],q[6];",
        "cx q[4],q[7];",
        "ccx q[5],q[6],q[8];",
        "cccx q[0],q[2],q[4],q[9];",
        "cx q[8],q[3];",
        "ccx q[6],q[7],q[0];",
        "cccx q[2],q[5],q[8],q[1];",
        "cx q[9],q[5];",
        "ccx q[3],q[4],q[6];",
        "cx q[7],q[0];",
    ]
    return lines


def rev20() -> list[str]:
    # 20-qubit reversible-logic benchmark: adder-like carry chains plus
    # seeded long-range mixing, kept deterministic.
    rng = random.Random(7)
    lines = header(20)
    for block in range(4):
        base = block * 5
        for i in range(4):
            a, b, c = base + i, base + i + 1, (base + i + 7) % 20
            lines.append(f"ccx q[{a}],q[{b}],q[{c}];")
            lines.append(f"cx q[{c}],q[{a}];")
    for _ in range(30):
        kind = rng.choice(["cx", "cx", "ccx"])
        qubits = rng.sample(range(20), 2 if kind == "cx" else 3)
        args = ",".join(f"q[{q}]" for q in qubits)
        lines.append(f"{kind} {args};")
    for _ in range(4):
        qubits = rng.sample(range(20), 4)
        args = ",".join(f"q[{q}]" for q in qubits)
        lines.append(f"cccx {args};")
    return lines


def write(name: str, lines: list[str]) -> None:
    OUT.mkdir(exist_ok=True)
    path = OUT / name
    path.write_text("\n".join(lines) + "\n")
    gates = sum(1 for l in lines if not l.startswith(("OPENQASM", "qreg")))
    print(f"{name}: {gates} gates")


def main() -> None:
    write("qft_20.qasm", qft(20))
    write("qpe_20.qasm", qpe(20))
    write("graph_20.qasm", graph_state(20))
    write("rev_10.qasm", rev10())
    write("rev_20.qasm", rev20())


if __name__ == "__main__":
    main()
