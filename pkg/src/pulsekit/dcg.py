"""Eulerian dynamically corrected gates.

A decoupling group averages a declared error space to zero; an Eulerian cycle
on its Cayley graph turns that average into a pulse sequence that cancels the
generators' own pulse-width errors.  Augmenting the graph with balance-pair
self-loops and a stretched exit edge upgrades the identity block to a robust
implementation of a target gate; concatenation repeats the construction on
top of the previous level's blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    Operator,
    equal_up_to_phase,
    error_action,
    operator_norm,
)
from .pulses import PulseSpec, magnus_first, reverse_pulse, stretch_pulse
from .schedule import Block, Pulse, PulseSchedule, Simulator, concat

GROUP_CLOSURE_TOL = 1e-9
DECOUPLING_TOL = 1e-9
MEMBERSHIP_TOL = 1e-8  # relative to the projected operator's norm
NOISE_FLOOR = 5e-12  # absolute floor: matrix-log extraction noise on tiny residuals


class DCGError(ValueError):
    pass


@dataclass(frozen=True)
class DCGGenerator:
    """One generator of a decoupling group with its pulse-level implementation.

    impl is a schedule whose ideal action equals `unitary` (a single pulse at
    level 1, a lower-order DCG block inside a concatenation).
    """

    name: str
    unitary: np.ndarray
    impl: PulseSchedule

    @staticmethod
    def from_pulse(spec: PulseSpec) -> "DCGGenerator":
        from .pulses import ideal_action

        return DCGGenerator(
            spec.label or "h",
            ideal_action(spec).mat,
            PulseSchedule((Pulse(spec, label=spec.label),)),
        )


@dataclass
class DecouplingGroup:
    """Finite unitary group (up to phase) with generators and an error space."""

    elements: list[np.ndarray]
    generators: list[DCGGenerator]
    error_basis: list[np.ndarray] | None = None
    name: str = ""

    @property
    def size(self) -> int:
        return len(self.elements)

    def element_index(self, u: np.ndarray) -> int:
        for i, g in enumerate(self.elements):
            if equal_up_to_phase(g, u, GROUP_CLOSURE_TOL):
                return i
        raise DCGError("unitary not found in group (closure up to phase failed)")

    def decoupling_residual(self, op: np.ndarray) -> float:
        """|| sum_g g^dag E g ||, scaled by |G| * ||E||."""
        total = sum(g.conj().T @ op @ g for g in self.elements)
        scale = self.size * max(operator_norm(op), 1e-300)
        return operator_norm(total) / scale

    def check_decoupling(self, ops: list[np.ndarray] | None = None, tol: float = DECOUPLING_TOL):
        ops = ops if ops is not None else (self.error_basis or [])
        for op in ops:
            if operator_norm(op) < NOISE_FLOOR:
                continue  # numerically-extracted residual below the log noise floor
            r = self.decoupling_residual(op)
            if r >= tol and r * operator_norm(op) >= NOISE_FLOOR:
                raise DCGError(
                    f"group {self.name!r} fails the decoupling condition (residual {r:.2e})"
                )

    def membership_residual(self, op: np.ndarray) -> float:
        """Relative least-squares distance of op from span(error_basis)."""
        if self.error_basis is None:
            return 0.0
        a = np.stack([b.ravel() for b in self.error_basis], axis=1)
        v = op.ravel()
        coef, *_ = np.linalg.lstsq(a, v, rcond=None)
        resid = np.linalg.norm(v - a @ coef)
        return float(resid / max(np.linalg.norm(v), 1e-300))

    def check_membership(self, op: np.ndarray, what: str, tol: float = MEMBERSHIP_TOL):
        r = self.membership_residual(op)
        if r >= tol and r * operator_norm(op) >= NOISE_FLOOR:
            raise DCGError(
                f"{what} lies outside the declared error space of {self.name!r} "
                f"(relative residual {r:.2e})"
            )


def close_group(generators: list[DCGGenerator], error_basis=None, name: str = "",
                max_size: int = 4096) -> DecouplingGroup:
    """BFS closure of the generators up to global phase; identity is element 0."""
    dim = generators[0].unitary.shape[0]
    elements = [np.eye(dim, dtype=complex)]
    frontier = [0]
    while frontier:
        nxt = []
        for idx in frontier:
            for gen in generators:
                cand = elements[idx] @ gen.unitary
                if not any(equal_up_to_phase(e, cand, GROUP_CLOSURE_TOL) for e in elements):
                    elements.append(cand)
                    nxt.append(len(elements) - 1)
                    if len(elements) > max_size:
                        raise DCGError("group closure exceeded the size guard")
        frontier = nxt
    basis = None
    if error_basis is not None:
        basis = [b.mat if isinstance(b, Operator) else np.asarray(b, dtype=complex)
                 for b in error_basis]
    return DecouplingGroup(elements, list(generators), basis, name)


@dataclass(frozen=True)
class CayleyGraph:
    """Directed multigraph g -> g*h, one edge per (vertex, generator)."""

    n_vertices: int
    edges: tuple[tuple[int, int, int], ...]  # (from, generator index, to)

    def out_edges(self, v: int) -> list[int]:
        return [i for i, e in enumerate(self.edges) if e[0] == v]


def cayley_graph(group: DecouplingGroup) -> CayleyGraph:
    edges = []
    for v, g in enumerate(group.elements):
        for gi, gen in enumerate(group.generators):
            try:
                w = group.element_index(g @ gen.unitary)
            except DCGError:
                raise DCGError(
                    f"generators of {group.name!r} do not generate a closed group"
                )
            edges.append((v, gi, w))
    return CayleyGraph(len(group.elements), tuple(edges))


def eulerian_cycle(graph: CayleyGraph, start: int = 0) -> list[tuple[int, int, int]]:
    """Hierholzer with deterministic edge order (generators in declaration order).

    Returns the closed walk's edges in traversal order; every directed edge is
    used exactly once.
    """
    out: dict[int, list[tuple[int, int, int]]] = {v: [] for v in range(graph.n_vertices)}
    indeg = [0] * graph.n_vertices
    for e in graph.edges:
        out[e[0]].append(e)
        indeg[e[2]] += 1
    for v in range(graph.n_vertices):
        if len(out[v]) != indeg[v]:
            raise DCGError("graph is not balanced; no Eulerian cycle exists")
        out[v].reverse()  # pop() then yields declaration order

    path: list[tuple[int, int, int]] = []
    stack: list[tuple[int, tuple[int, int, int] | None]] = [(start, None)]
    while stack:
        v, via = stack[-1]
        if out[v]:
            e = out[v].pop()
            stack.append((e[2], e))
        else:
            stack.pop()
            if via is not None:
                path.append(via)
    path.reverse()
    if len(path) != len(graph.edges):
        raise DCGError("graph is disconnected; no Eulerian cycle exists")
    return path


@dataclass(frozen=True)
class DCGLevel:
    """One robustness order of a concatenated DCG."""

    order: int
    block: PulseSchedule
    dagger_block: PulseSchedule
    duration: float
    group_name: str
    walk: tuple[tuple[int, str], ...] = ()


@dataclass
class DCGSpec:
    """Per-target record of the concatenation stack and measured overheads."""

    target_label: str
    levels: list[DCGLevel] = field(default_factory=list)

    @property
    def order(self) -> int:
        return self.levels[-1].order if self.levels else 0

    @property
    def block(self) -> PulseSchedule:
        return self.levels[-1].block

    def durations(self) -> list[float]:
        return [lv.duration for lv in self.levels]

    def overhead_factors(self) -> list[float]:
        ds = self.durations()
        return [ds[i + 1] / ds[i] for i in range(len(ds) - 1)]


def _augmented_walk(group: DecouplingGroup, loop: PulseSchedule, exit_block: PulseSchedule,
                    edge_impl, label: str) -> tuple[PulseSchedule, tuple]:
    """Eulerian path on the augmented graph: self-loop at every non-identity
    vertex's first visit, exit edge from the identity at the end."""
    cycle = eulerian_cycle(cayley_graph(group))
    segs: list = []
    walk: list[tuple[int, str]] = []
    visited = {0}
    for v, gi, w in cycle:
        gen = group.generators[gi]
        segs.append(Block(edge_impl(gen), label=f"{label}:edge:{gen.name}"))
        walk.append((w, gen.name))
        if w not in visited:
            visited.add(w)
            segs.append(Block(loop, label=f"{label}:loop:v{w}"))
            walk.append((w, "loop"))
    if len(visited) != group.size:
        raise DCGError("Eulerian cycle failed to visit every group element")
    segs.append(Block(exit_block, label=f"{label}:exit"))
    walk.append((0, "exit"))
    return PulseSchedule(tuple(segs), label=label), tuple(walk)


def _first_order_block(target: PulseSpec, group: DecouplingGroup,
                       label: str) -> tuple[PulseSchedule, tuple]:
    """Augmented-graph walk for one target: loops I_W = W_rev W, exit W(2 t_p)."""
    loop = PulseSchedule(
        (Pulse(target, "balance:W"), Pulse(reverse_pulse(target), "balance:Wrev")),
        label=f"I_{target.label}",
    )
    exit_block = PulseSchedule((Pulse(stretch_pulse(target, 2.0), "exit:W(2tp)"),))
    return _augmented_walk(group, loop, exit_block, lambda g: g.impl, label)


def build_first_order_dcg(target: PulseSpec, group: DecouplingGroup, h0: Operator,
                          check: bool = True) -> DCGLevel:
    """First-order Eulerian DCG of a pulse and of its adjoint (reversed) pulse."""
    if check:
        phis = []
        for g in group.generators:
            head = g.impl.segments[0]
            if isinstance(head, Pulse):
                phis.append((f"generator {g.name}", magnus_first(head.spec, h0).mat))
        for spec, tag in ((target, "target"), (reverse_pulse(target), "reversed target")):
            phis.append((f"2 Phi^(1) of {tag} {target.label}",
                         2 * magnus_first(spec, h0).mat))
        group.check_decoupling([p for _, p in phis])
        for what, phi in phis:
            group.check_membership(phi, what)
    label = f"dcg1:{target.label}"
    block, walk = _first_order_block(target, group, label)
    dag_block, _ = _first_order_block(reverse_pulse(target), group, label + ":dag")
    return DCGLevel(1, block, dag_block, block.duration, group.name, walk)


def build_first_order_pair(target: PulseSpec, group: DecouplingGroup, h0: Operator,
                           check: bool = True) -> DCGSpec:
    level = build_first_order_dcg(target, group, h0, check)
    spec = DCGSpec(target.label or "W")
    spec.levels.append(level)
    return spec


def stretch_factor(q: int) -> float:
    """r_q = 2^(1/(q+1)), the balance-pair stretch at order q."""
    return 2.0 ** (1.0 / (q + 1))


def concatenate_dcg(base: DCGSpec, next_group: DecouplingGroup, h0: Operator,
                    check: bool = True, sim: Simulator | None = None) -> DCGSpec:
    """Raise the DCG order by one via the augmented Eulerian construction.

    next_group's generator impls must be order-q blocks themselves; the
    balance pair is I_W = Wdag(tau_q) W(r_q tau_q), W* = W Wdag W.
    """
    if not base.levels:
        raise DCGError("concatenate_dcg needs a first-order base")
    q = base.order
    prev = base.levels[-1]
    r_q = stretch_factor(q)

    if check:
        sim = sim or Simulator()
        zero = Operator(np.zeros((h0.dim, h0.dim), dtype=complex), "hermitian")
        for name, sched in [("W block", prev.block), ("Wdag block", prev.dagger_block)] + [
            (f"generator {g.name}", g.impl) for g in next_group.generators
        ]:
            ideal = sim.simulate(sched, zero).mat
            actual = sim.simulate(sched, h0).mat
            phi = error_action(ideal, actual)
            next_group.check_membership(phi, f"residual of {name}")
            next_group.check_decoupling([phi])

    loop = concat(
        [Block(prev.block.stretched(r_q), "balance:W(r_q tau)"),
         Block(prev.dagger_block, "balance:Wdag(tau)")],
        label=f"I_{base.target_label}^[{q}]",
    )
    exit_block = concat(
        [Block(prev.block, "star:W"), Block(prev.dagger_block, "star:Wdag"),
         Block(prev.block, "star:W")],
        label=f"{base.target_label}*^[{q}]",
    )
    label = f"dcg{q + 1}:{base.target_label}"
    block, walk = _augmented_walk(next_group, loop, exit_block, lambda g: g.impl, label)

    dag_loop = concat(
        [Block(prev.dagger_block.stretched(r_q), "balance:Wdag(r_q tau)"),
         Block(prev.block, "balance:W(tau)")],
        label=f"I_{base.target_label}dag^[{q}]",
    )
    dag_exit = concat(
        [Block(prev.dagger_block, "star:Wdag"), Block(prev.block, "star:W"),
         Block(prev.dagger_block, "star:Wdag")],
    )
    dag_block, _ = _augmented_walk(next_group, dag_loop, dag_exit, lambda g: g.impl,
                                   label + ":dag")

    out = DCGSpec(base.target_label, list(base.levels))
    out.levels.append(DCGLevel(q + 1, block, dag_block, block.duration,
                               next_group.name, walk))
    return out


def predicted_overhead(d: int, m: int, q: int) -> float:
    """Duration growth law for one concatenation step: d m + (d-1)(1 + r_q) + 3."""
    return d * m + (d - 1) * (1.0 + stretch_factor(q)) + 3.0


def max_pulse_stretch(sched: PulseSchedule) -> float:
    """Largest accumulated stretch among the schedule's pulses."""
    worst = 0.0
    for seg in sched.leaves():
        if isinstance(seg, Pulse):
            worst = max(worst, seg.spec.stretch)
    return worst
