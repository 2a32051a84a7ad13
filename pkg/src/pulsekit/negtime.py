"""Synthesis of negative-time evolution exp(+i H0 tau) from identity blocks.

Any decoupling block B that approximates the identity and contains a free
segment of duration tau yields a negative-time implementation: rotate the
segments preceding that free to the end (a similarity transform, error
preserved) and drop the free itself, leaving B * exp(+i H0 tau) ~ exp(+i H0 tau).
Two recursive identity blocks are provided: symmetrized concatenated DD over a
unitary 1-design (ideal or DCG pulses) and symmetrized concatenated Eulerian DD.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import Operator, operator_norm
from .pulses import PulseSpec, reverse_pulse
from .schedule import Block, Free, Instant, Pulse, PulseSchedule, Segment

MAGNUS_GUARD = np.pi  # reject synthesis of Lambda * tau >= pi (divergent regime)
ONE_DESIGN_TOL = 1e-9


class NegativeTimeError(ValueError):
    pass


class MagnusGuardError(NegativeTimeError):
    """Requested negative duration outside the Magnus convergence radius."""


@dataclass(frozen=True)
class NegativeTimeBlock:
    mode: str  # 'oracle' | 'cddDcg' | 'symEulerian'
    inner_delay: float
    schedule: PulseSchedule
    pulse_count: int
    level: int = 0


def _guard(h0: Operator, tau: float):
    if operator_norm(h0) * abs(tau) >= MAGNUS_GUARD:
        raise MagnusGuardError(
            f"Lambda * tau = {operator_norm(h0) * abs(tau):.3f} >= pi; "
            "negative-time synthesis is outside the Magnus radius"
        )


def oracle_negative_block(tau: float) -> NegativeTimeBlock:
    """Directly available negative time: a single Free(-tau) segment."""
    sched = PulseSchedule((Free(-tau, "oracle-neg"),), oracle_negative=True)
    return NegativeTimeBlock("oracle", tau, sched, 0)


def check_one_design(frames: list[np.ndarray], dim: int, tol: float = ONE_DESIGN_TOL):
    """Average conjugation by the frames must kill every traceless operator."""
    n = int(round(np.log2(dim)))
    from .operators import pauli, pauli_matrix

    for site in range(n):
        for axis in "XYZ":
            op = pauli_matrix(pauli(n, {site: axis})).mat
            avg = sum(g.conj().T @ op @ g for g in frames) / len(frames)
            if operator_norm(avg) >= tol:
                raise NegativeTimeError(
                    "toggling frames do not form a unitary 1-design "
                    f"(residual on {axis}{site + 1})"
                )
    # single-site Paulis suffice only for product frames; spot-check pairs too
    rng = np.random.default_rng(7)
    for _ in range(4):
        h = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        h = 0.5 * (h + h.conj().T)
        h -= np.trace(h) / dim * np.eye(dim)
        avg = sum(g.conj().T @ h @ g for g in frames) / len(frames)
        if operator_norm(avg) >= tol * operator_norm(h) * 10:
            raise NegativeTimeError("toggling frames do not form a unitary 1-design")


def _symmetrized_level(forward: list[Segment], backward: list[Segment],
                       inner: PulseSchedule, label: str) -> PulseSchedule:
    """One recursion level: backward[j]+inner for j = l..1, then inner+forward[j]."""
    sub = Block(inner, label=f"{label}:inner")
    segs: list[Segment] = []
    for seg in reversed(backward):
        segs.append(seg)
        segs.append(sub)
    for seg in forward:
        segs.append(sub)
        segs.append(seg)
    return PulseSchedule(tuple(segs), label=label)


def cdd_identity_block(pulses: list[Operator], tau: float, level: int,
                       h0: Operator, pulse_impl=None,
                       check: bool = True) -> NegativeTimeBlock:
    """Symmetrized concatenated DD over a 1-design, ideal pulses by default.

    pulse_impl, when given, maps (slot index, daggered) to a Segment realizing
    the pulse (e.g. a DCG Block); otherwise ideal Instant gates are used.
    """
    if level < 1:
        raise NegativeTimeError("concatenation level must be >= 1")
    _guard(h0, tau)
    if check:
        frames = [np.eye(h0.dim, dtype=complex)]
        for p in pulses[:-1]:
            frames.append(p.mat @ frames[-1])
        check_one_design(frames, h0.dim)

    if pulse_impl is None:
        def pulse_impl(j, daggered):
            op = pulses[j]
            return Instant(Operator(op.mat.conj().T) if daggered else op,
                           label=f"P{j + 1}{'dag' if daggered else ''}")

    block = PulseSchedule((Free(tau, "inner"),))
    for k in range(1, level + 1):
        fwd = [pulse_impl(j, False) for j in range(len(pulses))]
        bwd = [pulse_impl(j, True) for j in range(len(pulses))]
        block = _symmetrized_level(fwd, bwd, block, label=f"cdd:k{k}")
    return NegativeTimeBlock("cddDcg", tau, block, block.pulse_count(), level)


def sym_eulerian_identity_block(cycles: list[list[PulseSpec]], tau: float,
                                h0: Operator) -> NegativeTimeBlock:
    """Symmetrized concatenated Eulerian DD; cycles[k-1] is the level-k EDD word."""
    if not cycles:
        raise NegativeTimeError("need at least one EDD cycle")
    _guard(h0, tau)
    block = PulseSchedule((Free(tau, "inner"),))
    for k, cycle in enumerate(cycles, start=1):
        fwd: list[Segment] = [Pulse(spec, label=f"edd:k{k}:{spec.label}") for spec in cycle]
        bwd: list[Segment] = [Pulse(reverse_pulse(spec), label=f"edd:k{k}:{spec.label}:rev")
                              for spec in cycle]
        block = _symmetrized_level(fwd, bwd, block, label=f"symEDD:k{k}")
    return NegativeTimeBlock("symEulerian", tau, block, block.pulse_count(), len(cycles))


def negative_time(block: NegativeTimeBlock) -> PulseSchedule:
    """Schedule approximating exp(+i H0 tau) with the identity block's accuracy.

    Oracle blocks pass through; synthesized blocks get their leading pulses
    rotated to the end and the first free segment (duration tau) removed.
    """
    if block.mode == "oracle":
        return block.schedule
    rest, dropped, lead = _peel_first_free(list(block.schedule.segments))
    if dropped is None:
        raise NegativeTimeError("identity block contains no free segment")
    if abs(dropped.duration - block.inner_delay) > 1e-12 * max(1.0, abs(block.inner_delay)):
        raise NegativeTimeError("first free segment does not match the inner delay")
    return PulseSchedule(tuple(rest + lead), label=f"neg:{block.schedule.label}")


def _peel_first_free(segments: list[Segment]):
    """Split [leading pulses, first Free, rest] -> (rest, the Free, leading pulses).

    Blocks are unpacked only as far as needed, so downstream simulation keeps
    the nested-block reuse for everything after the first free segment.
    """
    lead: list[Segment] = []
    for i, seg in enumerate(segments):
        if isinstance(seg, Free):
            return list(segments[i + 1:]), seg, lead
        if isinstance(seg, Block):
            rest, dropped, inner_lead = _peel_first_free(list(seg.schedule.segments))
            lead.extend(inner_lead)
            if dropped is not None:
                return rest + list(segments[i + 1:]), dropped, lead
        else:
            lead.append(seg)
    return [], None, lead
