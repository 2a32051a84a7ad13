"""The two compilation pipelines.

Construction 1 reads an ideal-pulse first-order sequence as a first-order
Trotter formula for A_k = g_{k-1}^dag H0 g_{k-1} tau_k / T, promotes it to
order 2p, and compiles each second-order block back into a palindrome of 2l
pulse slots; slots are realized by a caller-supplied implementation (ideal,
naive finite-width, or DCG blocks).

Construction 2 reads a width-robust finite-width sequence as the auxiliary
first-order formula with interleaved width terms c g_k^dag Phi_(k+1) g_k / T,
and compiles every block using only stretched / reversed copies of the
original pulses (positive blocks) or the cyclic (l-1)-pulse products
(negative blocks).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .negtime import NegativeTimeBlock, negative_time, oracle_negative_block
from .operators import Operator, conjugate, operator_norm
from .pulses import PulseSpec, reverse_pulse, stretch_pulse
from .schedule import (
    Block,
    FirstOrderSequence,
    Free,
    Pulse,
    PulseSchedule,
    ResidualError,
    Segment,
    check_first_order,
    concat,
    residual_tolerance,
    toggling_frames,
    train_magnus_first,
)
from .trotter import TrotterPlan, suzuki_plan

SlotImpl = Callable[[int, bool], list[Segment]]  # (slot index, daggered) -> segments


@dataclass(frozen=True)
class TrotterExponents:
    """Hermitian exponent terms, time-ascending, with frame/source provenance."""

    terms: tuple[np.ndarray, ...]
    sources: tuple[str, ...]  # 'free' | 'width'
    horizon: float

    def total(self) -> np.ndarray:
        return sum(self.terms)

    def sum_residual(self, target: Operator) -> float:
        return operator_norm(self.total() - target.mat)


@dataclass
class CompiledSchedule:
    schedule: PulseSchedule
    plan: TrotterPlan
    sequence: FirstOrderSequence
    slot_count: int  # pulse slots before DCG / negative-time expansion
    neg_mode: str

    def pulse_count(self) -> int:
        return self.schedule.pulse_count()


class NegTimeRouter:
    """Realizes negative free segments per the configured mode, with reuse."""

    def __init__(self, mode: str = "oracle", builder=None):
        # builder: tau -> NegativeTimeBlock, required for synthesized modes
        self.mode = mode
        self.builder = builder
        self._cache: dict[float, Block] = {}

    def free_segments(self, duration: float, label: str) -> list[Segment]:
        if duration >= 0:
            return [Free(duration, label)]
        if self.mode == "oracle":
            return [Free(duration, label + ":oracle-neg")]
        tau = -duration
        if tau not in self._cache:
            block: NegativeTimeBlock = self.builder(tau)
            self._cache[tau] = Block(negative_time(block), label=f"negsynth:{tau:g}")
        return [self._cache[tau]]


def extract_exponents_c1(seq: FirstOrderSequence, check: bool = True,
                         tol: float | None = None) -> TrotterExponents:
    """A_k = g_(k-1)^dag H0 g_(k-1) tau_k / T; the ideal-pulse Trotter mapping."""
    if check:
        free_resid, _ = check_first_order(seq, include_width=False)
        limit = residual_tolerance(seq) if tol is None else tol
        if free_resid > limit:
            raise ResidualError(
                f"free-evolution condition violated: residual {free_resid:.3e} > {limit:.3e}"
            )
    frames = toggling_frames(seq)
    terms = tuple(conjugate(frames[k].mat, seq.h0.mat) * (tau / seq.horizon)
                  for k, tau in enumerate(seq.delays))
    return TrotterExponents(terms, ("free",) * len(terms), seq.horizon)


def extract_exponents_c2(seq: FirstOrderSequence, c: float, check: bool = True,
                         tol: float | None = None) -> TrotterExponents:
    """Interleaved free / width terms of the auxiliary formula, time-ascending.

    Order per slot: the free term g_k^dag H0 g_k tau_(k+1) / T, then the width
    term c g_k^dag Phi_(k+1)^(1) g_k / T.
    """
    for train in seq.trains:
        if len(train) != 1:
            raise ResidualError("Construction 2 requires single-pulse slots")
    if check:
        free_resid, width_resid = check_first_order(seq, include_width=True)
        limit = residual_tolerance(seq) if tol is None else tol
        if free_resid > limit:
            raise ResidualError(
                f"free-evolution condition violated: residual {free_resid:.3e} > {limit:.3e}"
            )
        if width_resid > limit:
            raise ResidualError(
                f"pulse-width condition violated: residual {width_resid:.3e} > {limit:.3e}"
            )
    frames = toggling_frames(seq)
    terms: list[np.ndarray] = []
    sources: list[str] = []
    for k, (tau, train) in enumerate(zip(seq.delays, seq.trains)):
        terms.append(conjugate(frames[k].mat, seq.h0.mat) * (tau / seq.horizon))
        sources.append("free")
        phi = train_magnus_first(train, seq.h0)
        terms.append(conjugate(frames[k].mat, phi) * (c / seq.horizon))
        sources.append("width")
    return TrotterExponents(tuple(terms), tuple(sources), seq.horizon)


def c1_block(seq: FirstOrderSequence, alpha: float, slot_impl: SlotImpl,
             neg: NegTimeRouter, tag: str) -> PulseSchedule:
    """One S_2(alpha T) block: mirrored slots then the original, delays halved."""
    l = len(seq)
    segs: list[Segment] = []
    for k in range(l, 0, -1):
        segs.extend(slot_impl(k - 1, True))
        segs.extend(neg.free_segments(alpha * seq.delays[k - 1] / 2, f"{tag}:free{k}m"))
    for k in range(1, l + 1):
        segs.extend(neg.free_segments(alpha * seq.delays[k - 1] / 2, f"{tag}:free{k}"))
        segs.extend(slot_impl(k - 1, False))
    return concat(segs, label=tag)


def compile_c1(seq: FirstOrderSequence, p: int, slot_impl: SlotImpl,
               neg: NegTimeRouter | None = None, check: bool = True) -> CompiledSchedule:
    """Construction 1: order-2p schedule of 2l * 5^(p-1) implemented pulse slots."""
    extract_exponents_c1(seq, check=check)
    plan = suzuki_plan(p)
    neg = neg or NegTimeRouter()
    parts = [Block(c1_block(seq, alpha, slot_impl, neg, f"b{j}"), label=f"b{j}:a={alpha:.6g}")
             for j, alpha in enumerate(plan.blocks)]
    sched = concat(parts, label=f"c1:p{p}:{seq.name}")
    return CompiledSchedule(sched, plan, seq, 2 * len(seq) * 5 ** (p - 1), neg.mode)


def instant_slot_impl(seq: FirstOrderSequence) -> SlotImpl:
    """Ideal instantaneous slots (the paper's ideal-pulse baseline)."""
    from .schedule import Instant

    pulses = seq.ideal_pulses()

    def impl(k: int, daggered: bool) -> list[Segment]:
        op = pulses[k]
        if daggered:
            op = Operator(op.mat.conj().T)
        return [Instant(op, label=f"P{k + 1}{'dag' if daggered else ''}")]

    return impl


def naive_slot_impl(seq: FirstOrderSequence) -> SlotImpl:
    """Naive finite-width slots: the raw component pulses (reversed for daggers)."""

    def impl(k: int, daggered: bool) -> list[Segment]:
        train = seq.trains[k]
        if daggered:
            return [Pulse(reverse_pulse(c), label=f"P{k + 1}dag:{c.label}")
                    for c in reversed(train)]
        return [Pulse(c, label=f"P{k + 1}:{c.label}") for c in train]

    return impl


def c2_block(seq: FirstOrderSequence, alpha: float, beta: float,
             neg: NegTimeRouter, tag: str, naive_negative: bool = False) -> PulseSchedule:
    """One Construction-2 S_2(alpha T) block built from the original pulses.

    alpha > 0 (or naive_negative): stretched pulses P_k(beta t_p) and their
    reversals.  alpha < 0: each pulse factor is the cyclic (l-1)-fold product
    of stretched (resp. reversed-stretched) original pulses.
    """
    if beta < 1.0 - 1e-9:
        raise ResidualError(f"stretch factor beta = {beta} < 1; c chosen too small")
    l = len(seq)
    specs = [train[0] for train in seq.trains]
    stretched = [stretch_pulse(s, beta) for s in specs]
    rev = [reverse_pulse(s) for s in stretched]

    def factor_mirror(k: int) -> list[Segment]:
        # e^(-+ i beta Phi_k) P_k^dag
        if alpha >= 0 or naive_negative:
            return [Pulse(rev[k], label=f"{tag}:P{k + 1}rev")]
        order = list(range(k + 1, l)) + list(range(0, k))
        return [Pulse(stretched[j], label=f"{tag}:inv{k + 1}:P{j + 1}") for j in order]

    def factor_forward(k: int) -> list[Segment]:
        # P_k e^(-+ i beta Phi_k)
        if alpha >= 0 or naive_negative:
            return [Pulse(stretched[k], label=f"{tag}:P{k + 1}")]
        order = list(range(k - 1, -1, -1)) + list(range(l - 1, k, -1))
        return [Pulse(rev[j], label=f"{tag}:inv{k + 1}:P{j + 1}rev") for j in order]

    segs: list[Segment] = []
    for k in range(l, 0, -1):
        segs.extend(factor_mirror(k - 1))
        segs.extend(neg.free_segments(alpha * seq.delays[k - 1] / 2, f"{tag}:free{k}m"))
    for k in range(1, l + 1):
        segs.extend(neg.free_segments(alpha * seq.delays[k - 1] / 2, f"{tag}:free{k}"))
        segs.extend(factor_forward(k - 1))
    return concat(segs, label=tag)


def compile_c2(seq: FirstOrderSequence, p: int, neg: NegTimeRouter | None = None,
               c: float | None = None, naive_negative: bool = False,
               check: bool = True) -> CompiledSchedule:
    """Construction 2: order-2p schedule from stretched/reversed original pulses."""
    plan = suzuki_plan(p)
    if c is None:
        c = plan.c_p
    extract_exponents_c2(seq, c, check=check)
    neg = neg or NegTimeRouter()
    parts = []
    for j, alpha in enumerate(plan.blocks):
        beta = 0.5 * c * abs(alpha)
        parts.append(Block(
            c2_block(seq, alpha, beta, neg, f"b{j}", naive_negative),
            label=f"b{j}:a={alpha:.6g}:beta={beta:.6g}",
        ))
    sched = concat(parts, label=f"c2:p{p}:{seq.name}")
    return CompiledSchedule(sched, plan, seq, 2 * len(seq) * 5 ** (p - 1), neg.mode)


def semi_ideal_c2_block(seq: FirstOrderSequence, alpha: float, beta: float) -> Operator:
    """Oracle for c2_block: exact factors P_k exp(-+ i beta Phi_k^(1)) and frees.

    Used by tests to check the compiled block against the auxiliary Trotter
    formula without finite-width approximation error.
    """
    from .operators import hermitian_expm
    from .pulses import ideal_action, magnus_first

    l = len(seq)
    specs = [train[0] for train in seq.trains]
    sign = 1.0 if alpha >= 0 else -1.0
    phis = [magnus_first(s, seq.h0).mat for s in specs]
    ideals = [ideal_action(s).mat for s in specs]
    u = np.eye(seq.h0.dim, dtype=complex)
    for k in range(l - 1, -1, -1):  # mirror half: e^(-+i b Phi) P^dag, then free
        u = hermitian_expm(Operator(phis[k], "hermitian"), sign * beta).mat \
            @ ideals[k].conj().T @ u
        u = hermitian_expm(seq.h0, alpha * seq.delays[k] / 2).mat @ u
    for k in range(l):
        u = hermitian_expm(seq.h0, alpha * seq.delays[k] / 2).mat @ u
        u = ideals[k] @ hermitian_expm(Operator(phis[k], "hermitian"), sign * beta).mat @ u
    return Operator(u)
