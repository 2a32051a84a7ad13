"""Pulse schedules, toggling frames, first-order checks, and exact simulation.

A schedule is an ordered list of segments: free evolution under H0, a shaped
pulse, an instantaneous ideal gate, or a nested block (a sub-schedule that is
simulated once and reused, e.g. a DCG).  Simulation multiplies exact segment
propagators right-to-left in time order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    Operator,
    OperatorError,
    conjugate,
    equal_up_to_phase,
    hermitian_expm,
    infidelity,
    operator_norm,
)
from .pulses import PulseSpec, ideal_action, magnus_first, pulse_propagator

UNITARY_OUTPUT_TOL = 1e-9
CYCLICITY_TOL = 1e-10


class ScheduleError(ValueError):
    pass


class ResidualError(ValueError):
    """A first-order residual check failed."""


@dataclass(frozen=True)
class Free:
    duration: float
    label: str = ""


@dataclass(frozen=True)
class Pulse:
    spec: PulseSpec
    label: str = ""


@dataclass(frozen=True)
class Instant:
    """Idealized zero-width gate; used by instantaneous-pulse baselines."""

    op: Operator
    label: str = ""


@dataclass(frozen=True)
class Block:
    """Nested sub-schedule, simulated once and cached (DCGs, DD blocks)."""

    schedule: "PulseSchedule"
    label: str = ""


Segment = Free | Pulse | Instant | Block


@dataclass(frozen=True)
class PulseSchedule:
    """Ordered segments plus provenance; negative frees need the oracle flag."""

    segments: tuple[Segment, ...]
    oracle_negative: bool = False
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        if not self.oracle_negative:
            for seg in self.segments:
                if isinstance(seg, Free) and seg.duration < 0:
                    raise ScheduleError(
                        "negative free duration requires the oracle-negative-time flag"
                    )

    def leaves(self):
        """Depth-first leaf segments (Free / Pulse / Instant) in time order."""
        for seg in self.segments:
            if isinstance(seg, Block):
                yield from seg.schedule.leaves()
            else:
                yield seg

    @property
    def duration(self) -> float:
        total = 0.0
        for seg in self.leaves():
            if isinstance(seg, Free):
                total += seg.duration
            elif isinstance(seg, Pulse):
                total += seg.spec.duration
        return total

    def pulse_count(self) -> int:
        return sum(1 for seg in self.leaves() if isinstance(seg, (Pulse, Instant)))

    def stretched(self, r: float) -> "PulseSchedule":
        """Uniform time stretch of the whole control profile by r >= 1."""
        from .pulses import stretch_pulse

        out: list[Segment] = []
        for seg in self.segments:
            if isinstance(seg, Free):
                out.append(Free(seg.duration * r, seg.label))
            elif isinstance(seg, Pulse):
                out.append(Pulse(stretch_pulse(seg.spec, r), seg.label))
            elif isinstance(seg, Block):
                out.append(Block(seg.schedule.stretched(r), seg.label))
            else:
                out.append(seg)
        return PulseSchedule(tuple(out), self.oracle_negative, self.label)


def concat(parts: list[PulseSchedule | Segment], label: str = "") -> PulseSchedule:
    segs: list[Segment] = []
    oracle = False
    for part in parts:
        if isinstance(part, PulseSchedule):
            segs.extend(part.segments)
            oracle = oracle or part.oracle_negative
        else:
            segs.append(part)
            if isinstance(part, Free) and part.duration < 0:
                oracle = True
    return PulseSchedule(tuple(segs), oracle, label)


def _project_unitary(u: np.ndarray) -> np.ndarray:
    """Polar projection onto the unitary group; removes accumulated float drift.

    Long products (10^5 segments) pick up a unitarity defect ~ N * eps that
    would otherwise floor the infidelity metric near 1e-13.
    """
    v, _, wh = np.linalg.svd(u)
    return v @ wh


class Simulator:
    """Exact dense simulator with per-(segment, H0) propagator caches."""

    def __init__(self):
        self._free = {}
        self._pulse = {}
        self._ideal = {}
        self._block = {}
        self._eig = {}
        self._refs = []

    def _h0_eig(self, h0: Operator):
        if h0.key not in self._eig:
            self._eig[h0.key] = np.linalg.eigh(h0.mat)
        return self._eig[h0.key]

    def free_propagator(self, h0: Operator, t: float) -> np.ndarray:
        key = (h0.key, t)
        if key not in self._free:
            evals, vecs = self._h0_eig(h0)
            self._free[key] = (vecs * np.exp(-1j * evals * t)) @ vecs.conj().T
        return self._free[key]

    def pulse_propagator(self, spec: PulseSpec, h0: Operator) -> np.ndarray:
        key = (spec.cache_key, h0.key)
        if key not in self._pulse:
            self._pulse[key] = pulse_propagator(spec, h0).mat
        return self._pulse[key]

    def ideal_pulse(self, spec: PulseSpec) -> np.ndarray:
        key = spec.cache_key
        if key not in self._ideal:
            self._ideal[key] = ideal_action(spec).mat
        return self._ideal[key]

    def simulate(self, sched: PulseSchedule, h0: Operator,
                 instantaneous: bool = False) -> Operator:
        u = self._run(sched, h0, instantaneous)
        return Operator(_project_unitary(u), "general")

    def _run(self, sched: PulseSchedule, h0: Operator, instantaneous: bool) -> np.ndarray:
        u = np.eye(h0.dim, dtype=complex)
        for seg in sched.segments:
            if isinstance(seg, Free):
                if seg.duration == 0.0:
                    continue
                u = self.free_propagator(h0, seg.duration) @ u
            elif isinstance(seg, Pulse):
                if seg.spec.generator.dim != h0.dim:
                    raise OperatorError("pulse dimension incompatible with H0")
                m = (self.ideal_pulse(seg.spec) if instantaneous
                     else self.pulse_propagator(seg.spec, h0))
                u = m @ u
            elif isinstance(seg, Instant):
                if seg.op.dim != h0.dim:
                    raise OperatorError("instant gate dimension incompatible with H0")
                u = seg.op.mat @ u
            else:
                key = (id(seg.schedule), h0.key, instantaneous)
                if key not in self._block:
                    self._block[key] = _project_unitary(
                        self._run(seg.schedule, h0, instantaneous))
                    self._refs.append(seg.schedule)
                u = self._block[key] @ u
        return u


_DEFAULT_SIM = Simulator()


def simulate(sched: PulseSchedule, h0: Operator, instantaneous: bool = False,
             sim: Simulator | None = None) -> Operator:
    """Product of exact segment propagators, right-to-left in time order."""
    return (sim or _DEFAULT_SIM).simulate(sched, h0, instantaneous)


def simulation_error(sched: PulseSchedule, h0: Operator, target: Operator,
                     instantaneous: bool = False, sim: Simulator | None = None) -> float:
    """Infidelity of the simulated propagator against a target unitary."""
    return infidelity(simulate(sched, h0, instantaneous, sim), target)


@dataclass(frozen=True)
class FirstOrderSequence:
    """A first-order pulse sequence: l slots of (delay, pulse train).

    Each slot k applies free evolution for delays[k] and then the pulses of
    trains[k] back to back.  robust=True declares that the sequence is
    designed to cancel the leading pulse-width error (the width condition),
    which Construction 2 requires.
    """

    trains: tuple[tuple[PulseSpec, ...], ...]
    delays: tuple[float, ...]
    target: Operator
    horizon: float
    h0: Operator
    robust: bool = False
    name: str = ""

    def __post_init__(self):
        if len(self.trains) != len(self.delays):
            raise ScheduleError("need one delay per pulse slot")
        object.__setattr__(self, "trains", tuple(tuple(t) for t in self.trains))
        object.__setattr__(self, "delays", tuple(float(d) for d in self.delays))

    def __len__(self) -> int:
        return len(self.trains)

    def ideal_pulses(self) -> list[Operator]:
        """Ideal slot actions P_k (time-ordered component product)."""
        out = []
        for train in self.trains:
            u = np.eye(self.h0.dim, dtype=complex)
            for comp in train:
                u = ideal_action(comp).mat @ u
            out.append(Operator(u))
        return out

    def lam(self) -> float:
        return operator_norm(self.h0)


def toggling_frames(seq: FirstOrderSequence) -> list[Operator]:
    """g_0 = I, g_k = P_k ... P_1.  Cyclic sequences end at identity (up to phase)."""
    frames = [Operator(np.eye(seq.h0.dim, dtype=complex))]
    for p in seq.ideal_pulses():
        frames.append(Operator(p.mat @ frames[-1].mat))
    return frames


def assert_cyclic(seq: FirstOrderSequence, tol: float = CYCLICITY_TOL):
    g_l = toggling_frames(seq)[-1]
    if not equal_up_to_phase(g_l.mat, np.eye(seq.h0.dim), tol):
        raise ResidualError(f"sequence {seq.name!r} is not cyclic: g_l != I")


def train_magnus_first(train: tuple[PulseSpec, ...], h0: Operator) -> np.ndarray:
    """First Magnus error term of a back-to-back pulse train."""
    acc = np.zeros((h0.dim, h0.dim), dtype=complex)
    frame = np.eye(h0.dim, dtype=complex)
    for comp in train:
        acc += conjugate(frame, magnus_first(comp, h0).mat)
        frame = ideal_action(comp).mat @ frame
    return acc


def check_first_order(seq: FirstOrderSequence,
                      include_width: bool | None = None) -> tuple[float, float]:
    """Residuals of the two first-order conditions.

    freeResidual  = || sum_k g_k^dag H0 g_k tau_{k+1}  -  H_targ * T ||
    widthResidual = || sum_k g_k^dag Phi_{k+1}^(1) g_k ||   (finite-width input only)
    """
    assert_cyclic(seq)
    frames = toggling_frames(seq)
    free_sum = np.zeros((seq.h0.dim, seq.h0.dim), dtype=complex)
    for k, tau in enumerate(seq.delays):
        free_sum += conjugate(frames[k].mat, seq.h0.mat) * tau
    free_resid = operator_norm(free_sum - seq.target.mat * seq.horizon)

    if include_width is None:
        include_width = seq.robust
    width_resid = 0.0
    if include_width:
        width_sum = np.zeros((seq.h0.dim, seq.h0.dim), dtype=complex)
        for k, train in enumerate(seq.trains):
            width_sum += conjugate(frames[k].mat, train_magnus_first(train, seq.h0))
        width_resid = operator_norm(width_sum)
    return free_resid, width_resid


def residual_tolerance(seq: FirstOrderSequence, scale: float = 1e-8) -> float:
    """Default acceptance threshold for first-order residuals: scale * Lambda * T."""
    return scale * seq.lam() * abs(seq.horizon)


def raw_schedule(seq: FirstOrderSequence,
                 slot_impl=None,
                 oracle_negative: bool | None = None) -> PulseSchedule:
    """The sequence as a schedule: Free(tau_k) then slot k, for k = 1..l.

    slot_impl maps a slot index to a list of segments; default is the naive
    finite-width train.
    """
    segs: list[Segment] = []
    for k, (tau, train) in enumerate(zip(seq.delays, seq.trains)):
        segs.append(Free(tau, label=f"slot{k + 1}:free"))
        if slot_impl is not None:
            segs.extend(slot_impl(k))
        else:
            segs.extend(Pulse(c, label=f"slot{k + 1}:{c.label}") for c in train)
    if oracle_negative is None:
        oracle_negative = any(d < 0 for d in seq.delays)
    return PulseSchedule(tuple(segs), oracle_negative, label=seq.name)


def toggled_product(seq: FirstOrderSequence, sim: Simulator | None = None) -> Operator:
    """prod_k exp(-i g_k^dag H0 g_k tau_{k+1}): the frame-equivalence reference."""
    frames = toggling_frames(seq)
    u = np.eye(seq.h0.dim, dtype=complex)
    for k, tau in enumerate(seq.delays):
        h_toggled = conjugate(frames[k].mat, seq.h0.mat)
        u = hermitian_expm(0.5 * (h_toggled + h_toggled.conj().T), tau).mat @ u
    return Operator(u)
