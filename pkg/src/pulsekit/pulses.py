"""Finite-width control pulses and their first-order Magnus error generators.

A pulse is a Hermitian generator shaped by an envelope of total area theta.
Two transforms matter for everything downstream: time-stretching by c >= 1
(duration *c, amplitude /c, area preserved) and reversal (t -> -f(t_p - t)),
which implements the adjoint gate in the ideal limit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .operators import (
    HERMITIAN_TOL,
    Operator,
    OperatorError,
    hermitian_expm,
)

MAGNUS_NODES = 1001  # composite-Simpson default; windows are tiny and smooth

Envelope = tuple  # ('rect',) | ('sampled', ((t0, a0), (t1, a1), ...))
RECT: Envelope = ("rect",)


class PulseError(ValueError):
    pass


@dataclass(frozen=True)
class PulseSpec:
    """A shaped control pulse: generator, envelope, area, base width.

    width is the minimum (unstretched) duration t_p; the realized duration
    is stretch * width.  reversed=True realizes -f(t_p - t), the adjoint
    pulse in the ideal limit.
    """

    generator: Operator
    area: float
    width: float
    envelope: Envelope = RECT
    reversed: bool = False
    stretch: float = 1.0
    label: str = ""

    def __post_init__(self):
        if self.width <= 0:
            raise PulseError("pulse width must be positive")
        if self.stretch < 1.0 - 1e-12:
            raise PulseError(f"stretch {self.stretch} < 1 (t_p is the minimum duration)")
        if self.envelope[0] not in ("rect", "sampled"):
            raise PulseError(f"unknown envelope {self.envelope[0]!r}")
        if self.envelope[0] == "sampled":
            times = [t for t, _ in self.envelope[1]]
            if not times or times[0] != 0.0 or any(
                t2 <= t1 for t1, t2 in zip(times, times[1:])
            ) or times[-1] >= self.width:
                raise PulseError("sampled envelope needs strictly increasing times in [0, width)")

    @property
    def duration(self) -> float:
        return self.stretch * self.width

    @property
    def cache_key(self) -> tuple:
        return (self.generator.key, self.envelope, self.area, self.width,
                self.reversed, self.stretch)

    def segments(self) -> list[tuple[float, float]]:
        """Realized piecewise-constant profile as (duration, amplitude) pieces.

        Reversal and stretching are already applied; amplitudes multiply the
        generator directly.
        """
        if self.envelope[0] == "rect":
            base = [(self.width, self.area / self.width)]
        else:
            samples = list(self.envelope[1])
            times = [t for t, _ in samples] + [self.width]
            base = [(times[i + 1] - times[i], samples[i][1]) for i in range(len(samples))]
        if self.reversed:
            base = [(d, -a) for d, a in reversed(base)]
        c = self.stretch
        return [(d * c, a / c) for d, a in base]

    def signed_area(self) -> float:
        return sum(d * a for d, a in self.segments())


def stretch_pulse(p: PulseSpec, c: float) -> PulseSpec:
    """Stretch by c >= 1: duration *c, amplitude /c, area unchanged."""
    if c < 1.0 - 1e-12:
        raise PulseError(f"stretch factor {c} < 1")
    return replace(p, stretch=p.stretch * c)


def reverse_pulse(p: PulseSpec) -> PulseSpec:
    """Time-reverse with sign flip; implements the adjoint gate ideally."""
    return replace(p, reversed=not p.reversed)


def ideal_action(p: PulseSpec) -> Operator:
    """The H0 = 0 unitary: exp(-i * signed_area * generator)."""
    return hermitian_expm(p.generator, p.signed_area())


def pulse_propagator(p: PulseSpec, h0: Operator | np.ndarray) -> Operator:
    """Time-ordered exponential of H0 + f(t) * generator over the pulse window.

    Piecewise-constant envelopes make this an exact product of Hermitian
    exponentials, one per piece.
    """
    h0m = h0.mat if isinstance(h0, Operator) else np.asarray(h0, dtype=complex)
    g = p.generator.mat
    if h0m.shape != g.shape:
        raise OperatorError(f"dimension mismatch: H0 {h0m.shape} vs generator {g.shape}")
    u = np.eye(g.shape[0], dtype=complex)
    for dur, amp in p.segments():
        u = hermitian_expm(h0m + amp * g, dur).mat @ u
    return Operator(u, "unitary")


def _phase_grid(p: PulseSpec, nodes: int) -> tuple[np.ndarray, np.ndarray]:
    """times t_i on [0, duration] and accumulated control phase phi(t_i)."""
    segs = p.segments()
    bounds = np.concatenate([[0.0], np.cumsum([d for d, _ in segs])])
    total = bounds[-1]
    ts = np.linspace(0.0, total, nodes)
    phis = np.empty_like(ts)
    idx = np.clip(np.searchsorted(bounds, ts, side="right") - 1, 0, len(segs) - 1)
    phi_at_bound = np.concatenate([[0.0], np.cumsum([d * a for d, a in segs])])
    amps = np.array([a for _, a in segs])
    phis = phi_at_bound[idx] + amps[idx] * (ts - bounds[idx])
    return ts, phis


def magnus_first(p: PulseSpec, h0: Operator | np.ndarray, nodes: int = MAGNUS_NODES) -> Operator:
    """First Magnus term of the pulse error: integral of U_P^dag(t) H0 U_P(t) dt.

    Composite Simpson over `nodes` points (odd count enforced).  U_P(t) is the
    control-only propagator exp(-i phi(t) G), diagonalized once.
    """
    h0m = h0.mat if isinstance(h0, Operator) else np.asarray(h0, dtype=complex)
    g = p.generator.mat
    if h0m.shape != g.shape:
        raise OperatorError(f"dimension mismatch: H0 {h0m.shape} vs generator {g.shape}")
    if nodes < 3:
        raise PulseError("need at least 3 quadrature nodes")
    if nodes % 2 == 0:
        nodes += 1
    evals, vecs = np.linalg.eigh(g)
    h0_rot = vecs.conj().T @ h0m @ vecs
    ts, phis = _phase_grid(p, nodes)
    # integrand in the generator eigenbasis: H_jk * exp(i phi (l_j - l_k))
    delta = evals[:, None] - evals[None, :]
    weights = np.ones(nodes)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    weights *= (ts[-1] - ts[0]) / (nodes - 1) / 3.0
    phase_sum = np.tensordot(weights, np.exp(1j * np.multiply.outer(phis, delta)), axes=1)
    acc = h0_rot * phase_sum
    out = vecs @ acc @ vecs.conj().T
    out = 0.5 * (out + out.conj().T)
    return Operator(out, "hermitian")


def pi_over_2_pulse(generator: Operator, width: float, label: str = "") -> PulseSpec:
    """Convenience: a theta = pi/2 rectangular pulse (a 'pi pulse' per site)."""
    return PulseSpec(generator, np.pi / 2, width, RECT, label=label)
