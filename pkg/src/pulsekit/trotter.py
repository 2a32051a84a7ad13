"""Suzuki-Trotter coefficients to arbitrary even order, plus multi-product plans.

The order-2p formula expands recursively into 5^(p-1) second-order blocks with
coefficients alpha_j, each a product of p-1 factors from {u_k, 1-4u_k}.  The
compiler consumes the flat, time-ordered block list; c_p fixes the minimal
uniform width-scaling that keeps every stretched pulse at least t_p wide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import Operator, OperatorError, hermitian_expm, operator_norm

MAX_P = 5  # 5^4 = 625 blocks is already beyond desk scale
COEFF_TOL = 1e-12


class TrotterError(ValueError):
    pass


def u_coefficient(p: int) -> float:
    """u_p = (4 - 4^(1/(2p-1)))^(-1) for p >= 2."""
    return 1.0 / (4.0 - 4.0 ** (1.0 / (2 * p - 1)))


@dataclass(frozen=True)
class TrotterPlan:
    """Flat expansion of the order-2p recursion, in time order.

    blocks[j] is the coefficient alpha_j of the j-th second-order block;
    chains[j] records which recursion factor produced it, as (level, kind)
    pairs with kind 'u' or '1-4u'.
    """

    order: int
    blocks: tuple[float, ...]
    chains: tuple[tuple[tuple[int, str], ...], ...]
    u: tuple[float, ...]
    c_p: float
    max_stretch: float

    @property
    def p(self) -> int:
        return self.order // 2

    def signed_sum(self) -> float:
        return float(sum(self.blocks))

    def stretch_factors(self) -> list[float]:
        """beta_j = (c_p / 2) |alpha_j|, all >= 1 by the choice of c_p."""
        return [0.5 * self.c_p * abs(a) for a in self.blocks]


def suzuki_plan(p: int) -> TrotterPlan:
    """Expand S_{2p} into its 5^(p-1) alpha_j blocks with provenance."""
    if p < 1:
        raise TrotterError("p must be >= 1")
    if p > MAX_P:
        raise TrotterError(f"p = {p} exceeds the block-count guard (p <= {MAX_P})")
    us = tuple(u_coefficient(k) for k in range(2, p + 1))
    blocks = [(1.0, ())]
    for level in range(2, p + 1):
        u = u_coefficient(level)
        nxt = []
        for factor, kind in ((u, "u"), (u, "u"), (1 - 4 * u, "1-4u"),
                             (u, "u"), (u, "u")):
            for alpha, chain in blocks:
                nxt.append((alpha * factor, chain + ((level, kind),)))
        blocks = nxt
    c_p = 2.0
    for k in range(2, p + 1):
        c_p *= 4.0 - 4.0 ** (1.0 / (2 * k - 1))
    max_stretch = 4.0 ** sum(1.0 / (2 * r + 1) for r in range(1, p))
    return TrotterPlan(
        order=2 * p,
        blocks=tuple(a for a, _ in blocks),
        chains=tuple(c for _, c in blocks),
        u=us,
        c_p=c_p,
        max_stretch=max_stretch,
    )


def _as_mats(terms) -> list[np.ndarray]:
    mats = [t.mat if isinstance(t, Operator) else np.asarray(t, dtype=complex) for t in terms]
    if not mats:
        raise TrotterError("empty term list")
    dim = mats[0].shape[0]
    if any(m.shape != (dim, dim) for m in mats):
        raise OperatorError("terms must share one dimension")
    return mats


def trotter_matrix(terms, t: float, order: int) -> Operator:
    """The ideal product-formula unitary from exact exponentials.

    Time-order convention: S_1 applies A_1 first; S_2 applies A_d..A_1 then
    A_1..A_d, each at t/2; S_{2p} follows the recursion with sub-blocks at
    u_p t, u_p t, (1-4u_p) t, u_p t, u_p t in time order.
    """
    mats = _as_mats(terms)
    dim = mats[0].shape[0]

    def s1(tt: float) -> np.ndarray:
        u = np.eye(dim, dtype=complex)
        for m in mats:
            u = hermitian_expm(m, tt).mat @ u
        return u

    def s2(tt: float) -> np.ndarray:
        u = np.eye(dim, dtype=complex)
        for m in reversed(mats):
            u = hermitian_expm(m, tt / 2).mat @ u
        for m in mats:
            u = hermitian_expm(m, tt / 2).mat @ u
        return u

    def s2p(pp: int, tt: float) -> np.ndarray:
        if pp == 1:
            return s2(tt)
        u = u_coefficient(pp)
        outer = s2p(pp - 1, u * tt)
        inner = s2p(pp - 1, (1 - 4 * u) * tt)
        half = outer @ outer
        return half @ inner @ half

    if order == 1:
        return Operator(s1(t))
    if order < 1 or order % 2:
        raise TrotterError(f"order must be 1 or even, got {order}")
    p = order // 2
    if p > MAX_P:
        raise TrotterError(f"order {order} exceeds the guard (p <= {MAX_P})")
    return Operator(s2p(p, t))


def alpha_comm(terms, p: int) -> float:
    """Nested-commutator diagnostic: sum over (2p+1)-tuples of commutator norms."""
    mats = _as_mats(terms)
    depth = 2 * p + 1
    if len(mats) ** depth > 1e6:
        raise TrotterError("nested-commutator enumeration guard exceeded")
    if len(mats) == 1:
        return 0.0

    total = 0.0

    def descend(current: np.ndarray, level: int):
        nonlocal total
        if level == depth:
            total += operator_norm(current)
            return
        for m in mats:
            descend(m @ current - current @ m, level + 1)

    for m in mats:
        descend(m, 1)
    return total


@dataclass(frozen=True)
class MPFPlan:
    """Multi-product combination sum_j b_j [S_2(T/m_j)]^(m_j)."""

    m: tuple[int, ...]
    b: tuple[float, ...]

    def condition_residuals(self) -> tuple[float, float]:
        """(|sum b_j - 1|, max_r |sum b_j m_j^(-2r)|) for r = 1..p-1."""
        r0 = abs(sum(self.b) - 1.0)
        worst = 0.0
        for r in range(1, len(self.m)):
            worst = max(worst, abs(sum(bj / mj ** (2 * r) for bj, mj in zip(self.b, self.m))))
        return r0, worst


def mpf_coefficients(m: list[int]) -> MPFPlan:
    """Solve sum b_j = 1, sum b_j m_j^(-2r) = 0 (r = 1..p-1); Vandermonde in m_j^-2."""
    m = [int(v) for v in m]
    if len(set(m)) != len(m) or not m:
        raise TrotterError("m must be a non-empty list of distinct positive integers")
    if any(v < 1 for v in m):
        raise TrotterError("m entries must be positive")
    p = len(m)
    x = np.array([1.0 / (v * v) for v in m])
    a = np.vander(x, p, increasing=True).T  # row r: x^r
    rhs = np.zeros(p)
    rhs[0] = 1.0
    b = np.linalg.solve(a, rhs)
    return MPFPlan(tuple(m), tuple(float(v) for v in b))
