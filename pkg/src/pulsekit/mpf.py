"""Hybrid multi-product estimation of observables from second-order blocks.

Each branch [S_2(T/m_j)]^(m_j) is a robust second-order pulse sequence run on
its own; the expectation values are combined classically with the coefficients
b_j, cancelling the even error orders without any negative-time segment.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .compiler import NegTimeRouter, c1_block, c2_block, SlotImpl
from .operators import Operator, hermitian_expm, operator_norm
from .schedule import Block, FirstOrderSequence, Free, PulseSchedule, Simulator, concat
from .trotter import MPFPlan, TrotterError

RHO_TOL = 1e-10
OBS_TOL = 1e-10
PLAN_TOL = 1e-10


class MPFError(ValueError):
    pass


@dataclass
class MPFJob:
    """A hybrid MPF estimation task.

    branch_builder(m_j) must return the schedule of one [S_2(T/m_j)]^(m_j)
    branch; rho0 is a density matrix and the observable has norm <= 1.
    """

    plan: MPFPlan
    branch_builder: Callable[[int], PulseSchedule]
    rho0: Operator
    observable: Operator

    def validate(self):
        r0, rc = self.plan.condition_residuals()
        if max(r0, rc) >= PLAN_TOL:
            raise MPFError(f"MPF coefficient conditions violated (residuals {r0:.1e}, {rc:.1e})")
        rho = self.rho0.mat
        if abs(np.trace(rho) - 1.0) >= RHO_TOL:
            raise MPFError("rho0 must have unit trace")
        evals = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        if evals.min() < -RHO_TOL:
            raise MPFError("rho0 must be positive semidefinite")
        if operator_norm(self.observable) > 1.0 + OBS_TOL:
            raise MPFError("observable norm must be <= 1")


def expectation(observable: Operator, u: np.ndarray, rho0: Operator) -> float:
    return float(np.real(np.trace(observable.mat @ u @ rho0.mat @ u.conj().T)))


def mpf_estimate(job: MPFJob, h0: Operator, target: Operator, horizon: float,
                 sim: Simulator | None = None) -> tuple[float, float, float]:
    """(estimate, exact, |estimate - exact|) for Tr(O rho(T)).

    estimate = sum_j b_j Tr(O U_j rho0 U_j^dag) with U_j the simulated branch;
    exact uses the dense exponential of the target Hamiltonian.
    """
    job.validate()
    sim = sim or Simulator()
    estimate = 0.0
    for m_j, b_j in zip(job.plan.m, job.plan.b):
        sched = job.branch_builder(m_j)
        for seg in sched.leaves():
            if isinstance(seg, Free) and seg.duration < 0:
                raise MPFError("MPF branch contains a negative free segment")
        u_j = sim.simulate(sched, h0).mat
        estimate += b_j * expectation(job.observable, u_j, job.rho0)
    u_exact = hermitian_expm(target, horizon).mat
    exact = expectation(job.observable, u_exact, job.rho0)
    return estimate, exact, abs(estimate - exact)


def mpf_stretching_c2(plan: MPFPlan) -> dict[int, float]:
    """Per-branch stretch for Construction-2 blocks: c = 2 m_max, beta_j = m_max / m_j."""
    m_max = max(plan.m)
    return {m_j: m_max / m_j for m_j in plan.m}


def c1_branch_builder(seq: FirstOrderSequence, slot_impl: SlotImpl):
    """Branches from Construction 1: m_j repetitions of the S_2(T/m_j) block."""
    neg = NegTimeRouter("oracle")

    def build(m_j: int) -> PulseSchedule:
        block = c1_block(seq, 1.0 / m_j, slot_impl, neg, f"mpf:m{m_j}")
        return concat([Block(block, f"rep{r}") for r in range(m_j)],
                      label=f"mpf-c1:m{m_j}")

    return build


def c2_branch_builder(seq: FirstOrderSequence, plan: MPFPlan):
    """Branches from Construction 2 with the Proposition-3 stretch assignment."""
    betas = mpf_stretching_c2(plan)
    neg = NegTimeRouter("oracle")

    def build(m_j: int) -> PulseSchedule:
        block = c2_block(seq, 1.0 / m_j, betas[m_j], neg, f"mpf:m{m_j}")
        return concat([Block(block, f"rep{r}") for r in range(m_j)],
                      label=f"mpf-c2:m{m_j}")

    return build


def basis_density(n: int, bits: str) -> Operator:
    """|bits><bits| on n qubits, site 1 leftmost."""
    if len(bits) != n:
        raise TrotterError("bit string length must equal the qubit count")
    idx = int(bits, 2)
    rho = np.zeros((2**n, 2**n), dtype=complex)
    rho[idx, idx] = 1.0
    return Operator(rho)
