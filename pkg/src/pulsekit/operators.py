"""Dense complex operator algebra on n-qubit Hilbert spaces.

Everything downstream (pulses, schedules, compilers) works with dense
2^n x 2^n matrices, n <= 12.  Exactness beats speed at these sizes, so
matrix exponentials go through a full Hermitian eigendecomposition and
norms through SVD.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
MAX_QUBITS = 12

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class OperatorError(ValueError):
    """Raised on role/shape violations of Operator values."""


@dataclass(frozen=True)
class Operator:
    """Immutable dense operator with a declared role.

    role is one of 'hermitian', 'unitary', 'general'; the corresponding
    invariant is checked at construction time.
    """

    mat: np.ndarray
    role: str = "general"
    _key: str = field(default="", compare=False, repr=False)

    def __post_init__(self):
        m = np.asarray(self.mat, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise OperatorError(f"operator must be square, got shape {m.shape}")
        m = np.ascontiguousarray(m)
        m.setflags(write=False)
        object.__setattr__(self, "mat", m)
        if self.role == "hermitian":
            if herm_defect(m) >= HERMITIAN_TOL:
                raise OperatorError("matrix is not Hermitian within tolerance")
        elif self.role == "unitary":
            if unitarity_defect(m) >= UNITARY_TOL:
                raise OperatorError("matrix is not unitary within tolerance")
        elif self.role != "general":
            raise OperatorError(f"unknown role {self.role!r}")

    @property
    def dim(self) -> int:
        return self.mat.shape[0]

    @property
    def key(self) -> str:
        """Content digest, used as a cache key by the simulator."""
        if not self._key:
            h = hashlib.sha1(self.mat.tobytes()).hexdigest()
            object.__setattr__(self, "_key", f"{self.dim}:{h}")
        return self._key

    def dagger(self) -> "Operator":
        return Operator(self.mat.conj().T, self.role)

    def __matmul__(self, other: "Operator") -> "Operator":
        return Operator(self.mat @ other.mat)


def herm_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0

def unitarity_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def hermitian(m: np.ndarray) -> Operator:
    return Operator(m, "hermitian")

def unitary(m: np.ndarray) -> Operator:
    return Operator(m, "unitary")

def identity(dim: int) -> Operator:
    return Operator(np.eye(dim, dtype=complex), "unitary")


@dataclass(frozen=True)
class PauliString:
    """A weighted tensor product of single-site Paulis.

    factors maps 0-based site index to an axis in {X, Y, Z}; an empty map
    denotes a scaled identity.
    """

    n: int
    factors: tuple[tuple[int, str], ...]
    coefficient: float = 1.0

    def __post_init__(self):
        if not 1 <= self.n <= MAX_QUBITS:
            raise OperatorError(f"qubit count {self.n} outside [1, {MAX_QUBITS}]")
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))
        seen = set()
        for site, axis in self.factors:
            if not 0 <= site < self.n:
                raise OperatorError(f"site {site} out of range for n={self.n}")
            if site in seen:
                raise OperatorError(f"duplicate site {site}")
            if axis not in ("X", "Y", "Z"):
                raise OperatorError(f"unknown Pauli axis {axis!r}")
            seen.add(site)

    @property
    def label(self) -> str:
        if not self.factors:
            return "I"
        return "".join(f"{axis}{site + 1}" for site, axis in self.factors)


def pauli(n: int, spec: dict[int, str] | str, coefficient: float = 1.0) -> PauliString:
    """Convenience constructor: pauli(3, {0: 'Z', 1: 'Z'}) or pauli(3, 'Z0 Z1')."""
    if isinstance(spec, str):
        factors = {}
        for token in spec.split():
            factors[int(token[1:])] = token[0]
        spec = factors
    return PauliString(n, tuple(spec.items()), coefficient)


def pauli_matrix(terms: list[PauliString] | PauliString) -> Operator:
    """Hermitian Operator equal to the sum of tensor-product matrices."""
    if isinstance(terms, PauliString):
        terms = [terms]
    if not terms:
        raise OperatorError("empty term list")
    n = terms[0].n
    if any(t.n != n for t in terms):
        raise OperatorError("all terms must share the same qubit count")
    total = np.zeros((2**n, 2**n), dtype=complex)
    for term in terms:
        axes = dict(term.factors)
        m = np.array([[term.coefficient]], dtype=complex)
        for site in range(n):
            m = np.kron(m, _PAULI[axes.get(site, "I")])
        total += m
    return Operator(total, "hermitian")


def hermitian_expm(h: Operator | np.ndarray, t: float) -> Operator:
    """exp(-i H t) via eigendecomposition; t may be negative."""
    m = h.mat if isinstance(h, Operator) else np.asarray(h, dtype=complex)
    if herm_defect(m) >= HERMITIAN_TOL * max(1.0, float(np.max(np.abs(m)))):
        raise OperatorError("hermitian_expm requires a Hermitian generator")
    evals, vecs = np.linalg.eigh(m)
    u = (vecs * np.exp(-1j * evals * t)) @ vecs.conj().T
    return Operator(u, "unitary")


def operator_norm(a: Operator | np.ndarray) -> float:
    """Largest singular value (operator norm)."""
    m = a.mat if isinstance(a, Operator) else np.asarray(a)
    if m.size == 0:
        return 0.0
    return float(np.linalg.norm(m, 2))


def infidelity(u: Operator | np.ndarray, v: Operator | np.ndarray) -> float:
    """1 - |Tr(U^dag V)| / dim; invariant under global phases of either argument."""
    mu = u.mat if isinstance(u, Operator) else np.asarray(u)
    mv = v.mat if isinstance(v, Operator) else np.asarray(v)
    if mu.shape != mv.shape:
        raise OperatorError(f"dimension mismatch: {mu.shape} vs {mv.shape}")
    overlap = abs(np.trace(mu.conj().T @ mv)) / mu.shape[0]
    return float(1.0 - overlap)


def phase_aligned_distance(u: np.ndarray, v: np.ndarray) -> float:
    """Operator-norm distance min over a global phase of v fixed by Tr(V^dag U)."""
    tr = np.trace(v.conj().T @ u)
    phase = tr / abs(tr) if abs(tr) > 1e-300 else 1.0
    return operator_norm(u - phase * v)


def equal_up_to_phase(u: np.ndarray, v: np.ndarray, tol: float = 1e-9) -> bool:
    """Unitary equality test |Tr(U^dag V)| = dim within tol (the group-element test)."""
    return abs(abs(np.vdot(u, v)) - u.shape[0]) < tol * u.shape[0]


def error_action(ideal: np.ndarray, actual: np.ndarray) -> np.ndarray:
    """Hermitian Phi with actual = ideal * exp(-i Phi) (principal branch)."""
    import scipy.linalg

    w = ideal.conj().T @ actual
    phi = 1j * scipy.linalg.logm(w)
    return 0.5 * (phi + phi.conj().T)


def conjugate(g: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Frame transform g^dag A g."""
    return g.conj().T @ a @ g


def random_hermitian(rng: np.random.Generator, dim: int) -> Operator:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return Operator(0.5 * (m + m.conj().T), "hermitian")


def random_unitary(rng: np.random.Generator, dim: int) -> Operator:
    m = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(m)
    q = q * (np.diagonal(r) / np.abs(np.diagonal(r)))
    return Operator(q, "unitary")
