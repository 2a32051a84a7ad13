"""Built-in models, the three benchmark sequences, and their pulse realizations.

Site indices are 0-based internally; labels use the 1-based names of the
benchmark descriptions.  All control generators are 1-local Pauli sums (a
simultaneous pi pulse on two sites implements the two-site Pauli product up
to phase).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dcg import (
    DCGGenerator,
    DCGSpec,
    DecouplingGroup,
    build_first_order_dcg,
    build_first_order_pair,
    cayley_graph,
    close_group,
    concatenate_dcg,
    eulerian_cycle,
)
from .operators import Operator, pauli, pauli_matrix
from .pulses import PulseSpec, ideal_action, reverse_pulse
from .schedule import Block, FirstOrderSequence, Pulse, PulseSchedule, Segment, Simulator

DEFAULT_TP = 1e-4


@dataclass(frozen=True)
class ModelDef:
    """A native Hamiltonian, a target, and the coupling draw that built them."""

    name: str
    n: int
    j: float
    seed: int
    h0: Operator
    h_targ: Operator
    couplings: dict = field(default_factory=dict, hash=False, compare=False)


def ising_all2all(n: int = 3, j: float = 1.0, seed: int = 11) -> ModelDef:
    """Homogeneous all-to-all ZZ chain; target has random J_ij in [-1, 1]."""
    pairs = [(i, k) for i in range(n) for k in range(i + 1, n)]
    h0 = pauli_matrix([pauli(n, {i: "Z", k: "Z"}, j) for i, k in pairs])
    rng = np.random.default_rng(seed)
    coup = {pr: float(rng.uniform(-1.0, 1.0)) for pr in pairs}
    ht = pauli_matrix([pauli(n, {i: "Z", k: "Z"}, coup[(i, k)]) for i, k in pairs])
    return ModelDef("ising_all2all", n, j, seed, h0, ht, {"J": coup})


def cr_chain(n: int = 4, j: float = 1.0, seed: int = 0) -> ModelDef:
    """Cross-resonance chain X_i Z_(i+1); target is the homogeneous Heisenberg chain."""
    h0 = pauli_matrix([pauli(n, {i: "X", i + 1: "Z"}, j) for i in range(n - 1)])
    ht = pauli_matrix([pauli(n, {i: a, i + 1: a}, j)
                       for i in range(n - 1) for a in "XYZ"])
    return ModelDef("cr_chain", n, j, seed, h0, ht, {})


def heisenberg_chain(n: int = 4, j: float = 1.0, seed: int = 5) -> ModelDef:
    """Homogeneous Heisenberg chain; target couplings J_X, J_Y, J_Z in [0, J]."""
    bonds = [(i, i + 1) for i in range(n - 1)]
    h0 = pauli_matrix([pauli(n, {i: a, k: a}, j) for i, k in bonds for a in "XYZ"])
    rng = np.random.default_rng(seed)
    jx, jy, jz = (float(v) for v in rng.uniform(0.0, j, 3))
    ht = pauli_matrix([pauli(n, {i: a, k: a}, c)
                       for i, k in bonds for a, c in zip("XYZ", (jx, jy, jz))])
    return ModelDef("heisenberg_chain", n, j, seed, h0, ht,
                    {"JX": jx, "JY": jy, "JZ": jz})


def build_model(name: str, **kwargs) -> ModelDef:
    builders = {"ising_all2all": ising_all2all, "cr_chain": cr_chain,
                "heisenberg_chain": heisenberg_chain}
    if name not in builders:
        raise ValueError(f"unknown model {name!r}")
    return builders[name](**kwargs)


def _gen(model_n: int, axis: str, sites: list[int]) -> Operator:
    return pauli_matrix([pauli(model_n, {s: axis}) for s in sites])


def _pulse(model_n: int, axis: str, sites: list[int], area: float, tp: float,
           label: str) -> PulseSpec:
    return PulseSpec(_gen(model_n, axis, sites), area, tp, label=label)


def even_sites(n: int) -> list[int]:
    """1-based even sites, 0-based indices."""
    return [s for s in range(n) if (s + 1) % 2 == 0]


# ---------------------------------------------------------------------------
# Benchmark sequences
# ---------------------------------------------------------------------------

def sequence_va(model: ModelDef, horizon: float, tp: float = DEFAULT_TP) -> FirstOrderSequence:
    """All-to-all Ising engineering: {X1X2, X2X3, X1X2, X2X3} with signed delays.

    The toggled ZZ terms all commute, so the instantaneous sequence realizes
    the target exactly; negative delays are realizable by refocusing and are
    kept as oracle segments.
    """
    if model.name != "ising_all2all" or model.n != 3:
        raise ValueError("the VA sequence is defined for the n=3 all-to-all Ising model")
    coup = model.couplings["J"]
    j12, j13, j23 = coup[(0, 1)], coup[(0, 2)], coup[(1, 2)]
    x12 = _pulse(model.n, "X", [0, 1], np.pi / 2, tp, "X1X2")
    x23 = _pulse(model.n, "X", [1, 2], np.pi / 2, tp, "X2X3")
    delays = (-horizon / (2 * model.j)) * np.array(
        [0.0, j23 + j13, j12 + j23, j12 + j13])
    return FirstOrderSequence(
        trains=tuple((s,) for s in (x12, x23, x12, x23)),
        delays=tuple(delays),
        target=model.h_targ, horizon=horizon, h0=model.h0, robust=False, name="va")


def cr_component_pulses(n: int, tp: float) -> dict[str, PulseSpec]:
    """The four collective-rotation components of the CR sequence."""
    sites = list(range(n))
    ev = even_sites(n)
    return {
        "WZfull": _pulse(n, "Z", sites, np.pi / 4, tp, "WZfull"),
        "WYfull": _pulse(n, "Y", sites, np.pi / 4, tp, "WYfull"),
        "WZeven": _pulse(n, "Z", ev, np.pi / 2, tp, "WZeven"),
        "WYeven": _pulse(n, "Y", ev, np.pi / 4, tp, "WYeven"),
    }


def sequence_vb(model: ModelDef, horizon: float, tp: float = DEFAULT_TP) -> FirstOrderSequence:
    """Heisenberg from cross-resonance: four composite pulses, delays T * {0,1,1,1}.

    Components: R_E = (pi/4 Y-rotation (pi/4 Z-rotation)) on every site;
    H_even = (pi/4 Y)(pi/2 Z) on even sites; composite slots per the benchmark.
    """
    if model.name != "cr_chain":
        raise ValueError("the VB sequence is defined for the CR chain model")
    c = cr_component_pulses(model.n, tp)
    h_even = (c["WZeven"], c["WYeven"])
    re_dag = (reverse_pulse(c["WYfull"]), reverse_pulse(c["WZfull"]))
    re_fwd = (c["WZfull"], c["WYfull"])
    trains = (
        re_dag + h_even,
        h_even + re_fwd + re_fwd + h_even,
        h_even + re_dag + h_even,
        h_even,
    )
    return FirstOrderSequence(
        trains=trains, delays=(0.0, horizon, horizon, horizon),
        target=model.h_targ, horizon=horizon, h0=model.h0, robust=False, name="vb")


def sequence_vc(model: ModelDef, horizon: float, tp: float = DEFAULT_TP) -> FirstOrderSequence:
    """Anisotropic Heisenberg from homogeneous: the width-robust 8-pulse cycle."""
    if model.name != "heisenberg_chain":
        raise ValueError("the VC sequence is defined for the Heisenberg chain model")
    ev = even_sites(model.n)
    xb = _pulse(model.n, "X", ev, np.pi / 2, tp, "Xbar")
    yb = _pulse(model.n, "Y", ev, np.pi / 2, tp, "Ybar")
    jx, jy, jz = model.couplings["JX"], model.couplings["JY"], model.couplings["JZ"]
    js = jx + jy + jz
    delays = (horizon / (4 * model.j)) * np.array([js, jx, jz, jy, js, jy, jz, jx])
    return FirstOrderSequence(
        trains=tuple((s,) for s in (xb, yb, xb, yb, yb, xb, yb, xb)),
        delays=tuple(delays),
        target=model.h_targ, horizon=horizon, h0=model.h0, robust=True, name="vc")


def builtin_sequence(model: ModelDef, which: str, horizon: float,
                     tp: float = DEFAULT_TP) -> FirstOrderSequence:
    builders = {"va": sequence_va, "vb": sequence_vb, "vc": sequence_vc}
    if which not in builders:
        raise ValueError(f"unknown sequence {which!r} (expected va, vb, or vc)")
    return builders[which](model, horizon, tp)


# ---------------------------------------------------------------------------
# DCG recipes (decoupling groups per component, per the benchmark choices)
# ---------------------------------------------------------------------------

_PAULI_PAIRS = [(p, q) for p in "IXYZ" for q in "IXYZ" if (p, q) != ("I", "I")]


def _strings(n: int, specs: list[str]) -> list[Operator]:
    return [pauli_matrix(pauli(n, s)) for s in specs]


def _pair_group(n: int, axis: str, a: int, b: int, tp: float,
                basis: list[Operator] | None, name: str) -> DecouplingGroup:
    gens = [DCGGenerator.from_pulse(_pulse(n, axis, [s], np.pi / 2, tp, f"{axis}{s + 1}"))
            for s in (a, b)]
    return close_group(gens, basis, name)


def _su4_times_spectator_z(n: int, a: int, b: int) -> list[Operator]:
    """Hermitian basis of su(4)_(ab) tensor span{I, Z} on each spectator."""
    spectators = [s for s in range(n) if s not in (a, b)]
    out = []
    for p, q in _PAULI_PAIRS:
        fac = {}
        if p != "I":
            fac[a] = p
        if q != "I":
            fac[b] = q
        out.append(pauli_matrix(pauli(n, dict(fac))))
        for c in spectators:
            fac2 = dict(fac)
            fac2[c] = "Z"
            out.append(pauli_matrix(pauli(n, fac2)))
    return out


class DCGLibrary:
    """Builds and caches DCG blocks for a model's pulse components.

    Subclasses define group_for(spec) and, where supported, a second-order
    recipe; segments(spec, q) returns the schedule segments realizing the
    component at robustness order q (0 = bare pulse).
    """

    def __init__(self, model: ModelDef, tp: float):
        self.model = model
        self.tp = tp
        self.sim = Simulator()
        self._cache: dict = {}

    def group_for(self, spec: PulseSpec) -> DecouplingGroup:
        raise NotImplementedError

    def first_order(self, spec: PulseSpec) -> DCGSpec:
        base = reverse_pulse(spec) if spec.reversed else spec
        key = ("dcg1", base.cache_key)
        if key not in self._cache:
            self._cache[key] = build_first_order_pair(
                base, self.group_for(base), self.model.h0)
        return self._cache[key]

    def second_order(self, spec: PulseSpec) -> DCGSpec:
        raise NotImplementedError(f"no second-order recipe for {self.model.name}")

    def segments(self, spec: PulseSpec, q: int) -> list[Segment]:
        if q == 0:
            return [Pulse(spec, label=f"naive:{spec.label}")]
        dcg = self.first_order(spec) if q == 1 else self.second_order(spec)
        block = dcg.levels[-1].dagger_block if spec.reversed else dcg.levels[-1].block
        return [Block(block, label=f"dcg{q}:{spec.label}{'.rev' if spec.reversed else ''}")]

    def slot_impl(self, seq: FirstOrderSequence, q: int):
        """Slot realization for compile_c1: components in order, reversed for daggers."""

        def impl(k: int, daggered: bool) -> list[Segment]:
            train = seq.trains[k]
            comps = [reverse_pulse(cmp) for cmp in reversed(train)] if daggered \
                else list(train)
            segs: list[Segment] = []
            for cmp in comps:
                segs.extend(self.segments(cmp, q))
            return segs

        return impl


class IsingDCGLibrary(DCGLibrary):
    """Ising recipes: one X-pair group for first order (the benchmark's choice),
    per-pair two-qubit Pauli groups for the second-order concatenation."""

    FIRST_ORDER_BASIS = ["Z0 Z1", "Z0 Y1", "Y0 Z1", "Y0 Y1", "Z0 Z2", "Y0 Z2",
                         "Z0 Y2", "Z1 Z2", "Y1 Z2", "Z1 Y2", "Y1 Y2"]

    def __init__(self, model: ModelDef, tp: float):
        if model.name != "ising_all2all" or model.n != 3:
            raise ValueError("Ising DCG recipes are defined for the n=3 model")
        super().__init__(model, tp)

    def group_for(self, spec: PulseSpec) -> DecouplingGroup:
        key = ("grp1",)
        if key not in self._cache:
            basis = _strings(self.model.n, self.FIRST_ORDER_BASIS)
            self._cache[key] = _pair_group(self.model.n, "X", 0, 1, self.tp,
                                           basis, "ising-x12")
        return self._cache[key]

    def _active_pair(self, spec: PulseSpec) -> tuple[int, int]:
        return (1, 2) if spec.label == "X2X3" else (0, 1)

    def second_order(self, spec: PulseSpec) -> DCGSpec:
        key = ("dcg2", spec.cache_key)
        if key in self._cache:
            return self._cache[key]
        n, h0, tp = self.model.n, self.model.h0, self.tp
        a, b = self._active_pair(spec)
        xg = _pair_group(n, "X", a, b, tp, None, f"x{a}{b}")
        yg = _pair_group(n, "Y", a, b, tp, None, f"y{a}{b}")
        base = build_first_order_pair(spec, xg, h0)
        gens2 = []
        for axis, site in (("X", a), ("Y", a), ("X", b), ("Y", b)):
            sp = _pulse(n, axis, [site], np.pi / 2, tp, f"{axis}{site + 1}")
            lv = build_first_order_dcg(sp, xg if axis == "X" else yg, h0)
            gens2.append(DCGGenerator(sp.label, ideal_action(sp).mat, lv.block))
        grp2 = close_group(gens2, _su4_times_spectator_z(n, a, b), f"pauli2-{a}{b}")
        self._cache[key] = concatenate_dcg(base, grp2, h0, sim=self.sim)
        return self._cache[key]


class CRDCGLibrary(DCGLibrary):
    """CR recipes: ZZ-pair group for the Z-rotations, Y-pair group for the
    Y-rotations (the benchmark's Gamma_Z and Gamma_Y)."""

    def __init__(self, model: ModelDef, tp: float):
        if model.name != "cr_chain" or model.n != 4:
            raise ValueError("CR DCG recipes are defined for the n=4 chain")
        super().__init__(model, tp)

    def group_for(self, spec: PulseSpec) -> DecouplingGroup:
        kind = "z" if spec.label.startswith("WZ") else "y"
        key = ("grp1", kind)
        if key not in self._cache:
            n, tp = self.model.n, self.tp
            if kind == "z":
                gens = [
                    DCGGenerator.from_pulse(_pulse(n, "Z", [0, 1], np.pi / 2, tp, "Z12")),
                    DCGGenerator.from_pulse(_pulse(n, "Z", [1, 2], np.pi / 2, tp, "Z23")),
                ]
                basis = _strings(n, ["X0 Z1", "Y0 Z1", "X1 Z2", "Y1 Z2", "X2 Z3", "Y2 Z3"])
                self._cache[key] = close_group(gens, basis, "cr-zz")
            else:
                gens = [
                    DCGGenerator.from_pulse(_pulse(n, "Y", [1], np.pi / 2, tp, "Y2")),
                    DCGGenerator.from_pulse(_pulse(n, "Y", [2], np.pi / 2, tp, "Y3")),
                ]
                basis = _strings(n, [
                    "X0 Z1", "X0 X1", "Z0 Z1", "Z0 X1",
                    "X1 Z2", "X1 X2", "Z1 Z2", "Z1 X2",
                    "X2 Z3", "X2 X3", "Z2 Z3", "Z2 X3",
                ])
                self._cache[key] = close_group(gens, basis, "cr-yy")
        return self._cache[key]

    def neg_time_cycles(self) -> list[list[PulseSpec]]:
        """EDD cycle words for the synthesized negative-time block.

        Level 1: the fixed 8-pulse word on {Y2, Y3}; level 2: a Hierholzer
        cycle over the four-qubit Pauli group generated by {X_i, Y_i}.
        """
        key = ("negcycles",)
        if key not in self._cache:
            n, tp = self.model.n, self.tp
            y = {s: _pulse(n, "Y", [s], np.pi / 2, tp, f"Y{s + 1}") for s in (1, 2)}
            word1 = [y[2], y[1], y[2], y[1], y[1], y[2], y[1], y[2]]
            gens = [DCGGenerator.from_pulse(_pulse(n, ax, [s], np.pi / 2, tp, f"{ax}{s + 1}"))
                    for s in range(n) for ax in ("X", "Y")]
            grp = close_group(gens, None, "pauli4", max_size=300)
            cyc = eulerian_cycle(cayley_graph(grp))
            word2 = [grp.generators[gi].impl.segments[0].spec for _, gi, _ in cyc]
            self._cache[key] = [word1, word2]
        return self._cache[key]


def library_for(model: ModelDef, tp: float) -> DCGLibrary:
    if model.name == "ising_all2all":
        return IsingDCGLibrary(model, tp)
    if model.name == "cr_chain":
        return CRDCGLibrary(model, tp)
    raise ValueError(f"no DCG library for model {model.name!r}")
