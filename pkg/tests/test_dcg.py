import numpy as np
import pytest

from conftest import fit_loglog
from pulsekit.dcg import (
    DCGError,
    DCGGenerator,
    build_first_order_dcg,
    build_first_order_pair,
    cayley_graph,
    close_group,
    concatenate_dcg,
    eulerian_cycle,
    max_pulse_stretch,
    predicted_overhead,
    stretch_factor,
)
from pulsekit.operators import (
    Operator,
    error_action,
    infidelity,
    operator_norm,
    pauli,
    pauli_matrix,
    phase_aligned_distance,
)
from pulsekit.pulses import PulseSpec, ideal_action, magnus_first
from pulsekit.schedule import Pulse, PulseSchedule, Simulator
from pulsekit.experiments import IsingDCGLibrary, library_for, sequence_va

N = 3
H0 = pauli_matrix([pauli(N, {0: "Z", 1: "Z"}), pauli(N, {0: "Z", 2: "Z"}),
                   pauli(N, {1: "Z", 2: "Z"})])
ZERO = Operator(np.zeros((8, 8)), "hermitian")


def xp(site, tp=1e-3):
    return PulseSpec(pauli_matrix(pauli(N, {site: "X"})), np.pi / 2, tp,
                     label=f"X{site + 1}")


def w12(tp=1e-3):
    gen = pauli_matrix([pauli(N, {0: "X"}), pauli(N, {1: "X"})])
    return PulseSpec(gen, np.pi / 2, tp, label="X1X2")


def xgroup(tp=1e-3):
    return close_group([DCGGenerator.from_pulse(xp(0, tp)),
                        DCGGenerator.from_pulse(xp(1, tp))], None, "x12")


def test_cayley_graph_four_group():
    graph = cayley_graph(xgroup())
    assert graph.n_vertices == 4
    assert len(graph.edges) == 8
    outdeg = [len(graph.out_edges(v)) for v in range(4)]
    indeg = [sum(1 for e in graph.edges if e[2] == v) for v in range(4)]
    assert outdeg == [2, 2, 2, 2] and indeg == [2, 2, 2, 2]


def test_cayley_graph_two_cycle():
    g = close_group([DCGGenerator.from_pulse(xp(0))], None, "x1")
    graph = cayley_graph(g)
    assert graph.n_vertices == 2
    assert len(graph.edges) == 2
    cycle = eulerian_cycle(graph)
    assert [e[0] for e in cycle] == [0, 1]


def test_cayley_self_loop_identity_generator():
    ident = DCGGenerator("I", np.eye(8, dtype=complex),
                         PulseSchedule((Pulse(xp(0)), Pulse(xp(0)))))
    g = close_group([ident], None, "trivial")
    graph = cayley_graph(g)
    assert graph.n_vertices == 1
    assert graph.edges == ((0, 0, 0),)
    assert eulerian_cycle(graph) == [(0, 0, 0)]


def _check_cycle_validity(group, cycle, n_edges):
    assert len(cycle) == n_edges
    assert len(set(cycle)) == n_edges  # each directed edge exactly once
    assert cycle[0][0] == 0 and cycle[-1][2] == 0  # closed at identity
    for e1, e2 in zip(cycle, cycle[1:]):
        assert e1[2] == e2[0]  # consecutive


def test_eulerian_cycle_four_group():
    group = xgroup()
    cycle = eulerian_cycle(cayley_graph(group))
    _check_cycle_validity(group, cycle, 8)


def test_appendix_cycle_word_is_valid():
    # the fixed benchmark word on Cay({I,Y2,Y3,Y2Y3}, {Y2,Y3}) really is Eulerian
    n = 4
    y2 = pauli_matrix(pauli(n, {1: "Y"})).mat
    y3 = pauli_matrix(pauli(n, {2: "Y"})).mat
    word = [y3, y2, y3, y2, y2, y3, y2, y3]
    gens = [DCGGenerator("Y2", y2, PulseSchedule(())),
            DCGGenerator("Y3", y3, PulseSchedule(()))]
    group = close_group(gens, None, "y23")
    assert group.size == 4
    current = 0
    seen = set()
    for h in word:
        target = group.element_index(group.elements[current] @ h)
        gi = 0 if np.allclose(h, y2) else 1
        edge = (current, gi, target)
        assert edge not in seen
        seen.add(edge)
        current = target
    assert current == 0 and len(seen) == 8


def test_unbalanced_graph_rejected():
    from pulsekit.dcg import CayleyGraph

    bad = CayleyGraph(2, ((0, 0, 1), (0, 0, 1)))
    with pytest.raises(DCGError):
        eulerian_cycle(bad)


def test_first_order_dcg_structure():
    level = build_first_order_dcg(w12(), xgroup(), H0)
    assert level.block.duration / 1e-3 == pytest.approx(16.0, abs=1e-9)
    assert level.block.pulse_count() == 15
    # loops at the three non-identity vertices plus one exit edge
    labels = [seg.label for seg in level.block.segments]
    assert sum(1 for lb in labels if ":loop:" in lb) == 3
    assert sum(1 for lb in labels if lb.endswith(":exit")) == 1


def test_first_order_dcg_ideal_action(sim):
    level = build_first_order_dcg(w12(), xgroup(), H0)
    ideal = sim.simulate(level.block, ZERO).mat
    assert np.max(np.abs(ideal - ideal_action(w12()).mat)) < 1e-11
    dag = sim.simulate(level.dagger_block, ZERO).mat
    assert np.max(np.abs(dag - ideal_action(w12()).mat.conj().T)) < 1e-11


def test_first_order_dcg_error_slope(sim):
    tps = np.geomspace(3e-4, 1e-2, 6)
    errs_naive, errs_dcg = [], []
    for tp in tps:
        w = w12(tp)
        level = build_first_order_dcg(w, xgroup(tp), H0, check=False)
        wid = ideal_action(w).mat
        errs_dcg.append(infidelity(sim.simulate(level.block, H0).mat, wid))
        errs_naive.append(infidelity(sim.simulate(
            PulseSchedule((Pulse(w),)), H0).mat, wid))
    assert fit_loglog(tps, errs_naive) == pytest.approx(2.0, abs=0.2)
    assert fit_loglog(tps, errs_dcg) == pytest.approx(4.0, abs=0.3)


def test_eulerian_averaging_identity(sim):
    # closed EDD cycle: first Magnus term is the double group sum, which the
    # decoupling condition sends to zero
    group = xgroup()
    phis = [magnus_first(g.impl.segments[0].spec, H0).mat for g in group.generators]
    total = np.zeros((8, 8), dtype=complex)
    for phi in phis:
        for g in group.elements:
            total += g.conj().T @ phi @ g
    lam = operator_norm(H0)
    assert operator_norm(total) < 1e-8 * lam * 1e-3 * group.size * len(group.generators)
    # and the composite cycle's log is second order in t_p
    tps = np.geomspace(1e-3, 1e-2, 4)
    norms = []
    for tp in tps:
        grp = xgroup(tp)
        cycle = eulerian_cycle(cayley_graph(grp))
        segs = tuple(Pulse(grp.generators[gi].impl.segments[0].spec)
                     for _, gi, _ in cycle)
        u = sim.simulate(PulseSchedule(segs), H0).mat
        norms.append(operator_norm(error_action(np.eye(8), u)))
    assert fit_loglog(tps, norms) == pytest.approx(2.0, abs=0.2)


def test_decoupling_condition_failure_raises():
    # {I, X1} alone does not decouple the Ising error space
    g = close_group([DCGGenerator.from_pulse(xp(0))], None, "x1-only")
    with pytest.raises(DCGError):
        build_first_order_dcg(w12(), g, H0)


def test_membership_failure_raises():
    basis = [pauli_matrix(pauli(N, {0: "X"}))]  # wrong space entirely
    g = close_group([DCGGenerator.from_pulse(xp(0)),
                     DCGGenerator.from_pulse(xp(1))], basis, "bad-basis")
    with pytest.raises(DCGError):
        build_first_order_dcg(w12(), g, H0)


def _second_order(tp, sim, check=False):
    model_lib = IsingDCGLibrary.__new__(IsingDCGLibrary)
    from pulsekit.experiments import ising_all2all

    model_lib.__init__(ising_all2all(), tp)
    return model_lib.second_order(w12(tp)), model_lib


def test_concatenation_growth_law(sim):
    tp = 1e-3
    spec2, _ = _second_order(tp, sim)
    assert spec2.order == 2
    taus = spec2.durations()
    assert taus[0] / tp == pytest.approx(16.0, abs=1e-9)
    ratio = spec2.overhead_factors()[0]
    assert ratio == pytest.approx(predicted_overhead(16, 4, 1), abs=1e-9)
    assert stretch_factor(1) == pytest.approx(np.sqrt(2), abs=1e-9)


def test_concatenation_stretch_bound(sim):
    tp = 1e-3
    spec2, _ = _second_order(tp, sim)
    bound = 2.0 ** (1.0 + 0.5)  # 2^(sum 1/r), q = 2
    assert max_pulse_stretch(spec2.block) <= bound + 1e-12
    assert max_pulse_stretch(spec2.block) == pytest.approx(bound, abs=1e-12)


def test_concatenated_dcg_ideal_action(sim):
    tp = 1e-3
    spec2, _ = _second_order(tp, sim)
    ideal = sim.simulate(spec2.block, ZERO).mat
    assert phase_aligned_distance(ideal, ideal_action(w12(tp)).mat) < 1e-10


def test_second_order_dcg_error_slope(sim):
    tps = np.geomspace(5e-3, 2e-2, 4)
    errs = []
    for tp in tps:
        spec2, _ = _second_order(tp, sim)
        wid = ideal_action(w12(tp)).mat
        errs.append(infidelity(sim.simulate(spec2.block, H0).mat, wid))
    # crossover region: slope between the asymptotic 6 and the quartic 8
    assert 5.6 <= fit_loglog(tps, errs) <= 8.4


def test_balance_pair_matching_slope(sim):
    # Lemma-3 check: || Phi_I - Phi_W* || scales as tau^(q+2), q = 1
    from pulsekit.schedule import Block, concat

    tps = np.geomspace(1e-3, 1e-2, 5)
    mismatch = []
    for tp in tps:
        level = build_first_order_dcg(w12(tp), xgroup(tp), H0, check=False)
        r = stretch_factor(1)
        loop = concat([Block(level.block.stretched(r)), Block(level.dagger_block)])
        star = concat([Block(level.block), Block(level.dagger_block),
                       Block(level.block)])
        phi_i = error_action(sim.simulate(loop, ZERO).mat, sim.simulate(loop, H0).mat)
        phi_s = error_action(sim.simulate(star, ZERO).mat, sim.simulate(star, H0).mat)
        mismatch.append(operator_norm(phi_i - phi_s))
    assert fit_loglog(tps, mismatch) == pytest.approx(3.0, abs=0.3)


def test_va_dcg_duration_is_16tp(ising3):
    # the compiled first-order DCG of every VA control lasts exactly 16 t_p
    tp = 1e-4
    lib = library_for(ising3, tp)
    seq = sequence_va(ising3, 0.4, tp)
    for train in seq.trains:
        dcg = lib.first_order(train[0])
        assert dcg.block.duration / tp == pytest.approx(16.0, abs=1e-9)
