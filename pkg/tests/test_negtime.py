import numpy as np
import pytest

from conftest import fit_loglog
from pulsekit.dcg import DCGGenerator, cayley_graph, close_group, eulerian_cycle
from pulsekit.negtime import (
    MagnusGuardError,
    NegativeTimeError,
    cdd_identity_block,
    negative_time,
    oracle_negative_block,
    sym_eulerian_identity_block,
)
from pulsekit.operators import (
    Operator,
    hermitian_expm,
    operator_norm,
    pauli,
    pauli_matrix,
)
from pulsekit.pulses import PulseSpec
from pulsekit.schedule import Free, Simulator

H0_1Q = Operator(0.4 * pauli_matrix(pauli(1, "Z0")).mat
                 + 0.3 * pauli_matrix(pauli(1, "X0")).mat, "hermitian")


def pauli_frame_pulses():
    """Ideal pulse list whose toggling frames enumerate I, X, Y, Z."""
    mats = [np.eye(2, dtype=complex), pauli_matrix(pauli(1, "X0")).mat,
            pauli_matrix(pauli(1, "Y0")).mat, pauli_matrix(pauli(1, "Z0")).mat]
    return [Operator(mats[(j + 1) % 4] @ mats[j].conj().T) for j in range(4)]


def edd_word_1q(tp):
    x = PulseSpec(pauli_matrix(pauli(1, "X0")), np.pi / 2, tp, label="X")
    y = PulseSpec(pauli_matrix(pauli(1, "Y0")), np.pi / 2, tp, label="Y")
    gens = [DCGGenerator.from_pulse(x), DCGGenerator.from_pulse(y)]
    group = close_group(gens, None, "pauli1")
    cycle = eulerian_cycle(cayley_graph(group))
    return [group.generators[gi].impl.segments[0].spec for _, gi, _ in cycle]


def test_oracle_block_shape():
    blk = oracle_negative_block(0.3)
    assert blk.mode == "oracle"
    assert blk.schedule.segments == (Free(-0.3, "oracle-neg"),)
    assert blk.pulse_count == 0


def test_oracle_negative_time_exact(sim):
    blk = oracle_negative_block(0.3)
    u = sim.simulate(negative_time(blk), H0_1Q).mat
    assert np.max(np.abs(u - hermitian_expm(H0_1Q, -0.3).mat)) < 1e-12


def test_cdd_tau_zero_is_identity(sim):
    blk = cdd_identity_block(pauli_frame_pulses(), 0.0, 1, H0_1Q)
    u = sim.simulate(blk.schedule, H0_1Q).mat
    assert np.max(np.abs(u - np.eye(2))) < 1e-10


def test_cdd_level1_slope(sim):
    taus = np.geomspace(3e-3, 3e-2, 6)
    errs = []
    for tau in taus:
        blk = cdd_identity_block(pauli_frame_pulses(), tau, 1, H0_1Q)
        errs.append(operator_norm(sim.simulate(blk.schedule, H0_1Q).mat - np.eye(2)))
    assert fit_loglog(taus, errs) == pytest.approx(3.0, abs=0.3)


def test_cdd_level2_slope(sim):
    taus = np.geomspace(4e-2, 1.6e-1, 6)
    errs = []
    for tau in taus:
        blk = cdd_identity_block(pauli_frame_pulses(), tau, 2, H0_1Q)
        errs.append(operator_norm(sim.simulate(blk.schedule, H0_1Q).mat - np.eye(2)))
    assert fit_loglog(taus, errs) == pytest.approx(9.0, abs=1.0)


def test_cdd_pulse_counts():
    pulses = pauli_frame_pulses()
    blk1 = cdd_identity_block(pulses, 0.01, 1, H0_1Q)
    assert blk1.pulse_count == 8
    blk2 = cdd_identity_block(pulses, 0.01, 2, H0_1Q)
    assert blk2.pulse_count == 8 + 8 * 8


def test_one_design_check_failure():
    x = pauli_matrix(pauli(1, "X0"))
    bad = [Operator(hermitian_expm(x, np.pi / 2).mat)] * 2  # frames {I, X}: not a 1-design
    with pytest.raises(NegativeTimeError):
        cdd_identity_block(bad, 0.01, 1, H0_1Q)


def test_magnus_guard():
    with pytest.raises(MagnusGuardError):
        cdd_identity_block(pauli_frame_pulses(), 10.0, 1, H0_1Q)
    with pytest.raises(MagnusGuardError):
        sym_eulerian_identity_block([edd_word_1q(1e-4)], 10.0, H0_1Q)


def test_negative_time_error_equality(sim):
    # unitary invariance: synthesized-vs-oracle error equals the identity error
    tau = 0.05
    blk = cdd_identity_block(pauli_frame_pulses(), tau, 1, H0_1Q)
    e_block = operator_norm(sim.simulate(blk.schedule, H0_1Q).mat - np.eye(2))
    u_neg = sim.simulate(negative_time(blk), H0_1Q).mat
    e_neg = operator_norm(u_neg - hermitian_expm(H0_1Q, -tau).mat)
    assert abs(e_neg - e_block) < 1e-12


def test_negative_time_sym_edd_equality(sim):
    tau = 0.04
    blk = sym_eulerian_identity_block([edd_word_1q(1e-4)], tau, H0_1Q)
    e_block = operator_norm(sim.simulate(blk.schedule, H0_1Q).mat - np.eye(2))
    u_neg = sim.simulate(negative_time(blk), H0_1Q).mat
    e_neg = operator_norm(u_neg - hermitian_expm(H0_1Q, -tau).mat)
    assert abs(e_neg - e_block) < 1e-12
    # synthesized schedules contain only nonnegative frees
    for seg in negative_time(blk).leaves():
        if isinstance(seg, Free):
            assert seg.duration >= 0


H0_CR = pauli_matrix([pauli(4, {i: "X", i + 1: "Z"}) for i in range(3)])


def cr_word1(tp):
    y = {s: PulseSpec(pauli_matrix(pauli(4, {s: "Y"})), np.pi / 2, tp,
                      label=f"Y{s + 1}") for s in (1, 2)}
    return [y[2], y[1], y[2], y[1], y[1], y[2], y[1], y[2]]


def test_sym_edd_level1_slope(sim):
    # n = 1 Pauli frames telescope the pure-tau term, so use the benchmark's
    # cross-resonance word where the cubic term is generic
    word = cr_word1(1e-5)
    taus = np.geomspace(3e-3, 3e-2, 6)
    errs = []
    for tau in taus:
        blk = sym_eulerian_identity_block([word], tau, H0_CR)
        errs.append(operator_norm(sim.simulate(blk.schedule, H0_CR).mat - np.eye(16)))
    assert fit_loglog(taus, errs) == pytest.approx(3.0, abs=0.3)


def test_sym_edd_level2_improves(sim):
    # full-Pauli second level (the benchmark's enlarged generating set)
    from pulsekit.experiments import cr_chain, library_for

    lib = library_for(cr_chain(), 1e-4)
    cycles = lib.neg_time_cycles()
    tau = 0.03
    e1 = operator_norm(sim.simulate(
        sym_eulerian_identity_block(cycles[:1], tau, H0_CR).schedule, H0_CR).mat
        - np.eye(16))
    e2 = operator_norm(sim.simulate(
        sym_eulerian_identity_block(cycles, tau, H0_CR).schedule, H0_CR).mat
        - np.eye(16))
    assert e2 < e1 / 100


def test_sym_edd_width_floor_level_independent(sim):
    # tau -> 0 floor is set by t_p and, for a fixed cycle word per level,
    # stays within a factor of 3 across concatenation levels
    word = cr_word1(2e-3)
    floors = []
    for cycles in ([word], [word, word]):
        blk = sym_eulerian_identity_block(cycles, 0.0, H0_CR)
        floors.append(operator_norm(sim.simulate(blk.schedule, H0_CR).mat - np.eye(16)))
    ratio = floors[1] / floors[0]
    assert 1 / 3 <= ratio <= 3


def test_cdd_floor_decreases_with_dcg_order(sim):
    # finite-width CDD on two qubits: replacing each 1-design pulse by its
    # first-order DCG lowers the tau -> 0 pulse-width floor
    import itertools

    from pulsekit.dcg import DCGGenerator, build_first_order_pair, close_group
    from pulsekit.schedule import Block, Pulse

    n, tp = 2, 1e-3
    h0 = Operator(pauli_matrix(pauli(n, "Z0 Z1")).mat
                  + 0.3 * pauli_matrix(pauli(n, "X0")).mat, "hermitian")
    paulis = [dict(zip((0, 1), axes)) for axes in itertools.product("IXYZ", repeat=2)]
    frames = []
    for fac in paulis:
        fac = {s: a for s, a in fac.items() if a != "I"}
        frames.append(pauli_matrix(pauli(n, fac)).mat if fac else np.eye(4, dtype=complex))

    # pulse j implements frames[j+1] frames[j]^dag, itself a Pauli string;
    # realize it as a simultaneous 1-local pulse over its non-identity sites
    from pulsekit.operators import equal_up_to_phase

    singles = {(s, a): pauli_matrix(pauli(n, {s: a})).mat
               for s in range(n) for a in "XYZ"}

    def spec_for(mat, label):
        for fac in paulis:
            sites = {s: a for s, a in fac.items() if a != "I"}
            if not sites:
                continue
            string = pauli_matrix(pauli(n, sites)).mat
            if equal_up_to_phase(string, mat, 1e-9):
                gen = sum(singles[(s, a)] for s, a in sites.items())
                return PulseSpec(Operator(gen, "hermitian"), np.pi / 2, tp, label=label)
        raise AssertionError(f"no 1-local decomposition for {label}")

    pulse_specs = []
    for j in range(16):
        ratio = frames[(j + 1) % 16] @ frames[j].conj().T
        pulse_specs.append(spec_for(ratio, f"P{j}"))
    pulses = [Operator(frames[(j + 1) % 16] @ frames[j].conj().T) for j in range(16)]

    gens = [DCGGenerator.from_pulse(
        PulseSpec(Operator(singles[(s, a)], "hermitian"), np.pi / 2, tp, label=f"{a}{s}"))
        for s in range(n) for a in ("X", "Y")]
    group = close_group(gens, None, "pauli2")
    dcg_pairs = {j: build_first_order_pair(sp, group, h0, check=False)
                 for j, sp in enumerate(pulse_specs)}

    def impl_naive(j, daggered):
        from pulsekit.pulses import reverse_pulse

        sp = reverse_pulse(pulse_specs[j]) if daggered else pulse_specs[j]
        return Pulse(sp)

    def impl_dcg(j, daggered):
        pair = dcg_pairs[j]
        return Block(pair.levels[-1].dagger_block if daggered else pair.levels[-1].block)

    floors = []
    for impl in (impl_naive, impl_dcg):
        blk = cdd_identity_block(pulses, 0.0, 1, h0, pulse_impl=impl)
        floors.append(operator_norm(sim.simulate(blk.schedule, h0).mat - np.eye(4)))
    assert floors[1] < floors[0] / 5


def test_sym_edd_toggled_hamiltonian_time_symmetric():
    # H_I(T_sym - t) = H_I(t) on grid points for the level-1 symmetrized cycle
    tp = 1e-3
    word = edd_word_1q(tp)
    tau = 5e-3
    blk = sym_eulerian_identity_block([word], tau, H0_1Q)
    # walk the control profile: accumulate phase per segment
    from pulsekit.pulses import ideal_action
    from pulsekit.schedule import Pulse as PulseSeg

    events = []  # (duration, generator matrix or None, amplitude)
    for seg in blk.schedule.leaves():
        if isinstance(seg, Free):
            events.append((seg.duration, None, 0.0))
        else:
            for dur, amp in seg.spec.segments():
                events.append((dur, seg.spec.generator.mat, amp))
    total = sum(e[0] for e in events)

    def control_at(t):
        u = np.eye(2, dtype=complex)
        acc = 0.0
        for dur, gen, amp in events:
            if t <= acc + dur + 1e-15:
                if gen is not None:
                    u = hermitian_expm(Operator(gen, "hermitian"),
                                       amp * (t - acc)).mat @ u
                return u
            if gen is not None:
                u = hermitian_expm(Operator(gen, "hermitian"), amp * dur).mat @ u
            acc += dur
        return u

    rng = np.random.default_rng(3)
    for t in rng.uniform(0, total, 12):
        uc1 = control_at(t)
        uc2 = control_at(total - t)
        h1 = uc1.conj().T @ H0_1Q.mat @ uc1
        h2 = uc2.conj().T @ H0_1Q.mat @ uc2
        assert np.max(np.abs(h1 - h2)) < 1e-9


def test_negative_time_requires_a_free_segment():
    from pulsekit.negtime import NegativeTimeBlock
    from pulsekit.schedule import Pulse, PulseSchedule

    p = PulseSpec(pauli_matrix(pauli(1, "X0")), np.pi / 2, 1e-4)
    blk = NegativeTimeBlock("symEulerian", 0.1, PulseSchedule((Pulse(p),)), 1)
    with pytest.raises(NegativeTimeError):
        negative_time(blk)
