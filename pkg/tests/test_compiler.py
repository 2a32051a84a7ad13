import numpy as np
import pytest

from conftest import fit_loglog
from pulsekit.compiler import (
    NegTimeRouter,
    c2_block,
    compile_c1,
    compile_c2,
    extract_exponents_c1,
    extract_exponents_c2,
    instant_slot_impl,
    naive_slot_impl,
    semi_ideal_c2_block,
)
from pulsekit.operators import (
    Operator,
    hermitian_expm,
    operator_norm,
    pauli,
    pauli_matrix,
    phase_aligned_distance,
)
from pulsekit.pulses import PulseSpec, magnus_first, reverse_pulse, stretch_pulse, pulse_propagator, ideal_action
from pulsekit.schedule import (
    FirstOrderSequence,
    Free,
    Pulse,
    ResidualError,
    simulation_error,
)
from pulsekit.trotter import suzuki_plan, trotter_matrix
from pulsekit.experiments import sequence_vb, sequence_vc


def test_exponents_c1_vb(cr4):
    seq = sequence_vb(cr4, 0.1, 1e-4)
    exps = extract_exponents_c1(seq)
    assert len(exps.terms) == 4
    assert exps.sum_residual(cr4.h_targ) < 1e-9
    lam = operator_norm(cr4.h0)
    for term, tau in zip(exps.terms, seq.delays):
        assert operator_norm(term) == pytest.approx(lam * tau / seq.horizon, abs=1e-10)


def test_exponents_c1_trivial_sequence():
    h0 = pauli_matrix(pauli(1, "Z0"))
    p = PulseSpec(pauli_matrix(pauli(1, "X0")), 2 * np.pi, 1e-4, label="full-turn")
    seq = FirstOrderSequence(((p,), (p,)), (0.05, 0.05), h0, 0.1, h0)
    exps = extract_exponents_c1(seq)
    assert np.allclose(sum(exps.terms), h0.mat)


def test_exponents_c2_vc(heis4):
    seq = sequence_vc(heis4, 0.1, 1e-4)
    plan = suzuki_plan(2)
    exps = extract_exponents_c2(seq, plan.c_p)
    assert len(exps.terms) == 16
    assert exps.sources == ("free", "width") * 8
    assert exps.sum_residual(heis4.h_targ) * seq.horizon < 1e-8 * operator_norm(
        heis4.h0) * seq.horizon
    widths = sum(t for t, s in zip(exps.terms, exps.sources) if s == "width")
    assert operator_norm(widths) < 1e-9


def test_exponents_c2_requires_single_pulse_slots(cr4):
    seq = sequence_vb(cr4, 0.1, 1e-4)
    with pytest.raises(ResidualError):
        extract_exponents_c2(seq, 4.0)


def test_exponents_c2_rejects_nonrobust(heis4):
    seq = sequence_vc(heis4, 0.1, 1e-4)
    bad = FirstOrderSequence(seq.trains, seq.delays[::-1], seq.target, seq.horizon,
                             seq.h0, robust=True)
    with pytest.raises(ResidualError):
        extract_exponents_c2(bad, 4.0)


def test_compile_c1_instant_matches_trotter(sim, cr4):
    # p = 1, instantaneous slots: the schedule is S_2 of the extracted terms
    seq = sequence_vb(cr4, 0.13, 1e-4)
    exps = extract_exponents_c1(seq)
    compiled = compile_c1(seq, 1, instant_slot_impl(seq), NegTimeRouter())
    u = sim.simulate(compiled.schedule, cr4.h0, instantaneous=True).mat
    ref = trotter_matrix([m * seq.horizon for m in exps.terms], 1.0, 2)
    assert phase_aligned_distance(u, ref.mat) < 1e-10


def test_compile_c1_slot_count(cr4):
    seq = sequence_vb(cr4, 0.1, 1e-4)
    for p in (1, 2):
        compiled = compile_c1(seq, p, instant_slot_impl(seq), NegTimeRouter(),
                              check=(p == 1))
        assert compiled.slot_count == 2 * 4 * 5 ** (p - 1)
    assert compile_c1(seq, 2, instant_slot_impl(seq), NegTimeRouter(),
                      check=False).slot_count == 40


def test_compile_c1_order_slopes_ideal(sim, cr4):
    # Theorem-1 first term at the ideal-pulse level: infidelity slope 2(2p+1)
    for p, want in [(1, 6.0), (2, 10.0)]:
        horizons = np.geomspace(0.05, 0.4, 6)
        errs = []
        for horizon in horizons:
            seq = sequence_vb(cr4, horizon, 1e-4)
            compiled = compile_c1(seq, p, instant_slot_impl(seq), NegTimeRouter(),
                                  check=False)
            target = hermitian_expm(cr4.h_targ, horizon)
            errs.append(simulation_error(compiled.schedule, cr4.h0, target,
                                         instantaneous=True, sim=sim))
        assert fit_loglog(horizons, errs) == pytest.approx(2 * (2 * p + 1), abs=0.5)


def test_compile_c1_residual_gate(cr4):
    seq = sequence_vb(cr4, 0.1, 1e-4)
    bad = FirstOrderSequence(seq.trains, (0.3, 0.0, 0.1, 0.2), seq.target,
                             seq.horizon, seq.h0)
    with pytest.raises(ResidualError):
        compile_c1(bad, 1, instant_slot_impl(bad), NegTimeRouter())


def test_c2_block_semi_ideal_equivalence(heis4):
    # compiled block against the auxiliary second-order formula, exact factors
    seq = sequence_vc(heis4, 0.1, 1e-4)
    plan = suzuki_plan(2)
    exps = extract_exponents_c2(seq, plan.c_p)
    terms = [m * seq.horizon for m in exps.terms]
    for alpha in (plan.blocks[0], plan.blocks[2]):
        beta = 0.5 * plan.c_p * abs(alpha)
        semi = semi_ideal_c2_block(seq, alpha, beta)
        ref = trotter_matrix(terms, alpha, 2)
        assert phase_aligned_distance(semi.mat, ref.mat) < 1e-11


def test_c2_lemma1_stretch_identity(heis4):
    # Eq-53 factor at beta = 1 is exactly the input pulse
    seq = sequence_vc(heis4, 0.1, 1e-4)
    spec = seq.trains[0][0]
    assert stretch_pulse(spec, 1.0) == spec


def test_c2_lemma1_factor_slopes(heis4):
    # || P(beta tp) - P exp(-i beta Phi1) || = O((Lambda beta tp)^2)
    seq0 = sequence_vc(heis4, 0.1, 1e-4)
    base = seq0.trains[0][0]
    beta = 1.3
    tps = np.geomspace(1e-4, 1e-2, 6)
    errs = []
    for tp in tps:
        spec = PulseSpec(base.generator, base.area, tp, label="Xbar")
        phi = magnus_first(spec, heis4.h0).mat
        lhs = pulse_propagator(stretch_pulse(spec, beta), heis4.h0).mat
        rhs = ideal_action(spec).mat @ hermitian_expm(
            Operator(phi, "hermitian"), beta).mat
        errs.append(operator_norm(lhs - rhs))
    assert fit_loglog(tps, errs) == pytest.approx(2.0, abs=0.2)


def test_c2_lemma1_cyclic_products(sim, heis4):
    # Eq-55/56 products approximate the inverse factors: slope 2 in t_p
    tps = np.geomspace(3e-4, 3e-3, 5)
    errs55, errs56 = [], []
    k = 2  # isolate the third pulse
    beta = 1.2
    for tp in tps:
        seq = sequence_vc(heis4, 0.1, tp)
        specs = [t[0] for t in seq.trains]
        phi = magnus_first(specs[k], heis4.h0).mat
        ideal_k = ideal_action(specs[k]).mat
        target55 = hermitian_expm(Operator(phi, "hermitian"), -beta).mat @ ideal_k.conj().T
        target56 = ideal_k @ hermitian_expm(Operator(phi, "hermitian"), -beta).mat
        l = len(specs)
        u55 = np.eye(16, dtype=complex)
        for j in list(range(k + 1, l)) + list(range(0, k)):
            u55 = pulse_propagator(stretch_pulse(specs[j], beta), heis4.h0).mat @ u55
        u56 = np.eye(16, dtype=complex)
        for j in list(range(k - 1, -1, -1)) + list(range(l - 1, k, -1)):
            u56 = pulse_propagator(reverse_pulse(stretch_pulse(specs[j], beta)),
                                   heis4.h0).mat @ u56
        errs55.append(operator_norm(u55 - target55))
        errs56.append(operator_norm(u56 - target56))
    assert fit_loglog(tps, errs55) == pytest.approx(2.0, abs=0.2)
    assert fit_loglog(tps, errs56) == pytest.approx(2.0, abs=0.2)


def test_compile_c2_stretch_range(heis4):
    seq = sequence_vc(heis4, 0.1, 1e-4)
    compiled = compile_c2(seq, 2, NegTimeRouter())
    betas = compiled.plan.stretch_factors()
    assert min(betas) == pytest.approx(1.0, abs=1e-12)
    assert max(betas) == pytest.approx(4 ** (1 / 3), abs=1e-7)
    stretches = {seg.spec.stretch for seg in compiled.schedule.leaves()
                 if isinstance(seg, Pulse)}
    assert max(stretches) == pytest.approx(4 ** (1 / 3), abs=1e-12)
    assert min(stretches) == pytest.approx(1.0, abs=1e-12)


def test_compile_c2_beta_guard(heis4):
    seq = sequence_vc(heis4, 0.1, 1e-4)
    with pytest.raises(ResidualError):
        compile_c2(seq, 2, NegTimeRouter(), c=1.0)  # too small: beta < 1


def test_compile_c2_p1_uses_unstretched_pulses(heis4):
    seq = sequence_vc(heis4, 0.1, 1e-4)
    compiled = compile_c2(seq, 1, NegTimeRouter())
    for seg in compiled.schedule.leaves():
        if isinstance(seg, Pulse):
            assert seg.spec.stretch == pytest.approx(1.0)


def test_compile_c2_negative_blocks_route_frees(heis4):
    seq = sequence_vc(heis4, 0.1, 1e-4)
    compiled = compile_c2(seq, 2, NegTimeRouter("oracle"), check=False)
    neg_frees = [seg for seg in compiled.schedule.leaves()
                 if isinstance(seg, Free) and seg.duration < 0]
    # the single negative block contributes 2 l = 16 negative half-delays
    assert len(neg_frees) == 16
    # robust mode: negative-block pulse factors are (l-1)-fold products
    plan = compiled.plan
    neg_block_pulses = 2 * len(seq) * (len(seq) - 1)
    pos_block_pulses = 2 * len(seq)
    assert compiled.schedule.pulse_count() == 4 * pos_block_pulses + neg_block_pulses


def test_compile_c2_naive_negative_variant(sim, heis4):
    seq = sequence_vc(heis4, 0.1, 1e-4)
    robust = compile_c2(seq, 2, NegTimeRouter(), check=False)
    naive = compile_c2(seq, 2, NegTimeRouter(), naive_negative=True, check=False)
    assert naive.schedule.pulse_count() == 5 * 2 * len(seq)
    target = hermitian_expm(heis4.h_targ, 0.1)
    err_r = simulation_error(robust.schedule, heis4.h0, target, sim=sim)
    err_n = simulation_error(naive.schedule, heis4.h0, target, sim=sim)
    assert err_r <= err_n * 1.05


def test_negtime_router_reuses_blocks():
    calls = []

    def builder(tau):
        calls.append(tau)
        from pulsekit.negtime import oracle_negative_block

        return oracle_negative_block(tau)

    router = NegTimeRouter("symEulerian", builder)
    a = router.free_segments(-0.25, "x")
    b = router.free_segments(-0.25, "y")
    assert calls == [0.25]
    assert a[0].schedule is b[0].schedule
