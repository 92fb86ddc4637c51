import math

import numpy as np
import pytest

from hybridchsh.errors import DomainError
from hybridchsh.measure import (AtomSetting, Counting, ProbTable, Quadrature,
                                atom_effects, correlator,
                                correlator_closed_form, joint_probs,
                                optical_effects)
from hybridchsh.model import StateParams, apply_loss, branching_state, ideal_state

VISIBILITY = math.sqrt(2.0 / math.pi)


def test_atom_effects_poles():
    plus, minus = atom_effects(AtomSetting(alpha=0.0))
    np.testing.assert_allclose(plus, np.diag([1.0, 0.0]), rtol=0, atol=1e-15)
    plus, minus = atom_effects(AtomSetting(alpha=math.pi, varphi=0.0))
    np.testing.assert_allclose(plus, np.diag([0.0, 1.0]), rtol=0, atol=1e-15)
    np.testing.assert_allclose(minus, np.diag([1.0, 0.0]), rtol=0, atol=1e-15)


def test_atom_effects_aux_assignment():
    setting = AtomSetting(alpha=0.7, varphi=0.2, aux_outcome=-1)
    plus, minus = atom_effects(setting, atom_dim=3)
    assert plus[2, 2] == 0.0
    assert minus[2, 2] == 1.0
    setting = AtomSetting(alpha=0.7, varphi=0.2, aux_outcome=1)
    plus, minus = atom_effects(setting, atom_dim=3)
    assert plus[2, 2] == 1.0
    assert minus[2, 2] == 0.0


def test_atom_effects_complete_and_psd():
    rng = np.random.default_rng(7)
    for _ in range(30):
        setting = AtomSetting(alpha=rng.uniform(-math.pi, math.pi),
                              varphi=rng.uniform(-math.pi, math.pi),
                              aux_outcome=int(rng.choice([-1, 1])))
        for dim in (2, 3):
            plus, minus = atom_effects(setting, atom_dim=dim)
            np.testing.assert_allclose(plus + minus, np.eye(dim),
                                       rtol=0, atol=1e-12)
            assert np.linalg.eigvalsh(plus).min() >= -1e-12
            assert np.linalg.eigvalsh(minus).min() >= -1e-12


def test_optical_effects_counting():
    click, no_click = optical_effects(Counting(eta_d=1.0))
    np.testing.assert_allclose(click, np.diag([0.0, 1.0]), rtol=0, atol=1e-15)
    click, no_click = optical_effects(Counting(eta_d=0.4))
    np.testing.assert_allclose(click[1, 1], 0.4, rtol=0, atol=1e-15)
    np.testing.assert_allclose(no_click, np.diag([1.0, 0.6]),
                               rtol=0, atol=1e-15)


def test_optical_effects_quadrature_on_vacuum():
    plus, minus = optical_effects(Quadrature(zeta=0.0))
    np.testing.assert_allclose(minus[0, 0], 0.5, rtol=0, atol=1e-15)
    np.testing.assert_allclose(plus + minus, np.eye(2), rtol=0, atol=1e-12)


def test_joint_probs_perfect_correlation():
    state = ideal_state(StateParams(theta=math.pi / 4))
    table = joint_probs(state, AtomSetting(alpha=0.0), Counting(eta_d=1.0))
    np.testing.assert_allclose(table.pm, 0.5, rtol=0, atol=1e-15)
    np.testing.assert_allclose(table.mp, 0.5, rtol=0, atol=1e-15)
    np.testing.assert_allclose(table.pp, 0.0, rtol=0, atol=1e-15)
    np.testing.assert_allclose(table.mm, 0.0, rtol=0, atol=1e-15)


def test_counting_correlator_minus_cos_alpha():
    state = ideal_state(StateParams(theta=math.pi / 4))
    table = joint_probs(state, AtomSetting(alpha=math.pi / 3),
                        Counting(eta_d=1.0))
    np.testing.assert_allclose(correlator(table), -0.5, rtol=0, atol=1e-12)


def test_quadrature_correlator_peak_value():
    state = ideal_state(StateParams(theta=math.pi / 4, phi=0.0))
    table = joint_probs(state, AtomSetting(alpha=math.pi / 2, varphi=0.0),
                        Quadrature(zeta=0.0))
    np.testing.assert_allclose(correlator(table), VISIBILITY,
                               rtol=0, atol=1e-12)


def test_quadrature_correlator_cosine_zero():
    state = ideal_state(StateParams(theta=math.pi / 4, phi=0.0))
    table = joint_probs(state, AtomSetting(alpha=math.pi / 2,
                                           varphi=math.pi / 2),
                        Quadrature(zeta=0.0))
    np.testing.assert_allclose(correlator(table), 0.0, rtol=0, atol=1e-12)


def test_closed_form_matches_engine_200_draws():
    rng = np.random.default_rng(41)
    for _ in range(200):
        params = StateParams(theta=rng.uniform(0.0, math.pi / 2),
                             phi=rng.uniform(0.0, 2.0 * math.pi))
        setting = AtomSetting(alpha=rng.uniform(-math.pi, math.pi),
                              varphi=rng.uniform(-math.pi, math.pi))
        state = ideal_state(params)
        counting = Counting(eta_d=1.0)
        engine = correlator(joint_probs(state, setting, counting))
        closed = correlator_closed_form(params, setting, counting)
        assert abs(engine - closed) <= 1e-9
        quad = Quadrature(zeta=rng.uniform(0.0, 2.0 * math.pi))
        engine = correlator(joint_probs(state, setting, quad))
        closed = correlator_closed_form(params, setting, quad)
        assert abs(engine - closed) <= 1e-9


def test_no_signaling():
    rng = np.random.default_rng(43)
    for _ in range(40):
        f_s, f_g, f_aux = rng.dirichlet([2.0, 1.0, 1.0])
        state = branching_state(StateParams(theta=rng.uniform(0, math.pi / 2),
                                            phi=rng.uniform(0, 2 * math.pi)),
                                f_s, f_g, f_aux)
        state = apply_loss(state, rng.uniform(0.0, 1.0))
        settings = [AtomSetting(alpha=rng.uniform(-math.pi, math.pi),
                                varphi=rng.uniform(-math.pi, math.pi))
                    for _ in range(2)]
        measurements = [Counting(eta_d=rng.uniform(0.0, 1.0)),
                        Quadrature(zeta=rng.uniform(0.0, 2.0 * math.pi))]
        # Alice's marginal may not depend on Bob's choice
        for setting in settings:
            tables = [joint_probs(state, setting, m) for m in measurements]
            margins = [t.alice_marginal_plus for t in tables]
            assert abs(margins[0] - margins[1]) <= 1e-12
        # and Bob's may not depend on Alice's
        for meas in measurements:
            tables = [joint_probs(state, s, meas) for s in settings]
            margins = [t.bob_marginal_plus for t in tables]
            assert abs(margins[0] - margins[1]) <= 1e-12


def test_dead_counter_never_clicks():
    rng = np.random.default_rng(47)
    for _ in range(10):
        state = ideal_state(StateParams(theta=rng.uniform(0, math.pi / 2)))
        setting = AtomSetting(alpha=rng.uniform(-math.pi, math.pi))
        table = joint_probs(state, setting, Counting(eta_d=0.0))
        assert table.pp == 0.0
        assert table.mp == 0.0


def test_prob_table_validation():
    with pytest.raises(DomainError):
        ProbTable(pp=-0.01, pm=0.5, mp=0.5, mm=0.01)
    with pytest.raises(DomainError):
        ProbTable(pp=0.3, pm=0.3, mp=0.3, mm=0.3)


def test_closed_form_rejects_inefficient_counter():
    params = StateParams(theta=0.5)
    setting = AtomSetting(alpha=0.5)
    with pytest.raises(DomainError):
        correlator_closed_form(params, setting, Counting(eta_d=0.7))


def test_aux_outcome_validation():
    with pytest.raises(DomainError):
        AtomSetting(alpha=0.1, aux_outcome=0)
    with pytest.raises(DomainError):
        Counting(eta_d=1.3)
