import math

import numpy as np
import pytest

from hybridchsh.errors import DomainError
from hybridchsh.hilbert import validate_state
from hybridchsh.model import (Imperfections, StateParams, TrapParams,
                              apply_dephasing, apply_loss, branching_state,
                              ideal_state, motional_fidelity)

# atom-major basis, mode dim 2: g0, g1, s0, s1 (dim 4); aux0, aux1 follow (dim 6)
G0, G1, S0, S1 = 0, 1, 2, 3
AUX0 = 4


def test_ideal_state_no_excitation():
    rho = ideal_state(StateParams(theta=0.0)).rho
    expected = np.zeros((4, 4), dtype=complex)
    expected[G0, G0] = 1.0
    np.testing.assert_allclose(rho, expected, rtol=0, atol=1e-15)


def test_ideal_state_balanced():
    rho = ideal_state(StateParams(theta=math.pi / 4, phi=0.0)).rho
    np.testing.assert_allclose(np.diag(rho), [0.5, 0.0, 0.0, 0.5],
                               rtol=0, atol=1e-15)
    np.testing.assert_allclose(rho[G0, S1], 0.5, rtol=0, atol=1e-15)
    assert np.linalg.matrix_rank(rho) == 1


def test_ideal_state_phase_flip():
    rho = ideal_state(StateParams(theta=math.pi / 4, phi=math.pi)).rho
    np.testing.assert_allclose(rho[G0, S1], -0.5, rtol=0, atol=1e-12)


@pytest.mark.parametrize("theta", [-0.1, math.pi / 2 + 0.1])
def test_state_params_domain(theta):
    with pytest.raises(DomainError):
        StateParams(theta=theta)


def test_apply_loss_identity():
    state = ideal_state(StateParams(theta=0.6, phi=1.2))
    np.testing.assert_allclose(apply_loss(state, 1.0).rho, state.rho,
                               rtol=0, atol=1e-15)


def test_apply_loss_full():
    state = ideal_state(StateParams(theta=math.pi / 4))
    rho = apply_loss(state, 0.0).rho
    np.testing.assert_allclose(np.diag(rho), [0.5, 0.0, 0.5, 0.0],
                               rtol=0, atol=1e-15)
    np.testing.assert_allclose(rho - np.diag(np.diag(rho)),
                               np.zeros((4, 4)), rtol=0, atol=1e-15)


def test_apply_loss_half_hand_expansion():
    # two-term mixture at eta = 0.5, theta = pi/4: surviving branch keeps
    # coherence 0.5*sqrt(0.5); lost branch parks 0.25 of weight in s0
    rho = apply_loss(ideal_state(StateParams(theta=math.pi / 4)), 0.5).rho
    np.testing.assert_allclose(np.diag(rho), [0.5, 0.0, 0.25, 0.25],
                               rtol=0, atol=1e-15)
    np.testing.assert_allclose(rho[G0, S1], 0.5 * math.sqrt(0.5),
                               rtol=0, atol=1e-15)
    np.testing.assert_allclose(rho[S1, G0], 0.5 * math.sqrt(0.5),
                               rtol=0, atol=1e-15)


def test_apply_loss_composes_multiplicatively():
    rng = np.random.default_rng(17)
    for _ in range(25):
        theta = rng.uniform(0.0, math.pi / 2)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        a, b = rng.uniform(0.0, 1.0, size=2)
        state = ideal_state(StateParams(theta=theta, phi=phi))
        twice = apply_loss(apply_loss(state, a), b).rho
        once = apply_loss(state, a * b).rho
        np.testing.assert_allclose(twice, once, rtol=0, atol=1e-12)


def test_apply_loss_domain():
    state = ideal_state(StateParams(theta=0.3))
    with pytest.raises(DomainError):
        apply_loss(state, 1.2)
    with pytest.raises(DomainError):
        apply_loss(state, -0.1)


def test_branching_embeds_ideal_at_unit_fraction():
    params = StateParams(theta=0.8, phi=0.4)
    small = ideal_state(params).rho
    big = branching_state(params, 1.0, 0.0, 0.0).rho
    np.testing.assert_allclose(big[:4, :4], small, rtol=0, atol=1e-15)
    np.testing.assert_allclose(big[4:, :], 0.0, rtol=0, atol=1e-15)
    np.testing.assert_allclose(big[:, 4:], 0.0, rtol=0, atol=1e-15)


def test_branching_no_photon_channel():
    rho = branching_state(StateParams(theta=math.pi / 4), 0.0, 0.7, 0.3).rho
    assert rho[S1, S1] == 0.0
    np.testing.assert_allclose(np.trace(rho).real, 1.0, rtol=0, atol=1e-12)


def test_branching_hand_expansion():
    # f = (0.5, 0.3, 0.2) at theta = pi/4: populations add the decayed
    # weight to g0 and aux0; coherence scales by sqrt(f_s)
    rho = branching_state(StateParams(theta=math.pi / 4), 0.5, 0.3, 0.2).rho
    np.testing.assert_allclose(rho[G0, G0], 0.65, rtol=0, atol=1e-15)
    np.testing.assert_allclose(rho[S1, S1], 0.25, rtol=0, atol=1e-15)
    np.testing.assert_allclose(rho[AUX0, AUX0], 0.10, rtol=0, atol=1e-15)
    np.testing.assert_allclose(rho[G0, S1], 0.5 * math.sqrt(0.5),
                               rtol=0, atol=1e-15)


def test_branching_trace_one_random_triples():
    rng = np.random.default_rng(23)
    for _ in range(50):
        f_s, f_g, f_aux = rng.dirichlet([1.0, 1.0, 1.0])
        theta = rng.uniform(0.0, math.pi / 2)
        state = branching_state(StateParams(theta=theta), f_s, f_g, f_aux)
        np.testing.assert_allclose(np.trace(state.rho).real, 1.0,
                                   rtol=0, atol=1e-12)
        assert validate_state(state).passed


def test_branching_rejects_bad_weights():
    with pytest.raises(DomainError):
        Imperfections(f_s=0.5, f_g=0.5, f_aux=0.5)
    with pytest.raises(DomainError):
        branching_state(StateParams(theta=0.3), 0.5, 0.2, 0.2)


def test_loss_commutes_with_branching_embedding():
    params = StateParams(theta=0.9, phi=2.2)
    lossy_then_embed = branching_state(params, 1.0, 0.0, 0.0)
    lossy_then_embed = apply_loss(lossy_then_embed, 0.6).rho
    embed_of_lossy = np.zeros((6, 6), dtype=complex)
    embed_of_lossy[:4, :4] = apply_loss(ideal_state(params), 0.6).rho
    np.testing.assert_allclose(lossy_then_embed, embed_of_lossy,
                               rtol=0, atol=1e-12)


def test_dephasing_identity_and_full():
    state = ideal_state(StateParams(theta=math.pi / 4))
    np.testing.assert_allclose(apply_dephasing(state, 1.0).rho, state.rho,
                               rtol=0, atol=1e-15)
    dephased = apply_dephasing(state, 0.5).rho
    assert dephased[G0, S1] == 0.0
    assert dephased[S1, G0] == 0.0


def test_dephasing_linearity_anchor():
    rho = apply_dephasing(ideal_state(StateParams(theta=math.pi / 4)), 0.9).rho
    np.testing.assert_allclose(rho[G0, S1], 0.4, rtol=0, atol=1e-15)


def test_dephasing_preserves_diagonals_exactly():
    rng = np.random.default_rng(29)
    for _ in range(20):
        f_s, f_g, f_aux = rng.dirichlet([2.0, 1.0, 1.0])
        state = branching_state(StateParams(theta=rng.uniform(0, math.pi / 2),
                                            phi=rng.uniform(0, 2 * math.pi)),
                                f_s, f_g, f_aux)
        state = apply_loss(state, rng.uniform(0.0, 1.0))
        out = apply_dephasing(state, rng.uniform(0.5, 1.0))
        np.testing.assert_array_equal(np.diag(out.rho), np.diag(state.rho))


def test_dephasing_matches_pure_mixture():
    # channel output equals F rho(phi) + (1-F) rho(phi+pi) on pure inputs
    fidelity = 0.8
    params = StateParams(theta=0.7, phi=0.3)
    flipped = StateParams(theta=0.7, phi=0.3 + math.pi)
    mixture = fidelity * ideal_state(params).rho \
        + (1.0 - fidelity) * ideal_state(flipped).rho
    channel = apply_dephasing(ideal_state(params), fidelity).rho
    np.testing.assert_allclose(channel, mixture, rtol=0, atol=1e-12)


def test_dephasing_domain():
    state = ideal_state(StateParams(theta=0.3))
    with pytest.raises(DomainError):
        apply_dephasing(state, 0.4)
    with pytest.raises(DomainError):
        apply_dephasing(state, 1.1)


def test_model_outputs_pass_validation():
    rng = np.random.default_rng(31)
    for _ in range(30):
        params = StateParams(theta=rng.uniform(0, math.pi / 2),
                             phi=rng.uniform(0, 2 * math.pi))
        f_s, f_g, f_aux = rng.dirichlet([1.0, 1.0, 1.0])
        state = branching_state(params, f_s, f_g, f_aux)
        state = apply_loss(state, rng.uniform(0, 1))
        state = apply_dephasing(state, rng.uniform(0.5, 1.0))
        assert validate_state(state).passed


def test_motional_fidelity_forward_collection():
    trap = TrapParams(width=1e-8, n_bar=10.0, k_norm=2 * math.pi / 800e-9,
                      emission_angle=0.0)
    assert motional_fidelity(trap) == 1.0
    assert motional_fidelity(trap, exponent="squared") == 1.0


def test_motional_fidelity_wide_trap_limit():
    trap = TrapParams(width=1.0, n_bar=10.0, k_norm=2 * math.pi / 800e-9,
                      emission_angle=math.pi / 2)
    np.testing.assert_allclose(motional_fidelity(trap, exponent="squared"),
                               0.5, rtol=0, atol=1e-12)


def test_motional_fidelity_regression_pins():
    trap = TrapParams(width=1e-8, n_bar=10.0, k_norm=2 * math.pi / 800e-9,
                      emission_angle=math.pi / 2)
    np.testing.assert_allclose(motional_fidelity(trap),
                               0.9999999917533193, rtol=0, atol=1e-15)
    np.testing.assert_allclose(motional_fidelity(trap, exponent="squared"),
                               0.9392503573698547, rtol=0, atol=1e-15)


def test_motional_fidelity_monotone_in_thermal_occupation():
    values = [motional_fidelity(TrapParams(width=1e-8, n_bar=n,
                                           k_norm=2 * math.pi / 800e-9,
                                           emission_angle=1.0),
                                exponent="squared")
              for n in (0.0, 1.0, 5.0, 20.0)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_motional_fidelity_domain():
    with pytest.raises(DomainError):
        TrapParams(width=-1e-8, n_bar=1.0, k_norm=1.0, emission_angle=0.0)
    trap = TrapParams(width=1e-8, n_bar=1.0, k_norm=1.0, emission_angle=0.5)
    with pytest.raises(DomainError):
        motional_fidelity(trap, exponent="cubed")


def test_imperfections_domain():
    with pytest.raises(DomainError):
        Imperfections(eta_t=1.5)
    with pytest.raises(DomainError):
        Imperfections(eta_d=-0.2)
    with pytest.raises(DomainError):
        Imperfections(fidelity=0.2)
    assert not Imperfections().needs_aux_level
    assert Imperfections(f_s=0.5, f_g=0.5, f_aux=0.0).needs_aux_level
