import math

import numpy as np
import pytest

from hybridchsh.errors import DomainError
from hybridchsh.fock import (canonical_angle, halfline_overlap, oracle_halfline,
                             quadrature_povm, wavefunction)

VISIBILITY = math.sqrt(2.0 / math.pi)


def test_wavefunction_ground_at_origin():
    np.testing.assert_allclose(wavefunction(0, 0.0), math.pi ** -0.25,
                               rtol=0, atol=1e-15)


def test_wavefunction_excited_at_origin():
    assert wavefunction(1, 0.0) == 0.0


def test_wavefunction_parity():
    xs = np.linspace(0.0, 5.0, 41)
    np.testing.assert_allclose(wavefunction(0, xs), wavefunction(0, -xs),
                               rtol=0, atol=0)
    np.testing.assert_allclose(wavefunction(1, xs), -wavefunction(1, -xs),
                               rtol=0, atol=0)


@pytest.mark.parametrize("n", [-1, 2, 5])
def test_wavefunction_rejects_unsupported_levels(n):
    with pytest.raises(DomainError):
        wavefunction(n, 0.0)


def test_halfline_overlap_values():
    assert halfline_overlap(0, 0) == 0.5
    assert halfline_overlap(1, 1) == 0.5
    np.testing.assert_allclose(halfline_overlap(0, 1), -0.3989422804014327,
                               rtol=0, atol=1e-15)
    np.testing.assert_allclose(halfline_overlap(0, 1),
                               -1.0 / math.sqrt(2.0 * math.pi),
                               rtol=0, atol=1e-15)


def test_oracle_halfline_diagonal_and_hermiticity():
    for zeta in np.linspace(0.0, 2.0 * math.pi, 7):
        assert abs(oracle_halfline(0, 0, zeta) - 0.5) <= 1e-10
        assert abs(oracle_halfline(1, 1, zeta) - 0.5) <= 1e-10
        off = oracle_halfline(0, 1, zeta)
        assert abs(oracle_halfline(1, 0, zeta) - off.conjugate()) <= 1e-10


def test_oracle_halfline_zero_angle():
    assert abs(oracle_halfline(0, 1, 0.0) - (-0.3989422804014327)) <= 1e-10


def test_povm_matches_oracle_entrywise():
    for zeta in np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False):
        e_minus = quadrature_povm(zeta).e_minus
        for m in (0, 1):
            for n in (0, 1):
                assert abs(e_minus[m, n] - oracle_halfline(m, n, zeta)) <= 1e-9


def test_povm_completeness_and_diagonal():
    rng = np.random.default_rng(3)
    for zeta in rng.uniform(0.0, 2.0 * math.pi, size=12):
        povm = quadrature_povm(zeta)
        np.testing.assert_allclose(povm.e_minus + povm.e_plus,
                                   np.eye(2), rtol=0, atol=1e-12)
        np.testing.assert_allclose(np.diag(povm.e_minus), [0.5, 0.5],
                                   rtol=0, atol=1e-15)


def test_povm_psd_eigenvalues():
    expected = np.array([0.5 - 1.0 / math.sqrt(2.0 * math.pi),
                         0.5 + 1.0 / math.sqrt(2.0 * math.pi)])
    for zeta in np.linspace(0.0, 2.0 * math.pi, 9):
        povm = quadrature_povm(zeta)
        for element in (povm.e_minus, povm.e_plus):
            np.testing.assert_allclose(element, element.conj().T,
                                       rtol=0, atol=1e-15)
            np.testing.assert_allclose(np.linalg.eigvalsh(element), expected,
                                       rtol=0, atol=1e-12)


def test_visibility():
    for zeta in np.linspace(0.0, 2.0 * math.pi, 16, endpoint=False):
        e_minus = quadrature_povm(zeta).e_minus
        assert abs(2.0 * abs(e_minus[0, 1]) - VISIBILITY) <= 1e-10


def test_canonical_angle_wraps():
    np.testing.assert_allclose(canonical_angle(2.0 * math.pi + 0.25), 0.25,
                               rtol=0, atol=1e-12)
    np.testing.assert_allclose(canonical_angle(-0.25), 2.0 * math.pi - 0.25,
                               rtol=0, atol=1e-12)
    assert canonical_angle(0.0) == 0.0
