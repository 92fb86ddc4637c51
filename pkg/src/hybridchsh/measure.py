"""Measurement settings, POVM effects, and joint outcome statistics.

Both parties output +1 or -1. The atom side projects onto
v = cos(alpha/2)|g> + exp(i*varphi) sin(alpha/2)|s> (outcome +1) and its
complement; when an aux level exists, it is folded into the outcome
chosen by ``AtomSetting.aux_outcome``. The optical side is either photon
counting (click -> +1, efficiency eta_d) or the sign-binned quadrature
from :mod:`hybridchsh.fock` (x <= 0 -> -1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError
from .fock import quadrature_povm
from .hilbert import HybridState, expectation, kron
from .model import ATOM_AUX, ATOM_G, ATOM_S, StateParams

ENTRY_TOL = 1e-12
SUM_TOL = 1e-10


@dataclass(frozen=True)
class AtomSetting:
    """Projective atomic measurement direction, plus the aux assignment."""

    alpha: float
    varphi: float = 0.0
    aux_outcome: int = -1

    def __post_init__(self):
        if self.aux_outcome not in (-1, 1):
            raise DomainError(f"aux_outcome must be -1 or +1, got {self.aux_outcome}")


@dataclass(frozen=True)
class Counting:
    """Photon counting with efficiency eta_d; a click is outcome +1."""

    eta_d: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.eta_d <= 1.0:
            raise DomainError(f"eta_d must lie in [0, 1], got {self.eta_d}")


@dataclass(frozen=True)
class Quadrature:
    """Sign-binned quadrature at angle zeta; x <= 0 is outcome -1."""

    zeta: float = 0.0


OpticalMeasurement = Union[Counting, Quadrature]


def atom_effects(setting: AtomSetting, atom_dim: int = 2
                 ) -> tuple[np.ndarray, np.ndarray]:
    """(plus, minus) effects of the atomic measurement on C^atom_dim."""
    if atom_dim not in (2, 3):
        raise DomainError(f"atom_dim must be 2 or 3, got {atom_dim}")
    half = 0.5 * setting.alpha
    v = np.zeros(atom_dim, dtype=complex)
    v[ATOM_G] = math.cos(half)
    v[ATOM_S] = math.sin(half) * np.exp(1j * setting.varphi)
    plus = np.outer(v, v.conj())
    minus = np.eye(atom_dim, dtype=complex) - plus
    if atom_dim == 3 and setting.aux_outcome == 1:
        # I - |v><v| contains the aux projector; move it to the + side.
        aux = np.zeros((atom_dim, atom_dim), dtype=complex)
        aux[ATOM_AUX, ATOM_AUX] = 1.0
        plus = plus + aux
        minus = minus - aux
    return plus, minus


def optical_effects(measurement: OpticalMeasurement
                    ) -> tuple[np.ndarray, np.ndarray]:
    """(plus, minus) effects of the optical measurement on the mode."""
    if isinstance(measurement, Counting):
        click = np.diag([0.0, measurement.eta_d]).astype(complex)
        return click, np.eye(2, dtype=complex) - click
    if isinstance(measurement, Quadrature):
        povm = quadrature_povm(measurement.zeta)
        return povm.e_plus, povm.e_minus
    raise DomainError(f"unknown optical measurement {measurement!r}")


@dataclass(frozen=True)
class ProbTable:
    """Joint outcome probabilities p(a, b) for a, b in {+1, -1}."""

    pp: float
    pm: float
    mp: float
    mm: float

    def __post_init__(self):
        entries = (self.pp, self.pm, self.mp, self.mm)
        if min(entries) < -ENTRY_TOL:
            raise DomainError(f"negative probability beyond tolerance: {entries}")
        if abs(sum(entries) - 1.0) > SUM_TOL:
            raise DomainError(f"probabilities sum to {sum(entries)!r}, not 1")

    @property
    def alice_marginal_plus(self) -> float:
        return self.pp + self.pm

    @property
    def bob_marginal_plus(self) -> float:
        return self.pp + self.mp


def joint_probs(state: HybridState, setting: AtomSetting,
                measurement: OpticalMeasurement) -> ProbTable:
    """Joint probability table of the two +-1 outcomes."""
    a_plus, a_minus = atom_effects(setting, state.atom_dim)
    b_plus, b_minus = optical_effects(measurement)
    probs = [expectation(state.rho, kron(a, b)).real
             for a in (a_plus, a_minus) for b in (b_plus, b_minus)]
    return ProbTable(pp=probs[0], pm=probs[1], mp=probs[2], mm=probs[3])


def correlator(table: ProbTable) -> float:
    """Expectation of the product of the two outcomes."""
    return table.pp - table.pm - table.mp + table.mm


def correlator_closed_form(params: StateParams, setting: AtomSetting,
                           measurement: OpticalMeasurement) -> float:
    """Analytic correlator on the ideal lossless state.

    Counting gives -cos(alpha) for any theta; the sign-binned quadrature
    gives sqrt(2/pi) * sin(alpha) * sin(2*theta) * cos(varphi - phi + zeta).
    Only the ideal case is covered: counting must have eta_d = 1.
    """
    if isinstance(measurement, Counting):
        if measurement.eta_d != 1.0:
            raise DomainError(
                "closed form covers the ideal case only (eta_d = 1), got "
                f"eta_d = {measurement.eta_d}")
        return -math.cos(setting.alpha)
    if isinstance(measurement, Quadrature):
        return (math.sqrt(2.0 / math.pi) * math.sin(setting.alpha)
                * math.sin(2.0 * params.theta)
                * math.cos(setting.varphi - params.phi + measurement.zeta))
    raise DomainError(f"unknown optical measurement {measurement!r}")
