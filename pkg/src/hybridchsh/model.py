"""State preparation and imperfection channels.

The source emits cos(theta)|g,0> + exp(i*phi) sin(theta)|s,1> where g, s
are atomic levels and the second slot counts photons in one mode. Decay
into levels other than s (branching) replaces the photon-carrying term
by a classical mixture over final atomic levels; transmission loss is
amplitude damping on the mode; imperfect interferometric phase shows up
as dephasing of the g,0 <-> s,1 coherence.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .hilbert import MODE_DIM, HybridState, dagger

PROB_SUM_TOL = 1e-12

# Atom level ordering. Joint index = atom_index * MODE_DIM + photon_number.
ATOM_G = 0
ATOM_S = 1
ATOM_AUX = 2


def joint_index(atom: int, photons: int) -> int:
    return atom * MODE_DIM + photons


@dataclass(frozen=True)
class StateParams:
    """Superposition angle and phase of the emitted state."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.theta <= math.pi / 2.0 + 1e-15:
            raise DomainError(f"theta must lie in [0, pi/2], got {self.theta}")
        object.__setattr__(self, "phi", float(self.phi) % (2.0 * math.pi))


@dataclass(frozen=True)
class Imperfections:
    """Experimental imperfections applied on top of the ideal state.

    eta_t: transmission of the optical channel.
    eta_d: photon-counter efficiency (used when a counting measurement
        is built from this description; the sign-binned quadrature is
        treated as unit-efficiency).
    f_s, f_g, f_aux: branching ratios of the decay that produces the
        photon; they must sum to one. f_s = 1 with zero f_g, f_aux keeps
        the two-level atom description.
    fidelity: coherence fidelity; the g,0 <-> s,1 coherence is scaled by
        (2*fidelity - 1).
    """

    eta_t: float = 1.0
    eta_d: float = 1.0
    f_s: float = 1.0
    f_g: float = 0.0
    f_aux: float = 0.0
    fidelity: float = 1.0

    def __post_init__(self):
        for name in ("eta_t", "eta_d", "f_s", "f_g", "f_aux"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise DomainError(f"{name} must lie in [0, 1], got {val}")
        if not 0.5 <= self.fidelity <= 1.0:
            raise DomainError(
                f"fidelity must lie in [0.5, 1], got {self.fidelity}")
        total = self.f_s + self.f_g + self.f_aux
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise DomainError(f"branching ratios must sum to 1, got {total!r}")

    @property
    def needs_aux_level(self) -> bool:
        return self.f_g != 0.0 or self.f_aux != 0.0


@dataclass(frozen=True)
class TrapParams:
    """Motional parameters of the trapped atom.

    width: rms spread of the motional ground state (m).
    n_bar: mean phonon occupation.
    k_norm: optical wavenumber magnitude (1/m).
    emission_angle: angle between absorbed and emitted photon directions.
    """

    width: float
    n_bar: float
    k_norm: float
    emission_angle: float

    def __post_init__(self):
        if self.width < 0.0 or self.n_bar < 0.0 or self.k_norm < 0.0:
            raise DomainError("width, n_bar, and k_norm must be nonnegative")


def ideal_state(params: StateParams) -> HybridState:
    """Pure state cos(theta)|g,0> + exp(i*phi) sin(theta)|s,1>."""
    amp = np.zeros(4, dtype=complex)
    amp[joint_index(ATOM_G, 0)] = math.cos(params.theta)
    amp[joint_index(ATOM_S, 1)] = math.sin(params.theta) * np.exp(1j * params.phi)
    return HybridState(atom_dim=2, rho=np.outer(amp, amp.conj()))


def _loss_kraus(eta_t: float) -> tuple[np.ndarray, np.ndarray]:
    keep = np.array([[1.0, 0.0], [0.0, math.sqrt(eta_t)]], dtype=complex)
    decay = np.array([[0.0, math.sqrt(1.0 - eta_t)], [0.0, 0.0]], dtype=complex)
    return keep, decay


def apply_loss(state: HybridState, eta_t: float) -> HybridState:
    """Amplitude damping of the optical mode with transmission eta_t."""
    if not 0.0 <= eta_t <= 1.0:
        raise DomainError(f"eta_t must lie in [0, 1], got {eta_t}")
    eye = np.eye(state.atom_dim, dtype=complex)
    out = np.zeros_like(state.rho)
    for k in _loss_kraus(eta_t):
        full = np.kron(eye, k)
        out += full @ state.rho @ dagger(full)
    return HybridState(atom_dim=state.atom_dim, rho=out)


def branching_state(params: StateParams, f_s: float, f_g: float,
                    f_aux: float) -> HybridState:
    """Emitted state when the decay branches over final atomic levels.

    The f_s branch keeps the coherent photon-carrying superposition
    (with the excited amplitude scaled by sqrt(f_s)); the f_g and f_aux
    branches leave the atom in g or aux with no photon in the mode.
    """
    total = f_s + f_g + f_aux
    if min(f_s, f_g, f_aux) < 0.0 or abs(total - 1.0) > PROB_SUM_TOL:
        raise DomainError(
            f"branching ratios must be nonnegative and sum to 1, got "
            f"({f_s}, {f_g}, {f_aux})")
    c, s = math.cos(params.theta), math.sin(params.theta)
    amp = np.zeros(6, dtype=complex)
    amp[joint_index(ATOM_G, 0)] = c
    amp[joint_index(ATOM_S, 1)] = s * math.sqrt(f_s) * np.exp(1j * params.phi)
    rho = np.outer(amp, amp.conj())
    rho[joint_index(ATOM_G, 0), joint_index(ATOM_G, 0)] += s * s * f_g
    rho[joint_index(ATOM_AUX, 0), joint_index(ATOM_AUX, 0)] += s * s * f_aux
    return HybridState(atom_dim=3, rho=rho)


def apply_dephasing(state: HybridState, fidelity: float) -> HybridState:
    """Scale every coherence involving |s,1> by (2*fidelity - 1).

    Equivalent to mixing the state with its image under a sign flip of
    the |s,1> amplitude, weighted (fidelity, 1 - fidelity). Diagonal
    entries are untouched exactly.
    """
    if not 0.5 <= fidelity <= 1.0:
        raise DomainError(f"fidelity must lie in [0.5, 1], got {fidelity}")
    scale = 2.0 * fidelity - 1.0
    rho = state.rho.copy()
    s1 = joint_index(ATOM_S, 1)
    for i in range(state.dim):
        if i != s1:
            rho[i, s1] *= scale
            rho[s1, i] *= scale
    return HybridState(atom_dim=state.atom_dim, rho=rho)


def motional_fidelity(trap: TrapParams, exponent: str = "as-written") -> float:
    """Coherence fidelity left by photon recoil on the trapped atom.

    The momentum mismatch between absorbed and emitted photons is
    delta_k = k_norm * (1 - cos(emission_angle)). Two variants of the
    decay exponent are provided: "as-written" uses
    2 * width^2 * (n_bar + 1/2) * delta_k, which leaves the exponent
    carrying a residual length unit; "squared" uses delta_k^2, the
    dimensionally consistent form. Both return 1 exactly at zero
    emission angle.
    """
    delta_k = trap.k_norm * (1.0 - math.cos(trap.emission_angle))
    if exponent == "as-written":
        arg = 2.0 * trap.width ** 2 * (trap.n_bar + 0.5) * delta_k
    elif exponent == "squared":
        arg = 2.0 * trap.width ** 2 * (trap.n_bar + 0.5) * delta_k ** 2
    else:
        raise DomainError(
            f'exponent must be "as-written" or "squared", got {exponent!r}')
    return 0.5 * (1.0 + math.exp(-arg))
