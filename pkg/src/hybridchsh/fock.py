"""Sign-binned quadrature measurement on a two-level Fock space.

The optical mode is truncated to photon numbers {0, 1}. Measuring the
rotated quadrature x_zeta = cos(zeta) X + sin(zeta) P and keeping only
the sign of the result is a two-outcome POVM; outcome -1 collects the
half line x <= 0 (the boundary point x = 0 carries no measure and is
assigned to -1 by convention), outcome +1 the rest.

In the Fock basis the rotated eigenstate overlaps are
<x_zeta|n> = exp(-i n zeta) * wavefunction(n, x), so the POVM elements
carry closed-form entries built from half-line overlaps of the harmonic
oscillator wavefunctions. ``oracle_halfline`` recomputes the same matrix
elements by direct numerical integration and exists purely as an
independent cross-check; the closed forms never feed it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConvergenceError, DomainError

MAX_PHOTON = 1

# Integration window for the oracle. The n<=1 wavefunction products decay
# like exp(-x^2); beyond |x| ~ 8.6 they are below 1e-16.
ORACLE_CUTOFF = 10.0
ORACLE_ABS_TOL = 1e-10

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def canonical_angle(zeta: float) -> float:
    """Reduce a quadrature angle into [0, 2*pi)."""
    zeta = float(zeta) % (2.0 * math.pi)
    # The modulo can return the period itself through rounding.
    return 0.0 if zeta == 2.0 * math.pi else zeta


def _check_photon_number(n: int) -> int:
    if n not in (0, 1):
        raise DomainError(
            f"photon number {n} unsupported: the mode is hard-truncated to {{0, 1}}")
    return int(n)


def wavefunction(n: int, x):
    """Harmonic-oscillator position wavefunction for photon number n.

    Normalized so that the squared wavefunction integrates to one over
    the real line. Accepts scalar or array ``x``.
    """
    n = _check_photon_number(n)
    x = np.asarray(x, dtype=float)
    gauss = np.exp(-0.5 * x * x) / math.pi ** 0.25
    if n == 0:
        out = gauss
    else:
        out = math.sqrt(2.0) * x * gauss
    return out if out.ndim else float(out)


def halfline_overlap(m: int, n: int) -> float:
    """Integral of wavefunction(m) * wavefunction(n) over x <= 0.

    Closed forms: the diagonal overlaps are 1/2 by parity, and the
    (0, 1) cross term is -1/sqrt(2*pi) from the Gaussian moment.
    """
    m, n = _check_photon_number(m), _check_photon_number(n)
    if m == n:
        return 0.5
    return -_INV_SQRT_2PI


@dataclass(frozen=True)
class HalfLinePovm:
    """Two-outcome POVM of a sign-binned quadrature at angle zeta."""

    zeta: float
    e_minus: np.ndarray = field(repr=False)
    e_plus: np.ndarray = field(repr=False)


def quadrature_povm(zeta: float) -> HalfLinePovm:
    """POVM elements of the sign-binned quadrature at angle ``zeta``.

    The off-diagonal of the -1 element is -exp(-i*zeta)/sqrt(2*pi) in
    the <0|..|1> entry; this sign/phase convention is what makes the
    quadrature correlator carry cos(varphi - phi + zeta) (see
    measure.correlator_closed_form and its equivalence test).
    """
    zeta = canonical_angle(zeta)
    off = -_INV_SQRT_2PI * np.exp(-1j * zeta)
    e_minus = np.array([[0.5, off], [np.conj(off), 0.5]], dtype=complex)
    e_plus = np.eye(2, dtype=complex) - e_minus
    return HalfLinePovm(zeta=zeta, e_minus=e_minus, e_plus=e_plus)


def oracle_halfline(m: int, n: int, zeta: float) -> complex:
    """<m|E_minus(zeta)|n> by direct numerical integration.

    Integrates the phase-rotated wavefunction product
    exp(i*(m-n)*zeta) * wavefunction(m, x) * wavefunction(n, x)
    over the truncated half line [-ORACLE_CUTOFF, 0] with adaptive
    refinement. Raises ConvergenceError if the integrator's own error
    estimate exceeds ORACLE_ABS_TOL.
    """
    m, n = _check_photon_number(m), _check_photon_number(n)
    phase = np.exp(1j * (m - n) * float(zeta))

    def integrand_re(x):
        return (phase * wavefunction(m, x) * wavefunction(n, x)).real

    def integrand_im(x):
        return (phase * wavefunction(m, x) * wavefunction(n, x)).imag

    total = 0.0 + 0.0j
    for part, is_real in ((integrand_re, True), (integrand_im, False)):
        val, err = integrate.quad(part, -ORACLE_CUTOFF, 0.0,
                                  epsabs=1e-13, epsrel=1e-13, limit=200)
        if err > ORACLE_ABS_TOL:
            raise ConvergenceError(
                f"half-line integral error estimate {err:.3e} exceeds "
                f"{ORACLE_ABS_TOL:.1e} for (m={m}, n={n}, zeta={zeta})")
        total += val if is_real else 1j * val
    return complex(total)
