"""Dense linear algebra for the joint atom-mode Hilbert space.

States live on C^(atom_dim) x C^2 with atom-major index ordering:
row = atom_index * 2 + photon_number. Dimensions never exceed 6, so
everything is dense complex128.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-12
EIGENVALUE_TOL = -1e-10

MODE_DIM = 2


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with the atom factor on the left."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def expectation(rho: np.ndarray, op: np.ndarray) -> complex:
    """Tr(rho @ op)."""
    rho = np.asarray(rho)
    op = np.asarray(op)
    if rho.shape != op.shape or rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise DomainError(f"shape mismatch: rho {rho.shape} vs op {op.shape}")
    return complex(np.trace(rho @ op))


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.asarray(a)).T


@dataclass(frozen=True)
class StateValidation:
    """Deviation report for the density-matrix invariants."""

    hermiticity_dev: float
    trace_dev: float
    min_eigenvalue: float

    @property
    def passed(self) -> bool:
        return (self.hermiticity_dev <= HERMITICITY_TOL
                and self.trace_dev <= TRACE_TOL
                and self.min_eigenvalue >= EIGENVALUE_TOL)


@dataclass(frozen=True)
class HybridState:
    """Density matrix of one atom (dim 2 or 3) and one optical mode (dim 2)."""

    atom_dim: int
    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.atom_dim not in (2, 3):
            raise DomainError(f"atom_dim must be 2 or 3, got {self.atom_dim}")
        rho = np.asarray(self.rho, dtype=complex)
        dim = self.atom_dim * MODE_DIM
        if rho.shape != (dim, dim):
            raise DomainError(f"rho must be {dim}x{dim}, got {rho.shape}")
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.atom_dim * MODE_DIM


def validate_state(state: HybridState) -> StateValidation:
    """Check Hermiticity, unit trace, and positive semidefiniteness.

    Positivity is decided from the eigenvalues of the Hermitized matrix,
    so the report stays meaningful even when Hermiticity itself fails.
    """
    rho = state.rho
    herm_dev = float(np.max(np.abs(rho - dagger(rho))))
    trace_dev = float(abs(np.trace(rho) - 1.0))
    eigs = np.linalg.eigvalsh(0.5 * (rho + dagger(rho)))
    return StateValidation(herm_dev, trace_dev, float(eigs.min()))
