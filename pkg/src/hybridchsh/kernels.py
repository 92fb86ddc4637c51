"""Hot numerical kernels: scenario evaluation and simplex maximization.

Everything here operates on a flat float64 "spec vector" so the same
code runs under numba's @njit or as plain numpy, selected once at import
time. Set the environment variable ``HYBRIDCHSH_DISABLE_NUMBA=1`` before
importing to force the pure-numpy fallback; ``NUMBA_ACTIVE`` reports
which path is live. The compiled and fallback paths are the same source,
so they agree bit for bit; ``benchmarks/kernel_benchmark.py`` compares
their throughput.

Spec vector layout (indices are load-bearing; keep in sync with
chsh.Scenario.to_spec_vector):

  0 theta        5 f_s          10 aux1 (+-1)     15 bob1 eta_d
  1 phi          6 f_g          11 alpha2         16 bob1 zeta
  2 eta_t        7 f_aux        12 varphi2        17 bob2 kind
  3 fidelity     8 alpha1       13 aux2 (+-1)     18 bob2 eta_d
  4 branching    9 varphi1      14 bob1 kind      19 bob2 zeta

"branching" is 0.0 or 1.0; measurement "kind" is 0.0 for counting and
1.0 for the sign-binned quadrature.
"""
from __future__ import annotations

import math
import os

import numpy as np

IDX_THETA = 0
IDX_PHI = 1
IDX_ETA_T = 2
IDX_FIDELITY = 3
IDX_BRANCHING = 4
IDX_F_S = 5
IDX_F_G = 6
IDX_F_AUX = 7
IDX_ALPHA1 = 8
IDX_VARPHI1 = 9
IDX_AUX1 = 10
IDX_ALPHA2 = 11
IDX_VARPHI2 = 12
IDX_AUX2 = 13
IDX_BOB1_KIND = 14
IDX_BOB1_ETA_D = 15
IDX_BOB1_ZETA = 16
IDX_BOB2_KIND = 17
IDX_BOB2_ETA_D = 18
IDX_BOB2_ZETA = 19
SPEC_LEN = 20

KIND_COUNTING = 0.0
KIND_QUADRATURE = 1.0


def _numba_requested() -> bool:
    return os.environ.get("HYBRIDCHSH_DISABLE_NUMBA", "").strip().lower() not in (
        "1", "true", "yes", "on")


NUMBA_ACTIVE = False
if _numba_requested():
    try:
        from numba import njit

        NUMBA_ACTIVE = True
    except ImportError:
        NUMBA_ACTIVE = False

if not NUMBA_ACTIVE:
    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def python_impl(func):
    """Uncompiled version of a kernel (the function itself on the fallback path)."""
    return getattr(func, "py_func", func)


@njit(cache=True)
def _fill_state(spec, rho):
    """Write the post-channel density matrix into rho (6x6, zeroed here).

    Returns the atom dimension (2 or 3). The emitted states populate only
    g0, s0, s1, aux0 and the g0<->s1 coherence, so loss and dephasing
    reduce to the explicit entry updates below; the general numpy channel
    implementations in model.py are the reference this must match.
    """
    for i in range(6):
        for j in range(6):
            rho[i, j] = 0.0 + 0.0j
    theta = spec[IDX_THETA]
    phi = spec[IDX_PHI]
    eta_t = spec[IDX_ETA_T]
    fidelity = spec[IDX_FIDELITY]
    branching = spec[IDX_BRANCHING] > 0.5
    c = math.cos(theta)
    s = math.sin(theta)
    if branching:
        f_s = spec[IDX_F_S]
        rho[0, 0] = c * c + s * s * spec[IDX_F_G]
        rho[4, 4] = s * s * spec[IDX_F_AUX]
        pop_s1 = s * s * f_s
        coh_mag = c * s * math.sqrt(f_s)
        atom_dim = 3
    else:
        rho[0, 0] = c * c
        pop_s1 = s * s
        coh_mag = c * s
        atom_dim = 2
    # transmission loss moves (1 - eta_t) of the s1 population to s0 and
    # scales the g0<->s1 coherence by sqrt(eta_t)
    rho[2, 2] = (1.0 - eta_t) * pop_s1
    rho[3, 3] = eta_t * pop_s1
    coh = (coh_mag * math.sqrt(eta_t) * (2.0 * fidelity - 1.0)
           * np.exp(-1j * phi))
    rho[0, 3] = coh
    rho[3, 0] = np.conj(coh)
    return atom_dim


@njit(cache=True)
def _fill_atom_diff(alpha, varphi, aux_outcome, atom_dim, out):
    """Write A(+1) - A(-1) of the atomic setting into out (3x3, zeroed)."""
    for i in range(3):
        for j in range(3):
            out[i, j] = 0.0 + 0.0j
    ca = math.cos(alpha)
    sa = math.sin(alpha)
    out[0, 0] = ca
    out[1, 1] = -ca
    out[0, 1] = sa * np.exp(-1j * varphi)
    out[1, 0] = sa * np.exp(1j * varphi)
    if atom_dim == 3:
        out[2, 2] = aux_outcome


@njit(cache=True)
def _fill_bob_diff(kind, eta_d, zeta, out):
    """Write B(+1) - B(-1) of the optical measurement into out (2x2)."""
    if kind < 0.5:
        out[0, 0] = -1.0 + 0.0j
        out[0, 1] = 0.0j
        out[1, 0] = 0.0j
        out[1, 1] = 2.0 * eta_d - 1.0 + 0.0j
    else:
        vis = math.sqrt(2.0 / math.pi)
        out[0, 0] = 0.0j
        out[1, 1] = 0.0j
        out[0, 1] = vis * np.exp(-1j * zeta)
        out[1, 0] = vis * np.exp(1j * zeta)


@njit(cache=True)
def _contract(rho, adiff, bdiff, atom_dim):
    """Re Tr[rho (adiff x bdiff)] over the atom-major joint index."""
    acc = 0.0 + 0.0j
    for i in range(atom_dim):
        for j in range(atom_dim):
            a = adiff[j, i]
            if a == 0.0:
                continue
            for k in range(2):
                for l in range(2):
                    acc += rho[2 * i + k, 2 * j + l] * a * bdiff[l, k]
    return acc.real


@njit(cache=True)
def correlators_from_spec(spec):
    """Four correlators (E11, E12, E21, E22) of a spec vector."""
    rho = np.empty((6, 6), dtype=np.complex128)
    a1 = np.empty((3, 3), dtype=np.complex128)
    a2 = np.empty((3, 3), dtype=np.complex128)
    b1 = np.empty((2, 2), dtype=np.complex128)
    b2 = np.empty((2, 2), dtype=np.complex128)
    atom_dim = _fill_state(spec, rho)
    _fill_atom_diff(spec[IDX_ALPHA1], spec[IDX_VARPHI1], spec[IDX_AUX1],
                    atom_dim, a1)
    _fill_atom_diff(spec[IDX_ALPHA2], spec[IDX_VARPHI2], spec[IDX_AUX2],
                    atom_dim, a2)
    _fill_bob_diff(spec[IDX_BOB1_KIND], spec[IDX_BOB1_ETA_D],
                   spec[IDX_BOB1_ZETA], b1)
    _fill_bob_diff(spec[IDX_BOB2_KIND], spec[IDX_BOB2_ETA_D],
                   spec[IDX_BOB2_ZETA], b2)
    e11 = _contract(rho, a1, b1, atom_dim)
    e12 = _contract(rho, a1, b2, atom_dim)
    e21 = _contract(rho, a2, b1, atom_dim)
    e22 = _contract(rho, a2, b2, atom_dim)
    return e11, e12, e21, e22


@njit(cache=True)
def chsh_from_spec(spec):
    """S = E11 + E12 + E21 - E22."""
    e11, e12, e21, e22 = correlators_from_spec(spec)
    return e11 + e12 + e21 - e22


@njit(cache=True)
def _neg_chsh(spec, free_idx, x):
    work = spec.copy()
    for t in range(free_idx.size):
        work[free_idx[t]] = x[t]
    return -chsh_from_spec(work)


@njit(cache=True)
def _clip(x, lo, hi):
    out = np.empty_like(x)
    for i in range(x.size):
        v = x[i]
        if v < lo[i]:
            v = lo[i]
        elif v > hi[i]:
            v = hi[i]
        out[i] = v
    return out


@njit(cache=True)
def nelder_mead(spec, free_idx, lo, hi, x0, xatol, fatol, max_evals):
    """Bounded simplex maximization of S over the free parameters.

    Candidate points are projected onto the box [lo, hi]. Returns
    (best_s, best_x, n_evals, converged). Standard reflection /
    expansion / contraction / shrink coefficients (1, 2, 0.5, 0.5).
    """
    d = x0.size
    sim = np.empty((d + 1, d))
    fv = np.empty(d + 1)
    sim[0] = _clip(x0, lo, hi)
    for i in range(d):
        pt = sim[0].copy()
        step = 0.05 * (hi[i] - lo[i])
        pt[i] += step
        if pt[i] > hi[i]:
            pt[i] = sim[0][i] - step
        sim[i + 1] = pt
    for i in range(d + 1):
        fv[i] = _neg_chsh(spec, free_idx, sim[i])
    n_evals = d + 1
    converged = False
    while True:
        order = np.argsort(fv)
        sim = sim[order]
        fv = fv[order]
        fspread = 0.0
        xspread = 0.0
        for i in range(1, d + 1):
            df = abs(fv[i] - fv[0])
            if df > fspread:
                fspread = df
            for j in range(d):
                dx = abs(sim[i, j] - sim[0, j])
                if dx > xspread:
                    xspread = dx
        if fspread <= fatol and xspread <= xatol:
            converged = True
            break
        if n_evals >= max_evals:
            break
        centroid = np.zeros(d)
        for i in range(d):
            for j in range(d):
                centroid[j] += sim[i, j]
        centroid /= d
        xr = _clip(centroid + (centroid - sim[d]), lo, hi)
        fr = _neg_chsh(spec, free_idx, xr)
        n_evals += 1
        if fr < fv[0]:
            xe = _clip(centroid + 2.0 * (centroid - sim[d]), lo, hi)
            fe = _neg_chsh(spec, free_idx, xe)
            n_evals += 1
            if fe < fr:
                sim[d] = xe
                fv[d] = fe
            else:
                sim[d] = xr
                fv[d] = fr
        elif fr < fv[d - 1]:
            sim[d] = xr
            fv[d] = fr
        else:
            if fr < fv[d]:
                xc = _clip(centroid + 0.5 * (xr - centroid), lo, hi)
                fc = _neg_chsh(spec, free_idx, xc)
                n_evals += 1
                if fc <= fr:
                    sim[d] = xc
                    fv[d] = fc
                else:
                    for i in range(1, d + 1):
                        sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
                        fv[i] = _neg_chsh(spec, free_idx, sim[i])
                    n_evals += d
            else:
                xc = _clip(centroid - 0.5 * (centroid - sim[d]), lo, hi)
                fc = _neg_chsh(spec, free_idx, xc)
                n_evals += 1
                if fc < fv[d]:
                    sim[d] = xc
                    fv[d] = fc
                else:
                    for i in range(1, d + 1):
                        sim[i] = sim[0] + 0.5 * (sim[i] - sim[0])
                        fv[i] = _neg_chsh(spec, free_idx, sim[i])
                    n_evals += d
    best = 0
    for i in range(1, d + 1):
        if fv[i] < fv[best]:
            best = i
    return -fv[best], sim[best].copy(), n_evals, converged


@njit(cache=True)
def multistart_maximize(spec, free_idx, lo, hi, starts, xatol, fatol,
                        max_evals_per_start):
    """Run nelder_mead from every row of ``starts``.

    Returns (s_values, x_matrix, converged_flags); the caller reduces.
    """
    n = starts.shape[0]
    d = starts.shape[1]
    s_values = np.empty(n)
    x_matrix = np.empty((n, d))
    conv = np.zeros(n, dtype=np.bool_)
    for i in range(n):
        s_i, x_i, _, ok = nelder_mead(spec, free_idx, lo, hi, starts[i],
                                      xatol, fatol, max_evals_per_start)
        s_values[i] = s_i
        x_matrix[i] = x_i
        conv[i] = ok
    return s_values, x_matrix, conv
