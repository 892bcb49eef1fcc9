"""Vacuum dyadic Green's tensor in dimensionless units.

All lengths are measured in units of c/omega, so a separation ``x`` is the
phase ``omega * rho / c``.  Physical prefactors are dropped throughout; only
ratios of rates are meaningful.
"""
from enum import Enum

import numpy as np

from .errors import CoincidentPoints, NonUnitDipole

EPS_SEP = 1e-9
UNIT_TOL = 1e-12

_EYE = np.eye(3)


class Regime(str, Enum):
    FULL = "full"
    NONRETARDED = "nonretarded"


def _radial_factors(x, regime):
    """Return (prefactor, f, g) for separations ``x`` (array)."""
    if regime is Regime.NONRETARDED:
        pref = -1.0 / (4.0 * np.pi * x**3)
        one = np.ones_like(x)
        return pref.astype(complex), one, 3.0 * one
    pref = -np.exp(1j * x) / (4.0 * np.pi * x**3)
    f = 1.0 - 1j * x - x**2
    g = 3.0 - 3j * x - x**2
    return pref, f, g


def green_batch(obs, src, regime=Regime.FULL, eps_sep=EPS_SEP):
    """Green's tensors between broadcastable point arrays.

    ``obs`` and ``src`` have shape (..., 3); the result has shape (..., 3, 3).
    Raises :class:`CoincidentPoints` if any separation is below ``eps_sep``.
    """
    regime = Regime(regime)
    rho = np.asarray(obs, dtype=float) - np.asarray(src, dtype=float)
    x = np.asarray(np.linalg.norm(rho, axis=-1))
    if np.any(x < eps_sep):
        raise CoincidentPoints(f"points closer than eps_sep={eps_sep:g}")
    e = rho / x[..., None]
    pref, f, g = (np.asarray(v) for v in _radial_factors(x, regime))
    ee = e[..., :, None] * e[..., None, :]
    return pref[..., None, None] * (f[..., None, None] * _EYE - g[..., None, None] * ee)


def green_vacuum(obs, src, regime=Regime.FULL, eps_sep=EPS_SEP):
    """Single 3x3 complex Green's tensor G(obs, src).

    Symmetric by construction and reciprocal: swapping ``obs`` and ``src``
    gives the identical tensor.
    """
    obs = np.asarray(obs, dtype=float)
    src = np.asarray(src, dtype=float)
    if obs.shape != (3,) or src.shape != (3,):
        raise ValueError("obs and src must be 3-vectors")
    if not (np.all(np.isfinite(obs)) and np.all(np.isfinite(src))):
        raise ValueError("positions must be finite")
    return green_batch(obs, src, regime, eps_sep)


def trace_pair(g1, g2):
    """Tr[g1 . g2^dagger]; the isotropically averaged pair coupling."""
    g1 = np.asarray(g1)
    g2 = np.asarray(g2)
    return complex(np.sum(g1 * np.conj(g2)))


def check_unit(d, name="dipole"):
    d = np.asarray(d, dtype=float)
    if d.shape != (3,) or abs(np.linalg.norm(d) - 1.0) > UNIT_TOL:
        raise NonUnitDipole(f"{name} must be a unit 3-vector, got {d!r}")
    return d


def amplitude(obs, src, d_a, d_d, regime=Regime.FULL, eps_sep=EPS_SEP):
    """Transfer amplitude d_a . G(obs, src) . d_d for fixed dipoles."""
    d_a = check_unit(d_a, "acceptor dipole")
    d_d = check_unit(d_d, "donor dipole")
    return complex(d_a @ green_vacuum(obs, src, regime, eps_sep) @ d_d)
