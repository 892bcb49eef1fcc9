"""Discrete donor ensembles: rate matrices, fidelity, maps and greedy placement.

Rates are "reduced": every physical prefactor is dropped, so only ratios
such as the superradiant fidelity carry meaning.
"""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import CoincidentPoints, DegenerateEnsemble, EmptyGrid, NonUnitDipole
from .greens import EPS_SEP, Regime, check_unit, green_batch

MAP_CHUNK = 4096


@dataclass(frozen=True)
class IsotropicAverage:
    """Donors and acceptor randomly oriented: Gamma_ij = Tr[G_i G_j^dagger]."""


@dataclass(frozen=True)
class FixedDipoles:
    """Fixed acceptor dipole ``d_a`` and one donor dipole per donor."""

    d_a: tuple
    d_d: tuple

    def __post_init__(self):
        object.__setattr__(self, "d_a", tuple(check_unit(self.d_a, "acceptor dipole")))
        d_d = tuple(tuple(check_unit(d, f"donor dipole {i}")) for i, d in enumerate(self.d_d))
        if not d_d:
            raise NonUnitDipole("at least one donor dipole is required")
        object.__setattr__(self, "d_d", d_d)


Orientation = Union[IsotropicAverage, FixedDipoles]


@dataclass
class DonorEnsemble:
    positions: np.ndarray
    orientation: Orientation = field(default_factory=IsotropicAverage)
    regime: Regime = Regime.FULL

    def __post_init__(self):
        self.positions = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if self.positions.ndim != 2 or self.positions.shape[1] != 3 or len(self.positions) < 1:
            raise ValueError("positions must be a non-empty (N, 3) array")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("positions must be finite")
        self.regime = Regime(self.regime)
        if isinstance(self.orientation, FixedDipoles) and len(self.orientation.d_d) != self.n:
            raise NonUnitDipole(
                f"FixedDipoles has {len(self.orientation.d_d)} donor dipoles for {self.n} donors"
            )

    @property
    def n(self):
        return len(self.positions)


@dataclass(frozen=True)
class FidelityResult:
    gamma_sr: float
    gamma_incoherent: float
    n: float
    fidelity: float


def _check_separations(positions, acceptor, eps_sep):
    dist = np.linalg.norm(positions - np.asarray(acceptor, dtype=float), axis=-1)
    bad = np.flatnonzero(dist < eps_sep)
    if bad.size:
        raise CoincidentPoints(f"donor {bad[0]} coincides with the acceptor", index=int(bad[0]))


def donor_greens(ensemble, acceptor, eps_sep=EPS_SEP):
    """G(r_A, r_Di) for every donor, shape (N, 3, 3)."""
    _check_separations(ensemble.positions, acceptor, eps_sep)
    return green_batch(np.asarray(acceptor, dtype=float), ensemble.positions, ensemble.regime, eps_sep)


def rate_matrix(ensemble, acceptor, eps_sep=EPS_SEP):
    """N x N Hermitian PSD matrix of reduced pair rates Gamma_ij."""
    greens = donor_greens(ensemble, acceptor, eps_sep)
    if isinstance(ensemble.orientation, FixedDipoles):
        d_a = np.asarray(ensemble.orientation.d_a)
        d_d = np.asarray(ensemble.orientation.d_d)
        amp = np.einsum("k,nkl,nl->n", d_a, greens, d_d)
        return np.outer(amp, np.conj(amp))
    flat = greens.reshape(len(greens), 9)
    return flat @ flat.conj().T


def fidelity_from_matrix(gamma):
    """Fidelity of a rate matrix: sum of all entries over N times its trace."""
    gamma = np.asarray(gamma)
    n = gamma.shape[0]
    gamma_sr = float(np.sum(gamma).real)
    gamma_inc = float(np.trace(gamma).real)
    if gamma_inc <= 0.0:
        raise DegenerateEnsemble("incoherent rate vanished")
    return FidelityResult(gamma_sr, gamma_inc, n, gamma_sr / (n * gamma_inc))


def fidelity(ensemble, acceptor, eps_sep=EPS_SEP):
    """Superradiant fidelity of an ensemble.

    Uses sum_ij Gamma_ij = |sum_i a_i|^2 (or ||sum_i G_i||_F^2 when averaged
    over orientations), so the N x N matrix is never formed.
    """
    greens = donor_greens(ensemble, acceptor, eps_sep)
    sr, inc = _coherent_and_incoherent(greens[None], ensemble.orientation)
    sr, inc = float(sr[0]), float(inc[0])
    if inc <= 0.0:
        raise DegenerateEnsemble("incoherent rate vanished")
    return FidelityResult(sr, inc, ensemble.n, sr / (ensemble.n * inc))


def _coherent_and_incoherent(greens, orientation):
    """Coherent and incoherent totals summed over donors (axis 1).

    ``greens`` has shape (P, N, 3, 3); returns (gamma_sr, gamma_inc) of shape (P,).
    """
    if isinstance(orientation, FixedDipoles):
        d_a = np.asarray(orientation.d_a)
        d_d = np.asarray(orientation.d_d)
        if len(d_d) == 1:
            d_d = np.broadcast_to(d_d, (greens.shape[1], 3))
        amp = np.einsum("k,pnkl,nl->pn", d_a, greens, d_d)
        return np.abs(amp.sum(axis=1)) ** 2, np.sum(np.abs(amp) ** 2, axis=1)
    total = greens.sum(axis=1)
    sr = np.sum(total.real**2 + total.imag**2, axis=(-2, -1))
    inc = np.sum(greens.real**2 + greens.imag**2, axis=(-3, -2, -1))
    return sr, inc


def _run_chunks(func, n_items, threads):
    """Evaluate ``func(start, stop)`` over fixed-size chunks, results in index order."""
    bounds = [(s, min(s + MAP_CHUNK, n_items)) for s in range(0, n_items, MAP_CHUNK)]
    if threads == 1 or len(bounds) == 1:
        parts = [func(a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=threads or None) as pool:
            parts = list(pool.map(lambda ab: func(*ab), bounds))
    return np.concatenate(parts)


def fidelity_map(ensemble, grid, mask_radius=EPS_SEP, threads=1):
    """Fidelity for each acceptor position in ``grid`` (donors fixed).

    Points closer than ``mask_radius`` (at least ``EPS_SEP``) to any donor are
    masked with NaN.  Values do not depend on ``threads``.
    """
    grid = np.asarray(grid, dtype=float).reshape(-1, 3)
    if len(grid) == 0:
        raise EmptyGrid("acceptor grid is empty")
    radius = max(mask_radius, EPS_SEP)
    donors = ensemble.positions

    def chunk(a, b):
        pts = grid[a:b]
        dist = np.linalg.norm(pts[:, None, :] - donors[None, :, :], axis=-1)
        ok = np.all(dist >= radius, axis=1)
        out = np.full(len(pts), np.nan)
        if np.any(ok):
            greens = green_batch(pts[ok][:, None, :], donors[None, :, :], ensemble.regime)
            sr, inc = _coherent_and_incoherent(greens, ensemble.orientation)
            out[ok] = sr / (ensemble.n * inc)
        return out

    return _run_chunks(chunk, len(grid), threads)


def second_donor_map(donor1, acceptor, grid, orientation=None, regime=Regime.FULL,
                     mask_radius=EPS_SEP, threads=1):
    """Two-donor fidelity with donor 1 fixed and donor 2 at each grid point.

    Grid points within ``mask_radius`` of the acceptor are masked with NaN.
    """
    orientation = orientation or IsotropicAverage()
    regime = Regime(regime)
    grid = np.asarray(grid, dtype=float).reshape(-1, 3)
    if len(grid) == 0:
        raise EmptyGrid("donor grid is empty")
    acceptor = np.asarray(acceptor, dtype=float)
    _check_separations(np.asarray(donor1, dtype=float)[None, :], acceptor, EPS_SEP)
    g1 = green_batch(acceptor, np.asarray(donor1, dtype=float), regime)
    radius = max(mask_radius, EPS_SEP)

    def chunk(a, b):
        pts = grid[a:b]
        ok = np.linalg.norm(pts - acceptor, axis=1) >= radius
        out = np.full(len(pts), np.nan)
        if np.any(ok):
            g2 = green_batch(acceptor, pts[ok], regime)
            greens = np.stack([np.broadcast_to(g1, g2.shape), g2], axis=1)
            sr, inc = _coherent_and_incoherent(greens, orientation)
            out[ok] = sr / (2 * inc)
        return out

    return _run_chunks(chunk, len(grid), threads)


@dataclass
class GreedyResult:
    indices: list
    positions: np.ndarray
    fidelities: list


def greedy_path(k, donor_grid, acceptor, orientation=None, regime=Regime.FULL):
    """Place ``k`` donors one at a time on grid sites, maximizing fidelity.

    Each site holds at most one donor.  Ties go to the lowest grid index.
    For ``FixedDipoles`` a single donor dipole is shared by every site.
    """
    orientation = orientation or IsotropicAverage()
    grid = np.asarray(donor_grid, dtype=float).reshape(-1, 3)
    if len(grid) == 0:
        raise EmptyGrid("donor grid is empty")
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > len(grid):
        raise ValueError(f"cannot place {k} donors on {len(grid)} sites")
    _check_separations(grid, acceptor, EPS_SEP)
    greens = green_batch(np.asarray(acceptor, dtype=float), grid, regime)
    if isinstance(orientation, FixedDipoles):
        if len(orientation.d_d) != 1:
            raise NonUnitDipole("greedy placement takes exactly one shared donor dipole")
        feats = np.einsum("k,mkl,l->m", np.asarray(orientation.d_a), greens,
                          np.asarray(orientation.d_d[0]))[:, None]
    else:
        feats = greens.reshape(len(grid), 9)
    site_inc = np.sum(np.abs(feats) ** 2, axis=1)

    total = np.zeros(feats.shape[1], dtype=complex)
    inc = 0.0
    used = np.zeros(len(grid), dtype=bool)
    indices, fids = [], []
    for step in range(1, k + 1):
        cand = total[None, :] + feats
        score = np.sum(np.abs(cand) ** 2, axis=1) / (step * (inc + site_inc))
        score[used] = -np.inf
        best = int(np.argmax(score))
        used[best] = True
        total = total + feats[best]
        inc += site_inc[best]
        indices.append(best)
        fids.append(float(score[best]))
    return GreedyResult(indices, grid[indices], fids)


def greedy_place(k, donor_grid, acceptor, orientation=None, regime=Regime.FULL):
    """Greedy placements in order, as an array of shape (k, 3)."""
    return greedy_path(k, donor_grid, acceptor, orientation, regime).positions


def ring_grid(radius, n_points, center=(0.0, 0.0, 0.0)):
    """``n_points`` equally spaced sites on a circle in the xy plane, angle 0 first."""
    theta = 2.0 * np.pi * np.arange(n_points) / n_points
    pts = np.zeros((n_points, 3))
    pts[:, 0] = radius * np.cos(theta)
    pts[:, 1] = radius * np.sin(theta)
    return pts + np.asarray(center, dtype=float)


def circle_ensemble(n, radius, angles: Optional[Sequence[float]] = None,
                    orientation=None, regime=Regime.FULL):
    if angles is None:
        pts = ring_grid(radius, n)
    else:
        angles = np.asarray(angles, dtype=float)
        pts = np.stack([radius * np.cos(angles), radius * np.sin(angles), np.zeros_like(angles)], axis=1)
    return DonorEnsemble(pts, orientation or IsotropicAverage(), regime)


def plane_grid(half_width, resolution, center=(0.0, 0.0)):
    """Square xy grid (z=0), row-major with x varying fastest."""
    xs = np.linspace(center[0] - half_width, center[0] + half_width, resolution)
    ys = np.linspace(center[1] - half_width, center[1] + half_width, resolution)
    xx, yy = np.meshgrid(xs, ys)
    return np.stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)], axis=1)
