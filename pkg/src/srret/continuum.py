"""Continuous donor densities: deterministic quadrature and Monte Carlo.

The coherent rate is a double volume integral over donor pairs.  Because the
isotropic pair coupling is a trace pairing, it factorizes: with
``K = integral n(r) G(r_A, r) dV`` the coherent rate is ``Tr[K K^dagger]``.
Only single integrals are ever evaluated.
"""
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Tuple, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import AcceptorInsideSupport, InvalidDistribution
from .greens import EPS_SEP, Regime, green_batch
from .rates import FidelityResult

MC_CHUNK = 10_000


@dataclass(frozen=True)
class UniformBall:
    center: Tuple[float, float, float]
    radius: float
    density: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0 or not self.density > 0:
            raise InvalidDistribution("ball radius and density must be positive")

    @property
    def inner(self):
        return 0.0

    @property
    def outer(self):
        return self.radius


@dataclass(frozen=True)
class SphericalShell:
    center: Tuple[float, float, float]
    inner: float
    outer: float
    density: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not (0.0 <= self.inner < self.outer) or not self.density > 0:
            raise InvalidDistribution(
                f"need 0 <= inner < outer and density > 0, got {self.inner}, {self.outer}"
            )


Component = Union[UniformBall, SphericalShell]


@dataclass(frozen=True)
class UnionOf:
    parts: Tuple[Component, ...]

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise InvalidDistribution("union needs at least one component")
        for i, p in enumerate(parts):
            if isinstance(p, UnionOf):
                raise InvalidDistribution("nested unions are not supported")
            for q in parts[i + 1:]:
                if not _disjoint(p, q):
                    raise InvalidDistribution("union components overlap")
        object.__setattr__(self, "parts", parts)


Distribution = Union[UniformBall, SphericalShell, UnionOf]


def _disjoint(p, q):
    d = math.dist(p.center, q.center)
    if d >= p.outer + q.outer:
        return True
    # one component nested inside the other's cavity
    return d + p.outer <= q.inner or d + q.outer <= p.inner


def components(dist):
    return dist.parts if isinstance(dist, UnionOf) else (dist,)


def volume(comp):
    return 4.0 * math.pi / 3.0 * (comp.outer**3 - comp.inner**3)


def total_number(dist):
    """Total donor count N_tot = density x volume, summed over components."""
    return sum(c.density * volume(c) for c in components(dist))


@dataclass(frozen=True)
class QuadratureSpec:
    radial_order: int = 32
    polar_order: int = 32
    azimuthal_order: int = 64
    mc_samples: int = 200_000
    mc_seed: int = 0

    def __post_init__(self):
        if min(self.radial_order, self.polar_order, self.azimuthal_order) < 4:
            raise ValueError("quadrature orders must be >= 4")
        if self.mc_samples < 1000:
            raise ValueError("mc_samples must be >= 1000")

    def refined(self, factor=2):
        return QuadratureSpec(self.radial_order * factor, self.polar_order * factor,
                              self.azimuthal_order * factor, self.mc_samples, self.mc_seed)


def check_acceptor(dist, acceptor, eps_sep=EPS_SEP):
    acceptor = np.asarray(acceptor, dtype=float)
    for comp in components(dist):
        d = float(np.linalg.norm(acceptor - np.asarray(comp.center)))
        inside_cavity = comp.inner > 0 and d <= comp.inner - eps_sep
        if not inside_cavity and d < comp.outer + eps_sep:
            raise AcceptorInsideSupport(
                f"acceptor at distance {d:g} from the centre of {comp!r} lies in or on its support"
            )


def _frame(axis):
    """Orthonormal basis (columns) whose third vector is ``axis``."""
    axis = axis / np.linalg.norm(axis)
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = np.cross(axis, helper)
    u /= np.linalg.norm(u)
    v = np.cross(axis, u)
    return np.stack([u, v, axis], axis=1)


@lru_cache(maxsize=32)
def _gauss(n):
    return leggauss(n)


def radial_panels(inner, outer, max_ratio=2.0, max_width=8.0):
    """Panel edges: geometric where outer/inner is large (the incoherent
    integrand behaves like r^-4 near a cavity), and no wider than
    ``max_width`` so the e^{ir} phase stays resolved."""
    if inner > 0 and outer / inner > max_ratio:
        n = math.ceil(math.log(outer / inner) / math.log(max_ratio))
        edges = list(inner * (outer / inner) ** (np.arange(n + 1) / n))
    else:
        edges = [inner, outer]
    out = [edges[0]]
    for hi in edges[1:]:
        lo = out[-1]
        k = max(1, math.ceil((hi - lo) / max_width))
        out.extend(lo + (hi - lo) * np.arange(1, k + 1) / k)
    out[-1] = outer
    return np.array(out)


def quadrature_nodes(comp, acceptor, quad):
    """Spherical product rule for one component; returns (points, weights).

    The polar axis points from the component centre toward the acceptor.
    Weights include the density.  Shape (R, P, A, 3) and (R, P, A), where R
    is ``radial_order`` times the number of radial panels.
    """
    center = np.asarray(comp.center)
    offset = np.asarray(acceptor, dtype=float) - center
    axis = offset if np.linalg.norm(offset) > 0 else np.array([0.0, 0.0, 1.0])
    basis = _frame(axis)

    xr, wr_ref = _gauss(quad.radial_order)
    r, wr = [], []
    edges = radial_panels(comp.inner, comp.outer)
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes = lo + half * (xr + 1.0)
        r.append(nodes)
        wr.append(wr_ref * half * nodes**2)
    r = np.concatenate(r)
    wr = np.concatenate(wr)
    mu, wmu = _gauss(quad.polar_order)
    phi = 2.0 * np.pi * np.arange(quad.azimuthal_order) / quad.azimuthal_order
    wphi = 2.0 * np.pi / quad.azimuthal_order

    s = np.sqrt(1.0 - mu**2)
    unit = np.stack([s[:, None] * np.cos(phi)[None, :],
                     s[:, None] * np.sin(phi)[None, :],
                     np.broadcast_to(mu[:, None], (len(mu), len(phi)))], axis=-1)
    unit = unit @ basis.T
    pts = center + r[:, None, None, None] * unit[None]
    w = comp.density * wr[:, None, None] * wmu[None, :, None] * wphi
    return pts, np.broadcast_to(w, pts.shape[:-1])


def _integrate(dist, acceptor, regime, quad):
    """Return (K, gamma_incoherent) by quadrature, summing in a fixed order."""
    check_acceptor(dist, acceptor)
    acceptor = np.asarray(acceptor, dtype=float)
    regime = Regime(regime)
    kernel = np.zeros((3, 3), dtype=complex)
    inc = 0.0
    for comp in components(dist):
        pts, w = quadrature_nodes(comp, acceptor, quad)
        for i in range(len(pts)):
            g = green_batch(acceptor, pts[i], regime)
            kernel += np.einsum("pa,pakl->kl", w[i], g)
            inc += float(np.sum(w[i] * np.sum(g.real**2 + g.imag**2, axis=(-2, -1))))
    return kernel, inc


def kernel_integral(dist, acceptor, regime=Regime.FULL, quad=QuadratureSpec()):
    """K = integral of n(r) G(r_A, r) dV."""
    return _integrate(dist, acceptor, regime, quad)[0]


def gamma_sr_continuum(dist, acceptor, regime=Regime.FULL, quad=QuadratureSpec()):
    k = kernel_integral(dist, acceptor, regime, quad)
    return float(np.sum(k.real**2 + k.imag**2))


def gamma_incoherent_continuum(dist, acceptor, regime=Regime.FULL, quad=QuadratureSpec()):
    return _integrate(dist, acceptor, regime, quad)[1]


def fidelity_continuum(dist, acceptor, regime=Regime.FULL, quad=QuadratureSpec()):
    k, inc = _integrate(dist, acceptor, regime, quad)
    sr = float(np.sum(k.real**2 + k.imag**2))
    n_tot = total_number(dist)
    return FidelityResult(sr, inc, n_tot, sr / (n_tot * inc))


@dataclass(frozen=True)
class MCFidelityResult(FidelityResult):
    stderr: float = float("nan")
    samples: int = 0


def _sample_component(comp, rng, m):
    u = rng.random(m)
    r = np.cbrt(comp.inner**3 + u * (comp.outer**3 - comp.inner**3))
    direction = rng.standard_normal((m, 3))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    return np.asarray(comp.center) + r[:, None] * direction


def _mc_chunk(dist, acceptor, regime, seed_seq, m):
    """Per-chunk sums of G (flattened) and of Tr[G G^dagger]."""
    rng = np.random.Generator(np.random.Philox(seed_seq))
    comps = components(dist)
    weights = np.array([c.density * volume(c) for c in comps])
    which = rng.choice(len(comps), size=m, p=weights / weights.sum())
    sum_g = np.zeros(9, dtype=complex)
    sum_t = 0.0
    for idx, comp in enumerate(comps):
        cnt = int(np.count_nonzero(which == idx))
        if cnt == 0:
            continue
        pts = _sample_component(comp, rng, cnt)
        g = green_batch(acceptor, pts, regime).reshape(cnt, 9)
        sum_g += g.sum(axis=0)
        sum_t += float(np.sum(g.real**2 + g.imag**2))
    return sum_g, sum_t


def mc_fidelity(dist, acceptor, regime=Regime.FULL, quad=QuadratureSpec()):
    """Monte Carlo estimate of the continuum fidelity with a jackknife error.

    Samples are drawn from the donor density.  The coherent rate uses the
    unbiased estimator (|sum G|^2 - sum |G|^2) / (M (M - 1)) of |E[G]|^2, so
    the fidelity estimate can dip slightly below zero when the true value is 0.
    Each chunk of ``MC_CHUNK`` samples has its own Philox stream spawned from
    ``quad.mc_seed``; the result is independent of how chunks are scheduled.
    """
    check_acceptor(dist, acceptor)
    acceptor = np.asarray(acceptor, dtype=float)
    regime = Regime(regime)
    m_total = quad.mc_samples
    sizes = [MC_CHUNK] * (m_total // MC_CHUNK)
    if m_total % MC_CHUNK:
        sizes.append(m_total % MC_CHUNK)
    seeds = np.random.SeedSequence(quad.mc_seed).spawn(len(sizes))
    chunks = [_mc_chunk(dist, acceptor, regime, s, m) for s, m in zip(seeds, sizes)]
    sum_g = np.array([c[0] for c in chunks])
    sum_t = np.array([c[1] for c in chunks])
    counts = np.array(sizes, dtype=float)

    def estimate(g, t, m):
        coh = (np.sum(np.abs(g) ** 2) - t) / (m * (m - 1.0))
        return coh, t / m

    coh, mean_t = estimate(sum_g.sum(axis=0), sum_t.sum(), counts.sum())
    fid = coh / mean_t
    b = len(sizes)
    if b > 1:
        loo = np.empty(b)
        for j in range(b):
            c_j, t_j = estimate(sum_g.sum(axis=0) - sum_g[j], sum_t.sum() - sum_t[j],
                                counts.sum() - counts[j])
            loo[j] = c_j / t_j
        stderr = float(np.sqrt((b - 1) / b * np.sum((loo - loo.mean()) ** 2)))
    else:
        stderr = float("nan")
    n_tot = total_number(dist)
    return MCFidelityResult(float(n_tot**2 * coh), float(n_tot * mean_t), n_tot, float(fid),
                            stderr=stderr, samples=m_total)


def discretize(dist, n_radial, n_polar, n_azimuthal):
    """Equal-volume cell centres of a midpoint rule in spherical coordinates.

    Radial cells have equal volume, polar cells equal solid angle.  Returns
    (points, counts) where ``counts[i]`` is the donor number in cell ``i``.
    Within one component all cells carry the same count.
    """
    pts, counts = [], []
    for comp in components(dist):
        edges = np.cbrt(np.linspace(comp.inner**3, comp.outer**3, n_radial + 1))
        r = np.cbrt(0.5 * (edges[:-1] ** 3 + edges[1:] ** 3))
        mu = -1.0 + (2.0 * np.arange(n_polar) + 1.0) / n_polar
        phi = 2.0 * np.pi * (np.arange(n_azimuthal) + 0.5) / n_azimuthal
        s = np.sqrt(1.0 - mu**2)
        unit = np.stack([s[:, None] * np.cos(phi), s[:, None] * np.sin(phi),
                         np.broadcast_to(mu[:, None], (n_polar, n_azimuthal))], axis=-1)
        p = np.asarray(comp.center) + r[:, None, None, None] * unit[None]
        pts.append(p.reshape(-1, 3))
        n_cells = n_radial * n_polar * n_azimuthal
        counts.append(np.full(n_cells, comp.density * volume(comp) / n_cells))
    return np.concatenate(pts), np.concatenate(counts)
