"""Closed-form fidelities for symmetric donor geometries."""
import math
from dataclasses import dataclass

import numpy as np

from .errors import AcceptorInsideSphere, BadAngles, BadShell

THIN_SHELL_LIMIT = 16.0 / (3.0 * math.pi**2)
SERIES_GAP = 1e-4


@dataclass(frozen=True)
class ShellParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (0.0 <= self.alpha < self.beta) or not math.isfinite(self.beta):
            raise BadShell(f"need 0 <= alpha < beta, got alpha={self.alpha}, beta={self.beta}")


def circle_fidelity(n, x, angles=None):
    """Fidelity for ``n`` donors on a circle of radius ``x`` around the acceptor.

    ``angles`` defaults to equal spacing.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if angles is None:
        angles = 2.0 * np.pi * np.arange(n) / n
    angles = np.asarray(angles, dtype=float)
    if angles.shape != (n,):
        raise BadAngles(f"expected {n} angles, got {angles.size}")
    diff = 2.0 * (angles[:, None] - angles[None, :])
    ang_sum = float(np.sum(np.cos(diff)))
    x2 = x * x
    x4 = x2 * x2
    num = n * n * (3.0 + x2 + 3.0 * x4) + (9.0 + 3.0 * x2 + x4) * ang_sum
    return num / (4.0 * n * n * (x4 + x2 + 3.0))


def circle_closed(x):
    """Equally spaced circle with three or more donors; rises from 1/4 to 3/4."""
    x2 = x * x
    x4 = x2 * x2
    return (3.0 * x4 + x2 + 3.0) / (4.0 * (x4 + x2 + 3.0))


def two_sphere_fidelity_nr(z0, r):
    """Electrostatic fidelity of uniform balls of radius ``r`` at distance ``z0``.

    Holds for one ball or a mirror pair either side of the acceptor.
    """
    if not (0.0 < r < z0):
        raise AcceptorInsideSphere(f"need 0 < r < z0, got r={r}, z0={z0}")
    return (z0 - r) ** 3 * (z0 + r) ** 3 / z0**6


def shell_fidelity(p):
    """Hollow-shell fidelity with the acceptor at the centre, as published.

    Near alpha == beta the bracket/(alpha-beta)^2 ratio is replaced by its
    Taylor series to avoid the removable singularity.
    """
    a, b = p.alpha, p.beta
    prefactor = 16.0 * a * b / (math.pi**2 * (a * b * (a * a + a * b + b * b + 3.0) + 9.0))
    gap = b - a
    if gap < SERIES_GAP:
        ratio = a * b + gap * gap * (1.0 / 3.0 - (a * b + 1.0) / 12.0)
    else:
        bracket = (a * a + b * b + 2.0 + 2.0 * (b - a) * math.sin(a - b)
                   - 2.0 * (a * b + 1.0) * math.cos(a - b))
        ratio = bracket / (a - b) ** 2
    return prefactor * ratio


def shell_fidelity_trace(p):
    """Hollow-shell fidelity from direct integration of the isotropic trace model.

    K is proportional to (2/3) * integral of r e^{ir} dr times the identity,
    and the incoherent integrand is (r^4 + r^2 + 3) / r^4 per unit radius.
    Written in terms of the gap so thin shells do not cancel.
    """
    a, b = p.alpha, p.beta
    if a == 0.0:
        return 0.0
    gap = b - a
    half_sinc = math.sin(gap / 2.0) / (gap / 2.0)
    # |I|^2 / gap^2 with |I|^2 = a^2 + b^2 + 2 - 2(1+ab)cos(gap) - 2 gap sin(gap)
    sinc = math.sin(gap) / gap
    mod2 = 1.0 - 2.0 * sinc + (a * b + 1.0) * half_sinc**2
    ab3 = (a * b) ** 3
    shell_sum = a * a + a * b + b * b
    return 2.0 * mod2 * ab3 / (shell_sum * (ab3 + (a * b) ** 2 + shell_sum))
