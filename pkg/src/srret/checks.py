"""Oracle suite run by ``srret validate``.

Each check compares two independent routes (closed form, discrete sum,
quadrature, Monte Carlo) at a fixed tolerance and reports a record.
"""
import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from . import analytic, continuum, rates
from .greens import Regime, green_vacuum

CIRCLE_COLLAPSE = 62355.0 / 83532.0
TWO_SPHERE = 27.0 / 64.0


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    expected: float
    tolerance: float
    seconds: float = 0.0
    note: str = ""

    def to_dict(self):
        d = asdict(self)
        d["passed"] = bool(d["passed"])
        for key in ("value", "expected", "tolerance"):
            d[key] = float(d[key])
            if not math.isfinite(d[key]):
                d[key] = None
        return d


def _close(name, value, expected, tol, note=""):
    return Check(name, bool(abs(value - expected) <= tol), float(value), float(expected), tol, note=note)


def circle_collapse():
    worst = 0.0
    for n in range(3, 11):
        f = rates.fidelity(rates.circle_ensemble(n, 12.0), np.zeros(3)).fidelity
        worst = max(worst, abs(f - CIRCLE_COLLAPSE))
    f2 = rates.fidelity(rates.circle_ensemble(2, 12.0), np.zeros(3)).fidelity
    ok = worst <= 1e-10 and abs(f2 - 1.0) <= 1e-12
    return Check("circle_collapse", ok, worst, 0.0, 1e-10, note=f"N=2 gives {f2:.17g}")


def circle_limits():
    lo = analytic.circle_closed(1e-4)
    hi = analytic.circle_closed(1e4)
    err = max(abs(lo - 0.25), abs(hi - 0.75))
    return Check("circle_limits", err <= 1e-6, err, 0.0, 1e-6)


def two_sphere(seed=0, samples=200_000):
    two = continuum.UnionOf((continuum.UniformBall((0, 0, 2), 1.0),
                             continuum.UniformBall((0, 0, -2), 1.0)))
    quad = continuum.QuadratureSpec(mc_samples=samples, mc_seed=seed)
    det = continuum.fidelity_continuum(two, np.zeros(3), Regime.NONRETARDED, quad).fidelity
    mc = continuum.mc_fidelity(two, np.zeros(3), Regime.NONRETARDED, quad)
    return [
        _close("two_sphere_quadrature", det, TWO_SPHERE, 1e-8),
        _close("two_sphere_monte_carlo", mc.fidelity, TWO_SPHERE, 3 * mc.stderr,
               note=f"stderr={mc.stderr:.3g}, seed={seed}"),
    ]


def single_sphere():
    ball = continuum.UniformBall((0, 0, 2), 1.0)
    f = continuum.fidelity_continuum(ball, np.zeros(3), Regime.NONRETARDED).fidelity
    return _close("single_sphere", f, TWO_SPHERE, 1e-8)


def two_vs_one():
    bad, flagged = 0, 0
    for z0 in np.linspace(1.1, 10.0, 50):
        f_two = analytic.two_sphere_fidelity_nr(z0, 1.0)
        try:
            f_one = analytic.two_sphere_fidelity_nr(z0, 2.0 ** (1 / 3))
        except analytic.AcceptorInsideSphere:
            flagged += 1
            continue
        bad += not f_two > f_one
    return Check("two_vs_one_dominance", bad == 0, float(bad), 0.0, 0.0,
                 note=f"{flagged} rows flagged: single sphere encloses the acceptor")


def shell_theorem():
    shell = continuum.SphericalShell((0, 0, 0), 1.0, 2.0)
    worst = 0.0
    for acc in ([0.0, 0.0, 0.0], [0.5, 0.0, 0.0]):
        r = continuum.fidelity_continuum(shell, np.array(acc), Regime.NONRETARDED)
        worst = max(worst, r.gamma_sr / r.gamma_incoherent)
    return Check("shell_theorem", worst <= 1e-8, worst, 0.0, 1e-8)


def shell_closed_form():
    out = []
    for a, b in ((1.0, 2.0), (5.0, 6.0), (50.0, 51.0)):
        shell = continuum.SphericalShell((0, 0, 0), a, b)
        f = continuum.fidelity_continuum(shell, np.zeros(3), Regime.FULL).fidelity
        ref = analytic.shell_fidelity(analytic.ShellParams(a, b))
        rel = abs(f - ref) / ref
        out.append(Check(f"shell_closed_form_{a:g}_{b:g}", rel <= 1e-6, rel, 0.0, 1e-6,
                         note=f"quadrature {f:.10f} vs published formula {ref:.10f}"))
    thin = continuum.SphericalShell((0, 0, 0), 100.0, 100.5)
    f = continuum.fidelity_continuum(thin, np.zeros(3), Regime.FULL).fidelity
    rel = abs(f - analytic.THIN_SHELL_LIMIT) / analytic.THIN_SHELL_LIMIT
    out.append(Check("thin_shell_limit", rel <= 0.01, rel, 0.0, 0.01, note=f"quadrature {f:.10f}"))
    return out


def dicke_and_incoherent():
    worst = 0.0
    for n in range(1, 11):
        ens = rates.DonorEnsemble(np.tile([0.3, -0.4, 0.8], (n, 1)))
        gamma = rates.rate_matrix(ens, np.zeros(3))
        res = rates.fidelity_from_matrix(gamma)
        single = float(gamma[0, 0].real)
        worst = max(worst, abs(res.fidelity - 1.0), abs(res.gamma_sr / (n * n * single) - 1.0))
        diag = rates.fidelity_from_matrix(np.diag(np.diag(gamma))).fidelity
        worst = max(worst, abs(diag - 1.0 / n))
    return Check("dicke_and_incoherent", worst <= 1e-12, worst, 0.0, 1e-12)


def properties(seed=0, cases=100):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(cases):
        n = int(rng.integers(1, 8))
        pts = rng.normal(size=(n, 3)) * 2.0
        acc = rng.normal(size=3)
        ens = rates.DonorEnsemble(pts)
        gamma = rates.rate_matrix(ens, acc)
        scale = np.max(np.abs(gamma))
        worst = max(worst, np.max(np.abs(gamma - gamma.conj().T)) / scale)
        worst = max(worst, max(0.0, -np.linalg.eigvalsh(gamma).min()) / scale)
        f = rates.fidelity_from_matrix(gamma).fidelity
        worst = max(worst, max(0.0, -f), max(0.0, f - 1.0 - 1e-12))
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        f_rot = rates.fidelity(rates.DonorEnsemble(pts @ q.T), q @ acc).fidelity
        worst = max(worst, abs(f - f_rot))
        nr = rates.DonorEnsemble(pts, regime=Regime.NONRETARDED)
        lam = float(rng.uniform(0.1, 10.0))
        f_nr = rates.fidelity(nr, acc).fidelity
        f_sc = rates.fidelity(rates.DonorEnsemble(lam * pts, regime=Regime.NONRETARDED), lam * acc).fidelity
        worst = max(worst, abs(f_nr - f_sc))
        a, b = rng.normal(size=3), rng.normal(size=3)
        g_ab = green_vacuum(a, b)
        worst = max(worst, np.max(np.abs(g_ab - green_vacuum(b, a))))
        g_rot = green_vacuum(q @ a, q @ b)
        worst = max(worst, np.max(np.abs(g_rot - q @ g_ab @ q.T)) / np.max(np.abs(g_ab)))
    return Check("property_suite", worst <= 1e-12, float(worst), 0.0, 1e-12, note=f"{cases} cases")


def quadrature_refinement():
    two = continuum.UnionOf((continuum.UniformBall((0, 0, 2), 1.0),
                             continuum.UniformBall((0, 0, -2), 1.0)))
    quad = continuum.QuadratureSpec()
    f1 = continuum.fidelity_continuum(two, np.zeros(3), Regime.NONRETARDED, quad).fidelity
    f2 = continuum.fidelity_continuum(two, np.zeros(3), Regime.NONRETARDED, quad.refined()).fidelity
    return Check("quadrature_refinement", abs(f1 - f2) < 1e-8, abs(f1 - f2), 0.0, 1e-8)


def cluster_angles(angles, tol):
    """Group angles (radians) into clusters whose members lie within ``tol``
    of the cluster's first member.  Returns a list of circular-mean centres
    and a list of member counts."""
    centers, members = [], []
    for ang in angles:
        for i, c in enumerate(centers):
            if abs(math.remainder(ang - c[0], 2 * math.pi)) <= tol:
                c.append(ang)
                members[i] += 1
                break
        else:
            centers.append([ang])
            members.append(1)
    means = [math.atan2(np.mean(np.sin(c)), np.mean(np.cos(c))) for c in centers]
    return means, members


def greedy_dumbbell(points=720, k=6, radius=1.0):
    grid = rates.ring_grid(radius, points)
    res = rates.greedy_path(k, grid, np.zeros(3), regime=Regime.NONRETARDED)
    angles = [2 * math.pi * i / points for i in res.indices]
    cell = 2 * math.pi / points
    means, members = cluster_angles(angles, tol=10 * cell)
    if len(means) != 2:
        return Check("greedy_dumbbell", False, float(len(means)), 2.0, 0.0, note=f"clusters {members}")
    sep = abs(abs(math.remainder(means[0] - means[1], 2 * math.pi)) - math.pi)
    return Check("greedy_dumbbell", sep <= cell, sep, 0.0, cell, note=f"cluster sizes {members}")


def run_all(seed=0):
    report = []

    def timed(fn, *args):
        t0 = time.perf_counter()
        out = fn(*args)
        out = out if isinstance(out, list) else [out]
        dt = time.perf_counter() - t0
        for c in out:
            c.seconds = dt
        report.extend(out)

    timed(circle_collapse)
    timed(circle_limits)
    timed(two_sphere, seed)
    timed(single_sphere)
    timed(two_vs_one)
    timed(shell_theorem)
    timed(shell_closed_form)
    timed(dicke_and_incoherent)
    timed(properties, seed)
    timed(quadrature_refinement)
    timed(greedy_dumbbell)
    return report
