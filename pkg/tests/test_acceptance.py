"""Exit criteria, one test each; verdicts are listed in the pytest summary."""
import math
import time

import numpy as np
import pytest

from srret import Regime, green_vacuum
from srret.analytic import (THIN_SHELL_LIMIT, AcceptorInsideSphere, ShellParams, circle_closed,
                            shell_fidelity, two_sphere_fidelity_nr)
from srret.checks import cluster_angles
from srret.continuum import (QuadratureSpec, SphericalShell, UniformBall, UnionOf,
                             fidelity_continuum, mc_fidelity)
from srret.rates import (DonorEnsemble, circle_ensemble, fidelity, fidelity_from_matrix,
                         greedy_path, rate_matrix, ring_grid)

O = np.zeros(3)
NR = Regime.NONRETARDED
SEED = 20240611


def two_balls(z0=2.0, r=1.0):
    return UnionOf((UniformBall((0, 0, z0), r), UniformBall((0, 0, -z0), r)))


def test_c01_circle_collapse(criterion):
    t0 = time.perf_counter()
    errs = [abs(fidelity(circle_ensemble(n, 12.0), O).fidelity - 62355 / 83532) for n in range(3, 11)]
    err2 = abs(fidelity(circle_ensemble(2, 12.0), O).fidelity - 1.0)
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-10 and err2 <= 1e-12 and dt < 1.0
    criterion("1 circle collapse", ok,
              f"max|F-62355/83532|={max(errs):.2e} (tol 1e-10), N=2 err={err2:.2e} (tol 1e-12), {dt:.3f}s (<1s)")
    assert ok


def test_c02_circle_limits(criterion):
    lo, hi = circle_closed(1e-4), circle_closed(1e4)
    ok = abs(lo - 0.25) <= 1e-6 and abs(hi - 0.75) <= 1e-6
    criterion("2 circle limits", ok, f"F(1e-4)={lo:.10f}, F(1e4)={hi:.10f} (tol 1e-6)")
    assert ok


def test_c03_two_sphere_electrostatic(criterion):
    t0 = time.perf_counter()
    quad = QuadratureSpec(mc_samples=200_000, mc_seed=0)
    det = fidelity_continuum(two_balls(), O, NR, quad).fidelity
    mc = mc_fidelity(two_balls(), O, NR, quad)
    dt = time.perf_counter() - t0
    ok = abs(det - 27 / 64) <= 1e-8 and abs(mc.fidelity - 27 / 64) <= 3 * mc.stderr and dt < 10
    criterion("3 two-sphere electrostatic", ok,
              f"quadrature err={abs(det - 27 / 64):.2e} (tol 1e-8); MC {mc.fidelity:.5f}±{mc.stderr:.5f}"
              f" ({abs(mc.fidelity - 27 / 64) / mc.stderr:.2f} sigma, tol 3); {dt:.2f}s (<10s)")
    assert ok


def test_c04_single_sphere_equivalence(criterion):
    one = fidelity_continuum(UniformBall((0, 0, 2), 1.0), O, NR).fidelity
    two = fidelity_continuum(two_balls(), O, NR).fidelity
    ok = abs(one - two) <= 1e-8 and abs(one - 27 / 64) <= 1e-8
    criterion("4 single-sphere equivalence", ok, f"|F_one-F_two|={abs(one - two):.2e} (tol 1e-8)")
    assert ok


def test_c05_two_vs_one_dominance(criterion):
    r0 = 1.0
    rows, flagged, violations = 0, 0, 0
    for z0 in np.linspace(1.1, 10.0, 50):
        f_two = two_sphere_fidelity_nr(z0, r0)
        assert 0 < f_two <= 1
        try:
            f_one = two_sphere_fidelity_nr(z0, 2 ** (1 / 3) * r0)
        except AcceptorInsideSphere:
            flagged += 1
            continue
        rows += 1
        violations += not f_two > f_one
    ok = violations == 0 and rows + flagged == 50
    criterion("5 two-vs-one dominance", ok,
              f"{rows} comparable rows, {violations} violations, {flagged} flagged (single sphere encloses acceptor)")
    assert ok


def test_c06_shell_theorem_suppression(criterion):
    t0 = time.perf_counter()
    shell = SphericalShell(O, 1.0, 2.0)
    ratios = [fidelity_continuum(shell, np.array(acc), NR) for acc in ([0, 0, 0], [0.5, 0, 0])]
    ratios = [r.gamma_sr / r.gamma_incoherent for r in ratios]
    dt = time.perf_counter() - t0
    ok = max(ratios) <= 1e-8 and dt < 10
    criterion("6 shell-theorem suppression", ok,
              f"gamma_sr/gamma_inc centre={ratios[0]:.1e}, offset={ratios[1]:.1e} (tol 1e-8), {dt:.2f}s")
    assert ok


def test_c07_shell_closed_form(criterion):
    details, ok = [], True
    for a, b in ((1.0, 2.0), (5.0, 6.0), (50.0, 51.0)):
        f = fidelity_continuum(SphericalShell(O, a, b), O, Regime.FULL).fidelity
        ref = shell_fidelity(ShellParams(a, b))
        rel = abs(f - ref) / ref
        ok &= rel <= 1e-6
        details.append(f"({a:g},{b:g}) quad={f:.6f} formula={ref:.6f} rel={rel:.1e}")
    thin = fidelity_continuum(SphericalShell(O, 100.0, 100.5), O, Regime.FULL).fidelity
    rel_thin = abs(thin - THIN_SHELL_LIMIT) / THIN_SHELL_LIMIT
    ok &= rel_thin <= 0.01
    details.append(f"thin (100,100.5) quad={thin:.6f} vs 16/(3pi^2)={THIN_SHELL_LIMIT:.6f} rel={rel_thin:.1e}")
    criterion("7 shell closed form (tol 1e-6 rel; thin 1%)", ok, "; ".join(details))
    assert ok


def test_c08_dicke_and_incoherent(criterion):
    worst = 0.0
    for n in range(1, 21):
        ens = DonorEnsemble(np.tile([0.7, 0.1, -1.3], (n, 1)))
        gamma = rate_matrix(ens, O)
        single = fidelity(DonorEnsemble([[0.7, 0.1, -1.3]]), O).gamma_sr
        res = fidelity(ens, O)
        worst = max(worst, abs(res.fidelity - 1), abs(res.gamma_sr / (n * n * single) - 1),
                    abs(fidelity_from_matrix(gamma).fidelity - 1))
        incoherent = fidelity_from_matrix(np.diag(np.diag(gamma))).fidelity
        worst = max(worst, abs(incoherent - 1 / n))
    ok = worst <= 1e-12
    criterion("8 Dicke and incoherent anchors", ok, f"max deviation {worst:.1e} (tol 1e-12)")
    assert ok


def _rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    return q if np.linalg.det(q) > 0 else -q


def test_c09_property_suite(criterion):
    rng = np.random.default_rng(SEED)
    cases = 100
    worst = {"hermitian": 0.0, "psd": 0.0, "F_range": 0.0, "rotation": 0.0,
             "nr_scale": 0.0, "reciprocity": 0.0, "covariance": 0.0}
    for _ in range(cases):
        n = int(rng.integers(1, 9))
        pts = rng.normal(size=(n, 3)) * rng.uniform(0.1, 20)
        acc = rng.normal(size=3)
        regime = NR if rng.random() < 0.5 else Regime.FULL
        gamma = rate_matrix(DonorEnsemble(pts, regime=regime), acc)
        scale = np.max(np.abs(gamma))
        worst["hermitian"] = max(worst["hermitian"], np.max(np.abs(gamma - gamma.conj().T)) / scale)
        worst["psd"] = max(worst["psd"], max(0.0, -np.linalg.eigvalsh(gamma).min()) / scale)
        f = fidelity_from_matrix(gamma).fidelity
        worst["F_range"] = max(worst["F_range"], -f, f - 1)

        q = _rotation(rng)
        f_iso = fidelity(DonorEnsemble(pts), acc).fidelity
        f_rot = fidelity(DonorEnsemble(pts @ q.T), q @ acc).fidelity
        worst["rotation"] = max(worst["rotation"], abs(f_iso - f_rot))

        lam = float(rng.uniform(0.05, 20))
        f_nr = fidelity(DonorEnsemble(pts, regime=NR), acc).fidelity
        f_sc = fidelity(DonorEnsemble(lam * pts, regime=NR), lam * acc).fidelity
        worst["nr_scale"] = max(worst["nr_scale"], abs(f_nr - f_sc))

        a, b = rng.normal(size=3) * 3, rng.normal(size=3) * 3
        g = green_vacuum(a, b, regime)
        worst["reciprocity"] = max(worst["reciprocity"], np.max(np.abs(g - green_vacuum(b, a, regime))))
        g_rot = green_vacuum(q @ a, q @ b, regime)
        worst["covariance"] = max(worst["covariance"], np.max(np.abs(g_rot - q @ g @ q.T)) / np.max(np.abs(g)))

    quad = QuadratureSpec()
    refine = 0.0
    for _ in range(cases):
        r = float(rng.uniform(0.3, 1.0))
        z0 = r * float(rng.uniform(2.0, 4.0))
        f1 = fidelity_continuum(two_balls(z0, r), O, NR, quad).fidelity
        f2 = fidelity_continuum(two_balls(z0, r), O, NR, quad.refined()).fidelity
        refine = max(refine, abs(f1 - f2))
    ok = max(worst.values()) <= 1e-12 and refine < 1e-8
    summary = ", ".join(f"{k}={v:.1e}" for k, v in worst.items())
    criterion("9 property suite", ok, f"{cases} cases each: {summary} (tol 1e-12); "
                                      f"quadrature refinement={refine:.1e} (tol 1e-8)")
    assert ok


def test_c10_greedy_dumbbell(criterion):
    points = 720
    res = greedy_path(6, ring_grid(1.0, points), O, regime=NR)
    cell = 2 * math.pi / points
    means, members = cluster_angles([cell * i for i in res.indices], tol=10 * cell)
    sep = abs(abs(math.remainder(means[0] - means[1], 2 * math.pi)) - math.pi) if len(means) == 2 else math.inf
    ok = len(means) == 2 and sep <= cell
    criterion("10 greedy dumbbell", ok,
              f"placements {res.indices}, clusters {members}, |separation-pi|={sep:.1e} (tol one cell {cell:.2e})")
    assert ok
