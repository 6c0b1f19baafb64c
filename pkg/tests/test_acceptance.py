"""Acceptance criteria, each checked at its stated tolerance.

Every test records one PASS/FAIL line (collected in the terminal summary
under "acceptance criteria") and fails when the criterion is not met.
"""

import math

import numpy as np
import pytest

from nhblockade.analytics import (
    cpb_non_ep,
    find_eps,
    g2_analytic,
    pathway_report,
    upb_conditions,
    weak_drive_amplitudes,
)
from nhblockade.exceptions import ConditionNotFoundError
from nhblockade.hilbert import FockLayout
from nhblockade.liouville import (
    evolve_to_steady,
    master_rhs,
    steady_by_eigen,
    validate_full_vs_effective,
)
from nhblockade.model import ModelParams, effective_hamiltonian, hermitian_split
from nhblockade.observables import (
    g2_zero,
    photon_distribution,
    probability_trace,
    subspace_spectrum,
)

from conftest import EP_L1, EP_L2, NON_EP_L1, NON_EP_L2

PI = math.pi
LAYOUT = FockLayout([4, 4])
UPB_L2 = 1.4 - 1.0j
FIG3 = [0.1171, 0.1329, 0.3671, 0.3829, 0.6171, 0.6329]
UPB_POINTS = [
    (1.5 - 0.5j, 2.0, 0.1165, 1.9598),
    (1.5 - 0.5j, 3.0, 0.1165, 2.9726),
    (1.6 - 0.5j, 2.0, 0.1132, 1.9855),
    (1.6 - 0.5j, 3.0, 0.1132, 2.9903),
]


def point(l1=EP_L1, l2=EP_L2, mu_over_pi=0.1171, delta=2.0, u=2.0, m=4, **kw):
    return ModelParams(l1, l2, m, mu_over_pi * PI, delta, u, F=0.1, **kw)


def g2_me(p, layout=LAYOUT):
    return g2_zero(steady_by_eigen(p, layout).rho, 0)


def local_minima(x, y):
    return [(x[i], y[i]) for i in range(1, len(y) - 1) if y[i] < y[i - 1] and y[i] < y[i + 1]]


def test_criterion_01_ep_locus(criterion):
    four = np.array(find_eps(EP_L1, EP_L2, 4, n_range=(1, 3, 5)).mu_values) / PI
    two = np.array(find_eps(EP_L1, EP_L2, 2).mu_values) / PI
    err4 = max(abs(four - FIG3)) if len(four) == 6 else math.inf
    err2 = max(min(abs(two - v)) for v in (0.2343, 0.2657))
    ok = err4 <= 5e-4 and err2 <= 5e-4
    criterion(1, "EP locus", ok,
              f"m=4 {np.round(four, 5).tolist()} (max err {err4:.1e} pi); "
              f"m=2 {np.round(two, 5).tolist()} (max err {err2:.1e} pi); tol 5e-4 pi")


def test_criterion_02_cpb_at_ep(criterion):
    cases = {"mu=0.1171pi U=2": point(), "mu=0.1329pi U=2": point(mu_over_pi=0.1329),
             "mu=0.1171pi U=3": point(delta=3.0, u=3.0), "mu=0.1329pi U=3":
             point(mu_over_pi=0.1329, delta=3.0, u=3.0)}
    values = {k: g2_me(p) for k, p in cases.items()}
    ok = all(v < 0.01 for v in values.values())
    criterion(2, "CPB at EP", ok,
              ", ".join(f"{k}: g2={v:.4f}" for k, v in values.items()) + " (need < 0.01)")


def test_criterion_03_bunching_off_ep(criterion):
    g2 = g2_me(point(mu_over_pi=0.0))
    g2_big = g2_me(point(mu_over_pi=0.0), FockLayout([5, 5]))
    criterion(3, "bunching off EP", g2 > 1e4,
              f"mu=0 Delta=U=2: g2={g2:.4g} ([4,4]), {g2_big:.4g} ([5,5]) (need > 1e4)")


def test_criterion_04_analytic_vs_numeric(criterion):
    grid = np.linspace(0, 0.7, 71)
    bad, worst, worst_damped = [], 0.0, 0.0
    for mu in grid:
        p = point(mu_over_pi=mu)
        num = g2_me(p)
        ana = g2_analytic(p)
        damped = g2_analytic(p, damping=p.gamma)
        if num > 1e-4:
            dev = abs(ana - num) / num
            worst_damped = max(worst_damped, abs(damped - num) / num)
        else:
            dev = 0.0 if abs(ana - num) <= 1e-4 else math.inf
        if not dev <= 0.15:
            bad.append(mu)
        worst = max(worst, dev)
    criterion(4, "analytic vs numeric", not bad,
              f"{len(bad)}/{len(grid)} mu points outside 15% (max rel dev {worst:.3g}); "
              f"the weak-drive formula with detunings shifted by -i*gamma deviates at most "
              f"{worst_damped:.3g}")


def test_criterion_05_non_ep_cpb(criterion):
    parts, ok = [], True
    for u, expected in ((2.0, [1.9, 2.1]), (3.0, [2.9, 3.1])):
        p = point(NON_EP_L1, NON_EP_L2, 0.125, u, u)
        sol = cpb_non_ep(p)
        mu_err = max(abs(np.array(sol.mu_values) / PI - 0.125)) * PI
        d_err = max(abs(np.array(sorted(sol.delta_values)) - expected))
        cond_ok = d_err <= 1e-3 and mu_err <= 1e-3
        deltas = np.round(np.arange(u - 0.4, u + 0.4001, 0.01), 10)
        g2 = np.array([g2_me(p.replace(Delta=d)) for d in deltas])
        minima = local_minima(deltas, g2)
        found = []
        for target in expected:
            near = [(d, v) for d, v in minima if abs(d - target) <= 0.05 and v < 1]
            found.append(bool(near))
        ok &= cond_ok and all(found)
        at = [float(g2[np.argmin(abs(deltas - t))]) for t in expected]
        parts.append(
            f"U={u}: Delta={np.round(sorted(sol.delta_values), 6).tolist()} (err {d_err:.1e}), "
            f"g2 there {np.round(at, 4).tolist()}, local minima < 1 near them: {found}, "
            f"minima in scan {[(round(float(d), 2), round(float(v), 4)) for d, v in minima]}")
    criterion(5, "non-EP CPB", ok, "; ".join(parts))


def test_criterion_06_upb_points(criterion):
    parts, ok = [], True
    for l1, u, mu, delta in UPB_POINTS:
        p = point(l1, UPB_L2, 0.0, delta, u)
        sol = upb_conditions(p)
        mu_found, d_found = sol.mu_values[0] / PI, sol.delta_values[0]
        amps = weak_drive_amplitudes(p.replace(mu=sol.mu_values[0], Delta=d_found))
        c20 = abs(amps.c20) / p.F ** 2
        g2 = g2_me(p.replace(mu=sol.mu_values[0], Delta=d_found))
        this = abs(mu_found - mu) <= 1e-3 and abs(d_found - delta) <= 1e-3 and c20 < 1e-9 and g2 < 1
        ok &= this
        parts.append(f"({mu_found:.4f}pi, {d_found:.4f}) |C20|/F^2={c20:.1e} g2={g2:.3f}")
    criterion(6, "UPB points", ok, "; ".join(parts))


def test_criterion_07_no_upb_at_eps(criterion):
    rng = np.random.default_rng(7)
    worst_zero, worst_c20, failures = 0.0, 0.0, 0
    for _ in range(200):
        r = rng.uniform(0.2, 3)
        l1, l2 = r * np.exp(1j * rng.uniform(-PI, PI, 2))
        m = int(rng.integers(1, 7))
        u = rng.uniform(0.5, 4)
        eps = find_eps(l1, l2, m)
        mu = eps.mu_values[eps.labels.index("e2=0")]
        delta = rng.uniform(0, 3 * u)
        p = ModelParams(l1, l2, m, mu, delta, u, F=0.1)
        amps = weak_drive_amplitudes(p)
        scale = abs(amps.c10) + abs(amps.c20)
        worst_zero = max(worst_zero, max(abs(c) for c in (amps.c01, amps.c11, amps.c02)) / scale)
        # with e1 e2 = 0, C20 = F^2/(sqrt2 d1 d2): never zero, and its numerator
        # 2 d1 d2^2 vanishes only at the conventional condition d1 = 0
        d1, d2 = delta - u, delta - 2 * u
        expected = p.F ** 2 / (math.sqrt(2) * d1 * d2)
        worst_c20 = max(worst_c20, abs(amps.c20 - expected) / abs(expected))
        numerator_roots = np.roots([2.0, -10 * u, 16 * u * u, -8 * u ** 3])
        if not np.allclose(sorted(numerator_roots.real), [u, 2 * u, 2 * u], atol=1e-6):
            failures += 1
        if not (pathway_report(p).e2_vanishes and not pathway_report(p).interference):
            failures += 1
        try:
            upb_conditions(p)
            failures += 1
        except ConditionNotFoundError:
            pass
    ok = worst_zero < 1e-10 and worst_c20 < 1e-9 and failures == 0
    criterion(7, "UPB impossible at EPs", ok,
              f"200 random EP draws: max |C01,C11,C02|/|C10| {worst_zero:.1e}, C20 matches "
              f"F^2/(sqrt2 d1 d2) to {worst_c20:.1e}, other failures {failures}")


@pytest.mark.slow
def test_criterion_08_effective_vs_full(criterion):
    base = point(mu_over_pi=0.0, omega_m=30.0, g=7.746)
    grid = sorted({float(v) for v in np.round(np.linspace(0, 0.7, 15), 10)} | {0.1171})
    devs, failed = {}, {}
    for mu in grid:
        try:
            cmp = validate_full_vs_effective(base.replace(mu=mu * PI), FockLayout([3, 3]), 8,
                                             check_truncation=False, t_max=100)
            devs[mu] = cmp.relative_deviation
        except Exception as exc:
            failed[mu] = type(exc).__name__
    changes = {}
    for mu in (0.1171, 0.05):
        cmp = validate_full_vs_effective(base.replace(mu=mu * PI), FockLayout([3, 3]), 8,
                                         check_truncation=False, t_max=100)
        doubled = validate_full_vs_effective(base.replace(mu=mu * PI), FockLayout([3, 3]), 16,
                                             check_truncation=False, t_max=100)
        changes[mu] = abs(doubled.g2_full - cmp.g2_full) / cmp.g2_full
    max_dev = max(devs.values(), default=math.inf)
    u_err = abs(7.746 ** 2 / 30 - 2.0)
    ok = not failed and max_dev < 0.10 and max(changes.values()) < 0.01 and u_err < 1e-3
    criterion(8, "effective vs full model", ok,
              f"|g^2/omega_m - U| = {u_err:.1e}; {len(devs)}/{len(grid)} mu points solved, "
              f"max rel dev {max_dev:.3g} (need < 0.10); unsolved {failed}; "
              f"mech doubling change {({k: f'{v:.1e}' for k, v in changes.items()})} (need < 0.01)")


def test_criterion_09_distribution(criterion):
    layout = FockLayout([5, 5])
    ep = photon_distribution(steady_by_eigen(point(), layout).rho)
    off = photon_distribution(steady_by_eigen(point(mu_over_pi=0.125), layout).rho)
    r1, r2, r2_off = ep.relative_at(1), ep.relative_at(2), off.relative_at(2)
    ok = r1 > 0 and r2 < 0 and r2_off > 0
    criterion(9, "photon distribution", ok,
              f"EP: R(1)={r1:.3g}, R(2)={r2:.3g}; mu=0.125pi: R(2)={r2_off:.3g} (need > 0)")


@pytest.mark.slow
def test_criterion_10_solver_cross_validation(criterion):
    points = {"EP": point(), "mu=0": point(mu_over_pi=0.0),
              "non-EP": point(NON_EP_L1, NON_EP_L2, 0.125, 1.9),
              "UPB": point(1.5 - 0.5j, UPB_L2, 0.1165, 1.9598)}
    diffs, invariants_ok = {}, True
    for name, p in points.items():
        eig = steady_by_eigen(p, LAYOUT)
        # slowest relaxation rate is the spectral gap; mu=0 needs t ~ 2e4/gamma
        ev = evolve_to_steady(p, LAYOUT, tol=1e-10, dt=0.04, t_max=40000)
        diffs[name] = float(np.max(np.abs(eig.rho.entries - ev.rho.entries)))
        for rep in (eig, ev):
            try:
                rep.rho.validate()
            except ValueError:
                invariants_ok = False
    rng = np.random.default_rng(10)
    worst_trace = 0.0
    for _ in range(50):
        p = ModelParams(*(rng.normal(size=2) + 1j * rng.normal(size=2)), 4, rng.uniform(0, PI),
                        rng.normal(), rng.uniform(0, 3), F=rng.uniform(0, 1))
        pair = hermitian_split(effective_hamiltonian(p, LAYOUT))
        x = rng.normal(size=(16, 16)) + 1j * rng.normal(size=(16, 16))
        rho = x @ x.conj().T
        rho /= np.trace(rho).real
        worst_trace = max(worst_trace, abs(np.trace(master_rhs(rho, pair, [1.0, 1.0]))))
    ok = max(diffs.values()) < 1e-6 and worst_trace < 1e-12 and invariants_ok
    criterion(10, "solver cross-validation", ok,
              f"max |rho_eigen - rho_evolve| {({k: f'{v:.1e}' for k, v in diffs.items()})}; "
              f"trace of rhs {worst_trace:.1e}; density-matrix invariants {invariants_ok}")


def test_criterion_11_spectral_oracle(criterion):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        l1, l2 = rng.normal(size=2) + 1j * rng.normal(size=2)
        p = ModelParams(l1, l2, int(rng.integers(1, 7)), rng.uniform(0, PI),
                        rng.normal(scale=3), rng.uniform(0, 3))
        for sub in ("single-excitation", "two-excitation"):
            worst = max(worst, subspace_spectrum(p, sub).max_closed_form_error)
    worst_split = 0.0
    eps = find_eps(EP_L1, EP_L2, 4, n_range=(1, 3, 5))
    for mu in eps.mu_values:
        for sub in ("single-excitation", "two-excitation"):
            worst_split = max(worst_split, abs(subspace_spectrum(point(mu_over_pi=mu / PI), sub).splitting))
    ok = worst < 1e-10 and worst_split < 1e-6
    criterion(11, "spectral oracle", ok,
              f"closed form vs diagonalization max {worst:.1e} over 100 draws; "
              f"splitting at the 6 EP angles max {worst_split:.1e}")


def test_criterion_12_two_photon_feature(criterion):
    p = point(mu_over_pi=0.0)
    deltas = np.round(np.arange(3.0, 5.01, 0.05), 10)
    table = probability_trace(p, deltas, LAYOUT)
    g2, p20 = table["g2"], table["p20"]
    minima = [(d, v) for d, v in local_minima(deltas, g2) if abs(d - 4.0) <= 0.5]
    dip = [(d, v) for d, v in minima if v > 1]
    # a cusp or local extremum of P20: sign change of its discrete slope or curvature
    slope = np.diff(p20)
    curv = np.diff(p20, 2)
    near = np.abs(deltas - 4.0) <= 0.5
    feature = bool(np.any((np.sign(slope[:-1]) != np.sign(slope[1:])) & near[1:-1])
                   or np.any((np.sign(curv[:-1]) != np.sign(curv[1:])) & near[1:-2]))
    dip = [(round(float(d), 2), round(float(v), 4)) for d, v in dip]
    ok = bool(dip) and feature
    at4 = float(g2[np.argmin(abs(deltas - 4.0))])
    criterion(12, "g2 dip near Delta=2U", ok,
              f"g2 local minima within 0.5 of Delta=4 with g2 > 1: {dip}; g2(4)={at4:.3g}; "
              f"g2 over [3,5] from {g2[0]:.3g} to {g2[-1]:.3g}; P20 feature near 4: {feature}")
