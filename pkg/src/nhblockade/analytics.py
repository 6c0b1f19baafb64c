"""Weak-drive closed forms and solvers for the blockade conditions.

Under weak driving the state is truncated to at most two photons and the
steady-state amplitudes follow from a small linear system. The solvers below
locate exceptional points (e1 = 0 or e2 = 0), conventional blockade at and away
from them, and the unconventional (interference) blockade where C20 = 0.

All angles are in radians and all rates in the same units as ``ModelParams``.
"""

from __future__ import annotations

import cmath
import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .exceptions import ConditionNotFoundError, DivergenceError
from .model import ModelParams, scattering_rates

__all__ = [
    "WeakDriveAmplitudes",
    "ConditionSolution",
    "Transition",
    "PathwayReport",
    "weak_drive_amplitudes",
    "weak_drive_system",
    "g2_analytic",
    "find_eps",
    "cpb_at_ep",
    "cpb_non_ep",
    "upb_conditions",
    "upb_closed_form",
    "pathway_report",
]

EP_LOCUS = "EP-locus"
CPB_AT_EP = "CPB-at-EP"
CPB_NON_EP = "CPB-non-EP"
UPB = "UPB"

# |e1 e2| below this fraction of (|lambda1| + |lambda2|)^2 counts as an EP
EP_RTOL = 1e-12
SQRT2 = math.sqrt(2.0)


@dataclass
class WeakDriveAmplitudes:
    """Steady-state amplitudes C_{n1 n2} with C00 = 1.

    ``delta1``/``delta2`` are Delta - U and Delta - 2U (complex only when a
    damping is supplied). ``residual`` is the largest row residual of the
    truncated linear system evaluated at these amplitudes.
    """

    c10: complex
    c01: complex
    c20: complex
    c11: complex
    c02: complex
    delta1: complex
    delta2: complex
    eta1: complex
    eta2: complex
    residual: float

    def as_vector(self) -> np.ndarray:
        return np.array([self.c10, self.c01, self.c20, self.c11, self.c02])


@dataclass
class ConditionSolution:
    """Angles (and detunings) that satisfy one of the blockade conditions.

    ``mu_values`` and ``delta_values`` are parallel lists of points, except
    for the EP locus which carries angles only. ``labels`` names which rate
    vanishes (EP kinds) or which sign was taken.
    """

    kind: str
    mu_values: list[float]
    delta_values: list[float]
    labels: list[str] = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.mu_values)

    @property
    def empty(self) -> bool:
        return not self.mu_values

    def points(self) -> list[tuple[float, float | None]]:
        if not self.delta_values:
            return [(mu, None) for mu in self.mu_values]
        return list(zip(self.mu_values, self.delta_values))

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "mu_values": list(self.mu_values),
            "mu_over_pi": [mu / math.pi for mu in self.mu_values],
            "delta_values": list(self.delta_values),
            "labels": list(self.labels),
            "diagnostics": _plain(self.diagnostics),
        }


def _plain(obj):
    """Recursively convert numpy and complex values into JSON-friendly types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def _detunings(params: ModelParams, damping: float) -> tuple[complex, complex]:
    d1 = params.Delta - params.U - 1j * damping
    d2 = params.Delta - 2 * params.U - 1j * damping
    if damping == 0:
        return d1.real, d2.real
    return d1, d2


def weak_drive_system(params: ModelParams, damping: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Truncated linear system A c = b for c = (C10, C01, C20, C11, C02).

    The feedback terms sqrt(2) F C20 (first row) and F C11 (second row) are
    one order higher in F than the others and are dropped, which decouples
    the one-photon amplitudes from the two-photon ones.
    """
    rates = scattering_rates(params)
    e1, e2 = rates.e1, rates.e2
    d1, d2 = _detunings(params, damping)
    f = params.F
    a = np.array(
        [
            [d1, e1, 0, 0, 0],
            [e2, d1, 0, 0, 0],
            [SQRT2 * f, 0, 2 * d2, SQRT2 * e1, 0],
            [0, f, SQRT2 * e2, 2 * d2, SQRT2 * e1],
            [0, 0, 0, SQRT2 * e2, 2 * d2],
        ],
        dtype=complex,
    )
    b = np.array([-f, 0, 0, 0, 0], dtype=complex)
    return a, b


def weak_drive_amplitudes(params: ModelParams, damping: float = 0.0) -> WeakDriveAmplitudes:
    """Closed-form weak-drive amplitudes.

    C10 = F d1/eta1 and C20 = F^2 (2 d1 d2^2 + e1 e2 (d2 - d1)) / (2 sqrt2 d2 eta1 eta2)
    with eta_j = e1 e2 - d_j^2. The others follow by back-substitution in the
    truncated system. ``damping`` (default 0) shifts both detunings by -i*damping.
    That is a diagnostic only; the closed forms themselves are undamped.
    """
    if params.F <= 0:
        raise ValueError("weak-drive amplitudes need F > 0")
    rates = scattering_rates(params)
    e1, e2 = rates.e1, rates.e2
    prod = e1 * e2
    d1, d2 = _detunings(params, damping)
    eta1 = prod - d1 * d1
    eta2 = prod - d2 * d2
    if d2 == 0:
        raise DivergenceError("two-photon resonance: Delta = 2U makes the amplitudes diverge")
    if eta1 == 0:
        raise DivergenceError("single-excitation resonance: e1 e2 = (Delta - U)^2")
    if eta2 == 0:
        raise DivergenceError("two-excitation resonance: e1 e2 = (Delta - 2U)^2")
    f = params.F
    c10 = f * d1 / eta1
    c01 = -e2 * c10 / d1 if d1 != 0 else -f / e1
    c20 = f * f * (2 * d1 * d2 * d2 + prod * (d2 - d1)) / (2 * SQRT2 * d2 * eta1 * eta2)
    # remaining two-photon rows: solve the 2x2 block for C11, C02
    block = np.array([[2 * d2, SQRT2 * e1], [SQRT2 * e2, 2 * d2]], dtype=complex)
    rhs = np.array([-f * c01 - SQRT2 * e2 * c20, 0], dtype=complex)
    c11, c02 = np.linalg.solve(block, rhs)
    amps = np.array([c10, c01, c20, c11, c02])
    a, b = weak_drive_system(params, damping)
    residual = float(np.max(np.abs(a @ amps - b)))
    return WeakDriveAmplitudes(
        c10=complex(c10), c01=complex(c01), c20=complex(c20), c11=complex(c11), c02=complex(c02),
        delta1=d1, delta2=d2, eta1=complex(eta1), eta2=complex(eta2), residual=residual,
    )


def _is_ep(params: ModelParams, prod: complex) -> bool:
    scale = (abs(params.lambda1) + abs(params.lambda2)) ** 2
    return abs(prod) <= EP_RTOL * max(scale, 1.0)


def g2_analytic(params: ModelParams, damping: float = 0.0) -> float:
    """Weak-drive g2(0) = 2|C20|^2/|C10|^4 in closed form.

    Independent of F. Returns ``math.inf`` at the divergences (Delta = U off
    an EP, Delta = 2U, or a two-excitation resonance). At an EP it reduces
    to (Delta - U)^2/(Delta - 2U)^2, which vanishes at Delta = U.
    """
    prod = scattering_rates(params).product
    d1, d2 = _detunings(params, damping)
    if _is_ep(params, prod) and damping == 0:
        if d2 == 0:
            return math.inf
        return float(abs(d1) ** 2 / abs(d2) ** 2)
    eta1 = prod - d1 * d1
    eta2 = prod - d2 * d2
    denom = 4 * abs(d1 * d1 * d2 * eta2) ** 2
    if denom == 0:
        return math.inf
    num = abs(eta1 * (2 * d1 * d2 * d2 + prod * (d2 - d1))) ** 2
    return float(num / denom)


def _check_n_range(n_range: Iterable[int]) -> list[int]:
    ns = sorted({int(n) for n in n_range})
    if not ns:
        raise ValueError("n_range is empty")
    if any(n % 2 == 0 for n in ns):
        raise ValueError(f"EP branches are labelled by odd n, got {ns}")
    return ns


def _min_product_magnitude(lambda1: complex, lambda2: complex) -> float:
    """min over mu of |e1 e2| = |l1^2 + l2^2 + 2 l1 l2 cos(2 m mu)|."""
    a = lambda1 ** 2 + lambda2 ** 2
    b = 2 * lambda1 * lambda2
    if b == 0:
        return abs(a)
    c = float(np.clip(-(a * b.conjugate()).real / abs(b) ** 2, -1.0, 1.0))
    return abs(a + b * c)


def find_eps(lambda1: complex, lambda2: complex, m: int,
             n_range: Iterable[int] = (1,), tol: float = 1e-9) -> ConditionSolution:
    """Angles where one scattering rate vanishes.

    mu = (n pi + arg(l1/l2))/(2m) gives e1 = 0 and mu = (n pi - arg(l1/l2))/(2m)
    gives e2 = 0, for each odd n in ``n_range``. Such points exist only
    when |l1| = |l2| (within ``tol``). Otherwise the result is empty and
    ``diagnostics["min_abs_product"]`` reports how close the pair comes.
    """
    lambda1, lambda2 = complex(lambda1), complex(lambda2)
    if int(m) != m or m < 1:
        raise ValueError(f"m must be a positive integer, got {m}")
    ns = _check_n_range(n_range)
    mismatch = abs(abs(lambda1) - abs(lambda2))
    if lambda2 == 0 or mismatch >= tol:
        return ConditionSolution(
            EP_LOCUS, [], [], [],
            {"magnitude_mismatch": mismatch,
             "min_abs_product": _min_product_magnitude(lambda1, lambda2)},
        )
    phase = cmath.phase(lambda1 / lambda2)
    found = []
    for n in ns:
        for sign, label in ((+1, "e1=0"), (-1, "e2=0")):
            mu = (n * math.pi + sign * phase) / (2 * m)
            found.append((mu, label))
    found.sort()
    residuals = []
    for mu, label in found:
        rates = scattering_rates(ModelParams(lambda1, lambda2, m, mu, 0.0, 0.0))
        residuals.append(abs(rates.e1) if label == "e1=0" else abs(rates.e2))
    return ConditionSolution(
        EP_LOCUS,
        [mu for mu, _ in found],
        [],
        [label for _, label in found],
        {"magnitude_mismatch": mismatch, "residual": residuals},
    )


def cpb_at_ep(params: ModelParams, n_range: Iterable[int] = (1,)) -> ConditionSolution:
    """Pair every EP angle with the single-photon resonance Delta = U."""
    eps = find_eps(params.lambda1, params.lambda2, params.m, n_range)
    diagnostics = dict(eps.diagnostics)
    if params.U == 0:
        warnings.warn("U = 0: the condition degenerates to Delta = 0 and no blockade is expected",
                      stacklevel=2)
        diagnostics["degenerate"] = True
    return ConditionSolution(
        CPB_AT_EP, list(eps.mu_values), [params.U] * len(eps), list(eps.labels), diagnostics
    )


def _real_product_angles(params: ModelParams, periods: int) -> tuple[list[float], float]:
    """Angles in [0, periods*pi/m) where Im(e1 e2) = 0, and cos(2 m mu) there.

    Im(l1^2 + l2^2 + 2 l1 l2 cos x) = 0 gives
    cos x = -(|l1|^2 sin 2t1 + |l2|^2 sin 2t2) / (2 |l1||l2| sin(t1 + t2)).
    """
    l1, l2, m = params.lambda1, params.lambda2, params.m
    num = (l1 * l1 + l2 * l2).imag
    den = 2 * (l1 * l2).imag
    if abs(den) <= 1e-14 * max(1.0, abs(l1 * l2)):
        if abs(num) <= 1e-14 * max(1.0, abs(l1) ** 2 + abs(l2) ** 2):
            raise ConditionNotFoundError("Im(e1 e2) vanishes for every angle; no angle is singled out")
        raise ConditionNotFoundError("sin(theta1 + theta2) = 0: Im(e1 e2) never vanishes")
    c = -num / den
    if abs(c) > 1 + 1e-12:
        raise ConditionNotFoundError(f"cos(2 m mu) = {c:.6g} is outside [-1, 1]; no real-product angle")
    c = min(1.0, max(-1.0, c))
    x0 = math.acos(c)
    angles = []
    for k in range(periods):
        for x in (x0, 2 * math.pi - x0):
            mu = (x + 2 * math.pi * k) / (2 * m)
            if not any(abs(mu - a) < 1e-12 for a in angles):
                angles.append(mu)
    angles.sort()
    return angles, c


def cpb_non_ep(params: ModelParams, periods: int = 1) -> ConditionSolution:
    """Conventional blockade at a real single-excitation splitting.

    Solves Im sqrt(e1 e2) = 0 for mu, then Delta = U -/+ Re sqrt(e1 e2).
    Requires Re(e1 e2) > 0 at that angle.
    """
    angles, c = _real_product_angles(params, periods)
    mus, deltas, labels = [], [], []
    im_res, det_res = [], []
    reasons = []
    for mu in angles:
        prod = scattering_rates(params.replace(mu=mu)).product
        if _is_ep(params, prod):
            reasons.append(f"mu = {mu / math.pi:.6g} pi is an EP (e1 e2 = 0); use the EP condition")
            continue
        if prod.real <= 0:
            reasons.append(f"Re(e1 e2) = {prod.real:.6g} <= 0 at mu = {mu / math.pi:.6g} pi")
            continue
        root = cmath.sqrt(prod)
        for sign, label in ((-1, "U-Re"), (+1, "U+Re")):
            delta = params.U + sign * root.real
            mus.append(mu)
            deltas.append(delta)
            labels.append(label)
            im_res.append(abs(root.imag))
            det_res.append(abs(delta - params.U - sign * root.real))
    if not mus:
        raise ConditionNotFoundError("; ".join(reasons) or "no admissible angle")
    return ConditionSolution(
        CPB_NON_EP, mus, deltas, labels,
        {"cos_2m_mu": c, "im_sqrt_product": im_res, "detuning_residual": det_res},
    )


def upb_closed_form(U: float, re_product: float) -> list[complex]:
    """All branch combinations of the radical solution for Delta_UPB.

    Delta = ((-2)^(4/3) U^2 + (-2)^(2/3) M^2 + 10 U M) / (6 M) with
    M = [3(sqrt(1344 U^6 + 660 U^3 q + 81 q^2) - 9q) - 110 U^3]^(1/3) and
    q = -4U^3 - U Re(e1 e2)/2, the constant term of the monic cubic. Each
    cube root is ambiguous, so every combination is returned.
    """
    q = -4 * U ** 3 - U * re_product / 2
    inner = 3 * (cmath.sqrt(1344 * U ** 6 + 660 * U ** 3 * q + 81 * q ** 2) - 9 * q) - 110 * U ** 3
    if inner == 0:
        return []
    cube = [cmath.exp(2j * math.pi * k / 3) for k in range(3)]
    m0 = inner ** (1 / 3)
    a0 = (-2 + 0j) ** (4 / 3)
    b0 = (-2 + 0j) ** (2 / 3)
    out = []
    for i, j, k in itertools.product(range(3), repeat=3):
        a, b, mm = a0 * cube[i], b0 * cube[j], m0 * cube[k]
        out.append((a * U * U + b * mm * mm + 10 * U * mm) / (6 * mm))
    return out


def _upb_cubic(U: float, re_product: float) -> np.ndarray:
    # 2 (D - U)(D - 2U)^2 - U Re(e1 e2) = 0
    return np.array([2.0, -10 * U, 16 * U * U, -8 * U ** 3 - U * re_product])


def upb_conditions(params: ModelParams, periods: int = 1) -> ConditionSolution:
    """Unconventional blockade: C20 = 0 in the weak-drive closed form.

    The angle makes e1 e2 real. The detuning is the real root in [0, 3U],
    closest to U, of 2 (Delta - U)(Delta - 2U)^2 = U Re(e1 e2). The radical
    closed form is evaluated as a cross-check, taking the branch nearest the
    cubic root.
    """
    U = params.U
    if U <= 0:
        raise ConditionNotFoundError("U = 0: without anharmonicity C20 = 0 forces Delta = U")
    angles, c = _real_product_angles(params, periods)
    prod = scattering_rates(params.replace(mu=angles[0])).product
    p = prod.real
    scale = (abs(params.lambda1) + abs(params.lambda2)) ** 2
    if abs(p) <= EP_RTOL * max(scale, 1.0):
        raise ConditionNotFoundError(
            "Re(e1 e2) = 0 at the real-product angle: this is an EP and the "
            "condition collapses to the conventional one, Delta = U"
        )
    roots = np.roots(_upb_cubic(U, p))
    real = sorted(
        r.real for r in roots
        if abs(r.imag) <= 1e-9 * max(1.0, abs(r)) and -1e-12 <= r.real <= 3 * U + 1e-12
    )
    if not real:
        raise ConditionNotFoundError(
            f"no real root of the UPB cubic in [0, 3U]; roots are {[complex(r) for r in roots]}"
        )
    delta = float(min(real, key=lambda r: abs(r - U)))
    closed = [z for z in upb_closed_form(U, p) if abs(z.imag) <= 1e-9 * max(1.0, abs(z))]
    closed_delta = min((z.real for z in closed), key=lambda r: abs(r - delta), default=None)

    mus, deltas, c20_res, cubic_res = [], [], [], []
    f = params.F if params.F > 0 else 1.0
    for mu in angles:
        point = params.replace(mu=mu, Delta=delta, F=f)
        amps = weak_drive_amplitudes(point)
        mus.append(mu)
        deltas.append(delta)
        c20_res.append(abs(amps.c20) / f ** 2)
        cubic_res.append(abs(np.polyval(_upb_cubic(U, p), delta)))
    return ConditionSolution(
        UPB, mus, deltas, ["C20=0"] * len(mus),
        {
            "cos_2m_mu": c,
            "re_product": p,
            "im_product": [abs(scattering_rates(params.replace(mu=mu)).product.imag) for mu in mus],
            "cubic_roots": [complex(r) for r in roots],
            "cubic_residual": cubic_res,
            "closed_form_delta": closed_delta,
            "closed_form_difference": None if closed_delta is None else abs(closed_delta - delta),
            "c20_over_f2": c20_res,
            "delta1": delta - U,
        },
    )


@dataclass(frozen=True)
class Transition:
    source: tuple[int, int]
    target: tuple[int, int]
    coupling: str
    strength: complex
    open: bool


@dataclass
class PathwayReport:
    """Which weak-drive transitions are active and what that implies for |2,0>."""

    transitions: list[Transition]
    e1_vanishes: bool
    e2_vanishes: bool
    interference: bool
    vanishing_amplitudes: list[str]
    summary: str

    def is_open(self, source: tuple[int, int], target: tuple[int, int]) -> bool:
        for t in self.transitions:
            if t.source == source and t.target == target:
                return t.open
        raise KeyError((source, target))


def pathway_report(params: ModelParams, tol: float = 1e-9) -> PathwayReport:
    """Classify the excitation paths up to two photons.

    |2,0> is reached directly from |1,0> by the drive, and indirectly via
    |1,0> -> |0,1> (e2) -> |1,1> (drive) -> |2,0> (sqrt2 e1). Destructive
    interference, and hence unconventional blockade, needs both routes.
    """
    rates = scattering_rates(params)
    e1, e2, f = rates.e1, rates.e2, params.F
    specs = [
        ((0, 0), (1, 0), "F", f),
        ((1, 0), (2, 0), "sqrt2 F", SQRT2 * f),
        ((1, 0), (0, 1), "e2", e2),
        ((0, 1), (1, 0), "e1", e1),
        ((0, 1), (1, 1), "F", f),
        ((1, 1), (2, 0), "sqrt2 e1", SQRT2 * e1),
        ((2, 0), (1, 1), "sqrt2 e2", SQRT2 * e2),
        ((1, 1), (0, 2), "sqrt2 e2", SQRT2 * e2),
        ((0, 2), (1, 1), "sqrt2 e1", SQRT2 * e1),
    ]
    transitions = [Transition(s, t, name, complex(v), abs(v) > tol) for s, t, name, v in specs]
    e1_zero, e2_zero = abs(e1) <= tol, abs(e2) <= tol
    interference = not (e1_zero or e2_zero)
    vanishing = ["C01", "C11", "C02"] if e2_zero else []
    if interference:
        summary = ("two interfering paths lead to |2,0>; unconventional blockade "
                   "is possible where they cancel")
    elif e2_zero and e1_zero:
        summary = "no inter-mode scattering; only the direct path to |2,0>"
    elif e2_zero:
        summary = ("e2 = 0: |0,1>, |1,1>, |0,2> are never populated; only the direct "
                   "path to |2,0>, so no interference")
    else:
        summary = ("e1 = 0: the CCW mode is populated but cannot feed |2,0>; only the "
                   "direct path remains, so no interference")
    return PathwayReport(transitions, e1_zero, e2_zero, interference, vanishing, summary)
