import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhblockade.analytics import find_eps
from nhblockade.hilbert import FockLayout, destroy, identity, number
from nhblockade.model import (
    ModelParams,
    effective_hamiltonian,
    hermitian_split,
    kerr_strength,
    polaron_hamiltonian,
    polaron_unitary,
    scattering_rates,
    total_hamiltonian,
)

from conftest import EP_L1, EP_L2, NON_EP_L1, NON_EP_L2

finite = st.floats(-3, 3, allow_nan=False)
cplx = st.builds(complex, finite, finite)
angles = st.floats(-math.pi, math.pi, allow_nan=False)


def params(l1=EP_L1, l2=EP_L2, m=4, mu=0.0, delta=2.0, u=2.0, **kw):
    return ModelParams(l1, l2, m, mu, delta, u, **kw)


def test_validation():
    with pytest.raises(ValueError):
        params(m=0)
    with pytest.raises(ValueError):
        params(m=1.5)
    with pytest.raises(ValueError):
        params(gamma=0)
    with pytest.raises(ValueError):
        params(F=-0.1)
    with pytest.raises(ValueError):
        params(u=-1)
    with pytest.raises(ValueError):
        params(delta=2 + 1j)
    with pytest.raises(ValueError):
        params(omega_m=30.0)
    with pytest.raises(ValueError):
        params(g=1.0)
    with pytest.raises(ValueError):
        params(omega_m=10.0, g=12.0)
    with pytest.warns(UserWarning):
        params(omega_m=10.0, g=6.0)
    assert params(delta=2 + 0j).Delta == 2.0


@given(cplx, cplx, st.integers(1, 6), angles)
def test_product_identity(l1, l2, m, mu):
    r = scattering_rates(params(l1, l2, m, mu))
    expected = l1 * l1 + l2 * l2 + 2 * l1 * l2 * math.cos(2 * m * mu)
    assert abs(r.product - expected) <= 1e-12 * max(1.0, abs(expected), abs(l1) ** 2 + abs(l2) ** 2)


@given(cplx, cplx, st.integers(1, 6), angles)
def test_periodicity_and_mirror(l1, l2, m, mu):
    a = scattering_rates(params(l1, l2, m, mu))
    b = scattering_rates(params(l1, l2, m, mu + math.pi / m))
    c = scattering_rates(params(l1, l2, m, -mu))
    tol = 1e-12 * max(1.0, abs(l1) + abs(l2))
    assert abs(a.e1 - b.e1) < tol and abs(a.e2 - b.e2) < tol
    assert abs(a.e1 - c.e2) < tol and abs(a.e2 - c.e1) < tol


def test_rate_examples():
    r = scattering_rates(params(1.2 - 0.3j, 1.2 - 0.3j, 3, 0.0))
    assert r.e1 == pytest.approx(2.4 - 0.6j) and r.e2 == pytest.approx(2.4 - 0.6j)
    # at the four-digit angle |e2| is set by the rounding: |l2| * 2m * pi * 3.14e-5
    r = scattering_rates(params(mu=0.1171 * math.pi))
    mu = mpmath.mpf("0.1171") * mpmath.pi
    oracle = abs(mpmath.mpc(1.5, -0.355) + mpmath.mpc(1.4, -0.645) * mpmath.exp(-8j * mu))
    assert abs(r.e2) == pytest.approx(float(oracle), rel=1e-10)
    assert abs(r.e2) < 1.3e-3
    # where e2 = 0 exactly, e1 = (l1^2 - l2^2)/l1, about 0.61 here
    assert abs(r.e1) == pytest.approx(abs(EP_L1 ** 2 - EP_L2 ** 2) / abs(EP_L1), rel=5e-3)
    r = scattering_rates(params(NON_EP_L1, NON_EP_L2, mu=0.125 * math.pi))
    assert r.e1 == pytest.approx(0.1, abs=1e-12) and r.e2 == pytest.approx(0.1, abs=1e-12)
    assert 2 * r.sqrt_product.real == pytest.approx(0.2, abs=1e-12)


def test_rates_vanish_at_ep_angles():
    eps = find_eps(EP_L1, EP_L2, 4, (1, 3, 5))
    for mu, label in zip(eps.mu_values, eps.labels):
        r = scattering_rates(params(mu=mu))
        assert abs(r.e1 if label == "e1=0" else r.e2) < 1e-10


def test_effective_single_excitation_block():
    layout = FockLayout([3, 3])
    p = params(mu=0.3, delta=1.7, u=0.4)
    h = effective_hamiltonian(p, layout)
    r = scattering_rates(p)
    block = h.project([layout.index((1, 0)), layout.index((0, 1))])
    assert np.allclose(block, [[1.7 - 0.4, r.e1], [r.e2, 1.7 - 0.4]], atol=1e-14)
    assert h.matrix_element((2, 0), (2, 0)) == pytest.approx(2 * 1.7 - 4 * 0.4)


def test_effective_decoupled_and_drive():
    layout = FockLayout([3, 3])
    h = effective_hamiltonian(params(0, 0, delta=1.3, u=0.0), layout)
    n = number(layout, 0) + number(layout, 1)
    assert np.allclose(h.entries, (1.3 * n).entries)
    h = effective_hamiltonian(params(0, 0, delta=0.0, u=0.0, F=0.2), layout)
    assert h.matrix_element((1, 0), (0, 0)) == pytest.approx(0.2)
    assert h.matrix_element((0, 1), (0, 0)) == 0


def test_effective_needs_two_modes():
    with pytest.raises(ValueError):
        effective_hamiltonian(params(), FockLayout([3, 3, 3]))
    with pytest.raises(ValueError):
        total_hamiltonian(params(omega_m=30.0, g=7.746), FockLayout([3, 3]))
    with pytest.raises(ValueError):
        total_hamiltonian(params(), FockLayout([3, 3, 3]))


@given(st.floats(-3, 3), st.floats(-3, 3), angles, st.floats(0, 1))
@settings(max_examples=30)
def test_real_lambdas_give_hermitian_hamiltonian(l1, l2, mu, f):
    h = effective_hamiltonian(params(l1, l2, mu=mu, F=f), FockLayout([3, 3]))
    assert np.max(np.abs(h.entries - h.entries.conj().T)) < 1e-12


def test_total_hamiltonian_structure():
    layout = FockLayout([3, 3, 4])
    p = params(mu=0.2, omega_m=30.0, g=2.0)
    h = total_hamiltonian(p, layout)
    assert h.matrix_element((1, 0, 0), (1, 0, 1)) == pytest.approx(-2.0)
    # g = 0: photonic part (x) identity + identity (x) omega_m b^dag b
    p0 = params(mu=0.2, u=0.0, omega_m=30.0, g=0.0)
    h0 = total_hamiltonian(p0, layout).entries
    hp = effective_hamiltonian(p0, FockLayout([3, 3])).entries
    mech = np.diag(30.0 * np.arange(4))
    assert np.allclose(h0, np.kron(hp, np.eye(4)) + np.kron(np.eye(9), mech))


def test_polaron_frame_spectrum_matches():
    p = params(mu=0.3, u=2.25, F=0.1, omega_m=30.0, g=1.5)
    layout = FockLayout([3, 3, 12])
    a = np.sort_complex(np.linalg.eigvals(total_hamiltonian(p, layout).entries))
    b = np.sort_complex(np.linalg.eigvals(polaron_hamiltonian(p, layout).entries))
    low_a = a[np.argsort(a.real)[:20]]
    low_b = b[np.argsort(b.real)[:20]]
    assert np.max(np.abs(np.sort_complex(low_a) - np.sort_complex(low_b))) < 1e-8
    u = polaron_unitary(p, layout)
    assert np.allclose((u.dag @ u).entries, identity(layout).entries, atol=1e-10)
    assert kerr_strength(1.5, 30.0) == pytest.approx(0.075)


def test_hermitian_split():
    layout = FockLayout([3, 3])
    a1, a2 = destroy(layout, 0), destroy(layout, 1)
    herm = effective_hamiltonian(params(1.0, 0.5, mu=0.3), layout)
    assert not np.any(hermitian_split(herm).h_minus.entries)
    e1 = 0.7 - 0.2j
    h = e1 * (a1.dag @ a2)
    pair = hermitian_split(h)
    expected = 0.5 * (e1 * (a1.dag @ a2) - np.conj(e1) * (a2.dag @ a1))
    assert np.allclose(pair.h_minus.entries, expected.entries)
    assert np.array_equal((pair.h_plus + pair.h_minus).entries, h.entries) or np.allclose(
        pair.full.entries, h.entries, atol=1e-15)


def test_replace_keeps_validation():
    p = params()
    assert p.replace(mu=1.0).mu == 1.0
    with pytest.raises(ValueError):
        p.replace(F=-1)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        params(omega_m=30.0, g=7.746)
