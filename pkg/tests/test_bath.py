import math

import numpy as np
import pytest
from scipy.integrate import quad

from epsuppress.bath import OhmicBath, gamma_eigensystem, one_sided_matrix, s_principal_value


def s_reference(bath, omega):
    """Independent PV via QUADPACK's Cauchy-weight rule, split at the kink w' = 0."""
    top = 60.0 * max(bath.omega_c, 1.0 / bath.beta, abs(omega))
    total = 0.0
    for a, b in ((-top, 0.0), (0.0, top)):
        if a < omega < b:
            val, _ = quad(bath.gamma, a, b, weight="cauchy", wvar=omega, epsabs=1e-13, epsrel=1e-12, limit=400)
        else:
            val, _ = quad(lambda x: bath.gamma(x) / (x - omega), a, b, epsabs=1e-13, epsrel=1e-12, limit=400)
        total += val
    # PV int gamma(x)/(w - x) dx = -PV int gamma(x)/(x - w) dx
    return -total / (2 * math.pi)


def test_gamma_values(bath):
    assert bath.gamma(0.0) == 0.0
    assert bath.gamma(2.0) == pytest.approx(2.0 * math.exp(-0.2), rel=1e-15)
    assert bath.gamma(-2.0) == pytest.approx(2.0 * math.exp(-0.2) * math.exp(-2.0), rel=1e-15)
    w = np.linspace(-5, 5, 11)
    assert np.allclose(bath.gamma(w), [bath.gamma(x) for x in w])


@pytest.mark.parametrize("k,wc,beta", [(1, 10.0, 1.0), (2, 1.0, 0.5), (3, 5.0, 2.0)])
def test_kms_and_positivity(k, wc, beta):
    b = OhmicBath(beta=beta, k=k, omega_c=wc)
    w = np.linspace(0.01, 40, 200)
    assert np.all(b.gamma(w) > 0) and np.all(b.gamma(-w) > 0)
    assert np.allclose(b.gamma(-w), np.exp(-beta * w) * b.gamma(w), rtol=1e-13, atol=0)


def test_peak_location():
    b = OhmicBath(k=2, omega_c=3.0, mu=0.7)
    w_star, g_star = b.peak()
    assert w_star == 6.0
    assert b.gamma(w_star) == pytest.approx(g_star, rel=1e-15)
    assert b.gamma(w_star * 1.01) < g_star and b.gamma(w_star * 0.99) < g_star


@pytest.mark.parametrize("k,wc,beta", [(1, 10.0, 1.0), (2, 1.0, 0.5), (3, 2.0, 3.0)])
@pytest.mark.parametrize("omega", [-7.3, -1.0, -0.05, 0.0, 0.4, 2.0, 9.5, 35.0])
def test_principal_value_matches_quadpack(k, wc, beta, omega):
    b = OhmicBath(beta=beta, k=k, omega_c=wc)
    ref = s_reference(b, omega)
    scale = b.peak()[1]
    assert abs(s_principal_value(b, omega) - ref) <= 1e-9 * max(abs(ref), scale)


def test_principal_value_zero_coupling():
    assert s_principal_value(OhmicBath(mu=0.0), 1.3) == 0.0


def test_principal_value_tolerance_refinement():
    b = OhmicBath(k=3, omega_c=2.0)
    coarse, fine = s_principal_value(b, 3.1, tol=1e-4), s_principal_value(b, 3.1, tol=1e-12)
    assert abs(coarse - fine) <= 1e-4 * b.peak()[1]


def test_one_sided_factor(bath):
    g = bath.one_sided(1.5)
    assert g.real == pytest.approx(0.5 * bath.gamma(1.5))
    assert g.imag == pytest.approx(s_principal_value(bath, 1.5))


def test_coupling_validation():
    with pytest.raises(ValueError):
        OhmicBath(beta=-1.0)
    with pytest.raises(ValueError):
        OhmicBath(omega_c=0.0)
    with pytest.raises(ValueError):
        OhmicBath(coupling=np.array([[1.0, 2.0], [2.0, 1.0]]))  # indefinite
    with pytest.raises(ValueError):
        OhmicBath(coupling=np.array([[1.0, 1j], [0.0, 1.0]]))  # not Hermitian
    with pytest.raises(ValueError):
        OhmicBath(k=1.5)


def test_gamma_eigensystem_diagonalizes():
    c = np.array([[2.0, 1.0j], [-1.0j, 1.0]])
    b = OhmicBath(coupling=c)
    u, rates = gamma_eigensystem(b, 2.0, 2)
    g = b.gamma_matrix(2.0, 2)
    assert np.allclose(u.conj().T @ g @ u, np.diag(rates))
    assert np.all(rates >= 0)
    assert np.allclose(one_sided_matrix(b, 2.0, 2), c * b.one_sided(2.0))
    with pytest.raises(ValueError):
        b.coupling_matrix(3)
