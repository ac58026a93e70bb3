import math

import numpy as np
import pytest

from g2kummer import flat_family as FF
from g2kummer import monodromy as M

F = 0.7


@pytest.fixture(scope="module")
def mixed_points():
    rng = np.random.default_rng(1)
    return np.vstack([FF.tube_points(100, (0.0, 2 * FF.DEFAULT_KAPPA)), rng.uniform(0, 1, (100, 7))])


def test_smoothstep_is_c3_and_clamped():
    s = np.linspace(-0.5, 1.5, 2001)
    v = FF.smoothstep(s)
    assert v.min() == 0 and v.max() == 1
    assert np.all(np.diff(v) >= 0)
    h = 1e-6
    fd = (FF.smoothstep(s + h) - FF.smoothstep(s - h)) / (2 * h)
    assert np.max(np.abs(fd - FF.smoothstep_prime(s))) < 1e-6


def test_projection_identities():
    pc = FF.projection_checks()
    assert pc.max_ratio <= 1 + 1e-12
    assert pc.alpha_residual < 1e-12
    assert pc.parseval_residual < 1e-12


def test_gauge_intertwines_with_half_angle():
    res = FF.gauge_equivariance_residuals(F)
    assert max(res.values()) < 1e-12


def test_gauge_fails_with_full_angle():
    # with theta = exp(i f) the unit translation picks up the wrong phase
    res = FF.gauge_equivariance_residuals(F, theta=np.exp(1j * F))
    assert res["t"] > 0.1 and res["b"] > 0.1


def test_gauge_pullback_is_constant():
    rng = np.random.default_rng(0)
    for _ in range(5):
        c = FF.gauge_pullback(F, rng.uniform(-1, 1, 7))
        assert np.allclose(c, F * np.eye(7), atol=1e-8)


def test_singular_lines_and_separation():
    assert len(FF.singular_lines()) == 8
    # lattice copies of one line are sqrt(6/7) apart (shift by a unit vector)
    assert 4 * FF.DEFAULT_KAPPA < FF.min_line_separation() <= math.sqrt(6 / 7) + 1e-12
    FF.check_kappa(FF.DEFAULT_KAPPA)
    with pytest.raises(ValueError):
        FF.check_kappa(0.2)


def test_distance_vanishes_on_lines():
    for L in FF.singular_lines():
        pts = L.base + np.linspace(0, 1, 7)[:, None] * L.direction
        assert np.max(FF.distance_to_singular_set(pts)[0]) < 1e-12


def test_deep_tube_model_form():
    assert FF.deep_tube_residual(F) < 1e-12


def test_bulk_value_is_f_times_identity():
    far = np.full((1, 7), 0.5) + np.array([[0.0, 0.5, 0, 0, 0, 0, 0]])
    d = FF.distance_to_singular_set(far)[0][0]
    assert d > 2 * FF.DEFAULT_KAPPA
    vals = FF.connection_form(F, far).values[0]
    assert np.allclose(vals, F * np.eye(7))


def test_flatness_converges_at_second_order():
    reps = FF.curvature_convergence(F)
    assert all(r.bracket_max == 0 for r in reps)
    ratios = [reps[i].dA_max / reps[i + 1].dA_max for i in range(2)]
    assert all(3.5 < q < 4.5 for q in ratios)


def test_dilation_invariance_in_deep_tube():
    assert FF.dilation_invariance_check(F) < 1e-12


def test_gamma_equivariance(mixed_points):
    res = FF.equivariance_residual(F, mixed_points)
    assert max(res.values()) < 1e-10


def test_z2_invariance(mixed_points):
    assert FF.z2_invariance_residual(F, mixed_points) < 1e-10


def test_derivative_is_harmonic_plus_exact():
    dec = FF.family_derivative_decomposition(F)
    assert dec.fd_residual < 1e-8
    assert dec.harmonic_norm_sq == pytest.approx(7.0)
    assert dec.harmonic_codifferential == 0


def test_harmonic_pairing_vanishes():
    rep = FF.harmonic_pairing(F, samples=10)
    assert rep.max_relative < 1e-12
    assert rep.bracket_pointwise_max < 1e-12


def test_irreducibility_kernel():
    assert FF.irreducibility_kernel(0.7) == 0
    assert FF.irreducibility_kernel(0.0) == 3


def test_poincare_rejects_theta_one():
    with pytest.raises(ValueError):
        FF.poincare_constant(0.0)


def test_poincare_constant_positive_at_i():
    res = FF.poincare_constant("exact:1/4", rho=FF.DEFAULT_KAPPA / 4)
    assert res.rho > 0 and res.excluded_points > 0
    assert res.sigma_min > 1.0
    assert math.isfinite(res.constant)


def test_poincare_sigma_min_shrinks_toward_theta_one():
    small = FF.poincare_constant(0.1, rho=FF.DEFAULT_KAPPA / 4).sigma_min
    big = FF.poincare_constant(0.3, rho=FF.DEFAULT_KAPPA / 4).sigma_min
    assert small < big
    assert small < 0.5


def test_poincare_constant_insensitive_to_tube():
    with_tube = FF.poincare_constant("exact:1/4", rho=FF.DEFAULT_KAPPA / 4).sigma_min
    whole = FF.poincare_constant("exact:1/4", rho=0.0).sigma_min
    assert abs(with_tube - whole) <= 0.05 * whole


def test_family_is_affine_in_f(mixed_points):
    vals = [FF.connection_form(f, mixed_points).values for f in (0.3, 0.5, 0.7)]
    assert np.max(np.abs(vals[0] - 2 * vals[1] + vals[2])) < 1e-12
    assert np.max(np.abs(FF.connection_form(0.0, mixed_points).values)) == 0


def test_monodromy_periodicity_in_f():
    # theta = exp(i f / 2): the monodromy has period 4 pi in f, and f, -f give conjugate data
    f = 0.7
    th = lambda x: np.exp(0.5j * x)
    assert M.conjugacy_verdict(th(f), th(f + 4 * np.pi))
    assert not M.conjugacy_verdict(th(f), th(f + 2 * np.pi))
    assert M.conjugacy_verdict(th(f), th(-f))
