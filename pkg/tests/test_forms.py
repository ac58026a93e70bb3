import numpy as np
import pytest

from g2kummer import crystal as C
from g2kummer import forms as F


@pytest.fixture(scope="module")
def phi_psi():
    return F.phi0(), F.psi0()


def test_star_phi_is_psi(phi_psi):
    phi, psi = phi_psi
    assert (F.hodge_star(phi) - psi).max_abs() < 1e-12


def test_phi_wedge_psi_is_seven_vol(phi_psi):
    phi, psi = phi_psi
    assert (F.wedge(phi, psi) - F.MultiVector.volume() * 7).max_abs() < 1e-12


def test_kahler_volume_identity():
    w, Om = F.model_omega(), F.model_Omega()
    lhs = F.wedge(F.wedge(w, w), w) * (1 / 6)
    rhs = F.wedge(Om, Om.conj()) * (1j / 8)
    assert (lhs - rhs).max_abs() < 1e-12


def test_star_squared_is_identity():
    rng = np.random.default_rng(1)
    for k in range(8):
        c = np.zeros(128)
        for m in F._masks_of_grade(7, k):
            c[m] = rng.standard_normal()
        a = F.MultiVector(c)
        assert (F.hodge_star(F.hodge_star(a)) - a).max_abs() < 1e-12


def test_metric_of_phi_is_euclidean(phi_psi):
    assert np.allclose(F.g2_metric(phi_psi[0]), np.eye(7), atol=1e-12)


def test_phi_invariant_under_crystal_rotations(phi_psi):
    for g in C.GENS.values():
        assert F.preserves_phi(g.rotation_array())
        assert F.preserves_psi(g.rotation_array())


def test_pullback_by_minus_identity(phi_psi):
    phi, psi = phi_psi
    m = -np.eye(7)
    assert (F.pullback(phi, m) + phi).max_abs() < 1e-14
    assert (F.pullback(psi, m) - psi).max_abs() < 1e-14
    assert F.preserves_psi(m) and not F.preserves_phi(m)


def test_single_reflection_preserves_neither():
    D = np.eye(7)
    D[0, 0] = -1
    assert not F.preserves_psi(D)
    assert not F.preserves_phi(D)


def test_preserves_rejects_non_orthogonal():
    with pytest.raises(ValueError):
        F.preserves_phi(2 * np.eye(7))


def test_insertion_identity_on_random_samples():
    rng = np.random.default_rng(0)
    worst = 0.0
    for _ in range(1000):
        p = F.random_point_sample(rng, fiber=4)
        worst = max(worst, F.insertion_identity_check(p.a, p.xi))
    assert worst < 1e-12


def test_quadratic_term_is_homogeneous_of_degree_two():
    rng = np.random.default_rng(2)
    psi = F.psi0()
    p = F.random_point_sample(rng, fiber=4)
    q1, z1 = F.quadratic_term(p, psi)
    q3, _ = F.quadratic_term(p.scaled(3.0), psi)
    assert (q3 - q1 * 9.0).max_abs() <= 1e-11 * max(1.0, q1.max_abs())
    assert z1.max_abs() == 0


def test_quadratic_term_ignores_connection_tag():
    rng = np.random.default_rng(3)
    psi = F.psi0()
    p = F.random_point_sample(rng, fiber=4)
    a, _ = F.quadratic_term(p, psi, "A0")
    b, _ = F.quadratic_term(p, psi, "A_f")
    assert (a - b).max_abs() == 0
    assert a.grades(1e-14) <= {6}


def test_antisymmetric_fiber_required():
    c = np.zeros((128, 3, 3))
    c[1] = np.eye(3)
    with pytest.raises(ValueError):
        F.PointSample(F.MultiVector(c), F.MultiVector(np.zeros((128, 3, 3))))
