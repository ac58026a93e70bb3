import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from g2kummer import contraction as Ct


def test_affine_fixed_point_and_derivative():
    fam = Ct.affine_family()
    for f in (-0.5, 0.0, 0.3):
        assert Ct.fix_point(fam, f).b[0] == pytest.approx(2 * f, abs=1e-12)
        assert Ct.fix_derivative(fam, f)[0] == pytest.approx(2.0, rel=1e-10)


@given(st.floats(-1, 1))
@settings(max_examples=30, deadline=None)
def test_cosine_fixed_point_matches_root_finder(f):
    fam = Ct.cosine_family()
    assert Ct.fix_point(fam, f).b[0] == pytest.approx(Ct.cosine_root(f), abs=1e-12)


def test_cosine_derivative_matches_implicit_formula():
    fam = Ct.cosine_family()
    f = 0.4
    b = Ct.cosine_root(f)
    # 3 b - cos b = f  =>  db/df = 1 / (3 + sin b)
    assert Ct.fix_derivative(fam, f)[0] == pytest.approx(1 / (3 + math.sin(b)), rel=1e-10)


@pytest.mark.parametrize("name", ["affine", "cosine", "toy-instanton"])
def test_derivative_agrees_with_finite_differences(name):
    fam = Ct.analytic_families()[name]
    for f in (-0.6, 0.1, 0.7):
        D = Ct.fix_derivative(fam, f)
        fd = Ct.fd_fix_derivative(fam, f)
        assert np.linalg.norm(D - fd) <= 1e-8 * max(np.linalg.norm(fd), 1e-12)


@pytest.mark.parametrize("name", ["affine", "cosine", "toy-instanton"])
def test_derivative_bound_holds(name):
    fam = Ct.analytic_families()[name]
    for f in (-0.5, 0.2, 0.9):
        rep = Ct.derivative_bound(fam, f, samples=300)
        assert rep.constant < 1
        assert rep.holds


def test_measured_contraction_below_claim():
    for fam in Ct.analytic_families().values():
        assert Ct.measured_contraction(fam, samples=300) <= fam.claimed_constant + 1e-12


def test_continuity_estimate():
    fam = Ct.cosine_family()
    diff, bound = Ct.continuity_check(fam, 0.1, 0.35, 1 / 3)
    assert diff <= bound * (1 + 1e-12)


def test_toy_family_bounds():
    toy = Ct.toy_instanton_family()
    assert toy.contraction_bound() < 1
    rng = np.random.default_rng(0)
    for f in rng.uniform(-1, 1, 10):
        b = Ct.fix_point(toy.family, f).b
        e = np.linalg.norm(toy.e(f))
        assert np.linalg.norm(b) <= 2 * e
        assert np.linalg.norm(toy.R @ b) <= 2 * toy.c * e
        assert np.linalg.norm(b + toy.Q(toy.R @ b) + toy.e(f)) < 1e-12


def test_toy_jacobian_matches_finite_differences():
    toy = Ct.toy_instanton_family()
    fam = Ct.ContractionFamily(toy.family.dim, toy.evaluate)
    b = np.random.default_rng(1).standard_normal(toy.family.dim) * 0.01
    assert np.allclose(Ct.partial_b(fam, 0.3, b), toy.jacobian(0.3, b), atol=1e-10)


def test_toy_rejects_large_source():
    with pytest.raises(ValueError):
        Ct.toy_instanton_family(e_size=2.0)


def test_second_derivative_is_stable():
    toy = Ct.toy_instanton_family()
    assert Ct.second_derivative_stability(toy.family, 0.3) < 1e-3
    assert Ct.second_derivative_stability(Ct.cosine_family(), 0.3) < 1e-3


def test_divergence_reports_last_iterate():
    fam = Ct.ContractionFamily(1, lambda f, b: 2 * b + 1, radius=5.0)
    with pytest.raises(Ct.DivergenceError) as exc:
        Ct.fix_point(fam, 0.0)
    assert exc.value.iterate is not None
    assert np.linalg.norm(exc.value.iterate) > 5.0


def test_ill_conditioned_derivative_raises():
    # E(f, b) = b - (b - f)^3: fixed point b = f with d_B E = 1 there
    fam = Ct.ContractionFamily(1, lambda f, b: b - (b - f) ** 3, radius=10.0,
                               d_b=lambda f, b: np.array([[1.0]]))
    with pytest.raises(Ct.IllConditionedError):
        Ct.fix_derivative(fam, 0.0)


def test_richardson_derivative_accuracy():
    assert Ct.richardson_derivative(np.sin, 0.4)[()] == pytest.approx(math.cos(0.4), abs=1e-13)
