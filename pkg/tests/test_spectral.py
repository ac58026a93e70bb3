import math

import numpy as np
import pytest

from g2kummer import monodromy as M
from g2kummer import spectral as S


@pytest.fixture(scope="module")
def basis():
    return S.mode_basis(0.7, 1)


@pytest.fixture(scope="module")
def report():
    return S.kernel_dims(0.7, 1)


def test_symbol_squares_to_laplacian():
    om = np.random.default_rng(0).standard_normal((20, 7))
    L = S.symbol("L", om)
    LhL = np.conj(np.swapaxes(L, 1, 2)) @ L
    target = np.sum(om ** 2, axis=1)[:, None, None] * np.eye(8)
    assert np.max(np.abs(LhL - target)) < 1e-12


def test_lstar_symbol_is_adjoint():
    om = np.random.default_rng(1).standard_normal((5, 7))
    L, Ls = S.symbol("L", om), S.symbol("Lstar", om)
    assert np.max(np.abs(Ls - np.conj(np.swapaxes(L, 1, 2)))) == 0


def test_degree_aliases():
    assert S._degree("(1,7)") == "L"
    assert S._degree("coker") == "Lstar"
    assert S._degree("(0)") == "sections"
    with pytest.raises(ValueError):
        S._degree("(2,5)")


def test_symbol_equivariance_under_quotient_rotations(basis):
    fc = basis.chars
    om = np.random.default_rng(2).standard_normal((1, 7))
    for g in range(0, fc.rotations.shape[0], 7):
        R = fc.rotations[g]
        for deg in S.DEGREES:
            dom, cod = S.form_action(deg, R)
            lhs = S.symbol(deg, om @ R.T)[0] @ dom
            rhs = cod @ S.symbol(deg, om)[0]
            assert np.max(np.abs(lhs - rhs)) < 1e-12


def test_mode_basis_is_closed_and_orbits_divide_group(basis):
    assert basis.closure_ok
    sizes = np.bincount(basis.orbit_rep)[basis.representatives()]
    assert sizes.sum() == basis.size
    assert all(56 % s == 0 for s in sizes)
    assert np.max(np.abs(basis.w)) <= 1 + 1e-12


def test_kernel_dims_generic_theta(report):
    assert (report.ker_L, report.ker_Lstar, report.ker_sections) == (1, 1, 0)
    assert report.closure_ok
    assert all(max(abs(x) for x in w) < 1e-12 for w in report.kernel_frequencies)


def test_kernels_localise_at_zero_frequency_and_match_invariants(report):
    # a harmonic mode at w = 0 is exactly an invariant constant form
    assert report.ker_sections == M.invariant_subspace(0.7, "adjoint").dim
    assert report.ker_L == M.invariant_subspace(0.7, "oneform").dim


def test_index_is_zero(report):
    assert report.ker_L - report.ker_Lstar == 0


def test_theta_one_baseline():
    rep = S.kernel_dims(0.0, 1)
    assert rep.ker_sections == M.invariant_subspace(0.0, "adjoint").dim == 3


def test_cokernel_z2_sign_matches_representation_side():
    s = S.kernel_vector_z2_sign(0.7, 1, "Lstar")
    assert abs(s - M.coker_z2_sign(0.7)) < 1e-9
    assert abs(s + 1) < 1e-9


def test_kernel_z2_sign_on_oneforms():
    assert abs(S.kernel_vector_z2_sign(0.7, 1, "L") - 1) < 1e-9


def test_gap_equals_smallest_invariant_frequency():
    # sigma^* sigma = |omega|^2, so the gap is 2 pi times the shortest nonzero
    # twisted frequency; for theta = exp(i f) with small f that is |(f/pi)(1,1)|
    for f in (0.7, 0.1):
        assert S.spectral_gap(f, 2) == pytest.approx(2 * math.sqrt(2) * f, rel=1e-10)


def test_gap_stable_in_truncation():
    g1, g2, g3 = (S.spectral_gap(0.7, n) for n in (1, 2, 3))
    assert g1 == pytest.approx(g2, rel=1e-12)
    assert g2 == pytest.approx(g3, rel=1e-12)


def test_pruned_gap_matches_full_assembly(basis):
    op = S.assemble(0.7, "L", 1, basis=basis)
    sv = op.singular_values()
    assert S.spectral_gap(0.7, 1) == pytest.approx(float(sv[sv > S.KERNEL_TOL].min()), rel=1e-12)


def test_gap_closes_toward_theta_one():
    gaps = [S.spectral_gap(f, 1) for f in (0.1, 0.01, 0.001)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-2


def test_gap_same_for_all_degrees():
    gL = S.spectral_gap(0.7, 2, "L")
    assert S.spectral_gap(0.7, 2, "Lstar") == pytest.approx(gL, rel=1e-12)
