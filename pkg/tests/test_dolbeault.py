import math

import numpy as np
import pytest

from g2kummer import dolbeault as D
from g2kummer import forms as Fm


@pytest.fixture(scope="module")
def suite():
    return D.star_omega_identity_suite(1000, seed=0)


@pytest.fixture(scope="module")
def block():
    return D.build_block_operator(N=2)


def test_gram_is_power_of_two():
    e = D.DolbeaultForm(1, np.array([1, 0, 0], dtype=complex))
    assert D.hermitian(e, e) == pytest.approx(2.0)
    # |dz|^2 = 2 from the realified metric
    mv = e.to_multivector()
    assert float(np.sum(np.abs(mv.coeffs) ** 2)) == pytest.approx(2.0)


def test_form_degree_validation():
    with pytest.raises(ValueError):
        D.DolbeaultForm(1, np.zeros(2))
    with pytest.raises(ValueError):
        D.DolbeaultForm(4, np.zeros(1))


def test_defining_identity(suite):
    assert suite.defining < 1e-12


@pytest.mark.parametrize("name", ["conj_hodge", "antilinear", "square", "isometry", "dbar_adjoint"])
def test_star_omega_identities(suite, name):
    assert getattr(suite, name) < 1e-12


def test_identity_suite_with_fiber():
    rep = D.star_omega_identity_suite(100, seed=1, fiber=(3,))
    assert rep.max_residual < 1e-12


def test_star_omega_square_sign_by_degree():
    rng = np.random.default_rng(5)
    for q in range(4):
        e = D.DolbeaultForm.random(q, rng)
        twice = D.star_omega(D.star_omega(e))
        assert np.allclose(twice.coeffs, (-1) ** (q * (3 - q)) * e.coeffs)


def test_dbar_squares_to_zero():
    w = np.random.default_rng(0).standard_normal((10, 6))
    for q in range(2):
        assert np.max(np.abs(D.dbar_symbol(q + 1, w) @ D.dbar_symbol(q, w))) < 1e-14


def test_dbar_laplacian_is_half_euclidean_laplacian():
    # |d/dzbar|^2 = |w|^2/4 per coordinate and the adjoint carries the Gram ratio 2
    w = np.random.default_rng(1).standard_normal((4, 6))
    for q in range(4):
        n = len(D.BASIS[q])
        lap = np.zeros((4, n, n), dtype=complex)
        if q < 3:
            lap += D.dbar_adjoint_symbol(q, w) @ D.dbar_symbol(q, w)
        if q > 0:
            lap += D.dbar_symbol(q - 1, w) @ D.dbar_adjoint_symbol(q - 1, w)
        target = np.sum(w ** 2, axis=1)[:, None, None] * np.eye(n)
        assert np.max(np.abs(2 * lap - target)) < 1e-12


def test_block_factorisation(block):
    assert block.factorization_residual() < 1e-10


def test_block_adjointness(block):
    assert block.adjointness_residual() < 1e-12


def test_kernel_of_LLstar_is_constants(block):
    assert block.zero_modes == 1
    assert block.kernel_dimension_LLstar() == 8


def test_twisted_monodromy_block():
    mu = np.array([0.1, 0.2, 0.3, 0.15, 0.05, 0.25])
    op = D.build_block_operator(D.FlatMonodromy(mu), N=1)
    assert op.zero_modes == 0
    assert op.factorization_residual() < 1e-10
    assert op.adjointness_residual() < 1e-12
    assert op.kernel_dimension_LLstar() == 0


def test_circle_length_enters_only_through_ds():
    op = D.build_block_operator(N=1, circumference=3.0)
    assert op.factorization_residual() < 1e-10


def test_omega_sharp_scale_from_unitarity():
    assert D._unitary_scale() == pytest.approx(8.0)


def test_derham_conjugation():
    rep = D.derham_conjugation_check(N=1)
    assert rep.residual_L < 1e-12
    assert rep.residual_Lstar < 1e-12
    assert rep.odd_isometry < 1e-12 and rep.even_isometry < 1e-12
    assert rep.phase == pytest.approx(8.0)


def test_derham_conjugation_fails_with_wrong_phase():
    rep = D.derham_conjugation_check(N=1, lam=8j)
    assert rep.residual_L > 1e-3


def test_derham_symbol_matches_spectral_square():
    w = np.random.default_rng(2).standard_normal((5, 7))
    S = D.derham_symbol(w)
    # the de Rham operator is first order elliptic: S^H S has eigenvalues |w|^2
    ev = np.linalg.eigvalsh(np.conj(np.swapaxes(S, 1, 2)) @ S)
    assert np.allclose(ev, np.sum(w ** 2, axis=1)[:, None], atol=1e-12)


def test_hym_predicate_on_primitive_11():
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert D.hym_predicate(D.primitive_11_form(rng)) == (True, True)


def test_hym_predicate_rejects_kahler_and_20_forms():
    om = sum((Fm.MultiVector.basis(2 * j, 6) ^ Fm.MultiVector.basis(2 * j + 1, 6) for j in range(3)),
             Fm.MultiVector.zero(6))
    assert D.hym_predicate(om) == (False, False)
    f20 = (D._dz(0, False) ^ D._dz(1, False)).real
    assert D.hym_predicate(f20) == (False, False)


def test_hym_pullback_is_g2_instanton():
    F = D.primitive_11_form(np.random.default_rng(3))
    G = D.embed_in_model(F)
    assert (Fm.model_psi() ^ G).max_abs() < 1e-12
