from fractions import Fraction

import numpy as np
import pytest

from g2kummer import crystal as C
from g2kummer import words as W


def t(*v):
    return C.IsometryElement.translation_by(v)


def test_beta_squared_is_t1_t3():
    # t_k is the conjugate a^k t a^-k, so t1 t3 translates along e6 + e5
    b = C.GENS["b"]
    assert C.compose(b, b) == C.eval_word("t1 t3") == t(0, 0, 0, 0, 1, 1, 0)


def test_alpha_order_seven():
    a = C.GENS["a"]
    g = C.IsometryElement.identity()
    for k in range(1, 8):
        g = a @ g
        assert (g == C.IsometryElement.identity()) == (k == 7)


def test_b_t_commutator():
    assert C.eval_word("[b,t]") == C.eval_word("t^-2")


def test_all_relations_hold():
    results = C.verify_presentation()
    assert len(results) == 37
    assert all(r.passed for r in results), [r.label for r in results if not r.passed]


def test_perturbed_relation_fails():
    bad = [("2", "b^2 = t1 t2", "b^2 t2^-1 t1^-1")]
    (res,) = C.verify_presentation(bad)
    assert not res.passed
    assert res.residual_translation is not None


def test_loaded_data_matches_defaults():
    data = C.load_crystal()
    assert data.generators == C.default_generators()
    assert data.relations == C.default_relations()


def test_quotient_has_56_classes_and_one_translation_class():
    reps = C.quotient_enumerate()
    assert len(reps) == 56
    assert sum(g.is_translation() for g in reps) == 1
    assert len({g.rotation for g in reps}) == 56


def test_normal_form_round_trip():
    rng = np.random.default_rng(0)
    letters = ["a", "b", "t"]
    for _ in range(50):
        w = tuple((letters[i], int(e)) for i, e in zip(rng.integers(0, 3, 8), rng.choice([-1, 1], 8)))
        g = C.eval_word(W.normalize(w))
        nf = C.normal_form(g)
        assert C.eval_word(nf.word()) == g


def test_normal_form_rejects_non_members():
    with pytest.raises(ValueError):
        C.normal_form(t(Fraction(1, 3), 0, 0, 0, 0, 0, 0))


def test_fixed_locus_of_alpha_is_the_axis_line():
    loc = C.fixed_locus(C.GENS["a"])
    assert loc is not None and loc.dim == 1
    d = np.array([float(x) for x in loc.basis[0]])
    axis = np.array([1, 1, 1, -1, 1, 1, 1.0])
    assert abs(abs(d @ axis) - np.linalg.norm(d) * np.linalg.norm(axis)) < 1e-12


def test_fixed_locus_empty_for_translation_and_beta():
    assert C.fixed_locus(C.GENS["t"]) is None
    assert C.fixed_locus(C.GENS["b"]) is None


def test_single_singular_stratum():
    strata = C.singular_strata()
    assert len(strata) == 1
    s = strata[0]
    assert s.isotropy_order == 7
    assert sorted(s.rotation_angles) == [Fraction(1, 7), Fraction(2, 7), Fraction(4, 7)]
    assert abs(s.lattice_step - 7 ** 0.5) < 1e-12
    assert s.step_translation == tuple(Fraction(x) for x in (1, 1, 1, -1, 1, 1, 1))


def test_adapted_basis_is_oriented_and_diagonalises_alpha():
    B = C.adapted_basis()
    assert np.allclose(B.T @ B, np.eye(7), atol=1e-12)
    assert np.linalg.det(B) > 0
    R = C.rotation_in_adapted_frame(C.GENS["a"])
    assert abs(R[0, 0] - 1) < 1e-12
    for blk, k in zip(range(1, 7, 2), (1, 2, 4)):
        ang = 2 * np.pi * k / 7
        sub = R[blk:blk + 2, blk:blk + 2]
        assert abs(sub[0, 0] - np.cos(ang)) < 1e-12


def test_invalid_rotation_rejected():
    with pytest.raises(ValueError):
        C.IsometryElement.make([[2] + [0] * 6] + [[0] * i + [1] + [0] * (6 - i) for i in range(1, 7)], [0] * 7)
