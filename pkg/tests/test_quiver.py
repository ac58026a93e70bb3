import itertools
from fractions import Fraction

import numpy as np
import pytest

from g2kummer import quiver as Q

ZETA = [Fraction(1, 10)] * 6 + [Fraction(-6, 10)]


def exhaustive_generic(z):
    return not any(sum(z[i] for i in S) == 0
                   for r in range(1, 7) for S in itertools.combinations(range(7), r))


def test_is_generic_matches_exhaustive_search():
    rng = np.random.default_rng(0)
    for _ in range(10_000):
        v = [Fraction(int(x)) for x in rng.integers(-4, 5, 6)]
        z = v + [-sum(v)]
        assert Q.is_generic(z) == exhaustive_generic(z)


def test_generic_parameters_are_dense():
    rng = np.random.default_rng(1)
    hits = 0
    for _ in range(1000):
        v = [Fraction(int(x), 1000) for x in rng.integers(-1000, 1001, 6)]
        hits += Q.is_generic(v + [-sum(v)])
    assert hits / 1000 > 0.95


def test_zeta_validation():
    with pytest.raises(ValueError):
        Q.as_zeta([1] * 7)
    with pytest.raises(ValueError):
        Q.as_zeta([0] * 6)
    assert not Q.is_generic([0] * 7)
    assert Q.is_generic(ZETA)


def test_grading_enforced():
    B = np.zeros((3, 7, 7), dtype=complex)
    B[0, 0, 0] = 1
    with pytest.raises(Q.EquivarianceError):
        Q.QuiverRep(B)
    with pytest.raises(Q.EquivarianceError):
        Q.QuiverRep(np.zeros((3, 6, 6)))


def test_entries_round_trip():
    rep = Q.QuiverRep.random(3)
    assert np.array_equal(Q.QuiverRep.from_entries(rep.entries()).B, rep.B)


def test_orbit_model_commutes_and_has_zero_moment():
    rep = Q.orbit_model([1.0, 2.0 - 1j, 0.5j])
    assert Q.commutation_residual(rep) < 1e-24
    assert np.max(np.abs(Q.moment_map(rep))) < 1e-14


def test_moment_map_sums_to_zero_and_is_torus_invariant():
    rep = Q.QuiverRep.random(4)
    mu = Q.moment_map(rep)
    assert abs(mu.sum()) < 1e-12
    moved = Q.torus_action(rep, np.random.default_rng(0).uniform(0, 6, 7))
    assert np.allclose(Q.moment_map(moved), mu, atol=1e-12)
    assert Q.commutation_residual(moved) == pytest.approx(Q.commutation_residual(rep))


def test_torus_action_preserves_grading():
    rep = Q.QuiverRep.random(5)
    moved = Q.torus_action(rep, np.linspace(0, 1, 7))
    assert not np.any(moved.B[~Q.grading_mask()])


def test_solve_moment_generic():
    sol = Q.solve_moment(ZETA, seed=0)
    assert sol.converged
    assert sol.moment_residual < 1e-8
    assert sol.commutation < 1e-8


def test_solution_has_expected_tangent_dimension():
    # 42 real coordinates, 6 moment equations and a 6-dimensional torus orbit:
    # the smooth resolution is 6 real dimensional, so ker = 6 + 6 at a solution
    sol = Q.solve_moment(ZETA, seed=0)
    assert Q.constraint_jacobian_kernel(sol.rep) == 12


def test_zero_zeta_from_orbit_model():
    sol = Q.solve_moment([0] * 7)
    assert sol.converged


def test_solver_rejects_nongeneric_zeta():
    with pytest.raises(ValueError):
        Q.solve_moment([1, -1, 0, 0, 0, 0, 0])


def test_conjugation_power_and_permutation():
    assert Q.conjugation_power(np.eye(3)) == 1
    assert Q.conjugation_power(Q.cyclic_coordinate_permutation()) == 4
    assert Q.character_permutation(Q.cyclic_coordinate_permutation()) == (0, 4, 1, 5, 2, 6, 3)


def test_conjugation_power_rejects_non_normaliser():
    U = np.eye(3)[[1, 0, 2]]
    with pytest.raises(ValueError):
        Q.conjugation_power(U)
    with pytest.raises(ValueError):
        Q.conjugation_power(2 * np.eye(3))


def test_lift_criterion():
    P = Q.cyclic_coordinate_permutation()
    assert Q.lift_criterion(-np.eye(3), ZETA)
    assert not Q.lift_criterion(P, ZETA)
    # zeta constant on the orbits {1,4,2}, {3,5,6} of k -> 4k is preserved
    sym = [Fraction(0)] + [Fraction(x) for x in (1, 1, -1, 1, -1, -1)]
    assert Q.lift_criterion(P, sym)
