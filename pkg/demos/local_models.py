"""The local models: Dolbeault operators on C^3, the Z/7 quiver and a toy contraction.

Run with ``python3 demos/local_models.py``.
"""
from fractions import Fraction

import numpy as np

from g2kummer import contraction as K
from g2kummer import dolbeault as D
from g2kummer import forms as Fm
from g2kummer import quiver as Q

# *_Omega: an antilinear map Lambda^{0,q} -> Lambda^{0,3-q}.  All identities at once.
rep = D.star_omega_identity_suite(samples=200)
print("*_Omega identities:", {k: (f"{v:.1e}" if isinstance(v, float) else v) for k, v in rep.as_dict().items()})

# The block operator on S^1 x T^6 factorises through dbar + dbar^*.
blk = D.build_block_operator(N=2)
print(f"block operator: factorisation {blk.factorization_residual():.1e}, "
      f"adjointness {blk.adjointness_residual():.1e}, ker L L* = {blk.kernel_dimension_LLstar()}")

# De Rham side.  The Omega# phase is fitted, and the wrong phase is far off.
good = D.derham_conjugation_check(N=1)
bad = D.derham_conjugation_check(N=1, lam=8j)
print(f"Omega# = {good.phase} d1^d2^d3: residual {good.residual_L:.1e}; with 8i: {bad.residual_L:.2f}")

# HYM: a primitive (1,1)-form passes, the Kahler form does not.
rng = np.random.default_rng(0)
F = D.primitive_11_form(rng)
omega = sum((Fm.MultiVector.basis(2 * j, 6) ^ Fm.MultiVector.basis(2 * j + 1, 6) for j in range(3)),
            Fm.MultiVector.zero(6))
print("HYM verdicts: primitive (1,1) ->", D.hym_predicate(F), " omega ->", D.hym_predicate(omega))

# Quiver for Z/7 acting with weights (1, 2, 4).  Solve mu = zeta on the commuting locus.
zeta = [Fraction(1, 10)] * 6 + [Fraction(-3, 5)]
sol = Q.solve_moment(zeta)
print(f"moment map solve: {sol.iterations} iterations, |mu - zeta| = {sol.moment_residual:.1e}, "
      f"|[B,B]| = {sol.commutation:.1e}")
print(f"Jacobian kernel dimension at the solution: {Q.constraint_jacobian_kernel(sol.rep)}")
P = Q.cyclic_coordinate_permutation()
print(f"cyclic permutation of coordinates permutes characters as {Q.character_permutation(P)}; "
      f"lifts for this zeta: {Q.lift_criterion(P, zeta)}")

# Toy fixed-point problem b = -(Q(Rb) + e(f)) on the ball of radius 2|e|.
toy = K.toy_instanton_family()
for f in (-0.5, 0.0, 0.5):
    fp = K.fix_point(toy.family, f)
    e = np.linalg.norm(toy.e(f))
    print(f"f={f:+.1f}: |b| = {np.linalg.norm(fp.b):.4f} <= 2|e| = {2 * e:.4f}, "
          f"|Rb| = {np.linalg.norm(toy.R @ fp.b):.4f} <= 2c|e| = {2 * toy.c * e:.4f}")
db = K.derivative_bound(toy.family, 0.3)
print(f"|D Fix| = {db.derivative_norm:.4f} <= {db.bound:.4f} (contraction constant {db.constant:.3f})")
