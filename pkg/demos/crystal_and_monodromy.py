"""Tour of the group Gamma and the representation family f_theta.

Run with ``python3 demos/crystal_and_monodromy.py``.
"""
import numpy as np

from g2kummer import crystal as C
from g2kummer import monodromy as M

# The group: generators are exact rational isometries of R^7.
results = C.verify_presentation()
print(f"{sum(r.passed for r in results)} of {len(results)} relators evaluate to the identity")
print(f"Gamma / Z^7 has {len(C.quotient_enumerate())} elements")

# Points with nontrivial isotropy form a single family of lines.
for s in C.singular_strata():
    print(f"singular line: isotropy Z/{s.isotropy_order}, angles {[str(a) for a in s.rotation_angles]},"
          f" lattice step {s.lattice_step:.4f}")

# The representation descends to Gamma for every theta on the unit circle,
# computed exactly at roots of unity and in floating point elsewhere.
for theta in ("exact:1/7", 0.7):
    checks = M.verify_descends(theta)
    print(f"theta={theta}: relations hold: {all(c.passed for c in checks)}")

# Invariants in so(7)-adjoint and in one-forms with adjoint values.  Generic
# theta has none and one respectively; theta = +1 and -1 have more.
# Plain floats are read as angles, so the exceptional values are passed as complex numbers.
for th in (np.exp(0.7j), np.exp(2.0j), 1 + 0j, -1 + 0j):
    adj = M.invariant_subspace(th, "adjoint").dim
    one = M.invariant_subspace(th, "oneform").dim
    print(f"theta={complex(th):.3f}: invariant dims (adjoint, oneform) = ({adj}, {one})")

# c_theta blows up as theta -> 1 at a linear rate.
for f in (1e-1, 1e-2, 1e-3):
    nd = M.nondegeneracy_constant(np.exp(1j * f))
    print(f"f={f:g}: sigma_min={nd.sigma_min:.6g}  sigma_min/f={nd.sigma_min / f:.4f}  c_theta={nd.c_theta:.4g}")

# Dropping the complex conjugation on b breaks the presentation.
broken = [c.label for c in M.verify_descends(0.7, rep=M.build_f_theta(0.7, drop_conjugation=True)) if not c.passed]
print(f"without conjugation {len(broken)} relations fail, e.g. {broken[0]}")
