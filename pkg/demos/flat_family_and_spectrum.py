"""The connection family a_f on T^7/Gamma and the twisted Fourier model.

Run with ``python3 demos/flat_family_and_spectrum.py`` (about 20 seconds,
most of it in the Poincare estimate).
"""
import numpy as np

from g2kummer import flat_family as F
from g2kummer import monodromy as M
from g2kummer import spectral as S

f = 0.7

# The gauge transformation turns the trivial flat structure into f_theta.
# Note the half angle: theta = exp(i f / 2).
print("gauge residuals, theta = exp(i f/2):", {k: f"{v:.1e}" for k, v in F.gauge_equivariance_residuals(f).items()})
print("gauge residuals, theta = exp(i f):  ",
      {k: f"{v:.3f}" for k, v in F.gauge_equivariance_residuals(f, theta=np.exp(1j * f)).items()})

# Tubes of radius 2 kappa around distinct singular lines must not meet.
sep = F.min_line_separation()
print(f"minimum distance between singular lines {sep:.4f}; default kappa {F.DEFAULT_KAPPA} (4 kappa = {4 * F.DEFAULT_KAPPA:.2f})")

# Near the lines the connection is the constant model form.
print(f"deep tube residual: {F.deep_tube_residual(f):.1e}")

# The curvature is zero.  The finite-difference residual decays like h^2.
reps = F.curvature_convergence(f)
for r in reps:
    print(f"h={r.h:.2e}: max |dA| = {r.dA_max:.3e}, max |[A,A]| = {r.bracket_max:.1e}")
print("ratios:", [round(reps[i].dA_max / reps[i + 1].dA_max, 2) for i in range(2)])

# d/df a_f = harmonic part + exact part, and the harmonic part is orthogonal
# to the tangent directions d_A xi of the gauge orbit.
dec = F.family_derivative_decomposition(f)
pair = F.harmonic_pairing(f, samples=20)
print(f"decomposition residual {dec.fd_residual:.1e}; pairing with d_A xi {pair.max_relative:.1e} (relative)")

# Poincare constant on the complement of a small tube, theta = i.
p = F.poincare_constant(1j)
print(f"sigma_min on U (theta = i): {p.sigma_min:.4f}, Poincare constant {p.constant:.4f}")

# Twisted Fourier model: kernels of L, L* and of the parallel-section operator.
rep = S.kernel_dims(np.exp(1j * f), N=1)
print(f"theta = exp({f}i): ker L = {rep.ker_L}, ker L* = {rep.ker_Lstar}, sections = {rep.ker_sections}")
print(f"spectral gap {S.spectral_gap(np.exp(1j * f), N=1):.6f} vs 2 sqrt(2) f = {2 * np.sqrt(2) * f:.6f}")

# Both Z_2 signs from the representation side.
print(f"Z_2 acts on coker L by {M.coker_z2_sign():+.0f} and on the invariant one-form by {M.oneform_z2_sign():+.0f}")
