"""Equivariant representations for C^3/Z_7 with weights (1, 2, 4): moment map, commuting
variety, genericity of stability parameters and the lift criterion for normaliser elements.

Moment-map convention: mu(B)_k = (1/2) sum_j [B_j, B_j^dagger]_kk minus the mean over k,
the value on i pi_{R_k} of the trace-free centre.  Genericity and fixed-zeta verdicts do not
depend on a positive rescaling or an additive character.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

ORDER = 7
WEIGHTS = (1, 2, 4)


class EquivarianceError(ValueError):
    pass


def grading_mask(weights: Sequence[int] = WEIGHTS, n: int = ORDER) -> np.ndarray:
    """mask[j, p, q] = True iff p = q + w_j mod n."""
    mask = np.zeros((len(weights), n, n), dtype=bool)
    for j, w in enumerate(weights):
        for q in range(n):
            mask[j, (q + w) % n, q] = True
    return mask


@dataclass(frozen=True)
class QuiverRep:
    """B = (B_1, B_2, B_3) as a (3, 7, 7) complex array."""
    B: np.ndarray

    def __post_init__(self):
        if self.B.shape != (3, ORDER, ORDER):
            raise EquivarianceError(f"expected shape (3, 7, 7), got {self.B.shape}")
        if np.any(self.B[~grading_mask()] != 0):
            raise EquivarianceError("B violates the Z_7 character grading")

    @classmethod
    def from_entries(cls, x: np.ndarray) -> "QuiverRep":
        """x[j, q] is the entry (B_j)_{q + w_j, q}."""
        B = np.zeros((3, ORDER, ORDER), dtype=complex)
        for j, w in enumerate(WEIGHTS):
            for q in range(ORDER):
                B[j, (q + w) % ORDER, q] = x[j, q]
        return cls(B)

    def entries(self) -> np.ndarray:
        return np.array([[self.B[j, (q + w) % ORDER, q] for q in range(ORDER)]
                         for j, w in enumerate(WEIGHTS)])

    @classmethod
    def random(cls, seed: int = 0, scale: float = 1.0) -> "QuiverRep":
        rng = np.random.default_rng(seed)
        return cls.from_entries(scale * (rng.standard_normal((3, ORDER)) + 1j * rng.standard_normal((3, ORDER))))


def orbit_model(b: Sequence[complex]) -> QuiverRep:
    """Regular-representation model of the Z_7-orbit of b in C^3: B_j = b_j times the shift by w_j."""
    return QuiverRep.from_entries(np.repeat(np.asarray(b, complex)[:, None], ORDER, axis=1))


# ---------------------------------------------------------------- stability parameters

def as_zeta(zeta) -> tuple[Fraction, ...]:
    z = tuple(Fraction(x).limit_denominator(10 ** 12) if isinstance(x, float) else Fraction(x) for x in zeta)
    if len(z) != ORDER:
        raise ValueError("zeta needs 7 entries")
    if sum(z) != 0:
        raise ValueError("zeta must sum to zero")
    return z


def is_generic(zeta) -> bool:
    """No nonempty proper subset of the 7 characters has zeta-sum 0 (exact rationals).

    Dynamic programme over (sum, size) pairs of subsets.
    """
    z = as_zeta(zeta)
    reach = {(Fraction(0), 0)}
    for x in z:
        reach |= {(s + x, k + 1) for s, k in reach}
    return not any(s == 0 and 0 < k < ORDER for s, k in reach)


# ---------------------------------------------------------------- residuals

def _comm(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return X @ Y - Y @ X


def commutation_residual(rep: QuiverRep) -> float:
    """sum_{i<j} |[B_i, B_j]|_F^2."""
    B = rep.B
    return float(sum(np.linalg.norm(_comm(B[i], B[j])) ** 2 for i in range(3) for j in range(i + 1, 3)))


def moment_map(rep: QuiverRep) -> np.ndarray:
    B = rep.B
    raw = 0.5 * sum(np.real(np.diag(_comm(B[j], B[j].conj().T))) for j in range(3))
    return raw - raw.mean()


def torus_action(rep: QuiverRep, phases: np.ndarray) -> QuiverRep:
    """u B u^{-1} for u = diag(exp(i phases))."""
    u = np.exp(1j * np.asarray(phases))
    return QuiverRep(u[None, :, None] * rep.B * np.conj(u)[None, None, :])


# ---------------------------------------------------------------- solver

@dataclass(frozen=True)
class MomentSolve:
    rep: QuiverRep
    moment_residual: float       # |mu(B) - zeta|
    commutation: float           # sum |[B_i, B_j]|^2
    iterations: int
    gradient_norm: float
    penalty: float
    converged: bool


def _objective(B: np.ndarray, zeta: np.ndarray, lam: float):
    raw = 0.5 * sum(np.real(np.diag(_comm(B[j], B[j].conj().T))) for j in range(3))
    r = raw - raw.mean() - zeta
    comms = {(i, j): _comm(B[i], B[j]) for i in range(3) for j in range(i + 1, 3)}
    val = float(r @ r) + lam * float(sum(np.linalg.norm(C) ** 2 for C in comms.values()))
    # gradient with respect to conj(B): d|r|^2 gives (diag(r) B_j - B_j diag(r)) for each j
    g = np.empty_like(B)
    for j in range(3):
        g[j] = r[:, None] * B[j] - B[j] * r[None, :]
    for (i, j), C in comms.items():
        g[i] += lam * (C @ B[j].conj().T - B[j].conj().T @ C)
        g[j] -= lam * (C @ B[i].conj().T - B[i].conj().T @ C)
    return val, g


def solve_moment(zeta, seed: int = 0, start: Optional[QuiverRep] = None, tol: float = 1e-8,
                 max_iter: int = 10_000, penalty: float = 10.0) -> MomentSolve:
    """Gradient descent with Armijo backtracking on |mu(B) - zeta|^2 + penalty * commutation(B).

    The default start is the orbit model of b = (1, 1, 1) plus a seeded perturbation.  If the
    commutator residual stalls the penalty is raised once to 10 times its value.
    """
    z = as_zeta(zeta)
    if not is_generic(z) and any(z):
        raise ValueError("zeta is not generic")
    zeta_arr = np.array([float(x) for x in z])
    if start is None:
        rng = np.random.default_rng(seed)
        x = np.ones((3, ORDER)) + 0.1 * (rng.standard_normal((3, ORDER)) + 1j * rng.standard_normal((3, ORDER)))
        if not any(z):
            x = np.ones((3, ORDER), dtype=complex)
        start = QuiverRep.from_entries(x)
    B = start.B.astype(complex).copy()
    lam = penalty
    step = 0.1
    val, g = _objective(B, zeta_arr, lam)
    history = []
    it = 0
    raised = False
    for it in range(1, max_iter + 1):
        rep = QuiverRep(B)
        mres = float(np.linalg.norm(moment_map(rep) - zeta_arr))
        cres = commutation_residual(rep)
        if mres < tol and cres < tol:
            break
        gn2 = float(np.sum(np.abs(g) ** 2))
        while True:
            Bn = B - step * g
            vn, gn = _objective(Bn, zeta_arr, lam)
            if vn <= val - 0.5 * step * gn2 or step < 1e-14:
                break
            step *= 0.5
        B, val, g = Bn, vn, gn
        step *= 2.0
        history.append(cres)
        if not raised and len(history) > 500 and history[-1] > 0.5 * history[-500] and cres > tol:
            lam *= 10
            raised = True
            val, g = _objective(B, zeta_arr, lam)
    rep = QuiverRep(B)
    mres = float(np.linalg.norm(moment_map(rep) - zeta_arr))
    cres = commutation_residual(rep)
    return MomentSolve(rep, mres, cres, it, float(np.sqrt(np.sum(np.abs(g) ** 2))), lam,
                       mres < tol and cres < tol)


def constraint_jacobian_kernel(rep: QuiverRep, tol: float = 1e-6) -> int:
    """Real dimension of the kernel of d(mu, [B ^ B]) on the 42 real graded coordinates."""
    x0 = rep.entries()
    n = x0.size

    def F(v):
        x = (v[:n] + 1j * v[n:]).reshape(3, ORDER)
        r = QuiverRep.from_entries(x)
        B = r.B
        cs = [_comm(B[i], B[j]) for i in range(3) for j in range(i + 1, 3)]
        cvec = np.concatenate([c.ravel() for c in cs])
        return np.concatenate([moment_map(r), cvec.real, cvec.imag])

    v0 = np.concatenate([x0.ravel().real, x0.ravel().imag])
    h = 1e-6
    J = np.stack([(F(v0 + h * e) - F(v0 - h * e)) / (2 * h) for e in np.eye(2 * n)], axis=1)
    s = np.linalg.svd(J, compute_uv=False)
    return int(2 * n - np.sum(s > tol * max(s[0], 1.0)))


# ---------------------------------------------------------------- lift criterion

def generator(weights: Sequence[int] = WEIGHTS) -> np.ndarray:
    w = np.exp(2j * np.pi / ORDER)
    return np.diag([w ** k for k in weights])


def conjugation_power(U: np.ndarray, tol: float = 1e-10) -> int:
    """m with U g U^{-1} = g^m for the generator g; raises if U does not normalise Z_7."""
    U = np.asarray(U, complex)
    if np.max(np.abs(U.conj().T @ U - np.eye(3))) > tol:
        raise ValueError("U is not unitary")
    g = generator()
    c = U @ g @ U.conj().T
    for m in range(1, ORDER):
        if np.max(np.abs(c - np.linalg.matrix_power(g, m))) < tol:
            return m
    raise ValueError("U does not normalise Z_7")


def character_permutation(U: np.ndarray) -> tuple[int, ...]:
    """conj_U on the characters: R_k -> R_{k m} where U g U^{-1} = g^m."""
    m = conjugation_power(U)
    return tuple((k * m) % ORDER for k in range(ORDER))


def lift_criterion(U: np.ndarray, zeta) -> bool:
    """True iff the induced permutation of characters fixes zeta."""
    z = as_zeta(zeta)
    perm = character_permutation(U)
    return all(z[perm[k]] == z[k] for k in range(ORDER))


def cyclic_coordinate_permutation() -> np.ndarray:
    """Permutation matrix (z1, z2, z3) -> (z3, z1, z2); it conjugates g to g^4."""
    P = np.zeros((3, 3))
    P[1, 0] = P[2, 1] = P[0, 2] = 1
    return P
