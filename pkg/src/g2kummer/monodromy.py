"""The theta-family of monodromy representations Gamma -> SO(14).

Group elements act on C^7 by semilinear maps w -> A w + B conj(w).  Entries
are complex floats, or exact ``Cyclo`` numbers when theta is a root of unity.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from . import crystal as C
from . import words as W
from .cyclotomic import Cyclo

Scalar = Union[complex, Cyclo]

RANK_TOL = 1e-9
GUARD_BAND = (1e-11, 1e-7)


def _conj(M: np.ndarray) -> np.ndarray:
    if M.dtype == object:
        return np.vectorize(lambda x: x.conjugate() if isinstance(x, Cyclo) else x, otypes=[object])(M)
    return np.conj(M)


def _exact_matmul(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Object-array product skipping zero entries (exact cyclotomic entries)."""
    n, k = X.shape
    m = Y.shape[1]
    out = np.empty((n, m), dtype=object)
    for i in range(n):
        for j in range(m):
            acc = None
            for l in range(k):
                x, y = X[i, l], Y[l, j]
                if _is_zero(x) or _is_zero(y):
                    continue
                acc = x * y if acc is None else acc + x * y
            out[i, j] = acc
    # fill zeros with a field zero of the right type
    proto = next((v for v in X.ravel() if isinstance(v, Cyclo)), None)
    for idx in np.ndindex(n, m):
        if out[idx] is None:
            out[idx] = Cyclo.const(proto.n, 0) if proto is not None else 0
    return out


def _exact_add(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    out = np.empty(X.shape, dtype=object)
    for idx in np.ndindex(*X.shape):
        x, y = X[idx], Y[idx]
        out[idx] = y if _is_zero(x) else (x if _is_zero(y) else x + y)
    return out


def _is_zero(x) -> bool:
    return x.is_zero() if isinstance(x, Cyclo) else x == 0


@dataclass(frozen=True)
class SemilinearMap:
    """w -> A w + B conj(w) on C^7."""

    A: np.ndarray
    B: np.ndarray

    @property
    def exact(self) -> bool:
        return self.A.dtype == object

    def __matmul__(self, other: "SemilinearMap") -> "SemilinearMap":
        if self.exact:
            A = _exact_add(_exact_matmul(self.A, other.A), _exact_matmul(self.B, _conj(other.B)))
            B = _exact_add(_exact_matmul(self.A, other.B), _exact_matmul(self.B, _conj(other.A)))
            return SemilinearMap(A, B)
        A = self.A @ other.A + self.B @ _conj(other.B)
        B = self.A @ other.B + self.B @ _conj(other.A)
        return SemilinearMap(A, B)

    def adjoint(self) -> "SemilinearMap":
        """Adjoint for the real inner product Re<.,.>; equals the inverse when orthogonal."""
        return SemilinearMap(_conj(self.A).T, self.B.T.copy())

    inverse = adjoint

    def __call__(self, w: np.ndarray) -> np.ndarray:
        return self.A @ w + self.B @ np.conj(w)

    def numeric(self) -> "SemilinearMap":
        if not self.exact:
            return self
        f = np.vectorize(complex, otypes=[complex])
        return SemilinearMap(f(self.A), f(self.B))

    def realify(self) -> np.ndarray:
        """14x14 real matrix in the ordering (Re z1, Im z1, ..., Re z7, Im z7)."""
        s = self.numeric()
        A, B = s.A, s.B
        n = A.shape[0]
        M = np.zeros((2 * n, 2 * n))
        M[0::2, 0::2] = A.real + B.real
        M[0::2, 1::2] = -A.imag + B.imag
        M[1::2, 0::2] = A.imag + B.imag
        M[1::2, 1::2] = A.real - B.real
        return M

    def equals(self, other: "SemilinearMap", tol: float = 1e-12) -> bool:
        if self.exact and other.exact:
            return all(_is_zero(x) for x in (self.A - other.A).ravel()) and \
                all(_is_zero(x) for x in (self.B - other.B).ravel())
        a, b = self.numeric(), other.numeric()
        return max(np.max(np.abs(a.A - b.A)), np.max(np.abs(a.B - b.B))) <= tol

    def distance(self, other: "SemilinearMap") -> float:
        a, b = self.numeric(), other.numeric()
        return float(max(np.max(np.abs(a.A - b.A)), np.max(np.abs(a.B - b.B))))


def _zeros(exact_n: Optional[int]) -> np.ndarray:
    if exact_n is None:
        return np.zeros((7, 7), dtype=complex)
    Z = np.empty((7, 7), dtype=object)
    for idx in np.ndindex(7, 7):
        Z[idx] = Cyclo.const(exact_n, 0)
    return Z


def identity_map(exact_n: Optional[int] = None) -> SemilinearMap:
    A = _zeros(exact_n)
    one = 1 if exact_n is None else Cyclo.const(exact_n, 1)
    for i in range(7):
        A[i, i] = one
    return SemilinearMap(A, _zeros(exact_n))


def parse_theta(value) -> tuple[Scalar, Optional[int]]:
    """Accepts a complex unit number, an angle in radians, or "exact:k/n"."""
    if isinstance(value, Cyclo):
        return value, value.n
    if isinstance(value, str):
        value = value.strip()
        if value.startswith("exact:"):
            k, n = value[6:].split("/")
            n = int(n)
            return Cyclo.root(n, int(k)), n
        return cmath.exp(1j * float(value)), None
    if isinstance(value, (int, float)):
        return cmath.exp(1j * float(value)), None
    return complex(value), None


@dataclass(frozen=True)
class RepFamilyPoint:
    theta: Scalar
    f: Optional[float]
    a: SemilinearMap
    b: SemilinearMap
    t: SemilinearMap
    exact_n: Optional[int] = None

    @property
    def images(self) -> dict[str, SemilinearMap]:
        return {"a": self.a, "b": self.b, "t": self.t}

    @property
    def theta_complex(self) -> complex:
        return complex(self.theta)

    def of_word(self, w) -> SemilinearMap:
        if isinstance(w, str):
            w = W.parse_word(w)
        return W.evaluate(w, self.images, SemilinearMap.__matmul__, SemilinearMap.inverse,
                          identity_map(self.exact_n))

    def of_element(self, g: C.IsometryElement) -> SemilinearMap:
        return self.of_word(C.normal_form(g).word())


def build_f_theta(theta, drop_conjugation: bool = False) -> RepFamilyPoint:
    """Images of a, b, t.  ``drop_conjugation`` mutates f(b) (used to test failure reports)."""
    th, n = parse_theta(theta)
    if n is None and abs(abs(th) - 1) > 1e-14:
        raise ValueError("theta must have modulus 1")
    one = 1 if n is None else Cyclo.const(n, 1)
    # a: (z2, z3, z7, conj z6, conj z4, z1, z5)
    A, B = _zeros(n), _zeros(n)
    for row, (src, anti) in enumerate([(2, False), (3, False), (7, False), (6, True), (4, True), (1, False), (5, False)]):
        (B if anti else A)[row, src - 1] = one
    fa = SemilinearMap(A, B)
    # b: (th conj z1, th conj z2, conj z3, conj z4, th z5, th z6, z7)
    A, B = _zeros(n), _zeros(n)
    for row, (c, anti) in enumerate([(th, True), (th, True), (one, True), (one, True), (th, False), (th, False), (one, False)]):
        if drop_conjugation and row == 0:
            anti = False
        (B if anti else A)[row, row] = c
    fb = SemilinearMap(A, B)
    A = _zeros(n)
    for i in range(7):
        A[i, i] = one
    A[0, 0] = th * th
    ft = SemilinearMap(A, _zeros(n))
    fval = None if n is not None else math.atan2(th.imag, th.real)
    if n is not None:
        k = next(k for k in range(n) if (Cyclo.root(n, k) - th).is_zero())
        fval = 2 * math.pi * k / n
    return RepFamilyPoint(th, fval, fa, fb, ft, n)


@dataclass(frozen=True)
class RelationCheck:
    family: str
    label: str
    passed: bool
    residual: float


def verify_descends(theta, tol: float = 1e-12, rep: Optional[RepFamilyPoint] = None) -> list[RelationCheck]:
    """Evaluate every relator of the presentation on f_theta (exactly for roots of unity)."""
    rep = build_f_theta(theta) if rep is None else rep
    ident = identity_map(rep.exact_n)
    out = []
    for fam, label, rel in C.default_relations():
        g = rep.of_word(rel)
        res = g.distance(ident)
        ok = g.equals(ident) if rep.exact_n is not None else res <= tol
        out.append(RelationCheck(fam, label, ok, res))
    return out


# ---------------------------------------------------------------- adjoint action

@lru_cache(maxsize=1)
def so_basis() -> np.ndarray:
    """Orthonormal basis (E_ij - E_ji, i<j) of so(14) for <X,Y> = -tr(XY)/2."""
    out = []
    for i in range(14):
        for j in range(i + 1, 14):
            X = np.zeros((14, 14))
            X[i, j], X[j, i] = 1.0, -1.0
            out.append(X)
    return np.array(out)


_IU = np.triu_indices(14, 1)


def so_coords(X: np.ndarray) -> np.ndarray:
    return X[..., _IU[0], _IU[1]]


def so_from_coords(c: np.ndarray) -> np.ndarray:
    X = np.zeros(c.shape[:-1] + (14, 14), dtype=c.dtype)
    X[..., _IU[0], _IU[1]] = c
    return X - np.swapaxes(X, -1, -2)


def ad_matrix(M: np.ndarray) -> np.ndarray:
    """91x91 matrix of X -> M X M^T in the basis so_basis()."""
    imgs = np.einsum("ab,kbc,dc->kad", M, so_basis(), M)
    return so_coords(imgs).T


def e_wedge_f(i: int) -> np.ndarray:
    """Generator of rotations in the (e_i, f_i = i e_i) plane: multiplication by -i on z_i."""
    X = np.zeros((14, 14))
    X[2 * i, 2 * i + 1], X[2 * i + 1, 2 * i] = 1.0, -1.0
    return X


# sign pattern making sum_i s_i e_i (x) e_i^f_i invariant; fixed by the invariant_vector test
INVARIANT_SIGNS = (1, 1, 1, 1, 1, 1, 1)


def reference_invariant(signs=None) -> np.ndarray:
    """sum_i s_i e_i (x) e_i^f_i as a vector in R^7 (x) so(14), unit norm."""
    s = INVARIANT_SIGNS if signs is None else signs
    v = np.zeros((7, 91))
    for i in range(7):
        v[i] = s[i] * so_coords(e_wedge_f(i))
    v = v.ravel()
    return v / np.linalg.norm(v)


def _generator_rotations() -> list[np.ndarray]:
    g = C.GENS
    return [g["a"].rotation_array(), g["b"].rotation_array(), np.eye(7)]


@dataclass(frozen=True)
class SubspaceResult:
    basis: np.ndarray          # rows
    singular_values: np.ndarray
    indeterminate: tuple[float, ...]

    @property
    def dim(self) -> int:
        return self.basis.shape[0]


def _nullspace(M: np.ndarray, tol: float = RANK_TOL) -> SubspaceResult:
    _, s, vt = np.linalg.svd(M)
    n = M.shape[1]
    sv = np.concatenate([s, np.zeros(n - s.size)]) if s.size < n else s
    null = vt[sv < tol]
    border = tuple(float(x) for x in sv if GUARD_BAND[0] <= x <= GUARD_BAND[1])
    return SubspaceResult(null, sv, border)


def adjoint_images(rep: RepFamilyPoint) -> list[np.ndarray]:
    return [ad_matrix(g.realify()) for g in (rep.a, rep.b, rep.t)]


def invariant_subspace(theta, space: str = "adjoint") -> SubspaceResult:
    """Vectors fixed by rho(a), rho(b), rho(t) (stacked SVD nullspace)."""
    rep = build_f_theta(theta)
    ads = adjoint_images(rep)
    if space == "adjoint":
        blocks = [Ad - np.eye(91) for Ad in ads]
    elif space in ("oneform", "oneform_adjoint", "oneform⊗adjoint"):
        blocks = [np.kron(R, Ad) - np.eye(637) for R, Ad in zip(_generator_rotations(), ads)]
    else:
        raise ValueError(f"unknown space {space!r}")
    return _nullspace(np.vstack(blocks))


def stacked_map(theta) -> np.ndarray:
    rep = build_f_theta(theta)
    return np.vstack([np.eye(91) - Ad for Ad in adjoint_images(rep)])


@dataclass(frozen=True)
class Nondegeneracy:
    sigma_min: float
    c_theta: float


def nondegeneracy_constant(theta) -> Nondegeneracy:
    """c with |xi| <= c * max_g |(I - Ad_g) xi|, g in {a, b, t}.

    sigma_min is the smallest singular value of the stacked map; since the
    stacked norm is at most sqrt(3) times the max norm, c = sqrt(3)/sigma_min.
    """
    s = np.linalg.svd(stacked_map(theta), compute_uv=False)
    smin = float(s[-1])
    if smin < 1e-12:
        raise ValueError("sigma_min below 1e-12: theta is +-1 or numerically degenerate")
    return Nondegeneracy(smin, math.sqrt(3) / smin)


def sigma_min(theta) -> float:
    return float(np.linalg.svd(stacked_map(theta), compute_uv=False)[-1])


@dataclass(frozen=True)
class CommutantResult:
    basis: np.ndarray                  # (k, 14, 14)
    orthogonal_elements: tuple[np.ndarray, ...]


def commutant(theta) -> CommutantResult:
    """Real 14x14 X commuting with f_theta(a), f_theta(b), f_theta(t)."""
    rep = build_f_theta(theta)
    Ms = [g.realify() for g in (rep.a, rep.b, rep.t)]
    E = np.eye(196).reshape(196, 14, 14)
    rows = [np.array([(X @ M - M @ X).ravel() for X in E]).T for M in Ms]
    null = _nullspace(np.vstack(rows)).basis.reshape(-1, 14, 14)
    return CommutantResult(null, tuple(_orthogonal_in_span(null)))


def _orthogonal_in_span(basis: np.ndarray) -> list[np.ndarray]:
    """Solve X X^T = I, det X = 1 for X in the span (closed form when the span is R*I)."""
    k = basis.shape[0]
    if k == 1:
        X = basis[0]
        # X = c * X0 ; X X^T = c^2 X0 X0^T must be I
        G = X @ X.T
        c2 = np.trace(G) / 14
        if not np.allclose(G, c2 * np.eye(14), atol=1e-10):
            return []
        c = 1 / math.sqrt(c2)
        sols = [c * X, -c * X]
        return [S for S in sols if np.linalg.det(S) > 0]
    # general case: least squares from several starts, deduplicated
    from scipy.optimize import least_squares
    rng = np.random.default_rng(0)
    found: list[np.ndarray] = []

    def resid(c):
        X = np.tensordot(c, basis, 1)
        return (X @ X.T - np.eye(14)).ravel()

    for _ in range(20):
        r = least_squares(resid, rng.standard_normal(k), xtol=1e-14, ftol=1e-14)
        X = np.tensordot(r.x, basis, 1)
        if np.max(np.abs(resid(r.x))) < 1e-9 and np.linalg.det(X) > 0:
            if not any(np.allclose(X, Y, atol=1e-7) for Y in found):
                found.append(X)
    return found


def eigen_multiset(M: np.ndarray, decimals: int = 8) -> dict[complex, int]:
    ev = np.linalg.eigvals(M)
    out: dict[complex, int] = {}
    for z in ev:
        key = complex(round(z.real, decimals) + 0.0, round(z.imag, decimals) + 0.0)
        out[key] = out.get(key, 0) + 1
    return out


def b_eigen_multiplicities(theta) -> dict[str, int]:
    """Complex multiplicities of 1, -1, theta, conj(theta) for realified f_theta(b)."""
    rep = build_f_theta(theta)
    th = rep.theta_complex
    ev = np.linalg.eigvals(rep.b.realify())
    out = {"1": 0, "-1": 0, "theta": 0, "conj_theta": 0}
    for z in ev:
        for name, target in (("1", 1), ("-1", -1), ("theta", th), ("conj_theta", th.conjugate())):
            if abs(z - target) < 1e-8:
                out[name] += 1
    return out


def conjugacy_verdict(theta1, theta2) -> bool:
    """False when the eigen-multisets of f(b) differ (representations not conjugate)."""
    m1 = eigen_multiset(build_f_theta(theta1).b.realify())
    m2 = eigen_multiset(build_f_theta(theta2).b.realify())
    return m1 == m2


# ---------------------------------------------------------------- Z2 action

def R0(exact_n: Optional[int] = None) -> SemilinearMap:
    """Componentwise complex conjugation."""
    idm = identity_map(exact_n)
    return SemilinearMap(idm.B, idm.A)


def _tau(i: int) -> C.IsometryElement:
    e = [0] * 7
    e[i - 1] = 1
    return C.IsometryElement.translation_by(e)


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    passed: bool
    residual: float


def z2_lift_check(theta=0.7, tol: float = 1e-12) -> list[IdentityCheck]:
    minus = C.IsometryElement.make((-np.eye(7, dtype=int)).tolist(), [0] * 7)
    g = C.GENS
    t1, t2, t5, t6 = _tau(1), _tau(2), _tau(5), _tau(6)
    beta_img = t1.inverse() @ t2.inverse() @ t5.inverse() @ t6.inverse() @ g["b"]
    out = []
    for name, lhs, rhs in [("(-1)tau1(-1) = tau1^-1", minus @ g["t"] @ minus, g["t"].inverse()),
                           ("(-1)alpha(-1) = alpha", minus @ g["a"] @ minus, g["a"]),
                           ("(-1)beta(-1) = tau1^-1 tau2^-1 tau5^-1 tau6^-1 beta", minus @ g["b"] @ minus, beta_img)]:
        out.append(IdentityCheck(name, lhs == rhs, 0.0 if lhs == rhs else float("inf")))
    rep = build_f_theta(theta)
    r = R0(rep.exact_n)
    for name, lhs, rhs in [("R0 f(tau1) R0 = f(tau1^-1)", r @ rep.t @ r, rep.t.inverse()),
                           ("R0 f(alpha) R0 = f(alpha)", r @ rep.a @ r, rep.a),
                           ("R0 f(beta) R0 = f(tau1^-1 tau2^-1 tau5^-1 tau6^-1 beta)", r @ rep.b @ r,
                            rep.of_element(beta_img))]:
        res = lhs.distance(rhs)
        out.append(IdentityCheck(name, lhs.equals(rhs, tol), res))
    return out


def coker_z2_sign(theta=0.7) -> float:
    """Eigenvalue of the Z2 action (y -> -y, Ad_R0) on the Hodge dual of the invariant 1-form.

    On Lambda^6 the pullback by -id is (+1); the fiber part is Ad_R0.
    """
    v = invariant_subspace(theta, "oneform").basis[0].reshape(7, 91)
    adR0 = ad_matrix(R0().realify())
    # *a has the same fiber coefficients, attached to *e^i; pull back: (-1)^6 = +1
    img = (adR0 @ v.T).T * (+1)
    return float(np.sum(img * v) / np.sum(v * v))


def oneform_z2_sign(theta=0.7) -> float:
    """Same action on the invariant 1-form itself: (-1) on Lambda^1 times Ad_R0."""
    v = invariant_subspace(theta, "oneform").basis[0].reshape(7, 91)
    adR0 = ad_matrix(R0().realify())
    img = -(adR0 @ v.T).T
    return float(np.sum(img * v) / np.sum(v * v))


# ---------------------------------------------------------------- monomial fiber basis
#
# so(14) (x) C = Lambda^2 C^14 with C^14 spanned by u_j = (e_2j - i e_2j+1)/sqrt2 and
# its conjugate.  Every f_theta(g) permutes the 91 pairs u_p ^ u_q up to phases.

PAIRS = tuple((p, q) for p in range(14) for q in range(p + 1, 14))
_PAIR_INDEX = {pq: m for m, pq in enumerate(PAIRS)}


@lru_cache(maxsize=1)
def u_basis() -> np.ndarray:
    """Unitary 14x14 matrix whose columns are u_0..u_6, conj(u_0)..conj(u_6)."""
    U = np.zeros((14, 14), dtype=complex)
    s = 1 / math.sqrt(2)
    for j in range(7):
        U[2 * j, j], U[2 * j + 1, j] = s, -1j * s
        U[2 * j, 7 + j], U[2 * j + 1, 7 + j] = s, 1j * s
    return U


@lru_cache(maxsize=1)
def pair_to_so() -> np.ndarray:
    """91x91 unitary: column m holds the so_coords of u_p u_q^T - u_q u_p^T."""
    U = u_basis()
    cols = [so_coords(np.outer(U[:, p], U[:, q]) - np.outer(U[:, q], U[:, p])) for p, q in PAIRS]
    return np.array(cols).T


def monomial_action(M: np.ndarray, tol: float = 1e-10) -> tuple[np.ndarray, np.ndarray]:
    """(perm, phase) with M u_c = phase[c] u_perm[c] for a real 14x14 M."""
    U = u_basis()
    Mc = U.conj().T @ M @ U
    perm = np.argmax(np.abs(Mc), axis=0)
    phase = Mc[perm, np.arange(14)]
    rest = Mc.copy()
    rest[perm, np.arange(14)] = 0
    if np.max(np.abs(rest)) > tol or np.max(np.abs(np.abs(phase) - 1)) > tol:
        raise ValueError("map is not monomial in the u-basis")
    return perm, phase


def pair_action(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(perm, phase) on the 91 pairs: Ad_M X_m = phase[m] X_perm[m]."""
    perm14, ph14 = monomial_action(M)
    perm = np.empty(91, dtype=int)
    phase = np.empty(91, dtype=complex)
    for m, (p, q) in enumerate(PAIRS):
        a, b = perm14[p], perm14[q]
        c = ph14[p] * ph14[q]
        if a > b:
            a, b, c = b, a, -c
        perm[m], phase[m] = _PAIR_INDEX[(a, b)], c
    return perm, phase


@dataclass(frozen=True)
class FiberCharacters:
    """Point-group action and translation characters on the 91 pair lines.

    ``mu[m]`` in [0,1)^7 with f(tau_k) X_m = exp(2 pi i mu[m,k]) X_m.  Each quotient
    element g (rotation R, translation T) acts by Ad_f(g) X_m = phase[g,m] X_perm[g,m].
    """
    theta: complex
    mu: np.ndarray            # (91, 7)
    rotations: np.ndarray     # (56, 7, 7)
    translations: np.ndarray  # (56, 7)
    perm: np.ndarray          # (56, 91)
    phase: np.ndarray         # (56, 91)


def _frac01(x: np.ndarray) -> np.ndarray:
    x = np.mod(np.round(x, 12), 1.0)
    return np.where(np.isclose(x, 1.0), 0.0, x)


def fiber_characters(theta) -> FiberCharacters:
    rep = build_f_theta(theta)
    mu = np.zeros((91, 7))
    for k in range(7):
        M = rep.of_element(_tau(k + 1)).realify()
        perm, phase = pair_action(M)
        if not np.array_equal(perm, np.arange(91)):
            raise AssertionError("translation monodromy is not diagonal")
        mu[:, k] = _frac01(np.angle(phase) / (2 * np.pi))
    quot = C.quotient_enumerate()
    perms, phases = [], []
    for g in quot:
        p, ph = pair_action(rep.of_element(g).realify())
        perms.append(p)
        phases.append(ph)
    return FiberCharacters(rep.theta_complex, mu,
                           np.array([g.rotation_array() for g in quot], dtype=float),
                           np.array([g.translation_array() for g in quot], dtype=float),
                           np.array(perms), np.array(phases))
