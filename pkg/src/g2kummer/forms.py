"""Exterior algebra on R^n with optional Lie-algebra fibers, and the model G2 forms.

A form is stored densely: ``coeffs[mask]`` is the coefficient of
e^{i1} ^ ... ^ e^{ik} where the bits of ``mask`` are i1 < ... < ik.
Trailing axes of ``coeffs`` are the fiber (e.g. 14x14 antisymmetric).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

Product = Callable[[np.ndarray, np.ndarray], np.ndarray]


def popcount(m: int) -> int:
    return bin(m).count("1")


def bits(m: int) -> list[int]:
    return [i for i in range(m.bit_length()) if m >> i & 1]


@lru_cache(maxsize=None)
def _sign_table(n: int) -> np.ndarray:
    """sign[m1, m2] = sign of e^{m1} ^ e^{m2} = sign * e^{m1|m2}; 0 if overlapping."""
    size = 1 << n
    S = np.zeros((size, size), dtype=np.int8)
    for m1 in range(size):
        for m2 in range(size):
            if m1 & m2:
                continue
            inv = 0
            for i in bits(m1):
                inv += popcount(m2 & ((1 << i) - 1))
            S[m1, m2] = -1 if inv % 2 else 1
    return S


@lru_cache(maxsize=None)
def _masks_of_grade(n: int, k: int) -> tuple[int, ...]:
    return tuple(sum(1 << i for i in c) for c in itertools.combinations(range(n), k))


@dataclass(frozen=True)
class MultiVector:
    """Element of Lambda^*(R^n)^* (tensor a fiber), dense over all 2^n masks."""

    coeffs: np.ndarray
    n: int = 7

    @property
    def fiber_shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[1:]

    @classmethod
    def zero(cls, n: int = 7, fiber: tuple[int, ...] = (), dtype=float) -> "MultiVector":
        return cls(np.zeros((1 << n,) + fiber, dtype=dtype), n)

    @classmethod
    def from_dict(cls, terms: dict, n: int = 7, dtype=float) -> "MultiVector":
        """terms: {(i, j, k): coefficient} with 0-based indices in any order."""
        out = np.zeros(1 << n, dtype=dtype)
        S = _sign_table(n)
        for idx, c in terms.items():
            mv = cls.scalar(1.0, n)
            for i in idx:
                mv = mv ^ cls.basis(i, n)
            out = out + c * mv.coeffs
        return cls(out, n)

    @classmethod
    def scalar(cls, c, n: int = 7) -> "MultiVector":
        out = np.zeros((1 << n,) + np.shape(c), dtype=np.result_type(c, float))
        out[0] = c
        return cls(out, n)

    @classmethod
    def basis(cls, i: int, n: int = 7) -> "MultiVector":
        out = np.zeros(1 << n)
        out[1 << i] = 1.0
        return cls(out, n)

    @classmethod
    def one_form(cls, comps, n: int = 7) -> "MultiVector":
        """comps[i] is the (possibly fiber-valued) coefficient of e^i."""
        comps = np.asarray(comps)
        out = np.zeros((1 << n,) + comps.shape[1:], dtype=comps.dtype if np.iscomplexobj(comps) else float)
        for i in range(n):
            out[1 << i] = comps[i]
        return cls(out, n)

    @classmethod
    def volume(cls, n: int = 7) -> "MultiVector":
        out = np.zeros(1 << n)
        out[(1 << n) - 1] = 1.0
        return cls(out, n)

    def __add__(self, other: "MultiVector") -> "MultiVector":
        return MultiVector(self.coeffs + other.coeffs, self.n)

    def __sub__(self, other: "MultiVector") -> "MultiVector":
        return MultiVector(self.coeffs - other.coeffs, self.n)

    def __neg__(self) -> "MultiVector":
        return MultiVector(-self.coeffs, self.n)

    def __mul__(self, c) -> "MultiVector":
        return MultiVector(self.coeffs * c, self.n)

    __rmul__ = __mul__

    def __xor__(self, other: "MultiVector") -> "MultiVector":
        return wedge(self, other)

    def grade(self, k: int) -> "MultiVector":
        out = np.zeros_like(self.coeffs)
        for m in _masks_of_grade(self.n, k):
            out[m] = self.coeffs[m]
        return MultiVector(out, self.n)

    def grades(self, tol: float = 0.0) -> set[int]:
        flat = np.abs(self.coeffs.reshape(self.coeffs.shape[0], -1)).max(axis=1)
        return {popcount(m) for m in np.nonzero(flat > tol)[0]}

    def terms(self, tol: float = 1e-12) -> dict[str, complex]:
        """Readable {"e127": coefficient} map (1-based indices), scalar fibers only."""
        return {"e" + "".join(str(i + 1) for i in bits(int(m))): self.coeffs[m]
                for m in np.nonzero(np.abs(self.coeffs) > tol)[0]}

    def conj(self) -> "MultiVector":
        return MultiVector(np.conj(self.coeffs), self.n)

    @property
    def real(self) -> "MultiVector":
        return MultiVector(self.coeffs.real.copy(), self.n)

    @property
    def imag(self) -> "MultiVector":
        return MultiVector(self.coeffs.imag.copy(), self.n)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs))) if self.coeffs.size else 0.0


def _nonzero_masks(c: np.ndarray) -> np.ndarray:
    flat = np.abs(c.reshape(c.shape[0], -1)).max(axis=1) if c.ndim > 1 else np.abs(c)
    return np.nonzero(flat > 0)[0]


def _default_product(x, y):
    return np.multiply.outer(x, y) if (np.ndim(x) and np.ndim(y)) else x * y


def wedge(a: MultiVector, b: MultiVector, product: Optional[Product] = None) -> MultiVector:
    """a ^ b with coefficients combined by ``product`` (ordinary product by default)."""
    if a.n != b.n:
        raise ValueError("dimension mismatch")
    n = a.n
    S = _sign_table(n)
    prod = product or _default_product
    out = None
    for m1 in _nonzero_masks(a.coeffs):
        for m2 in _nonzero_masks(b.coeffs):
            s = S[m1, m2]
            if s == 0:
                continue
            val = prod(a.coeffs[m1], b.coeffs[m2])
            if out is None:
                out = np.zeros((1 << n,) + np.shape(val), dtype=np.result_type(val, float))
            out[m1 | m2] += s * val
    if out is None:
        shape = np.shape(prod(a.coeffs[0], b.coeffs[0]))
        out = np.zeros((1 << n,) + shape, dtype=np.result_type(a.coeffs, b.coeffs))
    return MultiVector(out, n)


def bracket(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def bracket_wedge(a: MultiVector, b: MultiVector) -> MultiVector:
    """[a ^ b]: wedge with the matrix commutator on fibers."""
    return wedge(a, b, bracket)


@lru_cache(maxsize=None)
def _star_table(n: int):
    S = _sign_table(n)
    full = (1 << n) - 1
    perm = np.array([full ^ m for m in range(1 << n)])
    sign = np.array([S[m, full ^ m] for m in range(1 << n)], dtype=float)
    return perm, sign


def hodge_star(a: MultiVector, orientation: int = 1) -> MultiVector:
    """Euclidean Hodge star, *e^I = sign(I, I^c) e^{I^c} for vol = +e^{1..n}."""
    perm, sign = _star_table(a.n)
    out = np.zeros_like(a.coeffs)
    shape = (-1,) + (1,) * (a.coeffs.ndim - 1)
    out[perm] = a.coeffs * sign.reshape(shape) * orientation
    return MultiVector(out, a.n)


def interior(vec, a: MultiVector, product: Optional[Product] = None) -> MultiVector:
    """Contraction i_v a for v = sum_j vec[j] e_j (vec entries may be fiber-valued)."""
    n = a.n
    prod = product or _default_product
    out = None
    for m in _nonzero_masks(a.coeffs):
        for j in bits(int(m)):
            sgn = -1 if popcount(int(m) & ((1 << j) - 1)) % 2 else 1
            val = prod(vec[j], a.coeffs[m])
            if out is None:
                out = np.zeros((1 << n,) + np.shape(val), dtype=np.result_type(val, float))
            out[int(m) ^ (1 << j)] += sgn * val
    if out is None:
        out = np.zeros_like(a.coeffs)
    return MultiVector(out, n)


def pullback(a: MultiVector, g: np.ndarray) -> MultiVector:
    """(g^* a)(v1, ...) = a(g v1, ...); g^* e^J = sum_I det(g[J, I]) e^I."""
    g = np.asarray(g)
    n = a.n
    out = np.zeros(a.coeffs.shape, dtype=np.result_type(a.coeffs, g))
    out[0] = a.coeffs[0]
    for k in range(1, n + 1):
        masks = _masks_of_grade(n, k)
        idx = [bits(m) for m in masks]
        src = [m for m in masks if np.any(a.coeffs[m] != 0)]
        if not src:
            continue
        for J in src:
            bj = bits(J)
            for I, bi in zip(masks, idx):
                d = np.linalg.det(g[np.ix_(bj, bi)]) if k > 1 else g[bj[0], bi[0]]
                if d != 0:
                    out[I] = out[I] + d * a.coeffs[J]
    return MultiVector(out, n)


def inner(a: MultiVector, b: MultiVector) -> complex:
    """Pointwise inner product for scalar forms (Hermitian in the second slot)."""
    return complex(np.sum(a.coeffs * np.conj(b.coeffs)))


# ---------------------------------------------------------------- model G2 forms

def _model_one_forms():
    ds = MultiVector.basis(0)
    dx = [MultiVector.basis(1 + 2 * k) for k in range(3)]
    dy = [MultiVector.basis(2 + 2 * k) for k in range(3)]
    return ds, dx, dy


def model_omega() -> MultiVector:
    _, dx, dy = _model_one_forms()
    return (dx[0] ^ dy[0]) + (dx[1] ^ dy[1]) + (dx[2] ^ dy[2])


def model_Omega() -> MultiVector:
    """dz1 ^ dz2 ^ dz3 on R x C^3 with coordinates (s, x1, y1, x2, y2, x3, y3)."""
    _, dx, dy = _model_one_forms()
    dz = [MultiVector(dx[k].coeffs + 1j * dy[k].coeffs, 7) for k in range(3)]
    return dz[0] ^ dz[1] ^ dz[2]


def model_phi_parts() -> tuple[MultiVector, MultiVector, MultiVector]:
    """(ds ^ omega, Re Omega, Im Omega) in model coordinates."""
    ds, _, _ = _model_one_forms()
    Om = model_Omega()
    return ds ^ model_omega(), Om.real, Om.imag


def model_phi() -> MultiVector:
    S, _, ImO = model_phi_parts()
    return S + ImO


def model_psi() -> MultiVector:
    ds, _, _ = _model_one_forms()
    om = model_omega()
    return 0.5 * (om ^ om) + (ds ^ model_Omega().real)


@lru_cache(maxsize=1)
def _standard_forms():
    from .crystal import adapted_basis
    B = adapted_basis()
    # model coordinates u = B^T y, so forms in y are pulled back along B^T
    return pullback(model_phi(), B.T), pullback(model_psi(), B.T)


def phi0(frame: str = "standard") -> MultiVector:
    """The flat G2 3-form; ``frame`` is "standard" (e1..e7) or "model" (s, z)."""
    if frame == "model":
        return model_phi()
    return _standard_forms()[0]


def psi0(frame: str = "standard") -> MultiVector:
    if frame == "model":
        return model_psi()
    return _standard_forms()[1]


def invariant_three_forms(rotations) -> np.ndarray:
    """Basis (rows, over grade-3 masks) of 3-forms fixed by every given rotation."""
    masks = _masks_of_grade(7, 3)
    blocks = []
    for R in rotations:
        M = np.zeros((len(masks), len(masks)))
        for c, m in enumerate(masks):
            e = np.zeros(128)
            e[m] = 1
            M[:, c] = pullback(MultiVector(e), R).coeffs[list(masks)]
        blocks.append(M - np.eye(len(masks)))
    _, s, vt = np.linalg.svd(np.vstack(blocks))
    return vt[s.size - int(np.sum(s < 1e-9)):] if np.sum(s < 1e-9) else np.zeros((0, len(masks)))


def g2_metric(phi: MultiVector) -> np.ndarray:
    """B(u,v) vol = (1/6) i_u phi ^ i_v phi ^ phi; positive definite iff phi is a positive G2 form."""
    n = phi.n
    E = np.eye(n)
    out = np.zeros((n, n))
    for i in range(n):
        ai = interior(E[i], phi)
        for j in range(n):
            out[i, j] = (ai ^ interior(E[j], phi) ^ phi).coeffs[-1] / 6.0
    return out


def _check_orthogonal(g: np.ndarray) -> np.ndarray:
    g = np.asarray(g, dtype=float)
    if g.shape != (7, 7) or not np.allclose(g.T @ g, np.eye(7), atol=1e-12):
        raise ValueError("expected an orthogonal 7x7 matrix")
    return g


def preserves_phi(g, tol: float = 1e-10) -> bool:
    g = _check_orthogonal(g)
    return (pullback(phi0(), g) - phi0()).max_abs() <= tol


def preserves_psi(g, tol: float = 1e-10) -> bool:
    g = _check_orthogonal(g)
    return (pullback(psi0(), g) - psi0()).max_abs() <= tol


# ---------------------------------------------------------------- instanton algebra

@dataclass(frozen=True)
class PointSample:
    """Pointwise (a, xi): a fiber-valued 1-form and a fiber-valued 7-form."""

    a: MultiVector
    xi: MultiVector

    def __post_init__(self):
        for f in (self.a, self.xi):
            c = f.coeffs
            if c.ndim == 3 and np.max(np.abs(c + np.swapaxes(c, 1, 2))) > 1e-14:
                raise ValueError("fibers must be antisymmetric")

    def scaled(self, lam: float) -> "PointSample":
        return PointSample(self.a * lam, self.xi * lam)


def insertion(a: MultiVector, xi: MultiVector) -> MultiVector:
    """[i_{a#}, xi]: contract the fiber-valued vector dual to a into xi, bracketing fibers."""
    vec = [a.coeffs[1 << j] for j in range(a.n)]
    return interior(vec, xi, bracket)


def insertion_identity_check(a: MultiVector, xi: MultiVector) -> float:
    """max |[i_{a#}, xi] - *[a ^ *xi]|."""
    lhs = insertion(a, xi)
    rhs = hodge_star(bracket_wedge(a, hodge_star(xi)))
    return (lhs - rhs).max_abs()


def quadratic_term(p: PointSample, psi: MultiVector, connection_tag: str = "") -> tuple[MultiVector, MultiVector]:
    """Q(a, xi) = (1/2 [a ^ a] ^ psi + [i_{a#}, xi], 0); the connection tag is ignored."""
    aa = bracket_wedge(p.a, p.a)
    six = wedge(aa, psi, lambda x, y: x * y) * 0.5 + insertion(p.a, p.xi)
    zero = MultiVector.zero(p.a.n, p.a.fiber_shape)
    return six.grade(6), zero


def random_so(rng: np.random.Generator, n: int = 14) -> np.ndarray:
    X = rng.standard_normal((n, n))
    return X - X.T


def random_point_sample(rng: np.random.Generator, fiber: int = 14) -> PointSample:
    a = MultiVector.one_form(np.stack([random_so(rng, fiber) for _ in range(7)]))
    xi_c = np.zeros((128, fiber, fiber))
    xi_c[127] = random_so(rng, fiber)
    return PointSample(a, MultiVector(xi_c))
