"""Fourier oracle for the twisted operators of the flat connection A_{0,theta}.

Sections over Y_0 are Gamma-equivariant functions on R^7.  In the monomial
fiber basis X_m (see ``monodromy.FiberCharacters``) they expand in modes
exp(2 pi i w.y) X_m with w in Z^7 + mu_m, and the quotient group permutes the
pairs (w, m) up to phases.  Invariant vectors are therefore fixed by their
value at one orbit representative, subject to the stabiliser; the operators
act orbit by orbit through their symbols.

Degrees: "L" maps Omega^1 + Omega^7 to Omega^6 + Omega^0 (6-forms stored by
their Hodge duals), "Lstar" is its adjoint, "sections" is d on Omega^0.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.sparse as sp

from . import forms as Fm
from . import monodromy as M

KERNEL_TOL = 1e-9
DEGREES = ("L", "Lstar", "sections")
_DEGREE_ALIASES = {"(1,7)": "L", "17": "L", "ker": "L", "(6,0)": "Lstar", "60": "Lstar",
                   "coker": "Lstar", "(0)": "sections", "0": "sections"}


def _degree(name: str) -> str:
    name = _DEGREE_ALIASES.get(str(name).replace(" ", ""), name)
    if name not in DEGREES:
        raise ValueError(f"unknown degree {name!r}")
    return name


@lru_cache(maxsize=1)
def _psi_cross_table() -> np.ndarray:
    """T[k, l] = *(psi0 ^ e^k ^ e^l) as a 1-form (7-vector)."""
    psi = Fm.psi0()
    T = np.zeros((7, 7, 7))
    for k in range(7):
        for l in range(7):
            if k == l:
                continue
            six = Fm.wedge(psi, Fm.wedge(Fm.MultiVector.basis(k), Fm.MultiVector.basis(l)))
            one = Fm.hodge_star(six)
            T[k, l] = np.array([one.coeffs[1 << j] for j in range(7)]).real
    return T


def symbol(degree: str, omega: np.ndarray) -> np.ndarray:
    """Symbols at angular frequencies omega (n, 7) -> (n, rows, cols).

    d -> i omega ^ ,  d^* -> -i interior(omega).
    """
    degree = _degree(degree)
    om = np.atleast_2d(omega)
    n = om.shape[0]
    if degree == "sections":
        return (1j * om)[:, :, None]
    T = _psi_cross_table()
    L = np.zeros((n, 8, 8), dtype=complex)
    # *(psi ^ i omega ^ a)  and  -d^*(xi vol) = + i xi *omega
    L[:, :7, :7] = 1j * np.einsum("nk,klj->njl", om, T)
    L[:, :7, 7] = 1j * om
    L[:, 7, :7] = -1j * om
    if degree == "Lstar":
        L = np.conj(np.swapaxes(L, 1, 2))
    return L


def form_action(degree: str, R: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(domain, codomain) matrices of the pullback by a rotation R on form components."""
    degree = _degree(degree)
    det = float(np.linalg.det(R))
    one_seven = np.zeros((8, 8))
    one_seven[:7, :7], one_seven[7, 7] = R, det
    six_zero = np.zeros((8, 8))
    six_zero[:7, :7], six_zero[7, 7] = det * R, 1.0
    if degree == "L":
        return one_seven, six_zero
    if degree == "Lstar":
        return six_zero, one_seven
    return np.eye(1), R.copy()


# ---------------------------------------------------------------- mode basis

@dataclass(frozen=True)
class TwistedModeBasis:
    """Truncated (frequency, fiber) states and their orbits under the 56-element quotient.

    States are the pairs (k, m) with |k + mu_m|_inf <= N (and |k + mu_m|_2 <= radius).
    """
    theta: complex
    N: int
    radius: float
    chars: M.FiberCharacters
    m: np.ndarray            # (S,)
    k: np.ndarray            # (S, 7) ints
    w: np.ndarray            # (S, 7) = k + mu_m
    image: np.ndarray        # (G, S) index of g . state
    rho: np.ndarray          # (G, S) coefficient phase of that map
    orbit_rep: np.ndarray    # (S,) representative state
    closure_ok: bool

    @property
    def size(self) -> int:
        return self.m.size

    def representatives(self) -> np.ndarray:
        return np.nonzero(self.orbit_rep == np.arange(self.size))[0]

    def stabilizer(self, s: int) -> np.ndarray:
        return np.nonzero(self.image[:, s] == s)[0]


def _enumerate_states(mu: np.ndarray, N: int, radius: float):
    ms, ks = [], []
    for m in range(mu.shape[0]):
        r = min(float(N), radius)
        ranges = [np.arange(math.ceil(-r - x - 1e-12), math.floor(r - x + 1e-12) + 1) for x in mu[m]]
        grid = np.stack(np.meshgrid(*ranges, indexing="ij"), -1).reshape(-1, 7)
        w = grid + mu[m]
        if math.isfinite(radius):
            grid = grid[np.linalg.norm(w, axis=1) <= radius + 1e-12]
        ms.append(np.full(grid.shape[0], m))
        ks.append(grid)
    return np.concatenate(ms), np.concatenate(ks).astype(np.int64)


def mode_basis(theta, N: int = 2, radius: float = math.inf) -> TwistedModeBasis:
    fc = M.fiber_characters(theta)
    m, k = _enumerate_states(fc.mu, N, radius)
    w = k + fc.mu[m]
    base = 2 * N + 3
    off = N + 1

    def encode(mm, kk):
        return mm * base ** 7 + ((kk + off) * base ** np.arange(7)).sum(axis=1)

    keys = encode(m, k)
    order = np.argsort(keys)
    sorted_keys = keys[order]
    G = fc.rotations.shape[0]
    image = np.empty((G, m.size), dtype=np.int64)
    rho = np.empty((G, m.size), dtype=complex)
    closure = True
    for g in range(G):
        R, T = fc.rotations[g], fc.translations[g]
        m2 = fc.perm[g][m]
        w2 = w @ R.T
        k2f = w2 - fc.mu[m2]
        k2 = np.rint(k2f).astype(np.int64)
        if np.max(np.abs(k2f - k2)) > 1e-9:
            raise AssertionError("character bookkeeping inconsistent")
        key2 = encode(m2, k2)
        pos = np.searchsorted(sorted_keys, key2)
        pos = np.minimum(pos, sorted_keys.size - 1)
        found = sorted_keys[pos] == key2
        closure &= bool(np.all(found))
        image[g] = np.where(found, order[pos], -1)
        rho[g] = fc.phase[g][m] * np.exp(-2j * np.pi * (w2 @ T))
    rep = np.arange(m.size)
    for g in range(G):
        img = image[g]
        rep = np.minimum(rep, np.where(img >= 0, img, rep))
    return TwistedModeBasis(fc.theta, N, radius, fc, m, k, w, image, rho, rep, closure)


# ---------------------------------------------------------------- assembly

@dataclass(frozen=True)
class OrbitBlock:
    state: int
    w: np.ndarray
    orbit_size: int
    dom_basis: np.ndarray     # orthonormal columns spanning the stabiliser-fixed domain
    cod_basis: np.ndarray
    matrix: np.ndarray        # cod_basis^H sigma dom_basis


def _fixed_basis(mats: list[np.ndarray], dim: int) -> np.ndarray:
    if not mats:
        return np.eye(dim, dtype=complex)
    P = sum(mats) / len(mats)
    U, s, _ = np.linalg.svd(P)
    return U[:, s > 0.5]


@dataclass(frozen=True)
class AssembledOperator:
    degree: str
    blocks: tuple[OrbitBlock, ...]
    matrix: sp.csr_matrix

    def singular_values(self) -> np.ndarray:
        vals = [np.linalg.svd(b.matrix, compute_uv=False) for b in self.blocks if b.matrix.size]
        return np.concatenate(vals) if vals else np.zeros(0)


def assemble(theta, degree: str = "L", N: int = 1, radius: float = math.inf,
             basis: Optional[TwistedModeBasis] = None) -> AssembledOperator:
    """Block-diagonal matrix of the operator on Gamma-invariant modes."""
    degree = _degree(degree)
    basis = mode_basis(theta, N, radius) if basis is None else basis
    fc = basis.chars
    reps = basis.representatives()
    sig = symbol(degree, 2 * np.pi * basis.w[reps])
    actions = [form_action(degree, fc.rotations[g]) for g in range(fc.rotations.shape[0])]
    blocks = []
    for i, s in enumerate(reps):
        stab = basis.stabilizer(s)
        dom = _fixed_basis([basis.rho[g, s] * actions[g][0] for g in stab], sig.shape[2])
        cod = _fixed_basis([basis.rho[g, s] * actions[g][1] for g in stab], sig.shape[1])
        size = int(np.sum(basis.orbit_rep == s))
        blocks.append(OrbitBlock(int(s), basis.w[s], size, dom, cod, cod.conj().T @ sig[i] @ dom))
    mat = sp.block_diag([b.matrix for b in blocks], format="csr") if blocks else sp.csr_matrix((0, 0))
    return AssembledOperator(degree, tuple(blocks), mat)


def _kernel_dim(op: AssembledOperator, tol: float = KERNEL_TOL) -> tuple[int, list[np.ndarray]]:
    dim = 0
    freqs = []
    for b in op.blocks:
        ncols = b.matrix.shape[1]
        if ncols == 0:
            continue
        s = np.linalg.svd(b.matrix, compute_uv=False) if b.matrix.shape[0] else np.zeros(0)
        r = int(np.sum(s > tol))
        if ncols - r:
            dim += ncols - r
            freqs.append(b.w)
    return dim, freqs


@dataclass(frozen=True)
class KernelReport:
    ker_L: int
    ker_Lstar: int
    ker_sections: int
    kernel_frequencies: tuple[tuple[float, ...], ...]
    closure_ok: bool


def kernel_dims(theta, N: int = 1) -> KernelReport:
    basis = mode_basis(theta, N)
    out = {}
    freqs = []
    for deg in DEGREES:
        d, fr = _kernel_dim(assemble(theta, deg, N, basis=basis))
        out[deg] = d
        freqs += fr
    return KernelReport(out["L"], out["Lstar"], out["sections"],
                        tuple(tuple(float(x) for x in f) for f in freqs), basis.closure_ok)


def spectral_gap(theta, N: int = 2, degree: str = "L", tol: float = KERNEL_TOL) -> float:
    """Smallest nonzero singular value on invariant modes with |w|_inf <= N.

    The symbol has singular values |2 pi w| times constants, so only modes
    with |w|_2 <= gap / smin_unit can compete; larger ones are skipped.
    """
    degree = _degree(degree)
    unit = np.linalg.svd(symbol(degree, np.eye(7)[:1])[0], compute_uv=False)
    smin_unit = float(np.min(unit[unit > tol]))
    radius = 1.0
    while True:
        op = assemble(theta, degree, N, radius=min(radius, math.sqrt(7) * N))
        sv = op.singular_values()
        sv = sv[sv > tol]
        gap = float(np.min(sv)) if sv.size else math.inf
        bound = gap / (2 * np.pi * smin_unit)
        if bound <= radius or radius >= math.sqrt(7) * N:
            return gap
        radius = min(bound, math.sqrt(7) * N)


def kernel_vector_z2_sign(theta, N: int = 1, degree: str = "Lstar") -> float:
    """Eigenvalue of (y -> -y, Ad_R0) on the 1-dimensional kernel (cokernel for Lstar)."""
    degree = _degree(degree)
    basis = mode_basis(theta, N)
    op = assemble(theta, degree, N, basis=basis)
    vecs = {}
    for b in op.blocks:
        if b.matrix.shape[1] == 0:
            continue
        _, s, vh = np.linalg.svd(b.matrix)
        s = np.concatenate([s, np.zeros(b.matrix.shape[1] - s.size)])
        for j in np.nonzero(s < KERNEL_TOL)[0]:
            v0 = b.dom_basis @ vh[j].conj()
            vecs.update(_expand_orbit(basis, degree, b.state, v0))
    if not vecs:
        raise ValueError("no kernel")
    # Z2 acts on (w, m) by (-w, perm_R0(m)) with the phase of Ad_R0 and D(-id)
    permR0, phR0 = M.pair_action(M.R0().realify())
    dom, _ = form_action(degree, -np.eye(7))
    lookup = {(int(basis.m[s]), tuple(np.round(basis.w[s], 9))): s for s in vecs}
    num = 0j
    den = 0.0
    for s, v in vecs.items():
        target = (int(permR0[basis.m[s]]), tuple(np.round(-basis.w[s], 9)))
        img = phR0[basis.m[s]] * (dom @ v)
        t = lookup.get(target)
        if t is not None:
            num += np.vdot(vecs[t], img)
        den += float(np.vdot(v, v).real)
    return float((num / den).real)


def _expand_orbit(basis: TwistedModeBasis, degree: str, s: int, v0: np.ndarray) -> dict[int, np.ndarray]:
    fc = basis.chars
    out = {}
    for g in range(fc.rotations.shape[0]):
        t = int(basis.image[g, s])
        if t >= 0 and t not in out:
            out[t] = basis.rho[g, s] * (form_action(degree, fc.rotations[g])[0] @ v0)
    return out
