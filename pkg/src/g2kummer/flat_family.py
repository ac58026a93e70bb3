"""The explicit family of flat connections a_f on the fixed bundle E_0.

A 1-form with values in diagonal imaginary matrices is stored as a real 7x7
array ``c`` with  a = sum_k dy^k (x) diag(i c[k, 0], ..., i c[k, 6]).  The
bulk value is f * identity; near the singular lines the cutoff chi bends
the gauge so that the form becomes (f/sqrt7) diag(+-i) ds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components
from scipy.sparse.linalg import eigsh

from . import crystal as C
from . import monodromy as M

LINE_DIRECTION = np.array([1, 1, 1, -1, 1, 1, 1], dtype=float)
DEFAULT_KAPPA = 0.15


# ---------------------------------------------------------------- cutoff profile

def smoothstep(s):
    """C^3 step 35s^4 - 84s^5 + 70s^6 - 20s^7, clamped to [0, 1]."""
    s = np.clip(s, 0.0, 1.0)
    return s ** 4 * (35 - 84 * s + 70 * s ** 2 - 20 * s ** 3)


def smoothstep_prime(s):
    inside = (s > 0) & (s < 1)
    s = np.clip(s, 0.0, 1.0)
    return np.where(inside, 140 * s ** 3 * (1 - s) ** 3, 0.0)


@dataclass(frozen=True)
class CutoffProfile:
    kappa: float = DEFAULT_KAPPA
    phi: np.ndarray = field(default=None, repr=False)   # 7x6: phi_i(z) = (phi @ z_real)_i

    def __post_init__(self):
        if self.phi is None:
            object.__setattr__(self, "phi", adapted_projections())

    def chi(self, r):
        return smoothstep((np.asarray(r) - 1.25 * self.kappa) / (0.5 * self.kappa))

    def chi_prime(self, r):
        return smoothstep_prime((np.asarray(r) - 1.25 * self.kappa) / (0.5 * self.kappa)) / (0.5 * self.kappa)


def adapted_projections() -> np.ndarray:
    """phi_i(x1 + i y1, ...) = pr_i(x1 b2 + y1 b3 + ... + y3 b7), as a 7x6 matrix."""
    return C.adapted_basis()[:, 1:].copy()


@dataclass(frozen=True)
class ProjectionChecks:
    max_ratio: float            # max |phi_i(z)| / |z|
    alpha_residual: float
    parseval_residual: float


def projection_checks(samples: int = 1000, seed: int = 0) -> ProjectionChecks:
    rng = np.random.default_rng(seed)
    P = adapted_projections()
    Z = rng.standard_normal((samples, 6))
    vals = Z @ P.T
    ratio = float(np.max(np.abs(vals) / np.linalg.norm(Z, axis=1)[:, None]))
    # alpha on the chart coordinates, then the stated signed permutation of phi
    Ma = C.rotation_in_adapted_frame(C.GENS["a"])[1:, 1:]
    lhs = (Z @ Ma.T) @ P.T
    perm = [(2, 1), (3, 1), (7, 1), (6, -1), (4, -1), (1, 1), (5, 1)]
    rhs = np.stack([s * vals[:, j - 1] for j, s in perm], axis=1)
    parseval = np.max(np.abs(np.sum(vals ** 2, axis=1) - np.sum(Z ** 2, axis=1)))
    return ProjectionChecks(ratio, float(np.max(np.abs(lhs - rhs))), float(parseval))


# ---------------------------------------------------------------- gauge family

def gauge_family(f: float, y) -> M.SemilinearMap:
    """F'_f(y) = diag(exp(i y_j f))."""
    y = np.asarray(y, dtype=float)
    return M.SemilinearMap(np.diag(np.exp(1j * f * y)), np.zeros((7, 7), dtype=complex))


def gauge_pullback(f: float, y, h: float = 1e-6) -> np.ndarray:
    """F^-1 dF at y by central differences, as the 7x7 real array c (dF = F * i c)."""
    y = np.asarray(y, dtype=float)
    F = np.diag(gauge_family(f, y).A)
    c = np.zeros((7, 7))
    for k in range(7):
        e = np.zeros(7)
        e[k] = h
        dF = (np.diag(gauge_family(f, y + e).A) - np.diag(gauge_family(f, y - e).A)) / (2 * h)
        c[k] = (dF / F / 1j).real
    return c


def gauge_equivariance_residuals(f: float, theta=None, samples: int = 100,
                                 seed: int = 0) -> dict[str, float]:
    """max |F'(g y) f_1(g) - f_theta(g) F'(y)| over random y, per generator.

    ``theta`` defaults to exp(i f / 2): the unit translation multiplies
    F' by exp(i f) while f_theta(t) multiplies z_1 by theta^2.
    """
    th = np.exp(0.5j * f) if theta is None else theta
    rep1, rep = M.build_f_theta(0.0), M.build_f_theta(complex(th))
    rng = np.random.default_rng(seed)
    out = {}
    for name, g in C.GENS.items():
        R, T = g.rotation_array().astype(float), g.translation_array().astype(float)
        res = 0.0
        for _ in range(samples):
            y = rng.uniform(-2, 2, 7)
            lhs = gauge_family(f, R @ y + T) @ rep1.images[name]
            rhs = rep.images[name] @ gauge_family(f, y)
            res = max(res, lhs.distance(rhs))
        out[name] = res
    return out


# ---------------------------------------------------------------- singular lines

@dataclass(frozen=True)
class SingularLine:
    element: C.IsometryElement     # maps the reference line (origin, LINE_DIRECTION) onto this one
    base: np.ndarray
    direction: np.ndarray          # entries +-1


def _line_distance(points: np.ndarray, base: np.ndarray, d: np.ndarray):
    """Torus distance from points to the closed line base + s d (d in {+-1}^7).

    Returns (dist, s, n) with  points ~ base + s d + n + transverse, n integer.
    """
    x = np.atleast_2d(points) - base
    N = x.shape[0]
    br = np.mod(d * (x - 0.5), 1.0)
    br = np.sort(br, axis=1)
    edges = np.concatenate([np.zeros((N, 1)), br, np.ones((N, 1))], axis=1)
    best = np.full(N, np.inf)
    best_s = np.zeros(N)
    best_n = np.zeros((N, 7))
    for j in range(8):
        lo, hi = edges[:, j], edges[:, j + 1]
        mid = 0.5 * (lo + hi)
        n = np.round(x - mid[:, None] * d)
        s = np.clip(np.sum((x - n) * d, axis=1) / 7.0, lo, hi)
        # (n, s) is a genuine line point, so this is an upper bound attained on the right interval
        dist2 = np.sum((x - n - s[:, None] * d) ** 2, axis=1)
        upd = dist2 < best
        best[upd], best_s[upd], best_n[upd] = dist2[upd], s[upd], n[upd]
    return np.sqrt(best), best_s, best_n


@lru_cache(maxsize=1)
def singular_lines() -> tuple[SingularLine, ...]:
    """Distinct images on T^7 of the singular line through the origin."""
    out: list[SingularLine] = []
    for g in C.quotient_enumerate():
        base = np.mod(g.translation_array().astype(float), 1.0)
        d = g.rotation_array().astype(float) @ LINE_DIRECTION
        dup = False
        for L in out:
            if np.array_equal(np.abs(L.direction), np.abs(d)) and (
                    np.array_equal(L.direction, d) or np.array_equal(L.direction, -d)):
                if _line_distance(base[None], L.base, L.direction)[0][0] < 1e-12:
                    dup = True
                    break
        if not dup:
            out.append(SingularLine(g, base, d))
    return tuple(out)


def distance_to_singular_set(points: np.ndarray):
    """(dist, line index, s, lattice shift) to the nearest singular line."""
    points = np.atleast_2d(points)
    lines = singular_lines()
    best = np.full(points.shape[0], np.inf)
    idx = np.zeros(points.shape[0], dtype=int)
    bs = np.zeros(points.shape[0])
    bn = np.zeros(points.shape)
    for i, L in enumerate(lines):
        d, s, n = _line_distance(points, L.base, L.direction)
        upd = d < best
        best[upd], idx[upd], bs[upd], bn[upd] = d[upd], i, s[upd], n[upd]
    return best, idx, bs, bn


@lru_cache(maxsize=1)
def min_line_separation() -> float:
    """Smallest distance between two distinct singular lines (or lattice copies of one)."""
    d = LINE_DIRECTION
    best = math.inf
    for n in np.ndindex(*(3,) * 7):
        v = np.array(n, dtype=float) - 1
        w = v - (v @ d) / 7 * d
        if np.linalg.norm(w) > 1e-12:
            best = min(best, float(np.linalg.norm(w)))
    lines = singular_lines()
    ts = np.linspace(0, 1, 4001)[:-1]
    for i, L1 in enumerate(lines):
        pts = L1.base + ts[:, None] * L1.direction
        for L2 in lines[i + 1:]:
            best = min(best, float(np.min(_line_distance(pts, L2.base, L2.direction)[0])))
    return best


def check_kappa(kappa: float) -> None:
    sep = min_line_separation()
    if not 0 < 4 * kappa < sep:
        raise ValueError(f"kappa={kappa}: tubes of radius 2*kappa overlap (line separation {sep:.4f})")


# ---------------------------------------------------------------- connection form

@lru_cache(maxsize=1)
def _transport_data():
    """For each singular line: rotation R_g, translation T_g, diagonal sign action S_g of f_1(g)."""
    rep1 = M.build_f_theta(0.0)
    out = []
    for L in singular_lines():
        f1 = rep1.of_element(L.element).numeric()
        S = (np.abs(f1.A) ** 2 - np.abs(f1.B) ** 2).real
        out.append((L.element.rotation_array().astype(float),
                    L.element.translation_array().astype(float), S))
    return out


def diag_sign_action(g: C.IsometryElement) -> np.ndarray:
    """Matrix S with Ad_{f_1(g)} diag(i c) = diag(i S c)."""
    f1 = M.build_f_theta(0.0).of_element(g).numeric()
    return (np.abs(f1.A) ** 2 - np.abs(f1.B) ** 2).real


def _local_tube_form(u: np.ndarray, f: float, prof: CutoffProfile, chi_override=None):
    """Form and potential at points u near the reference line (y-coordinates)."""
    B = C.adapted_basis()
    Bp = B[:, 1:]
    z = u @ Bp                                   # (N, 6) chart coordinates
    r = np.linalg.norm(z, axis=1)
    phi = z @ prof.phi.T                         # (N, 7)
    chi = prof.chi(r) if chi_override is None else chi_override(r)
    dchi = prof.chi_prime(r)
    rs = np.where(r > 0, r, 1.0)
    # grad_z (chi phi_j) = chi' z/r phi_j + chi P_j
    grad = dchi[:, None, None] * (z / rs[:, None])[:, :, None] * phi[:, None, :] \
        + chi[:, None, None] * prof.phi.T[None, :, :]           # (N, 6, 7)
    c = np.einsum("k,j->kj", B[:, 0], B[:, 0])[None] + np.einsum("km,nmj->nkj", Bp, grad)
    potential = (-1 + chi)[:, None] * phi
    return f * c, potential


@dataclass(frozen=True)
class ConnectionChartSample:
    f: float
    points: np.ndarray
    charts: np.ndarray         # "bulk" / "tube" per point
    values: np.ndarray         # (N, 7, 7), see module docstring
    potential: np.ndarray      # (N, 7): h_j with d h = (a - f*harmonic)/f


def connection_form(f: float, points, kappa: float = DEFAULT_KAPPA,
                    overlap_tol: float = 1e-10) -> ConnectionChartSample:
    """Evaluate a_f at arbitrary points of R^7 (transported from the reference tube)."""
    check_kappa(kappa)
    prof = CutoffProfile(kappa)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    N = pts.shape[0]
    vals = np.broadcast_to(f * np.eye(7), (N, 7, 7)).copy()
    pot = np.zeros((N, 7))
    dist, idx, _, shift = distance_to_singular_set(pts)
    tube = dist < 2 * kappa
    data = _transport_data()
    for i, (R, T, S) in enumerate(data):
        sel = tube & (idx == i)
        if not np.any(sel):
            continue
        u = (pts[sel] - shift[sel] - T) @ R          # R^T (y - n - T)
        c_loc, h_loc = _local_tube_form(u, f, prof)
        vals[sel] = np.einsum("lk,nkj,mj->nlm", R, c_loc, S, optimize=True)
        pot[sel] = h_loc @ S.T
        over = sel & (dist >= 1.75 * kappa)
        if np.any(over):
            bad = np.max(np.abs(vals[over] - f * np.eye(7)))
            if bad > overlap_tol:
                raise ValueError(f"chart-overlap mismatch {bad:.3e}")
    charts = np.where(tube, "tube", "bulk")
    return ConnectionChartSample(f, pts, charts, vals, pot)


def tube_points(count: int, r_range: tuple[float, float], seed: int = 0,
                s_range: tuple[float, float] = (0.0, math.sqrt(7))) -> np.ndarray:
    """Random points at transverse radius in r_range around the reference line."""
    rng = np.random.default_rng(seed)
    B = C.adapted_basis()
    z = rng.standard_normal((count, 6))
    z *= (rng.uniform(*r_range, count) / np.linalg.norm(z, axis=1))[:, None]
    s = rng.uniform(*s_range, count)
    return s[:, None] * B[:, 0] + z @ B[:, 1:].T


def adapted_components(sample: ConnectionChartSample) -> np.ndarray:
    """Coefficients in the chart coframe (ds, dx1, dy1, ...): B^T c."""
    return np.einsum("km,nkj->nmj", C.adapted_basis(), sample.values)


def deep_tube_residual(f: float, kappa: float = DEFAULT_KAPPA, count: int = 200, seed: int = 0) -> float:
    """max deviation from (f/sqrt7) diag(i,i,i,-i,i,i,i) ds at radii < 5 kappa / 4."""
    pts = tube_points(count, (0.0, 1.2 * kappa), seed)
    ad = adapted_components(connection_form(f, pts, kappa))
    target = np.zeros((7, 7))
    target[0] = f * LINE_DIRECTION / math.sqrt(7)
    return float(np.max(np.abs(ad - target)))


@dataclass(frozen=True)
class CurvatureReport:
    bracket_max: float
    dA_max: float
    h: float


def curvature_residual(f: float, points, h: float = 1e-3, kappa: float = DEFAULT_KAPPA) -> CurvatureReport:
    """Central-difference dA plus the bracket [A ^ A]/2 (zero: diagonal values commute)."""
    pts = np.atleast_2d(points)
    vals = connection_form(f, pts, kappa).values
    Dc = np.zeros((pts.shape[0], 7, 7, 7))        # Dc[n, k, l, j] = d_k c[l, j]
    for k in range(7):
        e = np.zeros(7)
        e[k] = h
        Dc[:, k] = (connection_form(f, pts + e, kappa).values -
                    connection_form(f, pts - e, kappa).values) / (2 * h)
    F = Dc - np.swapaxes(Dc, 1, 2)
    A = 1j * vals                                  # diagonal entries of a_k
    br = A[:, :, None, :] * A[:, None, :, :] - A[:, None, :, :] * A[:, :, None, :]
    return CurvatureReport(float(np.max(np.abs(br))), float(np.max(np.abs(F))), h)


def curvature_convergence(f: float = 0.7, count: int = 40, h0: float = 1e-2,
                          kappa: float = DEFAULT_KAPPA, seed: int = 0) -> list[CurvatureReport]:
    """Residuals at h0, h0/2, h0/4 on points in the cutoff transition region."""
    pts = tube_points(count, (1.35 * kappa, 1.65 * kappa), seed)
    return [curvature_residual(f, pts, h0 / 2 ** i, kappa) for i in range(3)]


def dilation_invariance_check(f: float, lam: float = 2.0, kappa: float = DEFAULT_KAPPA,
                              count: int = 200, seed: int = 0) -> float:
    """max |delta_lam^* a - a| on the deep tube, in chart coordinates."""
    B = C.adapted_basis()
    pts = tube_points(count, (0.0, 1.2 * kappa / max(lam, 1.0)), seed)
    u = pts @ B
    scaled = (u * np.r_[1.0, [lam] * 6]) @ B.T
    a0 = adapted_components(connection_form(f, pts, kappa))
    a1 = adapted_components(connection_form(f, scaled, kappa))
    pulled = a1 * np.r_[1.0, [lam] * 6][None, :, None]
    return float(np.max(np.abs(pulled - a0)))


def equivariance_residual(f: float, points, kappa: float = DEFAULT_KAPPA) -> dict[str, float]:
    """a(g y) vs R a(y) S_g^T for the generators (Gamma-invariance of the lift)."""
    pts = np.atleast_2d(points)
    base = connection_form(f, pts, kappa).values
    out = {}
    for name, g in C.GENS.items():
        R, T = g.rotation_array().astype(float), g.translation_array().astype(float)
        S = diag_sign_action(g)
        img = connection_form(f, pts @ R.T + T, kappa).values
        out[name] = float(np.max(np.abs(img - np.einsum("lk,nkj,mj->nlm", R, base, S, optimize=True))))
    return out


def z2_invariance_residual(f: float, points, kappa: float = DEFAULT_KAPPA) -> float:
    """(y -> -y, Ad_R0): -Ad_R0 a(y) = a(y) must equal a(-y)."""
    pts = np.atleast_2d(points)
    a_plus = connection_form(f, pts, kappa).values
    a_minus = connection_form(f, -pts, kappa).values
    return float(np.max(np.abs(a_minus - a_plus)))


# ---------------------------------------------------------------- derivative in f

@dataclass(frozen=True)
class FamilyDerivative:
    harmonic: np.ndarray            # constant 7x7 coefficient array (identity)
    harmonic_norm_sq: float         # per unit volume
    harmonic_codifferential: float  # d^* of a constant-coefficient form
    fd_residual: float              # |d/df a - (harmonic + d h)|


def family_derivative_decomposition(f: float, points=None, kappa: float = DEFAULT_KAPPA,
                                    step: float = 1e-4, seed: int = 0) -> FamilyDerivative:
    if points is None:
        points = np.vstack([tube_points(100, (0, 2 * kappa), seed),
                            np.random.default_rng(seed + 1).uniform(0, 1, (100, 7))])
    harm = np.eye(7)
    fd = (connection_form(f + step, points, kappa).values -
          connection_form(f - step, points, kappa).values) / (2 * step)
    # d h in the tube equals (a/f - harmonic); at f = 1 this is exact
    dh = connection_form(1.0, points, kappa).values - harm
    res = float(np.max(np.abs(fd - (harm + dh))))
    # |diag(i dy^k)|^2 summed over k with <X,Y> = -tr(XY)/2 on the realification
    norm_sq = float(sum(-np.trace(_realify_diag(harm[k]) @ _realify_diag(harm[k])) / 2 for k in range(7)))
    return FamilyDerivative(harm, norm_sq, 0.0, res)


def _realify_diag(c: np.ndarray) -> np.ndarray:
    return M.SemilinearMap(np.diag(1j * c), np.zeros((7, 7), dtype=complex)).realify()


class EquivariantSampler:
    """Random Gamma-equivariant sections of so(E_0) (monodromy f_1).

    Each sample averages a trigonometric polynomial with frequencies in
    {-1,0,1}^7 over the 56 quotient elements: xi(y) = mean_g Ad_g^-1 xi0(g y).
    """

    def __init__(self, points: np.ndarray):
        quot = C.quotient_enumerate()
        rep1 = M.build_f_theta(0.0)
        ads = np.array([M.ad_matrix(rep1.of_element(g).realify()) for g in quot])
        # rows (g, i), columns j: (Ad_g^-1 v)_j = sum_i Ad_g[i, j] v_i
        self._ad_stack = ads.reshape(-1, 91)
        self._R = np.array([g.rotation_array() for g in quot], dtype=float)
        T = np.array([g.translation_array() for g in quot], dtype=float)
        self.points = np.atleast_2d(points)
        self._gy = np.einsum("gkl,pl->gpk", self._R, self.points) + T[:, None, :]

    def sample(self, rng: np.random.Generator, modes: int = 4) -> tuple[np.ndarray, np.ndarray]:
        """(xi, dxi): so-coordinates (P, 91) and derivatives (P, 7, 91)."""
        K = rng.integers(-1, 2, (modes, 7)).astype(float)
        Cc = rng.standard_normal((modes, 91)) + 1j * rng.standard_normal((modes, 91))
        return self.evaluate(K, Cc)

    def evaluate(self, K: np.ndarray, Cc: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        E = np.exp(2j * np.pi * self._gy @ K.T)                     # (G, P, modes)
        val = (E @ Cc).real
        # d/dy_k xi0(g y) picks up 2 pi i (K R_g)_k
        KR = np.einsum("rl,glk->grk", K, self._R)
        dval = np.matmul((2j * np.pi * E[..., None] * KR[:, None]).transpose(0, 1, 3, 2), Cc).real
        G, P = val.shape[:2]
        xi = (val.transpose(1, 0, 2).reshape(P, -1) @ self._ad_stack) / G
        dxi = (dval.transpose(1, 2, 0, 3).reshape(P * 7, -1) @ self._ad_stack).reshape(P, 7, 91) / G
        return xi, dxi


@dataclass(frozen=True)
class PairingReport:
    max_relative: float
    max_absolute: float
    bracket_pointwise_max: float
    samples: int


def harmonic_pairing(f: float = 0.7, samples: int = 50, grid: int = 2, modes: int = 4,
                     kappa: float = DEFAULT_KAPPA, seed: int = 0) -> PairingReport:
    """<diag(i dy), d_A xi>_{L^2} for random Gamma-equivariant sections xi.

    The midpoint grid with ``grid`` points per axis integrates the sampled
    frequencies exactly; the bracket term is also recorded pointwise.
    """
    rng = np.random.default_rng(seed)
    ax = (np.arange(grid) + 0.5) / grid
    pts = np.stack(np.meshgrid(*[ax] * 7, indexing="ij"), -1).reshape(-1, 7)
    sampler = EquivariantSampler(pts)
    a = connection_form(f, pts, kappa).values
    H = np.array([M.so_coords(_realify_diag(np.eye(7)[k])) for k in range(7)])     # (7, 91)
    Amat = np.array([[_realify_diag(a[n, k]) for k in range(7)] for n in range(len(pts))])
    best_rel = best_abs = br_max = 0.0
    for _ in range(samples):
        xi, dxi = sampler.sample(rng, modes)
        Xi = M.so_from_coords(xi)[:, None]
        br = M.so_coords(Amat @ Xi - Xi @ Amat)                      # (P, 7, 91)
        dA = dxi + br
        integrand = np.einsum("ki,pki->p", H, dA)
        br_pt = np.abs(np.einsum("ki,pki->p", H, br))
        pairing = float(np.mean(integrand))
        norm = math.sqrt(7) * math.sqrt(float(np.mean(np.sum(dA ** 2, axis=(1, 2)))))
        best_abs = max(best_abs, abs(pairing))
        best_rel = max(best_rel, abs(pairing) / norm if norm > 0 else 0.0)
        br_max = max(br_max, float(np.max(br_pt)))
    return PairingReport(best_rel, best_abs, br_max, samples)


# ---------------------------------------------------------------- kernel and Poincare constant

def irreducibility_kernel(theta) -> int:
    """dim ker d_{A_0,theta} on sections = dim of Gamma-fixed vectors in the adjoint."""
    return M.invariant_subspace(theta, "adjoint").dim


@dataclass(frozen=True)
class _StateOrbits:
    n: int
    rep: np.ndarray        # representative state of each state
    ratio: np.ndarray      # c(rep) = ratio * c(state)
    forced_zero: np.ndarray
    orbit_size: np.ndarray


def _state_orbits(fc: M.FiberCharacters, n: int) -> _StateOrbits:
    if n % 2:
        raise ValueError("grid size must be even to be Gamma-invariant")
    P = n ** 7
    S = P * 91
    coords = np.stack(np.unravel_index(np.arange(P), (n,) * 7), 1)     # (P, 7) ints
    weights = n ** np.arange(6, -1, -1)
    state = np.arange(S)
    best = state.copy()
    ratio = np.ones(S, dtype=complex)
    forced = np.zeros(S, dtype=bool)
    pt_idx, m_idx = state // 91, state % 91
    for g in range(fc.rotations.shape[0]):
        R = np.rint(fc.rotations[g]).astype(int)
        Tn = np.rint(fc.translations[g] * n).astype(int)
        img = coords @ R.T + Tn
        wrapped = np.mod(img, n)
        nu = (img - wrapped) // n                                           # (P, 7)
        img_pt = wrapped @ weights
        m2 = fc.perm[g][m_idx]
        rho = fc.phase[g][m_idx] * np.exp(-2j * np.pi * np.sum(fc.mu[m2] * nu[pt_idx], axis=1))
        img_state = img_pt[pt_idx] * 91 + m2
        fixed = img_state == state
        forced |= fixed & (np.abs(rho - 1) > 1e-9)
        upd = img_state < best
        best[upd], ratio[upd] = img_state[upd], rho[upd]
    forced_rep = np.zeros(S, dtype=bool)
    forced_rep[best[forced]] = True
    forced = forced_rep[best]
    size = np.bincount(best, minlength=S)
    return _StateOrbits(n, best, ratio, forced, size[best])


@dataclass(frozen=True)
class PoincareResult:
    sigma_min: float
    constant: float
    unknowns: int
    excluded_points: int
    grid: int
    rho: float


def poincare_constant(theta, rho: Optional[float] = None, grid: int = 4,
                      kappa: float = DEFAULT_KAPPA) -> PoincareResult:
    """sigma_min of the grid difference operator d on equivariant sections over U.

    U is the complement of the rho-tube around the singular set (rho = 0
    keeps every grid point).  Sections are written in the monomial fiber
    basis, reduced to orbit representatives, and the discrete L^2 norms
    are weighted by orbit sizes.
    """
    th, _ = M.parse_theta(theta)
    if abs(complex(th) - 1) < 1e-12 or abs(complex(th) + 1) < 1e-12:
        raise ValueError("theta = +-1 has parallel sections")
    if rho is None:
        rho = kappa / 4
    if rho >= kappa:
        raise ValueError("rho must be smaller than kappa")
    fc = M.fiber_characters(theta)
    n = grid
    orb = _state_orbits(fc, n)
    P = n ** 7
    coords = np.stack(np.unravel_index(np.arange(P), (n,) * 7), 1)
    dist = distance_to_singular_set(coords / n)[0] if rho > 0 else np.full(P, np.inf)
    inside = dist >= rho if rho > 0 else np.ones(P, dtype=bool)
    _check_connected(inside, n)
    S = P * 91
    states = np.arange(S)
    is_rep = (orb.rep == states) & ~orb.forced_zero & inside[states // 91]
    rep_ids = states[is_rep]
    col = -np.ones(S, dtype=int)
    col[rep_ids] = np.arange(rep_ids.size)
    weights = n ** np.arange(6, -1, -1)
    rows, cols, vals, wts = [], [], [], []
    r = 0
    pts, ms = rep_ids // 91, rep_ids % 91
    for k in range(7):
        for sgn in (1, -1):
            nb = coords[pts].copy()
            nb[:, k] += sgn
            nu = np.zeros(nb.shape[0])
            nu[nb[:, k] >= n] = 1
            nu[nb[:, k] < 0] = -1
            nb[:, k] = np.mod(nb[:, k], n)
            nb_state = (nb @ weights) * 91 + ms
            keep = inside[nb_state // 91]
            lam = np.exp(2j * np.pi * fc.mu[ms, k] * nu)
            nb_rep = orb.rep[nb_state]
            coef = lam / orb.ratio[nb_state]
            nb_zero = orb.forced_zero[nb_state]
            idx = np.nonzero(keep)[0]
            rid = r + np.arange(idx.size)
            rows += [rid]
            cols += [col[rep_ids[idx]]]
            vals += [-n * np.ones(idx.size)]
            nz = idx[~nb_zero[idx]]
            rid_nz = r + np.searchsorted(idx, nz)
            rows += [rid_nz]
            cols += [col[nb_rep[nz]]]
            vals += [n * coef[nz]]
            wts += [orb.orbit_size[rep_ids[idx]] / 2.0]
            r += idx.size
    D = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(r, rep_ids.size))
    W = sp.diags(np.concatenate(wts))
    Minv = sp.diags(1 / np.sqrt(orb.orbit_size[rep_ids].astype(float)))
    K = (Minv @ (D.conj().T @ W @ D) @ Minv).tocsc()
    lam_min = _smallest_eigenvalue(K)
    smin = math.sqrt(max(lam_min, 0.0))
    return PoincareResult(smin, 1 / smin if smin > 0 else math.inf, rep_ids.size,
                          int(np.sum(~inside)), n, rho)


def _check_connected(inside: np.ndarray, n: int) -> None:
    P = n ** 7
    idx = np.arange(P)
    coords = np.stack(np.unravel_index(idx, (n,) * 7), 1)
    weights = n ** np.arange(6, -1, -1)
    rows, cols = [], []
    for k in range(7):
        nb = coords.copy()
        nb[:, k] = np.mod(nb[:, k] + 1, n)
        j = nb @ weights
        ok = inside & inside[j]
        rows.append(idx[ok])
        cols.append(j[ok])
    A = sp.csr_matrix((np.ones(sum(len(x) for x in rows)), (np.concatenate(rows), np.concatenate(cols))),
                      shape=(P, P))
    ncomp, labels = connected_components(A, directed=False)
    if len(set(labels[inside])) > 1:
        raise ValueError("discretized domain is disconnected")


def _smallest_eigenvalue(K: sp.spmatrix) -> float:
    # the graph splits into blocks (fiber orbits); solve each block separately
    ncomp, labels = connected_components(abs(K) > 0, directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(ncomp + 1))
    Kp = K.tocsr()[order][:, order].tocsr()
    best = math.inf
    for c in range(ncomp):
        lo, hi = bounds[c], bounds[c + 1]
        B = Kp[lo:hi, lo:hi]
        if hi - lo <= 1500:
            ev = np.linalg.eigvalsh(B.toarray())[0]
        else:
            ev = eigsh(B, k=1, which="SA", tol=1e-10, return_eigenvectors=False)[0]
        best = min(best, float(np.real(ev)))
    return best
