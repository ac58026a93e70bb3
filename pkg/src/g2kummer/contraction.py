"""Fixed points of parametrised contractions and the derivative of the fixed point.

For a family E(f, .) of contractions of a closed ball with constant c < 1,
b_f = Fix E(f, .) satisfies (D Fix)_f = (I - d_B E)^{-1} d_F E, hence
|D Fix| <= (1 - c)^{-1} |d_F E|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

Evaluator = Callable[[float, np.ndarray], np.ndarray]


class DivergenceError(RuntimeError):
    def __init__(self, message: str, iterate: np.ndarray):
        super().__init__(message)
        self.iterate = iterate


class IllConditionedError(RuntimeError):
    pass


@dataclass
class ContractionFamily:
    """E(f, b) on the closed ball |b| <= radius in R^dim, for f in ``interval``."""
    dim: int
    evaluate: Evaluator
    radius: float = math.inf
    interval: tuple[float, float] = (-1.0, 1.0)
    claimed_constant: float = 0.5
    d_b: Optional[Callable[[float, np.ndarray], np.ndarray]] = None      # analytic Jacobian in b
    d_f: Optional[Callable[[float, np.ndarray], np.ndarray]] = None      # analytic derivative in f
    name: str = "family"

    def __call__(self, f: float, b) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.evaluate(f, np.atleast_1d(np.asarray(b, float))), float))


# ---------------------------------------------------------------- derivatives

def richardson_derivative(g: Callable[[float], np.ndarray], x: float, h: float = 1e-3) -> np.ndarray:
    """5-point central difference at steps h and h/2, combined by Richardson extrapolation."""
    def five(step):
        return (-g(x + 2 * step) + 8 * g(x + step) - 8 * g(x - step) + g(x - 2 * step)) / (12 * step)
    return (16 * five(h / 2) - five(h)) / 15


def partial_b(fam: ContractionFamily, f: float, b: np.ndarray, h: float = 1e-3) -> np.ndarray:
    if fam.d_b is not None:
        return np.atleast_2d(np.asarray(fam.d_b(f, b), float))
    cols = []
    for j in range(fam.dim):
        e = np.zeros(fam.dim)
        e[j] = 1.0
        cols.append(richardson_derivative(lambda t: fam(f, b + t * e), 0.0, h))
    return np.stack(cols, axis=1)


def partial_f(fam: ContractionFamily, f: float, b: np.ndarray, h: float = 1e-3) -> np.ndarray:
    if fam.d_f is not None:
        return np.atleast_1d(np.asarray(fam.d_f(f, b), float))
    return richardson_derivative(lambda t: fam(t, b), f, h)


# ---------------------------------------------------------------- fixed points

@dataclass(frozen=True)
class FixPoint:
    b: np.ndarray
    iterations: int
    residual: float
    trajectory_lipschitz: float


def fix_point(fam: ContractionFamily, f: float, tol: float = 1e-13, max_iter: int = 10_000,
              start: Optional[np.ndarray] = None) -> FixPoint:
    """Banach iteration b <- E(f, b) from ``start`` (default 0) until |E(f,b) - b| <= tol."""
    b = np.zeros(fam.dim) if start is None else np.asarray(start, float)
    lip = 0.0
    prev_step = None
    for it in range(max_iter + 1):
        nb = fam(f, b)
        if not np.all(np.isfinite(nb)) or np.linalg.norm(nb) > fam.radius * (1 + 1e-12):
            raise DivergenceError(f"iterate left the ball of radius {fam.radius}", nb)
        step = float(np.linalg.norm(nb - b))
        if prev_step:
            lip = max(lip, step / prev_step)
        if step <= tol:
            return FixPoint(nb, it, step, lip)
        prev_step = step
        b = nb
    raise DivergenceError(f"no convergence in {max_iter} iterations", b)


def measured_contraction(fam: ContractionFamily, f: Optional[float] = None, samples: int = 1000,
                         seed: int = 0) -> float:
    """max |E(f,x) - E(f,y)| / |x - y| over random pairs in the ball (and random f if None)."""
    rng = np.random.default_rng(seed)
    R = fam.radius if math.isfinite(fam.radius) else 1.0
    best = 0.0
    for _ in range(samples):
        ff = rng.uniform(*fam.interval) if f is None else f
        x, y = (_ball_point(rng, fam.dim, R) for _ in range(2))
        d = np.linalg.norm(x - y)
        if d > 0:
            best = max(best, float(np.linalg.norm(fam(ff, x) - fam(ff, y)) / d))
    return best


def _ball_point(rng, dim, R):
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v) * R * rng.uniform() ** (1 / dim)


def fix_derivative(fam: ContractionFamily, f: float, tol: float = 1e-13) -> np.ndarray:
    """(I - d_B E)^{-1} d_F E at (f, b_f)."""
    b = fix_point(fam, f, tol).b
    A = np.eye(fam.dim) - partial_b(fam, f, b)
    if np.linalg.cond(A) > 1e12:
        raise IllConditionedError("I - d_B E is ill-conditioned")
    return np.linalg.solve(A, partial_f(fam, f, b))


def fd_fix_derivative(fam: ContractionFamily, f: float, h: float = 1e-3, tol: float = 1e-14) -> np.ndarray:
    """Finite-difference derivative of f -> b_f (oracle for fix_derivative)."""
    return richardson_derivative(lambda t: fix_point(fam, t, tol).b, f, h)


@dataclass(frozen=True)
class DerivativeBound:
    derivative_norm: float
    bound: float
    constant: float
    d_f_norm: float

    @property
    def holds(self) -> bool:
        return self.derivative_norm <= self.bound * (1 + 1e-12)


def derivative_bound(fam: ContractionFamily, f: float, samples: int = 1000, seed: int = 0) -> DerivativeBound:
    """|D Fix| against (1 - c_f)^{-1} |d_F E| with c_f the larger of sampled Lipschitz and |d_B E|."""
    fp = fix_point(fam, f)
    Jb = partial_b(fam, f, fp.b)
    c = max(measured_contraction(fam, f, samples, seed), fp.trajectory_lipschitz,
            float(np.linalg.norm(Jb, 2)))
    if c >= 1:
        raise ValueError(f"measured contraction constant {c} >= 1")
    dfE = float(np.linalg.norm(partial_f(fam, f, fp.b)))
    D = float(np.linalg.norm(fix_derivative(fam, f)))
    return DerivativeBound(D, dfE / (1 - c), c, dfE)


def continuity_check(fam: ContractionFamily, f1: float, f2: float, constant: float) -> tuple[float, float]:
    """(|b_f1 - b_f2|, (1-C)^{-1} |E(f1, b_f1) - E(f2, b_f1)|)."""
    b1 = fix_point(fam, f1).b
    b2 = fix_point(fam, f2).b
    return float(np.linalg.norm(b1 - b2)), float(np.linalg.norm(fam(f1, b1) - fam(f2, b1))) / (1 - constant)


def second_derivative_stability(fam: ContractionFamily, f: float, h: float = 1e-2) -> float:
    """Relative change of the FD second derivative of f -> b_f under halving the step."""
    def d2(step):
        g = lambda t: fix_point(fam, t, 1e-15).b
        return (g(f + step) - 2 * g(f) + g(f - step)) / step ** 2
    a, b = d2(h), d2(h / 2)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


# ---------------------------------------------------------------- example families

def affine_family() -> ContractionFamily:
    """E(f, b) = b/2 + f; b_f = 2f."""
    return ContractionFamily(1, lambda f, b: b / 2 + f, radius=10.0, interval=(-1, 1),
                             claimed_constant=0.5, name="affine")


def cosine_family() -> ContractionFamily:
    """E(f, b) = (cos b + f)/3 on R."""
    return ContractionFamily(1, lambda f, b: (np.cos(b) + f) / 3, radius=10.0, interval=(-1, 1),
                             claimed_constant=1 / 3, name="cosine")


def cosine_root(f: float) -> float:
    """Independent oracle: root of 3b - cos b - f by bracketing."""
    return brentq(lambda b: 3 * b - math.cos(b) - f, -10, 10, xtol=1e-15)


@dataclass
class ToyInstantonFamily:
    """E(f, b) = -(Q(R b) + e(f)) with |R| <= c and Q(x)_i = x^T S_i x.

    Fixed points solve b = -Q(Rb) - e; the candidate solution is a = R b.
    """
    R: np.ndarray
    S: np.ndarray                       # (n, m, m) symmetric
    e0: np.ndarray
    e1: np.ndarray
    family: ContractionFamily = field(init=False)

    def __post_init__(self):
        n = self.R.shape[0]
        self.family = ContractionFamily(n, self.evaluate, radius=self.ball_radius(),
                                        interval=(-1, 1), claimed_constant=0.5,
                                        d_b=self.jacobian, d_f=lambda f, b: -self.e_prime(f),
                                        name="toy-instanton")

    @property
    def c(self) -> float:
        return float(np.linalg.norm(self.R, 2))

    @property
    def q_norm(self) -> float:
        return float(np.sqrt(np.sum(np.linalg.norm(self.S, 2, axis=(1, 2)) ** 2)))

    def e(self, f: float) -> np.ndarray:
        return self.e0 + math.sin(f) * self.e1

    def e_prime(self, f: float) -> np.ndarray:
        return math.cos(f) * self.e1

    def max_e(self) -> float:
        return float(np.linalg.norm(self.e0) + np.linalg.norm(self.e1))

    def ball_radius(self) -> float:
        return 2 * self.max_e()

    def Q(self, x: np.ndarray) -> np.ndarray:
        return np.einsum("i,kij,j->k", x, self.S, x)

    def evaluate(self, f: float, b: np.ndarray) -> np.ndarray:
        return -(self.Q(self.R @ b) + self.e(f))

    def jacobian(self, f: float, b: np.ndarray) -> np.ndarray:
        x = self.R @ b
        return -2 * np.einsum("kij,j->ki", self.S, x) @ self.R

    def contraction_bound(self) -> float:
        """Analytic Lipschitz bound 2 |S| c^2 r on the ball of radius r."""
        return 2 * self.q_norm * self.c ** 2 * self.ball_radius()


def toy_instanton_family(n: int = 4, c: float = 1.5, e_size: float = 0.02, seed: int = 0) -> ToyInstantonFamily:
    rng = np.random.default_rng(seed)
    R = rng.standard_normal((n, n))
    R *= c / np.linalg.norm(R, 2)
    S = rng.standard_normal((n, n, n))
    S = (S + np.swapaxes(S, 1, 2)) / 2
    S /= np.sqrt(np.sum(np.linalg.norm(S, 2, axis=(1, 2)) ** 2))
    e0 = rng.standard_normal(n)
    e1 = rng.standard_normal(n)
    e0 *= e_size / np.linalg.norm(e0)
    e1 *= e_size / 2 / np.linalg.norm(e1)
    toy = ToyInstantonFamily(R, S, e0, e1)
    if toy.contraction_bound() >= 1 or toy.q_norm * c ** 2 * toy.ball_radius() ** 2 > toy.max_e():
        raise ValueError("e too large for a contraction of the 2|e| ball")
    return toy


def analytic_families() -> dict[str, ContractionFamily]:
    return {"affine": affine_family(), "cosine": cosine_family(),
            "toy-instanton": toy_instanton_family().family}
