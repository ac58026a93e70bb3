"""Verification suites behind the command line.  Each suite returns a list of Check records."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Optional

import numpy as np

from . import contraction as K
from . import crystal as C
from . import dolbeault as D
from . import flat_family as F
from . import forms as Fm
from . import monodromy as M
from . import quiver as Q
from . import spectral as S

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"


@dataclass
class Check:
    id: str
    anchor: str                     # the claim being checked, in words
    status: str
    measured: Any = None
    tolerance: Any = None

    def as_dict(self) -> dict:
        return {"id": self.id, "anchor": self.anchor, "status": self.status,
                "measured": _jsonable(self.measured), "tolerance": _jsonable(self.tolerance)}


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    return x


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def _le(id_, anchor, value, tol) -> Check:
    return Check(id_, anchor, _status(value <= tol), value, tol)


@dataclass
class RunConfig:
    suite: str = "all"
    thetas: list = field(default_factory=lambda: [0.7])
    modes: int = 1
    grid: int = 2
    tol: float = 1e-10
    output: Optional[str] = None
    seed: int = 0
    f: float = 0.7
    zeta: Optional[list] = None
    solve: bool = False
    block: str = "all"
    check: str = "all"
    jobs: int = 1

    def validate(self) -> None:
        if self.tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.modes < 1:
            raise ValueError("mode radius must be >= 1")
        if self.grid < 1:
            raise ValueError("grid density must be >= 1")

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["thetas"] = [_theta_label(t) for t in self.thetas]
        if self.zeta is not None:
            d["zeta"] = [_jsonable(Fraction(z)) for z in self.zeta]
        return d


def _theta_label(t) -> Any:
    return t if isinstance(t, str) else _jsonable(t)


def is_excluded_theta(theta) -> bool:
    th = complex(M.parse_theta(theta)[0])
    return abs(th - 1) < 1e-12 or abs(th + 1) < 1e-12


# ---------------------------------------------------------------- suites

def suite_group(cfg: RunConfig) -> list[Check]:
    rels = C.verify_presentation()
    failed = [r.label for r in rels if not r.passed]
    quot = C.quotient_enumerate()
    strata = C.singular_strata()
    out = [Check("group.relations", "every relator evaluates to the identity", _status(not failed),
                 {"relations": len(rels), "failed": failed}, 0),
           Check("group.order", "quotient by the translation lattice has order 56", _status(len(quot) == 56),
                 len(quot), 56)]
    if strata:
        s = strata[0]
        out.append(Check("group.strata", "one singular stratum with isotropy Z_7",
                         _status(len(strata) == 1 and s.isotropy_order == 7),
                         {"count": len(strata), "isotropy": s.isotropy_order,
                          "angles": list(s.rotation_angles)}, None))
    return out


def suite_forms(cfg: RunConfig) -> list[Check]:
    rng = np.random.default_rng(cfg.seed)
    phi, psi = Fm.phi0(), Fm.psi0()
    out = [_le("forms.metric", "phi0 induces the Euclidean metric",
               float(np.max(np.abs(Fm.g2_metric(phi) - np.eye(7)))), 1e-12),
           _le("forms.star", "psi0 = *phi0", (Fm.hodge_star(phi) - psi).max_abs(), 1e-12)]
    rots = [g.rotation_array() for g in C.quotient_enumerate()]
    out.append(Check("forms.holonomy", "every rotation part of the quotient preserves phi0 and psi0",
                     _status(all(Fm.preserves_phi(R) and Fm.preserves_psi(R) for R in rots)), len(rots), None))
    worst = 0.0
    for _ in range(20):
        p = Fm.random_point_sample(rng)
        worst = max(worst, Fm.insertion_identity_check(p.a, p.xi))
    out.append(_le("forms.insertion", "[i_a, xi] = *[a ^ *xi]", worst, 1e-10))
    return out


def suite_rep(cfg: RunConfig) -> list[Check]:
    out = []
    for theta in cfg.thetas:
        label = _theta_label(theta)
        rels = M.verify_descends(theta)
        out.append(Check(f"rep.descends[{label}]", "f_theta respects every relator",
                         _status(all(r.passed for r in rels)), max(r.residual for r in rels), 1e-12))
        mult = M.b_eigen_multiplicities(theta)
        if is_excluded_theta(theta):
            adj = M.invariant_subspace(theta, "adjoint").dim
            one = M.invariant_subspace(theta, "oneform").dim
            out.append(Check(f"rep.invariants[{label}]",
                             "theta = +-1: invariant dimensions recorded as baselines",
                             INDETERMINATE, {"adjoint": adj, "oneform": one}, None))
            continue
        out.append(Check(f"rep.b_eigen[{label}]", "eigenspaces of f(b) have dimensions 6, 4, 2, 2",
                         _status(mult == {"1": 6, "-1": 4, "theta": 2, "conj_theta": 2}), mult, None))
        adj = M.invariant_subspace(theta, "adjoint")
        one = M.invariant_subspace(theta, "oneform")
        ang = _angle_to_reference(one.basis[0]) if one.dim == 1 else math.inf
        out.append(Check(f"rep.invariants[{label}]", "dim so^Gamma = 0 and dim (R^7 x so)^Gamma = 1",
                         _status(adj.dim == 0 and one.dim == 1), {"adjoint": adj.dim, "oneform": one.dim}, None))
        out.append(_le(f"rep.generator[{label}]", "invariant 1-form parallel to sum e_i (x) e_i ^ f_i", ang, 1e-8))
        nd = M.nondegeneracy_constant(theta)
        out.append(Check(f"rep.c_theta[{label}]", "c_theta finite", _status(math.isfinite(nd.c_theta)),
                         {"sigma_min": nd.sigma_min, "c_theta": nd.c_theta}, None))
    return out


def _angle_to_reference(v: np.ndarray) -> float:
    u = M.reference_invariant().ravel()
    u, v = u / np.linalg.norm(u), v / np.linalg.norm(v)
    par = float(v @ u)
    # atan2 of the orthogonal part keeps precision for tiny angles, unlike acos
    return math.atan2(float(np.linalg.norm(v - par * u)), abs(par))


def suite_family(cfg: RunConfig) -> list[Check]:
    f = cfg.f
    out = []
    rng = np.random.default_rng(cfg.seed)
    pts = np.vstack([F.tube_points(50, (0, 2 * F.DEFAULT_KAPPA), cfg.seed), rng.uniform(0, 1, (50, 7))])
    if cfg.check in ("all", "flatness"):
        reps = F.curvature_convergence(f, seed=cfg.seed)
        ratios = [reps[i].dA_max / reps[i + 1].dA_max for i in range(2)]
        out.append(Check("family.bracket", "bracket term [A ^ A] vanishes", _status(max(r.bracket_max for r in reps) == 0),
                         max(r.bracket_max for r in reps), 0))
        out.append(Check("family.curvature_order", "dA residual is O(h^2): halving ratios 4 +- 0.5",
                         _status(all(abs(r - 4) <= 0.5 for r in ratios)),
                         {"residuals": [r.dA_max for r in reps], "ratios": ratios}, 0.5))
    if cfg.check in ("all", "gluing"):
        out.append(_le("family.deep_tube", "deep-tube form is (f/sqrt7) diag(i,i,i,-i,i,i,i) ds",
                       F.deep_tube_residual(f), 1e-12))
        out.append(_le("family.dilation", "dilation invariance", F.dilation_invariance_check(f), 1e-12))
        out.append(_le("family.z2", "(y -> -y, Ad_R0) pulls back a to a", F.z2_invariance_residual(f, pts), 1e-10))
        eq = F.equivariance_residual(f, pts)
        out.append(_le("family.equivariance", "a is Gamma-equivariant", max(eq.values()), 1e-10))
    if cfg.check in ("all", "tangency"):
        fd = F.family_derivative_decomposition(f)
        out.append(Check("family.harmonic", "harmonic part of d/df a is coclosed with positive norm",
                         _status(fd.harmonic_codifferential == 0 and fd.harmonic_norm_sq > 0),
                         {"norm_sq": fd.harmonic_norm_sq, "fd_residual": fd.fd_residual}, None))
        pr = F.harmonic_pairing(f, samples=50, grid=max(2, cfg.grid), seed=cfg.seed)
        out.append(_le("family.tangency", "harmonic part is L2-orthogonal to exact forms", pr.max_relative, 1e-6))
    return out


def suite_dolbeault(cfg: RunConfig) -> list[Check]:
    rep = D.star_omega_identity_suite(1000, cfg.seed)
    out = [_le(f"dolbeault.{k}", f"*_Omega identity: {k}", v, 1e-12)
           for k, v in rep.as_dict().items() if k != "samples"]
    N = max(2, cfg.modes)
    blk = D.build_block_operator(N=N)
    out.append(_le("dolbeault.factorization", "L L* = -d_s^2 + 2 Laplacian on the even block",
                   blk.factorization_residual(), 1e-10))
    out.append(_le("dolbeault.adjoint", "displayed L* is the adjoint of L", blk.adjointness_residual(), 1e-10))
    conj = D.derham_conjugation_check(1)
    out.append(_le("dolbeault.derham", "conjugated de Rham operator equals the block operator",
                   max(conj.residual_L, conj.residual_Lstar), 1e-10))
    return out


def suite_spectral(cfg: RunConfig) -> list[Check]:
    out = []
    for theta in cfg.thetas:
        label = _theta_label(theta)
        if is_excluded_theta(theta):
            out.append(Check(f"spectral.excluded[{label}]", "theta = +-1 skipped", INDETERMINATE, None, None))
            continue
        kd = S.kernel_dims(theta, cfg.modes)
        alg_one = M.invariant_subspace(theta, "oneform").dim
        alg_adj = M.invariant_subspace(theta, "adjoint").dim
        dims = {"ker_L": kd.ker_L, "ker_Lstar": kd.ker_Lstar, "ker_sections": kd.ker_sections}
        if cfg.block in ("all", "ker"):
            out.append(Check(f"spectral.ker[{label}]", "dim ker L = 1 = algebraic fixed-point dim",
                             _status(kd.ker_L == 1 == alg_one), dims, None))
        if cfg.block in ("all", "coker"):
            sign = S.kernel_vector_z2_sign(theta, cfg.modes, "Lstar")
            out.append(Check(f"spectral.coker[{label}]", "dim ker L* = 1 and the Z2 action on it is -1",
                             _status(kd.ker_Lstar == 1 and abs(sign + 1) < 1e-8), {"dim": kd.ker_Lstar, "z2": sign}, None))
        if cfg.block in ("all", "sections"):
            out.append(Check(f"spectral.sections[{label}]", "ker d_A on sections = 0 = dim so^Gamma",
                             _status(kd.ker_sections == 0 == alg_adj), kd.ker_sections, 0))
        zero_modes = all(max(abs(x) for x in w) < 1e-12 for w in kd.kernel_frequencies)
        out.append(Check(f"spectral.localization[{label}]", "kernel supported on k + mu = 0",
                         _status(zero_modes), len(kd.kernel_frequencies), None))
        out.append(Check(f"spectral.gap[{label}]", "spectral gap (regression baseline)", PASS,
                         S.spectral_gap(theta, cfg.modes), None))
    return out


def suite_quiver(cfg: RunConfig) -> list[Check]:
    zeta = cfg.zeta or [Fraction(1, 10)] * 6 + [Fraction(-6, 10)]
    z = Q.as_zeta(zeta)
    gen = Q.is_generic(z)
    lift = Q.lift_criterion(-np.eye(3), z)
    out = [Check("quiver.generic", "zeta generic (no proper subset sums to zero)", PASS, gen, None),
           Check("quiver.lift_minus_id", "conj_{-1} is trivial, so -id lifts", _status(lift), lift, None)]
    if cfg.solve:
        if not gen:
            out.append(Check("quiver.solve", "moment-map solve needs generic zeta", INDETERMINATE, None, None))
        else:
            r = Q.solve_moment(z, seed=cfg.seed)
            out.append(Check("quiver.solve", "moment and commutator residuals below 1e-8",
                             _status(r.converged), {"moment": r.moment_residual, "commutator": r.commutation,
                                                    "iterations": r.iterations}, 1e-8))
    return out


def suite_contraction(cfg: RunConfig) -> list[Check]:
    out = []
    for name, fam in K.analytic_families().items():
        f = 0.3
        D_an = K.fix_derivative(fam, f)
        D_fd = K.fd_fix_derivative(fam, f)
        rel = float(np.linalg.norm(D_an - D_fd) / np.linalg.norm(D_an))
        out.append(_le(f"contraction.derivative[{name}]", "(I - d_B E)^{-1} d_F E matches finite differences", rel, 1e-6))
        b = K.derivative_bound(fam, f, seed=cfg.seed)
        out.append(Check(f"contraction.bound[{name}]", "|D Fix| <= (1 - c)^{-1} |d_F E|", _status(b.holds),
                         {"derivative": b.derivative_norm, "bound": b.bound, "c": b.constant}, None))
    return out


SUITES: dict[str, Callable[[RunConfig], list[Check]]] = {
    "group": suite_group, "forms": suite_forms, "rep": suite_rep, "family": suite_family,
    "dolbeault": suite_dolbeault, "spectral": suite_spectral, "quiver": suite_quiver,
    "contraction": suite_contraction,
}


def run_named(name: str, cfg: RunConfig) -> tuple[str, list[dict], float]:
    t = time.perf_counter()
    checks = SUITES[name](cfg)
    return name, [c.as_dict() for c in checks], time.perf_counter() - t
