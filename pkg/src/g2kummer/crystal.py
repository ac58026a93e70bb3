"""Exact arithmetic for the crystallographic group generated by alpha, beta, tau_1.

Elements are affine isometries y -> R y + v of R^7 with rational entries.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from typing import Optional, Sequence

import numpy as np

from . import words as W

DIM = 7
Rat = Fraction
Matrix = tuple[tuple[Fraction, ...], ...]
Vector = tuple[Fraction, ...]


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def _identity(n: int = DIM) -> Matrix:
    return tuple(tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n))


def _matmul(A: Matrix, B: Matrix) -> Matrix:
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = [Fraction(0)] * m
        for l in range(k):
            a = A[i][l]
            if a:
                Bl = B[l]
                for j in range(m):
                    if Bl[j]:
                        row[j] += a * Bl[j]
        out.append(tuple(row))
    return tuple(out)


def _matvec(A: Matrix, v: Vector) -> Vector:
    return tuple(sum((a * x for a, x in zip(row, v) if a and x), Fraction(0)) for row in A)


def _transpose(A: Matrix) -> Matrix:
    return tuple(zip(*A))


def _det(A: Matrix) -> Fraction:
    M = [list(r) for r in A]
    n = len(M)
    det = Fraction(1)
    for c in range(n):
        p = next((r for r in range(c, n) if M[r][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            M[c], M[p] = M[p], M[c]
            det = -det
        det *= M[c][c]
        for r in range(c + 1, n):
            f = M[r][c] / M[c][c]
            if f:
                for j in range(c, n):
                    M[r][j] -= f * M[c][j]
    return det


def _frac_part(x: Fraction) -> Fraction:
    return x - math.floor(x)


@dataclass(frozen=True)
class IsometryElement:
    """Affine isometry y -> rotation @ y + translation, exact rationals."""

    rotation: Matrix
    translation: Vector

    @classmethod
    def make(cls, rotation: Sequence[Sequence], translation: Sequence) -> "IsometryElement":
        R = tuple(tuple(_frac(x) for x in row) for row in rotation)
        v = tuple(_frac(x) for x in translation)
        g = cls(R, v)
        g.validate()
        return g

    @classmethod
    def identity(cls) -> "IsometryElement":
        return cls(_identity(), tuple(Fraction(0) for _ in range(DIM)))

    @classmethod
    def translation_by(cls, v: Sequence) -> "IsometryElement":
        return cls(_identity(len(v)), tuple(_frac(x) for x in v))

    def validate(self) -> None:
        n = len(self.rotation)
        if len(self.translation) != n or any(len(r) != n for r in self.rotation):
            raise ValueError("shape mismatch")
        if _matmul(_transpose(self.rotation), self.rotation) != _identity(n):
            raise ValueError("rotation part is not orthogonal")
        if _det(self.rotation) not in (1, -1):
            raise ValueError("determinant must be +1 or -1")

    def __matmul__(self, other: "IsometryElement") -> "IsometryElement":
        return compose(self, other)

    def inverse(self) -> "IsometryElement":
        Rt = _transpose(self.rotation)
        return IsometryElement(Rt, tuple(-x for x in _matvec(Rt, self.translation)))

    def apply(self, y: Sequence) -> Vector:
        y = tuple(_frac(x) for x in y)
        return tuple(a + b for a, b in zip(_matvec(self.rotation, y), self.translation))

    def is_translation(self) -> bool:
        return self.rotation == _identity(len(self.rotation))

    def reduced(self) -> "IsometryElement":
        """Same coset modulo Z^7: translation moved into [0,1)^7."""
        return IsometryElement(self.rotation, tuple(_frac_part(x) for x in self.translation))

    def rotation_array(self) -> np.ndarray:
        return np.array([[float(x) for x in r] for r in self.rotation])

    def translation_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.translation])

    def to_json(self) -> dict:
        return {"rotation": [[_fmt(x) for x in r] for r in self.rotation],
                "translation": [_fmt(x) for x in self.translation]}


def _fmt(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def compose(g: IsometryElement, h: IsometryElement) -> IsometryElement:
    """(g h)(y) = g(h(y)): rotation R_g R_h, translation R_g v_h + v_g."""
    R = _matmul(g.rotation, h.rotation)
    v = tuple(a + b for a, b in zip(_matvec(g.rotation, h.translation), g.translation))
    return IsometryElement(R, v)


def _signed_permutation(images: Sequence[tuple[int, int]]) -> Matrix:
    """Row i of the matrix picks sign * y_src (1-based src)."""
    n = len(images)
    rows = []
    for src, sign in images:
        rows.append(tuple(Fraction(sign if j == src - 1 else 0) for j in range(n)))
    return tuple(rows)


# ---------------------------------------------------------------- generators

@dataclass(frozen=True)
class CrystalData:
    generators: dict
    relations: tuple[tuple[str, str, str], ...]   # (family, label, relator text)


def default_generators() -> dict[str, IsometryElement]:
    h = Fraction(1, 2)
    alpha = IsometryElement(_signed_permutation([(2, 1), (3, 1), (7, 1), (6, -1), (4, -1), (1, 1), (5, 1)]),
                            tuple(Fraction(0) for _ in range(DIM)))
    beta = IsometryElement(_signed_permutation([(1, -1), (2, -1), (3, -1), (4, -1), (5, 1), (6, 1), (7, 1)]),
                           (h, h, Fraction(0), Fraction(0), h, h, Fraction(0)))
    tau1 = IsometryElement.translation_by([1, 0, 0, 0, 0, 0, 0])
    return {"a": alpha, "b": beta, "t": tau1}


def default_relations() -> tuple[tuple[str, str, str], ...]:
    """Relators (family id, readable label, relator string equal to 1)."""
    rels = [("1", "a^7 = 1", "a^7"),
            ("2", "b^2 = t1 t3", "b^2 t3^-1 t1^-1")]
    bb = {1: "t6 t2^-1 t3 t1", 2: "t t5^-1 t2^-1 t1", 3: "t6^-1 t2^-1 t3 t1",
          4: "t^-1 t6 t5^-1 t3", 5: "t t6^-1 t5^-1 t3", 6: "t^-1 t5^-1 t2^-1 t1"}
    for i, rhs in bb.items():
        rels.append(("3", f"[b,b{i}] = {rhs}", f"[b,b{i}] " + _inverse_text(rhs)))
    rels.append(("4", "b0 b1 = t1 t2^-1 b3", "b0 b1 b3^-1 t2 t1^-1"))
    bt = {0: "t^-2", 1: "", 2: "t2^-2", 3: "", 4: "", 5: "t5^-2", 6: "t6^-2"}
    for i, rhs in bt.items():
        name = "t" if i == 0 else f"t{i}"
        rels.append(("5", f"[b,{name}] = {rhs or '1'}", f"[b,{name}] " + _inverse_text(rhs)))
    for i in range(7):
        for j in range(i + 1, 7):
            rels.append(("6", f"[t{i},t{j}] = 1", f"[t{i},t{j}]"))
    return tuple(rels)


def _inverse_text(text: str) -> str:
    return W.format_word(W.inverse_word(W.parse_word(text))) if text else ""


def load_crystal(path: Optional[str] = None) -> CrystalData:
    """Load generators and relations from JSON; defaults to the built-in data."""
    if path is None:
        raw = json.loads(resources.files("g2kummer").joinpath("data/crystal.json").read_text())
    else:
        with open(path) as fh:
            raw = json.load(fh)
    gens = {k: IsometryElement.make(v["rotation"], v["translation"]) for k, v in raw["generators"].items()}
    rels = []
    for i, r in enumerate(raw.get("relations", [])):
        if isinstance(r, str):
            rels.append(("?", f"relation {i}", r))
        else:
            rels.append((str(r.get("family", "?")), r.get("label", r["relator"]), r["relator"]))
    return CrystalData(gens, tuple(rels))


def crystal_json() -> dict:
    gens = default_generators()
    return {"generators": {k: g.to_json() for k, g in gens.items()},
            "relations": [{"family": f, "label": l, "relator": r} for f, l, r in default_relations()]}


GENS = default_generators()


def eval_word(w, gens: Optional[dict] = None) -> IsometryElement:
    """Evaluate a word (tuple or string) under a->alpha, b->beta, t->tau_1."""
    if isinstance(w, str):
        w = W.parse_word(w)
    gens = GENS if gens is None else gens
    return W.evaluate(w, gens, compose, IsometryElement.inverse, IsometryElement.identity())


@dataclass(frozen=True)
class RelationResult:
    family: str
    label: str
    relator: str
    passed: bool
    residual_translation: Optional[Vector] = None


def verify_presentation(relations=None, gens=None) -> list[RelationResult]:
    rels = default_relations() if relations is None else relations
    out = []
    ident = IsometryElement.identity()
    for fam, label, rel in rels:
        g = eval_word(rel, gens)
        out.append(RelationResult(fam, label, rel, g == ident,
                                  None if g == ident else g.translation))
    return out


# ---------------------------------------------------------------- quotient

@lru_cache(maxsize=4)
def _quotient_cached(key) -> tuple[IsometryElement, ...]:
    gens = dict(key)
    ident = IsometryElement.identity()
    seen = {ident: None}
    order = [ident]
    queue = deque([ident])
    steps = list(gens.values()) + [g.inverse() for g in gens.values()]
    while queue:
        g = queue.popleft()
        for s in steps:
            h = compose(g, s).reduced()
            if h not in seen:
                seen[h] = None
                order.append(h)
                queue.append(h)
                if len(order) > 10_000:
                    raise RuntimeError("quotient enumeration exceeded 10^4 states; wrong generator set?")
    return tuple(sorted(order, key=_class_key))


def _class_key(g: IsometryElement):
    return (tuple(x for r in g.rotation for x in r), g.translation)


def quotient_enumerate(gens: Optional[dict] = None) -> list[IsometryElement]:
    """Coset representatives of Gamma / Z^7 with translations in [0,1)^7."""
    gens = GENS if gens is None else gens
    return list(_quotient_cached(tuple(sorted(gens.items()))))


# ---------------------------------------------------------------- normal form

@dataclass(frozen=True)
class NormalForm:
    i_t: tuple[int, ...]
    i_b: tuple[int, int, int]
    i_a: int

    def word(self) -> W.Word:
        parts: list = []
        for k, e in enumerate(self.i_t):
            if e:
                parts.append(W.power(W.parse_word(f"t{k}"), e))
        for k, e in enumerate(self.i_b):
            if e:
                parts.append(W.parse_word(f"b{k}"))
        if self.i_a:
            parts.append((("a", self.i_a),))
        return W.concat(*parts)


@lru_cache(maxsize=1)
def _normal_form_tables():
    table = {}
    for bits in range(8):
        ib = ((bits >> 0) & 1, (bits >> 1) & 1, (bits >> 2) & 1)
        for ia in range(7):
            g = eval_word(NormalForm((0,) * 7, ib, ia).word())
            if g.rotation in table:
                raise RuntimeError("two normal-form cosets share a rotation part")
            table[g.rotation] = (ib, ia, g)
    # t_k = a^k t a^-k is translation by a signed unit vector
    tvec = {}
    for k in range(7):
        v = eval_word(f"t{k}").translation
        j = next(i for i, x in enumerate(v) if x != 0)
        tvec[j] = (k, int(v[j]))
    return table, tvec


def normal_form(g: IsometryElement) -> NormalForm:
    """Unique (i_t, i_b, i_a) with g = t0^.. t6^.. b0^.. b1^.. b2^.. a^i_a."""
    table, tvec = _normal_form_tables()
    if g.rotation not in table:
        raise ValueError("not in Gamma: rotation part not in the point group")
    ib, ia, rep = table[g.rotation]
    lat = compose(g, rep.inverse())
    if not lat.is_translation() or any(x.denominator != 1 for x in lat.translation):
        raise ValueError("not in Gamma: residual translation is not integral")
    it = [0] * 7
    for j, x in enumerate(lat.translation):
        k, sign = tvec[j]
        it[k] = int(x) * sign
    return NormalForm(tuple(it), ib, ia)


# ---------------------------------------------------------------- fixed loci

@dataclass(frozen=True)
class AffineSubspace:
    point: Vector
    basis: tuple[Vector, ...]

    @property
    def dim(self) -> int:
        return len(self.basis)


def _solve_rational(A: Matrix, b: Vector) -> Optional[AffineSubspace]:
    """All solutions of A x = b over Q via reduced row echelon form."""
    n = len(A[0])
    M = [list(r) + [bb] for r, bb in zip(A, b)]
    pivots = []
    row = 0
    for c in range(n):
        p = next((r for r in range(row, len(M)) if M[r][c] != 0), None)
        if p is None:
            continue
        M[row], M[p] = M[p], M[row]
        pv = M[row][c]
        M[row] = [x / pv for x in M[row]]
        for r in range(len(M)):
            if r != row and M[r][c] != 0:
                f = M[r][c]
                M[r] = [x - f * y for x, y in zip(M[r], M[row])]
        pivots.append(c)
        row += 1
    for r in range(row, len(M)):
        if M[r][n] != 0:
            return None
    x = [Fraction(0)] * n
    for r, c in enumerate(pivots):
        x[c] = M[r][n]
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, c in enumerate(pivots):
            v[c] = -M[r][f]
        basis.append(tuple(v))
    return AffineSubspace(tuple(x), tuple(basis))


def fixed_locus(g: IsometryElement) -> Optional[AffineSubspace]:
    """Fixed points of g: solve (R - I) x = -v exactly; None when empty."""
    n = len(g.rotation)
    A = tuple(tuple(g.rotation[i][j] - (1 if i == j else 0) for j in range(n)) for i in range(n))
    return _solve_rational(A, tuple(-x for x in g.translation))


def _cycles(R: Matrix):
    """Cycle decomposition of a signed permutation matrix: lists of (row, src, sign)."""
    n = len(R)
    src = {}
    for i in range(n):
        nz = [(j, R[i][j]) for j in range(n) if R[i][j] != 0]
        if len(nz) != 1 or abs(nz[0][1]) != 1:
            raise NotImplementedError("stratum enumeration needs monomial rotation parts")
        src[i] = nz[0]
    seen, cycles = set(), []
    for i in range(n):
        if i in seen:
            continue
        cyc, j = [], i
        while j not in seen:
            seen.add(j)
            s, sign = src[j]
            cyc.append((j, s, int(sign)))
            j = s
        cycles.append(cyc)
    return cycles


def fixed_point_shifts(g: IsometryElement) -> list[Vector]:
    """Integer shifts n (one per lattice-conjugacy class) such that (R, v+n) has fixed points.

    For a signed permutation the system x = R x + v + n splits over cycles.  A
    cycle with sign product +1 is solvable iff the signed sum of v+n over it
    vanishes; a cycle with sign product -1 always is, and the two residues of
    n modulo (I - R) Z^7 on it give non-conjugate solutions.
    """
    n = len(g.rotation)
    base = [Fraction(0)] * n
    options = [[]]
    for cyc in _cycles(g.rotation):
        # coefficient c_j with sum_j c_j (x_j - s_j x_src) telescoping to zero
        coef = {}
        c = Fraction(1)
        j0 = cyc[0][0]
        for row, s, sign in cyc:
            coef[row] = c
            c = c * sign
        total_sign = c
        if total_sign == 1:
            ssum = sum(coef[r] * g.translation[r] for r, _, _ in cyc)
            if ssum.denominator != 1:
                return []
            base[j0] -= ssum * coef[j0]
            options = [o + [] for o in options]
        else:
            options = [o + [(j0, e)] for o in options for e in (0, 1)]
    shifts = []
    for o in options:
        nn = list(base)
        for j, e in o:
            nn[j] += e
        shifts.append(tuple(nn))
    return shifts


@dataclass(frozen=True)
class Stratum:
    axis_direction: tuple[float, ...]
    base_point: Vector
    integer_direction: Vector
    isotropy_order: int
    rotation_angles: tuple[Fraction, ...]
    lattice_step: float
    step_translation: Vector


def _line_equivalent(p1, d1, p2, d2, reps) -> bool:
    """Is the line p2 + R d2 in the Gamma-orbit of the line p1 + R d1?"""
    for g in reps:
        img_d = _matvec(g.rotation, d1)
        if img_d != d2 and img_d != tuple(-x for x in d2):
            continue
        w = tuple(a - b for a, b in zip(g.apply(p1), p2))
        if _on_line_mod_lattice(w, d2):
            return True
    return False


def _on_line_mod_lattice(w: Vector, d: Vector) -> bool:
    """Exists real s with w - s d in Z^n (d a primitive integer vector)."""
    j = next(i for i, x in enumerate(d) if x != 0)
    for k in range(abs(int(d[j]))):
        s = (_frac_part(w[j]) + k) / d[j]
        if all((a - s * b).denominator == 1 for a, b in zip(w, d)):
            return True
    return False


def _primitive(v: Sequence[Fraction]) -> Vector:
    den = math.lcm(*[x.denominator for x in v])
    ints = [int(x * den) for x in v]
    g = math.gcd(*ints)
    ints = [x // g for x in ints]
    j = next(i for i, x in enumerate(ints) if x != 0)
    if ints[j] < 0:
        ints = [-x for x in ints]
    return tuple(Fraction(x) for x in ints)


def singular_strata(gens: Optional[dict] = None) -> list[Stratum]:
    """Connected strata of the image of all nontrivial fixed loci in R^7 / Gamma."""
    reps = quotient_enumerate(gens)
    ident = IsometryElement.identity()
    lines = []
    for g in reps:
        if g.rotation == ident.rotation:
            continue
        for n in fixed_point_shifts(g):
            h = IsometryElement(g.rotation, tuple(a + b for a, b in zip(g.translation, n)))
            loc = fixed_locus(h)
            if loc is None:
                raise RuntimeError("cycle criterion and exact solve disagree")
            if loc.dim != 1:
                raise NotImplementedError(f"fixed locus of dimension {loc.dim} found")
            lines.append((loc.point, _primitive(loc.basis[0])))
    # prefer representatives through the origin, then along the alpha axis
    axis_int = _primitive([Fraction(round(x * math.sqrt(7))) for x in AXIS])
    lines.sort(key=lambda pd: (any(pd[0]), pd[1] != axis_int, pd[1], pd[0]))
    classes: list[tuple[Vector, Vector]] = []
    for p, d in lines:
        if not any(_line_equivalent(p, d, q, e, reps) for q, e in classes):
            classes.append((p, d))
    return [_describe_stratum(p, d, reps) for p, d in classes]


def _describe_stratum(p: Vector, d: Vector, reps) -> Stratum:
    iso = []
    shifts = []
    j = next(i for i, x in enumerate(d) if x != 0)
    for g in reps:
        if _matvec(g.rotation, d) != d:
            continue
        w = tuple(a - b for a, b in zip(g.apply(p), p))
        # g + n maps p to p + s d; valid s form a coset s0 + Z since d is primitive
        for k in range(abs(int(d[j]))):
            s = (w[j] + k) / d[j]
            if all((s * b - a).denominator == 1 for a, b in zip(w, d)):
                s0 = _frac_part(s)
                nvec = tuple(s0 * b - a for a, b in zip(w, d))
                elem = IsometryElement(g.rotation, tuple(a + b for a, b in zip(g.translation, nvec)))
                if s0 == 0:
                    iso.append(elem)
                    elem = compose(IsometryElement.translation_by(d), elem)
                    s0 = Fraction(1)
                shifts.append((s0, elem))
                break
    step, step_elem = min(shifts, key=lambda x: (x[0], not x[1].is_translation(), _class_key(x[1])))
    norm_d = math.sqrt(sum(float(x) ** 2 for x in d))
    angles = _transverse_angles(iso, d)
    return Stratum(tuple(float(x) / norm_d for x in d), p, d, len(iso), angles,
                   float(step) * norm_d, step_elem.translation)


def _transverse_angles(iso, d) -> tuple[Fraction, ...]:
    """Rotation angles (units of 2 pi) of the isotropy generator on the three transverse planes.

    Among the generators, the one whose angle triple is lexicographically
    smallest is reported.
    """
    order = len(iso)
    axis = np.array([float(x) for x in d])
    axis /= np.linalg.norm(axis)
    if np.allclose(np.abs(axis @ AXIS), 1.0):
        B = adapted_basis()
    else:
        B = np.linalg.qr(np.column_stack([axis, np.eye(len(d))]))[0][:, :len(d)]
    best = None
    for g in iso:
        M = B.T @ g.rotation_array() @ B
        cand = []
        for k in range(1, len(d), 2):
            a = math.atan2(M[k + 1, k], M[k, k]) / (2 * math.pi)
            cand.append(Fraction(round(a * order), order) % 1)
        cand = tuple(cand)
        if any(c == 0 for c in cand):
            continue
        if best is None or cand < best:
            best = cand
    return best if best is not None else ()


def lattice_step_word() -> str:
    return "t1 t2 t3 t4^-1 t5 t6 t7 (translation (1,1,1,-1,1,1,1))"


# ---------------------------------------------------------------- adapted frame

AXIS = np.array([1, 1, 1, -1, 1, 1, 1], dtype=float) / math.sqrt(7)
WEIGHTS = (1, 2, 4)


def adapted_basis() -> np.ndarray:
    """Orthonormal frame (columns b1..b7) adapted to the singular axis.

    b1 spans the fixed line of alpha.  The pairs (b2,b3), (b4,b5), (b6,b7)
    come from the eigenvectors of alpha's rotation part for e^{2 pi i k/7},
    k = 1, 2, 4, with the sign of the second vector in each pair chosen so the
    frame is positively oriented.  In complex coordinates z_k = x_k + i y_k
    alpha acts by e^{-2 pi i k/7}, so alpha^-1 is the weight-(1,2,4)
    generator.  The overall phase of dz1 dz2 dz3 is fixed by requiring the
    model 3-form to be invariant under beta's rotation part.
    """
    return _adapted_basis().copy()


@lru_cache(maxsize=1)
def _adapted_basis() -> np.ndarray:
    Ra = GENS["a"].rotation_array()
    ev, V = np.linalg.eig(Ra)
    cols = [AXIS]
    for k in WEIGHTS:
        lam = np.exp(2j * np.pi * k / 7)
        j = int(np.argmin(np.abs(ev - lam)))
        if abs(ev[j] - lam) > 1e-10:
            raise RuntimeError("eigenvalue-angle mismatch in adapted basis")
        v = V[:, j] / np.linalg.norm(V[:, j])
        cols += [math.sqrt(2) * v.real, math.sqrt(2) * v.imag]
    B = np.array(cols).T
    B = _orthonormalize(B)
    chi = _omega_phase(B)
    c3 = (B[:, 5] - 1j * B[:, 6]) * np.exp(-1j * chi)
    B[:, 5], B[:, 6] = c3.real, -c3.imag
    return B


def _orthonormalize(B: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(B)
    return Q * np.sign(np.diag(R))


def _omega_phase(B: np.ndarray) -> float:
    from .forms import model_phi_parts, pullback
    Rb = GENS["b"].rotation_array()
    S, ReO, ImO = (pullback(f, B.T) for f in model_phi_parts())
    # phi_chi = S + cos(chi) ImO + sin(chi) ReO must be invariant under Rb
    cols = [pullback(f, Rb).coeffs - f.coeffs for f in (S, ImO, ReO)]
    A = np.stack([c.ravel() for c in cols[1:]], axis=1)
    rhs = -cols[0].ravel()
    (c, s), *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return float(np.arctan2(s, c))


def rotation_in_adapted_frame(g: IsometryElement) -> np.ndarray:
    B = adapted_basis()
    return B.T @ g.rotation_array() @ B
