"""Words in the generators a, b, t and a small parser for relation strings.

Derived symbols are expanded on parsing: ``t3`` means a^3 t a^-3 and
``b2`` means a^2 b a^-2.  A bracket ``[x,y]`` is the commutator x y x^-1 y^-1.
"""
from __future__ import annotations

import re
from typing import Callable, Sequence, TypeVar

Word = tuple[tuple[str, int], ...]
GENERATORS = ("a", "b", "t")

T = TypeVar("T")


def normalize(letters: Sequence[tuple[str, int]]) -> Word:
    """Merge equal neighbours and drop zero exponents (free reduction)."""
    out: list[tuple[str, int]] = []
    for sym, e in letters:
        if e == 0:
            continue
        if out and out[-1][0] == sym:
            e2 = out[-1][1] + e
            out.pop()
            if e2 != 0:
                out.append((sym, e2))
        else:
            out.append((sym, e))
    return tuple(out)


def inverse_word(w: Word) -> Word:
    return tuple((s, -e) for s, e in reversed(w))


def power(w: Word, n: int) -> Word:
    if n < 0:
        return power(inverse_word(w), -n)
    return normalize(list(w) * n)


def concat(*ws: Word) -> Word:
    return normalize([x for w in ws for x in w])


def conjugate_by_a(w: Word, i: int) -> Word:
    return concat(((("a", i),) if i else ()), w, ((("a", -i),) if i else ()))


def commutator(x: Word, y: Word) -> Word:
    return concat(x, y, inverse_word(x), inverse_word(y))


_ATOM = re.compile(r"^([abt])(\d*)$")


def _atom(tok: str) -> Word:
    m = _ATOM.match(tok)
    if not m:
        raise ValueError(f"unknown symbol {tok!r}")
    sym, idx = m.group(1), m.group(2)
    if sym == "a" or idx == "":
        return ((sym, 1),)
    return conjugate_by_a(((sym, 1),), int(idx))


def _split_power(tok: str) -> tuple[str, int]:
    if "^" in tok:
        base, e = tok.rsplit("^", 1)
        return base, int(e)
    return tok, 1


def parse_word(text: str) -> Word:
    """Parse e.g. ``"b^2 t1^-1 t3^-1"`` or ``"[b,b1] t2"``; empty means identity."""
    text = text.strip()
    if text in ("", "1", "e"):
        return ()
    # keep brackets together while splitting on whitespace
    tokens = re.findall(r"\[[^\]]*\](?:\^-?\d+)?|[^\s\[\]]+", text)
    out: Word = ()
    for tok in tokens:
        base, e = _split_power(tok)
        if base.startswith("["):
            x, y = base[1:-1].split(",")
            piece = commutator(parse_word(x), parse_word(y))
        else:
            piece = _atom(base)
        out = concat(out, power(piece, e))
    return out


def format_word(w: Word) -> str:
    if not w:
        return "1"
    return " ".join(s if e == 1 else f"{s}^{e}" for s, e in w)


def evaluate(w: Word, images: dict[str, T], mul: Callable[[T, T], T],
             inv: Callable[[T], T], one: T) -> T:
    """Evaluate a word in any group given generator images and operations."""
    cache: dict[tuple[str, int], T] = {}
    acc = one
    for sym, e in w:
        key = (sym, e)
        if key not in cache:
            g = images[sym] if e > 0 else inv(images[sym])
            p = g
            for _ in range(abs(e) - 1):
                p = mul(p, g)
            cache[key] = p
        acc = mul(acc, cache[key])
    return acc
