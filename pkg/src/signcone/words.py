"""Exact group arithmetic: collection to normal form, products, balls.

Every element of a presented group has a unique normal form
``x_1^{e_1} x_2^{e_2} ... x_m^{e_m}``, stored as the tuple
``(e_1, ..., e_m)`` of (unbounded) integers.  Arbitrary words are
brought to this form by *collection*: scanning a word left to right and
moving each highest-index generator to the right, conjugating what it
passes over.  Conjugation words may grow, so every operation counts
rewriting steps against a budget and fails loudly instead of spinning
on an inconsistent presentation.

Membership in the series subgroup ``G_l = <x_1, ..., x_l>`` is the
statement ``e_k = 0 for all k > l`` of the normal form, which makes all
coset tests exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import product as iproduct

from .presentations import RSPresentation, Word

Vector = tuple[int, ...]

DEFAULT_STEP_BUDGET = 10**6
_step_budget = DEFAULT_STEP_BUDGET


class StepBudgetExceeded(RuntimeError):
    """Collection exceeded its step budget (presentation likely inconsistent)."""


def set_step_budget(budget: int) -> None:
    """Set the global per-operation collection budget."""
    global _step_budget
    if budget < 1:
        raise ValueError("budget must be positive")
    _step_budget = budget


def get_step_budget() -> int:
    return _step_budget


def _invert_word(word: Word) -> Word:
    return tuple((g, -e) for g, e in reversed(word))


def _word_power(word: Word, e: int) -> Word:
    if e == 0:
        return ()
    if e > 0:
        return word * e
    return _invert_word(word) * (-e)


Letter = tuple[int, int]


class _Budget:
    __slots__ = ("left",)

    def __init__(self, steps: int):
        self.left = steps

    def spend(self, amount: int) -> None:
        self.left -= amount
        if self.left < 0:
            raise StepBudgetExceeded(
                "collection step budget exceeded; the presentation may be "
                "inconsistent or non-terminating")


def _conjugate_word(word: list, j: int, power: int,
                    p: RSPresentation, budget: _Budget) -> list:
    """Image of ``word`` (over indices < j) under conjugation by ``x_j^power``."""
    step = 1 if power > 0 else -1
    for _ in range(abs(power)):
        out: list = []
        for g, e in word:
            rel = p.pos_word(j, g) if step > 0 else p.neg_word(j, g)
            piece = _word_power(rel, e)
            budget.spend(len(piece) or 1)
            out.extend(piece)
        word = out
    return word


def _collect(letters: list, p: RSPresentation, budget: _Budget) -> Vector:
    """Peel off the highest generator index, conjugating what it passes."""
    exponents = [0] * p.m
    while letters:
        budget.spend(len(letters))
        top = max(g for g, _ in letters)
        remainder: list = []
        carried = 0  # x_top exponent accumulated to the left of the cursor
        for g, e in letters:
            if g == top:
                carried += e
            elif carried == 0:
                remainder.append((g, e))
            else:
                remainder.extend(_conjugate_word([(g, e)], top, carried, p, budget))
        exponents[top - 1] += carried
        letters = remainder
    return tuple(exponents)


def collect(word: Word | list, p: RSPresentation) -> Vector:
    """Normal form of a word, as an exponent vector.

    The exponent vector is the unique ``(e_1, ..., e_m)`` with
    ``word = x_1^{e_1} ... x_m^{e_m}``.  Raises :class:`StepBudgetExceeded`
    if rewriting does not finish within the step budget.
    """
    letters = []
    for g, e in word:
        if not 1 <= g <= p.m:
            raise ValueError(f"generator index {g} out of range 1..{p.m}")
        if e != 0:
            letters.append((int(g), int(e)))
    return _collect(letters, p, _Budget(_step_budget))


def word_of(v: Vector) -> Word:
    """The normal-form word of an exponent vector."""
    return tuple((i + 1, e) for i, e in enumerate(v) if e != 0)


@lru_cache(maxsize=None)
def multiply(a: Vector, b: Vector, p: RSPresentation) -> Vector:
    """Group product of two normal forms, again in normal form."""
    return _collect(list(word_of(a)) + list(word_of(b)), p, _Budget(_step_budget))


@lru_cache(maxsize=None)
def invert(a: Vector, p: RSPresentation) -> Vector:
    """Group inverse of a normal form."""
    return _collect(list(_invert_word(word_of(a))), p, _Budget(_step_budget))


def conjugate(g: Vector, by: Vector, p: RSPresentation) -> Vector:
    """``by * g * by^-1``."""
    return multiply(multiply(by, g, p), invert(by, p), p)


def commutator(a: Vector, b: Vector, p: RSPresentation) -> Vector:
    """``a^-1 b^-1 a b``."""
    return multiply(multiply(invert(a, p), invert(b, p), p), multiply(a, b, p), p)


def power(a: Vector, n: int, p: RSPresentation) -> Vector:
    """``a^n`` by repeated multiplication (n may be negative)."""
    if n < 0:
        return power(invert(a, p), -n, p)
    acc = p.identity
    for _ in range(n):
        acc = multiply(acc, a, p)
    return acc


def level_membership(a: Vector, l: int) -> bool:
    """Whether the element lies in ``G_l = <x_1, ..., x_l>``."""
    if not 0 <= l <= len(a):
        raise ValueError(f"level {l} out of range 0..{len(a)}")
    return all(e == 0 for e in a[l:])


def top_index(a: Vector) -> int:
    """Largest k with ``e_k != 0``, or 0 for the identity."""
    for k in range(len(a), 0, -1):
        if a[k - 1] != 0:
            return k
    return 0


@dataclass(frozen=True, eq=False)
class Ball:
    """All products of at most ``radius`` generators or inverse generators.

    ``elements`` is sorted lexicographically, so iteration order (and
    everything derived from it) is reproducible.
    """

    presentation: RSPresentation
    radius: int
    elements: tuple[Vector, ...]

    def __contains__(self, v: Vector) -> bool:
        return v in self._index

    def __iter__(self):
        return iter(self.elements)

    def __len__(self):
        return len(self.elements)

    @property
    def _index(self):
        cache = self.__dict__.get("_index_cache")
        if cache is None:
            cache = frozenset(self.elements)
            self.__dict__["_index_cache"] = cache
        return cache

    def level_slice(self, l: int) -> tuple[Vector, ...]:
        """Ball elements lying in ``G_l``."""
        return tuple(v for v in self.elements if level_membership(v, l))


@lru_cache(maxsize=None)
def ball(p: RSPresentation, r: int) -> Ball:
    """Breadth-first closure under right multiplication by ``x_i^{+-1}``."""
    if r < 0:
        raise ValueError("radius must be nonnegative")
    steps = [p.generator(i) for i in range(1, p.m + 1)]
    steps += [invert(g, p) for g in steps]
    seen = {p.identity}
    frontier = [p.identity]
    for _ in range(r):
        new = []
        for v in frontier:
            for s in steps:
                w = multiply(v, s, p)
                if w not in seen:
                    seen.add(w)
                    new.append(w)
        frontier = sorted(new)
    return Ball(presentation=p, radius=r, elements=tuple(sorted(seen)))


@dataclass(frozen=True)
class ConsistencyReport:
    """Outcome of the ball-scale consistency audit; empty failures = pass."""

    presentation_name: str
    radius: int
    checks: int
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def consistency_audit(p: RSPresentation, r: int) -> ConsistencyReport:
    """Audit the presentation's rewriting data on a radius-``r`` ball.

    Checks, exactly and exhaustively on the ball:

    * both sides of every stored relation collect to the same vector;
    * conjugation by ``x_j`` and by ``x_j^-1`` are mutually inverse on
      every generator and on every ball element;
    * ``g * g^-1`` collects to the identity for every ball element.

    Failures are reported as data, not raised.
    """
    if r < 1:
        raise ValueError("radius must be >= 1")
    failures: list[str] = []
    checks = 0
    gens = {i: p.generator(i) for i in range(1, p.m + 1)}

    for j in range(2, p.m + 1):
        for i in range(1, j):
            checks += 2
            lhs = collect(((j, 1), (i, 1), (j, -1)), p)
            if lhs != collect(p.pos_word(j, i), p):
                failures.append(f"conj ({j},{i}): sides collect differently")
            lhs = collect(((j, -1), (i, 1), (j, 1)), p)
            if lhs != collect(p.neg_word(j, i), p):
                failures.append(f"conjinv ({j},{i}): sides collect differently")
            checks += 2
            conj_i = collect(p.pos_word(j, i), p)  # x_j x_i x_j^-1 as element
            back = multiply(multiply(invert(gens[j], p), conj_i, p), gens[j], p)
            if back != gens[i]:
                failures.append(f"({j},{i}): conj then conjinv != identity at g=x_{i}")
            conj_i = collect(p.neg_word(j, i), p)
            back = multiply(multiply(gens[j], conj_i, p), invert(gens[j], p), p)
            if back != gens[i]:
                failures.append(f"({j},{i}): conjinv then conj != identity at g=x_{i}")

    B = ball(p, r)
    for g in B:
        checks += 1
        if multiply(g, invert(g, p), p) != p.identity:
            failures.append(f"g * g^-1 != identity at g={g}")
        for j in range(1, p.m + 1):
            checks += 1
            once = conjugate(g, gens[j], p)
            back = conjugate(once, invert(gens[j], p), p)
            if back != g:
                failures.append(f"conjugation by x_{j} not invertible at g={g}")
    return ConsistencyReport(p.name, r, checks, tuple(failures))
