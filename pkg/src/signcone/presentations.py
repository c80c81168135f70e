"""Rational-series presentations and the ``.rsp`` text format.

A presentation describes a group built as an iterated extension

    G_0 = {1}  <  <x_1>  <  <x_1, x_2>  <  ...  <  <x_1, ..., x_m> = G

where each subgroup ``G_i = <x_1, ..., x_i>`` is normal in the next one.
The extension data consists of the conjugates ``x_j x_i x_j^-1`` and
``x_j^-1 x_i x_j`` for i < j, each given as a word over the generators
``x_1 .. x_{j-1}``.  Pairs without an explicit relation commute.

File format (UTF-8, line oriented, ``#`` starts a comment)::

    name klein
    gens 2
    conj    2 1 -> 1^-1
    conjinv 2 1 -> 1^-1

Word syntax: space-separated ``k^e`` tokens (generator index, nonzero
integer exponent); a bare ``k`` means ``k^1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

# A word is a tuple of (generator index, nonzero exponent) letters.
Letter = tuple[int, int]
Word = tuple[Letter, ...]


class RspSyntaxError(ValueError):
    """Raised on malformed ``.rsp`` input, with line/column position."""

    def __init__(self, message: str, line: int, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True, eq=False)
class RSPresentation:
    """A group presented by a rational series with infinite-cyclic factors.

    ``conj_pos[(j, i)]`` is the word equal to ``x_j x_i x_j^-1`` and
    ``conj_neg[(j, i)]`` the word equal to ``x_j^-1 x_i x_j``, both over
    generators of index < j.  Missing pairs commute.  Instances are
    immutable and hashed by identity, so they are safe to share across
    workers and usable as cache keys.
    """

    m: int
    name: str = "unnamed"
    conj_pos: tuple[tuple[int, int, Word], ...] = ()
    conj_neg: tuple[tuple[int, int, Word], ...] = ()
    _pos: dict = field(default_factory=dict, repr=False, compare=False)
    _neg: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("generator count must be positive")
        for table, store in ((self.conj_pos, self._pos), (self.conj_neg, self._neg)):
            for j, i, word in table:
                _check_relation_indices(self.m, j, i, word)
                store[(j, i)] = word

    def pos_word(self, j: int, i: int) -> Word:
        """Word for ``x_j x_i x_j^-1`` (defaults to ``x_i`` when commuting)."""
        return self._pos.get((j, i), ((i, 1),))

    def neg_word(self, j: int, i: int) -> Word:
        """Word for ``x_j^-1 x_i x_j`` (defaults to ``x_i`` when commuting)."""
        return self._neg.get((j, i), ((i, 1),))

    @property
    def identity(self) -> tuple[int, ...]:
        return (0,) * self.m

    def generator(self, i: int) -> tuple[int, ...]:
        """Exponent vector of ``x_i``."""
        if not 1 <= i <= self.m:
            raise ValueError(f"generator index {i} out of range 1..{self.m}")
        return tuple(1 if k == i else 0 for k in range(1, self.m + 1))

    @property
    def generators(self) -> list[tuple[int, ...]]:
        return [self.generator(i) for i in range(1, self.m + 1)]

    def truncate(self, k: int) -> "RSPresentation":
        """The presentation of the subgroup ``<x_1, ..., x_k>``."""
        if not 1 <= k <= self.m:
            raise ValueError(f"level {k} out of range 1..{self.m}")
        keep_pos = tuple((j, i, w) for j, i, w in self.conj_pos if j <= k)
        keep_neg = tuple((j, i, w) for j, i, w in self.conj_neg if j <= k)
        return RSPresentation(m=k, name=f"{self.name}|{k}",
                              conj_pos=keep_pos, conj_neg=keep_neg)

    def __repr__(self):
        return f"RSPresentation({self.name!r}, m={self.m})"


def _check_relation_indices(m: int, j: int, i: int, word: Word) -> None:
    if not (1 <= i < j <= m):
        raise ValueError(
            f"relation ({j},{i}) out of subnormal range: need 1 <= i < j <= {m}")
    for g, e in word:
        if not 1 <= g < j:
            raise ValueError(
                f"relation ({j},{i}) uses generator {g}, outside 1..{j - 1}")
        if e == 0:
            raise ValueError(f"relation ({j},{i}) has a zero exponent")


def parse_word(text: str, line: int = 1, column: int = 1) -> Word:
    """Parse space-separated ``k^e`` tokens into a word."""
    letters = []
    for token in text.split():
        if "^" in token:
            gen_s, _, exp_s = token.partition("^")
        else:
            gen_s, exp_s = token, "1"
        try:
            gen, exp = int(gen_s), int(exp_s)
        except ValueError:
            raise RspSyntaxError(f"bad word token {token!r}", line, column) from None
        if gen < 1:
            raise RspSyntaxError(f"generator index must be >= 1 in {token!r}", line, column)
        if exp == 0:
            raise RspSyntaxError(f"zero exponent in {token!r}", line, column)
        letters.append((gen, exp))
    return tuple(letters)


def parse_presentation(text: str, name: str | None = None) -> RSPresentation:
    """Parse ``.rsp`` text into a presentation.

    Raises :class:`RspSyntaxError` on syntax problems, duplicate relations
    or relations that violate subnormality (index out of range).
    """
    m = None
    declared_name = None
    pos: dict[tuple[int, int], Word] = {}
    neg: dict[tuple[int, int], Word] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split(None, 1)
        keyword = fields[0]
        rest = fields[1] if len(fields) > 1 else ""

        if keyword == "name":
            if not rest:
                raise RspSyntaxError("missing name", lineno)
            declared_name = rest.strip()
        elif keyword == "gens":
            try:
                m = int(rest)
            except ValueError:
                raise RspSyntaxError(f"bad generator count {rest!r}", lineno) from None
            if m < 1:
                raise RspSyntaxError("generator count must be positive", lineno)
        elif keyword in ("conj", "conjinv"):
            if m is None:
                raise RspSyntaxError(f"{keyword} before gens", lineno)
            head, arrow, word_text = rest.partition("->")
            if not arrow:
                raise RspSyntaxError(f"{keyword} line missing '->'", lineno)
            parts = head.split()
            if len(parts) != 2:
                raise RspSyntaxError(f"{keyword} needs two indices before '->'", lineno)
            try:
                j, i = int(parts[0]), int(parts[1])
            except ValueError:
                raise RspSyntaxError(f"bad indices {head.strip()!r}", lineno) from None
            word = parse_word(word_text, lineno)
            if not word:
                raise RspSyntaxError("empty relation word", lineno)
            try:
                _check_relation_indices(m, j, i, word)
            except ValueError as exc:
                raise RspSyntaxError(str(exc), lineno) from None
            table = pos if keyword == "conj" else neg
            if (j, i) in table:
                raise RspSyntaxError(f"duplicate {keyword} relation for ({j},{i})", lineno)
            table[(j, i)] = word
        else:
            raise RspSyntaxError(f"unknown keyword {keyword!r}", lineno)

    if m is None:
        raise RspSyntaxError("missing 'gens' line", 1)
    final_name = name or declared_name or "unnamed"
    return RSPresentation(
        m=m, name=final_name,
        conj_pos=tuple((j, i, w) for (j, i), w in sorted(pos.items())),
        conj_neg=tuple((j, i, w) for (j, i), w in sorted(neg.items())),
    )


BUNDLED = ("z", "z2", "klein", "heis", "t2", "t3", "t4")


def load_presentation(spec: str) -> RSPresentation:
    """Load a presentation from a file path or a bundled corpus name.

    ``spec`` may be a filesystem path, or one of the bundled names
    (``z``, ``z2``, ``klein``, ``heis``, ``t2``, ``t3``, ``t4``, with an
    optional ``.rsp`` suffix).
    """
    path = Path(spec)
    if path.exists():
        return parse_presentation(path.read_text(encoding="utf-8"))
    stem = spec[:-4] if spec.endswith(".rsp") else spec
    if stem in BUNDLED:
        data = resources.files("signcone.data").joinpath(f"{stem}.rsp")
        return parse_presentation(data.read_text(encoding="utf-8"))
    raise FileNotFoundError(f"no such presentation file or bundled name: {spec}")
