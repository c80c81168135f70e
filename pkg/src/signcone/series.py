"""Structural audits of the stored series: normality, jumps, certificates.

The stored chain ``G_0 = {1} < G_1 < ... < G_m = G`` is subnormal by
construction of the presentation format; :func:`subnormality_audit`
re-verifies this numerically on a ball.  The gate for every finite
counting statement is the absence of *abelian jumps*: indices ``i`` with
``G_i`` normal in ``G_{i+2}`` and ``G_{i+2}/G_i`` abelian.  When a jump
exists, the family of conradian left-preorders relative to levels at or
below ``i`` is infinite (it contains no isolated points), so a finite
enumeration would be incomplete and is refused.

Normality and abelianness of quotients are decided exactly on
generators via collection; the ball radius only bounds the search for
witness pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .presentations import RSPresentation
from .words import (Vector, ball, commutator, conjugate, invert,
                    level_membership, multiply)

TORSION_PROBE_LIMIT = 16


@dataclass(frozen=True)
class LevelNormalityReport:
    level: int
    checked: int
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def subnormality_audit(p: RSPresentation, r: int) -> list[LevelNormalityReport]:
    """Verify ``x_{i+1}^{+-1} g x_{i+1}^{-+1} in G_i`` for ball members of ``G_i``.

    The presentation format forces this for generators; the audit checks
    it on every ``G_i``-member of the radius-``r`` ball, which exercises
    the collection machinery rather than the file syntax.
    """
    if r < 1:
        raise ValueError("radius must be >= 1")
    B = ball(p, r)
    reports = []
    for i in range(p.m):
        conjugator = p.generator(i + 1)
        conjugator_inv = invert(conjugator, p)
        violations = []
        checked = 0
        for g in B.level_slice(i):
            for by in (conjugator, conjugator_inv):
                checked += 1
                image = conjugate(g, by, p)
                if not level_membership(image, i):
                    violations.append(
                        f"x_{i + 1}-conjugate of {g} leaves G_{i}: {image}")
        reports.append(LevelNormalityReport(i, checked, tuple(violations)))
    return reports


@dataclass(frozen=True)
class JumpReport:
    """Verdict for the triple ``G_i < G_{i+1} < G_{i+2}``.

    ``abelian_jump`` requires both normality of ``G_i`` in ``G_{i+2}``
    (checked on generators, both conjugation directions) and the
    commutator ``[x_{i+1}, x_{i+2}]`` collecting into ``G_i``.  When the
    triple is not a jump, ``witness`` holds a verified pair ``(a, b)``
    with ``a in G_{i+1} - G_i``, ``b in G_{i+2} - G_{i+1}`` and
    ``b^-1 a b G_i != a G_i``.
    """

    index: int
    normal_in_next: bool
    normal_two_up: bool
    commutator_in_base: bool
    abelian_jump: bool
    quotient_infinite_cyclic_witness: bool
    torsion_probe_limit: int
    evidence: tuple[str, ...] = ()
    witness: tuple[Vector, Vector] | None = None


def _torsion_probe(p: RSPresentation, i: int, limit: int) -> bool:
    """``x_{i+1}^k`` stays outside ``G_i`` for k = 1..limit.

    A pass supports (but cannot prove) that the factor is infinite
    cyclic; the probe cannot distinguish all rank-1 groups.
    """
    g = p.generator(i + 1)
    acc = p.identity
    for _ in range(limit):
        acc = multiply(acc, g, p)
        if level_membership(acc, i):
            return False
    return True


def _jump_witness(p: RSPresentation, i: int, r: int) -> tuple[Vector, Vector] | None:
    """Search a pair (a, b) with ``b^-1 a b G_i != a G_i``.

    Tries the generator pair first, then ball members.  The returned
    pair is re-verified by direct collection before being reported.
    """
    candidates_a = [p.generator(i + 1)]
    candidates_b = [p.generator(i + 2), invert(p.generator(i + 2), p)]
    B = ball(p, r)
    candidates_a += [g for g in B.level_slice(i + 1)
                     if not level_membership(g, i)]
    candidates_b += [g for g in B.level_slice(i + 2)
                     if not level_membership(g, i + 1)]
    for a in candidates_a:
        if level_membership(a, i):
            continue
        for b in candidates_b:
            moved = conjugate(a, invert(b, p), p)  # b^-1 a b
            # same coset iff a^-1 (b^-1 a b) lies in G_i
            if not level_membership(multiply(invert(a, p), moved, p), i):
                return a, b
    return None


def abelian_jump_scan(p: RSPresentation, r: int = 3,
                      torsion_limit: int = TORSION_PROBE_LIMIT) -> list[JumpReport]:
    """Classify every triple ``G_i < G_{i+1} < G_{i+2}`` of the series."""
    reports = []
    for i in range(p.m - 1):
        x_next = p.generator(i + 1)
        x_two = p.generator(i + 2)
        evidence = []

        comm = commutator(x_next, x_two, p)
        comm_in_base = level_membership(comm, i)
        evidence.append(f"[x_{i + 1}, x_{i + 2}] = {comm}"
                        f" {'in' if comm_in_base else 'not in'} G_{i}")

        normal_two_up = True
        for j in range(1, i + 1):
            for by in (x_two, invert(x_two, p)):
                image = conjugate(p.generator(j), by, p)
                if not level_membership(image, i):
                    normal_two_up = False
                    evidence.append(
                        f"x_{i + 2}-conjugate of x_{j} leaves G_{i}: {image}")
        if normal_two_up and i > 0:
            evidence.append(f"G_{i} generator conjugates under x_{i + 2} stay in G_{i}")

        is_jump = comm_in_base and normal_two_up
        witness = None
        if not is_jump:
            witness = _jump_witness(p, i, r)
            if witness is not None:
                a, b = witness
                evidence.append(f"witness pair a={a}, b={b}: b^-1 a b and a "
                                f"differ modulo G_{i}")
        reports.append(JumpReport(
            index=i,
            normal_in_next=True,  # structural; re-checked by subnormality_audit
            normal_two_up=normal_two_up,
            commutator_in_base=comm_in_base,
            abelian_jump=is_jump,
            quotient_infinite_cyclic_witness=_torsion_probe(p, i, torsion_limit),
            torsion_probe_limit=torsion_limit,
            evidence=tuple(evidence),
            witness=witness,
        ))
    return reports


@dataclass(frozen=True)
class NoAbelianJumpCertificate:
    """License to enumerate relative to levels >= ``base_level``.

    Valid because every abelian-jump index at or above ``base_level``
    has been refuted with a verified witness pair.
    """

    presentation: RSPresentation
    base_level: int
    reports: tuple[JumpReport, ...] = field(repr=False)

    def covers_level(self, l: int) -> bool:
        return l >= self.base_level


@dataclass(frozen=True)
class AbelianJumpRefusal:
    """Enumeration refused: jumps make the preorder family infinite."""

    presentation: RSPresentation
    base_level: int
    jump_indices: tuple[int, ...]
    reports: tuple[JumpReport, ...] = field(repr=False)

    @property
    def reason(self) -> str:
        idx = ", ".join(str(i) for i in self.jump_indices)
        return (f"abelian jump at index {idx}: the corresponding factor has "
                f"rank > 1, so the preorder family relative to levels <= "
                f"{min(self.jump_indices)} has no isolated points and is "
                f"infinite; a finite enumeration would be incomplete")


def certify_no_abelian_jumps(p: RSPresentation, base_level: int = 0,
                             r: int = 3):
    """Scan and either certify or refuse with the offending jump indices.

    Only jumps at indices >= ``base_level`` matter for enumerations
    relative to ``G_{base_level}``: the truncated series from that level
    is what the counting arguments run on.
    """
    if not 0 <= base_level < p.m:
        raise ValueError(f"base level must be in 0..{p.m - 1}")
    reports = tuple(abelian_jump_scan(p, r))
    jumps = tuple(rep.index for rep in reports
                  if rep.abelian_jump and rep.index >= base_level)
    if jumps:
        return AbelianJumpRefusal(p, base_level, jumps, reports)
    return NoAbelianJumpCertificate(p, base_level, reports)
