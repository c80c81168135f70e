"""Exhaustive ball-scale audits, enumeration, isolation and falsification.

Every quantifier in the preorder axioms ranges over the whole group;
the audits replace it by an exhaustive sweep over a finite ball and
report the radius used.  Reports are data: a failed clause carries its
first counterexample, and clause evaluation order is fixed
(zero-set, inverse, subsemigroup, conradian, properness) so the first
counterexample is reproducible.

Enumeration emits every sign-vector cone relative to a level, gated by
a no-abelian-jump certificate; counts are cross-checked against the
exact formulas ``2^(m-l)`` per level and ``2^(m+1) - 2`` overall.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product as iproduct
from math import gcd

from .cones import (EvaluationDomainError, FunctionalEvaluator,
                    PerturbedEvaluator, PreorderEvaluator, SignVectorCone)
from .presentations import RSPresentation
from .series import AbelianJumpRefusal, NoAbelianJumpCertificate
from .words import Ball, Vector, ball, level_membership

CLAUSE_ZERO_SET = "zero-set"
CLAUSE_INVERSE = "inverse-symmetry"
CLAUSE_SUBSEMIGROUP = "subsemigroup"
CLAUSE_CONRADIAN = "conradian-n2"
CLAUSE_PROPERNESS = "properness"

CLAUSE_ORDER = (CLAUSE_ZERO_SET, CLAUSE_INVERSE, CLAUSE_SUBSEMIGROUP,
                CLAUSE_CONRADIAN, CLAUSE_PROPERNESS)


class MissingCertificateError(RuntimeError):
    """Enumeration attempted without a valid no-abelian-jump certificate."""

    def __init__(self, message: str, refusal: AbelianJumpRefusal | None = None):
        super().__init__(message)
        self.refusal = refusal


@dataclass(frozen=True)
class Counterexample:
    elements: tuple
    signs: tuple
    note: str = ""

    def to_jsonable(self):
        return {"elements": [list(e) if isinstance(e, tuple) else repr(e)
                             for e in self.elements],
                "signs": list(self.signs),
                "note": self.note}


@dataclass(frozen=True)
class ClauseResult:
    clause: str
    passed: bool
    checked: int
    skipped: int = 0
    counterexample: Counterexample | None = None

    def to_jsonable(self):
        return {"clause": self.clause, "passed": self.passed,
                "checked": self.checked, "skipped": self.skipped,
                "counterexample": None if self.counterexample is None
                else self.counterexample.to_jsonable()}


@dataclass(frozen=True)
class AuditReport:
    clauses: tuple[ClauseResult, ...]
    radius: int | None
    subject: str = ""

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def clause(self, name: str) -> ClauseResult:
        for c in self.clauses:
            if c.clause == name:
                return c
        raise KeyError(name)

    @property
    def coverage(self) -> tuple[int, int]:
        checked = sum(c.checked for c in self.clauses)
        skipped = sum(c.skipped for c in self.clauses)
        return checked, checked + skipped

    def to_jsonable(self):
        checked, total = self.coverage
        return {"clauses": {c.clause: c.to_jsonable() for c in self.clauses},
                "passed": self.passed,
                "radius": self.radius,
                "checked": checked,
                "total": total}


def _elements_of(scope) -> tuple:
    return tuple(scope.elements) if isinstance(scope, Ball) else tuple(scope)


def _radius_of(scope) -> int | None:
    return scope.radius if isinstance(scope, Ball) else None


class _Evaluations:
    """Skip-counting wrapper over an evaluator and cached group products."""

    def __init__(self, phi: PreorderEvaluator):
        self.phi = phi
        self.group = phi.group
        self.skipped = 0
        self._signs: dict = {}

    def sign(self, g):
        """Sign of g, or None (counted) when outside the domain."""
        if g in self._signs:
            return self._signs[g]
        if not self.phi.defined_on(g):
            self.skipped += 1
            self._signs[g] = None
            return None
        try:
            s = self.phi.evaluate(g)
        except EvaluationDomainError:
            self.skipped += 1
            s = None
        self._signs[g] = s
        return s

    def take_skips(self) -> int:
        n, self.skipped = self.skipped, 0
        return n


def _zero_set_clause(ev: _Evaluations, elements, base_level) -> ClauseResult:
    checked = 0
    if base_level is not None:
        for g in elements:
            s = ev.sign(g)
            if s is None:
                continue
            checked += 1
            if (s == 0) != level_membership(g, base_level):
                note = (f"sign 0 but outside G_{base_level}" if s == 0
                        else f"in G_{base_level} but sign {s}")
                return ClauseResult(CLAUSE_ZERO_SET, False, checked,
                                    ev.take_skips(),
                                    Counterexample((g,), (s,), note))
        return ClauseResult(CLAUSE_ZERO_SET, True, checked, ev.take_skips())

    # no declared level: the zero set must behave like a subgroup
    group = ev.group
    identity = group.identity
    s_id = ev.sign(identity)
    checked += 1
    if s_id is not None and s_id != 0:
        return ClauseResult(CLAUSE_ZERO_SET, False, checked, ev.take_skips(),
                            Counterexample((identity,), (s_id,),
                                           "identity has nonzero sign"))
    zero = [g for g in elements if ev.sign(g) == 0]
    for a in zero:
        inv = group.invert(a)
        s = ev.sign(inv)
        if s is None:
            continue
        checked += 1
        if s != 0:
            return ClauseResult(CLAUSE_ZERO_SET, False, checked, ev.take_skips(),
                                Counterexample((a, inv), (0, s),
                                               "zero set not inverse-closed"))
    for a in zero:
        for b in zero:
            prod = group.multiply(a, b)
            s = ev.sign(prod)
            if s is None:
                continue
            checked += 1
            if s != 0:
                return ClauseResult(CLAUSE_ZERO_SET, False, checked,
                                    ev.take_skips(),
                                    Counterexample((a, b, prod), (0, 0, s),
                                                   "zero set not product-closed"))
    return ClauseResult(CLAUSE_ZERO_SET, True, checked, ev.take_skips())


def _inverse_clause(ev: _Evaluations, elements) -> ClauseResult:
    checked = 0
    for g in elements:
        s = ev.sign(g)
        if s is None:
            continue
        inv = ev.group.invert(g)
        s_inv = ev.sign(inv)
        if s_inv is None:
            continue
        checked += 1
        if s_inv != -s:
            return ClauseResult(CLAUSE_INVERSE, False, checked, ev.take_skips(),
                                Counterexample((g, inv), (s, s_inv),
                                               "inverse does not flip the sign"))
    return ClauseResult(CLAUSE_INVERSE, True, checked, ev.take_skips())


def _subsemigroup_clause(ev: _Evaluations, elements) -> ClauseResult:
    positives = [g for g in elements if ev.sign(g) == 1]
    checked = 0
    for a in positives:
        for b in positives:
            prod = ev.group.multiply(a, b)
            s = ev.sign(prod)
            if s is None:
                continue
            checked += 1
            if s != 1:
                return ClauseResult(CLAUSE_SUBSEMIGROUP, False, checked,
                                    ev.take_skips(),
                                    Counterexample((a, b, prod), (1, 1, s),
                                                   "product of positives not positive"))
    return ClauseResult(CLAUSE_SUBSEMIGROUP, True, checked, ev.take_skips())


def _conradian_clause(ev: _Evaluations, elements) -> ClauseResult:
    positives = [g for g in elements if ev.sign(g) == 1]
    group = ev.group
    checked = 0
    for a in positives:
        inv_a = group.invert(a)
        for b in positives:
            conj = group.multiply(group.multiply(inv_a, b), group.multiply(a, a))
            s = ev.sign(conj)
            if s is None:
                continue
            checked += 1
            if s != 1:
                return ClauseResult(CLAUSE_CONRADIAN, False, checked,
                                    ev.take_skips(),
                                    Counterexample((a, b, conj), (1, 1, s),
                                                   "a^-1 b a^2 not positive"))
    return ClauseResult(CLAUSE_CONRADIAN, True, checked, ev.take_skips())


def _properness_clause(ev: _Evaluations) -> ClauseResult:
    checked = 0
    for g in ev.group.generators:
        s = ev.sign(g)
        if s is None:
            continue
        checked += 1
        if s != 0:
            return ClauseResult(CLAUSE_PROPERNESS, True, checked, ev.take_skips())
    gens = tuple(ev.group.generators)
    return ClauseResult(CLAUSE_PROPERNESS, False, checked, ev.take_skips(),
                        Counterexample(gens, tuple(0 for _ in gens),
                                       "every generator has sign 0"))


def run_clauses(phi: PreorderEvaluator, scope, base_level=None,
                clauses=CLAUSE_ORDER, subject: str = "") -> AuditReport:
    """Run the named clauses in canonical order and collect results."""
    elements = _elements_of(scope)
    ev = _Evaluations(phi)
    if base_level is None:
        base_level = phi.zero_level
    results = []
    for name in CLAUSE_ORDER:
        if name not in clauses:
            continue
        if name == CLAUSE_ZERO_SET:
            results.append(_zero_set_clause(ev, elements, base_level))
        elif name == CLAUSE_INVERSE:
            results.append(_inverse_clause(ev, elements))
        elif name == CLAUSE_SUBSEMIGROUP:
            results.append(_subsemigroup_clause(ev, elements))
        elif name == CLAUSE_CONRADIAN:
            results.append(_conradian_clause(ev, elements))
        elif name == CLAUSE_PROPERNESS:
            results.append(_properness_clause(ev))
    return AuditReport(tuple(results), _radius_of(scope), subject)


def cone_axiom_audit(phi: PreorderEvaluator, scope, base_level=None) -> AuditReport:
    """Audit the positive-cone axioms exhaustively on the given elements.

    With a base level the zero set must equal ``G_l`` membership; without
    one it must behave like a subgroup.  Products and inverses that fall
    outside the evaluator's domain are skipped and counted.
    """
    return run_clauses(phi, scope, base_level,
                       clauses=(CLAUSE_ZERO_SET, CLAUSE_INVERSE,
                                CLAUSE_SUBSEMIGROUP, CLAUSE_PROPERNESS))


@dataclass(frozen=True)
class ConradianReport:
    """Outcome of the conradian check with minimal-exponent bookkeeping.

    ``max_minimal_n`` is the largest exponent any positive pair needed;
    ``histogram`` maps each minimal exponent to how many pairs needed it.
    A pair with no working exponent at or below the bound appears in
    ``unbounded_pairs`` (first few, with the searched bound).
    """

    clause: ClauseResult
    n_max: int
    pairs: int
    max_minimal_n: int | None
    histogram: dict[int, int]
    unbounded_pairs: tuple
    radius: int | None

    @property
    def passed(self) -> bool:
        return self.clause.passed and not self.unbounded_pairs

    def to_jsonable(self):
        return {"clause": self.clause.to_jsonable(),
                "n_max": self.n_max,
                "pairs": self.pairs,
                "max_minimal_n": self.max_minimal_n,
                "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
                "unbounded_pairs": [[list(a), list(b)] for a, b in
                                    self.unbounded_pairs],
                "passed": self.passed}


def conradian_audit(phi: PreorderEvaluator, scope, n_max: int = 4) -> ConradianReport:
    """Check ``a^-1 b a^2`` positivity and find minimal exponents per pair.

    The primary clause demands the squared form be positive for every
    pair of positives; the secondary sweep records the minimal
    ``n <= n_max`` with ``a^-1 b a^n`` positive, listing pairs that have
    none (the explicit violation witnesses).
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    elements = _elements_of(scope)
    ev = _Evaluations(phi)
    clause = _conradian_clause(ev, elements)

    positives = [g for g in elements if ev.sign(g) == 1]
    group = phi.group
    histogram: dict[int, int] = {}
    unbounded = []
    pairs = 0
    max_min_n = None
    for a in positives:
        inv_a = group.invert(a)
        for b in positives:
            pairs += 1
            t = group.multiply(inv_a, b)
            minimal = None
            for n in range(1, n_max + 1):
                t = group.multiply(t, a)
                if ev.sign(t) == 1:
                    minimal = n
                    break
            if minimal is None:
                if len(unbounded) < 8:
                    unbounded.append((a, b))
            else:
                histogram[minimal] = histogram.get(minimal, 0) + 1
                if max_min_n is None or minimal > max_min_n:
                    max_min_n = minimal
    return ConradianReport(clause, n_max, pairs, max_min_n, histogram,
                           tuple(unbounded), _radius_of(scope))


@dataclass(frozen=True)
class ConvexityReport:
    level: int
    checked: int
    skipped: int
    counterexample: Counterexample | None
    radius: int | None

    @property
    def passed(self) -> bool:
        return self.counterexample is None

    def to_jsonable(self):
        return {"level": self.level, "checked": self.checked,
                "skipped": self.skipped, "passed": self.passed,
                "counterexample": None if self.counterexample is None
                else self.counterexample.to_jsonable()}


def convexity_audit(phi: PreorderEvaluator, scope, k: int) -> ConvexityReport:
    """Check that ``G_k`` is sandwich-closed on the given elements.

    Searches triples ``a, c in G_k`` and ``b`` anywhere with
    ``aC <= bC <= cC``; any such ``b`` outside ``G_k`` is a
    counterexample.  ``k`` equal to the generator count passes trivially.
    """
    elements = _elements_of(scope)
    ev = _Evaluations(phi)
    group = phi.group
    m = len(elements[0]) if elements else 0
    if k == m:
        return ConvexityReport(k, 0, 0, None, _radius_of(scope))

    members = [g for g in elements if level_membership(g, k)]
    inv = {a: group.invert(a) for a in set(members) | set(elements)}
    cmp_sign: dict = {}

    def compare(x, y):
        key = (x, y)
        if key not in cmp_sign:
            cmp_sign[key] = ev.sign(group.multiply(inv[x], y))
        return cmp_sign[key]

    checked = 0
    skipped = 0
    for a in members:
        for b in elements:
            s_ab = compare(a, b)
            if s_ab is None:
                skipped += 1
                continue
            if s_ab < 0:  # aC > bC
                continue
            for c in members:
                s_bc = compare(b, c)
                if s_bc is None:
                    skipped += 1
                    continue
                checked += 1
                if s_bc >= 0 and not level_membership(b, k):
                    return ConvexityReport(
                        k, checked, skipped + ev.skipped,
                        Counterexample((a, b, c), (s_ab, s_bc),
                                       f"element between G_{k} members is outside"),
                        _radius_of(scope))
    return ConvexityReport(k, checked, skipped + ev.skipped, None,
                           _radius_of(scope))


@dataclass(frozen=True)
class EnumerationResult:
    """A complete list of sign-vector cones with its counting cross-check."""

    presentation: RSPresentation
    base_level: int | None  # None for the union over all levels
    cones: tuple[SignVectorCone, ...]
    expected: int
    certified: bool = True

    @property
    def count(self) -> int:
        return len(self.cones)

    @property
    def match(self) -> bool:
        return self.count == self.expected

    def __iter__(self):
        return iter(self.cones)

    def __len__(self):
        return len(self.cones)

    def to_jsonable(self):
        return {"presentation": self.presentation.name,
                "base_level": self.base_level,
                "cones": [{"base_level": c.base_level,
                           "eps": list(c.eps),
                           "label": c.label()} for c in self.cones],
                "count": {"expected": self.expected, "actual": self.count,
                          "match": self.match},
                "certified": self.certified}


DEFAULT_AUDIT_RADIUS = 3


def _require_certificate(p: RSPresentation, l: int, certificate) -> bool:
    if isinstance(certificate, AbelianJumpRefusal):
        raise MissingCertificateError(certificate.reason, certificate)
    if not isinstance(certificate, NoAbelianJumpCertificate):
        raise MissingCertificateError(
            "enumeration requires a no-abelian-jump certificate "
            "(see certify_no_abelian_jumps)")
    if certificate.presentation is not p:
        raise MissingCertificateError("certificate is for a different presentation")
    if not certificate.covers_level(l):
        raise MissingCertificateError(
            f"certificate covers levels >= {certificate.base_level}, "
            f"not level {l}")
    return True


def enumerate_relative(p: RSPresentation, l: int, certificate,
                       radius: int = DEFAULT_AUDIT_RADIUS,
                       verify: bool = True) -> EnumerationResult:
    """All ``2^(m-l)`` cones relative to ``G_l``, in deterministic order.

    Refuses to run without a certificate covering ``l``: with an abelian
    jump above the base level the true family is infinite and the list
    would be silently incomplete.  With ``verify`` each cone is put
    through the cone and conradian audits at the given radius.
    """
    if not 0 <= l < p.m:
        raise ValueError(f"base level must be in 0..{p.m - 1}")
    certified = certificate is not FORCE_UNCERTIFIED
    if certified:
        _require_certificate(p, l, certificate)
    cones = tuple(SignVectorCone(p, l, eps)
                  for eps in iproduct((1, -1), repeat=p.m - l))
    if verify:
        B = ball(p, radius)
        for cone in cones:
            report = cone_axiom_audit(cone, B)
            if not report.passed:
                raise RuntimeError(
                    f"enumerated cone {cone.label()} failed its own audit: "
                    f"{report.to_jsonable()}")
            conr = conradian_audit(cone, B, n_max=2)
            if not conr.passed:
                raise RuntimeError(
                    f"enumerated cone {cone.label()} failed the conradian audit")
    return EnumerationResult(p, l, cones, 2 ** (p.m - l), certified)


# sentinel: enumerate anyway, flagging the output as possibly incomplete
FORCE_UNCERTIFIED = object()


def enumerate_all(p: RSPresentation, certificate,
                  radius: int = DEFAULT_AUDIT_RADIUS,
                  verify: bool = True) -> EnumerationResult:
    """Union of the relative enumerations over every base level.

    The total is exactly ``2^(m+1) - 2``; each cone is tagged by its base
    level, which identifies the subgroup its preorder is relative to
    (the lowest level of the chain, 0, plays the role of the minimal
    one because the trivial group carries no preorder at all).
    """
    certified = certificate is not FORCE_UNCERTIFIED
    if certified:
        _require_certificate(p, 0, certificate)
    cones: list[SignVectorCone] = []
    for l in range(p.m):
        part = enumerate_relative(p, l, certificate, radius, verify)
        cones.extend(part.cones)
    return EnumerationResult(p, None, tuple(cones), 2 ** (p.m + 1) - 2, certified)


@dataclass(frozen=True)
class IsolationResult:
    """A finite set of sign constraints singling the target out."""

    separated: bool
    separating: tuple[tuple, ...]  # (element, sign) pairs
    family_size: int
    radius: int | None

    def to_jsonable(self):
        return {"separated": self.separated,
                "family_size": self.family_size,
                "radius": self.radius,
                "isolated_by": [{"element": list(g), "sign": s}
                                for g, s in self.separating]}


def isolation_check(target: PreorderEvaluator, family, scope) -> IsolationResult:
    """Greedily find ball elements whose signs pin the target in its family.

    The constraint set mirrors a basic open neighborhood: all family
    members agreeing with the target on the chosen elements must be the
    target itself.  When the target is relative to a proper subgroup and
    has competitors, the subgroup's top generator is pinned (to sign 0)
    first, certifying the relative level; sign pins are then added
    greedily in lexicographic element order.
    """
    members = list(family)
    if not any(c is target or c == target for c in members):
        raise ValueError("target must belong to the family")
    candidates = [c for c in members if not (c is target or c == target)]
    elements = _elements_of(scope)
    separating: list[tuple] = []

    zero_level = target.zero_level
    if candidates and zero_level is not None and zero_level >= 1:
        pin = target.group.generators[zero_level - 1]
        separating.append((pin, target.evaluate(pin)))
        want = target.evaluate(pin)
        candidates = [c for c in candidates if c.evaluate(pin) == want]

    for g in sorted(elements):
        if not candidates:
            break
        want = target.evaluate(g)
        remaining = [c for c in candidates if c.evaluate(g) == want]
        if len(remaining) < len(candidates):
            separating.append((g, want))
            candidates = remaining
    return IsolationResult(not candidates, tuple(separating), len(members),
                           _radius_of(scope))


COPRIME_HEIGHT_LIMIT = 16


def coprime_pairs(count: int) -> list[tuple[int, int]]:
    """First ``count`` coprime coefficient pairs, deterministic order."""
    pairs = [(1, 0), (0, 1)]
    for h in range(1, COPRIME_HEIGHT_LIMIT + 1):
        fresh = [(a, b) for a in range(1, h + 1) for b in range(1, h + 1)
                 if max(a, b) == h and gcd(a, b) == 1]
        pairs.extend(sorted(fresh))
        if len(pairs) >= count:
            return pairs[:count]
    raise ValueError(f"requested {count} pairs, exceeding the enumeration "
                     f"budget of height {COPRIME_HEIGHT_LIMIT}")


def abelian_witness_suite(p: RSPresentation, count: int,
                          radius: int = 2) -> list[FunctionalEvaluator]:
    """``count`` pairwise-distinct audited preorders on the rank-2 lattice.

    Each is the sign of an integer linear functional with coprime
    coefficients; its zero set is the kernel subgroup.  Any two differ
    already on a small ball, and there are infinitely many of them,
    which is the desk-scale refutation of finiteness in the presence of
    an abelian jump.
    """
    if p.m != 2 or p.conj_pos or p.conj_neg:
        raise ValueError("witness suite requires the free abelian rank-2 "
                         "presentation")
    evaluators = [FunctionalEvaluator(p, pair) for pair in coprime_pairs(count)]
    B = ball(p, radius)
    for phi in evaluators:
        report = cone_axiom_audit(phi, B)
        if not report.passed:
            raise RuntimeError(f"functional {phi.coefficients} failed audit")
        if not conradian_audit(phi, B, n_max=2).passed:
            raise RuntimeError(f"functional {phi.coefficients} failed the "
                               f"conradian audit")
    for i, phi in enumerate(evaluators):
        for psi in evaluators[i + 1:]:
            if all(phi.evaluate(g) == psi.evaluate(g) for g in B):
                raise RuntimeError(
                    f"functionals {phi.coefficients} and {psi.coefficients} "
                    f"agree on the radius-{radius} ball")
    return evaluators


@dataclass(frozen=True)
class PerturbResult:
    element: Vector
    new_sign: int
    failed_clause: str | None
    counterexample: Counterexample | None

    @property
    def falsified(self) -> bool:
        return self.failed_clause is not None

    def to_jsonable(self):
        return {"element": list(self.element), "new_sign": self.new_sign,
                "failed_clause": self.failed_clause,
                "falsified": self.falsified,
                "counterexample": None if self.counterexample is None
                else self.counterexample.to_jsonable()}


def perturb_falsify(cone: SignVectorCone, scope, g: Vector,
                    new_sign: int) -> PerturbResult:
    """Flip the cone's sign at one element and name the clause that breaks.

    The perturbed function is audited with the clause order fixed, so the
    reported failure is the canonical first one.  A perturbation that
    survives every clause at this radius returns ``failed_clause=None``;
    callers should escalate the radius.
    """
    if g == cone.presentation.identity:
        raise ValueError("perturbation element must not be the identity")
    old = cone.evaluate(g)
    if new_sign == old:
        raise ValueError(f"new sign {new_sign} equals the current sign")
    if new_sign not in (1, 0, -1):
        raise ValueError("sign must be +1, 0 or -1")
    phi = PerturbedEvaluator(cone, {g: new_sign})
    report = run_clauses(phi, scope, base_level=cone.base_level)
    for clause in report.clauses:
        if not clause.passed:
            return PerturbResult(g, new_sign, clause.clause, clause.counterexample)
    return PerturbResult(g, new_sign, None, None)


def perturb_falsify_all(cone: SignVectorCone, scope, g: Vector) -> list[PerturbResult]:
    """Falsify every possible sign flip at one element."""
    old = cone.evaluate(g)
    return [perturb_falsify(cone, scope, g, s)
            for s in (1, 0, -1) if s != old]
