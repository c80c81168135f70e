"""Ordered actions, crossing detection, and the dyadic affine model.

A crossing for an action on a totally ordered set is a tuple
``(alpha, beta; u, v, w)`` with

1. ``u < w < v``;
2. ``beta^n(u) < v`` and ``u < alpha^n(v)`` for every natural ``n``;
3. ``alpha^N(v) < w < beta^M(u)`` for some naturals ``N, M``.

Condition 2 quantifies over all of N, so no finite check can confirm it
outright.  :func:`verify_crossing` checks it honestly up to a recorded
bound; a *monotone orbit certificate* (``u <= alpha(u)`` and
``beta(v) <= v``) upgrades the bounded check to an exact one, because
the orbits are then trapped on the correct side forever.  The search
only returns certified witnesses by default: a bounded check alone is
satisfied by any long-enough translation orbit and would report
spurious crossings on perfectly conradian actions.

The affine model acts on dyadic rationals by ``x -> 2^k x + b``; its
evaluation-at-zero preorder is the stock example of a preorder that is
not conradian, and the bridge from a conradian violation to a crossing
follows the explicit construction ``u = C``, ``v = alpha^-1 beta C``,
``w = beta^2 C`` with ``N = 1`` and ``M = 3``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from itertools import product as iproduct

from .cones import GroupOps, PreorderEvaluator
from .dyadic import DyadicRational
from .words import Vector


class SearchBudgetExceeded(RuntimeError):
    """The crossing search examined more candidates than allowed."""


class OrderedAction:
    """A group acting on a totally ordered set by order-preserving maps."""

    def apply(self, g, x):
        raise NotImplementedError

    def compare(self, x, y) -> int:
        """-1, 0 or +1 according to the order of the points."""
        raise NotImplementedError

    def compose(self, g, h):
        raise NotImplementedError

    @property
    def identity_element(self):
        raise NotImplementedError


@dataclass(frozen=True)
class AffineMap:
    """The map ``x -> 2^log_scale * x + offset`` on dyadic rationals."""

    log_scale: int
    offset: DyadicRational

    def __call__(self, x: DyadicRational) -> DyadicRational:
        return x.scale_pow2(self.log_scale) + self.offset

    def after(self, other: AffineMap) -> AffineMap:
        """Composition self . other (apply ``other`` first)."""
        return AffineMap(self.log_scale + other.log_scale,
                         other.offset.scale_pow2(self.log_scale) + self.offset)

    def inverse(self) -> AffineMap:
        return AffineMap(-self.log_scale,
                         (-self.offset).scale_pow2(-self.log_scale))

    def __repr__(self):
        return f"AffineMap(2^{self.log_scale} x + {self.offset})"


AFFINE_IDENTITY = AffineMap(0, DyadicRational(0))
AFFINE_A = AffineMap(0, DyadicRational(1))   # x -> x + 1
AFFINE_T = AffineMap(1, DyadicRational(0))   # x -> 2 x


class AffineGroup(GroupOps):
    """Group of dyadic affine maps, generated by translation and doubling."""

    def multiply(self, g: AffineMap, h: AffineMap) -> AffineMap:
        return g.after(h)

    def invert(self, g: AffineMap) -> AffineMap:
        return g.inverse()

    @property
    def identity(self) -> AffineMap:
        return AFFINE_IDENTITY

    @property
    def generators(self) -> list[AffineMap]:
        return [AFFINE_A, AFFINE_T]

    def __eq__(self, other):
        return isinstance(other, AffineGroup)

    def __hash__(self):
        return hash(AffineGroup)


class AffineDyadicAction(OrderedAction):
    """The affine group acting on the dyadic line."""

    group = AffineGroup()

    def apply(self, g: AffineMap, x: DyadicRational) -> DyadicRational:
        return g(x)

    def compare(self, x: DyadicRational, y: DyadicRational) -> int:
        return x.compare(y)

    def compose(self, g, h):
        return g.after(h)

    @property
    def identity_element(self):
        return AFFINE_IDENTITY


class CosetAction(OrderedAction):
    """Left multiplication on cosets ordered by a preorder evaluator."""

    def __init__(self, phi: PreorderEvaluator):
        self.phi = phi
        self.group = phi.group

    def apply(self, g, x):
        return self.group.multiply(g, x)

    def compare(self, x, y) -> int:
        # phi(x^-1 y) = +1 means the coset of x comes strictly first
        return -self.phi.evaluate(self.group.multiply(self.group.invert(x), y))

    def compose(self, g, h):
        return self.group.multiply(g, h)

    @property
    def identity_element(self):
        return self.group.identity


def coset_points(phi: PreorderEvaluator, elements) -> list:
    """Deduplicate elements into coset representatives, deterministic order."""
    group = phi.group
    reps: list = []
    for g in elements:
        if all(phi.evaluate(group.multiply(group.invert(r), g)) != 0
               for r in reps):
            reps.append(g)
    return reps


class Bs12EvalAtZero(PreorderEvaluator):
    """Compare affine maps by where they send zero.

    The zero set is the stabilizer of 0 (the pure scalings), which is a
    subgroup but not a series level; the preorder is not conradian.
    """

    def __init__(self):
        self.group = AffineGroup()
        self.zero_level = None
        self.domain_level = None

    def evaluate(self, g: AffineMap) -> int:
        return g.offset.compare(DyadicRational(0))


def bs12_affine_action() -> AffineDyadicAction:
    """The shipped dyadic affine action."""
    return AffineDyadicAction()


def bs12_eval_at_zero_preorder() -> Bs12EvalAtZero:
    """The evaluation-at-zero preorder on the affine group."""
    return Bs12EvalAtZero()


def bs12_elements(word_bound: int) -> list[AffineMap]:
    """Distinct affine maps expressible by words of bounded length.

    Words run over ``a, a^-1, t, t^-1`` in that letter order, shorter
    words first; the first spelling of each map wins, so the order is
    reproducible.
    """
    letters = [AFFINE_A, AFFINE_A.inverse(), AFFINE_T, AFFINE_T.inverse()]
    seen: dict[AffineMap, None] = {AFFINE_IDENTITY: None}
    for length in range(1, word_bound + 1):
        for combo in iproduct(range(4), repeat=length):
            g = AFFINE_IDENTITY
            for idx in combo:
                g = g.after(letters[idx])
            if g not in seen:
                seen[g] = None
    return list(seen.keys())


def dyadic_points(max_num: int = 8, max_exp: int = 3) -> list[DyadicRational]:
    """Reduced dyadics with bounded numerator and exponent, by (exp, num)."""
    points = []
    for exp in range(max_exp + 1):
        for num in range(-max_num, max_num + 1):
            d = DyadicRational(num, exp)
            if d.exponent == exp and abs(d.numerator) <= max_num:
                points.append(d)
    seen = set()
    ordered = []
    for d in points:
        if d not in seen:
            seen.add(d)
            ordered.append(d)
    return ordered


@dataclass(frozen=True)
class CrossingWitness:
    """Candidate crossing data; ``n_check_bound`` records the finite proxy."""

    alpha: object
    beta: object
    u: object
    v: object
    w: object
    N: int
    M: int
    n_check_bound: int
    monotone_certificate: bool = False


@dataclass(frozen=True)
class CrossingVerdict:
    verified: bool
    failed_condition: int | None = None
    failed_n: int | None = None
    certificate: bool = False

    def to_jsonable(self):
        return {"verified": self.verified,
                "failed_condition": self.failed_condition,
                "failed_n": self.failed_n,
                "monotone_certificate": self.certificate}


def monotone_certificate(act: OrderedAction, alpha, beta, u, v) -> bool:
    """Orbits trapped forever: ``u <= alpha(u)`` and ``beta(v) <= v``."""
    return (act.compare(u, act.apply(alpha, u)) <= 0
            and act.compare(act.apply(beta, v), v) <= 0)


def verify_crossing(act: OrderedAction, cand: CrossingWitness) -> CrossingVerdict:
    """Check the three crossing conditions; condition 2 up to the bound.

    Conditions 1 and 3 are exact.  Condition 2 is checked for every
    ``n <= n_check_bound``; the monotone orbit certificate, when it
    holds, makes the bounded check conclusive and is reported alongside.
    """
    if cand.n_check_bound < max(cand.N, cand.M):
        raise ValueError("n_check_bound must cover the witness exponents N, M")
    cert = monotone_certificate(act, cand.alpha, cand.beta, cand.u, cand.v)

    if not (act.compare(cand.u, cand.w) < 0 and act.compare(cand.w, cand.v) < 0):
        return CrossingVerdict(False, failed_condition=1, certificate=cert)

    bu, av = cand.u, cand.v
    for n in range(cand.n_check_bound + 1):
        if not act.compare(bu, cand.v) < 0:
            return CrossingVerdict(False, failed_condition=2, failed_n=n,
                                   certificate=cert)
        if not act.compare(cand.u, av) < 0:
            return CrossingVerdict(False, failed_condition=2, failed_n=n,
                                   certificate=cert)
        bu = act.apply(cand.beta, bu)
        av = act.apply(cand.alpha, av)

    aNv = cand.v
    for _ in range(cand.N):
        aNv = act.apply(cand.alpha, aNv)
    bMu = cand.u
    for _ in range(cand.M):
        bMu = act.apply(cand.beta, bMu)
    if not (act.compare(aNv, cand.w) < 0 and act.compare(cand.w, bMu) < 0):
        return CrossingVerdict(False, failed_condition=3, certificate=cert)
    return CrossingVerdict(True, certificate=cert)


def enumerate_action_elements(act: OrderedAction, gens, word_bound: int) -> list:
    """Distinct elements spelled by words of bounded length over ``gens``."""
    seen = {act.identity_element: None}
    for length in range(1, word_bound + 1):
        for combo in iproduct(range(len(gens)), repeat=length):
            g = act.identity_element
            for idx in combo:
                g = act.compose(g, gens[idx])
            if g not in seen:
                seen[g] = None
    return list(seen.keys())


@dataclass(frozen=True)
class SearchOutcome:
    witness: CrossingWitness | None
    elements_searched: int
    points: int
    candidates: int

    @property
    def found(self) -> bool:
        return self.witness is not None


def crossing_search(act: OrderedAction, gens, word_bound: int, point_set,
                    n_bound: int, require_certificate: bool = True,
                    candidate_budget: int = 50_000_000,
                    jobs: int = 1) -> SearchOutcome:
    """Deterministic sweep for a crossing witness.

    Elements are enumerated by word length then letter order, points in
    the given order; the first witness in ``(alpha, beta, u, v, w, N, M)``
    priority is returned.  By default only candidates carrying the
    monotone orbit certificate are accepted, so a returned witness is a
    genuine crossing and a ``none_found`` on a conradian coset action is
    the honest expected outcome.  With ``require_certificate=False``,
    condition 2 is only checked up to ``n_bound`` and the result records
    that bound.
    """
    if word_bound < 1 or n_bound < 1:
        raise ValueError("bounds must be >= 1")
    elements = enumerate_action_elements(act, gens, word_bound)
    points = list(point_set)

    cmp_cache: dict = {}

    def cmp(x, y) -> int:
        key = (x, y)
        if key not in cmp_cache:
            cmp_cache[key] = act.compare(x, y)
        return cmp_cache[key]

    def orbit(g, x, count):
        out = []
        cur = x
        for _ in range(count):
            cur = act.apply(g, cur)
            out.append(cur)
        return out

    counters = {"candidates": 0}

    def search_alpha(alpha) -> CrossingWitness | None:
        # points where the alpha-orbit can only move up
        alpha_ok = [u for u in points if cmp(u, act.apply(alpha, u)) <= 0]
        for beta in elements:
            beta_ok = [v for v in points if cmp(act.apply(beta, v), v) <= 0]
            for u in (points if not require_certificate else alpha_ok):
                for v in (points if not require_certificate else beta_ok):
                    counters["candidates"] += 1
                    if counters["candidates"] > candidate_budget:
                        raise SearchBudgetExceeded(
                            f"examined more than {candidate_budget} candidates")
                    if not cmp(u, v) < 0:
                        continue
                    if not require_certificate:
                        ok = True
                        bu, av = u, v
                        for _ in range(n_bound + 1):
                            if not (cmp(bu, v) < 0 and cmp(u, av) < 0):
                                ok = False
                                break
                            bu = act.apply(beta, bu)
                            av = act.apply(alpha, av)
                        if not ok:
                            continue
                    alpha_orbit = orbit(alpha, v, n_bound)
                    beta_orbit = orbit(beta, u, n_bound)
                    for w in points:
                        if not (cmp(u, w) < 0 and cmp(w, v) < 0):
                            continue
                        N = next((n + 1 for n, x in enumerate(alpha_orbit)
                                  if cmp(x, w) < 0), None)
                        if N is None:
                            continue
                        M = next((m + 1 for m, x in enumerate(beta_orbit)
                                  if cmp(w, x) < 0), None)
                        if M is None:
                            continue
                        cand = CrossingWitness(
                            alpha, beta, u, v, w, N, M,
                            n_check_bound=n_bound,
                            monotone_certificate=monotone_certificate(
                                act, alpha, beta, u, v))
                        verdict = verify_crossing(act, cand)
                        if verdict.verified and (
                                cand.monotone_certificate
                                or not require_certificate):
                            return cand
        return None

    witness = None
    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for result in pool.map(search_alpha, elements):
                if result is not None:
                    witness = result
                    break
    else:
        for alpha in elements:
            witness = search_alpha(alpha)
            if witness is not None:
                break
    return SearchOutcome(witness, len(elements), len(points),
                         counters["candidates"])


class ViolationNotVerified(ValueError):
    """The supplied pair does not violate the conradian condition."""


def crossing_from_violation(phi: PreorderEvaluator, a, b,
                            n_bound: int = 4) -> CrossingWitness:
    """Build the explicit crossing a bounded conradian violation yields.

    Given positives ``a, b`` with ``a^-1 b a^n`` non-positive for every
    ``n <= n_bound``, the coset action crosses at ``alpha = b``,
    ``beta = a``, ``u = C``, ``v = b^-1 a C``, ``w = a^2 C`` with
    ``N = 1`` and ``M = 3``.  The witness is verified before being
    returned; the bounded violation supports condition 2 up to
    ``n_bound - 1``.
    """
    if n_bound < 4:
        raise ValueError("need n_bound >= 4 to support the construction")
    group = phi.group
    if phi.evaluate(a) != 1 or phi.evaluate(b) != 1:
        raise ViolationNotVerified("both elements must be strictly positive")
    t = group.multiply(group.invert(a), b)
    for n in range(n_bound + 1):
        if phi.evaluate(t) == 1:
            raise ViolationNotVerified(
                f"a^-1 b a^{n} is positive; the pair satisfies the conradian "
                f"condition at n={n}")
        t = group.multiply(t, a)

    act = CosetAction(phi)
    u = group.identity
    v = group.multiply(group.invert(b), a)
    w = group.multiply(a, a)
    cand = CrossingWitness(alpha=b, beta=a, u=u, v=v, w=w, N=1, M=3,
                           n_check_bound=n_bound - 1)
    cand = replace(cand, monotone_certificate=monotone_certificate(
        act, cand.alpha, cand.beta, cand.u, cand.v))
    verdict = verify_crossing(act, cand)
    if not verdict.verified:
        raise ViolationNotVerified(
            f"constructed witness failed condition {verdict.failed_condition}; "
            f"the supplied pair was not a genuine bounded violation")
    return cand
