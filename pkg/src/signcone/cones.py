"""Left-preorders as sign evaluators; sign-vector cones and their calculus.

A left-preorder relative to a subgroup ``C`` is stored as its sign
function: a total map sending an element to ``+1`` (strictly above the
identity coset), ``-1`` (strictly below) or ``0`` (in ``C``).  Cosets
then compare by ``aC <= bC  iff  sign(a^-1 b) in {+1, 0}``.

The canonical finite encoding is a :class:`SignVectorCone`: a base
level ``l`` plus one direction choice per series factor above ``l``.
Its sign function reads off the top nonzero exponent:
``sign(g) = eps_k * sgn(e_k)`` for ``k`` the largest index with
``e_k != 0``, and ``0`` when ``g`` lies in ``G_l``.

Two constructions move between levels:

* :func:`mu` glues a preorder on ``G_k`` (relative to ``G_l``) and one
  on ``G`` (relative to ``G_k``) into one on ``G`` relative to ``G_l``;
* :func:`rho` splits a preorder with convex ``G_k`` into those two parts.

Both are implemented on the generic evaluator interface, so the
round-trip laws are honest function-composition facts rather than
notational identities.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass

from . import words
from .presentations import RSPresentation
from .words import Vector, level_membership, top_index


def sign(x: int) -> int:
    return (x > 0) - (x < 0)


class EvaluationDomainError(ValueError):
    """An evaluator was asked for an element outside its declared domain."""


class GroupOps:
    """Minimal group interface the audits need: product, inverse, identity."""

    def multiply(self, a, b):
        raise NotImplementedError

    def invert(self, a):
        raise NotImplementedError

    @property
    def identity(self):
        raise NotImplementedError

    @property
    def generators(self) -> list:
        raise NotImplementedError


class PresentationGroup(GroupOps):
    """Group operations backed by collection on a presentation."""

    def __init__(self, presentation: RSPresentation):
        self.presentation = presentation

    def multiply(self, a: Vector, b: Vector) -> Vector:
        return words.multiply(a, b, self.presentation)

    def invert(self, a: Vector) -> Vector:
        return words.invert(a, self.presentation)

    @property
    def identity(self) -> Vector:
        return self.presentation.identity

    @property
    def generators(self) -> list[Vector]:
        return self.presentation.generators

    def __eq__(self, other):
        return (isinstance(other, PresentationGroup)
                and other.presentation is self.presentation)

    def __hash__(self):
        return hash(id(self.presentation))


class PreorderEvaluator:
    """Total sign function of a left-preorder.

    ``zero_level`` declares, when known, that the zero set is exactly the
    series subgroup ``G_l``; ``None`` means the zero set is only promised
    to be a subgroup (e.g. the kernel of a linear functional).
    ``domain_level`` restricts the domain to ``G_k`` when not ``None``.
    """

    # deliberately unannotated: subclasses may be dataclasses and these
    # must not become fields
    group = None
    zero_level = None
    domain_level = None

    def evaluate(self, g) -> int:
        raise NotImplementedError

    def __call__(self, g) -> int:
        return self.evaluate(g)

    def defined_on(self, g) -> bool:
        if self.domain_level is None:
            return True
        return level_membership(g, self.domain_level)

    def _require(self, g) -> None:
        if not self.defined_on(g):
            raise EvaluationDomainError(
                f"element {g} outside domain G_{self.domain_level}")


class CosetOrder(enum.Enum):
    PRECEDES = "precedes"
    SAME_COSET = "same_coset"
    SUCCEEDS = "succeeds"


def coset_compare(phi: PreorderEvaluator, a, b) -> CosetOrder:
    """Compare the cosets ``aC`` and ``bC`` under the preorder of ``phi``."""
    s = phi.evaluate(phi.group.multiply(phi.group.invert(a), b))
    if s > 0:
        return CosetOrder.PRECEDES
    if s < 0:
        return CosetOrder.SUCCEEDS
    return CosetOrder.SAME_COSET


@dataclass(frozen=True)
class SignVectorCone(PreorderEvaluator):
    """A conradian left-preorder relative to ``G_l``, one sign per factor.

    ``eps[i]`` is the direction chosen on the factor ``G_{l+1+i}/G_{l+i}``.
    The base level must satisfy ``l < m``: with ``l = m`` every element
    would be equivalent to the identity, which is excluded.
    """

    presentation: RSPresentation
    base_level: int
    eps: tuple[int, ...]

    def __post_init__(self):
        m = self.presentation.m
        if not 0 <= self.base_level < m:
            raise ValueError(f"base level must be in 0..{m - 1}")
        if len(self.eps) != m - self.base_level:
            raise ValueError(
                f"need {m - self.base_level} signs for base level {self.base_level}")
        if any(e not in (1, -1) for e in self.eps):
            raise ValueError("signs must be +1 or -1")

    @property
    def group(self) -> PresentationGroup:
        return PresentationGroup(self.presentation)

    @property
    def zero_level(self) -> int:
        return self.base_level

    @property
    def domain_level(self) -> None:
        return None

    def eps_at(self, k: int) -> int:
        """Direction sign for the factor with top index ``k``."""
        if not self.base_level < k <= self.presentation.m:
            raise ValueError(f"index {k} not above base level {self.base_level}")
        return self.eps[k - self.base_level - 1]

    def evaluate(self, g: Vector) -> int:
        k = top_index(g)
        if k <= self.base_level:
            return 0
        return self.eps_at(k) * sign(g[k - 1])

    def label(self) -> str:
        signs = ",".join("+" if e > 0 else "-" for e in self.eps)
        return f"l={self.base_level},eps=[{signs}]"

    def __repr__(self):
        return f"SignVectorCone({self.presentation.name}: {self.label()})"


def cone_evaluate(cone: SignVectorCone, g: Vector) -> int:
    """Sign of ``g`` under the cone's preorder (module-level convenience)."""
    return cone.evaluate(g)


def parse_cone_label(text: str, presentation: RSPresentation,
                     base_level: int | None = None) -> SignVectorCone:
    """Parse ``"l=0,eps=[+,-,+]"`` (or just ``"eps=[...]"`` with a level)."""
    level = base_level
    level_match = re.search(r"l\s*=\s*(-?\d+)", text)
    if level_match:
        level = int(level_match.group(1))
    eps_match = re.search(r"eps\s*=\s*\[([^\]]*)\]", text)
    if eps_match is None:
        raise ValueError(f"cone label {text!r} needs signs (eps=[...])")
    eps = []
    for token in eps_match.group(1).split(","):
        token = token.strip()
        if token in ("+", "+1"):
            eps.append(1)
        elif token in ("-", "-1"):
            eps.append(-1)
        elif token:
            raise ValueError(f"bad sign {token!r} in cone label")
    if level is None:
        raise ValueError("cone label needs a base level (l=<int> or --level)")
    return SignVectorCone(presentation, level, tuple(eps))


class MuEvaluator(PreorderEvaluator):
    """Glued preorder: the coarse part wins unless it vanishes.

    ``phi1`` lives on ``G_k`` relative to ``G_l``; ``phi2`` on the whole
    group relative to ``G_k``.  The positive set of the result is the
    disjoint union of both positive sets.
    """

    def __init__(self, phi1: PreorderEvaluator, phi2: PreorderEvaluator):
        k1 = phi1.domain_level
        k2 = phi2.zero_level
        if k1 is not None and k2 is not None and k1 != k2:
            raise ValueError(
                f"level mismatch: inner evaluator lives on G_{k1} but outer "
                f"is relative to G_{k2}")
        if phi1.zero_level is not None and k2 is not None \
                and phi1.zero_level >= k2:
            raise ValueError(
                f"level mismatch: need l < k, got l={phi1.zero_level}, k={k2}")
        self.phi1 = phi1
        self.phi2 = phi2
        self.group = phi2.group
        self.zero_level = phi1.zero_level
        self.domain_level = phi2.domain_level

    def evaluate(self, g) -> int:
        s = self.phi2.evaluate(g)
        if s != 0:
            return s
        return self.phi1.evaluate(g)


class RestrictedEvaluator(PreorderEvaluator):
    """The same preorder, with domain cut down to ``G_k``."""

    def __init__(self, phi: PreorderEvaluator, k: int):
        if phi.zero_level is not None and phi.zero_level >= k:
            raise ValueError(f"restriction level {k} must exceed base level "
                             f"{phi.zero_level}")
        self.phi = phi
        self.group = phi.group
        self.zero_level = phi.zero_level
        self.domain_level = k

    def evaluate(self, g) -> int:
        self._require(g)
        return self.phi.evaluate(g)


class AboveLevelEvaluator(PreorderEvaluator):
    """Quotient-side part of a split: zero on all of ``G_k``."""

    def __init__(self, phi: PreorderEvaluator, k: int):
        self.phi = phi
        self.group = phi.group
        self.zero_level = k
        self.domain_level = phi.domain_level

    def evaluate(self, g) -> int:
        if level_membership(g, self.zero_level):
            return 0
        return self.phi.evaluate(g)


def mu(phi1: PreorderEvaluator, phi2: PreorderEvaluator) -> MuEvaluator:
    """Combine a preorder on ``G_k`` rel ``G_l`` with one on ``G`` rel ``G_k``."""
    return MuEvaluator(phi1, phi2)


def rho(phi: PreorderEvaluator, k: int) -> tuple[RestrictedEvaluator,
                                                 AboveLevelEvaluator]:
    """Split a preorder at an intermediate level ``k``.

    Returns ``(phi1, phi2)`` with cones ``P & G_k`` and ``P - G_k``.  The
    split is only meaningful when ``G_k`` is convex for ``phi``; that is
    the caller's responsibility (audits will expose a non-convex split).
    """
    return RestrictedEvaluator(phi, k), AboveLevelEvaluator(phi, k)


def restrict(phi: PreorderEvaluator, k: int) -> RestrictedEvaluator:
    """Restriction of the preorder to the subgroup ``G_k``."""
    return RestrictedEvaluator(phi, k)


@dataclass(frozen=True)
class JumpMorphism:
    """Additive height function of one series factor.

    For ``g`` in ``G_{i+1}`` the value is ``eps_{i+1} * e_{i+1}(g)``; it
    vanishes exactly on ``G_i`` and is additive because the top exponent
    of a product of ``G_{i+1}``-elements adds.
    """

    cone: SignVectorCone
    jump_index: int

    def __post_init__(self):
        if not self.cone.base_level <= self.jump_index < self.cone.presentation.m:
            raise ValueError(
                f"jump index must be in {self.cone.base_level}.."
                f"{self.cone.presentation.m - 1}")

    @property
    def sign(self) -> int:
        return self.cone.eps_at(self.jump_index + 1)

    def tau(self, g: Vector) -> int:
        if not level_membership(g, self.jump_index + 1):
            raise EvaluationDomainError(
                f"element {g} outside G_{self.jump_index + 1}")
        return self.sign * g[self.jump_index]


def jump_morphism(cone: SignVectorCone, i: int) -> JumpMorphism:
    """Order-preserving height function for the jump ``(G_i, G_{i+1})``."""
    return JumpMorphism(cone, i)


class JumpEvaluator(PreorderEvaluator):
    """Preorder induced on ``G_{i+1}`` relative to ``G_i``: one factor's sign."""

    def __init__(self, cone: SignVectorCone, i: int):
        if not cone.base_level <= i < cone.presentation.m:
            raise ValueError(
                f"jump index must be in {cone.base_level}..{cone.presentation.m - 1}")
        self.cone = cone
        self.jump_index = i
        self.group = cone.group
        self.zero_level = i
        self.domain_level = i + 1

    def evaluate(self, g: Vector) -> int:
        self._require(g)
        return self.cone.eps_at(self.jump_index + 1) * sign(g[self.jump_index])


def induced_jump_preorder(cone: SignVectorCone, i: int) -> JumpEvaluator:
    """The preorder a cone induces on the jump ``(G_i, G_{i+1})``."""
    return JumpEvaluator(cone, i)


class PerturbedEvaluator(PreorderEvaluator):
    """An evaluator with finitely many values overridden (for falsification)."""

    def __init__(self, base: PreorderEvaluator, overrides: dict):
        self.base = base
        self.overrides = dict(overrides)
        self.group = base.group
        self.zero_level = base.zero_level
        self.domain_level = base.domain_level

    def evaluate(self, g) -> int:
        if g in self.overrides:
            return self.overrides[g]
        return self.base.evaluate(g)


class TableEvaluator(PreorderEvaluator):
    """Evaluator backed by an explicit (element, sign) table.

    Elements outside the table are outside the declared domain; audits
    skip them and report coverage.
    """

    def __init__(self, group: GroupOps, values: dict,
                 zero_level: int | None = None):
        self.group = group
        self.values = dict(values)
        self.zero_level = zero_level
        self.domain_level = None

    def defined_on(self, g) -> bool:
        return g in self.values

    def evaluate(self, g) -> int:
        try:
            return self.values[g]
        except KeyError:
            raise EvaluationDomainError(f"element {g} not in value table") from None


class FunctionalEvaluator(PreorderEvaluator):
    """Sign of an integer linear functional on a free abelian presentation.

    The zero set is the kernel subgroup of the functional, which is a
    series level only in degenerate cases; with ``tie_break`` set, ties
    are broken lexicographically with the given signs, shrinking the
    zero set to the identity.
    """

    def __init__(self, presentation: RSPresentation, coefficients: tuple[int, ...],
                 tie_break: tuple[int, ...] | None = None):
        if len(coefficients) != presentation.m:
            raise ValueError("one coefficient per generator required")
        self.presentation = presentation
        self.coefficients = tuple(coefficients)
        self.tie_break = tuple(tie_break) if tie_break is not None else None
        self.group = PresentationGroup(presentation)
        self.zero_level = None
        self.domain_level = None

    def evaluate(self, g: Vector) -> int:
        value = sum(c * e for c, e in zip(self.coefficients, g))
        if value != 0 or self.tie_break is None:
            return sign(value)
        for eps, e in zip(self.tie_break, g):
            if e != 0:
                return eps * sign(e)
        return 0

    def __repr__(self):
        return f"FunctionalEvaluator{self.coefficients}"


def evaluators_agree_on(phi: PreorderEvaluator, psi: PreorderEvaluator,
                        elements) -> bool:
    """Pointwise agreement on all given elements both can evaluate."""
    for g in elements:
        if phi.defined_on(g) != psi.defined_on(g):
            return False
        if phi.defined_on(g) and phi.evaluate(g) != psi.evaluate(g):
            return False
    return True
