"""Ramification classes with modulus parameter r and their constant terms.

For a genus g, a vector A of n integers summing to zero, a degree d and a
large enough modulus r, :func:`pixton_class` assembles the degree-d part
of the standard weighted sum over stable graphs and weightings mod r:

* each leg i contributes exp(a_i^2 psi_i / 2), i.e. a factor
  a_i^(2k) / (2^k k!) for psi-power k;
* each edge with side weights w, r - w contributes the expansion of
  (1 - exp(-w(r-w)(psi' + psi'')/2)) / (psi' + psi''), whose
  (psi' + psi'')-power (j-1) has coefficient (-1)^(j+1) (w(r-w))^j / (2^j j!);
* each graph is weighted by r^(-h1) and the stored-term convention carries
  the 1/#Aut factor.

The weighting sums are evaluated in closed form (no enumeration over the
r^h1 weightings), so r can be large.  For r greater than an explicit bound
the coefficients agree with polynomials in r of degree at most 2d;
:func:`r_polynomial` recovers those polynomials by exact interpolation at
2d+3 consecutive admissible values and verifies them against three more
held-out values, raising on any mismatch.  The constant term (value at
r = 0) of the degree-g polynomial class is the double ramification cycle
:func:`dr_cycle`.

:func:`vanishing_check` pairs the constant term in degree d > g against
generators of the complementary degree and reports whether all pairings
vanish exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb, factorial
from typing import Iterator, Sequence

from .intersection import (
    PRODUCT_DIMENSION_BOUND,
    DecoratedStratum,
    TautClass,
    generators_of_degree,
)
from .qpoly import QPoly, newton_interpolate
from .stable_graphs import StableGraph, enumerate_stable_graphs
from .weightsums import weighting_power_sums

__all__ = [
    "PolynomialityError",
    "HeldOutMismatchError",
    "admissible_r_bound",
    "pixton_class",
    "RPolynomialClass",
    "r_polynomial",
    "constant_term",
    "dr_cycle",
    "vanishing_check",
]


class PolynomialityError(ArithmeticError):
    """Raised when interpolated coefficients exceed the expected degree."""


class HeldOutMismatchError(ArithmeticError):
    """Raised when the interpolated class disagrees with a held-out sample."""


def _validate_problem(g: int, A: Sequence[int], d: int) -> None:
    n = len(A)
    if g < 0 or d < 0:
        raise ValueError("genus and degree must be nonnegative")
    if sum(A) != 0:
        raise ValueError("the ramification vector must sum to zero")
    if 2 * g - 2 + n <= 0:
        raise ValueError(f"({g}, {n}) is not a stable type")


def admissible_r_bound(A: Sequence[int], d: int) -> int:
    """Moduli r strictly above this bound are admissible for degree d."""
    max_abs = max((abs(a) for a in A), default=0)
    return d * max(1, max_abs) + sum(abs(a) for a in A) + 2


@lru_cache(maxsize=None)
def _graphs_for(g: int, n: int) -> tuple[StableGraph, ...]:
    return tuple(enumerate_stable_graphs(g, n))


def _compositions_positive(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Tuples of ``parts`` integers >= 1 summing to ``total``."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions_positive(total - first, parts - 1):
            yield (first,) + rest


def _leg_exponent_vectors(
    A: Sequence[int], budget: int
) -> Iterator[tuple[int, ...]]:
    """psi exponent vectors with zero entries wherever a_i = 0, sum <= budget."""
    support = [i for i, a in enumerate(A) if a != 0]

    def rec(pos: int, remaining: int, acc: list[int]) -> Iterator[tuple[int, ...]]:
        if pos == len(support):
            vec = [0] * len(A)
            for i, k in zip(support, acc):
                vec[i] = k
            yield tuple(vec)
            return
        for k in range(remaining + 1):
            acc.append(k)
            yield from rec(pos + 1, remaining - k, acc)
            acc.pop()

    yield from rec(0, budget, [])


@dataclass(frozen=True)
class _Template:
    """Structural data of the class, independent of the modulus r.

    ``blocks`` maps (graph index, exponent profile) to a list of
    (canonical stratum, structural coefficient); the r-dependent factor for
    a block is r^(-h1) times the weighting power sum of the profile.
    """

    g: int
    A: tuple[int, ...]
    d: int
    graphs: tuple[StableGraph, ...]
    blocks: dict[tuple[int, tuple[int, ...]], list[tuple[DecoratedStratum, Fraction]]]


@lru_cache(maxsize=None)
def _build_template(g: int, A: tuple[int, ...], d: int) -> _Template:
    n = len(A)
    graphs = _graphs_for(g, n)
    blocks: dict[tuple[int, tuple[int, ...]], list[tuple[DecoratedStratum, Fraction]]] = {}
    for gi, graph in enumerate(graphs):
        n_edges = graph.n_edges
        if n_edges > d:
            continue
        for leg_vec in _leg_exponent_vectors(A, d - n_edges):
            leg_coeff = Fraction(1)
            for i, k in enumerate(leg_vec):
                if k:
                    leg_coeff *= Fraction(A[i] ** (2 * k), 2**k * factorial(k))
            edge_budget = d - sum(leg_vec)
            if n_edges == 0:
                if edge_budget != 0:
                    continue
                profiles: Iterator[tuple[int, ...]] = iter([()])
            else:
                if edge_budget < n_edges:
                    continue
                profiles = _compositions_positive(edge_budget, n_edges)
            for profile in profiles:
                edge_coeff = Fraction(1)
                for j in profile:
                    sign = 1 if (j + 1) % 2 == 0 else -1
                    edge_coeff *= Fraction(sign, 2**j * factorial(j))
                block = blocks.setdefault((gi, profile), [])
                for splits in _edge_splits(profile):
                    split_coeff = 1
                    for j, (alpha, _beta) in zip(profile, splits):
                        split_coeff *= comb(j - 1, alpha)
                    stratum = DecoratedStratum(
                        graph, leg_vec, splits, ((),) * graph.n_vertices
                    ).canonical()
                    block.append(
                        (stratum, leg_coeff * edge_coeff * split_coeff)
                    )
    return _Template(g, A, d, graphs, blocks)


def _edge_splits(profile: tuple[int, ...]) -> Iterator[tuple[tuple[int, int], ...]]:
    """All ways to split each edge's power j into side exponents (a, b),
    a + b = j - 1."""
    if not profile:
        yield ()
        return
    first, rest = profile[0], profile[1:]
    for alpha in range(first):
        for tail in _edge_splits(rest):
            yield ((alpha, first - 1 - alpha),) + tail


def pixton_class(g: int, A: Sequence[int], d: int, r: int) -> TautClass:
    """The degree-d part of the r-parametrised class, at a specific modulus.

    Requires ``r > admissible_r_bound(A, d)`` so that the coefficients lie
    in the polynomial regime.
    """
    _validate_problem(g, A, d)
    A = tuple(int(a) for a in A)
    bound = admissible_r_bound(A, d)
    if r <= bound:
        raise ValueError(
            f"modulus {r} is not admissible for this problem (needs r > {bound})"
        )
    return _evaluate_template(_build_template(g, A, d), r)


def _evaluate_template(template: _Template, r: int) -> TautClass:
    n = len(template.A)
    out = TautClass(template.g, n)
    by_graph: dict[int, list[tuple[int, ...]]] = {}
    for gi, profile in template.blocks:
        by_graph.setdefault(gi, []).append(profile)
    for gi, profiles in by_graph.items():
        graph = template.graphs[gi]
        sums = weighting_power_sums(graph, template.A, r, profiles)
        h1 = graph.h1
        scale = Fraction(1, r**h1)
        for profile in profiles:
            factor = sums[profile] * scale
            if factor == 0:
                continue
            for stratum, coeff in template.blocks[(gi, profile)]:
                out._accumulate(stratum, coeff * factor)
    return out


@dataclass
class RPolynomialClass:
    """A tautological class with coefficients polynomial in the modulus r."""

    taut: TautClass  # coefficients are QPoly in r
    samples: list[int]
    held_out: list[int]

    def at(self, r: int) -> TautClass:
        return self.taut.evaluate_poly_coefficients(r)


def r_polynomial(
    g: int, A: Sequence[int], d: int, samples: Sequence[int] | None = None
) -> RPolynomialClass:
    """Interpolate the class coefficients as exact polynomials in r.

    Samples the class at 2d+3 consecutive admissible moduli (the expected
    degree in r is at most 2d), interpolates every stratum coefficient,
    and verifies the result against three further held-out moduli.  A
    degree overflow raises :class:`PolynomialityError`; a held-out
    disagreement raises :class:`HeldOutMismatchError`.

    An explicit ``samples`` list (at least 2d+3 distinct admissible moduli)
    overrides the default schedule; held-out moduli are then taken just
    above its maximum.
    """
    _validate_problem(g, A, d)
    A = tuple(int(a) for a in A)
    bound = admissible_r_bound(A, d)
    if samples is None:
        r0 = bound + 1
        samples = [r0 + i for i in range(2 * d + 3)]
        held_out = [r0 + 2 * d + 3 + i for i in range(3)]
    else:
        samples = sorted({int(r) for r in samples})
        if len(samples) < 2 * d + 3:
            raise ValueError(
                f"need at least {2 * d + 3} distinct sample moduli for degree {d}"
            )
        if samples[0] <= bound:
            raise ValueError(
                f"sample moduli must exceed the admissibility bound {bound}"
            )
        held_out = [samples[-1] + 1 + i for i in range(3)]
    template = _build_template(g, A, d)
    sampled = {r: _evaluate_template(template, r) for r in samples}
    strata: set[DecoratedStratum] = set()
    for cls in sampled.values():
        strata.update(cls.terms)
    poly_terms: dict[DecoratedStratum, QPoly] = {}
    for stratum in strata:
        points = [
            (r, sampled[r].terms.get(stratum, Fraction(0))) for r in samples
        ]
        poly = newton_interpolate(points)
        if poly.degree > 2 * d:
            raise PolynomialityError(
                f"coefficient degree {poly.degree} exceeds the bound {2 * d}"
            )
        if poly:
            poly_terms[stratum] = poly
    taut = TautClass(g, len(A))
    for stratum, poly in poly_terms.items():
        taut.terms[stratum] = poly
    result = RPolynomialClass(taut, samples, held_out)
    for r in held_out:
        direct = _evaluate_template(template, r)
        if result.at(r) != direct:
            raise HeldOutMismatchError(
                f"interpolated class disagrees with the direct build at r={r}"
            )
    return result


def constant_term(cls: "RPolynomialClass | TautClass") -> TautClass:
    """The r^0 part: evaluate every polynomial coefficient at r = 0."""
    taut = cls.taut if isinstance(cls, RPolynomialClass) else cls
    def at_zero(c):
        return c(Fraction(0)) if isinstance(c, QPoly) else c
    return taut.map_coefficients(at_zero)


def dr_cycle(g: int, A: Sequence[int]) -> TautClass:
    """The double ramification cycle: constant term in degree d = g."""
    return constant_term(r_polynomial(g, A, g))


def vanishing_check(
    g: int, A: Sequence[int], d: int, samples: Sequence[int] | None = None
) -> dict:
    """Pair the degree-d constant term against complementary generators.

    Returns a report with the polynomial class, its constant term, the list
    of pairings [generator label, exact value] and a verdict:

    * ``"pairing-null"``  -- every pairing vanishes (the full generator set
      in the complementary degree was available);
    * ``"FAIL"``          -- some pairing is nonzero;
    * ``"incomplete"``    -- all available pairings vanish but boundary
      generators were out of range for products.
    """
    _validate_problem(g, A, d)
    A = tuple(int(a) for a in A)
    rp = r_polynomial(g, A, d, samples=samples)
    const = constant_term(rp)
    n = len(A)
    dim = 3 * g - 3 + n
    c = dim - d
    pairings: list[tuple[str, Fraction]] = []
    incomplete = False
    if c >= 0:
        include_boundary = dim <= PRODUCT_DIMENSION_BOUND
        if c >= 1 and not include_boundary:
            incomplete = True
        for label, gen in generators_of_degree(
            g, n, c, include_boundary=include_boundary
        ):
            pairings.append((label, const.pair(gen)))
    if any(value != 0 for _label, value in pairings):
        verdict = "FAIL"
    elif incomplete:
        verdict = "incomplete"
    else:
        verdict = "pairing-null"
    integral = const.integrate() if d == dim else None
    return {
        "problem": {"g": g, "A": list(A), "d": d},
        "samples": list(rp.samples),
        "class": rp.taut.to_json_obj(),
        "constant_term": const.to_json_obj(),
        "constant_term_integral": None if integral is None else str(integral),
        "pairings": [[label, str(value)] for label, value in pairings],
        "verdict": verdict,
    }
