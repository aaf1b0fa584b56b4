"""Abnormal polynomials in adapted coordinates and the derivation action.

In exponential coordinates of the second kind adapted to the deg-left-right
Hall basis, the abnormal polynomial of a vector Z and covector lam expands as

    sum over multi-indices I of  lam(ad_{v_n}^{i_n} ... ad_{v_1}^{i_1} Z) / I!
                                 times x_{v_1}^{i_1} ... x_{v_n}^{i_n},

with the variables v_1 < ... < v_n in increasing order.  The expansion is
computed by a depth-first walk over multi-indices that reuses the iterated
bracket of the parent index and prunes once it vanishes.

The same calculus realizes arbitrary polynomials as abnormal polynomials of
the minimal word of a layer, and through that realization implements the
action of the free Lie algebra on its polynomial ring by derivations.
"""

from __future__ import annotations

import math
from fractions import Fraction

from . import hall, liealg
from .hall import HallWord
from .liealg import AlgebraContext, ContextMismatchError, LieElement
from .polyring import Monomial, Polynomial


class Covector:
    """Sparse rational functional on the Hall basis of a context."""

    __slots__ = ("context", "components")

    def __init__(self, context, components):
        self.context = context
        self.components = {}
        for w, c in components.items():
            c = Fraction(c)
            if c:
                if w not in context.index:
                    raise ValueError("%r is not a basis word of the context" % (w,))
                self.components[w] = c

    def is_zero(self):
        return not self.components

    def __eq__(self, other):
        if not isinstance(other, Covector):
            return NotImplemented
        return (self.context.same_algebra(other.context)
                and self.components == other.components)

    def apply(self, element):
        """Pair the covector with a Lie element."""
        if isinstance(element, LieElement):
            terms = element.terms
        else:
            terms = element
        comps = self.components
        if len(comps) < len(terms):
            return sum((comps[w] * terms[w] for w in comps if w in terms),
                       Fraction(0))
        return sum((terms[w] * comps[w] for w in terms if w in comps),
                   Fraction(0))

    def to_json(self):
        ctx = self.context
        return {
            "context": {"rank": ctx.rank, "step": ctx.step,
                        "quotient_layer": ctx.quotient_layer},
            "components": {ctx.basis.word_text(w): str(c)
                           for w, c in sorted(self.components.items(),
                                              key=lambda kv: kv[0].key)},
        }

    @classmethod
    def from_json(cls, data):
        meta = data["context"]
        ctx = AlgebraContext.get(meta["rank"], meta["step"], meta.get("quotient_layer"))
        comps = {ctx.basis.parse_word(text): Fraction(value)
                 for text, value in data["components"].items()}
        return cls(ctx, comps)

    def __repr__(self):
        return "Covector(%r)" % (self.components,)


def iter_bracket_monomials(ctx, seed_terms, variables, room):
    """Yield (exponents, bracket) for every multi-index with nonzero bracket.

    ``exponents`` is a list of (word, exponent) pairs and ``bracket`` the
    sparse iterated bracket ad_{v_n}^{i_n} ... ad_{v_1}^{i_1}(seed), where the
    variables act in increasing order.  Multi-indices are restricted to
    weighted degree <= room; children reuse the parent bracket.
    """
    vs = [v for v in variables if v.degree <= room]
    pair_bracket = ctx.pair_bracket
    expo = []
    n = len(vs)

    def walk(pos, current, left):
        if pos == n:
            yield list(expo), current
            return
        yield from walk(pos + 1, current, left)
        v = vs[pos]
        d = v.degree
        e = 0
        while (e + 1) * d <= left:
            nxt = {}
            for w, c in current.items():
                for w2, k in pair_bracket(v, w).items():
                    total = nxt.get(w2, 0) + c * k
                    if total:
                        nxt[w2] = total
                    else:
                        del nxt[w2]
            if not nxt:
                break
            e += 1
            current = nxt
            expo.append((v, e))
            yield from walk(pos + 1, current, left - e * d)
            expo.pop()

    if seed_terms:
        yield from walk(0, dict(seed_terms), room)


def coordinate_variables(ctx, vector=None):
    """The variables entering the abnormal polynomials of ``vector``.

    In a quotient context, a vector supported in degrees >= m only sees the
    variables of degree <= m - 1; otherwise all basis words act.
    """
    m = ctx.quotient_layer
    if m is not None and vector is not None and not vector.is_zero() \
            and vector.min_degree() >= m:
        return [w for w in ctx.words if w.degree <= m - 1]
    return list(ctx.words)


def abnormal_polynomial(vector, covector):
    """The abnormal polynomial of a Lie element for a covector."""
    if not isinstance(vector, LieElement):
        raise TypeError("vector must be a LieElement")
    ctx = vector.context
    if not ctx.same_algebra(covector.context):
        raise ContextMismatchError("vector and covector contexts differ")
    if vector.is_zero():
        return Polynomial.zero()
    room = ctx.step - vector.min_degree()
    variables = coordinate_variables(ctx, vector)
    out = {}
    for expo, current in iter_bracket_monomials(ctx, vector.terms, variables, room):
        value = covector.apply(current)
        if value:
            denominator = 1
            for _, e in expo:
                denominator *= math.factorial(e)
            out[Monomial(expo)] = value / denominator
    return Polynomial(out)


def realize_polynomial(poly, layer, ctx):
    """A covector whose layer-``layer`` minimal-word abnormal polynomial is ``poly``.

    The context must be the quotient at the same layer; the polynomial may
    only use variables of degree <= layer - 1 and must have weighted degree
    <= step - layer.  The covector is supported on the words obtained by
    bracketing the variables of each monomial onto the minimal word, with
    coefficients scaled by the multi-index factorial.
    """
    if ctx.rank < 2:
        raise ValueError("realization needs rank >= 2")
    if layer < 2:
        raise ValueError("layer must be >= 2")
    if ctx.quotient_layer != layer:
        raise ValueError("context must be the quotient at layer %d" % layer)
    if poly.weighted_degree() > ctx.step - layer:
        raise ValueError("polynomial degree exceeds step - layer")
    base = hall.minimal_layer_word(layer)
    components = {}
    for mono, coef in poly.terms.items():
        word = base
        scale = 1
        for v, e in mono.powers:
            if v.degree > layer - 1:
                raise ValueError("variable %r has degree >= layer" % (v,))
            scale *= math.factorial(e)
            for _ in range(e):
                word = hall.hall_pair(v, word)
        components[word] = coef * scale
    return Covector(ctx, components)


def embedding_context(rank, step, layer):
    return AlgebraContext.get(rank, step, layer)


def _max_generator(terms, poly):
    top = 1
    for w in terms:
        top = max(top, max(w.word))
    for v in poly.variables():
        top = max(top, max(v.word))
    return top


def derive(vector, poly, rank=None, extra_step=0):
    """Left-invariant derivative of a polynomial by a free Lie element.

    ``vector`` may be a HallWord or a LieElement; the polynomial is realized
    as an abnormal polynomial of the minimal word of the layer just above its
    variables, differentiated through the bracket, and expanded back.  The
    result does not depend on the embedding; ``extra_step`` enlarges the
    embedding step (used to exercise exactly that independence).
    """
    if isinstance(vector, HallWord):
        terms = {vector: Fraction(1)}
    elif isinstance(vector, LieElement):
        terms = vector.terms
    else:
        raise TypeError("vector must be a HallWord or LieElement")
    if poly.is_zero() or not terms:
        return Polynomial.zero()
    layer = 1 + max((v.degree for v in poly.variables()), default=1)
    if rank is None:
        rank = 2
    rank = max(rank, 2, _max_generator(terms, poly))
    step = layer + max(poly.weighted_degree(), 0) + extra_step
    ctx = embedding_context(rank, step, layer)
    lam = realize_polynomial(poly, layer, ctx)
    base = ctx.element(hall.minimal_layer_word(layer))
    projected = ctx.project(terms)
    moved = liealg.bracket(projected, base)
    if moved.is_zero():
        return Polynomial.zero()
    return abnormal_polynomial(moved, lam)
