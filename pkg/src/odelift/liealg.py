"""Free nilpotent Lie algebras and their commutator quotients.

An ``AlgebraContext`` fixes a rank r, a nilpotency step s, and optionally a
quotient layer m; the quotient kills every bracket of two elements that both
have degree >= m.  Elements are sparse rational combinations of the Hall
basis of the context.  Brackets of basis words are rewritten into the basis
with antisymmetry and the Jacobi identity; pair results are memoized per
context because they recur heavily in the iterated-bracket sums.
"""

from __future__ import annotations

import threading
from fractions import Fraction

from . import hall
from .hall import DEFAULT_BASIS_CAP, HallBasis


class ContextMismatchError(ValueError):
    """Operands belong to different algebra contexts."""


_context_cache = {}
_context_lock = threading.Lock()


class AlgebraContext:
    """A free nilpotent Lie algebra of given rank and step, or its quotient.

    With ``quotient_layer = m`` the algebra is the quotient by the ideal
    spanned by brackets of two elements of degree >= m; its Hall basis is the
    set of words whose right-spine left subtrees all have degree <= m - 1.
    """

    def __init__(self, rank, step, quotient_layer=None, cap=DEFAULT_BASIS_CAP,
                 cache_brackets=True):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        if step < 1:
            raise ValueError("step must be >= 1")
        if quotient_layer is not None and not 1 <= quotient_layer <= step:
            raise ValueError("quotient layer must lie in 1..step")
        self.rank = rank
        self.step = step
        self.quotient_layer = quotient_layer
        left_cap = None if quotient_layer is None else quotient_layer - 1
        words = hall.enumerate_words(rank, step, left_degree_cap=left_cap, cap=cap)
        self.basis = HallBasis(rank, step, words=words)
        self.words = self.basis.words
        self.index = self.basis.index
        self.cache_brackets = cache_brackets
        self._pair_cache = {}

    @classmethod
    def get(cls, rank, step, quotient_layer=None):
        """Shared, cached context instance for the given parameters."""
        key = (rank, step, quotient_layer)
        ctx = _context_cache.get(key)
        if ctx is None:
            with _context_lock:
                ctx = _context_cache.get(key)
                if ctx is None:
                    ctx = cls(rank, step, quotient_layer)
                    _context_cache[key] = ctx
        return ctx

    def descriptor(self):
        return (self.rank, self.step, self.quotient_layer)

    def same_algebra(self, other):
        return self.descriptor() == other.descriptor()

    def survives(self, word):
        return word.degree <= self.step and (
            self.quotient_layer is None or word.spine_bound <= self.quotient_layer - 1)

    def zero(self):
        return LieElement(self, {})

    def element(self, word, coefficient=1):
        if word not in self.index:
            raise ValueError("%r is not a basis word of this context" % (word,))
        return LieElement(self, {word: Fraction(coefficient)})

    def from_terms(self, terms):
        return LieElement(self, {w: Fraction(c) for w, c in terms.items() if c})

    def generators(self):
        return [self.words[i] for i in range(self.rank)]

    def project(self, terms):
        """Drop coefficients on words not surviving in this context."""
        return LieElement(self, {w: Fraction(c) for w, c in terms.items()
                                 if c and w in self.index})

    def pair_bracket(self, u, v):
        """Structure constants of [X_u, X_v] as a dict word -> int."""
        if u is v:
            return {}
        if v < u:
            return {w: -c for w, c in self.pair_bracket(v, u).items()}
        if u.degree + v.degree > self.step:
            return {}
        m = self.quotient_layer
        if m is not None and u.degree >= m and v.degree >= m:
            return {}
        if v.degree == 1 or v.left <= u:
            word = hall.hall_pair(u, v)
            assert word in self.index
            return {word: 1}
        cached = self._pair_cache.get((u, v))
        if cached is not None:
            return cached
        # [u, [v1, v2]] = [[u, v1], v2] + [v1, [u, v2]]; terminates because
        # recursive calls either lower the total degree or raise the smaller
        # word of the pair.
        v1, v2 = v.left, v.right
        out = {}
        for w, c in self.pair_bracket(u, v1).items():
            for w2, c2 in self.pair_bracket(w, v2).items():
                total = out.get(w2, 0) + c * c2
                if total:
                    out[w2] = total
                else:
                    del out[w2]
        for w, c in self.pair_bracket(u, v2).items():
            for w2, c2 in self.pair_bracket(v1, w).items():
                total = out.get(w2, 0) + c * c2
                if total:
                    out[w2] = total
                else:
                    del out[w2]
        if self.cache_brackets:
            self._pair_cache[(u, v)] = out
        return out

    def bracket_into(self, out, u, v, scale):
        """Accumulate scale * [X_u, X_v] into the dict ``out``."""
        for w, c in self.pair_bracket(u, v).items():
            total = out.get(w, 0) + scale * c
            if total:
                out[w] = total
            else:
                del out[w]

    def __repr__(self):
        if self.quotient_layer is None:
            return "AlgebraContext(rank=%d, step=%d)" % (self.rank, self.step)
        return "AlgebraContext(rank=%d, step=%d, quotient_layer=%d)" % (
            self.rank, self.step, self.quotient_layer)


class LieElement:
    """Sparse element of an AlgebraContext in its Hall basis."""

    __slots__ = ("context", "terms")

    def __init__(self, context, terms):
        self.context = context
        self.terms = terms

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def min_degree(self):
        """Smallest degree in the support; None for zero."""
        if not self.terms:
            return None
        return min(w.degree for w in self.terms)

    def __eq__(self, other):
        if not isinstance(other, LieElement):
            return NotImplemented
        return self.context.same_algebra(other.context) and self.terms == other.terms

    def __add__(self, other):
        _require_same(self, other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            total = out.get(w, 0) + c
            if total:
                out[w] = total
            else:
                del out[w]
        return LieElement(self.context, out)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return LieElement(self.context, {w: -c for w, c in self.terms.items()})

    def __mul__(self, scale):
        scale = Fraction(scale)
        if not scale:
            return self.context.zero()
        return LieElement(self.context, {w: c * scale for w, c in self.terms.items()})

    __rmul__ = __mul__

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: w.key):
            parts.append("%s*X[%r]" % (self.terms[w], w))
        return " + ".join(parts)


def _require_same(a, b):
    if not a.context.same_algebra(b.context):
        raise ContextMismatchError(
            "contexts %r and %r differ" % (a.context, b.context))


def bracket(a, b):
    """The Lie bracket of two elements, in Hall normal form."""
    _require_same(a, b)
    ctx = a.context
    out = {}
    for wu, cu in a.terms.items():
        for wv, cv in b.terms.items():
            ctx.bracket_into(out, wu, wv, cu * cv)
    return LieElement(ctx, out)


def apply_ad_word(exponents, target):
    """Iterated bracketing: exponent words are applied right to left.

    ``exponents`` is a list of (word, multiplicity) pairs as produced by
    ``hall.ad_factorization``; the rightmost word acts first.
    """
    ctx = target.context
    out = target
    for word, mult in reversed(list(exponents)):
        if mult < 1:
            raise ValueError("multiplicities must be >= 1")
        operand = ctx.element(word)
        for _ in range(mult):
            out = bracket(operand, out)
            if out.is_zero():
                return out
    return out


def lower_central_term(ctx, layer):
    """The basis words of degree >= layer surviving in the context."""
    if not 1 <= layer <= ctx.step:
        raise ValueError("layer must lie in 1..step")
    return [w for w in ctx.words if w.degree >= layer]
