"""Sparse multivariate polynomials over exact rationals in Hall-word variables.

Variables are Hall words and carry their degree as a weight, so the weighted
degree of a monomial is sum(exponent * degree).  All arithmetic is exact.
The text format is ``1/2*x[1]^2 - x[1]*x[2] + 2*x[12]`` with a parser for the
same grammar.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

from . import hall
from .hall import CapExceededError


class InexactGradientError(ValueError):
    """A claimed coordinate gradient fails the mixed-partial test."""

    def __init__(self, pair):
        self.pair = pair
        super().__init__("mixed partials disagree for variables %r, %r" % pair)


class Monomial:
    """An immutable product of powers of Hall-word variables."""

    __slots__ = ("powers", "weighted_degree", "_hash")

    def __init__(self, powers):
        # powers: iterable of (word, exponent); normalized to ascending order.
        items = tuple(sorted(((w, e) for w, e in powers if e != 0), key=lambda p: p[0].key))
        if any(e < 0 for _, e in items):
            raise ValueError("negative exponent in monomial")
        self.powers = items
        self.weighted_degree = sum(w.degree * e for w, e in items)
        self._hash = hash(items)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self.powers == other.powers

    def __mul__(self, other):
        merged = dict(self.powers)
        for w, e in other.powers:
            merged[w] = merged.get(w, 0) + e
        return Monomial(merged.items())

    def divide(self, other):
        """self / other, or None when not divisible."""
        merged = dict(self.powers)
        for w, e in other.powers:
            rest = merged.get(w, 0) - e
            if rest < 0:
                return None
            if rest:
                merged[w] = rest
            else:
                del merged[w]
        return Monomial(merged.items())

    def exponent(self, word):
        for w, e in self.powers:
            if w is word:
                return e
        return 0

    def sort_key(self):
        # Graded, then lexicographic with smaller variables and higher
        # exponents first; gives the conventional x1^2, x1*x2, x2^2, x12 order.
        return (self.weighted_degree, tuple((w.key, -e) for w, e in self.powers))

    def factorial(self):
        out = 1
        for _, e in self.powers:
            out *= math.factorial(e)
        return out

    def __repr__(self):
        return format_monomial(self, 9)


MONOMIAL_ONE = Monomial(())


class Polynomial:
    """Sparse polynomial: mapping Monomial -> nonzero Fraction."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        self.terms = {}
        if terms:
            for mono, coef in (terms.items() if isinstance(terms, dict) else terms):
                coef = Fraction(coef)
                if coef:
                    prev = self.terms.get(mono)
                    if prev is None:
                        self.terms[mono] = coef
                    else:
                        total = prev + coef
                        if total:
                            self.terms[mono] = total
                        else:
                            del self.terms[mono]

    @staticmethod
    def zero():
        return Polynomial()

    @staticmethod
    def constant(value):
        return Polynomial({MONOMIAL_ONE: Fraction(value)})

    @staticmethod
    def variable(word):
        return Polynomial({Monomial(((word, 1),)): Fraction(1)})

    def is_zero(self):
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def coefficient(self, mono):
        return self.terms.get(mono, Fraction(0))

    def constant_term(self):
        return self.terms.get(MONOMIAL_ONE, Fraction(0))

    def weighted_degree(self):
        """Max weighted degree over terms; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(m.weighted_degree for m in self.terms)

    def variables(self):
        out = set()
        for mono in self.terms:
            for w, _ in mono.powers:
                out.add(w)
        return out

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(other)
        out = dict(self.terms)
        for mono, coef in other.terms.items():
            total = out.get(mono, 0) + coef
            if total:
                out[mono] = total
            else:
                out.pop(mono, None)
        p = Polynomial()
        p.terms = out
        return p

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        p = Polynomial()
        p.terms = {m: -c for m, c in self.terms.items()}
        return p

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            scale = Fraction(other)
            if not scale:
                return Polynomial()
            p = Polynomial()
            p.terms = {m: c * scale for m, c in self.terms.items()}
            return p
        out = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = m1 * m2
                total = out.get(mono, 0) + c1 * c2
                if total:
                    out[mono] = total
                else:
                    del out[mono]
        p = Polynomial()
        p.terms = out
        return p

    __rmul__ = __mul__

    def __pow__(self, n):
        if n < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def partial_derivative(self, word):
        out = {}
        for mono, coef in self.terms.items():
            e = mono.exponent(word)
            if e == 0:
                continue
            lowered = dict(mono.powers)
            if e == 1:
                del lowered[word]
            else:
                lowered[word] = e - 1
            m = Monomial(lowered.items())
            total = out.get(m, 0) + coef * e
            if total:
                out[m] = total
            else:
                del out[m]
        p = Polynomial()
        p.terms = out
        return p

    def antiderivative(self, word):
        """Formal antiderivative in one variable, no constant term."""
        out = {}
        for mono, coef in self.terms.items():
            e = mono.exponent(word)
            raised = dict(mono.powers)
            raised[word] = e + 1
            out[Monomial(raised.items())] = coef / (e + 1)
        p = Polynomial()
        p.terms = out
        return p

    def substitute(self, mapping):
        """Substitute polynomials for variables (identity when unmapped)."""
        out = Polynomial()
        for mono, coef in self.terms.items():
            term = Polynomial.constant(coef)
            for w, e in mono.powers:
                repl = mapping.get(w)
                factor = repl ** e if repl is not None else Polynomial({Monomial(((w, e),)): 1})
                term = term * factor
            out = out + term
        return out

    def evaluate(self, assignment):
        """Exact evaluation; unassigned variables count as zero."""
        total = Fraction(0)
        for mono, coef in self.terms.items():
            value = coef
            for w, e in mono.powers:
                x = assignment.get(w)
                if not x:
                    value = 0
                    break
                value *= Fraction(x) ** e
            total += value
        return total

    def evaluate_float(self, assignment):
        total = 0.0
        for mono, coef in self.terms.items():
            value = float(coef)
            for w, e in mono.powers:
                value *= assignment.get(w, 0.0) ** e
            total += value
        return total

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda kv: kv[0].sort_key())

    def text(self, rank):
        return format_polynomial(self, rank)

    def __repr__(self):
        return format_polynomial(self, 9)


def format_monomial(mono, rank):
    if not mono.powers:
        return "1"
    parts = []
    for w, e in mono.powers:
        var = "x[%s]" % hall.format_word(w, rank)
        parts.append(var if e == 1 else "%s^%d" % (var, e))
    return "*".join(parts)


def format_polynomial(poly, rank):
    if poly.is_zero():
        return "0"
    chunks = []
    for mono, coef in poly.sorted_terms():
        sign = "-" if coef < 0 else "+"
        mag = -coef if coef < 0 else coef
        if not mono.powers:
            body = str(mag)
        elif mag == 1:
            body = format_monomial(mono, rank)
        else:
            body = "%s*%s" % (mag, format_monomial(mono, rank))
        if not chunks:
            chunks.append(body if sign == "+" else "-" + body)
        else:
            chunks.append("%s %s" % (sign, body))
    return " ".join(chunks)


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|x\[([0-9.]+)\]|x(\d+)|([()+*^-]))")


def _tokenize(text):
    pos = 0
    tokens = []
    while pos < len(text):
        match = _TOKEN.match(text, pos)
        if match is None or match.end() == pos:
            if text[pos:].strip():
                raise ValueError("cannot tokenize %r" % text[pos:pos + 10])
            break
        number, bracket_word, gen_word, op = match.groups()
        if number is not None:
            tokens.append(("num", Fraction(number)))
        elif bracket_word is not None:
            tokens.append(("word", bracket_word))
        elif gen_word is not None:
            tokens.append(("gen", int(gen_word)))
        else:
            tokens.append((op, None))
        pos = match.end()
    return tokens


class _Parser:
    """Recursive-descent parser for the polynomial grammar."""

    def __init__(self, tokens, rank, word_lookup):
        self.tokens = tokens
        self.pos = 0
        self.rank = rank
        self.word_lookup = word_lookup

    def peek(self):
        return self.tokens[self.pos][0] if self.pos < len(self.tokens) else None

    def take(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def parse(self):
        poly = self.expression()
        if self.pos != len(self.tokens):
            raise ValueError("trailing input at token %d" % self.pos)
        return poly

    def expression(self):
        sign = 1
        while self.peek() in ("+", "-"):
            if self.take()[0] == "-":
                sign = -sign
        poly = self.term() * sign
        while self.peek() in ("+", "-"):
            negative = self.take()[0] == "-"
            nxt = self.term()
            poly = poly - nxt if negative else poly + nxt
        return poly

    def term(self):
        poly = self.factor()
        while self.peek() == "*":
            self.take()
            poly = poly * self.factor()
        return poly

    def factor(self):
        base = self.atom()
        if self.peek() == "^":
            self.take()
            kind, value = self.take()
            if kind != "num" or value.denominator != 1:
                raise ValueError("exponent must be an integer")
            base = base ** int(value)
        return base

    def atom(self):
        kind, value = self.take() if self.pos < len(self.tokens) else (None, None)
        if kind == "num":
            return Polynomial.constant(value)
        if kind == "gen":
            if value > self.rank:
                raise ValueError("generator x%d exceeds rank %d" % (value, self.rank))
            return Polynomial.variable(hall.generator(value))
        if kind == "word":
            return Polynomial.variable(self.word_lookup(value))
        if kind == "-":
            return -self.factor()
        if kind == "(":
            poly = self.expression()
            kind, _ = self.take() if self.pos < len(self.tokens) else (None, None)
            if kind != ")":
                raise ValueError("unbalanced parentheses")
            return poly
        raise ValueError("unexpected token %r" % (kind,))


def parse_polynomial(text, rank):
    """Parse the text polynomial format for the given rank."""
    cache = {}

    def lookup(word_text):
        w = cache.get(word_text)
        if w is None:
            letters = hall.parse_word_letters(word_text, rank)
            basis = hall.HallBasis(rank, len(letters))
            w = basis.parse_word(word_text)
            cache[word_text] = w
        return w

    return _Parser(_tokenize(text), rank, lookup).parse()


def staircase_antiderivative(gradient):
    """Reconstruct Q with the given coordinate gradient and Q(0) = 0.

    ``gradient`` is a list of (word, polynomial) pairs; integration runs from
    the highest variable downwards along the coordinate staircase from the
    origin.  The gradient must be exact; the offending mixed-partial pair is
    reported otherwise.
    """
    items = sorted(gradient, key=lambda kv: kv[0].key, reverse=True)
    words = [w for w, _ in items]
    if len(set(words)) != len(words):
        raise ValueError("duplicate variable in gradient")
    for i, (u, gu) in enumerate(items):
        for v, gv in items[i + 1:]:
            if gu.partial_derivative(v) != gv.partial_derivative(u):
                raise InexactGradientError((u, v))
    total = Polynomial.zero()
    remaining = {w: g for w, g in items}
    for w, _ in items:
        piece = remaining[w].antiderivative(w)
        total = total + piece
        for u, _ in items:
            if u < w:
                remaining[u] = remaining[u] - piece.partial_derivative(u)
    return total


def enumerate_monomials(variables, max_weighted_degree, cap=10_000_000):
    """All monomials of weighted degree <= bound in the given variables."""
    vs = sorted(variables, key=lambda w: w.key)
    out = []

    def extend(pos, prefix, room):
        if len(out) > cap:
            raise CapExceededError("monomial enumeration exceeds cap %d" % cap)
        if pos == len(vs):
            out.append(Monomial(prefix))
            return
        w = vs[pos]
        extend(pos + 1, prefix, room)
        e = 1
        while e * w.degree <= room:
            extend(pos + 1, prefix + [(w, e)], room - e * w.degree)
            e += 1

    if max_weighted_degree >= 0:
        extend(0, [], max_weighted_degree)
    out.sort(key=Monomial.sort_key)
    return out


def _poly_mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    return out


def _product_recurrence(multiplicities):
    """Integer recurrence data (W, V) for y = prod (1 - t^k)^(-a_k).

    W * y' = V * y with W = prod over distinct k of (1 - t^k) and
    V = sum_k a_k * k * t^(k-1) * W / (1 - t^k); both are small integer
    polynomials, so the series coefficients follow from a short exact
    recurrence instead of repeated cumulative sums.
    """
    ks = sorted(k for k, a in multiplicities.items() if a)
    w_poly = [1]
    for k in ks:
        factor = [0] * (k + 1)
        factor[0] = 1
        factor[k] = -1
        w_poly = _poly_mul(w_poly, factor)
    v_poly = [0] * max(len(w_poly) - 1, 1)
    for k in ks:
        partial = [1]
        for other in ks:
            if other != k:
                factor = [0] * (other + 1)
                factor[0] = 1
                factor[other] = -1
                partial = _poly_mul(partial, factor)
        scale = multiplicities[k] * k
        for i, c in enumerate(partial):
            if c:
                v_poly[i + k - 1] += scale * c
    return w_poly, v_poly


def weighted_count_stream(multiplicities):
    """Yield coefficients of prod (1 - t^k)^(-a_k) as exact integers."""
    if not any(multiplicities.values()):
        yield 1
        while True:
            yield 0
    w_poly, v_poly = _product_recurrence(multiplicities)
    window = len(w_poly)
    buf = [0] * window
    buf[0] = 1
    yield 1
    n = 0
    while True:
        total = 0
        for j, vj in enumerate(v_poly):
            if vj and j <= n:
                total += vj * buf[(n - j) % window]
        for i in range(1, window):
            wi = w_poly[i]
            if wi and i <= n + 1:
                total -= wi * (n + 1 - i) * buf[(n + 1 - i) % window]
        coeff, rem = divmod(total, n + 1)
        assert rem == 0
        n += 1
        buf[n % window] = coeff
        yield coeff


def weighted_count_series(multiplicities, order):
    """First coefficients (0..order) of prod (1 - t^k)^(-a_k)."""
    stream = weighted_count_stream(multiplicities)
    return [next(stream) for _ in range(order + 1)]


def poincare_coefficients(rank, layer, order):
    """Monomial counts per weighted degree for variables of degree < layer."""
    if layer < 2:
        raise ValueError("layer must be >= 2")
    multiplicities = {k: hall.layer_dimension(rank, k) for k in range(1, layer)}
    return weighted_count_series(multiplicities, order)
