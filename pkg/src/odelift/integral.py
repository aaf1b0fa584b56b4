"""From a polynomial ODE to a polynomial first integral.

Given an ODE x' = P(x) with polynomial components, pick a nonzero orthogonal
vector of polynomials (Q_1, ..., Q_r), extend it to the family of all higher
order left-invariant derivatives X_w Q via the bracket recursion, and then
reconstruct the polynomial Q itself by converting the left-invariant gradient
to a coordinate gradient and integrating variable by variable.  The resulting
Q is constant along every trajectory of the ODE.
"""

from __future__ import annotations

from fractions import Fraction

from . import hall
from .abnormal import derive
from .polyring import Polynomial, parse_polynomial, staircase_antiderivative


class PolynomialODE:
    """A polynomial vector field on R^rank, one polynomial per component.

    Components may only use the horizontal variables x1..xr.
    """

    def __init__(self, rank, components):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        if len(components) != rank:
            raise ValueError("expected %d components, got %d" % (rank, len(components)))
        for poly in components:
            for v in poly.variables():
                if v.degree != 1 or v.gen > rank:
                    raise ValueError(
                        "ODE components must use x1..x%d only, found %r" % (rank, v))
        self.rank = rank
        self.components = list(components)

    @property
    def degree(self):
        return max((p.weighted_degree() for p in self.components), default=-1)

    def __eq__(self, other):
        if not isinstance(other, PolynomialODE):
            return NotImplemented
        return self.rank == other.rank and self.components == other.components

    @classmethod
    def parse(cls, expressions):
        rank = len(expressions)
        return cls(rank, [parse_polynomial(text, rank) for text in expressions])

    def to_json(self, initial_point=None):
        data = {"rank": self.rank,
                "components": [p.text(self.rank) for p in self.components]}
        if initial_point is not None:
            data["initial_point"] = [str(Fraction(x)) for x in initial_point]
        return data

    @classmethod
    def from_json(cls, data):
        ode = cls.parse(data["components"])
        if ode.rank != data.get("rank", ode.rank):
            raise ValueError("rank field disagrees with component count")
        point = data.get("initial_point")
        if point:
            ode = translate_ode(ode, [Fraction(x) for x in point])
        return ode

    def __repr__(self):
        return "PolynomialODE(%r)" % ([p.text(self.rank) for p in self.components],)


def translate_ode(ode, point):
    """Recenter the ODE at ``point``: substitute x_i -> x_i - point_i."""
    if len(point) != ode.rank:
        raise ValueError("point has wrong dimension")
    mapping = {}
    for i, value in enumerate(point, start=1):
        value = Fraction(value)
        g = hall.generator(i)
        mapping[g] = Polynomial.variable(g) - Polynomial.constant(value)
    return PolynomialODE(ode.rank, [p.substitute(mapping) for p in ode.components])


def orthogonalize(ode, override=None):
    """A nonzero polynomial vector orthogonal to the ODE components.

    The default is (P_2, -P_1, 0, ..., 0).  An override is accepted when it
    is orthogonal, not identically zero, and of degree at most the ODE degree.
    """
    ps = ode.components
    if override is not None:
        qs = list(override)
        if len(qs) != ode.rank:
            raise ValueError("override has wrong dimension")
        if all(q.is_zero() for q in qs):
            raise ValueError("override must not be identically zero")
        residual = Polynomial.zero()
        for p, q in zip(ps, qs):
            residual = residual + p * q
        if not residual.is_zero():
            raise ValueError("override is not orthogonal to the ODE")
        if max(q.weighted_degree() for q in qs) > ode.degree:
            raise ValueError("override degree exceeds the ODE degree")
        return qs
    if ode.rank < 2:
        raise ValueError("rank-1 systems admit no orthogonal vector")
    if ps[0].is_zero() and ps[1].is_zero():
        raise ValueError(
            "first two components vanish; supply an orthogonal override")
    qs = [Polynomial.zero() for _ in range(ode.rank)]
    qs[0] = ps[1]
    qs[1] = -ps[0]
    return qs


class DerivativeFamily:
    """All nonzero higher-order derivatives X_w Q of the first integral."""

    def __init__(self, rank, values, checked_degree):
        self.rank = rank
        self.values = values
        self.checked_degree = checked_degree

    def value(self, word):
        return self.values.get(word, Polynomial.zero())

    def support(self):
        return sorted(self.values, key=lambda w: w.key)

    def effective_bound(self):
        """Largest degree carrying a nonzero derivative."""
        return max((w.degree for w in self.values), default=0)


def derivative_family(gradient, rank):
    """Extend horizontal derivatives by X_w Q = X_u(X_v Q) - X_v(X_u Q).

    ``gradient`` lists Q_i = X_i Q for the generators.  Derivatives drop the
    weighted degree, so everything above max deg(Q_i) + 1 vanishes and the
    recursion stops there.
    """
    if len(gradient) != rank:
        raise ValueError("expected %d gradient entries" % rank)
    top = max((q.weighted_degree() for q in gradient), default=-1)
    if top < 0:
        raise ValueError("gradient is identically zero")
    limit = max(top + 1, 1)
    basis = hall.enumerate_hall_words(rank, limit)
    values = {}
    for i, q in enumerate(gradient):
        if not q.is_zero():
            values[hall.generator(i + 1)] = q
    for w in basis.words:
        if w.degree < 2:
            continue
        left, right = w.left, w.right
        f = derive(left, values.get(right, Polynomial.zero()), rank=rank) \
            - derive(right, values.get(left, Polynomial.zero()), rank=rank)
        if not f.is_zero():
            values[w] = f
    return DerivativeFamily(rank, values, limit)


def first_integral(family):
    """The polynomial Q with the given left-invariant derivatives, Q(0) = 0.

    The variables of Q are the Hall words up to the largest word with a
    nonzero derivative.  Left-invariant fields are unitriangular over the
    coordinate fields, so the coordinate gradient is solved top-down and then
    integrated along the coordinate staircase.
    """
    support = family.support()
    if not support:
        raise ValueError("no nonzero derivatives; the integral is trivial")
    wmax = support[-1]
    basis = hall.enumerate_hall_words(family.rank, wmax.degree)
    variables = [w for w in basis.words if w <= wmax]
    coordinate = {}
    for w in reversed(variables):
        g = family.value(w)
        for u in variables:
            if u <= w:
                continue
            gu = coordinate[u]
            if gu.is_zero():
                continue
            frame = derive(w, Polynomial.variable(u), rank=family.rank)
            if not frame.is_zero():
                g = g - frame * gu
        coordinate[w] = g
    return staircase_antiderivative([(w, coordinate[w]) for w in variables])
