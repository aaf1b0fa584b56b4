"""Certificate search: step bounds, the factor linear system, exact kernels.

For a first integral Q with variables of degree < m, a certificate consists
of a step s, a covector lam and factor polynomials C_i such that in the
quotient context (rank, s, m) every degree-m abnormal polynomial factors as
P_i = C_i * Q.  Matching monomial coefficients turns this into a homogeneous
sparse linear system over the rationals in the unknowns lam_w and c_{i,I};
counting monomials via the weighted generating series yields an a-priori
step bound, and the actual search ascends one step at a time until the
kernel contains a vector with a nonzero factor part.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import NamedTuple, Optional

from . import hall
from .abnormal import Covector, abnormal_polynomial, derive, iter_bracket_monomials
from .hall import CapExceededError
from .integral import (PolynomialODE, derivative_family, first_integral,
                       orthogonalize, translate_ode)
from .liealg import AlgebraContext
from .polyring import (Monomial, Polynomial, enumerate_monomials,
                       parse_polynomial, weighted_count_stream)

DEFAULT_STEP_CAP = 20_000_000


def step_bound(rank, layer, factor_degree, cap=DEFAULT_STEP_CAP):
    """Minimal step s >= layer whose factor system is underdetermined.

    The difference between factor variables and equations at step s is
    D * M(s - layer - q) - (D - 1) * M(s - layer), where D is the layer
    dimension and M the cumulative count of monomials in the variables of
    degree < layer; the bound is the first s where it reaches 1.
    """
    if rank < 2:
        raise ValueError("rank must be >= 2")
    if layer < 2:
        raise ValueError("layer must be >= 2")
    if factor_degree < 0:
        raise ValueError("factor degree must be >= 0")
    dim = hall.layer_dimension(rank, layer)
    multiplicities = {k: hall.layer_dimension(rank, k) for k in range(1, layer)}
    multiplicities[1] = multiplicities.get(1, 0) + 1  # cumulative sums
    stream = weighted_count_stream(multiplicities)
    size = factor_degree + 1
    ring = [0] * size
    for j in itertools.count():
        current = next(stream)
        ring[j % size] = current
        lagged = ring[(j - factor_degree) % size] if j >= factor_degree else 0
        if dim * lagged - (dim - 1) * current >= 1:
            return layer + j
        if layer + j >= cap:
            raise CapExceededError("step bound search exceeded cap %d" % cap)


def delta_series(rank, layer, factor_degree, order):
    """Coefficients delta_0..delta_order of the counting series.

    Partial sums of this series give variables minus equations of the factor
    system; ``step_bound`` returns the first index with partial sum >= 1.
    """
    dim = hall.layer_dimension(rank, layer)
    multiplicities = {k: hall.layer_dimension(rank, k) for k in range(1, layer)}
    stream = weighted_count_stream(multiplicities)
    counts = [next(stream) for _ in range(order + 1)]

    def count(j):
        return counts[j] if j >= 0 else 0

    return [dim * count(s - layer - factor_degree) - (dim - 1) * count(s - layer)
            for s in range(order + 1)]


class LambdaVar(NamedTuple):
    word: object


class FactorVar(NamedTuple):
    target: int
    monomial: Monomial


@dataclass
class LinearSystem:
    """Sparse rational homogeneous system with labelled rows and columns."""

    columns: list
    rows: list          # (label, dict col_index -> coefficient)
    n_lambda: int
    n_factor: int
    rank: int = 0
    step: int = 0
    layer: int = 0
    targets: list = field(default_factory=list)

    @property
    def n_rows(self):
        return len(self.rows)

    @property
    def n_cols(self):
        return len(self.columns)

    def check_vector(self, vec):
        """Exact residual test: every row pairs to zero with ``vec``."""
        for _, row in self.rows:
            total = Fraction(0)
            for col, coeff in row.items():
                value = vec.get(col)
                if value:
                    total += coeff * value
            if total:
                return False
        return True


def build_system(integral, layer, step, rank):
    """Assemble the residual system at the given trial step.

    One row per (target word, monomial) pair with a nonzero coefficient; the
    columns are the covector components on words of degree >= layer followed
    by the factor coefficients, target by target.  Rows are scaled to
    integers.
    """
    if integral.is_zero():
        raise ValueError("the integral must be nonzero")
    if rank < 2:
        raise ValueError("rank must be >= 2")
    if not layer <= step:
        raise ValueError("layer must be <= step")
    factor_degree = integral.weighted_degree()
    if factor_degree > step - layer:
        raise ValueError("integral degree exceeds step - layer")
    if any(v.degree > layer - 1 for v in integral.variables()):
        raise ValueError("integral has variables of degree >= layer")
    ctx = AlgebraContext.get(rank, step, layer)
    low = [w for w in ctx.words if w.degree <= layer - 1]
    targets = [w for w in ctx.words if w.degree == layer]
    lambda_words = [w for w in ctx.words if w.degree >= layer]
    factor_monomials = enumerate_monomials(low, step - layer - factor_degree)
    columns = [LambdaVar(w) for w in lambda_words]
    lambda_col = {w: i for i, w in enumerate(lambda_words)}
    factor_col = {}
    for ti in range(len(targets)):
        for mono in factor_monomials:
            factor_col[(ti, mono)] = len(columns)
            columns.append(FactorVar(ti, mono))
    all_monomials = enumerate_monomials(low, step - layer)
    integral_terms = list(integral.terms.items())
    rows = []
    for ti, target in enumerate(targets):
        brackets = {}
        for expo, current in iter_bracket_monomials(ctx, {target: 1}, low, step - layer):
            brackets[Monomial(expo)] = current
        for mono in all_monomials:
            entries = {}
            current = brackets.get(mono)
            if current:
                for w, c in current.items():
                    entries[lambda_col[w]] = Fraction(c)
            scale = mono.factorial()
            for qmono, qcoef in integral_terms:
                quotient = mono.divide(qmono)
                if quotient is None:
                    continue
                col = factor_col.get((ti, quotient))
                if col is None:
                    continue
                total = entries.get(col, Fraction(0)) - scale * qcoef
                if total:
                    entries[col] = total
                else:
                    entries.pop(col, None)
            if entries:
                rows.append(((ti, mono), _to_integer_row(entries)))
    return LinearSystem(columns, rows, len(lambda_words), len(factor_col),
                        rank, step, layer, targets)


def _to_integer_row(entries):
    denom = 1
    for value in entries.values():
        denom = denom * value.denominator // gcd(denom, value.denominator)
    out = {col: int(value * denom) for col, value in entries.items()}
    common = 0
    for value in out.values():
        common = gcd(common, value)
    if common > 1:
        out = {col: value // common for col, value in out.items()}
    return out


@dataclass
class Reduction:
    """A system with the covector unknowns eliminated by substitution.

    ``steps`` records, in elimination order, the normalized pivot rows that
    define each eliminated column; ``lift`` replays them backwards to recover
    a full-space solution from a reduced one.
    """

    original: LinearSystem
    system: LinearSystem
    steps: list
    kept: list

    def lift(self, reduced_vec):
        out = {self.kept[i]: value for i, value in reduced_vec.items()}
        for col, row in reversed(self.steps):
            total = Fraction(0)
            for c, coeff in row.items():
                if c != col:
                    value = out.get(c)
                    if value:
                        total += coeff * value
            if total:
                out[col] = -total
        return out


def reduce_system(system):
    """Eliminate the covector columns by substitution.

    The minimal-word block determines its own covector components one
    equation each; the remaining components are substituted from the first
    row they appear in, which stays in the system as a trivial row so the
    reduced row count is (d - 1) times the monomial count.
    """
    rows = [{c: Fraction(v) for c, v in row.items()} for _, row in system.rows]
    labels = [label for label, _ in system.rows]
    incidence = {}
    for ridx, row in enumerate(rows):
        for col in row:
            incidence.setdefault(col, set()).add(ridx)
    dropped = [False] * len(rows)
    steps = []
    eliminated = set()

    def eliminate(col, pivot_idx):
        eliminated.add(col)
        pivot = rows[pivot_idx]
        inverse = 1 / pivot[col]
        normalized = {c: v * inverse for c, v in pivot.items()}
        steps.append((col, normalized))
        for ridx in sorted(incidence.get(col, ()) - {pivot_idx}):
            row = rows[ridx]
            factor = row[col]
            for c, v in normalized.items():
                total = row.get(c, 0) - factor * v
                if total:
                    if c not in row:
                        incidence.setdefault(c, set()).add(ridx)
                    row[c] = total
                else:
                    if c in row:
                        del row[c]
                        incidence[c].discard(ridx)
        incidence.pop(col, None)
        for c in rows[pivot_idx]:
            if c != col:
                incidence.get(c, set()).discard(pivot_idx)
        rows[pivot_idx] = {}

    for ridx, label in enumerate(labels):
        if label[0] != 0:
            continue
        row = rows[ridx]
        lam_cols = [c for c in row if c < system.n_lambda]
        assert len(lam_cols) == 1, "minimal-word rows carry a single covector entry"
        eliminate(lam_cols[0], ridx)
        dropped[ridx] = True
    for col in range(system.n_lambda):
        holders = incidence.get(col)
        if not holders:
            continue
        eliminate(col, min(holders))
    kept = [c for c in range(len(system.columns)) if c not in eliminated]
    position = {c: i for i, c in enumerate(kept)}
    leftover = sum(1 for c in kept if c < system.n_lambda)
    reduced_rows = []
    for ridx, row in enumerate(rows):
        if dropped[ridx]:
            continue
        reduced_rows.append((labels[ridx],
                             {position[c]: v for c, v in row.items()}))
    reduced = LinearSystem([system.columns[c] for c in kept], reduced_rows,
                           leftover, system.n_factor, system.rank,
                           system.step, system.layer, system.targets)
    return Reduction(system, reduced, steps, kept)


def solve_kernel(system):
    """Exact kernel basis of the sparse rational system.

    Gaussian elimination with Markowitz-style pivoting: the pivot column is
    the sparsest active column, the pivot row the sparsest row in it, ties
    broken by label order.  Deterministic for a fixed input.  The basis has
    one integer-normalized vector per free column, in column order.
    """
    active = {}
    for ridx, (_, row) in enumerate(system.rows):
        if row:
            active[ridx] = {c: Fraction(v) for c, v in row.items()}
    incidence = {}
    for ridx, row in active.items():
        for col in row:
            incidence.setdefault(col, set()).add(ridx)
    pivots = []
    while incidence:
        col = min(incidence, key=lambda c: (len(incidence[c]), c))
        holders = incidence[col]
        ridx = min(holders, key=lambda r: (len(active[r]), r))
        pivot = active.pop(ridx)
        for c in pivot:
            bucket = incidence.get(c)
            if bucket is not None:
                bucket.discard(ridx)
                if not bucket:
                    del incidence[c]
        inverse = 1 / pivot[col]
        pivot = {c: v * inverse for c, v in pivot.items()}
        pivots.append((col, pivot))
        for other in sorted(incidence.get(col, ())):
            row = active[other]
            factor = row.pop(col)
            incidence[col].discard(other)
            for c, v in pivot.items():
                if c == col:
                    continue
                total = row.get(c, 0) - factor * v
                if total:
                    if c not in row:
                        incidence.setdefault(c, set()).add(other)
                    row[c] = total
                else:
                    if c in row:
                        del row[c]
                        bucket = incidence[c]
                        bucket.discard(other)
                        if not bucket:
                            del incidence[c]
            if not row:
                del active[other]
        incidence.pop(col, None)
    pivot_cols = {col for col, _ in pivots}
    basis = []
    for free in range(system.n_cols):
        if free in pivot_cols:
            continue
        vec = {free: Fraction(1)}
        for col, row in reversed(pivots):
            total = Fraction(0)
            for c, v in row.items():
                if c != col:
                    value = vec.get(c)
                    if value:
                        total += v * value
            if total:
                vec[col] = -total
        basis.append(_normalize_vector(vec))
    return basis


def _normalize_vector(vec):
    denom = 1
    for value in vec.values():
        denom = denom * value.denominator // gcd(denom, value.denominator)
    scaled = {c: value * denom for c, value in vec.items()}
    common = 0
    for value in scaled.values():
        common = gcd(common, int(value))
    if common > 1:
        scaled = {c: value / common for c, value in scaled.items()}
    lead = min(scaled)
    if scaled[lead] < 0:
        scaled = {c: -value for c, value in scaled.items()}
    return scaled


class VerificationReport:
    """Named exact checks of a certificate; all must hold."""

    def __init__(self, checks):
        self.checks = dict(checks)

    @property
    def ok(self):
        return all(self.checks.values())

    def to_json(self):
        return dict(self.checks)

    def __repr__(self):
        return "VerificationReport(%r)" % (self.checks,)


@dataclass
class Certificate:
    """An exact witness that ODE trajectories through the origin lift to
    abnormal curves in the free Carnot group of the given rank and step."""

    rank: int
    step: int
    layer: int
    ode: Optional[PolynomialODE]
    integral: Polynomial
    covector: dict
    factors: list
    report: Optional[VerificationReport] = None

    def context(self):
        return AlgebraContext.get(self.rank, self.step, self.layer)

    def covector_object(self):
        return Covector(self.context(), self.covector)

    def to_json(self):
        ctx = self.context()
        return {
            "rank": self.rank,
            "step": self.step,
            "layer_m": self.layer,
            "ode": self.ode.to_json() if self.ode is not None else None,
            "Q": self.integral.text(self.rank),
            "lambda": {ctx.basis.word_text(w): str(c)
                       for w, c in sorted(self.covector.items(),
                                          key=lambda kv: kv[0].key)},
            "factors": [f.text(self.rank) for f in self.factors],
            "report": self.report.to_json() if self.report is not None else None,
        }

    def to_json_text(self):
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data):
        rank = data["rank"]
        step = data["step"]
        layer = data["layer_m"]
        ctx = AlgebraContext.get(rank, step, layer)
        ode = None
        if data.get("ode") is not None:
            ode = PolynomialODE.from_json(data["ode"])
        covector = {ctx.basis.parse_word(text): Fraction(value)
                    for text, value in data["lambda"].items()}
        factors = [parse_polynomial(text, rank) for text in data["factors"]]
        report = None
        if data.get("report") is not None:
            report = VerificationReport(data["report"])
        return cls(rank, step, layer, ode, parse_polynomial(data["Q"], rank),
                   covector, factors, report)


def verify_certificate(cert):
    """Re-derive every certificate identity exactly and report per check.

    Checks: the gradient of the integral annihilates the ODE, the integral
    vanishes at the origin (both only for ODE certificates), every degree-m
    abnormal polynomial equals its factor times the integral, some factor is
    nonzero, and the covector is nonzero.
    """
    ctx = cert.context()
    lam = Covector(ctx, cert.covector)
    checks = {}
    if cert.ode is not None:
        residual = Polynomial.zero()
        for i, p in enumerate(cert.ode.components, start=1):
            residual = residual + p * derive(hall.generator(i), cert.integral,
                                             rank=cert.rank)
        checks["integral_annihilates_ode"] = residual.is_zero()
        checks["integral_vanishes_at_origin"] = cert.integral.constant_term() == 0
    targets = [w for w in ctx.words if w.degree == cert.layer]
    identity_ok = len(cert.factors) == len(targets)
    if identity_ok:
        for target, factor in zip(targets, cert.factors):
            left = abnormal_polynomial(ctx.element(target), lam)
            if left != factor * cert.integral:
                identity_ok = False
                break
    checks["factor_identity"] = identity_ok
    checks["factor_nonzero"] = any(not f.is_zero() for f in cert.factors)
    checks["covector_nonzero"] = not lam.is_zero()
    return VerificationReport(checks)


def _certificate_from_vector(system, vector, integral, ode):
    vector = _normalize_vector(vector)
    covector = {}
    factors = [Polynomial.zero() for _ in system.targets]
    pieces = [{} for _ in system.targets]
    for col, value in vector.items():
        label = system.columns[col]
        if isinstance(label, LambdaVar):
            covector[label.word] = value
        else:
            pieces[label.target][label.monomial] = value
    factors = [Polynomial(piece) for piece in pieces]
    cert = Certificate(system.rank, system.step, system.layer, ode,
                       integral, covector, factors)
    cert.report = verify_certificate(cert)
    return cert


def search_certificate(integral, layer, rank, ode=None, step_cap=None,
                       use_reduction=None, on_step=None):
    """Ascend the step one by one until the factor system has a usable kernel.

    A kernel vector is usable when its factor part is nonzero; that forces a
    nonzero abnormal polynomial.  Steps below layer + deg(integral) admit no
    factor variables and are skipped.  Raises CapExceededError when the
    search passes the a-priori bound or the configured cap.
    """
    factor_degree = integral.weighted_degree()
    if use_reduction is None:
        use_reduction = layer >= 3
    bound = step_bound(rank, layer, factor_degree,
                       cap=step_cap or DEFAULT_STEP_CAP)
    limit = bound if step_cap is None else min(bound, step_cap)
    for step in range(layer, limit + 1):
        if step < layer + factor_degree:
            continue
        system = build_system(integral, layer, step, rank)
        if use_reduction:
            reduction = reduce_system(system)
            vectors = solve_kernel(reduction.system)
            candidates = []
            for vec in vectors:
                lifted = reduction.lift({col: value for col, value in vec.items()})
                candidates.append(lifted)
        else:
            candidates = solve_kernel(system)
        candidates = [vec for vec in candidates
                      if any(isinstance(system.columns[c], FactorVar) and value
                             for c, value in vec.items())]
        if on_step is not None:
            on_step(step, system, len(candidates))
        if not candidates:
            continue
        best = min(candidates,
                   key=lambda vec: (len(vec), tuple(sorted(vec))))
        return _certificate_from_vector(system, best, integral, ode)
    raise CapExceededError("no certificate found up to step %d" % limit)


def find_certificate(ode, initial_point=None, override=None, step_cap=None,
                     use_reduction=None, on_step=None):
    """Run the full pipeline on an ODE and return a verified certificate."""
    if ode.rank < 2:
        raise ValueError("the pipeline requires rank >= 2")
    if initial_point is not None:
        ode = translate_ode(ode, initial_point)
    gradient = orthogonalize(ode, override)
    family = derivative_family(gradient, ode.rank)
    integral = first_integral(family)
    layer = 1 + max(v.degree for v in integral.variables())
    return search_certificate(integral, layer, ode.rank, ode=ode,
                              step_cap=step_cap, use_reduction=use_reduction,
                              on_step=on_step)


def concat_certificate(covector_a, word_a, covector_b, word_b, ctx,
                       step_cap=None, use_reduction=None):
    """Certificate for the concatenation of two abnormal curves.

    The inputs are covectors on a full (non-quotient) context of step s and
    horizontal words with nonzero abnormal polynomials; the product of the
    two abnormal polynomials is certified as a common factor at layer s.
    """
    if ctx.quotient_layer is not None:
        raise ValueError("concatenation expects the full group context")
    if ctx.step < 2:
        raise ValueError("step must be >= 2")
    if word_a.degree != 1 or word_b.degree != 1:
        raise ValueError("curve directions must be horizontal words")
    poly_a = abnormal_polynomial(ctx.element(word_a), covector_a)
    poly_b = abnormal_polynomial(ctx.element(word_b), covector_b)
    if poly_a.is_zero() or poly_b.is_zero():
        raise ValueError("both abnormal polynomials must be nonzero")
    product = poly_a * poly_b
    return search_certificate(product, ctx.step, ctx.rank, ode=None,
                              step_cap=step_cap, use_reduction=use_reduction)
